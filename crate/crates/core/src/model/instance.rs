use super::expr::{ConvexityKind, Expr};
use super::ModelError;

/// Sparse linear row `sum coefs * x >= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub coefs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl LinearRow {
    pub fn new(coefs: Vec<(usize, f64)>, rhs: f64) -> LinearRow {
        LinearRow { coefs, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest value of the left-hand side over the box.
    pub fn max_activity(&self, lower: &[f64], upper: &[f64]) -> f64 {
        self.coefs
            .iter()
            .map(|&(j, a)| {
                if a > 0.0 {
                    a * upper[j]
                } else if a < 0.0 {
                    a * lower[j]
                } else {
                    0.0
                }
            })
            .sum()
    }

    pub fn negated(&self) -> LinearRow {
        LinearRow {
            coefs: self.coefs.iter().map(|&(j, a)| (j, -a)).collect(),
            rhs: -self.rhs,
        }
    }
}

/// `expr(x) <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearConstraint {
    pub expr: Expr,
    pub kind: ConvexityKind,
    pub index: usize,
}

impl NonlinearConstraint {
    pub fn new(expr: Expr, index: usize) -> NonlinearConstraint {
        let kind = expr.classify_convexity();
        NonlinearConstraint { expr, kind, index }
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        self.expr.evaluate(x).max(0.0)
    }
}

/// `min c^T x  s.t.  A x >= b, g_k(x) <= 0, l <= x <= u, x_j integer for j in I`.
///
/// Infinite bounds are stored as `f64::INFINITY` / `f64::NEG_INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<LinearRow>,
    pub nonlinear: Vec<NonlinearConstraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Sorted integer variable indices.
    pub integers: Vec<usize>,
}

impl Instance {
    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.num_vars;
        if self.objective.len() != n {
            return Err(ModelError::schema("objective", format!("expected {n} entries, got {}", self.objective.len())));
        }
        if self.lower.len() != n {
            return Err(ModelError::schema("lower", format!("expected {n} entries, got {}", self.lower.len())));
        }
        if self.upper.len() != n {
            return Err(ModelError::schema("upper", format!("expected {n} entries, got {}", self.upper.len())));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(ModelError::schema("objective", format!("coefficient {j} is not finite")));
        }
        for j in 0..n {
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(ModelError::schema("lower/upper", format!("invalid bound on variable {j}")));
            }
            if self.lower[j] > self.upper[j] {
                return Err(ModelError::InconsistentBounds { var: j, lower: self.lower[j], upper: self.upper[j] });
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(ModelError::schema("rows", format!("row {i} has non-finite rhs")));
            }
            let mut seen: Vec<usize> = Vec::with_capacity(row.coefs.len());
            for &(j, a) in &row.coefs {
                if j >= n {
                    return Err(ModelError::schema("rows", format!("row {i} references variable {j} >= {n}")));
                }
                if !a.is_finite() {
                    return Err(ModelError::schema("rows", format!("row {i} has non-finite coefficient")));
                }
                if seen.contains(&j) {
                    return Err(ModelError::schema("rows", format!("row {i} repeats column {j}")));
                }
                seen.push(j);
            }
        }
        for (k, con) in self.nonlinear.iter().enumerate() {
            if let Some(j) = con.expr.max_var_index() {
                if j >= n {
                    return Err(ModelError::schema("nonlinear", format!("constraint {k} references variable {j} >= {n}")));
                }
            }
            if !con.expr.all_constants_finite() {
                return Err(ModelError::schema("nonlinear", format!("constraint {k} has a non-finite constant")));
            }
        }
        for w in self.integers.windows(2) {
            if w[0] >= w[1] {
                return Err(ModelError::schema("integers", "indices must be sorted and unique".to_string()));
            }
        }
        if let Some(&j) = self.integers.last() {
            if j >= n {
                return Err(ModelError::schema("integers", format!("index {j} >= {n}")));
            }
        }
        Ok(())
    }

    pub fn is_integer(&self, j: usize) -> bool {
        self.integers.binary_search(&j).is_ok()
    }

    pub fn integrality_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.num_vars];
        for &j in &self.integers {
            mask[j] = true;
        }
        mask
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Full feasibility check with absolute tolerance `tol` on every row,
    /// nonlinear constraint, bound and integrality requirement.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        for j in 0..self.num_vars {
            if x[j] < self.lower[j] - tol || x[j] > self.upper[j] + tol {
                return false;
            }
        }
        if self.integers.iter().any(|&j| (x[j] - x[j].round()).abs() > tol) {
            return false;
        }
        if self.rows.iter().any(|r| r.activity(x) < r.rhs - tol) {
            return false;
        }
        self.nonlinear.iter().all(|g| g.expr.evaluate(x) <= tol)
    }

    /// Moves a nonlinear objective into the constraints via an artificial
    /// variable `z`: minimize `c^T x + z` subject to `f(x) - z <= 0`.
    ///
    /// The bounds of `z` come from the interval range of `f` over the box,
    /// so the relaxation is bounded whenever the original box is.
    pub fn with_objective_expr(mut self, f: Expr) -> Instance {
        let z = self.num_vars;
        let range = f.interval(&self.lower, &self.upper);
        self.num_vars += 1;
        self.objective.push(1.0);
        self.lower.push(if range.lo.is_finite() { range.lo } else { f64::NEG_INFINITY });
        self.upper.push(if range.hi.is_finite() { range.hi } else { f64::INFINITY });
        let expr = Expr::sum(vec![f, Expr::scale(-1.0, Expr::var(z))]);
        let index = self.nonlinear.len();
        self.nonlinear.push(NonlinearConstraint::new(expr, index));
        self
    }

    /// Rounds the bounds of integer variables inward.
    pub fn rounded_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.lower.clone();
        let mut hi = self.upper.clone();
        for &j in &self.integers {
            lo[j] = (lo[j] - 1e-9).ceil();
            hi[j] = (hi[j] + 1e-9).floor();
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Instance {
        Instance {
            name: "t".into(),
            num_vars: 2,
            objective: vec![1.0, 0.0],
            rows: vec![LinearRow::new(vec![(0, 1.0), (1, 1.0)], 1.0)],
            nonlinear: vec![],
            lower: vec![0.0, 0.0],
            upper: vec![1.0, f64::INFINITY],
            integers: vec![0],
        }
    }

    #[test]
    fn validate_detects_bad_bounds_and_duplicates() {
        assert!(tiny().validate().is_ok());
        let mut bad = tiny();
        bad.lower[0] = 2.0;
        assert!(matches!(bad.validate(), Err(ModelError::InconsistentBounds { var: 0, .. })));
        let mut dup = tiny();
        dup.rows[0].coefs.push((0, 2.0));
        assert!(dup.validate().is_err());
        let mut oob = tiny();
        oob.rows[0].coefs.push((5, 2.0));
        assert!(oob.validate().is_err());
    }

    #[test]
    fn objective_transfer_adds_bounded_artificial() {
        let inst = tiny().with_objective_expr(Expr::square(Expr::var(0)));
        assert_eq!(inst.num_vars, 3);
        assert_eq!(inst.objective, vec![1.0, 0.0, 1.0]);
        assert_eq!((inst.lower[2], inst.upper[2]), (0.0, 1.0));
        assert_eq!(inst.nonlinear.len(), 1);
        assert_eq!(inst.nonlinear[0].expr.evaluate(&[0.5, 0.0, 0.25]), 0.0);
        assert_eq!(inst.nonlinear[0].kind, ConvexityKind::Convex);
    }

    #[test]
    fn feasibility_check() {
        let inst = tiny();
        assert!(inst.is_feasible(&[1.0, 0.0], 1e-9));
        assert!(!inst.is_feasible(&[0.5, 0.5], 1e-9));
        assert!(!inst.is_feasible(&[0.0, 0.5], 1e-9));
    }
}

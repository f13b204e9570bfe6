//! Bounded-variable primal simplex for the node LP
//! `min c^T x  s.t.  A x >= b, G x >= d, l <= x <= u`.
//!
//! Phase 1 minimizes the total row infeasibility `sum a_i` over
//! `A_i x + a_i - s_i = b_i` with `a, s >= 0`. When that minimum is positive
//! the optimal Phase-1 row duals `y` and the reduced costs `r = -A^T y` form
//! a Farkas ray: `y >= 0`, `y^T A + r^T = 0` and
//! `y^T b + r^T{l, u} = (Phase-1 optimum) > 0`.

use crate::relaxation::CutId;

pub const FEASIBILITY_TOL: f64 = 1e-7;
pub const CERTIFICATE_TOL: f64 = 1e-6;
pub const PIVOT_TOL: f64 = 1e-9;
const OPTIMALITY_TOL: f64 = 1e-9;
const DEGENERATE_PIVOTS_BEFORE_BLAND: usize = 1000;
const REFACTOR_INTERVAL: usize = 100;
const RAY_ZERO_TOL: f64 = 1e-11;

/// Origin of an LP row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowTag {
    /// Row `i` of the instance matrix `A`.
    Global(usize),
    Cut(CutId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coefs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub tag: RowTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub num_cols: usize,
    pub rows: Vec<LpRow>,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    pub fn new(num_cols: usize, lower: Vec<f64>, upper: Vec<f64>) -> LpProblem {
        LpProblem { num_cols, rows: Vec::new(), objective: vec![0.0; num_cols], lower, upper }
    }

    pub fn push_row(&mut self, coefs: Vec<(usize, f64)>, rhs: f64, tag: RowTag) {
        self.rows.push(LpRow { coefs, rhs, tag });
    }

    pub fn rhs_of(&self, tag: RowTag) -> Option<f64> {
        self.rows.iter().find(|r| r.tag == tag).map(|r| r.rhs)
    }

    pub fn is_well_formed(&self) -> bool {
        let n = self.num_cols;
        n > 0
            && self.objective.len() == n
            && self.lower.len() == n
            && self.upper.len() == n
            && (0..n).all(|j| self.lower[j] <= self.upper[j])
            && self.rows.iter().all(|r| r.rhs.is_finite() && r.coefs.iter().all(|&(j, a)| j < n && a.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NumericalFailure,
}

/// Dual ray `(y, w, r)` certifying infeasibility. Multipliers are keyed by row tag.
#[derive(Debug, Clone, PartialEq)]
pub struct DualRay {
    pub multipliers: Vec<(RowTag, f64)>,
    pub reduced_costs: Vec<f64>,
}

impl DualRay {
    /// Multipliers `y` on instance rows.
    pub fn y(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.multipliers.iter().filter_map(|&(t, v)| match t {
            RowTag::Global(i) => Some((i, v)),
            RowTag::Cut(_) => None,
        })
    }

    /// Multipliers `w` on linearization cuts.
    pub fn w(&self) -> impl Iterator<Item = (CutId, f64)> + '_ {
        self.multipliers.iter().filter_map(|&(t, v)| match t {
            RowTag::Cut(c) => Some((c, v)),
            RowTag::Global(_) => None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub objective: f64,
    /// Present iff `status == Infeasible`.
    pub dual_ray: Option<DualRay>,
    /// Row duals at optimality, in row order.
    pub duals: Vec<f64>,
    pub iterations: usize,
    /// Nonbasic side of each structural column at termination.
    pub basis: Vec<BoundSide>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSide {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { max_iterations: 20_000 }
    }
}

/// `r^T{l, u} = sum_{r_j > 0} r_j l_j + sum_{r_j < 0} r_j u_j`, or `-inf`
/// when a nonzero `r_j` meets an infinite bound on its side.
pub fn bound_term(r: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (j, &rj) in r.iter().enumerate() {
        if rj > 0.0 {
            if lower[j] == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            acc += rj * lower[j];
        } else if rj < 0.0 {
            if upper[j] == f64::INFINITY {
                return f64::NEG_INFINITY;
            }
            acc += rj * upper[j];
        }
    }
    acc
}

/// `y^T b + w^T d + r^T{l, u}`. `rhs` supplies `b_i` / `d_l` for each tag.
pub fn certificate_value(ray: &DualRay, lower: &[f64], upper: &[f64], rhs: impl Fn(RowTag) -> f64) -> f64 {
    let dual_part: f64 = ray.multipliers.iter().map(|&(t, v)| v * rhs(t)).sum();
    dual_part + bound_term(&ray.reduced_costs, lower, upper)
}

pub fn solve(lp: &LpProblem, basis_hint: Option<&[BoundSide]>) -> LpOutcome {
    solve_with(lp, basis_hint, SimplexOptions::default())
}

pub fn solve_with(lp: &LpProblem, basis_hint: Option<&[BoundSide]>, options: SimplexOptions) -> LpOutcome {
    let mut out = solve_inner(lp, basis_hint, options);
    if out.status == LpStatus::Optimal {
        out.objective = lp.objective.iter().zip(&out.primal).map(|(c, x)| c * x).sum();
    }
    out
}

fn solve_inner(lp: &LpProblem, basis_hint: Option<&[BoundSide]>, options: SimplexOptions) -> LpOutcome {
    debug_assert!(lp.is_well_formed());
    let mut t = Tableau::new(lp, basis_hint);
    let phase1_cost = t.phase1_cost();
    let mut iterations = 0;
    match t.optimize(&phase1_cost, options.max_iterations, &mut iterations) {
        Ok(Termination::Optimal) => {}
        Ok(Termination::Unbounded) => {
            // Phase 1 is bounded below by zero; getting here means numerical trouble.
            return t.outcome(LpStatus::NumericalFailure, iterations, None, Vec::new());
        }
        Ok(Termination::IterationLimit) => return t.outcome(LpStatus::IterationLimit, iterations, None, Vec::new()),
        Err(()) => return t.outcome(LpStatus::NumericalFailure, iterations, None, Vec::new()),
    }
    let infeasibility: f64 = (0..t.m).map(|i| t.x[t.n + i]).sum();
    if infeasibility > FEASIBILITY_TOL {
        let y = t.row_duals(&phase1_cost);
        return match farkas_ray(lp, &y) {
            Some(ray) => t.outcome(LpStatus::Infeasible, iterations, Some(ray), Vec::new()),
            None if infeasibility > CERTIFICATE_TOL => {
                t.outcome(LpStatus::NumericalFailure, iterations, None, Vec::new())
            }
            // Tiny residual infeasibility without a valid certificate: treat the
            // point as feasible within tolerance and continue with Phase 2.
            None => t.phase2(lp, options, iterations),
        };
    }
    t.phase2(lp, options, iterations)
}

/// Builds a normalized ray from Phase-1 duals and re-validates it against
/// the original row data.
fn farkas_ray(lp: &LpProblem, y_raw: &[f64]) -> Option<DualRay> {
    let n = lp.num_cols;
    let y: Vec<f64> = y_raw.iter().map(|&v| if v > RAY_ZERO_TOL { v } else { 0.0 }).collect();
    let reduced = |y: &[f64]| {
        let mut r = vec![0.0; n];
        for (row, &yi) in lp.rows.iter().zip(y) {
            if yi != 0.0 {
                for &(j, a) in &row.coefs {
                    r[j] -= yi * a;
                }
            }
        }
        r
    };
    let r0 = reduced(&y);
    let scale = y.iter().chain(r0.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let y: Vec<f64> = y.iter().map(|v| v / scale).collect();
    let mut r = reduced(&y);
    for rj in &mut r {
        if rj.abs() <= RAY_ZERO_TOL {
            *rj = 0.0;
        }
    }
    let ray = DualRay {
        multipliers: lp
            .rows
            .iter()
            .zip(&y)
            .filter(|(_, &v)| v != 0.0)
            .map(|(row, &v)| (row.tag, v))
            .collect(),
        reduced_costs: r,
    };
    let value = certificate_value(&ray, &lp.lower, &lp.upper, |tag| {
        lp.rhs_of(tag).expect("ray multipliers refer to rows of this LP")
    });
    (value > CERTIFICATE_TOL).then_some(ray)
}

enum Termination {
    Optimal,
    Unbounded,
    IterationLimit,
}

/// Revised simplex state over the columns `[x (n) | a (m) | s (m)]`.
struct Tableau {
    n: usize,
    m: usize,
    /// Row-major dense copy of the constraint matrix.
    a: Vec<f64>,
    b: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    /// Position in `basis` or `usize::MAX`.
    basic_pos: Vec<usize>,
    binv: Vec<f64>,
    pivots_since_refactor: usize,
    degenerate_pivots: usize,
    bland: bool,
}

impl Tableau {
    fn new(lp: &LpProblem, hint: Option<&[BoundSide]>) -> Tableau {
        let n = lp.num_cols;
        let m = lp.rows.len();
        let mut a = vec![0.0; m * n];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, v) in &row.coefs {
                a[i * n + j] += v;
            }
        }
        let b: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
        let total = n + 2 * m;
        let mut lo = vec![0.0; total];
        let mut hi = vec![f64::INFINITY; total];
        lo[..n].copy_from_slice(&lp.lower);
        hi[..n].copy_from_slice(&lp.upper);
        let mut x = vec![0.0; total];
        for j in 0..n {
            let prefer_upper = matches!(hint.and_then(|h| h.get(j)), Some(BoundSide::Upper));
            x[j] = if prefer_upper && hi[j].is_finite() {
                hi[j]
            } else if lo[j].is_finite() {
                lo[j]
            } else if hi[j].is_finite() {
                hi[j]
            } else {
                0.0
            };
        }
        let mut basis = Vec::with_capacity(m);
        let mut basic_pos = vec![usize::MAX; total];
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            let act: f64 = (0..n).map(|j| a[i * n + j] * x[j]).sum();
            let residual = b[i] - act;
            let (var, sign) = if residual >= 0.0 { (n + i, 1.0) } else { (n + m + i, -1.0) };
            x[var] = residual.abs();
            basic_pos[var] = i;
            basis.push(var);
            binv[i * m + i] = sign;
        }
        Tableau {
            n,
            m,
            a,
            b,
            lo,
            hi,
            x,
            basis,
            basic_pos,
            binv,
            pivots_since_refactor: 0,
            degenerate_pivots: 0,
            bland: false,
        }
    }

    fn phase1_cost(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.n + 2 * self.m];
        for i in 0..self.m {
            c[self.n + i] = 1.0;
        }
        c
    }

    fn column(&self, j: usize, out: &mut [f64]) {
        let (n, m) = (self.n, self.m);
        out.iter_mut().for_each(|v| *v = 0.0);
        if j < n {
            for i in 0..m {
                out[i] = self.a[i * n + j];
            }
        } else if j < n + m {
            out[j - n] = 1.0;
        } else {
            out[j - n - m] = -1.0;
        }
    }

    fn column_dot(&self, j: usize, y: &[f64]) -> f64 {
        let (n, m) = (self.n, self.m);
        if j < n {
            (0..m).map(|i| self.a[i * n + j] * y[i]).sum()
        } else if j < n + m {
            y[j - n]
        } else {
            -y[j - n - m]
        }
    }

    fn row_duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (k, &var) in self.basis.iter().enumerate() {
            let c = cost[var];
            if c != 0.0 {
                for i in 0..m {
                    y[i] += c * self.binv[k * m + i];
                }
            }
        }
        y
    }

    fn refactor(&mut self) -> Result<(), ()> {
        let m = self.m;
        let mut bmat = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (k, &var) in self.basis.iter().enumerate() {
            self.column(var, &mut col);
            for i in 0..m {
                bmat[i * m + k] = col[i];
            }
        }
        self.binv = invert(&bmat, m).ok_or(())?;
        self.pivots_since_refactor = 0;
        self.recompute_basics();
        Ok(())
    }

    fn recompute_basics(&mut self) {
        let (n, m) = (self.n, self.m);
        let mut rhs = self.b.clone();
        let mut col = vec![0.0; m];
        for j in 0..n + 2 * m {
            if self.basic_pos[j] == usize::MAX && self.x[j] != 0.0 {
                self.column(j, &mut col);
                for i in 0..m {
                    rhs[i] -= col[i] * self.x[j];
                }
            }
        }
        for k in 0..m {
            let v: f64 = (0..m).map(|i| self.binv[k * m + i] * rhs[i]).sum();
            self.x[self.basis[k]] = v;
        }
    }

    fn optimize(&mut self, cost: &[f64], max_iterations: usize, iterations: &mut usize) -> Result<Termination, ()> {
        let total = self.n + 2 * self.m;
        let m = self.m;
        let mut alpha = vec![0.0; m];
        let mut col = vec![0.0; m];
        loop {
            if *iterations >= max_iterations {
                return Ok(Termination::IterationLimit);
            }
            if self.pivots_since_refactor >= REFACTOR_INTERVAL {
                self.refactor()?;
            }
            let y = self.row_duals(cost);

            // Pricing.
            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..total {
                if self.basic_pos[j] != usize::MAX || self.lo[j] == self.hi[j] {
                    continue;
                }
                let d = cost[j] - self.column_dot(j, &y);
                let can_increase = self.x[j] < self.hi[j];
                let can_decrease = self.x[j] > self.lo[j];
                let eligible = (d < -OPTIMALITY_TOL && can_increase) || (d > OPTIMALITY_TOL && can_decrease);
                if !eligible {
                    continue;
                }
                if self.bland {
                    entering = Some((j, d));
                    break;
                }
                if d.abs() > best {
                    best = d.abs();
                    entering = Some((j, d));
                }
            }
            let Some((q, dq)) = entering else {
                return Ok(Termination::Optimal);
            };
            let dir = if dq < 0.0 { 1.0 } else { -1.0 };

            self.column(q, &mut col);
            for k in 0..m {
                alpha[k] = (0..m).map(|i| self.binv[k * m + i] * col[i]).sum();
            }

            // Ratio test. Basic k moves at rate -dir * alpha[k].
            let mut step = self.hi[q] - self.lo[q];
            let mut leaving: Option<(usize, bool)> = None;
            let mut leaving_rate = 0.0f64;
            for k in 0..m {
                let rate = -dir * alpha[k];
                if rate.abs() <= PIVOT_TOL {
                    continue;
                }
                let var = self.basis[k];
                let (limit, to_upper) = if rate < 0.0 {
                    if self.lo[var] == f64::NEG_INFINITY {
                        continue;
                    }
                    (((self.x[var] - self.lo[var]) / -rate).max(0.0), false)
                } else {
                    if self.hi[var] == f64::INFINITY {
                        continue;
                    }
                    (((self.hi[var] - self.x[var]) / rate).max(0.0), true)
                };
                let better = match leaving {
                    None => limit < step,
                    Some((lk, _)) => {
                        if limit < step - 1e-12 {
                            true
                        } else if limit <= step + 1e-12 {
                            if self.bland {
                                var < self.basis[lk]
                            } else {
                                rate.abs() > leaving_rate
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    step = limit.min(step);
                    leaving = Some((k, to_upper));
                    leaving_rate = rate.abs();
                }
            }
            if step == f64::INFINITY {
                return Ok(Termination::Unbounded);
            }
            *iterations += 1;
            if step <= 1e-12 {
                self.degenerate_pivots += 1;
                if self.degenerate_pivots > DEGENERATE_PIVOTS_BEFORE_BLAND {
                    self.bland = true;
                }
            }

            for k in 0..m {
                let var = self.basis[k];
                self.x[var] -= dir * step * alpha[k];
            }
            match leaving {
                None => {
                    // Bound flip.
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
                Some((r, to_upper)) => {
                    self.x[q] += dir * step;
                    let p = self.basis[r];
                    self.x[p] = if to_upper { self.hi[p] } else { self.lo[p] };
                    self.basic_pos[p] = usize::MAX;
                    self.basic_pos[q] = r;
                    self.basis[r] = q;
                    let piv = alpha[r];
                    for i in 0..m {
                        self.binv[r * m + i] /= piv;
                    }
                    for k in 0..m {
                        if k != r && alpha[k] != 0.0 {
                            let f = alpha[k];
                            for i in 0..m {
                                self.binv[k * m + i] -= f * self.binv[r * m + i];
                            }
                        }
                    }
                    self.pivots_since_refactor += 1;
                }
            }
        }
    }

    fn phase2(mut self, lp: &LpProblem, options: SimplexOptions, mut iterations: usize) -> LpOutcome {
        let (n, m) = (self.n, self.m);
        for i in 0..m {
            self.hi[n + i] = 0.0;
            if self.basic_pos[n + i] == usize::MAX {
                self.x[n + i] = 0.0;
            }
        }
        if self.refactor().is_err() {
            return self.outcome(LpStatus::NumericalFailure, iterations, None, Vec::new());
        }
        let mut cost = vec![0.0; n + 2 * m];
        cost[..n].copy_from_slice(&lp.objective);
        self.degenerate_pivots = 0;
        self.bland = false;
        match self.optimize(&cost, options.max_iterations, &mut iterations) {
            Ok(Termination::Optimal) => {
                if self.refactor().is_err() {
                    return self.outcome(LpStatus::NumericalFailure, iterations, None, Vec::new());
                }
                let duals = self.row_duals(&cost);
                self.outcome(LpStatus::Optimal, iterations, None, duals)
            }
            Ok(Termination::Unbounded) => self.outcome(LpStatus::Unbounded, iterations, None, Vec::new()),
            Ok(Termination::IterationLimit) => self.outcome(LpStatus::IterationLimit, iterations, None, Vec::new()),
            Err(()) => self.outcome(LpStatus::NumericalFailure, iterations, None, Vec::new()),
        }
    }

    fn outcome(&self, status: LpStatus, iterations: usize, ray: Option<DualRay>, duals: Vec<f64>) -> LpOutcome {
        let n = self.n;
        let mut primal = self.x[..n].to_vec();
        for j in 0..n {
            primal[j] = primal[j].clamp(self.lo[j], self.hi[j]);
        }
        let basis = (0..n)
            .map(|j| {
                if self.basic_pos[j] == usize::MAX && self.x[j] == self.hi[j] && self.hi[j] != self.lo[j] {
                    BoundSide::Upper
                } else {
                    BoundSide::Lower
                }
            })
            .collect();
        LpOutcome {
            status,
            primal,
            objective: f64::NAN,
            dual_ray: ray,
            duals,
            iterations,
            basis,
        }
    }
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(mat: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut a = mat.to_vec();
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for c in 0..m {
        let (p, pv) = (c..m)
            .map(|r| (r, a[r * m + c].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pv < 1e-12 {
            return None;
        }
        if p != c {
            for k in 0..m {
                a.swap(p * m + k, c * m + k);
                inv.swap(p * m + k, c * m + k);
            }
        }
        let d = a[c * m + c];
        for k in 0..m {
            a[c * m + k] /= d;
            inv[c * m + k] /= d;
        }
        for r in 0..m {
            if r != c {
                let f = a[r * m + c];
                if f != 0.0 {
                    for k in 0..m {
                        a[r * m + k] -= f * a[c * m + k];
                        inv[r * m + k] -= f * inv[c * m + k];
                    }
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp1(lower: f64, upper: f64) -> LpProblem {
        let mut lp = LpProblem::new(1, vec![lower], vec![upper]);
        lp.objective = vec![1.0];
        lp.push_row(vec![(0, 1.0)], 1.0, RowTag::Global(0));
        lp
    }

    #[test]
    fn single_row_optimal() {
        let out = solve_lp(&lp1(0.0, 10.0));
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.primal[0] - 1.0).abs() < 1e-12);
        assert!((out.objective - 1.0).abs() < 1e-12);
        assert!((out.duals[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_row_farkas() {
        let lp = lp1(0.0, 0.5);
        let out = solve_lp(&lp);
        assert_eq!(out.status, LpStatus::Infeasible);
        let ray = out.dual_ray.unwrap();
        assert_eq!(ray.multipliers, vec![(RowTag::Global(0), 1.0)]);
        assert_eq!(ray.reduced_costs, vec![-1.0]);
        let v = certificate_value(&ray, &lp.lower, &lp.upper, |_| 1.0);
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn certificate_infinite_bound_rule() {
        let ray = DualRay { multipliers: vec![], reduced_costs: vec![1.0] };
        assert_eq!(certificate_value(&ray, &[f64::NEG_INFINITY], &[1.0], |_| 0.0), f64::NEG_INFINITY);
        let ray = DualRay { multipliers: vec![(RowTag::Global(0), 1.0)], reduced_costs: vec![-1.0] };
        assert_eq!(certificate_value(&ray, &[0.5], &[0.5], |_| 1.0), 0.5);
        // zero reduced cost never touches the infinite side
        let ray = DualRay { multipliers: vec![], reduced_costs: vec![0.0] };
        assert_eq!(certificate_value(&ray, &[f64::NEG_INFINITY], &[f64::INFINITY], |_| 0.0), 0.0);
    }

    #[test]
    fn free_variables_and_unboundedness() {
        // min -x, x - y >= 0, y <= 3, both free below
        let mut lp = LpProblem::new(2, vec![f64::NEG_INFINITY; 2], vec![f64::INFINITY, 3.0]);
        lp.objective = vec![0.0, -1.0];
        lp.push_row(vec![(0, -1.0), (1, 1.0)], -2.0, RowTag::Global(0));
        let out = solve_lp(&lp);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective + 3.0).abs() < 1e-9);

        let mut unb = LpProblem::new(1, vec![0.0], vec![f64::INFINITY]);
        unb.objective = vec![-1.0];
        assert_eq!(solve_lp(&unb).status, LpStatus::Unbounded);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let mut lp = LpProblem::new(2, vec![0.0; 2], vec![10.0; 2]);
        lp.objective = vec![1.0, 1.0];
        lp.push_row(vec![(0, 1.0), (1, 1.0)], 3.0, RowTag::Global(0));
        lp.push_row(vec![(0, 1.0), (1, -1.0)], 1.0, RowTag::Global(1));
        let out = solve_with(&lp, None, SimplexOptions { max_iterations: 0 });
        assert_eq!(out.status, LpStatus::IterationLimit);
        assert!(out.dual_ray.is_none());
    }

    fn solve_lp(lp: &LpProblem) -> LpOutcome {
        solve(lp, None)
    }
}

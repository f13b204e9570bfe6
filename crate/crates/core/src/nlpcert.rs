//! Lagrangian infeasibility certificates for convex subproblems
//! `min f(x)  s.t.  g_k(x) <= 0, h_e(x) = 0, l <= x <= u`.
//!
//! Multipliers `lambda >= 0, mu` prove infeasibility when the aggregate
//! `sum lambda_k g_k + sum mu_e h_e` is positive on the whole box. At a
//! minimizer `x*` of the aggregate the same multipliers form a classical
//! Farkas ray for the gradient cuts of the `g_k` taken at `x*`.

use serde_json::{json, Value};
use thiserror::Error;

use crate::model::io::{bound_array, expr_from_json, float_array, require};
use crate::model::{ConvexityKind, Expr, ModelError, QuadTerm};
use crate::simplex::{certificate_value, DualRay, LpProblem, RowTag};

pub const CERTIFY_TOL: f64 = 1e-6;
pub const STATIONARITY_TOL: f64 = 1e-6;
const MAX_ITERATIONS: usize = 200_000;
const GAP_TOL: f64 = 1e-11;

#[derive(Debug, Error)]
pub enum CertError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0} is not convex")]
    NotConvex(String),
    #[error("equality {0} is not affine")]
    NotAffine(usize),
    #[error("variable {0} has an infinite bound")]
    InfiniteBox(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid multipliers: {0}")]
    InvalidMultipliers(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSubproblem {
    pub num_vars: usize,
    pub objective: Expr,
    /// `g_k(x) <= 0`, convex.
    pub inequalities: Vec<Expr>,
    /// `h_e(x) = 0`, affine.
    pub equalities: Vec<Expr>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ConvexSubproblem {
    pub fn new(
        objective: Expr,
        inequalities: Vec<Expr>,
        equalities: Vec<Expr>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<ConvexSubproblem, CertError> {
        let num_vars = lower.len();
        if upper.len() != num_vars {
            return Err(CertError::Dimension(format!("{} lower vs {} upper bounds", num_vars, upper.len())));
        }
        let too_big = |e: &Expr| e.max_var_index().is_some_and(|j| j >= num_vars);
        if objective.classify_convexity() != ConvexityKind::Convex {
            return Err(CertError::NotConvex("objective".into()));
        }
        for (k, g) in inequalities.iter().enumerate() {
            if g.classify_convexity() != ConvexityKind::Convex {
                return Err(CertError::NotConvex(format!("inequality {k}")));
            }
        }
        for (e, h) in equalities.iter().enumerate() {
            if h.to_affine().is_none() {
                return Err(CertError::NotAffine(e));
            }
        }
        if too_big(&objective) || inequalities.iter().chain(&equalities).any(too_big) {
            return Err(CertError::Dimension("variable index out of range".into()));
        }
        Ok(ConvexSubproblem { num_vars, objective, inequalities, equalities, lower, upper })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualMultipliers {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

impl DualMultipliers {
    pub fn zeros(sub: &ConvexSubproblem) -> DualMultipliers {
        DualMultipliers { lambda: vec![0.0; sub.inequalities.len()], mu: vec![0.0; sub.equalities.len()] }
    }

    fn check(&self, sub: &ConvexSubproblem) -> Result<(), CertError> {
        if self.lambda.len() != sub.inequalities.len() || self.mu.len() != sub.equalities.len() {
            return Err(CertError::InvalidMultipliers(format!(
                "expected {} lambda and {} mu, got {} and {}",
                sub.inequalities.len(),
                sub.equalities.len(),
                self.lambda.len(),
                self.mu.len()
            )));
        }
        if let Some(k) = self.lambda.iter().position(|&l| !l.is_finite() || l < 0.0) {
            return Err(CertError::InvalidMultipliers(format!("lambda[{k}] must be finite and nonnegative")));
        }
        if let Some(e) = self.mu.iter().position(|m| !m.is_finite()) {
            return Err(CertError::InvalidMultipliers(format!("mu[{e}] must be finite")));
        }
        Ok(())
    }
}

/// `f(x) + sum lambda_k g_k(x) + sum mu_e h_e(x)`.
pub fn lagrangian(sub: &ConvexSubproblem, x: &[f64], m: &DualMultipliers) -> f64 {
    sub.objective.evaluate(x)
        + sub.inequalities.iter().zip(&m.lambda).map(|(g, l)| l * g.evaluate(x)).sum::<f64>()
        + sub.equalities.iter().zip(&m.mu).map(|(h, u)| u * h.evaluate(x)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexMinimum {
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Certified lower bound on the box minimum.
    pub lower_bound: f64,
    pub iterations: usize,
}

/// Upper bound on the gradient's Lipschitz constant.
fn lipschitz(expr: &Expr) -> f64 {
    let dec = expr.decompose().expect("convex expressions decompose");
    dec.terms
        .iter()
        .map(|t| match t {
            QuadTerm::Square { coef, arg } => 2.0 * coef * arg.terms.iter().map(|(_, a)| a * a).sum::<f64>(),
            QuadTerm::Product { .. } => 0.0,
        })
        .sum()
}

/// `f(x) + min_{y in box} grad^T (y - x)`, a lower bound for convex `f`.
fn linear_minorant(fx: f64, grad: &[f64], x: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    fx + grad
        .iter()
        .enumerate()
        .map(|(j, &g)| (g * (lower[j] - x[j])).min(g * (upper[j] - x[j])))
        .sum::<f64>()
}

/// Minimizes a convex expression over a finite box by accelerated projected
/// gradient with step `1/L` and function-value restarts. The returned lower
/// bound comes from the linear minorant at the final point, so
/// `lower_bound <= true minimum <= value`.
pub fn minimize_convex(expr: &Expr, lower: &[f64], upper: &[f64]) -> Result<ConvexMinimum, CertError> {
    if expr.classify_convexity() != ConvexityKind::Convex {
        return Err(CertError::NotConvex("expression".into()));
    }
    let n = lower.len();
    if expr.max_var_index().is_some_and(|j| j >= n) || upper.len() != n {
        return Err(CertError::Dimension("box does not cover the expression's variables".into()));
    }
    if let Some(j) = (0..n).find(|&j| !lower[j].is_finite() || !upper[j].is_finite()) {
        return Err(CertError::InfiniteBox(j));
    }
    let project = |v: &mut [f64]| {
        for j in 0..n {
            v[j] = v[j].clamp(lower[j], upper[j]);
        }
    };
    let mut x: Vec<f64> = (0..n).map(|j| 0.5 * (lower[j] + upper[j])).collect();
    let l = lipschitz(expr);
    if l == 0.0 {
        let g = expr.gradient(&x, n);
        for j in 0..n {
            x[j] = if g[j] > 0.0 { lower[j] } else if g[j] < 0.0 { upper[j] } else { x[j] };
        }
        let value = expr.evaluate(&x);
        return Ok(ConvexMinimum { value, argmin: x, lower_bound: value, iterations: 0 });
    }
    let step = 1.0 / l;
    let mut fx = expr.evaluate(&x);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut best_lb = f64::NEG_INFINITY;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let g = expr.gradient(&y, n);
        let mut next: Vec<f64> = y.iter().zip(&g).map(|(v, d)| v - step * d).collect();
        project(&mut next);
        let f_next = expr.evaluate(&next);
        if f_next > fx {
            if t == 1.0 {
                // a plain step from x no longer descends: converged to rounding
                break;
            }
            // momentum overshot; restart from x
            y.clone_from(&x);
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        y = next.iter().zip(&x).map(|(a, b)| a + beta * (a - b)).collect();
        x = next;
        fx = f_next;
        t = t_next;
        if iterations % 8 == 0 {
            let gx = expr.gradient(&x, n);
            best_lb = best_lb.max(linear_minorant(fx, &gx, &x, lower, upper));
            if fx - best_lb <= GAP_TOL * fx.abs().max(1.0) {
                break;
            }
        }
    }
    let gx = expr.gradient(&x, n);
    best_lb = best_lb.max(linear_minorant(fx, &gx, &x, lower, upper));
    Ok(ConvexMinimum { value: fx, argmin: x, lower_bound: best_lb.min(fx), iterations })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    /// `sum lambda_k g_k + sum mu_e h_e`, read as `<= 0`.
    pub expr: Expr,
    pub minimum: ConvexMinimum,
    /// The aggregate is positive everywhere on the box.
    pub certified: bool,
}

/// Builds the aggregated inequality and checks its positivity over the box.
pub fn aggregate_inequality(sub: &ConvexSubproblem, m: &DualMultipliers) -> Result<Aggregate, CertError> {
    m.check(sub)?;
    let mut terms = Vec::new();
    for (g, &l) in sub.inequalities.iter().zip(&m.lambda) {
        if l != 0.0 {
            terms.push(Expr::scale(l, g.clone()));
        }
    }
    for (h, &u) in sub.equalities.iter().zip(&m.mu) {
        if u != 0.0 {
            terms.push(Expr::scale(u, h.clone()));
        }
    }
    let expr = if terms.is_empty() { Expr::constant(0.0) } else { Expr::sum(terms) };
    let minimum = minimize_convex(&expr, &sub.lower, &sub.upper)?;
    let certified = minimum.lower_bound > CERTIFY_TOL;
    Ok(Aggregate { expr, minimum, certified })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedCheck {
    /// `|| sum lambda_k grad g_k(x*) + sum mu_e grad h_e(x*) ||_inf`
    pub stationarity_residual: f64,
    /// `sum lambda_k (grad g_k^T x* - g_k(x*)) + sum mu_e (grad h_e^T x* - h_e(x*))`
    pub value: f64,
    pub passed: bool,
}

/// Checks that the multipliers are a Farkas ray for the gradient cuts
/// `grad g_k(x*)^T x <= grad g_k(x*)^T x* - g_k(x*)` (and the equalities).
pub fn linearized_farkas_check(sub: &ConvexSubproblem, x: &[f64], m: &DualMultipliers) -> Result<LinearizedCheck, CertError> {
    m.check(sub)?;
    if x.len() != sub.num_vars {
        return Err(CertError::Dimension(format!("point has length {}, expected {}", x.len(), sub.num_vars)));
    }
    let n = sub.num_vars;
    let mut stat = vec![0.0; n];
    let mut value = 0.0;
    let weighted = sub.inequalities.iter().zip(&m.lambda).chain(sub.equalities.iter().zip(&m.mu));
    for (g, &w) in weighted {
        if w == 0.0 {
            continue;
        }
        let grad = g.gradient(x, n);
        let gx: f64 = grad.iter().zip(x).map(|(a, b)| a * b).sum();
        for j in 0..n {
            stat[j] += w * grad[j];
        }
        value += w * (gx - g.evaluate(x));
    }
    let residual = stat.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok(LinearizedCheck {
        stationarity_residual: residual,
        value,
        passed: residual <= STATIONARITY_TOL && value < -CERTIFY_TOL,
    })
}

/// Gradient-cut rows at `x*` in `>=` form. Inequality `k` is row `k`;
/// equality `e` gives rows `K + 2e` (`h <= 0`) and `K + 2e + 1` (`h >= 0`).
pub fn linearized_rows(sub: &ConvexSubproblem, x: &[f64]) -> LpProblem {
    let n = sub.num_vars;
    let mut lp = LpProblem::new(n, sub.lower.clone(), sub.upper.clone());
    let push = |lp: &mut LpProblem, g: &Expr, sign: f64, tag: usize| {
        let grad = g.gradient(x, n);
        let gx: f64 = grad.iter().zip(x).map(|(a, b)| a * b).sum();
        let coefs = grad.iter().enumerate().filter(|(_, &d)| d != 0.0).map(|(j, &d)| (j, -sign * d)).collect();
        lp.push_row(coefs, -sign * (gx - g.evaluate(x)), RowTag::Global(tag));
    };
    let k = sub.inequalities.len();
    for (i, g) in sub.inequalities.iter().enumerate() {
        push(&mut lp, g, 1.0, i);
    }
    for (e, h) in sub.equalities.iter().enumerate() {
        push(&mut lp, h, 1.0, k + 2 * e);
        push(&mut lp, h, -1.0, k + 2 * e + 1);
    }
    lp
}

/// Dual ray on [`linearized_rows`] induced by the multipliers.
pub fn ray_from_multipliers(sub: &ConvexSubproblem, lp: &LpProblem, m: &DualMultipliers) -> DualRay {
    let k = sub.inequalities.len();
    let mut y = vec![0.0; lp.rows.len()];
    y[..k].copy_from_slice(&m.lambda);
    for (e, &u) in m.mu.iter().enumerate() {
        if u > 0.0 {
            y[k + 2 * e] = u;
        } else {
            y[k + 2 * e + 1] = -u;
        }
    }
    let mut r = vec![0.0; lp.num_cols];
    for (row, &yi) in lp.rows.iter().zip(&y) {
        for &(j, a) in &row.coefs {
            r[j] -= yi * a;
        }
    }
    DualRay {
        multipliers: lp.rows.iter().zip(&y).filter(|(_, &v)| v != 0.0).map(|(row, &v)| (row.tag, v)).collect(),
        reduced_costs: r,
    }
}

/// Farkas certificate value of the multipliers on the gradient cuts at `x*`.
pub fn linearized_certificate(sub: &ConvexSubproblem, x: &[f64], m: &DualMultipliers) -> f64 {
    let lp = linearized_rows(sub, x);
    let ray = ray_from_multipliers(sub, &lp, m);
    certificate_value(&ray, &lp.lower, &lp.upper, |tag| lp.rhs_of(tag).unwrap_or(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertStatus {
    Certified,
    NotCertified,
    InvalidMultipliers,
}

impl CertStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CertStatus::Certified => "certified",
            CertStatus::NotCertified => "not-certified",
            CertStatus::InvalidMultipliers => "invalid-multipliers",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertReport {
    pub status: CertStatus,
    pub aggregate: Option<Aggregate>,
    pub linearized: Option<LinearizedCheck>,
    pub linear_certificate: Option<f64>,
    pub message: Option<String>,
}

impl CertReport {
    pub fn to_json(&self) -> Value {
        json!({
            "status": self.status.as_str(),
            "aggregate_min": self.aggregate.as_ref().map(|a| a.minimum.value),
            "aggregate_lower_bound": self.aggregate.as_ref().map(|a| a.minimum.lower_bound),
            "point": self.aggregate.as_ref().map(|a| a.minimum.argmin.clone()),
            "stationarity_residual": self.linearized.as_ref().map(|c| c.stationarity_residual),
            "linearized_value": self.linearized.as_ref().map(|c| c.value),
            "linearized_passed": self.linearized.as_ref().map(|c| c.passed),
            "linear_certificate": self.linear_certificate,
            "message": self.message,
        })
    }
}

/// Full verification: aggregate positivity plus the linearized check at
/// `point`, or at the aggregate's minimizer when no point is given.
pub fn verify(sub: &ConvexSubproblem, m: &DualMultipliers, point: Option<&[f64]>) -> Result<CertReport, CertError> {
    if let Err(e) = m.check(sub) {
        return Ok(CertReport {
            status: CertStatus::InvalidMultipliers,
            aggregate: None,
            linearized: None,
            linear_certificate: None,
            message: Some(e.to_string()),
        });
    }
    let aggregate = aggregate_inequality(sub, m)?;
    let x = point.map(<[f64]>::to_vec).unwrap_or_else(|| aggregate.minimum.argmin.clone());
    let linearized = linearized_farkas_check(sub, &x, m)?;
    let linear_certificate = linearized_certificate(sub, &x, m);
    let status = if aggregate.certified { CertStatus::Certified } else { CertStatus::NotCertified };
    Ok(CertReport {
        status,
        aggregate: Some(aggregate),
        linearized: Some(linearized),
        linear_certificate: Some(linear_certificate),
        message: None,
    })
}

/// `{"num_vars", "objective"?: expr, "inequalities": [expr], "equalities"?: [expr], "lower", "upper"}`
pub fn subproblem_from_json(v: &Value) -> Result<ConvexSubproblem, CertError> {
    let obj = v.as_object().ok_or_else(|| ModelError::schema("<root>", "expected a JSON object"))?;
    let exprs = |field: &str| -> Result<Vec<Expr>, CertError> {
        match obj.get(field) {
            None => Ok(Vec::new()),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(i, e)| expr_from_json(e).map_err(|err| err.in_field(&format!("{field}[{i}]")).into()))
                .collect(),
            Some(_) => Err(ModelError::schema(field, "expected an array").into()),
        }
    };
    let objective = match obj.get("objective") {
        None => Expr::constant(0.0),
        Some(e) => expr_from_json(e).map_err(|err| err.in_field("objective"))?,
    };
    let lower = bound_array(require(obj, "lower")?, "lower")?;
    let upper = bound_array(require(obj, "upper")?, "upper")?;
    if let Some(n) = obj.get("num_vars").and_then(Value::as_u64) {
        if n as usize != lower.len() {
            return Err(CertError::Dimension(format!("num_vars {n} but {} bounds", lower.len())));
        }
    }
    ConvexSubproblem::new(objective, exprs("inequalities")?, exprs("equalities")?, lower, upper)
}

/// `{"lambda": [float], "mu"?: [float], "point"?: [float]}`
pub fn multipliers_from_json(v: &Value) -> Result<(DualMultipliers, Option<Vec<f64>>), CertError> {
    let obj = v.as_object().ok_or_else(|| ModelError::schema("<root>", "expected a JSON object"))?;
    let lambda = float_array(require(obj, "lambda")?, "lambda")?;
    let mu = match obj.get("mu") {
        None => Vec::new(),
        Some(m) => float_array(m, "mu")?,
    };
    let point = obj.get("point").map(|p| float_array(p, "point")).transpose()?;
    Ok((DualMultipliers { lambda, mu }, point))
}

//! Outer approximation of the nonlinear constraints.
//!
//! Convex constraints get gradient cuts, which are valid everywhere.
//! Nonconvex constraints get underestimators built from McCormick planes
//! (products) and secants (negative squares) over the current box; those
//! depend on the local bounds and are only valid inside the box they were
//! computed for, unless that box is the root box.

use std::collections::HashSet;

use thiserror::Error;

use crate::model::{ConvexityKind, Decomposition, Expr, Instance, LinExpr, QuadTerm};
use crate::solver::NodeId;

/// Violation threshold above which a nonlinear row is separated.
pub const SEPARATION_TOL: f64 = 1e-6;
const DUPLICATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CutId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub enum CutScope {
    Global,
    /// Valid for feasible points inside this box.
    Local { lower: Vec<f64>, upper: Vec<f64> },
}

impl CutScope {
    pub fn is_global(&self) -> bool {
        matches!(self, CutScope::Global)
    }
}

/// Linear inequality `coefs^T x >= rhs` before it is registered in a pool.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCut {
    pub coefs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl LinearCut {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the cut (positive means violated).
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.rhs - self.activity(x)
    }

    /// Scales to unit max-norm and drops exact zeros.
    pub fn normalized(mut self) -> LinearCut {
        self.coefs.retain(|&(_, a)| a != 0.0);
        self.coefs.sort_by_key(|t| t.0);
        let norm = self.coefs.iter().fold(0.0f64, |m, t| m.max(t.1.abs()));
        if norm > 0.0 {
            for t in &mut self.coefs {
                t.1 /= norm;
            }
            self.rhs /= norm;
        }
        self
    }

    /// `lin(x) <= 0` as a `>=` row.
    fn from_upper_form(lin: LinExpr) -> LinearCut {
        LinearCut {
            coefs: lin.terms.iter().map(|&(j, a)| (j, -a)).collect(),
            rhs: lin.constant,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub id: CutId,
    pub coefs: Vec<(usize, f64)>,
    pub rhs: f64,
    /// Index `k` of the nonlinear constraint that was linearized.
    pub origin: usize,
    pub introduced_at_depth: usize,
    pub introduced_at_node: NodeId,
    pub scope: CutScope,
}

impl Cut {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefs.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CutError {
    #[error("constraint is not classified convex")]
    NotConvex,
    #[error("point does not violate the constraint (violation {0:e})")]
    NotViolated(f64),
    #[error("zero gradient at a violated point")]
    ZeroGradient,
    #[error("variable {0} has an infinite bound")]
    InfiniteBound(usize),
    #[error("constraint has degree above two")]
    Unsupported,
}

/// Gradient cut `g(x~) + grad g(x~)^T (x - x~) <= 0`, returned in `>=` form
/// `-grad^T x >= g(x~) - grad^T x~`.
pub fn gradient_cut(g: &Expr, point: &[f64]) -> Result<LinearCut, CutError> {
    if g.classify_convexity() != ConvexityKind::Convex {
        return Err(CutError::NotConvex);
    }
    let value = g.evaluate(point);
    if value <= SEPARATION_TOL {
        return Err(CutError::NotViolated(value));
    }
    let grad = g.gradient(point, point.len());
    if grad.iter().all(|&d| d == 0.0) {
        return Err(CutError::ZeroGradient);
    }
    let gx: f64 = grad.iter().zip(point).map(|(d, x)| d * x).sum();
    Ok(LinearCut {
        coefs: grad.iter().enumerate().filter(|(_, &d)| d != 0.0).map(|(j, &d)| (j, -d)).collect(),
        rhs: value - gx,
    })
}

/// Plane `w >= coef_i x_i + coef_j x_j + constant`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearPlane {
    pub i: usize,
    pub j: usize,
    pub coef_i: f64,
    pub coef_j: f64,
    pub constant: f64,
}

impl BilinearPlane {
    pub fn evaluate(&self, xi: f64, xj: f64) -> f64 {
        self.coef_i * xi + self.coef_j * xj + self.constant
    }

    /// The plane as a cut on an explicit product variable `w`.
    pub fn as_cut(&self, w: usize) -> LinearCut {
        let mut coefs = vec![(w, 1.0)];
        for (v, c) in [(self.i, self.coef_i), (self.j, self.coef_j)] {
            match coefs.iter_mut().find(|t| t.0 == v) {
                Some(t) => t.1 -= c,
                None => coefs.push((v, -c)),
            }
        }
        LinearCut { coefs, rhs: self.constant }
    }
}

/// The two McCormick underestimators of `x_i * x_j` over the box.
pub fn mccormick_planes(i: usize, j: usize, lower: &[f64], upper: &[f64]) -> Result<[BilinearPlane; 2], CutError> {
    for v in [i, j] {
        if !lower[v].is_finite() || !upper[v].is_finite() {
            return Err(CutError::InfiniteBound(v));
        }
    }
    let (li, ui, lj, uj) = (lower[i], upper[i], lower[j], upper[j]);
    Ok([
        BilinearPlane { i, j, coef_i: lj, coef_j: li, constant: -li * lj },
        BilinearPlane { i, j, coef_i: uj, coef_j: ui, constant: -ui * uj },
    ])
}

/// McCormick cuts for an explicit product variable `w = x_i x_j`.
pub fn mccormick_cuts(i: usize, j: usize, w: usize, lower: &[f64], upper: &[f64]) -> Result<Vec<LinearCut>, CutError> {
    Ok(mccormick_planes(i, j, lower, upper)?.iter().map(|p| p.as_cut(w)).collect())
}

/// Affine minorant of `left * right` over the box, chosen to be tightest at `point`.
fn product_underestimator(left: &LinExpr, right: &LinExpr, lower: &[f64], upper: &[f64], point: &[f64], overestimate: bool) -> Option<LinExpr> {
    let r1 = left.range(lower, upper);
    let r2 = right.range(lower, upper);
    if !r1.is_finite() || !r2.is_finite() {
        return None;
    }
    let (a1, b1, a2, b2) = (r1.lo, r1.hi, r2.lo, r2.hi);
    // c2 * t1 + c1 * t2 - c1 * c2
    let plane = |c1: f64, c2: f64| {
        let mut lin = left.clone().scaled(c2);
        lin.add_scaled(right, c1);
        lin.constant -= c1 * c2;
        lin
    };
    let candidates = if overestimate {
        [plane(a1, b2), plane(b1, a2)]
    } else {
        [plane(a1, a2), plane(b1, b2)]
    };
    let [p, q] = candidates;
    let (vp, vq) = (p.evaluate(point), q.evaluate(point));
    let pick_first = if overestimate { vp <= vq } else { vp >= vq };
    Some(if pick_first { p } else { q })
}

/// Affine minorant of `g` over the box that is exact for the affine part,
/// tangent for convex squares, secant for concave squares and McCormick for
/// products. `None` if a needed range is unbounded.
pub fn underestimator(dec: &Decomposition, lower: &[f64], upper: &[f64], point: &[f64]) -> Option<LinExpr> {
    let mut acc = dec.affine.clone();
    for term in &dec.terms {
        match term {
            QuadTerm::Square { coef, arg } if *coef >= 0.0 => {
                // coef * (t0^2 + 2 t0 (t - t0)) = coef * (2 t0 t - t0^2)
                let t0 = arg.evaluate(point);
                acc.add_scaled(arg, 2.0 * coef * t0);
                acc.constant -= coef * t0 * t0;
            }
            QuadTerm::Square { coef, arg } => {
                // -t^2 >= -((a + b) t - a b) on [a, b]
                let r = arg.range(lower, upper);
                if !r.is_finite() {
                    return None;
                }
                acc.add_scaled(arg, coef * (r.lo + r.hi));
                acc.constant -= coef * r.lo * r.hi;
            }
            QuadTerm::Product { coef, left, right } => {
                if *coef == 0.0 {
                    continue;
                }
                let est = product_underestimator(left, right, lower, upper, point, *coef < 0.0)?;
                acc.add_scaled(&est, *coef);
            }
        }
    }
    acc.compact();
    Some(acc)
}

/// Registered cuts with their provenance.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    cuts: Vec<Cut>,
    global: Vec<CutId>,
}

impl CutPool {
    pub fn new() -> CutPool {
        CutPool::default()
    }

    pub fn get(&self, id: CutId) -> &Cut {
        &self.cuts[id.0]
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cut> {
        self.cuts.iter()
    }

    /// Globally valid cuts; every node's active set contains these.
    pub fn global_cuts(&self) -> &[CutId] {
        &self.global
    }

    pub fn is_global(&self, id: CutId) -> bool {
        self.cuts[id.0].scope.is_global()
    }

    /// Registers a cut unless an active cut with the same normalized row is
    /// at least as strong. Returns the new id.
    pub fn add(
        &mut self,
        cut: LinearCut,
        origin: usize,
        node: NodeId,
        depth: usize,
        scope: CutScope,
        active: &[CutId],
    ) -> Option<CutId> {
        let cut = cut.normalized();
        if cut.coefs.is_empty() && cut.rhs <= 0.0 {
            return None;
        }
        let duplicate = active.iter().chain(self.global.iter()).any(|&id| {
            let other = &self.cuts[id.0];
            other.coefs.len() == cut.coefs.len()
                && other
                    .coefs
                    .iter()
                    .zip(&cut.coefs)
                    .all(|(a, b)| a.0 == b.0 && (a.1 - b.1).abs() <= DUPLICATE_TOL)
                && cut.rhs <= other.rhs + DUPLICATE_TOL
        });
        if duplicate {
            return None;
        }
        let id = CutId(self.cuts.len());
        if scope.is_global() {
            self.global.push(id);
        }
        self.cuts.push(Cut {
            id,
            coefs: cut.coefs,
            rhs: cut.rhs,
            origin,
            introduced_at_depth: depth,
            introduced_at_node: node,
            scope,
        });
        Some(id)
    }
}

/// Per-instance data needed for separation.
#[derive(Debug, Clone)]
pub struct Separator {
    decompositions: Vec<Option<Decomposition>>,
    kinds: Vec<ConvexityKind>,
    exprs: Vec<Expr>,
}

/// Where and how a separation round runs.
#[derive(Debug, Clone, Copy)]
pub struct SeparationSite<'a> {
    pub node: NodeId,
    pub depth: usize,
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    /// Currently active cuts, used for duplicate suppression.
    pub active: &'a [CutId],
}

impl Separator {
    pub fn new(instance: &Instance) -> Result<Separator, CutError> {
        let mut decompositions = Vec::new();
        for g in &instance.nonlinear {
            let dec = g.expr.decompose();
            if dec.is_none() {
                return Err(CutError::Unsupported);
            }
            decompositions.push(dec);
        }
        Ok(Separator {
            decompositions,
            kinds: instance.nonlinear.iter().map(|g| g.kind).collect(),
            exprs: instance.nonlinear.iter().map(|g| g.expr.clone()).collect(),
        })
    }

    pub fn kind(&self, k: usize) -> ConvexityKind {
        self.kinds[k]
    }

    pub fn decomposition(&self, k: usize) -> &Decomposition {
        self.decompositions[k].as_ref().expect("checked in Separator::new")
    }

    /// Linearization of constraint `k` at `point` without registering it.
    pub fn cut_for(&self, k: usize, point: &[f64], lower: &[f64], upper: &[f64]) -> Option<(LinearCut, bool)> {
        if self.exprs[k].evaluate(point) <= SEPARATION_TOL {
            return None;
        }
        if self.kinds[k] == ConvexityKind::Convex {
            return gradient_cut(&self.exprs[k], point).ok().map(|c| (c, true));
        }
        let lin = underestimator(self.decomposition(k), lower, upper, point)?;
        if lin.evaluate(point) <= SEPARATION_TOL {
            return None;
        }
        Some((LinearCut::from_upper_form(lin), false))
    }

    /// Separates every violated nonlinear row at `point` and registers the
    /// cuts. Cuts separated at depth 0 are global.
    pub fn separate(&self, site: SeparationSite<'_>, point: &[f64], pool: &mut CutPool) -> Vec<CutId> {
        let mut added = Vec::new();
        let mut active: Vec<CutId> = site.active.to_vec();
        for k in 0..self.exprs.len() {
            let Some((cut, global)) = self.cut_for(k, point, site.lower, site.upper) else {
                continue;
            };
            let scope = if global || site.depth == 0 {
                CutScope::Global
            } else {
                CutScope::Local { lower: site.lower.to_vec(), upper: site.upper.to_vec() }
            };
            if let Some(id) = pool.add(cut, k, site.node, site.depth, scope, &active) {
                active.push(id);
                added.push(id);
            }
        }
        added
    }

    /// Indices of nonlinear rows violated by more than the separation tolerance.
    pub fn violated(&self, point: &[f64]) -> Vec<usize> {
        (0..self.exprs.len()).filter(|&k| self.exprs[k].evaluate(point) > SEPARATION_TOL).collect()
    }

    /// Variables that appear in nonconvex terms of constraint `k`.
    pub fn nonconvex_vars(&self, k: usize) -> Vec<usize> {
        let mut vars: Vec<usize> = self
            .decomposition(k)
            .terms
            .iter()
            .filter(|t| !t.is_convex())
            .flat_map(QuadTerm::variables)
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        vars.sort_unstable();
        vars
    }

    pub fn expr(&self, k: usize) -> &Expr {
        &self.exprs[k]
    }

    pub fn len(&self) -> usize {
        self.exprs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exprs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearRow, NonlinearConstraint};

    fn sq_minus_4() -> Expr {
        Expr::sum(vec![Expr::square(Expr::var(0)), Expr::constant(-4.0)])
    }

    #[test]
    fn gradient_cut_example() {
        let cut = gradient_cut(&sq_minus_4(), &[3.0]).unwrap();
        assert_eq!(cut.coefs, vec![(0, -6.0)]);
        assert_eq!(cut.rhs, -13.0);
        let n = cut.normalized();
        assert_eq!(n.coefs, vec![(0, -1.0)]);
        assert!((n.rhs + 13.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_cut_preconditions() {
        assert_eq!(gradient_cut(&sq_minus_4(), &[2.0]), Err(CutError::NotViolated(0.0)));
        let bil = Expr::product(Expr::var(0), Expr::var(1));
        assert_eq!(gradient_cut(&bil, &[1.0, 1.0]), Err(CutError::NotConvex));
        // x^2 + 1 at 0: violated with zero gradient
        let e = Expr::sum(vec![Expr::square(Expr::var(0)), Expr::constant(1.0)]);
        assert_eq!(gradient_cut(&e, &[0.0]), Err(CutError::ZeroGradient));
    }

    #[test]
    fn mccormick_unit_box() {
        let [p, q] = mccormick_planes(0, 1, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!((p.coef_i, p.coef_j, p.constant), (0.0, 0.0, 0.0));
        assert_eq!((q.coef_i, q.coef_j, q.constant), (1.0, 1.0, -1.0));
        let cuts = mccormick_cuts(0, 1, 2, &[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        // w - x - y >= -1
        assert_eq!(cuts[1], LinearCut { coefs: vec![(2, 1.0), (0, -1.0), (1, -1.0)], rhs: -1.0 });
    }

    #[test]
    fn mccormick_point_box() {
        for p in mccormick_planes(0, 1, &[2.0, 3.0], &[2.0, 3.0]).unwrap() {
            assert_eq!(p.evaluate(2.0, 3.0), 6.0);
        }
    }

    #[test]
    fn mccormick_rejects_infinite_bounds() {
        assert_eq!(
            mccormick_planes(0, 1, &[0.0, f64::NEG_INFINITY], &[1.0, 1.0]),
            Err(CutError::InfiniteBound(1))
        );
    }

    fn instance(nl: Vec<Expr>, n: usize, upper: f64) -> Instance {
        Instance {
            name: "r".into(),
            num_vars: n,
            objective: vec![0.0; n],
            rows: vec![LinearRow::new(vec![(0, 1.0)], 0.0)],
            nonlinear: nl.into_iter().enumerate().map(|(k, e)| NonlinearConstraint::new(e, k)).collect(),
            lower: vec![0.0; n],
            upper: vec![upper; n],
            integers: vec![],
        }
    }

    #[test]
    fn separate_convex_gives_one_global_cut() {
        let inst = instance(vec![sq_minus_4()], 1, 10.0);
        let sep = Separator::new(&inst).unwrap();
        let mut pool = CutPool::new();
        let site = SeparationSite { node: NodeId(3), depth: 2, lower: &inst.lower, upper: &inst.upper, active: &[] };
        let ids = sep.separate(site, &[3.0], &mut pool);
        assert_eq!(ids.len(), 1);
        assert!(pool.is_global(ids[0]));
        assert_eq!(pool.global_cuts(), &ids[..]);
        // same point again: duplicate suppressed
        assert!(sep.separate(site, &[3.0], &mut pool).is_empty());
        // feasible point: nothing
        assert!(sep.separate(site, &[1.0], &mut pool).is_empty());
    }

    #[test]
    fn separate_bilinear_at_depth_is_local() {
        // 4 - x*y <= 0 over [0,10]^2 at (0.1, 0.1), where the overestimator gives xy <= 1
        let e = Expr::sum(vec![Expr::constant(4.0), Expr::scale(-1.0, Expr::product(Expr::var(0), Expr::var(1)))]);
        let inst = instance(vec![e], 2, 10.0);
        let sep = Separator::new(&inst).unwrap();
        let mut pool = CutPool::new();
        let site = SeparationSite { node: NodeId(7), depth: 3, lower: &inst.lower, upper: &inst.upper, active: &[] };
        let ids = sep.separate(site, &[0.1, 0.1], &mut pool);
        assert_eq!(ids.len(), 1);
        let cut = pool.get(ids[0]);
        assert_eq!(cut.introduced_at_depth, 3);
        assert_eq!(cut.introduced_at_node, NodeId(7));
        assert!(!cut.scope.is_global());
        assert!(cut.activity(&[0.1, 0.1]) < cut.rhs);
        // root separation of the same row is global
        let root = SeparationSite { node: NodeId(0), depth: 0, ..site };
        let mut root_pool = CutPool::new();
        let ids = sep.separate(root, &[0.1, 0.1], &mut root_pool);
        assert_eq!(ids.len(), 1);
        assert!(root_pool.is_global(ids[0]));
    }

    #[test]
    fn concave_square_secant_is_valid() {
        // 1 - x^2 <= 0 on [-2, 3]
        let e = Expr::sum(vec![Expr::constant(1.0), Expr::scale(-1.0, Expr::square(Expr::var(0)))]);
        let dec = e.decompose().unwrap();
        let lin = underestimator(&dec, &[-2.0], &[3.0], &[0.0]).unwrap();
        for k in 0..=500 {
            let x = -2.0 + 5.0 * k as f64 / 500.0;
            assert!(lin.evaluate(&[x]) <= e.evaluate(&[x]) + 1e-12);
        }
    }
}

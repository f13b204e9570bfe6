//! Infeasibility analysis.
//!
//! An infeasible node LP yields a dual ray `(y, w, r)`. Aggregating the
//! instance rows with `y` and the cuts with `w` gives a proof row
//! `(y^T A + w^T G) x >= y^T b + w^T d` whose maximal activity over the node
//! box is below its right-hand side. The row is valid wherever every cut it
//! uses is valid, so:
//!
//! * dropping all local cut multipliers gives a globally valid row, which
//!   may or may not still prove infeasibility at the node (`relax_to_global`);
//! * keeping them gives a row valid in the subtree of the shallowest
//!   ancestor on the path that already owns every used cut (`lift_local_proof`).
//!
//! Propagation infeasibilities are explained by walking the trail's
//! antecedent links back to branching decisions.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::model::Instance;
use crate::propagation::{BoundLiteral, Conflicting, Propagator, Reason, RowRef, Side, Trail};
use crate::relaxation::{CutId, CutPool, CutScope};
use crate::simplex::{bound_term, DualRay, CERTIFICATE_TOL};
use crate::solver::NodeId;

pub const MAX_CONFLICT_AGE: u64 = 10_000;
pub const CONFLICT_POOL_CAPACITY: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConflictId(pub usize);

/// Where a proof or conflict constraint is valid.
#[derive(Debug, Clone, PartialEq)]
pub enum ProofScope {
    Global,
    /// Valid for feasible points in the box of `node` (at `depth`) and its subtree.
    Local { depth: usize, node: NodeId, lower: Vec<f64>, upper: Vec<f64> },
}

impl ProofScope {
    pub fn is_global(&self) -> bool {
        matches!(self, ProofScope::Global)
    }

    pub fn depth(&self) -> usize {
        match self {
            ProofScope::Global => 0,
            ProofScope::Local { depth, .. } => *depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarkasProof {
    /// Multipliers on instance rows.
    pub y: Vec<(usize, f64)>,
    /// Multipliers on cuts.
    pub w: Vec<(CutId, f64)>,
    /// `r = -(y^T A + w^T G)`.
    pub r: Vec<f64>,
    /// `y^T A + w^T G`, sparse.
    pub row: Vec<(usize, f64)>,
    pub rhs: f64,
    /// `rhs + r^T{l, u}` at the bounds it was last evaluated at.
    pub certificate: f64,
    pub scope: ProofScope,
    pub created_at: NodeId,
    pub created_depth: usize,
}

impl FarkasProof {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.row.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest value of the proof row over the box.
    pub fn max_activity(&self, lower: &[f64], upper: &[f64]) -> f64 {
        -bound_term(&self.r, lower, upper)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProofError {
    #[error("re-accumulated certificate {0:e} is not positive")]
    Invalid(f64),
}

/// Dense aggregation of `y^T A + w^T G` and `y^T b + w^T d`.
fn aggregate(instance: &Instance, pool: &CutPool, y: &[(usize, f64)], w: &[(CutId, f64)]) -> (Vec<f64>, f64) {
    let mut dense = vec![0.0; instance.num_vars];
    let mut rhs = 0.0;
    for &(i, v) in y {
        let row = &instance.rows[i];
        for &(j, a) in &row.coefs {
            dense[j] += v * a;
        }
        rhs += v * row.rhs;
    }
    for &(id, v) in w {
        let cut = pool.get(id);
        for &(j, a) in &cut.coefs {
            dense[j] += v * a;
        }
        rhs += v * cut.rhs;
    }
    (dense, rhs)
}

fn assemble(
    instance: &Instance,
    pool: &CutPool,
    y: Vec<(usize, f64)>,
    w: Vec<(CutId, f64)>,
    lower: &[f64],
    upper: &[f64],
) -> (Vec<(usize, f64)>, f64, Vec<f64>, f64) {
    let (dense, rhs) = aggregate(instance, pool, &y, &w);
    let r: Vec<f64> = dense.iter().map(|a| -a).collect();
    let certificate = rhs + bound_term(&r, lower, upper);
    let row = dense.iter().enumerate().filter(|(_, &a)| a != 0.0).map(|(j, &a)| (j, a)).collect();
    (row, rhs, r, certificate)
}

/// Turns an LP ray into a proof by exact re-accumulation over the original
/// rows and re-validates it at the node box.
pub fn build_proof(
    ray: &DualRay,
    instance: &Instance,
    pool: &CutPool,
    lower: &[f64],
    upper: &[f64],
    node: NodeId,
    depth: usize,
) -> Result<FarkasProof, ProofError> {
    let y: Vec<(usize, f64)> = ray.y().filter(|t| t.1 > 0.0).collect();
    let w: Vec<(CutId, f64)> = ray.w().filter(|t| t.1 > 0.0).collect();
    let (row, rhs, r, certificate) = assemble(instance, pool, y.clone(), w.clone(), lower, upper);
    if certificate.is_nan() || certificate <= CERTIFICATE_TOL {
        return Err(ProofError::Invalid(certificate));
    }
    Ok(FarkasProof {
        y,
        w,
        r,
        row,
        rhs,
        certificate,
        scope: ProofScope::Local { depth, node, lower: lower.to_vec(), upper: upper.to_vec() },
        created_at: node,
        created_depth: depth,
    })
}

/// Drops the multipliers of all non-global cuts and re-evaluates the
/// certificate at the creating node's box. `None` means rejected.
pub fn relax_to_global(
    proof: &FarkasProof,
    instance: &Instance,
    pool: &CutPool,
    lower: &[f64],
    upper: &[f64],
) -> Option<FarkasProof> {
    let w: Vec<(CutId, f64)> = proof.w.iter().copied().filter(|&(id, _)| pool.is_global(id)).collect();
    let (row, rhs, r, certificate) = assemble(instance, pool, proof.y.clone(), w.clone(), lower, upper);
    if certificate.is_nan() || certificate <= CERTIFICATE_TOL {
        return None;
    }
    Some(FarkasProof { y: proof.y.clone(), w, r, row, rhs, certificate, scope: ProofScope::Global, ..proof.clone() })
}

/// Outcome of lifting a local proof.
#[derive(Debug, Clone, PartialEq)]
pub enum Lifted {
    /// No local cut is used; the proof is globally valid.
    Global(FarkasProof),
    /// Valid in the subtree of `path[q]`.
    Local { proof: FarkasProof, q: usize },
}

/// Scopes a proof to the shallowest ancestor that owns every used local cut.
/// `path[d]` is the node at depth `d` on the way to the creating node.
pub fn lift_local_proof(
    proof: &FarkasProof,
    path: &[NodeId],
    instance: &Instance,
    pool: &CutPool,
    lower: &[f64],
    upper: &[f64],
) -> Lifted {
    let deepest = proof
        .w
        .iter()
        .filter(|&&(id, v)| v != 0.0 && !pool.is_global(id))
        .map(|&(id, _)| pool.get(id))
        .max_by_key(|c| c.introduced_at_depth);
    let Some(cut) = deepest else {
        let global = relax_to_global(proof, instance, pool, lower, upper)
            .unwrap_or_else(|| FarkasProof { scope: ProofScope::Global, ..proof.clone() });
        return Lifted::Global(global);
    };
    let q = cut.introduced_at_depth;
    debug_assert!(q <= proof.created_depth && path.len() > q);
    let (lower_q, upper_q) = match &cut.scope {
        CutScope::Local { lower, upper } => (lower.clone(), upper.clone()),
        CutScope::Global => unreachable!("filtered above"),
    };
    let scope = ProofScope::Local { depth: q, node: path[q], lower: lower_q, upper: upper_q };
    Lifted::Local { proof: FarkasProof { scope, ..proof.clone() }, q }
}

/// Body of a learned constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum ConflictBody {
    /// `coefs^T x >= rhs`
    Linear { coefs: Vec<(usize, f64)>, rhs: f64 },
    /// At least one literal holds.
    Disjunction(Vec<BoundLiteral>),
}

impl ConflictBody {
    /// Amount by which `x` violates the constraint (positive means violated).
    pub fn violation(&self, x: &[f64]) -> f64 {
        match self {
            ConflictBody::Linear { coefs, rhs } => rhs - coefs.iter().map(|&(j, a)| a * x[j]).sum::<f64>(),
            ConflictBody::Disjunction(lits) => lits
                .iter()
                .map(|l| match l.side {
                    Side::Lower => l.bound - x[l.var],
                    Side::Upper => x[l.var] - l.bound,
                })
                .fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConflictOrigin {
    DualProof,
    Graph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictConstraint {
    pub id: ConflictId,
    pub body: ConflictBody,
    pub scope: ProofScope,
    pub origin: ConflictOrigin,
    /// Nodes since the constraint last propagated.
    pub age: u64,
    pub uses: u64,
}

impl ConflictConstraint {
    pub fn propagator(&self) -> Propagator<'_> {
        let source = RowRef::Conflict(self.id);
        match &self.body {
            ConflictBody::Linear { coefs, rhs } => Propagator::Row { coefs, rhs: *rhs, source },
            ConflictBody::Disjunction(literals) => Propagator::Disjunction { literals, source },
        }
    }
}

/// Result of explaining a propagation infeasibility.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphConflict {
    /// No branching decision is involved and every reason is global.
    GlobalInfeasible,
    /// No branching decision is involved but a local reason is.
    LocalInfeasible,
    Conflict { body: ConflictBody, scope_global: bool, decisions: Vec<usize> },
}

/// Decision-cut analysis: collects the branching decisions that the
/// conflicting row transitively depends on and forbids their conjunction.
/// `is_local` reports whether a reason row is only locally valid.
pub fn analyze_propagation_conflict(
    trail: &Trail,
    conflicting: &Conflicting,
    is_int: &[bool],
    is_local: impl Fn(RowRef) -> bool,
) -> GraphConflict {
    let changes = trail.changes();
    let mut local = is_local(conflicting.source);
    let mut stack: Vec<usize> = conflicting.bounds.iter().filter_map(|&(v, s)| trail.last_change(v, s)).collect();
    let mut seen = BTreeSet::new();
    let mut decisions = BTreeSet::new();
    while let Some(pos) = stack.pop() {
        if !seen.insert(pos) {
            continue;
        }
        let ch = &changes[pos];
        match ch.reason {
            Reason::Branching => {
                decisions.insert(pos);
            }
            Reason::Propagated(src) => {
                local |= is_local(src);
                stack.extend(ch.antecedents.iter().copied());
            }
        }
    }
    if decisions.is_empty() {
        return if local { GraphConflict::LocalInfeasible } else { GraphConflict::GlobalInfeasible };
    }
    let decisions: Vec<usize> = decisions.into_iter().collect();
    let literals: Vec<BoundLiteral> = decisions.iter().map(|&p| negate(&changes[p], is_int)).collect();
    let binary = decisions.iter().all(|&p| {
        let ch = &changes[p];
        is_int[ch.var] && (ch.new == 0.0 || ch.new == 1.0) && {
            let (lo, hi) = (ch.old.min(ch.new), ch.old.max(ch.new));
            lo >= 0.0 && hi <= 1.0
        }
    });
    let body = if binary {
        let mut coefs = Vec::new();
        let mut rhs = 1.0;
        for lit in &literals {
            match lit.side {
                // x >= 1
                Side::Lower => coefs.push((lit.var, 1.0)),
                // x <= 0, i.e. -x >= -1 + 1
                Side::Upper => {
                    coefs.push((lit.var, -1.0));
                    rhs -= 1.0;
                }
            }
        }
        ConflictBody::Linear { coefs, rhs }
    } else {
        ConflictBody::Disjunction(literals)
    };
    GraphConflict::Conflict { body, scope_global: !local, decisions }
}

/// Literal violated exactly when the decision holds (relaxed to non-strict
/// for continuous variables).
fn negate(ch: &crate::propagation::BoundChange, is_int: &[bool]) -> BoundLiteral {
    let step = if is_int[ch.var] { 1.0 } else { 0.0 };
    match ch.side {
        Side::Lower => BoundLiteral { var: ch.var, side: Side::Upper, bound: ch.new - step },
        Side::Upper => BoundLiteral { var: ch.var, side: Side::Lower, bound: ch.new + step },
    }
}

/// Histogram of lifting outcomes for local proofs created at depth `s`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LiftHistogram {
    /// `q = 0`.
    pub root: u64,
    /// `0 < q <= floor(s / 2)`.
    pub half: u64,
    /// `floor(s / 2) < q < s`.
    pub partial: u64,
    /// `q = s`.
    pub none: u64,
}

impl LiftHistogram {
    pub fn record(&mut self, q: usize, s: usize) {
        if q == 0 {
            self.root += 1;
        } else if q <= s / 2 {
            self.half += 1;
        } else if q < s {
            self.partial += 1;
        } else {
            self.none += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.root + self.half + self.partial + self.none
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConflictStats {
    pub confs_glb: u64,
    pub confs_loc: u64,
    pub proofs_rejected: u64,
    pub proofs_invalid: u64,
    pub graph_conflicts: u64,
    pub lift: LiftHistogram,
}

/// Learned constraints with aging, a capacity bound and subtree cleanup.
#[derive(Debug, Clone)]
pub struct ConflictPool {
    slots: Vec<Option<ConflictConstraint>>,
    live: usize,
    capacity: usize,
    max_age: u64,
    by_node: HashMap<NodeId, Vec<ConflictId>>,
}

impl Default for ConflictPool {
    fn default() -> Self {
        ConflictPool::with_limits(CONFLICT_POOL_CAPACITY, MAX_CONFLICT_AGE)
    }
}

impl ConflictPool {
    pub fn new() -> ConflictPool {
        ConflictPool::default()
    }

    pub fn with_limits(capacity: usize, max_age: u64) -> ConflictPool {
        ConflictPool { slots: Vec::new(), live: 0, capacity, max_age, by_node: HashMap::new() }
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    pub fn get(&self, id: ConflictId) -> Option<&ConflictConstraint> {
        self.slots.get(id.0).and_then(Option::as_ref)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ConflictConstraint> {
        self.slots.iter().flatten()
    }

    /// Stores a constraint, evicting the oldest unused one at capacity.
    pub fn insert(&mut self, body: ConflictBody, scope: ProofScope, origin: ConflictOrigin) -> ConflictId {
        if self.live >= self.capacity {
            let victim = self
                .iter()
                .max_by(|a, b| a.age.cmp(&b.age).then(b.uses.cmp(&a.uses)).then(b.id.cmp(&a.id)))
                .map(|c| c.id);
            if let Some(v) = victim {
                self.remove(v);
            }
        }
        let id = ConflictId(self.slots.len());
        if let ProofScope::Local { node, .. } = &scope {
            self.by_node.entry(*node).or_default().push(id);
        }
        self.slots.push(Some(ConflictConstraint { id, body, scope, origin, age: 0, uses: 0 }));
        self.live += 1;
        id
    }

    fn remove(&mut self, id: ConflictId) {
        if self.slots[id.0].take().is_some() {
            self.live -= 1;
        }
    }

    pub fn mark_used(&mut self, id: ConflictId) {
        if let Some(c) = self.slots.get_mut(id.0).and_then(Option::as_mut) {
            c.age = 0;
            c.uses += 1;
        }
    }

    /// Ages every constraint by one node and drops those unused for too long.
    pub fn tick(&mut self) {
        let max_age = self.max_age;
        let mut dropped = 0;
        for slot in &mut self.slots {
            if let Some(c) = slot {
                c.age += 1;
                if c.age > max_age {
                    *slot = None;
                    dropped += 1;
                }
            }
        }
        self.live -= dropped;
    }

    /// Drops every local constraint attached to `node`; called once the
    /// search has left that node's subtree.
    pub fn drop_subtree(&mut self, node: NodeId) {
        if let Some(ids) = self.by_node.remove(&node) {
            for id in ids {
                self.remove(id);
            }
        }
    }

    /// Constraints applicable at a node whose root path is `path`.
    pub fn applicable<'a>(&'a self, path: &'a [NodeId]) -> impl Iterator<Item = &'a ConflictConstraint> + 'a {
        self.iter().filter(move |c| match &c.scope {
            ProofScope::Global => true,
            ProofScope::Local { depth, node, .. } => path.get(*depth) == Some(node),
        })
    }
}

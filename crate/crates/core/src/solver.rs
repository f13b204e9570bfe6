//! Spatial branch-and-bound driver.
//!
//! Each node runs: propagation over instance rows, active cuts and
//! applicable conflicts; then up to `MAX_SEPARATION_ROUNDS` rounds of
//! LP solve and separation; then branching. Infeasible propagation is
//! explained by the conflict graph, infeasible LPs by their dual ray.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::conflict::{
    analyze_propagation_conflict, build_proof, lift_local_proof, relax_to_global, ConflictBody, ConflictOrigin,
    ConflictPool, ConflictStats, FarkasProof, GraphConflict, Lifted, ProofScope,
};
use crate::model::{ConvexityKind, Instance, ModelError};
use crate::propagation::{
    propagate_fixpoint, BoundChange, FixpointResult, Propagator, Reason, RowRef, Side, Trail,
};
use crate::relaxation::{CutError, CutId, CutPool, LinearCut, SeparationSite, Separator};
use crate::simplex::{self, DualRay, LpProblem, LpStatus, RowTag};

pub const MAX_SEPARATION_ROUNDS: usize = 5;
pub const PRUNE_TOL: f64 = 1e-9;
pub const INTEGRALITY_TOL: f64 = 1e-6;
const MIN_SPATIAL_WIDTH: f64 = 1e-6;
const SPATIAL_CLAMP: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

/// Conflict analysis settings; each level includes the previous ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConflictMode {
    NoConflict,
    ConfGraph,
    DualRay,
    DualRayLoc,
}

impl ConflictMode {
    pub const ALL: [ConflictMode; 4] =
        [ConflictMode::NoConflict, ConflictMode::ConfGraph, ConflictMode::DualRay, ConflictMode::DualRayLoc];

    pub fn as_str(self) -> &'static str {
        match self {
            ConflictMode::NoConflict => "noconflict",
            ConflictMode::ConfGraph => "confgraph",
            ConflictMode::DualRay => "dualray",
            ConflictMode::DualRayLoc => "dualray-loc",
        }
    }

    fn graph(self) -> bool {
        self >= ConflictMode::ConfGraph
    }

    fn dual_ray(self) -> bool {
        self >= ConflictMode::DualRay
    }
}

impl fmt::Display for ConflictMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConflictMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" | "noconflict" => Ok(ConflictMode::NoConflict),
            "graph" | "confgraph" => Ok(ConflictMode::ConfGraph),
            "dualray" => Ok(ConflictMode::DualRay),
            "dualray-loc" | "dualrayloc" => Ok(ConflictMode::DualRayLoc),
            other => Err(format!("unknown conflict setting `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub conflict: ConflictMode,
    pub time_limit: Option<f64>,
    pub node_limit: Option<u64>,
    /// Feasibility tolerance for accepting an incumbent.
    pub tol: f64,
    pub seed: u64,
    /// Keep a copy of every learned constraint in the result.
    pub record_conflicts: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            conflict: ConflictMode::DualRayLoc,
            time_limit: None,
            node_limit: None,
            tol: 1e-6,
            seed: 0,
            record_conflicts: false,
        }
    }
}

impl Settings {
    pub fn with_conflict(conflict: ConflictMode) -> Settings {
        Settings { conflict, ..Settings::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Limit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Limit => "limit",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A learned constraint as it was stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictRecord {
    pub body: ConflictBody,
    pub scope: ProofScope,
    pub origin: ConflictOrigin,
    pub created_at: NodeId,
    pub created_depth: usize,
}

/// A node whose LP was infeasible, with the cut rows of that LP split by scope.
#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibleNode {
    pub node: NodeId,
    pub depth: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub global_cuts: Vec<LinearCut>,
    pub local_cuts: Vec<LinearCut>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub incumbent: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Lower bound on the optimum; equals the objective when optimal.
    pub best_bound: f64,
    pub nodes: u64,
    pub lp_iterations: u64,
    pub time_s: f64,
    pub stats: ConflictStats,
    /// Node LPs that were infeasible.
    pub infeasible_lps: u64,
    /// Nodes pruned by propagation.
    pub propagation_prunes: u64,
    /// Nodes abandoned because their LP could not be resolved.
    pub unresolved_nodes: u64,
    pub max_depth: usize,
    pub conflicts: Vec<ConflictRecord>,
    /// Filled only with `Settings::record_conflicts`.
    pub infeasible_nodes: Vec<InfeasibleNode>,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unsupported nonlinear constraint: {0}")]
    Unsupported(#[from] CutError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    Integer,
    Spatial,
    Fallback,
}

/// Children `x_var <= down` and `x_var >= up`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchDecision {
    pub var: usize,
    pub down: f64,
    pub up: f64,
    pub kind: BranchKind,
}

fn spatial_split(var: usize, x: f64, lower: f64, upper: f64, is_int: bool, kind: BranchKind) -> Option<BranchDecision> {
    let width = upper - lower;
    let p = if width.is_finite() {
        x.clamp(lower + SPATIAL_CLAMP * width, upper - SPATIAL_CLAMP * width)
    } else if x > lower && x < upper {
        x
    } else if lower.is_finite() {
        lower + 1.0
    } else if upper.is_finite() {
        upper - 1.0
    } else {
        0.0
    };
    if is_int {
        let down = p.floor();
        (down >= lower && down + 1.0 <= upper).then_some(BranchDecision { var, down, up: down + 1.0, kind })
    } else {
        (p > lower && p < upper).then_some(BranchDecision { var, down: p, up: p, kind })
    }
}

fn widest(candidates: impl Iterator<Item = usize>, lower: &[f64], upper: &[f64], min_width: impl Fn(usize) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for j in candidates {
        let w = upper[j] - lower[j];
        if w < min_width(j) {
            continue;
        }
        best = match best {
            Some((bj, bw)) if bw > w || (bw == w && bj < j) => Some((bj, bw)),
            _ => Some((j, w)),
        };
    }
    best.map(|b| b.0)
}

/// Branching rule: most fractional integer variable; otherwise the widest
/// variable of a violated nonconvex term; otherwise a variable of any
/// violated constraint. `None` when nothing can be split.
pub fn select_branching(
    sep: &Separator,
    is_int: &[bool],
    lower: &[f64],
    upper: &[f64],
    x: &[f64],
) -> Option<BranchDecision> {
    let mut best: Option<(usize, f64)> = None;
    for j in (0..x.len()).filter(|&j| is_int[j]) {
        let f = x[j] - x[j].floor();
        let dist = f.min(1.0 - f);
        if dist > INTEGRALITY_TOL && best.is_none_or(|(_, d)| dist > d) {
            best = Some((j, dist));
        }
    }
    if let Some((j, _)) = best {
        return Some(BranchDecision { var: j, down: x[j].floor(), up: x[j].ceil(), kind: BranchKind::Integer });
    }
    let violated = sep.violated(x);
    let min_width = |j: usize| if is_int[j] { 1.0 } else { MIN_SPATIAL_WIDTH };
    let nonconvex = violated
        .iter()
        .filter(|&&k| sep.kind(k) != ConvexityKind::Convex)
        .flat_map(|&k| sep.nonconvex_vars(k));
    if let Some(j) = widest(nonconvex, lower, upper, min_width) {
        if let Some(d) = spatial_split(j, x[j], lower[j], upper[j], is_int[j], BranchKind::Spatial) {
            return Some(d);
        }
    }
    for &k in &violated {
        let vars = sep.expr(k).variables();
        if let Some(j) = widest(vars.iter().copied().filter(|&j| is_int[j]), lower, upper, min_width) {
            let v = x[j].round().clamp(lower[j], upper[j]);
            let (down, up) = if v >= upper[j] { (v - 1.0, v) } else { (v, v + 1.0) };
            return Some(BranchDecision { var: j, down, up, kind: BranchKind::Fallback });
        }
        if let Some(j) = widest(vars.iter().copied(), lower, upper, min_width) {
            if let Some(d) = spatial_split(j, x[j], lower[j], upper[j], false, BranchKind::Fallback) {
                return Some(d);
            }
        }
    }
    None
}

#[derive(Debug, Clone)]
struct Node {
    parent: Option<NodeId>,
    depth: usize,
    /// Branching bound applied when the node is entered.
    branch: Option<(usize, Side, f64)>,
    /// Branching plus propagation changes made at this node.
    changes: Vec<BoundChange>,
    /// Local cuts separated at this node.
    cuts: Vec<CutId>,
    /// Parent LP bound until the node's own LP is solved.
    bound: f64,
    /// Unfinished nodes in this subtree, including itself.
    open: usize,
}

#[derive(Debug, Clone, Copy)]
struct OpenEntry {
    bound: f64,
    depth: usize,
    id: NodeId,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.depth.cmp(&other.depth))
            .then(self.id.cmp(&other.id))
    }
}

struct Search<'a> {
    inst: &'a Instance,
    settings: &'a Settings,
    sep: Separator,
    is_int: Vec<bool>,
    root_lower: Vec<f64>,
    root_upper: Vec<f64>,
    cuts: CutPool,
    conflicts: ConflictPool,
    nodes: Vec<Node>,
    open: BinaryHeap<Reverse<OpenEntry>>,
    incumbent: Option<(Vec<f64>, f64)>,
    stats: ConflictStats,
    processed: u64,
    lp_iterations: u64,
    infeasible_lps: u64,
    propagation_prunes: u64,
    unresolved: u64,
    max_depth: usize,
    proven_infeasible: bool,
    log: Vec<ConflictRecord>,
    infeasible_log: Vec<InfeasibleNode>,
}

/// Solves the instance by spatial branch-and-bound.
pub fn solve(instance: &Instance, settings: &Settings) -> Result<SolveResult, SolveError> {
    instance.validate()?;
    let start = Instant::now();
    let (root_lower, root_upper) = instance.rounded_bounds();
    let mut s = Search {
        inst: instance,
        settings,
        sep: Separator::new(instance)?,
        is_int: instance.integrality_mask(),
        root_lower,
        root_upper,
        cuts: CutPool::new(),
        conflicts: ConflictPool::new(),
        nodes: Vec::new(),
        open: BinaryHeap::new(),
        incumbent: None,
        stats: ConflictStats::default(),
        processed: 0,
        lp_iterations: 0,
        infeasible_lps: 0,
        propagation_prunes: 0,
        unresolved: 0,
        max_depth: 0,
        proven_infeasible: false,
        log: Vec::new(),
        infeasible_log: Vec::new(),
    };
    s.add_node(None, None, f64::NEG_INFINITY);
    let mut hit_limit = false;
    while let Some(Reverse(entry)) = s.open.pop() {
        if s.pruned_by_bound(entry.bound) {
            s.finish(entry.id);
            continue;
        }
        let over_time = settings.time_limit.is_some_and(|t| start.elapsed().as_secs_f64() >= t);
        let over_nodes = settings.node_limit.is_some_and(|n| s.processed >= n);
        if over_time || over_nodes {
            s.open.push(Reverse(entry));
            hit_limit = true;
            break;
        }
        s.processed += 1;
        s.conflicts.tick();
        s.process(entry.id);
        if s.proven_infeasible {
            s.open.clear();
        }
    }
    let open_bound = s.open.iter().map(|e| e.0.bound).fold(f64::INFINITY, f64::min);
    let status = if hit_limit || s.unresolved > 0 {
        SolveStatus::Limit
    } else if s.incumbent.is_some() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    };
    let objective = s.incumbent.as_ref().map(|i| i.1);
    let best_bound = match status {
        SolveStatus::Optimal => objective.expect("optimal has an incumbent"),
        SolveStatus::Infeasible => f64::INFINITY,
        SolveStatus::Limit => open_bound.min(objective.unwrap_or(f64::INFINITY)),
    };
    Ok(SolveResult {
        status,
        objective,
        incumbent: s.incumbent.map(|i| i.0),
        best_bound,
        nodes: s.processed,
        lp_iterations: s.lp_iterations,
        time_s: start.elapsed().as_secs_f64(),
        stats: s.stats,
        infeasible_lps: s.infeasible_lps,
        propagation_prunes: s.propagation_prunes,
        unresolved_nodes: s.unresolved,
        max_depth: s.max_depth,
        conflicts: s.log,
        infeasible_nodes: s.infeasible_log,
    })
}

impl Search<'_> {
    fn pruned_by_bound(&self, bound: f64) -> bool {
        self.incumbent.as_ref().is_some_and(|inc| bound >= inc.1 - PRUNE_TOL)
    }

    fn add_node(&mut self, parent: Option<NodeId>, branch: Option<(usize, Side, f64)>, bound: f64) {
        let id = NodeId(self.nodes.len());
        let depth = parent.map_or(0, |p| self.nodes[p.0].depth + 1);
        self.max_depth = self.max_depth.max(depth);
        self.nodes.push(Node { parent, depth, branch, changes: Vec::new(), cuts: Vec::new(), bound, open: 1 });
        let mut cur = parent;
        while let Some(p) = cur {
            self.nodes[p.0].open += 1;
            cur = self.nodes[p.0].parent;
        }
        self.open.push(Reverse(OpenEntry { bound, depth, id }));
    }

    /// Marks a node as done; drops local conflicts of subtrees that closed.
    fn finish(&mut self, id: NodeId) {
        let mut cur = Some(id);
        while let Some(c) = cur {
            let node = &mut self.nodes[c.0];
            node.open -= 1;
            cur = node.parent;
            if node.open == 0 {
                self.conflicts.drop_subtree(c);
            }
        }
    }

    fn path(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = self.nodes[id.0].parent;
        while let Some(p) = cur {
            path.push(p);
            cur = self.nodes[p.0].parent;
        }
        path.reverse();
        path
    }

    /// Global cuts plus the local cuts separated along the path.
    fn active_cuts(&self, path: &[NodeId]) -> Vec<CutId> {
        let mut active = self.cuts.global_cuts().to_vec();
        for p in path {
            active.extend(self.nodes[p.0].cuts.iter().copied());
        }
        active
    }

    fn is_local(&self, src: RowRef) -> bool {
        match src {
            RowRef::Linear(_) => false,
            RowRef::Cut(id) => !self.cuts.is_global(id),
            RowRef::Conflict(id) => self.conflicts.get(id).is_none_or(|c| !c.scope.is_global()),
        }
    }

    fn process(&mut self, id: NodeId) {
        let path = self.path(id);
        let depth = path.len() - 1;
        let mut trail = Trail::new(self.root_lower.clone(), self.root_upper.clone());
        for a in &path[..depth] {
            trail.push_marker();
            for ch in &self.nodes[a.0].changes {
                trail.replay(ch);
            }
        }
        trail.push_marker();
        let start = trail.changes().len();
        if let Some((var, side, value)) = self.nodes[id.0].branch {
            trail.apply(var, side, value, Reason::Branching, Vec::new());
        }
        let mut active = self.active_cuts(&path);
        let result = self.propagate(&mut trail, &active, &path);
        self.nodes[id.0].changes = trail.changes()[start..].to_vec();
        for ch in &trail.changes()[start..] {
            if let Reason::Propagated(RowRef::Conflict(c)) = ch.reason {
                self.conflicts.mark_used(c);
            }
        }
        if let FixpointResult::Infeasible(conflicting) = result {
            if let RowRef::Conflict(c) = conflicting.source {
                self.conflicts.mark_used(c);
            }
            self.propagation_prunes += 1;
            if self.settings.conflict.graph() {
                self.analyze_graph(&trail, &conflicting, id, depth);
            }
            self.finish(id);
            return;
        }
        let lower = trail.lower().to_vec();
        let upper = trail.upper().to_vec();
        for round in 0..=MAX_SEPARATION_ROUNDS {
            let lp = self.build_lp(&active, &lower, &upper);
            let out = simplex::solve(&lp, None);
            self.lp_iterations += out.iterations as u64;
            match out.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => {
                    self.infeasible_lps += 1;
                    if self.settings.record_conflicts {
                        self.record_infeasible(id, depth, &active, &lower, &upper);
                    }
                    let ray = out.dual_ray.expect("infeasible LP carries a ray");
                    self.analyze_ray(&ray, &lower, &upper, &path);
                    self.finish(id);
                    return;
                }
                LpStatus::Unbounded | LpStatus::IterationLimit | LpStatus::NumericalFailure => {
                    self.unresolved_lp(id, &lower, &upper);
                    return;
                }
            }
            let x = out.primal;
            let bound = out.objective.max(self.nodes[id.0].bound);
            self.nodes[id.0].bound = bound;
            if self.pruned_by_bound(bound) {
                self.finish(id);
                return;
            }
            let fractional = self.inst.integers.iter().any(|&j| (x[j] - x[j].round()).abs() > INTEGRALITY_TOL);
            let violated = self.sep.violated(&x);
            if !fractional && violated.is_empty() && self.try_incumbent(&x) {
                self.finish(id);
                return;
            }
            if !violated.is_empty() && round < MAX_SEPARATION_ROUNDS {
                let site = SeparationSite { node: id, depth, lower: &lower, upper: &upper, active: &active };
                let added = self.sep.separate(site, &x, &mut self.cuts);
                if !added.is_empty() {
                    for &c in &added {
                        if !self.cuts.is_global(c) {
                            self.nodes[id.0].cuts.push(c);
                        }
                    }
                    active = self.active_cuts(&path);
                    continue;
                }
            }
            match select_branching(&self.sep, &self.is_int, &lower, &upper, &x) {
                Some(d) => self.branch(id, d, bound),
                None => {
                    // Violation below what branching can resolve: the box is
                    // numerically a point, treat the node as infeasible.
                    self.finish(id);
                }
            }
            return;
        }
    }

    fn record_infeasible(&mut self, node: NodeId, depth: usize, active: &[CutId], lower: &[f64], upper: &[f64]) {
        let (global, local): (Vec<CutId>, Vec<CutId>) = active.iter().partition(|&&c| self.cuts.is_global(c));
        let rows = |ids: Vec<CutId>| -> Vec<LinearCut> {
            ids.into_iter()
                .map(|c| {
                    let cut = self.cuts.get(c);
                    LinearCut { coefs: cut.coefs.clone(), rhs: cut.rhs }
                })
                .collect()
        };
        self.infeasible_log.push(InfeasibleNode {
            node,
            depth,
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            global_cuts: rows(global),
            local_cuts: rows(local),
        });
    }

    fn propagate(&self, trail: &mut Trail, active: &[CutId], path: &[NodeId]) -> FixpointResult {
        let mut props: Vec<Propagator<'_>> = self
            .inst
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| Propagator::Row { coefs: &r.coefs, rhs: r.rhs, source: RowRef::Linear(i) })
            .collect();
        for &c in active {
            let cut = self.cuts.get(c);
            props.push(Propagator::Row { coefs: &cut.coefs, rhs: cut.rhs, source: RowRef::Cut(c) });
        }
        props.extend(self.conflicts.applicable(path).map(|c| c.propagator()));
        propagate_fixpoint(trail, &props, &self.is_int)
    }

    fn build_lp(&self, active: &[CutId], lower: &[f64], upper: &[f64]) -> LpProblem {
        let n = self.inst.num_vars;
        let mut lp = LpProblem::new(n, lower.to_vec(), upper.to_vec());
        lp.objective = self.inst.objective.clone();
        for (i, row) in self.inst.rows.iter().enumerate() {
            lp.push_row(row.coefs.clone(), row.rhs, RowTag::Global(i));
        }
        for &c in active {
            let cut = self.cuts.get(c);
            lp.push_row(cut.coefs.clone(), cut.rhs, RowTag::Cut(c));
        }
        lp
    }

    fn try_incumbent(&mut self, x: &[f64]) -> bool {
        let mut rounded = x.to_vec();
        for &j in &self.inst.integers {
            rounded[j] = rounded[j].round();
        }
        let candidate = [rounded, x.to_vec()].into_iter().find(|p| self.inst.is_feasible(p, self.settings.tol));
        let Some(point) = candidate else {
            return false;
        };
        let value = self.inst.objective_value(&point);
        if self.incumbent.as_ref().is_none_or(|inc| value < inc.1) {
            debug_assert!(self.inst.is_feasible(&point, self.settings.tol));
            debug_assert!(self
                .conflicts
                .iter()
                .filter(|c| c.scope.is_global())
                .all(|c| c.body.violation(&point) <= 1e-6));
            self.incumbent = Some((point, value));
        }
        true
    }

    fn branch(&mut self, id: NodeId, d: BranchDecision, bound: f64) {
        self.add_node(Some(id), Some((d.var, Side::Upper, d.down)), bound);
        self.add_node(Some(id), Some((d.var, Side::Lower, d.up)), bound);
        self.finish(id);
    }

    /// The LP could not be resolved; keep searching by splitting the box
    /// if possible, otherwise give up on the node.
    fn unresolved_lp(&mut self, id: NodeId, lower: &[f64], upper: &[f64]) {
        let min_width = |j: usize| if self.is_int[j] { 1.0 } else { MIN_SPATIAL_WIDTH };
        let pick = widest(0..self.inst.num_vars, lower, upper, min_width);
        let decision = pick.and_then(|j| {
            let mid = if (upper[j] - lower[j]).is_finite() { 0.5 * (lower[j] + upper[j]) } else { f64::NAN };
            spatial_split(j, mid, lower[j], upper[j], self.is_int[j], BranchKind::Fallback)
        });
        match decision {
            Some(d) => {
                let bound = self.nodes[id.0].bound;
                self.branch(id, d, bound);
            }
            None => {
                self.unresolved += 1;
                self.finish(id);
            }
        }
    }

    fn analyze_graph(&mut self, trail: &Trail, conflicting: &crate::propagation::Conflicting, id: NodeId, depth: usize) {
        let result = analyze_propagation_conflict(trail, conflicting, &self.is_int, |src| self.is_local(src));
        match result {
            GraphConflict::GlobalInfeasible => {
                if self.incumbent.is_none() {
                    self.proven_infeasible = true;
                }
            }
            GraphConflict::LocalInfeasible => {}
            GraphConflict::Conflict { body, scope_global, .. } => {
                if scope_global {
                    self.stats.graph_conflicts += 1;
                    self.store(body, ProofScope::Global, ConflictOrigin::Graph, id, depth);
                }
            }
        }
    }

    fn analyze_ray(&mut self, ray: &DualRay, lower: &[f64], upper: &[f64], path: &[NodeId]) {
        let mode = self.settings.conflict;
        if !mode.dual_ray() {
            return;
        }
        let id = *path.last().expect("non-empty path");
        let depth = path.len() - 1;
        let proof = match build_proof(ray, self.inst, &self.cuts, lower, upper, id, depth) {
            Ok(p) => p,
            Err(_) => {
                self.stats.proofs_invalid += 1;
                return;
            }
        };
        if mode == ConflictMode::DualRay {
            match relax_to_global(&proof, self.inst, &self.cuts, lower, upper) {
                Some(global) => self.store_proof(global),
                None => self.stats.proofs_rejected += 1,
            }
            return;
        }
        match lift_local_proof(&proof, path, self.inst, &self.cuts, lower, upper) {
            Lifted::Global(global) => {
                self.stats.lift.record(0, depth);
                self.store_proof(global);
            }
            Lifted::Local { proof: local, q } => {
                self.stats.lift.record(q, depth);
                let relaxed = relax_to_global(&local, self.inst, &self.cuts, lower, upper);
                self.store_proof(local);
                match relaxed {
                    Some(global) => self.store_proof(global),
                    None => self.stats.proofs_rejected += 1,
                }
            }
        }
    }

    fn store_proof(&mut self, proof: FarkasProof) {
        let body = ConflictBody::Linear { coefs: proof.row, rhs: proof.rhs };
        self.store(body, proof.scope, ConflictOrigin::DualProof, proof.created_at, proof.created_depth);
    }

    fn store(&mut self, body: ConflictBody, scope: ProofScope, origin: ConflictOrigin, node: NodeId, depth: usize) {
        if scope.is_global() {
            self.stats.confs_glb += 1;
        } else {
            self.stats.confs_loc += 1;
        }
        if self.settings.record_conflicts {
            self.log.push(ConflictRecord {
                body: body.clone(),
                scope: scope.clone(),
                origin,
                created_at: node,
                created_depth: depth,
            });
        }
        self.conflicts.insert(body, scope, origin);
    }
}

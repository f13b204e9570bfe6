//! Activity-based domain propagation with a reason-annotated bound trail.
//!
//! Every bound change records why it happened and which earlier trail
//! entries it depended on; together these form the implication graph that
//! conflict analysis walks backwards.

use crate::conflict::ConflictId;
use crate::relaxation::CutId;

/// Minimal improvement for a deduced bound to be recorded.
pub const PROPAGATION_TOL: f64 = 1e-6;
pub const MAX_SWEEPS: usize = 100;
const MIN_COEF: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    fn idx(self) -> usize {
        match self {
            Side::Lower => 0,
            Side::Upper => 1,
        }
    }
}

/// A propagating constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowRef {
    /// Row of the instance matrix.
    Linear(usize),
    Cut(CutId),
    Conflict(ConflictId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    Branching,
    Propagated(RowRef),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundChange {
    pub var: usize,
    pub side: Side,
    pub old: f64,
    pub new: f64,
    pub reason: Reason,
    pub position: usize,
    pub depth: usize,
    /// Trail positions of the bounds this deduction used.
    pub antecedents: Vec<usize>,
    prev_last: Option<usize>,
}

/// Current bounds plus the ordered list of changes that produced them.
#[derive(Debug, Clone)]
pub struct Trail {
    lower: Vec<f64>,
    upper: Vec<f64>,
    changes: Vec<BoundChange>,
    markers: Vec<usize>,
    last: Vec<[Option<usize>; 2]>,
}

impl Trail {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Trail {
        let n = lower.len();
        Trail { lower, upper, changes: Vec::new(), markers: Vec::new(), last: vec![[None, None]; n] }
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn bound(&self, var: usize, side: Side) -> f64 {
        match side {
            Side::Lower => self.lower[var],
            Side::Upper => self.upper[var],
        }
    }

    pub fn changes(&self) -> &[BoundChange] {
        &self.changes
    }

    pub fn depth(&self) -> usize {
        self.markers.len()
    }

    /// Trail position of the latest change to this bound, if any.
    pub fn last_change(&self, var: usize, side: Side) -> Option<usize> {
        self.last[var][side.idx()]
    }

    pub fn push_marker(&mut self) {
        self.markers.push(self.changes.len());
    }

    /// Undoes every change recorded after the marker for `depth`.
    pub fn pop_to_depth(&mut self, depth: usize) {
        if depth >= self.markers.len() {
            return;
        }
        let keep = self.markers[depth];
        while self.changes.len() > keep {
            let ch = self.changes.pop().expect("len > keep");
            match ch.side {
                Side::Lower => self.lower[ch.var] = ch.old,
                Side::Upper => self.upper[ch.var] = ch.old,
            }
            self.last[ch.var][ch.side.idx()] = ch.prev_last;
        }
        self.markers.truncate(depth);
    }

    /// Records a bound change and returns its trail position.
    pub fn apply(&mut self, var: usize, side: Side, new: f64, reason: Reason, antecedents: Vec<usize>) -> usize {
        let old = self.bound(var, side);
        let position = self.changes.len();
        match side {
            Side::Lower => self.lower[var] = new,
            Side::Upper => self.upper[var] = new,
        }
        let prev_last = self.last[var][side.idx()].replace(position);
        self.changes.push(BoundChange {
            var,
            side,
            old,
            new,
            reason,
            position,
            depth: self.depth(),
            antecedents,
            prev_last,
        });
        position
    }

    /// Replays a change recorded on another trail with identical prefix.
    pub fn replay(&mut self, change: &BoundChange) {
        debug_assert_eq!(change.position, self.changes.len());
        self.apply(change.var, change.side, change.new, change.reason, change.antecedents.clone());
    }
}

/// A deduced bound before it is recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deduction {
    pub var: usize,
    pub side: Side,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowPropagation {
    Infeasible,
    Deductions(Vec<Deduction>),
}

/// Side of `x_j` that attains the maximum activity of a `>=` row.
fn max_side(a: f64) -> Side {
    if a > 0.0 {
        Side::Upper
    } else {
        Side::Lower
    }
}

/// Single pass of activity propagation on `coefs^T x >= rhs`.
pub fn propagate_row(coefs: &[(usize, f64)], rhs: f64, lower: &[f64], upper: &[f64], is_int: &[bool]) -> RowPropagation {
    let contribution = |j: usize, a: f64| if a > 0.0 { a * upper[j] } else { a * lower[j] };
    let mut finite_sum = 0.0;
    let mut infinite = 0usize;
    for &(j, a) in coefs {
        if a == 0.0 {
            continue;
        }
        let c = contribution(j, a);
        if c.is_finite() {
            finite_sum += c;
        } else {
            infinite += 1;
        }
    }
    if infinite == 0 && finite_sum < rhs - PROPAGATION_TOL {
        return RowPropagation::Infeasible;
    }
    let mut out = Vec::new();
    if infinite > 1 {
        return RowPropagation::Deductions(out);
    }
    for &(j, a) in coefs {
        if a.abs() < MIN_COEF {
            continue;
        }
        let c = contribution(j, a);
        let residual = if c.is_finite() {
            if infinite > 0 {
                continue;
            }
            finite_sum - c
        } else {
            finite_sum
        };
        let bound = (rhs - residual) / a;
        if a > 0.0 {
            let v = if is_int[j] { (bound - PROPAGATION_TOL).ceil() } else { bound };
            if v > lower[j] + PROPAGATION_TOL {
                out.push(Deduction { var: j, side: Side::Lower, value: v });
            }
        } else {
            let v = if is_int[j] { (bound + PROPAGATION_TOL).floor() } else { bound };
            if v < upper[j] - PROPAGATION_TOL {
                out.push(Deduction { var: j, side: Side::Upper, value: v });
            }
        }
    }
    RowPropagation::Deductions(out)
}

/// `x_var >= bound` (side Lower) or `x_var <= bound` (side Upper).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundLiteral {
    pub var: usize,
    pub side: Side,
    pub bound: f64,
}

impl BoundLiteral {
    /// Bound that makes this literal impossible under the current domain, if any.
    fn falsified_by(&self, lower: &[f64], upper: &[f64]) -> Option<Side> {
        match self.side {
            Side::Lower if upper[self.var] < self.bound - PROPAGATION_TOL => Some(Side::Upper),
            Side::Upper if lower[self.var] > self.bound + PROPAGATION_TOL => Some(Side::Lower),
            _ => None,
        }
    }

    pub fn holds(&self, x: &[f64], tol: f64) -> bool {
        match self.side {
            Side::Lower => x[self.var] >= self.bound - tol,
            Side::Upper => x[self.var] <= self.bound + tol,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Propagator<'a> {
    /// `coefs^T x >= rhs`
    Row { coefs: &'a [(usize, f64)], rhs: f64, source: RowRef },
    /// At least one literal holds.
    Disjunction { literals: &'a [BoundLiteral], source: RowRef },
}

impl Propagator<'_> {
    pub fn source(&self) -> RowRef {
        match self {
            Propagator::Row { source, .. } | Propagator::Disjunction { source, .. } => *source,
        }
    }
}

/// The constraint that became infeasible and the bounds that explain it.
#[derive(Debug, Clone, PartialEq)]
pub struct Conflicting {
    pub source: RowRef,
    pub bounds: Vec<(usize, Side)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FixpointResult {
    Ok { changes: usize },
    Infeasible(Conflicting),
}

fn row_explanation(coefs: &[(usize, f64)]) -> Vec<(usize, Side)> {
    coefs.iter().filter(|t| t.1 != 0.0).map(|&(j, a)| (j, max_side(a))).collect()
}

/// Propagates all constraints until nothing changes, an infeasibility is
/// found, or `MAX_SWEEPS` sweeps have run. Integer bounds are rounded.
pub fn propagate_fixpoint(trail: &mut Trail, propagators: &[Propagator<'_>], is_int: &[bool]) -> FixpointResult {
    let start = trail.changes().len();
    for j in 0..is_int.len() {
        if trail.lower[j] > trail.upper[j] + PROPAGATION_TOL {
            let mut bounds = vec![(j, Side::Lower), (j, Side::Upper)];
            bounds.dedup();
            return FixpointResult::Infeasible(Conflicting { source: RowRef::Linear(usize::MAX), bounds });
        }
    }
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for prop in propagators {
            match *prop {
                Propagator::Row { coefs, rhs, source } => {
                    let res = propagate_row(coefs, rhs, &trail.lower, &trail.upper, is_int);
                    let deductions = match res {
                        RowPropagation::Infeasible => {
                            return FixpointResult::Infeasible(Conflicting { source, bounds: row_explanation(coefs) });
                        }
                        RowPropagation::Deductions(d) => d,
                    };
                    for d in deductions {
                        let current = trail.bound(d.var, d.side);
                        let tighter = match d.side {
                            Side::Lower => d.value > current + PROPAGATION_TOL,
                            Side::Upper => d.value < current - PROPAGATION_TOL,
                        };
                        if !tighter {
                            continue;
                        }
                        let antecedents = coefs
                            .iter()
                            .filter(|&&(k, a)| k != d.var && a != 0.0)
                            .filter_map(|&(k, a)| trail.last_change(k, max_side(a)))
                            .collect();
                        let opposite = match d.side {
                            Side::Lower => trail.upper[d.var],
                            Side::Upper => trail.lower[d.var],
                        };
                        let crosses = match d.side {
                            Side::Lower => d.value > opposite + PROPAGATION_TOL,
                            Side::Upper => d.value < opposite - PROPAGATION_TOL,
                        };
                        if crosses {
                            return FixpointResult::Infeasible(Conflicting { source, bounds: row_explanation(coefs) });
                        }
                        let value = match d.side {
                            Side::Lower => d.value.min(opposite),
                            Side::Upper => d.value.max(opposite),
                        };
                        trail.apply(d.var, d.side, value, Reason::Propagated(source), antecedents);
                        changed = true;
                    }
                }
                Propagator::Disjunction { literals, source } => {
                    let mut open = None;
                    let mut n_open = 0;
                    let mut falsifying = Vec::new();
                    for lit in literals {
                        match lit.falsified_by(&trail.lower, &trail.upper) {
                            Some(side) => falsifying.push((lit.var, side)),
                            None => {
                                n_open += 1;
                                open = Some(*lit);
                            }
                        }
                    }
                    if n_open == 0 {
                        return FixpointResult::Infeasible(Conflicting { source, bounds: falsifying });
                    }
                    if n_open > 1 {
                        continue;
                    }
                    let lit = open.expect("exactly one open literal");
                    let value = match lit.side {
                        Side::Lower if is_int[lit.var] => (lit.bound - PROPAGATION_TOL).ceil(),
                        Side::Upper if is_int[lit.var] => (lit.bound + PROPAGATION_TOL).floor(),
                        _ => lit.bound,
                    };
                    let current = trail.bound(lit.var, lit.side);
                    let tighter = match lit.side {
                        Side::Lower => value > current + PROPAGATION_TOL,
                        Side::Upper => value < current - PROPAGATION_TOL,
                    };
                    if tighter {
                        let antecedents = falsifying.iter().filter_map(|&(v, s)| trail.last_change(v, s)).collect();
                        let value = match lit.side {
                            Side::Lower => value.min(trail.upper[lit.var]),
                            Side::Upper => value.max(trail.lower[lit.var]),
                        };
                        trail.apply(lit.var, lit.side, value, Reason::Propagated(source), antecedents);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    FixpointResult::Ok { changes: trail.changes().len() - start }
}

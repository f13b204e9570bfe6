//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use minlp_conflict::model::{Expr, Instance, LinearRow, NonlinearConstraint};
use minlp_conflict::simplex::{DualRay, LpProblem, RowTag};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub mod schema;

// ---------------------------------------------------------------------------
// LP oracle

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleLp {
    Infeasible,
    Optimal(f64),
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn lp_feasible(lp: &LpProblem, x: &[f64], tol: f64) -> bool {
    (0..lp.num_cols).all(|j| x[j] >= lp.lower[j] - tol && x[j] <= lp.upper[j] + tol)
        && lp.rows.iter().all(|r| r.coefs.iter().map(|&(j, a)| a * x[j]).sum::<f64>() >= r.rhs - tol)
}

/// Minimum of a box-bounded LP by enumerating every choice of `n` tight
/// constraints (rows at equality or variables at a bound) and keeping the
/// best feasible vertex. Requires finite bounds.
pub fn basis_enumeration(lp: &LpProblem) -> OracleLp {
    let n = lp.num_cols;
    // constraint k: rows first, then lower bounds, then upper bounds
    let mut cons: Vec<(Vec<f64>, f64)> = lp
        .rows
        .iter()
        .map(|r| {
            let mut dense = vec![0.0; n];
            for &(j, a) in &r.coefs {
                dense[j] += a;
            }
            (dense, r.rhs)
        })
        .collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cons.push((e.clone(), lp.lower[j]));
        cons.push((e, lp.upper[j]));
    }
    let mut best: Option<f64> = None;
    let mut pick = Vec::with_capacity(n);
    enumerate_subsets(cons.len(), n, 0, &mut pick, &mut |subset| {
        let a: Vec<Vec<f64>> = subset.iter().map(|&k| cons[k].0.clone()).collect();
        let b: Vec<f64> = subset.iter().map(|&k| cons[k].1).collect();
        if let Some(x) = solve_dense(a, b) {
            if lp_feasible(lp, &x, 1e-9) {
                let v: f64 = lp.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
    });
    best.map_or(OracleLp::Infeasible, OracleLp::Optimal)
}

fn enumerate_subsets(m: usize, k: usize, start: usize, pick: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for i in start..m {
        if m - i < k - pick.len() {
            break;
        }
        pick.push(i);
        enumerate_subsets(m, k, i + 1, pick, f);
        pick.pop();
    }
}

/// `y^T b + w^T d + r^T{l, u}` recomputed from the original rows, with
/// `r = -(y^T A + w^T G)`.
pub fn independent_certificate(lp: &LpProblem, ray: &DualRay) -> f64 {
    let mut r = vec![0.0; lp.num_cols];
    let mut value = 0.0;
    for &(tag, mult) in &ray.multipliers {
        if mult < 0.0 {
            return f64::NEG_INFINITY;
        }
        let row = lp.rows.iter().find(|row| row.tag == tag).expect("ray tags name rows");
        value += mult * row.rhs;
        for &(j, a) in &row.coefs {
            r[j] -= mult * a;
        }
    }
    for (j, &rj) in r.iter().enumerate() {
        if rj.abs() < 1e-12 {
            continue;
        }
        let bound = if rj > 0.0 { lp.lower[j] } else { lp.upper[j] };
        if !bound.is_finite() {
            return f64::NEG_INFINITY;
        }
        value += rj * bound;
    }
    value
}

/// Random box-bounded LP in `>=` form with tags `Global(i)`.
pub fn random_lp(rng: &mut ChaCha8Rng, max_vars: usize, max_rows: usize) -> LpProblem {
    let n = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(1..=max_rows);
    let lower: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=0) as f64).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + rng.gen_range(1..=8) as f64).collect();
    let mut lp = LpProblem::new(n, lower, upper);
    lp.objective = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
    for i in 0..m {
        let coefs: Vec<(usize, f64)> = (0..n)
            .map(|j| (j, if rng.gen_bool(0.7) { rng.gen_range(-4..=4) as f64 } else { 0.0 }))
            .filter(|t| t.1 != 0.0)
            .collect();
        let rhs = rng.gen_range(-10..=10) as f64;
        lp.push_row(coefs, rhs, RowTag::Global(i));
    }
    lp
}

/// Random LP made infeasible by appending a row that contradicts a
/// positive combination of the others (or of the bounds, for one row).
pub fn random_infeasible_lp(rng: &mut ChaCha8Rng, max_vars: usize, max_rows: usize) -> LpProblem {
    let mut lp = random_lp(rng, max_vars, max_rows.saturating_sub(1).max(1));
    let n = lp.num_cols;
    let mut agg = vec![0.0; n];
    let mut rhs = 0.0;
    for row in &lp.rows {
        let lambda = if rng.gen_bool(0.7) { rng.gen_range(1..=3) as f64 } else { 0.0 };
        rhs += lambda * row.rhs;
        for &(j, a) in &row.coefs {
            agg[j] += lambda * a;
        }
    }
    // The existing rows imply agg^T x >= rhs, and the box implies agg^T x >= min over the box.
    let box_min: f64 = agg
        .iter()
        .enumerate()
        .map(|(j, &a)| if a > 0.0 { a * lp.lower[j] } else { a * lp.upper[j] })
        .sum();
    let implied = rhs.max(box_min);
    let gap = rng.gen_range(1..=4) as f64;
    let coefs: Vec<(usize, f64)> = agg.iter().enumerate().filter(|t| *t.1 != 0.0).map(|(j, &a)| (j, -a)).collect();
    let tag = RowTag::Global(lp.rows.len());
    if coefs.is_empty() {
        // 0 >= gap
        lp.push_row(vec![], gap, tag);
    } else {
        lp.push_row(coefs, -implied + gap, tag);
    }
    lp
}

// ---------------------------------------------------------------------------
// Integer enumeration oracle

/// Number of integer grid points of the instance box, or `None` if some
/// integer variable has an infinite bound.
pub fn grid_size(inst: &Instance) -> Option<f64> {
    inst.integers.iter().try_fold(1.0, |acc, &j| {
        let (l, u) = (inst.lower[j].ceil(), inst.upper[j].floor());
        (l.is_finite() && u.is_finite()).then(|| acc * (u - l + 1.0).max(0.0))
    })
}

fn constraints_hold(inst: &Instance, x: &[f64], tol: f64) -> bool {
    inst.rows.iter().all(|r| r.activity(x) >= r.rhs - tol) && inst.nonlinear.iter().all(|g| g.expr.evaluate(x) <= tol)
}

/// Visits every integer point of the box (continuous variables left at 0).
pub fn for_each_grid_point(inst: &Instance, mut f: impl FnMut(&mut Vec<f64>)) {
    let ints = &inst.integers;
    let mut x = vec![0.0; inst.num_vars];
    for &j in ints {
        x[j] = inst.lower[j].ceil();
    }
    if ints.iter().any(|&j| inst.lower[j].ceil() > inst.upper[j].floor()) {
        return;
    }
    loop {
        f(&mut x);
        let mut k = 0;
        loop {
            if k == ints.len() {
                return;
            }
            let j = ints[k];
            if x[j] + 1.0 <= inst.upper[j].floor() {
                x[j] += 1.0;
                break;
            }
            x[j] = inst.lower[j].ceil();
            k += 1;
        }
    }
}

/// Sets the continuous variable `z` (at most one) to its best feasible
/// value for the fixed integer part, assuming every constraint is affine
/// in `z`. Returns false if no value works.
fn fix_continuous(inst: &Instance, x: &mut [f64], tol: f64) -> bool {
    let cont: Vec<usize> = (0..inst.num_vars).filter(|j| inst.integers.binary_search(j).is_err()).collect();
    let Some(&z) = cont.first() else {
        return constraints_hold(inst, x, tol);
    };
    assert_eq!(cont.len(), 1, "oracle handles one continuous variable");
    let (mut lo, mut hi) = (inst.lower[z], inst.upper[z]);
    // each constraint as slope * z <= bound
    let mut tighten = |slope: f64, bound: f64| {
        if slope.abs() < 1e-14 {
            if bound < -tol {
                lo = f64::INFINITY;
            }
        } else if slope > 0.0 {
            hi = hi.min(bound / slope);
        } else {
            lo = lo.max(bound / slope);
        }
    };
    for r in &inst.rows {
        // -(a^T x) <= -rhs
        x[z] = 0.0;
        let base = r.activity(x);
        let slope = r.coefs.iter().filter(|t| t.0 == z).map(|t| t.1).sum::<f64>();
        tighten(-slope, base - r.rhs + tol);
    }
    for g in &inst.nonlinear {
        x[z] = 0.0;
        let g0 = g.expr.evaluate(x);
        x[z] = 1.0;
        let slope = g.expr.evaluate(x) - g0;
        x[z] = 2.0;
        assert!((g.expr.evaluate(x) - g0 - 2.0 * slope).abs() < 1e-9, "constraint is affine in the continuous variable");
        tighten(slope, -g0 + tol);
    }
    if lo > hi + 1e-12 {
        return false;
    }
    x[z] = if inst.objective[z] >= 0.0 { lo } else { hi };
    x[z].is_finite()
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleSolve {
    Infeasible,
    Optimal { value: f64, point: Vec<f64> },
}

/// Exhaustive minimum over the integer grid.
pub fn enumerate_optimum(inst: &Instance, tol: f64) -> OracleSolve {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for_each_grid_point(inst, |x| {
        if fix_continuous(inst, x, tol) {
            let v = inst.objective_value(x);
            if best.as_ref().is_none_or(|b| v < b.0 - 1e-12) {
                best = Some((v, x.clone()));
            }
        }
    });
    best.map_or(OracleSolve::Infeasible, |(value, point)| OracleSolve::Optimal { value, point })
}

/// Every feasible integer point of a pure integer instance.
pub fn feasible_points(inst: &Instance, tol: f64) -> Vec<Vec<f64>> {
    assert_eq!(inst.integers.len(), inst.num_vars, "pure integer instance");
    let mut out = Vec::new();
    for_each_grid_point(inst, |x| {
        if constraints_hold(inst, x, tol) {
            out.push(x.clone());
        }
    });
    out
}

// ---------------------------------------------------------------------------
// Tiny instance generators

fn push(inst: &mut Instance, e: Expr) {
    let k = inst.nonlinear.len();
    inst.nonlinear.push(NonlinearConstraint::new(e, k));
}

/// Pure integer bilinear packing instance with at most 6^5 grid points:
/// `min c^T x` with `c < 0`, caps `x_i x_j <= k` and a cover row.
pub fn tiny_bilinear(rng: &mut ChaCha8Rng, name: String) -> Instance {
    let n = 5;
    let mut inst = Instance {
        name,
        num_vars: n,
        objective: (0..n).map(|_| -(rng.gen_range(1..=4) as f64)).collect(),
        rows: Vec::new(),
        nonlinear: Vec::new(),
        lower: vec![0.0; n],
        upper: vec![5.0; n],
        integers: (0..n).collect(),
    };
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=5) as f64).collect();
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    pairs.shuffle(rng);
    let m = (pairs.len() * 4).div_ceil(5);
    for &(i, j) in &pairs[..m] {
        let k = w[i] * w[j] + rng.gen_range(0..=3) as f64;
        push(&mut inst, Expr::sum(vec![Expr::product(Expr::var(i), Expr::var(j)), Expr::constant(-k)]));
    }
    let coefs: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(1..=3) as f64)).collect();
    let act: f64 = coefs.iter().map(|&(j, a)| a * w[j]).sum();
    inst.rows.push(LinearRow::new(coefs, act + rng.gen_range(1..=3) as f64));
    inst
}

/// Pure integer instance with a convex quadratic constraint.
pub fn tiny_convex(rng: &mut ChaCha8Rng, name: String) -> Instance {
    let n = rng.gen_range(2..=4);
    let mut inst = Instance {
        name,
        num_vars: n,
        objective: (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect(),
        rows: Vec::new(),
        nonlinear: Vec::new(),
        lower: vec![-2.0; n],
        upper: vec![3.0; n],
        integers: (0..n).collect(),
    };
    let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
    let r2 = rng.gen_range(1.0..6.0);
    let ball = Expr::sum(
        (0..n)
            .map(|j| Expr::square(Expr::affine(&[(j, 1.0)], -center[j])))
            .chain([Expr::constant(-r2)])
            .collect(),
    );
    push(&mut inst, ball);
    let coefs: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(-2..=2) as f64)).filter(|t| t.1 != 0.0).collect();
    let rhs = rng.gen_range(-3..=2) as f64;
    inst.rows.push(LinearRow::new(coefs, rhs));
    inst
}

// ---------------------------------------------------------------------------
// Misc

/// Parses a CSV and drops one column, for comparisons that ignore timing.
pub fn csv_without_column(text: &str, column: &str) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_string).collect();
    let skip = header.iter().position(|h| h == column).expect("column exists");
    let mut out = vec![header.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, h)| h.clone()).collect()];
    for rec in reader.records() {
        let rec = rec.unwrap();
        out.push(rec.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| v.to_string()).collect());
    }
    out
}

pub fn load_schema() -> Value {
    serde_json::from_str(minlp_conflict::harness::report::REPORT_SCHEMA).expect("schema is JSON")
}

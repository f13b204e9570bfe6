//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use common::{
    basis_enumeration, csv_without_column, enumerate_optimum, feasible_points, grid_size, independent_certificate,
    random_infeasible_lp, random_lp, tiny_bilinear, OracleLp, OracleSolve,
};
use minlp_conflict::conflict::ProofScope;
use minlp_conflict::harness::{generate_corpus, run_instances, BenchConfig, Family};
use minlp_conflict::model::Expr;
use minlp_conflict::nlpcert::{
    aggregate_inequality, linearized_farkas_check, linearized_rows, ray_from_multipliers, ConvexSubproblem, DualMultipliers,
};
use minlp_conflict::relaxation::{gradient_cut, mccormick_planes};
use minlp_conflict::simplex::{self, certificate_value, LpProblem, LpStatus, RowTag};
use minlp_conflict::solver::{solve, ConflictMode, Settings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;
/// Largest grid on which the enumeration oracle runs for the corpus.
const ORACLE_GRID: f64 = 2e6;
const TREND_NODE_LIMIT: u64 = 20_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

/// Box-bounded LP whose rows all hold at a random witness.
fn random_feasible_lp(rng: &mut ChaCha8Rng, max_vars: usize, max_rows: usize) -> LpProblem {
    let mut lp = random_lp(rng, max_vars, max_rows);
    let witness: Vec<f64> = (0..lp.num_cols).map(|j| rng.gen_range(lp.lower[j]..=lp.upper[j])).collect();
    for row in &mut lp.rows {
        let act: f64 = row.coefs.iter().map(|&(j, a)| a * witness[j]).sum();
        row.rhs = act - rng.gen_range(0.0..2.0);
    }
    lp
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut r = rng(1);
    let mut failures = Vec::new();
    for i in 0..500 {
        let lp = random_infeasible_lp(&mut r, 10, 10);
        let out = simplex::solve(&lp, None);
        let ok = out.status == LpStatus::Infeasible
            && out.dual_ray.as_ref().is_some_and(|ray| {
                let own = certificate_value(ray, &lp.lower, &lp.upper, |tag| lp.rhs_of(tag).unwrap());
                own > 1e-6 && independent_certificate(&lp, ray) > 1e-6
            });
        if !ok {
            failures.push(format!("infeasible lp {i}: {:?}", out.status));
        }
    }
    // the dichotomy from the other side: a known feasible point means no certificate
    for i in 0..500 {
        let lp = random_feasible_lp(&mut r, 10, 10);
        let out = simplex::solve(&lp, None);
        if out.status != LpStatus::Optimal || out.dual_ray.is_some() {
            failures.push(format!("feasible lp {i}: {:?}", out.status));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs < 30.0,
        format!("500 infeasible + 500 feasible LPs, {} failures, {secs:.2}s {:?}", failures.len(), failures.first()),
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut r = rng(2);
    let (mut mismatches, mut infeasible) = (0, 0);
    for _ in 0..200 {
        let lp = random_lp(&mut r, 6, 6);
        let out = simplex::solve(&lp, None);
        let ok = match basis_enumeration(&lp) {
            OracleLp::Infeasible => {
                infeasible += 1;
                out.status == LpStatus::Infeasible
            }
            OracleLp::Optimal(v) => out.status == LpStatus::Optimal && (out.objective - v).abs() <= 1e-6 * (1.0 + v.abs()),
        };
        mismatches += usize::from(!ok);
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 60.0,
        format!("200 LPs ({infeasible} infeasible), {mismatches} mismatches, {secs:.2}s"),
    )
}

/// Convex quadratic with `g(center) = -margin`.
fn convex_constraint(r: &mut ChaCha8Rng, n: usize, center: &[f64]) -> Expr {
    let mut terms = Vec::new();
    for _ in 0..r.gen_range(1..=3) {
        let coefs: Vec<(usize, f64)> = (0..n).map(|j| (j, r.gen_range(-2.0..2.0))).collect();
        terms.push(Expr::scale(r.gen_range(0.2..2.0), Expr::square(Expr::affine(&coefs, r.gen_range(-2.0..2.0)))));
    }
    let lin: Vec<(usize, f64)> = (0..n).map(|j| (j, r.gen_range(-1.0..1.0))).collect();
    terms.push(Expr::affine(&lin, 0.0));
    let g = Expr::sum(terms);
    let shift = g.evaluate(center) + r.gen_range(0.5..3.0);
    Expr::sum(vec![g, Expr::constant(-shift)])
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let (mut cuts, mut violations, mut worst) = (0, 0, 0.0f64);
    while cuts < 100 {
        let n = r.gen_range(1..=4);
        let center: Vec<f64> = (0..n).map(|_| r.gen_range(-2.0..2.0)).collect();
        let g = convex_constraint(&mut r, n, &center);
        let x: Vec<f64> = center.iter().map(|c| c + r.gen_range(-4.0..4.0)).collect();
        if g.evaluate(&x) <= 1e-3 {
            continue;
        }
        let cut = gradient_cut(&g, &x).expect("violated convex constraint");
        let (mut found, mut radius) = (0, 4.0);
        while found < 1000 {
            let y: Vec<f64> = center.iter().map(|c| c + r.gen_range(-radius..radius)).collect();
            if g.evaluate(&y) <= 0.0 {
                found += 1;
                let v = cut.violation(&y);
                worst = worst.max(v);
                violations += usize::from(v > 1e-9);
            } else {
                radius = (radius * 0.99f64).max(1e-3);
            }
        }
        cuts += 1;
    }
    let mut mc_violations = 0;
    for _ in 0..100 {
        let lower = [r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0)];
        let upper = [lower[0] + r.gen_range(0.0..6.0), lower[1] + r.gen_range(0.0..6.0)];
        let planes = mccormick_planes(0, 1, &lower, &upper).unwrap();
        for a in 0..=100 {
            for b in 0..=100 {
                let x = lower[0] + (upper[0] - lower[0]) * a as f64 / 100.0;
                let y = lower[1] + (upper[1] - lower[1]) * b as f64 / 100.0;
                mc_violations += planes.iter().filter(|p| p.evaluate(x, y) - x * y > 1e-12).count();
            }
        }
    }
    outcome(
        violations == 0 && mc_violations == 0,
        format!(
            "100 gradient cuts x 1000 feasible points: {violations} violations (worst {worst:.1e}); \
             100 McCormick boxes x 101^2 grid: {mc_violations} violations"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let (mut instances, mut global, mut local, mut violations) = (0, 0, 0, 0);
    let mut first = None;
    for i in 0..60 {
        let inst = tiny_bilinear(&mut r, format!("tiny_{i:02}"));
        assert!(grid_size(&inst).unwrap() <= 1e4);
        let points = feasible_points(&inst, 0.0);
        instances += 1;
        for mode in ConflictMode::ALL {
            let settings = Settings { record_conflicts: true, ..Settings::with_conflict(mode) };
            let res = solve(&inst, &settings).unwrap();
            for c in &res.conflicts {
                let in_scope = |x: &[f64]| match &c.scope {
                    ProofScope::Global => true,
                    ProofScope::Local { lower, upper, .. } => {
                        (0..inst.num_vars).all(|j| x[j] >= lower[j] - 1e-9 && x[j] <= upper[j] + 1e-9)
                    }
                };
                if c.scope.is_global() {
                    global += 1;
                } else {
                    local += 1;
                }
                for x in points.iter().filter(|x| in_scope(x)) {
                    if c.body.violation(x) > 1e-9 {
                        violations += 1;
                        first.get_or_insert_with(|| format!("{} {mode}: {x:?}", inst.name));
                    }
                }
            }
        }
    }
    outcome(
        violations == 0 && global > 0 && local > 0,
        format!("{instances} instances, {global} global and {local} local conflicts, {violations} violations {first:?}"),
    )
}

fn bilinear_config(settings: Vec<ConflictMode>) -> BenchConfig {
    BenchConfig { settings, node_limit: Some(TREND_NODE_LIMIT), seed: 1, ..BenchConfig::default() }
}

fn criterion_5_and_7() -> (Outcome, Outcome) {
    let corpus = generate_corpus(1, 20, Some(Family::Bilinear));
    let report = run_instances(corpus, &bilinear_config(ConflictMode::ALL.to_vec())).expect("bench runs");
    let all = report.bracket("all").expect("all bracket");
    let summary = |mode: ConflictMode| all.summaries.iter().find(|s| s.setting == mode.as_str()).unwrap();
    let (dr, loc) = (summary(ConflictMode::DualRay), summary(ConflictMode::DualRayLoc));
    let rejected = dr.proofs_rejected + loc.proofs_rejected;
    let above = loc.lift_half + loc.lift_partial;
    let five = outcome(
        rejected > 0 && above > 0 && loc.lift_root > 0,
        format!(
            "rejected {rejected}, lift histogram root/half/partial/none = {}/{}/{}/{}",
            loc.lift_root, loc.lift_half, loc.lift_partial, loc.lift_none
        ),
    );

    let total = |mode: ConflictMode| report.rows_for(mode).map(|r| r.nodes).sum::<u64>();
    let (n0, n1, n2, n3) = (
        total(ConflictMode::NoConflict),
        total(ConflictMode::ConfGraph),
        total(ConflictMode::DualRay),
        total(ConflictMode::DualRayLoc),
    );
    let solved = |mode: ConflictMode| -> Vec<String> {
        report.rows_for(mode).filter(|r| r.solved()).map(|r| r.instance.clone()).collect()
    };
    let loc_solved = solved(ConflictMode::DualRayLoc);
    let missing: Vec<String> = solved(ConflictMode::NoConflict).into_iter().filter(|n| !loc_solved.contains(n)).collect();
    let seven = outcome(
        n3 <= n2 && n2 <= n0 && missing.is_empty(),
        format!(
            "node totals noconflict {n0}, confgraph {n1}, dualray {n2}, dualray-loc {n3} (limit {TREND_NODE_LIMIT}); \
             solved by noconflict but not dualray-loc: {missing:?}"
        ),
    );
    (five, seven)
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let corpus = generate_corpus(1, 20, None);
    let (mut disagreements, mut oracle_checked, mut oracle_mismatch) = (Vec::new(), 0, Vec::new());
    for inst in &corpus {
        let results: Vec<_> = ConflictMode::ALL
            .iter()
            .map(|&m| solve(inst, &Settings::with_conflict(m)).expect("solve"))
            .collect();
        let base = &results[0];
        for (m, res) in ConflictMode::ALL.iter().zip(&results) {
            let same = res.status == base.status
                && match (res.objective, base.objective) {
                    (Some(a), Some(b)) => (a - b).abs() <= 1e-6 * (1.0 + b.abs()),
                    (None, None) => true,
                    _ => false,
                };
            if !same {
                disagreements.push(format!("{} {m}", inst.name));
            }
        }
        if grid_size(inst).is_some_and(|g| g <= ORACLE_GRID) {
            oracle_checked += 1;
            let ok = match enumerate_optimum(inst, 1e-9) {
                OracleSolve::Infeasible => base.objective.is_none() && base.status.as_str() == "infeasible",
                OracleSolve::Optimal { value, .. } => base.objective.is_some_and(|v| (v - value).abs() <= 1e-6 * (1.0 + value.abs())),
            };
            if !ok {
                oracle_mismatch.push(inst.name.clone());
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        disagreements.is_empty() && oracle_mismatch.is_empty() && secs < 600.0 && corpus.len() >= 60,
        format!(
            "{} instances x 4 settings, disagreements {disagreements:?}; enumeration oracle on {oracle_checked} \
             (grid <= {ORACLE_GRID:e}), mismatches {oracle_mismatch:?}; {secs:.1}s",
            corpus.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// nlpcert oracle: separable quadratics g_k = sum_j a_kj (x_j - c_kj)^2 - r_k^2

struct Ellipsoid {
    a: Vec<f64>,
    c: Vec<f64>,
    r2: f64,
}

impl Ellipsoid {
    fn expr(&self) -> Expr {
        let mut terms: Vec<Expr> = (0..self.a.len())
            .map(|j| Expr::scale(self.a[j], Expr::square(Expr::affine(&[(j, 1.0)], -self.c[j]))))
            .collect();
        terms.push(Expr::constant(-self.r2));
        Expr::sum(terms)
    }

    fn value(&self, x: &[f64]) -> f64 {
        (0..x.len()).map(|j| self.a[j] * (x[j] - self.c[j]).powi(2)).sum::<f64>() - self.r2
    }
}

/// Closed-form minimizer of `sum lambda_k g_k` (interior of a large box).
fn weighted_center(es: &[Ellipsoid], lambda: &[f64]) -> Vec<f64> {
    let n = es[0].a.len();
    (0..n)
        .map(|j| {
            let w: f64 = es.iter().zip(lambda).map(|(e, l)| l * e.a[j]).sum();
            es.iter().zip(lambda).map(|(e, l)| l * e.a[j] * e.c[j]).sum::<f64>() / w
        })
        .collect()
}

fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let (mut acc, mut theta) = (0.0, 0.0);
    for (i, ui) in u.iter().enumerate() {
        acc += ui;
        let t = (acc - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Projected gradient ascent on the concave dual over the simplex.
fn dual_oracle(es: &[Ellipsoid]) -> (Vec<f64>, f64) {
    let k = es.len();
    let mut lambda = vec![1.0 / k as f64; k];
    let dual = |l: &[f64]| {
        let x = weighted_center(es, l);
        es.iter().zip(l).map(|(e, w)| w * e.value(&x)).sum::<f64>()
    };
    let mut best = (lambda.clone(), dual(&lambda));
    for it in 0..4000 {
        let x = weighted_center(es, &lambda);
        let step = 0.05 / (1.0 + it as f64).sqrt();
        let grad: Vec<f64> = es.iter().map(|e| e.value(&x)).collect();
        let scale = grad.iter().fold(1.0f64, |m, g| m.max(g.abs()));
        let moved: Vec<f64> = lambda.iter().zip(&grad).map(|(l, g)| l + step * g / scale).collect();
        lambda = project_to_simplex(&moved);
        let v = dual(&lambda);
        if v > best.1 {
            best = (lambda.clone(), v);
        }
    }
    best
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let (mut built, mut failures, mut tries) = (0, Vec::new(), 0);
    while built < 25 && tries < 10_000 {
        tries += 1;
        let n = r.gen_range(1..=4);
        let k = r.gen_range(2..=3);
        let es: Vec<Ellipsoid> = (0..k)
            .map(|_| Ellipsoid {
                a: (0..n).map(|_| r.gen_range(0.5..3.0)).collect(),
                c: (0..n).map(|_| r.gen_range(-3.0..3.0)).collect(),
                r2: r.gen_range(0.3..2.0),
            })
            .collect();
        let (lambda, value) = dual_oracle(&es);
        // only clearly infeasible systems, and multipliers strictly positive where used
        if value < 0.05 {
            continue;
        }
        built += 1;
        let sub = ConvexSubproblem::new(
            Expr::constant(0.0),
            es.iter().map(Ellipsoid::expr).collect(),
            vec![],
            vec![-10.0; n],
            vec![10.0; n],
        )
        .expect("convex subproblem");
        let m = DualMultipliers { lambda: lambda.clone(), mu: vec![] };
        let x = weighted_center(&es, &lambda);
        let agg = aggregate_inequality(&sub, &m).expect("aggregate");
        let lin = linearized_farkas_check(&sub, &x, &m).expect("linearized check");
        let lp = linearized_rows(&sub, &x);
        let ray = ray_from_multipliers(&sub, &lp, &m);
        let cert = certificate_value(&ray, &lp.lower, &lp.upper, |tag: RowTag| lp.rhs_of(tag).unwrap());
        if !(agg.certified && lin.passed && cert > 1e-6) {
            failures.push(format!(
                "#{built}: aggregate {} (lb {:.3e}), linearized {} (res {:.1e}), certificate {cert:.3e}",
                agg.certified, agg.minimum.lower_bound, lin.passed, lin.stationarity_residual
            ));
        }
    }
    outcome(
        built >= 20 && failures.is_empty(),
        format!("{built} infeasible subproblems, {} failures {:?}", failures.len(), failures.first()),
    )
}

fn criterion_9() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_minlp-conflict");
    let dir = tempfile::tempdir().expect("tempdir");
    let corpus = dir.path().join("corpus");
    let gen = Command::new(bin)
        .args(["gen", "--seed", "1", "--count", "4", "--out"])
        .arg(&corpus)
        .output()
        .expect("gen runs");
    if !gen.status.success() {
        return outcome(false, format!("gen failed: {}", String::from_utf8_lossy(&gen.stderr)));
    }
    let mut csvs = Vec::new();
    for (run, threads) in [(0, "1"), (1, "4")] {
        let out = dir.path().join(format!("run{run}.csv"));
        let status = Command::new(bin)
            .args(["bench", "--seed", "7", "--threads", threads, "--out"])
            .arg(&out)
            .arg(&corpus)
            .output()
            .expect("bench runs");
        if !status.status.success() {
            return outcome(false, format!("bench failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        csvs.push(std::fs::read_to_string(&out).expect("csv written"));
    }
    let a = csv_without_column(&csvs[0], "time_s");
    let b = csv_without_column(&csvs[1], "time_s");
    let bytes_a = a.iter().map(|r| r.join(",")).collect::<Vec<_>>().join("\n");
    let bytes_b = b.iter().map(|r| r.join(",")).collect::<Vec<_>>().join("\n");
    outcome(
        bytes_a == bytes_b && a.len() == 1 + 12 * 4,
        format!("two bench runs (1 and 4 threads), {} data rows, identical without time_s: {}", a.len() - 1, bytes_a == bytes_b),
    )
}

fn main() -> ExitCode {
    let t = Instant::now();
    let (five, seven) = criterion_5_and_7();
    let results = [
        ("1 Farkas validity", criterion_1()),
        ("2 simplex vs basis enumeration", criterion_2()),
        ("3 cut soundness", criterion_3()),
        ("4 conflict soundness", criterion_4()),
        ("5 relax/lift correctness", five),
        ("6 optimum preservation", criterion_6()),
        ("7 directional trend", seven),
        ("8 nlpcert bridge", criterion_8()),
        ("9 determinism", criterion_9()),
    ];
    let mut all = true;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        all &= o.pass;
    }
    println!("acceptance: {} in {:.1}s", if all { "all criteria pass" } else { "FAILED" }, t.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

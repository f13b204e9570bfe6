mod common;

use common::{basis_enumeration, enumerate_optimum, feasible_points, grid_size, random_lp, tiny_bilinear, tiny_convex, OracleLp, OracleSolve};
use minlp_conflict::conflict::ProofScope;
use minlp_conflict::harness::{generate_instance, Family};
use minlp_conflict::model::Instance;
use minlp_conflict::simplex::{self, LpStatus};
use minlp_conflict::solver::{solve, ConflictMode, Settings, SolveStatus};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check_against_oracle(inst: &Instance) {
    let oracle = enumerate_optimum(inst, 1e-9);
    for mode in ConflictMode::ALL {
        let r = solve(inst, &Settings::with_conflict(mode)).unwrap();
        match &oracle {
            OracleSolve::Infeasible => assert_eq!(r.status, SolveStatus::Infeasible, "{} {mode}", inst.name),
            OracleSolve::Optimal { value, .. } => {
                assert_eq!(r.status, SolveStatus::Optimal, "{} {mode}", inst.name);
                let obj = r.objective.unwrap();
                assert!((obj - value).abs() <= 1e-6 * (1.0 + value.abs()), "{} {mode}: {obj} vs {value}", inst.name);
                assert!(inst.is_feasible(r.incumbent.as_ref().unwrap(), 1e-6));
            }
        }
    }
}

#[test]
fn lp_matches_basis_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let lp = random_lp(&mut rng, 5, 5);
        let out = simplex::solve(&lp, None);
        match basis_enumeration(&lp) {
            OracleLp::Infeasible => assert_eq!(out.status, LpStatus::Infeasible),
            OracleLp::Optimal(v) => {
                assert_eq!(out.status, LpStatus::Optimal);
                assert!((out.objective - v).abs() <= 1e-6 * (1.0 + v.abs()), "{} vs {v}", out.objective);
            }
        }
    }
}

#[test]
fn tiny_bilinear_instances_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..15 {
        check_against_oracle(&tiny_bilinear(&mut rng, format!("tb{i}")));
    }
}

#[test]
fn tiny_convex_instances_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..15 {
        check_against_oracle(&tiny_convex(&mut rng, format!("tc{i}")));
    }
}

#[test]
fn corpus_families_a_and_c_match_enumeration() {
    for family in [Family::ConvexMiqp, Family::RootInfeasible] {
        for i in 0..4 {
            let inst = generate_instance(family, 3, i);
            assert!(grid_size(&inst).unwrap() <= 1e4);
            check_against_oracle(&inst);
        }
    }
}

#[test]
fn learned_conflicts_hold_at_every_feasible_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut global, mut local) = (0, 0);
    for i in 0..20 {
        let inst = tiny_bilinear(&mut rng, format!("tb{i}"));
        let points = feasible_points(&inst, 0.0);
        for mode in ConflictMode::ALL {
            let settings = Settings { record_conflicts: true, ..Settings::with_conflict(mode) };
            let r = solve(&inst, &settings).unwrap();
            for c in &r.conflicts {
                for x in &points {
                    let inside = match &c.scope {
                        ProofScope::Global => true,
                        ProofScope::Local { lower, upper, .. } => {
                            (0..inst.num_vars).all(|j| x[j] >= lower[j] - 1e-9 && x[j] <= upper[j] + 1e-9)
                        }
                    };
                    if inside {
                        let v = c.body.violation(x);
                        assert!(v <= 1e-6, "{} {mode}: {:?} cuts off {x:?} by {v}", inst.name, c.body);
                    }
                }
                if c.scope.is_global() {
                    global += 1;
                } else {
                    local += 1;
                }
            }
        }
    }
    assert!(global > 0 && local > 0, "learned {global} global and {local} local conflicts");
}

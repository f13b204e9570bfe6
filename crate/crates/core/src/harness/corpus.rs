//! Generated benchmark corpus.
//!
//! Three families of small integer programs (at most 10 variables):
//!
//! * `a`: convex integer programs with a convex quadratic objective and a
//!   ball constraint;
//! * `b`: integer packing programs with bilinear caps, where most
//!   infeasible subproblems are only detected with McCormick cuts that
//!   depend on the local bounds;
//! * `c`: instances that are infeasible already at the root.
//!
//! Every instance is generated from its own RNG stream, so adding more
//! instances never changes the earlier ones.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{write_instance, Expr, Instance, LinearRow, ModelError, NonlinearConstraint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    ConvexMiqp,
    Bilinear,
    RootInfeasible,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::ConvexMiqp, Family::Bilinear, Family::RootInfeasible];

    pub fn letter(self) -> char {
        match self {
            Family::ConvexMiqp => 'a',
            Family::Bilinear => 'b',
            Family::RootInfeasible => 'c',
        }
    }

    fn stream(self) -> u64 {
        match self {
            Family::ConvexMiqp => 1,
            Family::Bilinear => 2,
            Family::RootInfeasible => 3,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a" | "convex" => Ok(Family::ConvexMiqp),
            "b" | "bilinear" => Ok(Family::Bilinear),
            "c" | "infeasible" => Ok(Family::RootInfeasible),
            other => Err(format!("unknown family `{other}` (expected a, b or c)")),
        }
    }
}

fn rng_for(seed: u64, family: Family, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(family.stream() << 32 | index as u64);
    rng
}

/// Generates instance `index` of a family.
pub fn generate_instance(family: Family, seed: u64, index: usize) -> Instance {
    let mut rng = rng_for(seed, family, index);
    let name = format!("{}_{seed}_{index:03}", family.letter());
    let inst = match family {
        Family::ConvexMiqp => convex_miqp(&mut rng),
        Family::Bilinear => bilinear_packing(&mut rng),
        Family::RootInfeasible => root_infeasible(&mut rng),
    };
    Instance { name, ..inst }
}

/// `count` instances of each requested family (all families when `None`).
pub fn generate_corpus(seed: u64, count: usize, family: Option<Family>) -> Vec<Instance> {
    let families: Vec<Family> = family.map_or(Family::ALL.to_vec(), |f| vec![f]);
    families
        .into_iter()
        .flat_map(|f| (0..count).map(move |i| generate_instance(f, seed, i)))
        .collect()
}

/// Writes the corpus as `<name>.json` files and returns the paths.
pub fn write_corpus(dir: &Path, seed: u64, count: usize, family: Option<Family>) -> Result<Vec<PathBuf>, ModelError> {
    std::fs::create_dir_all(dir).map_err(|source| ModelError::Io { path: dir.display().to_string(), source })?;
    let mut paths = Vec::new();
    for inst in generate_corpus(seed, count, family) {
        let path = dir.join(format!("{}.json", inst.name));
        write_instance(&inst, &path)?;
        paths.push(path);
    }
    Ok(paths)
}

fn base(num_vars: usize, lower: f64, upper: f64) -> Instance {
    Instance {
        name: String::new(),
        num_vars,
        objective: vec![0.0; num_vars],
        rows: Vec::new(),
        nonlinear: Vec::new(),
        lower: vec![lower; num_vars],
        upper: vec![upper; num_vars],
        integers: (0..num_vars).collect(),
    }
}

fn push_nonlinear(inst: &mut Instance, expr: Expr) {
    let k = inst.nonlinear.len();
    inst.nonlinear.push(NonlinearConstraint::new(expr, k));
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, lo: i32, hi: i32) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..=hi) as f64).collect()
}

fn sparse_coefs(rng: &mut ChaCha8Rng, n: usize, support: usize, lo: i32, hi: i32) -> Vec<(usize, f64)> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut coefs: Vec<(usize, f64)> = idx[..support.min(n)]
        .iter()
        .map(|&j| {
            let mut a = 0;
            while a == 0 {
                a = rng.gen_range(lo..=hi);
            }
            (j, a as f64)
        })
        .collect();
    coefs.sort_by_key(|t| t.0);
    coefs
}

/// `min c^T x + sum (a_k^T x - t_k)^2  s.t.  ||x - center||^2 <= r^2, a
/// knapsack row`, integers in `[-2, 3]`.
fn convex_miqp(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(3..=5);
    let mut inst = base(n, -2.0, 3.0);
    let witness = random_point(rng, n, -2, 3);
    for c in &mut inst.objective {
        *c = rng.gen_range(-2..=2) as f64;
    }
    let mut squares = Vec::new();
    for _ in 0..rng.gen_range(2..=3) {
        let support = rng.gen_range(1..=n.min(3));
        let coefs = sparse_coefs(rng, n, support, -2, 2);
        let target = rng.gen_range(-6..=6) as f64 + 0.5;
        squares.push(Expr::square(Expr::affine(&coefs, -target)));
    }
    let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
    let dist2: f64 = witness.iter().zip(&center).map(|(x, c)| (x - c) * (x - c)).sum();
    let r2 = dist2 + rng.gen_range(0.5..3.0);
    let ball = Expr::sum(
        (0..n)
            .map(|j| Expr::square(Expr::affine(&[(j, 1.0)], -center[j])))
            .chain([Expr::constant(-r2)])
            .collect(),
    );
    push_nonlinear(&mut inst, ball);
    let coefs = sparse_coefs(rng, n, n, -3, 3);
    let act: f64 = coefs.iter().map(|&(j, a)| a * witness[j]).sum();
    inst.rows.push(LinearRow::new(coefs, act - rng.gen_range(0..=3) as f64));
    inst.with_objective_expr(Expr::sum(squares))
}

/// Bilinear packing: `max c^T x  s.t.  x_i x_j <= k_ij, a^T x >= s`,
/// integers in `[0, 5]`. The caps are only enforced through McCormick
/// underestimators, which are weak on the root box, so infeasibility below
/// the root usually needs cuts computed from local bounds. The cover row
/// asks for slightly more than a random witness, so some instances are
/// infeasible.
fn bilinear_packing(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(8..=10);
    let upper = 5;
    let mut inst = base(n, 0.0, upper as f64);
    let witness = random_point(rng, n, 0, upper);
    for c in &mut inst.objective {
        *c = -(rng.gen_range(1..=5) as f64);
    }
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    pairs.shuffle(rng);
    let m = (pairs.len() * 2).div_ceil(5);
    for &(i, j) in &pairs[..m] {
        let k = witness[i] * witness[j] + rng.gen_range(0..=3) as f64;
        let product = Expr::product(Expr::var(i), Expr::var(j));
        push_nonlinear(&mut inst, Expr::sum(vec![product, Expr::constant(-k)]));
    }
    let a: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(1..=3) as f64)).collect();
    let act: f64 = a.iter().map(|&(j, v)| v * witness[j]).sum();
    inst.rows.push(LinearRow::new(a, act + 1.0));
    inst
}

/// Infeasible at the root: contradictory rows, or a convex quadratic
/// band `(a^T x - t)^2 <= r^2` that misses the half-space `a^T x >= s`.
fn root_infeasible(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(3..=5);
    let mut inst = base(n, 0.0, 4.0);
    for c in &mut inst.objective {
        *c = rng.gen_range(-3..=3) as f64;
    }
    let support = rng.gen_range(2..=n);
    let coefs = sparse_coefs(rng, n, support, 1, 3);
    if rng.gen_bool(0.5) {
        // a^T x >= s and a^T x <= s - gap
        let s = rng.gen_range(3..=10) as f64;
        let gap = rng.gen_range(0.5..2.0);
        inst.rows.push(LinearRow::new(coefs.clone(), s));
        inst.rows.push(LinearRow::new(coefs, s - gap).negated());
    } else {
        // pricing along a puts the LP optimum on a^T x = s, where a single
        // gradient cut of the band already separates the row
        for c in &mut inst.objective {
            *c = c.abs();
        }
        for &(j, a) in &coefs {
            inst.objective[j] = a;
        }
        let t = rng.gen_range(1.0..3.0);
        let r = rng.gen_range(0.5..1.5);
        let s = t + r + rng.gen_range(1.0..3.0);
        inst.rows.push(LinearRow::new(coefs.clone(), s));
        let band = Expr::sum(vec![Expr::square(Expr::affine(&coefs, -t)), Expr::constant(-r * r)]);
        push_nonlinear(&mut inst, band);
    }
    inst
}

//! Expression trees for the nonlinear constraint functions.
//!
//! The grammar is deliberately small: constants, variables, sums, scalar
//! multiples, products of two subexpressions and squares. Every tree that
//! stays at most quadratic can be decomposed into an affine part plus
//! square and product terms over affine arguments (see [`Expr::decompose`]),
//! which is what the outer approximation and the convexity classifier work on.

use std::fmt;

/// A continuously differentiable function of the problem variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Sum(Vec<Expr>),
    /// `coef * inner`
    Scale(f64, Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
    Square(Box<Expr>),
}

/// Convexity class of a constraint function `g(x) <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConvexityKind {
    Convex,
    NonconvexBilinear,
    NonconvexGeneral,
}

impl ConvexityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConvexityKind::Convex => "convex",
            ConvexityKind::NonconvexBilinear => "nonconvex-bilinear",
            ConvexityKind::NonconvexGeneral => "nonconvex-general",
        }
    }
}

impl fmt::Display for ConvexityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Expr {
    pub fn var(j: usize) -> Expr {
        Expr::Var(j)
    }

    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        Expr::Sum(terms)
    }

    pub fn scale(coef: f64, e: Expr) -> Expr {
        Expr::Scale(coef, Box::new(e))
    }

    pub fn product(a: Expr, b: Expr) -> Expr {
        Expr::Product(Box::new(a), Box::new(b))
    }

    pub fn square(e: Expr) -> Expr {
        Expr::Square(Box::new(e))
    }

    /// Builds an affine expression `constant + sum coef_j x_j`.
    pub fn affine(terms: &[(usize, f64)], constant: f64) -> Expr {
        let mut parts: Vec<Expr> = terms
            .iter()
            .map(|&(j, c)| {
                if c == 1.0 {
                    Expr::Var(j)
                } else {
                    Expr::scale(c, Expr::Var(j))
                }
            })
            .collect();
        if constant != 0.0 || parts.is_empty() {
            parts.push(Expr::Const(constant));
        }
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::Sum(parts)
        }
    }

    pub fn evaluate(&self, point: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(j) => point[*j],
            Expr::Sum(terms) => terms.iter().map(|t| t.evaluate(point)).sum(),
            Expr::Scale(c, e) => c * e.evaluate(point),
            Expr::Product(a, b) => a.evaluate(point) * b.evaluate(point),
            Expr::Square(e) => {
                let v = e.evaluate(point);
                v * v
            }
        }
    }

    /// Dense gradient of length `n`.
    pub fn gradient(&self, point: &[f64], n: usize) -> Vec<f64> {
        let mut grad = vec![0.0; n];
        self.accumulate_gradient(point, 1.0, &mut grad);
        grad
    }

    // Reverse sweep: `adjoint` is d(root)/d(self).
    fn accumulate_gradient(&self, point: &[f64], adjoint: f64, grad: &mut [f64]) {
        if adjoint == 0.0 {
            return;
        }
        match self {
            Expr::Const(_) => {}
            Expr::Var(j) => grad[*j] += adjoint,
            Expr::Sum(terms) => {
                for t in terms {
                    t.accumulate_gradient(point, adjoint, grad);
                }
            }
            Expr::Scale(c, e) => e.accumulate_gradient(point, adjoint * c, grad),
            Expr::Product(a, b) => {
                let va = a.evaluate(point);
                let vb = b.evaluate(point);
                a.accumulate_gradient(point, adjoint * vb, grad);
                b.accumulate_gradient(point, adjoint * va, grad);
            }
            Expr::Square(e) => {
                let v = e.evaluate(point);
                e.accumulate_gradient(point, adjoint * 2.0 * v, grad);
            }
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var_index(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(j) => Some(*j),
            Expr::Sum(terms) => terms.iter().filter_map(Expr::max_var_index).max(),
            Expr::Scale(_, e) | Expr::Square(e) => e.max_var_index(),
            Expr::Product(a, b) => a.max_var_index().max(b.max_var_index()),
        }
    }

    /// Sorted, deduplicated list of referenced variables.
    pub fn variables(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(j) => out.push(*j),
            Expr::Sum(terms) => terms.iter().for_each(|t| t.collect_vars(out)),
            Expr::Scale(_, e) | Expr::Square(e) => e.collect_vars(out),
            Expr::Product(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn all_constants_finite(&self) -> bool {
        match self {
            Expr::Const(c) => c.is_finite(),
            Expr::Var(_) => true,
            Expr::Sum(terms) => terms.iter().all(Expr::all_constants_finite),
            Expr::Scale(c, e) => c.is_finite() && e.all_constants_finite(),
            Expr::Square(e) => e.all_constants_finite(),
            Expr::Product(a, b) => a.all_constants_finite() && b.all_constants_finite(),
        }
    }

    /// Natural interval extension over the box `[lower, upper]`.
    pub fn interval(&self, lower: &[f64], upper: &[f64]) -> Interval {
        match self {
            Expr::Const(c) => Interval::point(*c),
            Expr::Var(j) => Interval::new(lower[*j], upper[*j]),
            Expr::Sum(terms) => terms
                .iter()
                .fold(Interval::point(0.0), |acc, t| acc.add(t.interval(lower, upper))),
            Expr::Scale(c, e) => e.interval(lower, upper).scale(*c),
            Expr::Product(a, b) => a.interval(lower, upper).mul(b.interval(lower, upper)),
            Expr::Square(e) => e.interval(lower, upper).square(),
        }
    }

    /// Returns the expression as an affine form, or `None` if it is nonlinear.
    pub fn to_affine(&self) -> Option<LinExpr> {
        match self {
            Expr::Const(c) => Some(LinExpr::constant(*c)),
            Expr::Var(j) => Some(LinExpr::var(*j)),
            Expr::Sum(terms) => {
                let mut acc = LinExpr::constant(0.0);
                for t in terms {
                    acc.add_scaled(&t.to_affine()?, 1.0);
                }
                Some(acc)
            }
            Expr::Scale(c, e) => e.to_affine().map(|l| l.scaled(*c)),
            Expr::Product(a, b) => {
                let la = a.to_affine()?;
                let lb = b.to_affine()?;
                if la.is_constant() {
                    Some(lb.scaled(la.constant))
                } else if lb.is_constant() {
                    Some(la.scaled(lb.constant))
                } else {
                    None
                }
            }
            Expr::Square(e) => {
                let l = e.to_affine()?;
                if l.is_constant() {
                    Some(LinExpr::constant(l.constant * l.constant))
                } else {
                    None
                }
            }
        }
    }

    /// Expands the tree into `affine + sum of quadratic terms`, each term a
    /// scaled square or product of affine forms. Returns `None` when the
    /// expression has degree above two.
    pub fn decompose(&self) -> Option<Decomposition> {
        let mut out = Decomposition {
            affine: LinExpr::constant(0.0),
            terms: Vec::new(),
        };
        self.decompose_into(1.0, &mut out)?;
        out.affine.compact();
        Some(out)
    }

    fn decompose_into(&self, mult: f64, out: &mut Decomposition) -> Option<()> {
        if let Some(lin) = self.to_affine() {
            out.affine.add_scaled(&lin, mult);
            return Some(());
        }
        match self {
            Expr::Sum(terms) => {
                for t in terms {
                    t.decompose_into(mult, out)?;
                }
                Some(())
            }
            Expr::Scale(c, e) => e.decompose_into(mult * c, out),
            Expr::Square(e) => {
                let arg = e.to_affine()?;
                out.terms.push(QuadTerm::Square { coef: mult, arg });
                Some(())
            }
            Expr::Product(a, b) => {
                let mut left = a.to_affine()?;
                let mut right = b.to_affine()?;
                left.compact();
                right.compact();
                if left == right {
                    out.terms.push(QuadTerm::Square { coef: mult, arg: left });
                } else {
                    out.terms.push(QuadTerm::Product { coef: mult, left, right });
                }
                Some(())
            }
            Expr::Const(_) | Expr::Var(_) => unreachable!("affine leaves handled above"),
        }
    }

    /// Conservative convexity classification.
    ///
    /// `Convex` only for affine parts plus nonnegatively scaled squares of
    /// affine forms; `NonconvexBilinear` when the remaining terms are all
    /// products of two affine forms; `NonconvexGeneral` otherwise.
    pub fn classify_convexity(&self) -> ConvexityKind {
        let Some(dec) = self.decompose() else {
            return ConvexityKind::NonconvexGeneral;
        };
        let mut kind = ConvexityKind::Convex;
        for term in &dec.terms {
            let k = match term {
                QuadTerm::Square { coef, .. } if *coef >= 0.0 => ConvexityKind::Convex,
                QuadTerm::Square { .. } => ConvexityKind::NonconvexGeneral,
                QuadTerm::Product { coef, .. } if *coef == 0.0 => ConvexityKind::Convex,
                QuadTerm::Product { .. } => ConvexityKind::NonconvexBilinear,
            };
            kind = kind.max(k);
        }
        kind
    }
}

/// Sparse affine form `constant + sum coef_j x_j`, terms sorted by index.
#[derive(Debug, Clone, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn constant(c: f64) -> LinExpr {
        LinExpr { terms: Vec::new(), constant: c }
    }

    pub fn var(j: usize) -> LinExpr {
        LinExpr { terms: vec![(j, 1.0)], constant: 0.0 }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0.0)
    }

    pub fn scaled(mut self, c: f64) -> LinExpr {
        for t in &mut self.terms {
            t.1 *= c;
        }
        self.constant *= c;
        self
    }

    pub fn add_scaled(&mut self, other: &LinExpr, mult: f64) {
        self.constant += mult * other.constant;
        for &(j, c) in &other.terms {
            match self.terms.binary_search_by_key(&j, |t| t.0) {
                Ok(pos) => self.terms[pos].1 += mult * c,
                Err(pos) => self.terms.insert(pos, (j, mult * c)),
            }
        }
    }

    /// Drops exact zero coefficients.
    pub fn compact(&mut self) {
        self.terms.retain(|&(_, c)| c != 0.0);
    }

    pub fn evaluate(&self, point: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, c)| c * point[j]).sum::<f64>()
    }

    pub fn range(&self, lower: &[f64], upper: &[f64]) -> Interval {
        self.terms.iter().fold(Interval::point(self.constant), |acc, &(j, c)| {
            acc.add(Interval::new(lower[j], upper[j]).scale(c))
        })
    }
}

/// A degree-two term of a [`Decomposition`].
#[derive(Debug, Clone, PartialEq)]
pub enum QuadTerm {
    /// `coef * arg^2`
    Square { coef: f64, arg: LinExpr },
    /// `coef * left * right`
    Product { coef: f64, left: LinExpr, right: LinExpr },
}

impl QuadTerm {
    pub fn evaluate(&self, point: &[f64]) -> f64 {
        match self {
            QuadTerm::Square { coef, arg } => {
                let v = arg.evaluate(point);
                coef * v * v
            }
            QuadTerm::Product { coef, left, right } => {
                coef * left.evaluate(point) * right.evaluate(point)
            }
        }
    }

    /// Whether the term is convex on its own.
    pub fn is_convex(&self) -> bool {
        match self {
            QuadTerm::Square { coef, .. } => *coef >= 0.0,
            QuadTerm::Product { coef, .. } => *coef == 0.0,
        }
    }

    pub fn variables(&self) -> Vec<usize> {
        let mut v: Vec<usize> = match self {
            QuadTerm::Square { arg, .. } => arg.terms.iter().map(|t| t.0).collect(),
            QuadTerm::Product { left, right, .. } => {
                left.terms.iter().chain(right.terms.iter()).map(|t| t.0).collect()
            }
        };
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// `g(x) = affine(x) + sum_t term_t(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub affine: LinExpr,
    pub terms: Vec<QuadTerm>,
}

impl Decomposition {
    pub fn evaluate(&self, point: &[f64]) -> f64 {
        self.affine.evaluate(point) + self.terms.iter().map(|t| t.evaluate(point)).sum::<f64>()
    }
}

/// Closed interval over the extended reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[allow(clippy::should_implement_trait)]
impl Interval {
    pub fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Interval {
        Interval { lo: v, hi: v }
    }

    pub fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }

    pub fn scale(self, c: f64) -> Interval {
        if c == 0.0 {
            Interval::point(0.0)
        } else if c > 0.0 {
            Interval::new(c * self.lo, c * self.hi)
        } else {
            Interval::new(c * self.hi, c * self.lo)
        }
    }

    pub fn mul(self, o: Interval) -> Interval {
        let cands = [
            mul_ext(self.lo, o.lo),
            mul_ext(self.lo, o.hi),
            mul_ext(self.hi, o.lo),
            mul_ext(self.hi, o.hi),
        ];
        Interval::new(
            cands.iter().copied().fold(f64::INFINITY, f64::min),
            cands.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    pub fn square(self) -> Interval {
        let a = mul_ext(self.lo, self.lo);
        let b = mul_ext(self.hi, self.hi);
        if self.lo <= 0.0 && self.hi >= 0.0 {
            Interval::new(0.0, a.max(b))
        } else {
            Interval::new(a.min(b), a.max(b))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

// 0 * inf = 0 in interval arithmetic over bounded factors.
fn mul_ext(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

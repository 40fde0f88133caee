//! Scalar expressions over chart coordinates.
//!
//! The AST supports exact partial differentiation and pointwise evaluation;
//! it is the substrate for every vector field, differential form and bracket
//! in the crate. Only constant folding is applied when trees are built —
//! identity checks always go through numeric sampling, never through
//! symbolic normalization.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

mod compiled;
pub mod parse;
pub mod random;
pub mod sample;

pub use compiled::CompiledExpr;
pub use parse::{parse, CoordSet, ParseError};
pub use sample::{equal_on_samples, Components, Equality, SampleDomain, SampleError};

/// Expression tree node. `ScalarExpr` wraps this in an `Arc`, so subtrees are
/// shared freely during differentiation.
#[derive(Debug, PartialEq)]
enum Node {
    Const(f64),
    /// Index into the active chart's coordinate ordering.
    Coord(usize),
    Neg(ScalarExpr),
    Sin(ScalarExpr),
    Cos(ScalarExpr),
    Exp(ScalarExpr),
    Log(ScalarExpr),
    Sqrt(ScalarExpr),
    Add(ScalarExpr, ScalarExpr),
    Sub(ScalarExpr, ScalarExpr),
    Mul(ScalarExpr, ScalarExpr),
    Div(ScalarExpr, ScalarExpr),
    PowInt(ScalarExpr, i32),
    PowReal(ScalarExpr, f64),
}

/// Immutable scalar expression over chart coordinates.
///
/// Values are cheap to clone and safe to share across threads; evaluation is
/// pure. Coordinate symbols are stored as indices into the chart's fixed
/// coordinate ordering, so an expression only makes sense together with the
/// chart it was built for.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarExpr(Arc<Node>);

/// Where evaluation left the expression's domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum EvalErrorKind {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of a non-positive value")]
    LogDomain,
    #[error("square root of a negative value")]
    SqrtDomain,
    #[error("non-integer power of a non-positive base")]
    PowDomain,
    #[error("evaluation overflowed to a non-finite value")]
    NonFinite,
}

/// Domain error raised by [`ScalarExpr::eval`], carrying the offending point.
#[derive(Clone, Debug, PartialEq, Error)]
#[error("{kind} at point {point:?}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub point: Vec<f64>,
}

// The op-named builders below intentionally mirror the arithmetic they
// fold; the std::ops traits are not implemented because construction
// consumes both operands and call sites chain the methods directly.
#[allow(clippy::should_implement_trait)]
impl ScalarExpr {
    pub fn constant(value: f64) -> Self {
        ScalarExpr(Arc::new(Node::Const(value)))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// Coordinate symbol by index into the chart ordering.
    pub fn coord(index: usize) -> Self {
        ScalarExpr(Arc::new(Node::Coord(index)))
    }

    pub fn neg(self) -> Self {
        match &*self.0 {
            Node::Const(c) => Self::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => ScalarExpr(Arc::new(Node::Neg(self))),
        }
    }

    pub fn sin(self) -> Self {
        match &*self.0 {
            Node::Const(c) => Self::constant(c.sin()),
            _ => ScalarExpr(Arc::new(Node::Sin(self))),
        }
    }

    pub fn cos(self) -> Self {
        match &*self.0 {
            Node::Const(c) => Self::constant(c.cos()),
            _ => ScalarExpr(Arc::new(Node::Cos(self))),
        }
    }

    pub fn exp(self) -> Self {
        match &*self.0 {
            Node::Const(c) => Self::constant(c.exp()),
            _ => ScalarExpr(Arc::new(Node::Exp(self))),
        }
    }

    pub fn log(self) -> Self {
        match &*self.0 {
            // Fold only where the value is defined; domain errors stay runtime errors.
            Node::Const(c) if *c > 0.0 => Self::constant(c.ln()),
            _ => ScalarExpr(Arc::new(Node::Log(self))),
        }
    }

    pub fn sqrt(self) -> Self {
        match &*self.0 {
            Node::Const(c) if *c >= 0.0 => Self::constant(c.sqrt()),
            _ => ScalarExpr(Arc::new(Node::Sqrt(self))),
        }
    }

    pub fn add(self, rhs: Self) -> Self {
        match (&*self.0, &*rhs.0) {
            (Node::Const(a), Node::Const(b)) => Self::constant(a + b),
            (Node::Const(c), _) if *c == 0.0 => rhs,
            (_, Node::Const(c)) if *c == 0.0 => self,
            _ => ScalarExpr(Arc::new(Node::Add(self, rhs))),
        }
    }

    pub fn sub(self, rhs: Self) -> Self {
        match (&*self.0, &*rhs.0) {
            (Node::Const(a), Node::Const(b)) => Self::constant(a - b),
            (_, Node::Const(c)) if *c == 0.0 => self,
            (Node::Const(c), _) if *c == 0.0 => rhs.neg(),
            _ if self == rhs => Self::zero(),
            _ => ScalarExpr(Arc::new(Node::Sub(self, rhs))),
        }
    }

    pub fn mul(self, rhs: Self) -> Self {
        match (&*self.0, &*rhs.0) {
            (Node::Const(a), Node::Const(b)) => Self::constant(a * b),
            (Node::Const(c), _) if *c == 0.0 => Self::zero(),
            (_, Node::Const(c)) if *c == 0.0 => Self::zero(),
            (Node::Const(c), _) if *c == 1.0 => rhs,
            (_, Node::Const(c)) if *c == 1.0 => self,
            (Node::Const(c), _) if *c == -1.0 => rhs.neg(),
            (_, Node::Const(c)) if *c == -1.0 => self.neg(),
            _ => ScalarExpr(Arc::new(Node::Mul(self, rhs))),
        }
    }

    pub fn div(self, rhs: Self) -> Self {
        match (&*self.0, &*rhs.0) {
            (Node::Const(a), Node::Const(b)) if *b != 0.0 => Self::constant(a / b),
            (_, Node::Const(c)) if *c == 1.0 => self,
            // 0/x is NOT folded to 0: folding would erase the singularity at x = 0.
            _ => ScalarExpr(Arc::new(Node::Div(self, rhs))),
        }
    }

    pub fn powi(self, exponent: i32) -> Self {
        match (&*self.0, exponent) {
            (_, 0) => Self::one(),
            (_, 1) => self,
            (Node::Const(c), n) => Self::constant(c.powi(n)),
            _ => ScalarExpr(Arc::new(Node::PowInt(self, exponent))),
        }
    }

    pub fn powf(self, exponent: f64) -> Self {
        match &*self.0 {
            Node::Const(c) if *c > 0.0 => Self::constant(c.powf(exponent)),
            _ => ScalarExpr(Arc::new(Node::PowReal(self, exponent))),
        }
    }

    /// Scale by a real constant.
    pub fn scale(self, factor: f64) -> Self {
        Self::constant(factor).mul(self)
    }

    pub fn is_zero(&self) -> bool {
        matches!(&*self.0, Node::Const(c) if *c == 0.0)
    }

    /// Exact partial derivative with respect to the coordinate at `index`.
    pub fn differentiate(&self, index: usize) -> ScalarExpr {
        match &*self.0 {
            Node::Const(_) => Self::zero(),
            Node::Coord(i) => {
                if *i == index {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            Node::Neg(u) => u.differentiate(index).neg(),
            Node::Sin(u) => u.clone().cos().mul(u.differentiate(index)),
            Node::Cos(u) => u.clone().sin().neg().mul(u.differentiate(index)),
            Node::Exp(u) => u.clone().exp().mul(u.differentiate(index)),
            Node::Log(u) => u.differentiate(index).div(u.clone()),
            Node::Sqrt(u) => u.differentiate(index).div(u.clone().sqrt().scale(2.0)),
            Node::Add(a, b) => a.differentiate(index).add(b.differentiate(index)),
            Node::Sub(a, b) => a.differentiate(index).sub(b.differentiate(index)),
            Node::Mul(a, b) => a
                .differentiate(index)
                .mul(b.clone())
                .add(a.clone().mul(b.differentiate(index))),
            Node::Div(a, b) => a
                .differentiate(index)
                .mul(b.clone())
                .sub(a.clone().mul(b.differentiate(index)))
                .div(b.clone().powi(2)),
            Node::PowInt(u, n) => u
                .clone()
                .powi(n - 1)
                .scale(f64::from(*n))
                .mul(u.differentiate(index)),
            Node::PowReal(u, r) => u
                .clone()
                .powf(r - 1.0)
                .scale(*r)
                .mul(u.differentiate(index)),
        }
    }

    /// Evaluate at `point`. Fails with a domain error (carrying the point) on
    /// division by zero, log/sqrt/power domain violations or non-finite
    /// results.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        self.eval_guarded(point, 0.0)
    }

    /// Evaluate with a singularity guard: any intermediate denominator,
    /// logarithm argument or real-power base within `sing` of its singular set
    /// is rejected. `sing = 0` reduces to plain evaluation.
    pub fn eval_guarded(&self, point: &[f64], sing: f64) -> Result<f64, EvalError> {
        self.eval_inner(point, sing).map_err(|kind| EvalError {
            kind,
            point: point.to_vec(),
        })
    }

    fn eval_inner(&self, point: &[f64], sing: f64) -> Result<f64, EvalErrorKind> {
        let value = match &*self.0 {
            Node::Const(c) => *c,
            Node::Coord(i) => point[*i],
            Node::Neg(u) => -u.eval_inner(point, sing)?,
            Node::Sin(u) => u.eval_inner(point, sing)?.sin(),
            Node::Cos(u) => u.eval_inner(point, sing)?.cos(),
            Node::Exp(u) => u.eval_inner(point, sing)?.exp(),
            Node::Log(u) => {
                let v = u.eval_inner(point, sing)?;
                if v <= sing {
                    return Err(EvalErrorKind::LogDomain);
                }
                v.ln()
            }
            Node::Sqrt(u) => {
                let v = u.eval_inner(point, sing)?;
                if v < 0.0 {
                    return Err(EvalErrorKind::SqrtDomain);
                }
                v.sqrt()
            }
            Node::Add(a, b) => a.eval_inner(point, sing)? + b.eval_inner(point, sing)?,
            Node::Sub(a, b) => a.eval_inner(point, sing)? - b.eval_inner(point, sing)?,
            Node::Mul(a, b) => a.eval_inner(point, sing)? * b.eval_inner(point, sing)?,
            Node::Div(a, b) => {
                let num = a.eval_inner(point, sing)?;
                let den = b.eval_inner(point, sing)?;
                if den.abs() <= sing {
                    return Err(EvalErrorKind::DivisionByZero);
                }
                num / den
            }
            Node::PowInt(u, n) => {
                let v = u.eval_inner(point, sing)?;
                if *n < 0 && v.abs() <= sing {
                    return Err(EvalErrorKind::DivisionByZero);
                }
                v.powi(*n)
            }
            Node::PowReal(u, r) => {
                let v = u.eval_inner(point, sing)?;
                if v <= sing {
                    return Err(EvalErrorKind::PowDomain);
                }
                v.powf(*r)
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalErrorKind::NonFinite)
        }
    }

    /// Largest coordinate index mentioned, if any.
    pub fn max_coord_index(&self) -> Option<usize> {
        match &*self.0 {
            Node::Const(_) => None,
            Node::Coord(i) => Some(*i),
            Node::Neg(u)
            | Node::Sin(u)
            | Node::Cos(u)
            | Node::Exp(u)
            | Node::Log(u)
            | Node::Sqrt(u)
            | Node::PowInt(u, _)
            | Node::PowReal(u, _) => u.max_coord_index(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                match (a.max_coord_index(), b.max_coord_index()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    /// Render with coordinate names; re-parses to an evaluation-equivalent
    /// expression.
    pub fn pretty(&self, names: &[String]) -> String {
        let mut out = String::new();
        self.fmt_prec(&mut out, names, 0);
        out
    }

    // Precedence levels: 1 add/sub, 2 mul/div, 3 unary minus, 4 power.
    fn fmt_prec(&self, out: &mut String, names: &[String], parent: u8) {
        let prec = match &*self.0 {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(..) => 3,
            Node::PowInt(..) | Node::PowReal(..) => 4,
            Node::Const(c) if *c < 0.0 => 3,
            _ => 5,
        };
        let need_paren = prec < parent;
        if need_paren {
            out.push('(');
        }
        match &*self.0 {
            Node::Const(c) => {
                use fmt::Write;
                // `{:?}` prints a shortest round-trip f64 literal.
                let _ = write!(out, "{c:?}");
            }
            Node::Coord(i) => out.push_str(&names[*i]),
            Node::Neg(u) => {
                // `-` binds tighter than `^` in the grammar, so a power
                // child must be parenthesized: -(q^2), not -q^2.
                out.push('-');
                u.fmt_prec(out, names, 5);
            }
            Node::Sin(u) => Self::fmt_func(out, names, "sin", u),
            Node::Cos(u) => Self::fmt_func(out, names, "cos", u),
            Node::Exp(u) => Self::fmt_func(out, names, "exp", u),
            Node::Log(u) => Self::fmt_func(out, names, "log", u),
            Node::Sqrt(u) => Self::fmt_func(out, names, "sqrt", u),
            Node::Add(a, b) => {
                a.fmt_prec(out, names, 1);
                out.push_str(" + ");
                b.fmt_prec(out, names, 2);
            }
            Node::Sub(a, b) => {
                a.fmt_prec(out, names, 1);
                out.push_str(" - ");
                b.fmt_prec(out, names, 2);
            }
            Node::Mul(a, b) => {
                a.fmt_prec(out, names, 2);
                out.push('*');
                b.fmt_prec(out, names, 3);
            }
            Node::Div(a, b) => {
                a.fmt_prec(out, names, 2);
                out.push('/');
                b.fmt_prec(out, names, 3);
            }
            Node::PowInt(u, n) => {
                use fmt::Write;
                u.fmt_prec(out, names, 5);
                let _ = write!(out, "^{n}");
            }
            Node::PowReal(u, r) => {
                use fmt::Write;
                u.fmt_prec(out, names, 5);
                let _ = write!(out, "^{r:?}");
            }
        }
        if need_paren {
            out.push(')');
        }
    }

    fn fmt_func(out: &mut String, names: &[String], name: &str, arg: &ScalarExpr) {
        out.push_str(name);
        out.push('(');
        arg.fmt_prec(out, names, 0);
        out.push(')');
    }

    fn node(&self) -> &Node {
        &self.0
    }
}

impl Components for ScalarExpr {
    fn components(&self) -> Vec<ScalarExpr> {
        vec![self.clone()]
    }
}

#[cfg(test)]
mod tests {
    use super::sample::SampleDomain;
    use super::*;

    fn d(e: &ScalarExpr, i: usize) -> ScalarExpr {
        e.differentiate(i)
    }

    #[test]
    fn expressions_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<ScalarExpr>();
        assert_send_sync::<CompiledExpr>();
    }

    #[test]
    fn differentiates_square_to_linear() {
        // d/dq (q^2) = 2 q
        let q = ScalarExpr::coord(0);
        let dq = d(&q.clone().powi(2), 0);
        for v in [0.3, 1.0, 1.7, -2.4] {
            assert_eq!(dq.eval(&[v]).unwrap(), 2.0 * v);
        }
    }

    #[test]
    fn differentiates_inverse_square() {
        // d/dz (-1/z^2) = 2/z^3 on a contact chart (q, p, z)
        let z = ScalarExpr::coord(2);
        let e = ScalarExpr::one().div(z.clone().powi(2)).neg();
        let de = d(&e, 2);
        for zv in [0.5, 1.0, 2.0] {
            let got = de.eval(&[1.0, 1.0, zv]).unwrap();
            assert!((got - 2.0 / zv.powi(3)).abs() < 1e-14, "got {got}");
        }
    }

    #[test]
    fn differentiates_bilinear() {
        // d/dp (p*q + z) = q
        let (q, p, z) = (
            ScalarExpr::coord(0),
            ScalarExpr::coord(1),
            ScalarExpr::coord(2),
        );
        let e = p.mul(q).add(z);
        let de = d(&e, 1);
        assert_eq!(de.eval(&[3.5, 0.0, 0.0]).unwrap(), 3.5);
    }

    #[test]
    fn eval_reports_division_by_zero_with_point() {
        let e = ScalarExpr::one().div(ScalarExpr::coord(0));
        let err = e.eval(&[0.0, 1.0]).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::DivisionByZero);
        assert_eq!(err.point, vec![0.0, 1.0]);
    }

    #[test]
    fn eval_rejects_non_integer_power_of_negative_base() {
        let e = ScalarExpr::coord(0).powf(0.5);
        let err = e.eval(&[-1.0]).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::PowDomain);
    }

    #[test]
    fn constant_zero_evaluates_everywhere() {
        let e = ScalarExpr::zero();
        assert_eq!(e.eval(&[123.0, -4.0]).unwrap(), 0.0);
    }

    #[test]
    fn guarded_eval_excludes_near_singular_denominators() {
        let e = ScalarExpr::one().div(ScalarExpr::coord(0));
        assert!(e.eval_guarded(&[5e-4], 1e-3).is_err());
        assert!(e.eval_guarded(&[5e-3], 1e-3).is_ok());
    }

    #[test]
    fn symbolic_derivative_matches_central_differences() {
        // |symbolic ∂ - central difference (step 1e-5)| < 1e-6 on random
        // smooth expressions over a 3-coordinate chart.
        let dim = 3;
        let dom = SampleDomain::default_for_dim(dim);
        for seed in 0..40u64 {
            let f = random::random_smooth(dim, seed);
            let points = sample::admissible_points(std::slice::from_ref(&f), &dom, 5).unwrap();
            for k in 0..dim {
                let df = f.differentiate(k);
                for x in &points {
                    let h = 1e-5;
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[k] += h;
                    xm[k] -= h;
                    let (fp, fm) = match (f.eval(&xp), f.eval(&xm)) {
                        (Ok(a), Ok(b)) => (a, b),
                        _ => continue,
                    };
                    let fd = (fp - fm) / (2.0 * h);
                    let sym = df.eval(x).unwrap();
                    assert!(
                        (sym - fd).abs() < 1e-6,
                        "seed {seed} coord {k}: symbolic {sym} vs fd {fd} at {x:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn product_rule_holds_numerically() {
        // |∂(fg) - (∂f·g + f·∂g)| < 1e-9 over random pairs and sample points.
        let dim = 3;
        let dom = SampleDomain::default_for_dim(dim).with_samples(200);
        for seed in 0..20u64 {
            let f = random::random_polynomial(dim, seed);
            let g = random::random_polynomial(dim, seed ^ 0xdead_beef);
            for k in 0..dim {
                let lhs = f.clone().mul(g.clone()).differentiate(k);
                let rhs = f
                    .differentiate(k)
                    .mul(g.clone())
                    .add(f.clone().mul(g.differentiate(k)));
                let eq = equal_on_samples(&lhs, &rhs, &dom, 1e-9).unwrap();
                assert!(eq.verdict, "seed {seed}: residual {}", eq.max_residual);
            }
        }
    }

    #[test]
    fn linearity_of_differentiate() {
        let dim = 2;
        let dom = SampleDomain::default_for_dim(dim);
        for seed in 0..10u64 {
            let f = random::random_polynomial(dim, seed);
            let g = random::random_polynomial(dim, seed.wrapping_add(77));
            let sum = f.clone().add(g.clone());
            for k in 0..dim {
                let lhs = sum.differentiate(k);
                let rhs = f.differentiate(k).add(g.differentiate(k));
                let eq = equal_on_samples(&lhs, &rhs, &dom, 1e-12).unwrap();
                assert!(eq.verdict);
            }
        }
    }
}

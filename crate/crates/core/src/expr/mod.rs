//! Immutable symbolic scalar expressions.
//!
//! Expressions are hash-consed trees behind an [`Arc`]; cloning is cheap and
//! equality is structural. Construction goes through smart constructors that
//! fold constants and drop identities (`x + 0`, `x * 1`, `x * 0`, `0 / x`),
//! and nothing more: identities from the geometry are established by
//! sampling, not by canonical simplification.

mod diff;
mod eval;
mod parse;
mod print;
mod zero;

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};

pub use eval::{evaluate, Program, DIVISION_GUARD};
pub use parse::{parse, Names};
pub use zero::{is_zero_sampled, ZeroTest};

/// Exact rational or binary floating-point constant.
#[derive(Debug, Clone, Copy)]
pub enum Number {
    Rational(Ratio<i64>),
    Real(f64),
}

impl Number {
    pub fn int(n: i64) -> Self {
        Number::Rational(Ratio::from_integer(n))
    }

    pub fn value(&self) -> f64 {
        match self {
            Number::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Number::Real(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Real(x) => *x == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_one(),
            Number::Real(x) => *x == 1.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_negative(),
            Number::Real(x) => x.is_sign_negative() && *x != 0.0,
        }
    }

    /// The value as an integer, if it is an exact integer.
    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Number::Rational(r) if r.is_integer() => Some(*r.numer()),
            _ => None,
        }
    }

    fn combine(
        self,
        other: Number,
        exact: impl Fn(Ratio<i64>, Ratio<i64>) -> Option<Ratio<i64>>,
        real: impl Fn(f64, f64) -> f64,
    ) -> Option<Number> {
        if let (Number::Rational(a), Number::Rational(b)) = (self, other) {
            if let Some(r) = exact(a, b) {
                return Some(Number::Rational(r));
            }
        }
        let v = real(self.value(), other.value());
        v.is_finite().then_some(Number::Real(v))
    }

    fn neg(self) -> Number {
        match self {
            Number::Rational(r) => Number::Rational(-r),
            Number::Real(x) => Number::Real(-x),
        }
    }

    fn powi(self, n: i64) -> Option<Number> {
        if let Number::Rational(r) = self {
            let e = i32::try_from(n).ok()?;
            if r.is_zero() && e < 0 {
                return None;
            }
            if let Some(p) = checked_ratio_pow(r, e) {
                return Some(Number::Rational(p));
            }
        }
        let v = self.value().powi(n as i32);
        v.is_finite().then_some(Number::Real(v))
    }
}

fn checked_ratio_pow(r: Ratio<i64>, e: i32) -> Option<Ratio<i64>> {
    let (base, e) = if e < 0 {
        (Ratio::new(*r.denom(), *r.numer()), e.unsigned_abs())
    } else {
        (r, e as u32)
    };
    let n = base.numer().checked_pow(e)?;
    let d = base.denom().checked_pow(e)?;
    Some(Ratio::new(n, d))
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => a == b,
            (Number::Real(a), Number::Real(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for Number {}

impl Hash for Number {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Number::Rational(r) => {
                0u8.hash(state);
                r.numer().hash(state);
                r.denom().hash(state);
            }
            Number::Real(x) => {
                1u8.hash(state);
                x.to_bits().hash(state);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Cot,
    Ln,
    Exp,
    Sqrt,
    Arccos,
    Abs,
}

impl UnaryOp {
    pub const FUNCTIONS: [UnaryOp; 9] = [
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Tan,
        UnaryOp::Cot,
        UnaryOp::Ln,
        UnaryOp::Exp,
        UnaryOp::Sqrt,
        UnaryOp::Arccos,
        UnaryOp::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Cot => "cot",
            UnaryOp::Ln => "ln",
            UnaryOp::Exp => "exp",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Arccos => "arccos",
            UnaryOp::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::FUNCTIONS.into_iter().find(|op| op.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Num(Number),
    /// A chart coordinate or other sampled variable.
    Var(Arc<str>),
    /// A named constant supplied per evaluation, e.g. `Lambda`.
    Param(Arc<str>),
    Unary(UnaryOp, Expr),
    Binary(BinaryOp, Expr, Expr),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    hash: u64,
}

/// A shared, immutable expression tree.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.hash == other.0.hash && self.0.node == other.0.node)
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    fn from_node(node: Node) -> Self {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        node.hash(&mut h);
        Expr(Arc::new(Inner { hash: h.finish(), node }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub(crate) fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn number(n: Number) -> Self {
        Expr::from_node(Node::Num(n))
    }

    pub fn int(n: i64) -> Self {
        Expr::number(Number::int(n))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    /// Exact rational `p/q`.
    ///
    /// Panics if `q == 0`.
    pub fn rational(p: i64, q: i64) -> Self {
        Expr::number(Number::Rational(Ratio::new(p, q)))
    }

    pub fn real(x: f64) -> Self {
        Expr::number(Number::Real(x))
    }

    pub fn var(name: &str) -> Self {
        Expr::from_node(Node::Var(name.into()))
    }

    pub fn param(name: &str) -> Self {
        Expr::from_node(Node::Param(name.into()))
    }

    pub fn as_number(&self) -> Option<Number> {
        match self.node() {
            Node::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_number().is_some_and(|n| n.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_number().is_some_and(|n| n.is_one())
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        if let Some(n) = a.as_number() {
            match op {
                UnaryOp::Neg => return Expr::number(n.neg()),
                UnaryOp::Abs => {
                    return Expr::number(if n.is_negative() { n.neg() } else { n });
                }
                _ => {
                    let v = eval::apply_unary(op, n.value());
                    if let Ok(v) = v {
                        if v.is_finite() {
                            return Expr::real(v);
                        }
                    }
                }
            }
        }
        if op == UnaryOp::Neg {
            if let Node::Unary(UnaryOp::Neg, inner) = a.node() {
                return inner.clone();
            }
        }
        Expr::from_node(Node::Unary(op, a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        let (na, nb) = (a.as_number(), b.as_number());
        match op {
            BinaryOp::Add => {
                if a.is_zero() {
                    return b;
                }
                if b.is_zero() {
                    return a;
                }
                if let (Some(x), Some(y)) = (na, nb) {
                    if let Some(r) = x.combine(y, |p, q| p.checked_add(&q), |p, q| p + q) {
                        return Expr::number(r);
                    }
                }
            }
            BinaryOp::Sub => {
                if b.is_zero() {
                    return a;
                }
                if a.is_zero() {
                    return Expr::unary(UnaryOp::Neg, b);
                }
                if let (Some(x), Some(y)) = (na, nb) {
                    if let Some(r) = x.combine(y, |p, q| p.checked_sub(&q), |p, q| p - q) {
                        return Expr::number(r);
                    }
                }
            }
            BinaryOp::Mul => {
                if a.is_zero() || b.is_zero() {
                    return Expr::zero();
                }
                if a.is_one() {
                    return b;
                }
                if b.is_one() {
                    return a;
                }
                if let (Some(x), Some(y)) = (na, nb) {
                    if let Some(r) = x.combine(y, |p, q| p.checked_mul(&q), |p, q| p * q) {
                        return Expr::number(r);
                    }
                }
            }
            BinaryOp::Div => {
                if b.is_one() {
                    return a;
                }
                if a.is_zero() && !b.is_zero() {
                    return Expr::zero();
                }
                if let (Some(x), Some(y)) = (na, nb) {
                    if !y.is_zero() {
                        if let Some(r) = x.combine(y, |p, q| p.checked_div(&q), |p, q| p / q) {
                            return Expr::number(r);
                        }
                    }
                }
            }
            BinaryOp::Pow => {
                if b.is_zero() {
                    return Expr::one();
                }
                if b.is_one() {
                    return a;
                }
                if let (Some(x), Some(y)) = (na, nb) {
                    let folded = match y.as_integer() {
                        Some(n) => x.powi(n),
                        None => {
                            let v = x.value().powf(y.value());
                            v.is_finite().then_some(Number::Real(v))
                        }
                    };
                    if let Some(r) = folded {
                        return Expr::number(r);
                    }
                }
            }
        }
        Expr::from_node(Node::Binary(op, a, b))
    }

    pub fn powi(&self, n: i64) -> Expr {
        Expr::binary(BinaryOp::Pow, self.clone(), Expr::int(n))
    }

    pub fn pow(&self, exponent: Expr) -> Expr {
        Expr::binary(BinaryOp::Pow, self.clone(), exponent)
    }

    pub fn sin(&self) -> Expr {
        Expr::unary(UnaryOp::Sin, self.clone())
    }

    pub fn cos(&self) -> Expr {
        Expr::unary(UnaryOp::Cos, self.clone())
    }

    pub fn tan(&self) -> Expr {
        Expr::unary(UnaryOp::Tan, self.clone())
    }

    pub fn cot(&self) -> Expr {
        Expr::unary(UnaryOp::Cot, self.clone())
    }

    pub fn ln(&self) -> Expr {
        Expr::unary(UnaryOp::Ln, self.clone())
    }

    pub fn exp(&self) -> Expr {
        Expr::unary(UnaryOp::Exp, self.clone())
    }

    pub fn sqrt(&self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self.clone())
    }

    pub fn arccos(&self) -> Expr {
        Expr::unary(UnaryOp::Arccos, self.clone())
    }

    pub fn abs(&self) -> Expr {
        Expr::unary(UnaryOp::Abs, self.clone())
    }

    /// True if `name` occurs as a variable anywhere in the tree.
    pub fn depends_on(&self, name: &str) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.any_node(&mut seen, &|n| matches!(n, Node::Var(v) if &**v == name))
    }

    fn any_node(&self, seen: &mut std::collections::HashSet<usize>, pred: &dyn Fn(&Node) -> bool) -> bool {
        if !seen.insert(self.ptr_id()) {
            return false;
        }
        if pred(self.node()) {
            return true;
        }
        match self.node() {
            Node::Unary(_, a) => a.any_node(seen, pred),
            Node::Binary(_, a, b) => a.any_node(seen, pred) || b.any_node(seen, pred),
            _ => false,
        }
    }

    /// Names of all variables occurring in the tree.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out, &mut BTreeSet::new());
        out
    }

    /// Names of all parameters occurring in the tree.
    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect_names(&self, vars: &mut BTreeSet<String>, params: &mut BTreeSet<String>) {
        match self.node() {
            Node::Var(v) => {
                vars.insert(v.to_string());
            }
            Node::Param(p) => {
                params.insert(p.to_string());
            }
            Node::Num(_) => {}
            Node::Unary(_, a) => a.collect_names(vars, params),
            Node::Binary(_, a, b) => {
                a.collect_names(vars, params);
                b.collect_names(vars, params);
            }
        }
    }

    /// Replaces variables by expressions, rebuilding through the smart
    /// constructors.
    pub fn substitute(&self, map: &std::collections::HashMap<String, Expr>) -> Expr {
        let mut memo = std::collections::HashMap::new();
        self.substitute_memo(map, &mut memo)
    }

    fn substitute_memo(
        &self,
        map: &std::collections::HashMap<String, Expr>,
        memo: &mut std::collections::HashMap<usize, Expr>,
    ) -> Expr {
        if let Some(e) = memo.get(&self.ptr_id()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Var(v) => map.get(&**v).cloned().unwrap_or_else(|| self.clone()),
            Node::Num(_) | Node::Param(_) => self.clone(),
            Node::Unary(op, a) => Expr::unary(*op, a.substitute_memo(map, memo)),
            Node::Binary(op, a, b) => Expr::binary(*op, a.substitute_memo(map, memo), b.substitute_memo(map, memo)),
        };
        memo.insert(self.ptr_id(), out.clone());
        out
    }

    /// Number of distinct nodes (shared subtrees counted once).
    pub fn size(&self) -> usize {
        fn walk(e: &Expr, seen: &mut std::collections::HashSet<usize>) {
            if !seen.insert(e.ptr_id()) {
                return;
            }
            match e.node() {
                Node::Unary(_, a) => walk(a, seen),
                Node::Binary(_, a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
                _ => {}
            }
        }
        let mut seen = std::collections::HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }

    /// Numeric value of a constant expression, if the tree has no names.
    pub fn constant_value(&self) -> Option<f64> {
        self.as_number().map(|n| n.value())
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<f64> for Expr {
    fn from(x: f64) -> Self {
        Expr::real(x)
    }
}

macro_rules! binop_impls {
    ($trait:ident, $method:ident, $op:expr) => {
        impl std::ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
        impl std::ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self, rhs.clone())
            }
        }
        impl std::ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self.clone(), rhs)
            }
        }
        impl std::ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self.clone(), rhs.clone())
            }
        }
        impl std::ops::$trait<i64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: i64) -> Expr {
                Expr::binary($op, self, Expr::int(rhs))
            }
        }
        impl std::ops::$trait<i64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: i64) -> Expr {
                Expr::binary($op, self.clone(), Expr::int(rhs))
            }
        }
        impl std::ops::$trait<Expr> for i64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, Expr::int(self), rhs)
            }
        }
        impl std::ops::$trait<&Expr> for i64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, Expr::int(self), rhs.clone())
            }
        }
    };
}

binop_impls!(Add, add, BinaryOp::Add);
binop_impls!(Sub, sub, BinaryOp::Sub);
binop_impls!(Mul, mul, BinaryOp::Mul);
binop_impls!(Div, div, BinaryOp::Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var("x")
    }

    #[test]
    #[allow(clippy::erasing_op)]
    fn identities_fold() {
        assert_eq!(x() + 0, x());
        assert_eq!(x() * 1, x());
        assert_eq!(x() * 0, Expr::zero());
        assert_eq!(Expr::zero() / x(), Expr::zero());
        assert_eq!(Expr::int(2) + Expr::int(3), Expr::int(5));
        assert_eq!(Expr::int(1) / Expr::int(3), Expr::rational(1, 3));
        assert_eq!(-(-x()), x());
    }

    #[test]
    fn structural_equality_ignores_sharing() {
        let a = x().sin() * 2;
        let b = x().sin() * 2;
        assert_eq!(a, b);
        assert_ne!(a, x().cos() * 2);
    }

    #[test]
    fn rational_overflow_falls_back_to_real() {
        let big = Expr::int(i64::MAX);
        let sum = big.clone() + big;
        assert!(matches!(sum.as_number(), Some(Number::Real(_))));
    }

    #[test]
    fn dependency_queries() {
        let e = Expr::param("Lambda") * x().powi(2) + Expr::var("y");
        assert!(e.depends_on("x"));
        assert!(!e.depends_on("u"));
        assert_eq!(e.parameters().into_iter().collect::<Vec<_>>(), vec!["Lambda"]);
        assert_eq!(e.variables().len(), 2);
    }
}

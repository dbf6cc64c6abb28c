use std::fmt;

use super::{BinaryOp, Expr, Node, Number, UnaryOp};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const PREFIX: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Num(Number::Rational(r)) if !r.is_integer() => PRODUCT,
        Node::Num(n) if n.is_negative() => PREFIX,
        Node::Num(_) | Node::Var(_) | Node::Param(_) => ATOM,
        Node::Unary(UnaryOp::Neg, _) => PREFIX,
        Node::Unary(..) => ATOM,
        Node::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => SUM,
        Node::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => PRODUCT,
        Node::Binary(BinaryOp::Pow, ..) => POWER,
    }
}

fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Number::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Number::Real(x) => write!(f, "{x:?}"),
        }
    }
}

/// Prints in the parser's grammar with the fewest parentheses that still
/// parse back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(n) => write!(f, "{n}"),
            Node::Var(name) | Node::Param(name) => f.write_str(name),
            Node::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                child(f, a, POWER)
            }
            Node::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Node::Binary(op, a, b) => {
                let (sym, lhs, rhs) = match op {
                    BinaryOp::Add => (" + ", SUM, PRODUCT),
                    BinaryOp::Sub => (" - ", SUM, PRODUCT),
                    BinaryOp::Mul => ("*", PRODUCT, PREFIX),
                    BinaryOp::Div => ("/", PRODUCT, PREFIX),
                    BinaryOp::Pow => {
                        child(f, a, ATOM)?;
                        return match b.as_number().and_then(|n| n.as_integer()) {
                            Some(k) if k >= 0 => write!(f, "^{k}"),
                            _ => write!(f, "^({b})"),
                        };
                    }
                };
                child(f, a, lhs)?;
                f.write_str(sym)?;
                child(f, b, rhs)
            }
        }
    }
}

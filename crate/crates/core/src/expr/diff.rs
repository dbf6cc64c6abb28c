use std::collections::HashMap;

use super::{BinaryOp, Expr, Node, UnaryOp};

impl Expr {
    /// Exact partial derivative with respect to the variable `var`.
    ///
    /// Parameters and other variables are constants.
    pub fn derivative(&self, var: &str) -> Expr {
        let mut memo = HashMap::new();
        derive(self, var, &mut memo)
    }
}

fn derive(e: &Expr, var: &str, memo: &mut HashMap<usize, Expr>) -> Expr {
    if let Some(d) = memo.get(&e.ptr_id()) {
        return d.clone();
    }
    let d = match e.node() {
        Node::Num(_) | Node::Param(_) => Expr::zero(),
        Node::Var(name) => {
            if &**name == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Unary(op, a) => {
            let da = derive(a, var, memo);
            if da.is_zero() {
                Expr::zero()
            } else {
                let outer = match op {
                    UnaryOp::Neg => return cache(memo, e, -da),
                    UnaryOp::Sin => a.cos(),
                    UnaryOp::Cos => -a.sin(),
                    UnaryOp::Tan => 1 / a.cos().powi(2),
                    UnaryOp::Cot => -(1 / a.sin().powi(2)),
                    UnaryOp::Ln => return cache(memo, e, da / a),
                    UnaryOp::Exp => e.clone(),
                    UnaryOp::Sqrt => 1 / (2 * e),
                    UnaryOp::Arccos => -(1 / (1 - a.powi(2)).sqrt()),
                    UnaryOp::Abs => a / e,
                };
                outer * da
            }
        }
        Node::Binary(op, a, b) => {
            let da = derive(a, var, memo);
            let db = derive(b, var, memo);
            match op {
                BinaryOp::Add => da + db,
                BinaryOp::Sub => da - db,
                BinaryOp::Mul => da * b + a * db,
                BinaryOp::Div => {
                    if db.is_zero() {
                        da / b
                    } else {
                        (da * b - a * db) / b.powi(2)
                    }
                }
                BinaryOp::Pow => {
                    if db.is_zero() {
                        // constant exponent: n a^(n-1) a'
                        if da.is_zero() {
                            Expr::zero()
                        } else {
                            b * a.pow(b - 1) * da
                        }
                    } else {
                        // a^b (b' ln a + b a'/a)
                        e * (db * a.ln() + b * da / a)
                    }
                }
            }
        }
    };
    cache(memo, e, d)
}

fn cache(memo: &mut HashMap<usize, Expr>, e: &Expr, d: Expr) -> Expr {
    memo.insert(e.ptr_id(), d.clone());
    d
}

#[cfg(test)]
mod tests {
    use crate::domain::Point;
    use crate::expr::{evaluate, parse, Names};

    fn n() -> Names {
        Names::new(["v", "x", "y", "u"], ["Lambda"])
    }

    #[test]
    fn derivative_of_sin_is_cos() {
        let e = parse("sin(x)", &n()).unwrap();
        assert_eq!(e.derivative("x"), parse("cos(x)", &n()).unwrap());
    }

    #[test]
    fn v_derivative_of_walker_profile() {
        let e = parse("Lambda*v^2 + x^4*sin(y)*u", &n()).unwrap();
        let d = e.derivative("v");
        // structurally Lambda*(2*v) after folding
        let p = Point::new([("v", 0.7), ("x", 1.0), ("y", 0.2), ("u", 0.1)]).with_param("Lambda", -3.0);
        assert!((evaluate(&d, &p).unwrap() - 2.0 * -3.0 * 0.7).abs() < 1e-14);
        assert!(!d.depends_on("x"));
    }

    #[test]
    fn parameter_derivative_is_zero() {
        let e = parse("Lambda^2 + 3", &n()).unwrap();
        assert!(e.derivative("x").is_zero());
    }

    #[test]
    fn variable_exponent() {
        let e = parse("x^(y)", &n()).unwrap();
        let dx = e.derivative("x");
        let dy = e.derivative("y");
        let p = Point::new([("x", 1.7), ("y", 0.6)]);
        let (x, y): (f64, f64) = (1.7, 0.6);
        assert!((evaluate(&dx, &p).unwrap() - y * x.powf(y - 1.0)).abs() < 1e-13);
        assert!((evaluate(&dy, &p).unwrap() - x.powf(y) * x.ln()).abs() < 1e-13);
    }
}

use std::collections::HashMap;

use super::{BinaryOp, Expr, Node, UnaryOp};
use crate::domain::Point;
use crate::error::{Error, Result};

/// Divisors smaller than this in magnitude are a domain error.
pub const DIVISION_GUARD: f64 = 1e-12;

pub(crate) fn apply_unary(op: UnaryOp, a: f64) -> Result<f64> {
    let out = match op {
        UnaryOp::Neg => -a,
        UnaryOp::Sin => a.sin(),
        UnaryOp::Cos => a.cos(),
        UnaryOp::Tan => {
            let c = a.cos();
            if c.abs() < DIVISION_GUARD {
                return Err(Error::Domain { op: "tan", arg: a });
            }
            a.sin() / c
        }
        UnaryOp::Cot => {
            let s = a.sin();
            if s.abs() < DIVISION_GUARD {
                return Err(Error::Domain { op: "cot", arg: a });
            }
            a.cos() / s
        }
        UnaryOp::Ln => {
            if a <= 0.0 {
                return Err(Error::Domain { op: "ln", arg: a });
            }
            a.ln()
        }
        UnaryOp::Exp => a.exp(),
        UnaryOp::Sqrt => {
            if a < 0.0 {
                return Err(Error::Domain { op: "sqrt", arg: a });
            }
            a.sqrt()
        }
        UnaryOp::Arccos => {
            if a.abs() > 1.0 {
                return Err(Error::Domain { op: "arccos", arg: a });
            }
            a.acos()
        }
        UnaryOp::Abs => a.abs(),
    };
    finite(op.name(), a, out)
}

fn apply_binary(op: BinaryOp, a: f64, b: f64) -> Result<f64> {
    let out = match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => {
            if b.abs() < DIVISION_GUARD {
                return Err(Error::Domain { op: "/", arg: b });
            }
            a / b
        }
        BinaryOp::Pow => {
            if b.fract() == 0.0 && b.abs() < i32::MAX as f64 {
                if a == 0.0 && b < 0.0 {
                    return Err(Error::Domain { op: "^", arg: a });
                }
                a.powi(b as i32)
            } else {
                if a < 0.0 || (a == 0.0 && b < 0.0) {
                    return Err(Error::Domain { op: "^", arg: a });
                }
                a.powf(b)
            }
        }
    };
    finite("evaluate", a, out)
}

fn finite(op: &'static str, arg: f64, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain { op, arg })
    }
}

/// Evaluates `e` at `p` by walking the tree.
///
/// Convenient for one-off values; hot loops should compile a [`Program`].
pub fn evaluate(e: &Expr, p: &Point) -> Result<f64> {
    let mut memo = HashMap::new();
    eval_walk(e, p, &mut memo)
}

fn eval_walk(e: &Expr, p: &Point, memo: &mut HashMap<usize, f64>) -> Result<f64> {
    if let Some(v) = memo.get(&e.ptr_id()) {
        return Ok(*v);
    }
    let v = match e.node() {
        Node::Num(n) => n.value(),
        Node::Var(name) => p.coord(name).ok_or_else(|| Error::Unassigned(name.to_string()))?,
        Node::Param(name) => p.param(name).ok_or_else(|| Error::Unassigned(name.to_string()))?,
        Node::Unary(op, a) => apply_unary(*op, eval_walk(a, p, memo)?)?,
        Node::Binary(op, a, b) => {
            let x = eval_walk(a, p, memo)?;
            let y = eval_walk(b, p, memo)?;
            apply_binary(*op, x, y)?
        }
    };
    memo.insert(e.ptr_id(), v);
    Ok(v)
}

#[derive(Debug, Clone)]
enum Instr {
    Input(usize),
    Const(f64),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
}

/// A batch of expressions compiled to straight-line code.
///
/// Structurally equal subtrees are computed once. Inputs are addressed by
/// slot: variables first, in the order given at compile time, then
/// parameters.
#[derive(Debug, Clone)]
pub struct Program {
    instrs: Vec<Instr>,
    outputs: Vec<usize>,
    n_inputs: usize,
}

impl Program {
    pub fn compile(exprs: &[Expr], vars: &[String], params: &[String]) -> Result<Program> {
        let mut slots: HashMap<(bool, &str), usize> = HashMap::new();
        for (i, v) in vars.iter().enumerate() {
            slots.insert((false, v.as_str()), i);
        }
        for (i, p) in params.iter().enumerate() {
            slots.insert((true, p.as_str()), vars.len() + i);
        }
        let mut builder = Builder {
            slots,
            instrs: Vec::new(),
            memo: HashMap::new(),
        };
        let outputs = exprs.iter().map(|e| builder.emit(e)).collect::<Result<Vec<_>>>()?;
        Ok(Program {
            instrs: builder.instrs,
            outputs,
            n_inputs: vars.len() + params.len(),
        })
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    /// Evaluates every output. `inputs` holds variables then parameters.
    pub fn eval(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval_scaled(inputs)?.0)
    }

    /// Evaluates every output and also returns the largest magnitude of
    /// any intermediate value.
    pub fn eval_scaled(&self, inputs: &[f64]) -> Result<(Vec<f64>, f64)> {
        debug_assert_eq!(inputs.len(), self.n_inputs);
        let mut regs = Vec::with_capacity(self.instrs.len());
        let mut scale = 0.0f64;
        for ins in &self.instrs {
            let v = match *ins {
                Instr::Input(s) => inputs[s],
                Instr::Const(c) => c,
                Instr::Unary(op, a) => apply_unary(op, regs[a])?,
                Instr::Binary(op, a, b) => apply_binary(op, regs[a], regs[b])?,
            };
            scale = scale.max(v.abs());
            regs.push(v);
        }
        Ok((self.outputs.iter().map(|&i| regs[i]).collect(), scale))
    }
}

struct Builder<'a> {
    slots: HashMap<(bool, &'a str), usize>,
    instrs: Vec<Instr>,
    memo: HashMap<Expr, usize>,
}

impl Builder<'_> {
    fn emit(&mut self, e: &Expr) -> Result<usize> {
        if let Some(&i) = self.memo.get(e) {
            return Ok(i);
        }
        let ins = match e.node() {
            Node::Num(n) => Instr::Const(n.value()),
            Node::Var(name) => Instr::Input(
                *self
                    .slots
                    .get(&(false, &**name))
                    .ok_or_else(|| Error::UnknownName(name.to_string()))?,
            ),
            Node::Param(name) => Instr::Input(
                *self
                    .slots
                    .get(&(true, &**name))
                    .ok_or_else(|| Error::UnknownName(name.to_string()))?,
            ),
            Node::Unary(op, a) => {
                let a = self.emit(a)?;
                Instr::Unary(*op, a)
            }
            Node::Binary(op, a, b) => {
                let a = self.emit(a)?;
                let b = self.emit(b)?;
                Instr::Binary(*op, a, b)
            }
        };
        self.instrs.push(ins);
        let idx = self.instrs.len() - 1;
        self.memo.insert(e.clone(), idx);
        Ok(idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Names};

    fn names() -> Names {
        Names::new(["x", "y"], ["Lambda"])
    }

    #[test]
    fn cot_at_half_pi_is_zero() {
        let e = parse("cot(x)", &names()).unwrap();
        let p = Point::new([("x", std::f64::consts::FRAC_PI_2)]);
        assert!(evaluate(&e, &p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn killing_family_member_solves_hyperbolic_equation() {
        // x^2 d_x^2 (1/x) - 2/x vanishes identically
        let f = parse("1/x", &names()).unwrap();
        let fxx = f.derivative("x").derivative("x");
        let e = Expr::var("x").powi(2) * fxx - 2 * f;
        for x in [0.3, 0.9, 1.7, 5.0] {
            let v = evaluate(&e, &Point::new([("x", x)])).unwrap();
            assert!(v.abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn domain_errors() {
        let n = names();
        let p = Point::new([("x", -1.0), ("y", 0.0)]);
        for (src, op) in [
            ("ln(x)", "ln"),
            ("sqrt(x)", "sqrt"),
            ("1/y", "/"),
            ("arccos(2*x)", "arccos"),
        ] {
            let e = parse(src, &n).unwrap();
            match evaluate(&e, &p) {
                Err(Error::Domain { op: o, .. }) => assert_eq!(o, op, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
        let e = parse("x^(1/3)", &n).unwrap();
        assert!(evaluate(&e, &p).is_err());
    }

    #[test]
    fn unassigned_names_are_reported() {
        let e = parse("x + Lambda", &names()).unwrap();
        let p = Point::new([("x", 1.0)]);
        assert_eq!(evaluate(&e, &p), Err(Error::Unassigned("Lambda".into())));
    }

    #[test]
    fn program_matches_tree_walk_and_shares_subterms() {
        let n = names();
        let a = parse("sin(x*y)^2 + Lambda*exp(x)", &n).unwrap();
        let b = parse("sin(x*y)^2 - ln(y)", &n).unwrap();
        let vars = vec!["x".to_string(), "y".to_string()];
        let params = vec!["Lambda".to_string()];
        let prog = Program::compile(&[a.clone(), b.clone()], &vars, &params).unwrap();
        let p = Point::new([("x", 0.4), ("y", 1.3)]).with_param("Lambda", -2.0);
        let out = prog.eval(&[0.4, 1.3, -2.0]).unwrap();
        assert_eq!(out[0], evaluate(&a, &p).unwrap());
        assert_eq!(out[1], evaluate(&b, &p).unwrap());
        // sin(x*y)^2 is emitted once
        assert!(prog.instrs.len() < a.size() + b.size());
    }

    #[test]
    fn compile_rejects_unknown_names() {
        let e = parse("x + y", &names()).unwrap();
        let err = Program::compile(&[e], &["x".into()], &[]).unwrap_err();
        assert_eq!(err, Error::UnknownName("y".into()));
    }
}

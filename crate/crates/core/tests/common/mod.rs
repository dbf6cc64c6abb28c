#![allow(dead_code)]

use walker_verify::chart::{LAMBDA, WALKER_COORDS};
use walker_verify::domain::Point;
use walker_verify::expr::{evaluate, parse, Expr, Names};
use walker_verify::Result;

pub fn expr(s: &str) -> Expr {
    parse(s, &Names::new(WALKER_COORDS, [LAMBDA])).expect("test expression parses")
}

/// Central difference `(g(t+h) − g(t−h)) / 2h` with one Richardson step.
pub fn richardson(g: impl Fn(f64) -> Result<f64>, t: f64, h: f64) -> Result<f64> {
    let d = |h: f64| -> Result<f64> { Ok((g(t + h)? - g(t - h)?) / (2.0 * h)) };
    let (coarse, fine) = (d(h)?, d(h / 2.0)?);
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Finite-difference derivative of `e` in `var` at `p`.
pub fn fd_derivative(e: &Expr, var: &str, p: &Point, h: f64) -> Result<f64> {
    let t = p.coord(var).unwrap_or(0.0);
    richardson(
        |s| {
            let mut q = p.clone();
            q.set_coord(var, s);
            evaluate(e, &q)
        },
        t,
        h,
    )
}

/// Relative gap between a symbolic derivative and its finite-difference
/// estimate, scaled by the larger of the two and the function value.
pub fn derivative_gap(e: &Expr, var: &str, p: &Point) -> Result<f64> {
    let symbolic = evaluate(&e.derivative(var), p)?;
    let numeric = fd_derivative(e, var, p, 1e-5)?;
    let scale = 1f64.max(numeric.abs()).max(evaluate(e, p)?.abs());
    Ok((symbolic - numeric).abs() / scale)
}

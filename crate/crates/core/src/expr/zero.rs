use serde::Serialize;

use super::{Expr, Program};
use crate::domain::{DomainBox, Params, Point, Sampler, Worst};
use crate::error::Result;

/// Outcome of a sampled identity test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroTest {
    pub holds: bool,
    /// Largest scale-relative residual seen.
    pub max_residual: f64,
    /// Worst point when the identity fails.
    pub witness: Option<Worst>,
}

/// Decides whether `e` vanishes on `domain` by evaluating it at seeded
/// points. The residual at a point is `|e| / (1 + m)` where `m` is the
/// largest magnitude of any subterm there, so roundoff in large
/// intermediate terms does not register as a failure.
pub fn is_zero_sampled(e: &Expr, domain: &DomainBox, params: &Params, sampler: &Sampler, tol: f64) -> Result<ZeroTest> {
    let vars: Vec<String> = e.variables().into_iter().collect();
    let pnames: Vec<String> = e.parameters().into_iter().collect();
    let prog = Program::compile(std::slice::from_ref(e), &vars, &pnames)?;
    let residuals = sampler.map(domain, params, |p: &Point| {
        let (out, scale) = prog.eval_scaled(&p.slots(&vars, &pnames)?)?;
        Ok((out[0].abs() / (1.0 + scale), p.clone()))
    })?;
    let worst = Worst::of(residuals).expect("sampler yields at least one point");
    let holds = worst.value <= tol;
    Ok(ZeroTest {
        holds,
        max_residual: worst.value,
        witness: (!holds).then_some(worst),
    })
}

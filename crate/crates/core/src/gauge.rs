//! Coordinate changes preserving the Walker form: the v-shift removing `H₁`,
//! closed-form maps and the flow that removes `A`.

use std::sync::Arc;

use serde::Serialize;

use crate::chart::{curvature_at, with_lambda, MetricTensor, LAMBDA, U, V, WALKER_COORDS, X, Y};
use crate::classify::{t_from_lowered, t_of_bundle, Classifier, PetrovType};
use crate::domain::{DomainBox, Params, Point, Sampler};
use crate::error::{Error, Result};
use crate::expr::{Expr, Program};
use crate::killing::raise;
use crate::linalg::Mat;
use crate::ode::{self, Settings};
use crate::walker::{EinsteinAnsatz, WalkerMetric};

/// Removes `H₁` by `v = ṽ − H₁/(2Λ)`:
///
/// * `A_i ← A_i − ∂_i H₁ / (2Λ)`
/// * `H₀ ← H₀ − H₁²/(4Λ) − ∂_u H₁ / Λ`
pub fn vshift_remove_h1(w: &WalkerMetric, lambda: f64) -> Result<WalkerMetric> {
    if lambda == 0.0 {
        return Err(Error::Precondition("the v-shift needs Lambda != 0".into()));
    }
    let lam = Expr::param(LAMBDA);
    let h1 = &w.ansatz.h1;
    let a = [
        &w.a[0] - h1.derivative("x") / (2 * &lam),
        &w.a[1] - h1.derivative("y") / (2 * &lam),
    ];
    let h0 = &w.ansatz.h0 - h1.powi(2) / (4 * &lam) - h1.derivative("u") / &lam;
    Ok(WalkerMetric::new(w.h.clone(), a, EinsteinAnsatz::reduced(h0))?.with_domain(w.domain().clone()))
}

/// The v-shift as a closed-form map `(ṽ, x, y, u) ↦ (ṽ − H₁/(2Λ), x, y, u)`.
pub fn vshift_transform(w: &WalkerMetric) -> Result<ClosedFormTransform> {
    let [v, x, y, u] = WALKER_COORDS.map(Expr::var);
    let shift = &w.ansatz.h1 / (2 * Expr::param(LAMBDA));
    ClosedFormTransform::new([v - shift, x, y, u], Direction::NewToOld)
}

/// Which way a closed-form map points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Old coordinates as functions of new ones; usable for pullbacks.
    NewToOld,
    /// New coordinates as functions of old ones.
    OldToNew,
}

/// A map of the Walker chart given by four expressions in `(v, x, y, u)`.
///
/// Only maps of the shape `v ↦ v + f(x, y, u)`, `(x, y) ↦ φ(x, y, u)`,
/// `u ↦ u + c` are accepted.
#[derive(Debug, Clone)]
pub struct ClosedFormTransform {
    pub map: [Expr; 4],
    pub direction: Direction,
    program: Arc<Program>,
    params: Vec<String>,
}

impl ClosedFormTransform {
    pub fn new(map: [Expr; 4], direction: Direction) -> Result<Self> {
        for (i, e) in map.iter().enumerate().skip(1) {
            if e.depends_on("v") {
                return Err(Error::Invalid(format!("component {} depends on v", WALKER_COORDS[i])));
            }
        }
        if map[V].derivative("v").constant_value() != Some(1.0) {
            return Err(Error::Invalid(
                "v component must be v plus a function of (x, y, u)".into(),
            ));
        }
        if ["x", "y"].iter().any(|c| map[U].depends_on(c)) || map[U].derivative("u").constant_value() != Some(1.0) {
            return Err(Error::Invalid("u component must be u plus a constant".into()));
        }
        let vars: Vec<String> = WALKER_COORDS.map(String::from).to_vec();
        let mut params: Vec<String> = map.iter().flat_map(|e| e.parameters()).collect();
        params.sort();
        params.dedup();
        let mut outputs = map.to_vec();
        for e in &map {
            outputs.extend(vars.iter().map(|c| e.derivative(c)));
        }
        let program = Arc::new(Program::compile(&outputs, &vars, &params)?);
        Ok(ClosedFormTransform {
            map,
            direction,
            program,
            params,
        })
    }

    /// Image of `p` and the Jacobian `D[c][a] = ∂x^c/∂x̃^a`.
    pub fn jacobian_at(&self, p: &Point) -> Result<(Point, Mat)> {
        let vars: Vec<String> = WALKER_COORDS.map(String::from).to_vec();
        let out = self.program.eval(&p.slots(&vars, &self.params)?)?;
        let image = Point::new(WALKER_COORDS.into_iter().zip(out[..4].iter().copied())).with_params(p.params());
        let d = Mat::from_fn(4, |c, a| out[4 + 4 * c + a]);
        Ok((image, d))
    }

    pub fn apply(&self, p: &Point) -> Result<Point> {
        Ok(self.jacobian_at(p)?.0)
    }
}

/// State of the flow at the end of an integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowState {
    pub x: f64,
    pub y: f64,
    /// `jac[i][j] = ∂x^i(u)/∂x^j(u_start)`
    pub jac: [[f64; 2]; 2],
}

/// The flow of `W^i = −h^{ij}A_j` in `u`. New coordinates label a point by
/// where its `W`-trajectory crosses `u = u₀`; in them `A = 0`.
#[derive(Debug, Clone)]
pub struct FlowTransform {
    pub w: [Expr; 2],
    pub u0: f64,
    domain: DomainBox,
    settings: Settings,
    program: Arc<Program>,
    params: Vec<String>,
}

impl FlowTransform {
    /// Trajectories are stopped when they violate a constraint of `domain`.
    /// Its intervals are ignored: the flow may leave the sampling box.
    pub fn new(w: [Expr; 2], u0: f64, domain: DomainBox) -> Result<Self> {
        if w.iter().any(|e| e.depends_on("v")) {
            return Err(Error::Invalid("flow field must not depend on v".into()));
        }
        let vars: Vec<String> = ["x", "y", "u"].map(String::from).to_vec();
        let mut params: Vec<String> = w.iter().flat_map(|e| e.parameters()).collect();
        for c in domain.constraints() {
            params.extend(c.expr.parameters());
        }
        params.sort();
        params.dedup();
        let outputs = [
            w[0].clone(),
            w[1].clone(),
            w[0].derivative("x"),
            w[0].derivative("y"),
            w[1].derivative("x"),
            w[1].derivative("y"),
        ];
        let program = Arc::new(Program::compile(&outputs, &vars, &params)?);
        Ok(FlowTransform {
            w,
            u0,
            domain,
            settings: Settings::default(),
            program,
            params,
        })
    }

    pub fn from_walker(w: &WalkerMetric, u0: f64) -> Result<Self> {
        let up = raise(&w.h, &w.a);
        Self::new([-&up[0], -&up[1]], u0, w.domain().clone())
    }

    pub fn with_settings(mut self, settings: Settings) -> Self {
        self.settings = settings;
        self
    }

    fn eval(&self, x: f64, y: f64, u: f64, params: &Params) -> Result<Vec<f64>> {
        let p = Point::new([("x", x), ("y", y), ("u", u)]).with_params(params);
        if let Some(c) = self.domain.violated(&p) {
            return Err(Error::DomainExit {
                u,
                msg: format!("constraint {} violated at (x, y) = ({x}, {y})", c.name),
            });
        }
        let mut slots = vec![x, y, u];
        for name in &self.params {
            slots.push(*params.get(name).ok_or_else(|| Error::Unassigned(name.clone()))?);
        }
        self.program.eval(&slots).map_err(|e| match e {
            Error::Domain { op, arg } => Error::DomainExit {
                u,
                msg: format!("{op} undefined at {arg}"),
            },
            e => e,
        })
    }

    /// Flows `(x, y)` from `u_start` to `u_end`, carrying the variational
    /// Jacobian `dJ/du = (∂W/∂x) J`.
    pub fn integrate(&self, x: f64, y: f64, u_start: f64, u_end: f64, params: &Params) -> Result<FlowState> {
        let rhs = |u: f64, s: &[f64]| {
            let o = self.eval(s[0], s[1], u, params)?;
            let (j00, j01, j10, j11) = (s[2], s[3], s[4], s[5]);
            Ok(vec![
                o[0],
                o[1],
                o[2] * j00 + o[3] * j10,
                o[2] * j01 + o[3] * j11,
                o[4] * j00 + o[5] * j10,
                o[4] * j01 + o[5] * j11,
            ])
        };
        let s = ode::integrate(rhs, u_start, &[x, y, 1.0, 0.0, 0.0, 1.0], u_end, &self.settings)?;
        Ok(FlowState {
            x: s[0],
            y: s[1],
            jac: [[s[2], s[3]], [s[4], s[5]]],
        })
    }

    /// Old `(x, y)` of the point with new coordinates `(x̃, ỹ, ũ)`.
    pub fn integrate_flow(&self, x: f64, y: f64, u: f64, params: &Params) -> Result<FlowState> {
        self.integrate(x, y, self.u0, u, params)
    }

    /// Image of `p` and the Jacobian: `∂x/∂x̃ = J`, `∂x^i/∂ũ = W^i`.
    pub fn jacobian_at(&self, p: &Point) -> Result<(Point, Mat)> {
        let c = |n: &str| p.coord(n).ok_or_else(|| Error::Unassigned(n.to_string()));
        let (v, x, y, u) = (c("v")?, c("x")?, c("y")?, c("u")?);
        let s = self.integrate_flow(x, y, u, p.params())?;
        let w = self.eval(s.x, s.y, u, p.params())?;
        let mut d = Mat::identity(4);
        for (i, row) in [X, Y].into_iter().enumerate() {
            d[(row, X)] = s.jac[i][0];
            d[(row, Y)] = s.jac[i][1];
            d[(row, U)] = w[i];
        }
        let image = Point::new(WALKER_COORDS.into_iter().zip([v, s.x, s.y, u])).with_params(p.params());
        Ok((image, d))
    }
}

#[derive(Debug, Clone)]
pub enum Transform {
    Closed(ClosedFormTransform),
    Flow(FlowTransform),
}

impl Transform {
    pub fn jacobian_at(&self, p: &Point) -> Result<(Point, Mat)> {
        match self {
            Transform::Closed(t) => {
                if t.direction != Direction::NewToOld {
                    return Err(Error::Precondition("pullback needs the new-to-old map".into()));
                }
                t.jacobian_at(p)
            }
            Transform::Flow(t) => t.jacobian_at(p),
        }
    }
}

/// `g̃ = Dᵀ g D` at the new-chart point `p`.
pub fn pullback_at(g: &MetricTensor, t: &Transform, p: &Point) -> Result<Mat> {
    let (image, d) = t.jacobian_at(p)?;
    Ok(congruence(&g.metric_at(&image)?, &d))
}

fn congruence(m: &Mat, d: &Mat) -> Mat {
    d.transpose().mul(m).mul(d)
}

/// Outcome of comparing two families `h(u)` that agree at `u₀`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyComparison {
    pub u0: f64,
    pub identical: bool,
    pub max_gap: f64,
    /// First sampled point, in index order, whose gap exceeds the tolerance.
    pub witness: Option<Point>,
}

fn family_gap(h1: &Program, h2: &Program, slots: &[f64]) -> Result<f64> {
    let (a, b) = (h1.eval(slots)?, h2.eval(slots)?);
    let scale = a.iter().chain(&b).fold(0.0, |m: f64, v| m.max(v.abs()));
    let gap = a.iter().zip(&b).fold(0.0, |m: f64, (p, q)| m.max((p - q).abs()));
    Ok(gap / (1.0 + scale))
}

/// Compares the families `h₁(u)` and `h₂(u)` on samples of `domain`. They
/// must agree at `u = u₀`; a Walker metric with `A = 0` is determined by
/// its family once the initial slice is fixed, so any later difference
/// separates the two.
pub fn family_isometry_test(
    h1: &[Expr; 3],
    h2: &[Expr; 3],
    u0: f64,
    domain: &DomainBox,
    params: &Params,
    sampler: &Sampler,
    tol: f64,
) -> Result<FamilyComparison> {
    let vars: Vec<String> = ["x", "y", "u"].map(String::from).to_vec();
    let names: Vec<String> = params.keys().cloned().collect();
    let p1 = Program::compile(h1, &vars, &names)?;
    let p2 = Program::compile(h2, &vars, &names)?;
    let initial = domain.clone().with_interval("u", u0, u0);
    let start = sampler.map(&initial, params, |p| family_gap(&p1, &p2, &p.slots(&vars, &names)?))?;
    if start.iter().any(|g| *g > tol) {
        return Err(Error::Precondition("initial metrics differ, align first".into()));
    }
    let rows = sampler.map(domain, params, |p| {
        Ok((family_gap(&p1, &p2, &p.slots(&vars, &names)?)?, p.clone()))
    })?;
    let max_gap = rows.iter().fold(0.0, |m: f64, r| m.max(r.0));
    let witness = rows.into_iter().find(|r| r.0 > tol).map(|r| r.1);
    Ok(FamilyComparison {
        u0,
        identical: witness.is_none(),
        max_gap,
        witness,
    })
}

/// Curvature data of a source metric pulled back to the new chart, against
/// the same data computed directly from the target metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub point: Point,
    pub image: Point,
    /// Scale-relative `|Dᵀ g D − g̃|`.
    pub metric_gap: f64,
    /// Scale-relative `|Dᵀ Ric D − Ric̃|`.
    pub ricci_gap: f64,
    pub einstein_source: f64,
    pub einstein_target: f64,
    pub det_source: f64,
    pub det_target: f64,
    /// `|det_source − det_target| / (1 + max|det|)`
    pub det_gap: f64,
    pub petrov_source: PetrovType,
    pub petrov_target: PetrovType,
}

impl InvarianceReport {
    pub fn max_gap(&self) -> f64 {
        self.metric_gap
            .max(self.ricci_gap)
            .max(self.det_gap)
            .max((self.einstein_source - self.einstein_target).abs())
    }
}

/// Pulls the source curvature back along `t` to the new-chart point `p` and
/// compares it with `target`.
pub fn invariance_at(
    source: &MetricTensor,
    target: &Classifier,
    t: &Transform,
    lambda: f64,
    p: &Point,
) -> Result<InvarianceReport> {
    let p = with_lambda(p, lambda);
    let (image, d) = t.jacobian_at(&p)?;
    let cs = curvature_at(source, &image)?;
    let ct = target.curvature(lambda, &p)?;
    let g = congruence(&cs.g, &d);
    let ric = congruence(&cs.ricci, &d);
    let metric_gap = g.sub(&ct.g).max_abs() / (1.0 + ct.g.max_abs());
    let ricci_gap = ric.sub(&ct.ricci).max_abs() / (1.0 + ct.scale);
    let r = cs.riemann_lower.pullback(&d);
    let m = t_from_lowered(&r, &g)?;
    let det_source = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let det_target = t_of_bundle(&ct)?.det;
    let threshold = target.threshold(lambda, &p);
    let petrov = |det: f64| {
        if det.abs() <= threshold {
            PetrovType::D
        } else {
            PetrovType::II
        }
    };
    Ok(InvarianceReport {
        point: p.clone(),
        image,
        metric_gap,
        ricci_gap,
        einstein_source: cs.einstein_residual(lambda).relative,
        einstein_target: ct.einstein_residual(lambda).relative,
        det_source,
        det_target,
        det_gap: (det_source - det_target).abs() / (1.0 + det_source.abs().max(det_target.abs())),
        petrov_source: petrov(det_source),
        petrov_target: petrov(det_target),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::max_residual;
    use crate::expr::{parse, Names};
    use crate::walker::walker_point;

    fn e(s: &str) -> Expr {
        parse(s, &Names::new(WALKER_COORDS, [LAMBDA])).unwrap()
    }

    fn hyperbolic_box() -> DomainBox {
        DomainBox::new()
            .with_interval("v", -1.0, 1.0)
            .with_interval("x", 0.3, 2.0)
            .with_interval("y", -1.0, 1.0)
            .with_interval("u", -0.5, 0.5)
    }

    fn lam(l: f64) -> Params {
        Params::from([(LAMBDA.to_string(), l)])
    }

    /// Hyperbolic background with `A = (0, 2x)`, `H₀ = −Λx⁴`.
    fn sheared() -> WalkerMetric {
        let c = e("1/(-Lambda*x^2)");
        WalkerMetric::new(
            [c.clone(), e("0"), c],
            [e("0"), e("2*x")],
            EinsteinAnsatz::reduced(e("-Lambda*x^4")),
        )
        .unwrap()
        .with_domain(hyperbolic_box())
    }

    /// The same metric after `y = ỹ + 2Λux³`.
    fn straightened() -> WalkerMetric {
        WalkerMetric::new(
            [
                e("(36*Lambda^2*u^2*x^4 + 1)/(-Lambda*x^2)"),
                e("6*Lambda*u*x^2/(-Lambda*x^2)"),
                e("1/(-Lambda*x^2)"),
            ],
            [e("0"), e("0")],
            EinsteinAnsatz::reduced(e("3*Lambda*x^4")),
        )
        .unwrap()
        .with_domain(hyperbolic_box())
    }

    fn closed() -> ClosedFormTransform {
        ClosedFormTransform::new([e("v"), e("x"), e("y + 2*Lambda*u*x^3"), e("u")], Direction::NewToOld).unwrap()
    }

    #[test]
    fn vshift_matches_pullback() {
        let w = WalkerMetric::new(
            [e("1/Lambda"), e("0"), e("sin(x)^2/Lambda")],
            [e("0"), e("0")],
            EinsteinAnsatz::new(e("x*y + u*cos(x)"), e("y^2 - u")),
        )
        .unwrap();
        let shifted = vshift_remove_h1(&w, 1.3).unwrap();
        assert!(!shifted.has_h1());
        let t = Transform::Closed(vshift_transform(&w).unwrap());
        let g = w.assemble().unwrap();
        let gs = shifted.assemble().unwrap();
        for p in [walker_point(0.2, 0.9, -0.3, 0.4), walker_point(-0.7, 2.1, 0.5, -0.2)] {
            let p = p.with_param(LAMBDA, 1.3);
            let pulled = pullback_at(&g, &t, &p).unwrap();
            let direct = gs.metric_at(&p).unwrap();
            assert!(pulled.sub(&direct).max_abs() < 1e-12, "{pulled:?} vs {direct:?}");
        }
    }

    #[test]
    fn vshift_needs_lambda() {
        assert!(matches!(vshift_remove_h1(&sheared(), 0.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn closed_form_shape_is_checked() {
        assert!(ClosedFormTransform::new([e("2*v"), e("x"), e("y"), e("u")], Direction::NewToOld).is_err());
        assert!(ClosedFormTransform::new([e("v"), e("x + v"), e("y"), e("u")], Direction::NewToOld).is_err());
        assert!(ClosedFormTransform::new([e("v"), e("x"), e("y"), e("u + x")], Direction::NewToOld).is_err());
        assert!(ClosedFormTransform::new([e("v + x*u"), e("x"), e("y"), e("u + 1")], Direction::NewToOld).is_ok());
        let fwd = ClosedFormTransform::new([e("v"), e("x"), e("y"), e("u")], Direction::OldToNew).unwrap();
        let g = sheared().assemble().unwrap();
        let p = walker_point(0.0, 1.0, 0.0, 0.0).with_param(LAMBDA, -1.0);
        assert!(matches!(
            pullback_at(&g, &Transform::Closed(fwd), &p),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn closed_form_pullback_straightens() {
        let g = sheared().assemble().unwrap();
        let target = straightened().assemble().unwrap();
        let t = Transform::Closed(closed());
        for p in [walker_point(0.3, 0.8, 0.2, 0.4), walker_point(-0.5, 1.7, -0.9, -0.3)] {
            let p = p.with_param(LAMBDA, -1.5);
            let gap = pullback_at(&g, &t, &p)
                .unwrap()
                .sub(&target.metric_at(&p).unwrap())
                .max_abs();
            assert!(gap < 1e-12, "{gap}");
        }
        let s = Sampler::new(100, 1);
        assert!(max_residual(&target, -1.5, target.chart().domain(), &s).unwrap().value < 1e-10);
    }

    #[test]
    fn flow_agrees_with_closed_form() {
        let f = FlowTransform::from_walker(&sheared(), 0.0).unwrap();
        let c = closed();
        for (x, y, u) in [(0.5, 0.1, 0.4), (1.8, -0.7, -0.5), (1.1, 0.0, 0.25)] {
            let p = walker_point(0.1, x, y, u).with_param(LAMBDA, -1.0);
            let (fi, fd) = f.jacobian_at(&p).unwrap();
            let (ci, cd) = c.jacobian_at(&p).unwrap();
            assert!((fi.coord("y").unwrap() - ci.coord("y").unwrap()).abs() < 1e-8);
            assert!(fd.sub(&cd).max_abs() < 1e-8, "{fd:?} vs {cd:?}");
        }
    }

    #[test]
    fn flow_round_trip() {
        let f = FlowTransform::from_walker(&sheared(), 0.0).unwrap();
        let params = lam(-1.0);
        let fwd = f.integrate(0.9, 0.3, 0.0, 0.45, &params).unwrap();
        let back = f.integrate(fwd.x, fwd.y, 0.45, 0.0, &params).unwrap();
        assert!((back.x - 0.9).abs() < 1e-8 && (back.y - 0.3).abs() < 1e-8);
        let m = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| Mat::from_fn(2, |i, j| (0..2).map(|k| a[i][k] * b[k][j]).sum());
        let prod = m(back.jac, fwd.jac);
        assert!(prod.sub(&Mat::identity(2)).max_abs() < 1e-7);
    }

    #[test]
    fn flow_stops_at_constraints() {
        let dom = hyperbolic_box().with_constraint("x < 1", e("1 - x"), 0.0);
        let f = FlowTransform::new([e("1"), e("0")], 0.0, dom).unwrap();
        let r = f.integrate(0.5, 0.0, 0.0, 1.0, &lam(-1.0));
        assert!(
            matches!(r, Err(Error::DomainExit { u, .. }) if u > 0.3 && u < 0.6),
            "{r:?}"
        );
    }

    #[test]
    fn invariance_under_flow() {
        let f = Transform::Flow(FlowTransform::from_walker(&sheared(), 0.0).unwrap());
        let target = Classifier::new(&straightened()).unwrap();
        let source = sheared().assemble().unwrap();
        for p in [walker_point(0.4, 0.7, 0.2, 0.3), walker_point(0.0, 1.2, -0.5, -0.4)] {
            let r = invariance_at(&source, &target, &f, -1.0, &p).unwrap();
            assert!(r.max_gap() < 1e-6, "{r:?}");
            assert_eq!(r.petrov_source, r.petrov_target);
        }
    }

    #[test]
    fn families_that_separate() {
        let s = straightened();
        let other = [e("1/(-Lambda*x^2)"), e("0"), e("(1 + u^2)/(-Lambda*x^2)")];
        let b = hyperbolic_box();
        let r = family_isometry_test(&s.h, &other, 0.0, &b, &lam(-1.0), &Sampler::new(50, 4), 1e-8).unwrap();
        assert!(!r.identical && r.witness.is_some());
        let r = family_isometry_test(&s.h, &s.h, 0.0, &b, &lam(-1.0), &Sampler::new(50, 4), 1e-8).unwrap();
        assert!(r.identical && r.max_gap == 0.0);
        let shifted = [e("2/(-Lambda*x^2)"), e("0"), e("1/(-Lambda*x^2)")];
        assert!(matches!(
            family_isometry_test(&s.h, &shifted, 0.0, &b, &lam(-1.0), &Sampler::new(50, 4), 1e-8),
            Err(Error::Precondition(_))
        ));
    }
}

//! Walker metrics `g = 2dvdu + h + 2A du + H du²` and their reductions.

mod complex;

pub use complex::{lewandowski_a, lewandowski_a_for, lewandowski_h, lewandowski_l, ComplexExpr};

use serde::Serialize;

use crate::chart::{curvature_at, with_lambda, Chart, MetricTensor, LAMBDA, WALKER_COORDS};
use crate::domain::{DomainBox, Params, Point, Sampler, Worst};
use crate::error::{Error, Result};
use crate::expr::{Expr, Program};
use crate::killing::{killing_oneform_check, OneFormCheck};

/// `H = Λv² + H₁v + H₀` with `H₀, H₁` independent of `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct EinsteinAnsatz {
    pub h1: Expr,
    pub h0: Expr,
}

impl EinsteinAnsatz {
    pub fn new(h1: Expr, h0: Expr) -> Self {
        EinsteinAnsatz { h1, h0 }
    }

    /// `H₁ = 0`.
    pub fn reduced(h0: Expr) -> Self {
        EinsteinAnsatz::new(Expr::zero(), h0)
    }

    pub fn h(&self) -> Expr {
        let v = Expr::var("v");
        Expr::param(LAMBDA) * v.powi(2) + &self.h1 * &v + &self.h0
    }
}

/// The data `(h, A, H)` of a Walker metric. `h` is stored as
/// `[h_xx, h_xy, h_yy]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerMetric {
    pub h: [Expr; 3],
    pub a: [Expr; 2],
    pub ansatz: EinsteinAnsatz,
    domain: DomainBox,
}

impl WalkerMetric {
    pub fn new(h: [Expr; 3], a: [Expr; 2], ansatz: EinsteinAnsatz) -> Result<Self> {
        let named = [
            ("h_xx", &h[0]),
            ("h_xy", &h[1]),
            ("h_yy", &h[2]),
            ("A_x", &a[0]),
            ("A_y", &a[1]),
            ("H1", &ansatz.h1),
            ("H0", &ansatz.h0),
        ];
        for (name, e) in named {
            if e.depends_on("v") {
                return Err(Error::Invalid(format!("{name} must not depend on v")));
            }
        }
        Ok(WalkerMetric {
            h,
            a,
            ansatz,
            domain: DomainBox::new(),
        })
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Self {
        self.domain = domain;
        self
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    /// `h_ij` for `i, j ∈ {0, 1}` (x, y).
    pub fn h_ij(&self, i: usize, j: usize) -> &Expr {
        &self.h[i + j]
    }

    pub fn hfun(&self) -> Expr {
        self.ansatz.h()
    }

    pub fn has_a(&self) -> bool {
        !(self.a[0].is_zero() && self.a[1].is_zero())
    }

    pub fn has_h1(&self) -> bool {
        !self.ansatz.h1.is_zero()
    }

    /// The 4-metric in `(v, x, y, u)`.
    pub fn assemble(&self) -> Result<MetricTensor> {
        let z = Expr::zero;
        let one = Expr::one;
        let [hxx, hxy, hyy] = self.h.clone();
        let [ax, ay] = self.a.clone();
        let rows = vec![
            vec![z(), z(), z(), one()],
            vec![z(), hxx, hxy.clone(), ax.clone()],
            vec![z(), hxy, hyy, ay.clone()],
            vec![one(), ax, ay, self.hfun()],
        ];
        MetricTensor::new(Chart::walker(self.domain.clone()), rows)
    }

    /// `h` on the `(x, y)` chart at fixed `u`.
    pub fn surface(&self) -> Result<MetricTensor> {
        let [hxx, hxy, hyy] = self.h.clone();
        MetricTensor::new(
            Chart::surface(self.domain.clone()),
            vec![vec![hxx, hxy.clone()], vec![hxy, hyy]],
        )
    }

    /// Worst over samples of `min(h_xx, det h)`; positive iff `h` was
    /// positive-definite everywhere sampled.
    pub fn positivity_margin(&self, params: &Params, sampler: &Sampler) -> Result<f64> {
        let vars: Vec<String> = ["x", "y", "u"].map(String::from).to_vec();
        let pnames: Vec<String> = params.keys().cloned().collect();
        let prog = Program::compile(&self.h, &vars, &pnames)?;
        let mins = sampler.map(&self.domain, params, |p| {
            let h = prog.eval(&p.slots(&vars, &pnames)?)?;
            Ok(h[0].min(h[0] * h[2] - h[1] * h[1]))
        })?;
        Ok(mins.into_iter().fold(f64::INFINITY, f64::min))
    }
}

/// Maxima of the four reduced-system residuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedResiduals {
    /// `Δ_h H₀ + ½h^{ij}ḧ_ij`
    pub poisson: f64,
    /// `∇^j ḣ_ij` for `i = x, y`
    pub divergence: [f64; 2],
    /// `h^{ij}ḣ_ij`
    pub trace: f64,
    /// `Ric(h) − Λh`
    pub einstein: f64,
}

impl ReducedResiduals {
    pub fn max(&self) -> f64 {
        [
            self.poisson,
            self.divergence[0],
            self.divergence[1],
            self.trace,
            self.einstein,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [
            self.poisson,
            self.divergence[0].max(self.divergence[1]),
            self.trace,
            self.einstein,
        ]
    }
}

/// Evaluates the reduced Einstein system for a metric with `A = 0` and
/// `H₁ = 0`. Each residual is scale-relative: divided by one plus the sum of
/// the magnitudes of its terms.
pub fn reduced_system_residuals(w: &WalkerMetric, lambda: f64, sampler: &Sampler) -> Result<ReducedResiduals> {
    if w.has_a() {
        return Err(Error::Gauge(
            "A must vanish; remove it with a flow transform first".into(),
        ));
    }
    if w.has_h1() {
        return Err(Error::Gauge("H1 must vanish; apply the v-shift first".into()));
    }
    let surface = w.surface()?;
    let dot: Vec<Expr> = w.h.iter().map(|e| e.derivative("u")).collect();
    let mut outputs = dot.clone();
    outputs.extend(dot.iter().map(|e| e.derivative("u")));
    outputs.extend(dot.iter().map(|e| e.derivative("x")));
    outputs.extend(dot.iter().map(|e| e.derivative("y")));
    let h0 = &w.ansatz.h0;
    let (h0x, h0y) = (h0.derivative("x"), h0.derivative("y"));
    outputs.extend([h0x.derivative("x"), h0x.derivative("y"), h0y.derivative("y"), h0x, h0y]);
    let vars: Vec<String> = ["x", "y", "u"].map(String::from).to_vec();
    let pnames = vec![LAMBDA.to_string()];
    let prog = Program::compile(&outputs, &vars, &pnames)?;
    let params = Params::from([(LAMBDA.to_string(), lambda)]);

    let rows = sampler.map(&w.domain, &params, |p| {
        let p = with_lambda(p, lambda);
        let c = curvature_at(&surface, &p)?;
        let o = prog.eval(&p.slots(&vars, &pnames)?)?;
        let sym = |base: usize, i: usize, j: usize| o[base + i + j];
        let hd = |i, j| sym(0, i, j);
        let hdd = |i, j| sym(3, i, j);
        let dhd = |k: usize, i, j| sym(6 + 3 * k, i, j);
        let hess = |i, j| sym(12, i, j);
        let grad = [o[15], o[16]];
        let hi = &c.g_inv;
        let gam = |k, i, j| c.christoffel.get(k, i, j);

        let (mut poisson, mut poisson_abs) = (0.0, 0.0);
        let (mut trace, mut trace_abs) = (0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                let lap = hi[(i, j)] * hess(i, j);
                let conn: f64 = (0..2).map(|k| hi[(i, j)] * gam(k, i, j) * grad[k]).sum();
                let src = 0.5 * hi[(i, j)] * hdd(i, j);
                poisson += lap - conn + src;
                poisson_abs += lap.abs() + conn.abs() + src.abs();
                let t = hi[(i, j)] * hd(i, j);
                trace += t;
                trace_abs += t.abs();
            }
        }
        let mut divergence = [0.0; 2];
        for (i, out) in divergence.iter_mut().enumerate() {
            let (mut s, mut s_abs) = (0.0, 0.0);
            for j in 0..2 {
                for k in 0..2 {
                    let mut terms = vec![dhd(k, i, j)];
                    for l in 0..2 {
                        terms.push(-gam(l, k, i) * hd(l, j));
                        terms.push(-gam(l, k, j) * hd(i, l));
                    }
                    for t in terms {
                        s += hi[(j, k)] * t;
                        s_abs += (hi[(j, k)] * t).abs();
                    }
                }
            }
            *out = s.abs() / (1.0 + s_abs);
        }
        Ok([
            poisson.abs() / (1.0 + poisson_abs),
            divergence[0],
            divergence[1],
            trace.abs() / (1.0 + trace_abs),
            c.einstein_residual(lambda).relative,
        ])
    })?;
    let col = |k: usize| rows.iter().map(|r| r[k]).fold(0.0, f64::max);
    Ok(ReducedResiduals {
        poisson: col(0),
        divergence: [col(1), col(2)],
        trace: col(3),
        einstein: col(4),
    })
}

/// Sign class of the constant-curvature background.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Signature {
    /// `Λ > 0`
    Sphere,
    /// `Λ < 0`
    Hyperbolic,
}

impl Signature {
    pub fn of(lambda: f64) -> Result<Signature> {
        if lambda > 0.0 {
            Ok(Signature::Sphere)
        } else if lambda < 0.0 {
            Ok(Signature::Hyperbolic)
        } else {
            Err(Error::Precondition("Lambda must be nonzero".into()))
        }
    }

    pub fn lambda_matches(self, lambda: f64) -> bool {
        Signature::of(lambda) == Ok(self)
    }
}

/// A potential `f(x, y, u)` generating the one-form `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialFunction {
    pub f: Expr,
    pub signature: Signature,
}

impl PotentialFunction {
    pub fn new(f: Expr, signature: Signature) -> Result<Self> {
        if f.depends_on("v") {
            return Err(Error::Invalid("f must not depend on v".into()));
        }
        Ok(PotentialFunction { f, signature })
    }

    pub fn sphere(f: Expr) -> Result<Self> {
        Self::new(f, Signature::Sphere)
    }

    pub fn hyperbolic(f: Expr) -> Result<Self> {
        Self::new(f, Signature::Hyperbolic)
    }

    pub fn f_residual(&self) -> Expr {
        match self.signature {
            Signature::Sphere => sphere_f_residual(&self.f),
            Signature::Hyperbolic => hyperbolic_f_residual(&self.f),
        }
    }

    pub fn h0_residual(&self, h0: &Expr) -> Expr {
        match self.signature {
            Signature::Sphere => sphere_h0_residual(&self.f, h0),
            Signature::Hyperbolic => hyperbolic_h0_residual(&self.f, h0),
        }
    }

    /// Like [`Self::h0_residual`] but with the gradient-norm sphere form.
    pub fn h0_residual_gradient_form(&self, h0: &Expr) -> Expr {
        match self.signature {
            Signature::Sphere => sphere_h0_residual_gradient_form(&self.f, h0),
            Signature::Hyperbolic => hyperbolic_h0_residual(&self.f, h0),
        }
    }

    pub fn one_form(&self) -> [Expr; 2] {
        f_to_a(self)
    }

    /// Background `h`, `A = f_to_a(f)` and `H = Λv² + H₀`.
    pub fn walker_metric(&self, h0: Expr) -> Result<WalkerMetric> {
        WalkerMetric::new(
            background_h(self.signature),
            self.one_form(),
            EinsteinAnsatz::reduced(h0),
        )
    }
}

fn x() -> Expr {
    Expr::var("x")
}

fn lambda() -> Expr {
    Expr::param(LAMBDA)
}

/// Constant-curvature `h` with `Ric(h) = Λh`: `(dx² + sin²x dy²)/Λ` for the
/// sphere, `(dx² + dy²)/(−Λx²)` for the hyperbolic plane.
pub fn background_h(signature: Signature) -> [Expr; 3] {
    match signature {
        Signature::Sphere => [1 / lambda(), Expr::zero(), x().sin().powi(2) / lambda()],
        Signature::Hyperbolic => {
            let c = 1 / (-lambda() * x().powi(2));
            [c.clone(), Expr::zero(), c]
        }
    }
}

/// `Δ_{S²}φ = ∂²_x φ + ∂²_y φ / sin²x + cot x ∂_x φ`
pub fn sphere_laplacian(phi: &Expr) -> Expr {
    let fx = phi.derivative("x");
    fx.derivative("x") + phi.derivative("y").derivative("y") / x().sin().powi(2) + x().cot() * fx
}

/// `Δ_{L²}φ = x²(∂²_x φ + ∂²_y φ)`
pub fn hyperbolic_laplacian(phi: &Expr) -> Expr {
    x().powi(2) * (phi.derivative("x").derivative("x") + phi.derivative("y").derivative("y"))
}

/// `Δ_{S²}f + 2f`
pub fn sphere_f_residual(f: &Expr) -> Expr {
    sphere_laplacian(f) + 2 * f
}

/// `Δ_{S²}H₀ − 2Λ(2f² − (∂_x f)² + (∂_y f)²/sin²x)`, as printed.
pub fn sphere_h0_residual(f: &Expr, h0: &Expr) -> Expr {
    let (fx, fy) = (f.derivative("x"), f.derivative("y"));
    let rhs = 2 * lambda() * (2 * f.powi(2) - fx.powi(2) + fy.powi(2) / x().sin().powi(2));
    sphere_laplacian(h0) - rhs
}

/// The same equation with `−(∂_y f)²/sin²x`, i.e. with the full gradient norm
/// `|∇f|²` on the right. This is the form satisfied by `Δ(−Λf²)` and by every
/// pair whose assembled 4-metric is Einstein.
pub fn sphere_h0_residual_gradient_form(f: &Expr, h0: &Expr) -> Expr {
    let (fx, fy) = (f.derivative("x"), f.derivative("y"));
    let rhs = 2 * lambda() * (2 * f.powi(2) - fx.powi(2) - fy.powi(2) / x().sin().powi(2));
    sphere_laplacian(h0) - rhs
}

/// `Δ_{L²}f − 2f`
pub fn hyperbolic_f_residual(f: &Expr) -> Expr {
    hyperbolic_laplacian(f) - 2 * f
}

/// `Δ_{L²}H₀ + 4Λf² + 2Λx²((∂_x f)² + (∂_y f)²)`
pub fn hyperbolic_h0_residual(f: &Expr, h0: &Expr) -> Expr {
    let (fx, fy) = (f.derivative("x"), f.derivative("y"));
    hyperbolic_laplacian(h0) + 4 * lambda() * f.powi(2) + 2 * lambda() * x().powi(2) * (fx.powi(2) + fy.powi(2))
}

/// `A = −(∂_y f / sin x) dx + sin x ∂_x f dy` on the sphere,
/// `A = −∂_y f dx + ∂_x f dy` on the hyperbolic plane.
pub fn f_to_a(pf: &PotentialFunction) -> [Expr; 2] {
    let (fx, fy) = (pf.f.derivative("x"), pf.f.derivative("y"));
    match pf.signature {
        Signature::Sphere => [-(fy / x().sin()), x().sin() * fx],
        Signature::Hyperbolic => [-fy, fx],
    }
}

/// Whether `f_to_a(f)` is a Killing form of the background metric, decided
/// on samples of `domain`.
pub fn killing_family_check(
    pf: &PotentialFunction,
    lambda: f64,
    domain: &DomainBox,
    sampler: &Sampler,
    tol: f64,
) -> Result<OneFormCheck> {
    if !pf.signature.lambda_matches(lambda) {
        return Err(Error::Precondition(format!(
            "Lambda = {lambda} does not match the {:?} signature",
            pf.signature
        )));
    }
    let params = Params::from([(LAMBDA.to_string(), lambda)]);
    killing_oneform_check(
        &background_h(pf.signature),
        &pf.one_form(),
        domain,
        &params,
        sampler,
        tol,
    )
}

/// A point of the Walker chart.
pub fn walker_point(v: f64, x: f64, y: f64, u: f64) -> Point {
    Point::new(WALKER_COORDS.into_iter().zip([v, x, y, u]))
}

/// Worst scale-relative value of `e` over the samples.
pub fn sampled_residual(e: &Expr, domain: &DomainBox, lambda: f64, sampler: &Sampler) -> Result<Worst> {
    let params = Params::from([(LAMBDA.to_string(), lambda)]);
    let t = crate::expr::is_zero_sampled(e, domain, &params, sampler, f64::INFINITY)?;
    Ok(Worst {
        value: t.max_residual,
        point: t.witness.map(|w| w.point).unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::max_residual;
    use crate::expr::{is_zero_sampled, parse, Names};

    fn e(s: &str) -> Expr {
        parse(s, &Names::new(WALKER_COORDS, [LAMBDA])).unwrap()
    }

    fn sphere_box() -> DomainBox {
        DomainBox::new()
            .with_interval("v", -1.0, 1.0)
            .with_interval("x", 0.4, std::f64::consts::PI - 0.4)
            .with_interval("y", -1.0, 1.0)
            .with_interval("u", -0.5, 0.5)
    }

    fn hyperbolic_box() -> DomainBox {
        sphere_box().with_interval("x", 0.3, 2.0)
    }

    fn vanishes(expr: &Expr, b: &DomainBox, lambda: f64) -> bool {
        let params = Params::from([(LAMBDA.to_string(), lambda)]);
        is_zero_sampled(expr, b, &params, &Sampler::new(300, 1), 1e-9)
            .unwrap()
            .holds
    }

    #[test]
    fn assemble_places_components() {
        let w = WalkerMetric::new(
            [e("1"), e("0"), e("1")],
            [e("0"), e("0")],
            EinsteinAnsatz::reduced(e("0")),
        )
        .unwrap();
        let g = w.assemble().unwrap();
        assert_eq!(g.component(0, 3), &Expr::one());
        assert_eq!(g.component(3, 3), &(Expr::param(LAMBDA) * Expr::var("v").powi(2)));
        assert!(g.component(0, 0).is_zero());
    }

    #[test]
    fn v_dependent_data_is_rejected() {
        let r = WalkerMetric::new(
            [e("v"), e("0"), e("1")],
            [e("0"), e("0")],
            EinsteinAnsatz::reduced(e("0")),
        );
        assert!(matches!(r, Err(Error::Invalid(_))));
    }

    #[test]
    fn sphere_reductions() {
        let b = sphere_box();
        assert!(vanishes(&sphere_f_residual(&e("cos(x)")), &b, 1.0));
        assert!(vanishes(&sphere_f_residual(&e("ln(tan(x/2))*cos(x) + 1")), &b, 1.0));
        let f = e("y*cos(x)");
        let h0 = e("Lambda*(-y^2*cos(x)^2 + ln(tan(x/2)))");
        assert!(vanishes(&sphere_f_residual(&f), &b, 1.0));
        assert!(vanishes(&sphere_h0_residual_gradient_form(&f, &h0), &b, 1.0));
        assert!(!vanishes(&sphere_h0_residual(&f, &h0), &b, 1.0));
        assert!(!vanishes(&sphere_f_residual(&e("cos(x)^2")), &b, 1.0));
    }

    #[test]
    fn hyperbolic_reductions() {
        let b = hyperbolic_box();
        assert!(vanishes(&hyperbolic_f_residual(&e("3*x^2")), &b, -1.0));
        let f = e("x^2*y");
        assert!(vanishes(&hyperbolic_f_residual(&f), &b, -1.0));
        assert!(vanishes(&hyperbolic_h0_residual(&f, &e("-Lambda*x^4*y^2")), &b, -1.0));
        assert!(!vanishes(&hyperbolic_h0_residual(&f, &e("-Lambda*x^4*y")), &b, -1.0));
        assert!(!vanishes(&hyperbolic_f_residual(&e("x^3")), &b, -1.0));
    }

    #[test]
    fn residuals_are_linear_in_f() {
        let b = sphere_box();
        let (f1, f2) = (e("cos(x)^2*y"), e("sin(x)*exp(y)"));
        let lhs = sphere_f_residual(&(&f1 + &f2));
        let rhs = sphere_f_residual(&f1) + sphere_f_residual(&f2);
        assert!(vanishes(&(lhs - rhs), &b, 1.0));
    }

    #[test]
    fn one_forms_from_potentials() {
        let a = f_to_a(&PotentialFunction::hyperbolic(e("x^2*y")).unwrap());
        assert!(vanishes(&(&a[0] + e("x^2")), &hyperbolic_box(), -1.0));
        assert!(vanishes(&(&a[1] - e("2*x*y")), &hyperbolic_box(), -1.0));
        let a = f_to_a(&PotentialFunction::sphere(e("y*cos(x)")).unwrap());
        assert!(vanishes(&(&a[0] + e("cot(x)")), &sphere_box(), 1.0));
        assert!(vanishes(&(&a[1] + e("y*sin(x)^2")), &sphere_box(), 1.0));
    }

    #[test]
    fn reduction_agrees_with_four_dimensional_check() {
        let s = Sampler::new(200, 3);
        for (sig, f, lam, b) in [
            (Signature::Sphere, "y*cos(x)", 2.0, sphere_box()),
            (Signature::Sphere, "ln(tan(x/2))*cos(x) + 1", 1.0, sphere_box()),
            (Signature::Hyperbolic, "x^2*y", -2.0, hyperbolic_box()),
            (Signature::Hyperbolic, "(x^2 + y^2)/x", -1.0, hyperbolic_box()),
        ] {
            let pf = PotentialFunction::new(e(f), sig).unwrap();
            let h0 = -Expr::param(LAMBDA) * pf.f.powi(2);
            assert!(vanishes(&pf.h0_residual_gradient_form(&h0), &b, lam), "{f}");
            let g = pf.walker_metric(h0).unwrap().with_domain(b).assemble().unwrap();
            let worst = max_residual(&g, lam, g.chart().domain(), &s).unwrap();
            assert!(worst.value < 1e-9, "{f}: {worst:?}");
        }
    }

    #[test]
    fn reduced_system_of_constant_family_vanishes() {
        let w = WalkerMetric::new(
            background_h(Signature::Hyperbolic),
            [e("0"), e("0")],
            EinsteinAnsatz::reduced(e("0")),
        )
        .unwrap()
        .with_domain(hyperbolic_box());
        let r = reduced_system_residuals(&w, -1.0, &Sampler::new(100, 2)).unwrap();
        assert!(r.max() < 1e-12, "{r:?}");
    }

    #[test]
    fn reduced_system_requires_gauge() {
        let pf = PotentialFunction::hyperbolic(e("x^2")).unwrap();
        let w = pf.walker_metric(e("0")).unwrap();
        assert!(matches!(
            reduced_system_residuals(&w, -1.0, &Sampler::new(10, 0)),
            Err(Error::Gauge(_))
        ));
    }
}

//! Null frame, the endomorphism `T`, Petrov type and holonomy of Einstein
//! Walker metrics with `A = 0` and `H₁ = 0`.
//!
//! Frame: `p = ∂_v`, `q = ∂_u − ½H∂_v`, `E = span(∂_x, ∂_y)`. The curvature
//! operator is `𝓡(a, b) = CURVATURE_OPERATOR_SIGN · R(a, b)` with `R` the
//! tensor of [`crate::chart`], and `T(X) = −𝓡(X, q)q`. Wedges act as
//! `(a∧b)(z) = g(a, z)b − g(b, z)a`.

use serde::Serialize;

use crate::chart::{curvature_at, with_lambda, CurvatureBundle, MetricTensor, Tensor4, LAMBDA, U, X, Y};
use crate::domain::{Params, Point, Sampler, Worst};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::Mat;
use crate::walker::WalkerMetric;

/// Sign relating the chart Riemann tensor to the curvature operator used
/// by the frame identities, fixed by `R(p, q) = Λ p∧q`.
pub const CURVATURE_OPERATOR_SIGN: f64 = -1.0;

/// Default tolerance for `det T`.
pub const DET_TOL: f64 = 1e-8;

/// Frame vectors at a point, as components in `(v, x, y, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullFrame {
    pub p: [f64; 4],
    pub q: [f64; 4],
    pub e: [[f64; 4]; 2],
}

impl NullFrame {
    /// Builds the frame from the numeric metric; `H` is read off `g_uu`.
    pub fn at(g: &Mat) -> Self {
        let h = g[(U, U)];
        NullFrame {
            p: [1.0, 0.0, 0.0, 0.0],
            q: [-0.5 * h, 0.0, 0.0, 1.0],
            e: [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]],
        }
    }

    /// Worst deviation from `g(p,p) = g(q,q) = 0`, `g(p,q) = 1`,
    /// `g(p,E) = g(q,E) = 0`.
    pub fn residual(&self, g: &Mat) -> f64 {
        let mut r = [
            dot(g, &self.p, &self.p).abs(),
            dot(g, &self.q, &self.q).abs(),
            (dot(g, &self.p, &self.q) - 1.0).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        for e in &self.e {
            r = r.max(dot(g, &self.p, e).abs()).max(dot(g, &self.q, e).abs());
        }
        r / (1.0 + g.max_abs())
    }
}

fn dot(g: &Mat, a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += g[(i, j)] * a[i] * b[j];
        }
    }
    s
}

fn basis(i: usize) -> [f64; 4] {
    let mut e = [0.0; 4];
    e[i] = 1.0;
    e
}

/// `B(w, z) = g(w, 𝓡(a, b)z)` for a lowered tensor, `sign` the operator sign.
fn operator_form(r: &Tensor4, a: &[f64; 4], b: &[f64; 4], sign: f64) -> Mat {
    Mat::from_fn(4, |w, z| {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if a[i] != 0.0 && b[j] != 0.0 {
                    s += r.get(w, z, i, j) * a[i] * b[j];
                }
            }
        }
        sign * s
    })
}

/// `B(w, z) = g(w, (a∧b)z) = g(a, z)g(b, w) − g(b, z)g(a, w)`
fn wedge_form(g: &Mat, a: &[f64; 4], b: &[f64; 4]) -> Mat {
    let ga = g.mul_vec(a);
    let gb = g.mul_vec(b);
    Mat::from_fn(4, |w, z| ga[z] * gb[w] - gb[z] * ga[w])
}

fn scaled(m: &Mat, k: f64) -> Mat {
    Mat::from_fn(m.dim(), |i, j| k * m[(i, j)])
}

fn add(a: &Mat, b: &Mat) -> Mat {
    Mat::from_fn(a.dim(), |i, j| a[(i, j)] + b[(i, j)])
}

/// The endomorphism `T` of `E` at a point. `matrix[i][j] = T_i^j`, i.e.
/// `T(∂_i) = T_i^j ∂_j` with `i, j ∈ {x, y}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TEndomorphism {
    pub matrix: [[f64; 2]; 2],
    pub det: f64,
    pub trace: f64,
    /// `|h_ik T_j^k − h_jk T_i^k|`, scale-relative.
    pub symmetry_residual: f64,
    /// Gap between the frame contraction and the index formula.
    pub route_gap: f64,
}

impl TEndomorphism {
    fn from_matrix(m: [[f64; 2]; 2], h: [[f64; 2]; 2], route_gap: f64) -> Self {
        let lower = |i: usize, k: usize| (0..2).map(|j| m[i][j] * h[j][k]).sum::<f64>();
        let mag = m.iter().flatten().fold(0.0, |s: f64, v| s.max(v.abs()))
            * h.iter().flatten().fold(0.0, |s: f64, v| s.max(v.abs()));
        TEndomorphism {
            matrix: m,
            det: m[0][0] * m[1][1] - m[0][1] * m[1][0],
            trace: m[0][0] + m[1][1],
            symmetry_residual: (lower(0, 1) - lower(1, 0)).abs() / (1.0 + mag),
            route_gap,
        }
    }

    /// `tr(T²) = T_i^j T_j^i`
    pub fn norm_squared(&self) -> f64 {
        let m = &self.matrix;
        m[0][0] * m[0][0] + 2.0 * m[0][1] * m[1][0] + m[1][1] * m[1][1]
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().flatten().fold(0.0, |s, v| s.max(v.abs()))
    }
}

fn h_block(g: &Mat) -> [[f64; 2]; 2] {
    [[g[(X, X)], g[(X, Y)]], [g[(Y, X)], g[(Y, Y)]]]
}

/// `T` from a lowered curvature tensor via the frame contraction
/// `g(∂_k, T(∂_i)) = −g(∂_k, 𝓡(∂_i, q)q)`, projected with `h⁻¹`.
///
/// `g` must be in the `A = 0` form at this point.
pub fn t_from_lowered(r: &Tensor4, g: &Mat) -> Result<[[f64; 2]; 2]> {
    let scale = 1.0 + g.max_abs();
    if g[(X, U)].abs() > 1e-9 * scale || g[(Y, U)].abs() > 1e-9 * scale {
        return Err(Error::Gauge("metric has A ≠ 0 at this point".into()));
    }
    let frame = NullFrame::at(g);
    let h = h_block(g);
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let hinv = [[h[1][1] / det, -h[0][1] / det], [-h[1][0] / det, h[0][0] / det]];
    let mut m = [[0.0; 2]; 2];
    for (i, &ei) in [X, Y].iter().enumerate() {
        let form = operator_form(r, &basis(ei), &frame.q, CURVATURE_OPERATOR_SIGN);
        let q = frame.q;
        // lowered[k] = g(∂_k, T(∂_i))
        let lowered: Vec<f64> = [X, Y]
            .iter()
            .map(|&k| -(0..4).map(|z| form[(k, z)] * q[z]).sum::<f64>())
            .collect();
        for j in 0..2 {
            m[i][j] = (0..2).map(|k| hinv[j][k] * lowered[k]).sum();
        }
    }
    Ok(m)
}

/// `T_i^j = −𝓡^j_{u i u}` from the mixed-index tensor.
fn t_index_route(c: &CurvatureBundle) -> [[f64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    for (i, &ei) in [X, Y].iter().enumerate() {
        for (j, &ej) in [X, Y].iter().enumerate() {
            m[i][j] = -CURVATURE_OPERATOR_SIGN * c.riemann.get(ej, U, ei, U);
        }
    }
    m
}

/// Petrov type of these metrics: II or D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PetrovType {
    II,
    D,
}

impl std::fmt::Display for PetrovType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PetrovType::II => "II",
            PetrovType::D => "D",
        })
    }
}

/// One classified point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointClass {
    pub point: Point,
    pub t: TEndomorphism,
    pub petrov: PetrovType,
    /// `|det T|` is within a factor 10 of the threshold.
    pub near_degenerate: bool,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Holonomy {
    /// `T ≠ 0` somewhere: the maximal subalgebra `sim(2)`.
    #[serde(rename = "sim(2)")]
    Sim2,
    /// `T ≡ 0` on the sample: `ℝ p∧q ⊕ so(2)`.
    #[serde(rename = "decomposable")]
    Decomposable,
}

impl std::fmt::Display for Holonomy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Holonomy::Sim2 => "sim(2)-indecomposable",
            Holonomy::Decomposable => "decomposable (Rp^q + so(2))",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolonomyVerdict {
    pub holonomy: Holonomy,
    pub samples: usize,
    /// Point of largest `|det T|` relative to its threshold.
    pub witness: Worst,
    pub note: &'static str,
}

/// Coefficients `(c_pq, c_px, c_xy, c_xq)` in
/// `W(p,q) = c_pq Λ p∧q`, `W(p,X) = c_px Λ p∧X`, `W(X,Y) = c_xy Λ X∧Y`,
/// `W(X,q) = c_xq Λ X∧q − p∧T(X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylCoefficients {
    pub pq: f64,
    pub px: f64,
    pub xy: f64,
    pub xq: f64,
}

impl WeylCoefficients {
    /// `(1/3, −2/3, 1/3, −2/3)`, the coefficients as listed with the frame
    /// identities.
    pub const LISTED: Self = WeylCoefficients {
        pq: 1.0 / 3.0,
        px: -2.0 / 3.0,
        xy: 1.0 / 3.0,
        xq: -2.0 / 3.0,
    };

    /// `(2/3, −1/3, 2/3, −1/3)`. For `Ric = Λg` trace-freeness of `W`
    /// forces `𝓡 − 𝓦 = (Λ/3) a∧b`, which together with the `R` identities
    /// gives these values.
    pub const TRACE_FREE: Self = WeylCoefficients {
        pq: 2.0 / 3.0,
        px: -1.0 / 3.0,
        xy: 2.0 / 3.0,
        xq: -1.0 / 3.0,
    };
}

/// Residual of each frame identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResiduals {
    pub r_pq: f64,
    pub r_xy: f64,
    pub r_xq: f64,
    pub r_px: f64,
    pub w_pq: f64,
    pub w_px: f64,
    pub w_xy: f64,
    pub w_xq: f64,
}

impl IdentityResiduals {
    pub fn named(&self) -> [(&'static str, f64); 8] {
        [
            ("R(p,q) = Lambda p^q", self.r_pq),
            ("R(X,Y) = Lambda X^Y", self.r_xy),
            ("R(X,q) = -p^T(X)", self.r_xq),
            ("R(p,X) = 0", self.r_px),
            ("W(p,q) = Lambda/3 p^q", self.w_pq),
            ("W(p,X) = -2Lambda/3 p^X", self.w_px),
            ("W(X,Y) = Lambda/3 X^Y", self.w_xy),
            ("W(X,q) = -2Lambda/3 X^q - p^T(X)", self.w_xq),
        ]
    }

    pub fn max(&self) -> f64 {
        self.named().iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    fn merge(&self, o: &Self) -> Self {
        IdentityResiduals {
            r_pq: self.r_pq.max(o.r_pq),
            r_xy: self.r_xy.max(o.r_xy),
            r_xq: self.r_xq.max(o.r_xq),
            r_px: self.r_px.max(o.r_px),
            w_pq: self.w_pq.max(o.w_pq),
            w_px: self.w_px.max(o.w_px),
            w_xy: self.w_xy.max(o.w_xy),
            w_xq: self.w_xq.max(o.w_xq),
        }
    }
}

/// Classification of a Walker metric in the `A = 0`, `H₁ = 0` gauge.
#[derive(Debug, Clone)]
pub struct Classifier {
    walker: WalkerMetric,
    metric: MetricTensor,
    tol: f64,
}

impl Classifier {
    pub fn new(w: &WalkerMetric) -> Result<Self> {
        if w.has_a() {
            return Err(Error::Gauge(
                "classification needs A = 0; remove it with a flow transform".into(),
            ));
        }
        if w.has_h1() {
            return Err(Error::Gauge("classification needs H1 = 0; apply the v-shift".into()));
        }
        Ok(Classifier {
            walker: w.clone(),
            metric: w.assemble()?,
            tol: DET_TOL,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn metric(&self) -> &MetricTensor {
        &self.metric
    }

    pub fn walker(&self) -> &WalkerMetric {
        &self.walker
    }

    pub fn curvature(&self, lambda: f64, p: &Point) -> Result<CurvatureBundle> {
        let c = curvature_at(&self.metric, &with_lambda(p, lambda))?;
        let res = c.einstein_residual(lambda).relative;
        if res > 1e-6 {
            log::warn!("metric is not Einstein at {:?}: residual {res:e}", p.coords());
        }
        Ok(c)
    }

    /// `T` computed by frame contraction and by the index formula.
    pub fn t_at(&self, lambda: f64, p: &Point) -> Result<TEndomorphism> {
        t_of_bundle(&self.curvature(lambda, p)?)
    }

    /// `|det T| ≤ tol · Λ⁴(1 + max|coords|)⁸`.
    pub fn threshold(&self, lambda: f64, p: &Point) -> f64 {
        self.tol * lambda.powi(4) * (1.0 + p.max_abs_coord()).powi(8)
    }

    pub fn classify_at(&self, lambda: f64, p: &Point) -> Result<PointClass> {
        let t = self.t_at(lambda, p)?;
        let threshold = self.threshold(lambda, p);
        let d = t.det.abs();
        Ok(PointClass {
            point: p.clone(),
            petrov: if d <= threshold { PetrovType::D } else { PetrovType::II },
            near_degenerate: d > threshold / 10.0 && d <= threshold * 10.0,
            threshold,
            t,
        })
    }

    pub fn petrov_type_at(&self, lambda: f64, p: &Point) -> Result<PetrovType> {
        Ok(self.classify_at(lambda, p)?.petrov)
    }

    pub fn classify_points(&self, lambda: f64, points: &[Point], exec: Exec) -> Result<Vec<PointClass>> {
        exec.map(points.len(), |i| self.classify_at(lambda, &points[i]))
            .into_iter()
            .collect()
    }

    /// `sim(2)` if some sampled point has `|det T|` above its threshold.
    pub fn holonomy_verdict(&self, lambda: f64, sampler: &Sampler) -> Result<HolonomyVerdict> {
        let params = Params::from([(LAMBDA.to_string(), lambda)]);
        let rows = sampler.map(self.walker.domain(), &params, |p| {
            let c = self.classify_at(lambda, p)?;
            Ok((c.t.det.abs() / c.threshold, p.clone()))
        })?;
        let witness = Worst::of(rows).expect("sampler yields at least one point");
        let (holonomy, note) = if witness.value > 1.0 {
            (Holonomy::Sim2, "T != 0 at the witness point")
        } else {
            (Holonomy::Decomposable, "T = 0 on every sampled point")
        };
        Ok(HolonomyVerdict {
            holonomy,
            samples: sampler.n,
            witness,
            note,
        })
    }

    /// The eight frame identities at one point, Weyl part with the listed
    /// coefficients.
    pub fn weyl_identity_suite(&self, lambda: f64, p: &Point) -> Result<IdentityResiduals> {
        self.weyl_identity_suite_with(lambda, p, WeylCoefficients::LISTED)
    }

    pub fn weyl_identity_suite_with(&self, lambda: f64, p: &Point, w: WeylCoefficients) -> Result<IdentityResiduals> {
        let c = self.curvature(lambda, p)?;
        identity_suite(&c, lambda, CURVATURE_OPERATOR_SIGN, w)
    }

    /// Identity residuals maximised over the samples.
    pub fn identity_suite_sampled(
        &self,
        lambda: f64,
        sampler: &Sampler,
        w: WeylCoefficients,
    ) -> Result<IdentityResiduals> {
        let params = Params::from([(LAMBDA.to_string(), lambda)]);
        let rows = sampler.map(self.walker.domain(), &params, |p| {
            self.weyl_identity_suite_with(lambda, p, w)
        })?;
        Ok(rows.iter().skip(1).fold(rows[0].clone(), |a, b| a.merge(b)))
    }
}

/// `T` from a curvature bundle by both routes.
pub fn t_of_bundle(c: &CurvatureBundle) -> Result<TEndomorphism> {
    let frame = t_from_lowered(&c.riemann_lower, &c.g)?;
    let index = t_index_route(c);
    let mag = 1.0 + c.scale;
    let gap = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (frame[i][j] - index[i][j]).abs())
        .fold(0.0, f64::max)
        / mag;
    Ok(TEndomorphism::from_matrix(frame, h_block(&c.g), gap))
}

/// Evaluates the frame identities with curvature operator sign `sign`.
pub fn identity_suite(
    c: &CurvatureBundle,
    lambda: f64,
    sign: f64,
    coeffs: WeylCoefficients,
) -> Result<IdentityResiduals> {
    if c.dim() != 4 {
        return Err(Error::Invalid("identity suite needs a spacetime chart".into()));
    }
    let g = &c.g;
    let f = NullFrame::at(g);
    let t = t_from_lowered(&c.riemann_lower, g)?;
    // T(X) as a 4-vector
    let t_vec = |i: usize| -> [f64; 4] {
        let mut out = [0.0; 4];
        out[X] = t[i][0];
        out[Y] = t[i][1];
        out
    };
    let base = c.scale * g.max_abs() * (1.0 + g[(U, U)].abs()).powi(2);
    let cmp = |lhs: &Mat, rhs: &Mat| -> f64 {
        let s = 1.0 + base.max(lhs.max_abs()).max(rhs.max_abs());
        lhs.sub(rhs).max_abs() / s
    };
    let r = |a: &[f64; 4], b: &[f64; 4]| operator_form(&c.riemann_lower, a, b, sign);
    let w = |a: &[f64; 4], b: &[f64; 4]| operator_form(&c.weyl, a, b, sign);
    let wedge = |a: &[f64; 4], b: &[f64; 4]| wedge_form(g, a, b);
    let (p, q) = (f.p, f.q);
    let [ex, ey] = f.e;
    let zero = Mat::zeros(4);

    let mut out = IdentityResiduals {
        r_pq: cmp(&r(&p, &q), &scaled(&wedge(&p, &q), lambda)),
        r_xy: cmp(&r(&ex, &ey), &scaled(&wedge(&ex, &ey), lambda)),
        r_xq: 0.0,
        r_px: 0.0,
        w_pq: cmp(&w(&p, &q), &scaled(&wedge(&p, &q), coeffs.pq * lambda)),
        w_px: 0.0,
        w_xy: cmp(&w(&ex, &ey), &scaled(&wedge(&ex, &ey), coeffs.xy * lambda)),
        w_xq: 0.0,
    };
    for (i, e) in [ex, ey].iter().enumerate() {
        let pt = scaled(&wedge(&p, &t_vec(i)), -1.0);
        out.r_xq = out.r_xq.max(cmp(&r(e, &q), &pt));
        out.r_px = out.r_px.max(cmp(&r(&p, e), &zero));
        out.w_px = out.w_px.max(cmp(&w(&p, e), &scaled(&wedge(&p, e), coeffs.px * lambda)));
        out.w_xq = out
            .w_xq
            .max(cmp(&w(e, &q), &add(&scaled(&wedge(e, &q), coeffs.xq * lambda), &pt)));
    }
    Ok(out)
}

/// Returns the operator sign (±1) under which `R(p, q) = Λ p∧q` holds at
/// `p`, or an error if neither does.
pub fn calibrate_sign(classifier: &Classifier, lambda: f64, p: &Point) -> Result<f64> {
    let c = classifier.curvature(lambda, p)?;
    let plus = identity_suite(&c, lambda, 1.0, WeylCoefficients::LISTED)?.r_pq;
    let minus = identity_suite(&c, lambda, -1.0, WeylCoefficients::LISTED)?.r_pq;
    match (plus < 1e-8, minus < 1e-8) {
        (true, false) => Ok(1.0),
        (false, true) => Ok(-1.0),
        _ => Err(Error::Precondition(format!(
            "sign calibration is inconclusive (residuals {plus:e}, {minus:e})"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainBox;
    use crate::expr::{parse, Expr, Names};
    use crate::walker::{background_h, walker_point, EinsteinAnsatz, Signature};

    fn e(s: &str) -> Expr {
        parse(s, &Names::new(crate::chart::WALKER_COORDS, [LAMBDA])).unwrap()
    }

    fn example1() -> WalkerMetric {
        WalkerMetric::new(
            [
                e("(36*Lambda^2*u^2*x^4 + 1)/(-Lambda*x^2)"),
                e("12*Lambda*u*x^2/(-Lambda*x^2)/2"),
                e("1/(-Lambda*x^2)"),
            ],
            [Expr::zero(), Expr::zero()],
            EinsteinAnsatz::reduced(e("3*Lambda*x^4")),
        )
        .unwrap()
        .with_domain(
            DomainBox::new()
                .with_interval("v", -1.0, 1.0)
                .with_interval("x", 0.3, 2.0)
                .with_interval("y", -1.0, 1.0)
                .with_interval("u", -0.5, 0.5),
        )
    }

    fn product() -> WalkerMetric {
        WalkerMetric::new(
            background_h(Signature::Hyperbolic),
            [Expr::zero(), Expr::zero()],
            EinsteinAnsatz::reduced(Expr::zero()),
        )
        .unwrap()
        .with_domain(example1().domain().clone())
    }

    #[test]
    fn sign_calibrates_on_example_one() {
        let c = Classifier::new(&example1()).unwrap();
        for lam in [-1.0, -2.0] {
            let s = calibrate_sign(&c, lam, &walker_point(0.3, 0.7, 0.2, 0.25)).unwrap();
            assert_eq!(s, CURVATURE_OPERATOR_SIGN);
        }
    }

    #[test]
    fn frame_is_null() {
        let c = Classifier::new(&example1()).unwrap();
        let g = c
            .metric()
            .metric_at(&with_lambda(&walker_point(0.5, 0.7, 0.2, 0.25), -1.0))
            .unwrap();
        assert!(NullFrame::at(&g).residual(&g) < 1e-15);
    }

    #[test]
    fn example_one_det_formula() {
        let c = Classifier::new(&example1()).unwrap();
        for (v, x) in [(0.3, 0.7), (0.0, 1.0), (-0.8, 1.9)] {
            let t = c.t_at(-1.0, &walker_point(v, x, 0.1, 0.2)).unwrap();
            let expect = -9.0 * x.powi(4) * (x.powi(4) + v * v);
            assert!(
                (t.det - expect).abs() <= 1e-9 * expect.abs(),
                "{v} {x}: {} vs {expect}",
                t.det
            );
            assert!(t.route_gap < 1e-12 && t.symmetry_residual < 1e-12 && t.trace.abs() < 1e-10);
            assert!((t.det + t.norm_squared() / 2.0).abs() < 1e-9 * t.det.abs());
        }
    }

    #[test]
    fn product_metric_is_decomposable() {
        let c = Classifier::new(&product()).unwrap();
        let t = c.t_at(-1.0, &walker_point(0.3, 0.7, 0.2, 0.25)).unwrap();
        assert!(t.max_abs() < 1e-12);
        let v = c.holonomy_verdict(-1.0, &Sampler::new(50, 1)).unwrap();
        assert_eq!(v.holonomy, Holonomy::Decomposable);
        let p = walker_point(0.3, 0.7, 0.2, 0.25);
        let s = c
            .weyl_identity_suite_with(-1.0, &p, WeylCoefficients::TRACE_FREE)
            .unwrap();
        assert!(s.max() < 1e-12, "{s:?}");
    }

    #[test]
    fn identity_suite_on_example_one() {
        let c = Classifier::new(&example1()).unwrap();
        let s = c
            .identity_suite_sampled(-1.0, &Sampler::new(50, 4), WeylCoefficients::TRACE_FREE)
            .unwrap();
        assert!(s.max() < 1e-10, "{s:?}");
        // the listed Weyl coefficients differ from the trace-free ones by (Λ/3) a∧b
        let listed = c
            .identity_suite_sampled(-1.0, &Sampler::new(50, 4), WeylCoefficients::LISTED)
            .unwrap();
        assert!(listed.r_pq.max(listed.r_xy).max(listed.r_xq).max(listed.r_px) < 1e-10);
        assert!(listed.w_pq > 1e-4 && listed.w_px > 1e-4 && listed.w_xy > 1e-4 && listed.w_xq > 1e-4);
        // the opposite sign breaks the identities wholesale
        let b = c.curvature(-1.0, &walker_point(0.3, 0.7, 0.2, 0.25)).unwrap();
        let wrong = identity_suite(&b, -1.0, -CURVATURE_OPERATOR_SIGN, WeylCoefficients::TRACE_FREE).unwrap();
        assert!(wrong.r_pq > 1e-3 && wrong.r_xy > 1e-3 && wrong.w_pq > 1e-3);
    }

    #[test]
    fn a_nonzero_is_a_gauge_error() {
        let w = WalkerMetric::new(
            background_h(Signature::Hyperbolic),
            [Expr::zero(), e("2*x")],
            EinsteinAnsatz::reduced(Expr::zero()),
        )
        .unwrap();
        assert!(matches!(Classifier::new(&w), Err(Error::Gauge(_))));
    }
}

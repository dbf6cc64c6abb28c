//! Charts, symbolic metrics and pointwise curvature.
//!
//! Index conventions, fixed throughout the crate:
//!
//! * `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`
//! * `R^l_{kij} = ∂_i Γ^l_{jk} − ∂_j Γ^l_{ik} + Γ^l_{im}Γ^m_{jk} − Γ^l_{jm}Γ^m_{ik}`,
//!   so that `R(∂_i, ∂_j)∂_k = R^l_{kij} ∂_l`
//! * `Ric_ab = R^c_{acb}`, `s = g^{ab} Ric_ab`
//! * `R_{lkij} = g_lm R^m_{kij}`
//!
//! Spacetime charts are ordered `(v, x, y, u)`.

use std::sync::Arc;

use crate::domain::{DomainBox, Params, Point, Sampler, Worst};
use crate::error::{Error, Result};
use crate::expr::{Expr, Program};
use crate::linalg::Mat;

/// Name of the cosmological constant parameter.
pub const LAMBDA: &str = "Lambda";

/// Walker coordinate order.
pub const WALKER_COORDS: [&str; 4] = ["v", "x", "y", "u"];
pub const V: usize = 0;
pub const X: usize = 1;
pub const Y: usize = 2;
pub const U: usize = 3;

/// `|det g|` below this fraction of the Hadamard bound `∏ |row_i|` counts as degenerate.
pub const DEGENERACY_GUARD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    coords: Vec<String>,
    domain: DomainBox,
}

impl Chart {
    pub fn new<S: AsRef<str>>(coords: &[S], domain: DomainBox) -> Result<Self> {
        let coords: Vec<String> = coords.iter().map(|c| c.as_ref().to_string()).collect();
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(Error::Invalid(format!("duplicate coordinate `{c}`")));
            }
        }
        if coords.len() != 2 && coords.len() != 4 {
            return Err(Error::Invalid(format!(
                "charts have 2 or 4 coordinates, got {}",
                coords.len()
            )));
        }
        Ok(Chart { coords, domain })
    }

    /// The `(v, x, y, u)` chart.
    pub fn walker(domain: DomainBox) -> Self {
        Chart::new(&WALKER_COORDS, domain).expect("fixed chart is valid")
    }

    /// The `(x, y)` surface chart; `u` stays a free parameter-like variable.
    pub fn surface(domain: DomainBox) -> Self {
        Chart::new(&["x", "y"], domain).expect("fixed chart is valid")
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Self {
        self.domain = domain;
        self
    }
}

/// Symmetric matrix of expressions over a chart, with exact first and
/// second derivatives compiled for fast pointwise evaluation.
#[derive(Debug, Clone)]
pub struct MetricTensor {
    chart: Chart,
    g: Vec<Expr>,
    jets: Arc<Jets>,
}

#[derive(Debug)]
struct Jets {
    program: Program,
    vars: Vec<String>,
    params: Vec<String>,
}

/// Numeric metric with first and second coordinate derivatives.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub g: Mat,
    /// `dg[c]` is `∂_c g`.
    pub dg: Vec<Mat>,
    /// `ddg[c * n + d]` is `∂_c ∂_d g`.
    pub ddg: Vec<Mat>,
}

fn pair_index(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * n - a * (a + 1) / 2 + b
}

impl MetricTensor {
    /// `components` is the full `n × n` matrix; it must be structurally
    /// symmetric.
    pub fn new(chart: Chart, components: Vec<Vec<Expr>>) -> Result<Self> {
        let n = chart.dim();
        if components.len() != n || components.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid(format!("metric must be {n}x{n}")));
        }
        for a in 0..n {
            for b in a + 1..n {
                if components[a][b] != components[b][a] {
                    return Err(Error::Invalid(format!("metric is not symmetric in ({a}, {b})")));
                }
            }
        }
        let mut g = Vec::with_capacity(n * (n + 1) / 2);
        for a in 0..n {
            for b in a..n {
                g.push(components[a][b].clone());
            }
        }
        let jets = Arc::new(Jets::compile(&chart, &g)?);
        Ok(MetricTensor { chart, g, jets })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn component(&self, a: usize, b: usize) -> &Expr {
        &self.g[pair_index(self.dim(), a, b)]
    }

    pub fn components(&self) -> Vec<Vec<Expr>> {
        let n = self.dim();
        (0..n)
            .map(|a| (0..n).map(|b| self.component(a, b).clone()).collect())
            .collect()
    }

    /// Variables the components depend on beyond the chart coordinates.
    pub fn extra_vars(&self) -> Vec<String> {
        self.jets.vars[self.dim()..].to_vec()
    }

    pub fn params(&self) -> &[String] {
        &self.jets.params
    }

    /// Metric and derivatives at `p`. Fails with [`Error::Singular`] when the
    /// metric is degenerate there.
    pub fn jet_at(&self, p: &Point) -> Result<MetricJet> {
        let n = self.dim();
        let m = n * (n + 1) / 2;
        let out = self.jets.program.eval(&p.slots(&self.jets.vars, &self.jets.params)?)?;
        let unpack = |offset: usize| Mat::from_fn(n, |a, b| out[offset + pair_index(n, a, b)]);
        let g = unpack(0);
        let dg = (0..n).map(|c| unpack(m * (1 + c))).collect();
        let mut ddg = Vec::with_capacity(n * n);
        for c in 0..n {
            for d in 0..n {
                ddg.push(unpack(m * (1 + n + pair_index(n, c, d))));
            }
        }
        Ok(MetricJet { g, dg, ddg })
    }

    pub fn metric_at(&self, p: &Point) -> Result<Mat> {
        Ok(self.jet_at(p)?.g)
    }
}

impl Jets {
    fn compile(chart: &Chart, g: &[Expr]) -> Result<Jets> {
        let n = chart.dim();
        let coords = chart.coords();
        let mut outputs: Vec<Expr> = g.to_vec();
        let first: Vec<Vec<Expr>> = coords
            .iter()
            .map(|c| g.iter().map(|e| e.derivative(c)).collect())
            .collect();
        for d in &first {
            outputs.extend(d.iter().cloned());
        }
        for c in 0..n {
            for d in c..n {
                outputs.extend(first[c].iter().map(|e| e.derivative(&coords[d])));
            }
        }
        let mut vars = coords.to_vec();
        let mut params = Vec::new();
        for e in g {
            for v in e.variables() {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
            for q in e.parameters() {
                if !params.contains(&q) {
                    params.push(q);
                }
            }
        }
        vars[n..].sort();
        params.sort();
        let program = Program::compile(&outputs, &vars, &params)?;
        Ok(Jets { program, vars, params })
    }
}

/// Rank-3 array indexed `[k][i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    fn zeros(n: usize) -> Self {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.n + i) * self.n + j] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Rank-4 array indexed `[a][b][c][d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }

    fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let n = self.n;
        self.data[((a * n + b) * n + c) * n + d] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `out_{abcd} = Σ m_{a'a} m_{b'b} m_{c'c} m_{d'd} t_{a'b'c'd'}`, the
    /// pullback of an all-lower tensor by the Jacobian `m`.
    pub fn pullback(&self, m: &Mat) -> Tensor4 {
        let n = self.n;
        let mut step = self.clone();
        for slot in 0..4 {
            let mut next = Tensor4::zeros(n);
            for idx in 0..n * n * n * n {
                let mut ix = [idx / (n * n * n), idx / (n * n) % n, idx / n % n, idx % n];
                let target = ix[slot];
                let mut s = 0.0;
                for k in 0..n {
                    ix[slot] = k;
                    s += m[(k, target)] * step.get(ix[0], ix[1], ix[2], ix[3]);
                }
                next.data[idx] = s;
            }
            step = next;
        }
        step
    }
}

/// Curvature data at one point.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub point: Point,
    pub g: Mat,
    pub g_inv: Mat,
    /// `Γ^k_ij` as `christoffel.get(k, i, j)`.
    pub christoffel: Tensor3,
    /// `R^l_{kij}` as `riemann.get(l, k, i, j)`.
    pub riemann: Tensor4,
    /// `R_{lkij}`.
    pub riemann_lower: Tensor4,
    pub ricci: Mat,
    pub scalar: f64,
    /// `W_{abcd}`; zero for surface charts.
    pub weyl: Tensor4,
    /// Largest magnitude of any term summed into a Riemann component.
    pub scale: f64,
}

pub fn curvature_at(metric: &MetricTensor, p: &Point) -> Result<CurvatureBundle> {
    let n = metric.dim();
    let MetricJet { g, dg, ddg } = metric.jet_at(p)?;
    let gmax = g.max_abs();
    // Hadamard bound: |det g| ≤ ∏ |row_i|.
    let bound: f64 = (0..n)
        .map(|i| (0..n).map(|j| g[(i, j)].powi(2)).sum::<f64>().sqrt())
        .product();
    if g.det().abs() <= DEGENERACY_GUARD * bound {
        return Err(Error::Singular { pivot: g.det() });
    }
    let (g_inv, _) = g.inverse()?;
    let dg_inv: Vec<Mat> = dg.iter().map(|d| g_inv.mul(d).mul(&g_inv)).collect();

    // first-kind symbols and their derivatives
    let first = |l: usize, i: usize, j: usize| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
    let d_first = |m: usize, l: usize, i: usize, j: usize| {
        0.5 * (ddg[m * n + i][(j, l)] + ddg[m * n + j][(i, l)] - ddg[m * n + l][(i, j)])
    };

    let mut gamma = Tensor3::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|l| g_inv[(k, l)] * first(l, i, j)).sum();
                gamma.set(k, i, j, s);
                gamma.set(k, j, i, s);
            }
        }
    }
    // d_gamma[m] = ∂_m Γ; note ∂g⁻¹ = −g⁻¹(∂g)g⁻¹
    let mut d_gamma = Vec::with_capacity(n);
    for m in 0..n {
        let mut t = Tensor3::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let s: f64 = (0..n)
                        .map(|l| -dg_inv[m][(k, l)] * first(l, i, j) + g_inv[(k, l)] * d_first(m, l, i, j))
                        .sum();
                    t.set(k, i, j, s);
                    t.set(k, j, i, s);
                }
            }
        }
        d_gamma.push(t);
    }

    let mut riemann = Tensor4::zeros(n);
    let mut scale: f64 = 0.0;
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let a = d_gamma[i].get(l, j, k);
                    let b = d_gamma[j].get(l, i, k);
                    let mut quad = 0.0;
                    let mut quad_abs = 0.0;
                    for m in 0..n {
                        let t1 = gamma.get(l, i, m) * gamma.get(m, j, k);
                        let t2 = gamma.get(l, j, m) * gamma.get(m, i, k);
                        quad += t1 - t2;
                        quad_abs += t1.abs() + t2.abs();
                    }
                    riemann.set(l, k, i, j, a - b + quad);
                    scale = scale.max(a.abs() + b.abs() + quad_abs);
                }
            }
        }
    }

    let mut riemann_lower = Tensor4::zeros(n);
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let s: f64 = (0..n).map(|m| g[(l, m)] * riemann.get(m, k, i, j)).sum();
                    riemann_lower.set(l, k, i, j, s);
                }
            }
        }
    }

    let ricci = Mat::from_fn(n, |a, b| (0..n).map(|c| riemann.get(c, a, c, b)).sum());
    let scalar: f64 = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .map(|(a, b)| g_inv[(a, b)] * ricci[(a, b)])
        .sum();

    let mut weyl = Tensor4::zeros(n);
    if n == 4 {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let ric_part = 0.5
                            * (g[(a, c)] * ricci[(d, b)] - g[(a, d)] * ricci[(c, b)] - g[(b, c)] * ricci[(d, a)]
                                + g[(b, d)] * ricci[(c, a)]);
                        let s_part = scalar / 6.0 * (g[(a, c)] * g[(d, b)] - g[(a, d)] * g[(c, b)]);
                        weyl.set(a, b, c, d, riemann_lower.get(a, b, c, d) - ric_part + s_part);
                    }
                }
            }
        }
    }

    Ok(CurvatureBundle {
        point: p.clone(),
        g,
        g_inv,
        christoffel: gamma,
        riemann,
        riemann_lower,
        ricci,
        scalar,
        weyl,
        scale: scale.max(gmax),
    })
}

impl CurvatureBundle {
    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// Worst scale-relative violation of the pair symmetries and the first
    /// Bianchi identity of the lowered Riemann tensor.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.dim();
        let r = &self.riemann_lower;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let x = r.get(a, b, c, d);
                        worst = worst
                            .max((x + r.get(b, a, c, d)).abs())
                            .max((x + r.get(a, b, d, c)).abs())
                            .max((x - r.get(c, d, a, b)).abs())
                            .max((x + r.get(a, c, d, b) + r.get(a, d, b, c)).abs());
                    }
                }
            }
        }
        worst / (1.0 + self.scale * self.g.max_abs())
    }

    /// Worst scale-relative trace `g^{ac} W_{abcd}`.
    pub fn weyl_trace_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for b in 0..n {
            for d in 0..n {
                let t: f64 = (0..n)
                    .flat_map(|a| (0..n).map(move |c| (a, c)))
                    .map(|(a, c)| self.g_inv[(a, c)] * self.weyl.get(a, b, c, d))
                    .sum();
                worst = worst.max(t.abs());
            }
        }
        worst / (1.0 + self.scale * self.g.max_abs() * self.g_inv.max_abs())
    }

    /// `Ric − Λg` and its scale-relative max norm.
    pub fn einstein_residual(&self, lambda: f64) -> EinsteinResidual {
        let matrix = Mat::from_fn(self.dim(), |a, b| self.ricci[(a, b)] - lambda * self.g[(a, b)]);
        let scale = 1.0 + self.scale.max(lambda.abs() * self.g.max_abs());
        EinsteinResidual {
            relative: matrix.max_abs() / scale,
            matrix,
            scale,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EinsteinResidual {
    pub matrix: Mat,
    /// Max entry divided by `scale`.
    pub relative: f64,
    pub scale: f64,
}

/// Sets the `Lambda` parameter of `p`.
pub fn with_lambda(p: &Point, lambda: f64) -> Point {
    p.clone().with_param(LAMBDA, lambda)
}

pub fn einstein_residual_at(metric: &MetricTensor, lambda: f64, p: &Point) -> Result<EinsteinResidual> {
    Ok(curvature_at(metric, &with_lambda(p, lambda))?.einstein_residual(lambda))
}

/// Largest scale-relative Einstein residual over the sampled points of
/// `domain`.
pub fn max_residual(metric: &MetricTensor, lambda: f64, domain: &DomainBox, sampler: &Sampler) -> Result<Worst> {
    let params = Params::from([(LAMBDA.to_string(), lambda)]);
    let rows = sampler.map(domain, &params, |p| {
        Ok((einstein_residual_at(metric, lambda, p)?.relative, p.clone()))
    })?;
    Ok(Worst::of(rows).expect("sampler yields at least one point"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Names};

    fn names() -> Names {
        Names::new(WALKER_COORDS, [LAMBDA])
    }

    fn metric(chart: Chart, rows: &[&[&str]]) -> MetricTensor {
        let n = Names::new(["v", "x", "y", "u"], [LAMBDA]);
        let comps = rows
            .iter()
            .map(|r| r.iter().map(|s| parse(s, &n).unwrap()).collect())
            .collect();
        MetricTensor::new(chart, comps).unwrap()
    }

    fn walker(h: [&str; 3], a: [&str; 2], hh: &str) -> MetricTensor {
        metric(
            Chart::walker(DomainBox::new()),
            &[
                &["0", "0", "0", "1"],
                &["0", h[0], h[1], a[0]],
                &["0", h[1], h[2], a[1]],
                &["1", a[0], a[1], hh],
            ],
        )
    }

    fn pt(v: f64, x: f64, y: f64, u: f64) -> Point {
        Point::new([("v", v), ("x", x), ("y", y), ("u", u)])
    }

    #[test]
    fn minkowski_is_flat() {
        let g = walker(["1", "0", "1"], ["0", "0"], "0");
        let c = curvature_at(&g, &pt(0.1, 0.2, 0.3, 0.4)).unwrap();
        assert_eq!(c.christoffel.max_abs(), 0.0);
        assert_eq!(c.riemann.max_abs(), 0.0);
        assert_eq!(c.ricci.max_abs(), 0.0);
    }

    #[test]
    fn unit_sphere_has_unit_curvature() {
        let g = metric(Chart::surface(DomainBox::new()), &[&["1", "0"], &["0", "sin(x)^2"]]);
        let c = curvature_at(&g, &Point::new([("x", 1.0), ("y", 0.0)])).unwrap();
        assert!(c.ricci.sub(&c.g).max_abs() < 1e-9);
        assert!((c.scalar - 2.0).abs() < 1e-12);
        assert_eq!(c.weyl.max_abs(), 0.0);
    }

    #[test]
    fn hyperbolic_plane_is_einstein() {
        let g = metric(
            Chart::surface(DomainBox::new()),
            &[&["1/(-Lambda*x^2)", "0"], &["0", "1/(-Lambda*x^2)"]],
        );
        let p = Point::new([("x", 0.7), ("y", 0.3)]).with_param(LAMBDA, -1.0);
        let c = curvature_at(&g, &p).unwrap();
        assert!(c.einstein_residual(-1.0).matrix.max_abs() < 1e-9);
    }

    #[test]
    fn pp_waves() {
        let p = pt(0.3, 0.4, -0.2, 0.1);
        let harmonic = walker(["1", "0", "1"], ["0", "0"], "x^2 - y^2");
        assert!(einstein_residual_at(&harmonic, 0.0, &p).unwrap().matrix.max_abs() < 1e-14);
        let r = einstein_residual_at(&walker(["1", "0", "1"], ["0", "0"], "x^2"), 0.0, &p).unwrap();
        // Ric_uu = −½(∂²_x + ∂²_y)H
        assert!((r.matrix[(U, U)] + 1.0).abs() < 1e-12);
        assert!(r.relative > 0.1);
    }

    #[test]
    fn de_sitter_like_product_is_einstein_with_symmetries() {
        // hyperbolic plane times the Λv² two-plane
        let g = walker(["1/(-Lambda*x^2)", "0", "1/(-Lambda*x^2)"], ["0", "0"], "Lambda*v^2");
        let p = with_lambda(&pt(0.3, 0.8, 0.1, -0.2), -1.0);
        let c = curvature_at(&g, &p).unwrap();
        assert!(c.einstein_residual(-1.0).relative < 1e-12);
        assert!((c.scalar + 4.0).abs() < 1e-12);
        assert!(c.symmetry_residual() < 1e-12);
        assert!(c.weyl_trace_residual() < 1e-12);
    }

    #[test]
    fn coordinate_order_does_not_change_scalars() {
        let n = names();
        let hh = "Lambda*v^2 + x^3*y - y^2*u";
        let g = walker(["1 + u^2", "x*u", "2"], ["y", "0"], hh);
        let p = with_lambda(&pt(0.3, 0.5, 0.1, -0.2), 1.5);
        let s1 = curvature_at(&g, &p).unwrap().scalar;
        // order (u, y, x, v)
        let e = |s: &str| parse(s, &n).unwrap();
        let comps = vec![
            vec![e(hh), e("0"), e("y"), e("1")],
            vec![e("0"), e("2"), e("x*u"), e("0")],
            vec![e("y"), e("x*u"), e("1 + u^2"), e("0")],
            vec![e("1"), e("0"), e("0"), e("0")],
        ];
        let chart = Chart::new(&["u", "y", "x", "v"], DomainBox::new()).unwrap();
        let g2 = MetricTensor::new(chart, comps).unwrap();
        let s2 = curvature_at(&g2, &p).unwrap().scalar;
        assert!((s1 - s2).abs() < 1e-12 * (1.0 + s1.abs()));
    }

    #[test]
    fn asymmetric_metric_is_rejected() {
        let n = Names::new(["x", "y"], Vec::<String>::new());
        let e = |s: &str| parse(s, &n).unwrap();
        let r = MetricTensor::new(
            Chart::surface(DomainBox::new()),
            vec![vec![e("1"), e("x")], vec![e("y"), e("1")]],
        );
        assert!(matches!(r, Err(Error::Invalid(_))));
    }

    #[test]
    fn degenerate_metric_is_singular() {
        let g = metric(Chart::surface(DomainBox::new()), &[&["1", "x"], &["x", "x^2"]]);
        let r = curvature_at(&g, &Point::new([("x", 0.5), ("y", 0.0)]));
        assert!(matches!(r, Err(Error::Singular { .. })));
    }

    #[test]
    fn pullback_by_identity_is_identity() {
        let g = walker(["1 + x^2", "x*y", "2"], ["0", "0"], "Lambda*v^2 + x^2*y");
        let c = curvature_at(&g, &with_lambda(&pt(0.1, 0.2, 0.3, 0.4), 1.0)).unwrap();
        assert_eq!(c.riemann_lower.pullback(&Mat::identity(4)), c.riemann_lower);
    }
}

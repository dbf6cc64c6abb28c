//! Killing vector fields, Killing one-forms of 2-metrics and bracket
//! closure of listed symmetry algebras.

use serde::Serialize;

use crate::chart::{Chart, MetricTensor};
use crate::domain::{DomainBox, Params, Sampler, Worst};
use crate::error::{Error, Result};
use crate::expr::{Expr, Program};
use crate::linalg::least_squares;

/// Components in the chart basis.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub components: Vec<Expr>,
    pub label: Option<String>,
}

impl VectorField {
    pub fn new(components: Vec<Expr>) -> Self {
        VectorField {
            components,
            label: None,
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn zero(n: usize) -> Self {
        VectorField::new(vec![Expr::zero(); n])
    }

    /// `∂_i`
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut c = vec![Expr::zero(); n];
        c[i] = Expr::one();
        VectorField::new(c)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }

    /// Label if set, else the component list.
    pub fn describe(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None => {
                let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
                format!("({})", parts.join(", "))
            }
        }
    }
}

fn check_dim(chart: &Chart, k: &VectorField) -> Result<()> {
    if k.dim() != chart.dim() {
        return Err(Error::Invalid(format!(
            "vector field has {} components, chart has {}",
            k.dim(),
            chart.dim()
        )));
    }
    Ok(())
}

/// `(L_K g)_ab = K^c ∂_c g_ab + g_cb ∂_a K^c + g_ac ∂_b K^c`, upper triangle
/// in row order.
pub fn lie_derivative(g: &MetricTensor, k: &VectorField) -> Result<Vec<Expr>> {
    check_dim(g.chart(), k)?;
    let coords = g.chart().coords();
    let n = coords.len();
    let dk: Vec<Vec<Expr>> = k
        .components
        .iter()
        .map(|kc| coords.iter().map(|c| kc.derivative(c)).collect())
        .collect();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        for b in a..n {
            let mut s = Expr::zero();
            for c in 0..n {
                s = s
                    + &k.components[c] * g.component(a, b).derivative(&coords[c])
                    + g.component(c, b) * &dk[c][a]
                    + g.component(a, c) * &dk[c][b];
            }
            out.push(s);
        }
    }
    Ok(out)
}

/// Worst over samples of `max_ab |(L_K g)_ab| / (1 + m)`, `m` the largest
/// intermediate magnitude at the point.
pub fn killing_residual(
    g: &MetricTensor,
    k: &VectorField,
    domain: &DomainBox,
    params: &Params,
    sampler: &Sampler,
) -> Result<Worst> {
    let lie = lie_derivative(g, k)?;
    let (vars, pnames) = names_of(&lie, g.chart());
    let prog = Program::compile(&lie, &vars, &pnames)?;
    let rows = sampler.map(domain, params, |p| {
        let (out, scale) = prog.eval_scaled(&p.slots(&vars, &pnames)?)?;
        let m = out.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        Ok((m / (1.0 + scale), p.clone()))
    })?;
    Ok(Worst::of(rows).expect("sampler yields at least one point"))
}

fn names_of(exprs: &[Expr], chart: &Chart) -> (Vec<String>, Vec<String>) {
    let mut vars: Vec<String> = chart.coords().to_vec();
    let mut params = Vec::new();
    for e in exprs {
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
    params.sort();
    (vars, params)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneFormCheck {
    pub holds: bool,
    pub residual: f64,
    pub witness: Option<Worst>,
}

/// `h^{ij} A_j` for `h = [h_xx, h_xy, h_yy]`.
pub fn raise(h: &[Expr; 3], a: &[Expr; 2]) -> [Expr; 2] {
    let det = &h[0] * &h[2] - h[1].powi(2);
    [
        (&h[2] * &a[0] - &h[1] * &a[1]) / &det,
        (&h[0] * &a[1] - &h[1] * &a[0]) / &det,
    ]
}

/// Whether `A^i = h^{ij}A_j` is a Killing field of the surface metric `h`
/// at every sampled `(x, y, u)`.
pub fn killing_oneform_check(
    h: &[Expr; 3],
    a: &[Expr; 2],
    domain: &DomainBox,
    params: &Params,
    sampler: &Sampler,
    tol: f64,
) -> Result<OneFormCheck> {
    let surface = MetricTensor::new(
        Chart::surface(domain.clone()),
        vec![vec![h[0].clone(), h[1].clone()], vec![h[1].clone(), h[2].clone()]],
    )?;
    let k = VectorField::new(raise(h, a).to_vec());
    let worst = killing_residual(&surface, &k, domain, params, sampler)?;
    let holds = worst.value <= tol;
    Ok(OneFormCheck {
        holds,
        residual: worst.value,
        witness: (!holds).then_some(worst),
    })
}

/// `[K₁, K₂]^a = K₁^b ∂_b K₂^a − K₂^b ∂_b K₁^a`
pub fn lie_bracket(k1: &VectorField, k2: &VectorField, coords: &[String]) -> Result<VectorField> {
    if k1.dim() != coords.len() || k2.dim() != coords.len() {
        return Err(Error::Invalid("vector field dimension does not match chart".into()));
    }
    let comps = (0..coords.len())
        .map(|a| {
            let mut s = Expr::zero();
            for (b, c) in coords.iter().enumerate() {
                s = s + &k1.components[b] * k2.components[a].derivative(c)
                    - &k2.components[b] * k1.components[a].derivative(c);
            }
            s
        })
        .collect();
    Ok(VectorField::new(comps))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldReport {
    pub field: String,
    pub residual: f64,
    pub killing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketReport {
    pub i: usize,
    pub j: usize,
    /// `[K_i, K_j] ≈ Σ_k c_k K_k`
    pub constants: Vec<f64>,
    pub fit_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgebraCertificate {
    pub dimension: usize,
    pub fields: Vec<FieldReport>,
    pub brackets: Vec<BracketReport>,
    /// Worst `[[K_i,K_j],K_l] + cyclic` computed from the fitted constants.
    pub jacobi_residual: f64,
    /// Worst `[K_i,K_j] + [K_j,K_i]` over samples.
    pub antisymmetry_residual: f64,
    pub all_killing: bool,
    pub closed: bool,
}

/// Certifies that `fields` are Killing for `g` and that their span is
/// closed under the bracket. Structure constants come from a least-squares
/// fit over the sampled points. Maximality of the algebra is not checked.
pub fn algebra_certificate(
    g: &MetricTensor,
    fields: &[VectorField],
    domain: &DomainBox,
    params: &Params,
    sampler: &Sampler,
    tol: f64,
) -> Result<AlgebraCertificate> {
    if fields.is_empty() {
        return Err(Error::Precondition("need at least one field".into()));
    }
    let coords = g.chart().coords().to_vec();
    let n = coords.len();
    let m = fields.len();
    let mut reports = Vec::with_capacity(m);
    for k in fields {
        let w = killing_residual(g, k, domain, params, sampler)?;
        reports.push(FieldReport {
            field: k.describe(),
            residual: w.value,
            killing: w.value <= tol,
        });
    }

    let mut pairs = Vec::new();
    let mut exprs: Vec<Expr> = fields.iter().flat_map(|k| k.components.clone()).collect();
    for i in 0..m {
        for j in i + 1..m {
            pairs.push((i, j));
            exprs.extend(lie_bracket(&fields[i], &fields[j], &coords)?.components);
            // the reversed bracket, for the antisymmetry check
            exprs.extend(lie_bracket(&fields[j], &fields[i], &coords)?.components);
        }
    }
    let (vars, pnames) = names_of(&exprs, g.chart());
    let prog = Program::compile(&exprs, &vars, &pnames)?;
    let values = sampler.map(domain, params, |p| prog.eval(&p.slots(&vars, &pnames)?))?;

    let field_at = |row: &[f64], k: usize, a: usize| row[k * n + a];
    let mut antisymmetry: f64 = 0.0;
    let mut brackets = Vec::with_capacity(pairs.len());
    for (idx, &(i, j)) in pairs.iter().enumerate() {
        let base = m * n + idx * 2 * n;
        let mut design = Vec::new();
        let mut rhs = Vec::new();
        for row in &values {
            for a in 0..n {
                design.push((0..m).map(|k| field_at(row, k, a)).collect::<Vec<f64>>());
                rhs.push(row[base + a]);
                let s = row[base + a] + row[base + n + a];
                antisymmetry = antisymmetry.max(s.abs() / (1.0 + row[base + a].abs()));
            }
        }
        let constants = least_squares(&design, &rhs, m)?;
        let mut fit: f64 = 0.0;
        for (d, b) in design.iter().zip(&rhs) {
            let approx: f64 = d.iter().zip(&constants).map(|(x, c)| x * c).sum();
            let mag = b
                .abs()
                .max(d.iter().zip(&constants).map(|(x, c)| (x * c).abs()).fold(0.0, f64::max));
            fit = fit.max((b - approx).abs() / (1.0 + mag));
        }
        brackets.push(BracketReport {
            i,
            j,
            constants,
            fit_residual: fit,
        });
    }

    let jacobi_residual = jacobi(m, &brackets);
    let all_killing = reports.iter().all(|r| r.killing);
    let closed = brackets.iter().all(|b| b.fit_residual <= tol) && jacobi_residual <= tol;
    Ok(AlgebraCertificate {
        dimension: m,
        fields: reports,
        brackets,
        jacobi_residual,
        antisymmetry_residual: antisymmetry,
        all_killing,
        closed,
    })
}

/// Jacobi identity of the fitted constants `c^k_ij`.
fn jacobi(m: usize, brackets: &[BracketReport]) -> f64 {
    let c = |i: usize, j: usize, k: usize| -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        let br = brackets
            .iter()
            .find(|r| r.i == a && r.j == b)
            .expect("all pairs fitted");
        sign * br.constants[k]
    };
    let mut worst: f64 = 0.0;
    let scale = 1.0
        + brackets
            .iter()
            .flat_map(|b| b.constants.iter())
            .fold(0.0, |s: f64, v| s.max(v.abs()))
            .powi(2);
    for i in 0..m {
        for j in 0..m {
            for l in 0..m {
                for out in 0..m {
                    let s: f64 = (0..m)
                        .map(|k| c(i, j, k) * c(k, l, out) + c(j, l, k) * c(k, i, out) + c(l, i, k) * c(k, j, out))
                        .sum();
                    worst = worst.max(s.abs() / scale);
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{LAMBDA, WALKER_COORDS};
    use crate::expr::{parse, Names};

    fn e(s: &str) -> Expr {
        parse(s, &Names::new(WALKER_COORDS, [LAMBDA])).unwrap()
    }

    fn plane() -> MetricTensor {
        MetricTensor::new(
            Chart::surface(
                DomainBox::new()
                    .with_interval("x", -1.0, 1.0)
                    .with_interval("y", -1.0, 1.0),
            ),
            vec![vec![e("1"), e("0")], vec![e("0"), e("1")]],
        )
        .unwrap()
    }

    fn field(c: &[&str]) -> VectorField {
        VectorField::new(c.iter().map(|s| e(s)).collect())
    }

    #[test]
    fn euclidean_plane_algebra() {
        let g = plane();
        let fields = [field(&["1", "0"]), field(&["0", "1"]), field(&["-y", "x"])];
        let cert = algebra_certificate(
            &g,
            &fields,
            g.chart().domain(),
            &Params::new(),
            &Sampler::new(50, 1),
            1e-9,
        )
        .unwrap();
        assert!(cert.all_killing && cert.closed, "{cert:?}");
        // [∂_x, −y∂_x + x∂_y] = ∂_y
        let b = cert.brackets.iter().find(|b| b.i == 0 && b.j == 2).unwrap();
        assert!((b.constants[1] - 1.0).abs() < 1e-10 && b.constants[0].abs() < 1e-10);
        assert!(cert.jacobi_residual < 1e-12);
    }

    #[test]
    fn dilation_is_not_killing() {
        let g = plane();
        let w = killing_residual(
            &g,
            &field(&["x", "y"]),
            g.chart().domain(),
            &Params::new(),
            &Sampler::new(20, 1),
        )
        .unwrap();
        assert!(w.value > 0.1);
        let z = killing_residual(
            &g,
            &VectorField::zero(2),
            g.chart().domain(),
            &Params::new(),
            &Sampler::new(20, 1),
        )
        .unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn open_span_is_detected() {
        let g = plane();
        // [∂_x, x∂_y] = ∂_y is outside the span
        let fields = [field(&["1", "0"]), field(&["0", "x"])];
        let cert = algebra_certificate(
            &g,
            &fields,
            g.chart().domain(),
            &Params::new(),
            &Sampler::new(30, 1),
            1e-9,
        )
        .unwrap();
        assert!(!cert.closed);
        assert!(cert.brackets[0].fit_residual > 1e-3);
    }

    #[test]
    fn rotation_one_form_on_sphere() {
        let h = [e("1"), e("0"), e("sin(x)^2")];
        let b = DomainBox::new()
            .with_interval("x", 0.4, 2.7)
            .with_interval("y", -1.0, 1.0);
        // A = sin²x dy is dual to ∂_y
        let ok = killing_oneform_check(
            &h,
            &[e("0"), e("sin(x)^2")],
            &b,
            &Params::new(),
            &Sampler::new(50, 1),
            1e-9,
        )
        .unwrap();
        assert!(ok.holds);
        let bad = killing_oneform_check(&h, &[e("0"), e("1")], &b, &Params::new(), &Sampler::new(50, 1), 1e-9).unwrap();
        assert!(!bad.holds && bad.witness.is_some());
    }

    #[test]
    fn bracket_is_antisymmetric() {
        let coords: Vec<String> = WALKER_COORDS.map(String::from).to_vec();
        let k1 = field(&["2*v", "x", "y", "-2*u"]);
        let k2 = field(&["0", "0", "1", "0"]);
        let b = lie_bracket(&k1, &k2, &coords).unwrap();
        assert_eq!(b.components[2], Expr::int(-1));
        let c = lie_bracket(&k2, &k1, &coords).unwrap();
        assert_eq!(c.components[2], Expr::one());
    }
}

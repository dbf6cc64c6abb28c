//! Command implementations behind the `walker-verify` binary.
//!
//! Each command returns an [`Output`] holding the same report as JSON, text
//! and CSV. Reports depend only on the configuration and seed.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::catalog::{self, CatalogEntry, NAMES};
use crate::chart::{curvature_at, with_lambda, WALKER_COORDS};
use crate::classify::{Classifier, PetrovType};
use crate::domain::{DomainBox, Params, Point, Sampler, Worst, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL};
use crate::dsl::{self, MetricFile};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gauge::{pullback_at, vshift_remove_h1, FlowTransform, Transform};
use crate::killing::{algebra_certificate, VectorField};
use crate::walker::{
    reduced_system_residuals, sampled_residual, sphere_h0_residual_gradient_form, Signature, WalkerMetric,
};

pub const REPORT_SCHEMA: u32 = 1;
/// Bound on the pullback gap reported by `gauge-demo`.
pub const PULLBACK_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
    Csv,
}

/// One axis of a classification grid: `var=lo:hi:n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub var: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.lo + step * i as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Grid> {
        let bad = |part: &str| Error::Invalid(format!("grid axis `{part}` is not var=lo:hi:n"));
        let mut axes: Vec<Axis> = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (var, range) = part.split_once('=').ok_or_else(|| bad(part))?;
            let fields: Vec<&str> = range.split(':').collect();
            let [lo, hi, n] = fields[..] else {
                return Err(bad(part));
            };
            let var = var.trim().to_string();
            if !WALKER_COORDS.contains(&var.as_str()) {
                return Err(Error::Invalid(format!("grid names unknown coordinate `{var}`")));
            }
            if axes.iter().any(|a| a.var == var) {
                return Err(Error::Invalid(format!("grid repeats `{var}`")));
            }
            let axis = Axis {
                var,
                lo: lo.trim().parse().map_err(|_| bad(part))?,
                hi: hi.trim().parse().map_err(|_| bad(part))?,
                n: n.trim().parse().map_err(|_| bad(part))?,
            };
            if axis.n == 0 || !(axis.lo <= axis.hi) {
                return Err(bad(part));
            }
            axes.push(axis);
        }
        Ok(Grid { axes })
    }
}

/// Catalog name or metric file.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Catalog(String),
    File(PathBuf),
}

impl Source {
    pub fn resolve(arg: &str) -> Result<Source> {
        if NAMES.contains(&arg) {
            Ok(Source::Catalog(arg.to_string()))
        } else if std::path::Path::new(arg).is_file() {
            Ok(Source::File(PathBuf::from(arg)))
        } else {
            Err(Error::UnknownEntry(arg.to_string()))
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: Source,
    /// `None` uses the metric's default.
    pub lambda: Option<f64>,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub format: Format,
    pub grid: Option<Grid>,
    /// Replaces the metric's Killing list.
    pub fields: Option<PathBuf>,
    pub exec: Exec,
}

impl RunConfig {
    pub fn new(source: Source) -> Self {
        RunConfig {
            source,
            lambda: None,
            samples: DEFAULT_SAMPLES,
            tol: DEFAULT_TOL,
            seed: DEFAULT_SEED,
            format: Format::Json,
            grid: None,
            fields: None,
            exec: Exec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Precondition("--samples must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Precondition("--tol must be positive".into()));
        }
        Ok(())
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(self.samples, self.seed).with_exec(self.exec)
    }
}

/// A report in every output format plus its verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub json: Value,
    pub text: String,
    pub csv: String,
    pub pass: bool,
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("reports serialize");
                s.push('\n');
                s
            }
            Format::Text => self.text.clone(),
            Format::Csv => self.csv.clone(),
        }
    }

    /// 0 on pass, 1 on residual failure.
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

/// Exit code for a command result: usage and domain errors map to 2.
pub fn exit_code(r: &Result<Output>) -> i32 {
    match r {
        Ok(o) => o.exit_code(),
        Err(_) => 2,
    }
}

/// A metric ready to run.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub file: MetricFile,
    pub entry: Option<CatalogEntry>,
    pub lambda: f64,
}

impl Loaded {
    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn walker(&self) -> &WalkerMetric {
        &self.file.walker
    }

    pub fn domain(&self) -> &DomainBox {
        self.file.walker.domain()
    }

    pub fn params(&self) -> Params {
        let mut p = self.file.params.clone();
        p.insert(crate::chart::LAMBDA.to_string(), self.lambda);
        p
    }
}

pub fn load(cfg: &RunConfig) -> Result<Loaded> {
    cfg.validate()?;
    let (file, entry) = match &cfg.source {
        Source::Catalog(name) => {
            let entry = catalog::get(name)?;
            (entry.file.clone(), Some(entry))
        }
        Source::File(path) => (dsl::load(path)?, None),
    };
    let lambda = cfg.lambda.unwrap_or(file.lambda());
    if let Some(e) = &entry {
        e.check_lambda(lambda)?;
    }
    Ok(Loaded { file, entry, lambda })
}

fn fmt_point(p: &Point) -> String {
    let parts: Vec<String> = p.coords().iter().map(|(k, v)| format!("{k}={v}")).collect();
    parts.join(" ")
}

#[derive(Serialize)]
struct PotentialReport {
    equation: &'static str,
    f: String,
    h0: String,
    f_residual: f64,
    h0_residual: f64,
    /// Sphere only: the gradient-norm form of the `H₀` equation.
    #[serde(skip_serializing_if = "Option::is_none")]
    h0_residual_gradient_form: Option<f64>,
}

/// Einstein, curvature-symmetry and trace residuals, the reduced system
/// when the metric is in `A = 0`, `H₁ = 0` form, and the potential
/// equations for catalog entries built from one.
pub fn cmd_check(cfg: &RunConfig) -> Result<Output> {
    let m = load(cfg)?;
    let s = cfg.sampler();
    let g = m.walker().assemble()?;
    let lambda = m.lambda;
    let params = m.params();
    let rows = s.map(m.domain(), &params, |p| {
        let c = curvature_at(&g, &with_lambda(p, lambda))?;
        let e = c.einstein_residual(lambda);
        let trace = (c.scalar - 4.0 * lambda).abs() / e.scale;
        Ok((e.relative, c.symmetry_residual(), trace, p.clone()))
    })?;
    let einstein = Worst::of(rows.iter().map(|r| (r.0, r.3.clone()))).expect("nonempty");
    let symmetry = rows.iter().fold(0.0, |a: f64, r| a.max(r.1));
    let trace = rows.iter().fold(0.0, |a: f64, r| a.max(r.2));
    let mut pass = einstein.value <= cfg.tol && symmetry <= cfg.tol && trace <= cfg.tol;

    let reduced = if !m.walker().has_a() && !m.walker().has_h1() && lambda != 0.0 {
        let r = reduced_system_residuals(m.walker(), lambda, &s)?;
        pass &= r.max() <= cfg.tol;
        Some(r.as_array())
    } else {
        None
    };

    let potential = match m.entry.as_ref().and_then(|e| e.potential.as_ref()) {
        Some(pp) => {
            let f = &pp.potential;
            let dom = m.domain();
            let f_residual = sampled_residual(&f.f_residual(), dom, lambda, &s)?.value;
            let h0_residual = sampled_residual(&f.h0_residual(&pp.h0), dom, lambda, &s)?.value;
            let gradient = match f.signature {
                Signature::Sphere => {
                    Some(sampled_residual(&sphere_h0_residual_gradient_form(&f.f, &pp.h0), dom, lambda, &s)?.value)
                }
                Signature::Hyperbolic => None,
            };
            pass &= f_residual <= cfg.tol && h0_residual <= cfg.tol;
            Some(PotentialReport {
                equation: match f.signature {
                    Signature::Sphere => "sphere",
                    Signature::Hyperbolic => "hyperbolic",
                },
                f: f.f.to_string(),
                h0: pp.h0.to_string(),
                f_residual,
                h0_residual,
                h0_residual_gradient_form: gradient,
            })
        }
        None => None,
    };

    let mut controls = Vec::new();
    if let Some(e) = &m.entry {
        for c in &e.controls {
            let gc = c.walker.assemble()?;
            let w = crate::chart::max_residual(&gc, lambda, m.domain(), &s)?;
            controls.push(json!({ "label": c.label, "einstein": w.value }));
        }
    }

    let json = json!({
        "schema": REPORT_SCHEMA,
        "command": "check",
        "metric": m.name(),
        "lambda": lambda,
        "seed": cfg.seed,
        "samples": cfg.samples,
        "tol": cfg.tol,
        "residuals": {
            "einstein": { "max": einstein.value, "witness": einstein.point.coords() },
            "symmetry": symmetry,
            "trace": trace,
            "reduced": reduced,
            "potential": potential,
        },
        "controls": controls,
        "pass": pass,
    });

    let mut text = format!(
        "check {} (Lambda = {lambda}, n = {}, seed = {})\n",
        m.name(),
        cfg.samples,
        cfg.seed
    );
    let _ = writeln!(
        text,
        "  einstein   {:e} at {}",
        einstein.value,
        fmt_point(&einstein.point)
    );
    let _ = writeln!(text, "  symmetry   {symmetry:e}");
    let _ = writeln!(text, "  trace      {trace:e}");
    let mut csv = String::from("quantity,value\n");
    let _ = writeln!(csv, "einstein,{}", einstein.value);
    let _ = writeln!(csv, "symmetry,{symmetry}");
    let _ = writeln!(csv, "trace,{trace}");
    if let Some(r) = reduced {
        let _ = writeln!(text, "  reduced    {r:?}");
        for (name, v) in ["poisson", "divergence", "trace_free", "surface_einstein"]
            .iter()
            .zip(r)
        {
            let _ = writeln!(csv, "reduced_{name},{v}");
        }
    }
    if let Some(p) = &potential {
        let _ = writeln!(text, "  f eq       {:e}", p.f_residual);
        let _ = writeln!(text, "  H0 eq      {:e}", p.h0_residual);
        let _ = writeln!(csv, "f_equation,{}", p.f_residual);
        let _ = writeln!(csv, "h0_equation,{}", p.h0_residual);
        if let Some(gf) = p.h0_residual_gradient_form {
            let _ = writeln!(text, "  H0 eq (gradient form) {gf:e}");
            let _ = writeln!(csv, "h0_equation_gradient_form,{gf}");
        }
    }
    for c in &controls {
        let _ = writeln!(
            text,
            "  control {} einstein {:e}",
            c["label"].as_str().unwrap_or(""),
            c["einstein"].as_f64().unwrap_or(f64::NAN)
        );
    }
    let _ = writeln!(text, "{}", if pass { "PASS" } else { "FAIL" });
    let _ = writeln!(csv, "pass,{pass}");
    Ok(Output { json, text, csv, pass })
}

/// Grid points: listed axes take their values, other coordinates sit at
/// the midpoint of the domain interval (0 when unbounded).
fn grid_points(grid: &Grid, domain: &DomainBox, params: &Params) -> Result<Vec<Point>> {
    for a in &grid.axes {
        if let Some((lo, hi)) = domain.interval(&a.var) {
            if a.lo < lo || a.hi > hi {
                return Err(Error::Precondition(format!(
                    "grid range {}..{} for {} leaves the domain {lo}..{hi}",
                    a.lo, a.hi, a.var
                )));
            }
        }
    }
    let axes: Vec<(String, Vec<f64>)> = WALKER_COORDS
        .iter()
        .map(|&c| match grid.axes.iter().find(|a| a.var == c) {
            Some(a) => (c.to_string(), a.values()),
            None => {
                let mid = domain.interval(c).map_or(0.0, |(lo, hi)| 0.5 * (lo + hi));
                (c.to_string(), vec![mid])
            }
        })
        .collect();
    let mut points = vec![Point::default().with_params(params)];
    for (var, values) in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.set_coord(var, v);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

fn default_grid(domain: &DomainBox) -> Grid {
    Grid {
        axes: WALKER_COORDS
            .iter()
            .filter_map(|&c| {
                domain.interval(c).map(|(lo, hi)| Axis {
                    var: c.to_string(),
                    lo,
                    hi,
                    n: 3,
                })
            })
            .collect(),
    }
}

/// `det T` and Petrov type on a grid, plus the sampled holonomy verdict.
pub fn cmd_classify(cfg: &RunConfig) -> Result<Output> {
    let m = load(cfg)?;
    let classifier = Classifier::new(m.walker())?.with_tol(cfg.tol);
    let params = m.params();
    let grid = cfg.grid.clone().unwrap_or_else(|| default_grid(m.domain()));
    let all = grid_points(&grid, m.domain(), &params)?;
    let (points, skipped): (Vec<Point>, Vec<Point>) = all.into_iter().partition(|p| m.domain().violated(p).is_none());
    let rows = classifier.classify_points(m.lambda, &points, cfg.exec)?;
    let verdict = classifier.holonomy_verdict(m.lambda, &cfg.sampler())?;
    let count = |t: PetrovType| rows.iter().filter(|r| r.petrov == t).count();
    let (n_ii, n_d) = (count(PetrovType::II), count(PetrovType::D));
    let all_negative = !rows.is_empty() && rows.iter().all(|r| r.t.det < 0.0);
    let all_degenerate = !rows.is_empty() && rows.iter().all(|r| r.t.max_abs() <= cfg.tol);
    let mut summary = vec![format!("{n_ii} type II, {n_d} type D")];
    if all_negative {
        summary.push("det T < 0 at all grid points".to_string());
    }
    if all_degenerate {
        summary.push("T = 0 at all grid points".to_string());
    }
    if !skipped.is_empty() {
        summary.push(format!(
            "{} grid points outside the domain constraints skipped",
            skipped.len()
        ));
    }
    summary.push(format!("holonomy: {}", verdict.holonomy));

    let json_rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "point": r.point.coords(),
                "det_t": r.t.det,
                "type": r.petrov.to_string(),
                "near_degenerate": r.near_degenerate,
            })
        })
        .collect();
    let json = json!({
        "schema": REPORT_SCHEMA,
        "command": "classify",
        "metric": m.name(),
        "lambda": m.lambda,
        "seed": cfg.seed,
        "samples": cfg.samples,
        "tol": cfg.tol,
        "rows": json_rows,
        "summary": {
            "type_ii": n_ii,
            "type_d": n_d,
            "skipped": skipped.len(),
            "det_t_negative_everywhere": all_negative,
            "holonomy": verdict,
            "lines": summary,
        },
        "pass": true,
    });
    let mut csv = String::from("v,x,y,u,det_t,type,near_degenerate\n");
    let mut text = format!("classify {} (Lambda = {})\n", m.name(), m.lambda);
    for r in &rows {
        let c = |n: &str| r.point.coord(n).unwrap_or(f64::NAN);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            c("v"),
            c("x"),
            c("y"),
            c("u"),
            r.t.det,
            r.petrov,
            r.near_degenerate
        );
        let _ = writeln!(
            text,
            "  v={:<8.4} x={:<8.4} y={:<8.4} u={:<8.4} det T={:<12.4e} {}{}",
            c("v"),
            c("x"),
            c("y"),
            c("u"),
            r.t.det,
            r.petrov,
            if r.near_degenerate { " (near threshold)" } else { "" }
        );
    }
    for line in &summary {
        let _ = writeln!(csv, "# {line}");
        let _ = writeln!(text, "{line}");
    }
    Ok(Output {
        json,
        text,
        csv,
        pass: true,
    })
}

/// Certifies the Killing list (or the fields of `--fields`).
pub fn cmd_killing(cfg: &RunConfig) -> Result<Output> {
    let m = load(cfg)?;
    let fields: Vec<VectorField> = match &cfg.fields {
        Some(path) => dsl::load_fields(path)?,
        None => m.file.killing.clone(),
    };
    let g = m.walker().assemble()?;
    let cert = algebra_certificate(&g, &fields, m.domain(), &m.params(), &cfg.sampler(), cfg.tol)?;
    let pass = cert.all_killing && cert.closed;
    let json = json!({
        "schema": REPORT_SCHEMA,
        "command": "killing",
        "metric": m.name(),
        "lambda": m.lambda,
        "seed": cfg.seed,
        "samples": cfg.samples,
        "tol": cfg.tol,
        "certificate": cert,
        "pass": pass,
    });
    let mut text = format!("killing {} (Lambda = {})\n", m.name(), m.lambda);
    let mut csv = String::from("field,residual,killing\n");
    for f in &cert.fields {
        let _ = writeln!(
            text,
            "  {:<24} residual {:e} {}",
            f.field,
            f.residual,
            if f.killing { "ok" } else { "NOT KILLING" }
        );
        let _ = writeln!(csv, "{:?},{},{}", f.field, f.residual, f.killing);
    }
    for b in &cert.brackets {
        let _ = writeln!(
            text,
            "  [K{}, K{}] = {:?} (fit residual {:e})",
            b.i, b.j, b.constants, b.fit_residual
        );
    }
    let _ = writeln!(text, "  jacobi {:e}", cert.jacobi_residual);
    let _ = writeln!(
        text,
        "{} field(s) {}",
        cert.dimension,
        if pass { "certified" } else { "NOT certified" }
    );
    let _ = writeln!(csv, "# closed,{}", cert.closed);
    Ok(Output { json, text, csv, pass })
}

/// Transformed entry whose pairing points at `original`.
fn partner(original: &str) -> Result<Option<CatalogEntry>> {
    for name in NAMES {
        let e = catalog::build(name)?;
        if e.pairing.as_ref().is_some_and(|p| p.original == original) {
            return Ok(Some(e));
        }
    }
    Ok(None)
}

/// Integrates the `A`-removing flow and compares it with the closed-form
/// transform when one is known.
pub fn cmd_gauge_demo(cfg: &RunConfig) -> Result<Output> {
    let m = load(cfg)?;
    let (source, target) = match &m.entry {
        Some(e) if e.pairing.is_some() => {
            let original = catalog::get(e.pairing.as_ref().expect("checked").original)?;
            (original.file.walker.clone(), Some(e.clone()))
        }
        Some(e) => (e.file.walker.clone(), partner(e.name())?),
        None => (m.walker().clone(), None),
    };
    let lambda = m.lambda;
    let mut notes = Vec::new();
    let source = if source.has_h1() {
        notes.push("H1 removed by the v-shift first".to_string());
        vshift_remove_h1(&source, lambda)?
    } else {
        source
    };
    if !source.has_a() {
        return Err(Error::Precondition(format!("{} already has A = 0", m.name())));
    }
    let u0 = target.as_ref().and_then(|t| t.pairing.as_ref()).map_or(0.0, |p| p.u0);
    let flow = FlowTransform::from_walker(&source, u0)?;
    let flow_t = Transform::Flow(flow.clone());
    let g_source = source.assemble()?;
    let params = m.params();
    let sample_domain = target.as_ref().map_or(source.domain().clone(), |t| t.domain().clone());
    let target_metric = match &target {
        Some(t) => Some(t.walker().assemble()?),
        None => None,
    };
    let rows = cfg.sampler().map(&sample_domain, &params, |p| {
        let (img, d) = flow_t.jacobian_at(p)?;
        let (xf, yf) = (img.coord("x").unwrap_or(f64::NAN), img.coord("y").unwrap_or(f64::NAN));
        let (px, py, pu) = (
            p.coord("x").unwrap_or(0.0),
            p.coord("y").unwrap_or(0.0),
            p.coord("u").unwrap_or(0.0),
        );
        let back = flow.integrate(xf, yf, pu, u0, p.params())?;
        let round_trip = (back.x - px).abs().max((back.y - py).abs());
        let mut row = json!({
            "point": p.coords(),
            "x_flow": xf,
            "y_flow": yf,
            "round_trip": round_trip,
        });
        if let (Some(t), Some(tm)) = (&target, &target_metric) {
            let closed = &t.pairing.as_ref().expect("target has pairing").to_original;
            let (ci, cd) = closed.jacobian_at(p)?;
            let (xc, yc) = (ci.coord("x").unwrap_or(f64::NAN), ci.coord("y").unwrap_or(f64::NAN));
            let direct = tm.metric_at(p)?;
            let pulled = pullback_at(&g_source, &flow_t, p)?;
            row["x_closed"] = json!(xc);
            row["y_closed"] = json!(yc);
            row["deviation"] = json!((xf - xc).abs().max((yf - yc).abs()));
            row["jacobian_deviation"] = json!(d.sub(&cd).max_abs());
            row["pullback_gap"] = json!(pulled.sub(&direct).max_abs() / (1.0 + direct.max_abs()));
        }
        Ok(row)
    })?;
    let max_of = |key: &str| rows.iter().filter_map(|r| r[key].as_f64()).fold(0.0, f64::max);
    let round_trip = max_of("round_trip");
    let mut summary = json!({ "round_trip": round_trip });
    let pass = if target.is_some() {
        let (dev, jac, gap) = (
            max_of("deviation"),
            max_of("jacobian_deviation"),
            max_of("pullback_gap"),
        );
        summary["max_deviation"] = json!(dev);
        summary["max_jacobian_deviation"] = json!(jac);
        summary["max_pullback_gap"] = json!(gap);
        dev <= cfg.tol && gap <= PULLBACK_TOL
    } else {
        round_trip <= cfg.tol
    };
    let json = json!({
        "schema": REPORT_SCHEMA,
        "command": "gauge-demo",
        "metric": m.name(),
        "source": source_name(&m, &target),
        "target": target.as_ref().map(|t| t.name().to_string()),
        "lambda": lambda,
        "u0": u0,
        "seed": cfg.seed,
        "samples": cfg.samples,
        "tol": cfg.tol,
        "notes": notes,
        "rows": rows,
        "summary": summary,
        "pass": pass,
    });
    let mut csv = String::from("x,y,u,x_flow,y_flow,x_closed,y_closed,deviation,round_trip\n");
    let mut text = format!("gauge-demo {} (Lambda = {lambda}, u0 = {u0})\n", m.name());
    for r in &rows {
        let f = |k: &str| r[k].as_f64().map_or(String::new(), |v| v.to_string());
        let c = |k: &str| r["point"][k].as_f64().map_or(String::new(), |v| v.to_string());
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            c("x"),
            c("y"),
            c("u"),
            f("x_flow"),
            f("y_flow"),
            f("x_closed"),
            f("y_closed"),
            f("deviation"),
            f("round_trip")
        );
    }
    for n in &notes {
        let _ = writeln!(text, "  note: {n}");
    }
    if let Some(map) = summary.as_object() {
        for (k, v) in map {
            let _ = writeln!(text, "  {k:<24} {:e}", v.as_f64().unwrap_or(f64::NAN));
            let _ = writeln!(csv, "# {k},{}", v);
        }
    }
    let _ = writeln!(text, "{}", if pass { "PASS" } else { "FAIL" });
    Ok(Output { json, text, csv, pass })
}

fn source_name(m: &Loaded, target: &Option<CatalogEntry>) -> String {
    match (target, &m.entry) {
        (Some(t), Some(e)) if t.name() == e.name() => t
            .pairing
            .as_ref()
            .map_or(m.name().to_string(), |p| p.original.to_string()),
        _ => m.name().to_string(),
    }
}

pub fn cmd_list() -> Result<Output> {
    let mut entries = Vec::new();
    let mut text = String::new();
    let mut csv = String::from("name,lambda,description\n");
    for name in NAMES {
        let e = catalog::build(name)?;
        let desc = e.file.description.clone().unwrap_or_default();
        let _ = writeln!(text, "{name:<22} Lambda = {:<5} {desc}", e.lambda());
        let _ = writeln!(csv, "{name},{},{desc:?}", e.lambda());
        entries.push(json!({
            "name": name,
            "lambda": e.lambda(),
            "lambda_rule": e.rule,
            "description": desc,
            "note": e.note,
        }));
    }
    let json = json!({ "schema": REPORT_SCHEMA, "command": "list", "entries": entries, "pass": true });
    Ok(Output {
        json,
        text,
        csv,
        pass: true,
    })
}

/// The metric in the file format.
pub fn cmd_export(cfg: &RunConfig) -> Result<String> {
    Ok(dsl::to_dsl(&load(cfg)?.file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(name: &str) -> RunConfig {
        let mut c = RunConfig::new(Source::resolve(name).unwrap());
        c.samples = 40;
        c
    }

    #[test]
    fn grid_parsing() {
        let g: Grid = "v=-1:1:5, x=0.3:2:2".parse().unwrap();
        assert_eq!(g.axes.len(), 2);
        assert_eq!(g.axes[0].values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!("v=1:0:3".parse::<Grid>().is_err());
        assert!("q=0:1:3".parse::<Grid>().is_err());
        assert!("v=0:1".parse::<Grid>().is_err());
        assert!("v=0:1:0".parse::<Grid>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = cfg("minkowski");
        c.samples = 0;
        assert!(load(&c).is_err());
        let mut c = cfg("minkowski");
        c.tol = 0.0;
        assert!(load(&c).is_err());
        assert!(Source::resolve("no-such-metric").is_err());
    }

    #[test]
    fn check_verdicts() {
        let mut c = cfg("example2");
        c.lambda = Some(-1.0);
        assert!(cmd_check(&c).unwrap().pass);
        let r = cmd_check(&cfg("ppwave-nonharmonic")).unwrap();
        assert!(!r.pass);
        assert!(r.json["residuals"]["einstein"]["witness"].is_object());
        let mut c = cfg("minkowski");
        c.lambda = Some(0.0);
        assert!(cmd_check(&c).unwrap().pass);
        let mut c = cfg("example1");
        c.lambda = Some(1.0);
        assert_eq!(exit_code(&cmd_check(&c)), 2);
    }

    #[test]
    fn classify_summaries() {
        let mut c = cfg("example2");
        c.grid = Some("v=-1:1:3,x=0.3:2:3,y=0.5:1:2,u=0:0:1".parse().unwrap());
        let r = cmd_classify(&c).unwrap();
        assert_eq!(r.json["summary"]["type_d"], 0);
        assert_eq!(r.json["rows"].as_array().unwrap().len(), 18);
        assert!(r.csv.contains("# det T < 0 at all grid points"));
        let r = cmd_classify(&cfg("product-decomposable")).unwrap();
        assert_eq!(r.json["summary"]["type_ii"], 0);
        assert_eq!(r.json["summary"]["holonomy"]["holonomy"], "decomposable");
        let mut c = cfg("example1");
        c.grid = Some("x=0:5:3".parse().unwrap());
        assert!(cmd_classify(&c).is_err());
        assert!(cmd_classify(&cfg("example1-original")).is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let a = cmd_check(&cfg("example3")).unwrap().render(Format::Json);
        let mut c = cfg("example3");
        c.exec = Exec::Serial;
        let b = cmd_check(&c).unwrap().render(Format::Json);
        assert_eq!(a, b);
        assert!(a.contains("\"schema\": 1"));
    }

    #[test]
    fn gauge_demo_matches_closed_form() {
        let r = cmd_gauge_demo(&cfg("example1-original")).unwrap();
        assert!(r.pass, "{}", r.text);
        assert_eq!(r.json["target"], "example1");
        assert!(cmd_gauge_demo(&cfg("minkowski")).is_err());
    }

    #[test]
    fn killing_lists_certify() {
        assert!(cmd_killing(&cfg("example3")).unwrap().pass);
    }
}

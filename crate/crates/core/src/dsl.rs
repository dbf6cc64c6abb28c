//! Metric definition files.
//!
//! ```toml
//! schema = 1
//! name = "ppwave"
//!
//! [chart]
//! coords = ["v", "x", "y", "u"]
//!
//! [params]
//! Lambda = 0.0
//!
//! [h]
//! xx = "1"
//! xy = "0"
//! yy = "1"
//!
//! [A]
//! x = "0"
//! y = "0"
//!
//! [H0]
//! expr = "x^2 - y^2"
//!
//! [domain]
//! x = [-1.0, 1.0]
//!
//! [[domain.constraint]]
//! name = "off axis"
//! expr = "x^2 + y^2"
//! margin = 0.01
//!
//! [[killing]]
//! label = "d_v"
//! v = "1"
//! x = "0"
//! y = "0"
//! u = "0"
//! ```
//!
//! `A` and `H1` default to zero. Expressions use the grammar of
//! [`crate::expr::parse`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chart::{LAMBDA, WALKER_COORDS};
use crate::domain::{DomainBox, Params};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr, Names};
use crate::killing::VectorField;
use crate::walker::{EinsteinAnsatz, WalkerMetric};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    schema: u32,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    chart: ChartDoc,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    h: HDoc,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    a: Option<ADoc>,
    #[serde(rename = "H0")]
    h0: ExprDoc,
    #[serde(rename = "H1", default, skip_serializing_if = "Option::is_none")]
    h1: Option<ExprDoc>,
    #[serde(default)]
    domain: DomainDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    killing: Vec<FieldDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartDoc {
    coords: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HDoc {
    xx: String,
    xy: String,
    yy: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ADoc {
    x: String,
    y: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExprDoc {
    expr: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct DomainDoc {
    #[serde(flatten)]
    intervals: BTreeMap<String, [f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    constraint: Vec<ConstraintDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintDoc {
    name: String,
    expr: String,
    #[serde(default)]
    margin: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldDoc {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    label: String,
    v: String,
    x: String,
    y: String,
    u: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldsDoc {
    #[serde(default)]
    params: BTreeMap<String, f64>,
    #[serde(default)]
    killing: Vec<FieldDoc>,
}

/// A parsed metric file.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricFile {
    pub name: String,
    pub description: Option<String>,
    /// Parameter defaults; always contains `Lambda`.
    pub params: Params,
    pub walker: WalkerMetric,
    pub killing: Vec<VectorField>,
}

impl MetricFile {
    pub fn lambda(&self) -> f64 {
        self.params[LAMBDA]
    }
}

fn names(params: &BTreeMap<String, f64>) -> Names {
    let mut p: Vec<String> = params.keys().cloned().collect();
    if !params.contains_key(LAMBDA) {
        p.push(LAMBDA.to_string());
    }
    Names::new(WALKER_COORDS, p)
}

fn expr(src: &str, what: &str, n: &Names) -> Result<Expr> {
    parse(src, n).map_err(|e| Error::Invalid(format!("{what}: {e}")))
}

fn field(d: &FieldDoc, n: &Names) -> Result<VectorField> {
    let what = |c: &str| format!("killing field `{}` component {c}", d.label);
    let comps = vec![
        expr(&d.v, &what("v"), n)?,
        expr(&d.x, &what("x"), n)?,
        expr(&d.y, &what("y"), n)?,
        expr(&d.u, &what("u"), n)?,
    ];
    let k = VectorField::new(comps);
    Ok(if d.label.is_empty() {
        k
    } else {
        k.labeled(d.label.clone())
    })
}

pub fn parse_metric(text: &str) -> Result<MetricFile> {
    let doc: Doc = toml::from_str(text).map_err(|e| Error::Invalid(format!("metric file: {e}")))?;
    if doc.schema != SCHEMA {
        return Err(Error::Unsupported(format!("schema {} (expected {SCHEMA})", doc.schema)));
    }
    if doc.chart.coords != WALKER_COORDS {
        return Err(Error::Unsupported(format!(
            "chart {:?}; only the Walker chart {WALKER_COORDS:?} is supported",
            doc.chart.coords
        )));
    }
    let n = names(&doc.params);
    let h = [
        expr(&doc.h.xx, "h.xx", &n)?,
        expr(&doc.h.xy, "h.xy", &n)?,
        expr(&doc.h.yy, "h.yy", &n)?,
    ];
    let a = match &doc.a {
        Some(a) => [expr(&a.x, "A.x", &n)?, expr(&a.y, "A.y", &n)?],
        None => [Expr::zero(), Expr::zero()],
    };
    let h0 = expr(&doc.h0.expr, "H0", &n)?;
    let h1 = match &doc.h1 {
        Some(e) => expr(&e.expr, "H1", &n)?,
        None => Expr::zero(),
    };
    let mut domain = DomainBox::new();
    for (var, [lo, hi]) in &doc.domain.intervals {
        if !WALKER_COORDS.contains(&var.as_str()) {
            return Err(Error::Invalid(format!("domain names unknown coordinate `{var}`")));
        }
        if !(lo <= hi) {
            return Err(Error::Invalid(format!("empty interval for `{var}`")));
        }
        domain.set_interval(var, *lo, *hi);
    }
    for c in &doc.domain.constraint {
        let e = expr(&c.expr, &format!("constraint `{}`", c.name), &n)?;
        domain = domain.with_constraint(&c.name, e, c.margin);
    }
    let walker = WalkerMetric::new(h, a, EinsteinAnsatz::new(h1, h0))?.with_domain(domain);
    let killing = doc.killing.iter().map(|d| field(d, &n)).collect::<Result<_>>()?;
    let mut params: Params = doc.params;
    params.entry(LAMBDA.to_string()).or_insert(0.0);
    Ok(MetricFile {
        name: doc.name,
        description: doc.description,
        params,
        walker,
        killing,
    })
}

/// Reads only the `[[killing]]` tables of a file (other metric sections are
/// rejected).
pub fn parse_fields(text: &str) -> Result<Vec<VectorField>> {
    let doc: FieldsDoc = toml::from_str(text).map_err(|e| Error::Invalid(format!("field file: {e}")))?;
    let n = names(&doc.params);
    doc.killing.iter().map(|d| field(d, &n)).collect()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<MetricFile> {
    parse_metric(&read(path)?)
}

pub fn load_fields(path: &Path) -> Result<Vec<VectorField>> {
    parse_fields(&read(path)?)
}

pub fn to_dsl(m: &MetricFile) -> String {
    let w = &m.walker;
    let s = |e: &Expr| e.to_string();
    let domain = w.domain();
    let doc = Doc {
        schema: SCHEMA,
        name: m.name.clone(),
        description: m.description.clone(),
        chart: ChartDoc {
            coords: WALKER_COORDS.map(String::from).to_vec(),
        },
        params: m.params.clone(),
        h: HDoc {
            xx: s(&w.h[0]),
            xy: s(&w.h[1]),
            yy: s(&w.h[2]),
        },
        a: w.has_a().then(|| ADoc {
            x: s(&w.a[0]),
            y: s(&w.a[1]),
        }),
        h0: ExprDoc { expr: s(&w.ansatz.h0) },
        h1: w.has_h1().then(|| ExprDoc { expr: s(&w.ansatz.h1) }),
        domain: DomainDoc {
            intervals: domain
                .intervals()
                .iter()
                .map(|i| (i.var.clone(), [i.lo, i.hi]))
                .collect(),
            constraint: domain
                .constraints()
                .iter()
                .map(|c| ConstraintDoc {
                    name: c.name.clone(),
                    expr: s(&c.expr),
                    margin: c.margin,
                })
                .collect(),
        },
        killing: m
            .killing
            .iter()
            .map(|k| FieldDoc {
                label: k.label.clone().unwrap_or_default(),
                v: s(&k.components[0]),
                x: s(&k.components[1]),
                y: s(&k.components[2]),
                u: s(&k.components[3]),
            })
            .collect(),
    };
    toml::to_string(&doc).expect("metric documents always serialize")
}

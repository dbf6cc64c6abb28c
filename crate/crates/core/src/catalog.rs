//! Built-in metrics: the worked examples in both coordinate presentations,
//! the Lewandowski Killing-form family and a few controls.
//!
//! Every entry is written in the metric file format and goes through
//! [`crate::dsl::parse_metric`]; [`get`] runs the entry's self-test before
//! returning it.

use std::fmt::Write as _;

use serde::Serialize;

use crate::chart::{max_residual, LAMBDA, WALKER_COORDS};
use crate::domain::{DomainBox, Params, Sampler, DEFAULT_SEED};
use crate::dsl::{parse_metric, to_dsl, MetricFile};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr, Names};
use crate::gauge::{ClosedFormTransform, Direction};
use crate::killing::{killing_residual, VectorField};
use crate::walker::{lewandowski_a, lewandowski_h, lewandowski_l, EinsteinAnsatz, PotentialFunction, WalkerMetric};

/// Points used by the registration self-test.
pub const SELF_TEST_SAMPLES: usize = 32;
/// Einstein residual bound for the self-test.
pub const SELF_TEST_TOL: f64 = 1e-7;

/// Which values of Λ an entry admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LambdaRule {
    Zero,
    Negative,
    Positive,
    NonZero,
}

impl LambdaRule {
    pub fn admits(self, lambda: f64) -> bool {
        match self {
            LambdaRule::Zero => lambda == 0.0,
            LambdaRule::Negative => lambda < 0.0,
            LambdaRule::Positive => lambda > 0.0,
            LambdaRule::NonZero => lambda != 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Expectation {
    Einstein,
    /// Negative control: the Einstein residual must be large.
    NotEinstein,
}

/// Link from a transformed entry to its original presentation.
#[derive(Debug, Clone)]
pub struct Pairing {
    pub original: &'static str,
    /// Old coordinates in terms of new ones; pulls the original back onto
    /// this entry.
    pub to_original: ClosedFormTransform,
    /// The map in the direction it was stated, when that is old-to-new.
    pub stated: Option<ClosedFormTransform>,
    /// Slice where the flow starts and the two `h` agree.
    pub u0: f64,
}

/// A potential `f` with its `H₀`, for the reduced equations.
#[derive(Debug, Clone)]
pub struct PotentialPair {
    pub potential: PotentialFunction,
    pub h0: Expr,
}

/// Alternative data kept for comparison; expected to fail.
#[derive(Debug, Clone)]
pub struct Control {
    pub label: &'static str,
    pub walker: WalkerMetric,
    /// Set when the control also carries a different `H₀` for `f`.
    pub potential: Option<PotentialPair>,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub file: MetricFile,
    pub rule: LambdaRule,
    pub expect: Expectation,
    /// Closed form of `det T` in the entry's coordinates.
    pub det_t: Option<Expr>,
    /// `det T < 0` is claimed everywhere.
    pub det_t_negative: bool,
    pub pairing: Option<Pairing>,
    pub potential: Option<PotentialPair>,
    pub controls: Vec<Control>,
    pub note: &'static str,
}

impl CatalogEntry {
    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn walker(&self) -> &WalkerMetric {
        &self.file.walker
    }

    pub fn domain(&self) -> &DomainBox {
        self.file.walker.domain()
    }

    pub fn killing(&self) -> &[VectorField] {
        &self.file.killing
    }

    /// Default Λ.
    pub fn lambda(&self) -> f64 {
        self.file.lambda()
    }

    pub fn check_lambda(&self, lambda: f64) -> Result<()> {
        if self.rule.admits(lambda) {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "{} needs Lambda {:?}, got {lambda}",
                self.name(),
                self.rule
            )))
        }
    }

    /// Parameters with Λ replaced.
    pub fn params(&self, lambda: f64) -> Params {
        let mut p = self.file.params.clone();
        p.insert(LAMBDA.to_string(), lambda);
        p
    }

    pub fn to_dsl(&self) -> String {
        to_dsl(&self.file)
    }

    /// Einstein expectation and listed Killing fields at the default Λ.
    pub fn self_test(&self) -> Result<()> {
        let lambda = self.lambda();
        let s = Sampler::new(SELF_TEST_SAMPLES, DEFAULT_SEED);
        let g = self.walker().assemble()?;
        let worst = max_residual(&g, lambda, self.domain(), &s)?;
        let ok = match self.expect {
            Expectation::Einstein => worst.value < SELF_TEST_TOL,
            Expectation::NotEinstein => worst.value > 1e-3,
        };
        if !ok {
            return Err(Error::Invalid(format!(
                "{}: Einstein residual {:e} contradicts {:?}",
                self.name(),
                worst.value,
                self.expect
            )));
        }
        let params = self.params(lambda);
        for k in self.killing() {
            let r = killing_residual(&g, k, self.domain(), &params, &s)?;
            if r.value > 1e-9 {
                return Err(Error::Invalid(format!(
                    "{}: listed field {} has Killing residual {:e}",
                    self.name(),
                    k.describe(),
                    r.value
                )));
            }
        }
        Ok(())
    }
}

pub const NAMES: [&str; 17] = [
    "minkowski",
    "ppwave-harmonic",
    "ppwave-nonharmonic",
    "plane-wave-rosen",
    "kerr-goldberg",
    "product-decomposable",
    "example1",
    "example1-original",
    "example2",
    "example2-original",
    "example3",
    "example3-original",
    "example4",
    "example4-original",
    "lewandowski-phi-1",
    "lewandowski-phi-z",
    "lewandowski-phi-z2",
];

pub fn list() -> &'static [&'static str] {
    &NAMES
}

/// Looks up and self-tests an entry.
pub fn get(name: &str) -> Result<CatalogEntry> {
    let entry = build(name)?;
    entry.self_test()?;
    Ok(entry)
}

/// Looks up an entry without running its self-test.
pub fn build(name: &str) -> Result<CatalogEntry> {
    match name {
        "minkowski" => minkowski(),
        "ppwave-harmonic" => ppwave("ppwave-harmonic", "x^2 - y^2", Expectation::Einstein),
        "ppwave-nonharmonic" => ppwave("ppwave-nonharmonic", "x^2 + y^2", Expectation::NotEinstein),
        "plane-wave-rosen" => plane_wave_rosen(),
        "kerr-goldberg" => kerr_goldberg(),
        "product-decomposable" => product_decomposable(),
        "example1" => example1(),
        "example1-original" => example1_original(),
        "example2" => example2(),
        "example2-original" => example2_original(),
        "example3" => example3(),
        "example3-original" => example3_original(),
        "example4" => example4(),
        "example4-original" => example4_original(),
        "lewandowski-phi-1" => lewandowski("lewandowski-phi-1", &[(1.0, 0.0)]),
        "lewandowski-phi-z" => lewandowski("lewandowski-phi-z", &[(0.0, 0.0), (1.0, 0.0)]),
        "lewandowski-phi-z2" => lewandowski("lewandowski-phi-z2", &[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]),
        _ => Err(Error::UnknownEntry(name.to_string())),
    }
}

fn e(src: &str) -> Expr {
    parse(src, &Names::new(WALKER_COORDS, [LAMBDA])).expect("catalog expressions parse")
}

const PI_MINUS: f64 = std::f64::consts::PI - 0.4;

/// Source text for one entry.
struct Doc<'a> {
    name: &'a str,
    description: &'a str,
    lambda: f64,
    h: [&'a str; 3],
    a: [&'a str; 2],
    h0: &'a str,
    h1: &'a str,
    x: (f64, f64),
    constraints: &'a [(&'a str, &'a str, f64)],
    killing: &'a [(&'a str, [&'a str; 4])],
}

impl Doc<'_> {
    fn text(&self) -> String {
        let mut t = String::new();
        let q = |s: &str| format!("{s:?}");
        let _ = writeln!(
            t,
            "schema = 1\nname = {}\ndescription = {}\n",
            q(self.name),
            q(self.description)
        );
        let _ = writeln!(t, "[chart]\ncoords = [\"v\", \"x\", \"y\", \"u\"]\n");
        let _ = writeln!(t, "[params]\nLambda = {:?}\n", self.lambda);
        let _ = writeln!(
            t,
            "[h]\nxx = {}\nxy = {}\nyy = {}\n",
            q(self.h[0]),
            q(self.h[1]),
            q(self.h[2])
        );
        let _ = writeln!(t, "[A]\nx = {}\ny = {}\n", q(self.a[0]), q(self.a[1]));
        let _ = writeln!(t, "[H0]\nexpr = {}\n", q(self.h0));
        let _ = writeln!(t, "[H1]\nexpr = {}\n", q(self.h1));
        let _ = writeln!(
            t,
            "[domain]\nv = [-1.0, 1.0]\nx = [{:?}, {:?}]\ny = [-1.0, 1.0]\nu = [-0.5, 0.5]\n",
            self.x.0, self.x.1
        );
        for (name, expr, margin) in self.constraints {
            let _ = writeln!(
                t,
                "[[domain.constraint]]\nname = {}\nexpr = {}\nmargin = {margin:?}\n",
                q(name),
                q(expr)
            );
        }
        for (label, c) in self.killing {
            let _ = writeln!(
                t,
                "[[killing]]\nlabel = {}\nv = {}\nx = {}\ny = {}\nu = {}\n",
                q(label),
                q(c[0]),
                q(c[1]),
                q(c[2]),
                q(c[3])
            );
        }
        t
    }

    fn file(&self) -> Result<MetricFile> {
        parse_metric(&self.text())
    }
}

fn plain(file: MetricFile, rule: LambdaRule, expect: Expectation, note: &'static str) -> CatalogEntry {
    CatalogEntry {
        file,
        rule,
        expect,
        det_t: None,
        det_t_negative: false,
        pairing: None,
        potential: None,
        controls: Vec::new(),
        note,
    }
}

const FLAT: [&str; 3] = ["1", "0", "1"];
const NO_A: [&str; 2] = ["0", "0"];
const HYPERBOLIC: [&str; 3] = ["1/(-Lambda*x^2)", "0", "1/(-Lambda*x^2)"];
const SPHERE: [&str; 3] = ["1/Lambda", "0", "sin(x)^2/Lambda"];
const D_V: (&str, [&str; 4]) = ("d_v", ["1", "0", "0", "0"]);
const D_X: (&str, [&str; 4]) = ("d_x", ["0", "1", "0", "0"]);
const D_Y: (&str, [&str; 4]) = ("d_y", ["0", "0", "1", "0"]);
const D_U: (&str, [&str; 4]) = ("d_u", ["0", "0", "0", "1"]);

fn minkowski() -> Result<CatalogEntry> {
    let file = Doc {
        name: "minkowski",
        description: "flat space in Walker form",
        lambda: 0.0,
        h: FLAT,
        a: NO_A,
        h0: "0",
        h1: "0",
        x: (-1.0, 1.0),
        constraints: &[],
        killing: &[D_V, D_X, D_Y, D_U],
    }
    .file()?;
    let mut entry = plain(file, LambdaRule::Zero, Expectation::Einstein, "flat control");
    entry.det_t = Some(Expr::zero());
    Ok(entry)
}

fn ppwave(name: &'static str, h0: &str, expect: Expectation) -> Result<CatalogEntry> {
    let file = Doc {
        name,
        description: "pp-wave: flat h, A = 0, v-independent H",
        lambda: 0.0,
        h: FLAT,
        a: NO_A,
        h0,
        h1: "0",
        x: (-1.0, 1.0),
        constraints: &[],
        killing: &[D_V, D_U],
    }
    .file()?;
    let note = match expect {
        Expectation::Einstein => "vacuum because H is harmonic in (x, y)",
        Expectation::NotEinstein => "negative control: H has nonzero flat Laplacian",
    };
    Ok(plain(file, LambdaRule::Zero, expect, note))
}

fn plane_wave_rosen() -> Result<CatalogEntry> {
    let file = Doc {
        name: "plane-wave-rosen",
        description: "vacuum plane wave in Rosen form, h = exp(2u) dx^2 + cos(u)^2 dy^2",
        lambda: 0.0,
        h: ["exp(2*u)", "0", "cos(u)^2"],
        a: NO_A,
        h0: "0",
        h1: "0",
        x: (-1.0, 1.0),
        constraints: &[],
        killing: &[D_V, D_X, D_Y],
    }
    .file()?;
    Ok(plain(
        file,
        LambdaRule::Zero,
        Expectation::Einstein,
        "standard Rosen-form plane wave; a''/a + b''/b = 0 with a = exp(u), b = cos(u)",
    ))
}

fn kerr_goldberg() -> Result<CatalogEntry> {
    let file = Doc {
        name: "kerr-goldberg",
        description: "vacuum Walker metric with flat h, A = A1 dx, H = -(d_x A1) v + H0",
        lambda: 0.0,
        h: FLAT,
        a: ["x*y", "0"],
        h0: "(x^4 - y^4)/12",
        h1: "-y",
        x: (-1.0, 1.0),
        constraints: &[],
        killing: &[D_U],
    }
    .file()?;
    Ok(plain(
        file,
        LambdaRule::Zero,
        Expectation::Einstein,
        "harmonic A1 = xy; H0 = (x^4 - y^4)/12 solves the remaining Poisson equation",
    ))
}

fn product_decomposable() -> Result<CatalogEntry> {
    let file = Doc {
        name: "product-decomposable",
        description: "product of a 2D Lorentzian space form and the hyperbolic plane, T = 0",
        lambda: -1.0,
        h: HYPERBOLIC,
        a: NO_A,
        h0: "0",
        h1: "0",
        x: (0.3, 2.0),
        constraints: &[],
        killing: &[
            D_Y,
            ("dilation_xy", ["0", "x", "y", "0"]),
            D_U,
            ("boost", ["v", "0", "0", "-u"]),
        ],
    }
    .file()?;
    let mut entry = plain(
        file,
        LambdaRule::Negative,
        Expectation::Einstein,
        "decomposable control",
    );
    entry.det_t = Some(Expr::zero());
    Ok(entry)
}

fn hyperbolic_potential(f: &str, h0: &str) -> PotentialPair {
    PotentialPair {
        potential: PotentialFunction::hyperbolic(e(f)).expect("f is v-independent"),
        h0: e(h0),
    }
}

fn sphere_potential(f: &str, h0: &str) -> PotentialPair {
    PotentialPair {
        potential: PotentialFunction::sphere(e(f)).expect("f is v-independent"),
        h0: e(h0),
    }
}

/// `walker` with `H₀` replaced.
fn with_h0(w: &WalkerMetric, h0: &str) -> WalkerMetric {
    let mut out = w.clone();
    out.ansatz = EinsteinAnsatz::new(w.ansatz.h1.clone(), e(h0));
    out
}

fn with_a(w: &WalkerMetric, a: [&str; 2]) -> WalkerMetric {
    let mut out = w.clone();
    out.a = [e(a[0]), e(a[1])];
    out
}

fn closed(map: [&str; 4], direction: Direction) -> ClosedFormTransform {
    ClosedFormTransform::new(map.map(e), direction).expect("catalog transforms have Walker shape")
}

fn example1_original() -> Result<CatalogEntry> {
    let file = Doc {
        name: "example1-original",
        description: "hyperbolic h, f = x^2, A = 2x dy, H0 = -Lambda x^4",
        lambda: -1.0,
        h: HYPERBOLIC,
        a: ["0", "2*x"],
        h0: "-Lambda*x^4",
        h1: "0",
        x: (0.3, 2.0),
        constraints: &[],
        killing: &[D_Y, D_U],
    }
    .file()?;
    let mut entry = plain(file, LambdaRule::Negative, Expectation::Einstein, "c(u) = 1");
    entry.potential = Some(hyperbolic_potential("x^2", "-Lambda*x^4"));
    Ok(entry)
}

fn example1() -> Result<CatalogEntry> {
    let file = Doc {
        name: "example1",
        description: "A = 0 form of example1-original, b(u) = u",
        lambda: -1.0,
        h: [
            "(36*Lambda^2*u^2*x^4 + 1)/(-Lambda*x^2)",
            "6*Lambda*u*x^2/(-Lambda*x^2)",
            "1/(-Lambda*x^2)",
        ],
        a: NO_A,
        h0: "3*Lambda*x^4",
        h1: "0",
        x: (0.3, 2.0),
        constraints: &[],
        killing: &[
            D_Y,
            ("scaling", ["2*v", "x", "y", "-2*u"]),
            ("shear", ["0", "0", "-2*Lambda*x^3", "1"]),
        ],
    }
    .file()?;
    let mut entry = plain(
        file,
        LambdaRule::Negative,
        Expectation::Einstein,
        "det T = -9 Lambda^4 x^4 (x^4 + v^2) is nonzero on v = 0, so the stated type D locus {v = 0} is not reproduced",
    );
    entry.det_t = Some(e("-9*Lambda^4*x^4*(x^4 + v^2)"));
    entry.pairing = Some(Pairing {
        original: "example1-original",
        to_original: closed(["v", "x", "y + 2*Lambda*u*x^3", "u"], Direction::NewToOld),
        stated: None,
        u0: 0.0,
    });
    Ok(entry)
}

const RHO2: &str = "(1 + 3*Lambda*u*x^3)";

fn example2_original() -> Result<CatalogEntry> {
    let file = Doc {
        name: "example2-original",
        description: "hyperbolic h, f = x^2 y, A = -x^2 dx + 2xy dy, H0 = -Lambda x^4 y^2",
        lambda: -1.0,
        h: HYPERBOLIC,
        a: ["-x^2", "2*x*y"],
        h0: "-Lambda*x^4*y^2",
        h1: "0",
        x: (0.3, 2.0),
        constraints: &[],
        killing: &[D_U],
    }
    .file()?;
    let mut entry = plain(
        file,
        LambdaRule::Negative,
        Expectation::Einstein,
        "H0 = -Lambda x^4 y^2 solves the hyperbolic H0 equation for f = x^2 y; the stated -Lambda x^4 y does not (control `stated-h0`)",
    );
    entry.potential = Some(hyperbolic_potential("x^2*y", "-Lambda*x^4*y^2"));
    entry.controls.push(Control {
        label: "stated-h0",
        walker: with_h0(entry.walker(), "-Lambda*x^4*y"),
        potential: Some(hyperbolic_potential("x^2*y", "-Lambda*x^4*y")),
    });
    Ok(entry)
}

fn example2() -> Result<CatalogEntry> {
    let rho = RHO2;
    let h = [
        format!("(36*Lambda^2*x^2*y^2*u^2 + 1/(x^2*{rho}^2))/(-Lambda)"),
        format!("6*Lambda*{rho}*y*u/(-Lambda)"),
        format!("{rho}^2/x^2/(-Lambda)"),
    ];
    let h0 = format!("Lambda*(3*x^4*y^2 + x^6/{rho}^2)");
    let file = Doc {
        name: "example2",
        description: "A = 0 form of example2-original",
        lambda: -1.0,
        h: [&h[0], &h[1], &h[2]],
        a: NO_A,
        h0: &h0,
        h1: "0",
        x: (0.3, 2.0),
        constraints: &[("rho = 1 + 3 Lambda u x^3 > 0.1", rho, 0.1)],
        killing: &[
            ("scaling", ["3*v", "x", "y", "-3*u"]),
            ("shear", ["0", "Lambda*x^4", "-2*Lambda*x^3*y", "1"]),
        ],
    }
    .file()?;
    let mut entry = plain(
        file,
        LambdaRule::Negative,
        Expectation::Einstein,
        "sampled on rho > 0.1, where the transform's fractional powers are real",
    );
    entry.det_t_negative = true;
    entry.pairing = Some(Pairing {
        original: "example2-original",
        to_original: closed(
            ["v", &format!("x*{rho}^(-1/3)"), &format!("y*{rho}^(2/3)"), "u"],
            Direction::NewToOld,
        ),
        stated: None,
        u0: 0.0,
    });
    Ok(entry)
}

const F3: &str = "ln(tan(x/2))*cos(x) + 1";
const SPHERE_X: (f64, f64) = (0.4, PI_MINUS);

fn example3_original() -> Result<CatalogEntry> {
    let h0 = format!("-Lambda*({F3})^2");
    let file = Doc {
        name: "example3-original",
        description: "round h, f = ln(tan(x/2)) cos x + 1, A = sin x f_x dy, H0 = -Lambda f^2",
        lambda: 1.0,
        h: SPHERE,
        a: ["0", "cos(x) - ln(tan(x/2))*sin(x)^2"],
        h0: &h0,
        h1: "0",
        x: SPHERE_X,
        constraints: &[],
        killing: &[D_Y, D_U],
    }
    .file()?;
    let mut entry = plain(
        file,
        LambdaRule::Positive,
        Expectation::Einstein,
        "A_y = sin x f_x = cos x - ln(tan(x/2)) sin^2 x (the stated ln cot form has the wrong sign, control `stated-a`); \
         H0 = -Lambda f^2 is Einstein and pulls back to the transformed H0, the stated Lambda f is not (control `stated-h0`)",
    );
    entry.potential = Some(sphere_potential(F3, &h0));
    entry.controls.push(Control {
        label: "stated-a",
        walker: with_a(entry.walker(), ["0", "cos(x) - ln(cot(x/2))*sin(x)^2"]),
        potential: None,
    });
    let stated_h0 = format!("Lambda*({F3})");
    entry.controls.push(Control {
        label: "stated-h0",
        walker: with_h0(entry.walker(), &stated_h0),
        potential: Some(sphere_potential(F3, &stated_h0)),
    });
    Ok(entry)
}

const SHIFT3: &str = "(ln(tan(x/2)) - cos(x)/sin(x)^2)";

fn example3() -> Result<CatalogEntry> {
    let file = Doc {
        name: "example3",
        description: "A = 0 form of example3-original",
        lambda: 1.0,
        h: ["1/Lambda + 4*Lambda*u^2/sin(x)^4", "2*u/sin(x)", "sin(x)^2/Lambda"],
        a: NO_A,
        h0: "-Lambda*(1/sin(x)^2 + ln(cot(x/2))^2)",
        h1: "0",
        x: SPHERE_X,
        constraints: &[],
        killing: &[
            D_Y,
            ("shear", ["0", "0", "Lambda*(cos(x)/sin(x)^2 - ln(tan(x/2)))", "1"]),
        ],
    }
    .file()?;
    let mut entry = plain(
        file,
        LambdaRule::Positive,
        Expectation::Einstein,
        "the two det T forms agree because (ln(cot(x/2)) cos x - 1)^2 = f^2",
    );
    entry.det_t = Some(e("-Lambda^4/sin(x)^4*(v^2 + (ln(cot(x/2))*cos(x) - 1)^2)"));
    entry.pairing = Some(Pairing {
        original: "example3-original",
        to_original: closed(["v", "x", &format!("y + Lambda*u*{SHIFT3}"), "u"], Direction::NewToOld),
        stated: Some(closed(
            ["v", "x", &format!("y - Lambda*u*{SHIFT3}"), "u"],
            Direction::OldToNew,
        )),
        u0: 0.0,
    });
    Ok(entry)
}

fn example4_original() -> Result<CatalogEntry> {
    let h0 = "Lambda*(-y^2*cos(x)^2 + ln(tan(x/2)))";
    let file = Doc {
        name: "example4-original",
        description: "round h, f = y cos x, A = -cot x dx - y sin^2 x dy",
        lambda: 1.0,
        h: SPHERE,
        a: ["-cot(x)", "-y*sin(x)^2"],
        h0,
        h1: "0",
        x: SPHERE_X,
        constraints: &[],
        killing: &[D_U],
    }
    .file()?;
    let mut entry = plain(
        file,
        LambdaRule::Positive,
        Expectation::Einstein,
        "Einstein; the pair (f, H0) satisfies the sphere H0 equation only in its gradient-norm form",
    );
    entry.potential = Some(sphere_potential("y*cos(x)", h0));
    Ok(entry)
}

const RHO4: &str = "(exp(-Lambda*u)*cos(x))";

fn example4() -> Result<CatalogEntry> {
    let r = RHO4;
    let h = [
        format!("exp(-2*Lambda*u)*sin(x)^2/(Lambda*(1 - {r}^2))"),
        "0".to_string(),
        format!("exp(2*Lambda*u)*(1 - {r}^2)/Lambda"),
    ];
    let h0 = format!("Lambda*(-y^2*exp(2*Lambda*u) - {r}^2/(1 - {r}^2) + ln((1 - {r})/(1 + {r}))/2)");
    let constraint = format!("1 - abs({r})");
    let file = Doc {
        name: "example4",
        description: "A = 0 form of example4-original",
        lambda: 1.0,
        h: [&h[0], &h[1], &h[2]],
        a: NO_A,
        h0: &h0,
        h1: "0",
        x: SPHERE_X,
        constraints: &[("|rho| <= 0.9", &constraint, 0.1)],
        killing: &[("shear", ["0", "-Lambda*cot(x)", "-Lambda*y", "1"])],
    }
    .file()?;
    let mut entry = plain(
        file,
        LambdaRule::Positive,
        Expectation::Einstein,
        "H is the pullback of example4-original; the stated H (-y^2 exp(-2 Lambda u), no rho^2 term) is not Einstein (control `stated-h`)",
    );
    entry.det_t = Some(e(&format!(
        "-Lambda^4*(4*y^2*cos(x)^2 + ({r} + 2*v)^2)/(4*(1 - {r}^2)^2)"
    )));
    entry.pairing = Some(Pairing {
        original: "example4-original",
        to_original: closed(
            ["v", "arccos(exp(-Lambda*u)*cos(x))", "y*exp(Lambda*u)", "u"],
            Direction::NewToOld,
        ),
        stated: Some(closed(
            ["v", "arccos(exp(Lambda*u)*cos(x))", "y*exp(-Lambda*u)", "u"],
            Direction::OldToNew,
        )),
        u0: 0.0,
    });
    let stated = format!("Lambda*(-y^2*exp(-2*Lambda*u) + ln((1 - {r})/(1 + {r}))/2)");
    entry.controls.push(Control {
        label: "stated-h",
        walker: with_h0(entry.walker(), &stated),
        potential: None,
    });
    Ok(entry)
}

fn lewandowski(name: &'static str, coeffs: &[(f64, f64)]) -> Result<CatalogEntry> {
    let eps = e("Lambda/abs(Lambda)");
    let a = lewandowski_a(coeffs, &eps)?.map(|x| x.to_string());
    let l = lewandowski_l(coeffs, &eps)?;
    let h = lewandowski_h().map(|x| x.to_string());
    let h0 = (-Expr::param(LAMBDA) * l.powi(2)).to_string();
    let file = Doc {
        name,
        description: "constant-curvature h in stereographic form with the Killing form A of a holomorphic phi",
        lambda: -1.0,
        h: [&h[0], &h[1], &h[2]],
        a: [&a[0], &a[1]],
        h0: &h0,
        h1: "0",
        x: (-0.6, 0.6),
        constraints: &[("inside the unit disc", "1 - x^2 - y^2", 0.1)],
        killing: &[D_U],
    }
    .file()?;
    let domain = file.walker.domain().clone().with_interval("y", -0.6, 0.6);
    let mut file = file;
    file.walker = file.walker.with_domain(domain);
    Ok(plain(
        file,
        LambdaRule::NonZero,
        Expectation::Einstein,
        "H0 = -Lambda L^2 with L the real potential of A",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_registers() {
        for name in NAMES {
            get(name).unwrap_or_else(|err| panic!("{name}: {err}"));
        }
        assert!(matches!(get("nope"), Err(Error::UnknownEntry(_))));
    }

    #[test]
    fn entries_round_trip_through_the_file_format() {
        for name in NAMES {
            let entry = build(name).unwrap();
            let again = parse_metric(&entry.to_dsl()).unwrap();
            assert_eq!(again, entry.file, "{name}");
        }
    }

    #[test]
    fn lambda_rules() {
        let e1 = build("example1").unwrap();
        assert!(e1.check_lambda(-2.0).is_ok());
        assert!(e1.check_lambda(1.0).is_err());
        assert!(build("minkowski").unwrap().check_lambda(0.0).is_ok());
        assert!(build("lewandowski-phi-z").unwrap().check_lambda(2.0).is_ok());
    }

    #[test]
    fn controls_fail() {
        let s = Sampler::new(32, 7);
        for name in ["example2-original", "example3-original", "example4"] {
            let entry = build(name).unwrap();
            for c in &entry.controls {
                let g = c.walker.assemble().unwrap();
                let r = max_residual(&g, entry.lambda(), entry.domain(), &s).unwrap();
                assert!(r.value > 1e-3, "{name}/{}: {}", c.label, r.value);
            }
        }
    }

    #[test]
    fn pairings_pull_back_exactly() {
        use crate::gauge::{pullback_at, Transform};
        for name in ["example1", "example2", "example3", "example4"] {
            let entry = build(name).unwrap();
            let pairing = entry.pairing.as_ref().unwrap();
            let original = build(pairing.original).unwrap().walker().assemble().unwrap();
            let target = entry.walker().assemble().unwrap();
            let t = Transform::Closed(pairing.to_original.clone());
            let params = entry.params(entry.lambda());
            let pts = Sampler::new(40, 5).points(entry.domain(), &params).unwrap();
            for p in &pts {
                let direct = target.metric_at(p).unwrap();
                let gap = pullback_at(&original, &t, p).unwrap().sub(&direct).max_abs();
                assert!(gap < 1e-9 * (1.0 + direct.max_abs()), "{name}: {gap}");
                if let Some(stated) = &pairing.stated {
                    let back = stated.apply(&pairing.to_original.apply(p).unwrap()).unwrap();
                    for c in WALKER_COORDS {
                        assert!((back.coord(c).unwrap() - p.coord(c).unwrap()).abs() < 1e-12, "{name}");
                    }
                }
            }
        }
    }
}

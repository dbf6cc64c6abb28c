//! Points, domain boxes and seeded sampling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::expr::{evaluate, Expr};

/// Default seed for every sampled check ("WALK" in ASCII).
pub const DEFAULT_SEED: u64 = 0x5741_4C4B;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_TOL: f64 = 1e-8;
/// Candidate draws per point index before sampling gives up.
pub const RETRY_CAP: usize = 1000;

pub type Params = BTreeMap<String, f64>;

/// Coordinate and parameter values.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Point {
    coords: BTreeMap<String, f64>,
    params: Params,
}

impl Point {
    pub fn new<'a>(coords: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Point {
            coords: coords.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            params: Params::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_params(mut self, params: &Params) -> Self {
        self.params.extend(params.iter().map(|(k, v)| (k.clone(), *v)));
        self
    }

    pub fn coord(&self, name: &str) -> Option<f64> {
        self.coords.get(name).copied()
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn set_coord(&mut self, name: &str, value: f64) {
        self.coords.insert(name.to_string(), value);
    }

    pub fn coords(&self) -> &BTreeMap<String, f64> {
        &self.coords
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Values laid out as `vars` then `params`, the slot order of a
    /// compiled [`crate::expr::Program`].
    pub fn slots(&self, vars: &[String], params: &[String]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(vars.len() + params.len());
        for v in vars {
            out.push(self.coord(v).ok_or_else(|| Error::Unassigned(v.clone()))?);
        }
        for p in params {
            out.push(self.param(p).ok_or_else(|| Error::Unassigned(p.clone()))?);
        }
        Ok(out)
    }

    /// Largest coordinate magnitude.
    pub fn max_abs_coord(&self) -> f64 {
        self.coords.values().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub var: String,
    pub lo: f64,
    pub hi: f64,
}

/// Named inequality `expr > margin`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub expr: Expr,
    pub margin: f64,
}

impl Constraint {
    pub fn holds(&self, p: &Point) -> bool {
        evaluate(&self.expr, p).is_ok_and(|v| v > self.margin)
    }
}

/// Closed intervals per variable plus excluded regions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DomainBox {
    intervals: Vec<Interval>,
    constraints: Vec<Constraint>,
}

impl DomainBox {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces the interval for `var`.
    pub fn with_interval(mut self, var: &str, lo: f64, hi: f64) -> Self {
        self.set_interval(var, lo, hi);
        self
    }

    pub fn set_interval(&mut self, var: &str, lo: f64, hi: f64) {
        assert!(lo <= hi, "empty interval for {var}");
        match self.intervals.iter_mut().find(|i| i.var == var) {
            Some(i) => {
                i.lo = lo;
                i.hi = hi;
            }
            None => self.intervals.push(Interval {
                var: var.to_string(),
                lo,
                hi,
            }),
        }
    }

    pub fn with_constraint(mut self, name: &str, expr: Expr, margin: f64) -> Self {
        self.constraints.push(Constraint {
            name: name.to_string(),
            expr,
            margin,
        });
        self
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn interval(&self, var: &str) -> Option<(f64, f64)> {
        self.intervals.iter().find(|i| i.var == var).map(|i| (i.lo, i.hi))
    }

    pub fn vars(&self) -> Vec<String> {
        self.intervals.iter().map(|i| i.var.clone()).collect()
    }

    /// First violated constraint, if any.
    pub fn violated(&self, p: &Point) -> Option<&Constraint> {
        self.constraints.iter().find(|c| !c.holds(p))
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.intervals
            .iter()
            .all(|i| p.coord(&i.var).is_some_and(|v| v >= i.lo && v <= i.hi))
            && self.violated(p).is_none()
    }

    /// Intersection: intervals are clipped, constraints accumulate.
    pub fn intersect(&self, other: &DomainBox) -> DomainBox {
        let mut out = self.clone();
        for i in &other.intervals {
            match out.interval(&i.var) {
                Some((lo, hi)) => out.set_interval(&i.var, lo.max(i.lo), hi.min(i.hi)),
                None => out.set_interval(&i.var, i.lo, i.hi),
            }
        }
        for c in &other.constraints {
            if !out.constraints.contains(c) {
                out.constraints.push(c.clone());
            }
        }
        out
    }

    /// The accepted sample for `index`.
    pub fn sample(&self, seed: u64, index: usize, params: &Params) -> Result<Point> {
        self.candidates(seed, index, params)
            .next()
            .ok_or(Error::SamplingExhausted {
                index,
                attempts: RETRY_CAP,
            })
    }

    /// Candidate stream for one point index, at most [`RETRY_CAP`] draws.
    /// The generator depends only on `(seed, index)`, never on the order in
    /// which indices are visited.
    pub fn candidates<'a>(&'a self, seed: u64, index: usize, params: &'a Params) -> impl Iterator<Item = Point> + 'a {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        (0..RETRY_CAP)
            .map(move |_| {
                let mut p = Point::default().with_params(params);
                for i in &self.intervals {
                    let t: f64 = rng.random();
                    p.set_coord(&i.var, i.lo + (i.hi - i.lo) * t);
                }
                p
            })
            .filter(|p| self.violated(p).is_none())
    }
}

/// Seeded sampling plan shared by every batch check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampler {
    pub n: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler::new(DEFAULT_SAMPLES, DEFAULT_SEED)
    }
}

impl Sampler {
    pub fn new(n: usize, seed: u64) -> Self {
        Sampler {
            n,
            seed,
            exec: Exec::default(),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn serial(self) -> Self {
        self.with_exec(Exec::Serial)
    }

    /// Applies `f` to `n` sampled points. A point whose evaluation hits a
    /// domain error is redrawn from the same index stream, up to
    /// [`RETRY_CAP`] draws. Results are in index order; on failure the error
    /// of the lowest failing index is returned.
    pub fn map<T, F>(&self, domain: &DomainBox, params: &Params, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&Point) -> Result<T> + Sync + Send,
    {
        if self.n == 0 {
            return Err(Error::Precondition("sample count must be at least 1".into()));
        }
        let results = self.exec.map(self.n, |index| {
            let mut last = None;
            for p in domain.candidates(self.seed, index, params) {
                match f(&p) {
                    Ok(v) => return Ok(v),
                    Err(e) if e.is_domain() => last = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(last.unwrap_or(Error::SamplingExhausted {
                index,
                attempts: RETRY_CAP,
            }))
        });
        results.into_iter().collect()
    }

    /// The sampled points themselves.
    pub fn points(&self, domain: &DomainBox, params: &Params) -> Result<Vec<Point>> {
        self.map(domain, params, |p| Ok(p.clone()))
    }
}

/// Worst value over a batch together with where it occurred.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Worst {
    pub value: f64,
    pub point: Point,
}

impl Worst {
    pub fn of(items: impl IntoIterator<Item = (f64, Point)>) -> Option<Worst> {
        items
            .into_iter()
            .fold(None, |acc: Option<Worst>, (value, point)| match acc {
                Some(w) if w.value >= value => Some(w),
                _ => Some(Worst { value, point }),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Names};

    fn sphere_box() -> DomainBox {
        let n = Names::new(["x", "y"], Vec::<String>::new());
        DomainBox::new()
            .with_interval("x", 0.01, 3.1)
            .with_interval("y", -1.0, 1.0)
            .with_constraint("sin(x) > 0.5", parse("sin(x)", &n).unwrap(), 0.5)
    }

    #[test]
    fn samples_respect_constraints_with_margin() {
        let b = sphere_box();
        let params = Params::new();
        for p in Sampler::new(500, 7).points(&b, &params).unwrap() {
            assert!(p.coord("x").unwrap().sin() > 0.5);
            assert!(b.contains(&p));
        }
    }

    #[test]
    fn sampling_is_deterministic_and_order_independent() {
        let b = sphere_box();
        let params = Params::new();
        let a = Sampler::new(200, 11).serial().points(&b, &params).unwrap();
        let c = Sampler::new(200, 11).points(&b, &params).unwrap();
        assert_eq!(a, c);
        let d = Sampler::new(200, 12).points(&b, &params).unwrap();
        assert_ne!(a, d);
        assert_eq!(b.sample(11, 17, &params).unwrap(), a[17]);
    }

    #[test]
    fn impossible_box_is_exhausted() {
        let n = Names::new(["x"], Vec::<String>::new());
        let b = DomainBox::new()
            .with_interval("x", 0.0, 1.0)
            .with_constraint("x > 2", parse("x", &n).unwrap(), 2.0);
        assert!(matches!(
            b.sample(0, 0, &Params::new()),
            Err(Error::SamplingExhausted { .. })
        ));
    }

    #[test]
    fn intersection_clips_and_merges() {
        let a = DomainBox::new().with_interval("x", 0.0, 2.0);
        let b = sphere_box();
        let c = a.intersect(&b);
        assert_eq!(c.interval("x"), Some((0.01, 2.0)));
        assert_eq!(c.interval("y"), Some((-1.0, 1.0)));
        assert_eq!(c.constraints().len(), 1);
    }

    #[test]
    fn zero_samples_is_rejected() {
        let r = Sampler::new(0, 0).points(&sphere_box(), &Params::new());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}

//! Complex expressions as pairs of real expressions, with `z = x + iy`.

use crate::chart::LAMBDA;
use crate::error::{Error, Result};
use crate::expr::Expr;

/// Highest supported degree of the holomorphic polynomial.
pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexExpr {
    pub re: Expr,
    pub im: Expr,
}

impl ComplexExpr {
    pub fn new(re: Expr, im: Expr) -> Self {
        ComplexExpr { re, im }
    }

    pub fn real(re: Expr) -> Self {
        ComplexExpr::new(re, Expr::zero())
    }

    pub fn constant(re: f64, im: f64) -> Self {
        ComplexExpr::new(number(re), number(im))
    }

    pub fn z() -> Self {
        ComplexExpr::new(Expr::var("x"), Expr::var("y"))
    }

    pub fn conj(&self) -> Self {
        ComplexExpr::new(self.re.clone(), -&self.im)
    }

    pub fn add(&self, o: &Self) -> Self {
        ComplexExpr::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &Self) -> Self {
        ComplexExpr::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &Self) -> Self {
        ComplexExpr::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }

    pub fn scale(&self, k: &Expr) -> Self {
        ComplexExpr::new(&self.re * k, &self.im * k)
    }

    /// Multiplication by `i`.
    pub fn times_i(&self) -> Self {
        ComplexExpr::new(-&self.im, self.re.clone())
    }

    /// `∂_z = ½(∂_x − i∂_y)`
    pub fn d_z(&self) -> Self {
        let half = Expr::rational(1, 2);
        ComplexExpr::new(
            &half * (self.re.derivative("x") + self.im.derivative("y")),
            &half * (self.im.derivative("x") - self.re.derivative("y")),
        )
    }

    /// `∂_z̄ = ½(∂_x + i∂_y)`
    pub fn d_zbar(&self) -> Self {
        let half = Expr::rational(1, 2);
        ComplexExpr::new(
            &half * (self.re.derivative("x") - self.im.derivative("y")),
            &half * (self.im.derivative("x") + self.re.derivative("y")),
        )
    }
}

fn number(c: f64) -> Expr {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        Expr::int(c as i64)
    } else {
        Expr::real(c)
    }
}

/// `φ(z) = Σ c_k z^k`
fn polynomial(coeffs: &[(f64, f64)]) -> ComplexExpr {
    let z = ComplexExpr::z();
    let mut power = ComplexExpr::constant(1.0, 0.0);
    let mut sum = ComplexExpr::constant(0.0, 0.0);
    for &(re, im) in coeffs {
        sum = sum.add(&ComplexExpr::constant(re, im).mul(&power));
        power = power.mul(&z);
    }
    sum
}

/// `L = 2 Re(φ ∂_z ln P₀ − ½ ∂_z φ)` with `2P₀² = (1 + ε z z̄)²`.
///
/// `coeffs[k]` is the coefficient of `z^k` as `(re, im)`; `eps` is the sign
/// of Λ as an expression.
pub fn lewandowski_l(coeffs: &[(f64, f64)], eps: &Expr) -> Result<Expr> {
    if coeffs.len() > MAX_DEGREE + 1 {
        return Err(Error::Unsupported(format!(
            "polynomial degree {} exceeds {MAX_DEGREE}",
            coeffs.len() - 1
        )));
    }
    let phi = polynomial(coeffs);
    let z = ComplexExpr::z();
    let zzbar = z.mul(&z.conj()).re;
    // the constant −½ ln 2 in ln P₀ drops out under ∂_z
    let ln_p0 = ComplexExpr::real((1 + eps * zzbar).ln());
    let inner = phi.mul(&ln_p0.d_z()).sub(&phi.d_z().scale(&Expr::rational(1, 2)));
    Ok(2 * inner.re)
}

/// One-form `A = W dz + W̄ dz̄` with `W = i ∂_z L`, returned as
/// `(A_x, A_y) = (2 Re W, −2 Im W)`.
pub fn lewandowski_a(coeffs: &[(f64, f64)], eps: &Expr) -> Result<[Expr; 2]> {
    let w = ComplexExpr::real(lewandowski_l(coeffs, eps)?).d_z().times_i();
    Ok([2 * w.re, -2 * w.im])
}

/// [`lewandowski_a`] with `ε` taken from a numeric Λ.
pub fn lewandowski_a_for(coeffs: &[(f64, f64)], lambda: f64) -> Result<[Expr; 2]> {
    if lambda == 0.0 {
        return Err(Error::Precondition("Lambda must be nonzero".into()));
    }
    lewandowski_a(coeffs, &Expr::int(lambda.signum() as i64))
}

/// `h = 4(dx² + dy²) / (|Λ|(1 + ε(x² + y²))²)` with `ε = Λ/|Λ|`, so that
/// `Ric(h) = Λh`.
pub fn lewandowski_h() -> [Expr; 3] {
    let lam = Expr::param(LAMBDA);
    let eps = &lam / lam.abs();
    let r2 = Expr::var("x").powi(2) + Expr::var("y").powi(2);
    let c = 4 / (lam.abs() * (1 + eps * r2).powi(2));
    [c.clone(), Expr::zero(), c]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Point;
    use crate::expr::evaluate;

    fn at(e: &Expr, x: f64, y: f64) -> f64 {
        evaluate(e, &Point::new([("x", x), ("y", y)]).with_param(LAMBDA, -1.0)).unwrap()
    }

    #[test]
    fn derivatives_of_holomorphic_functions() {
        let z = ComplexExpr::z();
        let z3 = z.mul(&z).mul(&z);
        // ∂_z z³ = 3z², ∂_z̄ z³ = 0
        let d = z3.d_z();
        let expect = z.mul(&z).scale(&Expr::int(3));
        for (x, y) in [(0.3, 0.2), (-1.1, 0.7)] {
            assert!((at(&d.re, x, y) - at(&expect.re, x, y)).abs() < 1e-12);
            assert!((at(&d.im, x, y) - at(&expect.im, x, y)).abs() < 1e-12);
            assert!(at(&z3.d_zbar().re, x, y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_potential_gives_zero_form() {
        let a = lewandowski_a(&[], &Expr::int(1)).unwrap();
        assert!(a[0].is_zero() && a[1].is_zero());
        let a = lewandowski_a(&[(0.0, 0.0)], &Expr::int(-1)).unwrap();
        assert_eq!(at(&a[0], 0.3, 0.1), 0.0);
    }

    #[test]
    fn degree_is_capped() {
        assert!(matches!(
            lewandowski_a(&[(1.0, 0.0); 6], &Expr::int(1)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn constant_potential_matches_hand_computation() {
        // φ = 1: L = 2εx/(1 + εr²), A = (L_y, −L_x)
        let a = lewandowski_a_for(&[(1.0, 0.0)], -1.0).unwrap();
        let (x, y) = (0.3, 0.2);
        let d = 1.0 - (x * x + y * y);
        let ly = -2.0 * x * (2.0 * y) / (d * d);
        let lx = -2.0 / d - 2.0 * x * (2.0 * x) / (d * d);
        assert!((at(&a[0], x, y) - ly).abs() < 1e-12);
        assert!((at(&a[1], x, y) + lx).abs() < 1e-12);
    }
}

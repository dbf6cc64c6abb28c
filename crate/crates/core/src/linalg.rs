//! Dense linear algebra for the 2x2 to 4x4 systems in this crate.

use crate::error::{Error, Result};

/// Condition estimates above this trigger a warning.
pub const CONDITION_WARNING: f64 = 1e12;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    n: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        Mat::from_fn(self.n, |i, j| (0..self.n).map(|k| self[(i, k)] * other[(k, j)]).sum())
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|k| self[(i, k)] * v[k]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        Mat::from_fn(self.n, |i, j| self[(i, j)] - other[(i, j)])
    }

    /// Determinant by partial-pivot elimination.
    pub fn det(&self) -> f64 {
        let mut a = self.clone();
        let mut det = 1.0;
        for col in 0..self.n {
            let piv = (col..self.n)
                .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
                .unwrap();
            if a[(piv, col)] == 0.0 {
                return 0.0;
            }
            if piv != col {
                a.swap_rows(piv, col);
                det = -det;
            }
            det *= a[(col, col)];
            for r in col + 1..self.n {
                let f = a[(r, col)] / a[(col, col)];
                for c in col..self.n {
                    a[(r, c)] -= f * a[(col, c)];
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.n {
            self.data.swap(a * self.n + c, b * self.n + c);
        }
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    ///
    /// A pivot below `1e-14 * max|a|` is reported as singular. Returns the
    /// inverse together with the infinity-norm condition estimate.
    pub fn inverse(&self) -> Result<(Mat, f64)> {
        let n = self.n;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
                .unwrap();
            let p = a[(piv, col)];
            if p.abs() < 1e-14 * scale {
                return Err(Error::Singular { pivot: p });
            }
            a.swap_rows(piv, col);
            inv.swap_rows(piv, col);
            let p = a[(col, col)];
            for c in 0..n {
                a[(col, c)] /= p;
                inv[(col, c)] /= p;
            }
            for r in 0..n {
                if r != col {
                    let f = a[(r, col)];
                    if f != 0.0 {
                        for c in 0..n {
                            a[(r, c)] -= f * a[(col, c)];
                            inv[(r, c)] -= f * inv[(col, c)];
                        }
                    }
                }
            }
        }
        let cond = self.norm_inf() * inv.norm_inf();
        if cond > CONDITION_WARNING {
            log::warn!("ill-conditioned matrix: condition estimate {cond:e}");
        }
        Ok((inv, cond))
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Least-squares solution of `rows * c = rhs` via the normal equations.
///
/// `rows` are the rows of the design matrix, each of length `k`. Returns the
/// coefficients; a rank-deficient design is reported as singular.
pub fn least_squares(rows: &[Vec<f64>], rhs: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    // column scaling keeps the normal equations reasonably conditioned
    let norms: Vec<f64> = (0..k)
        .map(|j| {
            rows.iter()
                .map(|r| r[j] * r[j])
                .sum::<f64>()
                .sqrt()
                .max(f64::MIN_POSITIVE)
        })
        .collect();
    let mut ata = Mat::zeros(k);
    let mut atb = vec![0.0; k];
    for (r, b) in rows.iter().zip(rhs) {
        for i in 0..k {
            let ri = r[i] / norms[i];
            atb[i] += ri * b;
            for j in 0..k {
                ata[(i, j)] += ri * r[j] / norms[j];
            }
        }
    }
    let (inv, _) = ata.inverse()?;
    Ok(inv.mul_vec(&atb).into_iter().zip(&norms).map(|(c, n)| c / n).collect())
}

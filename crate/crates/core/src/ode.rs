//! Adaptive Dormand–Prince 5(4) integration.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub atol: f64,
    pub rtol: f64,
    /// Initial step; `None` picks one from the interval length.
    pub h0: Option<f64>,
    /// Steps shorter than this abort the integration.
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            atol: 1e-10,
            rtol: 1e-10,
            h0: None,
            h_min: 1e-14,
            max_steps: 100_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (equal to the last row of `A`).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// Errors from `f` propagate unchanged; callers translate them into domain
/// exits where appropriate.
pub fn integrate<F>(mut f: F, t0: f64, y0: &[f64], t1: f64, s: &Settings) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut h = s.h0.unwrap_or(span.abs() / 100.0).min(span.abs()) * dir;
    let mut k = vec![vec![0.0; n]; 7];
    k[0] = f(t, &y)?;
    let mut stage = vec![0.0; n];
    for _ in 0..s.max_steps {
        if (t1 - t) * dir <= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        for i in 1..7 {
            for (j, st) in stage.iter_mut().enumerate() {
                *st = y[j] + h * (0..i).map(|m| A[i][m] * k[m][j]).sum::<f64>();
            }
            k[i] = f(t + C[i] * h, &stage)?;
        }
        // stage holds the fifth-order solution since row 6 of A equals B5
        let mut err: f64 = 0.0;
        for j in 0..n {
            let e = h * (0..7).map(|m| (B5[m] - B4[m]) * k[m][j]).sum::<f64>();
            let sc = s.atol + s.rtol * y[j].abs().max(stage[j].abs());
            err = err.max((e / sc).abs());
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&stage);
            // first-same-as-last
            k[0] = std::mem::take(&mut k[6]);
            k[6] = vec![0.0; n];
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() < s.h_min && (t1 - t) * dir > s.h_min {
            return Err(Error::StepUnderflow { u: t });
        }
    }
    Err(Error::StepUnderflow { u: t })
}

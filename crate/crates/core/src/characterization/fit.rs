use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// `F(m) = A r^m + B` fitted to mean survival probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub a: f64,
    pub r: f64,
    pub b: f64,
    /// Sum of squared residuals at the optimum.
    pub residual: f64,
    /// Standard deviation across sequences at each length.
    pub stddevs: Vec<f64>,
}

pub const FIT_START: [f64; 3] = [0.5, 0.99, 0.5];
const MAX_ITER: usize = 2000;

fn model(p: &[f64; 3], m: f64) -> f64 {
    p[0] * p[1].powf(m) + p[2]
}

fn sse(p: &[f64; 3], lengths: &[f64], y: &[f64]) -> f64 {
    lengths
        .iter()
        .zip(y)
        .map(|(&m, &v)| (model(p, m) - v).powi(2))
        .sum()
}

fn clamp(p: [f64; 3]) -> [f64; 3] {
    p.map(|v| v.clamp(0.0, 1.0))
}

/// Levenberg-Marquardt on `(A, r, B)` started at `A = 0.5, r = 0.99,
/// B = 0.5`, with every step projected back onto `[0, 1]^3`.
pub fn fit_decay(lengths: &[usize], survival: &[f64], stddevs: &[f64]) -> Result<FitResult> {
    if lengths.len() != survival.len() || lengths.len() < 3 {
        return Err(Error::InvalidSpec(
            "decay fit needs at least three (m, F) points".into(),
        ));
    }
    let ms: Vec<f64> = lengths.iter().map(|&m| m as f64).collect();
    let mut p = FIT_START;
    let mut cost = sse(&p, &ms, survival);
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = Vector3::<f64>::zeros();
        for (&m, &y) in ms.iter().zip(survival) {
            let rm = p[1].powf(m);
            let drm = if m == 0.0 {
                0.0
            } else {
                m * p[1].powf(m - 1.0)
            };
            let j = Vector3::new(rm, p[0] * drm, 1.0);
            let res = model(&p, m) - y;
            jtj += j * j.transpose();
            jtr += j * res;
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = jtj;
            for k in 0..3 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = clamp([p[0] + step[0], p[1] + step[1], p[2] + step[2]]);
            let trial_cost = sse(&trial, &ms, survival);
            if trial_cost <= cost {
                let delta = (0..3).map(|k| (trial[k] - p[k]).abs()).fold(0.0, f64::max);
                let drop = cost - trial_cost;
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                if delta < 1e-14 || drop <= 1e-30 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved || converged {
            converged = true;
            break;
        }
    }
    if !converged || !cost.is_finite() {
        return Err(Error::FitNonConvergence { residual: cost });
    }
    Ok(FitResult {
        a: p[0],
        r: p[1],
        b: p[2],
        residual: cost,
        stddevs: stddevs.to_vec(),
    })
}

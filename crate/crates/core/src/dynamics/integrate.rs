//! Time-ordered exponential of a linear ODE `y' = G(t) y`.
//!
//! Each interval of the breakpoint grid is split into `n` equal substeps and
//! advanced with the fourth-order Magnus exponential on two Gauss points,
//! `exp(h/2 (G1 + G2) + sqrt(3) h^2 / 12 [G2, G1])`. Substeps are doubled
//! until successive results agree to the requested tolerance. Breakpoints
//! are where the generator may have kinks (sample points of a linearly
//! interpolated schedule), so no substep ever straddles one.

use crate::error::{Error, Result};
use crate::quantum::{c, CMatrix};

const MAX_DOUBLINGS: u32 = 8;

#[derive(Debug, Clone)]
pub(crate) struct Evolution {
    pub final_state: CMatrix,
    /// State at every breakpoint when requested, including the start.
    pub snapshots: Vec<CMatrix>,
}

fn magnus_step<G: Fn(f64) -> CMatrix>(generator: &G, t0: f64, h: f64) -> CMatrix {
    let s = 3f64.sqrt() / 6.0;
    let g1 = generator(t0 + (0.5 - s) * h);
    let g2 = generator(t0 + (0.5 + s) * h);
    let comm = &g2 * &g1 - &g1 * &g2;
    let omega = (&g1 + &g2) * c(0.5 * h, 0.0) + comm * c(3f64.sqrt() * h * h / 12.0, 0.0);
    omega.exp()
}

fn sweep<G: Fn(f64) -> CMatrix>(
    generator: &G,
    grid: &[f64],
    initial: &CMatrix,
    substeps: usize,
    record: bool,
) -> (CMatrix, Vec<CMatrix>) {
    let mut y = initial.clone();
    let mut snaps = Vec::new();
    if record {
        snaps.reserve(grid.len());
        snaps.push(y.clone());
    }
    for w in grid.windows(2) {
        let h = (w[1] - w[0]) / substeps as f64;
        for s in 0..substeps {
            let step = magnus_step(generator, w[0] + s as f64 * h, h);
            y = step * y;
        }
        if record {
            snaps.push(y.clone());
        }
    }
    (y, snaps)
}

/// Evolves `initial` across `grid` (strictly increasing breakpoints) with
/// step halving until the Richardson error estimate of the fourth-order
/// scheme is at most `tol` in Frobenius norm.
pub(crate) fn evolve<G: Fn(f64) -> CMatrix>(
    generator: G,
    grid: &[f64],
    initial: &CMatrix,
    tol: f64,
    record: bool,
) -> Result<Evolution> {
    assert!(grid.len() >= 2, "need at least one interval");
    let mut n = 1usize;
    let (mut coarse, _) = sweep(&generator, grid, initial, n, false);
    let mut estimate = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        n *= 2;
        let (fine, fine_snaps) = sweep(&generator, grid, initial, n, record);
        estimate = (&fine - &coarse).norm() / 15.0;
        if estimate <= tol {
            return Ok(Evolution {
                final_state: fine,
                snapshots: fine_snaps,
            });
        }
        coarse = fine;
    }
    Err(Error::NonConvergence {
        estimate,
        tol,
        substeps: n,
    })
}

/// Uniform breakpoints `t0, t0 + h, ..., t1` with `n` intervals.
pub(crate) fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let h = (t1 - t0) / n as f64;
    (0..=n)
        .map(|k| if k == n { t1 } else { t0 + k as f64 * h })
        .collect()
}

//! Spectral radius of nonnegative matrices.
//!
//! Power iteration alone is unreliable here: influence matrices are often
//! reducible or periodic. The estimate comes from Gelfand's formula
//! `ρ(A) = lim ‖A^k‖^{1/k}` evaluated along `k = 2^m` by repeated squaring,
//! with the iterate renormalized at each squaring so that powers of a stable
//! matrix never underflow. A short power iteration from a positive vector then
//! supplies Collatz-Wielandt bounds `min (Ax)_i/x_i ≤ ρ ≤ max (Ax)_i/x_i`
//! which the estimate is clamped into, together with the max-row-sum bound.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FjError, Result};
use crate::network::SubstochasticMatrix;

pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-10;

/// Budget shared by the squaring loop and the power refinement.
pub const MAX_ITERATIONS: usize = 200;

const START_SEED: u64 = 0x5eed_f00d;

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `ρ(A)` of a substochastic matrix to absolute accuracy `tol`.
pub fn spectral_radius(a: &SubstochasticMatrix, tol: f64) -> Result<f64> {
    spectral_radius_nonnegative(a.matrix(), tol)
}

/// `ρ(M)` for any square nonnegative matrix.
pub fn spectral_radius_nonnegative(m: &DMatrix<f64>, tol: f64) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(FjError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(FjError::NoConvergence { iterations: 0 });
    }
    let row_bound = inf_norm(m);
    if row_bound == 0.0 {
        return Ok(0.0);
    }

    let Some(gelfand) = gelfand_estimate(m, row_bound, tol)? else {
        return Ok(0.0);
    };
    let (lower, upper) = collatz_wielandt_bounds(m, tol);
    let upper = upper.min(row_bound);
    Ok(gelfand.min(upper).max(lower).max(0.0))
}

/// `None` when some power of `m` is exactly zero.
fn gelfand_estimate(m: &DMatrix<f64>, norm: f64, tol: f64) -> Result<Option<f64>> {
    // A^(2^k) = exp(2^k * log_rate) * b with ‖b‖ = 1
    let mut b = m / norm;
    let mut log_rate = norm.ln();
    let mut prev = norm;
    let mut weight = 1.0;
    let mut settled = 0;
    // Before 2^m exceeds a few multiples of n, periodic and reducible
    // structure is not yet visible in the norm and successive estimates can
    // agree spuriously.
    let warmup = (4 * m.nrows()).next_power_of_two().trailing_zeros() as usize;
    for iter in 0..MAX_ITERATIONS {
        let sq = &b * &b;
        let nsq = inf_norm(&sq);
        if nsq == 0.0 {
            return Ok(None);
        }
        weight *= 0.5;
        log_rate += weight * nsq.ln();
        b = sq / nsq;
        let est = log_rate.exp();
        if !est.is_finite() {
            break;
        }
        if iter >= warmup && (est - prev).abs() < 0.25 * tol {
            settled += 1;
            if settled >= 2 {
                return Ok(Some(est));
            }
        } else {
            settled = 0;
        }
        prev = est;
    }
    Err(FjError::NoConvergence {
        iterations: MAX_ITERATIONS,
    })
}

fn collatz_wielandt_bounds(m: &DMatrix<f64>, tol: f64) -> (f64, f64) {
    let n = m.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x = DVector::from_fn(n, |_, _| rng.random_range(0.5..1.5));
    let mut lower: f64 = 0.0;
    let mut upper = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let y = m * &x;
        let (lo, hi) = y
            .iter()
            .zip(x.iter())
            .map(|(yi, xi)| yi / xi)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
        lower = lower.max(lo);
        upper = upper.min(hi);
        if upper - lower < tol {
            break;
        }
        let ny = y.amax();
        if ny == 0.0 {
            break;
        }
        // keep the iterate strictly positive so both bounds stay valid
        x = y.map(|v| (v / ny).max(f64::MIN_POSITIVE));
    }
    (lower, upper)
}

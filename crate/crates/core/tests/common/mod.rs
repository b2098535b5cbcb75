#![allow(dead_code)]

use std::collections::BTreeSet;

use fj_core::fixtures::random_stochastic;
use fj_core::{
    cfj_membership, is_schur_stable, DMatrix, DVector, FjModel, InfluenceMatrix, Stage,
    SubstochasticMatrix, SusceptibilityProfile, TvSchedule,
};
use rand::Rng;

/// Susceptibilities: each agent prejudiced with probability `p`, then
/// `λ ∈ [0, 1)`; otherwise `λ = 1`.
pub fn random_lambda<R: Rng>(rng: &mut R, n: usize, p: f64) -> SusceptibilityProfile {
    let v = (0..n)
        .map(|_| if rng.random_bool(p) { rng.random_range(0.0..1.0) } else { 1.0 })
        .collect();
    SusceptibilityProfile::new(v).unwrap()
}

pub fn random_model<R: Rng>(rng: &mut R, n: usize, density: f64, prejudiced: f64) -> FjModel {
    let w = random_stochastic(rng, n, density);
    let lambda = random_lambda(rng, n, prejudiced);
    let u = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    FjModel::new(w, lambda, u).unwrap()
}

/// Rejection-samples a Schur-stable model.
pub fn random_stable_model<R: Rng>(rng: &mut R, n: usize) -> FjModel {
    random_stable_model_with(rng, n, 1)
}

/// Rejection-samples a Schur-stable model with at least `min_prejudiced`
/// prejudiced agents.
pub fn random_stable_model_with<R: Rng>(rng: &mut R, n: usize, min_prejudiced: usize) -> FjModel {
    loop {
        let density = rng.random_range(0.1..0.6);
        let m = random_model(rng, n, density, 0.4);
        let count = m.lambda().as_slice().iter().filter(|&&l| l < 1.0).count();
        if count >= min_prejudiced && is_schur_stable(m.lambda(), m.w()).stable {
            return m;
        }
    }
}

pub fn random_substochastic<R: Rng>(rng: &mut R, n: usize) -> SubstochasticMatrix {
    let density = rng.random_range(0.05..0.8);
    let w = random_stochastic(rng, n, density);
    let mut m = w.into_inner();
    for mut row in m.row_iter_mut() {
        let scale = if rng.random_bool(0.2) { 1.0 } else { rng.random_range(0.0..1.0) };
        row *= scale;
    }
    SubstochasticMatrix::new(m).unwrap()
}

/// Row with `w_ij = a ≥ eps` at `j`, remaining mass on random other columns.
fn row_with_arc<R: Rng>(rng: &mut R, n: usize, j: usize, eps: f64) -> Vec<f64> {
    let mut row = vec![0.0; n];
    let a = if rng.random_bool(0.3) { 1.0 } else { rng.random_range(eps..=1.0) };
    row[j] = a;
    let rest = 1.0 - a;
    if rest > 0.0 {
        let others: Vec<usize> = (0..n).filter(|&c| c != j && rng.random_bool(0.5)).collect();
        if others.is_empty() {
            row[j] = 1.0;
        } else {
            let weights: Vec<f64> = others.iter().map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = weights.iter().sum();
            for (&c, w) in others.iter().zip(weights) {
                row[c] = rest * w / total;
            }
        }
    }
    row
}

/// Builds a chain of `s + 1` stages that belongs to the `(δ, ε, s)` chain
/// class by construction.
pub fn random_cfj_sequence<R: Rng>(rng: &mut R, n: usize, s: usize, delta: f64, eps: f64) -> Vec<Stage> {
    let mut seq = Vec::with_capacity(s + 1);
    let mut prev: BTreeSet<usize> = BTreeSet::new();
    for k in 0..=s {
        let mut lambda: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.25) {
                    rng.random_range(0.0..=(1.0 - delta))
                } else if rng.random_bool(0.5) {
                    1.0
                } else {
                    rng.random_range((1.0 - delta)..1.0).max(1.0 - delta + 1e-9).min(1.0)
                }
            })
            .collect();
        if s == 0 {
            // a one-stage chain needs every agent prejudiced at once
            lambda.iter_mut().for_each(|l| *l = l.min(1.0 - delta));
        }
        if k == 0 && !lambda.iter().any(|&l| l <= 1.0 - delta) {
            lambda[rng.random_range(0..n)] = rng.random_range(0.0..=(1.0 - delta));
        }
        let prejudiced: BTreeSet<usize> = (0..n).filter(|&i| lambda[i] <= 1.0 - delta).collect();

        let density = rng.random_range(0.1..0.5);
        let base = random_stochastic(rng, n, density);
        let mut rows: Vec<Vec<f64>> = base.matrix().row_iter().map(|r| r.iter().copied().collect()).collect();
        let mut current = prejudiced.clone();
        if k > 0 {
            let targets: Vec<usize> = prev.iter().copied().collect();
            let forced = rng.random_range(0..n);
            for i in 0..n {
                let last = k == s && !prejudiced.contains(&i);
                if last || i == forced || rng.random_bool(0.4) {
                    let j = targets[rng.random_range(0..targets.len())];
                    rows[i] = row_with_arc(rng, n, j, eps);
                }
            }
            current.extend((0..n).filter(|&i| targets.iter().any(|&j| rows[i][j] >= eps)));
        }
        let w = InfluenceMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j])).unwrap();
        seq.push(Stage::new(SusceptibilityProfile::new(lambda).unwrap(), w).unwrap());
        prev = current;
    }
    debug_assert!(cfj_membership(&seq, delta, eps).unwrap().member);
    seq
}

pub fn random_stage<R: Rng>(rng: &mut R, n: usize) -> Stage {
    let density = rng.random_range(0.1..0.6);
    let w = random_stochastic(rng, n, density);
    let p = rng.random_range(0.0..0.6);
    let lambda = random_lambda(rng, n, p);
    Stage::new(lambda, w).unwrap()
}

/// Period made of a chain-class window plus up to three arbitrary stages,
/// rotated by a random offset.
pub fn random_certified_period<R: Rng>(rng: &mut R, n: usize, s: usize, delta: f64, eps: f64) -> TvSchedule {
    let mut period = random_cfj_sequence(rng, n, s, delta, eps);
    for _ in 0..rng.random_range(0..=3) {
        period.push(random_stage(rng, n));
    }
    let shift = rng.random_range(0..period.len());
    period.rotate_left(shift);
    let prefix = (0..rng.random_range(0..3)).map(|_| random_stage(rng, n)).collect();
    TvSchedule::new(prefix, period).unwrap()
}

/// Finite schedule of `len` arbitrary stages.
pub fn random_finite_schedule<R: Rng>(rng: &mut R, n: usize, len: usize) -> TvSchedule {
    let stages = (0..len).map(|_| random_stage(rng, n)).collect();
    TvSchedule::new(stages, Vec::new()).unwrap()
}

/// Row deficiencies of `A·B` through an explicit triple loop.
pub fn product_deficiency_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    (0..n)
        .map(|i| {
            let mut sum = 0.0;
            for j in 0..n {
                let mut c = 0.0;
                for k in 0..n {
                    c += a[(i, k)] * b[(k, j)];
                }
                sum += c;
            }
            1.0 - sum
        })
        .collect()
}

/// Largest eigenvalue modulus via a real Schur decomposition; `None` when
/// the QR iteration does not converge within its budget.
pub fn eigen_radius(m: &DMatrix<f64>) -> Option<f64> {
    let schur = m.clone().try_schur(1e-14, 100_000)?;
    Some(schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max))
}

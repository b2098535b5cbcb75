//! Named networks and schedules: the tight-bound cycle family, the two
//! switching counterexamples, and seeded random generators.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::io::ScheduleFile;
use crate::network::{FjModel, InfluenceMatrix, Stage, SusceptibilityProfile};
use crate::schedule::TvSchedule;

/// Unit-weight cycle `0 ↦ 1 ↦ … ↦ n-1 ↦ 0` in which only agent 0 is
/// prejudiced, with `λ_00 = 1 - δ`. Here `ρ(ΛW) = (1 - δ)^{1/n}`, which is
/// exactly the bound for `s = n - 1`. Prejudice is `e_0`.
pub fn cycle_model(n: usize, delta: f64) -> Result<FjModel> {
    let w = DMatrix::from_fn(n, n, |i, j| if j == (i + 1) % n { 1.0 } else { 0.0 });
    let mut lambda = vec![1.0; n];
    lambda[0] = 1.0 - delta;
    let mut u = DVector::zeros(n);
    u[0] = 1.0;
    FjModel::new(InfluenceMatrix::new(w)?, SusceptibilityProfile::new(lambda)?, u)
}

fn stage(lambda: &[f64], rows: &[Vec<f64>]) -> Stage {
    Stage::new(
        SusceptibilityProfile::new(lambda.to_vec()).expect("valid fixture"),
        InfluenceMatrix::from_rows(rows).expect("valid fixture"),
    )
    .expect("valid fixture")
}

/// Three agents, `Λ ≡ diag(0, 1, 1)`, `W(k)` alternating between two
/// matrices. Every `Λ W(k)` is nilpotent, yet `x_1(2m) = x_1(0)` for all `m`
/// when `u_0 = 0`.
pub fn example1_schedule() -> TvSchedule {
    let lambda = [0.0, 1.0, 1.0];
    let even = stage(
        &lambda,
        &[vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
    );
    let odd = stage(
        &lambda,
        &[vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]],
    );
    TvSchedule::periodic(vec![even, odd]).expect("valid fixture")
}

/// Two agents, `W ≡ [[0, 1], [1, 0]]`, `Λ(k)` alternating between
/// `diag(0, 1)` and `diag(1, 0)`. With `u = 0`, `x_0(2m) = x_0(0)`.
pub fn example2_schedule() -> TvSchedule {
    let w = [vec![0.0, 1.0], vec![1.0, 0.0]];
    TvSchedule::periodic(vec![stage(&[0.0, 1.0], &w), stage(&[1.0, 0.0], &w)]).expect("valid fixture")
}

pub fn example1_file() -> ScheduleFile {
    ScheduleFile {
        schedule: example1_schedule(),
        u: DVector::zeros(3),
        x0: Some(DVector::from_row_slice(&[0.0, 1.0, 0.0])),
        labels: None,
    }
}

pub fn example2_file() -> ScheduleFile {
    ScheduleFile {
        schedule: example2_schedule(),
        u: DVector::zeros(2),
        x0: Some(DVector::from_row_slice(&[1.0, 0.0])),
        labels: None,
    }
}

/// Periodic switching between two stages, each held for `dwell` steps.
pub fn dwell_switching_schedule(a: &Stage, b: &Stage, dwell: usize) -> Result<TvSchedule> {
    let mut period = vec![a.clone(); dwell.max(1)];
    period.extend(std::iter::repeat_n(b.clone(), dwell.max(1)));
    TvSchedule::periodic(period)
}

/// Random row-stochastic matrix: every off-diagonal arc is present with
/// probability `density`, self-loops with probability one half, and each
/// row keeps at least one arc. Weights are uniform before normalization.
pub fn random_stochastic<R: Rng>(rng: &mut R, n: usize, density: f64) -> InfluenceMatrix {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let p = if i == j { 0.5 } else { density };
            if rng.random_bool(p.clamp(0.0, 1.0)) {
                m[(i, j)] = rng.random_range(0.05..1.0);
            }
        }
        if m.row(i).sum() == 0.0 {
            let j = rng.random_range(0..n);
            m[(i, j)] = 1.0;
        }
    }
    normalize(m)
}

fn normalize(mut m: DMatrix<f64>) -> InfluenceMatrix {
    for mut row in m.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    InfluenceMatrix::new_unchecked(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomNetworkOptions {
    /// Probability of each extra off-diagonal arc beyond the ring.
    pub density: f64,
    /// Probability that an agent is prejudiced.
    pub prejudiced_fraction: f64,
    /// Susceptibility range of prejudiced agents, upper end exclusive.
    pub lambda_range: (f64, f64),
}

impl Default for RandomNetworkOptions {
    fn default() -> Self {
        Self {
            density: 0.3,
            prejudiced_fraction: 0.3,
            lambda_range: (0.0, 0.95),
        }
    }
}

/// Random model whose influence graph contains the ring `i ↦ i+1`, so it is
/// strongly connected; at least one agent is prejudiced, hence the model is
/// Schur stable. Prejudices are uniform in `[-1, 1]`.
pub fn random_strongly_connected(n: usize, seed: u64, opts: &RandomNetworkOptions) -> Result<FjModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, (i + 1) % n)] = rng.random_range(0.05..1.0);
        for j in 0..n {
            if m[(i, j)] == 0.0 && rng.random_bool(opts.density.clamp(0.0, 1.0)) {
                m[(i, j)] = rng.random_range(0.05..1.0);
            }
        }
    }
    let w = normalize(m);
    let (lo, hi) = opts.lambda_range;
    let mut lambda: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random_bool(opts.prejudiced_fraction.clamp(0.0, 1.0)) {
                rng.random_range(lo..hi)
            } else {
                1.0
            }
        })
        .collect();
    if n > 0 && lambda.iter().all(|&l| l == 1.0) {
        let i = rng.random_range(0..n);
        lambda[i] = rng.random_range(lo..hi);
    }
    let u = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    FjModel::new(w, SusceptibilityProfile::new(lambda)?, u)
}

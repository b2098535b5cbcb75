//! Opinion trajectories of stationary and time-varying models, the steady
//! state `x∞ = Vu` with `V = (I - ΛW)⁻¹(I - Λ)`, and consensus/containment
//! checks.
//!
//! With `u = e_j`, `x∞` is the `j`-th *column* of `V`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{FjError, Result};
use crate::graph::prejudiced_set;
use crate::network::{FjModel, Stage};
use crate::schedule::TvSchedule;
use crate::stability::is_schur_stable;

/// Condition number above which `steady_state` logs a warning.
pub const CONDITION_WARNING: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub max_steps: usize,
    /// Stop once `‖x(k+1) - x(k)‖_∞ < conv_tol`. Zero runs all steps.
    pub conv_tol: f64,
    /// States kept before the record is thinned by doubling its stride.
    pub storage_cap: usize,
    /// Longest period looked for in a non-converged tail.
    pub max_period: usize,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            max_steps: 100_000,
            conv_tol: 1e-10,
            storage_cap: 10_000,
            max_period: 64,
        }
    }
}

/// Recorded states of a run. Early on every state is kept; past the storage
/// cap the record is thinned, always keeping `x(0)` and the final state.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionTrajectory {
    /// Step index of each recorded state.
    pub steps: Vec<usize>,
    pub states: Vec<DVector<f64>>,
    /// Number of update steps performed.
    pub total_steps: usize,
    pub converged: bool,
    pub limit: Option<DVector<f64>>,
    /// Period of an exactly repeating (within tolerance) non-converged tail.
    pub period: Option<usize>,
}

impl OpinionTrajectory {
    pub fn n(&self) -> usize {
        self.states.first().map_or(0, DVector::len)
    }

    pub fn initial(&self) -> &DVector<f64> {
        &self.states[0]
    }

    pub fn last(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory holds x(0)")
    }

    pub fn state_at(&self, k: usize) -> Option<&DVector<f64>> {
        self.steps.binary_search(&k).ok().map(|i| &self.states[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &DVector<f64>)> {
        self.steps.iter().copied().zip(self.states.iter())
    }
}

struct Recorder {
    cap: usize,
    stride: usize,
    steps: Vec<usize>,
    states: Vec<DVector<f64>>,
    recent: VecDeque<DVector<f64>>,
    recent_cap: usize,
}

impl Recorder {
    fn new(cap: usize, max_period: usize) -> Self {
        Self {
            cap: cap.max(2),
            stride: 1,
            steps: Vec::new(),
            states: Vec::new(),
            recent: VecDeque::new(),
            recent_cap: 2 * max_period + 1,
        }
    }

    fn record(&mut self, k: usize, x: &DVector<f64>) {
        if self.recent.len() == self.recent_cap {
            self.recent.pop_front();
        }
        self.recent.push_back(x.clone());
        if !k.is_multiple_of(self.stride) {
            return;
        }
        self.steps.push(k);
        self.states.push(x.clone());
        if self.steps.len() > self.cap {
            self.stride *= 2;
            let stride = self.stride;
            let mut keep = self.steps.iter().map(|&s| s % stride == 0);
            self.states.retain(|_| keep.next().unwrap());
            self.steps.retain(|&s| s % stride == 0);
        }
    }

    /// Smallest `p` such that the last `2p` states repeat with period `p`.
    fn detect_period(&self, max_period: usize, tol: f64) -> Option<usize> {
        let len = self.recent.len();
        (1..=max_period).find(|&p| {
            2 * p <= len
                && (0..p).all(|i| {
                    let a = &self.recent[len - 1 - i];
                    let b = &self.recent[len - 1 - i - p];
                    (a - b).amax() <= tol
                })
        })
    }

    fn finish(mut self, k: usize, x: DVector<f64>, converged: bool, max_period: usize, tol: f64) -> OpinionTrajectory {
        let period = if converged {
            None
        } else {
            self.detect_period(max_period, tol)
        };
        if self.steps.last() != Some(&k) {
            self.steps.push(k);
            self.states.push(x.clone());
        }
        OpinionTrajectory {
            steps: self.steps,
            states: self.states,
            total_steps: k,
            converged,
            limit: converged.then_some(x),
            period,
        }
    }
}

fn check_len(expected: usize, v: &DVector<f64>) -> Result<()> {
    if v.len() != expected {
        return Err(FjError::DimensionMismatch {
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

// xᵢ⁺ = λᵢ Σⱼ wᵢⱼ xⱼ + (1 - λᵢ) uᵢ
fn apply(stage: &Stage, u: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    let wx = stage.w().matrix() * x;
    let lambda = stage.lambda();
    DVector::from_fn(x.len(), |i, _| {
        let l = lambda.get(i);
        l * wx[i] + (1.0 - l) * u[i]
    })
}

/// One update `ΛW x + (I - Λ) u`. Agents with `λ_ii = 0` land exactly on
/// their prejudice.
pub fn step(stage: &Stage, u: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(stage.n(), u)?;
    check_len(stage.n(), x)?;
    Ok(apply(stage, u, x))
}

/// Iterates the stationary model from `x0` until successive states differ by
/// less than `conv_tol` or `max_steps` is reached.
pub fn simulate(model: &FjModel, x0: &DVector<f64>, opts: &SimulationOptions) -> Result<OpinionTrajectory> {
    check_len(model.n(), x0)?;
    let mut rec = Recorder::new(opts.storage_cap, opts.max_period);
    let mut x = x0.clone();
    rec.record(0, &x);
    let mut converged = false;
    let mut k = 0;
    while k < opts.max_steps {
        let next = apply(model.stage(), model.u(), &x);
        let diff = (&next - &x).amax();
        x = next;
        k += 1;
        rec.record(k, &x);
        if diff < opts.conv_tol {
            converged = true;
            break;
        }
    }
    Ok(rec.finish(k, x, converged, opts.max_period, opts.conv_tol))
}

/// Runs exactly `steps` updates of the time-varying model. `converged` is
/// set when the last update moved the state by less than `conv_tol`.
pub fn tv_simulate(
    schedule: &TvSchedule,
    x0: &DVector<f64>,
    u: &DVector<f64>,
    steps: usize,
) -> Result<OpinionTrajectory> {
    tv_simulate_with(schedule, x0, u, steps, &SimulationOptions::default())
}

pub fn tv_simulate_with(
    schedule: &TvSchedule,
    x0: &DVector<f64>,
    u: &DVector<f64>,
    steps: usize,
    opts: &SimulationOptions,
) -> Result<OpinionTrajectory> {
    check_len(schedule.n(), x0)?;
    check_len(schedule.n(), u)?;
    let mut rec = Recorder::new(opts.storage_cap, opts.max_period);
    let mut x = x0.clone();
    rec.record(0, &x);
    let mut last_diff = f64::INFINITY;
    for k in 0..steps {
        let stage = schedule.stage(k).ok_or(FjError::ScheduleExhausted { step: k })?;
        let next = apply(stage, u, &x);
        last_diff = (&next - &x).amax();
        x = next;
        rec.record(k + 1, &x);
    }
    let converged = steps > 0 && last_diff < opts.conv_tol;
    Ok(rec.finish(steps, x, converged, opts.max_period, opts.conv_tol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub x_inf: DVector<f64>,
    /// `V = (I - ΛW)⁻¹(I - Λ)`.
    pub v: DMatrix<f64>,
    /// 1-norm condition number of `I - ΛW`.
    pub condition: f64,
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `(I - ΛW) x∞ = (I - Λ) u` by LU with partial pivoting.
pub fn steady_state(model: &FjModel) -> Result<SteadyState> {
    if !is_schur_stable(model.lambda(), model.w()).stable {
        return Err(FjError::NotSchurStable);
    }
    let n = model.n();
    let m = DMatrix::identity(n, n) - model.system_matrix().matrix();
    let gap = DVector::from_fn(n, |i, _| 1.0 - model.lambda().get(i));
    let lu = m.clone().lu();
    let inv = lu.try_inverse().ok_or(FjError::SingularSystem)?;
    let x_inf = lu
        .solve(&gap.component_mul(model.u()))
        .ok_or(FjError::SingularSystem)?;
    let mut v = inv.clone();
    for (j, mut col) in v.column_iter_mut().enumerate() {
        col *= gap[j];
    }
    let condition = one_norm(&m) * one_norm(&inv);
    if condition > CONDITION_WARNING {
        log::warn!("I - ΛW is ill-conditioned (condition number {condition:.3e})");
    }
    Ok(SteadyState { x_inf, v, condition })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Consensus {
    pub consensus: bool,
    /// Common prejudice of the prejudiced agents (midpoint of their range).
    pub value: Option<f64>,
}

/// A stable model reaches consensus iff all prejudiced agents share the
/// same prejudice; `tol` bounds the allowed spread.
pub fn consensus_check(model: &FjModel, tol: f64) -> Result<Consensus> {
    if !is_schur_stable(model.lambda(), model.w()).stable {
        return Err(FjError::NotSchurStable);
    }
    let (lo, hi) = prejudiced_set(model.lambda())
        .into_iter()
        .map(|i| model.u()[i])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let consensus = hi - lo <= tol;
    Ok(Consensus {
        consensus,
        value: consensus.then_some(0.5 * (lo + hi)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Containment {
    pub liminf_ok: bool,
    pub limsup_ok: bool,
}

impl Containment {
    pub fn holds(&self) -> bool {
        self.liminf_ok && self.limsup_ok
    }
}

/// Minimum tail length for [`containment_bounds`].
pub const MIN_TAIL: usize = 50;

/// Checks that the tail of the trajectory (last 10% of steps, at least
/// [`MIN_TAIL`]) stays within `[min u - tol, max u + tol]`.
pub fn containment_bounds(traj: &OpinionTrajectory, u: &DVector<f64>, tol: f64) -> Result<Containment> {
    if traj.total_steps < MIN_TAIL {
        return Err(FjError::TrajectoryTooShort {
            len: traj.total_steps,
            required: MIN_TAIL,
        });
    }
    check_len(traj.n(), u)?;
    let window = (traj.total_steps / 10).max(MIN_TAIL);
    let from = traj.total_steps - window;
    let lo = u.min() - tol;
    let hi = u.max() + tol;
    let mut out = Containment {
        liminf_ok: true,
        limsup_ok: true,
    };
    for (_, x) in traj.iter().filter(|(k, _)| *k >= from) {
        out.liminf_ok &= x.iter().all(|&v| v >= lo);
        out.limsup_ok &= x.iter().all(|&v| v <= hi);
    }
    Ok(out)
}

/// Least-squares geometric rate of `‖x(k) - target‖_∞` over the second half
/// of the recorded states whose error is still above `floor`. `None` when
/// fewer than three such states exist.
pub fn fitted_rate(traj: &OpinionTrajectory, target: &DVector<f64>, floor: f64) -> Option<f64> {
    let points: Vec<(f64, f64)> = traj
        .iter()
        .map(|(k, x)| (k as f64, (x - target).amax()))
        .take_while(|&(_, e)| e > floor)
        .map(|(k, e)| (k, e.ln()))
        .collect();
    let tail = &points[points.len() / 2..];
    if tail.len() < 3 {
        return None;
    }
    let m = tail.len() as f64;
    let mean_k = tail.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_e = tail.iter().map(|p| p.1).sum::<f64>() / m;
    let cov: f64 = tail.iter().map(|p| (p.0 - mean_k) * (p.1 - mean_e)).sum();
    let var: f64 = tail.iter().map(|p| (p.0 - mean_k).powi(2)).sum();
    Some((cov / var).exp())
}

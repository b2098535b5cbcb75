//! Schur stability of stationary models, the explicit spectral bound
//! `ρ* = (1 - δε^s)^{1/(1+s)}`, and sufficient stability certificates for
//! periodic time-varying schedules.
//!
//! Certificates only ever answer `Stable` or `Unknown`: every condition
//! checked here is sufficient, none is necessary.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dynamics::{consensus_check, Consensus};
use crate::error::{FjError, Result};
use crate::graph::{
    cfj_membership, distances_to_set, eps_walk_distance, fj_class_min_s, natural_params,
    prejudiced_set, AgentSet, ClassParams, Distance, EpsWalkDistances, NaturalParams,
};
use crate::network::{FjModel, InfluenceMatrix, Stage, SubstochasticMatrix, SusceptibilityProfile};
use crate::schedule::TvSchedule;
use crate::spectral::{spectral_radius, DEFAULT_SPECTRAL_TOL};

/// Slack allowed between the computed spectral radius and `ρ*`.
pub const SPECTRAL_SLACK: f64 = 1e-8;

/// Slack allowed on chain-product row sums.
pub const CHAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SchurCriterion {
    pub stable: bool,
    /// Walk distances to the prejudiced set over all positive arcs.
    pub witness: EpsWalkDistances,
}

fn min_positive_weight(w: &InfluenceMatrix) -> f64 {
    w.matrix()
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min)
}

/// `ΛW` is Schur stable iff every agent is prejudiced or has a walk in the
/// influence graph to a prejudiced agent.
pub fn is_schur_stable(lambda: &SusceptibilityProfile, w: &InfluenceMatrix) -> SchurCriterion {
    let eps0 = min_positive_weight(w);
    let eps0 = if eps0.is_finite() { eps0 } else { 1.0 };
    let witness = eps_walk_distance(w, eps0, &prejudiced_set(lambda));
    SchurCriterion {
        stable: w.n() > 0 && witness.all_finite(),
        witness,
    }
}

pub fn rho_star(params: &ClassParams) -> f64 {
    let decay = params.delta * params.eps.powf(params.s as f64);
    (1.0 - decay).max(0.0).powf(1.0 / (1.0 + params.s as f64))
}

/// `ρ*(δ₀, ε₀, n-1)` for a stable model, `None` otherwise.
pub fn corollary_bound(lambda: &SusceptibilityProfile, w: &InfluenceMatrix) -> Option<f64> {
    let NaturalParams { eps0, delta0 } = natural_params(lambda, w)?;
    if !is_schur_stable(lambda, w).stable {
        return None;
    }
    let params = ClassParams::new(delta0, eps0, w.n() - 1).ok()?;
    Some(rho_star(&params))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyzeOptions {
    /// Overrides `δ₀` when set.
    pub delta: Option<f64>,
    /// Overrides `ε₀` when set.
    pub eps: Option<f64>,
    pub spectral_tol: Option<f64>,
    pub consensus_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub n: usize,
    pub prejudiced: AgentSet,
    pub natural: Option<NaturalParams>,
    pub schur_stable: bool,
    pub rho: f64,
    pub bound_params: Option<ClassParams>,
    pub rho_star: Option<f64>,
    pub corollary_bound: Option<f64>,
    pub criterion_witness: Vec<Distance>,
    pub non_degenerate: bool,
    /// Consensus of the steady state; only evaluated for stable models.
    pub consensus: Option<Consensus>,
}

/// Full stationary analysis of a model.
pub fn analyze(model: &FjModel, opts: &AnalyzeOptions) -> Result<StabilityReport> {
    let (lambda, w) = (model.lambda(), model.w());
    let criterion = is_schur_stable(lambda, w);
    let natural = natural_params(lambda, w);
    let rho = spectral_radius(
        &model.system_matrix(),
        opts.spectral_tol.unwrap_or(DEFAULT_SPECTRAL_TOL),
    )?;

    let delta = opts.delta.or(natural.map(|p| p.delta0));
    let eps = opts.eps.or(natural.map(|p| p.eps0));
    let mut bound_params = None;
    if let (Some(delta), Some(eps)) = (delta, eps) {
        if let Some(s) = fj_class_min_s(lambda, w, delta, eps)? {
            bound_params = Some(ClassParams::new(delta, eps, s)?);
        }
    }

    let consensus = if criterion.stable {
        Some(consensus_check(model, opts.consensus_tol.unwrap_or(0.0))?)
    } else {
        None
    };

    Ok(StabilityReport {
        n: model.n(),
        prejudiced: prejudiced_set(lambda),
        natural,
        schur_stable: criterion.stable,
        rho,
        rho_star: bound_params.as_ref().map(rho_star),
        bound_params,
        corollary_bound: corollary_bound(lambda, w),
        criterion_witness: criterion.witness.dist,
        non_degenerate: model.is_non_degenerate(),
        consensus,
    })
}

/// `A_s ⋯ A_1 A_0` with `A_k = Λ⁽ᵏ⁾W⁽ᵏ⁾`: later stages multiply on the left,
/// as in the trajectory map.
pub fn chain_product(seq: &[Stage]) -> Result<SubstochasticMatrix> {
    let first = seq.first().ok_or(FjError::EmptySequence)?;
    let mut p = first.system_matrix();
    for stage in &seq[1..] {
        p = stage.system_matrix().product(&p)?;
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainBound {
    pub max_row_sum: f64,
    /// `1 - δε^s`.
    pub bound: f64,
    pub holds: bool,
    /// `1 - δ(1-δ)^s ε^s`, the weaker per-step quantity; diagnostic only.
    pub proof_intermediate: f64,
}

/// Row sums of the chain product against `1 - δε^s` for a member of the
/// chain class with `s = seq.len() - 1`.
pub fn chain_row_sum_bound(seq: &[Stage], delta: f64, eps: f64) -> Result<ChainBound> {
    let cert = cfj_membership(seq, delta, eps)?;
    if !cert.member {
        return Err(FjError::NotCfjMember);
    }
    let s = cert.params.s as f64;
    let max_row_sum = chain_product(seq)?.max_row_sum();
    let bound = 1.0 - delta * eps.powf(s);
    Ok(ChainBound {
        max_row_sum,
        bound,
        holds: max_row_sum <= bound + CHAIN_SLACK,
        proof_intermediate: 1.0 - delta * ((1.0 - delta) * eps).powf(s),
    })
}

/// `‖Λ(K-1)W(K-1) ⋯ Λ(0)W(0)‖_∞`, propagated as a row-sum vector.
pub fn schedule_product_norm(schedule: &TvSchedule, steps: usize) -> Result<f64> {
    let mut sums = DVector::from_element(schedule.n(), 1.0);
    for k in 0..steps {
        let stage = schedule.stage(k).ok_or(FjError::ScheduleExhausted { step: k })?;
        sums = stage.system_matrix().matrix() * sums;
    }
    Ok(sums.amax())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CertificateKind {
    CfjSubsequence,
    ConnectivityWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Stable,
    Unknown,
}

/// An augmented entry outside `{0} ∪ [ε, 1]`, or a diagonal entry below `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityViolation {
    /// Offset within the period.
    pub offset: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvCertificate {
    pub kind: CertificateKind,
    /// `s` for the chain certificate, the window length `T` otherwise.
    pub window_or_s: usize,
    pub delta: Option<f64>,
    pub eps: f64,
    pub verdict: Verdict,
    pub period_len: usize,
    /// Period offset of the witness window when stable, of the first failing
    /// window otherwise.
    pub window_start: Option<usize>,
    /// `J_0, …, J_s` of `window_start` (chain certificate).
    pub j_sets: Vec<AgentSet>,
    pub positivity_violation: Option<PositivityViolation>,
    /// Agents without a walk to the virtual agent in the failing window.
    pub unreached: AgentSet,
}

/// Looks for a window of `s + 1` consecutive tail stages belonging to the
/// chain class. Such a window recurs once per period, so finding one proves
/// stability.
pub fn tv_stability_certificate_cfj(
    schedule: &TvSchedule,
    delta: f64,
    eps: f64,
    s: usize,
) -> Result<TvCertificate> {
    if !schedule.is_periodic() {
        return Err(FjError::NonPeriodicSchedule);
    }
    let p = schedule.period().len();
    let mut first_failure = None;
    for start in 0..p {
        let window = schedule.tail_window(start, s + 1)?;
        let cert = cfj_membership(&window, delta, eps)?;
        if cert.member {
            return Ok(TvCertificate {
                kind: CertificateKind::CfjSubsequence,
                window_or_s: s,
                delta: Some(delta),
                eps,
                verdict: Verdict::Stable,
                period_len: p,
                window_start: Some(start),
                j_sets: cert.j_sets,
                positivity_violation: None,
                unreached: AgentSet::new(),
            });
        }
        first_failure.get_or_insert((start, cert.j_sets));
    }
    let (start, j_sets) = first_failure.expect("period is non-empty");
    Ok(TvCertificate {
        kind: CertificateKind::CfjSubsequence,
        window_or_s: s,
        delta: Some(delta),
        eps,
        verdict: Verdict::Unknown,
        period_len: p,
        window_start: Some(start),
        j_sets,
        positivity_violation: None,
        unreached: AgentSet::new(),
    })
}

fn positivity_violation(a: &DMatrix<f64>, eps: f64, offset: usize) -> Option<PositivityViolation> {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..n {
            let v = a[(i, j)];
            let ok = if i == j {
                v >= eps && v <= 1.0
            } else {
                v == 0.0 || (v >= eps && v <= 1.0)
            };
            if !ok {
                return Some(PositivityViolation {
                    offset,
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    None
}

/// Leader-following consensus test on the augmented system: uniformly
/// positive augmented weights, and in every window of `window` steps the
/// union graph links each agent to the virtual agent.
pub fn tv_consensus_criterion(
    schedule: &TvSchedule,
    eps: f64,
    window: usize,
) -> Result<TvCertificate> {
    if !schedule.is_periodic() {
        return Err(FjError::NonPeriodicSchedule);
    }
    if eps.is_nan() || eps <= 0.0 || window == 0 {
        return Err(FjError::InvalidParams(format!(
            "need eps > 0 and T >= 1, got eps = {eps}, T = {window}"
        )));
    }
    let n = schedule.n();
    let p = schedule.period().len();
    let augmented: Vec<DMatrix<f64>> = schedule.period().iter().map(Stage::augmented_matrix).collect();
    let mut cert = TvCertificate {
        kind: CertificateKind::ConnectivityWindow,
        window_or_s: window,
        delta: None,
        eps,
        verdict: Verdict::Unknown,
        period_len: p,
        window_start: None,
        j_sets: Vec::new(),
        positivity_violation: None,
        unreached: AgentSet::new(),
    };

    if let Some(v) = augmented
        .iter()
        .enumerate()
        .find_map(|(k, a)| positivity_violation(a, eps, k))
    {
        cert.window_start = Some(v.offset);
        cert.positivity_violation = Some(v);
        return Ok(cert);
    }

    let leader: AgentSet = [n].into_iter().collect();
    for start in 0..p {
        let mut union = DMatrix::<f64>::zeros(n + 1, n + 1);
        for t in 0..window {
            union += &augmented[(start + t) % p];
        }
        let dist = distances_to_set(n + 1, |i, j| union[(i, j)] > 0.0, &leader);
        let unreached: AgentSet = (0..n).filter(|&i| !dist[i].is_finite()).collect();
        if !unreached.is_empty() {
            cert.window_start = Some(start);
            cert.unreached = unreached;
            return Ok(cert);
        }
    }
    cert.verdict = Verdict::Stable;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn lam(v: &[f64]) -> SusceptibilityProfile {
        SusceptibilityProfile::new(v.to_vec()).unwrap()
    }

    fn w(rows: &[Vec<f64>]) -> InfluenceMatrix {
        InfluenceMatrix::from_rows(rows).unwrap()
    }

    fn strongly_connected() -> InfluenceMatrix {
        w(&[
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.5, 0.5],
            vec![0.5, 0.0, 0.5],
        ])
    }

    #[test]
    fn degroot_is_never_stable() {
        let c = is_schur_stable(&lam(&[1.0, 1.0, 1.0]), &strongly_connected());
        assert!(!c.stable);
        assert!(c.witness.dist.iter().all(|d| *d == Distance::Infinite));
    }

    #[test]
    fn irreducible_with_one_prejudiced_agent() {
        for i in 0..3 {
            let mut l = vec![1.0; 3];
            l[i] = 0.99;
            assert!(is_schur_stable(&lam(&l), &strongly_connected()).stable);
        }
    }

    #[test]
    fn fully_prejudiced() {
        let c = is_schur_stable(&lam(&[0.0, 0.0, 0.0]), &strongly_connected());
        assert!(c.stable);
        assert_eq!(c.witness.dist, vec![Distance::Finite(0); 3]);
    }

    #[test]
    fn unreachable_closed_class() {
        // agents 1 and 2 only listen to each other and are not prejudiced
        let m = w(&[vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]]);
        let c = is_schur_stable(&lam(&[0.5, 1.0, 1.0]), &m);
        assert!(!c.stable);
        assert_eq!(c.witness.dist, vec![Distance::Finite(0), Distance::Infinite, Distance::Infinite]);
    }

    #[test]
    fn rho_star_examples() {
        let p = |d, e, s| ClassParams::new(d, e, s).unwrap();
        assert_eq!(rho_star(&p(0.5, 0.37, 0)), 0.5);
        assert!((rho_star(&p(0.5, 1.0, 3)) - 0.840_896_415_253_714_6).abs() < 1e-12);
        assert_eq!(rho_star(&p(1.0, 1.0, 0)), 0.0);
        assert!(ClassParams::new(0.0, 0.5, 1).is_err());
        assert!(ClassParams::new(0.5, 1.5, 1).is_err());
    }

    #[test]
    fn rho_star_monotone() {
        let grid = [0.1, 0.3, 0.5, 0.9, 1.0];
        for &d in &grid {
            for &e in &grid {
                for s in 0..6 {
                    let r = rho_star(&ClassParams::new(d, e, s).unwrap());
                    let r_s = rho_star(&ClassParams::new(d, e, s + 1).unwrap());
                    assert!(r <= r_s + 1e-15);
                    assert!((0.0..1.0).contains(&r));
                    for &d2 in grid.iter().filter(|&&x| x > d) {
                        assert!(rho_star(&ClassParams::new(d2, e, s).unwrap()) <= r + 1e-15);
                    }
                    if s >= 1 {
                        for &e2 in grid.iter().filter(|&&x| x > e) {
                            assert!(rho_star(&ClassParams::new(d, e2, s).unwrap()) <= r + 1e-15);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn corollary_examples() {
        for n in [2, 3, 5] {
            let m = fixtures::cycle_model(n, 0.4).unwrap();
            let b = corollary_bound(m.lambda(), m.w()).unwrap();
            assert!((b - 0.6f64.powf(1.0 / n as f64)).abs() < 1e-12);
        }
        assert!(corollary_bound(&lam(&[1.0, 1.0, 1.0]), &strongly_connected()).is_none());
        assert_eq!(corollary_bound(&lam(&[0.5]), &InfluenceMatrix::identity(1)), Some(0.5));
    }

    #[test]
    fn analyze_cycle() {
        let m = fixtures::cycle_model(4, 0.5).unwrap();
        let r = analyze(&m, &AnalyzeOptions::default()).unwrap();
        assert!(r.schur_stable);
        assert!((r.rho - 0.5f64.powf(0.25)).abs() < 1e-9);
        assert!((r.rho_star.unwrap() - r.rho).abs() < 1e-9);
        assert_eq!(r.bound_params.unwrap().s, 3);
        assert!(r.consensus.unwrap().consensus);
    }

    #[test]
    fn analyze_degroot_has_no_bound() {
        let m = FjModel::new(strongly_connected(), lam(&[1.0; 3]), DVector::zeros(3)).unwrap();
        let r = analyze(&m, &AnalyzeOptions::default()).unwrap();
        assert!(!r.schur_stable);
        assert!(r.rho_star.is_none());
        assert!(r.consensus.is_none());
        assert!((r.rho - 1.0).abs() < 1e-9);
    }

    #[test]
    fn chain_bound_single_stage() {
        let stage = Stage::new(SusceptibilityProfile::uniform(3, 0.6).unwrap(), strongly_connected()).unwrap();
        let b = chain_row_sum_bound(&[stage], 0.4, 0.5).unwrap();
        assert!((b.max_row_sum - 0.6).abs() < 1e-15);
        assert!((b.bound - 0.6).abs() < 1e-15);
        assert!(b.holds);
    }

    #[test]
    fn chain_bound_stationary_chain() {
        let m = fixtures::cycle_model(5, 0.3).unwrap();
        let seq = vec![m.stage().clone(); 5];
        let b = chain_row_sum_bound(&seq, 0.3, 1.0).unwrap();
        // brute-force product oracle
        let a = m.system_matrix().matrix().clone();
        let p = &a * &a * &a * &a * &a;
        let max: f64 = (0..5).map(|i| p.row(i).sum()).fold(0.0, f64::max);
        assert!((b.max_row_sum - max).abs() < 1e-15);
        assert!(b.holds);
        assert!(b.proof_intermediate >= b.bound);
    }

    #[test]
    fn chain_bound_zero_susceptibility() {
        let stage = Stage::new(SusceptibilityProfile::uniform(3, 0.0).unwrap(), strongly_connected()).unwrap();
        let b = chain_row_sum_bound(&[stage.clone(), stage.clone(), stage], 0.5, 0.5).unwrap();
        assert_eq!(b.max_row_sum, 0.0);
        assert!(b.holds);
    }

    #[test]
    fn chain_bound_rejects_non_member() {
        let stage = Stage::new(lam(&[1.0, 1.0, 1.0]), strongly_connected()).unwrap();
        assert_eq!(chain_row_sum_bound(&[stage], 0.5, 0.5), Err(FjError::NotCfjMember));
    }

    #[test]
    fn chain_product_order() {
        let a = Stage::new(lam(&[1.0, 1.0]), w(&[vec![0.0, 1.0], vec![0.0, 1.0]])).unwrap();
        let b = Stage::new(lam(&[0.5, 1.0]), w(&[vec![1.0, 0.0], vec![1.0, 0.0]])).unwrap();
        let p = chain_product(&[a.clone(), b.clone()]).unwrap();
        let expected = b.system_matrix().matrix() * a.system_matrix().matrix();
        assert_eq!(p.matrix(), &expected);
    }

    #[test]
    fn cfj_certificate_constant_schedule() {
        let m = fixtures::cycle_model(4, 0.5).unwrap();
        let sched = TvSchedule::constant(m.stage().clone());
        let c = tv_stability_certificate_cfj(&sched, 0.5, 1.0, 3).unwrap();
        assert_eq!(c.verdict, Verdict::Stable);
        let c = tv_stability_certificate_cfj(&sched, 0.5, 1.0, 2).unwrap();
        assert_eq!(c.verdict, Verdict::Unknown);
        assert_eq!(c.window_start, Some(0));
    }

    #[test]
    fn cfj_certificate_counterexample_is_unknown() {
        let sched = fixtures::example1_schedule();
        for s in 0..12 {
            for (d, e) in [(1.0, 1.0), (0.5, 0.5), (0.01, 0.01)] {
                let c = tv_stability_certificate_cfj(&sched, d, e, s).unwrap();
                assert_eq!(c.verdict, Verdict::Unknown);
            }
        }
    }

    #[test]
    fn cfj_certificate_zero_slot() {
        let idle = Stage::new(lam(&[1.0, 1.0, 1.0]), InfluenceMatrix::identity(3)).unwrap();
        let reset = Stage::new(lam(&[0.0, 0.0, 0.0]), InfluenceMatrix::identity(3)).unwrap();
        let sched = TvSchedule::new(vec![idle.clone()], vec![idle.clone(), idle, reset]).unwrap();
        let c = tv_stability_certificate_cfj(&sched, 1.0, 1.0, 0).unwrap();
        assert_eq!(c.verdict, Verdict::Stable);
        assert_eq!(c.window_start, Some(2));
    }

    #[test]
    fn certificates_need_a_period() {
        let stage = Stage::new(lam(&[0.5]), InfluenceMatrix::identity(1)).unwrap();
        let finite = TvSchedule::new(vec![stage], vec![]).unwrap();
        assert_eq!(
            tv_stability_certificate_cfj(&finite, 0.5, 0.5, 0),
            Err(FjError::NonPeriodicSchedule)
        );
        assert_eq!(tv_consensus_criterion(&finite, 0.5, 1), Err(FjError::NonPeriodicSchedule));
    }

    #[test]
    fn connectivity_constant_positive_schedule() {
        let m = w(&[
            vec![0.4, 0.6, 0.0],
            vec![0.0, 0.4, 0.6],
            vec![0.6, 0.0, 0.4],
        ]);
        let stage = Stage::new(lam(&[0.5, 1.0, 1.0]), m).unwrap();
        let c = tv_consensus_criterion(&TvSchedule::constant(stage), 0.2, 1).unwrap();
        assert_eq!(c.verdict, Verdict::Stable);
    }

    #[test]
    fn connectivity_zero_self_weight_is_unknown() {
        let c = tv_consensus_criterion(&fixtures::example2_schedule(), 0.1, 4).unwrap();
        assert_eq!(c.verdict, Verdict::Unknown);
        let v = c.positivity_violation.unwrap();
        assert_eq!((v.offset, v.row, v.col, v.value), (0, 0, 0, 0.0));

        let c = tv_consensus_criterion(&fixtures::example1_schedule(), 0.1, 4).unwrap();
        assert_eq!(c.verdict, Verdict::Unknown);
    }

    #[test]
    fn connectivity_fully_prejudiced() {
        // augmented diagonal λ_ii w_ii = 0 breaks the positivity premise
        let stage = Stage::new(lam(&[0.0, 0.0]), InfluenceMatrix::identity(2)).unwrap();
        let c = tv_consensus_criterion(&TvSchedule::constant(stage.clone()), 0.5, 1).unwrap();
        assert_eq!(c.verdict, Verdict::Unknown);
        assert_eq!(c.positivity_violation.unwrap().value, 0.0);
        // the chain certificate covers it with s = 0
        let c = tv_stability_certificate_cfj(&TvSchedule::constant(stage), 1.0, 1.0, 0).unwrap();
        assert_eq!(c.verdict, Verdict::Stable);
    }

    #[test]
    fn connectivity_needs_window() {
        // agent 1 is prejudiced only every other step
        let m = w(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let a = Stage::new(lam(&[1.0, 1.0]), m.clone()).unwrap();
        let b = Stage::new(lam(&[1.0, 0.5]), m).unwrap();
        let sched = TvSchedule::periodic(vec![a, b]).unwrap();
        let c = tv_consensus_criterion(&sched, 0.25, 1).unwrap();
        assert_eq!(c.verdict, Verdict::Unknown);
        assert_eq!(c.window_start, Some(0));
        assert_eq!(c.unreached.len(), 2);
        let c = tv_consensus_criterion(&sched, 0.25, 2).unwrap();
        assert_eq!(c.verdict, Verdict::Stable);
    }

    #[test]
    fn product_norm_of_counterexample_stays_one() {
        let sched = fixtures::example1_schedule();
        assert_eq!(schedule_product_norm(&sched, 1000).unwrap(), 1.0);
    }
}

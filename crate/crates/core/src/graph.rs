//! Thresholded reachability over influence graphs.
//!
//! An arc `i ↦ j` exists when `w_ij > 0` ("i listens to j"); it is an
//! ε-arc when `w_ij ≥ ε`. Distances are hop counts of the shortest ε-walk
//! from an agent *to* a target set, computed by a breadth-first search that
//! runs backward from the targets.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{FjError, Result};
use crate::network::{InfluenceMatrix, Stage, SusceptibilityProfile};

pub type AgentSet = BTreeSet<usize>;

/// Hop count, or no walk at all. Serializes as the count or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(usize),
    Infinite,
}

impl Distance {
    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }

    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }
}

impl Serialize for Distance {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Distance::Finite(d) => serializer.serialize_u64(*d as u64),
            Distance::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl std::fmt::Display for Distance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsWalkDistances {
    pub eps: f64,
    pub target_set: AgentSet,
    pub dist: Vec<Distance>,
}

impl EpsWalkDistances {
    /// Largest distance; `Finite(0)` for an empty network.
    pub fn max(&self) -> Distance {
        self.dist.iter().copied().max().unwrap_or(Distance::Finite(0))
    }

    pub fn all_finite(&self) -> bool {
        self.dist.iter().all(|d| d.is_finite())
    }
}

/// Parameters `(δ, ε, s)` of the class of models in which every agent has an
/// ε-walk of at most `s` hops to an agent with `λ_ii ≤ 1 - δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassParams {
    pub delta: f64,
    pub eps: f64,
    pub s: usize,
}

impl ClassParams {
    pub fn new(delta: f64, eps: f64, s: usize) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(FjError::InvalidParams(format!("delta = {delta} not in (0, 1]")));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(FjError::InvalidParams(format!("eps = {eps} not in (0, 1]")));
        }
        Ok(Self { delta, eps, s })
    }
}

/// Agents with `λ_ii < 1`. Exact comparison.
pub fn prejudiced_set(lambda: &SusceptibilityProfile) -> AgentSet {
    (0..lambda.len()).filter(|&i| lambda.get(i) < 1.0).collect()
}

/// Agents with `λ_ii ≤ 1 - δ`. Exact comparison.
pub fn delta_prejudiced_set(lambda: &SusceptibilityProfile, delta: f64) -> Result<AgentSet> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(FjError::InvalidDelta(delta));
    }
    let threshold = 1.0 - delta;
    Ok((0..lambda.len()).filter(|&i| lambda.get(i) <= threshold).collect())
}

/// Backward BFS: distance from every node to `targets` along arcs for which
/// `arc(i, j)` holds.
pub fn distances_to_set<F>(n: usize, arc: F, targets: &AgentSet) -> Vec<Distance>
where
    F: Fn(usize, usize) -> bool,
{
    // predecessors[j] = { i : i -> j }
    let mut predecessors = vec![Vec::new(); n];
    for i in 0..n {
        for (j, preds) in predecessors.iter_mut().enumerate() {
            if arc(i, j) {
                preds.push(i);
            }
        }
    }
    let mut dist = vec![Distance::Infinite; n];
    let mut queue = VecDeque::new();
    for &t in targets {
        dist[t] = Distance::Finite(0);
        queue.push_back(t);
    }
    while let Some(j) = queue.pop_front() {
        let Distance::Finite(d) = dist[j] else { unreachable!() };
        for &i in &predecessors[j] {
            if dist[i] == Distance::Infinite {
                dist[i] = Distance::Finite(d + 1);
                queue.push_back(i);
            }
        }
    }
    dist
}

/// Length of the shortest ε-walk from each agent to `targets`.
pub fn eps_walk_distance(w: &InfluenceMatrix, eps: f64, targets: &AgentSet) -> EpsWalkDistances {
    let dist = distances_to_set(w.n(), |i, j| w.get(i, j) >= eps, targets);
    EpsWalkDistances {
        eps,
        target_set: targets.clone(),
        dist,
    }
}

/// Smallest `s` with `(Λ, W)` in the `(δ, ε, s)` class, or `None` if some
/// agent cannot reach a δ-prejudiced agent by an ε-walk.
pub fn fj_class_min_s(
    lambda: &SusceptibilityProfile,
    w: &InfluenceMatrix,
    delta: f64,
    eps: f64,
) -> Result<Option<usize>> {
    let targets = delta_prejudiced_set(lambda, delta)?;
    Ok(eps_walk_distance(w, eps, &targets).max().finite())
}

/// Natural class parameters of a model: the smallest positive weight and the
/// smallest gap `1 - λ_ii` among prejudiced agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NaturalParams {
    pub eps0: f64,
    pub delta0: f64,
}

pub fn natural_params(lambda: &SusceptibilityProfile, w: &InfluenceMatrix) -> Option<NaturalParams> {
    let eps0 = w
        .matrix()
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let max_lambda = prejudiced_set(lambda)
        .into_iter()
        .map(|i| lambda.get(i))
        .fold(f64::NEG_INFINITY, f64::max);
    if !eps0.is_finite() || !max_lambda.is_finite() {
        return None;
    }
    Some(NaturalParams {
        eps0,
        delta0: 1.0 - max_lambda,
    })
}

/// Membership certificate for a chain of `s + 1` stages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CfjCertificate {
    pub params: ClassParams,
    /// `J_0, …, J_s`.
    pub j_sets: Vec<AgentSet>,
    pub member: bool,
}

/// Propagates `J_0 = S^δ(Λ⁽⁰⁾)`,
/// `J_k = S^δ(Λ⁽ᵏ⁾) ∪ { i : w⁽ᵏ⁾_ij ≥ ε for some j ∈ J_{k-1} }` and reports
/// whether `J_s` covers every agent.
pub fn cfj_membership(seq: &[Stage], delta: f64, eps: f64) -> Result<CfjCertificate> {
    let first = seq.first().ok_or(FjError::EmptySequence)?;
    let n = first.n();
    let params = ClassParams::new(delta, eps, seq.len() - 1)?;
    let mut j_sets: Vec<AgentSet> = Vec::with_capacity(seq.len());
    for stage in seq {
        if stage.n() != n {
            return Err(FjError::DimensionMismatch {
                expected: n,
                found: stage.n(),
            });
        }
        let mut next = delta_prejudiced_set(stage.lambda(), delta)?;
        if let Some(prev) = j_sets.last() {
            let w = stage.w();
            next.extend((0..n).filter(|&i| prev.iter().any(|&j| w.get(i, j) >= eps)));
        }
        j_sets.push(next);
    }
    let member = j_sets.last().is_some_and(|j| j.len() == n);
    Ok(CfjCertificate {
        params,
        j_sets,
        member,
    })
}

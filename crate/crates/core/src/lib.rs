//! Friedkin-Johnsen opinion dynamics on static and time-varying influence
//! networks.
//!
//! The crate covers
//! - validation and deficiency calculus of (sub)stochastic matrices ([`network`]),
//! - thresholded walk distances and class-membership tests ([`graph`]),
//! - Schur stability, the spectral bound `ρ*` and time-varying certificates
//!   ([`stability`], [`spectral`]),
//! - trajectories, steady states and consensus ([`dynamics`]),
//! - text formats and named fixtures ([`io`], [`fixtures`]).

pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod network;
pub mod report;
pub mod schedule;
pub mod spectral;
pub mod stability;

pub use dynamics::{
    consensus_check, containment_bounds, simulate, steady_state, step, tv_simulate, tv_simulate_with,
    Consensus, Containment, OpinionTrajectory, SimulationOptions, SteadyState,
};
pub use error::{FjError, Result};
pub use graph::{
    cfj_membership, delta_prejudiced_set, eps_walk_distance, fj_class_min_s, natural_params,
    prejudiced_set, AgentSet, CfjCertificate, ClassParams, Distance, EpsWalkDistances, NaturalParams,
};
pub use network::{
    augmented_matrix, decompose_substochastic, deficiency, deficiency_of_product, normalize_rows,
    validate_stochastic, DeficiencyVector, FjModel, InfluenceMatrix, Stage, SubstochasticMatrix,
    SusceptibilityProfile,
};
pub use schedule::TvSchedule;
pub use spectral::spectral_radius;
pub use stability::{
    analyze, chain_row_sum_bound, corollary_bound, is_schur_stable, rho_star, tv_consensus_criterion,
    tv_stability_certificate_cfj, AnalyzeOptions, StabilityReport, TvCertificate, Verdict,
};

pub use nalgebra::{DMatrix, DVector};

//! Workloads shared by the criterion benches.

use fj_core::fixtures::{random_strongly_connected, RandomNetworkOptions};
use fj_core::{FjModel, TvSchedule};

pub const SIZES: [usize; 3] = [16, 64, 256];

pub fn model(n: usize) -> FjModel {
    random_strongly_connected(n, n as u64, &RandomNetworkOptions::default()).expect("generator output is valid")
}

/// Period-two schedule alternating between two random models of size `n`.
pub fn schedule(n: usize) -> TvSchedule {
    let a = model(n);
    let b = random_strongly_connected(n, 1000 + n as u64, &RandomNetworkOptions::default())
        .expect("generator output is valid");
    TvSchedule::periodic(vec![a.stage().clone(), b.stage().clone()]).expect("same size")
}

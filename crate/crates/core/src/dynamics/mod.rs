//! Metropolis dynamics `c(σ,η) = e^{−β[H(η)−H(σ)]₊}` on single-flip moves.
//!
//! Two samplers produce the same law: uniformization at the constant clock
//! rate `2·K·L` with acceptance, and a rejection-free sampler that keeps
//! per-site exit rates in a sum tree and updates only the flipped site and
//! its four neighbours. Replicas draw from independent ChaCha8 streams keyed
//! by `(seed, replica)`, so ensembles are reproducible under any schedule.

mod engine;
mod harness;
mod stats;

pub use engine::{
    kmc_move_law, replica_rng, simulate_kmc, simulate_naive, HittingSample, Method, Occupancy, SimConfig,
    StopCondition, Target, Trajectory, TrajectoryEvent,
};
pub use harness::{
    estimate_hitting, exit_distribution, run_replicas, sample_states, ExitDistribution, HittingStatistics,
    MIN_REPLICAS_FOR_CI,
};
pub use stats::{
    chi_square_gof, kolmogorov_survival, ks_exponential, ks_one_sample, ks_two_sample, ChiSquareResult, KsResult,
};

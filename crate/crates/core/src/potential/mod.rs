//! Exact potential theory for the Metropolis chain on an enumerated torus.
//!
//! The chain is lumped onto orbits of the torus symmetries that fix the sets
//! of a problem, which keeps the uniform-state problems on 3×3 below a few
//! hundred nodes. Linear systems are solved either by positive (GTH-style)
//! elimination, exact to rounding at any `β`, or by Jacobi-preconditioned
//! conjugate gradients on the `μ`-symmetrized system while the edge-weight
//! ratio stays below a conditioning guard.

mod asymptotics;
mod linalg;
mod operator;
mod solver;
mod symmetry;
mod theta;
mod trace;

pub use asymptotics::{
    asymptotic_report, AsymptoticReport, AsymptoticRow, AsymptoticTrends, BruteForceBarriers, DEFAULT_BETA_GRID,
};
pub use operator::{gibbs_log_measure, logsumexp, GeneratorOperator, GibbsMeasure, RATE_EXPONENT_LIMIT};
pub use solver::{
    capacity, describe_set, equilibrium_potential, mean_hitting_exact, mean_jump_count, mean_occupation, Backend,
    CapacityResult, LogScalar, MeanHitting, PotentialField, SolverOptions,
};
pub use symmetry::SymmetryGroup;
pub use theta::{theta_variational, KappaNormalization, ThetaVariational};
pub use trace::{trace_rates, RateScaling, TraceIdentities, TraceRates};

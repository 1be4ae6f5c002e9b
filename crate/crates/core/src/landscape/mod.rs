//! Exhaustive analysis of the energy landscape of small tori.
//!
//! All comparisons are exact integer comparisons. [`EnumeratedSpace`]
//! tabulates every configuration (within a budget); [`LazySpace`] evaluates
//! energies on demand for local searches on larger tori.

mod cycles;
mod gates;
mod minimax;
mod report;
mod space;
mod stability;
mod unionfind;

pub use cycles::{
    initial_cycle, initial_cycle_with_witness, maximal_cycle_partition, tube_from_partition, vtj_tube, Cycle,
    CyclePartition,
};
pub use gates::{downhill_count, essential_gate_local, saddle_and_gates, GateSet, SaddleState, SaddleType};
pub use minimax::{communication_height, threshold_sweep_oracle, MinimaxResult};
pub use report::{landscape_report, BarrierEntry, GateEntry, LandscapeReport, StabilitySummary};
pub use space::{EnumeratedSpace, LazySpace, StateId, StateSpace, DEFAULT_BUDGET};
pub use stability::{stability_level, stability_levels, Stability, StabilityLevel, StabilityReport};

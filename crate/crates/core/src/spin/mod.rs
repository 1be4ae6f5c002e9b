//! Lattice geometry, configurations, the Hamiltonian in exact integer units,
//! droplets, reference paths and the closed-form barrier quantities.

mod config;
mod droplet;
mod lattice;
mod model;
mod params;
mod path;
mod star;

pub use config::{Spin, SpinConfiguration, MAX_PACKED_SITES};
pub use droplet::{critical_droplets, make_droplet, protuberance_family, DropletSpec, Protuberance, Side};
pub use lattice::LatticeGeometry;
pub use model::PottsModel;
pub use params::{format_energy, parse_decimal, Energy, ModelParams, MAX_PRECISION};
pub use path::{growth_path, reference_path, reference_path_with_offset, Move, PathRecord};
pub use star::{
    check_assumptions, check_pair_assumption, ising_quantities, is_tie, star_table, AssumptionReport,
    IsingQuantities, Kappa, PairStar, StarTable, PAIRS,
};

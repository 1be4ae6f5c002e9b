//! The cycle around a square droplet on a torus too large to enumerate:
//! flooded lazily below the height of a growth path.
//!
//! ```text
//! cargo run --release --example critical_cycle -- 3
//! ```

use potts_metastable::landscape::{initial_cycle_with_witness, LazySpace, StateSpace};
use potts_metastable::spin::{growth_path, make_droplet, DropletSpec, LatticeGeometry, ModelParams, PottsModel, Spin};

fn main() -> potts_metastable::Result<()> {
    let side: usize = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(3);
    let model = PottsModel::new(LatticeGeometry::new(5, 5)?, ModelParams::from_decimals(["0.05", "0.45", "0.90"], 2)?);
    let p = &model.params;
    let space = LazySpace::new(model.clone())?;
    let eta = make_droplet(&DropletSpec::rectangle(Spin::Three, Spin::One, side, side), &model)?;
    let witness = growth_path(&model, eta.clone(), Spin::Three, (side, side), 0)?;
    let cycle = initial_cycle_with_witness(&space, space.id(&eta), &[space.uniform(Spin::Three)], &witness)?;

    println!("{side}x{side} droplet of 3 in 1, energy {} above 1", p.format(model.energy(&eta)? - model.uniform_energy(Spin::One)));
    println!("cycle: {} states, depth {}", cycle.members.len(), p.format(cycle.depth));
    println!("bottom: {} state(s) at {}", cycle.bottom.len(), p.format(cycle.bottom_energy));
    println!("lowest exits: {} state(s) at {}", cycle.boundary_minima.len(), p.format(cycle.boundary_energy));
    Ok(())
}

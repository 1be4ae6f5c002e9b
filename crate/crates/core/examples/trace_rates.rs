//! Rates of the chain watched only on the three monochromatic states, and
//! the capacity identities they satisfy.
//!
//! ```text
//! cargo run --release --example trace_rates
//! ```

use potts_metastable::landscape::EnumeratedSpace;
use potts_metastable::potential::{asymptotic_report, KappaNormalization, SolverOptions, DEFAULT_BETA_GRID};
use potts_metastable::spin::{LatticeGeometry, ModelParams, PottsModel};

fn main() -> potts_metastable::Result<()> {
    let model = PottsModel::new(LatticeGeometry::new(3, 3)?, ModelParams::from_decimals(["0.05", "0.45", "0.90"], 2)?);
    let space = EnumeratedSpace::new(model)?;
    let r = asymptotic_report(&space, &DEFAULT_BETA_GRID, KappaNormalization::PerSite, &SolverOptions::default())?;
    for row in &r.rows {
        let t = &row.trace;
        let id = &t.identities;
        println!("β = {}", t.beta);
        for (i, line) in t.three_point.iter().enumerate() {
            println!("  r({},·) = {:.4e} {:.4e} {:.4e}", i + 1, line[0], line[1], line[2]);
        }
        println!("  on {{2,3}}: r(2,3) = {:.4e}, r(3,2) = {:.4e}", t.two_point[0], t.two_point[1]);
        println!("  θ²·r(3,2) = {:.4e}", t.theta2 * t.two_point[1]);
        let worst = [id.two_point_balance, id.two_point_capacity, id.three_point_exit].into_iter().fold(0.0, f64::max);
        println!("  worst identity residual {worst:.1e}");
    }
    Ok(())
}

//! Exhaustive landscape of a small torus compared with the closed-form
//! barriers.
//!
//! ```text
//! cargo run --release --example energy_landscape -- 3 3 0.05 0.45 0.90
//! ```

use potts_metastable::landscape::{landscape_report, EnumeratedSpace};
use potts_metastable::spin::{LatticeGeometry, ModelParams, PottsModel};

fn main() -> potts_metastable::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &'static str| args.get(i).map(String::as_str).unwrap_or(d);
    let geometry = LatticeGeometry::new(arg(0, "3").parse().unwrap(), arg(1, "3").parse().unwrap())?;
    let params = ModelParams::from_decimals([arg(2, "0.05"), arg(3, "0.45"), arg(4, "0.90")], 2)?;
    let model = PottsModel::new(geometry, params.clone());
    let space = EnumeratedSpace::new(model)?;
    let report = landscape_report(&space)?;

    println!("{:>12} {:>10} {:>10} {:>8}", "transition", "barrier", "closed", "oracle");
    for b in &report.barriers {
        let to: Vec<String> = b.to.iter().map(|s| s.to_string()).collect();
        println!(
            "{:>12} {:>10} {:>10} {:>8}",
            format!("{} -> {}", b.from, to.join(",")),
            params.format(b.gamma),
            b.gamma_star.map(|g| params.format(g)).unwrap_or_else(|| "-".into()),
            b.oracle_agrees
        );
    }
    let v: Vec<String> = report
        .stability
        .v
        .iter()
        .map(|s| s.finite().map(|x| params.format(x)).unwrap_or_else(|| "inf".into()))
        .collect();
    println!("\nstability levels V1, V2, V3 = {}", v.join(", "));
    println!("largest level elsewhere     = {}", params.format(report.stability.max_other));
    println!("max_other < V1 < V2         = {}", report.stability.ordering_holds);
    for g in &report.gates {
        println!(
            "gate {} -> {:?}: {} essential of {} saddles (type 1: {}, type 2: {}), separates: {:?}",
            g.from, g.to, g.gate_size, g.saddle_count, g.type1, g.type2, g.disconnects
        );
    }
    println!("2 lies in the typical tube from 1 to 3: {}", report.two_in_tube_from_one_to_three);
    for n in &report.notes {
        println!("note: {n}");
    }
    Ok(())
}

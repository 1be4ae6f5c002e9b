//! The straight-line reference path between two monochromatic states:
//! energy profile, peak and how it compares with `H(i) + f(h_j − h_i)`.
//!
//! ```text
//! cargo run --release --example reference_path -- 8 8 1 3
//! ```

use potts_metastable::spin::{ising_quantities, reference_path, LatticeGeometry, ModelParams, PottsModel, Spin};

fn main() -> potts_metastable::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &'static str| args.get(i).map(String::as_str).unwrap_or(d);
    let spin = |s: &str| Spin::from_index(s.parse::<usize>().expect("spin 1..3") - 1);
    let geometry = LatticeGeometry::new(arg(0, "8").parse().unwrap(), arg(1, "8").parse().unwrap())?;
    let params = ModelParams::from_decimals(["0.05", "0.45", "0.90"], 2)?;
    let model = PottsModel::new(geometry, params.clone());
    let (i, j) = (spin(arg(2, "1")), spin(arg(3, "3")));

    let path = reference_path(&model, i, j)?;
    path.validate(&model)?;
    let base = model.uniform_energy(i);
    let q = ising_quantities(params.gap(i, j), params.coupling())?;
    println!("{} moves from {i} to {j}; critical side {}", path.len(), q.ell_c);
    for (k, e) in path.energies.iter().enumerate().step_by(model.geometry.cols()) {
        println!("{k:>5} {:>10}", params.format(e - base));
    }
    println!(
        "peak {} at move {} (attained {} time(s)); closed form f = {}",
        params.format(path.max_energy - base),
        path.argmax,
        path.max_multiplicity(),
        params.format(q.f_h)
    );
    Ok(())
}

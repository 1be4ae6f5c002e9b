//! Runs every subcommand but `verify` on one configuration, writing the
//! reports into a directory, and optionally refreshes a golden file.
//!
//! ```text
//! cargo run --release --example experiment_driver -- configs/default.ini out/ [golden.json]
//! ```

use std::path::Path;

use potts_metastable::io::{load_config, run, snapshot, write_golden, Command, ExperimentConfig};

fn main() -> potts_metastable::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let config = match args.first() {
        Some(p) => load_config(Path::new(p))?,
        None => ExperimentConfig::default(),
    };
    let out = Path::new(args.get(1).map(String::as_str).unwrap_or("out"));
    std::fs::create_dir_all(out)?;
    for command in [Command::Landscape, Command::Simulate, Command::Solve, Command::Reduce] {
        let o = run(command, &config, Some(out))?;
        println!("{}: {} section(s)", command.name(), o.report.sections.len());
        for a in o.artifacts {
            println!("  {}", a.display());
        }
    }
    if let Some(g) = args.get(2) {
        write_golden(Path::new(g), &snapshot(&config)?)?;
        println!("golden written to {g}");
    }
    Ok(())
}

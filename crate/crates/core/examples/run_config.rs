//! Runs a config file through the library API and prints the JSON report.
//!
//! cargo run --example run_config -- crates/core/examples/paper_z.cfg

use gurevich_lab::cli::{parse_config, run_experiment};

fn main() -> gurevich_lab::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/full3_entropy.cfg").into());
    let config = parse_config(&std::fs::read_to_string(path)?)?;
    print!("{}", run_experiment(&config)?.to_json());
    Ok(())
}

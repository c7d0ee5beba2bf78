//! Runs a configuration file the way the binary does and prints the first
//! rows of each table.
//!
//! cargo run --release --example run_config -- examples/configs/sweep_eta.toml

use std::time::Instant;

use qcharge::experiment::{parse_config, run_config, write_outputs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/sweep_eta.toml").into());
    let text = std::fs::read_to_string(&path)?;
    let started = Instant::now();
    let cfg = parse_config(&text)?;
    let result = run_config(&cfg)?;
    for o in &result.outputs {
        println!("{}: {}", o.stem, o.table.header.join(","));
        for row in o.table.rows.iter().take(5) {
            println!("  {}", row.iter().map(|c| c.render()).collect::<Vec<_>>().join(","));
        }
    }
    let out = std::env::temp_dir().join("qcharge-example");
    for p in write_outputs(&result, Some(&text), &out, started)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

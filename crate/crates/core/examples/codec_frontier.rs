//! Largest reliable k against capacity as the pool grows.
//!
//! cargo run --release --example codec_frontier

use dnastore::experiments::{run, ExperimentKind, ExperimentSpec, Grid};

fn main() -> dnastore::Result<()> {
    let grid = Grid {
        m: vec![256, 1024, 4096],
        beta: vec![4.0],
        c: vec![2.0],
        ..Grid::default()
    };
    let report = run(&ExperimentSpec::new(ExperimentKind::CodecFrontier, grid, 100, 1))?;
    print!("{}", report.table("frontier").expect("frontier table").to_csv());
    for a in report.assertions.iter().filter(|a| a.name.starts_with("gap")) {
        println!("{}: {}", a.name, if a.pass { "ok" } else { "FAILED" });
    }
    Ok(())
}

//! Capacity and the two simple converse bounds over a small (beta, c) grid.
//!
//! cargo run --example capacity_curve

use dnastore::bounds::capacity_point;
use dnastore::report::fmt_sig;

fn main() -> dnastore::Result<()> {
    println!(
        "{:>6} {:>6} {:>14} {:>14} {:>14}",
        "beta", "c", "capacity", "1-e^-c", "1-1/beta"
    );
    for beta in [1.0, 1.5, 2.0, 4.0, 8.0] {
        for c in [0.5, 1.0, 2.0, 4.0] {
            let p = capacity_point(beta, c)?;
            println!(
                "{beta:>6} {c:>6} {:>14} {:>14} {:>14}",
                fmt_sig(p.capacity),
                fmt_sig(p.index_genie_bound),
                fmt_sig(p.type_count_bound)
            );
        }
    }
    Ok(())
}

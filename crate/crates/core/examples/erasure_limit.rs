//! Fraction of never-sampled molecules against (1 - 1/M)^N and e^-c.
//!
//! cargo run --release --example erasure_limit

use dnastore::coupon::miss_probability;
use dnastore::model::{empirical_erasure_probability, ChannelParams, MoleculePool};

fn main() -> dnastore::Result<()> {
    let c: f64 = 1.0;
    for m in [100u64, 1_000, 10_000, 100_000] {
        // index i in binary keeps every molecule distinct
        let params = ChannelParams::new(m, 2.0, c)?;
        let pool = MoleculePool::indexed(params)?;
        let empirical = empirical_erasure_probability(&pool, 20, 42)?;
        println!(
            "M={m:>6}  empirical {empirical:.5}  (1-1/M)^N {:.5}  e^-c {:.5}",
            miss_probability(m, params.n()),
            (-c).exp()
        );
    }
    Ok(())
}

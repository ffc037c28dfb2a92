//! Distinct-count concentration and the Chebyshev tail bound.
//!
//! cargo run --release --example coupon_concentration

use dnastore::coupon::{chebyshev_tail_bound, simulate_distinct, TailBoundInputs};

fn main() -> dnastore::Result<()> {
    let c: f64 = 1.0;
    let delta = (-c).exp() / 2.0;
    for m in [1_000u64, 10_000, 100_000] {
        let s = simulate_distinct(m, c, 200, 7, &[delta])?;
        let t = &s.tails[0];
        println!(
            "M={m:>6}  mean Q/M {:.6} (analytic {:.6}, sd {:.2e})  tail {} <= bound {:.3e}",
            s.mean,
            s.analytic_mean(),
            s.std,
            t.empirical,
            chebyshev_tail_bound(&TailBoundInputs::new(m, c, delta)?)?
        );
    }
    Ok(())
}

//! Stars and bars: exact counts, enumeration and the exponential bound.

use dnastore::bounds::{enumerate_types, ln_big, type_count_exact, type_count_upper_log, type_to_string};

fn main() -> dnastore::Result<()> {
    for t in enumerate_types(3, 2)? {
        let s: String = type_to_string(&t).iter().map(|b| char::from(b'0' + b)).collect();
        println!("{t:?} <-> {s}");
    }
    println!("T[3,2] = {}", type_count_exact(3, 2));

    for (a, b) in [(10u64, 10u64), (1024, 885), (4096, 3541)] {
        let t = type_count_exact(a, b);
        println!(
            "ln T[{a},{b}] = {:.3}  bound {:.3}",
            ln_big(&t),
            type_count_upper_log(a, b)?
        );
    }
    Ok(())
}

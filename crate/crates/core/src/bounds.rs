//! Capacity of the unordered-sampling channel, the two simple converse
//! bounds, and counting of types (stars and bars).

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Largest `a * T[a, b]` that [`enumerate_types`] will materialise.
pub const ENUMERATION_GUARD: u64 = 1_000_000;

/// Constant in the finite-M converse, `2e`.
pub const FINITE_M_ALPHA: f64 = 2.0 * std::f64::consts::E;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return domain(format!("{name} must be finite and > 0, got {v}"));
    }
    Ok(())
}

/// `max(0, (1 - e^-c)(1 - 1/beta))`.
pub fn capacity(beta: f64, c: f64) -> Result<f64> {
    let erasure = index_genie_bound(c)?;
    let types = type_count_bound(beta)?;
    Ok((erasure * types).max(0.0))
}

/// `1 - e^-c`: the rate if the decoder also learned every sample's index.
pub fn index_genie_bound(c: f64) -> Result<f64> {
    check_positive("c", c)?;
    Ok(-(-c).exp_m1())
}

/// `1 - 1/beta`, unclamped (negative for `beta < 1`).
pub fn type_count_bound(beta: f64) -> Result<f64> {
    check_positive("beta", beta)?;
    Ok(1.0 - 1.0 / beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityPoint {
    pub beta: f64,
    pub c: f64,
    pub capacity: f64,
    pub index_genie_bound: f64,
    pub type_count_bound: f64,
}

pub fn capacity_point(beta: f64, c: f64) -> Result<CapacityPoint> {
    Ok(CapacityPoint {
        beta,
        c,
        capacity: capacity(beta, c)?,
        index_genie_bound: index_genie_bound(c)?,
        type_count_bound: type_count_bound(beta)?,
    })
}

/// `T[a, b] = C(a + b - 1, b)`, the number of vectors in `Z_+^a` summing to `b`.
pub fn type_count_exact(a: u64, b: u64) -> BigUint {
    assert!(a >= 1, "type count needs a >= 1");
    let n = a - 1 + b;
    let k = b.min(a - 1);
    // after step i the accumulator equals C(n - k + i, i), so each division is exact
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// Natural log of a big integer.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `b ln(e (a + b - 1) / b)`, the log of the exponential upper bound on `T[a, b]`.
pub fn type_count_upper_log(a: u64, b: u64) -> Result<f64> {
    if a == 0 {
        return domain("a must be >= 1");
    }
    if b == 0 {
        return domain("the exponential bound on T[a, b] is undefined for b = 0");
    }
    let b_f = b as f64;
    Ok(b_f * (1.0 + ((a - 1 + b) as f64 / b_f).ln()))
}

/// The 0/1 string of a type: `x_1` ones, a zero, `x_2` ones, ..., `x_a` ones.
pub fn type_to_string(x: &[u64]) -> Vec<u8> {
    let mut s = Vec::new();
    for (i, &xi) in x.iter().enumerate() {
        if i > 0 {
            s.push(0);
        }
        s.extend(std::iter::repeat_n(1u8, xi as usize));
    }
    s
}

/// Inverse of [`type_to_string`]: run lengths of ones between zeros.
pub fn string_to_type(s: &[u8]) -> Vec<u64> {
    let mut x = vec![0u64];
    for &bit in s {
        match bit {
            0 => x.push(0),
            _ => *x.last_mut().expect("nonempty") += 1,
        }
    }
    x
}

/// Rearranges `s` into its lexicographic successor; false at the last one.
fn next_permutation(s: &mut [u8]) -> bool {
    let Some(i) = s.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = s.iter().rposition(|&v| v > s[i]).expect("successor exists");
    s.swap(i, j);
    s[i + 1..].reverse();
    true
}

/// All vectors in `Z_+^a` summing to `b`, in lexicographic order.
///
/// Walks the distinct arrangements of `a - 1` zeros and `b` ones in
/// lexicographic order and decodes each one; string order and vector order
/// coincide.
pub fn enumerate_types(a: u64, b: u64) -> Result<Vec<Vec<u64>>> {
    if a == 0 {
        return domain("a must be >= 1");
    }
    let count = type_count_exact(a, b);
    let size = count.to_u64().and_then(|t| t.checked_mul(a));
    match size {
        Some(s) if s <= ENUMERATION_GUARD => {}
        _ => {
            return Err(Error::Capacity(format!(
                "enumerating T[{a}, {b}] = {count} vectors of length {a} exceeds {ENUMERATION_GUARD} entries"
            )))
        }
    }
    let mut s: Vec<u8> = std::iter::repeat_n(0u8, (a - 1) as usize)
        .chain(std::iter::repeat_n(1u8, b as usize))
        .collect();
    let mut out = Vec::with_capacity(count.to_usize().unwrap_or(0));
    loop {
        out.push(string_to_type(&s));
        if !next_permutation(&mut s) {
            break;
        }
    }
    Ok(out)
}

/// Whether `ln(e + e M^(beta-1) / q) <= ln(alpha M^(beta-1))`, the step that
/// introduces the constant `alpha` into the finite-M converse.
pub fn alpha_step_holds(ln_m: f64, beta: f64, q: f64, alpha: f64) -> bool {
    let ln_x = (beta - 1.0) * ln_m - q.ln();
    // ln(e + e X/q) = 1 + ln(1 + X/q), computed without overflow
    let lhs = 1.0
        + if ln_x > 0.0 {
            ln_x + (-ln_x).exp().ln_1p()
        } else {
            ln_x.exp().ln_1p()
        };
    lhs <= alpha.ln() + (beta - 1.0) * ln_m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteRateBound {
    pub value: f64,
    /// `(1 - e^-c + delta)(1 - 1/beta)`, the `M -> infinity` limit at `P_E = 0`.
    pub limit: f64,
    /// The `alpha = 2e` step holds for both type counts at this `(M, beta, q)`.
    pub alpha_valid: bool,
    /// `beta <= 1`; the raw expression is returned with negative factors.
    pub degenerate: bool,
}

/// Finite-M right-hand side of the converse:
///
/// ```text
/// P_E ((beta-1)/beta + ln a/(beta ln M))
///   + (1 - e^-c + delta)(1 - 1/beta + ln a/(beta ln M)) + 2/(M L)
/// ```
///
/// with `a = 2e` and `L = beta log2 M`. `m` is a float so the bound can be
/// evaluated far beyond simulable pool sizes.
pub fn rate_upper_bound_finite_m(m: f64, beta: f64, c: f64, delta: f64, p_e: f64) -> Result<FiniteRateBound> {
    if !(m >= 2.0 && m.is_finite()) {
        return domain(format!("M must be finite and >= 2, got {m}"));
    }
    check_positive("beta", beta)?;
    check_positive("c", c)?;
    check_positive("delta", delta)?;
    if !(0.0..=1.0).contains(&p_e) {
        return domain(format!("P_E must lie in [0, 1], got {p_e}"));
    }
    let ln_m = m.ln();
    let correction = FINITE_M_ALPHA.ln() / (beta * ln_m);
    let q = 1.0 - (-c).exp() + delta;
    let l = beta * m.log2();
    let value = p_e * ((beta - 1.0) / beta + correction) + q * (1.0 - 1.0 / beta + correction) + 2.0 / (m * l);
    let alpha_valid = beta > 1.0
        && alpha_step_holds(ln_m, beta, q, FINITE_M_ALPHA)
        && alpha_step_holds(ln_m, beta, 1.0, FINITE_M_ALPHA);
    Ok(FiniteRateBound {
        value,
        limit: q * (1.0 - 1.0 / beta),
        alpha_valid,
        degenerate: beta <= 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force count of vectors in {0..b}^a summing to b.
    fn brute_count(a: u32, b: u64) -> u64 {
        (0..(b + 1).pow(a))
            .filter(|&code| {
                let mut rest = code;
                let mut sum = 0;
                for _ in 0..a {
                    sum += rest % (b + 1);
                    rest /= b + 1;
                }
                sum == b
            })
            .count() as u64
    }

    #[test]
    fn capacity_values() {
        assert_eq!(capacity(1.0, 5.0).unwrap(), 0.0);
        assert_eq!(capacity(0.5, 5.0).unwrap(), 0.0);
        assert!((capacity(2.0, 1.0).unwrap() - 0.316_060_279_414_278_84).abs() < 1e-15);
        assert!((capacity(1e9, 50.0).unwrap() - 1.0).abs() < 1e-8);
        assert!(capacity(0.0, 1.0).is_err());
        assert!(capacity(2.0, -1.0).is_err());
    }

    #[test]
    fn simple_bounds() {
        assert!((index_genie_bound(std::f64::consts::LN_2).unwrap() - 0.5).abs() < 1e-15);
        let tiny = index_genie_bound(1e-9).unwrap();
        assert!((tiny - 1e-9).abs() < 1e-17);
        assert_eq!(type_count_bound(2.0).unwrap(), 0.5);
        assert_eq!(type_count_bound(1.0).unwrap(), 0.0);
        assert_eq!(type_count_bound(0.5).unwrap(), -1.0);
        assert!(index_genie_bound(0.0).is_err());
        assert!(type_count_bound(-2.0).is_err());
    }

    #[test]
    fn capacity_dominated_by_both_bounds() {
        for i in 1..=40 {
            for j in 1..=40 {
                let (beta, c) = (i as f64 * 0.15, j as f64 * 0.2);
                let p = capacity_point(beta, c).unwrap();
                assert!(p.capacity <= p.index_genie_bound);
                assert!(p.capacity <= p.type_count_bound.max(0.0));
                if beta > 1.0 {
                    assert_eq!(p.capacity, (p.index_genie_bound * p.type_count_bound).max(0.0));
                } else {
                    assert_eq!(p.capacity, 0.0);
                }
            }
        }
    }

    #[test]
    fn type_counts_small() {
        assert_eq!(type_count_exact(3, 2), BigUint::from(6u32));
        assert_eq!(type_count_exact(2, 3), BigUint::from(4u32));
        assert_eq!(type_count_exact(7, 0), BigUint::one());
        assert_eq!(type_count_exact(1, 9), BigUint::one());
        for a in 1..=5u32 {
            for b in 0..=6u64 {
                assert_eq!(
                    type_count_exact(u64::from(a), b),
                    BigUint::from(brute_count(a, b)),
                    "a={a} b={b}"
                );
            }
        }
    }

    #[test]
    fn type_count_beyond_machine_words() {
        // T[64^2 + 1, 64] = C(4160, 64) has about 110 decimal digits
        let t = type_count_exact(64 * 64 + 1, 64);
        assert!(t.bits() > 300);
        let ln = ln_big(&t);
        let bound = type_count_upper_log(64 * 64 + 1, 64).unwrap();
        assert!(ln < bound);
    }

    #[test]
    fn ln_big_matches_f64() {
        for v in [1u64, 2, 6, 1 << 40, u64::MAX] {
            assert!((ln_big(&BigUint::from(v)) - (v as f64).ln()).abs() < 1e-12);
        }
        let huge = BigUint::one() << 5000u32;
        assert!((ln_big(&huge) - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn upper_log_examples() {
        assert!((type_count_upper_log(3, 2).unwrap() - 2.0 * (2.0 * std::f64::consts::E).ln()).abs() < 1e-12);
        assert!(6f64.ln() < type_count_upper_log(3, 2).unwrap());
        assert!((type_count_upper_log(2, 1).unwrap() - (2.0 * std::f64::consts::E).ln()).abs() < 1e-12);
        assert!(matches!(type_count_upper_log(3, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_types(2, 2).unwrap(), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(enumerate_types(1, 5).unwrap(), vec![vec![5]]);
        assert_eq!(enumerate_types(3, 0).unwrap(), vec![vec![0, 0, 0]]);
        assert_eq!(enumerate_types(1, 0).unwrap(), vec![vec![0]]);
        let v = enumerate_types(3, 2).unwrap();
        assert_eq!(
            v,
            vec![
                vec![0, 0, 2],
                vec![0, 1, 1],
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![1, 1, 0],
                vec![2, 0, 0]
            ]
        );
    }

    #[test]
    fn enumeration_guard() {
        assert!(matches!(enumerate_types(30, 30), Err(Error::Capacity(_))));
    }

    #[test]
    fn bijection_round_trip() {
        for x in enumerate_types(4, 5).unwrap() {
            let s = type_to_string(&x);
            assert_eq!(s.iter().filter(|&&v| v == 0).count(), 3);
            assert_eq!(s.iter().filter(|&&v| v == 1).count(), 5);
            assert_eq!(string_to_type(&s), x);
        }
    }

    #[test]
    fn finite_m_bound() {
        let cap = capacity(2.0, 1.0).unwrap();
        let r = rate_upper_bound_finite_m(1e6, 2.0, 1.0, 0.01, 3.0e-5).unwrap();
        assert!(r.value > cap && r.alpha_valid && !r.degenerate);
        let mut prev = f64::INFINITY;
        for k in 3..=9 {
            let v = rate_upper_bound_finite_m(10f64.powi(k), 2.0, 1.0, 0.01, 1e-3)
                .unwrap()
                .value;
            assert!(v < prev, "not decreasing at 1e{k}");
            prev = v;
        }
        let d = rate_upper_bound_finite_m(1e6, 0.8, 1.0, 0.01, 0.0).unwrap();
        assert!(d.degenerate && !d.alpha_valid);
    }

    #[test]
    fn finite_m_bound_limit_is_slow() {
        // P_E = 0: the excess over the limit is q ln(2e)/(beta ln M) + 2/(M L),
        // a 1/ln M decay.
        let (beta, c, delta) = (2.0, 1.0f64, 0.01);
        let q = 1.0 - (-c).exp() + delta;
        for m in [1e3, 1e6, 1e12, 1e100] {
            let r = rate_upper_bound_finite_m(m, beta, c, delta, 0.0).unwrap();
            let excess = q * FINITE_M_ALPHA.ln() / (beta * m.ln()) + 2.0 / (m * beta * m.log2());
            assert!((r.value - r.limit - excess).abs() < 1e-12);
        }
        let far = rate_upper_bound_finite_m(1e300, beta, c, delta, 0.0).unwrap();
        assert!(far.value - far.limit < 1e-3);
    }

    #[test]
    fn alpha_step_grid() {
        // closed form: e + e X/q <= 2e X  iff  X (2 - 1/q) >= 1, X = M^(beta-1)
        for m in [2f64, 10.0, 1e3, 1e6] {
            for beta in [1.01, 1.5, 2.0, 4.0, 8.0] {
                for q in [0.3, 0.45, 0.6, 0.7, 0.9, 1.0] {
                    let expected = m.powf(beta - 1.0) * (2.0 - 1.0 / q) >= 1.0;
                    assert_eq!(
                        alpha_step_holds(m.ln(), beta, q, FINITE_M_ALPHA),
                        expected,
                        "{m} {beta} {q}"
                    );
                }
            }
        }
        // q = 1 (the full-pool type count) is always fine
        assert!(alpha_step_holds(2f64.ln(), 1.0001, 1.0, FINITE_M_ALPHA));
        assert!(!alpha_step_holds(2f64.ln(), 2.0, 0.3, FINITE_M_ALPHA));
    }
}

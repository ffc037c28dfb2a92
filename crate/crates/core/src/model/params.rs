use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Scaling parameters of one channel instance.
///
/// `L = round(beta * log2 M)` and `N = round(c * M)`; both roundings are
/// half-up. `beta` and `c` are kept as given so analytic formulas can use the
/// real-valued scaling laws while simulations use the integer counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    m: u64,
    l: u32,
    beta: f64,
    c: f64,
    n: u64,
}

/// Rounds half-up (`2.5 -> 3`, `-2.5 -> -2`).
pub fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

/// Builds [`ChannelParams`] from the pool size and the two scaling exponents.
pub fn derive_params(m: u64, beta: f64, c: f64) -> Result<ChannelParams> {
    ChannelParams::new(m, beta, c)
}

impl ChannelParams {
    pub fn new(m: u64, beta: f64, c: f64) -> Result<Self> {
        if m < 2 {
            return domain(format!("M must be >= 2, got {m}"));
        }
        check_positive("beta", beta)?;
        check_positive("c", c)?;
        let l = round_half_up(beta * (m as f64).log2());
        if l < 1.0 {
            return domain(format!("L = round(beta * log2 M) = {l} is zero for beta={beta}, M={m}"));
        }
        if l > f64::from(u32::MAX) {
            return domain(format!("L = {l} does not fit in 32 bits"));
        }
        let n = round_half_up(c * m as f64);
        if n < 1.0 {
            return domain(format!("N = round(c * M) = {n} is zero for c={c}, M={m}"));
        }
        Ok(Self {
            m,
            l: l as u32,
            beta,
            c,
            n: n as u64,
        })
    }

    /// Parameters for a pool whose molecule length is fixed up front
    /// (e.g. by a codec); `beta` is then `L / log2 M` exactly.
    pub fn from_lengths(m: u64, l: u32, c: f64) -> Result<Self> {
        if m < 2 {
            return domain(format!("M must be >= 2, got {m}"));
        }
        if l == 0 {
            return domain("L must be >= 1");
        }
        check_positive("c", c)?;
        let n = round_half_up(c * m as f64);
        if n < 1.0 {
            return domain(format!("N = round(c * M) = {n} is zero for c={c}, M={m}"));
        }
        Ok(Self {
            m,
            l,
            beta: f64::from(l) / (m as f64).log2(),
            c,
            n: n as u64,
        })
    }

    /// Bypasses the `M >= 2` rule; only for degenerate test pools.
    #[cfg(test)]
    pub(crate) fn degenerate(m: u64, l: u32, n: u64) -> Self {
        Self {
            m,
            l,
            beta: f64::INFINITY,
            c: n as f64 / m as f64,
            n,
        }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `L / log2 M`, the exponent actually realised after rounding.
    pub fn beta_effective(&self) -> f64 {
        f64::from(self.l) / (self.m as f64).log2()
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return domain(format!("{name} must be finite and > 0, got {v}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn exact_powers() {
        let p = derive_params(1024, 2.0, 1.0).unwrap();
        assert_eq!((p.l(), p.n()), (20, 1024));
        let p = derive_params(1024, 4.0, 2.0).unwrap();
        assert_eq!((p.l(), p.n()), (40, 2048));
    }

    #[test]
    fn non_power_of_two_rounds() {
        // log2(1000) = 9.965784..., 2 * that = 19.93 -> 20
        let p = derive_params(1000, 2.0, 0.5).unwrap();
        assert_eq!((p.l(), p.n()), (20, 500));
        let log_m = 1000f64.log2();
        assert!((f64::from(p.l()) / log_m - p.beta()).abs() <= 1.0 / log_m);
    }

    #[test]
    fn half_up() {
        assert_eq!(round_half_up(2.5), 3.0);
        assert_eq!(round_half_up(2.4999), 2.0);
        // M=2, c=0.25 -> N = round(0.5) = 1
        assert_eq!(derive_params(2, 1.0, 0.25).unwrap().n(), 1);
    }

    #[test]
    fn rejects_bad_domain() {
        for (m, b, c) in [
            (1, 2.0, 1.0),
            (0, 2.0, 1.0),
            (16, 0.0, 1.0),
            (16, -1.0, 1.0),
            (16, 2.0, 0.0),
            (16, f64::NAN, 1.0),
            (16, 2.0, f64::INFINITY),
        ] {
            assert!(matches!(derive_params(m, b, c), Err(Error::Domain(_))), "{m} {b} {c}");
        }
        // beta * log2 M = 0.1 * 4 rounds to 0
        assert!(matches!(derive_params(16, 0.1, 1.0), Err(Error::Domain(_))));
        // c * M rounds to 0
        assert!(matches!(derive_params(16, 2.0, 0.01), Err(Error::Domain(_))));
    }

    #[test]
    fn from_lengths_beta_exact() {
        let p = ChannelParams::from_lengths(1024, 40, 2.0).unwrap();
        assert_eq!(p.beta(), 4.0);
        assert_eq!(p.n(), 2048);
    }
}

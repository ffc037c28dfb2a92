//! Statistics of the number of distinct coupons `Q` after `N = cM` uniform
//! draws from `M` coupons: exact expectation, harmonic numbers, the waiting
//! time `T` to collect `alpha*M` coupons, and the Chebyshev tail bound on
//! `P(Q >= (1 - e^-c + delta) M)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::round_half_up;
use crate::report::Table;
use crate::rng::ChannelRng;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest `n` for which [`harmonic`] sums directly.
pub const HARMONIC_DIRECT_LIMIT: u64 = 1_000_000;

/// `E[Q] = M (1 - (1 - 1/M)^N)`, evaluated through `log1p`/`expm1`.
pub fn expected_distinct(m: u64, n: u64) -> f64 {
    assert!(m >= 1, "M must be >= 1");
    if n == 0 {
        return 0.0;
    }
    if m == 1 {
        return 1.0;
    }
    let m_f = m as f64;
    -m_f * (n as f64 * (-1.0 / m_f).ln_1p()).exp_m1()
}

/// `(1 - 1/M)^N`, the probability that a fixed coupon is never drawn.
pub fn miss_probability(m: u64, n: u64) -> f64 {
    assert!(m >= 1, "M must be >= 1");
    if m == 1 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (n as f64 * (-1.0 / m as f64).ln_1p()).exp()
}

/// `H_n = sum_{i=1}^n 1/i`.
pub fn harmonic(n: u64) -> f64 {
    assert!(n >= 1, "harmonic number needs n >= 1");
    if n <= HARMONIC_DIRECT_LIMIT {
        (1..=n).rev().map(|i| 1.0 / i as f64).sum()
    } else {
        let x = n as f64;
        x.ln() + EULER_GAMMA + 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x)
    }
}

/// `ceil(alpha * M)`, the number of coupons the waiting-time analysis
/// collects. `Q` is an integer, so `Q >= alpha M` iff `Q >= ceil(alpha M)`.
/// A 1e-9 slack absorbs representation error in products such as `0.3 * 10`.
pub fn collected_count(m: u64, alpha: f64) -> u64 {
    (alpha * m as f64 - 1e-9).ceil().max(0.0) as u64
}

fn check_alpha(m: u64, alpha: f64) -> Result<u64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must lie in (0, 1], got {alpha}"));
    }
    let a = collected_count(m, alpha);
    if a == 0 {
        return domain(format!("alpha * M = {} collects no coupon", alpha * m as f64));
    }
    if a >= m {
        return domain(format!(
            "(1 - alpha) M < 1 for alpha={alpha}, M={m}: full collection is outside the analysed regime"
        ));
    }
    Ok(a)
}

/// `E[T] = M (H_M - H_{M - a})` with `a = ceil(alpha M)`, summed directly as
/// `sum_{i<a} M / (M - i)`.
pub fn expected_waiting_time(m: u64, alpha: f64) -> Result<f64> {
    let a = check_alpha(m, alpha)?;
    let m_f = m as f64;
    Ok(m_f * (0..a).map(|i| 1.0 / (m - i) as f64).sum::<f64>())
}

/// Exact `Var[T]` and the two bounds used to control it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceBounds {
    /// `sum_{i<a} i M / (M - i)^2`.
    pub exact: f64,
    /// `M alpha / (2 (1 - alpha)^2)`.
    pub alpha_bound: f64,
    /// `2 M e^{2c}`.
    pub exp_bound: f64,
}

impl VarianceBounds {
    pub fn ordered(&self) -> bool {
        self.exact <= self.alpha_bound && self.alpha_bound <= self.exp_bound
    }
}

pub fn variance_upper_bound(m: u64, alpha: f64, c: f64) -> Result<VarianceBounds> {
    if alpha >= 1.0 {
        return domain(format!("alpha must be < 1, got {alpha}"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return domain(format!("c must be finite and > 0, got {c}"));
    }
    let a = check_alpha(m, alpha)?;
    let m_f = m as f64;
    let exact = (0..a)
        .map(|i| {
            let rest = (m - i) as f64;
            i as f64 * m_f / (rest * rest)
        })
        .sum();
    Ok(VarianceBounds {
        exact,
        alpha_bound: m_f * alpha / (2.0 * (1.0 - alpha).powi(2)),
        exp_bound: 2.0 * m_f * (2.0 * c).exp(),
    })
}

/// Inputs of the Chebyshev tail bound, validated on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBoundInputs {
    m: u64,
    c: f64,
    delta: f64,
}

impl TailBoundInputs {
    /// Requires `delta` in `(0, e^-c / 2]`.
    pub fn new(m: u64, c: f64, delta: f64) -> Result<Self> {
        if m < 1 {
            return domain("M must be >= 1");
        }
        if !(c > 0.0 && c.is_finite()) {
            return domain(format!("c must be finite and > 0, got {c}"));
        }
        let cap = (-c).exp() / 2.0;
        if !(delta > 0.0 && delta <= cap) {
            return domain(format!("delta must lie in (0, e^-c/2] = (0, {cap}], got {delta}"));
        }
        Ok(Self { m, c, delta })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `alpha = 1 - e^-c + delta`.
    pub fn alpha(&self) -> f64 {
        1.0 - (-self.c).exp() + self.delta
    }

    /// `xi = ln(e^-c / (e^-c - delta))`.
    pub fn xi(&self) -> f64 {
        let q = (-self.c).exp();
        -(-self.delta / q).ln_1p()
    }

    /// `xi - e^c / M`; the bound is defined only when this is positive.
    pub fn margin(&self) -> f64 {
        self.xi() - self.c.exp() / self.m as f64
    }
}

/// Which algebraic form of the tail bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum TailForm {
    /// `(1/M) 2e^{2c} / (xi - e^c/M)^2`, the inequality the proof establishes.
    #[default]
    Proof,
    /// `(1/M) e^{2c} / (xi - e^c/M)^2`, half the proof form.
    Displayed,
}

/// Upper bound on `P(Q >= (1 - e^-c + delta) M)` (proof form).
pub fn chebyshev_tail_bound(inputs: &TailBoundInputs) -> Result<f64> {
    chebyshev_tail_bound_form(inputs, TailForm::Proof)
}

pub fn chebyshev_tail_bound_form(inputs: &TailBoundInputs, form: TailForm) -> Result<f64> {
    let margin = inputs.margin();
    if margin <= 0.0 {
        return Err(Error::BoundUndefined { margin });
    }
    let proof = 2.0 * (2.0 * inputs.c).exp() / (margin * margin) / inputs.m as f64;
    Ok(match form {
        TailForm::Proof => proof,
        TailForm::Displayed => proof / 2.0,
    })
}

/// Number of distinct values among `n` uniform draws from `[0, m)`.
pub fn distinct_count(m: u64, n: u64, rng: &mut ChannelRng) -> u64 {
    let mut seen = vec![0u64; (m as usize).div_ceil(64)];
    let mut hit = 0u64;
    for _ in 0..n {
        let i = rng.below(m) as usize;
        let (word, bit) = (i / 64, 1u64 << (i % 64));
        if seen[word] & bit == 0 {
            seen[word] |= bit;
            hit += 1;
        }
    }
    hit
}

/// Empirical tail frequency at one `delta`, next to its bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub delta: f64,
    /// `(1 - e^-c + delta) M`.
    pub threshold: f64,
    /// Fraction of trials with `Q >= threshold`.
    pub empirical: f64,
    /// Proof-form bound, `None` when `M` is too small for this `delta`.
    pub bound: Option<f64>,
    pub displayed_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistinctSummary {
    pub m: u64,
    pub n: u64,
    pub c: f64,
    pub trials: u64,
    /// Mean of `Q / M`.
    pub mean: f64,
    /// Sample standard deviation of `Q / M`.
    pub std: f64,
    pub tails: Vec<TailEstimate>,
    #[serde(skip)]
    pub counts: Vec<u64>,
}

impl DistinctSummary {
    /// `E[Q] / M`.
    pub fn analytic_mean(&self) -> f64 {
        expected_distinct(self.m, self.n) / self.m as f64
    }

    /// Standard error of [`mean`](Self::mean).
    pub fn std_error(&self) -> f64 {
        self.std / (self.trials as f64).sqrt()
    }

    /// Per-trial rows: `trial, M, N, Q, fraction`.
    pub fn trials_table(&self) -> Table {
        let mut t = Table::new(&["trial", "M", "N", "Q", "fraction"]);
        for (i, &q) in self.counts.iter().enumerate() {
            t.push(vec![
                i.into(),
                self.m.into(),
                self.n.into(),
                q.into(),
                (q as f64 / self.m as f64).into(),
            ]);
        }
        t
    }

    /// `{mean, std, tails: [{delta, empirical, bound}]}`.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mean": self.mean,
            "std": self.std,
            "tails": self.tails.iter().map(|t| serde_json::json!({
                "delta": t.delta,
                "empirical": t.empirical,
                "bound": t.bound,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Runs `trials` coupon experiments with `N = round(cM)` draws each.
///
/// Trial `t` draws from `ChannelRng::for_trial(seed, t)`, the same stream
/// the genie channel would use for that trial.
pub fn simulate_distinct(m: u64, c: f64, trials: u64, seed: u64, deltas: &[f64]) -> Result<DistinctSummary> {
    if m < 1 {
        return domain("M must be >= 1");
    }
    if trials == 0 {
        return domain("trials must be >= 1");
    }
    if !(c > 0.0 && c.is_finite()) {
        return domain(format!("c must be finite and > 0, got {c}"));
    }
    let inputs: Vec<TailBoundInputs> = deltas
        .iter()
        .map(|&d| TailBoundInputs::new(m, c, d))
        .collect::<Result<_>>()?;
    let n = round_half_up(c * m as f64) as u64;
    let counts: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|t| distinct_count(m, n, &mut ChannelRng::for_trial(seed, t)))
        .collect();

    let m_f = m as f64;
    let fractions = counts.iter().map(|&q| q as f64 / m_f);
    let mean = fractions.clone().sum::<f64>() / trials as f64;
    let std = if trials > 1 {
        (fractions.map(|f| (f - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt()
    } else {
        0.0
    };
    let tails = inputs
        .iter()
        .map(|inp| {
            let threshold = inp.alpha() * m_f;
            let hits = counts.iter().filter(|&&q| q as f64 >= threshold).count();
            TailEstimate {
                delta: inp.delta(),
                threshold,
                empirical: hits as f64 / trials as f64,
                bound: chebyshev_tail_bound(inp).ok(),
                displayed_bound: chebyshev_tail_bound_form(inp, TailForm::Displayed).ok(),
            }
        })
        .collect();
    Ok(DistinctSummary {
        m,
        n,
        c,
        trials,
        mean,
        std,
        tails,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Mean distinct count over all `m^n` index sequences.
    fn enumerate_mean_distinct(m: u64, n: u32) -> f64 {
        let total: u64 = (0..m.pow(n))
            .map(|mut code| {
                let mut seen = 0u64;
                for _ in 0..n {
                    seen |= 1 << (code % m);
                    code /= m;
                }
                u64::from(seen.count_ones())
            })
            .sum();
        total as f64 / m.pow(n) as f64
    }

    #[test]
    fn expected_distinct_matches_enumeration() {
        for m in 1..=4u64 {
            for n in 0..=6u32 {
                let exact = enumerate_mean_distinct(m, n);
                let got = expected_distinct(m, u64::from(n));
                let rel = if exact == 0.0 {
                    got.abs()
                } else {
                    ((got - exact) / exact).abs()
                };
                assert!(rel <= 1e-12, "M={m} N={n}: {got} vs {exact}");
            }
        }
        assert_eq!(expected_distinct(2, 2), 1.5);
        assert_eq!(expected_distinct(7, 0), 0.0);
    }

    #[test]
    fn expected_distinct_large_m_limit() {
        let frac = expected_distinct(100_000, 100_000) / 1e5;
        assert!((frac - (1.0 - (-1f64).exp())).abs() < 1e-4);
    }

    #[test]
    fn harmonic_small_values() {
        assert_eq!(harmonic(1), 1.0);
        assert!((harmonic(4) - 25.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn harmonic_sandwich() {
        for n in (0..=6).map(|k| 10u64.pow(k)) {
            let gap = harmonic(n) - (n as f64).ln() - EULER_GAMMA;
            assert!(gap >= 0.0 && gap <= 1.0 / (2.0 * n as f64), "n={n} gap={gap}");
        }
    }

    #[test]
    fn harmonic_asymptotic_branch_continuous() {
        // asymptotic formula at the switch point agrees with direct summation
        let direct: f64 = (1..=HARMONIC_DIRECT_LIMIT + 1).rev().map(|i| 1.0 / i as f64).sum();
        assert!((harmonic(HARMONIC_DIRECT_LIMIT + 1) - direct).abs() < 1e-12);
    }

    #[test]
    fn waiting_time_small_cases() {
        assert!((expected_waiting_time(4, 0.25).unwrap() - 1.0).abs() < 1e-15);
        assert!((expected_waiting_time(4, 0.5).unwrap() - 7.0 / 3.0).abs() < 1e-15);
        assert!(expected_waiting_time(4, 1.0).is_err());
        // ceil(0.4) = 1 coupon; ceil(3.6) = 4 is full collection
        assert!((expected_waiting_time(4, 0.1).unwrap() - 1.0).abs() < 1e-15);
        assert!(expected_waiting_time(4, 0.9).is_err());
        assert!(expected_waiting_time(4, 0.0).is_err());
    }

    #[test]
    fn waiting_time_equals_harmonic_difference() {
        for (m, alpha) in [(1000u64, 0.6), (12345, 0.31), (100_000, 0.9)] {
            let a = collected_count(m, alpha);
            let via_h = m as f64 * (harmonic(m) - harmonic(m - a));
            let direct = expected_waiting_time(m, alpha).unwrap();
            assert!(((via_h - direct) / direct).abs() < 1e-10, "{m} {alpha}");
        }
    }

    #[test]
    fn waiting_time_lower_bound_chain() {
        for c in [0.5, 1.0, 2.0] {
            for m in [1_000u64, 10_000, 100_000] {
                let inp = TailBoundInputs::new(m, c, (-c).exp() / 4.0).unwrap();
                let n = round_half_up(c * m as f64);
                let et = expected_waiting_time(m, inp.alpha()).unwrap();
                let lower = n + m as f64 * inp.xi() - c.exp() - 2.0;
                assert!(et >= lower, "c={c} M={m}: {et} < {lower}");
                // intermediate step: -M ln(1 - alpha) - e^c
                assert!(et >= -(m as f64) * (1.0 - inp.alpha()).ln() - c.exp() - 2.0);
            }
        }
    }

    #[test]
    fn variance_small_cases() {
        assert_eq!(variance_upper_bound(4, 0.25, 1.0).unwrap().exact, 0.0);
        assert!((variance_upper_bound(4, 0.5, 1.0).unwrap().exact - 4.0 / 9.0).abs() < 1e-15);
        assert!(variance_upper_bound(4, 1.0, 1.0).is_err());
    }

    #[test]
    fn variance_ordering_in_tail_regime() {
        for c in [0.5, 1.0, 2.0, 3.0] {
            for m in [100u64, 1_000, 10_000, 100_000] {
                for frac in [0.05, 0.25, 0.5] {
                    let inp = TailBoundInputs::new(m, c, frac * (-c).exp()).unwrap();
                    let v = variance_upper_bound(m, inp.alpha(), c).unwrap();
                    assert!(v.ordered(), "c={c} M={m} frac={frac}: {v:?}");
                }
            }
        }
    }

    #[test]
    fn alpha_variance_bound_has_no_small_m_counterexample() {
        // exhaustive over every collected count a < M for M < 200, alpha at the
        // smallest value whose ceil(alpha M) is a
        for m in 2u64..200 {
            for a in 1..m {
                let alpha = (a - 1) as f64 / m as f64 + 1e-9;
                let v = variance_upper_bound(m, alpha, 1.0).unwrap();
                assert!(v.exact <= v.alpha_bound, "M={m} a={a}: {v:?}");
            }
        }
    }

    #[test]
    fn tail_bound_values() {
        let d = (-1f64).exp() / 2.0;
        let b = chebyshev_tail_bound(&TailBoundInputs::new(1_000_000, 1.0, d).unwrap()).unwrap();
        assert!((b - 3.075_894_557_771_9e-5).abs() < 1e-15, "{b}");
        let inp = TailBoundInputs::new(10_000, 1.0, d).unwrap();
        assert!((inp.xi() - std::f64::consts::LN_2).abs() < 1e-15);
        let b = chebyshev_tail_bound(&inp).unwrap();
        assert!((b - 3.078_284_351_044_8e-3).abs() < 1e-13, "{b}");
        let shown = chebyshev_tail_bound_form(&inp, TailForm::Displayed).unwrap();
        assert!((shown - b / 2.0).abs() < 1e-18);
    }

    #[test]
    fn tail_bound_scales_inverse_m() {
        let d = (-1f64).exp() / 2.0;
        let at = |m| chebyshev_tail_bound(&TailBoundInputs::new(m, 1.0, d).unwrap()).unwrap();
        let ratio = at(1_000_000) * 1e6 / (at(100_000_000) * 1e8);
        assert!((ratio - 1.0).abs() < 1e-4);
        assert!(at(10_000_000) < at(1_000_000));
    }

    #[test]
    fn tail_domain() {
        let cap = (-1f64).exp() / 2.0;
        assert!(TailBoundInputs::new(100, 1.0, cap).is_ok());
        assert!(TailBoundInputs::new(100, 1.0, cap * (1.0 + 1e-12)).is_err());
        assert!(TailBoundInputs::new(100, 1.0, 0.0).is_err());
        let tiny = TailBoundInputs::new(10, 1.0, 0.01).unwrap();
        assert!(matches!(chebyshev_tail_bound(&tiny), Err(Error::BoundUndefined { .. })));
    }

    #[test]
    fn simulate_two_coupons() {
        let s = simulate_distinct(2, 1.0, 100_000, 3, &[]).unwrap();
        assert!((s.mean - 0.75).abs() <= 0.01, "{}", s.mean);
    }

    #[test]
    fn simulate_deterministic_and_tail_below_bound() {
        let d = (-1f64).exp() / 2.0;
        let a = simulate_distinct(10_000, 1.0, 200, 8, &[d]).unwrap();
        let b = simulate_distinct(10_000, 1.0, 200, 8, &[d]).unwrap();
        assert_eq!(a, b);
        assert!(a.tails[0].empirical <= a.tails[0].bound.unwrap());
        assert!((a.mean - a.analytic_mean()).abs() <= 4.0 * a.std_error() + 1e-12);
        assert_eq!(a.trials_table().rows.len(), 200);
    }

    #[test]
    fn monotonicity() {
        for m in [5u64, 50, 500] {
            let mut prev = 0.0;
            for n in 0..200 {
                let e = expected_distinct(m, n);
                assert!(e >= prev);
                prev = e;
            }
        }
        let mut prev = f64::INFINITY;
        for m in [2u64, 10, 100, 1_000, 10_000, 100_000] {
            let frac = expected_distinct(m, m) / m as f64;
            assert!(frac <= prev + 1e-15);
            prev = frac;
        }
    }
}

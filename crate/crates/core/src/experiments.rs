//! Seeded Monte Carlo experiments over parameter grids.
//!
//! Each run yields CSV tables and a list of self-checking assertions. Grid
//! cell `i` draws from sub-seed `trial_seed(seed, i)`; trials within a cell
//! are collected in trial order, so thread count never changes an output byte.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{capacity, capacity_point};
use crate::codec::{self, CodecConfig};
use crate::coupon::{simulate_distinct, TailBoundInputs};
use crate::error::{domain, Error, Result};
use crate::model::{erasure_fraction, round_half_up, sample_with_replacement, ChannelParams};
use crate::report::{write_atomic, Table};
use crate::rng::{trial_seed, ChannelRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Erasure,
    Distinct,
    Tail,
    CodecFrontier,
    CapacityCurve,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Erasure => "erasure",
            Self::Distinct => "distinct",
            Self::Tail => "tail",
            Self::CodecFrontier => "codec-frontier",
            Self::CapacityCurve => "capacity-curve",
        }
    }
}

/// Parameter lists; each runner reads the ones it needs and takes the
/// Cartesian product in field order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(rename = "M", default)]
    pub m: Vec<u64>,
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(rename = "L", default)]
    pub l: Vec<u32>,
    #[serde(default)]
    pub c: Vec<f64>,
    /// Absolute tail margins.
    #[serde(default)]
    pub delta: Vec<f64>,
    /// Tail margins as fractions of `e^-c`, in `(0, 1/2]`.
    #[serde(default)]
    pub delta_fraction: Vec<f64>,
    /// Code dimensions; empty means a sweep around the mean distinct count.
    #[serde(default)]
    pub k: Vec<u64>,
    /// Field widths; empty means the narrowest valid one.
    #[serde(default)]
    pub w: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub grid: Grid,
    #[serde(default = "one")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn one() -> u64 {
    1
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, grid: Grid, trials: u64, seed: u64) -> Self {
        Self {
            kind,
            grid,
            trials,
            seed,
            out: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Tables plus assertions from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub kind: ExperimentKind,
    /// `(file stem, table)`, first table is the main one.
    pub tables: Vec<(String, Table)>,
    pub assertions: Vec<Assertion>,
}

impl Report {
    fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            tables: Vec::new(),
            assertions: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn table(&self, stem: &str) -> Option<&Table> {
        self.tables.iter().find(|(s, _)| s == stem).map(|(_, t)| t)
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind.name(),
            "pass": self.pass(),
            "assertions": self.assertions,
        })
    }

    /// Writes `<stem>.csv` per table and `summary.json` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (stem, table) in &self.tables {
            let path = dir.join(format!("{stem}.csv"));
            write_atomic(&path, table.to_csv().as_bytes())?;
            written.push(path);
        }
        let path = dir.join("summary.json");
        let mut json = serde_json::to_string_pretty(&self.summary_json())?;
        json.push('\n');
        write_atomic(&path, json.as_bytes())?;
        written.push(path);
        Ok(written)
    }
}

pub fn run(spec: &ExperimentSpec) -> Result<Report> {
    if spec.trials == 0 {
        return domain("trials must be >= 1");
    }
    match spec.kind {
        ExperimentKind::Erasure => run_erasure(spec),
        ExperimentKind::Distinct | ExperimentKind::Tail => run_distinct_tail(spec),
        ExperimentKind::CodecFrontier => run_codec_frontier(spec),
        ExperimentKind::CapacityCurve => run_capacity_curve(spec),
    }
}

fn need<'a, T>(name: &str, v: &'a [T]) -> Result<&'a [T]> {
    if v.is_empty() {
        return domain(format!("grid.{name} must be non-empty"));
    }
    Ok(v)
}

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return domain(format!("c must be finite and > 0, got {c}"));
    }
    Ok(())
}

/// Five standard errors of a mean of `trials` binomial fractions out of `m`,
/// floored at `floor`.
fn tolerance(p: f64, m: u64, trials: u64, floor: f64) -> f64 {
    (5.0 * (p * (1.0 - p) / (m as f64 * trials as f64)).sqrt()).max(floor)
}

/// Per `(M, c)`: unsampled fraction against `(1 - 1/M)^N` and `e^-c`.
pub fn run_erasure(spec: &ExperimentSpec) -> Result<Report> {
    let g = &spec.grid;
    let mut report = Report::new(spec.kind);
    let mut table = Table::new(&[
        "M",
        "c",
        "N",
        "trials",
        "empirical",
        "analytic",
        "asymptotic",
        "gap_analytic",
        "gap_asymptotic",
        "tolerance",
    ]);
    let cells: Vec<(u64, f64)> = need("M", &g.m)?
        .iter()
        .flat_map(|&m| need("c", &g.c).into_iter().flatten().map(move |&c| (m, c)))
        .collect();
    for &(m, c) in &cells {
        check_c(c)?;
        ChannelParams::from_lengths(m, 1, c)?;
    }
    for (i, &(m, c)) in cells.iter().enumerate() {
        let n = round_half_up(c * m as f64) as u64;
        let seed = trial_seed(spec.seed, i as u64);
        let per_trial: Vec<f64> = (0..spec.trials)
            .into_par_iter()
            .map(|t| erasure_fraction(m, n, &mut ChannelRng::for_trial(seed, t)))
            .collect();
        let empirical = per_trial.iter().sum::<f64>() / spec.trials as f64;
        let analytic = crate::coupon::miss_probability(m, n);
        let asymptotic = (-c).exp();
        let tol = tolerance(analytic, m, spec.trials, 0.003);
        let gap = (empirical - analytic).abs();
        table.push(vec![
            m.into(),
            c.into(),
            n.into(),
            spec.trials.into(),
            empirical.into(),
            analytic.into(),
            asymptotic.into(),
            gap.into(),
            (empirical - asymptotic).abs().into(),
            tol.into(),
        ]);
        report.check(
            format!("erasure M={m} c={c}"),
            gap <= tol,
            format!("|{empirical} - {analytic}| <= {tol}"),
        );
    }
    for &c in &g.c {
        let mut ms: Vec<u64> = g.m.clone();
        ms.sort_unstable();
        ms.dedup();
        let gaps: Vec<f64> = ms
            .iter()
            .map(|&m| (crate::coupon::miss_probability(m, round_half_up(c * m as f64) as u64) - (-c).exp()).abs())
            .collect();
        let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
        report.check(
            format!("analytic approaches e^-c c={c}"),
            monotone,
            format!("gaps {gaps:?} along M {ms:?}"),
        );
    }
    report.tables.push(("erasure".into(), table));
    Ok(report)
}

/// Per `(M, c)`: distinct-fraction mean; per `(M, c, delta)`: tail frequency
/// against both forms of the Chebyshev bound.
pub fn run_distinct_tail(spec: &ExperimentSpec) -> Result<Report> {
    let g = &spec.grid;
    let mut report = Report::new(spec.kind);
    let mut means = Table::new(&["M", "c", "N", "trials", "mean", "analytic", "gap", "std", "tolerance"]);
    let mut tails = Table::new(&[
        "M",
        "c",
        "delta",
        "trials",
        "threshold",
        "empirical",
        "bound",
        "displayed_bound",
        "bound_holds",
    ]);
    let cells: Vec<(u64, f64)> = need("M", &g.m)?
        .iter()
        .flat_map(|&m| need("c", &g.c).into_iter().flatten().map(move |&c| (m, c)))
        .collect();
    let mut plans = Vec::with_capacity(cells.len());
    for &(m, c) in &cells {
        check_c(c)?;
        ChannelParams::from_lengths(m, 1, c)?;
        let mut deltas: Vec<f64> = g.delta.clone();
        deltas.extend(g.delta_fraction.iter().map(|f| f * (-c).exp()));
        for &d in &deltas {
            TailBoundInputs::new(m, c, d)?;
        }
        plans.push(deltas);
    }
    if spec.kind == ExperimentKind::Tail && plans.iter().all(Vec::is_empty) {
        return domain("tail experiment needs grid.delta or grid.delta_fraction");
    }

    for (i, (&(m, c), deltas)) in cells.iter().zip(&plans).enumerate() {
        let s = simulate_distinct(m, c, spec.trials, trial_seed(spec.seed, i as u64), deltas)?;
        let analytic = s.analytic_mean();
        let tol = tolerance(analytic, m, spec.trials, 0.003);
        let gap = (s.mean - analytic).abs();
        means.push(vec![
            m.into(),
            c.into(),
            s.n.into(),
            spec.trials.into(),
            s.mean.into(),
            analytic.into(),
            gap.into(),
            s.std.into(),
            tol.into(),
        ]);
        report.check(
            format!("distinct mean M={m} c={c}"),
            gap <= tol,
            format!("|{} - {analytic}| <= {tol}", s.mean),
        );
        for t in &s.tails {
            let holds = t.bound.map(|b| t.empirical <= b);
            tails.push(vec![
                m.into(),
                c.into(),
                t.delta.into(),
                spec.trials.into(),
                t.threshold.into(),
                t.empirical.into(),
                t.bound.map_or(f64::NAN, |b| b).into(),
                t.displayed_bound.map_or(f64::NAN, |b| b).into(),
                holds.map_or("undefined".to_string(), |h| h.to_string()).as_str().into(),
            ]);
            if let Some(holds) = holds {
                report.check(
                    format!("tail bound M={m} c={c} delta={}", t.delta),
                    holds,
                    format!("{} <= {}", t.empirical, t.bound.unwrap_or(f64::NAN)),
                );
            }
        }
    }
    if spec.kind == ExperimentKind::Tail {
        // at fixed (c, delta) the bound falls with M
        for &c in &g.c {
            let mut deltas: Vec<f64> = g.delta.clone();
            deltas.extend(g.delta_fraction.iter().map(|f| f * (-c).exp()));
            for d in deltas {
                let mut ms = g.m.clone();
                ms.sort_unstable();
                ms.dedup();
                let bounds: Vec<f64> = ms
                    .iter()
                    .filter_map(|&m| crate::coupon::chebyshev_tail_bound(&TailBoundInputs::new(m, c, d).ok()?).ok())
                    .collect();
                report.check(
                    format!("bound decreasing in M c={c} delta={d}"),
                    bounds.windows(2).all(|w| w[1] < w[0]),
                    format!("{bounds:?}"),
                );
            }
        }
        report.tables.push(("tail".into(), tails));
        report.tables.push(("distinct".into(), means));
    } else {
        report.tables.push(("distinct".into(), means));
        if !tails.rows.is_empty() {
            report.tables.push(("tail".into(), tails));
        }
    }
    Ok(report)
}

/// Narrowest field width giving a valid layout for `(m, l)`.
pub fn default_field_width(m: u64, l: u32) -> Result<u32> {
    (codec::gf::MIN_WIDTH..=codec::gf::MAX_WIDTH)
        .find(|&w| CodecConfig::new(m, l, w, m).layout().is_ok())
        .ok_or_else(|| Error::Config(format!("no field width in GF(2^2..2^20) fits M={m}, L={l}")))
}

/// `floor(mean - s * sd)` of the distinct count for `s` in `{4, 3.5, ..., 0}`,
/// then `k = M`.
pub fn default_k_sweep(m: u64, c: f64) -> Vec<u64> {
    let miss = (-c).exp();
    let (mean, sd) = ((1.0 - miss) * m as f64, (m as f64 * miss * (1.0 - miss)).sqrt());
    let mut ks: Vec<u64> = (0..=8)
        .map(|j| ((mean - (4.0 - 0.5 * j as f64) * sd).floor().max(1.0) as u64).min(m))
        .collect();
    ks.push(m);
    ks.dedup();
    ks
}

/// Outcome counts for one `(config, c)` over seeded channel trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundTrips {
    pub successes: u64,
    /// Decoder reported too few distinct positions.
    pub short: u64,
    /// Decoder returned different data or an unexpected error.
    pub wrong: u64,
    /// Trials whose outcome disagreed with `distinct positions >= k`.
    pub inconsistent: u64,
}

/// Encodes a random blob filling the code, then runs `trials` channel uses
/// at depth `c`. Trial `t` samples with `trial_seed(seed, t)`, so every `k`
/// at the same `(M, c, seed)` sees the same draws.
pub fn codec_round_trips(config: &CodecConfig, c: f64, trials: u64, seed: u64) -> Result<RoundTrips> {
    let layout = config.layout()?;
    let mut data = vec![0u8; layout.max_data_bytes() as usize];
    ChannelRng::new(seed).fill_bytes(&mut data);
    let params = ChannelParams::from_lengths(config.m, config.l, c)?;
    let pool = codec::encode(&data, config)?.with_params(params)?;
    let outcomes: Vec<(u8, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let samples = sample_with_replacement(&pool, trial_seed(seed, t));
            let mut seen = vec![false; config.m as usize];
            for d in samples.draws() {
                seen[d.molecule.read_bits(0, layout.index_bits()) as usize] = true;
            }
            let enough = seen.iter().filter(|&&s| s).count() as u64 >= config.k;
            let outcome = match codec::decode(&samples, config) {
                Ok(got) if got == data => 0,
                Err(Error::InsufficientCoverage { .. }) => 1,
                _ => 2,
            };
            (outcome, (outcome == 0) == enough)
        })
        .collect();
    let count = |o| outcomes.iter().filter(|(x, _)| *x == o).count() as u64;
    Ok(RoundTrips {
        successes: count(0),
        short: count(1),
        wrong: count(2),
        inconsistent: outcomes.iter().filter(|(_, ok)| !ok).count() as u64,
    })
}

/// Success frequency required for a `k` to count as reliable.
pub const RELIABLE_SUCCESS: f64 = 0.99;

/// Per `(M, L, c, w)` and `k`: round-trip success, rate and capacity. The
/// `frontier` table keeps the largest reliable `k` per cell.
pub fn run_codec_frontier(spec: &ExperimentSpec) -> Result<Report> {
    let g = &spec.grid;
    let mut report = Report::new(spec.kind);
    let mut sweep = Table::new(&[
        "M",
        "L",
        "c",
        "w",
        "k",
        "beta_eff",
        "trials",
        "successes",
        "success_rate",
        "achieved_rate",
        "capacity",
        "gap",
    ]);
    let mut frontier = Table::new(&[
        "M",
        "L",
        "c",
        "w",
        "beta_eff",
        "k_best",
        "achieved_rate",
        "capacity",
        "gap",
    ]);

    let mut cells = Vec::new();
    for &m in need("M", &g.m)? {
        let ls: Vec<u32> = if g.l.is_empty() {
            need("L or beta", &g.beta)?
                .iter()
                .map(|&b| ChannelParams::new(m, b, 1.0).map(|p| p.l()))
                .collect::<Result<_>>()?
        } else {
            g.l.clone()
        };
        for &l in &ls {
            for &c in need("c", &g.c)? {
                check_c(c)?;
                let ws = if g.w.is_empty() {
                    vec![default_field_width(m, l)?]
                } else {
                    g.w.clone()
                };
                for &w in &ws {
                    let ks = if g.k.is_empty() {
                        default_k_sweep(m, c)
                    } else {
                        g.k.clone()
                    };
                    for &k in &ks {
                        CodecConfig::new(m, l, w, k).layout()?;
                    }
                    cells.push((m, l, c, w, ks));
                }
            }
        }
    }

    let mut gaps_by_shape: Vec<((u64, u64), u64, f64)> = Vec::new();
    for (i, (m, l, c, w, ks)) in cells.into_iter().enumerate() {
        let seed = trial_seed(spec.seed, i as u64);
        let beta_eff = l as f64 / m.trailing_zeros() as f64;
        let cap = capacity(beta_eff, c)?;
        let mut best: Option<(u64, f64)> = None;
        for k in ks {
            let config = CodecConfig::new(m, l, w, k);
            let rt = codec_round_trips(&config, c, spec.trials, seed)?;
            let rate = codec::achieved_rate(&config)?;
            let success = rt.successes as f64 / spec.trials as f64;
            sweep.push(vec![
                m.into(),
                l.into(),
                c.into(),
                w.into(),
                k.into(),
                beta_eff.into(),
                spec.trials.into(),
                rt.successes.into(),
                success.into(),
                rate.into(),
                cap.into(),
                (cap - rate).into(),
            ]);
            report.check(
                format!("never wrong data M={m} L={l} c={c} k={k}"),
                rt.wrong == 0 && rt.inconsistent == 0,
                format!("wrong={} inconsistent={}", rt.wrong, rt.inconsistent),
            );
            report.check(
                format!("rate below capacity M={m} L={l} c={c} k={k}"),
                rate <= 1.0 - 1.0 / beta_eff,
                format!("{rate}"),
            );
            if success >= RELIABLE_SUCCESS && best.is_none_or(|(bk, _)| k > bk) {
                best = Some((k, rate));
            }
        }
        let Some((k_best, rate)) = best else {
            report.check(
                format!("reliable k exists M={m} L={l} c={c}"),
                false,
                "no k reached the success threshold",
            );
            continue;
        };
        frontier.push(vec![
            m.into(),
            l.into(),
            c.into(),
            w.into(),
            beta_eff.into(),
            k_best.into(),
            rate.into(),
            cap.into(),
            (cap - rate).into(),
        ]);
        // group by (beta_eff, c) through their bit patterns
        gaps_by_shape.push(((beta_eff.to_bits(), c.to_bits()), m, cap - rate));
    }

    gaps_by_shape.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    for group in gaps_by_shape.chunk_by(|a, b| a.0 == b.0) {
        if group.len() < 2 {
            continue;
        }
        let gaps: Vec<f64> = group.iter().map(|x| x.2).collect();
        let ms: Vec<u64> = group.iter().map(|x| x.1).collect();
        report.check(
            format!(
                "gap shrinks with M beta_eff={} c={}",
                f64::from_bits(group[0].0 .0),
                f64::from_bits(group[0].0 .1)
            ),
            gaps.windows(2).all(|w| w[1] < w[0]),
            format!("gaps {gaps:?} along M {ms:?}"),
        );
    }
    report.tables.push(("codec-frontier".into(), sweep));
    report.tables.push(("frontier".into(), frontier));
    Ok(report)
}

/// Pure evaluation of capacity and both simple bounds on a `(beta, c)` grid.
pub fn run_capacity_curve(spec: &ExperimentSpec) -> Result<Report> {
    let g = &spec.grid;
    let mut report = Report::new(spec.kind);
    let mut table = Table::new(&[
        "beta",
        "c",
        "capacity",
        "index_genie_bound",
        "type_count_bound",
        "min_bound",
    ]);
    let mut worst = 0.0f64;
    let mut zero_rows_ok = true;
    for &beta in need("beta", &g.beta)? {
        for &c in need("c", &g.c)? {
            let p = capacity_point(beta, c)?;
            let min_bound = p.index_genie_bound.min(p.type_count_bound.max(0.0));
            worst = worst.max(p.capacity - min_bound);
            if beta <= 1.0 && p.capacity != 0.0 {
                zero_rows_ok = false;
            }
            table.push(vec![
                beta.into(),
                c.into(),
                p.capacity.into(),
                p.index_genie_bound.into(),
                p.type_count_bound.into(),
                min_bound.into(),
            ]);
        }
    }
    report.check(
        "capacity below both bounds",
        worst <= 0.0,
        format!("max excess {worst}"),
    );
    report.check("capacity zero for beta <= 1", zero_rows_ok, "");
    report.tables.push(("capacity-curve".into(), table));
    Ok(report)
}

//! The genie-aided channel used by the converse.
//!
//! Before sampling, every stored molecule receives a unique out-of-band tag
//! (its pool index). Duplicate draws of the same tagged molecule then collapse,
//! and the surviving set reduces to a [`FrequencyVector`]: for each observed
//! molecule content, the number of distinct tags seen with it.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{domain, Error, Result};
use crate::model::{self, ChannelParams, Molecule, MoleculePool, SampleSet};

/// A pool whose molecule `i` carries tag `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedPool {
    pool: MoleculePool,
}

impl TaggedPool {
    pub fn pool(&self) -> &MoleculePool {
        &self.pool
    }

    /// `(molecule, tag)` pairs in pool order.
    pub fn records(&self) -> impl Iterator<Item = (&Molecule, u64)> {
        self.pool.molecules().iter().zip(0u64..)
    }

    /// Bits needed to write any tag: `ceil(log2 M)`.
    pub fn tag_width(&self) -> u32 {
        let m = self.pool.params().m();
        64 - (m - 1).leading_zeros()
    }
}

pub fn tag_pool(pool: &MoleculePool) -> TaggedPool {
    TaggedPool { pool: pool.clone() }
}

/// Samples the tagged pool; draws the same index sequence as
/// [`model::sample_with_replacement`] under the same seed.
pub fn sample_tagged(tagged: &TaggedPool, seed: u64) -> SampleSet {
    model::channel_sample_indexed(&tagged.pool, seed, true)
}

/// The distinct `(molecule, tag)` pairs among the draws.
pub fn dedup_set(samples: &SampleSet) -> Result<HashSet<(Molecule, u64)>> {
    require_tags(samples)?;
    Ok(samples
        .draws()
        .iter()
        .map(|d| (d.molecule.clone(), d.tag.expect("checked")))
        .collect())
}

fn require_tags(samples: &SampleSet) -> Result<()> {
    if !samples.is_tagged() {
        return Err(Error::Contract("genie operations need tagged samples".into()));
    }
    Ok(())
}

/// Sparse frequency vector: observed content -> number of distinct tags.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVector {
    params: ChannelParams,
    counts: BTreeMap<Molecule, u64>,
}

pub fn frequency_vector(samples: &SampleSet) -> Result<FrequencyVector> {
    require_tags(samples)?;
    let mut seen = HashSet::with_capacity(samples.len());
    let mut counts = BTreeMap::new();
    for d in samples.draws() {
        let tag = d.tag.expect("checked");
        if seen.insert(tag) {
            *counts.entry(d.molecule.clone()).or_insert(0) += 1;
        }
    }
    Ok(FrequencyVector {
        params: *samples.params(),
        counts,
    })
}

impl FrequencyVector {
    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn counts(&self) -> &BTreeMap<Molecule, u64> {
        &self.counts
    }

    pub fn get(&self, y: &Molecule) -> u64 {
        self.counts.get(y).copied().unwrap_or(0)
    }

    /// `||f||_1`, equal to the number of distinct tags observed.
    pub fn l1_norm(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    /// Writes the text form: a `# M= L= N= Q=` header, then `hex count` per
    /// key in lexicographic bit order.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = format!("# M={} L={} N={} Q={}\n", p.m(), p.l(), p.n(), self.l1_norm());
        for (k, v) in &self.counts {
            writeln!(s, "{} {v}", k.to_hex()).expect("write to String");
        }
        s
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty frequency file".into()))??;
        let fields = parse_header(&header)?;
        let [m, l, n, q] = fields;
        let l = u32::try_from(l).map_err(|_| Error::Format("L out of range".into()))?;
        let params = ChannelParams::from_lengths(m, l, n as f64 / m as f64)?;
        let mut counts = BTreeMap::new();
        let mut prev: Option<Molecule> = None;
        for line in lines {
            let line = line?;
            let (hex, count) = line
                .split_once(' ')
                .ok_or_else(|| Error::Format(format!("bad line {line:?}")))?;
            let molecule = Molecule::from_packed(parse_hex(hex)?, l)?;
            let count: u64 = count
                .parse()
                .map_err(|_| Error::Format(format!("bad count in {line:?}")))?;
            if count == 0 {
                return Err(Error::Format("counts must be >= 1".into()));
            }
            if prev.as_ref().is_some_and(|p| p >= &molecule) {
                return Err(Error::Format("keys not strictly increasing".into()));
            }
            prev = Some(molecule.clone());
            counts.insert(molecule, count);
        }
        let f = Self { params, counts };
        if f.l1_norm() != q {
            return Err(Error::Format(format!("header Q={q} but counts sum to {}", f.l1_norm())));
        }
        Ok(f)
    }
}

fn parse_header(line: &str) -> Result<[u64; 4]> {
    let bad = || Error::Format(format!("bad header {line:?}"));
    let rest = line.strip_prefix("# ").ok_or_else(bad)?;
    let mut out = [0u64; 4];
    let mut parts = rest.split(' ');
    for (slot, key) in out.iter_mut().zip(["M", "L", "N", "Q"]) {
        let (k, v) = parts.next().and_then(|p| p.split_once('=')).ok_or_else(bad)?;
        if k != key {
            return Err(bad());
        }
        *slot = v.parse().map_err(|_| bad())?;
    }
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(out)
}

fn parse_hex(s: &str) -> Result<Vec<u8>> {
    if !s.len().is_multiple_of(2) {
        return Err(Error::Format(format!("odd-length hex {s:?}")));
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).map_err(|_| Error::Format(format!("bad hex {s:?}"))))
        .collect()
}

/// `f` with the leading coordinate `F0 = (1 - e^-c + delta) M - ||f||_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedFrequencyVector {
    pub f: FrequencyVector,
    pub delta: f64,
    pub f0: f64,
    /// `||f||_1 > (1 - e^-c + delta) M`.
    pub event: bool,
}

impl AugmentedFrequencyVector {
    /// `(1 - e^-c + delta) M`.
    pub fn threshold(&self) -> f64 {
        augment_threshold(self.f.params(), self.delta)
    }
}

fn augment_threshold(p: &ChannelParams, delta: f64) -> f64 {
    (1.0 - (-p.c()).exp() + delta) * p.m() as f64
}

pub fn augment(f: FrequencyVector, delta: f64) -> Result<AugmentedFrequencyVector> {
    let cap = (-f.params().c()).exp();
    if !(delta > 0.0 && delta <= cap) {
        return domain(format!("delta must lie in (0, e^-c] = (0, {cap}], got {delta}"));
    }
    let f0 = augment_threshold(f.params(), delta) - f.l1_norm() as f64;
    Ok(AugmentedFrequencyVector {
        f,
        delta,
        f0,
        event: f0 < 0.0,
    })
}

//! Index-based storage code.
//!
//! Molecule `i` is `i` in `log2 M` bits (big-endian) followed by a payload.
//! Data, behind a 32-bit big-endian byte-length header, fills the payloads
//! of molecules `0..k`. Each payload is cut into symbol columns; column by
//! column, molecules `k..M` carry the evaluations of the Lagrange interpolant
//! through the information symbols. A decoder that sees any `k` distinct
//! positions recovers the data exactly.

pub mod gf;
pub mod mds;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelParams, Molecule, MoleculePool, SampleSet};

use gf::{field, GaloisField};
use mds::{EvalRow, Interpolator};

/// Bits of the in-payload length header.
pub const LENGTH_HEADER_BITS: u64 = 32;

/// `{M, L, w, k}`; everything else is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecConfig {
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "L")]
    pub l: u32,
    /// Widest symbol, in bits.
    pub w: u32,
    /// Information molecules.
    pub k: u64,
}

/// A validated [`CodecConfig`] with its derived geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodecLayout {
    config: CodecConfig,
    index_bits: u32,
    payload_bits: u32,
    /// Symbol widths, left to right within the payload.
    columns: Vec<u32>,
}

impl CodecConfig {
    pub fn new(m: u64, l: u32, w: u32, k: u64) -> Self {
        Self { m, l, w, k }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.layout()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Validates the configuration and derives the payload geometry.
    ///
    /// The payload is split into `ceil(payload_bits / w)` columns of nearly
    /// equal width (widths differ by at most one), so every payload bit
    /// carries data. Each column width `v` needs `2^v > M` distinct
    /// evaluation points.
    pub fn layout(&self) -> Result<CodecLayout> {
        let CodecConfig { m, l, w, k } = *self;
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::Config(format!("M must be a power of two >= 2, got {m}")));
        }
        let index_bits = m.trailing_zeros();
        if l <= index_bits {
            return Err(Error::Config(format!(
                "L={l} leaves no payload after {index_bits} index bits"
            )));
        }
        let payload_bits = l - index_bits;
        if gf::reduction_polynomial(w).is_none() {
            return Err(Error::Config(format!(
                "field width w={w} unsupported (need {}..={})",
                gf::MIN_WIDTH,
                gf::MAX_WIDTH
            )));
        }
        if w > payload_bits {
            return Err(Error::Config(format!("w={w} exceeds the {payload_bits} payload bits")));
        }
        if (1u64 << w) <= m {
            return Err(Error::Config(format!(
                "2^w = {} <= M = {m}: not enough evaluation points",
                1u64 << w
            )));
        }
        let count = payload_bits.div_ceil(w);
        let (base, extra) = (payload_bits / count, payload_bits % count);
        let columns: Vec<u32> = (0..count).map(|i| base + u32::from(i < extra)).collect();
        if let Some(&narrow) = columns.iter().find(|&&v| (1u64 << v) <= m) {
            return Err(Error::Config(format!(
                "payload of {payload_bits} bits splits into {count} columns of {narrow}..{} bits; \
                 2^{narrow} <= M = {m}, choose a larger w",
                base + u32::from(extra > 0)
            )));
        }
        if k == 0 || k > m {
            return Err(Error::Config(format!("k must lie in [1, M={m}], got {k}")));
        }
        if k * u64::from(payload_bits) < LENGTH_HEADER_BITS {
            return Err(Error::Config(format!(
                "k={k} payloads of {payload_bits} bits cannot hold the {LENGTH_HEADER_BITS}-bit length header"
            )));
        }
        Ok(CodecLayout {
            config: *self,
            index_bits,
            payload_bits,
            columns,
        })
    }
}

impl CodecLayout {
    pub fn config(&self) -> &CodecConfig {
        &self.config
    }

    pub fn index_bits(&self) -> u32 {
        self.index_bits
    }

    pub fn payload_bits(&self) -> u32 {
        self.payload_bits
    }

    pub fn symbols_per_molecule(&self) -> usize {
        self.columns.len()
    }

    pub fn column_widths(&self) -> &[u32] {
        &self.columns
    }

    /// Largest data size in bytes.
    pub fn max_data_bytes(&self) -> u64 {
        (self.config.k * u64::from(self.payload_bits)).saturating_sub(LENGTH_HEADER_BITS) / 8
    }

    /// Bit offset of each column within the molecule.
    fn column_offsets(&self) -> Vec<u32> {
        self.columns
            .iter()
            .scan(self.index_bits, |off, &v| {
                let here = *off;
                *off += v;
                Some(here)
            })
            .collect()
    }
}

/// `k * payload_bits / (M * L)`.
pub fn achieved_rate(config: &CodecConfig) -> Result<f64> {
    let layout = config.layout()?;
    Ok((config.k * u64::from(layout.payload_bits)) as f64 / (config.m * u64::from(config.l)) as f64)
}

/// `floor((1 - e^-c) M - 3 sqrt(M e^-c (1 - e^-c)))`, clamped to `[1, M]`:
/// the mean distinct count minus three binomial standard deviations.
pub fn suggest_k(m: u64, c: f64) -> u64 {
    let miss = (-c).exp();
    let m_f = m as f64;
    let k = ((1.0 - miss) * m_f - 3.0 * (m_f * miss * (1.0 - miss)).sqrt()).floor();
    (k.max(1.0) as u64).min(m)
}

/// Interpolators grouped by column width, shared by same-width columns.
struct ColumnPlan<'f> {
    field: &'f GaloisField,
    interp: Interpolator<'f>,
    rows: Vec<EvalRow>,
}

fn plans(layout: &CodecLayout, known: &[u32], targets: &[u32]) -> Result<BTreeMap<u32, ColumnPlan<'static>>> {
    let mut out = BTreeMap::new();
    for &v in layout.column_widths() {
        if out.contains_key(&v) {
            continue;
        }
        let field = field(v)?;
        let interp = Interpolator::new(field, known.to_vec());
        let rows = targets.iter().map(|&t| interp.row(t)).collect();
        out.insert(v, ColumnPlan { field, interp, rows });
    }
    Ok(out)
}

/// Writes `data` into an `M`-molecule pool. The pool's coverage depth is 1;
/// rebind it with [`MoleculePool::with_params`] before sampling.
pub fn encode(data: &[u8], config: &CodecConfig) -> Result<MoleculePool> {
    let layout = config.layout()?;
    let (m, k) = (config.m, config.k);
    let bits_needed = LENGTH_HEADER_BITS + 8 * data.len() as u64;
    let capacity = k * u64::from(layout.payload_bits);
    if bits_needed > capacity || data.len() as u64 > u64::from(u32::MAX) {
        return Err(Error::Capacity(format!(
            "{} data bytes need {bits_needed} bits; k={k} molecules hold {capacity}",
            data.len()
        )));
    }

    let mut stream = Vec::with_capacity(4 + data.len());
    stream.extend_from_slice(&(data.len() as u32).to_be_bytes());
    stream.extend_from_slice(data);
    let mut reader = BitReader::new(&stream);

    let mut molecules: Vec<Molecule> = (0..m)
        .map(|i| {
            let mut mol = Molecule::zeros(config.l);
            mol.write_bits(0, layout.index_bits, i);
            mol
        })
        .collect();
    for mol in molecules.iter_mut().take(k as usize) {
        let mut off = layout.index_bits;
        while off < config.l {
            let width = (config.l - off).min(32);
            mol.write_bits(off, width, reader.take(width));
            off += width;
        }
    }

    if k < m {
        let known: Vec<u32> = (0..k as u32).collect();
        let targets: Vec<u32> = (k as u32..m as u32).collect();
        let plans = plans(&layout, &known, &targets)?;
        let offsets = layout.column_offsets();
        let (info, parity) = molecules.split_at_mut(k as usize);
        for (&v, &off) in layout.column_widths().iter().zip(&offsets) {
            let plan = &plans[&v];
            let values: Vec<u32> = info.iter().map(|mol| mol.read_bits(off, v) as u32).collect();
            for (mol, row) in parity.iter_mut().zip(&plan.rows) {
                let s = plan.interp.evaluate(row, &values);
                debug_assert!(plan.field.contains(s));
                mol.write_bits(off, v, u64::from(s));
            }
        }
    }

    MoleculePool::new(ChannelParams::from_lengths(m, config.l, 1.0)?, molecules)
}

/// Recovers the data from channel samples (tags, if any, are ignored).
pub fn decode(samples: &SampleSet, config: &CodecConfig) -> Result<Vec<u8>> {
    decode_molecules(samples.draws().iter().map(|d| &d.molecule), config)
}

/// As [`decode`], over any collection of received molecules.
pub fn decode_molecules<'a>(received: impl IntoIterator<Item = &'a Molecule>, config: &CodecConfig) -> Result<Vec<u8>> {
    let layout = config.layout()?;
    let k = config.k as usize;
    let mut by_position: BTreeMap<u64, &Molecule> = BTreeMap::new();
    for mol in received {
        if mol.len() != config.l {
            return Err(Error::Contract(format!(
                "received molecule of length {}, config says L={}",
                mol.len(),
                config.l
            )));
        }
        let pos = mol.read_bits(0, layout.index_bits);
        match by_position.get(&pos) {
            Some(prev) if *prev != mol => return Err(Error::CorruptionDetected { position: pos }),
            Some(_) => {}
            None => {
                by_position.insert(pos, mol);
            }
        }
    }
    if by_position.len() < k {
        return Err(Error::InsufficientCoverage {
            needed: k,
            have: by_position.len(),
            deficit: k - by_position.len(),
        });
    }

    // the k smallest known positions: every surviving information molecule first
    let chosen: Vec<(u64, &Molecule)> = by_position.iter().take(k).map(|(&p, &m)| (p, m)).collect();
    let missing: Vec<u32> = (0..k as u32)
        .filter(|p| !by_position.contains_key(&u64::from(*p)))
        .collect();

    let mut payloads: Vec<Option<Molecule>> = vec![None; k];
    for &(p, mol) in &chosen {
        if (p as usize) < k {
            payloads[p as usize] = Some(mol.clone());
        }
    }
    if !missing.is_empty() {
        let known: Vec<u32> = chosen.iter().map(|&(p, _)| p as u32).collect();
        let plans = plans(&layout, &known, &missing)?;
        let offsets = layout.column_offsets();
        let mut rebuilt: Vec<Molecule> = missing
            .iter()
            .map(|&p| {
                let mut mol = Molecule::zeros(config.l);
                mol.write_bits(0, layout.index_bits, u64::from(p));
                mol
            })
            .collect();
        for (&v, &off) in layout.column_widths().iter().zip(&offsets) {
            let plan = &plans[&v];
            let values: Vec<u32> = chosen.iter().map(|(_, mol)| mol.read_bits(off, v) as u32).collect();
            for (mol, row) in rebuilt.iter_mut().zip(&plan.rows) {
                mol.write_bits(off, v, u64::from(plan.interp.evaluate(row, &values)));
            }
        }
        for (p, mol) in missing.iter().zip(rebuilt) {
            payloads[*p as usize] = Some(mol);
        }
    }

    let mut writer = BitWriter::default();
    for mol in payloads
        .into_iter()
        .map(|m| m.expect("all information positions filled"))
    {
        let mut off = layout.index_bits;
        while off < config.l {
            let width = (config.l - off).min(32);
            writer.put(mol.read_bits(off, width), width);
            off += width;
        }
    }
    let bytes = writer.finish();
    let len = u32::from_be_bytes(bytes[..4].try_into().expect("k * payload >= 32 bits checked by layout")) as u64;
    if len > layout.max_data_bytes() {
        return Err(Error::Format(format!(
            "length header says {len} bytes but the code holds at most {}",
            layout.max_data_bytes()
        )));
    }
    Ok(bytes[4..4 + len as usize].to_vec())
}

/// MSB-first reader that yields zeros past the end.
struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, width: u32) -> u64 {
        let mut v = 0u64;
        for _ in 0..width {
            let byte = self.bytes.get((self.pos / 8) as usize).copied().unwrap_or(0);
            v = (v << 1) | u64::from((byte >> (7 - self.pos % 8)) & 1);
            self.pos += 1;
        }
        v
    }
}

#[derive(Default)]
struct BitWriter {
    bytes: Vec<u8>,
    used: u32,
}

impl BitWriter {
    fn put(&mut self, value: u64, width: u32) {
        for j in (0..width).rev() {
            if self.used.is_multiple_of(8) {
                self.bytes.push(0);
            }
            let bit = ((value >> j) & 1) as u8;
            *self.bytes.last_mut().expect("pushed") |= bit << (7 - self.used % 8);
            self.used = (self.used + 1) % 8;
        }
    }

    /// Bytes written so far, zero-padded to at least the 4-byte header.
    fn finish(mut self) -> Vec<u8> {
        if self.bytes.len() < 4 {
            self.bytes.resize(4, 0);
        }
        self.bytes
    }
}

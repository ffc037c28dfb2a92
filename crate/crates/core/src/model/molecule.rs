use std::fmt;

use crate::error::{Error, Result};
use crate::rng::ChannelRng;

use super::ChannelParams;

/// A fixed-length bit-string, packed MSB-first into bytes.
///
/// Padding bits in the last byte are always zero, so derived equality,
/// hashing and ordering are bitwise (ordering is lexicographic for equal
/// lengths).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Molecule {
    bits: Vec<u8>,
    len: u32,
}

impl Molecule {
    pub fn zeros(len: u32) -> Self {
        Self {
            bits: vec![0; byte_len(len)],
            len,
        }
    }

    /// Wraps packed bytes; fails if the byte count is wrong or padding bits are set.
    pub fn from_packed(bits: Vec<u8>, len: u32) -> Result<Self> {
        if bits.len() != byte_len(len) {
            return Err(Error::Format(format!(
                "molecule of {len} bits needs {} bytes, got {}",
                byte_len(len),
                bits.len()
            )));
        }
        let m = Self { bits, len };
        if m.bits.last().is_some_and(|b| b & !tail_mask(len) != 0) {
            return Err(Error::Format("nonzero padding bits".into()));
        }
        Ok(m)
    }

    /// The low `len` bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: u32) -> Self {
        let mut m = Self::zeros(len);
        let width = len.min(64);
        let v = if width == 64 {
            value
        } else {
            value & ((1u64 << width) - 1)
        };
        m.write_bits(len - width, width, v);
        m
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut m = Self::zeros(bits.len() as u32);
        for (i, &b) in bits.iter().enumerate() {
            m.set_bit(i as u32, b);
        }
        m
    }

    pub fn random(len: u32, rng: &mut ChannelRng) -> Self {
        let mut bits = vec![0; byte_len(len)];
        rng.fill_bytes(&mut bits);
        if let Some(last) = bits.last_mut() {
            *last &= tail_mask(len);
        }
        Self { bits, len }
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_packed(&self) -> &[u8] {
        &self.bits
    }

    pub fn bit(&self, i: u32) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.bits[(i / 8) as usize] & (0x80 >> (i % 8)) != 0
    }

    pub fn set_bit(&mut self, i: u32, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 0x80 >> (i % 8);
        let byte = &mut self.bits[(i / 8) as usize];
        if value {
            *byte |= mask;
        } else {
            *byte &= !mask;
        }
    }

    /// Reads `width <= 64` bits starting at `offset` as a big-endian integer.
    pub fn read_bits(&self, offset: u32, width: u32) -> u64 {
        assert!(width <= 64 && offset + width <= self.len);
        (offset..offset + width).fold(0u64, |acc, i| (acc << 1) | u64::from(self.bit(i)))
    }

    /// Writes the low `width` bits of `value` big-endian starting at `offset`.
    pub fn write_bits(&mut self, offset: u32, width: u32, value: u64) {
        assert!(width <= 64 && offset + width <= self.len);
        for j in 0..width {
            self.set_bit(offset + j, (value >> (width - 1 - j)) & 1 == 1);
        }
    }

    /// Lowercase hex of the packed bytes.
    pub fn to_hex(&self) -> String {
        self.bits.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Molecule({}b:{})", self.len, self.to_hex())
    }
}

pub(crate) fn byte_len(bits: u32) -> usize {
    (bits as usize).div_ceil(8)
}

fn tail_mask(len: u32) -> u8 {
    match len % 8 {
        0 => 0xff,
        r => !(0xffu8 >> r),
    }
}

/// The channel input: exactly `M` molecules of length `L`, duplicates allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct MoleculePool {
    params: ChannelParams,
    molecules: Vec<Molecule>,
}

impl MoleculePool {
    pub fn new(params: ChannelParams, molecules: Vec<Molecule>) -> Result<Self> {
        if molecules.len() as u64 != params.m() {
            return Err(Error::Contract(format!(
                "pool holds {} molecules, params say M={}",
                molecules.len(),
                params.m()
            )));
        }
        if let Some((i, m)) = molecules.iter().enumerate().find(|(_, m)| m.len() != params.l()) {
            return Err(Error::Contract(format!(
                "molecule {i} has length {}, params say L={}",
                m.len(),
                params.l()
            )));
        }
        Ok(Self { params, molecules })
    }

    /// Molecule `i` is `i` written in binary over `L` bits; requires `2^L >= M`.
    pub fn indexed(params: ChannelParams) -> Result<Self> {
        if params.l() < 64 && (1u64 << params.l()) < params.m() {
            return Err(Error::Domain(format!(
                "L={} bits cannot hold {} distinct molecules",
                params.l(),
                params.m()
            )));
        }
        let molecules = (0..params.m()).map(|i| Molecule::from_u64(i, params.l())).collect();
        Self::new(params, molecules)
    }

    /// Independent uniformly random molecules (collisions possible for small `L`).
    pub fn random(params: ChannelParams, seed: u64) -> Self {
        let mut rng = ChannelRng::new(seed);
        let molecules = (0..params.m())
            .map(|_| Molecule::random(params.l(), &mut rng))
            .collect();
        Self { params, molecules }
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn molecules(&self) -> &[Molecule] {
        &self.molecules
    }

    pub fn get(&self, i: usize) -> &Molecule {
        &self.molecules[i]
    }

    pub fn len(&self) -> usize {
        self.molecules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.molecules.is_empty()
    }

    /// Same molecules, different coverage depth.
    pub fn with_params(self, params: ChannelParams) -> Result<Self> {
        Self::new(params, self.molecules)
    }

    /// First pair of equal molecules, if any.
    pub fn find_duplicate(&self) -> Option<(usize, usize)> {
        let mut seen = std::collections::HashMap::with_capacity(self.molecules.len());
        for (i, m) in self.molecules.iter().enumerate() {
            if let Some(&j) = seen.get(m) {
                return Some((j, i));
            }
            seen.insert(m, i);
        }
        None
    }
}

/// One channel output record.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Draw {
    pub molecule: Molecule,
    pub tag: Option<u64>,
}

/// The channel output: `N` draws, either all tagged or all untagged.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    params: ChannelParams,
    draws: Vec<Draw>,
}

impl SampleSet {
    pub fn new(params: ChannelParams, draws: Vec<Draw>) -> Result<Self> {
        if draws.len() as u64 != params.n() {
            return Err(Error::Contract(format!(
                "sample set holds {} draws, params say N={}",
                draws.len(),
                params.n()
            )));
        }
        Self::check_records(&params, &draws)?;
        Ok(Self { params, draws })
    }

    /// Accepts any number of records (e.g. a pool read back as samples).
    /// `params.n()` is not checked against the record count.
    pub fn from_records(params: ChannelParams, draws: Vec<Draw>) -> Result<Self> {
        Self::check_records(&params, &draws)?;
        Ok(Self { params, draws })
    }

    fn check_records(params: &ChannelParams, draws: &[Draw]) -> Result<()> {
        let tagged = draws.first().is_some_and(|d| d.tag.is_some());
        for d in draws {
            if d.tag.is_some() != tagged {
                return Err(Error::Contract(
                    "tags must be present on every record or on none".into(),
                ));
            }
            if d.molecule.len() != params.l() {
                return Err(Error::Contract(format!(
                    "draw has length {}, params say L={}",
                    d.molecule.len(),
                    params.l()
                )));
            }
            if let Some(t) = d.tag {
                if t >= params.m() {
                    return Err(Error::Contract(format!("tag {t} outside [0, {})", params.m())));
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn draws(&self) -> &[Draw] {
        &self.draws
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn is_tagged(&self) -> bool {
        self.draws.first().is_some_and(|d| d.tag.is_some())
    }

    /// The same draws in a different order.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.draws.len());
        Self {
            params: self.params,
            draws: order.iter().map(|&i| self.draws[i].clone()).collect(),
        }
    }
}

//! Binary pool (`DNAP`) and sample-set (`DNAS`) files.
//!
//! Pool layout, little-endian integers:
//!
//! ```text
//! "DNAP" | 0x01 | M: u64 | L: u32 | ceil(M*L/8) bytes of packed bits
//! ```
//!
//! Molecules are concatenated without per-record alignment, MSB-first within
//! each byte, zero-padded at the tail.
//!
//! Sample layout:
//!
//! ```text
//! "DNAS" | 0x01 | M: u64 | L: u32 | tagged: u8 | N: u64 | body
//! ```
//!
//! Untagged bodies pack the `N` molecules exactly like a pool. Tagged bodies
//! are byte-aligned records of `ceil(L/8)` molecule bytes followed by the tag
//! as a `u64`.

use std::io::{Read, Write};

use crate::error::{Error, Result};

use super::molecule::byte_len;
use super::{ChannelParams, Draw, Molecule, MoleculePool, SampleSet};

pub const POOL_MAGIC: &[u8; 4] = b"DNAP";
pub const SAMPLES_MAGIC: &[u8; 4] = b"DNAS";
pub const VERSION: u8 = 0x01;

/// Pool contents as stored on disk; the coverage depth is not part of the file.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolFile {
    pub m: u64,
    pub l: u32,
    pub molecules: Vec<Molecule>,
}

impl PoolFile {
    pub fn into_pool(self, c: f64) -> Result<MoleculePool> {
        let params = ChannelParams::from_lengths(self.m, self.l, c)?;
        MoleculePool::new(params, self.molecules)
    }
}

/// Either file kind, as accepted by the decoder.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelFile {
    Pool(PoolFile),
    Samples(SampleSet),
}

pub fn write_pool<W: Write>(mut w: W, pool: &MoleculePool) -> Result<()> {
    let p = pool.params();
    w.write_all(POOL_MAGIC)?;
    w.write_all(&[VERSION])?;
    w.write_all(&p.m().to_le_bytes())?;
    w.write_all(&p.l().to_le_bytes())?;
    w.write_all(&pack(pool.molecules().iter(), p.l()))?;
    Ok(())
}

pub fn write_samples<W: Write>(mut w: W, samples: &SampleSet) -> Result<()> {
    let p = samples.params();
    w.write_all(SAMPLES_MAGIC)?;
    w.write_all(&[VERSION])?;
    w.write_all(&p.m().to_le_bytes())?;
    w.write_all(&p.l().to_le_bytes())?;
    w.write_all(&[u8::from(samples.is_tagged())])?;
    w.write_all(&(samples.len() as u64).to_le_bytes())?;
    if samples.is_tagged() {
        for d in samples.draws() {
            w.write_all(d.molecule.as_packed())?;
            w.write_all(&d.tag.expect("tagged set").to_le_bytes())?;
        }
    } else {
        w.write_all(&pack(samples.draws().iter().map(|d| &d.molecule), p.l()))?;
    }
    Ok(())
}

pub fn read_pool<R: Read>(r: R) -> Result<PoolFile> {
    match read_any(r)? {
        ChannelFile::Pool(p) => Ok(p),
        ChannelFile::Samples(_) => Err(Error::Format("expected a DNAP pool file, found DNAS".into())),
    }
}

pub fn read_samples<R: Read>(r: R) -> Result<SampleSet> {
    match read_any(r)? {
        ChannelFile::Samples(s) => Ok(s),
        ChannelFile::Pool(_) => Err(Error::Format("expected a DNAS sample file, found DNAP".into())),
    }
}

/// Reads a pool or sample file, dispatching on the magic bytes.
pub fn read_any<R: Read>(mut r: R) -> Result<ChannelFile> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, "magic")?;
    let version = read_u8(&mut r, "version")?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version:#04x}")));
    }
    let m = u64::from_le_bytes(read_array(&mut r, "M")?);
    let l = u32::from_le_bytes(read_array(&mut r, "L")?);
    if l == 0 {
        return Err(Error::Format("L must be >= 1".into()));
    }
    match &magic {
        POOL_MAGIC => {
            let body = read_body(&mut r, m, l)?;
            Ok(ChannelFile::Pool(PoolFile {
                m,
                l,
                molecules: unpack(&body, m, l),
            }))
        }
        SAMPLES_MAGIC => {
            let tagged = match read_u8(&mut r, "tag flag")? {
                0 => false,
                1 => true,
                f => return Err(Error::Format(format!("bad tag flag {f}"))),
            };
            let n = u64::from_le_bytes(read_array(&mut r, "N")?);
            let draws = if tagged {
                let mut draws = Vec::with_capacity(capacity_hint(n));
                for _ in 0..n {
                    let mut bits = vec![0u8; byte_len(l)];
                    read_exact(&mut r, &mut bits, "record")?;
                    let molecule = Molecule::from_packed(bits, l)?;
                    let tag = u64::from_le_bytes(read_array(&mut r, "tag")?);
                    draws.push(Draw {
                        molecule,
                        tag: Some(tag),
                    });
                }
                expect_eof(&mut r)?;
                draws
            } else {
                let body = read_body(&mut r, n, l)?;
                unpack(&body, n, l)
                    .into_iter()
                    .map(|molecule| Draw { molecule, tag: None })
                    .collect()
            };
            if n == 0 {
                return Err(Error::Format("sample file holds no records".into()));
            }
            let params = ChannelParams::from_lengths(m, l, n as f64 / m as f64)?;
            Ok(ChannelFile::Samples(SampleSet::from_records(params, draws)?))
        }
        other => Err(Error::Format(format!("unknown magic {other:?}"))),
    }
}

fn pack<'a>(molecules: impl Iterator<Item = &'a Molecule>, l: u32) -> Vec<u8> {
    let mut out = Vec::new();
    let mut acc = 0u8;
    let mut used = 0u32;
    for m in molecules {
        for i in 0..l {
            acc = (acc << 1) | u8::from(m.bit(i));
            used += 1;
            if used == 8 {
                out.push(acc);
                acc = 0;
                used = 0;
            }
        }
    }
    if used > 0 {
        out.push(acc << (8 - used));
    }
    out
}

fn unpack(body: &[u8], count: u64, l: u32) -> Vec<Molecule> {
    let mut pos = 0usize;
    (0..count)
        .map(|_| {
            let mut m = Molecule::zeros(l);
            for i in 0..l {
                let bit = body[pos / 8] & (0x80 >> (pos % 8)) != 0;
                m.set_bit(i, bit);
                pos += 1;
            }
            m
        })
        .collect()
}

fn read_body<R: Read>(r: &mut R, count: u64, l: u32) -> Result<Vec<u8>> {
    let bits = u128::from(count) * u128::from(l);
    let bytes = usize::try_from(bits.div_ceil(8))
        .map_err(|_| Error::Format(format!("{count} records of {l} bits is too large")))?;
    let mut body = Vec::new();
    r.take(bytes as u64).read_to_end(&mut body)?;
    if body.len() != bytes {
        return Err(Error::Format(format!(
            "truncated body: expected {bytes} bytes, got {}",
            body.len()
        )));
    }
    let rem = (bits % 8) as u32;
    if rem != 0 && body.last().is_some_and(|b| b & (0xff >> rem) != 0) {
        return Err(Error::Format("nonzero tail padding".into()));
    }
    expect_eof(r)?;
    Ok(body)
}

fn expect_eof<R: Read>(r: &mut R) -> Result<()> {
    let mut extra = [0u8; 1];
    match r.read(&mut extra)? {
        0 => Ok(()),
        _ => Err(Error::Format("trailing bytes after body".into())),
    }
}

fn capacity_hint(n: u64) -> usize {
    n.min(1 << 20) as usize
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::Format(format!("reading {what}: {e}")))
}

fn read_u8<R: Read>(r: &mut R, what: &str) -> Result<u8> {
    Ok(read_array::<R, 1>(r, what)?[0])
}

fn read_array<R: Read, const K: usize>(r: &mut R, what: &str) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    read_exact(r, &mut buf, what)?;
    Ok(buf)
}

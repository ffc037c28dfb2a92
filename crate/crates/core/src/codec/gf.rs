//! Binary extension fields GF(2^w), 2 <= w <= 20.
//!
//! Elements are integers in `[0, 2^w)` read as polynomials over GF(2).
//! Multiplication is carry-less multiplication reduced by a fixed irreducible
//! polynomial: `0x11B` for w = 8 and `0x1100B` for w = 16, and a standard
//! primitive polynomial for every other width. Hot paths go through log/exp
//! tables built once per width.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const MIN_WIDTH: u32 = 2;
pub const MAX_WIDTH: u32 = 20;

/// Reduction polynomial for GF(2^w), including the `x^w` term.
pub fn reduction_polynomial(w: u32) -> Option<u32> {
    Some(match w {
        2 => 0x7,
        3 => 0xB,
        4 => 0x13,
        5 => 0x25,
        6 => 0x43,
        7 => 0x89,
        8 => 0x11B,
        9 => 0x211,
        10 => 0x409,
        11 => 0x805,
        12 => 0x1053,
        13 => 0x201B,
        14 => 0x4443,
        15 => 0x8003,
        16 => 0x1100B,
        17 => 0x2_0009,
        18 => 0x4_0081,
        19 => 0x8_0027,
        20 => 0x10_0009,
        _ => return None,
    })
}

/// Shift-and-add product of `x` and `y` reduced modulo `poly` (degree `w`).
pub fn clmul_reduce(x: u32, y: u32, w: u32, poly: u32) -> u32 {
    let top = 1u32 << w;
    let (mut a, mut b, mut acc) = (x, y, 0u32);
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= poly;
        }
    }
    acc
}

#[derive(Debug)]
pub struct GaloisField {
    width: u32,
    poly: u32,
    generator: u32,
    /// `exp[i] = g^i` for `i` in `[0, 2 * order)`.
    exp: Vec<u32>,
    /// `log[x]` for nonzero `x`; `log[0]` is unused.
    log: Vec<u32>,
}

impl GaloisField {
    fn build(width: u32) -> Self {
        let poly = reduction_polynomial(width).expect("supported width");
        let order = (1u32 << width) - 1;
        // smallest element whose powers cover the multiplicative group
        let (generator, powers) = (2..=order)
            .find_map(|g| {
                let mut powers = Vec::with_capacity(order as usize);
                let mut x = 1u32;
                for _ in 0..order {
                    powers.push(x);
                    x = clmul_reduce(x, g, width, poly);
                    if x == 1 {
                        break;
                    }
                }
                (powers.len() == order as usize).then_some((g, powers))
            })
            .expect("reduction polynomial is irreducible");
        let mut log = vec![0u32; 1 << width];
        for (i, &p) in powers.iter().enumerate() {
            log[p as usize] = i as u32;
        }
        let mut exp = powers.clone();
        exp.extend_from_slice(&powers);
        Self {
            width,
            poly,
            generator,
            exp,
            log,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn polynomial(&self) -> u32 {
        self.poly
    }

    pub fn generator(&self) -> u32 {
        self.generator
    }

    /// Size of the multiplicative group, `2^w - 1`.
    pub fn order(&self) -> u32 {
        (1u32 << self.width) - 1
    }

    pub fn contains(&self, x: u32) -> bool {
        x >> self.width == 0
    }

    #[inline]
    pub fn mul(&self, x: u32, y: u32) -> u32 {
        if x == 0 || y == 0 {
            0
        } else {
            self.exp[(self.log[x as usize] + self.log[y as usize]) as usize]
        }
    }

    /// Discrete log base the generator; `x` must be nonzero.
    #[inline]
    pub fn log(&self, x: u32) -> u32 {
        debug_assert!(x != 0);
        self.log[x as usize]
    }

    /// `g^e` for `e < 2 * order`.
    #[inline]
    pub fn exp(&self, e: u32) -> u32 {
        self.exp[e as usize]
    }

    pub fn inv(&self, x: u32) -> Result<u32> {
        if x == 0 {
            return Err(Error::DivisionByZero { width: self.width });
        }
        Ok(self.exp[((self.order() - self.log[x as usize]) % self.order()) as usize])
    }

    pub fn div(&self, x: u32, y: u32) -> Result<u32> {
        Ok(self.mul(x, self.inv(y)?))
    }

    pub fn pow(&self, mut base: u32, mut e: u64) -> u32 {
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

/// The shared field of width `w`, built on first use.
pub fn field(w: u32) -> Result<&'static GaloisField> {
    static FIELDS: [OnceLock<GaloisField>; (MAX_WIDTH + 1) as usize] =
        [const { OnceLock::new() }; (MAX_WIDTH + 1) as usize];
    if !(MIN_WIDTH..=MAX_WIDTH).contains(&w) {
        return Err(Error::Config(format!(
            "field width {w} outside [{MIN_WIDTH}, {MAX_WIDTH}]"
        )));
    }
    Ok(FIELDS[w as usize].get_or_init(|| GaloisField::build(w)))
}

fn check_element(x: u32, w: u32) -> Result<()> {
    if x >> w != 0 {
        return Err(Error::Domain(format!("{x:#x} is not an element of GF(2^{w})")));
    }
    Ok(())
}

/// Product in GF(2^w) by carry-less multiplication and reduction.
pub fn gf_mul(x: u32, y: u32, w: u32) -> Result<u32> {
    let f = field(w)?;
    check_element(x, w)?;
    check_element(y, w)?;
    Ok(clmul_reduce(x, y, w, f.polynomial()))
}

/// Inverse in GF(2^w) as `x^(2^w - 2)`.
pub fn gf_inv(x: u32, w: u32) -> Result<u32> {
    field(w)?;
    check_element(x, w)?;
    if x == 0 {
        return Err(Error::DivisionByZero { width: w });
    }
    let mut acc = 1u32;
    let mut base = x;
    let mut e = (1u64 << w) - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = gf_mul(acc, base, w)?;
        }
        base = gf_mul(base, base, w)?;
        e >>= 1;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::ChannelRng;

    /// Polynomial remainder over GF(2).
    fn poly_mod(mut a: u64, b: u64) -> u64 {
        let db = 63 - b.leading_zeros();
        while a != 0 && 63 - a.leading_zeros() >= db {
            a ^= b << (63 - a.leading_zeros() - db);
        }
        a
    }

    #[test]
    fn polynomials_are_irreducible() {
        // trial division by every polynomial of degree 1..=w/2
        for w in MIN_WIDTH..=MAX_WIDTH {
            let p = u64::from(reduction_polynomial(w).unwrap());
            assert_eq!(63 - p.leading_zeros(), w);
            for d in 2u64..(1 << (w / 2 + 1)) {
                assert_ne!(poly_mod(p, d), 0, "w={w}: divisible by {d:#x}");
            }
        }
    }

    #[test]
    fn aes_reduction_step() {
        assert_eq!(gf_mul(0x02, 0x80, 8).unwrap(), 0x1B);
        assert_eq!(gf_mul(0x57, 0x83, 8).unwrap(), 0xC1);
    }

    #[test]
    fn identity_and_zero() {
        let mut rng = ChannelRng::new(1);
        for w in [8, 16] {
            for _ in 0..1000 {
                let x = rng.below(1 << w) as u32;
                assert_eq!(gf_mul(x, 1, w).unwrap(), x);
                assert_eq!(gf_mul(x, 0, w).unwrap(), 0);
            }
        }
    }

    #[test]
    fn inverse_exhaustive_gf256() {
        for x in 1..256 {
            let inv = gf_inv(x, 8).unwrap();
            assert_eq!(gf_mul(x, inv, 8).unwrap(), 1, "x={x:#x}");
            assert_eq!(field(8).unwrap().inv(x).unwrap(), inv);
        }
        assert!(matches!(gf_inv(0, 8), Err(Error::DivisionByZero { width: 8 })));
        assert!(matches!(
            field(16).unwrap().inv(0),
            Err(Error::DivisionByZero { width: 16 })
        ));
    }

    #[test]
    fn tables_agree_with_clmul() {
        let mut rng = ChannelRng::new(2);
        for w in MIN_WIDTH..=MAX_WIDTH {
            let f = field(w).unwrap();
            for _ in 0..500 {
                let x = rng.below(1 << w) as u32;
                let y = rng.below(1 << w) as u32;
                assert_eq!(f.mul(x, y), clmul_reduce(x, y, w, f.polynomial()), "w={w}");
            }
        }
    }

    #[test]
    fn field_axioms() {
        let mut rng = ChannelRng::new(3);
        for w in [8u32, 16] {
            let f = field(w).unwrap();
            for _ in 0..10_000 {
                let [a, b, c] = [0; 3].map(|_| rng.below(1 << w) as u32);
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
            }
        }
    }

    #[test]
    fn inverse_sampled_gf65536() {
        let f = field(16).unwrap();
        let mut rng = ChannelRng::new(4);
        for _ in 0..200 {
            let x = 1 + rng.below(65535) as u32;
            let inv = gf_inv(x, 16).unwrap();
            assert_eq!(inv, f.inv(x).unwrap());
            assert_eq!(f.mul(x, inv), 1);
            assert_eq!(f.pow(x, 65535), 1);
        }
    }

    #[test]
    fn rejects_out_of_field() {
        assert!(gf_mul(256, 1, 8).is_err());
        assert!(gf_mul(1, 1, 21).is_err());
        assert!(field(1).is_err());
    }
}

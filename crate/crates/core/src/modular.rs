//! Double-word modular arithmetic over a modulus of at most 124 bits.
//!
//! Addition and subtraction use a single conditional correction; there is no
//! division anywhere. Multiplication uses Barrett reduction with a
//! per-modulus `mu = floor(2^k / q)` where `k = 2 * ceil(log2 q)`, which
//! keeps `mu` within 125 bits and guarantees the pre-correction remainder
//! stays below `2q`.

use crate::dword::{
    adc_word, dw_add, dw_mul_karatsuba, dw_mul_schoolbook, dw_sub, mul_wide_word, sbb_word,
    wide_mul, wide_shr, DWord, Wide4,
};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModulusError {
    #[error("modulus must be at least 2, got {0}")]
    TooSmall(u128),
    #[error("modulus must be below 2^124, got a {0}-bit value")]
    TooWide(u32),
    #[error("residue value is not reduced for this modulus")]
    NotReduced,
}

/// Which double-word multiplication feeds the Barrett pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MulAlgo {
    #[default]
    Schoolbook,
    Karatsuba,
}

impl MulAlgo {
    pub fn name(self) -> &'static str {
        match self {
            MulAlgo::Schoolbook => "schoolbook",
            MulAlgo::Karatsuba => "karatsuba",
        }
    }
}

impl std::str::FromStr for MulAlgo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "schoolbook" => Ok(MulAlgo::Schoolbook),
            "karatsuba" => Ok(MulAlgo::Karatsuba),
            other => Err(format!("unknown multiplication algorithm '{other}'")),
        }
    }
}

/// A modulus `q` with its precomputed Barrett constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modulus {
    q: DWord,
    mu: DWord,
    k: u32,
    bitlen: u32,
}

impl Modulus {
    /// Builds a modulus, computing `k = 2 * ceil(log2 q)` and
    /// `mu = floor(2^k / q)` by restoring division over words. The pair is
    /// verified against the defining identity `mu*q <= 2^k < (mu+1)*q`
    /// before the value is returned.
    pub fn new(q: DWord) -> Result<Self, ModulusError> {
        if q.to_u128() < 2 {
            return Err(ModulusError::TooSmall(q.to_u128()));
        }
        // ceil(log2 q) == bits(q - 1) for q >= 2.
        let (qm1, _) = dw_sub(q, DWord::ONE);
        let bitlen = qm1.bits();
        if bitlen > 124 || q.hi >> 60 != 0 {
            return Err(ModulusError::TooWide(q.bits()));
        }
        let k = 2 * bitlen;

        // Restoring division: mu = floor(2^k / q). The remainder never
        // reaches 2q < 2^125, so it fits a double-word.
        let mut mu = DWord::ZERO;
        let mut rem = DWord::ZERO;
        for i in (0..=k).rev() {
            rem = rem.shl1();
            if i == k {
                rem.lo |= 1;
            }
            if rem >= q {
                let (r, bo) = dw_sub(rem, q);
                debug_assert!(!bo);
                rem = r;
                if i < 64 {
                    mu.lo |= 1 << i;
                } else {
                    mu.hi |= 1 << (i - 64);
                }
            }
        }

        let m = Modulus { q, mu, k, bitlen };
        // Checked in release builds too: a wrong mu poisons every
        // multiplication, and construction is one-time.
        if !m.verify_mu() {
            panic!("Barrett constant failed its identity check");
        }
        Ok(m)
    }

    pub fn from_u128(q: u128) -> Result<Self, ModulusError> {
        Self::new(DWord::from_u128(q))
    }

    /// `mu*q <= 2^k < (mu+1)*q`, checked in 256-bit arithmetic.
    fn verify_mu(&self) -> bool {
        let muq = dw_mul_schoolbook(self.mu, self.q);
        let mut pow = Wide4::ZERO;
        pow.words[(self.k / 64) as usize] = 1 << (self.k % 64);
        let le = wide_le(&muq, &pow);
        let (muq1, carry) = wide_add_dword(&muq, self.q);
        le && (carry || wide_lt(&pow, &muq1))
    }

    #[inline]
    pub fn q(&self) -> DWord {
        self.q
    }

    #[inline]
    pub fn mu(&self) -> DWord {
        self.mu
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn bitlen(&self) -> u32 {
        self.bitlen
    }
}

fn wide_le(a: &Wide4, b: &Wide4) -> bool {
    for i in (0..4).rev() {
        if a.words[i] != b.words[i] {
            return a.words[i] < b.words[i];
        }
    }
    true
}

fn wide_lt(a: &Wide4, b: &Wide4) -> bool {
    wide_le(a, b) && a != b
}

fn wide_add_dword(a: &Wide4, b: DWord) -> (Wide4, bool) {
    let mut w = a.words;
    let (t, c) = adc_word(w[0], b.lo, false);
    w[0] = t;
    let (t, c) = adc_word(w[1], b.hi, c);
    w[1] = t;
    let (t, c) = adc_word(w[2], 0, c);
    w[2] = t;
    let (t, c) = adc_word(w[3], 0, c);
    w[3] = t;
    (Wide4::new(w), c)
}

/// An element of `Z_q`, always kept below its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Residue(DWord);

impl Residue {
    pub const ZERO: Residue = Residue(DWord::ZERO);

    /// Checked construction; rejects values `>= q`.
    pub fn new(value: DWord, m: &Modulus) -> Result<Self, ModulusError> {
        if value >= m.q() {
            return Err(ModulusError::NotReduced);
        }
        Ok(Residue(value))
    }

    /// One conditional subtraction. The input must be below `2q`; this is
    /// the only unreduced form the hot paths ever produce.
    #[inline]
    pub fn reduce_once(value: DWord, m: &Modulus) -> Self {
        let (diff, bo) = dw_sub(value, m.q());
        if bo {
            Residue(value)
        } else {
            debug_assert!(diff < m.q(), "reduce_once input was not below 2q");
            Residue(diff)
        }
    }

    pub fn one(m: &Modulus) -> Self {
        debug_assert!(m.q() > DWord::ONE);
        Residue(DWord::ONE)
    }

    #[inline]
    pub fn value(self) -> DWord {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }
}

/// Uniform residue by rejection sampling on the modulus bit-length.
pub fn random_residue<R: Rng + ?Sized>(rng: &mut R, m: &Modulus) -> Residue {
    let bits = m.bitlen();
    let hi_mask = if bits > 64 {
        (1u64 << (bits - 64)) - 1
    } else {
        0
    };
    let lo_mask = if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    };
    loop {
        let cand = DWord::new(rng.random::<u64>() & hi_mask, rng.random::<u64>() & lo_mask);
        if cand < m.q() {
            return Residue(cand);
        }
    }
}

/// `(a + b) mod q` as one wide add and at most one subtraction of `q`.
#[inline]
pub fn addmod(a: Residue, b: Residue, m: &Modulus) -> Residue {
    debug_assert!(a.0 < m.q() && b.0 < m.q());
    let (sum, co) = dw_add(a.0, b.0);
    debug_assert!(!co, "residues below 2^124 cannot carry past 2^128");
    Residue::reduce_once(sum, m)
}

/// `(a - b) mod q`: add `q` back exactly when the subtraction underflows.
#[inline]
pub fn submod(a: Residue, b: Residue, m: &Modulus) -> Residue {
    debug_assert!(a.0 < m.q() && b.0 < m.q());
    let (diff, bo) = dw_sub(a.0, b.0);
    if bo {
        let (fixed, co) = dw_add(diff, m.q());
        debug_assert!(co, "wraparound must cancel the borrow");
        Residue(fixed)
    } else {
        Residue(diff)
    }
}

/// `(a * b) mod q` by Barrett reduction.
#[inline]
pub fn mulmod(a: Residue, b: Residue, m: &Modulus, algo: MulAlgo) -> Residue {
    barrett(a, b, m, algo).1
}

/// Barrett pipeline returning both the pre-correction remainder and the
/// reduced result; the remainder is observable so its `< 2q` bound can be
/// checked directly.
pub(crate) fn barrett(a: Residue, b: Residue, m: &Modulus, algo: MulAlgo) -> (DWord, Residue) {
    debug_assert!(a.0 < m.q() && b.0 < m.q());
    let ab = match algo {
        MulAlgo::Schoolbook => dw_mul_schoolbook(a.0, b.0),
        MulAlgo::Karatsuba => dw_mul_karatsuba(a.0, b.0),
    };
    let abmu = wide_mul(&ab, m.mu());
    let shifted = wide_shr(&abmu, m.k()).expect("k is at most 248");
    debug_assert!(
        shifted.words[2] == 0
            && shifted.words[3] == 0
            && shifted.words[4] == 0
            && shifted.words[5] == 0,
        "Barrett quotient estimate must fit a double-word"
    );
    let qhat = shifted.low_dword();

    // t = ab - qhat*q, needing only the low 128 bits of each side.
    let (h, l) = mul_wide_word(qhat.lo, m.q().lo);
    let qq_lo = l;
    let qq_hi = h
        .wrapping_add(qhat.lo.wrapping_mul(m.q().hi))
        .wrapping_add(qhat.hi.wrapping_mul(m.q().lo));
    let (t_lo, br) = sbb_word(ab.words[0], qq_lo, false);
    let (t_hi, _) = sbb_word(ab.words[1], qq_hi, br);
    let mut t = DWord::new(t_hi, t_lo);

    let mut corrections = 0u32;
    while t >= m.q() {
        let (r, bo) = dw_sub(t, m.q());
        debug_assert!(!bo);
        t = r;
        corrections += 1;
    }
    debug_assert!(corrections <= 2, "Barrett needs at most two corrections");
    (DWord::new(t_hi, t_lo), Residue(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn ladder() -> Vec<Modulus> {
        crate::kernels::primes::ladder()
    }

    #[test]
    fn modulus_constants_small() {
        let m = Modulus::from_u128(17).unwrap();
        assert_eq!(m.k(), 10);
        assert_eq!(m.mu().to_u128(), 60); // floor(1024 / 17)
        assert_eq!(m.bitlen(), 5);
    }

    #[test]
    fn modulus_power_of_two() {
        let m = Modulus::from_u128(1 << 123).unwrap();
        assert_eq!(m.k(), 246);
        assert_eq!(m.mu().to_u128(), 1 << 123);
    }

    #[test]
    fn modulus_bounds() {
        assert_eq!(Modulus::from_u128(0), Err(ModulusError::TooSmall(0)));
        assert_eq!(Modulus::from_u128(1), Err(ModulusError::TooSmall(1)));
        assert!(Modulus::from_u128(2).is_ok());
        assert!(Modulus::from_u128((1 << 124) - 1).is_ok());
        assert!(matches!(
            Modulus::from_u128(1 << 124),
            Err(ModulusError::TooWide(_))
        ));
    }

    #[test]
    fn mu_matches_division_oracle_across_widths() {
        let mut rng = StdRng::seed_from_u64(0x3131);
        for bits in [2u32, 5, 17, 33, 60, 64, 65, 100, 120, 123, 124] {
            for _ in 0..50 {
                let mask = if bits == 128 {
                    u128::MAX
                } else {
                    (1u128 << bits) - 1
                };
                let q = (rng.random::<u128>() & mask) | (1 << (bits - 1)) | 1;
                if q < 2 {
                    continue;
                }
                let m = Modulus::from_u128(q).unwrap();
                let expect = (BigUint::from(1u8) << m.k()) / BigUint::from(q);
                assert_eq!(BigUint::from(m.mu().to_u128()), expect, "q={q:#x}");
            }
        }
    }

    #[test]
    fn addmod_submod_edges() {
        let m = Modulus::from_u128(97).unwrap();
        let qm1 = Residue::new(DWord::from_u64(96), &m).unwrap();
        let one = Residue::one(&m);
        assert!(addmod(qm1, one, &m).is_zero());
        assert_eq!(addmod(Residue::ZERO, qm1, &m), qm1);
        assert_eq!(submod(Residue::ZERO, one, &m), qm1);
        assert!(submod(qm1, qm1, &m).is_zero());
    }

    #[test]
    fn mulmod_hand_case() {
        let m = Modulus::from_u128(17).unwrap();
        let five = Residue::new(DWord::from_u64(5), &m).unwrap();
        let seven = Residue::new(DWord::from_u64(7), &m).unwrap();
        for algo in [MulAlgo::Schoolbook, MulAlgo::Karatsuba] {
            assert_eq!(mulmod(five, seven, &m, algo).value().to_u128(), 1);
            assert!(mulmod(Residue::ZERO, seven, &m, algo).is_zero());
            assert_eq!(mulmod(Residue::one(&m), seven, &m, algo), seven);
        }
    }

    #[test]
    fn modular_ops_match_biguint_oracle() {
        let mut rng = StdRng::seed_from_u64(0xfeed);
        for m in ladder() {
            let q = BigUint::from(m.q().to_u128());
            for _ in 0..20_000 {
                let a = random_residue(&mut rng, &m);
                let b = random_residue(&mut rng, &m);
                let (ba, bb) = (
                    BigUint::from(a.value().to_u128()),
                    BigUint::from(b.value().to_u128()),
                );

                let s = addmod(a, b, &m);
                assert_eq!(BigUint::from(s.value().to_u128()), (&ba + &bb) % &q);
                assert!(s.value() < m.q());

                let d = submod(a, b, &m);
                assert_eq!(BigUint::from(d.value().to_u128()), ((&ba + &q) - &bb) % &q);
                assert!(d.value() < m.q());

                for algo in [MulAlgo::Schoolbook, MulAlgo::Karatsuba] {
                    let p = mulmod(a, b, &m, algo);
                    assert_eq!(BigUint::from(p.value().to_u128()), (&ba * &bb) % &q);
                    assert!(p.value() < m.q());
                }
            }
        }
    }

    #[test]
    fn barrett_pre_correction_below_2q() {
        let mut rng = StdRng::seed_from_u64(0x2222);
        for m in ladder() {
            let two_q = dw_add(m.q(), m.q()).0;
            for _ in 0..10_000 {
                let a = random_residue(&mut rng, &m);
                let b = random_residue(&mut rng, &m);
                let (pre, _) = barrett(a, b, &m, MulAlgo::Schoolbook);
                assert!(pre < two_q, "pre-correction remainder escaped [0, 2q)");
            }
        }
    }

    #[test]
    fn mul_algos_agree_bit_exactly() {
        let mut rng = StdRng::seed_from_u64(0x4242);
        for m in ladder() {
            for _ in 0..10_000 {
                let a = random_residue(&mut rng, &m);
                let b = random_residue(&mut rng, &m);
                assert_eq!(
                    mulmod(a, b, &m, MulAlgo::Schoolbook),
                    mulmod(a, b, &m, MulAlgo::Karatsuba)
                );
            }
        }
    }

    #[test]
    fn ring_laws_hold_on_samples() {
        let mut rng = StdRng::seed_from_u64(0x1010);
        for m in ladder() {
            for _ in 0..2_000 {
                let a = random_residue(&mut rng, &m);
                let b = random_residue(&mut rng, &m);
                let c = random_residue(&mut rng, &m);
                assert_eq!(addmod(a, b, &m), addmod(b, a, &m));
                assert_eq!(
                    addmod(addmod(a, b, &m), c, &m),
                    addmod(a, addmod(b, c, &m), &m)
                );
                assert_eq!(submod(addmod(a, b, &m), b, &m), a);
                // Distributivity of multiplication over addition.
                let lhs = mulmod(a, addmod(b, c, &m), &m, MulAlgo::Schoolbook);
                let rhs = addmod(
                    mulmod(a, b, &m, MulAlgo::Schoolbook),
                    mulmod(a, c, &m, MulAlgo::Schoolbook),
                    &m,
                );
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn residue_construction_is_checked() {
        let m = Modulus::from_u128(97).unwrap();
        assert!(Residue::new(DWord::from_u64(97), &m).is_err());
        assert!(Residue::new(DWord::from_u64(96), &m).is_ok());
        assert_eq!(
            Residue::reduce_once(DWord::from_u64(100), &m)
                .value()
                .to_u128(),
            3
        );
    }
}

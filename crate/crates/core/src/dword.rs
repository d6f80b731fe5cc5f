//! Word-level carry/borrow/widening arithmetic and 128-bit double-word
//! add, subtract, and multiply, built only from 64-bit word operations.
//!
//! A double-word value `x` is stored as two machine words `(hi, lo)` with
//! `x = hi * 2^64 + lo`. Nothing in this module computes through a native
//! 128-bit integer type; `u128` appears only in conversion helpers so that
//! callers and test oracles can move values in and out.

use thiserror::Error;

/// A machine word. All arithmetic in this crate bottoms out in `u64` operations.
pub type Word = u64;

/// A single carry or borrow bit.
pub type CarryBit = bool;

const LO32: u64 = 0xFFFF_FFFF;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DwordError {
    #[error("shift of {shift} bits exceeds buffer width of {width} bits")]
    ShiftOutOfRange { shift: u32, width: u32 },
}

/// A 128-bit unsigned integer stored as `(hi, lo)` machine words.
///
/// Field order matters: the derived `Ord` compares `hi` first, which is
/// exactly the numeric order of `hi * 2^64 + lo`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DWord {
    pub hi: Word,
    pub lo: Word,
}

impl DWord {
    pub const ZERO: DWord = DWord { hi: 0, lo: 0 };
    pub const ONE: DWord = DWord { hi: 0, lo: 1 };
    pub const MAX: DWord = DWord {
        hi: u64::MAX,
        lo: u64::MAX,
    };

    #[inline]
    pub const fn new(hi: Word, lo: Word) -> Self {
        DWord { hi, lo }
    }

    #[inline]
    pub const fn from_u64(x: u64) -> Self {
        DWord { hi: 0, lo: x }
    }

    #[inline]
    pub const fn from_u128(x: u128) -> Self {
        DWord {
            hi: (x >> 64) as u64,
            lo: x as u64,
        }
    }

    #[inline]
    pub const fn to_u128(self) -> u128 {
        ((self.hi as u128) << 64) | self.lo as u128
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.hi == 0 && self.lo == 0
    }

    /// Number of bits needed to represent `self` (0 for zero).
    #[inline]
    pub const fn bits(self) -> u32 {
        if self.hi != 0 {
            128 - self.hi.leading_zeros()
        } else {
            64 - self.lo.leading_zeros()
        }
    }

    /// Bit `i` (little-endian), `i < 128`.
    #[inline]
    pub const fn bit(self, i: u32) -> bool {
        if i < 64 {
            (self.lo >> i) & 1 == 1
        } else {
            (self.hi >> (i - 64)) & 1 == 1
        }
    }

    /// `self << 1`, discarding any bit shifted out of the top.
    #[inline]
    pub const fn shl1(self) -> Self {
        DWord {
            hi: (self.hi << 1) | (self.lo >> 63),
            lo: self.lo << 1,
        }
    }
}

/// Addition with carry: `(a + b + ci) mod 2^64` plus the carry out.
#[inline]
pub fn adc_word(a: Word, b: Word, ci: CarryBit) -> (Word, CarryBit) {
    let (t0, c0) = a.overflowing_add(b);
    let (t1, c1) = t0.overflowing_add(ci as u64);
    (t1, c0 | c1)
}

/// Subtraction with borrow: `(a - b - bi) mod 2^64` plus the borrow out.
///
/// The borrow out is set exactly when `a < b + bi` as exact integers.
#[inline]
pub fn sbb_word(a: Word, b: Word, bi: CarryBit) -> (Word, CarryBit) {
    let (t0, b0) = a.overflowing_sub(b);
    let (t1, b1) = t0.overflowing_sub(bi as u64);
    (t1, b0 | b1)
}

/// Widening multiplication: `(hi, lo)` with `hi * 2^64 + lo == a * b` exactly.
///
/// Computed from four 32-bit partial products so the whole routine stays
/// within single-word arithmetic.
#[inline]
pub fn mul_wide_word(a: Word, b: Word) -> (Word, Word) {
    let (al, ah) = (a & LO32, a >> 32);
    let (bl, bh) = (b & LO32, b >> 32);

    let ll = al * bl;
    let lh = al * bh;
    let hl = ah * bl;
    let hh = ah * bh;

    // None of these sums can overflow 64 bits: each partial product is at
    // most (2^32 - 1)^2 and the folded-in terms are below 2^32.
    let t = lh + (ll >> 32);
    let u = hl + (t & LO32);
    let hi = hh + (t >> 32) + (u >> 32);
    let lo = (u << 32) | (ll & LO32);
    (hi, lo)
}

/// Double-word addition; the carry out reports overflow past 2^128.
#[inline]
pub fn dw_add(a: DWord, b: DWord) -> (DWord, CarryBit) {
    let (lo, c) = adc_word(a.lo, b.lo, false);
    let (hi, co) = adc_word(a.hi, b.hi, c);
    (DWord { hi, lo }, co)
}

/// Double-word subtraction; the borrow out is set exactly when `a < b`.
#[inline]
pub fn dw_sub(a: DWord, b: DWord) -> (DWord, CarryBit) {
    let (lo, bb) = sbb_word(a.lo, b.lo, false);
    let (hi, bo) = sbb_word(a.hi, b.hi, bb);
    (DWord { hi, lo }, bo)
}

/// A fixed-width little-endian buffer of machine words.
///
/// `Wide4` holds 256-bit products, `Wide6` the 384-bit intermediates of the
/// reduction pipeline. Construction never truncates: the value is exactly
/// the sum of `words[i] * 2^(64*i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Wide<const N: usize> {
    pub words: [Word; N],
}

pub type Wide2 = Wide<2>;
pub type Wide4 = Wide<4>;
pub type Wide6 = Wide<6>;

impl<const N: usize> Wide<N> {
    pub const ZERO: Wide<N> = Wide { words: [0; N] };

    #[inline]
    pub const fn new(words: [Word; N]) -> Self {
        Wide { words }
    }

    pub fn from_dword(x: DWord) -> Self {
        assert!(N >= 2);
        let mut words = [0; N];
        words[0] = x.lo;
        words[1] = x.hi;
        Wide { words }
    }

    /// Low 128 bits as a double-word.
    #[inline]
    pub fn low_dword(&self) -> DWord {
        DWord {
            hi: if N >= 2 { self.words[1] } else { 0 },
            lo: self.words[0],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
}

/// Schoolbook double-word multiplication: the exact 256-bit product built
/// from four single-word widening multiplications.
pub fn dw_mul_schoolbook(a: DWord, b: DWord) -> Wide4 {
    let (h_ll, l_ll) = mul_wide_word(a.lo, b.lo);
    let (h_lh, l_lh) = mul_wide_word(a.lo, b.hi);
    let (h_hl, l_hl) = mul_wide_word(a.hi, b.lo);
    let (h_hh, l_hh) = mul_wide_word(a.hi, b.hi);

    let w0 = l_ll;
    let (s1, c1) = adc_word(h_ll, l_lh, false);
    let (w1, c2) = adc_word(s1, l_hl, false);
    let (s2, c3) = adc_word(h_lh, h_hl, c1);
    let (w2, c4) = adc_word(s2, l_hh, c2);
    let (s3, o1) = adc_word(h_hh, 0, c3);
    let (w3, o2) = adc_word(s3, 0, c4);
    debug_assert!(!o1 && !o2, "256-bit product cannot carry past word 3");

    Wide4::new([w0, w1, w2, w3])
}

/// Karatsuba double-word multiplication: the same 256-bit product from three
/// single-word widening multiplications.
///
/// The sums `a.hi + a.lo` and `b.hi + b.lo` may reach 65 bits; each overflow
/// is kept as an explicit carry bit and its correction term is added
/// separately, so every intermediate stays within one word.
pub fn dw_mul_karatsuba(a: DWord, b: DWord) -> Wide4 {
    let (h_ll, l_ll) = mul_wide_word(a.lo, b.lo);
    let (h_hh, l_hh) = mul_wide_word(a.hi, b.hi);

    let (sa, ca) = adc_word(a.hi, a.lo, false);
    let (sb, cb) = adc_word(b.hi, b.lo, false);
    let (h_m, l_m) = mul_wide_word(sa, sb);

    // (a.hi + a.lo)(b.hi + b.lo)
    //   = sa*sb + ca*sb*2^64 + cb*sa*2^64 + ca*cb*2^128
    let mut m0 = l_m;
    let mut m1 = h_m;
    let mut m2 = 0u64;
    let (t, k) = adc_word(m1, if ca { sb } else { 0 }, false);
    m1 = t;
    m2 += k as u64;
    let (t, k) = adc_word(m1, if cb { sa } else { 0 }, false);
    m1 = t;
    m2 += k as u64;
    m2 += (ca && cb) as u64;

    // Middle term of the product: cross sum minus both outer products.
    // It is never negative, so the final borrows must be clear.
    let (t, bb) = sbb_word(m0, l_hh, false);
    m0 = t;
    let (t, bb) = sbb_word(m1, h_hh, bb);
    m1 = t;
    let (t, bb) = sbb_word(m2, 0, bb);
    m2 = t;
    debug_assert!(!bb);
    let (t, bb) = sbb_word(m0, l_ll, false);
    m0 = t;
    let (t, bb) = sbb_word(m1, h_ll, bb);
    m1 = t;
    let (t, bb) = sbb_word(m2, 0, bb);
    m2 = t;
    debug_assert!(!bb);

    let w0 = l_ll;
    let (w1, c) = adc_word(h_ll, m0, false);
    let (w2, c) = adc_word(l_hh, m1, c);
    let (w3, c) = adc_word(h_hh, m2, c);
    debug_assert!(!c);

    Wide4::new([w0, w1, w2, w3])
}

/// Exact 384-bit product of a 256-bit buffer and a double-word.
pub fn wide_mul(a: &Wide4, b: DWord) -> Wide6 {
    let mut w = [0u64; 6];
    for (j, bd) in [b.lo, b.hi].into_iter().enumerate() {
        let mut k = 0u64;
        for i in 0..4 {
            let (hi, lo) = mul_wide_word(a.words[i], bd);
            let (t, c1) = adc_word(w[i + j], lo, false);
            let (t, c2) = adc_word(t, k, false);
            w[i + j] = t;
            // hi <= 2^64 - 2, and c1/c2 cannot both be set when hi is maximal.
            k = hi + c1 as u64 + c2 as u64;
        }
        let (t, c) = adc_word(w[4 + j], k, false);
        w[4 + j] = t;
        debug_assert!(!c);
    }
    Wide6::new(w)
}

/// `floor(x / 2^k)`, rejecting shifts beyond the buffer width.
pub fn wide_shr<const N: usize>(x: &Wide<N>, k: u32) -> Result<Wide<N>, DwordError> {
    let width = 64 * N as u32;
    if k > width {
        return Err(DwordError::ShiftOutOfRange { shift: k, width });
    }
    let ws = (k / 64) as usize;
    let bs = k % 64;
    let mut out = [0u64; N];
    for i in 0..N {
        let src = i + ws;
        if src >= N {
            break;
        }
        let mut w = x.words[src] >> bs;
        if bs > 0 && src + 1 < N {
            w |= x.words[src + 1] << (64 - bs);
        }
        out[i] = w;
    }
    Ok(Wide::new(out))
}

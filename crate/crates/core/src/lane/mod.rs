//! V-way lane-parallel double-word arithmetic in split hi/lo layout.
//!
//! A 128-bit lane block is stored as two word vectors, one holding the high
//! words and one the low words of every lane. Backends implement a small
//! primitive vocabulary (`LaneIsa`); the composite modular operations in
//! [`algo`] are written once over those primitives and run branch-free on
//! every backend, with per-lane control flow carried in masks.

pub mod algo;
#[cfg(target_arch = "x86_64")]
mod avx2;
#[cfg(target_arch = "x86_64")]
mod avx512;
mod backend;
mod portable;

#[cfg(target_arch = "x86_64")]
pub use avx2::Avx2;
#[cfg(target_arch = "x86_64")]
pub use avx512::Avx512;
pub use backend::{available_backends, backend_select, BackendKind, LaneBackend};
pub use portable::Portable;

use crate::dword::DWord;
use thiserror::Error;

/// Hard upper bound on the lane count; vectors carry their live length.
pub const MAX_LANES: usize = 16;

/// Lane counts a backend may be configured with.
pub const LANE_COUNTS: [usize; 4] = [2, 4, 8, 16];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LaneError {
    #[error("backend '{backend}' is unavailable: missing CPU feature {missing}")]
    UnsupportedBackend { backend: String, missing: String },
    #[error("lane count {0} is not one of 2, 4, 8, 16")]
    BadLaneCount(usize),
    #[error("permute index {index} in lane {lane} is out of range (< {limit} required)")]
    IndexOutOfRange { lane: usize, index: u64, limit: u64 },
    #[error("expected {expected} lanes, got {got}")]
    LaneCountMismatch { expected: usize, got: usize },
}

/// Lane-count configuration for backends with a selectable width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LaneConfig {
    pub lanes: usize,
}

impl Default for LaneConfig {
    fn default() -> Self {
        LaneConfig { lanes: 8 }
    }
}

impl LaneConfig {
    pub fn new(lanes: usize) -> Result<Self, LaneError> {
        if LANE_COUNTS.contains(&lanes) {
            Ok(LaneConfig { lanes })
        } else {
            Err(LaneError::BadLaneCount(lanes))
        }
    }
}

/// A vector of V machine words. Dead lanes beyond the live count are kept
/// zero so derived equality compares whole values.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct WordVec {
    v: u8,
    lanes: [u64; MAX_LANES],
}

impl std::fmt::Debug for WordVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "WordVec{:x?}", &self.lanes[..self.v as usize])
    }
}

impl WordVec {
    pub fn splat(v: usize, x: u64) -> Self {
        Self::from_fn(v, |_| x)
    }

    pub fn zero(v: usize) -> Self {
        Self::splat(v, 0)
    }

    pub fn from_fn(v: usize, mut f: impl FnMut(usize) -> u64) -> Self {
        debug_assert!(v <= MAX_LANES);
        let mut lanes = [0u64; MAX_LANES];
        for (i, lane) in lanes.iter_mut().take(v).enumerate() {
            *lane = f(i);
        }
        WordVec { v: v as u8, lanes }
    }

    pub fn from_slice(s: &[u64]) -> Self {
        Self::from_fn(s.len(), |i| s[i])
    }

    #[inline]
    pub fn lane_count(&self) -> usize {
        self.v as usize
    }

    #[inline]
    pub fn lane(&self, i: usize) -> u64 {
        debug_assert!(i < self.v as usize);
        self.lanes[i]
    }

    #[inline]
    pub fn as_slice(&self) -> &[u64] {
        &self.lanes[..self.v as usize]
    }

    #[inline]
    pub(crate) fn raw(&self) -> &[u64; MAX_LANES] {
        &self.lanes
    }

    /// Builds a vector from a raw lane array; lanes at `v..` are zeroed.
    pub(crate) fn from_raw(v: usize, mut lanes: [u64; MAX_LANES]) -> Self {
        for lane in lanes.iter_mut().skip(v) {
            *lane = 0;
        }
        WordVec { v: v as u8, lanes }
    }
}

/// One boolean per lane, bit `i` describing lane `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct LaneMask {
    v: u8,
    bits: u16,
}

impl std::fmt::Debug for LaneMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "LaneMask({:0width$b})",
            self.bits,
            width = self.v as usize
        )
    }
}

impl LaneMask {
    pub fn none(v: usize) -> Self {
        LaneMask {
            v: v as u8,
            bits: 0,
        }
    }

    pub fn all(v: usize) -> Self {
        LaneMask {
            v: v as u8,
            bits: Self::live(v),
        }
    }

    pub fn from_fn(v: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut bits = 0u16;
        for i in 0..v {
            bits |= (f(i) as u16) << i;
        }
        LaneMask { v: v as u8, bits }
    }

    pub fn from_bits(v: usize, bits: u16) -> Self {
        LaneMask {
            v: v as u8,
            bits: bits & Self::live(v),
        }
    }

    #[inline]
    fn live(v: usize) -> u16 {
        if v >= 16 {
            u16::MAX
        } else {
            (1u16 << v) - 1
        }
    }

    #[inline]
    pub fn lane_count(&self) -> usize {
        self.v as usize
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.v as usize);
        (self.bits >> i) & 1 == 1
    }

    #[inline]
    pub fn bits(&self) -> u16 {
        self.bits
    }

    #[inline]
    pub fn any(&self) -> bool {
        self.bits != 0
    }

    #[inline]
    pub fn or(&self, rhs: &LaneMask) -> LaneMask {
        debug_assert_eq!(self.v, rhs.v);
        LaneMask {
            v: self.v,
            bits: self.bits | rhs.bits,
        }
    }

    #[inline]
    pub fn and(&self, rhs: &LaneMask) -> LaneMask {
        debug_assert_eq!(self.v, rhs.v);
        LaneMask {
            v: self.v,
            bits: self.bits & rhs.bits,
        }
    }

    #[inline]
    pub fn not(&self) -> LaneMask {
        LaneMask {
            v: self.v,
            bits: !self.bits & Self::live(self.v as usize),
        }
    }
}

/// V double-words in split layout: lane `i` is the value
/// `(hi.lane(i), lo.lane(i))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DWordVec {
    pub hi: WordVec,
    pub lo: WordVec,
}

impl DWordVec {
    pub fn new(hi: WordVec, lo: WordVec) -> Self {
        debug_assert_eq!(hi.lane_count(), lo.lane_count());
        DWordVec { hi, lo }
    }

    pub fn splat(v: usize, x: DWord) -> Self {
        DWordVec {
            hi: WordVec::splat(v, x.hi),
            lo: WordVec::splat(v, x.lo),
        }
    }

    pub fn from_dwords(xs: &[DWord]) -> Self {
        DWordVec {
            hi: WordVec::from_fn(xs.len(), |i| xs[i].hi),
            lo: WordVec::from_fn(xs.len(), |i| xs[i].lo),
        }
    }

    pub fn to_dwords(&self) -> Vec<DWord> {
        (0..self.lane_count()).map(|i| self.lane(i)).collect()
    }

    #[inline]
    pub fn lane_count(&self) -> usize {
        self.hi.lane_count()
    }

    #[inline]
    pub fn lane(&self, i: usize) -> DWord {
        DWord::new(self.hi.lane(i), self.lo.lane(i))
    }
}

/// Comparison relation for `v_cmp`, evaluated lane-wise on unsigned words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpRel {
    Lt,
    Le,
    Eq,
}

/// The primitive vector vocabulary a backend must provide.
///
/// Every operation is pure and lane-wise; masks are the only carrier of
/// per-lane control flow. The portable backend defines the semantics, with
/// each primitive a straight per-lane loop over scalar word operations;
/// native backends must match it bit-exactly.
pub trait LaneIsa {
    fn lane_count(&self) -> usize;
    fn name(&self) -> &'static str;

    fn splat(&self, x: u64) -> WordVec {
        WordVec::splat(self.lane_count(), x)
    }

    /// Lane-wise wrapping addition.
    fn v_add(&self, a: &WordVec, b: &WordVec) -> WordVec;
    /// Lane-wise wrapping subtraction.
    fn v_sub(&self, a: &WordVec, b: &WordVec) -> WordVec;
    /// Lane-wise low 64 bits of the product.
    fn v_mullo(&self, a: &WordVec, b: &WordVec) -> WordVec;
    /// Lane-wise full product of the low 32 bits of each operand.
    fn v_mul_even32(&self, a: &WordVec, b: &WordVec) -> WordVec;
    /// Lane-wise logical shift left by `k < 64` bits.
    fn v_shl(&self, a: &WordVec, k: u32) -> WordVec;
    /// Lane-wise logical shift right by `k < 64` bits.
    fn v_shr(&self, a: &WordVec, k: u32) -> WordVec;
    fn v_and(&self, a: &WordVec, b: &WordVec) -> WordVec;
    fn v_or(&self, a: &WordVec, b: &WordVec) -> WordVec;

    /// Lane-wise unsigned comparison to a mask.
    fn v_cmp(&self, a: &WordVec, b: &WordVec, rel: CmpRel) -> LaneMask;
    /// Lane-wise signed `a > b` comparison.
    fn v_cmp_gt_signed(&self, a: &WordVec, b: &WordVec) -> LaneMask;

    /// Mask-set lanes take `b`, clear lanes take `a`.
    fn v_blend(&self, mask: &LaneMask, a: &WordVec, b: &WordVec) -> WordVec;

    /// Masked add: `mask ? a + b : src`. Exists as a primitive because it is
    /// a single instruction on mask-register hardware; the 256-bit backend
    /// emulates it and is flagged non-representative for proxy timing.
    fn v_mask_add(&self, src: &WordVec, mask: &LaneMask, a: &WordVec, b: &WordVec) -> WordVec;
    /// Masked subtract: `mask ? a - b : src`.
    fn v_mask_sub(&self, src: &WordVec, mask: &LaneMask, a: &WordVec, b: &WordVec) -> WordVec;

    /// Interleave of even-indexed pairs: `out[2j] = a[2j]`, `out[2j+1] = b[2j]`.
    fn v_unpack_lo(&self, a: &WordVec, b: &WordVec) -> WordVec;
    /// Interleave of odd-indexed pairs: `out[2j] = a[2j+1]`, `out[2j+1] = b[2j+1]`.
    fn v_unpack_hi(&self, a: &WordVec, b: &WordVec) -> WordVec;

    /// Two-source permute: lane `i` takes `concat(a, b)[idx[i]]`. Indexes at
    /// or above `2V` are rejected.
    fn v_permute2(&self, idx: &WordVec, a: &WordVec, b: &WordVec) -> Result<WordVec, LaneError>;

    /// True when masked adds/subs execute as single instructions, which is
    /// what proxy timing assumes.
    fn mask_ops_native(&self) -> bool {
        false
    }
}

pub(crate) fn check_permute_indices(idx: &WordVec, v: usize) -> Result<(), LaneError> {
    let limit = 2 * v as u64;
    for i in 0..v {
        if idx.lane(i) >= limit {
            return Err(LaneError::IndexOutOfRange {
                lane: i,
                index: idx.lane(i),
                limit,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wordvec_round_trips_and_pads() {
        let w = WordVec::from_slice(&[1, 2, 3, 4]);
        assert_eq!(w.lane_count(), 4);
        assert_eq!(w.as_slice(), &[1, 2, 3, 4]);
        // Dead lanes are zero, so equal values compare equal.
        assert_eq!(w, WordVec::from_fn(4, |i| i as u64 + 1));
    }

    #[test]
    fn mask_logic_stays_within_live_lanes() {
        let m = LaneMask::from_fn(4, |i| i % 2 == 0);
        assert_eq!(m.bits(), 0b0101);
        assert_eq!(m.not().bits(), 0b1010);
        assert_eq!(m.or(&m.not()).bits(), 0b1111);
        assert!(!m.and(&m.not()).any());
    }

    #[test]
    fn dwordvec_round_trips() {
        let xs: Vec<DWord> = (0..8).map(|i| DWord::new(i as u64, !(i as u64))).collect();
        let v = DWordVec::from_dwords(&xs);
        assert_eq!(v.to_dwords(), xs);
    }

    #[test]
    fn lane_config_validates() {
        assert!(LaneConfig::new(8).is_ok());
        assert_eq!(LaneConfig::new(3), Err(LaneError::BadLaneCount(3)));
    }
}

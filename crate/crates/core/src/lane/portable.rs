//! The portable backend: every primitive is a straight per-lane loop over
//! scalar word operations. It is the semantic reference the native backends
//! are judged against, and the only backend with a configurable lane count.

use super::{check_permute_indices, CmpRel, LaneConfig, LaneError, LaneIsa, LaneMask, WordVec};

#[derive(Debug, Clone, Copy)]
pub struct Portable {
    lanes: usize,
}

impl Portable {
    pub fn new(config: LaneConfig) -> Self {
        Portable {
            lanes: config.lanes,
        }
    }

    pub fn with_lanes(lanes: usize) -> Result<Self, LaneError> {
        Ok(Self::new(LaneConfig::new(lanes)?))
    }

    #[inline]
    fn map2(&self, a: &WordVec, b: &WordVec, f: impl Fn(u64, u64) -> u64) -> WordVec {
        debug_assert_eq!(a.lane_count(), self.lanes);
        debug_assert_eq!(b.lane_count(), self.lanes);
        WordVec::from_fn(self.lanes, |i| f(a.lane(i), b.lane(i)))
    }
}

impl Default for Portable {
    fn default() -> Self {
        Portable::new(LaneConfig::default())
    }
}

impl LaneIsa for Portable {
    fn lane_count(&self) -> usize {
        self.lanes
    }

    fn name(&self) -> &'static str {
        "portable"
    }

    fn v_add(&self, a: &WordVec, b: &WordVec) -> WordVec {
        self.map2(a, b, u64::wrapping_add)
    }

    fn v_sub(&self, a: &WordVec, b: &WordVec) -> WordVec {
        self.map2(a, b, u64::wrapping_sub)
    }

    fn v_mullo(&self, a: &WordVec, b: &WordVec) -> WordVec {
        self.map2(a, b, u64::wrapping_mul)
    }

    fn v_mul_even32(&self, a: &WordVec, b: &WordVec) -> WordVec {
        self.map2(a, b, |x, y| (x & 0xFFFF_FFFF) * (y & 0xFFFF_FFFF))
    }

    fn v_shl(&self, a: &WordVec, k: u32) -> WordVec {
        debug_assert!(k < 64);
        WordVec::from_fn(self.lanes, |i| a.lane(i) << k)
    }

    fn v_shr(&self, a: &WordVec, k: u32) -> WordVec {
        debug_assert!(k < 64);
        WordVec::from_fn(self.lanes, |i| a.lane(i) >> k)
    }

    fn v_and(&self, a: &WordVec, b: &WordVec) -> WordVec {
        self.map2(a, b, |x, y| x & y)
    }

    fn v_or(&self, a: &WordVec, b: &WordVec) -> WordVec {
        self.map2(a, b, |x, y| x | y)
    }

    fn v_cmp(&self, a: &WordVec, b: &WordVec, rel: CmpRel) -> LaneMask {
        LaneMask::from_fn(self.lanes, |i| match rel {
            CmpRel::Lt => a.lane(i) < b.lane(i),
            CmpRel::Le => a.lane(i) <= b.lane(i),
            CmpRel::Eq => a.lane(i) == b.lane(i),
        })
    }

    fn v_cmp_gt_signed(&self, a: &WordVec, b: &WordVec) -> LaneMask {
        LaneMask::from_fn(self.lanes, |i| (a.lane(i) as i64) > (b.lane(i) as i64))
    }

    fn v_blend(&self, mask: &LaneMask, a: &WordVec, b: &WordVec) -> WordVec {
        WordVec::from_fn(
            self.lanes,
            |i| if mask.bit(i) { b.lane(i) } else { a.lane(i) },
        )
    }

    fn v_mask_add(&self, src: &WordVec, mask: &LaneMask, a: &WordVec, b: &WordVec) -> WordVec {
        WordVec::from_fn(self.lanes, |i| {
            if mask.bit(i) {
                a.lane(i).wrapping_add(b.lane(i))
            } else {
                src.lane(i)
            }
        })
    }

    fn v_mask_sub(&self, src: &WordVec, mask: &LaneMask, a: &WordVec, b: &WordVec) -> WordVec {
        WordVec::from_fn(self.lanes, |i| {
            if mask.bit(i) {
                a.lane(i).wrapping_sub(b.lane(i))
            } else {
                src.lane(i)
            }
        })
    }

    fn v_unpack_lo(&self, a: &WordVec, b: &WordVec) -> WordVec {
        WordVec::from_fn(self.lanes, |i| {
            let j = i & !1;
            if i % 2 == 0 {
                a.lane(j)
            } else {
                b.lane(j)
            }
        })
    }

    fn v_unpack_hi(&self, a: &WordVec, b: &WordVec) -> WordVec {
        WordVec::from_fn(self.lanes, |i| {
            let j = (i & !1) + 1;
            if i % 2 == 0 {
                a.lane(j)
            } else {
                b.lane(j)
            }
        })
    }

    fn v_permute2(&self, idx: &WordVec, a: &WordVec, b: &WordVec) -> Result<WordVec, LaneError> {
        check_permute_indices(idx, self.lanes)?;
        Ok(WordVec::from_fn(self.lanes, |i| {
            let k = idx.lane(i) as usize;
            if k < self.lanes {
                a.lane(k)
            } else {
                b.lane(k - self.lanes)
            }
        }))
    }

    fn mask_ops_native(&self) -> bool {
        // Scalar branches per lane; cheap, and fine as a stand-in, but not
        // representative of single-instruction masked arithmetic.
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p4() -> Portable {
        Portable::with_lanes(4).unwrap()
    }

    #[test]
    fn unpack_matches_reference_interleave() {
        let b = p4();
        let x = WordVec::from_slice(&[0, 1, 2, 3]);
        let y = WordVec::from_slice(&[4, 5, 6, 7]);
        assert_eq!(b.v_unpack_lo(&x, &y).as_slice(), &[0, 4, 2, 6]);
        assert_eq!(b.v_unpack_hi(&x, &y).as_slice(), &[1, 5, 3, 7]);
        // Self-interleave duplicates lanes.
        assert_eq!(b.v_unpack_lo(&x, &x).as_slice(), &[0, 0, 2, 2]);
    }

    #[test]
    fn permute2_identity_and_bounds() {
        let b = p4();
        let x = WordVec::from_slice(&[10, 11, 12, 13]);
        let y = WordVec::from_slice(&[20, 21, 22, 23]);
        let id = WordVec::from_slice(&[0, 1, 2, 3]);
        assert_eq!(b.v_permute2(&id, &x, &y).unwrap(), x);
        let second = WordVec::from_slice(&[4, 5, 6, 7]);
        assert_eq!(b.v_permute2(&second, &x, &y).unwrap(), y);
        let bad = WordVec::from_slice(&[0, 1, 2, 8]);
        assert_eq!(
            b.v_permute2(&bad, &x, &y),
            Err(LaneError::IndexOutOfRange {
                lane: 3,
                index: 8,
                limit: 8
            })
        );
    }

    #[test]
    fn cmp_and_blend_basics() {
        let b = p4();
        let x = WordVec::from_slice(&[0, 5, 5, u64::MAX]);
        let y = WordVec::from_slice(&[1, 5, 4, 0]);
        assert_eq!(b.v_cmp(&x, &y, CmpRel::Lt).bits(), 0b0001);
        assert_eq!(b.v_cmp(&x, &y, CmpRel::Le).bits(), 0b0011);
        assert_eq!(b.v_cmp(&x, &y, CmpRel::Eq).bits(), 0b0010);
        // Signed: u64::MAX is -1.
        assert_eq!(b.v_cmp_gt_signed(&x, &y).bits(), 0b0100);

        let all = LaneMask::all(4);
        let none = LaneMask::none(4);
        assert_eq!(b.v_blend(&none, &x, &y), x);
        assert_eq!(b.v_blend(&all, &x, &y), y);
    }
}

//! 512-bit-class native backend, 8 lanes of 64 bits, with hardware mask
//! registers: comparisons produce packed masks and masked arithmetic and
//! blends are single instructions.

#![allow(unsafe_code)]

use super::{check_permute_indices, CmpRel, LaneError, LaneIsa, LaneMask, WordVec, MAX_LANES};

use core::arch::x86_64::*;

pub const AVX512_LANES: usize = 8;

#[derive(Debug, Clone, Copy)]
pub struct Avx512 {
    _private: (),
}

impl Avx512 {
    /// Requires both the foundation feature and the 64-bit multiply-low
    /// extension; the error names whichever is missing.
    pub fn new() -> Result<Self, LaneError> {
        if !std::arch::is_x86_feature_detected!("avx512f") {
            return Err(LaneError::UnsupportedBackend {
                backend: "native-512".into(),
                missing: "avx512f".into(),
            });
        }
        if !std::arch::is_x86_feature_detected!("avx512dq") {
            return Err(LaneError::UnsupportedBackend {
                backend: "native-512".into(),
                missing: "avx512dq".into(),
            });
        }
        Ok(Avx512 { _private: () })
    }
}

mod imp {
    use super::*;

    #[inline]
    pub(super) unsafe fn load(a: &WordVec) -> __m512i {
        debug_assert_eq!(a.lane_count(), AVX512_LANES);
        _mm512_loadu_si512(a.raw().as_ptr().cast())
    }

    #[inline]
    pub(super) unsafe fn store(v: __m512i) -> WordVec {
        let mut lanes = [0u64; MAX_LANES];
        _mm512_storeu_si512(lanes.as_mut_ptr().cast(), v);
        WordVec::from_raw(AVX512_LANES, lanes)
    }

    #[inline]
    pub(super) fn to_mask(k: __mmask8) -> LaneMask {
        LaneMask::from_bits(AVX512_LANES, k as u16)
    }

    #[inline]
    pub(super) fn from_mask(m: &LaneMask) -> __mmask8 {
        m.bits() as __mmask8
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn add(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm512_add_epi64(load(a), load(b)))
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn sub(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm512_sub_epi64(load(a), load(b)))
    }

    #[target_feature(enable = "avx512f,avx512dq")]
    pub(super) unsafe fn mullo(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm512_mullo_epi64(load(a), load(b)))
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn mul_even32(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm512_mul_epu32(load(a), load(b)))
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn shl(a: &WordVec, k: u32) -> WordVec {
        store(_mm512_sll_epi64(load(a), _mm_cvtsi32_si128(k as i32)))
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn shr(a: &WordVec, k: u32) -> WordVec {
        store(_mm512_srl_epi64(load(a), _mm_cvtsi32_si128(k as i32)))
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn and(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm512_and_si512(load(a), load(b)))
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn or(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm512_or_si512(load(a), load(b)))
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn cmp(a: &WordVec, b: &WordVec, rel: CmpRel) -> LaneMask {
        let x = load(a);
        let y = load(b);
        let k = match rel {
            CmpRel::Lt => _mm512_cmp_epu64_mask::<_MM_CMPINT_LT>(x, y),
            CmpRel::Le => _mm512_cmp_epu64_mask::<_MM_CMPINT_LE>(x, y),
            CmpRel::Eq => _mm512_cmp_epu64_mask::<_MM_CMPINT_EQ>(x, y),
        };
        to_mask(k)
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn cmp_gt_signed(a: &WordVec, b: &WordVec) -> LaneMask {
        to_mask(_mm512_cmpgt_epi64_mask(load(a), load(b)))
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn blend(m: &LaneMask, a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm512_mask_blend_epi64(from_mask(m), load(a), load(b)))
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn mask_add(
        src: &WordVec,
        m: &LaneMask,
        a: &WordVec,
        b: &WordVec,
    ) -> WordVec {
        store(_mm512_mask_add_epi64(
            load(src),
            from_mask(m),
            load(a),
            load(b),
        ))
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn mask_sub(
        src: &WordVec,
        m: &LaneMask,
        a: &WordVec,
        b: &WordVec,
    ) -> WordVec {
        store(_mm512_mask_sub_epi64(
            load(src),
            from_mask(m),
            load(a),
            load(b),
        ))
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn unpack_lo(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm512_unpacklo_epi64(load(a), load(b)))
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn unpack_hi(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm512_unpackhi_epi64(load(a), load(b)))
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn permute2(idx: &WordVec, a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm512_permutex2var_epi64(load(a), load(idx), load(b)))
    }
}

impl LaneIsa for Avx512 {
    fn lane_count(&self) -> usize {
        AVX512_LANES
    }

    fn name(&self) -> &'static str {
        "native-512"
    }

    fn v_add(&self, a: &WordVec, b: &WordVec) -> WordVec {
        unsafe { imp::add(a, b) }
    }

    fn v_sub(&self, a: &WordVec, b: &WordVec) -> WordVec {
        unsafe { imp::sub(a, b) }
    }

    fn v_mullo(&self, a: &WordVec, b: &WordVec) -> WordVec {
        unsafe { imp::mullo(a, b) }
    }

    fn v_mul_even32(&self, a: &WordVec, b: &WordVec) -> WordVec {
        unsafe { imp::mul_even32(a, b) }
    }

    fn v_shl(&self, a: &WordVec, k: u32) -> WordVec {
        debug_assert!(k < 64);
        unsafe { imp::shl(a, k) }
    }

    fn v_shr(&self, a: &WordVec, k: u32) -> WordVec {
        debug_assert!(k < 64);
        unsafe { imp::shr(a, k) }
    }

    fn v_and(&self, a: &WordVec, b: &WordVec) -> WordVec {
        unsafe { imp::and(a, b) }
    }

    fn v_or(&self, a: &WordVec, b: &WordVec) -> WordVec {
        unsafe { imp::or(a, b) }
    }

    fn v_cmp(&self, a: &WordVec, b: &WordVec, rel: CmpRel) -> LaneMask {
        unsafe { imp::cmp(a, b, rel) }
    }

    fn v_cmp_gt_signed(&self, a: &WordVec, b: &WordVec) -> LaneMask {
        unsafe { imp::cmp_gt_signed(a, b) }
    }

    fn v_blend(&self, mask: &LaneMask, a: &WordVec, b: &WordVec) -> WordVec {
        unsafe { imp::blend(mask, a, b) }
    }

    fn v_mask_add(&self, src: &WordVec, mask: &LaneMask, a: &WordVec, b: &WordVec) -> WordVec {
        unsafe { imp::mask_add(src, mask, a, b) }
    }

    fn v_mask_sub(&self, src: &WordVec, mask: &LaneMask, a: &WordVec, b: &WordVec) -> WordVec {
        unsafe { imp::mask_sub(src, mask, a, b) }
    }

    fn v_unpack_lo(&self, a: &WordVec, b: &WordVec) -> WordVec {
        unsafe { imp::unpack_lo(a, b) }
    }

    fn v_unpack_hi(&self, a: &WordVec, b: &WordVec) -> WordVec {
        unsafe { imp::unpack_hi(a, b) }
    }

    fn v_permute2(&self, idx: &WordVec, a: &WordVec, b: &WordVec) -> Result<WordVec, LaneError> {
        check_permute_indices(idx, AVX512_LANES)?;
        Ok(unsafe { imp::permute2(idx, a, b) })
    }

    fn mask_ops_native(&self) -> bool {
        true
    }
}

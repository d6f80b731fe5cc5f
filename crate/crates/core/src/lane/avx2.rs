//! 256-bit-class native backend, 4 lanes of 64 bits.
//!
//! This ISA has neither unsigned 64-bit comparisons nor mask registers:
//! unsigned compares go through the sign-bias trick, masks are materialized
//! into full-width vectors for blending, and the 64-bit multiply primitives
//! are assembled from 32-bit products.

#![allow(unsafe_code)]

use super::{check_permute_indices, CmpRel, LaneError, LaneIsa, LaneMask, WordVec, MAX_LANES};

use core::arch::x86_64::*;

pub const AVX2_LANES: usize = 4;

#[derive(Debug, Clone, Copy)]
pub struct Avx2 {
    _private: (),
}

impl Avx2 {
    /// Available only when the host supports the 256-bit feature set; the
    /// error names the missing feature.
    pub fn new() -> Result<Self, LaneError> {
        if std::arch::is_x86_feature_detected!("avx2") {
            return Ok(Avx2 { _private: () });
        }
        Err(LaneError::UnsupportedBackend {
            backend: "native-256".into(),
            missing: "avx2".into(),
        })
    }
}

mod imp {
    use super::*;

    #[inline]
    pub(super) unsafe fn load(a: &WordVec) -> __m256i {
        debug_assert_eq!(a.lane_count(), AVX2_LANES);
        _mm256_loadu_si256(a.raw().as_ptr().cast())
    }

    #[inline]
    pub(super) unsafe fn store(v: __m256i) -> WordVec {
        let mut lanes = [0u64; MAX_LANES];
        _mm256_storeu_si256(lanes.as_mut_ptr().cast(), v);
        WordVec::from_raw(AVX2_LANES, lanes)
    }

    #[inline]
    pub(super) unsafe fn mask_vec(m: &LaneMask) -> __m256i {
        let e = |i: usize| -((m.bit(i)) as i64);
        _mm256_setr_epi64x(e(0), e(1), e(2), e(3))
    }

    #[inline]
    pub(super) unsafe fn to_mask(v: __m256i) -> LaneMask {
        let bits = _mm256_movemask_pd(_mm256_castsi256_pd(v)) as u16;
        LaneMask::from_bits(AVX2_LANES, bits)
    }

    /// Unsigned a > b via the sign-bias trick.
    #[inline]
    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn cmpgt_epu64(a: __m256i, b: __m256i) -> __m256i {
        let bias = _mm256_set1_epi64x(i64::MIN);
        _mm256_cmpgt_epi64(_mm256_xor_si256(a, bias), _mm256_xor_si256(b, bias))
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn add(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm256_add_epi64(load(a), load(b)))
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn sub(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm256_sub_epi64(load(a), load(b)))
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn mullo(a: &WordVec, b: &WordVec) -> WordVec {
        let x = load(a);
        let y = load(b);
        let ll = _mm256_mul_epu32(x, y);
        let xh = _mm256_srli_epi64::<32>(x);
        let yh = _mm256_srli_epi64::<32>(y);
        let cross = _mm256_add_epi64(_mm256_mul_epu32(x, yh), _mm256_mul_epu32(xh, y));
        store(_mm256_add_epi64(ll, _mm256_slli_epi64::<32>(cross)))
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn mul_even32(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm256_mul_epu32(load(a), load(b)))
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn shl(a: &WordVec, k: u32) -> WordVec {
        store(_mm256_sll_epi64(load(a), _mm_cvtsi32_si128(k as i32)))
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn shr(a: &WordVec, k: u32) -> WordVec {
        store(_mm256_srl_epi64(load(a), _mm_cvtsi32_si128(k as i32)))
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn and(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm256_and_si256(load(a), load(b)))
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn or(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm256_or_si256(load(a), load(b)))
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn cmp(a: &WordVec, b: &WordVec, rel: CmpRel) -> LaneMask {
        let x = load(a);
        let y = load(b);
        match rel {
            CmpRel::Lt => to_mask(cmpgt_epu64(y, x)),
            CmpRel::Le => to_mask(cmpgt_epu64(x, y)).not(),
            CmpRel::Eq => to_mask(_mm256_cmpeq_epi64(x, y)),
        }
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn cmp_gt_signed(a: &WordVec, b: &WordVec) -> LaneMask {
        to_mask(_mm256_cmpgt_epi64(load(a), load(b)))
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn blend(m: &LaneMask, a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm256_blendv_epi8(load(a), load(b), mask_vec(m)))
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn mask_add(
        src: &WordVec,
        m: &LaneMask,
        a: &WordVec,
        b: &WordVec,
    ) -> WordVec {
        let sum = _mm256_add_epi64(load(a), load(b));
        store(_mm256_blendv_epi8(load(src), sum, mask_vec(m)))
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn mask_sub(
        src: &WordVec,
        m: &LaneMask,
        a: &WordVec,
        b: &WordVec,
    ) -> WordVec {
        let diff = _mm256_sub_epi64(load(a), load(b));
        store(_mm256_blendv_epi8(load(src), diff, mask_vec(m)))
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn unpack_lo(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm256_unpacklo_epi64(load(a), load(b)))
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn unpack_hi(a: &WordVec, b: &WordVec) -> WordVec {
        store(_mm256_unpackhi_epi64(load(a), load(b)))
    }
}

impl LaneIsa for Avx2 {
    fn lane_count(&self) -> usize {
        AVX2_LANES
    }

    fn name(&self) -> &'static str {
        "native-256"
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
        // No 64-bit two-source variable permute at this width; data movement
        // is done lane-by-lane after validation.
        // TODO: specialize the two fixed interleave patterns the transform
        // plan emits to vperm2i128/vpunpck pairs instead of this gather.
        check_permute_indices(idx, AVX2_LANES)?;
        Ok(WordVec::from_fn(AVX2_LANES, |i| {
            let k = idx.lane(i) as usize;
            if k < AVX2_LANES {
                a.lane(k)
            } else {
                b.lane(k - AVX2_LANES)
            }
        }))
    }

    fn mask_ops_native(&self) -> bool {
        false
    }
}

//! Composite double-word modular operations over the primitive vocabulary.
//!
//! These are written once and run unchanged on every backend: all per-lane
//! control flow is carried in masks, never branches. The modular-addition
//! sequence follows the classic split hi/lo dataflow for vector ISAs without
//! carry support; since masked arithmetic is not part of the primitive set,
//! each conditional increment/decrement is an op plus a blend.
//!
//! Carries between word planes travel as 0/1 word vectors so they can feed
//! ordinary adds.

use super::{CmpRel, DWordVec, LaneIsa, LaneMask, WordVec};
use crate::modular::{Modulus, MulAlgo};

/// Vector add with carry: `(sum, carry)` where carry lanes are 0 or 1.
pub(crate) fn adc_vec<B: LaneIsa + ?Sized>(
    b: &B,
    x: &WordVec,
    y: &WordVec,
    cin: &WordVec,
) -> (WordVec, WordVec) {
    let one = b.splat(1);
    let zero = b.splat(0);
    let t0 = b.v_add(x, y);
    let m0 = b.v_cmp(&t0, x, CmpRel::Lt);
    let t1 = b.v_add(&t0, cin);
    let m1 = b.v_cmp(&t1, &t0, CmpRel::Lt);
    let carry = b.v_blend(&m0.or(&m1), &zero, &one);
    (t1, carry)
}

/// Vector subtract with borrow: `(diff, borrow)` with 0/1 borrow lanes.
pub(crate) fn sbb_vec<B: LaneIsa + ?Sized>(
    b: &B,
    x: &WordVec,
    y: &WordVec,
    bin: &WordVec,
) -> (WordVec, WordVec) {
    let one = b.splat(1);
    let zero = b.splat(0);
    let m0 = b.v_cmp(x, y, CmpRel::Lt);
    let t0 = b.v_sub(x, y);
    let m1 = b.v_cmp(&t0, bin, CmpRel::Lt);
    let t1 = b.v_sub(&t0, bin);
    let borrow = b.v_blend(&m0.or(&m1), &zero, &one);
    (t1, borrow)
}

/// Lane-wise 64x64 -> 128 widening multiply from 32-bit partial products.
pub(crate) fn wmul_vec<B: LaneIsa + ?Sized>(b: &B, x: &WordVec, y: &WordVec) -> (WordVec, WordVec) {
    let lo32 = b.splat(0xFFFF_FFFF);
    let xs = b.v_shr(x, 32);
    let ys = b.v_shr(y, 32);
    let ll = b.v_mul_even32(x, y);
    let lh = b.v_mul_even32(x, &ys);
    let hl = b.v_mul_even32(&xs, y);
    let hh = b.v_mul_even32(&xs, &ys);

    let t = b.v_add(&lh, &b.v_shr(&ll, 32));
    let t_lo = b.v_and(&t, &lo32);
    let t_hi = b.v_shr(&t, 32);
    let u = b.v_add(&hl, &t_lo);
    let hi = b.v_add(&b.v_add(&hh, &t_hi), &b.v_shr(&u, 32));
    let lo = b.v_or(&b.v_shl(&u, 32), &b.v_and(&ll, &lo32));
    (hi, lo)
}

/// Lane-wise 128-bit unsigned `a >= b` over split planes.
fn ge128<B: LaneIsa + ?Sized>(
    b: &B,
    a_hi: &WordVec,
    a_lo: &WordVec,
    b_hi: &WordVec,
    b_lo: &WordVec,
) -> LaneMask {
    let gt = b.v_cmp(b_hi, a_hi, CmpRel::Lt);
    let eq = b.v_cmp(a_hi, b_hi, CmpRel::Eq);
    let le = b.v_cmp(b_lo, a_lo, CmpRel::Le);
    gt.or(&eq.and(&le))
}

/// Lane-wise `(a + b) mod q` in the vector-ISA dataflow.
///
/// The op sequence is fixed: three adds, seven compares, three subtracts,
/// four blends (mask logic aside), matching the conditional-subtract
/// formulation with masked steps expressed as op + blend.
pub fn v_addmod<B: LaneIsa + ?Sized>(b: &B, a: &DWordVec, bb: &DWordVec, m: &Modulus) -> DWordVec {
    let one = b.splat(1);
    let ml = b.splat(m.q().lo);
    let mh = b.splat(m.q().hi);

    let t30 = b.v_add(&a.lo, &bb.lo);
    let q1 = b.v_cmp(&t30, &a.lo, CmpRel::Lt);
    let q2 = b.v_cmp(&t30, &bb.lo, CmpRel::Lt);
    let c1 = q1.or(&q2);
    let t28 = b.v_add(&a.hi, &bb.hi);
    let t28p = b.v_add(&t28, &one);
    let t29 = b.v_blend(&c1, &t28, &t28p);
    let q3 = b.v_cmp(&t29, &a.hi, CmpRel::Lt);
    let q4 = b.v_cmp(&t29, &bb.hi, CmpRel::Lt);
    let c2 = q3.or(&q4);

    let a31 = b.v_cmp(&mh, &t29, CmpRel::Lt);
    let a35 = b.v_cmp(&mh, &t29, CmpRel::Eq);
    let a38 = b.v_cmp(&ml, &t30, CmpRel::Le);
    let a34 = a35.and(&a38);
    let i28 = c2.or(&a31.or(&a34));

    let d1 = b.v_sub(&t30, &ml);
    let b1 = a38.not();
    let d2 = b.v_sub(&t29, &mh);
    let d2m = b.v_sub(&d2, &one);
    let d3 = b.v_blend(&b1, &d2, &d2m);

    DWordVec {
        hi: b.v_blend(&i28, &t29, &d3),
        lo: b.v_blend(&i28, &t30, &d1),
    }
}

/// Lane-wise `(a - b) mod q`: subtract, then add `q` back in underflowing
/// lanes, all under masks.
pub fn v_submod<B: LaneIsa + ?Sized>(b: &B, a: &DWordVec, bb: &DWordVec, m: &Modulus) -> DWordVec {
    let one = b.splat(1);
    let ml = b.splat(m.q().lo);
    let mh = b.splat(m.q().hi);

    let borrow_lo = b.v_cmp(&a.lo, &bb.lo, CmpRel::Lt);
    let d_lo = b.v_sub(&a.lo, &bb.lo);
    let d_hi0 = b.v_sub(&a.hi, &bb.hi);
    let d_hi1 = b.v_sub(&d_hi0, &one);
    let d_hi = b.v_blend(&borrow_lo, &d_hi0, &d_hi1);

    let hi_lt = b.v_cmp(&a.hi, &bb.hi, CmpRel::Lt);
    let hi_eq = b.v_cmp(&a.hi, &bb.hi, CmpRel::Eq);
    let under = hi_lt.or(&hi_eq.and(&borrow_lo));

    let s_lo = b.v_add(&d_lo, &ml);
    let carry = b.v_cmp(&s_lo, &ml, CmpRel::Lt);
    let s_hi0 = b.v_add(&d_hi, &mh);
    let s_hi1 = b.v_add(&s_hi0, &one);
    let s_hi = b.v_blend(&carry, &s_hi0, &s_hi1);

    DWordVec {
        hi: b.v_blend(&under, &d_hi, &s_hi),
        lo: b.v_blend(&under, &d_lo, &s_lo),
    }
}

/// Exact 256-bit lane-wise product as four word planes, least significant
/// first.
pub(crate) fn dwmul_vec<B: LaneIsa + ?Sized>(
    b: &B,
    a: &DWordVec,
    bb: &DWordVec,
    algo: MulAlgo,
) -> [WordVec; 4] {
    let zero = b.splat(0);
    match algo {
        MulAlgo::Schoolbook => {
            let (h_ll, l_ll) = wmul_vec(b, &a.lo, &bb.lo);
            let (h_lh, l_lh) = wmul_vec(b, &a.lo, &bb.hi);
            let (h_hl, l_hl) = wmul_vec(b, &a.hi, &bb.lo);
            let (h_hh, l_hh) = wmul_vec(b, &a.hi, &bb.hi);

            let p0 = l_ll;
            let (p1, c1) = adc_vec(b, &h_ll, &l_lh, &zero);
            let (p1, c2) = adc_vec(b, &p1, &l_hl, &zero);
            let (p2, c3) = adc_vec(b, &h_lh, &h_hl, &c1);
            let (p2, c4) = adc_vec(b, &p2, &l_hh, &c2);
            let (p3, _) = adc_vec(b, &h_hh, &zero, &c3);
            let (p3, _) = adc_vec(b, &p3, &zero, &c4);
            [p0, p1, p2, p3]
        }
        MulAlgo::Karatsuba => {
            let (h_ll, l_ll) = wmul_vec(b, &a.lo, &bb.lo);
            let (h_hh, l_hh) = wmul_vec(b, &a.hi, &bb.hi);

            // 65-bit half sums: keep the overflow as a mask, fold the
            // correction terms in separately.
            let (sa, ca) = adc_vec(b, &a.hi, &a.lo, &zero);
            let (sb, cb) = adc_vec(b, &b_hi_lo(bb).0, &b_hi_lo(bb).1, &zero);
            let (h_m, l_m) = wmul_vec(b, &sa, &sb);

            let ca_mask = b.v_cmp(&ca, &b.splat(1), CmpRel::Eq);
            let cb_mask = b.v_cmp(&cb, &b.splat(1), CmpRel::Eq);

            let mut m0 = l_m;
            let mut m1 = h_m;
            let add_a = b.v_blend(&ca_mask, &zero, &sb);
            let (t, k1) = adc_vec(b, &m1, &add_a, &zero);
            m1 = t;
            let add_b = b.v_blend(&cb_mask, &zero, &sa);
            let (t, k2) = adc_vec(b, &m1, &add_b, &zero);
            m1 = t;
            let both = ca_mask.and(&cb_mask);
            let cc = b.v_blend(&both, &zero, &b.splat(1));
            let mut m2 = b.v_add(&b.v_add(&k1, &k2), &cc);

            // Subtract both outer products from the cross term; the result
            // is never negative, so the last borrows vanish.
            let (t, bb1) = sbb_vec(b, &m0, &l_hh, &zero);
            m0 = t;
            let (t, bb1) = sbb_vec(b, &m1, &h_hh, &bb1);
            m1 = t;
            let (t, _) = sbb_vec(b, &m2, &zero, &bb1);
            m2 = t;
            let (t, bb2) = sbb_vec(b, &m0, &l_ll, &zero);
            m0 = t;
            let (t, bb2) = sbb_vec(b, &m1, &h_ll, &bb2);
            m1 = t;
            let (t, _) = sbb_vec(b, &m2, &zero, &bb2);
            m2 = t;

            let p0 = l_ll;
            let (p1, c) = adc_vec(b, &h_ll, &m0, &zero);
            let (p2, c) = adc_vec(b, &l_hh, &m1, &c);
            let (p3, _) = adc_vec(b, &h_hh, &m2, &c);
            [p0, p1, p2, p3]
        }
    }
}

fn b_hi_lo(v: &DWordVec) -> (&WordVec, &WordVec) {
    (&v.hi, &v.lo)
}

/// Lane-wise Barrett `(a * b) mod q`, bit-exact with the scalar pipeline:
/// full 256-bit product, full product with `mu`, shift by `k`, one low-128
/// quotient-times-modulus subtraction, then two masked correction rounds.
pub fn v_mulmod<B: LaneIsa + ?Sized>(
    b: &B,
    a: &DWordVec,
    bb: &DWordVec,
    m: &Modulus,
    algo: MulAlgo,
) -> DWordVec {
    let zero = b.splat(0);
    let mu_lo = b.splat(m.mu().lo);
    let mu_hi = b.splat(m.mu().hi);
    let ql = b.splat(m.q().lo);
    let qh = b.splat(m.q().hi);

    let ab = dwmul_vec(b, a, bb, algo);

    // ab * mu: 384 bits in six word planes.
    let mut w = [zero, zero, zero, zero, zero, zero];
    for (j, mu_d) in [&mu_lo, &mu_hi].into_iter().enumerate() {
        let mut k = zero;
        for i in 0..4 {
            let (hi, lo) = wmul_vec(b, &ab[i], mu_d);
            let (t, c1) = adc_vec(b, &w[i + j], &lo, &zero);
            let (t, c2) = adc_vec(b, &t, &k, &zero);
            w[i + j] = t;
            let (nk, _) = adc_vec(b, &hi, &c1, &c2);
            k = nk;
        }
        let (t, _) = adc_vec(b, &w[4 + j], &k, &zero);
        w[4 + j] = t;
    }

    // floor(ab * mu / 2^k): the quotient estimate fits two word planes.
    let ws = (m.k() / 64) as usize;
    let bs = m.k() % 64;
    let mut qhat = [zero, zero];
    for (i, q_plane) in qhat.iter_mut().enumerate() {
        let src = i + ws;
        if src >= 6 {
            break;
        }
        let mut v = if bs == 0 {
            w[src]
        } else {
            b.v_shr(&w[src], bs)
        };
        if bs > 0 && src + 1 < 6 {
            v = b.v_or(&v, &b.v_shl(&w[src + 1], 64 - bs));
        }
        *q_plane = v;
    }

    // t = ab - qhat*q over the low 128 bits.
    let (pp_hi, pp_lo) = wmul_vec(b, &qhat[0], &ql);
    let qq_lo = pp_lo;
    let qq_hi = b.v_add(
        &b.v_add(&pp_hi, &b.v_mullo(&qhat[0], &qh)),
        &b.v_mullo(&qhat[1], &ql),
    );
    let (t_lo, br) = sbb_vec(b, &ab[0], &qq_lo, &zero);
    let (t_hi, _) = sbb_vec(b, &ab[1], &qq_hi, &br);

    // Two masked correction rounds bring t from [0, 2q) below q.
    let mut t = DWordVec { hi: t_hi, lo: t_lo };
    for _ in 0..2 {
        let ge = ge128(b, &t.hi, &t.lo, &qh, &ql);
        let (d_lo, borrow) = sbb_vec(b, &t.lo, &ql, &zero);
        let (d_hi, _) = sbb_vec(b, &t.hi, &qh, &borrow);
        t = DWordVec {
            hi: b.v_blend(&ge, &t.hi, &d_hi),
            lo: b.v_blend(&ge, &t.lo, &d_lo),
        };
    }
    t
}

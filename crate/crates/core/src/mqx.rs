//! Emulation of the MQX vector extension: per-lane widening multiply,
//! add-with-carry, and subtract-with-borrow, plus the multiply-high and
//! predicated forms used by the sensitivity variants.
//!
//! Functional mode computes exact per-lane results and is bit-exact with
//! every lane backend. Proxy mode executes, for each extension op, the
//! structurally closest existing instruction (widening multiply -> one
//! multiply-low per output vector; carry ops -> masked add/sub) so the
//! instruction stream is timing-representative; its numeric output is
//! garbage by design and is never used for correctness checks. Data
//! dependencies are kept alive in both modes: proxy outputs feed the same
//! downstream ops, and the harness folds results into a checksum sink.
//!
//! Trace convention: a widening multiply records one mul-class op per
//! output vector, which also matches its decomposition into a
//! (multiply-low, multiply-high) pair under the `MhC` variant.

use crate::dword::{adc_word, mul_wide_word, sbb_word};
use crate::engine::ModularVectorOps;
use crate::lane::{algo, CmpRel, DWordVec, LaneError, LaneIsa, LaneMask, WordVec};
use crate::modular::{Modulus, MulAlgo};
use crate::trace::{OpKind, Recorded, TraceHandle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MqxMode {
    #[default]
    Functional,
    PisaProxy,
}

impl MqxMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MqxMode::Functional => "functional",
            MqxMode::PisaProxy => "pisa",
        }
    }
}

impl std::str::FromStr for MqxMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "functional" => Ok(MqxMode::Functional),
            "pisa" => Ok(MqxMode::PisaProxy),
            other => Err(format!("unknown mqx mode '{other}' (functional or pisa)")),
        }
    }
}

/// Which extension instructions the kernels may emit.
///
/// `Base` emits none (plain vector-ISA sequences); `M` adds only the
/// widening multiply; `C` only carry/borrow; `Mc` both; `MhC` replaces the
/// widening multiply with a (multiply-low, multiply-high) pair; `Mcp` adds
/// the predicated forms on top of `Mc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MqxVariant {
    Base,
    M,
    C,
    #[default]
    Mc,
    MhC,
    Mcp,
}

impl MqxVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            MqxVariant::Base => "base",
            MqxVariant::M => "m",
            MqxVariant::C => "c",
            MqxVariant::Mc => "mc",
            MqxVariant::MhC => "mhc",
            MqxVariant::Mcp => "mcp",
        }
    }

    fn has_carry(self) -> bool {
        matches!(
            self,
            MqxVariant::C | MqxVariant::Mc | MqxVariant::MhC | MqxVariant::Mcp
        )
    }
}

impl std::str::FromStr for MqxVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base" => Ok(MqxVariant::Base),
            "m" => Ok(MqxVariant::M),
            "c" => Ok(MqxVariant::C),
            "mc" => Ok(MqxVariant::Mc),
            "mhc" => Ok(MqxVariant::MhC),
            "mcp" => Ok(MqxVariant::Mcp),
            other => Err(format!(
                "unknown mqx variant '{other}' (base, m, c, mc, mhc, mcp)"
            )),
        }
    }
}

/// The extension engine over a lane backend.
///
/// The base backend supplies everything the extension does not add
/// (compares, blends, shifts, plain multiplies). When tracing, build via
/// [`MqxEngine::traced`] so base ops and extension ops land in one trace.
#[derive(Debug, Clone)]
pub struct MqxEngine<B: LaneIsa> {
    base: B,
    mode: MqxMode,
    variant: MqxVariant,
    trace: Option<TraceHandle>,
}

impl<B: LaneIsa> MqxEngine<B> {
    pub fn new(base: B, mode: MqxMode, variant: MqxVariant) -> Self {
        MqxEngine {
            base,
            mode,
            variant,
            trace: None,
        }
    }

    /// Wires one trace handle through both the extension ops and the base
    /// backend, so the recorded stream is the full instruction sequence.
    pub fn traced(
        base: B,
        mode: MqxMode,
        variant: MqxVariant,
    ) -> (MqxEngine<Recorded<B>>, TraceHandle) {
        let handle = TraceHandle::new();
        let engine = MqxEngine {
            base: Recorded::new(base, handle.clone()),
            mode,
            variant,
            trace: Some(handle.clone()),
        };
        (engine, handle)
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn mode(&self) -> MqxMode {
        self.mode
    }

    pub fn variant(&self) -> MqxVariant {
        self.variant
    }

    /// Records an extension op. Proxy executions are recorded by the base
    /// wrapper as the proxy instruction instead, preserving class counts.
    #[inline]
    fn rec(&self, kind: OpKind) {
        if self.mode == MqxMode::Functional {
            if let Some(t) = &self.trace {
                t.record(kind);
            }
        }
    }

    #[inline]
    fn v(&self) -> usize {
        self.base.lane_count()
    }

    /// Widening multiply: per lane, `hi * 2^64 + lo = a * b` exactly.
    pub fn mqx_mul_wide(&self, a: &WordVec, b: &WordVec) -> (WordVec, WordVec) {
        match self.mode {
            MqxMode::Functional => {
                self.rec(OpKind::MulWideLo);
                self.rec(OpKind::MulWideHi);
                let mut hi = [0u64; crate::lane::MAX_LANES];
                let v = self.v();
                let lo = WordVec::from_fn(v, |i| {
                    let (h, l) = mul_wide_word(a.lane(i), b.lane(i));
                    hi[i] = h;
                    l
                });
                (WordVec::from_fn(v, |i| hi[i]), lo)
            }
            MqxMode::PisaProxy => {
                // One multiply-low per output vector.
                let lo = self.base.v_mullo(a, b);
                let hi = self.base.v_mullo(a, b);
                (hi, lo)
            }
        }
    }

    /// Multiply-high: the upper word of the per-lane product. Proxy mode
    /// stands in a second multiply-low, modeling equal latency.
    pub fn mqx_mulhi(&self, a: &WordVec, b: &WordVec) -> WordVec {
        match self.mode {
            MqxMode::Functional => {
                self.rec(OpKind::MulHi);
                WordVec::from_fn(self.v(), |i| mul_wide_word(a.lane(i), b.lane(i)).0)
            }
            MqxMode::PisaProxy => self.base.v_mullo(a, b),
        }
    }

    /// Add with carry: per-lane `a + b + ci` and the carry-out mask.
    pub fn mqx_adc(&self, a: &WordVec, b: &WordVec, ci: &LaneMask) -> (WordVec, LaneMask) {
        match self.mode {
            MqxMode::Functional => {
                self.rec(OpKind::Adc);
                let v = self.v();
                let mut co = 0u16;
                let sum = WordVec::from_fn(v, |i| {
                    let (s, c) = adc_word(a.lane(i), b.lane(i), ci.bit(i));
                    co |= (c as u16) << i;
                    s
                });
                (sum, LaneMask::from_bits(v, co))
            }
            MqxMode::PisaProxy => {
                // Masked-add proxy; the carry-out is not computed, the
                // incoming mask is passed through to keep the dependency.
                let sum = self.base.v_mask_add(a, ci, a, b);
                (sum, *ci)
            }
        }
    }

    /// Subtract with borrow: per-lane `a - b - bi` and the borrow-out mask
    /// (the sign of the exact difference).
    pub fn mqx_sbb(&self, a: &WordVec, b: &WordVec, bi: &LaneMask) -> (WordVec, LaneMask) {
        match self.mode {
            MqxMode::Functional => {
                self.rec(OpKind::Sbb);
                let v = self.v();
                let mut bo = 0u16;
                let diff = WordVec::from_fn(v, |i| {
                    let (d, b_out) = sbb_word(a.lane(i), b.lane(i), bi.bit(i));
                    bo |= (b_out as u16) << i;
                    d
                });
                (diff, LaneMask::from_bits(v, bo))
            }
            MqxMode::PisaProxy => {
                let diff = self.base.v_mask_sub(a, bi, a, b);
                (diff, *bi)
            }
        }
    }

    /// Predicated add with carry: `pred ? a + b + ci : a`, no carry-out.
    pub fn mqx_adc_pred(
        &self,
        a: &WordVec,
        b: &WordVec,
        ci: &LaneMask,
        pred: &LaneMask,
    ) -> WordVec {
        match self.mode {
            MqxMode::Functional => {
                self.rec(OpKind::AdcPred);
                WordVec::from_fn(self.v(), |i| {
                    if pred.bit(i) {
                        adc_word(a.lane(i), b.lane(i), ci.bit(i)).0
                    } else {
                        a.lane(i)
                    }
                })
            }
            MqxMode::PisaProxy => self.base.v_mask_add(a, pred, a, b),
        }
    }

    /// Predicated subtract with borrow: `pred ? a - b - bi : a`, no
    /// borrow-out.
    pub fn mqx_sbb_pred(
        &self,
        a: &WordVec,
        b: &WordVec,
        bi: &LaneMask,
        pred: &LaneMask,
    ) -> WordVec {
        match self.mode {
            MqxMode::Functional => {
                self.rec(OpKind::SbbPred);
                WordVec::from_fn(self.v(), |i| {
                    if pred.bit(i) {
                        sbb_word(a.lane(i), b.lane(i), bi.bit(i)).0
                    } else {
                        a.lane(i)
                    }
                })
            }
            MqxMode::PisaProxy => self.base.v_mask_sub(a, pred, a, b),
        }
    }

    /// Carry chain step honoring the variant: the extension instruction
    /// when carry support is present, otherwise the vector-ISA sequence
    /// with the carry materialized through compares and a blend.
    fn chain_adc(&self, a: &WordVec, b: &WordVec, ci: &LaneMask) -> (WordVec, LaneMask) {
        if self.variant.has_carry() {
            return self.mqx_adc(a, b, ci);
        }
        let base = &self.base;
        let zero = base.splat(0);
        let one = base.splat(1);
        let cvec = base.v_blend(ci, &zero, &one);
        let t0 = base.v_add(a, b);
        let m0 = base.v_cmp(&t0, a, CmpRel::Lt);
        let t1 = base.v_add(&t0, &cvec);
        let m1 = base.v_cmp(&t1, &t0, CmpRel::Lt);
        (t1, m0.or(&m1))
    }

    fn chain_sbb(&self, a: &WordVec, b: &WordVec, bi: &LaneMask) -> (WordVec, LaneMask) {
        if self.variant.has_carry() {
            return self.mqx_sbb(a, b, bi);
        }
        let base = &self.base;
        let zero = base.splat(0);
        let one = base.splat(1);
        let bvec = base.v_blend(bi, &zero, &one);
        let m0 = base.v_cmp(a, b, CmpRel::Lt);
        let t0 = base.v_sub(a, b);
        let m1 = base.v_cmp(&t0, &bvec, CmpRel::Lt);
        let t1 = base.v_sub(&t0, &bvec);
        (t1, m0.or(&m1))
    }

    /// Widening multiply as the variant provides it.
    fn wmul(&self, a: &WordVec, b: &WordVec) -> (WordVec, WordVec) {
        match self.variant {
            MqxVariant::M | MqxVariant::Mc | MqxVariant::Mcp => self.mqx_mul_wide(a, b),
            MqxVariant::MhC => {
                let lo = self.base.v_mullo(a, b);
                let hi = self.mqx_mulhi(a, b);
                (hi, lo)
            }
            MqxVariant::C | MqxVariant::Base => algo::wmul_vec(&self.base, a, b),
        }
    }

    /// Modular addition in the extension sequence: two adds-with-carry, the
    /// trial subtraction of `q`, one signed-order compare on its high half,
    /// and two blends. Seven lane-ops.
    pub fn addmod128(&self, a: &DWordVec, b: &DWordVec, m: &Modulus) -> DWordVec {
        if matches!(self.variant, MqxVariant::Base | MqxVariant::M) {
            return algo::v_addmod(&self.base, a, b, m);
        }
        let base = &self.base;
        let v = self.v();
        let z = LaneMask::none(v);
        let ml = base.splat(m.q().lo);
        let mh = base.splat(m.q().hi);
        let minus_one = base.splat(u64::MAX);

        let (el, elc) = self.mqx_adc(&a.lo, &b.lo, &z);
        let (eh, ehc) = self.mqx_adc(&a.hi, &b.hi, &elc);
        let (d1, clc) = self.mqx_sbb(&el, &ml, &z);
        let (d2, _) = self.mqx_sbb(&eh, &mh, &clc);
        // With q below 2^124 the high difference has sign headroom: it is
        // non-negative as a signed word exactly when a + b >= q.
        let nb = base.v_cmp_gt_signed(&d2, &minus_one);
        let ctrl = ehc.or(&nb);
        DWordVec {
            hi: base.v_blend(&ctrl, &eh, &d2),
            lo: base.v_blend(&ctrl, &el, &d1),
        }
    }

    /// Modular subtraction: subtract, then add `q` back under the borrow
    /// mask. The predicated variant merges the add-back and the select.
    pub fn submod128(&self, a: &DWordVec, b: &DWordVec, m: &Modulus) -> DWordVec {
        if matches!(self.variant, MqxVariant::Base | MqxVariant::M) {
            return algo::v_submod(&self.base, a, b, m);
        }
        let base = &self.base;
        let v = self.v();
        let z = LaneMask::none(v);
        let ml = base.splat(m.q().lo);
        let mh = base.splat(m.q().hi);

        let (d_lo, b1) = self.mqx_sbb(&a.lo, &b.lo, &z);
        let (d_hi, bo) = self.mqx_sbb(&a.hi, &b.hi, &b1);

        if self.variant == MqxVariant::Mcp {
            let lo = self.mqx_adc_pred(&d_lo, &ml, &z, &bo);
            let carry = base.v_cmp(&lo, &d_lo, CmpRel::Lt);
            let hi = self.mqx_adc_pred(&d_hi, &mh, &carry, &bo);
            return DWordVec { hi, lo };
        }

        let (s_lo, c1) = self.mqx_adc(&d_lo, &ml, &z);
        let (s_hi, _) = self.mqx_adc(&d_hi, &mh, &c1);
        DWordVec {
            hi: base.v_blend(&bo, &d_hi, &s_hi),
            lo: base.v_blend(&bo, &d_lo, &s_lo),
        }
    }

    /// Barrett multiplication assembled from the variant's widening
    /// multiply and carry chains.
    pub fn mulmod128(
        &self,
        a: &DWordVec,
        b: &DWordVec,
        m: &Modulus,
        algo_sel: MulAlgo,
    ) -> DWordVec {
        if self.variant == MqxVariant::Base {
            return algo::v_mulmod(&self.base, a, b, m, algo_sel);
        }
        let base = &self.base;
        let v = self.v();
        let z = LaneMask::none(v);
        let zero = base.splat(0);
        let ql = base.splat(m.q().lo);
        let qh = base.splat(m.q().hi);
        let mu_lo = base.splat(m.mu().lo);
        let mu_hi = base.splat(m.mu().hi);

        let ab = self.dwmul(a, b, algo_sel);

        // ab * mu across six word planes.
        let mut w = [zero, zero, zero, zero, zero, zero];
        for (j, mu_d) in [&mu_lo, &mu_hi].into_iter().enumerate() {
            let mut k = zero;
            for i in 0..4 {
                let (hi, lo) = self.wmul(&ab[i], mu_d);
                let (t, c1) = self.chain_adc(&w[i + j], &lo, &z);
                let (t, c2) = self.chain_adc(&t, &k, &z);
                w[i + j] = t;
                let (nk, _) = self.chain_adc(&hi, &zero, &c1);
                let (nk, _) = self.chain_adc(&nk, &zero, &c2);
                k = nk;
            }
            let (t, _) = self.chain_adc(&w[4 + j], &k, &z);
            w[4 + j] = t;
        }

        // Quotient estimate: floor(ab*mu / 2^k) fits two word planes.
        let ws = (m.k() / 64) as usize;
        let bs = m.k() % 64;
        let mut qhat = [zero, zero];
        for (i, plane) in qhat.iter_mut().enumerate() {
            let src = i + ws;
            if src >= 6 {
                break;
            }
            let mut val = if bs == 0 {
                w[src]
            } else {
                base.v_shr(&w[src], bs)
            };
            if bs > 0 && src + 1 < 6 {
                val = base.v_or(&val, &base.v_shl(&w[src + 1], 64 - bs));
            }
            *plane = val;
        }

        // t = ab - qhat*q over the low 128 bits.
        let (pp_hi, pp_lo) = self.wmul(&qhat[0], &ql);
        let qq_hi = base.v_add(
            &base.v_add(&pp_hi, &base.v_mullo(&qhat[0], &qh)),
            &base.v_mullo(&qhat[1], &ql),
        );
        let (t_lo, br) = self.chain_sbb(&ab[0], &pp_lo, &z);
        let (t_hi, _) = self.chain_sbb(&ab[1], &qq_hi, &br);
        let mut t = DWordVec { hi: t_hi, lo: t_lo };

        // Two correction rounds; under the predicated variant the trial
        // subtraction and the select are merged.
        for _ in 0..2 {
            if self.variant == MqxVariant::Mcp {
                let gt = base.v_cmp(&qh, &t.hi, CmpRel::Lt);
                let eq = base.v_cmp(&t.hi, &qh, CmpRel::Eq);
                let le = base.v_cmp(&ql, &t.lo, CmpRel::Le);
                let ge = gt.or(&eq.and(&le));
                let borrow = base.v_cmp(&t.lo, &ql, CmpRel::Lt);
                t = DWordVec {
                    hi: self.mqx_sbb_pred(&t.hi, &qh, &borrow, &ge),
                    lo: self.mqx_sbb_pred(&t.lo, &ql, &z, &ge),
                };
            } else {
                let minus_one = base.splat(u64::MAX);
                let (c0, brc) = self.chain_sbb(&t.lo, &ql, &z);
                let (c1, _) = self.chain_sbb(&t.hi, &qh, &brc);
                let nb = base.v_cmp_gt_signed(&c1, &minus_one);
                t = DWordVec {
                    hi: base.v_blend(&nb, &t.hi, &c1),
                    lo: base.v_blend(&nb, &t.lo, &c0),
                };
            }
        }
        t
    }

    /// Exact 256-bit product as four word planes, built from the variant's
    /// widening multiply with carry chains between planes.
    fn dwmul(&self, a: &DWordVec, b: &DWordVec, algo_sel: MulAlgo) -> [WordVec; 4] {
        let base = &self.base;
        let v = self.v();
        let z = LaneMask::none(v);
        let zero = base.splat(0);
        match algo_sel {
            MulAlgo::Schoolbook => {
                let (h00, l00) = self.wmul(&a.lo, &b.lo);
                let (h01, l01) = self.wmul(&a.lo, &b.hi);
                let (h10, l10) = self.wmul(&a.hi, &b.lo);
                let (h11, l11) = self.wmul(&a.hi, &b.hi);

                let p0 = l00;
                let (p1, c1) = self.chain_adc(&h00, &l01, &z);
                let (p1, c2) = self.chain_adc(&p1, &l10, &z);
                let (p2, c3) = self.chain_adc(&h01, &h10, &c1);
                let (p2, c4) = self.chain_adc(&p2, &l11, &c2);
                let (p3, _) = self.chain_adc(&h11, &zero, &c3);
                let (p3, _) = self.chain_adc(&p3, &zero, &c4);
                [p0, p1, p2, p3]
            }
            MulAlgo::Karatsuba => {
                let (h_ll, l_ll) = self.wmul(&a.lo, &b.lo);
                let (h_hh, l_hh) = self.wmul(&a.hi, &b.hi);

                let (sa, ca) = self.chain_adc(&a.hi, &a.lo, &z);
                let (sb, cb) = self.chain_adc(&b.hi, &b.lo, &z);
                let (h_m, l_m) = self.wmul(&sa, &sb);

                let m0 = l_m;
                let add_a = base.v_blend(&ca, &zero, &sb);
                let (m1, k1) = self.chain_adc(&h_m, &add_a, &z);
                let add_b = base.v_blend(&cb, &zero, &sa);
                let (m1, k2) = self.chain_adc(&m1, &add_b, &z);
                let (m2, _) = self.chain_adc(&zero, &zero, &k1);
                let (m2, _) = self.chain_adc(&m2, &zero, &k2);
                let (m2, _) = self.chain_adc(&m2, &zero, &ca.and(&cb));

                let (m0, bb1) = self.chain_sbb(&m0, &l_hh, &z);
                let (m1, bb2) = self.chain_sbb(&m1, &h_hh, &bb1);
                let (m2, _) = self.chain_sbb(&m2, &zero, &bb2);
                let (m0, bb3) = self.chain_sbb(&m0, &l_ll, &z);
                let (m1, bb4) = self.chain_sbb(&m1, &h_ll, &bb3);
                let (m2, _) = self.chain_sbb(&m2, &zero, &bb4);

                let p0 = l_ll;
                let (p1, cc1) = self.chain_adc(&h_ll, &m0, &z);
                let (p2, cc2) = self.chain_adc(&l_hh, &m1, &cc1);
                let (p3, _) = self.chain_adc(&h_hh, &m2, &cc2);
                [p0, p1, p2, p3]
            }
        }
    }

    pub fn label(&self) -> String {
        format!(
            "mqx[{},{},base={}]",
            self.mode.as_str(),
            self.variant.as_str(),
            self.base.name()
        )
    }
}

impl<B: LaneIsa> ModularVectorOps for MqxEngine<B> {
    fn lane_count(&self) -> usize {
        self.v()
    }

    fn label(&self) -> String {
        MqxEngine::label(self)
    }

    fn addmod_block(&self, m: &Modulus, a: &DWordVec, b: &DWordVec) -> DWordVec {
        self.addmod128(a, b, m)
    }

    fn submod_block(&self, m: &Modulus, a: &DWordVec, b: &DWordVec) -> DWordVec {
        self.submod128(a, b, m)
    }

    fn mulmod_block(&self, m: &Modulus, a: &DWordVec, b: &DWordVec, algo: MulAlgo) -> DWordVec {
        self.mulmod128(a, b, m, algo)
    }

    fn permute2_block(
        &self,
        idx: &WordVec,
        a: &WordVec,
        b: &WordVec,
    ) -> Result<WordVec, LaneError> {
        self.base.v_permute2(idx, a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dword::DWord;
    use crate::lane::Portable;
    use crate::modular::{addmod, mulmod, random_residue, submod, Modulus, Residue};
    use crate::trace::OpClass;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn engine(variant: MqxVariant) -> MqxEngine<Portable> {
        MqxEngine::new(
            Portable::with_lanes(8).unwrap(),
            MqxMode::Functional,
            variant,
        )
    }

    #[test]
    fn op_level_examples() {
        let e = engine(MqxVariant::Mc);
        let two32 = WordVec::splat(8, 1 << 32);
        let (hi, lo) = e.mqx_mul_wide(&two32, &two32);
        assert_eq!(hi, WordVec::splat(8, 1));
        assert_eq!(lo, WordVec::splat(8, 0));
        assert_eq!(e.mqx_mulhi(&two32, &two32), WordVec::splat(8, 1));
        assert_eq!(
            e.mqx_mulhi(&WordVec::splat(8, 0), &two32),
            WordVec::splat(8, 0)
        );

        let max = WordVec::splat(8, u64::MAX);
        let zero = WordVec::splat(8, 0);
        let (sum, co) = e.mqx_adc(&max, &zero, &LaneMask::all(8));
        assert_eq!(sum, zero);
        assert_eq!(co, LaneMask::all(8));

        let (diff, bo) = e.mqx_sbb(&zero, &zero, &LaneMask::all(8));
        assert_eq!(diff, max);
        assert_eq!(bo, LaneMask::all(8));
        let (diff, bo) = e.mqx_sbb(&max, &max, &LaneMask::none(8));
        assert_eq!(diff, zero);
        assert!(!bo.any());
    }

    #[test]
    fn ops_replay_scalar_words() {
        let e = engine(MqxVariant::Mc);
        let mut rng = StdRng::seed_from_u64(0xabcd);
        for _ in 0..5_000 {
            let a = WordVec::from_fn(8, |_| rng.random());
            let b = WordVec::from_fn(8, |_| rng.random());
            let ci = LaneMask::from_fn(8, |_| rng.random());
            let pred = LaneMask::from_fn(8, |_| rng.random());

            let (sum, co) = e.mqx_adc(&a, &b, &ci);
            let (diff, bo) = e.mqx_sbb(&a, &b, &ci);
            let (hi, lo) = e.mqx_mul_wide(&a, &b);
            let pa = e.mqx_adc_pred(&a, &b, &ci, &pred);
            let ps = e.mqx_sbb_pred(&a, &b, &ci, &pred);
            for i in 0..8 {
                let (es, ec) = adc_word(a.lane(i), b.lane(i), ci.bit(i));
                assert_eq!((sum.lane(i), co.bit(i)), (es, ec));
                let (ed, eb) = sbb_word(a.lane(i), b.lane(i), ci.bit(i));
                assert_eq!((diff.lane(i), bo.bit(i)), (ed, eb));
                let (eh, el) = mul_wide_word(a.lane(i), b.lane(i));
                assert_eq!((hi.lane(i), lo.lane(i)), (eh, el));
                assert_eq!(pa.lane(i), if pred.bit(i) { es } else { a.lane(i) });
                assert_eq!(ps.lane(i), if pred.bit(i) { ed } else { a.lane(i) });
            }
        }
    }

    #[test]
    fn adc_with_clear_carry_is_plain_add_with_compare_carry() {
        let e = engine(MqxVariant::Mc);
        let mut rng = StdRng::seed_from_u64(0x33);
        for _ in 0..2_000 {
            let a = WordVec::from_fn(8, |_| rng.random());
            let b = WordVec::from_fn(8, |_| rng.random());
            let (sum, co) = e.mqx_adc(&a, &b, &LaneMask::none(8));
            for i in 0..8 {
                let plain = a.lane(i).wrapping_add(b.lane(i));
                assert_eq!(sum.lane(i), plain);
                assert_eq!(co.bit(i), plain < a.lane(i));
            }
        }
    }

    #[test]
    fn pred_ops_identity_edges() {
        let e = engine(MqxVariant::Mcp);
        let a = WordVec::from_fn(8, |i| i as u64 * 3);
        let b = WordVec::splat(8, 11);
        let z = LaneMask::none(8);
        assert_eq!(e.mqx_adc_pred(&a, &b, &z, &LaneMask::none(8)), a);
        let all = e.mqx_adc_pred(&a, &b, &z, &LaneMask::all(8));
        for i in 0..8 {
            assert_eq!(all.lane(i), a.lane(i) + 11);
        }
    }

    #[test]
    fn sequences_replay_scalar_modular_ops() {
        let mut rng = StdRng::seed_from_u64(0x7878);
        for m in crate::kernels::primes::ladder() {
            for variant in [
                MqxVariant::Base,
                MqxVariant::M,
                MqxVariant::C,
                MqxVariant::Mc,
                MqxVariant::MhC,
                MqxVariant::Mcp,
            ] {
                let e = engine(variant);
                for _ in 0..300 {
                    let ar: Vec<Residue> = (0..8).map(|_| random_residue(&mut rng, &m)).collect();
                    let br: Vec<Residue> = (0..8).map(|_| random_residue(&mut rng, &m)).collect();
                    let av =
                        DWordVec::from_dwords(&ar.iter().map(|r| r.value()).collect::<Vec<_>>());
                    let bv =
                        DWordVec::from_dwords(&br.iter().map(|r| r.value()).collect::<Vec<_>>());
                    let add = e.addmod128(&av, &bv, &m);
                    let sub = e.submod128(&av, &bv, &m);
                    let mul_s = e.mulmod128(&av, &bv, &m, MulAlgo::Schoolbook);
                    let mul_k = e.mulmod128(&av, &bv, &m, MulAlgo::Karatsuba);
                    for i in 0..8 {
                        assert_eq!(add.lane(i), addmod(ar[i], br[i], &m).value(), "{variant:?}");
                        assert_eq!(sub.lane(i), submod(ar[i], br[i], &m).value(), "{variant:?}");
                        assert_eq!(
                            mul_s.lane(i),
                            mulmod(ar[i], br[i], &m, MulAlgo::Schoolbook).value(),
                            "{variant:?}"
                        );
                        assert_eq!(
                            mul_k.lane(i),
                            mulmod(ar[i], br[i], &m, MulAlgo::Karatsuba).value(),
                            "{variant:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn addmod_wraps_exactly_at_q() {
        for m in crate::kernels::primes::ladder() {
            let e = engine(MqxVariant::Mc);
            let qm1 = submod(Residue::ZERO, Residue::one(&m), &m);
            let a = DWordVec::splat(8, qm1.value());
            let one = DWordVec::splat(8, DWord::ONE);
            let out = e.addmod128(&a, &one, &m);
            for i in 0..8 {
                assert!(out.lane(i).is_zero());
            }
        }
    }

    #[test]
    fn addmod_issues_seven_lane_ops() {
        let (e, handle) = MqxEngine::traced(
            Portable::with_lanes(8).unwrap(),
            MqxMode::Functional,
            MqxVariant::Mc,
        );
        let m = Modulus::from_u128(crate::kernels::primes::ladder()[2].q().to_u128()).unwrap();
        let a = DWordVec::splat(8, DWord::from_u64(5));
        let b = DWordVec::splat(8, DWord::from_u64(6));
        let _ = e.addmod128(&a, &b, &m);
        let t = handle.snapshot();
        assert_eq!(t.len(), 7);
        assert_eq!(t.count_kind(OpKind::Adc), 2);
        assert_eq!(t.count_kind(OpKind::Sbb), 2);
        assert_eq!(t.count_kind(OpKind::CmpSigned), 1);
        assert_eq!(t.count_kind(OpKind::Blend), 2);
    }

    #[test]
    fn proxy_trace_preserves_class_counts() {
        let m = Modulus::from_u128(crate::kernels::primes::ladder()[3].q().to_u128()).unwrap();
        let a = DWordVec::splat(8, DWord::from_u64(123456789));
        let b = DWordVec::splat(8, DWord::from_u64(987654321));
        for variant in [
            MqxVariant::M,
            MqxVariant::C,
            MqxVariant::Mc,
            MqxVariant::MhC,
            MqxVariant::Mcp,
        ] {
            let run = |mode: MqxMode| {
                let (e, t) = MqxEngine::traced(Portable::with_lanes(8).unwrap(), mode, variant);
                let _ = e.addmod128(&a, &b, &m);
                let _ = e.submod128(&a, &b, &m);
                let _ = e.mulmod128(&a, &b, &m, MulAlgo::Schoolbook);
                t.snapshot()
            };
            let f = run(MqxMode::Functional);
            let p = run(MqxMode::PisaProxy);
            assert_eq!(f.len(), p.len(), "{variant:?}");
            assert_eq!(f.class_histogram(), p.class_histogram(), "{variant:?}");
        }
    }

    #[test]
    fn variant_gating_controls_emitted_ops() {
        let m = Modulus::from_u128(crate::kernels::primes::ladder()[0].q().to_u128()).unwrap();
        let a = DWordVec::splat(8, DWord::from_u64(1 << 40));
        let b = DWordVec::splat(8, DWord::from_u64((1 << 41) + 7));
        let run = |variant: MqxVariant| {
            let (e, t) = MqxEngine::traced(
                Portable::with_lanes(8).unwrap(),
                MqxMode::Functional,
                variant,
            );
            let _ = e.addmod128(&a, &b, &m);
            let _ = e.submod128(&a, &b, &m);
            let _ = e.mulmod128(&a, &b, &m, MulAlgo::Schoolbook);
            t.snapshot()
        };

        let c = run(MqxVariant::C);
        assert!(!c.contains_kind(OpKind::MulWideLo) && !c.contains_kind(OpKind::MulWideHi));
        assert!(c.contains_kind(OpKind::Adc));

        let m_only = run(MqxVariant::M);
        assert!(!m_only.contains_kind(OpKind::Adc) && !m_only.contains_kind(OpKind::Sbb));
        assert!(m_only.contains_kind(OpKind::MulWideLo));

        let mhc = run(MqxVariant::MhC);
        assert!(!mhc.contains_kind(OpKind::MulWideLo));
        assert!(mhc.contains_kind(OpKind::MulHi));
        // Every widening multiply shows up as a (mul-low, mul-high) pair.
        let kinds = mhc.ops();
        for (i, k) in kinds.iter().enumerate() {
            if *k == OpKind::MulHi {
                assert_eq!(
                    kinds[i - 1],
                    OpKind::Mullo,
                    "multiply-high not paired at {i}"
                );
            }
        }

        let mcp = run(MqxVariant::Mcp);
        assert!(mcp.contains_kind(OpKind::SbbPred));
        assert!(mcp.contains_kind(OpKind::AdcPred));
        let mc = run(MqxVariant::Mc);
        assert!(!mc.contains_kind(OpKind::SbbPred) && !mc.contains_kind(OpKind::AdcPred));
    }

    #[test]
    fn proxy_results_are_marked_not_meaningful() {
        // Proxy mode must produce deterministic but wrong results on
        // non-trivial inputs; it is a timing shape, not arithmetic.
        let m = Modulus::from_u128(crate::kernels::primes::ladder()[0].q().to_u128()).unwrap();
        let p = MqxEngine::new(
            Portable::with_lanes(8).unwrap(),
            MqxMode::PisaProxy,
            MqxVariant::Mc,
        );
        let f = engine(MqxVariant::Mc);
        let mut rng = StdRng::seed_from_u64(9);
        let ar: Vec<Residue> = (0..8).map(|_| random_residue(&mut rng, &m)).collect();
        let br: Vec<Residue> = (0..8).map(|_| random_residue(&mut rng, &m)).collect();
        let av = DWordVec::from_dwords(&ar.iter().map(|r| r.value()).collect::<Vec<_>>());
        let bv = DWordVec::from_dwords(&br.iter().map(|r| r.value()).collect::<Vec<_>>());
        let garbage = p.mulmod128(&av, &bv, &m, MulAlgo::Schoolbook);
        let exact = f.mulmod128(&av, &bv, &m, MulAlgo::Schoolbook);
        assert_ne!(garbage, exact);
        // Deterministic garbage: same inputs, same stream.
        assert_eq!(garbage, p.mulmod128(&av, &bv, &m, MulAlgo::Schoolbook));
    }

    #[test]
    fn mul_wide_records_one_op_per_output() {
        let (e, t) = MqxEngine::traced(
            Portable::with_lanes(8).unwrap(),
            MqxMode::Functional,
            MqxVariant::Mc,
        );
        let a = WordVec::splat(8, 3);
        let _ = e.mqx_mul_wide(&a, &a);
        let snap = t.snapshot();
        assert_eq!(snap.len(), 2);
        assert_eq!(snap.count_class(OpClass::Mul), 2);
    }
}

//! Lane-op trace instrumentation.
//!
//! A trace records the sequence of vector operations a computation issues,
//! one entry per operation that reads or writes full V-lane registers.
//! Mask-register logic (or/and/not on lane masks) and constant splats are
//! not lane-ops and are never recorded; a widening multiply records one
//! entry per output vector. Recording is per-invocation: callers create a
//! handle, wire it into an instrumented backend, and read it back — there
//! is no global state.

use std::cell::RefCell;
use std::rc::Rc;

use crate::lane::{CmpRel, LaneError, LaneIsa, LaneMask, WordVec};

/// Every lane-op the backends and the MQX extension can issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Add,
    Sub,
    Mullo,
    MulEven32,
    Shl,
    Shr,
    And,
    Or,
    Cmp,
    CmpSigned,
    Blend,
    MaskAdd,
    MaskSub,
    UnpackLo,
    UnpackHi,
    Permute2,
    // MQX extension ops.
    Adc,
    Sbb,
    MulWideLo,
    MulWideHi,
    MulHi,
    AdcPred,
    SbbPred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpClass {
    Add,
    Sub,
    Mul,
    Cmp,
    Blend,
    Perm,
    Shift,
    Logic,
}

pub const OP_CLASSES: [OpClass; 8] = [
    OpClass::Add,
    OpClass::Sub,
    OpClass::Mul,
    OpClass::Cmp,
    OpClass::Blend,
    OpClass::Perm,
    OpClass::Shift,
    OpClass::Logic,
];

impl OpKind {
    pub fn class(self) -> OpClass {
        match self {
            OpKind::Add | OpKind::MaskAdd | OpKind::Adc | OpKind::AdcPred => OpClass::Add,
            OpKind::Sub | OpKind::MaskSub | OpKind::Sbb | OpKind::SbbPred => OpClass::Sub,
            OpKind::Mullo
            | OpKind::MulEven32
            | OpKind::MulWideLo
            | OpKind::MulWideHi
            | OpKind::MulHi => OpClass::Mul,
            OpKind::Cmp | OpKind::CmpSigned => OpClass::Cmp,
            OpKind::Blend => OpClass::Blend,
            OpKind::UnpackLo | OpKind::UnpackHi | OpKind::Permute2 => OpClass::Perm,
            OpKind::Shl | OpKind::Shr => OpClass::Shift,
            OpKind::And | OpKind::Or => OpClass::Logic,
        }
    }
}

/// An ordered record of issued lane-ops.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Trace {
    ops: Vec<OpKind>,
}

impl Trace {
    pub fn ops(&self) -> &[OpKind] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn count_kind(&self, kind: OpKind) -> usize {
        self.ops.iter().filter(|&&k| k == kind).count()
    }

    pub fn count_class(&self, class: OpClass) -> usize {
        self.ops.iter().filter(|&&k| k.class() == class).count()
    }

    /// Per-class counts in `OP_CLASSES` order.
    pub fn class_histogram(&self) -> [usize; 8] {
        let mut h = [0usize; 8];
        for op in &self.ops {
            let i = OP_CLASSES.iter().position(|&c| c == op.class()).unwrap();
            h[i] += 1;
        }
        h
    }

    pub fn contains_kind(&self, kind: OpKind) -> bool {
        self.ops.iter().any(|&k| k == kind)
    }

    pub fn clear(&mut self) {
        self.ops.clear();
    }
}

/// Shared per-invocation trace buffer.
#[derive(Debug, Clone, Default)]
pub struct TraceHandle(Rc<RefCell<Trace>>);

impl TraceHandle {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn record(&self, kind: OpKind) {
        self.0.borrow_mut().ops.push(kind);
    }

    pub fn snapshot(&self) -> Trace {
        self.0.borrow().clone()
    }

    pub fn len(&self) -> usize {
        self.0.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.borrow().is_empty()
    }

    pub fn clear(&self) {
        self.0.borrow_mut().clear();
    }
}

/// A backend wrapper that records every primitive it forwards.
#[derive(Debug, Clone)]
pub struct Recorded<B> {
    inner: B,
    trace: TraceHandle,
}

impl<B: LaneIsa> Recorded<B> {
    pub fn new(inner: B, trace: TraceHandle) -> Self {
        Recorded { inner, trace }
    }

    pub fn trace(&self) -> &TraceHandle {
        &self.trace
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: LaneIsa> LaneIsa for Recorded<B> {
    fn lane_count(&self) -> usize {
        self.inner.lane_count()
    }

    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn v_add(&self, a: &WordVec, b: &WordVec) -> WordVec {
        self.trace.record(OpKind::Add);
        self.inner.v_add(a, b)
    }

    fn v_sub(&self, a: &WordVec, b: &WordVec) -> WordVec {
        self.trace.record(OpKind::Sub);
        self.inner.v_sub(a, b)
    }

    fn v_mullo(&self, a: &WordVec, b: &WordVec) -> WordVec {
        self.trace.record(OpKind::Mullo);
        self.inner.v_mullo(a, b)
    }

    fn v_mul_even32(&self, a: &WordVec, b: &WordVec) -> WordVec {
        self.trace.record(OpKind::MulEven32);
        self.inner.v_mul_even32(a, b)
    }

    fn v_shl(&self, a: &WordVec, k: u32) -> WordVec {
        self.trace.record(OpKind::Shl);
        self.inner.v_shl(a, k)
    }

    fn v_shr(&self, a: &WordVec, k: u32) -> WordVec {
        self.trace.record(OpKind::Shr);
        self.inner.v_shr(a, k)
    }

    fn v_and(&self, a: &WordVec, b: &WordVec) -> WordVec {
        self.trace.record(OpKind::And);
        self.inner.v_and(a, b)
    }

    fn v_or(&self, a: &WordVec, b: &WordVec) -> WordVec {
        self.trace.record(OpKind::Or);
        self.inner.v_or(a, b)
    }

    fn v_cmp(&self, a: &WordVec, b: &WordVec, rel: CmpRel) -> LaneMask {
        self.trace.record(OpKind::Cmp);
        self.inner.v_cmp(a, b, rel)
    }

    fn v_cmp_gt_signed(&self, a: &WordVec, b: &WordVec) -> LaneMask {
        self.trace.record(OpKind::CmpSigned);
        self.inner.v_cmp_gt_signed(a, b)
    }

    fn v_blend(&self, mask: &LaneMask, a: &WordVec, b: &WordVec) -> WordVec {
        self.trace.record(OpKind::Blend);
        self.inner.v_blend(mask, a, b)
    }

    fn v_mask_add(&self, src: &WordVec, mask: &LaneMask, a: &WordVec, b: &WordVec) -> WordVec {
        self.trace.record(OpKind::MaskAdd);
        self.inner.v_mask_add(src, mask, a, b)
    }

    fn v_mask_sub(&self, src: &WordVec, mask: &LaneMask, a: &WordVec, b: &WordVec) -> WordVec {
        self.trace.record(OpKind::MaskSub);
        self.inner.v_mask_sub(src, mask, a, b)
    }

    fn v_unpack_lo(&self, a: &WordVec, b: &WordVec) -> WordVec {
        self.trace.record(OpKind::UnpackLo);
        self.inner.v_unpack_lo(a, b)
    }

    fn v_unpack_hi(&self, a: &WordVec, b: &WordVec) -> WordVec {
        self.trace.record(OpKind::UnpackHi);
        self.inner.v_unpack_hi(a, b)
    }

    fn v_permute2(&self, idx: &WordVec, a: &WordVec, b: &WordVec) -> Result<WordVec, LaneError> {
        self.trace.record(OpKind::Permute2);
        self.inner.v_permute2(idx, a, b)
    }

    fn mask_ops_native(&self) -> bool {
        self.inner.mask_ops_native()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lane::Portable;
    use crate::lane::{algo, DWordVec};
    use crate::modular::Modulus;

    #[test]
    fn vector_addmod_issues_seventeen_lane_ops() {
        let handle = TraceHandle::new();
        let b = Recorded::new(Portable::with_lanes(8).unwrap(), handle.clone());
        let m = Modulus::from_u128((1 << 100) + 0x4_60001).unwrap();
        let a = DWordVec::splat(8, crate::dword::DWord::from_u64(7));
        let c = DWordVec::splat(8, crate::dword::DWord::from_u64(9));
        let _ = algo::v_addmod(&b, &a, &c, &m);
        let t = handle.snapshot();
        assert_eq!(t.len(), 17);
        assert_eq!(t.count_class(OpClass::Add), 3);
        assert_eq!(t.count_class(OpClass::Sub), 3);
        assert_eq!(t.count_class(OpClass::Cmp), 7);
        assert_eq!(t.count_class(OpClass::Blend), 4);
    }

    #[test]
    fn splats_and_mask_logic_are_not_lane_ops() {
        let handle = TraceHandle::new();
        let b = Recorded::new(Portable::with_lanes(4).unwrap(), handle.clone());
        let _ = b.splat(1);
        let m = LaneMask::all(4);
        let _ = m.or(&m.not());
        assert!(handle.is_empty());
    }
}

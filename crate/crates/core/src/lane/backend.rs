//! Runtime backend selection.

#[cfg(target_arch = "x86_64")]
use super::{Avx2, Avx512};
use super::{CmpRel, LaneConfig, LaneError, LaneIsa, LaneMask, Portable, WordVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Portable,
    Native256,
    Native512,
}

impl BackendKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BackendKind::Portable => "portable",
            BackendKind::Native256 => "native-256",
            BackendKind::Native512 => "native-512",
        }
    }
}

impl std::str::FromStr for BackendKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "portable" => Ok(BackendKind::Portable),
            "native-256" => Ok(BackendKind::Native256),
            "native-512" => Ok(BackendKind::Native512),
            other => Err(format!(
                "unknown backend '{other}' (expected portable, native-256, native-512, or mqx)"
            )),
        }
    }
}

/// A selected lane backend. Dispatch happens per primitive call; the
/// variants are concrete so kernels can also monomorphize over one of them.
#[derive(Debug, Clone, Copy)]
pub enum LaneBackend {
    Portable(Portable),
    #[cfg(target_arch = "x86_64")]
    Avx2(Avx2),
    #[cfg(target_arch = "x86_64")]
    Avx512(Avx512),
}

#[cfg(not(target_arch = "x86_64"))]
fn non_x86(kind: BackendKind) -> LaneError {
    LaneError::UnsupportedBackend {
        backend: kind.as_str().into(),
        missing: "x86_64".into(),
    }
}

/// Resolves a backend, verifying CPU support for the native ones. `lanes`
/// applies only to the portable backend (default 8); native widths are
/// fixed by their register size.
pub fn backend_select(kind: BackendKind, lanes: Option<usize>) -> Result<LaneBackend, LaneError> {
    match kind {
        BackendKind::Portable => {
            let config = match lanes {
                Some(v) => LaneConfig::new(v)?,
                None => LaneConfig::default(),
            };
            Ok(LaneBackend::Portable(Portable::new(config)))
        }
        #[cfg(target_arch = "x86_64")]
        BackendKind::Native256 => Ok(LaneBackend::Avx2(Avx2::new()?)),
        #[cfg(target_arch = "x86_64")]
        BackendKind::Native512 => Ok(LaneBackend::Avx512(Avx512::new()?)),
        #[cfg(not(target_arch = "x86_64"))]
        other => Err(non_x86(other)),
    }
}

/// The backends this host can actually run.
pub fn available_backends() -> Vec<BackendKind> {
    let mut out = vec![BackendKind::Portable];
    #[cfg(target_arch = "x86_64")]
    {
        if Avx2::new().is_ok() {
            out.push(BackendKind::Native256);
        }
        if Avx512::new().is_ok() {
            out.push(BackendKind::Native512);
        }
    }
    out
}

macro_rules! delegate {
    ($self:ident, $b:ident => $e:expr) => {
        match $self {
            LaneBackend::Portable($b) => $e,
            #[cfg(target_arch = "x86_64")]
            LaneBackend::Avx2($b) => $e,
            #[cfg(target_arch = "x86_64")]
            LaneBackend::Avx512($b) => $e,
        }
    };
}

impl LaneIsa for LaneBackend {
    fn lane_count(&self) -> usize {
        delegate!(self, b => b.lane_count())
    }

    fn name(&self) -> &'static str {
        delegate!(self, b => b.name())
    }

    fn v_add(&self, a: &WordVec, bb: &WordVec) -> WordVec {
        delegate!(self, b => b.v_add(a, bb))
    }

    fn v_sub(&self, a: &WordVec, bb: &WordVec) -> WordVec {
        delegate!(self, b => b.v_sub(a, bb))
    }

    fn v_mullo(&self, a: &WordVec, bb: &WordVec) -> WordVec {
        delegate!(self, b => b.v_mullo(a, bb))
    }

    fn v_mul_even32(&self, a: &WordVec, bb: &WordVec) -> WordVec {
        delegate!(self, b => b.v_mul_even32(a, bb))
    }

    fn v_shl(&self, a: &WordVec, k: u32) -> WordVec {
        delegate!(self, b => b.v_shl(a, k))
    }

    fn v_shr(&self, a: &WordVec, k: u32) -> WordVec {
        delegate!(self, b => b.v_shr(a, k))
    }

    fn v_and(&self, a: &WordVec, bb: &WordVec) -> WordVec {
        delegate!(self, b => b.v_and(a, bb))
    }

    fn v_or(&self, a: &WordVec, bb: &WordVec) -> WordVec {
        delegate!(self, b => b.v_or(a, bb))
    }

    fn v_cmp(&self, a: &WordVec, bb: &WordVec, rel: CmpRel) -> LaneMask {
        delegate!(self, b => b.v_cmp(a, bb, rel))
    }

    fn v_cmp_gt_signed(&self, a: &WordVec, bb: &WordVec) -> LaneMask {
        delegate!(self, b => b.v_cmp_gt_signed(a, bb))
    }

    fn v_blend(&self, mask: &LaneMask, a: &WordVec, bb: &WordVec) -> WordVec {
        delegate!(self, b => b.v_blend(mask, a, bb))
    }

    fn v_mask_add(&self, src: &WordVec, mask: &LaneMask, a: &WordVec, bb: &WordVec) -> WordVec {
        delegate!(self, b => b.v_mask_add(src, mask, a, bb))
    }

    fn v_mask_sub(&self, src: &WordVec, mask: &LaneMask, a: &WordVec, bb: &WordVec) -> WordVec {
        delegate!(self, b => b.v_mask_sub(src, mask, a, bb))
    }

    fn v_unpack_lo(&self, a: &WordVec, bb: &WordVec) -> WordVec {
        delegate!(self, b => b.v_unpack_lo(a, bb))
    }

    fn v_unpack_hi(&self, a: &WordVec, bb: &WordVec) -> WordVec {
        delegate!(self, b => b.v_unpack_hi(a, bb))
    }

    fn v_permute2(&self, idx: &WordVec, a: &WordVec, bb: &WordVec) -> Result<WordVec, LaneError> {
        delegate!(self, b => b.v_permute2(idx, a, bb))
    }

    fn mask_ops_native(&self) -> bool {
        delegate!(self, b => b.mask_ops_native())
    }
}

//! Block-level execution engines.
//!
//! Kernels are written against [`ModularVectorOps`]: one V-lane block of
//! modular adds, subs, or Barrett multiplies per call, plus the two-source
//! permute used for inter-stage data movement. The lane engines run the
//! composite mask-dataflow algorithms; the MQX engine substitutes its
//! extension sequences.

use crate::lane::{
    algo, backend_select, BackendKind, DWordVec, LaneBackend, LaneError, LaneIsa, WordVec,
};
use crate::modular::{Modulus, MulAlgo};
use crate::mqx::{MqxEngine, MqxMode, MqxVariant};

pub trait ModularVectorOps {
    fn lane_count(&self) -> usize;
    fn label(&self) -> String;
    fn addmod_block(&self, m: &Modulus, a: &DWordVec, b: &DWordVec) -> DWordVec;
    fn submod_block(&self, m: &Modulus, a: &DWordVec, b: &DWordVec) -> DWordVec;
    fn mulmod_block(&self, m: &Modulus, a: &DWordVec, b: &DWordVec, algo: MulAlgo) -> DWordVec;
    fn permute2_block(&self, idx: &WordVec, a: &WordVec, b: &WordVec)
        -> Result<WordVec, LaneError>;
}

/// Composite modular arithmetic over a plain lane backend.
#[derive(Debug, Clone)]
pub struct LaneKernel<B: LaneIsa> {
    base: B,
}

impl<B: LaneIsa> LaneKernel<B> {
    pub fn new(base: B) -> Self {
        LaneKernel { base }
    }

    pub fn base(&self) -> &B {
        &self.base
    }
}

impl<B: LaneIsa> ModularVectorOps for LaneKernel<B> {
    fn lane_count(&self) -> usize {
        self.base.lane_count()
    }

    fn label(&self) -> String {
        self.base.name().to_string()
    }

    fn addmod_block(&self, m: &Modulus, a: &DWordVec, b: &DWordVec) -> DWordVec {
        algo::v_addmod(&self.base, a, b, m)
    }

    fn submod_block(&self, m: &Modulus, a: &DWordVec, b: &DWordVec) -> DWordVec {
        algo::v_submod(&self.base, a, b, m)
    }

    fn mulmod_block(&self, m: &Modulus, a: &DWordVec, b: &DWordVec, algo: MulAlgo) -> DWordVec {
        algo::v_mulmod(&self.base, a, b, m, algo)
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

/// How an engine's timings should be read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineInfo {
    pub label: String,
    pub lane_count: usize,
    /// Present when the engine's timings do not represent the modeled
    /// hardware (functional emulation, or proxies without native mask ops).
    pub timing_note: Option<String>,
}

/// The backend surface exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecBackend {
    Lane(BackendKind),
    Mqx,
}

impl std::str::FromStr for ExecBackend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "mqx" {
            return Ok(ExecBackend::Mqx);
        }
        s.parse::<BackendKind>().map(ExecBackend::Lane)
    }
}

impl ExecBackend {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExecBackend::Lane(k) => k.as_str(),
            ExecBackend::Mqx => "mqx",
        }
    }
}

/// Builds the engine for a backend/variant combination.
///
/// A non-`Base` variant layers the extension sequences over the chosen lane
/// backend; `mqx` alone picks the widest available base. Proxy timings are
/// only representative on a base with native mask operations, and the
/// returned note says so when they are not.
pub fn build_engine(
    backend: ExecBackend,
    lanes: Option<usize>,
    mode: MqxMode,
    variant: MqxVariant,
) -> Result<(Box<dyn ModularVectorOps>, EngineInfo), LaneError> {
    let base = match backend {
        ExecBackend::Lane(kind) => backend_select(kind, lanes)?,
        ExecBackend::Mqx => backend_select(BackendKind::Native512, None)
            .or_else(|_| backend_select(BackendKind::Portable, lanes))?,
    };
    let use_mqx = matches!(backend, ExecBackend::Mqx) || variant != MqxVariant::Base;
    if !use_mqx {
        let info = EngineInfo {
            label: base.name().to_string(),
            lane_count: base.lane_count(),
            timing_note: None,
        };
        return Ok((Box::new(LaneKernel::new(base)), info));
    }

    let timing_note = match mode {
        MqxMode::Functional => Some("functional emulation, not timing-representative".to_string()),
        MqxMode::PisaProxy if !base.mask_ops_native() => {
            Some("portable-emulated, non-representative".to_string())
        }
        MqxMode::PisaProxy => None,
    };
    let engine = MqxEngine::new(base, mode, variant);
    let info = EngineInfo {
        label: engine.label(),
        lane_count: engine.lane_count(),
        timing_note,
    };
    Ok((Box::new(engine), info))
}

/// Lane engines over every backend this host supports, portable first.
pub fn all_lane_engines() -> Vec<LaneKernel<LaneBackend>> {
    crate::lane::available_backends()
        .into_iter()
        .map(|kind| LaneKernel::new(backend_select(kind, None).expect("reported available")))
        .collect()
}

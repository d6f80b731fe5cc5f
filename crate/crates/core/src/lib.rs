//! 128-bit double-word modular arithmetic, lane-parallel vector kernels,
//! and the number theoretic transform over pluggable execution backends:
//! a portable per-lane reference, 256-bit and 512-bit native vector ISAs,
//! and an emulated multi-word vector extension with proxy-timing support.
//!
//! Layering, bottom up:
//!
//! * [`dword`] — word-level carry/borrow/widening arithmetic and exact
//!   128/256/384-bit operations built only from 64-bit words.
//! * [`modular`] — residues and Barrett-reduced modular arithmetic for
//!   moduli up to 124 bits.
//! * [`lane`] — split hi/lo lane blocks, the backend primitive vocabulary,
//!   and the branch-free composite modular operations.
//! * [`mqx`] — the emulated vector extension (widening multiply, add with
//!   carry, subtract with borrow), its sensitivity variants, and the
//!   proxy-timing mode.
//! * [`kernels`] — BLAS-style point-wise operations and the
//!   constant-geometry number theoretic transform.
//! * [`conformance`] — oracle and differential suites shared by the test
//!   targets and the benchmark CLI's `verify` subcommand.

pub mod conformance;
pub mod dword;
pub mod engine;
pub mod kernels;
pub mod lane;
pub mod modular;
pub mod mqx;
pub mod trace;

pub use dword::{DWord, Wide2, Wide4, Wide6};
pub use engine::{build_engine, EngineInfo, ExecBackend, LaneKernel, ModularVectorOps};
pub use kernels::{NttPlan, Polynomial};
pub use modular::{Modulus, MulAlgo, Residue};
pub use mqx::{MqxEngine, MqxMode, MqxVariant};

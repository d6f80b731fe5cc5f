//! The measurement harness.
//!
//! Protocol: every configuration runs `iterations` total passes of the
//! kernel; the first `warmup` passes warm the cache and are untimed, the
//! remaining passes are timed as one batch on the monotonic clock and the
//! batch time is divided by the pass count. Per-pass timing is deliberately
//! avoided: the point-wise kernels at the default length are sub-microsecond
//! and timer overhead would dominate. Defaults are 100 total / 50 warmup for
//! transforms and 1000 / 500 for the point-wise kernels, with the point-wise
//! vector length defaulting to 1024; overrides are echoed in every record.
//!
//! Operand buffers are generated from a fixed seed, loads and stores of the
//! operand buffers happen inside the timed region, and a checksum of every
//! output is folded and reported, which both defeats dead-code elimination
//! and makes reruns with one seed comparable. The measurement loop is
//! single-threaded and pinned to one core when the OS allows it; the record
//! notes whether pinning took effect.

use crate::records::BenchRecord;
use dwmod::engine::{build_engine, EngineInfo, ExecBackend};
use dwmod::kernels::primes::{prime_for_bits, PlanError};
use dwmod::kernels::{
    blas_axpy, blas_vadd, blas_vpmul, blas_vsub, butterfly_count, KernelError, NttPlan, Polynomial,
};
use dwmod::lane::LaneError;
use dwmod::modular::{random_residue, Modulus, MulAlgo};
use dwmod::mqx::{MqxMode, MqxVariant};
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::hint::black_box;
use std::time::Instant;
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 0x5eed;
pub const DEFAULT_BLAS_LEN: usize = 1024;
pub const DEFAULT_MODULUS_BITS: u32 = 124;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Backend(#[from] LaneError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("no shipped prime with {0} bits (choose 60, 100, 120, or 124)")]
    NoPrime(u32),
    #[error("size {size} is not usable for kernel {kernel}: {reason}")]
    BadSize {
        kernel: &'static str,
        size: usize,
        reason: String,
    },
    #[error("warmup {warmup} must be below total iterations {iterations}")]
    BadProtocol { iterations: u32, warmup: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Ntt,
    Vadd,
    Vsub,
    Vpmul,
    Axpy,
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Ntt => "ntt",
            Kernel::Vadd => "vadd",
            Kernel::Vsub => "vsub",
            Kernel::Vpmul => "vpmul",
            Kernel::Axpy => "axpy",
        }
    }

    pub fn is_transform(&self) -> bool {
        matches!(self, Kernel::Ntt)
    }

    /// (total runs, warmup runs) for this kernel's default protocol.
    pub fn default_protocol(&self) -> (u32, u32) {
        if self.is_transform() {
            (100, 50)
        } else {
            (1000, 500)
        }
    }

    pub fn default_sizes(&self) -> Vec<usize> {
        if self.is_transform() {
            (10..=16).map(|l| 1usize << l).collect()
        } else {
            vec![DEFAULT_BLAS_LEN]
        }
    }

    /// Per-record normalization: butterflies for transforms, elements for
    /// point-wise kernels.
    pub fn unit(&self) -> &'static str {
        if self.is_transform() {
            "butterfly"
        } else {
            "element"
        }
    }

    pub fn unit_count(&self, n: usize) -> u64 {
        if self.is_transform() {
            butterfly_count(n)
        } else {
            n as u64
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ntt" => Ok(Kernel::Ntt),
            "vadd" => Ok(Kernel::Vadd),
            "vsub" => Ok(Kernel::Vsub),
            "vpmul" => Ok(Kernel::Vpmul),
            "axpy" => Ok(Kernel::Axpy),
            other => Err(format!(
                "unknown kernel '{other}' (ntt, vadd, vsub, vpmul, axpy)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub kernel: Kernel,
    pub sizes: Vec<usize>,
    pub backend: ExecBackend,
    pub lanes: Option<usize>,
    pub mode: MqxMode,
    pub variant: MqxVariant,
    pub algo: MulAlgo,
    pub modulus_bits: u32,
    pub iterations: u32,
    pub warmup: u32,
    pub seed: u64,
}

impl BenchSpec {
    /// A spec with the documented protocol defaults filled in; explicit
    /// iteration overrides are carried into the records as-is.
    pub fn new(kernel: Kernel, backend: ExecBackend) -> Self {
        let (iterations, warmup) = kernel.default_protocol();
        BenchSpec {
            kernel,
            sizes: kernel.default_sizes(),
            backend,
            lanes: None,
            mode: MqxMode::Functional,
            variant: MqxVariant::Base,
            algo: MulAlgo::Schoolbook,
            modulus_bits: DEFAULT_MODULUS_BITS,
            iterations,
            warmup,
            seed: DEFAULT_SEED,
        }
    }
}

#[cfg(target_os = "linux")]
fn pin_to_core(core: usize) -> bool {
    unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_ZERO(&mut set);
        libc::CPU_SET(core, &mut set);
        libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) == 0
    }
}

#[cfg(not(target_os = "linux"))]
fn pin_to_core(_core: usize) -> bool {
    false
}

fn host_descriptor(info: &EngineInfo, pinned: bool) -> String {
    let backends: Vec<&str> = dwmod::lane::available_backends()
        .into_iter()
        .map(|k| k.as_str())
        .collect();
    let mut host = format!(
        "os={};arch={};engine={};backends={};pinned={}",
        std::env::consts::OS,
        std::env::consts::ARCH,
        info.label,
        backends.join("+"),
        if pinned { "yes" } else { "no" }
    );
    if let Some(note) = &info.timing_note {
        host.push_str(";note=");
        host.push_str(note);
    }
    host
}

fn fold_checksum(acc: u64, p: &Polynomial) -> u64 {
    let mut h = acc;
    for i in 0..p.len() {
        let c = p.coeff(i);
        h = h
            .rotate_left(7)
            .wrapping_add(c.hi)
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            ^ c.lo;
    }
    h
}

fn validate_size(kernel: Kernel, size: usize, lanes: usize) -> Result<(), HarnessError> {
    if kernel.is_transform() {
        if size < 2 || !size.is_power_of_two() {
            return Err(HarnessError::BadSize {
                kernel: kernel.name(),
                size,
                reason: "transform sizes must be powers of two".into(),
            });
        }
    } else if size % lanes != 0 {
        return Err(HarnessError::BadSize {
            kernel: kernel.name(),
            size,
            reason: format!("length must be a multiple of the {lanes}-lane block"),
        });
    }
    Ok(())
}

/// Runs one spec and returns a record per size.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRecord>, HarnessError> {
    if spec.warmup >= spec.iterations {
        return Err(HarnessError::BadProtocol {
            iterations: spec.iterations,
            warmup: spec.warmup,
        });
    }
    let q = prime_for_bits(spec.modulus_bits).ok_or(HarnessError::NoPrime(spec.modulus_bits))?;
    let m = Modulus::from_u128(q).expect("shipped primes are in range");
    let (engine, info) = build_engine(spec.backend, spec.lanes, spec.mode, spec.variant)?;
    let pinned = pin_to_core(0);
    let host = host_descriptor(&info, pinned);
    if let Some(note) = &info.timing_note {
        eprintln!("note: {} timings: {note}", info.label);
    }

    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);

    let mut records = Vec::with_capacity(spec.sizes.len());
    for &size in &spec.sizes {
        validate_size(spec.kernel, size, info.lane_count)?;
        let mut rng = StdRng::seed_from_u64(spec.seed ^ (size as u64).rotate_left(17));
        let x = Polynomial::random(size, &m, &mut rng);
        let y = Polynomial::random(size, &m, &mut rng);
        let alpha = random_residue(&mut rng, &m);

        // Plan construction (twiddles, schedules) is one-time setup and
        // stays outside the timed region.
        let plan = if spec.kernel.is_transform() {
            Some(NttPlan::new(size, m)?)
        } else {
            None
        };

        let timed = spec.iterations - spec.warmup;
        let mut checksum = 0u64;
        let run_once = || -> Result<u64, HarnessError> {
            let out = match spec.kernel {
                Kernel::Ntt => plan.as_ref().expect("plan built above").forward(
                    &x,
                    engine.as_ref(),
                    spec.algo,
                )?,
                Kernel::Vadd => blas_vadd(&x, &y, &m, engine.as_ref())?,
                Kernel::Vsub => blas_vsub(&x, &y, &m, engine.as_ref())?,
                Kernel::Vpmul => blas_vpmul(&x, &y, &m, engine.as_ref(), spec.algo)?,
                Kernel::Axpy => blas_axpy(alpha, &x, &y, &m, engine.as_ref(), spec.algo)?,
            };
            Ok(fold_checksum(0, black_box(&out)))
        };

        for _ in 0..spec.warmup {
            checksum = checksum.rotate_left(1) ^ black_box(run_once()?);
        }
        let start = Instant::now();
        for _ in 0..timed {
            checksum = checksum.rotate_left(1) ^ black_box(run_once()?);
        }
        let elapsed = start.elapsed();

        let total_ns = elapsed.as_nanos() as f64 / timed as f64;
        let unit_count = spec.kernel.unit_count(size);
        records.push(BenchRecord {
            kernel: spec.kernel.name().to_string(),
            size: size as u64,
            backend: spec.backend.as_str().to_string(),
            mqx_mode: spec.mode.as_str().to_string(),
            mqx_variant: spec.variant.as_str().to_string(),
            algo: spec.algo.name().to_string(),
            modulus_bits: spec.modulus_bits,
            lanes: info.lane_count as u32,
            iterations: spec.iterations,
            warmup: spec.warmup,
            total_ns,
            unit: spec.kernel.unit().to_string(),
            unit_count,
            normalized_ns: total_ns / unit_count as f64,
            checksum: format!("{checksum:016x}"),
            pinned,
            host: host.clone(),
            seed: spec.seed,
            timestamp,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dwmod::lane::BackendKind;

    fn quick_spec(kernel: Kernel, sizes: Vec<usize>) -> BenchSpec {
        let mut s = BenchSpec::new(kernel, ExecBackend::Lane(BackendKind::Portable));
        s.sizes = sizes;
        s.iterations = 4;
        s.warmup = 2;
        s
    }

    #[test]
    fn default_protocols_match_documentation() {
        let ntt = BenchSpec::new(Kernel::Ntt, ExecBackend::Lane(BackendKind::Portable));
        assert_eq!((ntt.iterations, ntt.warmup), (100, 50));
        assert_eq!(
            ntt.sizes,
            (10..=16).map(|l| 1usize << l).collect::<Vec<_>>()
        );
        for k in [Kernel::Vadd, Kernel::Vsub, Kernel::Vpmul, Kernel::Axpy] {
            let b = BenchSpec::new(k, ExecBackend::Lane(BackendKind::Portable));
            assert_eq!((b.iterations, b.warmup), (1000, 500));
            assert_eq!(b.sizes, vec![1024]);
        }
    }

    #[test]
    fn records_echo_protocol_and_normalization() {
        let spec = quick_spec(Kernel::Ntt, vec![1024]);
        let recs = run_bench(&spec).unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!((r.iterations, r.warmup), (4, 2));
        assert_eq!(r.unit, "butterfly");
        assert_eq!(r.unit_count, 5120); // (1024/2) * 10
        assert!(r.total_ns > 0.0);
        assert!((r.normalized_ns - r.total_ns / 5120.0).abs() < 1e-9);

        let spec = quick_spec(Kernel::Vadd, vec![1024]);
        let r = &run_bench(&spec).unwrap()[0];
        assert_eq!(r.unit, "element");
        assert_eq!(r.unit_count, 1024);
    }

    #[test]
    fn same_seed_same_checksum() {
        let spec = quick_spec(Kernel::Vpmul, vec![256]);
        let a = run_bench(&spec).unwrap();
        let b = run_bench(&spec).unwrap();
        assert_eq!(a[0].checksum, b[0].checksum);

        let mut other = spec.clone();
        other.seed ^= 1;
        let c = run_bench(&other).unwrap();
        assert_ne!(a[0].checksum, c[0].checksum);
    }

    #[test]
    fn size_and_protocol_validation() {
        let spec = quick_spec(Kernel::Ntt, vec![1000]);
        assert!(matches!(
            run_bench(&spec),
            Err(HarnessError::BadSize { .. })
        ));
        let mut spec = quick_spec(Kernel::Vadd, vec![1024]);
        spec.warmup = spec.iterations;
        assert!(matches!(
            run_bench(&spec),
            Err(HarnessError::BadProtocol { .. })
        ));
        let mut spec = quick_spec(Kernel::Ntt, vec![64]);
        spec.modulus_bits = 99;
        assert!(matches!(run_bench(&spec), Err(HarnessError::NoPrime(99))));
    }
}

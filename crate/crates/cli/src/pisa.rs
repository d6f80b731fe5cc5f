//! Proxy-ISA sanity checks on existing instructions.
//!
//! The same modeling move used for the extension ops — substitute a
//! structurally similar existing instruction and time it on real hardware —
//! applied to instructions that already exist, so both sides of the pair
//! can be measured. Each case times a dependency-chained loop with the
//! target primitive and again with its proxy, then reports the relative
//! error. In conservative mode the proxy loop carries one extra instruction
//! guarding the mask dependency, mirroring the validation methodology.
//!
//! Results are only hardware-representative on a backend with native mask
//! operations; elsewhere the run is labeled as emulated.

use crate::models::{pisa_error, PisaPair};
use dwmod::lane::{backend_select, BackendKind, LaneError, LaneIsa, LaneMask, WordVec};
use std::hint::black_box;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct PisaCheckRow {
    pub case_name: &'static str,
    pub target_ns: f64,
    pub proxy_ns: f64,
    pub epsilon_pct: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CheckCase {
    MaskedAdd,
    MaskedSub,
    Widening32Mul,
}

impl CheckCase {
    fn name(self) -> &'static str {
        match self {
            CheckCase::MaskedAdd => "masked-add vs add",
            CheckCase::MaskedSub => "masked-sub vs sub",
            CheckCase::Widening32Mul => "widening-32-mul vs mullo",
        }
    }
}

const BUF_VECS: usize = 256;

fn time_loop(
    backend: &dyn LaneIsa,
    case: CheckCase,
    proxy: bool,
    conservative: bool,
    iters: u32,
    data: &[WordVec],
    mask: &LaneMask,
) -> f64 {
    let v = backend.lane_count();
    let mask_vec = backend.v_blend(mask, &backend.splat(0), &backend.splat(u64::MAX));
    let mut acc = WordVec::splat(v, 1);
    let start = Instant::now();
    for _ in 0..iters {
        for x in data {
            acc = match (case, proxy) {
                (CheckCase::MaskedAdd, false) => backend.v_mask_add(&acc, mask, &acc, x),
                (CheckCase::MaskedAdd, true) => backend.v_add(&acc, x),
                (CheckCase::MaskedSub, false) => backend.v_mask_sub(&acc, mask, &acc, x),
                (CheckCase::MaskedSub, true) => backend.v_sub(&acc, x),
                (CheckCase::Widening32Mul, false) => backend.v_mul_even32(&acc, x),
                (CheckCase::Widening32Mul, true) => backend.v_mullo(&acc, x),
            };
            if proxy && conservative {
                // Extra instruction keeping the mask register live in the
                // proxy stream.
                acc = backend.v_or(&acc, &mask_vec);
            }
        }
        acc = black_box(acc);
    }
    let elapsed = start.elapsed().as_nanos() as f64;
    black_box(&acc);
    elapsed / (iters as f64 * data.len() as f64)
}

/// Runs all target/proxy cases on one backend. Returns the rows and a
/// representativeness note when the backend emulates mask operations.
pub fn run_pisa_check(
    kind: BackendKind,
    lanes: Option<usize>,
    iters: u32,
    conservative: bool,
    seed: u64,
) -> Result<(Vec<PisaCheckRow>, Option<String>), LaneError> {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    let backend = backend_select(kind, lanes)?;
    let v = backend.lane_count();
    let mut rng = StdRng::seed_from_u64(seed);
    let data: Vec<WordVec> = (0..BUF_VECS)
        .map(|_| WordVec::from_fn(v, |_| rng.random()))
        .collect();
    let mask = LaneMask::from_fn(v, |i| i % 2 == 0);

    let note = if backend.mask_ops_native() {
        None
    } else {
        Some("portable-emulated, non-representative".to_string())
    };

    let mut rows = Vec::new();
    for case in [
        CheckCase::MaskedAdd,
        CheckCase::MaskedSub,
        CheckCase::Widening32Mul,
    ] {
        // One untimed pass warms the buffers.
        let _ = time_loop(&backend, case, false, conservative, 1, &data, &mask);
        let target_ns = time_loop(&backend, case, false, conservative, iters, &data, &mask);
        let proxy_ns = time_loop(&backend, case, true, conservative, iters, &data, &mask);
        let epsilon_pct = pisa_error(&PisaPair {
            t_target_ns: target_ns,
            t_proxy_ns: proxy_ns,
        })
        .expect("timed loops are positive");
        rows.push(PisaCheckRow {
            case_name: case.name(),
            target_ns,
            proxy_ns,
            epsilon_pct,
        });
    }
    Ok((rows, note))
}

pub fn print_rows(backend: &str, rows: &[PisaCheckRow], note: &Option<String>) {
    println!("proxy-ISA sanity check on {backend}");
    if let Some(n) = note {
        println!("note: {n}");
    }
    println!(
        "{:<28} {:>14} {:>14} {:>10}",
        "case", "target ns/op", "proxy ns/op", "epsilon"
    );
    for r in rows {
        println!(
            "{:<28} {:>14.4} {:>14.4} {:>9.2}%",
            r.case_name, r.target_ns, r.proxy_ns, r.epsilon_pct
        );
    }
}

//! Differential and oracle suites.
//!
//! Everything here is runnable both from tests and from the benchmark
//! CLI's `verify` subcommand. The oracles are deliberately independent of
//! the implementation paths they judge: word-level ops are checked against
//! native 128-bit integer arithmetic, the 256-bit product against partial
//! products formed in `u128`, and modular multiplication against a
//! double-and-add reduction that never touches Barrett constants.

use crate::dword::{
    adc_word, dw_add, dw_mul_karatsuba, dw_mul_schoolbook, dw_sub, mul_wide_word, sbb_word, DWord,
};
use crate::engine::{LaneKernel, ModularVectorOps};
use crate::kernels::{
    blas_vadd, blas_vpmul, blas_vsub, cyclic_convolution_check, NttPlan, Polynomial,
};
use crate::lane::{
    algo, available_backends, backend_select, BackendKind, CmpRel, DWordVec, LaneIsa, LaneMask,
    Portable, WordVec,
};
use crate::modular::{addmod, mulmod, random_residue, submod, Modulus, MulAlgo, Residue};
use crate::mqx::{MqxEngine, MqxMode, MqxVariant};
use crate::trace::OpKind;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub mod mini;

/// One named pass/fail result with a short human-readable detail line.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn pass(name: &str, detail: String) -> Self {
        CheckReport {
            name: name.to_string(),
            passed: true,
            detail,
        }
    }

    fn fail(name: &str, detail: String) -> Self {
        CheckReport {
            name: name.to_string(),
            passed: false,
            detail,
        }
    }

    fn from_mismatches(name: &str, cases: usize, mismatches: usize) -> Self {
        if mismatches == 0 {
            Self::pass(name, format!("{cases} cases, 0 mismatches"))
        } else {
            Self::fail(name, format!("{cases} cases, {mismatches} mismatches"))
        }
    }
}

pub mod oracle {
    //! Runtime reference arithmetic, independent of the library's
    //! word-decomposed pipeline.

    /// `(a * b) mod q` by double-and-add over `u128`; no Barrett, no
    /// widening decomposition.
    pub fn mulmod_u128(a: u128, b: u128, q: u128) -> u128 {
        debug_assert!(q >= 2 && q < 1 << 124 && a < q && b < q);
        let mut acc = 0u128;
        let mut base = a % q;
        let mut e = b;
        while e > 0 {
            if e & 1 == 1 {
                acc += base;
                if acc >= q {
                    acc -= q;
                }
            }
            base += base;
            if base >= q {
                base -= q;
            }
            e >>= 1;
        }
        acc
    }

    /// Exact 256-bit product as four words from `u128` partial products.
    pub fn mul256(a: u128, b: u128) -> [u64; 4] {
        let (a_hi, a_lo) = ((a >> 64) as u64, a as u64);
        let (b_hi, b_lo) = ((b >> 64) as u64, b as u64);
        let ll = a_lo as u128 * b_lo as u128;
        let lh = a_lo as u128 * b_hi as u128;
        let hl = a_hi as u128 * b_lo as u128;
        let hh = a_hi as u128 * b_hi as u128;

        let mid = (ll >> 64) + (lh & LO) + (hl & LO);
        let hi128 = hh + (lh >> 64) + (hl >> 64) + (mid >> 64);
        let lo128 = (mid << 64) | (ll & LO);
        [
            lo128 as u64,
            (lo128 >> 64) as u64,
            hi128 as u64,
            (hi128 >> 64) as u64,
        ]
    }

    const LO: u128 = u64::MAX as u128;

    pub fn modpow_u128(mut base: u128, mut e: u128, q: u128) -> u128 {
        let mut acc = 1 % q;
        base %= q;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod_u128(acc, base, q);
            }
            base = mulmod_u128(base, base, q);
            e >>= 1;
        }
        acc
    }

    /// Direct-summation transform straight from the definition, entirely in
    /// oracle arithmetic.
    pub fn direct_ntt(x: &[u128], q: u128, w: u128) -> Vec<u128> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut acc = 0u128;
                for (j, &xj) in x.iter().enumerate() {
                    let t = mulmod_u128(xj, modpow_u128(w, (j * k) as u128, q), q);
                    acc += t;
                    if acc >= q {
                        acc -= q;
                    }
                }
                acc
            })
            .collect()
    }
}

/// Word-level ops against native 128-bit arithmetic.
pub fn word_oracle_suite(cases: usize, seed: u64) -> CheckReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut bad = 0usize;
    for _ in 0..cases {
        let a: u64 = rng.random();
        let b: u64 = rng.random();
        let ci: bool = rng.random();

        let (sum, co) = adc_word(a, b, ci);
        let exact = a as u128 + b as u128 + ci as u128;
        if (sum as u128 | ((co as u128) << 64))
            != ((exact & (u64::MAX as u128)) | ((exact >> 64) << 64))
        {
            bad += 1;
        }

        let (diff, bo) = sbb_word(a, b, ci);
        let exact = (a as i128) - (b as i128) - (ci as i128);
        if diff != exact.rem_euclid(1 << 64) as u64 || bo != (exact < 0) {
            bad += 1;
        }

        let (hi, lo) = mul_wide_word(a, b);
        if ((hi as u128) << 64 | lo as u128) != a as u128 * b as u128 {
            bad += 1;
        }
    }
    CheckReport::from_mismatches("word ops vs 128-bit oracle", cases * 3, bad)
}

/// Double-word add/sub/mul against the `u128` oracles.
pub fn dword_oracle_suite(cases: usize, seed: u64) -> CheckReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut bad = 0usize;
    for _ in 0..cases {
        let a: u128 = rng.random();
        let b: u128 = rng.random();
        let (s, co) = dw_add(DWord::from_u128(a), DWord::from_u128(b));
        let (exact, exact_co) = a.overflowing_add(b);
        if s.to_u128() != exact || co != exact_co {
            bad += 1;
        }
        let (d, bo) = dw_sub(DWord::from_u128(a), DWord::from_u128(b));
        if d.to_u128() != a.wrapping_sub(b) || bo != (a < b) {
            bad += 1;
        }
        let expect = oracle::mul256(a, b);
        if dw_mul_schoolbook(DWord::from_u128(a), DWord::from_u128(b)).words != expect {
            bad += 1;
        }
        if dw_mul_karatsuba(DWord::from_u128(a), DWord::from_u128(b)).words != expect {
            bad += 1;
        }
    }
    CheckReport::from_mismatches("double-word ops vs 256-bit oracle", cases * 4, bad)
}

/// Schoolbook and Karatsuba agreement on random and structured operands.
pub fn mul_agreement_suite(cases: usize, seed: u64) -> CheckReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut bad = 0usize;
    let edges = [
        0u128,
        1,
        u64::MAX as u128,
        1 << 64,
        (1 << 124) - 1,
        u128::MAX,
    ];
    let mut total = 0usize;
    for &a in &edges {
        for &b in &edges {
            total += 1;
            if dw_mul_schoolbook(DWord::from_u128(a), DWord::from_u128(b))
                != dw_mul_karatsuba(DWord::from_u128(a), DWord::from_u128(b))
            {
                bad += 1;
            }
        }
    }
    for _ in 0..cases {
        total += 1;
        let a: u128 = rng.random();
        let b: u128 = rng.random();
        if dw_mul_schoolbook(DWord::from_u128(a), DWord::from_u128(b))
            != dw_mul_karatsuba(DWord::from_u128(a), DWord::from_u128(b))
        {
            bad += 1;
        }
    }
    CheckReport::from_mismatches("schoolbook vs karatsuba agreement", total, bad)
}

/// Modular ops across the five-modulus ladder against oracle arithmetic.
pub fn modular_oracle_suite(cases_per_modulus: usize, seed: u64) -> CheckReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut bad = 0usize;
    let mut total = 0usize;
    for m in crate::kernels::primes::ladder() {
        let q = m.q().to_u128();
        for _ in 0..cases_per_modulus {
            total += 1;
            let a = random_residue(&mut rng, &m);
            let b = random_residue(&mut rng, &m);
            let (av, bv) = (a.value().to_u128(), b.value().to_u128());

            let mut sum = av + bv;
            if sum >= q {
                sum -= q;
            }
            if addmod(a, b, &m).value().to_u128() != sum {
                bad += 1;
            }
            let diff = if av >= bv { av - bv } else { av + q - bv };
            if submod(a, b, &m).value().to_u128() != diff {
                bad += 1;
            }
            let prod = oracle::mulmod_u128(av, bv, q);
            if mulmod(a, b, &m, MulAlgo::Schoolbook).value().to_u128() != prod {
                bad += 1;
            }
            if mulmod(a, b, &m, MulAlgo::Karatsuba).value().to_u128() != prod {
                bad += 1;
            }
        }
    }
    CheckReport::from_mismatches("modular ops vs oracle across ladder", total * 4, bad)
}

struct BlockGen {
    rng: StdRng,
    v: usize,
}

impl BlockGen {
    fn new(v: usize, seed: u64) -> Self {
        BlockGen {
            rng: StdRng::seed_from_u64(seed),
            v,
        }
    }

    fn words(&mut self) -> WordVec {
        WordVec::from_fn(self.v, |_| self.rng.random())
    }

    fn mask(&mut self) -> LaneMask {
        LaneMask::from_fn(self.v, |_| self.rng.random())
    }

    fn perm_idx(&mut self) -> WordVec {
        let limit = 2 * self.v as u64;
        WordVec::from_fn(self.v, |_| self.rng.random_range(0..limit))
    }

    fn residues(&mut self, m: &Modulus) -> (DWordVec, Vec<Residue>) {
        let rs: Vec<Residue> = (0..self.v)
            .map(|_| random_residue(&mut self.rng, m))
            .collect();
        (
            DWordVec::from_dwords(&rs.iter().map(|r| r.value()).collect::<Vec<_>>()),
            rs,
        )
    }
}

fn compare_primitives(
    reference: &dyn LaneIsa,
    candidate: &dyn LaneIsa,
    gen: &mut BlockGen,
) -> usize {
    let mut bad = 0usize;
    let a = gen.words();
    let b = gen.words();
    let mask = gen.mask();
    let src = gen.words();
    let k = gen.rng.random_range(0..64u32);
    let idx = gen.perm_idx();

    macro_rules! diff {
        ($lhs:expr, $rhs:expr) => {
            if $lhs != $rhs {
                bad += 1;
            }
        };
    }

    diff!(reference.v_add(&a, &b), candidate.v_add(&a, &b));
    diff!(reference.v_sub(&a, &b), candidate.v_sub(&a, &b));
    diff!(reference.v_mullo(&a, &b), candidate.v_mullo(&a, &b));
    diff!(
        reference.v_mul_even32(&a, &b),
        candidate.v_mul_even32(&a, &b)
    );
    diff!(reference.v_shl(&a, k), candidate.v_shl(&a, k));
    diff!(reference.v_shr(&a, k), candidate.v_shr(&a, k));
    diff!(reference.v_and(&a, &b), candidate.v_and(&a, &b));
    diff!(reference.v_or(&a, &b), candidate.v_or(&a, &b));
    for rel in [CmpRel::Lt, CmpRel::Le, CmpRel::Eq] {
        diff!(reference.v_cmp(&a, &b, rel), candidate.v_cmp(&a, &b, rel));
    }
    diff!(
        reference.v_cmp_gt_signed(&a, &b),
        candidate.v_cmp_gt_signed(&a, &b)
    );
    diff!(
        reference.v_blend(&mask, &a, &b),
        candidate.v_blend(&mask, &a, &b)
    );
    diff!(
        reference.v_mask_add(&src, &mask, &a, &b),
        candidate.v_mask_add(&src, &mask, &a, &b)
    );
    diff!(
        reference.v_mask_sub(&src, &mask, &a, &b),
        candidate.v_mask_sub(&src, &mask, &a, &b)
    );
    diff!(reference.v_unpack_lo(&a, &b), candidate.v_unpack_lo(&a, &b));
    diff!(reference.v_unpack_hi(&a, &b), candidate.v_unpack_hi(&a, &b));
    diff!(
        reference.v_permute2(&idx, &a, &b).unwrap(),
        candidate.v_permute2(&idx, &a, &b).unwrap()
    );
    bad
}

/// Wrap-divergence inputs: lane `i` wraps exactly when bit `i` of `pattern`
/// is set.
fn divergence_block(
    m: &Modulus,
    v: usize,
    pattern: u32,
) -> (DWordVec, DWordVec, Vec<Residue>, Vec<Residue>) {
    let qm1 = submod(Residue::ZERO, Residue::one(m), m);
    let a: Vec<Residue> = (0..v)
        .map(|i| {
            if pattern >> i & 1 == 1 {
                qm1
            } else {
                Residue::ZERO
            }
        })
        .collect();
    let b = vec![Residue::one(m); v];
    (
        DWordVec::from_dwords(&a.iter().map(|r| r.value()).collect::<Vec<_>>()),
        DWordVec::from_dwords(&b.iter().map(|r| r.value()).collect::<Vec<_>>()),
        a,
        b,
    )
}

/// Cross-backend conformance: the portable reference vs every native
/// backend, primitive by primitive and composite by composite, plus the
/// extension engine at the composite level; includes blocks where every
/// subset of lanes takes the wrap path.
pub fn backend_matrix_suite(blocks: usize, seed: u64) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let ladder = crate::kernels::primes::ladder();

    for kind in available_backends() {
        if kind == BackendKind::Portable {
            continue;
        }
        let native = backend_select(kind, None).expect("reported available");
        let v = native.lane_count();
        let reference = Portable::with_lanes(v).expect("native widths are valid lane counts");
        let mut gen = BlockGen::new(v, seed);
        let mut bad = 0usize;
        for _ in 0..blocks {
            bad += compare_primitives(&reference, &native, &mut gen);
        }
        out.push(CheckReport::from_mismatches(
            &format!("primitive conformance portable vs {}", kind.as_str()),
            blocks * 20,
            bad,
        ));

        // Composites, with scalar replay as the ground truth.
        let mut bad = 0usize;
        let mut total = 0usize;
        for m in &ladder {
            for i in 0..blocks / ladder.len() {
                let (av, ar) = gen.residues(m);
                let (bv, br) = gen.residues(m);
                total += 1;
                let (pa, na) = (
                    algo::v_addmod(&reference, &av, &bv, m),
                    algo::v_addmod(&native, &av, &bv, m),
                );
                let (ps, ns) = (
                    algo::v_submod(&reference, &av, &bv, m),
                    algo::v_submod(&native, &av, &bv, m),
                );
                let alg = if i % 2 == 0 {
                    MulAlgo::Schoolbook
                } else {
                    MulAlgo::Karatsuba
                };
                let (pm, nm) = (
                    algo::v_mulmod(&reference, &av, &bv, m, alg),
                    algo::v_mulmod(&native, &av, &bv, m, alg),
                );
                if pa != na || ps != ns || pm != nm {
                    bad += 1;
                    continue;
                }
                for i in 0..v {
                    if pa.lane(i) != addmod(ar[i], br[i], m).value()
                        || ps.lane(i) != submod(ar[i], br[i], m).value()
                        || pm.lane(i) != mulmod(ar[i], br[i], m, alg).value()
                    {
                        bad += 1;
                        break;
                    }
                }
            }
        }
        out.push(CheckReport::from_mismatches(
            &format!("composite conformance portable vs {}", kind.as_str()),
            total,
            bad,
        ));

        // Every wrap-path subset pattern.
        let mut bad = 0usize;
        let m = &ladder[4];
        for pattern in 0..(1u32 << v) {
            let (av, bv, ar, br) = divergence_block(m, v, pattern);
            let got = algo::v_addmod(&native, &av, &bv, m);
            for i in 0..v {
                if got.lane(i) != addmod(ar[i], br[i], m).value() {
                    bad += 1;
                }
            }
        }
        out.push(CheckReport::from_mismatches(
            &format!("mask-divergence conformance on {}", kind.as_str()),
            1 << v,
            bad,
        ));
    }

    if out.is_empty() {
        out.push(CheckReport::pass(
            "native backend conformance",
            "no native backends available on this host; portable only".into(),
        ));
    }
    out
}

/// Extension engine (functional mode) against the portable composites and
/// scalar replay, across every variant.
pub fn mqx_equivalence_suite(blocks: usize, seed: u64) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let ladder = crate::kernels::primes::ladder();
    let variants = [
        MqxVariant::Base,
        MqxVariant::M,
        MqxVariant::C,
        MqxVariant::Mc,
        MqxVariant::MhC,
        MqxVariant::Mcp,
    ];

    for base_kind in available_backends() {
        let base = backend_select(base_kind, None).expect("available");
        let v = base.lane_count();
        let mut gen = BlockGen::new(v, seed ^ 0x6d71_7800);
        let mut bad = 0usize;
        let mut total = 0usize;
        for variant in variants {
            let e = MqxEngine::new(base, MqxMode::Functional, variant);
            for m in &ladder {
                for i in 0..blocks / (ladder.len() * variants.len()) + 1 {
                    total += 1;
                    let (av, ar) = gen.residues(m);
                    let (bv, br) = gen.residues(m);
                    let alg = if i % 2 == 0 {
                        MulAlgo::Schoolbook
                    } else {
                        MulAlgo::Karatsuba
                    };
                    let add = e.addmod128(&av, &bv, m);
                    let sub = e.submod128(&av, &bv, m);
                    let mul = e.mulmod128(&av, &bv, m, alg);
                    for i in 0..v {
                        if add.lane(i) != addmod(ar[i], br[i], m).value()
                            || sub.lane(i) != submod(ar[i], br[i], m).value()
                            || mul.lane(i) != mulmod(ar[i], br[i], m, alg).value()
                        {
                            bad += 1;
                            break;
                        }
                    }
                }
            }
            // Divergent wrap patterns.
            let m = &ladder[3];
            for pattern in [0u32, 1, (1 << v) - 1, 0b0101_0101 & ((1 << v) - 1)] {
                total += 1;
                let (av, bv, ar, br) = divergence_block(m, v, pattern);
                let got = e.addmod128(&av, &bv, m);
                for i in 0..v {
                    if got.lane(i) != addmod(ar[i], br[i], m).value() {
                        bad += 1;
                        break;
                    }
                }
            }
        }
        out.push(CheckReport::from_mismatches(
            &format!("mqx functional equivalence over {}", base_kind.as_str()),
            total,
            bad,
        ));
    }
    out
}

/// Static lane-op trace properties: the 7-vs-17 modular-addition counts,
/// proxy class preservation, and variant gating.
pub fn trace_property_suite() -> Vec<CheckReport> {
    let mut out = Vec::new();
    let m = Modulus::from_u128(crate::kernels::primes::NTT_PRIMES[3].1).expect("in range");
    let a = DWordVec::splat(8, DWord::from_u64(0xdead_beef));
    let b = DWordVec::splat(8, DWord::from_u64(0xc0ff_ee00));

    // Vector-ISA addmod: 17 lane-ops.
    let handle = crate::trace::TraceHandle::new();
    let rec = crate::trace::Recorded::new(Portable::with_lanes(8).unwrap(), handle.clone());
    let _ = algo::v_addmod(&rec, &a, &b, &m);
    let lane_ops = handle.len();
    out.push(if lane_ops == 17 {
        CheckReport::pass("vector-ISA addmod lane-op count", "17 lane-ops".into())
    } else {
        CheckReport::fail(
            "vector-ISA addmod lane-op count",
            format!("expected 17 lane-ops, got {lane_ops}"),
        )
    });

    // Extension addmod: 7 lane-ops, strictly fewer.
    let (e, handle) = MqxEngine::traced(
        Portable::with_lanes(8).unwrap(),
        MqxMode::Functional,
        MqxVariant::Mc,
    );
    let _ = e.addmod128(&a, &b, &m);
    let mqx_ops = handle.len();
    out.push(if mqx_ops == 7 && mqx_ops < lane_ops {
        CheckReport::pass("mqx addmod lane-op count", "7 lane-ops".into())
    } else {
        CheckReport::fail(
            "mqx addmod lane-op count",
            format!("expected 7 lane-ops, got {mqx_ops}"),
        )
    });

    // Proxy substitution preserves op count and class histogram.
    let mut preserved = true;
    let mut detail = String::new();
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
        if f.len() != p.len() || f.class_histogram() != p.class_histogram() {
            preserved = false;
            detail = format!(
                "{variant:?}: functional {} ops vs proxy {} ops",
                f.len(),
                p.len()
            );
            break;
        }
    }
    out.push(if preserved {
        CheckReport::pass(
            "proxy trace preserves op count and classes",
            "all variants".into(),
        )
    } else {
        CheckReport::fail("proxy trace preserves op count and classes", detail)
    });

    // Variant gating.
    let gate = |variant: MqxVariant| {
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
    let c = gate(MqxVariant::C);
    let m_only = gate(MqxVariant::M);
    let mhc = gate(MqxVariant::MhC);
    let mut gating_ok = !c.contains_kind(OpKind::MulWideLo)
        && !c.contains_kind(OpKind::MulWideHi)
        && !m_only.contains_kind(OpKind::Adc)
        && !m_only.contains_kind(OpKind::Sbb)
        && !mhc.contains_kind(OpKind::MulWideLo);
    // Every multiply-high must be preceded by its paired multiply-low.
    let kinds = mhc.ops();
    for (i, k) in kinds.iter().enumerate() {
        if *k == OpKind::MulHi && (i == 0 || kinds[i - 1] != OpKind::Mullo) {
            gating_ok = false;
        }
    }
    out.push(if gating_ok {
        CheckReport::pass("variant gating of emitted ops", "m/c/mhc gates hold".into())
    } else {
        CheckReport::fail("variant gating of emitted ops", "gate violated".into())
    });

    out
}

/// All engines this host can run, labeled: lane kernels over every
/// available backend plus the extension engine in functional mode.
pub fn all_engines() -> Vec<(String, Box<dyn ModularVectorOps>)> {
    let mut out: Vec<(String, Box<dyn ModularVectorOps>)> = Vec::new();
    for kind in available_backends() {
        let b = backend_select(kind, None).expect("available");
        out.push((kind.as_str().to_string(), Box::new(LaneKernel::new(b))));
    }
    let base = backend_select(BackendKind::Portable, None).expect("portable");
    out.push((
        "mqx-functional".to_string(),
        Box::new(MqxEngine::new(base, MqxMode::Functional, MqxVariant::Mc)),
    ));
    if let Ok(b512) = backend_select(BackendKind::Native512, None) {
        out.push((
            "mqx-functional/native-512".to_string(),
            Box::new(MqxEngine::new(b512, MqxMode::Functional, MqxVariant::Mc)),
        ));
    }
    out
}

/// Forward-transform equivalence across engines, small-size oracle checks,
/// round trips, butterfly counts, and the convolution theorem.
pub fn ntt_suite(max_roundtrip_log2: u32, seed: u64) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let mut rng = StdRng::seed_from_u64(seed);
    let engines = all_engines();
    let p124 = crate::kernels::primes::NTT_PRIMES[3].1;

    // Direct-summation oracle on every size/modulus pairing whose
    // multiplicative order admits the transform.
    let mut oracle_ok = true;
    let mut oracle_detail = String::new();
    let mut oracle_cases = 0usize;
    for &n in &[8usize, 16, 64] {
        for &q in &[17u128, 97, p124] {
            if (q - 1) % n as u128 != 0 {
                let m = Modulus::from_u128(q).unwrap();
                if NttPlan::new(n, m).is_ok() {
                    oracle_ok = false;
                    oracle_detail = format!("plan for n={n}, q={q} should be rejected");
                }
                continue;
            }
            let m = Modulus::from_u128(q).unwrap();
            let plan = NttPlan::new(n, m).expect("order admits n");
            let x = Polynomial::random(n, &m, &mut rng);
            let vals: Vec<u128> = x.to_dwords().iter().map(|d| d.to_u128()).collect();
            let expect = oracle::direct_ntt(&vals, q, plan.omega().value().to_u128());
            for (label, eng) in &engines {
                if x.len() % eng.lane_count() != 0 {
                    continue;
                }
                oracle_cases += 1;
                let y = plan.forward(&x, eng.as_ref(), MulAlgo::Schoolbook).unwrap();
                let got: Vec<u128> = y.to_dwords().iter().map(|d| d.to_u128()).collect();
                if got != expect {
                    oracle_ok = false;
                    oracle_detail = format!("{label} deviates from oracle at n={n}, q={q:#x}");
                }
            }
        }
    }
    out.push(if oracle_ok {
        CheckReport::pass(
            "forward transform vs direct-summation oracle",
            format!("{oracle_cases} engine/size/modulus cases"),
        )
    } else {
        CheckReport::fail(
            "forward transform vs direct-summation oracle",
            oracle_detail,
        )
    });

    // Cross-engine equality and round trips over the full size range.
    let m = Modulus::from_u128(p124).unwrap();
    let mut equiv_ok = true;
    let mut equiv_detail = String::new();
    let mut rt_ok = true;
    let mut rt_detail = String::new();
    let mut bf_ok = true;
    for logn in 3..=max_roundtrip_log2 {
        let n = 1usize << logn;
        let plan = NttPlan::new(n, m).expect("shipped prime supports up to 2^17");
        let x = Polynomial::random(n, &m, &mut rng);
        let mut reference: Option<Polynomial> = None;
        for (label, eng) in &engines {
            if n % eng.lane_count() != 0 {
                continue;
            }
            let (y, stats) = plan
                .forward_with_stats(&x, eng.as_ref(), MulAlgo::Schoolbook)
                .unwrap();
            if stats.butterflies != crate::kernels::butterfly_count(n) {
                bf_ok = false;
            }
            match &reference {
                None => reference = Some(y.clone()),
                Some(r) => {
                    if *r != y {
                        equiv_ok = false;
                        equiv_detail = format!("{label} diverges at n={n}");
                    }
                }
            }
            let back = plan.inverse(&y, eng.as_ref(), MulAlgo::Schoolbook).unwrap();
            if back != x {
                rt_ok = false;
                rt_detail = format!("{label} round trip fails at n={n}");
            }
        }
    }
    out.push(if equiv_ok {
        CheckReport::pass(
            "forward transform identical across engines",
            format!("sizes 2^3..2^{max_roundtrip_log2}"),
        )
    } else {
        CheckReport::fail("forward transform identical across engines", equiv_detail)
    });
    out.push(if rt_ok {
        CheckReport::pass(
            "inverse round-trip identity",
            format!("sizes 2^3..2^{max_roundtrip_log2}"),
        )
    } else {
        CheckReport::fail("inverse round-trip identity", rt_detail)
    });
    out.push(if bf_ok {
        CheckReport::pass(
            "butterfly count (n/2)*log2(n)",
            "exact at every size".into(),
        )
    } else {
        CheckReport::fail("butterfly count (n/2)*log2(n)", "count mismatch".into())
    });

    // Convolution theorem at a small and a production size.
    let eng = &engines[0].1;
    let mut conv_ok = true;
    {
        let m17 = Modulus::from_u128(17).unwrap();
        let plan = NttPlan::new(8, m17).unwrap();
        for _ in 0..5 {
            let f = Polynomial::random(8, &m17, &mut rng);
            let g = Polynomial::random(8, &m17, &mut rng);
            conv_ok &=
                cyclic_convolution_check(&f, &g, &plan, eng.as_ref(), MulAlgo::Schoolbook).unwrap();
        }
        let plan = NttPlan::new(1024, m).unwrap();
        let f = Polynomial::random(1024, &m, &mut rng);
        let g = Polynomial::random(1024, &m, &mut rng);
        conv_ok &=
            cyclic_convolution_check(&f, &g, &plan, eng.as_ref(), MulAlgo::Schoolbook).unwrap();
    }
    out.push(if conv_ok {
        CheckReport::pass(
            "cyclic convolution theorem",
            "n=8 (q=17) and n=1024 (124-bit prime)".into(),
        )
    } else {
        CheckReport::fail("cyclic convolution theorem", "mismatch".into())
    });

    out
}

/// BLAS kernels against a scalar per-element replay on every engine.
pub fn blas_suite(n: usize, seed: u64) -> Vec<CheckReport> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    let m = crate::kernels::primes::ladder()[4];
    for (label, eng) in all_engines() {
        if n % eng.lane_count() != 0 {
            continue;
        }
        let x = Polynomial::random(n, &m, &mut rng);
        let y = Polynomial::random(n, &m, &mut rng);
        let add = blas_vadd(&x, &y, &m, eng.as_ref()).unwrap();
        let sub = blas_vsub(&x, &y, &m, eng.as_ref()).unwrap();
        let mul = blas_vpmul(&x, &y, &m, eng.as_ref(), MulAlgo::Schoolbook).unwrap();
        let mut bad = 0usize;
        for i in 0..n {
            let xi = Residue::new(x.coeff(i), &m).unwrap();
            let yi = Residue::new(y.coeff(i), &m).unwrap();
            if add.coeff(i) != addmod(xi, yi, &m).value()
                || sub.coeff(i) != submod(xi, yi, &m).value()
                || mul.coeff(i) != mulmod(xi, yi, &m, MulAlgo::Schoolbook).value()
            {
                bad += 1;
            }
        }
        out.push(CheckReport::from_mismatches(
            &format!("blas scalar replay on {label}"),
            n * 3,
            bad,
        ));
    }
    out
}

/// Injects a wrong twiddle and reports where the differential first
/// diverges; passes when the divergence lands at the corrupted stage.
pub fn fault_localization_demo(seed: u64) -> CheckReport {
    let m = Modulus::from_u128(crate::kernels::primes::NTT_PRIMES[0].1).unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    let n = 64;
    let good = NttPlan::new(n, m).unwrap();
    let mut bad = good.clone();
    let (stage, index) = (2usize, 5usize);
    bad.inject_twiddle_fault(stage, index);

    let eng = LaneKernel::new(Portable::with_lanes(8).unwrap());
    let x = Polynomial::random(n, &m, &mut rng);
    let good_states = good
        .forward_stage_states(&x, &eng, MulAlgo::Schoolbook)
        .unwrap();
    let bad_states = bad
        .forward_stage_states(&x, &eng, MulAlgo::Schoolbook)
        .unwrap();

    for (s, (g, b)) in good_states.iter().zip(bad_states.iter()).enumerate() {
        if let Some(lane) = (0..n).find(|&i| g[i] != b[i]) {
            return if s == stage {
                CheckReport::pass(
                    "fault localization",
                    format!("corrupted twiddle localized to stage {s}, lane {lane}"),
                )
            } else {
                CheckReport::fail(
                    "fault localization",
                    format!("expected stage {stage}, localized stage {s} lane {lane}"),
                )
            };
        }
    }
    CheckReport::fail("fault localization", "corruption not observed".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_mulmod_agrees_with_biguint_spotcheck() {
        // Self-check of the runtime oracle against an independent value.
        assert_eq!(oracle::mulmod_u128(5, 7, 17), 1);
        assert_eq!(oracle::mulmod_u128(0, 7, 17), 0);
        let q = crate::kernels::primes::NTT_PRIMES[3].1;
        let a = q - 1;
        // (q-1)^2 mod q == 1
        assert_eq!(oracle::mulmod_u128(a, a, q), 1);
    }

    #[test]
    fn suites_pass_at_reduced_sizes() {
        assert!(word_oracle_suite(2_000, 1).passed);
        assert!(dword_oracle_suite(2_000, 2).passed);
        assert!(mul_agreement_suite(2_000, 3).passed);
        assert!(modular_oracle_suite(500, 4).passed);
        for r in backend_matrix_suite(200, 5) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
        for r in mqx_equivalence_suite(60, 6) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
        for r in trace_property_suite() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
        for r in blas_suite(64, 7) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
        assert!(fault_localization_demo(8).passed);
    }

    #[test]
    fn ntt_suite_passes_at_reduced_sizes() {
        for r in ntt_suite(8, 9) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}

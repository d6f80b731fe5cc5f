//! Cross-backend and cross-engine behavior through the public API.

use dwmod::conformance::{self, oracle};
use dwmod::dword::DWord;
use dwmod::kernels::primes;
use dwmod::lane::{available_backends, backend_select, BackendKind, LaneIsa, WordVec};
use dwmod::modular::{mulmod, random_residue, Modulus, MulAlgo};
use dwmod::{build_engine, ExecBackend, MqxMode, MqxVariant, NttPlan, Polynomial};
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn backend_selection_contract() {
    // Portable is always available, native ones only with CPU support; a
    // rejected backend names the missing feature.
    let p = backend_select(BackendKind::Portable, Some(4)).unwrap();
    assert_eq!(p.lane_count(), 4);
    assert_eq!(p.name(), "portable");

    for kind in [BackendKind::Native256, BackendKind::Native512] {
        match backend_select(kind, None) {
            Ok(b) => assert_eq!(b.name(), kind.as_str()),
            Err(e) => {
                let msg = e.to_string();
                assert!(msg.contains("missing CPU feature"), "{msg}");
            }
        }
    }
    assert!(backend_select(BackendKind::Portable, Some(5)).is_err());
}

#[test]
fn conformance_suites_pass() {
    assert!(conformance::word_oracle_suite(20_000, 11).passed);
    assert!(conformance::dword_oracle_suite(20_000, 12).passed);
    assert!(conformance::mul_agreement_suite(20_000, 13).passed);
    assert!(conformance::modular_oracle_suite(2_000, 14).passed);
    for r in conformance::backend_matrix_suite(1_000, 15) {
        assert!(r.passed, "{}: {}", r.name, r.detail);
    }
    for r in conformance::mqx_equivalence_suite(300, 16) {
        assert!(r.passed, "{}: {}", r.name, r.detail);
    }
    for r in conformance::trace_property_suite() {
        assert!(r.passed, "{}: {}", r.name, r.detail);
    }
}

#[test]
fn ntt_equivalence_through_built_engines() {
    // The engines the CLI would build agree transform-for-transform.
    let m = Modulus::from_u128(primes::NTT_PRIMES[3].1).unwrap();
    let plan = NttPlan::new(256, m).unwrap();
    let mut rng = StdRng::seed_from_u64(0xabc);
    let x = Polynomial::random(256, &m, &mut rng);

    let mut outputs = Vec::new();
    let mut specs: Vec<(ExecBackend, MqxVariant)> = vec![
        (ExecBackend::Lane(BackendKind::Portable), MqxVariant::Base),
        (ExecBackend::Mqx, MqxVariant::Mc),
        (ExecBackend::Mqx, MqxVariant::MhC),
    ];
    for kind in available_backends() {
        specs.push((ExecBackend::Lane(kind), MqxVariant::Base));
    }
    for (backend, variant) in specs {
        let (eng, info) = build_engine(backend, None, MqxMode::Functional, variant).unwrap();
        let y = plan.forward(&x, eng.as_ref(), MulAlgo::Schoolbook).unwrap();
        outputs.push((info.label, y));
    }
    for (label, y) in &outputs[1..] {
        assert_eq!(y, &outputs[0].1, "{label} diverges from {}", outputs[0].0);
    }
}

#[test]
fn lane_permutation_commutes_with_arithmetic() {
    // Permuting input lanes permutes arithmetic outputs identically.
    let mut rng = StdRng::seed_from_u64(0x5150);
    let m = Modulus::from_u128(primes::NTT_PRIMES[2].1).unwrap();
    for kind in available_backends() {
        let b = backend_select(kind, None).unwrap();
        let v = b.lane_count();
        let a: Vec<_> = (0..v).map(|_| random_residue(&mut rng, &m)).collect();
        let c: Vec<_> = (0..v).map(|_| random_residue(&mut rng, &m)).collect();
        let rot = |xs: &[dwmod::Residue]| -> Vec<dwmod::Residue> {
            let mut out = xs.to_vec();
            out.rotate_left(1);
            out
        };
        let to_vec = |xs: &[dwmod::Residue]| {
            dwmod::lane::DWordVec::from_dwords(&xs.iter().map(|r| r.value()).collect::<Vec<_>>())
        };
        let direct =
            dwmod::lane::algo::v_mulmod(&b, &to_vec(&a), &to_vec(&c), &m, MulAlgo::Schoolbook);
        let rotated = dwmod::lane::algo::v_mulmod(
            &b,
            &to_vec(&rot(&a)),
            &to_vec(&rot(&c)),
            &m,
            MulAlgo::Schoolbook,
        );
        for i in 0..v {
            assert_eq!(rotated.lane(i), direct.lane((i + 1) % v));
        }
    }
}

#[test]
fn unpack_permute_reference_semantics_on_every_backend() {
    for kind in available_backends() {
        let b = backend_select(kind, None).unwrap();
        let v = b.lane_count();
        let a = WordVec::from_fn(v, |i| i as u64);
        let c = WordVec::from_fn(v, |i| (v + i) as u64);
        let lo = b.v_unpack_lo(&a, &c);
        let hi = b.v_unpack_hi(&a, &c);
        for i in 0..v {
            let j = i & !1;
            let (el, eh) = if i % 2 == 0 {
                (j as u64, (j + 1) as u64)
            } else {
                ((v + j) as u64, (v + j + 1) as u64)
            };
            assert_eq!(lo.lane(i), el, "{} unpack_lo lane {i}", b.name());
            assert_eq!(hi.lane(i), eh, "{} unpack_hi lane {i}", b.name());
        }
        // Identity and cross-select permutes.
        let idx_a = WordVec::from_fn(v, |i| i as u64);
        let idx_b = WordVec::from_fn(v, |i| (v + i) as u64);
        assert_eq!(b.v_permute2(&idx_a, &a, &c).unwrap(), a);
        assert_eq!(b.v_permute2(&idx_b, &a, &c).unwrap(), c);
        let bad = WordVec::from_fn(v, |_| 2 * v as u64);
        assert!(b.v_permute2(&bad, &a, &c).is_err());
    }
}

#[test]
fn scalar_and_vector_barrett_agree_with_double_and_add_oracle() {
    let mut rng = StdRng::seed_from_u64(0x7777);
    for m in primes::ladder() {
        let q = m.q().to_u128();
        for _ in 0..2_000 {
            let a = random_residue(&mut rng, &m);
            let b = random_residue(&mut rng, &m);
            let expect = oracle::mulmod_u128(a.value().to_u128(), b.value().to_u128(), q);
            assert_eq!(
                mulmod(a, b, &m, MulAlgo::Schoolbook).value(),
                DWord::from_u128(expect)
            );
        }
    }
}

//! Number theoretic transform in the constant-geometry dataflow.
//!
//! Every stage reads pair `(z[i], z[i+n/2])`, applies one butterfly
//! (modular add, modular subtract, modular multiply by a twiddle), and
//! writes `(out[2i], out[2i+1])` — the same data movement at every stage,
//! realized with precomputed two-source permute index vectors. The stages
//! leave results bit-reversed; a final reordering folded into the schedule
//! returns natural order. The inverse transform is the forward algorithm
//! with inverted twiddles and a final scaling by `n^-1`.

use super::primes::{find_root_of_unity, modpow, PlanError};
use super::Polynomial;
use crate::dword::DWord;
use crate::engine::ModularVectorOps;
use crate::lane::{DWordVec, WordVec, LANE_COUNTS};
use crate::modular::{addmod, mulmod, submod, Modulus, MulAlgo, Residue};

#[derive(Debug, Clone)]
struct StageTable {
    tw_hi: Vec<u64>,
    tw_lo: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NttStats {
    pub butterflies: u64,
}

/// Expected butterfly count for an `n`-point transform.
pub fn butterfly_count(n: usize) -> u64 {
    (n as u64 / 2) * n.trailing_zeros() as u64
}

/// A transform plan: size, modulus, root, per-stage twiddle tables, the
/// interleave index vectors for each supported lane width, and the output
/// reordering.
#[derive(Debug, Clone)]
pub struct NttPlan {
    n: usize,
    m: Modulus,
    omega: Residue,
    omega_inv: Residue,
    n_inv: Residue,
    fwd: Vec<StageTable>,
    inv: Vec<StageTable>,
    /// Interleave index pairs, one per entry of `LANE_COUNTS`.
    interleave: Vec<(WordVec, WordVec)>,
    bitrev: Vec<u32>,
}

impl NttPlan {
    pub fn new(n: usize, m: Modulus) -> Result<Self, PlanError> {
        if n < 2 || !n.is_power_of_two() {
            return Err(PlanError::BadSize(n));
        }
        let omega = find_root_of_unity(&m, n as u64)?;
        let q = m.q().to_u128();
        let omega_inv = modpow(omega, q - 2, &m);
        let n_res = Residue::new(DWord::from_u128(n as u128 % q), &m).expect("n mod q < q");
        let n_inv = modpow(n_res, q - 2, &m);

        let fwd = build_stage_tables(n, omega, &m);
        let inv = build_stage_tables(n, omega_inv, &m);

        let interleave = LANE_COUNTS
            .iter()
            .map(|&v| {
                let half = v as u64 / 2;
                let lo = WordVec::from_fn(v, |i| {
                    let j = i as u64 / 2;
                    if i % 2 == 0 {
                        j
                    } else {
                        v as u64 + j
                    }
                });
                let hi = WordVec::from_fn(v, |i| {
                    let j = half + i as u64 / 2;
                    if i % 2 == 0 {
                        j
                    } else {
                        v as u64 + j
                    }
                });
                (lo, hi)
            })
            .collect();

        let logn = n.trailing_zeros();
        let bitrev = (0..n as u32)
            .map(|i| i.reverse_bits() >> (32 - logn))
            .collect();

        Ok(NttPlan {
            n,
            m,
            omega,
            omega_inv,
            n_inv,
            fwd,
            inv,
            interleave,
            bitrev,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> &Modulus {
        &self.m
    }

    pub fn omega(&self) -> Residue {
        self.omega
    }

    pub fn omega_inv(&self) -> Residue {
        self.omega_inv
    }

    pub fn n_inv(&self) -> Residue {
        self.n_inv
    }

    /// Testing hook: bumps one forward twiddle to a wrong (still reduced)
    /// value so differential checks can demonstrate stage/lane
    /// localization.
    pub fn inject_twiddle_fault(&mut self, stage: usize, index: usize) {
        let one = Residue::one(&self.m);
        let old = Residue::new(
            DWord::new(self.fwd[stage].tw_hi[index], self.fwd[stage].tw_lo[index]),
            &self.m,
        )
        .expect("twiddles are reduced");
        let bad = addmod(old, one, &self.m).value();
        self.fwd[stage].tw_hi[index] = bad.hi;
        self.fwd[stage].tw_lo[index] = bad.lo;
    }

    pub fn forward(
        &self,
        x: &Polynomial,
        eng: &dyn ModularVectorOps,
        algo: MulAlgo,
    ) -> Result<Polynomial, PlanError> {
        Ok(self.forward_with_stats(x, eng, algo)?.0)
    }

    pub fn forward_with_stats(
        &self,
        x: &Polynomial,
        eng: &dyn ModularVectorOps,
        algo: MulAlgo,
    ) -> Result<(Polynomial, NttStats), PlanError> {
        let (planes, stats) = self.run_stages(x, &self.fwd, eng, algo, None)?;
        Ok((self.apply_bitrev(planes), stats))
    }

    pub fn inverse(
        &self,
        y: &Polynomial,
        eng: &dyn ModularVectorOps,
        algo: MulAlgo,
    ) -> Result<Polynomial, PlanError> {
        let (planes, _) = self.run_stages(y, &self.inv, eng, algo, None)?;
        let mut out = self.apply_bitrev(planes);
        self.scale_in_place(&mut out, self.n_inv, eng, algo);
        Ok(out)
    }

    /// Runs the forward stages and returns the state after every stage
    /// (before the final reordering). Differential verification uses this
    /// to localize the first diverging stage and lane.
    pub fn forward_stage_states(
        &self,
        x: &Polynomial,
        eng: &dyn ModularVectorOps,
        algo: MulAlgo,
    ) -> Result<Vec<Vec<DWord>>, PlanError> {
        let mut states = Vec::with_capacity(self.fwd.len());
        let _ = self.run_stages(x, &self.fwd, eng, algo, Some(&mut states))?;
        Ok(states)
    }

    fn run_stages(
        &self,
        x: &Polynomial,
        stages: &[StageTable],
        eng: &dyn ModularVectorOps,
        algo: MulAlgo,
        mut snapshots: Option<&mut Vec<Vec<DWord>>>,
    ) -> Result<(Polynomial, NttStats), PlanError> {
        if x.len() != self.n {
            return Err(PlanError::SizeMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let n = self.n;
        let half = n / 2;
        let v = eng.lane_count();
        let m = &self.m;

        let mut cur = x.clone();
        let mut next = Polynomial::zeros(n);
        let mut stats = NttStats::default();

        for table in stages {
            if v <= half {
                let slot = LANE_COUNTS.iter().position(|&c| c == v).expect("valid V");
                let (idx_lo, idx_hi) = &self.interleave[slot];
                for b0 in (0..half).step_by(v) {
                    let a = DWordVec::new(
                        WordVec::from_slice(&cur.hi[b0..b0 + v]),
                        WordVec::from_slice(&cur.lo[b0..b0 + v]),
                    );
                    let c = DWordVec::new(
                        WordVec::from_slice(&cur.hi[half + b0..half + b0 + v]),
                        WordVec::from_slice(&cur.lo[half + b0..half + b0 + v]),
                    );
                    let w = DWordVec::new(
                        WordVec::from_slice(&table.tw_hi[b0..b0 + v]),
                        WordVec::from_slice(&table.tw_lo[b0..b0 + v]),
                    );
                    let u = eng.addmod_block(m, &a, &c);
                    let t = eng.submod_block(m, &a, &c);
                    let vv = eng.mulmod_block(m, &t, &w, algo);

                    let even_hi = eng.permute2_block(idx_lo, &u.hi, &vv.hi).expect("plan idx");
                    let even_lo = eng.permute2_block(idx_lo, &u.lo, &vv.lo).expect("plan idx");
                    let odd_hi = eng.permute2_block(idx_hi, &u.hi, &vv.hi).expect("plan idx");
                    let odd_lo = eng.permute2_block(idx_hi, &u.lo, &vv.lo).expect("plan idx");

                    let o = 2 * b0;
                    next.hi[o..o + v].copy_from_slice(even_hi.as_slice());
                    next.lo[o..o + v].copy_from_slice(even_lo.as_slice());
                    next.hi[o + v..o + 2 * v].copy_from_slice(odd_hi.as_slice());
                    next.lo[o + v..o + 2 * v].copy_from_slice(odd_lo.as_slice());
                    stats.butterflies += v as u64;
                }
            } else {
                // Not enough pairs to fill a vector block: scalar butterflies.
                for i in 0..half {
                    let a = Residue::new(cur.coeff(i), m).expect("reduced");
                    let c = Residue::new(cur.coeff(half + i), m).expect("reduced");
                    let w = Residue::new(DWord::new(table.tw_hi[i], table.tw_lo[i]), m)
                        .expect("reduced");
                    let u = addmod(a, c, m);
                    let t = mulmod(submod(a, c, m), w, m, algo);
                    next.set_coeff(2 * i, u.value());
                    next.set_coeff(2 * i + 1, t.value());
                    stats.butterflies += 1;
                }
            }
            std::mem::swap(&mut cur, &mut next);
            if let Some(snaps) = snapshots.as_deref_mut() {
                snaps.push(cur.to_dwords());
            }
        }
        Ok((cur, stats))
    }

    fn apply_bitrev(&self, planes: Polynomial) -> Polynomial {
        let mut out = Polynomial::zeros(self.n);
        for i in 0..self.n {
            let r = self.bitrev[i] as usize;
            out.hi[r] = planes.hi[i];
            out.lo[r] = planes.lo[i];
        }
        out
    }

    fn scale_in_place(
        &self,
        p: &mut Polynomial,
        factor: Residue,
        eng: &dyn ModularVectorOps,
        algo: MulAlgo,
    ) {
        let v = eng.lane_count();
        let m = &self.m;
        if self.n % v == 0 {
            let fv = DWordVec::splat(v, factor.value());
            for b0 in (0..self.n).step_by(v) {
                let x = DWordVec::new(
                    WordVec::from_slice(&p.hi[b0..b0 + v]),
                    WordVec::from_slice(&p.lo[b0..b0 + v]),
                );
                let y = eng.mulmod_block(m, &x, &fv, algo);
                p.hi[b0..b0 + v].copy_from_slice(y.hi.as_slice());
                p.lo[b0..b0 + v].copy_from_slice(y.lo.as_slice());
            }
        } else {
            for i in 0..self.n {
                let x = Residue::new(p.coeff(i), m).expect("reduced");
                p.set_coeff(i, mulmod(x, factor, m, algo).value());
            }
        }
    }
}

fn build_stage_tables(n: usize, omega: Residue, m: &Modulus) -> Vec<StageTable> {
    let logn = n.trailing_zeros() as usize;
    let half = n / 2;
    let mut tables = Vec::with_capacity(logn);
    let mut w_stage = omega;
    for s in 0..logn {
        let mut tw_hi = vec![0u64; half];
        let mut tw_lo = vec![0u64; half];
        let reps = 1usize << s;
        let mut w = Residue::one(m);
        for j in 0..(n >> (s + 1)) {
            let val = w.value();
            for t in 0..reps {
                let idx = (j << s) + t;
                tw_hi[idx] = val.hi;
                tw_lo[idx] = val.lo;
            }
            w = mulmod(w, w_stage, m, MulAlgo::Schoolbook);
        }
        tables.push(StageTable { tw_hi, tw_lo });
        w_stage = mulmod(w_stage, w_stage, m, MulAlgo::Schoolbook);
    }
    tables
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::LaneKernel;
    use crate::kernels::primes;
    use crate::lane::Portable;
    use crate::modular::random_residue;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn eng8() -> LaneKernel<Portable> {
        LaneKernel::new(Portable::with_lanes(8).unwrap())
    }

    fn poly_from_u128(vals: &[u128], m: &Modulus) -> Polynomial {
        Polynomial::from_residues(
            &vals
                .iter()
                .map(|&x| Residue::new(DWord::from_u128(x), m).unwrap())
                .collect::<Vec<_>>(),
        )
    }

    /// Direct evaluation of the transform definition, used as the oracle.
    fn direct_ntt(x: &[u128], q: u128, w: u128) -> Vec<u128> {
        let m = Modulus::from_u128(q).unwrap();
        let wr = Residue::new(DWord::from_u128(w), &m).unwrap();
        (0..x.len())
            .map(|k| {
                let mut acc = Residue::ZERO;
                for (j, &xj) in x.iter().enumerate() {
                    let xr = Residue::new(DWord::from_u128(xj), &m).unwrap();
                    let term = mulmod(
                        xr,
                        modpow(wr, (j as u128) * (k as u128), &m),
                        &m,
                        MulAlgo::Schoolbook,
                    );
                    acc = addmod(acc, term, &m);
                }
                acc.value().to_u128()
            })
            .collect()
    }

    #[test]
    fn delta_transforms_to_constant() {
        let m = Modulus::from_u128(17).unwrap();
        let plan = NttPlan::new(8, m).unwrap();
        let mut vals = vec![0u128; 8];
        vals[0] = 1;
        let x = poly_from_u128(&vals, &m);
        let y = plan.forward(&x, &eng8(), MulAlgo::Schoolbook).unwrap();
        assert_eq!(y, poly_from_u128(&[1; 8], &m));
    }

    #[test]
    fn ones_transform_to_n_delta() {
        let m = Modulus::from_u128(17).unwrap();
        let plan = NttPlan::new(8, m).unwrap();
        let x = poly_from_u128(&[1; 8], &m);
        let y = plan.forward(&x, &eng8(), MulAlgo::Schoolbook).unwrap();
        let mut expect = vec![0u128; 8];
        expect[0] = 8;
        assert_eq!(y, poly_from_u128(&expect, &m));
    }

    #[test]
    fn forward_matches_direct_summation_oracle() {
        let mut rng = StdRng::seed_from_u64(0x17);
        let m = Modulus::from_u128(17).unwrap();
        let plan = NttPlan::new(8, m).unwrap();
        for _ in 0..20 {
            let vals: Vec<u128> = (0..8)
                .map(|_| random_residue(&mut rng, &m).value().to_u128())
                .collect();
            let x = poly_from_u128(&vals, &m);
            let y = plan.forward(&x, &eng8(), MulAlgo::Schoolbook).unwrap();
            let oracle = direct_ntt(&vals, 17, plan.omega().value().to_u128());
            assert_eq!(
                y.to_dwords()
                    .iter()
                    .map(|d| d.to_u128())
                    .collect::<Vec<_>>(),
                oracle
            );
        }
    }

    #[test]
    fn inverse_round_trips() {
        let mut rng = StdRng::seed_from_u64(0x1234);
        let m = Modulus::from_u128(primes::NTT_PRIMES[3].1).unwrap();
        for n in [8usize, 64, 1024] {
            let plan = NttPlan::new(n, m).unwrap();
            let x = Polynomial::random(n, &m, &mut rng);
            let y = plan.forward(&x, &eng8(), MulAlgo::Schoolbook).unwrap();
            let back = plan.inverse(&y, &eng8(), MulAlgo::Schoolbook).unwrap();
            assert_eq!(back, x, "n={n}");
        }
    }

    #[test]
    fn butterfly_count_is_exact() {
        let m = Modulus::from_u128(primes::NTT_PRIMES[0].1).unwrap();
        for n in [8usize, 16, 256, 1024] {
            let plan = NttPlan::new(n, m).unwrap();
            let x = Polynomial::zeros(n);
            let (_, stats) = plan
                .forward_with_stats(&x, &eng8(), MulAlgo::Schoolbook)
                .unwrap();
            assert_eq!(stats.butterflies, butterfly_count(n));
        }
    }

    #[test]
    fn linearity_on_random_inputs() {
        let mut rng = StdRng::seed_from_u64(0x99);
        let m = Modulus::from_u128(primes::NTT_PRIMES[1].1).unwrap();
        let n = 64;
        let plan = NttPlan::new(n, m).unwrap();
        let eng = eng8();
        let x = Polynomial::random(n, &m, &mut rng);
        let y = Polynomial::random(n, &m, &mut rng);
        let alpha = random_residue(&mut rng, &m);

        let ax = super::super::blas_scale(alpha, &x, &m, &eng, MulAlgo::Schoolbook).unwrap();
        let lhs_in = super::super::blas_vadd(&ax, &y, &m, &eng).unwrap();
        let lhs = plan.forward(&lhs_in, &eng, MulAlgo::Schoolbook).unwrap();

        let fx = plan.forward(&x, &eng, MulAlgo::Schoolbook).unwrap();
        let fy = plan.forward(&y, &eng, MulAlgo::Schoolbook).unwrap();
        let afx = super::super::blas_scale(alpha, &fx, &m, &eng, MulAlgo::Schoolbook).unwrap();
        let rhs = super::super::blas_vadd(&afx, &fy, &m, &eng).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let m = Modulus::from_u128(17).unwrap();
        let plan = NttPlan::new(8, m).unwrap();
        let x = Polynomial::zeros(16);
        assert_eq!(
            plan.forward(&x, &eng8(), MulAlgo::Schoolbook),
            Err(PlanError::SizeMismatch {
                expected: 8,
                got: 16
            })
        );
    }

    #[test]
    fn algo_choice_does_not_change_output() {
        let mut rng = StdRng::seed_from_u64(0x55);
        let m = Modulus::from_u128(primes::NTT_PRIMES[3].1).unwrap();
        let plan = NttPlan::new(256, m).unwrap();
        let x = Polynomial::random(256, &m, &mut rng);
        let a = plan.forward(&x, &eng8(), MulAlgo::Schoolbook).unwrap();
        let b = plan.forward(&x, &eng8(), MulAlgo::Karatsuba).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fault_injection_perturbs_output() {
        let m = Modulus::from_u128(primes::NTT_PRIMES[0].1).unwrap();
        let mut rng = StdRng::seed_from_u64(0x77);
        let good = NttPlan::new(64, m).unwrap();
        let mut bad = good.clone();
        bad.inject_twiddle_fault(2, 5);
        let x = Polynomial::random(64, &m, &mut rng);
        let a = good.forward(&x, &eng8(), MulAlgo::Schoolbook).unwrap();
        let b = bad.forward(&x, &eng8(), MulAlgo::Schoolbook).unwrap();
        assert_ne!(a, b);
    }
}

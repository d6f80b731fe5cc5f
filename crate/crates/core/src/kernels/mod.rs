//! Cryptographic kernels over residue vectors: point-wise BLAS-style
//! operations and the number theoretic transform.

pub mod ntt;
pub mod primes;

pub use ntt::{butterfly_count, NttPlan, NttStats};

use crate::dword::DWord;
use crate::engine::ModularVectorOps;
use crate::lane::{DWordVec, WordVec};
use crate::modular::{addmod, mulmod, random_residue, Modulus, MulAlgo, Residue};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("operand lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("length {len} is not a multiple of the {lanes}-lane block size")]
    NotLaneMultiple { len: usize, lanes: usize },
}

/// A polynomial over `Z_q` in split hi/lo coefficient planes, the only
/// storage layout the kernels use. Coefficients are reduced residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    pub(crate) hi: Vec<u64>,
    pub(crate) lo: Vec<u64>,
}

impl Polynomial {
    pub fn zeros(n: usize) -> Self {
        Polynomial {
            hi: vec![0; n],
            lo: vec![0; n],
        }
    }

    pub fn from_residues(coeffs: &[Residue]) -> Self {
        Polynomial {
            hi: coeffs.iter().map(|r| r.value().hi).collect(),
            lo: coeffs.iter().map(|r| r.value().lo).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, m: &Modulus, rng: &mut R) -> Self {
        Polynomial::from_residues(&(0..n).map(|_| random_residue(rng, m)).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.hi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hi.is_empty()
    }

    #[inline]
    pub fn coeff(&self, i: usize) -> DWord {
        DWord::new(self.hi[i], self.lo[i])
    }

    #[inline]
    pub(crate) fn set_coeff(&mut self, i: usize, v: DWord) {
        self.hi[i] = v.hi;
        self.lo[i] = v.lo;
    }

    pub fn to_dwords(&self) -> Vec<DWord> {
        (0..self.len()).map(|i| self.coeff(i)).collect()
    }

    pub fn to_residues(&self, m: &Modulus) -> Vec<Residue> {
        (0..self.len())
            .map(|i| Residue::new(self.coeff(i), m).expect("coefficients are reduced"))
            .collect()
    }
}

fn check_blas_args(
    x: &Polynomial,
    y: &Polynomial,
    eng: &dyn ModularVectorOps,
) -> Result<(), KernelError> {
    if x.len() != y.len() {
        return Err(KernelError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let v = eng.lane_count();
    if x.len() % v != 0 {
        return Err(KernelError::NotLaneMultiple {
            len: x.len(),
            lanes: v,
        });
    }
    Ok(())
}

fn block(p: &Polynomial, b0: usize, v: usize) -> DWordVec {
    DWordVec::new(
        WordVec::from_slice(&p.hi[b0..b0 + v]),
        WordVec::from_slice(&p.lo[b0..b0 + v]),
    )
}

fn store_block(p: &mut Polynomial, b0: usize, v: usize, d: &DWordVec) {
    p.hi[b0..b0 + v].copy_from_slice(d.hi.as_slice());
    p.lo[b0..b0 + v].copy_from_slice(d.lo.as_slice());
}

/// Point-wise vector addition over `Z_q`.
pub fn blas_vadd(
    x: &Polynomial,
    y: &Polynomial,
    m: &Modulus,
    eng: &dyn ModularVectorOps,
) -> Result<Polynomial, KernelError> {
    check_blas_args(x, y, eng)?;
    let v = eng.lane_count();
    let mut out = Polynomial::zeros(x.len());
    for b0 in (0..x.len()).step_by(v) {
        let r = eng.addmod_block(m, &block(x, b0, v), &block(y, b0, v));
        store_block(&mut out, b0, v, &r);
    }
    Ok(out)
}

/// Point-wise vector subtraction over `Z_q`.
pub fn blas_vsub(
    x: &Polynomial,
    y: &Polynomial,
    m: &Modulus,
    eng: &dyn ModularVectorOps,
) -> Result<Polynomial, KernelError> {
    check_blas_args(x, y, eng)?;
    let v = eng.lane_count();
    let mut out = Polynomial::zeros(x.len());
    for b0 in (0..x.len()).step_by(v) {
        let r = eng.submod_block(m, &block(x, b0, v), &block(y, b0, v));
        store_block(&mut out, b0, v, &r);
    }
    Ok(out)
}

/// Point-wise vector multiplication over `Z_q`.
pub fn blas_vpmul(
    x: &Polynomial,
    y: &Polynomial,
    m: &Modulus,
    eng: &dyn ModularVectorOps,
    algo: MulAlgo,
) -> Result<Polynomial, KernelError> {
    check_blas_args(x, y, eng)?;
    let v = eng.lane_count();
    let mut out = Polynomial::zeros(x.len());
    for b0 in (0..x.len()).step_by(v) {
        let r = eng.mulmod_block(m, &block(x, b0, v), &block(y, b0, v), algo);
        store_block(&mut out, b0, v, &r);
    }
    Ok(out)
}

/// `alpha * x + y`, element-wise over `Z_q`.
pub fn blas_axpy(
    alpha: Residue,
    x: &Polynomial,
    y: &Polynomial,
    m: &Modulus,
    eng: &dyn ModularVectorOps,
    algo: MulAlgo,
) -> Result<Polynomial, KernelError> {
    check_blas_args(x, y, eng)?;
    let v = eng.lane_count();
    let av = DWordVec::splat(v, alpha.value());
    let mut out = Polynomial::zeros(x.len());
    for b0 in (0..x.len()).step_by(v) {
        let ax = eng.mulmod_block(m, &av, &block(x, b0, v), algo);
        let r = eng.addmod_block(m, &ax, &block(y, b0, v));
        store_block(&mut out, b0, v, &r);
    }
    Ok(out)
}

/// `alpha * x`, element-wise.
pub fn blas_scale(
    alpha: Residue,
    x: &Polynomial,
    m: &Modulus,
    eng: &dyn ModularVectorOps,
    algo: MulAlgo,
) -> Result<Polynomial, KernelError> {
    check_blas_args(x, x, eng)?;
    let v = eng.lane_count();
    let av = DWordVec::splat(v, alpha.value());
    let mut out = Polynomial::zeros(x.len());
    for b0 in (0..x.len()).step_by(v) {
        let r = eng.mulmod_block(m, &av, &block(x, b0, v), algo);
        store_block(&mut out, b0, v, &r);
    }
    Ok(out)
}

/// Full schoolbook polynomial product: the degree-(nf+ng-2) coefficient
/// vector with coefficients reduced mod q. Scalar on purpose; it is the
/// oracle side of the convolution check.
pub fn poly_mul_schoolbook(f: &Polynomial, g: &Polynomial, m: &Modulus) -> Vec<Residue> {
    let (nf, ng) = (f.len(), g.len());
    let mut out = vec![Residue::ZERO; nf + ng - 1];
    for i in 0..nf {
        let fi = Residue::new(f.coeff(i), m).expect("reduced");
        for j in 0..ng {
            let gj = Residue::new(g.coeff(j), m).expect("reduced");
            let term = mulmod(fi, gj, m, MulAlgo::Schoolbook);
            out[i + j] = addmod(out[i + j], term, m);
        }
    }
    out
}

/// Verifies the convolution theorem on one input pair: the point-wise
/// product of the transforms must equal the transform of the cyclic
/// (mod `x^n - 1`) reduction of the full product.
pub fn cyclic_convolution_check(
    f: &Polynomial,
    g: &Polynomial,
    plan: &NttPlan,
    eng: &dyn ModularVectorOps,
    algo: MulAlgo,
) -> Result<bool, crate::kernels::primes::PlanError> {
    let n = plan.n();
    let m = plan.modulus();
    let ff = plan.forward(f, eng, algo)?;
    let fg = plan.forward(g, eng, algo)?;
    let pointwise = blas_vpmul(&ff, &fg, m, eng, algo).expect("transform sizes are lane multiples");

    let full = poly_mul_schoolbook(f, g, m);
    let mut folded = vec![Residue::ZERO; n];
    for (j, c) in full.into_iter().enumerate() {
        folded[j % n] = addmod(folded[j % n], c, m);
    }
    let folded_poly = Polynomial::from_residues(&folded);
    let rhs = plan.forward(&folded_poly, eng, algo)?;
    Ok(pointwise == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::LaneKernel;
    use crate::lane::Portable;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn eng8() -> LaneKernel<Portable> {
        LaneKernel::new(Portable::with_lanes(8).unwrap())
    }

    fn res(x: u128, m: &Modulus) -> Residue {
        Residue::new(DWord::from_u128(x), m).unwrap()
    }

    #[test]
    fn blas_identities() {
        let m = Modulus::from_u128(primes::NTT_PRIMES[0].1).unwrap();
        let mut rng = StdRng::seed_from_u64(0xb1a5);
        let eng = eng8();
        let x = Polynomial::random(64, &m, &mut rng);
        let zero = Polynomial::zeros(64);
        let one = Polynomial::from_residues(&vec![Residue::one(&m); 64]);

        assert_eq!(blas_vadd(&x, &zero, &m, &eng).unwrap(), x);
        assert_eq!(
            blas_vpmul(&x, &one, &m, &eng, MulAlgo::Schoolbook).unwrap(),
            x
        );
        assert_eq!(
            blas_axpy(Residue::ZERO, &x, &x, &m, &eng, MulAlgo::Schoolbook).unwrap(),
            x
        );
        assert_eq!(
            blas_axpy(Residue::one(&m), &x, &zero, &m, &eng, MulAlgo::Schoolbook).unwrap(),
            x
        );
    }

    #[test]
    fn blas_matches_scalar_replay() {
        let m = Modulus::from_u128(primes::NTT_PRIMES[3].1).unwrap();
        let mut rng = StdRng::seed_from_u64(0xb1a6);
        let eng = eng8();
        let n = 1024;
        let x = Polynomial::random(n, &m, &mut rng);
        let y = Polynomial::random(n, &m, &mut rng);
        let alpha = random_residue(&mut rng, &m);

        let add = blas_vadd(&x, &y, &m, &eng).unwrap();
        let sub = blas_vsub(&x, &y, &m, &eng).unwrap();
        let mul = blas_vpmul(&x, &y, &m, &eng, MulAlgo::Karatsuba).unwrap();
        let axpy = blas_axpy(alpha, &x, &y, &m, &eng, MulAlgo::Schoolbook).unwrap();
        for i in 0..n {
            let xi = Residue::new(x.coeff(i), &m).unwrap();
            let yi = Residue::new(y.coeff(i), &m).unwrap();
            assert_eq!(add.coeff(i), addmod(xi, yi, &m).value());
            assert_eq!(sub.coeff(i), crate::modular::submod(xi, yi, &m).value());
            assert_eq!(mul.coeff(i), mulmod(xi, yi, &m, MulAlgo::Karatsuba).value());
            assert_eq!(
                axpy.coeff(i),
                addmod(mulmod(alpha, xi, &m, MulAlgo::Schoolbook), yi, &m).value()
            );
        }
    }

    #[test]
    fn blas_rejects_bad_shapes() {
        let m = Modulus::from_u128(17).unwrap();
        let eng = eng8();
        let x = Polynomial::zeros(16);
        let y = Polynomial::zeros(24);
        assert_eq!(
            blas_vadd(&x, &y, &m, &eng),
            Err(KernelError::LengthMismatch {
                left: 16,
                right: 24
            })
        );
        let z = Polynomial::zeros(12);
        assert_eq!(
            blas_vadd(&z, &z, &m, &eng),
            Err(KernelError::NotLaneMultiple { len: 12, lanes: 8 })
        );
    }

    #[test]
    fn poly_mul_hand_cases() {
        let m = Modulus::from_u128(17).unwrap();
        // (x + 1)^2 = x^2 + 2x + 1
        let f = Polynomial::from_residues(&[res(1, &m), res(1, &m)]);
        let prod = poly_mul_schoolbook(&f, &f, &m);
        let got: Vec<u128> = prod.iter().map(|r| r.value().to_u128()).collect();
        assert_eq!(got, vec![1, 2, 1]);

        // Multiplying by the constant 1 zero-extends.
        let g = Polynomial::from_residues(&[res(5, &m), res(7, &m), res(11, &m)]);
        let one = Polynomial::from_residues(&[res(1, &m)]);
        let prod = poly_mul_schoolbook(&one, &g, &m);
        let got: Vec<u128> = prod.iter().map(|r| r.value().to_u128()).collect();
        assert_eq!(got, vec![5, 7, 11]);
    }

    #[test]
    fn poly_mul_matches_convolution_oracle() {
        let m = Modulus::from_u128(17).unwrap();
        let mut rng = StdRng::seed_from_u64(0xc0de);
        for _ in 0..50 {
            let f = Polynomial::random(8, &m, &mut rng);
            let g = Polynomial::random(8, &m, &mut rng);
            let prod = poly_mul_schoolbook(&f, &g, &m);
            for (j, c) in prod.iter().enumerate() {
                let mut acc = 0u128;
                for i in 0..=j {
                    if i < 8 && j - i < 8 {
                        acc += f.coeff(i).to_u128() * g.coeff(j - i).to_u128();
                    }
                }
                assert_eq!(c.value().to_u128(), acc % 17);
            }
        }
    }

    #[test]
    fn convolution_theorem_holds() {
        let mut rng = StdRng::seed_from_u64(0xfeed);
        let eng = eng8();

        let m = Modulus::from_u128(17).unwrap();
        let plan = NttPlan::new(8, m).unwrap();
        // Delta convolves as the identity.
        let mut d = vec![Residue::ZERO; 8];
        d[0] = Residue::one(&m);
        let delta = Polynomial::from_residues(&d);
        let g = Polynomial::random(8, &m, &mut rng);
        assert!(cyclic_convolution_check(&delta, &g, &plan, &eng, MulAlgo::Schoolbook).unwrap());
        for _ in 0..10 {
            let f = Polynomial::random(8, &m, &mut rng);
            let g = Polynomial::random(8, &m, &mut rng);
            assert!(cyclic_convolution_check(&f, &g, &plan, &eng, MulAlgo::Schoolbook).unwrap());
        }
    }
}

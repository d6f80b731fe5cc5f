//! Shipped NTT-friendly primes, probable-prime testing, and primitive
//! root-of-unity search.
//!
//! The shipped table holds one prime per benchmark bit-length, each
//! satisfying `2^17 | q - 1` so every transform size up to 2^17 shares the
//! same moduli. The values were generated ahead of time with an independent
//! arbitrary-precision sieve and are re-verified here by Miller-Rabin.

use crate::dword::DWord;
use crate::modular::{mulmod, Modulus, MulAlgo, Residue};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

/// Benchmark primes by bit-length; all are `1 mod 2^17`.
pub const NTT_PRIMES: [(u32, u128); 4] = [
    (60, 0x8000000004a0001),
    (100, 0x8000000000000000000460001),
    (120, 0x8000000000000000000000000a0001),
    (124, 0x80000000000000000000000001c0001),
];

/// Additional 123-bit prime rounding out the test-modulus ladder.
pub const PRIME_123: u128 = 0x40000000000000000000000001a0001;

/// The shipped prime for a given bit-length, if there is one.
pub fn prime_for_bits(bits: u32) -> Option<u128> {
    NTT_PRIMES.iter().find(|(b, _)| *b == bits).map(|&(_, p)| p)
}

/// The five-modulus test ladder: 60/100/120/123/124 bits.
pub fn ladder() -> Vec<Modulus> {
    let mut qs: Vec<u128> = NTT_PRIMES.iter().map(|&(_, p)| p).collect();
    qs.insert(3, PRIME_123);
    qs.into_iter()
        .map(|q| Modulus::from_u128(q).expect("ladder primes are in range"))
        .collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("modulus {0:#x} is not a (probable) prime")]
    NotPrime(u128),
    #[error("transform size {n} does not divide the group order {order}")]
    SizeDoesNotDivideOrder { n: u64, order: u128 },
    #[error("root search exhausted after {0} generator candidates")]
    SearchExhausted(u64),
    #[error("transform size {0} must be a power of two of at least 2")]
    BadSize(usize),
    #[error("input length {got} does not match plan size {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("modulus rejected: {0}")]
    BadModulus(#[from] crate::modular::ModulusError),
}

/// `base^exp mod q` by square-and-multiply.
pub fn modpow(base: Residue, mut exp: u128, m: &Modulus) -> Residue {
    let mut acc = Residue::one(m);
    let mut sq = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, sq, m, MulAlgo::Schoolbook);
        }
        sq = mulmod(sq, sq, m, MulAlgo::Schoolbook);
        exp >>= 1;
    }
    acc
}

const SMALL_PRIMES: [u128; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Miller-Rabin with the small deterministic bases plus `rounds` random
/// witnesses from a fixed seed.
pub fn is_probable_prime(q: u128, rounds: u32) -> bool {
    if q < 2 {
        return false;
    }
    for p in SMALL_PRIMES {
        if q % p == 0 {
            return q == p;
        }
    }
    if q >= 1 << 124 {
        // Out of the modulus range this crate supports.
        return false;
    }
    let m = Modulus::from_u128(q).expect("checked range");
    let mut d = q - 1;
    let mut r = 0u32;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }

    let mut rng = StdRng::seed_from_u64(0x6d72_6261);
    let witness = |a: u128| -> bool {
        // true = passes this witness (still possibly prime)
        let a = Residue::new(DWord::from_u128(a % q), &m).expect("reduced");
        if a.is_zero() {
            return true;
        }
        let qm1 = DWord::from_u128(q - 1);
        let mut x = modpow(a, d, &m);
        if x.value() == DWord::ONE || x.value() == qm1 {
            return true;
        }
        for _ in 1..r {
            x = mulmod(x, x, &m, MulAlgo::Schoolbook);
            if x.value() == qm1 {
                return true;
            }
        }
        false
    };

    for a in SMALL_PRIMES {
        if !witness(a) {
            return false;
        }
    }
    for _ in 0..rounds {
        let a = 2 + rng.random::<u128>() % (q - 2);
        if !witness(a) {
            return false;
        }
    }
    true
}

const ROOT_SEARCH_LIMIT: u64 = 10_000;

/// A primitive `n`-th root of unity mod a prime `q` with `n | q - 1`,
/// obtained as `g^((q-1)/n)` for the first candidate `g` whose image passes
/// both power checks: `w^n = 1` and `w^(n/2) != 1`.
pub fn find_root_of_unity(m: &Modulus, n: u64) -> Result<Residue, PlanError> {
    let q = m.q().to_u128();
    if !is_probable_prime(q, 64) {
        return Err(PlanError::NotPrime(q));
    }
    let order = q - 1;
    if n < 2 || order % n as u128 != 0 {
        return Err(PlanError::SizeDoesNotDivideOrder { n, order });
    }
    let exp = order / n as u128;
    for g in 2..2 + ROOT_SEARCH_LIMIT {
        if g as u128 >= q {
            break;
        }
        let cand = Residue::new(DWord::from_u128(g as u128), m).expect("g < q");
        let w = modpow(cand, exp, m);
        let w_n2 = modpow(w, n as u128 / 2, m);
        if w_n2.value() != DWord::ONE {
            let w_n = mulmod(w_n2, w_n2, m, MulAlgo::Schoolbook);
            debug_assert_eq!(w_n.value(), DWord::ONE);
            return Ok(w);
        }
    }
    Err(PlanError::SearchExhausted(ROOT_SEARCH_LIMIT))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_primes_are_probable_primes_with_ntt_order() {
        for &(bits, q) in &NTT_PRIMES {
            assert!(is_probable_prime(q, 64), "{q:#x}");
            assert_eq!((q - 1) % (1 << 17), 0);
            assert_eq!(128 - q.leading_zeros(), bits);
        }
        assert!(is_probable_prime(PRIME_123, 64));
        assert_eq!((PRIME_123 - 1) % (1 << 17), 0);
        assert_eq!(128 - PRIME_123.leading_zeros(), 123);
    }

    #[test]
    fn miller_rabin_rejects_composites() {
        for q in [1u128, 4, 15, 91, 561, 1 << 60, (1 << 59) * 3] {
            assert!(!is_probable_prime(q, 16), "{q}");
        }
        for q in [2u128, 3, 17, 97, 7681, 576460752308273153] {
            assert!(is_probable_prime(q, 16), "{q}");
        }
    }

    #[test]
    fn root_of_unity_hand_cases() {
        let m5 = Modulus::from_u128(5).unwrap();
        let w = find_root_of_unity(&m5, 4).unwrap();
        assert_eq!(w.value().to_u128(), 2);

        let m17 = Modulus::from_u128(17).unwrap();
        let w = find_root_of_unity(&m17, 8).unwrap();
        // Verified by the two power checks against an exponentiation oracle.
        assert_eq!(modpow(w, 8, &m17).value().to_u128(), 1);
        assert_ne!(modpow(w, 4, &m17).value().to_u128(), 1);

        let m13 = Modulus::from_u128(13).unwrap();
        assert_eq!(
            find_root_of_unity(&m13, 8),
            Err(PlanError::SizeDoesNotDivideOrder { n: 8, order: 12 })
        );

        let m15 = Modulus::from_u128(15).unwrap();
        assert_eq!(find_root_of_unity(&m15, 4), Err(PlanError::NotPrime(15)));
    }

    #[test]
    fn roots_verify_for_shipped_primes() {
        for m in ladder() {
            for logn in [3u32, 10, 17] {
                let n = 1u64 << logn;
                let w = find_root_of_unity(&m, n).unwrap();
                assert_eq!(modpow(w, n as u128, &m).value(), DWord::ONE);
                assert_ne!(modpow(w, n as u128 / 2, &m).value(), DWord::ONE);
            }
        }
    }
}

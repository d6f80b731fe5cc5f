//! Reduced-width model of the double-word multipliers: 8-bit machine
//! words, 16-bit double-words, mirroring the full-width algorithms step for
//! step (widening multiply from half-width partial products, Karatsuba with
//! explicit 9-bit-sum carries). Small enough to sweep every operand pair
//! exhaustively against native 32-bit products.

use super::CheckReport;

#[inline(always)]
fn mini_adc(a: u8, b: u8, ci: bool) -> (u8, bool) {
    let (t0, c0) = a.overflowing_add(b);
    let (t1, c1) = t0.overflowing_add(ci as u8);
    (t1, c0 | c1)
}

#[inline(always)]
fn mini_sbb(a: u8, b: u8, bi: bool) -> (u8, bool) {
    let (t0, b0) = a.overflowing_sub(b);
    let (t1, b1) = t0.overflowing_sub(bi as u8);
    (t1, b0 | b1)
}

#[inline(always)]
fn mini_mul_wide(a: u8, b: u8) -> (u8, u8) {
    const LO4: u8 = 0xF;
    let (al, ah) = (a & LO4, a >> 4);
    let (bl, bh) = (b & LO4, b >> 4);
    let ll = al * bl;
    let lh = al * bh;
    let hl = ah * bl;
    let hh = ah * bh;
    let t = lh + (ll >> 4);
    let u = hl + (t & LO4);
    let hi = hh + (t >> 4) + (u >> 4);
    let lo = (u << 4) | (ll & LO4);
    (hi, lo)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MiniDword {
    pub hi: u8,
    pub lo: u8,
}

impl MiniDword {
    #[inline(always)]
    pub fn from_u16(x: u16) -> Self {
        MiniDword {
            hi: (x >> 8) as u8,
            lo: x as u8,
        }
    }
}

#[inline(always)]
pub fn mini_mul_schoolbook(a: MiniDword, b: MiniDword) -> [u8; 4] {
    let (h_ll, l_ll) = mini_mul_wide(a.lo, b.lo);
    let (h_lh, l_lh) = mini_mul_wide(a.lo, b.hi);
    let (h_hl, l_hl) = mini_mul_wide(a.hi, b.lo);
    let (h_hh, l_hh) = mini_mul_wide(a.hi, b.hi);

    let w0 = l_ll;
    let (s1, c1) = mini_adc(h_ll, l_lh, false);
    let (w1, c2) = mini_adc(s1, l_hl, false);
    let (s2, c3) = mini_adc(h_lh, h_hl, c1);
    let (w2, c4) = mini_adc(s2, l_hh, c2);
    let (s3, _) = mini_adc(h_hh, 0, c3);
    let (w3, _) = mini_adc(s3, 0, c4);
    [w0, w1, w2, w3]
}

#[inline(always)]
pub fn mini_mul_karatsuba(a: MiniDword, b: MiniDword) -> [u8; 4] {
    let (h_ll, l_ll) = mini_mul_wide(a.lo, b.lo);
    let (h_hh, l_hh) = mini_mul_wide(a.hi, b.hi);

    let (sa, ca) = mini_adc(a.hi, a.lo, false);
    let (sb, cb) = mini_adc(b.hi, b.lo, false);
    let (h_m, l_m) = mini_mul_wide(sa, sb);

    let mut m0 = l_m;
    let mut m1 = h_m;
    let mut m2 = 0u8;
    let (t, k) = mini_adc(m1, if ca { sb } else { 0 }, false);
    m1 = t;
    m2 += k as u8;
    let (t, k) = mini_adc(m1, if cb { sa } else { 0 }, false);
    m1 = t;
    m2 += k as u8;
    m2 += (ca && cb) as u8;

    let (t, bb) = mini_sbb(m0, l_hh, false);
    m0 = t;
    let (t, bb) = mini_sbb(m1, h_hh, bb);
    m1 = t;
    let (t, _) = mini_sbb(m2, 0, bb);
    m2 = t;
    let (t, bb) = mini_sbb(m0, l_ll, false);
    m0 = t;
    let (t, bb) = mini_sbb(m1, h_ll, bb);
    m1 = t;
    let (t, _) = mini_sbb(m2, 0, bb);
    m2 = t;

    let w0 = l_ll;
    let (w1, c) = mini_adc(h_ll, m0, false);
    let (w2, c) = mini_adc(l_hh, m1, c);
    let (w3, _) = mini_adc(h_hh, m2, c);
    [w0, w1, w2, w3]
}

#[inline(always)]
fn to_u32(w: [u8; 4]) -> u32 {
    w[0] as u32 | (w[1] as u32) << 8 | (w[2] as u32) << 16 | (w[3] as u32) << 24
}

fn sweep_range(a_from: u32, a_to: u32) -> u64 {
    let mut bad = 0u64;
    for a in a_from..a_to {
        let ad = MiniDword::from_u16(a as u16);
        for b in 0..=u16::MAX as u32 {
            let bd = MiniDword::from_u16(b as u16);
            let s = mini_mul_schoolbook(ad, bd);
            let k = mini_mul_karatsuba(ad, bd);
            let expect = a * b;
            if to_u32(s) != expect || s != k {
                bad += 1;
            }
        }
    }
    bad
}

/// Exhaustive sweep of all 2^32 operand pairs at the reduced width, split
/// across threads. Both multipliers must match the native product and each
/// other everywhere.
pub fn mini_mul_exhaustive() -> CheckReport {
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let total = u16::MAX as u32 + 1;
    let chunk = total.div_ceil(threads as u32);
    let bad: u64 = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for t in 0..threads as u32 {
            let from = t * chunk;
            let to = (from + chunk).min(total);
            handles.push(scope.spawn(move || sweep_range(from, to)));
        }
        handles.into_iter().map(|h| h.join().unwrap()).sum()
    });
    if bad == 0 {
        CheckReport::pass(
            "exhaustive reduced-width multiplier sweep",
            format!(
                "all {} operand pairs agree",
                (total as u64) * (total as u64)
            ),
        )
    } else {
        CheckReport::fail(
            "exhaustive reduced-width multiplier sweep",
            format!("{bad} mismatching pairs"),
        )
    }
}

/// Random subset of the reduced-width sweep for quick runs.
pub fn mini_mul_random(cases: usize, seed: u64) -> CheckReport {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(seed);
    let mut bad = 0usize;
    for _ in 0..cases {
        let a: u16 = rng.random();
        let b: u16 = rng.random();
        let s = mini_mul_schoolbook(MiniDword::from_u16(a), MiniDword::from_u16(b));
        let k = mini_mul_karatsuba(MiniDword::from_u16(a), MiniDword::from_u16(b));
        if to_u32(s) != a as u32 * b as u32 || s != k {
            bad += 1;
        }
    }
    CheckReport::from_mismatches("reduced-width multiplier random sweep", cases, bad)
}

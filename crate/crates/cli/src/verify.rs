//! The `verify` subcommand: runs the oracle, differential, and trace
//! suites and reports pass/fail per invariant.

use dwmod::conformance::{self, mini, CheckReport};

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Randomized cases per scalar operation.
    pub cases: usize,
    /// Lane blocks per backend pair and vector operation.
    pub blocks: usize,
    /// Largest transform size (log2) for round trips and equivalence.
    pub max_ntt_log2: u32,
    /// Run the exhaustive reduced-width multiplier sweep.
    pub exhaustive_mini: bool,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            cases: 20_000,
            blocks: 2_000,
            max_ntt_log2: 12,
            exhaustive_mini: false,
            seed: 0x5eed,
        }
    }
}

impl VerifyOptions {
    /// The full gate: acceptance-sized corpora.
    pub fn full() -> Self {
        VerifyOptions {
            cases: 100_000,
            blocks: 10_000,
            max_ntt_log2: 16,
            exhaustive_mini: true,
            seed: 0x5eed,
        }
    }
}

pub fn run_verify(opts: &VerifyOptions) -> Vec<CheckReport> {
    let mut reports = Vec::new();
    let seed = opts.seed;

    reports.push(conformance::word_oracle_suite(opts.cases, seed));
    reports.push(conformance::dword_oracle_suite(opts.cases, seed ^ 1));
    reports.push(conformance::mul_agreement_suite(opts.cases, seed ^ 2));
    reports.push(conformance::modular_oracle_suite(
        opts.cases / 5 + 1,
        seed ^ 3,
    ));
    if opts.exhaustive_mini {
        reports.push(mini::mini_mul_exhaustive());
    } else {
        reports.push(mini::mini_mul_random(opts.cases, seed ^ 4));
    }
    reports.extend(conformance::backend_matrix_suite(opts.blocks, seed ^ 5));
    reports.extend(conformance::mqx_equivalence_suite(
        opts.blocks / 4 + 1,
        seed ^ 6,
    ));
    reports.extend(conformance::trace_property_suite());
    reports.extend(conformance::ntt_suite(opts.max_ntt_log2, seed ^ 7));
    reports.extend(conformance::blas_suite(1024, seed ^ 8));
    reports.push(conformance::fault_localization_demo(seed ^ 9));
    reports
}

/// Prints one line per check; returns whether everything passed.
pub fn print_reports(reports: &[CheckReport]) -> bool {
    let mut ok = true;
    for r in reports {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:<48} {}", r.name, r.detail);
        ok &= r.passed;
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("verify: {} checks, {} failed", reports.len(), failed);
    ok
}

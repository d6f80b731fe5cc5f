//! `dwbench`: benchmark and analysis driver for the double-word modular
//! kernels. Subcommands: `bench`, `verify`, `roofline`, `pisa-error`,
//! `pisa-check`.

use clap::{Args, Parser, Subcommand};
use dwbench::{harness, models, pisa, records, verify};
use dwmod::engine::ExecBackend;
use dwmod::lane::BackendKind;
use dwmod::modular::MulAlgo;
use dwmod::mqx::{MqxMode, MqxVariant};
use harness::{BenchSpec, Kernel};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dwbench",
    about = "Benchmarks and analysis for 128-bit modular kernels over scalar, vector-ISA, and emulated multi-word extension backends"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Time a kernel under the fixed warmup/measure protocol.
    Bench(BenchArgs),
    /// Run the oracle, differential, and trace suites; exit nonzero on any failure.
    Verify(VerifyArgs),
    /// Project measured runtimes onto a target CPU (speed-of-light model).
    Roofline(RooflineArgs),
    /// Relative error between matching target and proxy measurement CSVs.
    PisaError(PisaErrorArgs),
    /// Target-vs-proxy substitution timings for existing instructions.
    PisaCheck(PisaCheckArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// ntt, vadd, vsub, vpmul, or axpy.
    #[arg(long, default_value = "ntt")]
    kernel: Kernel,
    /// Sizes: "2^10..2^16" (doubling range), "2^12", "1024,2048", ...
    #[arg(long)]
    sizes: Option<String>,
    /// portable, native-256, native-512, or mqx.
    #[arg(long, default_value = "portable")]
    backend: ExecBackend,
    /// Lane count for the portable backend (2, 4, 8, 16).
    #[arg(long)]
    lanes: Option<usize>,
    /// functional or pisa.
    #[arg(long, default_value = "functional")]
    mqx_mode: MqxMode,
    /// base, m, c, mc, mhc, or mcp. Defaults to mc for --backend mqx and
    /// base otherwise.
    #[arg(long)]
    mqx_variant: Option<MqxVariant>,
    /// schoolbook or karatsuba.
    #[arg(long, default_value = "schoolbook")]
    algo: MulAlgo,
    /// Modulus bit-length from the shipped prime table (60, 100, 120, 124).
    #[arg(long, default_value_t = harness::DEFAULT_MODULUS_BITS)]
    modulus_bits: u32,
    /// Total runs (default: 100 for ntt, 1000 for the point-wise kernels).
    #[arg(long)]
    iterations: Option<u32>,
    /// Untimed warmup runs (default: half of the total).
    #[arg(long)]
    warmup: Option<u32>,
    #[arg(long, default_value_t = harness::DEFAULT_SEED)]
    seed: u64,
    /// Write records as CSV to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// table or csv (stdout).
    #[arg(long, default_value = "table")]
    format: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run every suite (this is also the default behavior).
    #[arg(long)]
    all: bool,
    /// Acceptance-sized corpora, the exhaustive reduced-width sweep, and
    /// transforms up to 2^16.
    #[arg(long)]
    full: bool,
    /// Randomized cases per scalar operation.
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
}

#[derive(Args)]
struct RooflineArgs {
    /// Measurement CSV produced by `bench --out`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Target CPU spec file (key = value).
    #[arg(long)]
    cpu: PathBuf,
    /// Spec file of the CPU the measurement ran on; its max clock is used
    /// as the measured frequency.
    #[arg(long)]
    measured_cpu: Option<PathBuf>,
    /// Measured operating frequency in GHz (alternative to --measured-cpu).
    #[arg(long)]
    fm_ghz: Option<f64>,
    /// Cores used in the measurement.
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    /// Optional baseline CSV (name,kernel,size,ns) for ratio columns.
    #[arg(long)]
    baselines: Option<PathBuf>,
    /// Write projection rows as CSV to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PisaErrorArgs {
    /// CSV of measurements with the target instructions.
    #[arg(long)]
    target: PathBuf,
    /// CSV of measurements with the proxy instructions.
    #[arg(long)]
    proxy: PathBuf,
}

#[derive(Args)]
struct PisaCheckArgs {
    /// portable, native-256, or native-512 (default: widest available).
    #[arg(long)]
    backend: Option<BackendKind>,
    #[arg(long)]
    lanes: Option<usize>,
    #[arg(long, default_value_t = 2_000)]
    iterations: u32,
    /// Insert the extra mask-dependency guard in the proxy stream.
    #[arg(long)]
    conservative: bool,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
}

fn parse_size_token(tok: &str) -> Result<usize, String> {
    let tok = tok.trim();
    if let Some(exp) = tok.strip_prefix("2^") {
        let e: u32 = exp
            .parse()
            .map_err(|_| format!("bad exponent in '{tok}'"))?;
        if e >= usize::BITS {
            return Err(format!("size 2^{e} is out of range"));
        }
        Ok(1usize << e)
    } else {
        tok.parse().map_err(|_| format!("bad size '{tok}'"))
    }
}

/// "a..b" doubles from a to b inclusive; comma-separated tokens accumulate.
fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo = parse_size_token(lo)?;
            let hi = parse_size_token(hi)?;
            if lo == 0 || hi < lo {
                return Err(format!("bad range '{part}'"));
            }
            if !lo.is_power_of_two() || !hi.is_power_of_two() {
                return Err(format!("range '{part}' must span powers of two"));
            }
            let mut v = lo;
            while v <= hi {
                out.push(v);
                v *= 2;
            }
        } else {
            out.push(parse_size_token(part)?);
        }
    }
    if out.is_empty() {
        return Err("no sizes given".into());
    }
    Ok(out)
}

fn cmd_bench(args: BenchArgs) -> Result<(), String> {
    let variant = args.mqx_variant.unwrap_or(match args.backend {
        ExecBackend::Mqx => MqxVariant::Mc,
        _ => MqxVariant::Base,
    });
    let mut spec = BenchSpec::new(args.kernel, args.backend);
    spec.lanes = args.lanes;
    spec.mode = args.mqx_mode;
    spec.variant = variant;
    spec.algo = args.algo;
    spec.modulus_bits = args.modulus_bits;
    spec.seed = args.seed;
    if let Some(sizes) = &args.sizes {
        spec.sizes = parse_sizes(sizes)?;
    }
    if let Some(iters) = args.iterations {
        spec.iterations = iters;
        spec.warmup = iters / 2;
    }
    if let Some(warmup) = args.warmup {
        spec.warmup = warmup;
    }

    let recs = harness::run_bench(&spec).map_err(|e| e.to_string())?;
    match args.format.as_str() {
        "table" => records::print_table(&recs),
        "csv" => records::write_csv(std::io::stdout(), &recs).map_err(|e| e.to_string())?,
        other => return Err(format!("unknown format '{other}' (table or csv)")),
    }
    if let Some(path) = &args.out {
        let f = std::fs::File::create(path).map_err(|e| e.to_string())?;
        records::write_csv(f, &recs).map_err(|e| e.to_string())?;
        eprintln!("wrote {} records to {}", recs.len(), path.display());
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<bool, String> {
    let mut opts = if args.full {
        verify::VerifyOptions::full()
    } else {
        verify::VerifyOptions::default()
    };
    opts.seed = args.seed;
    if let Some(cases) = args.cases {
        opts.cases = cases;
        opts.blocks = cases / 10 + 1;
    }
    let reports = verify::run_verify(&opts);
    Ok(verify::print_reports(&reports))
}

fn cmd_roofline(args: RooflineArgs) -> Result<(), String> {
    let input =
        std::fs::File::open(&args.input).map_err(|e| format!("{}: {e}", args.input.display()))?;
    let recs = records::read_csv(input).map_err(|e| e.to_string())?;
    let cpu = models::CpuSpec::load(&args.cpu).map_err(|e| e.to_string())?;
    let f_m = match (args.fm_ghz, &args.measured_cpu) {
        (Some(f), _) => f,
        (None, Some(path)) => {
            models::CpuSpec::load(path)
                .map_err(|e| e.to_string())?
                .max_ghz
        }
        (None, None) => {
            return Err("measured frequency required: pass --fm-ghz or --measured-cpu".into())
        }
    };
    let baselines = match &args.baselines {
        Some(path) => {
            let f = std::fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
            models::read_baselines(f).map_err(|e| e.to_string())?
        }
        None => Vec::new(),
    };
    let rows = models::analyze(&recs, &cpu, f_m, args.c1, &baselines).map_err(|e| e.to_string())?;
    for r in &rows {
        if let Some(w) = models::sol_warning(&models::SolInput {
            t_m_ns: r.measured_normalized_ns,
            c1: r.c1,
            c2: r.cores as f64,
            f_m_ghz: r.f_m_ghz,
            f_max_ghz: r.f_max_ghz,
        }) {
            eprintln!("warning: {w}");
            break;
        }
    }
    models::print_sol_table(&rows);
    if let Some(path) = &args.out {
        let f = std::fs::File::create(path).map_err(|e| e.to_string())?;
        models::write_sol_csv(f, &rows).map_err(|e| e.to_string())?;
        eprintln!("wrote {} projection rows to {}", rows.len(), path.display());
    }
    Ok(())
}

fn cmd_pisa_error(args: PisaErrorArgs) -> Result<(), String> {
    let t = records::read_csv(
        std::fs::File::open(&args.target).map_err(|e| format!("{}: {e}", args.target.display()))?,
    )
    .map_err(|e| e.to_string())?;
    let p = records::read_csv(
        std::fs::File::open(&args.proxy).map_err(|e| format!("{}: {e}", args.proxy.display()))?,
    )
    .map_err(|e| e.to_string())?;

    println!(
        "{:<6} {:>8} {:>14} {:>14} {:>10}",
        "kernel", "size", "target ns", "proxy ns", "epsilon"
    );
    let mut matched = 0;
    for tr in &t {
        if let Some(pr) = p
            .iter()
            .find(|r| r.kernel == tr.kernel && r.size == tr.size)
        {
            let eps = models::pisa_error(&models::PisaPair {
                t_target_ns: tr.normalized_ns,
                t_proxy_ns: pr.normalized_ns,
            })
            .map_err(|e| e.to_string())?;
            println!(
                "{:<6} {:>8} {:>14.4} {:>14.4} {:>9.2}%",
                tr.kernel, tr.size, tr.normalized_ns, pr.normalized_ns, eps
            );
            matched += 1;
        }
    }
    if matched == 0 {
        return Err("no (kernel, size) rows matched between the two files".into());
    }
    Ok(())
}

fn cmd_pisa_check(args: PisaCheckArgs) -> Result<(), String> {
    let kind = args.backend.unwrap_or_else(|| {
        *dwmod::lane::available_backends()
            .last()
            .expect("portable is always available")
    });
    let (rows, note) = pisa::run_pisa_check(
        kind,
        args.lanes,
        args.iterations,
        args.conservative,
        args.seed,
    )
    .map_err(|e| e.to_string())?;
    pisa::print_rows(kind.as_str(), &rows, &note);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Bench(args) => cmd_bench(args).map(|_| true),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Roofline(args) => cmd_roofline(args).map(|_| true),
        Cmd::PisaError(args) => cmd_pisa_error(args).map(|_| true),
        Cmd::PisaCheck(args) => cmd_pisa_check(args).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

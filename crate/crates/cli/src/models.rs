//! Performance models: the proxy-ISA relative-error metric and the
//! speed-of-light (SOL) projection.
//!
//! SOL scales a measured runtime by core count and frequency ratios:
//! `t_sol = t_m * (c1/c2) * (f_m/f_max)`. It is an idealized upper bound
//! and every projection this module emits is labeled as such; no
//! achievability claim is made.

use crate::records::BenchRecord;
use std::collections::HashMap;
use std::io::Read;
use thiserror::Error;

pub const SOL_LABEL: &str = "speed-of-light (idealized)";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{field} must be strictly positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("cpu spec line {line}: {message}")]
    SpecParse { line: usize, message: String },
    #[error("cpu spec is missing required key '{0}'")]
    SpecMissing(&'static str),
    #[error("baseline CSV line {line}: {message}")]
    BaselineParse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A matched target/proxy timing pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PisaPair {
    pub t_target_ns: f64,
    pub t_proxy_ns: f64,
}

/// Relative error of the proxy projection, in percent:
/// `(t_target - t_proxy) / t_target * 100`. Negative values mean the proxy
/// ran slower than the target (a conservative projection).
pub fn pisa_error(p: &PisaPair) -> Result<f64, ModelError> {
    if p.t_target_ns <= 0.0 {
        return Err(ModelError::NonPositive {
            field: "t_target_ns",
            value: p.t_target_ns,
        });
    }
    Ok((p.t_target_ns - p.t_proxy_ns) / p.t_target_ns * 100.0)
}

/// Inputs to the SOL projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolInput {
    pub t_m_ns: f64,
    /// Cores used in the measurement (1 for this harness).
    pub c1: f64,
    /// Cores on the projection target.
    pub c2: f64,
    pub f_m_ghz: f64,
    pub f_max_ghz: f64,
}

/// `t_m * (c1/c2) * (f_m/f_max)` in double precision.
pub fn sol_project(s: &SolInput) -> Result<f64, ModelError> {
    for (field, value) in [
        ("t_m_ns", s.t_m_ns),
        ("c1", s.c1),
        ("c2", s.c2),
        ("f_m_ghz", s.f_m_ghz),
        ("f_max_ghz", s.f_max_ghz),
    ] {
        if value <= 0.0 || !value.is_finite() {
            return Err(ModelError::NonPositive { field, value });
        }
    }
    Ok(s.t_m_ns * (s.c1 / s.c2) * (s.f_m_ghz / s.f_max_ghz))
}

/// Warn (do not reject) when the measurement used more cores than the
/// target has.
pub fn sol_warning(s: &SolInput) -> Option<String> {
    if s.c1 > s.c2 {
        Some(format!(
            "measurement cores ({}) exceed target cores ({}); projection scales down",
            s.c1, s.c2
        ))
    } else {
        None
    }
}

/// A CPU description from a plain key = value spec file.
#[derive(Debug, Clone, PartialEq)]
pub struct CpuSpec {
    pub name: String,
    pub cores: u32,
    pub base_ghz: f64,
    pub max_ghz: f64,
    pub all_core_boost_ghz: Option<f64>,
    pub l3_mb: Option<f64>,
}

impl CpuSpec {
    /// The frequency a whole-chip projection should assume: the all-core
    /// boost when known, otherwise the max clock.
    pub fn target_frequency_ghz(&self) -> f64 {
        self.all_core_boost_ghz.unwrap_or(self.max_ghz)
    }

    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut map: HashMap<String, String> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ModelError::SpecParse {
                line: i + 1,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        let get = |k: &'static str| map.get(k).ok_or(ModelError::SpecMissing(k));
        let num = |k: &'static str| -> Result<f64, ModelError> {
            let raw = get(k)?;
            let v: f64 = raw.parse().map_err(|_| ModelError::SpecParse {
                line: 0,
                message: format!("key '{k}' has non-numeric value '{raw}'"),
            })?;
            if v <= 0.0 {
                return Err(ModelError::NonPositive { field: k, value: v });
            }
            Ok(v)
        };
        let opt_num = |k: &'static str| -> Result<Option<f64>, ModelError> {
            match map.get(k) {
                None => Ok(None),
                Some(raw) => {
                    let v: f64 = raw.parse().map_err(|_| ModelError::SpecParse {
                        line: 0,
                        message: format!("key '{k}' has non-numeric value '{raw}'"),
                    })?;
                    if v <= 0.0 {
                        return Err(ModelError::NonPositive { field: k, value: v });
                    }
                    Ok(Some(v))
                }
            }
        };
        Ok(CpuSpec {
            name: get("name")?.clone(),
            cores: num("cores")? as u32,
            base_ghz: num("base_ghz")?,
            max_ghz: num("max_ghz")?,
            all_core_boost_ghz: opt_num("all_core_boost_ghz")?,
            l3_mb: opt_num("l3_mb")?,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ModelError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// A user-supplied reference timing (accelerator or other implementation).
#[derive(Debug, Clone, PartialEq)]
pub struct Baseline {
    pub name: String,
    pub kernel: String,
    pub size: u64,
    pub ns: f64,
}

/// Baseline CSV: `name,kernel,size,ns` with a header row.
pub fn read_baselines<R: Read>(r: R) -> Result<Vec<Baseline>, ModelError> {
    let mut reader = csv::Reader::from_reader(r);
    let header = reader
        .headers()
        .map_err(|e| ModelError::BaselineParse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let want = ["name", "kernel", "size", "ns"];
    let mut cols = [0usize; 4];
    for (slot, name) in cols.iter_mut().zip(want.iter()) {
        *slot = header
            .iter()
            .position(|h| h == *name)
            .ok_or(ModelError::BaselineParse {
                line: 1,
                message: format!("missing column '{name}'"),
            })?;
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| ModelError::BaselineParse {
            line,
            message: e.to_string(),
        })?;
        let parse_err = |column: &str, value: &str| ModelError::BaselineParse {
            line,
            message: format!("column '{column}': invalid value '{value}'"),
        };
        let size_raw = row.get(cols[2]).unwrap_or("");
        let ns_raw = row.get(cols[3]).unwrap_or("");
        out.push(Baseline {
            name: row.get(cols[0]).unwrap_or("").to_string(),
            kernel: row.get(cols[1]).unwrap_or("").to_string(),
            size: size_raw.parse().map_err(|_| parse_err("size", size_raw))?,
            ns: ns_raw.parse().map_err(|_| parse_err("ns", ns_raw))?,
        });
    }
    Ok(out)
}

/// One projection row: the measured record scaled onto a target CPU, with
/// optional baseline comparisons.
#[derive(Debug, Clone)]
pub struct SolRow {
    pub kernel: String,
    pub size: u64,
    pub engine: String,
    pub measured_normalized_ns: f64,
    pub cpu: String,
    pub cores: u32,
    pub f_m_ghz: f64,
    pub f_max_ghz: f64,
    pub c1: f64,
    pub sol_normalized_ns: f64,
    pub label: &'static str,
    /// (baseline name, baseline ns, ratio text)
    pub baselines: Vec<(String, f64, String)>,
}

/// Projects every record onto the target CPU; a pure function of its
/// inputs. Baselines are matched on (kernel, size) and reported as
/// dimensionless ratios with an explicit direction.
pub fn analyze(
    records: &[BenchRecord],
    cpu: &CpuSpec,
    f_m_ghz: f64,
    c1: f64,
    baselines: &[Baseline],
) -> Result<Vec<SolRow>, ModelError> {
    let f_max = cpu.target_frequency_ghz();
    let mut rows = Vec::with_capacity(records.len());
    for r in records {
        let input = SolInput {
            t_m_ns: r.normalized_ns,
            c1,
            c2: cpu.cores as f64,
            f_m_ghz,
            f_max_ghz: f_max,
        };
        let sol = sol_project(&input)?;
        let mut base_rows = Vec::new();
        for b in baselines {
            if b.kernel == r.kernel && b.size == r.size {
                let ratio = if sol <= b.ns {
                    format!("{:.3}x faster than {}", b.ns / sol, b.name)
                } else {
                    format!("{:.3}x slower than {}", sol / b.ns, b.name)
                };
                base_rows.push((b.name.clone(), b.ns, ratio));
            }
        }
        let engine = if r.mqx_variant == "base" {
            r.backend.clone()
        } else {
            format!("{}[{},{}]", r.backend, r.mqx_mode, r.mqx_variant)
        };
        rows.push(SolRow {
            kernel: r.kernel.clone(),
            size: r.size,
            engine,
            measured_normalized_ns: r.normalized_ns,
            cpu: cpu.name.clone(),
            cores: cpu.cores,
            f_m_ghz,
            f_max_ghz: f_max,
            c1,
            sol_normalized_ns: sol,
            label: SOL_LABEL,
            baselines: base_rows,
        });
    }
    Ok(rows)
}

pub fn write_sol_csv<W: std::io::Write>(w: W, rows: &[SolRow]) -> Result<(), std::io::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "kernel",
        "size",
        "engine",
        "measured_ns",
        "cpu",
        "cores",
        "f_m_ghz",
        "f_max_ghz",
        "c1",
        "sol_ns",
        "label",
        "baseline",
        "baseline_ns",
        "ratio",
    ])
    .map_err(std::io::Error::other)?;
    for r in rows {
        let write_one = |out: &mut csv::Writer<W>,
                         base: Option<&(String, f64, String)>|
         -> Result<(), std::io::Error> {
            let (bn, bns, ratio) = match base {
                Some((n, ns, r)) => (n.clone(), ns.to_string(), r.clone()),
                None => (String::new(), String::new(), String::new()),
            };
            out.write_record([
                r.kernel.as_str(),
                &r.size.to_string(),
                r.engine.as_str(),
                &r.measured_normalized_ns.to_string(),
                r.cpu.as_str(),
                &r.cores.to_string(),
                &r.f_m_ghz.to_string(),
                &r.f_max_ghz.to_string(),
                &r.c1.to_string(),
                &r.sol_normalized_ns.to_string(),
                r.label,
                &bn,
                &bns,
                &ratio,
            ])
            .map_err(std::io::Error::other)
        };
        if r.baselines.is_empty() {
            write_one(&mut out, None)?;
        } else {
            for b in &r.baselines {
                write_one(&mut out, Some(b))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn print_sol_table(rows: &[SolRow]) {
    println!(
        "{:<6} {:>8} {:<28} {:>14} {:<26} {:>14}  {}",
        "kernel", "size", "engine", "measured ns", "target cpu", "sol ns", "label"
    );
    for r in rows {
        println!(
            "{:<6} {:>8} {:<28} {:>14.4} {:<26} {:>14.4}  {}",
            r.kernel,
            r.size,
            r.engine,
            r.measured_normalized_ns,
            r.cpu,
            r.sol_normalized_ns,
            r.label
        );
        for (name, ns, ratio) in &r.baselines {
            println!("{:>60}  vs {name} ({ns} ns): {ratio}", "");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pisa_error_fixtures() {
        let e = pisa_error(&PisaPair {
            t_target_ns: 100.0,
            t_proxy_ns: 100.0,
        })
        .unwrap();
        assert_eq!(e, 0.0);
        let e = pisa_error(&PisaPair {
            t_target_ns: 100.0,
            t_proxy_ns: 92.0,
        })
        .unwrap();
        assert!((e - 8.0).abs() < 1e-12);
        // Proxy slower than target: negative, the conservative direction.
        let e = pisa_error(&PisaPair {
            t_target_ns: 100.0,
            t_proxy_ns: 108.0,
        })
        .unwrap();
        assert!(e < 0.0);
        assert!(pisa_error(&PisaPair {
            t_target_ns: 0.0,
            t_proxy_ns: 1.0
        })
        .is_err());
    }

    #[test]
    fn sol_identity_and_reference_fixture() {
        let id = sol_project(&SolInput {
            t_m_ns: 123.456,
            c1: 1.0,
            c2: 1.0,
            f_m_ghz: 2.4,
            f_max_ghz: 2.4,
        })
        .unwrap();
        assert_eq!(id, 123.456);

        // Single-core measurement at 3.7 GHz projected onto 192 cores at
        // 3.35 GHz all-core boost.
        let sol = sol_project(&SolInput {
            t_m_ns: 1000.0,
            c1: 1.0,
            c2: 192.0,
            f_m_ghz: 3.7,
            f_max_ghz: 3.35,
        })
        .unwrap();
        assert!((sol - 5.753).abs() < 0.001, "got {sol}");
    }

    #[test]
    fn sol_halving_cores_doubles_time() {
        let base = SolInput {
            t_m_ns: 777.0,
            c1: 1.0,
            c2: 128.0,
            f_m_ghz: 3.4,
            f_max_ghz: 3.2,
        };
        let full = sol_project(&base).unwrap();
        let halved = sol_project(&SolInput { c2: 64.0, ..base }).unwrap();
        assert!((halved - 2.0 * full).abs() < 1e-9);
    }

    #[test]
    fn sol_rejects_and_warns() {
        assert!(sol_project(&SolInput {
            t_m_ns: -1.0,
            c1: 1.0,
            c2: 1.0,
            f_m_ghz: 1.0,
            f_max_ghz: 1.0
        })
        .is_err());
        let s = SolInput {
            t_m_ns: 1.0,
            c1: 4.0,
            c2: 2.0,
            f_m_ghz: 1.0,
            f_max_ghz: 1.0,
        };
        assert!(sol_project(&s).is_ok());
        assert!(sol_warning(&s).is_some());
    }

    #[test]
    fn cpu_spec_parses_and_falls_back() {
        let text = "# target\nname = Example CPU\ncores = 192\nbase_ghz = 2.25\nmax_ghz = 3.7\nall_core_boost_ghz = 3.35\nl3_mb = 384\n";
        let spec = CpuSpec::parse(text).unwrap();
        assert_eq!(spec.cores, 192);
        assert_eq!(spec.target_frequency_ghz(), 3.35);

        let no_boost = "name = X\ncores = 8\nbase_ghz = 2.0\nmax_ghz = 3.0\n";
        let spec = CpuSpec::parse(no_boost).unwrap();
        assert_eq!(spec.target_frequency_ghz(), 3.0);

        assert!(matches!(
            CpuSpec::parse("name = X\ncores = 8\nbase_ghz = 2.0"),
            Err(ModelError::SpecMissing("max_ghz"))
        ));
    }

    #[test]
    fn analyze_composes_sol_per_record() {
        let rec = crate::records::BenchRecord {
            kernel: "ntt".into(),
            size: 4096,
            backend: "mqx".into(),
            mqx_mode: "pisa".into(),
            mqx_variant: "mc".into(),
            algo: "schoolbook".into(),
            modulus_bits: 124,
            lanes: 8,
            iterations: 100,
            warmup: 50,
            total_ns: 24576.0,
            unit: "butterfly".into(),
            unit_count: 24576,
            normalized_ns: 1.0,
            checksum: "0".into(),
            pinned: true,
            host: "h".into(),
            seed: 1,
            timestamp: 0,
        };
        let cpu = CpuSpec {
            name: "T".into(),
            cores: 100,
            base_ghz: 2.0,
            max_ghz: 4.0,
            all_core_boost_ghz: Some(2.0),
            l3_mb: None,
        };
        let rows = analyze(&[rec], &cpu, 4.0, 1.0, &[]).unwrap();
        assert_eq!(rows.len(), 1);
        // 1.0 * (1/100) * (4.0/2.0) = 0.02
        assert!((rows[0].sol_normalized_ns - 0.02).abs() < 1e-12);
        assert_eq!(rows[0].label, SOL_LABEL);
    }

    #[test]
    fn analyze_baseline_ratio_of_one() {
        let rec = crate::records::BenchRecord {
            kernel: "ntt".into(),
            size: 4096,
            backend: "portable".into(),
            mqx_mode: "functional".into(),
            mqx_variant: "base".into(),
            algo: "schoolbook".into(),
            modulus_bits: 124,
            lanes: 8,
            iterations: 100,
            warmup: 50,
            total_ns: 24576.0,
            unit: "butterfly".into(),
            unit_count: 24576,
            normalized_ns: 1.0,
            checksum: "0".into(),
            pinned: true,
            host: "h".into(),
            seed: 1,
            timestamp: 0,
        };
        let cpu = CpuSpec {
            name: "T".into(),
            cores: 100,
            base_ghz: 2.0,
            max_ghz: 4.0,
            all_core_boost_ghz: Some(2.0),
            l3_mb: None,
        };
        let base = Baseline {
            name: "asic".into(),
            kernel: "ntt".into(),
            size: 4096,
            ns: 0.02,
        };
        let rows = analyze(&[rec], &cpu, 4.0, 1.0, &[base]).unwrap();
        assert_eq!(rows[0].baselines.len(), 1);
        assert!(rows[0].baselines[0].2.starts_with("1.000x"));
    }

    #[test]
    fn baseline_csv_diagnostics() {
        let ok = "name,kernel,size,ns\nasic,ntt,1024,5.5\n";
        let rows = read_baselines(ok.as_bytes()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].ns, 5.5);

        let missing = "name,kernel,ns\nasic,ntt,5.5\n";
        let err = read_baselines(missing.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("missing column 'size'"));

        let bad = "name,kernel,size,ns\nasic,ntt,big,5.5\n";
        let err = read_baselines(bad.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("column 'size'"), "{err}");
    }

    proptest! {
        #[test]
        fn sol_is_multiplicative_and_monotone(
            t in 1e-3f64..1e9,
            c1 in 1f64..512.0,
            c2 in 1f64..512.0,
            fm in 0.5f64..6.0,
            fx in 0.5f64..6.0,
            scale in 1.01f64..8.0,
        ) {
            let s = SolInput { t_m_ns: t, c1, c2, f_m_ghz: fm, f_max_ghz: fx };
            let v = sol_project(&s).unwrap();
            prop_assert!((v - t * (c1 / c2) * (fm / fx)).abs() <= 1e-9 * v.abs().max(1.0));
            // Monotone up in t and c1; down in c2 and f_max.
            let up_t = sol_project(&SolInput { t_m_ns: t * scale, ..s }).unwrap();
            let up_c1 = sol_project(&SolInput { c1: c1 * scale, ..s }).unwrap();
            let down_c2 = sol_project(&SolInput { c2: c2 * scale, ..s }).unwrap();
            let down_f = sol_project(&SolInput { f_max_ghz: fx * scale, ..s }).unwrap();
            prop_assert!(up_t > v && up_c1 > v);
            prop_assert!(down_c2 < v && down_f < v);
        }
    }
}

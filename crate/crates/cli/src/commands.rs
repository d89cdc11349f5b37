//! The gen, run and bounds subcommands and their CSV emission.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use vatsim::addrmodel::AddressSpaceConfig;
use vatsim::bounds::{
    binary_search_bounds, em_to_vat, heapify_bound, heapsort_sorting_bound, random_scan_bounds,
    seq_bound, transpose_rowmajor_lower_bound, veb_search_vat_bound, HEAPIFY_DEFAULT_CONSTANT,
};
use vatsim::error::{Error, Result};
use vatsim::simulator::{normalized_fault_rate, run_vat_with_em_baseline, EmConfig};
use vatsim::trace_io::{self, TraceMeta};
use vatsim::workloads::{Trace, WorkloadKind};

use crate::sweep::{depth_for, expand, Expanded, SweepArgs, SweepPoint};

pub const RUN_HEADER: &str =
    "workload,n,k,p,d,W,tau,policy,total_faults,vat_cost,em_block_faults,normalized_rate,seed";
pub const BOUNDS_HEADER: &str =
    "workload,n,k,p,d,W,tau,policy,lower_bound,upper_bound,bound_name,clamped,seed";

pub enum TraceFormat {
    Text,
    Binary,
}

impl std::str::FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(TraceFormat::Text),
            "binary" => Ok(TraceFormat::Binary),
            other => Err(Error::Config(format!(
                "unknown trace format {other:?} (expected text or binary)"
            ))),
        }
    }
}

fn file_stem(kind: WorkloadKind, n: u64, seed: u64) -> String {
    format!("{}_{n}_{seed}", kind.to_string().replace(':', "-"))
}

/// Write one trace file per (workload, n, seed).
pub fn cmd_gen(
    args: &SweepArgs,
    out_dir: &Path,
    single_out: Option<&Path>,
    format: &TraceFormat,
) -> Result<()> {
    let kinds = args.workload_kinds()?;
    let sizes = args.sizes()?;

    let combos: Vec<(WorkloadKind, u64, u64)> = kinds
        .iter()
        .flat_map(|&k| {
            sizes
                .iter()
                .flat_map(move |&n| args.seeds.iter().map(move |&s| (k, n, s)))
        })
        .collect();

    if let Some(path) = single_out {
        if combos.len() != 1 {
            return Err(Error::Config(format!(
                "--trace-out names a single file but the sweep has {} traces; use --out with a directory",
                combos.len()
            )));
        }
        let (kind, n, seed) = combos[0];
        let trace = vatsim::workloads::gen(kind, n, seed, args.base, args.element_size)?;
        write_trace(path, kind, seed, &trace, format)?;
        return Ok(());
    }

    fs::create_dir_all(out_dir)?;
    for (kind, n, seed) in combos {
        let trace = vatsim::workloads::gen(kind, n, seed, args.base, args.element_size)?;
        let ext = match format {
            TraceFormat::Text => "trace",
            TraceFormat::Binary => "tracebin",
        };
        let path = out_dir.join(format!("{}.{ext}", file_stem(kind, n, seed)));
        write_trace(&path, kind, seed, &trace, format)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn write_trace(
    path: &Path,
    kind: WorkloadKind,
    seed: u64,
    trace: &Trace,
    format: &TraceFormat,
) -> Result<()> {
    match format {
        TraceFormat::Text => trace_io::write_text_file(path, &TraceMeta::new(kind, seed), trace),
        TraceFormat::Binary => trace_io::write_binary_file(path, &trace.resolved_vec()),
    }
}

struct RunRow {
    workload: String,
    n: u64,
    k: u32,
    p: u32,
    d: u32,
    w: u64,
    tau: u64,
    policy: String,
    seed: u64,
    total_faults: u64,
    vat_cost: u64,
    em_block_faults: u64,
    normalized_rate: Option<f64>,
}

fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    match out {
        Some(path) => Ok(Box::new(BufWriter::new(File::create(path)?))),
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

/// Simulate every sweep point and emit one CSV row per run, sorted by
/// (workload, n, policy, seed).
pub fn cmd_run(
    args: &SweepArgs,
    trace_in: &[PathBuf],
    em_m: Option<u64>,
    em_b: Option<u64>,
    out: Option<&Path>,
) -> Result<()> {
    let Expanded { traces, points } = expand(args)?;

    let mut rows = Vec::new();
    for point in &points {
        let trace = &traces[point.trace_index];
        rows.push(run_point(point, trace, em_m, em_b)?);
    }

    // Replayed trace files run under the same configuration sweep.
    for path in trace_in {
        let (meta, trace) = trace_io::read_any_file(path)?;
        let max_addr = trace.resolved().max().unwrap_or(0);
        let (name, kind, seed) = match &meta {
            Some(m) => (m.kind.to_string(), Some(m.kind), m.seed),
            None => ("replay".to_string(), None, 0),
        };
        for &k in &args.ks {
            for &p in &args.ps {
                let depths = if args.ds.is_empty() {
                    vec![depth_for(max_addr, k, p)]
                } else {
                    args.ds.clone()
                };
                for &d in &depths {
                    for &w in &args.ws {
                        for &tau in &args.taus {
                            let cfg = AddressSpaceConfig::new(k, p, d, w, tau)?;
                            for policy in args.policy_kinds()? {
                                let point = SweepPoint {
                                    kind: kind.unwrap_or(WorkloadKind::Sequential),
                                    n: trace.n,
                                    seed,
                                    cfg,
                                    policy,
                                    trace_index: 0,
                                };
                                let mut row = run_point(&point, &trace, em_m, em_b)?;
                                row.workload = name.clone();
                                if kind.is_none() {
                                    row.normalized_rate = None;
                                }
                                rows.push(row);
                            }
                        }
                    }
                }
            }
        }
    }

    rows.sort_by_key(|r| {
        (
            r.workload.clone(),
            r.n,
            r.policy.clone(),
            r.seed,
            r.k,
            r.p,
            r.d,
            r.w,
            r.tau,
        )
    });

    let mut out = open_output(out)?;
    writeln!(out, "{RUN_HEADER}")?;
    for r in rows {
        let rate = r
            .normalized_rate
            .map(|v| format!("{v:.6}"))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.workload,
            r.n,
            r.k,
            r.p,
            r.d,
            r.w,
            r.tau,
            r.policy,
            r.total_faults,
            r.vat_cost,
            r.em_block_faults,
            rate,
            r.seed
        )?;
    }
    out.flush()?;
    Ok(())
}

fn run_point(
    point: &SweepPoint,
    trace: &Trace,
    em_m: Option<u64>,
    em_b: Option<u64>,
) -> Result<RunRow> {
    let cfg = point.cfg;
    let em = EmConfig::new(
        em_m.unwrap_or(cfg.capacity() * cfg.page_size()),
        em_b.unwrap_or(cfg.page_size()),
    )?;
    let result = run_vat_with_em_baseline(cfg, point.policy, em, trace)?;
    let rate = normalized_fault_rate(&result, &point.kind, point.n);
    Ok(RunRow {
        workload: point.kind.to_string(),
        n: point.n,
        k: cfg.k(),
        p: cfg.p(),
        d: cfg.depth(),
        w: cfg.capacity(),
        tau: cfg.tau(),
        policy: point.policy.to_string(),
        seed: point.seed,
        total_faults: result.total_faults,
        vat_cost: result.vat_cost,
        em_block_faults: result.em_block_faults.expect("baseline was requested"),
        normalized_rate: Some(rate),
    })
}

/// Evaluate the analytic bound matching each sweep point, row-aligned with
/// `cmd_run` over the same sweep.
pub fn cmd_bounds(args: &SweepArgs, out: Option<&Path>) -> Result<()> {
    let Expanded { traces, points } = expand(args)?;

    struct BoundRow {
        point_key: (String, u64, String, u64, u32, u32, u32, u64, u64),
        lower: Option<f64>,
        upper: Option<f64>,
        name: &'static str,
        clamped: bool,
    }

    let mut rows = Vec::new();
    for point in &points {
        let (lower, upper, name, clamped) = bound_for(point, &traces[point.trace_index]);
        rows.push(BoundRow {
            point_key: (
                point.kind.to_string(),
                point.n,
                point.policy.to_string(),
                point.seed,
                point.cfg.k(),
                point.cfg.p(),
                point.cfg.depth(),
                point.cfg.capacity(),
                point.cfg.tau(),
            ),
            lower,
            upper,
            name,
            clamped,
        });
    }
    rows.sort_by(|a, b| a.point_key.cmp(&b.point_key));

    let mut out = open_output(out)?;
    writeln!(out, "{BOUNDS_HEADER}")?;
    for r in rows {
        let (workload, n, policy, seed, k, p, d, w, tau) = r.point_key;
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            workload,
            n,
            k,
            p,
            d,
            w,
            tau,
            policy,
            fmt(r.lower),
            fmt(r.upper),
            r.name,
            r.clamped,
            seed
        )?;
    }
    out.flush()?;
    Ok(())
}

fn bound_for(point: &SweepPoint, trace: &Trace) -> (Option<f64>, Option<f64>, &'static str, bool) {
    let cfg = &point.cfg;
    let n = point.n;
    match point.kind {
        WorkloadKind::Sequential => {
            let b = seq_bound(n, cfg);
            (None, Some(b.upper_exact as f64), "seq_upper_exact", false)
        }
        WorkloadKind::Jumping { stride } => {
            if stride <= cfg.page_size() {
                let pages = (n * stride).div_ceil(cfg.page_size());
                let upper = (pages + 1) as f64 * (1.0 + 1.0 / (cfg.fanout() as f64 - 1.0))
                    + 2.0 * (cfg.depth() as f64 + 1.0);
                (None, Some(upper), "jumping_upper", false)
            } else {
                let upper = (trace.len() as u64 * (cfg.depth() as u64 + 1)) as f64;
                (None, Some(upper), "trivial_full_walk", false)
            }
        }
        WorkloadKind::RandomScan => {
            let band = random_scan_bounds(n, cfg);
            (
                Some(band.lower),
                Some(band.upper),
                "random_scan_band",
                band.clamped,
            )
        }
        WorkloadKind::Permute => (None, None, "none", false),
        WorkloadKind::BinarySearch { queries } => {
            let band = binary_search_bounds(n, cfg);
            let q = queries as f64;
            (
                Some(band.lower * q),
                Some(band.upper * q),
                "binary_search_band",
                band.clamped,
            )
        }
        WorkloadKind::Heapify => (
            None,
            Some(heapify_bound(n, cfg, HEAPIFY_DEFAULT_CONSTANT)),
            "heapify_upper_c4",
            false,
        ),
        WorkloadKind::Heapsort => {
            let sorting = heapsort_sorting_bound(n, cfg);
            (
                None,
                Some(heapify_bound(n, cfg, HEAPIFY_DEFAULT_CONSTANT) + sorting.value),
                "heapsort_oform",
                sorting.clamped,
            )
        }
        WorkloadKind::Quicksort => {
            let c = |_m: u128, b: u128, n: u64| {
                let x = n as f64 / b as f64;
                if x > 1.0 {
                    x * x.log2()
                } else {
                    0.0
                }
            };
            match em_to_vat(c, n, cfg) {
                Ok(v) => (None, Some(v), "quicksort_em_to_vat_oform", false),
                Err(_) => (None, None, "none", false),
            }
        }
        WorkloadKind::MatrixTransposeRowMajor => {
            let b = transpose_rowmajor_lower_bound(n, cfg);
            (Some(b.value), None, "transpose_rowmajor_lower", b.clamped)
        }
        WorkloadKind::MatrixTransposeRecursive => {
            let c = |m: u128, b: u128, cells: u64| {
                if m >= 6 * b {
                    2.0 + 2.5 * cells as f64 / b as f64
                } else {
                    2.0 * cells as f64 + 2.0
                }
            };
            match em_to_vat(c, n, cfg) {
                Ok(v) => (None, Some(v), "transpose_recursive_em_to_vat", false),
                Err(_) => (None, None, "none", false),
            }
        }
        WorkloadKind::VebSearch { queries } => match veb_search_vat_bound(n, cfg) {
            Ok(per_search) => (
                None,
                Some(per_search * queries as f64),
                "veb_search_upper",
                false,
            ),
            Err(_) => (None, None, "none", false),
        },
    }
}

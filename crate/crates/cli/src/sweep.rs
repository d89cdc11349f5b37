//! Experiment sweep: the cross product of workloads, problem sizes, model
//! parameters, policies and seeds, expanded and validated up front.

use clap::Args;

use vatsim::addrmodel::AddressSpaceConfig;
use vatsim::error::{Error, Result};
use vatsim::tc::PolicyKind;
use vatsim::workloads::{gen, Trace, WorkloadKind};

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Workload kind, repeatable (e.g. sequential, jumping:8, random-scan,
    /// permute, binary-search:1024, heapify, heapsort, quicksort,
    /// transpose-row-major, transpose-recursive, veb-search:1024).
    #[arg(long = "workload", required = true)]
    pub workloads: Vec<String>,

    /// Smallest problem size of the geometric sweep.
    #[arg(long)]
    pub n_min: u64,

    /// Largest problem size of the geometric sweep.
    #[arg(long)]
    pub n_max: u64,

    /// Growth factor between consecutive problem sizes.
    #[arg(long, default_value_t = 1.4)]
    pub n_ratio: f64,

    /// Fanout exponent k (K = 2^k), repeatable.
    #[arg(long = "k", default_values_t = vec![1u32])]
    pub ks: Vec<u32>,

    /// Page exponent p (P = 2^p), repeatable.
    #[arg(long = "p", default_values_t = vec![3u32])]
    pub ps: Vec<u32>,

    /// Tree depth d, repeatable; omitted means the smallest depth covering
    /// each trace.
    #[arg(long = "d")]
    pub ds: Vec<u32>,

    /// Translation cache capacity W in nodes, repeatable.
    #[arg(long = "W", visible_alias = "w", default_values_t = vec![64u64])]
    pub ws: Vec<u64>,

    /// Fault cost tau, repeatable.
    #[arg(long = "tau", default_values_t = vec![1u64])]
    pub taus: Vec<u64>,

    /// Replacement policy (lru, islru, min, ismin), repeatable.
    #[arg(long = "policy", default_values = ["lru"])]
    pub policies: Vec<String>,

    /// Workload seed, repeatable.
    #[arg(long = "seed", default_values_t = vec![1u64])]
    pub seeds: Vec<u64>,

    /// Base address of the generated traces.
    #[arg(long, default_value_t = 0)]
    pub base: u64,

    /// Cells per element in the generated traces.
    #[arg(long, default_value_t = 1)]
    pub element_size: u64,
}

impl SweepArgs {
    pub fn workload_kinds(&self) -> Result<Vec<WorkloadKind>> {
        self.workloads.iter().map(|w| w.parse()).collect()
    }

    pub fn policy_kinds(&self) -> Result<Vec<PolicyKind>> {
        self.policies.iter().map(|p| p.parse()).collect()
    }

    /// Geometric size sweep, deduplicated after rounding.
    pub fn sizes(&self) -> Result<Vec<u64>> {
        if self.n_min == 0 || self.n_max < self.n_min {
            return Err(Error::Config(format!(
                "bad size sweep: n_min = {}, n_max = {}",
                self.n_min, self.n_max
            )));
        }
        if self.n_ratio <= 1.0 {
            return Err(Error::Config(format!(
                "size ratio must exceed 1, got {}",
                self.n_ratio
            )));
        }
        let mut sizes = Vec::new();
        let mut x = self.n_min as f64;
        while x <= self.n_max as f64 {
            let v = x.round() as u64;
            if sizes.last() != Some(&v) {
                sizes.push(v);
            }
            x *= self.n_ratio;
        }
        Ok(sizes)
    }
}

/// One fully resolved run: a generated trace plus a valid configuration.
pub struct SweepPoint {
    pub kind: WorkloadKind,
    pub n: u64,
    pub seed: u64,
    pub cfg: AddressSpaceConfig,
    pub policy: PolicyKind,
    /// Index into the shared trace pool.
    pub trace_index: usize,
}

pub struct Expanded {
    pub traces: Vec<Trace>,
    pub points: Vec<SweepPoint>,
}

/// Smallest depth whose range covers `max_addr`.
pub fn depth_for(max_addr: u64, k: u32, p: u32) -> u32 {
    let mut d = 1;
    while k * d + p < 64 && (1u64 << (k * d + p)) <= max_addr {
        d += 1;
    }
    d
}

/// Generate every trace and cross it with the configuration sweep. Every
/// (cfg, trace) pair is range-checked here so command implementations can
/// assume validity.
pub fn expand(args: &SweepArgs) -> Result<Expanded> {
    let kinds = args.workload_kinds()?;
    let policies = args.policy_kinds()?;
    let sizes = args.sizes()?;

    let mut traces = Vec::new();
    let mut points = Vec::new();
    for &kind in &kinds {
        for &n in &sizes {
            for &seed in &args.seeds {
                let trace = gen(kind, n, seed, args.base, args.element_size)?;
                let max_addr = trace.resolved().max().unwrap_or(0);
                let trace_index = traces.len();
                traces.push(trace);
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
                                    if max_addr > cfg.max_address() {
                                        return Err(Error::Config(format!(
                                            "{kind} at n = {n} reaches address {max_addr}, beyond k={k} p={p} d={d} (max {})",
                                            cfg.max_address()
                                        )));
                                    }
                                    for &policy in &policies {
                                        if policy.requires_isp() && w <= d as u64 {
                                            return Err(Error::Config(format!(
                                                "{policy} needs W > d but the sweep pairs W = {w} with d = {d}"
                                            )));
                                        }
                                        points.push(SweepPoint {
                                            kind,
                                            n,
                                            seed,
                                            cfg,
                                            policy,
                                            trace_index,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(Expanded { traces, points })
}

//! Closed-form cost bounds and the CAT trace classifier.
//!
//! Conventions used throughout:
//!
//! * `log_K x` is computed as `log2(x) / k`; the van Emde Boas bound is the
//!   only place a natural logarithm appears.
//! * Any logarithm whose argument is `<= 1` clamps to 0 and sets the
//!   `clamped` flag of the result, so a degenerate bound is visible rather
//!   than silently negative.
//! * Asymptotic bounds (heapify, matrix multiply, funnel sort) take an
//!   explicit constant factor; the defaults are the smallest round values
//!   that hold for the shipped measurement scales, and results always report
//!   which constant was used implicitly via the function signature.

use crate::addrmodel::AddressSpaceConfig;
use crate::error::{Error, Result};
use crate::workloads::{trace_stats, Trace};

/// A two-sided bound. `clamped` records that some logarithm bottomed out at
/// zero while evaluating either side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
    pub clamped: bool,
}

/// A one-sided bound with the same clamp reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    pub clamped: bool,
}

struct Logs {
    clamped: bool,
}

impl Logs {
    fn new() -> Self {
        Logs { clamped: false }
    }

    fn log2(&mut self, x: f64) -> f64 {
        if x <= 1.0 {
            self.clamped = true;
            0.0
        } else {
            x.log2()
        }
    }

    fn log_base_k(&mut self, x: f64, cfg: &AddressSpaceConfig) -> f64 {
        self.log2(x) / cfg.k() as f64
    }
}

/// Sequential-scan fault bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeqBound {
    /// `2d + sum_{i=0..d} ceil(n / (P K^i))`, exact.
    pub upper_exact: u64,
    /// `2d + K/(K-1) * n/P` as a real number.
    pub upper_closed: f64,
}

pub fn seq_bound(n: u64, cfg: &AddressSpaceConfig) -> SeqBound {
    assert!(n >= 1, "sequential bound needs n >= 1");
    let mut sum: u128 = 0;
    for i in 0..=cfg.depth() {
        let divisor = (cfg.page_size() as u128) << (cfg.k() * i) as u128;
        sum += (n as u128).div_ceil(divisor);
    }
    let upper_exact = 2 * cfg.depth() as u128 + sum;
    let kf = cfg.fanout() as f64;
    let upper_closed =
        2.0 * cfg.depth() as f64 + kf / (kf - 1.0) * n as f64 / cfg.page_size() as f64;
    SeqBound {
        upper_exact: upper_exact as u64,
        upper_closed,
    }
}

/// Random-scan band: total faults over the whole trace lie in
/// `[tau n log_K(n/(PW)), tau n log_K(2n/P)]`.
pub fn random_scan_bounds(n: u64, cfg: &AddressSpaceConfig) -> Band {
    let mut logs = Logs::new();
    let nf = n as f64;
    let tau = cfg.tau() as f64;
    let lower =
        tau * nf * logs.log_base_k(nf / (cfg.page_size() as f64 * cfg.capacity() as f64), cfg);
    let upper = tau * nf * logs.log_base_k(2.0 * nf / cfg.page_size() as f64, cfg);
    Band {
        lower,
        upper,
        clamped: logs.clamped,
    }
}

/// Per-search band for `n` random binary searches in an array of size `n`:
/// upper `tau log_K(2n/P) log2(2nd/W)`, lower
/// `(tau/4) log_K(2nd/(PW)) log2(2nd/(PW))`.
pub fn binary_search_bounds(n: u64, cfg: &AddressSpaceConfig) -> Band {
    let mut logs = Logs::new();
    let nf = n as f64;
    let tau = cfg.tau() as f64;
    let d = cfg.depth() as f64;
    let p = cfg.page_size() as f64;
    let w = cfg.capacity() as f64;
    let upper = tau * logs.log_base_k(2.0 * nf / p, cfg) * logs.log2(2.0 * nf * d / w);
    let shared = 2.0 * nf * d / (p * w);
    let lower = tau / 4.0 * logs.log_base_k(shared, cfg) * logs.log2(shared);
    Band {
        lower,
        upper,
        clamped: logs.clamped,
    }
}

pub const HEAPIFY_DEFAULT_CONSTANT: f64 = 4.0;

/// Heapify upper bound `constant * tau * (d + n p / P)`.
pub fn heapify_bound(n: u64, cfg: &AddressSpaceConfig, constant: f64) -> f64 {
    assert!(n >= 2, "heapify bound needs n >= 2");
    constant
        * cfg.tau() as f64
        * (cfg.depth() as f64 + n as f64 * cfg.p() as f64 / cfg.page_size() as f64)
}

/// Sorting-phase bound for heapsort: `n log_K(2n/P) log2(4n/W)`.
pub fn heapsort_sorting_bound(n: u64, cfg: &AddressSpaceConfig) -> BoundValue {
    let mut logs = Logs::new();
    let nf = n as f64;
    let value = nf
        * logs.log_base_k(2.0 * nf / cfg.page_size() as f64, cfg)
        * logs.log2(4.0 * nf / cfg.capacity() as f64);
    BoundValue {
        value,
        clamped: logs.clamped,
    }
}

/// Convert an EM IO-complexity `C(M, B, n)` into a VAT fault bound by
/// dedicating `a = floor(W/d)` cache nodes to each tree level:
/// `sum_{i=0..d} C(a K^i P, K^i P, n)`. The sum accumulates in increasing
/// `i` order.
pub fn em_to_vat<C>(c: C, n: u64, cfg: &AddressSpaceConfig) -> Result<f64>
where
    C: Fn(u128, u128, u64) -> f64,
{
    if cfg.depth() == 0 {
        return Err(Error::Config(
            "em_to_vat needs a translation tree (d >= 1)".into(),
        ));
    }
    let a = cfg.capacity() / cfg.depth() as u64;
    if a == 0 {
        return Err(Error::Config(format!(
            "em_to_vat needs floor(W/d) >= 1 (W = {}, d = {})",
            cfg.capacity(),
            cfg.depth()
        )));
    }
    let mut total = 0.0;
    for i in 0..=cfg.depth() {
        let block = (cfg.page_size() as u128) << (cfg.k() * i) as u128;
        total += c(a as u128 * block, block, n);
    }
    Ok(total)
}

/// VAT bound for a search in the van Emde Boas layout:
/// `log_P n + log_K n * ln(log_P 4n)`. Needs `n > P` and `P >= 2`.
pub fn veb_search_vat_bound(n: u64, cfg: &AddressSpaceConfig) -> Result<f64> {
    if cfg.p() == 0 {
        return Err(Error::Config(
            "van Emde Boas bound needs a page size of at least two cells".into(),
        ));
    }
    if n <= cfg.page_size() {
        return Err(Error::Config(format!(
            "van Emde Boas bound needs n > P (n = {n}, P = {})",
            cfg.page_size()
        )));
    }
    let nf = n as f64;
    let p = cfg.p() as f64;
    let log_p_n = nf.log2() / p;
    let log_k_n = nf.log2() / cfg.k() as f64;
    Ok(log_p_n + log_k_n * ((4.0 * nf).log2() / p).ln())
}

/// Geometric factor `K^(3/2) / (K^(3/2) - 1)` of the recursive-layout
/// matrix-multiply bound.
pub fn recursive_layout_factor(cfg: &AddressSpaceConfig) -> f64 {
    let k32 = (cfg.fanout() as f64).powf(1.5);
    k32 / (k32 - 1.0)
}

/// Matrix-multiply bound for dimension `dim` with both operands in the
/// recursive layout: `factor * dim^3 / (a^(1/2) P^(3/2))`, `a = floor(W/d)`.
pub fn matrix_multiply_recursive_bound(dim: u64, cfg: &AddressSpaceConfig) -> Result<f64> {
    if cfg.depth() == 0 {
        return Err(Error::Config(
            "matrix bound needs a translation tree (d >= 1)".into(),
        ));
    }
    let a = cfg.capacity() / cfg.depth() as u64;
    if a == 0 {
        return Err(Error::Config(format!(
            "matrix bound needs floor(W/d) >= 1 (W = {}, d = {})",
            cfg.capacity(),
            cfg.depth()
        )));
    }
    let dimf = dim as f64;
    Ok(recursive_layout_factor(cfg) * dimf.powi(3)
        / ((a as f64).sqrt() * (cfg.page_size() as f64).powf(1.5)))
}

/// Lower estimate for a row-major transpose touching `cells` matrix cells:
/// `tau * cells * (d - log_K W)`. Every column write lands on a fresh
/// translation path, of which only the top `log_K W` layers can stay cached.
pub fn transpose_rowmajor_lower_bound(cells: u64, cfg: &AddressSpaceConfig) -> BoundValue {
    let mut logs = Logs::new();
    let cached_layers = logs.log_base_k(cfg.capacity() as f64, cfg);
    let per_access = (cfg.depth() as f64 - cached_layers).max(0.0);
    BoundValue {
        value: cfg.tau() as f64 * cells as f64 * per_access,
        clamped: logs.clamped,
    }
}

/// Funnel-sort fault bound on a VAT machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunnelSortBound {
    /// `(4n/B) * max(1, ceil(log2(4n/M) / log2(M/(4dB))))` with
    /// `M = cache_cells / item_size` and `B = P / item_size`.
    pub value: f64,
    /// Whether `(B log_K(2n/P))^2 <= M/4` holds; the bound assumes it.
    pub tall_cache_ok: bool,
    /// True when `4n <= M`, i.e. the ceil term bottomed out and a single
    /// pass was assumed.
    pub boundary: bool,
}

pub fn funnel_sort_bound(
    n: u64,
    item_size: u64,
    cache_cells: u64,
    cfg: &AddressSpaceConfig,
) -> Result<FunnelSortBound> {
    if item_size == 0 {
        return Err(Error::Config("item size must be positive".into()));
    }
    let b = cfg.page_size() as f64 / item_size as f64;
    if b < 1.0 {
        return Err(Error::Config(format!(
            "items of {item_size} cells exceed the page size {}",
            cfg.page_size()
        )));
    }
    let m = cache_cells as f64 / item_size as f64;
    let d = cfg.depth() as f64;
    let nf = n as f64;

    let denom = (m / (4.0 * d * b)).log2();
    if denom <= 0.0 {
        return Err(Error::Config(format!(
            "funnel-sort bound needs M > 4dB (M = {m}, 4dB = {})",
            4.0 * d * b
        )));
    }
    let numer = (4.0 * nf / m).log2();
    let boundary = numer <= 0.0;
    let passes = if boundary {
        1.0
    } else {
        (numer / denom).ceil().max(1.0)
    };

    let mut logs = Logs::new();
    let spread = b * logs.log_base_k(2.0 * nf / cfg.page_size() as f64, cfg);
    let tall_cache_ok = spread * spread <= m / 4.0;

    Ok(FunnelSortBound {
        value: 4.0 * nf / b * passes,
        tall_cache_ok,
        boundary,
    })
}

/// One level of a concrete memory hierarchy: capacity in cells and the cost
/// of an access that is served by this level. The last level bounds the
/// largest supported working set (use `u64::MAX` for an effectively
/// unbounded main memory).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryHierarchyLevel {
    pub size: u64,
    pub access_cost: f64,
}

/// Expected EM cost of a random scan over `n` cells in a concrete hierarchy:
/// `n c_{l+1} - sum_{0<=i<=l} s_i (c_{i+1} - c_i)` where level `l` is the
/// largest level smaller than `n`. Piecewise linear in `n` with slope
/// `c_{l+1}`; exact when sizes and costs are integers below 2^53.
pub fn em_random_scan_expected(n: u64, levels: &[MemoryHierarchyLevel]) -> Result<f64> {
    if n == 0 {
        return Err(Error::Config("scan size must be positive".into()));
    }
    if levels.is_empty() {
        return Err(Error::Config(
            "hierarchy must have at least one level".into(),
        ));
    }
    for pair in levels.windows(2) {
        if pair[1].size <= pair[0].size {
            return Err(Error::Config(
                "hierarchy sizes must be strictly increasing".into(),
            ));
        }
    }
    let idx = levels
        .iter()
        .position(|lv| n <= lv.size)
        .ok_or_else(|| Error::Config(format!("n = {n} exceeds the largest hierarchy level")))?;
    let mut value = n as f64 * levels[idx].access_cost;
    for i in 0..idx {
        value -= levels[i].size as f64 * (levels[i + 1].access_cost - levels[i].access_cost);
    }
    Ok(value)
}

/// Thresholds for the CAT classifier. Condition 4 (bounded interleaved
/// non-access work) is vacuous for pure address traces regardless of
/// `max_interleaved_ops`; the knob is kept so the report can name it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatConstants {
    /// Condition 1: trace length must be at least `min_len_mult * tau * d`.
    pub min_len_mult: f64,
    /// Condition 2: mean accesses per page over the touched page range must
    /// be at least `min_density * tau`.
    pub min_density: f64,
    /// Condition 4 threshold, unused for pure address traces.
    pub max_interleaved_ops: u64,
}

impl Default for CatConstants {
    fn default() -> Self {
        CatConstants {
            min_len_mult: 1.0,
            min_density: 1.0,
            max_interleaved_ops: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatStatus {
    Satisfied,
    Violated,
    Vacuous,
}

pub const CAT_CONDITION_NAMES: [&str; 4] = [
    "length at least min_len_mult * tau * d",
    "mean accesses per page in the range at least min_density * tau",
    "pages visited in monotone order",
    "bounded non-access work between accesses",
];

/// Classifier verdict; `statuses[i]` describes `CAT_CONDITION_NAMES[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatReport {
    pub is_cat: bool,
    pub statuses: [CatStatus; 4],
}

impl CatReport {
    pub fn violated(&self) -> Vec<&'static str> {
        self.statuses
            .iter()
            .zip(CAT_CONDITION_NAMES)
            .filter(|(s, _)| **s == CatStatus::Violated)
            .map(|(_, name)| name)
            .collect()
    }
}

/// Decide whether a trace is a sequence of consecutive address translations:
/// long enough, dense enough over its page range, and page-monotone. The
/// fourth defining condition concerns operations outside the trace and is
/// reported vacuous.
pub fn cat_classify(
    trace: &Trace,
    cfg: &AddressSpaceConfig,
    constants: &CatConstants,
) -> CatReport {
    let stats = trace_stats(trace, cfg);
    let tau = cfg.tau() as f64;
    let len = trace.len() as f64;

    let long_enough = len >= constants.min_len_mult * tau * cfg.depth() as f64;
    let density = if stats.span_pages == 0 {
        0.0
    } else {
        len / stats.span_pages as f64
    };
    let dense_enough = density >= constants.min_density * tau;
    let monotone = stats.page_monotone;

    let status = |ok: bool| {
        if ok {
            CatStatus::Satisfied
        } else {
            CatStatus::Violated
        }
    };
    let statuses = [
        status(long_enough),
        status(dense_enough),
        status(monotone),
        CatStatus::Vacuous,
    ];
    CatReport {
        is_cat: long_enough && dense_enough && monotone,
        statuses,
    }
}

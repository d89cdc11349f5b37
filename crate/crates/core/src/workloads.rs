//! Seeded trace generators for the analyzed and measured access patterns.
//!
//! A trace records element indices against a base address and an element
//! size; the resolved address of entry `i` is `base + accesses[i] *
//! element_size`. Reads and writes are not distinguished: translation is
//! charged per access regardless of direction. All randomness comes from
//! [`SplitMix64`], so a `(kind, n, seed)` triple reproduces the same trace
//! bit for bit.
//!
//! Heap traces use the 1-based convention in a flat array (cell 0 unused):
//! the children of element `i` are `2i` and `2i + 1`. With a page-aligned
//! base and any page size of at least two cells, siblings then share a page.

use std::fmt;
use std::str::FromStr;

use crate::addrmodel::AddressSpaceConfig;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkloadKind {
    /// Indices `0, 1, ..., n-1`.
    Sequential,
    /// Indices `0, s, 2s, ...` (n of them).
    Jumping { stride: u64 },
    /// A uniform random permutation of `0..n`, visited in order.
    RandomScan,
    /// The access pattern of an in-place Fisher-Yates shuffle: for `j` from
    /// `n-1` down to 0, one access at random `i <= j` and one at `j`.
    Permute,
    /// `queries` binary searches for uniform random positions in a sorted
    /// array of `n` elements; each search emits its probed midpoints.
    BinarySearch { queries: u64 },
    /// Bottom-up heap construction: `sift(i)` for `i = n/2` down to 1 on a
    /// seeded random array.
    Heapify,
    /// Heapify followed by the sorting phase (root removal, last-leaf move,
    /// sift-down from the root).
    Heapsort,
    /// In-place quicksort with seeded random pivots on a seeded random
    /// array.
    Quicksort,
    /// Out-of-place transpose of a `sqrt(n) x sqrt(n)` matrix, both matrices
    /// row-major: reads sequential, writes with stride `sqrt(n)`.
    MatrixTransposeRowMajor,
    /// The same transpose with both matrices in the block-recursive
    /// (bit-interleaved quadrant) layout.
    MatrixTransposeRecursive,
    /// `queries` searches over a complete binary search tree of `n` nodes
    /// stored in the van Emde Boas layout.
    VebSearch { queries: u64 },
}

impl WorkloadKind {
    /// RAM complexity of the generating algorithm at problem size `n`, used
    /// to normalize fault counts. Scan-like workloads and heapify are linear;
    /// sorts are `n log2 n`; the search workloads cost `log2 n` per query.
    pub fn ram_complexity(&self, n: u64) -> f64 {
        let nf = n as f64;
        let log = if n > 1 { nf.log2() } else { 1.0 };
        match self {
            WorkloadKind::Sequential
            | WorkloadKind::Jumping { .. }
            | WorkloadKind::RandomScan
            | WorkloadKind::Permute
            | WorkloadKind::Heapify
            | WorkloadKind::MatrixTransposeRowMajor
            | WorkloadKind::MatrixTransposeRecursive => nf,
            WorkloadKind::Heapsort | WorkloadKind::Quicksort => nf * log,
            WorkloadKind::BinarySearch { queries } | WorkloadKind::VebSearch { queries } => {
                *queries as f64 * log
            }
        }
    }
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorkloadKind::Sequential => write!(f, "sequential"),
            WorkloadKind::Jumping { stride } => write!(f, "jumping:{stride}"),
            WorkloadKind::RandomScan => write!(f, "random-scan"),
            WorkloadKind::Permute => write!(f, "permute"),
            WorkloadKind::BinarySearch { queries } => write!(f, "binary-search:{queries}"),
            WorkloadKind::Heapify => write!(f, "heapify"),
            WorkloadKind::Heapsort => write!(f, "heapsort"),
            WorkloadKind::Quicksort => write!(f, "quicksort"),
            WorkloadKind::MatrixTransposeRowMajor => write!(f, "transpose-row-major"),
            WorkloadKind::MatrixTransposeRecursive => write!(f, "transpose-recursive"),
            WorkloadKind::VebSearch { queries } => write!(f, "veb-search:{queries}"),
        }
    }
}

impl FromStr for WorkloadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let parse_param = |what: &str| -> Result<u64> {
            let raw = param.ok_or_else(|| {
                Error::Config(format!("workload {name} needs a {what}, e.g. {name}:4"))
            })?;
            let v: u64 = raw
                .parse()
                .map_err(|_| Error::Config(format!("bad {what} {raw:?} for workload {name}")))?;
            if v == 0 {
                return Err(Error::Config(format!("{what} for {name} must be positive")));
            }
            Ok(v)
        };
        let kind = match name {
            "sequential" => WorkloadKind::Sequential,
            "jumping" => WorkloadKind::Jumping {
                stride: parse_param("stride")?,
            },
            "random-scan" => WorkloadKind::RandomScan,
            "permute" => WorkloadKind::Permute,
            "binary-search" => WorkloadKind::BinarySearch {
                queries: parse_param("query count")?,
            },
            "heapify" => WorkloadKind::Heapify,
            "heapsort" => WorkloadKind::Heapsort,
            "quicksort" => WorkloadKind::Quicksort,
            "transpose-row-major" => WorkloadKind::MatrixTransposeRowMajor,
            "transpose-recursive" => WorkloadKind::MatrixTransposeRecursive,
            "veb-search" => WorkloadKind::VebSearch {
                queries: parse_param("query count")?,
            },
            other => {
                return Err(Error::Config(format!("unknown workload kind {other:?}")));
            }
        };
        if param.is_some()
            && !matches!(
                kind,
                WorkloadKind::Jumping { .. }
                    | WorkloadKind::BinarySearch { .. }
                    | WorkloadKind::VebSearch { .. }
            )
        {
            return Err(Error::Config(format!("workload {name} takes no parameter")));
        }
        Ok(kind)
    }
}

/// An ordered sequence of element accesses against a base address.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub base: u64,
    /// Cells per element, >= 1.
    pub element_size: u64,
    /// Element indices; the resolved address is `base + index * element_size`.
    pub accesses: Vec<u64>,
    /// Problem size the trace was generated for.
    pub n: u64,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.accesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accesses.is_empty()
    }

    pub fn resolved(&self) -> impl Iterator<Item = u64> + '_ {
        self.accesses
            .iter()
            .map(move |&i| self.base + i * self.element_size)
    }

    pub fn resolved_vec(&self) -> Vec<u64> {
        self.resolved().collect()
    }

    /// Construct a trace directly from resolved addresses (base 0, element
    /// size 1), as when replaying an address file.
    pub fn from_addresses(addresses: Vec<u64>) -> Trace {
        let n = addresses.len() as u64;
        Trace {
            base: 0,
            element_size: 1,
            accesses: addresses,
            n,
        }
    }
}

/// Generate the trace of `kind` at problem size `n`. All workloads are
/// deterministic in `(kind, n, seed)`.
pub fn gen(kind: WorkloadKind, n: u64, seed: u64, base: u64, element_size: u64) -> Result<Trace> {
    if n == 0 {
        return Err(Error::Config("workload size n must be positive".into()));
    }
    if element_size == 0 {
        return Err(Error::Config("element size must be positive".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let accesses = match kind {
        WorkloadKind::Sequential => (0..n).collect(),
        WorkloadKind::Jumping { stride } => (0..n).map(|i| i * stride).collect(),
        WorkloadKind::RandomScan => {
            let mut perm: Vec<u64> = (0..n).collect();
            rng.shuffle(&mut perm);
            perm
        }
        WorkloadKind::Permute => {
            let mut out = Vec::with_capacity(2 * n as usize);
            for j in (0..n).rev() {
                let i = rng.below(j + 1);
                out.push(i);
                out.push(j);
            }
            out
        }
        WorkloadKind::BinarySearch { queries } => binary_search_trace(n, queries, &mut rng),
        WorkloadKind::Heapify => heap_trace(n, &mut rng, false),
        WorkloadKind::Heapsort => heap_trace(n, &mut rng, true),
        WorkloadKind::Quicksort => quicksort_trace(n, &mut rng),
        WorkloadKind::MatrixTransposeRowMajor => {
            let side = matrix_side(n)?;
            let mut out = Vec::with_capacity(2 * n as usize);
            for r in 0..side {
                for c in 0..side {
                    out.push(r * side + c);
                    out.push(n + c * side + r);
                }
            }
            out
        }
        WorkloadKind::MatrixTransposeRecursive => {
            let side = matrix_side(n)?;
            if !side.is_power_of_two() {
                return Err(Error::Config(format!(
                    "recursive transpose needs a power-of-two dimension, got {side}"
                )));
            }
            let mut out = Vec::with_capacity(2 * n as usize);
            recursive_transpose(0, 0, side, side.ilog2(), n, &mut out);
            out
        }
        WorkloadKind::VebSearch { queries } => veb_search_trace(n, queries, &mut rng)?,
    };
    Ok(Trace {
        base,
        element_size,
        accesses,
        n,
    })
}

fn matrix_side(n: u64) -> Result<u64> {
    let side = (n as f64).sqrt().round() as u64;
    if side * side != n {
        return Err(Error::Config(format!(
            "matrix workloads need a perfect-square size, got {n}"
        )));
    }
    Ok(side)
}

fn binary_search_trace(n: u64, queries: u64, rng: &mut SplitMix64) -> Vec<u64> {
    // The array is sorted with distinct keys, so a search for the key at
    // position t probes the same midpoints as a search over positions.
    let mut out = Vec::new();
    for _ in 0..queries {
        let target = rng.below(n);
        let mut lo = 0u64;
        let mut hi = n;
        while lo < hi {
            let mid = (lo + hi) / 2;
            out.push(mid);
            if mid == target {
                break;
            } else if mid < target {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
    }
    out
}

/// sift(i): load z = A[i], then walk down comparing the two children and
/// moving the smaller one up until z fits; finally write z. Emits one access
/// per array touch: the initial read, both children per level, the write per
/// move, and the final write.
fn sift(a: &mut [u64], mut j: u64, size: u64, out: &mut Vec<u64>) {
    out.push(j);
    let z = a[j as usize];
    loop {
        let c = 2 * j;
        if c > size {
            break;
        }
        out.push(c);
        let mut m = c;
        let mut mv = a[c as usize];
        if c < size {
            out.push(c + 1);
            if a[(c + 1) as usize] < mv {
                m = c + 1;
                mv = a[(c + 1) as usize];
            }
        }
        if mv < z {
            out.push(j);
            a[j as usize] = mv;
            j = m;
        } else {
            break;
        }
    }
    out.push(j);
    a[j as usize] = z;
}

fn heap_trace(n: u64, rng: &mut SplitMix64, sort_phase: bool) -> Vec<u64> {
    // 1-based heap in a[1..=n]; cell 0 is unused.
    let mut a: Vec<u64> = (0..=n).map(|_| rng.next_u64()).collect();
    let mut out = Vec::new();
    for i in (1..=n / 2).rev() {
        sift(&mut a, i, n, &mut out);
    }
    if sort_phase {
        let mut size = n;
        while size > 1 {
            out.push(1); // read the minimum out of the root
            out.push(size); // read the last leaf
            out.push(1); // move it to the root
            a[1] = a[size as usize];
            size -= 1;
            sift(&mut a, 1, size, &mut out);
        }
    }
    out
}

fn quicksort_trace(n: u64, rng: &mut SplitMix64) -> Vec<u64> {
    let mut a: Vec<u64> = (0..n).map(|_| rng.next_u64()).collect();
    let mut out = Vec::new();
    // Explicit stack, always pushing the larger side, so the depth stays
    // logarithmic even on adversarial pivot luck.
    let mut stack = vec![(0u64, n)];
    while let Some((lo, hi)) = stack.pop() {
        if hi - lo < 2 {
            continue;
        }
        let split = partition(&mut a, lo, hi, rng, &mut out);
        let (left, right) = ((lo, split), (split + 1, hi));
        let (small, large) = if left.1 - left.0 <= right.1 - right.0 {
            (left, right)
        } else {
            (right, left)
        };
        stack.push(large);
        stack.push(small);
    }
    out
}

/// Lomuto partition over `[lo, hi)` with a random pivot. A swap emits one
/// access per touched element.
fn partition(a: &mut [u64], lo: u64, hi: u64, rng: &mut SplitMix64, out: &mut Vec<u64>) -> u64 {
    let pr = lo + rng.below(hi - lo);
    out.push(pr);
    out.push(hi - 1);
    a.swap(pr as usize, (hi - 1) as usize);
    let pivot = a[(hi - 1) as usize];
    let mut i = lo;
    for j in lo..hi - 1 {
        out.push(j);
        if a[j as usize] < pivot {
            if i != j {
                out.push(i);
                out.push(j);
                a.swap(i as usize, j as usize);
            }
            i += 1;
        }
    }
    out.push(i);
    out.push(hi - 1);
    a.swap(i as usize, (hi - 1) as usize);
    i
}

/// Transpose of the quadrant at (r0, c0) with side `2^levels`, both matrices
/// bit-interleaved. Recursing TL, TR, BL, BR reads the source in straight
/// layout order; each base-case move reads A and writes the mirrored cell of
/// B (which lives at offset n).
fn recursive_transpose(r0: u64, c0: u64, side: u64, levels: u32, n: u64, out: &mut Vec<u64>) {
    if side == 1 {
        out.push(morton(r0, c0, levels));
        out.push(n + morton(c0, r0, levels));
        return;
    }
    let h = side / 2;
    recursive_transpose(r0, c0, h, levels, n, out);
    recursive_transpose(r0, c0 + h, h, levels, n, out);
    recursive_transpose(r0 + h, c0, h, levels, n, out);
    recursive_transpose(r0 + h, c0 + h, h, levels, n, out);
}

/// Bit-interleaved cell offset for (row, col) in a matrix of side
/// `2^levels`; the row bit is the higher bit of each pair, so quadrants are
/// laid out TL, TR, BL, BR.
fn morton(r: u64, c: u64, levels: u32) -> u64 {
    let mut out = 0u64;
    for b in 0..levels {
        out |= ((c >> b) & 1) << (2 * b);
        out |= ((r >> b) & 1) << (2 * b + 1);
    }
    out
}

/// Positions of the nodes of a complete binary tree of `levels` levels
/// (heap-numbered 1..2^levels) in the van Emde Boas layout. The tree splits
/// into a top tree of `ceil(levels/2)` levels followed by its bottom trees
/// left to right, recursively.
pub fn veb_positions(levels: u32) -> Vec<u64> {
    let count = (1u64 << levels) - 1;
    let mut pos = vec![0u64; (count + 1) as usize];
    let mut next = 0u64;
    veb_fill(1, levels, &mut next, &mut pos);
    pos
}

fn veb_fill(root: u64, levels: u32, next: &mut u64, pos: &mut [u64]) {
    if levels == 1 {
        pos[root as usize] = *next;
        *next += 1;
        return;
    }
    let top = levels.div_ceil(2);
    let bottom = levels - top;
    veb_fill(root, top, next, pos);
    // Bottom-tree roots are the children of the top tree's lowest level.
    let first = root << (top - 1);
    for leaf in first..first + (1 << (top - 1)) {
        veb_fill(2 * leaf, bottom, next, pos);
        veb_fill(2 * leaf + 1, bottom, next, pos);
    }
}

fn veb_search_trace(n: u64, queries: u64, rng: &mut SplitMix64) -> Result<Vec<u64>> {
    if !(n + 1).is_power_of_two() {
        return Err(Error::Config(format!(
            "van Emde Boas search needs n = 2^h - 1 nodes, got {n}"
        )));
    }
    let levels = (n + 1).ilog2();
    let pos = veb_positions(levels);
    let mut out = Vec::new();
    for _ in 0..queries {
        // Search for the key of in-order rank `target`; the walk is the
        // standard BST descent over the heap-numbered complete tree.
        let target = rng.below(n);
        let mut node = 1u64;
        let mut lo = 0u64;
        let mut hi = n;
        loop {
            let mid = (lo + hi) / 2;
            out.push(pos[node as usize]);
            if mid == target {
                break;
            } else if target < mid {
                node *= 2;
                hi = mid;
            } else {
                node = 2 * node + 1;
                lo = mid + 1;
            }
        }
    }
    Ok(out)
}

/// Exact page-level statistics of a trace under a given configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStats {
    pub pages_touched: u64,
    /// Number of pages in the closed range [min page, max page].
    pub span_pages: u64,
    /// Accesses divided by pages touched.
    pub mean_accesses_per_page: f64,
    /// True iff the page sequence is monotone nondecreasing or nonincreasing.
    pub page_monotone: bool,
    /// Largest |difference| between consecutive page indices.
    pub max_page_gap: u64,
}

pub fn trace_stats(trace: &Trace, cfg: &AddressSpaceConfig) -> TraceStats {
    let p = cfg.p();
    let mut pages: Vec<u64> = trace.resolved().map(|a| a >> p).collect();
    let mut nondecreasing = true;
    let mut nonincreasing = true;
    let mut max_gap = 0u64;
    for w in pages.windows(2) {
        if w[1] > w[0] {
            nonincreasing = false;
            max_gap = max_gap.max(w[1] - w[0]);
        } else if w[1] < w[0] {
            nondecreasing = false;
            max_gap = max_gap.max(w[0] - w[1]);
        }
    }
    let span_pages = match (pages.iter().min(), pages.iter().max()) {
        (Some(lo), Some(hi)) => hi - lo + 1,
        _ => 0,
    };
    let total = pages.len() as u64;
    pages.sort_unstable();
    pages.dedup();
    let touched = pages.len() as u64;
    TraceStats {
        pages_touched: touched,
        span_pages,
        mean_accesses_per_page: if touched == 0 {
            0.0
        } else {
            total as f64 / touched as f64
        },
        page_monotone: nondecreasing || nonincreasing,
        max_page_gap: max_gap,
    }
}

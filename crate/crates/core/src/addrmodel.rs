//! Virtual-address decomposition and the translation tree.
//!
//! A virtual address is a string of `d` index digits in base `K = 2^k`
//! followed by a page offset in `[0, P)` with `P = 2^p`. Translating an
//! address walks a `K`-ary tree of depth `d` from the root `(d, 0)` down to
//! the data page `(0, floor(addr / P))`. Both `P` and `K` are restricted to
//! powers of two so decomposition is a plain bit split.

use crate::error::{Error, Result};

/// Model parameters: page size `P = 2^p`, tree fanout `K = 2^k`, tree depth
/// `d`, translation cache capacity `W` (in nodes), and the cost `tau` of one
/// cache fault in RAM-instruction units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AddressSpaceConfig {
    p: u32,
    k: u32,
    d: u32,
    w: u64,
    tau: u64,
}

impl AddressSpaceConfig {
    /// Construction enforces only `K >= 2`, `P >= 1`, `d >= 0`, `W >= 1`,
    /// `tau >= 1`, plus the representational limit `k*d + p <= 63` so every
    /// address fits in a `u64`. The stronger order assumptions are checked
    /// separately by [`validate_order_assumptions`].
    pub fn new(k: u32, p: u32, d: u32, w: u64, tau: u64) -> Result<Self> {
        if k < 1 {
            return Err(Error::Config(format!(
                "fanout exponent k must be >= 1, got {k}"
            )));
        }
        if w < 1 {
            return Err(Error::Config("cache capacity W must be >= 1".into()));
        }
        if tau < 1 {
            return Err(Error::Config("fault cost tau must be >= 1".into()));
        }
        let bits = k as u64 * d as u64 + p as u64;
        if bits > 63 {
            return Err(Error::Config(format!(
                "address space needs {bits} bits (k*d + p), at most 63 supported"
            )));
        }
        Ok(AddressSpaceConfig { p, k, d, w, tau })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn depth(&self) -> u32 {
        self.d
    }

    pub fn capacity(&self) -> u64 {
        self.w
    }

    pub fn tau(&self) -> u64 {
        self.tau
    }

    /// Page size `P = 2^p` in addressable cells.
    pub fn page_size(&self) -> u64 {
        1 << self.p
    }

    /// Tree fanout `K = 2^k`.
    pub fn fanout(&self) -> u64 {
        1 << self.k
    }

    /// Largest translatable address, `K^d * P - 1`.
    pub fn max_address(&self) -> u64 {
        let bits = self.k * self.d + self.p;
        if bits == 0 {
            0
        } else {
            (1u64 << bits) - 1
        }
    }

    /// Number of data pages, `K^d`.
    pub fn pages(&self) -> u64 {
        1 << (self.k * self.d)
    }

    /// Total number of tree nodes across layers `0..=d`.
    pub fn tree_nodes(&self) -> u64 {
        (0..=self.d).map(|layer| self.nodes_on_layer(layer)).sum()
    }

    /// Number of nodes on one layer, `K^(d - layer)`.
    pub fn nodes_on_layer(&self, layer: u32) -> u64 {
        debug_assert!(layer <= self.d);
        1 << (self.k * (self.d - layer))
    }

    /// Checked constructor for an address in this configuration's range.
    pub fn address(&self, value: u64) -> Result<VirtualAddress> {
        if value > self.max_address() {
            Err(Error::OutOfRange {
                value,
                max: self.max_address(),
            })
        } else {
            Ok(VirtualAddress(value))
        }
    }

    /// Copy of this config with a different cache capacity. The policy
    /// comparisons run the same address space under several `W` values.
    pub fn with_capacity(&self, w: u64) -> Result<Self> {
        Self::new(self.k, self.p, self.d, w, self.tau)
    }
}

/// A validated address, guaranteed in range for the config that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct VirtualAddress(u64);

impl VirtualAddress {
    pub fn value(&self) -> u64 {
        self.0
    }
}

/// One node of the translation tree: `(layer, number)` with the root at
/// `(d, 0)` and data pages on layer 0. The children of `(l, i)` for `l >= 1`
/// are `(l-1, K*i + a)` for `a` in `[0, K)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub layer: u32,
    pub number: u64,
}

impl NodeId {
    pub fn new(layer: u32, number: u64) -> Self {
        NodeId { layer, number }
    }

    pub fn is_root(&self, cfg: &AddressSpaceConfig) -> bool {
        self.layer == cfg.depth() && self.number == 0
    }

    /// Parent node, or `None` for the root.
    pub fn parent(&self, cfg: &AddressSpaceConfig) -> Option<NodeId> {
        if self.layer >= cfg.depth() {
            None
        } else {
            Some(NodeId::new(self.layer + 1, self.number >> cfg.k()))
        }
    }

    /// True iff `self` is an ancestor of `other` or equal to it.
    pub fn is_ancestor_of(&self, other: &NodeId, cfg: &AddressSpaceConfig) -> bool {
        self.layer >= other.layer
            && (other.number >> (cfg.k() * (self.layer - other.layer))) == self.number
    }
}

/// The `d + 1` nodes `[v_d, ..., v_0]` visited when translating one address,
/// root first, data page last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationPath {
    nodes: Vec<NodeId>,
}

impl TranslationPath {
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn leaf(&self) -> NodeId {
        *self.nodes.last().expect("path has d + 1 >= 1 nodes")
    }
}

/// Split an address into its `d` index digits (most-significant first) and
/// the page offset.
pub fn decompose(addr: VirtualAddress, cfg: &AddressSpaceConfig) -> (Vec<u64>, u64) {
    let offset = addr.value() & (cfg.page_size() - 1);
    let index = addr.value() >> cfg.p();
    let digit_mask = cfg.fanout() - 1;
    let segments = (0..cfg.depth())
        .rev()
        .map(|i| (index >> (cfg.k() * i)) & digit_mask)
        .collect();
    (segments, offset)
}

/// Inverse of [`decompose`].
pub fn recompose(
    segments: &[u64],
    offset: u64,
    cfg: &AddressSpaceConfig,
) -> Result<VirtualAddress> {
    if segments.len() != cfg.depth() as usize {
        return Err(Error::Config(format!(
            "expected {} index digits, got {}",
            cfg.depth(),
            segments.len()
        )));
    }
    if offset >= cfg.page_size() {
        return Err(Error::Config(format!(
            "offset {offset} exceeds page size {}",
            cfg.page_size()
        )));
    }
    let mut index = 0u64;
    for &s in segments {
        if s >= cfg.fanout() {
            return Err(Error::Config(format!(
                "index digit {s} exceeds fanout {}",
                cfg.fanout()
            )));
        }
        index = (index << cfg.k()) | s;
    }
    cfg.address((index << cfg.p()) | offset)
}

/// The translation path for an address: node `(l, idx >> k*l)` on every layer
/// `l` from `d` down to 0, where `idx = floor(addr / P)`.
pub fn translation_path(addr: VirtualAddress, cfg: &AddressSpaceConfig) -> TranslationPath {
    let index = addr.value() >> cfg.p();
    let nodes = (0..=cfg.depth())
        .rev()
        .map(|layer| NodeId::new(layer, index >> (cfg.k() * layer)))
        .collect();
    TranslationPath { nodes }
}

/// Number of trailing positions in which the translation paths of `a` and `b`
/// differ. Zero iff both addresses lie in the same page. The paths agree on a
/// prefix and disagree on a suffix, so this single count describes the whole
/// divergence.
pub fn path_divergence(a: VirtualAddress, b: VirtualAddress, cfg: &AddressSpaceConfig) -> u32 {
    let ia = a.value() >> cfg.p();
    let ib = b.value() >> cfg.p();
    let x = ia ^ ib;
    if x == 0 {
        return 0;
    }
    let highest_bit = 63 - x.leading_zeros();
    highest_bit / cfg.k() + 1
}

/// One violated order assumption, as reported by
/// [`validate_order_assumptions`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderViolation {
    /// `1 <= tau * d` failed (only possible when `d = 0`).
    TauDepthPositive { tau_d: u64 },
    /// `tau * d <= P` failed.
    TauDepthAtMostPage { tau_d: u64, page: u64 },
    /// `K >= 2` failed (unreachable for constructed configs).
    FanoutAtLeastTwo { fanout: u64 },
    /// `K^d < m / P`: the tree cannot translate the whole footprint.
    TreeTooSmall { pages: u64, needed: u64 },
    /// `K^d > 2m / P`: the tree is more than twice the needed size.
    TreeTooLarge { pages: u64, limit_numerator: u64 },
    /// `d <= W` failed: the cache cannot hold one translation path.
    CacheBelowDepth { d: u32, w: u64 },
}

impl std::fmt::Display for OrderViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OrderViolation::TauDepthPositive { tau_d } => {
                write!(f, "1 <= tau*d violated (tau*d = {tau_d})")
            }
            OrderViolation::TauDepthAtMostPage { tau_d, page } => {
                write!(f, "tau*d <= P violated ({tau_d} > {page})")
            }
            OrderViolation::FanoutAtLeastTwo { fanout } => {
                write!(f, "K >= 2 violated (K = {fanout})")
            }
            OrderViolation::TreeTooSmall { pages, needed } => {
                write!(
                    f,
                    "m/P <= K^d violated (K^d = {pages} < {needed} pages needed)"
                )
            }
            OrderViolation::TreeTooLarge {
                pages,
                limit_numerator,
            } => {
                write!(
                    f,
                    "K^d <= 2m/P violated (K^d = {pages}, 2m = {limit_numerator} cells)"
                )
            }
            OrderViolation::CacheBelowDepth { d, w } => {
                write!(f, "d <= W violated ({d} > {w})")
            }
        }
    }
}

/// Result of checking the asymptotic order relations between the model
/// parameters for a memory footprint of `m` cells.
#[derive(Debug, Clone)]
pub struct OrderReport {
    pub violations: Vec<OrderViolation>,
    /// The exponent condition `W < m^theta` has no fixed theta; it is
    /// reported here informationally and never counted as a violation.
    pub exponent_note: String,
}

impl OrderReport {
    pub fn all_hold(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the order assumptions for footprint `m`: (1) `1 <= tau*d <= P`,
/// (2) `K >= 2`, (3) `m/P <= K^d <= 2m/P`, (4) `d <= W`. Returns an empty
/// violation list iff all four hold.
pub fn validate_order_assumptions(cfg: &AddressSpaceConfig, m: u64) -> OrderReport {
    assert!(m >= 1, "memory footprint must be positive");
    let mut violations = Vec::new();

    let tau_d = cfg.tau() * cfg.depth() as u64;
    if tau_d < 1 {
        violations.push(OrderViolation::TauDepthPositive { tau_d });
    }
    if tau_d > cfg.page_size() {
        violations.push(OrderViolation::TauDepthAtMostPage {
            tau_d,
            page: cfg.page_size(),
        });
    }

    if cfg.fanout() < 2 {
        violations.push(OrderViolation::FanoutAtLeastTwo {
            fanout: cfg.fanout(),
        });
    }

    // m/P <= K^d <= 2m/P, compared exactly as K^d * P >= m and K^d * P <= 2m.
    let span = cfg.pages() as u128 * cfg.page_size() as u128;
    if span < m as u128 {
        violations.push(OrderViolation::TreeTooSmall {
            pages: cfg.pages(),
            needed: m.div_ceil(cfg.page_size()),
        });
    }
    if span > 2 * m as u128 {
        violations.push(OrderViolation::TreeTooLarge {
            pages: cfg.pages(),
            limit_numerator: 2 * m,
        });
    }

    if (cfg.depth() as u64) > cfg.capacity() {
        violations.push(OrderViolation::CacheBelowDepth {
            d: cfg.depth(),
            w: cfg.capacity(),
        });
    }

    OrderReport {
        violations,
        exponent_note: format!(
            "W < m^theta for some theta in (0,1) left unresolved: W = {}, m = {}",
            cfg.capacity(),
            m
        ),
    }
}

//! End-to-end engines: VAT runs, the external-memory baseline, and nested
//! (two-level) translation.
//!
//! The EM baseline charges one fault per block transfer into a fully
//! associative LRU cache of `M / B` blocks and ignores translation
//! entirely; it exists for the jumping-versus-random comparison and as the
//! reference point for the pinned-internal VAT mode. The baseline uses LRU
//! rather than an optimal policy since the comparisons it feeds are
//! qualitative.

use std::collections::{BTreeMap, HashMap};

use crate::addrmodel::{translation_path, AddressSpaceConfig, NodeId};
use crate::error::{Error, Result};
use crate::tc::{self, PolicyKind, SimResult};
use crate::workloads::{Trace, WorkloadKind};

/// External-memory machine: cache of `m` cells moved in blocks of `b`
/// cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmConfig {
    m: u64,
    b: u64,
}

impl EmConfig {
    pub fn new(m: u64, b: u64) -> Result<Self> {
        if b == 0 {
            return Err(Error::Config("block size B must be positive".into()));
        }
        if b > m {
            return Err(Error::Config(format!(
                "block size B = {b} exceeds cache size M = {m}"
            )));
        }
        Ok(EmConfig { m, b })
    }

    pub fn cache_cells(&self) -> u64 {
        self.m
    }

    pub fn block_cells(&self) -> u64 {
        self.b
    }

    pub fn blocks(&self) -> u64 {
        self.m / self.b
    }
}

/// Run the whole trace through a cold translation cache.
pub fn run_vat(cfg: AddressSpaceConfig, policy: PolicyKind, trace: &Trace) -> Result<SimResult> {
    tc::run_trace(cfg, policy, &trace.resolved_vec())
}

/// VAT run with all internal nodes pinned: only data pages occupy the cache,
/// which makes the leaf layer behave exactly like an EM block cache with
/// `B = P` and `M/B = W`.
pub fn run_vat_pinned_internal(cfg: AddressSpaceConfig, trace: &Trace) -> Result<SimResult> {
    tc::run_trace_pinned_internal(cfg, &trace.resolved_vec())
}

/// Cold fully-associative LRU over blocks `floor(address / B)`; returns the
/// miss count.
pub fn run_em(em: EmConfig, addresses: impl IntoIterator<Item = u64>) -> u64 {
    let capacity = em.blocks();
    let mut stamps: HashMap<u64, u64> = HashMap::new();
    let mut recency: BTreeMap<u64, u64> = BTreeMap::new();
    let mut misses = 0u64;
    for (clock, addr) in addresses.into_iter().enumerate() {
        let clock = clock as u64;
        let block = addr / em.block_cells();
        if let Some(stamp) = stamps.get_mut(&block) {
            recency.remove(stamp);
            recency.insert(clock, block);
            *stamp = clock;
        } else {
            misses += 1;
            if stamps.len() as u64 == capacity {
                let (_, victim) = recency.pop_first().expect("cache is non-empty");
                stamps.remove(&victim);
            }
            stamps.insert(block, clock);
            recency.insert(clock, block);
        }
    }
    misses
}

/// Convenience wrapper: a VAT run plus the EM baseline over the same
/// addresses, folded into one result.
pub fn run_vat_with_em_baseline(
    cfg: AddressSpaceConfig,
    policy: PolicyKind,
    em: EmConfig,
    trace: &Trace,
) -> Result<SimResult> {
    let addrs = trace.resolved_vec();
    let mut result = tc::run_trace(cfg, policy, &addrs)?;
    result.em_block_faults = Some(run_em(em, addrs));
    Ok(result)
}

#[derive(Debug, Clone)]
pub struct NestedVatResult {
    pub guest: SimResult,
    pub host: SimResult,
    /// `tau_guest * guest faults + tau_host * host faults`.
    pub combined_cost: u64,
}

/// Host virtual address of a guest translation-tree node: nodes are embedded
/// contiguously by (layer, number) rank, top layer first, each occupying
/// `K_guest` cells (its child-pointer table). Layers above `layer` hold
/// `(K^(d-layer) - 1) / (K - 1)` nodes in total.
pub fn guest_node_host_address(guest_cfg: &AddressSpaceConfig, node: &NodeId) -> u64 {
    let above = (guest_cfg.nodes_on_layer(node.layer) - 1) / (guest_cfg.fanout() - 1);
    (above + node.number) * guest_cfg.fanout()
}

/// Two-level translation: every guest node access (hit or miss) requires a
/// host-level translation of that node's host virtual address, per
/// [`guest_node_host_address`].
pub fn run_nested_vat(
    guest_cfg: AddressSpaceConfig,
    host_cfg: AddressSpaceConfig,
    guest_policy: PolicyKind,
    host_policy: PolicyKind,
    trace: &Trace,
) -> Result<NestedVatResult> {
    let node_cells = guest_cfg.fanout();
    let table_cells = guest_cfg.tree_nodes() as u128 * node_cells as u128;
    if table_cells > host_cfg.max_address() as u128 + 1 {
        return Err(Error::Config(format!(
            "guest node table needs {table_cells} host cells, host range is {}",
            host_cfg.max_address() as u128 + 1
        )));
    }

    let addrs = trace.resolved_vec();

    let mut host_addrs = Vec::with_capacity(addrs.len() * (guest_cfg.depth() as usize + 1));
    for &a in &addrs {
        let va = guest_cfg.address(a)?;
        for node in translation_path(va, &guest_cfg).nodes() {
            host_addrs.push(guest_node_host_address(&guest_cfg, node));
        }
    }

    let guest = tc::run_trace(guest_cfg, guest_policy, &addrs)?;
    let host = tc::run_trace(host_cfg, host_policy, &host_addrs)?;
    let combined_cost = guest.vat_cost + host.vat_cost;
    Ok(NestedVatResult {
        guest,
        host,
        combined_cost,
    })
}

/// Total faults divided by the workload's RAM complexity at problem size
/// `n`. Constant in `n` iff the RAM model predicts the fault growth.
pub fn normalized_fault_rate(result: &SimResult, kind: &WorkloadKind, n: u64) -> f64 {
    result.total_faults as f64 / kind.ram_complexity(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads::gen;

    fn cfg(k: u32, p: u32, d: u32, w: u64) -> AddressSpaceConfig {
        AddressSpaceConfig::new(k, p, d, w, 1).unwrap()
    }

    #[test]
    fn em_config_validation() {
        assert!(EmConfig::new(8, 0).is_err());
        assert!(EmConfig::new(8, 16).is_err());
        assert!(EmConfig::new(16, 8).is_ok());
    }

    #[test]
    fn em_sequential_compulsory_misses() {
        let em = EmConfig::new(64, 8).unwrap();
        let n = 100u64;
        assert_eq!(run_em(em, 0..n), n.div_ceil(8));
        // Unaligned base touches one extra block.
        assert_eq!(run_em(em, 4..n + 4), 13);
    }

    #[test]
    fn em_all_fitting_trace_misses_distinct_blocks() {
        let em = EmConfig::new(1024, 8).unwrap();
        let addrs = [0u64, 3, 9, 200, 9, 0, 17];
        assert_eq!(run_em(em, addrs.iter().copied()), 4);
    }

    #[test]
    fn em_jumping_and_random_match_with_block_sized_stride() {
        let cfg_pages = 64u64;
        let em = EmConfig::new(8 * 8, 8).unwrap(); // 8 blocks, far below 64
        let jump = gen(WorkloadKind::Jumping { stride: 8 }, cfg_pages, 0, 0, 1).unwrap();
        let rand = gen(WorkloadKind::RandomScan, cfg_pages, 5, 0, 8).unwrap();
        let jm = run_em(em, jump.resolved());
        let rm = run_em(em, rand.resolved());
        assert_eq!(jm, cfg_pages);
        assert_eq!(jm, rm);
    }

    #[test]
    fn vat_sequential_single_page() {
        let c = cfg(1, 3, 4, 8);
        let t = gen(WorkloadKind::Sequential, 8, 0, 0, 1).unwrap();
        let r = run_vat(c, PolicyKind::Lru, &t).unwrap();
        assert_eq!(r.total_faults, 5);
        assert_eq!(r.ram_ops, 8);
    }

    #[test]
    fn pinned_internal_equals_em_with_matching_geometry() {
        // P = B and W = M/B: leaf faults must equal EM block faults.
        let c = cfg(1, 3, 6, 4);
        let em = EmConfig::new(4 * 8, 8).unwrap();
        for seed in 0..4 {
            let t = gen(WorkloadKind::RandomScan, 256, seed, 0, 1).unwrap();
            let vat = run_vat_pinned_internal(c, &t).unwrap();
            let em_misses = run_em(em, t.resolved());
            assert_eq!(vat.total_faults, em_misses, "seed {seed}");
        }
    }

    #[test]
    fn nested_repeat_address_warms_both_levels() {
        let guest = cfg(1, 2, 3, 8);
        let host = cfg(1, 3, 5, 16);
        let t = Trace::from_addresses(vec![5, 5, 5, 5]);
        let r = run_nested_vat(guest, host, PolicyKind::Lru, PolicyKind::Lru, &t).unwrap();
        // Everything after the first translation hits on both levels.
        assert_eq!(r.guest.per_translation[0].faults, 4);
        for s in &r.guest.per_translation[1..] {
            assert_eq!(s.faults, 0);
        }
        let first_host: u64 = r.host.per_translation[..4].iter().map(|s| s.faults).sum();
        assert_eq!(r.host.total_faults, first_host);
    }

    #[test]
    fn nested_cold_translation_bounds() {
        let guest = cfg(1, 2, 3, 8);
        let host = cfg(1, 3, 5, 16);
        let t = Trace::from_addresses(vec![9]);
        let r = run_nested_vat(guest, host, PolicyKind::Lru, PolicyKind::Lru, &t).unwrap();
        let dg = guest.depth() as u64;
        let dh = host.depth() as u64;
        assert_eq!(r.guest.total_faults, dg + 1);
        assert!(r.host.total_faults <= (dg + 1) * (dh + 1));
        assert!(r.combined_cost >= r.guest.vat_cost);
    }

    #[test]
    fn nested_embedding_is_rank_contiguous() {
        // K = 4, d = 2: root at slot 0, layer-1 nodes at slots 1..=4,
        // leaves at slots 5..=20; one slot is K cells.
        let guest = cfg(2, 1, 2, 8);
        let addr = |l, i| guest_node_host_address(&guest, &NodeId::new(l, i));
        assert_eq!(addr(2, 0), 0);
        assert_eq!(addr(1, 0), 4);
        assert_eq!(addr(1, 3), 16);
        assert_eq!(addr(0, 0), 20);
        assert_eq!(addr(0, 15), 80);
    }

    #[test]
    fn nested_rejects_too_small_host() {
        let guest = cfg(2, 2, 3, 8); // 85 nodes * 4 cells each
        let host = cfg(1, 2, 3, 8); // 32-cell host range
        let t = Trace::from_addresses(vec![0]);
        assert!(matches!(
            run_nested_vat(guest, host, PolicyKind::Lru, PolicyKind::Lru, &t),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn normalized_rate_divides_by_ram_complexity() {
        let c = cfg(1, 3, 4, 8);
        let t = gen(WorkloadKind::Sequential, 64, 0, 0, 1).unwrap();
        let r = run_vat(c, PolicyKind::Lru, &t).unwrap();
        let rate = normalized_fault_rate(&r, &WorkloadKind::Sequential, 64);
        assert!((rate - r.total_faults as f64 / 64.0).abs() < 1e-12);
    }
}

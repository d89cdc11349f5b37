//! Bounded translation cache with pluggable replacement policies.
//!
//! The cache stores at most `W` translation-tree nodes. Translating an
//! address accesses every node of its translation path root-to-leaf; a
//! missing node is inserted at the moment it is accessed (counting one
//! fault), and an eviction happens only to make room. Four policies are
//! provided:
//!
//! * `Lru` evicts the least recently accessed resident node.
//! * `IsLru` evicts the lowest resident descendant of the least recently
//!   used node, which preserves the initial segment property (ISP): the
//!   resident set stays a parent-closed subtree containing the root.
//! * `Min` is the clairvoyant offline optimum: it evicts the resident node
//!   whose next access lies furthest in the future, nodes never needed
//!   again first.
//! * `IsMin` is the offline optimum restricted to ISP-preserving choices:
//!   candidates are resident nodes that are off the current translation
//!   path and have no resident descendants.
//!
//! The offline policies need the whole trace up front to build a next-use
//! index over the expanded node-access sequence (each address contributes
//! `d + 1` node accesses). Ties on equal next use break deterministically:
//! deeper layer first, then larger node number.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::addrmodel::{AddressSpaceConfig, NodeId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Lru,
    IsLru,
    Min,
    IsMin,
}

impl PolicyKind {
    /// MIN and ISMIN decide evictions from future accesses, so they need the
    /// full trace in advance.
    pub fn is_offline(&self) -> bool {
        matches!(self, PolicyKind::Min | PolicyKind::IsMin)
    }

    /// ISP-preserving strategies exist only for caches with `W > d`.
    pub fn requires_isp(&self) -> bool {
        matches!(self, PolicyKind::IsLru | PolicyKind::IsMin)
    }

    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Lru,
        PolicyKind::IsLru,
        PolicyKind::Min,
        PolicyKind::IsMin,
    ];
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PolicyKind::Lru => "lru",
            PolicyKind::IsLru => "islru",
            PolicyKind::Min => "min",
            PolicyKind::IsMin => "ismin",
        };
        f.write_str(s)
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lru" => Ok(PolicyKind::Lru),
            "islru" => Ok(PolicyKind::IsLru),
            "min" => Ok(PolicyKind::Min),
            "ismin" => Ok(PolicyKind::IsMin),
            other => Err(Error::Config(format!(
                "unknown policy {other:?} (expected lru, islru, min or ismin)"
            ))),
        }
    }
}

/// Per-translation outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TranslationStats {
    /// Insertions performed during this translation.
    pub faults: u64,
    /// Layer of the topmost path node absent when the translation started,
    /// `None` if the whole path was resident.
    pub highest_missing_layer: Option<u32>,
}

/// Aggregate of one trace run from a cold cache.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub total_faults: u64,
    /// `tau * total_faults`.
    pub vat_cost: u64,
    pub per_translation: Vec<TranslationStats>,
    /// Trace length; every access is one RAM operation.
    pub ram_ops: u64,
    /// Filled by the EM baseline runner when one is requested.
    pub em_block_faults: Option<u64>,
}

#[derive(Debug, Clone, Copy)]
struct ResidentInfo {
    /// Recency stamp (online policies).
    stamp: u64,
    /// Position of the next access in the expanded node sequence (offline
    /// policies), `u64::MAX` if never used again.
    next_use: u64,
    /// Resident-children count, maintained only under ISMIN where ISP
    /// guarantees parents outlive their children.
    children: u32,
}

#[derive(Debug)]
struct OfflineSchedule {
    addrs: Vec<u64>,
    /// `next_use[i]` = next position at which the node accessed at position
    /// `i` is accessed again, `u64::MAX` if never.
    next_use: Vec<u64>,
    /// Cursor into the expanded node-access sequence.
    pos: usize,
    /// Cursor into `addrs`, used to verify the caller follows the trace.
    next_addr: usize,
}

#[derive(Debug)]
pub struct TranslationCache {
    cfg: AddressSpaceConfig,
    policy: PolicyKind,
    resident: HashMap<NodeId, ResidentInfo>,
    /// stamp -> node, ordered oldest first (online policies only).
    recency: BTreeMap<u64, NodeId>,
    clock: u64,
    schedule: Option<OfflineSchedule>,
    /// When set, internal nodes (layer >= 1) are permanently resident for
    /// free and only data pages go through the bounded cache. This exists so
    /// the leaf layer can emulate an EM block cache exactly; it is not one of
    /// the model's policies.
    pin_internal: bool,
}

impl TranslationCache {
    pub fn new(cfg: AddressSpaceConfig, policy: PolicyKind, trace: Option<&[u64]>) -> Result<Self> {
        if policy.requires_isp() && cfg.capacity() <= cfg.depth() as u64 {
            return Err(Error::Config(format!(
                "{policy} preserves initial segments and needs W > d (W = {}, d = {})",
                cfg.capacity(),
                cfg.depth()
            )));
        }
        let schedule = if policy.is_offline() {
            let trace = trace.ok_or_else(|| {
                Error::Config(format!(
                    "offline policy {policy} requires the trace up front"
                ))
            })?;
            Some(build_schedule(&cfg, trace)?)
        } else {
            None
        };
        Ok(TranslationCache {
            cfg,
            policy,
            resident: HashMap::new(),
            recency: BTreeMap::new(),
            clock: 0,
            schedule,
            pin_internal: false,
        })
    }

    /// LRU cache over data pages only; internal nodes are pinned. See the
    /// field documentation on `pin_internal`.
    pub fn new_with_pinned_internals(cfg: AddressSpaceConfig) -> Result<Self> {
        let mut tc = Self::new(cfg, PolicyKind::Lru, None)?;
        tc.pin_internal = true;
        Ok(tc)
    }

    pub fn config(&self) -> &AddressSpaceConfig {
        &self.cfg
    }

    pub fn policy(&self) -> PolicyKind {
        self.policy
    }

    pub fn resident_count(&self) -> u64 {
        self.resident.len() as u64
    }

    pub fn is_resident(&self, node: &NodeId) -> bool {
        self.resident.contains_key(node)
    }

    pub fn resident_nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.resident.keys()
    }

    /// True iff the resident set is empty or is a parent-closed set
    /// containing the root.
    pub fn isp_holds(&self) -> bool {
        if self.resident.is_empty() {
            return true;
        }
        let root = NodeId::new(self.cfg.depth(), 0);
        if !self.resident.contains_key(&root) {
            return false;
        }
        self.resident
            .keys()
            .all(|node| match node.parent(&self.cfg) {
                Some(parent) => self.resident.contains_key(&parent),
                None => true,
            })
    }

    /// Translate one address: access all path nodes root-to-leaf, inserting
    /// the missing ones. Returns the fault count and the layer of the
    /// topmost node that was missing when the translation began.
    pub fn translate(&mut self, addr: u64) -> Result<TranslationStats> {
        self.cfg.address(addr)?;
        if let Some(s) = &mut self.schedule {
            if s.next_addr >= s.addrs.len() || s.addrs[s.next_addr] != addr {
                return Err(Error::Sequence {
                    index: s.next_addr,
                    expected: s.addrs.get(s.next_addr).copied().unwrap_or(0),
                    found: addr,
                });
            }
            s.next_addr += 1;
        }

        let d = self.cfg.depth();
        let k = self.cfg.k();
        let index = addr >> self.cfg.p();

        let mut highest_missing_layer = None;
        for layer in (0..=d).rev() {
            if self.pin_internal && layer >= 1 {
                continue;
            }
            let node = NodeId::new(layer, index >> (k * layer));
            if !self.resident.contains_key(&node) {
                highest_missing_layer = Some(layer);
                break;
            }
        }

        let mut faults = 0;
        for layer in (0..=d).rev() {
            let node = NodeId::new(layer, index >> (k * layer));
            if self.pin_internal && layer >= 1 {
                continue;
            }
            self.access(node, index, &mut faults);
        }

        Ok(TranslationStats {
            faults,
            highest_missing_layer,
        })
    }

    fn access(&mut self, node: NodeId, current_index: u64, faults: &mut u64) {
        let next_use = match &mut self.schedule {
            Some(s) => {
                let nu = s.next_use[s.pos];
                s.pos += 1;
                nu
            }
            None => u64::MAX,
        };

        if let Some(info) = self.resident.get_mut(&node) {
            if self.schedule.is_some() {
                info.next_use = next_use;
            } else {
                let old = info.stamp;
                info.stamp = self.clock;
                self.recency.remove(&old);
                self.recency.insert(self.clock, node);
                self.clock += 1;
            }
            return;
        }

        *faults += 1;
        if self.resident.len() as u64 == self.cfg.capacity() {
            self.evict_one(current_index);
        }
        let stamp = self.clock;
        if self.schedule.is_none() {
            self.recency.insert(stamp, node);
            self.clock += 1;
        }
        self.resident.insert(
            node,
            ResidentInfo {
                stamp,
                next_use,
                children: 0,
            },
        );
        if self.policy == PolicyKind::IsMin {
            if let Some(parent) = node.parent(&self.cfg) {
                if let Some(info) = self.resident.get_mut(&parent) {
                    info.children += 1;
                }
            }
        }
    }

    fn evict_one(&mut self, current_index: u64) {
        let victim = match self.policy {
            PolicyKind::Lru => {
                *self
                    .recency
                    .first_key_value()
                    .expect("eviction from a non-empty cache")
                    .1
            }
            PolicyKind::IsLru => {
                let lru = *self
                    .recency
                    .first_key_value()
                    .expect("eviction from a non-empty cache")
                    .1;
                // Lowest resident descendant of the LRU node (possibly the
                // LRU node itself).
                *self
                    .resident
                    .keys()
                    .filter(|v| lru.is_ancestor_of(v, &self.cfg))
                    .min_by(|a, b| a.layer.cmp(&b.layer).then(b.number.cmp(&a.number)))
                    .expect("the LRU node is its own descendant")
            }
            PolicyKind::Min => {
                *self
                    .resident
                    .iter()
                    .max_by(Self::victim_order)
                    .expect("eviction from a non-empty cache")
                    .0
            }
            PolicyKind::IsMin => {
                let k = self.cfg.k();
                *self
                    .resident
                    .iter()
                    .filter(|(node, info)| {
                        info.children == 0 && (current_index >> (k * node.layer)) != node.number
                    })
                    .max_by(Self::victim_order)
                    .expect("an off-path childless node exists whenever W > d")
                    .0
            }
        };
        self.remove(victim);
    }

    /// Furthest next use wins; ties break by deeper layer, then larger
    /// number. Never-used-again nodes carry `u64::MAX` and therefore go
    /// first, deepest first.
    fn victim_order(
        a: &(&NodeId, &ResidentInfo),
        b: &(&NodeId, &ResidentInfo),
    ) -> std::cmp::Ordering {
        a.1.next_use
            .cmp(&b.1.next_use)
            .then(b.0.layer.cmp(&a.0.layer))
            .then(a.0.number.cmp(&b.0.number))
    }

    fn remove(&mut self, node: NodeId) {
        let info = self.resident.remove(&node).expect("victim is resident");
        if self.schedule.is_none() {
            self.recency.remove(&info.stamp);
        }
        if self.policy == PolicyKind::IsMin {
            if let Some(parent) = node.parent(&self.cfg) {
                if let Some(pinfo) = self.resident.get_mut(&parent) {
                    pinfo.children -= 1;
                }
            }
        }
    }
}

fn build_schedule(cfg: &AddressSpaceConfig, trace: &[u64]) -> Result<OfflineSchedule> {
    for &a in trace {
        cfg.address(a)?;
    }
    let d = cfg.depth();
    let k = cfg.k();
    let per_addr = d as usize + 1;
    let total = trace.len() * per_addr;
    let mut next_use = vec![u64::MAX; total];
    let mut last_seen: HashMap<NodeId, u64> = HashMap::new();
    for pos in (0..total).rev() {
        let addr = trace[pos / per_addr];
        let layer = d - (pos % per_addr) as u32;
        let node = NodeId::new(layer, (addr >> cfg.p()) >> (k * layer));
        if let Some(&later) = last_seen.get(&node) {
            next_use[pos] = later;
        }
        last_seen.insert(node, pos as u64);
    }
    Ok(OfflineSchedule {
        addrs: trace.to_vec(),
        next_use,
        pos: 0,
        next_addr: 0,
    })
}

/// Translate every address of `trace` in order from a cold cache and
/// aggregate fault counts. The VAT cost is `tau` times the total.
pub fn run_trace(cfg: AddressSpaceConfig, policy: PolicyKind, trace: &[u64]) -> Result<SimResult> {
    let mut tc = TranslationCache::new(cfg, policy, Some(trace))?;
    run_on_cache(&mut tc, trace)
}

/// As [`run_trace`] but with internal nodes pinned (LRU over data pages).
pub fn run_trace_pinned_internal(cfg: AddressSpaceConfig, trace: &[u64]) -> Result<SimResult> {
    let mut tc = TranslationCache::new_with_pinned_internals(cfg)?;
    run_on_cache(&mut tc, trace)
}

fn run_on_cache(tc: &mut TranslationCache, trace: &[u64]) -> Result<SimResult> {
    let mut per_translation = Vec::with_capacity(trace.len());
    let mut total_faults = 0u64;
    for &addr in trace {
        let stats = tc.translate(addr)?;
        total_faults += stats.faults;
        per_translation.push(stats);
    }
    Ok(SimResult {
        total_faults,
        vat_cost: tc.cfg.tau() * total_faults,
        per_translation,
        ram_ops: trace.len() as u64,
        em_block_faults: None,
    })
}

//! Shared oracles for the integration suites. Everything here is
//! independent of the cache implementation it is used to check.
//!
//! Each test binary compiles this module separately and uses its own
//! subset, hence the blanket dead-code allowance.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use vatsim::addrmodel::{AddressSpaceConfig, NodeId};
use vatsim::rng::SplitMix64;

/// Expand a trace into its node-access sequence: each address contributes
/// its full translation path, root first.
pub fn node_sequence(cfg: &AddressSpaceConfig, trace: &[u64]) -> Vec<NodeId> {
    let mut seq = Vec::with_capacity(trace.len() * (cfg.depth() as usize + 1));
    for &addr in trace {
        let index = addr >> cfg.p();
        for layer in (0..=cfg.depth()).rev() {
            seq.push(NodeId::new(layer, index >> (cfg.k() * layer)));
        }
    }
    seq
}

/// Minimum number of insertions any demand-paging schedule can achieve on
/// the node sequence with a cache of `w` slots, found by exhaustive search
/// over eviction choices (memoized on the cache content).
pub fn exhaustive_min_faults(cfg: &AddressSpaceConfig, trace: &[u64], w: usize) -> u64 {
    let seq = node_sequence(cfg, trace);
    let mut memo: HashMap<(usize, Vec<NodeId>), u64> = HashMap::new();
    search(0, &BTreeSet::new(), &seq, w, &mut memo)
}

fn search(
    pos: usize,
    cache: &BTreeSet<NodeId>,
    seq: &[NodeId],
    w: usize,
    memo: &mut HashMap<(usize, Vec<NodeId>), u64>,
) -> u64 {
    // Skip over hits first so memo keys land on decision points.
    let mut pos = pos;
    while pos < seq.len() && cache.contains(&seq[pos]) {
        pos += 1;
    }
    if pos == seq.len() {
        return 0;
    }
    let key = (pos, cache.iter().copied().collect::<Vec<_>>());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let node = seq[pos];
    let result = if cache.len() < w {
        let mut next = cache.clone();
        next.insert(node);
        1 + search(pos + 1, &next, seq, w, memo)
    } else {
        let mut best = u64::MAX;
        for victim in cache {
            let mut next = cache.clone();
            next.remove(victim);
            next.insert(node);
            best = best.min(1 + search(pos + 1, &next, seq, w, memo));
        }
        best
    };
    memo.insert(key, result);
    result
}

/// Uniform random addresses over the full configured range.
pub fn random_addresses(cfg: &AddressSpaceConfig, n: usize, seed: u64) -> Vec<u64> {
    let mut rng = SplitMix64::new(seed);
    let span = cfg.max_address() + 1;
    (0..n).map(|_| rng.below(span)).collect()
}

/// Smallest integer g with K^g * P >= distance, i.e.
/// max(0, ceil(log_K(distance / P))) computed in integers.
pub fn divergence_lower_bound(cfg: &AddressSpaceConfig, distance: u64) -> u32 {
    let mut g = 0;
    let mut reach = cfg.page_size() as u128;
    while reach < distance as u128 {
        reach <<= cfg.k();
        g += 1;
    }
    g
}

/// Ordinary least squares of y against x; returns (slope, r_squared).
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, r_squared)
}

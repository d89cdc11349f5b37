//! Built-in verification: replays the model's invariants at a small scale
//! and reports one line per property.

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use vatsim::addrmodel::{AddressSpaceConfig, NodeId};
use vatsim::bounds::{cat_classify, random_scan_bounds, seq_bound, CatConstants};
use vatsim::error::Result;
use vatsim::rng::SplitMix64;
use vatsim::simulator::run_vat;
use vatsim::tc::{run_trace, PolicyKind, TranslationCache};
use vatsim::trace_io;
use vatsim::workloads::{gen, WorkloadKind};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

/// Run every property check. Configuration problems (for example pairing an
/// ISP policy with W <= d) surface as `Err`, not as failed checks.
pub fn run_checks(ws: &[u64], d: u32, trace_in: &[PathBuf]) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let base = AddressSpaceConfig::new(1, 3, d, ws[0], 1)?;
    let span = base.max_address() + 1;

    // Build all caches first so a bad W/d combination fails before any
    // simulation output.
    for &w in ws {
        TranslationCache::new(base.with_capacity(w)?, PolicyKind::IsLru, None)?;
    }

    let mut chain_bad = 0u64;
    let mut aug_bad = 0u64;
    let mut isp_aug_bad = 0u64;
    let mut law_bad = 0u64;
    for seed in 0..25u64 {
        let mut rng = SplitMix64::new(seed);
        let trace: Vec<u64> = (0..600).map(|_| rng.below(span)).collect();
        for &w in ws {
            let cfg = base.with_capacity(w)?;
            let min = run_trace(cfg, PolicyKind::Min, &trace)?;
            let ismin = run_trace(cfg, PolicyKind::IsMin, &trace)?;
            let islru = run_trace(cfg, PolicyKind::IsLru, &trace)?;
            let lru = run_trace(cfg, PolicyKind::Lru, &trace)?;
            if !(min.total_faults <= ismin.total_faults
                && ismin.total_faults <= islru.total_faults
                && islru.total_faults <= lru.total_faults)
            {
                chain_bad += 1;
            }
            let min_half = run_trace(cfg.with_capacity(w / 2)?, PolicyKind::Min, &trace)?;
            if lru.total_faults > 2 * min_half.total_faults {
                aug_bad += 1;
            }
            let aug = cfg.with_capacity(w + d as u64)?;
            if run_trace(aug, PolicyKind::IsMin, &trace)?.total_faults > min.total_faults {
                isp_aug_bad += 1;
            }
            if run_trace(aug, PolicyKind::Lru, &trace)?.total_faults > islru.total_faults {
                isp_aug_bad += 1;
            }
            for s in &lru.per_translation {
                let expected = s.highest_missing_layer.map_or(0, |l| l as u64 + 1);
                if s.faults != expected {
                    law_bad += 1;
                }
            }
        }
    }
    checks.push(check(
        "policy chain MIN <= ISMIN <= ISLRU <= LRU",
        chain_bad == 0,
        format!(
            "25 traces x {} capacities, {chain_bad} violations",
            ws.len()
        ),
    ));
    checks.push(check(
        "resource augmentation LRU(W) <= 2 MIN(W/2)",
        aug_bad == 0,
        format!("{aug_bad} violations"),
    ));
    checks.push(check(
        "augmented ISP bounds ISMIN(W+d) <= MIN(W), LRU(W+d) <= ISLRU(W)",
        isp_aug_bad == 0,
        format!("{isp_aug_bad} violations"),
    ));
    checks.push(check(
        "LRU miss-layer law",
        law_bad == 0,
        format!("{law_bad} violations"),
    ));

    let mut isp_bad = 0u64;
    for seed in 0..5u64 {
        let mut rng = SplitMix64::new(100 + seed);
        let trace: Vec<u64> = (0..300).map(|_| rng.below(span)).collect();
        for policy in [PolicyKind::IsLru, PolicyKind::IsMin] {
            let mut tc = TranslationCache::new(base, policy, Some(&trace))?;
            for &a in &trace {
                tc.translate(a)?;
                if !tc.isp_holds() {
                    isp_bad += 1;
                }
            }
        }
    }
    checks.push(check(
        "initial segment preserved by ISLRU and ISMIN",
        isp_bad == 0,
        format!("{isp_bad} violations"),
    ));

    let mut min_bad = 0u64;
    let micro = AddressSpaceConfig::new(1, 0, 2, 2, 1)?;
    for seed in 0..10u64 {
        let mut rng = SplitMix64::new(seed);
        let trace: Vec<u64> = (0..8).map(|_| rng.below(micro.max_address() + 1)).collect();
        let min = run_trace(micro, PolicyKind::Min, &trace)?.total_faults;
        if min != exhaustive_min(&micro, &trace, 2) {
            min_bad += 1;
        }
    }
    checks.push(check(
        "MIN equals the exhaustive eviction-schedule minimum",
        min_bad == 0,
        format!("{min_bad} mismatches on micro instances"),
    ));

    let mut seq_bad = 0u64;
    for k in [1u32, 3] {
        for p in [2u32, 4] {
            let n = 1u64 << 12;
            let dd = crate::sweep::depth_for(n - 1, k, p);
            let cfg = AddressSpaceConfig::new(k, p, dd, 2 * (dd as u64 + 1), 1)?;
            let trace = gen(WorkloadKind::Sequential, n, 0, 0, 1)?;
            let measured = run_vat(cfg, PolicyKind::Lru, &trace)?.total_faults;
            if measured > seq_bound(n, &cfg).upper_exact {
                seq_bad += 1;
            }
        }
    }
    checks.push(check(
        "sequential scan within its exact upper bound",
        seq_bad == 0,
        format!("{seq_bad} violations"),
    ));

    let n = 1u64 << 14;
    let cfg = AddressSpaceConfig::new(1, 3, 11, 64, 1)?;
    let trace = gen(WorkloadKind::RandomScan, n, 7, 0, 1)?;
    let mean = run_vat(cfg, PolicyKind::Lru, &trace)?.total_faults as f64 / n as f64;
    let band = random_scan_bounds(n, &cfg);
    let lo = band.lower / n as f64 - 1.0;
    let hi = band.upper / n as f64 + 1.0;
    checks.push(check(
        "random scan inside its fault band",
        mean >= lo && mean <= hi,
        format!("{mean:.2} per access in [{lo:.2}, {hi:.2}]"),
    ));

    let cat_cfg = AddressSpaceConfig::new(1, 3, 9, 20, 1)?;
    let seq_cat = cat_classify(
        &gen(WorkloadKind::Sequential, 4096, 0, 0, 1)?,
        &cat_cfg,
        &CatConstants::default(),
    );
    let rand_cat = cat_classify(
        &gen(WorkloadKind::RandomScan, 4096, 1, 0, 1)?,
        &cat_cfg,
        &CatConstants::default(),
    );
    checks.push(check(
        "CAT classifier separates sequential from random",
        seq_cat.is_cat && !rand_cat.is_cat,
        format!("sequential {}, random {}", seq_cat.is_cat, rand_cat.is_cat),
    ));

    for path in trace_in {
        let (meta, trace) = trace_io::read_any_file(path)?;
        let max_addr = trace.resolved().max().unwrap_or(0);
        let dd = crate::sweep::depth_for(max_addr, 1, 3);
        let cfg = AddressSpaceConfig::new(1, 3, dd, 2 * (dd as u64 + 1), 1)?;
        let result = run_vat(cfg, PolicyKind::Lru, &trace)?;
        let kind = meta
            .map(|m| m.kind.to_string())
            .unwrap_or_else(|| "replay".to_string());
        checks.push(Check {
            name: "trace file replays cleanly",
            pass: true,
            detail: format!(
                "{}: {kind}, {} accesses, {} faults under lru",
                path.display(),
                trace.len(),
                result.total_faults
            ),
        });
    }

    Ok(checks)
}

/// Minimal faults over all eviction schedules, by memoized exhaustive
/// search. Mirrors the oracle used by the acceptance suite, small enough to
/// run on every invocation.
fn exhaustive_min(cfg: &AddressSpaceConfig, trace: &[u64], w: usize) -> u64 {
    let mut seq = Vec::new();
    for &addr in trace {
        let index = addr >> cfg.p();
        for layer in (0..=cfg.depth()).rev() {
            seq.push(NodeId::new(layer, index >> (cfg.k() * layer)));
        }
    }
    let mut memo = HashMap::new();
    return go(0, &BTreeSet::new(), &seq, w, &mut memo);

    fn go(
        mut pos: usize,
        cache: &BTreeSet<NodeId>,
        seq: &[NodeId],
        w: usize,
        memo: &mut HashMap<(usize, Vec<NodeId>), u64>,
    ) -> u64 {
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
            1 + go(pos + 1, &next, seq, w, memo)
        } else {
            let mut best = u64::MAX;
            for victim in cache {
                let mut next = cache.clone();
                next.remove(victim);
                next.insert(node);
                best = best.min(1 + go(pos + 1, &next, seq, w, memo));
            }
            best
        };
        memo.insert(key, result);
        result
    }
}

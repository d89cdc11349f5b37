//! Acceptance suite. Every criterion prints one pass/fail line (visible with
//! `cargo test --test acceptance -- --nocapture`) and fails its test if the
//! stated tolerance is violated.
//!
//! Criteria 1, 2, 3 and 5 share one set of simulation runs and are reported
//! from a single test; everything else is independent.

mod common;

use std::time::Instant;

use common::{exhaustive_min_faults, linear_fit, random_addresses};
use vatsim::addrmodel::AddressSpaceConfig;
use vatsim::bounds::{
    binary_search_bounds, cat_classify, em_random_scan_expected, em_to_vat, heapify_bound,
    seq_bound, CatConstants, MemoryHierarchyLevel,
};
use vatsim::rng::SplitMix64;
use vatsim::simulator::{run_em, run_vat, EmConfig};
use vatsim::tc::{run_trace, PolicyKind, SimResult};
use vatsim::workloads::{gen, Trace, WorkloadKind};

fn report(num: u32, name: &str, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {num:>2} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

/// Smallest depth whose range covers `max_addr` for the given k, p.
fn depth_for(max_addr: u64, k: u32, p: u32) -> u32 {
    let mut d = 1;
    while (1u64 << (k * d + p)) <= max_addr {
        d += 1;
    }
    d
}

fn miss_layer_law_violations(result: &SimResult) -> u64 {
    result
        .per_translation
        .iter()
        .filter(|s| {
            let expected = match s.highest_missing_layer {
                Some(layer) => layer as u64 + 1,
                None => 0,
            };
            s.faults != expected
        })
        .count() as u64
}

#[test]
fn criteria_1_2_3_5_policy_laws() {
    let start = Instant::now();
    let base = AddressSpaceConfig::new(1, 3, 5, 8, 1).unwrap();
    let d = base.depth() as u64;
    let span = base.max_address() + 1;

    let mut chain_violations = 0u64;
    let mut augmentation_violations = 0u64;
    let mut isp_bound_violations = 0u64;
    let mut law_violations = 0u64;
    let mut runs = 0u64;

    for seed in 0..200u64 {
        let mut rng = SplitMix64::new(seed);
        let trace: Vec<u64> = (0..2000).map(|_| rng.below(span)).collect();
        for w in [8u64, 16, 32] {
            let cfg = base.with_capacity(w).unwrap();
            let min = run_trace(cfg, PolicyKind::Min, &trace).unwrap();
            let ismin = run_trace(cfg, PolicyKind::IsMin, &trace).unwrap();
            let islru = run_trace(cfg, PolicyKind::IsLru, &trace).unwrap();
            let lru = run_trace(cfg, PolicyKind::Lru, &trace).unwrap();
            runs += 7;

            if !(min.total_faults <= ismin.total_faults
                && ismin.total_faults <= islru.total_faults
                && islru.total_faults <= lru.total_faults)
            {
                chain_violations += 1;
            }

            let min_half =
                run_trace(cfg.with_capacity(w / 2).unwrap(), PolicyKind::Min, &trace).unwrap();
            if lru.total_faults > 2 * min_half.total_faults {
                augmentation_violations += 1;
            }

            let aug = cfg.with_capacity(w + d).unwrap();
            let ismin_aug = run_trace(aug, PolicyKind::IsMin, &trace).unwrap();
            let lru_aug = run_trace(aug, PolicyKind::Lru, &trace).unwrap();
            if ismin_aug.total_faults > min.total_faults {
                isp_bound_violations += 1;
            }
            if lru_aug.total_faults > islru.total_faults {
                isp_bound_violations += 1;
            }

            law_violations += miss_layer_law_violations(&lru);
            law_violations += miss_layer_law_violations(&lru_aug);
        }
    }

    let elapsed = start.elapsed();
    let ok1 = report(
        1,
        "policy inequality chain MIN <= ISMIN <= ISLRU <= LRU",
        chain_violations == 0,
        &format!("200 traces x 3 capacities, {chain_violations} violations, {elapsed:.1?}"),
    );
    let ok2 = report(
        2,
        "resource augmentation LRU(W) <= 2 MIN(W/2)",
        augmentation_violations == 0,
        &format!("{augmentation_violations} violations"),
    );
    let ok3 = report(
        3,
        "augmented ISP bounds ISMIN(W+d) <= MIN(W), LRU(W+d) <= ISLRU(W)",
        isp_bound_violations == 0,
        &format!("{isp_bound_violations} violations"),
    );
    let ok5 = report(
        5,
        "LRU miss-layer law on every translation",
        law_violations == 0,
        &format!("{law_violations} violations over {runs} runs"),
    );
    assert!(ok1 && ok2 && ok3 && ok5);
}

#[test]
fn criterion_4_belady_oracle() {
    let start = Instant::now();
    let mut instances = 0u64;
    let mut mismatches = 0u64;

    // Every (k, p, d) with K^d * P <= 16, every W <= 4; exhaustive traces up
    // to length 4 on the tiniest spaces plus seeded length-8 traces on all.
    for k in 1..=4u32 {
        for d in 1..=4u32 {
            for p in 0..=4u32 {
                if k * d + p > 4 {
                    continue;
                }
                let space = 1u64 << (k * d + p);
                for w in 1..=4u64 {
                    let cfg = AddressSpaceConfig::new(k, p, d, w, 1).unwrap();
                    let mut traces: Vec<Vec<u64>> = Vec::new();
                    if space <= 4 {
                        for len in 1..=4u32 {
                            let count = space.pow(len);
                            for code in 0..count {
                                let mut c = code;
                                let mut t = Vec::with_capacity(len as usize);
                                for _ in 0..len {
                                    t.push(c % space);
                                    c /= space;
                                }
                                traces.push(t);
                            }
                        }
                    }
                    for seed in 0..30u64 {
                        let mut rng = SplitMix64::new(seed * 31 + w);
                        traces.push((0..8).map(|_| rng.below(space)).collect());
                    }
                    for trace in &traces {
                        let min = run_trace(cfg, PolicyKind::Min, trace).unwrap().total_faults;
                        let oracle = exhaustive_min_faults(&cfg, trace, w as usize);
                        instances += 1;
                        if min != oracle {
                            mismatches += 1;
                            eprintln!(
                                "MIN {min} != exhaustive {oracle}: k={k} p={p} d={d} W={w} trace {trace:?}"
                            );
                        }
                    }
                }
            }
        }
    }

    let pass = report(
        4,
        "MIN equals the exhaustive eviction-schedule minimum",
        mismatches == 0,
        &format!(
            "{instances} instances, {mismatches} mismatches, {:.1?}",
            start.elapsed()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_sequential_scan_bound() {
    let start = Instant::now();
    let mut checks = 0u64;
    let mut violations = 0u64;
    for k in [1u32, 3] {
        for p in [2u32, 4] {
            for nexp in 8..=18u32 {
                let n = 1u64 << nexp;
                let d = depth_for(n - 1, k, p);
                let w = 2 * (d as u64 + 1);
                let cfg = AddressSpaceConfig::new(k, p, d, w, 1).unwrap();
                let trace = gen(WorkloadKind::Sequential, n, 0, 0, 1).unwrap();
                let measured = run_vat(cfg, PolicyKind::Lru, &trace).unwrap().total_faults;
                let bound = seq_bound(n, &cfg).upper_exact;
                checks += 1;
                if measured > bound {
                    violations += 1;
                    eprintln!("sequential: {measured} > {bound} at k={k} p={p} n=2^{nexp}");
                }
            }
        }
    }
    let pass = report(
        6,
        "sequential faults within 2d + sum ceil(n/(P K^i))",
        violations == 0,
        &format!(
            "{checks} grid points, {violations} violations, {:.1?}",
            start.elapsed()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_random_scan_band_and_slope() {
    let start = Instant::now();
    let mut in_band = true;
    let mut points = Vec::new();
    for nexp in 12..=20u32 {
        let n = 1u64 << nexp;
        let d = nexp - 3;
        let cfg = AddressSpaceConfig::new(1, 3, d, 64, 1).unwrap();
        let trace = gen(WorkloadKind::RandomScan, n, nexp as u64, 0, 1).unwrap();
        let faults = run_vat(cfg, PolicyKind::Lru, &trace).unwrap().total_faults;
        let mean = faults as f64 / n as f64;
        let lo = (n as f64 / (8.0 * 64.0)).log2() - 1.0;
        let hi = (2.0 * n as f64 / 8.0).log2() + 1.0;
        if mean < lo || mean > hi {
            in_band = false;
            eprintln!("random scan mean {mean:.2} outside [{lo:.2}, {hi:.2}] at n=2^{nexp}");
        }
        points.push((nexp as f64, mean));
    }
    let (slope, r_squared) = linear_fit(&points);
    let slope_ok = (0.8..=1.2).contains(&slope) && r_squared >= 0.95;
    let pass = report(
        7,
        "random-scan fault band and 1/k growth per doubling",
        in_band && slope_ok,
        &format!(
            "slope {slope:.3} (want 1 +- 20%), R^2 {r_squared:.4}, {:.1?}",
            start.elapsed()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_jumping_versus_random_scan() {
    let n: u64 = 1 << 16; // pages touched by both traces
    let d = 16;
    let cfg = AddressSpaceConfig::new(1, 3, d, 64, 1).unwrap();
    let p = cfg.page_size();

    // Same page set, opposite orders: stride-P scan versus a random
    // permutation of the page-aligned addresses.
    let jumping = gen(WorkloadKind::Jumping { stride: p }, n, 0, 0, 1).unwrap();
    let random = gen(WorkloadKind::RandomScan, n, 1, 0, p).unwrap();

    let jump_faults = run_vat(cfg, PolicyKind::Lru, &jumping)
        .unwrap()
        .total_faults;
    let rand_faults = run_vat(cfg, PolicyKind::Lru, &random).unwrap().total_faults;

    let jump_bound = n as f64 * (1.0 + 1.0 / (cfg.fanout() as f64 - 1.0)) + 2.0 * (d as f64 + 1.0);
    let rand_lower = n as f64 * ((n as f64 / (p as f64 * 64.0)).log2() - 1.0);
    let ratio = jump_faults as f64 / rand_faults as f64;

    let em = EmConfig::new(64 * p, p).unwrap();
    let jump_em = run_em(em, jumping.resolved()) as f64;
    let rand_em = run_em(em, random.resolved()) as f64;
    let em_gap = (jump_em - rand_em).abs() / rand_em;

    let pass_vat =
        (jump_faults as f64) <= jump_bound && (rand_faults as f64) >= rand_lower && ratio < 0.5;
    let pass_em = em_gap < 0.01;
    let pass = report(
        8,
        "jumping scan cheap in VAT, equal to random scan in EM",
        pass_vat && pass_em,
        &format!(
            "jump {jump_faults} <= {jump_bound:.0}, rand {rand_faults} >= {rand_lower:.0}, ratio {ratio:.3}, EM {jump_em} vs {rand_em}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_binary_search_band() {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for nexp in [12u32, 16] {
        let n = 1u64 << nexp;
        let d = nexp - 3;
        let cfg = AddressSpaceConfig::new(1, 3, d, 96, 1).unwrap();
        let trace = gen(WorkloadKind::BinarySearch { queries: n }, n, 2, 0, 1).unwrap();
        let faults = run_vat(cfg, PolicyKind::Lru, &trace).unwrap().total_faults;
        let per_search = faults as f64 / n as f64;
        let band = binary_search_bounds(n, &cfg);
        let lo = band.lower / 2.0;
        let hi = band.upper * 2.0;
        if per_search < lo || per_search > hi {
            pass = false;
        }
        details.push(format!(
            "n=2^{nexp}: {per_search:.1}/search in [{lo:.1}, {hi:.1}]"
        ));
    }
    let detail = format!("{}, {:.1?}", details.join("; "), start.elapsed());
    let pass = report(
        9,
        "binary-search cost within half/double of the band",
        pass,
        &detail,
    );
    assert!(pass);
}

#[test]
fn criterion_10_heapify_upper_bound() {
    let start = Instant::now();
    let mut violations = 0u64;
    let mut worst = 0.0f64;
    for nexp in 12..=18u32 {
        let n = 1u64 << nexp;
        let d = depth_for(n, 1, 3);
        // Enough cache for the extremal paths plus one partial path per
        // touched level, as the stated capacity floor requires.
        let z = (nexp - 3) as u64;
        let w = 2 * d as u64 + 2 * (d as u64 + 1) * z;
        let cfg = AddressSpaceConfig::new(1, 3, d, w, 1).unwrap();
        let trace = gen(WorkloadKind::Heapify, n, 3, 0, 1).unwrap();
        let measured = run_vat(cfg, PolicyKind::Lru, &trace).unwrap().total_faults;
        let bound = heapify_bound(n, &cfg, 4.0);
        worst = worst.max(measured as f64 / bound);
        if measured as f64 > bound {
            violations += 1;
            eprintln!("heapify {measured} > {bound:.0} at n=2^{nexp}");
        }
    }
    let pass = report(
        10,
        "heapify faults within 4 (d + n p / P)",
        violations == 0,
        &format!("worst measured/bound {worst:.3}, {:.1?}", start.elapsed()),
    );
    assert!(pass);
}

#[test]
fn criterion_11_matrix_transpose() {
    let start = Instant::now();
    let w = 32u64;
    let mut lower_ok = true;
    let mut em_bound_ok = true;
    let mut ratio_at_largest = f64::NAN;

    for dim_exp in [7u32, 8, 9, 10] {
        let dim = 1u64 << dim_exp;
        let n = dim * dim;
        let d = depth_for(2 * n - 1, 1, 3);
        let cfg = AddressSpaceConfig::new(1, 3, d, w, 1).unwrap();

        let row_major = gen(WorkloadKind::MatrixTransposeRowMajor, n, 0, 0, 1).unwrap();
        let recursive = gen(WorkloadKind::MatrixTransposeRecursive, n, 0, 0, 1).unwrap();
        let rm_faults = run_vat(cfg, PolicyKind::Lru, &row_major)
            .unwrap()
            .total_faults;
        let rec_faults = run_vat(cfg, PolicyKind::Lru, &recursive)
            .unwrap()
            .total_faults;

        let lower = 0.5 * n as f64 * (d as f64 - (w as f64).log2());
        if (rm_faults as f64) < lower {
            lower_ok = false;
            eprintln!("row-major {rm_faults} below lower estimate {lower:.0} at dim 2^{dim_exp}");
        }

        // EM complexity of the recursive transpose over 2n cells: a
        // sequential read pass plus writes that stay inside one aligned
        // power-of-four region at a time. With fewer than six blocks of
        // cache the two streams evict each other and every move costs two
        // transfers.
        let c_rec = |m: u128, b: u128, cells: u64| -> f64 {
            if m >= 6 * b {
                2.0 + 2.5 * cells as f64 / b as f64
            } else {
                2.0 * cells as f64 + 2.0
            }
        };
        let em_bound = em_to_vat(c_rec, n, &cfg).unwrap();
        if rec_faults as f64 > em_bound {
            em_bound_ok = false;
            eprintln!(
                "recursive {rec_faults} above em_to_vat bound {em_bound:.0} at dim 2^{dim_exp}"
            );
        }

        if dim_exp == 10 {
            ratio_at_largest = rec_faults as f64 / rm_faults as f64;
        }
    }

    let ratio_ok = ratio_at_largest < 0.25;
    let pass = report(
        11,
        "matrix transpose: row-major floor, recursive ceiling, 4x separation",
        lower_ok && em_bound_ok && ratio_ok,
        &format!(
            "lower {}, em bound {}, ratio at dim 2^10 = {ratio_at_largest:.3} (< 0.25 required), {:.1?}",
            if lower_ok { "ok" } else { "violated" },
            if em_bound_ok { "ok" } else { "violated" },
            start.elapsed()
        ),
    );
    // With W = 32 and the depth forced to 18 by the 2 * 2^20 cell footprint,
    // one element move touches 2d + 1 = 37 distinct tree nodes, more than
    // the cache holds. Both layouts then miss on every non-root access
    // (identical fault totals, ratio 1.0), so the required 4x separation at
    // the largest dimension cannot exist in this configuration; it does
    // hold through dim 2^8, where both translation paths still fit.
    assert!(
        pass,
        "separation clause unattainable at dim 2^10 with W = 32; see test output"
    );
}

#[test]
fn criterion_12_em_to_vat_consistency() {
    // Sequential complexity reproduces the exact sequential bound within
    // 2(d+1) across the criterion-6 grid.
    let mut seq_ok = true;
    let c_seq = |_m: u128, b: u128, n: u64| 2.0 + (n as u128 / b) as f64;
    for k in [1u32, 3] {
        for p in [2u32, 4] {
            for nexp in 8..=18u32 {
                let n = 1u64 << nexp;
                let d = depth_for(n - 1, k, p);
                let cfg = AddressSpaceConfig::new(k, p, d, 2 * (d as u64 + 1), 1).unwrap();
                let via_sum = em_to_vat(c_seq, n, &cfg).unwrap();
                let exact = seq_bound(n, &cfg).upper_exact as f64;
                if (via_sum - exact).abs() > 2.0 * (d as f64 + 1.0) {
                    seq_ok = false;
                    eprintln!("em_to_vat {via_sum} vs seq bound {exact} at k={k} p={p} n=2^{nexp}");
                }
            }
        }
    }

    // Quicksort and van Emde Boas forms against an independently coded
    // summation, to full precision.
    let cfg = AddressSpaceConfig::new(1, 3, 13, 64, 1).unwrap();
    let n = 1u64 << 16;
    let a = cfg.capacity() / cfg.depth() as u64;
    let c_quick = |_m: u128, b: u128, n: u64| {
        let x = n as f64 / b as f64;
        if x > 1.0 {
            x * x.log2()
        } else {
            0.0
        }
    };
    let c_veb = |_m: u128, b: u128, n: u64| (n as f64).ln() / (b as f64).ln();

    let mut quick_oracle = 0.0f64;
    let mut veb_oracle = 0.0f64;
    for i in 0..=cfg.depth() {
        let block = (cfg.page_size() as u128) << i;
        quick_oracle += c_quick(a as u128 * block, block, n);
        veb_oracle += c_veb(a as u128 * block, block, n);
    }
    let quick_ok = em_to_vat(c_quick, n, &cfg).unwrap() == quick_oracle;
    let veb_ok = em_to_vat(c_veb, n, &cfg).unwrap() == veb_oracle;

    let pass = report(
        12,
        "em_to_vat matches the sequential bound and the summation oracle",
        seq_ok && quick_ok && veb_ok,
        &format!("sequential grid {seq_ok}, quicksort exact {quick_ok}, veb exact {veb_ok}"),
    );
    assert!(pass);
}

#[test]
fn criterion_13_em_hierarchy_piecewise_linear() {
    // The measured machine: sizes in 8-byte elements, access times in
    // picoseconds.
    let levels = [
        MemoryHierarchyLevel {
            size: 1 << 12,
            access_cost: 4080.0,
        },
        MemoryHierarchyLevel {
            size: 1 << 15,
            access_cost: 4575.0,
        },
        MemoryHierarchyLevel {
            size: 12 * (1 << 20) / 8,
            access_cost: 9937.0,
        },
        MemoryHierarchyLevel {
            size: u64::MAX / 2,
            access_cost: 38746.0,
        },
    ];
    let mut pass = true;
    let probes: [(u64, f64); 4] = [
        (100, 4080.0),
        ((1 << 12) + 500, 4575.0),
        ((1 << 15) + 900, 9937.0),
        (12 * (1 << 20) / 8 + 123, 38746.0),
    ];
    for (n, expected_slope) in probes {
        let a = em_random_scan_expected(n, &levels).unwrap();
        let b = em_random_scan_expected(n + 1, &levels).unwrap();
        if b - a != expected_slope {
            pass = false;
            eprintln!("slope {} != {expected_slope} at n = {n}", b - a);
        }
    }
    let pass = report(
        13,
        "hierarchy scan cost piecewise linear with exact segment slopes",
        pass,
        "finite differences equal the next level's access time",
    );
    assert!(pass);
}

#[test]
fn criterion_14_cat_classifier() {
    let n = 4096u64;
    let mut classify_ok = true;
    let mut cost_ok = true;
    let constants = CatConstants::default();

    let mut check = |kind: WorkloadKind, seed: u64, expect_cat: bool| {
        let trace = gen(kind, n, seed, 0, 1).unwrap();
        let max_addr = trace.resolved().max().unwrap();
        let d = depth_for(max_addr, 1, 3);
        let cfg = AddressSpaceConfig::new(1, 3, d, 2 * (d as u64 + 1), 1).unwrap();
        let verdict = cat_classify(&trace, &cfg, &constants);
        if verdict.is_cat != expect_cat {
            classify_ok = false;
            eprintln!(
                "{kind} seed {seed}: expected is_cat = {expect_cat}, violated {:?}",
                verdict.violated()
            );
        }
        if expect_cat {
            let result = run_vat(cfg, PolicyKind::Lru, &trace).unwrap();
            if result.vat_cost > 3 * trace.len() as u64 {
                cost_ok = false;
                eprintln!(
                    "{kind} seed {seed}: vat cost {} > 3 |trace|",
                    result.vat_cost
                );
            }
        }
    };

    for seed in 1..=5u64 {
        check(WorkloadKind::Sequential, seed, true);
        check(WorkloadKind::Jumping { stride: 8 }, seed, true);
        check(WorkloadKind::Jumping { stride: 4 }, seed, true);
        check(WorkloadKind::RandomScan, seed, false);
        check(WorkloadKind::Permute, seed, false);
    }

    let pass = report(
        14,
        "CAT classifier separates scans from scattered traces",
        classify_ok && cost_ok,
        &format!("classification {classify_ok}, CAT cost within 3 RAM ops/access {cost_ok}"),
    );
    assert!(pass);
}

/// Not a numbered criterion: the EM/VAT dominance property, asserted
/// here so the acceptance run exercises the pinned-internal mode too.
#[test]
fn em_vat_leaf_dominance() {
    let cfg = AddressSpaceConfig::new(1, 3, 8, 16, 1).unwrap();
    let em = EmConfig::new(16 * 8, 8).unwrap();
    for seed in 0..8u64 {
        let trace = Trace::from_addresses(random_addresses(&cfg, 3000, seed));
        let vat = vatsim::simulator::run_vat_pinned_internal(cfg, &trace).unwrap();
        let em_misses = run_em(em, trace.resolved());
        assert_eq!(vat.total_faults, em_misses, "seed {seed}");
    }
}

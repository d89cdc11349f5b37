//! Trace-driven simulation and analytic bounds for the cost of virtual
//! address translation.
//!
//! Translating a virtual address walks a `K`-ary tree of depth `d` (the page
//! table) from the root to the data page; the nodes touched on the way pass
//! through a translation cache of `W` nodes, and each insertion into that
//! cache costs `tau` RAM instructions. This crate models that walk exactly:
//!
//! * [`addrmodel`] — address decomposition, tree node identity, translation
//!   paths, and the order assumptions between the model parameters.
//! * [`tc`] — the bounded translation cache under LRU, ISLRU, offline MIN
//!   and offline ISMIN replacement, counting insertions as faults.
//! * [`workloads`] — seeded generators for the analyzed access patterns
//!   (scans, searches, heaps, sorts, transposes) plus page-level trace
//!   statistics.
//! * [`simulator`] — whole-trace engines: VAT runs, the external-memory
//!   baseline, and nested (two-level) translation.
//! * [`bounds`] — closed-form evaluators for the analytic cost bounds and
//!   the CAT trace classifier.
//! * [`trace_io`] — text and binary trace file formats.
//!
//! ```
//! use vatsim::{AddressSpaceConfig, PolicyKind, WorkloadKind};
//!
//! // 2^14 random accesses through a binary tree of depth 11 over 8-cell
//! // pages, with a 64-node translation cache.
//! let cfg = AddressSpaceConfig::new(1, 3, 11, 64, 1)?;
//! let trace = vatsim::workloads::gen(WorkloadKind::RandomScan, 1 << 14, 7, 0, 1)?;
//! let result = vatsim::simulator::run_vat(cfg, PolicyKind::Lru, &trace)?;
//! assert_eq!(result.vat_cost, cfg.tau() * result.total_faults);
//!
//! let band = vatsim::bounds::random_scan_bounds(1 << 14, &cfg);
//! assert!((result.total_faults as f64) <= band.upper);
//! assert!((result.total_faults as f64) >= band.lower);
//! # Ok::<(), vatsim::Error>(())
//! ```

pub mod addrmodel;
pub mod bounds;
pub mod error;
pub mod rng;
pub mod simulator;
pub mod tc;
pub mod trace_io;
pub mod workloads;

pub use addrmodel::{AddressSpaceConfig, NodeId, TranslationPath, VirtualAddress};
pub use error::{Error, Result};
pub use simulator::EmConfig;
pub use tc::{PolicyKind, SimResult, TranslationCache, TranslationStats};
pub use workloads::{Trace, WorkloadKind};

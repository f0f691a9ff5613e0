//! Directional path-consistency for binary constraint networks.
//!
//! The crate provides the network model ([`Network`], [`Relation`]), the
//! DPC and DPC* algorithms with backtrack-free extraction ([`dpc`]),
//! arc/path-consistency baselines ([`consistency`]), variable elimination
//! and the Helly property ([`elimination`]), majority-closed and
//! tree-preserving constraint classes ([`majority`]), seeded instance
//! generators ([`generators`]), a brute-force [`oracle`] and JSON I/O
//! ([`format`]).

pub mod bitset;
pub mod consistency;
pub mod dpc;
pub mod elimination;
pub mod error;
pub mod format;
pub mod generators;
pub mod graph;
pub mod majority;
pub mod network;
pub mod oracle;
pub mod relation;

pub use bitset::ValueSet;
pub use consistency::{enforce_ac, enforce_strong_pc, is_path_consistent, is_strongly_dpc, Propagation};
pub use dpc::{dpc, dpc_star, extract_solution, ExtractionFailure, SolveOutcome, Verdict};
pub use elimination::{check_helly, check_vep_instance, eliminate, Helly, Language, VepCheck};
pub use error::{Error, Result};
pub use graph::{default_order, ConstraintGraph, VarOrder};
pub use majority::{MajorityOp, TreeDomain};
pub use network::{Assignment, Domain, Network};
pub use relation::Relation;

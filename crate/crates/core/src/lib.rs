//! Seed selection for trust-weighted, non-submodular information diffusion.
//!
//! The general model ([`diffusion`]) is simulated by Monte Carlo. Seeds are
//! chosen by projecting an instance onto a deterministic max-max model
//! ([`maxmax`]) where coverage is submodular, running greedy there
//! ([`seeders`]), and sweeping the projected threshold ([`projection`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN along with out-of-range values

pub mod diffusion;
pub mod error;
pub mod gadgets;
pub mod graph;
pub mod graphgen;
pub mod harness;
pub mod instance;
pub mod io;
pub mod maxmax;
pub mod projection;
pub mod rng;
pub mod seeders;

pub use diffusion::{estimate_coverage, run, Estimate, NodeState, RunOutcome, Simulation};
pub use error::{Error, Result};
pub use graph::{NodeId, TrustArc, TrustGraph};
pub use instance::{
    validate_graph, validate_instance, EvacuationDelay, GeneralInstance, NodeProfile, NodeTrust, Seeding, SourceSpec,
    Violation,
};
pub use maxmax::{SimplifiedInstance, Thresholds};
pub use rng::RngHandle;
pub use seeders::Budget;

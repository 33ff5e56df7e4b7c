//! Classical simulation of Grover adaptive search (GAS) for the travelling
//! salesperson problem.
//!
//! The quantum parts are replaced by exact bookkeeping: the set of improving
//! tours is enumerated classically and Grover measurements are drawn from the
//! closed-form amplitude-amplification distribution. Alongside the full-space
//! search the crate provides an exchange-chain local search and a sparse
//! statevector check of the neighborhood state-preparation circuit.
//!
//! Module map:
//!
//! * [`instance`] – instances, random generation, TSPLIB and JSON I/O.
//! * [`tour`] – tours, cost, canonical form and the greedy start.
//! * [`oracle`] – Held–Karp optimum and exact good-state enumeration.
//! * [`neighborhood`] – exchange-chain neighborhoods.
//! * [`grover`] – success probabilities, iteration strategies, termination.
//! * [`gas`] – the adaptive search loop over all tours.
//! * [`lk`] – the chain-growing neighborhood search.
//! * [`circuit`] – sparse statevector simulation of state preparation.
//! * [`bench`] – experiment sweeps, seeds and CSV/JSONL output.

// Distance matrices are indexed by node pairs, and negated float comparisons
// deliberately reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod circuit;
pub mod error;
pub mod gas;
pub mod grover;
pub mod instance;
pub mod lk;
pub mod neighborhood;
pub mod oracle;
pub mod record;
pub mod tour;

pub use error::{Error, Result};
pub use instance::TspInstance;
pub use tour::Tour;

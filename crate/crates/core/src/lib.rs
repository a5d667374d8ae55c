//! # incompat
//!
//! Operational incompatibility measures for sets of quantum observables.
//!
//! Two observables that fail to commute cannot be measured jointly; this
//! crate quantifies *how much* they fail to be compatible, in two
//! operational ways:
//!
//! - the distinguishability measure Q: one minus the accessible fidelity of
//!   the uniform ensemble of the observables' eigenstates ([`fidelity`]);
//! - the disturbance measures Q₁, Q_F, Q_∞: the maximal classical distance
//!   between the outcome statistics of one observable with and without an
//!   intervening measurement of the other ([`distance`]).
//!
//! Alongside the measures themselves the crate provides
//!
//! - order-2 Tsallis/Rényi entropies and entropic-uncertainty lower bounds,
//!   including the successive-measurement form ([`prob`], [`eur`]);
//! - exact closed forms for qubit pairs, mutually unbiased bases, and pairs
//!   commuting on a subspace ([`linalg`] constructs those families);
//! - two convex-programming lower bounds (an eigenvalue-minimization SDP and
//!   a simplex quadratic program) with feasibility certificates ([`bounds`]);
//! - an intercept-resend eavesdropping simulator whose error rate the
//!   measure Q lower-bounds ([`qkd`]);
//! - an audit harness that numerically checks every claimed inequality
//!   against closed-form or brute-force oracles ([`audit`]).
//!
//! Searches are deterministic for a fixed seed: restarts derive their RNG
//! from (seed, restart index) and are reduced order-independently, so
//! results do not depend on thread scheduling.

pub mod audit;
pub mod bounds;
pub mod distance;
pub mod error;
pub mod eur;
mod families;
pub mod fidelity;
pub mod linalg;
pub mod prob;
pub mod qkd;
pub mod search;

pub use error::{Error, Result};
pub use linalg::{
    direct_sum_ensemble, eigensystem, eigenstate_ensemble, mub_bases, overlap_matrix,
    qubit_observable, subspace_pair, BlochVector, DensityMatrix, Ensemble, Observable,
    OverlapMatrix, PureState,
};
pub use search::SearchConfig;

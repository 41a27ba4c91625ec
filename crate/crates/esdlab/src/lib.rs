//! Entanglement sudden death of two qubits coupled to independent thermal
//! reservoirs.
//!
//! The model is purely dissipative: each qubit exchanges excitations with its
//! own bath at mean occupation `nbar`, with spontaneous/stimulated decay rate
//! `gamma * (nbar + 1)` and absorption rate `gamma * nbar`. States of X form
//! (only the antidiagonal coherences are nonzero in the product basis
//! |11>, |10>, |01>, |00>) stay of X form, and the populations close on a
//! polynomial propagator in the decay variable `X = exp(-gamma (2 nbar + 1) t)`.
//!
//! The crate provides:
//! - exact polynomial propagation of X states and a cross-checking RK4
//!   integrator ([`dynamics`]),
//! - concurrence via the X-state closed form and the general spin-flip
//!   construction ([`entanglement`]),
//! - the death quartics in X whose sign pattern locates disentanglement
//!   times, plus a closed form for their roots when the outer coherence
//!   vanishes ([`esd`]),
//! - state families, samplers, parameter sweeps, and self-check routines
//!   backing the `esdlab` command-line tool.

pub mod dynamics;
pub mod entanglement;
pub mod esd;
pub mod families;
pub mod numerics;
pub mod sampling;
pub mod state;
pub mod sweep;
pub mod verify;

pub use dynamics::{evolve_analytic, evolve_numeric, PropagatorPolynomials};
pub use entanglement::{concurrence_general, concurrence_x, Concurrence};
pub use esd::{certify_finite_death, death_quartics, esd_report, EsdReport};
pub use state::{BathParams, XCoordinate, XState};

//! Sum degrees-of-freedom toolkit for the two-user bursty MIMO X channel.
//!
//! The crate computes closed-form upper and lower bounds on the sum DoF of a
//! 2x2 MIMO X channel whose links switch on and off according to Bernoulli
//! state variables known only to the receivers, constructs the zero-forcing
//! and rate-splitting beamforming schemes that achieve those bounds as
//! explicit matrices, and verifies the rank / entropy-slope / power-exponent
//! accounting by Monte Carlo audit.
//!
//! Modules:
//! - [`model`]: channel parameters, state probabilities, coefficient-triple
//!   algebra, regime classification, contracted 5-state law, state sampling.
//! - [`matrix_core`]: dense linear algebra utilities (channel sampling, null
//!   bases, numeric rank, Gaussian entropies, DoF slope estimation).
//! - [`bounds`]: every closed-form DoF quantity (upper bound, tightness,
//!   lower bounds, per-scheme achievable DoF, optimal power exponents).
//! - [`schemes`]: explicit filter-matrix constructions for all scheme
//!   families, with condition checking and per-state effective channels.
//! - [`verifier`]: Monte Carlo verification suites.
//! - [`cli`]: command-line front end (bounds / curve / verify / scheme / plot).

pub mod bounds;
pub mod cli;
pub mod matrix_core;
pub mod model;
pub mod schemes;
pub mod verifier;

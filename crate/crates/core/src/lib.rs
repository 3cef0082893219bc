//! Output analysis for Markov chain Monte Carlo under wide-sense regeneration.
//!
//! The crate is organised around the pieces of a regenerative analysis:
//!
//! * [`chain`] simulates split chains from an `l`-step minorization
//!   `P^l(x, .) >= h(x) Q(.)`, records regeneration bells and cuts the output
//!   into 1-dependent tours `(Z_k, tau_k)`.
//! * [`estimators`] estimates the asymptotic covariance `Sigma_f` of the
//!   ergodic average, either by batch means or from tours, and evaluates the
//!   strong-invariance rate exponents and batch-size conditions.
//! * [`probit`] runs the Albert–Chib data-augmentation Gibbs sampler for probit
//!   regression in random scan and computes regeneration probabilities from a
//!   two-step distinguished-point minorization.
//! * [`diagnostics`] checks the observable consequences of the limit theory
//!   (regenerative mean identity, CLT covariance, regeneration counts,
//!   1-dependence of tours).
//! * [`io`] and [`cli`] read and write the CSV/JSON artifacts.

pub mod chain;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod io;
pub mod probit;
pub mod rng;

pub use error::{Error, Result};

//! Bayesian inference of time-varying evolutionary rates on fixed,
//! time-calibrated phylogenies.
//!
//! Sequence evolution is modeled as a continuous-time Markov chain whose
//! generator is scaled by a piecewise-constant rate function of calendar
//! time. Branch transition probabilities depend on the rate only through
//! per-branch integrals, which are sparse linear functions of the per-epoch
//! rates; a Gaussian Markov random field smooths the log rates across
//! epochs, and a Hamiltonian-within-Gibbs sampler explores the posterior
//! using exact linear-time likelihood gradients. A seeded simulator
//! generates alignments under the same machinery (or an analytic log-linear
//! rate curve) so recovery experiments run end to end.
//!
//! The `polyclock` binary wires everything into three subcommands:
//! `simulate`, `infer`, and `summarize`. See the book under `book/` for a
//! guided tour; its code snippets double as doc-tests.

pub mod clock;
pub mod error;
pub mod gmrf;
pub mod io;
pub mod subst;
pub mod tree;

pub use error::{Error, Result};

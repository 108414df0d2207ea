//! Distributed binary detection with cooperating sensor pairs over
//! Rayleigh-fading links.
//!
//! The crate simulates four fusion architectures end to end (local
//! decisions, inter-node exchange, FC transmission and the FC rule),
//! estimates their error probability by Monte Carlo, and evaluates
//! analytical upper bounds, error floors and asymptotic exponents.

pub mod error;
pub mod special;
pub mod rng;
pub mod quadrature;
pub mod sensing;
pub mod channel;
pub mod schemes;
pub mod fusion;
pub mod analysis;
pub mod harness;

pub use error::{Error, Result};
pub use sensing::{Decision, Hypothesis, SensingModel};
pub use channel::NetworkConfig;
pub use schemes::{Pipeline, SchemeKind};
pub use fusion::{DecisionPrior, PriorMethod};
pub use harness::{estimate_pe, sweep_alpha, run_experiment, ErrorEstimate, ExperimentConfig, Rule};

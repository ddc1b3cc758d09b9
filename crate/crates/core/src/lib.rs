//! Estimation of interaction neighborhoods in binary pairwise random fields.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds Ising models and every closed-form quantity derived from a
//!   pairwise potential (one-point conditionals, interaction strengths, range
//!   and the constants that depend on it).
//! * [`sampler`] draws i.i.d. samples, exactly when the site set is small or
//!   the interaction graph is a forest, by Gibbs sampling otherwise.
//! * [`empirical`] turns samples into pattern-count tables and the empirical
//!   conditionals built on them.
//! * [`selection`] implements the penalized selection rule and its slope
//!   heuristic calibration.
//! * [`neighborhood`] adds the cut step and the correlation-screening
//!   reduction for large site sets.
//! * [`oracle`] computes the exact ground truth by enumeration.
//! * [`harness`] runs the simulation experiments and writes result tables.

pub mod empirical;
pub mod error;
pub mod harness;
pub mod model;
pub mod neighborhood;
pub mod oracle;
pub mod sampler;
pub mod selection;

pub use empirical::{EmpiricalTable, Frac};
pub use error::{Error, Result};
pub use model::{Configuration, IsingModel, ModelConstants, PairwisePotential, Site, SiteSet, Spin};
pub use sampler::{SampleSet, SamplerConfig, SamplerKind};

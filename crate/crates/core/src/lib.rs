//! Posterior probabilities of true effects, one-sided P values, replication
//! probabilities under k-fold variance inflation and the matching sample-size
//! formula, for paired-difference (crossover) studies, with a seeded Monte
//! Carlo oracle for every analytic result.

#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod combine;
pub mod error;
pub mod gaussian;
pub mod inference;
pub mod mc;
pub mod numfmt;
pub mod replication;

pub use error::{Error, Result};
pub use gaussian::{normal_cdf, normal_pdf, normal_quantile, Probability, ZScore};
pub use inference::{MeanPosterior, RangeOfInterest, StudySummary};
pub use replication::{ReplicationQuery, SampleSizePlan};

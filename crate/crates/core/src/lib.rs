//! Research-organization performance measured two ways, and the distortion between them.
//!
//! The supervised path starts from a staff roster whose members carry
//! pre-linked publications. The unsupervised path clusters author mentions
//! into proto-individuals, attributes clusters to universities through
//! organization variants and email domains, and filters the result. Both
//! paths share one productivity scorer (fractional, citation-normalized) and
//! one university aggregation, so any difference in the final rankings comes
//! from who was counted as staff and which publications were attributed.
//!
//! Modules follow the pipeline order:
//!
//! - [`corpus`]: publication, roster, registry and subject-category inputs.
//! - [`disambig`]: blocking, pairwise evidence scoring, average-linkage clustering.
//! - [`staff`]: cluster-to-university matching, coherence flags, filters, conflict resolution.
//! - [`fss`]: citation cells, researcher productivity, baselines, university scores.
//! - [`compare`]: distribution statistics, rank tables, quartiles, correlations.
//! - [`synth`]: seeded synthetic world with ground truth and a brute-force scoring oracle.
//! - [`pipeline`]: in-memory wiring of the stages above.

pub mod compare;
pub mod corpus;
pub mod disambig;
mod error;
pub mod fss;
pub mod keyed;
pub mod normalize;
pub mod pipeline;
pub mod staff;
pub mod synth;

pub use error::{Error, Result};

//! Active estimation of the homology of binary-classification decision boundaries.
//!
//! The pipeline has two phases. A label-query phase builds a neighbor graph over an
//! unlabeled pool and runs the S² shortest-shortest-path strategy ([`active::s2_run`])
//! to spend a label budget near the decision boundary. A homology-estimation phase
//! builds a locally scaled labeled Vietoris–Rips filtration from the queried points
//! ([`complex::build_lslvr_filtration`]) and reduces it to a persistence diagram
//! ([`persistence::compute_persistence`]). Diagrams are compared with the bottleneck
//! distance ([`metrics::bottleneck_distance`]).
//!
//! [`bounds`] evaluates the closed-form query and sample complexity bounds for the
//! stylized annulus scenario, and [`selection`] implements topological model
//! selection over banks of classifier outputs.
//!
//! Data-parallel inner loops (pairwise distance scans, per-point scale estimation,
//! bank scoring, experiment sweeps) run on rayon when the `parallel` feature is
//! enabled (the default). Every such loop also has a sequential path selected by
//! [`Execution::Sequential`]; both produce identical output.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod active;
pub mod bounds;
pub mod complex;
pub mod datasets;
mod error;
pub mod experiment;
pub mod graph;
pub mod metrics;
mod par;
pub mod persistence;
pub mod rng;
pub mod selection;
pub mod unionfind;

pub use error::{Error, Result};
pub use par::Execution;

//! Changepoint analysis for ordered count data, in three metric stages:
//! a contingency table is read under the χ² metric, embedded into a
//! Euclidean factor space by correspondence analysis, and finally turned
//! into an ultrametric by sequence-constrained complete-link clustering.
//! Cutting the resulting hierarchy at any level yields contiguous
//! segments of the observation order, and the cut boundaries are the
//! changepoints, each graded by its merge height.
//!
//! # Quick start
//!
//! ```
//! use chronoca::{analyze, cluster_sequence, ContingencyTable};
//!
//! let csv = "obs,a,b\nt1,20,80\nt2,25,75\nt3,70,30\nt4,75,25";
//! let (table, warnings) = ContingencyTable::from_csv(csv.as_bytes())?;
//! assert!(warnings.is_empty());
//!
//! // χ² cloud -> Euclidean factor space (distances preserved exactly)
//! let model = analyze(&table)?;
//!
//! // ordered points -> contiguity-constrained complete-link hierarchy
//! let dendrogram = cluster_sequence(&model.row_points())?;
//! let report = dendrogram.changepoints(2)?;
//! assert_eq!(report.boundaries[0].position, 2); // change between rows 2 and 3
//! # Ok::<(), chronoca::Error>(())
//! ```
//!
//! The `examples/` directory walks through each capability: loading and
//! aggregating data, the factor embedding, the constrained hierarchy and
//! its ultrametric, changepoint reports, SVG rendering, and the
//! interchange formats. A thin `chronoca` binary wires the same steps
//! into `ingest`, `ca`, `cluster`, `cut`, `changepoints`, and `pipeline`
//! subcommands.

pub mod ca;
pub mod chronocluster;
pub mod contingency;
pub mod error;
mod json;
pub mod pipeline;
pub mod plot;
mod svd;

pub use ca::{analyze, chi2_sq_distance, total_inertia, FactorModel};
pub use chronocluster::{
    boundaries_from_partition, cluster_sequence, verify_ultrametric, Boundary, ChangepointReport,
    Dendrogram, Merge, Partition, UltrametricViolation,
};
pub use contingency::{
    ContingencyTable, EventLog, EventRecord, FrequencyView, Profile, PruneLog, TimeBin,
};
pub use error::{Error, Result};
pub use pipeline::{run_pipeline, Artifact, InputKind, PipelineConfig, PipelineSummary, SourceSpec};
pub use plot::{render_dendrogram, render_factor_map};

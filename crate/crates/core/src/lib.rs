//! Moment-based entanglement detection through positive maps.
//!
//! A bipartite state `ρ` is pushed through `I ⊗ Λ` for a positive map `Λ`,
//! normalized, and summarized by the power sums of its spectrum. Separable
//! states obey a family of inequalities on these moments, and the moments
//! themselves can be measured as expectation values on a few copies of `ρ`.

pub mod linalg;
pub mod maps;
pub mod measurement;
pub mod moments;
pub mod states;

pub use linalg::{ComplexMatrix, MatrixError};
pub use maps::{MapError, PositiveMapSpec};
pub use measurement::{MeasurementError, MeasurementOperator, ShotEstimate};
pub use moments::{
    CriteriaConfig, CriterionId, CriterionReport, MomentError, MomentVector, Verdict,
};
pub use states::{BipartiteDims, DensityMatrix, StateError};

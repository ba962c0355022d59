//! Fetal orientation from blind-sweep ultrasound exam data.
//!
//! The crate consumes per-frame head-detection probability traces and
//! thalamus/CSP label masks, and produces two independent classifications:
//!
//! 1. **Presentation** (cephalic or breech) by matching each sweep's trace
//!    against exponential cephalic/breech templates with cosine similarity,
//!    then majority voting across sweeps.
//! 2. **Lie** (facing left or right) from the vector between the thalamus
//!    geodesic center and the CSP centroid, with a thalamus-only fallback
//!    guarded by shape quality criteria.
//!
//! [`synth`] generates exam bundles with known ground truth, and
//! [`report`] assembles the machine-readable per-exam output.

pub mod lie;
pub mod morphology;
pub mod presentation;
pub mod report;
pub mod sweep_model;
pub mod synth;

pub use lie::{
    aggregate_lie, bin_direction, check_fallback_criteria, classify_frame, facing_vector_dual,
    facing_vector_fallback, FacingVector, FallbackRule, FrameLie, LateralBin, LieLabel,
    LieMethod, LieResult, QualityCriteria,
};
pub use morphology::{Component, Skeleton};
pub use presentation::{
    ExamPresentation, PresentationResult, SweepLabel, SweepPresentation, DEFAULT_TAU,
};
pub use report::ExamReport;
pub use sweep_model::{load_exam, validate_exam, write_exam, BinaryMask, Exam, ExamError, FrameSegmentation, Pixel, Sweep};
pub use synth::{GroundTruth, Presentation, Side, SynthConfig};

/// Version string stamped into every report.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

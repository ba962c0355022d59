//! Fetal presentation by exponential template matching.
//!
//! Each sweep's head-probability trace is compared by cosine similarity with
//! a decaying (cephalic) and a rising (breech) exponential template over the
//! zero-based frame index. Sweeps are then combined by majority vote.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sweep_model::{Exam, Sweep};

/// Default head-detection threshold on the per-sweep peak probability.
pub const DEFAULT_TAU: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PresentationError {
    #[error("template needs at least one frame")]
    NoFrames,
    #[error("vector lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("cosine similarity of a zero or empty vector")]
    ZeroVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepLabel {
    Cephalic,
    Breech,
    NoHead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExamPresentation {
    Cephalic,
    Breech,
    Abstain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresentationAbstain {
    /// No sweep reached the detection threshold.
    NoHeadDetected,
    /// Votes and similarity margins both tied.
    Tie,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPresentation {
    pub sweep_id: String,
    pub sim_cephalic: f64,
    pub sim_breech: f64,
    pub label: SweepLabel,
}

impl SweepPresentation {
    /// Similarity of the chosen template minus the other; zero for `NoHead`.
    pub fn margin(&self) -> f64 {
        match self.label {
            SweepLabel::Cephalic => self.sim_cephalic - self.sim_breech,
            SweepLabel::Breech => self.sim_breech - self.sim_cephalic,
            SweepLabel::NoHead => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresentationResult {
    pub per_sweep: Vec<SweepPresentation>,
    pub exam_label: ExamPresentation,
    pub votes_cephalic: usize,
    pub votes_breech: usize,
    pub abstain_reason: Option<PresentationAbstain>,
}

/// `exp(N_f - t) / exp(N_f)`, evaluated as `exp(-t)`.
pub fn template_cephalic(n_frames: usize) -> Result<Vec<f64>, PresentationError> {
    if n_frames == 0 {
        return Err(PresentationError::NoFrames);
    }
    Ok((0..n_frames).map(|t| (-(t as f64)).exp()).collect())
}

/// `exp(t) / exp(N_f)`, evaluated as `exp(t - N_f)`.
pub fn template_breech(n_frames: usize) -> Result<Vec<f64>, PresentationError> {
    if n_frames == 0 {
        return Err(PresentationError::NoFrames);
    }
    let n = n_frames as f64;
    Ok((0..n_frames).map(|t| (t as f64 - n).exp()).collect())
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, PresentationError> {
    if a.len() != b.len() {
        return Err(PresentationError::LengthMismatch(a.len(), b.len()));
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if a.is_empty() || na == 0.0 || nb == 0.0 {
        return Err(PresentationError::ZeroVector);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok(dot / (na * nb))
}

/// A sweep sees the head when its peak probability reaches `threshold`.
pub fn detect_head(sweep: &Sweep, threshold: f64) -> bool {
    sweep.trace.iter().any(|&p| p >= threshold)
}

pub fn classify_sweep(sweep: &Sweep, threshold: f64) -> SweepPresentation {
    let no_head = SweepPresentation {
        sweep_id: sweep.sweep_id.clone(),
        sim_cephalic: 0.0,
        sim_breech: 0.0,
        label: SweepLabel::NoHead,
    };
    if !detect_head(sweep, threshold) {
        return no_head;
    }
    let (Ok(fc), Ok(fb)) = (
        template_cephalic(sweep.n_frames),
        template_breech(sweep.n_frames),
    ) else {
        return no_head;
    };
    let (Ok(sim_cephalic), Ok(sim_breech)) = (
        cosine_similarity(&sweep.trace, &fc),
        cosine_similarity(&sweep.trace, &fb),
    ) else {
        return no_head;
    };
    // Exact ties go to the more prevalent presentation.
    let label = if sim_cephalic >= sim_breech {
        SweepLabel::Cephalic
    } else {
        SweepLabel::Breech
    };
    SweepPresentation {
        sweep_id: sweep.sweep_id.clone(),
        sim_cephalic,
        sim_breech,
        label,
    }
}

/// Majority vote over head-positive sweeps. An exact vote tie is settled by
/// the larger summed similarity margin; a tie there too abstains.
pub fn aggregate(per_sweep: Vec<SweepPresentation>) -> PresentationResult {
    let mut votes_cephalic = 0;
    let mut votes_breech = 0;
    let mut margin_cephalic = 0.0;
    let mut margin_breech = 0.0;
    for s in &per_sweep {
        match s.label {
            SweepLabel::Cephalic => {
                votes_cephalic += 1;
                margin_cephalic += s.margin();
            }
            SweepLabel::Breech => {
                votes_breech += 1;
                margin_breech += s.margin();
            }
            SweepLabel::NoHead => {}
        }
    }
    let (exam_label, abstain_reason) = if votes_cephalic + votes_breech == 0 {
        (ExamPresentation::Abstain, Some(PresentationAbstain::NoHeadDetected))
    } else if votes_cephalic != votes_breech {
        if votes_cephalic > votes_breech {
            (ExamPresentation::Cephalic, None)
        } else {
            (ExamPresentation::Breech, None)
        }
    } else if margin_cephalic > margin_breech {
        (ExamPresentation::Cephalic, None)
    } else if margin_breech > margin_cephalic {
        (ExamPresentation::Breech, None)
    } else {
        (ExamPresentation::Abstain, Some(PresentationAbstain::Tie))
    };
    PresentationResult {
        per_sweep,
        exam_label,
        votes_cephalic,
        votes_breech,
        abstain_reason,
    }
}

/// Classifies every sweep (in parallel on the current rayon pool) and
/// aggregates in sweep order.
pub fn classify_exam(exam: &Exam, threshold: f64) -> PresentationResult {
    let per_sweep = exam
        .sweeps
        .par_iter()
        .map(|s| classify_sweep(s, threshold))
        .collect();
    aggregate(per_sweep)
}

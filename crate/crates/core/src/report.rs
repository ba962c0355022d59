//! Per-exam JSON report combining both classifiers.

use serde::{Deserialize, Serialize};

use crate::lie::{
    aggregate_lie, AbstainedFrame, FrameLie, LateralBin, LieAbstain, LieLabel, LieMethod,
    LieResult, QualityCriteria,
};
use crate::presentation::{
    classify_exam, ExamPresentation, PresentationAbstain, PresentationResult, SweepLabel,
    SweepPresentation,
};
use crate::sweep_model::Exam;
use crate::TOOL_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExamReport {
    pub exam_id: String,
    pub presentation: PresentationReport,
    pub lie: LieReport,
    pub criteria: QualityCriteria,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresentationReport {
    pub label: ExamPresentation,
    pub abstain_reason: Option<PresentationAbstain>,
    pub votes: PresentationVotes,
    pub per_sweep: Vec<SweepReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationVotes {
    pub cephalic: usize,
    pub breech: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub sweep_id: String,
    pub sim_cephalic: f64,
    pub sim_breech: f64,
    pub label: SweepLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LieReport {
    pub label: LieLabel,
    pub abstain_reason: Option<LieAbstain>,
    pub votes: LieVotes,
    pub frames: Vec<FrameReport>,
    pub abstained_frames: Vec<AbstainedFrameReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LieVotes {
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub sweep_id: String,
    pub frame: usize,
    pub method: LieMethod,
    pub bin: LateralBin,
    /// `[d_row, d_col]`.
    pub vector: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstainedFrameReport {
    pub sweep_id: String,
    pub frame: usize,
    pub reasons: Vec<String>,
}

impl From<&SweepPresentation> for SweepReport {
    fn from(s: &SweepPresentation) -> Self {
        Self {
            sweep_id: s.sweep_id.clone(),
            sim_cephalic: s.sim_cephalic,
            sim_breech: s.sim_breech,
            label: s.label,
        }
    }
}

impl From<&PresentationResult> for PresentationReport {
    fn from(r: &PresentationResult) -> Self {
        Self {
            label: r.exam_label,
            abstain_reason: r.abstain_reason,
            votes: PresentationVotes {
                cephalic: r.votes_cephalic,
                breech: r.votes_breech,
            },
            per_sweep: r.per_sweep.iter().map(SweepReport::from).collect(),
        }
    }
}

impl From<&FrameLie> for FrameReport {
    fn from(f: &FrameLie) -> Self {
        Self {
            sweep_id: f.sweep_id.clone(),
            frame: f.frame_index,
            method: f.method,
            bin: f.bin,
            vector: [f.vector.d_row, f.vector.d_col],
        }
    }
}

impl From<&AbstainedFrame> for AbstainedFrameReport {
    fn from(f: &AbstainedFrame) -> Self {
        Self {
            sweep_id: f.sweep_id.clone(),
            frame: f.frame_index,
            reasons: f.reasons.clone(),
        }
    }
}

impl From<&LieResult> for LieReport {
    fn from(r: &LieResult) -> Self {
        Self {
            label: r.exam_label,
            abstain_reason: r.abstain_reason,
            votes: LieVotes {
                left: r.votes_left,
                right: r.votes_right,
            },
            frames: r.frames.iter().map(FrameReport::from).collect(),
            abstained_frames: r.abstained.iter().map(AbstainedFrameReport::from).collect(),
        }
    }
}

impl ExamReport {
    pub fn new(
        exam_id: &str,
        presentation: &PresentationResult,
        lie: &LieResult,
        criteria: &QualityCriteria,
    ) -> Self {
        Self {
            exam_id: exam_id.to_owned(),
            presentation: presentation.into(),
            lie: lie.into(),
            criteria: *criteria,
            version: TOOL_VERSION.to_owned(),
        }
    }

    /// Runs both classifiers; `criteria.detection_threshold` gates head
    /// detection for presentation.
    pub fn classify(exam: &Exam, criteria: &QualityCriteria) -> Self {
        let presentation = classify_exam(exam, criteria.detection_threshold);
        let lie = aggregate_lie(exam, criteria);
        Self::new(&exam.exam_id, &presentation, &lie, criteria)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

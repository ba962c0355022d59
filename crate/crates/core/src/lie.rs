//! Fetal lie from thalamus and CSP masks.
//!
//! The primary estimate is the unit vector from the thalamus geodesic center
//! to the CSP centroid. When only the thalamus is usable, the fallback takes
//! the direction orthogonal to the chord joining the two skeleton endpoints,
//! oriented from the arc toward the chord. The fallback is only trusted when
//! the thalamus passes the quality criteria in [`QualityCriteria`].
//!
//! Image axes: rows grow downward and columns grow rightward, so `Right`
//! means a positive column component unless `flip_lateral` is set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::morphology::{
    self, centroid, geodesic_center, largest_component, skeleton_endpoints, skeletonize,
    solidity, Component, GeodesicCenter, MorphError, Skeleton,
};
use crate::sweep_model::{BinaryMask, Exam, FrameSegmentation, Pixel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityCriteria {
    pub min_pixels: usize,
    pub min_solidity: f64,
    pub min_midpoint_distance: f64,
    pub require_single_component: bool,
    pub detection_threshold: f64,
    /// Half-width of the near-vertical band whose directions are not binned.
    pub min_lateral_ratio: f64,
    /// Inverts the image-lateral to left/right mapping.
    pub flip_lateral: bool,
}

impl Default for QualityCriteria {
    fn default() -> Self {
        Self {
            min_pixels: 55,
            min_solidity: 0.82,
            min_midpoint_distance: 1.09,
            require_single_component: true,
            detection_threshold: 0.5,
            min_lateral_ratio: 0.05,
            flip_lateral: false,
        }
    }
}

impl QualityCriteria {
    pub fn validate(&self) -> Result<(), LieError> {
        let ok = self.min_pixels > 0
            && self.min_solidity > 0.0
            && self.min_solidity <= 1.0
            && self.min_midpoint_distance > 0.0
            && self.detection_threshold > 0.0
            && self.detection_threshold < 1.0
            && self.min_lateral_ratio > 0.0;
        if ok {
            Ok(())
        } else {
            Err(LieError::InvalidCriteria)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("{0} mask is empty")]
    EmptyMask(&'static str),
    #[error("thalamus center and CSP centroid coincide")]
    CoincidentLandmarks,
    #[error("skeleton has {0} endpoints, expected 2")]
    EndpointCount(usize),
    #[error("chord midpoint coincides with the geodesic center")]
    DegenerateOrientation,
    #[error("thalamus fails criteria: {}", rule_names(.0))]
    CriteriaFailed(Vec<FallbackRule>),
    #[error("quality criteria must be positive with min_solidity <= 1 and detection_threshold < 1")]
    InvalidCriteria,
    #[error(transparent)]
    Morphology(#[from] MorphError),
}

fn rule_names(rules: &[FallbackRule]) -> String {
    rules.iter().map(|r| r.name()).collect::<Vec<_>>().join(", ")
}

/// Fallback quality rules, in evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackRule {
    SingleComponent,
    MinPixels,
    MinSolidity,
    EndpointCount,
    MinMidpointDistance,
}

impl FallbackRule {
    pub fn name(self) -> &'static str {
        match self {
            FallbackRule::SingleComponent => "single_component",
            FallbackRule::MinPixels => "min_pixels",
            FallbackRule::MinSolidity => "min_solidity",
            FallbackRule::EndpointCount => "endpoint_count",
            FallbackRule::MinMidpointDistance => "min_midpoint_distance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FacingVector {
    pub d_row: f64,
    pub d_col: f64,
}

impl FacingVector {
    /// Unit vector along `(d_row, d_col)`, `None` when too short to orient.
    pub fn normalized(d_row: f64, d_col: f64) -> Option<Self> {
        let norm = d_row.hypot(d_col);
        (norm > 1e-12).then(|| Self {
            d_row: d_row / norm,
            d_col: d_col / norm,
        })
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.d_row * other.d_row + self.d_col * other.d_col
    }

    pub fn angle_to(&self, other: &Self) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LieMethod {
    #[serde(rename = "dual")]
    DualLandmark,
    #[serde(rename = "fallback")]
    ThalamusOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LateralBin {
    Left,
    Right,
    Indeterminate,
}

impl LateralBin {
    pub fn mirrored(self) -> Self {
        match self {
            LateralBin::Left => LateralBin::Right,
            LateralBin::Right => LateralBin::Left,
            LateralBin::Indeterminate => LateralBin::Indeterminate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LieLabel {
    Left,
    Right,
    Abstain,
}

impl LieLabel {
    pub fn mirrored(self) -> Self {
        match self {
            LieLabel::Left => LieLabel::Right,
            LieLabel::Right => LieLabel::Left,
            LieLabel::Abstain => LieLabel::Abstain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LieAbstain {
    /// No frame carried any segmentation.
    NoSegmentedFrames,
    /// Segmented frames exist but none produced a left/right bin.
    NoReliableSegmentation,
    Tie,
}

/// Per-frame estimate before it is placed in an exam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameEstimate {
    pub vector: FacingVector,
    pub method: LieMethod,
    pub bin: LateralBin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameLie {
    pub sweep_id: String,
    pub frame_index: usize,
    pub vector: FacingVector,
    pub method: LieMethod,
    pub bin: LateralBin,
}

/// Why a frame produced no estimate, as stable snake_case reason codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameAbstention {
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbstainedFrame {
    pub sweep_id: String,
    pub frame_index: usize,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieResult {
    pub frames: Vec<FrameLie>,
    pub abstained: Vec<AbstainedFrame>,
    pub exam_label: LieLabel,
    pub votes_left: usize,
    pub votes_right: usize,
    pub abstain_reason: Option<LieAbstain>,
}

/// Shape measurements of the thalamus's largest component.
#[derive(Debug, Clone, PartialEq)]
pub struct ThalamusGeometry {
    pub component_count: usize,
    pub component: Component,
    pub solidity: f64,
    pub skeleton: Skeleton,
    pub endpoints: Vec<Pixel>,
    pub center: GeodesicCenter,
    /// Midpoint of the endpoint chord, when there are exactly two endpoints.
    pub midpoint: Option<(f64, f64)>,
    pub midpoint_distance: Option<f64>,
}

impl ThalamusGeometry {
    pub fn measure(mask: &BinaryMask) -> Result<Self, LieError> {
        let components = morphology::connected_components(mask);
        let component_count = components.len();
        let component = components
            .into_iter()
            .next()
            .ok_or(LieError::EmptyMask("thalamus"))?;
        let skeleton = skeletonize(&component.to_mask(mask.width(), mask.height()));
        let endpoints = skeleton_endpoints(&skeleton);
        let center = geodesic_center(&skeleton)?;
        let (midpoint, midpoint_distance) = match endpoints[..] {
            [a, b] => {
                let m = ((a.0 + b.0) as f64 / 2.0, (a.1 + b.1) as f64 / 2.0);
                let d = (m.0 - center.pixel.0 as f64).hypot(m.1 - center.pixel.1 as f64);
                (Some(m), Some(d))
            }
            _ => (None, None),
        };
        Ok(Self {
            component_count,
            solidity: solidity(&component)?,
            component,
            skeleton,
            endpoints,
            center,
            midpoint,
            midpoint_distance,
        })
    }

    /// Rules this geometry fails, in evaluation order. All thresholds are
    /// inclusive minimums.
    pub fn failed_rules(&self, criteria: &QualityCriteria) -> Vec<FallbackRule> {
        let mut failed = Vec::new();
        if criteria.require_single_component && self.component_count != 1 {
            failed.push(FallbackRule::SingleComponent);
        }
        if self.component.pixel_count() < criteria.min_pixels {
            failed.push(FallbackRule::MinPixels);
        }
        if self.solidity < criteria.min_solidity {
            failed.push(FallbackRule::MinSolidity);
        }
        match self.midpoint_distance {
            None => failed.push(FallbackRule::EndpointCount),
            Some(d) if d < criteria.min_midpoint_distance => {
                failed.push(FallbackRule::MinMidpointDistance)
            }
            Some(_) => {}
        }
        failed
    }

    /// Unit normal to the endpoint chord pointing from the geodesic center
    /// toward the chord midpoint.
    pub fn orthogonal_facing(&self) -> Result<FacingVector, LieError> {
        let (&[e1, e2], Some(m)) = (&self.endpoints[..], self.midpoint) else {
            return Err(LieError::EndpointCount(self.endpoints.len()));
        };
        orthogonal_toward(e1, e2, m, self.center.pixel)
    }
}

fn orthogonal_toward(
    e1: Pixel,
    e2: Pixel,
    midpoint: (f64, f64),
    center: Pixel,
) -> Result<FacingVector, LieError> {
    let chord = (e2.0 as f64 - e1.0 as f64, e2.1 as f64 - e1.1 as f64);
    let toward = (midpoint.0 - center.0 as f64, midpoint.1 - center.1 as f64);
    let normal = (-chord.1, chord.0);
    let side = normal.0 * toward.0 + normal.1 * toward.1;
    if side == 0.0 {
        return Err(LieError::DegenerateOrientation);
    }
    let s = side.signum();
    FacingVector::normalized(s * normal.0, s * normal.1).ok_or(LieError::DegenerateOrientation)
}

/// Facing direction from a bare skeleton with exactly two endpoints.
pub fn orthogonal_facing(skel: &Skeleton) -> Result<FacingVector, LieError> {
    let endpoints = skeleton_endpoints(skel);
    let [e1, e2] = endpoints[..] else {
        return Err(LieError::EndpointCount(endpoints.len()));
    };
    let center = geodesic_center(skel)?.pixel;
    let m = ((e1.0 + e2.0) as f64 / 2.0, (e1.1 + e2.1) as f64 / 2.0);
    orthogonal_toward(e1, e2, m, center)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FallbackCheck {
    pub failed: Vec<FallbackRule>,
    pub geometry: Option<ThalamusGeometry>,
}

impl FallbackCheck {
    pub fn passed(&self) -> bool {
        self.failed.is_empty()
    }
}

pub fn check_fallback_criteria(thalamus: &BinaryMask, criteria: &QualityCriteria) -> FallbackCheck {
    match ThalamusGeometry::measure(thalamus) {
        Ok(g) => FallbackCheck {
            failed: g.failed_rules(criteria),
            geometry: Some(g),
        },
        Err(_) => FallbackCheck {
            failed: vec![FallbackRule::SingleComponent, FallbackRule::MinPixels],
            geometry: None,
        },
    }
}

fn csp_centroid(csp: &BinaryMask) -> Result<(f64, f64), LieError> {
    let comp = largest_component(csp).ok_or(LieError::EmptyMask("csp"))?;
    Ok(centroid(&comp)?)
}

fn dual_from(center: Pixel, csp: (f64, f64)) -> Result<FacingVector, LieError> {
    FacingVector::normalized(csp.0 - center.0 as f64, csp.1 - center.1 as f64)
        .ok_or(LieError::CoincidentLandmarks)
}

/// Unit vector from the thalamus geodesic center to the CSP centroid. Both
/// masks are reduced to their largest component first.
pub fn facing_vector_dual(thalamus: &BinaryMask, csp: &BinaryMask) -> Result<FacingVector, LieError> {
    let comp = largest_component(thalamus).ok_or(LieError::EmptyMask("thalamus"))?;
    let skel = skeletonize(&comp.to_mask(thalamus.width(), thalamus.height()));
    let center = geodesic_center(&skel)?.pixel;
    dual_from(center, csp_centroid(csp)?)
}

/// Thalamus-only facing direction; refuses masks failing `criteria`.
pub fn facing_vector_fallback(
    thalamus: &BinaryMask,
    criteria: &QualityCriteria,
) -> Result<FacingVector, LieError> {
    let check = check_fallback_criteria(thalamus, criteria);
    match (check.passed(), check.geometry) {
        (true, Some(g)) => g.orthogonal_facing(),
        (_, _) => Err(LieError::CriteriaFailed(check.failed)),
    }
}

pub fn bin_direction(v: &FacingVector, criteria: &QualityCriteria) -> LateralBin {
    let lateral = if criteria.flip_lateral { -v.d_col } else { v.d_col };
    if lateral >= criteria.min_lateral_ratio {
        LateralBin::Right
    } else if lateral <= -criteria.min_lateral_ratio {
        LateralBin::Left
    } else {
        LateralBin::Indeterminate
    }
}

/// Every intermediate of one frame's lie estimate, for reporting and plots.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAnalysis {
    pub thalamus: Option<ThalamusGeometry>,
    pub csp_centroid: Option<(f64, f64)>,
    /// Fallback rules that failed, when the fallback was attempted.
    pub fallback_failures: Vec<FallbackRule>,
    pub outcome: Result<FrameEstimate, FrameAbstention>,
}

pub fn analyze_frame(seg: &FrameSegmentation, criteria: &QualityCriteria) -> FrameAnalysis {
    let mut reasons = Vec::new();
    let thalamus = match &seg.thalamus {
        Some(m) => match ThalamusGeometry::measure(m) {
            Ok(g) => Some(g),
            Err(e) => {
                reasons.push(format!("thalamus: {e}"));
                None
            }
        },
        None => {
            reasons.push("no_thalamus".to_owned());
            None
        }
    };
    let csp_centroid = seg.csp.as_ref().and_then(|m| csp_centroid(m).ok());
    let mut analysis = FrameAnalysis {
        thalamus,
        csp_centroid,
        fallback_failures: Vec::new(),
        outcome: Err(FrameAbstention { reasons: Vec::new() }),
    };
    let Some(geometry) = &analysis.thalamus else {
        analysis.outcome = Err(FrameAbstention { reasons });
        return analysis;
    };
    let estimate = |vector: FacingVector, method| FrameEstimate {
        vector,
        method,
        bin: bin_direction(&vector, criteria),
    };

    if let Some(csp) = analysis.csp_centroid {
        match dual_from(geometry.center.pixel, csp) {
            Ok(v) => {
                analysis.outcome = Ok(estimate(v, LieMethod::DualLandmark));
                return analysis;
            }
            Err(_) => reasons.push("coincident_landmarks".to_owned()),
        }
    } else {
        reasons.push("no_csp".to_owned());
    }

    let failed = geometry.failed_rules(criteria);
    if failed.is_empty() {
        match geometry.orthogonal_facing() {
            Ok(v) => {
                analysis.outcome = Ok(estimate(v, LieMethod::ThalamusOnly));
                return analysis;
            }
            Err(_) => reasons.push("degenerate_orientation".to_owned()),
        }
    }
    reasons.extend(failed.iter().map(|r| r.name().to_owned()));
    analysis.fallback_failures = failed;
    analysis.outcome = Err(FrameAbstention { reasons });
    analysis
}

/// Dual-landmark estimate when both masks allow it, else the guarded
/// thalamus-only fallback, else abstention.
pub fn classify_frame(
    seg: &FrameSegmentation,
    criteria: &QualityCriteria,
) -> Result<FrameEstimate, FrameAbstention> {
    analyze_frame(seg, criteria).outcome
}

/// Majority vote of left/right frame bins over every segmented frame of the
/// exam. Indeterminate and abstained frames do not vote; a tie abstains.
pub fn aggregate_lie(exam: &Exam, criteria: &QualityCriteria) -> LieResult {
    let jobs: Vec<(&str, usize, &FrameSegmentation)> = exam
        .sweeps
        .iter()
        .flat_map(|s| {
            s.segmentations
                .iter()
                .map(move |(&t, seg)| (s.sweep_id.as_str(), t, seg))
        })
        .collect();
    let outcomes: Vec<_> = jobs
        .par_iter()
        .map(|&(_, _, seg)| classify_frame(seg, criteria))
        .collect();

    let mut frames = Vec::new();
    let mut abstained = Vec::new();
    for (&(sweep_id, frame_index, _), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(e) => frames.push(FrameLie {
                sweep_id: sweep_id.to_owned(),
                frame_index,
                vector: e.vector,
                method: e.method,
                bin: e.bin,
            }),
            Err(a) => abstained.push(AbstainedFrame {
                sweep_id: sweep_id.to_owned(),
                frame_index,
                reasons: a.reasons,
            }),
        }
    }
    let votes_left = frames.iter().filter(|f| f.bin == LateralBin::Left).count();
    let votes_right = frames.iter().filter(|f| f.bin == LateralBin::Right).count();
    let (exam_label, abstain_reason) = if jobs.is_empty() {
        (LieLabel::Abstain, Some(LieAbstain::NoSegmentedFrames))
    } else if votes_left + votes_right == 0 {
        (LieLabel::Abstain, Some(LieAbstain::NoReliableSegmentation))
    } else if votes_left == votes_right {
        (LieLabel::Abstain, Some(LieAbstain::Tie))
    } else if votes_right > votes_left {
        (LieLabel::Right, None)
    } else {
        (LieLabel::Left, None)
    };
    LieResult {
        frames,
        abstained,
        exam_label,
        votes_left,
        votes_right,
        abstain_reason,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn defaults_match_published_thresholds() {
        let c = QualityCriteria::default();
        assert_eq!(c.min_pixels, 55);
        assert_eq!(c.min_solidity, 0.82);
        assert_eq!(c.min_midpoint_distance, 1.09);
        assert!(c.require_single_component);
        assert!(c.validate().is_ok());
        assert!(QualityCriteria {
            min_solidity: 1.5,
            ..c
        }
        .validate()
        .is_err());
    }

    #[test]
    fn dual_vector_by_subtraction() {
        assert_eq!(dual_from((50, 40), (50.0, 60.0)).unwrap(), FacingVector { d_row: 0.0, d_col: 1.0 });
        assert_eq!(dual_from((50, 40), (30.0, 40.0)).unwrap(), FacingVector { d_row: -1.0, d_col: 0.0 });
        assert_eq!(dual_from((5, 5), (5.0, 5.0)), Err(LieError::CoincidentLandmarks));
    }

    #[test]
    fn dual_on_point_masks() {
        let thal = BinaryMask::from_pixels(100, 100, [(50, 40)]).unwrap();
        let csp = BinaryMask::from_pixels(100, 100, [(50, 59), (50, 60), (50, 61)]).unwrap();
        let v = facing_vector_dual(&thal, &csp).unwrap();
        assert!(close(v.d_row, 0.0) && close(v.d_col, 1.0));
        assert!(matches!(
            facing_vector_dual(&BinaryMask::new(100, 100), &csp),
            Err(LieError::EmptyMask("thalamus"))
        ));
        assert!(matches!(
            facing_vector_dual(&thal, &BinaryMask::new(100, 100)),
            Err(LieError::EmptyMask("csp"))
        ));
    }

    fn half_ring(opening_right: bool) -> Skeleton {
        // Left half of a digital circle around (5,5), ends at (0,5) and (10,5).
        let px = vec![
            (0, 5), (0, 4), (0, 3), (1, 2), (2, 1), (3, 0), (4, 0), (5, 0),
            (6, 0), (7, 0), (8, 1), (9, 2), (10, 3), (10, 4), (10, 5),
        ];
        let px: Vec<Pixel> = px
            .into_iter()
            .map(|(r, c)| if opening_right { (r, c) } else { (r, 10 - c) })
            .collect();
        Skeleton::from_pixels(11, 11, px)
    }

    #[test]
    fn fallback_half_ring_opening_right() {
        let skel = half_ring(true);
        let ends = skeleton_endpoints(&skel);
        assert_eq!(ends, [(0, 5), (10, 5)]);
        let v = orthogonal_facing(&skel).unwrap();
        assert!(close(v.d_row, 0.0) && close(v.d_col, 1.0), "{v:?}");
        let m = orthogonal_facing(&half_ring(false)).unwrap();
        assert!(close(m.d_row, 0.0) && close(m.d_col, -1.0), "{m:?}");
    }

    #[test]
    fn straight_line_has_no_orientation() {
        let line = Skeleton::from_pixels(3, 9, (0..9).map(|c| (1, c)));
        assert_eq!(orthogonal_facing(&line), Err(LieError::DegenerateOrientation));
        let blob = BinaryMask::from_pixels(80, 80, (0..60).map(|c| (10, c))).unwrap();
        let check = check_fallback_criteria(&blob, &QualityCriteria::default());
        assert_eq!(check.failed, [FallbackRule::MinMidpointDistance]);
    }

    #[test]
    fn binning() {
        let c = QualityCriteria::default();
        let bin = |r, col| bin_direction(&FacingVector { d_row: r, d_col: col }, &c);
        assert_eq!(bin(0.0, 1.0), LateralBin::Right);
        assert_eq!(bin(0.99, -0.141), LateralBin::Left);
        assert_eq!(bin(1.0, 0.0), LateralBin::Indeterminate);
        assert_eq!(bin(0.0, 0.05), LateralBin::Right);
        let flipped = QualityCriteria {
            flip_lateral: true,
            ..c
        };
        assert_eq!(
            bin_direction(&FacingVector { d_row: 0.0, d_col: 1.0 }, &flipped),
            LateralBin::Left
        );
    }

    #[test]
    fn empty_thalamus_fails_criteria() {
        let check = check_fallback_criteria(&BinaryMask::new(10, 10), &QualityCriteria::default());
        assert!(!check.passed());
        assert!(check.geometry.is_none());
    }

    #[test]
    fn frame_without_thalamus_abstains() {
        let seg = FrameSegmentation {
            width: 10,
            height: 10,
            thalamus: None,
            csp: Some(BinaryMask::from_pixels(10, 10, [(2, 2)]).unwrap()),
        };
        let err = classify_frame(&seg, &QualityCriteria::default()).unwrap_err();
        assert_eq!(err.reasons, ["no_thalamus"]);
    }

    use crate::synth::crescent_mask;
    use std::collections::BTreeMap;

    fn small_crescent() -> BinaryMask {
        crescent_mask((60, 60), (30.0, 30.0), 7.5, 3.0, 135.0, 0.0)
    }

    fn crescent_facing(right: bool) -> BinaryMask {
        let angle = if right { 0.0 } else { std::f64::consts::PI };
        crescent_mask((60, 60), (30.0, 30.0), 24.0, 12.0, 120.0, angle)
    }

    fn above(x: f64) -> f64 {
        f64::from_bits(x.to_bits() + 1)
    }

    #[test]
    fn pixel_count_threshold_is_inclusive() {
        let c = QualityCriteria::default();
        let m = small_crescent();
        assert_eq!(m.len(), 55);
        assert!(check_fallback_criteria(&m, &c).passed());
        let mut m54 = m.clone();
        m54.remove((29, 23));
        assert_eq!(m54.len(), 54);
        let check = check_fallback_criteria(&m54, &c);
        let names: Vec<&str> = check.failed.iter().map(|r| r.name()).collect();
        assert_eq!(names, ["min_pixels"]);
    }

    #[test]
    fn solidity_threshold_is_inclusive() {
        let c = QualityCriteria::default();
        let m = crescent_mask((60, 60), (30.0, 30.0), 12.0, 6.0, 135.0, 0.0);
        let check = check_fallback_criteria(&m, &c);
        let g = check.geometry.as_ref().unwrap();
        assert_eq!(g.component.pixel_count(), 123);
        assert_eq!(g.solidity, 0.82);
        assert!(check.passed());
        let stricter = QualityCriteria {
            min_solidity: above(0.82),
            ..c
        };
        assert_eq!(check_fallback_criteria(&m, &stricter).failed, [FallbackRule::MinSolidity]);
    }

    #[test]
    fn midpoint_distance_threshold_is_inclusive() {
        let m = small_crescent();
        let d = check_fallback_criteria(&m, &QualityCriteria::default())
            .geometry
            .unwrap()
            .midpoint_distance
            .unwrap();
        let at = QualityCriteria {
            min_midpoint_distance: d,
            ..QualityCriteria::default()
        };
        assert!(check_fallback_criteria(&m, &at).passed());
        let past = QualityCriteria {
            min_midpoint_distance: above(d),
            ..at
        };
        assert_eq!(
            check_fallback_criteria(&m, &past).failed,
            [FallbackRule::MinMidpointDistance]
        );
    }

    #[test]
    fn thin_semicircular_band_fails_solidity() {
        let m = crescent_mask((60, 60), (30.0, 30.0), 12.0, 7.0, 180.0, 0.0);
        let check = check_fallback_criteria(&m, &QualityCriteria::default());
        assert_eq!(check.failed, [FallbackRule::MinSolidity]);
        assert!(check.geometry.unwrap().solidity < 0.7);
    }

    #[test]
    fn fragmented_thalamus_fails_single_component() {
        let mut m = small_crescent();
        m.insert((50, 50)).unwrap();
        let check = check_fallback_criteria(&m, &QualityCriteria::default());
        assert_eq!(check.failed, [FallbackRule::SingleComponent]);
        let relaxed = QualityCriteria {
            require_single_component: false,
            ..QualityCriteria::default()
        };
        assert!(check_fallback_criteria(&m, &relaxed).passed());
    }

    fn frame(thalamus: Option<BinaryMask>, csp: Option<BinaryMask>) -> FrameSegmentation {
        FrameSegmentation {
            width: 60,
            height: 60,
            thalamus,
            csp,
        }
    }

    #[test]
    fn classify_frame_dispatch() {
        let c = QualityCriteria::default();
        let csp = BinaryMask::from_pixels(60, 60, [(30, 45), (30, 46)]).unwrap();
        let dual = classify_frame(&frame(Some(small_crescent()), Some(csp)), &c).unwrap();
        assert_eq!(dual.method, LieMethod::DualLandmark);
        assert_eq!(dual.bin, LateralBin::Right);
        let only = classify_frame(&frame(Some(small_crescent()), None), &c).unwrap();
        assert_eq!(only.method, LieMethod::ThalamusOnly);
        assert_eq!(only.bin, LateralBin::Right);
        let tiny = BinaryMask::from_fn(60, 60, |r, col| (10..15).contains(&r) && (10..18).contains(&col));
        assert_eq!(tiny.len(), 40);
        let err = classify_frame(&frame(Some(tiny), None), &c).unwrap_err();
        assert!(err.reasons.contains(&"min_pixels".to_string()), "{err:?}");
    }

    fn exam_with_bins(bins: &[bool]) -> Exam {
        let segs: BTreeMap<usize, FrameSegmentation> = bins
            .iter()
            .enumerate()
            .map(|(i, &right)| {
                (i, frame(Some(crescent_facing(right)), None))
            })
            .collect();
        Exam {
            exam_id: "e".into(),
            sweeps: vec![crate::sweep_model::Sweep {
                sweep_id: "V1".into(),
                n_frames: bins.len(),
                trace: vec![0.9; bins.len()],
                segmentations: segs,
            }],
        }
    }

    #[test]
    fn majority_over_frames() {
        let c = QualityCriteria::default();
        let r = aggregate_lie(&exam_with_bins(&[true, true, false]), &c);
        assert_eq!((r.votes_left, r.votes_right), (1, 2));
        assert_eq!(r.exam_label, LieLabel::Right);
        let tie = aggregate_lie(&exam_with_bins(&[true, false]), &c);
        assert_eq!(tie.exam_label, LieLabel::Abstain);
        assert_eq!(tie.abstain_reason, Some(LieAbstain::Tie));
        let none = aggregate_lie(&exam_with_bins(&[]), &c);
        assert_eq!(none.abstain_reason, Some(LieAbstain::NoSegmentedFrames));
    }
}

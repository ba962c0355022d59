//! Synthetic exams with known orientation.
//!
//! Traces are Gaussian bumps placed early in the sweep for cephalic and late
//! for breech. The thalamus is an annulus sector whose concave side opens
//! toward the facing direction; the CSP is an ellipse placed in front of it.
//! One seeded ChaCha stream drives all randomness of an exam.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sweep_model::{write_exam, BinaryMask, Exam, ExamError, FrameSegmentation, Sweep};

pub mod oracle;

pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Presentation {
    Cephalic,
    Breech,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub presentation: Presentation,
    pub lie: Side,
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Exam(#[from] ExamError),
    #[error("writing {0}: {1}")]
    Io(String, #[source] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub presentation: Presentation,
    pub lie: Side,
    pub n_sweeps: usize,
    pub n_frames: usize,
    /// `(height, width)`.
    pub image_size: (usize, usize),
    /// Zero-based indices of sweeps that see the head.
    pub head_sweep_indices: Vec<usize>,
    pub bump_center_fraction: f64,
    pub bump_sigma_fraction: f64,
    pub trace_noise_sigma: f64,
    pub mask_jitter_px: f64,
    /// Frames whose trace value reaches this get masks.
    pub detection_threshold: f64,
    pub outer_radius: f64,
    pub inner_radius: f64,
    pub span_degrees: f64,
    /// CSP semi-axes `(along facing, across facing)`.
    pub csp_semi_axes: (f64, f64),
    /// Distance from the crescent center to the CSP center along the facing.
    pub csp_offset: f64,
    pub rng_seed: u64,
}

impl SynthConfig {
    pub fn new(presentation: Presentation, lie: Side, rng_seed: u64) -> Self {
        let n_sweeps = 5;
        Self {
            presentation,
            lie,
            n_sweeps,
            n_frames: 100,
            image_size: (256, 256),
            head_sweep_indices: (0..n_sweeps).collect(),
            bump_center_fraction: match presentation {
                Presentation::Cephalic => 0.2,
                Presentation::Breech => 0.8,
            },
            bump_sigma_fraction: 0.05,
            trace_noise_sigma: 0.0,
            mask_jitter_px: 0.0,
            detection_threshold: 0.5,
            outer_radius: 24.0,
            inner_radius: 12.0,
            span_degrees: 120.0,
            csp_semi_axes: (6.0, 4.0),
            csp_offset: 30.0,
            rng_seed,
        }
    }

    pub fn exam_id(&self) -> String {
        let p = match self.presentation {
            Presentation::Cephalic => "cephalic",
            Presentation::Breech => "breech",
        };
        let l = match self.lie {
            Side::Left => "left",
            Side::Right => "right",
        };
        format!("synth-{p}-{l}-{}", self.rng_seed)
    }

    pub fn ground_truth(&self) -> GroundTruth {
        GroundTruth {
            presentation: self.presentation,
            lie: self.lie,
        }
    }

    /// Facing angle in the image plane: 0 faces `+col`, π faces `-col`.
    pub fn facing_angle(&self) -> f64 {
        match self.lie {
            Side::Right => 0.0,
            Side::Left => std::f64::consts::PI,
        }
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.image_size.0 / 2) as f64,
            (self.image_size.1 / 2) as f64,
        )
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Config(m.to_owned()));
        if self.n_sweeps == 0 {
            return bad("n_sweeps must be positive");
        }
        if self.n_frames == 0 {
            return bad("n_frames must be positive");
        }
        if let Some(i) = self.head_sweep_indices.iter().find(|&&i| i >= self.n_sweeps) {
            return bad(&format!("head sweep index {i} >= n_sweeps"));
        }
        if !(self.inner_radius > 0.0 && self.inner_radius < self.outer_radius) {
            return bad("radii must satisfy 0 < inner < outer");
        }
        if !(self.span_degrees > 0.0 && self.span_degrees <= 360.0) {
            return bad("span_degrees must be in (0, 360]");
        }
        if !(self.csp_semi_axes.0 > 0.0 && self.csp_semi_axes.1 > 0.0) {
            return bad("CSP semi-axes must be positive");
        }
        if !(self.bump_sigma_fraction > 0.0) || !self.bump_center_fraction.is_finite() {
            return bad("bump parameters must be finite with positive sigma");
        }
        if !(self.trace_noise_sigma >= 0.0 && self.mask_jitter_px >= 0.0) {
            return bad("noise and jitter must be non-negative");
        }
        if !(self.detection_threshold > 0.0 && self.detection_threshold <= 1.0) {
            return bad("detection_threshold must be in (0, 1]");
        }
        let (h, w) = (self.image_size.0 as f64, self.image_size.1 as f64);
        let (cr, cc) = self.center();
        let margin = self.mask_jitter_px.ceil() + 1.0;
        let reach = self
            .outer_radius
            .max(self.csp_offset + self.csp_semi_axes.0.max(self.csp_semi_axes.1))
            + margin;
        if cr - reach < 0.0 || cc - reach < 0.0 || cr + reach > h - 1.0 || cc + reach > w - 1.0 {
            return bad("geometry does not fit inside image_size");
        }
        if self.csp_offset - self.csp_semi_axes.0.max(self.csp_semi_axes.1) <= 0.0 {
            return bad("CSP must not cover the crescent center");
        }
        Ok(())
    }
}

/// Head probability trace for one sweep.
pub fn make_trace(cfg: &SynthConfig, sweep_index: usize, rng: &mut impl Rng) -> Vec<f64> {
    if !cfg.head_sweep_indices.contains(&sweep_index) {
        return vec![0.0; cfg.n_frames];
    }
    let n = cfg.n_frames as f64;
    let mu = cfg.bump_center_fraction * n;
    let sigma = cfg.bump_sigma_fraction * n;
    let noise = (cfg.trace_noise_sigma > 0.0)
        .then(|| Normal::new(0.0, cfg.trace_noise_sigma).expect("sigma is finite"));
    (0..cfg.n_frames)
        .map(|t| {
            let z = (t as f64 - mu) / sigma;
            let mut p = 0.95 * (-0.5 * z * z).exp();
            if let Some(noise) = &noise {
                p += noise.sample(rng);
            }
            p.clamp(0.0, 1.0)
        })
        .collect()
}

/// Annulus sector centered at `center` whose concave side faces `facing_angle`
/// (the sector itself spans `span_degrees` around the opposite direction).
pub fn crescent_mask(
    size: (usize, usize),
    center: (f64, f64),
    outer: f64,
    inner: f64,
    span_degrees: f64,
    facing_angle: f64,
) -> BinaryMask {
    let back = (-facing_angle.sin(), -facing_angle.cos());
    let cos_half = (span_degrees.to_radians() / 2.0).cos();
    BinaryMask::from_fn(size.1, size.0, |r, c| {
        let dr = r as f64 - center.0;
        let dc = c as f64 - center.1;
        let d = dr.hypot(dc);
        if d < inner || d > outer {
            return false;
        }
        (dr * back.0 + dc * back.1) >= cos_half * d - 1e-9
    })
}

/// Ellipse with semi-axes `(along, across)` relative to `facing_angle`.
pub fn ellipse_mask(
    size: (usize, usize),
    center: (f64, f64),
    semi_axes: (f64, f64),
    facing_angle: f64,
) -> BinaryMask {
    let along = (facing_angle.sin(), facing_angle.cos());
    BinaryMask::from_fn(size.1, size.0, |r, c| {
        let dr = r as f64 - center.0;
        let dc = c as f64 - center.1;
        let u = dr * along.0 + dc * along.1;
        let v = -dr * along.1 + dc * along.0;
        (u / semi_axes.0).powi(2) + (v / semi_axes.1).powi(2) <= 1.0
    })
}

/// Randomly erodes and dilates the boundary, `ceil(jitter_px)` passes.
/// Pixels in `blocked` are never added.
pub fn jitter_boundary(
    mask: &BinaryMask,
    jitter_px: f64,
    blocked: Option<&BinaryMask>,
    rng: &mut impl Rng,
) -> BinaryMask {
    let mut out = mask.clone();
    let passes = jitter_px.ceil() as usize;
    for pass in 0..passes {
        let p = 0.5 * (jitter_px - pass as f64).min(1.0);
        let (h, w) = (out.height(), out.width());
        let inside = |m: &BinaryMask, r: isize, c: isize| {
            r >= 0 && c >= 0 && m.contains((r as usize, c as usize))
        };
        let mut remove = Vec::new();
        let mut add = Vec::new();
        for r in 0..h {
            for c in 0..w {
                let (ri, ci) = (r as isize, c as isize);
                let n4 = [(ri - 1, ci), (ri + 1, ci), (ri, ci - 1), (ri, ci + 1)];
                let fg = out.contains((r, c));
                let touches = n4.iter().any(|&(nr, nc)| inside(&out, nr, nc) != fg);
                if !touches {
                    continue;
                }
                let roll: f64 = rng.gen();
                if roll < p {
                    if fg {
                        remove.push((r, c));
                    } else if blocked.map_or(true, |b| !b.contains((r, c))) {
                        add.push((r, c));
                    }
                }
            }
        }
        for px in remove {
            out.remove(px);
        }
        for px in add {
            out.insert(px).expect("in bounds");
        }
    }
    out
}

/// Thalamus and CSP masks for one head-visible frame.
pub fn make_frame_masks(cfg: &SynthConfig, rng: &mut impl Rng) -> FrameSegmentation {
    let (h, w) = cfg.image_size;
    let center = cfg.center();
    let angle = cfg.facing_angle();
    let mut thalamus = crescent_mask(
        cfg.image_size,
        center,
        cfg.outer_radius,
        cfg.inner_radius,
        cfg.span_degrees,
        angle,
    );
    let csp_center = (
        center.0 + cfg.csp_offset * angle.sin(),
        center.1 + cfg.csp_offset * angle.cos(),
    );
    let mut csp = ellipse_mask(cfg.image_size, csp_center, cfg.csp_semi_axes, angle);
    if cfg.mask_jitter_px > 0.0 {
        thalamus = jitter_boundary(&thalamus, cfg.mask_jitter_px, Some(&csp), rng);
        csp = jitter_boundary(&csp, cfg.mask_jitter_px, Some(&thalamus), rng);
    }
    FrameSegmentation {
        width: w,
        height: h,
        thalamus: (!thalamus.is_empty()).then_some(thalamus),
        csp: (!csp.is_empty()).then_some(csp),
    }
}

/// Builds the exam in memory.
pub fn generate_exam(cfg: &SynthConfig) -> Result<(Exam, GroundTruth), SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut sweeps = Vec::with_capacity(cfg.n_sweeps);
    for i in 0..cfg.n_sweeps {
        let trace = make_trace(cfg, i, &mut rng);
        let mut segmentations = BTreeMap::new();
        for (t, &p) in trace.iter().enumerate() {
            if p >= cfg.detection_threshold {
                let seg = make_frame_masks(cfg, &mut rng);
                if seg.thalamus.is_some() || seg.csp.is_some() {
                    segmentations.insert(t, seg);
                }
            }
        }
        sweeps.push(Sweep {
            sweep_id: format!("V{}", i + 1),
            n_frames: cfg.n_frames,
            trace,
            segmentations,
        });
    }
    Ok((
        Exam {
            exam_id: cfg.exam_id(),
            sweeps,
        },
        cfg.ground_truth(),
    ))
}

/// Generates the exam and writes it, plus `ground_truth.json`, under `dir`.
pub fn make_exam(cfg: &SynthConfig, dir: impl AsRef<Path>) -> Result<GroundTruth, SynthError> {
    let dir = dir.as_ref();
    let (exam, truth) = generate_exam(cfg)?;
    write_exam(&exam, dir)?;
    let path = dir.join(GROUND_TRUTH_FILE);
    let mut text = serde_json::to_string_pretty(&truth).expect("ground truth serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| SynthError::Io(path.display().to_string(), e))?;
    Ok(truth)
}

pub fn read_ground_truth(dir: impl AsRef<Path>) -> Result<GroundTruth, SynthError> {
    let path = dir.as_ref().join(GROUND_TRUTH_FILE);
    let text =
        fs::read_to_string(&path).map_err(|e| SynthError::Io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| SynthError::Config(e.to_string()))
}

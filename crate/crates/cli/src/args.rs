use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fetalorient_core::lie::QualityCriteria;
use fetalorient_core::{Presentation, Side, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "fetalorient", version, about = "Fetal presentation and lie from blind-sweep exam bundles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify an exam bundle and write the JSON report.
    Classify(ClassifyArgs),
    /// Generate a synthetic exam bundle with known ground truth.
    Synth(SynthArgs),
    /// Plot one sweep's head trace against both templates as SVG.
    PlotPresentation(PlotPresentationArgs),
    /// Plot one frame's masks, landmarks and facing arrow as SVG.
    PlotLie(PlotLieArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CriteriaArgs {
    /// Head detection threshold on the per-frame probability.
    #[arg(long, value_name = "P", value_parser = unit_interval)]
    pub tau: Option<f64>,
    #[arg(long, value_name = "N")]
    pub min_pixels: Option<usize>,
    #[arg(long, value_name = "S")]
    pub min_solidity: Option<f64>,
    #[arg(long = "min-midpoint-dist", value_name = "PX")]
    pub min_midpoint_distance: Option<f64>,
    /// Swap the image-lateral to left/right mapping.
    #[arg(long)]
    pub flip_lateral: bool,
}

impl CriteriaArgs {
    pub fn criteria(&self) -> QualityCriteria {
        let d = QualityCriteria::default();
        QualityCriteria {
            min_pixels: self.min_pixels.unwrap_or(d.min_pixels),
            min_solidity: self.min_solidity.unwrap_or(d.min_solidity),
            min_midpoint_distance: self.min_midpoint_distance.unwrap_or(d.min_midpoint_distance),
            detection_threshold: self.tau.unwrap_or(d.detection_threshold),
            flip_lateral: self.flip_lateral,
            ..d
        }
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    pub exam_dir: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub criteria: CriteriaArgs,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PresentationArg {
    Cephalic,
    Breech,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output bundle directory.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub presentation: PresentationArg,
    #[arg(long, value_enum)]
    pub lie: SideArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5, value_parser = positive)]
    pub n_sweeps: usize,
    #[arg(long, default_value_t = 100, value_parser = positive)]
    pub n_frames: usize,
    #[arg(long, default_value_t = 256, value_parser = positive)]
    pub height: usize,
    #[arg(long, default_value_t = 256, value_parser = positive)]
    pub width: usize,
    /// Comma-separated zero-based sweep indices that see the head
    /// (default: all). Pass an empty string for none.
    #[arg(long, value_name = "LIST")]
    pub head_sweeps: Option<String>,
    #[arg(long)]
    pub bump_center: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub bump_sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    pub detection_threshold: f64,
    #[arg(long, default_value_t = 24.0)]
    pub outer_radius: f64,
    #[arg(long, default_value_t = 12.0)]
    pub inner_radius: f64,
    #[arg(long, default_value_t = 120.0)]
    pub span_degrees: f64,
    #[arg(long, default_value_t = 6.0)]
    pub csp_along: f64,
    #[arg(long, default_value_t = 4.0)]
    pub csp_across: f64,
    #[arg(long, default_value_t = 30.0)]
    pub csp_offset: f64,
}

impl SynthArgs {
    pub fn config(&self) -> Result<SynthConfig, String> {
        let presentation = match self.presentation {
            PresentationArg::Cephalic => Presentation::Cephalic,
            PresentationArg::Breech => Presentation::Breech,
        };
        let lie = match self.lie {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
        };
        let mut cfg = SynthConfig::new(presentation, lie, self.seed);
        cfg.n_sweeps = self.n_sweeps;
        cfg.n_frames = self.n_frames;
        cfg.image_size = (self.height, self.width);
        cfg.head_sweep_indices = match &self.head_sweeps {
            None => (0..self.n_sweeps).collect(),
            Some(list) => parse_indices(list)?,
        };
        if let Some(c) = self.bump_center {
            cfg.bump_center_fraction = c;
        }
        cfg.bump_sigma_fraction = self.bump_sigma;
        cfg.trace_noise_sigma = self.noise_sigma;
        cfg.mask_jitter_px = self.jitter;
        cfg.detection_threshold = self.detection_threshold;
        cfg.outer_radius = self.outer_radius;
        cfg.inner_radius = self.inner_radius;
        cfg.span_degrees = self.span_degrees;
        cfg.csp_semi_axes = (self.csp_along, self.csp_across);
        cfg.csp_offset = self.csp_offset;
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn parse_indices(list: &str) -> Result<Vec<usize>, String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("bad sweep index {s:?}")))
        .collect()
}

#[derive(Debug, Args)]
pub struct PlotPresentationArgs {
    pub exam_dir: PathBuf,
    #[arg(long)]
    pub sweep: String,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, value_name = "P", value_parser = unit_interval)]
    pub tau: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlotLieArgs {
    pub exam_dir: PathBuf,
    #[arg(long)]
    pub sweep: String,
    #[arg(long)]
    pub frame: usize,
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub criteria: CriteriaArgs,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err("must be in (0, 1]".into())
    }
}

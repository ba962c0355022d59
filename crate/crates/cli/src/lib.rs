//! Command-line front end: `classify`, `synth`, `plot-presentation` and
//! `plot-lie`.
//!
//! Exit codes: 0 success (abstentions included), 2 invalid bundle, 3 I/O
//! failure, 64 usage error.

pub mod args;
pub mod svg;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::Path;

use clap::error::ErrorKind;
use clap::Parser;
use fetalorient_core::lie::analyze_frame;
use fetalorient_core::presentation::classify_sweep;
use fetalorient_core::synth::{make_exam, SynthError};
use fetalorient_core::{load_exam, Exam, ExamError, ExamReport};

use args::{ClassifyArgs, Cli, Command, PlotLieArgs, PlotPresentationArgs, SynthArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<ExamError> for Failure {
    fn from(e: ExamError) -> Self {
        Self {
            code: if e.is_io() { EXIT_IO } else { EXIT_VALIDATION },
            message: e.to_string(),
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let result = match cli.command {
        Command::Classify(a) => classify(&a),
        Command::Synth(a) => synth(&a),
        Command::PlotPresentation(a) => plot_presentation(&a),
        Command::PlotLie(a) => plot_lie(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(format!("writing {}: {e}", path.display())))
}

fn classify(a: &ClassifyArgs) -> Result<(), Failure> {
    let criteria = a.criteria.criteria();
    criteria.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let exam = load_exam(&a.exam_dir)?;
    let report = match a.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.into())
            .build()
            .map_err(|e| Failure::usage(format!("thread pool: {e}")))?
            .install(|| ExamReport::classify(&exam, &criteria)),
        None => ExamReport::classify(&exam, &criteria),
    };
    let json = report.to_json();
    match &a.out {
        Some(path) => write_file(path, &json),
        None => std::io::stdout()
            .write_all(json.as_bytes())
            .map_err(|e| Failure::io(format!("writing stdout: {e}"))),
    }
}

fn synth(a: &SynthArgs) -> Result<(), Failure> {
    let cfg = a.config().map_err(Failure::usage)?;
    make_exam(&cfg, &a.out).map_err(|e| match e {
        SynthError::Config(m) => Failure::usage(m),
        SynthError::Exam(e) => e.into(),
        SynthError::Io(..) => Failure::io(e.to_string()),
    })?;
    Ok(())
}

fn find_sweep<'a>(exam: &'a Exam, id: &str) -> Result<&'a fetalorient_core::Sweep, Failure> {
    exam.sweeps
        .iter()
        .find(|s| s.sweep_id == id)
        .ok_or_else(|| Failure::usage(format!("no sweep {id:?} in exam {}", exam.exam_id)))
}

fn plot_presentation(a: &PlotPresentationArgs) -> Result<(), Failure> {
    let exam = load_exam(&a.exam_dir)?;
    let sweep = find_sweep(&exam, &a.sweep)?;
    if sweep.trace.is_empty() {
        return Err(Failure::usage(format!("sweep {} has an empty trace", sweep.sweep_id)));
    }
    let tau = a.tau.unwrap_or(fetalorient_core::DEFAULT_TAU);
    let result = classify_sweep(sweep, tau);
    write_file(&a.out, &svg::presentation_svg(sweep, &result))
}

fn plot_lie(a: &PlotLieArgs) -> Result<(), Failure> {
    let criteria = a.criteria.criteria();
    criteria.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let exam = load_exam(&a.exam_dir)?;
    let sweep = find_sweep(&exam, &a.sweep)?;
    let seg = sweep.segmentations.get(&a.frame).ok_or_else(|| {
        Failure::usage(format!("sweep {} has no segmentation at frame {}", sweep.sweep_id, a.frame))
    })?;
    let analysis = analyze_frame(seg, &criteria);
    let estimate = match &analysis.outcome {
        Ok(e) => *e,
        Err(abstention) => {
            return Err(Failure::usage(format!(
                "frame {} of sweep {} abstained: {}",
                a.frame,
                sweep.sweep_id,
                abstention.reasons.join(", ")
            )))
        }
    };
    write_file(&a.out, &svg::lie_svg(seg, &analysis, &estimate))
}

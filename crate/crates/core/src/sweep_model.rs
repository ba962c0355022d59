//! Exam, sweep and mask data model, plus the on-disk exam bundle format.
//!
//! A bundle is a directory holding `manifest.json`, one `frame,probability`
//! CSV trace per sweep, and optional per-frame label PNGs
//! (`frame_%04d.png`, background 0, thalamus 1, CSP 2).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `(row, col)` pixel coordinate. Rows grow downward, columns rightward.
pub type Pixel = (usize, usize);

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRACE_HEADER: [&str; 2] = ["frame", "probability"];

pub const LABEL_BACKGROUND: u8 = 0;
pub const LABEL_THALAMUS: u8 = 1;
pub const LABEL_CSP: u8 = 2;

#[derive(Debug, Error)]
pub enum ExamError {
    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("manifest {}: {message}", path.display())]
    Manifest { path: PathBuf, message: String },
    #[error("trace {}: {message}", path.display())]
    Trace { path: PathBuf, message: String },
    #[error("sweep {sweep_id}: trace length {actual} does not match n_frames {expected}")]
    TraceLength {
        sweep_id: String,
        expected: usize,
        actual: usize,
    },
    #[error("sweep {sweep_id} frame {frame}: probability out of range: {value}")]
    ProbabilityOutOfRange {
        sweep_id: String,
        frame: usize,
        value: f64,
    },
    #[error("mask {}: {message}", path.display())]
    Mask { path: PathBuf, message: String },
    #[error("pixel ({row}, {col}) outside {width}x{height} mask")]
    PixelOutOfBounds {
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    },
    #[error("invalid exam: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

impl ExamError {
    /// True for failures of the filesystem itself rather than of bundle content.
    pub fn is_io(&self) -> bool {
        matches!(self, ExamError::Io { .. })
    }

    fn io(path: &Path, source: io::Error) -> Self {
        ExamError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// 2-D boolean pixel grid stored as its foreground set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    pixels: BTreeSet<Pixel>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: BTreeSet::new(),
        }
    }

    pub fn from_pixels(
        width: usize,
        height: usize,
        pixels: impl IntoIterator<Item = Pixel>,
    ) -> Result<Self, ExamError> {
        let mut mask = Self::new(width, height);
        for p in pixels {
            mask.insert(p)?;
        }
        Ok(mask)
    }

    /// Builds a mask from every grid position where `f(row, col)` holds.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut pixels = BTreeSet::new();
        for r in 0..height {
            for c in 0..width {
                if f(r, c) {
                    pixels.insert((r, c));
                }
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn insert(&mut self, (row, col): Pixel) -> Result<bool, ExamError> {
        if row >= self.height || col >= self.width {
            return Err(ExamError::PixelOutOfBounds {
                row,
                col,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.pixels.insert((row, col)))
    }

    pub fn remove(&mut self, p: Pixel) -> bool {
        self.pixels.remove(&p)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &BTreeSet<Pixel> {
        &self.pixels
    }

    pub fn contains(&self, p: Pixel) -> bool {
        self.pixels.contains(&p)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Mirror about the vertical image axis (`col -> width - 1 - col`).
    pub fn flip_horizontal(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self
                .pixels
                .iter()
                .map(|&(r, c)| (r, self.width - 1 - c))
                .collect(),
        }
    }

    /// Shifts every pixel; `None` if any pixel would leave the grid.
    pub fn translate(&self, d_row: isize, d_col: isize) -> Option<Self> {
        let mut pixels = BTreeSet::new();
        for &(r, c) in &self.pixels {
            let nr = r.checked_add_signed(d_row)?;
            let nc = c.checked_add_signed(d_col)?;
            if nr >= self.height || nc >= self.width {
                return None;
            }
            pixels.insert((nr, nc));
        }
        Some(Self {
            width: self.width,
            height: self.height,
            pixels,
        })
    }

    fn in_bounds(&self) -> bool {
        self.pixels
            .iter()
            .all(|&(r, c)| r < self.height && c < self.width)
    }
}

/// Segmentation output for one frame. At least one mask is present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSegmentation {
    pub width: usize,
    pub height: usize,
    pub thalamus: Option<BinaryMask>,
    pub csp: Option<BinaryMask>,
}

impl FrameSegmentation {
    pub fn flip_horizontal(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            thalamus: self.thalamus.as_ref().map(BinaryMask::flip_horizontal),
            csp: self.csp.as_ref().map(BinaryMask::flip_horizontal),
        }
    }

    pub fn translate(&self, d_row: isize, d_col: isize) -> Option<Self> {
        let shift = |m: &Option<BinaryMask>| match m {
            Some(m) => m.translate(d_row, d_col).map(Some),
            None => Some(None),
        };
        Some(Self {
            width: self.width,
            height: self.height,
            thalamus: shift(&self.thalamus)?,
            csp: shift(&self.csp)?,
        })
    }
}

/// Derived data for one blind-sweep video.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub sweep_id: String,
    pub n_frames: usize,
    /// Head probability per frame, zero-based frame index.
    pub trace: Vec<f64>,
    pub segmentations: BTreeMap<usize, FrameSegmentation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exam {
    pub exam_id: String,
    pub sweeps: Vec<Sweep>,
}

/// One broken invariant, located by sweep and optionally frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub sweep_id: Option<String>,
    pub frame: Option<usize>,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.sweep_id, self.frame) {
            (Some(s), Some(t)) => write!(f, "sweep {s} frame {t}: {}", self.rule),
            (Some(s), None) => write!(f, "sweep {s}: {}", self.rule),
            _ => write!(f, "exam: {}", self.rule),
        }
    }
}

/// Checks every data-model invariant and reports each violation; never fails.
pub fn validate_exam(exam: &Exam) -> Vec<Violation> {
    let mut out = Vec::new();
    let v = |sweep: Option<&str>, frame: Option<usize>, rule: String| Violation {
        sweep_id: sweep.map(str::to_owned),
        frame,
        rule,
    };
    if exam.sweeps.is_empty() {
        out.push(v(None, None, "exam has no sweeps".into()));
    }
    let mut seen = HashSet::new();
    for sweep in &exam.sweeps {
        let id = sweep.sweep_id.as_str();
        if !seen.insert(id) {
            out.push(v(Some(id), None, "duplicate sweep id".into()));
        }
        if sweep.n_frames == 0 {
            out.push(v(Some(id), None, "n_frames must be positive".into()));
        }
        if sweep.trace.len() != sweep.n_frames {
            out.push(v(
                Some(id),
                None,
                format!(
                    "trace length {} does not match n_frames {}",
                    sweep.trace.len(),
                    sweep.n_frames
                ),
            ));
        }
        for (t, &p) in sweep.trace.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                out.push(v(
                    Some(id),
                    Some(t),
                    format!("probability out of range: {p}"),
                ));
            }
        }
        for (&t, seg) in &sweep.segmentations {
            if t >= sweep.n_frames {
                out.push(v(
                    Some(id),
                    Some(t),
                    format!("segmentation frame outside [0, {})", sweep.n_frames),
                ));
            }
            if seg.thalamus.is_none() && seg.csp.is_none() {
                out.push(v(Some(id), Some(t), "segmentation has no masks".into()));
            }
            for (name, mask) in [("thalamus", &seg.thalamus), ("csp", &seg.csp)] {
                if let Some(m) = mask {
                    if m.width != seg.width || m.height != seg.height {
                        out.push(v(
                            Some(id),
                            Some(t),
                            format!(
                                "{name} mask is {}x{}, frame is {}x{}",
                                m.width, m.height, seg.width, seg.height
                            ),
                        ));
                    }
                    if !m.in_bounds() {
                        out.push(v(Some(id), Some(t), format!("{name} pixel out of bounds")));
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub exam_id: String,
    pub sweeps: Vec<ManifestSweep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestSweep {
    pub sweep_id: String,
    pub n_frames: usize,
    pub trace_file: String,
    pub masks_dir: String,
}

pub fn mask_file_name(frame: usize) -> String {
    format!("frame_{frame:04}.png")
}

fn parse_mask_file_name(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("frame_")?.strip_suffix(".png")?;
    if digits.len() < 4 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Loads and fully validates an exam bundle directory.
pub fn load_exam(dir: impl AsRef<Path>) -> Result<Exam, ExamError> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        let e = io::Error::new(io::ErrorKind::NotFound, "not a directory");
        return Err(ExamError::io(dir, e));
    }
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = match fs::read_to_string(&manifest_path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Err(ExamError::Manifest {
                path: manifest_path,
                message: "missing".into(),
            })
        }
        Err(e) => return Err(ExamError::io(&manifest_path, e)),
    };
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| ExamError::Manifest {
        path: manifest_path.clone(),
        message: e.to_string(),
    })?;

    let mut sweeps = Vec::with_capacity(manifest.sweeps.len());
    for entry in &manifest.sweeps {
        let trace = read_trace(&dir.join(&entry.trace_file))?;
        if trace.len() != entry.n_frames {
            return Err(ExamError::TraceLength {
                sweep_id: entry.sweep_id.clone(),
                expected: entry.n_frames,
                actual: trace.len(),
            });
        }
        if let Some((frame, &value)) = trace
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || !(0.0..=1.0).contains(*p))
        {
            return Err(ExamError::ProbabilityOutOfRange {
                sweep_id: entry.sweep_id.clone(),
                frame,
                value,
            });
        }
        let segmentations = read_masks(&dir.join(&entry.masks_dir), entry.n_frames)?;
        sweeps.push(Sweep {
            sweep_id: entry.sweep_id.clone(),
            n_frames: entry.n_frames,
            trace,
            segmentations,
        });
    }

    let exam = Exam {
        exam_id: manifest.exam_id,
        sweeps,
    };
    let violations = validate_exam(&exam);
    if violations.is_empty() {
        Ok(exam)
    } else {
        Err(ExamError::Invalid(violations))
    }
}

fn read_trace(path: &Path) -> Result<Vec<f64>, ExamError> {
    let err = |message: String| ExamError::Trace {
        path: path.to_path_buf(),
        message,
    };
    let file = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(err("missing".into())),
        Err(e) => return Err(ExamError::io(path, e)),
    };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader.headers().map_err(|e| err(e.to_string()))?;
    if headers.iter().map(str::trim).ne(TRACE_HEADER) {
        return Err(err(format!(
            "expected header `frame,probability`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut trace = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| err(e.to_string()))?;
        if record.len() != 2 {
            return Err(err(format!("row {i}: expected 2 fields")));
        }
        let frame: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| err(format!("row {i}: bad frame `{}`", &record[0])))?;
        if frame != i {
            return Err(err(format!("row {i}: frame {frame} out of sequence")));
        }
        let p: f64 = record[1]
            .trim()
            .parse()
            .map_err(|_| err(format!("row {i}: bad probability `{}`", &record[1])))?;
        trace.push(p);
    }
    Ok(trace)
}

fn read_masks(
    dir: &Path,
    n_frames: usize,
) -> Result<BTreeMap<usize, FrameSegmentation>, ExamError> {
    let mut out = BTreeMap::new();
    let entries = match fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(ExamError::io(dir, e)),
    };
    let mut frames = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| ExamError::io(dir, e))?;
        let name = entry.file_name();
        if let Some(frame) = name.to_str().and_then(parse_mask_file_name) {
            frames.push((frame, entry.path()));
        }
    }
    frames.sort();
    for (frame, path) in frames {
        if frame >= n_frames {
            return Err(ExamError::Mask {
                path,
                message: format!("frame {frame} outside [0, {n_frames})"),
            });
        }
        if let Some(seg) = read_label_png(&path)? {
            out.insert(frame, seg);
        }
    }
    Ok(out)
}

/// Decodes one label image; an all-background image carries no segmentation.
pub fn read_label_png(path: &Path) -> Result<Option<FrameSegmentation>, ExamError> {
    let mask_err = |message: String| ExamError::Mask {
        path: path.to_path_buf(),
        message,
    };
    let file = fs::File::open(path).map_err(|e| ExamError::io(path, e))?;
    let decoder = png::Decoder::new(io::BufReader::new(file));
    let mut reader = decoder.read_info().map_err(|e| mask_err(e.to_string()))?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
        return Err(mask_err(format!(
            "expected 8-bit grayscale, found {:?} {:?}",
            info.color_type, info.bit_depth
        )));
    }
    let (width, height) = (info.width as usize, info.height as usize);
    let mut buf = vec![0; reader.output_buffer_size()];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| mask_err(e.to_string()))?;
    let stride = frame.line_size;

    let mut thalamus = BinaryMask::new(width, height);
    let mut csp = BinaryMask::new(width, height);
    for r in 0..height {
        for (c, &v) in buf[r * stride..r * stride + width].iter().enumerate() {
            match v {
                LABEL_BACKGROUND => {}
                LABEL_THALAMUS => {
                    thalamus.pixels.insert((r, c));
                }
                LABEL_CSP => {
                    csp.pixels.insert((r, c));
                }
                other => {
                    return Err(mask_err(format!(
                        "pixel ({r}, {c}) has label {other}, expected 0, 1 or 2"
                    )))
                }
            }
        }
    }
    if thalamus.is_empty() && csp.is_empty() {
        return Ok(None);
    }
    Ok(Some(FrameSegmentation {
        width,
        height,
        thalamus: (!thalamus.is_empty()).then_some(thalamus),
        csp: (!csp.is_empty()).then_some(csp),
    }))
}

/// Encodes the masks of one frame as a single label image.
pub fn write_label_png(path: &Path, seg: &FrameSegmentation) -> Result<(), ExamError> {
    let mask_err = |message: String| ExamError::Mask {
        path: path.to_path_buf(),
        message,
    };
    let mut data = vec![LABEL_BACKGROUND; seg.width * seg.height];
    for (mask, label) in [(&seg.thalamus, LABEL_THALAMUS), (&seg.csp, LABEL_CSP)] {
        let Some(mask) = mask else { continue };
        if mask.width != seg.width || mask.height != seg.height {
            return Err(mask_err("mask dimensions differ from frame".into()));
        }
        for &(r, c) in &mask.pixels {
            let cell = &mut data[r * seg.width + c];
            if *cell != LABEL_BACKGROUND {
                return Err(mask_err(format!("thalamus and CSP overlap at ({r}, {c})")));
            }
            *cell = label;
        }
    }
    let file = fs::File::create(path).map_err(|e| ExamError::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), seg.width as u32, seg.height as u32);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(|e| mask_err(e.to_string()))?;
    writer
        .write_image_data(&data)
        .map_err(|e| mask_err(e.to_string()))?;
    writer.finish().map_err(|e| mask_err(e.to_string()))
}

/// Writes `exam` as a bundle under `dir` (created if missing). Each sweep
/// gets `<sweep_id>/trace.csv` and `<sweep_id>/masks/`.
pub fn write_exam(exam: &Exam, dir: impl AsRef<Path>) -> Result<(), ExamError> {
    let dir = dir.as_ref();
    let violations = validate_exam(exam);
    if !violations.is_empty() {
        return Err(ExamError::Invalid(violations));
    }
    fs::create_dir_all(dir).map_err(|e| ExamError::io(dir, e))?;

    let mut manifest = Manifest {
        exam_id: exam.exam_id.clone(),
        sweeps: Vec::new(),
    };
    for sweep in &exam.sweeps {
        let trace_file = format!("{}/trace.csv", sweep.sweep_id);
        let masks_dir = format!("{}/masks", sweep.sweep_id);
        let masks_path = dir.join(&masks_dir);
        fs::create_dir_all(&masks_path).map_err(|e| ExamError::io(&masks_path, e))?;

        let trace_path = dir.join(&trace_file);
        let mut w = csv::Writer::from_path(&trace_path).map_err(|e| ExamError::Trace {
            path: trace_path.clone(),
            message: e.to_string(),
        })?;
        let csv_err = |e: csv::Error| ExamError::Trace {
            path: trace_path.clone(),
            message: e.to_string(),
        };
        w.write_record(TRACE_HEADER).map_err(csv_err)?;
        for (t, p) in sweep.trace.iter().enumerate() {
            // `Display` for f64 is the shortest text that parses back bit-exactly.
            w.write_record([t.to_string(), p.to_string()])
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| ExamError::io(&trace_path, e))?;

        for (&t, seg) in &sweep.segmentations {
            write_label_png(&masks_path.join(mask_file_name(t)), seg)?;
        }
        manifest.sweeps.push(ManifestSweep {
            sweep_id: sweep.sweep_id.clone(),
            n_frames: sweep.n_frames,
            trace_file,
            masks_dir,
        });
    }

    let manifest_path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&manifest_path, text).map_err(|e| ExamError::io(&manifest_path, e))
}

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use fetalorient_core::presentation::PresentationAbstain;
use fetalorient_core::synth::{make_exam, read_ground_truth};
use fetalorient_core::{
    load_exam, validate_exam, ExamPresentation, ExamReport, LieLabel, Presentation,
    QualityCriteria, Side, SynthConfig,
};

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn generated_bundle_loads_without_violations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig::new(Presentation::Cephalic, Side::Left, 42);
    let truth = make_exam(&cfg, dir.path()).unwrap();
    assert_eq!(read_ground_truth(dir.path()).unwrap(), truth);
    let exam = load_exam(dir.path()).unwrap();
    assert!(validate_exam(&exam).is_empty());
    assert_eq!(exam.sweeps.len(), 5);
    assert!(exam.sweeps.iter().all(|s| !s.segmentations.is_empty()));
}

#[test]
fn same_seed_gives_identical_bundles() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = SynthConfig::new(Presentation::Breech, Side::Right, 7);
    cfg.trace_noise_sigma = 0.1;
    cfg.mask_jitter_px = 1.0;
    make_exam(&cfg, a.path()).unwrap();
    make_exam(&cfg, b.path()).unwrap();
    let ta = read_tree(a.path());
    assert!(ta.len() > 3);
    assert_eq!(ta, read_tree(b.path()));
}

#[test]
fn pipeline_recovers_all_four_orientations() {
    for presentation in [Presentation::Cephalic, Presentation::Breech] {
        for lie in [Side::Left, Side::Right] {
            let dir = tempfile::tempdir().unwrap();
            let cfg = SynthConfig::new(presentation, lie, 3);
            make_exam(&cfg, dir.path()).unwrap();
            let exam = load_exam(dir.path()).unwrap();
            let report = ExamReport::classify(&exam, &QualityCriteria::default());
            let want_p = match presentation {
                Presentation::Cephalic => ExamPresentation::Cephalic,
                Presentation::Breech => ExamPresentation::Breech,
            };
            let want_l = match lie {
                Side::Left => LieLabel::Left,
                Side::Right => LieLabel::Right,
            };
            assert_eq!(report.presentation.label, want_p);
            assert_eq!(report.lie.label, want_l);
            assert!(report.lie.abstained_frames.is_empty());
        }
    }
}

#[test]
fn no_head_sweeps_abstain_downstream() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SynthConfig::new(Presentation::Cephalic, Side::Left, 1);
    cfg.head_sweep_indices.clear();
    make_exam(&cfg, dir.path()).unwrap();
    let exam = load_exam(dir.path()).unwrap();
    let report = ExamReport::classify(&exam, &QualityCriteria::default());
    assert_eq!(report.presentation.label, ExamPresentation::Abstain);
    assert_eq!(report.presentation.abstain_reason, Some(PresentationAbstain::NoHeadDetected));
    assert_eq!(report.lie.label, LieLabel::Abstain);
}

#[test]
fn report_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig::new(Presentation::Breech, Side::Left, 11);
    make_exam(&cfg, dir.path()).unwrap();
    let exam = load_exam(dir.path()).unwrap();
    let report = ExamReport::classify(&exam, &QualityCriteria::default());
    let text = report.to_json();
    let parsed = ExamReport::from_json(&text).unwrap();
    assert_eq!(parsed, report);
    assert_eq!(parsed.to_json(), text);
}

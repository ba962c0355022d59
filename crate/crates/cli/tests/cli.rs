use std::path::Path;
use std::process::{Command, Output};

use fetalorient_core::{load_exam, write_exam, BinaryMask};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fetalorient"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn synth(dir: &Path, presentation: &str, lie: &str, seed: &str) {
    let out = bin(&[
        "synth", "--out", dir.to_str().unwrap(), "--presentation", presentation, "--lie", lie,
        "--seed", seed,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

fn report(dir: &Path, extra: &[&str]) -> serde_json::Value {
    let mut args = vec!["classify", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = bin(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn count(doc: &roxmltree::Document, tag: &str) -> usize {
    doc.descendants().filter(|n| n.has_tag_name(tag)).count()
}

fn by_id<'a>(doc: &'a roxmltree::Document, id: &str) -> Option<roxmltree::Node<'a, 'a>> {
    doc.descendants().find(|n| n.attribute("id") == Some(id))
}

#[test]
fn classify_synthetic_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("exam");
    synth(&dir, "cephalic", "left", "42");
    let v = report(&dir, &[]);
    assert_eq!(v["presentation"]["label"], "cephalic");
    assert_eq!(v["lie"]["label"], "left");
    assert_eq!(v["lie"]["frames"][0]["method"], "dual");
    assert_eq!(v["criteria"]["min_pixels"], 55);
    let flipped = report(&dir, &["--flip-lateral"]);
    assert_eq!(flipped["lie"]["label"], "right");
}

#[test]
fn classify_writes_out_file() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("exam");
    synth(&dir, "breech", "right", "7");
    let out = tmp.path().join("report.json");
    let o = bin(&["classify", dir.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["presentation"]["label"], "breech");
    assert_eq!(v["lie"]["label"], "right");
}

#[test]
fn high_tau_abstains_presentation() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("exam");
    synth(&dir, "cephalic", "right", "1");
    let v = report(&dir, &["--tau", "0.99"]);
    assert_eq!(v["presentation"]["label"], "abstain");
    assert_eq!(v["presentation"]["abstain_reason"], "no_head_detected");
}

#[test]
fn criteria_flags_reach_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("exam");
    synth(&dir, "cephalic", "right", "1");
    let v = report(&dir, &["--min-pixels", "60", "--min-solidity", "0.9", "--min-midpoint-dist", "2.5", "--jobs", "1"]);
    assert_eq!(v["criteria"]["min_pixels"], 60);
    assert_eq!(v["criteria"]["min_solidity"], 0.9);
    assert_eq!(v["criteria"]["min_midpoint_distance"], 2.5);
}

#[test]
fn bundle_without_masks_abstains_lie() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("exam");
    let out = bin(&[
        "synth", "--out", dir.to_str().unwrap(), "--presentation", "cephalic", "--lie", "left",
        "--head-sweeps", "",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&dir, &[]);
    assert_eq!(v["lie"]["label"], "abstain");
    assert_eq!(v["lie"]["abstain_reason"], "no_segmented_frames");
    assert_eq!(v["presentation"]["abstain_reason"], "no_head_detected");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(bin(&[]).status.code(), Some(64));
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
    assert_eq!(bin(&["classify", "x", "--tau", "2"]).status.code(), Some(64));
    let missing = tmp.path().join("absent");
    assert_eq!(bin(&["classify", missing.to_str().unwrap()]).status.code(), Some(3));
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(bin(&["classify", empty.to_str().unwrap()]).status.code(), Some(2));
    let nf0 = bin(&[
        "synth", "--out", tmp.path().join("z").to_str().unwrap(), "--presentation", "breech",
        "--lie", "right", "--n-frames", "0",
    ]);
    assert_eq!(nf0.status.code(), Some(64));
    let geometry = bin(&[
        "synth", "--out", tmp.path().join("g").to_str().unwrap(), "--presentation", "breech",
        "--lie", "right", "--height", "40", "--width", "40",
    ]);
    assert_eq!(geometry.status.code(), Some(64));
}

#[test]
fn synth_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    synth(&a, "breech", "right", "7");
    synth(&b, "breech", "right", "7");
    let gt = std::fs::read_to_string(a.join("ground_truth.json")).unwrap();
    let gt: serde_json::Value = serde_json::from_str(&gt).unwrap();
    assert_eq!(gt["presentation"], "breech");
    assert_eq!(gt["lie"], "right");
    for rel in ["manifest.json", "V1/trace.csv", "V3/masks/frame_0080.png"] {
        assert_eq!(std::fs::read(a.join(rel)).unwrap(), std::fs::read(b.join(rel)).unwrap(), "{rel}");
    }
}

#[test]
fn presentation_plot_structure() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("exam");
    synth(&dir, "cephalic", "left", "3");
    let svg = tmp.path().join("p.svg");
    let o = bin(&["plot-presentation", dir.to_str().unwrap(), "--sweep", "V2", "--out", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(count(&doc, "polyline"), 3);
    let legend: Vec<&str> = by_id(&doc, "legend")
        .unwrap()
        .descendants()
        .filter_map(|n| n.text())
        .collect();
    assert!(legend.contains(&"f_c") && legend.contains(&"f_b"));
    assert!(text.contains(">frame<") && text.contains(">probability<"));
    let unknown = bin(&["plot-presentation", dir.to_str().unwrap(), "--sweep", "V9", "--out", svg.to_str().unwrap()]);
    assert_eq!(unknown.status.code(), Some(64));
}

#[test]
fn lie_plot_structure() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("exam");
    synth(&dir, "cephalic", "right", "3");
    let svg = tmp.path().join("l.svg");
    let o = bin(&["plot-lie", dir.to_str().unwrap(), "--sweep", "V1", "--frame", "20", "--out", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(count(&doc, "marker"), 1);
    let masks = doc.descendants().filter(|n| n.has_tag_name("g") && n.attribute("class") == Some("mask")).count();
    assert_eq!(masks, 2);
    assert!(by_id(&doc, "geodesic-center").is_some());
    assert!(by_id(&doc, "facing").is_some());
    assert!(by_id(&doc, "midpoint").is_none());

    // Same frame without its CSP goes through the fallback.
    let mut exam = load_exam(&dir).unwrap();
    exam.sweeps[0].segmentations.get_mut(&20).unwrap().csp = None;
    let fb_dir = tmp.path().join("fallback");
    write_exam(&exam, &fb_dir).unwrap();
    let o = bin(&["plot-lie", fb_dir.to_str().unwrap(), "--sweep", "V1", "--frame", "20", "--out", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(count(&doc, "marker"), 1);
    let endpoints = doc.descendants().filter(|n| n.attribute("class") == Some("endpoint")).count();
    assert_eq!(endpoints, 2);
    assert!(by_id(&doc, "midpoint").is_some());
}

#[test]
fn abstained_frame_names_failed_criteria() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("exam");
    synth(&dir, "cephalic", "right", "3");
    let mut exam = load_exam(&dir).unwrap();
    let seg = exam.sweeps[0].segmentations.get_mut(&20).unwrap();
    seg.csp = None;
    seg.thalamus = Some(BinaryMask::from_fn(seg.width, seg.height, |r, c| (10..15).contains(&r) && (10..18).contains(&c)));
    let bad = tmp.path().join("bad");
    write_exam(&exam, &bad).unwrap();
    let svg = tmp.path().join("l.svg");
    let o = bin(&["plot-lie", bad.to_str().unwrap(), "--sweep", "V1", "--frame", "20", "--out", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("min_pixels"), "{err}");
    assert!(!svg.exists());
    let absent = bin(&["plot-lie", bad.to_str().unwrap(), "--sweep", "V1", "--frame", "0", "--out", svg.to_str().unwrap()]);
    assert_eq!(absent.status.code(), Some(64));
}

//! SVG renderings of a sweep's presentation evidence and a frame's lie
//! estimate.

use std::fmt::Write;

use fetalorient_core::lie::{FrameAnalysis, FrameEstimate, LieMethod};
use fetalorient_core::presentation::{template_breech, template_cephalic};
use fetalorient_core::{BinaryMask, FrameSegmentation, Pixel, Sweep, SweepPresentation};

const PLOT_W: f64 = 640.0;
const PLOT_H: f64 = 360.0;
const MARGIN: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn points(values: &[f64], x: impl Fn(usize) -> f64, y: impl Fn(f64) -> f64) -> String {
    let mut out = String::new();
    for (i, &v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{:.2},{:.2}", x(i), y(v)).unwrap();
    }
    out
}

/// Trace plus both templates on shared frame/probability axes. The trace
/// must be non-empty.
pub fn presentation_svg(sweep: &Sweep, result: &SweepPresentation) -> String {
    let n = sweep.trace.len();
    let fc = template_cephalic(n).expect("non-empty trace");
    let fb = template_breech(n).expect("non-empty trace");
    let inner_w = PLOT_W - 2.0 * MARGIN;
    let inner_h = PLOT_H - 2.0 * MARGIN;
    let span = (n.max(2) - 1) as f64;
    let x = |i: usize| MARGIN + inner_w * i as f64 / span;
    let y = |v: f64| PLOT_H - MARGIN - inner_h * v.clamp(0.0, 1.0);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PLOT_W}" height="{PLOT_H}" viewBox="0 0 {PLOT_W} {PLOT_H}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">sweep {}: {:?} (sim_c {:.4}, sim_b {:.4})</text>"#,
        PLOT_W / 2.0,
        escape(&sweep.sweep_id),
        result.label,
        result.sim_cephalic,
        result.sim_breech
    )
    .unwrap();
    let (x0, x1, y0, y1) = (MARGIN, PLOT_W - MARGIN, PLOT_H - MARGIN, MARGIN);
    writeln!(s, r#"<g id="axes" stroke="black">"#).unwrap();
    writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#).unwrap();
    writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#).unwrap();
    writeln!(s, "</g>").unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">frame</text>"#,
        PLOT_W / 2.0,
        PLOT_H - 15.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 15 {})">probability</text>"#,
        PLOT_H / 2.0,
        PLOT_H / 2.0
    )
    .unwrap();
    for (label, v) in [("0", 0.0), ("1", 1.0)] {
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="end" font-size="10">{label}</text>"#, x0 - 5.0, y(v) + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{x0}" y="{}" text-anchor="middle" font-size="10">0</text>"#, y0 + 14.0).unwrap();
    writeln!(s, r#"<text x="{x1}" y="{}" text-anchor="middle" font-size="10">{}</text>"#, y0 + 14.0, n - 1).unwrap();

    let series = [
        ("trace", "black", &sweep.trace[..]),
        ("f_c", "steelblue", &fc[..]),
        ("f_b", "firebrick", &fb[..]),
    ];
    for (id, color, values) in series {
        writeln!(
            s,
            r#"<polyline id="{id}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points(values, x, y)
        )
        .unwrap();
    }
    writeln!(s, r#"<g id="legend" font-size="12">"#).unwrap();
    for (k, (id, color, _)) in series.iter().enumerate() {
        let ly = MARGIN + 15.0 * k as f64;
        let lx = PLOT_W - MARGIN - 80.0;
        writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{id}</text>"#, lx + 25.0, ly + 4.0).unwrap();
    }
    writeln!(s, "</g>").unwrap();
    s.push_str("</svg>\n");
    s
}

/// Horizontal runs of mask pixels as rects.
fn mask_rects(out: &mut String, pixels: impl IntoIterator<Item = Pixel>, scale: f64) {
    let mut run: Option<(usize, usize, usize)> = None;
    let flush = |out: &mut String, (r, c0, c1): (usize, usize, usize)| {
        writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
            c0 as f64 * scale,
            r as f64 * scale,
            (c1 - c0 + 1) as f64 * scale,
            scale
        )
        .unwrap();
    };
    for (r, c) in pixels {
        run = match run {
            Some((rr, c0, c1)) if rr == r && c1 + 1 == c => Some((rr, c0, c)),
            Some(prev) => {
                flush(out, prev);
                Some((r, c, c))
            }
            None => Some((r, c, c)),
        };
    }
    if let Some(prev) = run {
        flush(out, prev);
    }
}

fn mask_group(out: &mut String, id: &str, fill: &str, mask: &BinaryMask, scale: f64) {
    writeln!(out, r#"<g id="{id}" class="mask" fill="{fill}" fill-opacity="0.6">"#).unwrap();
    mask_rects(out, mask.pixels().iter().copied(), scale);
    writeln!(out, "</g>").unwrap();
}

/// Masks, skeleton, landmarks and the facing arrow for one estimated frame.
pub fn lie_svg(seg: &FrameSegmentation, analysis: &FrameAnalysis, estimate: &FrameEstimate) -> String {
    let scale = (640.0 / seg.width.max(seg.height) as f64).max(1.0);
    let (w, h) = (seg.width as f64 * scale, seg.height as f64 * scale);
    let at = |p: (f64, f64)| ((p.1 + 0.5) * scale, (p.0 + 0.5) * scale);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    )
    .unwrap();
    s.push_str(
        "<defs><marker id=\"arrowhead\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" \
         markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\">\
         <path d=\"M0,0 L10,5 L0,10 z\" fill=\"gold\"/></marker></defs>\n",
    );
    writeln!(s, r#"<rect width="100%" height="100%" fill="black"/>"#).unwrap();
    if let Some(m) = &seg.thalamus {
        mask_group(&mut s, "thalamus", "tomato", m, scale);
    }
    if let Some(m) = &seg.csp {
        mask_group(&mut s, "csp", "deepskyblue", m, scale);
    }
    let geometry = analysis.thalamus.as_ref().expect("estimated frame has a thalamus");
    writeln!(s, r#"<g id="skeleton" fill="white">"#).unwrap();
    mask_rects(&mut s, geometry.skeleton.pixels().iter().copied(), scale);
    writeln!(s, "</g>").unwrap();

    let g = geometry.center.pixel;
    let (gx, gy) = at((g.0 as f64, g.1 as f64));
    let r = (2.5 * scale).max(3.0);
    writeln!(s, r#"<circle id="geodesic-center" cx="{gx:.2}" cy="{gy:.2}" r="{r:.2}" fill="lime"/>"#).unwrap();
    match estimate.method {
        LieMethod::DualLandmark => {
            if let Some(c) = analysis.csp_centroid {
                let (cx, cy) = at(c);
                writeln!(s, r#"<circle id="csp-centroid" cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="cyan"/>"#).unwrap();
            }
        }
        LieMethod::ThalamusOnly => {
            writeln!(s, r#"<g id="endpoints" fill="magenta">"#).unwrap();
            for &(er, ec) in &geometry.endpoints {
                let (ex, ey) = at((er as f64, ec as f64));
                writeln!(s, r#"<circle class="endpoint" cx="{ex:.2}" cy="{ey:.2}" r="{r:.2}"/>"#).unwrap();
            }
            writeln!(s, "</g>").unwrap();
            if let [a, b] = geometry.endpoints[..] {
                let (ax, ay) = at((a.0 as f64, a.1 as f64));
                let (bx, by) = at((b.0 as f64, b.1 as f64));
                writeln!(
                    s,
                    r#"<line id="chord" x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}" stroke="magenta" stroke-dasharray="4 3"/>"#
                )
                .unwrap();
            }
            if let Some(m) = geometry.midpoint {
                let (mx, my) = at(m);
                writeln!(s, r#"<circle id="midpoint" cx="{mx:.2}" cy="{my:.2}" r="{r:.2}" fill="orange"/>"#).unwrap();
            }
        }
    }
    let len = 0.15 * seg.width.max(seg.height) as f64 * scale;
    let v = estimate.vector;
    writeln!(
        s,
        r#"<line id="facing" x1="{gx:.2}" y1="{gy:.2}" x2="{:.2}" y2="{:.2}" stroke="gold" stroke-width="{:.2}" marker-end="url(#arrowhead)"/>"#,
        gx + v.d_col * len,
        gy + v.d_row * len,
        (0.8 * scale).max(2.0)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="8" y="20" fill="white" font-size="14">{:?} {:?} ({:.3}, {:.3})</text>"#,
        estimate.method, estimate.bin, v.d_row, v.d_col
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}

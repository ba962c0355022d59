//! Brute-force reference implementations used to check the morphology
//! module. Nothing here shares code with it.

use std::collections::{BTreeSet, HashMap};

use crate::sweep_model::Pixel;

fn adjacent(a: Pixel, b: Pixel) -> bool {
    a != b && a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1
}

/// Geodesic center by Floyd–Warshall over the 8-adjacency graph. Returns the
/// center and its distance sum, or `None` if empty or disconnected.
pub fn oracle_geodesic_center(pixels: &BTreeSet<Pixel>) -> Option<(Pixel, u64)> {
    let nodes: Vec<Pixel> = pixels.iter().copied().collect();
    let n = nodes.len();
    if n == 0 {
        return None;
    }
    const INF: u64 = u64::MAX / 4;
    let mut d = vec![INF; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                d[i * n + j] = 0;
            } else if adjacent(nodes[i], nodes[j]) {
                d[i * n + j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik == INF {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    let mut best: Option<(Pixel, u64)> = None;
    for i in 0..n {
        let row = &d[i * n..(i + 1) * n];
        if row.iter().any(|&x| x == INF) {
            return None;
        }
        let sum: u64 = row.iter().sum();
        let better = match best {
            None => true,
            Some((p, s)) => sum < s || (sum == s && nodes[i] < p),
        };
        if better {
            best = Some((nodes[i], sum));
        }
    }
    best
}

fn orient(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> i64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// Gift-wrapping hull; keeps only strict turning points.
fn jarvis_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let start = *points.iter().min().unwrap();
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut candidate = if points[0] == current { points[1] } else { points[0] };
        for &p in points {
            if p == current {
                continue;
            }
            let o = orient(current, candidate, p);
            let farther = {
                let dc = (candidate.0 - current.0).pow(2) + (candidate.1 - current.1).pow(2);
                let dp = (p.0 - current.0).pow(2) + (p.1 - current.1).pow(2);
                dp > dc
            };
            if o < 0 || (o == 0 && farther) {
                candidate = p;
            }
        }
        if candidate == start {
            break;
        }
        hull.push(candidate);
        current = candidate;
        if hull.len() > points.len() {
            break;
        }
    }
    hull
}

fn on_segment(a: (i64, i64), b: (i64, i64), p: (i64, i64)) -> bool {
    orient(a, b, p) == 0
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

/// Crossing-number point-in-polygon with explicit boundary check.
fn inside_or_on(poly: &[(i64, i64)], p: (i64, i64)) -> bool {
    let n = poly.len();
    for i in 0..n {
        if on_segment(poly[i], poly[(i + 1) % n], p) {
            return true;
        }
    }
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.0 > p.0) != (b.0 > p.0) {
            // Column where the edge crosses row p.0, compared exactly.
            let lhs = (p.1 - a.1) * (b.0 - a.0);
            let rhs = (b.1 - a.1) * (p.0 - a.0);
            let crosses = if b.0 > a.0 { lhs < rhs } else { lhs > rhs };
            if crosses {
                inside = !inside;
            }
        }
    }
    inside
}

/// Counts every grid point of the bounding box that lies inside or on the
/// convex hull of `pixels`.
pub fn oracle_hull_pixel_count(pixels: &BTreeSet<Pixel>) -> usize {
    let pts: Vec<(i64, i64)> = pixels.iter().map(|&(r, c)| (r as i64, c as i64)).collect();
    if pts.is_empty() {
        return 0;
    }
    let rmin = pts.iter().map(|p| p.0).min().unwrap();
    let rmax = pts.iter().map(|p| p.0).max().unwrap();
    let cmin = pts.iter().map(|p| p.1).min().unwrap();
    let cmax = pts.iter().map(|p| p.1).max().unwrap();
    if pts.len() == 1 {
        return 1;
    }
    let hull = jarvis_hull(&pts);
    let mut count = 0;
    for r in rmin..=rmax {
        for c in cmin..=cmax {
            let hit = match hull.len() {
                1 => (r, c) == hull[0],
                2 => on_segment(hull[0], hull[1], (r, c)),
                _ => inside_or_on(&hull, (r, c)),
            };
            if hit {
                count += 1;
            }
        }
    }
    count
}

/// Skeleton pixels with exactly one 8-neighbor, by direct counting.
pub fn oracle_endpoints(pixels: &BTreeSet<Pixel>) -> Vec<Pixel> {
    let mut degree: HashMap<Pixel, usize> = HashMap::new();
    for &a in pixels {
        for &b in pixels {
            if adjacent(a, b) {
                *degree.entry(a).or_default() += 1;
            }
        }
    }
    pixels
        .iter()
        .copied()
        .filter(|p| degree.get(p) == Some(&1))
        .collect()
}

//! Binary-mask geometry: 8-connected components, centroid, convex-hull
//! solidity, topology-preserving thinning, skeleton endpoints and the
//! geodesic center of a skeleton.
//!
//! All adjacency is 8-connectivity. Graph distances are unweighted hop
//! counts, so a diagonal step costs the same as an axial one.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::sweep_model::{BinaryMask, Pixel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphError {
    #[error("empty pixel set")]
    Empty,
    #[error("skeleton is not connected ({components} components)")]
    Disconnected { components: usize },
}

/// Offsets of the 8 neighbors, clockwise from north.
const NEIGHBORS8: [(isize, isize); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

fn neighbors8((r, c): Pixel) -> impl Iterator<Item = Pixel> {
    NEIGHBORS8.iter().filter_map(move |&(dr, dc)| {
        Some((r.checked_add_signed(dr)?, c.checked_add_signed(dc)?))
    })
}

/// A maximal 8-connected set of foreground pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pixels: BTreeSet<Pixel>,
}

impl Component {
    /// Wraps a pixel set without checking connectivity; intended for callers
    /// that already hold a connected set.
    pub fn from_pixels(pixels: impl IntoIterator<Item = Pixel>) -> Self {
        Self {
            pixels: pixels.into_iter().collect(),
        }
    }

    pub fn pixels(&self) -> &BTreeSet<Pixel> {
        &self.pixels
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn to_mask(&self, width: usize, height: usize) -> BinaryMask {
        BinaryMask::from_pixels(width, height, self.pixels.iter().copied())
            .expect("component pixels lie inside the source mask")
    }
}

fn components_of(pixels: &BTreeSet<Pixel>) -> Vec<BTreeSet<Pixel>> {
    let mut remaining = pixels.clone();
    let mut out = Vec::new();
    while let Some(&seed) = remaining.iter().next() {
        remaining.remove(&seed);
        let mut comp = BTreeSet::from([seed]);
        let mut queue = VecDeque::from([seed]);
        while let Some(p) = queue.pop_front() {
            for q in neighbors8(p) {
                if remaining.remove(&q) {
                    comp.insert(q);
                    queue.push_back(q);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Partitions the foreground into 8-connected components, largest first;
/// equal sizes are ordered by their lexicographically smallest pixel.
pub fn connected_components(mask: &BinaryMask) -> Vec<Component> {
    let mut comps: Vec<Component> = components_of(mask.pixels())
        .into_iter()
        .map(|pixels| Component { pixels })
        .collect();
    comps.sort_by(|a, b| {
        b.pixel_count()
            .cmp(&a.pixel_count())
            .then_with(|| a.pixels.first().cmp(&b.pixels.first()))
    });
    comps
}

/// The largest component, or `None` for an empty mask.
pub fn largest_component(mask: &BinaryMask) -> Option<Component> {
    connected_components(mask).into_iter().next()
}

/// Mean pixel coordinate as `(row, col)`.
pub fn centroid(component: &Component) -> Result<(f64, f64), MorphError> {
    if component.pixels.is_empty() {
        return Err(MorphError::Empty);
    }
    let n = component.pixels.len() as f64;
    let (sr, sc) = component
        .pixels
        .iter()
        .fold((0.0, 0.0), |(sr, sc), &(r, c)| (sr + r as f64, sc + c as f64));
    Ok((sr / n, sc / n))
}

type P = (i64, i64);

fn cross(o: P, a: P, b: P) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull of pixel centers by monotone chain, counter-clockwise in
/// `(row, col)` coordinates, collinear points dropped.
fn convex_hull(points: &BTreeSet<Pixel>) -> Vec<P> {
    let pts: Vec<P> = points.iter().map(|&(r, c)| (r as i64, c as i64)).collect();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<P> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<P> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Number of grid points inside or on the convex hull of `points`.
pub fn hull_pixel_count(points: &BTreeSet<Pixel>) -> usize {
    let hull = convex_hull(points);
    match hull.len() {
        0 => 0,
        1 => 1,
        2 => {
            let (a, b) = (hull[0], hull[1]);
            (gcd(b.0 - a.0, b.1 - a.1) + 1) as usize
        }
        _ => {
            let rmin = hull.iter().map(|p| p.0).min().unwrap();
            let rmax = hull.iter().map(|p| p.0).max().unwrap();
            let mut total = 0usize;
            for r in rmin..=rmax {
                let (mut lo, mut hi) = (i64::MIN, i64::MAX);
                for i in 0..hull.len() {
                    let a = hull[i];
                    let b = hull[(i + 1) % hull.len()];
                    // Inside-or-on: dr * (c - a.1) >= dc * (r - a.0).
                    let (dr, dc) = (b.0 - a.0, b.1 - a.1);
                    let rhs = dc * (r - a.0);
                    match dr.signum() {
                        1 => lo = lo.max(a.1 + div_ceil(rhs, dr)),
                        -1 => hi = hi.min(a.1 + div_floor(rhs, dr)),
                        _ => {
                            if rhs > 0 {
                                lo = i64::MAX;
                            }
                        }
                    }
                }
                if lo <= hi {
                    total += (hi - lo + 1) as usize;
                }
            }
            total
        }
    }
}

fn div_floor(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -div_floor(-a, b)
}

/// Pixel count over the count of grid points inside or on the convex hull
/// of the pixel centers.
pub fn solidity(component: &Component) -> Result<f64, MorphError> {
    if component.pixels.is_empty() {
        return Err(MorphError::Empty);
    }
    Ok(component.pixel_count() as f64 / hull_pixel_count(&component.pixels) as f64)
}

/// One-pixel-wide skeleton of a mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    pixels: BTreeSet<Pixel>,
    height: usize,
    width: usize,
}

impl Skeleton {
    pub fn from_pixels(height: usize, width: usize, pixels: impl IntoIterator<Item = Pixel>) -> Self {
        Self {
            pixels: pixels.into_iter().collect(),
            height,
            width,
        }
    }

    pub fn pixels(&self) -> &BTreeSet<Pixel> {
        &self.pixels
    }

    pub fn source_dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn to_mask(&self) -> BinaryMask {
        BinaryMask::from_pixels(self.width, self.height, self.pixels.iter().copied())
            .expect("skeleton pixels lie inside the source grid")
    }
}

/// Dense grid over the bounding box of a pixel set with a one-pixel
/// background border, so every foreground cell has 8 in-grid neighbors.
struct Grid {
    origin: (usize, usize),
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
}

impl Grid {
    fn new(pixels: &BTreeSet<Pixel>) -> Self {
        let rmin = pixels.iter().map(|p| p.0).min().unwrap_or(0);
        let rmax = pixels.iter().map(|p| p.0).max().unwrap_or(0);
        let cmin = pixels.iter().map(|p| p.1).min().unwrap_or(0);
        let cmax = pixels.iter().map(|p| p.1).max().unwrap_or(0);
        let rows = rmax - rmin + 3;
        let cols = cmax - cmin + 3;
        let mut grid = Self {
            origin: (rmin, cmin),
            rows,
            cols,
            cells: vec![false; rows * cols],
        };
        for &p in pixels {
            let i = grid.index(p);
            grid.cells[i] = true;
        }
        grid
    }

    fn index(&self, (r, c): Pixel) -> usize {
        (r + 1 - self.origin.0) * self.cols + (c + 1 - self.origin.1)
    }

    /// The 8 neighbors of cell `i`, clockwise from north.
    fn ring(&self, i: usize) -> [bool; 8] {
        let w = self.cols as isize;
        let mut out = [false; 8];
        for (k, &(dr, dc)) in NEIGHBORS8.iter().enumerate() {
            out[k] = self.cells[(i as isize + dr * w + dc) as usize];
        }
        out
    }
}

/// Yokoi connectivity number for 8-connected foreground. A border pixel is
/// simple (deletable without changing topology) exactly when this is 1.
fn yokoi8(ring: &[bool; 8]) -> u8 {
    // Ring index k maps onto Yokoi's x_{(k+2) mod 8}+1 ordering; the formula
    // only needs the cyclic order starting at an axial neighbor.
    let nb = |k: usize| !ring[k % 8] as u8;
    [0, 2, 4, 6]
        .iter()
        .map(|&k| nb(k) - nb(k) * nb(k + 1) * nb(k + 2))
        .sum()
}

/// Longest side branch, in pixels, that [`skeletonize`] prunes.
pub const MAX_SPUR_LEN: usize = 8;

/// Iterative thinning to a one-pixel-wide skeleton.
///
/// Zhang–Suen sub-iterations pick the deletion candidates against the state
/// at the start of each sub-iteration. Candidates are then removed one at a
/// time, and only while they are still simple points with at least two
/// neighbors in the current state. The re-check keeps components and holes
/// intact where parallel Zhang–Suen would erase them (2×2 blocks, two-pixel
/// diagonals).
///
/// Side branches of at most [`MAX_SPUR_LEN`] pixels are then pruned from
/// components with more than two endpoints, shortest first. Thinning and
/// pruning repeat until neither changes anything, so the result is a fixed
/// point of this function.
pub fn skeletonize(mask: &BinaryMask) -> Skeleton {
    let mut pixels = mask.pixels().clone();
    loop {
        let thinned = thin(&pixels);
        let pruned = prune_spurs(&thinned);
        if pruned == pixels {
            break;
        }
        pixels = pruned;
    }
    Skeleton {
        pixels,
        height: mask.height(),
        width: mask.width(),
    }
}

fn thin(pixels: &BTreeSet<Pixel>) -> BTreeSet<Pixel> {
    if pixels.is_empty() {
        return BTreeSet::new();
    }
    let mut grid = Grid::new(pixels);
    let mut alive: Vec<usize> = pixels.iter().map(|&p| grid.index(p)).collect();
    loop {
        let mut changed = false;
        for step in 0..2 {
            let candidates: Vec<usize> = alive
                .iter()
                .copied()
                .filter(|&i| zhang_suen_candidate(&grid.ring(i), step))
                .collect();
            for i in candidates {
                let ring = grid.ring(i);
                let count = ring.iter().filter(|&&b| b).count();
                if count >= 2 && yokoi8(&ring) == 1 {
                    grid.cells[i] = false;
                    changed = true;
                }
            }
            alive.retain(|&i| grid.cells[i]);
        }
        if !changed {
            break;
        }
    }
    // Zhang–Suen leaves staircase corners that are simple but have three
    // neighbors; drop them so every non-branch pixel has degree two.
    loop {
        let mut changed = false;
        for &i in &alive {
            let ring = grid.ring(i);
            if grid.cells[i] && ring.iter().filter(|&&b| b).count() >= 3 && yokoi8(&ring) == 1 {
                grid.cells[i] = false;
                changed = true;
            }
        }
        alive.retain(|&i| grid.cells[i]);
        if !changed {
            break;
        }
    }
    let (r0, c0) = grid.origin;
    alive
        .into_iter()
        .map(|i| (i / grid.cols + r0 - 1, i % grid.cols + c0 - 1))
        .collect()
}

fn neighbors_in(pixels: &BTreeSet<Pixel>, p: Pixel) -> BTreeSet<Pixel> {
    neighbors8(p).filter(|q| pixels.contains(q)).collect()
}

fn is_junction(pixels: &BTreeSet<Pixel>, p: Pixel) -> bool {
    neighbors_in(pixels, p).len() >= 3
}

/// Removes short side branches one at a time until none is left.
fn prune_spurs(pixels: &BTreeSet<Pixel>) -> BTreeSet<Pixel> {
    let mut pixels = pixels.clone();
    while let Some(spur) = shortest_spur(&pixels) {
        for p in spur {
            pixels.remove(&p);
        }
    }
    pixels
}

/// Background regions (4-connected) enclosed by `pixels`.
fn hole_count(pixels: &BTreeSet<Pixel>) -> usize {
    let grid = Grid::new(pixels);
    let mut seen = grid.cells.clone();
    let mut regions: usize = 0;
    for start in 0..seen.len() {
        if seen[start] {
            continue;
        }
        regions += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let (r, c) = (i / grid.cols, i % grid.cols);
            let mut visit = |j: usize| {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if r > 0 {
                visit(i - grid.cols);
            }
            if r + 1 < grid.rows {
                visit(i + grid.cols);
            }
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < grid.cols {
                visit(i + 1);
            }
        }
    }
    regions.saturating_sub(1)
}

/// The shortest prunable side branch: at most [`MAX_SPUR_LEN`] pixels, one
/// endpoint, hanging off a single junction cluster, in a component that has
/// more than two endpoints or encloses a hole.
fn shortest_spur(pixels: &BTreeSet<Pixel>) -> Option<BTreeSet<Pixel>> {
    let junctions: BTreeSet<Pixel> = pixels
        .iter()
        .copied()
        .filter(|&p| is_junction(pixels, p))
        .collect();
    if junctions.is_empty() {
        return None;
    }
    let endpoints: BTreeSet<Pixel> = pixels
        .iter()
        .copied()
        .filter(|&p| neighbors_in(pixels, p).len() == 1)
        .collect();
    let components = components_of(pixels);
    let plain: BTreeSet<Pixel> = pixels.difference(&junctions).copied().collect();
    let branches = components_of(&plain);
    let mut best: Option<BTreeSet<Pixel>> = None;
    for branch in branches {
        if branch.len() > MAX_SPUR_LEN || best.as_ref().is_some_and(|b| b.len() <= branch.len()) {
            continue;
        }
        if branch.iter().filter(|p| endpoints.contains(p)).count() != 1 {
            continue;
        }
        let attached: BTreeSet<Pixel> = branch
            .iter()
            .flat_map(|&p| neighbors8(p))
            .filter(|q| junctions.contains(q))
            .collect();
        if components_of(&attached).len() != 1 {
            continue;
        }
        let owner = components
            .iter()
            .find(|c| c.contains(branch.first().unwrap()))
            .unwrap();
        if owner.iter().filter(|p| endpoints.contains(p)).count() <= 2 && hole_count(owner) == 0 {
            continue;
        }
        let rest: BTreeSet<Pixel> = owner.difference(&branch).copied().collect();
        if components_of(&rest).len() != 1 {
            continue;
        }
        best = Some(branch);
    }
    best
}

/// Zhang–Suen deletion test. Ring positions 0..8 are P2..P9.
fn zhang_suen_candidate(ring: &[bool; 8], step: usize) -> bool {
    let count = ring.iter().filter(|&&b| b).count();
    if !(2..=6).contains(&count) {
        return false;
    }
    let transitions = (0..8).filter(|&k| !ring[k] && ring[(k + 1) % 8]).count();
    if transitions != 1 {
        return false;
    }
    let [n, _, e, _, s, _, w, _] = *ring;
    if step == 0 {
        !(n && e && s) && !(e && s && w)
    } else {
        !(n && e && w) && !(n && s && w)
    }
}

/// Endpoints found by convolving the skeleton image with a 3×3 kernel
/// (center 10, neighbors 1): a response of exactly 11 marks a skeleton pixel
/// with one skeleton neighbor. Returned in row-major order.
pub fn skeleton_endpoints(skel: &Skeleton) -> Vec<Pixel> {
    if skel.pixels.is_empty() {
        return Vec::new();
    }
    const KERNEL: [[u32; 3]; 3] = [[1, 1, 1], [1, 10, 1], [1, 1, 1]];
    let grid = Grid::new(&skel.pixels);
    let (r0, c0) = grid.origin;
    let mut out = Vec::new();
    for gr in 1..grid.rows - 1 {
        for gc in 1..grid.cols - 1 {
            let mut response = 0;
            for (kr, row) in KERNEL.iter().enumerate() {
                for (kc, &weight) in row.iter().enumerate() {
                    if grid.cells[(gr + kr - 1) * grid.cols + gc + kc - 1] {
                        response += weight;
                    }
                }
            }
            if response == 11 {
                out.push((gr + r0 - 1, gc + c0 - 1));
            }
        }
    }
    out
}

/// Geodesic center of a connected skeleton and its distance sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeodesicCenter {
    pub pixel: Pixel,
    pub distance_sum: u64,
}

/// Skeleton pixel minimizing the sum of hop distances to all other skeleton
/// pixels; ties go to the lexicographically smallest `(row, col)`.
pub fn geodesic_center(skel: &Skeleton) -> Result<GeodesicCenter, MorphError> {
    let nodes: Vec<Pixel> = skel.pixels.iter().copied().collect();
    if nodes.is_empty() {
        return Err(MorphError::Empty);
    }
    let adjacency: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&p| {
            neighbors8(p)
                .filter_map(|q| nodes.binary_search(&q).ok())
                .collect()
        })
        .collect();

    let n = nodes.len();
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut best: Option<GeodesicCenter> = None;
    for source in 0..n {
        dist.fill(u32::MAX);
        dist[source] = 0;
        queue.clear();
        queue.push_back(source);
        let mut reached = 1;
        let mut sum = 0u64;
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    sum += u64::from(dist[v]);
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        if reached != n {
            return Err(MorphError::Disconnected {
                components: components_of(&skel.pixels).len(),
            });
        }
        // Nodes are visited in lexicographic order, so strict `<` keeps the
        // smallest pixel among ties.
        if best.map_or(true, |b| sum < b.distance_sum) {
            best = Some(GeodesicCenter {
                pixel: nodes[source],
                distance_sum: sum,
            });
        }
    }
    Ok(best.expect("non-empty skeleton"))
}

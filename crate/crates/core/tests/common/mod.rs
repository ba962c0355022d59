#![allow(dead_code)]

use std::collections::BTreeSet;

use fetalorient_core::{BinaryMask, Pixel};
use proptest::prelude::*;

pub const SIDE: usize = 40;

/// A random-walk pixel set: always one 8-connected component.
pub fn walk(steps: &[u8]) -> BTreeSet<Pixel> {
    const MOVES: [(isize, isize); 8] = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)];
    let mut p = (SIDE / 2, SIDE / 2);
    let mut out = BTreeSet::from([p]);
    for &s in steps {
        let (dr, dc) = MOVES[s as usize % 8];
        let r = (p.0 as isize + dr).clamp(0, SIDE as isize - 1) as usize;
        let c = (p.1 as isize + dc).clamp(0, SIDE as isize - 1) as usize;
        p = (r, c);
        out.insert(p);
    }
    out
}

pub fn connected_set(max_steps: usize) -> impl Strategy<Value = BTreeSet<Pixel>> {
    prop::collection::vec(0u8..8, 1..max_steps).prop_map(|s| walk(&s))
}

pub fn mask_of(pixels: &BTreeSet<Pixel>) -> BinaryMask {
    BinaryMask::from_pixels(SIDE, SIDE, pixels.iter().copied()).unwrap()
}

/// Random mask of independent pixels with the given fill probability.
pub fn random_mask(size: usize) -> impl Strategy<Value = BinaryMask> {
    prop::collection::vec(prop::bool::weighted(0.45), size * size).prop_map(move |bits| {
        BinaryMask::from_fn(size, size, |r, c| bits[r * size + c])
    })
}

//! Deduplication indexes behind `MatrixSet`.
//!
//! Exact sets key on the monomial data itself. Tolerant sets use a spatial
//! hash over the flattened matrix entries: the grid has cells a fixed factor
//! wider than `eps_eq`, shifted so that zero sits at a cell center, and a
//! lookup enumerates the neighboring cells that could hold a point within the
//! query radius (per coordinate, at most one neighbor besides the home cell).
//! Cell vectors are folded into a single XOR-combined 64-bit hash so the key
//! size stays constant in the dimension; candidates pulled from a bucket are
//! always re-verified against the true Hilbert-Schmidt distance before they
//! count as equal.

use crate::linalg::{MonomialMatrix, UnitaryElement};
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

/// Cell width as a multiple of the query radius. Must be at least 2 so a
/// within-radius point is never more than one cell away per coordinate.
const CELL_FACTOR: f64 = 64.0;

/// Beyond this many candidate cells a lookup falls back to a linear scan.
const PROBE_CAP: usize = 16384;

fn mix(coord: usize, cell: i64) -> u64 {
    // splitmix64 over a coordinate-position/cell-index pair
    let mut z = (coord as u64)
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(cell as u64)
        .wrapping_add(0x243f_6a88_85a3_08d3);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn monomial_key_hash(m: &MonomialMatrix) -> u64 {
    let mut h = DefaultHasher::new();
    m.hash(&mut h);
    h.finish()
}

#[derive(Debug, Clone)]
pub(crate) struct ExactIndex {
    map: HashMap<u64, Vec<u32>>,
}

impl ExactIndex {
    pub fn new() -> ExactIndex {
        ExactIndex { map: HashMap::new() }
    }

    pub fn find(&self, elements: &[UnitaryElement], g: &MonomialMatrix) -> Option<usize> {
        let h = monomial_key_hash(g);
        let bucket = self.map.get(&h)?;
        bucket
            .iter()
            .copied()
            .filter(|&i| elements[i as usize].as_monomial() == Some(g))
            .map(|i| i as usize)
            .min()
    }

    pub fn insert(&mut self, g: &MonomialMatrix, idx: usize) {
        self.map.entry(monomial_key_hash(g)).or_default().push(idx as u32);
    }
}

/// Flatten a matrix into its real coordinate sequence (row-major, re then im).
fn coords(g: &UnitaryElement) -> Vec<f64> {
    let n = g.dim();
    let mut out = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            let z = g.entry(i, j);
            out.push(z.re);
            out.push(z.im);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub(crate) struct TolerantIndex {
    eps: f64,
    cell: f64,
    map: HashMap<u64, Vec<u32>>,
}

impl TolerantIndex {
    pub fn new(eps: f64) -> TolerantIndex {
        TolerantIndex { eps, cell: eps * CELL_FACTOR, map: HashMap::new() }
    }

    fn cell_of(&self, x: f64) -> i64 {
        (x / self.cell + 0.5).floor() as i64
    }

    fn base_hash(&self, coords: &[f64]) -> u64 {
        coords.iter().enumerate().fold(0u64, |h, (i, &x)| h ^ mix(i, self.cell_of(x)))
    }

    pub fn insert(&mut self, g: &UnitaryElement, idx: usize) {
        let h = self.base_hash(&coords(g));
        self.map.entry(h).or_default().push(idx as u32);
    }

    /// All stored indices within distance `radius` of `g`, smallest index
    /// first; `radius` must not exceed half the cell width.
    pub fn lookup_within(
        &self,
        elements: &[UnitaryElement],
        g: &UnitaryElement,
        radius: f64,
    ) -> Vec<(usize, f64)> {
        debug_assert!(radius <= self.cell / 2.0);
        let cs = coords(g);
        // per-coordinate home cell plus the at-most-one feasible neighbor
        let mut base = 0u64;
        let mut flex: Vec<(usize, i64, i64)> = Vec::new(); // (coord, home, alt)
        for (i, &x) in cs.iter().enumerate() {
            let c = self.cell_of(x);
            base ^= mix(i, c);
            let lo = x - (c as f64 - 0.5) * self.cell; // distance to lower wall
            let hi = (c as f64 + 0.5) * self.cell - x; // distance to upper wall
            if lo <= radius {
                flex.push((i, c, c - 1));
            } else if hi <= radius {
                flex.push((i, c, c + 1));
            }
        }
        let mut hits: Vec<(usize, f64)> = Vec::new();
        if flex.len() >= PROBE_CAP.trailing_zeros() as usize {
            // candidate blow-up: scan everything
            for (i, e) in elements.iter().enumerate() {
                if let Ok(d) = e.distance(g) {
                    if d <= radius {
                        hits.push((i, d));
                    }
                }
            }
            return hits;
        }
        let deltas: Vec<u64> = flex.iter().map(|&(i, c, a)| mix(i, c) ^ mix(i, a)).collect();
        for mask in 0u64..(1u64 << flex.len()) {
            let mut h = base;
            for (b, d) in deltas.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    h ^= d;
                }
            }
            if let Some(bucket) = self.map.get(&h) {
                for &i in bucket {
                    let d = elements[i as usize].distance(g).unwrap_or(f64::INFINITY);
                    if d <= radius {
                        hits.push((i as usize, d));
                    }
                }
            }
        }
        hits.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        hits.dedup_by_key(|h| h.0);
        hits
    }

    /// Earliest-inserted element within `eps` of `g` (the dedup rule).
    pub fn find(&self, elements: &[UnitaryElement], g: &UnitaryElement) -> Option<usize> {
        self.lookup_within(elements, g, self.eps).first().map(|&(i, _)| i)
    }
}

#[derive(Debug, Clone)]
pub(crate) enum SetIndex {
    Exact(ExactIndex),
    Tolerant(TolerantIndex),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Complex64, DenseMatrix};

    fn elem(vals: &[f64]) -> UnitaryElement {
        // not unitary; fine for index plumbing tests
        let n = (vals.len() as f64).sqrt() as usize;
        UnitaryElement::Dense(
            DenseMatrix::from_entries(n, vals.iter().map(|&v| Complex64::new(v, 0.0)).collect()).unwrap(),
        )
    }

    #[test]
    fn tolerant_index_finds_near_neighbors() {
        let eps = 1e-6;
        let mut idx = TolerantIndex::new(eps);
        let mut els = Vec::new();
        let a = elem(&[1.0, 0.0, 0.0, 1.0]);
        idx.insert(&a, 0);
        els.push(a);
        // half-eps perturbation must be found
        let b = elem(&[1.0 + eps / 2.0, 0.0, 0.0, 1.0]);
        assert_eq!(idx.find(&els, &b), Some(0));
        // 2 eps in one coordinate must not be
        let c = elem(&[1.0 + 2.0 * eps, 0.0, 0.0, 1.0]);
        assert_eq!(idx.find(&els, &c), None);
        // but a radius-bounded probe can still see it
        let hits = idx.lookup_within(&els, &c, 10.0 * eps);
        assert_eq!(hits.len(), 1);
        assert!((hits[0].1 - 2.0 * eps).abs() < 1e-9 * eps);
    }

    #[test]
    fn boundary_straddling_is_found() {
        // place a point just below a cell wall and query just above it
        let eps = 1e-6;
        let cell = eps * CELL_FACTOR;
        let wall = 7.5 * cell; // a wall of the shifted grid
        let mut idx = TolerantIndex::new(eps);
        let mut els = Vec::new();
        let a = elem(&[wall - 0.2 * eps, 0.0, 0.0, 1.0]);
        idx.insert(&a, 0);
        els.push(a);
        let q = elem(&[wall + 0.2 * eps, 0.0, 0.0, 1.0]);
        assert_eq!(idx.find(&els, &q), Some(0));
    }
}

//! Structure theory for approximate subgroups of the unitary group: large
//! centralizers, block-subgroup intersections, the inductive decomposition
//! into simultaneously diagonalizable pieces, root tori, and the normalizer
//! quotient bound.

mod finders;
mod pipeline;
mod torus;

pub use finders::{
    central_coset_or_centralizer, find_centralizer_referee, find_centralizer_solymosi,
    CosetOrCentralizer, FinderMethod,
};
pub use pipeline::{
    diagonalizable_control, inductive_step, intersect_with_subgroup, lift_fiber_bound,
    DecompositionReport, DecompositionStep, InductiveOutcome, IntersectionReport, LiftFiberReport,
    MeasuredConstants, StepCase,
};
pub use torus::{normalizer_quotient_bound, root_torus, NormalizerQuotientReport, TorusDescriptor};

use crate::error::Error;
use crate::linalg::{joint_diagonalize, Complex64, DenseMatrix, MonomialMatrix, UnitaryElement};
use crate::Result;
use serde::{Deserialize, Serialize};

/// A conjugate of a block-diagonal product of unitary groups: membership
/// means `Q* g Q` is block diagonal with the listed blocks. When the subgroup
/// was cut out by exact monomial witnesses, membership is decided exactly by
/// commutation with those witnesses instead of by the numeric test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockSubgroup {
    /// Conjugator; columns are the adapted basis.
    pub q: DenseMatrix,
    /// `(start, length)` intervals partitioning `0..n`.
    pub blocks: Vec<(usize, usize)>,
    /// Exact mode: the subgroup is the joint centralizer of these pairwise
    /// commuting monomials. Empty in tolerant mode or for the full group.
    exact_constraints: Vec<MonomialMatrix>,
    /// Dense constraints backing the same subgroup when no exact witnesses
    /// exist (one per refinement step).
    dense_constraints: Vec<DenseMatrix>,
    /// Set once a block has been split beyond what the constraints cut out
    /// (the coset case); membership then always uses the numeric test.
    numeric_membership: bool,
}

mod dense_serde {
    use super::*;
    impl Serialize for DenseMatrix {
        fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
            let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
                .map(|i| (0..self.dim()).map(|j| [self.get(i, j).re, self.get(i, j).im]).collect())
                .collect();
            rows.serialize(ser)
        }
    }
    impl<'de> Deserialize<'de> for DenseMatrix {
        fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
            use serde::de::Error as DeError;
            let rows = Vec::<Vec<[f64; 2]>>::deserialize(de)?;
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(D::Error::custom("matrix rows must all have length n"));
            }
            let flat: Vec<Complex64> = rows
                .iter()
                .flat_map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)))
                .collect();
            DenseMatrix::from_entries(n, flat).map_err(|e| D::Error::custom(e.to_string()))
        }
    }
}

impl BlockSubgroup {
    /// The full unitary group `U_n` (one block, no constraints).
    pub fn full(n: usize) -> BlockSubgroup {
        BlockSubgroup {
            q: DenseMatrix::identity(n),
            blocks: vec![(0, n)],
            exact_constraints: Vec::new(),
            dense_constraints: Vec::new(),
            numeric_membership: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn is_fully_diagonal(&self) -> bool {
        self.blocks.iter().all(|&(_, len)| len == 1)
    }

    pub(crate) fn set_numeric_membership(&mut self) {
        self.numeric_membership = true;
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|&(_, len)| len).collect()
    }

    /// Adjoin a commuting constraint and recompute the adapted basis. The new
    /// constraint must commute with all existing ones (it always does in the
    /// decomposition pipeline, where constraints are drawn from the previous
    /// level's centralizer).
    pub fn refine(&self, gamma: &UnitaryElement, eps_spec: f64) -> Result<BlockSubgroup> {
        let mut exact = self.exact_constraints.clone();
        let mut dense = self.dense_constraints.clone();
        match gamma {
            UnitaryElement::Monomial(m) => exact.push(m.clone()),
            UnitaryElement::Dense(d) => dense.push(d.clone()),
        }
        BlockSubgroup::from_constraints(self.dim(), exact, dense, eps_spec)
    }

    /// Build the joint centralizer of a pairwise commuting constraint family:
    /// jointly diagonalize, cluster the joint eigenvalue tuples, and record
    /// the block intervals.
    pub fn from_constraints(
        n: usize,
        exact: Vec<MonomialMatrix>,
        dense: Vec<DenseMatrix>,
        eps_spec: f64,
    ) -> Result<BlockSubgroup> {
        if exact.is_empty() && dense.is_empty() {
            return Ok(BlockSubgroup::full(n));
        }
        let rendered: Vec<DenseMatrix> =
            exact.iter().map(|m| m.to_dense()).chain(dense.iter().cloned()).collect();
        // split each unitary into its commuting Hermitian pair
        let mut herm = Vec::with_capacity(2 * rendered.len());
        for m in &rendered {
            let adj = m.adjoint();
            let mut h1 = DenseMatrix::zeros(n);
            let mut h2 = DenseMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    let a = m.get(i, j);
                    let b = adj.get(i, j);
                    h1.set(i, j, (a + b) * Complex64::new(0.5, 0.0));
                    h2.set(i, j, (a - b) * Complex64::new(0.0, -0.5));
                }
            }
            herm.push(h1);
            herm.push(h2);
        }
        let tol = (n as f64) * eps_spec / 8.0;
        let q_raw = joint_diagonalize(&mut herm, tol)?;
        // joint eigenvalue tuple per column
        let tuples: Vec<Vec<Complex64>> = (0..n)
            .map(|j| {
                (0..rendered.len())
                    .map(|k| Complex64::new(herm[2 * k].get(j, j).re, herm[2 * k + 1].get(j, j).re))
                    .collect()
            })
            .collect();
        // transitive closure of per-tuple proximity
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            if p[i] != i {
                let r = find(p, p[i]);
                p[i] = r;
            }
            p[i]
        }
        for i in 0..n {
            for j in i + 1..n {
                let close =
                    tuples[i].iter().zip(&tuples[j]).all(|(a, b)| (a - b).norm() <= eps_spec);
                if close {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri] = rj;
                    }
                }
            }
        }
        // group columns by root, ordered by smallest member
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut root_to_group: std::collections::HashMap<usize, usize> = Default::default();
        for i in 0..n {
            let r = find(&mut parent, i);
            match root_to_group.get(&r) {
                Some(&g) => groups[g].push(i),
                None => {
                    root_to_group.insert(r, groups.len());
                    groups.push(vec![i]);
                }
            }
        }
        // permute columns so clusters are contiguous
        let perm: Vec<usize> = groups.iter().flatten().copied().collect();
        let mut q = DenseMatrix::zeros(n);
        for (new_col, &old_col) in perm.iter().enumerate() {
            for i in 0..n {
                q.set(i, new_col, q_raw.get(i, old_col));
            }
        }
        let mut blocks = Vec::with_capacity(groups.len());
        let mut start = 0usize;
        for g in &groups {
            blocks.push((start, g.len()));
            start += g.len();
        }
        Ok(BlockSubgroup {
            q,
            blocks,
            exact_constraints: exact,
            dense_constraints: dense,
            numeric_membership: false,
        })
    }

    /// Membership test. Exact when the subgroup carries monomial witnesses
    /// and `g` is monomial; otherwise the off-block mass of `Q* g Q` is
    /// compared against `eps_block`.
    pub fn contains(&self, g: &UnitaryElement, eps_block: f64) -> Result<bool> {
        if g.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: g.dim() });
        }
        if self.blocks.len() == 1 {
            return Ok(true);
        }
        if !self.numeric_membership && self.dense_constraints.is_empty() {
            if let UnitaryElement::Monomial(m) = g {
                for c in &self.exact_constraints {
                    if !m.commutes_with(c)? {
                        return Ok(false);
                    }
                }
                return Ok(true);
            }
        }
        Ok(self.off_block_mass(g) <= eps_block)
    }

    /// Hilbert-Schmidt mass of `Q* g Q` outside the blocks.
    pub fn off_block_mass(&self, g: &UnitaryElement) -> f64 {
        let n = self.dim();
        let m = self.q.adjoint().mul(&g.to_dense()).mul(&self.q);
        let mut block_of = vec![0usize; n];
        for (bi, &(start, len)) in self.blocks.iter().enumerate() {
            for i in start..start + len {
                block_of[i] = bi;
            }
        }
        let mut sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                if block_of[i] != block_of[j] {
                    sq += m.get(i, j).norm_sqr();
                }
            }
        }
        sq.sqrt()
    }

    /// True iff `g` acts as a scalar on every block, i.e. lies in the center
    /// of the block product.
    pub fn is_block_scalar(&self, g: &UnitaryElement, eps_block: f64) -> Result<bool> {
        if g.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: g.dim() });
        }
        let n = self.dim();
        let m = self.q.adjoint().mul(&g.to_dense()).mul(&self.q);
        let mut sq = 0.0;
        for &(start, len) in &self.blocks {
            // mean diagonal of the block, normalized to the unit circle
            let mut mean = Complex64::new(0.0, 0.0);
            for i in start..start + len {
                mean += m.get(i, i);
            }
            mean /= len as f64;
            let norm = mean.norm();
            if norm < 0.5 {
                return Ok(false);
            }
            let lam = mean / norm;
            for i in start..start + len {
                for j in start..start + len {
                    let mut v = m.get(i, j);
                    if i == j {
                        v -= lam;
                    }
                    sq += v.norm_sqr();
                }
            }
        }
        let mut block_of = vec![0usize; n];
        for (bi, &(start, len)) in self.blocks.iter().enumerate() {
            for i in start..start + len {
                block_of[i] = bi;
            }
        }
        for i in 0..n {
            for j in 0..n {
                if block_of[i] != block_of[j] {
                    sq += m.get(i, j).norm_sqr();
                }
            }
        }
        Ok(sq.sqrt() <= eps_block * (n as f64).sqrt().max(1.0))
    }
}

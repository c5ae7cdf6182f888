//! Exact monomial (generalized permutation) matrices: one root-of-unity entry
//! per row and column. These carry the exact-arithmetic oracle side of the
//! crate; products, inverses, determinants and spectra are all computed in
//! rational phase arithmetic with no floating-point error.

use super::dense::{Complex64, DenseMatrix};
use super::phase::PhaseFrac;
use crate::error::Error;
use crate::Result;
use serde::{Deserialize, Serialize};

/// A monomial matrix `M e_j = phase[j] * e_{perm[j]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonomialMatrix {
    /// Row index of the nonzero entry in each column; a permutation of `0..n`.
    perm: Vec<u32>,
    /// Rotation number of the nonzero entry in each column.
    phases: Vec<PhaseFrac>,
}

impl MonomialMatrix {
    pub fn new(perm: Vec<u32>, phases: Vec<PhaseFrac>) -> Result<MonomialMatrix> {
        let n = perm.len();
        if phases.len() != n || n == 0 {
            return Err(Error::DimensionMismatch { expected: n, got: phases.len() });
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            let p = p as usize;
            if p >= n || seen[p] {
                return Err(Error::InvalidInput("perm is not a permutation".into()));
            }
            seen[p] = true;
        }
        Ok(MonomialMatrix { perm, phases })
    }

    pub fn identity(n: usize) -> MonomialMatrix {
        MonomialMatrix {
            perm: (0..n as u32).collect(),
            phases: vec![PhaseFrac::ZERO; n],
        }
    }

    /// A permutation matrix (all phases zero); `perm[j]` is the image row of column `j`.
    pub fn permutation(perm: Vec<u32>) -> Result<MonomialMatrix> {
        let n = perm.len();
        MonomialMatrix::new(perm, vec![PhaseFrac::ZERO; n])
    }

    /// Diagonal monomial matrix with the given phases.
    pub fn diagonal(phases: Vec<PhaseFrac>) -> MonomialMatrix {
        MonomialMatrix {
            perm: (0..phases.len() as u32).collect(),
            phases,
        }
    }

    /// Scalar `e^{2 pi i p} * id_n`.
    pub fn scalar(n: usize, p: PhaseFrac) -> MonomialMatrix {
        MonomialMatrix::diagonal(vec![p; n])
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[u32] {
        &self.perm
    }

    pub fn phases(&self) -> &[PhaseFrac] {
        &self.phases
    }

    /// Entry at `(i, j)`; zero unless `i = perm[j]`.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        if self.perm[j] as usize == i {
            self.phases[j].value()
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Exact product `self * rhs`.
    pub fn mul(&self, rhs: &MonomialMatrix) -> Result<MonomialMatrix> {
        let n = self.dim();
        if rhs.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: rhs.dim() });
        }
        let mut perm = vec![0u32; n];
        let mut phases = vec![PhaseFrac::ZERO; n];
        for j in 0..n {
            let mid = rhs.perm[j] as usize;
            perm[j] = self.perm[mid];
            phases[j] = rhs.phases[j].add(self.phases[mid])?;
        }
        Ok(MonomialMatrix { perm, phases })
    }

    /// Exact inverse (equals the adjoint, since the matrix is unitary).
    pub fn inverse(&self) -> MonomialMatrix {
        let n = self.dim();
        let mut perm = vec![0u32; n];
        let mut phases = vec![PhaseFrac::ZERO; n];
        for j in 0..n {
            let i = self.perm[j] as usize;
            perm[i] = j as u32;
            phases[i] = self.phases[j].neg();
        }
        MonomialMatrix { perm, phases }
    }

    /// Exact commutation test.
    pub fn commutes_with(&self, other: &MonomialMatrix) -> Result<bool> {
        Ok(self.mul(other)? == other.mul(self)?)
    }

    /// Exact determinant as a rotation number (sign of the permutation folded in).
    pub fn det_phase(&self) -> Result<PhaseFrac> {
        let mut d = if permutation_parity(&self.perm) { PhaseFrac::HALF } else { PhaseFrac::ZERO };
        for p in &self.phases {
            d = d.add(*p)?;
        }
        Ok(d)
    }

    /// Exact test for being a scalar multiple of the identity; returns the
    /// common phase if so.
    pub fn as_scalar(&self) -> Option<PhaseFrac> {
        let first = self.phases[0];
        let is_id_perm = self.perm.iter().enumerate().all(|(j, &p)| p as usize == j);
        if is_id_perm && self.phases.iter().all(|&p| p == first) {
            Some(first)
        } else {
            None
        }
    }

    /// Hilbert-Schmidt distance to the identity, computed from the exact data:
    /// `||M - I||^2 = sum_{fixed j} |phase_j - 1|^2 + 2 * #moved`.
    pub fn distance_to_identity(&self) -> f64 {
        let mut sq = 0.0;
        for j in 0..self.dim() {
            if self.perm[j] as usize == j {
                let t = self.phases[j].turns();
                sq += 2.0 - 2.0 * (std::f64::consts::TAU * t).cos();
            } else {
                sq += 2.0;
            }
        }
        sq.sqrt()
    }

    /// Dense floating-point rendering.
    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n);
        for j in 0..n {
            m.set(self.perm[j] as usize, j, self.phases[j].value());
        }
        m
    }

    /// The cycles of the underlying permutation together with the total phase
    /// accumulated around each cycle. Cycles are anchored at their smallest
    /// position and listed in increasing anchor order.
    pub fn cycles(&self) -> Result<Vec<MonomialCycle>> {
        let n = self.dim();
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut positions = Vec::new();
            let mut total = PhaseFrac::ZERO;
            let mut j = start;
            loop {
                seen[j] = true;
                positions.push(j);
                total = total.add(self.phases[j])?;
                j = self.perm[j] as usize;
                if j == start {
                    break;
                }
            }
            cycles.push(MonomialCycle { positions, total });
        }
        Ok(cycles)
    }

    /// Exact eigenvalues: for a cycle of length `l` with total phase `T`, the
    /// eigenvalues are `e^{2 pi i (T + k)/l}`, `k = 0..l-1`. Returned per
    /// position index together with the owning cycle and its `k`.
    pub fn eigen_phases(&self) -> Result<Vec<EigenPhase>> {
        let mut out = Vec::with_capacity(self.dim());
        for (ci, cyc) in self.cycles()?.iter().enumerate() {
            let l = cyc.positions.len() as i64;
            for k in 0..l {
                let lambda = PhaseFrac::new(
                    cyc.total
                        .num
                        .checked_add(k.checked_mul(cyc.total.den).ok_or(Error::PhaseOverflow)?)
                        .ok_or(Error::PhaseOverflow)?,
                    cyc.total.den.checked_mul(l).ok_or(Error::PhaseOverflow)?,
                )?;
                out.push(EigenPhase { cycle: ci, k: k as usize, lambda });
            }
        }
        Ok(out)
    }

    /// Unnormalized exact eigenvector data for eigenvalue `lambda` on `cycle`:
    /// the component at the cycle's `i`-th position is the unit complex number
    /// with rotation `prefix_i - i*lambda` (anchor component 1). The true
    /// eigenvector is this divided by `sqrt(cycle length)`.
    pub fn eigenvector_components(&self, cycle: &MonomialCycle, lambda: PhaseFrac) -> Result<Vec<PhaseFrac>> {
        let l = cycle.positions.len();
        let mut comps = Vec::with_capacity(l);
        let mut acc = PhaseFrac::ZERO;
        for i in 0..l {
            comps.push(acc);
            // next component: accumulate the edge phase and divide by lambda
            acc = acc.add(self.phases[cycle.positions[i]])?.add(lambda.neg())?;
        }
        Ok(comps)
    }

    /// Dense unitary whose columns are the normalized eigenvectors, ordered to
    /// match [`MonomialMatrix::eigen_phases`].
    pub fn eigenvectors_dense(&self) -> Result<DenseMatrix> {
        let n = self.dim();
        let cycles = self.cycles()?;
        let eig = self.eigen_phases()?;
        let mut q = DenseMatrix::zeros(n);
        for (col, e) in eig.iter().enumerate() {
            let cyc = &cycles[e.cycle];
            let scale = 1.0 / (cyc.positions.len() as f64).sqrt();
            let comps = self.eigenvector_components(cyc, e.lambda)?;
            for (i, &pos) in cyc.positions.iter().enumerate() {
                q.set(pos, col, comps[i].value() * scale);
            }
        }
        Ok(q)
    }
}

/// One permutation cycle of a monomial matrix.
#[derive(Debug, Clone)]
pub struct MonomialCycle {
    /// Positions visited in order, starting at the smallest.
    pub positions: Vec<usize>,
    /// Total rotation accumulated around the cycle.
    pub total: PhaseFrac,
}

/// One exact eigenvalue of a monomial matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EigenPhase {
    /// Index into [`MonomialMatrix::cycles`].
    pub cycle: usize,
    /// Which `l`-th root within the cycle.
    pub k: usize,
    /// The eigenvalue as a rotation number.
    pub lambda: PhaseFrac,
}

/// Parity of a permutation: `true` for odd.
pub fn permutation_parity(perm: &[u32]) -> bool {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut odd = false;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0usize;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            len += 1;
            j = perm[j] as usize;
        }
        if len % 2 == 0 {
            odd = !odd;
        }
    }
    odd
}

/// Action of `z` on a gamma-eigenspace, for `z` exactly commuting with
/// `gamma`. The eigenspace with eigenvalue `lambda` has one basis vector per
/// cycle of `gamma` carrying that eigenvalue; `z` permutes these basis vectors
/// up to exact root-of-unity factors, so its restriction is again monomial.
///
/// `cycles` are gamma's cycles and `members` lists the cycle indices whose
/// spectra contain `lambda`. Returns the monomial matrix of `z` restricted to
/// that eigenspace, in the basis ordered as `members`.
pub fn eigenspace_action(
    z: &MonomialMatrix,
    gamma: &MonomialMatrix,
    cycles: &[MonomialCycle],
    members: &[usize],
    lambda: PhaseFrac,
) -> Result<MonomialMatrix> {
    let n = z.dim();
    // map position -> (cycle index, offset within cycle)
    let mut locate = vec![(usize::MAX, 0usize); n];
    for (ci, cyc) in cycles.iter().enumerate() {
        for (off, &p) in cyc.positions.iter().enumerate() {
            locate[p] = (ci, off);
        }
    }
    let mut member_rank = vec![usize::MAX; cycles.len()];
    for (r, &ci) in members.iter().enumerate() {
        member_rank[ci] = r;
    }
    let m = members.len();
    let mut perm = vec![0u32; m];
    let mut phases = vec![PhaseFrac::ZERO; m];
    for (r, &ci) in members.iter().enumerate() {
        let cyc = &cycles[ci];
        let anchor = cyc.positions[0];
        // image of the anchor under z lands in some cycle of gamma
        let img = z.perm[anchor] as usize;
        let (cj, off) = locate[img];
        if member_rank[cj] == usize::MAX {
            return Err(Error::NumericalBreakdown(
                "eigenspace action left the eigenspace; inputs do not commute".into(),
            ));
        }
        // z v_c = mu v_{c'}: evaluate both sides at the image position.
        // lhs coefficient: z-phase at the anchor (anchor component of v_c is 1);
        // rhs coefficient: component `off` of v_{c'}.
        let target_comps = gamma.eigenvector_components(&cycles[cj], lambda)?;
        let mu = z.phases[anchor].add(target_comps[off].neg())?;
        perm[r] = member_rank[cj] as u32;
        phases[r] = mu;
    }
    MonomialMatrix::new(perm, phases)
}

//! Spectral decomposition of unitary matrices.
//!
//! A unitary `g` splits into the commuting Hermitian pair `(g + g*)/2` and
//! `(g - g*)/(2i)`, which are diagonalized simultaneously by cyclic Jacobi
//! sweeps. Each sweep picks, for every index pair, the complex plane rotation
//! that maximizes the joint diagonal mass (the classical simultaneous-
//! diagonalization rotation built from the top eigenvector of a 3x3 Gram
//! matrix). Exact monomial inputs bypass the iteration entirely and read
//! their spectrum off the cycle structure.

use super::dense::{Complex64, DenseMatrix};
use super::UnitaryElement;
use crate::error::Error;
use crate::Result;

/// Spectral data of a unitary matrix: unit-circle eigenvalues, an orthonormal
/// eigenbasis, and the partition of indices into eigenvalue clusters
/// (transitive closure of the `eps_spec` proximity relation). Cluster members
/// are contiguous column ranges.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<Complex64>,
    /// Columns are eigenvectors.
    pub q: DenseMatrix,
    pub clusters: Vec<Vec<usize>>,
}

impl SpectralDecomposition {
    /// Sizes of the clusters; these are the eigenvalue multiplicities at
    /// resolution `eps_spec`.
    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.len()).collect()
    }

    /// `||M - Q diag(lambda) Q*||`.
    pub fn reconstruction_error(&self, m: &DenseMatrix) -> f64 {
        let n = m.dim();
        let mut d = DenseMatrix::zeros(n);
        for j in 0..n {
            for i in 0..n {
                d.set(i, j, self.q.get(i, j) * self.eigenvalues[j]);
            }
        }
        let rec = d.mul(&self.q.adjoint());
        m.sub(&rec).hs_norm()
    }
}

/// Top eigenvector of a symmetric 3x3 matrix by cyclic Jacobi, returned with
/// a nonnegative first component.
fn top_eigenvector_sym3(g: [[f64; 3]; 3]) -> [f64; 3] {
    let mut a = g;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..32 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off < 1e-30 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q].abs() < 1e-300 {
                continue;
            }
            let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
            let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            for k in 0..3 {
                let (akp, akq) = (a[k][p], a[k][q]);
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for k in 0..3 {
                let (vkp, vkq) = (v[k][p], v[k][q]);
                v[k][p] = c * vkp - s * vkq;
                v[k][q] = s * vkp + c * vkq;
            }
        }
    }
    let mut best = 0;
    for i in 1..3 {
        if a[i][i] > a[best][best] {
            best = i;
        }
    }
    let mut out = [v[0][best], v[1][best], v[2][best]];
    if out[0] < 0.0 {
        for x in &mut out {
            *x = -*x;
        }
    }
    out
}

fn off_diagonal_sqsum(m: &DenseMatrix) -> f64 {
    let n = m.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m.get(i, j).norm_sqr();
            }
        }
    }
    s
}

/// Jointly diagonalize a family of (approximately commuting) Hermitian
/// matrices. Returns the accumulated unitary `Q`; afterwards every
/// `Q* A_k Q` has off-diagonal Hilbert-Schmidt mass at most `tol` (jointly).
/// Errors with `NumericalBreakdown` if the sweep cap is exhausted first.
pub fn joint_diagonalize(mats: &mut [DenseMatrix], tol: f64) -> Result<DenseMatrix> {
    let n = mats.first().map(|m| m.dim()).unwrap_or(0);
    if n == 0 {
        return Err(Error::InvalidInput("no matrices to diagonalize".into()));
    }
    let mut q = DenseMatrix::identity(n);
    if n == 1 {
        return Ok(q);
    }
    let sweep_cap = 100 * n * n;
    let mut prev_off = f64::INFINITY;
    for _sweep in 0..sweep_cap {
        let off: f64 = mats.iter().map(off_diagonal_sqsum).sum();
        if off.sqrt() <= tol {
            return Ok(q);
        }
        if off >= prev_off * (1.0 - 1e-12) {
            // numerical floor reached
            if off.sqrt() <= tol.max(1e-10) {
                return Ok(q);
            }
            return Err(Error::NumericalBreakdown(format!(
                "joint Jacobi stalled at off-diagonal mass {:.3e} (target {:.3e})",
                off.sqrt(),
                tol
            )));
        }
        prev_off = off;
        for p in 0..n - 1 {
            for r in p + 1..n {
                // Gram matrix of the (p, r) interaction vectors
                let mut g = [[0.0f64; 3]; 3];
                for m in mats.iter() {
                    let h = [
                        m.get(p, p).re - m.get(r, r).re,
                        2.0 * m.get(p, r).re,
                        2.0 * m.get(p, r).im,
                    ];
                    for a in 0..3 {
                        for b in 0..3 {
                            g[a][b] += h[a] * h[b];
                        }
                    }
                }
                if g[1][1] + g[2][2] < 1e-60 {
                    continue; // pair already diagonal in every matrix
                }
                let x = top_eigenvector_sym3(g);
                let c = ((x[0] + 1.0) / 2.0).sqrt();
                if c < 1e-12 {
                    continue;
                }
                let s = Complex64::new(x[1], -x[2]) / (2.0 * c);
                if s.norm_sqr() < 1e-32 {
                    continue;
                }
                // plane rotation [[c, -conj(s)], [s, c]] on coordinates (p, r)
                for m in mats.iter_mut() {
                    // column update
                    for i in 0..n {
                        let (aip, air) = (m.get(i, p), m.get(i, r));
                        m.set(i, p, aip * c + air * s);
                        m.set(i, r, aip * (-s.conj()) + air * c);
                    }
                    // row update (conjugate transpose of the rotation)
                    for j in 0..n {
                        let (apj, arj) = (m.get(p, j), m.get(r, j));
                        m.set(p, j, apj * c + arj * s.conj());
                        m.set(r, j, apj * (-s) + arj * c);
                    }
                }
                for i in 0..n {
                    let (vip, vir) = (q.get(i, p), q.get(i, r));
                    q.set(i, p, vip * c + vir * s);
                    q.set(i, r, vip * (-s.conj()) + vir * c);
                }
            }
        }
    }
    Err(Error::NumericalBreakdown("joint Jacobi sweep cap exhausted".into()))
}

/// Cluster unit-circle values by the transitive closure of chordal proximity
/// `<= eps`. Input angles may be in any order; returns groups of input
/// indices, each group sorted, groups ordered by their smallest angle after
/// cutting the circle at its widest gap (so clusters never straddle the cut).
pub fn cluster_unit_circle(values: &[Complex64], eps: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    let angle = |z: Complex64| {
        let a = z.arg();
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    };
    order.sort_by(|&a, &b| angle(values[a]).total_cmp(&angle(values[b])));
    // find the widest circular gap and start after it
    let mut cut = 0usize;
    let mut widest = -1.0f64;
    for i in 0..n {
        let a = angle(values[order[i]]);
        let b = angle(values[order[(i + 1) % n]]) + if i + 1 == n { std::f64::consts::TAU } else { 0.0 };
        let gap = b - a;
        if gap > widest {
            widest = gap;
            cut = (i + 1) % n;
        }
    }
    order.rotate_left(cut);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, &idx) in order.iter().enumerate() {
        let start_new = if i == 0 {
            true
        } else {
            let prev = values[order[i - 1]];
            (values[idx] - prev).norm() > eps
        };
        if start_new {
            clusters.push(vec![idx]);
        } else {
            clusters.last_mut().unwrap().push(idx);
        }
    }
    // if everything chains around the full circle, the cut may have split one
    // cluster; merge ends when they are still within eps
    if clusters.len() > 1 {
        let first = *clusters.first().unwrap().first().unwrap();
        let last = *clusters.last().unwrap().last().unwrap();
        if (values[first] - values[last]).norm() <= eps {
            let tail = clusters.pop().unwrap();
            clusters.first_mut().unwrap().splice(0..0, tail);
        }
    }
    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters
}

/// Spectral decomposition of a unitary element. Exact monomial inputs take
/// the cycle route; dense inputs go through the joint Jacobi iteration.
pub fn spectral_decompose(g: &UnitaryElement, eps_spec: f64) -> Result<SpectralDecomposition> {
    let n = g.dim();
    match g {
        UnitaryElement::Monomial(m) => {
            let eig = m.eigen_phases()?;
            let values: Vec<Complex64> = eig.iter().map(|e| e.lambda.value()).collect();
            let q_raw = m.eigenvectors_dense()?;
            let cluster_groups = cluster_unit_circle(&values, eps_spec);
            // reorder columns cluster-contiguously
            let perm: Vec<usize> = cluster_groups.iter().flatten().copied().collect();
            let mut q = DenseMatrix::zeros(n);
            let mut eigenvalues = Vec::with_capacity(n);
            for (new_col, &old_col) in perm.iter().enumerate() {
                for i in 0..n {
                    q.set(i, new_col, q_raw.get(i, old_col));
                }
                eigenvalues.push(values[old_col]);
            }
            let clusters = contiguous_clusters(&cluster_groups);
            Ok(SpectralDecomposition { eigenvalues, q, clusters })
        }
        UnitaryElement::Dense(m) => {
            let madj = m.adjoint();
            let mut h1 = DenseMatrix::zeros(n);
            let mut h2 = DenseMatrix::zeros(n);
            let half = Complex64::new(0.5, 0.0);
            let half_i = Complex64::new(0.0, -0.5); // 1/(2i)
            for i in 0..n {
                for j in 0..n {
                    let a = m.get(i, j);
                    let b = madj.get(i, j);
                    h1.set(i, j, (a + b) * half);
                    h2.set(i, j, (a - b) * half_i);
                }
            }
            let tol = (n as f64) * eps_spec / 8.0;
            let mut pair = [h1, h2];
            let q_raw = joint_diagonalize(&mut pair, tol)?;
            let mut values = Vec::with_capacity(n);
            for j in 0..n {
                let lam = Complex64::new(pair[0].get(j, j).re, pair[1].get(j, j).re);
                let norm = lam.norm();
                values.push(if norm > 1e-12 { lam / norm } else { Complex64::new(1.0, 0.0) });
            }
            let cluster_groups = cluster_unit_circle(&values, eps_spec);
            let perm: Vec<usize> = cluster_groups.iter().flatten().copied().collect();
            let mut q = DenseMatrix::zeros(n);
            let mut eigenvalues = Vec::with_capacity(n);
            for (new_col, &old_col) in perm.iter().enumerate() {
                for i in 0..n {
                    q.set(i, new_col, q_raw.get(i, old_col));
                }
                eigenvalues.push(values[old_col]);
            }
            let clusters = contiguous_clusters(&cluster_groups);
            let dec = SpectralDecomposition { eigenvalues, q, clusters };
            let err = dec.reconstruction_error(m);
            if err > (n as f64) * eps_spec {
                return Err(Error::NumericalBreakdown(format!(
                    "spectral reconstruction error {:.3e} exceeds {:.3e}",
                    err,
                    (n as f64) * eps_spec
                )));
            }
            Ok(dec)
        }
    }
}

/// Renumber cluster groups as contiguous index runs `[0..k1], [k1..k2], ...`.
fn contiguous_clusters(groups: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(groups.len());
    let mut next = 0usize;
    for g in groups {
        out.push((next..next + g.len()).collect());
        next += g.len();
    }
    out
}

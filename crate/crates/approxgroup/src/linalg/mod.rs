//! Complex matrix arithmetic over `U_n(C)`: Hilbert-Schmidt geometry,
//! unitarity and scalarity tests, and spectral decomposition.

mod dense;
mod monomial;
mod phase;
mod spectral;

pub use dense::{hs_distance, hs_norm, Complex64, DenseMatrix};
pub use monomial::{eigenspace_action, permutation_parity, EigenPhase, MonomialCycle, MonomialMatrix};
pub use phase::PhaseFrac;
pub use spectral::{cluster_unit_circle, joint_diagonalize, spectral_decompose, SpectralDecomposition};

use crate::error::Error;
use crate::Result;
use std::cmp::Ordering;

/// Quantum used when ordering matrices by rounded entries. Well below every
/// default tolerance, well above accumulated double-precision noise.
pub const CANONICAL_QUANTUM: f64 = 1e-9;

/// An element of `U_n(C)`, either as a dense matrix carrying a unitarity
/// certificate or as an exact monomial (generalized permutation) matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitaryElement {
    Dense(DenseMatrix),
    Monomial(MonomialMatrix),
}

impl UnitaryElement {
    /// Admit a dense matrix after checking `||M* M - I|| <= eps_unit`.
    pub fn from_dense(m: DenseMatrix, eps_unit: f64) -> Result<UnitaryElement> {
        let residual = m.unitarity_residual();
        if residual > eps_unit {
            return Err(Error::NotUnitary { residual, tol: eps_unit });
        }
        Ok(UnitaryElement::Dense(m))
    }

    pub fn identity(n: usize, exact: bool) -> UnitaryElement {
        if exact {
            UnitaryElement::Monomial(MonomialMatrix::identity(n))
        } else {
            UnitaryElement::Dense(DenseMatrix::identity(n))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            UnitaryElement::Dense(m) => m.dim(),
            UnitaryElement::Monomial(m) => m.dim(),
        }
    }

    pub fn is_monomial(&self) -> bool {
        matches!(self, UnitaryElement::Monomial(_))
    }

    pub fn as_monomial(&self) -> Option<&MonomialMatrix> {
        match self {
            UnitaryElement::Monomial(m) => Some(m),
            UnitaryElement::Dense(_) => None,
        }
    }

    /// Entry at `(i, j)` without materializing a dense rendering.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match self {
            UnitaryElement::Dense(m) => m.get(i, j),
            UnitaryElement::Monomial(m) => m.entry(i, j),
        }
    }

    /// Dense rendering (clones for dense inputs).
    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            UnitaryElement::Dense(m) => m.clone(),
            UnitaryElement::Monomial(m) => m.to_dense(),
        }
    }

    /// Product; both operands must share representation kind and dimension.
    pub fn mul(&self, rhs: &UnitaryElement) -> Result<UnitaryElement> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: rhs.dim() });
        }
        match (self, rhs) {
            (UnitaryElement::Dense(a), UnitaryElement::Dense(b)) => Ok(UnitaryElement::Dense(a.mul(b))),
            (UnitaryElement::Monomial(a), UnitaryElement::Monomial(b)) => {
                Ok(UnitaryElement::Monomial(a.mul(b)?))
            }
            _ => Err(Error::KindMismatch),
        }
    }

    /// Inverse. For dense elements this is the adjoint, exact up to the
    /// admitted unitarity residual.
    pub fn inverse(&self) -> UnitaryElement {
        match self {
            UnitaryElement::Dense(m) => UnitaryElement::Dense(m.adjoint()),
            UnitaryElement::Monomial(m) => UnitaryElement::Monomial(m.inverse()),
        }
    }

    /// Hilbert-Schmidt distance between two elements of the same dimension.
    pub fn distance(&self, rhs: &UnitaryElement) -> Result<f64> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: rhs.dim() });
        }
        match (self, rhs) {
            (UnitaryElement::Monomial(a), UnitaryElement::Monomial(b)) => {
                // entries collide in at most two rows per column
                let mut sq = 0.0;
                for j in 0..a.dim() {
                    if a.perm()[j] == b.perm()[j] {
                        let da = a.phases()[j].value() - b.phases()[j].value();
                        sq += da.norm_sqr();
                    } else {
                        sq += 2.0;
                    }
                }
                Ok(sq.sqrt())
            }
            _ => {
                let n = self.dim();
                let mut sq = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        sq += (self.entry(i, j) - rhs.entry(i, j)).norm_sqr();
                    }
                }
                Ok(sq.sqrt())
            }
        }
    }

    /// Distance to the identity.
    pub fn distance_to_identity(&self) -> f64 {
        match self {
            UnitaryElement::Monomial(m) => m.distance_to_identity(),
            UnitaryElement::Dense(m) => {
                let mut sq = 0.0;
                for i in 0..m.dim() {
                    for j in 0..m.dim() {
                        let mut z = m.get(i, j);
                        if i == j {
                            z -= Complex64::new(1.0, 0.0);
                        }
                        sq += z.norm_sqr();
                    }
                }
                sq.sqrt()
            }
        }
    }

    /// Canonical deterministic ordering: lexicographic on rounded entries in
    /// row-major order, ties broken by the raw entries. The comparison is
    /// computed on the (virtual) dense rendering for both representation
    /// kinds, so exact and tolerant pipelines sort identically.
    pub fn canonical_cmp(&self, other: &UnitaryElement) -> Ordering {
        let n = self.dim().min(other.dim());
        for i in 0..n {
            for j in 0..n {
                let a = self.entry(i, j);
                let b = other.entry(i, j);
                let ra = (a.re / CANONICAL_QUANTUM).round() as i64;
                let rb = (b.re / CANONICAL_QUANTUM).round() as i64;
                match ra.cmp(&rb) {
                    Ordering::Equal => {}
                    o => return o,
                }
                let ia = (a.im / CANONICAL_QUANTUM).round() as i64;
                let ib = (b.im / CANONICAL_QUANTUM).round() as i64;
                match ia.cmp(&ib) {
                    Ordering::Equal => {}
                    o => return o,
                }
                match a.re.total_cmp(&b.re) {
                    Ordering::Equal => {}
                    o => return o,
                }
                match a.im.total_cmp(&b.im) {
                    Ordering::Equal => {}
                    o => return o,
                }
            }
        }
        self.dim().cmp(&other.dim())
    }
}

/// If `g` is within `tol` of a scalar multiple of the identity, return that
/// unit-modulus scalar. Monomial inputs are tested exactly (identity
/// permutation and equal phases) and `tol` is ignored.
pub fn is_scalar_multiple_of_identity(g: &UnitaryElement, tol: f64) -> Option<Complex64> {
    match g {
        UnitaryElement::Monomial(m) => m.as_scalar().map(|p| p.value()),
        UnitaryElement::Dense(m) => {
            let n = m.dim();
            let mut mean = Complex64::new(0.0, 0.0);
            for i in 0..n {
                mean += m.get(i, i);
            }
            mean /= n as f64;
            let norm = mean.norm();
            if norm < 1e-12 {
                return None;
            }
            let lambda = mean / norm;
            let mut sq = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let mut z = m.get(i, j);
                    if i == j {
                        z -= lambda;
                    }
                    sq += z.norm_sqr();
                }
            }
            if sq.sqrt() <= tol {
                Some(lambda)
            } else {
                None
            }
        }
    }
}

/// True iff `||gh - hg|| <= eps_comm`; exact equality test in monomial mode.
pub fn commutes_within(g: &UnitaryElement, h: &UnitaryElement, eps_comm: f64) -> Result<bool> {
    if g.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: h.dim() });
    }
    match (g, h) {
        (UnitaryElement::Monomial(a), UnitaryElement::Monomial(b)) => a.commutes_with(b),
        _ => {
            let gh = g.mul(h)?;
            let hg = h.mul(g)?;
            Ok(gh.distance(&hg)? <= eps_comm)
        }
    }
}

/// Normalize `g` into `SU_n` by dividing by the n-th root of its determinant
/// whose principal argument lies in `[0, 2 pi / n)`.
pub fn su_normalize(g: &UnitaryElement) -> Result<UnitaryElement> {
    let n = g.dim();
    match g {
        UnitaryElement::Monomial(m) => {
            let d = m.det_phase()?;
            // correction c with c^n * det = 1 and arg(c) in [0, 2 pi/n)
            let k = if d.is_zero() { 0 } else { 1 };
            let c = PhaseFrac::new(
                (k as i64)
                    .checked_mul(d.den)
                    .and_then(|v| v.checked_sub(d.num))
                    .ok_or(Error::PhaseOverflow)?,
                d.den.checked_mul(n as i64).ok_or(Error::PhaseOverflow)?,
            )?;
            let scalar = MonomialMatrix::scalar(n, c);
            Ok(UnitaryElement::Monomial(scalar.mul(m)?))
        }
        UnitaryElement::Dense(m) => {
            let det = m.det();
            let norm = det.norm();
            if norm < 0.5 {
                return Err(Error::NumericalBreakdown("determinant far from unit circle".into()));
            }
            let theta = (det / norm).arg();
            let phi = (-theta).rem_euclid(std::f64::consts::TAU) / n as f64;
            let c = Complex64::from_polar(1.0, phi);
            Ok(UnitaryElement::Dense(m.scale(c)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let g = DenseMatrix::from_entries(
            n,
            (0..n * n)
                .map(|_| Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
                .collect(),
        )
        .unwrap();
        // Gram-Schmidt on columns
        let mut cols: Vec<Vec<Complex64>> =
            (0..n).map(|j| (0..n).map(|i| g.get(i, j)).collect()).collect();
        for j in 0..n {
            for k in 0..j {
                let proj: Complex64 = cols[k].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                for i in 0..n {
                    let sub = proj * cols[k][i];
                    cols[j][i] -= sub;
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in &mut cols[j] {
                *z /= norm;
            }
        }
        let mut m = DenseMatrix::zeros(n);
        for j in 0..n {
            for i in 0..n {
                m.set(i, j, cols[j][i]);
            }
        }
        m
    }

    #[test]
    fn norm_is_bi_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let u = random_unitary(4, &mut rng);
            let v = random_unitary(4, &mut rng);
            let m = DenseMatrix::from_entries(
                4,
                (0..16)
                    .map(|_| Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
                    .collect(),
            )
            .unwrap();
            let lhs = u.mul(&m).mul(&v).hs_norm();
            assert!((lhs - m.hs_norm()).abs() <= 1e-9);
        }
    }

    #[test]
    fn norm_is_submultiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let a = DenseMatrix::from_entries(
                3,
                (0..9)
                    .map(|_| Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
                    .collect(),
            )
            .unwrap();
            let b = DenseMatrix::from_entries(
                3,
                (0..9)
                    .map(|_| Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
                    .collect(),
            )
            .unwrap();
            assert!(a.mul(&b).hs_norm() <= a.hs_norm() * b.hs_norm() + 1e-9);
        }
    }

    #[test]
    fn scalar_detection() {
        let id = UnitaryElement::identity(3, false);
        let lam = is_scalar_multiple_of_identity(&id, 1e-9).unwrap();
        assert!((lam - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        // diag(1, -1) is not scalar
        let d = UnitaryElement::Monomial(MonomialMatrix::diagonal(vec![PhaseFrac::ZERO, PhaseFrac::HALF]));
        assert!(is_scalar_multiple_of_identity(&d, 1e-9).is_none());

        // e^{2 pi i/3} id_3 in SU_3
        let w = PhaseFrac::new(1, 3).unwrap();
        let s = UnitaryElement::Monomial(MonomialMatrix::scalar(3, w));
        let lam = is_scalar_multiple_of_identity(&s, 1e-9).unwrap();
        assert!((lam - w.value()).norm() < 1e-12);
        // and the dense route agrees
        let lam = is_scalar_multiple_of_identity(&UnitaryElement::Dense(s.to_dense()), 1e-9).unwrap();
        assert!((lam - w.value()).norm() < 1e-12);
    }

    #[test]
    fn commutation_examples() {
        let n = 2;
        // Pauli-type monomials: X = swap, Z = diag(1, -1)
        let x = UnitaryElement::Monomial(MonomialMatrix::permutation(vec![1, 0]).unwrap());
        let z = UnitaryElement::Monomial(MonomialMatrix::diagonal(vec![PhaseFrac::ZERO, PhaseFrac::HALF]));
        let id = UnitaryElement::identity(n, true);
        assert!(commutes_within(&x, &id, 1e-9).unwrap());
        assert!(!commutes_within(&x, &z, 1e-9).unwrap());
        // ||XZ - ZX|| = 2 sqrt(2)
        let xz = x.mul(&z).unwrap();
        let zx = z.mul(&x).unwrap();
        assert!((xz.distance(&zx).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        // two diagonal matrices commute
        let d1 = UnitaryElement::Monomial(MonomialMatrix::diagonal(vec![
            PhaseFrac::new(1, 5).unwrap(),
            PhaseFrac::new(2, 5).unwrap(),
        ]));
        let d2 = UnitaryElement::Monomial(MonomialMatrix::diagonal(vec![
            PhaseFrac::new(1, 7).unwrap(),
            PhaseFrac::new(3, 7).unwrap(),
        ]));
        assert!(commutes_within(&d1, &d2, 1e-9).unwrap());
    }

    #[test]
    fn su_normalization_is_canonical() {
        // monomial: transposition has det -1; the canonical correction is e^{i pi/2}...
        // check det of the result is exactly 1 and the correction arg sits in [0, 2 pi/n)
        let t = MonomialMatrix::permutation(vec![1, 0]).unwrap();
        let su = su_normalize(&UnitaryElement::Monomial(t)).unwrap();
        let m = su.as_monomial().unwrap();
        assert!(m.det_phase().unwrap().is_zero());
        // dense route on the same matrix gives the same element
        let t = MonomialMatrix::permutation(vec![1, 0]).unwrap();
        let su_dense = su_normalize(&UnitaryElement::Dense(t.to_dense())).unwrap();
        assert!(su.distance(&su_dense).unwrap() < 1e-12);
    }

    #[test]
    fn scalar_gap_on_the_unit_circle() {
        // d(e^{2 pi i r/n} id, id) = |e^{2 pi i r/n} - 1| sqrt(n) >= 2/sqrt(n)
        for n in 2..=50usize {
            for r in 1..n {
                let s = UnitaryElement::Monomial(MonomialMatrix::scalar(
                    n,
                    PhaseFrac::new(r as i64, n as i64).unwrap(),
                ));
                let d = s.distance_to_identity();
                assert!(d >= 2.0 / (n as f64).sqrt(), "gap violated at n={n} r={r}");
            }
        }
    }

    #[test]
    fn canonical_order_is_total_and_mode_consistent() {
        let x = MonomialMatrix::permutation(vec![1, 0]).unwrap();
        let z = MonomialMatrix::diagonal(vec![PhaseFrac::ZERO, PhaseFrac::HALF]);
        let ex = UnitaryElement::Monomial(x.clone());
        let ez = UnitaryElement::Monomial(z.clone());
        let dx = UnitaryElement::Dense(x.to_dense());
        let dz = UnitaryElement::Dense(z.to_dense());
        assert_eq!(ex.canonical_cmp(&ez), dx.canonical_cmp(&dz));
        assert_eq!(ex.canonical_cmp(&ez), ez.canonical_cmp(&ex).reverse());
        assert_eq!(ex.canonical_cmp(&dx), Ordering::Equal);
    }
}

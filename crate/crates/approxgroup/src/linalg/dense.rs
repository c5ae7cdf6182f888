//! Dense square complex matrices with Hilbert-Schmidt geometry.

use crate::error::Error;
use crate::Result;
use num_complex::Complex;

/// Complex scalar used throughout; `re` and `im` are finite f64 values.
pub type Complex64 = Complex<f64>;

/// A square complex matrix stored row-major. All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl DenseMatrix {
    /// Build from a row-major entry vector; rejects non-square or non-finite data.
    pub fn from_entries(n: usize, entries: Vec<Complex64>) -> Result<DenseMatrix> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: entries.len() });
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(DenseMatrix { n, entries })
    }

    pub fn zeros(n: usize) -> DenseMatrix {
        DenseMatrix { n, entries: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix product");
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        // k-before-j loop order keeps the inner loop contiguous in both operands
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.entries[k * n..(k + 1) * n];
                let dst = &mut out.entries[i * n..(i + 1) * n];
                for j in 0..n {
                    dst[j] += a * row[j];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> DenseMatrix {
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        out
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix difference");
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect();
        DenseMatrix { n: self.n, entries }
    }

    pub fn scale(&self, c: Complex64) -> DenseMatrix {
        DenseMatrix { n: self.n, entries: self.entries.iter().map(|z| z * c).collect() }
    }

    /// Hilbert-Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Residual of the unitarity equation `M* M = I`.
    pub fn unitarity_residual(&self) -> f64 {
        let mut sum = 0.0;
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let mut dot = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    dot += self.entries[k * n + i].conj() * self.entries[k * n + j];
                }
                if i == j {
                    dot -= Complex64::new(1.0, 0.0);
                }
                sum += dot.norm_sqr();
            }
        }
        sum.sqrt()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> Complex64 {
        let n = self.n;
        let mut work = self.entries.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..n {
            let (mut p, mut best) = (col, work[col * n + col].norm_sqr());
            for r in col + 1..n {
                let v = work[r * n + col].norm_sqr();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if p != col {
                for j in 0..n {
                    work.swap(col * n + j, p * n + j);
                }
                det = -det;
            }
            let pivot = work[col * n + col];
            det *= pivot;
            for r in col + 1..n {
                let f = work[r * n + col] / pivot;
                for j in col..n {
                    let sub = f * work[col * n + j];
                    work[r * n + j] -= sub;
                }
            }
        }
        det
    }
}

/// Hilbert-Schmidt norm `(sum |m_ij|^2)^{1/2}` of a matrix.
pub fn hs_norm(m: &DenseMatrix) -> f64 {
    m.hs_norm()
}

/// Hilbert-Schmidt distance `||M1 - M2||`. Errors on dimension mismatch.
pub fn hs_distance(m1: &DenseMatrix, m2: &DenseMatrix) -> Result<f64> {
    if m1.dim() != m2.dim() {
        return Err(Error::DimensionMismatch { expected: m1.dim(), got: m2.dim() });
    }
    Ok(m1.sub(m2).hs_norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_norm_is_sqrt_n() {
        // every unitary matrix has norm sqrt(n); check the identity in U_3
        let id3 = DenseMatrix::identity(3);
        assert!((hs_norm(&id3) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(hs_norm(&DenseMatrix::zeros(4)), 0.0);
        // diag(1, -1)
        let d = DenseMatrix::from_entries(
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-1.0, 0.0),
            ],
        )
        .unwrap();
        assert!((hs_norm(&d) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn distance_examples() {
        let id = DenseMatrix::identity(4);
        assert_eq!(hs_distance(&id, &id).unwrap(), 0.0);
        // (i*id_4, id_4) -> |e^{2 pi i/4} - 1| * sqrt(4) = 2 sqrt(2)
        let i_id = id.scale(Complex64::new(0.0, 1.0));
        let d = hs_distance(&i_id, &id).unwrap();
        assert!((d - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!(hs_distance(&id, &DenseMatrix::identity(3)).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(DenseMatrix::from_entries(2, vec![Complex64::new(1.0, 0.0); 3]).is_err());
        assert!(DenseMatrix::from_entries(1, vec![Complex64::new(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn det_of_diagonal() {
        let d = DenseMatrix::from_entries(
            2,
            vec![
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
            ],
        )
        .unwrap();
        let det = d.det();
        assert!((det - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }
}

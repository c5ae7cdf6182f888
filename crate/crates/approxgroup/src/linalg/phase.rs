//! Exact rotation numbers: rationals p/q standing for the unit complex number
//! e^{2*pi*i*p/q}, always reduced with 0 <= p < q.

use crate::error::Error;
use crate::Result;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

/// A root of unity stored as a reduced fraction of a full turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhaseFrac {
    /// Numerator, `0 <= num < den`.
    pub num: i64,
    /// Denominator, `den >= 1`.
    pub den: i64,
}

impl Ord for PhaseFrac {
    /// Exact comparison of the rotation numbers in `[0, 1)`.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl PartialOrd for PhaseFrac {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl PhaseFrac {
    pub const ZERO: PhaseFrac = PhaseFrac { num: 0, den: 1 };
    /// Half turn, i.e. -1.
    pub const HALF: PhaseFrac = PhaseFrac { num: 1, den: 2 };

    /// Build `p/q` reduced modulo one full turn. `q` must be nonzero.
    pub fn new(p: i64, q: i64) -> Result<PhaseFrac> {
        if q == 0 {
            return Err(Error::InvalidInput("phase denominator must be nonzero".into()));
        }
        let (mut p, mut q) = if q < 0 { (-(p as i128), -(q as i128)) } else { (p as i128, q as i128) };
        p = p.rem_euclid(q);
        let g = (p as i128).gcd(&q);
        if g > 1 {
            p /= g;
            q /= g;
        }
        let (num, den) = (i64::try_from(p), i64::try_from(q));
        match (num, den) {
            (Ok(num), Ok(den)) => Ok(PhaseFrac { num, den }),
            _ => Err(Error::PhaseOverflow),
        }
    }

    /// Sum of rotation numbers, i.e. the product of the unit complex values.
    pub fn add(self, other: PhaseFrac) -> Result<PhaseFrac> {
        let den = (self.den as i128) * (other.den as i128);
        let num = (self.num as i128) * (other.den as i128) + (other.num as i128) * (self.den as i128);
        let num = num.rem_euclid(den);
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        match (i64::try_from(num), i64::try_from(den)) {
            (Ok(num), Ok(den)) => Ok(PhaseFrac { num, den }),
            _ => Err(Error::PhaseOverflow),
        }
    }

    /// Complex conjugate (negated rotation).
    pub fn neg(self) -> PhaseFrac {
        if self.num == 0 {
            self
        } else {
            PhaseFrac { num: self.den - self.num, den: self.den }
        }
    }

    /// `k`-fold sum of this rotation.
    pub fn mul_int(self, k: i64) -> Result<PhaseFrac> {
        PhaseFrac::new(
            i64::try_from((self.num as i128 * k as i128).rem_euclid(self.den as i128))
                .map_err(|_| Error::PhaseOverflow)?,
            self.den,
        )
    }

    /// Exact fraction of a full turn in `[0, 1)`.
    pub fn turns(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// The unit complex number `e^{2 pi i num/den}`.
    pub fn value(self) -> num_complex::Complex<f64> {
        let (s, c) = (std::f64::consts::TAU * self.turns()).sin_cos();
        num_complex::Complex::new(c, s)
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }
}

//! Finite deduplicated sets of unitary elements and their product-set algebra.

mod certify;
mod index;

pub use certify::{
    certify_approximate, verify_control, ApproxCertificate, ControlCertificate, ControlOutcome,
};

use crate::error::Error;
use crate::linalg::{DenseMatrix, UnitaryElement};
use crate::Result;
use index::{ExactIndex, SetIndex, TolerantIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How two stored matrices are decided equal. The ambient group is a
/// continuum, so any finite representation must pick an identification rule:
/// exact monomial data, or Hilbert-Schmidt distance below `eps_eq`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EqualityRegime {
    Exact,
    Tolerant { eps_eq: f64 },
}

impl EqualityRegime {
    pub fn tolerant(eps_eq: f64) -> Result<EqualityRegime> {
        if eps_eq > 0.0 && eps_eq.is_finite() {
            Ok(EqualityRegime::Tolerant { eps_eq })
        } else {
            Err(Error::InvalidInput("eps_eq must be positive".into()))
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, EqualityRegime::Exact)
    }
}

/// A finite set of unitary elements, deduplicated under the regime.
///
/// Tolerant equality is not transitive; identification is first-match-wins
/// against insertion order, so the stored contents depend on the order of
/// insertion. Certification entry points sort into canonical order first to
/// restore determinism.
#[derive(Debug, Clone)]
pub struct MatrixSet {
    dim: usize,
    regime: EqualityRegime,
    elements: Vec<UnitaryElement>,
    index: SetIndex,
    /// Set when this set is known to be closed under multiplication
    /// (e.g. it came out of a group closure); lets product and power
    /// operations short-circuit. Purely an optimization hint.
    closed_hint: bool,
}

impl MatrixSet {
    pub fn new(dim: usize, regime: EqualityRegime) -> MatrixSet {
        let index = match regime {
            EqualityRegime::Exact => SetIndex::Exact(ExactIndex::new()),
            EqualityRegime::Tolerant { eps_eq } => SetIndex::Tolerant(TolerantIndex::new(eps_eq)),
        };
        MatrixSet { dim, regime, elements: Vec::new(), index, closed_hint: false }
    }

    pub fn from_elements<I>(dim: usize, regime: EqualityRegime, elements: I) -> Result<MatrixSet>
    where
        I: IntoIterator<Item = UnitaryElement>,
    {
        let mut s = MatrixSet::new(dim, regime);
        for g in elements {
            s.insert(g)?;
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn regime(&self) -> EqualityRegime {
        self.regime
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, i: usize) -> &UnitaryElement {
        &self.elements[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &UnitaryElement> {
        self.elements.iter()
    }

    pub fn elements(&self) -> &[UnitaryElement] {
        &self.elements
    }

    pub(crate) fn closed_hint(&self) -> bool {
        self.closed_hint
    }

    pub(crate) fn set_closed_hint(&mut self, v: bool) {
        self.closed_hint = v;
    }

    fn check_kind(&self, g: &UnitaryElement) -> Result<()> {
        if g.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: g.dim() });
        }
        match (self.regime, g) {
            (EqualityRegime::Exact, UnitaryElement::Monomial(_)) => Ok(()),
            (EqualityRegime::Tolerant { .. }, UnitaryElement::Dense(_)) => Ok(()),
            _ => Err(Error::KindMismatch),
        }
    }

    /// Index of the stored element equal to `g` under the regime, if any.
    /// With tolerant equality the earliest-inserted match wins.
    pub fn find(&self, g: &UnitaryElement) -> Result<Option<usize>> {
        self.check_kind(g)?;
        Ok(match &self.index {
            SetIndex::Exact(ix) => ix.find(&self.elements, g.as_monomial().expect("kind checked")),
            SetIndex::Tolerant(ix) => ix.find(&self.elements, g),
        })
    }

    pub fn contains(&self, g: &UnitaryElement) -> Result<bool> {
        Ok(self.find(g)?.is_some())
    }

    /// Stored indices within `radius` of `g` (tolerant sets only; exact sets
    /// report the exact match, if any).
    pub(crate) fn lookup_within_radius(&self, g: &UnitaryElement, radius: f64) -> Vec<usize> {
        match &self.index {
            SetIndex::Tolerant(ix) => ix
                .lookup_within(&self.elements, g, radius)
                .into_iter()
                .map(|(i, _)| i)
                .collect(),
            SetIndex::Exact(_) => self.find(g).ok().flatten().into_iter().collect(),
        }
    }

    /// Insert unless an existing element equals `g` under the regime.
    /// Returns whether the set grew.
    pub fn insert(&mut self, g: UnitaryElement) -> Result<bool> {
        if self.find(&g)?.is_some() {
            return Ok(false);
        }
        let idx = self.elements.len();
        match (&mut self.index, &g) {
            (SetIndex::Exact(ix), UnitaryElement::Monomial(m)) => ix.insert(m, idx),
            (SetIndex::Tolerant(ix), _) => ix.insert(&g, idx),
            _ => unreachable!("kind checked in find"),
        }
        self.elements.push(g);
        self.closed_hint = false;
        Ok(true)
    }

    /// The identity element in this set's representation kind.
    pub fn identity_element(&self) -> UnitaryElement {
        UnitaryElement::identity(self.dim, self.regime.is_exact())
    }

    pub fn contains_identity(&self) -> Result<bool> {
        self.contains(&self.identity_element())
    }

    /// Index of the first element whose inverse is missing, or `None` if the
    /// set is symmetric.
    pub fn symmetry_defect(&self) -> Result<Option<usize>> {
        for (i, g) in self.elements.iter().enumerate() {
            if !self.contains(&g.inverse())? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Checks symmetry and identity membership, the two approximate-group
    /// structure preconditions.
    pub fn require_symmetric_with_identity(&self) -> Result<()> {
        if !self.contains_identity()? {
            return Err(Error::MissingIdentity);
        }
        if let Some(index) = self.symmetry_defect()? {
            return Err(Error::NotSymmetric { index });
        }
        Ok(())
    }

    /// Indices `0..len` sorted into canonical order (rounded-entry
    /// lexicographic; identical for exact and tolerant renderings of the same
    /// family).
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.elements.len()).collect();
        idx.sort_by(|&a, &b| self.elements[a].canonical_cmp(&self.elements[b]));
        idx
    }

    /// The same set with elements stored in canonical order.
    pub fn canonicalized(&self) -> MatrixSet {
        let order = self.canonical_order();
        let mut out = MatrixSet::new(self.dim, self.regime);
        for i in order {
            // re-inserting a deduplicated set cannot merge further
            out.insert(self.elements[i].clone()).expect("kind invariants preserved");
        }
        out.closed_hint = self.closed_hint;
        out
    }

    /// Render every element dense and re-key the set under a tolerant regime.
    pub fn to_tolerant(&self, eps_eq: f64) -> Result<MatrixSet> {
        let regime = EqualityRegime::tolerant(eps_eq)?;
        let mut out = MatrixSet::new(self.dim, regime);
        for g in &self.elements {
            out.insert(UnitaryElement::Dense(g.to_dense()))?;
        }
        out.closed_hint = self.closed_hint;
        Ok(out)
    }

    /// Exact minimum pairwise distance when the set is small, otherwise a
    /// grid-probe bound: the returned value is exact if some pair sits within
    /// `probe_radius`, and is `probe_radius` itself (a certified lower bound)
    /// if no pair does.
    pub fn min_pairwise_distance(&self, probe_radius: f64) -> MinDistance {
        let n = self.elements.len();
        if n < 2 {
            return MinDistance { value: f64::INFINITY, exact: true };
        }
        if n <= 2048 {
            let mut best = f64::INFINITY;
            for i in 0..n {
                for j in i + 1..n {
                    let d = self.elements[i].distance(&self.elements[j]).unwrap_or(f64::INFINITY);
                    if d < best {
                        best = d;
                    }
                }
            }
            return MinDistance { value: best, exact: true };
        }
        let mut ix = TolerantIndex::new(probe_radius / 16.0);
        for (i, g) in self.elements.iter().enumerate() {
            ix.insert(g, i);
        }
        let mut best = f64::INFINITY;
        for (i, g) in self.elements.iter().enumerate() {
            for (j, d) in ix.lookup_within(&self.elements, g, probe_radius) {
                if j != i && d < best {
                    best = d;
                }
            }
        }
        if best.is_finite() {
            MinDistance { value: best, exact: true }
        } else {
            MinDistance { value: probe_radius, exact: false }
        }
    }
}

/// Result of a minimum-pairwise-distance query.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MinDistance {
    pub value: f64,
    /// False when `value` is only a certified lower bound.
    pub exact: bool,
}

fn require_compatible(a: &MatrixSet, b: &MatrixSet) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    if a.regime != b.regime {
        return Err(Error::RegimeMismatch);
    }
    Ok(())
}

/// The deduplicated product set `{g h : g in s1, h in s2}`, computed in
/// deterministic (i, j) order with the pair grid evaluated in parallel row
/// batches. Errors with `CapExceeded` when the result outgrows `cap`.
pub fn product_set(s1: &MatrixSet, s2: &MatrixSet, cap: usize) -> Result<MatrixSet> {
    require_compatible(s1, s2)?;
    if std::ptr::eq(s1, s2) && s1.closed_hint {
        return Ok(s1.clone());
    }
    let mut out = MatrixSet::new(s1.dim, s1.regime);
    let batch = (1usize << 22) / (s2.len().max(1) * s1.dim * s1.dim).max(1);
    let batch = batch.clamp(1, 64);
    let rows: Vec<usize> = (0..s1.len()).collect();
    for chunk in rows.chunks(batch) {
        let products: Vec<Vec<UnitaryElement>> = chunk
            .par_iter()
            .map(|&i| {
                s2.elements
                    .iter()
                    .map(|h| s1.elements[i].mul(h))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for row in products {
            for g in row {
                out.insert(g)?;
                if out.len() > cap {
                    return Err(Error::CapExceeded { partial: out.len(), cap });
                }
            }
        }
    }
    if std::ptr::eq(s1, s2) && out.len() == s1.len() && s1.contains_identity()? {
        // id in S forces S ⊆ S*S; equal cardinalities then give S*S = S
        out.closed_hint = true;
    }
    Ok(out)
}

/// `s^k` by iterated products, aborting with `CapExceeded` (carrying the
/// partial size) if an intermediate set outgrows `cap`.
pub fn power_set(s: &MatrixSet, k: usize, cap: usize) -> Result<MatrixSet> {
    if k == 0 {
        let mut out = MatrixSet::new(s.dim, s.regime);
        out.insert(s.identity_element())?;
        return Ok(out);
    }
    if s.closed_hint {
        return Ok(s.clone());
    }
    let mut acc = s.clone();
    let has_id = s.contains_identity()?;
    for _ in 1..k {
        let next = product_set(&acc, s, cap)?;
        if has_id && next.len() == acc.len() {
            // the chain s ⊆ s^2 ⊆ ... stabilized; all later powers are equal
            acc.closed_hint = true;
            return Ok(acc);
        }
        acc = next;
    }
    Ok(acc)
}

/// `s ∪ s^{-1} ∪ {id}`, deduplicated. The empty set symmetrizes to `{id}`.
pub fn symmetrize(s: &MatrixSet) -> Result<MatrixSet> {
    let mut out = MatrixSet::new(s.dim, s.regime);
    out.insert(s.identity_element())?;
    for g in &s.elements {
        out.insert(g.clone())?;
        out.insert(g.inverse())?;
    }
    Ok(out)
}

mod json {
    //! JSON wire format:
    //! `{ "dim": n, "mode": "exact"|"tolerant", "eps_eq": float?, "elements": [...] }`
    //! where each element is either `{"perm": [1-based], "phases": [{"num","den"}]}`
    //! or `{"entries": [[[re, im], ...], ...]}`. Exact-mode round-trips are
    //! loss-free.

    use super::*;
    use crate::linalg::{Complex64, MonomialMatrix, PhaseFrac};

    #[derive(Serialize, Deserialize)]
    struct SetJson {
        dim: usize,
        mode: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps_eq: Option<f64>,
        elements: Vec<ElementJson>,
    }

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum ElementJson {
        Monomial { perm: Vec<u32>, phases: Vec<PhaseFrac> },
        Dense { entries: Vec<Vec<[f64; 2]>> },
    }

    impl Serialize for MatrixSet {
        fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
            let (mode, eps_eq) = match self.regime {
                EqualityRegime::Exact => ("exact".to_string(), None),
                EqualityRegime::Tolerant { eps_eq } => ("tolerant".to_string(), Some(eps_eq)),
            };
            let elements = self
                .elements
                .iter()
                .map(|g| match g {
                    UnitaryElement::Monomial(m) => ElementJson::Monomial {
                        perm: m.perm().iter().map(|&p| p + 1).collect(),
                        phases: m.phases().to_vec(),
                    },
                    UnitaryElement::Dense(d) => ElementJson::Dense {
                        entries: (0..d.dim())
                            .map(|i| (0..d.dim()).map(|j| [d.get(i, j).re, d.get(i, j).im]).collect())
                            .collect(),
                    },
                })
                .collect();
            SetJson { dim: self.dim, mode, eps_eq, elements }.serialize(ser)
        }
    }

    impl<'de> Deserialize<'de> for MatrixSet {
        fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
            use serde::de::Error as DeError;
            let raw = SetJson::deserialize(de)?;
            let regime = match raw.mode.as_str() {
                "exact" => EqualityRegime::Exact,
                "tolerant" => EqualityRegime::tolerant(raw.eps_eq.unwrap_or(1e-6))
                    .map_err(|e| D::Error::custom(e.to_string()))?,
                other => return Err(D::Error::custom(format!("unknown mode {other:?}"))),
            };
            let mut set = MatrixSet::new(raw.dim, regime);
            for e in raw.elements {
                let g = match e {
                    ElementJson::Monomial { perm, phases } => {
                        let perm: Vec<u32> = perm
                            .into_iter()
                            .map(|p| p.checked_sub(1).ok_or_else(|| D::Error::custom("perm is 1-based")))
                            .collect::<std::result::Result<_, _>>()?;
                        let phases = phases
                            .into_iter()
                            .map(|p| PhaseFrac::new(p.num, p.den))
                            .collect::<Result<Vec<_>>>()
                            .map_err(|e| D::Error::custom(e.to_string()))?;
                        UnitaryElement::Monomial(
                            MonomialMatrix::new(perm, phases).map_err(|e| D::Error::custom(e.to_string()))?,
                        )
                    }
                    ElementJson::Dense { entries } => {
                        let n = raw.dim;
                        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
                            return Err(D::Error::custom("entry grid is not n x n"));
                        }
                        let flat: Vec<Complex64> = entries
                            .iter()
                            .flat_map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)))
                            .collect();
                        let m = DenseMatrix::from_entries(n, flat)
                            .map_err(|e| D::Error::custom(e.to_string()))?;
                        UnitaryElement::Dense(m)
                    }
                };
                set.insert(g).map_err(|e| D::Error::custom(e.to_string()))?;
            }
            Ok(set)
        }
    }
}

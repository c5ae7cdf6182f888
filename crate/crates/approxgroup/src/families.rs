//! Named generators of exact test families used as oracles and fixtures:
//! symmetric groups, dihedral groups, the quaternion group, clock-and-shift
//! Heisenberg groups, diagonal product groups, and seeded random unitary
//! pairs (the only tolerant-mode family).

use crate::error::Error;
use crate::jordan::{group_closure, FiniteGroupSet};
use crate::linalg::{Complex64, DenseMatrix, MonomialMatrix, PhaseFrac, UnitaryElement};
use crate::sets::{symmetrize, EqualityRegime, MatrixSet};
use crate::Result;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A named test family. Parameter ranges: `SymmetricGroup(n)` computes its
/// full closure only for `n <= 8`; `ClockShiftHeisenberg(m)` accepts
/// `m <= 101`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilySpec {
    SymmetricGroup(usize),
    Dihedral(usize),
    Quaternion8,
    ClockShiftHeisenberg(usize),
    /// One generator per slot: `diag(.., zeta_{o_i}, ..)` with the i-th slot
    /// carrying a primitive `o_i`-th root of unity. Generates the product of
    /// cyclic groups of the given orders.
    DiagonalCyclic(Vec<u64>),
    RandomUnitaryPair { dim: usize, seed: u64 },
    DirectProduct(Vec<FamilySpec>),
}

impl FamilySpec {
    /// Parse CLI syntax: `sym:N`, `dih:M`, `q8`, `heis:M`, `diag:O1,O2,...`,
    /// `randpair:N:SEED`, `prod:SPEC;SPEC[;...]` (product parts may not nest).
    pub fn parse(s: &str) -> Result<FamilySpec> {
        let bad = |m: &str| Error::InvalidSpec(format!("{m}: {s:?}"));
        if s == "q8" {
            return Ok(FamilySpec::Quaternion8);
        }
        if let Some(rest) = s.strip_prefix("prod:") {
            let parts = rest
                .split(';')
                .map(|p| {
                    if p.starts_with("prod:") {
                        Err(bad("nested products are not supported"))
                    } else {
                        FamilySpec::parse(p)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if parts.len() < 2 {
                return Err(bad("product needs at least two factors"));
            }
            return Ok(FamilySpec::DirectProduct(parts));
        }
        if let Some(rest) = s.strip_prefix("sym:") {
            let n: usize = rest.parse().map_err(|_| bad("bad symmetric degree"))?;
            return Ok(FamilySpec::SymmetricGroup(n));
        }
        if let Some(rest) = s.strip_prefix("dih:") {
            let m: usize = rest.parse().map_err(|_| bad("bad dihedral order"))?;
            return Ok(FamilySpec::Dihedral(m));
        }
        if let Some(rest) = s.strip_prefix("heis:") {
            let m: usize = rest.parse().map_err(|_| bad("bad Heisenberg modulus"))?;
            return Ok(FamilySpec::ClockShiftHeisenberg(m));
        }
        if let Some(rest) = s.strip_prefix("diag:") {
            let orders = rest
                .split(',')
                .map(|o| o.parse::<u64>().map_err(|_| bad("bad diagonal order")))
                .collect::<Result<Vec<_>>>()?;
            return Ok(FamilySpec::DiagonalCyclic(orders));
        }
        if let Some(rest) = s.strip_prefix("randpair:") {
            let mut it = rest.split(':');
            let dim = it
                .next()
                .and_then(|v| v.parse::<usize>().ok())
                .ok_or_else(|| bad("bad randpair dimension"))?;
            let seed = it
                .next()
                .and_then(|v| v.parse::<u64>().ok())
                .ok_or_else(|| bad("bad randpair seed"))?;
            if it.next().is_some() {
                return Err(bad("randpair takes exactly dim and seed"));
            }
            return Ok(FamilySpec::RandomUnitaryPair { dim, seed });
        }
        Err(bad("unknown family"))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        match self {
            FamilySpec::SymmetricGroup(n) => {
                if !(2..=8).contains(n) {
                    return bad(format!("symmetric degree {n} outside 2..=8"));
                }
            }
            FamilySpec::Dihedral(m) => {
                if *m < 3 || *m > 1000 {
                    return bad(format!("dihedral parameter {m} outside 3..=1000"));
                }
            }
            FamilySpec::Quaternion8 => {}
            FamilySpec::ClockShiftHeisenberg(m) => {
                if *m < 2 || *m > 101 {
                    return bad(format!("Heisenberg modulus {m} outside 2..=101"));
                }
            }
            FamilySpec::DiagonalCyclic(orders) => {
                if orders.is_empty() || orders.iter().any(|&o| o == 0) {
                    return bad("diagonal orders must be positive".into());
                }
            }
            FamilySpec::RandomUnitaryPair { dim, .. } => {
                if *dim < 2 || *dim > 16 {
                    return bad(format!("random pair dimension {dim} outside 2..=16"));
                }
            }
            FamilySpec::DirectProduct(parts) => {
                if parts.len() < 2 {
                    return bad("product needs at least two factors".into());
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Matrix dimension of the representation.
    pub fn dim(&self) -> usize {
        match self {
            FamilySpec::SymmetricGroup(n) => *n,
            FamilySpec::Dihedral(_) | FamilySpec::Quaternion8 => 2,
            FamilySpec::ClockShiftHeisenberg(m) => *m,
            FamilySpec::DiagonalCyclic(orders) => orders.len(),
            FamilySpec::RandomUnitaryPair { dim, .. } => *dim,
            FamilySpec::DirectProduct(parts) => parts.iter().map(|p| p.dim()).sum(),
        }
    }

    /// Exact group order, when the family is exact and the order is known.
    pub fn order(&self) -> Option<u64> {
        match self {
            FamilySpec::SymmetricGroup(n) => Some((1..=*n as u64).product()),
            FamilySpec::Dihedral(m) => Some(2 * *m as u64),
            FamilySpec::Quaternion8 => Some(8),
            FamilySpec::ClockShiftHeisenberg(m) => Some((*m as u64).pow(3)),
            FamilySpec::DiagonalCyclic(orders) => {
                orders.iter().copied().reduce(|a, b| a.saturating_mul(b))
            }
            FamilySpec::RandomUnitaryPair { .. } => None,
            FamilySpec::DirectProduct(parts) => parts
                .iter()
                .map(|p| p.order())
                .collect::<Option<Vec<_>>>()
                .map(|os| os.into_iter().fold(1u64, |a, b| a.saturating_mul(b))),
        }
    }

    fn is_exact(&self) -> bool {
        match self {
            FamilySpec::RandomUnitaryPair { .. } => false,
            FamilySpec::DirectProduct(parts) => parts.iter().all(|p| p.is_exact()),
            _ => true,
        }
    }
}

/// A built family: symmetric generator set (with identity) and, when the
/// order fits under the cap, the full closure.
#[derive(Debug, Clone)]
pub struct FamilyBuild {
    pub spec: FamilySpec,
    pub generators: MatrixSet,
    pub closure: Option<FiniteGroupSet>,
}

fn monomial_generators(spec: &FamilySpec) -> Result<Vec<MonomialMatrix>> {
    match spec {
        FamilySpec::SymmetricGroup(n) => Ok((0..n - 1)
            .map(|i| {
                let mut p: Vec<u32> = (0..*n as u32).collect();
                p.swap(i, i + 1);
                MonomialMatrix::permutation(p).expect("valid transposition")
            })
            .collect()),
        FamilySpec::Dihedral(m) => {
            let m = *m as i64;
            let rot =
                MonomialMatrix::diagonal(vec![PhaseFrac::new(1, m)?, PhaseFrac::new(m - 1, m)?]);
            let flip = MonomialMatrix::permutation(vec![1, 0])?;
            Ok(vec![rot, flip])
        }
        FamilySpec::Quaternion8 => {
            let quarter = PhaseFrac::new(1, 4)?;
            let ix = MonomialMatrix::new(vec![1, 0], vec![quarter, quarter])?;
            let iz = MonomialMatrix::diagonal(vec![quarter, PhaseFrac::new(3, 4)?]);
            Ok(vec![ix, iz])
        }
        FamilySpec::ClockShiftHeisenberg(m) => {
            let clock = MonomialMatrix::diagonal(
                (0..*m as i64).map(|k| PhaseFrac::new(k, *m as i64)).collect::<Result<_>>()?,
            );
            let shift =
                MonomialMatrix::permutation((0..*m as u32).map(|j| (j + 1) % *m as u32).collect())?;
            Ok(vec![clock, shift])
        }
        FamilySpec::DiagonalCyclic(orders) => {
            let n = orders.len();
            Ok(orders
                .iter()
                .enumerate()
                .map(|(i, &o)| {
                    let mut phases = vec![PhaseFrac::ZERO; n];
                    phases[i] = PhaseFrac::new(1, o as i64).expect("validated order");
                    MonomialMatrix::diagonal(phases)
                })
                .collect())
        }
        FamilySpec::RandomUnitaryPair { .. } | FamilySpec::DirectProduct(_) => {
            Err(Error::InvalidSpec("not a flat monomial family".into()))
        }
    }
}

/// Embed a monomial into a larger dimension at a block offset (identity
/// elsewhere).
fn embed_monomial(m: &MonomialMatrix, total: usize, offset: usize) -> Result<MonomialMatrix> {
    let mut perm: Vec<u32> = (0..total as u32).collect();
    let mut phases = vec![PhaseFrac::ZERO; total];
    for j in 0..m.dim() {
        perm[offset + j] = m.perm()[j] + offset as u32;
        phases[offset + j] = m.phases()[j];
    }
    MonomialMatrix::new(perm, phases)
}

fn embed_dense(m: &DenseMatrix, total: usize, offset: usize) -> DenseMatrix {
    let mut out = DenseMatrix::identity(total);
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            out.set(offset + i, offset + j, m.get(i, j));
        }
    }
    out
}

/// Haar-like random unitary: QR of a complex Ginibre sample via modified
/// Gram-Schmidt.
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
                .collect()
        })
        .collect();
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

/// Raw generators of a family (no identity, no inverses), in the family's
/// natural representation kind.
fn raw_generators(spec: &FamilySpec, eps_eq: f64) -> Result<Vec<UnitaryElement>> {
    match spec {
        FamilySpec::RandomUnitaryPair { dim, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok(vec![
                UnitaryElement::Dense(haar_unitary(*dim, &mut rng)),
                UnitaryElement::Dense(haar_unitary(*dim, &mut rng)),
            ])
        }
        FamilySpec::DirectProduct(parts) => {
            let total = spec.dim();
            let exact = spec.is_exact();
            let mut out = Vec::new();
            let mut offset = 0usize;
            for p in parts {
                for g in raw_generators(p, eps_eq)? {
                    let emb = if exact {
                        UnitaryElement::Monomial(embed_monomial(
                            g.as_monomial().expect("exact product of exact parts"),
                            total,
                            offset,
                        )?)
                    } else {
                        UnitaryElement::Dense(embed_dense(&g.to_dense(), total, offset))
                    };
                    out.push(emb);
                }
                offset += p.dim();
            }
            Ok(out)
        }
        _ => Ok(monomial_generators(spec)?.into_iter().map(UnitaryElement::Monomial).collect()),
    }
}

/// Build the family: a symmetrized generator set containing the identity,
/// plus the full closure when the family is exact and its order is at most
/// `closure_cap`.
pub fn build(spec: &FamilySpec, eps_eq: f64, closure_cap: usize) -> Result<FamilyBuild> {
    spec.validate()?;
    let dim = spec.dim();
    let regime =
        if spec.is_exact() { EqualityRegime::Exact } else { EqualityRegime::tolerant(eps_eq)? };
    let raw = raw_generators(spec, eps_eq)?;
    let base = MatrixSet::from_elements(dim, regime, raw)?;
    let generators = symmetrize(&base)?;
    let closure = if spec.is_exact() && spec.order().is_some_and(|o| o as usize <= closure_cap) {
        Some(group_closure(&generators, closure_cap)?)
    } else {
        None
    };
    Ok(FamilyBuild { spec: spec.clone(), generators, closure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jordan::{is_abelian_set, jordan_abelian_subgroup};
    use crate::linalg::is_scalar_multiple_of_identity;
    use crate::tol::Tolerances;

    #[test]
    fn parse_round_trips() {
        assert_eq!(FamilySpec::parse("sym:3").unwrap(), FamilySpec::SymmetricGroup(3));
        assert_eq!(FamilySpec::parse("q8").unwrap(), FamilySpec::Quaternion8);
        assert_eq!(FamilySpec::parse("heis:5").unwrap(), FamilySpec::ClockShiftHeisenberg(5));
        assert_eq!(
            FamilySpec::parse("diag:101,101").unwrap(),
            FamilySpec::DiagonalCyclic(vec![101, 101])
        );
        assert_eq!(
            FamilySpec::parse("randpair:2:42").unwrap(),
            FamilySpec::RandomUnitaryPair { dim: 2, seed: 42 }
        );
        assert_eq!(
            FamilySpec::parse("prod:sym:3;diag:5").unwrap(),
            FamilySpec::DirectProduct(vec![
                FamilySpec::SymmetricGroup(3),
                FamilySpec::DiagonalCyclic(vec![5])
            ])
        );
        assert!(FamilySpec::parse("nope:1").is_err());
        assert!(FamilySpec::parse("prod:sym:3").is_err());
    }

    #[test]
    fn closure_orders() {
        let b = build(&FamilySpec::SymmetricGroup(3), 1e-6, 10_000).unwrap();
        assert_eq!(b.closure.unwrap().order(), 6);

        let b = build(&FamilySpec::Quaternion8, 1e-6, 10_000).unwrap();
        let c = b.closure.unwrap();
        assert_eq!(c.order(), 8);
        // center enumeration: exactly {id, -id}
        let center: Vec<_> =
            c.base.iter().filter(|g| is_scalar_multiple_of_identity(g, 1e-9).is_some()).collect();
        assert_eq!(center.len(), 2);

        let b = build(&FamilySpec::ClockShiftHeisenberg(5), 1e-6, 10_000).unwrap();
        let c = b.closure.unwrap();
        assert_eq!(c.order(), 125);
        let center =
            c.base.iter().filter(|g| is_scalar_multiple_of_identity(g, 1e-9).is_some()).count();
        assert_eq!(center, 5);
    }

    #[test]
    fn closures_are_symmetric_groups_with_identity() {
        for spec in [
            FamilySpec::SymmetricGroup(4),
            FamilySpec::Dihedral(7),
            FamilySpec::Quaternion8,
            FamilySpec::ClockShiftHeisenberg(3),
            FamilySpec::DiagonalCyclic(vec![4, 6]),
            FamilySpec::DirectProduct(vec![
                FamilySpec::Quaternion8,
                FamilySpec::DiagonalCyclic(vec![3]),
            ]),
        ] {
            let b = build(&spec, 1e-6, 100_000).unwrap();
            let c = b.closure.expect("small closure");
            assert!(c.closed);
            c.base.require_symmetric_with_identity().unwrap();
            let sq = crate::sets::product_set(&c.base, &c.base, usize::MAX).unwrap();
            assert_eq!(sq.len(), c.order(), "closure verified closed for {spec:?}");
        }
    }

    #[test]
    fn dihedral_has_abelian_index_two() {
        let t = Tolerances::default();
        for m in [3usize, 5, 8, 12] {
            let b = build(&FamilySpec::Dihedral(m), 1e-6, 10_000).unwrap();
            let c = b.closure.unwrap();
            assert_eq!(c.order(), 2 * m);
            let out = jordan_abelian_subgroup(&c, 4, &t).unwrap();
            assert_eq!(out.index, 2, "dihedral {m}");
            assert!(is_abelian_set(&out.subgroup.base, &t).unwrap());
        }
    }

    #[test]
    fn random_pair_is_tolerant_and_reproducible() {
        let a = build(&FamilySpec::RandomUnitaryPair { dim: 2, seed: 42 }, 1e-6, 100).unwrap();
        let b = build(&FamilySpec::RandomUnitaryPair { dim: 2, seed: 42 }, 1e-6, 100).unwrap();
        assert!(a.closure.is_none());
        assert_eq!(a.generators.len(), 5); // id + two generators + inverses
        for (x, y) in a.generators.iter().zip(b.generators.iter()) {
            assert_eq!(x, y, "seeded build is bitwise reproducible");
        }
        for g in a.generators.iter() {
            assert!(g.to_dense().unitarity_residual() < 1e-12);
        }
    }
}

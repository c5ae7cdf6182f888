//! Large-centralizer finders for approximate groups.
//!
//! Two constructive routes are implemented: the triple-enumeration finder
//! built on nearest neighbors and well-behaved triples, and the
//! minimum-distance finder that buckets commutators of the near-identity
//! subset. Both can legitimately fail at desk scale (the counting regime the
//! proofs rely on needs astronomically large sets), in which case the
//! dispatcher falls back to a direct search over central-quotient class
//! representatives — the regime where the statement is trivially satisfiable
//! because the target lower bound drops below one.

use super::BlockSubgroup;
use crate::error::Error;
use crate::jordan::{near_identity_subset, CentralizerWitness};
use crate::linalg::{
    commutes_within, is_scalar_multiple_of_identity, spectral_decompose, Complex64, MonomialMatrix,
    PhaseFrac, UnitaryElement,
};
use crate::sets::{product_set, EqualityRegime, MatrixSet};
use crate::tol::{Caps, Tolerances};
use crate::Result;
use std::collections::HashMap;

/// Which route produced a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FinderMethod {
    Solymosi,
    Referee,
    DirectSearch,
}

/// Result of the coset-or-centralizer dichotomy.
#[derive(Debug, Clone)]
pub enum CosetOrCentralizer {
    /// A central coset carrying at least a `1/n` fraction of the set.
    Coset { representative: UnitaryElement, density: f64 },
    Centralizer { witness: CentralizerWitness, method: FinderMethod },
}

/// Which candidates a finder must avoid returning as `gamma`.
#[derive(Clone, Copy)]
pub(crate) enum Degenerate<'a> {
    /// Scalar multiples of the identity.
    GlobalScalar,
    /// Elements acting as a scalar on every block (the block-product center).
    BlockScalar(&'a BlockSubgroup),
}

impl Degenerate<'_> {
    pub(crate) fn test(&self, g: &UnitaryElement, tol: &Tolerances) -> Result<bool> {
        match self {
            Degenerate::GlobalScalar => {
                Ok(is_scalar_multiple_of_identity(g, tol.eps_spec).is_some())
            }
            Degenerate::BlockScalar(h) => h.is_block_scalar(g, tol.eps_block),
        }
    }
}

/// Saturating `3^{2 n^2} + 1`, the matrix-space covering bound used to cap
/// the well-behavedness thresholds.
fn besicovitch_surrogate(n: usize) -> f64 {
    let b = crate::besicovitch::matrix_space_bound(n);
    // f64 conversion saturates to infinity for large n, which is the intended
    // "threshold never binds" behavior
    let s = b.to_string();
    s.parse::<f64>().unwrap_or(f64::INFINITY)
}

/// Triple-enumeration centralizer finder over a special-unitary rendering.
///
/// For each element the nearest neighbor is selected; triples are scanned and
/// bucketed by the quadruple of products they induce, restricted to
/// well-behaved triples (bounded crowding of the two translated neighborhoods
/// and a non-scalar nearest-neighbor quotient). The largest bucket hands over
/// its quotient `gamma = a^{-1} a*`, and the commuting subset of the square
/// is recovered by direct enumeration; the witness records the fiber size.
pub fn find_centralizer_solymosi(
    a: &MatrixSet,
    k: f64,
    tol: &Tolerances,
    caps: &Caps,
) -> Result<CentralizerWitness> {
    solymosi_inner(a, k, tol, caps, Degenerate::GlobalScalar)
}

pub(crate) fn solymosi_inner(
    a: &MatrixSet,
    k: f64,
    tol: &Tolerances,
    caps: &Caps,
    excluded: Degenerate<'_>,
) -> Result<CentralizerWitness> {
    a.require_symmetric_with_identity()?;
    let n = a.dim();
    // determinant-1 check
    for (i, g) in a.iter().enumerate() {
        let ok = match g {
            UnitaryElement::Monomial(m) => m.det_phase()?.is_zero(),
            UnitaryElement::Dense(d) => (d.det() - Complex64::new(1.0, 0.0)).norm() <= 1e-6,
        };
        if !ok {
            return Err(Error::NotSpecialUnitary {
                residual: (a.get(i).to_dense().det() - Complex64::new(1.0, 0.0)).norm(),
            });
        }
    }
    if a.len() <= n {
        return Err(Error::TooSmall { size: a.len(), dim: n });
    }
    if a.len() > caps.solymosi_elems {
        return Err(Error::NoWitness(format!(
            "triple enumeration skipped: |A| = {} exceeds the desk-scale cap {}",
            a.len(),
            caps.solymosi_elems
        )));
    }
    let a_c = a.canonicalized();
    let a2 = product_set(&a_c, &a_c, caps.product)?.canonicalized();
    let m = a_c.len();

    // nearest neighbor (ties to the canonically first) and its distance
    let mut star = vec![0usize; m];
    let mut r = vec![0.0f64; m];
    for i in 0..m {
        let mut best = f64::INFINITY;
        let mut who = usize::MAX;
        for j in 0..m {
            if j == i {
                continue;
            }
            let d = a_c.get(i).distance(a_c.get(j))?;
            if d < best - 1e-15 {
                best = d;
                who = j;
            }
        }
        star[i] = who;
        r[i] = best;
    }

    // product index table AB[i][j] = position of a_i a_j in A^2
    let mut ab = vec![0u32; m * m];
    for i in 0..m {
        for j in 0..m {
            let p = a_c.get(i).mul(a_c.get(j))?;
            ab[i * m + j] = a2.find(&p)?.ok_or_else(|| {
                Error::NumericalBreakdown("product missing from the square".into())
            })? as u32;
        }
    }

    let threshold = 10.0 * besicovitch_surrogate(n) * k.max(1.0);
    let crowding_bounded = (a2.len() as f64) <= threshold;
    // U_{a,a1} = #{u in A^2 : d(a1 a, u) <= r_a} and the analogous V count;
    // when |A^2| is below the threshold every count is trivially bounded.
    let mut crowd = |i: usize, i1: usize| -> Result<f64> {
        let p = a_c.get(i1).mul(a_c.get(i))?;
        let mut count = 0usize;
        for u in a2.iter() {
            if p.distance(u)? <= r[i] {
                count += 1;
            }
        }
        Ok(count as f64)
    };

    let mut nonscalar = vec![false; m];
    let mut gamma_of = Vec::with_capacity(m);
    for i in 0..m {
        let gamma = a_c.get(i).inverse().mul(a_c.get(star[i]))?;
        nonscalar[i] = !excluded.test(&gamma, tol)?;
        gamma_of.push(gamma);
    }
    if !nonscalar.iter().any(|&b| b) {
        return Err(Error::NoWitness("every nearest-neighbor quotient is degenerate".into()));
    }

    // fiber counting over well-behaved triples
    let mut fibers: HashMap<[u32; 4], (u32, usize)> = HashMap::new();
    let mut max_fiber: Option<(u32, usize, [u32; 4])> = None; // (count, rep a-index, key)
    for i in 0..m {
        if !nonscalar[i] {
            continue;
        }
        for i1 in 0..m {
            if !crowding_bounded && crowd(i, i1)? > threshold {
                continue;
            }
            for i2 in 0..m {
                if !crowding_bounded && crowd(star[i], i2)? > threshold {
                    continue;
                }
                let key = [
                    ab[i1 * m + i],
                    ab[i1 * m + star[i]],
                    ab[i * m + i2],
                    ab[star[i] * m + i2],
                ];
                let e = fibers.entry(key).or_insert((0, i));
                e.0 += 1;
                let better = match &max_fiber {
                    None => true,
                    Some((c, _, _)) => e.0 > *c,
                };
                if better {
                    max_fiber = Some((e.0, e.1, key));
                }
                if fibers.len() > 20_000_000 {
                    return Err(Error::NoWitness("fiber map exceeded the memory guard".into()));
                }
            }
        }
    }
    let (count, rep, _) = max_fiber.ok_or_else(|| Error::NoWitness("no well-behaved triples".into()))?;
    let gamma = gamma_of[rep].clone();
    let mut commuting = MatrixSet::new(n, a.regime());
    for z in a2.iter() {
        if commutes_within(&gamma, z, tol.eps_comm)? {
            commuting.insert(z.clone())?;
        }
    }
    let rho = gamma.distance_to_identity();
    let blocks = spectral_decompose(&gamma, tol.eps_spec)?.multiplicities();
    Ok(CentralizerWitness { gamma, rho, commuting, blocks, fiber_size: count as usize })
}

/// Minimum-distance centralizer finder.
///
/// Forms the near-identity subset of the square, removes degenerate elements,
/// takes the element of minimal distance to the identity, buckets the
/// commutators it forms with the near-identity subset under the equality
/// regime, and returns the witness with the commuting subset of the square
/// recovered by direct enumeration (the largest bucket size is recorded).
pub fn find_centralizer_referee(
    a: &MatrixSet,
    k: f64,
    tol: &Tolerances,
    caps: &Caps,
) -> Result<CentralizerWitness> {
    referee_inner(a, k, tol, caps, Degenerate::GlobalScalar)
}

pub(crate) fn referee_inner(
    a: &MatrixSet,
    _k: f64,
    tol: &Tolerances,
    caps: &Caps,
    excluded: Degenerate<'_>,
) -> Result<CentralizerWitness> {
    a.require_symmetric_with_identity()?;
    let n = a.dim();
    let a2 = product_set(&a.canonicalized(), &a.canonicalized(), caps.product)?.canonicalized();
    let near_all = near_identity_subset(&a2)?;
    let mut near = MatrixSet::new(n, a.regime());
    for g in near_all.iter() {
        if !excluded.test(g, tol)? {
            near.insert(g.clone())?;
        }
    }
    if near.is_empty() {
        return Err(Error::EmptyNearIdentity);
    }
    // gamma = argmin d(., id) over the non-degenerate near-identity subset
    let mut best: Option<(f64, usize)> = None;
    for (i, g) in near.iter().enumerate() {
        let d = g.distance_to_identity();
        if best.map_or(true, |(bd, _)| d < bd - 1e-15) {
            best = Some((d, i));
        }
    }
    let (rho, gi) = best.expect("nonempty");
    let gamma = near.get(gi).clone();
    let gamma_inv = gamma.inverse();

    // bucket the commutators [gamma, x] over the near-identity subset
    let mut keyer = MatrixSet::new(n, a.regime());
    let mut counts: Vec<usize> = Vec::new();
    for x in near.iter() {
        let comm = gamma.mul(x)?.mul(&gamma_inv)?.mul(&x.inverse())?;
        match keyer.find(&comm)? {
            Some(idx) => counts[idx] += 1,
            None => {
                keyer.insert(comm)?;
                counts.push(1);
            }
        }
    }
    let fiber_size = counts.iter().copied().max().unwrap_or(0);

    let mut commuting = MatrixSet::new(n, a.regime());
    for z in a2.iter() {
        if commutes_within(&gamma, z, tol.eps_comm)? {
            commuting.insert(z.clone())?;
        }
    }
    let blocks = spectral_decompose(&gamma, tol.eps_spec)?.multiplicities();
    Ok(CentralizerWitness { gamma, rho, commuting, blocks, fiber_size })
}

/// Quotient-by-center classes of a set: indices grouped by equality up to a
/// global unit scalar. Exact monomial sets use the canonical
/// anchor-normalized key; dense sets use pairwise scalar tests.
pub(crate) fn central_quotient_classes(a: &MatrixSet, tol: &Tolerances) -> Result<Vec<Vec<usize>>> {
    if a.regime().is_exact() {
        let mut map: HashMap<(Vec<u32>, Vec<PhaseFrac>), Vec<usize>> = HashMap::new();
        let mut order: Vec<(Vec<u32>, Vec<PhaseFrac>)> = Vec::new();
        for (i, g) in a.iter().enumerate() {
            let m = g.as_monomial().expect("exact set");
            let anchor = m.phases()[0];
            let shifted: Vec<PhaseFrac> =
                m.phases().iter().map(|p| p.add(anchor.neg())).collect::<Result<_>>()?;
            let key = (m.perm().to_vec(), shifted);
            match map.get_mut(&key) {
                Some(v) => v.push(i),
                None => {
                    map.insert(key.clone(), vec![i]);
                    order.push(key);
                }
            }
        }
        Ok(order.into_iter().map(|k| map.remove(&k).expect("inserted")).collect())
    } else {
        let m = a.len();
        let mut class_of: Vec<Option<usize>> = vec![None; m];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in 0..m {
            if class_of[i].is_some() {
                continue;
            }
            let c = classes.len();
            class_of[i] = Some(c);
            classes.push(vec![i]);
            for j in i + 1..m {
                if class_of[j].is_some() {
                    continue;
                }
                let q = a.get(i).mul(&a.get(j).inverse())?;
                if is_scalar_multiple_of_identity(&q, tol.eps_eq_scaled(a.dim())).is_some() {
                    class_of[j] = Some(c);
                    classes[c].push(j);
                }
            }
        }
        Ok(classes)
    }
}

impl Tolerances {
    /// Scalar-identification tolerance for quotient classing: the equality
    /// tolerance scaled by the matrix norm.
    pub fn eps_eq_scaled(&self, n: usize) -> f64 {
        self.eps_eq * (n as f64).sqrt()
    }
}

/// Special-unitary saturation: all determinant-one scalar multiples of the
/// set's elements (n values per central class).
pub(crate) fn su_saturate(a: &MatrixSet) -> Result<MatrixSet> {
    let n = a.dim();
    let mut out = MatrixSet::new(n, a.regime());
    for g in a.iter() {
        let su = crate::linalg::su_normalize(g)?;
        for k in 0..n {
            let scaled = match &su {
                UnitaryElement::Monomial(m) => {
                    let z = MonomialMatrix::scalar(n, PhaseFrac::new(k as i64, n as i64)?);
                    UnitaryElement::Monomial(z.mul(m)?)
                }
                UnitaryElement::Dense(d) => {
                    let z = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64);
                    UnitaryElement::Dense(d.scale(z))
                }
            };
            out.insert(scaled)?;
        }
    }
    if a.closed_hint() {
        out.set_closed_hint(true);
    }
    Ok(out)
}

/// The central dichotomy: either a central coset carries a `1/n` fraction of
/// the set, or a non-degenerate element of the square with its commuting
/// subset is produced. The finders run on the special-unitary saturation; the
/// returned commuting set is always re-enumerated inside `A^2`, and the
/// witness is re-verified before it is returned.
pub fn central_coset_or_centralizer(
    a: &MatrixSet,
    k: f64,
    tol: &Tolerances,
    caps: &Caps,
) -> Result<CosetOrCentralizer> {
    a.require_symmetric_with_identity()?;
    let a_c = a.canonicalized();
    let n = a_c.dim();
    let classes = central_quotient_classes(&a_c, tol)?;
    if classes.len() <= n {
        let best = classes
            .iter()
            .max_by(|x, y| {
                x.len().cmp(&y.len()).then_with(|| {
                    // ties to the canonically first representative
                    a_c.get(y[0]).canonical_cmp(a_c.get(x[0]))
                })
            })
            .expect("nonempty set");
        return Ok(CosetOrCentralizer::Coset {
            representative: a_c.get(best[0]).clone(),
            density: best.len() as f64 / a_c.len() as f64,
        });
    }
    let witness_and_method =
        run_finders(&a_c, k, tol, caps, Degenerate::GlobalScalar)?;
    let (gamma, fiber_size, method) = witness_and_method;
    // push the witness back into A^2 by direct enumeration
    let a2 = product_set(&a_c, &a_c, caps.product)?.canonicalized();
    let mut commuting = MatrixSet::new(n, a_c.regime());
    for z in a2.iter() {
        if commutes_within(&gamma, z, tol.eps_comm)? {
            commuting.insert(z.clone())?;
        }
    }
    let witness = CentralizerWitness {
        rho: gamma.distance_to_identity(),
        blocks: spectral_decompose(&gamma, tol.eps_spec)?.multiplicities(),
        gamma,
        commuting,
        fiber_size,
    };
    if !witness.verify(Some(&a2), tol)? {
        return Err(Error::NumericalBreakdown("centralizer witness failed re-verification".into()));
    }
    Ok(CosetOrCentralizer::Centralizer { witness, method })
}

/// Try the constructive finders in order, falling back to the direct search;
/// returns the chosen gamma, the fiber statistic and the method.
pub(crate) fn run_finders(
    a: &MatrixSet,
    k: f64,
    tol: &Tolerances,
    caps: &Caps,
    excluded: Degenerate<'_>,
) -> Result<(UnitaryElement, usize, FinderMethod)> {
    let saturated = su_saturate(a)?;
    match solymosi_inner(&saturated, k, tol, caps, excluded) {
        Ok(w) => return Ok((w.gamma, w.fiber_size, FinderMethod::Solymosi)),
        Err(Error::NoWitness(_)) | Err(Error::TooSmall { .. }) => {}
        Err(e) => return Err(e),
    }
    match referee_inner(&saturated, k, tol, caps, excluded) {
        Ok(w) => return Ok((w.gamma, w.fiber_size, FinderMethod::Referee)),
        Err(Error::EmptyNearIdentity) => {
            // densify once by squaring before giving up on this route
            if let Ok(squared) = product_set(&saturated, &saturated, caps.product) {
                if let Ok(w) = referee_inner(&squared.canonicalized(), k, tol, caps, excluded) {
                    return Ok((w.gamma, w.fiber_size, FinderMethod::Referee));
                }
            }
        }
        Err(Error::CapExceeded { .. }) => {}
        Err(e) => return Err(e),
    }
    direct_search(a, tol, caps, excluded).map(|(g, f)| (g, f, FinderMethod::DirectSearch))
}

/// Desk-scale fallback: over the central-quotient class representatives of
/// the square, pick the non-degenerate element whose centralizer (counted
/// over representatives) is largest. At small cardinalities the target lower
/// bound of the constructive finders is below one, so any non-degenerate
/// element with its commuting set is a valid witness; this picks the best.
fn direct_search(
    a: &MatrixSet,
    tol: &Tolerances,
    caps: &Caps,
    excluded: Degenerate<'_>,
) -> Result<(UnitaryElement, usize)> {
    let a2 = product_set(a, a, caps.product)?.canonicalized();
    let classes = central_quotient_classes(&a2, tol)?;
    let reps: Vec<&UnitaryElement> = classes.iter().map(|c| a2.get(c[0])).collect();
    let mut best: Option<(usize, usize)> = None; // (count, rep index)
    for (ri, cand) in reps.iter().enumerate() {
        if excluded.test(cand, tol)? {
            continue;
        }
        let mut count = 0usize;
        for other in &reps {
            if commutes_within(cand, other, tol.eps_comm)? {
                count += 1;
            }
        }
        let better = match best {
            None => true,
            Some((bc, bi)) => {
                count > bc
                    || (count == bc
                        && cand.canonical_cmp(reps[bi]) == std::cmp::Ordering::Less)
            }
        };
        if better {
            best = Some((count, ri));
        }
    }
    let (count, ri) = best.ok_or_else(|| {
        Error::NoWitness("every central-quotient representative of the square is degenerate".into())
    })?;
    Ok((reps[ri].clone(), count))
}

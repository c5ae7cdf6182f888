//! Finite subgroups of `U_n(C)` as an algorithm: closures, near-identity
//! subsets, elements with large centralizer, block structure, and the
//! abelian-subgroup recursion driven by the cubic inequality.

use crate::error::Error;
use crate::linalg::{
    eigenspace_action, is_scalar_multiple_of_identity, spectral_decompose, DenseMatrix,
    MonomialMatrix, PhaseFrac, UnitaryElement,
};
use crate::sets::{EqualityRegime, MatrixSet};
use crate::tol::Tolerances;
use crate::Result;
use serde::{Deserialize, Serialize};

/// A finite subgroup held as an exact matrix set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteGroupSet {
    pub base: MatrixSet,
    pub closed: bool,
}

impl FiniteGroupSet {
    pub fn order(&self) -> usize {
        self.base.len()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    fn require_closed(&self) -> Result<()> {
        if self.closed {
            Ok(())
        } else {
            Err(Error::NotClosed)
        }
    }
}

/// Witness produced by a centralizer finder: a non-scalar `gamma`, the subset
/// found to commute with it, the minimum distance statistic that selected it,
/// the eigenvalue-multiplicity block structure of `gamma`, and the size of the
/// search structure (fiber or bucket) that produced it.
#[derive(Debug, Clone)]
pub struct CentralizerWitness {
    pub gamma: UnitaryElement,
    /// `d(gamma, id)` (the minimum over the candidate pool that was searched).
    pub rho: f64,
    pub commuting: MatrixSet,
    /// Eigenvalue multiplicities of `gamma` at resolution `eps_spec`.
    pub blocks: Vec<usize>,
    pub fiber_size: usize,
}

impl CentralizerWitness {
    /// Re-verify the witness: `gamma` non-scalar, every listed element
    /// commutes with it, and (when `ambient` is supplied) the commuting set
    /// lies inside the ambient set.
    pub fn verify(&self, ambient: Option<&MatrixSet>, tol: &Tolerances) -> Result<bool> {
        if is_scalar_multiple_of_identity(&self.gamma, tol.eps_spec).is_some() {
            return Ok(false);
        }
        for g in self.commuting.iter() {
            if !crate::linalg::commutes_within(&self.gamma, g, tol.eps_comm)? {
                return Ok(false);
            }
            if let Some(amb) = ambient {
                if !amb.contains(g)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// BFS closure of a generating set under multiplication. The generators must
/// be exact monomials; the identity is always included, and since every
/// element of a finite matrix group has finite order the result is a group.
pub fn group_closure(generators: &MatrixSet, cap: usize) -> Result<FiniteGroupSet> {
    if !generators.regime().is_exact() {
        return Err(Error::NotExactMode);
    }
    let mut set = MatrixSet::new(generators.dim(), EqualityRegime::Exact);
    set.insert(generators.identity_element())?;
    let mut frontier: Vec<UnitaryElement> = Vec::new();
    for g in generators.iter() {
        if set.insert(g.clone())? {
            frontier.push(g.clone());
        }
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            for g in generators.iter() {
                let p = f.mul(g)?;
                if set.insert(p.clone())? {
                    if set.len() > cap {
                        return Err(Error::CapExceeded { partial: set.len(), cap });
                    }
                    next.push(p);
                }
            }
        }
        frontier = next;
    }
    set.set_closed_hint(true);
    Ok(FiniteGroupSet { base: set, closed: true })
}

/// Elements within `1/(4 sqrt(n))` of the identity.
pub fn near_identity_subset(a: &MatrixSet) -> Result<MatrixSet> {
    let radius = 0.25 / (a.dim() as f64).sqrt();
    let mut out = MatrixSet::new(a.dim(), a.regime());
    for g in a.iter() {
        if g.distance_to_identity() <= radius {
            out.insert(g.clone())?;
        }
    }
    Ok(out)
}

/// Outcome of the large-centralizer search on a finite group.
#[derive(Debug, Clone)]
pub enum LargeCentralizer {
    /// Every near-identity element is scalar; carries the scalar subgroup and
    /// its index in the group.
    ScalarCase { scalars: MatrixSet, index: usize },
    /// A non-scalar near-identity element of minimal distance to the
    /// identity, together with its full centralizer in the group.
    Witness(CentralizerWitness),
}

/// The large-centralizer dichotomy for a closed finite group: either all
/// near-identity elements are scalar (return the scalar subgroup), or the
/// closest non-scalar near-identity element is returned with its full
/// centralizer, which contains the whole near-identity subset.
pub fn find_large_centralizer_exact(g: &FiniteGroupSet, tol: &Tolerances) -> Result<LargeCentralizer> {
    g.require_closed()?;
    let base = g.base.canonicalized();
    let near = near_identity_subset(&base)?;
    let mut best: Option<(f64, UnitaryElement)> = None;
    for h in near.iter() {
        if is_scalar_multiple_of_identity(h, tol.eps_spec).is_some() {
            continue;
        }
        let d = h.distance_to_identity();
        let better = match &best {
            None => true,
            Some((bd, bh)) => {
                d < *bd - 1e-15
                    || ((d - *bd).abs() <= 1e-15 && h.canonical_cmp(bh) == std::cmp::Ordering::Less)
            }
        };
        if better {
            best = Some((d, h.clone()));
        }
    }
    match best {
        None => {
            let mut scalars = MatrixSet::new(base.dim(), base.regime());
            for h in base.iter() {
                if is_scalar_multiple_of_identity(h, tol.eps_spec).is_some() {
                    scalars.insert(h.clone())?;
                }
            }
            let index = base.len() / scalars.len();
            Ok(LargeCentralizer::ScalarCase { scalars, index })
        }
        Some((rho, gamma)) => {
            let mut commuting = MatrixSet::new(base.dim(), base.regime());
            for h in base.iter() {
                if crate::linalg::commutes_within(&gamma, h, tol.eps_comm)? {
                    commuting.insert(h.clone())?;
                }
            }
            let fiber_size = commuting.len();
            let blocks = spectral_decompose(&gamma, tol.eps_spec)?.multiplicities();
            Ok(LargeCentralizer::Witness(CentralizerWitness {
                gamma,
                rho,
                commuting,
                blocks,
                fiber_size,
            }))
        }
    }
}

/// Block structure of the centralizer of a non-scalar unitary: a conjugator
/// `Q` and the eigenvalue multiplicities `n_1..n_k`, `k >= 2`, each `n_i < n`.
/// Everything commuting with `gamma` becomes block diagonal with these block
/// sizes under `Q`.
pub fn centralizer_block_structure(
    gamma: &UnitaryElement,
    eps_spec: f64,
) -> Result<(DenseMatrix, Vec<usize>)> {
    if is_scalar_multiple_of_identity(gamma, eps_spec).is_some() {
        return Err(Error::ScalarInput);
    }
    let dec = spectral_decompose(gamma, eps_spec)?;
    let mults = dec.multiplicities();
    if mults.len() < 2 {
        // non-scalar input whose spectrum still clusters to one class
        return Err(Error::ScalarInput);
    }
    Ok((dec.q, mults))
}

/// `n^3 > n_1^3 + ... + n_k^3 + n^2`, evaluated exactly in integer
/// arithmetic. The parts must be a composition of `n` into proper parts.
pub fn check_cubic_inequality(n: u64, parts: &[u64]) -> Result<bool> {
    if n < 2 {
        return Err(Error::InvalidComposition(format!("n = {n} < 2")));
    }
    if parts.is_empty() || parts.iter().any(|&p| p == 0 || p >= n) {
        return Err(Error::InvalidComposition("parts must satisfy 1 <= n_i < n".into()));
    }
    if parts.iter().sum::<u64>() != n {
        return Err(Error::InvalidComposition("parts must sum to n".into()));
    }
    let n = n as u128;
    let lhs = n * n * n;
    let rhs: u128 = parts.iter().map(|&p| (p as u128).pow(3)).sum::<u128>() + n * n;
    Ok(lhs > rhs)
}

/// Node of the recursion log emitted by [`jordan_abelian_subgroup`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JordanTrace {
    /// "brute-force", "scalar-case" or "centralizer".
    pub case: String,
    pub group_order: usize,
    pub subgroup_order: usize,
    pub index: usize,
    /// Block sizes of the chosen gamma (centralizer case only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<usize>,
    /// Distance of the chosen gamma from the identity (centralizer case only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<JordanTrace>,
}

/// Result of the abelian-subgroup recursion.
#[derive(Debug, Clone)]
pub struct JordanOutcome {
    pub subgroup: FiniteGroupSet,
    pub index: usize,
    pub trace: JordanTrace,
}

/// The order below which the recursion hands over to direct search.
const BRUTE_FORCE_ORDER: usize = 64;

/// Find an abelian subgroup of small index in a closed exact group, following
/// the large-centralizer recursion: scalar case, or pass to the centralizer
/// of a near-identity element, project to its blocks, recurse, and pull back.
/// Groups below order 64 are searched directly (the dichotomy presumes the
/// group is large). The returned index divides the group order exactly.
pub fn jordan_abelian_subgroup(
    g: &FiniteGroupSet,
    depth_cap: usize,
    tol: &Tolerances,
) -> Result<JordanOutcome> {
    g.require_closed()?;
    if !g.base.regime().is_exact() {
        return Err(Error::NotExactMode);
    }
    jordan_recurse(g, depth_cap, tol)
}

fn jordan_recurse(g: &FiniteGroupSet, depth_left: usize, tol: &Tolerances) -> Result<JordanOutcome> {
    if depth_left == 0 {
        return Err(Error::DepthCapExceeded(0));
    }
    let order = g.order();
    if order < BRUTE_FORCE_ORDER {
        let (sub, trace) = brute_force_max_abelian(g)?;
        let index = order / sub.order();
        return Ok(JordanOutcome { subgroup: sub, index, trace });
    }
    match find_large_centralizer_exact(g, tol)? {
        LargeCentralizer::ScalarCase { scalars, index } => {
            let trace = JordanTrace {
                case: "scalar-case".into(),
                group_order: order,
                subgroup_order: scalars.len(),
                index,
                blocks: vec![],
                gamma_distance: None,
                children: vec![],
            };
            let mut scalars = scalars;
            scalars.set_closed_hint(true);
            Ok(JordanOutcome {
                subgroup: FiniteGroupSet { base: scalars, closed: true },
                index,
                trace,
            })
        }
        LargeCentralizer::Witness(w) => {
            let gamma = w
                .gamma
                .as_monomial()
                .ok_or(Error::NotExactMode)?
                .clone();
            let centralizer = w.commuting; // full C_G(gamma), a subgroup
            let (eigen_groups, cycles) = exact_eigen_groups(&gamma)?;
            // project the centralizer onto each eigenspace and recurse
            let mut children = Vec::new();
            let mut projections: Vec<(Vec<MonomialMatrix>, MatrixSet)> = Vec::new();
            for (lambda, members) in &eigen_groups {
                let mut image = MatrixSet::new(members.len(), EqualityRegime::Exact);
                let mut per_element = Vec::with_capacity(centralizer.len());
                for z in centralizer.iter() {
                    let zm = z.as_monomial().ok_or(Error::NotExactMode)?;
                    let act = eigenspace_action(zm, &gamma, &cycles, members, *lambda)?;
                    image.insert(UnitaryElement::Monomial(act.clone()))?;
                    per_element.push(act);
                }
                image.set_closed_hint(true);
                let factor = FiniteGroupSet { base: image, closed: true };
                let child = jordan_recurse(&factor, depth_left - 1, tol)?;
                children.push(child.trace.clone());
                projections.push((per_element, child.subgroup.base));
            }
            // pull back: elements whose every projection lies in the abelian part
            let mut pullback = MatrixSet::new(g.dim(), EqualityRegime::Exact);
            for (zi, z) in centralizer.iter().enumerate() {
                let mut ok = true;
                for (per_element, abelian_part) in &projections {
                    if !abelian_part.contains(&UnitaryElement::Monomial(per_element[zi].clone()))? {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    pullback.insert(z.clone())?;
                }
            }
            pullback.set_closed_hint(true);
            let index = order / pullback.len();
            let trace = JordanTrace {
                case: "centralizer".into(),
                group_order: order,
                subgroup_order: pullback.len(),
                index,
                blocks: eigen_groups.iter().map(|(_, m)| m.len()).collect(),
                gamma_distance: Some(w.rho),
                children,
            };
            Ok(JordanOutcome {
                subgroup: FiniteGroupSet { base: pullback, closed: true },
                index,
                trace,
            })
        }
    }
}

/// Distinct exact eigenvalues of a monomial matrix together with the cycles
/// carrying each; the per-eigenvalue cycle lists are the exact block bases.
fn exact_eigen_groups(
    gamma: &MonomialMatrix,
) -> Result<(Vec<(PhaseFrac, Vec<usize>)>, Vec<crate::linalg::MonomialCycle>)> {
    let cycles = gamma.cycles()?;
    let eig = gamma.eigen_phases()?;
    let mut groups: Vec<(PhaseFrac, Vec<usize>)> = Vec::new();
    for e in &eig {
        match groups.iter_mut().find(|(l, _)| *l == e.lambda) {
            Some((_, members)) => members.push(e.cycle),
            None => groups.push((e.lambda, vec![e.cycle])),
        }
    }
    groups.sort_by(|a, b| a.0.cmp(&b.0));
    for (_, members) in &mut groups {
        members.sort_unstable();
        members.dedup();
    }
    Ok((groups, cycles))
}

/// Direct search for a maximum-order abelian subgroup in a small group:
/// breadth-first enumeration of the abelian subgroup lattice over element
/// bitmasks (the order is below 64, so a subgroup is one `u64`).
fn brute_force_max_abelian(g: &FiniteGroupSet) -> Result<(FiniteGroupSet, JordanTrace)> {
    let base = g.base.canonicalized();
    let n = base.len();
    assert!(n <= 64, "brute force is reserved for orders < 64 plus projections");
    // multiplication and commutation tables over canonical indices
    let mut mul = vec![0usize; n * n];
    for i in 0..n {
        for j in 0..n {
            let p = base.get(i).mul(base.get(j))?;
            mul[i * n + j] = base
                .find(&p)?
                .ok_or(Error::NotClosed)?;
        }
    }
    let commuting_mask: Vec<u64> = (0..n)
        .map(|i| {
            let mut m = 0u64;
            for j in 0..n {
                if mul[i * n + j] == mul[j * n + i] {
                    m |= 1 << j;
                }
            }
            m
        })
        .collect();
    let id_idx = base.find(&base.identity_element())?.ok_or(Error::MissingIdentity)?;
    let close = |mask: u64| -> u64 {
        let mut m = mask | (1 << id_idx);
        loop {
            let mut grew = false;
            let members: Vec<usize> = (0..n).filter(|&i| m & (1 << i) != 0).collect();
            for &i in &members {
                for &j in &members {
                    let k = mul[i * n + j];
                    if m & (1 << k) == 0 {
                        m |= 1 << k;
                        grew = true;
                    }
                }
            }
            if !grew {
                return m;
            }
        }
    };
    let is_abelian = |mask: u64| -> bool {
        (0..n).all(|i| mask & (1 << i) == 0 || (mask & commuting_mask[i]) == mask)
    };

    let mut seen = std::collections::HashSet::<u64>::new();
    let mut queue = vec![close(0)];
    seen.insert(queue[0]);
    let mut best = queue[0];
    while let Some(cur) = queue.pop() {
        if cur.count_ones() > best.count_ones() {
            best = cur;
        }
        for c in 0..n {
            if cur & (1 << c) != 0 {
                continue;
            }
            // extending by c keeps the group abelian only if c commutes with
            // everything present
            if cur & commuting_mask[c] != cur {
                continue;
            }
            let ext = close(cur | (1 << c));
            if is_abelian(ext) && seen.insert(ext) {
                queue.push(ext);
            }
        }
    }

    let mut sub = MatrixSet::new(base.dim(), EqualityRegime::Exact);
    for i in 0..n {
        if best & (1 << i) != 0 {
            sub.insert(base.get(i).clone())?;
        }
    }
    sub.set_closed_hint(true);
    let order = sub.len();
    let trace = JordanTrace {
        case: "brute-force".into(),
        group_order: n,
        subgroup_order: order,
        index: n / order,
        blocks: vec![],
        gamma_distance: None,
        children: vec![],
    };
    Ok((FiniteGroupSet { base: sub, closed: true }, trace))
}

/// Verify that every pair of elements commutes (exactly, in exact mode).
pub fn is_abelian_set(s: &MatrixSet, tol: &Tolerances) -> Result<bool> {
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if !crate::linalg::commutes_within(s.get(i), s.get(j), tol.eps_comm)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Closure helper used by tests and families: the subgroup generated by the
/// listed monomials.
pub fn closure_of(dim: usize, gens: Vec<MonomialMatrix>, cap: usize) -> Result<FiniteGroupSet> {
    let set = MatrixSet::from_elements(
        dim,
        EqualityRegime::Exact,
        gens.into_iter().map(UnitaryElement::Monomial),
    )?;
    group_closure(&set, cap)
}

#[cfg(test)]
mod tests {
    use super::*;


    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn sym_gens(n: usize) -> Vec<MonomialMatrix> {
        (0..n - 1)
            .map(|i| {
                let mut p: Vec<u32> = (0..n as u32).collect();
                p.swap(i, i + 1);
                MonomialMatrix::permutation(p).unwrap()
            })
            .collect()
    }

    fn q8_gens() -> Vec<MonomialMatrix> {
        // i*X and i*Z
        let ix = MonomialMatrix::new(
            vec![1, 0],
            vec![PhaseFrac::new(1, 4).unwrap(), PhaseFrac::new(1, 4).unwrap()],
        )
        .unwrap();
        let iz = MonomialMatrix::diagonal(vec![
            PhaseFrac::new(1, 4).unwrap(),
            PhaseFrac::new(3, 4).unwrap(),
        ]);
        vec![ix, iz]
    }

    fn heis_gens(m: usize) -> Vec<MonomialMatrix> {
        let clock = MonomialMatrix::diagonal(
            (0..m as i64).map(|k| PhaseFrac::new(k, m as i64).unwrap()).collect(),
        );
        let shift =
            MonomialMatrix::permutation((0..m as u32).map(|j| (j + 1) % m as u32).collect()).unwrap();
        vec![clock, shift]
    }

    #[test]
    fn closures_have_expected_orders() {
        assert_eq!(closure_of(3, sym_gens(3), 100).unwrap().order(), 6);
        assert_eq!(closure_of(2, q8_gens(), 100).unwrap().order(), 8);
        assert_eq!(closure_of(5, heis_gens(5), 1000).unwrap().order(), 125);
        assert!(matches!(
            closure_of(5, heis_gens(5), 100),
            Err(Error::CapExceeded { cap: 100, .. })
        ));
    }

    #[test]
    fn near_identity_examples() {
        let s3 = closure_of(3, sym_gens(3), 100).unwrap();
        let near = near_identity_subset(&s3.base).unwrap();
        // non-identity permutation matrices sit at distance >= 2 > 1/(4 sqrt 3)
        assert_eq!(near.len(), 1);
        assert!(near.contains_identity().unwrap());

        // an element constructed inside the ball stays in
        let n = 4usize;
        let g = MonomialMatrix::diagonal(vec![
            PhaseFrac::new(1, 2000).unwrap(),
            PhaseFrac::ZERO,
            PhaseFrac::ZERO,
            PhaseFrac::ZERO,
        ]);
        let d = g.distance_to_identity();
        assert!(d <= 0.25 / (n as f64).sqrt() / 2.0);
        let mut set = MatrixSet::new(n, EqualityRegime::Exact);
        set.insert(UnitaryElement::identity(n, true)).unwrap();
        set.insert(UnitaryElement::Monomial(g)).unwrap();
        assert_eq!(near_identity_subset(&set).unwrap().len(), 2);
    }

    #[test]
    fn q8_hits_the_scalar_case() {
        let q8 = closure_of(2, q8_gens(), 100).unwrap();
        match find_large_centralizer_exact(&q8, &tol()).unwrap() {
            LargeCentralizer::ScalarCase { scalars, index } => {
                // scalars are {id, -id}; index 4
                assert_eq!(scalars.len(), 2);
                assert_eq!(index, 4);
            }
            LargeCentralizer::Witness(_) => panic!("Q8 near-identity subset is {{id}}"),
        }
    }

    #[test]
    fn dense_diagonal_group_hits_case_two() {
        // {diag(z^a, z^b)}: order 101^2 via two commuting generators
        let z = PhaseFrac::new(1, 101).unwrap();
        let g1 = MonomialMatrix::diagonal(vec![z, PhaseFrac::ZERO]);
        let g2 = MonomialMatrix::diagonal(vec![PhaseFrac::ZERO, z]);
        let g = closure_of(2, vec![g1.clone(), g2], 20_000).unwrap();
        assert_eq!(g.order(), 101 * 101);
        // d(diag(z, 1), id) = |z - 1| < 1/(4 sqrt 2)
        assert!(UnitaryElement::Monomial(g1).distance_to_identity() < 0.25 / 2f64.sqrt());
        match find_large_centralizer_exact(&g, &tol()).unwrap() {
            LargeCentralizer::Witness(w) => {
                assert_eq!(w.commuting.len(), g.order(), "abelian: everything centralizes");
                assert!(w.verify(Some(&g.base), &tol()).unwrap());
                // the whole near-identity subset is inside the centralizer
                let near = near_identity_subset(&g.base).unwrap();
                for h in near.iter() {
                    assert!(w.commuting.contains(h).unwrap());
                }
            }
            LargeCentralizer::ScalarCase { .. } => panic!("expected a witness"),
        }
    }

    #[test]
    fn block_structure_examples() {
        // diag(1, 1, -1) -> [2, 1]
        let d = MonomialMatrix::diagonal(vec![PhaseFrac::ZERO, PhaseFrac::ZERO, PhaseFrac::HALF]);
        let (_, mut blocks) = centralizer_block_structure(&UnitaryElement::Monomial(d), 1e-6).unwrap();
        blocks.sort_unstable();
        assert_eq!(blocks, vec![1, 2]);

        // diag(1, w, w^2) -> [1, 1, 1]
        let d = MonomialMatrix::diagonal(
            (0..3).map(|k| PhaseFrac::new(k, 3).unwrap()).collect(),
        );
        let (_, blocks) = centralizer_block_structure(&UnitaryElement::Monomial(d), 1e-6).unwrap();
        assert_eq!(blocks, vec![1, 1, 1]);

        // scalar input is rejected
        assert!(matches!(
            centralizer_block_structure(&UnitaryElement::identity(3, true), 1e-6),
            Err(Error::ScalarInput)
        ));
    }

    #[test]
    fn conjugated_double_eigenvalues_give_two_blocks() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        // build gamma = U diag(l, l, m, m) U* for a random unitary U
        let mut cols: Vec<Vec<crate::linalg::Complex64>> = (0..4)
            .map(|_| {
                (0..4)
                    .map(|_| {
                        crate::linalg::Complex64::new(
                            rng.gen::<f64>() * 2.0 - 1.0,
                            rng.gen::<f64>() * 2.0 - 1.0,
                        )
                    })
                    .collect()
            })
            .collect();
        for j in 0..4 {
            for k in 0..j {
                let proj: crate::linalg::Complex64 =
                    cols[k].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                for i in 0..4 {
                    let sub = proj * cols[k][i];
                    cols[j][i] -= sub;
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in &mut cols[j] {
                *z /= norm;
            }
        }
        let mut u = DenseMatrix::zeros(4);
        for j in 0..4 {
            for i in 0..4 {
                u.set(i, j, cols[j][i]);
            }
        }
        let mut d = DenseMatrix::zeros(4);
        d.set(0, 0, crate::linalg::Complex64::new(0.0, 1.0));
        d.set(1, 1, crate::linalg::Complex64::new(0.0, 1.0));
        d.set(2, 2, crate::linalg::Complex64::new(1.0, 0.0));
        d.set(3, 3, crate::linalg::Complex64::new(1.0, 0.0));
        let gamma = UnitaryElement::Dense(u.mul(&d).mul(&u.adjoint()));
        let (q, mut blocks) = centralizer_block_structure(&gamma, 1e-6).unwrap();
        blocks.sort_unstable();
        assert_eq!(blocks, vec![2, 2]);
        // anything commuting with gamma is block diagonal under Q: check with
        // h = U diag(a, a, b, b) U* which commutes by construction
        let mut hd = DenseMatrix::zeros(4);
        hd.set(0, 0, crate::linalg::Complex64::from_polar(1.0, 0.3));
        hd.set(1, 1, crate::linalg::Complex64::from_polar(1.0, 0.3));
        hd.set(2, 2, crate::linalg::Complex64::from_polar(1.0, 1.1));
        hd.set(3, 3, crate::linalg::Complex64::from_polar(1.0, 1.1));
        let h = u.mul(&hd).mul(&u.adjoint());
        let hq = q.adjoint().mul(&h).mul(&q);
        let mut off = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let same_block = (i < 2) == (j < 2);
                if !same_block {
                    off += hq.get(i, j).norm_sqr();
                }
            }
        }
        assert!(off.sqrt() < 1e-8, "off-block mass {off}");
    }

    #[test]
    fn cubic_inequality_cases() {
        assert!(check_cubic_inequality(2, &[1, 1]).unwrap());
        assert!(check_cubic_inequality(5, &[4, 1]).unwrap());
        assert!(matches!(check_cubic_inequality(4, &[4]), Err(Error::InvalidComposition(_))));
        assert!(matches!(check_cubic_inequality(4, &[2, 1]), Err(Error::InvalidComposition(_))));
        // exhaustive over all compositions of n <= 12 into proper parts
        for n in 2u64..=12 {
            let mut stack: Vec<Vec<u64>> = vec![vec![]];
            while let Some(cur) = stack.pop() {
                let sum: u64 = cur.iter().sum();
                if sum == n {
                    if cur.iter().all(|&p| p < n) {
                        assert!(check_cubic_inequality(n, &cur).unwrap(), "failed at n={n} {cur:?}");
                    }
                    continue;
                }
                for next in 1..=(n - sum).min(n - 1) {
                    let mut c = cur.clone();
                    c.push(next);
                    stack.push(c);
                }
            }
        }
    }

    /// Independent oracle: maximal abelian subgroups are exactly the maximal
    /// cliques of the commutation graph, found here by Bron-Kerbosch.
    pub(super) fn max_abelian_order_oracle(g: &FiniteGroupSet) -> usize {
        let base = g.base.canonicalized();
        let n = base.len();
        let mut adj = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                let ij = base.get(i).mul(base.get(j)).unwrap();
                let ji = base.get(j).mul(base.get(i)).unwrap();
                // no self-loops: Bron-Kerbosch expects a simple graph
                adj[i][j] = i != j && ij == ji;
            }
        }
        fn bron(
            r: &mut Vec<usize>,
            p: &mut Vec<usize>,
            x: &mut Vec<usize>,
            adj: &[Vec<bool>],
            best: &mut usize,
        ) {
            if p.is_empty() && x.is_empty() {
                *best = (*best).max(r.len());
                return;
            }
            let cands = p.clone();
            for v in cands {
                r.push(v);
                let mut p2: Vec<usize> = p.iter().copied().filter(|&u| adj[v][u]).collect();
                let mut x2: Vec<usize> = x.iter().copied().filter(|&u| adj[v][u]).collect();
                bron(r, &mut p2, &mut x2, adj, best);
                r.pop();
                p.retain(|&u| u != v);
                x.push(v);
            }
        }
        let mut best = 0;
        bron(
            &mut Vec::new(),
            &mut (0..n).collect(),
            &mut Vec::new(),
            &adj,
            &mut best,
        );
        best
    }

    #[test]
    fn jordan_examples_match_brute_force() {
        let t = tol();
        // Sym(3): abelian index 2
        let s3 = closure_of(3, sym_gens(3), 100).unwrap();
        let out = jordan_abelian_subgroup(&s3, 3, &t).unwrap();
        assert_eq!(out.index, 2);
        assert!(is_abelian_set(&out.subgroup.base, &t).unwrap());
        assert_eq!(s3.order() / max_abelian_order_oracle(&s3), 2);

        // Q8: abelian index 2
        let q8 = closure_of(2, q8_gens(), 100).unwrap();
        let out = jordan_abelian_subgroup(&q8, 2, &t).unwrap();
        assert_eq!(out.index, 2);
        assert!(is_abelian_set(&out.subgroup.base, &t).unwrap());
        assert_eq!(q8.order() / max_abelian_order_oracle(&q8), 2);
    }

    #[test]
    fn jordan_recursion_handles_larger_groups() {
        let t = tol();
        // an abelian group above the brute-force threshold: case 2, index 1
        let z = PhaseFrac::new(1, 101).unwrap();
        let g1 = MonomialMatrix::diagonal(vec![z, PhaseFrac::ZERO]);
        let g2 = MonomialMatrix::diagonal(vec![PhaseFrac::ZERO, z]);
        let g = closure_of(2, vec![g1, g2], 20_000).unwrap();
        let out = jordan_abelian_subgroup(&g, 4, &t).unwrap();
        assert_eq!(out.index, 1);
        assert_eq!(out.subgroup.order(), g.order());
        assert_eq!(out.trace.case, "centralizer");

        // Heisenberg mod 5 (order 125): scalar case gives the center
        let heis = closure_of(5, heis_gens(5), 1000).unwrap();
        let out = jordan_abelian_subgroup(&heis, 6, &t).unwrap();
        assert!(is_abelian_set(&out.subgroup.base, &t).unwrap());
        assert_eq!(heis.order() % out.subgroup.order(), 0);
        // the recursion never beats the true optimum
        let oracle_order = {
            // max abelian subgroup of Heis(5) has order 25; the clique oracle
            // is too slow at order 125, so use the known subgroup <clock, center>
            25
        };
        assert!(out.index >= heis.order() / oracle_order);
    }

    #[test]
    fn jordan_mixed_product_exercises_projection() {
        let t = tol();
        // (cyclic 101 in U_1-slot) ⊕ Sym(3): near-identity elements exist and
        // are non-scalar, so the recursion goes through the centralizer case
        let z = PhaseFrac::new(1, 101).unwrap();
        let mut gens = Vec::new();
        // diag(z, 1, 1, 1) on the first coordinate
        gens.push(MonomialMatrix::diagonal(vec![z, PhaseFrac::ZERO, PhaseFrac::ZERO, PhaseFrac::ZERO]));
        // Sym(3) transpositions on coordinates 1..4
        for i in 1..3u32 {
            let mut p: Vec<u32> = (0..4).collect();
            p.swap(i as usize, i as usize + 1);
            gens.push(MonomialMatrix::permutation(p).unwrap());
        }
        let g = closure_of(4, gens, 10_000).unwrap();
        assert_eq!(g.order(), 101 * 6);
        let out = jordan_abelian_subgroup(&g, 5, &t).unwrap();
        assert!(is_abelian_set(&out.subgroup.base, &t).unwrap());
        assert_eq!(out.trace.case, "centralizer");
        // optimum: 101 * 3 (cyclic times alternating part)
        assert_eq!(out.index, 2);
        assert_eq!(g.order() % out.subgroup.order(), 0);
    }

    #[test]
    fn commutator_contraction_near_identity() {
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 2..=4usize {
            let radius = 0.25 / (n as f64).sqrt();
            for _ in 0..200 {
                let g = random_near_identity(n, radius, &mut rng);
                let x = random_near_identity(n, radius, &mut rng);
                let gi = g.inverse();
                let xi = x.inverse();
                let comm = g.mul(&x).unwrap().mul(&gi).unwrap().mul(&xi).unwrap();
                let lhs = comm.distance_to_identity();
                assert!(
                    lhs <= g.distance_to_identity() / 2.0 + 1e-9,
                    "contraction violated: {lhs} vs {}",
                    g.distance_to_identity() / 2.0
                );
            }
        }
    }

    pub(super) fn random_near_identity(
        n: usize,
        radius: f64,
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> UnitaryElement {
        use crate::linalg::Complex64;
        use rand::Rng;
        loop {
            // random anti-Hermitian S scaled small, then U = exp(S)
            let mut s = DenseMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    let z = Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
                    if i == j {
                        s.set(i, j, Complex64::new(0.0, z.im));
                    } else {
                        s.set(i, j, z);
                        s.set(j, i, -z.conj());
                    }
                }
            }
            let target = rng.gen::<f64>() * radius * 0.95;
            let s = s.scale(Complex64::new(target / s.hs_norm().max(1e-12), 0.0));
            // Taylor series converges very fast at this norm
            let mut u = DenseMatrix::identity(n);
            let mut term = DenseMatrix::identity(n);
            for k in 1..=16 {
                term = term.mul(&s).scale(Complex64::new(1.0 / k as f64, 0.0));
                for i in 0..n {
                    for j in 0..n {
                        u.set(i, j, u.get(i, j) + term.get(i, j));
                    }
                }
            }
            // Gram-Schmidt polish keeps the unitarity residual at rounding level
            let mut cols: Vec<Vec<Complex64>> =
                (0..n).map(|j| (0..n).map(|i| u.get(i, j)).collect()).collect();
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
            let e = UnitaryElement::Dense(m);
            if e.distance_to_identity() <= radius {
                return e;
            }
        }
    }

    #[test]
    fn commutators_stay_in_group() {
        // the witness centralizer contains the near-identity subset for a
        // group where case 2 fires with a non-abelian ambient group
        let t = tol();
        let z = PhaseFrac::new(1, 409).unwrap();
        let mut gens = vec![MonomialMatrix::diagonal(vec![
            z,
            PhaseFrac::ZERO,
            PhaseFrac::ZERO,
        ])];
        gens.push(MonomialMatrix::permutation(vec![0, 2, 1]).unwrap());
        let g = closure_of(3, gens, 10_000).unwrap();
        match find_large_centralizer_exact(&g, &t).unwrap() {
            LargeCentralizer::Witness(w) => {
                let near = near_identity_subset(&g.base).unwrap();
                for h in near.iter() {
                    assert!(w.commuting.contains(h).unwrap());
                }
            }
            LargeCentralizer::ScalarCase { .. } => panic!("diag part has near-identity elements"),
        }
    }
}

//! The inductive decomposition: intersect with block subgroups, lift density
//! through the central quotient, refine one factor at a time, and land on a
//! simultaneously diagonalizable controlled subset.

use super::finders::{central_quotient_classes, run_finders, Degenerate};
use super::BlockSubgroup;
use crate::error::{Error, NoProgressReason};
use crate::linalg::{joint_diagonalize, Complex64, DenseMatrix, UnitaryElement};
use crate::sets::{
    certify_approximate, power_set, product_set, verify_control, ApproxCertificate,
    ControlCertificate, ControlOutcome, MatrixSet,
};
use crate::tol::{Caps, Tolerances};
use crate::Result;
use serde::{Deserialize, Serialize};

/// Result of intersecting a certified approximate group with a block
/// subgroup: the intersection of the square, its own certificate, and the
/// verified power-intersection inequalities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntersectionReport {
    /// `S = A^2 ∩ H`.
    pub s: MatrixSet,
    /// Greedy approximation constant certified for `S`.
    pub k_s: f64,
    /// `K_S <= 2 K^3`.
    pub small_constant_ok: bool,
    /// Per requested power `k`: (`k`, `|A^k ∩ H|`, `K^{k-1} |S|`, holds).
    pub power_checks: Vec<(usize, usize, f64, bool)>,
}

/// `A^2 ∩ H` is again an approximate group with constant at most `2 K^3`, and
/// the powers intersect `H` in at most `K^{k-1} |A^2 ∩ H|` elements. Both
/// statements are certified and re-verified on the actual sets.
pub fn intersect_with_subgroup(
    a: &MatrixSet,
    cert: &ApproxCertificate,
    h: &BlockSubgroup,
    ks: &[usize],
    tol: &Tolerances,
    caps: &Caps,
) -> Result<IntersectionReport> {
    let a2 = product_set(a, a, caps.product)?.canonicalized();
    let mut s = MatrixSet::new(a.dim(), a.regime());
    for g in a2.iter() {
        if h.contains(g, tol.eps_block)? {
            s.insert(g.clone())?;
        }
    }
    if a2.closed_hint() {
        // a closed square intersected with a subgroup is again closed
        s.set_closed_hint(true);
    }
    let s_cert = certify_approximate(&s, caps.product)?;
    let k = cert.k_upper;
    let small_constant_ok = s_cert.k_upper <= 2.0 * k.powi(3) + 1e-9;
    let mut power_checks = Vec::new();
    for &kk in ks {
        let ak = power_set(a, kk, caps.product)?;
        let mut count = 0usize;
        for g in ak.iter() {
            if h.contains(g, tol.eps_block)? {
                count += 1;
            }
        }
        let bound = k.powi(kk as i32 - 1) * s.len() as f64;
        power_checks.push((kk, count, bound, count as f64 <= bound + 1e-9));
    }
    Ok(IntersectionReport { s, k_s: s_cert.k_upper, small_constant_ok, power_checks })
}

/// Verified instance of the fiber-lifting inequality
/// `|A^3 ∩ pi^{-1}(X)| >= delta |A|` for the central quotient `pi`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftFiberReport {
    /// `|pi(A) ∩ X| / |pi(A)|`.
    pub delta: f64,
    /// `|A^3 ∩ pi^{-1}(X)|`.
    pub lifted_count: usize,
    /// `delta * |A|`.
    pub lower_bound: f64,
    /// Size of the largest central fiber of `A`.
    pub max_fiber: usize,
    pub holds: bool,
}

/// Exact-mode verification of the fiber-lifting inequality through the
/// quotient by the center. `x` is read as a set of quotient classes (its
/// elements are canonicalized modulo scalars).
pub fn lift_fiber_bound(
    a: &MatrixSet,
    x: &MatrixSet,
    tol: &Tolerances,
    caps: &Caps,
) -> Result<LiftFiberReport> {
    if !a.regime().is_exact() || !x.regime().is_exact() {
        return Err(Error::NotExactMode);
    }
    if let Some(index) = a.symmetry_defect()? {
        return Err(Error::NotSymmetric { index });
    }
    let a_c = a.canonicalized();
    let classes = central_quotient_classes(&a_c, tol)?;
    let max_fiber = classes.iter().map(|c| c.len()).max().unwrap_or(0);
    // quotient keys of X
    let key_of = |g: &UnitaryElement| -> Result<(Vec<u32>, Vec<crate::linalg::PhaseFrac>)> {
        let m = g.as_monomial().expect("exact set");
        let anchor = m.phases()[0];
        let shifted = m.phases().iter().map(|p| p.add(anchor.neg())).collect::<Result<Vec<_>>>()?;
        Ok((m.perm().to_vec(), shifted))
    };
    let mut x_keys = std::collections::HashSet::new();
    for g in x.iter() {
        x_keys.insert(key_of(g)?);
    }
    // delta = |pi(A) ∩ X| / |pi(A)| (computed exactly over class keys)
    let mut hit_classes = 0usize;
    for c in &classes {
        if x_keys.contains(&key_of(a_c.get(c[0]))?) {
            hit_classes += 1;
        }
    }
    let delta = hit_classes as f64 / classes.len() as f64;
    let a3 = power_set(&a_c, 3, caps.product)?;
    let mut lifted = 0usize;
    for g in a3.iter() {
        if x_keys.contains(&key_of(g)?) {
            lifted += 1;
        }
    }
    // exact integer comparison: lifted * |pi(A)| >= hits * |A|
    let holds = lifted * classes.len() >= hit_classes * a_c.len();
    Ok(LiftFiberReport {
        delta,
        lifted_count: lifted,
        lower_bound: delta * a_c.len() as f64,
        max_fiber,
        holds,
    })
}

/// Which branch an inductive step took.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StepCase {
    /// A factor's image concentrated on few central cosets (or the whole
    /// intersection sat in the block-product center); the factor was split
    /// into diagonal lines.
    CentralCoset,
    /// A centralizer witness split a factor into smaller blocks.
    Centralizer,
}

/// One refinement step of the decomposition.
#[derive(Debug, Clone)]
pub struct InductiveOutcome {
    pub h_prime: BlockSubgroup,
    pub x_prime: UnitaryElement,
    /// Measured density `|A ∩ H' x'| / |A|`, not a worst-case bound.
    pub delta_prime: f64,
    pub case: StepCase,
    /// Distance statistic of the witness, when the centralizer branch ran.
    pub gamma_distance: Option<f64>,
    /// Fiber or bucket size recorded by the finder.
    pub fiber_size: Option<usize>,
}

/// Density bookkeeping: the largest right-coset mass of `h` inside `a`,
/// together with a representative.
fn densest_coset(
    a: &MatrixSet,
    h: &BlockSubgroup,
    tol: &Tolerances,
) -> Result<(UnitaryElement, f64)> {
    let mut reps: Vec<(usize, usize)> = Vec::new(); // (rep index, count)
    'outer: for i in 0..a.len() {
        for (rep, count) in reps.iter_mut() {
            let q = a.get(i).mul(&a.get(*rep).inverse())?;
            if h.contains(&q, tol.eps_block)? {
                *count += 1;
                continue 'outer;
            }
        }
        reps.push((i, 1));
    }
    let (rep, count) = reps
        .into_iter()
        .max_by(|x, y| x.1.cmp(&y.1).then_with(|| y.0.cmp(&x.0)))
        .expect("nonempty set");
    Ok((a.get(rep).clone(), count as f64 / a.len() as f64))
}

/// One step of the decomposition: split a non-abelian factor of `h`.
///
/// The hypothesis `|A ∩ H x| >= delta |A|` is re-verified on entry. The
/// intersection `S = A^2 ∩ H` is formed; if it sits inside the block-product
/// center the remaining factors are simultaneously abelian and every block is
/// split (terminal coset case). Otherwise, if the first non-singleton
/// factor's image concentrates on at most `n_j` central cosets that factor is
/// split (coset case); otherwise a centralizer finder produces a witness
/// `gamma` that is non-scalar on some factor and `h` is refined by it. The
/// returned density is measured, never assumed.
pub fn inductive_step(
    a: &MatrixSet,
    cert: &ApproxCertificate,
    h: &BlockSubgroup,
    x: &UnitaryElement,
    delta: f64,
    tol: &Tolerances,
    caps: &Caps,
) -> Result<InductiveOutcome> {
    if h.is_fully_diagonal() {
        return Err(Error::NoProgress(NoProgressReason::AlreadyDiagonal));
    }
    // verify the density hypothesis |A ∩ Hx| >= delta |A|
    let xinv = x.inverse();
    let mut in_coset = 0usize;
    for g in a.iter() {
        if h.contains(&g.mul(&xinv)?, tol.eps_block)? {
            in_coset += 1;
        }
    }
    if (in_coset as f64) + 1e-9 < delta * a.len() as f64 {
        return Err(Error::InvalidInput(format!(
            "density precondition violated: |A ∩ Hx| = {in_coset} < {} ",
            delta * a.len() as f64
        )));
    }

    let a2 = product_set(a, a, caps.product)?.canonicalized();
    let mut s = MatrixSet::new(a.dim(), a.regime());
    for g in a2.iter() {
        if h.contains(g, tol.eps_block)? {
            s.insert(g.clone())?;
        }
    }
    if a2.closed_hint() {
        s.set_closed_hint(true);
    }

    // terminal: the intersection sits inside the block-product center
    let all_central = {
        let mut all = true;
        for g in s.iter() {
            if !h.is_block_scalar(g, tol.eps_block)? {
                all = false;
                break;
            }
        }
        all
    };
    if all_central {
        let h_prime = split_blocks(h, |_| true);
        let (x_prime, delta_prime) = densest_coset(a, &h_prime, tol)?;
        return Ok(InductiveOutcome {
            h_prime,
            x_prime,
            delta_prime,
            case: StepCase::CentralCoset,
            gamma_distance: None,
            fiber_size: None,
        });
    }

    // coset case on the first non-singleton factor
    let (bi, &(start, len)) = h
        .blocks
        .iter()
        .enumerate()
        .find(|(_, &(_, len))| len > 1)
        .expect("not fully diagonal");
    let factor_classes = factor_quotient_classes(&s, h, start, len, tol)?;
    if factor_classes <= len {
        let h_prime = split_blocks(h, |b| b == bi);
        let (x_prime, delta_prime) = densest_coset(a, &h_prime, tol)?;
        return Ok(InductiveOutcome {
            h_prime,
            x_prime,
            delta_prime,
            case: StepCase::CentralCoset,
            gamma_distance: None,
            fiber_size: None,
        });
    }

    // centralizer case: find gamma in S^2 that is non-scalar on some block
    let (gamma, fiber_size, _method) =
        run_finders(&s, cert.k_upper, tol, caps, Degenerate::BlockScalar(h)).map_err(|e| {
            Error::NoProgress(NoProgressReason::FinderFailed(e.to_string()))
        })?;
    let gamma_distance = gamma.distance_to_identity();
    let h_prime = h.refine(&gamma, tol.eps_spec)?;
    if h_prime.blocks.len() <= h.blocks.len() {
        return Err(Error::NoProgress(NoProgressReason::FinderFailed(
            "witness did not refine the block structure".into(),
        )));
    }
    let (x_prime, delta_prime) = densest_coset(a, &h_prime, tol)?;
    Ok(InductiveOutcome {
        h_prime,
        x_prime,
        delta_prime,
        case: StepCase::Centralizer,
        gamma_distance: Some(gamma_distance),
        fiber_size: Some(fiber_size),
    })
}

/// Split the selected blocks of `h` into singletons, keeping the conjugator.
/// Membership of the result is strictly finer than the constraint
/// centralizer, so it switches to the numeric test.
fn split_blocks(h: &BlockSubgroup, select: impl Fn(usize) -> bool) -> BlockSubgroup {
    let mut blocks = Vec::new();
    for (bi, &(start, len)) in h.blocks.iter().enumerate() {
        if select(bi) && len > 1 {
            for i in 0..len {
                blocks.push((start + i, 1));
            }
        } else {
            blocks.push((start, len));
        }
    }
    let mut out = h.clone();
    out.blocks = blocks;
    out.set_numeric_membership();
    out
}

/// Number of classes of `s` under "equal up to a scalar on the factor
/// `[start, start+len)` and anything on the other blocks": the central
/// quotient of the factor image.
fn factor_quotient_classes(
    s: &MatrixSet,
    h: &BlockSubgroup,
    start: usize,
    len: usize,
    tol: &Tolerances,
) -> Result<usize> {
    // factor image of g: the (len x len) sub-block of Q* g Q
    let sub = |g: &UnitaryElement| -> DenseMatrix {
        let m = h.q.adjoint().mul(&g.to_dense()).mul(&h.q);
        let mut out = DenseMatrix::zeros(len);
        for i in 0..len {
            for j in 0..len {
                out.set(i, j, m.get(start + i, start + j));
            }
        }
        out
    };
    let imgs: Vec<DenseMatrix> = s.iter().map(sub).collect();
    let mut reps: Vec<usize> = Vec::new();
    'outer: for i in 0..imgs.len() {
        for &r in &reps {
            // equal up to scalar: a b* is approximately scalar (both are
            // approximately unitary on the factor)
            let q = imgs[i].mul(&imgs[r].adjoint());
            let lam = {
                let mut mean = Complex64::new(0.0, 0.0);
                for t in 0..len {
                    mean += q.get(t, t);
                }
                mean / len as f64
            };
            let norm = lam.norm();
            if norm > 0.5 {
                let lam = lam / norm;
                let mut sq = 0.0;
                for t in 0..len {
                    for u in 0..len {
                        let mut v = q.get(t, u);
                        if t == u {
                            v -= lam;
                        }
                        sq += v.norm_sqr();
                    }
                }
                if sq.sqrt() <= tol.eps_eq_scaled(len) {
                    continue 'outer;
                }
            }
        }
        reps.push(i);
    }
    Ok(reps.len())
}

/// One recorded level of [`diagonalizable_control`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionStep {
    pub level: usize,
    pub case: StepCase,
    /// Block sizes after this step.
    pub blocks: Vec<usize>,
    /// Measured density `|A ∩ H x| / |A|` after this step.
    pub density: f64,
    /// `|A^2 ∩ H|` entering this step.
    pub intersection_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_size: Option<usize>,
}

/// Measured quantities of a full decomposition run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasuredConstants {
    /// Greedy approximation constant of the input.
    pub k_upper: f64,
    /// Control constant of the final certificate.
    pub control_constant: f64,
    /// `|B| / |A|`.
    pub b_ratio: f64,
    /// Per-level measured densities.
    pub deltas: Vec<f64>,
    /// Largest off-diagonal entry magnitude of `Q* b Q` over `b` in `B`.
    pub max_off_diagonal: f64,
}

/// Report of the full decomposition pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub steps: Vec<DecompositionStep>,
    /// The simultaneously diagonalizable subset `B = A^2 ∩ H_final`.
    pub b: MatrixSet,
    /// The common diagonalizer of `B`.
    pub diagonalizer: DenseMatrix,
    pub control: ControlCertificate,
    pub measured: MeasuredConstants,
}

/// Run the inductive step until every block has size one, then certify that
/// `B = A^2 ∩ H_final` is simultaneously diagonalizable and controls `A`.
pub fn diagonalizable_control(
    a: &MatrixSet,
    tol: &Tolerances,
    caps: &Caps,
) -> Result<DecompositionReport> {
    a.require_symmetric_with_identity()?;
    let a_c = a.canonicalized();
    let n = a_c.dim();
    let cert = certify_approximate(&a_c, caps.product)?;
    let mut h = BlockSubgroup::full(n);
    let mut x = a_c.identity_element();
    let mut delta = 1.0f64;
    let mut steps: Vec<DecompositionStep> = Vec::new();
    let mut deltas = Vec::new();
    while !h.is_fully_diagonal() {
        let level = steps.len();
        if level > n {
            return Err(Error::PipelineFailed {
                level,
                reason: "refinement exceeded the dimension bound".into(),
            });
        }
        let a2 = product_set(&a_c, &a_c, caps.product)?;
        let mut intersection_size = 0usize;
        for g in a2.iter() {
            if h.contains(g, tol.eps_block)? {
                intersection_size += 1;
            }
        }
        let out = inductive_step(&a_c, &cert, &h, &x, delta, tol, caps).map_err(|e| match e {
            Error::NoProgress(r) => Error::PipelineFailed { level, reason: format!("{r:?}") },
            other => other,
        })?;
        steps.push(DecompositionStep {
            level,
            case: out.case.clone(),
            blocks: out.h_prime.block_sizes(),
            density: out.delta_prime,
            intersection_size,
            gamma_distance: out.gamma_distance,
            fiber_size: out.fiber_size,
        });
        deltas.push(out.delta_prime);
        h = out.h_prime;
        x = out.x_prime;
        delta = out.delta_prime;
    }

    // B = A^2 ∩ H_final
    let a2 = product_set(&a_c, &a_c, caps.product)?.canonicalized();
    let mut b = MatrixSet::new(n, a_c.regime());
    for g in a2.iter() {
        if h.contains(g, tol.eps_block)? {
            b.insert(g.clone())?;
        }
    }
    if a2.closed_hint() {
        b.set_closed_hint(true);
    }
    // verify simultaneous diagonalizability with a single conjugator obtained
    // by jointly diagonalizing B itself (independent of the level conjugators)
    let mut herm = Vec::with_capacity(2 * b.len());
    for g in b.iter() {
        let m = g.to_dense();
        let adj = m.adjoint();
        let mut h1 = DenseMatrix::zeros(n);
        let mut h2 = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let (p, q) = (m.get(i, j), adj.get(i, j));
                h1.set(i, j, (p + q) * Complex64::new(0.5, 0.0));
                h2.set(i, j, (p - q) * Complex64::new(0.0, -0.5));
            }
        }
        herm.push(h1);
        herm.push(h2);
    }
    let diagonalizer = if herm.is_empty() {
        DenseMatrix::identity(n)
    } else {
        joint_diagonalize(&mut herm, (n as f64) * tol.eps_spec / 8.0)?
    };
    let mut max_off = 0.0f64;
    for g in b.iter() {
        let m = diagonalizer.adjoint().mul(&g.to_dense()).mul(&diagonalizer);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    max_off = max_off.max(m.get(i, j).norm());
                }
            }
        }
    }
    if max_off > tol.eps_block {
        return Err(Error::PipelineFailed {
            level: steps.len(),
            reason: format!("off-diagonal magnitude {max_off:.3e} exceeds eps_block"),
        });
    }
    let control = match verify_control(&a_c, &b)? {
        ControlOutcome::Controlled(c) => c,
        ControlOutcome::Failure { uncovered } => {
            return Err(Error::PipelineFailed {
                level: steps.len(),
                reason: format!("{} elements escaped control", uncovered.len()),
            })
        }
    };
    let measured = MeasuredConstants {
        k_upper: cert.k_upper,
        control_constant: control.control_constant,
        b_ratio: b.len() as f64 / a_c.len() as f64,
        deltas,
        max_off_diagonal: max_off,
    };
    Ok(DecompositionReport { steps, b, diagonalizer, control, measured })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build, FamilySpec};
    use crate::jordan::is_abelian_set;

    fn setup() -> (Tolerances, Caps) {
        (Tolerances::default(), Caps::default())
    }

    #[test]
    fn intersect_with_full_group_is_trivial() {
        let (tol, caps) = setup();
        let b = build(&FamilySpec::SymmetricGroup(3), 1e-6, 100).unwrap();
        let s3 = b.closure.unwrap().base;
        let cert = certify_approximate(&s3, 10_000).unwrap();
        let h = BlockSubgroup::full(3);
        let rep = intersect_with_subgroup(&s3, &cert, &h, &[3, 4, 6], &tol, &caps).unwrap();
        assert_eq!(rep.s.len(), 6); // A^2 = A for a subgroup
        assert_eq!(rep.k_s, 1.0);
        assert!(rep.small_constant_ok);
        assert!(rep.power_checks.iter().all(|&(_, _, _, ok)| ok));
    }

    #[test]
    fn intersect_heisenberg_ball_with_diagonal() {
        let (tol, caps) = setup();
        let fam = build(&FamilySpec::ClockShiftHeisenberg(7), 1e-6, 1000).unwrap();
        let ball = power_set(&fam.generators, 2, 100_000).unwrap();
        let ball = crate::sets::symmetrize(&ball).unwrap();
        let cert = certify_approximate(&ball, 100_000).unwrap();
        // diagonal block subgroup: refine the full group by the clock matrix
        let clock = fam.generators.iter().find(|g| {
            g.as_monomial().is_some_and(|m| m.perm().iter().enumerate().all(|(j, &p)| p as usize == j))
                && g.distance_to_identity() > 1e-9
        });
        let h = BlockSubgroup::full(7).refine(clock.unwrap(), tol.eps_spec).unwrap();
        let rep = intersect_with_subgroup(&ball, &cert, &h, &[3, 4, 6], &tol, &caps).unwrap();
        assert!(rep.small_constant_ok, "K_S = {} vs K = {}", rep.k_s, cert.k_upper);
        for (k, lhs, rhs, ok) in &rep.power_checks {
            assert!(ok, "power {k}: {lhs} > {rhs}");
        }
        // the exact-mode intersection is exactly the diagonal part
        for g in rep.s.iter() {
            let m = g.as_monomial().unwrap();
            assert!(m.perm().iter().enumerate().all(|(j, &p)| p as usize == j));
        }
    }

    #[test]
    fn lift_fiber_trivial_and_single_point() {
        let (tol, caps) = setup();
        let fam = build(&FamilySpec::ClockShiftHeisenberg(5), 1e-6, 1000).unwrap();
        let a = fam.closure.unwrap().base;
        // X = pi(A): delta = 1 and the bound reads |A^3 ∩ A Z| >= |A|
        let rep = lift_fiber_bound(&a, &a, &tol, &caps).unwrap();
        assert_eq!(rep.delta, 1.0);
        assert!(rep.holds);
        // X = {id}: the bound is carried by the largest central fiber
        let idset = MatrixSet::from_elements(
            5,
            crate::sets::EqualityRegime::Exact,
            [UnitaryElement::identity(5, true)],
        )
        .unwrap();
        let rep = lift_fiber_bound(&a, &idset, &tol, &caps).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.max_fiber, 5, "center of Heisenberg mod 5 has order 5");
        // trivial center interaction: Sym(3) has all fibers of size 1
        let s3 = build(&FamilySpec::SymmetricGroup(3), 1e-6, 100).unwrap().closure.unwrap().base;
        let ids3 = MatrixSet::from_elements(
            3,
            crate::sets::EqualityRegime::Exact,
            [UnitaryElement::identity(3, true)],
        )
        .unwrap();
        let rep = lift_fiber_bound(&s3, &ids3, &tol, &caps).unwrap();
        assert_eq!(rep.max_fiber, 1);
        assert!(rep.holds);
        assert_eq!(rep.lifted_count, 1, "equality case: only the identity lifts");
    }

    #[test]
    fn lift_fiber_requires_exact_mode() {
        let (tol, caps) = setup();
        let fam = build(&FamilySpec::RandomUnitaryPair { dim: 2, seed: 1 }, 1e-6, 10).unwrap();
        assert!(matches!(
            lift_fiber_bound(&fam.generators, &fam.generators, &tol, &caps),
            Err(Error::NotExactMode)
        ));
    }

    #[test]
    fn inductive_step_on_sym3() {
        let (tol, caps) = setup();
        let s3 = build(&FamilySpec::SymmetricGroup(3), 1e-6, 100).unwrap().closure.unwrap().base;
        let cert = certify_approximate(&s3, 10_000).unwrap();
        let h = BlockSubgroup::full(3);
        let out =
            inductive_step(&s3, &cert, &h, &s3.identity_element(), 1.0, &tol, &caps).unwrap();
        let mut sizes = out.h_prime.block_sizes();
        sizes.sort_unstable();
        assert!(sizes == vec![1, 1, 1] || sizes == vec![1, 2], "one step splits U_3: {sizes:?}");
        assert!(out.delta_prime >= 1.0 / 6.0 - 1e-12);
    }

    #[test]
    fn inductive_step_terminal_on_diagonal() {
        let (tol, caps) = setup();
        let s3 = build(&FamilySpec::SymmetricGroup(3), 1e-6, 100).unwrap().closure.unwrap().base;
        let cert = certify_approximate(&s3, 10_000).unwrap();
        let mut h = BlockSubgroup::full(3);
        // split everything: nothing left to refine
        h = split_blocks(&h, |_| true);
        assert!(h.is_fully_diagonal());
        assert!(matches!(
            inductive_step(&s3, &cert, &h, &s3.identity_element(), 0.0, &tol, &caps),
            Err(Error::NoProgress(NoProgressReason::AlreadyDiagonal))
        ));
    }

    #[test]
    fn abelian_sets_decompose_in_one_step() {
        let (tol, caps) = setup();
        let fam = build(&FamilySpec::DiagonalCyclic(vec![5, 7]), 1e-6, 100).unwrap();
        let a = fam.closure.unwrap().base;
        let rep = diagonalizable_control(&a, &tol, &caps).unwrap();
        assert_eq!(rep.steps.len(), 1, "common eigenbasis exists immediately");
        assert_eq!(rep.b.len(), a.len());
        assert!(rep.measured.control_constant <= rep.measured.k_upper.max(1.0) + 1e-9);
        assert!(is_abelian_set(&rep.b, &tol).unwrap());
    }

    #[test]
    fn sym3_decomposes_to_the_cyclic_part() {
        let (tol, caps) = setup();
        let s3 = build(&FamilySpec::SymmetricGroup(3), 1e-6, 100).unwrap().closure.unwrap().base;
        let rep = diagonalizable_control(&s3, &tol, &caps).unwrap();
        assert!(rep.steps.len() <= 3);
        // brute force: the largest simultaneously diagonalizable subset of
        // Sym(3)^2 meeting a conjugate torus is a cyclic group of order 3
        assert!(rep.b.len() >= 3);
        assert!(rep.measured.control_constant <= 6.0);
        assert!(is_abelian_set(&rep.b, &tol).unwrap());
        assert!(rep.measured.max_off_diagonal <= 1e-6);
    }

    #[test]
    fn heisenberg_ball_decomposes() {
        let (tol, caps) = setup();
        let fam = build(&FamilySpec::ClockShiftHeisenberg(5), 1e-6, 1000).unwrap();
        let a = fam.closure.unwrap().base;
        let rep = diagonalizable_control(&a, &tol, &caps).unwrap();
        assert!(rep.steps.len() <= 5);
        assert!(is_abelian_set(&rep.b, &tol).unwrap());
        // cross-check by subgroup structure: the diagonal part of the
        // Heisenberg group has order 25 (clock times center)
        assert!(rep.b.len() >= 25, "terminal abelian piece has {} elements", rep.b.len());
        assert!(rep.control.verify(&a.canonicalized()).unwrap());
    }
}

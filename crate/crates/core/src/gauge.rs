//! The Drinfeld-Sokolov gauge and its finite-dimensional relatives.
//!
//! Conventions. Gauge transformations act on the right: for `M = exp(w)`,
//!
//! ```text
//! M^{-1} (d/dt + A) M = d/dt + e^{-ad w}(A) + sum_{k>=0} (-ad w)^k / (k+1)! (dw/dt)
//! ```
//!
//! [`ds_reduce`] abelianizes `d/dt + p + q(t)` grade by grade: at each
//! filtration degree the defect splits as (subalgebra part) + `[p, m]` via
//! [`kernel_image_split`]; the subalgebra part is emitted as an abelian
//! coefficient and `-m` joins the exponent. No antiderivative is ever taken:
//! every step is an exact linear solve, so all outputs are differential
//! polynomials by construction.
//!
//! For a catalog entry with a conjugator the whole induction runs in the
//! reduction frame (conjugate once, reduce, conjugate the exponent back);
//! conjugation by the exact constant matrix costs nothing in precision.

use crate::grading::GradingSpec;
use crate::lie::{
    self, abelian_coords_frame, kernel_image_split_frame, piece_coords, retag, HeisenbergSpec,
    SimpleLieData, TransversalSpace,
};
use crate::linalg;
use crate::matrix::LoopMatrix;
use crate::poly::{DiffPoly, DiffRing};
use crate::rational::Rat;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// A first-order matrix connection `d/dt + p + q(t)`.
#[derive(Clone, Debug)]
pub struct Connection {
    /// The leading term: a strongly regular subalgebra element of negative
    /// filtration degree.
    pub leading: LoopMatrix,
    /// The perturbation; every component must have degree strictly greater
    /// than the degree of the leading term.
    pub perturbation: LoopMatrix,
    /// The jet ring the perturbation coefficients live in.
    pub ring: DiffRing,
}

/// Result of the abelianization: the exponent components `w_i` of the single
/// gauge exponential `M = exp(sum w_i)` and the abelian coefficients of
/// `M^{-1} (d/dt + p + q) M = d/dt + p + sum c_{d,j} p_{d,j}`.
#[derive(Clone, Debug)]
pub struct DsGaugeResult {
    /// Exponent components keyed by filtration degree (all degrees >= 1).
    pub exponent: BTreeMap<i64, LoopMatrix>,
    /// Abelian coefficients keyed by (degree, index in the degree basis).
    pub abelian: BTreeMap<(i64, usize), DiffPoly>,
    pub truncation_degree: i64,
}

impl DsGaugeResult {
    /// Coefficient of the degree-`d` basis element `j` (zero if absent).
    pub fn coefficient(&self, d: i64, j: usize) -> DiffPoly {
        self.abelian.get(&(d, j)).cloned().unwrap_or_default()
    }
}

/// Truncation bookkeeping for the hierarchy: flow `m` runs the reduction to
/// degree `m + coxeter + buffer` and retries with a larger buffer if the
/// zero-curvature certificate detects insufficiency.
#[derive(Clone, Copy, Debug)]
pub struct TruncationPolicy {
    pub buffer: i64,
    pub max_retries: u32,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            buffer: 2,
            max_retries: 3,
        }
    }
}

impl TruncationPolicy {
    pub fn from_env() -> Self {
        let mut p = TruncationPolicy::default();
        if let Ok(v) = std::env::var("DS_TRUNC_BUFFER") {
            if let Ok(b) = v.trim().parse::<i64>() {
                p.buffer = b.max(0);
            }
        }
        p
    }
}

/// Tie-break rule for the gauge exponent inside the kernel/image splitting.
/// `MinNorm` is the pinned default; `KernelPerturbed` adds a multiple of the
/// kernel directions (scaled by the first ring variable) and exists to let
/// tests assert that the dressed element does not depend on the choice.
#[derive(Clone, Debug)]
pub enum TieBreak {
    MinNorm,
    KernelPerturbed(Rat),
}

/// `e^{-ad w}(p + q) + dexp` term of `M^{-1} (d/dt + p + q) M` for
/// `M = exp(w)`, exact on every degree `<= cap` (`None` = no truncation,
/// valid when the grading is finite so the series terminates on its own).
pub(crate) fn conjugated_connection(
    w: &BTreeMap<i64, LoopMatrix>,
    p: &LoopMatrix,
    q: &LoopMatrix,
    cap: Option<i64>,
) -> Result<LoopMatrix> {
    let mut w_sum = LoopMatrix::zero(p.size(), *p.grading());
    for part in w.values() {
        w_sum = w_sum.add(part)?;
    }
    let clip = |x: LoopMatrix| match cap {
        Some(c) => x.truncate_degrees_above(c),
        None => x,
    };
    let mut acc = clip(p.add(q)?);
    let mut term = acc.clone();
    let mut k: i64 = 1;
    while !term.is_zero() {
        term = clip(w_sum.bracket(&term)?.scale(&Rat::new((-1).into(), k.into())));
        if term.is_zero() {
            break;
        }
        acc = acc.add(&term)?;
        k += 1;
        assert!(k < 10_000, "gauge series failed to terminate");
    }
    let mut t = clip(w_sum.dt());
    acc = acc.add(&t)?;
    let mut k: i64 = 1;
    while !t.is_zero() {
        t = clip(w_sum.bracket(&t)?.scale(&Rat::new((-1).into(), (k + 1).into())));
        if t.is_zero() {
            break;
        }
        acc = acc.add(&t)?;
        k += 1;
        assert!(k < 10_000, "gauge series failed to terminate");
    }
    Ok(acc)
}

/// `Ad(exp w)(x) = e^{ad w}(x)` truncated at the degree cap.
pub(crate) fn dress(
    w: &BTreeMap<i64, LoopMatrix>,
    x: &LoopMatrix,
    cap: i64,
) -> Result<LoopMatrix> {
    let mut w_sum = LoopMatrix::zero(x.size(), *x.grading());
    for part in w.values() {
        w_sum = w_sum.add(part)?;
    }
    crate::matrix::ad_exp_conjugate(&w_sum, x, cap)
}

/// Abelianize `d/dt + p + q(t)` through the given filtration degree with the
/// pinned minimum-norm tie-break.
pub fn ds_reduce(
    conn: &Connection,
    spec: &HeisenbergSpec,
    truncation_degree: i64,
) -> Result<DsGaugeResult> {
    ds_reduce_with(conn, spec, truncation_degree, &TieBreak::MinNorm)
}

/// Abelianization with an explicit tie-break rule.
pub fn ds_reduce_with(
    conn: &Connection,
    spec: &HeisenbergSpec,
    truncation_degree: i64,
    tie: &TieBreak,
) -> Result<DsGaugeResult> {
    if truncation_degree < 1 {
        return Err(Error::CertificateFailed(
            "truncation degree must be >= 1".into(),
        ));
    }
    if !lie::is_strongly_regular(&conn.leading, spec)? {
        return Err(Error::NotStronglyRegular);
    }
    let p = spec.to_frame(&conn.leading)?;
    let q = spec.to_frame(&conn.perturbation)?;
    let l = p.homogeneous_degree()?;
    if l >= 0 {
        return Err(Error::NotInSubalgebra(
            "leading term must have negative degree".into(),
        ));
    }
    if let Some(dmin) = q.degree_support().into_iter().min() {
        if dmin <= l {
            return Err(Error::NotInSubalgebra(format!(
                "perturbation has a component of degree {dmin} <= deg p = {l}"
            )));
        }
    }
    let cap = truncation_degree;
    let mut exponent: BTreeMap<i64, LoopMatrix> = BTreeMap::new();
    let mut abelian: BTreeMap<(i64, usize), DiffPoly> = BTreeMap::new();
    for d in (l + 1)..=cap {
        // the defect at degree d only needs the series through degree d:
        // brackets with the (positive-degree) exponent never lower degrees
        let x = conjugated_connection(&exponent, &p, &q, Some(d))?;
        let delta = x.graded_component(d)?;
        if delta.is_zero() {
            continue;
        }
        let (a_part, mut m_part) = kernel_image_split_frame(&delta, &p, spec, d)?;
        if let TieBreak::KernelPerturbed(scale) = tie {
            let pert = conn.ring.jet(0, 0).scale(scale);
            for kvec in spec.abelian_basis_frame(d - l) {
                m_part = m_part.add(&kvec.scale_poly(&pert))?;
            }
        }
        if !m_part.is_zero() {
            exponent.insert(d - l, m_part.neg());
        }
        if !a_part.is_zero() {
            for (j, c) in abelian_coords_frame(&a_part, spec, d)?.into_iter().enumerate() {
                if !c.is_zero() {
                    abelian.insert((d, j), c);
                }
            }
        }
    }
    // re-substitution identity: M^{-1} nabla M = d/dt + p + sum c p_basis
    let x = conjugated_connection(&exponent, &p, &q, Some(cap))?;
    let mut target = p.clone();
    for ((d, j), c) in &abelian {
        let b = &spec.abelian_basis_frame(*d)[*j];
        target = target.add(&b.scale_poly(c))?;
    }
    let diff = x.sub(&target)?;
    for (d, part) in diff.graded_split() {
        if d <= cap && !part.is_zero() {
            return Err(Error::Resubstitution(d));
        }
    }
    // transport the exponent back to the original picture
    let mut out_exp = BTreeMap::new();
    for (d, part) in exponent {
        out_exp.insert(d, spec.from_frame(&part)?);
    }
    Ok(DsGaugeResult {
        exponent: out_exp,
        abelian,
        truncation_degree: cap,
    })
}

/// Dressed element `Ad(M)(x)` for the gauge computed by [`ds_reduce`],
/// exact on degrees `<= cap` (in the original picture).
pub fn dress_with_result(
    spec: &HeisenbergSpec,
    result: &DsGaugeResult,
    x: &LoopMatrix,
    cap: i64,
) -> Result<LoopMatrix> {
    let mut w_frame = BTreeMap::new();
    for (d, part) in &result.exponent {
        w_frame.insert(*d, spec.to_frame(part)?);
    }
    let xf = spec.to_frame(x)?;
    let dressed = dress(&w_frame, &xf, cap)?;
    spec.from_frame(&dressed)
}

fn borel_check(b: &LoopMatrix) -> Result<()> {
    for (r, c, k, p) in b.iter() {
        if p.is_zero() {
            continue;
        }
        if k != 0 || c < r {
            return Err(Error::NotInSubalgebra(
                "operator is not valued in the upper Borel at z^0".into(),
            ));
        }
    }
    if !b.trace().is_zero() {
        return Err(Error::NotInSubalgebra("nonzero trace".into()));
    }
    Ok(())
}

/// Bring `d/dt + cyclic_finite + b(t)` (with `b` valued in the upper Borel)
/// to the unique transversal form `d/dt + cyclic_finite + v(t)`, `v` valued
/// in `V`. Returns the `V`-coordinates (aligned with `v_space.basis`) and
/// the unipotent gauge exponent by matrix degree.
///
/// Graded induction on the matrix degree; at degree `j` the defect splits
/// uniquely along `V_j (+) [cyclic_finite, n_{j+1}]`, so there is no
/// tie-breaking anywhere and the output is a projection: applying it to an
/// operator already in transversal form returns the identity gauge.
pub fn canonical_oper_form(
    b: &LoopMatrix,
    lie: &SimpleLieData,
    v_space: &TransversalSpace,
) -> Result<(Vec<DiffPoly>, BTreeMap<i64, LoopMatrix>)> {
    borel_check(b)?;
    let n = lie.n;
    let g = GradingSpec::matrix_only();
    let p_bar = retag(&lie.cyclic_finite, g);
    let q = retag(b, g);
    let mut exponent: BTreeMap<i64, LoopMatrix> = BTreeMap::new();
    let mut v_out = vec![DiffPoly::zero(); v_space.basis.len()];
    for j in 0..n as i64 {
        let x = conjugated_connection(&exponent, &p_bar, &q, None)?;
        let delta = x.graded_component(j)?;
        let v_idx: Vec<usize> = (0..v_space.basis.len())
            .filter(|i| v_space.degrees[*i] == j)
            .collect();
        let mu_basis = if j + 1 <= (n as i64 - 1) {
            upper_basis_at_degree(n, j + 1)
        } else {
            Vec::new()
        };
        if delta.is_zero() && mu_basis.is_empty() && v_idx.is_empty() {
            continue;
        }
        let rhs = piece_coords(&delta, j)?;
        let mut cols: Vec<Vec<Rat>> = Vec::new();
        for &i in &v_idx {
            cols.push(rational_coords(&retag(&v_space.basis[i], g), j)?);
        }
        for mu in &mu_basis {
            cols.push(rational_coords(&p_bar.bracket(mu)?, j)?);
        }
        let rows: Vec<Vec<Rat>> = (0..rhs.len())
            .map(|r| cols.iter().map(|c| c[r].clone()).collect())
            .collect();
        if linalg::rank(&rows) != rhs.len() || !linalg::kernel_basis(&rows).is_empty() {
            return Err(Error::TransversalityFailed(format!(
                "degree {j}: V_j + [cyclic_finite, n_(j+1)] is not a direct complement"
            )));
        }
        let sol = linalg::solve(&rows, &rhs).ok_or_else(|| {
            Error::TransversalityFailed(format!("degree {j}: no decomposition"))
        })?;
        for (t, &i) in v_idx.iter().enumerate() {
            v_out[i] = sol[t].clone();
        }
        let mut mu = LoopMatrix::zero(n, g);
        for (bm, c) in mu_basis.iter().zip(&sol[v_idx.len()..]) {
            mu = mu.add(&bm.scale_poly(c))?;
        }
        if !mu.is_zero() {
            exponent.insert(j + 1, mu.neg());
        }
    }
    Ok((v_out, exponent))
}

fn upper_basis_at_degree(n: usize, d: i64) -> Vec<LoopMatrix> {
    let g = GradingSpec::matrix_only();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if j as i64 - i as i64 == d && i < j {
                out.push(LoopMatrix::elem(n, g, i, j, 0, DiffPoly::one()));
            }
        }
    }
    out
}

fn rational_coords(x: &LoopMatrix, d: i64) -> Result<Vec<Rat>> {
    Ok(piece_coords(x, d)?
        .iter()
        .map(|p| p.as_constant().expect("rational basis data"))
        .collect())
}

/// The Miura map: canonical transversal coordinates of the diagonal
/// connection `d/dt + cyclic_finite + sum u_i omega_i`.
///
/// Returns the jet ring of the `u_i` (weight 1 each) and the `v_i` as
/// differential polynomials in the `u_j`, aligned with `v_space.basis`.
pub fn miura_map(lie: &SimpleLieData, v_space: &TransversalSpace) -> Result<(DiffRing, Vec<DiffPoly>)> {
    let ring = DiffRing::indexed("u", lie.rank(), 1);
    let mut h = LoopMatrix::zero(lie.n, lie.grading);
    for i in 0..lie.rank() {
        h = h.add(&lie.fundamental_coweight(i).scale_poly(&ring.jet(i, 0)))?;
    }
    let (v, _gauge) = canonical_oper_form(&h, lie, v_space)?;
    Ok((ring, v))
}

/// Orientation of the infinitesimal gauge action used by
/// [`infinitesimal_gauge_project_oriented`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeOrientation {
    /// `delta - (dn/dt + [n, B])` lands in V (the documented public contract).
    NOnLeft,
    /// `delta - (dn/dt + [B, n])` lands in V (the linearization of the
    /// right gauge action `M^{-1} nabla M`; the flow pipeline uses this).
    BOnLeft,
}

/// Project an infinitesimal Borel-valued deformation of a transversal
/// operator back into transversal coordinates.
///
/// Returns the unique strictly-upper `n_corr` such that
/// `delta_b - (d n_corr/dt + [n_corr, cyclic_finite + b])` is `V`-valued,
/// plus that `V`-valued residue as coordinates. Uniqueness holds because
/// `ad cyclic_finite` is injective on the strictly upper subalgebra.
pub fn infinitesimal_gauge_project(
    delta_b: &LoopMatrix,
    b: &LoopMatrix,
    lie: &SimpleLieData,
    v_space: &TransversalSpace,
) -> Result<(Vec<DiffPoly>, LoopMatrix)> {
    infinitesimal_gauge_project_oriented(delta_b, b, lie, v_space, GaugeOrientation::NOnLeft)
}

pub fn infinitesimal_gauge_project_oriented(
    delta_b: &LoopMatrix,
    b: &LoopMatrix,
    lie: &SimpleLieData,
    v_space: &TransversalSpace,
    orientation: GaugeOrientation,
) -> Result<(Vec<DiffPoly>, LoopMatrix)> {
    borel_check(delta_b)?;
    borel_check(b)?;
    let n = lie.n;
    let g = GradingSpec::matrix_only();
    let p_bar = retag(&lie.cyclic_finite, g);
    let big_b = p_bar.add(&retag(b, g))?;
    let delta = retag(delta_b, g);
    let action = |nc: &LoopMatrix| -> Result<LoopMatrix> {
        let br = match orientation {
            GaugeOrientation::NOnLeft => nc.bracket(&big_b)?,
            GaugeOrientation::BOnLeft => big_b.bracket(nc)?,
        };
        nc.dt().add(&br)
    };
    let mut n_corr = LoopMatrix::zero(n, g);
    let mut v_out = vec![DiffPoly::zero(); v_space.basis.len()];
    for j in 0..n as i64 {
        let resid = delta.sub(&action(&n_corr)?)?;
        let delta_j = resid.graded_component(j)?;
        let v_idx: Vec<usize> = (0..v_space.basis.len())
            .filter(|i| v_space.degrees[*i] == j)
            .collect();
        let mu_basis = if j + 1 <= (n as i64 - 1) {
            upper_basis_at_degree(n, j + 1)
        } else {
            Vec::new()
        };
        if delta_j.is_zero() && mu_basis.is_empty() && v_idx.is_empty() {
            continue;
        }
        let rhs = piece_coords(&delta_j, j)?;
        let mut cols: Vec<Vec<Rat>> = Vec::new();
        for &i in &v_idx {
            cols.push(rational_coords(&retag(&v_space.basis[i], g), j)?);
        }
        for mu in &mu_basis {
            // degree-j part contributed by n_{j+1} through the bracket
            let br = match orientation {
                GaugeOrientation::NOnLeft => mu.bracket(&p_bar)?,
                GaugeOrientation::BOnLeft => p_bar.bracket(mu)?,
            };
            cols.push(rational_coords(&br, j)?);
        }
        let rows: Vec<Vec<Rat>> = (0..rhs.len())
            .map(|r| cols.iter().map(|c| c[r].clone()).collect())
            .collect();
        let sol = linalg::solve(&rows, &rhs).ok_or_else(|| {
            Error::TransversalityFailed(format!("gauge projection stuck at degree {j}"))
        })?;
        for (t, &i) in v_idx.iter().enumerate() {
            v_out[i] = sol[t].clone();
        }
        for (bm, c) in mu_basis.iter().zip(&sol[v_idx.len()..]) {
            n_corr = n_corr.add(&bm.scale_poly(c))?;
        }
    }
    // the defining property, re-checked exactly
    let resid = delta.sub(&action(&n_corr)?)?;
    let mut v_mat = LoopMatrix::zero(n, g);
    for (bm, c) in v_space.basis.iter().zip(&v_out) {
        v_mat = v_mat.add(&retag(bm, g).scale_poly(c))?;
    }
    if resid.sub(&v_mat)?.is_zero() {
        Ok((v_out, n_corr))
    } else {
        Err(Error::TransversalityFailed(
            "projection residue escaped the transversal space".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{first_row_transversal, make_sln};
    use crate::rational::rat;

    fn sl2_miura_connection() -> (Connection, HeisenbergSpec) {
        let lie = make_sln(2).unwrap();
        let ring = DiffRing::indexed("u", 1, 1);
        let h = lie.fundamental_coweight(0).scale_poly(&ring.jet(0, 0));
        let conn = Connection {
            leading: lie.cyclic.clone(),
            perturbation: h,
            ring,
        };
        (conn, HeisenbergSpec::principal(make_sln(2).unwrap()))
    }

    #[test]
    fn reduce_trivial_input() {
        let lie = make_sln(2).unwrap();
        let spec = HeisenbergSpec::principal(lie.clone());
        let conn = Connection {
            leading: lie.cyclic.clone(),
            perturbation: LoopMatrix::zero(2, lie.grading),
            ring: DiffRing::indexed("u", 1, 1),
        };
        let res = ds_reduce(&conn, &spec, 6).unwrap();
        assert!(res.exponent.is_empty());
        assert!(res.abelian.is_empty());
    }

    #[test]
    fn reduce_sl2_frozen_oracle_values() {
        // brute-force grade-by-grade oracle (independent script) gives
        //   c_1 = 1/8 u^2, c_3 = -1/128 u^4 + 1/32 u u'',
        //   w_1 = 1/4 u (e - f z^{-1}), w_2 = 1/8 u' h z^{-1}
        let (conn, spec) = sl2_miura_connection();
        let r = conn.ring.clone();
        let u = r.jet(0, 0);
        let res = ds_reduce(&conn, &spec, 8).unwrap();
        assert_eq!(res.coefficient(1, 0), u.pow(2).scale(&rat(1, 8)));
        let c3 = u
            .pow(4)
            .scale(&rat(-1, 128))
            .add(&u.mul(&r.jet(0, 2)).scale(&rat(1, 32)));
        assert_eq!(res.coefficient(3, 0), c3);
        let w1 = &res.exponent[&1];
        assert_eq!(w1.get(0, 1, 0), Some(&u.scale(&rat(1, 4))));
        assert_eq!(w1.get(1, 0, -1), Some(&u.scale(&rat(-1, 4))));
        let w2 = &res.exponent[&2];
        assert_eq!(w2.get(0, 0, -1), Some(&r.jet(0, 1).scale(&rat(1, 8))));
    }

    #[test]
    fn reduce_idempotent_on_abelianized_connection() {
        // feeding back d/dt + p + sum c_j p_j returns the identity gauge
        let (conn, spec) = sl2_miura_connection();
        let res = ds_reduce(&conn, &spec, 6).unwrap();
        let mut q2 = LoopMatrix::zero(2, conn.leading.grading().clone());
        for ((d, j), c) in &res.abelian {
            let b = spec.abelian_basis(*d).unwrap()[*j].clone();
            q2 = q2.add(&b.scale_poly(c)).unwrap();
        }
        let conn2 = Connection {
            leading: conn.leading.clone(),
            perturbation: q2,
            ring: conn.ring.clone(),
        };
        let res2 = ds_reduce(&conn2, &spec, 6).unwrap();
        assert!(res2.exponent.is_empty());
        for ((d, j), c) in &res.abelian {
            if *d <= 6 {
                assert_eq!(&res2.coefficient(*d, *j), c);
            }
        }
    }

    #[test]
    fn canonical_form_miura_sl2() {
        let lie = make_sln(2).unwrap();
        let v_space = first_row_transversal(&lie);
        let (ring, v) = miura_map(&lie, &v_space).unwrap();
        // v = 1/4 u^2 + 1/2 u'
        let expect = ring
            .jet(0, 0)
            .pow(2)
            .scale(&rat(1, 4))
            .add(&ring.jet(0, 1).scale(&rat(1, 2)));
        assert_eq!(v, vec![expect]);
        // all u = 0 gives all v = 0
        let zero_b = LoopMatrix::zero(2, lie.grading);
        let (v0, gauge) = canonical_oper_form(&zero_b, &lie, &v_space).unwrap();
        assert!(v0.iter().all(|p| p.is_zero()));
        assert!(gauge.is_empty());
    }

    #[test]
    fn canonical_form_is_projection() {
        let lie = make_sln(3).unwrap();
        let v_space = first_row_transversal(&lie);
        let ring = DiffRing::indexed("v", 2, 2);
        let mut b = LoopMatrix::zero(3, lie.grading);
        b.set(0, 1, 0, ring.jet(0, 0));
        b.set(0, 2, 0, ring.jet(1, 0));
        let (v, gauge) = canonical_oper_form(&b, &lie, &v_space).unwrap();
        assert_eq!(v, vec![ring.jet(0, 0), ring.jet(1, 0)]);
        assert!(gauge.is_empty());
    }

    #[test]
    fn gauge_project_examples() {
        let lie = make_sln(2).unwrap();
        let v_space = first_row_transversal(&lie);
        let ring = DiffRing::indexed("v", 1, 2);
        let b = LoopMatrix::elem(2, lie.grading, 0, 1, 0, ring.jet(0, 0));
        // V-valued input: n_corr = 0, delta_v = delta_b
        let dv = LoopMatrix::elem(2, lie.grading, 0, 1, 0, ring.jet(0, 1));
        let (v, n) = infinitesimal_gauge_project(&dv, &b, &lie, &v_space).unwrap();
        assert!(n.is_zero());
        assert_eq!(v, vec![ring.jet(0, 1)]);
        // diagonal input diag(a, -a): n_corr proportional to e
        let a = ring.jet(0, 0); // weight-2 coefficient
        let mut diag = LoopMatrix::zero(2, lie.grading);
        diag.set(0, 0, 0, a.clone());
        diag.set(1, 1, 0, a.neg());
        let (_v, n) = infinitesimal_gauge_project(&diag, &b, &lie, &v_space).unwrap();
        // [a e, f + v e] has diagonal part a h, so n_corr = a e here
        assert_eq!(n.get(0, 1, 0), Some(&a));
        assert!(n.get(1, 0, 0).is_none());
        // the right-action orientation flips the coupling sign
        let (_v2, n2) = infinitesimal_gauge_project_oriented(
            &diag,
            &b,
            &lie,
            &v_space,
            GaugeOrientation::BOnLeft,
        )
        .unwrap();
        assert_eq!(n2.get(0, 1, 0), Some(&a.neg()));
    }
}

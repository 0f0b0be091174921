//! Concrete `sl_n` data and the Heisenberg catalog.
//!
//! Only `sl_n` is shipped: the explicit matrix realizations (the cyclic
//! element, its inverse, the nonsmooth example and its conjugator) are
//! `sl_n`-specific, and all exponents are multiplicity one there.
//!
//! A [`HeisenbergSpec`] packages a maximal commutative subalgebra by graded
//! basis, a compatible filtration, and (for the nonsmooth catalog entry) the
//! explicit conjugator realizing conjugacy to the homogeneous Heisenberg.
//! Graded computations for a conjugated spec are performed in the
//! "reduction frame": conjugate by `C` (so the subalgebra becomes diagonal
//! loops, graded by the homogeneous grading), work there, conjugate back.

use crate::grading::GradingSpec;
use crate::linalg;
use crate::matrix::LoopMatrix;
use crate::poly::DiffPoly;
use crate::rational::{rat, rat_int, Rat};
use crate::{Error, Result};
use num::Zero;

/// Chevalley generators and standard structural data of `sl_n`.
#[derive(Clone, Debug)]
pub struct SimpleLieData {
    pub n: usize,
    pub grading: GradingSpec,
    /// Simple raising generators `e_i = E_{i,i+1}`.
    pub e: Vec<LoopMatrix>,
    /// Simple lowering generators `f_i = E_{i+1,i}`.
    pub f: Vec<LoopMatrix>,
    /// Simple coroots `h_i = E_ii - E_{i+1,i+1}`.
    pub h: Vec<LoopMatrix>,
    /// Highest-root vector `E_{1,n}`.
    pub e_theta: LoopMatrix,
    /// Lowest-root vector `E_{n,1}`.
    pub f_theta: LoopMatrix,
    pub coxeter_number: i64,
    pub exponents: Vec<i64>,
    /// z-constant basis of the upper Borel (coroots then positive roots).
    pub borel_plus: Vec<LoopMatrix>,
    /// z-constant basis of the lower Borel.
    pub borel_minus: Vec<LoopMatrix>,
    /// The cyclic element `sum f_i + e_theta z` (degree -1).
    pub cyclic: LoopMatrix,
    /// Its matrix inverse `sum e_i + f_theta z^{-1}` (degree +1).
    pub cyclic_inv: LoopMatrix,
    /// The finite part `sum f_i` (principal nilpotent, matrix degree -1).
    pub cyclic_finite: LoopMatrix,
}

fn unit(n: usize, g: GradingSpec, r: usize, c: usize, z: i64) -> LoopMatrix {
    LoopMatrix::elem(n, g, r, c, z, DiffPoly::one())
}

/// Standard `sl_n` data with elementary-matrix conventions. `n >= 2`.
pub fn make_sln(n: usize) -> Result<SimpleLieData> {
    if n < 2 {
        return Err(Error::RankTooSmall(n));
    }
    let g = GradingSpec::principal(n);
    let e: Vec<_> = (0..n - 1).map(|i| unit(n, g, i, i + 1, 0)).collect();
    let f: Vec<_> = (0..n - 1).map(|i| unit(n, g, i + 1, i, 0)).collect();
    let h: Vec<_> = (0..n - 1)
        .map(|i| {
            let mut m = LoopMatrix::zero(n, g);
            m.set(i, i, 0, DiffPoly::one());
            m.set(i + 1, i + 1, 0, DiffPoly::constant(rat_int(-1)));
            m
        })
        .collect();
    let e_theta = unit(n, g, 0, n - 1, 0);
    let f_theta = unit(n, g, n - 1, 0, 0);

    let mut cyclic = LoopMatrix::zero(n, g);
    for i in 0..n - 1 {
        cyclic.set(i + 1, i, 0, DiffPoly::one());
    }
    cyclic.set(0, n - 1, 1, DiffPoly::one());

    let mut cyclic_inv = LoopMatrix::zero(n, g);
    for i in 0..n - 1 {
        cyclic_inv.set(i, i + 1, 0, DiffPoly::one());
    }
    cyclic_inv.set(n - 1, 0, -1, DiffPoly::one());

    let mut cyclic_finite = LoopMatrix::zero(n, g);
    for i in 0..n - 1 {
        cyclic_finite.set(i + 1, i, 0, DiffPoly::one());
    }

    let mut borel_plus = h.clone();
    let mut borel_minus = h.clone();
    for i in 0..n {
        for j in 0..n {
            if i < j {
                borel_plus.push(unit(n, g, i, j, 0));
            } else if i > j {
                borel_minus.push(unit(n, g, i, j, 0));
            }
        }
    }

    Ok(SimpleLieData {
        n,
        grading: g,
        e,
        f,
        h,
        e_theta,
        f_theta,
        coxeter_number: n as i64,
        exponents: (1..n as i64).collect(),
        borel_plus,
        borel_minus,
        cyclic,
        cyclic_inv,
        cyclic_finite,
    })
}

impl SimpleLieData {
    pub fn rank(&self) -> usize {
        self.n - 1
    }

    /// The fundamental coweight `omega_i` as a diagonal matrix:
    /// entries `(n-i)/n` in the first `i` slots, `-i/n` after.
    pub fn fundamental_coweight(&self, i: usize) -> LoopMatrix {
        let n = self.n as i64;
        let k = (i + 1) as i64; // 1-based index of the coweight
        let mut m = LoopMatrix::zero(self.n, self.grading);
        for j in 0..self.n {
            let v = if (j as i64) < k {
                rat(n - k, n)
            } else {
                rat(-k, n)
            };
            m.set(j, j, 0, DiffPoly::constant(v));
        }
        m
    }

    /// Whether `m` lies in the flow index set `I`: positive and congruent to
    /// an exponent modulo the Coxeter number.
    pub fn flow_index_valid(&self, m: i64) -> bool {
        m >= 1 && self.exponents.iter().any(|e| (m - e) % self.coxeter_number == 0)
    }
}

/// A basis of the degree-`d` piece of `L(sl_n)` for a monomial grading.
///
/// Off-diagonal positions contribute `E_ij z^k` with the unique `k` placing
/// them in degree `d`; the traceless diagonal contributes the coroots
/// `h_i z^k`. Returned in a fixed canonical order (the tie-break order for
/// the pseudo-inverse).
pub(crate) fn piece_basis(n: usize, g: GradingSpec, d: i64) -> Vec<LoopMatrix> {
    let mut out = Vec::new();
    // diagonal block first, in coroot order
    if let Some(k) = g.z_power_for_degree(0, 0, d) {
        for i in 0..n - 1 {
            let mut m = LoopMatrix::zero(n, g);
            m.set(i, i, k, DiffPoly::one());
            m.set(i + 1, i + 1, k, DiffPoly::constant(rat_int(-1)));
            out.push(m);
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if let Some(k) = g.z_power_for_degree(i, j, d) {
                out.push(unit(n, g, i, j, k));
            }
        }
    }
    out
}

/// Coordinates of a homogeneous degree-`d` element in [`piece_basis`] order.
pub(crate) fn piece_coords(x: &LoopMatrix, d: i64) -> Result<Vec<DiffPoly>> {
    let n = x.size();
    let g = *x.grading();
    // reject components outside the degree (and z-dependence under a finite
    // grading, which only ever sees z-constant matrices)
    for (r, c, k, p) in x.iter() {
        if p.is_zero() {
            continue;
        }
        if g.z_degree() == 0 && k != 0 {
            return Err(Error::NotInSubalgebra(
                "z-dependent entry under the finite grading".into(),
            ));
        }
        if g.degree(r, c, k) != d {
            return Err(Error::NotHomogeneous(x.degree_support()));
        }
    }
    let mut out = Vec::new();
    if let Some(k) = g.z_power_for_degree(0, 0, d) {
        // diagonal entries d_1..d_n, coroot coordinates are partial sums
        let diag: Vec<DiffPoly> = (0..n)
            .map(|i| x.get(i, i, k).cloned().unwrap_or_default())
            .collect();
        let total = diag.iter().fold(DiffPoly::zero(), |a, b| a.add(b));
        if !total.is_zero() {
            return Err(Error::NotInSubalgebra("nonzero trace".into()));
        }
        let mut acc = DiffPoly::zero();
        for item in diag.iter().take(n - 1) {
            acc = acc.add(item);
            out.push(acc.clone());
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if let Some(k) = g.z_power_for_degree(i, j, d) {
                out.push(x.get(i, j, k).cloned().unwrap_or_default());
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeisenbergKind {
    Principal,
    Homogeneous,
    NonsmoothSl2,
    Custom,
}

/// The explicit conjugator of a non-graded Heisenberg to the homogeneous one,
/// applied as `x -> C^{-1} x C` (the same right-action convention as gauge
/// transformations).
#[derive(Clone, Debug)]
pub struct Conjugator {
    pub fwd: LoopMatrix,
    pub inv: LoopMatrix,
}

#[derive(Clone, Debug)]
pub struct HeisenbergSpec {
    pub lie: SimpleLieData,
    pub kind: HeisenbergKind,
    /// Catalog id: "principal", "homogeneous", "nonsmooth-sl2".
    pub id: String,
    /// The compatible filtration, as a monomial grading. For a spec with a
    /// conjugator the degree of `x` is the degree of `C^{-1} x C` in this
    /// grading.
    pub filtration: GradingSpec,
    pub conjugator: Option<Conjugator>,
    /// Provenance of the filtration choice (it is not canonical in general).
    pub filtration_note: String,
}

impl HeisenbergSpec {
    /// The centralizer of the cyclic element, graded by the principal
    /// gradation; basis `p_d = cyclic^{-d}` for `d` congruent to an exponent
    /// mod the Coxeter number.
    pub fn principal(lie: SimpleLieData) -> Self {
        let filtration = lie.grading;
        HeisenbergSpec {
            lie,
            kind: HeisenbergKind::Principal,
            id: "principal".into(),
            filtration,
            conjugator: None,
            filtration_note: "principal gradation (canonical for this class)".into(),
        }
    }

    /// Diagonal loops, graded by the homogeneous grading.
    pub fn homogeneous(lie: SimpleLieData) -> Self {
        HeisenbergSpec {
            lie,
            kind: HeisenbergKind::Homogeneous,
            id: "homogeneous".into(),
            filtration: GradingSpec::homogeneous(),
            conjugator: None,
            filtration_note: "homogeneous filtration (canonical for this class)".into(),
        }
    }

    /// The nonsmooth `sl_2` example: generators
    /// `p~_i = E12 z^{2-i} + E21 z^{-i}`, conjugated to diagonal loops by the
    /// explicit element `C = [[-1/2, -z], [-z^{-1}/2, 1]]`.
    pub fn nonsmooth_sl2() -> Self {
        let lie = make_sln(2).expect("n = 2");
        let g = GradingSpec::homogeneous();
        let mut fwd = LoopMatrix::zero(2, g);
        fwd.set(0, 0, 0, DiffPoly::constant(rat(-1, 2)));
        fwd.set(0, 1, 1, DiffPoly::constant(rat_int(-1)));
        fwd.set(1, 0, -1, DiffPoly::constant(rat(-1, 2)));
        fwd.set(1, 1, 0, DiffPoly::one());
        // det C = -1; C^{-1} = [[-1, -z], [-z^{-1}/2, 1/2]]
        let mut inv = LoopMatrix::zero(2, g);
        inv.set(0, 0, 0, DiffPoly::constant(rat_int(-1)));
        inv.set(0, 1, 1, DiffPoly::constant(rat_int(-1)));
        inv.set(1, 0, -1, DiffPoly::constant(rat(-1, 2)));
        inv.set(1, 1, 0, DiffPoly::constant(rat(1, 2)));
        HeisenbergSpec {
            lie,
            kind: HeisenbergKind::NonsmoothSl2,
            id: "nonsmooth-sl2".into(),
            filtration: g,
            conjugator: Some(Conjugator { fwd, inv }),
            filtration_note:
                "homogeneous filtration transported through the explicit conjugator (one concrete choice; no canonical filtration exists)"
                    .into(),
        }
    }

    /// The generator `p~_i` of the nonsmooth example (any integer `i`).
    pub fn nonsmooth_generator(i: i64) -> LoopMatrix {
        let g = GradingSpec::homogeneous();
        let mut m = LoopMatrix::zero(2, g);
        m.set(0, 1, 2 - i, DiffPoly::one());
        m.set(1, 0, -i, DiffPoly::one());
        m
    }

    /// The grading in which graded computations actually run (the reduction
    /// frame): the filtration itself, which for a conjugated spec applies to
    /// transported elements.
    pub fn frame_grading(&self) -> GradingSpec {
        self.filtration
    }

    /// Transport into the reduction frame: `x -> C^{-1} x C` when a
    /// conjugator is present, identity otherwise.
    pub fn to_frame(&self, x: &LoopMatrix) -> Result<LoopMatrix> {
        match &self.conjugator {
            None => Ok(x.clone()),
            Some(c) => c.inv.mul(x)?.mul(&c.fwd),
        }
    }

    /// Transport out of the reduction frame.
    pub fn from_frame(&self, x: &LoopMatrix) -> Result<LoopMatrix> {
        match &self.conjugator {
            None => Ok(x.clone()),
            Some(c) => c.fwd.mul(x)?.mul(&c.inv),
        }
    }

    /// Basis of the degree-`d` part of the subalgebra, in the frame picture
    /// (diagonal loops for homogeneous/nonsmooth, powers of the cyclic
    /// element for principal).
    pub fn abelian_basis_frame(&self, d: i64) -> Vec<LoopMatrix> {
        match self.kind {
            HeisenbergKind::Principal => {
                if d == 0 || !self.lie.flow_index_valid(d.abs()) {
                    return Vec::new();
                }
                vec![self.basis_element(d)]
            }
            HeisenbergKind::Homogeneous | HeisenbergKind::NonsmoothSl2 | HeisenbergKind::Custom => {
                let n = self.lie.n;
                let g = self.frame_grading();
                (0..n - 1)
                    .map(|i| {
                        let mut m = LoopMatrix::zero(n, g);
                        m.set(i, i, -d, DiffPoly::one());
                        m.set(i + 1, i + 1, -d, DiffPoly::constant(rat_int(-1)));
                        m
                    })
                    .collect()
            }
        }
    }

    /// Basis of the degree-`d` part in the original picture.
    pub fn abelian_basis(&self, d: i64) -> Result<Vec<LoopMatrix>> {
        self.abelian_basis_frame(d)
            .iter()
            .map(|b| self.from_frame(b))
            .collect()
    }

    /// Degree-d basis element for the principal case: `p_d` with
    /// `p_{-k} = cyclic^k` and `p_k = cyclic_inv^k`.
    pub fn basis_element(&self, d: i64) -> LoopMatrix {
        assert!(self.kind == HeisenbergKind::Principal && d != 0);
        let gen = if d < 0 {
            &self.lie.cyclic
        } else {
            &self.lie.cyclic_inv
        };
        let mut out = gen.clone();
        for _ in 1..d.abs() {
            out = out.mul(gen).expect("exact powers");
        }
        out
    }

    /// Literal membership in the positive part `a_+` (the intersection with
    /// `L g_+`): all stored z-powers `<= 0`.
    pub fn in_positive_part(&self, x: &LoopMatrix) -> bool {
        x.z_max().map_or(true, |k| k <= 0)
    }

    /// Lowest filtration degree of `a_+` (the positive part).
    pub fn positive_part_min_degree(&self) -> i64 {
        match self.kind {
            HeisenbergKind::Principal => 1,
            HeisenbergKind::Homogeneous => 0,
            HeisenbergKind::NonsmoothSl2 | HeisenbergKind::Custom => 1,
        }
    }

    /// Lowest filtration degree of `a^+` (the non-negative filtration part).
    /// For the nonsmooth example this differs from the positive part: the
    /// degree-0 generator lies in `a^+` but not in `a_+`.
    pub fn nonneg_part_min_degree(&self) -> i64 {
        match self.kind {
            HeisenbergKind::Principal => 1,
            _ => 0,
        }
    }
}

/// Transversal complement of `[cyclic_finite, n_+]` inside the Borel.
#[derive(Clone, Debug)]
pub struct TransversalSpace {
    pub basis: Vec<LoopMatrix>,
    pub degrees: Vec<i64>,
}

/// The first-row transversal `V = span{E_{1,j+1} : j an exponent}`, matching
/// the companion form of scalar differential operators.
pub fn first_row_transversal(lie: &SimpleLieData) -> TransversalSpace {
    let n = lie.n;
    let basis: Vec<_> = (1..n).map(|j| unit(n, lie.grading, 0, j, 0)).collect();
    TransversalSpace {
        degrees: (1..n as i64).collect(),
        basis,
    }
}

impl TransversalSpace {
    /// Exact rank check of `b_+ = [cyclic_finite, n_+] (+) V` and the
    /// exponent multiplicity count.
    pub fn verify(&self, lie: &SimpleLieData) -> Result<()> {
        let n = lie.n;
        let g = GradingSpec::matrix_only();
        // coordinates inside b_+ indexed by (diag coroots, upper positions)
        let dim_b = (n - 1) + n * (n - 1) / 2;
        let coord = |x: &LoopMatrix| -> Result<Vec<Rat>> {
            let mut v = Vec::with_capacity(dim_b);
            // coroot coordinates: partial sums of the diagonal
            let mut acc = Rat::zero();
            for i in 0..n - 1 {
                let d = x
                    .get(i, i, 0)
                    .map(|p| p.as_constant().ok_or(Error::NotInSubalgebra("jet entry".into())))
                    .transpose()?
                    .unwrap_or_else(Rat::zero);
                acc += d;
                v.push(acc.clone());
            }
            for i in 0..n {
                for j in 0..n {
                    if i < j {
                        let c = x
                            .get(i, j, 0)
                            .map(|p| p.as_constant().ok_or(Error::NotInSubalgebra("jet entry".into())))
                            .transpose()?
                            .unwrap_or_else(Rat::zero);
                        v.push(c);
                    }
                }
            }
            Ok(v)
        };
        // columns: ad(cyclic_finite) of every strictly-upper generator, then V
        let mut cols: Vec<Vec<Rat>> = Vec::new();
        let p_bar = {
            let mut m = LoopMatrix::zero(n, g);
            for i in 0..n - 1 {
                m.set(i + 1, i, 0, DiffPoly::one());
            }
            m
        };
        let mut nplus_dim = 0;
        for i in 0..n {
            for j in 0..n {
                if i < j {
                    nplus_dim += 1;
                    let b = unit(n, g, i, j, 0);
                    cols.push(coord(&p_bar.bracket(&b)?)?);
                }
            }
        }
        for b in &self.basis {
            let mut bb = b.clone();
            // re-tag into the finite grading for the bracket-free coordinate map
            bb = LoopMatrix::zero(n, g).add(&retag(&bb, g))?;
            cols.push(coord(&bb)?);
        }
        // transpose into rows for rank
        let rows: Vec<Vec<Rat>> = (0..dim_b)
            .map(|r| cols.iter().map(|c| c[r].clone()).collect())
            .collect();
        let rk = linalg::rank(&rows);
        if rk != nplus_dim + self.basis.len() || rk != dim_b {
            return Err(Error::TransversalityFailed(format!(
                "rank {rk}, expected {} = dim n_+ ({nplus_dim}) + dim V ({})",
                dim_b,
                self.basis.len()
            )));
        }
        // multiplicity of each exponent is 1 for sl_n
        for j in &lie.exponents {
            let mult = self.degrees.iter().filter(|d| *d == j).count();
            if mult != 1 {
                return Err(Error::TransversalityFailed(format!(
                    "exponent {j} has multiplicity {mult}"
                )));
            }
        }
        Ok(())
    }
}

/// Rebuild a matrix with a different grading tag (entries unchanged).
pub(crate) fn retag(x: &LoopMatrix, g: GradingSpec) -> LoopMatrix {
    let mut out = LoopMatrix::zero(x.size(), g);
    for (r, c, k, p) in x.iter() {
        out.set(r, c, k, p.clone());
    }
    out
}

/// Dimension of the centralizer of a constant matrix inside `sl_n`.
fn centralizer_dim_sln(sym: &LoopMatrix) -> Result<usize> {
    let n = sym.size();
    let g = *sym.grading();
    // basis of sl_n: coroots + off-diagonal units, all z-constant
    let mut basis: Vec<LoopMatrix> = Vec::new();
    for i in 0..n - 1 {
        let mut m = LoopMatrix::zero(n, g);
        m.set(i, i, 0, DiffPoly::one());
        m.set(i + 1, i + 1, 0, DiffPoly::constant(rat_int(-1)));
        basis.push(m);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j {
                basis.push(unit(n, g, i, j, 0));
            }
        }
    }
    // rows: coordinates of [sym, b] in the full gl_n z-constant coordinates
    let mut rows: Vec<Vec<Rat>> = vec![Vec::new(); n * n];
    for b in &basis {
        let br = sym.bracket(b)?;
        for r in 0..n {
            for c in 0..n {
                let v = br
                    .get(r, c, 0)
                    .map(|p| p.as_constant().ok_or(Error::NotInSubalgebra("jet entry".into())))
                    .transpose()?
                    .unwrap_or_else(Rat::zero);
                rows[r * n + c].push(v);
            }
        }
    }
    Ok(basis.len() - linalg::rank(&rows))
}

/// Strong regularity of a filtration-homogeneous element `p` with respect to
/// the spec's subalgebra.
///
/// Two exact conditions, both checked in the reduction frame:
/// 1. the z-constant symbol of `p` (set `z = 1` in the leading component)
///    has centralizer of dimension exactly `rank(g)` inside `sl_n`;
/// 2. over a probe range of degrees, the kernel of `ad p` on each graded
///    piece equals the degree part of the subalgebra (this is what the
///    kernel/image splitting actually needs, and it rules out regular
///    elements whose centralizer is not the subalgebra itself).
pub fn is_strongly_regular(p: &LoopMatrix, spec: &HeisenbergSpec) -> Result<bool> {
    let pf = spec.to_frame(p)?;
    let l = pf.homogeneous_degree()?; // errors if not homogeneous
    // symbol: collapse z -> 1
    let n = pf.size();
    let g = *pf.grading();
    let mut sym = LoopMatrix::zero(n, g);
    for (r, c, _k, poly) in pf.iter() {
        let prev = sym.get(r, c, 0).cloned().unwrap_or_default();
        sym.set(r, c, 0, prev.add(poly));
    }
    if centralizer_dim_sln(&sym)? != spec.lie.rank() {
        return Ok(false);
    }
    let h = spec.lie.coxeter_number;
    for d in -2 * h..=2 * h {
        let dom = piece_basis(n, g, d);
        if dom.is_empty() {
            continue;
        }
        let cod_dim = piece_basis(n, g, d + l).len();
        let mut rows: Vec<Vec<Rat>> = vec![Vec::new(); cod_dim];
        for b in &dom {
            let coords = piece_coords(&pf.bracket(b)?, d + l)?;
            for (r, v) in coords.iter().enumerate() {
                let c = v
                    .as_constant()
                    .ok_or_else(|| Error::NotInSubalgebra("jet entry in p".into()))?;
                rows[r].push(c);
            }
        }
        let ker = linalg::kernel_basis(&rows);
        let ab = spec.abelian_basis_frame(d);
        if ker.len() != ab.len() {
            return Ok(false);
        }
        // containment: each abelian basis vector must be in the kernel
        for a in &ab {
            let br = pf.bracket(a)?;
            if !br.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Decompose a homogeneous `delta` of the given filtration degree as
/// `delta = a_part + [p, m_part]` with `a_part` in the subalgebra and
/// `m_part` homogeneous of degree `degree - deg p`.
///
/// Solved by exact linear algebra on the finite graded piece; the choice of
/// `m_part` modulo the kernel of `ad p` is fixed by the minimum-norm
/// solution in the canonical piece-basis coordinates.
pub fn kernel_image_split(
    delta: &LoopMatrix,
    p: &LoopMatrix,
    spec: &HeisenbergSpec,
    degree: i64,
) -> Result<(LoopMatrix, LoopMatrix)> {
    let df = spec.to_frame(delta)?;
    let pf = spec.to_frame(p)?;
    let (af, mf) = kernel_image_split_frame(&df, &pf, spec, degree)?;
    Ok((spec.from_frame(&af)?, spec.from_frame(&mf)?))
}

/// Frame-picture splitting (callers that already transported use this).
pub(crate) fn kernel_image_split_frame(
    delta: &LoopMatrix,
    p: &LoopMatrix,
    spec: &HeisenbergSpec,
    degree: i64,
) -> Result<(LoopMatrix, LoopMatrix)> {
    let n = delta.size();
    let g = *delta.grading();
    let l = p.homogeneous_degree()?;
    let rhs = piece_coords(delta, degree).map_err(|_| Error::NotHomogeneous(delta.degree_support()))?;
    let ab = spec.abelian_basis_frame(degree);
    let dom = piece_basis(n, g, degree - l);
    let na = ab.len();
    let rows_dim = rhs.len();

    // column matrix [abelian | ad p . piece(degree - l)]
    let mut cols: Vec<Vec<Rat>> = Vec::new();
    for a in &ab {
        let coords = piece_coords(a, degree)?;
        cols.push(
            coords
                .iter()
                .map(|v| v.as_constant().expect("rational basis"))
                .collect(),
        );
    }
    for b in &dom {
        let coords = piece_coords(&p.bracket(b)?, degree)?;
        cols.push(
            coords
                .iter()
                .map(|v| {
                    v.as_constant()
                        .expect("p has rational entries, so does ad p of a basis vector")
                })
                .collect(),
        );
    }
    let a_mat: Vec<Vec<Rat>> = (0..rows_dim)
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    if linalg::rank(&a_mat) != rows_dim {
        return Err(Error::SingularSplit {
            degree,
            reason: "a-part plus image of ad p does not span the graded piece (p not strongly regular, or filtration mismatch)"
                .into(),
        });
    }
    let mut x = linalg::solve(&a_mat, &rhs).ok_or(Error::SingularSplit {
        degree,
        reason: "inconsistent system".into(),
    })?;
    // kernel vectors are supported on the m-block when the sum is direct
    let ker_full = linalg::kernel_basis(&a_mat);
    for kv in &ker_full {
        if kv[..na].iter().any(|c| !c.is_zero()) {
            return Err(Error::SingularSplit {
                degree,
                reason: "subalgebra part overlaps the image of ad p".into(),
            });
        }
    }
    let ker_m: Vec<Vec<Rat>> = ker_full.iter().map(|kv| kv[na..].to_vec()).collect();
    linalg::min_norm_mod_kernel(&mut x[na..], &ker_m);

    let mut a_part = LoopMatrix::zero(n, g);
    for (b, c) in ab.iter().zip(&x[..na]) {
        a_part = a_part.add(&b.scale_poly(c))?;
    }
    let mut m_part = LoopMatrix::zero(n, g);
    for (b, c) in dom.iter().zip(&x[na..]) {
        m_part = m_part.add(&b.scale_poly(c))?;
    }
    Ok((a_part, m_part))
}

/// Coefficients of `a_part` in the frame abelian basis at the given degree.
pub(crate) fn abelian_coords_frame(
    a_part: &LoopMatrix,
    spec: &HeisenbergSpec,
    degree: i64,
) -> Result<Vec<DiffPoly>> {
    let ab = spec.abelian_basis_frame(degree);
    if ab.is_empty() {
        return if a_part.is_zero() {
            Ok(Vec::new())
        } else {
            Err(Error::NotInSubalgebra(format!(
                "no abelian directions at degree {degree}"
            )))
        };
    }
    // both principal and diagonal bases have disjoint leading positions;
    // solve the small linear system in piece coordinates
    let coords = piece_coords(a_part, degree)?;
    let cols: Vec<Vec<Rat>> = ab
        .iter()
        .map(|b| {
            piece_coords(b, degree)
                .expect("basis homogeneous")
                .iter()
                .map(|v| v.as_constant().expect("rational"))
                .collect()
        })
        .collect();
    let rows: Vec<Vec<Rat>> = (0..coords.len())
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    linalg::solve(&rows, &coords).ok_or(Error::NotInSubalgebra(
        "element outside the abelian subalgebra".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sln_structure() {
        assert!(matches!(make_sln(1), Err(Error::RankTooSmall(1))));
        let sl3 = make_sln(3).unwrap();
        assert_eq!(sl3.coxeter_number, 3);
        assert_eq!(sl3.exponents, vec![1, 2]);
        // Cartan relations [h_i, e_j] = a_{ji} e_j and [e_i, f_i] = h_i
        for i in 0..2 {
            for j in 0..2 {
                let br = sl3.h[i].bracket(&sl3.e[j]).unwrap();
                let a = if i == j { 2 } else { -1 };
                assert_eq!(br, sl3.e[j].scale(&rat_int(a)));
            }
            let br = sl3.e[i].bracket(&sl3.f[i]).unwrap();
            assert_eq!(br, sl3.h[i]);
        }
    }

    #[test]
    fn cyclic_element_matrices() {
        let sl2 = make_sln(2).unwrap();
        // p_{-1} = [[0, z], [1, 0]]
        assert_eq!(sl2.cyclic.get(0, 1, 1), Some(&DiffPoly::one()));
        assert_eq!(sl2.cyclic.get(1, 0, 0), Some(&DiffPoly::one()));
        assert_eq!(sl2.cyclic.homogeneous_degree().unwrap(), -1);
        // p_1 = [[0, 1], [z^{-1}, 0]]
        assert_eq!(sl2.cyclic_inv.get(0, 1, 0), Some(&DiffPoly::one()));
        assert_eq!(sl2.cyclic_inv.get(1, 0, -1), Some(&DiffPoly::one()));
        assert_eq!(sl2.cyclic_inv.homogeneous_degree().unwrap(), 1);
        // matrix inverse: p_{-1} p_1 = Id
        let prod = sl2.cyclic.mul(&sl2.cyclic_inv).unwrap();
        for i in 0..2 {
            assert_eq!(prod.get(i, i, 0), Some(&DiffPoly::one()));
        }
    }

    #[test]
    fn principal_basis_powers() {
        let spec = HeisenbergSpec::principal(make_sln(2).unwrap());
        // p_3 = p_1^3 = [[0, z^{-1}], [z^{-2}, 0]]
        let p3 = spec.basis_element(3);
        assert_eq!(p3.get(0, 1, -1), Some(&DiffPoly::one()));
        assert_eq!(p3.get(1, 0, -2), Some(&DiffPoly::one()));
        // (p_1)^2 = z^{-1} Id is excluded from the sl_2 basis
        assert!(spec.abelian_basis_frame(2).is_empty());
        assert!(!spec.lie.flow_index_valid(2));
        // abelian: [p_{-1}, p_3] = 0
        assert!(spec.lie.cyclic.bracket(&p3).unwrap().is_zero());
        // positive part: p_1 yes, p_{-1} no
        assert!(spec.in_positive_part(&spec.basis_element(1)));
        assert!(!spec.in_positive_part(&spec.lie.cyclic));
    }

    #[test]
    fn homogeneous_spec() {
        let spec = HeisenbergSpec::homogeneous(make_sln(2).unwrap());
        let basis = spec.abelian_basis_frame(-1);
        // degree -1 is h (x) z
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0].get(0, 0, 1), Some(&DiffPoly::one()));
        // abelian on random pairs
        let a = &spec.abelian_basis_frame(2)[0];
        let b = &spec.abelian_basis_frame(-3)[0];
        assert!(a.bracket(b).unwrap().is_zero());
    }

    #[test]
    fn nonsmooth_conjugation_identity() {
        let spec = HeisenbergSpec::nonsmooth_sl2();
        for i in [-2i64, -1, 0, 1, 2, 3] {
            let gen = HeisenbergSpec::nonsmooth_generator(i);
            let t = spec.to_frame(&gen).unwrap();
            // diag(z^{1-i}, -z^{1-i})
            let mut expect = LoopMatrix::zero(2, GradingSpec::homogeneous());
            expect.set(0, 0, 1 - i, DiffPoly::one());
            expect.set(1, 1, 1 - i, DiffPoly::constant(rat_int(-1)));
            assert_eq!(t, expect, "generator {i}");
        }
        // gap: the degree-0 generator is in a^+ but not in a_+
        let p1 = HeisenbergSpec::nonsmooth_generator(1);
        assert!(!spec.in_positive_part(&p1));
        assert!(spec.in_positive_part(&HeisenbergSpec::nonsmooth_generator(2)));
        assert_eq!(spec.positive_part_min_degree(), 1);
        assert_eq!(spec.nonneg_part_min_degree(), 0);
        // abelian: [p~_1, p~_3] = 0
        let p3 = HeisenbergSpec::nonsmooth_generator(3);
        assert!(p1.bracket(&p3).unwrap().is_zero());
    }

    #[test]
    fn strong_regularity() {
        let sl2 = make_sln(2).unwrap();
        let prin = HeisenbergSpec::principal(sl2.clone());
        assert!(is_strongly_regular(&sl2.cyclic, &prin).unwrap());
        let homog = HeisenbergSpec::homogeneous(sl2.clone());
        let hz = &homog.abelian_basis_frame(-1)[0];
        assert!(is_strongly_regular(hz, &homog).unwrap());
        // nilpotent symbol e (x) z fails
        let ez = LoopMatrix::elem(2, GradingSpec::homogeneous(), 0, 1, 1, DiffPoly::one());
        assert!(!is_strongly_regular(&ez, &homog).unwrap());
        // inhomogeneous input is an error
        let bad = sl2.cyclic.add(&sl2.e[0]).unwrap();
        assert!(is_strongly_regular(&bad, &prin).is_err());
    }

    #[test]
    fn split_examples() {
        let sl2 = make_sln(2).unwrap();
        let spec = HeisenbergSpec::principal(sl2.clone());
        // delta = p_3 (already abelian) -> (p_3, 0)
        let p3 = spec.basis_element(3);
        let (a, m) = kernel_image_split(&p3, &sl2.cyclic, &spec, 3).unwrap();
        assert_eq!(a, p3);
        assert!(m.is_zero());
        // delta = h at degree 0 -> a = 0, m = -(1/2)(e - f z^{-1})
        let mut h = LoopMatrix::zero(2, sl2.grading);
        h.set(0, 0, 0, DiffPoly::one());
        h.set(1, 1, 0, DiffPoly::constant(rat_int(-1)));
        let (a, m) = kernel_image_split(&h, &sl2.cyclic, &spec, 0).unwrap();
        assert!(a.is_zero());
        assert_eq!(m.get(0, 1, 0), Some(&DiffPoly::constant(rat(-1, 2))));
        assert_eq!(m.get(1, 0, -1), Some(&DiffPoly::constant(rat(1, 2))));
        // re-substitution
        let back = a.add(&sl2.cyclic.bracket(&m).unwrap()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn transversal_rank_identity() {
        for n in [2usize, 3, 4] {
            let lie = make_sln(n).unwrap();
            let v = first_row_transversal(&lie);
            v.verify(&lie).unwrap();
        }
    }
}

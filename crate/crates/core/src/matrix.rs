//! Windowed Laurent matrices over differential polynomials.
//!
//! A [`LoopMatrix`] is an `n x n` matrix whose entries are finite sums
//! `sum_k p_k(jets) z^k`, tagged with a validity window and a grading.
//! Elements of the loop algebra are Laurent series that are finite in the
//! `+z` direction and possibly infinite toward `z^-inf`; truncation cuts the
//! low end. Concretely:
//!
//! - `Window::Exact`: every unstored coefficient is exactly zero;
//! - `Window::Truncated { lo }`: coefficients at `z^k` with `k >= lo` are
//!   exact, anything below `lo` is unknown (dropped by a truncation).
//!
//! Products contract windows pessimistically: the unknown tail of one factor
//! times the stored part of the other pollutes powers up to
//! `lo_a + hi_b - 1`, so the product is trusted from
//! `max(lo_a + hi_b, lo_b + hi_a)` on. An operation that would need data
//! below a window fails loudly with [`Error::WindowUnderflow`].

use crate::grading::{GradingSpec, SplittingKind};
use crate::poly::{DiffPoly, DiffRing};
use crate::rational::Rat;
use crate::{Error, Result};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    /// All unstored coefficients are exactly zero.
    Exact,
    /// Coefficients below `lo` have been truncated away and are unknown.
    Truncated { lo: i64 },
}

impl Window {
    fn combine_add(a: Window, b: Window) -> Window {
        match (a, b) {
            (Window::Exact, Window::Exact) => Window::Exact,
            (Window::Truncated { lo }, Window::Exact)
            | (Window::Exact, Window::Truncated { lo }) => Window::Truncated { lo },
            (Window::Truncated { lo: l1 }, Window::Truncated { lo: l2 }) => {
                Window::Truncated { lo: l1.max(l2) }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopMatrix {
    n: usize,
    // entries[row * n + col]: z-power -> coefficient polynomial
    entries: Vec<BTreeMap<i64, DiffPoly>>,
    window: Window,
    grading: GradingSpec,
}

impl LoopMatrix {
    pub fn zero(n: usize, grading: GradingSpec) -> Self {
        LoopMatrix {
            n,
            entries: vec![BTreeMap::new(); n * n],
            window: Window::Exact,
            grading,
        }
    }

    /// `coeff * E_{row,col} z^zpow` (0-indexed positions).
    pub fn elem(n: usize, grading: GradingSpec, row: usize, col: usize, zpow: i64, coeff: DiffPoly) -> Self {
        let mut m = LoopMatrix::zero(n, grading);
        m.set(row, col, zpow, coeff);
        m
    }

    /// Diagonal z-constant matrix from the given entries (must sum to zero
    /// for an `sl_n` element; not enforced here).
    pub fn diagonal(grading: GradingSpec, diag: &[DiffPoly]) -> Self {
        let n = diag.len();
        let mut m = LoopMatrix::zero(n, grading);
        for (i, p) in diag.iter().enumerate() {
            m.set(i, i, 0, p.clone());
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn grading(&self) -> &GradingSpec {
        &self.grading
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// `(z_min, z_max)` of the window: the lowest trustworthy power (None
    /// means unbounded below / fully exact) and the highest stored power.
    pub fn z_span(&self) -> (Option<i64>, Option<i64>) {
        let lo = match self.window {
            Window::Exact => None,
            Window::Truncated { lo } => Some(lo),
        };
        (lo, self.z_max())
    }

    pub fn z_max(&self) -> Option<i64> {
        self.entries
            .iter()
            .flat_map(|e| e.keys().next_back())
            .max()
            .copied()
    }

    pub fn z_min_stored(&self) -> Option<i64> {
        self.entries
            .iter()
            .flat_map(|e| e.keys().next())
            .min()
            .copied()
    }

    pub fn set(&mut self, row: usize, col: usize, zpow: i64, coeff: DiffPoly) {
        if let Window::Truncated { lo } = self.window {
            debug_assert!(zpow >= lo, "setting a coefficient below the window");
        }
        let e = &mut self.entries[row * self.n + col];
        if coeff.is_zero() {
            e.remove(&zpow);
        } else {
            e.insert(zpow, coeff);
        }
    }

    pub fn get(&self, row: usize, col: usize, zpow: i64) -> Option<&DiffPoly> {
        self.entries[row * self.n + col].get(&zpow)
    }

    pub fn entry_powers(&self, row: usize, col: usize) -> impl Iterator<Item = (i64, &DiffPoly)> {
        self.entries[row * self.n + col].iter().map(|(k, p)| (*k, p))
    }

    /// Iterate all stored coefficients as `(row, col, zpow, poly)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, i64, &DiffPoly)> {
        let n = self.n;
        self.entries.iter().enumerate().flat_map(move |(idx, e)| {
            let (r, c) = (idx / n, idx % n);
            e.iter().map(move |(k, p)| (r, c, *k, p))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_empty())
    }

    fn check_compat(&self, other: &LoopMatrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(self.n, other.n));
        }
        self.grading.require_compatible(&other.grading)
    }

    pub fn add(&self, other: &LoopMatrix) -> Result<LoopMatrix> {
        self.check_compat(other)?;
        let window = Window::combine_add(self.window, other.window);
        let mut out = LoopMatrix {
            n: self.n,
            entries: self.entries.clone(),
            window,
            grading: self.grading,
        };
        for (idx, e) in other.entries.iter().enumerate() {
            for (k, p) in e {
                let cell = &mut out.entries[idx];
                let s = match cell.get(k) {
                    Some(q) => q.add(p),
                    None => p.clone(),
                };
                if s.is_zero() {
                    cell.remove(k);
                } else {
                    cell.insert(*k, s);
                }
            }
        }
        out.enforce_window();
        Ok(out)
    }

    pub fn sub(&self, other: &LoopMatrix) -> Result<LoopMatrix> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LoopMatrix {
        self.map_coeffs(|p| p.neg())
    }

    pub fn scale(&self, c: &Rat) -> LoopMatrix {
        self.map_coeffs(|p| p.scale(c))
    }

    pub fn scale_poly(&self, c: &DiffPoly) -> LoopMatrix {
        self.map_coeffs(|p| p.mul(c))
    }

    /// Entrywise formal t-derivative (z-window unchanged).
    pub fn dt(&self) -> LoopMatrix {
        self.map_coeffs(|p| p.dt())
    }

    fn map_coeffs<F: Fn(&DiffPoly) -> DiffPoly>(&self, f: F) -> LoopMatrix {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                e.iter()
                    .filter_map(|(k, p)| {
                        let q = f(p);
                        (!q.is_zero()).then_some((*k, q))
                    })
                    .collect()
            })
            .collect();
        LoopMatrix {
            n: self.n,
            entries,
            window: self.window,
            grading: self.grading,
        }
    }

    /// Matrix product with pessimistic window contraction.
    pub fn mul(&self, other: &LoopMatrix) -> Result<LoopMatrix> {
        self.check_compat(other)?;
        let window = self.mul_window(other)?;
        let lo = match window {
            Window::Truncated { lo } => Some(lo),
            Window::Exact => None,
        };
        let mut out = LoopMatrix {
            n: self.n,
            entries: vec![BTreeMap::new(); self.n * self.n],
            window,
            grading: self.grading,
        };
        for i in 0..self.n {
            for l in 0..self.n {
                let a = &self.entries[i * self.n + l];
                if a.is_empty() {
                    continue;
                }
                for j in 0..self.n {
                    let b = &other.entries[l * self.n + j];
                    if b.is_empty() {
                        continue;
                    }
                    let cell_idx = i * self.n + j;
                    for (ka, pa) in a {
                        for (kb, pb) in b {
                            let k = ka + kb;
                            if let Some(lo) = lo {
                                if k < lo {
                                    continue;
                                }
                            }
                            let prod = pa.mul(pb);
                            if prod.is_zero() {
                                continue;
                            }
                            out.entries[cell_idx]
                                .entry(k)
                                .or_default()
                                .add_assign_ref(&prod);
                        }
                    }
                }
            }
        }
        for e in &mut out.entries {
            e.retain(|_, p| !p.is_zero());
        }
        Ok(out)
    }

    fn mul_window(&self, other: &LoopMatrix) -> Result<Window> {
        // a factor that is exactly zero annihilates everything, including
        // unknown tails of the other factor
        if (self.window == Window::Exact && self.is_zero())
            || (other.window == Window::Exact && other.is_zero())
        {
            return Ok(Window::Exact);
        }
        // a truncated factor with nothing stored is entirely unknown: the
        // product retains no trustworthy coefficients at all
        for m in [self, other] {
            if matches!(m.window, Window::Truncated { .. }) && m.z_max().is_none() {
                return Err(Error::WindowUnderflow(
                    "factor lies entirely below its validity window".into(),
                ));
            }
        }
        let mut bound: Option<i64> = None;
        if let Window::Truncated { lo } = self.window {
            // unknown tail of self pollutes powers below lo + z_max(other)
            let hi = other.z_max().expect("checked above");
            bound = Some(bound.map_or(lo + hi, |b: i64| b.max(lo + hi)));
        }
        if let Window::Truncated { lo } = other.window {
            let hi = self.z_max().expect("checked above");
            let cand = lo + hi;
            bound = Some(bound.map_or(cand, |b: i64| b.max(cand)));
        }
        Ok(match bound {
            None => Window::Exact,
            Some(lo) => Window::Truncated { lo },
        })
    }

    /// Lie bracket `[a, b] = ab - ba`.
    pub fn bracket(&self, other: &LoopMatrix) -> Result<LoopMatrix> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        ab.sub(&ba)
    }

    pub fn trace(&self) -> DiffPoly {
        let mut tr = DiffPoly::zero();
        for i in 0..self.n {
            for (_, p) in self.entries[i * self.n + i].iter() {
                tr = tr.add(p);
            }
        }
        tr
    }

    /// Trace per z-power (for `sl_n` membership checks).
    pub fn trace_by_power(&self) -> BTreeMap<i64, DiffPoly> {
        let mut tr: BTreeMap<i64, DiffPoly> = BTreeMap::new();
        for i in 0..self.n {
            for (k, p) in self.entries[i * self.n + i].iter() {
                let s = match tr.get(k) {
                    Some(q) => q.add(p),
                    None => p.clone(),
                };
                if s.is_zero() {
                    tr.remove(k);
                } else {
                    tr.insert(*k, s);
                }
            }
        }
        tr
    }

    fn enforce_window(&mut self) {
        if let Window::Truncated { lo } = self.window {
            for e in &mut self.entries {
                e.retain(|k, _| *k >= lo);
            }
        }
    }

    /// Drop all coefficients below `lo` and mark the window accordingly.
    pub fn truncate_below(&self, lo: i64) -> LoopMatrix {
        let mut out = self.clone();
        out.window = Window::combine_add(out.window, Window::Truncated { lo });
        out.enforce_window();
        out
    }

    /// Degrees `d` whose full graded piece lies inside the window.
    /// `None` means every degree is covered (exact matrix).
    pub fn trusted_degree_cap(&self) -> Option<i64> {
        match self.window {
            Window::Exact => None,
            Window::Truncated { lo } => {
                let zd = self.grading.z_degree();
                if zd == 0 {
                    // degree does not depend on z; a truncated window never
                    // covers a full piece, but z-constant matrices are Exact
                    // in practice. Report the worst case.
                    return Some(i64::MIN);
                }
                let mut cap = i64::MAX;
                for i in 0..self.n {
                    for j in 0..self.n {
                        cap = cap.min(self.grading.matrix_degree(i, j) + zd * lo);
                    }
                }
                Some(cap)
            }
        }
    }

    /// The homogeneous component of the given degree.
    ///
    /// Fails with [`Error::WindowUnderflow`] if the window does not cover the
    /// requested degree.
    pub fn graded_component(&self, d: i64) -> Result<LoopMatrix> {
        if let Some(cap) = self.trusted_degree_cap() {
            if d > cap {
                return Err(Error::WindowUnderflow(format!(
                    "degree {d} outside trusted cap {cap}"
                )));
            }
        }
        let mut out = LoopMatrix::zero(self.n, self.grading);
        for (r, c, k, p) in self.iter() {
            if self.grading.degree(r, c, k) == d {
                out.set(r, c, k, p.clone());
            }
        }
        Ok(out)
    }

    /// Split into homogeneous components; the sum of the pieces reproduces
    /// the stored matrix. Degrees above the trusted cap are not returned.
    pub fn graded_split(&self) -> BTreeMap<i64, LoopMatrix> {
        let cap = self.trusted_degree_cap();
        let mut out: BTreeMap<i64, LoopMatrix> = BTreeMap::new();
        for (r, c, k, p) in self.iter() {
            let d = self.grading.degree(r, c, k);
            if let Some(cap) = cap {
                if d > cap {
                    continue;
                }
            }
            out.entry(d)
                .or_insert_with(|| LoopMatrix::zero(self.n, self.grading))
                .set(r, c, k, p.clone());
        }
        out
    }

    /// Degrees of the nonzero homogeneous components.
    pub fn degree_support(&self) -> Vec<i64> {
        self.graded_split().into_keys().collect()
    }

    /// The single degree of a homogeneous element.
    pub fn homogeneous_degree(&self) -> Result<i64> {
        let degs = self.degree_support();
        match degs.as_slice() {
            [d] => Ok(*d),
            _ => Err(Error::NotHomogeneous(degs)),
        }
    }

    /// Drop every component of degree above `cap` (exact on what remains);
    /// the window is contracted so the result advertises exactly the kept
    /// degrees. Needs a z-dependent grading.
    pub fn truncate_degrees_above(&self, cap: i64) -> LoopMatrix {
        let lo = self.grading.z_lo_for_degree_cap(self.n, cap);
        let mut out = LoopMatrix {
            n: self.n,
            entries: vec![BTreeMap::new(); self.n * self.n],
            window: Window::combine_add(self.window, Window::Truncated { lo }),
            grading: self.grading,
        };
        for (r, c, k, p) in self.iter() {
            if self.grading.degree(r, c, k) <= cap && k >= lo {
                out.set(r, c, k, p.clone());
            }
        }
        out
    }

    /// Projection onto the kept half of the splitting. The result is a
    /// finite exact matrix.
    ///
    /// Fails when the window does not reach `z^0`, since the `z^0` row of the
    /// decision is then unknown.
    pub fn project_splitting(&self, kind: SplittingKind) -> Result<LoopMatrix> {
        if let Window::Truncated { lo } = self.window {
            if lo > 0 {
                return Err(Error::WindowUnderflow(format!(
                    "projection needs the z^0 component, window starts at z^{lo}"
                )));
            }
        }
        let mut out = LoopMatrix::zero(self.n, self.grading);
        for (r, c, k, p) in self.iter() {
            if kind.keeps(r, c, k) {
                out.set(r, c, k, p.clone());
            }
        }
        Ok(out)
    }

    /// The complementary projection; `project + complement = identity` on the
    /// window. Inherits the source window.
    pub fn project_complement(&self, kind: SplittingKind) -> Result<LoopMatrix> {
        if let Window::Truncated { lo } = self.window {
            if lo > 0 {
                return Err(Error::WindowUnderflow(format!(
                    "projection needs the z^0 component, window starts at z^{lo}"
                )));
            }
        }
        let mut out = LoopMatrix {
            n: self.n,
            entries: vec![BTreeMap::new(); self.n * self.n],
            window: self.window,
            grading: self.grading,
        };
        for (r, c, k, p) in self.iter() {
            if !kind.keeps(r, c, k) {
                out.set(r, c, k, p.clone());
            }
        }
        Ok(out)
    }

    /// Equality of the trustworthy parts of two matrices (entries below
    /// either window are ignored).
    pub fn eq_on_window(&self, other: &LoopMatrix) -> bool {
        if self.n != other.n {
            return false;
        }
        let lo = match Window::combine_add(self.window, other.window) {
            Window::Exact => i64::MIN,
            Window::Truncated { lo } => lo,
        };
        for idx in 0..self.entries.len() {
            let a = &self.entries[idx];
            let b = &other.entries[idx];
            for (k, p) in a {
                if *k < lo {
                    continue;
                }
                if b.get(k).map_or(!p.is_zero(), |q| q != p) {
                    return false;
                }
            }
            for (k, q) in b {
                if *k < lo {
                    continue;
                }
                if !a.contains_key(k) && !q.is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Substitute each coefficient polynomial (used when re-expressing a
    /// matrix over another jet ring).
    pub fn substitute_coeffs(&self, images: &[DiffPoly]) -> LoopMatrix {
        self.map_coeffs(|p| p.substitute(images))
    }

    /// Render non-zero entries, for error messages and tests.
    pub fn describe(&self, ring: &DiffRing) -> String {
        let mut lines = Vec::new();
        for (r, c, k, p) in self.iter() {
            lines.push(format!("  ({},{}) z^{}: {}", r + 1, c + 1, k, p.render(ring)));
        }
        if lines.is_empty() {
            lines.push("  0".to_string());
        }
        lines.join("\n")
    }
}

/// `sum_{k>=0} (1/k!) ad^k(m) . x`, truncated so that every graded component
/// of degree `<= max_degree` is exact.
///
/// Requires every homogeneous component of `m` to have strictly positive
/// degree — otherwise the series would not terminate per degree.
pub fn ad_exp_conjugate(m: &LoopMatrix, x: &LoopMatrix, max_degree: i64) -> Result<LoopMatrix> {
    let degs = m.degree_support();
    if let Some(d) = degs.iter().find(|d| **d <= 0) {
        return Err(Error::NotHomogeneous(vec![*d]));
    }
    let min_step = degs.iter().min().copied().unwrap_or(1);
    let x_min = x.degree_support().into_iter().min().unwrap_or(0);
    let mut acc = x.truncate_degrees_above(max_degree);
    let mut term = acc.clone();
    let mut k: i64 = 1;
    // after k brackets the minimal degree is x_min + k*min_step
    while x_min + k * min_step <= max_degree {
        term = m
            .bracket(&term)?
            .scale(&Rat::new(1.into(), k.into()))
            .truncate_degrees_above(max_degree);
        if term.is_zero() {
            break;
        }
        acc = acc.add(&term)?;
        k += 1;
    }
    Ok(acc)
}

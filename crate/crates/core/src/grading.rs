//! Gradings on the loop algebra and the Birkhoff-type splittings.
//!
//! A grading assigns `deg(E_ij z^k) = matrix_degree(i, j) + k * z_degree`.
//! The two gradings used by the hierarchies are
//!
//! - principal on `sl_n`: `matrix_degree(i, j) = j - i`, `z_degree = -n`
//!   (forced by `deg(e_theta z) = deg(f_i) = -1`), and
//! - homogeneous: `matrix_degree = 0`, `z_degree = -1` (so `x z^k` has
//!   degree `-k`; negative z-powers sit in positive degrees).
//!
//! `MatrixOnly` is the finite principal matrix grading (`z_degree = 0`) used
//! for the canonical form of z-constant opers.

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradingKind {
    /// Principal gradation of `L(sl_n)`; `deg e_i = -deg f_i = 1`, `deg z = -n`.
    Principal { n: usize },
    /// Homogeneous filtration; `deg(x z^k) = -k`.
    Homogeneous,
    /// Matrix degree only (`j - i`), ignoring z. For z-constant computations.
    MatrixOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GradingSpec {
    pub kind: GradingKind,
}

impl GradingSpec {
    pub fn principal(n: usize) -> Self {
        GradingSpec {
            kind: GradingKind::Principal { n },
        }
    }

    pub fn homogeneous() -> Self {
        GradingSpec {
            kind: GradingKind::Homogeneous,
        }
    }

    pub fn matrix_only() -> Self {
        GradingSpec {
            kind: GradingKind::MatrixOnly,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            GradingKind::Principal { .. } => "principal",
            GradingKind::Homogeneous => "homogeneous",
            GradingKind::MatrixOnly => "custom",
        }
    }

    pub fn z_degree(&self) -> i64 {
        match self.kind {
            GradingKind::Principal { n } => -(n as i64),
            GradingKind::Homogeneous => -1,
            GradingKind::MatrixOnly => 0,
        }
    }

    /// Degree contribution of the matrix position (0-indexed row, col).
    pub fn matrix_degree(&self, row: usize, col: usize) -> i64 {
        match self.kind {
            GradingKind::Principal { .. } | GradingKind::MatrixOnly => col as i64 - row as i64,
            GradingKind::Homogeneous => 0,
        }
    }

    /// Degree of `E_{row,col} z^k`. Additive under products by construction.
    pub fn degree(&self, row: usize, col: usize, zpow: i64) -> i64 {
        self.matrix_degree(row, col) + zpow * self.z_degree()
    }

    /// The z-power placing position `(row, col)` in degree `d`, when one
    /// exists. With `z_degree == 0` the degree does not constrain the power;
    /// graded pieces are then taken at `z^0` (the finite grading is only used
    /// on z-constant matrices).
    pub fn z_power_for_degree(&self, row: usize, col: usize, d: i64) -> Option<i64> {
        let zd = self.z_degree();
        if zd == 0 {
            return (self.matrix_degree(row, col) == d).then_some(0);
        }
        let num = d - self.matrix_degree(row, col);
        (num % zd == 0).then_some(num / zd)
    }

    /// Lowest z-power that must be stored so that every graded component of
    /// degree `<= cap` is covered, for an `n x n` matrix.
    pub fn z_lo_for_degree_cap(&self, n: usize, cap: i64) -> i64 {
        let zd = self.z_degree();
        assert!(zd < 0, "degree cap needs a z-dependent grading");
        // need md(i,j) + zd*z <= cap for all stored coefficients with z >= lo:
        // lo <= (md - cap) / (-zd) for every position; take the floor of the min.
        let mut lo = i64::MAX;
        for i in 0..n {
            for j in 0..n {
                let md = self.matrix_degree(i, j);
                lo = lo.min((md - cap).div_euclid(-zd));
            }
        }
        lo
    }

    pub fn require_compatible(&self, other: &GradingSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GradingMismatch)
        }
    }
}

/// The two splittings of the loop algebra used by the flows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplittingKind {
    /// Birkhoff: keep `g[z]` (all `z^k` with `k >= 0`); the complement is
    /// `z^-1 g[[z^-1]]`.
    Minus,
    /// Iwahori: keep all `z^k` with `k >= 1` plus the lower-Borel part
    /// (diagonal and below) of `z^0`; the complement is the strictly upper
    /// part of `z^0` plus all `z^k` with `k <= -1`.
    IwahoriMinus,
}

impl SplittingKind {
    /// Whether `E_{row,col} z^k` is kept by the projection.
    pub fn keeps(&self, row: usize, col: usize, zpow: i64) -> bool {
        match self {
            SplittingKind::Minus => zpow >= 0,
            SplittingKind::IwahoriMinus => zpow >= 1 || (zpow == 0 && col <= row),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn principal_degrees_sl2() {
        let g = GradingSpec::principal(2);
        // p_{-1} = E21 + E12 z is homogeneous of degree -1
        assert_eq!(g.degree(1, 0, 0), -1);
        assert_eq!(g.degree(0, 1, 1), -1);
        // p_1 = E12 + E21 z^{-1} of degree +1
        assert_eq!(g.degree(0, 1, 0), 1);
        assert_eq!(g.degree(1, 0, -1), 1);
    }

    #[test]
    fn homogeneous_orientation() {
        let g = GradingSpec::homogeneous();
        // h z has degree -1, h z^{-1} degree +1
        assert_eq!(g.degree(0, 0, 1), -1);
        assert_eq!(g.degree(0, 0, -1), 1);
    }

    #[test]
    fn degree_cap_window() {
        let g = GradingSpec::principal(2);
        let lo = g.z_lo_for_degree_cap(2, 9);
        // E21 z^k has degree -1-2k <= 9 for k >= -5
        assert_eq!(lo, -5);
        for i in 0..2 {
            for j in 0..2 {
                // all degree <= 9 components have z >= lo
                for d in -3..=9 {
                    if let Some(k) = g.z_power_for_degree(i, j, d) {
                        assert!(k >= lo, "degree {d} at ({i},{j}) needs z^{k} < {lo}");
                    }
                }
            }
        }
    }

    #[test]
    fn splitting_membership() {
        assert!(SplittingKind::Minus.keeps(0, 1, 0));
        assert!(!SplittingKind::Minus.keeps(0, 1, -1));
        // Iwahori: strictly upper z^0 dropped, diagonal and lower kept
        assert!(!SplittingKind::IwahoriMinus.keeps(0, 1, 0));
        assert!(SplittingKind::IwahoriMinus.keeps(1, 0, 0));
        assert!(SplittingKind::IwahoriMinus.keeps(0, 0, 0));
        assert!(SplittingKind::IwahoriMinus.keeps(0, 1, 1));
        assert!(!SplittingKind::IwahoriMinus.keeps(1, 0, -1));
    }
}

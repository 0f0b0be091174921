//! Exact linear algebra over the rationals.
//!
//! The graded pieces handled by the splittings are tiny (dimension a few
//! dozen at most), so plain fraction-free-enough Gaussian elimination is the
//! right tool. Right-hand sides are vectors of differential polynomials;
//! row operations act on them Q-linearly.

use crate::poly::DiffPoly;
use crate::rational::Rat;
use num::Zero;

pub type QMat = Vec<Vec<Rat>>;

pub fn rank(a: &QMat) -> usize {
    let mut m = a.to_vec();
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &pivot;
                for j in c..cols {
                    let t = &m[r][j] * &f;
                    m[i][j] = &m[i][j] - &t;
                }
            }
        }
        r += 1;
    }
    r
}

/// Basis of the null space `{x : A x = 0}`.
pub fn kernel_basis(a: &QMat) -> Vec<Vec<Rat>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    if cols == 0 {
        return Vec::new();
    }
    let mut m = a.to_vec();
    let mut pivot_col_of_row: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for j in 0..cols {
            m[r][j] = &m[r][j] / &pivot;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &m[r][j] * &f;
                    m[i][j] = &m[i][j] - &t;
                }
            }
        }
        pivot_col_of_row.push(c);
        r += 1;
    }
    let pivot_cols: Vec<usize> = pivot_col_of_row.clone();
    let free_cols: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::new();
    for &fc in &free_cols {
        let mut v = vec![Rat::zero(); cols];
        v[fc] = Rat::from_integer(1.into());
        for (row, &pc) in pivot_col_of_row.iter().enumerate() {
            v[pc] = -m[row][fc].clone();
        }
        basis.push(v);
    }
    basis
}

/// Solve `A x = b` with polynomial right-hand side. Returns a particular
/// solution with free variables set to zero, or `None` if inconsistent.
pub fn solve(a: &QMat, b: &[DiffPoly]) -> Option<Vec<DiffPoly>> {
    let rows = a.len();
    assert_eq!(rows, b.len());
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m = a.to_vec();
    let mut rhs: Vec<DiffPoly> = b.to_vec();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        rhs.swap(r, p);
        let pivot = m[r][c].clone();
        let inv = Rat::from_integer(1.into()) / &pivot;
        for j in 0..cols {
            m[r][j] = &m[r][j] * &inv;
        }
        rhs[r] = rhs[r].scale(&inv);
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &m[r][j] * &f;
                    m[i][j] = &m[i][j] - &t;
                }
                let t = rhs[r].scale(&f);
                rhs[i] = rhs[i].sub(&t);
            }
        }
        pivot_of_col[c] = Some(r);
        r += 1;
    }
    // consistency: zero rows must have zero rhs
    for i in r..rows {
        if !rhs[i].is_zero() {
            return None;
        }
    }
    let mut x = vec![DiffPoly::zero(); cols];
    for c in 0..cols {
        if let Some(row) = pivot_of_col[c] {
            x[c] = rhs[row].clone();
        }
    }
    Some(x)
}

/// Replace `x` by its minimum-norm representative modulo the span of
/// `kernel` (standard coordinate inner product): `x - K (K^T K)^{-1} K^T x`.
pub fn min_norm_mod_kernel(x: &mut [DiffPoly], kernel: &[Vec<Rat>]) {
    if kernel.is_empty() {
        return;
    }
    let k = kernel.len();
    // Gram matrix and projections
    let mut gram: QMat = vec![vec![Rat::zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            let mut s = Rat::zero();
            for t in 0..x.len() {
                s += &kernel[i][t] * &kernel[j][t];
            }
            gram[i][j] = s;
        }
    }
    let proj: Vec<DiffPoly> = (0..k)
        .map(|i| {
            let mut s = DiffPoly::zero();
            for t in 0..x.len() {
                if !kernel[i][t].is_zero() {
                    s = s.add(&x[t].scale(&kernel[i][t]));
                }
            }
            s
        })
        .collect();
    let y = solve(&gram, &proj).expect("Gram matrix of independent kernel vectors is invertible");
    for t in 0..x.len() {
        let mut corr = DiffPoly::zero();
        for i in 0..k {
            if !kernel[i][t].is_zero() {
                corr = corr.add(&y[i].scale(&kernel[i][t]));
            }
        }
        x[t] = x[t].sub(&corr);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn q(v: i64) -> Rat {
        rat_int(v)
    }

    #[test]
    fn rank_and_kernel() {
        let a = vec![
            vec![q(1), q(2), q(3)],
            vec![q(2), q(4), q(6)],
            vec![q(0), q(1), q(1)],
        ];
        assert_eq!(rank(&a), 2);
        let ker = kernel_basis(&a);
        assert_eq!(ker.len(), 1);
        for row in &a {
            let mut s = Rat::zero();
            for (x, k) in row.iter().zip(&ker[0]) {
                s += x * k;
            }
            assert!(s.is_zero());
        }
    }

    #[test]
    fn solve_with_poly_rhs() {
        use crate::poly::DiffRing;
        let r = DiffRing::new(&[("u", 1)]);
        // x + y = u, x - y = u'
        let a = vec![vec![q(1), q(1)], vec![q(1), q(-1)]];
        let b = vec![r.jet(0, 0), r.jet(0, 1)];
        let x = solve(&a, &b).unwrap();
        let half = rat(1, 2);
        assert_eq!(x[0], r.jet(0, 0).add(&r.jet(0, 1)).scale(&half));
        assert_eq!(x[1], r.jet(0, 0).sub(&r.jet(0, 1)).scale(&half));
        // inconsistent system
        let a2 = vec![vec![q(1), q(1)], vec![q(2), q(2)]];
        let b2 = vec![r.jet(0, 0), r.jet(0, 1)];
        assert!(solve(&a2, &b2).is_none());
    }

    #[test]
    fn min_norm_projection() {
        use crate::poly::DiffRing;
        let r = DiffRing::new(&[("u", 1)]);
        // kernel spanned by (1, 1); x = (u, 0) -> (u/2, -u/2)
        let mut x = vec![r.jet(0, 0), DiffPoly::zero()];
        min_norm_mod_kernel(&mut x, &[vec![q(1), q(1)]]);
        assert_eq!(x[0], r.jet(0, 0).scale(&rat(1, 2)));
        assert_eq!(x[1], r.jet(0, 0).scale(&rat(-1, 2)));
    }
}

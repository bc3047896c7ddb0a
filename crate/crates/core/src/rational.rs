//! Exact linear algebra over the rationals.

use num_rational::BigRational;
use num_traits::{One, Zero};

pub type RatMatrix = Vec<Vec<BigRational>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut RatMatrix, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row >= m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = BigRational::one() / m[row][col].clone();
        if !inv.is_one() {
            for v in m[row].iter_mut().skip(col) {
                if !v.is_zero() {
                    *v = &*v * &inv;
                }
            }
        }
        let pivot_row = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let f = other[col].clone();
            for (c, pv) in pivot_row.iter().enumerate().skip(col) {
                if !pv.is_zero() {
                    other[c] = &other[c] - &(&f * pv);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank(m: &RatMatrix) -> usize {
    let ncols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut a = m.clone();
    rref(&mut a, ncols).len()
}

/// Basis of `{x : A x = 0}` for an `r × ncols` matrix.
pub fn nullspace(m: &RatMatrix, ncols: usize) -> Vec<Vec<BigRational>> {
    let mut a = m.clone();
    let pivots = rref(&mut a, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); ncols];
            v[f] = BigRational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -a[i][f].clone();
            }
            v
        })
        .collect()
}

/// Solution set of `A x = b`.
#[derive(Debug, Clone)]
pub enum AffineSolution {
    /// `x = particular + Σ t_i · basis[i]`.
    Solved { particular: Vec<BigRational>, basis: Vec<Vec<BigRational>> },
    /// A row combination `w` with `wᵀA = 0` and `wᵀb = 1`.
    Inconsistent { certificate: Vec<BigRational> },
}

pub fn solve_affine(a: &RatMatrix, b: &[BigRational], ncols: usize) -> AffineSolution {
    assert_eq!(a.len(), b.len(), "rhs length");
    let mut aug: RatMatrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return AffineSolution::Inconsistent { certificate: infeasibility_certificate(a, b, ncols) };
    }
    let mut particular = vec![BigRational::zero(); ncols];
    for (i, &p) in pivots.iter().enumerate() {
        particular[p] = aug[i][ncols].clone();
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); ncols];
            v[f] = BigRational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -aug[i][f].clone();
            }
            v
        })
        .collect();
    AffineSolution::Solved { particular, basis }
}

/// Solve `[Aᵀ; bᵀ] w = e_last`.
fn infeasibility_certificate(a: &RatMatrix, b: &[BigRational], ncols: usize) -> Vec<BigRational> {
    let rows = a.len();
    let mut t: RatMatrix = (0..=ncols)
        .map(|c| {
            let mut r: Vec<BigRational> =
                (0..rows).map(|i| if c < ncols { a[i][c].clone() } else { b[i].clone() }).collect();
            r.push(if c == ncols { BigRational::one() } else { BigRational::zero() });
            r
        })
        .collect();
    let pivots = rref(&mut t, rows + 1);
    let mut w = vec![BigRational::zero(); rows];
    for (i, &p) in pivots.iter().enumerate() {
        if p < rows {
            w[p] = t[i][rows].clone();
        }
    }
    w
}

pub fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).fold(BigRational::zero(), |s, (x, y)| s + x * y)
}

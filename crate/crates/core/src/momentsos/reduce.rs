//! Exact elimination of the linear equalities of a moment relaxation.
//!
//! `y₀ = 1` and the localizing equations are solved over the rationals as
//! `y = y_p + N t`; `N` is then orthonormalized in floating point, which
//! leaves the pure LMI `M(y_p) + Σ u_i M(q_i) ⪰ 0`.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::MomentRelaxation;
use crate::linalg::orthonormal_columns;
use crate::polyalg::Monomial;
use crate::rational::{solve_affine, AffineSolution, RatMatrix};
use crate::sdpcore::LmiProblem;
use crate::Poly;

/// `1 = Σ_t q_t h_t`, proving the equalities have no solution.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealCertificate {
    pub multipliers: Vec<Poly>,
}

impl IdealCertificate {
    /// Whether `Σ q_t h_t` is exactly the constant `1`.
    pub fn check(&self, h: &[Poly]) -> bool {
        let Some(first) = h.first() else {
            return false;
        };
        let mut s = Poly::zero(first.nvars());
        for (q, g) in self.multipliers.iter().zip(h) {
            s = &s + &(q * g);
        }
        s == Poly::one(first.nvars())
    }
}

#[derive(Debug, Clone)]
pub struct Reduced {
    /// `y_p`, orthogonal to the columns of `directions`.
    pub particular: Vec<f64>,
    /// Orthonormal basis `Q` of the solution directions, `|y| × d`.
    pub directions: DMatrix<f64>,
    /// `F₀ = M(y_p)`, `F_i = M(Q e_i)`, `c_i = L_{Q e_i}(h₀)`.
    pub lmi: LmiProblem<f64>,
    /// `L_{y_p}(h₀)`.
    pub offset: f64,
    /// Independent equality rows after elimination.
    pub rank: usize,
    /// Exact `y_p` before projection.
    pub exact_particular: Vec<BigRational>,
}

impl Reduced {
    /// `y = y_p + Q u`.
    pub fn moments(&self, u: &[f64]) -> Vec<f64> {
        let uv = DVector::from_column_slice(u);
        let y = DVector::from_column_slice(&self.particular) + &self.directions * uv;
        y.iter().copied().collect()
    }
}

#[derive(Debug, Clone)]
pub enum Reduction {
    Reduced(Reduced),
    Inconsistent(IdealCertificate),
}

/// Source of an equality row: `y₀`, or `h_t · x^γ`.
#[derive(Clone)]
enum RowOrigin {
    Normalization,
    Localizing { generator: usize, shift: Monomial },
}

/// Rounding noise from orthonormalization.
const CHOP: f64 = 1e-14;

fn chop(x: f64) -> f64 {
    if x.abs() < CHOP {
        0.0
    } else {
        x
    }
}

pub fn reduce(rel: &MomentRelaxation) -> Reduction {
    let ny = rel.num_moments();
    let mut seen: HashSet<Vec<(usize, BigRational)>> = HashSet::new();
    let mut rows: RatMatrix = Vec::new();
    let mut rhs = Vec::new();
    let mut origins = Vec::new();
    let dense = |row: &[(usize, BigRational)]| {
        let mut r = vec![BigRational::zero(); ny];
        for (i, c) in row {
            r[*i] = &r[*i] + c;
        }
        r
    };
    rows.push(dense(&[(0, BigRational::one())]));
    rhs.push(BigRational::one());
    origins.push(RowOrigin::Normalization);
    for loc in &rel.localizing {
        let lb = super::monomial_basis(rel.nvars(), rel.k - loc.r);
        for (eq, &(i, j)) in loc.equations.iter().zip(&loc.pairs) {
            if eq.is_empty() {
                continue;
            }
            let mut key = eq.clone();
            key.sort_by_key(|(i, _)| *i);
            if !seen.insert(key) {
                continue;
            }
            rows.push(dense(eq));
            rhs.push(BigRational::zero());
            origins.push(RowOrigin::Localizing { generator: loc.generator, shift: lb.get(i).mul(lb.get(j)) });
        }
    }
    match solve_affine(&rows, &rhs, ny) {
        AffineSolution::Inconsistent { certificate } => {
            // w₀ + Σ w_r h_t x^γ = 0 with w₀ = 1
            let n = rel.nvars();
            let mut multipliers = vec![Poly::zero(n); rel.h.len()];
            for (w, origin) in certificate.iter().zip(&origins) {
                if let RowOrigin::Localizing { generator, shift } = origin {
                    if !w.is_zero() {
                        multipliers[*generator].add_term(shift.clone(), -w.clone());
                    }
                }
            }
            Reduction::Inconsistent(IdealCertificate { multipliers })
        }
        AffineSolution::Solved { particular, basis } => {
            let d = basis.len();
            let rank = ny - d;
            let n_f = DMatrix::from_fn(ny, d, |r, c| crate::scalar::Coefficient::to_f64(&basis[c][r]));
            let q = orthonormal_columns(&n_f, 1e-12).map(chop);
            let yp0 = DVector::from_iterator(ny, particular.iter().map(crate::scalar::Coefficient::to_f64));
            let yp = (&yp0 - &q * (q.transpose() * &yp0)).map(chop);
            let yp: Vec<f64> = yp.iter().copied().collect();
            let f0 = vec![rel.moment_matrix(&yp)];
            let mut f = Vec::with_capacity(q.ncols());
            let mut c = Vec::with_capacity(q.ncols());
            for col in 0..q.ncols() {
                let qi: Vec<f64> = q.column(col).iter().copied().collect();
                f.push(vec![rel.moment_matrix(&qi)]);
                c.push(rel.objective_value(&qi));
            }
            let offset = rel.objective_value(&yp);
            let lmi = LmiProblem::new(vec![rel.moment_basis.len()], f0, f, c).expect("moment matrices are symmetric");
            Reduction::Reduced(Reduced {
                particular: yp,
                directions: q,
                lmi,
                offset,
                rank,
                exact_particular: particular,
            })
        }
    }
}

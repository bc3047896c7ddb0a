//! Moment relaxations and their sum-of-squares duals on a real variety.
//!
//! The order-`k` moment relaxation of `min h₀` over `V(h)` is
//!
//! ```text
//! τ_k = inf L_y(h₀)  s.t.  M_k(y) ⪰ 0,  M_{k−r_t}(h_t y) = 0,  y₀ = 1
//! ```
//!
//! and its dual `ρ_k` maximizes `ξ` with `h₀ − ξ = v_kᵀ G v_k + Σ h_t u_t`.

mod hierarchy;
mod lagrange;
mod pipeline;
mod reduce;
mod solve;

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_rational::BigRational;
use thiserror::Error;

pub use hierarchy::{
    order_threads, run_hierarchy, DualMode, HierarchyOptions, HierarchyResult, OrderRecord, HIERARCHY_SOLVER_TOL,
    THREADS_ENV,
};
pub use lagrange::{lagrange_basis, lagrange_sigma};
pub use pipeline::{
    pulled_back_objective, sample_minimum, solve_direct, solve_singular, BoundSummary, PipelineOptions, PipelineReport,
    ASSUMPTIONS, DIRECT_ASSUMPTIONS,
};
pub use reduce::{reduce, IdealCertificate, Reduced, Reduction};
pub use solve::{
    solve_dual, solve_dual_direct, solve_primal, solve_relaxation, DualSolution, InfeasibilityEvidence, PrimalSolution,
    ProblemSizes, RelaxationSolution, RelaxationStatus,
};

use crate::kktsys::KktError;
use crate::polyalg::{Monomial, PolyError};
use crate::resolve::ResolveError;
use crate::scalar::{Coefficient, Real};
use crate::varietylab::VarietyError;
use crate::Poly;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Variety(#[from] VarietyError),
    #[error(transparent)]
    Kkt(#[from] KktError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error("relaxation order {k} is too small; the smallest feasible order is {min_k}")]
    OrderTooSmall { k: u32, min_k: u32 },
    #[error("polynomial of degree {degree} exceeds the moment degree {max}")]
    DegreeOverflow { degree: u32, max: u32 },
    #[error("moment vector has {got} entries, expected {expected}")]
    MomentLength { expected: usize, got: usize },
    #[error("order range {k_min}..={k_max} is empty")]
    OrderRange { k_min: u32, k_max: u32 },
    #[error("interpolation needs at least one value")]
    NoValues,
    #[error("interpolation values must be distinct")]
    DuplicateValue,
    #[error("interpolation value {0} is negative")]
    NegativeValue(String),
    #[error("morphism target has {got} variables, variety has {expected}")]
    TargetMismatch { expected: usize, got: usize },
}

/// All monomials of total degree at most `degree` in `n` variables,
/// graded: by degree, then lexicographically with `x1` first.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    n: usize,
    degree: u32,
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

fn exponents_of_degree(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if prefix.len() + 1 == n {
        prefix.push(d);
        out.push(Monomial::new(prefix.clone()));
        prefix.pop();
        return;
    }
    for e in (0..=d).rev() {
        prefix.push(e);
        exponents_of_degree(n, d - e, prefix, out);
        prefix.pop();
    }
}

pub fn monomial_basis(n: usize, k: u32) -> MonomialBasis {
    let mut monomials = Vec::new();
    if n == 0 {
        monomials.push(Monomial::new(Vec::new()));
    } else {
        for d in 0..=k {
            exponents_of_degree(n, d, &mut Vec::with_capacity(n), &mut monomials);
        }
    }
    let index = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    MonomialBasis { n, degree: k, monomials, index }
}

impl MonomialBasis {
    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn get(&self, i: usize) -> &Monomial {
        &self.monomials[i]
    }

    pub fn position(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn to_text(&self, names: &[String]) -> Vec<String> {
        self.monomials.iter().map(|m| m.to_text(names)).collect()
    }

    /// `Σ c_i · x^{α_i}` for a coefficient vector over this basis.
    pub fn combine<C: Coefficient>(&self, coeffs: &[C]) -> crate::Polynomial<C> {
        crate::Polynomial::from_terms(self.n, self.monomials.iter().cloned().zip(coeffs.iter().cloned()))
    }

    /// Coefficient vector of `p` over this basis.
    pub fn coefficients(&self, p: &Poly) -> Result<Vec<BigRational>, MomentError> {
        let mut out = vec![BigRational::from_integer(0.into()); self.len()];
        for (m, c) in p.terms() {
            let i = self.position(m).ok_or(MomentError::DegreeOverflow { degree: m.degree(), max: self.degree })?;
            out[i] = c.clone();
        }
        Ok(out)
    }

    /// `(z^α)_α`, the moments of the Dirac measure at `z`.
    pub fn point_moments(&self, z: &[f64]) -> Vec<f64> {
        self.monomials.iter().map(|m| m.exponents().iter().zip(z).map(|(&e, &x)| x.powi(e as i32)).product()).collect()
    }
}

/// `C(n + k, n)`.
pub fn basis_size(n: usize, k: u32) -> usize {
    let mut r: u128 = 1;
    for i in 1..=n as u128 {
        r = r * (k as u128 + i) / i;
    }
    r as usize
}

/// `L_y(p) = Σ p_α y_α`.
pub fn riesz<T: Real>(y: &[T], basis: &MonomialBasis, p: &Poly) -> Result<T, MomentError> {
    if y.len() != basis.len() {
        return Err(MomentError::MomentLength { expected: basis.len(), got: y.len() });
    }
    let mut s = T::zero();
    for (m, c) in p.terms() {
        let i = basis.position(m).ok_or(MomentError::DegreeOverflow { degree: m.degree(), max: basis.degree })?;
        s += T::lit(c.to_f64()) * y[i];
    }
    Ok(s)
}

/// The scalar equations `L_y(h_t x^{α+β}) = 0` for `α ≤ β` in the degree
/// `k − r_t` basis, as sparse rows over `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizingConstraint {
    pub generator: usize,
    pub r: u32,
    /// Pair `(i, j)` of positions in the degree `k − r` basis, per equation.
    pub pairs: Vec<(usize, usize)>,
    pub equations: Vec<Vec<(usize, BigRational)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentRelaxation {
    pub k: u32,
    pub h0: Poly,
    pub h: Vec<Poly>,
    /// Indexes the decision vector `y`, degree `2k`.
    pub y_basis: MonomialBasis,
    /// Rows and columns of the moment matrix, degree `k`.
    pub moment_basis: MonomialBasis,
    /// `moment_block[i][j]` is the `y` index of `α_i + α_j`.
    pub moment_block: Vec<Vec<usize>>,
    pub localizing: Vec<LocalizingConstraint>,
    /// `h₀` as a sparse row over `y`.
    pub objective: Vec<(usize, BigRational)>,
}

/// `⌈deg / 2⌉`.
pub fn half_degree(p: &Poly) -> u32 {
    p.degree().div_ceil(2)
}

/// Smallest order at which the relaxation is defined.
pub fn min_order(h0: &Poly, h: &[Poly]) -> u32 {
    h.iter().map(half_degree).fold(half_degree(h0), u32::max)
}

fn sparse_row(p: &Poly, shift: &Monomial, basis: &MonomialBasis) -> Vec<(usize, BigRational)> {
    p.terms()
        .map(|(m, c)| {
            let i = basis.position(&m.mul(shift)).expect("degree checked");
            (i, c.clone())
        })
        .collect()
}

pub fn build_relaxation(h0: &Poly, h: &[Poly], k: u32) -> Result<MomentRelaxation, MomentError> {
    let n = h0.nvars();
    for g in h {
        if g.nvars() != n {
            return Err(PolyError::NvarsMismatch { left: n, right: g.nvars() }.into());
        }
    }
    let min_k = min_order(h0, h);
    if k < min_k {
        return Err(MomentError::OrderTooSmall { k, min_k });
    }
    let y_basis = monomial_basis(n, 2 * k);
    let moment_basis = monomial_basis(n, k);
    let moment_block = moment_basis
        .monomials()
        .iter()
        .map(|a| moment_basis.monomials().iter().map(|b| y_basis.position(&a.mul(b)).expect("degree 2k")).collect())
        .collect();
    let localizing = h
        .iter()
        .enumerate()
        .map(|(t, g)| {
            let r = half_degree(g);
            let lb = monomial_basis(n, k - r);
            let mut pairs = Vec::new();
            let mut equations = Vec::new();
            for i in 0..lb.len() {
                for j in i..lb.len() {
                    pairs.push((i, j));
                    equations.push(sparse_row(g, &lb.get(i).mul(lb.get(j)), &y_basis));
                }
            }
            LocalizingConstraint { generator: t, r, pairs, equations }
        })
        .collect();
    let objective = sparse_row(h0, &Monomial::one(n), &y_basis);
    Ok(MomentRelaxation {
        k,
        h0: h0.clone(),
        h: h.to_vec(),
        y_basis,
        moment_basis,
        moment_block,
        localizing,
        objective,
    })
}

impl MomentRelaxation {
    pub fn nvars(&self) -> usize {
        self.y_basis.nvars()
    }

    pub fn num_moments(&self) -> usize {
        self.y_basis.len()
    }

    pub fn num_equations(&self) -> usize {
        self.localizing.iter().map(|l| l.equations.len()).sum()
    }

    /// `M_k(y)`.
    pub fn moment_matrix<T: Real>(&self, y: &[T]) -> DMatrix<T> {
        let s = self.moment_basis.len();
        DMatrix::from_fn(s, s, |i, j| y[self.moment_block[i][j]])
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective.iter().map(|(i, c)| c.to_f64() * y[*i]).sum()
    }

    /// Largest `|L_y(h_t x^{α+β})|` and `|y₀ − 1|`.
    pub fn equality_residual(&self, y: &[f64]) -> f64 {
        self.localizing
            .iter()
            .flat_map(|l| &l.equations)
            .map(|row| row.iter().map(|(i, c)| c.to_f64() * y[*i]).sum::<f64>().abs())
            .fold((y[0] - 1.0).abs(), f64::max)
    }
}

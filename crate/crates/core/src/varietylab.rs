//! Jacobians, minor vectors, singular-locus systems and numeric probing of
//! real varieties `V(h) = {x : h_1(x) = ... = h_l(x) = 0}`.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::polyalg::{default_names, parse, PolyError};
use crate::rational;
use crate::scalar::Real;
use crate::Poly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VarietyError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("variety has no generators")]
    NoGenerators,
    #[error("dimension {dimension} exceeds ambient dimension {nvars}")]
    DimensionTooLarge { dimension: usize, nvars: usize },
    #[error("variety dimension is required")]
    MissingDimension,
    #[error("minor order {t} outside 1..={max}")]
    MinorOrder { t: usize, max: usize },
    #[error("expected {expected} variable names, got {got}")]
    VarNames { expected: usize, got: usize },
    #[error("point has {got} coordinates, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

/// `V(h)` given by generators in `nvars` variables, with an optional real
/// dimension supplied by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct VarietySpec {
    pub vars: Vec<String>,
    pub generators: Vec<Poly>,
    pub dimension: Option<usize>,
}

/// JSON form: `{"nvars": n, "vars": [...], "generators": ["text", ...], "dimension": d}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarietyDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nvars: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vars: Option<Vec<String>>,
    pub generators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
}

impl VarietySpec {
    pub fn new(vars: Vec<String>, generators: Vec<Poly>, dimension: Option<usize>) -> Result<Self, VarietyError> {
        let n = vars.len();
        for g in &generators {
            if g.nvars() != n {
                return Err(PolyError::NvarsMismatch { left: n, right: g.nvars() }.into());
            }
        }
        if let Some(d) = dimension {
            if d > n {
                return Err(VarietyError::DimensionTooLarge { dimension: d, nvars: n });
            }
        }
        Ok(VarietySpec { vars, generators, dimension })
    }

    /// Parse generators over the given variable names.
    pub fn parse(vars: &[&str], generators: &[&str], dimension: Option<usize>) -> Result<Self, VarietyError> {
        let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let gens = generators.iter().map(|g| parse(g, &names)).collect::<Result<Vec<_>, _>>()?;
        Self::new(names, gens, dimension)
    }

    pub fn from_descriptor(d: &VarietyDescriptor) -> Result<Self, VarietyError> {
        let names = match (&d.vars, d.nvars) {
            (Some(v), Some(n)) if v.len() != n => return Err(VarietyError::VarNames { expected: n, got: v.len() }),
            (Some(v), _) => v.clone(),
            (None, Some(n)) => default_names(n),
            (None, None) => return Err(VarietyError::VarNames { expected: 1, got: 0 }),
        };
        let gens = d.generators.iter().map(|g| parse(g, &names)).collect::<Result<Vec<_>, _>>()?;
        Self::new(names, gens, d.dimension)
    }

    pub fn to_descriptor(&self) -> VarietyDescriptor {
        VarietyDescriptor {
            nvars: Some(self.nvars()),
            vars: Some(self.vars.clone()),
            generators: self.generators.iter().map(|g| g.to_text(&self.vars)).collect(),
            dimension: self.dimension,
        }
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn max_residual(&self, point: &[f64]) -> Result<f64, VarietyError> {
        self.check_point(point.len())?;
        let mut m = 0.0f64;
        for g in &self.generators {
            m = m.max(g.evaluate_f64(point)?.abs());
        }
        Ok(m)
    }

    fn check_point(&self, len: usize) -> Result<(), VarietyError> {
        if len != self.nvars() {
            return Err(VarietyError::Dimension { expected: self.nvars(), got: len });
        }
        Ok(())
    }
}

/// `J(h)` with `n` rows (variables) and `l` columns (generators):
/// entry `(t, j) = ∂h_j/∂x_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix {
    pub entries: Vec<Vec<Poly>>,
    pub nrows: usize,
    pub ncols: usize,
}

impl JacobianMatrix {
    pub fn get(&self, t: usize, j: usize) -> &Poly {
        &self.entries[t][j]
    }

    /// Numeric evaluation at a point.
    pub fn evaluate<T: Real>(&self, point: &[f64]) -> Result<DMatrix<T>, VarietyError> {
        if point.len() != self.nrows {
            return Err(VarietyError::Dimension { expected: self.nrows, got: point.len() });
        }
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for t in 0..self.nrows {
            for j in 0..self.ncols {
                m[(t, j)] = T::lit(self.entries[t][j].evaluate_f64(point)?);
            }
        }
        Ok(m)
    }

    /// Exact evaluation at a rational point.
    pub fn evaluate_exact(&self, point: &[BigRational]) -> Result<rational::RatMatrix, VarietyError> {
        if point.len() != self.nrows {
            return Err(VarietyError::Dimension { expected: self.nrows, got: point.len() });
        }
        self.entries.iter().map(|row| row.iter().map(|p| p.evaluate(point).map_err(Into::into)).collect()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinorVector {
    pub order: usize,
    pub minors: Vec<Poly>,
}

pub fn jacobian(v: &VarietySpec) -> Result<JacobianMatrix, VarietyError> {
    if v.generators.is_empty() {
        return Err(VarietyError::NoGenerators);
    }
    let n = v.nvars();
    let entries = (0..n)
        .map(|t| v.generators.iter().map(|h| h.differentiate(t)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(JacobianMatrix { entries, nrows: n, ncols: v.generators.len() })
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Determinant by cofactor expansion along the first row.
pub fn determinant(m: &[Vec<Poly>], nvars: usize) -> Poly {
    let t = m.len();
    match t {
        0 => Poly::one(nvars),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = Poly::zero(nvars);
            for c in 0..t {
                if m[0][c].is_zero() {
                    continue;
                }
                let sub: Vec<Vec<Poly>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, p)| p.clone()).collect())
                    .collect();
                let term = &m[0][c] * &determinant(&sub, nvars);
                acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// The vector `m_t(h)` of all `t×t` minors of `J(h)`, ordered by
/// (row set, column set) lexicographically.
pub fn minor_vector(v: &VarietySpec, t: usize) -> Result<MinorVector, VarietyError> {
    let jac = jacobian(v)?;
    minors_of(&jac, v.nvars(), t)
}

fn minors_of(jac: &JacobianMatrix, nvars: usize, t: usize) -> Result<MinorVector, VarietyError> {
    let max = jac.nrows.min(jac.ncols);
    if t == 0 || t > max {
        return Err(VarietyError::MinorOrder { t, max });
    }
    let mut minors = Vec::new();
    for rows in combinations(jac.nrows, t) {
        for cols in combinations(jac.ncols, t) {
            let sub: Vec<Vec<Poly>> =
                rows.iter().map(|&r| cols.iter().map(|&c| jac.entries[r][c].clone()).collect()).collect();
            minors.push(determinant(&sub, nvars));
        }
    }
    Ok(MinorVector { order: t, minors })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularSystem {
    /// `(h, m_{n-d}(h))` as a variety in the same ambient space.
    pub system: VarietySpec,
    /// Codimension `n - d`.
    pub codim: usize,
    /// Set when `n - d > min(n, l)`: no minors of that order exist, so the
    /// system is `h` alone.
    pub minors_empty: bool,
}

/// The system cutting out the singular locus of `V`.
pub fn singular_system(v: &VarietySpec) -> Result<SingularSystem, VarietyError> {
    let d = v.dimension.ok_or(VarietyError::MissingDimension)?;
    let n = v.nvars();
    let codim = n - d;
    let mut gens = v.generators.clone();
    let mut minors_empty = false;
    if codim == 0 {
        // the empty minor is 1: every point of V is regular
        gens.push(Poly::one(n));
    } else if v.generators.is_empty() || codim > n.min(v.generators.len()) {
        minors_empty = true;
    } else {
        gens.extend(minor_vector(v, codim)?.minors);
    }
    Ok(SingularSystem { system: VarietySpec::new(v.vars.clone(), gens, None)?, codim, minors_empty })
}

/// Number of singular values of `J(point)` above `tol · max(σ_max, 1)`.
pub fn numeric_rank<T: Real>(jac: &JacobianMatrix, point: &[f64], tol: T) -> Result<usize, VarietyError> {
    Ok(linalg::numeric_rank(&jac.evaluate::<T>(point)?, tol))
}

/// Exact rank of `J(point)` at a rational point.
pub fn exact_rank(jac: &JacobianMatrix, point: &[BigRational]) -> Result<usize, VarietyError> {
    Ok(rational::rank(&jac.evaluate_exact(point)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointClass {
    Regular,
    Singular,
    NotOnVariety,
}

pub fn classify_point(v: &VarietySpec, point: &[f64], tol: f64) -> Result<PointClass, VarietyError> {
    let d = v.dimension.ok_or(VarietyError::MissingDimension)?;
    if v.max_residual(point)? > tol {
        return Ok(PointClass::NotOnVariety);
    }
    let codim = v.nvars() - d;
    let rank = if v.generators.is_empty() { 0 } else { numeric_rank::<f64>(&jacobian(v)?, point, tol)? };
    Ok(if rank == codim { PointClass::Regular } else { PointClass::Singular })
}

/// Tunables for [`regular_point_search_with`].
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub rank_tol: f64,
    pub newton_tol: f64,
    pub newton_iters: usize,
    /// Upper limit on the Smale alpha estimate at the projected point.
    pub alpha_max: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { rank_tol: 1e-8, newton_tol: 1e-12, newton_iters: 50, alpha_max: 0.1 }
    }
}

struct Projector {
    gens: Vec<Poly>,
    jac: JacobianMatrix,
    hess: Vec<Vec<Vec<Poly>>>,
}

impl Projector {
    fn new(v: &VarietySpec) -> Result<Self, VarietyError> {
        let jac = jacobian(v)?;
        let n = v.nvars();
        let hess = v
            .generators
            .iter()
            .map(|g| {
                (0..n)
                    .map(|a| (0..n).map(|b| g.differentiate(a).and_then(|p| p.differentiate(b))).collect())
                    .collect::<Result<Vec<Vec<Poly>>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Projector { gens: v.generators.clone(), jac, hess })
    }

    fn residual(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.gens.len(), self.gens.iter().map(|g| g.evaluate_f64(x).expect("dimension checked")))
    }

    /// Gauss–Newton with minimum-norm steps; `None` if not converged.
    fn project(&self, mut x: Vec<f64>, opts: &SearchOptions) -> Option<Vec<f64>> {
        for _ in 0..=opts.newton_iters {
            let h = self.residual(&x);
            if h.amax() <= opts.newton_tol {
                return Some(x);
            }
            let jt = self.jac.evaluate::<f64>(&x).ok()?.transpose();
            let step = linalg::lstsq(&jt, &h);
            if !step.iter().all(|s| s.is_finite()) {
                return None;
            }
            for (xi, si) in x.iter_mut().zip(step.iter()) {
                *xi -= si;
            }
        }
        None
    }

    /// `β·γ` with `β = ‖J⁺h‖` and `γ = ‖D²h‖·‖J⁺‖/2`.
    fn alpha(&self, x: &[f64]) -> f64 {
        let h = self.residual(x);
        let jt = match self.jac.evaluate::<f64>(x) {
            Ok(j) => j.transpose(),
            Err(_) => return f64::INFINITY,
        };
        let pinv = linalg::pseudo_inverse(&jt, 1e-14);
        let beta = (&pinv * &h).norm();
        let pinv_norm = linalg::singular_values(&pinv).first().copied().unwrap_or(0.0);
        let mut d2 = 0.0;
        for hj in &self.hess {
            for row in hj {
                for p in row {
                    let v = p.evaluate_f64(x).expect("dimension checked");
                    d2 += v * v;
                }
            }
        }
        let gamma = d2.sqrt() * pinv_norm / 2.0;
        let a = beta * gamma;
        if a.is_finite() {
            a
        } else {
            f64::INFINITY
        }
    }
}

/// Gauss–Newton projection of `start` onto `V` with minimum-norm steps.
/// `None` when `‖h‖∞ ≤ tol` is not reached within `iters` iterations.
pub fn newton_project(
    v: &VarietySpec,
    start: &[f64],
    iters: usize,
    tol: f64,
) -> Result<Option<Vec<f64>>, VarietyError> {
    v.check_point(start.len())?;
    if v.generators.is_empty() {
        return Ok(Some(start.to_vec()));
    }
    let opts = SearchOptions { newton_tol: tol, newton_iters: iters, ..SearchOptions::default() };
    Ok(Projector::new(v)?.project(start.to_vec(), &opts))
}

/// [`newton_project`] for many starting points, sharing the derivative setup.
pub fn newton_project_all(
    v: &VarietySpec,
    starts: &[Vec<f64>],
    iters: usize,
    tol: f64,
) -> Result<Vec<Option<Vec<f64>>>, VarietyError> {
    for s in starts {
        v.check_point(s.len())?;
    }
    if v.generators.is_empty() {
        return Ok(starts.iter().cloned().map(Some).collect());
    }
    let opts = SearchOptions { newton_tol: tol, newton_iters: iters, ..SearchOptions::default() };
    let proj = Projector::new(v)?;
    Ok(starts.par_iter().map(|s| proj.project(s.clone(), &opts)).collect())
}

/// Random restarts in the ball `B(center, radius)`, Gauss–Newton projection
/// onto `V`, then classification. Returns the point from the lowest-indexed
/// successful trial.
pub fn regular_point_search(
    v: &VarietySpec,
    center: &[f64],
    radius: f64,
    trials: usize,
    seed: u64,
) -> Result<Option<Vec<f64>>, VarietyError> {
    regular_point_search_with(v, center, radius, trials, seed, &SearchOptions::default())
}

pub fn regular_point_search_with(
    v: &VarietySpec,
    center: &[f64],
    radius: f64,
    trials: usize,
    seed: u64,
    opts: &SearchOptions,
) -> Result<Option<Vec<f64>>, VarietyError> {
    v.check_point(center.len())?;
    v.dimension.ok_or(VarietyError::MissingDimension)?;
    let proj = Projector::new(v)?;
    let n = v.nvars();
    let found = (0..trials).into_par_iter().find_map_first(|trial| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let start = sample_ball(&mut rng, center, radius, n);
        let x = proj.project(start, opts)?;
        let dist: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if dist > radius {
            return None;
        }
        if classify_point(v, &x, opts.rank_tol).ok()? != PointClass::Regular {
            return None;
        }
        (proj.alpha(&x) < opts.alpha_max).then_some(x)
    });
    Ok(found)
}

fn sample_ball(rng: &mut ChaCha8Rng, center: &[f64], radius: f64, n: usize) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if u.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return center.iter().zip(u).map(|(c, ui)| c + radius * ui).collect();
        }
    }
}

/// Convert an `f64` point to exact rationals (binary expansion, no rounding).
pub fn exact_point(point: &[f64]) -> Vec<BigRational> {
    point.iter().map(|&x| BigRational::from_float(x).unwrap_or_else(BigRational::zero)).collect()
}

/// Whether every generator of `v` vanishes exactly at a rational point.
pub fn vanishes_exactly(v: &VarietySpec, point: &[BigRational]) -> Result<bool, VarietyError> {
    for g in &v.generators {
        if !g.evaluate(point)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

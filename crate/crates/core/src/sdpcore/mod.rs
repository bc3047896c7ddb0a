//! Dense primal–dual interior-point solver for small linear matrix
//! inequalities
//!
//! ```text
//! minimize cᵀu  subject to  F(u) = F₀ + Σ u_i F_i ⪰ 0
//! ```
//!
//! with block-diagonal symmetric data. The dual is
//! `maximize −⟨F₀, Z⟩` over `Z ⪰ 0` with `⟨F_i, Z⟩ = c_i`.
//!
//! Search directions use Nesterov–Todd scaling with a Mehrotra
//! predictor–corrector. Infeasibility and unboundedness are detected
//! heuristically from normalized rays and norm growth.

pub mod sdpa;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{check_symmetric, frob_dot, sym_eigen, LinalgError};
pub use crate::linalg::{cholesky_psd, min_eigenvalue};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SdpError {
    #[error("block {block}: expected {expected}x{expected} matrix, got {rows}x{cols}")]
    BlockShape { block: usize, expected: usize, rows: usize, cols: usize },
    #[error("matrix {index} has {got} blocks, expected {expected}")]
    BlockCount { index: usize, expected: usize, got: usize },
    #[error("objective has {got} entries for {expected} variables")]
    ObjectiveLength { expected: usize, got: usize },
    #[error("block sizes must be at least 1")]
    EmptyBlock,
    #[error("matrix {index}, block {block}: {source}")]
    Linalg { index: usize, block: usize, source: LinalgError },
    #[error("sdpa line {line}: {msg}")]
    Format { line: usize, msg: String },
}

/// `minimize cᵀu` subject to `F₀ + Σ u_i F_i ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiProblem<T: Real> {
    pub block_sizes: Vec<usize>,
    pub f0: Vec<DMatrix<T>>,
    /// `f[i][b]` is block `b` of `F_{i+1}`.
    pub f: Vec<Vec<DMatrix<T>>>,
    pub c: Vec<T>,
}

impl<T: Real> LmiProblem<T> {
    pub fn new(
        block_sizes: Vec<usize>,
        f0: Vec<DMatrix<T>>,
        f: Vec<Vec<DMatrix<T>>>,
        c: Vec<T>,
    ) -> Result<Self, SdpError> {
        if block_sizes.contains(&0) {
            return Err(SdpError::EmptyBlock);
        }
        if c.len() != f.len() {
            return Err(SdpError::ObjectiveLength { expected: f.len(), got: c.len() });
        }
        for (index, mats) in std::iter::once(&f0).chain(f.iter()).enumerate() {
            if mats.len() != block_sizes.len() {
                return Err(SdpError::BlockCount { index, expected: block_sizes.len(), got: mats.len() });
            }
            for (block, (m, &s)) in mats.iter().zip(&block_sizes).enumerate() {
                if m.nrows() != s || m.ncols() != s {
                    return Err(SdpError::BlockShape { block, expected: s, rows: m.nrows(), cols: m.ncols() });
                }
                check_symmetric(m).map_err(|source| SdpError::Linalg { index, block, source })?;
            }
        }
        Ok(LmiProblem { block_sizes, f0, f, c })
    }

    /// Number of scalar variables.
    pub fn m(&self) -> usize {
        self.c.len()
    }

    /// Total matrix dimension `Σ s_b`.
    pub fn dim(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// `F(u)` blockwise.
    pub fn eval(&self, u: &[T]) -> Vec<DMatrix<T>> {
        let mut out = self.f0.clone();
        for (ui, fi) in u.iter().zip(&self.f) {
            for (o, b) in out.iter_mut().zip(fi) {
                *o += b * *ui;
            }
        }
        out
    }

    pub fn objective(&self, u: &[T]) -> T {
        self.c.iter().zip(u).fold(T::zero(), |s, (&a, &b)| s + a * b)
    }

    /// `(⟨F_i, Z⟩)_i`.
    pub fn adjoint(&self, z: &[DMatrix<T>]) -> Vec<T> {
        self.f.iter().map(|fi| block_dot(fi, z)).collect()
    }

    /// Smallest eigenvalue of `F(u)` over all blocks.
    pub fn min_eig_at(&self, u: &[T]) -> T {
        min_block_eig(&self.eval(u))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    /// No `u` makes `F(u)` positive semidefinite.
    PrimalInfeasible,
    /// The objective is unbounded below, or the dual has no feasible point.
    DualInfeasibleOrUnbounded,
    Stalled,
    IterationLimit,
}

impl SolveStatus {
    pub fn is_optimal(&self) -> bool {
        matches!(self, SolveStatus::Optimal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iter: usize,
    /// Recorded for reports; the iteration itself is deterministic.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol_gap: 1e-8, tol_feas: 1e-8, max_iter: 200, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct LmiSolution<T: Real> {
    pub status: SolveStatus,
    pub u: Vec<T>,
    /// Dual matrix, blockwise.
    pub z: Vec<DMatrix<T>>,
    /// `cᵀu`.
    pub primal_objective: T,
    /// `−⟨F₀, Z⟩`.
    pub dual_objective: T,
    /// `‖F(u) − S‖_F / (1 + ‖F₀‖_F)` for the slack `S` of the last iterate.
    pub primal_residual: T,
    /// `‖(⟨F_i, Z⟩ − c_i)_i‖_∞ / (1 + ‖c‖_∞)`.
    pub dual_residual: T,
    /// `|cᵀu + ⟨F₀, Z⟩| / (1 + |cᵀu| + |⟨F₀, Z⟩|)`.
    pub relative_gap: T,
    pub iterations: usize,
}

fn block_dot<T: Real>(a: &[DMatrix<T>], b: &[DMatrix<T>]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + frob_dot(x, y))
}

fn block_norm<T: Real>(a: &[DMatrix<T>]) -> T {
    block_dot(a, a).sqrt()
}

fn min_block_eig<T: Real>(a: &[DMatrix<T>]) -> T {
    a.iter().map(|b| min_eigenvalue(b).unwrap_or(T::lit(f64::NAN))).fold(T::lit(f64::INFINITY), |m, v| {
        if v < m || v.partial_cmp(&v).is_none() {
            v
        } else {
            m
        }
    })
}

fn inf_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

/// NT scaling of one block: `W = G Gᵀ` with `W S W = Z` and
/// `G⁻¹ Z G⁻ᵀ = Gᵀ S G = diag(v)`.
struct Scaling<T: Real> {
    g: DMatrix<T>,
    g_inv: DMatrix<T>,
    w: DMatrix<T>,
    v: Vec<T>,
}

fn sqrt_and_inv_sqrt<T: Real>(a: &DMatrix<T>) -> Option<(DMatrix<T>, DMatrix<T>)> {
    let (vals, vecs) = sym_eigen(a).ok()?;
    if vals.iter().any(|&x| x <= T::zero() || !x.is_finite()) {
        return None;
    }
    let n = a.nrows();
    let s = DMatrix::from_fn(n, n, |r, c| vecs[(r, c)] * vals[c].sqrt());
    let si = DMatrix::from_fn(n, n, |r, c| vecs[(r, c)] / vals[c].sqrt());
    Some((&s * vecs.transpose(), &si * vecs.transpose()))
}

impl<T: Real> Scaling<T> {
    fn new(z: &DMatrix<T>, s: &DMatrix<T>) -> Option<Self> {
        let (zh, zhi) = sqrt_and_inv_sqrt(z)?;
        let inner = &zh * s * &zh;
        let (m, u) = sym_eigen(&inner.clone().symmetric_part()).ok()?;
        if m.iter().any(|&x| x <= T::zero() || !x.is_finite()) {
            return None;
        }
        let n = z.nrows();
        let q = T::lit(0.25);
        let zu = &zh * &u;
        let g = DMatrix::from_fn(n, n, |r, c| zu[(r, c)] * m[c].powf(-q));
        let ut_zhi = u.transpose() * &zhi;
        let g_inv = DMatrix::from_fn(n, n, |r, c| ut_zhi[(r, c)] * m[r].powf(q));
        let w = (&g * g.transpose()).symmetric_part();
        let v = m.iter().map(|&x| x.sqrt()).collect();
        Some(Scaling { g, g_inv, w, v })
    }

    fn scale_z(&self, dz: &DMatrix<T>) -> DMatrix<T> {
        &self.g_inv * dz * self.g_inv.transpose()
    }

    fn scale_s(&self, ds: &DMatrix<T>) -> DMatrix<T> {
        self.g.transpose() * ds * &self.g
    }

    /// Largest `α ≤ cap` keeping `diag(v) + α·D ⪰ 0`.
    fn max_step(&self, d: &DMatrix<T>, cap: T) -> T {
        let n = self.v.len();
        let scaled = DMatrix::from_fn(n, n, |r, c| d[(r, c)] / (self.v[r] * self.v[c]).sqrt());
        let lmin = min_eigenvalue(&scaled.symmetric_part()).unwrap_or(T::lit(f64::NAN));
        if !lmin.is_finite() {
            return T::zero();
        }
        if lmin >= T::zero() {
            cap
        } else {
            cap.min(-T::one() / lmin)
        }
    }
}

trait SymPart {
    fn symmetric_part(self) -> Self;
}

impl<T: Real> SymPart for DMatrix<T> {
    fn symmetric_part(self) -> Self {
        (&self + self.transpose()) * T::lit(0.5)
    }
}

/// Solve the LMI with default options.
pub fn solve<T: Real>(prob: &LmiProblem<T>) -> LmiSolution<T> {
    solve_with(prob, &SolveOptions::default())
}

pub fn solve_with<T: Real>(prob: &LmiProblem<T>, opts: &SolveOptions) -> LmiSolution<T> {
    Ipm::new(prob, opts).run()
}

struct Ipm<'a, T: Real> {
    p: &'a LmiProblem<T>,
    opts: &'a SolveOptions,
    u: Vec<T>,
    z: Vec<DMatrix<T>>,
    s: Vec<DMatrix<T>>,
    norm_f0: T,
    norm_c: T,
}

/// Ray tolerance for infeasibility certificates and the divergence cap.
const RAY_TOL: f64 = 1e-8;
const BLOWUP: f64 = 1e10;
const MIN_STEP: f64 = 1e-14;
const STEP_FRACTION: f64 = 0.98;

impl<'a, T: Real> Ipm<'a, T> {
    fn new(p: &'a LmiProblem<T>, opts: &'a SolveOptions) -> Self {
        let n = T::lit(p.dim() as f64);
        let ten = T::lit(10.0);
        let fnorms: Vec<T> = p.f.iter().map(|fi| block_norm(fi)).collect();
        let norm_f0 = block_norm(&p.f0);
        let mut zeta = ten.max(n.sqrt());
        let mut eta = ten.max(n.sqrt());
        for (ci, fi) in p.c.iter().zip(&fnorms) {
            zeta = zeta.max(n * (T::one() + ci.abs()) / (T::one() + *fi));
            eta = eta.max(T::one() + *fi);
        }
        eta = eta.max(T::one() + norm_f0);
        let ident = |k: usize, v: T| DMatrix::<T>::identity(k, k) * v;
        Ipm {
            p,
            opts,
            u: vec![T::zero(); p.m()],
            z: p.block_sizes.iter().map(|&k| ident(k, zeta)).collect(),
            s: p.block_sizes.iter().map(|&k| ident(k, eta)).collect(),
            norm_f0,
            norm_c: inf_norm(&p.c),
        }
    }

    fn finish(&self, status: SolveStatus, iterations: usize) -> LmiSolution<T> {
        let (pres, dres, gap) = self.residuals();
        LmiSolution {
            status,
            u: self.u.clone(),
            z: self.z.clone(),
            primal_objective: self.p.objective(&self.u),
            dual_objective: -block_dot(&self.p.f0, &self.z),
            primal_residual: pres,
            dual_residual: dres,
            relative_gap: gap,
            iterations,
        }
    }

    fn rs(&self) -> Vec<DMatrix<T>> {
        self.p.eval(&self.u).into_iter().zip(&self.s).map(|(f, s)| f - s).collect()
    }

    fn rz(&self) -> Vec<T> {
        self.p.adjoint(&self.z).into_iter().zip(&self.p.c).map(|(a, &c)| c - a).collect()
    }

    fn residuals(&self) -> (T, T, T) {
        let pres = block_norm(&self.rs()) / (T::one() + self.norm_f0);
        let dres = inf_norm(&self.rz()) / (T::one() + self.norm_c);
        let pobj = self.p.objective(&self.u);
        let dobj = -block_dot(&self.p.f0, &self.z);
        let gap = (pobj - dobj).abs() / (T::one() + pobj.abs() + dobj.abs());
        (pres, dres, gap)
    }

    fn ray_status(&self) -> Option<SolveStatus> {
        let tol = T::lit(RAY_TOL);
        let dobj = -block_dot(&self.p.f0, &self.z);
        if dobj > T::zero() {
            // Z / dobj: ⟨F_i, Z⟩ ≈ 0 with ⟨F₀, Z⟩ = −1 certifies an empty LMI
            let ray = inf_norm(&self.p.adjoint(&self.z)) / dobj;
            if ray <= tol * (T::one() + self.norm_c) {
                return Some(SolveStatus::PrimalInfeasible);
            }
        }
        let pobj = self.p.objective(&self.u);
        if pobj < T::zero() {
            // u / |cᵀu| with Σ ũ_i F_i ⪰ 0 certifies unboundedness
            let scale = -pobj;
            let rel = (self.norm_f0 + block_norm(&self.rs())) / scale;
            if rel <= tol {
                return Some(SolveStatus::DualInfeasibleOrUnbounded);
            }
        }
        // divergence without a certifying ray decides nothing
        let blow = T::lit(BLOWUP);
        if block_norm(&self.z) > blow || inf_norm(&self.u) > blow {
            return Some(SolveStatus::Stalled);
        }
        None
    }

    fn run(mut self) -> LmiSolution<T> {
        let n = T::lit(self.p.dim() as f64);
        for iter in 0..self.opts.max_iter {
            let (pres, dres, gap) = self.residuals();
            if !(pres.is_finite() && dres.is_finite() && gap.is_finite()) {
                return self.finish(SolveStatus::Stalled, iter);
            }
            if pres <= T::lit(self.opts.tol_feas)
                && dres <= T::lit(self.opts.tol_feas)
                && gap <= T::lit(self.opts.tol_gap)
            {
                return self.finish(SolveStatus::Optimal, iter);
            }
            if let Some(st) = self.ray_status() {
                return self.finish(st, iter);
            }
            let Some(sc) = self.z.iter().zip(&self.s).map(|(z, s)| Scaling::new(z, s)).collect::<Option<Vec<_>>>()
            else {
                return self.finish(SolveStatus::Stalled, iter);
            };
            let mu = block_dot(&self.z, &self.s) / n;
            let rs = self.rs();
            let rz = self.rz();
            let Some(schur) = self.schur(&sc) else {
                return self.finish(SolveStatus::Stalled, iter);
            };

            // predictor: D = −V
            let d_aff: Vec<DMatrix<T>> = sc
                .iter()
                .map(|b| DMatrix::from_fn(b.v.len(), b.v.len(), |r, c| if r == c { -b.v[r] } else { T::zero() }))
                .collect();
            let Some((_, dz_a, ds_a)) = self.direction(&sc, &schur, &d_aff, &rs, &rz) else {
                return self.finish(SolveStatus::Stalled, iter);
            };
            let (az_a, as_a) = self.steps(&sc, &dz_a, &ds_a, T::one());
            let mut mu_aff = T::zero();
            for b in 0..sc.len() {
                let zn = &self.z[b] + &dz_a[b] * az_a;
                let sn = &self.s[b] + &ds_a[b] * as_a;
                mu_aff += frob_dot(&zn, &sn);
            }
            mu_aff /= n;
            let ratio = (mu_aff / mu).max(T::zero()).min(T::one());
            let sigma = ratio * ratio * ratio;

            // corrector: (V D + D V) = 2σμI − 2V² − (dZ̃ dS̃ + dS̃ dZ̃)
            let d_corr: Vec<DMatrix<T>> = sc
                .iter()
                .enumerate()
                .map(|(b, scb)| {
                    let k = scb.v.len();
                    let zt = scb.scale_z(&dz_a[b]);
                    let st = scb.scale_s(&ds_a[b]);
                    let cross = &zt * &st + &st * &zt;
                    DMatrix::from_fn(k, k, |r, c| {
                        let diag = if r == c { T::lit(2.0) * (sigma * mu - scb.v[r] * scb.v[r]) } else { T::zero() };
                        (diag - cross[(r, c)]) / (scb.v[r] + scb.v[c])
                    })
                })
                .collect();
            let Some((du, dz, ds)) = self.direction(&sc, &schur, &d_corr, &rs, &rz) else {
                return self.finish(SolveStatus::Stalled, iter);
            };
            let cap = T::one() / T::lit(STEP_FRACTION);
            let (az, as_) = self.steps(&sc, &dz, &ds, cap);
            let az = az * T::lit(STEP_FRACTION);
            let as_ = as_ * T::lit(STEP_FRACTION);
            if az.max(as_) < T::lit(MIN_STEP) {
                return self.finish(SolveStatus::Stalled, iter);
            }
            for (u, d) in self.u.iter_mut().zip(du.iter()) {
                *u += *d * as_;
            }
            for b in 0..self.z.len() {
                self.z[b] = (&self.z[b] + &dz[b] * az).symmetric_part();
                self.s[b] = (&self.s[b] + &ds[b] * as_).symmetric_part();
            }
        }
        let (pres, dres, gap) = self.residuals();
        if pres <= T::lit(self.opts.tol_feas) && dres <= T::lit(self.opts.tol_feas) && gap <= T::lit(self.opts.tol_gap)
        {
            return self.finish(SolveStatus::Optimal, self.opts.max_iter);
        }
        self.finish(SolveStatus::IterationLimit, self.opts.max_iter)
    }

    /// `M_ij = ⟨F_i, W F_j W⟩`, factorized.
    fn schur(&self, sc: &[Scaling<T>]) -> Option<SchurFactor<T>> {
        let m = self.p.m();
        let wfw: Vec<Vec<DMatrix<T>>> =
            self.p.f.iter().map(|fj| fj.iter().zip(sc).map(|(f, s)| &s.w * f * &s.w).collect()).collect();
        let mut mat = DMatrix::<T>::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = block_dot(&self.p.f[i], &wfw[j]);
                mat[(i, j)] = v;
                mat[(j, i)] = v;
            }
        }
        SchurFactor::new(mat)
    }

    /// Solves for `(Δu, ΔZ, ΔS)` given the scaled right-hand side `D`.
    #[allow(clippy::type_complexity)]
    fn direction(
        &self,
        sc: &[Scaling<T>],
        schur: &SchurFactor<T>,
        d: &[DMatrix<T>],
        rs: &[DMatrix<T>],
        rz: &[T],
    ) -> Option<(Vec<T>, Vec<DMatrix<T>>, Vec<DMatrix<T>>)> {
        // ΔZ = G D Gᵀ − W ΔS W, ΔS = rs + Σ Δu_j F_j, ⟨F_i, ΔZ⟩ = rz_i
        let h: Vec<DMatrix<T>> =
            sc.iter().zip(d).zip(rs).map(|((s, db), r)| &s.g * db * s.g.transpose() - &s.w * r * &s.w).collect();
        let rhs = DVector::from_iterator(self.p.m(), self.p.f.iter().zip(rz).map(|(fi, &r)| block_dot(fi, &h) - r));
        let du = schur.solve(&rhs)?;
        let mut ds: Vec<DMatrix<T>> = rs.to_vec();
        for (j, fj) in self.p.f.iter().enumerate() {
            for (dsb, f) in ds.iter_mut().zip(fj) {
                *dsb += f * du[j];
            }
        }
        let dz: Vec<DMatrix<T>> = h
            .iter()
            .zip(sc)
            .zip(rs.iter().zip(&ds))
            .map(|((hb, s), (r, dsb))| (hb + &s.w * (r - dsb) * &s.w).symmetric_part())
            .collect();
        Some((du.iter().copied().collect(), dz, ds))
    }

    fn steps(&self, sc: &[Scaling<T>], dz: &[DMatrix<T>], ds: &[DMatrix<T>], cap: T) -> (T, T) {
        let mut az = cap;
        let mut as_ = cap;
        for (b, s) in sc.iter().enumerate() {
            az = az.min(s.max_step(&s.scale_z(&dz[b]), cap));
            as_ = as_.min(s.max_step(&s.scale_s(&ds[b]), cap));
        }
        (az, as_)
    }
}

enum SchurFactor<T: Real> {
    Empty,
    Chol(nalgebra::Cholesky<T, nalgebra::Dyn>),
    Lu(nalgebra::LU<T, nalgebra::Dyn, nalgebra::Dyn>),
}

impl<T: Real> SchurFactor<T> {
    fn new(mat: DMatrix<T>) -> Option<Self> {
        let m = mat.nrows();
        if m == 0 {
            return Some(SchurFactor::Empty);
        }
        if let Some(c) = mat.clone().cholesky() {
            return Some(SchurFactor::Chol(c));
        }
        let scale = (0..m).fold(T::zero(), |s, i| s.max(mat[(i, i)].abs())).max(T::lit(f64::MIN_POSITIVE));
        let reg = &mat + DMatrix::<T>::identity(m, m) * (scale * T::lit(1e-13));
        if let Some(c) = reg.cholesky() {
            return Some(SchurFactor::Chol(c));
        }
        let lu = mat.lu();
        lu.is_invertible().then_some(SchurFactor::Lu(lu))
    }

    fn solve(&self, rhs: &DVector<T>) -> Option<DVector<T>> {
        let x = match self {
            SchurFactor::Empty => return Some(DVector::zeros(0)),
            SchurFactor::Chol(c) => c.solve(rhs),
            SchurFactor::Lu(lu) => lu.solve(rhs)?,
        };
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(n: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(n, n, v)
    }

    #[test]
    fn two_by_two() {
        // [[u, 1], [1, u]] ⪰ 0 ⇔ u ≥ 1
        let p = LmiProblem::new(
            vec![2],
            vec![mat(2, &[0.0, 1.0, 1.0, 0.0])],
            vec![vec![DMatrix::identity(2, 2)]],
            vec![1.0],
        )
        .unwrap();
        let sol = solve(&p);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.u[0] - 1.0).abs() < 1e-7, "{}", sol.u[0]);
        assert!((sol.dual_objective - 1.0).abs() < 1e-7);
        // dual optimum Z = [[1/2, −1/2], [−1/2, 1/2]]
        assert!((sol.z[0][(0, 1)] + 0.5).abs() < 1e-6);
    }

    #[test]
    fn zero_objective() {
        let p = LmiProblem::new(
            vec![2],
            vec![DMatrix::identity(2, 2)],
            vec![vec![mat(2, &[1.0, 0.0, 0.0, -1.0])]],
            vec![0.0],
        )
        .unwrap();
        let sol = solve(&p);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.primal_objective.abs() < 1e-8);
        assert!(sol.relative_gap < 1e-8);
    }

    #[test]
    fn infeasible_diag() {
        // diag(u, −u − 1)
        let p = LmiProblem::new(
            vec![1, 1],
            vec![mat(1, &[0.0]), mat(1, &[-1.0])],
            vec![vec![mat(1, &[1.0]), mat(1, &[-1.0])]],
            vec![0.0],
        )
        .unwrap();
        assert_eq!(solve(&p).status, SolveStatus::PrimalInfeasible);
    }

    #[test]
    fn unbounded() {
        // minimize u s.t. 1 − u ≥ 0
        let p = LmiProblem::new(vec![1], vec![mat(1, &[1.0])], vec![vec![mat(1, &[-1.0])]], vec![1.0]).unwrap();
        assert_eq!(solve(&p).status, SolveStatus::DualInfeasibleOrUnbounded);
    }

    #[test]
    fn no_variables() {
        let p = LmiProblem::<f64>::new(vec![2], vec![DMatrix::identity(2, 2)], vec![], vec![]).unwrap();
        let sol = solve(&p);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.dual_objective.abs() < 1e-8);
    }

    #[test]
    fn shape_errors() {
        let bad = LmiProblem::<f64>::new(vec![2], vec![DMatrix::identity(3, 3)], vec![], vec![]);
        assert!(matches!(bad, Err(SdpError::BlockShape { .. })));
        let asym = LmiProblem::new(vec![2], vec![mat(2, &[1.0, 2.0, 0.0, 1.0])], vec![], vec![]);
        assert!(matches!(asym, Err(SdpError::Linalg { .. })));
        let len = LmiProblem::new(vec![1], vec![mat(1, &[1.0])], vec![], vec![1.0]);
        assert!(matches!(len, Err(SdpError::ObjectiveLength { .. })));
        assert!(matches!(
            LmiProblem::<f64>::new(vec![0], vec![DMatrix::zeros(0, 0)], vec![], vec![]),
            Err(SdpError::EmptyBlock)
        ));
    }

    #[test]
    fn f32_solves() {
        let p = LmiProblem::new(
            vec![2],
            vec![DMatrix::from_row_slice(2, 2, &[0.0f32, 1.0, 1.0, 0.0])],
            vec![vec![DMatrix::identity(2, 2)]],
            vec![1.0f32],
        )
        .unwrap();
        let opts = SolveOptions { tol_gap: 1e-5, tol_feas: 1e-5, ..SolveOptions::default() };
        let sol = solve_with(&p, &opts);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.u[0] - 1.0).abs() < 1e-3);
    }

    fn random_sym(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> DMatrix<f64> {
        use rand::Rng;
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        (&a + a.transpose()) * 0.5
    }

    /// Strictly feasible at `u0` with `F(u0) = P ≻ 0`; bounded since
    /// `c_i = ⟨F_i, Z0⟩` for some `Z0 ≻ 0`.
    fn random_feasible(seed: u64) -> (LmiProblem<f64>, Vec<f64>) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let sizes = vec![rng.gen_range(1..5), rng.gen_range(1..4)];
        let m = rng.gen_range(1..6);
        let pd = |rng: &mut rand_chacha::ChaCha8Rng, n: usize| {
            let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            &a * a.transpose() + DMatrix::identity(n, n) * 0.1
        };
        let f: Vec<Vec<DMatrix<f64>>> =
            (0..m).map(|_| sizes.iter().map(|&n| random_sym(&mut rng, n)).collect()).collect();
        let u0: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut f0: Vec<DMatrix<f64>> = sizes.iter().map(|&n| pd(&mut rng, n)).collect();
        for (ui, fi) in u0.iter().zip(&f) {
            for (b, fb) in f0.iter_mut().zip(fi) {
                *b -= fb * *ui;
            }
        }
        let z0: Vec<DMatrix<f64>> = sizes.iter().map(|&n| pd(&mut rng, n)).collect();
        let c = f.iter().map(|fi| block_dot(fi, &z0)).collect();
        (LmiProblem::new(sizes, f0, f, c).unwrap(), u0)
    }

    #[test]
    fn random_strictly_feasible() {
        for seed in 0..20 {
            let (p, u0) = random_feasible(seed);
            let sol = solve(&p);
            assert_eq!(sol.status, SolveStatus::Optimal, "seed {seed}: {sol:?}");
            assert!(sol.primal_objective <= p.objective(&u0) + 1e-7);
            let kkt: Vec<f64> = p.adjoint(&sol.z).iter().zip(&p.c).map(|(a, c)| a - c).collect();
            assert!(inf_norm(&kkt) <= 1e-7 * (1.0 + inf_norm(&p.c)));
            assert!(p.min_eig_at(&sol.u) >= -1e-7);
            assert!(min_block_eig(&sol.z) >= -1e-7);
        }
    }

    #[test]
    fn deterministic() {
        let (p, _) = random_feasible(7);
        let a = solve(&p);
        let b = solve(&p);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.u, b.u);
        assert_eq!(a.z, b.z);
    }

    #[test]
    fn eigen_helpers() {
        assert_eq!(min_eigenvalue(&DMatrix::<f64>::identity(3, 3)).unwrap(), 1.0);
        assert!((min_eigenvalue(&mat(2, &[3.0, 0.0, 0.0, -2.0])).unwrap() + 2.0).abs() < 1e-12);
        assert!(cholesky_psd(&mat(2, &[1.0, 0.0, 0.0, 0.0]), 1e-9).is_ok());
        assert!(cholesky_psd(&mat(2, &[1.0, 0.0, 0.0, -1.0]), 1e-9).is_err());
        assert!(min_eigenvalue(&mat(2, &[1.0, 1.0, 0.0, 1.0])).is_err());
    }
}

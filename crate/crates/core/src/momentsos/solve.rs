//! Solving one order of the hierarchy: the primal moment program through
//! the reduced LMI, `ρ_k` and a Gram certificate from its dual matrix, and a
//! direct solve of the SOS program as a cross-check.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::reduce::{reduce, IdealCertificate, Reduction};
use super::{build_relaxation, half_degree, monomial_basis, MomentError, MomentRelaxation};
use crate::certify::SOSCertificate;
use crate::linalg::{lstsq, orthonormal_columns};
use crate::polyalg::default_names;
use crate::rational::{solve_affine, AffineSolution};
use crate::scalar::Coefficient;
use crate::sdpcore::{solve_with, LmiProblem, LmiSolution, SolveOptions, SolveStatus};
use crate::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelaxationStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Stalled,
    IterationLimit,
    /// The relaxation is undefined at this order.
    OrderTooSmall,
}

impl RelaxationStatus {
    pub fn is_optimal(&self) -> bool {
        matches!(self, RelaxationStatus::Optimal)
    }
}

fn map_status(s: SolveStatus) -> RelaxationStatus {
    match s {
        SolveStatus::Optimal => RelaxationStatus::Optimal,
        SolveStatus::PrimalInfeasible => RelaxationStatus::Infeasible,
        SolveStatus::DualInfeasibleOrUnbounded => RelaxationStatus::Unbounded,
        SolveStatus::Stalled => RelaxationStatus::Stalled,
        SolveStatus::IterationLimit => RelaxationStatus::IterationLimit,
    }
}

/// Why a relaxation was declared infeasible.
#[derive(Debug, Clone, PartialEq)]
pub enum InfeasibilityEvidence {
    /// The equalities alone are inconsistent: `1 = Σ q_t h_t` exactly.
    Ideal(IdealCertificate),
    /// The interior-point dual iterate diverged along an improving ray.
    Ray { dual_norm: f64 },
}

/// Dimensions of the solved problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSizes {
    pub moment_block: usize,
    pub moments: usize,
    pub equations: usize,
    /// Independent equalities after exact elimination.
    pub rank: usize,
    /// Free parameters of the reduced LMI.
    pub free: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalSolution {
    pub status: RelaxationStatus,
    /// `τ_k`, also reported for stalled runs.
    pub tau: Option<f64>,
    /// Pseudo-moments over the degree-`2k` basis.
    pub y: Option<Vec<f64>>,
    pub evidence: Option<InfeasibilityEvidence>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub status: RelaxationStatus,
    /// `ρ_k`, also reported for stalled runs.
    pub rho: Option<f64>,
    pub certificate: Option<SOSCertificate>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationSolution {
    pub k: u32,
    pub primal: PrimalSolution,
    pub dual: DualSolution,
    pub sizes: ProblemSizes,
    pub relative_gap: Option<f64>,
}

fn sizes(rel: &MomentRelaxation, rank: usize, free: usize) -> ProblemSizes {
    ProblemSizes {
        moment_block: rel.moment_basis.len(),
        moments: rel.num_moments(),
        equations: rel.num_equations(),
        rank,
        free,
    }
}

/// Solve the order-`k` primal and recover the dual from the same run.
pub fn solve_relaxation(rel: &MomentRelaxation, opts: &SolveOptions) -> RelaxationSolution {
    let reduced = match reduce(rel) {
        Reduction::Inconsistent(cert) => {
            let size = sizes(rel, rel.num_moments(), 0);
            return RelaxationSolution {
                k: rel.k,
                primal: PrimalSolution {
                    status: RelaxationStatus::Infeasible,
                    tau: None,
                    y: None,
                    evidence: Some(InfeasibilityEvidence::Ideal(cert)),
                    iterations: 0,
                },
                dual: DualSolution { status: RelaxationStatus::Unbounded, rho: None, certificate: None, iterations: 0 },
                sizes: size,
                relative_gap: None,
            };
        }
        Reduction::Reduced(r) => r,
    };
    let sol: LmiSolution<f64> = solve_with(&reduced.lmi, opts);
    let status = map_status(sol.status);
    let tau = reduced.offset + sol.primal_objective;
    let rho = reduced.offset + sol.dual_objective;
    let finite = |v: f64| v.is_finite().then_some(v);
    let has_values =
        matches!(status, RelaxationStatus::Optimal | RelaxationStatus::Stalled | RelaxationStatus::IterationLimit);
    let evidence = (status == RelaxationStatus::Infeasible)
        .then(|| InfeasibilityEvidence::Ray { dual_norm: sol.z.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt() });
    let certificate = if status.is_optimal() { Some(certificate_from_gram(rel, rho, &sol.z[0])) } else { None };
    let dual_status = match status {
        RelaxationStatus::Infeasible => RelaxationStatus::Unbounded,
        RelaxationStatus::Unbounded => RelaxationStatus::Infeasible,
        s => s,
    };
    RelaxationSolution {
        k: rel.k,
        primal: PrimalSolution {
            status,
            tau: if has_values { finite(tau) } else { None },
            y: has_values.then(|| reduced.moments(&sol.u)),
            evidence,
            iterations: sol.iterations,
        },
        dual: DualSolution {
            status: dual_status,
            rho: if has_values { finite(rho) } else { None },
            certificate,
            iterations: sol.iterations,
        },
        sizes: sizes(rel, reduced.rank, reduced.lmi.m()),
        relative_gap: has_values.then_some(sol.relative_gap),
    }
}

pub fn solve_primal(rel: &MomentRelaxation, opts: &SolveOptions) -> PrimalSolution {
    solve_relaxation(rel, opts).primal
}

/// `ρ_k` and its certificate, recovered from the reduced primal.
pub fn solve_dual(h0: &Poly, h: &[Poly], k: u32, opts: &SolveOptions) -> Result<DualSolution, MomentError> {
    Ok(solve_relaxation(&build_relaxation(h0, h, k)?, opts).dual)
}

/// Coefficient vector of `h_t · x^γ` over `y`, one column per `(t, γ)`.
fn ideal_columns(rel: &MomentRelaxation) -> (DMatrix<f64>, Vec<usize>) {
    let n = rel.nvars();
    let ny = rel.num_moments();
    let mut cols: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut counts = Vec::with_capacity(rel.h.len());
    for g in &rel.h {
        let b = monomial_basis(n, 2 * (rel.k - half_degree(g)));
        counts.push(b.len());
        for gamma in b.monomials() {
            cols.push(
                g.terms()
                    .map(|(m, c)| (rel.y_basis.position(&m.mul(gamma)).expect("degree ≤ 2k"), c.to_f64()))
                    .collect(),
            );
        }
    }
    let mut a = DMatrix::zeros(ny, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for &(i, v) in col {
            a[(i, j)] += v;
        }
    }
    (a, counts)
}

/// Build the certificate `h₀ − ξ = vᵀGv + Σ h_t u_t`, fitting `u_t` by least
/// squares to the remainder.
pub(crate) fn certificate_from_gram(rel: &MomentRelaxation, xi: f64, g: &DMatrix<f64>) -> SOSCertificate {
    let ny = rel.num_moments();
    let mut target = DVector::zeros(ny);
    for (i, c) in &rel.objective {
        target[*i] += c.to_f64();
    }
    target[0] -= xi;
    let s = rel.moment_basis.len();
    for i in 0..s {
        for j in 0..s {
            target[rel.moment_block[i][j]] -= 0.5 * (g[(i, j)] + g[(j, i)]);
        }
    }
    let (a, counts) = ideal_columns(rel);
    let coeffs = if a.ncols() == 0 { DVector::zeros(0) } else { lstsq(&a, &target) };
    let mut multipliers = Vec::with_capacity(counts.len());
    let mut at = 0;
    for c in counts {
        multipliers.push(coeffs.rows(at, c).iter().copied().collect());
        at += c;
    }
    let gram: Vec<Vec<f64>> = (0..s).map(|i| (0..s).map(|j| 0.5 * (g[(i, j)] + g[(j, i)])).collect()).collect();
    let mut cert = SOSCertificate::new(default_names(rel.nvars()), rel.k, xi, gram, multipliers);
    cert.residual_norm = cert.residual(&rel.h0, &rel.h).map(|r| r.max_abs_coefficient()).unwrap_or(f64::INFINITY);
    cert
}

/// Solve the SOS program directly: eliminate the coefficient identities
/// over `(G, u, ξ)` exactly, then maximize `ξ` subject to `G ⪰ 0`.
pub fn solve_dual_direct(h0: &Poly, h: &[Poly], k: u32, opts: &SolveOptions) -> Result<DualSolution, MomentError> {
    let rel = build_relaxation(h0, h, k)?;
    let n = rel.nvars();
    let s = rel.moment_basis.len();
    let ny = rel.num_moments();
    let pairs: Vec<(usize, usize)> = (0..s).flat_map(|i| (i..s).map(move |j| (i, j))).collect();
    let ng = pairs.len();
    let mut u_cols: Vec<Vec<(usize, BigRational)>> = Vec::new();
    for g in &rel.h {
        for gamma in monomial_basis(n, 2 * (k - half_degree(g))).monomials() {
            u_cols.push(
                g.terms().map(|(m, c)| (rel.y_basis.position(&m.mul(gamma)).expect("degree"), c.clone())).collect(),
            );
        }
    }
    let nu = u_cols.len();
    let ncols = ng + nu + 1;
    let mut a = vec![vec![BigRational::zero(); ncols]; ny];
    let two = BigRational::from_integer(2.into());
    for (p, &(i, j)) in pairs.iter().enumerate() {
        a[rel.moment_block[i][j]][p] = if i == j { BigRational::one() } else { two.clone() };
    }
    for (q, col) in u_cols.iter().enumerate() {
        for (r, c) in col {
            a[*r][ng + q] = &a[*r][ng + q] + c;
        }
    }
    a[0][ng + nu] = BigRational::one();
    let mut b = vec![BigRational::zero(); ny];
    for (i, c) in &rel.objective {
        b[*i] = &b[*i] + c;
    }
    let (particular, basis) = match solve_affine(&a, &b, ncols) {
        AffineSolution::Inconsistent { .. } => {
            return Ok(DualSolution {
                status: RelaxationStatus::Unbounded,
                rho: None,
                certificate: None,
                iterations: 0,
            })
        }
        AffineSolution::Solved { particular, basis } => (particular, basis),
    };
    // keep the (G, ξ) coordinates only; u is free
    let keep = |v: &[BigRational]| -> DVector<f64> {
        DVector::from_iterator(ng + 1, v[..ng].iter().chain(std::iter::once(&v[ng + nu])).map(|c| c.to_f64()))
    };
    let dirs = DMatrix::from_columns(&basis.iter().map(|v| keep(v)).collect::<Vec<_>>());
    let q = if basis.is_empty() { DMatrix::zeros(ng + 1, 0) } else { orthonormal_columns(&dirs, 1e-12) };
    let p0 = keep(&particular);
    let p = &p0 - &q * (q.transpose() * &p0);
    let to_mat = |v: &[f64]| {
        let mut m = DMatrix::zeros(s, s);
        for (idx, &(i, j)) in pairs.iter().enumerate() {
            m[(i, j)] = v[idx];
            m[(j, i)] = v[idx];
        }
        m
    };
    let pv: Vec<f64> = p.iter().copied().collect();
    let f0 = vec![to_mat(&pv[..ng])];
    let mut f = Vec::with_capacity(q.ncols());
    let mut c = Vec::with_capacity(q.ncols());
    for col in 0..q.ncols() {
        let qi: Vec<f64> = q.column(col).iter().copied().collect();
        f.push(vec![to_mat(&qi[..ng])]);
        c.push(-qi[ng]);
    }
    let lmi = LmiProblem::new(vec![s], f0, f, c).expect("symmetric by construction");
    let sol = solve_with(&lmi, opts);
    let status = match sol.status {
        SolveStatus::PrimalInfeasible => RelaxationStatus::Unbounded,
        SolveStatus::DualInfeasibleOrUnbounded => RelaxationStatus::Infeasible,
        other => map_status(other),
    };
    let has_values =
        matches!(status, RelaxationStatus::Optimal | RelaxationStatus::Stalled | RelaxationStatus::IterationLimit);
    let rho = pv[ng] - sol.primal_objective;
    let certificate = status.is_optimal().then(|| {
        let g = lmi.eval(&sol.u).remove(0);
        certificate_from_gram(&rel, rho, &g)
    });
    Ok(DualSolution {
        status,
        rho: (has_values && rho.is_finite()).then_some(rho),
        certificate,
        iterations: sol.iterations,
    })
}

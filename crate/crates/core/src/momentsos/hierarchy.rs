//! Sweeping the relaxation order.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solve::{solve_dual_direct, solve_relaxation, InfeasibilityEvidence, ProblemSizes, RelaxationStatus};
use super::{build_relaxation, MomentError};
use crate::certify::SOSCertificate;
use crate::sdpcore::SolveOptions;
use crate::Poly;

/// Environment variable capping the number of orders solved in parallel.
pub const THREADS_ENV: &str = "SINGULAR_SOS_THREADS";

/// Solver tolerance used per order; tighter than the LMI default so that
/// values are resolved below the invariant tolerances.
pub const HIERARCHY_SOLVER_TOL: f64 = 1e-9;

/// How `ρ_k` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DualMode {
    /// From the dual matrix of the primal solve.
    #[default]
    Recovered,
    /// From a separate solve of the SOS program.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HierarchyOptions {
    pub solver: SolveOptions,
    /// Consecutive orders must agree to this.
    pub stabilization_tol: f64,
    /// `|τ_k − ρ_k|` bound for a converged order.
    pub gap_tol: f64,
    pub dual_mode: DualMode,
    /// Overrides the environment thread cap.
    pub threads: Option<usize>,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        HierarchyOptions {
            solver: SolveOptions {
                tol_gap: HIERARCHY_SOLVER_TOL,
                tol_feas: HIERARCHY_SOLVER_TOL,
                ..SolveOptions::default()
            },
            stabilization_tol: 1e-6,
            gap_tol: 1e-6,
            dual_mode: DualMode::Recovered,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderRecord {
    pub k: u32,
    pub status: RelaxationStatus,
    pub dual_status: RelaxationStatus,
    pub tau: Option<f64>,
    pub rho: Option<f64>,
    /// `τ_k − ρ_k`.
    pub gap: Option<f64>,
    pub sizes: Option<ProblemSizes>,
    pub iterations: usize,
    pub wall_ms: f64,
    /// Exact `1 ∈ (h)` proof found by elimination.
    pub ideal_infeasible: bool,
    #[serde(skip)]
    pub certificate: Option<SOSCertificate>,
    #[serde(skip)]
    pub moments: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyResult {
    pub records: Vec<OrderRecord>,
    pub converged: bool,
    pub converged_at: Option<u32>,
    /// `τ` at the converged order, else at the highest optimal order.
    pub value: Option<f64>,
}

impl HierarchyResult {
    pub fn record(&self, k: u32) -> Option<&OrderRecord> {
        self.records.iter().find(|r| r.k == k)
    }

    /// Whether some order is infeasible, which certifies that the equality
    /// set has no real point: point moments would be feasible at every order.
    pub fn any_infeasible(&self) -> bool {
        self.records.iter().any(|r| r.status == RelaxationStatus::Infeasible)
    }

    /// Whether every defined order is infeasible.
    pub fn all_infeasible(&self) -> bool {
        let defined: Vec<_> = self.records.iter().filter(|r| r.status != RelaxationStatus::OrderTooSmall).collect();
        !defined.is_empty() && defined.iter().all(|r| r.status == RelaxationStatus::Infeasible)
    }
}

/// Thread cap from [`THREADS_ENV`]; `0` lets rayon decide.
pub fn order_threads() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

fn solve_order(h0: &Poly, h: &[Poly], k: u32, opts: &HierarchyOptions) -> Result<OrderRecord, MomentError> {
    let start = Instant::now();
    let rel = match build_relaxation(h0, h, k) {
        Ok(r) => r,
        Err(MomentError::OrderTooSmall { .. }) => {
            return Ok(OrderRecord {
                k,
                status: RelaxationStatus::OrderTooSmall,
                dual_status: RelaxationStatus::OrderTooSmall,
                tau: None,
                rho: None,
                gap: None,
                sizes: None,
                iterations: 0,
                wall_ms: 0.0,
                ideal_infeasible: false,
                certificate: None,
                moments: None,
            })
        }
        Err(e) => return Err(e),
    };
    let sol = solve_relaxation(&rel, &opts.solver);
    let (dual_status, rho, certificate, extra_iters) = match opts.dual_mode {
        DualMode::Recovered => (sol.dual.status, sol.dual.rho, sol.dual.certificate, 0),
        DualMode::Direct => {
            let d = solve_dual_direct(h0, h, k, &opts.solver)?;
            (d.status, d.rho, d.certificate, d.iterations)
        }
    };
    let tau = sol.primal.tau;
    Ok(OrderRecord {
        k,
        status: sol.primal.status,
        dual_status,
        tau,
        rho,
        gap: tau.zip(rho).map(|(t, r)| t - r),
        sizes: Some(sol.sizes),
        iterations: sol.primal.iterations + extra_iters,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        ideal_infeasible: matches!(sol.primal.evidence, Some(InfeasibilityEvidence::Ideal(_))),
        certificate,
        moments: sol.primal.y,
    })
}

fn converged_pair(a: &OrderRecord, b: &OrderRecord, opts: &HierarchyOptions) -> bool {
    let ok = |r: &OrderRecord| {
        r.status.is_optimal() && r.dual_status.is_optimal() && r.gap.is_some_and(|g| g.abs() <= opts.gap_tol)
    };
    ok(a) && ok(b) && matches!((a.tau, b.tau), (Some(x), Some(y)) if (x - y).abs() <= opts.stabilization_tol)
}

/// Solve orders `k_min..=k_max`, in parallel up to the thread cap. Records
/// are ordered by `k`; a failing order does not stop the sweep.
pub fn run_hierarchy(
    h0: &Poly,
    h: &[Poly],
    k_min: u32,
    k_max: u32,
    opts: &HierarchyOptions,
) -> Result<HierarchyResult, MomentError> {
    if k_min > k_max {
        return Err(MomentError::OrderRange { k_min, k_max });
    }
    let threads = opts.threads.unwrap_or_else(order_threads);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    let ks: Vec<u32> = (k_min..=k_max).collect();
    let records =
        pool.install(|| ks.par_iter().map(|&k| solve_order(h0, h, k, opts)).collect::<Result<Vec<_>, _>>())?;
    let converged_at = records.windows(2).find(|w| converged_pair(&w[0], &w[1], opts)).map(|w| w[0].k);
    let value = match converged_at {
        Some(k) => records.iter().find(|r| r.k == k).and_then(|r| r.tau),
        None => records.iter().rev().find(|r| r.status.is_optimal()).and_then(|r| r.tau),
    };
    Ok(HierarchyResult { records, converged: converged_at.is_some(), converged_at, value })
}

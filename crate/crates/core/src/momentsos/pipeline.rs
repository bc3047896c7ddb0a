//! End-to-end pipelines: pull back through a resolution, form the KKT
//! system, and run the hierarchy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hierarchy::{run_hierarchy, HierarchyOptions, HierarchyResult};
use super::solve::RelaxationStatus;
use super::MomentError;
use crate::boundcalc::bound_table;
use crate::kktsys::build_kkt_named;
use crate::resolve::{check_welldefined, pullback, ResolutionMorphism};
use crate::varietylab::{newton_project, VarietySpec};
use crate::{FloatPoly, Poly};

/// Hypotheses of the resolution pipeline that are not checked.
pub const ASSUMPTIONS: [&str; 3] = [
    "the regular locus of V is dense in V",
    "the pulled-back objective attains its infimum on W",
    "the generators of W generate its vanishing ideal I(W)",
];

/// Hypotheses of the direct KKT pipeline that are not checked.
pub const DIRECT_ASSUMPTIONS: [&str; 2] = [
    "a global minimizer exists and satisfies the KKT conditions",
    "the generators of V generate its vanishing ideal I(V)",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineOptions {
    pub hierarchy: HierarchyOptions,
    /// Local searches used to estimate the infimum.
    pub samples: usize,
    pub seed: u64,
    /// Replace the pulled-back objective by its remainder modulo the
    /// source generators.
    pub reduce_objective: bool,
    /// Half-width of the box the local searches start in.
    pub sample_radius: f64,
    /// A sampled value this far below the hierarchy value flags
    /// non-attainment.
    pub attainment_margin: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            hierarchy: HierarchyOptions::default(),
            samples: 100,
            seed: 0,
            reduce_objective: true,
            sample_radius: 10.0,
            attainment_margin: 1e-3,
        }
    }
}

/// Theoretical order bounds, as printed by `boundcalc`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSummary {
    pub n: u64,
    pub d: u64,
    pub l: u64,
    pub w: String,
    pub r: String,
    pub cardinality: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    /// Objective in the KKT ring, canonical text.
    pub objective: String,
    /// KKT variables, multipliers last.
    pub vars: Vec<String>,
    pub kkt: Vec<String>,
    pub morphism: Option<String>,
    pub assumptions: Vec<String>,
    pub bounds: Option<BoundSummary>,
    pub hierarchy: HierarchyResult,
    /// Best objective value found by local search on the feasible set.
    pub sampled_minimum: Option<f64>,
    pub sampled_minimizer: Option<Vec<f64>>,
    /// The hierarchy value exceeds a sampled value by the margin.
    pub non_attainment: bool,
    /// Some order is infeasible, so the KKT system has no real point.
    pub infeasible_kkt: bool,
    /// Sampled check that `φ(W) ⊂ V`.
    pub welldefined: Option<bool>,
    pub notes: Vec<String>,
}

impl PipelineReport {
    pub fn value(&self) -> Option<f64> {
        self.hierarchy.value
    }
}

fn bounds(n: usize, l: usize, polys: &[&Poly]) -> Option<BoundSummary> {
    let d = polys.iter().map(|p| p.degree()).max().unwrap_or(0).max(2) as u64;
    let t = bound_table(n as u64, d, l as u64).ok()?;
    Some(BoundSummary {
        n: n as u64,
        d,
        l: l as u64,
        w: t.w.to_string(),
        r: t.r.to_string(),
        cardinality: t.cardinality.to_string(),
    })
}

/// Projected gradient descent with backtracking from seeded starts in
/// `[−radius, radius]ⁿ`. Returns the best value and point found.
pub fn sample_minimum(
    v: &VarietySpec,
    f: &Poly,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<Option<(f64, Vec<f64>)>, MomentError> {
    let n = v.nvars();
    if f.nvars() != n {
        return Err(crate::PolyError::NvarsMismatch { left: n, right: f.nvars() }.into());
    }
    let ff = f.to_f64();
    let grad: Vec<FloatPoly> = ff.gradient();
    let eval = |x: &[f64]| ff.evaluate_f64(x).unwrap_or(f64::INFINITY);
    let project = |x: &[f64]| newton_project(v, x, 30, 1e-12).ok().flatten();
    let results: Vec<Option<(f64, Vec<f64>)>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let start: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..=radius)).collect();
            let mut x = project(&start)?;
            let mut fx = eval(&x);
            let mut step = 1.0f64;
            for _ in 0..200 {
                let g: Vec<f64> = grad.iter().map(|p| p.evaluate_f64(&x).unwrap_or(0.0)).collect();
                let gg: f64 = g.iter().map(|a| a * a).sum();
                if gg < 1e-24 || !gg.is_finite() {
                    break;
                }
                step = (step * 2.0).min(1.0);
                let mut moved = false;
                while step > 1e-12 {
                    let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
                    if let Some(y) = project(&trial) {
                        let fy = eval(&y);
                        if fy < fx - 1e-4 * step * gg {
                            x = y;
                            fx = fy;
                            moved = true;
                            break;
                        }
                    }
                    step *= 0.5;
                }
                if !moved {
                    break;
                }
            }
            fx.is_finite().then_some((fx, x))
        })
        .collect();
    Ok(results.into_iter().flatten().fold(None, |best: Option<(f64, Vec<f64>)>, cand| match best {
        Some(b) if b.0 <= cand.0 => Some(b),
        _ => Some(cand),
    }))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    v: &VarietySpec,
    f: &Poly,
    h0: &Poly,
    gens: &[Poly],
    names: &[String],
    k_min: u32,
    k_max: u32,
    opts: &PipelineOptions,
) -> Result<PipelineReport, MomentError> {
    let kkt = build_kkt_named(h0, gens, names)?;
    let h0_ext = h0.extend_ring(kkt.nvars(), 0)?;
    let mut hierarchy = run_hierarchy(&h0_ext, &kkt.polynomials, k_min, k_max, &opts.hierarchy)?;
    for r in &mut hierarchy.records {
        if let Some(c) = &mut r.certificate {
            c.vars = kkt.vars.clone();
        }
    }
    let refs: Vec<&Poly> = std::iter::once(h0).chain(gens).collect();
    let sampled = sample_minimum(v, f, opts.samples, opts.sample_radius, opts.seed)?;
    let infeasible_kkt = hierarchy.any_infeasible();
    let non_attainment = match (&sampled, hierarchy.value) {
        (Some((s, _)), Some(val)) => *s < val - opts.attainment_margin,
        _ => false,
    };
    let mut notes = Vec::new();
    if let Some(r) = hierarchy.records.iter().find(|r| r.status == RelaxationStatus::Infeasible) {
        notes.push(format!(
            "KKT relaxation infeasible at order {}: the KKT system has no real point, so no minimizer \
             satisfies the KKT conditions and the relaxation cannot reach the infimum",
            r.k
        ));
    }
    if non_attainment {
        let (s, _) = sampled.as_ref().expect("checked");
        notes.push(format!(
            "non-attainment: local search found objective value {s:.6e} below the hierarchy value {:.6e}; \
             the relaxation exceeds the true infimum, which is not attained at a KKT point",
            hierarchy.value.expect("checked")
        ));
    }
    if !hierarchy.converged && !infeasible_kkt {
        notes.push("hierarchy did not stabilize within the tested orders".to_string());
    }
    Ok(PipelineReport {
        objective: h0_ext.to_text(&kkt.vars),
        vars: kkt.vars.clone(),
        kkt: kkt.to_text(),
        morphism: None,
        assumptions: Vec::new(),
        bounds: bounds(names.len(), gens.len(), &refs),
        hierarchy,
        sampled_minimum: sampled.as_ref().map(|s| s.0),
        sampled_minimizer: sampled.map(|s| s.1),
        non_attainment,
        infeasible_kkt,
        welldefined: None,
        notes,
    })
}

/// `f ∘ φ`, optionally replaced by its remainder after division by each
/// source generator in turn.
pub fn pulled_back_objective(f: &Poly, phi: &ResolutionMorphism, reduce: bool) -> Result<Poly, MomentError> {
    let mut h0 = pullback(f, phi)?;
    if reduce {
        for g in phi.source.generators.iter().filter(|g| !g.is_zero()) {
            h0 = h0.divide(g)?.1;
        }
    }
    Ok(h0)
}

/// `min f` on a singular `V` through a resolution `φ: W → V`: the hierarchy
/// runs on `f ∘ φ` and the KKT system of `W`.
pub fn solve_singular(
    v: &VarietySpec,
    f: &Poly,
    phi: &ResolutionMorphism,
    k_min: u32,
    k_max: u32,
    opts: &PipelineOptions,
) -> Result<PipelineReport, MomentError> {
    if phi.target.nvars() != v.nvars() {
        return Err(MomentError::TargetMismatch { expected: v.nvars(), got: phi.target.nvars() });
    }
    if f.nvars() != v.nvars() {
        return Err(crate::PolyError::NvarsMismatch { left: v.nvars(), right: f.nvars() }.into());
    }
    let h0 = pulled_back_objective(f, phi, opts.reduce_objective)?;
    let mut report = finish(v, f, &h0, &phi.source.generators, &phi.source.vars, k_min, k_max, opts)?;
    report.morphism = Some(phi.name.clone().unwrap_or_else(|| "custom".to_string()));
    report.assumptions = ASSUMPTIONS.iter().map(|s| s.to_string()).collect();
    report.welldefined = check_welldefined(phi, opts.samples, opts.seed, 1e-8).ok().map(|r| r.pass);
    Ok(report)
}

/// `min f` on `V` with the KKT system of `V` itself.
pub fn solve_direct(
    v: &VarietySpec,
    f: &Poly,
    k_min: u32,
    k_max: u32,
    opts: &PipelineOptions,
) -> Result<PipelineReport, MomentError> {
    if f.nvars() != v.nvars() {
        return Err(crate::PolyError::NvarsMismatch { left: v.nvars(), right: f.nvars() }.into());
    }
    let mut report = finish(v, f, f, &v.generators, &v.vars, k_min, k_max, opts)?;
    report.assumptions = DIRECT_ASSUMPTIONS.iter().map(|s| s.to_string()).collect();
    Ok(report)
}

//! Problem files.
//!
//! ```json
//! {
//!   "objective": "x1",
//!   "variety": {"vars": ["x1", "x2"], "generators": ["x1^3 - x2^2"], "dimension": 1},
//!   "morphism": "cusp",
//!   "options": {"k_min": 1, "k_max": 3, "seed": 0}
//! }
//! ```
//!
//! Instead of `variety`, an `inequalities` block `{"vars", "f", "g"}` poses
//! `min f s.t. g ≥ 0`, solved through the slack transform.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_path_to_error::Segment;

use singular_sos::kktsys::{build_kkt_named, slack_transform, KKTSystem};
use singular_sos::momentsos::{pulled_back_objective, DualMode, HierarchyOptions, PipelineOptions};
use singular_sos::resolve::{MorphismInput, ResolutionMorphism};
use singular_sos::sdpcore::SolveOptions;
use singular_sos::varietylab::{VarietyDescriptor, VarietySpec};
use singular_sos::{parse, Poly};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub objective: Option<String>,
    #[serde(default)]
    pub variety: Option<VarietyDescriptor>,
    #[serde(default)]
    pub morphism: Option<MorphismInput>,
    #[serde(default)]
    pub inequalities: Option<InequalityBlock>,
    #[serde(default)]
    pub options: ProblemOptions,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityBlock {
    pub vars: Vec<String>,
    pub f: String,
    pub g: Vec<String>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemOptions {
    pub k_min: u32,
    pub k_max: u32,
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub samples: usize,
    pub sample_radius: f64,
    pub reduce_objective: bool,
    pub dual_mode: DualMode,
    pub stabilization_tol: f64,
    pub gap_tol: f64,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        let p = PipelineOptions::default();
        ProblemOptions {
            k_min: 1,
            k_max: 3,
            tol_gap: p.hierarchy.solver.tol_gap,
            tol_feas: p.hierarchy.solver.tol_feas,
            max_iter: p.hierarchy.solver.max_iter,
            seed: p.seed,
            samples: p.samples,
            sample_radius: p.sample_radius,
            reduce_objective: p.reduce_objective,
            dual_mode: p.hierarchy.dual_mode,
            stabilization_tol: p.hierarchy.stabilization_tol,
            gap_tol: p.hierarchy.gap_tol,
        }
    }
}

impl ProblemOptions {
    pub fn pipeline(&self) -> PipelineOptions {
        PipelineOptions {
            hierarchy: HierarchyOptions {
                solver: SolveOptions {
                    tol_gap: self.tol_gap,
                    tol_feas: self.tol_feas,
                    max_iter: self.max_iter,
                    seed: self.seed,
                },
                stabilization_tol: self.stabilization_tol,
                gap_tol: self.gap_tol,
                dual_mode: self.dual_mode,
                threads: None,
            },
            samples: self.samples,
            seed: self.seed,
            reduce_objective: self.reduce_objective,
            sample_radius: self.sample_radius,
            ..PipelineOptions::default()
        }
    }
}

#[derive(Debug)]
pub enum Prepared {
    Singular { v: VarietySpec, f: Poly, phi: ResolutionMorphism },
    Direct { v: VarietySpec, f: Poly },
}

impl Prepared {
    /// The variety the objective is minimized on.
    pub fn variety(&self) -> &VarietySpec {
        match self {
            Prepared::Singular { v, .. } | Prepared::Direct { v, .. } => v,
        }
    }

    /// Objective in the ring the KKT system is built over.
    pub fn objective(&self, reduce: bool) -> Result<Poly> {
        Ok(match self {
            Prepared::Singular { f, phi, .. } => pulled_back_objective(f, phi, reduce)?,
            Prepared::Direct { f, .. } => f.clone(),
        })
    }

    /// `(h₀ in the KKT ring, KKT system)`.
    pub fn kkt(&self, reduce: bool) -> Result<(Poly, KKTSystem)> {
        let h0 = self.objective(reduce)?;
        let (gens, names) = match self {
            Prepared::Singular { phi, .. } => (&phi.source.generators, &phi.source.vars),
            Prepared::Direct { v, .. } => (&v.generators, &v.vars),
        };
        let kkt = build_kkt_named(&h0, gens, names)?;
        Ok((h0.extend_ring(kkt.nvars(), 0)?, kkt))
    }
}

pub struct LoadedProblem {
    pub raw: serde_json::Value,
    pub prepared: Prepared,
    pub options: ProblemOptions,
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    let mut s = String::new();
    for seg in path.iter() {
        s.push('/');
        match seg {
            Segment::Seq { index } => s.push_str(&index.to_string()),
            Segment::Map { key } => s.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => s.push_str(variant),
            Segment::Unknown => s.push('?'),
        }
    }
    s
}

pub fn parse_problem(text: &str) -> Result<(serde_json::Value, ProblemFile)> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| anyhow!("malformed JSON: {e}"))?;
    let file: ProblemFile = serde_path_to_error::deserialize(&raw)
        .map_err(|e| anyhow!("invalid problem at {}: {}", pointer(e.path()), e.inner()))?;
    Ok((raw, file))
}

pub fn prepare(file: &ProblemFile) -> Result<Prepared> {
    match (&file.variety, &file.inequalities) {
        (Some(_), Some(_)) => bail!("give either 'variety' or 'inequalities', not both"),
        (None, None) => bail!("missing 'variety' or 'inequalities'"),
        (None, Some(ineq)) => {
            if file.morphism.is_some() {
                bail!("'morphism' requires 'variety'");
            }
            if file.objective.is_some() {
                bail!("with 'inequalities' the objective is 'inequalities/f'");
            }
            let f: Poly = parse(&ineq.f, &ineq.vars).context("/inequalities/f")?;
            let g = ineq
                .g
                .iter()
                .enumerate()
                .map(|(i, t)| parse(t, &ineq.vars).with_context(|| format!("/inequalities/g/{i}")))
                .collect::<Result<Vec<Poly>>>()?;
            let slack = slack_transform(&f, &g, &ineq.vars)?;
            let v = VarietySpec::new(slack.vars, slack.h, None)?;
            Ok(Prepared::Direct { v, f: slack.h0 })
        }
        (Some(vd), None) => {
            let v = VarietySpec::from_descriptor(vd).context("/variety")?;
            let text = file.objective.as_deref().ok_or_else(|| anyhow!("missing 'objective'"))?;
            let f: Poly = parse(text, &v.vars).context("/objective")?;
            match &file.morphism {
                None => Ok(Prepared::Direct { v, f }),
                Some(m) => {
                    let phi = ResolutionMorphism::from_input(m).context("/morphism")?;
                    if phi.target.nvars() != v.nvars() {
                        bail!("/morphism: target has {} variables, variety has {}", phi.target.nvars(), v.nvars());
                    }
                    Ok(Prepared::Singular { v, f, phi })
                }
            }
        }
    }
}

pub fn load_problem(path: &Path) -> Result<LoadedProblem> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (raw, file) = parse_problem(&text).with_context(|| path.display().to_string())?;
    let prepared = prepare(&file).with_context(|| path.display().to_string())?;
    if file.options.k_min > file.options.k_max {
        bail!("{}: options k_min > k_max", path.display());
    }
    Ok(LoadedProblem { raw, prepared, options: file.options })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_pointers() {
        let e = parse_problem(r#"{"objective": "x", "options": {"k_max": "three"}}"#).unwrap_err();
        assert!(e.to_string().contains("/options/k_max"), "{e}");
        let e = parse_problem(r#"{"objective": "x", "extra": 1}"#).unwrap_err();
        assert!(e.to_string().contains("unknown field"), "{e}");
        assert!(parse_problem("[").unwrap_err().to_string().starts_with("malformed JSON"));
    }

    #[test]
    fn exclusive_blocks() {
        let (_, f) = parse_problem(r#"{"inequalities": {"vars": ["x"], "f": "x", "g": ["1 - x^2"]}}"#).unwrap();
        let Prepared::Direct { v, f } = prepare(&f).unwrap() else { panic!("direct expected") };
        assert_eq!(v.vars.len(), 2);
        assert_eq!(f.nvars(), 2);
        let (_, f) = parse_problem(r#"{"objective": "x"}"#).unwrap();
        assert!(prepare(&f).is_err());
        let (_, f) = parse_problem(
            r#"{"objective": "x1", "variety": {"vars": ["x1"], "generators": ["x1"]}, "morphism": "cusp"}"#,
        )
        .unwrap();
        assert!(prepare(&f).unwrap_err().to_string().contains("target has 2 variables"));
    }

    #[test]
    fn default_options_follow_the_pipeline() {
        let o = ProblemOptions::default();
        let p = o.pipeline();
        assert_eq!((o.k_min, o.k_max), (1, 3));
        assert_eq!(p.hierarchy.solver.tol_gap, PipelineOptions::default().hierarchy.solver.tol_gap);
        assert_eq!(p.samples, 100);
    }
}

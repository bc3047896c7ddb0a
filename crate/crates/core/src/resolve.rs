//! Resolution morphisms `φ: W → V` as data, pullbacks along them, and
//! well-definedness checks `φ(W) ⊂ V`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polyalg::{indexed_names, parse, PolyError};
use crate::varietylab::{newton_project, VarietyDescriptor, VarietyError, VarietySpec};
use crate::Poly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Variety(#[from] VarietyError),
    #[error("unknown catalog morphism '{0}'")]
    UnknownMorphism(String),
    #[error("unknown sampler '{0}'")]
    UnknownSampler(String),
    #[error("morphism needs {expected} components, got {got}")]
    Components { expected: usize, got: usize },
    #[error("no sampler and no sample points supplied")]
    NoSamples,
}

/// Exact parameterizations of catalog source varieties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    /// `(r^2, r)` with `r ∈ [-2, 2]` on `y1 = y2^2`.
    Cusp,
    /// `(cos θ, sin θ, s)` with `s ∈ [-2, 2]` on the unit cylinder.
    LorentzCylinder,
}

impl Sampler {
    pub fn from_name(name: &str) -> Result<Self, ResolveError> {
        match name {
            "cusp" => Ok(Sampler::Cusp),
            "lorentz-cylinder" => Ok(Sampler::LorentzCylinder),
            other => Err(ResolveError::UnknownSampler(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Sampler::Cusp => "cusp",
            Sampler::LorentzCylinder => "lorentz-cylinder",
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            Sampler::Cusp => {
                let r: f64 = rng.gen_range(-2.0..=2.0);
                vec![r * r, r]
            }
            Sampler::LorentzCylinder => {
                let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let s: f64 = rng.gen_range(-2.0..=2.0);
                vec![theta.cos(), theta.sin(), s]
            }
        }
    }

    /// `count` points from seeded per-sample substreams.
    pub fn samples(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        (0..count)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                self.sample(&mut rng)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionMorphism {
    pub name: Option<String>,
    pub source: VarietySpec,
    pub target: VarietySpec,
    pub components: Vec<Poly>,
    pub sampler: Option<Sampler>,
}

/// JSON form: `{"source": <variety>, "target": <variety>, "components": [...], "sampler": "name-or-null"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDescriptor {
    pub source: VarietyDescriptor,
    pub target: VarietyDescriptor,
    pub components: Vec<String>,
    #[serde(default)]
    pub sampler: Option<String>,
}

/// A morphism given either by catalog name or in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MorphismInput {
    Catalog(String),
    Descriptor(MorphismDescriptor),
}

impl ResolutionMorphism {
    pub fn new(
        source: VarietySpec,
        target: VarietySpec,
        components: Vec<Poly>,
        sampler: Option<Sampler>,
    ) -> Result<Self, ResolveError> {
        if components.len() != target.nvars() {
            return Err(ResolveError::Components { expected: target.nvars(), got: components.len() });
        }
        for c in &components {
            if c.nvars() != source.nvars() {
                return Err(PolyError::NvarsMismatch { left: source.nvars(), right: c.nvars() }.into());
            }
        }
        Ok(ResolutionMorphism { name: None, source, target, components, sampler })
    }

    pub fn from_descriptor(d: &MorphismDescriptor) -> Result<Self, ResolveError> {
        let source = VarietySpec::from_descriptor(&d.source)?;
        let target = VarietySpec::from_descriptor(&d.target)?;
        let components = d.components.iter().map(|c| parse(c, &source.vars)).collect::<Result<Vec<_>, _>>()?;
        let sampler = d.sampler.as_deref().map(Sampler::from_name).transpose()?;
        Self::new(source, target, components, sampler)
    }

    pub fn from_input(input: &MorphismInput) -> Result<Self, ResolveError> {
        match input {
            MorphismInput::Catalog(name) => catalog(name),
            MorphismInput::Descriptor(d) => Self::from_descriptor(d),
        }
    }

    pub fn to_descriptor(&self) -> MorphismDescriptor {
        MorphismDescriptor {
            source: self.source.to_descriptor(),
            target: self.target.to_descriptor(),
            components: self.components.iter().map(|c| c.to_text(&self.source.vars)).collect(),
            sampler: self.sampler.map(|s| s.name().to_string()),
        }
    }

    /// `φ(w)` at a source point.
    pub fn apply(&self, w: &[f64]) -> Result<Vec<f64>, ResolveError> {
        self.components.iter().map(|c| c.evaluate_f64(w).map_err(Into::into)).collect()
    }
}

fn y_names(n: usize) -> Vec<String> {
    indexed_names("y", n)
}

fn x_names(n: usize) -> Vec<String> {
    indexed_names("x", n)
}

#[allow(clippy::too_many_arguments)]
fn build(
    name: &str,
    t: usize,
    w_gens: &[&str],
    w_dim: usize,
    n: usize,
    v_gens: &[&str],
    v_dim: usize,
    phi: &[&str],
    sampler: Sampler,
) -> ResolutionMorphism {
    let ys = y_names(t);
    let xs = x_names(n);
    let ys_ref: Vec<&str> = ys.iter().map(String::as_str).collect();
    let xs_ref: Vec<&str> = xs.iter().map(String::as_str).collect();
    let source = VarietySpec::parse(&ys_ref, w_gens, Some(w_dim)).expect("catalog parses");
    let target = VarietySpec::parse(&xs_ref, v_gens, Some(v_dim)).expect("catalog parses");
    let comps = phi.iter().map(|c| parse(c, &ys).expect("catalog parses")).collect();
    let mut m = ResolutionMorphism::new(source, target, comps, Some(sampler)).expect("catalog is consistent");
    m.name = Some(name.to_string());
    m
}

/// Catalog of worked resolutions: `"cusp"` and `"lorentz-cylinder"`.
pub fn catalog(name: &str) -> Result<ResolutionMorphism, ResolveError> {
    match name {
        "cusp" => Ok(build("cusp", 2, &["y1 - y2^2"], 1, 2, &["x1^3 - x2^2"], 1, &["y1", "y1*y2"], Sampler::Cusp)),
        "lorentz-cylinder" => Ok(build(
            "lorentz-cylinder",
            3,
            &["y1^2 + y2^2 - 1"],
            2,
            3,
            &["x1^2 + x2^2 - x3^2"],
            2,
            &["y1*y3", "y2*y3", "y3"],
            Sampler::LorentzCylinder,
        )),
        other => Err(ResolveError::UnknownMorphism(other.to_string())),
    }
}

pub const CATALOG_NAMES: [&str; 2] = ["cusp", "lorentz-cylinder"];

/// `f ∘ φ`.
pub fn pullback(f: &Poly, phi: &ResolutionMorphism) -> Result<Poly, ResolveError> {
    Ok(f.compose(&phi.components)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivisionCertificate {
    pub target_generator: usize,
    /// `Some(q)` when `p ∘ φ = q · h_W` exactly.
    pub quotient: Option<Poly>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WelldefinedReport {
    pub samples: usize,
    pub max_violation: f64,
    pub pass: bool,
    /// Attempted only when the source has a single generator.
    pub symbolic: Vec<DivisionCertificate>,
}

impl WelldefinedReport {
    pub fn symbolic_pass(&self) -> bool {
        !self.symbolic.is_empty() && self.symbolic.iter().all(|c| c.quotient.is_some())
    }
}

/// Sample `W` with the morphism's sampler and check `φ(W) ⊂ V`.
pub fn check_welldefined(
    phi: &ResolutionMorphism,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<WelldefinedReport, ResolveError> {
    let sampler = phi.sampler.ok_or(ResolveError::NoSamples)?;
    check_welldefined_on(phi, &sampler.samples(samples, seed), tol)
}

/// As [`check_welldefined`] on caller-supplied source points.
pub fn check_welldefined_on(
    phi: &ResolutionMorphism,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<WelldefinedReport, ResolveError> {
    if points.is_empty() {
        return Err(ResolveError::NoSamples);
    }
    let mut max_violation = 0.0f64;
    let mut used = 0;
    for w in points {
        let w = if phi.source.max_residual(w)? <= 1e-12 {
            w.clone()
        } else {
            match newton_project(&phi.source, w, 50, 1e-12)? {
                Some(p) => p,
                None => continue,
            }
        };
        let x = phi.apply(&w)?;
        max_violation = max_violation.max(phi.target.max_residual(&x)?);
        used += 1;
    }
    Ok(WelldefinedReport {
        samples: used,
        max_violation,
        pass: used > 0 && max_violation <= tol,
        symbolic: symbolic_check(phi)?,
    })
}

fn symbolic_check(phi: &ResolutionMorphism) -> Result<Vec<DivisionCertificate>, ResolveError> {
    let [hw] = phi.source.generators.as_slice() else {
        return Ok(Vec::new());
    };
    if hw.is_zero() {
        return Ok(Vec::new());
    }
    phi.target
        .generators
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let pulled = p.compose(&phi.components)?;
            let (q, r) = pulled.divide(hw)?;
            Ok(DivisionCertificate { target_generator: i, quotient: r.is_zero().then_some(q) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str, vars: &[String]) -> Poly {
        parse(text, vars).unwrap()
    }

    #[test]
    fn catalog_entries() {
        let c = catalog("cusp").unwrap();
        let y = y_names(2);
        assert_eq!(c.components, vec![p("y1", &y), p("y1*y2", &y)]);
        let l = catalog("lorentz-cylinder").unwrap();
        let y3 = y_names(3);
        assert_eq!(l.components, vec![p("y1*y3", &y3), p("y2*y3", &y3), p("y3", &y3)]);
        assert_eq!(catalog("blowup"), Err(ResolveError::UnknownMorphism("blowup".into())));
    }

    #[test]
    fn pullbacks() {
        let c = catalog("cusp").unwrap();
        let x = x_names(2);
        assert_eq!(pullback(&p("x1", &x), &c).unwrap(), p("y1", &y_names(2)));
        assert_eq!(pullback(&p("5/3", &x), &c).unwrap(), p("5/3", &y_names(2)));
        let l = catalog("lorentz-cylinder").unwrap();
        let y = y_names(3);
        let f = pullback(&p("x1^2 + x2^2 + x3^2", &x_names(3)), &l).unwrap();
        assert_eq!(f, p("y3^2*(y1^2 + y2^2) + y3^2", &y));
        // ≡ 2 y3^2 modulo the cylinder
        let (_, r) = (&f - &p("2*y3^2", &y)).divide(&l.source.generators[0]).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn cusp_identity_is_exact() {
        let c = catalog("cusp").unwrap();
        let y = y_names(2);
        let pulled = pullback(&c.target.generators[0], &c).unwrap();
        let rhs = &p("y1^2", &y) * &c.source.generators[0];
        assert!((&pulled - &rhs).is_zero());
    }

    #[test]
    fn welldefined_catalog() {
        for name in CATALOG_NAMES {
            let m = catalog(name).unwrap();
            let r = check_welldefined(&m, 200, 0, 1e-9).unwrap();
            assert!(r.pass, "{name}: {r:?}");
            assert_eq!(r.samples, 200);
            assert!(r.symbolic_pass());
        }
        let c = catalog("cusp").unwrap();
        let r = check_welldefined(&c, 10, 3, 1e-9).unwrap();
        assert_eq!(r.symbolic[0].quotient, Some(p("y1^2", &y_names(2))));
    }

    #[test]
    fn welldefined_failure() {
        let src = VarietySpec::parse(&["y1"], &["0"], Some(1)).unwrap();
        let tgt = VarietySpec::parse(&["x1", "x2"], &["x1 - x2 - 1"], Some(1)).unwrap();
        let y = y_names(1);
        let m = ResolutionMorphism::new(src, tgt, vec![p("y1", &y), p("y1", &y)], None).unwrap();
        assert_eq!(check_welldefined(&m, 5, 0, 1e-9), Err(ResolveError::NoSamples));
        let r = check_welldefined_on(&m, &[vec![0.3], vec![-2.0]], 1e-9).unwrap();
        assert!(!r.pass);
        assert_eq!(r.max_violation, 1.0);
    }

    #[test]
    fn degree_bound_and_associativity() {
        let l = catalog("lorentz-cylinder").unwrap();
        let x = x_names(3);
        for f in ["x1^3 - x2*x3", "x1^2*x2^2 + x3", "x3^4"] {
            let fp = p(f, &x);
            assert!(pullback(&fp, &l).unwrap().degree() <= fp.degree() * 2);
        }
        // (f ∘ φ) ∘ ψ = f ∘ (φ ∘ ψ)
        let c = catalog("cusp").unwrap();
        let y = y_names(2);
        let psi = vec![p("y1 + y2^2", &y), p("y2 - y1", &y)];
        let f = p("x1^3 - 2*x1*x2 + x2^2", &x_names(2));
        let lhs = pullback(&f, &c).unwrap().compose(&psi).unwrap();
        let composed: Vec<Poly> = c.components.iter().map(|comp| comp.compose(&psi).unwrap()).collect();
        assert_eq!(lhs, f.compose(&composed).unwrap());
    }

    #[test]
    fn descriptor_roundtrip() {
        let m = catalog("lorentz-cylinder").unwrap();
        let d = m.to_descriptor();
        let json = serde_json::to_string(&MorphismInput::Descriptor(d)).unwrap();
        let back: MorphismInput = serde_json::from_str(&json).unwrap();
        let m2 = ResolutionMorphism::from_input(&back).unwrap();
        assert_eq!(m2.components, m.components);
        assert_eq!(m2.sampler, m.sampler);
        let by_name: MorphismInput = serde_json::from_str("\"cusp\"").unwrap();
        assert_eq!(ResolutionMorphism::from_input(&by_name).unwrap().name.as_deref(), Some("cusp"));
    }
}

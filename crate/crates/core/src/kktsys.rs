//! The Karush–Kuhn–Tucker system in variables `(x, λ)` and the slack
//! transform for inequality constraints.

use thiserror::Error;

use crate::polyalg::{default_names, indexed_names, PolyError};
use crate::varietylab::{VarietyError, VarietySpec};
use crate::Poly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KktError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("slack transform needs at least one constraint")]
    NoConstraints,
    #[error("expected {expected} names, got {got}")]
    Names { expected: usize, got: usize },
}

/// `(h_1..h_l, ∇h0 − Σ λ_j ∇h_j)` over `n + l` variables, multipliers last.
#[derive(Debug, Clone, PartialEq)]
pub struct KKTSystem {
    pub n: usize,
    pub l: usize,
    pub vars: Vec<String>,
    pub polynomials: Vec<Poly>,
}

impl KKTSystem {
    pub fn nvars(&self) -> usize {
        self.n + self.l
    }

    pub fn generators(&self) -> &[Poly] {
        &self.polynomials[..self.l]
    }

    pub fn stationarity(&self) -> &[Poly] {
        &self.polynomials[self.l..]
    }

    pub fn to_variety(&self) -> VarietySpec {
        VarietySpec::new(self.vars.clone(), self.polynomials.clone(), None).expect("consistent rings")
    }

    /// `max |p(x, λ)|` over all system polynomials.
    pub fn residual(&self, x: &[f64], lambda: &[f64]) -> Result<f64, VarietyError> {
        if x.len() != self.n || lambda.len() != self.l {
            return Err(VarietyError::Dimension { expected: self.nvars(), got: x.len() + lambda.len() });
        }
        let pt: Vec<f64> = x.iter().chain(lambda).copied().collect();
        self.to_variety().max_residual(&pt)
    }

    /// Print one polynomial per line in canonical text.
    pub fn to_text(&self) -> Vec<String> {
        self.polynomials.iter().map(|p| p.to_text(&self.vars)).collect()
    }
}

/// Multiplier names `λ1..λl`.
pub fn multiplier_names(l: usize) -> Vec<String> {
    indexed_names("λ", l)
}

pub fn build_kkt(h0: &Poly, h: &[Poly]) -> Result<KKTSystem, KktError> {
    build_kkt_named(h0, h, &default_names(h0.nvars()))
}

/// As [`build_kkt`], with names for the `x` variables.
pub fn build_kkt_named(h0: &Poly, h: &[Poly], names: &[String]) -> Result<KKTSystem, KktError> {
    let n = h0.nvars();
    if names.len() != n {
        return Err(KktError::Names { expected: n, got: names.len() });
    }
    for g in h {
        if g.nvars() != n {
            return Err(PolyError::NvarsMismatch { left: n, right: g.nvars() }.into());
        }
    }
    let l = h.len();
    let total = n + l;
    let mut polys = Vec::with_capacity(l + n);
    for g in h {
        polys.push(g.extend_ring(total, 0)?);
    }
    let lambdas: Vec<Poly> = (0..l).map(|j| Poly::var(total, n + j)).collect::<Result<_, _>>()?;
    for t in 0..n {
        let mut s = h0.differentiate(t)?.extend_ring(total, 0)?;
        for (j, g) in h.iter().enumerate() {
            let dg = g.differentiate(t)?.extend_ring(total, 0)?;
            s = &s - &(&lambdas[j] * &dg);
        }
        polys.push(s);
    }
    let mut vars = names.to_vec();
    vars.extend(multiplier_names(l));
    Ok(KKTSystem { n, l, vars, polynomials: polys })
}

/// `max |p(x, λ)|` over the system.
pub fn kkt_residual(sys: &KKTSystem, x: &[f64], lambda: &[f64]) -> Result<f64, VarietyError> {
    sys.residual(x, lambda)
}

/// An equality-constrained problem produced by the slack transform.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackProblem {
    pub vars: Vec<String>,
    pub h0: Poly,
    pub h: Vec<Poly>,
}

/// `min f(y) s.t. g(y) ≥ 0` becomes `min f(y) s.t. g_j(y) − z_j^2 = 0` over
/// `(y, z)`.
pub fn slack_transform(f: &Poly, g: &[Poly], names: &[String]) -> Result<SlackProblem, KktError> {
    if g.is_empty() {
        return Err(KktError::NoConstraints);
    }
    let r = f.nvars();
    if names.len() != r {
        return Err(KktError::Names { expected: r, got: names.len() });
    }
    let m = g.len();
    let total = r + m;
    let h0 = f.extend_ring(total, 0)?;
    let mut h = Vec::with_capacity(m);
    for (j, gj) in g.iter().enumerate() {
        if gj.nvars() != r {
            return Err(PolyError::NvarsMismatch { left: r, right: gj.nvars() }.into());
        }
        let z = Poly::var(total, r + j)?;
        h.push(&gj.extend_ring(total, 0)? - &(&z * &z));
    }
    let mut vars = names.to_vec();
    vars.extend(indexed_names("z", m));
    Ok(SlackProblem { vars, h0, h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn p(text: &str, v: &[&str]) -> Poly {
        parse(text, &names(v)).unwrap()
    }

    #[test]
    fn resolved_cusp_system() {
        let y = ["y1", "y2"];
        let sys = build_kkt_named(&p("y1", &y), &[p("y1 - y2^2", &y)], &names(&y)).unwrap();
        let ext = ["y1", "y2", "λ1"];
        assert_eq!(sys.vars, names(&ext));
        assert_eq!(sys.polynomials, vec![p("y1 - y2^2", &ext), p("1 - λ1", &ext), p("2*λ1*y2", &ext)]);
        assert_eq!(kkt_residual(&sys, &[0.0, 0.0], &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn unresolved_cusp_system() {
        let x = ["x1", "x2"];
        let sys = build_kkt(&p("x1", &x), &[p("x1^3 - x2^2", &x)]).unwrap();
        let ext = ["x1", "x2", "λ1"];
        assert_eq!(sys.polynomials, vec![p("x1^3 - x2^2", &ext), p("1 - 3*λ1*x1^2", &ext), p("2*λ1*x2", &ext)]);
        for lam in [-3.0, 0.0, 0.5, 10.0] {
            assert_eq!(kkt_residual(&sys, &[0.0, 0.0], &[lam]).unwrap(), 1.0);
        }
        assert!(kkt_residual(&sys, &[0.3, 0.7], &[2.0]).unwrap() > 0.0);
    }

    #[test]
    fn gradient_case() {
        let x = ["x1", "x2"];
        let h0 = p("x1^3*x2 + x2^2", &x);
        let sys = build_kkt(&h0, &[]).unwrap();
        assert_eq!(sys.l, 0);
        assert_eq!(sys.polynomials, h0.gradient());
    }

    #[test]
    fn zero_generator_is_accepted() {
        let x = ["x1", "x2"];
        let h0 = p("(x1*x2 - 1)^2 + x1^2", &x);
        let sys = build_kkt(&h0, &[Poly::zero(2)]).unwrap();
        assert_eq!(sys.nvars(), 3);
        assert!(sys.polynomials[0].is_zero());
        let grad: Vec<Poly> = h0.gradient().iter().map(|g| g.extend_ring(3, 0).unwrap()).collect();
        assert_eq!(sys.stationarity(), &grad[..]);
    }

    #[test]
    fn paraboloid_minimizer_satisfies_kkt() {
        let x = ["x1", "x2", "x3"];
        let sys = build_kkt(&p("x1^2 + x2^2", &x), &[p("x3 - x1^2 - x2^2", &x)]).unwrap();
        // ∇h0 = (2x1, 2x2, 0) = λ (−2x1, −2x2, 1) at the origin gives λ = 0
        assert!(kkt_residual(&sys, &[0.0, 0.0, 0.0], &[0.0]).unwrap() <= 1e-12);
    }

    #[test]
    fn degree_bound() {
        let x = ["x1", "x2", "x3"];
        let cases = [
            ("x1", vec!["x1^3 - x2^2"]),
            ("x1^2 + x2^2 + x3^2", vec!["x1^2 + x2^2 - x3^2"]),
            ("x1^4*x2", vec!["x1 - x3", "x2^3*x3"]),
        ];
        for (f, gs) in cases {
            let h0 = p(f, &x);
            let h: Vec<Poly> = gs.iter().map(|g| p(g, &x)).collect();
            let bound = h0.degree().max(1 + h.iter().map(|g| g.degree()).max().unwrap());
            let sys = build_kkt(&h0, &h).unwrap();
            assert_eq!(sys.polynomials.len(), h.len() + 3);
            assert!(sys.polynomials.iter().all(|q| q.degree() <= bound));
        }
    }

    #[test]
    fn slack() {
        let y = ["y1"];
        let sp = slack_transform(&p("y1", &y), &[p("1 - y1^2", &y)], &names(&y)).unwrap();
        assert_eq!(sp.vars, names(&["y1", "z1"]));
        assert_eq!(sp.h, vec![p("1 - y1^2 - z1^2", &["y1", "z1"])]);
        assert_eq!(sp.h0, p("y1", &["y1", "z1"]));

        let sp = slack_transform(&p("y1", &y), &[Poly::zero(1)], &names(&y)).unwrap();
        assert_eq!(sp.h, vec![p("-z1^2", &["y1", "z1"])]);

        let y2 = ["y1", "y2"];
        let sp = slack_transform(&p("y1 + y2", &y2), &[p("y1", &y2), p("y2", &y2)], &names(&y2)).unwrap();
        let ext = ["y1", "y2", "z1", "z2"];
        assert_eq!(sp.h, vec![p("y1 - z1^2", &ext), p("y2 - z2^2", &ext)]);

        assert_eq!(slack_transform(&p("y1", &y), &[], &names(&y)), Err(KktError::NoConstraints));
    }
}

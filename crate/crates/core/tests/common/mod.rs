#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use singular_sos::fixtures;
use singular_sos::kktsys::{build_kkt_named, slack_transform, KKTSystem};
use singular_sos::momentsos::{pulled_back_objective, solve_direct, solve_singular, PipelineOptions, PipelineReport};
use singular_sos::resolve::catalog;
use singular_sos::varietylab::VarietySpec;
use singular_sos::{parse, Poly};

pub fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A solved fixture with the data needed to re-check it.
pub struct Solved {
    pub name: &'static str,
    pub report: PipelineReport,
    /// Objective in the KKT ring.
    pub h0: Poly,
    pub kkt: KKTSystem,
}

fn kkt_of(h0: &Poly, gens: &[Poly], vars: &[String]) -> (Poly, KKTSystem) {
    let kkt = build_kkt_named(h0, gens, vars).unwrap();
    (h0.extend_ring(kkt.nvars(), 0).unwrap(), kkt)
}

/// `min x1` on the cusp through its resolution.
pub fn cusp_resolved(k_min: u32, k_max: u32) -> Solved {
    let v = fixtures::cusp();
    let f: Poly = parse("x1", &v.vars).unwrap();
    let phi = catalog("cusp").unwrap();
    let opts = PipelineOptions::default();
    let report = solve_singular(&v, &f, &phi, k_min, k_max, &opts).unwrap();
    let h0 = pulled_back_objective(&f, &phi, opts.reduce_objective).unwrap();
    let (h0, kkt) = kkt_of(&h0, &phi.source.generators, &phi.source.vars);
    Solved { name: "cusp-resolved", report, h0, kkt }
}

/// `min x1` on the cusp with its own KKT system.
pub fn cusp_unresolved(k_min: u32, k_max: u32) -> Solved {
    let v = fixtures::cusp();
    let f: Poly = parse("x1", &v.vars).unwrap();
    let report = solve_direct(&v, &f, k_min, k_max, &PipelineOptions::default()).unwrap();
    let (h0, kkt) = kkt_of(&f, &v.generators, &v.vars);
    Solved { name: "cusp-unresolved", report, h0, kkt }
}

/// `min (x1 x2 − 1)² + x1²` on the plane, written with the zero generator.
pub fn non_attained(k_min: u32, k_max: u32) -> Solved {
    let v = VarietySpec::parse(&["x1", "x2"], &["0"], Some(2)).unwrap();
    let f: Poly = parse("(x1*x2 - 1)^2 + x1^2", &v.vars).unwrap();
    let report = solve_direct(&v, &f, k_min, k_max, &PipelineOptions::default()).unwrap();
    let (h0, kkt) = kkt_of(&f, &v.generators, &v.vars);
    Solved { name: "non-attained", report, h0, kkt }
}

/// `min x1² + x2² + x3²` on the Lorentz cone through the cylinder.
pub fn lorentz(k_min: u32, k_max: u32) -> Solved {
    let v = fixtures::lorentz_cone();
    let f: Poly = parse("x1^2 + x2^2 + x3^2", &v.vars).unwrap();
    let phi = catalog("lorentz-cylinder").unwrap();
    let opts = PipelineOptions::default();
    let report = solve_singular(&v, &f, &phi, k_min, k_max, &opts).unwrap();
    let h0 = pulled_back_objective(&f, &phi, opts.reduce_objective).unwrap();
    let (h0, kkt) = kkt_of(&h0, &phi.source.generators, &phi.source.vars);
    Solved { name: "lorentz", report, h0, kkt }
}

/// `min x s.t. 1 − x² ≥ 0` through the slack transform.
pub fn disk(k_min: u32, k_max: u32) -> Solved {
    let x = names(&["x"]);
    let f: Poly = parse("x", &x).unwrap();
    let g: Poly = parse("1 - x^2", &x).unwrap();
    let s = slack_transform(&f, &[g], &x).unwrap();
    let v = VarietySpec::new(s.vars.clone(), s.h.clone(), None).unwrap();
    let report = solve_direct(&v, &s.h0, k_min, k_max, &PipelineOptions::default()).unwrap();
    let (h0, kkt) = kkt_of(&s.h0, &s.h, &s.vars);
    Solved { name: "disk", report, h0, kkt }
}

/// Fixtures whose hierarchy has optimal orders.
pub fn solvable() -> Vec<Solved> {
    vec![cusp_resolved(1, 3), lorentz(1, 2), non_attained(2, 4), disk(1, 3)]
}

//! Named test varieties and exact parameterizations of their regular parts.

use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::varietylab::VarietySpec;

const XYZ: [&str; 3] = ["x1", "x2", "x3"];

fn spec(n: usize, gens: &[&str], dim: usize) -> VarietySpec {
    VarietySpec::parse(&XYZ[..n], gens, Some(dim)).expect("fixture parses")
}

/// Cuspidal curve `x1^3 = x2^2`.
pub fn cusp() -> VarietySpec {
    spec(2, &["x1^3 - x2^2"], 1)
}

/// Whitney umbrella `x1^2 = x2^2 x3`.
pub fn whitney() -> VarietySpec {
    spec(3, &["x1^2 - x2^2*x3"], 2)
}

/// Cartan umbrella `x3 (x1^2 + x2^2) = x1^3`.
pub fn cartan() -> VarietySpec {
    spec(3, &["x3*(x1^2 + x2^2) - x1^3"], 2)
}

/// Umbrella variant `x1^2 = x3^2 (x3 + x2^2)`.
pub fn modified_umbrella() -> VarietySpec {
    spec(3, &["x1^2 - x3^2*(x3 + x2^2)"], 2)
}

/// Lorentz cone `x1^2 + x2^2 = x3^2`.
pub fn lorentz_cone() -> VarietySpec {
    spec(3, &["x1^2 + x2^2 - x3^2"], 2)
}

/// Paraboloid `x3 = x1^2 + x2^2`.
pub fn paraboloid() -> VarietySpec {
    spec(3, &["x3 - x1^2 - x2^2"], 2)
}

/// Nonzero rational `p/q` with `|p| ≤ 40`, `1 ≤ q ≤ 20`.
pub fn random_nonzero_rational(rng: &mut ChaCha8Rng) -> BigRational {
    loop {
        let p: i64 = rng.gen_range(-40..=40);
        if p != 0 {
            let q: i64 = rng.gen_range(1..=20);
            return BigRational::new(p.into(), q.into());
        }
    }
}

/// `(t^2, t^3)`, `t ≠ 0`.
pub fn cusp_regular_point(rng: &mut ChaCha8Rng) -> Vec<BigRational> {
    let t = random_nonzero_rational(rng);
    let t2 = &t * &t;
    vec![t2.clone(), &t2 * &t]
}

/// `(uv, v, u^2)`, `u, v ≠ 0`.
pub fn whitney_regular_point(rng: &mut ChaCha8Rng) -> Vec<BigRational> {
    let u = random_nonzero_rational(rng);
    let v = random_nonzero_rational(rng);
    vec![&u * &v, v, &u * &u]
}

/// `(a, b, a^3/(a^2 + b^2))`, `a, b ≠ 0`.
pub fn cartan_regular_point(rng: &mut ChaCha8Rng) -> Vec<BigRational> {
    let a = random_nonzero_rational(rng);
    let b = random_nonzero_rational(rng);
    let x3 = &(&a * &a) * &a / (&a * &a + &b * &b);
    vec![a, b, x3]
}

pub fn to_f64(point: &[BigRational]) -> Vec<f64> {
    use crate::scalar::Coefficient;
    point.iter().map(Coefficient::to_f64).collect()
}

//! Lagrange interpolation through the values of `h₀` on a variety with
//! finite image.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::MomentError;
use crate::Poly;

/// `p_j = Π_{i≠j} (h₀ − t_i) / (t_j − t_i)`, so `p_j = δ_ji` where `h₀ = t_i`.
pub fn lagrange_basis(h0: &Poly, values: &[BigRational]) -> Result<Vec<Poly>, MomentError> {
    check_values(values)?;
    let n = h0.nvars();
    Ok(values
        .iter()
        .enumerate()
        .map(|(j, tj)| {
            let mut p = Poly::one(n);
            for (i, ti) in values.iter().enumerate() {
                if i != j {
                    let factor =
                        (h0 - &Poly::constant(n, ti.clone())).scale(&(BigRational::from_integer(1.into()) / (tj - ti)));
                    p = &p * &factor;
                }
            }
            p
        })
        .collect())
}

/// `σ = Σ t_i p_i²`, a sum of squares agreeing with `h₀` wherever `h₀`
/// takes one of the values.
pub fn lagrange_sigma(h0: &Poly, values: &[BigRational]) -> Result<Poly, MomentError> {
    let basis = lagrange_basis(h0, values)?;
    let mut sigma = Poly::zero(h0.nvars());
    for (t, p) in values.iter().zip(&basis) {
        sigma = &sigma + &(p * p).scale(t);
    }
    Ok(sigma)
}

fn check_values(values: &[BigRational]) -> Result<(), MomentError> {
    if values.is_empty() {
        return Err(MomentError::NoValues);
    }
    if let Some(t) = values.iter().find(|t| t.is_negative()) {
        return Err(MomentError::NegativeValue(t.to_string()));
    }
    for (i, a) in values.iter().enumerate() {
        if values[i + 1..].iter().any(|b| (a - b).is_zero()) {
            return Err(MomentError::DuplicateValue);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn two_values() {
        let x = vec!["x".to_string()];
        let h0: Poly = parse("x + 1", &x).unwrap();
        let sigma = lagrange_sigma(&h0, &[q(0), q(2)]).unwrap();
        assert_eq!(sigma, parse("1/2*x^2 + x + 1/2", &x).unwrap());
        for z in [q(1), q(-1)] {
            let d = &h0 - &sigma;
            assert!(d.evaluate(&[z]).unwrap().is_zero());
        }
    }

    #[test]
    fn single_value() {
        let x = vec!["x".to_string()];
        let h0: Poly = parse("x^3", &x).unwrap();
        assert_eq!(lagrange_sigma(&h0, &[q(5)]).unwrap(), Poly::constant(1, q(5)));
    }

    #[test]
    fn rejects_bad_values() {
        let h0 = Poly::one(1);
        assert_eq!(lagrange_sigma(&h0, &[]), Err(MomentError::NoValues));
        assert_eq!(lagrange_sigma(&h0, &[q(1), q(1)]), Err(MomentError::DuplicateValue));
        assert!(matches!(lagrange_sigma(&h0, &[q(-1)]), Err(MomentError::NegativeValue(_))));
    }

    #[test]
    fn interpolation_property() {
        let x = vec!["x".to_string(), "y".to_string()];
        let h0: Poly = parse("x^2 + y", &x).unwrap();
        let values = [q(0), q(1), q(3)];
        let basis = lagrange_basis(&h0, &values).unwrap();
        let points = [[q(0), q(0)], [q(1), q(0)], [q(1), q(2)]];
        for (i, z) in points.iter().enumerate() {
            for (j, p) in basis.iter().enumerate() {
                let v = p.evaluate(z).unwrap();
                assert_eq!(v, if i == j { q(1) } else { q(0) });
            }
        }
    }
}

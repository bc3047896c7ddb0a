//! Exact sparse multivariate polynomial arithmetic.

mod monomial;
mod parse;
mod polynomial;

pub use monomial::{default_names, Monomial};
pub use parse::parse;
pub use polynomial::Polynomial;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown variable '{name}' at byte {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("polynomial rings differ: {left} vs {right} variables")]
    NvarsMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range for {nvars} variables")]
    VarIndexOutOfRange { index: usize, nvars: usize },
    #[error("substitution needs {expected} components, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("point has {got} coordinates, ring has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot embed {nvars} variables at offset {offset} into {new_nvars}")]
    ExtendOutOfBounds { nvars: usize, new_nvars: usize, offset: usize },
    #[error("division by the zero polynomial")]
    DivisionByZero,
}

/// Variable names `prefix1..prefixN`.
pub fn indexed_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}


#[cfg(test)]
mod proptests {
    use super::*;
    use crate::Poly;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn small_poly(nvars: usize, max_deg: u32) -> impl Strategy<Value = Poly> {
        let term = (proptest::collection::vec(0..=max_deg, nvars), -5i64..=5, 1i64..=3);
        proptest::collection::vec(term, 0..5).prop_map(move |terms| {
            Poly::from_terms(
                nvars,
                terms
                    .into_iter()
                    .filter(|(e, _, _)| e.iter().sum::<u32>() <= max_deg)
                    .map(|(e, a, b)| (Monomial::new(e), BigRational::new(BigInt::from(a), BigInt::from(b)))),
            )
        })
    }

    fn rational() -> impl Strategy<Value = BigRational> {
        (-9i64..=9, 1i64..=4).prop_map(|(a, b)| BigRational::new(a.into(), b.into()))
    }

    proptest! {
        #[test]
        fn ring_laws(a in small_poly(3, 3), b in small_poly(3, 3), c in small_poly(3, 3)) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a + &b, &b + &a);
        }

        #[test]
        fn chain_rule(
            p in small_poly(2, 3),
            phi0 in small_poly(3, 2),
            phi1 in small_poly(3, 2),
            k in 0usize..3,
        ) {
            let phi = vec![phi0, phi1];
            let lhs = p.compose(&phi).unwrap().differentiate(k).unwrap();
            let mut rhs = Poly::zero(3);
            for i in 0..2 {
                let outer = p.differentiate(i).unwrap().compose(&phi).unwrap();
                rhs = &rhs + &(&outer * &phi[i].differentiate(k).unwrap());
            }
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn evaluate_commutes_with_compose(
            p in small_poly(2, 3),
            phi0 in small_poly(2, 2),
            phi1 in small_poly(2, 2),
            y in proptest::collection::vec(rational(), 2),
        ) {
            let phi = vec![phi0, phi1];
            let inner: Vec<BigRational> = phi.iter().map(|f| f.evaluate(&y).unwrap()).collect();
            let direct = p.compose(&phi).unwrap().evaluate(&y).unwrap();
            prop_assert_eq!(direct, p.evaluate(&inner).unwrap());
        }

        #[test]
        fn print_parse_roundtrip(a in small_poly(3, 4)) {
            let names = default_names(3);
            let text = a.to_text(&names);
            let back: Poly = parse(&text, &names).unwrap();
            prop_assert_eq!(&back, &a);
            prop_assert_eq!(back.to_text(&names), text);
        }
    }
}

//! Built-in example representations.

use crate::linrep::{LinearRepresentation, Mode};
use crate::matrix::ExactMatrix;
use crate::scalar::Scalar;

/// Binary sum of digits: `v(n) = (s(n), 1)`.
pub fn binary_sum_of_digits() -> LinearRepresentation {
    LinearRepresentation::try_new(
        2,
        vec![
            ExactMatrix::identity(2),
            ExactMatrix::from_i64_rows(&[&[1, 1], &[0, 1]]),
        ],
        vec![Scalar::zero(), Scalar::one()],
        None,
        Mode::Sequence,
    )
    .expect("built-in representation is valid")
}

/// The constant sequence `x(n) = 1`; its Dirichlet series is `ζ(s)`.
pub fn constant_one() -> LinearRepresentation {
    LinearRepresentation::try_new(
        2,
        vec![ExactMatrix::identity(1), ExactMatrix::identity(1)],
        vec![Scalar::one()],
        None,
        Mode::Sequence,
    )
    .expect("built-in representation is valid")
}

/// Names of the built-in examples.
pub const NAMES: [&str; 4] = [
    "binary-sum-of-digits",
    "pascal-rhombus",
    "identity-transducer",
    "constant-one",
];

/// A built-in example by name; transducers are embedded.
pub fn lookup(name: &str) -> Option<LinearRepresentation> {
    match name {
        "binary-sum-of-digits" => Some(binary_sum_of_digits()),
        "pascal-rhombus" => Some(crate::pascal::representation()),
        "identity-transducer" => Some(crate::transducer::identity_transducer().to_linear_representation()),
        "constant-one" => Some(constant_one()),
        _ => None,
    }
}

/// A built-in transducer by name.
pub fn lookup_transducer(name: &str) -> Option<crate::transducer::Transducer> {
    match name {
        "identity-transducer" => Some(crate::transducer::identity_transducer()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_validates() {
        for name in NAMES {
            let rep = lookup(name).unwrap();
            assert!(rep.validate().is_empty(), "{name}");
        }
        assert!(lookup("nope").is_none());
    }
}

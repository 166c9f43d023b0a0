//! q-linear representations: exact evaluation and summation.
//!
//! A representation consists of square matrices `A_0, …, A_{q-1}`, an initial
//! vector `v(0)` and an output functional `e`. The associated matrix sequence
//! is `f(n) = A_{r_0} A_{r_1} ⋯ A_{r_{ℓ-1}}` where `r_{ℓ-1} … r_0` is the q-ary
//! expansion of `n`, so the least significant digit contributes the leftmost
//! factor. (Some references use the reversed product order.) The sequence
//! itself is `x(n) = e · f(n) · v(0)`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matrix::{exact_to_cvector, max_row_sum, CMatrix, CVector, ExactMatrix};
use crate::scalar::Scalar;

/// Whether `v(0)` has to be a fixed point of `A_0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `v(qn + r) = A_r v(n)` for all `n ≥ 0`, which forces `A_0 v(0) = v(0)`.
    Sequence,
    /// Plain matrix products with `f(0) = I`; no constraint on `v(0)`.
    Matrix,
}

/// Little-endian q-ary digits `r_0, …, r_{ℓ-1}` with a nonzero top digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QExpansion {
    pub q: u64,
    pub digits: Vec<u64>,
}

impl QExpansion {
    pub fn value(&self) -> u128 {
        self.digits
            .iter()
            .rev()
            .fold(0u128, |acc, &r| acc * self.q as u128 + r as u128)
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }
}

/// The q-ary expansion of `n`; zero has the empty expansion.
pub fn digits(mut n: u64, q: u64) -> QExpansion {
    assert!(q >= 2, "radix must be at least 2");
    let mut out = Vec::new();
    while n > 0 {
        out.push(n % q);
        n /= q;
    }
    QExpansion { q, digits: out }
}

/// A violated structural invariant of a [`LinearRepresentation`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    RadixTooSmall { q: u64 },
    MatrixCount { expected: usize, found: usize },
    NonSquare { index: usize, rows: usize, cols: usize },
    MatrixDimension { index: usize, expected: usize, found: usize },
    InitialVectorLength { expected: usize, found: usize },
    OutputLength { expected: usize, found: usize },
    /// `(A_0 v(0))_component ≠ v(0)_component` in sequence mode.
    NotFixedByA0 { component: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RadixTooSmall { q } => write!(f, "radix {q} is smaller than 2"),
            Violation::MatrixCount { expected, found } => {
                write!(f, "expected {expected} matrices, found {found}")
            }
            Violation::NonSquare { index, rows, cols } => {
                write!(f, "matrix {index} is {rows}x{cols}, not square")
            }
            Violation::MatrixDimension { index, expected, found } => {
                write!(f, "matrix {index} has dimension {found}, expected {expected}")
            }
            Violation::InitialVectorLength { expected, found } => {
                write!(f, "v0 has length {found}, expected {expected}")
            }
            Violation::OutputLength { expected, found } => {
                write!(f, "e has length {found}, expected {expected}")
            }
            Violation::NotFixedByA0 { component } => {
                write!(f, "A_0 v0 differs from v0 in component {component}")
            }
        }
    }
}

/// Error returned by [`LinearRepresentation::try_new`].
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid linear representation: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct InvalidRepresentation(pub Vec<Violation>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearRepresentation {
    q: u64,
    matrices: Vec<ExactMatrix>,
    v0: Vec<Scalar>,
    e: Vec<Scalar>,
    mode: Mode,
}

impl LinearRepresentation {
    /// Builds a representation without checking it; see [`Self::validate`].
    pub fn new_unchecked(
        q: u64,
        matrices: Vec<ExactMatrix>,
        v0: Vec<Scalar>,
        e: Option<Vec<Scalar>>,
        mode: Mode,
    ) -> Self {
        let d = matrices.first().map_or(v0.len(), ExactMatrix::rows);
        let e = e.unwrap_or_else(|| unit_vector(d, 0));
        LinearRepresentation {
            q,
            matrices,
            v0,
            e,
            mode,
        }
    }

    pub fn try_new(
        q: u64,
        matrices: Vec<ExactMatrix>,
        v0: Vec<Scalar>,
        e: Option<Vec<Scalar>>,
        mode: Mode,
    ) -> Result<Self, InvalidRepresentation> {
        let rep = Self::new_unchecked(q, matrices, v0, e, mode);
        let violations = rep.validate();
        if violations.is_empty() {
            Ok(rep)
        } else {
            Err(InvalidRepresentation(violations))
        }
    }

    /// Lists every violated invariant; empty when the representation is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.q < 2 {
            out.push(Violation::RadixTooSmall { q: self.q });
        }
        if self.matrices.len() as u64 != self.q {
            out.push(Violation::MatrixCount {
                expected: self.q as usize,
                found: self.matrices.len(),
            });
        }
        let d = self.dim();
        let mut shapes_ok = true;
        for (index, m) in self.matrices.iter().enumerate() {
            if !m.is_square() {
                shapes_ok = false;
                out.push(Violation::NonSquare {
                    index,
                    rows: m.rows(),
                    cols: m.cols(),
                });
            } else if m.rows() != d {
                shapes_ok = false;
                out.push(Violation::MatrixDimension {
                    index,
                    expected: d,
                    found: m.rows(),
                });
            }
        }
        if self.v0.len() != d {
            shapes_ok = false;
            out.push(Violation::InitialVectorLength {
                expected: d,
                found: self.v0.len(),
            });
        }
        if self.e.len() != d {
            out.push(Violation::OutputLength {
                expected: d,
                found: self.e.len(),
            });
        }
        if shapes_ok && self.mode == Mode::Sequence {
            if let Some(a0) = self.matrices.first() {
                let image = a0.mul_vec(&self.v0);
                for (component, (x, y)) in image.iter().zip(&self.v0).enumerate() {
                    if x != y {
                        out.push(Violation::NotFixedByA0 { component });
                    }
                }
            }
        }
        out
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.matrices.first().map_or(self.v0.len(), ExactMatrix::rows)
    }

    pub fn matrices(&self) -> &[ExactMatrix] {
        &self.matrices
    }

    pub fn v0(&self) -> &[Scalar] {
        &self.v0
    }

    pub fn output(&self) -> &[Scalar] {
        &self.e
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn with_output(mut self, e: Vec<Scalar>) -> Self {
        self.e = e;
        self
    }

    /// True when every matrix, `v(0)` and `e` are real.
    pub fn is_real(&self) -> bool {
        self.matrices.iter().all(ExactMatrix::is_real)
            && self.v0.iter().all(Scalar::is_real)
            && self.e.iter().all(Scalar::is_real)
    }

    /// `C = A_0 + ⋯ + A_{q-1}`.
    pub fn c_matrix(&self) -> ExactMatrix {
        let d = self.dim();
        self.matrices
            .iter()
            .fold(ExactMatrix::zeros(d, d), |acc, m| acc.add(m))
    }

    /// `B_r = Σ_{r' < r} A_{r'}` for `0 ≤ r < q`.
    pub fn b_matrices(&self) -> Vec<ExactMatrix> {
        let d = self.dim();
        let mut acc = ExactMatrix::zeros(d, d);
        let mut out = Vec::with_capacity(self.matrices.len());
        for m in &self.matrices {
            out.push(acc.clone());
            acc = acc.add(m);
        }
        out
    }

    /// `f(n)`; in particular `f(0) = I`.
    pub fn evaluate_product(&self, n: u64) -> ExactMatrix {
        digits(n, self.q)
            .digits
            .iter()
            .fold(ExactMatrix::identity(self.dim()), |acc, &r| {
                acc.mul(&self.matrices[r as usize])
            })
    }

    /// `v(n) = f(n) v(0)`.
    pub fn evaluate_vector(&self, n: u64) -> Vec<Scalar> {
        digits(n, self.q)
            .digits
            .iter()
            .rev()
            .fold(self.v0.clone(), |v, &r| self.matrices[r as usize].mul_vec(&v))
    }

    /// `x(n) = e · f(n) · v(0)`.
    pub fn evaluate(&self, n: u64) -> Scalar {
        dot(&self.e, &self.evaluate_vector(n))
    }

    /// `Σ_{0≤n<N} v(n)`, term by term.
    pub fn summatory_naive(&self, upper: u64) -> Vec<Scalar> {
        let mut acc = vec![Scalar::zero(); self.dim()];
        for n in 0..upper {
            for (a, x) in acc.iter_mut().zip(self.evaluate_vector(n)) {
                *a += &x;
            }
        }
        acc
    }

    /// `F(N) = Σ_{0≤n<N} f(n)`, term by term.
    pub fn summatory_matrix_naive(&self, upper: u64) -> ExactMatrix {
        let d = self.dim();
        (0..upper).fold(ExactMatrix::zeros(d, d), |acc, n| {
            acc.add(&self.evaluate_product(n))
        })
    }

    /// `F(N)` through the digit recursion
    /// `F(qM + r) = C F(M) + B_r f(M) + (I − A_0)[qM + r > 0]`,
    /// reading the digits of `N` from the most significant end.
    pub fn summatory_matrix_fast(&self, upper: u64) -> ExactMatrix {
        let d = self.dim();
        let c = self.c_matrix();
        let b = self.b_matrices();
        let id = ExactMatrix::identity(d);
        let i_minus_a0 = id.sub(&self.matrices[0]);
        let mut big_f = ExactMatrix::zeros(d, d);
        let mut f = id;
        let mut prefix: u64 = 0;
        for &r in digits(upper, self.q).digits.iter().rev() {
            let r = r as usize;
            prefix = prefix * self.q + r as u64;
            big_f = c.mul(&big_f).add(&b[r].mul(&f));
            if prefix > 0 {
                big_f = big_f.add(&i_minus_a0);
                f = self.matrices[r].mul(&f);
            }
        }
        big_f
    }

    /// `F(N) v(0)` through the same digit recursion applied to vectors.
    pub fn summatory_fast(&self, upper: u64) -> Vec<Scalar> {
        let c = self.c_matrix();
        let b = self.b_matrices();
        let correction: Vec<Scalar> = self
            .v0
            .iter()
            .zip(self.matrices[0].mul_vec(&self.v0))
            .map(|(x, y)| x - &y)
            .collect();
        let mut acc = vec![Scalar::zero(); self.dim()];
        let mut v = self.v0.clone();
        let mut prefix: u64 = 0;
        for &r in digits(upper, self.q).digits.iter().rev() {
            let r = r as usize;
            prefix = prefix * self.q + r as u64;
            let mut next = c.mul_vec(&acc);
            for (a, x) in next.iter_mut().zip(b[r].mul_vec(&v)) {
                *a += &x;
            }
            if prefix > 0 {
                for (a, x) in next.iter_mut().zip(&correction) {
                    *a += x;
                }
                v = self.matrices[r].mul_vec(&v);
            }
            acc = next;
        }
        acc
    }

    /// `X(N) = e · F(N) · v(0)`.
    pub fn summatory_scalar(&self, upper: u64) -> Scalar {
        dot(&self.e, &self.summatory_fast(upper))
    }

    pub fn matrices_complex(&self) -> Vec<CMatrix> {
        self.matrices.iter().map(ExactMatrix::to_complex).collect()
    }

    pub fn v0_complex(&self) -> CVector {
        exact_to_cvector(&self.v0)
    }

    pub fn output_complex(&self) -> CVector {
        exact_to_cvector(&self.e)
    }

    /// Floating-point table of `f(n) v(0)` for `0 ≤ n ≤ n_max`.
    pub fn vector_table(&self, n_max: usize) -> Vec<CVector> {
        let mats = self.matrices_complex();
        let q = self.q as usize;
        let mut out: Vec<CVector> = Vec::with_capacity(n_max + 1);
        out.push(self.v0_complex());
        for n in 1..=n_max {
            let v = &mats[n % q] * &out[n / q];
            out.push(v);
        }
        out
    }

    /// `max_{1≤n≤n_max} ‖f(n)‖_∞ / n^{log_q R}` for a candidate growth rate `R`.
    pub fn growth_ratio(&self, r_bound: f64, n_max: usize) -> f64 {
        let mats = self.matrices_complex();
        let q = self.q as usize;
        let exponent = r_bound.ln() / (self.q as f64).ln();
        let mut table: Vec<CMatrix> = Vec::with_capacity(n_max + 1);
        table.push(CMatrix::identity(self.dim(), self.dim()));
        let mut worst: f64 = 0.0;
        for n in 1..=n_max {
            let f = &mats[n % q] * &table[n / q];
            worst = worst.max(max_row_sum(&f) / (n as f64).powf(exponent));
            table.push(f);
        }
        worst
    }
}

pub fn unit_vector(d: usize, k: usize) -> Vec<Scalar> {
    (0..d)
        .map(|i| if i == k { Scalar::one() } else { Scalar::zero() })
        .collect()
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

pub fn cdot(a: &CVector, b: &CVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::binary_sum_of_digits;

    #[test]
    fn digits_examples() {
        assert!(digits(0, 2).is_empty());
        assert_eq!(digits(5, 2).digits, vec![1, 0, 1]);
        assert_eq!(digits(11, 3).digits, vec![2, 0, 1]);
        assert_eq!(digits(11, 3).value(), 11);
    }

    #[test]
    fn products_of_sum_of_digits() {
        let rep = binary_sum_of_digits();
        assert_eq!(rep.evaluate_product(0), ExactMatrix::identity(2));
        assert_eq!(
            rep.evaluate_product(3),
            ExactMatrix::from_i64_rows(&[&[1, 2], &[0, 1]])
        );
        assert_eq!(
            rep.evaluate_product(2),
            rep.matrices()[0].mul(&rep.matrices()[1])
        );
        assert_eq!(rep.evaluate(5), Scalar::int(2));
        assert_eq!(rep.evaluate(0), Scalar::zero());
    }

    #[test]
    fn summation_examples() {
        let rep = binary_sum_of_digits();
        assert_eq!(rep.summatory_scalar(4), Scalar::int(4));
        assert_eq!(rep.summatory_scalar(8), Scalar::int(12));
        assert_eq!(rep.summatory_scalar(0), Scalar::zero());
        assert!(rep.summatory_matrix_fast(0).is_zero());
        assert_eq!(rep.summatory_naive(8)[0], Scalar::int(12));
    }

    #[test]
    fn derived_matrices() {
        let rep = binary_sum_of_digits();
        let b = rep.b_matrices();
        assert!(b[0].is_zero());
        assert_eq!(b[1].add(&rep.matrices()[1]), rep.c_matrix());
    }

    #[test]
    fn validation_reports_each_violation() {
        assert!(binary_sum_of_digits().validate().is_empty());
        let a0 = ExactMatrix::from_i64_rows(&[&[1, 0], &[0, 1]]);
        let a1 = ExactMatrix::from_i64_rows(&[&[1, 1], &[0, 1]]);
        let bad_v0 = LinearRepresentation::new_unchecked(
            2,
            vec![ExactMatrix::from_i64_rows(&[&[0, 1], &[0, 1]]), a1.clone()],
            vec![Scalar::int(1), Scalar::int(0)],
            None,
            Mode::Sequence,
        );
        assert_eq!(
            bad_v0.validate(),
            vec![Violation::NotFixedByA0 { component: 0 }]
        );
        // the same data is acceptable as a plain matrix product
        let as_matrix = LinearRepresentation::new_unchecked(
            2,
            bad_v0.matrices().to_vec(),
            bad_v0.v0().to_vec(),
            None,
            Mode::Matrix,
        );
        assert!(as_matrix.validate().is_empty());

        let non_square = ExactMatrix::from_rows(vec![vec![Scalar::one(), Scalar::zero()]]).unwrap();
        let rep = LinearRepresentation::new_unchecked(
            2,
            vec![a0, non_square],
            vec![Scalar::zero(), Scalar::one()],
            None,
            Mode::Sequence,
        );
        assert_eq!(
            rep.validate(),
            vec![Violation::NonSquare {
                index: 1,
                rows: 1,
                cols: 2
            }]
        );
    }

    #[test]
    fn matrix_mode_summation_uses_correction() {
        // A_0 ≠ I, so the (I − A_0) correction matters for F(N).
        let rep = LinearRepresentation::try_new(
            2,
            vec![
                ExactMatrix::from_i64_rows(&[&[0, 1], &[1, 1]]),
                ExactMatrix::from_i64_rows(&[&[2, 0], &[1, -1]]),
            ],
            vec![Scalar::one(), Scalar::int(3)],
            None,
            Mode::Matrix,
        )
        .unwrap();
        for n in 0..70 {
            assert_eq!(rep.summatory_matrix_fast(n), rep.summatory_matrix_naive(n), "N={n}");
            assert_eq!(rep.summatory_fast(n), rep.summatory_naive(n), "N={n}");
        }
    }
}

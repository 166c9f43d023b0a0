//! Univariate polynomials over `Q(i)`: characteristic polynomials,
//! square-free decomposition and numerical root extraction.

use num_complex::Complex64;

use crate::matrix::{CMatrix, ExactMatrix};
use crate::scalar::Scalar;

/// Coefficients in increasing degree; no trailing zeros (the zero
/// polynomial is the empty vector).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(Vec<Scalar>);

impl Poly {
    pub fn new(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn one() -> Self {
        Poly(vec![Scalar::one()])
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    fn lead(&self) -> &Scalar {
        self.0.last().expect("zero polynomial has no leading coefficient")
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead().clone();
        Poly::new(self.0.iter().map(|c| c / &l).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * &Scalar::int(k as i64))
                .collect(),
        )
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        Poly::new(
            (0..n)
                .map(|i| {
                    let a = self.0.get(i).cloned().unwrap_or_default();
                    let b = rhs.0.get(i).cloned().unwrap_or_default();
                    &a - &b
                })
                .collect(),
        )
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly(Vec::new());
        }
        let mut out = vec![Scalar::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        Poly::new(out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.lead().clone();
        let mut rem = self.0.clone();
        let mut quot = vec![Scalar::zero(); self.0.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let c = rem.last().unwrap() / &lead;
            for (j, dj) in divisor.0.iter().enumerate() {
                let t = &c * dj;
                rem[k + j] -= &t;
            }
            quot[k] = c;
            rem.pop();
            while rem.last().is_some_and(Scalar::is_zero) {
                rem.pop();
            }
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, rhs: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), rhs.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    pub fn eval_c64(&self, z: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c.to_c64())
    }

    /// Characteristic polynomial `det(xI − M)` (Faddeev–LeVerrier).
    pub fn characteristic(m: &ExactMatrix) -> Poly {
        assert!(m.is_square(), "characteristic polynomial of non-square matrix");
        let n = m.rows();
        let mut coeffs = vec![Scalar::zero(); n + 1];
        coeffs[n] = Scalar::one();
        let mut mk = ExactMatrix::zeros(n, n);
        let id = ExactMatrix::identity(n);
        for k in 1..=n {
            mk = m.mul(&mk).add(&id.scale(&coeffs[n + 1 - k]));
            let t = m.mul(&mk).trace();
            coeffs[n - k] = -(&t / &Scalar::int(k as i64));
        }
        Poly::new(coeffs)
    }

    /// Yun's square-free decomposition: pairs `(factor, multiplicity)` whose
    /// product (with multiplicities) equals the monic version of `self`.
    pub fn square_free(&self) -> Vec<(Poly, usize)> {
        let f = self.monic();
        if f.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.div_rem(&a0).0;
        let c = df.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut out = Vec::new();
        let mut i = 1;
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d);
            let nb = b.div_rem(&a).0;
            let nc = d.div_rem(&a).0;
            if a.degree().unwrap_or(0) > 0 {
                out.push((a, i));
            }
            d = nc.sub(&nb.derivative());
            b = nb;
            i += 1;
        }
        out
    }

    /// Numerical roots of a polynomial with simple roots: eigenvalues of the
    /// companion matrix refined by Newton steps.
    pub fn simple_roots(&self) -> Vec<Complex64> {
        let m = self.monic();
        let n = match m.degree() {
            Some(n) if n > 0 => n,
            _ => return Vec::new(),
        };
        let c: Vec<Complex64> = m.0.iter().map(Scalar::to_c64).collect();
        let eig = if n == 1 {
            vec![-c[0]]
        } else {
            let mut comp = CMatrix::zeros(n, n);
            for i in 1..n {
                comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
            }
            for i in 0..n {
                comp[(i, n - 1)] = -c[i];
            }
            comp.complex_eigenvalues_general()
        };
        let dm = m.derivative();
        eig.into_iter()
            .map(|mut z| {
                for _ in 0..50 {
                    let p = m.eval_c64(z);
                    let dp = dm.eval_c64(z);
                    if dp.norm() == 0.0 {
                        break;
                    }
                    let step = p / dp;
                    let cand = z - step;
                    if m.eval_c64(cand).norm() >= p.norm() {
                        break;
                    }
                    z = cand;
                    if step.norm() <= 1e-17 * z.norm().max(1.0) {
                        break;
                    }
                }
                z
            })
            .collect()
    }
}

/// Eigenvalues of a general complex matrix.
pub trait GeneralEigenvalues {
    fn complex_eigenvalues_general(&self) -> Vec<Complex64>;
}

impl GeneralEigenvalues for CMatrix {
    fn complex_eigenvalues_general(&self) -> Vec<Complex64> {
        if self.nrows() == 0 {
            return Vec::new();
        }
        if self.nrows() == 1 {
            return vec![self[(0, 0)]];
        }
        let schur = nalgebra::Schur::new(self.clone());
        let (_, t) = schur.unpack();
        (0..t.nrows()).map(|i| t[(i, i)]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&x| Scalar::int(x)).collect())
    }

    #[test]
    fn charpoly_of_jordan_block() {
        let m = ExactMatrix::from_i64_rows(&[&[2, 1], &[0, 2]]);
        // (x-2)^2 = x^2 - 4x + 4
        assert_eq!(Poly::characteristic(&m), p(&[4, -4, 1]));
    }

    #[test]
    fn square_free_detects_multiplicity() {
        // (x-1)^3 (x+2)
        let f = p(&[-1, 1]).mul(&p(&[-1, 1])).mul(&p(&[-1, 1])).mul(&p(&[2, 1]));
        let sf = f.square_free();
        assert_eq!(sf, vec![(p(&[2, 1]), 1), (p(&[-1, 1]), 3)]);
    }

    #[test]
    fn division_identity() {
        let a = p(&[1, 2, 3, 4, 5]);
        let b = p(&[7, 0, 2]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q.mul(&b).sub(&a.sub(&r)), Poly::new(vec![]));
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn roots_of_quadratic() {
        // x^2 - 3x - 2
        let mut roots = p(&[-2, -3, 1]).simple_roots();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let s17 = 17f64.sqrt();
        assert!((roots[0].re - (3.0 - s17) / 2.0).abs() < 1e-14);
        assert!((roots[1].re - (3.0 + s17) / 2.0).abs() < 1e-14);
    }
}

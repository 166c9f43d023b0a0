//! Spectrum and Jordan structure of `C`, joint spectral radius bounds, the
//! choice of `R`, spectral projectors and the constants `K`, `ϑ_m`.

use std::f64::consts::PI;

use num_complex::Complex64;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::linrep::LinearRepresentation;
use crate::matrix::{max_row_sum, numerical_rank, CMatrix, ExactMatrix};
use crate::poly::{GeneralEigenvalues, Poly};
use crate::scalar::Scalar;

/// Default relative clustering tolerance for eigenvalues.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default gap `ε` used when `R` has to exceed the upper JSR bound.
pub const DEFAULT_EPSILON: f64 = 1e-6;
/// Default number of trapezoid nodes for projector contours.
pub const PROJECTOR_NODES: usize = 256;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("ill-separated spectrum: eigenvalues {a} and {b} are closer than the separation radius {radius:e}")]
    IllSeparated {
        a: Complex64,
        b: Complex64,
        radius: f64,
    },
    #[error("theta_0 is undefined when 1 is an eigenvalue of C")]
    ThetaZero,
    #[error("theta_{m} requested but m(1) = {max}")]
    ThetaOutOfRange { m: usize, max: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct Eigenvalue {
    #[serde(serialize_with = "crate::io::ser_complex")]
    pub value: Complex64,
    pub multiplicity: usize,
    /// Size of the largest Jordan block.
    pub max_jordan: usize,
}

#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub eigenvalues: Vec<Eigenvalue>,
    /// `projectors[i]` projects onto the generalized eigenspace of
    /// `eigenvalues[i]` along the others.
    pub projectors: Vec<CMatrix>,
    /// `|trace(C) − Σ λ·mult(λ)|` relative to `max(1, |trace|)`.
    pub trace_residual: f64,
    /// `|det(C) − Π λ^mult(λ)|` relative to `max(1, |det|)`.
    pub det_residual: f64,
    /// Whether 1 is an eigenvalue (decided exactly).
    pub one_is_eigenvalue: bool,
}

impl SpectralReport {
    pub fn dim(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }

    /// Index of the eigenvalue closest to `z`, if within `tol·max(1,|z|)`.
    pub fn find(&self, z: Complex64, tol: f64) -> Option<usize> {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, e)| (i, (e.value - z).norm()))
            .filter(|&(_, d)| d <= tol * z.norm().max(1.0))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    /// `‖Σ Π_λ − I‖_∞`.
    pub fn resolution_error(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .projectors
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, p| acc + p);
        max_row_sum(&(sum - CMatrix::identity(d, d)))
    }

    /// `max_λ ‖Π_λ² − Π_λ‖_∞`.
    pub fn idempotence_error(&self) -> f64 {
        self.projectors
            .iter()
            .map(|p| max_row_sum(&(p * p - p)))
            .fold(0.0, f64::max)
    }

    /// `max_{λ≠μ} ‖Π_λ Π_μ‖_∞`.
    pub fn orthogonality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.projectors.iter().enumerate() {
            for (j, b) in self.projectors.iter().enumerate() {
                if i != j {
                    worst = worst.max(max_row_sum(&(a * b)));
                }
            }
        }
        worst
    }
}

/// Eigenvalues of `C` with algebraic multiplicities (exact, from the
/// square-free factorization of the characteristic polynomial), Jordan-block
/// maxima from the numerical rank chain of `(C − λI)^k`, and spectral
/// projectors by trapezoidal contour integration of the resolvent.
pub fn spectrum(c: &ExactMatrix, tol: f64) -> Result<SpectralReport, SpectralError> {
    if !c.is_square() {
        return Err(SpectralError::NotSquare {
            rows: c.rows(),
            cols: c.cols(),
        });
    }
    let d = c.rows();
    let chi = Poly::characteristic(c);
    let one_is_eigenvalue = eval_exact(&chi, &Scalar::one()).is_zero();
    let mut roots: Vec<(Complex64, usize)> = Vec::new();
    for (factor, mult) in chi.square_free() {
        for z in factor.simple_roots() {
            roots.push((z, mult));
        }
    }
    // Exact zero eigenvalue and exact 1 are snapped to avoid roundoff in
    // later tests against these special values.
    for (z, _) in roots.iter_mut() {
        if z.norm() < 1e-300 {
            *z = Complex64::new(0.0, 0.0);
        }
        if one_is_eigenvalue && (*z - 1.0).norm() < 1e-6 {
            *z = Complex64::new(1.0, 0.0);
        }
    }
    roots.sort_by(|a, b| {
        b.0.norm()
            .total_cmp(&a.0.norm())
            .then(b.0.re.total_cmp(&a.0.re))
            .then(b.0.im.total_cmp(&a.0.im))
    });

    let cm = c.to_complex();
    let radii = separation_radii(&roots, tol)?;
    let mut eigenvalues = Vec::with_capacity(roots.len());
    let mut projectors = Vec::with_capacity(roots.len());
    for (&(z, mult), &r) in roots.iter().zip(&radii) {
        eigenvalues.push(Eigenvalue {
            value: z,
            multiplicity: mult,
            max_jordan: jordan_max(&cm, z, mult, tol),
        });
        projectors.push(contour_projector(&cm, z, r, PROJECTOR_NODES));
    }

    let trace = c.trace().to_c64();
    let trace_sum: Complex64 = roots.iter().map(|&(z, m)| z * m as f64).sum();
    let det = if d.is_multiple_of(2) { chi.coeffs()[0].to_c64() } else { -chi.coeffs()[0].to_c64() };
    let det_prod: Complex64 = roots.iter().map(|&(z, m)| z.powi(m as i32)).product();
    Ok(SpectralReport {
        eigenvalues,
        projectors,
        trace_residual: (trace - trace_sum).norm() / trace.norm().max(1.0),
        det_residual: (det - det_prod).norm() / det.norm().max(1.0),
        one_is_eigenvalue,
    })
}

fn eval_exact(p: &Poly, x: &Scalar) -> Scalar {
    p.coeffs()
        .iter()
        .rev()
        .fold(Scalar::zero(), |acc, c| &(&acc * x) + c)
}

/// Radius of the separating circle around each root: half the distance to
/// the nearest other root (or 1 for an isolated root).
fn separation_radii(roots: &[(Complex64, usize)], tol: f64) -> Result<Vec<f64>, SpectralError> {
    let mut out = Vec::with_capacity(roots.len());
    for (i, &(z, _)) in roots.iter().enumerate() {
        let mut nearest = f64::INFINITY;
        let mut partner = z;
        for (j, &(w, _)) in roots.iter().enumerate() {
            if i != j && (z - w).norm() < nearest {
                nearest = (z - w).norm();
                partner = w;
            }
        }
        let r = if nearest.is_finite() { 0.5 * nearest } else { 1.0 };
        let scale = z.norm().max(partner.norm()).max(1.0);
        if r <= 10.0 * tol * scale {
            return Err(SpectralError::IllSeparated {
                a: z,
                b: partner,
                radius: 10.0 * tol * scale,
            });
        }
        out.push(r.min(1.0));
    }
    Ok(out)
}

/// Smallest `k` at which the rank of `(C − λI)^k` stops decreasing.
fn jordan_max(c: &CMatrix, z: Complex64, mult: usize, tol: f64) -> usize {
    let d = c.nrows();
    let shifted = c - CMatrix::identity(d, d) * z;
    let mut power = shifted.clone();
    let mut rank = numerical_rank(&power, tol);
    let mut k = 1;
    while k < mult {
        let next = &power * &shifted;
        let next_rank = numerical_rank(&next, tol);
        if next_rank == rank {
            break;
        }
        power = next;
        rank = next_rank;
        k += 1;
    }
    k
}

/// `(1/2πi)∮_{|s−z|=r} (sI − C)^{−1} ds` by the trapezoidal rule.
pub fn contour_projector(c: &CMatrix, z: Complex64, r: f64, nodes: usize) -> CMatrix {
    let d = c.nrows();
    let mut acc = CMatrix::zeros(d, d);
    for j in 0..nodes {
        let w = Complex64::from_polar(r, 2.0 * PI * j as f64 / nodes as f64);
        let resolvent = (CMatrix::identity(d, d) * (z + w) - c)
            .lu()
            .try_inverse()
            .expect("contour passes through an eigenvalue");
        acc += resolvent * w;
    }
    acc / Complex64::new(nodes as f64, 0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct JsrEstimate {
    pub lower: f64,
    pub upper: f64,
    /// `ρ_ℓ = max ‖A_{r_1}⋯A_{r_ℓ}‖_∞^{1/ℓ}` for `ℓ = 1, 2, …` over the
    /// whole family.
    pub rho: Vec<f64>,
    pub finiteness_detected: bool,
    pub budget_exhausted: bool,
    /// Sizes of the diagonal blocks of the common block-triangular form.
    pub blocks: Vec<usize>,
}

/// Brute-force JSR bounds over all products of length at most `max_len`.
///
/// The matrices are first split along the strongly connected components of
/// their joint support graph; the family is simultaneously block triangular
/// in that ordering, so its JSR is the maximum over the diagonal blocks.
/// Upper bounds are taken block by block; `rho` and the finiteness test refer
/// to the unsplit family.
pub fn jsr_bounds(matrices: &[CMatrix], max_len: usize, budget: usize) -> JsrEstimate {
    assert!(max_len >= 1 && !matrices.is_empty());
    let d = matrices[0].nrows();
    let mut budget_left = budget;
    let full = enumerate_products(matrices, max_len, &mut budget_left);
    let blocks = support_blocks(matrices);
    let mut upper = full.rho.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut lower = full.lower;
    if blocks.len() > 1 {
        let mut block_upper: f64 = 0.0;
        for block in &blocks {
            let restricted: Vec<CMatrix> = matrices
                .iter()
                .map(|m| CMatrix::from_fn(block.len(), block.len(), |i, j| m[(block[i], block[j])]))
                .collect();
            let stats = enumerate_products(&restricted, max_len, &mut budget_left);
            block_upper = block_upper.max(stats.rho.iter().cloned().fold(f64::INFINITY, f64::min));
            lower = lower.max(stats.lower);
        }
        upper = upper.min(block_upper);
    }
    if d == 0 {
        upper = 0.0;
    }
    let full_upper = full.rho.iter().cloned().fold(f64::INFINITY, f64::min);
    let finiteness_detected = full_upper - lower <= 1e-9 * full_upper;
    let budget_exhausted = budget_left == 0 && full.rho.len() < max_len;
    JsrEstimate {
        lower: lower.min(upper),
        upper,
        rho: full.rho,
        finiteness_detected,
        budget_exhausted,
        blocks: blocks.iter().map(Vec::len).collect(),
    }
}

struct ProductStats {
    rho: Vec<f64>,
    lower: f64,
}

fn enumerate_products(matrices: &[CMatrix], max_len: usize, budget: &mut usize) -> ProductStats {
    let d = matrices[0].nrows();
    let mut level = vec![CMatrix::identity(d, d)];
    let mut rho = Vec::new();
    let mut lower: f64 = 0.0;
    for len in 1..=max_len {
        let count = level.len() * matrices.len();
        if count > *budget {
            *budget = 0;
            break;
        }
        *budget -= count;
        let mut next = Vec::with_capacity(count);
        let mut best: f64 = 0.0;
        for p in &level {
            for a in matrices {
                let prod = p * a;
                best = best.max(max_row_sum(&prod));
                let radius = prod
                    .complex_eigenvalues_general()
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                lower = lower.max(radius.powf(1.0 / len as f64));
                next.push(prod);
            }
        }
        rho.push(best.powf(1.0 / len as f64));
        level = next;
    }
    ProductStats { rho, lower }
}

/// Strongly connected components of the graph with an arc `i → j` whenever
/// some matrix has a nonzero `(i, j)` entry.
fn support_blocks(matrices: &[CMatrix]) -> Vec<Vec<usize>> {
    let d = matrices[0].nrows();
    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..d).map(|_| g.add_node(())).collect();
    for i in 0..d {
        for j in 0..d {
            if matrices.iter().any(|m| m[(i, j)].norm() != 0.0) {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|comp| {
            let mut v: Vec<usize> = comp.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

/// `R = upper` when the finiteness property was detected, otherwise
/// `upper·(1+ε)`, pulled back below the next eigenvalue modulus if that one
/// would fall into `(upper, R]`.
pub fn choose_r(jsr: &JsrEstimate, spectrum: &SpectralReport, epsilon: f64) -> f64 {
    if jsr.finiteness_detected {
        return jsr.upper;
    }
    let mut r = jsr.upper * (1.0 + epsilon);
    let next_modulus = spectrum
        .eigenvalues
        .iter()
        .map(|e| e.value.norm())
        .filter(|&m| m > jsr.upper)
        .fold(f64::INFINITY, f64::min);
    if next_modulus <= r {
        r = 0.5 * (jsr.upper + next_modulus);
    }
    r
}

/// `K`, `ϑ_m` (`1 ≤ m ≤ m(1)`) and `ϑ = ϑ_{m(1)}`.
#[derive(Debug, Clone)]
pub struct EigenConstants {
    pub k: CMatrix,
    /// `theta[m-1] = ϑ_m`; empty when 1 is not an eigenvalue.
    pub theta: Vec<CMatrix>,
    pub one_is_eigenvalue: bool,
}

impl EigenConstants {
    /// `ϑ_m`; `ϑ_0` is undefined when 1 is an eigenvalue.
    pub fn theta_m(&self, m: usize) -> Result<CMatrix, SpectralError> {
        let d = self.k.nrows();
        if !self.one_is_eigenvalue {
            return Ok(CMatrix::zeros(d, d));
        }
        if m == 0 {
            return Err(SpectralError::ThetaZero);
        }
        self.theta
            .get(m - 1)
            .cloned()
            .ok_or(SpectralError::ThetaOutOfRange {
                m,
                max: self.theta.len(),
            })
    }

    /// `ϑ = ϑ_{m(1)}`, or zero when 1 is not an eigenvalue.
    pub fn theta(&self) -> CMatrix {
        self.theta
            .last()
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.k.nrows(), self.k.nrows()))
    }
}

pub fn eigen_constants(rep: &LinearRepresentation, report: &SpectralReport) -> EigenConstants {
    let d = rep.dim();
    let id = CMatrix::identity(d, d);
    let c = rep.c_matrix().to_complex();
    let a0 = rep.matrices()[0].to_complex();
    let i_minus_a0 = &id - &a0;
    let one = report
        .eigenvalues
        .iter()
        .position(|e| report.one_is_eigenvalue && e.value == Complex64::new(1.0, 0.0));
    match one {
        None => {
            let inv = (&id - &c).lu().try_inverse().expect("1 is not an eigenvalue");
            EigenConstants {
                k: inv * i_minus_a0,
                theta: Vec::new(),
                one_is_eigenvalue: false,
            }
        }
        Some(idx) => {
            let pi1 = &report.projectors[idx];
            let complement = &id - pi1;
            let c_prime = &c * &complement;
            let inv = (&id - &c_prime)
                .lu()
                .try_inverse()
                .expect("I − C' is invertible");
            let k = &complement * inv * &i_minus_a0;
            let c_minus_i = &c - &id;
            let mut theta = Vec::new();
            let mut power = id.clone();
            let mut factorial = 1.0;
            for m in 1..=report.eigenvalues[idx].max_jordan {
                factorial *= m as f64;
                theta.push(pi1 * &power * &i_minus_a0 / Complex64::new(factorial, 0.0));
                power = &power * &c_minus_i;
            }
            EigenConstants {
                k,
                theta,
                one_is_eigenvalue: true,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linrep::Mode;
    use crate::registry::binary_sum_of_digits;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-10
    }

    #[test]
    fn jordan_block_of_two() {
        let c = ExactMatrix::from_i64_rows(&[&[2, 1], &[0, 2]]);
        let rep = spectrum(&c, DEFAULT_TOL).unwrap();
        assert_eq!(rep.eigenvalues.len(), 1);
        assert!(close(rep.eigenvalues[0].value, Complex64::new(2.0, 0.0)));
        assert_eq!(rep.eigenvalues[0].multiplicity, 2);
        assert_eq!(rep.eigenvalues[0].max_jordan, 2);
        assert!(rep.resolution_error() < 1e-10);
    }

    #[test]
    fn identity_has_trivial_jordan_structure() {
        let rep = spectrum(&ExactMatrix::identity(3), DEFAULT_TOL).unwrap();
        assert_eq!(rep.eigenvalues.len(), 1);
        assert_eq!(rep.eigenvalues[0].multiplicity, 3);
        assert_eq!(rep.eigenvalues[0].max_jordan, 1);
        assert!(rep.one_is_eigenvalue);
    }

    #[test]
    fn mixed_blocks_and_projectors() {
        // one 2-block at 1, a simple eigenvalue 3 and a 1-block at 1
        let c = ExactMatrix::from_i64_rows(&[
            &[1, 1, 0, 5],
            &[0, 1, 0, 0],
            &[0, 0, 1, 0],
            &[0, 0, 0, 3],
        ]);
        let rep = spectrum(&c, DEFAULT_TOL).unwrap();
        let one = rep.find(Complex64::new(1.0, 0.0), 1e-9).unwrap();
        assert_eq!(rep.eigenvalues[one].multiplicity, 3);
        assert_eq!(rep.eigenvalues[one].max_jordan, 2);
        assert!(rep.resolution_error() < 1e-10);
        assert!(rep.idempotence_error() < 1e-10);
        assert!(rep.orthogonality_error() < 1e-10);
        assert!(rep.trace_residual < 1e-12 && rep.det_residual < 1e-12);
    }

    #[test]
    fn ill_separated_roots_are_rejected() {
        // eigenvalues 1 and 1 + 1e-9
        let c = ExactMatrix::from_rows(vec![
            vec![Scalar::one(), Scalar::zero()],
            vec![Scalar::zero(), Scalar::ratio(1_000_000_001, 1_000_000_000)],
        ])
        .unwrap();
        assert!(matches!(
            spectrum(&c, DEFAULT_TOL),
            Err(SpectralError::IllSeparated { .. })
        ));
    }

    #[test]
    fn jsr_of_single_matrix() {
        let m = vec![CMatrix::from_element(1, 1, Complex64::new(3.0, 0.0))];
        let est = jsr_bounds(&m, 4, 1000);
        assert!((est.lower - 3.0).abs() < 1e-12 && (est.upper - 3.0).abs() < 1e-12);
        assert!(est.finiteness_detected);
    }

    #[test]
    fn jsr_of_sum_of_digits() {
        let rep = binary_sum_of_digits();
        let est = jsr_bounds(&rep.matrices_complex(), 8, 1_000_000);
        assert!((est.lower - 1.0).abs() < 1e-12);
        assert!((est.upper - 1.0).abs() < 1e-12);
        assert!(!est.finiteness_detected);
        assert!(est.rho.iter().all(|&r| r >= est.lower));
        let spec = spectrum(&rep.c_matrix(), DEFAULT_TOL).unwrap();
        let r = choose_r(&est, &spec, DEFAULT_EPSILON);
        assert!((r - (1.0 + 1e-6)).abs() < 1e-15);
    }

    #[test]
    fn r_stays_below_next_eigenvalue() {
        let est = JsrEstimate {
            lower: 1.3,
            upper: 1.4,
            rho: vec![1.4],
            finiteness_detected: false,
            budget_exhausted: false,
            blocks: vec![1],
        };
        let spec = spectrum(&ExactMatrix::from_rows(vec![vec![Scalar::ratio(3, 2)]]).unwrap(), DEFAULT_TOL).unwrap();
        let r = choose_r(&est, &spec, DEFAULT_EPSILON);
        assert!(r > 1.4 && r < 1.5);
        assert!((r - 1.4 * (1.0 + 1e-6)).abs() < 1e-15);
        assert!((choose_r(&est, &spec, 0.5) - 1.45).abs() < 1e-15);
    }

    #[test]
    fn constants_without_eigenvalue_one() {
        let rep = LinearRepresentation::try_new(
            2,
            vec![ExactMatrix::identity(1), ExactMatrix::identity(1)],
            vec![Scalar::one()],
            None,
            Mode::Sequence,
        )
        .unwrap();
        let spec = spectrum(&rep.c_matrix(), DEFAULT_TOL).unwrap();
        let k = eigen_constants(&rep, &spec);
        assert!(!k.one_is_eigenvalue);
        assert!(k.k[(0, 0)].norm() < 1e-15);
        assert!(k.theta()[(0, 0)].norm() == 0.0);
    }

    #[test]
    fn constants_of_halves() {
        let half = ExactMatrix::from_rows(vec![vec![Scalar::ratio(1, 2)]]).unwrap();
        let rep = LinearRepresentation::try_new(
            2,
            vec![half.clone(), half],
            vec![Scalar::one()],
            None,
            Mode::Matrix,
        )
        .unwrap();
        let spec = spectrum(&rep.c_matrix(), DEFAULT_TOL).unwrap();
        let k = eigen_constants(&rep, &spec);
        assert!(k.one_is_eigenvalue);
        assert!(close(k.theta_m(1).unwrap()[(0, 0)], Complex64::new(0.5, 0.0)));
        assert!(k.k[(0, 0)].norm() < 1e-12);
        assert_eq!(k.theta_m(0), Err(SpectralError::ThetaZero));
    }

    #[test]
    fn sum_of_digits_constants_annihilate_v0() {
        let rep = binary_sum_of_digits();
        let spec = spectrum(&rep.c_matrix(), DEFAULT_TOL).unwrap();
        let k = eigen_constants(&rep, &spec);
        let v0 = rep.v0_complex();
        assert!((&k.k * &v0).norm() < 1e-12);
        assert!((k.theta() * &v0).norm() < 1e-12);
    }
}

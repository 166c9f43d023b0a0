//! The shape of the asymptotic expansion
//!
//! ```text
//! X(N) = Σ_{|λ|>R} N^{log_q λ} Σ_{0≤k<m(λ)} (log_q N)^k Φ_{λk}({log_q N})
//!        + (log_q N)^{m(1)} ϑ + K + O(N^{log_q R} (log N)^{max{m(λ): |λ|=R}})
//! ```
//!
//! and an empirical check of the remainder against exact summation.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::fourier::{reconstruct_fluctuation, FourierError, FourierTable, BOUNDARY_TIE};
use crate::io::{ser_complex, ser_complex_list};
use crate::linrep::{cdot, LinearRepresentation, Mode};
use crate::matrix::max_abs;
use crate::spectral::{
    choose_r, eigen_constants, jsr_bounds, spectrum, JsrEstimate, SpectralError, SpectralReport, DEFAULT_EPSILON,
    DEFAULT_TOL,
};

/// Bound on `‖K v(0)‖` and `‖ϑ v(0)‖` in sequence mode.
pub const ANNIHILATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct SkeletonTerm {
    #[serde(serialize_with = "ser_complex")]
    pub lambda: Complex64,
    /// `log_q λ`.
    #[serde(serialize_with = "ser_complex")]
    pub exponent: Complex64,
    /// `m(λ)`; the powers are `k = 0, …, m(λ) − 1`.
    pub multiplicity: usize,
    /// Upper bound `log_q(|λ|/R)` for the Hölder exponent of `Φ_{λk}`.
    pub holder_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionSkeleton {
    pub q: u64,
    pub mode: Mode,
    pub r_upper: f64,
    pub jsr_lower: f64,
    /// Sorted by decreasing `|λ|`.
    pub terms: Vec<SkeletonTerm>,
    /// Eigenvalues with `|λ|` within the tie tolerance of `R`.
    #[serde(serialize_with = "ser_complex_list")]
    pub boundary: Vec<Complex64>,
    /// Eigenvalues with `ρ_lower < |λ| ≤ R`, which might belong to the
    /// expansion if `R` overestimates the joint spectral radius.
    #[serde(serialize_with = "ser_complex_list")]
    pub uncertain_band: Vec<Complex64>,
    /// `log_q R`, absent when no eigenvalue has `|λ| ≤ R`.
    pub error_exponent: Option<f64>,
    pub error_log_power: usize,
    /// `‖K v(0)‖_∞` and `‖ϑ v(0)‖_∞`.
    pub k_v0_norm: f64,
    pub theta_v0_norm: f64,
    /// `e·K·v(0)`; omitted in sequence mode.
    #[serde(serialize_with = "ser_opt_complex")]
    pub constant: Option<Complex64>,
    /// `(m(1), e·ϑ·v(0))`; omitted in sequence mode or without eigenvalue 1.
    pub theta_term: Option<(usize, [f64; 2])>,
    pub warnings: Vec<String>,
}

fn ser_opt_complex<S: serde::Serializer>(z: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
    match z {
        Some(z) => s.collect_seq([z.re, z.im]),
        None => s.serialize_none(),
    }
}

impl ExpansionSkeleton {
    /// Whether `K v(0)` and `ϑ v(0)` vanish as they must in sequence mode.
    pub fn annihilation_ok(&self) -> bool {
        self.mode == Mode::Matrix || (self.k_v0_norm <= ANNIHILATION_TOL && self.theta_v0_norm <= ANNIHILATION_TOL)
    }
}

/// Spectrum of `C`, JSR bounds (products up to length 8) and `R`.
pub fn reports(rep: &LinearRepresentation) -> Result<(SpectralReport, JsrEstimate, f64), SpectralError> {
    let report = spectrum(&rep.c_matrix(), DEFAULT_TOL)?;
    let jsr = jsr_bounds(&rep.matrices_complex(), 8, 1_000_000);
    let r = choose_r(&jsr, &report, DEFAULT_EPSILON);
    Ok((report, jsr, r))
}

pub fn skeleton(
    rep: &LinearRepresentation,
    report: &SpectralReport,
    jsr: &JsrEstimate,
    r_upper: f64,
) -> ExpansionSkeleton {
    let lq = (rep.q() as f64).ln();
    let mut terms = Vec::new();
    let mut boundary = Vec::new();
    let mut uncertain_band = Vec::new();
    let mut below = false;
    let mut warnings = Vec::new();
    for e in &report.eigenvalues {
        let modulus = e.value.norm();
        if modulus > r_upper + BOUNDARY_TIE {
            if modulus <= 1.0 / rep.q() as f64 {
                warnings.push(format!("eigenvalue {} does not exceed 1/q", e.value));
            }
            terms.push(SkeletonTerm {
                lambda: e.value,
                exponent: e.value.ln() / lq,
                multiplicity: e.max_jordan,
                holder_bound: (modulus / r_upper).ln() / lq,
            });
            continue;
        }
        below = true;
        if (modulus - r_upper).abs() <= BOUNDARY_TIE {
            boundary.push(e.value);
        }
        if !jsr.finiteness_detected && modulus > jsr.lower {
            uncertain_band.push(e.value);
        }
    }
    if !uncertain_band.is_empty() {
        warnings.push(format!(
            "eigenvalues {:?} lie between the JSR bounds {} and {}",
            uncertain_band.iter().map(|z| z.to_string()).collect::<Vec<_>>(),
            jsr.lower,
            r_upper
        ));
    }
    let error_log_power = boundary
        .iter()
        .filter_map(|z| report.find(*z, 0.0))
        .map(|i| report.eigenvalues[i].max_jordan)
        .max()
        .unwrap_or(0);

    let constants = eigen_constants(rep, report);
    let v0 = rep.v0_complex();
    let e = rep.output_complex();
    let kv = &constants.k * &v0;
    let tv = constants.theta() * &v0;
    let (constant, theta_term) = match rep.mode() {
        Mode::Sequence => (None, None),
        Mode::Matrix => {
            let m1 = constants.theta.len();
            let theta = (m1 > 0).then(|| {
                let t = cdot(&e, &tv);
                (m1, [t.re, t.im])
            });
            (Some(cdot(&e, &kv)), theta)
        }
    };
    ExpansionSkeleton {
        q: rep.q(),
        mode: rep.mode(),
        r_upper,
        jsr_lower: jsr.lower,
        terms,
        boundary,
        uncertain_band,
        error_exponent: below.then(|| r_upper.ln() / lq),
        error_log_power,
        k_v0_norm: max_abs(&kv),
        theta_v0_norm: max_abs(&tv),
        constant,
        theta_term,
        warnings,
    }
}

/// [`skeleton`] with freshly computed reports.
pub fn skeleton_for(rep: &LinearRepresentation) -> Result<ExpansionSkeleton, SpectralError> {
    let (report, jsr, r) = reports(rep)?;
    Ok(skeleton(rep, &report, &jsr, r))
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub n: u64,
    pub exact: f64,
    pub reconstructed: f64,
    /// `|X(N) − reconstruction|`.
    pub residual: f64,
    /// The residual divided by `N^{log_q R}·max(1, log_q N)^p` with `p` the
    /// error log power.
    pub normalized: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub rows: Vec<ResidualRow>,
    /// `(j, max normalized residual over q^j ≤ N < q^{j+1})`.
    pub envelope: Vec<(u32, f64)>,
    /// The envelope over the later half of the blocks stays within twice its
    /// maximum over the earlier half.
    pub bounded: bool,
}

/// The expansion evaluated with every coefficient of `table` for the kept
/// terms, truncated at `|ℓ| ≤ l_max`.
pub fn reconstruct(
    skeleton: &ExpansionSkeleton,
    table: &FourierTable,
    l_max: i64,
    n: u64,
) -> Result<Complex64, FourierError> {
    let nf = n as f64;
    let lq = nf.ln() / (skeleton.q as f64).ln();
    let mut acc = Complex64::new(0.0, 0.0);
    for t in &skeleton.terms {
        let scale = nf.powf(t.exponent.re) * Complex64::from_polar(1.0, t.exponent.im * nf.ln());
        for k in 0..t.multiplicity {
            acc += scale * lq.powi(k as i32) * reconstruct_fluctuation(table, t.lambda, k, l_max, lq)?;
        }
    }
    if let Some(c) = skeleton.constant {
        acc += c;
    }
    if let Some((m, [re, im])) = skeleton.theta_term {
        acc += Complex64::new(re, im) * lq.powi(m as i32);
    }
    Ok(acc)
}

/// Compares `X(N)` with [`reconstruct`] over `n_grid`.
pub fn residual_decay_check(
    rep: &LinearRepresentation,
    skeleton: &ExpansionSkeleton,
    table: &FourierTable,
    l_max: i64,
    n_grid: &[u64],
) -> Result<ResidualReport, FourierError> {
    let q = skeleton.q as f64;
    let exponent = skeleton.error_exponent.unwrap_or(skeleton.r_upper.ln() / q.ln());
    let rows = n_grid
        .par_iter()
        .filter(|&&n| n > 0)
        .map(|&n| {
            let nf = n as f64;
            let exact = rep.summatory_scalar(n).to_c64();
            let rec = reconstruct(skeleton, table, l_max, n)?;
            let residual = (exact - rec).norm();
            let norm = nf.powf(exponent) * (nf.ln() / q.ln()).max(1.0).powi(skeleton.error_log_power as i32);
            Ok(ResidualRow {
                n,
                exact: exact.re,
                reconstructed: rec.re,
                residual,
                normalized: residual / norm,
            })
        })
        .collect::<Result<Vec<_>, FourierError>>()?;
    let mut envelope: Vec<(u32, f64)> = Vec::new();
    for r in &rows {
        let j = (r.n as f64).log(q).floor() as u32;
        match envelope.iter_mut().find(|e| e.0 == j) {
            Some(e) => e.1 = e.1.max(r.normalized),
            None => envelope.push((j, r.normalized)),
        }
    }
    envelope.sort_by_key(|e| e.0);
    let half = envelope.len().div_ceil(2);
    let early = envelope[..half].iter().map(|e| e.1).fold(0.0, f64::max);
    let late = envelope[half..].iter().map(|e| e.1).fold(0.0, f64::max);
    Ok(ResidualReport {
        rows,
        envelope,
        bounded: late <= 2.0 * early + 1e-12,
    })
}

/// `⌊q^{j + i/steps}⌋` for `a ≤ j < b` and `0 ≤ i < steps`.
pub fn log_grid(q: u64, a: u32, b: u32, steps: u32) -> Vec<u64> {
    let mut out: Vec<u64> = (a..b)
        .flat_map(|j| (0..steps).map(move |i| (q as f64).powf(j as f64 + i as f64 / steps as f64).floor() as u64))
        .collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pascal;
    use crate::registry::{binary_sum_of_digits, constant_one};

    #[test]
    fn sum_of_digits_skeleton() {
        let s = skeleton_for(&binary_sum_of_digits()).unwrap();
        assert_eq!(s.terms.len(), 1);
        assert_eq!(s.terms[0].multiplicity, 2);
        assert!((s.terms[0].exponent - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(s.error_exponent.is_none());
        assert!(s.annihilation_ok());
    }

    #[test]
    fn pascal_skeleton() {
        let s = skeleton_for(&pascal::representation()).unwrap();
        assert_eq!(s.terms.len(), 1);
        assert!((s.terms[0].exponent.re - pascal::kappa()).abs() < 1e-12);
        assert_eq!(s.boundary.len(), 2);
        assert_eq!(s.error_exponent, Some(1.0));
        assert_eq!(s.error_log_power, 1);
        assert!(s.uncertain_band.is_empty());
        assert!(s.annihilation_ok());
    }

    #[test]
    fn constant_one_is_reproduced_exactly() {
        let rep = constant_one();
        let s = skeleton_for(&rep).unwrap();
        assert_eq!(s.terms.len(), 1);
        assert!(s.error_exponent.is_none());
        let mut table = FourierTable::new(2);
        table.insert(Complex64::new(2.0, 0.0), 0, 0, Complex64::new(1.0, 0.0), 0.0);
        let report = residual_decay_check(&rep, &s, &table, 0, &log_grid(2, 0, 12, 4)).unwrap();
        assert!(report.rows.iter().all(|r| r.residual == 0.0));
        assert!(report.bounded);
    }

    #[test]
    fn matrix_mode_constants() {
        // f(n) = identity-like products with eigenvalue 1 of C = 2·A
        let rep = LinearRepresentation::try_new(
            2,
            vec![
                crate::matrix::ExactMatrix::from_i64_rows(&[&[1, 0], &[0, 0]]),
                crate::matrix::ExactMatrix::from_i64_rows(&[&[0, 0], &[0, 1]]),
            ],
            vec![crate::Scalar::one(), crate::Scalar::one()],
            Some(vec![crate::Scalar::one(), crate::Scalar::one()]),
            Mode::Matrix,
        )
        .unwrap();
        let s = skeleton_for(&rep).unwrap();
        assert!(s.constant.is_some());
        assert!(s.annihilation_ok());
    }

    #[test]
    fn grid_points() {
        assert_eq!(log_grid(2, 3, 5, 1), vec![8, 16]);
        assert_eq!(log_grid(2, 4, 5, 2), vec![16, 22]);
    }
}

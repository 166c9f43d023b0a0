//! Fourier coefficients of the periodic fluctuations of summatory functions.
//!
//! For an eigenvalue `λ` of `C` with `|λ| > max(R, 1/q)` the fluctuation
//! `Φ_{λk}` multiplying `N^{log_q λ}(log_q N)^k` has the coefficients
//!
//! ```text
//! φ_{λkℓ} = (log q)^k / k! · Res_{s=s_ℓ} (x(0) + 𝒳(s)) (s − s_ℓ)^k / s,
//! s_ℓ = log_q λ + 2ℓπi / log q,
//! ```
//!
//! which are computed here as contour integrals around `s_ℓ`, so that poles
//! of any order are handled alike.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dirichlet::{DirichletError, DirichletEvaluator, EvaluatorConfig, RepSystem};
use crate::io::ser_complex;
use crate::linrep::{cdot, LinearRepresentation};
use crate::matrix::CVector;
use crate::spectral::{spectrum, SpectralError, SpectralReport, DEFAULT_TOL};

/// Moduli within this distance of the growth bound count as on the boundary.
pub const BOUNDARY_TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FourierError {
    #[error("radius collision: the circle |s - {center}| = {radius} comes within {distance:e} of {obstacle}")]
    RadiusCollision {
        center: Complex64,
        radius: f64,
        obstacle: String,
        distance: f64,
    },
    #[error("not dominant: |λ| = {modulus} does not exceed max(R, 1/q) = {bound}")]
    NotDominant { modulus: f64, bound: f64 },
    #[error("{0} is not an eigenvalue of C")]
    NotAnEigenvalue(Complex64),
    #[error("power k = {k} is not below the multiplicity m(λ) = {multiplicity}")]
    PowerOutOfRange { k: usize, multiplicity: usize },
    #[error("missing coefficient for λ = {lambda}, k = {k}, ℓ = {l}")]
    MissingCoefficient { lambda: Complex64, k: usize, l: i64 },
    #[error("period mismatch: expected the {p} eigenvalues qζ with ζ^{p} = 1, found {found:?}")]
    PeriodMismatch { p: usize, found: Vec<Complex64> },
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Serialize)]
pub struct FourierConfig {
    /// Absolute target for each coefficient.
    pub target_abs_error: f64,
    /// Contour radius; chosen from the pole geometry when absent.
    pub radius: Option<f64>,
    pub nodes_start: usize,
    pub nodes_max: usize,
    /// Minimal clearance between the contour and any singularity.
    pub delta: f64,
}

impl Default for FourierConfig {
    fn default() -> Self {
        FourierConfig {
            target_abs_error: 1e-8,
            radius: None,
            nodes_start: 64,
            nodes_max: 8192,
            delta: 1e-3,
        }
    }
}

/// `(1/2πi) ∮_{|s−c|=r} g(s)(s−c)^k / s ds` by the trapezoid rule. The node
/// count doubles from `nodes_start` until two successive values differ by
/// less than `0.1·target`; the error estimate is that difference plus the
/// propagated error of `g`.
pub fn contour_residue<G, E>(
    g: G,
    center: Complex64,
    k: usize,
    radius: f64,
    target: f64,
    nodes_start: usize,
    nodes_max: usize,
) -> Result<(Complex64, f64), E>
where
    G: Fn(Complex64) -> Result<(Complex64, f64), E> + Sync,
    E: Send,
{
    // returns (Σ terms, Σ propagated errors) over nodes j·2π/m + offset
    let sweep = |m: usize, offset: f64, stride: usize| -> Result<(Complex64, f64), E> {
        let parts: Vec<(Complex64, f64)> = (0..m / stride)
            .into_par_iter()
            .map(|j| {
                let theta = 2.0 * PI * (j * stride) as f64 / m as f64 + offset;
                let w = Complex64::from_polar(radius, theta);
                let s = center + w;
                let (val, err) = g(s)?;
                let factor = w.powu(k as u32 + 1) / s;
                Ok((val * factor, err * factor.norm()))
            })
            .collect::<Result<_, E>>()?;
        Ok(parts
            .iter()
            .fold((Complex64::new(0.0, 0.0), 0.0), |(a, b), (x, y)| (a + x, b + y)))
    };
    let mut m = nodes_start.max(4);
    let (mut sum, mut err_sum) = sweep(m, 0.0, 1)?;
    let mut value = sum / m as f64;
    loop {
        let (add, add_err) = sweep(2 * m, PI / m as f64, 2)?;
        sum += add;
        err_sum += add_err;
        m *= 2;
        let next = sum / m as f64;
        let change = (next - value).norm();
        value = next;
        if change < 0.1 * target || 2 * m > nodes_max {
            return Ok((value, change + err_sum / m as f64));
        }
    }
}

/// Obstacles for a contour around `center`: the nearest other lattice point
/// `b + 2πiℓ'/log q` over the pole bases, the point `s = 0` and the
/// abscissa `Re s = a` of the continuation domain.
pub fn obstacles(center: Complex64, pole_bases: &[Complex64], q: f64, abscissa: f64) -> Vec<(String, f64)> {
    let spacing = 2.0 * PI / q.ln();
    let mut out = Vec::new();
    let mut nearest: Option<(Complex64, f64)> = None;
    for &b in pole_bases {
        let l0 = ((center.im - b.im) / spacing).round() as i64;
        for l in l0 - 1..=l0 + 1 {
            let p = b + Complex64::new(0.0, l as f64 * spacing);
            let d = (p - center).norm();
            if d > 1e-9 && nearest.is_none_or(|(_, best)| d < best) {
                nearest = Some((p, d));
            }
        }
    }
    if let Some((p, d)) = nearest {
        out.push((format!("pole site {p}"), d));
    }
    if center.norm() > 1e-9 {
        out.push(("s = 0".to_string(), center.norm()));
    }
    out.push((format!("the abscissa Re s = {abscissa}"), center.re - abscissa));
    out
}

/// Half the distance to the nearest obstacle, at most a quarter of the
/// lattice spacing `2π/log q`.
pub fn default_radius(obstacles: &[(String, f64)], q: f64) -> f64 {
    let nearest = obstacles.iter().map(|o| o.1).fold(f64::INFINITY, f64::min);
    (0.5 * nearest).min(0.5 * PI / q.ln())
}

/// Fails with a radius collision if the circle of `radius` comes closer than
/// `delta` to an obstacle.
pub fn check_radius(center: Complex64, radius: f64, obstacles: &[(String, f64)], delta: f64) -> Result<(), FourierError> {
    for (name, d) in obstacles {
        if d - radius < delta {
            return Err(FourierError::RadiusCollision {
                center,
                radius,
                obstacle: name.clone(),
                distance: d - radius,
            });
        }
    }
    Ok(())
}

/// `log_q λ + 2ℓπi/log q` with the principal logarithm.
pub fn pole_site(lambda: Complex64, q: u64, l: i64) -> Complex64 {
    let lq = (q as f64).ln();
    lambda.ln() / lq + Complex64::new(0.0, 2.0 * PI * l as f64 / lq)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// Spectrum, growth bound and Dirichlet evaluator of one representation,
/// shared by all coefficients computed for it.
pub struct FourierContext {
    rep: LinearRepresentation,
    report: SpectralReport,
    evaluator: DirichletEvaluator<RepSystem>,
    config: FourierConfig,
    output: CVector,
    x0: Complex64,
}

impl FourierContext {
    pub fn new(rep: &LinearRepresentation, config: FourierConfig) -> Result<Self, FourierError> {
        let report = spectrum(&rep.c_matrix(), DEFAULT_TOL)?;
        let system = RepSystem::new(rep)?;
        let evaluator = DirichletEvaluator::new(
            system,
            EvaluatorConfig {
                target_abs_error: config.target_abs_error * 1e-2,
                ..EvaluatorConfig::default()
            },
        );
        let output = rep.output_complex();
        let x0 = cdot(&output, &rep.v0_complex());
        Ok(FourierContext {
            rep: rep.clone(),
            report,
            evaluator,
            config,
            output,
            x0,
        })
    }

    pub fn representation(&self) -> &LinearRepresentation {
        &self.rep
    }

    pub fn spectrum(&self) -> &SpectralReport {
        &self.report
    }

    pub fn r_upper(&self) -> f64 {
        self.evaluator.system().r_upper
    }

    pub fn config(&self) -> &FourierConfig {
        &self.config
    }

    /// `x(0) + 𝒳(s)` with its error bound.
    pub fn generating_function(&self, s: Complex64) -> Result<(Complex64, f64), DirichletError> {
        let v = self.evaluator.evaluate_full(s)?;
        let e_norm: f64 = self.output.iter().map(|z| z.norm()).sum();
        Ok((self.x0 + cdot(&self.output, &v.value), e_norm * v.abs_error_bound))
    }

    /// Eigenvalues `λ` of `C` with `|λ| > max(R, 1/q)`, by decreasing modulus.
    pub fn dominant_eigenvalues(&self) -> Vec<(Complex64, usize)> {
        let bound = self.dominance_bound();
        self.report
            .eigenvalues
            .iter()
            .filter(|e| e.value.norm() > bound + BOUNDARY_TIE)
            .map(|e| (e.value, e.max_jordan))
            .collect()
    }

    fn dominance_bound(&self) -> f64 {
        self.r_upper().max(1.0 / self.rep.q() as f64)
    }

    /// `(φ_{λkℓ}, error estimate)`.
    pub fn coefficient(&self, lambda: Complex64, k: usize, l: i64) -> Result<(Complex64, f64), FourierError> {
        self.coefficient_with_radius(lambda, k, l, self.config.radius)
    }

    pub fn coefficient_with_radius(
        &self,
        lambda: Complex64,
        k: usize,
        l: i64,
        radius: Option<f64>,
    ) -> Result<(Complex64, f64), FourierError> {
        let idx = self
            .report
            .find(lambda, 1e-6 * lambda.norm().max(1.0))
            .ok_or(FourierError::NotAnEigenvalue(lambda))?;
        let eig = &self.report.eigenvalues[idx];
        let bound = self.dominance_bound();
        if eig.value.norm() <= bound + BOUNDARY_TIE {
            return Err(FourierError::NotDominant {
                modulus: eig.value.norm(),
                bound,
            });
        }
        if k >= eig.max_jordan {
            return Err(FourierError::PowerOutOfRange {
                k,
                multiplicity: eig.max_jordan,
            });
        }
        let q = self.rep.q();
        let center = pole_site(eig.value, q, l);
        let system = self.evaluator.system();
        let obs = obstacles(
            center,
            &crate::dirichlet::DirichletSystem::pole_bases(system),
            q as f64,
            crate::dirichlet::DirichletSystem::exponent(system),
        );
        let r = radius.unwrap_or_else(|| default_radius(&obs, q as f64));
        check_radius(center, r, &obs, self.config.delta)?;
        let scale = (q as f64).ln().powi(k as i32) / factorial(k);
        let (res, err) = contour_residue(
            |s| self.generating_function(s),
            center,
            k,
            r,
            self.config.target_abs_error / scale,
            self.config.nodes_start,
            self.config.nodes_max,
        )?;
        Ok((res * scale, err * scale))
    }

    /// Coefficients `φ_{λkℓ}` for `|ℓ| ≤ L`, computed in parallel.
    pub fn table(&self, lambda: Complex64, k: usize, l_max: i64) -> Result<FourierTable, FourierError> {
        let mut table = FourierTable::new(self.rep.q());
        self.extend_table(&mut table, lambda, k, -l_max..=l_max)?;
        Ok(table)
    }

    pub fn extend_table(
        &self,
        table: &mut FourierTable,
        lambda: Complex64,
        k: usize,
        range: std::ops::RangeInclusive<i64>,
    ) -> Result<(), FourierError> {
        let ls: Vec<i64> = range.collect();
        let values = ls
            .par_iter()
            .map(|&l| self.coefficient(lambda, k, l))
            .collect::<Result<Vec<_>, _>>()?;
        for (l, (phi, error)) in ls.into_iter().zip(values) {
            table.insert(lambda, k, l, phi, error);
        }
        Ok(())
    }
}

/// `φ_{λkℓ}` for a single coefficient; see [`FourierContext`] for repeated
/// use on the same representation.
pub fn fourier_coefficient(
    rep: &LinearRepresentation,
    lambda: Complex64,
    k: usize,
    l: i64,
    config: FourierConfig,
) -> Result<(Complex64, f64), FourierError> {
    FourierContext::new(rep, config)?.coefficient(lambda, k, l)
}

#[derive(Debug, Clone, Serialize)]
pub struct FourierEntry {
    #[serde(serialize_with = "ser_complex")]
    pub lambda: Complex64,
    pub k: usize,
    pub l: i64,
    #[serde(serialize_with = "ser_complex")]
    pub phi: Complex64,
    pub error: f64,
}

/// Coefficients keyed by eigenvalue, power and frequency. Eigenvalues are
/// identified up to `1e-9` relative distance.
#[derive(Debug, Clone, Serialize)]
pub struct FourierTable {
    pub q: u64,
    /// `2π / log q`.
    pub spacing: f64,
    entries: Vec<FourierEntry>,
}

impl FourierTable {
    pub fn new(q: u64) -> Self {
        FourierTable {
            q,
            spacing: 2.0 * PI / (q as f64).ln(),
            entries: Vec::new(),
        }
    }

    pub fn entries(&self) -> &[FourierEntry] {
        &self.entries
    }

    fn position(&self, lambda: Complex64, k: usize, l: i64) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.k == k && e.l == l && same_eigenvalue(e.lambda, lambda))
    }

    /// Inserts or replaces an entry.
    pub fn insert(&mut self, lambda: Complex64, k: usize, l: i64, phi: Complex64, error: f64) {
        let entry = FourierEntry { lambda, k, l, phi, error };
        match self.position(lambda, k, l) {
            Some(i) => self.entries[i] = entry,
            None => self.entries.push(entry),
        }
    }

    pub fn get(&self, lambda: Complex64, k: usize, l: i64) -> Option<&FourierEntry> {
        self.position(lambda, k, l).map(|i| &self.entries[i])
    }

    /// Distinct `(λ, k)` pairs in insertion order.
    pub fn terms(&self) -> Vec<(Complex64, usize)> {
        let mut out: Vec<(Complex64, usize)> = Vec::new();
        for e in &self.entries {
            if !out.iter().any(|&(z, k)| k == e.k && same_eigenvalue(z, e.lambda)) {
                out.push((e.lambda, e.k));
            }
        }
        out
    }

    /// Entries of one `(λ, k)` sorted by `ℓ`.
    pub fn series(&self, lambda: Complex64, k: usize) -> Vec<&FourierEntry> {
        let mut v: Vec<&FourierEntry> = self
            .entries
            .iter()
            .filter(|e| e.k == k && same_eigenvalue(e.lambda, lambda))
            .collect();
        v.sort_by_key(|e| e.l);
        v
    }

    /// Adds `φ_{λ̄,k,−ℓ} = conj φ_{λkℓ}` wherever missing; valid for real
    /// representations.
    pub fn with_conjugates(mut self) -> Self {
        let extra: Vec<FourierEntry> = self
            .entries
            .iter()
            .filter(|e| self.get(e.lambda.conj(), e.k, -e.l).is_none())
            .map(|e| FourierEntry {
                lambda: e.lambda.conj(),
                k: e.k,
                l: -e.l,
                phi: e.phi.conj(),
                error: e.error,
            })
            .collect();
        for e in extra {
            self.insert(e.lambda, e.k, e.l, e.phi, e.error);
        }
        self
    }

    /// Largest `|φ_{λkℓ} − conj φ_{λ̄k,−ℓ}|` minus the two error estimates,
    /// over all pairs present; non-positive when symmetry holds.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        self.entries
            .iter()
            .filter_map(|e| {
                self.get(e.lambda.conj(), e.k, -e.l)
                    .map(|f| (e.phi - f.phi.conj()).norm() - e.error - f.error)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn same_eigenvalue(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-9 * a.norm().max(1.0)
}

/// `Φ̂(u) = Σ_{|ℓ|≤L} φ_{λkℓ} e^{2πiℓu}`.
pub fn reconstruct_fluctuation(
    table: &FourierTable,
    lambda: Complex64,
    k: usize,
    l_max: i64,
    u: f64,
) -> Result<Complex64, FourierError> {
    let mut acc = Complex64::new(0.0, 0.0);
    for l in -l_max..=l_max {
        let e = table
            .get(lambda, k, l)
            .ok_or(FourierError::MissingCoefficient { lambda, k, l })?;
        acc += e.phi * Complex64::from_polar(1.0, 2.0 * PI * l as f64 * frac(u));
    }
    Ok(acc)
}

fn frac(u: f64) -> f64 {
    u - u.floor()
}

/// Coefficients `ψ_m` of a `p`-periodic fluctuation
/// `Ψ(u) = Σ_m ψ_m e^{2πimu/p}` in `u = log_q N`.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicTable {
    pub q: u64,
    pub p: usize,
    pub k: usize,
    /// Sorted by `m`.
    pub entries: Vec<PeriodicEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodicEntry {
    pub m: i64,
    #[serde(serialize_with = "ser_complex")]
    pub psi: Complex64,
    pub error: f64,
}

impl PeriodicTable {
    pub fn get(&self, m: i64) -> Option<Complex64> {
        self.entries
            .binary_search_by_key(&m, |e| e.m)
            .ok()
            .map(|i| self.entries[i].psi)
    }

    pub fn evaluate(&self, u: f64) -> Complex64 {
        let p = self.p as f64;
        self.entries
            .iter()
            .map(|e| e.psi * Complex64::from_polar(1.0, 2.0 * PI * e.m as f64 * u / p))
            .sum()
    }
}

/// Merges the fluctuations of the eigenvalues `qζ`, `ζ^p = 1`, into one
/// `p`-periodic function: writing `log_q(qζ) = 1 + 2πij/(p log q)` with the
/// principal logarithm, `φ_{qζ,k,ℓ}` becomes `ψ_{ℓp+j}`.
pub fn transducer_fourier_regroup(table: &FourierTable, k: usize, p: usize) -> Result<PeriodicTable, FourierError> {
    let q = table.q as f64;
    let present: Vec<Complex64> = table
        .terms()
        .into_iter()
        .filter(|&(z, kk)| kk == k && (z.norm() / q - 1.0).abs() < 1e-8)
        .map(|t| t.0)
        .collect();
    let mismatch = || FourierError::PeriodMismatch {
        p,
        found: present.clone(),
    };
    if p == 0 || present.len() != p {
        return Err(mismatch());
    }
    let mut out = BTreeMap::new();
    let mut seen = vec![false; p];
    for &z in &present {
        let jf = z.arg() * p as f64 / (2.0 * PI);
        let j = jf.round();
        if (jf - j).abs() > 1e-6 {
            return Err(mismatch());
        }
        let j = j as i64;
        let slot = j.rem_euclid(p as i64) as usize;
        if seen[slot] {
            return Err(mismatch());
        }
        seen[slot] = true;
        for e in table.series(z, k) {
            out.insert(e.l * p as i64 + j, (e.phi, e.error));
        }
    }
    Ok(PeriodicTable {
        q: table.q,
        p,
        k,
        entries: out
            .into_iter()
            .map(|(m, (psi, error))| PeriodicEntry { m, psi, error })
            .collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FluctuationSample {
    pub n: u64,
    /// `{log_q N}`.
    pub u: f64,
    #[serde(serialize_with = "ser_complex")]
    pub y: Complex64,
}

/// `(X(N) − other terms) / (N^{log_q λ} (log_q N)^k)` for each `N` in
/// `samples`, where the other terms are the reconstructions (with all
/// frequencies present) of every `(λ', k') ≠ (λ, k)` in `subtract`.
pub fn empirical_fluctuation(
    rep: &LinearRepresentation,
    lambda: Complex64,
    k: usize,
    samples: &[u64],
    subtract: &FourierTable,
) -> Vec<FluctuationSample> {
    let q = rep.q() as f64;
    let others: Vec<(Complex64, usize)> = subtract
        .terms()
        .into_iter()
        .filter(|&(z, kk)| !(kk == k && same_eigenvalue(z, lambda)))
        .collect();
    let term = |z: Complex64, kk: usize, n: f64| {
        let lq = n.ln() / q.ln();
        (z.ln() * lq).exp() * lq.powi(kk as i32)
    };
    samples
        .par_iter()
        .map(|&n| {
            let nf = n as f64;
            let lq = nf.ln() / q.ln();
            let mut y = rep.summatory_scalar(n).to_c64();
            for &(z, kk) in &others {
                let phi: Complex64 = subtract
                    .series(z, kk)
                    .iter()
                    .map(|e| e.phi * Complex64::from_polar(1.0, 2.0 * PI * e.l as f64 * lq))
                    .sum();
                y -= term(z, kk, nf) * phi;
            }
            FluctuationSample {
                n,
                u: frac(lq),
                y: y / term(lambda, k, nf),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{binary_sum_of_digits, constant_one};
    use std::f64::consts::LN_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn residue_of_simple_and_double_poles() {
        // g(s) = 1/(s−1)² + 3/(s−1), residue of g(s)·(s−1)/s at 1 is 1
        let g = |s: Complex64| -> Result<(Complex64, f64), ()> {
            Ok(((s - 1.0).powi(-2) + 3.0 / (s - 1.0), 0.0))
        };
        let (r0, _) = contour_residue(g, c(1.0, 0.0), 0, 0.5, 1e-14, 64, 8192).unwrap();
        let (r1, _) = contour_residue(g, c(1.0, 0.0), 1, 0.5, 1e-14, 64, 8192).unwrap();
        // Res g/s = d/ds(1/s) + 3 = −1 + 3
        assert!((r0 - c(2.0, 0.0)).norm() < 1e-13, "{r0}");
        assert!((r1 - c(1.0, 0.0)).norm() < 1e-13, "{r1}");
    }

    #[test]
    fn delange_constant() {
        let rep = binary_sum_of_digits();
        let config = FourierConfig {
            target_abs_error: 1e-12,
            ..FourierConfig::default()
        };
        let ctx = FourierContext::new(&rep, config).unwrap();
        let (phi, err) = ctx.coefficient(c(2.0, 0.0), 1, 0).unwrap();
        assert!((phi - c(0.5, 0.0)).norm() < 1e-10, "{phi} ± {err}");
        // Φ_21 is constant
        let (phi1, _) = ctx.coefficient(c(2.0, 0.0), 1, 1).unwrap();
        assert!(phi1.norm() < 1e-10, "{phi1}");
        // mean of Φ_20: log₂√π − 1/(2 log 2) − 1/4
        let mean = PI.log2() / 2.0 - 1.0 / (2.0 * LN_2) - 0.25;
        let (phi0, _) = ctx.coefficient(c(2.0, 0.0), 0, 0).unwrap();
        assert!((phi0 - c(mean, 0.0)).norm() < 1e-10, "{phi0} vs {mean}");
    }

    #[test]
    fn radius_independence() {
        let ctx = FourierContext::new(&binary_sum_of_digits(), FourierConfig::default()).unwrap();
        for l in [0, 1, 3] {
            let (a, ea) = ctx.coefficient_with_radius(c(2.0, 0.0), 0, l, Some(0.4)).unwrap();
            let (b, eb) = ctx.coefficient_with_radius(c(2.0, 0.0), 0, l, Some(0.2)).unwrap();
            assert!((a - b).norm() <= 2.0 * (ea + eb) + 1e-12, "ℓ = {l}: {a} vs {b}");
        }
    }

    #[test]
    fn conjugate_symmetry_of_real_data() {
        let ctx = FourierContext::new(&binary_sum_of_digits(), FourierConfig::default()).unwrap();
        let table = ctx.table(c(2.0, 0.0), 0, 3).unwrap();
        assert!(table.conjugate_symmetry_defect() <= 0.0);
        // the mean of the trigonometric polynomial over a grid is φ₀
        let n = 1024;
        let mean: Complex64 = (0..n)
            .map(|i| reconstruct_fluctuation(&table, c(2.0, 0.0), 0, 3, i as f64 / n as f64).unwrap())
            .sum::<Complex64>()
            / n as f64;
        assert!((mean - table.get(c(2.0, 0.0), 0, 0).unwrap().phi).norm() < 1e-8);
    }

    #[test]
    fn refusals() {
        let ctx = FourierContext::new(&binary_sum_of_digits(), FourierConfig::default()).unwrap();
        assert!(matches!(
            ctx.coefficient(c(2.0, 0.0), 2, 0),
            Err(FourierError::PowerOutOfRange { .. })
        ));
        assert!(matches!(
            ctx.coefficient(c(3.0, 0.0), 0, 0),
            Err(FourierError::NotAnEigenvalue(_))
        ));
        assert!(matches!(
            ctx.coefficient_with_radius(c(2.0, 0.0), 0, 0, Some(0.9995)),
            Err(FourierError::RadiusCollision { .. })
        ));
        let one = FourierContext::new(&constant_one(), FourierConfig::default()).unwrap();
        // C = (2); R is 1 + ε so 2 is dominant, while 1 is not an eigenvalue
        assert!(one.coefficient(c(2.0, 0.0), 0, 0).is_ok());
    }

    #[test]
    fn constant_fluctuation_of_the_identity() {
        let rep = constant_one();
        let ctx = FourierContext::new(&rep, FourierConfig::default()).unwrap();
        let (phi, _) = ctx.coefficient(c(2.0, 0.0), 0, 0).unwrap();
        assert!((phi - c(1.0, 0.0)).norm() < 1e-8, "{phi}");
        let samples = empirical_fluctuation(&rep, c(2.0, 0.0), 0, &[1, 7, 100, 12345], &FourierTable::new(2));
        for s in samples {
            assert!((s.y - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn regrouping_by_brute_force() {
        let mut table = FourierTable::new(2);
        let coeffs = |j: i64, l: i64| c(0.1 * j as f64 + 0.01 * l as f64, 0.02 * l as f64);
        for l in -3..=3 {
            table.insert(c(2.0, 0.0), 0, l, coeffs(0, l), 0.0);
            table.insert(c(-2.0, 0.0), 0, l, coeffs(1, l), 0.0);
        }
        let periodic = transducer_fourier_regroup(&table, 0, 2).unwrap();
        for i in 0..20 {
            let u = 0.37 * i as f64;
            // Σ_ζ N^{log_2(2ζ)} Φ_ζ(u) / N with N = 2^u
            let direct: Complex64 = [(c(2.0, 0.0), 0.0), (c(-2.0, 0.0), 0.5)]
                .iter()
                .map(|&(z, shift)| {
                    Complex64::from_polar(1.0, 2.0 * PI * shift * u)
                        * reconstruct_fluctuation(&table, z, 0, 3, u).unwrap()
                })
                .sum();
            assert!((direct - periodic.evaluate(u)).norm() < 1e-12);
        }
        assert_eq!(periodic.get(3), Some(coeffs(1, 1)));
        let single = transducer_fourier_regroup(&table, 0, 1);
        assert!(matches!(single, Err(FourierError::PeriodMismatch { .. })));
    }

    #[test]
    fn trivial_regrouping() {
        let mut table = FourierTable::new(3);
        for l in -2..=2 {
            table.insert(c(3.0, 0.0), 1, l, c(l as f64, 1.0), 1e-9);
        }
        let periodic = transducer_fourier_regroup(&table, 1, 1).unwrap();
        for e in table.series(c(3.0, 0.0), 1) {
            assert_eq!(periodic.get(e.l), Some(e.phi));
        }
    }
}

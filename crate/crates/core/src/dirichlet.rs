//! Meromorphic continuation of vector Dirichlet series `Σ_{n≥n₀} n^{-s} v(n)`
//! through functional equations of the form
//!
//! ```text
//! M(s) V(s) = H(s) + Σ_j W_j(s) Σ_{k≥1} binom(−s, k) β_j^k V(s + k)
//! ```
//!
//! where `V = V_{n₀}` is the tail series from `n₀` on, `H` is a finite head
//! sum and the inner sums are shifted Dirichlet series. Values right of the
//! abscissa of absolute convergence come from direct summation or from the
//! trivial bound; values further left are obtained recursively, each level
//! moving `Re s` to the right by at least one.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use serde::Serialize;

use crate::linrep::LinearRepresentation;
use crate::matrix::{max_abs, max_row_sum, CMatrix, CVector};
use crate::spectral::{choose_r, jsr_bounds, spectrum, DEFAULT_EPSILON, DEFAULT_TOL};

const EPS: f64 = f64::EPSILON;

/// Compensated (Neumaier) accumulation of `n^{-s}`-weighted terms with a
/// rounding bound covering both the weights and the summation.
struct TermSum {
    acc: CVector,
    comp: CVector,
    mag: f64,
    eval_err: f64,
    count: usize,
}

impl TermSum {
    fn new(dim: usize) -> Self {
        TermSum {
            acc: CVector::zeros(dim),
            comp: CVector::zeros(dim),
            mag: 0.0,
            eval_err: 0.0,
            count: 0,
        }
    }

    /// Adds `v · n^{-s}`.
    fn push(&mut self, v: &CVector, n: usize, s: Complex64) {
        let ln = (n as f64).ln();
        let term = v * (-s * ln).exp();
        let m = max_abs(&term);
        self.mag += m;
        self.eval_err += m * (s.norm() * ln + 8.0) * EPS;
        self.count += 1;
        for (i, x) in term.iter().enumerate() {
            let a = self.acc[i];
            let t = a + x;
            let fix = |a: f64, x: f64, t: f64| if a.abs() >= x.abs() { (a - t) + x } else { (x - t) + a };
            self.comp[i] += Complex64::new(fix(a.re, x.re, t.re), fix(a.im, x.im, t.im));
            self.acc[i] = t;
        }
    }

    fn finish(self, base: CVector) -> (CVector, f64) {
        let n = self.count as f64;
        let err = self.eval_err + (2.0 * EPS + 4.0 * n * EPS * EPS) * (self.mag + max_abs(&base));
        (base + self.acc + self.comp, err)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DirichletError {
    #[error("Re s = {sigma} is not right of the abscissa {abscissa}")]
    OutOfDomain { sigma: f64, abscissa: f64 },
    #[error("near-pole: s = {s} is within {distance:e} of the pole site {pole}")]
    NearPole {
        s: Complex64,
        pole: Complex64,
        distance: f64,
    },
    #[error("ill-conditioned: condition number {cond:e} at s = {s}")]
    IllConditioned { s: Complex64, cond: f64 },
    #[error("no k0 <= {k0_max} satisfies the shift-sum condition at s = {s}")]
    ShiftCondition { s: Complex64, k0_max: usize },
    #[error("direct summation needs {needed} terms, more than the limit {limit}")]
    DirectBudget { needed: f64, limit: usize },
    #[error("n0 = {n0} needs coefficients beyond the available {limit}")]
    CoefficientRange { n0: usize, limit: usize },
    #[error("spectral analysis failed: {0}")]
    Spectral(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluatorConfig {
    /// Truncation start; raised automatically for large `|Im s|`.
    pub n0: usize,
    pub target_abs_error: f64,
    /// Defaults to `a + 3` with `a` the growth exponent of the coefficients.
    pub sigma_direct: Option<f64>,
    pub k0_max: usize,
    /// Minimal distance in the `s`-plane to a pole site.
    pub delta: f64,
    /// Largest number of terms for direct summation inside the recursion.
    pub direct_budget: usize,
}

impl Default for EvaluatorConfig {
    fn default() -> Self {
        EvaluatorConfig {
            n0: 32,
            target_abs_error: 1e-12,
            sigma_direct: None,
            k0_max: 256,
            delta: 1e-3,
            direct_budget: 1 << 15,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DirichletValue {
    #[serde(serialize_with = "crate::io::ser_cvector")]
    pub value: CVector,
    pub abs_error_bound: f64,
    /// Depth of functional-equation recursion (0 for direct or trivial).
    pub depth: usize,
}

/// Tail series with coefficients bounded by `‖v(n)‖_∞ ≤ c·n^a`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailModel {
    pub c: f64,
    pub a: f64,
    pub n0: usize,
}

impl TailModel {
    /// Bound for `‖Σ_{n≥N} n^{-s} v(n)‖_∞` when `Re s > a + 1` (infinite
    /// otherwise).
    pub fn tail_from(&self, big_n: f64, sigma: f64) -> f64 {
        let e = sigma - self.a - 1.0;
        if e <= 0.0 {
            return f64::INFINITY;
        }
        if big_n <= 1.0 {
            return f64::INFINITY;
        }
        self.c * (big_n - 1.0).powf(-e) / e
    }

    /// Bound for `‖V_{n₀}(s)‖_∞`.
    pub fn bound(&self, sigma: f64) -> f64 {
        self.tail_from(self.n0 as f64, sigma)
    }

    /// Bound for `|Σ_{k≥k0} binom(−s,k) β^k V_{n₀}(s+k)|` (geometric
    /// majorant of the binomial series), or `None` when the ratio condition
    /// fails.
    pub fn shift_tail(&self, s: Complex64, beta: f64, k0: usize) -> Option<f64> {
        if beta == 0.0 {
            return Some(0.0);
        }
        let sigma = s.re;
        let kf = k0 as f64;
        if sigma + kf - self.a - 1.0 <= 0.0 {
            return None;
        }
        let w = (s - 1.0) / (kf + 1.0);
        let gamma = if sigma >= 1.0 {
            (Complex64::new(1.0, 0.0) + w).norm()
        } else {
            (1.0 + w.norm_sqr()).sqrt()
        };
        let m = self.n0 as f64 - 1.0;
        let b = beta.abs();
        if gamma * b >= m {
            return None;
        }
        let binom = binomials(s, k0)[k0].norm();
        Some(
            self.c * b.powi(k0 as i32) * m.powf(self.a + 2.0 - sigma - kf) * binom
                / ((sigma + kf - self.a - 1.0) * (m - gamma * b)),
        )
    }
}

/// `binom(−s, k)` for `0 ≤ k ≤ k_max`.
pub fn binomials(s: Complex64, k_max: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(k_max + 1);
    let mut b = Complex64::new(1.0, 0.0);
    out.push(b);
    for k in 1..=k_max {
        b = b * (-s - (k as f64 - 1.0)) / k as f64;
        out.push(b);
    }
    out
}

/// `Σ(s, β, D) = Σ_{1≤k<k0} binom(−s,k) β^k D(s+k)` plus the tail bound for
/// `k ≥ k0`, for a series `D` whose coefficients obey `model`.
pub fn sigma_shift<F>(
    mut series: F,
    model: TailModel,
    s: Complex64,
    beta: f64,
    k0: usize,
) -> Result<DirichletValue, DirichletError>
where
    F: FnMut(Complex64) -> Result<DirichletValue, DirichletError>,
{
    if beta == 0.0 {
        let d = series(s + 1.0)?.value.len();
        return Ok(DirichletValue {
            value: CVector::zeros(d),
            abs_error_bound: 0.0,
            depth: 0,
        });
    }
    let tail = model.shift_tail(s, beta, k0).ok_or(DirichletError::ShiftCondition {
        s,
        k0_max: k0,
    })?;
    let binom = binomials(s, k0);
    let mut acc: Option<CVector> = None;
    let mut err = tail;
    let mut depth = 0;
    for (k, b) in binom.iter().enumerate().take(k0).skip(1) {
        let w = b * beta.powi(k as i32);
        let v = series(s + k as f64)?;
        err += w.norm() * v.abs_error_bound;
        depth = depth.max(v.depth);
        let term = v.value * w;
        acc = Some(match acc {
            Some(a) => a + term,
            None => term,
        });
    }
    let value = match acc {
        Some(a) => a,
        None => CVector::zeros(series(s + 1.0)?.value.len()),
    };
    err += 4.0 * EPS * max_abs(&value) * k0 as f64;
    Ok(DirichletValue {
        value,
        abs_error_bound: err,
        depth,
    })
}

/// One shifted-series term `W(s) Σ_{k≥1} binom(−s,k) β^k V(s+k)`.
#[derive(Debug, Clone)]
pub struct Shift {
    pub beta: f64,
    pub weight: CMatrix,
}

/// A functional equation for the tail series `V_{n₀}`.
pub trait DirichletSystem: Send + Sync {
    fn dim(&self) -> usize;
    /// The radix `q`; pole sites repeat with period `2πi / log q`.
    fn q(&self) -> f64;
    /// Growth exponent `a` with `‖v(n)‖_∞ ≤ c·n^a`.
    fn exponent(&self) -> f64;
    /// The constant `c`.
    fn coefficient_bound(&self) -> f64;
    /// `v(n)` for `0 ≤ n ≤ coefficient_limit()`.
    fn coefficient(&self, n: usize) -> CVector;
    fn coefficient_limit(&self) -> usize;
    /// Largest `|β|` occurring in [`Self::shifts`].
    fn max_beta(&self) -> f64;
    /// Largest index of a coefficient used by [`Self::head`] for given `n₀`.
    fn head_extent(&self, n0: usize) -> usize;
    fn lhs(&self, s: Complex64) -> CMatrix;
    fn head(&self, s: Complex64, n0: usize) -> CVector;
    fn shifts(&self, s: Complex64) -> Vec<Shift>;
    /// Pole sites modulo `2πi / log q`.
    fn pole_bases(&self) -> Vec<Complex64>;
}

/// Nearest pole site of the lattice `base + 2πiℓ/log q`.
pub fn nearest_pole(bases: &[Complex64], q: f64, s: Complex64) -> Option<(Complex64, f64)> {
    let spacing = 2.0 * PI / q.ln();
    bases
        .iter()
        .map(|&b| {
            let l = ((s.im - b.im) / spacing).round();
            let p = b + Complex64::new(0.0, l * spacing);
            (p, (s - p).norm())
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
}

type MemoKey = (u64, u64, u32, usize);

pub struct DirichletEvaluator<S: DirichletSystem> {
    system: S,
    config: EvaluatorConfig,
    sigma_direct: f64,
    /// Cached values with the tolerance they were computed for.
    memo: Mutex<HashMap<MemoKey, (DirichletValue, f64)>>,
}

impl<S: DirichletSystem> DirichletEvaluator<S> {
    pub fn new(system: S, config: EvaluatorConfig) -> Self {
        let sigma_direct = config
            .sigma_direct
            .unwrap_or(system.exponent() + 3.0)
            .max(system.exponent() + 1.0 + 1e-9);
        DirichletEvaluator {
            system,
            config,
            sigma_direct,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn system(&self) -> &S {
        &self.system
    }

    pub fn config(&self) -> &EvaluatorConfig {
        &self.config
    }

    pub fn sigma_direct(&self) -> f64 {
        self.sigma_direct
    }

    /// The truncation start used at `s`: the configured `n₀`, raised so that
    /// `(n₀ − 1) ≥ |s|·max|β| / 2`, which keeps the binomial series from
    /// growing before it decays.
    pub fn n0_for(&self, s: Complex64) -> usize {
        let need = (s.norm() * self.system.max_beta() / 2.0).ceil() as usize + 2;
        self.config.n0.max(need)
    }

    pub fn tail_model(&self, n0: usize) -> TailModel {
        TailModel {
            c: self.system.coefficient_bound(),
            a: self.system.exponent(),
            n0,
        }
    }

    /// `V_{n₀}(s)` with `n₀ = n0_for(s)`.
    pub fn evaluate(&self, s: Complex64) -> Result<(DirichletValue, usize), DirichletError> {
        let n0 = self.n0_for(s);
        let v = self.evaluate_tail(s, n0, self.config.target_abs_error, true)?;
        Ok((v, n0))
    }

    /// `V_{n₀}(s)` for an explicit `n₀`.
    pub fn evaluate_tail(
        &self,
        s: Complex64,
        n0: usize,
        tol: f64,
        allow_direct: bool,
    ) -> Result<DirichletValue, DirichletError> {
        let limit = self.system.coefficient_limit();
        if self.system.head_extent(n0) > limit || n0 < 2 {
            return Err(DirichletError::CoefficientRange { n0, limit });
        }
        let key_base = (s.re.to_bits(), s.im.to_bits());
        self.eval_rec(key_base, s, 0, n0, tol, allow_direct)
    }

    /// `Σ_{n≥1} n^{-s} v(n)`, the full Dirichlet series.
    pub fn evaluate_full(&self, s: Complex64) -> Result<DirichletValue, DirichletError> {
        let (tail, n0) = self.evaluate(s)?;
        self.complete(s, n0, tail)
    }

    /// Like [`Self::evaluate_full`] but always through the functional
    /// equation at the top level.
    pub fn evaluate_full_continuation(&self, s: Complex64) -> Result<DirichletValue, DirichletError> {
        let n0 = self.n0_for(s);
        let tail = self.evaluate_tail(s, n0, self.config.target_abs_error, false)?;
        self.complete(s, n0, tail)
    }

    fn complete(&self, s: Complex64, n0: usize, tail: DirichletValue) -> Result<DirichletValue, DirichletError> {
        let mut sum = TermSum::new(self.system.dim());
        for n in 1..n0 {
            sum.push(&self.system.coefficient(n), n, s);
        }
        let (value, round) = sum.finish(tail.value);
        Ok(DirichletValue {
            value,
            abs_error_bound: tail.abs_error_bound + round,
            depth: tail.depth,
        })
    }

    /// Direct summation `Σ_{n₀≤n≤n_max} n^{-s} v(n)` with the tail bound.
    pub fn direct(&self, s: Complex64, n0: usize, n_max: usize) -> Result<DirichletValue, DirichletError> {
        let limit = self.system.coefficient_limit();
        if n_max > limit {
            return Err(DirichletError::DirectBudget {
                needed: n_max as f64,
                limit,
            });
        }
        let model = self.tail_model(n0);
        let tail = model.tail_from((n_max + 1) as f64, s.re);
        if !tail.is_finite() {
            return Err(DirichletError::OutOfDomain {
                sigma: s.re,
                abscissa: model.a + 1.0,
            });
        }
        let mut sum = TermSum::new(self.system.dim());
        for n in n0..=n_max {
            sum.push(&self.system.coefficient(n), n, s);
        }
        let (value, round) = sum.finish(CVector::zeros(self.system.dim()));
        Ok(DirichletValue {
            value,
            abs_error_bound: tail + round,
            depth: 0,
        })
    }

    /// `‖M(s)V(s) − G(s)‖_∞` with `V` from [`Self::evaluate_tail`] and `G`
    /// assembled from independently evaluated shifted values, together with
    /// the error bounds of both sides.
    pub fn functional_equation_residual(&self, s: Complex64, n0: usize) -> Result<(f64, f64), DirichletError> {
        let tol = self.config.target_abs_error;
        let v = self.evaluate_tail(s, n0, tol, true)?;
        let (g, g_err) = self.assemble_rhs(s, n0, tol, |t, tol_k| {
            // fresh evaluations at a tighter tolerance and without the memo
            let fresh = DirichletEvaluator::new(&self.system, self.config.clone());
            fresh.evaluate_tail(t, n0, tol_k * 0.5, true)
        })?;
        let m = self.system.lhs(s);
        let residual = max_abs(&(&m * &v.value - g));
        Ok((residual, max_row_sum(&m) * v.abs_error_bound + g_err))
    }

    /// `G(s) = M(s)V(s)` assembled from shifted values, with its error bound.
    pub fn rhs(&self, s: Complex64, n0: usize, tol: f64) -> Result<(CVector, f64), DirichletError> {
        let limit = self.system.coefficient_limit();
        if self.system.head_extent(n0) > limit || n0 < 2 {
            return Err(DirichletError::CoefficientRange { n0, limit });
        }
        let key_base = (s.re.to_bits(), s.im.to_bits());
        let mut k = 0u32;
        self.assemble_rhs(s, n0, tol, |_, tol_k| {
            k += 1;
            self.eval_rec(key_base, s, k, n0, tol_k, true)
        })
    }

    fn eval_rec(
        &self,
        key_base: (u64, u64),
        base: Complex64,
        offset: u32,
        n0: usize,
        tol: f64,
        allow_direct: bool,
    ) -> Result<DirichletValue, DirichletError> {
        let s = base + offset as f64;
        let sigma = s.re;
        let a = self.system.exponent();
        let d = self.system.dim();
        if sigma <= a {
            return Err(DirichletError::OutOfDomain { sigma, abscissa: a });
        }
        let model = self.tail_model(n0);
        let trivial = model.bound(sigma);
        if allow_direct && trivial <= tol {
            return Ok(DirichletValue {
                value: CVector::zeros(d),
                abs_error_bound: trivial,
                depth: 0,
            });
        }
        let key = (key_base.0, key_base.1, offset, n0);
        if allow_direct {
            if let Some((hit, asked)) = self.memo.lock().unwrap().get(&key) {
                if hit.abs_error_bound <= tol || *asked <= tol {
                    return Ok(hit.clone());
                }
            }
        }
        let result = if allow_direct && sigma >= self.sigma_direct {
            match self.direct_terms_needed(&model, sigma, tol) {
                Some(n_max) => self.direct(s, n0, n_max)?,
                None => self.functional_step(key_base, base, offset, n0, tol)?,
            }
        } else {
            self.functional_step(key_base, base, offset, n0, tol)?
        };
        if allow_direct {
            let mut memo = self.memo.lock().unwrap();
            let replace = memo
                .get(&key)
                .is_none_or(|(old, _)| old.abs_error_bound > result.abs_error_bound);
            if replace {
                memo.insert(key, (result.clone(), tol));
            }
        }
        Ok(result)
    }

    fn direct_terms_needed(&self, model: &TailModel, sigma: f64, tol: f64) -> Option<usize> {
        let e = sigma - model.a - 1.0;
        let n = 1.0 + (0.5 * tol * e / model.c).powf(-1.0 / e);
        let limit = self.config.direct_budget.min(self.system.coefficient_limit());
        (n.is_finite() && n <= limit as f64).then(|| (n.ceil() as usize).max(model.n0))
    }

    fn functional_step(
        &self,
        key_base: (u64, u64),
        base: Complex64,
        offset: u32,
        n0: usize,
        tol: f64,
    ) -> Result<DirichletValue, DirichletError> {
        let s = base + offset as f64;
        if let Some((pole, distance)) = nearest_pole(&self.system.pole_bases(), self.system.q(), s) {
            if distance < self.config.delta {
                return Err(DirichletError::NearPole { s, pole, distance });
            }
        }
        let m = self.system.lhs(s);
        let lu = m.clone().lu();
        let inv = lu.try_inverse().ok_or(DirichletError::IllConditioned {
            s,
            cond: f64::INFINITY,
        })?;
        let inv_norm = max_row_sum(&inv);
        let cond = max_row_sum(&m) * inv_norm;
        if cond.is_nan() || cond > 1e12 {
            return Err(DirichletError::IllConditioned { s, cond });
        }
        let tol_g = tol / inv_norm;
        let mut depth = 0;
        let mut k = 0u32;
        let (g, g_err) = self.assemble_rhs(s, n0, tol_g, |_, tol_k| {
            k += 1;
            let v = self.eval_rec(key_base, base, offset + k, n0, tol_k, true)?;
            depth = depth.max(v.depth + 1);
            Ok(v)
        })?;
        let value = &inv * &g;
        let err = inv_norm * g_err + 8.0 * EPS * cond * max_abs(&value);
        Ok(DirichletValue {
            value,
            abs_error_bound: err,
            depth: depth.max(1),
        })
    }

    /// `G(s) = H(s) + Σ_j W_j Σ_{1≤k<k0_j} binom(−s,k) β_j^k V(s+k)` and its
    /// error bound. `eval(s + k, tol_k)` is called for `k = 1, 2, …` in
    /// increasing order.
    fn assemble_rhs<F>(&self, s: Complex64, n0: usize, tol_g: f64, mut eval: F) -> Result<(CVector, f64), DirichletError>
    where
        F: FnMut(Complex64, f64) -> Result<DirichletValue, DirichletError>,
    {
        let model = self.tail_model(n0);
        let shifts = self.system.shifts(s);
        let k0_max = self.config.k0_max;
        let budget = 0.5 * tol_g / shifts.len().max(1) as f64;
        let mut k0s = Vec::with_capacity(shifts.len());
        let mut tail_err = 0.0;
        for sh in &shifts {
            let w = max_row_sum(&sh.weight);
            if w == 0.0 || sh.beta == 0.0 {
                k0s.push(1);
                continue;
            }
            let mut found = None;
            for k0 in 1..=k0_max {
                if let Some(t) = model.shift_tail(s, sh.beta, k0) {
                    if w * t <= budget || k0 == k0_max {
                        found = Some((k0, w * t));
                        break;
                    }
                }
            }
            let (k0, t) = found.ok_or(DirichletError::ShiftCondition { s, k0_max })?;
            k0s.push(k0);
            tail_err += t;
        }
        let k_top = k0s.iter().copied().max().unwrap_or(1);
        let binom = binomials(s, k_top);

        let head = self.system.head(s, n0);
        let mut head_mag = 0.0;
        for n in n0..self.system.head_extent(n0).max(n0) {
            let ln = (n as f64).ln();
            head_mag += max_abs(&self.system.coefficient(n)) * (-s.re * ln).exp() * (s.norm() * ln + 8.0);
        }
        let mut g = head;
        let mut err = tail_err + 8.0 * EPS * head_mag;
        let mut sums: Vec<CVector> = vec![CVector::zeros(self.system.dim()); shifts.len()];
        for (k, &b) in binom.iter().enumerate().take(k_top).skip(1) {
            let weight: f64 = shifts
                .iter()
                .zip(&k0s)
                .filter(|(_, &k0)| k < k0)
                .map(|(sh, _)| max_row_sum(&sh.weight) * (b * sh.beta.powi(k as i32)).norm())
                .sum();
            let sub_tol = if weight > 0.0 {
                (0.5 * tol_g / ((k_top - 1) as f64 * weight)).max(8.0 * EPS * model.bound(s.re + k as f64))
            } else {
                f64::INFINITY
            };
            let v = eval(s + k as f64, sub_tol)?;
            err += weight * v.abs_error_bound;
            for ((sh, &k0), acc) in shifts.iter().zip(&k0s).zip(sums.iter_mut()) {
                if k < k0 {
                    *acc += &v.value * (b * sh.beta.powi(k as i32));
                }
            }
        }
        let mut mag = max_abs(&g);
        for (sh, acc) in shifts.iter().zip(&sums) {
            let contrib = &sh.weight * acc;
            mag += max_abs(&contrib);
            g += contrib;
        }
        err += 8.0 * EPS * mag * k_top as f64;
        Ok((g, err))
    }
}

impl<S: DirichletSystem> DirichletSystem for &S {
    fn dim(&self) -> usize {
        (*self).dim()
    }
    fn q(&self) -> f64 {
        (*self).q()
    }
    fn exponent(&self) -> f64 {
        (*self).exponent()
    }
    fn coefficient_bound(&self) -> f64 {
        (*self).coefficient_bound()
    }
    fn coefficient(&self, n: usize) -> CVector {
        (*self).coefficient(n)
    }
    fn coefficient_limit(&self) -> usize {
        (*self).coefficient_limit()
    }
    fn max_beta(&self) -> f64 {
        (*self).max_beta()
    }
    fn head_extent(&self, n0: usize) -> usize {
        (*self).head_extent(n0)
    }
    fn lhs(&self, s: Complex64) -> CMatrix {
        (*self).lhs(s)
    }
    fn head(&self, s: Complex64, n0: usize) -> CVector {
        (*self).head(s, n0)
    }
    fn shifts(&self, s: Complex64) -> Vec<Shift> {
        (*self).shifts(s)
    }
    fn pole_bases(&self) -> Vec<Complex64> {
        (*self).pole_bases()
    }
}

/// Heuristic bound `c` with `‖v(n)‖_∞ ≤ c·n^a`: four times the largest
/// observed ratio for `n ≤ sample`; the flag reports whether the ratio kept
/// growing on `(sample, 2·sample]`.
pub fn estimate_coefficient_bound(table: &[CVector], a: f64, sample: usize) -> (f64, bool) {
    let ratio = |n: usize| max_abs(&table[n]) / (n as f64).powf(a);
    let first = (1..=sample.min(table.len() - 1)).map(ratio).fold(0.0, f64::max);
    let second = (sample + 1..=(2 * sample).min(table.len() - 1))
        .map(ratio)
        .fold(0.0, f64::max);
    (4.0 * first.max(f64::MIN_POSITIVE), second > first)
}

/// The functional equation of a q-linear representation:
/// `(I − q^{-s}C) V(s) = Σ_{n₀≤n<qn₀} n^{-s} v(n)
///   + q^{-s} Σ_{1≤r<q} A_r Σ_{k≥1} binom(−s,k) (r/q)^k V(s+k)`.
#[derive(Debug, Clone)]
pub struct RepSystem {
    q: u64,
    c: CMatrix,
    matrices: Vec<CMatrix>,
    table: Vec<CVector>,
    exponent: f64,
    bound: f64,
    pub bound_binds: bool,
    pub r_upper: f64,
    poles: Vec<Complex64>,
}

/// Coefficients tabulated for representation systems.
pub const REP_TABLE_LEN: usize = 1 << 16;

impl RepSystem {
    /// Computes `R` (JSR bounds with products up to length 8) and the pole
    /// sites from the spectrum of `C`.
    pub fn new(rep: &LinearRepresentation) -> Result<Self, DirichletError> {
        let mats = rep.matrices_complex();
        let jsr = jsr_bounds(&mats, 8, 1_000_000);
        let spec = spectrum(&rep.c_matrix(), DEFAULT_TOL).map_err(|e| DirichletError::Spectral(e.to_string()))?;
        let r = choose_r(&jsr, &spec, DEFAULT_EPSILON);
        let lambdas: Vec<Complex64> = spec.eigenvalues.iter().map(|e| e.value).collect();
        Ok(Self::with_growth(rep, r, &lambdas))
    }

    /// Builds the system for a given growth rate `R` and eigenvalues of `C`.
    pub fn with_growth(rep: &LinearRepresentation, r: f64, eigenvalues: &[Complex64]) -> Self {
        let q = rep.q();
        let lq = (q as f64).ln();
        let exponent = r.ln() / lq;
        let table = rep.vector_table(REP_TABLE_LEN);
        let (bound, bound_binds) = estimate_coefficient_bound(&table, exponent, 4096);
        let poles = eigenvalues
            .iter()
            .filter(|z| z.norm() > 0.0)
            .map(|z| z.ln() / lq)
            .collect();
        RepSystem {
            q,
            c: rep.c_matrix().to_complex(),
            matrices: rep.matrices_complex(),
            table,
            exponent,
            bound,
            bound_binds,
            r_upper: r,
            poles,
        }
    }

    pub fn c_matrix(&self) -> &CMatrix {
        &self.c
    }
}

impl DirichletSystem for RepSystem {
    fn dim(&self) -> usize {
        self.c.nrows()
    }
    fn q(&self) -> f64 {
        self.q as f64
    }
    fn exponent(&self) -> f64 {
        self.exponent
    }
    fn coefficient_bound(&self) -> f64 {
        self.bound
    }
    fn coefficient(&self, n: usize) -> CVector {
        self.table[n].clone()
    }
    fn coefficient_limit(&self) -> usize {
        self.table.len() - 1
    }
    fn max_beta(&self) -> f64 {
        (self.q - 1) as f64 / self.q as f64
    }
    fn head_extent(&self, n0: usize) -> usize {
        self.q as usize * n0
    }
    fn lhs(&self, s: Complex64) -> CMatrix {
        let d = self.dim();
        let w = q_pow(self.q as f64, -s);
        CMatrix::identity(d, d) - &self.c * w
    }
    fn head(&self, s: Complex64, n0: usize) -> CVector {
        let mut acc = CVector::zeros(self.dim());
        for n in n0..self.q as usize * n0 {
            acc += &self.table[n] * (-s * (n as f64).ln()).exp();
        }
        acc
    }
    fn shifts(&self, s: Complex64) -> Vec<Shift> {
        let w = q_pow(self.q as f64, -s);
        (1..self.q as usize)
            .map(|r| Shift {
                beta: r as f64 / self.q as f64,
                weight: &self.matrices[r] * w,
            })
            .collect()
    }
    fn pole_bases(&self) -> Vec<Complex64> {
        self.poles.clone()
    }
}

/// `q^s` for real `q > 0`.
pub fn q_pow(q: f64, s: Complex64) -> Complex64 {
    (s * q.ln()).exp()
}

/// Direct summation `Σ_{n₀≤n≤n_max} n^{-s} f(n)v(0)` for a representation,
/// with the tail bound from `model`. Coefficients are generated on the fly.
pub fn direct_sum(
    rep: &LinearRepresentation,
    s: Complex64,
    model: TailModel,
    n_max: usize,
) -> Result<DirichletValue, DirichletError> {
    const LIMIT: usize = 10_000_000;
    if n_max > LIMIT {
        return Err(DirichletError::DirectBudget {
            needed: n_max as f64,
            limit: LIMIT,
        });
    }
    let tail = model.tail_from((n_max + 1) as f64, s.re);
    if !tail.is_finite() {
        return Err(DirichletError::OutOfDomain {
            sigma: s.re,
            abscissa: model.a + 1.0,
        });
    }
    let q = rep.q() as usize;
    let mats = rep.matrices_complex();
    let table = rep.vector_table(n_max / q + 1);
    let mut sum = TermSum::new(rep.dim());
    for n in model.n0.max(1)..=n_max {
        if n < table.len() {
            sum.push(&table[n], n, s);
        } else {
            sum.push(&(&mats[n % q] * &table[n / q]), n, s);
        }
    }
    let (value, round) = sum.finish(CVector::zeros(rep.dim()));
    Ok(DirichletValue {
        value,
        abs_error_bound: tail + round,
        depth: 0,
    })
}

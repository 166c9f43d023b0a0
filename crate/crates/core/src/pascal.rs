//! Pascal's rhombus modulo 2.
//!
//! Entries `r_{i,j}` satisfy `r_{0,j} = 0`, `r_{1,j} = [j = 0]` and
//! `r_{i,j} = r_{i−1,j−1} + r_{i−1,j} + r_{i−1,j+1} + r_{i−2,j}`. The row counts
//! `x(n)` (ones in row `n`), `y(n)` (ones in row `2n−1` at even columns) and
//! `z(n)` (ones in row `2n` at odd columns) are 2-regular.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::dirichlet::{
    DirichletError, DirichletEvaluator, DirichletSystem, DirichletValue, EvaluatorConfig, Shift,
};
use crate::fourier::{
    check_radius, contour_residue, default_radius, obstacles, FourierConfig, FourierError, FourierTable,
};
use crate::linrep::{LinearRepresentation, Mode};
use crate::matrix::{CMatrix, CVector, ExactMatrix};
use crate::scalar::Scalar;

/// Rows of the rhombus as packed bits over columns `j ≥ 0`; the array is
/// symmetric in `j`.
#[derive(Debug, Clone)]
pub struct RhombusGrid {
    rows: Vec<Vec<u64>>,
}

fn half_row_words(i: usize) -> usize {
    (i + 1) / 64 + 1
}

/// Computes row `i` from rows `i−1` (`prev`) and `i−2` (`prev2`) into `out`.
fn next_row(prev: &[u64], prev2: &[u64], out: &mut Vec<u64>, words: usize) {
    out.clear();
    out.resize(words, 0);
    let get = |v: &[u64], w: usize| v.get(w).copied().unwrap_or(0);
    for (w, slot) in out.iter_mut().enumerate() {
        let p = get(prev, w);
        let below = if w > 0 { get(prev, w - 1) >> 63 } else { 0 };
        let above = get(prev, w + 1) << 63;
        let left = (p << 1) | below;
        let right = (p >> 1) | above;
        *slot = left ^ p ^ right ^ get(prev2, w);
    }
    // column −1 mirrors column 1
    out[0] ^= (get(prev, 0) >> 1) & 1;
}

impl RhombusGrid {
    /// Rows `0..=rows`.
    pub fn new(rows: usize) -> Self {
        let mut out: Vec<Vec<u64>> = Vec::with_capacity(rows + 1);
        out.push(vec![0]);
        if rows >= 1 {
            out.push(vec![1]);
        }
        for i in 2..=rows {
            let mut row = Vec::new();
            next_row(&out[i - 1], &out[i - 2], &mut row, half_row_words(i));
            out.push(row);
        }
        RhombusGrid { rows: out }
    }

    pub fn rows(&self) -> usize {
        self.rows.len() - 1
    }

    /// `r_{i,j} mod 2`.
    pub fn entry(&self, i: usize, j: i64) -> bool {
        let j = j.unsigned_abs() as usize;
        self.rows[i]
            .get(j / 64)
            .is_some_and(|w| (w >> (j % 64)) & 1 == 1)
    }
}

const EVEN_BITS: u64 = 0x5555_5555_5555_5555;

/// Ones in a full row from its half row: all, even columns, odd columns.
fn row_counts(row: &[u64]) -> (u64, u64, u64) {
    let centre = row[0] & 1;
    let mut even = 0u64;
    let mut odd = 0u64;
    for &w in row {
        even += (w & EVEN_BITS).count_ones() as u64;
        odd += (w & !EVEN_BITS).count_ones() as u64;
    }
    // columns ±j count twice except j = 0
    let even_full = 2 * even - centre;
    let odd_full = 2 * odd;
    (even_full + odd_full, even_full, odd_full)
}

/// Row counts obtained from the grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GridCounts {
    /// `x[n]` for `0 ≤ n ≤ rows`.
    pub x: Vec<u64>,
    /// `y[n]` for `0 ≤ 2n−1 ≤ rows`.
    pub y: Vec<u64>,
    /// `z[n]` for `0 ≤ 2n ≤ rows`.
    pub z: Vec<u64>,
}

/// Streams rows `1..=rows`, keeping only two previous rows in memory.
pub fn grid_counts(rows: usize) -> GridCounts {
    let mut x = vec![0u64];
    let mut y = vec![0u64];
    let mut z = vec![0u64];
    let mut prev2: Vec<u64> = vec![0];
    let mut prev: Vec<u64> = vec![0];
    let mut cur: Vec<u64> = Vec::new();
    for i in 1..=rows {
        if i == 1 {
            cur = vec![1];
        } else {
            next_row(&prev, &prev2, &mut cur, half_row_words(i));
        }
        let (all, even, odd) = row_counts(&cur);
        x.push(all);
        if i % 2 == 1 {
            y.push(even);
        } else {
            z.push(odd);
        }
        std::mem::swap(&mut prev2, &mut prev);
        std::mem::swap(&mut prev, &mut cur);
    }
    GridCounts { x, y, z }
}

/// `Σ_{1≤n≤N} x(n)` from the grid.
pub fn grid_summatory(upper: usize) -> u64 {
    grid_counts(upper).x.iter().sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("recurrence {equation} fails at n = {n}")]
pub struct RecurrenceFailure {
    pub equation: &'static str,
    pub n: usize,
}

/// Checks the six digit recurrences for `1 ≤ n ≤ limit` against the grid.
pub fn verify_recurrences(limit: usize) -> Result<(), RecurrenceFailure> {
    let g = grid_counts(4 * limit + 2);
    let (x, y, z) = (&g.x, &g.y, &g.z);
    for n in 1..=limit {
        let checks: [(&'static str, bool); 6] = [
            ("x(2n) = x(n) + z(n)", x[2 * n] == x[n] + z[n]),
            ("x(2n+1) = y(n+1)", x[2 * n + 1] == y[n + 1]),
            ("y(2n) = x(n-1) + z(n)", y[2 * n] == x[n - 1] + z[n]),
            ("y(2n+1) = x(n+1) + z(n)", y[2 * n + 1] == x[n + 1] + z[n]),
            ("z(2n) = 2x(n)", z[2 * n] == 2 * x[n]),
            ("z(2n+1) = 2y(n+1)", z[2 * n + 1] == 2 * y[n + 1]),
        ];
        if let Some((equation, _)) = checks.iter().find(|(_, ok)| !ok) {
            return Err(RecurrenceFailure { equation, n });
        }
    }
    Ok(())
}

/// 2-linear representation of `v(n) = (x(n), x(n+1), y(n+1), z(n), z(n+1))`.
pub fn representation() -> LinearRepresentation {
    let a0 = ExactMatrix::from_i64_rows(&[
        &[1, 0, 0, 1, 0],
        &[0, 0, 1, 0, 0],
        &[0, 1, 0, 1, 0],
        &[2, 0, 0, 0, 0],
        &[0, 0, 2, 0, 0],
    ]);
    let a1 = ExactMatrix::from_i64_rows(&[
        &[0, 0, 1, 0, 0],
        &[0, 1, 0, 0, 1],
        &[1, 0, 0, 0, 1],
        &[0, 0, 2, 0, 0],
        &[0, 2, 0, 0, 0],
    ]);
    let v0 = [0, 1, 1, 0, 2].iter().map(|&k| Scalar::int(k)).collect();
    LinearRepresentation::try_new(2, vec![a0, a1], v0, None, Mode::Sequence)
        .expect("built-in representation is valid")
}

/// `λ₁ = (3 + √17)/2`, the dominant eigenvalue of `A_0 + A_1`.
pub fn dominant_eigenvalue() -> f64 {
    (3.0 + 17f64.sqrt()) / 2.0
}

/// `κ = log₂ λ₁ = log₂(3 + √17) − 1`.
pub fn kappa() -> f64 {
    dominant_eigenvalue().log2()
}

/// Table length of `(x, y, z)` kept by [`PascalSystem`].
pub const PASCAL_TABLE_LEN: usize = 1 << 16;

/// The 3-dimensional functional equation for the tails
/// `(𝒳_{n₀}, 𝒴_{n₀}, 𝒵_{n₀})(s)` in its modified form, where the shift by
/// `β = 1` is expanded once more so that only `β = ±1/2` remain.
#[derive(Debug, Clone)]
pub struct PascalSystem {
    table: Arc<Vec<CVector>>,
}

impl Default for PascalSystem {
    fn default() -> Self {
        Self::new()
    }
}

impl PascalSystem {
    pub fn new() -> Self {
        let five = representation().vector_table(PASCAL_TABLE_LEN + 1);
        let table = (0..=PASCAL_TABLE_LEN)
            .map(|n| {
                let y = if n == 0 { Complex64::new(0.0, 0.0) } else { five[n - 1][2] };
                CVector::from_vec(vec![five[n][0], y, five[n][3]])
            })
            .collect();
        PascalSystem {
            table: Arc::new(table),
        }
    }

    /// `Δ(s) = det M(s) = −(2a² + 3a − 1)(2a + 1)` with `a = 2^{−s}`.
    pub fn delta(s: Complex64) -> Complex64 {
        let a = two_pow(-s);
        -(a * a * 2.0 + a * 3.0 - 1.0) * (a * 2.0 + 1.0)
    }

    /// `Δ'(s)`.
    pub fn delta_prime(s: Complex64) -> Complex64 {
        let a = two_pow(-s);
        let d_da = -((a * 4.0 + 3.0) * (a * 2.0 + 1.0) + (a * a * 2.0 + a * 3.0 - 1.0) * 2.0);
        d_da * (-a * std::f64::consts::LN_2)
    }
}

fn two_pow(s: Complex64) -> Complex64 {
    (s * std::f64::consts::LN_2).exp()
}

fn npow(n: usize, s: Complex64) -> Complex64 {
    (-s * (n as f64).ln()).exp()
}

impl DirichletSystem for PascalSystem {
    fn dim(&self) -> usize {
        3
    }
    fn q(&self) -> f64 {
        2.0
    }
    /// `x(n), y(n), z(n) ≤ 2n` because `r_{i,j} = 0` for `|j| ≥ i`.
    fn exponent(&self) -> f64 {
        1.0
    }
    fn coefficient_bound(&self) -> f64 {
        2.0
    }
    fn coefficient(&self, n: usize) -> CVector {
        self.table[n].clone()
    }
    fn coefficient_limit(&self) -> usize {
        self.table.len() - 1
    }
    fn max_beta(&self) -> f64 {
        0.5
    }
    fn head_extent(&self, n0: usize) -> usize {
        2 * n0
    }
    fn lhs(&self, s: Complex64) -> CMatrix {
        let a = two_pow(-s);
        let a2 = a * a;
        let one = Complex64::new(1.0, 0.0);
        CMatrix::from_row_slice(
            3,
            3,
            &[
                one - a,
                -a,
                -a,
                -(a2 + a),
                one - a2,
                -(a2 + a * 2.0),
                -a * 2.0,
                -a * 2.0,
                one,
            ],
        )
    }
    fn head(&self, s: Complex64, n0: usize) -> CVector {
        let a = two_pow(-s);
        let t = &self.table;
        let (x, y, z) = (|n: usize| t[n][0], |n: usize| t[n][1], |n: usize| t[n][2]);
        let mut ij = -y(n0) * npow(2 * n0 - 1, s);
        let mut ik = x(n0 - 1) * npow(2 * n0, s) - x(n0) * npow(2 * n0 - 1, s) - a * y(n0) * npow(2 * n0, s);
        let mut il = -y(n0) * 2.0 * npow(2 * n0 - 1, s);
        for n in n0..2 * n0 {
            let w = npow(n, s);
            ij += x(n) * w;
            ik += a * x(n) * npow(n + 1, s) + y(n) * w;
            il += z(n) * w;
        }
        CVector::from_vec(vec![ij, ik, il])
    }
    fn shifts(&self, s: Complex64) -> Vec<Shift> {
        let a = two_pow(-s);
        let zero = Complex64::new(0.0, 0.0);
        vec![
            Shift {
                beta: -0.5,
                weight: CMatrix::from_row_slice(3, 3, &[zero, a, zero, a, zero, zero, zero, a * 2.0, zero]),
            },
            Shift {
                beta: 0.5,
                weight: CMatrix::from_row_slice(
                    3,
                    3,
                    &[zero, zero, zero, a * a, zero, a * (a + 1.0), zero, zero, zero],
                ),
            },
        ]
    }
    fn pole_bases(&self) -> Vec<Complex64> {
        let s17 = 17f64.sqrt();
        [(3.0 + s17) / 2.0, (3.0 - s17) / 2.0, -2.0]
            .iter()
            .map(|&u| Complex64::new(u, 0.0).ln() / std::f64::consts::LN_2)
            .collect()
    }
}

/// `(𝒳_{n₀}, 𝒴_{n₀}, 𝒵_{n₀})(s)` and the `n₀` used.
pub fn pascal_system_evaluate(
    evaluator: &DirichletEvaluator<PascalSystem>,
    s: Complex64,
) -> Result<(DirichletValue, usize), DirichletError> {
    evaluator.evaluate(s)
}

/// Evaluator for the 3-dimensional system with absolute target `precision`.
pub fn pascal_evaluator(precision: f64) -> DirichletEvaluator<PascalSystem> {
    DirichletEvaluator::new(
        PascalSystem::new(),
        EvaluatorConfig {
            target_abs_error: precision,
            ..EvaluatorConfig::default()
        },
    )
}

/// `κ + 2πiℓ/log 2`.
pub fn pole_site(l: i64) -> Complex64 {
    Complex64::new(kappa(), 2.0 * std::f64::consts::PI * l as f64 / std::f64::consts::LN_2)
}

/// Fourier coefficient `φ_ℓ` of the fluctuation of `X(N)` by Cramer's rule:
/// `Res_{s=s_ℓ} 𝒳(s)/s` with the residue of `𝒳 = 𝒳_{n₀} + (finite sum)`
/// equal to the first row of `adj M(s_ℓ)·(𝒥, 𝒦, ℒ)(s_ℓ)` divided by
/// `Δ'(s_ℓ)`. Returns `(φ_ℓ, error estimate)`.
pub fn fourier_coefficient_simple_pole(
    evaluator: &DirichletEvaluator<PascalSystem>,
    l: i64,
) -> Result<(Complex64, f64), DirichletError> {
    let s0 = pole_site(l);
    let n0 = evaluator.n0_for(s0);
    let (rhs, err) = evaluator.rhs(s0, n0, evaluator.config().target_abs_error)?;
    let m = evaluator.system().lhs(s0);
    let adj_row = [
        m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)],
        m[(0, 2)] * m[(2, 1)] - m[(0, 1)] * m[(2, 2)],
        m[(0, 1)] * m[(1, 2)] - m[(0, 2)] * m[(1, 1)],
    ];
    let dp = PascalSystem::delta_prime(s0);
    let numerator: Complex64 = adj_row.iter().zip(rhs.iter()).map(|(a, g)| a * g).sum();
    let adj_norm: f64 = adj_row.iter().map(|z| z.norm()).sum();
    let phi = numerator / dp / s0;
    let e = adj_norm * err / (dp.norm() * s0.norm()) + 8.0 * f64::EPSILON * phi.norm();
    Ok((phi, e))
}

/// `φ_ℓ` by the contour integral of `𝒳(s)/s` around `κ + 2πiℓ/log 2`, with
/// the radius chosen from the pole geometry unless given.
pub fn fourier_coefficient_contour(
    evaluator: &DirichletEvaluator<PascalSystem>,
    l: i64,
    radius: Option<f64>,
    config: &FourierConfig,
) -> Result<(Complex64, f64), FourierError> {
    let center = pole_site(l);
    let system = evaluator.system();
    let obs = obstacles(center, &system.pole_bases(), 2.0, system.exponent());
    let r = radius.unwrap_or_else(|| default_radius(&obs, 2.0));
    check_radius(center, r, &obs, config.delta)?;
    let g = |s: Complex64| -> Result<(Complex64, f64), DirichletError> {
        let v = evaluator.evaluate_full(s)?;
        Ok((v.value[0], v.abs_error_bound))
    };
    Ok(contour_residue(
        g,
        center,
        0,
        r,
        config.target_abs_error,
        config.nodes_start,
        config.nodes_max,
    )?)
}

/// `φ_ℓ` for `|ℓ| ≤ L` by Cramer's rule; negative frequencies by conjugation.
pub fn fourier_table(l_max: usize, precision: f64) -> Result<FourierTable, DirichletError> {
    use rayon::prelude::*;
    let ev = pascal_evaluator(precision);
    let values = (0..=l_max as i64)
        .into_par_iter()
        .map(|l| fourier_coefficient_simple_pole(&ev, l))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = FourierTable::new(2);
    let lambda = Complex64::new(dominant_eigenvalue(), 0.0);
    for (l, (phi, err)) in values.into_iter().enumerate() {
        table.insert(lambda, 0, l as i64, phi, err);
    }
    Ok(table.with_conjugates())
}

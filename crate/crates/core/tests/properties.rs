//! Randomised invariants.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regseq::dirichlet::{nearest_pole, DirichletEvaluator, DirichletSystem, EvaluatorConfig, RepSystem};
use regseq::fourier::{reconstruct_fluctuation, FourierTable};
use regseq::io::{emit_representation, emit_transducer, parse_representation, parse_transducer};
use regseq::matrix::max_abs;
use regseq::registry;
use regseq::spectral::{spectrum, DEFAULT_TOL};
use regseq::transducer::Transducer;
use regseq::{ExactMatrix, LinearRepresentation, Mode, Scalar};

fn matrix(d: usize) -> impl Strategy<Value = ExactMatrix> {
    prop::collection::vec(-2i64..=2, d * d).prop_map(move |v| {
        let rows: Vec<Vec<Scalar>> = v.chunks(d).map(|r| r.iter().map(|&x| Scalar::int(x)).collect()).collect();
        ExactMatrix::from_rows(rows).unwrap()
    })
}

fn scalars(d: usize) -> impl Strategy<Value = Vec<Scalar>> {
    prop::collection::vec(-2i64..=2, d).prop_map(|v| v.into_iter().map(Scalar::int).collect())
}

/// Sequence mode: `A_0` fixes `v(0) = e_1`.
fn sequence_rep() -> impl Strategy<Value = LinearRepresentation> {
    (2u64..=3, 1usize..=3)
        .prop_flat_map(|(q, d)| {
            (
                Just(q),
                Just(d),
                prop::collection::vec(matrix(d), q as usize),
                scalars(d),
            )
        })
        .prop_map(|(q, d, mut mats, e)| {
            let mut rows = mats[0].to_rows();
            for (i, row) in rows.iter_mut().enumerate() {
                row[0] = if i == 0 { Scalar::one() } else { Scalar::zero() };
            }
            mats[0] = ExactMatrix::from_rows(rows).unwrap();
            let mut v0 = vec![Scalar::zero(); d];
            v0[0] = Scalar::one();
            LinearRepresentation::try_new(q, mats, v0, Some(e), Mode::Sequence).unwrap()
        })
}

fn matrix_rep() -> impl Strategy<Value = LinearRepresentation> {
    (2u64..=3, 1usize..=3)
        .prop_flat_map(|(q, d)| (Just(q), prop::collection::vec(matrix(d), q as usize), scalars(d), scalars(d)))
        .prop_map(|(q, mats, v0, e)| LinearRepresentation::try_new(q, mats, v0, Some(e), Mode::Matrix).unwrap())
}

fn any_rep() -> impl Strategy<Value = LinearRepresentation> {
    prop_oneof![sequence_rep(), matrix_rep()]
}

fn coefficients() -> impl Strategy<Value = Vec<Complex64>> {
    (0usize..=4)
        .prop_flat_map(|l| prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * l + 1))
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

fn table_from(coeffs: &[Complex64]) -> (FourierTable, i64) {
    let l_max = (coeffs.len() / 2) as i64;
    let mut table = FourierTable::new(2);
    for (i, &phi) in coeffs.iter().enumerate() {
        table.insert(Complex64::new(2.0, 0.0), 0, i as i64 - l_max, phi, 0.0);
    }
    (table, l_max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_recursion(rep in any_rep(), n in 0u64..2000, r in 0u64..3) {
        let r = r % rep.q();
        let m = rep.q() * n + r;
        prop_assume!(m > 0);
        let lhs = rep.evaluate_product(m);
        let rhs = rep.matrices()[r as usize].mul(&rep.evaluate_product(n));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn fast_summation_matches_naive(rep in any_rep(), upper in 0u64..400) {
        prop_assert_eq!(rep.summatory_fast(upper), rep.summatory_naive(upper));
        prop_assert_eq!(rep.summatory_matrix_fast(upper), rep.summatory_matrix_naive(upper));
    }

    #[test]
    fn sequence_mode_vectors_follow_digits(rep in sequence_rep(), n in 0u64..2000) {
        for r in 0..rep.q() {
            let v = rep.evaluate_vector(rep.q() * n + r);
            prop_assert_eq!(v, rep.matrices()[r as usize].mul_vec(&rep.evaluate_vector(n)));
        }
    }

    #[test]
    fn projectors_resolve_identity(c in (1usize..=4).prop_flat_map(matrix)) {
        let report = spectrum(&c, DEFAULT_TOL).unwrap();
        prop_assert!(report.resolution_error() <= 1e-8, "resolution {:e}", report.resolution_error());
        prop_assert!(report.idempotence_error() <= 1e-8, "idempotence {:e}", report.idempotence_error());
        prop_assert!(report.orthogonality_error() <= 1e-8, "orthogonality {:e}", report.orthogonality_error());
        let multiplicities: usize = report.eigenvalues.iter().map(|e| e.multiplicity).sum();
        prop_assert_eq!(multiplicities, report.dim());
    }

    #[test]
    fn transducer_embedding(seed in any::<u64>(), q in 2u64..=4, states in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = Transducer::random(&mut rng, q, states);
        let rep = t.to_linear_representation();
        for n in 0..2000 {
            prop_assert_eq!(t.run(n), rep.evaluate(n), "n = {}", n);
        }
    }

    #[test]
    fn representation_round_trip(rep in any_rep()) {
        let back = parse_representation(&emit_representation(&rep)).unwrap();
        prop_assert_eq!(back, rep);
    }

    #[test]
    fn transducer_round_trip(seed in any::<u64>(), q in 2u64..=4, states in 1usize..=5) {
        let t = Transducer::random(&mut ChaCha8Rng::seed_from_u64(seed), q, states);
        let back = parse_transducer(&emit_transducer(&t)).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn reconstruction_is_one_periodic(coeffs in coefficients(), u in -3.0f64..3.0) {
        let (table, l_max) = table_from(&coeffs);
        let z = Complex64::new(2.0, 0.0);
        let a = reconstruct_fluctuation(&table, z, 0, l_max, u).unwrap();
        let b = reconstruct_fluctuation(&table, z, 0, l_max, u + 1.0).unwrap();
        prop_assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn grid_mean_and_energy(coeffs in coefficients()) {
        let (table, l_max) = table_from(&coeffs);
        let z = Complex64::new(2.0, 0.0);
        let grid = 1024;
        let values: Vec<Complex64> = (0..grid)
            .map(|j| reconstruct_fluctuation(&table, z, 0, l_max, j as f64 / grid as f64).unwrap())
            .collect();
        let mean: Complex64 = values.iter().sum::<Complex64>() / grid as f64;
        prop_assert!((mean - coeffs[l_max as usize]).norm() < 1e-12);
        let energy = values.iter().map(|v| v.norm_sqr()).sum::<f64>() / grid as f64;
        let parseval: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((energy - parseval).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dirichlet_tail_start_is_irrelevant(re in 0.2f64..4.0, im in -15.0f64..15.0) {
        let s = Complex64::new(re, im);
        let rep = registry::binary_sum_of_digits();
        let sys = RepSystem::new(&rep).unwrap();
        prop_assume!(nearest_pole(&sys.pole_bases(), sys.q(), s).is_none_or(|(_, d)| d > 0.1));
        let eval = |n0| {
            let config = EvaluatorConfig { n0, ..EvaluatorConfig::default() };
            DirichletEvaluator::new(RepSystem::new(&rep).unwrap(), config).evaluate_full(s).unwrap()
        };
        let (a, b) = (eval(32), eval(64));
        let diff = max_abs(&(&a.value - &b.value));
        prop_assert!(diff <= a.abs_error_bound + b.abs_error_bound, "{:e}", diff);
    }

    #[test]
    fn fluctuation_grid_phase(k in 0u32..4) {
        // e^{2 pi i l u} at u = k / 4 cycles through the fourth roots of unity
        let mut table = FourierTable::new(2);
        table.insert(Complex64::new(2.0, 0.0), 0, 1, Complex64::new(1.0, 0.0), 0.0);
        table.insert(Complex64::new(2.0, 0.0), 0, 0, Complex64::new(0.0, 0.0), 0.0);
        table.insert(Complex64::new(2.0, 0.0), 0, -1, Complex64::new(0.0, 0.0), 0.0);
        let v = reconstruct_fluctuation(&table, Complex64::new(2.0, 0.0), 0, 1, k as f64 / 4.0).unwrap();
        let want = Complex64::from_polar(1.0, PI * k as f64 / 2.0);
        prop_assert!((v - want).norm() < 1e-12);
    }
}

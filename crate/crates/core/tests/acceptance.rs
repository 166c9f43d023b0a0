//! End-to-end acceptance checks, one line per criterion.
#![allow(clippy::excessive_precision)]

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regseq::dirichlet::{
    direct_sum, nearest_pole, DirichletEvaluator, DirichletSystem, EvaluatorConfig, RepSystem, TailModel,
};
use regseq::fourier::{
    fourier_coefficient, reconstruct_fluctuation, FourierConfig, FourierContext,
};
use regseq::matrix::max_abs;
use regseq::pascal;
use regseq::registry;
use regseq::spectral::{spectrum, DEFAULT_TOL};
use regseq::transducer::{identity_transducer, Transducer};
use regseq::{LinearRepresentation, Scalar};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn delange_constant() -> Outcome {
    let (phi, err) = fourier_coefficient(
        &registry::binary_sum_of_digits(),
        c(2.0, 0.0),
        1,
        0,
        FourierConfig {
            target_abs_error: 1e-12,
            ..FourierConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let dev = (phi - c(0.5, 0.0)).norm();
    check(dev <= 1e-10, format!("phi = {phi} (estimate {err:.1e}), deviation {dev:.1e}"))
}

fn pascal_exponent() -> Outcome {
    let dev = (pascal::kappa() - 1.83250638358045).abs();
    check(dev <= 1e-12, format!("kappa = {}, deviation {dev:.1e}", pascal::kappa()))
}

const TABLE: [(f64, f64); 11] = [
    (0.6911615112341912755021246, 0.0),
    (-0.01079216311240407872950510, -0.0023421761940286789685827),
    (0.00279378637350495172116712, -0.00066736128659728911347756),
    (-0.00020078258323645842522640, -0.0031973663977645462669373),
    (0.00024944678921746747281338, -0.0005912995467076061497650),
    (-0.0003886698612765803447578, 0.00006723866319930148568431),
    (-0.0006223575988893574655258, 0.00043217220614939859781542),
    (0.00023034317364181383130476, -0.00058663168772856091427688),
    (0.0005339060804798716172593, -0.0002119380802590974909465),
    (0.0000678898389770175928529, -0.00038307823285486235280185),
    (-0.00019981745997355255061991, -0.00031394569060142799808175),
];

fn pascal_table() -> Outcome {
    let table = pascal::fourier_table(10, 1e-12).map_err(|e| e.to_string())?;
    let lambda = c(pascal::dominant_eigenvalue(), 0.0);
    let mut worst = 0.0f64;
    let mut ok = true;
    for (l, &(re, im)) in TABLE.iter().enumerate() {
        let phi = table.get(lambda, 0, l as i64).ok_or("missing entry")?.phi;
        let dev = (phi.re - re).abs().max((phi.im - im).abs());
        worst = worst.max(dev);
        ok &= dev <= if l == 0 { 1e-8 } else { 1e-6 };
    }
    check(ok, format!("max deviation over l = 0..10: {worst:.1e}"))
}

fn summation_equivalence() -> Outcome {
    for name in registry::NAMES {
        let rep = registry::lookup(name).unwrap();
        let mut acc = vec![Scalar::zero(); rep.dim()];
        for n in 0..=4096u64 {
            if rep.summatory_fast(n) != acc {
                return Err(format!("{name}: fast and naive summation differ at N = {n}"));
            }
            for (a, x) in acc.iter_mut().zip(rep.evaluate_vector(n)) {
                *a += &x;
            }
        }
    }
    let n = 1_000_000u64;
    let fast = pascal::representation().summatory_scalar(n + 1);
    let grid = pascal::grid_summatory(n as usize);
    check(
        fast == Scalar::int(grid as i64),
        format!("all built-ins agree for N <= 4096; X(10^6) = {fast}, grid {grid}"),
    )
}

fn consistency_for(rep: &LinearRepresentation, rng: &mut ChaCha8Rng) -> Result<(f64, f64), String> {
    let ev = DirichletEvaluator::new(RepSystem::new(rep).map_err(|e| e.to_string())?, EvaluatorConfig::default());
    let sys = ev.system();
    let a = sys.exponent();
    let mut worst = 0.0f64;
    let mut taken = 0;
    while taken < 20 {
        let s = c(rng.gen_range(a + 0.2..=a + 4.0), rng.gen_range(-50.0..=50.0));
        if nearest_pole(&sys.pole_bases(), sys.q(), s).is_some_and(|(_, d)| d < 0.1) {
            continue;
        }
        taken += 1;
        let (residual, bound) = ev
            .functional_equation_residual(s, ev.n0_for(s))
            .map_err(|e| format!("s = {s}: {e}"))?;
        if residual > 10.0 * bound {
            return Err(format!("s = {s}: residual {residual:.1e} exceeds 10 x bound {bound:.1e}"));
        }
        worst = worst.max(residual / bound.max(f64::MIN_POSITIVE));
    }
    // overlap strip [sigma_direct, sigma_direct + 1]
    let mut overlap = 0.0f64;
    for t in [0.0, 0.5, 1.0] {
        let s = c(ev.sigma_direct() + t, rng.gen_range(-20.0..=20.0));
        let cont = ev.evaluate_full_continuation(s).map_err(|e| e.to_string())?;
        let model = TailModel {
            c: sys.coefficient_bound(),
            a,
            n0: 1,
        };
        let direct = direct_sum(rep, s, model, 2_000_000).map_err(|e| e.to_string())?;
        let diff = max_abs(&(&cont.value - &direct.value));
        let allowed = cont.abs_error_bound + direct.abs_error_bound;
        if diff > allowed {
            return Err(format!("overlap at s = {s}: {diff:.1e} > {allowed:.1e}"));
        }
        overlap = overlap.max(diff);
    }
    Ok((worst, overlap))
}

fn dirichlet_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (w1, o1) = consistency_for(&pascal::representation(), &mut rng)?;
    let (w2, o2) = consistency_for(&registry::binary_sum_of_digits(), &mut rng)?;
    Ok(format!(
        "max residual/bound: pascal {w1:.2}, sum of digits {w2:.2}; overlap differences {o1:.1e}, {o2:.1e}"
    ))
}

fn transducer_embedding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut family = vec![identity_transducer()];
    for _ in 0..20 {
        let q = rng.gen_range(2..=3);
        let states = rng.gen_range(1..=5);
        family.push(Transducer::random(&mut rng, q, states));
    }
    for (i, t) in family.iter().enumerate() {
        let rep = t.to_linear_representation();
        for n in 0..10_000u64 {
            if t.run(n) != rep.evaluate(n) {
                return Err(format!("transducer {i}: run and embedding differ at n = {n}"));
            }
        }
    }
    Ok(format!("{} transducers agree for n < 10^4", family.len()))
}

fn spectral_structure() -> Outcome {
    let sod = spectrum(&registry::binary_sum_of_digits().c_matrix(), DEFAULT_TOL).map_err(|e| e.to_string())?;
    let two = sod.find(c(2.0, 0.0), 1e-8).ok_or("2 is not an eigenvalue")?;
    let m2 = sod.eigenvalues[two].max_jordan;
    let p = spectrum(&pascal::representation().c_matrix(), DEFAULT_TOL).map_err(|e| e.to_string())?;
    let r17 = 17f64.sqrt();
    let expected = [(3.0 + r17) / 2.0, 2.0, -2.0, -1.0, (3.0 - r17) / 2.0];
    let mut ok = m2 == 2 && sod.eigenvalues.len() == 1 && p.eigenvalues.len() == 5;
    for z in expected {
        ok &= p
            .find(c(z, 0.0), 1e-8)
            .is_some_and(|i| p.eigenvalues[i].multiplicity == 1 && p.eigenvalues[i].max_jordan == 1);
    }
    check(ok, format!("m(2) = {m2}; pascal spectrum {:?}", p.eigenvalues.iter().map(|e| e.value.re).collect::<Vec<_>>()))
}

fn fluctuation_reproduction() -> Outcome {
    let table = pascal::fourier_table(99, 1e-10).map_err(|e| e.to_string())?;
    let lambda = c(pascal::dominant_eigenvalue(), 0.0);
    let rep = pascal::representation();
    let mut worst = 0.0f64;
    for j in 16..=20 {
        for i in 0..10 {
            let n = 2f64.powf(j as f64 + i as f64 / 10.0).floor() as u64;
            // X(N) = Σ_{1≤n≤N} x(n)
            let x = rep.summatory_scalar(n + 1).to_c64().re / (n as f64).powf(pascal::kappa());
            let rec = reconstruct_fluctuation(&table, lambda, 0, 99, (n as f64).log2()).map_err(|e| e.to_string())?;
            worst = worst.max((x - rec.re).abs());
        }
    }
    check(worst <= 1e-2, format!("max |X(N)/N^kappa - reconstruction| = {worst:.2e}"))
}

fn property_suites() -> Outcome {
    let mut notes = Vec::new();
    for name in ["binary-sum-of-digits", "pascal-rhombus"] {
        let rep = registry::lookup(name).unwrap();
        let r = spectrum(&rep.c_matrix(), DEFAULT_TOL).map_err(|e| e.to_string())?;
        let (res, idem, orth) = (r.resolution_error(), r.idempotence_error(), r.orthogonality_error());
        if res.max(idem).max(orth) > 1e-8 {
            return Err(format!("{name}: projector errors {res:.1e} {idem:.1e} {orth:.1e}"));
        }
    }
    notes.push("projectors".to_string());

    let ctx = FourierContext::new(&registry::binary_sum_of_digits(), FourierConfig::default()).map_err(|e| e.to_string())?;
    for l in [0, 2] {
        let (a, ea) = ctx.coefficient_with_radius(c(2.0, 0.0), 0, l, Some(0.4)).map_err(|e| e.to_string())?;
        let (b, eb) = ctx.coefficient_with_radius(c(2.0, 0.0), 0, l, Some(0.2)).map_err(|e| e.to_string())?;
        if (a - b).norm() > 2.0 * (ea + eb) {
            return Err(format!("radius dependence at l = {l}: {a} vs {b}"));
        }
    }
    notes.push("radius independence".to_string());

    let ev = pascal::pascal_evaluator(1e-13);
    let config = FourierConfig {
        target_abs_error: 1e-10,
        ..FourierConfig::default()
    };
    let mut worst = 0.0f64;
    for l in 0..=10 {
        let (a, ea) = pascal::fourier_coefficient_simple_pole(&ev, l).map_err(|e| e.to_string())?;
        let (b, eb) = pascal::fourier_coefficient_contour(&ev, l, None, &config).map_err(|e| e.to_string())?;
        let (b2, eb2) = pascal::fourier_coefficient_contour(&ev, l, Some(0.2), &config).map_err(|e| e.to_string())?;
        if (a - b).norm() > ea + eb {
            return Err(format!("Cramer and contour differ at l = {l}: {a} vs {b}"));
        }
        if (b - b2).norm() > 2.0 * (eb + eb2) {
            return Err(format!("pascal radius dependence at l = {l}: {b} vs {b2}"));
        }
        worst = worst.max((a - b).norm());
    }
    notes.push(format!("Cramer vs contour (max {worst:.1e})"));

    pascal::verify_recurrences(512).map_err(|e| e.to_string())?;
    notes.push("recurrences to 512".to_string());

    Ok(notes.join(", "))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 9] = [
        ("1 Delange constant", delange_constant, Duration::from_secs(10)),
        ("2 Pascal exponent", pascal_exponent, Duration::from_secs(1)),
        ("3 Pascal Fourier table", pascal_table, Duration::from_secs(120)),
        ("4 exact summation", summation_equivalence, Duration::from_secs(120)),
        ("5 Dirichlet consistency", dirichlet_consistency, Duration::from_secs(60)),
        ("6 transducer embedding", transducer_embedding, Duration::from_secs(60)),
        ("7 spectral structure", spectral_structure, Duration::from_secs(1)),
        ("8 fluctuation reproduction", fluctuation_reproduction, Duration::from_secs(300)),
        ("9 property suites", property_suites, Duration::from_secs(300)),
    ];
    let mut failures = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if elapsed <= limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; took longer than {limit:?}")),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("{status} criterion {name} [{:.2?}]: {detail}", elapsed);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}

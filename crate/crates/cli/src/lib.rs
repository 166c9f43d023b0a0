//! The `regseq` command line.
//!
//! CSV outputs have fixed columns: `fourier` and `example pascal --table`
//! emit `l,re,im,err`; `fluctuation` and `--fluctuation-csv` emit
//! `u,empirical,reconstructed`; `asymptotics --check` emits
//! `n,exact,reconstructed,residual,normalized`.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use regseq::asymptotics::{log_grid, residual_decay_check, skeleton_for};
use regseq::dirichlet::{nearest_pole, DirichletEvaluator, DirichletSystem, EvaluatorConfig, RepSystem};
use regseq::fourier::{
    empirical_fluctuation, reconstruct_fluctuation, FourierConfig, FourierContext, FourierTable,
};
use regseq::io::{emit_representation, parse_representation, parse_transducer, IoError};
use regseq::linrep::cdot;
use regseq::spectral::{choose_r, jsr_bounds, spectrum, DEFAULT_EPSILON, DEFAULT_TOL};
use regseq::transducer::{adjacency_spectrum_check, graph_analysis, Transducer};
use regseq::{pascal, registry, LinearRepresentation};

#[derive(Parser, Debug)]
#[command(name = "regseq", version, about = "Analysis of q-regular sequences")]
struct Cli {
    /// Report errors as JSON on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct RepSource {
    /// Representation in JSON.
    #[arg(long)]
    rep: Option<PathBuf>,
    /// Built-in example.
    #[arg(long)]
    example: Option<String>,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct TransducerSource {
    /// Transducer in JSON.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Built-in transducer.
    #[arg(long)]
    example: Option<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// x(n) = e·f(n)·v(0).
    Eval {
        #[command(flatten)]
        source: RepSource,
        #[arg(long)]
        n: u64,
    },
    /// X(N) = Σ_{0≤n<N} x(n).
    Sum {
        #[command(flatten)]
        source: RepSource,
        #[arg(long)]
        n: u64,
        /// Sum term by term instead of the digit recursion.
        #[arg(long)]
        naive: bool,
    },
    /// Eigenvalues of C with multiplicities and Jordan data.
    Spectrum {
        #[command(flatten)]
        source: RepSource,
    },
    /// Joint spectral radius bounds and the growth rate R.
    Jsr {
        #[command(flatten)]
        source: RepSource,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
    },
    /// The Dirichlet series Σ_{n≥1} n^{-s} f(n)v(0).
    Dirichlet {
        #[command(flatten)]
        source: RepSource,
        /// `RE,IM`.
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
        #[arg(long)]
        n0: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        precision: f64,
        /// Check the functional equation at this many random points instead.
        #[arg(long)]
        consistency: Option<usize>,
    },
    /// Fourier coefficients of a fluctuation.
    Fourier {
        #[command(flatten)]
        source: RepSource,
        /// Index into the eigenvalues sorted by decreasing modulus.
        #[arg(long, default_value_t = 0)]
        eigenvalue_index: usize,
        #[arg(long, default_value_t = 0)]
        k: usize,
        /// `A..B`.
        #[arg(long, default_value = "0..0", allow_hyphen_values = true)]
        l_range: String,
        #[arg(long, default_value_t = 1e-8)]
        precision: f64,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Empirical fluctuation against its trigonometric approximation.
    Fluctuation {
        #[command(flatten)]
        source: RepSource,
        /// `A..B[:STEPS]` for N = ⌊q^{j+i/STEPS}⌋, A ≤ j < B, or a list `N1,N2,…`.
        #[arg(long)]
        samples: String,
        #[arg(long, default_value_t = 0)]
        eigenvalue_index: usize,
        /// Defaults to m(λ) − 1.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 10)]
        degree: i64,
        #[arg(long, default_value_t = 1e-8)]
        precision: f64,
    },
    /// Terms, exponents and error term of the asymptotic expansion.
    Asymptotics {
        #[command(flatten)]
        source: RepSource,
        /// `Q^A..Q^B`: compare X(N) with the expansion on that range.
        #[arg(long)]
        check: Option<String>,
        #[arg(long, default_value_t = 4)]
        steps: u32,
        #[arg(long, default_value_t = 10)]
        degree: i64,
        #[arg(long, default_value_t = 1e-8)]
        precision: f64,
    },
    /// Transducer tools.
    Transducer {
        #[command(subcommand)]
        command: TransducerCommand,
    },
    /// Built-in examples.
    Example {
        #[command(subcommand)]
        command: ExampleCommand,
    },
}

#[derive(Subcommand, Debug)]
enum TransducerCommand {
    /// Sum of outputs along the path of n plus the final output.
    Run {
        #[command(flatten)]
        source: TransducerSource,
        #[arg(long)]
        n: u64,
    },
    /// The equivalent linear representation in JSON.
    Embed {
        #[command(flatten)]
        source: TransducerSource,
    },
    /// Components, periods and the adjacency spectrum.
    Graph {
        #[command(flatten)]
        source: TransducerSource,
    },
}

#[derive(Subcommand, Debug)]
enum ExampleCommand {
    /// Pascal's rhombus: exponent, Fourier table and fluctuation data.
    Pascal {
        /// Emit φ_ℓ for 0 ≤ ℓ ≤ L.
        #[arg(long)]
        table: Option<usize>,
        #[arg(long, default_value_t = 1e-12)]
        precision: f64,
        /// Write `u,empirical,reconstructed` for N = ⌊2^{j+i/10}⌋, 16 ≤ j ≤ 20.
        #[arg(long)]
        fluctuation_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 99)]
        degree: usize,
    },
    /// Names of the built-in examples.
    List,
    /// A built-in representation in JSON.
    Show { name: String },
}

/// Runs the command line `argv` (including the program name) and returns
/// the exit status.
pub fn run_command(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    configure_threads();
    match dispatch(&cli, out) {
        Ok(()) => 0,
        // the reader went away, as with `| head`
        Err(e) if is_broken_pipe(&e) => 0,
        Err(e) => {
            if cli.json_errors {
                let _ = writeln!(err, "{}", error_json(&e));
            } else {
                let _ = writeln!(err, "error: {e:#}");
            }
            1
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<std::io::Error>())
        .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

fn configure_threads() {
    if let Some(n) = std::env::var("REGSEQ_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // fails harmlessly if the pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn error_json(e: &anyhow::Error) -> Value {
    match e.downcast_ref::<IoError>() {
        Some(io) => io.to_json(),
        None => json!({"error": "failure", "message": format!("{e:#}")}),
    }
}

fn load_rep(source: &RepSource) -> Result<LinearRepresentation> {
    match (&source.rep, &source.example) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(parse_representation(&text)?)
        }
        (None, Some(name)) => registry::lookup(name).ok_or_else(|| anyhow!("unknown example `{name}`")),
        (None, None) => bail!("no representation given"),
    }
}

fn load_transducer(source: &TransducerSource) -> Result<Transducer> {
    match (&source.file, &source.example) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(parse_transducer(&text)?)
        }
        (None, Some(name)) => registry::lookup_transducer(name).ok_or_else(|| anyhow!("unknown transducer `{name}`")),
        (None, None) => bail!("no transducer given"),
    }
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn print_json(out: &mut dyn Write, v: &Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Eval { source, n } => {
            let rep = load_rep(source)?;
            writeln!(out, "{}", rep.evaluate(*n))?;
        }
        Command::Sum { source, n, naive } => {
            let rep = load_rep(source)?;
            let value = if *naive {
                regseq::linrep::dot(rep.output(), &rep.summatory_naive(*n))
            } else {
                rep.summatory_scalar(*n)
            };
            writeln!(out, "{value}")?;
        }
        Command::Spectrum { source } => {
            let rep = load_rep(source)?;
            let report = spectrum(&rep.c_matrix(), DEFAULT_TOL)?;
            print_json(
                out,
                &json!({
                    "eigenvalues": report.eigenvalues,
                    "one_is_eigenvalue": report.one_is_eigenvalue,
                    "trace_residual": report.trace_residual,
                    "det_residual": report.det_residual,
                    "resolution_error": report.resolution_error(),
                    "idempotence_error": report.idempotence_error(),
                    "orthogonality_error": report.orthogonality_error(),
                }),
            )?;
        }
        Command::Jsr {
            source,
            max_len,
            budget,
        } => {
            let rep = load_rep(source)?;
            let jsr = jsr_bounds(&rep.matrices_complex(), *max_len, *budget);
            let report = spectrum(&rep.c_matrix(), DEFAULT_TOL)?;
            let r = choose_r(&jsr, &report, DEFAULT_EPSILON);
            print_json(out, &json!({"jsr": jsr, "r": r, "abscissa": r.ln() / (rep.q() as f64).ln()}))?;
        }
        Command::Dirichlet {
            source,
            s,
            n0,
            precision,
            consistency,
        } => {
            let rep = load_rep(source)?;
            let mut config = EvaluatorConfig {
                target_abs_error: *precision,
                ..EvaluatorConfig::default()
            };
            if let Some(n0) = n0 {
                config.n0 = *n0;
            }
            let system = RepSystem::new(&rep)?;
            let bound = json!({
                "c": system.coefficient_bound(),
                "exponent": system.exponent(),
                "still_growing": system.bound_binds,
            });
            let ev = DirichletEvaluator::new(system, config);
            match (s, consistency) {
                (_, Some(count)) => dirichlet_consistency(&ev, *count, cli.seed, out)?,
                (Some(s), None) => {
                    let s = parse_complex(s)?;
                    let v = ev.evaluate_full(s)?;
                    let scalar = cdot(&rep.output_complex(), &v.value);
                    print_json(
                        out,
                        &json!({
                            "s": complex_json(s),
                            "value": complex_json(scalar),
                            "vector": v.value.iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
                            "error_bound": v.abs_error_bound,
                            "depth": v.depth,
                            "coefficient_bound": bound,
                        }),
                    )?;
                }
                (None, None) => bail!("either --s or --consistency is required"),
            }
        }
        Command::Fourier {
            source,
            eigenvalue_index,
            k,
            l_range,
            precision,
            radius,
            format,
        } => {
            let rep = load_rep(source)?;
            let ctx = FourierContext::new(
                &rep,
                FourierConfig {
                    target_abs_error: *precision,
                    radius: *radius,
                    ..FourierConfig::default()
                },
            )?;
            let lambda = eigenvalue(&ctx, *eigenvalue_index)?;
            let (a, b) = parse_range(l_range)?;
            let mut table = FourierTable::new(rep.q());
            ctx.extend_table(&mut table, lambda, *k, a..=b)?;
            let rows: Vec<_> = (a..=b).filter_map(|l| table.get(lambda, *k, l)).collect();
            match format {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["l", "re", "im", "err"])?;
                    for e in rows {
                        w.write_record([e.l.to_string(), num(e.phi.re), num(e.phi.im), num(e.error)])?;
                    }
                    w.flush()?;
                }
                Format::Json => print_json(out, &serde_json::to_value(&table)?)?,
            }
        }
        Command::Fluctuation {
            source,
            samples,
            eigenvalue_index,
            k,
            degree,
            precision,
        } => {
            let rep = load_rep(source)?;
            let ctx = FourierContext::new(
                &rep,
                FourierConfig {
                    target_abs_error: *precision,
                    ..FourierConfig::default()
                },
            )?;
            let lambda = eigenvalue(&ctx, *eigenvalue_index)?;
            let m = ctx
                .dominant_eigenvalues()
                .iter()
                .find(|e| (e.0 - lambda).norm() < 1e-9)
                .map(|e| e.1)
                .ok_or_else(|| anyhow!("eigenvalue {lambda} is not dominant"))?;
            let k = k.unwrap_or(m - 1);
            let table = all_tables(&ctx, *degree)?;
            let grid = parse_samples(samples, rep.q())?;
            let points = empirical_fluctuation(&rep, lambda, k, &grid, &table);
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["u", "empirical", "reconstructed"])?;
            for p in points {
                let rec = reconstruct_fluctuation(&table, lambda, k, *degree, p.u)?;
                w.write_record([num(p.u), num(p.y.re), num(rec.re)])?;
            }
            w.flush()?;
        }
        Command::Asymptotics {
            source,
            check,
            steps,
            degree,
            precision,
        } => {
            let rep = load_rep(source)?;
            let skeleton = skeleton_for(&rep)?;
            match check {
                None => print_json(out, &serde_json::to_value(&skeleton)?)?,
                Some(spec) => {
                    let (base, a, b) = parse_power_range(spec)?;
                    let ctx = FourierContext::new(
                        &rep,
                        FourierConfig {
                            target_abs_error: *precision,
                            ..FourierConfig::default()
                        },
                    )?;
                    let table = all_tables(&ctx, *degree)?;
                    let grid = log_grid(base, a, b + 1, *steps);
                    let report = residual_decay_check(&rep, &skeleton, &table, *degree, &grid)?;
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["n", "exact", "reconstructed", "residual", "normalized"])?;
                    for r in &report.rows {
                        w.write_record([
                            r.n.to_string(),
                            num(r.exact),
                            num(r.reconstructed),
                            num(r.residual),
                            num(r.normalized),
                        ])?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::Transducer { command } => match command {
            TransducerCommand::Run { source, n } => {
                let t = load_transducer(source)?;
                writeln!(out, "{}", t.run(*n))?;
            }
            TransducerCommand::Embed { source } => {
                let t = load_transducer(source)?;
                writeln!(out, "{}", emit_representation(&t.to_linear_representation()))?;
            }
            TransducerCommand::Graph { source } => {
                let t = load_transducer(source)?;
                let graph = graph_analysis(&t);
                let adjacency = adjacency_spectrum_check(&t, &graph)?;
                print_json(out, &json!({"graph": graph, "adjacency": adjacency}))?;
            }
        },
        Command::Example { command } => match command {
            ExampleCommand::Pascal {
                table,
                precision,
                fluctuation_csv,
                degree,
            } => {
                if table.is_none() && fluctuation_csv.is_none() {
                    print_json(
                        out,
                        &json!({
                            "kappa": pascal::kappa(),
                            "dominant_eigenvalue": pascal::dominant_eigenvalue(),
                        }),
                    )?;
                }
                if let Some(l_max) = table {
                    let t = pascal::fourier_table(*l_max, *precision)?;
                    let lambda = Complex64::new(pascal::dominant_eigenvalue(), 0.0);
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["l", "re", "im", "err"])?;
                    for e in t.series(lambda, 0).into_iter().filter(|e| e.l >= 0) {
                        w.write_record([e.l.to_string(), num(e.phi.re), num(e.phi.im), num(e.error)])?;
                    }
                    w.flush()?;
                }
                if let Some(path) = fluctuation_csv {
                    pascal_fluctuation_csv(path, *degree, *precision)?;
                }
            }
            ExampleCommand::List => {
                for name in registry::NAMES {
                    writeln!(out, "{name}")?;
                }
            }
            ExampleCommand::Show { name } => {
                let rep = registry::lookup(name).ok_or_else(|| anyhow!("unknown example `{name}`"))?;
                writeln!(out, "{}", emit_representation(&rep))?;
            }
        },
    }
    Ok(())
}

fn eigenvalue(ctx: &FourierContext, index: usize) -> Result<Complex64> {
    let eigs = &ctx.spectrum().eigenvalues;
    eigs.get(index)
        .map(|e| e.value)
        .ok_or_else(|| anyhow!("eigenvalue index {index} out of range (C has {} distinct eigenvalues)", eigs.len()))
}

/// Coefficients `|ℓ| ≤ L` for every dominant `(λ, k)`.
fn all_tables(ctx: &FourierContext, l_max: i64) -> Result<FourierTable> {
    let mut table = FourierTable::new(ctx.representation().q());
    for (lambda, m) in ctx.dominant_eigenvalues() {
        for k in 0..m {
            ctx.extend_table(&mut table, lambda, k, -l_max..=l_max)?;
        }
    }
    Ok(table)
}

fn pascal_fluctuation_csv(path: &PathBuf, degree: usize, precision: f64) -> Result<()> {
    let table = pascal::fourier_table(degree, precision)?;
    let lambda = Complex64::new(pascal::dominant_eigenvalue(), 0.0);
    let rep = pascal::representation();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["u", "empirical", "reconstructed"])?;
    for n in log_grid(2, 16, 21, 10) {
        let u = (n as f64).log2();
        // X(N) = Σ_{1≤n≤N} x(n)
        let x = rep.summatory_scalar(n + 1).to_c64().re / (n as f64).powf(pascal::kappa());
        let rec = reconstruct_fluctuation(&table, lambda, 0, degree as i64, u)?;
        w.write_record([num(u - u.floor()), num(x), num(rec.re)])?;
    }
    w.flush()?;
    Ok(())
}

fn dirichlet_consistency(
    ev: &DirichletEvaluator<RepSystem>,
    count: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Result<()> {
    let sys = ev.system();
    let a = sys.exponent();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    while rows.len() < count {
        let s = Complex64::new(rng.gen_range(a + 0.2..=a + 4.0), rng.gen_range(-50.0..=50.0));
        if nearest_pole(&sys.pole_bases(), sys.q(), s).is_some_and(|(_, d)| d < 0.1) {
            continue;
        }
        let n0 = ev.n0_for(s);
        let (residual, bound) = ev.functional_equation_residual(s, n0)?;
        rows.push(json!({
            "s": complex_json(s),
            "residual": residual,
            "bound": bound,
            "ok": residual <= 10.0 * bound,
        }));
    }
    print_json(out, &Value::Array(rows))
}

/// Plain decimals for moderate magnitudes, scientific notation otherwise.
fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    Ok(Complex64::new(
        re.trim().parse().with_context(|| format!("bad real part in `{s}`"))?,
        im.trim().parse().with_context(|| format!("bad imaginary part in `{s}`"))?,
    ))
}

fn parse_range(s: &str) -> Result<(i64, i64)> {
    let (a, b) = s.split_once("..").ok_or_else(|| anyhow!("expected A..B, got `{s}`"))?;
    let (a, b): (i64, i64) = (a.trim().parse()?, b.trim().parse()?);
    if a > b {
        bail!("empty range `{s}`");
    }
    Ok((a, b))
}

/// `Q^A..Q^B`.
fn parse_power_range(s: &str) -> Result<(u64, u32, u32)> {
    let bad = || anyhow!("expected Q^A..Q^B, got `{s}`");
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let (q1, a) = lo.split_once('^').ok_or_else(bad)?;
    let (q2, b) = hi.split_once('^').ok_or_else(bad)?;
    let (q1, q2): (u64, u64) = (q1.trim().parse()?, q2.trim().parse()?);
    if q1 != q2 || q1 < 2 {
        return Err(bad());
    }
    Ok((q1, a.trim().parse()?, b.trim().parse()?))
}

fn parse_samples(s: &str, q: u64) -> Result<Vec<u64>> {
    if let Some((a, rest)) = s.split_once("..") {
        let (b, steps) = rest.split_once(':').unwrap_or((rest, "1"));
        return Ok(log_grid(q, a.trim().parse()?, b.trim().parse()?, steps.trim().parse()?));
    }
    s.split(',')
        .map(|t| t.trim().parse::<u64>().with_context(|| format!("bad sample `{t}`")))
        .collect()
}

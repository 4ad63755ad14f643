use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use ghzq_core::decoherence::{decay_curve, decoherence_exponent, NoiseSpec};
use ghzq_core::engine::Engine;
use ghzq_core::model::{BlochSample, GhzSpec};
use ghzq_core::oracle::{build_ghz, oracle_bell_value, oracle_pauli_correlator, oracle_q_density, PauliAxis};
use ghzq_core::qfunction::{q_density, q_density_quadrature_check, QUADRATURE_MAX_QUBITS};
use ghzq_core::study::{bell_point, bell_sweep, scaling_study, scatter_run, ConventionFamily};
use ghzq_core::{f_qm_closed_form, BellConvention, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::args::{BellSweepArgs, DecoherenceArgs, OracleCheckArgs, RunArgs, ScalingArgs, ScatterArgs};
use crate::output::{write_atomic, Table};

#[derive(Debug)]
pub enum CliError {
    /// Rejected configuration; exit code 2.
    Config(String),
    /// Failure while running; exit code 1.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Internal(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::QubitCount { .. }
            | Error::Parity { .. }
            | Error::Convention(_)
            | Error::OracleCap { .. }
            | Error::QuadratureSize { .. }
            | Error::Resolution { .. }
            | Error::EmptySamples
            | Error::InvalidParameter { .. } => CliError::Config(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(format!("i/o: {e}"))
    }
}

type CliResult<T> = Result<T, CliError>;

fn engine(workers: usize) -> CliResult<Engine> {
    Ok(Engine::new(workers)?)
}

/// Resolves every m up front so parity errors surface before any sampling.
fn plan(ms: &[usize], family: ConventionFamily) -> CliResult<Vec<(GhzSpec, BellConvention)>> {
    Ok(ms.iter().map(|&m| family.for_m(m)).collect::<Result<Vec<_>, _>>()?)
}

fn header(table: &mut Table, config: &impl Serialize, run: &RunArgs, convs: &[(GhzSpec, BellConvention)]) {
    table.meta("config", serde_json::to_value(config).expect("config serialises"));
    table.meta("seed", run.seed);
    table.meta("workers", run.workers as u64);
    let mut rules = BTreeMap::new();
    for (_, c) in convs {
        rules.insert(c.label().name(), c.extraction_rule());
    }
    for (label, rule) in rules {
        table.meta(&format!("extraction_{label}"), rule);
    }
}

fn emit(table: &Table, run: &RunArgs) -> CliResult<()> {
    write_atomic(run.out.as_deref(), &table.render(run.format))?;
    Ok(())
}

pub fn bell_sweep_cmd(args: &BellSweepArgs) -> CliResult<()> {
    let family = ConventionFamily::from(args.run.convention);
    let convs = plan(&args.m.0, family)?;
    let engine = engine(args.run.workers)?;
    let rows = bell_sweep(&engine, &args.m.0, family, args.run.samples, args.run.seed)?;

    let mut table = Table::new(
        "bell-sweep",
        vec![
            "m",
            "convention",
            "samples",
            "f_value",
            "f_stderr",
            "f_qm",
            "ratio",
            "ratio_stderr",
            "lhv_ratio",
            "genuine_threshold",
            "seed",
        ],
    );
    header(&mut table, args, &args.run, &convs);
    for r in &rows {
        let e = &r.estimate;
        table.push(vec![
            r.m.into(),
            r.convention.label().name().into(),
            e.n_samples.into(),
            e.f_value.into(),
            e.f_stderr.into(),
            e.f_qm.into(),
            e.ratio.into(),
            e.ratio_stderr.into(),
            r.lhv_ratio.into(),
            r.genuine_threshold.into(),
            args.run.seed.into(),
        ]);
    }
    emit(&table, &args.run)
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".fit.json");
    out.with_file_name(name)
}

pub fn scaling_cmd(args: &ScalingArgs) -> CliResult<()> {
    let family = ConventionFamily::from(args.run.convention);
    let convs = plan(&args.m.0, family)?;
    let engine = engine(args.run.workers)?;
    let study = scaling_study(&engine, &args.m.0, family, args.run.samples, args.run.seed)?;

    let mut table = Table::new("scaling", vec!["m", "rel_err_F", "rel_err_N", "samples", "seed"]);
    header(&mut table, args, &args.run, &convs);
    for r in &study.rows {
        table.push(vec![
            r.m.into(),
            r.rel_err_f.into(),
            r.rel_err_n.into(),
            r.samples.into(),
            args.run.seed.into(),
        ]);
    }
    let fit = match study.fit {
        Some(f) => {
            let (lo, hi) = f.interval(1.96);
            json!({
                "quantity": "log2(rel_err_F) vs m",
                "slope": f.slope,
                "slope_stderr": f.slope_stderr,
                "intercept": f.intercept,
                "ci95": [lo, hi],
                "samples_exponent": 2.0 * f.slope,
                "rel_err_N_non_increasing": study.rel_err_n_non_increasing(2.0),
            })
        }
        None => json!({ "quantity": "log2(rel_err_F) vs m", "slope": null }),
    };
    table.meta("fit", fit.clone());
    emit(&table, &args.run)?;
    if let Some(out) = &args.run.out {
        let body = serde_json::to_string_pretty(&fit).expect("fit serialises") + "\n";
        write_atomic(Some(&sidecar_path(out)), &body)?;
    }
    Ok(())
}

pub fn scatter_cmd(args: &ScatterArgs) -> CliResult<()> {
    let family = ConventionFamily::from(args.run.convention);
    let convs = plan(&args.m.0, family)?;
    let [(spec, conv)] = convs.as_slice() else {
        return Err(CliError::Config("scatter takes a single m".into()));
    };
    let (a, b) = args.pair;
    if a > spec.m() || b > spec.m() {
        return Err(CliError::Config(format!("pair ({a}, {b}) outside 1..={}", spec.m())));
    }
    let engine = engine(args.run.workers)?;
    let run = scatter_run(&engine, spec, conv, (a - 1, b - 1), args.run.samples, args.run.seed, args.rows)?;

    let mut table = Table::new("scatter", vec!["index", "re_a", "re_b", "term_xx", "term_yy"]);
    header(&mut table, args, &args.run, &convs);
    let s = &run.summary;
    table.meta(
        "moments",
        json!({
            "samples": s.factors.count(),
            "mean_re_a": s.factors.mean().re,
            "mean_re_b": s.factors.mean().im,
            "corr_re_a_re_b": s.factors.correlation(),
            "mean_term_xx": s.terms.mean().re,
            "mean_term_yy": s.terms.mean().im,
            "corr_terms": s.terms.correlation(),
            "f_pair": s.terms.mean().re + s.terms.mean().im,
        }),
    );
    for r in &run.rows {
        table.push(vec![
            r.index.into(),
            r.re_a.into(),
            r.re_b.into(),
            r.term_xx.into(),
            r.term_yy.into(),
        ]);
    }
    emit(&table, &args.run)
}

pub fn decoherence_cmd(args: &DecoherenceArgs) -> CliResult<()> {
    let family = ConventionFamily::from(args.run.convention);
    let convs = plan(&args.m.0, family)?;
    let engine = engine(args.run.workers)?;
    let noise = NoiseSpec::new(args.epsilon, args.steps, args.run.seed)?;

    let mut table = Table::new("decoherence", vec!["m", "tau", "f_ratio", "stderr", "analytic_ratio", "f_value"]);
    header(&mut table, args, &args.run, &convs);
    let mut ms = Vec::new();
    let mut rates = Vec::new();
    for (spec, conv) in &convs {
        let curve = decay_curve(&engine, spec, conv, &noise, args.run.samples)?;
        if let Some((rate, _)) = curve.fit_rate(4.0) {
            ms.push(spec.m());
            rates.push(rate);
        }
        for r in &curve.rows {
            table.push(vec![
                spec.m().into(),
                u64::from(r.tau).into(),
                r.f_ratio.into(),
                r.stderr.into(),
                r.analytic_ratio.into(),
                r.f_value.into(),
            ]);
        }
    }
    let fit = decoherence_exponent(&ms, &rates);
    table.meta(
        "decay_fit",
        json!({
            "m": ms,
            "rates": rates,
            "analytic_rates": ms.iter().map(|&m| 0.5 * (args.epsilon * m as f64).powi(2)).collect::<Vec<_>>(),
            "exponent": fit.map(|f| f.slope),
            "exponent_stderr": fit.map(|f| f.slope_stderr),
        }),
    );
    emit(&table, &args.run)
}

struct Check {
    name: String,
    detail: String,
    pass: bool,
}

pub fn oracle_check_cmd(args: &OracleCheckArgs) -> CliResult<()> {
    if args.max_m == 0 || args.max_m > ghzq_core::oracle::ORACLE_CAP {
        return Err(CliError::Config(format!(
            "--max-m must be in 1..={}",
            ghzq_core::oracle::ORACLE_CAP
        )));
    }
    if args.resolution < ghzq_core::qfunction::QUADRATURE_MIN_RESOLUTION {
        return Err(Error::Resolution {
            got: args.resolution,
            min: ghzq_core::qfunction::QUADRATURE_MIN_RESOLUTION,
        }
        .into());
    }
    let engine = engine(args.workers)?;
    let mut checks = Vec::new();

    for m in 1..=args.max_m {
        let (spec, conv) = ConventionFamily::Auto.for_m(m)?;
        let exact = oracle_bell_value(&spec, &conv)?.f;
        let closed = f_qm_closed_form(&spec, &conv)?;
        checks.push(Check {
            name: format!("closed form F_QM m={m} ({})", conv.label().name()),
            detail: format!("oracle {exact} closed {closed}"),
            pass: (exact - closed).abs() <= 1e-9 * closed,
        });
    }

    let (spec, _) = ConventionFamily::Ardehali.for_m(2)?;
    let state = build_ghz(&spec)?;
    let xx = oracle_pauli_correlator(&state, &[PauliAxis::X, PauliAxis::X])?;
    let yy = oracle_pauli_correlator(&state, &[PauliAxis::Y, PauliAxis::Y])?;
    checks.push(Check {
        name: "two-qubit form -<xx>+<yy> = 2".into(),
        detail: format!("<xx>={xx} <yy>={yy}"),
        pass: (-xx + yy - 2.0).abs() < 1e-12,
    });

    for m in 1..=QUADRATURE_MAX_QUBITS {
        let spec = GhzSpec::new(m, [0.0, PI, -PI / 2.0][m - 1])?;
        let mass = q_density_quadrature_check(&spec, args.resolution)?;
        checks.push(Check {
            name: format!("quadrature mass m={m}"),
            detail: format!("{mass}"),
            pass: (mass - 1.0).abs() < 0.01,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for m in 1..=4.min(args.max_m) {
        let spec = GhzSpec::new(m, rng.gen_range(-PI..PI))?;
        let state = build_ghz(&spec)?;
        let scale = (2.0 * PI).powi(m as i32);
        let mut worst: f64 = 0.0;
        for _ in 0..2_500 {
            let p: Vec<BlochSample> = (0..m)
                .map(|_| BlochSample::from_polar(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI)))
                .collect();
            let d = (q_density(&spec, &p)? - oracle_q_density(&state, &p)?).abs() * scale;
            worst = worst.max(d);
        }
        checks.push(Check {
            name: format!("density vs coherent overlap m={m}"),
            detail: format!("max |diff| {worst:.2e}"),
            pass: worst < 1e-12,
        });
    }

    for m in 1..=args.max_sampled_m.min(args.max_m) {
        let (spec, conv) = ConventionFamily::Auto.for_m(m)?;
        let exact = oracle_bell_value(&spec, &conv)?;
        let (est, _) = bell_point(&engine, &spec, &conv, args.samples, args.seed)?;
        let d = est.operator_mean - exact.operator_mean;
        let (se_re, se_im) = est.operator_stderr;
        let z = (d.re / se_re).abs().max((d.im / se_im).abs());
        let zf = ((est.f_value - exact.f) / est.f_stderr).abs();
        checks.push(Check {
            name: format!("sampled moments m={m} ({})", conv.label().name()),
            detail: format!("max |z| operator {z:.2}, F {zf:.2}"),
            pass: z < 4.0 && zf < 4.0,
        });
    }

    let mut report = String::new();
    let failures = checks.iter().filter(|c| !c.pass).count();
    for c in &checks {
        report.push_str(&format!(
            "{:<4}  {:<44}  {}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        ));
    }
    report.push_str(&format!("{} checks, {} failed\n", checks.len(), failures));
    write_atomic(args.out.as_deref(), &report)?;
    if failures > 0 {
        return Err(CliError::Internal(format!("{failures} oracle checks failed")));
    }
    Ok(())
}

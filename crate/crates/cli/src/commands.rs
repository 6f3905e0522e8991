//! Subcommand implementations. Each returns whether all assertions held.

use crate::config::{parse_function, ExperimentConfig, Flags};
use crate::report::{fmt17, to_json, write_json, write_sweep_csv, write_table};
use crate::CliError;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdc_core::analysis::{
    bernstein_inequality_check, disk_sup_norm, fit_order, sweep, ConvergenceRecord, SweepConfig, SweepKind, SUP_SAMPLES,
};
use sdc_core::moments::{moment_direct, moment_error_bound, moment_recurrence};
use sdc_core::{ComplexPolynomial, OperatorConfig, TaylorFunction};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Residual rows at or below this are reported as exact cancellations.
pub const EXACT_THRESHOLD: f64 = 1e-13;
/// Largest admissible `max ratio / min ratio` over a sweep.
pub const WINDOW_LIMIT: f64 = 20.0;
pub const ORACLE_TOLERANCE: f64 = 1e-9;
const ORACLE_POINTS: usize = 64;
const ORACLE_RADII: [f64; 2] = [1.0, 2.0];
const BERNSTEIN_TRIALS: usize = 100;
const BERNSTEIN_MAX_DEGREE: usize = 10;

#[derive(Serialize, Clone, Debug)]
pub struct FitSummary {
    pub slope: f64,
    pub intercept: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub window: f64,
}

#[derive(Serialize, Clone, Debug)]
pub struct SweepSummary {
    pub command: &'static str,
    pub function: String,
    pub certified: bool,
    pub bn: String,
    pub r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    pub derivative_order: usize,
    pub n_values: Vec<u32>,
    pub failed_rows: Vec<u32>,
    pub exact_rows: Vec<u32>,
    pub bounds_pass: bool,
    pub fit: Option<FitSummary>,
    pub nominal_slope: f64,
    pub slope_tolerance: f64,
    pub slope_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_limit: Option<f64>,
    pub window_pass: bool,
    pub pass: bool,
}

fn command_name(kind: SweepKind) -> &'static str {
    match kind {
        SweepKind::Upper => "converge",
        SweepKind::Voronovskaja => "voronovskaja",
        SweepKind::Derivative { .. } => "derivative",
    }
}

/// Runs a sweep and evaluates its bound, slope and window assertions.
pub fn run_sweep(cfg: &ExperimentConfig, r: f64, kind: SweepKind) -> Result<(Vec<ConvergenceRecord>, SweepSummary), CliError> {
    let f = &cfg.function;
    if f.is_constant() {
        return Err(sdc_core::Error::DegenerateData("order fit of a constant function".into()).into());
    }
    let ns = cfg.n_range.values()?;
    let rows = sweep(f, &SweepConfig::new(cfg.bn_rule, ns.clone(), r, kind))?;

    let failed_rows: Vec<u32> = rows.iter().filter(|r| r.fails_assertion()).map(|r| r.n).collect();
    let exact_rows: Vec<u32> = rows.iter().filter(|r| r.error <= EXACT_THRESHOLD).map(|r| r.n).collect();
    let fit_rows: Vec<ConvergenceRecord> = rows.iter().filter(|r| r.error > EXACT_THRESHOLD).cloned().collect();
    let fit = if fit_rows.is_empty() {
        None
    } else {
        Some(fit_order(&fit_rows)?)
    };

    let nominal_slope = kind.nominal_slope(cfg.bn_rule);
    let slope_tolerance = cfg.slope_tol.unwrap_or(match kind {
        SweepKind::Upper => 0.05,
        _ => 0.1,
    });
    let slope_pass = fit.is_none_or(|fit| (fit.slope - nominal_slope).abs() <= slope_tolerance);
    let window_limit = match kind {
        SweepKind::Voronovskaja => None,
        _ => Some(WINDOW_LIMIT),
    };
    let window_pass = match (window_limit, fit) {
        (Some(limit), Some(fit)) => fit.ratio_min > 0.0 && fit.window() <= limit,
        _ => true,
    };
    let bounds_pass = failed_rows.is_empty();
    let summary = SweepSummary {
        command: command_name(kind),
        function: cfg.function_label.clone(),
        certified: f.is_certified(),
        bn: cfg.bn_rule.to_string(),
        r,
        r1: match kind {
            SweepKind::Derivative { r1, .. } => Some(r1),
            _ => None,
        },
        derivative_order: kind.derivative_order(),
        n_values: ns,
        failed_rows,
        exact_rows,
        bounds_pass,
        fit: fit.map(|f| FitSummary {
            slope: f.slope,
            intercept: f.intercept,
            ratio_min: f.ratio_min,
            ratio_max: f.ratio_max,
            window: f.window(),
        }),
        nominal_slope,
        slope_tolerance,
        slope_pass,
        window_limit,
        window_pass,
        pass: bounds_pass && slope_pass && window_pass,
    };
    Ok((rows, summary))
}

/// Writes the CSV to `--out` (summary next to it as `.json`, echoed on
/// stdout) or, without `--out`, the CSV to stdout and the summary to stderr.
fn emit<S: Serialize>(
    out: Option<&Path>,
    csv: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
    summary: &S,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            csv(&mut file)?;
            file.flush()?;
            write_json(&path.with_extension("json"), summary)?;
            println!("{}", to_json(summary));
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            csv(&mut lock)?;
            eprintln!("{}", to_json(summary));
        }
    }
    Ok(())
}

pub fn sweep_command(cfg: &ExperimentConfig, kind: SweepKind) -> Result<bool, CliError> {
    if let SweepKind::Derivative { .. } = kind {
        cfg.validate_derivative()?;
    }
    let (rows, summary) = run_sweep(cfg, cfg.r, kind)?;
    emit(cfg.out.as_deref(), |w| write_sweep_csv(w, &rows), &summary)?;
    Ok(summary.pass)
}

#[derive(Serialize, Clone, Debug)]
pub struct MomentsSummary {
    pub n: u32,
    pub b_n: f64,
    pub p_max: usize,
    pub r: f64,
    pub max_oracle_delta: f64,
    pub oracle_tolerance: f64,
    pub oracle_pass: bool,
    pub bounds_pass: bool,
    pub pass: bool,
}

fn moments_table(cfg: &ExperimentConfig) -> Result<(Vec<Vec<String>>, MomentsSummary), CliError> {
    let op = OperatorConfig::new(cfg.n, cfg.bn_rule);
    let b_n = op.validate()?;
    let table = moment_recurrence(cfg.n, b_n, cfg.pmax)?;
    let mut rows = Vec::new();
    let (mut max_delta, mut bounds_pass) = (0.0f64, true);
    for p in 0..=cfg.pmax {
        let poly = table.poly(p);
        let mut delta = 0.0f64;
        for radius in ORACLE_RADII {
            for j in 0..ORACLE_POINTS {
                let z = Complex64::from_polar(radius, TAU * j as f64 / ORACLE_POINTS as f64);
                let rec = table.eval(p, z);
                let direct = moment_direct(cfg.n, b_n, p, z, op.series_tol)?;
                delta = delta.max((rec - direct).norm() / rec.norm());
            }
        }
        max_delta = max_delta.max(delta);
        let error = disk_sup_norm(|z| table.eval(p, z) - z.powi(p as i32), cfg.r, SUP_SAMPLES);
        let bound = if p == 0 { 0.0 } else { moment_error_bound(cfg.n, b_n, p, cfg.r)? };
        bounds_pass &= error <= bound * (1.0 + sdc_core::analysis::SAMPLING_SLACK) || (p == 0 && error == 0.0);
        let coeffs: Vec<String> = poly.coeffs().iter().map(|c| fmt17(c.re)).collect();
        rows.push(vec![p.to_string(), coeffs.join(" "), fmt17(delta), fmt17(error), fmt17(bound), fmt17(bound - error)]);
    }
    let oracle_pass = max_delta <= ORACLE_TOLERANCE;
    let summary = MomentsSummary {
        n: cfg.n,
        b_n,
        p_max: cfg.pmax,
        r: cfg.r,
        max_oracle_delta: max_delta,
        oracle_tolerance: ORACLE_TOLERANCE,
        oracle_pass,
        bounds_pass,
        pass: oracle_pass && bounds_pass,
    };
    Ok((rows, summary))
}

pub const MOMENTS_HEADER: [&str; 6] = ["p", "coefficients", "oracle_delta", "error", "bound", "margin"];

pub fn moments(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let (rows, summary) = moments_table(cfg)?;
    emit(cfg.out.as_deref(), |w| write_table(w, &MOMENTS_HEADER, &rows), &summary)?;
    Ok(summary.pass)
}

#[derive(Serialize, Clone, Debug)]
pub struct BernsteinSummary {
    pub seed: u64,
    pub r: f64,
    pub trials_per_degree: usize,
    pub failures: usize,
    pub max_ratio: f64,
    pub pass: bool,
}

/// `‖P'‖_r / ((p/r)‖P‖_r)` over seeded random constant-free polynomials.
pub fn bernstein_suite(seed: u64, r: f64) -> Result<(Vec<Vec<String>>, BernsteinSummary), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let (mut failures, mut max_ratio) = (0usize, 0.0f64);
    for degree in 1..=BERNSTEIN_MAX_DEGREE {
        let (mut passed, mut worst) = (0usize, 0.0f64);
        for _ in 0..BERNSTEIN_TRIALS {
            let mut coeffs = vec![Complex64::new(0.0, 0.0)];
            coeffs.extend((0..degree).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))));
            let poly = ComplexPolynomial::new(coeffs);
            if bernstein_inequality_check(&poly, r)? {
                passed += 1;
            }
            let d = poly.derivative();
            let ratio = disk_sup_norm(|z| d.eval(z), r, SUP_SAMPLES)
                / (degree as f64 / r * disk_sup_norm(|z| poly.eval(z), r, SUP_SAMPLES));
            worst = worst.max(ratio);
        }
        failures += BERNSTEIN_TRIALS - passed;
        max_ratio = max_ratio.max(worst);
        rows.push(vec![degree.to_string(), BERNSTEIN_TRIALS.to_string(), passed.to_string(), fmt17(worst)]);
    }
    let summary =
        BernsteinSummary { seed, r, trials_per_degree: BERNSTEIN_TRIALS, failures, max_ratio, pass: failures == 0 };
    Ok((rows, summary))
}

#[derive(Serialize, Clone, Debug)]
pub struct NegativeControlSummary {
    pub rejected_without_override: bool,
    pub rows_reported: usize,
    pub rows_within_bound: usize,
    pub pass: bool,
}

/// The uncertified preset must be refused unless overridden, and with the
/// override its bound rows must be reported.
pub fn negative_control(cfg: &ExperimentConfig) -> Result<(Vec<ConvergenceRecord>, NegativeControlSummary), CliError> {
    let strict = Flags { function: Some("exp_uncertified".into()), ..Flags::default() };
    let rejected = matches!(ExperimentConfig::resolve(&strict), Err(CliError::Core(sdc_core::Error::Uncertified)));
    let f: TaylorFunction = parse_function("exp_uncertified")?.load()?;
    let ns = cfg.n_range.values()?;
    let rows = sweep(&f, &SweepConfig::new(cfg.bn_rule, ns, 1.0, SweepKind::Upper))?;
    let within = rows.iter().filter(|r| r.passes).count();
    let summary = NegativeControlSummary {
        rejected_without_override: rejected,
        rows_reported: rows.len(),
        rows_within_bound: within,
        pass: rejected && !rows.is_empty(),
    };
    Ok((rows, summary))
}

pub const DEFAULT_VERIFY_DIR: &str = "verify-out";
pub const BERNSTEIN_HEADER: [&str; 4] = ["degree", "trials", "passed", "max_ratio"];

#[derive(Serialize)]
struct VerifySummary {
    seed: u64,
    function: String,
    bn: String,
    checks: BTreeMap<String, bool>,
    moments: MomentsSummary,
    sweeps: BTreeMap<String, SweepSummary>,
    bernstein: BernsteinSummary,
    negative_control: NegativeControlSummary,
    pass: bool,
}

/// Runs every suite, writing one CSV each plus `summary.json` into the
/// output directory.
pub fn verify_all(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let dir: PathBuf = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_VERIFY_DIR));
    std::fs::create_dir_all(&dir)?;
    let csv_at = |name: &str| -> Result<BufWriter<File>, CliError> { Ok(BufWriter::new(File::create(dir.join(name))?)) };

    let (moment_rows, moments) = moments_table(cfg)?;
    write_table(csv_at("moments.csv")?, &MOMENTS_HEADER, &moment_rows)?;

    let mut sweeps = BTreeMap::new();
    let plan = [
        ("converge_r1", 1.0, SweepKind::Upper),
        ("converge_r2", 2.0, SweepKind::Upper),
        ("voronovskaja_r1", 1.0, SweepKind::Voronovskaja),
        ("voronovskaja_r2", 2.0, SweepKind::Voronovskaja),
        ("derivative_p1", 1.5, SweepKind::Derivative { p: 1, r1: 2.0 }),
        ("derivative_p2", 1.5, SweepKind::Derivative { p: 2, r1: 2.0 }),
    ];
    for (name, r, kind) in plan {
        let (rows, summary) = run_sweep(cfg, r, kind)?;
        write_sweep_csv(csv_at(&format!("{name}.csv"))?, &rows)?;
        sweeps.insert(name.to_string(), summary);
    }

    let (bern_rows, bernstein) = bernstein_suite(cfg.seed, 1.0)?;
    write_table(csv_at("bernstein.csv")?, &BERNSTEIN_HEADER, &bern_rows)?;

    let (neg_rows, negative_control) = negative_control(cfg)?;
    write_sweep_csv(csv_at("negative_control.csv")?, &neg_rows)?;

    let mut checks = BTreeMap::new();
    checks.insert("moments".to_string(), moments.pass);
    for (name, s) in &sweeps {
        checks.insert(format!("{name}.bounds"), s.bounds_pass);
        checks.insert(format!("{name}.slope"), s.slope_pass);
        checks.insert(format!("{name}.window"), s.window_pass);
    }
    checks.insert("bernstein".to_string(), bernstein.pass);
    checks.insert("negative_control".to_string(), negative_control.pass);
    let pass = checks.values().all(|&v| v);
    let summary = VerifySummary {
        seed: cfg.seed,
        function: cfg.function_label.clone(),
        bn: cfg.bn_rule.to_string(),
        checks,
        moments,
        sweeps,
        bernstein,
        negative_control,
        pass,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    for (name, ok) in &summary.checks {
        println!("{} {name}", if *ok { "PASS" } else { "FAIL" });
    }
    Ok(pass)
}

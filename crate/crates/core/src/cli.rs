//! Command-line front end. Every subcommand reads a JSON config (with
//! `schema_version`) and/or a snapshot directory and writes its results
//! atomically.
//!
//! Exit codes: 0 success, 1 a negative check-steadiness verdict, 2 a
//! malformed config, 3 a numerical or file failure.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{self, Verdict};
use crate::error::{Error, Result};
use crate::io::{
    self, fmt_f64, load_config, read_series, snapshot_stem, write_csv, write_json, write_snapshot,
};
use crate::model::ModelParams;
use crate::spectral::Grid2D;
use crate::timestep::{self, DiagnosticsRow, InitialSpec, RunConfig, Snapshot};
use crate::transform::{self, SampledField, ScaleMap};
use crate::twsolve::{self, TwOptions};
use crate::weakform::{self, AffineAxis, BumpSpec, BumpSpec2D, QuadOptions, ScanConfig, TrigField};

/// `println!` that tolerates a closed stdout (e.g. piping into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Debug, Parser)]
#[command(
    name = "chkp-lab",
    version,
    about = "Pseudospectral CH-KP / HCP laboratory"
)]
pub struct Cli {
    /// Run all parallel loops on one thread.
    #[arg(long, global = true)]
    pub deterministic: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve an initial field; writes snapshots and diagnostics.csv.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Symmetry report of a snapshot series, as JSON on stdout.
    CheckSymmetry {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Steadiness report as JSON on stdout; exits 0 only for a steady verdict.
    CheckSteadiness {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for a traveling wave and continue its branch.
    TwSolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate one weak-form residual; prints `value +- estimate`.
    WeakResidual {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Zero set of the peakon family over an amplitude/speed grid.
    PeakonScan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Map a snapshot series between physical and normalized variables.
    Transform {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

pub const DIAGNOSTICS_HEADER: [&str; 10] = [
    "t",
    "l2_norm",
    "h1_seminorm",
    "max_abs",
    "xmean_drift",
    "asymmetry_score",
    "axis_lambda",
    "speed_estimate",
    "shape_error",
    "status",
];

fn diagnostics_row(r: &DiagnosticsRow) -> Vec<String> {
    let mut v: Vec<String> = [
        r.t,
        r.l2_norm,
        r.h1_seminorm,
        r.max_abs,
        r.xmean_drift,
        r.asymmetry_score,
        r.axis_lambda,
        r.speed_estimate,
        r.shape_error,
    ]
    .iter()
    .map(|&x| fmt_f64(x))
    .collect();
    v.push(if r.blowup { "blowup" } else { "ok" }.into());
    v
}

fn write_diagnostics(path: &Path, rows: &[DiagnosticsRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows.iter().map(diagnostics_row).collect();
    write_csv(path, &DIAGNOSTICS_HEADER, &rows)
}

fn simulate(config: &Path, out: &Path) -> Result<()> {
    let cfg: RunConfig = load_config(config)?;
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut count = 0;
    let result = timestep::simulate_with(&cfg, |snap, row| {
        write_snapshot(out, &snapshot_stem(count), snap, Some(&cfg.model))?;
        count += 1;
        rows.push(*row);
        Ok(())
    });
    if let Err(Error::BlowUp { t }) = &result {
        rows.push(DiagnosticsRow::blowup(*t));
    }
    write_diagnostics(&out.join("diagnostics.csv"), &rows)?;
    result?;
    log::info!("wrote {count} snapshots to {}", out.display());
    Ok(())
}

fn load_series(dir: &Path) -> Result<Vec<Snapshot>> {
    let series = read_series(dir)?;
    if series.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no snapshots in {}",
            dir.display()
        )));
    }
    Ok(series)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    say!("{}", serde_json::to_string_pretty(value)?);
    if let Some(p) = out {
        write_json(p, value)?;
    }
    Ok(())
}

fn check_symmetry(input: &Path, out: Option<&Path>) -> Result<()> {
    let report = analysis::symmetry_report(&load_series(input)?)?;
    emit(&report, out)
}

fn check_steadiness(input: &Path, threshold: Option<f64>, out: Option<&Path>) -> Result<bool> {
    let series = load_series(input)?;
    let report = match threshold {
        Some(t) => analysis::steadiness_report_with(&series, t)?,
        None => analysis::steadiness_report(&series)?,
    };
    emit(&report, out)?;
    Ok(report.verdict == Verdict::Steady)
}

/// `tw-solve` config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwConfig {
    pub model: ModelParams,
    pub grid: Grid2D,
    /// Pinned value `g(0, ly/2)` of the first profile.
    pub amplitude: f64,
    /// Transverse index of the linear seed `cos(xi_1 x) cos(eta_k y)`.
    #[serde(default)]
    pub transverse_mode: usize,
    #[serde(default = "default_tw_tol")]
    pub tol: f64,
    /// Defaults to the linear speed of the seed mode.
    #[serde(default)]
    pub speed_guess: Option<f64>,
    #[serde(default)]
    pub continuation: Option<Continuation>,
    /// When present, a run config evolving the profile for one transit is
    /// written next to it.
    #[serde(default)]
    pub evolve: Option<EvolveHint>,
}

fn default_tw_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Continuation {
    pub step: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveHint {
    pub dt: f64,
    pub snapshot_every: usize,
}

/// Summary written as `tw.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwSummary {
    pub model: ModelParams,
    pub speed: f64,
    pub amplitude: f64,
    pub residual_norm: f64,
    pub transit_time: f64,
    pub profile: PathBuf,
    pub branch_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch_stopped: Option<String>,
}

fn config_err(path: &str, e: impl std::fmt::Display) -> Error {
    Error::Config {
        path: path.into(),
        message: e.to_string(),
    }
}

fn tw_solve(config: &Path, out: &Path) -> Result<()> {
    let cfg: TwConfig = load_config(config)?;
    cfg.grid.validate().map_err(|e| config_err("grid", e))?;
    cfg.model.validate().map_err(|e| config_err("model", e))?;
    if !(cfg.tol > 0.0) {
        return Err(config_err("tol", "must be positive"));
    }
    let (seed, c_lin) =
        twsolve::linear_seed(&cfg.grid, &cfg.model, cfg.amplitude, cfg.transverse_mode)?;
    let c0 = cfg.speed_guess.unwrap_or(c_lin);
    let wave = twsolve::solve_tw_with(&seed, c0, &cfg.model, cfg.tol, &TwOptions::default())?;
    log::info!("speed {} residual {:e}", wave.speed, wave.residual_norm);
    let profile = write_snapshot(
        out,
        "tw_profile",
        &Snapshot {
            t: 0.0,
            field: wave.profile.clone(),
        },
        Some(&cfg.model),
    )?;
    let branch = match cfg.continuation {
        Some(c) => twsolve::continue_branch(&wave, c.step, c.steps),
        None => twsolve::Branch {
            waves: vec![wave.clone()],
            stopped: None,
        },
    };
    let rows: Vec<Vec<String>> = branch
        .table()
        .iter()
        .map(|b| vec![fmt_f64(b.amplitude), fmt_f64(b.c), fmt_f64(b.residual_norm)])
        .collect();
    write_csv(&out.join("branch.csv"), &["A", "c", "residual_norm"], &rows)?;
    if let Some(e) = &branch.stopped {
        log::warn!("continuation stopped early: {e}");
    }
    if let Some(h) = cfg.evolve {
        let run = RunConfig {
            model: cfg.model,
            grid: cfg.grid,
            t_end: wave.transit_time(),
            dt: h.dt,
            snapshot_every: h.snapshot_every,
            initial: InitialSpec::File {
                path: std::path::absolute(&profile)?,
            },
            seed: 0,
        };
        let mut v = serde_json::to_value(&run)?;
        v["schema_version"] = io::SCHEMA_VERSION.into();
        write_json(&out.join("run_config.json"), &v)?;
    }
    let summary = TwSummary {
        model: cfg.model,
        speed: wave.speed,
        amplitude: wave.amplitude,
        residual_norm: wave.residual_norm,
        transit_time: wave.transit_time(),
        profile,
        branch_points: branch.waves.len(),
        branch_stopped: branch.stopped.map(|e| e.to_string()),
    };
    write_json(&out.join("tw.json"), &summary)
}

/// Fields accepted by `weak-residual`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero,
    /// `a exp(-|x + theta y - c t|)`; in the steady form `c` is ignored.
    Peakon {
        a: f64,
        theta: f64,
        c: f64,
    },
    /// Plane-wave sum; space-time form only.
    Trig {
        terms: Vec<weakform::TrigTerm>,
    },
    /// Snapshot profile; steady form only.
    Snapshot {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeakConfig {
    /// Integral over time and the plane against a space-time bump.
    SpaceTime {
        model: ModelParams,
        field: FieldSpec,
        test_function: BumpSpec,
        /// Reflects the test function about this moving axis first.
        #[serde(default)]
        reflect: Option<AffineAxis>,
        #[serde(default)]
        quad: Option<QuadOptions>,
    },
    /// Traveling-frame integral against a planar bump.
    Steady {
        model: ModelParams,
        field: FieldSpec,
        speed: f64,
        test_function: BumpSpec2D,
        #[serde(default)]
        quad: Option<QuadOptions>,
    },
}

fn weak_residual(config: &Path, out: Option<&Path>) -> Result<()> {
    let cfg: WeakConfig = load_config(config)?;
    let r = match &cfg {
        WeakConfig::SpaceTime {
            model,
            field,
            test_function,
            reflect,
            quad,
        } => {
            model.validate().map_err(|e| config_err("model", e))?;
            let q = quad.unwrap_or_default();
            let u: Box<dyn weakform::ClosedFormField> = match field {
                FieldSpec::Zero => Box::new(weakform::ZeroField),
                FieldSpec::Peakon { a, theta, c } => Box::new(weakform::PeakonParams {
                    a: *a,
                    theta: *theta,
                    c: *c,
                }),
                FieldSpec::Trig { terms } => Box::new(TrigField {
                    terms: terms.clone(),
                }),
                FieldSpec::Snapshot { .. } => {
                    return Err(config_err(
                        "field.kind",
                        "snapshot fields need the steady form",
                    ))
                }
            };
            match reflect {
                Some(axis) => {
                    let phi = weakform::reflect_test_function(test_function, *axis);
                    weakform::weak_residual(u.as_ref(), &phi, model, &q)?
                }
                None => weakform::weak_residual(u.as_ref(), test_function, model, &q)?,
            }
        }
        WeakConfig::Steady {
            model,
            field,
            speed,
            test_function,
            quad,
        } => {
            model.validate().map_err(|e| config_err("model", e))?;
            let q = quad.unwrap_or_default();
            let u: Box<dyn weakform::SteadyField> = match field {
                FieldSpec::Zero => Box::new(weakform::ZeroField),
                FieldSpec::Peakon { a, theta, .. } => Box::new(weakform::SteadyPeakon {
                    a: *a,
                    theta: *theta,
                }),
                FieldSpec::Snapshot { path } => {
                    let (_, snap) = io::read_snapshot(path)?;
                    Box::new(weakform::SpectralProfile::new(&snap.field))
                }
                FieldSpec::Trig { .. } => {
                    return Err(config_err(
                        "field.kind",
                        "trig fields need the space_time form",
                    ))
                }
            };
            weakform::steady_weak_residual(u.as_ref(), *speed, test_function, model, &q)?
        }
    };
    say!(
        "{} +- {}",
        fmt_f64(r.value),
        fmt_f64(r.quadrature_error_estimate)
    );
    if let Some(p) = out {
        write_json(p, &r)?;
    }
    Ok(())
}

fn peakon_scan(config: &Path, out: &Path) -> Result<()> {
    let cfg: ScanConfig = load_config(config)?;
    let z = weakform::peakon_scan(&cfg)?;
    let table = |pts: &[weakform::ScanPoint]| -> Vec<Vec<String>> {
        pts.iter()
            .map(|p| vec![fmt_f64(p.a), fmt_f64(p.c), fmt_f64(p.r)])
            .collect()
    };
    write_csv(
        &out.join("zero_set.csv"),
        &["a", "c", "R"],
        &table(&z.zeros),
    )?;
    write_csv(&out.join("scan.csv"), &["a", "c", "R"], &table(&z.grid))?;
    write_json(&out.join("zero_set.json"), &z)?;
    match &z.fit {
        Some(f) => say!(
            "{} zero-set points; c = {} a + {} (max residual {:e})",
            z.zeros.len(),
            f.slope,
            f.intercept,
            f.max_residual
        ),
        None => say!("{} zero-set points; no affine fit", z.zeros.len()),
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToPhysical,
    ToNormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    pub epsilon: f64,
    pub gamma_phys: f64,
    pub kappa: f64,
    pub direction: Direction,
}

/// Written as `transform.json`; the residual is only available for physical
/// output with at least seven frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    pub map: ScaleMap,
    pub direction: Direction,
    pub frames: usize,
    pub xt_scale: f64,
    pub y_scale: f64,
    pub drift: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_physical_residual: Option<f64>,
}

fn transform_cmd(config: &Path, input: &Path, out: &Path) -> Result<()> {
    let cfg: TransformConfig = load_config(config)?;
    let m = ScaleMap {
        epsilon: cfg.epsilon,
        gamma_phys: cfg.gamma_phys,
        kappa: cfg.kappa,
    };
    m.validate().map_err(|e| config_err(".", e))?;
    let src = SampledField::new(load_series(input)?)?;
    let (mapped, model) = match cfg.direction {
        Direction::ToPhysical => (
            transform::from_normalized(&src, &m)?,
            ModelParams::ChkpPhysical {
                epsilon: m.epsilon,
                gamma_phys: m.gamma_phys,
            },
        ),
        Direction::ToNormalized => (transform::to_normalized(&src, &m)?, m.normalized_model()),
    };
    for (i, f) in mapped.frames().iter().enumerate() {
        write_snapshot(out, &snapshot_stem(i), f, Some(&model))?;
    }
    let max_physical_residual = match cfg.direction {
        Direction::ToPhysical if mapped.frames().len() >= 7 => {
            let mut worst: f64 = 0.0;
            for i in 3..mapped.frames().len() - 3 {
                worst = worst.max(transform::physical_residual(&mapped, &m, i)?.max_abs());
            }
            Some(worst)
        }
        _ => None,
    };
    let report = TransformReport {
        map: m,
        direction: cfg.direction,
        frames: mapped.frames().len(),
        xt_scale: m.xt_scale(),
        y_scale: m.y_scale(),
        drift: m.drift(),
        max_physical_residual,
    };
    write_json(&out.join("transform.json"), &report)?;
    emit(&report, None)
}

/// Exit code for an error: 2 for configs, 3 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => 2,
        _ => 3,
    }
}

/// Runs one parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    if cli.deterministic {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build_global()
        {
            log::warn!("could not force a single thread: {e}");
        }
    }
    let result = match &cli.command {
        Command::Simulate { config, out } => simulate(config, out).map(|_| 0),
        Command::CheckSymmetry { input, out } => check_symmetry(input, out.as_deref()).map(|_| 0),
        Command::CheckSteadiness {
            input,
            threshold,
            out,
        } => check_steadiness(input, *threshold, out.as_deref())
            .map(|steady| if steady { 0 } else { 1 }),
        Command::TwSolve { config, out } => tw_solve(config, out).map(|_| 0),
        Command::WeakResidual { config, out } => weak_residual(config, out.as_deref()).map(|_| 0),
        Command::PeakonScan { config, out } => peakon_scan(config, out).map(|_| 0),
        Command::Transform { config, input, out } => transform_cmd(config, input, out).map(|_| 0),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

//! Subcommand implementations.

use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rotns_core::coriolis_kernel;
use rotns_core::littlewood_paley::{DyadicPartition, Exponent, FourierBesovParams};
use rotns_core::solvers::{self, norm_name, SolveFailure, SolveReport, SolveStatus};
use rotns_core::spectral::leray_project;
use rotns_core::verification::{self, omega0_for};
use rotns_core::{CoriolisParams, FrequencyGrid, SpectralVectorField};
use serde::Serialize;
use thiserror::Error;

use crate::config::{self, ConfigError, ForceSpec, InitialSpec, LoadedConfig, RunConfig};
use crate::container::{self, ContainerError, Spectrum};
use crate::fft::RustFft;
use crate::output::{float, opt_float, Output, ResultRecord, SCHEMA};

/// Environment variable overriding the output directory (below `--out`).
pub const OUT_ENV: &str = "ROTNS_OUT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("cannot read spectrum: {0}")]
    Container(#[from] ContainerError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("numerical error: {0}")]
    Numerical(#[from] rotns_core::Error),
    #[error("solver did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("solver blew up at step {0}")]
    Blowup(usize),
    #[error("verification failed: {}", .0.join(", "))]
    VerifyFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NonConvergence(_) => 2,
            CliError::Blowup(_) => 3,
            CliError::VerifyFailed(_) => 4,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SolveStationary,
    SolveTransient,
    SweepOmega,
    Verify,
    Norms,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SolveStationary => "solve-stationary",
            Command::SolveTransient => "solve-transient",
            Command::SweepOmega => "sweep-omega",
            Command::Verify => "verify",
            Command::Norms => "norms",
        }
    }
}

/// Parsed command line.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
}

/// One line per run for the terminal.
#[derive(Debug, Clone)]
pub struct Summary {
    pub message: String,
    pub out_dir: PathBuf,
}

pub fn run(inv: &Invocation) -> Result<Summary, CliError> {
    let loaded = match &inv.config {
        Some(path) => Some(config::load(path)?),
        None if inv.command == Command::Norms => None,
        None => return Err(CliError::Usage(format!("{} requires --config PATH", inv.command.name()))),
    };
    let out_dir = inv
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| {
            loaded
                .as_ref()
                .and_then(|c| c.raw.output.dir.as_ref().map(|d| c.base_dir.join(d)))
        })
        .unwrap_or_else(|| PathBuf::from("out"));
    let seed = inv
        .seed
        .unwrap_or_else(|| loaded.as_ref().map_or(0, |c| c.raw.experiment.seed));
    let formats = loaded
        .as_ref()
        .map(|c| c.raw.output.formats.clone())
        .unwrap_or_else(|| vec![config::Format::Csv, config::Format::Json]);
    let start = Instant::now();
    let ctx = match loaded {
        Some(cfg) => Some(Prepared::new(cfg, seed)?),
        None => None,
    };
    // everything that can fail on input is checked before the directory is created
    let input = match inv.command {
        Command::Norms => {
            let path = inv
                .input
                .as_ref()
                .ok_or_else(|| CliError::Usage("norms requires --input PATH".into()))?;
            Some(container::read(path)?)
        }
        _ => None,
    };
    let out = Output::create(&out_dir, &formats)?;
    let result = match (inv.command, ctx) {
        (Command::SolveStationary, Some(ctx)) => solve_stationary(&ctx, &out),
        (Command::SolveTransient, Some(ctx)) => solve_transient(&ctx, &out),
        (Command::SweepOmega, Some(ctx)) => sweep_omega(&ctx, &out),
        (Command::Verify, Some(ctx)) => verify(&ctx, &out),
        (Command::Norms, ctx) => norms(ctx.as_ref(), input.expect("checked above"), seed, &out),
        (_, None) => unreachable!("config presence checked above"),
    };
    out.timing(inv.command.name(), start.elapsed().as_secs_f64())?;
    result.map(|message| Summary { message, out_dir })
}

/// Config plus the objects every command needs.
struct Prepared {
    cfg: LoadedConfig,
    seed: u64,
    fft: RustFft,
    /// The force, built before any output is written.
    force: ForceBuild,
}

impl Prepared {
    fn new(cfg: LoadedConfig, seed: u64) -> Result<Self, CliError> {
        let fft = RustFft::new();
        let force = build_force(&cfg, seed, &fft)?;
        Ok(Self { cfg, seed, fft, force })
    }

    fn raw(&self) -> &RunConfig {
        &self.cfg.raw
    }

    fn grid(&self) -> FrequencyGrid {
        self.cfg.grid
    }

    fn record<'a, T: Serialize>(&'a self, command: &'static str, outputs: T) -> ResultRecord<'a, T> {
        ResultRecord {
            schema: SCHEMA,
            experiment: &self.cfg.raw.experiment.id,
            command,
            seed: self.seed,
            inputs: &self.cfg.raw,
            outputs,
        }
    }
}

// ---------------------------------------------------------------- forces

#[derive(Debug, Clone, Serialize)]
pub struct ManufacturedInfo {
    /// `||u*||` in the convergence norm.
    pub amplitude: f64,
    /// Measured `||B(s, s)|| / ||s||^2` of the unit-norm shape `s`.
    pub eta_shape: f64,
    /// `1 / (4 eta_shape)`.
    pub threshold_amplitude: f64,
    pub band: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ForceInfo {
    pub kind: &'static str,
    /// `||F||_{FB^{-3/p}_{p,p}}`.
    pub fb_norm: f64,
    /// `||P F||_{FB^{-3/p}_{p,p}}`.
    pub projected_fb_norm: f64,
    pub manufactured: Option<ManufacturedInfo>,
}

struct ForceBuild {
    field: SpectralVectorField,
    u_star: Option<SpectralVectorField>,
    info: ForceInfo,
}

fn support_filter(grid: FrequencyGrid, f: impl Fn([i64; 3], [f64; 3]) -> bool) -> impl FnMut(usize) -> bool {
    move |i| f(grid.integer_frequency(i), grid.xi(i))
}

fn rescale(field: SpectralVectorField, target: f64, norm: &FourierBesovParams) -> Result<SpectralVectorField, CliError> {
    let current = DyadicPartition::build(field.grid()).fb_norm(&field, norm)?;
    Ok(if current > 0.0 { field.scale(target / current) } else { field })
}

fn build_force(cfg: &LoadedConfig, seed: u64, fft: &RustFft) -> Result<ForceBuild, CliError> {
    let raw = &cfg.raw;
    let grid = cfg.grid;
    let params = cfg.params;
    let p = raw.solver.p;
    let force_norm = FourierBesovParams::force_space(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u_star = None;
    let mut manufactured = None;
    let (kind, field) = match &raw.force {
        ForceSpec::Zero => ("zero", SpectralVectorField::zeros(grid)),
        ForceSpec::Example { variant, scale } => (
            "example",
            verification::example_force(&grid, params.omega, *variant).scale(*scale),
        ),
        ForceSpec::File { path } => ("file", container::read_vector(&cfg.base_dir.join(path))?),
        ForceSpec::Random {
            amplitude,
            band,
            min_abs_k3,
            max_abs_k3,
            divergence_free,
        } => {
            let (band, lo, hi) = (*band, *min_abs_k3, max_abs_k3.unwrap_or(i64::MAX));
            let f = SpectralVectorField::random_real(
                grid,
                &mut rng,
                support_filter(grid, |k, _| {
                    k.iter().all(|c| c.abs() <= band) && (lo..=hi).contains(&k[2].abs())
                }),
            );
            let f = if *divergence_free { leray_project(&f) } else { f };
            ("random", rescale(f, *amplitude, &force_norm)?)
        }
        ForceSpec::Annulus {
            amplitude,
            radius_min,
            radius_max,
            delta,
        } => {
            let (a, b, d) = (*radius_min, *radius_max, *delta);
            let f = SpectralVectorField::random_real(
                grid,
                &mut rng,
                support_filter(grid, |_, xi| {
                    let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
                    r >= a && r <= b && xi[2].abs() >= d
                }),
            );
            ("annulus", rescale(leray_project(&f), *amplitude, &force_norm)?)
        }
        ForceSpec::Manufactured {
            amplitude,
            threshold_fraction,
            band,
        } => {
            let band = band.unwrap_or_else(|| verification::manufactured_band(&grid));
            let norm = raw.convergence_norm()?;
            let shape = rescale(verification::random_divergence_free(grid, &mut rng, band), 1.0, &norm)?;
            let eta = solvers::contraction_estimate(fft, &shape, &params, &norm)?;
            let threshold = if eta > 0.0 { 1.0 / (4.0 * eta) } else { f64::INFINITY };
            let amp = match (amplitude, threshold_fraction) {
                (Some(a), _) => *a,
                (None, Some(frac)) => frac * threshold,
                (None, None) => unreachable!("validated"),
            };
            if !amp.is_finite() {
                return Err(CliError::Config(ConfigError::Invalid {
                    field: "force.threshold_fraction",
                    message: "contraction threshold is unbounded for this shape; give `amplitude`".into(),
                }));
            }
            let us = shape.scale(amp);
            let f = verification::manufactured_force(fft, &us, &params)?;
            manufactured = Some(ManufacturedInfo {
                amplitude: amp,
                eta_shape: eta,
                threshold_amplitude: threshold,
                band,
            });
            u_star = Some(us);
            ("manufactured", f)
        }
    };
    if field.grid() != &grid {
        return Err(CliError::Config(ConfigError::Invalid {
            field: "force.path",
            message: format!("spectrum grid n={} does not match [grid]", field.grid().n()),
        }));
    }
    let part = DyadicPartition::build(&grid);
    let info = ForceInfo {
        kind,
        fb_norm: part.fb_norm(&field, &force_norm)?,
        projected_fb_norm: part.fb_norm(&leray_project(&field), &force_norm)?,
        manufactured,
    };
    Ok(ForceBuild { field, u_star, info })
}

fn build_initial(ctx: &Prepared, norm: &FourierBesovParams) -> Result<SpectralVectorField, CliError> {
    let grid = ctx.grid();
    match &ctx.raw().initial {
        InitialSpec::Zero => Ok(SpectralVectorField::zeros(grid)),
        InitialSpec::Random { amplitude, band } => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed.wrapping_add(1));
            let band = band.unwrap_or_else(|| verification::manufactured_band(&grid));
            rescale(verification::random_divergence_free(grid, &mut rng, band), *amplitude, norm)
        }
        InitialSpec::File { path } => {
            let u = container::read_vector(&ctx.cfg.base_dir.join(path))?;
            if u.grid() != &grid {
                return Err(CliError::Config(ConfigError::Invalid {
                    field: "initial.path",
                    message: "spectrum grid does not match [grid]".into(),
                }));
            }
            Ok(u)
        }
    }
}

// ---------------------------------------------------------------- solve-stationary

#[derive(Debug, Clone, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ManufacturedCheck {
    /// `||u - u*|| / ||u*||` in the convergence norm.
    pub recovery_error: f64,
    pub recovery_error_absolute: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StationaryOutputs {
    pub status: SolveStatus,
    pub converged: bool,
    pub iterations: usize,
    pub blowup_iteration: Option<usize>,
    pub final_increment: Option<f64>,
    pub contraction_estimate: f64,
    pub forcing_norm: f64,
    pub solution_norm: f64,
    /// `4 eta ||K P F||`; below 1 the fixed-point bound `||u|| <= 2 ||K P F||` applies.
    pub contraction_product: f64,
    pub within_fixed_point_ball: Option<bool>,
    /// Projected residual in `FB^{-3/p}_{p,p}`.
    pub pde_residual: Option<f64>,
    /// Unprojected residual with the recovered pressure, in `FB^{-3/p}_{p,p}`.
    pub momentum_residual: Option<f64>,
    pub max_divergence: f64,
    pub hermitian_defect: f64,
    pub divergence_warnings: usize,
    pub force: ForceInfo,
    pub manufactured: Option<ManufacturedCheck>,
    pub solution_norms: Vec<NamedValue>,
}

fn norm_rows(report: &SolveReport) -> Vec<Vec<String>> {
    report
        .norm_history
        .iter()
        .map(|s| {
            let inc = report.residual_history.get(s.iteration.wrapping_sub(1)).copied();
            vec![s.iteration.to_string(), s.name.clone(), float(s.value), opt_float(inc)]
        })
        .collect()
}

fn named_norms(u: &SpectralVectorField, list: &[FourierBesovParams]) -> Result<Vec<NamedValue>, CliError> {
    let part = DyadicPartition::build(u.grid());
    list.iter()
        .map(|p| {
            Ok(NamedValue {
                name: norm_name(p),
                value: part.fb_norm(u, p)?,
            })
        })
        .collect()
}

fn solve_stationary(ctx: &Prepared, out: &Output) -> Result<String, CliError> {
    let raw = ctx.raw();
    let scfg = raw.stationary_config()?;
    let params = ctx.cfg.params;
    let force = &ctx.force;
    let (u, report) = match solvers::solve_stationary(&ctx.fft, &force.field, &params, &scfg) {
        Ok(sol) => (Some(sol.u), sol.report),
        Err(SolveFailure::NonConvergence { u, report }) => (Some(u), report),
        Err(SolveFailure::Blowup { report }) => (None, report),
        Err(SolveFailure::Numerical(e)) => return Err(e.into()),
    };
    let residual_norm = FourierBesovParams::force_space(raw.solver.p)?;
    let part = DyadicPartition::build(&ctx.grid());
    let mut outputs = StationaryOutputs {
        status: report.status,
        converged: report.converged,
        iterations: report.iterations,
        blowup_iteration: report.blowup_iteration,
        final_increment: report.residual_history.last().copied(),
        contraction_estimate: report.contraction_estimate,
        forcing_norm: report.forcing_norm,
        solution_norm: report.solution_norm,
        contraction_product: 4.0 * report.contraction_estimate * report.forcing_norm,
        within_fixed_point_ball: None,
        pde_residual: None,
        momentum_residual: None,
        max_divergence: report.max_divergence,
        hermitian_defect: report.hermitian_defect,
        divergence_warnings: report.divergence_warnings,
        force: force.info.clone(),
        manufactured: None,
        solution_norms: Vec::new(),
    };
    if let Some(u) = &u {
        outputs.pde_residual = Some(solvers::pde_residual(
            &ctx.fft,
            u,
            &force.field,
            &params,
            &residual_norm,
            scfg.nonlinear,
        )?);
        if report.converged && outputs.contraction_product < 1.0 {
            outputs.within_fixed_point_ball = Some(report.solution_norm <= 2.0 * report.forcing_norm * (1.0 + 1e-12));
        }
        let pressure = solvers::recover_pressure(&ctx.fft, u, &force.field, &params)?;
        let mom = solvers::momentum_residual_field(&ctx.fft, u, &pressure, &force.field, &params)?;
        outputs.momentum_residual = Some(part.fb_norm(&mom, &residual_norm)?);
        if let Some(us) = &force.u_star {
            let err = part.fb_norm(&u.sub(us), &scfg.norm)?;
            let base = part.fb_norm(us, &scfg.norm)?;
            outputs.manufactured = Some(ManufacturedCheck {
                recovery_error: if base > 0.0 { err / base } else { err },
                recovery_error_absolute: err,
            });
        }
        outputs.solution_norms = named_norms(u, &raw.report_norms()?)?;
        container::write_vector(&out.path("solution.rspc"), u)?;
        container::write_scalar(&out.path("pressure.rspc"), &pressure)?;
    }
    out.csv(
        "norms.csv",
        &["iteration", "norm", "value", "relative_increment"],
        &norm_rows(&report),
    )?;
    let status = report.status;
    out.json("report.json", &ctx.record("solve-stationary", &outputs))?;
    match status {
        SolveStatus::Converged => Ok(format!(
            "converged in {} iterations; ||u|| = {:.6e}, pde residual = {:.3e}",
            report.iterations,
            report.solution_norm,
            outputs.pde_residual.unwrap_or(f64::NAN)
        )),
        SolveStatus::NonConvergence => Err(CliError::NonConvergence(report.iterations)),
        SolveStatus::Blowup => Err(CliError::Blowup(report.blowup_iteration.unwrap_or(report.iterations))),
    }
}

// ---------------------------------------------------------------- solve-transient

#[derive(Debug, Clone, Serialize)]
pub struct TransientOutputs {
    pub status: SolveStatus,
    pub steps: usize,
    pub t_end: f64,
    pub blowup_step: Option<usize>,
    pub trajectory_norm: String,
    pub initial_norm: f64,
    pub final_norm: f64,
    /// `max_t ||u(t)|| / ||u(0)||` in the first trajectory norm.
    pub max_norm_ratio: f64,
    /// Linear runs without force: `max |u(T) - G(T) u0| / max |u0|`.
    pub linear_exact_error: Option<f64>,
    /// Linear forced runs: `max |u(T) - K P F| / max |K P F|`.
    pub stationary_limit_error: Option<f64>,
    pub final_steady_residual: Option<f64>,
    pub max_divergence: f64,
    pub hermitian_defect: f64,
    pub force: ForceInfo,
}

fn max_diff(a: &SpectralVectorField, b: &SpectralVectorField) -> f64 {
    a.sub(b).max_abs()
}

fn solve_transient(ctx: &Prepared, out: &Output) -> Result<String, CliError> {
    let raw = ctx.raw();
    let tcfg = raw.transient_config()?;
    let params = ctx.cfg.params;
    let u0 = build_initial(ctx, &tcfg.norms[0])?;
    let force = (ctx.force.info.kind != "zero").then_some(&ctx.force.field);
    let names: Vec<String> = tcfg.norms.iter().map(norm_name).collect();
    let part = DyadicPartition::build(&ctx.grid());
    let initial_norm = part.fb_norm(&u0, &tcfg.norms[0])?;
    let result = solvers::solve_transient(&ctx.fft, &u0, force, &params, &tcfg);
    let (sol, report) = match result {
        Ok(sol) => {
            let r = sol.report.clone();
            (Some(sol), r)
        }
        Err(SolveFailure::Blowup { report }) => (None, report),
        Err(SolveFailure::NonConvergence { report, .. }) => (None, report),
        Err(SolveFailure::Numerical(e)) => return Err(e.into()),
    };
    let lead: Vec<f64> = report
        .norm_history
        .iter()
        .filter(|s| s.name == names[0])
        .map(|s| s.value)
        .collect();
    let max_norm = lead.iter().copied().fold(initial_norm, f64::max);
    let mut outputs = TransientOutputs {
        status: report.status,
        steps: report.iterations,
        t_end: tcfg.t_end,
        blowup_step: report.blowup_iteration,
        trajectory_norm: names[0].clone(),
        initial_norm,
        final_norm: report.solution_norm,
        max_norm_ratio: if initial_norm > 0.0 { max_norm / initial_norm } else { 0.0 },
        linear_exact_error: None,
        stationary_limit_error: None,
        final_steady_residual: report.residual_history.last().copied(),
        max_divergence: report.max_divergence,
        hermitian_defect: report.hermitian_defect,
        force: ctx.force.info.clone(),
    };
    let mut rows = Vec::new();
    if let Some(sol) = &sol {
        if !tcfg.nonlinear {
            match force {
                None => {
                    let exact = coriolis_kernel::apply_semigroup(tcfg.t_end, &u0, &params)?;
                    let scale = u0.max_abs();
                    let e = max_diff(&sol.u, &exact);
                    outputs.linear_exact_error = Some(if scale > 0.0 { e / scale } else { e });
                }
                Some(f) => {
                    let limit = coriolis_kernel::apply_stationary_kernel(&leray_project(f), &params);
                    let scale = limit.max_abs();
                    let e = max_diff(&sol.u, &limit);
                    outputs.stationary_limit_error = Some(if scale > 0.0 { e / scale } else { e });
                }
            }
        }
        for s in &sol.samples {
            let mut row = vec![s.step.to_string(), float(s.time)];
            row.extend(s.norms.iter().map(|v| float(*v)));
            row.push(float(s.steady_residual));
            rows.push(row);
        }
        container::write_vector(&out.path("final.rspc"), &sol.u)?;
    }
    let mut header: Vec<&str> = vec!["step", "t"];
    header.extend(names.iter().map(String::as_str));
    header.push("steady_residual");
    out.csv("trajectory.csv", &header, &rows)?;
    out.json("report.json", &ctx.record("solve-transient", &outputs))?;
    match report.status {
        SolveStatus::Blowup => Err(CliError::Blowup(report.blowup_iteration.unwrap_or(report.iterations))),
        SolveStatus::NonConvergence => Err(CliError::NonConvergence(report.iterations)),
        SolveStatus::Converged => Ok(format!(
            "{} steps to t = {}; max norm ratio {:.4}",
            report.iterations, tcfg.t_end, outputs.max_norm_ratio
        )),
    }
}

// ---------------------------------------------------------------- sweep-omega

#[derive(Debug, Clone, Serialize)]
pub struct SolvePoint {
    pub omega: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub final_increment: Option<f64>,
    pub contraction_estimate: f64,
    pub solution_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutputs {
    pub sweep: verification::SweepResult,
    pub force: ForceInfo,
    /// Stationary solves at `Omega = 0` and every swept value, when enabled.
    pub solves: Vec<SolvePoint>,
    /// Smallest swept `Omega` from which every larger swept value converged.
    pub first_converged_omega: Option<f64>,
    pub converged_at_largest: Option<bool>,
    pub baseline_status: Option<SolveStatus>,
}

fn sweep_omega(ctx: &Prepared, out: &Output) -> Result<String, CliError> {
    let raw = ctx.raw();
    let omegas = raw.sweep_values()?;
    let nu = ctx.cfg.params.nu;
    let window = raw.coriolis.fit_window.map(|w| (w[0], w[1]));
    let force = &ctx.force;
    let sweep = verification::omega_sweep(&force.field, raw.solver.p, nu, &omegas, &raw.coriolis.epsilons, window)?;
    let mut solves = Vec::new();
    if raw.solver.solve_sweep {
        let scfg = raw.stationary_config()?;
        let all: Vec<f64> = std::iter::once(0.0).chain(omegas.iter().copied()).collect();
        solves = all
            .par_iter()
            .map(|&omega| -> Result<SolvePoint, CliError> {
                let params = CoriolisParams::new(omega, nu)?;
                let report = match solvers::solve_stationary(&ctx.fft, &force.field, &params, &scfg) {
                    Ok(sol) => sol.report,
                    Err(SolveFailure::NonConvergence { report, .. }) | Err(SolveFailure::Blowup { report }) => report,
                    Err(SolveFailure::Numerical(e)) => return Err(e.into()),
                };
                Ok(SolvePoint {
                    omega,
                    status: report.status,
                    iterations: report.iterations,
                    final_increment: report.residual_history.last().copied(),
                    contraction_estimate: report.contraction_estimate,
                    solution_norm: report.solution_norm,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
    }
    let swept: Vec<&SolvePoint> = solves.iter().filter(|s| s.omega > 0.0).collect();
    let flags: Vec<f64> = swept
        .iter()
        .map(|s| if s.status == SolveStatus::Converged { 0.0 } else { 1.0 })
        .collect();
    let swept_omegas: Vec<f64> = swept.iter().map(|s| s.omega).collect();
    let outputs = SweepOutputs {
        first_converged_omega: omega0_for(&swept_omegas, &flags, 0.5),
        converged_at_largest: swept.last().map(|s| s.status == SolveStatus::Converged),
        baseline_status: solves.first().map(|s| s.status),
        sweep,
        force: force.info.clone(),
        solves,
    };
    let s = &outputs.sweep;
    let rows: Vec<Vec<String>> = (0..s.omega_values.len())
        .map(|i| {
            vec![
                float(s.omega_values[i]),
                float(s.xc_norms[i]),
                float(s.w1_parts[i]),
                float(s.w2_parts[i]),
                float(s.ratios[i]),
            ]
        })
        .collect();
    out.csv("sweep.csv", &["omega", "xc_norm", "w1_part", "w2_part", "ratio"], &rows)?;
    let rows: Vec<Vec<String>> = s
        .omega0
        .iter()
        .map(|e| vec![float(e.epsilon), opt_float(e.omega0)])
        .collect();
    out.csv("omega0.csv", &["epsilon", "omega0"], &rows)?;
    if !outputs.solves.is_empty() {
        let rows: Vec<Vec<String>> = outputs
            .solves
            .iter()
            .map(|p| {
                vec![
                    float(p.omega),
                    status_name(p.status).into(),
                    p.iterations.to_string(),
                    opt_float(p.final_increment),
                    float(p.contraction_estimate),
                    float(p.solution_norm),
                ]
            })
            .collect();
        out.csv(
            "solves.csv",
            &["omega", "status", "iterations", "final_increment", "contraction_estimate", "solution_norm"],
            &rows,
        )?;
    }
    out.json("report.json", &ctx.record("sweep-omega", &outputs))?;
    Ok(format!(
        "slopes xc {:.4}, w1 {:.4}, w2 {:.4}; first converged Omega {}",
        s.slope_xc,
        s.slope_w1,
        s.slope_w2,
        outputs
            .first_converged_omega
            .map_or_else(|| "-".to_string(), |o| format!("{o}"))
    ))
}

pub fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged => "converged",
        SolveStatus::NonConvergence => "non_convergence",
        SolveStatus::Blowup => "blowup",
    }
}

// ---------------------------------------------------------------- verify

fn verify(ctx: &Prepared, out: &Output) -> Result<String, CliError> {
    let vcfg = ctx.raw().verify_config(ctx.grid(), ctx.seed)?;
    let report = verification::run_verification(&ctx.fft, &vcfg)?;
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                c.passed.to_string(),
                c.hard.to_string(),
                float(c.measured),
                float(c.threshold),
                c.detail.clone(),
            ]
        })
        .collect();
    out.csv("verify.csv", &["check", "passed", "hard", "measured", "threshold", "detail"], &rows)?;
    out.json("report.json", &ctx.record("verify", &report))?;
    let failed: Vec<String> = report.failed_checks().map(|c| c.name.clone()).collect();
    if failed.is_empty() {
        Ok(format!("{} checks passed", report.checks.len()))
    } else {
        Err(CliError::VerifyFailed(failed))
    }
}

// ---------------------------------------------------------------- norms

#[derive(Debug, Clone, Serialize)]
pub struct NormsOutputs {
    pub input_components: usize,
    pub n: usize,
    pub scale: f64,
    pub values: Vec<NamedValue>,
}

#[derive(Debug, Serialize)]
struct NormsRecord<'a> {
    schema: &'static str,
    command: &'static str,
    seed: u64,
    inputs: Option<&'a RunConfig>,
    outputs: NormsOutputs,
}

fn norms(ctx: Option<&Prepared>, input: Spectrum, seed: u64, out: &Output) -> Result<String, CliError> {
    let (field, components) = match input {
        Spectrum::Vector(v) => (v, 3),
        Spectrum::Scalar(s) => {
            let grid = *s.grid();
            let zeros = vec![num_complex::Complex64::new(0.0, 0.0); grid.len()];
            (
                SpectralVectorField::from_components(grid, [s.into_vec(), zeros.clone(), zeros])?,
                1,
            )
        }
    };
    let defaults = config::NormsSection::default();
    let (list, p, params) = match ctx {
        Some(c) => (c.raw().report_norms()?, c.raw().solver.p, c.cfg.params),
        None => (
            defaults
                .list
                .iter()
                .map(|s| FourierBesovParams::new(s.s, s.p, s.q))
                .collect::<Result<Vec<_>, _>>()?,
            4.0,
            CoriolisParams::with_omega(0.0),
        ),
    };
    let mut values = named_norms(&field, &list)?;
    let fb = FourierBesovParams::force_space(p)?;
    values.push(NamedValue {
        name: norm_name(&fb),
        value: DyadicPartition::build(field.grid()).fb_norm(&field, &fb)?,
    });
    let (a, b) = coriolis_kernel::xc_norm_parts(&field, Exponent::new(p)?, &params)?;
    let tag = format!("X(p={p},Omega={},nu={})", params.omega, params.nu);
    values.push(NamedValue {
        name: format!("{tag}.w1"),
        value: a,
    });
    values.push(NamedValue {
        name: format!("{tag}.w2"),
        value: b,
    });
    values.push(NamedValue { name: tag, value: a + b });
    let rows: Vec<Vec<String>> = values.iter().map(|v| vec![v.name.clone(), float(v.value)]).collect();
    out.csv("norms.csv", &["quantity", "value"], &rows)?;
    let grid = *field.grid();
    let record = NormsRecord {
        schema: SCHEMA,
        command: "norms",
        seed,
        inputs: ctx.map(|c| c.raw()),
        outputs: NormsOutputs {
            input_components: components,
            n: grid.n(),
            scale: grid.scale(),
            values,
        },
    };
    out.json("report.json", &record)?;
    Ok(record
        .outputs
        .values
        .iter()
        .map(|v| format!("{} = {:.10e}", v.name, v.value))
        .collect::<Vec<_>>()
        .join("\n"))
}

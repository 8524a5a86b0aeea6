//! Fixed-point and time-stepping solvers for the rotating Navier-Stokes system
//!
//! ```text
//! (u . grad) u + Omega e3 x u - nu Lap u + grad p = F,   div u = 0.
//! ```
//!
//! The stationary problem is solved as `u = K P F + B(u, u)` with
//! `K = int_0^infinity G(t) dt` and `B(u, v) = -K P div(u (x) v)`, by Picard
//! iteration from `u^0 = K P F`. The transient problem is advanced with a
//! first-order exponential integrator: the linear flow is exact per mode and
//! the nonlinearity is frozen over each step.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

use crate::coriolis_kernel::{self, CoriolisParams};
use crate::error::{self, Error};
use crate::field::{SpectralScalarField, SpectralVectorField};
use crate::linalg::{self, CZERO};
use crate::littlewood_paley::{DyadicPartition, Exponent, FourierBesovParams};
use crate::spectral::{self, coriolis_mode, leray_project};
use crate::transform::SpectralTransform;

/// Default Lebesgue exponent for convergence and residual norms.
pub const DEFAULT_P: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum InitialIterate {
    /// `u^0 = K P F`.
    Forcing,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StationarySolveConfig {
    /// Relative increment `||u^{n+1} - u^n|| / ||u^n||` that stops the iteration.
    pub tol: f64,
    pub max_iter: usize,
    /// Norm used for increments and the reported iterate norms.
    pub norm: FourierBesovParams,
    /// Iterate norm above which the run is declared a blowup.
    pub divergence_guard: f64,
    /// Under-relaxation factor in `(0, 1]`; `1` is plain Picard iteration.
    pub relaxation: f64,
    pub initial: InitialIterate,
    /// Drop the quadratic term (linear Stokes-Coriolis solve).
    pub nonlinear: bool,
}

impl Default for StationarySolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            norm: FourierBesovParams::solution_space(DEFAULT_P).expect("p = 4 is admissible"),
            divergence_guard: 1e8,
            relaxation: 1.0,
            initial: InitialIterate::Forcing,
            nonlinear: true,
        }
    }
}

impl StationarySolveConfig {
    pub fn validate(&self) -> error::Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1"));
        }
        if !(self.divergence_guard > 0.0) {
            return Err(Error::InvalidConfig("divergence_guard must be positive"));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::InvalidConfig("relaxation must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransientSolveConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Record a trajectory sample every this many steps (the last step is always recorded).
    pub record_stride: usize,
    pub nonlinear: bool,
    /// Norms tabulated along the trajectory; the first one drives the blowup guard.
    pub norms: Vec<FourierBesovParams>,
    pub divergence_guard: f64,
}

impl Default for TransientSolveConfig {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            t_end: 1.0,
            record_stride: 1,
            nonlinear: true,
            norms: alloc::vec![FourierBesovParams {
                s: 2.0 - 3.0 / DEFAULT_P,
                p: Exponent::Finite(DEFAULT_P),
                q: Exponent::Infinity,
            }],
            divergence_guard: 1e8,
        }
    }
}

impl TransientSolveConfig {
    pub fn validate(&self) -> error::Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig("dt must be positive"));
        }
        if !(self.t_end >= self.dt) {
            return Err(Error::InvalidConfig("t_end must be at least dt"));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig("record_stride must be at least 1"));
        }
        if self.norms.is_empty() {
            return Err(Error::InvalidConfig("at least one trajectory norm is required"));
        }
        if !(self.divergence_guard > 0.0) {
            return Err(Error::InvalidConfig("divergence_guard must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SolveStatus {
    Converged,
    NonConvergence,
    Blowup,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormSample {
    pub iteration: usize,
    pub name: String,
    pub value: f64,
}

/// History of a stationary or transient solve.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveReport {
    pub status: SolveStatus,
    pub converged: bool,
    /// Picard iterations or time steps taken.
    pub iterations: usize,
    /// Relative increments per iteration (stationary) or steady residuals per record (transient).
    pub residual_history: Vec<f64>,
    pub norm_history: Vec<NormSample>,
    /// Measured `||B(u, u)|| / ||u||^2` at the final iterate.
    pub contraction_estimate: f64,
    /// `||K P F||` in the solve norm.
    pub forcing_norm: f64,
    pub solution_norm: f64,
    /// Largest `|xi . u|` seen over all iterates.
    pub max_divergence: f64,
    /// Largest Hermitian-symmetry defect seen over all iterates.
    pub hermitian_defect: f64,
    pub blowup_iteration: Option<usize>,
    /// Number of nonlinear evaluations whose input was flagged as compressible.
    pub divergence_warnings: usize,
}

impl SolveReport {
    fn new() -> Self {
        Self {
            status: SolveStatus::NonConvergence,
            converged: false,
            iterations: 0,
            residual_history: Vec::new(),
            norm_history: Vec::new(),
            contraction_estimate: 0.0,
            forcing_norm: 0.0,
            solution_norm: 0.0,
            max_divergence: 0.0,
            hermitian_defect: 0.0,
            blowup_iteration: None,
            divergence_warnings: 0,
        }
    }

    fn observe(&mut self, u: &SpectralVectorField) {
        self.max_divergence = self.max_divergence.max(u.max_divergence());
        self.hermitian_defect = self.hermitian_defect.max(u.hermitian_defect());
    }
}

#[derive(Debug, Clone)]
pub struct StationarySolution {
    pub u: SpectralVectorField,
    pub report: SolveReport,
}

#[derive(Debug, Clone, Error)]
pub enum SolveFailure {
    #[error("no convergence after {} iterations", report.iterations)]
    NonConvergence {
        u: SpectralVectorField,
        report: SolveReport,
    },
    #[error("iterate norm exceeded the divergence guard at iteration {:?}", report.blowup_iteration)]
    Blowup { report: SolveReport },
    #[error(transparent)]
    Numerical(#[from] Error),
}

impl SolveFailure {
    pub fn report(&self) -> Option<&SolveReport> {
        match self {
            SolveFailure::NonConvergence { report, .. } | SolveFailure::Blowup { report } => {
                Some(report)
            }
            SolveFailure::Numerical(_) => None,
        }
    }
}

/// Name used for a norm in reports and tables.
pub fn norm_name(params: &FourierBesovParams) -> String {
    let fmt = |e: Exponent| match e {
        Exponent::Finite(v) => format!("{v}"),
        Exponent::Infinity => String::from("inf"),
    };
    format!("FB(s={},p={},q={})", params.s, fmt(params.p), fmt(params.q))
}

/// `B(u, u) = -K P div(u (x) u)`; also returns whether the input was flagged compressible.
pub fn bilinear<T: SpectralTransform + ?Sized>(
    transform: &T,
    u: &SpectralVectorField,
    params: &CoriolisParams,
) -> error::Result<(SpectralVectorField, bool)> {
    let (n, warn) = spectral::nonlinear_term(transform, u)?;
    let k = coriolis_kernel::apply_stationary_kernel(&leray_project(&n), params);
    Ok((k.scale(-1.0), warn))
}

/// Measured `||B(u, u)|| / ||u||^2`; zero for `u = 0`.
pub fn contraction_estimate<T: SpectralTransform + ?Sized>(
    transform: &T,
    u: &SpectralVectorField,
    params: &CoriolisParams,
    norm: &FourierBesovParams,
) -> error::Result<f64> {
    let part = DyadicPartition::build(u.grid());
    let un = part.fb_norm(u, norm)?;
    if un == 0.0 {
        return Ok(0.0);
    }
    let (b, _) = bilinear(transform, u, params)?;
    Ok(part.fb_norm(&b, norm)? / (un * un))
}

/// Picard iteration for the stationary problem.
pub fn solve_stationary<T: SpectralTransform + ?Sized>(
    transform: &T,
    force: &SpectralVectorField,
    params: &CoriolisParams,
    cfg: &StationarySolveConfig,
) -> Result<StationarySolution, SolveFailure> {
    cfg.validate()?;
    if !force.is_finite() {
        return Err(Error::NonFinite.into());
    }
    let part = DyadicPartition::build(force.grid());
    let name = norm_name(&cfg.norm);
    let y = coriolis_kernel::apply_stationary_kernel(&leray_project(force), params);
    let mut report = SolveReport::new();
    report.forcing_norm = part.fb_norm(&y, &cfg.norm)?;

    let mut u = match cfg.initial {
        InitialIterate::Forcing => y.clone(),
        InitialIterate::Zero => SpectralVectorField::zeros(*force.grid()),
    };
    report.observe(&u);
    let mut u_norm = part.fb_norm(&u, &cfg.norm)?;

    for it in 1..=cfg.max_iter {
        let mut next = if cfg.nonlinear {
            let (b, warn) = bilinear(transform, &u, params)?;
            report.divergence_warnings += warn as usize;
            y.add(&b)
        } else {
            y.clone()
        };
        if cfg.relaxation < 1.0 {
            next = u.scale(1.0 - cfg.relaxation).add(&next.scale(cfg.relaxation));
        }
        report.iterations = it;
        let next_norm = if next.is_finite() {
            part.fb_norm(&next, &cfg.norm)?
        } else {
            f64::INFINITY
        };
        report.norm_history.push(NormSample {
            iteration: it,
            name: name.clone(),
            value: next_norm,
        });
        if !(next_norm <= cfg.divergence_guard) {
            report.status = SolveStatus::Blowup;
            report.blowup_iteration = Some(it);
            report.solution_norm = next_norm;
            return Err(SolveFailure::Blowup { report });
        }
        report.observe(&next);
        let diff = part.fb_norm(&next.sub(&u), &cfg.norm)?;
        let rel = if u_norm > 0.0 {
            diff / u_norm
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        report.residual_history.push(rel);
        u = next;
        u_norm = next_norm;
        if rel < cfg.tol {
            report.status = SolveStatus::Converged;
            report.converged = true;
            break;
        }
    }
    report.solution_norm = u_norm;
    report.contraction_estimate = if cfg.nonlinear {
        contraction_estimate(transform, &u, params, &cfg.norm)?
    } else {
        0.0
    };
    if report.converged {
        Ok(StationarySolution { u, report })
    } else {
        Err(SolveFailure::NonConvergence { u, report })
    }
}

/// One recorded point of a transient run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectorySample {
    pub step: usize,
    pub time: f64,
    /// Values of the configured norms, in configuration order.
    pub norms: Vec<f64>,
    /// Stationary residual of the current state (distance from a steady state).
    pub steady_residual: f64,
}

#[derive(Debug, Clone)]
pub struct TransientSolution {
    pub samples: Vec<TrajectorySample>,
    pub u: SpectralVectorField,
    pub report: SolveReport,
}

/// Exponential-integrator time stepping of the mild formulation
///
/// ```text
/// u(t + h) = G(h) u(t) + int_0^h G(s) ds (P F - P div(u (x) u))(t).
/// ```
///
/// The step count is `ceil(t_end / dt)`; the last step is shortened to land on `t_end`.
pub fn solve_transient<T: SpectralTransform + ?Sized>(
    transform: &T,
    u0: &SpectralVectorField,
    force: Option<&SpectralVectorField>,
    params: &CoriolisParams,
    cfg: &TransientSolveConfig,
) -> Result<TransientSolution, SolveFailure> {
    cfg.validate()?;
    if !u0.is_finite() {
        return Err(Error::NonFinite.into());
    }
    let grid = *u0.grid();
    let part = DyadicPartition::build(&grid);
    let names: Vec<String> = cfg.norms.iter().map(norm_name).collect();
    let pf = force.map(leray_project);
    let zero = SpectralVectorField::zeros(grid);
    let residual_norm = FourierBesovParams::force_space(DEFAULT_P)?;

    let mut report = SolveReport::new();
    report.forcing_norm = match &pf {
        Some(f) => part.fb_norm(&coriolis_kernel::apply_stationary_kernel(f, params), &cfg.norms[0])?,
        None => 0.0,
    };
    let mut samples = Vec::new();
    let mut u = u0.clone();
    report.observe(&u);

    let steps = {
        let ratio = cfg.t_end / cfg.dt;
        let c = libm::ceil(ratio - 1e-9);
        (c as usize).max(1)
    };
    let mut record = |step: usize,
                      time: f64,
                      u: &SpectralVectorField,
                      report: &mut SolveReport|
     -> error::Result<f64> {
        let norms = cfg
            .norms
            .iter()
            .map(|p| part.fb_norm(u, p))
            .collect::<error::Result<Vec<f64>>>()?;
        for (name, value) in names.iter().zip(norms.iter()) {
            report.norm_history.push(NormSample {
                iteration: step,
                name: name.clone(),
                value: *value,
            });
        }
        let steady = pde_residual(
            transform,
            u,
            force.unwrap_or(&zero),
            params,
            &residual_norm,
            cfg.nonlinear,
        )?;
        report.residual_history.push(steady);
        let lead = norms[0];
        samples.push(TrajectorySample {
            step,
            time,
            norms,
            steady_residual: steady,
        });
        Ok(lead)
    };
    record(0, 0.0, &u, &mut report)?;

    for step in 1..=steps {
        let h = if step == steps {
            cfg.t_end - cfg.dt * (steps - 1) as f64
        } else {
            cfg.dt
        };
        let mut rhs = pf.clone().unwrap_or_else(|| zero.clone());
        if cfg.nonlinear {
            let (n, warn) = spectral::nonlinear_term(transform, &u)?;
            report.divergence_warnings += warn as usize;
            rhs = rhs.sub(&leray_project(&n));
        }
        let advanced = coriolis_kernel::apply_semigroup(h, &u, params)?;
        u = coriolis_kernel::duhamel_step(&advanced, h, &rhs, params)?;
        let time = if step == steps { cfg.t_end } else { cfg.dt * step as f64 };
        report.iterations = step;
        let finite = u.is_finite();
        if finite {
            report.observe(&u);
        }
        let guard_norm = if finite {
            part.fb_norm(&u, &cfg.norms[0])?
        } else {
            f64::INFINITY
        };
        if !(guard_norm <= cfg.divergence_guard) {
            report.status = SolveStatus::Blowup;
            report.blowup_iteration = Some(step);
            report.solution_norm = guard_norm;
            return Err(SolveFailure::Blowup { report });
        }
        if step % cfg.record_stride == 0 || step == steps {
            report.solution_norm = record(step, time, &u, &mut report)?;
        }
    }
    report.status = SolveStatus::Converged;
    report.converged = true;
    Ok(TransientSolution { samples, u, report })
}

/// Projected residual field `P[(u . grad) u] + Omega P[e3 x u] + nu |xi|^2 u - P F`.
pub fn residual_field<T: SpectralTransform + ?Sized>(
    transform: &T,
    u: &SpectralVectorField,
    force: &SpectralVectorField,
    params: &CoriolisParams,
    nonlinear: bool,
) -> error::Result<SpectralVectorField> {
    let grid = *u.grid();
    let n = if nonlinear {
        spectral::nonlinear_term(transform, u)?.0
    } else {
        SpectralVectorField::zeros(grid)
    };
    let raw = u.map_modes(|i, v| {
        let xi = grid.xi(i);
        let r2 = linalg::dot(&xi, &xi);
        let c = coriolis_mode(&v);
        let nv = n.get(i);
        let f = force.get(i);
        let mut out = [CZERO; 3];
        for k in 0..3 {
            out[k] = nv[k] + c[k] * params.omega + v[k] * (params.nu * r2) - f[k];
        }
        out
    });
    Ok(leray_project(&raw))
}

/// Norm of the projected residual (pressure eliminated).
pub fn pde_residual<T: SpectralTransform + ?Sized>(
    transform: &T,
    u: &SpectralVectorField,
    force: &SpectralVectorField,
    params: &CoriolisParams,
    norm: &FourierBesovParams,
    nonlinear: bool,
) -> error::Result<f64> {
    let r = residual_field(transform, u, force, params, nonlinear)?;
    DyadicPartition::build(u.grid()).fb_norm(&r, norm)
}

/// Pressure closing the momentum balance: `grad p = (I - P)(F - (u . grad) u - Omega e3 x u)`,
/// i.e. `p = -i xi . G / |xi|^2` with `G` the bracket; zero mode pinned.
pub fn recover_pressure<T: SpectralTransform + ?Sized>(
    transform: &T,
    u: &SpectralVectorField,
    force: &SpectralVectorField,
    params: &CoriolisParams,
) -> error::Result<SpectralScalarField> {
    let grid = *u.grid();
    let (n, _) = spectral::nonlinear_term(transform, u)?;
    let minus_i = Complex64::new(0.0, -1.0);
    Ok(SpectralScalarField::from_fn(grid, |i| {
        if i == 0 {
            return CZERO;
        }
        let xi = grid.xi(i);
        let r2 = linalg::dot(&xi, &xi);
        let c = coriolis_mode(&u.get(i));
        let nv = n.get(i);
        let f = force.get(i);
        let g = [
            f[0] - nv[0] - c[0] * params.omega,
            f[1] - nv[1] - c[1] * params.omega,
            f[2] - nv[2] - c[2] * params.omega,
        ];
        minus_i * linalg::cdot(&xi, &g) / r2
    }))
}

/// Unprojected momentum residual `(u . grad) u + Omega e3 x u + nu |xi|^2 u + i xi p - F`.
pub fn momentum_residual_field<T: SpectralTransform + ?Sized>(
    transform: &T,
    u: &SpectralVectorField,
    pressure: &SpectralScalarField,
    force: &SpectralVectorField,
    params: &CoriolisParams,
) -> error::Result<SpectralVectorField> {
    let grid = *u.grid();
    let (n, _) = spectral::nonlinear_term(transform, u)?;
    let i_unit = Complex64::new(0.0, 1.0);
    Ok(u.map_modes(|i, v| {
        let xi = grid.xi(i);
        let r2 = linalg::dot(&xi, &xi);
        let c = coriolis_mode(&v);
        let nv = n.get(i);
        let f = force.get(i);
        let p = pressure.data()[i];
        let mut out = [CZERO; 3];
        for k in 0..3 {
            out[k] = nv[k] + c[k] * params.omega + v[k] * (params.nu * r2) + i_unit * p * xi[k]
                - f[k];
        }
        out
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FrequencyGrid;
    use crate::transform::NaiveDft;

    #[test]
    fn zero_force_converges_in_one_iteration() {
        let g = FrequencyGrid::new(8, 1.0).unwrap();
        let f = SpectralVectorField::zeros(g);
        let sol = solve_stationary(
            &NaiveDft,
            &f,
            &CoriolisParams::with_omega(3.0),
            &StationarySolveConfig::default(),
        )
        .unwrap();
        assert_eq!(sol.report.iterations, 1);
        assert_eq!(sol.u.max_abs(), 0.0);
        assert_eq!(sol.report.status, SolveStatus::Converged);
    }

    #[test]
    fn config_validation() {
        let cfg = StationarySolveConfig {
            tol: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = StationarySolveConfig {
            relaxation: 1.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = TransientSolveConfig {
            t_end: 0.001,
            dt: 0.01,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_state_has_zero_residual_and_pressure() {
        let g = FrequencyGrid::new(8, 1.0).unwrap();
        let z = SpectralVectorField::zeros(g);
        let params = CoriolisParams::with_omega(1.0);
        let norm = FourierBesovParams::force_space(4.0).unwrap();
        assert_eq!(pde_residual(&NaiveDft, &z, &z, &params, &norm, true).unwrap(), 0.0);
        assert_eq!(recover_pressure(&NaiveDft, &z, &z, &params).unwrap().max_abs(), 0.0);
    }
}

//! Run configuration, read from TOML.
//!
//! See `docs/config.md` for the full grammar. Every section except `[grid]`
//! is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use rotns_core::littlewood_paley::{DyadicProfile, Exponent, FourierBesovParams};
use rotns_core::solvers::{InitialIterate, StationarySolveConfig, TransientSolveConfig};
use rotns_core::verification::{default_omega_values, ExampleForceVariant, VerifyConfig};
use rotns_core::{CoriolisParams, FrequencyGrid};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub experiment: ExperimentSection,
    pub grid: GridSection,
    #[serde(default)]
    pub coriolis: CoriolisSection,
    #[serde(default)]
    pub force: ForceSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub norms: NormsSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub id: String,
    pub seed: u64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            id: "run".into(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoriolisSection {
    pub omega: f64,
    pub nu: f64,
    pub sweep: Option<SweepSpec>,
    pub epsilons: Vec<f64>,
    pub fit_window: Option<[f64; 2]>,
}

impl Default for CoriolisSection {
    fn default() -> Self {
        Self {
            omega: 0.0,
            nu: 1.0,
            sweep: None,
            epsilons: vec![0.5, 0.2, 0.1, 0.05, 0.02, 0.01],
            fit_window: None,
        }
    }
}

/// Either explicit `values` or a log-spaced `min..max` range with `points` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub values: Option<Vec<f64>>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceSpec {
    #[default]
    Zero,
    /// Force generated from a random divergence-free `u*`.
    Manufactured {
        /// Fixed `||u*||` in the solution norm.
        amplitude: Option<f64>,
        /// `||u*||` as a fraction of the measured contraction threshold `1 / (4 eta)`.
        threshold_fraction: Option<f64>,
        /// Largest `|k_i|` of `u*`; defaults to the largest alias-free band.
        band: Option<i64>,
    },
    Example {
        #[serde(default)]
        variant: ExampleForceVariant,
        #[serde(default = "one")]
        scale: f64,
    },
    File {
        path: PathBuf,
    },
    /// Random real field on integer frequencies with `|k_i| <= band` and
    /// `min_abs_k3 <= |k_3| <= max_abs_k3`, scaled to `amplitude` in `FB^{-3/p}_{p,p}`.
    Random {
        amplitude: f64,
        band: i64,
        #[serde(default)]
        min_abs_k3: i64,
        max_abs_k3: Option<i64>,
        #[serde(default = "yes")]
        divergence_free: bool,
    },
    /// Random field on the modes with `radius_min <= |xi| <= radius_max` and `|xi_3| >= delta`.
    Annulus {
        amplitude: f64,
        radius_min: f64,
        radius_max: f64,
        delta: f64,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    #[default]
    Zero,
    /// Random divergence-free field scaled to `amplitude` in the first trajectory norm.
    Random {
        amplitude: f64,
        band: Option<i64>,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub divergence_guard: f64,
    pub relaxation: f64,
    pub initial_iterate: InitialIterate,
    pub nonlinear: bool,
    /// Lebesgue exponent of the convergence norm `FB^{2-3/p}_{p,p}`.
    pub p: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
    /// `sweep-omega` only: also run the stationary solver at every swept `Omega` and at `Omega = 0`.
    pub solve_sweep: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = StationarySolveConfig::default();
        let t = TransientSolveConfig::default();
        Self {
            tol: s.tol,
            max_iter: s.max_iter,
            divergence_guard: s.divergence_guard,
            relaxation: s.relaxation,
            initial_iterate: s.initial,
            nonlinear: true,
            p: 4.0,
            dt: t.dt,
            t_end: t.t_end,
            record_stride: t.record_stride,
            solve_sweep: false,
        }
    }
}

/// `q` accepts `inf` (TOML float infinity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsSection {
    pub list: Vec<NormSpec>,
}

impl Default for NormsSection {
    fn default() -> Self {
        Self {
            list: vec![
                NormSpec {
                    s: 1.25,
                    p: 4.0,
                    q: f64::INFINITY,
                },
                NormSpec {
                    s: 1.25,
                    p: 4.0,
                    q: 4.0,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub omegas: Vec<f64>,
    pub bony_pairs: usize,
    pub bilinear_trials: usize,
    pub embedding_trials: usize,
    pub p: f64,
    /// Override of the dyadic profile support `[lo, hi]`; anything but the canonical annulus fails the suite.
    pub profile_support: Option<[f64; 2]>,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            omegas: vec![0.0, 1.0, 10.0, 100.0, 1e4],
            bony_pairs: 10,
            bilinear_trials: 20,
            embedding_trials: 5,
            p: 4.0,
            profile_support: None,
        }
    }
}

/// A parsed and validated configuration plus the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub raw: RunConfig,
    pub base_dir: PathBuf,
    pub grid: FrequencyGrid,
    pub params: CoriolisParams,
}

pub fn parse(text: &str, base_dir: &Path) -> Result<LoadedConfig, ConfigError> {
    let raw: RunConfig = toml::from_str(text)?;
    raw.validate(base_dir)?;
    let grid = FrequencyGrid::new(raw.grid.n, raw.grid.scale)
        .map_err(|e| invalid("grid", e.to_string()))?;
    let params = CoriolisParams::new(raw.coriolis.omega, raw.coriolis.nu)
        .map_err(|e| invalid("coriolis", e.to_string()))?;
    Ok(LoadedConfig {
        raw,
        base_dir: base_dir.to_path_buf(),
        grid,
        params,
    })
}

pub fn load(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&text, &base)
}

fn norm_params(spec: &NormSpec, field: &'static str) -> Result<FourierBesovParams, ConfigError> {
    FourierBesovParams::new(spec.s, spec.p, spec.q).map_err(|e| invalid(field, e.to_string()))
}

impl RunConfig {
    fn validate(&self, base_dir: &Path) -> Result<(), ConfigError> {
        let g = &self.grid;
        if g.n < 4 || g.n % 2 != 0 {
            return Err(invalid("grid.n", format!("must be even and at least 4, got {}", g.n)));
        }
        if !(g.scale > 0.0 && g.scale.is_finite()) {
            return Err(invalid("grid.scale", "must be positive and finite"));
        }
        let c = &self.coriolis;
        if !c.omega.is_finite() {
            return Err(invalid("coriolis.omega", "must be finite"));
        }
        if !(c.nu > 0.0 && c.nu.is_finite()) {
            return Err(invalid("coriolis.nu", "must be positive"));
        }
        if c.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(invalid("coriolis.epsilons", "entries must be positive"));
        }
        if let Some(w) = c.fit_window {
            if !(w[0] > 0.0 && w[1] > w[0]) {
                return Err(invalid("coriolis.fit_window", "must be [lo, hi] with 0 < lo < hi"));
            }
        }
        if c.sweep.is_some() {
            self.sweep_values()?;
        }
        match &self.force {
            ForceSpec::Manufactured {
                amplitude,
                threshold_fraction,
                band,
            } => {
                match (amplitude, threshold_fraction) {
                    (Some(a), None) if *a >= 0.0 && a.is_finite() => {}
                    (None, Some(f)) if *f > 0.0 && f.is_finite() => {}
                    _ => {
                        return Err(invalid(
                            "force",
                            "manufactured force needs exactly one of `amplitude` (>= 0) or `threshold_fraction` (> 0)",
                        ))
                    }
                }
                if let Some(b) = band {
                    let max = g.n as i64 / 2;
                    if *b < 1 || *b > max {
                        return Err(invalid("force.band", format!("must lie in 1..={max}")));
                    }
                }
            }
            ForceSpec::Example { scale, .. } => {
                if !scale.is_finite() {
                    return Err(invalid("force.scale", "must be finite"));
                }
            }
            ForceSpec::File { path } => {
                if !base_dir.join(path).is_file() {
                    return Err(invalid("force.path", format!("file {} does not exist", path.display())));
                }
            }
            ForceSpec::Random {
                amplitude,
                band,
                min_abs_k3,
                max_abs_k3,
                ..
            } => {
                if !(*amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(invalid("force.amplitude", "must be non-negative"));
                }
                if *band < 1 || *band > g.n as i64 / 2 - 1 {
                    return Err(invalid("force.band", "must lie in 1..n/2-1"));
                }
                if *min_abs_k3 < 0 || max_abs_k3.is_some_and(|m| m < *min_abs_k3) {
                    return Err(invalid("force.min_abs_k3", "need 0 <= min_abs_k3 <= max_abs_k3"));
                }
            }
            ForceSpec::Annulus {
                amplitude,
                radius_min,
                radius_max,
                delta,
            } => {
                if !(*amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(invalid("force.amplitude", "must be non-negative"));
                }
                if !(*radius_min > 0.0 && radius_max > radius_min) {
                    return Err(invalid("force.radius_min", "need 0 < radius_min < radius_max"));
                }
                if !(*delta > 0.0) {
                    return Err(invalid("force.delta", "must be positive"));
                }
            }
            ForceSpec::Zero => {}
        }
        match &self.initial {
            InitialSpec::Random { amplitude, band } => {
                if !(*amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(invalid("initial.amplitude", "must be non-negative"));
                }
                if let Some(b) = band {
                    if *b < 1 || *b > g.n as i64 / 2 - 1 {
                        return Err(invalid("initial.band", "must lie in 1..n/2-1"));
                    }
                }
            }
            InitialSpec::File { path } => {
                if !base_dir.join(path).is_file() {
                    return Err(invalid("initial.path", format!("file {} does not exist", path.display())));
                }
            }
            InitialSpec::Zero => {}
        }
        self.stationary_config()?;
        self.transient_config()?;
        for spec in &self.norms.list {
            norm_params(spec, "norms.list")?;
        }
        if self.output.formats.is_empty() {
            return Err(invalid("output.formats", "at least one format is required"));
        }
        let v = &self.verify;
        if v.omegas.is_empty() || v.omegas.iter().any(|o| !o.is_finite()) {
            return Err(invalid("verify.omegas", "need at least one finite value"));
        }
        if !(v.p > 3.0 && v.p.is_finite()) {
            return Err(invalid("verify.p", "must lie in (3, infinity)"));
        }
        if let Some([lo, hi]) = v.profile_support {
            DyadicProfile::with_support(lo, hi).map_err(|e| invalid("verify.profile_support", e.to_string()))?;
        }
        Ok(())
    }

    pub fn convergence_norm(&self) -> Result<FourierBesovParams, ConfigError> {
        let p = self.solver.p;
        if !(p > 1.0 && p.is_finite()) {
            return Err(invalid("solver.p", "must be finite and greater than 1"));
        }
        FourierBesovParams::solution_space(p).map_err(|e| invalid("solver.p", e.to_string()))
    }

    pub fn stationary_config(&self) -> Result<StationarySolveConfig, ConfigError> {
        let s = &self.solver;
        let cfg = StationarySolveConfig {
            tol: s.tol,
            max_iter: s.max_iter,
            norm: self.convergence_norm()?,
            divergence_guard: s.divergence_guard,
            relaxation: s.relaxation,
            initial: s.initial_iterate,
            nonlinear: s.nonlinear,
        };
        cfg.validate().map_err(|e| invalid("solver", e.to_string()))?;
        Ok(cfg)
    }

    pub fn transient_config(&self) -> Result<TransientSolveConfig, ConfigError> {
        let s = &self.solver;
        let mut norms = vec![FourierBesovParams {
            s: 2.0 - 3.0 / s.p,
            p: Exponent::new(s.p).map_err(|e| invalid("solver.p", e.to_string()))?,
            q: Exponent::Infinity,
        }];
        for spec in &self.norms.list {
            let n = norm_params(spec, "norms.list")?;
            if !norms.contains(&n) {
                norms.push(n);
            }
        }
        let cfg = TransientSolveConfig {
            dt: s.dt,
            t_end: s.t_end,
            record_stride: s.record_stride,
            nonlinear: s.nonlinear,
            norms,
            divergence_guard: s.divergence_guard,
        };
        cfg.validate().map_err(|e| invalid("solver", e.to_string()))?;
        Ok(cfg)
    }

    pub fn report_norms(&self) -> Result<Vec<FourierBesovParams>, ConfigError> {
        self.norms
            .list
            .iter()
            .map(|s| norm_params(s, "norms.list"))
            .collect()
    }

    pub fn sweep_values(&self) -> Result<Vec<f64>, ConfigError> {
        let Some(spec) = &self.coriolis.sweep else {
            return Ok(default_omega_values());
        };
        let values = match (&spec.values, spec.min, spec.max, spec.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(lo), Some(hi), Some(k)) => {
                if !(lo > 0.0 && hi > lo && k >= 2) {
                    return Err(invalid("coriolis.sweep", "need 0 < min < max and points >= 2"));
                }
                let (a, b) = (lo.log10(), hi.log10());
                (0..k)
                    .map(|i| 10f64.powf(a + (b - a) * i as f64 / (k - 1) as f64))
                    .collect()
            }
            _ => {
                return Err(invalid(
                    "coriolis.sweep",
                    "give either `values` or all of `min`, `max`, `points`",
                ))
            }
        };
        if values.is_empty() {
            return Err(invalid("coriolis.sweep", "no sweep values"));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(invalid("coriolis.sweep", "values must be positive and finite"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("coriolis.sweep", "values must be strictly increasing"));
        }
        Ok(values)
    }

    pub fn verify_config(&self, grid: FrequencyGrid, seed: u64) -> Result<VerifyConfig, ConfigError> {
        let v = &self.verify;
        let profile = match v.profile_support {
            Some([lo, hi]) => DyadicProfile::with_support(lo, hi)
                .map_err(|e| invalid("verify.profile_support", e.to_string()))?,
            None => DyadicProfile::default(),
        };
        Ok(VerifyConfig {
            grid,
            omegas: v.omegas.clone(),
            seed,
            profile,
            bony_pairs: v.bony_pairs,
            bilinear_trials: v.bilinear_trials,
            embedding_trials: v.embedding_trials,
            p: v.p,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = parse("[grid]\nn = 8\n", Path::new(".")).unwrap();
        assert_eq!(c.grid.n(), 8);
        assert_eq!(c.params.omega, 0.0);
        assert_eq!(c.raw.force, ForceSpec::Zero);
        assert_eq!(c.raw.sweep_values().unwrap().len(), 17);
    }

    #[test]
    fn rejects_bad_grid_and_unknown_keys() {
        assert!(matches!(
            parse("[grid]\nn = 0\n", Path::new(".")),
            Err(ConfigError::Invalid { field: "grid.n", .. })
        ));
        assert!(matches!(parse("", Path::new(".")), Err(ConfigError::Parse(_))));
        assert!(matches!(
            parse("[grid]\nn = 8\nbogus = 1\n", Path::new(".")),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn infinite_q_and_forces() {
        let text = r#"
[grid]
n = 8
[norms]
list = [{ s = 1.25, p = 4.0, q = inf }]
[force]
kind = "manufactured"
threshold_fraction = 0.1
[coriolis]
sweep = { min = 1.0, max = 100.0, points = 3 }
"#;
        let c = parse(text, Path::new(".")).unwrap();
        assert_eq!(c.raw.report_norms().unwrap()[0].q, Exponent::Infinity);
        let v = c.raw.sweep_values().unwrap();
        assert!((v[1] - 10.0).abs() < 1e-12);
        let bad = "[grid]\nn = 8\n[force]\nkind = \"manufactured\"\n";
        assert!(parse(bad, Path::new(".")).is_err());
    }
}

//! Experiment spec files: TOML with sections for the market model, noise,
//! jumps, estimator tuning, bias-map calibration and coverage studies.
//! Every key has a benchmark default, so an empty file is a valid spec.

use crate::CliError;
use serde::Deserialize;
use spotmin::sim::{Drift, JumpConfig, JumpSizeLaw, NoiseConfig, SvModelConfig};
use spotmin::csvio::parse_family;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Table1,
    Table2Grid,
    CurveDemo,
    Coverage,
    Custom,
}

impl Scenario {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "table1" => Ok(Self::Table1),
            "table2_grid" | "table2" => Ok(Self::Table2Grid),
            "curve_demo" | "curve" => Ok(Self::CurveDemo),
            "coverage" => Ok(Self::Coverage),
            "custom" => Ok(Self::Custom),
            other => Err(CliError::Validation(format!(
                "unknown scenario '{other}' (expected table1, table2_grid, curve_demo, coverage or custom)"
            ))),
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    scenario: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    noise: RawNoise,
    jumps: Option<RawJumps>,
    #[serde(default)]
    sim: RawSim,
    #[serde(default)]
    estimator: RawEstimator,
    #[serde(default)]
    psi: RawPsi,
    #[serde(default)]
    coverage: RawCoverage,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawModel {
    mean_reversion_speed: Option<f64>,
    mean_level: Option<f64>,
    vol_of_vol: Option<f64>,
    leverage_corr: Option<f64>,
    seasonal_offset: Option<f64>,
    seasonal_freq: Option<f64>,
    seasonal_scale: Option<f64>,
    initial_sq_vol: Option<f64>,
    drift: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    family: Option<String>,
    level_eta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJumps {
    intensity: f64,
    /// Fixed jump magnitude with a random sign.
    size: Option<f64>,
    /// Alternatively, centred Gaussian sizes with this std deviation.
    size_normal_sd: Option<f64>,
    activity_index_r: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSim {
    n: Option<usize>,
    iterations: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawEstimator {
    nh: Option<Vec<usize>>,
    k_n: Option<Vec<usize>>,
    window: Option<String>,
    truncation: Option<bool>,
    kappa: Option<f64>,
    q: Option<f64>,
    correction: Option<String>,
    slope: Option<f64>,
    psi_table: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawPsi {
    nh: Option<Vec<usize>>,
    iterations: Option<usize>,
    grid_points: Option<usize>,
    grid_min: Option<f64>,
    grid_max: Option<f64>,
    grid_kind: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawCoverage {
    q: Option<Vec<f64>>,
    iterations: Option<usize>,
    tau: Option<f64>,
}

/// How estimates (and interval ends) are bias-corrected.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrectionSpec {
    None,
    Slope(f64),
    PsiTable(PathBuf),
}

/// Grid shape for bias-map calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Uniform,
    Geometric,
}

#[derive(Debug, Clone)]
pub struct PsiSettings {
    pub nh_list: Vec<usize>,
    pub iterations: usize,
    pub grid_points: usize,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_kind: GridKind,
}

impl PsiSettings {
    pub fn grid(&self) -> Vec<f64> {
        build_grid(self.grid_min, self.grid_max, self.grid_points, self.grid_kind)
    }
}

pub fn build_grid(min: f64, max: f64, points: usize, kind: GridKind) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            match kind {
                GridKind::Uniform => min + t * (max - min),
                GridKind::Geometric => min * (max / min).powf(t),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct EstimatorSettings {
    pub nh_list: Vec<usize>,
    pub k_list: Vec<usize>,
    pub window: spotmin::WindowMode,
    pub truncation_kappa: Option<f64>,
    pub q: f64,
    pub correction: CorrectionSpec,
}

#[derive(Debug, Clone)]
pub struct CoverageSettings {
    pub q_list: Vec<f64>,
    pub iterations: usize,
    pub tau: f64,
}

/// Fully resolved experiment specification.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub seed: u64,
    pub out: PathBuf,
    pub model: SvModelConfig,
    pub noise: NoiseConfig,
    pub jumps: Option<JumpConfig>,
    pub n: usize,
    pub iterations: usize,
    pub estimator: EstimatorSettings,
    pub psi: PsiSettings,
    pub coverage: CoverageSettings,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            scenario: Scenario::Custom,
            seed: 715_0001,
            out: PathBuf::from("out"),
            model: SvModelConfig::default(),
            noise: NoiseConfig::exponential(10_000.0),
            jumps: None,
            n: 23_400,
            iterations: 1_000,
            estimator: EstimatorSettings {
                nh_list: vec![10, 15, 25, 78],
                k_list: vec![120, 180, 240],
                window: spotmin::WindowMode::Centered,
                truncation_kappa: None,
                q: 0.1,
                correction: CorrectionSpec::Slope(1.046),
            },
            psi: PsiSettings {
                nh_list: vec![10, 15, 25, 39, 78, 234],
                iterations: 20_000,
                grid_points: 64,
                grid_min: 0.75e-4,
                grid_max: 1.25e-4,
                grid_kind: GridKind::Uniform,
            },
            coverage: CoverageSettings {
                q_list: vec![0.1],
                iterations: 2_000,
                tau: 0.5,
            },
        }
    }
}

impl ExperimentSpec {
    /// Parse a spec file; missing keys fall back to the benchmark defaults.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read spec {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let raw: RawSpec = toml::from_str(text)
            .map_err(|e| CliError::Validation(format!("spec parse error: {e}")))?;
        let mut spec = ExperimentSpec::default();

        if let Some(s) = raw.scenario.as_deref() {
            spec.scenario = Scenario::parse(s)?;
        }
        if let Some(seed) = raw.seed {
            spec.seed = seed;
        }
        if let Some(out) = raw.out {
            spec.out = out;
        }

        let m = &raw.model;
        let d = SvModelConfig::default();
        spec.model = SvModelConfig {
            mean_reversion_speed: m.mean_reversion_speed.unwrap_or(d.mean_reversion_speed),
            mean_level: m.mean_level.unwrap_or(d.mean_level),
            vol_of_vol: m.vol_of_vol.unwrap_or(d.vol_of_vol),
            leverage_corr: m.leverage_corr.unwrap_or(d.leverage_corr),
            seasonal_offset: m.seasonal_offset.unwrap_or(d.seasonal_offset),
            seasonal_freq: m.seasonal_freq.unwrap_or(d.seasonal_freq),
            seasonal_scale: m.seasonal_scale.unwrap_or(d.seasonal_scale),
            initial_sq_vol: m.initial_sq_vol,
            drift: match m.drift {
                None | Some(0.0) => Drift::Zero,
                Some(a) => Drift::Constant(a),
            },
        };
        spec.model
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;

        if let Some(f) = raw.noise.family.as_deref() {
            spec.noise.family = parse_family(f).map_err(|e| CliError::Validation(e.to_string()))?;
        }
        if let Some(eta) = raw.noise.level_eta {
            spec.noise.level_eta = eta;
        }
        spec.noise
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;

        if let Some(j) = raw.jumps {
            let size_law = match (j.size, j.size_normal_sd) {
                (Some(s), None) => JumpSizeLaw::SignedFixed(s),
                (None, Some(sd)) => JumpSizeLaw::Gaussian(sd),
                (None, None) => {
                    return Err(CliError::Validation(
                        "[jumps] needs either 'size' or 'size_normal_sd'".into(),
                    ))
                }
                (Some(_), Some(_)) => {
                    return Err(CliError::Validation(
                        "[jumps] cannot set both 'size' and 'size_normal_sd'".into(),
                    ))
                }
            };
            let cfg = JumpConfig {
                intensity: j.intensity,
                size_law,
                activity_index_r: j.activity_index_r.unwrap_or(0.0),
            };
            cfg.validate().map_err(|e| CliError::Validation(e.to_string()))?;
            spec.jumps = Some(cfg);
        }

        if let Some(n) = raw.sim.n {
            if n < 2 {
                return Err(CliError::Validation(format!("[sim] n must be at least 2, got {n}")));
            }
            spec.n = n;
        }
        if let Some(it) = raw.sim.iterations {
            if it < 1 {
                return Err(CliError::Validation("[sim] iterations must be >= 1".into()));
            }
            spec.iterations = it;
        }

        let e = &raw.estimator;
        if let Some(nh) = &e.nh {
            if nh.is_empty() {
                return Err(CliError::Validation("[estimator] nh list is empty".into()));
            }
            spec.estimator.nh_list = nh.clone();
        }
        if let Some(k) = &e.k_n {
            if k.is_empty() {
                return Err(CliError::Validation("[estimator] k_n list is empty".into()));
            }
            spec.estimator.k_list = k.clone();
        }
        if let Some(w) = e.window.as_deref() {
            spec.estimator.window = match w {
                "pre" => spotmin::WindowMode::Pre,
                "post" => spotmin::WindowMode::Post,
                "centered" => spotmin::WindowMode::Centered,
                other => {
                    return Err(CliError::Validation(format!(
                        "unknown window mode '{other}' (expected pre, post or centered)"
                    )))
                }
            };
        }
        spec.estimator.truncation_kappa = match (e.truncation, e.kappa) {
            (Some(false) | None, None) => None,
            (Some(false), Some(_)) => {
                return Err(CliError::Validation(
                    "[estimator] kappa given but truncation = false".into(),
                ))
            }
            (Some(true), None) => Some(spotmin::estimators::DEFAULT_TRUNCATION_KAPPA),
            (_, Some(k)) => Some(k),
        };
        if let Some(q) = e.q {
            spec.estimator.q = q;
        }
        if !(spec.estimator.q > 0.0 && spec.estimator.q <= 0.5) {
            return Err(CliError::Validation(format!(
                "[estimator] q must lie in (0, 1/2], got {}",
                spec.estimator.q
            )));
        }
        spec.estimator.correction = match e.correction.as_deref() {
            None | Some("slope") => CorrectionSpec::Slope(e.slope.unwrap_or(1.046)),
            Some("none") => CorrectionSpec::None,
            Some("psi") => {
                let path = e.psi_table.clone().unwrap_or_else(|| PathBuf::from("psi_table.csv"));
                CorrectionSpec::PsiTable(path)
            }
            Some(other) => {
                return Err(CliError::Validation(format!(
                    "unknown correction '{other}' (expected none, slope or psi)"
                )))
            }
        };

        let p = &raw.psi;
        if let Some(nh) = &p.nh {
            if nh.is_empty() {
                return Err(CliError::Validation("[psi] nh list is empty".into()));
            }
            spec.psi.nh_list = nh.clone();
        }
        if let Some(it) = p.iterations {
            spec.psi.iterations = it;
        }
        if let Some(gp) = p.grid_points {
            if gp < 1 {
                return Err(CliError::Validation("[psi] grid_points must be >= 1".into()));
            }
            spec.psi.grid_points = gp;
        }
        if let Some(g) = p.grid_min {
            spec.psi.grid_min = g;
        }
        if let Some(g) = p.grid_max {
            spec.psi.grid_max = g;
        }
        if !(spec.psi.grid_min > 0.0 && spec.psi.grid_max >= spec.psi.grid_min) {
            return Err(CliError::Validation(
                "[psi] grid_min/grid_max must be positive and ordered".into(),
            ));
        }
        if let Some(k) = p.grid_kind.as_deref() {
            spec.psi.grid_kind = match k {
                "uniform" => GridKind::Uniform,
                "geometric" => GridKind::Geometric,
                other => {
                    return Err(CliError::Validation(format!(
                        "unknown grid kind '{other}' (expected uniform or geometric)"
                    )))
                }
            };
        }

        let c = &raw.coverage;
        if let Some(q) = &c.q {
            if q.is_empty() {
                return Err(CliError::Validation("[coverage] q list is empty".into()));
            }
            for &qq in q {
                if !(qq > 0.0 && qq <= 0.5) {
                    return Err(CliError::Validation(format!(
                        "[coverage] q values must lie in (0, 1/2], got {qq}"
                    )));
                }
            }
            spec.coverage.q_list = q.clone();
        }
        if let Some(it) = c.iterations {
            spec.coverage.iterations = it;
        }
        if let Some(t) = c.tau {
            if !(t > 0.0 && t < 1.0) {
                return Err(CliError::Validation(format!(
                    "[coverage] tau must lie in (0, 1), got {t}"
                )));
            }
            spec.coverage.tau = t;
        }

        Ok(spec)
    }

    /// Require one of the allowed scenarios ("custom" always passes).
    pub fn expect_scenario(&self, wanted: Scenario, command: &str) -> Result<(), CliError> {
        if self.scenario == wanted || self.scenario == Scenario::Custom {
            Ok(())
        } else {
            Err(CliError::Validation(format!(
                "spec scenario {:?} does not match the '{command}' command",
                self.scenario
            )))
        }
    }
}

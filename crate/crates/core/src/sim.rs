//! Synthetic market generator: a stochastic-volatility efficient price with
//! an intraday seasonality factor, optional compound-Poisson jumps, and
//! lower-bounded one-sided observation noise on top.
//!
//! The price follows
//!
//! ```text
//! dX_t = a_t dt + nu_t * sigma_t dW_t
//! d(sigma_t^2) = kappa (theta - sigma_t^2) dt + xi sigma_t dB_t
//! nu_t = (offset - sin(freq * pi * t)) * scale
//! ```
//!
//! with d[W, B]_t = rho dt. Discretization is Euler-Maruyama on the
//! observation grid i/n with full truncation of the squared volatility
//! (max(sigma^2, 0) enters drift and diffusion). The estimand stored along
//! the path is the effective squared spot volatility nu_t^2 * sigma_t^2.

use crate::error::{Error, Result};
use crate::rng::{splitmix64, substream_rng};
use rand::{Rng, RngExt};
use rand_distr::{Distribution, Exp, Poisson, StandardNormal};
use std::f64::consts::PI;

const SALT_VOL: u64 = 0x564f_4c50_4154_4800; // vol path driver
const SALT_PRICE: u64 = 0x5052_4943_4557_0000; // orthogonal price driver
const SALT_JUMP: u64 = 0x4a55_4d50_5300_0000;
const SALT_NOISE: u64 = 0x4e4f_4953_4500_0000;

/// Deterministic drift of the efficient log-price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drift {
    Zero,
    Constant(f64),
}

impl Drift {
    #[inline]
    fn at(&self, _t: f64) -> f64 {
        match self {
            Drift::Zero => 0.0,
            Drift::Constant(a) => *a,
        }
    }
}

impl Default for Drift {
    fn default() -> Self {
        Drift::Zero
    }
}

/// Stochastic-volatility model configuration.
///
/// Defaults reproduce the benchmark intraday design: mean-reverting squared
/// volatility with leverage, and a U-shaped seasonality factor
/// nu_t = (6 - sin(3 pi t / 4)) * 0.002.
#[derive(Debug, Clone, PartialEq)]
pub struct SvModelConfig {
    pub mean_reversion_speed: f64,
    pub mean_level: f64,
    /// Volatility of volatility. Zero is allowed and yields a deterministic
    /// squared-vol path (useful for constant-volatility experiments).
    pub vol_of_vol: f64,
    pub leverage_corr: f64,
    /// nu_t = (seasonal_offset - sin(seasonal_freq * pi * t)) * seasonal_scale
    pub seasonal_offset: f64,
    pub seasonal_freq: f64,
    pub seasonal_scale: f64,
    /// Starting squared volatility; `None` starts at `mean_level`.
    pub initial_sq_vol: Option<f64>,
    pub drift: Drift,
}

impl Default for SvModelConfig {
    fn default() -> Self {
        Self {
            mean_reversion_speed: 0.0162,
            mean_level: 0.8465,
            vol_of_vol: 0.117,
            leverage_corr: 0.2,
            seasonal_offset: 6.0,
            seasonal_freq: 0.75,
            seasonal_scale: 0.002,
            initial_sq_vol: None,
            drift: Drift::Zero,
        }
    }
}

impl SvModelConfig {
    /// Constant effective spot volatility `sigma_sq` (no vol-of-vol, flat
    /// seasonality), convenient for calibration experiments.
    pub fn constant(sigma_sq: f64) -> Self {
        Self {
            mean_reversion_speed: 1.0,
            mean_level: 1.0,
            vol_of_vol: 0.0,
            leverage_corr: 0.0,
            seasonal_offset: 1.0,
            seasonal_freq: 0.0,
            seasonal_scale: sigma_sq.sqrt(),
            initial_sq_vol: None,
            drift: Drift::Zero,
        }
    }

    /// Seasonality factor at time `t` in [0, 1].
    #[inline]
    pub fn seasonal(&self, t: f64) -> f64 {
        (self.seasonal_offset - (self.seasonal_freq * PI * t).sin()) * self.seasonal_scale
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_reversion_speed > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "mean_reversion_speed must be positive, got {}",
                self.mean_reversion_speed
            )));
        }
        if !(self.mean_level > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "mean_level must be positive, got {}",
                self.mean_level
            )));
        }
        if !(self.vol_of_vol >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "vol_of_vol must be non-negative, got {}",
                self.vol_of_vol
            )));
        }
        if !(self.leverage_corr.abs() <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "leverage_corr must lie in [-1, 1], got {}",
                self.leverage_corr
            )));
        }
        if !(self.seasonal_freq >= 0.0) {
            return Err(Error::InvalidConfig("seasonal_freq must be non-negative".into()));
        }
        // min over [0,1] of (offset - sin(freq pi t)): sin peaks at
        // min(freq, 1/2) * pi within the interval.
        let peak = if self.seasonal_freq <= 0.5 {
            (self.seasonal_freq * PI).sin()
        } else {
            1.0
        };
        if !((self.seasonal_offset - peak) * self.seasonal_scale > 0.0) {
            return Err(Error::InvalidConfig(
                "seasonality factor must stay strictly positive on [0, 1]".into(),
            ));
        }
        if let Some(v0) = self.initial_sq_vol {
            if !(v0 > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "initial_sq_vol must be positive, got {v0}"
                )));
            }
        }
        Ok(())
    }
}

/// Law of compound-Poisson jump sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpSizeLaw {
    /// Fixed magnitude, independent fair sign.
    SignedFixed(f64),
    /// Centred Gaussian with the given standard deviation.
    Gaussian(f64),
}

/// Finite-activity (compound Poisson) jump component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpConfig {
    /// Expected number of jumps on [0, 1].
    pub intensity: f64,
    pub size_law: JumpSizeLaw,
    /// Jump-activity index tag; 0 for the compound-Poisson default.
    pub activity_index_r: f64,
}

impl JumpConfig {
    pub fn signed_fixed(intensity: f64, magnitude: f64) -> Self {
        Self {
            intensity,
            size_law: JumpSizeLaw::SignedFixed(magnitude),
            activity_index_r: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "jump intensity must be non-negative, got {}",
                self.intensity
            )));
        }
        if !(0.0..=2.0).contains(&self.activity_index_r) {
            return Err(Error::InvalidConfig(format!(
                "activity_index_r must lie in [0, 2], got {}",
                self.activity_index_r
            )));
        }
        let size_ok = match self.size_law {
            JumpSizeLaw::SignedFixed(m) => m.is_finite(),
            JumpSizeLaw::Gaussian(sd) => sd.is_finite() && sd >= 0.0,
        };
        if !size_ok {
            return Err(Error::InvalidConfig("invalid jump size law".into()));
        }
        Ok(())
    }
}

/// Observation-noise family. Every member has a cdf behaving like
/// `eta * x` near zero and non-negative support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseFamily {
    Exponential,
    Uniform,
    Pareto,
    None,
}

/// One-sided microstructure noise: `level_eta` is the density of the noise
/// at the lower support boundary (units 1/price).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub family: NoiseFamily,
    pub level_eta: f64,
}

impl NoiseConfig {
    pub fn exponential(eta: f64) -> Self {
        Self {
            family: NoiseFamily::Exponential,
            level_eta: eta,
        }
    }

    pub fn none() -> Self {
        Self {
            family: NoiseFamily::None,
            level_eta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.level_eta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise level_eta must be positive, got {}",
                self.level_eta
            )));
        }
        Ok(())
    }

    /// Draw-ready sampler for this configuration.
    pub fn sampler(&self) -> Result<NoiseSampler> {
        self.validate()?;
        let exp = match self.family {
            NoiseFamily::Exponential => Some(
                Exp::new(self.level_eta)
                    .map_err(|e| Error::InvalidConfig(format!("exponential noise: {e}")))?,
            ),
            _ => None,
        };
        Ok(NoiseSampler {
            family: self.family,
            eta: self.level_eta,
            exp,
        })
    }
}

/// Sampler for one noise draw; cheap to copy into worker threads.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSampler {
    family: NoiseFamily,
    eta: f64,
    exp: Option<Exp<f64>>,
}

impl NoiseSampler {
    /// One noise draw epsilon >= 0.
    #[inline]
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self.family {
            NoiseFamily::Exponential => self.exp.unwrap().sample(rng),
            // Uniform on [0, 1/eta]: density eta on its support.
            NoiseFamily::Uniform => rng.random::<f64>() / self.eta,
            // Shifted Pareto F(x) = 1 - 1/(1 + eta x): density eta at 0+,
            // heavy tailed (no mean).
            NoiseFamily::Pareto => {
                let u: f64 = rng.random();
                (1.0 / (1.0 - u) - 1.0) / self.eta
            }
            NoiseFamily::None => 0.0,
        }
    }
}

/// Ground truth for experiments: efficient log-price on the grid i/n, the
/// effective squared spot volatility path, and any jumps applied.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub n: usize,
    /// Log-price X at t = i/n, length n + 1.
    pub x: Vec<f64>,
    /// nu_t^2 * sigma_t^2 at t = i/n, length n + 1.
    pub spot_var: Vec<f64>,
    /// (time, size) of applied jumps, sorted by time.
    pub jump_times_and_sizes: Vec<(f64, f64)>,
}

/// Noisy observations Y_i = X_{i/n} + eps_i.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSeries {
    pub n: usize,
    pub y: Vec<f64>,
    pub noise: NoiseConfig,
}

/// A drawn squared-volatility path together with its Brownian increments,
/// so that correlated price paths can be generated on top of it. Keeping
/// the increments lets a study fix one volatility path and regenerate
/// prices while preserving the leverage correlation.
#[derive(Debug, Clone)]
pub struct VolPath {
    pub n: usize,
    /// Truncated squared volatility max(sigma^2, 0) at t = i/n, length n+1.
    pub sq_vol: Vec<f64>,
    /// Increments of the volatility driver B, length n.
    pub d_b: Vec<f64>,
}

/// Draw the squared-volatility path (Euler-Maruyama, full truncation).
pub fn simulate_vol_path(config: &SvModelConfig, n: usize, seed: u64) -> Result<VolPath> {
    config.validate()?;
    if n < 2 {
        return Err(Error::InvalidConfig(format!("need n >= 2, got {n}")));
    }
    let mut rng = substream_rng(seed, SALT_VOL, 0);
    let dt = 1.0 / n as f64;
    let sqrt_dt = dt.sqrt();
    let mut sq_vol = Vec::with_capacity(n + 1);
    let mut d_b = Vec::with_capacity(n);
    let mut v = config.initial_sq_vol.unwrap_or(config.mean_level);
    sq_vol.push(v.max(0.0));
    for _ in 0..n {
        let vp = v.max(0.0);
        let z: f64 = rng.sample(StandardNormal);
        let db = sqrt_dt * z;
        v += config.mean_reversion_speed * (config.mean_level - vp) * dt
            + config.vol_of_vol * vp.sqrt() * db;
        d_b.push(db);
        sq_vol.push(v.max(0.0));
    }
    Ok(VolPath { n, sq_vol, d_b })
}

/// Generate a price path on a given volatility path. The price driver is
/// W = rho * B + sqrt(1 - rho^2) * W_perp with a fresh orthogonal part.
pub fn simulate_price_on_vol(
    vol: &VolPath,
    config: &SvModelConfig,
    seed: u64,
) -> Result<PathBundle> {
    config.validate()?;
    let n = vol.n;
    if vol.sq_vol.len() != n + 1 || vol.d_b.len() != n {
        return Err(Error::Mismatch("volatility path length".into()));
    }
    let mut rng = substream_rng(seed, SALT_PRICE, 0);
    let dt = 1.0 / n as f64;
    let sqrt_dt = dt.sqrt();
    let rho = config.leverage_corr;
    let orth = (1.0 - rho * rho).sqrt();
    let mut x = Vec::with_capacity(n + 1);
    let mut spot_var = Vec::with_capacity(n + 1);
    x.push(0.0);
    let mut level = 0.0;
    for j in 0..n {
        let t = j as f64 * dt;
        let nu = config.seasonal(t);
        let sig = vol.sq_vol[j].sqrt();
        spot_var.push(nu * nu * vol.sq_vol[j]);
        let z: f64 = rng.sample(StandardNormal);
        let dw = rho * vol.d_b[j] + orth * sqrt_dt * z;
        level += config.drift.at(t) * dt + nu * sig * dw;
        x.push(level);
    }
    let nu_end = config.seasonal(1.0);
    spot_var.push(nu_end * nu_end * vol.sq_vol[n]);
    Ok(PathBundle {
        n,
        x,
        spot_var,
        jump_times_and_sizes: Vec::new(),
    })
}

/// Simulate the efficient log-price and its spot-variance path.
///
/// Deterministic in (config, n, seed); both Brownian drivers derive from
/// `seed` through fixed stream ids.
pub fn simulate_path(config: &SvModelConfig, n: usize, seed: u64) -> Result<PathBundle> {
    let vol = simulate_vol_path(config, n, seed)?;
    simulate_price_on_vol(&vol, config, splitmix64(seed ^ SALT_PRICE))
}

/// Shift the path by `size` from `time` onward (indices with i/n >= time).
pub fn apply_jump(path: &mut PathBundle, time: f64, size: f64) {
    let n = path.n as f64;
    let first = (time * n).ceil().max(0.0) as usize;
    for xi in path.x.iter_mut().skip(first) {
        *xi += size;
    }
    path.jump_times_and_sizes.push((time, size));
    path.jump_times_and_sizes
        .sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
}

/// Add compound-Poisson jumps to a path. Jump times are uniform on [0, 1];
/// the count is Poisson with mean `jumps.intensity`.
pub fn add_jumps(path: &PathBundle, jumps: &JumpConfig, seed: u64) -> Result<PathBundle> {
    jumps.validate()?;
    let mut out = path.clone();
    if jumps.intensity == 0.0 {
        return Ok(out);
    }
    let mut rng = substream_rng(seed, SALT_JUMP, 0);
    let count = Poisson::new(jumps.intensity)
        .map_err(|e| Error::InvalidConfig(format!("jump intensity: {e}")))?
        .sample(&mut rng) as usize;
    for _ in 0..count {
        let t: f64 = rng.random();
        let size = match jumps.size_law {
            JumpSizeLaw::SignedFixed(m) => {
                if rng.random::<bool>() {
                    m
                } else {
                    -m
                }
            }
            JumpSizeLaw::Gaussian(sd) => sd * rng.sample::<f64, _>(StandardNormal),
        };
        apply_jump(&mut out, t, size);
    }
    Ok(out)
}

/// Observe the path through one-sided noise: y_i = x_i + eps_i.
pub fn synthesize_observations(
    path: &PathBundle,
    noise: &NoiseConfig,
    seed: u64,
) -> Result<ObservationSeries> {
    let sampler = noise.sampler()?;
    let mut rng = substream_rng(seed, SALT_NOISE, 0);
    let y = path.x.iter().map(|&x| x + sampler.sample(&mut rng)).collect();
    Ok(ObservationSeries {
        n: path.n,
        y,
        noise: *noise,
    })
}

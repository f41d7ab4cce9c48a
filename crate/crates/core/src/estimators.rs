//! Spot volatility and quarticity estimators built from squared differences
//! of block minima, jump truncation, confidence intervals and full intraday
//! volatility curves.
//!
//! The raw spot estimator over a window W of diff indices is
//!
//! ```text
//! sigma2_hat = pi / (2 (pi - 2) K_eff) * sum_{k in W} h^{-1} D_k^2
//! ```
//!
//! optionally zeroing terms with |D_k| > h^kappa (truncation; the
//! normalizer K_eff keeps counting zeroed terms). Quarticity replaces the
//! prefactor by pi / (4 (3 pi - 8)) and D_k^2 / h by D_k^4 / h^2.

use crate::blocks::LocalMinima;
use crate::error::{Error, Result};
use crate::psi::PsiTable;
use crate::stats::{normal_quantile, CompensatedSum};
use std::f64::consts::PI;
use std::ops::Range;

/// pi / (2 (pi - 2)) = 1.3759691969420544: moment constant of the
/// half-normal law of a Brownian minimum, calibrated so the estimator is
/// exact in the continuous no-noise limit.
pub const VOL_PREFACTOR: f64 = PI / (2.0 * (PI - 2.0));

/// pi / (4 (3 pi - 8)) = 0.5512424988475634: quarticity counterpart.
pub const QUARTICITY_PREFACTOR: f64 = PI / (4.0 * (3.0 * PI - 8.0));

/// 7 pi^2 / 4 - 2 pi / 3 - 12 = 3.177412599513181: asymptotic variance
/// numerator of the central limit theorem for the spot estimator.
pub const CLT_VARIANCE_NUM: f64 = 7.0 * PI * PI / 4.0 - 2.0 * PI / 3.0 - 12.0;

/// CLT variance normalized by (pi - 2)^2; approximately 2.44.
pub const CLT_VARIANCE_NORMALIZED: f64 = CLT_VARIANCE_NUM / ((PI - 2.0) * (PI - 2.0));

/// Default truncation exponent when truncation is requested without an
/// explicit value; sits inside the admissible (alpha/((2-r)(2 alpha + 1)),
/// 1/2) range for the benchmark case alpha = 1/2, r = 0.
pub const DEFAULT_TRUNCATION_KAPPA: f64 = 0.4;

/// Placement of the averaging window relative to the target time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowMode {
    /// Diffs strictly before the target block (available on-line).
    Pre,
    /// Diffs strictly after the target block.
    Post,
    /// ceil(K/2) diffs before and floor(K/2) after, skipping the target
    /// block's own diff indices.
    Centered,
}

/// Tuning parameters of the spot estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Number of diffs averaged per estimate.
    pub k_n: usize,
    pub window_mode: WindowMode,
    /// Truncation exponent kappa in (0, 1/2); `None` disables truncation.
    pub truncation_kappa: Option<f64>,
    /// Volatility regularity hint, only used in validation messages.
    pub alpha_hint: Option<f64>,
}

impl EstimatorConfig {
    pub fn new(k_n: usize, window_mode: WindowMode) -> Self {
        Self {
            k_n,
            window_mode,
            truncation_kappa: None,
            alpha_hint: None,
        }
    }

    /// Enable truncation at the default exponent.
    pub fn with_truncation(mut self) -> Self {
        self.truncation_kappa = Some(DEFAULT_TRUNCATION_KAPPA);
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.truncation_kappa = Some(kappa);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_n < 2 {
            return Err(Error::InvalidConfig(format!(
                "window size k_n must be at least 2, got {}",
                self.k_n
            )));
        }
        if let Some(k) = self.truncation_kappa {
            if !(k > 0.0 && k < 0.5) {
                return Err(Error::InvalidConfig(format!(
                    "truncation_kappa must lie in (0, 1/2), got {k}"
                )));
            }
        }
        Ok(())
    }
}

/// Point estimate at one time, with the pieces needed for inference.
#[derive(Debug, Clone, PartialEq)]
pub struct SpotEstimate {
    pub tau: f64,
    pub raw_value: f64,
    pub corrected_value: Option<f64>,
    pub quarticity: f64,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    /// Number of diff terms in the window (truncated terms still count).
    pub blocks_used: usize,
}

/// Intraday curve: one centered estimate per block.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilityCurve {
    pub estimates: Vec<SpotEstimate>,
    pub k_n: usize,
    pub q: f64,
}

/// Bias-correction strategy applied to raw estimates and interval ends.
#[derive(Debug, Clone, Copy)]
pub enum BiasCorrection<'a> {
    None,
    /// Divide by a fitted slope.
    SlopeDivide(f64),
    /// Invert a Monte-Carlo bias table.
    PsiInverse(&'a PsiTable),
}

impl BiasCorrection<'_> {
    /// The monotone inverse map sending a raw estimate to a corrected one.
    #[inline]
    pub fn apply(&self, y: f64) -> f64 {
        match self {
            BiasCorrection::None => y,
            BiasCorrection::SlopeDivide(s) => y / s,
            BiasCorrection::PsiInverse(t) => t.invert(y),
        }
    }
}

/// Diff-index window, possibly split in two runs around the target block.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Window {
    before: Range<usize>,
    after: Range<usize>,
}

impl Window {
    fn k_eff(&self) -> usize {
        self.before.len() + self.after.len()
    }

    fn iter(&self) -> impl Iterator<Item = usize> {
        self.before.clone().chain(self.after.clone())
    }
}

fn block_index(tau: f64, inv_h: usize) -> Result<usize> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::TauOutOfRange(tau));
    }
    Ok((inv_h as f64 * tau).floor() as usize)
}

/// Valid diff indices are 1..=inv_h-1; windows clamp into that range.
fn window_for(mode: WindowMode, b: usize, k_n: usize, inv_h: usize, tau: f64) -> Result<Window> {
    let last = inv_h - 1; // largest valid diff index
    let clamp_lo = |lo: i64| lo.max(1) as usize;
    let (before, after) = match mode {
        WindowMode::Pre => {
            let lo = clamp_lo(b as i64 - k_n as i64);
            let hi = b.min(last + 1); // exclusive end at b
            (lo..hi.max(lo), 0..0)
        }
        WindowMode::Post => {
            let lo = b + 1;
            let hi = (b + k_n).min(last) + 1;
            (0..0, lo..hi.max(lo))
        }
        WindowMode::Centered => {
            let nb = k_n.div_ceil(2);
            let na = k_n / 2;
            let lo_b = clamp_lo(b as i64 - nb as i64);
            let hi_b = b.min(last + 1);
            let lo_a = b + 1;
            let hi_a = (b + na).min(last) + 1;
            (lo_b..hi_b.max(lo_b), lo_a..hi_a.max(lo_a))
        }
    };
    let w = Window { before, after };
    if w.k_eff() == 0 {
        return Err(Error::EmptyWindow { tau });
    }
    Ok(w)
}

/// Truncation threshold u_n = h^kappa for the partition underlying `lm`.
fn threshold(lm: &LocalMinima, cfg: &EstimatorConfig) -> Option<f64> {
    cfg.truncation_kappa.map(|k| lm.h().powf(k))
}

fn windowed_vol(lm: &LocalMinima, w: &Window, u_n: Option<f64>) -> f64 {
    let inv_h = lm.partition.inv_h as f64;
    let mut acc = CompensatedSum::new();
    for k in w.iter() {
        let d = lm.diff(k);
        if u_n.is_none_or(|u| d.abs() <= u) {
            acc.add(inv_h * d * d);
        }
    }
    VOL_PREFACTOR * acc.value() / w.k_eff() as f64
}

fn windowed_quarticity(lm: &LocalMinima, w: &Window, u_n: Option<f64>) -> f64 {
    let inv_h = lm.partition.inv_h as f64;
    let mut acc = CompensatedSum::new();
    for k in w.iter() {
        let d = lm.diff(k);
        if u_n.is_none_or(|u| d.abs() <= u) {
            let d2 = d * d;
            acc.add(inv_h * inv_h * d2 * d2);
        }
    }
    QUARTICITY_PREFACTOR * acc.value() / w.k_eff() as f64
}

fn spot_vol_with_mode(
    lm: &LocalMinima,
    tau: f64,
    cfg: &EstimatorConfig,
    mode: WindowMode,
) -> Result<f64> {
    cfg.validate()?;
    let b = block_index(tau, lm.partition.inv_h)?;
    let w = window_for(mode, b, cfg.k_n, lm.partition.inv_h, tau)?;
    Ok(windowed_vol(lm, &w, threshold(lm, cfg)))
}

/// Spot squared volatility from the K_n diffs before time tau.
pub fn spot_vol_pre(lm: &LocalMinima, tau: f64, cfg: &EstimatorConfig) -> Result<f64> {
    spot_vol_with_mode(lm, tau, cfg, WindowMode::Pre)
}

/// Spot squared volatility from the K_n diffs after time tau.
pub fn spot_vol_post(lm: &LocalMinima, tau: f64, cfg: &EstimatorConfig) -> Result<f64> {
    spot_vol_with_mode(lm, tau, cfg, WindowMode::Post)
}

/// Spot squared volatility from a window centred on the block of tau.
pub fn spot_vol_centered(lm: &LocalMinima, tau: f64, cfg: &EstimatorConfig) -> Result<f64> {
    spot_vol_with_mode(lm, tau, cfg, WindowMode::Centered)
}

/// Spot squared volatility with the window placement from `cfg`.
pub fn spot_vol(lm: &LocalMinima, tau: f64, cfg: &EstimatorConfig) -> Result<f64> {
    spot_vol_with_mode(lm, tau, cfg, cfg.window_mode)
}

/// Spot quarticity over the same window (and threshold) as the spot
/// volatility estimator configured in `cfg`.
pub fn spot_quarticity(lm: &LocalMinima, tau: f64, cfg: &EstimatorConfig) -> Result<f64> {
    cfg.validate()?;
    let b = block_index(tau, lm.partition.inv_h)?;
    let w = window_for(cfg.window_mode, b, cfg.k_n, lm.partition.inv_h, tau)?;
    Ok(windowed_quarticity(lm, &w, threshold(lm, cfg)))
}

/// Number of diff terms the configured window would use at time tau.
pub fn effective_window(lm: &LocalMinima, tau: f64, cfg: &EstimatorConfig) -> Result<usize> {
    let b = block_index(tau, lm.partition.inv_h)?;
    Ok(window_for(cfg.window_mode, b, cfg.k_n, lm.partition.inv_h, tau)?.k_eff())
}

/// Two-sided confidence interval at level 1 - 2q.
///
/// Half-width is K_eff^{-1/2} Phi^{-1}(1-q) sqrt(quart * V) / (pi - 2) with
/// V the CLT variance numerator; the monotone `inverse` maps both ends
/// (identity for uncorrected intervals). `q` may equal 1/2, which gives a
/// zero-width interval.
pub fn confidence_interval<F: Fn(f64) -> f64>(
    raw: f64,
    quarticity: f64,
    k_eff: usize,
    q: f64,
    inverse: F,
) -> Result<(f64, f64)> {
    if !(q > 0.0 && q <= 0.5) {
        return Err(Error::InvalidConfig(format!(
            "confidence level parameter q must lie in (0, 1/2], got {q}"
        )));
    }
    if !(quarticity > 0.0) {
        return Err(Error::DegenerateData(format!(
            "quarticity must be positive for interval construction, got {quarticity}"
        )));
    }
    if k_eff == 0 {
        return Err(Error::DegenerateData("empty window".into()));
    }
    let z = if q == 0.5 { 0.0 } else { normal_quantile(1.0 - q) };
    let hw = z * (quarticity * CLT_VARIANCE_NUM).sqrt() / ((PI - 2.0) * (k_eff as f64).sqrt());
    Ok((inverse(raw - hw), inverse(raw + hw)))
}

/// Raw difference of post- and pre-window estimates at tau; a large value
/// points at a volatility jump. No standardization is applied.
pub fn vol_jump_statistic(lm: &LocalMinima, tau: f64, cfg: &EstimatorConfig) -> Result<f64> {
    let post = spot_vol_post(lm, tau, cfg)?;
    let pre = spot_vol_pre(lm, tau, cfg)?;
    Ok(post - pre)
}

/// Full intraday curve: one centered estimate per block (evaluated at the
/// block midpoint), with confidence intervals at level 1 - 2q mapped
/// through the chosen bias correction.
pub fn volatility_curve(
    lm: &LocalMinima,
    cfg: &EstimatorConfig,
    correction: &BiasCorrection<'_>,
    q: f64,
) -> Result<VolatilityCurve> {
    cfg.validate()?;
    if !(q > 0.0 && q <= 0.5) {
        return Err(Error::InvalidConfig(format!(
            "confidence level parameter q must lie in (0, 1/2], got {q}"
        )));
    }
    let inv_h = lm.partition.inv_h;
    let u_n = threshold(lm, cfg);

    // Prefix sums of h^{-1} D^2 and h^{-2} D^4 (thresholded terms zeroed)
    // make each block's window an O(1) lookup.
    let hf = inv_h as f64;
    let mut p2 = Vec::with_capacity(inv_h);
    let mut p4 = Vec::with_capacity(inv_h);
    let mut a2 = CompensatedSum::new();
    let mut a4 = CompensatedSum::new();
    p2.push(0.0);
    p4.push(0.0);
    for k in 1..inv_h {
        let d = lm.diff(k);
        if u_n.is_none_or(|u| d.abs() <= u) {
            let d2 = d * d;
            a2.add(hf * d2);
            a4.add(hf * hf * d2 * d2);
        }
        p2.push(a2.value());
        p4.push(a4.value());
    }
    let range_sum = |p: &[f64], r: &Range<usize>| {
        if r.is_empty() {
            0.0
        } else {
            p[r.end - 1] - p[r.start - 1]
        }
    };

    let mut estimates = Vec::with_capacity(inv_h);
    for b in 0..inv_h {
        let tau = (b as f64 + 0.5) / hf;
        let w = window_for(WindowMode::Centered, b, cfg.k_n, inv_h, tau)?;
        let k_eff = w.k_eff();
        let s2 = range_sum(&p2, &w.before) + range_sum(&p2, &w.after);
        let s4 = range_sum(&p4, &w.before) + range_sum(&p4, &w.after);
        let raw = VOL_PREFACTOR * s2 / k_eff as f64;
        let quart = QUARTICITY_PREFACTOR * s4 / k_eff as f64;
        let corrected = match correction {
            BiasCorrection::None => None,
            other => Some(other.apply(raw)),
        };
        let (ci_lower, ci_upper) = if quart > 0.0 {
            let (lo, hi) = confidence_interval(raw, quart, k_eff, q, |y| correction.apply(y))?;
            (Some(lo), Some(hi))
        } else {
            (None, None)
        };
        estimates.push(SpotEstimate {
            tau,
            raw_value: raw,
            corrected_value: corrected,
            quarticity: quart,
            ci_lower,
            ci_upper,
            blocks_used: k_eff,
        });
    }
    Ok(VolatilityCurve {
        estimates,
        k_n: cfg.k_n,
        q,
    })
}

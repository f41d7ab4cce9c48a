//! Monte-Carlo engine for the finite-sample bias map Psi_n.
//!
//! For a block holding `nh` of `n` observations and noise level eta,
//!
//! ```text
//! Psi_n(sigma^2) = pi / (2 (pi - 2)) * h^{-1} * E[(M0 - M1)^2],
//! M1 = min_{k=1..nh}   (sigma/sqrt(n) * sum_{i<=k} Z_i + eps_k),
//! M0 = min_{k=0..nh-1} (sigma/sqrt(n) * sum_{i<=k} Z_i + eps_k),  Z_0 = 0,
//! ```
//!
//! with M0 and M1 drawn independently. Psi_n maps the true squared spot
//! volatility to the expectation of the raw block-minima estimator; its
//! numerical inverse (after isotonic smoothing) is the bias correction.
//!
//! Sampling M1 walks the defining recursion backwards: draw the last state
//! `eps + scale * Z` (an exponentially modified Gaussian under exponential
//! noise), then repeatedly take the minimum with a fresh noise draw and
//! convolve with a fresh Gaussian. One draw therefore costs O(nh) with no
//! path storage. M0 runs the same recursion one state shorter and skips
//! the final convolution (its k = 0 term carries no Gaussian increment).
//! A classical path-based sampler is kept alongside as a validation oracle.

use crate::error::{Error, Result};
use crate::estimators::VOL_PREFACTOR;
use crate::isotonic::isotonic_non_decreasing;
use crate::rng::{splitmix64, substream_rng};
use crate::sim::{NoiseConfig, NoiseSampler};
use crate::stats::CompensatedSum;
use rand::{Rng, RngExt};
use rand_distr::StandardNormal;
use rayon::prelude::*;

const SALT_POINT: u64 = 0x5053_4900_504f_494e; // estimate_psi_point streams
const SALT_TABLE: u64 = 0x5053_4900_5441_424c; // per-grid-point keys
const SALT_SINGLE: u64 = 0x5053_4900_4f4e_4500; // one-shot seeded draws
const CHUNK: usize = 4096;

/// Which of the two block minima to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinVariant {
    /// min over k = 0..nh-1, walk started at zero (pure noise at k = 0).
    M0,
    /// min over k = 1..nh.
    M1,
}

/// Configuration of a bias-table computation.
#[derive(Debug, Clone)]
pub struct PsiConfig {
    pub n: usize,
    /// Observations per block; h = nh / n.
    pub nh: usize,
    pub noise: NoiseConfig,
    /// Strictly increasing, positive squared-volatility grid.
    pub grid: Vec<f64>,
    /// Monte-Carlo pairs per grid point.
    pub iterations_per_point: usize,
    pub seed: u64,
}

impl PsiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nh < 1 {
            return Err(Error::InvalidConfig("nh must be at least 1".into()));
        }
        if self.n < self.nh {
            return Err(Error::InvalidConfig(format!(
                "n = {} must be at least nh = {}",
                self.n, self.nh
            )));
        }
        if self.iterations_per_point < 1 {
            return Err(Error::InvalidConfig("iterations_per_point must be >= 1".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidConfig("grid must be non-empty".into()));
        }
        if !self.grid.iter().all(|&v| v > 0.0) {
            return Err(Error::InvalidConfig("grid values must be positive".into()));
        }
        if !self.grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig("grid must be strictly increasing".into()));
        }
        self.noise.validate()
    }

    fn h(&self) -> f64 {
        self.nh as f64 / self.n as f64
    }
}

/// One grid point of a bias table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiPoint {
    pub sigma_sq: f64,
    pub psi_hat: f64,
    pub stderr: f64,
    /// Isotonic-regression value at this grid point.
    pub psi_isotonic: f64,
}

/// Provenance of a bias table (serialized as the CSV sidecar).
#[derive(Debug, Clone, PartialEq)]
pub struct PsiMeta {
    pub n: usize,
    pub nh: usize,
    pub noise: NoiseConfig,
    pub iterations_per_point: usize,
    pub seed: u64,
}

/// Monte-Carlo bias table with a fitted slope and a monotone inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiTable {
    pub points: Vec<PsiPoint>,
    /// Least-squares slope of psi_hat on sigma_sq through the origin.
    pub fitted_slope: f64,
    pub meta: PsiMeta,
}

/// Draw one block minimum via the backward min/convolve recursion.
#[inline]
pub fn dp_draw<R: Rng>(
    scale: f64,
    nh: usize,
    noise: &NoiseSampler,
    variant: MinVariant,
    rng: &mut R,
) -> f64 {
    match variant {
        MinVariant::M1 => {
            let mut u = noise.sample(rng) + scale * rng.sample::<f64, _>(StandardNormal);
            for _ in 1..nh {
                u = u.min(noise.sample(rng)) + scale * rng.sample::<f64, _>(StandardNormal);
            }
            u
        }
        MinVariant::M0 => {
            if nh == 1 {
                return noise.sample(rng);
            }
            let mut u = noise.sample(rng) + scale * rng.sample::<f64, _>(StandardNormal);
            for _ in 2..nh {
                u = u.min(noise.sample(rng)) + scale * rng.sample::<f64, _>(StandardNormal);
            }
            // k = 0 carries no Gaussian increment: no final convolution.
            u.min(noise.sample(rng))
        }
    }
}

/// Draw one block minimum from an explicitly simulated walk (oracle).
#[inline]
pub fn bruteforce_draw<R: Rng>(
    scale: f64,
    nh: usize,
    noise: &NoiseSampler,
    variant: MinVariant,
    rng: &mut R,
) -> f64 {
    // materialize the discretized path, then scan walk + noise
    let mut walk = Vec::with_capacity(nh);
    match variant {
        MinVariant::M1 => {
            let mut level = 0.0;
            for _ in 0..nh {
                level += scale * rng.sample::<f64, _>(StandardNormal);
                walk.push(level);
            }
        }
        MinVariant::M0 => {
            let mut level = 0.0;
            walk.push(level);
            for _ in 1..nh {
                level += scale * rng.sample::<f64, _>(StandardNormal);
                walk.push(level);
            }
        }
    }
    walk.into_iter()
        .map(|w| w + noise.sample(rng))
        .fold(f64::INFINITY, f64::min)
}

/// One seeded draw of the fast sampler (deterministic in the seed).
pub fn sample_min_dp(
    sigma: f64,
    n: usize,
    nh: usize,
    noise: &NoiseConfig,
    variant: MinVariant,
    seed: u64,
) -> Result<f64> {
    let sampler = noise.sampler()?;
    let mut rng = substream_rng(seed, SALT_SINGLE, 0);
    Ok(dp_draw(sigma / (n as f64).sqrt(), nh, &sampler, variant, &mut rng))
}

/// One seeded draw of the path-based oracle (deterministic in the seed).
pub fn sample_min_bruteforce(
    sigma: f64,
    n: usize,
    nh: usize,
    noise: &NoiseConfig,
    variant: MinVariant,
    seed: u64,
) -> Result<f64> {
    let sampler = noise.sampler()?;
    let mut rng = substream_rng(seed, SALT_SINGLE, 1);
    Ok(bruteforce_draw(
        sigma / (n as f64).sqrt(),
        nh,
        &sampler,
        variant,
        &mut rng,
    ))
}

/// Monte-Carlo estimate of Psi_n at one squared volatility.
///
/// Returns (psi_hat, stderr). M0 and M1 use disjoint fixed streams, pairs
/// are processed in fixed-size chunks, and partial sums combine in chunk
/// order, so the value does not depend on thread scheduling.
pub fn estimate_psi_point(sigma_sq: f64, cfg: &PsiConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    if !(sigma_sq >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "sigma_sq must be non-negative, got {sigma_sq}"
        )));
    }
    point_estimate(
        sigma_sq,
        cfg.n,
        cfg.nh,
        &cfg.noise.sampler()?,
        cfg.iterations_per_point,
        cfg.h(),
        splitmix64(cfg.seed ^ SALT_POINT),
    )
}

fn point_estimate(
    sigma_sq: f64,
    n: usize,
    nh: usize,
    sampler: &NoiseSampler,
    iterations: usize,
    h: f64,
    key: u64,
) -> Result<(f64, f64)> {
    let scale = sigma_sq.sqrt() / (n as f64).sqrt();
    let chunks = iterations.div_ceil(CHUNK);
    let partials: Vec<(CompensatedSum, CompensatedSum)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng0 = substream_rng(key, SALT_POINT, 2 * c as u64);
            let mut rng1 = substream_rng(key, SALT_POINT, 2 * c as u64 + 1);
            let len = CHUNK.min(iterations - c * CHUNK);
            let mut sum = CompensatedSum::new();
            let mut sum_sq = CompensatedSum::new();
            for _ in 0..len {
                let m0 = dp_draw(scale, nh, sampler, MinVariant::M0, &mut rng0);
                let m1 = dp_draw(scale, nh, sampler, MinVariant::M1, &mut rng1);
                let q = (m0 - m1) * (m0 - m1);
                sum.add(q);
                sum_sq.add(q * q);
            }
            (sum, sum_sq)
        })
        .collect();
    let mut sum = CompensatedSum::new();
    let mut sum_sq = CompensatedSum::new();
    for (s, s2) in partials {
        sum.merge(s);
        sum_sq.merge(s2);
    }
    let nf = iterations as f64;
    let mean = sum.value() / nf;
    let scale_out = VOL_PREFACTOR / h;
    let stderr = if iterations > 1 {
        let var = ((sum_sq.value() - nf * mean * mean) / (nf - 1.0)).max(0.0);
        scale_out * (var / nf).sqrt()
    } else {
        f64::INFINITY
    };
    Ok((scale_out * mean, stderr))
}

/// Estimate Psi_n over the whole grid, smooth it isotonic, fit the slope.
pub fn build_psi_table(cfg: &PsiConfig) -> Result<PsiTable> {
    cfg.validate()?;
    let sampler = cfg.noise.sampler()?;
    let table_key = splitmix64(cfg.seed ^ SALT_TABLE);
    let h = cfg.h();
    let raw: Vec<(f64, f64)> = cfg
        .grid
        .par_iter()
        .enumerate()
        .map(|(p, &sigma_sq)| {
            let key = splitmix64(table_key.wrapping_add(p as u64));
            point_estimate(
                sigma_sq,
                cfg.n,
                cfg.nh,
                &sampler,
                cfg.iterations_per_point,
                h,
                key,
            )
            .expect("validated config")
        })
        .collect();
    let psi_hats: Vec<f64> = raw.iter().map(|r| r.0).collect();
    let mono = isotonic_non_decreasing(&psi_hats);
    let points: Vec<PsiPoint> = cfg
        .grid
        .iter()
        .zip(raw.iter())
        .zip(mono.iter())
        .map(|((&sigma_sq, &(psi_hat, stderr)), &psi_isotonic)| PsiPoint {
            sigma_sq,
            psi_hat,
            stderr,
            psi_isotonic,
        })
        .collect();
    let mut table = PsiTable {
        points,
        fitted_slope: 1.0,
        meta: PsiMeta {
            n: cfg.n,
            nh: cfg.nh,
            noise: cfg.noise,
            iterations_per_point: cfg.iterations_per_point,
            seed: cfg.seed,
        },
    };
    table.fitted_slope = fit_slope(&table);
    Ok(table)
}

/// Least-squares slope of psi_hat on sigma_sq through the origin.
pub fn fit_slope(table: &PsiTable) -> f64 {
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for p in &table.points {
        num.add(p.sigma_sq * p.psi_hat);
        den.add(p.sigma_sq * p.sigma_sq);
    }
    num.value() / den.value()
}

/// Invert the isotonic fit at `y` (piecewise linear between pooled knots,
/// slope-extrapolated outside the table range).
pub fn invert_psi(table: &PsiTable, y: f64) -> f64 {
    table.invert(y)
}

impl PsiTable {
    /// Monotone inverse of the isotonic fit.
    ///
    /// Flat (pooled) runs collapse to a single knot at the mean abscissa;
    /// outside the fitted range the inverse continues linearly with the
    /// fitted slope, so very small arguments can map below zero.
    pub fn invert(&self, y: f64) -> f64 {
        assert!(!self.points.is_empty());
        // collapse equal-value runs into knots
        let mut knots: Vec<(f64, f64)> = Vec::with_capacity(self.points.len()); // (y, x)
        let mut i = 0;
        while i < self.points.len() {
            let v = self.points[i].psi_isotonic;
            let mut j = i;
            let mut x_sum = 0.0;
            while j < self.points.len() && self.points[j].psi_isotonic == v {
                x_sum += self.points[j].sigma_sq;
                j += 1;
            }
            knots.push((v, x_sum / (j - i) as f64));
            i = j;
        }
        let slope = if self.fitted_slope > 0.0 {
            self.fitted_slope
        } else {
            1.0
        };
        let (y0, x0) = knots[0];
        let (y1, x1) = *knots.last().unwrap();
        if y <= y0 {
            return x0 + (y - y0) / slope;
        }
        if y >= y1 {
            return x1 + (y - y1) / slope;
        }
        // binary search for the bracketing knot pair
        let mut lo = 0;
        let mut hi = knots.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if knots[mid].0 <= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (ya, xa) = knots[lo];
        let (yb, xb) = knots[hi];
        xa + (y - ya) * (xb - xa) / (yb - ya)
    }

    /// Isotonic values in grid order.
    pub fn monotone_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.psi_isotonic).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::sim::NoiseFamily;
    use crate::stats::{ks_critical_value, ks_statistic, mean_and_var};
    use approx::assert_relative_eq;

    fn exp_noise() -> NoiseConfig {
        NoiseConfig::exponential(10_000.0)
    }

    fn table_from(grid: &[f64], psi: &[f64]) -> PsiTable {
        let mono = isotonic_non_decreasing(psi);
        let points = grid
            .iter()
            .zip(psi.iter())
            .zip(mono.iter())
            .map(|((&g, &p), &m)| PsiPoint {
                sigma_sq: g,
                psi_hat: p,
                stderr: 0.0,
                psi_isotonic: m,
            })
            .collect();
        let mut t = PsiTable {
            points,
            fitted_slope: 1.0,
            meta: PsiMeta {
                n: 23_400,
                nh: 15,
                noise: exp_noise(),
                iterations_per_point: 0,
                seed: 0,
            },
        };
        t.fitted_slope = fit_slope(&t);
        t
    }

    #[test]
    fn sigma_zero_collapses_to_exponential_minimum() {
        // with sigma = 0 both variants are the min of nh iid Exp(eta),
        // i.e. Exp(nh * eta) with mean 1/(nh * eta)
        let (n, nh) = (23_400, 15);
        let sampler = exp_noise().sampler().unwrap();
        let mut rng = stream_rng(11, 0);
        let draws = 100_000;
        for variant in [MinVariant::M0, MinVariant::M1] {
            let mean: f64 = (0..draws)
                .map(|_| dp_draw(0.0, nh, &sampler, variant, &mut rng))
                .sum::<f64>()
                / draws as f64;
            assert_relative_eq!(mean, 1.0 / (nh as f64 * 10_000.0), max_relative = 0.02);
        }
        // oracle agrees
        let mean: f64 = (0..draws)
            .map(|_| bruteforce_draw(0.0, nh, &sampler, MinVariant::M1, &mut rng))
            .sum::<f64>()
            / draws as f64;
        assert_relative_eq!(mean, 1.0 / (nh as f64 * 10_000.0), max_relative = 0.02);
        let _ = n;
    }

    #[test]
    fn nh_one_base_cases() {
        let sampler = exp_noise().sampler().unwrap();
        let mut rng = stream_rng(5, 1);
        // M0 at nh = 1 is a bare noise draw
        let draws = 50_000;
        let mean: f64 = (0..draws)
            .map(|_| dp_draw(1.0, 1, &sampler, MinVariant::M0, &mut rng))
            .sum::<f64>()
            / draws as f64;
        assert_relative_eq!(mean, 1e-4, max_relative = 0.03);

        // M1 at nh = 1 is one noise-plus-Gaussian draw: mean 1/eta, and
        // with the noise switched off it is exactly scale * Z.
        let none = NoiseConfig::none().sampler().unwrap();
        let samples: Vec<f64> = (0..draws)
            .map(|_| dp_draw(0.5, 1, &none, MinVariant::M1, &mut rng))
            .collect();
        let (m, v) = mean_and_var(&samples);
        assert!(m.abs() < 0.01);
        assert_relative_eq!(v.sqrt(), 0.5, max_relative = 0.02);
    }

    #[test]
    fn noise_free_draws_scale_linearly_in_sigma() {
        let none = NoiseConfig::none().sampler().unwrap();
        for variant in [MinVariant::M0, MinVariant::M1] {
            let mut r1 = stream_rng(99, 7);
            let mut r2 = stream_rng(99, 7);
            for _ in 0..100 {
                let a = dp_draw(0.3, 20, &none, variant, &mut r1);
                let b = dp_draw(0.6, 20, &none, variant, &mut r2);
                assert_relative_eq!(2.0 * a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn seeded_single_draws_deterministic() {
        let a = sample_min_dp(0.01, 100, 5, &exp_noise(), MinVariant::M1, 42).unwrap();
        let b = sample_min_dp(0.01, 100, 5, &exp_noise(), MinVariant::M1, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_min_bruteforce(0.01, 100, 5, &exp_noise(), MinVariant::M1, 42).unwrap();
        let d = sample_min_bruteforce(0.01, 100, 5, &exp_noise(), MinVariant::M1, 42).unwrap();
        assert_eq!(c, d);
        assert_ne!(a, c);
    }

    #[test]
    fn dp_matches_oracle_in_distribution_small_config() {
        let (n, nh) = (2_000, 7);
        let sigma = 1e-4f64.sqrt();
        let scale = sigma / (n as f64).sqrt();
        let sampler = exp_noise().sampler().unwrap();
        let draws = 20_000;
        for (tag, variant) in [(0u64, MinVariant::M0), (1u64, MinVariant::M1)] {
            let mut ra = stream_rng(1234, 10 + tag);
            let mut rb = stream_rng(4321, 20 + tag);
            let a: Vec<f64> = (0..draws).map(|_| dp_draw(scale, nh, &sampler, variant, &mut ra)).collect();
            let b: Vec<f64> = (0..draws)
                .map(|_| bruteforce_draw(scale, nh, &sampler, variant, &mut rb))
                .collect();
            let d = ks_statistic(&a, &b);
            let crit = ks_critical_value(0.01, draws, draws);
            assert!(d < crit, "variant {variant:?}: KS {d:.5} >= {crit:.5}");
        }
    }

    #[test]
    fn near_noiseless_walk_minimum_mean() {
        // eta -> infinity (1e12): the noise vanishes and the minimum of the
        // walk over nh of n steps has mean close to the Brownian value
        // -sigma * sqrt(nh/n) * sqrt(2/pi) for large nh.
        let noise = NoiseConfig::exponential(1e12);
        let sampler = noise.sampler().unwrap();
        let (n, nh) = (10_000, 10_000);
        let sigma = 0.02f64;
        let scale = sigma / (n as f64).sqrt();
        let mut rng = stream_rng(3, 3);
        let draws = 20_000;
        let mean: f64 = (0..draws)
            .map(|_| bruteforce_draw(scale, nh, &sampler, MinVariant::M1, &mut rng))
            .sum::<f64>()
            / draws as f64;
        let target = -sigma * (2.0 / std::f64::consts::PI).sqrt();
        assert_relative_eq!(mean, target, max_relative = 0.03);
    }

    fn cfg(n: usize, nh: usize, iters: usize, seed: u64) -> PsiConfig {
        PsiConfig {
            n,
            nh,
            noise: exp_noise(),
            grid: vec![1e-4],
            iterations_per_point: iters,
            seed,
        }
    }

    #[test]
    fn psi_at_zero_matches_exponential_algebra() {
        // independent Exp(nh eta) minima: E[(M0 - M1)^2] = 2 / (nh eta)^2,
        // so Psi_n(0) = pi/(pi-2) * h^{-1} * (nh eta)^{-2}
        let c = cfg(23_400, 15, 200_000, 99);
        let (psi, se) = estimate_psi_point(0.0, &c).unwrap();
        let lambda = 15.0 * 10_000.0;
        let expected = 2.0 * VOL_PREFACTOR * (23_400.0 / 15.0) / (lambda * lambda);
        assert!(
            (psi - expected).abs() < 3.0 * se,
            "psi(0) = {psi:.4e}, expected {expected:.4e}, se {se:.1e}"
        );
    }

    #[test]
    fn psi_point_reproducible_and_positive_biased_at_benchmark() {
        let c = cfg(23_400, 15, 50_000, 7);
        let (a, se) = estimate_psi_point(1e-4, &c).unwrap();
        let (b, _) = estimate_psi_point(1e-4, &c).unwrap();
        assert_eq!(a, b);
        // ratio to sigma^2 is near 1.047 at this configuration
        assert_relative_eq!(a / 1e-4, 1.0468, max_relative = 0.03);
        assert!(se > 0.0 && se < 0.05e-4);
    }

    #[test]
    fn stderr_scales_with_iterations() {
        let (_, se1) = estimate_psi_point(1e-4, &cfg(23_400, 15, 20_000, 5)).unwrap();
        let (_, se2) = estimate_psi_point(1e-4, &cfg(23_400, 15, 80_000, 5)).unwrap();
        let ratio = se1 / se2; // expect about 2
        assert!((1.6..=2.4).contains(&ratio), "se ratio {ratio}");
    }

    #[test]
    fn table_is_monotone_and_slope_fits() {
        let c = PsiConfig {
            n: 23_400,
            nh: 15,
            noise: exp_noise(),
            grid: (1..=24).map(|i| 2.0e-5 * i as f64).collect(),
            iterations_per_point: 4_000,
            seed: 31,
        };
        let t = build_psi_table(&c).unwrap();
        let mono = t.monotone_values();
        assert!(mono.windows(2).all(|w| w[0] <= w[1]));
        assert!(t.fitted_slope > 1.0 && t.fitted_slope < 1.1);
    }

    #[test]
    fn degenerate_grid_slope() {
        let t = table_from(&[2e-4], &[2.5e-4]);
        assert_relative_eq!(t.fitted_slope, 1.25);
    }

    #[test]
    fn identity_and_linear_tables_invert_exactly() {
        let grid: Vec<f64> = (1..=10).map(|i| i as f64 * 1e-5).collect();
        let ident = table_from(&grid, &grid);
        for &y in &[1.5e-5, 4e-5, 9.9e-5] {
            assert_relative_eq!(ident.invert(y), y, max_relative = 1e-12);
        }
        // outside the range: linear extrapolation with the fitted slope (1)
        assert_relative_eq!(ident.invert(2e-4), 2e-4, max_relative = 1e-12);
        assert_relative_eq!(ident.invert(1e-6), 1e-6, max_relative = 1e-9);

        let scaled: Vec<f64> = grid.iter().map(|&g| 1.046 * g).collect();
        let lin = table_from(&grid, &scaled);
        assert_relative_eq!(lin.fitted_slope, 1.046, max_relative = 1e-12);
        for &y in &[2e-5, 7.3e-5, 3e-4] {
            assert_relative_eq!(lin.invert(y), y / 1.046, max_relative = 1e-10);
        }
    }

    #[test]
    fn inverse_handles_flat_runs_monotonically() {
        let grid = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let noisy = vec![1.0, 3.0, 2.0, 4.0, 5.0]; // one violation
        let t = table_from(&grid, &noisy);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..200 {
            let y = 0.5 + i as f64 * 0.03;
            let x = t.invert(y);
            assert!(x >= prev, "inverse must be non-decreasing");
            prev = x;
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = cfg(100, 5, 10, 1);
        c.grid = vec![2e-4, 1e-4];
        assert!(c.validate().is_err());
        let mut c = cfg(100, 5, 10, 1);
        c.grid = vec![0.0, 1e-4];
        assert!(c.validate().is_err());
        let c = cfg(10, 50, 10, 1);
        assert!(c.validate().is_err());
        assert!(estimate_psi_point(-1.0, &cfg(100, 5, 10, 1)).is_err());
    }
}

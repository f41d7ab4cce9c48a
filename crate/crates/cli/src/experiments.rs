//! Experiment runners: bias-slope calibration sweeps, fixed-path summary
//! grids, intraday curve demos with bands, and interval-coverage studies.
//!
//! All runners derive per-iteration seeds from the master seed and reduce
//! results in iteration order, so output files are byte-identical for a
//! given spec regardless of the worker-thread count.

use crate::specfile::{CorrectionSpec, ExperimentSpec, Scenario};
use crate::CliError;
use rayon::prelude::*;
use spotmin::blocks::{local_minima, partition_with, BlockMembership, BlockPartition};
use spotmin::csvio;
use spotmin::estimators::{
    confidence_interval, effective_window, spot_quarticity, spot_vol, volatility_curve,
    BiasCorrection, EstimatorConfig, CLT_VARIANCE_NORMALIZED,
};
use spotmin::psi::{build_psi_table, PsiConfig, PsiTable};
use spotmin::rng::splitmix64;
use spotmin::sim::{
    add_jumps, simulate_price_on_vol, simulate_vol_path, synthesize_observations,
    ObservationSeries, VolPath,
};
use spotmin::stats::{normal_quantile, CompensatedSum};
use std::io::{BufRead, Write};
use std::path::Path;

const SALT_FIXED_VOL: u64 = 0x4649_5845_4456_4f4c;
const SALT_DAY_PRICE: u64 = 0x4441_5950_5249_4345;
const SALT_DAY_JUMP: u64 = 0x4441_594a_554d_5053;
const SALT_DAY_NOISE: u64 = 0x4441_594e_4f49_5345;
const SALT_TABLE1: u64 = 0x5441_424c_4531_0000;
const SALT_PSI_CAL: u64 = 0x5053_4943_414c_0000;

const ITER_BATCH: usize = 64;

/// Estimation experiments use half-open blocks so that minima differences
/// follow the bias map exactly on aligned grids.
pub const EXPERIMENT_MEMBERSHIP: BlockMembership = BlockMembership::RightClosed;

fn chain_seed(master: u64, salt: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ salt).wrapping_add(index))
}

/// Emit the small-block warning: the Gaussian regime needs
/// h * n^(2/3) * sigma * eta to be large; below 1 the bias correction is
/// essential rather than optional.
pub fn warn_rate_condition(n: usize, nh: usize) {
    let diagnostic = diagnostic_h_n23(n, nh);
    if diagnostic < 1.0 {
        eprintln!(
            "warning: h * n^(2/3) = {diagnostic:.3} < 1 for nh = {nh}; the asymptotic \
             regime needs h * n^(2/3) * sigma * eta to be large, so bias correction \
             is essential at this block length"
        );
    }
}

/// Diagnostic column h * n^(2/3) = nh * n^(-1/3).
pub fn diagnostic_h_n23(n: usize, nh: usize) -> f64 {
    nh as f64 * (n as f64).powf(-1.0 / 3.0)
}

/// A study that fixes one volatility path and regenerates the price and
/// the noise in every iteration, preserving the leverage correlation
/// through the stored volatility driver increments.
pub struct FixedPathStudy {
    pub spec: ExperimentSpec,
    pub vol: VolPath,
    /// Effective squared spot volatility on the observation grid (n + 1).
    pub truth: Vec<f64>,
}

impl FixedPathStudy {
    pub fn new(spec: &ExperimentSpec) -> Result<Self, CliError> {
        let vol = simulate_vol_path(&spec.model, spec.n, chain_seed(spec.seed, SALT_FIXED_VOL, 0))?;
        let truth: Vec<f64> = (0..=spec.n)
            .map(|i| {
                let t = i as f64 / spec.n as f64;
                let nu = spec.model.seasonal(t);
                nu * nu * vol.sq_vol[i]
            })
            .collect();
        Ok(Self {
            spec: spec.clone(),
            vol,
            truth,
        })
    }

    /// Observations of iteration `iter` (fresh price, jumps and noise).
    pub fn day(&self, iter: u64) -> Result<ObservationSeries, CliError> {
        let spec = &self.spec;
        let mut path = simulate_price_on_vol(
            &self.vol,
            &spec.model,
            chain_seed(spec.seed, SALT_DAY_PRICE, iter),
        )?;
        if let Some(jumps) = &spec.jumps {
            path = add_jumps(&path, jumps, chain_seed(spec.seed, SALT_DAY_JUMP, iter))?;
        }
        Ok(synthesize_observations(
            &path,
            &spec.noise,
            chain_seed(spec.seed, SALT_DAY_NOISE, iter),
        )?)
    }

    /// True spot variance at the centre of block k (of inv_h = n / nh).
    pub fn truth_at_block(&self, nh: usize, k: usize) -> f64 {
        self.truth[(k * nh + nh / 2).min(self.spec.n)]
    }

    pub fn truth_near(&self, tau: f64) -> f64 {
        let i = (tau * self.spec.n as f64).round() as usize;
        self.truth[i.min(self.spec.n)]
    }
}

// ---------------------------------------------------------------------------
// table1: bias slopes over block lengths
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub nh: usize,
    pub inv_h: usize,
    pub diagnostic: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table1Report {
    pub rows: Vec<Table1Row>,
}

impl Table1Report {
    pub fn slope_for(&self, nh: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.nh == nh).map(|r| r.slope)
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<(), CliError> {
        writeln!(w, "nh,inv_h,h_times_n_two_thirds,slope")
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.nh, r.inv_h, r.diagnostic, r.slope)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: &mut R) -> Result<Self, CliError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| CliError::Runtime("empty table1 artifact".into()))?
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        if header.trim() != "nh,inv_h,h_times_n_two_thirds,slope" {
            return Err(CliError::Runtime(format!(
                "unexpected table1 header '{header}'"
            )));
        }
        let mut rows = Vec::new();
        for line in lines {
            let line = line.map_err(|e| CliError::Runtime(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(CliError::Runtime(format!("bad table1 row '{line}'")));
            }
            rows.push(Table1Row {
                nh: f[0].trim().parse().map_err(|e| CliError::Runtime(format!("{e}")))?,
                inv_h: f[1].trim().parse().map_err(|e| CliError::Runtime(format!("{e}")))?,
                diagnostic: f[2].trim().parse().map_err(|e| CliError::Runtime(format!("{e}")))?,
                slope: f[3].trim().parse().map_err(|e| CliError::Runtime(format!("{e}")))?,
            });
        }
        Ok(Self { rows })
    }
}

/// Build a bias table per block length and record the fitted slopes.
pub fn run_table1(spec: &ExperimentSpec) -> Result<Table1Report, CliError> {
    spec.expect_scenario(Scenario::Table1, "table1")?;
    let grid = spec.psi.grid();
    let mut rows = Vec::new();
    for &nh in &spec.psi.nh_list {
        if nh == 0 || spec.n % nh != 0 || spec.n / nh < 2 {
            return Err(CliError::Validation(format!(
                "nh = {nh} must divide n = {} into at least 2 blocks",
                spec.n
            )));
        }
        warn_rate_condition(spec.n, nh);
        let cfg = PsiConfig {
            n: spec.n,
            nh,
            noise: spec.noise,
            grid: grid.clone(),
            iterations_per_point: spec.psi.iterations,
            seed: chain_seed(spec.seed, SALT_TABLE1, nh as u64),
        };
        let table = build_psi_table(&cfg)?;
        rows.push(Table1Row {
            nh,
            inv_h: spec.n / nh,
            diagnostic: diagnostic_h_n23(spec.n, nh),
            slope: table.fitted_slope,
        });
    }
    Ok(Table1Report { rows })
}

// ---------------------------------------------------------------------------
// table2: fixed-path summary statistics over (nh, K) cells
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Cell {
    pub nh: usize,
    pub k_n: usize,
    /// Mean (over blocks) standard deviation of the raw estimator.
    pub msd: f64,
    /// Mean absolute bias of the raw estimator.
    pub mab: f64,
    /// Mean absolute bias after slope correction.
    pub mabc: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table2Report {
    pub cells: Vec<Table2Cell>,
    pub iterations: usize,
}

impl Table2Report {
    pub fn cell(&self, nh: usize, k_n: usize) -> Option<&Table2Cell> {
        self.cells.iter().find(|c| c.nh == nh && c.k_n == k_n)
    }

    /// Values scaled by 1e6 in the report file.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<(), CliError> {
        writeln!(w, "nh,k_n,msd_x1e6,mab_x1e6,mabc_x1e6")
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{},{},{},{}",
                c.nh,
                c.k_n,
                c.msd * 1e6,
                c.mab * 1e6,
                c.mabc * 1e6
            )
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        }
        Ok(())
    }
}

struct CellAccum {
    sums: Vec<CompensatedSum>,
    sq_sums: Vec<CompensatedSum>,
}

/// Monte-Carlo summary of the centered estimator on every block, for each
/// (nh, K) cell, holding one volatility path fixed across iterations.
///
/// Requires the slopes from a previous `table1` run for the corrected-bias
/// column.
pub fn run_table2(
    spec: &ExperimentSpec,
    slopes: &Table1Report,
) -> Result<Table2Report, CliError> {
    spec.expect_scenario(Scenario::Table2Grid, "table2")?;
    let nh_list = &spec.estimator.nh_list;
    let k_list = &spec.estimator.k_list;
    for &nh in nh_list {
        if slopes.slope_for(nh).is_none() {
            return Err(CliError::Runtime(format!(
                "no fitted slope for nh = {nh} in the table1 artifact; run the table1 \
                 command first (its output feeds the bias correction here)"
            )));
        }
        if nh == 0 || spec.n % nh != 0 || spec.n / nh < 2 {
            return Err(CliError::Validation(format!(
                "nh = {nh} must divide n = {} into at least 2 blocks",
                spec.n
            )));
        }
    }
    let study = FixedPathStudy::new(spec)?;
    let partitions: Vec<BlockPartition> = nh_list
        .iter()
        .map(|&nh| partition_with(spec.n, spec.n / nh, EXPERIMENT_MEMBERSHIP))
        .collect::<Result<_, _>>()?;

    let mut accums: Vec<CellAccum> = Vec::with_capacity(nh_list.len() * k_list.len());
    for &nh in nh_list {
        let inv_h = spec.n / nh;
        for _ in k_list {
            accums.push(CellAccum {
                sums: vec![CompensatedSum::new(); inv_h],
                sq_sums: vec![CompensatedSum::new(); inv_h],
            });
        }
    }

    let trunc = spec.estimator.truncation_kappa;
    let q = spec.estimator.q;
    let mut done = 0usize;
    while done < spec.iterations {
        let batch = ITER_BATCH.min(spec.iterations - done);
        let results: Vec<Vec<Vec<f64>>> = (0..batch)
            .into_par_iter()
            .map(|b| {
                let obs = study.day((done + b) as u64).expect("simulation");
                let mut per_cell = Vec::with_capacity(nh_list.len() * k_list.len());
                for (i, _) in nh_list.iter().enumerate() {
                    let lm = local_minima(&obs, &partitions[i]).expect("minima");
                    for &k_n in k_list {
                        let mut cfg =
                            EstimatorConfig::new(k_n, spotmin::WindowMode::Centered);
                        cfg.truncation_kappa = trunc;
                        let curve = volatility_curve(&lm, &cfg, &BiasCorrection::None, q)
                            .expect("curve");
                        per_cell.push(curve.estimates.iter().map(|e| e.raw_value).collect());
                    }
                }
                per_cell
            })
            .collect();
        for per_cell in results {
            for (cell, values) in accums.iter_mut().zip(per_cell) {
                for (k, v) in values.into_iter().enumerate() {
                    cell.sums[k].add(v);
                    cell.sq_sums[k].add(v * v);
                }
            }
        }
        done += batch;
    }

    let nf = spec.iterations as f64;
    let mut cells = Vec::new();
    for (i, &nh) in nh_list.iter().enumerate() {
        let slope = slopes.slope_for(nh).unwrap();
        let inv_h = spec.n / nh;
        for (j, &k_n) in k_list.iter().enumerate() {
            let acc = &accums[i * k_list.len() + j];
            let mut msd = CompensatedSum::new();
            let mut mab = CompensatedSum::new();
            let mut mabc = CompensatedSum::new();
            for k in 0..inv_h {
                let mean = acc.sums[k].value() / nf;
                let var = (acc.sq_sums[k].value() / nf - mean * mean).max(0.0);
                let truth = study.truth_at_block(nh, k);
                msd.add(var.sqrt());
                mab.add((mean - truth).abs());
                mabc.add((mean / slope - truth).abs());
            }
            cells.push(Table2Cell {
                nh,
                k_n,
                msd: msd.value() / inv_h as f64,
                mab: mab.value() / inv_h as f64,
                mabc: mabc.value() / inv_h as f64,
            });
        }
    }
    Ok(Table2Report {
        cells,
        iterations: spec.iterations,
    })
}

// ---------------------------------------------------------------------------
// curve demo: intraday curve with CLT and empirical bands
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CurveDemo {
    /// Per block: (t_center, mean raw, mean corrected, mean quarticity,
    /// mean ci_lower, mean ci_upper, truth).
    pub curve: Vec<(f64, f64, f64, f64, f64, f64, f64)>,
    /// Per block: CLT band (interior blocks only) and empirical band.
    pub bands: Option<Vec<(f64, Option<(f64, f64)>, (f64, f64))>>,
    pub k_n: usize,
    pub nh: usize,
}

fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Monte-Carlo intraday curve on a fixed volatility path, with pointwise
/// CLT bands around the truth and empirical quantile bands across
/// iterations. With a single iteration only the point curve is produced.
pub fn run_curve_demo(
    spec: &ExperimentSpec,
    psi_table: Option<&PsiTable>,
) -> Result<CurveDemo, CliError> {
    spec.expect_scenario(Scenario::CurveDemo, "curve")?;
    let nh = spec.estimator.nh_list[0];
    let k_n = spec.estimator.k_list[0];
    if nh == 0 || spec.n % nh != 0 || spec.n / nh < 2 {
        return Err(CliError::Validation(format!(
            "nh = {nh} must divide n = {} into at least 2 blocks",
            spec.n
        )));
    }
    warn_rate_condition(spec.n, nh);
    let correction = match (&spec.estimator.correction, psi_table) {
        (CorrectionSpec::None, _) => BiasCorrection::None,
        (CorrectionSpec::Slope(s), _) => BiasCorrection::SlopeDivide(*s),
        (CorrectionSpec::PsiTable(_), Some(t)) => BiasCorrection::PsiInverse(t),
        (CorrectionSpec::PsiTable(p), None) => {
            return Err(CliError::Runtime(format!(
                "psi correction requested but table {} not loaded",
                p.display()
            )))
        }
    };
    let study = FixedPathStudy::new(spec)?;
    let inv_h = spec.n / nh;
    let part = partition_with(spec.n, inv_h, EXPERIMENT_MEMBERSHIP)?;
    let mut cfg = EstimatorConfig::new(k_n, spotmin::WindowMode::Centered);
    cfg.truncation_kappa = spec.estimator.truncation_kappa;
    let q = spec.estimator.q;

    let iters = spec.iterations;
    let mut raw_sum = vec![CompensatedSum::new(); inv_h];
    let mut corr_sum = vec![CompensatedSum::new(); inv_h];
    let mut quart_sum = vec![CompensatedSum::new(); inv_h];
    let mut lo_sum = vec![CompensatedSum::new(); inv_h];
    let mut hi_sum = vec![CompensatedSum::new(); inv_h];
    let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(iters); inv_h];

    let mut done = 0usize;
    while done < iters {
        let batch = ITER_BATCH.min(iters - done);
        let results: Vec<Vec<(f64, f64, f64, f64, f64)>> = (0..batch)
            .into_par_iter()
            .map(|b| {
                let obs = study.day((done + b) as u64).expect("simulation");
                let lm = local_minima(&obs, &part).expect("minima");
                let curve = volatility_curve(&lm, &cfg, &correction, q).expect("curve");
                curve
                    .estimates
                    .iter()
                    .map(|e| {
                        (
                            e.raw_value,
                            e.corrected_value.unwrap_or(e.raw_value),
                            e.quarticity,
                            e.ci_lower.unwrap_or(f64::NAN),
                            e.ci_upper.unwrap_or(f64::NAN),
                        )
                    })
                    .collect()
            })
            .collect();
        for row in results {
            for (k, (raw, corr, quart, lo, hi)) in row.into_iter().enumerate() {
                raw_sum[k].add(raw);
                corr_sum[k].add(corr);
                quart_sum[k].add(quart);
                lo_sum[k].add(lo);
                hi_sum[k].add(hi);
                samples[k].push(corr);
            }
        }
        done += batch;
    }

    let nf = iters as f64;
    let mut curve = Vec::with_capacity(inv_h);
    for k in 0..inv_h {
        let t_center = (k as f64 + 0.5) / inv_h as f64;
        curve.push((
            t_center,
            raw_sum[k].value() / nf,
            corr_sum[k].value() / nf,
            quart_sum[k].value() / nf,
            lo_sum[k].value() / nf,
            hi_sum[k].value() / nf,
            study.truth_at_block(nh, k),
        ));
    }

    let bands = if iters >= 2 {
        let z = normal_quantile(1.0 - q);
        let margin = k_n.div_ceil(2);
        let mut rows = Vec::with_capacity(inv_h);
        for k in 0..inv_h {
            let truth = study.truth_at_block(nh, k);
            let interior = k >= margin && k + margin <= inv_h - 1;
            let clt = interior.then(|| {
                let half = z * (CLT_VARIANCE_NORMALIZED / k_n as f64).sqrt() * truth;
                (truth - half, truth + half)
            });
            samples[k].sort_by(|a, b| a.partial_cmp(b).unwrap());
            let emp = (
                empirical_quantile(&samples[k], q),
                empirical_quantile(&samples[k], 1.0 - q),
            );
            rows.push(((k as f64 + 0.5) / inv_h as f64, clt, emp));
        }
        Some(rows)
    } else {
        None
    };

    Ok(CurveDemo {
        curve,
        bands,
        k_n,
        nh,
    })
}

pub fn write_curve_demo<W: Write>(w: &mut W, demo: &CurveDemo) -> Result<(), CliError> {
    writeln!(
        w,
        "k,t_center,raw,corrected,quarticity,ci_lower,ci_upper,true_spot_var"
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    for (k, row) in demo.curve.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            k, row.0, row.1, row.2, row.3, row.4, row.5, row.6
        )
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}

pub fn write_bands<W: Write>(w: &mut W, demo: &CurveDemo) -> Result<(), CliError> {
    let Some(bands) = &demo.bands else {
        return Err(CliError::Runtime("no bands for a single iteration".into()));
    };
    writeln!(w, "k,t_center,clt_lower,clt_upper,emp_lower,emp_upper")
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for (k, (t, clt, emp)) in bands.iter().enumerate() {
        let (cl, cu) = clt
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .unwrap_or_default();
        writeln!(w, "{},{},{},{},{},{}", k, t, cl, cu, emp.0, emp.1)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// coverage study
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub q: f64,
    pub nominal: f64,
    pub empirical: f64,
    pub iterations: usize,
}

/// Empirical coverage of the (1 - 2q) intervals at a fixed time, holding
/// the volatility path fixed and regenerating price and noise per
/// iteration. The correction from the spec maps the interval ends.
pub fn run_coverage(
    spec: &ExperimentSpec,
    psi_table: Option<&PsiTable>,
) -> Result<Vec<CoverageRow>, CliError> {
    spec.expect_scenario(Scenario::Coverage, "coverage")?;
    let nh = spec.estimator.nh_list[0];
    let k_n = spec.estimator.k_list[0];
    if nh == 0 || spec.n % nh != 0 || spec.n / nh < 2 {
        return Err(CliError::Validation(format!(
            "nh = {nh} must divide n = {} into at least 2 blocks",
            spec.n
        )));
    }
    let correction = match (&spec.estimator.correction, psi_table) {
        (CorrectionSpec::None, _) => BiasCorrection::None,
        (CorrectionSpec::Slope(s), _) => BiasCorrection::SlopeDivide(*s),
        (CorrectionSpec::PsiTable(_), Some(t)) => BiasCorrection::PsiInverse(t),
        (CorrectionSpec::PsiTable(p), None) => {
            return Err(CliError::Runtime(format!(
                "psi correction requested but table {} not loaded",
                p.display()
            )))
        }
    };
    let study = FixedPathStudy::new(spec)?;
    let part = partition_with(spec.n, spec.n / nh, EXPERIMENT_MEMBERSHIP)?;
    let mut cfg = EstimatorConfig::new(k_n, spec.estimator.window);
    cfg.truncation_kappa = spec.estimator.truncation_kappa;
    let tau = spec.coverage.tau;
    let truth = study.truth_near(tau);
    let iters = spec.coverage.iterations;

    let mut hits = vec![0usize; spec.coverage.q_list.len()];
    let mut done = 0usize;
    while done < iters {
        let batch = ITER_BATCH.min(iters - done);
        let results: Vec<Vec<bool>> = (0..batch)
            .into_par_iter()
            .map(|b| {
                let obs = study.day((done + b) as u64).expect("simulation");
                let lm = local_minima(&obs, &part).expect("minima");
                let raw = spot_vol(&lm, tau, &cfg).expect("estimate");
                let quart = spot_quarticity(&lm, tau, &cfg).expect("quarticity");
                let k_eff = effective_window(&lm, tau, &cfg).expect("window");
                spec.coverage
                    .q_list
                    .iter()
                    .map(|&q| {
                        if quart <= 0.0 {
                            return false;
                        }
                        let (lo, hi) =
                            confidence_interval(raw, quart, k_eff, q, |y| correction.apply(y))
                                .expect("interval");
                        lo <= truth && truth <= hi
                    })
                    .collect()
            })
            .collect();
        for row in results {
            for (i, hit) in row.into_iter().enumerate() {
                hits[i] += hit as usize;
            }
        }
        done += batch;
    }
    Ok(spec
        .coverage
        .q_list
        .iter()
        .zip(hits)
        .map(|(&q, h)| CoverageRow {
            q,
            nominal: 1.0 - 2.0 * q,
            empirical: h as f64 / iters as f64,
            iterations: iters,
        })
        .collect())
}

pub fn write_coverage<W: Write>(w: &mut W, rows: &[CoverageRow]) -> Result<(), CliError> {
    writeln!(w, "q,nominal,empirical,iterations").map_err(|e| CliError::Runtime(e.to_string()))?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.q, r.nominal, r.empirical, r.iterations)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// bias-map calibration (single block length)
// ---------------------------------------------------------------------------

/// Build one bias table for the first configured block length.
pub fn run_calibrate_psi(spec: &ExperimentSpec) -> Result<PsiTable, CliError> {
    let nh = spec.psi.nh_list[0];
    warn_rate_condition(spec.n, nh);
    let cfg = PsiConfig {
        n: spec.n,
        nh,
        noise: spec.noise,
        grid: spec.psi.grid(),
        iterations_per_point: spec.psi.iterations,
        seed: chain_seed(spec.seed, SALT_PSI_CAL, nh as u64),
    };
    Ok(build_psi_table(&cfg)?)
}

/// Load a psi table next to its sidecar (`<stem>.meta.csv`).
pub fn load_psi_table(path: &Path) -> Result<PsiTable, CliError> {
    let meta_path = sidecar_path(path);
    let table = std::fs::File::open(path)
        .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", path.display())))?;
    let meta = std::fs::File::open(&meta_path)
        .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", meta_path.display())))?;
    Ok(csvio::read_psi_table(
        &mut std::io::BufReader::new(table),
        &mut std::io::BufReader::new(meta),
    )?)
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "psi_table".into());
    path.with_file_name(format!("{stem}.meta.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfile::ExperimentSpec;

    fn small_spec() -> ExperimentSpec {
        let mut spec = ExperimentSpec::from_toml(
            "seed = 4\n[sim]\nn = 600\niterations = 8\n[estimator]\nnh = [10]\nk_n = [12]\n[psi]\nnh = [10]\niterations = 200\ngrid_points = 4",
        )
        .unwrap();
        spec.coverage.iterations = 8;
        spec
    }

    #[test]
    fn fixed_path_study_is_deterministic_per_iteration() {
        let spec = small_spec();
        let s1 = FixedPathStudy::new(&spec).unwrap();
        let s2 = FixedPathStudy::new(&spec).unwrap();
        assert_eq!(s1.day(3).unwrap(), s2.day(3).unwrap());
        assert_ne!(s1.day(3).unwrap().y, s1.day(4).unwrap().y);
        assert_eq!(s1.truth.len(), spec.n + 1);
    }

    #[test]
    fn table1_produces_a_row_per_block_length() {
        let spec = small_spec();
        let report = run_table1(&spec).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert_eq!(row.nh, 10);
        assert_eq!(row.inv_h, 60);
        assert!((row.diagnostic - diagnostic_h_n23(600, 10)).abs() < 1e-12);
        assert!(row.slope > 0.5 && row.slope < 2.0);
        // csv round trip
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let back = Table1Report::read_csv(&mut &buf[..]).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn table1_rejects_non_dividing_nh() {
        let mut spec = small_spec();
        spec.psi.nh_list = vec![7];
        assert!(matches!(run_table1(&spec), Err(CliError::Validation(_))));
        spec.psi.nh_list = vec![600];
        assert!(matches!(run_table1(&spec), Err(CliError::Validation(_))));
    }

    #[test]
    fn table2_requires_slope_artifact() {
        let spec = small_spec();
        let empty = Table1Report::default();
        let err = run_table2(&spec, &empty).unwrap_err();
        match err {
            CliError::Runtime(msg) => assert!(msg.contains("table1"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn table2_smoke_and_determinism() {
        let spec = small_spec();
        let slopes = Table1Report {
            rows: vec![Table1Row {
                nh: 10,
                inv_h: 60,
                diagnostic: diagnostic_h_n23(600, 10),
                slope: 1.05,
            }],
        };
        let a = run_table2(&spec, &slopes).unwrap();
        let b = run_table2(&spec, &slopes).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells.len(), 1);
        let c = a.cell(10, 12).unwrap();
        assert!(c.msd > 0.0 && c.mab >= 0.0 && c.mabc >= 0.0);
    }

    #[test]
    fn curve_demo_bands_only_with_iterations() {
        let mut spec = small_spec();
        spec.iterations = 1;
        let demo = run_curve_demo(&spec, None).unwrap();
        assert!(demo.bands.is_none());
        assert_eq!(demo.curve.len(), 60);

        spec.iterations = 5;
        let demo = run_curve_demo(&spec, None).unwrap();
        let bands = demo.bands.as_ref().unwrap();
        assert_eq!(bands.len(), 60);
        // interior blocks have CLT bands, boundary blocks do not
        assert!(bands[0].1.is_none());
        assert!(bands[30].1.is_some());
        let (lo, hi) = bands[30].2;
        assert!(lo <= hi);
    }

    #[test]
    fn coverage_q_half_never_covers() {
        let mut spec = small_spec();
        spec.coverage.q_list = vec![0.5];
        let rows = run_coverage(&spec, None).unwrap();
        assert_eq!(rows[0].nominal, 0.0);
        assert_eq!(rows[0].empirical, 0.0);
    }
}

//! CSV readers and writers for the core data types. All files carry a
//! header row; floats use the shortest round-trip decimal representation,
//! so identical inputs produce byte-identical files.

use crate::blocks::LocalMinima;
use crate::error::{Error, Result};
use crate::estimators::VolatilityCurve;
use crate::psi::{PsiMeta, PsiPoint, PsiTable};
use crate::sim::{NoiseConfig, NoiseFamily, ObservationSeries, PathBundle};
use std::io::{BufRead, Write};

pub fn family_name(family: NoiseFamily) -> &'static str {
    match family {
        NoiseFamily::Exponential => "exponential",
        NoiseFamily::Uniform => "uniform",
        NoiseFamily::Pareto => "pareto",
        NoiseFamily::None => "none",
    }
}

pub fn parse_family(s: &str) -> Result<NoiseFamily> {
    match s.trim().to_ascii_lowercase().as_str() {
        "exponential" => Ok(NoiseFamily::Exponential),
        "uniform" => Ok(NoiseFamily::Uniform),
        "pareto" => Ok(NoiseFamily::Pareto),
        "none" => Ok(NoiseFamily::None),
        other => Err(Error::Parse(format!("unknown noise family '{other}'"))),
    }
}

/// Write a simulated path and its observations: columns i, t, x, spot_var, y.
pub fn write_observations<W: Write>(
    w: &mut W,
    path: &PathBundle,
    obs: &ObservationSeries,
) -> Result<()> {
    if obs.n != path.n {
        return Err(Error::Mismatch("path and observations disagree on n".into()));
    }
    writeln!(w, "i,t,x,spot_var,y")?;
    let n = path.n as f64;
    for i in 0..=path.n {
        writeln!(
            w,
            "{},{},{},{},{}",
            i,
            i as f64 / n,
            path.x[i],
            path.spot_var[i],
            obs.y[i]
        )?;
    }
    Ok(())
}

/// Columns recovered from an observation CSV; x and spot_var are optional
/// (absent or empty in externally produced files).
pub struct ObservationColumns {
    pub obs: ObservationSeries,
    pub x: Option<Vec<f64>>,
    pub spot_var: Option<Vec<f64>>,
}

/// Read observations written by [`write_observations`] (or any CSV with a
/// `y` column and optional `x` / `spot_var` columns).
pub fn read_observations<R: BufRead>(r: &mut R, noise: NoiseConfig) -> Result<ObservationColumns> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let cols: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    let find = |name: &str| cols.iter().position(|c| c == name);
    let y_col = find("y").ok_or_else(|| Error::Parse("missing 'y' column".into()))?;
    let x_col = find("x");
    let sv_col = find("spot_var");

    let mut y = Vec::new();
    let mut x = Vec::new();
    let mut sv = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let get = |idx: usize| -> Result<f64> {
            fields
                .get(idx)
                .ok_or_else(|| Error::Parse(format!("short row: {line}")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number in '{line}': {e}")))
        };
        y.push(get(y_col)?);
        if let Some(c) = x_col {
            if let Ok(v) = get(c) {
                x.push(v);
            }
        }
        if let Some(c) = sv_col {
            if let Ok(v) = get(c) {
                sv.push(v);
            }
        }
    }
    if y.len() < 2 {
        return Err(Error::Parse("need at least two observations".into()));
    }
    let n = y.len() - 1;
    Ok(ObservationColumns {
        obs: ObservationSeries { n, y, noise },
        x: (x.len() == n + 1).then_some(x),
        spot_var: (sv.len() == n + 1).then_some(sv),
    })
}

/// Write block minima: columns k, block_start_t, m_k, diff_k (diff empty
/// for the first block).
pub fn write_local_minima<W: Write>(w: &mut W, lm: &LocalMinima) -> Result<()> {
    writeln!(w, "k,block_start_t,m_k,diff_k")?;
    let inv_h = lm.partition.inv_h as f64;
    for (k, m) in lm.m.iter().enumerate() {
        if k == 0 {
            writeln!(w, "{},{},{},", k, k as f64 / inv_h, m)?;
        } else {
            writeln!(w, "{},{},{},{}", k, k as f64 / inv_h, m, lm.diff(k))?;
        }
    }
    Ok(())
}

/// Write a volatility curve, optionally with the true spot variance of a
/// simulation (one value per block).
pub fn write_curve<W: Write>(
    w: &mut W,
    curve: &VolatilityCurve,
    truth: Option<&[f64]>,
) -> Result<()> {
    if let Some(t) = truth {
        if t.len() != curve.estimates.len() {
            return Err(Error::Mismatch("truth length != number of blocks".into()));
        }
        writeln!(w, "k,t_center,raw,corrected,quarticity,ci_lower,ci_upper,true_spot_var")?;
    } else {
        writeln!(w, "k,t_center,raw,corrected,quarticity,ci_lower,ci_upper")?;
    }
    let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (k, e) in curve.estimates.iter().enumerate() {
        write!(
            w,
            "{},{},{},{},{},{},{}",
            k,
            e.tau,
            e.raw_value,
            fmt_opt(e.corrected_value),
            e.quarticity,
            fmt_opt(e.ci_lower),
            fmt_opt(e.ci_upper)
        )?;
        if let Some(t) = truth {
            write!(w, ",{}", t[k])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Write a bias table: columns sigma_sq, psi_hat, stderr, psi_isotonic.
pub fn write_psi_table<W: Write>(w: &mut W, table: &PsiTable) -> Result<()> {
    writeln!(w, "sigma_sq,psi_hat,stderr,psi_isotonic")?;
    for p in &table.points {
        writeln!(w, "{},{},{},{}", p.sigma_sq, p.psi_hat, p.stderr, p.psi_isotonic)?;
    }
    Ok(())
}

/// Write the sidecar metadata record of a bias table.
pub fn write_psi_meta<W: Write>(w: &mut W, table: &PsiTable) -> Result<()> {
    writeln!(w, "n,nh,eta,family,iterations,seed,fitted_slope")?;
    let m = &table.meta;
    writeln!(
        w,
        "{},{},{},{},{},{},{}",
        m.n,
        m.nh,
        m.noise.level_eta,
        family_name(m.noise.family),
        m.iterations_per_point,
        m.seed,
        table.fitted_slope
    )?;
    Ok(())
}

/// Read a bias table from its CSV and sidecar metadata.
pub fn read_psi_table<R: BufRead, M: BufRead>(table_r: &mut R, meta_r: &mut M) -> Result<PsiTable> {
    let mut lines = meta_r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty psi metadata".into()))??;
    if header.trim() != "n,nh,eta,family,iterations,seed,fitted_slope" {
        return Err(Error::Parse(format!("unexpected psi metadata header '{header}'")));
    }
    let row = lines
        .next()
        .ok_or_else(|| Error::Parse("psi metadata has no data row".into()))??;
    let f: Vec<&str> = row.split(',').collect();
    if f.len() != 7 {
        return Err(Error::Parse("psi metadata row needs 7 fields".into()));
    }
    let parse_err = |e: std::num::ParseIntError| Error::Parse(format!("psi metadata: {e}"));
    let parse_ferr = |e: std::num::ParseFloatError| Error::Parse(format!("psi metadata: {e}"));
    let meta = PsiMeta {
        n: f[0].trim().parse().map_err(parse_err)?,
        nh: f[1].trim().parse().map_err(parse_err)?,
        noise: NoiseConfig {
            family: parse_family(f[3])?,
            level_eta: f[2].trim().parse().map_err(parse_ferr)?,
        },
        iterations_per_point: f[4].trim().parse().map_err(parse_err)?,
        seed: f[5].trim().parse().map_err(parse_err)?,
    };
    let fitted_slope: f64 = f[6].trim().parse().map_err(parse_ferr)?;

    let mut lines = table_r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty psi table".into()))??;
    if header.trim() != "sigma_sq,psi_hat,stderr,psi_isotonic" {
        return Err(Error::Parse(format!("unexpected psi table header '{header}'")));
    }
    let mut points = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(Error::Parse(format!("psi table row needs 4 fields: '{line}'")));
        }
        let num = |i: usize| -> Result<f64> {
            f[i].trim()
                .parse()
                .map_err(|e| Error::Parse(format!("psi table: {e}")))
        };
        points.push(PsiPoint {
            sigma_sq: num(0)?,
            psi_hat: num(1)?,
            stderr: num(2)?,
            psi_isotonic: num(3)?,
        });
    }
    if points.is_empty() {
        return Err(Error::Parse("psi table has no rows".into()));
    }
    Ok(PsiTable {
        points,
        fitted_slope,
        meta,
    })
}

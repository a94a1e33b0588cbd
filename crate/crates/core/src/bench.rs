//! Benchmark harness: level decay, cost against accuracy, and the effect of
//! the coarsest level. Costs are the deterministic cost units accumulated by
//! the path generators; wall times are informational.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::mc_auto;
use crate::mlmc::{initial_level, mlmc_driver, run_level, LevelStats, MlmcConfig, MlmcResult, Problem};
use crate::spmat::ChainDecomposition;

/// Least-squares slope of `log2 |y|` against `x`. NaN when fewer than two
/// points are given or any `y` vanishes.
pub fn log2_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 || points.iter().any(|&(_, y)| !(y.abs() > 0.0)) {
        return f64::NAN;
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.abs().log2()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope of `log(cost)` against `log(eps)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logx: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.log2(), y)).collect();
    log2_slope(&logx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelBenchRow {
    pub level: u32,
    pub samples: u64,
    pub mean: f64,
    pub variance: f64,
    pub cost_per_sample: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelsReport {
    pub l0: u32,
    pub rows: Vec<LevelBenchRow>,
    /// Fitted over the correction levels above `l0`.
    pub mean_slope: f64,
    pub variance_slope: f64,
    /// Fitted over the three finest levels.
    pub cost_slope: f64,
}

/// Samples levels `l0..=l0 + extra` with a fixed count each; rows above
/// `l0` describe the corrections `P_l - P_{l-1}`.
pub fn bench_levels(problem: &Problem<'_>, l0: u32, extra: u32, samples: u64, seed: u64) -> Result<LevelsReport> {
    if extra < 2 {
        return Err(Error::Config("need at least two correction levels".into()));
    }
    let mut rows = Vec::new();
    for l in l0..=l0 + extra {
        let mut s = LevelStats::new(l);
        run_level(problem, l0, &mut s, samples, seed)?;
        rows.push(LevelBenchRow {
            level: l,
            samples: s.samples,
            mean: s.mean(),
            variance: s.variance(),
            cost_per_sample: s.cost_per_sample(),
        });
    }
    let above = &rows[1..];
    let fit = |f: fn(&LevelBenchRow) -> f64, rows: &[LevelBenchRow]| {
        log2_slope(&rows.iter().map(|r| (r.level as f64, f(r))).collect::<Vec<_>>())
    };
    Ok(LevelsReport {
        l0,
        mean_slope: fit(|r| r.mean, above),
        variance_slope: fit(|r| r.variance, above),
        cost_slope: fit(|r| r.cost_per_sample, &rows[rows.len() - 3..]),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mlmc,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub method: Method,
    pub eps: f64,
    pub cost: u64,
    pub wall_time_seconds: f64,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub rows: Vec<ComplexityRow>,
    pub mlmc_slope: f64,
    /// NaN when classical Monte Carlo was skipped.
    pub mc_slope: f64,
}

/// One MLMC run and (optionally) one accuracy-driven classical run per
/// `eps`, on the single-entry problem `(e^{beta A} u)_i`.
pub fn bench_complexity(
    dec: &ChainDecomposition,
    u: &[f64],
    i: usize,
    beta: f64,
    eps_values: &[f64],
    config: &MlmcConfig,
    with_mc: bool,
) -> Result<ComplexityReport> {
    let problem = Problem::Entry { dec, u, i, beta };
    let mut rows = Vec::new();
    for &eps in eps_values {
        let clock = Instant::now();
        let r = mlmc_driver(&problem, &MlmcConfig { eps, ..config.clone() })?;
        rows.push(ComplexityRow {
            method: Method::Mlmc,
            eps,
            cost: r.total_cost,
            wall_time_seconds: clock.elapsed().as_secs_f64(),
            estimate: r.estimate,
        });
        if with_mc {
            let clock = Instant::now();
            let mc = mc_auto(dec, u, i, beta, eps, config.seed)?;
            rows.push(ComplexityRow {
                method: Method::Mc,
                eps,
                cost: mc.result.wall_cost + mc.pilot_cost,
                wall_time_seconds: clock.elapsed().as_secs_f64(),
                estimate: mc.result.estimate,
            });
        }
    }
    let slope = |m: Method| {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.method == m)
            .map(|r| (r.eps, r.cost as f64))
            .collect();
        loglog_slope(&pts)
    };
    Ok(ComplexityReport {
        mlmc_slope: slope(Method::Mlmc),
        mc_slope: if with_mc { slope(Method::Mc) } else { f64::NAN },
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L0Row {
    pub l0: u32,
    pub total_cost: u64,
    pub estimate: f64,
    pub max_level: u32,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L0Report {
    pub rows: Vec<L0Row>,
    /// Cheapest converged `l0`, if any run converged.
    pub best_l0: Option<u32>,
    /// `round(log2(2 beta d_max))`.
    pub predicted_l0: u32,
}

/// Runs the driver at fixed accuracy for each coarsest level in `l0_values`.
pub fn bench_l0(problem: &Problem<'_>, l0_values: &[u32], config: &MlmcConfig) -> Result<L0Report> {
    let mut rows = Vec::new();
    for &l0 in l0_values {
        let r: MlmcResult = match mlmc_driver(problem, &config.clone().with_l0(Some(l0))) {
            Ok(r) => r,
            Err(Error::NotConverged(partial)) => *partial,
            Err(e) => return Err(e),
        };
        rows.push(L0Row {
            l0,
            total_cost: r.total_cost,
            estimate: r.estimate,
            max_level: r.max_level,
            converged: r.converged,
        });
    }
    let best_l0 = rows
        .iter()
        .filter(|r| r.converged)
        .min_by_key(|r| r.total_cost)
        .map(|r| r.l0);
    Ok(L0Report {
        rows,
        best_l0,
        predicted_l0: initial_level(problem.beta(), problem.decomposition().d_max()),
    })
}

/// Writes rows as CSV with a header from the field names.
pub fn write_rows_csv<T: Serialize>(rows: &[T], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

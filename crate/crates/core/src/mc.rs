//! Classical single-level Monte Carlo: one step size, `M` independent paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlmc::initial_level;
use crate::parallel::chunked_reduce;
use crate::paths::{self, ForwardSource, Sample};
use crate::rng::RngStream;
use crate::spmat::ChainDecomposition;

/// Samples of the classical estimator use this lane so they never share
/// streams with the multilevel estimator under the same seed.
pub const MC_LANE: u16 = 1;
const PILOT_LANE: u16 = 2;

/// Samples used by [`mc_auto`] to estimate variance and splitting bias.
pub const PILOT_SAMPLES: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub dt: f64,
    pub steps: u64,
    pub wall_cost: u64,
}

/// Streaming mean/variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    pub cost: u64,
}

impl Welford {
    #[inline]
    pub fn push(&mut self, s: Sample) {
        self.count += 1;
        let delta = s.value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (s.value - self.mean);
        self.cost += s.cost;
    }

    pub fn merge(&mut self, other: Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
        self.cost += other.cost;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// `beta / dt` as an exact positive step count.
pub fn step_count(beta: f64, dt: f64) -> Result<u64> {
    let ratio = beta / dt;
    let rounded = ratio.round();
    if !(dt > 0.0) || !ratio.is_finite() || rounded < 1.0 || (ratio - rounded).abs() > 1e-9 * rounded {
        return Err(Error::Config(format!(
            "beta / dt = {ratio} is not a positive integer step count"
        )));
    }
    if rounded >= usize::MAX as f64 {
        return Err(Error::Config("step count overflows".into()));
    }
    Ok(rounded as u64)
}

fn level_tag(steps: u64) -> u16 {
    if steps.is_power_of_two() {
        steps.trailing_zeros() as u16
    } else {
        u16::MAX
    }
}

fn summarize(acc: Welford, dt: f64, steps: u64) -> McResult {
    McResult {
        estimate: acc.mean,
        std_error: acc.std_error(),
        samples: acc.count,
        dt,
        steps,
        wall_cost: acc.cost,
    }
}

fn run_entry(
    dec: &ChainDecomposition,
    u: &[f64],
    i: usize,
    dt: f64,
    steps: u64,
    samples: u64,
    seed: u64,
    lane: u16,
) -> Welford {
    let tag = level_tag(steps);
    chunked_reduce(
        0,
        samples,
        Welford::default,
        |acc, k| {
            let mut rng = RngStream::with_lane(seed, tag, k, lane);
            acc.push(paths::single_unchecked(dec, u, i, dt, steps as usize, &mut rng));
        },
        Welford::merge,
    )
}

/// Mean and standard error of `samples` single-entry functionals at step `dt`.
pub fn mc_single_entry(
    dec: &ChainDecomposition,
    u: &[f64],
    i: usize,
    beta: f64,
    dt: f64,
    samples: u64,
    seed: u64,
) -> Result<McResult> {
    if samples < 2 {
        return Err(Error::Config("need at least 2 samples".into()));
    }
    let steps = step_count(beta, dt)?;
    // validates i and u against the decomposition
    paths::single_functional(dec, u, i, dt, 1, &mut RngStream::with_lane(seed, 0, 0, PILOT_LANE))?;
    let acc = run_entry(dec, u, i, dt, steps, samples, seed, MC_LANE);
    Ok(summarize(acc, dt, steps))
}

/// Estimates `sum_i (e^{beta A} u)_i` from the decomposition of `A^T`.
pub fn mc_forward_scalar(
    dec_t: &ChainDecomposition,
    u: &[f64],
    beta: f64,
    dt: f64,
    samples: u64,
    seed: u64,
) -> Result<McResult> {
    if samples < 2 {
        return Err(Error::Config("need at least 2 samples".into()));
    }
    let steps = step_count(beta, dt)?;
    let source = ForwardSource::new(u)?;
    if source.dim() != dec_t.n() {
        return Err(Error::Dimension("vector and matrix dimensions differ".into()));
    }
    let tag = level_tag(steps);
    let acc = chunked_reduce(
        0,
        samples,
        Welford::default,
        |acc, k| {
            let mut rng = RngStream::with_lane(seed, tag, k, MC_LANE);
            acc.push(paths::forward_unchecked(dec_t, &source, dt, steps as usize, &mut rng));
        },
        Welford::merge,
    );
    Ok(summarize(acc, dt, steps))
}

/// Accuracy-driven classical Monte Carlo and its calibration data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McAutoResult {
    pub result: McResult,
    /// `c` in the bias model `|bias| ~ c dt^2`.
    pub bias_constant: f64,
    pub pilot_variance: f64,
    pub pilot_cost: u64,
}

/// Chooses `dt = beta / 2^k` (largest with `c dt^2 <= eps / 2`) and
/// `M = ceil(2 V / eps^2)`, then runs [`mc_single_entry`].
///
/// `c` comes from a Richardson comparison of step sizes `dt_p` and `2 dt_p`
/// on coupled pilot paths, `E[P(dt_p) - P(2 dt_p)] = -3 c dt_p^2`; the pilot
/// standard error is added to `|m|` so a noisy pilot errs towards smaller steps.
pub fn mc_auto(
    dec: &ChainDecomposition,
    u: &[f64],
    i: usize,
    beta: f64,
    eps: f64,
    seed: u64,
) -> Result<McAutoResult> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("epsilon must be > 0, got {eps}")));
    }
    if !(beta > 0.0) {
        return Err(Error::Config(format!("beta must be > 0, got {beta}")));
    }
    paths::single_functional(dec, u, i, beta, 1, &mut RngStream::with_lane(seed, 0, 0, PILOT_LANE))?;

    let pilot_level = initial_level(beta, dec.d_max()).max(1) + 2;
    let pilot_steps = 1u64 << pilot_level;
    let pilot_dt = beta / pilot_steps as f64;
    let diff = chunked_reduce(
        0,
        PILOT_SAMPLES,
        Welford::default,
        |acc, k| {
            let mut rng = RngStream::with_lane(seed, pilot_level as u16, k, PILOT_LANE);
            let c = paths::coupled_unchecked(dec, u, i, pilot_dt, pilot_steps as usize, &mut rng);
            acc.push(Sample {
                value: c.difference(),
                cost: c.cost,
            });
        },
        Welford::merge,
    );
    let bias_constant = (diff.mean.abs() + diff.std_error()) / (3.0 * pilot_dt * pilot_dt);

    let mut k = 0u32;
    while bias_constant * (beta / 2f64.powi(k as i32)).powi(2) > eps / 2.0 {
        k += 1;
        if k >= 63 {
            return Err(Error::Config(format!(
                "epsilon {eps} needs more than 2^62 steps"
            )));
        }
    }
    let steps = 1u64 << k;
    let dt = beta / steps as f64;

    let pilot = run_entry(dec, u, i, dt, steps, PILOT_SAMPLES, seed, PILOT_LANE);
    let pilot_variance = pilot.variance();
    let samples = ((2.0 * pilot_variance / (eps * eps)).ceil() as u64).max(2);
    let result = summarize(run_entry(dec, u, i, dt, steps, samples, seed, MC_LANE), dt, steps);
    Ok(McAutoResult {
        result,
        bias_constant,
        pilot_variance,
        pilot_cost: diff.cost + pilot.cost,
    })
}

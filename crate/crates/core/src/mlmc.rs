//! Multilevel Monte Carlo over the step-size hierarchy `dt_l = beta / 2^l`.
//!
//! The estimator telescopes `E[P_L] = E[P_l0] + sum_{l > l0} E[P_l - P_{l-1}]`.
//! Level `l0` samples the plain functional; every level above samples the
//! coupled difference on shared paths. Sample counts follow the
//! Lagrange-optimal allocation and levels are added until the estimated
//! remaining splitting bias is below tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::chunked_reduce;
use crate::paths::{self, Forcing, ForwardSource, QuadratureWeights};
use crate::rng::RngStream;
use crate::spmat::ChainDecomposition;

/// Running sums for one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: u32,
    pub sum: f64,
    pub sum_sq: f64,
    pub samples: u64,
    pub cost: u64,
    /// Sum of the inhomogeneous-term part of each sample (FEM problems only).
    #[serde(default)]
    pub forcing_sum: f64,
}

impl LevelStats {
    pub fn new(level: u32) -> Self {
        Self {
            level,
            sum: 0.0,
            sum_sq: 0.0,
            samples: 0,
            cost: 0,
            forcing_sum: 0.0,
        }
    }

    pub fn mean(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.sum / self.samples as f64
        }
    }

    /// `sum_sq / M - mean^2`. Values within the rounding bound of the two
    /// `M`-term sums are reported as zero, so constant samples have exactly
    /// zero variance.
    pub fn variance(&self) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        let m = self.mean();
        let second = self.sum_sq / self.samples as f64;
        let v = second - m * m;
        if v <= 2.0 * self.samples as f64 * f64::EPSILON * second {
            0.0
        } else {
            v
        }
    }

    pub fn cost_per_sample(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.cost as f64 / self.samples as f64
        }
    }

    pub fn forcing_mean(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.forcing_sum / self.samples as f64
        }
    }

    fn absorb(&mut self, delta: &LevelStats) {
        self.sum += delta.sum;
        self.sum_sq += delta.sum_sq;
        self.samples += delta.samples;
        self.cost += delta.cost;
        self.forcing_sum += delta.forcing_sum;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlmcResult {
    pub estimate: f64,
    pub statistical_error: f64,
    pub bias_estimate: f64,
    pub levels: Vec<LevelStats>,
    pub l0: u32,
    pub max_level: u32,
    pub total_cost: u64,
    pub converged: bool,
}

impl MlmcResult {
    fn from_levels(levels: Vec<LevelStats>, l0: u32, bias_estimate: f64, converged: bool) -> Self {
        let estimate = levels.iter().map(LevelStats::mean).sum();
        let variance: f64 = levels
            .iter()
            .filter(|s| s.samples > 0)
            .map(|s| s.variance() / s.samples as f64)
            .sum();
        Self {
            estimate,
            statistical_error: variance.sqrt(),
            bias_estimate,
            total_cost: levels.iter().map(|s| s.cost).sum(),
            max_level: levels.last().map_or(l0, |s| s.level),
            levels,
            l0,
            converged,
        }
    }
}

/// What the per-sample functional estimates.
#[derive(Clone, Copy)]
pub enum Problem<'a> {
    /// `(e^{beta A} u)_i` from the decomposition of `A`.
    Entry {
        dec: &'a ChainDecomposition,
        u: &'a [f64],
        i: usize,
        beta: f64,
    },
    /// `sum_i (e^{beta A} u)_i` from the decomposition of `A^T`.
    Forward {
        dec_t: &'a ChainDecomposition,
        source: &'a ForwardSource,
        beta: f64,
    },
    /// `(e^{t A} u0 + int_0^t e^{s A} f(t - s) ds)_i`, Simpson in time.
    Fem {
        dec: &'a ChainDecomposition,
        u0: &'a [f64],
        forcing: &'a dyn Forcing,
        i: usize,
        t: f64,
    },
}

impl Problem<'_> {
    pub fn beta(&self) -> f64 {
        match *self {
            Problem::Entry { beta, .. } | Problem::Forward { beta, .. } => beta,
            Problem::Fem { t, .. } => t,
        }
    }

    pub fn decomposition(&self) -> &ChainDecomposition {
        match *self {
            Problem::Entry { dec, .. } | Problem::Fem { dec, .. } => dec,
            Problem::Forward { dec_t, .. } => dec_t,
        }
    }

    /// Smallest usable coarsest level; Simpson needs an even number of
    /// intervals on every grid, coarse ones included.
    pub fn min_level(&self) -> u32 {
        match self {
            Problem::Fem { .. } => 1,
            _ => 0,
        }
    }

    fn validate(&self) -> Result<()> {
        let beta = self.beta();
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Config(format!("beta (time) must be > 0, got {beta}")));
        }
        let n = self.decomposition().n();
        let check = |len: usize, i: usize| -> Result<()> {
            if len != n {
                return Err(Error::Dimension(format!(
                    "vector has {len} entries, matrix has {n} rows"
                )));
            }
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, dim: n });
            }
            Ok(())
        };
        match *self {
            Problem::Entry { u, i, .. } => check(u.len(), i),
            Problem::Fem { u0, i, .. } => check(u0.len(), i),
            Problem::Forward { source, .. } => check(source.dim(), 0),
        }
    }
}

/// How the driver's stopping test splits `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ErrorControl {
    /// `sqrt(V_T) <= eps / sqrt(2)` and `bias <= eps / sqrt(2)`.
    #[default]
    Combined,
    /// `sqrt(V_T) <= eps` only; levels are never added.
    Statistical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlmcConfig {
    pub eps: f64,
    pub seed: u64,
    /// Warm-up samples per level.
    pub warmup: u64,
    /// Coarsest level; `None` uses [`initial_level`].
    pub l0: Option<u32>,
    /// Levels initially above `l0`.
    pub initial_levels: u32,
    /// Levels allowed above `l0` before giving up.
    pub max_extra_levels: u32,
    pub error_control: ErrorControl,
}

impl MlmcConfig {
    pub fn new(eps: f64, seed: u64) -> Self {
        Self {
            eps,
            seed,
            warmup: 1000,
            l0: None,
            initial_levels: 4,
            max_extra_levels: 30,
            error_control: ErrorControl::Combined,
        }
    }

    pub fn with_l0(mut self, l0: Option<u32>) -> Self {
        self.l0 = l0;
        self
    }

    pub fn with_warmup(mut self, warmup: u64) -> Self {
        self.warmup = warmup;
        self
    }
}

/// `max(0, round(log2(2 beta d_max)))`.
pub fn initial_level(beta: f64, d_max: f64) -> u32 {
    let x = 2.0 * beta * d_max;
    if !(x > 0.0) || !x.is_finite() {
        return 0;
    }
    x.log2().round().max(0.0) as u32
}

/// Lagrange-optimal sample counts with `sum V_l / M_l <= eps^2 / 2`.
pub fn optimal_allocation(variances: &[f64], costs: &[f64], eps: f64) -> Vec<u64> {
    allocation_for_budget(variances, costs, 0.5 * eps * eps)
}

/// `M_l = ceil(sqrt(V_l / C_l) * sum_k sqrt(V_k C_k) / budget)`, at least 2.
pub fn allocation_for_budget(variances: &[f64], costs: &[f64], budget: f64) -> Vec<u64> {
    assert_eq!(variances.len(), costs.len());
    let total: f64 = variances
        .iter()
        .zip(costs)
        .map(|(v, c)| (v * c).sqrt())
        .sum();
    variances
        .iter()
        .zip(costs)
        .map(|(&v, &c)| {
            let m = ((v / c).sqrt() * total / budget).ceil();
            if m.is_finite() {
                (m as u64).max(2)
            } else {
                2
            }
        })
        .collect()
}

/// Remaining splitting bias after level `L` for second-order decay:
/// `max(|m_L|, |m_{L-1}| / 4) / 3`. `means` holds levels `l0..=L`.
pub fn bias_estimate(means: &[f64]) -> Result<f64> {
    if means.len() < 3 {
        return Err(Error::Config(format!(
            "bias estimate needs two levels above l0, got {} levels",
            means.len()
        )));
    }
    let last = means[means.len() - 1].abs();
    let prev = means[means.len() - 2].abs();
    Ok(last.max(prev / 4.0) / 3.0)
}

/// Extends `stats` by `additional` fresh samples at its level. Sample
/// indices continue from `stats.samples`.
pub fn run_level(
    problem: &Problem<'_>,
    l0: u32,
    stats: &mut LevelStats,
    additional: u64,
    seed: u64,
) -> Result<()> {
    problem.validate()?;
    let l = stats.level;
    if l < l0 {
        return Err(Error::Config(format!("level {l} below l0 = {l0}")));
    }
    if l0 < problem.min_level() {
        return Err(Error::Config(format!(
            "this problem needs l0 >= {}, got {l0}",
            problem.min_level()
        )));
    }
    if l > 62 {
        return Err(Error::Config(format!("level {l} overflows the step count")));
    }
    let steps = 1usize << l;
    let dt = problem.beta() / steps as f64;
    let coupled = l > l0;
    let tag = u16::try_from(l).expect("level checked above");
    let start = stats.samples;

    let weights = match problem {
        Problem::Fem { .. } => Some(QuadratureWeights::simpson(dt, steps, coupled)?),
        _ => None,
    };

    let delta = chunked_reduce(
        start,
        additional,
        || LevelStats::new(l),
        |acc, k| {
            let mut rng = RngStream::with_lane(seed, tag, k, 0);
            let (value, cost, forcing) = match *problem {
                Problem::Entry { dec, u, i, .. } => {
                    if coupled {
                        let c = paths::coupled_unchecked(dec, u, i, dt, steps, &mut rng);
                        (c.difference(), c.cost, 0.0)
                    } else {
                        let s = paths::single_unchecked(dec, u, i, dt, steps, &mut rng);
                        (s.value, s.cost, 0.0)
                    }
                }
                Problem::Forward { dec_t, source, .. } => {
                    if coupled {
                        let c = paths::coupled_forward_unchecked(dec_t, source, dt, steps, &mut rng);
                        (c.difference(), c.cost, 0.0)
                    } else {
                        let s = paths::forward_unchecked(dec_t, source, dt, steps, &mut rng);
                        (s.value, s.cost, 0.0)
                    }
                }
                Problem::Fem {
                    dec, u0, forcing, i, ..
                } => {
                    let w = weights.as_ref().expect("built for FEM");
                    if coupled {
                        let c = paths::coupled_functional_fem(dec, u0, forcing, i, dt, steps, w, &mut rng)
                            .expect("validated");
                        (c.difference(), c.cost, c.integ_fine - c.integ_coarse)
                    } else {
                        let s = paths::single_functional_fem(dec, u0, forcing, i, dt, w, &mut rng)
                            .expect("validated");
                        (s.value, s.cost, f64::NAN)
                    }
                }
            };
            acc.sum += value;
            acc.sum_sq += value * value;
            acc.samples += 1;
            acc.cost += cost;
            if !forcing.is_nan() {
                acc.forcing_sum += forcing;
            }
        },
        |a, b| a.absorb(&b),
    );
    stats.absorb(&delta);
    Ok(())
}

/// Adaptive multilevel driver.
///
/// Starts with levels `l0..=l0 + 4` warmed up with `warmup` samples, then
/// repeatedly allocates samples optimally, extends the levels, and adds a
/// level whenever the bias estimate exceeds `eps / sqrt(2)`. Fails with
/// [`Error::NotConverged`] (carrying the partial result) at the level cap.
pub fn mlmc_driver(problem: &Problem<'_>, config: &MlmcConfig) -> Result<MlmcResult> {
    problem.validate()?;
    let eps = config.eps;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Config(format!("epsilon must be > 0, got {eps}")));
    }
    if config.warmup < 2 {
        return Err(Error::Config("warm-up needs at least 2 samples".into()));
    }
    let beta = problem.beta();
    let l0 = config
        .l0
        .unwrap_or_else(|| initial_level(beta, problem.decomposition().d_max()))
        .max(problem.min_level());
    let (variance_budget, bias_tol) = match config.error_control {
        ErrorControl::Combined => (0.5 * eps * eps, eps / std::f64::consts::SQRT_2),
        ErrorControl::Statistical => (eps * eps, f64::INFINITY),
    };
    let max_level = l0 + config.max_extra_levels;
    let initial_top = l0 + config.initial_levels.max(2).min(config.max_extra_levels);

    let mut levels: Vec<LevelStats> = Vec::new();
    for l in l0..=initial_top {
        let mut s = LevelStats::new(l);
        run_level(problem, l0, &mut s, config.warmup, config.seed)?;
        levels.push(s);
    }

    const MAX_ROUNDS: usize = 200;
    for _ in 0..MAX_ROUNDS {
        let variances: Vec<f64> = levels.iter().map(LevelStats::variance).collect();
        let costs: Vec<f64> = levels.iter().map(|s| s.cost_per_sample().max(1.0)).collect();
        let targets = allocation_for_budget(&variances, &costs, variance_budget);
        for (s, &target) in levels.iter_mut().zip(&targets) {
            if target > s.samples {
                run_level(problem, l0, s, target - s.samples, config.seed)?;
            }
        }

        let means: Vec<f64> = levels.iter().map(LevelStats::mean).collect();
        let bias = bias_estimate(&means)?;
        let result = MlmcResult::from_levels(levels.clone(), l0, bias, false);
        let variance_ok = result.statistical_error * result.statistical_error <= variance_budget * (1.0 + 1e-12);
        let bias_ok = bias <= bias_tol;
        log::debug!(
            "mlmc: L = {}, estimate = {}, sqrt(V_T) = {:e}, bias = {:e}",
            result.max_level,
            result.estimate,
            result.statistical_error,
            bias
        );
        if variance_ok && bias_ok {
            return Ok(MlmcResult {
                converged: true,
                ..result
            });
        }
        if !bias_ok {
            let top = levels.last().expect("non-empty").level;
            if top >= max_level {
                return Err(Error::NotConverged(Box::new(result)));
            }
            let mut s = LevelStats::new(top + 1);
            run_level(problem, l0, &mut s, config.warmup, config.seed)?;
            levels.push(s);
        }
    }
    let means: Vec<f64> = levels.iter().map(LevelStats::mean).collect();
    let bias = bias_estimate(&means)?;
    Err(Error::NotConverged(Box::new(MlmcResult::from_levels(
        levels, l0, bias, false,
    ))))
}

/// Predicted run time `alpha_in beta d_bar M + alpha_out (beta / dt) M`.
pub fn cost_model(beta: f64, d_bar: f64, dt: f64, samples: f64, alpha_in: f64, alpha_out: f64) -> f64 {
    alpha_in * beta * d_bar * samples + alpha_out * (beta / dt) * samples
}

/// Least-squares fit of the per-sample cost model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostFit {
    pub alpha_in: f64,
    pub alpha_out: f64,
    pub r_squared: f64,
}

/// Fits `cost ~ alpha_in * beta_dbar + alpha_out * steps` to
/// `(beta_dbar, steps, per_sample_cost)` observations.
pub fn fit_cost_model(points: &[(f64, f64, f64)]) -> Result<CostFit> {
    if points.len() < 2 {
        return Err(Error::Config("need at least two observations".into()));
    }
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x1, x2, y) in points {
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        b1 += x1 * y;
        b2 += x2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= 1e-12 * s11 * s22 {
        return Err(Error::Config("cost observations are collinear".into()));
    }
    let alpha_in = (b1 * s22 - b2 * s12) / det;
    let alpha_out = (s11 * b2 - s12 * b1) / det;
    let mean_y = points.iter().map(|p| p.2).sum::<f64>() / points.len() as f64;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for &(x1, x2, y) in points {
        let fit = alpha_in * x1 + alpha_out * x2;
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(CostFit {
        alpha_in,
        alpha_out,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spmat::SparseMatrix;

    #[test]
    fn initial_level_cases() {
        assert_eq!(initial_level(0.25, 4.0), 1);
        assert_eq!(initial_level(1.0, 7.0), 4);
        assert_eq!(initial_level(1.0, 0.25), 0);
        assert_eq!(initial_level(1.0, 0.0), 0);
        assert_eq!(initial_level(1.0, -3.0), 0);
    }

    #[test]
    fn allocation_single_level() {
        assert_eq!(optimal_allocation(&[1.0], &[1.0], 0.1), vec![200]);
    }

    #[test]
    fn allocation_ratio() {
        let m = optimal_allocation(&[1.0, 0.25], &[1.0, 4.0], 0.01);
        assert_eq!(m[0], 4 * m[1]);
    }

    #[test]
    fn allocation_zero_variance_floor() {
        assert_eq!(optimal_allocation(&[0.0, 0.0], &[1.0, 2.0], 0.1), vec![2, 2]);
    }

    #[test]
    fn allocation_meets_variance_budget() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let k = 1 + (next() * 6.0) as usize;
            let v: Vec<f64> = (0..k).map(|_| next() * 10.0).collect();
            let c: Vec<f64> = (0..k).map(|_| 0.1 + next() * 100.0).collect();
            let eps = 1e-3 + next() * 0.1;
            let m = optimal_allocation(&v, &c, eps);
            let vt: f64 = v.iter().zip(&m).map(|(v, &m)| v / m as f64).sum();
            assert!(vt <= 0.5 * eps * eps * (1.0 + 1e-12));
        }
    }

    #[test]
    fn allocation_is_locally_optimal() {
        // perturb one M_l by +-20%, rescale the others to restore V_T
        let v: [f64; 4] = [2.0, 0.5, 0.1, 0.02];
        let c: [f64; 4] = [3.0, 8.0, 16.0, 32.0];
        let budget = 1e-4;
        let total: f64 = v.iter().zip(&c).map(|(v, c)| (v * c).sqrt()).sum();
        let opt: Vec<f64> = v.iter().zip(&c).map(|(v, c)| (v / c).sqrt() * total / budget).collect();
        let cost = |m: &[f64]| m.iter().zip(&c).map(|(m, c)| m * c).sum::<f64>();
        let base = cost(&opt);
        for l in 0..v.len() {
            for f in [0.8, 1.2] {
                let mut m = opt.clone();
                m[l] *= f;
                let vt_l = v[l] / m[l];
                let rest: f64 = (0..v.len()).filter(|&k| k != l).map(|k| v[k] / opt[k]).sum();
                let scale = rest / (budget - vt_l);
                for k in (0..v.len()).filter(|&k| k != l) {
                    m[k] *= scale;
                }
                let vt: f64 = v.iter().zip(&m).map(|(v, m)| v / m).sum();
                assert!((vt - budget).abs() < 1e-12 * budget.max(1.0));
                assert!(cost(&m) > base, "level {l} factor {f}");
            }
        }
    }

    #[test]
    fn bias_estimate_cases() {
        assert_eq!(bias_estimate(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(bias_estimate(&[1.0, 0.5]).is_err());
        for top in 3..12 {
            let means: Vec<f64> = (0..=top).map(|l| 4f64.powi(-l)).collect();
            let tail: f64 = (top + 1..top + 60).map(|l| 4f64.powi(-l)).sum();
            let est = bias_estimate(&means).unwrap();
            assert!((est / tail - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cost_model_one_step() {
        assert_eq!(cost_model(2.0, 3.0, 2.0, 10.0, 1.0, 1.0), 10.0 * (2.0 * 3.0 + 1.0));
    }

    #[test]
    fn cost_fit_recovers_coefficients() {
        let pts: Vec<(f64, f64, f64)> = (0..8)
            .map(|l| (4.0, (1u64 << l) as f64, 1.5 * 4.0 + 2.0 * (1u64 << l) as f64))
            .collect();
        let fit = fit_cost_model(&pts).unwrap();
        assert!((fit.alpha_in - 1.5).abs() < 1e-9);
        assert!((fit.alpha_out - 2.0).abs() < 1e-9);
        assert!(fit.r_squared > 0.999_999);
    }

    #[test]
    fn diagonal_converges_at_warmup() {
        let dec = ChainDecomposition::decompose(&SparseMatrix::diagonal(&[0.4, -0.2, 1.0])).unwrap();
        let u = [1.0, 2.0, 3.0];
        let p = Problem::Entry {
            dec: &dec,
            u: &u,
            i: 2,
            beta: 1.5,
        };
        let r = mlmc_driver(&p, &MlmcConfig::new(1e-8, 3)).unwrap();
        assert!(r.converged);
        assert!((r.estimate - 3.0 * 1.5f64.exp()).abs() < 1e-12);
        assert_eq!(r.statistical_error, 0.0);
        assert_eq!(r.bias_estimate, 0.0);
        for s in &r.levels[1..] {
            assert_eq!(s.sum, 0.0);
            assert_eq!(s.variance(), 0.0);
        }
        assert_eq!(r.total_cost, r.levels.iter().map(|s| s.cost).sum::<u64>());
    }

    #[test]
    fn run_level_extension_is_deterministic() {
        let a = SparseMatrix::from_dense(&[vec![0.0, 1.0, -0.5], vec![1.0, -1.0, 0.3], vec![0.2, 0.2, 0.0]])
            .unwrap();
        let dec = ChainDecomposition::decompose(&a).unwrap();
        let u = [1.0, 0.5, -1.0];
        let p = Problem::Entry {
            dec: &dec,
            u: &u,
            i: 0,
            beta: 1.0,
        };
        let mut a1 = LevelStats::new(3);
        run_level(&p, 1, &mut a1, 5000, 9).unwrap();
        let mut a2 = LevelStats::new(3);
        run_level(&p, 1, &mut a2, 5000, 9).unwrap();
        assert_eq!(a1, a2);
        let mut b = LevelStats::new(3);
        run_level(&p, 1, &mut b, 2048, 9).unwrap();
        run_level(&p, 1, &mut b, 5000 - 2048, 9).unwrap();
        assert_eq!(b.samples, a1.samples);
        assert_eq!(b.cost, a1.cost);
        assert!((b.sum - a1.sum).abs() < 1e-12);
        assert!(run_level(&p, 4, &mut LevelStats::new(3), 10, 9).is_err());
    }

    #[test]
    fn fem_requires_positive_l0() {
        let dec = ChainDecomposition::decompose(&SparseMatrix::diagonal(&[-1.0])).unwrap();
        let f = vec![1.0];
        let p = Problem::Fem {
            dec: &dec,
            u0: &[0.0],
            forcing: &f,
            i: 0,
            t: 1.0,
        };
        assert!(run_level(&p, 0, &mut LevelStats::new(0), 10, 0).is_err());
        let r = mlmc_driver(&p, &MlmcConfig::new(1e-6, 0).with_l0(Some(0))).unwrap();
        assert_eq!(r.l0, 1);
        let exact = 1.0 - (-1f64).exp();
        assert!((r.estimate - exact).abs() < 1e-5, "{} vs {exact}", r.estimate);
    }
}

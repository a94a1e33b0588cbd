//! Continuous-time Markov chain paths and the multiplicative functionals
//! whose expectations are Strang-split approximations of `e^{beta A} u`.
//!
//! A path of `N` steps of length `dt` starting at `i` contributes
//!
//! ```text
//! sign(path) * exp(dt * sum_k (d(i_{k-1}) + d(i_k)) / 2) * u(i_N)
//! ```
//!
//! (half weights of `d` at both ends of every step). The coarse functional of
//! a coupled pair reuses the same jumps but weights pairs of fine steps as a
//! single step of length `2 dt`: full weight `d` at the start of each odd fine
//! step and at the end of each even one.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::spmat::ChainDecomposition;

/// Position of a path and the sign it has accumulated so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub state: usize,
    pub sign: f64,
    pub jumps: u64,
}

impl PathState {
    pub fn start(state: usize) -> Self {
        Self {
            state,
            sign: 1.0,
            jumps: 0,
        }
    }
}

/// One functional draw and its cost (exponential draws + fine steps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub value: f64,
    pub cost: u64,
}

/// Fine and coarse functionals evaluated on one shared path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledSample {
    pub eta_fine: f64,
    pub eta_coarse: f64,
    pub cost: u64,
}

impl CoupledSample {
    #[inline]
    pub fn difference(&self) -> f64 {
        self.eta_fine - self.eta_coarse
    }
}

/// Coupled sample of the inhomogeneous (FEM) functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FemCoupledSample {
    pub eta_fine: f64,
    pub eta_coarse: f64,
    pub integ_fine: f64,
    pub integ_coarse: f64,
    pub terminal_state: usize,
    pub cost: u64,
}

impl FemCoupledSample {
    /// `u0_j (eta_fine - eta_coarse) + (integ_fine - integ_coarse)`.
    #[inline]
    pub fn difference(&self) -> f64 {
        (self.eta_fine - self.eta_coarse) + (self.integ_fine - self.integ_coarse)
    }

    #[inline]
    pub fn fine_value(&self) -> f64 {
        self.eta_fine + self.integ_fine
    }
}

/// Runs the chain for `dt` from `path`. The first holding time is drawn fresh
/// at the current state's rate; after each jump the next one uses the new
/// state's rate. Returns the number of exponential draws taken.
#[inline]
fn advance(dec: &ChainDecomposition, path: &mut PathState, dt: f64, rng: &mut RngStream) -> u64 {
    let rate = dec.rate();
    let mut r = rate[path.state];
    if r == 0.0 {
        return 0;
    }
    let mut draws = 1;
    let mut tau = rng.exponential(r);
    while tau < dt {
        let jump = dec.sample_jump(path.state, rng.uniform());
        path.state = jump.target as usize;
        path.sign *= jump.sign();
        path.jumps += 1;
        r = rate[path.state];
        if r == 0.0 {
            break;
        }
        tau += rng.exponential(r);
        draws += 1;
    }
    draws
}

/// Simulates the chain for an interval of length `dt`.
pub fn evolve_interval(
    dec: &ChainDecomposition,
    start: PathState,
    dt: f64,
    stream: &mut RngStream,
) -> PathState {
    let mut path = start;
    advance(dec, &mut path, dt, stream);
    path
}

/// Outcome of a walk over `steps` fine steps: the terminal state, sign, and
/// the exponent sums of the fine and coarse Strang weights (without `dt`).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Walk {
    pub state: usize,
    pub sign: f64,
    pub fine_sum: f64,
    pub coarse_sum: f64,
    pub cost: u64,
}

/// Core walker. `on_step(n, state, sign, fine_sum, coarse_sum)` is called
/// after every fine step `n = 1..=steps`.
#[inline]
pub(crate) fn walk<F>(
    dec: &ChainDecomposition,
    start: usize,
    dt: f64,
    steps: usize,
    rng: &mut RngStream,
    mut on_step: F,
) -> Walk
where
    F: FnMut(usize, usize, f64, f64, f64),
{
    let d = dec.d();
    let mut path = PathState::start(start);
    let mut fine_sum = 0.0;
    let mut coarse_sum = 0.0;
    let mut cost = steps as u64;
    for n in 1..=steps {
        let d_start = d[path.state];
        if n % 2 == 1 {
            coarse_sum += d_start;
        }
        cost += advance(dec, &mut path, dt, rng);
        let d_end = d[path.state];
        fine_sum += 0.5 * (d_start + d_end);
        if n % 2 == 0 {
            coarse_sum += d_end;
        }
        on_step(n, path.state, path.sign, fine_sum, coarse_sum);
    }
    Walk {
        state: path.state,
        sign: path.sign,
        fine_sum,
        coarse_sum,
        cost,
    }
}

fn check_entry(dec: &ChainDecomposition, u: &[f64], i: usize) -> Result<()> {
    if u.len() != dec.n() {
        return Err(Error::Dimension(format!(
            "vector has {} entries, matrix has {} rows",
            u.len(),
            dec.n()
        )));
    }
    if i >= dec.n() {
        return Err(Error::IndexOutOfRange {
            index: i,
            dim: dec.n(),
        });
    }
    Ok(())
}

fn check_coupled_steps(steps: usize) -> Result<()> {
    if steps < 2 || steps % 2 != 0 {
        return Err(Error::Config(format!(
            "coupled functional needs an even step count >= 2, got {steps}"
        )));
    }
    Ok(())
}

/// One sample of the single-entry functional for `(e^{N dt A} u)_i`.
pub fn single_functional(
    dec: &ChainDecomposition,
    u: &[f64],
    i: usize,
    dt: f64,
    steps: usize,
    stream: &mut RngStream,
) -> Result<Sample> {
    check_entry(dec, u, i)?;
    if steps == 0 {
        return Err(Error::Config("step count must be >= 1".into()));
    }
    Ok(single_unchecked(dec, u, i, dt, steps, stream))
}

#[inline]
pub(crate) fn single_unchecked(
    dec: &ChainDecomposition,
    u: &[f64],
    i: usize,
    dt: f64,
    steps: usize,
    rng: &mut RngStream,
) -> Sample {
    let w = walk(dec, i, dt, steps, rng, |_, _, _, _, _| {});
    Sample {
        value: w.sign * (dt * w.fine_sum).exp() * u[w.state],
        cost: w.cost,
    }
}

/// One coupled draw of `(P_l, P_{l-1})` on a shared path of `steps` fine steps.
pub fn coupled_functional(
    dec: &ChainDecomposition,
    u: &[f64],
    i: usize,
    dt: f64,
    steps: usize,
    stream: &mut RngStream,
) -> Result<CoupledSample> {
    check_entry(dec, u, i)?;
    check_coupled_steps(steps)?;
    Ok(coupled_unchecked(dec, u, i, dt, steps, stream))
}

#[inline]
pub(crate) fn coupled_unchecked(
    dec: &ChainDecomposition,
    u: &[f64],
    i: usize,
    dt: f64,
    steps: usize,
    rng: &mut RngStream,
) -> CoupledSample {
    let w = walk(dec, i, dt, steps, rng, |_, _, _, _, _| {});
    let scale = w.sign * u[w.state];
    CoupledSample {
        eta_fine: scale * (dt * w.fine_sum).exp(),
        eta_coarse: scale * (dt * w.coarse_sum).exp(),
        cost: w.cost,
    }
}

/// Inhomogeneous term of the FEM system, evaluated at `(time, node)`.
pub trait Forcing: Sync {
    fn value(&self, time: f64, node: usize) -> f64;
}

impl Forcing for [f64] {
    #[inline]
    fn value(&self, _time: f64, node: usize) -> f64 {
        self[node]
    }
}

impl Forcing for Vec<f64> {
    #[inline]
    fn value(&self, _time: f64, node: usize) -> f64 {
        self[node]
    }
}

/// Time-dependent forcing from a closure.
pub struct ForcingFn<F>(pub F);

impl<F: Fn(f64, usize) -> f64 + Sync> Forcing for ForcingFn<F> {
    fn value(&self, time: f64, node: usize) -> f64 {
        (self.0)(time, node)
    }
}

/// Simpson weights (including the step length) for the fine grid of a level
/// and, when the level is coupled, for its coarse grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureWeights {
    pub fine: Vec<f64>,
    pub coarse: Option<Vec<f64>>,
}

impl QuadratureWeights {
    /// Composite Simpson on `steps` intervals of `dt`; the coarse rule uses
    /// `steps / 2` intervals of `2 dt` and needs `steps % 4 == 0`.
    pub fn simpson(dt: f64, steps: usize, coupled: bool) -> Result<Self> {
        let fine = crate::apps::simpson_weights(steps)?
            .into_iter()
            .map(|w| w * dt)
            .collect();
        let coarse = if coupled {
            Some(
                crate::apps::simpson_weights(steps / 2)?
                    .into_iter()
                    .map(|w| w * 2.0 * dt)
                    .collect(),
            )
        } else {
            None
        };
        Ok(Self { fine, coarse })
    }
}

/// Fine-only FEM functional (the coarsest level of the hierarchy):
/// `u0_j eta + sum_n w_n eta_n F(t - s_n, i_n)` with `t = steps * dt`.
pub fn single_functional_fem<F: Forcing + ?Sized>(
    dec: &ChainDecomposition,
    u0: &[f64],
    forcing: &F,
    i: usize,
    dt: f64,
    weights: &QuadratureWeights,
    stream: &mut RngStream,
) -> Result<Sample> {
    check_entry(dec, u0, i)?;
    let steps = weights.fine.len().saturating_sub(1);
    if steps == 0 {
        return Err(Error::Config("empty quadrature".into()));
    }
    let t = dt * steps as f64;
    let fine = &weights.fine;
    let mut integ = fine[0] * forcing.value(t, i);
    let w = walk(dec, i, dt, steps, stream, |n, state, sign, fine_sum, _| {
        let eta = sign * (dt * fine_sum).exp();
        integ += fine[n] * eta * forcing.value(t - n as f64 * dt, state);
    });
    Ok(Sample {
        value: w.sign * (dt * w.fine_sum).exp() * u0[w.state] + integ,
        cost: w.cost,
    })
}

/// Coupled FEM functional: the coupled pair plus running Simpson
/// accumulators over the same path, so every quadrature node is read off the
/// path generated for the terminal time.
pub fn coupled_functional_fem<F: Forcing + ?Sized>(
    dec: &ChainDecomposition,
    u0: &[f64],
    forcing: &F,
    i: usize,
    dt: f64,
    steps: usize,
    weights: &QuadratureWeights,
    stream: &mut RngStream,
) -> Result<FemCoupledSample> {
    check_entry(dec, u0, i)?;
    check_coupled_steps(steps)?;
    let coarse = weights
        .coarse
        .as_deref()
        .ok_or_else(|| Error::Config("coupled FEM functional needs coarse weights".into()))?;
    if weights.fine.len() != steps + 1 || coarse.len() != steps / 2 + 1 {
        return Err(Error::Dimension(format!(
            "quadrature weights of length ({}, {}) do not match {} steps",
            weights.fine.len(),
            coarse.len(),
            steps
        )));
    }
    let t = dt * steps as f64;
    let fine = &weights.fine;
    let f0 = forcing.value(t, i);
    let mut integ_fine = fine[0] * f0;
    let mut integ_coarse = coarse[0] * f0;
    let w = walk(dec, i, dt, steps, stream, |n, state, sign, fine_sum, coarse_sum| {
        let f = forcing.value(t - n as f64 * dt, state);
        integ_fine += fine[n] * sign * (dt * fine_sum).exp() * f;
        if n % 2 == 0 {
            integ_coarse += coarse[n / 2] * sign * (dt * coarse_sum).exp() * f;
        }
    });
    let scale = w.sign * u0[w.state];
    Ok(FemCoupledSample {
        eta_fine: scale * (dt * w.fine_sum).exp(),
        eta_coarse: scale * (dt * w.coarse_sum).exp(),
        integ_fine,
        integ_coarse,
        terminal_state: w.state,
        cost: w.cost,
    })
}

/// Initial distribution `u_j / sum(u)` for forward (scalar) functionals.
#[derive(Debug, Clone)]
pub struct ForwardSource {
    cdf: Vec<f64>,
    total: f64,
}

impl ForwardSource {
    // Sign-indefinite u could be handled by sampling from |u| and folding
    // sign(u_J) into the path sign; not exposed.
    pub fn new(u: &[f64]) -> Result<Self> {
        if let Some(j) = u.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Unsupported(format!(
                "forward functional needs a finite nonnegative vector; u[{j}] = {}",
                u[j]
            )));
        }
        let total: f64 = u.iter().sum();
        if total <= 0.0 {
            return Err(Error::Unsupported("forward functional needs sum(u) > 0".into()));
        }
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = u
            .iter()
            .map(|&x| {
                acc += x / total;
                acc
            })
            .collect();
        // clamp the last positive bin so inverse-CDF sampling is total
        let last = u.iter().rposition(|&x| x > 0.0).expect("total > 0");
        for c in &mut cdf[last..] {
            *c = 1.0;
        }
        Ok(Self { cdf, total })
    }

    pub fn dim(&self) -> usize {
        self.cdf.len()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    #[inline]
    pub fn sample(&self, uniform: f64) -> usize {
        self.cdf.partition_point(|&c| c <= uniform).min(self.cdf.len() - 1)
    }
}

/// One sample of `sum_i (e^{beta A} u)_i` from the decomposition of `A^T`:
/// start at `J ~ u / U`, walk under `A^T`, weight by `U`.
pub fn forward_scalar_functional(
    dec_t: &ChainDecomposition,
    source: &ForwardSource,
    dt: f64,
    steps: usize,
    stream: &mut RngStream,
) -> Result<Sample> {
    if source.dim() != dec_t.n() {
        return Err(Error::Dimension(format!(
            "source has {} entries, matrix has {} rows",
            source.dim(),
            dec_t.n()
        )));
    }
    if steps == 0 {
        return Err(Error::Config("step count must be >= 1".into()));
    }
    Ok(forward_unchecked(dec_t, source, dt, steps, stream))
}

#[inline]
pub(crate) fn forward_unchecked(
    dec_t: &ChainDecomposition,
    source: &ForwardSource,
    dt: f64,
    steps: usize,
    rng: &mut RngStream,
) -> Sample {
    let start = source.sample(rng.uniform());
    let w = walk(dec_t, start, dt, steps, rng, |_, _, _, _, _| {});
    Sample {
        value: source.total * w.sign * (dt * w.fine_sum).exp(),
        cost: w.cost,
    }
}

/// Coupled version of [`forward_scalar_functional`].
pub fn coupled_forward_functional(
    dec_t: &ChainDecomposition,
    source: &ForwardSource,
    dt: f64,
    steps: usize,
    stream: &mut RngStream,
) -> Result<CoupledSample> {
    if source.dim() != dec_t.n() {
        return Err(Error::Dimension("source and matrix dimensions differ".into()));
    }
    check_coupled_steps(steps)?;
    Ok(coupled_forward_unchecked(dec_t, source, dt, steps, stream))
}

#[inline]
pub(crate) fn coupled_forward_unchecked(
    dec_t: &ChainDecomposition,
    source: &ForwardSource,
    dt: f64,
    steps: usize,
    rng: &mut RngStream,
) -> CoupledSample {
    let start = source.sample(rng.uniform());
    let w = walk(dec_t, start, dt, steps, rng, |_, _, _, _, _| {});
    let scale = source.total * w.sign;
    CoupledSample {
        eta_fine: scale * (dt * w.fine_sum).exp(),
        eta_coarse: scale * (dt * w.coarse_sum).exp(),
        cost: w.cost,
    }
}

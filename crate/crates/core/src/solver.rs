//! Iteration engines: the reference accelerated iteration that forms `y_k`
//! explicitly, the efficient form that tracks `y_k = θ_k² u_k + z̃_k`
//! through residuals, and the non-accelerated baseline obtained from the
//! efficient form by freezing `θ_k = τ/n`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::blocks::{weighted_norm_sq, WeightVector};
use crate::eso::{stepsizes, LipschitzTable, StepsizeKind, StepsizeVector};
use crate::error::{Error, Result};
use crate::losses::{block_gradient, block_gradient_at, residual_update, ResidualPair};
use crate::problem::CompositeProblem;
use crate::sampling::{BlockSampler, SamplingKind, SamplingScheme};

/// `θ_{k+1} = (√(θ⁴ + 4θ²) − θ²)/2`.
pub fn theta_next(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidArgument(format!("theta = {theta} must lie in (0, 1]")));
    }
    Ok(theta_step(theta))
}

#[inline]
fn theta_step(theta: f64) -> f64 {
    let t2 = theta * theta;
    ((t2 * t2 + 4.0 * t2).sqrt() - t2) / 2.0
}

/// Relative residual of `(1 − θ')/θ'² = 1/θ²`.
pub fn theta_identity_residual(theta: f64, next: f64) -> f64 {
    let lhs = (1.0 - next) / (next * next);
    let rhs = 1.0 / (theta * theta);
    (lhs - rhs).abs() / rhs
}

/// The decreasing sequence `θ_0 = τ/n, θ_1, …`.
#[derive(Debug, Clone)]
pub struct ThetaSchedule {
    history: Vec<f64>,
}

impl ThetaSchedule {
    pub fn new(tau: usize, n: usize) -> Result<Self> {
        SamplingScheme::tau_nice(tau).validate(n)?;
        Ok(Self {
            history: vec![tau as f64 / n as f64],
        })
    }

    pub fn current(&self) -> f64 {
        *self.history.last().unwrap()
    }

    pub fn advance(&mut self) -> f64 {
        let next = theta_step(self.current());
        debug_assert!(theta_identity_residual(self.current(), next) <= 1e-11);
        self.history.push(next);
        next
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }
}

/// Coefficients `γ_k^0 … γ_k^k` with `x_k = Σ_l γ_k^l z_l`.
///
/// Needs `θ_0 … θ_{k−1}` in `theta_history`.
pub fn gamma_coeffs(theta_history: &[f64], tau: usize, n: usize, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Ok(vec![1.0]);
    }
    if theta_history.len() < k {
        return Err(Error::InvalidArgument(format!(
            "need {k} theta values, got {}",
            theta_history.len()
        )));
    }
    let ratio = n as f64 / tau as f64;
    let mut gamma = vec![0.0, 1.0];
    for kk in 1..k {
        let th = theta_history[kk];
        let prev = theta_history[kk - 1];
        for g in gamma.iter_mut().take(kk) {
            *g *= 1.0 - th;
        }
        gamma[kk] = th * (1.0 - ratio * prev) + ratio * (prev - th);
        gamma.push(ratio * th);
    }
    Ok(gamma)
}

/// `E[F(x_k) − F*] ≤ 4n²/((k − 1)τ + 2n)² · C` for `k ≥ 1`.
pub fn complexity_bound(k: usize, tau: usize, n: usize, c: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidArgument("the bound holds for k >= 1".into()));
    }
    let (k, tau, n) = (k as f64, tau as f64, n as f64);
    let d = (k - 1.0) * tau + 2.0 * n;
    Ok(4.0 * n * n / (d * d) * c)
}

/// `C = (1 − τ/n)(F(x₀) − F*) + ½‖x₀ − x*‖²_v`.
pub fn complexity_constant(
    problem: &CompositeProblem,
    v: &WeightVector,
    tau: usize,
    x0: &[f64],
    x_star: &[f64],
    f_star: f64,
) -> Result<f64> {
    let n = problem.num_blocks() as f64;
    let d: Vec<f64> = x0.iter().zip(x_star).map(|(a, b)| a - b).collect();
    let dist = weighted_norm_sq(&d, v, &problem.partition)?;
    Ok((1.0 - tau as f64 / n) * (problem.objective(x0) - f_star) + 0.5 * dist)
}

/// Iterations sufficient for an `ε`-accurate solution in expectation,
/// `⌈(2n/τ)(√(C/ε) − 1) + 1⌉`, for `0 < ε ≤ C`.
pub fn iterations_for_accuracy(c: f64, eps: f64, tau: usize, n: usize) -> Result<u64> {
    if !(eps > 0.0 && eps <= c) {
        return Err(Error::InvalidArgument(format!("need 0 < eps <= C, got eps = {eps}, C = {c}")));
    }
    let k = 2.0 * n as f64 / tau as f64 * ((c / eps).sqrt() - 1.0) + 1.0;
    Ok(k.ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Accelerated: `θ_k` follows the schedule.
    Approx,
    /// `θ_k = τ/n` for all `k`; then `u_k = 0` and the iteration is plain
    /// parallel coordinate descent.
    Pcdm,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Approx => "approx",
            Self::Pcdm => "pcdm",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "approx" => Ok(Self::Approx),
            "pcdm" => Ok(Self::Pcdm),
            other => Err(Error::InvalidArgument(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Reference,
    Efficient,
}

/// State of the reference iteration.
#[derive(Debug, Clone)]
pub struct ReferenceState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub theta: f64,
    pub k: usize,
}

impl ReferenceState {
    pub fn new(x0: Vec<f64>, tau: usize, n: usize) -> Self {
        Self {
            y: x0.clone(),
            z: x0.clone(),
            x: x0,
            theta: tau as f64 / n as f64,
            k: 0,
        }
    }
}

/// State of the efficient iteration. `y_k = θ_k² u_k + z̃_k` is never formed.
#[derive(Debug, Clone)]
pub struct EfficientState {
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub rp: ResidualPair,
    pub theta: f64,
    /// `θ_{k−1}`, absent before the first step.
    pub theta_prev: Option<f64>,
    pub k: usize,
    scratch: Vec<f64>,
}

impl EfficientState {
    pub fn new(problem: &CompositeProblem, z0: Vec<f64>, tau: usize) -> Self {
        let u = vec![0.0; z0.len()];
        Self {
            rp: ResidualPair::compute(&problem.matrix, &u, &z0),
            z: z0,
            u,
            theta: tau as f64 / problem.num_blocks() as f64,
            theta_prev: None,
            k: 0,
            scratch: Vec::new(),
        }
    }

    /// Recomputes both residuals from `u` and `z̃`.
    pub fn refresh_residuals(&mut self, problem: &CompositeProblem) {
        self.rp = ResidualPair::compute(&problem.matrix, &self.u, &self.z);
    }

    /// `x_k`: `z̃_0` at `k = 0`, else `θ_{k−1}² u_k + z̃_k`.
    pub fn recover_x(&self) -> Vec<f64> {
        match self.theta_prev {
            None => self.z.clone(),
            Some(t) => {
                let t2 = t * t;
                self.u.iter().zip(&self.z).map(|(u, z)| t2 * u + z).collect()
            }
        }
    }

    /// `A x_k` from the residuals.
    pub fn x_residual(&self) -> Vec<f64> {
        match self.theta_prev {
            None => self.rp.r_z.clone(),
            Some(t) => self.rp.combined(t * t),
        }
    }
}

/// Shared, read-only part of an iteration: the problem and the stepsizes.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    problem: &'a CompositeProblem,
    v: Vec<f64>,
    tau: f64,
    n: f64,
}

impl<'a> Stepper<'a> {
    /// Blocks with a zero stepsize do not enter `f`; they get `v_i = 1`, which
    /// keeps every prox step well posed without affecting the overapproximation.
    pub fn new(problem: &'a CompositeProblem, v: &WeightVector, tau: usize) -> Result<Self> {
        let n = problem.num_blocks();
        problem.partition.check_weights(v)?;
        SamplingScheme::tau_nice(tau).validate(n)?;
        let v = v
            .as_slice()
            .iter()
            .map(|&w| if w > 0.0 { w } else { 1.0 })
            .collect();
        Ok(Self {
            problem,
            v,
            tau: tau as f64,
            n: n as f64,
        })
    }

    pub fn problem(&self) -> &CompositeProblem {
        self.problem
    }

    /// Stepsizes as used by the iteration.
    pub fn effective_stepsizes(&self) -> &[f64] {
        &self.v
    }

    /// Prox stiffness `n θ v_i / τ`.
    #[inline]
    pub fn stiffness(&self, theta: f64, i: usize) -> f64 {
        self.n * theta * self.v[i] / self.tau
    }

    /// One iteration of the reference form on the block set `set`.
    pub fn step_reference(&self, st: &mut ReferenceState, set: &[usize], mode: Mode) {
        let pb = self.problem;
        let p = &pb.partition;
        let th = st.theta;
        for ((y, x), z) in st.y.iter_mut().zip(&st.x).zip(&st.z) {
            *y = (1.0 - th) * x + th * z;
        }
        let r = pb.matrix.mul_vec(&st.y);
        st.x.copy_from_slice(&st.y);

        let scale = self.n / self.tau * th;
        let mut g = Vec::new();
        let mut next = Vec::new();
        for &i in set {
            let range = p.range(i);
            g.resize(range.len(), 0.0);
            next.resize(range.len(), 0.0);
            block_gradient_at(&pb.loss, &pb.matrix, p, i, &r, &mut g);
            pb.reg
                .prox_step_unchecked(&st.z[range.clone()], &g, self.stiffness(th, i), &mut next);
            for (c, &zn) in range.zip(&next) {
                st.x[c] = st.y[c] + scale * (zn - st.z[c]);
                st.z[c] = zn;
            }
        }
        if mode == Mode::Approx {
            st.theta = theta_step(th);
        }
        st.k += 1;
    }

    fn new_block_value(&self, st: &EfficientState, theta_sq: f64, i: usize, out: &mut [f64]) {
        let pb = self.problem;
        let range = pb.partition.range(i);
        let mut g = vec![0.0; range.len()];
        block_gradient(&pb.loss, &pb.matrix, &pb.partition, i, theta_sq, &st.rp, &mut g);
        pb.reg
            .prox_step_unchecked(&st.z[range], &g, self.stiffness(st.theta, i), out);
    }

    /// One iteration of the efficient form on the block set `set`.
    ///
    /// Every block step is computed from the residuals of iteration `k`
    /// before any of them is applied; the residual updates are then
    /// accumulated in the order of `set`. With a thread pool, only the first
    /// phase runs in parallel, so results do not depend on the thread count.
    pub fn step_efficient(&self, st: &mut EfficientState, set: &[usize], mode: Mode, pool: Option<&ThreadPool>) {
        let pb = self.problem;
        let p = &pb.partition;
        let th = st.theta;
        let th2 = th * th;

        let mut scratch = std::mem::take(&mut st.scratch);
        scratch.clear();
        match pool {
            Some(pool) if set.len() > 1 => {
                let blocks: Vec<Vec<f64>> = pool.install(|| {
                    set.par_iter()
                        .map(|&i| {
                            let mut out = vec![0.0; p.block_size(i)];
                            self.new_block_value(st, th2, i, &mut out);
                            out
                        })
                        .collect()
                });
                for b in blocks {
                    scratch.extend_from_slice(&b);
                }
            }
            _ => {
                for &i in set {
                    let start = scratch.len();
                    scratch.resize(start + p.block_size(i), 0.0);
                    self.new_block_value(st, th2, i, &mut scratch[start..]);
                }
            }
        }

        let coeff_u = match mode {
            Mode::Approx => -(1.0 - self.n / self.tau * th) / th2,
            Mode::Pcdm => 0.0,
        };
        let mut t = Vec::new();
        let mut offset = 0;
        for &i in set {
            let range = p.range(i);
            let len = range.len();
            let next = &scratch[offset..offset + len];
            offset += len;
            t.clear();
            t.extend(next.iter().zip(&st.z[range.clone()]).map(|(zn, z)| zn - z));
            st.z[range.clone()].copy_from_slice(next);
            if coeff_u != 0.0 {
                for (u, tc) in st.u[range].iter_mut().zip(&t) {
                    *u += coeff_u * tc;
                }
            }
            residual_update(&mut st.rp, &pb.matrix, p, i, &t, coeff_u);
        }
        st.scratch = scratch;

        st.theta_prev = Some(th);
        if mode == Mode::Approx {
            st.theta = theta_step(th);
            debug_assert!(theta_identity_residual(th, st.theta) <= 1e-11);
        }
        st.k += 1;
    }
}

/// `x_k` of an efficient-form state.
pub fn recover_x(state: &EfficientState) -> Vec<f64> {
    state.recover_x()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub k: usize,
    pub elapsed_s: f64,
    pub objective: f64,
    /// `‖x_k − x_ref‖₂` when a reference point was supplied.
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunLog {
    pub metadata: Vec<(String, String)>,
    pub records: Vec<LogRecord>,
}

impl RunLog {
    pub fn push(&mut self, rec: LogRecord) {
        debug_assert!(self.records.last().is_none_or(|r| r.k < rec.k));
        self.records.push(rec);
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub tau: usize,
    pub sampling: SamplingKind,
    pub mode: Mode,
    pub engine: Engine,
    pub stepsizes: StepsizeKind,
    pub max_iters: usize,
    pub seed: u64,
    pub log_period: usize,
    /// Stop once the relative decrease of `F` over a 50-iteration window
    /// falls below this value.
    pub tolerance: Option<f64>,
    /// Recompute the residuals exactly every this many iterations.
    pub recompute_period: Option<usize>,
    pub threads: usize,
    pub x0: Option<Vec<f64>>,
    /// Point to which the log records the Euclidean distance.
    pub x_ref: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tau: 1,
            sampling: SamplingKind::TauNice,
            mode: Mode::Approx,
            engine: Engine::Efficient,
            stepsizes: StepsizeKind::Fr,
            max_iters: 1000,
            seed: 0,
            log_period: 1,
            tolerance: None,
            recompute_period: Some(10_000),
            threads: 1,
            x0: None,
            x_ref: None,
        }
    }
}

pub const TOLERANCE_WINDOW: usize = 50;

#[derive(Debug, Clone)]
pub struct RunResult {
    pub x: Vec<f64>,
    pub log: RunLog,
    pub iterations: usize,
    pub stepsizes: StepsizeVector,
}

impl SolverConfig {
    fn validate(&self, problem: &CompositeProblem) -> Result<Vec<f64>> {
        let n = problem.num_blocks();
        SamplingScheme::new(self.sampling, self.tau)
            .validate(n)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.log_period == 0 {
            return Err(Error::Config("log period must be at least 1".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("thread count must be at least 1".into()));
        }
        if self.recompute_period == Some(0) {
            return Err(Error::Config("residual recompute period must be at least 1".into()));
        }
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0) {
                return Err(Error::Config(format!("tolerance {tol} must be positive")));
            }
        }
        if self.engine == Engine::Reference && self.threads > 1 {
            return Err(Error::Config("the reference engine is single-threaded".into()));
        }
        let x0 = match &self.x0 {
            Some(x0) => {
                problem.partition.check_vector("x0", x0)?;
                x0.clone()
            }
            None => vec![0.0; problem.dim()],
        };
        if let Some(r) = &self.x_ref {
            problem.partition.check_vector("x_ref", r)?;
        }
        if !problem.reg.value(&x0).is_finite() {
            return Err(Error::Config("x0 lies outside the domain of the regularizer".into()));
        }
        Ok(x0)
    }

    fn metadata(&self, problem: &CompositeProblem) -> Vec<(String, String)> {
        let sampling = match self.sampling {
            SamplingKind::TauNice => "tau-nice",
            SamplingKind::TauIndependent => "tau-independent",
        };
        let engine = match self.engine {
            Engine::Reference => "reference",
            Engine::Efficient => "efficient",
        };
        [
            ("seed", self.seed.to_string()),
            ("tau", self.tau.to_string()),
            ("sampling", sampling.to_string()),
            ("mode", self.mode.to_string()),
            ("engine", engine.to_string()),
            ("stepsizes", self.stepsizes.to_string()),
            ("loss", problem.loss.name().to_string()),
            ("reg", problem.reg.name().to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

enum AnyState {
    Reference(ReferenceState),
    Efficient(EfficientState),
}

impl AnyState {
    fn objective(&self, problem: &CompositeProblem) -> f64 {
        match self {
            Self::Reference(st) => problem.objective(&st.x),
            Self::Efficient(st) => problem.objective_with_residual(&st.recover_x(), &st.x_residual()),
        }
    }

    fn record(&self, problem: &CompositeProblem, k: usize, elapsed_s: f64, x_ref: Option<&[f64]>) -> LogRecord {
        let (objective, x) = match self {
            Self::Reference(st) => (problem.objective(&st.x), None),
            Self::Efficient(st) => {
                let x = st.recover_x();
                (problem.objective_with_residual(&x, &st.x_residual()), Some(x))
            }
        };
        let distance = x_ref.map(|r| {
            let x = x.unwrap_or_else(|| self.x());
            x.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        });
        LogRecord {
            k,
            elapsed_s,
            objective,
            distance,
        }
    }

    fn x(&self) -> Vec<f64> {
        match self {
            Self::Reference(st) => st.x.clone(),
            Self::Efficient(st) => st.recover_x(),
        }
    }
}

/// Runs the configured iteration until `max_iters` or the tolerance rule.
pub fn run(problem: &CompositeProblem, config: &SolverConfig) -> Result<RunResult> {
    let x0 = config.validate(problem)?;
    let n = problem.num_blocks();
    let table = LipschitzTable::for_problem(problem)?;
    let steps = stepsizes(config.stepsizes, &table, problem, config.tau)
        .map_err(|e| Error::Config(e.to_string()))?;
    let stepper = Stepper::new(problem, &steps.v, config.tau)?;
    let mut sampler = BlockSampler::new(SamplingScheme::new(config.sampling, config.tau), n, config.seed)?;
    let pool = if config.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?,
        )
    } else {
        None
    };

    let mut state = match config.engine {
        Engine::Reference => AnyState::Reference(ReferenceState::new(x0, config.tau, n)),
        Engine::Efficient => AnyState::Efficient(EfficientState::new(problem, x0, config.tau)),
    };

    let start = Instant::now();
    let mut log = RunLog {
        metadata: config.metadata(problem),
        records: Vec::new(),
    };
    let x_ref = config.x_ref.as_deref();
    log.push(state.record(problem, 0, 0.0, x_ref));
    let mut window_start = log.records[0].objective;

    let mut k = 0;
    while k < config.max_iters {
        let set = sampler.draw();
        match &mut state {
            AnyState::Reference(st) => stepper.step_reference(st, &set, config.mode),
            AnyState::Efficient(st) => {
                stepper.step_efficient(st, &set, config.mode, pool.as_ref());
                if config.recompute_period.is_some_and(|r| st.k % r == 0) {
                    st.refresh_residuals(problem);
                }
            }
        }
        k += 1;

        let mut objective = None;
        if k % config.log_period == 0 || k == config.max_iters {
            let rec = state.record(problem, k, start.elapsed().as_secs_f64(), x_ref);
            objective = Some(rec.objective);
            log.push(rec);
        }
        if let Some(tol) = config.tolerance {
            if k % TOLERANCE_WINDOW == 0 {
                let f = objective.unwrap_or_else(|| state.objective(problem));
                let stalled = window_start - f <= tol * window_start.abs().max(f64::MIN_POSITIVE);
                window_start = f;
                if stalled {
                    if objective.is_none() {
                        log.push(state.record(problem, k, start.elapsed().as_secs_f64(), x_ref));
                    }
                    break;
                }
            }
        }
    }

    // x_k is a convex combination of points in dom ψ; projecting removes the
    // rounding that can leave it a few ulps outside.
    let mut x = state.x();
    problem.reg.project_domain(&mut x);
    Ok(RunResult {
        x,
        log,
        iterations: k,
        stepsizes: steps,
    })
}

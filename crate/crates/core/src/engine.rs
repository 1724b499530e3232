//! The outer optimisation loop: GP-UCB with automatic search-space expansion
//! and the fixed-box and volume-doubling baselines.
//!
//! Each iteration `t`:
//! 1. `β_t` from the schedule of the current space (`t_local = t − t_k`);
//! 2. maximise the UCB of the posterior on `D_{t−1}` over the region;
//! 3. evaluate, append to the data;
//! 4. compute `r_b` and, when `r_b ≤ ε` (or `t = 1`), rebuild the region
//!    around all observations with radius `d_ε` and start a new epoch.

use std::fmt;
use std::str::FromStr;

use crate::acq_opt::{maximize_over_box_with, refined_maximize, MultiStartConfig, RefinedBranch};
use crate::acquisition::{asymptotic_value, BetaSchedule, Ucb, EXPERIMENT_BETA_SCALE};
use crate::benchlab::{latin_hypercube, Benchmark};
use crate::bounds::BoxBounds;
use crate::error::{invalid, Result, UboError};
use crate::expansion::{build_region, expansion_radius, regret_upper_bound, SearchRegion, TriggerState};
use crate::gp::{fit_hyperparameters, Dataset, FitConfig, GpPosterior, KernelFamily, KernelSpec, Standardization};
use crate::rng::derive_seed;
use crate::scalar::Scalar;

/// Search-space policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Expansion by the analytic radius and regret-bound trigger.
    Ubo,
    /// GP-UCB on the fixed initial box.
    Vanilla,
    /// GP-UCB with the box volume doubled every `3d` iterations.
    VolumeDoubling,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Ubo, Strategy::Vanilla, Strategy::VolumeDoubling];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Ubo => "ubo",
            Strategy::Vanilla => "vanilla",
            Strategy::VolumeDoubling => "volx2",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = UboError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ubo" | "gpucb-ubo" => Ok(Strategy::Ubo),
            "vanilla" | "vanilla-fixed-box" | "gpucb-vanilla" => Ok(Strategy::Vanilla),
            "volx2" | "volume-doubling" | "gpucb-volx2" => Ok(Strategy::VolumeDoubling),
            other => Err(invalid(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Black-box objective to maximise.
pub trait Objective<T>: Sync {
    fn evaluate(&self, x: &[T]) -> T;
}

impl<T, F> Objective<T> for F
where
    F: Fn(&[T]) -> T + Sync,
{
    fn evaluate(&self, x: &[T]) -> T {
        self(x)
    }
}

impl<T: Scalar> Objective<T> for Benchmark {
    fn evaluate(&self, x: &[T]) -> T {
        Benchmark::evaluate(self, x)
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T> {
    pub strategy: Strategy,
    pub initial_box: BoxBounds<T>,
    /// Accuracy target `ε` in objective units.
    pub epsilon: T,
    pub delta: T,
    pub beta_scale: T,
    pub beta_a: T,
    pub beta_b: T,
    /// Iterations after the initial design.
    pub budget: usize,
    pub init_count: usize,
    pub seed: u64,
    pub kernel: KernelFamily,
    /// Refit hyperparameters every this many new observations.
    pub refit_every: usize,
    /// Fixed noise variance on the standardised scale; `None` fits it.
    pub noise: Option<T>,
    pub optimizer: MultiStartConfig,
}

impl<T: Scalar> RunConfig<T> {
    /// Defaults: `ε = 0.05`, `δ = 0.1`, `β` scaled by 1/5, budget `10d`,
    /// `3d` initial points, squared-exponential kernel refit every iteration.
    pub fn new(strategy: Strategy, initial_box: BoxBounds<T>) -> Self {
        let d = initial_box.dim();
        Self {
            strategy,
            initial_box,
            epsilon: T::lit(0.05),
            delta: T::lit(0.1),
            beta_scale: T::lit(EXPERIMENT_BETA_SCALE),
            beta_a: T::one(),
            beta_b: T::one(),
            budget: 10 * d,
            init_count: 3 * d,
            seed: 0,
            kernel: KernelFamily::SquaredExponential,
            refit_every: 1,
            noise: None,
            optimizer: MultiStartConfig::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.initial_box.dim()
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_box.is_degenerate() {
            return Err(invalid("initial box must have positive extent in every dimension"));
        }
        if !(self.epsilon > T::zero()) || !self.epsilon.is_finite() {
            return Err(invalid(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.delta > T::zero() && self.delta < T::one()) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.beta_scale > T::zero()) {
            return Err(invalid(format!("beta_scale must be > 0, got {}", self.beta_scale)));
        }
        if !(self.beta_a > T::zero() && self.beta_b > T::zero()) {
            return Err(invalid("beta constants a, b must be > 0"));
        }
        if self.init_count < 2 {
            return Err(invalid(format!("init count must be >= 2, got {}", self.init_count)));
        }
        if let Some(v) = self.noise {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(invalid(format!("noise must be > 0, got {v}")));
            }
        }
        if self.refit_every == 0 {
            return Err(invalid("refit_every must be >= 1"));
        }
        if self.optimizer.starts == 0 {
            return Err(invalid("optimizer needs at least one start"));
        }
        Ok(())
    }
}

/// Notes attached to a trace row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceFlag {
    /// Row belongs to the initial design.
    Init,
    /// Expansion forced by `t = 1`.
    ForcedExpansion,
    /// `ε` exceeded `4√β·θ` and was clamped for the radius.
    EpsilonClamped,
    /// Hyperparameters fell back to defaults (too little data).
    DefaultKernel,
    /// Suggestion came from a per-ball search.
    PerBall,
    /// No ball qualified; best per-ball maximum used.
    PerBallFallback,
    /// Box volume doubled after this iteration.
    Doubled,
}

impl TraceFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceFlag::Init => "init",
            TraceFlag::ForcedExpansion => "forced_expansion",
            TraceFlag::EpsilonClamped => "epsilon_clamped",
            TraceFlag::DefaultKernel => "default_kernel",
            TraceFlag::PerBall => "per_ball",
            TraceFlag::PerBallFallback => "per_ball_fallback",
            TraceFlag::Doubled => "doubled",
        }
    }
}

impl fmt::Display for TraceFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of a run trace. Initial-design rows have `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<T> {
    pub t: usize,
    pub t_local: Option<usize>,
    /// Expansion index of the region the point was suggested from.
    pub k: usize,
    pub beta: Option<T>,
    pub x: Vec<T>,
    pub y: T,
    pub best_y: T,
    pub r_b: Option<T>,
    /// The region changed after this iteration.
    pub expanded: bool,
    /// Radius of the region built after this iteration.
    pub d_eps: Option<T>,
    /// Search box at suggestion time.
    pub lo: Vec<T>,
    pub hi: Vec<T>,
    pub lambda_max: Option<T>,
    pub weight_bound: Option<T>,
    pub flags: Vec<TraceFlag>,
}

/// Full record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<T> {
    pub strategy: Strategy,
    pub seed: u64,
    pub dim: usize,
    pub records: Vec<IterationRecord<T>>,
    /// Best observed point and its value.
    pub recommendation: Vec<T>,
    pub recommendation_value: T,
    /// Search box in force after the last iteration.
    pub final_box: BoxBounds<T>,
    pub expansions: usize,
    /// Set when the run stopped early; holds the reason.
    pub incomplete: Option<String>,
}

impl<T: Scalar> RunTrace<T> {
    /// Best-so-far value after every row (initial design included).
    pub fn best_curve(&self) -> Vec<T> {
        self.records.iter().map(|r| r.best_y).collect()
    }

    /// Rows after the initial design.
    pub fn iterations(&self) -> impl Iterator<Item = &IterationRecord<T>> {
        self.records.iter().filter(|r| r.t > 0)
    }

    pub fn is_complete(&self) -> bool {
        self.incomplete.is_none()
    }
}

const STREAM_LHS: u64 = 1;
const STREAM_FIT: u64 = 2;
const STREAM_ACQ: u64 = 3;

/// Largest fraction of `4√β·θ` that `ε` may take when computing the radius.
const EPSILON_CLAMP: f64 = 3.99 / 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Policy {
    Expand,
    Fixed { probe_trigger: bool },
    Doubling,
}

struct Surrogate<T> {
    posterior: GpPosterior<T>,
    output: Standardization<T>,
    used_default: bool,
}

struct Runner<'a, T, O: ?Sized> {
    config: &'a RunConfig<T>,
    objective: &'a O,
    data: Dataset<T>,
    records: Vec<IterationRecord<T>>,
    best: Option<(usize, T)>,
    hyper: Option<(KernelSpec<T>, T, bool)>,
    hyper_n: usize,
}

impl<'a, T: Scalar, O: Objective<T> + ?Sized> Runner<'a, T, O> {
    fn new(config: &'a RunConfig<T>, objective: &'a O) -> Result<Self> {
        Ok(Self {
            config,
            objective,
            data: Dataset::empty(config.dim(), T::zero())?,
            records: Vec::new(),
            best: None,
            hyper: None,
            hyper_n: 0,
        })
    }

    fn best_y(&self) -> T {
        self.best.map(|(_, v)| v).unwrap_or(T::neg_infinity())
    }

    fn evaluate(&mut self, x: Vec<T>) -> Result<T> {
        let y = self.objective.evaluate(&x);
        if !y.is_finite() {
            return Err(UboError::Objective(format!("non-finite value {y} at {x:?}")));
        }
        let i = self.data.len();
        self.data.push(x, y)?;
        if self.best.map_or(true, |(_, b)| y > b) {
            self.best = Some((i, y));
        }
        Ok(y)
    }

    /// Posterior on the current data (standardised), refitting on cadence.
    fn surrogate(&mut self, region: &BoxBounds<T>) -> Result<Surrogate<T>> {
        let n = self.data.len();
        let since_init = n.saturating_sub(self.config.init_count);
        let due = self.hyper.is_none() || (n != self.hyper_n && since_init % self.config.refit_every == 0);
        let (std_data, output): (Dataset<T>, Standardization<T>) = self.data.standardized();
        if due {
            let diameter = region.diameter().max(self.data_diameter());
            let mut fit_cfg = FitConfig::new(self.config.kernel);
            fit_cfg.max_iter = self.config.optimizer.max_iter;
            if let Some(v) = self.config.noise {
                fit_cfg.noise_bounds = (v, v);
                fit_cfg.default_noise = v;
            }
            let fit = fit_hyperparameters(&std_data, &fit_cfg, diameter, derive_seed(self.config.seed, STREAM_FIT, n as u64))?;
            self.hyper = Some((fit.kernel, fit.noise, fit.used_default));
            self.hyper_n = n;
        }
        let (kernel, noise, used_default) = self.hyper.clone().expect("hyperparameters set");
        let posterior = GpPosterior::new(std_data.with_noise(noise), kernel)?;
        Ok(Surrogate { posterior, output, used_default })
    }

    fn data_diameter(&self) -> T {
        let pts = self.data.points();
        let Some(first) = pts.first() else { return T::zero() };
        let (mut lo, mut hi) = (first.clone(), first.clone());
        for p in pts {
            for j in 0..p.len() {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
        }
        lo.iter().zip(&hi).map(|(&a, &b)| (b - a) * (b - a)).sum::<T>().sqrt()
    }

    fn run(mut self, policy: Policy) -> RunTrace<T> {
        let cfg = self.config;
        let d = cfg.dim();
        let mut region = SearchRegion::user(cfg.initial_box.clone());
        let mut expansions = 0;
        let outcome = self.run_loop(policy, d, &mut region, &mut expansions);
        let (recommendation, recommendation_value) = match self.best {
            Some((i, v)) => (self.data.points()[i].clone(), v),
            None => (cfg.initial_box.center(), T::nan()),
        };
        RunTrace {
            strategy: cfg.strategy,
            seed: cfg.seed,
            dim: d,
            records: self.records,
            recommendation,
            recommendation_value,
            final_box: region.hypercube().clone(),
            expansions,
            incomplete: outcome.err().map(|e| e.to_string()),
        }
    }

    fn run_loop(&mut self, policy: Policy, d: usize, region: &mut SearchRegion<T>, expansions: &mut usize) -> Result<()> {
        let cfg = self.config;
        let design = latin_hypercube(&cfg.initial_box, cfg.init_count, derive_seed(cfg.seed, STREAM_LHS, 0));
        for x in design {
            let y = self.evaluate(x.clone())?;
            self.records.push(IterationRecord {
                t: 0,
                t_local: None,
                k: 0,
                beta: None,
                x,
                y,
                best_y: self.best_y(),
                r_b: None,
                expanded: false,
                d_eps: None,
                lo: cfg.initial_box.lo().to_vec(),
                hi: cfg.initial_box.hi().to_vec(),
                lambda_max: None,
                weight_bound: None,
                flags: vec![TraceFlag::Init],
            });
        }

        let mut trigger = TriggerState::new(cfg.epsilon)?;
        for t in 1..=cfg.budget {
            let t_local = match policy {
                Policy::Expand => trigger.t_local(t),
                _ => t,
            };
            let bounds = region.hypercube().clone();
            let schedule = BetaSchedule::new(cfg.delta, d, bounds.longest_side(), cfg.beta_scale)?
                .with_constants(cfg.beta_a, cfg.beta_b)?;
            let beta = schedule.beta(t_local)?;
            let sur = self.surrogate(&bounds)?;
            let mut flags = Vec::new();
            if sur.used_default {
                flags.push(TraceFlag::DefaultKernel);
            }
            let acq = Ucb::new(&sur.posterior, beta);
            let eps_model = cfg.epsilon / sur.output.scale;
            let incumbent = self.best.map(|(i, _)| self.data.points()[i].clone());
            let acq_seed = derive_seed(cfg.seed, STREAM_ACQ, t as u64);
            let (x_t, ucb_t) = if region.is_user_box() {
                let f = |x: &[T]| acq.value_unchecked(x);
                let m = maximize_over_box_with(&f, &bounds, acq_seed, incumbent.as_deref(), &cfg.optimizer)?;
                (m.point, m.value)
            } else {
                let s = refined_maximize(&sur.posterior, beta, eps_model, region, acq_seed, incumbent.as_deref(), &cfg.optimizer)?;
                match s.branch {
                    RefinedBranch::Hypercube => {}
                    RefinedBranch::Ball(_) => flags.push(TraceFlag::PerBall),
                    RefinedBranch::Fallback => flags.push(TraceFlag::PerBallFallback),
                }
                (s.point, s.value)
            };
            let y_t = self.evaluate(x_t.clone())?;

            let mut r_b = None;
            let mut expanded = false;
            let mut d_eps = None;
            let mut lambda_max = None;
            let mut weight_bound = None;
            let k_at_suggestion = region.index();
            match policy {
                Policy::Expand => {
                    let bound = objective_units(regret_upper_bound(&acq, ucb_t, self.data.points(), t_local)?, t_local, &sur.output);
                    r_b = Some(bound);
                    if trigger.observe(t, bound) {
                        if t == 1 && bound > cfg.epsilon {
                            flags.push(TraceFlag::ForcedExpansion);
                        }
                        let updated = self.surrogate(&bounds)?;
                        let q = updated.posterior.expansion_quantities()?;
                        let kernel = updated.posterior.kernel();
                        let eps_updated = cfg.epsilon / updated.output.scale;
                        let limit = T::lit(4.0 * EPSILON_CLAMP) * asymptotic_value(beta, kernel.theta());
                        let eps = if eps_updated >= limit {
                            flags.push(TraceFlag::EpsilonClamped);
                            limit
                        } else {
                            eps_updated
                        };
                        let radius = expansion_radius(&q, kernel, beta, eps)?;
                        *region = build_region(self.data.points(), radius.radius)?.with_index(region.index() + 1);
                        *expansions += 1;
                        expanded = true;
                        d_eps = Some(radius.radius);
                        lambda_max = Some(q.lambda_max);
                        weight_bound = Some(q.weight_bound);
                    }
                }
                Policy::Fixed { probe_trigger } => {
                    if probe_trigger {
                        let bound = regret_upper_bound(&acq, ucb_t, self.data.points(), t_local)?;
                        r_b = Some(objective_units(bound, t_local, &sur.output));
                    }
                }
                Policy::Doubling => {
                    if t % (3 * d) == 0 {
                        let factor = T::lit(2.0).powf(T::one() / T::from_count(d));
                        *region = SearchRegion::user(bounds.scaled(factor)).with_index(region.index() + 1);
                        *expansions += 1;
                        expanded = true;
                        flags.push(TraceFlag::Doubled);
                    }
                }
            }
            self.records.push(IterationRecord {
                t,
                t_local: Some(t_local),
                k: k_at_suggestion,
                beta: Some(beta),
                x: x_t,
                y: y_t,
                best_y: self.best_y(),
                r_b,
                expanded,
                d_eps,
                lo: bounds.lo().to_vec(),
                hi: bounds.hi().to_vec(),
                lambda_max,
                weight_bound,
                flags,
            });
        }
        Ok(())
    }
}

/// Rescales a bound computed on standardised outputs; the `1/t_local²`
/// term is kept as is.
fn objective_units<T: Scalar>(bound: T, t_local: usize, output: &Standardization<T>) -> T {
    let tl = T::from_count(t_local);
    let slack = T::one() / (tl * tl);
    (bound - slack) * output.scale + slack
}

fn execute<T: Scalar, O: Objective<T> + ?Sized>(config: &RunConfig<T>, objective: &O, policy: Policy) -> Result<RunTrace<T>> {
    config.validate()?;
    Ok(Runner::new(config, objective)?.run(policy))
}

/// GP-UCB with automatic expansion of the search space.
///
/// Configuration errors are returned as `Err`; failures during the run
/// (objective or numerics) yield a partial trace with `incomplete` set.
pub fn run_ubo<T: Scalar, O: Objective<T> + ?Sized>(config: &RunConfig<T>, objective: &O) -> Result<RunTrace<T>> {
    execute(config, objective, Policy::Expand)
}

/// Fixed-box or volume-doubling GP-UCB according to `config.strategy`.
pub fn run_baseline<T: Scalar, O: Objective<T> + ?Sized>(config: &RunConfig<T>, objective: &O) -> Result<RunTrace<T>> {
    match config.strategy {
        Strategy::Vanilla => execute(config, objective, Policy::Fixed { probe_trigger: false }),
        Strategy::VolumeDoubling => execute(config, objective, Policy::Doubling),
        Strategy::Ubo => Err(invalid("run_baseline called with the expansion strategy")),
    }
}

/// Dispatches on `config.strategy`.
pub fn run<T: Scalar, O: Objective<T> + ?Sized>(config: &RunConfig<T>, objective: &O) -> Result<RunTrace<T>> {
    match config.strategy {
        Strategy::Ubo => run_ubo(config, objective),
        _ => run_baseline(config, objective),
    }
}

/// GP-UCB on the fixed initial box with the regret bound `r_b` recorded at
/// every iteration (`t_local = t`) and no expansion. Used to check that the
/// trigger condition is eventually met inside a single space.
pub fn trigger_probe<T: Scalar, O: Objective<T> + ?Sized>(config: &RunConfig<T>, objective: &O) -> Result<RunTrace<T>> {
    execute(config, objective, Policy::Fixed { probe_trigger: true })
}

//! Experimental protocol: initial box placement, Latin-hypercube designs,
//! repetition fan-out and aggregation of best-so-far curves.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;

use crate::benchlab::functions::Benchmark;
use crate::bounds::BoxBounds;
use crate::engine::{run, RunConfig, RunTrace, Strategy};
use crate::error::{invalid, Result};
use crate::rng::{derive_seed, rng_from};
use crate::scalar::Scalar;

/// Initial box side as a fraction of the canonical domain side.
pub const INITIAL_BOX_FRACTION: f64 = 0.2;

const STREAM_PLACEMENT: u64 = 11;

/// Box with sides `0.2 ×` the canonical sides, centred uniformly at random in
/// the canonical domain and shifted back inside it where it would stick out.
pub fn place_initial_box<T: Scalar>(benchmark: &Benchmark, seed: u64) -> BoxBounds<T> {
    let domain = benchmark.domain();
    let mut rng = rng_from(derive_seed(seed, STREAM_PLACEMENT, 0));
    let mut lo = Vec::with_capacity(domain.dim());
    let mut hi = Vec::with_capacity(domain.dim());
    for j in 0..domain.dim() {
        let side = INITIAL_BOX_FRACTION * domain.side(j);
        let center = domain.lo()[j] + rng.random::<f64>() * domain.side(j);
        let l = (center - side / 2.0).max(domain.lo()[j]).min(domain.hi()[j] - side);
        lo.push(T::lit(l));
        hi.push(T::lit(l + side));
    }
    BoxBounds::new(lo, hi).expect("placement inside a valid domain")
}

/// Like [`place_initial_box`] but redraws until no known maximiser lies in
/// the box. Returns the box and the number of draws it took.
pub fn place_initial_box_excluding_argmax<T: Scalar>(benchmark: &Benchmark, seed: u64) -> (BoxBounds<T>, usize) {
    let argmax: Vec<Vec<T>> =
        benchmark.argmax().iter().map(|a| a.iter().map(|&v| T::lit(v)).collect()).collect();
    for draw in 0u64.. {
        let b = place_initial_box::<T>(benchmark, derive_seed(seed, STREAM_PLACEMENT, draw + 1));
        if argmax.iter().all(|a| !b.contains(a)) {
            return (b, draw as usize + 1);
        }
    }
    unreachable!()
}

/// `count` points with exactly one point per equal-width stratum in every
/// one-dimensional projection.
pub fn latin_hypercube<T: Scalar>(bounds: &BoxBounds<T>, count: usize, seed: u64) -> Vec<Vec<T>> {
    let d = bounds.dim();
    let mut rng = rng_from(seed);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(d);
    for _ in 0..d {
        let mut strata: Vec<usize> = (0..count).collect();
        strata.shuffle(&mut rng);
        columns.push(strata.into_iter().map(|s| (s as f64 + rng.random::<f64>()) / count as f64).collect());
    }
    (0..count)
        .map(|i| {
            let u: Vec<T> = (0..d).map(|j| T::lit(columns[j][i])).collect();
            bounds.clamp(&bounds.from_unit(&u))
        })
        .collect()
}

/// Where the initial box is placed for each repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// Uniformly random centre.
    #[default]
    Random,
    /// Random centre, redrawn until the box excludes the known maximiser.
    ArgmaxOutside,
}

impl std::str::FromStr for Placement {
    type Err = crate::error::UboError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Placement::Random),
            "outside" | "argmax_outside" => Ok(Placement::ArgmaxOutside),
            other => Err(invalid(format!("unknown placement `{other}`"))),
        }
    }
}

impl std::fmt::Display for Placement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Placement::Random => "random",
            Placement::ArgmaxOutside => "outside",
        })
    }
}

/// Settings shared by every repetition of a benchmark experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSettings<T> {
    pub epsilon: T,
    pub delta: T,
    pub beta_scale: T,
    /// Budget is `budget_multiplier × d` iterations.
    pub budget_multiplier: usize,
    /// Initial design is `init_multiplier × d` points.
    pub init_multiplier: usize,
    pub kernel: crate::gp::KernelFamily,
    pub refit_every: usize,
    pub noise: Option<T>,
    pub placement: Placement,
}

impl<T: Scalar> Default for ExperimentSettings<T> {
    fn default() -> Self {
        Self {
            epsilon: T::lit(0.05),
            delta: T::lit(0.1),
            beta_scale: T::lit(crate::acquisition::EXPERIMENT_BETA_SCALE),
            budget_multiplier: 10,
            init_multiplier: 3,
            kernel: crate::gp::KernelFamily::SquaredExponential,
            refit_every: 1,
            noise: None,
            placement: Placement::Random,
        }
    }
}

impl<T: Scalar> ExperimentSettings<T> {
    /// Run configuration for one `(strategy, seed)` repetition. The seed drives
    /// both the box placement and the run itself.
    pub fn run_config(&self, benchmark: &Benchmark, strategy: Strategy, seed: u64) -> RunConfig<T> {
        let initial_box = match self.placement {
            Placement::Random => place_initial_box(benchmark, seed),
            Placement::ArgmaxOutside => place_initial_box_excluding_argmax(benchmark, seed).0,
        };
        let d = benchmark.dim();
        let mut cfg = RunConfig::new(strategy, initial_box);
        cfg.epsilon = self.epsilon;
        cfg.delta = self.delta;
        cfg.beta_scale = self.beta_scale;
        cfg.budget = self.budget_multiplier * d;
        cfg.init_count = self.init_multiplier * d;
        cfg.kernel = self.kernel;
        cfg.refit_every = self.refit_every;
        cfg.noise = self.noise;
        cfg.seed = seed;
        cfg
    }
}

/// Runs every seed for one strategy in parallel; output order follows `seeds`.
pub fn run_repetitions<T: Scalar>(
    benchmark: &Benchmark,
    strategy: Strategy,
    seeds: &[u64],
    settings: &ExperimentSettings<T>,
) -> Result<Vec<RunTrace<T>>> {
    seeds
        .par_iter()
        .map(|&seed| run(&settings.run_config(benchmark, strategy, seed), benchmark))
        .collect()
}

/// Mean and standard error of the best-found value at one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregatePoint<T> {
    pub iteration: usize,
    pub mean: T,
    pub stderr: T,
}

/// Per-iteration mean and standard error (sample standard deviation over
/// `√reps`) of equal-length best-so-far curves.
pub fn aggregate<T: Scalar>(curves: &[Vec<T>]) -> Result<Vec<AggregatePoint<T>>> {
    let first = curves.first().ok_or_else(|| invalid("aggregate needs at least one curve"))?;
    let len = first.len();
    if let Some(c) = curves.iter().find(|c| c.len() != len) {
        return Err(invalid(format!("curves of unequal length ({} vs {len})", c.len())));
    }
    let reps = curves.len();
    let n = T::from_count(reps);
    Ok((0..len)
        .map(|i| {
            let mean = curves.iter().map(|c| c[i]).sum::<T>() / n;
            let stderr = if reps > 1 {
                let ss: T = curves.iter().map(|c| (c[i] - mean) * (c[i] - mean)).sum();
                (ss / T::from_count(reps - 1)).sqrt() / n.sqrt()
            } else {
                T::zero()
            };
            AggregatePoint { iteration: i, mean, stderr }
        })
        .collect())
}

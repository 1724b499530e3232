//! Search-space expansion: the radius beyond which the UCB is provably
//! within `ε/2` of its limit, the resulting union-of-balls region and its
//! encompassing box, and the regret bound that decides when to expand.

use crate::acquisition::Ucb;
use crate::bounds::BoxBounds;
use crate::error::{invalid, Result, UboError};
use crate::gp::{ExpansionQuantities, KernelSpec};
use crate::scalar::{sq_dist, Scalar};

/// Margin kept below `θ²` when the mean term vanishes (`M = 0`).
const ZERO_WEIGHT_MARGIN: f64 = 1e-9;

/// Expansion radius together with the covariance thresholds behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusReport<T> {
    /// `d_ε = g_k(γ)`.
    pub radius: T,
    /// Threshold actually inverted.
    pub gamma: T,
    /// Threshold controlling the variance term.
    pub gamma_variance: T,
    /// Threshold controlling the mean term; `None` when `M = 0`.
    pub gamma_mean: Option<T>,
}

/// Radius `d_ε` such that every point at distance `≥ d_ε` from all
/// observations has `|UCB(x) − √β·θ| ≤ ε/2`.
///
/// `γ = min(√((√β·θ·ε/2 − ε²/16)/(n·λ_max))/√β, ε/(4M))`, then `d_ε = g_k(γ)`.
/// The variance threshold carries a `1/√β` factor; this is the value that
/// makes the variance term of the error bound equal to exactly `ε/4`.
pub fn expansion_radius<T: Scalar>(
    quantities: &ExpansionQuantities<T>,
    kernel: &KernelSpec<T>,
    beta: T,
    epsilon: T,
) -> Result<RadiusReport<T>> {
    let ExpansionQuantities { lambda_max, weight_bound, n } = *quantities;
    if n == 0 {
        return Err(UboError::Precondition("expansion radius needs at least one observation".into()));
    }
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(invalid(format!("beta must be > 0, got {beta}")));
    }
    if !(lambda_max > T::zero()) || !lambda_max.is_finite() {
        return Err(invalid(format!("lambda_max must be > 0, got {lambda_max}")));
    }
    let theta = kernel.theta();
    let sqrt_beta = beta.sqrt();
    let limit = T::lit(4.0) * sqrt_beta * theta;
    if !(epsilon > T::zero()) || epsilon >= limit {
        return Err(invalid(format!("epsilon must lie in (0, 4·sqrt(beta)·theta = {limit}), got {epsilon}")));
    }
    let radicand = (sqrt_beta * theta * epsilon / T::lit(2.0) - epsilon * epsilon / T::lit(16.0))
        / (T::from_count(n) * lambda_max);
    let gamma_variance = radicand.max(T::zero()).sqrt() / sqrt_beta;
    let gamma_mean = (weight_bound > T::zero()).then(|| T::lit(0.25) * epsilon / weight_bound);
    let var = kernel.variance();
    let cap = gamma_mean.unwrap_or(var * (T::one() - T::lit(ZERO_WEIGHT_MARGIN)));
    let gamma = gamma_variance.min(cap).min(var);
    if !(gamma > T::zero()) {
        return Err(invalid("covariance threshold collapsed to zero; expansion radius is unbounded"));
    }
    let radius = kernel.inverse_radius(gamma)?;
    Ok(RadiusReport { radius, gamma, gamma_variance, gamma_mean })
}

/// Current search space: either the initial user box (`index == 0`) or a
/// union of balls of radius `d_ε` around observations together with its
/// encompassing box.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchRegion<T> {
    index: usize,
    centers: Vec<Vec<T>>,
    radius: Option<T>,
    hypercube: BoxBounds<T>,
}

impl<T: Scalar> SearchRegion<T> {
    /// The initial user-supplied box.
    pub fn user(bounds: BoxBounds<T>) -> Self {
        Self { index: 0, centers: Vec::new(), radius: None, hypercube: bounds }
    }

    /// Expansion index `k` (0 for the user box).
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn with_index(mut self, index: usize) -> Self {
        self.index = index;
        self
    }

    pub fn is_user_box(&self) -> bool {
        self.radius.is_none()
    }

    pub fn centers(&self) -> &[Vec<T>] {
        &self.centers
    }

    pub fn radius(&self) -> Option<T> {
        self.radius
    }

    /// Box handed to the acquisition optimiser.
    pub fn hypercube(&self) -> &BoxBounds<T> {
        &self.hypercube
    }

    pub fn in_hypercube(&self, x: &[T]) -> bool {
        self.hypercube.contains(x)
    }

    /// Membership in the union of balls; for the user box this is box membership.
    pub fn in_union_of_balls(&self, x: &[T]) -> bool {
        match self.radius {
            None => self.hypercube.contains(x),
            Some(r) => self.centers.iter().any(|c| sq_dist(c, x) <= r * r),
        }
    }

    /// Bounding box of ball `i` with the given radius.
    pub fn ball_box(&self, i: usize, radius: T) -> Result<BoxBounds<T>> {
        let c = self.centers.get(i).ok_or_else(|| invalid(format!("no ball {i}")))?;
        BoxBounds::new(c.iter().map(|&v| v - radius).collect(), c.iter().map(|&v| v + radius).collect())
    }
}

/// Union of balls of radius `d_eps` around `observations` and the box
/// `[min_i x_i^j − d_ε, max_i x_i^j + d_ε]` per dimension.
pub fn build_region<T: Scalar>(observations: &[Vec<T>], d_eps: T) -> Result<SearchRegion<T>> {
    let first = observations.first().ok_or_else(|| invalid("region needs at least one observation"))?;
    if !(d_eps > T::zero()) || !d_eps.is_finite() {
        return Err(invalid(format!("radius must be finite and > 0, got {d_eps}")));
    }
    let dim = first.len();
    let mut lo = first.clone();
    let mut hi = first.clone();
    for p in observations {
        if p.len() != dim {
            return Err(invalid("observations of mixed dimension"));
        }
        for j in 0..dim {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    let lo = lo.into_iter().map(|v| v - d_eps).collect();
    let hi = hi.into_iter().map(|v| v + d_eps).collect();
    Ok(SearchRegion { index: 1, centers: observations.to_vec(), radius: Some(d_eps), hypercube: BoxBounds::new(lo, hi)? })
}

/// `r_b = UCB(x_t) − max_{x ∈ D_t} LCB(x) + 1/t_local²`, with both bounds
/// taken from the posterior before `x_t` was added.
pub fn regret_upper_bound<T: Scalar>(
    acquisition: &Ucb<'_, T>,
    ucb_at_suggestion: T,
    evaluated: &[Vec<T>],
    t_local: usize,
) -> Result<T> {
    if t_local == 0 {
        return Err(invalid("t_local must be >= 1"));
    }
    let best_lcb = evaluated
        .iter()
        .map(|x| acquisition.lower_unchecked(x))
        .fold(T::neg_infinity(), T::max);
    if !best_lcb.is_finite() {
        return Err(invalid("regret bound needs at least one evaluated point"));
    }
    let tl = T::from_count(t_local);
    Ok(ucb_at_suggestion - best_lcb + T::one() / (tl * tl))
}

/// Bookkeeping for expansion triggers across epochs.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerState<T> {
    epsilon: T,
    epoch_start: usize,
    last_bound: Option<T>,
    epochs: Vec<usize>,
}

impl<T: Scalar> TriggerState<T> {
    pub fn new(epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero()) {
            return Err(invalid(format!("epsilon must be > 0, got {epsilon}")));
        }
        Ok(Self { epsilon, epoch_start: 0, last_bound: None, epochs: Vec::new() })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// Iterations consumed by completed epochs (`t_k`).
    pub fn epoch_start(&self) -> usize {
        self.epoch_start
    }

    pub fn t_local(&self, t: usize) -> usize {
        t - self.epoch_start
    }

    pub fn last_bound(&self) -> Option<T> {
        self.last_bound
    }

    /// Lengths of completed epochs.
    pub fn epochs(&self) -> &[usize] {
        &self.epochs
    }

    /// Whether this bound fires an expansion at iteration `t`.
    /// The first iteration always expands.
    pub fn fires(&self, t: usize, bound: T) -> bool {
        bound <= self.epsilon || t == 1
    }

    /// Records `r_b` at iteration `t`; closes the epoch and returns `true`
    /// when an expansion fires.
    pub fn observe(&mut self, t: usize, bound: T) -> bool {
        self.last_bound = Some(bound);
        let fire = self.fires(t, bound);
        if fire {
            let len = self.t_local(t);
            self.epochs.push(len);
            self.epoch_start += len;
        }
        fire
    }
}

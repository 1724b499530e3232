//! GP-UCB / GP-LCB and the per-expansion exploration schedule.

use crate::error::{invalid, Result};
use crate::gp::GpPosterior;
use crate::scalar::Scalar;

/// Experiments scale the theoretical `β_t` down by five.
pub const EXPERIMENT_BETA_SCALE: f64 = 0.2;

/// Exploration weight schedule for one search space.
///
/// `β_t = s·[2 log(t²·2π²/(3δ)) + 2d log(t²·d·b·r·√log(4d·a/δ))]` where `t`
/// counts iterations since the space was entered.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSchedule<T> {
    pub delta: T,
    pub dim: usize,
    /// Side length `r_k` of the current space.
    pub side_length: T,
    /// Sample-path derivative constants `a_k`, `b_k`.
    pub a: T,
    pub b: T,
    /// Multiplier `s` (1 for the theoretical schedule).
    pub scale: T,
    /// Iterations consumed by earlier spaces.
    pub epoch_offset: usize,
}

impl<T: Scalar> BetaSchedule<T> {
    pub fn new(delta: T, dim: usize, side_length: T, scale: T) -> Result<Self> {
        let s = Self { delta, dim, side_length, a: T::one(), b: T::one(), scale, epoch_offset: 0 };
        s.validate()?;
        Ok(s)
    }

    pub fn with_constants(mut self, a: T, b: T) -> Result<Self> {
        self.a = a;
        self.b = b;
        self.validate()?;
        Ok(self)
    }

    pub fn with_epoch_offset(mut self, offset: usize) -> Self {
        self.epoch_offset = offset;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > T::zero() && self.delta < T::one()) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.side_length > T::zero()) || !self.side_length.is_finite() {
            return Err(invalid(format!("side length must be > 0, got {}", self.side_length)));
        }
        if self.dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if !(self.a > T::zero() && self.b > T::zero()) {
            return Err(invalid("schedule constants a, b must be > 0"));
        }
        if !(self.scale > T::zero()) {
            return Err(invalid(format!("beta scale must be > 0, got {}", self.scale)));
        }
        Ok(())
    }

    /// `β` at local iteration `t_local ≥ 1`.
    pub fn beta(&self, t_local: usize) -> Result<T> {
        self.validate()?;
        if t_local == 0 {
            return Err(invalid("t_local must be >= 1"));
        }
        let two = T::lit(2.0);
        let t2 = T::from_count(t_local).powi(2);
        let d = T::from_count(self.dim);
        let pi2 = T::PI() * T::PI();
        let confidence = two * (t2 * two * pi2 / (T::lit(3.0) * self.delta)).ln();
        let inner = (T::lit(4.0) * d * self.a / self.delta).ln();
        if !(inner > T::zero()) {
            return Err(invalid("log(4·d·a/δ) must be positive"));
        }
        let lipschitz = two * d * (t2 * d * self.b * self.side_length * inner.sqrt()).ln();
        let beta = self.scale * (confidence + lipschitz);
        if !(beta > T::zero()) || !beta.is_finite() {
            return Err(invalid(format!("schedule yields non-positive beta {beta} at t_local={t_local}")));
        }
        Ok(beta)
    }

    /// `β` at global iteration `t`, counting from this space's epoch offset.
    pub fn beta_at(&self, t: usize) -> Result<T> {
        if t <= self.epoch_offset {
            return Err(invalid(format!("iteration {t} precedes the epoch offset {}", self.epoch_offset)));
        }
        self.beta(t - self.epoch_offset)
    }
}

/// Limit of the UCB far from every observation: `√β·θ`.
pub fn asymptotic_value<T: Scalar>(beta: T, theta: T) -> T {
    beta.sqrt() * theta
}

/// Upper/lower confidence bounds of a posterior at a fixed `β`.
#[derive(Debug, Clone, Copy)]
pub struct Ucb<'a, T> {
    posterior: &'a GpPosterior<T>,
    sqrt_beta: T,
}

impl<'a, T: Scalar> Ucb<'a, T> {
    pub fn new(posterior: &'a GpPosterior<T>, beta: T) -> Self {
        debug_assert!(beta >= T::zero());
        Self { posterior, sqrt_beta: beta.max(T::zero()).sqrt() }
    }

    pub fn posterior(&self) -> &GpPosterior<T> {
        self.posterior
    }

    #[inline]
    pub fn value_unchecked(&self, x: &[T]) -> T {
        let (m, v) = self.posterior.predict_unchecked(x);
        m + self.sqrt_beta * v.sqrt()
    }

    #[inline]
    pub fn lower_unchecked(&self, x: &[T]) -> T {
        let (m, v) = self.posterior.predict_unchecked(x);
        m - self.sqrt_beta * v.sqrt()
    }

    pub fn ucb(&self, x: &[T]) -> Result<T> {
        let (m, v) = self.posterior.predict(x)?;
        Ok(m + self.sqrt_beta * v.sqrt())
    }

    pub fn lcb(&self, x: &[T]) -> Result<T> {
        let (m, v) = self.posterior.predict(x)?;
        Ok(m - self.sqrt_beta * v.sqrt())
    }
}

/// `μ(x) + √β·σ(x)`.
pub fn ucb<T: Scalar>(posterior: &GpPosterior<T>, x: &[T], beta: T) -> Result<T> {
    Ucb::new(posterior, beta).ucb(x)
}

/// `μ(x) − √β·σ(x)`.
pub fn lcb<T: Scalar>(posterior: &GpPosterior<T>, x: &[T], beta: T) -> Result<T> {
    Ucb::new(posterior, beta).lcb(x)
}

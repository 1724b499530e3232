//! Stationary covariance functions and their distance inversion.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Result, UboError};
use crate::scalar::Scalar;

/// Supported stationary kernel families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// Squared exponential, `θ² exp(-r²/2)` in scaled distance `r`.
    SquaredExponential,
    /// Matérn with smoothness 5/2.
    Matern52,
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelFamily::SquaredExponential => "se",
            KernelFamily::Matern52 => "matern52",
        })
    }
}

impl FromStr for KernelFamily {
    type Err = UboError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "se" | "rbf" | "squared_exponential" => Ok(KernelFamily::SquaredExponential),
            "matern52" | "matern" | "matern-5/2" => Ok(KernelFamily::Matern52),
            other => Err(invalid(format!("unknown kernel family `{other}`"))),
        }
    }
}

/// Bisection tolerance for inverting the Matérn radial profile.
const RADIUS_TOL: f64 = 1e-10;

/// A stationary kernel with output scale `theta` (so `k(x, x) = theta²`) and
/// one lengthscale per input dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec<T> {
    family: KernelFamily,
    theta: T,
    lengthscales: Vec<T>,
}

impl<T: Scalar> KernelSpec<T> {
    /// Isotropic kernel of the given family.
    pub fn new(family: KernelFamily, theta: T, lengthscale: T, dim: usize) -> Result<Self> {
        Self::with_lengthscales(family, theta, vec![lengthscale; dim])
    }

    pub fn se(theta: T, lengthscale: T, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::SquaredExponential, theta, lengthscale, dim)
    }

    pub fn matern52(theta: T, lengthscale: T, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Matern52, theta, lengthscale, dim)
    }

    /// Kernel with a separate lengthscale for each dimension.
    pub fn with_lengthscales(family: KernelFamily, theta: T, lengthscales: Vec<T>) -> Result<Self> {
        if lengthscales.is_empty() {
            return Err(invalid("kernel dimension must be at least 1"));
        }
        if !(theta >= T::zero()) || !theta.is_finite() {
            return Err(invalid(format!("kernel scale theta must be finite and >= 0, got {theta}")));
        }
        if let Some(l) = lengthscales.iter().find(|l| !(**l > T::zero()) || !l.is_finite()) {
            return Err(invalid(format!("lengthscale must be finite and > 0, got {l}")));
        }
        Ok(Self { family, theta, lengthscales })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    /// Prior variance `k(x, x) = θ²`.
    pub fn variance(&self) -> T {
        self.theta * self.theta
    }

    pub fn lengthscales(&self) -> &[T] {
        &self.lengthscales
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    fn max_lengthscale(&self) -> T {
        self.lengthscales.iter().fold(T::zero(), |m, &l| m.max(l))
    }

    /// Correlation as a function of the lengthscale-scaled distance `s ≥ 0`.
    pub fn radial_profile(&self, s: T) -> T {
        match self.family {
            KernelFamily::SquaredExponential => (-(s * s) / T::lit(2.0)).exp(),
            KernelFamily::Matern52 => {
                let r5 = T::lit(5.0).sqrt() * s;
                (T::one() + r5 + r5 * r5 / T::lit(3.0)) * (-r5).exp()
            }
        }
    }

    /// Scaled distance `sqrt(Σ ((x_j - x'_j)/l_j)²)`.
    #[inline]
    pub fn scaled_distance(&self, x: &[T], x2: &[T]) -> T {
        x.iter()
            .zip(x2)
            .zip(&self.lengthscales)
            .map(|((&a, &b), &l)| {
                let u = (a - b) / l;
                u * u
            })
            .sum::<T>()
            .sqrt()
    }

    /// `k(x, x2)` without a dimension check.
    #[inline]
    pub fn eval_unchecked(&self, x: &[T], x2: &[T]) -> T {
        self.variance() * self.radial_profile(self.scaled_distance(x, x2))
    }

    /// Covariance between two points.
    pub fn eval(&self, x: &[T], x2: &[T]) -> Result<T> {
        if x.len() != self.dim() || x2.len() != self.dim() {
            return Err(invalid(format!(
                "dimension mismatch: kernel has d={}, points have {} and {}",
                self.dim(),
                x.len(),
                x2.len()
            )));
        }
        Ok(self.eval_unchecked(x, x2))
    }

    /// Smallest Euclidean distance `g` such that `k(x, x') ≤ gamma` whenever
    /// `‖x - x'‖₂ ≥ g`.
    ///
    /// For anisotropic kernels the largest lengthscale governs the bound.
    pub fn inverse_radius(&self, gamma: T) -> Result<T> {
        let var = self.variance();
        if !(gamma > T::zero()) || gamma > var {
            return Err(invalid(format!(
                "covariance threshold must lie in (0, theta^2 = {var}], got {gamma}"
            )));
        }
        let ratio = gamma / var;
        let s = match self.family {
            KernelFamily::SquaredExponential => (T::lit(2.0) * (T::one() / ratio).ln()).max(T::zero()).sqrt(),
            KernelFamily::Matern52 => self.invert_profile(ratio),
        };
        Ok(s * self.max_lengthscale())
    }

    /// Bisection for `profile(s) = ratio`, returning the upper bracket so the
    /// resulting radius never undershoots.
    fn invert_profile(&self, ratio: T) -> T {
        if ratio >= T::one() {
            return T::zero();
        }
        let mut lo = T::zero();
        let mut hi = T::one();
        while self.radial_profile(hi) > ratio {
            lo = hi;
            hi = hi + hi;
            if !hi.is_finite() {
                return T::infinity();
            }
        }
        let tol = T::lit(RADIUS_TOL) / self.max_lengthscale().max(T::one());
        for _ in 0..400 {
            if hi - lo <= tol {
                break;
            }
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.radial_profile(mid) > ratio {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

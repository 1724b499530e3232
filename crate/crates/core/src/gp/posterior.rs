//! Observations and the exact GP posterior.

use crate::error::{invalid, Result, UboError};
use crate::gp::kernel::KernelSpec;
use crate::linalg::{cholesky_with_jitter, symmetric_eigenvalues, Cholesky, Matrix};
use crate::scalar::Scalar;

/// Ordered observations `(x_i, y_i)` with a shared noise variance.
///
/// Values are used as given by the posterior, which assumes a zero prior
/// mean; use [`Dataset::standardized`] to centre (and scale) them first.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    dim: usize,
    points: Vec<Vec<T>>,
    values: Vec<T>,
    noise: T,
}

impl<T: Scalar> Dataset<T> {
    pub fn empty(dim: usize, noise: T) -> Result<Self> {
        Self::new(dim, Vec::new(), Vec::new(), noise)
    }

    pub fn new(dim: usize, points: Vec<Vec<T>>, values: Vec<T>, noise: T) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dataset dimension must be at least 1"));
        }
        if points.len() != values.len() {
            return Err(invalid(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(invalid(format!("point of dimension {} in a d={dim} dataset", p.len())));
        }
        if !(noise >= T::zero()) {
            return Err(invalid(format!("noise variance must be >= 0, got {noise}")));
        }
        Ok(Self { dim, points, values, noise })
    }

    pub fn push(&mut self, x: Vec<T>, y: T) -> Result<()> {
        if x.len() != self.dim {
            return Err(invalid(format!("point of dimension {} in a d={} dataset", x.len(), self.dim)));
        }
        self.points.push(x);
        self.values.push(y);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn noise(&self) -> T {
        self.noise
    }

    pub fn with_noise(mut self, noise: T) -> Self {
        self.noise = noise;
        self
    }

    /// Copy with values mapped to zero mean and unit sample variance.
    pub fn standardized(&self) -> (Self, Standardization<T>) {
        let s = Standardization::fit(&self.values);
        let values = self.values.iter().map(|&y| s.apply(y)).collect();
        (Self { values, ..self.clone() }, s)
    }

    /// Index of the largest value.
    pub fn argmax(&self) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, T)>, (i, &v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((i, v)),
            })
            .map(|(i, _)| i)
    }
}

/// Affine map `y -> (y - mean) / scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardization<T> {
    pub mean: T,
    pub scale: T,
}

impl<T: Scalar> Standardization<T> {
    /// Sample mean and standard deviation; a zero or undefined spread maps to scale 1.
    pub fn fit(values: &[T]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: T::zero(), scale: T::one() };
        }
        let mean = values.iter().copied().sum::<T>() / T::from_count(n);
        let scale = if n > 1 {
            let ss: T = values.iter().map(|&y| (y - mean) * (y - mean)).sum();
            (ss / T::from_count(n - 1)).sqrt()
        } else {
            T::zero()
        };
        let scale = if scale > T::epsilon() * mean.abs().max(T::one()) { scale } else { T::one() };
        Self { mean, scale }
    }

    pub fn apply(&self, y: T) -> T {
        (y - self.mean) / self.scale
    }

    pub fn invert(&self, z: T) -> T {
        z * self.scale + self.mean
    }
}

/// Quantities of `(K + σ²I)` consumed by the expansion radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionQuantities<T> {
    /// Largest singular value of `(K + σ²I)⁻¹`.
    pub lambda_max: T,
    /// `max(Σ_{z_j≤0} -z_j, Σ_{z_j≥0} z_j)` for `z = (K + σ²I)⁻¹ y`.
    pub weight_bound: T,
    /// Number of observations.
    pub n: usize,
}

/// Exact GP posterior for a fixed dataset and kernel. Immutable once built.
#[derive(Debug, Clone)]
pub struct GpPosterior<T> {
    kernel: KernelSpec<T>,
    data: Dataset<T>,
    chol: Option<Cholesky<T>>,
    gram: Matrix<T>,
    z: Vec<T>,
    jitter: T,
}

impl<T: Scalar> GpPosterior<T> {
    /// Factorises `K + σ²I` for the dataset.
    pub fn new(data: Dataset<T>, kernel: KernelSpec<T>) -> Result<Self> {
        if data.dim() != kernel.dim() {
            return Err(invalid(format!(
                "dataset has d={} but kernel has d={}",
                data.dim(),
                kernel.dim()
            )));
        }
        let n = data.len();
        if n == 0 {
            return Ok(Self { kernel, data, chol: None, gram: Matrix::zeros(0, 0), z: Vec::new(), jitter: T::zero() });
        }
        let pts = data.points();
        let mut gram = Matrix::from_fn(n, n, |i, j| kernel.eval_unchecked(&pts[i], &pts[j]));
        gram.add_diagonal(data.noise());
        let (chol, gram, jitter) = cholesky_with_jitter(&gram, kernel.variance())?;
        let z = chol.solve(data.values());
        if z.iter().any(|v| !v.is_finite()) {
            return Err(UboError::NumericFailure("non-finite posterior weights".into()));
        }
        Ok(Self { kernel, data, chol: Some(chol), gram, z, jitter })
    }

    pub fn kernel(&self) -> &KernelSpec<T> {
        &self.kernel
    }

    pub fn data(&self) -> &Dataset<T> {
        &self.data
    }

    /// `z = (K + σ²I)⁻¹ y`.
    pub fn weights(&self) -> &[T] {
        &self.z
    }

    /// Diagonal jitter that had to be added on top of `σ²` (usually zero).
    pub fn jitter(&self) -> T {
        self.jitter
    }

    /// Cross-covariance vector `k(x)`.
    pub fn cross_covariance(&self, x: &[T]) -> Vec<T> {
        self.data.points().iter().map(|p| self.kernel.eval_unchecked(x, p)).collect()
    }

    /// Posterior mean and variance without a dimension check.
    pub fn predict_unchecked(&self, x: &[T]) -> (T, T) {
        let prior = self.kernel.variance();
        let Some(chol) = &self.chol else {
            return (T::zero(), prior);
        };
        let kx = self.cross_covariance(x);
        let mean = kx.iter().zip(&self.z).map(|(&a, &b)| a * b).sum();
        let v = chol.solve_lower(&kx);
        let reduction: T = v.iter().map(|&a| a * a).sum();
        (mean, (prior - reduction).max(T::zero()))
    }

    /// Posterior mean `μ(x)` and variance `σ²(x)` (clamped at zero).
    pub fn predict(&self, x: &[T]) -> Result<(T, T)> {
        if x.len() != self.data.dim() {
            return Err(invalid(format!(
                "query has dimension {} but the model has d={}",
                x.len(),
                self.data.dim()
            )));
        }
        Ok(self.predict_unchecked(x))
    }

    /// `λ_max` and the weight bound `M`.
    ///
    /// `λ_max` is the reciprocal of the smallest eigenvalue of the factorised
    /// (symmetric positive definite) matrix, so no inverse is formed.
    pub fn expansion_quantities(&self) -> Result<ExpansionQuantities<T>> {
        let n = self.data.len();
        if n == 0 {
            return Err(UboError::Precondition("expansion quantities need at least one observation".into()));
        }
        let eig = symmetric_eigenvalues(&self.gram);
        let smallest = eig[0];
        if !(smallest > T::zero()) {
            return Err(UboError::NumericFailure(format!(
                "smallest eigenvalue of K + noise is {smallest}"
            )));
        }
        let (neg, pos) = self.z.iter().fold((T::zero(), T::zero()), |(neg, pos), &zj| {
            if zj < T::zero() {
                (neg - zj, pos)
            } else {
                (neg, pos + zj)
            }
        });
        Ok(ExpansionQuantities { lambda_max: T::one() / smallest, weight_bound: neg.max(pos), n })
    }
}

/// Convenience wrapper: posterior mean and variance at `x`.
pub fn posterior<T: Scalar>(data: &Dataset<T>, kernel: &KernelSpec<T>, x: &[T]) -> Result<(T, T)> {
    GpPosterior::new(data.clone(), kernel.clone())?.predict(x)
}

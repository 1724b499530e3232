//! Maximum-likelihood fitting of kernel scale, lengthscale and noise.

use rand::Rng as _;
use rayon::prelude::*;

use crate::acq_opt::minimize_unit_cube;
use crate::error::{invalid, Result};
use crate::gp::kernel::{KernelFamily, KernelSpec};
use crate::gp::posterior::Dataset;
use crate::linalg::{cholesky_with_jitter, Matrix};
use crate::rng::rng_from;
use crate::scalar::Scalar;

/// Search bounds and restarts for the likelihood maximisation.
///
/// The lengthscale range is relative to a caller-supplied domain diameter.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig<T> {
    pub family: KernelFamily,
    pub restarts: usize,
    pub max_iter: usize,
    pub theta_bounds: (T, T),
    pub lengthscale_bounds_rel: (T, T),
    pub noise_bounds: (T, T),
    /// Used as the first start and returned verbatim when `n < 2`.
    pub default_theta: T,
    pub default_lengthscale_rel: T,
    pub default_noise: T,
}

impl<T: Scalar> FitConfig<T> {
    pub fn new(family: KernelFamily) -> Self {
        Self {
            family,
            restarts: 8,
            max_iter: 200,
            theta_bounds: (T::lit(1e-3), T::lit(1e3)),
            lengthscale_bounds_rel: (T::lit(1e-3), T::lit(10.0)),
            noise_bounds: (T::lit(1e-8), T::one()),
            default_theta: T::one(),
            default_lengthscale_rel: T::lit(0.25),
            default_noise: T::lit(1e-6),
        }
    }
}

impl<T: Scalar> Default for FitConfig<T> {
    fn default() -> Self {
        Self::new(KernelFamily::SquaredExponential)
    }
}

/// Kernel and noise variance chosen by the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel<T> {
    pub kernel: KernelSpec<T>,
    pub noise: T,
    /// Log marginal likelihood at the optimum (`NaN` for the default model).
    pub log_likelihood: T,
    /// `true` when there was too little data and the default was returned.
    pub used_default: bool,
}

/// Log marginal likelihood `log p(y | X, θ, l, σ²)` under a zero prior mean.
pub fn log_marginal_likelihood<T: Scalar>(data: &Dataset<T>, kernel: &KernelSpec<T>, noise: T) -> Result<T> {
    let n = data.len();
    let pts = data.points();
    let mut a = Matrix::from_fn(n, n, |i, j| kernel.eval_unchecked(&pts[i], &pts[j]));
    a.add_diagonal(noise);
    let (chol, _, _) = cholesky_with_jitter(&a, kernel.variance())?;
    let alpha = chol.solve(data.values());
    let fit: T = data.values().iter().zip(&alpha).map(|(&y, &a)| y * a).sum();
    let half = T::lit(0.5);
    Ok(-half * fit - half * chol.log_det() - half * T::from_count(n) * (T::lit(2.0) * T::PI()).ln())
}

struct LogBox<T> {
    lo: [T; 3],
    hi: [T; 3],
}

impl<T: Scalar> LogBox<T> {
    fn params(&self, u: &[T]) -> [T; 3] {
        [0, 1, 2].map(|i| self.lo[i] + u[i] * (self.hi[i] - self.lo[i]))
    }

    fn unit(&self, p: [T; 3]) -> Vec<T> {
        (0..3)
            .map(|i| {
                let w = self.hi[i] - self.lo[i];
                if w > T::zero() { ((p[i] - self.lo[i]) / w).max(T::zero()).min(T::one()) } else { T::zero() }
            })
            .collect()
    }
}

/// Negative log likelihood and its gradient in log-parameters
/// `(ln θ, ln l, ln σ²)`.
fn neg_lml_and_grad<T: Scalar>(data: &Dataset<T>, family: KernelFamily, p: [T; 3]) -> (T, [T; 3]) {
    let fail = (T::infinity(), [T::zero(); 3]);
    let (theta, l, noise) = (p[0].exp(), p[1].exp(), p[2].exp());
    let Ok(kernel) = KernelSpec::new(family, theta, l, data.dim()) else {
        return fail;
    };
    let n = data.len();
    let pts = data.points();
    let var = kernel.variance();
    let mut kf = Matrix::zeros(n, n);
    let mut dl = Matrix::zeros(n, n);
    let sqrt5 = T::lit(5.0).sqrt();
    for i in 0..n {
        for j in 0..=i {
            let s = kernel.scaled_distance(&pts[i], &pts[j]);
            let k = var * kernel.radial_profile(s);
            let d = match family {
                KernelFamily::SquaredExponential => k * s * s,
                KernelFamily::Matern52 => {
                    var * T::lit(5.0 / 3.0) * s * s * (T::one() + sqrt5 * s) * (-sqrt5 * s).exp()
                }
            };
            kf[(i, j)] = k;
            kf[(j, i)] = k;
            dl[(i, j)] = d;
            dl[(j, i)] = d;
        }
    }
    let mut a = kf.clone();
    a.add_diagonal(noise);
    let Ok((chol, _, _)) = cholesky_with_jitter(&a, var) else {
        return fail;
    };
    let y = data.values();
    let alpha = chol.solve(y);
    let half = T::lit(0.5);
    let fit: T = y.iter().zip(&alpha).map(|(&a, &b)| a * b).sum();
    let lml = -half * fit - half * chol.log_det() - half * T::from_count(n) * (T::lit(2.0) * T::PI()).ln();
    if !lml.is_finite() {
        return fail;
    }
    let inv = chol.inverse();
    let (mut g_theta, mut g_l, mut g_noise) = (T::zero(), T::zero(), T::zero());
    for i in 0..n {
        for j in 0..n {
            let w = alpha[i] * alpha[j] - inv[(i, j)];
            g_theta = g_theta + w * kf[(i, j)];
            g_l = g_l + w * dl[(i, j)];
        }
        g_noise = g_noise + alpha[i] * alpha[i] - inv[(i, i)];
    }
    // dK/dlnθ = 2K_f, so ½·tr(W·2K_f) = Σ W∘K_f
    let grad = [g_theta, half * g_l, half * noise * g_noise];
    (-lml, grad.map(|g| -g))
}

/// Multistart maximum-likelihood estimate of `(θ, l, σ²)` for an isotropic kernel.
///
/// `diameter` sets the lengthscale range; with fewer than two observations the
/// configured default model is returned with `used_default` set.
pub fn fit_hyperparameters<T: Scalar>(
    data: &Dataset<T>,
    config: &FitConfig<T>,
    diameter: T,
    seed: u64,
) -> Result<FittedModel<T>> {
    let diameter = if diameter > T::zero() && diameter.is_finite() { diameter } else { T::one() };
    let clamp = |v: T, (lo, hi): (T, T)| v.max(lo).min(hi);
    let l_bounds = (config.lengthscale_bounds_rel.0 * diameter, config.lengthscale_bounds_rel.1 * diameter);
    let default_theta = clamp(config.default_theta, config.theta_bounds);
    let default_l = clamp(config.default_lengthscale_rel * diameter, l_bounds);
    let default_noise = clamp(config.default_noise, config.noise_bounds);
    if data.len() < 2 {
        return Ok(FittedModel {
            kernel: KernelSpec::new(config.family, default_theta, default_l, data.dim())?,
            noise: default_noise,
            log_likelihood: T::nan(),
            used_default: true,
        });
    }
    for (name, (lo, hi)) in [("theta", config.theta_bounds), ("lengthscale", l_bounds), ("noise", config.noise_bounds)] {
        if !(lo > T::zero() && hi >= lo) {
            return Err(invalid(format!("bad {name} bounds [{lo}, {hi}]")));
        }
    }
    let bx = LogBox {
        lo: [config.theta_bounds.0.ln(), l_bounds.0.ln(), config.noise_bounds.0.ln()],
        hi: [config.theta_bounds.1.ln(), l_bounds.1.ln(), config.noise_bounds.1.ln()],
    };
    let span = [0, 1, 2].map(|i| bx.hi[i] - bx.lo[i]);

    let mut starts = vec![bx.unit([default_theta.ln(), default_l.ln(), default_noise.ln()])];
    let mut rng = rng_from(seed);
    while starts.len() < config.restarts.max(1) {
        starts.push((0..3).map(|_| T::lit(rng.random::<f64>())).collect());
    }

    let family = config.family;
    let objective = |u: &[T]| {
        let (v, g) = neg_lml_and_grad(data, family, bx.params(u));
        (v, (0..3).map(|i| g[i] * span[i]).collect::<Vec<T>>())
    };
    let results: Vec<(Vec<T>, T)> = starts
        .par_iter()
        .map(|s| minimize_unit_cube(&objective, s, config.max_iter, T::lit(1e-9)))
        .collect();
    let (best_u, best_neg) = results
        .into_iter()
        .fold(None, |best: Option<(Vec<T>, T)>, (u, v)| match best {
            Some((_, bv)) if !(v < bv) => best,
            _ => Some((u, v)),
        })
        .expect("at least one start");
    if !best_neg.is_finite() {
        return Err(crate::error::UboError::NumericFailure(
            "likelihood could not be evaluated at any start".into(),
        ));
    }
    let p = bx.params(&best_u);
    Ok(FittedModel {
        kernel: KernelSpec::new(family, p[0].exp(), p[1].exp(), data.dim())?,
        noise: p[2].exp(),
        log_likelihood: -best_neg,
        used_default: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Cholesky;
    use rand_distr::{Distribution, StandardNormal};

    /// Draws `n` noise-free values from a zero-mean GP with the given kernel.
    fn sample_gp(kernel: &KernelSpec<f64>, xs: &[Vec<f64>], seed: u64) -> Vec<f64> {
        let n = xs.len();
        let mut k = Matrix::from_fn(n, n, |i, j| kernel.eval_unchecked(&xs[i], &xs[j]));
        k.add_diagonal(1e-10);
        let c = Cholesky::new(&k).unwrap();
        let mut rng = rng_from(seed);
        let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        (0..n).map(|i| (0..=i).map(|j| c.lower()[(i, j)] * z[j]).sum()).collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let xs: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 / 11.0, (i as f64 * 0.7).sin()]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x[0]).sin() + x[1]).collect();
        let data = Dataset::new(2, xs, ys, 0.0).unwrap();
        for fam in [KernelFamily::SquaredExponential, KernelFamily::Matern52] {
            let p = [0.3f64, -0.8, -4.0];
            let (_, g) = neg_lml_and_grad(&data, fam, p);
            for i in 0..3 {
                let h = 1e-5;
                let mut a = p;
                let mut b = p;
                a[i] += h;
                b[i] -= h;
                let fd = (neg_lml_and_grad(&data, fam, a).0 - neg_lml_and_grad(&data, fam, b).0) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-4 * (1.0 + fd.abs()), "{fam} param {i}: {fd} vs {}", g[i]);
            }
            let k = KernelSpec::new(fam, p[0].exp(), p[1].exp(), 2).unwrap();
            let lml = log_marginal_likelihood(&data, &k, p[2].exp()).unwrap();
            assert!((lml + neg_lml_and_grad(&data, fam, p).0).abs() < 1e-9);
        }
    }

    #[test]
    fn recovers_lengthscale_of_sampled_gp() {
        let truth = KernelSpec::se(1.0, 0.3, 1).unwrap();
        let xs: Vec<Vec<f64>> = (0..50).map(|i| vec![(i as f64 + 0.5) / 50.0]).collect();
        let ys = sample_gp(&truth, &xs, 17);
        let data = Dataset::new(1, xs, ys, 0.0).unwrap();
        let fit = fit_hyperparameters(&data, &FitConfig::default(), 1.0, 5).unwrap();
        let l = fit.kernel.lengthscales()[0];
        assert!(l > 0.15 && l < 0.6, "recovered lengthscale {l}");
        let true_lml = log_marginal_likelihood(&data, &truth, 1e-8).unwrap();
        assert!(fit.log_likelihood >= true_lml - 1e-6, "{} < {}", fit.log_likelihood, true_lml);
    }

    #[test]
    fn zero_values_push_theta_to_lower_bound() {
        let xs: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 / 7.0]).collect();
        let data = Dataset::new(1, xs, vec![0.0; 8], 0.0).unwrap();
        let fit = fit_hyperparameters(&data, &FitConfig::default(), 1.0, 1).unwrap();
        assert!(fit.kernel.theta() < 1.1e-3, "theta {}", fit.kernel.theta());
    }

    #[test]
    fn duplicated_data_gives_same_kernel() {
        let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 9.0]).collect();
        // well-conditioned K with the noise optimum at its lower bound
        let ys: Vec<f64> = xs.iter().map(|x| (12.0 * x[0]).sin() + 0.5 * x[0]).collect();
        let data = Dataset::new(1, xs.clone(), ys.clone(), 0.0).unwrap();
        let mut dx = xs.clone();
        dx.extend(xs);
        let mut dy = ys.clone();
        dy.extend(ys);
        let dup = Dataset::new(1, dx, dy, 0.0).unwrap();
        let cfg = FitConfig::default();
        let a = fit_hyperparameters(&data, &cfg, 1.0, 3).unwrap();
        let b = fit_hyperparameters(&dup, &cfg, 1.0, 3).unwrap();
        assert!(a.noise < 1.1e-8 && b.noise < 1.1e-8);
        assert!((a.kernel.theta().ln() - b.kernel.theta().ln()).abs() < 1e-3, "{} {}", a.kernel.theta(), b.kernel.theta());
        let (la, lb) = (a.kernel.lengthscales()[0], b.kernel.lengthscales()[0]);
        assert!((la.ln() - lb.ln()).abs() < 1e-3, "{la} {lb}");
    }

    #[test]
    fn too_little_data_returns_default() {
        let data = Dataset::new(2, vec![vec![0.0, 0.0]], vec![1.0], 0.0).unwrap();
        let fit = fit_hyperparameters(&data, &FitConfig::default(), 2.0, 0).unwrap();
        assert!(fit.used_default);
        assert_eq!(fit.kernel.theta(), 1.0);
        assert_eq!(fit.kernel.lengthscales(), &[0.5, 0.5]);
    }

    #[test]
    fn fit_is_deterministic() {
        let xs: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64 / 8.0, ((i * 7) % 9) as f64 / 8.0]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x[0] * x[1] - x[0]).collect();
        let data = Dataset::new(2, xs, ys, 0.0).unwrap();
        let a = fit_hyperparameters(&data, &FitConfig::default(), 1.4, 9).unwrap();
        let b = fit_hyperparameters(&data, &FitConfig::default(), 1.4, 9).unwrap();
        assert_eq!(a, b);
    }
}

//! Inner maximisation of the acquisition function over a box, and the
//! per-ball refinement used once the search region is a union of balls.

use rand::Rng as _;
use rayon::prelude::*;

use crate::acquisition::{asymptotic_value, Ucb};
use crate::bounds::BoxBounds;
use crate::error::{invalid, Result};
use crate::expansion::SearchRegion;
use crate::gp::GpPosterior;
use crate::rng::rng_from;
use crate::scalar::Scalar;

/// Tuning knobs for the multistart local ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiStartConfig {
    /// Total number of local searches, including the incumbent start.
    pub starts: usize,
    /// Iteration cap per local search.
    pub max_iter: usize,
    /// Finite-difference step as a fraction of the box side.
    pub fd_step: f64,
    /// Stop when the projected gradient (unit coordinates) falls below this.
    pub grad_tol: f64,
}

impl Default for MultiStartConfig {
    fn default() -> Self {
        Self { starts: 32, max_iter: 200, fd_step: 1e-6, grad_tol: 1e-9 }
    }
}

/// Best point found and its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Maximum<T> {
    pub point: Vec<T>,
    pub value: T,
}

const HALTON_PRIMES: [u32; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103,
    107, 109, 113, 127, 131,
];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

/// `count` points of a randomly shifted Halton sequence in `[0,1]^dim`.
pub fn shifted_halton(count: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    (0..count)
        .map(|i| {
            (0..dim)
                .map(|j| match HALTON_PRIMES.get(j) {
                    Some(&p) => (radical_inverse(i as u64 + 1, p) + shift[j]).fract(),
                    None => rng.random::<f64>(),
                })
                .collect()
        })
        .collect()
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn inf_norm<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
}

/// Projected quasi-Newton (BFGS) descent on the unit cube.
///
/// `fg` returns the value to minimise and its gradient. Components pinned at
/// a bound with the gradient pointing outward are held fixed.
pub(crate) fn minimize_unit_cube<T: Scalar>(
    fg: &dyn Fn(&[T]) -> (T, Vec<T>),
    start: &[T],
    max_iter: usize,
    grad_tol: T,
) -> (Vec<T>, T) {
    let n = start.len();
    let zero = T::zero();
    let one = T::one();
    let clamp01 = |u: &mut [T]| u.iter_mut().for_each(|v| *v = v.max(zero).min(one));

    let mut u = start.to_vec();
    clamp01(&mut u);
    let (mut fu, mut g) = fg(&u);
    if n == 0 || !fu.is_finite() {
        return (u, fu);
    }
    // Inverse Hessian approximation, row-major n×n.
    let mut h = vec![zero; n * n];
    let reset = |h: &mut Vec<T>, scale: T| {
        h.iter_mut().for_each(|v| *v = zero);
        for i in 0..n {
            h[i * n + i] = scale;
        }
    };
    let initial_scale = |g: &[T]| {
        let gn = inf_norm(g);
        if gn > zero { (T::lit(0.1) / gn).min(one) } else { one }
    };
    reset(&mut h, initial_scale(&g));
    let mut fresh = true;

    for _ in 0..max_iter {
        let active: Vec<bool> = (0..n).map(|i| (u[i] <= zero && g[i] > zero) || (u[i] >= one && g[i] < zero)).collect();
        let pg_norm = (0..n).filter(|&i| !active[i]).fold(zero, |m, i| m.max(g[i].abs()));
        if pg_norm <= grad_tol * fu.abs().max(one) {
            break;
        }
        let mut p: Vec<T> = (0..n)
            .map(|i| if active[i] { zero } else { -(0..n).filter(|&j| !active[j]).map(|j| h[i * n + j] * g[j]).sum::<T>() })
            .collect();
        if !(dot(&p, &g) < zero) {
            reset(&mut h, initial_scale(&g));
            fresh = true;
            let s = h[0];
            p = (0..n).map(|i| if active[i] { zero } else { -s * g[i] }).collect();
        }

        let mut alpha = one;
        let mut accepted = None;
        for _ in 0..40 {
            let mut trial: Vec<T> = u.iter().zip(&p).map(|(&a, &b)| a + alpha * b).collect();
            clamp01(&mut trial);
            let step: Vec<T> = trial.iter().zip(&u).map(|(&a, &b)| a - b).collect();
            if inf_norm(&step) <= T::epsilon() {
                break;
            }
            let (ft, gt) = fg(&trial);
            if ft.is_finite() && ft <= fu + T::lit(1e-4) * dot(&g, &step) {
                accepted = Some((trial, ft, gt, step));
                break;
            }
            alpha = alpha * T::lit(0.5);
        }
        let Some((un, fnew, gnew, s)) = accepted else {
            if fresh {
                break;
            }
            reset(&mut h, initial_scale(&g));
            fresh = true;
            continue;
        };
        let y: Vec<T> = gnew.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &y);
        let improvement = fu - fnew;
        u = un;
        fu = fnew;
        g = gnew;
        if sy > T::lit(1e-12) * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if fresh {
                let yy = dot(&y, &y);
                reset(&mut h, sy / yy);
            }
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
            let rho = one / sy;
            let hy: Vec<T> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] = h[i * n + j] - rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
            fresh = false;
        }
        if improvement.abs() <= T::epsilon() * fu.abs().max(one) && inf_norm(&s) <= T::lit(1e-12) {
            break;
        }
    }
    (u, fu)
}

/// Central (one-sided at the faces) finite-difference gradient on the unit cube.
fn fd_gradient<T: Scalar>(f: &dyn Fn(&[T]) -> T, u: &[T], fu: T, h: T) -> Vec<T> {
    let mut probe = u.to_vec();
    (0..u.len())
        .map(|i| {
            let base = u[i];
            let up = base + h <= T::one();
            let down = base - h >= T::zero();
            let g = match (down, up) {
                (true, true) => {
                    probe[i] = base + h;
                    let fp = f(&probe);
                    probe[i] = base - h;
                    let fm = f(&probe);
                    (fp - fm) / (h + h)
                }
                (false, _) => {
                    probe[i] = base + h;
                    (f(&probe) - fu) / h
                }
                (true, false) => {
                    probe[i] = base - h;
                    (fu - f(&probe)) / h
                }
            };
            probe[i] = base;
            g
        })
        .collect()
}

fn better<T: Scalar>(a: &Maximum<T>, b: &Maximum<T>) -> bool {
    // higher value wins; ties broken towards lexicographically smaller points
    if a.value != b.value {
        return a.value > b.value || b.value.is_nan();
    }
    for (x, y) in a.point.iter().zip(&b.point) {
        if x != y {
            return x < y;
        }
    }
    false
}

/// Multistart maximisation of `f` over `bounds` with explicit starting points
/// (given in the original coordinates).
pub fn maximize_from_starts<T, F>(
    f: &F,
    bounds: &BoxBounds<T>,
    starts: &[Vec<T>],
    config: &MultiStartConfig,
) -> Result<Maximum<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T + Sync,
{
    if starts.is_empty() {
        return Err(invalid("maximisation needs at least one start"));
    }
    let free: Vec<usize> = (0..bounds.dim()).filter(|&j| bounds.side(j) > T::zero()).collect();
    let h = T::lit(config.fd_step);
    let tol = T::lit(config.grad_tol);
    let embed = |u: &[T]| -> Vec<T> {
        let mut x = bounds.lo().to_vec();
        for (k, &j) in free.iter().enumerate() {
            x[j] = bounds.lo()[j] + u[k] * bounds.side(j);
        }
        x
    };
    let neg = |u: &[T]| -> T {
        let v = f(&embed(u));
        if v.is_nan() { T::infinity() } else { -v }
    };
    let results: Vec<Maximum<T>> = starts
        .par_iter()
        .map(|s| {
            let unit = bounds.to_unit(&bounds.clamp(s));
            let u0: Vec<T> = free.iter().map(|&j| unit[j]).collect();
            let fg = |u: &[T]| {
                let fu = neg(u);
                let g = fd_gradient(&neg, u, fu, h);
                (fu, g)
            };
            let (u, fu) = minimize_unit_cube(&fg, &u0, config.max_iter, tol);
            let point = bounds.clamp(&embed(&u));
            Maximum { point, value: -fu }
        })
        .collect();
    let mut best = results[0].clone();
    for r in &results[1..] {
        if better(r, &best) {
            best = r.clone();
        }
    }
    Ok(best)
}

/// Maximises `f` over `bounds`: `starts - 1` shifted-Halton starts plus the
/// incumbent (when given), each refined by projected quasi-Newton ascent.
pub fn maximize_over_box_with<T, F>(
    f: &F,
    bounds: &BoxBounds<T>,
    seed: u64,
    incumbent: Option<&[T]>,
    config: &MultiStartConfig,
) -> Result<Maximum<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T + Sync,
{
    let n_lowdisc = match incumbent {
        Some(_) => config.starts.saturating_sub(1).max(1),
        None => config.starts.max(1),
    };
    let mut starts: Vec<Vec<T>> = shifted_halton(n_lowdisc, bounds.dim(), seed)
        .into_iter()
        .map(|u| bounds.from_unit(&u.into_iter().map(T::lit).collect::<Vec<_>>()))
        .collect();
    if let Some(x) = incumbent {
        if x.len() != bounds.dim() {
            return Err(invalid("incumbent dimension does not match the box"));
        }
        starts.push(bounds.clamp(x));
    }
    maximize_from_starts(f, bounds, &starts, config)
}

/// [`maximize_over_box_with`] under the default configuration.
pub fn maximize_over_box<T, F>(f: &F, bounds: &BoxBounds<T>, seed: u64, incumbent: Option<&[T]>) -> Result<Maximum<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T + Sync,
{
    maximize_over_box_with(f, bounds, seed, incumbent, &MultiStartConfig::default())
}

/// Which branch of the refinement produced the suggestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefinedBranch {
    /// Maximum over the whole hypercube was accepted as is.
    Hypercube,
    /// A per-ball maximum below `√β·θ − ε` was found.
    Ball(usize),
    /// No ball qualified; best per-ball maximum returned.
    Fallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinedSuggestion<T> {
    pub point: Vec<T>,
    pub value: T,
    pub branch: RefinedBranch,
    /// Maximum over the whole hypercube.
    pub hypercube_max: T,
}

/// Acquisition maximisation over a union-of-balls region.
///
/// The encompassing hypercube tends to push suggestions to its corners when
/// the acquisition peaks at infinity. If the hypercube maximum lies in
/// `[√β·θ − ε, √β·θ]`, each ball's own bounding box is searched in order of
/// decreasing UCB at its centre and the first maximum below `√β·θ − ε` is
/// returned instead.
pub fn refined_maximize<T: Scalar>(
    posterior: &GpPosterior<T>,
    beta: T,
    epsilon: T,
    region: &SearchRegion<T>,
    seed: u64,
    incumbent: Option<&[T]>,
    config: &MultiStartConfig,
) -> Result<RefinedSuggestion<T>> {
    let radius = region
        .radius()
        .ok_or_else(|| invalid("refined maximisation needs a union-of-balls region"))?;
    if region.centers().is_empty() {
        return Err(invalid("region has no balls"));
    }
    let acq = Ucb::new(posterior, beta);
    let f = |x: &[T]| acq.value_unchecked(x);
    let big = maximize_over_box_with(&f, region.hypercube(), seed, incumbent, config)?;
    let ceiling = asymptotic_value(beta, posterior.kernel().theta());
    let floor = ceiling - epsilon;
    if big.value > ceiling || big.value < floor {
        return Ok(RefinedSuggestion {
            point: big.point,
            value: big.value,
            branch: RefinedBranch::Hypercube,
            hypercube_max: big.value,
        });
    }

    let mut order: Vec<(usize, T)> = region.centers().iter().enumerate().map(|(i, c)| (i, f(c))).collect();
    order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));

    let mut best: Option<(usize, Maximum<T>)> = None;
    for (rank, &(i, _)) in order.iter().enumerate() {
        let ball_box = region.ball_box(i, radius)?;
        let ball_seed = crate::rng::derive_seed(seed, 1, rank as u64);
        let m = maximize_over_box_with(&f, &ball_box, ball_seed, Some(&region.centers()[i]), config)?;
        if m.value < floor {
            return Ok(RefinedSuggestion { point: m.point, value: m.value, branch: RefinedBranch::Ball(i), hypercube_max: big.value });
        }
        if best.as_ref().map_or(true, |(_, b)| better(&m, b)) {
            best = Some((i, m));
        }
    }
    let (_, m) = best.expect("at least one ball");
    // a per-ball search that beat the hypercube search means the latter
    // missed; keep the hypercube answer so the result stays a restriction
    if m.value > big.value {
        return Ok(RefinedSuggestion { point: big.point, value: big.value, branch: RefinedBranch::Fallback, hypercube_max: big.value });
    }
    Ok(RefinedSuggestion { point: m.point, value: m.value, branch: RefinedBranch::Fallback, hypercube_max: big.value })
}

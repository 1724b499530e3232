use proptest::prelude::*;
use rand::Rng;
use ubo_core::gp::{posterior, Dataset, GpPosterior, KernelSpec};
use ubo_core::linalg::{symmetric_eigenvalues, Matrix};
use ubo_core::rng::rng_from;

/// Gauss-Jordan inverse with partial pivoting, kept deliberately naive.
fn dense_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        let piv = m[c][c];
        for v in m[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let src = m[c].clone();
                for (v, s) in m[r].iter_mut().zip(&src) {
                    *v -= f * s;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn textbook(xs: &[Vec<f64>], ys: &[f64], noise: f64, theta: f64, l: f64, x: &[f64]) -> (f64, f64) {
    let k = |a: &[f64], b: &[f64]| {
        let d2: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
        theta * theta * (-d2 / (2.0 * l * l)).exp()
    };
    let n = xs.len();
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| k(&xs[i], &xs[j]) + if i == j { noise } else { 0.0 }).collect())
        .collect();
    let inv = dense_inverse(&a);
    let kx: Vec<f64> = xs.iter().map(|xi| k(xi, x)).collect();
    let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| inv[i][j] * kx[j]).sum()).collect();
    let mean = w.iter().zip(ys).map(|(a, b)| a * b).sum();
    let var = theta * theta - w.iter().zip(&kx).map(|(a, b)| a * b).sum::<f64>();
    (mean, var.max(0.0))
}

fn random_instance(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>, f64, f64, f64) {
    let mut rng = rng_from(seed);
    let d = rng.random_range(1..=5);
    let n = rng.random_range(1..=15);
    let xs = (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let ys = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let noise = 10f64.powf(rng.random_range(-3.0..-1.0));
    let theta = rng.random_range(0.5..2.0);
    let l = rng.random_range(0.3..2.0);
    (xs, ys, noise, theta, l)
}

#[test]
fn matches_dense_explicit_inverse() {
    for seed in 0..100 {
        let (xs, ys, noise, theta, l) = random_instance(seed);
        let d = xs[0].len();
        let data = Dataset::new(d, xs.clone(), ys.clone(), noise).unwrap();
        let kernel = KernelSpec::se(theta, l, d).unwrap();
        let mut rng = rng_from(1000 + seed);
        for _ in 0..5 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.5..2.5)).collect();
            let (m, v) = posterior(&data, &kernel, &x).unwrap();
            let (mr, vr) = textbook(&xs, &ys, noise, theta, l, &x);
            assert!((m - mr).abs() <= 1e-8 * mr.abs().max(1e-3), "seed {seed}: mean {m} vs {mr}");
            assert!((v - vr).abs() <= 1e-8 * vr.abs().max(1e-3), "seed {seed}: var {v} vs {vr}");
        }
    }
}

#[test]
fn near_noise_free_interpolation() {
    for seed in 0..20 {
        let mut rng = rng_from(seed);
        let d = rng.random_range(1..=3);
        let n = rng.random_range(2..=10);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let theta = 1.3;
        let post = GpPosterior::new(Dataset::new(d, xs.clone(), ys.clone(), 1e-12).unwrap(), KernelSpec::se(theta, 0.5, d).unwrap()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            let (m, v) = post.predict(x).unwrap();
            assert!((m - y).abs() < 1e-5, "seed {seed}: {m} vs {y}");
            assert!(v <= 1e-6 * theta * theta, "seed {seed}: var {v}");
        }
    }
}

#[test]
fn lambda_max_at_least_inverse_prior_plus_noise() {
    for seed in 0..200 {
        let (xs, ys, noise, theta, l) = random_instance(seed);
        let d = xs[0].len();
        let post = GpPosterior::new(Dataset::new(d, xs, ys, noise).unwrap(), KernelSpec::se(theta, l, d).unwrap()).unwrap();
        let q = post.expansion_quantities().unwrap();
        assert!(q.lambda_max >= (1.0 - 1e-10) / (theta * theta + noise), "seed {seed}");
    }
}

#[test]
fn f32_tracks_f64() {
    let xs = vec![vec![0.0, 0.1], vec![0.7, -0.3], vec![-0.5, 0.4]];
    let ys = vec![0.5, -0.2, 1.0];
    let a = GpPosterior::new(Dataset::new(2, xs.clone(), ys.clone(), 1e-2).unwrap(), KernelSpec::se(1.0, 0.6, 2).unwrap()).unwrap();
    let xs32: Vec<Vec<f32>> = xs.iter().map(|r| r.iter().map(|&v| v as f32).collect()).collect();
    let ys32: Vec<f32> = ys.iter().map(|&v| v as f32).collect();
    let b = GpPosterior::new(Dataset::new(2, xs32, ys32, 1e-2f32).unwrap(), KernelSpec::se(1.0f32, 0.6, 2).unwrap()).unwrap();
    let (m, v) = a.predict(&[0.2, 0.2]).unwrap();
    let (m32, v32) = b.predict(&[0.2f32, 0.2]).unwrap();
    assert!((m - m32 as f64).abs() < 1e-4 && (v - v32 as f64).abs() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kernel_matrix_is_symmetric_psd(
        d in 1usize..=5,
        pts in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 5), 1..=20),
        theta in 0.1f64..3.0,
        l in 0.05f64..3.0,
        matern in any::<bool>(),
    ) {
        let pts: Vec<Vec<f64>> = pts.into_iter().map(|p| p[..d].to_vec()).collect();
        let k = if matern { KernelSpec::matern52(theta, l, d) } else { KernelSpec::se(theta, l, d) }.unwrap();
        let n = pts.len();
        let m = Matrix::from_fn(n, n, |i, j| k.eval(&pts[i], &pts[j]).unwrap());
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(m[(i, j)], m[(j, i)]);
            }
        }
        let eig = symmetric_eigenvalues(&m);
        prop_assert!(eig[0] >= -1e-8 * theta * theta, "min eigenvalue {}", eig[0]);
    }

    #[test]
    fn posterior_ignores_row_order(seed in 0u64..1000) {
        let (xs, ys, noise, theta, l) = random_instance(seed);
        let d = xs[0].len();
        let k = KernelSpec::se(theta, l, d).unwrap();
        let x = vec![0.1; d];
        let a = posterior(&Dataset::new(d, xs.clone(), ys.clone(), noise).unwrap(), &k, &x).unwrap();
        let b = posterior(&Dataset::new(d, xs.into_iter().rev().collect(), ys.into_iter().rev().collect(), noise).unwrap(), &k, &x).unwrap();
        prop_assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
    }
}

use rand::Rng;
use ubo_core::acq_opt::maximize_over_box;
use ubo_core::benchlab::{aggregate, run_repetitions, Benchmark, ExperimentSettings};
use ubo_core::engine::Strategy;
use ubo_core::rng::rng_from;

/// Best of `samples` uniform draws over the canonical domain, then a local
/// polish started from that point.
fn random_search(b: Benchmark, samples: usize, seed: u64) -> (Vec<f64>, f64) {
    let dom = b.domain();
    let mut rng = rng_from(seed);
    let mut best = (dom.center(), f64::NEG_INFINITY);
    let mut x = vec![0.0; b.dim()];
    for _ in 0..samples {
        for (j, v) in x.iter_mut().enumerate() {
            *v = rng.random_range(dom.lo()[j]..=dom.hi()[j]);
        }
        let y = b.evaluate(&x);
        if y > best.1 {
            best = (x.clone(), y);
        }
    }
    let f = |x: &[f64]| b.evaluate(x);
    let polished = maximize_over_box(&f, &dom, seed, Some(&best.0)).unwrap();
    if polished.value > best.1 {
        (polished.point, polished.value)
    } else {
        best
    }
}

#[test]
fn beale_optimum() {
    assert_eq!(Benchmark::Beale.evaluate(&[3.0, 0.5]), 0.0);
    let (_, v) = random_search(Benchmark::Beale, 100_000, 1);
    assert!(v <= 0.0 && v > -1e-3);
}

#[test]
fn hartmann_optima_agree_with_random_search() {
    for (b, seed) in [(Benchmark::Hartmann3, 2), (Benchmark::Hartmann6, 3)] {
        let (_, v) = random_search(b, 1_000_000, seed);
        assert!(b.max_value() >= v - 1e-6, "{b}: {v} above {}", b.max_value());
        assert!((b.max_value() - v).abs() < 1e-2, "{b}: {v} vs {}", b.max_value());
        let at = b.evaluate(&b.argmax()[0]);
        assert!((at - b.max_value()).abs() < 1e-9, "{b}: {at}");
    }
}

#[test]
fn eggholder_optimum_agrees_with_random_search() {
    let b = Benchmark::Eggholder;
    let (x, v) = random_search(b, 1_000_000, 4);
    assert!(b.max_value() >= v - 1e-6);
    assert!((b.max_value() - v).abs() < 1.0, "{v} at {x:?}");
    assert!((b.evaluate(&[512.0f64, 404.2319]) - 959.6407).abs() < 1e-3);
}

#[test]
fn other_benchmarks_respect_their_optima() {
    for b in [Benchmark::Levy(3), Benchmark::Levy(10), Benchmark::Ackley(2), Benchmark::Ackley(10)] {
        let (_, v) = random_search(b, 100_000, 5);
        assert!(b.max_value() >= v - 1e-9, "{b}: {v}");
        assert!((b.evaluate(&b.argmax()[0]) - b.max_value()).abs() < 1e-12);
    }
}

#[test]
fn mean_best_curve_is_monotone() {
    let seeds: Vec<u64> = (0..30).collect();
    let traces = run_repetitions(&Benchmark::Beale, Strategy::Ubo, &seeds, &ExperimentSettings::<f64>::default()).unwrap();
    let curves: Vec<Vec<f64>> = traces.iter().map(|t| t.best_curve()).collect();
    let agg = aggregate(&curves).unwrap();
    assert_eq!(agg.len(), 26);
    for w in agg.windows(2) {
        assert!(w[1].mean >= w[0].mean);
    }
}

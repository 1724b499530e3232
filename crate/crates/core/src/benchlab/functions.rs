//! Synthetic test functions in maximisation form (the usual minimisation
//! forms negated), with canonical domains and known optima.

use std::fmt;
use std::str::FromStr;

use crate::bounds::BoxBounds;
use crate::error::{invalid, UboError};
use crate::scalar::Scalar;

/// A benchmark objective with ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Benchmark {
    Beale,
    Eggholder,
    /// Levy in the given dimension.
    Levy(usize),
    Hartmann3,
    Hartmann6,
    /// Ackley in the given dimension.
    Ackley(usize),
}

const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];

const HARTMANN3_A: [[f64; 3]; 4] = [[3.0, 10.0, 30.0], [0.1, 10.0, 35.0], [3.0, 10.0, 30.0], [0.1, 10.0, 35.0]];
const HARTMANN3_P: [[f64; 3]; 4] = [
    [0.3689, 0.1170, 0.2673],
    [0.4699, 0.4387, 0.7470],
    [0.1091, 0.8732, 0.5547],
    [0.0381, 0.5743, 0.8828],
];

const HARTMANN6_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HARTMANN6_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

fn hartmann<T: Scalar, const D: usize>(x: &[T], a: &[[f64; D]; 4], p: &[[f64; D]; 4]) -> T {
    (0..4)
        .map(|i| {
            let inner: T = (0..D).map(|j| T::lit(a[i][j]) * (x[j] - T::lit(p[i][j])).powi(2)).sum();
            T::lit(HARTMANN_ALPHA[i]) * (-inner).exp()
        })
        .sum()
}

impl Benchmark {
    pub const NAMES: [&'static str; 8] = ["beale", "eggholder", "levy3", "levy10", "hartmann3", "hartmann6", "ackley10", "ackley2"];

    pub fn name(&self) -> String {
        match self {
            Benchmark::Beale => "beale".into(),
            Benchmark::Eggholder => "eggholder".into(),
            Benchmark::Levy(d) => format!("levy{d}"),
            Benchmark::Hartmann3 => "hartmann3".into(),
            Benchmark::Hartmann6 => "hartmann6".into(),
            Benchmark::Ackley(d) => format!("ackley{d}"),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Benchmark::Beale | Benchmark::Eggholder => 2,
            Benchmark::Levy(d) | Benchmark::Ackley(d) => *d,
            Benchmark::Hartmann3 => 3,
            Benchmark::Hartmann6 => 6,
        }
    }

    /// Canonical domain; metadata only, the evaluator is defined everywhere.
    pub fn domain(&self) -> BoxBounds<f64> {
        let d = self.dim();
        let (lo, hi) = match self {
            Benchmark::Beale => (-4.5, 4.5),
            Benchmark::Eggholder => (-512.0, 512.0),
            Benchmark::Levy(_) => (-10.0, 10.0),
            Benchmark::Hartmann3 | Benchmark::Hartmann6 => (0.0, 1.0),
            Benchmark::Ackley(_) => (-32.768, 32.768),
        };
        BoxBounds::cube(lo, hi, d).expect("valid canonical domain")
    }

    /// Known maximisers inside the canonical domain.
    pub fn argmax(&self) -> Vec<Vec<f64>> {
        match self {
            Benchmark::Beale => vec![vec![3.0, 0.5]],
            Benchmark::Eggholder => vec![vec![512.0, 404.2319]],
            Benchmark::Levy(d) => vec![vec![1.0; *d]],
            Benchmark::Hartmann3 => vec![vec![0.114_588_88, 0.555_648_90, 0.852_546_98]],
            Benchmark::Hartmann6 => vec![vec![0.201_689_51, 0.150_010_69, 0.476_873_97, 0.275_332_43, 0.311_651_61, 0.657_300_53]],
            Benchmark::Ackley(d) => vec![vec![0.0; *d]],
        }
    }

    /// Known maximum value over the canonical domain.
    pub fn max_value(&self) -> f64 {
        match self {
            Benchmark::Beale | Benchmark::Levy(_) | Benchmark::Ackley(_) => 0.0,
            Benchmark::Eggholder => 959.640_662_720_851,
            Benchmark::Hartmann3 => 3.862_779_787_332_66,
            Benchmark::Hartmann6 => 3.322_368_011_415_51,
        }
    }

    /// Objective value (maximisation form).
    pub fn evaluate<T: Scalar>(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.dim(), "{} expects d={}", self.name(), self.dim());
        let c = T::lit;
        match self {
            Benchmark::Beale => {
                let (a, b) = (x[0], x[1]);
                let t1 = c(1.5) - a + a * b;
                let t2 = c(2.25) - a + a * b * b;
                let t3 = c(2.625) - a + a * b * b * b;
                -(t1 * t1 + t2 * t2 + t3 * t3)
            }
            Benchmark::Eggholder => {
                let (a, b) = (x[0], x[1]);
                let b47 = b + c(47.0);
                let f = -b47 * (a / c(2.0) + b47).abs().sqrt().sin() - a * (a - b47).abs().sqrt().sin();
                -f
            }
            Benchmark::Levy(d) => {
                let pi = T::PI();
                let w: Vec<T> = x.iter().map(|&v| T::one() + (v - T::one()) / c(4.0)).collect();
                let mut f = (pi * w[0]).sin().powi(2);
                for &wi in &w[..d - 1] {
                    f = f + (wi - T::one()).powi(2) * (T::one() + c(10.0) * (pi * wi + T::one()).sin().powi(2));
                }
                let wd = w[d - 1];
                f = f + (wd - T::one()).powi(2) * (T::one() + (c(2.0) * pi * wd).sin().powi(2));
                -f
            }
            Benchmark::Hartmann3 => hartmann(x, &HARTMANN3_A, &HARTMANN3_P),
            Benchmark::Hartmann6 => hartmann(x, &HARTMANN6_A, &HARTMANN6_P),
            Benchmark::Ackley(d) => {
                let n = T::from_count(*d);
                let sq: T = x.iter().map(|&v| v * v).sum();
                let cs: T = x.iter().map(|&v| (T::TAU() * v).cos()).sum();
                let f = -c(20.0) * (-c(0.2) * (sq / n).sqrt()).exp() - (cs / n).exp() + c(20.0) + T::E();
                -f
            }
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Benchmark {
    type Err = UboError;

    fn from_str(s: &str) -> Result<Self, UboError> {
        let s = s.to_ascii_lowercase();
        let with_dim = |prefix: &str| s.strip_prefix(prefix).and_then(|r| r.parse::<usize>().ok()).filter(|&d| d >= 1);
        match s.as_str() {
            "beale" => Ok(Benchmark::Beale),
            "eggholder" => Ok(Benchmark::Eggholder),
            "hartmann3" | "hartman3" => Ok(Benchmark::Hartmann3),
            "hartmann6" | "hartman6" => Ok(Benchmark::Hartmann6),
            _ => {
                if let Some(d) = with_dim("levy") {
                    Ok(Benchmark::Levy(d))
                } else if let Some(d) = with_dim("ackley") {
                    Ok(Benchmark::Ackley(d))
                } else {
                    Err(invalid(format!("unknown benchmark `{s}`")))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optima_values() {
        assert_eq!(Benchmark::Beale.evaluate(&[3.0, 0.5]), 0.0);
        assert!(Benchmark::Levy(3).evaluate(&[1.0f64, 1.0, 1.0]).abs() < 1e-15);
        assert!(Benchmark::Ackley(10).evaluate(&[0.0f64; 10]).abs() < 1e-12);
        for b in [Benchmark::Hartmann3, Benchmark::Hartmann6, Benchmark::Eggholder] {
            let v = b.evaluate(&b.argmax()[0]);
            assert!((v - b.max_value()).abs() < 1e-4 * b.max_value().abs(), "{b}: {v}");
        }
    }

    #[test]
    fn names_round_trip() {
        for name in Benchmark::NAMES {
            let b: Benchmark = name.parse().unwrap();
            assert_eq!(b.name(), name);
        }
        assert!("rosenbrock".parse::<Benchmark>().is_err());
        assert!("levy0".parse::<Benchmark>().is_err());
    }

    #[test]
    fn argmax_inside_domain() {
        for name in Benchmark::NAMES {
            let b: Benchmark = name.parse().unwrap();
            for a in b.argmax() {
                assert!(b.domain().contains(&a));
            }
        }
    }

    #[test]
    fn evaluators_generic_and_pure() {
        let x32 = [0.2f32, 0.3, 0.4];
        let x64 = [0.2f64, 0.3, 0.4];
        let a = Benchmark::Hartmann3.evaluate(&x32) as f64;
        let b: f64 = Benchmark::Hartmann3.evaluate(&x64);
        assert!((a - b).abs() < 1e-5);
        assert_eq!(Benchmark::Beale.evaluate(&[1.0, 2.0]), Benchmark::Beale.evaluate(&[1.0, 2.0]));
        // finite well outside the canonical domain
        assert!(Benchmark::Eggholder.evaluate(&[5000.0f64, -3000.0]).is_finite());
    }
}

//! Axis-aligned boxes.

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Axis-aligned box `[lo_j, hi_j]` for each dimension `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds<T> {
    lo: Vec<T>,
    hi: Vec<T>,
}

impl<T: Scalar> BoxBounds<T> {
    /// Fails on empty, non-finite or inverted bounds. `lo == hi` is allowed.
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(invalid(format!("box bounds of lengths {} and {}", lo.len(), hi.len())));
        }
        for (j, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !l.is_finite() || !h.is_finite() || l > h {
                return Err(invalid(format!("bad bounds [{l}, {h}] in dimension {j}")));
            }
        }
        Ok(Self { lo, hi })
    }

    /// Cube `[lo, hi]^dim`.
    pub fn cube(lo: T, hi: T, dim: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[T] {
        &self.lo
    }

    pub fn hi(&self) -> &[T] {
        &self.hi
    }

    pub fn side(&self, j: usize) -> T {
        self.hi[j] - self.lo[j]
    }

    pub fn longest_side(&self) -> T {
        (0..self.dim()).map(|j| self.side(j)).fold(T::zero(), T::max)
    }

    pub fn diameter(&self) -> T {
        (0..self.dim()).map(|j| self.side(j) * self.side(j)).sum::<T>().sqrt()
    }

    pub fn center(&self) -> Vec<T> {
        self.lo.iter().zip(&self.hi).map(|(&l, &h)| (l + h) / T::lit(2.0)).collect()
    }

    pub fn is_degenerate(&self) -> bool {
        (0..self.dim()).any(|j| self.side(j) <= T::zero())
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.contains_with_tol(x, T::zero())
    }

    pub fn contains_with_tol(&self, x: &[T], tol: T) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&l, &h))| v >= l - tol && v <= h + tol)
    }

    /// `other` lies entirely inside `self`.
    pub fn encloses(&self, other: &Self) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    pub fn clamp(&self, x: &[T]) -> Vec<T> {
        x.iter().zip(self.lo.iter().zip(&self.hi)).map(|(&v, (&l, &h))| v.max(l).min(h)).collect()
    }

    /// Box with every side multiplied by `factor` about the same centre.
    pub fn scaled(&self, factor: T) -> Self {
        let half = T::lit(0.5);
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| {
                let c = (l + h) * half;
                let r = (h - l) * half * factor;
                (c - r, c + r)
            })
            .unzip();
        Self { lo, hi }
    }

    /// Point at unit coordinates `u ∈ [0,1]^d`.
    pub fn from_unit(&self, u: &[T]) -> Vec<T> {
        u.iter().enumerate().map(|(j, &v)| self.lo[j] + v * self.side(j)).collect()
    }

    /// Unit coordinates of `x`; degenerate sides map to 0.
    pub fn to_unit(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                let s = self.side(j);
                if s > T::zero() {
                    (v - self.lo[j]) / s
                } else {
                    T::zero()
                }
            })
            .collect()
    }

    pub fn cast<U: Scalar>(&self) -> BoxBounds<U> {
        BoxBounds {
            lo: self.lo.iter().map(|v| U::lit(v.as_f64())).collect(),
            hi: self.hi.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        let b = BoxBounds::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        assert_eq!(b.longest_side(), 2.0);
        assert_eq!(b.center(), vec![1.0, 0.0]);
        assert!(b.contains(&[2.0, 1.0]));
        assert!(!b.contains(&[2.1, 0.0]));
        assert_eq!(b.clamp(&[3.0, -4.0]), vec![2.0, -1.0]);
        let s = b.scaled(2.0);
        assert_eq!(s.lo(), &[-1.0, -2.0]);
        assert!(s.encloses(&b));
        assert_eq!(b.to_unit(&b.from_unit(&[0.25, 0.5])), vec![0.25, 0.5]);
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(BoxBounds::new(vec![1.0], vec![0.0]).is_err());
        assert!(BoxBounds::new(vec![0.0], vec![f64::INFINITY]).is_err());
        assert!(BoxBounds::<f64>::new(vec![], vec![]).is_err());
        assert!(BoxBounds::new(vec![1.0], vec![1.0]).unwrap().is_degenerate());
    }
}

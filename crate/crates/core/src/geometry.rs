//! The expanding interval `0 < x < 1 + k t` and its characteristic reflection map.
//!
//! A right-moving characteristic leaving the line `t - x = y` hits the moving
//! boundary and comes back on `t + x = F(y)` with
//!
//! ```text
//! F(y) = ((1 + k) y + 2) / (1 - k),      F^-1(z) = ((1 - k) z - 2) / (1 + k).
//! ```
//!
//! `F` is affine with the single fixed point `-1/k`, so it is conjugate to the
//! scaling `z -> theta z` with `theta = (1 + k)/(1 - k)` around that point:
//! `F^n(y) = theta^n (y + 1/k) - 1/k`. The intervals `I_n = F^n([-1, 1))`
//! tile `[-1, inf)`.

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainGeometry {
    k: f64,
    theta: f64,
    fixed_point: f64,
}

impl DomainGeometry {
    /// Validates `0 < k < 1` once; everything downstream assumes it.
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(invalid(format!("expansion rate k must satisfy 0 < k < 1 (got {k})")));
        }
        Ok(Self { k, theta: (1.0 + k) / (1.0 - k), fixed_point: -1.0 / k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn fixed_point(&self) -> f64 {
        self.fixed_point
    }

    /// Right end of the domain, `1 + k t`.
    pub fn boundary_position(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid(format!("time must be non-negative (got {t})")));
        }
        Ok(1.0 + self.k * t)
    }

    /// `F^n(y)` for any integer `n` (negative powers are inverse maps).
    pub fn char_map(&self, y: f64, n: i32) -> f64 {
        let shifted = y - self.fixed_point;
        let scaled = match n.cmp(&0) {
            std::cmp::Ordering::Equal => return y,
            std::cmp::Ordering::Greater => shifted * self.theta.powi(n),
            std::cmp::Ordering::Less => shifted / self.theta.powi(-n),
        };
        scaled + self.fixed_point
    }

    /// One forward reflection, written in the direct affine form.
    pub fn reflect(&self, y: f64) -> f64 {
        ((1.0 + self.k) * y + 2.0) / (1.0 - self.k)
    }

    /// One backward reflection, written in the direct affine form.
    pub fn unreflect(&self, z: f64) -> f64 {
        ((1.0 - self.k) * z - 2.0) / (1.0 + self.k)
    }

    /// Left end of `I_n`. `I_0 = [-1, 1)` and `I_n = [F^(n-1)(1), F^n(1))`
    /// for `n >= 1`, so consecutive intervals share their endpoints bit for bit.
    pub fn interval_start(&self, n: u32) -> f64 {
        match n {
            0 => -1.0,
            1 => 1.0,
            _ => self.char_map(1.0, n as i32 - 1),
        }
    }

    /// `I_n` as a half-open pair `(start, end)`.
    pub fn interval(&self, n: u32) -> (f64, f64) {
        (self.interval_start(n), self.interval_start(n + 1))
    }

    /// The unique `n >= 0` with `y` in `I_n`.
    pub fn interval_index(&self, y: f64) -> Result<u32> {
        if !(y >= -1.0) {
            return Err(Error::OutOfCone { y, min: -1.0 });
        }
        if !y.is_finite() {
            return Err(invalid(format!("characteristic coordinate must be finite (got {y})")));
        }
        if y < 1.0 {
            return Ok(0);
        }
        let ratio = (y - self.fixed_point) * self.k / (1.0 - self.k);
        let guess = (ratio.ln() / self.theta.ln()).floor().max(0.0) as u32;
        let mut n = guess;
        while n > 0 && y < self.interval_start(n) {
            n -= 1;
        }
        while y >= self.interval_start(n + 1) {
            n += 1;
        }
        Ok(n)
    }

    /// Pulls `y` in `I_n` back to `I_0`, clamped to `[-1, 1]` against roundoff.
    pub fn to_base(&self, y: f64, n: u32) -> f64 {
        if n == 0 {
            return y;
        }
        self.char_map(y, -(n as i32)).clamp(-1.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(k: f64) -> DomainGeometry {
        DomainGeometry::new(k).unwrap()
    }

    #[test]
    fn rejects_k_outside_unit_interval() {
        for k in [0.0, -0.1, 1.0, 1.5, f64::NAN] {
            assert!(DomainGeometry::new(k).is_err(), "k = {k}");
        }
    }

    #[test]
    fn boundary_position_examples() {
        assert_eq!(g(0.5).boundary_position(0.0).unwrap(), 1.0);
        assert_eq!(g(0.5).boundary_position(2.0).unwrap(), 2.0);
        assert_eq!(g(0.25).boundary_position(4.0).unwrap(), 2.0);
        assert!(g(0.5).boundary_position(-1e-9).is_err());
    }

    #[test]
    fn char_map_examples() {
        let geom = g(0.5);
        assert_eq!(geom.char_map(-1.0, 1), 1.0);
        assert_eq!(geom.char_map(1.0, 1), 7.0);
        assert_eq!(geom.char_map(-2.0, 5), -2.0);
        assert_eq!(geom.char_map(7.0, -1), 1.0);
        assert_eq!(geom.char_map(3.3, 0), 3.3);
    }

    #[test]
    fn closed_form_matches_direct_affine_maps() {
        // Direct forms are the independent route; both examples at k = 0.5.
        let geom = g(0.5);
        assert_eq!(geom.reflect(1.0), 7.0);
        assert_eq!(geom.unreflect(7.0), 1.0);
        for k in [0.1, 0.5, 0.9] {
            let geom = g(k);
            for y in [-1.0, 0.3, 5.0] {
                assert!((geom.char_map(y, 1) - geom.reflect(y)).abs() <= 1e-12 * y.abs().max(1.0));
                assert!((geom.char_map(y, -1) - geom.unreflect(y)).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn fixed_point_is_fixed() {
        for k in [0.05, 0.3, 0.5, 0.95] {
            let geom = g(k);
            let p = geom.fixed_point();
            let ulp = p.abs() * f64::EPSILON;
            assert!((geom.reflect(p) - p).abs() <= 4.0 * geom.theta() * ulp, "k = {k}");
            assert!(geom.theta() > 1.0);
        }
    }

    #[test]
    fn interval_index_examples() {
        let geom = g(0.5);
        assert_eq!(geom.interval_index(0.0).unwrap(), 0);
        assert_eq!(geom.interval_index(-1.0).unwrap(), 0);
        assert_eq!(geom.interval_index(5.0).unwrap(), 1);
        assert_eq!(geom.interval_index(7.0).unwrap(), 2);
        assert_eq!(geom.interval(2), (7.0, 25.0));
        assert!(matches!(geom.interval_index(-1.0000001), Err(Error::OutOfCone { .. })));
    }

    #[test]
    fn reflection_of_minus_one_is_one() {
        for k in [0.01, 0.25, 0.5, 0.75, 0.99] {
            assert!((g(k).char_map(-1.0, 1) - 1.0).abs() < 1e-12);
        }
    }
}

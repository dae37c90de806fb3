//! Initial data `(u0, u0', u1)` on `[0, 1]` and boundary-velocity histories.
//!
//! Analytic data carries exact closures (they may be evaluated slightly
//! outside `[0, 1]`, which the smooth delay history uses). Sampled data is
//! interpolated piecewise linearly on a uniform grid, so `u0'` is piecewise
//! constant and jumps at every interior knot; those knots are reported by
//! [`InitialData::jumps`] so quadrature can split there.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Piecewise-linear interpolant on a uniform grid over `[start, end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSamples {
    start: f64,
    end: f64,
    values: Vec<f64>,
}

impl UniformSamples {
    pub fn new(start: f64, end: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("sampled data needs at least two samples"));
        }
        if !(end > start) {
            return Err(invalid(format!("sample range [{start}, {end}] is empty")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("sampled data contains a non-finite value ({v})")));
        }
        Ok(Self { start, end, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn spacing(&self) -> f64 {
        (self.end - self.start) / (self.values.len() - 1) as f64
    }

    fn segment(&self, x: f64) -> (usize, f64) {
        let h = self.spacing();
        let last = self.values.len() - 2;
        let s = ((x - self.start) / h).clamp(0.0, (last + 1) as f64);
        let i = (s.floor() as usize).min(last);
        (i, s - i as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, w) = self.segment(x);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Slope of the interpolant; right-continuous at knots.
    pub fn slope(&self, x: f64) -> f64 {
        let (i, _) = self.segment(x);
        (self.values[i + 1] - self.values[i]) / self.spacing()
    }

    pub fn interior_knots(&self) -> Vec<f64> {
        let h = self.spacing();
        (1..self.values.len() - 1).map(|i| self.start + i as f64 * h).collect()
    }
}

/// Initial displacement, its derivative and the initial velocity.
#[derive(Clone)]
pub struct InitialData {
    u0: RealFn,
    u0_prime: RealFn,
    u1: RealFn,
    jumps: Vec<f64>,
    label: String,
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialData").field("label", &self.label).field("jumps", &self.jumps).finish()
    }
}

impl InitialData {
    pub fn analytic(
        label: impl Into<String>,
        u0: impl Fn(f64) -> f64 + Send + Sync + 'static,
        u0_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        u1: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            u0: Arc::new(u0),
            u0_prime: Arc::new(u0_prime),
            u1: Arc::new(u1),
            jumps: Vec::new(),
            label: label.into(),
        }
    }

    /// Uniform samples of `u0` and `u1` on `[0, 1]` (lengths may differ).
    pub fn sampled(u0: Vec<f64>, u1: Vec<f64>) -> Result<Self> {
        let u0 = Arc::new(UniformSamples::new(0.0, 1.0, u0)?);
        let u1 = Arc::new(UniformSamples::new(0.0, 1.0, u1)?);
        let mut jumps = u0.interior_knots();
        jumps.sort_by(f64::total_cmp);
        let (a, b, c) = (u0.clone(), u0, u1);
        Ok(Self {
            u0: Arc::new(move |x| a.eval(x)),
            u0_prime: Arc::new(move |x| b.slope(x)),
            u1: Arc::new(move |x| c.eval(x)),
            jumps,
            label: "samples".into(),
        })
    }

    pub fn zero() -> Self {
        Self::analytic("zero", |_| 0.0, |_| 0.0, |_| 0.0)
    }

    /// `u0 = x^2`, `u1 = 0`.
    pub fn quadratic() -> Self {
        Self::analytic("quadratic", |x| x * x, |x| 2.0 * x, |_| 0.0)
    }

    /// `u0 = A sin(pi x / 2)`, `u1 = B sin(pi x / 2)`.
    ///
    /// Both vanish at `x = 0` together with `u0''`, which keeps the
    /// Dirichlet-side characteristic slope continuously differentiable there.
    pub fn sine(displacement: f64, velocity: f64) -> Self {
        Self::analytic(
            "sine",
            move |x| displacement * (0.5 * PI * x).sin(),
            move |x| displacement * 0.5 * PI * (0.5 * PI * x).cos(),
            move |x| velocity * (0.5 * PI * x).sin(),
        )
    }

    /// `u0 = A exp(-((x - c)/w)^2)`, `u1 = 0`.
    pub fn bump(amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(invalid(format!("bump width must be positive (got {width})")));
        }
        Ok(Self::analytic(
            "bump",
            move |x| amplitude * (-((x - center) / width).powi(2)).exp(),
            move |x| {
                let s = (x - center) / width;
                -2.0 * s / width * amplitude * (-s * s).exp()
            },
            |_| 0.0,
        ))
    }

    /// Data generated by a d'Alembert profile `g`: with `sign = +1` this is the
    /// even ansatz `u = g(t+x) + g(t-x)`, with `sign = -1` the odd one
    /// `u = g(t+x) - g(t-x)`.
    pub fn from_generator(
        label: impl Into<String>,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sign: f64,
    ) -> Self {
        let g = Arc::new(g);
        let gp = Arc::new(g_prime);
        let (g0, gp0, gp1) = (g.clone(), gp.clone(), gp);
        Self::analytic(
            label,
            move |x| g0(x) + sign * g0(-x),
            move |x| gp0(x) - sign * gp0(-x),
            move |x| gp1(x) + sign * gp1(-x),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn u0(&self, x: f64) -> f64 {
        (self.u0)(x)
    }

    pub fn u0_prime(&self, x: f64) -> f64 {
        (self.u0_prime)(x)
    }

    pub fn u1(&self, x: f64) -> f64 {
        (self.u1)(x)
    }

    /// Interior points of `(0, 1)` where `u0'` or `u1` may jump.
    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// Checks that all three functions are finite on a fine grid and at the knots.
    pub fn validate(&self) -> Result<()> {
        let probes = (0..=512).map(|i| i as f64 / 512.0).chain(self.jumps.iter().copied());
        for x in probes {
            for (name, v) in [("u0", self.u0(x)), ("u0'", self.u0_prime(x)), ("u1", self.u1(x))] {
                if !v.is_finite() {
                    return Err(invalid(format!("initial data {name} is not finite at x = {x}")));
                }
            }
        }
        Ok(())
    }
}

/// Prescribed boundary velocity `g0(s)` for `s` in `(-tau, 0)`.
#[derive(Clone)]
pub struct History {
    g0: RealFn,
    jumps: Vec<f64>,
    label: String,
}

impl fmt::Debug for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("History").field("label", &self.label).field("jumps", &self.jumps).finish()
    }
}

impl History {
    pub fn analytic(label: impl Into<String>, g0: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { g0: Arc::new(g0), jumps: Vec::new(), label: label.into() }
    }

    pub fn zero() -> Self {
        Self::analytic("zero", |_| 0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self::analytic("constant", move |_| value)
    }

    /// `g0(s) = A sin(omega s)`.
    pub fn sine(amplitude: f64, omega: f64) -> Self {
        Self::analytic("sine", move |s| amplitude * (omega * s).sin())
    }

    /// Uniform samples on `[-tau, 0]`, interpolated piecewise linearly.
    pub fn sampled(tau: f64, values: Vec<f64>) -> Result<Self> {
        let s = Arc::new(UniformSamples::new(-tau, 0.0, values)?);
        let jumps = Vec::new();
        Ok(Self { g0: Arc::new(move |x| s.eval(x)), jumps, label: "samples".into() })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.g0)(s)
    }

    /// Points in `(-tau, 0)` where `g0` may jump.
    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn validate(&self, tau: f64) -> Result<()> {
        for i in 0..=512 {
            let s = -tau + tau * i as f64 / 512.0;
            let v = self.eval(s);
            if !v.is_finite() {
                return Err(invalid(format!("history g0 is not finite at s = {s}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_interpolate_and_differentiate() {
        let s = UniformSamples::new(0.0, 1.0, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(s.eval(0.25), 0.5);
        assert_eq!(s.eval(0.75), 0.5);
        assert_eq!(s.slope(0.25), 2.0);
        assert_eq!(s.slope(0.5), -2.0);
        assert_eq!(s.slope(1.0), -2.0);
        assert_eq!(s.interior_knots(), vec![0.5]);
    }

    #[test]
    fn sampled_rejects_non_finite_and_short_input() {
        assert!(InitialData::sampled(vec![0.0, f64::NAN], vec![0.0, 0.0]).is_err());
        assert!(InitialData::sampled(vec![0.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn analytic_validation_catches_poles() {
        let d = InitialData::analytic("pole", |x| 1.0 / (x - 0.5), |_| 0.0, |_| 0.0);
        assert!(d.validate().is_err());
        assert!(InitialData::quadratic().validate().is_ok());
    }

    #[test]
    fn generator_data_matches_ansatz() {
        let d = InitialData::from_generator("cubic", |y| y * y * y, |y| 3.0 * y * y, 1.0);
        // u0 = g(x) + g(-x) = 0, u0' = g'(x) - g'(-x) = 0, u1 = 6 x^2
        assert_eq!(d.u0(0.4), 0.0);
        assert_eq!(d.u0_prime(0.4), 0.0);
        assert!((d.u1(0.4) - 6.0 * 0.16).abs() < 1e-15);
    }
}

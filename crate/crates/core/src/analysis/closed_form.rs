use std::f64::consts::PI;
use std::sync::Arc;

use crate::data::InitialData;
use crate::error::{invalid, Result};
use crate::geometry::DomainGeometry;

use super::regime::{energy_exponent, thresholds};

/// Shape of a self-similar profile in `z = y + 1/k`:
///
/// ```text
/// f'(y) = z^p (offset + oscillation cos(omega ln z + phase)),   p = ln|mu| / ln theta.
/// ```
///
/// `omega` is a multiple of `2 pi / ln theta` (odd multiple of `pi / ln theta`
/// when `mu < 0`) so that `f'(F(y)) = mu f'(y)` holds identically; the
/// offset must vanish when `mu < 0`. Such profiles are smooth on `[-1, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilarShape {
    pub offset: f64,
    pub oscillation: f64,
    pub harmonic: u32,
    pub phase: f64,
}

impl SelfSimilarShape {
    pub fn power() -> Self {
        Self { offset: 1.0, oscillation: 0.0, harmonic: 0, phase: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilar {
    k: f64,
    a: f64,
    p: f64,
    omega: f64,
    shape: SelfSimilarShape,
}

impl SelfSimilar {
    pub fn new(k: f64, a: f64, shape: SelfSimilarShape) -> Result<Self> {
        let geom = DomainGeometry::new(k)?;
        if !a.is_finite() || a == -1.0 || a == 1.0 {
            return Err(invalid(format!("self-similar profiles need a finite a != +-1 (got {a})")));
        }
        let mu = (1.0 - a) / (1.0 + a);
        let ln_theta = geom.theta().ln();
        let p = mu.abs().ln() / ln_theta;
        let omega = if mu > 0.0 {
            2.0 * PI * shape.harmonic as f64 / ln_theta
        } else {
            if shape.offset != 0.0 {
                return Err(invalid("a negative reflection gain (|a| > 1) needs a purely oscillating shape"));
            }
            PI * (2 * shape.harmonic + 1) as f64 / ln_theta
        };
        Ok(Self { k, a, p, omega, shape })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Power `p` in `f' ~ z^p`.
    pub fn power(&self) -> f64 {
        self.p
    }

    pub fn fprime(&self, y: f64) -> f64 {
        let z = y + 1.0 / self.k;
        let s = self.shape;
        let osc = if s.oscillation == 0.0 { 0.0 } else { s.oscillation * (self.omega * z.ln() + s.phase).cos() };
        z.powf(self.p) * (s.offset + osc)
    }

    /// An antiderivative of [`fprime`](Self::fprime).
    pub fn f(&self, y: f64) -> f64 {
        let z = y + 1.0 / self.k;
        let s = self.shape;
        let q = self.p + 1.0;
        let power = if s.offset == 0.0 {
            0.0
        } else if q == 0.0 {
            s.offset * z.ln()
        } else {
            s.offset * z.powf(q) / q
        };
        let wave = if s.oscillation == 0.0 {
            0.0
        } else {
            let arg = self.omega * z.ln() + s.phase;
            s.oscillation * z.powf(q) * (q * arg.cos() + self.omega * arg.sin()) / (q * q + self.omega * self.omega)
        };
        power + wave
    }

    /// Initial data of `u = f(t+x) + f(t-x)`.
    pub fn data(&self) -> InitialData {
        let (a, b) = (Arc::new(*self), Arc::new(*self));
        InitialData::from_generator("self-similar", move |y| a.f(y), move |y| b.fprime(y), 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExampleKind {
    /// `a = k`, energy decaying exactly like `1/(1+kt)`.
    Ex1,
    /// `a = a1`, conserved energy.
    Ex2,
    /// Any `-1 < a < 1` other than `k` and `a1`.
    Ex3(f64),
}

/// A self-similar reference solution and its energy in closed form.
#[derive(Debug, Clone)]
pub struct ExampleSolution {
    pub kind: ExampleKind,
    pub k: f64,
    pub a: f64,
    pub profile: SelfSimilar,
    pub data: InitialData,
}

impl ExampleSolution {
    pub fn energy(&self, t: f64) -> f64 {
        let k = self.k;
        match self.kind {
            ExampleKind::Ex1 => k / (1.0 + k * t) * (1.0 / (1.0 - k) - 1.0 / (1.0 + k)),
            ExampleKind::Ex2 => ((1.0 + k) / (1.0 - k)).ln(),
            ExampleKind::Ex3(a) => {
                let g = energy_exponent(k, a).expect("validated at construction");
                ((1.0 + k).powf(g) - (1.0 - k).powf(g)) / g * (t + 1.0 / k).powf(g)
            }
        }
    }

    /// Exponent `g` with `E ~ (t + 1/k)^g`.
    pub fn exponent(&self) -> f64 {
        2.0 * self.profile.power() + 1.0
    }
}

/// The profiles `f(z) = ln z`, `2 sqrt z` and `z^(p+1)/(p+1)` in `z = t + 1/k +- x`.
pub fn example_solution(kind: ExampleKind, k: f64) -> Result<ExampleSolution> {
    let th = thresholds(k)?;
    let a = match kind {
        ExampleKind::Ex1 => k,
        ExampleKind::Ex2 => th.a1,
        ExampleKind::Ex3(a) => {
            if !(a > -1.0 && a < 1.0) {
                return Err(invalid(format!("the power-law example needs -1 < a < 1 (got {a})")));
            }
            if a == k || a == th.a1 {
                return Err(invalid("the power-law example excludes a = k and a = a1"));
            }
            a
        }
    };
    let profile = SelfSimilar::new(k, a, SelfSimilarShape::power())?;
    Ok(ExampleSolution { kind, k, a, profile, data: profile.data() })
}

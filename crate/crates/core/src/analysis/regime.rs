use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::DomainGeometry;

/// The four critical damping gains for a given `k`.
///
/// `a1 < a2` are the roots of `k a^2 - 2a + k` (energy conserved) and
/// `b1 = k`, `b2 = 1/k` are the gains with exact first-order decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

pub fn thresholds(k: f64) -> Result<Thresholds> {
    DomainGeometry::new(k)?;
    let r = (1.0 - k * k).sqrt();
    Ok(Thresholds { a1: (1.0 - r) / k, a2: (1.0 + r) / k, b1: k, b2: 1.0 / k })
}

/// `k a^2 - 2a + k`; the energy rate is half of this times `u_t(l,t)^2`.
pub fn rate_coefficient(k: f64, a: f64) -> f64 {
    k * a * a - 2.0 * a + k
}

/// Growth exponent `g = 2 ln|mu| / ln theta + 1` of self-similar solutions:
/// their energy scales like `(t + 1/k)^g`.
pub fn energy_exponent(k: f64, a: f64) -> Result<f64> {
    let geom = DomainGeometry::new(k)?;
    if !a.is_finite() || a == -1.0 || a == 1.0 {
        return Err(invalid(format!("energy exponent needs a finite a != +-1 (got {a})")));
    }
    let mu = (1.0 - a) / (1.0 + a);
    Ok(2.0 * mu.abs().ln() / geom.theta().ln() + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NeumannRegimeKind {
    IncreasingPolynomialOnly,
    Conserved,
    DecayExactlyFirstOrder,
    DecayAtLeastFirstOrder,
    DecayAtMostFirstOrder,
    /// Listed for completeness; no damping gain produces it.
    ExponentiallyStable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeumannRegime {
    pub kind: NeumannRegimeKind,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl NeumannRegime {
    pub fn thresholds(&self) -> Thresholds {
        Thresholds { a1: self.a1, a2: self.a2, b1: self.b1, b2: self.b2 }
    }

    /// `+1` if the energy grows, `-1` if it decays, `0` if it is conserved.
    pub fn monotonicity(&self) -> i32 {
        match self.kind {
            NeumannRegimeKind::IncreasingPolynomialOnly => 1,
            NeumannRegimeKind::Conserved => 0,
            _ => -1,
        }
    }
}

/// Classifies the damping gain `a` by exact comparison with the thresholds.
pub fn classify_neumann_regime(k: f64, a: f64) -> Result<NeumannRegime> {
    let Thresholds { a1, a2, b1, b2 } = thresholds(k)?;
    if !a.is_finite() {
        return Err(invalid(format!("damping gain a must be finite (got {a})")));
    }
    use NeumannRegimeKind::*;
    let kind = if a == a1 || a == a2 {
        Conserved
    } else if a == b1 || a == b2 {
        DecayExactlyFirstOrder
    } else if a < a1 || a > a2 {
        IncreasingPolynomialOnly
    } else if b1 < a && a < b2 {
        DecayAtLeastFirstOrder
    } else {
        DecayAtMostFirstOrder
    };
    Ok(NeumannRegime { kind, a1, a2, b1, b2 })
}

/// Bounds on `E(T)` for `a = k` or `a = 1/k`, given `E(0) = e0`.
pub fn first_order_decay_bounds(k: f64, t: f64, e0: f64) -> (f64, f64) {
    let d = 1.0 + k * t;
    ((1.0 - k) / ((1.0 + k) * d) * e0, (1.0 + k) / ((1.0 - k) * d) * e0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DelayRegimeKind {
    DecreasingWithWindow,
    IncreasingWithWindow,
    Indeterminate,
}

/// An interval of delays, with each end open or closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauWindow {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl TauWindow {
    pub fn contains(&self, tau: f64) -> bool {
        let above = if self.lower_closed { tau >= self.lower } else { tau > self.lower };
        let below = if self.upper_closed { tau <= self.upper } else { tau < self.upper };
        above && below
    }

    fn is_empty(&self) -> bool {
        match (self.lower_closed, self.upper_closed) {
            (true, true) => self.lower > self.upper,
            _ => self.lower >= self.upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayRegime {
    pub kind: DelayRegimeKind,
    pub k: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub xi: f64,
    /// Delays for which the verdict is guaranteed (sufficient, not necessary).
    pub tau_window: Option<TauWindow>,
    pub tau: Option<f64>,
    /// For a decreasing regime, `c > 0` with `E' <= -c (v^2 + v_d^2)`; for an
    /// increasing one, `c' >= 0` with `E' >= c' (v^2 + v_d^2)`. Only reported
    /// when `tau` is given and lies in the window.
    pub rate_constant: Option<f64>,
}

/// Sign analysis of the energy rate
///
/// ```text
/// E' = [k(1+mu1^2)/2 - mu1 + xi/2tau] v^2 + [k mu2^2/2 - xi/2tau] vd^2 + mu2 (k mu1 - 1) v vd
/// ```
///
/// with the cross term bounded by `|mu2| |k mu1 - 1| (v^2 + vd^2)/2`.
pub fn classify_delay_regime(k: f64, mu1: f64, mu2: f64, xi: f64, tau: Option<f64>) -> Result<DelayRegime> {
    DomainGeometry::new(k)?;
    for (name, v) in [("mu1", mu1), ("mu2", mu2)] {
        if !v.is_finite() {
            return Err(invalid(format!("{name} must be finite (got {v})")));
        }
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(invalid(format!("history weight xi must be positive (got {xi})")));
    }
    if let Some(t) = tau {
        if !(t > 0.0 && t < 1.0 / k) {
            return Err(invalid(format!("delay must satisfy 0 < tau < 1/k = {} (got {t})", 1.0 / k)));
        }
    }

    let m = mu2.abs();
    let d = (k * mu1 - 1.0).abs();
    let r = (1.0 - k * k).sqrt();
    let instant = k * (1.0 + mu1 * mu1) / 2.0 - mu1;
    let delayed = k * mu2 * mu2 / 2.0;
    let cross = d * m / 2.0;
    let cap = 1.0 / k;

    let mut regime = DelayRegime {
        kind: DelayRegimeKind::Indeterminate,
        k,
        mu1,
        mu2,
        xi,
        tau_window: None,
        tau,
        rate_constant: None,
    };

    if k * m < r - d {
        // E' <= (a0 + xi/2tau) v^2 + (b0 - xi/2tau) vd^2
        let (a0, b0) = (instant + cross, delayed + cross);
        let lower = xi / (-2.0 * a0);
        let upper = if b0 > 0.0 { xi / (2.0 * b0) } else { f64::INFINITY };
        let window = TauWindow { lower, upper: upper.min(cap), lower_closed: false, upper_closed: false };
        if !window.is_empty() {
            regime.kind = DelayRegimeKind::DecreasingWithWindow;
            regime.tau_window = Some(window);
            regime.rate_constant = tau.filter(|&t| window.contains(t)).map(|t| {
                let h = xi / (2.0 * t);
                -(a0 + h).max(b0 - h)
            });
        }
    } else if k * m >= d + r {
        // E' >= (c0 + xi/2tau) v^2 + (d0 - xi/2tau) vd^2
        let (c0, d0) = (instant - cross, delayed - cross);
        let lower = xi / (2.0 * d0);
        let (upper, upper_closed) = if c0 < 0.0 { (xi / (-2.0 * c0), true) } else { (f64::INFINITY, false) };
        let window = if upper >= cap {
            TauWindow { lower, upper: cap, lower_closed: true, upper_closed: false }
        } else {
            TauWindow { lower, upper, lower_closed: true, upper_closed }
        };
        if !window.is_empty() {
            regime.kind = DelayRegimeKind::IncreasingWithWindow;
            regime.tau_window = Some(window);
            regime.rate_constant = tau.filter(|&t| window.contains(t)).map(|t| {
                let h = xi / (2.0 * t);
                (c0 + h).min(d0 - h)
            });
        }
    }
    Ok(regime)
}

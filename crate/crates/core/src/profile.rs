//! Characteristic profile for the damped Neumann problem
//!
//! ```text
//! u_tt = u_xx,   u_x(0,t) = 0,   u_x(1+kt, t) + a u_t(1+kt, t) = 0.
//! ```
//!
//! Every solution has the form `u = f(t+x) + f(t-x)`. The initial data fixes
//! `f'` on `I_0 = [-1, 1)`:
//!
//! ```text
//! f'(x)  = (u0'(x) + u1(x)) / 2,    f'(-x) = (u1(x) - u0'(x)) / 2,    0 < x < 1,
//! ```
//!
//! and the boundary feedback forces `(1 + a) f'(F(y)) = (1 - a) f'(y)`, i.e.
//! `f' = mu^n f' o F^-n` on `I_n` with `mu = (1 - a)/(1 + a)`. The profile
//! `f` is recovered from `f(0) = u0(0)/2` by integrating `f'`; integrals over
//! pieces of `I_n` are pulled back to `I_0` with the Jacobian `theta^n`, so
//! continuity of `f` across the interval ends holds by construction.

use std::sync::RwLock;

use crate::data::InitialData;
use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;
use crate::quad::{breakpoint_list, Quadrature};

/// Displacement and its first derivatives at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub u: f64,
    pub ut: f64,
    pub ux: f64,
}

pub(crate) fn check_in_domain(geom: &DomainGeometry, x: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !x.is_finite() {
        return Err(Error::OutOfDomain { x, t });
    }
    let l = geom.boundary_position(t)?;
    let slack = 1e-12 * l;
    if x < -slack || x > l + slack {
        return Err(Error::OutOfDomain { x, t });
    }
    Ok(x.clamp(0.0, l))
}

pub struct NeumannProfile {
    geom: DomainGeometry,
    a: f64,
    mu: f64,
    data: InitialData,
    quad: Quadrature,
    base_breaks: Vec<f64>,
    f_anchor: f64,
    base_total: f64,
    /// `f` at the left end of each `I_n`, grown on demand.
    anchors: RwLock<Vec<f64>>,
}

impl std::fmt::Debug for NeumannProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NeumannProfile")
            .field("k", &self.geom.k())
            .field("a", &self.a)
            .field("mu", &self.mu)
            .field("data", &self.data)
            .finish()
    }
}

impl NeumannProfile {
    pub fn build(geom: DomainGeometry, a: f64, data: InitialData, quad: Quadrature) -> Result<Self> {
        if !a.is_finite() {
            return Err(crate::error::invalid(format!("feedback gain must be finite (got {a})")));
        }
        if a == -1.0 {
            return Err(Error::DegenerateFeedback);
        }
        data.validate()?;

        let mut base_breaks = vec![-1.0, 0.0, 1.0];
        for &x in data.jumps() {
            base_breaks.push(x);
            base_breaks.push(-x);
        }
        base_breaks.sort_by(f64::total_cmp);
        base_breaks.dedup();

        let mut profile = Self {
            geom,
            a,
            mu: (1.0 - a) / (1.0 + a),
            f_anchor: 0.5 * data.u0(0.0),
            data,
            quad,
            base_breaks,
            base_total: 0.0,
            anchors: RwLock::new(Vec::new()),
        };
        profile.base_total = profile.base_integral(-1.0, 1.0)?;
        let f_left = profile.f_anchor - profile.base_integral(-1.0, 0.0)?;
        *profile.anchors.get_mut().expect("fresh lock") = vec![f_left];
        Ok(profile)
    }

    pub fn geometry(&self) -> &DomainGeometry {
        &self.geom
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Reflection gain `mu = (1 - a)/(1 + a)`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn data(&self) -> &InitialData {
        &self.data
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    /// `f(0) = u0(0)/2`.
    pub fn f_anchor(&self) -> f64 {
        self.f_anchor
    }

    /// `f'` on `I_0`, straight from the initial data.
    pub fn base_fprime(&self, y: f64) -> f64 {
        if y >= 0.0 {
            0.5 * (self.data.u0_prime(y) + self.data.u1(y))
        } else {
            0.5 * (self.data.u1(-y) - self.data.u0_prime(-y))
        }
    }

    /// Points of `[-1, 1]` where the base slope may jump.
    pub fn base_breakpoints(&self) -> &[f64] {
        &self.base_breaks
    }

    fn gain(&self, n: u32) -> f64 {
        self.mu.powi(n as i32)
    }

    pub fn fprime(&self, y: f64) -> Result<f64> {
        let n = self.geom.interval_index(y)?;
        if n == 0 {
            return Ok(self.base_fprime(y));
        }
        if self.mu == 0.0 {
            return Ok(0.0);
        }
        Ok(self.gain(n) * self.base_fprime(self.geom.to_base(y, n)))
    }

    fn base_integral_with(&self, lo: f64, hi: f64, square: bool) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        let pts = breakpoint_list(lo, hi, self.base_breaks.iter().copied());
        self.quad.integrate_pieces(
            |z| {
                let v = self.base_fprime(z);
                Ok(if square { v * v } else { v })
            },
            &pts,
        )
    }

    /// `int_lo^hi f'` for `-1 <= lo <= hi <= 1`.
    pub fn base_integral(&self, lo: f64, hi: f64) -> Result<f64> {
        self.base_integral_with(lo, hi, false)
    }

    fn anchor(&self, n: u32) -> f64 {
        let n = n as usize;
        if let Some(&v) = self.anchors.read().expect("anchor lock").get(n) {
            return v;
        }
        let mut anchors = self.anchors.write().expect("anchor lock");
        let growth = self.mu * self.geom.theta();
        while anchors.len() <= n {
            let j = anchors.len() - 1;
            let next = anchors[j] + growth.powi(j as i32) * self.base_total;
            anchors.push(next);
        }
        anchors[n]
    }

    /// Pre-computes the interval anchors up to `horizon`, after which
    /// evaluation below the horizon only takes read locks.
    pub fn freeze(&self, horizon: f64) -> Result<()> {
        let n = self.geom.interval_index(horizon.max(-1.0))?;
        self.anchor(n + 1);
        Ok(())
    }

    pub fn f(&self, y: f64) -> Result<f64> {
        let n = self.geom.interval_index(y)?;
        if n == 0 {
            let tail = if y >= 0.0 { self.base_integral(0.0, y)? } else { -self.base_integral(y, 0.0)? };
            return Ok(self.f_anchor + tail);
        }
        let start = self.anchor(n);
        if self.mu == 0.0 {
            return Ok(start);
        }
        let z = self.geom.to_base(y, n);
        let scale = (self.mu * self.geom.theta()).powi(n as i32);
        Ok(start + scale * self.base_integral(-1.0, z)?)
    }

    /// Calls `visit(n, z_lo, z_hi)` for every piece of `[lo, hi]` lying in
    /// `I_n`, with the piece pulled back to base coordinates.
    fn for_each_piece(&self, lo: f64, hi: f64, mut visit: impl FnMut(u32, f64, f64) -> Result<()>) -> Result<()> {
        if hi <= lo {
            return Ok(());
        }
        let first = self.geom.interval_index(lo)?;
        let last = self.geom.interval_index(hi)?;
        for n in first..=last {
            let (s, e) = self.geom.interval(n);
            let a = lo.max(s);
            let b = hi.min(e);
            if b <= a {
                continue;
            }
            let za = if a == s { -1.0 } else { self.geom.to_base(a, n) };
            let zb = if b == e { 1.0 } else { self.geom.to_base(b, n) };
            visit(n, za, zb)?;
        }
        Ok(())
    }

    /// `int_lo^hi f'(s)^2 ds`, evaluated interval by interval in base coordinates.
    pub fn integral_fprime_squared(&self, lo: f64, hi: f64) -> Result<f64> {
        if lo < -1.0 {
            return Err(Error::OutOfCone { y: lo, min: -1.0 });
        }
        let theta = self.geom.theta();
        let mut total = 0.0;
        self.for_each_piece(lo, hi, |n, za, zb| {
            if n > 0 && self.mu == 0.0 {
                return Ok(());
            }
            let weight = (self.mu * self.mu).powi(n as i32) * theta.powi(n as i32);
            total += weight * self.base_integral_with(za, zb, true)?;
            Ok(())
        })?;
        Ok(total)
    }

    /// Images of the base breakpoints inside `[lo, hi]`.
    pub fn fprime_breakpoints(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let mut pts = Vec::new();
        self.for_each_piece(lo.max(-1.0), hi, |n, _, _| {
            pts.extend(self.base_breaks.iter().map(|&b| if n == 0 { b } else { self.geom.char_map(b, n as i32) }));
            Ok(())
        })?;
        Ok(pts)
    }

    /// `u = f(t+x) + f(t-x)` and its derivatives.
    pub fn state(&self, x: f64, t: f64) -> Result<State> {
        let x = check_in_domain(&self.geom, x, t)?;
        let (plus, minus) = (t + x, t - x);
        let (dp, dm) = (self.fprime(plus)?, self.fprime(minus)?);
        Ok(State { u: self.f(plus)? + self.f(minus)?, ut: dp + dm, ux: dp - dm })
    }

    /// Like [`state`](Self::state) without the quadrature for `u`.
    pub fn gradient(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        let x = check_in_domain(&self.geom, x, t)?;
        let (dp, dm) = (self.fprime(t + x)?, self.fprime(t - x)?);
        Ok((dp + dm, dp - dm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> DomainGeometry {
        DomainGeometry::new(0.5).unwrap()
    }

    fn unit_slope() -> InitialData {
        // f' = 1 on I_0: u0' = 0, u1 = 2.
        InitialData::analytic("unit", |_| 0.0, |_| 0.0, |_| 2.0)
    }

    #[test]
    fn rejects_minus_one() {
        let err = NeumannProfile::build(geom(), -1.0, InitialData::zero(), Quadrature::default());
        assert!(matches!(err, Err(Error::DegenerateFeedback)));
    }

    #[test]
    fn rejects_non_finite_data() {
        let bad = InitialData::analytic("nan", |_| f64::NAN, |_| 0.0, |_| 0.0);
        assert!(NeumannProfile::build(geom(), 0.5, bad, Quadrature::default()).is_err());
    }

    #[test]
    fn zero_data_gives_zero_profile() {
        let p = NeumannProfile::build(geom(), 0.5, InitialData::zero(), Quadrature::default()).unwrap();
        assert_eq!(p.f_anchor(), 0.0);
        for y in [-1.0, -0.3, 0.0, 0.7, 3.0, 40.0] {
            assert_eq!(p.fprime(y).unwrap(), 0.0);
            assert_eq!(p.f(y).unwrap(), 0.0);
        }
    }

    #[test]
    fn quadratic_base_values() {
        let p = NeumannProfile::build(geom(), 0.5, InitialData::quadratic(), Quadrature::default()).unwrap();
        assert_eq!(p.fprime(0.5).unwrap(), 0.5);
        assert_eq!(p.fprime(-0.5).unwrap(), -0.5);
    }

    #[test]
    fn unit_gain_keeps_slope_one() {
        let p = NeumannProfile::build(geom(), 0.0, unit_slope(), Quadrature::default()).unwrap();
        assert_eq!(p.fprime(5.0).unwrap(), 1.0);
        assert!((p.f(3.0).unwrap() - (p.f_anchor() + 3.0)).abs() < 1e-12);
        assert!((p.f(30.0).unwrap() - 30.0).abs() < 1e-10);
    }

    #[test]
    fn gain_one_kills_the_reflected_slope() {
        let p = NeumannProfile::build(geom(), 1.0, InitialData::quadratic(), Quadrature::default()).unwrap();
        assert_eq!(p.fprime(3.0).unwrap(), 0.0);
        assert_eq!(p.fprime(1.0).unwrap(), 0.0);
        let f1 = p.f(1.0).unwrap();
        assert_eq!(p.f(17.0).unwrap(), f1);
    }

    #[test]
    fn f_is_continuous_at_interval_ends() {
        let data = InitialData::analytic("mixed", |x| x * x * x + 0.3, |x| 3.0 * x * x, |x| (2.0 * x).cos());
        let p = NeumannProfile::build(geom(), 0.3, data, Quadrature::default()).unwrap();
        for n in 1..4 {
            let e = p.geometry().interval_start(n);
            let left = p.f(e * (1.0 - 1e-13)).unwrap();
            let at = p.f(e).unwrap();
            assert!((left - at).abs() < 1e-9 * at.abs().max(1.0), "n = {n}: {left} vs {at}");
        }
    }

    #[test]
    fn state_rejects_points_outside_the_domain() {
        let p = NeumannProfile::build(geom(), 0.5, InitialData::zero(), Quadrature::default()).unwrap();
        assert!(p.state(1.6, 1.0).is_err());
        assert!(p.state(-0.1, 1.0).is_err());
        assert!(p.state(0.0, -0.1).is_err());
        assert!(p.state(1.5, 1.0).is_ok());
    }
}

//! Characteristic slope for the Dirichlet problem with delayed boundary feedback
//!
//! ```text
//! u_tt = u_xx,   u(0,t) = 0,
//! u_x(l(t),t) = -mu1 u_t(l(t),t) - mu2 u_t(l(t-tau), t-tau),
//! u_t(l(s), s) = g0(s)  for -tau < s < 0.
//! ```
//!
//! Solutions are `u = f(t+x) - f(t-x)`. With `P(t) = (1+k)t + 1` and
//! `M(t) = (1-k)t - 1 = F^-1(P(t))` the boundary velocity is
//! `v(t) = f'(P(t)) - f'(M(t))` and the feedback law becomes
//!
//! ```text
//! (1 + mu1) f'(P(t)) + (1 - mu1) f'(M(t)) + mu2 v(t - tau) = 0.
//! ```
//!
//! The data fix `f'` on `[-1, 1)`. Below `-1` the history extends it through
//! `f'(M(s)) = f'(P(s)) - g0(s)`, down to `M(-tau) = -(1-k)tau - 1`. Above `1`
//! the feedback law is solved for `f'(P(t))`; every value it needs sits at a
//! strictly smaller coordinate, so a memoized recursion terminates in the
//! segment built from data and history.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::data::{History, InitialData};
use crate::error::{invalid, Error, Result};
use crate::geometry::DomainGeometry;
use crate::profile::{check_in_domain, State};
use crate::quad::{breakpoint_list, Quadrature};

/// Feedback gains, delay and history weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayParams {
    pub mu1: f64,
    pub mu2: f64,
    pub tau: f64,
    pub xi: f64,
}

impl DelayParams {
    pub fn validate(&self, geom: &DomainGeometry) -> Result<()> {
        let k = geom.k();
        for (name, v) in [("mu1", self.mu1), ("mu2", self.mu2), ("tau", self.tau), ("xi", self.xi)] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite (got {v})")));
            }
        }
        if !(self.tau > 0.0 && self.tau < 1.0 / k) {
            return Err(invalid(format!("delay must satisfy 0 < tau < 1/k = {} (got {})", 1.0 / k, self.tau)));
        }
        if !(self.xi > 0.0) {
            return Err(invalid(format!("history weight xi must be positive (got {})", self.xi)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayOptions {
    /// Bound on the recursion depth of a single evaluation.
    pub max_depth: usize,
    /// Absolute tolerance of the `mu1 = -1` compatibility check.
    pub compat_tol: f64,
    /// Number of midpoints sampled by that check.
    pub compat_samples: usize,
    /// Upper bound on the number of quadrature breakpoints generated per integral.
    pub max_breakpoints: usize,
    pub quad: Quadrature,
}

impl Default for DelayOptions {
    fn default() -> Self {
        Self {
            max_depth: 1_000_000,
            compat_tol: 1e-8,
            compat_samples: 256,
            max_breakpoints: 4096,
            quad: Quadrature::default(),
        }
    }
}

/// The part of `[-(1-k)tau - 1, -1)` filled in by the history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeftwardCascade {
    /// Left end `-(1-k)tau - 1` of the history segment.
    pub target: f64,
    /// Number of passes over the history needed to reach `target`.
    pub steps: usize,
}

impl LeftwardCascade {
    pub fn new(geom: &DomainGeometry, tau: f64) -> Self {
        let target = -(1.0 - geom.k()) * tau - 1.0;
        let mut steps = 0;
        let mut end = -1.0;
        while end > target {
            end = geom.unreflect(end);
            steps += 1;
        }
        Self { target, steps }
    }

    /// True when one pass over the history covers the whole segment,
    /// i.e. `tau <= 2/(1+k)`.
    pub fn single_pass(&self) -> bool {
        self.steps <= 1
    }
}

pub struct DelayProfile {
    geom: DomainGeometry,
    params: DelayParams,
    data: InitialData,
    history: History,
    opts: DelayOptions,
    cascade: LeftwardCascade,
    shift: f64,
    memo: Mutex<HashMap<u64, f64>>,
    deepest: AtomicUsize,
}

impl std::fmt::Debug for DelayProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DelayProfile")
            .field("k", &self.geom.k())
            .field("params", &self.params)
            .field("data", &self.data)
            .field("history", &self.history)
            .finish()
    }
}

impl DelayProfile {
    pub fn build(
        geom: DomainGeometry,
        params: DelayParams,
        data: InitialData,
        history: History,
        opts: DelayOptions,
    ) -> Result<Self> {
        params.validate(&geom)?;
        data.validate()?;
        history.validate(params.tau)?;
        let trace = data.u0(0.0);
        if trace.abs() > 1e-12 {
            return Err(Error::TraceViolation(trace));
        }
        if params.mu1 == -1.0 && params.mu2 == 0.0 {
            return Err(invalid("mu1 = -1 requires mu2 != 0"));
        }
        let profile = Self {
            cascade: LeftwardCascade::new(&geom, params.tau),
            shift: (1.0 + geom.k()) * params.tau,
            geom,
            params,
            data,
            history,
            opts,
            memo: Mutex::new(HashMap::new()),
            deepest: AtomicUsize::new(0),
        };
        if params.mu1 == -1.0 {
            profile.check_compatibility()?;
        }
        Ok(profile)
    }

    fn check_compatibility(&self) -> Result<()> {
        let tau = self.params.tau;
        let n = self.opts.compat_samples.max(1);
        for i in 0..n {
            let t = tau * (i as f64 + 0.5) / n as f64;
            let residual = self.params.mu2 * self.history.eval(t - tau) + 2.0 * self.fprime(self.minus(t))?;
            if !(residual.abs() <= self.opts.compat_tol) {
                return Err(Error::Compatibility { t, residual });
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> &DomainGeometry {
        &self.geom
    }

    pub fn params(&self) -> &DelayParams {
        &self.params
    }

    pub fn data(&self) -> &InitialData {
        &self.data
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn options(&self) -> &DelayOptions {
        &self.opts
    }

    pub fn cascade(&self) -> &LeftwardCascade {
        &self.cascade
    }

    /// Lowest coordinate at which `f'` is defined.
    pub fn lower_limit(&self) -> f64 {
        self.cascade.target
    }

    /// `P(t) = (1+k)t + 1`, where the forward characteristic meets the boundary.
    pub fn plus(&self, t: f64) -> f64 {
        (1.0 + self.geom.k()) * t + 1.0
    }

    /// `M(t) = (1-k)t - 1`, the backward characteristic through the same boundary point.
    pub fn minus(&self, t: f64) -> f64 {
        (1.0 - self.geom.k()) * t - 1.0
    }

    /// Number of cached values above `1`.
    pub fn memo_len(&self) -> usize {
        self.memo.lock().expect("memo lock").len()
    }

    /// Largest recursion depth reached so far.
    pub fn max_depth_seen(&self) -> usize {
        self.deepest.load(Ordering::Relaxed)
    }

    fn base(&self, y: f64) -> f64 {
        if y >= 0.0 {
            0.5 * (self.data.u0_prime(y) + self.data.u1(y))
        } else {
            0.5 * (self.data.u0_prime(-y) - self.data.u1(-y))
        }
    }

    pub fn fprime(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(invalid(format!("characteristic coordinate must be finite (got {y})")));
        }
        let lo = self.cascade.target;
        if y < lo - 1e-14 * lo.abs() {
            return Err(Error::OutOfCone { y, min: lo });
        }
        self.eval(y.max(lo), 0)
    }

    fn eval(&self, y: f64, depth: usize) -> Result<f64> {
        if depth > self.opts.max_depth {
            return Err(Error::RecursionDepth(self.opts.max_depth));
        }
        self.deepest.fetch_max(depth, Ordering::Relaxed);
        if y < -1.0 {
            // y = M(s) with s in [-tau, 0); F(y) = P(s).
            let s = (y + 1.0) / (1.0 - self.geom.k());
            return Ok(self.eval(self.geom.reflect(y), depth + 1)? - self.history.eval(s));
        }
        if y < 1.0 {
            return Ok(self.base(y));
        }
        let key = y.to_bits();
        if let Some(&v) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(v);
        }
        let v = self.extend_right(y, depth)?;
        self.memo.lock().expect("memo lock").insert(key, v);
        Ok(v)
    }

    fn extend_right(&self, y: f64, depth: usize) -> Result<f64> {
        let DelayParams { mu1, mu2, tau, .. } = self.params;
        let m = self.geom.unreflect(y);
        if mu1 == -1.0 {
            let ahead = self.geom.unreflect(y + self.shift);
            if !(ahead < y) {
                return Err(Error::Unsupported(format!(
                    "mu1 = -1: the relation at y = {y} refers to the larger coordinate {ahead}"
                )));
            }
            return Ok(self.eval(m, depth + 1)? - 2.0 / mu2 * self.eval(ahead, depth + 1)?);
        }
        let t = (y - 1.0) / (1.0 + self.geom.k());
        let delayed = if mu2 == 0.0 {
            0.0
        } else if t < tau {
            self.history.eval(t - tau)
        } else {
            let back = y - self.shift;
            self.eval(back, depth + 1)? - self.eval(self.geom.unreflect(back), depth + 1)?
        };
        let reflected = if mu1 == 1.0 { 0.0 } else { (mu1 - 1.0) * self.eval(m, depth + 1)? };
        Ok((reflected - mu2 * delayed) / (1.0 + mu1))
    }

    /// Boundary velocity `u_t(l(t), t)`; for `t < 0` this is the history.
    pub fn boundary_velocity(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            if t < -self.params.tau {
                return Err(invalid(format!("boundary velocity requested before -tau (t = {t})")));
            }
            return Ok(self.history.eval(t));
        }
        Ok(self.fprime(self.plus(t))? - self.fprime(self.minus(t))?)
    }

    /// Boundary slope `u_x(l(t), t)` for `t >= 0`.
    pub fn boundary_slope(&self, t: f64) -> Result<f64> {
        Ok(self.fprime(self.plus(t))? + self.fprime(self.minus(t))?)
    }

    /// Residual of the feedback law at time `t >= 0`.
    pub fn feedback_residual(&self, t: f64) -> Result<f64> {
        let DelayParams { mu1, mu2, tau, .. } = self.params;
        let (p, m) = (self.fprime(self.plus(t))?, self.fprime(self.minus(t))?);
        let vd = self.boundary_velocity(t - tau)?;
        Ok((1.0 + mu1) * p + (1.0 - mu1) * m + mu2 * vd)
    }

    /// Coordinates in `[lo, hi]` where `f'` may fail to be smooth.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let lower = self.cascade.target;
        let tau = self.params.tau;
        let mut seeds = vec![-1.0, 0.0, 1.0, lower];
        for &x in self.data.jumps() {
            seeds.push(x);
            seeds.push(-x);
        }
        for &s in self.history.jumps() {
            seeds.push(self.minus(s));
            if self.params.mu1 != -1.0 {
                seeds.push(self.plus(s + tau));
            }
        }
        if self.params.mu1 != -1.0 && self.params.mu2 != 0.0 {
            seeds.push(self.plus(tau));
        }

        let cap = self.opts.max_breakpoints;
        let mut out: Vec<f64> = Vec::new();
        let mut queue = seeds;
        while let Some(b) = queue.pop() {
            if out.len() >= cap {
                break;
            }
            if !(b >= lower) || b > hi || out.contains(&b) {
                continue;
            }
            out.push(b);
            if b > -1.0 {
                let left = self.geom.unreflect(b);
                if left >= lower && left < -1.0 {
                    queue.push(left);
                }
            }
            let f = self.geom.reflect(b);
            if f >= 1.0 {
                queue.push(f);
            }
            if self.params.mu1 == -1.0 {
                if f - self.shift >= 1.0 {
                    queue.push(f - self.shift);
                }
            } else if self.params.mu2 != 0.0 {
                queue.push(b + self.shift);
                queue.push(f + self.shift);
            }
        }
        breakpoint_list(lo, hi, out)
    }

    /// `int_lo^hi f'`.
    pub fn integral_fprime(&self, lo: f64, hi: f64) -> Result<f64> {
        self.integrate_with(lo, hi, false)
    }

    /// `int_lo^hi f'^2`.
    pub fn integral_fprime_squared(&self, lo: f64, hi: f64) -> Result<f64> {
        self.integrate_with(lo, hi, true)
    }

    fn integrate_with(&self, lo: f64, hi: f64, square: bool) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        let pts = self.breakpoints(lo, hi);
        self.opts.quad.integrate_pieces(
            |y| {
                let v = self.fprime(y)?;
                Ok(if square { v * v } else { v })
            },
            &pts,
        )
    }

    /// `u = f(t+x) - f(t-x)` and its derivatives.
    pub fn state(&self, x: f64, t: f64) -> Result<State> {
        let x = check_in_domain(&self.geom, x, t)?;
        let (dp, dm) = (self.fprime(t + x)?, self.fprime(t - x)?);
        Ok(State { u: self.integral_fprime(t - x, t + x)?, ut: dp - dm, ux: dp + dm })
    }

    /// `(u_t, u_x)` without the quadrature for `u`.
    pub fn gradient(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        let x = check_in_domain(&self.geom, x, t)?;
        let (dp, dm) = (self.fprime(t + x)?, self.fprime(t - x)?);
        Ok((dp - dm, dp + dm))
    }
}

/// History for which the slope above `1` continues the data smoothly up to
/// `P(tau)`: with `psi(y) = (u0'(y) + u1(y))/2` extended past `y = 1`,
///
/// ```text
/// g0(s) = [(mu1 - 1) f'(M(s + tau)) - (1 + mu1) psi(P(s + tau))] / mu2.
/// ```
///
/// `u0'` and `u1` are evaluated beyond `x = 1`, so this only makes sense for
/// analytic data.
pub fn compatible_history(geom: &DomainGeometry, params: &DelayParams, data: &InitialData) -> Result<History> {
    params.validate(geom)?;
    let DelayParams { mu1, mu2, tau, .. } = *params;
    if mu2 == 0.0 {
        return Err(invalid("the compatible history needs mu2 != 0"));
    }
    let k = geom.k();
    if (1.0 - k) * tau > 2.0 {
        return Err(invalid("the compatible history needs (1-k) tau <= 2"));
    }
    let data = data.clone();
    Ok(History::analytic("compatible", move |s| {
        let t = s + tau;
        let m = (1.0 - k) * t - 1.0;
        let p = (1.0 + k) * t + 1.0;
        let base_m =
            if m >= 0.0 { 0.5 * (data.u0_prime(m) + data.u1(m)) } else { 0.5 * (data.u0_prime(-m) - data.u1(-m)) };
        let psi = 0.5 * (data.u0_prime(p) + data.u1(p));
        ((mu1 - 1.0) * base_m - (1.0 + mu1) * psi) / mu2
    }))
}

//! Finite-difference reference solver on the fixed interval `y = x / l(t)`.
//!
//! In the mapped variables the Riemann invariants `r = u_t - u_x` and
//! `s = u_t + u_x` are transported with speeds `(1 - k y)/l` and
//! `-(1 + k y)/l`:
//!
//! ```text
//! r_t + (1 - k y)/l r_y = 0,     s_t - (1 + k y)/l s_y = 0.
//! ```
//!
//! `r` enters at `y = 0` and `s` at `y = 1`, so each boundary condition fixes
//! exactly one incoming invariant. Space is discretised with second-order
//! upwind differences (first order on the node next to the inflow boundary)
//! and time with the three-stage strong-stability-preserving Runge–Kutta
//! method. The displacement follows from `U_t = (r + s)/2 + k y (s - r)/2`.

use crate::data::{History, InitialData};
use crate::delay::DelayParams;
use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;

/// Uniform grid and time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdmGrid {
    pub ny: usize,
    pub dt: f64,
    pub cfl: f64,
    pub t_max: f64,
}

impl FdmGrid {
    pub const DEFAULT_CFL: f64 = 0.5;

    /// Picks `dt` from the Courant ratio against the fastest speed `(1+k)/l(0)`.
    pub fn new(k: f64, ny: usize, t_max: f64, cfl: f64) -> Result<Self> {
        DomainGeometry::new(k)?;
        if ny < 16 {
            return Err(Error::Config(format!("ny must be at least 16 (got {ny})")));
        }
        if !(cfl > 0.0 && cfl <= 0.9) {
            return Err(Error::Config(format!("Courant ratio must lie in (0, 0.9] (got {cfl})")));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::Config(format!("t_max must be positive (got {t_max})")));
        }
        let h = 1.0 / (ny - 1) as f64;
        Ok(Self { ny, dt: cfl * h / (1.0 + k), cfl, t_max })
    }

    /// Shrinks `dt` so that `tau` is an integer number of steps.
    pub fn align_to_delay(mut self, tau: f64) -> Self {
        let steps = (tau / self.dt).ceil().max(1.0);
        let dt = tau / steps;
        self.cfl *= dt / self.dt;
        self.dt = dt;
        self
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.ny - 1) as f64
    }
}

#[derive(Debug, Clone)]
pub enum FdmProblem {
    Neumann { a: f64 },
    Delay { params: DelayParams, history: History },
}

#[derive(Debug, Clone)]
pub struct FdmSolution {
    pub grid: FdmGrid,
    pub k: f64,
    /// Time levels, including `0` and `t_max`.
    pub times: Vec<f64>,
    /// Discrete energy (plus the history term for the delay problem) at each level.
    pub energy: Vec<f64>,
    /// Boundary velocity `u_t(l(t), t)` at each level.
    pub boundary_velocity: Vec<f64>,
    /// Displacement at `t_max` on the mapped nodes.
    pub u: Vec<f64>,
}

impl FdmSolution {
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.grid.spacing();
        (0..self.grid.ny).map(move |i| i as f64 * h)
    }

    /// Relative `L^2(0, l(t_max))` distance between the final field and `exact(x)`.
    pub fn relative_l2_error(&self, exact: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let l = 1.0 + self.k * self.grid.t_max;
        let (mut num, mut den) = (0.0, 0.0);
        for (i, y) in self.nodes().enumerate() {
            let w = if i == 0 || i + 1 == self.grid.ny { 0.5 } else { 1.0 };
            let e = exact(y * l)?;
            num += w * (self.u[i] - e).powi(2);
            den += w * e * e;
        }
        Ok(if den == 0.0 { num.sqrt() } else { (num / den).sqrt() })
    }
}

struct Fields {
    r: Vec<f64>,
    s: Vec<f64>,
    u: Vec<f64>,
}

impl Fields {
    /// `out_w * base + w * (self + d)`, the building block of each stage.
    fn axpy(&self, w: f64, d: &Fields, out_w: f64, base: &Fields) -> Fields {
        let comb = |x: &[f64], dx: &[f64], y0: &[f64]| -> Vec<f64> {
            x.iter().zip(dx).zip(y0).map(|((&x, &dx), &y0)| out_w * y0 + w * (x + dx)).collect()
        };
        Fields { r: comb(&self.r, &d.r, &base.r), s: comb(&self.s, &d.s, &base.s), u: comb(&self.u, &d.u, &base.u) }
    }
}

struct Stepper<'a> {
    k: f64,
    h: f64,
    problem: &'a FdmProblem,
    /// Boundary velocity at every completed level, for the delayed feedback.
    past: Vec<f64>,
    dt: f64,
}

impl Stepper<'_> {
    fn delayed_velocity(&self, t: f64) -> f64 {
        let FdmProblem::Delay { params, history } = self.problem else { return 0.0 };
        let s = t - params.tau;
        // Up to and including s = 0 the feedback still sees the prescribed history.
        if s <= 1e-9 * params.tau {
            return history.eval(s.min(0.0));
        }
        let pos = s / self.dt;
        let i = (pos.floor() as usize).min(self.past.len().saturating_sub(1));
        let w = pos - i as f64;
        if w <= 1e-12 || i + 1 >= self.past.len() {
            return self.past[i];
        }
        self.past[i] * (1.0 - w) + self.past[i + 1] * w
    }

    /// Overwrites the incoming invariants with their boundary values.
    fn impose(&self, f: &mut Fields, t: f64) {
        let n = f.r.len() - 1;
        match self.problem {
            FdmProblem::Neumann { a } => {
                f.r[0] = f.s[0];
                f.s[n] = (1.0 - a) / (1.0 + a) * f.r[n];
            }
            FdmProblem::Delay { params, .. } => {
                f.r[0] = -f.s[0];
                let vd = self.delayed_velocity(t);
                f.s[n] = ((1.0 - params.mu1) * f.r[n] - 2.0 * params.mu2 * vd) / (1.0 + params.mu1);
            }
        }
    }

    /// `dt` times the right-hand side.
    fn rhs(&self, f: &Fields, t: f64, dt: f64) -> Fields {
        let n = f.r.len() - 1;
        let l = 1.0 + self.k * t;
        let (k, h) = (self.k, self.h);
        let mut dr = vec![0.0; n + 1];
        let mut ds = vec![0.0; n + 1];
        let mut du = vec![0.0; n + 1];
        for i in 0..=n {
            let y = i as f64 * h;
            if i >= 1 {
                let ry = if i >= 2 {
                    (3.0 * f.r[i] - 4.0 * f.r[i - 1] + f.r[i - 2]) / (2.0 * h)
                } else {
                    (f.r[i] - f.r[i - 1]) / h
                };
                dr[i] = -dt * (1.0 - k * y) / l * ry;
            }
            if i < n {
                let sy = if i + 2 <= n {
                    (-3.0 * f.s[i] + 4.0 * f.s[i + 1] - f.s[i + 2]) / (2.0 * h)
                } else {
                    (f.s[i + 1] - f.s[i]) / h
                };
                ds[i] = dt * (1.0 + k * y) / l * sy;
            }
            du[i] = dt * (0.5 * (f.r[i] + f.s[i]) + 0.5 * k * y * (f.s[i] - f.r[i]));
        }
        Fields { r: dr, s: ds, u: du }
    }

    fn step(&self, f: &Fields, t: f64, dt: f64) -> Fields {
        let mut a = f.axpy(1.0, &self.rhs(f, t, dt), 0.0, f);
        self.impose(&mut a, t + dt);
        let mut b = a.axpy(0.25, &self.rhs(&a, t + dt, dt), 0.75, f);
        self.impose(&mut b, t + 0.5 * dt);
        let mut c = b.axpy(2.0 / 3.0, &self.rhs(&b, t + 0.5 * dt, dt), 1.0 / 3.0, f);
        self.impose(&mut c, t + dt);
        c
    }
}

fn trapezoid(h: f64, v: impl Iterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = v.collect();
    let n = vals.len();
    h * vals.iter().enumerate().map(|(i, &x)| if i == 0 || i + 1 == n { 0.5 * x } else { x }).sum::<f64>()
}

/// `xi/(2 tau) int_{t-tau}^t v^2` by the trapezoid rule on the time levels,
/// with the history sampled on a matching uniform grid before `s = 0`.
fn history_energy(params: &DelayParams, history: &History, times: &[f64], v: &[f64], dt: f64) -> f64 {
    let tau = params.tau;
    let t = *times.last().expect("at least one level");
    let lo = t - tau;
    let mut sum = 0.0;
    if lo < 0.0 {
        let m = ((-lo / dt).ceil() as usize).max(1);
        let hs = -lo / m as f64;
        sum += trapezoid(hs, (0..=m).map(|j| history.eval(lo + j as f64 * hs).powi(2)));
    }
    let first = times.partition_point(|&s| s < lo);
    let mut prev = if first > 0 {
        let (s0, s1) = (times[first - 1], times[first]);
        let w = (lo - s0) / (s1 - s0);
        Some((lo, v[first - 1] * (1.0 - w) + v[first] * w))
    } else {
        None
    };
    for (&s, &val) in times[first..].iter().zip(&v[first..]) {
        if let Some((s0, v0)) = prev {
            sum += 0.5 * (s - s0) * (v0 * v0 + val * val);
        }
        prev = Some((s, val));
    }
    params.xi / (2.0 * tau) * sum
}

/// Marches the mapped problem from `t = 0` to `grid.t_max`.
pub fn solve_fdm(k: f64, problem: &FdmProblem, data: &InitialData, grid: FdmGrid) -> Result<FdmSolution> {
    DomainGeometry::new(k)?;
    data.validate()?;
    let grid = match problem {
        FdmProblem::Neumann { a } => {
            if *a == -1.0 {
                return Err(Error::DegenerateFeedback);
            }
            grid
        }
        FdmProblem::Delay { params, history } => {
            params.validate(&DomainGeometry::new(k)?)?;
            history.validate(params.tau)?;
            if params.mu1 == -1.0 {
                return Err(Error::Unsupported("the finite-difference oracle needs mu1 != -1".into()));
            }
            grid.align_to_delay(params.tau)
        }
    };
    if grid.cfl > 0.9 {
        return Err(Error::Config(format!("Courant ratio {} exceeds 0.9", grid.cfl)));
    }

    let n = grid.ny - 1;
    let h = grid.spacing();
    let ys: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let mut f = Fields {
        r: ys.iter().map(|&y| data.u1(y) - data.u0_prime(y)).collect(),
        s: ys.iter().map(|&y| data.u1(y) + data.u0_prime(y)).collect(),
        u: ys.iter().map(|&y| data.u0(y)).collect(),
    };
    let mut stepper = Stepper { k, h, problem, past: Vec::new(), dt: grid.dt };
    stepper.impose(&mut f, 0.0);

    let field_energy = |f: &Fields, t: f64| -> f64 {
        let l = 1.0 + k * t;
        0.25 * l * trapezoid(h, f.r.iter().zip(&f.s).map(|(r, s)| r * r + s * s))
    };

    let mut times = vec![0.0];
    let mut velocity = vec![0.5 * (f.r[n] + f.s[n])];
    stepper.past.push(velocity[0]);
    let mut energy = vec![field_energy(&f, 0.0)];
    if let FdmProblem::Delay { params, history } = problem {
        energy[0] += history_energy(params, history, &times, &velocity, grid.dt);
    }

    let mut t = 0.0;
    let mut level = 0usize;
    while t < grid.t_max - 1e-12 * grid.t_max {
        let dt = grid.dt.min(grid.t_max - t);
        f = stepper.step(&f, t, dt);
        level += 1;
        t = if dt < grid.dt { grid.t_max } else { level as f64 * grid.dt };
        if (grid.t_max - t).abs() <= 1e-12 * grid.t_max {
            t = grid.t_max;
        }
        let norm = f.r.iter().chain(&f.s).fold(0.0f64, |m, v| m.max(v.abs()));
        if !(norm <= 1e12) {
            return Err(Error::Divergence { t, norm });
        }
        let v = 0.5 * (f.r[n] + f.s[n]);
        times.push(t);
        velocity.push(v);
        stepper.past.push(v);
        let mut e = field_energy(&f, t);
        if let FdmProblem::Delay { params, history } = problem {
            e += history_energy(params, history, &times, &velocity, grid.dt);
        }
        energy.push(e);
    }

    Ok(FdmSolution { grid, k, times, energy, boundary_velocity: velocity, u: f.u })
}

/// Maximum residual of the mapped second-order equation
///
/// ```text
/// v_ss - (2ky/l) v_sy - ((1 - k^2 y^2)/l^2) v_yy + (2k^2 y/l^2) v_y = 0
/// ```
///
/// evaluated with central differences of step `h` on `v(y,s) = u(l(s) y, s)`
/// for `u = ln(t + 1/k + x) + ln(t + 1/k - x)`. It should shrink like `h^2`.
pub fn mapped_operator_residual(k: f64, h: f64, s: f64) -> Result<f64> {
    DomainGeometry::new(k)?;
    let v = |y: f64, s: f64| {
        let l = 1.0 + k * s;
        let z = s + 1.0 / k;
        (z + l * y).ln() + (z - l * y).ln()
    };
    let l = 1.0 + k * s;
    let mut worst = 0.0f64;
    for i in 1..20 {
        let y = i as f64 / 20.0;
        let v_ss = (v(y, s + h) - 2.0 * v(y, s) + v(y, s - h)) / (h * h);
        let v_yy = (v(y + h, s) - 2.0 * v(y, s) + v(y - h, s)) / (h * h);
        let v_y = (v(y + h, s) - v(y - h, s)) / (2.0 * h);
        let v_sy = (v(y + h, s + h) - v(y + h, s - h) - v(y - h, s + h) + v(y - h, s - h)) / (4.0 * h * h);
        let res =
            v_ss - 2.0 * k * y / l * v_sy - (1.0 - k * k * y * y) / (l * l) * v_yy + 2.0 * k * k * y / (l * l) * v_y;
        worst = worst.max(res.abs());
    }
    Ok(worst)
}

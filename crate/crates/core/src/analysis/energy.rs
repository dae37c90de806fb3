use rayon::prelude::*;

use crate::delay::DelayProfile;
use crate::error::{invalid, Result};
use crate::profile::NeumannProfile;
use crate::quad::breakpoint_list;

use super::regime::{rate_coefficient, DelayRegime, NeumannRegime};

/// How the field part of the energy is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyMethod {
    /// `int_{t-l}^{t+l} f'^2`, pulled back interval by interval.
    #[default]
    Reduced,
    /// `1/2 int_0^l (u_t^2 + u_x^2) dx` on the physical domain.
    Direct,
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("time must be finite and non-negative (got {t})")));
    }
    Ok(())
}

/// Breakpoints in `x` for an integrand built from `f'(t + x)` and `f'(t - x)`.
fn physical_breakpoints(t: f64, l: f64, coords: &[f64]) -> Vec<f64> {
    let xs = coords.iter().flat_map(|&b| [b - t, t - b]);
    breakpoint_list(0.0, l, xs)
}

pub fn energy_e1(p: &NeumannProfile, t: f64) -> Result<f64> {
    energy_e1_with(p, t, EnergyMethod::Reduced)
}

pub fn energy_e1_with(p: &NeumannProfile, t: f64, method: EnergyMethod) -> Result<f64> {
    check_time(t)?;
    let l = p.geometry().boundary_position(t)?;
    match method {
        EnergyMethod::Reduced => p.integral_fprime_squared(t - l, t + l),
        EnergyMethod::Direct => {
            let coords = p.fprime_breakpoints(t - l, t + l)?;
            let pts = physical_breakpoints(t, l, &coords);
            let half = p.quadrature().integrate_pieces(
                |x| {
                    let (ut, ux) = p.gradient(x, t)?;
                    Ok(ut * ut + ux * ux)
                },
                &pts,
            )?;
            Ok(0.5 * half)
        }
    }
}

/// `u_t(l(t), t)` for the Neumann problem.
pub fn boundary_velocity_e1(p: &NeumannProfile, t: f64) -> Result<f64> {
    check_time(t)?;
    let l = p.geometry().boundary_position(t)?;
    Ok(p.fprime(t + l)? + p.fprime(t - l)?)
}

/// `E1'(t) = (k a^2 - 2a + k)/2 * u_t(l(t), t)^2`.
pub fn energy_rate_e1(p: &NeumannProfile, t: f64) -> Result<f64> {
    let v = boundary_velocity_e1(p, t)?;
    Ok(0.5 * rate_coefficient(p.geometry().k(), p.a()) * v * v)
}

/// `xi/(2 tau) int_{t-tau}^t v(s)^2 ds`, with `v = g0` before `t = 0`.
pub fn history_energy(p: &DelayProfile, t: f64) -> Result<f64> {
    check_time(t)?;
    let tau = p.params().tau;
    let quad = &p.options().quad;
    let lo = t - tau;

    let past = if lo < 0.0 {
        let pts = breakpoint_list(lo, 0.0f64.min(t), p.history().jumps().iter().copied());
        quad.integrate_pieces(
            |s| {
                let v = p.history().eval(s);
                Ok(v * v)
            },
            &pts,
        )?
    } else {
        0.0
    };

    let start = lo.max(0.0);
    let present = if t > start {
        let k = p.geometry().k();
        let coords = p.breakpoints(p.lower_limit(), p.plus(t));
        let ss = coords.iter().flat_map(|&b| [(b - 1.0) / (1.0 + k), (b + 1.0) / (1.0 - k)]);
        let pts = breakpoint_list(start, t, ss);
        quad.integrate_pieces(
            |s| {
                let v = p.boundary_velocity(s)?;
                Ok(v * v)
            },
            &pts,
        )?
    } else {
        0.0
    };

    Ok(p.params().xi / (2.0 * tau) * (past + present))
}

pub fn energy_e2(p: &DelayProfile, t: f64) -> Result<f64> {
    energy_e2_with(p, t, EnergyMethod::Reduced)
}

pub fn energy_e2_with(p: &DelayProfile, t: f64, method: EnergyMethod) -> Result<f64> {
    check_time(t)?;
    let l = p.geometry().boundary_position(t)?;
    let field = match method {
        EnergyMethod::Reduced => p.integral_fprime_squared(t - l, t + l)?,
        EnergyMethod::Direct => {
            let coords = p.breakpoints(t - l, t + l);
            let pts = physical_breakpoints(t, l, &coords);
            let half = p.options().quad.integrate_pieces(
                |x| {
                    let (ut, ux) = p.gradient(x, t)?;
                    Ok(ut * ut + ux * ux)
                },
                &pts,
            )?;
            0.5 * half
        }
    };
    Ok(field + history_energy(p, t)?)
}

/// Exact rate of [`energy_e2`] in terms of the current and delayed boundary velocities.
pub fn energy_rate_e2(p: &DelayProfile, t: f64) -> Result<f64> {
    check_time(t)?;
    let k = p.geometry().k();
    let prm = p.params();
    let (mu1, mu2) = (prm.mu1, prm.mu2);
    let h = prm.xi / (2.0 * prm.tau);
    let v = p.boundary_velocity(t)?;
    let vd = p.boundary_velocity(t - prm.tau)?;
    Ok((k * (1.0 + mu1 * mu1) / 2.0 - mu1 + h) * v * v
        + (k * mu2 * mu2 / 2.0 - h) * vd * vd
        + (k * mu1 * mu2 - mu2) * v * vd)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegimeAnnotation {
    Neumann(NeumannRegime),
    Delay(DelayRegime),
}

/// Energy, exact rate and boundary traces sampled at increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub rate: Vec<f64>,
    pub ut_boundary: Vec<f64>,
    pub ut_delayed: Option<Vec<f64>>,
    pub regime: RegimeAnnotation,
}

fn check_times(times: &[f64]) -> Result<()> {
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(invalid("sample times must be strictly increasing"));
        }
    }
    times.iter().try_for_each(|&t| check_time(t))
}

impl EnergyTrace {
    pub fn neumann(p: &NeumannProfile, times: &[f64], regime: NeumannRegime) -> Result<Self> {
        check_times(times)?;
        if let Some(&last) = times.last() {
            let l = p.geometry().boundary_position(last)?;
            p.freeze(last + l)?;
        }
        let rows: Vec<(f64, f64, f64)> = times
            .par_iter()
            .map(|&t| Ok((energy_e1(p, t)?, energy_rate_e1(p, t)?, boundary_velocity_e1(p, t)?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            times: times.to_vec(),
            energy: rows.iter().map(|r| r.0).collect(),
            rate: rows.iter().map(|r| r.1).collect(),
            ut_boundary: rows.iter().map(|r| r.2).collect(),
            ut_delayed: None,
            regime: RegimeAnnotation::Neumann(regime),
        })
    }

    pub fn delay(p: &DelayProfile, times: &[f64], regime: DelayRegime) -> Result<Self> {
        check_times(times)?;
        let tau = p.params().tau;
        let rows: Vec<(f64, f64, f64, f64)> = times
            .par_iter()
            .map(|&t| {
                Ok((energy_e2(p, t)?, energy_rate_e2(p, t)?, p.boundary_velocity(t)?, p.boundary_velocity(t - tau)?))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            times: times.to_vec(),
            energy: rows.iter().map(|r| r.0).collect(),
            rate: rows.iter().map(|r| r.1).collect(),
            ut_boundary: rows.iter().map(|r| r.2).collect(),
            ut_delayed: Some(rows.iter().map(|r| r.3).collect()),
            regime: RegimeAnnotation::Delay(regime),
        })
    }

    /// CSV with header `t,E,dE_analytic,ut_boundary[,ut_delayed]`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,E,dE_analytic,ut_boundary");
        if self.ut_delayed.is_some() {
            out.push_str(",ut_delayed");
        }
        out.push('\n');
        for i in 0..self.times.len() {
            let mut row = [self.times[i], self.energy[i], self.rate[i], self.ut_boundary[i]]
                .iter()
                .map(|v| format!("{:.16e}", v + 0.0))
                .collect::<Vec<_>>();
            if let Some(d) = &self.ut_delayed {
                row.push(format!("{:.16e}", d[i] + 0.0));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

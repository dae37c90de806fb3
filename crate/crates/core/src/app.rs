//! The operations behind the `mbwave` command line.
//!
//! Every function returns the text it would write, so the binary only
//! decides where it goes. All parallel work is collected in index order
//! before formatting, which keeps the output byte-for-byte reproducible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    classify_delay_regime, classify_neumann_regime, energy_e1, energy_e2, DelayRegime, EnergyTrace, NeumannRegime,
};
use crate::error::{Error, Result};
use crate::fdm::{solve_fdm, FdmGrid};
use crate::scenario::{Gain, Model, Problem, Range, Scenario};

/// Command-line adjustments applied on top of a scenario file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub quad_tol: Option<f64>,
    pub ny: Option<usize>,
    pub grid_t_max: Option<f64>,
}

impl Overrides {
    /// Parses `ny=<n>,tmax=<t>` (either part may be omitted).
    pub fn parse_grid(&mut self, text: &str) -> Result<()> {
        for part in text.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("grid entry {part:?} must look like key=value")))?;
            let bad = || Error::Config(format!("invalid value in grid entry {part:?}"));
            match key.trim() {
                "ny" => self.ny = Some(value.trim().parse().map_err(|_| bad())?),
                "tmax" => self.grid_t_max = Some(value.trim().parse().map_err(|_| bad())?),
                other => return Err(Error::Config(format!("unknown grid key {other:?} (expected ny or tmax)"))),
            }
        }
        Ok(())
    }

    pub fn apply(&self, scenario: &mut Scenario) -> Result<()> {
        if let Some(tol) = self.quad_tol {
            scenario.quad_tol = tol;
        }
        let fdm = scenario.fdm.get_or_insert_with(Default::default);
        if let Some(ny) = self.ny {
            fdm.ny = ny;
        }
        if let Some(t) = self.grid_t_max {
            fdm.t_max = Some(t);
        }
        scenario.validate()
    }
}

fn num(v: f64) -> String {
    // Adding zero turns -0 into +0.
    format!("{:.16e}", v + 0.0)
}

/// Field samples `t,x,u,u_t,u_x` on `sample_count` times and `space_samples`
/// points across the current domain.
pub fn run_solve(scenario: &Scenario) -> Result<String> {
    let model = scenario.build()?;
    let times = scenario.sample_times();
    let nx = scenario.space_samples;
    let k = scenario.k;
    if let Model::Neumann(p) = &model {
        p.freeze(scenario.t_max + 1.0 + k * scenario.t_max)?;
    }
    let points: Vec<(f64, f64)> = times
        .iter()
        .flat_map(|&t| {
            let l = 1.0 + k * t;
            (0..nx).map(move |j| (t, l * j as f64 / (nx - 1) as f64))
        })
        .collect();
    let rows: Vec<String> = points
        .par_iter()
        .map(|&(t, x)| {
            let s = match &model {
                Model::Neumann(p) => p.state(x, t)?,
                Model::Delay(p) => p.state(x, t)?,
            };
            Ok(format!("{},{},{},{},{}", num(t), num(x), num(s.u), num(s.ut), num(s.ux)))
        })
        .collect::<Result<_>>()?;
    let mut out = String::from("t,x,u,u_t,u_x\n");
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}

/// The energy trace of a scenario as CSV.
pub fn run_energy(scenario: &Scenario) -> Result<String> {
    let times = scenario.sample_times();
    let trace = match scenario.build()? {
        Model::Neumann(p) => EnergyTrace::neumann(&p, &times, classify_neumann_regime(scenario.k, p.a())?)?,
        Model::Delay(p) => {
            let prm = *p.params();
            let regime = classify_delay_regime(scenario.k, prm.mu1, prm.mu2, prm.xi, Some(prm.tau))?;
            EnergyTrace::delay(&p, &times, regime)?
        }
    };
    Ok(trace.to_csv())
}

/// A regime record as printed by `classify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegimeRecord {
    Neumann(NeumannRegime),
    Delay(DelayRegime),
}

impl RegimeRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("regime records serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Scenario(format!("not a regime record: {e}")))
    }
}

pub fn classify_scenario(scenario: &Scenario) -> Result<RegimeRecord> {
    match scenario.problem {
        Problem::NeumannDamped => Ok(RegimeRecord::Neumann(classify_neumann_regime(scenario.k, scenario.gain()?)?)),
        Problem::DirichletDelay => {
            let p = scenario.delay_params()?;
            Ok(RegimeRecord::Delay(classify_delay_regime(scenario.k, p.mu1, p.mu2, p.xi, Some(p.tau))?))
        }
    }
}

/// Bare parameters for `classify` without a scenario file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BareParams {
    pub k: Option<f64>,
    pub a: Option<f64>,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub xi: Option<f64>,
    pub tau: Option<f64>,
}

pub fn classify_bare(p: &BareParams) -> Result<RegimeRecord> {
    let k = p.k.ok_or_else(|| Error::Config("classify needs --k".into()))?;
    match (p.a, p.mu1, p.mu2, p.xi) {
        (Some(a), None, None, None) if p.tau.is_none() => Ok(RegimeRecord::Neumann(classify_neumann_regime(k, a)?)),
        (None, Some(mu1), Some(mu2), Some(xi)) => {
            Ok(RegimeRecord::Delay(classify_delay_regime(k, mu1, mu2, xi, p.tau)?))
        }
        _ => Err(Error::Config("classify takes either --k --a, or --k --mu1 --mu2 --xi [--tau]".into())),
    }
}

fn energy_pair(scenario: &Scenario) -> Result<(f64, f64)> {
    let t = scenario.t_max;
    match scenario.build()? {
        Model::Neumann(p) => Ok((energy_e1(&p, 0.0)?, energy_e1(&p, t)?)),
        Model::Delay(p) => Ok((energy_e2(&p, 0.0)?, energy_e2(&p, t)?)),
    }
}

/// Energies at `0` and `t_max`, or NaNs when the grid point itself is not admissible.
fn guarded_energy_pair(scenario: &Scenario) -> Result<(f64, f64)> {
    match energy_pair(scenario) {
        Err(e) if e.exit_code() == 2 => Ok((f64::NAN, f64::NAN)),
        other => other,
    }
}

/// One row per grid point, sorted by grid index.
///
/// Neumann: `index,a,kind,E0,ET,log_slope`, where `log_slope` is
/// `ln(ET/E0) / ln((t_max + 1/k) k)`, the exponent of a power law in `t + 1/k`.
/// Delay: `index,mu1,mu2,tau,kind,rate_constant,E0,ET`.
pub fn run_sweep(scenario: &Scenario) -> Result<String> {
    let spec = scenario.sweep.clone().unwrap_or_default();
    match scenario.problem {
        Problem::NeumannDamped => {
            let range =
                spec.a.ok_or_else(|| Error::Scenario("sweep needs a range for a (scenario sweep.a or --a)".into()))?;
            let values = range.values()?;
            let k = scenario.k;
            let span = ((scenario.t_max + 1.0 / k) * k).ln();
            let rows: Vec<String> = values
                .par_iter()
                .enumerate()
                .map(|(i, &a)| {
                    let regime = classify_neumann_regime(k, a)?;
                    let mut point = scenario.clone();
                    point.a = Some(Gain::Value(a));
                    point.sweep = None;
                    let (e0, et) = guarded_energy_pair(&point)?;
                    Ok(format!(
                        "{i},{},{:?},{},{},{}",
                        num(a),
                        regime.kind,
                        num(e0),
                        num(et),
                        num((et / e0).ln() / span)
                    ))
                })
                .collect::<Result<_>>()?;
            Ok(std::iter::once("index,a,kind,E0,ET,log_slope".to_string()).chain(rows).map(|r| r + "\n").collect())
        }
        Problem::DirichletDelay => {
            let base = scenario.delay_params()?;
            let axis = |r: Option<Range>, v: f64| r.map(|r| r.values()).unwrap_or_else(|| Ok(vec![v]));
            let mu1s = axis(spec.mu1, base.mu1)?;
            let mu2s = axis(spec.mu2, base.mu2)?;
            let taus = axis(spec.tau, base.tau)?;
            let mut grid = Vec::with_capacity(mu1s.len() * mu2s.len() * taus.len());
            for &m1 in &mu1s {
                for &m2 in &mu2s {
                    grid.extend(taus.iter().map(|&t| (m1, m2, t)));
                }
            }
            let rows: Vec<String> = grid
                .par_iter()
                .enumerate()
                .map(|(i, &(mu1, mu2, tau))| {
                    let mut point = scenario.clone();
                    point.mu1 = Some(mu1);
                    point.mu2 = Some(mu2);
                    point.tau = Some(tau);
                    point.sweep = None;
                    let (kind, rate) = match classify_delay_regime(scenario.k, mu1, mu2, base.xi, Some(tau)) {
                        Ok(r) => (format!("{:?}", r.kind), r.rate_constant.map(num).unwrap_or_default()),
                        Err(e) if e.exit_code() == 2 => ("Invalid".to_string(), String::new()),
                        Err(e) => return Err(e),
                    };
                    let (e0, et) = guarded_energy_pair(&point)?;
                    Ok(format!("{i},{},{},{},{kind},{rate},{},{}", num(mu1), num(mu2), num(tau), num(e0), num(et)))
                })
                .collect::<Result<_>>()?;
            Ok(std::iter::once("index,mu1,mu2,tau,kind,rate_constant,E0,ET".to_string())
                .chain(rows)
                .map(|r| r + "\n")
                .collect())
        }
    }
}

/// Outcome of comparing the characteristics solution with the finite-difference oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub t_max: f64,
    /// Grid sizes, coarsest first.
    pub ny: Vec<usize>,
    /// Relative `L^2` field error at `t_max` for each grid.
    pub field_error: Vec<f64>,
    /// Observed orders between consecutive grids.
    pub orders: Vec<f64>,
    /// Largest relative energy mismatch over the oracle's time levels on the finest grid.
    pub energy_error: f64,
    pub field_tolerance: f64,
    pub energy_tolerance: f64,
    pub min_order: f64,
    pub passed: bool,
}

impl VerifyReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (ny, e) in self.ny.iter().zip(&self.field_error) {
            out.push_str(&format!("ny={ny} field_error={e:.6e}\n"));
        }
        for (i, o) in self.orders.iter().enumerate() {
            out.push_str(&format!("order({}->{})={o:.4}\n", self.ny[i], self.ny[i + 1]));
        }
        out.push_str(&format!("energy_error={:.6e}\n", self.energy_error));
        out.push_str(if self.passed { "PASS\n" } else { "FAIL\n" });
        out
    }
}

/// Runs the oracle at `ny/4`, `ny/2` and `ny` and checks the field error,
/// the observed order and the energy agreement.
pub fn run_verify(scenario: &Scenario) -> Result<VerifyReport> {
    let spec = scenario.fdm.unwrap_or_default();
    let t_max = spec.t_max.unwrap_or(scenario.t_max.min(1.0));
    let model = scenario.build()?;
    let problem = scenario.fdm_problem()?;
    let data = scenario.initial_data()?;
    let finest = spec.ny;
    let sizes: Vec<usize> = [finest / 4, finest / 2, finest].into_iter().filter(|&n| n >= 16).collect();
    if sizes.len() < 2 {
        return Err(Error::Config(format!("verify needs ny >= 64 to measure an order (got {finest})")));
    }

    let exact_u = |x: f64| -> Result<f64> {
        match &model {
            Model::Neumann(p) => Ok(p.state(x, t_max)?.u),
            Model::Delay(p) => Ok(p.state(x, t_max)?.u),
        }
    };
    let exact_e = |t: f64| -> Result<f64> {
        match &model {
            Model::Neumann(p) => energy_e1(p, t),
            Model::Delay(p) => energy_e2(p, t),
        }
    };

    let mut field_error = Vec::new();
    let mut energy_error = 0.0f64;
    for (i, &ny) in sizes.iter().enumerate() {
        let grid = FdmGrid::new(scenario.k, ny, t_max, spec.cfl)?;
        let sol = solve_fdm(scenario.k, &problem, &data, grid)?;
        field_error.push(sol.relative_l2_error(exact_u)?);
        if i + 1 == sizes.len() {
            let stride = (sol.times.len() / 50).max(1);
            let levels: Vec<usize> = (0..sol.times.len()).step_by(stride).chain([sol.times.len() - 1]).collect();
            let scale = levels.iter().map(|&j| exact_e(sol.times[j])).collect::<Result<Vec<_>>>()?;
            let peak = scale.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (&j, e) in levels.iter().zip(&scale) {
                let diff = (sol.energy[j] - e).abs();
                energy_error = energy_error.max(if peak > 0.0 { diff / peak } else { diff });
            }
        }
    }
    let orders: Vec<f64> = field_error.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let (field_tolerance, energy_tolerance, min_order) = (0.01, 0.02, 1.8);
    let exact_zero = field_error.iter().all(|&e| e == 0.0);
    let passed = field_error.last().is_some_and(|&e| e <= field_tolerance)
        && energy_error <= energy_tolerance
        && (exact_zero || orders.iter().all(|&o| o >= min_order));
    Ok(VerifyReport {
        t_max,
        ny: sizes,
        field_error,
        orders,
        energy_error,
        field_tolerance,
        energy_tolerance,
        min_order,
        passed,
    })
}

//! One-parameter sweeps and 1-D maximisation of asymptotic quantities.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundstate::solve_secular;
use crate::correlations::{discord_rank2, PureInput};
use crate::error::{Error, Result};
use crate::spectral::{FrequencyConvention, SpectralModel};

/// Points in the unimodality pre-scan.
pub const PRESCAN_POINTS: usize = 32;
/// Points in the fallback grid for objectives that are not unimodal.
pub const FINE_GRID_POINTS: usize = 256;
/// Argument tolerance of the golden-section search.
pub const ARGUMENT_TOL: f64 = 1e-4;
/// Relative spread below which the pre-scan is reported as flat.
pub const FLATNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParameter {
    EtaO,
    S,
    EtaP,
    OmegaE,
}

impl SweptParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweptParameter::EtaO => "eta_o",
            SweptParameter::S => "s",
            SweptParameter::EtaP => "eta_p",
            SweptParameter::OmegaE => "omega_e",
        }
    }

    fn apply(&self, model: &SpectralModel, value: f64) -> Result<SpectralModel> {
        let mut model = *model;
        match (self, &mut model) {
            (SweptParameter::EtaO, SpectralModel::Ohmic { eta_o, .. }) => *eta_o = value,
            (SweptParameter::S, SpectralModel::Ohmic { s, .. }) => *s = value,
            (SweptParameter::EtaP, SpectralModel::Photonic { eta_p, .. }) => *eta_p = value,
            (SweptParameter::OmegaE, SpectralModel::Photonic { omega_e, .. }) => *omega_e = value,
            _ => {
                return Err(Error::InvalidSweep(format!(
                    "parameter {} does not belong to this family",
                    self.name()
                )))
            }
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    PInfinity,
    DiscordInfinity,
    ConcurrenceInfinity,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::PInfinity => "p_infinity",
            Quantity::DiscordInfinity => "discord_infinity",
            Quantity::ConcurrenceInfinity => "concurrence_infinity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Evenly spaced points (endpoints included) or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Range(GridRange),
    List(Vec<f64>),
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let points = match self {
            Grid::Range(GridRange { min, max, count }) => {
                if *count < 2 {
                    return Err(Error::InvalidSweep(format!("grid count {count} < 2")));
                }
                linspace(*min, *max, *count)
            }
            Grid::List(values) => values.clone(),
        };
        if points.is_empty() {
            return Err(Error::InvalidSweep("empty grid".into()));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSweep("non-finite grid value".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSweep(
                "grid must be strictly increasing".into(),
            ));
        }
        Ok(points)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
        .collect()
}

/// Everything a sweep needs except the grid: the model whose non-swept
/// parameters are held fixed, and the quantity to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub base: SpectralModel,
    pub convention: FrequencyConvention,
    pub swept: SweptParameter,
    pub quantity: Quantity,
    /// Required for discord and concurrence.
    pub input: Option<PureInput>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub objective: Objective,
    pub grid: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    /// Zero when no bound state exists, NaN when evaluation failed.
    pub quantity: f64,
    pub exists: bool,
    pub energy: Option<f64>,
    pub b: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub parameter: SweptParameter,
    pub quantity: Quantity,
    pub rows: Vec<SweepRow>,
}

impl Objective {
    pub fn model_at(&self, value: f64) -> Result<SpectralModel> {
        self.swept.apply(&self.base, value)
    }

    /// Checks everything that does not depend on the swept value.
    pub fn validate(&self) -> Result<()> {
        self.swept.apply(&self.base, self.base_value())?;
        self.convention.validate(&self.base)?;
        if self.quantity != Quantity::PInfinity && self.input.is_none() {
            return Err(Error::InvalidSweep(format!(
                "{} needs a pure input state",
                self.quantity.name()
            )));
        }
        Ok(())
    }

    fn base_value(&self) -> f64 {
        match (self.swept, self.base) {
            (SweptParameter::EtaO, SpectralModel::Ohmic { eta_o, .. }) => eta_o,
            (SweptParameter::S, SpectralModel::Ohmic { s, .. }) => s,
            (SweptParameter::EtaP, SpectralModel::Photonic { eta_p, .. }) => eta_p,
            (SweptParameter::OmegaE, SpectralModel::Photonic { omega_e, .. }) => omega_e,
            _ => f64::NAN,
        }
    }

    /// Evaluates one grid point. Numerical failures end up in the row.
    pub fn evaluate(&self, value: f64) -> Result<SweepRow> {
        let model = self.model_at(value)?;
        model.validate()?;
        let failed = |e: Error| SweepRow {
            value,
            quantity: f64::NAN,
            exists: false,
            energy: None,
            b: None,
            error: Some(e.to_string()),
        };
        let state = match solve_secular(&model, &self.convention) {
            Ok(state) => state,
            Err(e) if e.is_numerical() => return Ok(failed(e)),
            Err(e) => return Err(e),
        };
        let Some(state) = state else {
            return Ok(SweepRow {
                value,
                quantity: 0.0,
                exists: false,
                energy: None,
                b: None,
                error: None,
            });
        };
        let amplitude = state.amplitude_infinity();
        let quantity = match self.quantity {
            Quantity::PInfinity => state.p_infinity,
            Quantity::DiscordInfinity => {
                discord_rank2(&self.required_input()?, Complex64::new(amplitude, 0.0))?
            }
            Quantity::ConcurrenceInfinity => {
                amplitude * self.required_input()?.initial_concurrence()
            }
        };
        Ok(SweepRow {
            value,
            quantity,
            exists: true,
            energy: Some(state.energy),
            b: Some(state.b),
            error: None,
        })
    }

    fn required_input(&self) -> Result<PureInput> {
        self.input.ok_or_else(|| {
            Error::InvalidSweep(format!("{} needs a pure input state", self.quantity.name()))
        })
    }

    fn evaluate_many(&self, values: &[f64]) -> Result<Vec<SweepRow>> {
        values.par_iter().map(|&v| self.evaluate(v)).collect()
    }

    fn scalar(&self, value: f64) -> Result<f64> {
        let row = self.evaluate(value)?;
        match row.error {
            Some(message) => Err(Error::NonConvergence(format!(
                "at {} = {value}: {message}",
                self.swept.name()
            ))),
            None => Ok(row.quantity),
        }
    }
}

/// Evaluates the objective on every grid point, in parallel, preserving order.
///
/// Invalid specifications fail as a whole; numerical failures at individual
/// points are recorded in their rows.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.objective.validate()?;
    let points = spec.grid.points()?;
    for &v in &points {
        spec.objective.model_at(v)?.validate()?;
    }
    Ok(SweepResult {
        parameter: spec.objective.swept,
        quantity: spec.objective.quantity,
        rows: spec.objective.evaluate_many(&points)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Maximum {
    pub argmax: f64,
    pub max: f64,
    /// Whether the pre-scan looked unimodal; if not, a fine grid located the peak.
    pub unimodal: bool,
    /// The pre-scan spread was below [`FLATNESS_TOL`]; `argmax` is then arbitrary.
    pub flat: bool,
    pub evaluations: usize,
}

fn is_unimodal(values: &[f64]) -> bool {
    let slack = 1e-12 * values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut descending = false;
    for w in values.windows(2) {
        if w[1] < w[0] - slack {
            descending = true;
        } else if w[1] > w[0] + slack && descending {
            return false;
        }
    }
    true
}

/// Maximises the objective over the swept parameter on [lo, hi].
pub fn maximize_quantity(objective: &Objective, lo: f64, hi: f64) -> Result<Maximum> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidSweep(format!(
            "bracket [{lo}, {hi}] is empty"
        )));
    }
    objective.validate()?;
    objective.model_at(lo)?.validate()?;
    objective.model_at(hi)?.validate()?;

    let xs = linspace(lo, hi, PRESCAN_POINTS);
    let scan = scan_values(objective, &xs)?;
    let mut evaluations = xs.len();
    if scan.iter().all(|r| !r.exists) {
        return Err(Error::NoMaximum { lo, hi });
    }
    let ys: Vec<f64> = scan.iter().map(|r| r.quantity).collect();
    let (best, &top) = argmax(&ys);
    let bottom = ys.iter().copied().fold(f64::INFINITY, f64::min);
    if top - bottom <= FLATNESS_TOL * top.abs().max(1.0) {
        return Ok(Maximum {
            argmax: xs[best],
            max: top,
            unimodal: true,
            flat: true,
            evaluations,
        });
    }

    let unimodal = is_unimodal(&ys);
    let (grid, values) = if unimodal {
        (xs, ys)
    } else {
        let fine = linspace(lo, hi, FINE_GRID_POINTS);
        let rows = scan_values(objective, &fine)?;
        evaluations += fine.len();
        let values = rows.iter().map(|r| r.quantity).collect();
        (fine, values)
    };
    let (i, &grid_max) = argmax(&values);
    let a = grid[i.saturating_sub(1)];
    let b = grid[(i + 1).min(grid.len() - 1)];
    let (x, y, n) = golden_section(|x| objective.scalar(x), a, b, ARGUMENT_TOL)?;
    evaluations += n;
    let (argmax, max) = if y >= grid_max {
        (x, y)
    } else {
        (grid[i], grid_max)
    };
    Ok(Maximum {
        argmax,
        max,
        unimodal,
        flat: false,
        evaluations,
    })
}

fn scan_values(objective: &Objective, xs: &[f64]) -> Result<Vec<SweepRow>> {
    let rows = objective.evaluate_many(xs)?;
    if let Some(row) = rows.iter().find(|r| r.error.is_some()) {
        return Err(Error::NonConvergence(format!(
            "at {} = {}: {}",
            objective.swept.name(),
            row.value,
            row.error.as_deref().unwrap_or_default()
        )));
    }
    Ok(rows)
}

fn argmax(values: &[f64]) -> (usize, &f64) {
    values.iter().enumerate().fold(
        (0, &values[0]),
        |best, (i, v)| if *v > *best.1 { (i, v) } else { best },
    )
}

/// Golden-section maximisation on [a, b]; returns (x, f(x), evaluations).
fn golden_section<F: Fn(f64) -> Result<f64>>(
    f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64, usize)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    let mut n = 2;
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
        n += 1;
    }
    Ok(if f1 >= f2 { (x1, f1, n) } else { (x2, f2, n) })
}

//! The four subcommands. Each turns a validated configuration into a
//! [`Document`]; nothing is written here.

use serde_json::{json, Value};

use nmdecay_core::boundstate::{coupling_threshold, solve_secular, BoundState};
use nmdecay_core::correlations::{correlation_series, CorrelationPoint};
use nmdecay_core::dynamics::{
    bloch_trajectory, default_dt, estimate_limit_cycle, evolve_amplitude, AmplitudeTrajectory,
    BlochPoint, LimitCycle,
};
use nmdecay_core::sweep::{
    maximize_quantity, run_sweep, Maximum, Objective, SweepResult, SweepSpec, SweptParameter,
};
use nmdecay_core::{Error, FrequencyConvention, SpectralModel};

use crate::config::{canonical, BoundStateConfig, CorrelationsConfig, EvolveConfig, SweepConfig};
use crate::output::{num, opt_num, Document};
use crate::CliError;

fn preamble<T: serde::Serialize>(
    command: &str,
    config: &T,
    convention: &FrequencyConvention,
) -> Vec<String> {
    let unit = if convention.limit_mode {
        "omega_c"
    } else {
        "omega_0"
    };
    vec![
        format!("nmdecay {command} {}", env!("CARGO_PKG_VERSION")),
        format!("config: {}", canonical(config)),
        format!("units: frequencies in {unit}, times in 1/{unit}"),
    ]
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn bound_state(config: &BoundStateConfig) -> Result<Document, CliError> {
    let state = solve_secular(&config.model, &config.convention)?;
    let exists = state.is_some();
    let get = |f: fn(&BoundState) -> f64| state.as_ref().map(f);
    let p_infinity = get(|s| s.p_infinity).unwrap_or(0.0);
    Ok(Document {
        comments: preamble("bound-state", config, &config.convention),
        header: strings(&["energy", "b", "p_infinity", "exists", "residual"]),
        rows: vec![vec![
            opt_num(get(|s| s.energy)),
            opt_num(get(|s| s.b)),
            num(p_infinity),
            exists.to_string(),
            opt_num(get(|s| s.residual)),
        ]],
        trailer: Vec::new(),
        json: json!({
            "command": "bound-state",
            "config": config,
            "energy": get(|s| s.energy),
            "b": get(|s| s.b),
            "p_infinity": p_infinity,
            "exists": exists,
            "residual": get(|s| s.residual),
            "kappa": state.and_then(|s| s.kappa),
        }),
    })
}

fn trajectory(
    model: &SpectralModel,
    convention: &FrequencyConvention,
    t_max: f64,
    dt: Option<f64>,
    stride: usize,
) -> Result<AmplitudeTrajectory, CliError> {
    if stride == 0 {
        return Err(CliError::Config("stride must be at least 1".into()));
    }
    let dt = match dt {
        Some(dt) => dt,
        None => default_dt(model, convention)?,
    };
    Ok(evolve_amplitude(model, convention, t_max, dt)?)
}

/// Trajectory, Bloch vectors and, when the trailing window has settled, the limit cycle.
pub struct Evolution {
    pub trajectory: AmplitudeTrajectory,
    pub bloch: Vec<BlochPoint>,
    pub limit_cycle: Option<LimitCycle>,
}

pub fn run_evolution(config: &EvolveConfig) -> Result<Evolution, CliError> {
    let rho0 = config.initial.density()?;
    let trajectory = trajectory(
        &config.model,
        &config.convention,
        config.t_max,
        config.dt,
        config.stride,
    )?;
    let bloch = bloch_trajectory(&trajectory, &rho0);
    let limit_cycle = match estimate_limit_cycle(&trajectory, &rho0) {
        Ok(cycle) => Some(cycle),
        Err(Error::WindowNotConverged { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(Evolution {
        trajectory,
        bloch,
        limit_cycle,
    })
}

pub fn evolve(config: &EvolveConfig) -> Result<Document, CliError> {
    let run = run_evolution(config)?;
    let traj = &run.trajectory;
    let picked: Vec<usize> = (0..traj.len()).step_by(config.stride).collect();
    let rows = picked
        .iter()
        .map(|&n| {
            let c = traj.amplitudes()[n];
            let p = &run.bloch[n];
            [traj.time(n), c.re, c.im, c.norm_sqr(), p.x, p.y, p.z]
                .map(num)
                .to_vec()
        })
        .collect();
    let samples: Vec<Value> = picked
        .iter()
        .map(|&n| {
            let c = traj.amplitudes()[n];
            let p = &run.bloch[n];
            json!({"t": traj.time(n), "re_c": c.re, "im_c": c.im, "abs_c2": c.norm_sqr(), "x": p.x, "y": p.y, "z": p.z})
        })
        .collect();
    let trailer = vec![match run.limit_cycle {
        Some(lc) => format!("limit_cycle,{},{}", num(lc.radius), num(lc.height)),
        None => "limit_cycle,unconverged".into(),
    }];
    Ok(Document {
        comments: preamble("evolve", config, &config.convention),
        header: strings(&["t", "re_c", "im_c", "abs_c2", "x", "y", "z"]),
        rows,
        trailer,
        json: json!({
            "command": "evolve",
            "config": config,
            "dt": traj.dt(),
            "samples": samples,
            "limit_cycle": run.limit_cycle.map(|lc| json!({"radius": lc.radius, "height": lc.height})),
        }),
    })
}

pub fn run_correlations(config: &CorrelationsConfig) -> Result<Vec<CorrelationPoint>, CliError> {
    let input = config.input.pure_input()?;
    let traj = trajectory(
        &config.model,
        &config.convention,
        config.t_max,
        config.dt,
        config.stride,
    )?;
    Ok(correlation_series(&input, &traj)?)
}

pub fn correlations(config: &CorrelationsConfig) -> Result<Document, CliError> {
    let series = run_correlations(config)?;
    let picked: Vec<&CorrelationPoint> = series.iter().step_by(config.stride).collect();
    Ok(Document {
        comments: preamble("correlations", config, &config.convention),
        header: strings(&["t", "abs_c2", "concurrence", "discord"]),
        rows: picked
            .iter()
            .map(|p| {
                [p.t, p.population, p.concurrence, p.discord]
                    .map(num)
                    .to_vec()
            })
            .collect(),
        trailer: Vec::new(),
        json: json!({"command": "correlations", "config": config, "samples": picked}),
    })
}

pub struct Curve {
    pub label: String,
    pub result: SweepResult,
    pub optimum: Option<Maximum>,
    /// Coupling below which no bound state exists, for Ohmic coupling sweeps.
    pub threshold: Option<f64>,
}

pub fn run_sweep_curves(config: &SweepConfig) -> Result<Vec<Curve>, CliError> {
    let input = config.input.map(|i| i.pure_input()).transpose()?;
    let mut variants = Vec::new();
    if config.curves.is_empty() {
        variants.push(("base".to_string(), config.model, config.convention));
    }
    for curve in &config.curves {
        let model = config.curve_model(curve)?;
        variants.push((
            curve.label.clone(),
            model,
            curve.convention.unwrap_or(config.convention),
        ));
    }
    variants
        .into_iter()
        .map(|(label, base, convention)| {
            let objective = Objective {
                base,
                convention,
                swept: config.parameter,
                quantity: config.quantity,
                input,
            };
            let result = run_sweep(&SweepSpec {
                objective,
                grid: config.grid.clone(),
            })?;
            let optimum = config
                .maximize
                .map(|b| maximize_quantity(&objective, b.lo, b.hi))
                .transpose()?;
            let threshold = match config.parameter {
                SweptParameter::EtaO => coupling_threshold(&base, &convention)?,
                _ => None,
            };
            Ok(Curve {
                label,
                result,
                optimum,
                threshold,
            })
        })
        .collect()
}

pub fn sweep(config: &SweepConfig) -> Result<Document, CliError> {
    let curves = run_sweep_curves(config)?;
    let mut rows = Vec::new();
    let mut trailer = Vec::new();
    for curve in &curves {
        for r in &curve.result.rows {
            rows.push(vec![
                curve.label.clone(),
                num(r.value),
                num(r.quantity),
                r.exists.to_string(),
                opt_num(r.energy),
                opt_num(r.b),
                r.error.clone().unwrap_or_default(),
            ]);
        }
        if let Some(t) = curve.threshold {
            trailer.push(format!("threshold,{},{}", curve.label, num(t)));
        }
        if let Some(m) = curve.optimum {
            trailer.push(format!(
                "optimum,{},{},{},{},{}",
                curve.label,
                num(m.argmax),
                num(m.max),
                m.unimodal,
                m.flat
            ));
        }
    }
    let json_curves: Vec<Value> = curves
        .iter()
        .map(|c| json!({"label": c.label, "rows": c.result.rows, "optimum": c.optimum, "threshold": c.threshold}))
        .collect();
    Ok(Document {
        comments: preamble("sweep", config, &config.convention),
        header: vec![
            "curve".into(),
            config.parameter.name().into(),
            config.quantity.name().into(),
            "exists".into(),
            "energy".into(),
            "b".into(),
            "error".into(),
        ],
        rows,
        trailer,
        json: json!({
            "command": "sweep",
            "config": config,
            "parameter": config.parameter,
            "quantity": config.quantity,
            "curves": json_curves,
        }),
    })
}

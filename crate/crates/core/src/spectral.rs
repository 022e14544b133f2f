//! Reservoir spectral densities and the quantities derived from them.
//!
//! All frequencies are expressed in units of the qubit transition frequency
//! ω₀ (so ω₀ = 1), except in the scaled Ohmic limit selected by
//! [`FrequencyConvention::limit_mode`], where the unit is the cutoff ω_c and
//! the ratio ω₀/ω_c is sent to zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};

/// Relative tolerance of the Ohmic integrals.
pub const INTEGRAL_REL_TOL: f64 = 1e-12;

/// Reservoir spectral density J(ω).
///
/// A coupling strength of zero is accepted and describes a decoupled qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectralModel {
    /// J(ω) = η_o ω_c^{1−s} ω^s e^{−ω/ω_c}
    Ohmic { eta_o: f64, s: f64, omega_c: f64 },
    /// J(ω) = (η_p/π) ω_e^{3/2} (ω − ω_e)^{−1/2} Θ(ω − ω_e)
    Photonic { eta_p: f64, omega_e: f64 },
}

impl SpectralModel {
    pub fn ohmic(eta_o: f64, s: f64, omega_c: f64) -> Self {
        SpectralModel::Ohmic { eta_o, s, omega_c }
    }

    pub fn photonic(eta_p: f64, omega_e: f64) -> Self {
        SpectralModel::Photonic { eta_p, omega_e }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64, allow_zero: bool| {
            let ok = v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!("{name} = {v} out of range")))
            }
        };
        match *self {
            SpectralModel::Ohmic { eta_o, s, omega_c } => {
                check("eta_o", eta_o, true)?;
                check("s", s, false)?;
                check("omega_c", omega_c, false)
            }
            SpectralModel::Photonic { eta_p, omega_e } => {
                check("eta_p", eta_p, true)?;
                check("omega_e", omega_e, false)
            }
        }
    }

    /// Dimensionless dissipation strength (η_o or η_p).
    pub fn coupling(&self) -> f64 {
        match *self {
            SpectralModel::Ohmic { eta_o, .. } => eta_o,
            SpectralModel::Photonic { eta_p, .. } => eta_p,
        }
    }

    pub fn with_coupling(self, eta: f64) -> Self {
        match self {
            SpectralModel::Ohmic { s, omega_c, .. } => SpectralModel::Ohmic {
                eta_o: eta,
                s,
                omega_c,
            },
            SpectralModel::Photonic { omega_e, .. } => SpectralModel::Photonic {
                eta_p: eta,
                omega_e,
            },
        }
    }

    /// Lower edge of the support of J.
    pub fn continuum_edge(&self) -> f64 {
        match *self {
            SpectralModel::Ohmic { .. } => 0.0,
            SpectralModel::Photonic { omega_e, .. } => omega_e,
        }
    }

    /// Power p of the zero-lag singularity of the memory kernel, f(τ) ~ τ^{−p}.
    pub fn kernel_singularity(&self) -> f64 {
        match self {
            SpectralModel::Ohmic { .. } => 0.0,
            SpectralModel::Photonic { .. } => 0.5,
        }
    }
}

/// Unit convention shared by every computation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyConvention {
    /// Scaled ω_c → ∞ regime: unit ω_c, ω₀/ω_c = 0. Ohmic models only.
    #[serde(default)]
    pub limit_mode: bool,
}

impl FrequencyConvention {
    /// The reference transition frequency; every frequency is a multiple of it.
    pub const OMEGA_0: f64 = 1.0;

    pub fn standard() -> Self {
        Self { limit_mode: false }
    }

    pub fn limit() -> Self {
        Self { limit_mode: true }
    }

    pub fn validate(&self, model: &SpectralModel) -> Result<()> {
        model.validate()?;
        if self.limit_mode && !matches!(model, SpectralModel::Ohmic { .. }) {
            return Err(Error::InvalidConvention(
                "limit mode requires an Ohmic model".into(),
            ));
        }
        Ok(())
    }

    /// Qubit frequency and model re-expressed in working units.
    ///
    /// In limit mode the working unit is ω_c, so the model's cutoff becomes 1
    /// and the qubit frequency ω₀/ω_c becomes 0.
    pub fn working(&self, model: &SpectralModel) -> Result<(f64, SpectralModel)> {
        self.validate(model)?;
        match (*model, self.limit_mode) {
            (SpectralModel::Ohmic { eta_o, s, .. }, true) => Ok((
                0.0,
                SpectralModel::Ohmic {
                    eta_o,
                    s,
                    omega_c: 1.0,
                },
            )),
            (m, _) => Ok((Self::OMEGA_0, m)),
        }
    }
}

/// Evaluates J(ω). At the photonic band edge the density diverges and
/// `f64::INFINITY` is returned.
pub fn evaluate_density(model: &SpectralModel, omega: f64) -> Result<f64> {
    if omega.is_nan() || omega < 0.0 {
        return Err(Error::Domain(format!(
            "frequency {omega} must be non-negative"
        )));
    }
    Ok(match *model {
        SpectralModel::Ohmic { eta_o, s, omega_c } => {
            if omega == 0.0 {
                0.0
            } else {
                let x = omega / omega_c;
                eta_o * omega_c * x.powf(s) * (-x).exp()
            }
        }
        SpectralModel::Photonic { eta_p, omega_e } => {
            if omega < omega_e {
                0.0
            } else if omega == omega_e {
                f64::INFINITY
            } else {
                eta_p / PI * omega_e.powf(1.5) / (omega - omega_e).sqrt()
            }
        }
    })
}

/// Memory kernel f(τ) = ∫₀^∞ J(ω) e^{−iωτ} dω in closed form.
pub fn memory_kernel(model: &SpectralModel, tau: f64) -> Result<Complex64> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::Domain(format!("lag {tau} must be non-negative")));
    }
    if tau == 0.0 && matches!(model, SpectralModel::Photonic { .. }) {
        return Err(Error::EdgeSingularity(
            "photonic memory kernel diverges as τ^(-1/2) at zero lag".into(),
        ));
    }
    let reg = kernel_regular_part(model, tau);
    Ok(match model {
        SpectralModel::Ohmic { .. } => reg,
        SpectralModel::Photonic { .. } => reg / tau.sqrt(),
    })
}

/// Smooth factor g(τ) = τ^p f(τ), where p is [`SpectralModel::kernel_singularity`].
pub fn kernel_regular_part(model: &SpectralModel, tau: f64) -> Complex64 {
    match *model {
        SpectralModel::Ohmic { eta_o, s, omega_c } => {
            // (1 + iω_cτ)^{−(s+1)} on the principal branch
            let u = omega_c * tau;
            let modulus = (1.0 + u * u).powf(-0.5 * (s + 1.0));
            let phase = -(s + 1.0) * u.atan();
            Complex64::from_polar(eta_o * omega_c * omega_c * gamma(s + 1.0) * modulus, phase)
        }
        SpectralModel::Photonic { eta_p, omega_e } => {
            let amp = eta_p * omega_e.powf(1.5) / PI.sqrt();
            Complex64::from_polar(amp, -(omega_e * tau + PI / 4.0))
        }
    }
}

fn ohmic_breakpoints(s: f64, kappa: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let d = -kappa;
    if d > 0.0 && d < 1.0 {
        let mut x = d;
        while x < 1.0 {
            pts.push(x);
            x *= 8.0;
        }
    }
    let peak = s.max(1.0);
    let log_peak = s * peak.ln() - peak;
    let mut x: f64 = 1.0;
    loop {
        pts.push(x);
        if x > 2.0 * peak && s * x.ln() - x < log_peak - 45.0 {
            break;
        }
        x *= 2.0;
    }
    pts
}

/// ∫₀^∞ x^s e^{−x} / (x − κ) dx for κ ≤ 0.
pub fn ohmic_shift_integral(s: f64, kappa: f64) -> Result<f64> {
    if kappa > 0.0 || kappa.is_nan() {
        return Err(Error::InsideContinuum { energy: kappa });
    }
    if kappa == 0.0 {
        return Ok(gamma(s));
    }
    let est = quadrature::integrate(
        |x: f64| x.powf(s) * (-x).exp() / (x - kappa),
        &ohmic_breakpoints(s, kappa),
        Tolerance::relative(INTEGRAL_REL_TOL),
    )?;
    Ok(est.value)
}

/// ∫₀^∞ x^s e^{−x} / (x − κ)² dx for κ ≤ 0; infinite at κ = 0 when s ≤ 1.
pub fn ohmic_weight_integral(s: f64, kappa: f64) -> Result<f64> {
    if kappa > 0.0 || kappa.is_nan() {
        return Err(Error::InsideContinuum { energy: kappa });
    }
    if kappa == 0.0 {
        return Ok(if s > 1.0 {
            gamma(s - 1.0)
        } else {
            f64::INFINITY
        });
    }
    let est = quadrature::integrate(
        |x: f64| {
            let d = x - kappa;
            x.powf(s) * (-x).exp() / (d * d)
        },
        &ohmic_breakpoints(s, kappa),
        Tolerance::relative(INTEGRAL_REL_TOL),
    )?;
    Ok(est.value)
}

fn check_below_support(model: &SpectralModel, energy: f64) -> Result<()> {
    let edge = model.continuum_edge();
    let inside = match model {
        SpectralModel::Ohmic { .. } => energy > edge,
        SpectralModel::Photonic { .. } => energy >= edge,
    };
    if inside || energy.is_nan() {
        Err(Error::InsideContinuum { energy })
    } else {
        Ok(())
    }
}

/// ∫₀^∞ J(ω) / (ω − E) dω for E below the continuum.
pub fn level_shift_integral(model: &SpectralModel, energy: f64) -> Result<f64> {
    check_below_support(model, energy)?;
    match *model {
        SpectralModel::Ohmic { eta_o, s, omega_c } => {
            Ok(eta_o * omega_c * ohmic_shift_integral(s, energy / omega_c)?)
        }
        SpectralModel::Photonic { eta_p, omega_e } => {
            Ok(eta_p * omega_e.powf(1.5) / (omega_e - energy).sqrt())
        }
    }
}

/// ∫₀^∞ J(ω) / (ω − E)² dω for E below the continuum.
pub fn mode_weight_integral(model: &SpectralModel, energy: f64) -> Result<f64> {
    check_below_support(model, energy)?;
    match *model {
        SpectralModel::Ohmic { eta_o, s, omega_c } => {
            Ok(eta_o * ohmic_weight_integral(s, energy / omega_c)?)
        }
        SpectralModel::Photonic { eta_p, omega_e } => {
            Ok(eta_p * omega_e.powf(1.5) / (2.0 * (omega_e - energy).powf(1.5)))
        }
    }
}

//! Amplitude dynamics ċ + iω₀c + ∫₀ᵗ f(t−τ) c(τ) dτ = 0 with c(0) = 1, and
//! the qubit Bloch trajectory it generates.
//!
//! The solver works in the rotating frame y(t) = e^{iω₀t} c(t), where the
//! equation reads y′ = −∫₀ᵗ K(t−τ) y(τ) dτ with K(τ) = f(τ) e^{iω₀τ}.
//! Integrating once in time gives the second-kind Volterra equation
//!
//! ```text
//! y(t) = 1 − ∫₀ᵗ L(t−τ) y(τ) dτ,    L(u) = ∫₀ᵘ K(v) dv.
//! ```
//!
//! y is taken piecewise linear on the uniform grid and the convolution is
//! evaluated exactly against that interpolant (product integration). The
//! per-subinterval moments ∫L and ∫uL are accumulated from Gauss–Legendre
//! samples of K; for the photonic kernel K(τ) = g(τ)/√τ the first
//! subinterval uses τ = x², which makes the integrand smooth. The newest node
//! enters linearly and is solved for directly. The scheme is second order for
//! both kernel families, including the τ^{−1/2} case.
//!
//! Cost is O(N²) in the number of steps. The convolution weights depend only
//! on the lag, so a fast-history method can replace the inner loop without
//! touching the public surface.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gl10;
use crate::spectral::{kernel_regular_part, FrequencyConvention, SpectralModel};

/// |y| above this bound rejects the step.
pub const REJECTION_BOUND: f64 = 1.0 + 1e-6;
/// Largest grid accepted by [`evolve_amplitude`].
pub const MAX_STEPS: usize = 2_000_000;
/// Fraction of the trajectory treated as the trailing window.
pub const TRAILING_FRACTION: f64 = 0.1;
/// Largest spread of |c| over the trailing window, relative to its mean,
/// accepted as converged.
pub const WINDOW_VARIATION_LIMIT: f64 = 0.05;
/// Below this modulus the trailing window counts as fully decayed.
pub const DECAYED_MODULUS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lab,
    /// y(t) = e^{iω₀t} c(t)
    Rotating,
}

/// Uniformly sampled amplitude c(tₙ), tₙ = n·dt.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    dt: f64,
    omega_0: f64,
    frame: Frame,
    amplitudes: Vec<Complex64>,
    model: SpectralModel,
    convention: FrequencyConvention,
}

impl AmplitudeTrajectory {
    /// Wraps externally produced samples, checking c(0) = 1 and |c| ≤ 1.
    pub fn from_samples(
        model: SpectralModel,
        convention: FrequencyConvention,
        dt: f64,
        amplitudes: Vec<Complex64>,
        frame: Frame,
    ) -> Result<Self> {
        let (omega_0, _) = convention.working(&model)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidSolver(format!("dt = {dt} must be positive")));
        }
        match amplitudes.first() {
            Some(c0) if *c0 == Complex64::new(1.0, 0.0) => {}
            _ => {
                return Err(Error::InvalidState(
                    "trajectory must start at c(0) = 1".into(),
                ))
            }
        }
        if let Some(n) = amplitudes.iter().position(|c| !(c.norm() <= 1.0 + 1e-9)) {
            return Err(Error::InvalidState(format!("|c| exceeds 1 at sample {n}")));
        }
        Ok(Self {
            dt,
            omega_0,
            frame,
            amplitudes,
            model,
            convention,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |n| self.time(n))
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// Qubit frequency in working units (zero in limit mode).
    pub fn omega_0(&self) -> f64 {
        self.omega_0
    }

    pub fn model(&self) -> &SpectralModel {
        &self.model
    }

    pub fn convention(&self) -> &FrequencyConvention {
        &self.convention
    }

    /// Samples in the trajectory's own frame.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Same trajectory expressed in `frame`.
    pub fn in_frame(&self, frame: Frame) -> Self {
        if frame == self.frame {
            return self.clone();
        }
        let sign = match frame {
            Frame::Rotating => 1.0,
            Frame::Lab => -1.0,
        };
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| c * Complex64::from_polar(1.0, sign * self.omega_0 * self.time(n)))
            .collect();
        Self {
            frame,
            amplitudes,
            ..self.clone()
        }
    }

    /// |c(tₙ)|², identical in both frames.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    fn trailing_window(&self) -> &[Complex64] {
        let n = self.len();
        let w = ((n as f64 * TRAILING_FRACTION).ceil() as usize).clamp(1, n);
        &self.amplitudes[n - w..]
    }

    /// Mean of |c|² over the trailing 10% of the samples.
    pub fn trailing_mean_population(&self) -> f64 {
        let w = self.trailing_window();
        w.iter().map(|c| c.norm_sqr()).sum::<f64>() / w.len() as f64
    }
}

/// dt = min(0.01/ω₀, 0.05/ω_c) for Ohmic, 0.005/ω₀ for photonic, in working units.
pub fn default_dt(model: &SpectralModel, convention: &FrequencyConvention) -> Result<f64> {
    let (omega_0, working) = convention.working(model)?;
    Ok(match working {
        SpectralModel::Ohmic { omega_c, .. } => {
            let qubit = if omega_0 > 0.0 {
                0.01 / omega_0
            } else {
                f64::INFINITY
            };
            qubit.min(0.05 / omega_c)
        }
        SpectralModel::Photonic { .. } => 0.005 / omega_0,
    })
}

/// Convolution weights: `lower[k]`, `upper[k]` multiply y at the near and far
/// ends of lag interval [k·dt, (k+1)·dt].
fn product_weights(
    model: &SpectralModel,
    omega_0: f64,
    dt: f64,
    steps: usize,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let rule = gl10();
    let singular = model.kernel_singularity() > 0.0;
    let kernel = |v: f64| kernel_regular_part(model, v) * Complex64::from_polar(1.0, omega_0 * v);
    let mut lower = Vec::with_capacity(steps);
    let mut upper = Vec::with_capacity(steps);
    let mut l1 = Complex64::new(0.0, 0.0);
    let h = dt;
    let mut samples: Vec<(f64, Complex64)> = Vec::with_capacity(rule.len());
    for k in 0..steps {
        let a = k as f64 * h;
        let b = a + h;
        samples.clear();
        if singular && k == 0 {
            // v = x²: K(v) dv = 2 g(x²) dx
            samples.extend(
                rule.mapped(0.0, h.sqrt())
                    .map(|(x, w)| (x * x, kernel(x * x) * (2.0 * w))),
            );
        } else if singular {
            samples.extend(
                rule.mapped(a, b)
                    .map(|(v, w)| (v, kernel(v) * (w / v.sqrt()))),
            );
        } else {
            samples.extend(rule.mapped(a, b).map(|(v, w)| (v, kernel(v) * w)));
        }
        let mut first = Complex64::new(0.0, 0.0);
        let mut second = Complex64::new(0.0, 0.0);
        let mut total = Complex64::new(0.0, 0.0);
        for &(v, kdv) in &samples {
            first += kdv * (b - v);
            second += kdv * (0.5 * (h * h - (v - a) * (v - a)));
            total += kdv;
        }
        let area = l1 * h + first;
        let moment = l1 * (0.5 * h * h) + second;
        lower.push(area - moment / h);
        upper.push(moment / h);
        l1 += total;
    }
    (lower, upper)
}

/// Integrates the amplitude equation on tₙ = n·dt up to t_max (working units).
pub fn evolve_amplitude(
    model: &SpectralModel,
    convention: &FrequencyConvention,
    t_max: f64,
    dt: f64,
) -> Result<AmplitudeTrajectory> {
    let (omega_0, working) = convention.working(model)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidSolver(format!("dt = {dt} must be positive")));
    }
    if !(t_max >= dt && t_max.is_finite()) {
        return Err(Error::InvalidSolver(format!(
            "t_max = {t_max} must be at least dt = {dt}"
        )));
    }
    let steps = (t_max / dt).round() as usize;
    if steps > MAX_STEPS {
        return Err(Error::InvalidSolver(format!(
            "{steps} steps exceed the limit of {MAX_STEPS}"
        )));
    }

    let (lower, upper) = product_weights(&working, omega_0, dt, steps);
    // node weights by lag: w[j] multiplies y_{m−j} for 0 < j < m
    let mut node = vec![Complex64::new(0.0, 0.0); steps + 1];
    for j in 1..steps {
        node[j] = lower[j] + upper[j - 1];
    }

    let one = Complex64::new(1.0, 0.0);
    let mut y = Vec::with_capacity(steps + 1);
    y.push(one);
    let diagonal = one + lower.first().copied().unwrap_or_default();
    for m in 1..=steps {
        let history: Complex64 = node[1..m]
            .iter()
            .zip(y[1..m].iter().rev())
            .fold(Complex64::new(0.0, 0.0), |acc, (w, v)| acc + w * v);
        let start = upper[m - 1] * y[0];
        let next = (one - history - start) / diagonal;
        let magnitude = next.norm();
        if !(magnitude <= REJECTION_BOUND) {
            return Err(Error::StepRejected { step: m, magnitude });
        }
        y.push(next);
    }

    let rotating = AmplitudeTrajectory {
        dt,
        omega_0,
        frame: Frame::Rotating,
        amplitudes: y,
        model: *model,
        convention: *convention,
    };
    Ok(rotating.in_frame(Frame::Lab))
}

/// Single-qubit density matrix in the {|+⟩, |−⟩} basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDensity(Matrix2<Complex64>);

impl QubitDensity {
    pub fn new(rho: Matrix2<Complex64>) -> Result<Self> {
        let herm = (rho - rho.adjoint()).norm();
        if !(herm <= 1e-12) {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let trace = rho.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::InvalidState(format!("trace {trace} is not 1")));
        }
        let det = rho.determinant().re;
        if rho[(0, 0)].re < -1e-12 || rho[(1, 1)].re < -1e-12 || det < -1e-12 {
            return Err(Error::InvalidState("not positive semidefinite".into()));
        }
        Ok(Self(rho))
    }

    /// |ψ⟩⟨ψ| for |ψ⟩ = a₊|+⟩ + a₋|−⟩ (normalised internally).
    pub fn pure(plus: Complex64, minus: Complex64) -> Result<Self> {
        let norm = (plus.norm_sqr() + minus.norm_sqr()).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let (p, m) = (plus / norm, minus / norm);
        Self::new(Matrix2::new(
            p * p.conj(),
            p * m.conj(),
            m * p.conj(),
            m * m.conj(),
        ))
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    /// ρ₊₊
    pub fn excited_population(&self) -> f64 {
        self.0[(0, 0)].re
    }

    /// ρ₊₋
    pub fn coherence(&self) -> Complex64 {
        self.0[(0, 1)]
    }

    /// ρ_A(t) = [[ρ₊₊|c|², ρ₊₋c], [ρ₋₊c*, 1 − ρ₊₊|c|²]]
    pub fn evolved(&self, c: Complex64) -> Matrix2<Complex64> {
        let pop = self.excited_population() * c.norm_sqr();
        let coh = self.coherence() * c;
        Matrix2::new(
            Complex64::new(pop, 0.0),
            coh,
            coh.conj(),
            Complex64::new(1.0 - pop, 0.0),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochPoint {
    /// (2 Re ρ₊₋, 2 Im ρ₋₊, 2ρ₊₊ − 1)
    pub fn from_matrix(rho: &Matrix2<Complex64>) -> Self {
        Self {
            x: 2.0 * rho[(0, 1)].re,
            y: 2.0 * rho[(1, 0)].im,
            z: 2.0 * rho[(0, 0)].re - 1.0,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// Distance from the z axis.
    pub fn horizontal_radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Bloch vector of ρ_A(tₙ) at every node.
pub fn bloch_trajectory(traj: &AmplitudeTrajectory, rho0: &QubitDensity) -> Vec<BlochPoint> {
    let lab = traj.in_frame(Frame::Lab);
    lab.amplitudes()
        .iter()
        .map(|&c| BlochPoint::from_matrix(&rho0.evolved(c)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCycle {
    /// Mean horizontal radius a(t) = 2|ρ₊₋(0)||c(t)| over the trailing window.
    pub radius: f64,
    /// z∞ = 2ρ₊₊(0)|c∞|² − 1 with |c∞|² the trailing-window mean.
    pub height: f64,
}

/// Radius and height of the asymptotic horizontal orbit of the Bloch vector.
pub fn estimate_limit_cycle(traj: &AmplitudeTrajectory, rho0: &QubitDensity) -> Result<LimitCycle> {
    if traj.is_empty() {
        return Err(Error::InvalidState("empty trajectory".into()));
    }
    let window = traj.trailing_window();
    let n = window.len() as f64;
    let (lo, hi) = window
        .iter()
        .map(|c| c.norm())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
            (lo.min(a), hi.max(a))
        });
    let mean_modulus = window.iter().map(|c| c.norm()).sum::<f64>() / n;
    let variation = (hi - lo) / mean_modulus;
    if hi > DECAYED_MODULUS && !(variation <= WINDOW_VARIATION_LIMIT) {
        return Err(Error::WindowNotConverged {
            variation,
            limit: WINDOW_VARIATION_LIMIT,
        });
    }
    let mean_population = window.iter().map(|c| c.norm_sqr()).sum::<f64>() / n;
    Ok(LimitCycle {
        radius: 2.0 * rho0.coherence().norm() * mean_modulus,
        height: 2.0 * rho0.excited_population() * mean_population - 1.0,
    })
}

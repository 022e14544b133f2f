//! Atom–photon bound state: the real root of the secular equation
//! ω₀ − ∫ J(ω)/(ω − E) dω = E, its excited-state weight b and the trapped
//! population b⁴.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::spectral::{
    ohmic_shift_integral, ohmic_weight_integral, FrequencyConvention, SpectralModel,
};

/// Absolute tolerance on κ = E/ω_c for the Ohmic root.
pub const ROOT_TOL: f64 = 1e-12;
/// Maximum number of geometric bracket expansions.
pub const MAX_BRACKET_EXPANSIONS: usize = 200;
const MAX_ROOT_ITERATIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    /// Bound-state energy in working units (ω₀, or ω_c in limit mode).
    pub energy: f64,
    /// Excited-state amplitude of the bound state, in (0, 1].
    pub b: f64,
    /// Trapped population b⁴.
    pub p_infinity: f64,
    /// E/ω_c, Ohmic models only.
    pub kappa: Option<f64>,
    /// |ω₀ − ∫J/(ω−E) − E| at the returned energy, in working units.
    pub residual: f64,
}

impl BoundState {
    fn new(energy: f64, b: f64, kappa: Option<f64>, residual: f64) -> Self {
        let b2 = b * b;
        Self {
            energy,
            b,
            p_infinity: b2 * b2,
            kappa,
            residual,
        }
    }

    /// Modulus of the asymptotic amplitude, |c∞| = b².
    pub fn amplitude_infinity(&self) -> f64 {
        self.b * self.b
    }
}

/// |c∞|² = b⁴.
pub fn asymptotic_population(state: &BoundState) -> f64 {
    let b2 = state.b * state.b;
    b2 * b2
}

/// Whether the secular equation has a root below the continuum.
///
/// Ohmic: η_o Γ(s) ≥ ω₀/ω_c (the ratio is zero in limit mode). Photonic: always.
pub fn bound_state_exists(model: &SpectralModel, convention: &FrequencyConvention) -> Result<bool> {
    convention.validate(model)?;
    Ok(match *model {
        SpectralModel::Ohmic { eta_o, s, omega_c } => {
            eta_o == 0.0 || eta_o * gamma(s) >= detuning_ratio(omega_c, convention)
        }
        SpectralModel::Photonic { .. } => true,
    })
}

/// Smallest Ohmic coupling with a bound state, (ω₀/ω_c)/Γ(s); `None` for photonic models.
pub fn coupling_threshold(
    model: &SpectralModel,
    convention: &FrequencyConvention,
) -> Result<Option<f64>> {
    convention.validate(model)?;
    Ok(match *model {
        SpectralModel::Ohmic { s, omega_c, .. } => {
            Some(detuning_ratio(omega_c, convention) / gamma(s))
        }
        SpectralModel::Photonic { .. } => None,
    })
}

fn detuning_ratio(omega_c: f64, convention: &FrequencyConvention) -> f64 {
    if convention.limit_mode {
        0.0
    } else {
        FrequencyConvention::OMEGA_0 / omega_c
    }
}

/// Solves the secular equation and evaluates b.
///
/// Returns `None` when no bound state exists, and also exactly at the Ohmic
/// threshold when ∫J/ω² diverges (s ≤ 1), where b would vanish.
pub fn solve_secular(
    model: &SpectralModel,
    convention: &FrequencyConvention,
) -> Result<Option<BoundState>> {
    convention.validate(model)?;
    if model.coupling() == 0.0 {
        // decoupled qubit: the bare excited state is an eigenstate
        let omega_0 = if convention.limit_mode {
            0.0
        } else {
            FrequencyConvention::OMEGA_0
        };
        let kappa = match model {
            SpectralModel::Ohmic { omega_c, .. } if !convention.limit_mode => {
                Some(omega_0 / omega_c)
            }
            SpectralModel::Ohmic { .. } => Some(0.0),
            SpectralModel::Photonic { .. } => None,
        };
        return Ok(Some(BoundState::new(omega_0, 1.0, kappa, 0.0)));
    }
    match *model {
        SpectralModel::Ohmic { eta_o, s, omega_c } => solve_ohmic(eta_o, s, omega_c, convention),
        SpectralModel::Photonic { eta_p, omega_e } => Ok(Some(solve_photonic(eta_p, omega_e))),
    }
}

fn solve_ohmic(
    eta_o: f64,
    s: f64,
    omega_c: f64,
    convention: &FrequencyConvention,
) -> Result<Option<BoundState>> {
    let ratio = detuning_ratio(omega_c, convention);
    let secular =
        |kappa: f64| -> Result<f64> { Ok(ratio - eta_o * ohmic_shift_integral(s, kappa)? - kappa) };

    let at_zero = secular(0.0)?;
    if at_zero > 0.0 {
        return Ok(None);
    }
    let kappa = if at_zero == 0.0 {
        0.0
    } else {
        let mut lo = -1.0;
        let mut g_lo = secular(lo)?;
        let mut expansions = 0;
        while g_lo <= 0.0 {
            expansions += 1;
            if expansions > MAX_BRACKET_EXPANSIONS {
                return Err(Error::NonConvergence(format!(
                    "no sign change after {MAX_BRACKET_EXPANSIONS} bracket expansions"
                )));
            }
            lo *= 2.0;
            g_lo = secular(lo)?;
        }
        bracketed_root(secular, lo, g_lo, 0.0, at_zero)?
    };

    let weight = eta_o * ohmic_weight_integral(s, kappa)?;
    if !weight.is_finite() {
        return Ok(None);
    }
    let b = (1.0 + weight).powf(-0.5);
    let unit = if convention.limit_mode { 1.0 } else { omega_c };
    let residual = (unit * secular(kappa)?).abs();
    Ok(Some(BoundState::new(
        kappa * unit,
        b,
        Some(kappa),
        residual,
    )))
}

/// Root of a decreasing function on [lo, hi] with g(lo) > 0 > g(hi):
/// Illinois secant steps, with bisection whenever the bracket fails to halve.
fn bracketed_root<F>(g: F, mut lo: f64, mut g_lo: f64, mut hi: f64, mut g_hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut side = 0i8;
    for _ in 0..MAX_ROOT_ITERATIONS {
        let width = hi - lo;
        let tol = ROOT_TOL.max(4.0 * f64::EPSILON * lo.abs().max(hi.abs()));
        if width <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let mut x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let gx = g(x)?;
        if gx == 0.0 {
            return Ok(x);
        }
        if gx > 0.0 {
            lo = x;
            g_lo = gx;
            if side == 1 {
                g_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            g_hi = gx;
            if side == -1 {
                g_lo *= 0.5;
            }
            side = -1;
        }
        if hi - lo > 0.5 * width {
            let mid = 0.5 * (lo + hi);
            let gm = g(mid)?;
            if gm > 0.0 {
                lo = mid;
                g_lo = gm;
            } else {
                hi = mid;
                g_hi = gm;
            }
            side = 0;
        }
    }
    Err(Error::NonConvergence(format!(
        "bracket [{lo}, {hi}] not reduced below {ROOT_TOL} in {MAX_ROOT_ITERATIONS} iterations"
    )))
}

/// Unique positive root of y³ + p y + q with q < 0.
fn positive_cubic_root(p: f64, q: f64) -> f64 {
    let disc = 0.25 * q * q + p * p * p / 27.0;
    let mut y = if disc >= 0.0 {
        let u = (-0.5 * q + disc.sqrt()).cbrt();
        u - p / (3.0 * u)
    } else {
        // three real roots (p < 0); the largest is the positive one
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (1.5 * q / p * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        m * (arg.acos() / 3.0).cos()
    };
    for _ in 0..4 {
        let f = (y * y + p) * y + q;
        let df = 3.0 * y * y + p;
        if df <= 0.0 {
            break;
        }
        let dy = f / df;
        y -= dy;
        if dy.abs() <= 1e-16 * y.abs() {
            break;
        }
    }
    y
}

fn solve_photonic(eta_p: f64, omega_e: f64) -> BoundState {
    let omega_0 = FrequencyConvention::OMEGA_0;
    let strength = eta_p * omega_e.powf(1.5);
    // y = √(ω_e − E) solves y³ + (ω₀ − ω_e) y − η_p ω_e^{3/2} = 0
    let y = positive_cubic_root(omega_0 - omega_e, -strength);
    let energy = omega_e - y * y;
    let weight = strength / (2.0 * y * y * y);
    let b = (1.0 + weight).powf(-0.5);
    let residual = (omega_0 - strength / y - energy).abs();
    BoundState::new(energy, b, None, residual)
}

/// b = [1 + (ω₀ − E) / (2(ω_e − E))]^{−1/2}, valid at a photonic bound-state energy.
pub fn photonic_b_from_energy(omega_e: f64, energy: f64) -> f64 {
    let omega_0 = FrequencyConvention::OMEGA_0;
    (1.0 + (omega_0 - energy) / (2.0 * (omega_e - energy))).powf(-0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{level_shift_integral, mode_weight_integral};
    use approx::assert_relative_eq;

    fn std() -> FrequencyConvention {
        FrequencyConvention::standard()
    }

    #[test]
    fn existence_examples() {
        assert!(bound_state_exists(&SpectralModel::ohmic(0.08, 5.5, 0.3), &std()).unwrap());
        assert!(!bound_state_exists(&SpectralModel::ohmic(0.01, 1.0, 1.0), &std()).unwrap());
        for eta in [1e-4, 0.08, 0.5] {
            for s in [0.3, 1.0, 4.0] {
                let m = SpectralModel::ohmic(eta, s, 0.3);
                assert!(bound_state_exists(&m, &FrequencyConvention::limit()).unwrap());
            }
        }
        assert!(bound_state_exists(&SpectralModel::photonic(1e-3, 1.2), &std()).unwrap());
    }

    #[test]
    fn below_threshold_has_no_root() {
        let m = SpectralModel::ohmic(0.05, 5.5, 0.3);
        assert!(solve_secular(&m, &std()).unwrap().is_none());
    }

    #[test]
    fn photonic_resonance_traps_four_ninths() {
        for eta in [0.01, 0.05, 0.1, 0.3] {
            let bs = solve_secular(&SpectralModel::photonic(eta, 1.0), &std())
                .unwrap()
                .unwrap();
            assert_relative_eq!(bs.energy, 1.0 - f64::powf(eta, 2.0 / 3.0), epsilon = 1e-14);
            assert_relative_eq!(bs.b * bs.b, 2.0 / 3.0, epsilon = 1e-14);
            assert!((bs.p_infinity - 4.0 / 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn photonic_b_identity_and_residual() {
        for omega_e in [0.5, 0.8, 1.0, 1.2, 3.0] {
            for eta in [1e-3, 0.02, 0.1, 0.4, 2.0] {
                let m = SpectralModel::photonic(eta, omega_e);
                let bs = solve_secular(&m, &std()).unwrap().unwrap();
                assert!(bs.energy < omega_e);
                let via_weight = (1.0 + mode_weight_integral(&m, bs.energy).unwrap()).powf(-0.5);
                assert!((via_weight - photonic_b_from_energy(omega_e, bs.energy)).abs() < 1e-10);
                assert!((via_weight - bs.b).abs() < 1e-12);
                let res = 1.0 - level_shift_integral(&m, bs.energy).unwrap() - bs.energy;
                assert!(res.abs() <= 1e-9, "residual {res}");
            }
        }
    }

    #[test]
    fn cubic_root_branches() {
        // three real roots: y³ − 3y − 1 has largest root 2 cos(π/9)
        let y = positive_cubic_root(-3.0, -1.0);
        assert_relative_eq!(y, 2.0 * (std::f64::consts::PI / 9.0).cos(), epsilon = 1e-14);
        // large positive p: y ≈ −q/p
        let y = positive_cubic_root(1e4, -1e-3);
        assert_relative_eq!((y * y + 1e4) * y, 1e-3, max_relative = 1e-14);
    }

    #[test]
    fn ohmic_root_satisfies_secular_equation() {
        for (eta, s, wc) in [
            (0.08, 5.5, 0.3),
            (0.6, 1.0, 2.0),
            (0.3, 0.5, 5.0),
            (0.08, 2.34, 50.0),
        ] {
            let m = SpectralModel::ohmic(eta, s, wc);
            let bs = solve_secular(&m, &std()).unwrap().unwrap();
            assert!(bs.energy <= 0.0);
            assert!(bs.residual <= 1e-9);
            let res = 1.0 - level_shift_integral(&m, bs.energy).unwrap() - bs.energy;
            assert!(res.abs() <= 1e-9, "{res}");
            assert!(bs.b > 0.0 && bs.b <= 1.0);
            assert_eq!(bs.p_infinity, asymptotic_population(&bs));
        }
    }

    #[test]
    fn ohmic_fig2a_operating_point() {
        let bs = solve_secular(&SpectralModel::ohmic(0.08, 5.5, 0.3), &std())
            .unwrap()
            .unwrap();
        assert!((bs.p_infinity - 0.33).abs() < 0.01, "{}", bs.p_infinity);
    }

    #[test]
    fn limit_mode_operating_point() {
        let bs = solve_secular(
            &SpectralModel::ohmic(0.08, 2.34, 1.0),
            &FrequencyConvention::limit(),
        )
        .unwrap()
        .unwrap();
        assert!((asymptotic_population(&bs) - 0.90).abs() < 0.01);
        assert_eq!(bs.kappa, Some(bs.energy));
    }

    #[test]
    fn energy_approaches_zero_at_threshold() {
        let (s, wc) = (5.5, 0.3);
        let threshold = 1.0 / (wc * gamma(s));
        let mut last = f64::NEG_INFINITY;
        for delta in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
            let bs = solve_secular(
                &SpectralModel::ohmic(threshold * (1.0 + delta), s, wc),
                &std(),
            )
            .unwrap()
            .unwrap();
            assert!(bs.energy < 0.0 && bs.energy > last);
            last = bs.energy;
        }
        assert!(last > -1e-4);
    }

    #[test]
    fn marginal_sub_ohmic_threshold_is_none() {
        // η_o Γ(1) = ω₀/ω_c puts the root exactly at E = 0 where ∫J/ω² diverges
        let m = SpectralModel::ohmic(0.5 / gamma(1.0), 1.0, 2.0);
        assert!(bound_state_exists(&m, &std()).unwrap());
        assert!(solve_secular(&m, &std()).unwrap().is_none());
    }

    #[test]
    fn energy_decreases_with_coupling() {
        let grid: Vec<f64> = (0..20).map(|i| 0.07 + 0.005 * i as f64).collect();
        let energies: Vec<f64> = grid
            .iter()
            .map(|&eta| {
                solve_secular(&SpectralModel::ohmic(eta, 5.5, 0.3), &std())
                    .unwrap()
                    .unwrap()
                    .energy
            })
            .collect();
        assert!(energies.windows(2).all(|w| w[1] < w[0]));
        let energies: Vec<f64> = grid
            .iter()
            .map(|&eta| {
                solve_secular(&SpectralModel::photonic(eta, 0.9), &std())
                    .unwrap()
                    .unwrap()
                    .energy
            })
            .collect();
        assert!(energies.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn decoupled_qubit_keeps_full_population() {
        let bs = solve_secular(&SpectralModel::ohmic(0.0, 2.0, 1.0), &std())
            .unwrap()
            .unwrap();
        assert_eq!(bs.b, 1.0);
        assert_eq!(asymptotic_population(&bs), 1.0);
    }
}

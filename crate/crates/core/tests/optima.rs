use nmdecay_core::boundstate::solve_secular;
use nmdecay_core::sweep::{maximize_quantity, Objective, Quantity, SweptParameter};
use nmdecay_core::{FrequencyConvention, SpectralModel};
use statrs::function::gamma::gamma;

fn ohmic_objective(
    base: SpectralModel,
    convention: FrequencyConvention,
    swept: SweptParameter,
) -> Objective {
    Objective {
        base,
        convention,
        swept,
        quantity: Quantity::PInfinity,
        input: None,
    }
}

fn verification_grid_max(objective: &Objective, lo: f64, hi: f64) -> f64 {
    (0..256)
        .map(|i| lo + (hi - lo) * i as f64 / 255.0)
        .map(|x| objective.evaluate(x).unwrap().quantity)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn coupling_optimum_dominates_verification_grid() {
    let objective = ohmic_objective(
        SpectralModel::ohmic(0.08, 5.5, 0.3),
        FrequencyConvention::standard(),
        SweptParameter::EtaO,
    );
    let lo = 1.0 / (0.3 * gamma(5.5));
    let m = maximize_quantity(&objective, lo, 0.12).unwrap();
    println!("{m:?}");
    assert!(m.max >= verification_grid_max(&objective, lo, 0.12) - 1e-6);
}

#[test]
fn exponent_optimum_dominates_verification_grid() {
    let objective = ohmic_objective(
        SpectralModel::ohmic(0.08, 2.0, 1.0),
        FrequencyConvention::limit(),
        SweptParameter::S,
    );
    let m = maximize_quantity(&objective, 0.5, 5.0).unwrap();
    println!("{m:?}");
    assert!(m.max >= verification_grid_max(&objective, 0.5, 5.0) - 1e-6);
}

/// Finite cutoffs approach the scaled limit from below as ω_c grows.
#[test]
fn finite_cutoffs_bracket_the_limit() {
    for s in [2.0, 2.5, 3.0] {
        let p = |omega_c: Option<f64>| {
            let (model, conv) = match omega_c {
                Some(wc) => (
                    SpectralModel::ohmic(0.08, s, wc),
                    FrequencyConvention::standard(),
                ),
                None => (
                    SpectralModel::ohmic(0.08, s, 1.0),
                    FrequencyConvention::limit(),
                ),
            };
            solve_secular(&model, &conv).unwrap().unwrap().p_infinity
        };
        let (p15, p50, pinf) = (p(Some(15.0)), p(Some(50.0)), p(None));
        println!("s = {s}: {p15} {p50} {pinf}");
        assert!(p15 < p50 && p50 < pinf);
    }
}

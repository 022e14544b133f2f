//! Two-qubit states under the local amplitude channel, Wootters concurrence
//! and quantum discord (closed form for pure inputs, brute-force oracle for
//! arbitrary states).
//!
//! Basis ordering is {|++⟩, |+−⟩, |−+⟩, |−−⟩}: index 2a + b with + ↦ 0.

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen, Vector2, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{AmplitudeTrajectory, Frame};
use crate::error::{Error, Result};

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const C1: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Eigenvalues of ρ below this are treated as outside its support.
const SUPPORT_TOL: f64 = 1e-13;

/// Coarse measurement grid of the discord oracle (polar × azimuthal).
pub const ORACLE_GRID: (usize, usize) = (64, 128);
/// Angular resolution of the oracle's local refinement, in radians.
pub const ORACLE_ANGLE_TOL: f64 = 1e-7;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Density matrix of qubits A and B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState(Matrix4<Complex64>);

impl TwoQubitState {
    pub fn new(rho: Matrix4<Complex64>) -> Result<Self> {
        let herm = (rho - rho.adjoint()).norm();
        if !(herm <= 1e-12) {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let trace = rho.trace();
        if (trace - C1).norm() > 1e-12 {
            return Err(Error::InvalidState(format!("trace {trace} is not 1")));
        }
        let min = rho.symmetric_eigenvalues().min();
        if min < -1e-10 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self(rho))
    }

    /// |ψ⟩⟨ψ| for a normalised four-component vector.
    pub fn pure(psi: &Vector4<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Self::new(psi * psi.adjoint())
    }

    /// (|+−⟩ + |−+⟩)/√2
    pub fn bell() -> Self {
        PureInput::bell().state()
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    /// ρ_A = tr_B ρ
    pub fn reduced_a(&self) -> Matrix2<Complex64> {
        Matrix2::from_fn(|a, a2| self.0[(2 * a, 2 * a2)] + self.0[(2 * a + 1, 2 * a2 + 1)])
    }

    /// ρ_B = tr_A ρ
    pub fn reduced_b(&self) -> Matrix2<Complex64> {
        Matrix2::from_fn(|b, b2| self.0[(b, b2)] + self.0[(2 + b, 2 + b2)])
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }
}

/// α|+, φ₊⟩ + β|−, φ₋⟩ with α, β ≥ 0, α² + β² = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureInput {
    pub alpha: f64,
    pub beta: f64,
    pub phi_plus: Vector2<Complex64>,
    pub phi_minus: Vector2<Complex64>,
}

impl PureInput {
    pub fn new(
        alpha: f64,
        beta: f64,
        phi_plus: Vector2<Complex64>,
        phi_minus: Vector2<Complex64>,
    ) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0) {
            return Err(Error::InvalidState(format!(
                "α = {alpha}, β = {beta} must be non-negative"
            )));
        }
        if (alpha * alpha + beta * beta - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState("α² + β² must equal 1".into()));
        }
        for (name, v) in [("φ₊", &phi_plus), ("φ₋", &phi_minus)] {
            if (v.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidState(format!("{name} is not normalised")));
            }
        }
        Ok(Self {
            alpha,
            beta,
            phi_plus,
            phi_minus,
        })
    }

    /// (|+−⟩ + |−+⟩)/√2: φ₊ = |−⟩, φ₋ = |+⟩.
    pub fn bell() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            alpha: h,
            beta: h,
            phi_plus: Vector2::new(C0, C1),
            phi_minus: Vector2::new(C1, C0),
        }
    }

    pub fn state_vector(&self) -> Vector4<Complex64> {
        let (p, m) = (&self.phi_plus, &self.phi_minus);
        Vector4::new(
            p[0] * self.alpha,
            p[1] * self.alpha,
            m[0] * self.beta,
            m[1] * self.beta,
        )
    }

    pub fn state(&self) -> TwoQubitState {
        let psi = self.state_vector();
        TwoQubitState(psi * psi.adjoint())
    }

    /// ⟨φ₊|φ₋⟩
    pub fn overlap(&self) -> Complex64 {
        self.phi_plus.dotc(&self.phi_minus)
    }

    /// C(0) = 2αβ |⟨φ₋|σ_y|φ₊*⟩|
    pub fn initial_concurrence(&self) -> f64 {
        let conj = self.phi_plus.map(|z| z.conj());
        let sy_conj = Vector2::new(-Complex64::i() * conj[1], Complex64::i() * conj[0]);
        2.0 * self.alpha * self.beta * self.phi_minus.dotc(&sy_conj).norm()
    }
}

/// Γ₁ = [[0, 0], [√(1−|c|²), 0]], Γ₂ = [[c, 0], [0, 1]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausPair {
    pub c: Complex64,
}

impl KrausPair {
    pub fn new(c: Complex64) -> Result<Self> {
        if !(c.norm() <= 1.0 + 1e-12) {
            return Err(Error::Domain(format!("|c| = {} exceeds 1", c.norm())));
        }
        Ok(Self { c })
    }

    /// c̄ = √(1 − |c|²)
    pub fn c_bar(&self) -> f64 {
        (1.0 - self.c.norm_sqr()).max(0.0).sqrt()
    }

    pub fn gamma1(&self) -> Matrix2<Complex64> {
        Matrix2::new(C0, C0, c(self.c_bar()), C0)
    }

    pub fn gamma2(&self) -> Matrix2<Complex64> {
        Matrix2::new(self.c, C0, C0, C1)
    }

    /// ‖Γ₁†Γ₁ + Γ₂†Γ₂ − I‖
    pub fn completeness_defect(&self) -> f64 {
        let (g1, g2) = (self.gamma1(), self.gamma2());
        (g1.adjoint() * g1 + g2.adjoint() * g2 - Matrix2::identity()).norm()
    }
}

/// Σᵢ (Γᵢ ⊗ I) ρ (Γᵢ ⊗ I)†
pub fn kraus_apply(amplitude: Complex64, rho0: &TwoQubitState) -> Result<TwoQubitState> {
    let pair = KrausPair::new(amplitude)?;
    let id = Matrix2::<Complex64>::identity();
    let out = [pair.gamma1(), pair.gamma2()]
        .iter()
        .map(|g| {
            let k = g.kronecker(&id);
            k * rho0.matrix() * k.adjoint()
        })
        .fold(Matrix4::zeros(), |acc, term| acc + term);
    Ok(TwoQubitState(out))
}

/// −x log₂ x − (1−x) log₂(1−x), continuous at the endpoints.
pub fn binary_entropy(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    term(x) + term(1.0 - x)
}

fn entropy_of(eigenvalues: impl IntoIterator<Item = f64>) -> f64 {
    eigenvalues
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

fn qubit_eigenvalues(m: &Matrix2<Complex64>) -> [f64; 2] {
    let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
    let half = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + m[(0, 1)].norm_sqr()).sqrt();
    [half + r, half - r]
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &TwoQubitState) -> f64 {
    entropy_of(rho.0.symmetric_eigenvalues().iter().copied())
}

fn qubit_entropy(m: &Matrix2<Complex64>) -> f64 {
    entropy_of(qubit_eigenvalues(m))
}

/// Wootters concurrence.
///
/// With ρ = SS† over the support of ρ, the λᵢ are the singular values of
/// Sᵀ(σ_y⊗σ_y)S. Working with singular values avoids the √(round-off)
/// contributions that eigenvalues of √ρ ρ̃ √ρ would give for rank-deficient ρ.
pub fn concurrence(rho: &TwoQubitState) -> f64 {
    let eig = SymmetricEigen::new(rho.0);
    let support: Vec<usize> = (0..4)
        .filter(|&i| eig.eigenvalues[i] > SUPPORT_TOL)
        .collect();
    if support.is_empty() {
        return 0.0;
    }
    let sy = Matrix2::new(C0, -Complex64::i(), Complex64::i(), C0);
    let yy = sy.kronecker(&sy);
    let cols: Vec<Vector4<Complex64>> = support
        .iter()
        .map(|&i| eig.eigenvectors.column(i) * c(eig.eigenvalues[i].sqrt()))
        .collect();
    let k = cols.len();
    let t = DMatrix::from_fn(k, k, |i, j| (cols[i].transpose() * yy * cols[j])[(0, 0)]);
    let mut sv: Vec<f64> = t.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let rest: f64 = sv[1..].iter().sum();
    (sv[0] - rest).max(0.0)
}

/// Closed-form discord Q = h(λ) + h(λ_A) − h(λ_AB) of the channel output for a
/// pure input; depends on c only through |c|.
pub fn discord_rank2(input: &PureInput, amplitude: Complex64) -> Result<f64> {
    let pair = KrausPair::new(amplitude)?;
    let modulus = amplitude.norm().min(1.0);
    let c_bar = pair.c_bar();
    let c_init = input.initial_concurrence();
    let lambda = 0.5 * (1.0 + (1.0 - c_bar * c_bar * c_init * c_init).max(0.0).sqrt());
    let overlap2 = input.overlap().norm_sqr();
    let (a2, b2) = (input.alpha * input.alpha, input.beta * input.beta);
    let lambda_a = |x: f64| {
        let x2 = x * x;
        0.5 + ((0.5 - a2 * x2).powi(2) + a2 * b2 * x2 * overlap2).sqrt()
    };
    let q = binary_entropy(lambda) + binary_entropy(lambda_a(modulus))
        - binary_entropy(lambda_a(c_bar));
    Ok(q.max(0.0))
}

/// Conditional entropy Σ p_k S(ρ_B^k) after a projective measurement on A
/// along Bloch direction (θ, φ).
fn conditional_entropy(rho: &Matrix4<Complex64>, theta: f64, phi: f64) -> f64 {
    let (ct, st) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let e = Complex64::from_polar(1.0, phi);
    let v = [c(ct), e * st];
    let w = [-e.conj() * st, c(ct)];
    [v, w]
        .iter()
        .map(|u| {
            let rb = Matrix2::from_fn(|b, b2| {
                let mut acc = C0;
                for a in 0..2 {
                    for a2 in 0..2 {
                        acc += u[a].conj() * rho[(2 * a + b, 2 * a2 + b2)] * u[a2];
                    }
                }
                acc
            });
            let p = rb.trace().re;
            if p > 1e-15 {
                p * qubit_entropy(&(rb / c(p)))
            } else {
                0.0
            }
        })
        .sum()
}

fn nelder_mead<F: Fn([f64; 2]) -> f64>(
    f: &F,
    start: [f64; 2],
    step: f64,
    xtol: f64,
) -> ([f64; 2], f64) {
    let mut simplex = [
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ];
    let mut values = simplex.map(f);
    for _ in 0..2000 {
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        let size = simplex[1..]
            .iter()
            .map(|p| {
                (p[0] - simplex[0][0])
                    .abs()
                    .max((p[1] - simplex[0][1]).abs())
            })
            .fold(0.0, f64::max);
        if size < xtol {
            break;
        }
        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };
        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] {
                along(-0.5)
            } else {
                along(0.5)
            };
            let fc = f(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        0.5 * (simplex[0][0] + simplex[i][0]),
                        0.5 * (simplex[0][1] + simplex[i][1]),
                    ];
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .unwrap_or(0);
    (simplex[best], values[best])
}

/// Discord with measurement on A, minimised by brute force over projective
/// measurements: a 64 × 128 grid in (θ, φ) followed by Nelder–Mead refinement
/// of the best grid points.
pub fn discord_oracle(rho: &TwoQubitState) -> f64 {
    let m = &rho.0;
    let (nt, np) = ORACLE_GRID;
    let dtheta = std::f64::consts::PI / (nt - 1) as f64;
    let dphi = 2.0 * std::f64::consts::PI / np as f64;
    let mut grid: Vec<(f64, f64, f64)> = (0..nt * np)
        .into_par_iter()
        .map(|k| {
            let (theta, phi) = ((k / np) as f64 * dtheta, (k % np) as f64 * dphi);
            (conditional_entropy(m, theta, phi), theta, phi)
        })
        .collect();
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));
    let objective = |x: [f64; 2]| conditional_entropy(m, x[0], x[1]);
    let best = grid
        .iter()
        .take(4)
        .map(|&(v, theta, phi)| {
            let (_, refined) =
                nelder_mead(&objective, [theta, phi], 0.5 * dtheta, ORACLE_ANGLE_TOL);
            refined.min(v)
        })
        .fold(f64::INFINITY, f64::min);
    let q = best + qubit_entropy(&rho.reduced_a()) - von_neumann_entropy(rho);
    q.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    pub t: f64,
    pub population: f64,
    pub concurrence: f64,
    pub discord: f64,
}

/// Closed-form concurrence |c|C(0) and discord at every node of `traj`.
pub fn correlation_series(
    input: &PureInput,
    traj: &AmplitudeTrajectory,
) -> Result<Vec<CorrelationPoint>> {
    let c_init = input.initial_concurrence();
    let lab = traj.in_frame(Frame::Lab);
    lab.amplitudes()
        .iter()
        .enumerate()
        .map(|(n, &amp)| {
            Ok(CorrelationPoint {
                t: lab.time(n),
                population: amp.norm_sqr(),
                concurrence: amp.norm().min(1.0) * c_init,
                discord: discord_rank2(input, amp)?,
            })
        })
        .collect()
}

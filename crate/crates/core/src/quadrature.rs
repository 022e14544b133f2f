//! Gauss–Legendre rules and a globally adaptive panel integrator.
//!
//! Each panel is integrated twice, once with a single 15-point rule and once
//! with the same rule on its two halves; the difference is the panel's error
//! estimate. The panel with the largest estimate is bisected until the total
//! estimate meets the requested tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the `n`-point rule by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(&self, f: &F, a: f64, b: f64) -> T {
        self.mapped(a, b)
            .fold(T::zero(), |acc, (x, w)| acc + f(x) * w)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 10-point rule, used for the per-step kernel moments.
pub fn gl10() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(10))
}

fn gl15() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(15))
}

/// Values the integrator can accumulate.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

const MAX_PANELS: usize = 20_000;

fn panel<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> Panel<T> {
    let rule = gl15();
    let mid = 0.5 * (a + b);
    let whole = rule.integrate(f, a, b);
    let halves = rule.integrate(f, a, mid) + rule.integrate(f, mid, b);
    Panel {
        a,
        b,
        value: halves,
        // the raw difference underestimates the error near endpoint singularities
        error: 3.0 * (whole - halves).magnitude(),
    }
}

/// Integrates `f` over consecutive breakpoints `points[0] < points[1] < ...`.
///
/// Integrable endpoint singularities are tolerated: bisection concentrates
/// panels towards them.
pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<Estimate<T>> {
    assert!(points.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(panel(&f, w[0], w[1]));
        }
    }
    let per_panel = 3 * gl15().len();
    let mut evaluations = heap.len() * per_panel;
    let totals = |heap: &BinaryHeap<Panel<T>>| {
        heap.iter()
            .fold((T::zero(), 0.0), |(v, e), p| (v + p.value, e + p.error))
    };
    let (mut value, mut error) = totals(&heap);
    loop {
        if error <= tol.abs.max(tol.rel * value.magnitude()) {
            // re-sum to shed drift from the running totals
            let (value, error) = totals(&heap);
            return Ok(Estimate {
                value,
                error,
                evaluations,
            });
        }
        let worst = heap.pop().expect("non-empty panel set");
        let mid = 0.5 * (worst.a + worst.b);
        if heap.len() >= MAX_PANELS || mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            let (value, error) = totals(&heap);
            // round-off floor
            if error <= 1e-14 * value.magnitude().max(tol.abs) {
                return Ok(Estimate {
                    value,
                    error,
                    evaluations,
                });
            }
            return Err(Error::Quadrature {
                value: value.magnitude(),
                error,
            });
        }
        let left = panel(&f, worst.a, mid);
        let right = panel(&f, mid, worst.b);
        value = value - worst.value + left.value + right.value;
        error = (error - worst.error + left.error + right.error).max(0.0);
        heap.push(left);
        heap.push(right);
        evaluations += 2 * per_panel;
    }
}

//! Energy, momenta, mass and their first variations on a [`PairState`].
//!
//! The gradient terms `(rho')^2` and `(v')^2` are integrated cell by cell
//! (see [`Grid::cell_dirichlet`]); every other term uses the trapezoid rule.
//! With that choice the discrete L^2 gradient at interior nodes is exactly
//! the pointwise Euler-Lagrange expression with the three-point `f''`.

use serde::{Deserialize, Serialize};

use crate::grid::{Grid, SampledField};
use crate::state::{ConstraintTargets, PairState};

/// Momentum weight `G(s) = s (2 - s)`.
pub fn g_weight(s: f64) -> f64 {
    s * (2.0 - s)
}

/// `G(|1 - rho|)`.
pub fn momentum_weight(rho: f64) -> f64 {
    g_weight((1.0 - rho).abs())
}

/// `d/drho G(|1 - rho|)`: `-2 rho` below one, `2 (2 - rho)` above.
/// At `rho = 1` the one-sided values differ; the weight itself vanishes there.
pub fn momentum_weight_derivative(rho: f64) -> f64 {
    if rho <= 1.0 {
        -2.0 * rho
    } else {
        2.0 * (2.0 - rho)
    }
}

pub fn momentum(s: &PairState) -> f64 {
    0.5 * s
        .rho()
        .zip_with(s.phi(), |r, p| momentum_weight(r) * p)
        .integrate()
}

/// `Q = 1/2 int (1 - rho^2) phi`; equal to [`momentum`] whenever `rho <= 1`.
pub fn classical_momentum(s: &PairState) -> f64 {
    0.5 * s
        .rho()
        .zip_with(s.phi(), |r, p| (1.0 - r * r) * p)
        .integrate()
}

pub fn mass(s: &PairState) -> f64 {
    s.v().map(|v| v * v).integrate()
}

/// Local (non-derivative) part of the energy density.
fn local_density(r: f64, p: f64, v: f64, alpha: f64, beta: f64) -> f64 {
    let s = 1.0 - r * r;
    0.25 * s * s + 0.5 * r * r * p * p + 0.25 * beta * v.powi(4) - 0.5 * alpha * s * v * v
}

pub fn energy(s: &PairState, t: &ConstraintTargets) -> f64 {
    let g = s.grid();
    let (rho, phi, v) = (s.rho().values(), s.phi().values(), s.v().values());
    let local: Vec<f64> = (0..g.n_points())
        .map(|i| local_density(rho[i], phi[i], v[i], t.alpha, t.beta))
        .collect();
    0.5 * s.rho().dirichlet() + 0.5 * s.v().dirichlet() + g.integrate_values(&local)
}

/// Discrete L^2 gradients `(dE/drho, dE/dphi, dE/dv)` with zero boundary rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGradient {
    pub rho: SampledField,
    pub phi: SampledField,
    pub v: SampledField,
}

pub fn energy_gradient(s: &PairState, t: &ConstraintTargets) -> EnergyGradient {
    let g = s.grid();
    let n = g.n_points();
    let rho_xx = s.rho().second_derivative();
    let v_xx = s.v().second_derivative();
    let (rho, phi, v) = (s.rho().values(), s.phi().values(), s.v().values());
    let mut gr = vec![0.0; n];
    let mut gp = vec![0.0; n];
    let mut gv = vec![0.0; n];
    for i in 1..n - 1 {
        let (r, p, w) = (rho[i], phi[i], v[i]);
        gr[i] = -rho_xx[i] + r * (r * r - 1.0) + r * p * p + t.alpha * r * w * w;
        gp[i] = r * r * p;
        gv[i] = -v_xx[i] + t.beta * w * w * w - t.alpha * (1.0 - r * r) * w;
    }
    EnergyGradient {
        rho: SampledField::from_raw(*g, gr),
        phi: SampledField::from_raw(*g, gp),
        v: SampledField::from_raw(*g, gv),
    }
}

/// L^2 gradient of the momentum with respect to `rho` at fixed `phi`.
pub fn momentum_gradient_rho(s: &PairState) -> SampledField {
    let n = s.grid().n_points();
    let mut vals: Vec<f64> = s
        .rho()
        .values()
        .iter()
        .zip(s.phi().values())
        .map(|(&r, &p)| 0.5 * momentum_weight_derivative(r) * p)
        .collect();
    vals[0] = 0.0;
    vals[n - 1] = 0.0;
    SampledField::from_raw(*s.grid(), vals)
}

/// Weighted-norm sum bounded along minimizing sequences, and its bound
/// `4 sqrt(2) q + 2 alpha m`.
pub fn coercivity_check(s: &PairState, t: &ConstraintTargets) -> (f64, f64) {
    let g: &Grid = s.grid();
    let (rho, phi, v) = (s.rho().values(), s.phi().values(), s.v().values());
    let local: Vec<f64> = (0..g.n_points())
        .map(|i| {
            let sq = 1.0 - rho[i] * rho[i];
            sq * sq + 2.0 * (rho[i] * phi[i]).powi(2) + t.beta * v[i].powi(4)
        })
        .collect();
    let lhs = 2.0 * s.rho().dirichlet() + 2.0 * s.v().dirichlet() + g.integrate_values(&local);
    let rhs = 4.0 * std::f64::consts::SQRT_2 * t.q + 2.0 * t.alpha * t.m;
    (lhs, rhs)
}

/// All scalar diagnostics of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub energy: f64,
    pub momentum: f64,
    pub classical_momentum: f64,
    pub mass: f64,
    pub coercivity_lhs: f64,
    pub coercivity_rhs: f64,
    pub momentum_residual: f64,
    pub mass_residual: f64,
}

impl FunctionalReport {
    pub fn evaluate(s: &PairState, t: &ConstraintTargets) -> Self {
        let p = momentum(s);
        let m = mass(s);
        let (lhs, rhs) = coercivity_check(s, t);
        Self {
            energy: energy(s, t),
            momentum: p,
            classical_momentum: classical_momentum(s),
            mass: m,
            coercivity_lhs: lhs,
            coercivity_rhs: rhs,
            momentum_residual: (p - t.q).abs(),
            mass_residual: (m - t.m).abs(),
        }
    }
}

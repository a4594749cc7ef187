//! Constrained minimization of the energy at fixed momentum and mass.
//!
//! The phase gradient is eliminated in closed form at every iterate
//! ([`phase_optimum`]), which leaves a reduced energy in `(rho, v)`:
//!
//! ```text
//! E_red = int [ (rho')^2/2 + (1-rho^2)^2/4 + (v')^2/2 + beta v^4/4 - alpha (1-rho^2) v^2 / 2 ]
//!       + 2 q^2 / I(rho),        I(rho) = int G(|1-rho|)^2 / rho^2
//! ```
//!
//! Descent is H^1-preconditioned (`(1 - d^2/dx^2)^{-1}` applied to the L^2
//! gradient) with Barzilai-Borwein trial steps and Armijo backtracking. The
//! mass is restored after every step by rescaling `v`.

use std::f64::consts::SQRT_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    energy, energy_gradient, mass, momentum, momentum_gradient_rho, momentum_weight,
    momentum_weight_derivative,
};
use crate::grid::{pairwise_sum, Grid, SampledField};
use crate::rearrange::symmetrize;
use crate::scalar_ref::{build_scalar, speed_of_momentum};
use crate::state::{clamp_rho, ConstraintTargets, PairState, StateJson, NU_FLOOR};
use crate::tws;

const SQRT8_OVER_3: f64 = 0.942_809_041_582_063_4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeConfig {
    pub targets: ConstraintTargets,
    pub grid: Grid,
    pub max_iters: usize,
    /// Tolerance on the L^2 norm of the constraint-projected gradient.
    pub grad_tol: f64,
    pub step_init: f64,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
    /// Symmetrization cadence; 0 disables it.
    pub symmetrize_every: usize,
    pub seed: u64,
}

impl MinimizeConfig {
    pub fn new(targets: ConstraintTargets, grid: Grid) -> Self {
        Self {
            targets,
            grid,
            max_iters: 200_000,
            grad_tol: 1e-8,
            step_init: 1.0,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
            symmetrize_every: 25,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.targets.check_solvable()?;
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.max_iters < 1 {
            return bad("max_iters must be >= 1");
        }
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol must be positive");
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return bad("step_init must be positive");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub p_residual: f64,
    pub mass_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    /// Speed, from pairing the energy gradient with the modulus direction `(1 - rho^2)/rho`.
    pub c: f64,
    /// Chemical potential of the traveling-wave system; `None` without mass.
    pub lambda: Option<f64>,
    /// `4 q / int (1 - rho^2)^2 / rho^2`.
    pub c_crosscheck: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub state: PairState,
    pub targets: ConstraintTargets,
    pub multiplier_c: f64,
    pub multiplier_lambda: Option<f64>,
    pub multiplier_c_crosscheck: f64,
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub momentum_residual: f64,
    pub mass_residual: f64,
    pub h1_holds: bool,
    pub h2_holds: bool,
    pub bounds_ok: bool,
    pub first_integral_residual: f64,
    pub ode_residual: f64,
    pub trace: Vec<TraceRow>,
}

/// Scalar part of a [`SolveResult`], optionally with profiles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveSummary {
    pub q: f64,
    pub m: f64,
    pub alpha: f64,
    pub beta: f64,
    pub energy: f64,
    pub c: f64,
    pub lambda: Option<f64>,
    pub c_crosscheck: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub momentum_residual: f64,
    pub mass_residual: f64,
    pub h1: bool,
    pub h2: bool,
    pub bounds_ok: bool,
    pub first_integral_residual: f64,
    pub ode_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub profiles: Option<StateJson>,
}

impl SolveResult {
    pub fn summary(&self, with_profiles: bool) -> SolveSummary {
        SolveSummary {
            q: self.targets.q,
            m: self.targets.m,
            alpha: self.targets.alpha,
            beta: self.targets.beta,
            energy: self.energy,
            c: self.multiplier_c,
            lambda: self.multiplier_lambda,
            c_crosscheck: self.multiplier_c_crosscheck,
            grad_norm: self.grad_norm,
            iterations: self.iterations,
            converged: self.converged,
            momentum_residual: self.momentum_residual,
            mass_residual: self.mass_residual,
            h1: self.h1_holds,
            h2: self.h2_holds,
            bounds_ok: self.bounds_ok,
            first_integral_residual: self.first_integral_residual,
            ode_residual: self.ode_residual,
            profiles: with_profiles.then(|| StateJson::from(&self.state)),
        }
    }

    pub fn to_json(&self, with_profiles: bool) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary(with_profiles))?)
    }

    /// Rows `iter,E,grad_norm,p_residual,mass_residual`.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "iter,E,grad_norm,p_residual,mass_residual")?;
        for r in &self.trace {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.iter, r.energy, r.grad_norm, r.p_residual, r.mass_residual
            )?;
        }
        Ok(())
    }
}

/// `G(|1-rho|)^2 / rho^2` and its derivative in `rho`.
fn phase_weight(r: f64) -> (f64, f64) {
    let gw = momentum_weight(r);
    let dg = momentum_weight_derivative(r);
    (
        gw * gw / (r * r),
        2.0 * gw * dg / (r * r) - 2.0 * gw * gw / (r * r * r),
    )
}

/// Phase gradient minimizing `1/2 int rho^2 phi^2` subject to `p = q` at fixed
/// `rho`: `phi = mu G(|1-rho|) / rho^2` with `mu = 2 q / I`. Returns `phi`
/// and the minimal kinetic term `2 q^2 / I`.
pub fn phase_optimum(rho: &SampledField, q: f64) -> Result<(SampledField, f64)> {
    let weight = rho.map(|r| phase_weight(r).0);
    let i_int = weight.integrate();
    if q == 0.0 {
        return Ok((rho.grid().zeros(), 0.0));
    }
    if !(i_int > 1e-14) {
        return Err(Error::FlatModulus(i_int));
    }
    let mu = 2.0 * q / i_int;
    let phi = rho.map(|r| mu * momentum_weight(r) / (r * r));
    Ok((phi, 2.0 * q * q / i_int))
}

/// Lagrange multipliers of a near-critical state.
pub fn extract_multipliers(s: &PairState, t: &ConstraintTargets) -> Result<Multipliers> {
    let g = s.grid();
    let n = g.n_points();
    let grad = energy_gradient(s, t);
    let dp = momentum_gradient_rho(s);
    let rho = s.rho().values();
    let mut num = vec![0.0; n];
    let mut den = vec![0.0; n];
    for i in 1..n - 1 {
        let r = rho[i];
        // Nodes pinned at the clamp are not free to move along w.
        if r <= NU_FLOOR * (1.0 + 1e-9) || r >= 2.0 - NU_FLOOR * (1.0 + 1e-9) {
            continue;
        }
        let w = (1.0 - r * r) / r;
        num[i] = grad.rho[i] * w;
        den[i] = dp[i] * w;
    }
    let num = g.integrate_values(&num);
    let den = g.integrate_values(&den);
    if !(den.abs() > 1e-14) {
        return Err(Error::VanishingPairing(den));
    }
    let c = num / den;

    let m = mass(s);
    let lambda = if m > 1e-14 {
        let v_xx = s.v().second_derivative();
        let dens: Vec<f64> = (0..n)
            .map(|i| {
                let (r, v) = (rho[i], s.v()[i]);
                v * (-v_xx[i] + t.beta * v * v * v + t.alpha * r * r * v)
            })
            .collect();
        Some(g.integrate_values(&dens) / m)
    } else {
        None
    };

    let q = momentum(s);
    let denom = s.rho().map(|r| (1.0 - r * r).powi(2) / (r * r)).integrate();
    let c_crosscheck = 4.0 * q / denom;
    Ok(Multipliers {
        c,
        lambda,
        c_crosscheck,
    })
}

/// Same as [`extract_multipliers`] but errors when the mass vanishes.
pub fn extract_multipliers_strict(s: &PairState, t: &ConstraintTargets) -> Result<Multipliers> {
    let mu = extract_multipliers(s, t)?;
    if mu.lambda.is_none() {
        return Err(Error::VanishingMass(mass(s)));
    }
    Ok(mu)
}

/// Existence conditions evaluated literally: `(H1, H2)`.
pub fn check_hypotheses(e_min: f64, t: &ConstraintTargets) -> (bool, bool) {
    let a2 = t.alpha * t.alpha;
    let h1 = a2 < t.beta && e_min < (1.0 - a2 / t.beta) * SQRT8_OVER_3;
    let h2 = e_min + 0.5 * t.alpha * t.m < SQRT8_OVER_3;
    (h1, h2)
}

/// Multiplier bounds `0 < c < sqrt 2` and, with mass,
/// `alpha c^2 / 2 < lambda < 2 alpha + sqrt(32) q / m`.
pub fn multiplier_bounds_hold(c: f64, lambda: Option<f64>, t: &ConstraintTargets) -> bool {
    let speed_ok = c > 0.0 && c < SQRT_2;
    match lambda {
        Some(l) if t.m > 0.0 => speed_ok && 0.5 * t.alpha * c * c < l && l < lambda_upper_bound(t),
        _ => speed_ok,
    }
}

pub fn lambda_upper_bound(t: &ConstraintTargets) -> f64 {
    2.0 * t.alpha + 32f64.sqrt() * t.q / t.m
}

/// Default starting point: the scalar soliton carrying momentum `q` and a
/// `sech` bump of mass `m`.
pub fn default_initial_state(t: &ConstraintTargets, g: &Grid) -> Result<PairState> {
    let c = speed_of_momentum(t.q, g)?;
    let sol = build_scalar(c, g)?;
    let v = if t.m > 0.0 {
        let v = g.sample(|x| (t.m / 2.0).sqrt() / x.cosh());
        rescale_to_mass(&v, t.m)
    } else {
        g.zeros()
    };
    Ok(PairState::new(sol.rho, sol.phi, v)?.pinned())
}

fn rescale_to_mass(v: &SampledField, m: f64) -> SampledField {
    let cur = v.map(|x| x * x).integrate();
    if cur > 0.0 {
        let k = (m / cur).sqrt();
        v.map(|x| k * x)
    } else {
        v.clone()
    }
}

/// Reduced energy evaluator on raw node vectors.
struct Reduced<'a> {
    grid: &'a Grid,
    t: &'a ConstraintTargets,
}

struct Eval {
    energy: f64,
    phase_int: f64,
    g_rho: Vec<f64>,
    g_v: Vec<f64>,
}

impl Reduced<'_> {
    fn phase_integral(&self, rho: &[f64]) -> f64 {
        let w: Vec<f64> = rho.iter().map(|&r| phase_weight(r).0).collect();
        self.grid.integrate_values(&w)
    }

    fn kinetic(&self, phase_int: f64) -> f64 {
        if self.t.q == 0.0 {
            0.0
        } else {
            2.0 * self.t.q * self.t.q / phase_int
        }
    }

    fn evaluate(&self, rho: &[f64], v: &[f64]) -> Eval {
        let g = self.grid;
        let t = self.t;
        let n = g.n_points();
        let h2 = g.spacing().powi(2);
        let local: Vec<f64> = (0..n)
            .map(|i| {
                let s = 1.0 - rho[i] * rho[i];
                let w = v[i];
                0.25 * s * s + 0.25 * t.beta * w.powi(4) - 0.5 * t.alpha * s * w * w
            })
            .collect();
        let phase_int = self.phase_integral(rho);
        let energy = 0.5 * g.cell_dirichlet(rho)
            + 0.5 * g.cell_dirichlet(v)
            + g.integrate_values(&local)
            + self.kinetic(phase_int);
        let kin_coeff = if t.q == 0.0 {
            0.0
        } else {
            2.0 * t.q * t.q / (phase_int * phase_int)
        };
        let mut g_rho = vec![0.0; n];
        let mut g_v = vec![0.0; n];
        for i in 1..n - 1 {
            let (r, w) = (rho[i], v[i]);
            let r_xx = (rho[i + 1] - 2.0 * r + rho[i - 1]) / h2;
            let v_xx = (v[i + 1] - 2.0 * w + v[i - 1]) / h2;
            g_rho[i] =
                -r_xx + r * (r * r - 1.0) + t.alpha * r * w * w - kin_coeff * phase_weight(r).1;
            g_v[i] = -v_xx + t.beta * w * w * w - t.alpha * (1.0 - r * r) * w;
        }
        Eval {
            energy,
            phase_int,
            g_rho,
            g_v,
        }
    }

    /// `E_red(new) - E_red(old)` assembled from factored per-node differences,
    /// so that decreases far below the rounding level of `E` itself stay
    /// measurable.
    fn delta(&self, old: (&[f64], &[f64], f64), new: (&[f64], &[f64], f64)) -> f64 {
        let g = self.grid;
        let t = self.t;
        let h = g.spacing();
        let (ro, vo, io) = old;
        let (rn, vn, i_new) = new;
        let n = g.n_points();
        let cells = |a: &[f64], b: &[f64]| -> f64 {
            let terms: Vec<f64> = (0..n - 1)
                .map(|i| {
                    let d_old = a[i + 1] - a[i];
                    let dd = (b[i + 1] - a[i + 1]) - (b[i] - a[i]);
                    dd * (2.0 * d_old + dd)
                })
                .collect();
            0.5 * pairwise_sum(&terms) / h
        };
        let mut local = vec![0.0; n];
        let mut dphase = vec![0.0; n];
        for i in 0..n {
            let dr = rn[i] - ro[i];
            let dv = vn[i] - vo[i];
            if dr == 0.0 && dv == 0.0 {
                continue;
            }
            let so = 1.0 - ro[i] * ro[i];
            let sn = 1.0 - rn[i] * rn[i];
            let ds = -dr * (rn[i] + ro[i]);
            let dv2 = dv * (vn[i] + vo[i]);
            let v2n = vn[i] * vn[i];
            let v2o = vo[i] * vo[i];
            local[i] = 0.25 * ds * (sn + so) + 0.25 * t.beta * dv2 * (v2n + v2o)
                - 0.5 * t.alpha * (ds * v2n + so * dv2);
            if dr != 0.0 {
                dphase[i] = phase_weight_delta(ro[i], rn[i]);
            }
        }
        let mut total = cells(ro, rn) + cells(vo, vn) + g.integrate_values(&local);
        if t.q != 0.0 {
            let di = g.integrate_values(&dphase);
            total += -2.0 * t.q * t.q * di / (i_new * io);
        }
        total
    }
}

/// `F(new) - F(old)` for `F = (G(|1-rho|)/rho)^2`, factored as `(A_n - A_o)(A_n + A_o)`.
fn phase_weight_delta(ro: f64, rn: f64) -> f64 {
    let a = |r: f64| momentum_weight(r) / r;
    let (a_o, a_n) = (a(ro), a(rn));
    let d = rn - ro;
    let da = if ro <= 1.0 && rn <= 1.0 {
        -d * (1.0 / (rn * ro) + 1.0)
    } else if ro > 1.0 && rn > 1.0 {
        d * (3.0 / (rn * ro) - 1.0)
    } else {
        a_n - a_o
    };
    da * (a_n + a_o)
}

/// Solves `(1 - d^2/dx^2) y = b` on interior nodes with zero boundary values.
fn precondition(b: &[f64], h: f64) -> Vec<f64> {
    let n = b.len();
    let m = n - 2;
    let off = -1.0 / (h * h);
    let diag = 1.0 + 2.0 / (h * h);
    let mut cp = vec![0.0; m];
    let mut dp = vec![0.0; m];
    cp[0] = off / diag;
    dp[0] = b[1] / diag;
    for k in 1..m {
        let den = diag - off * cp[k - 1];
        cp[k] = off / den;
        dp[k] = (b[k + 1] - off * dp[k - 1]) / den;
    }
    let mut y = vec![0.0; n];
    y[m] = dp[m - 1];
    for k in (0..m - 1).rev() {
        y[k + 1] = dp[k] - cp[k] * y[k + 2];
    }
    y
}

/// `(1 - d^2/dx^2) x` on interior nodes.
fn apply_metric(x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let mut y = vec![0.0; n];
    for i in 1..n - 1 {
        y[i] = x[i] - (x[i + 1] - 2.0 * x[i] + x[i - 1]) / (h * h);
    }
    y
}

fn dot(g: &Grid, a: &[f64], b: &[f64]) -> f64 {
    let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    g.integrate_values(&p)
}

fn at_lower_clamp(r: f64) -> bool {
    r <= NU_FLOOR
}

fn at_upper_clamp(r: f64) -> bool {
    r >= 2.0 - NU_FLOOR
}

/// Constrained descent from `init` (or the default starting point).
pub fn minimize(cfg: &MinimizeConfig, init: Option<&PairState>) -> Result<SolveResult> {
    cfg.validate()?;
    let t = cfg.targets;
    let g = cfg.grid;
    let n = g.n_points();
    let h = g.spacing();
    let scalar = t.is_scalar();

    let start = match init {
        Some(s) => {
            if s.grid() != &g {
                return Err(Error::Config(
                    "initial state grid differs from config grid".into(),
                ));
            }
            s.pinned()
        }
        None => default_initial_state(&t, &g)?,
    };
    let mut rho = start.rho().values().to_vec();
    let mut v = if scalar {
        vec![0.0; n]
    } else {
        let v = rescale_to_mass(start.v(), t.m);
        if mass_of(&g, v.values()) == 0.0 {
            return Err(Error::Config("initial v vanishes but m > 0".into()));
        }
        v.into_values()
    };

    let red = Reduced { grid: &g, t: &t };
    let mut cur = red.evaluate(&rho, &v);
    let mut trace = Vec::new();
    let mut step = cfg.step_init;
    // Previous (rho, v, g_rho, g_v) for the Barzilai-Borwein step.
    let mut prev: Option<[Vec<f64>; 4]> = None;
    let mut converged = false;
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;

    for iter in 0..cfg.max_iters {
        iterations = iter;
        if cfg.symmetrize_every > 0 && iter > 0 && iter % cfg.symmetrize_every == 0 {
            if let Some((r2, v2)) = try_symmetrize(&g, &t, &rho, &v) {
                let e2 = red.evaluate(&r2, &v2);
                if e2.energy <= cur.energy + 1e-12
                    && red.delta((&rho, &v, cur.phase_int), (&r2, &v2, e2.phase_int)) <= 1e-12
                {
                    let moved = r2 != rho || v2 != v;
                    rho = r2;
                    v = v2;
                    cur = e2;
                    if moved {
                        prev = None;
                    }
                }
            }
        }

        // Projected gradient: drop clamped nodes pushing outward and the
        // mass-normal part of the v gradient.
        let mut g_rho = cur.g_rho.clone();
        for i in 1..n - 1 {
            if (at_lower_clamp(rho[i]) && g_rho[i] > 0.0)
                || (at_upper_clamp(rho[i]) && g_rho[i] < 0.0)
            {
                g_rho[i] = 0.0;
            }
        }
        let g_v: Vec<f64> = if scalar {
            vec![0.0; n]
        } else {
            let lam = dot(&g, &cur.g_v, &v) / dot(&g, &v, &v);
            cur.g_v.iter().zip(&v).map(|(a, b)| a - lam * b).collect()
        };
        grad_norm = (dot(&g, &g_rho, &g_rho) + dot(&g, &g_v, &g_v)).sqrt();
        trace.push(TraceRow {
            iter,
            energy: cur.energy,
            grad_norm,
            p_residual: momentum_residual_of(&g, &t, &rho, cur.phase_int),
            mass_residual: if scalar {
                0.0
            } else {
                (mass_of(&g, &v) - t.m).abs()
            },
        });
        if grad_norm <= cfg.grad_tol {
            converged = true;
            break;
        }

        let d_rho = precondition(&g_rho, h);
        let d_v = if scalar {
            vec![0.0; n]
        } else {
            let pg = precondition(&g_v, h);
            let pv = precondition(&v, h);
            let tau = dot(&g, &v, &pg) / dot(&g, &v, &pv);
            pg.iter().zip(&pv).map(|(a, b)| a - tau * b).collect()
        };
        let slope = dot(&g, &g_rho, &d_rho) + if scalar { 0.0 } else { dot(&g, &g_v, &d_v) };
        if !(slope > 0.0) {
            break;
        }

        if let Some([pr, pv, pgr, pgv]) = &prev {
            let sr: Vec<f64> = rho.iter().zip(pr).map(|(a, b)| a - b).collect();
            let sv: Vec<f64> = v.iter().zip(pv).map(|(a, b)| a - b).collect();
            let yr: Vec<f64> = cur.g_rho.iter().zip(pgr).map(|(a, b)| a - b).collect();
            let yv: Vec<f64> = cur.g_v.iter().zip(pgv).map(|(a, b)| a - b).collect();
            let num = dot(&g, &sr, &apply_metric(&sr, h)) + dot(&g, &sv, &apply_metric(&sv, h));
            let den = dot(&g, &sr, &yr) + dot(&g, &sv, &yv);
            step = if den > 0.0 && num > 0.0 {
                (num / den).clamp(1e-8, 1e4)
            } else {
                (2.0 * step).min(1e4)
            };
        }

        let mut accepted = false;
        let mut s = step;
        let mut r_new = vec![0.0; n];
        let mut v_new = vec![0.0; n];
        for _ in 0..200 {
            for i in 0..n {
                r_new[i] = if i == 0 || i == n - 1 {
                    1.0
                } else {
                    clamp_rho(rho[i] - s * d_rho[i])
                };
            }
            if !scalar {
                for i in 0..n {
                    v_new[i] = if i == 0 || i == n - 1 {
                        0.0
                    } else {
                        v[i] - s * d_v[i]
                    };
                }
                let k = (t.m / mass_of(&g, &v_new)).sqrt();
                for x in v_new.iter_mut() {
                    *x *= k;
                }
            }
            let i_new = red.phase_integral(&r_new);
            let de = red.delta((&rho, &v, cur.phase_int), (&r_new, &v_new, i_new));
            if de <= -cfg.armijo_c * s * slope {
                accepted = true;
                break;
            }
            s *= cfg.backtrack_factor;
            if s < 1e-18 {
                break;
            }
        }
        if !accepted {
            break;
        }
        step = s;
        let next = red.evaluate(&r_new, &v_new);
        let old_rho = std::mem::replace(&mut rho, r_new);
        let old_v = std::mem::replace(&mut v, v_new);
        let old = std::mem::replace(&mut cur, next);
        prev = Some([old_rho, old_v, old.g_rho, old.g_v]);
        iterations = iter + 1;
    }

    finish(cfg, &g, rho, v, grad_norm, iterations, converged, trace)
}

/// `|p - q|` for the phase-optimal `phi` of `rho`.
fn momentum_residual_of(g: &Grid, t: &ConstraintTargets, rho: &[f64], phase_int: f64) -> f64 {
    if t.q == 0.0 {
        return 0.0;
    }
    let mu = 2.0 * t.q / phase_int;
    let dens: Vec<f64> = rho
        .iter()
        .map(|&r| {
            let gw = momentum_weight(r);
            gw * (mu * gw / (r * r))
        })
        .collect();
    (0.5 * g.integrate_values(&dens) - t.q).abs()
}

fn mass_of(g: &Grid, v: &[f64]) -> f64 {
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    g.integrate_values(&sq)
}

fn try_symmetrize(
    g: &Grid,
    t: &ConstraintTargets,
    rho: &[f64],
    v: &[f64],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let rho_f = SampledField::new(*g, rho.to_vec()).ok()?;
    let (phi, _) = phase_optimum(&rho_f, t.q).ok()?;
    let s = PairState::new(rho_f, phi, SampledField::new(*g, v.to_vec()).ok()?).ok()?;
    let (sym, _) = symmetrize(&s).ok()?;
    let (r, _, vv) = sym.pinned().into_parts();
    Some((r.into_values(), vv.into_values()))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    cfg: &MinimizeConfig,
    g: &Grid,
    rho: Vec<f64>,
    v: Vec<f64>,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<TraceRow>,
) -> Result<SolveResult> {
    let t = cfg.targets;
    let rho = SampledField::new(*g, rho)?;
    let (phi, _) = phase_optimum(&rho, t.q)?;
    let state = PairState::new(rho, phi, SampledField::new(*g, v)?)?;
    let e = energy(&state, &t);
    let mu = extract_multipliers(&state, &t)?;
    let (h1, h2) = check_hypotheses(e, &t);
    let lambda = mu.lambda.unwrap_or(0.0);
    let (_, _, ode) = tws::ode_residual(&state, mu.c, lambda, &t);
    let fi = tws::first_integral_residual(&state, mu.c, lambda, &t).max_abs_interior();
    let p_res = (momentum(&state) - t.q).abs();
    Ok(SolveResult {
        multiplier_c: mu.c,
        multiplier_lambda: mu.lambda,
        multiplier_c_crosscheck: mu.c_crosscheck,
        energy: e,
        grad_norm,
        iterations,
        converged,
        momentum_residual: p_res,
        mass_residual: (mass(&state) - t.m).abs(),
        h1_holds: h1,
        h2_holds: h2,
        bounds_ok: multiplier_bounds_hold(mu.c, mu.lambda, &t),
        first_integral_residual: fi,
        ode_residual: ode,
        targets: t,
        state,
        trace,
    })
}

//! Traveling-wave checks on lifted profiles.
//!
//! With `theta' = c (1 - rho^2) / (2 rho^2)` the pair solves
//!
//! ```text
//! -rho'' + c^2 (1 - rho^4) / (4 rho^3) = (1 - rho^2 - alpha v^2) rho
//! -v''                                 = (lambda - alpha rho^2 - beta v^2) v
//! ```
//!
//! and even solutions decaying at infinity satisfy the first integral
//! `(rho')^2 + (v')^2 = (1 - c^2/(2 rho^2)) (1 - rho^2)^2 / 2 + (beta v^2 / 2 + alpha rho^2 - lambda) v^2`.

use std::f64::consts::SQRT_2;
use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledField};
use crate::state::{ConstraintTargets, PairState};

fn rho_rhs(r: f64, v: f64, c: f64, t: &ConstraintTargets) -> f64 {
    // rho'' = c^2 (1 - rho^4)/(4 rho^3) - (1 - rho^2 - alpha v^2) rho
    c * c * (1.0 - r.powi(4)) / (4.0 * r.powi(3)) - (1.0 - r * r - t.alpha * v * v) * r
}

fn v_rhs(r: f64, v: f64, lambda: f64, t: &ConstraintTargets) -> f64 {
    (t.alpha * r * r + t.beta * v * v - lambda) * v
}

/// Pointwise residuals of both equations at interior nodes (zero at the
/// boundary) and their combined L^2 norm.
pub fn ode_residual(
    s: &PairState,
    c: f64,
    lambda: f64,
    t: &ConstraintTargets,
) -> (SampledField, SampledField, f64) {
    let g = s.grid();
    let n = g.n_points();
    let r_xx = s.rho().second_derivative();
    let v_xx = s.v().second_derivative();
    let mut rr = vec![0.0; n];
    let mut rv = vec![0.0; n];
    for i in 1..n - 1 {
        let (r, v) = (s.rho()[i], s.v()[i]);
        rr[i] = r_xx[i] - rho_rhs(r, v, c, t);
        rv[i] = v_xx[i] - v_rhs(r, v, lambda, t);
    }
    let rr = SampledField::new(*g, rr).unwrap_or_else(|_| g.constant(f64::MAX));
    let rv = SampledField::new(*g, rv).unwrap_or_else(|_| g.constant(f64::MAX));
    let norm = (rr.map(|x| x * x).integrate() + rv.map(|x| x * x).integrate()).sqrt();
    (rr, rv, norm)
}

/// Left side minus right side of the first integral, with central
/// derivatives; zero at the two boundary nodes.
pub fn first_integral_residual(
    s: &PairState,
    c: f64,
    lambda: f64,
    t: &ConstraintTargets,
) -> SampledField {
    let g = s.grid();
    let n = g.n_points();
    let dr = s.rho().derivative();
    let dv = s.v().derivative();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let (r, v) = (s.rho()[i], s.v()[i]);
        let lhs = dr[i] * dr[i] + dv[i] * dv[i];
        let sq = 1.0 - r * r;
        let rhs = (1.0 - c * c / (2.0 * r * r)) * sq * sq / 2.0
            + (0.5 * t.beta * v * v + t.alpha * r * r - lambda) * v * v;
        out[i] = lhs - rhs;
    }
    SampledField::new(*g, out).unwrap_or_else(|_| g.constant(f64::MAX))
}

/// Writes `x,r_rho,r_v,first_integral` rows.
pub fn write_residual_csv<W: Write>(
    mut w: W,
    s: &PairState,
    c: f64,
    lambda: f64,
    t: &ConstraintTargets,
) -> Result<()> {
    let (rr, rv, _) = ode_residual(s, c, lambda, t);
    let fi = first_integral_residual(s, c, lambda, t);
    writeln!(w, "x,r_rho,r_v,first_integral")?;
    for i in 0..s.grid().n_points() {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            s.grid().x(i),
            rr[i],
            rv[i],
            fi[i]
        )?;
    }
    Ok(())
}

/// Even profile obtained by integrating the traveling-wave system from the
/// origin. Arrays cover the nodes `x >= 0` reached before any blow-up.
#[derive(Debug, Clone, PartialEq)]
pub struct Shot {
    pub grid: Grid,
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    /// First coordinate where the trajectory left the admissible region.
    pub blow_up_at: Option<f64>,
}

impl Shot {
    /// Even reflection onto the full grid. Fails if the shot blew up.
    pub fn into_state(self, c: f64) -> Result<PairState> {
        if let Some(x) = self.blow_up_at {
            return Err(Error::ShootBlowUp { x });
        }
        let g = self.grid;
        let c0 = g.center();
        let n = g.n_points();
        let mut rho = vec![0.0; n];
        let mut v = vec![0.0; n];
        for k in 0..=c0 {
            rho[c0 + k] = self.rho[k];
            rho[c0 - k] = self.rho[k];
            v[c0 + k] = self.v[k];
            v[c0 - k] = self.v[k];
        }
        let phi: Vec<f64> = rho
            .iter()
            .map(|&r| c * (1.0 - r * r) / (2.0 * r * r))
            .collect();
        PairState::from_vecs(g, rho, phi, v)
    }

    /// Largest deviation from `s` over the nodes with `0 <= x <= x_max`.
    /// Nodes the shot never reached count as infinite deviation.
    pub fn max_deviation(&self, s: &PairState, x_max: f64) -> f64 {
        let g = s.grid();
        let c0 = g.center();
        let mut worst: f64 = 0.0;
        let mut k = 0;
        while c0 + k < g.n_points() && g.x(c0 + k) <= x_max * (1.0 + 1e-12) {
            if k >= self.rho.len() {
                return f64::INFINITY;
            }
            worst = worst
                .max((self.rho[k] - s.rho()[c0 + k]).abs())
                .max((self.v[k] - s.v()[c0 + k]).abs());
            k += 1;
        }
        worst
    }
}

/// Classical fourth-order Runge-Kutta with step `h` from `x = 0`, starting at
/// `rho(0) = dip`, `v(0) = amp`, zero slopes.
pub fn shoot(
    c: f64,
    lambda: f64,
    t: &ConstraintTargets,
    dip: f64,
    amp: f64,
    g: &Grid,
) -> Result<Shot> {
    if !(dip > 0.0 && dip < 1.0) {
        return Err(Error::Domain {
            name: "dip",
            value: dip,
            domain: "(0, 1)",
        });
    }
    if !(amp >= 0.0 && amp.is_finite()) {
        return Err(Error::Domain {
            name: "amp",
            value: amp,
            domain: "[0, inf)",
        });
    }
    if !(c > 0.0 && c < SQRT_2) {
        return Err(Error::Domain {
            name: "c",
            value: c,
            domain: "(0, sqrt 2)",
        });
    }
    let h = g.spacing();
    let steps = g.center();
    let f = |y: [f64; 4]| -> [f64; 4] {
        [
            y[1],
            rho_rhs(y[0], y[2], c, t),
            y[3],
            v_rhs(y[0], y[2], lambda, t),
        ]
    };
    let add = |y: [f64; 4], k: [f64; 4], a: f64| -> [f64; 4] {
        [
            y[0] + a * k[0],
            y[1] + a * k[1],
            y[2] + a * k[2],
            y[3] + a * k[3],
        ]
    };
    let mut y = [dip, 0.0, amp, 0.0];
    let mut xs = vec![0.0];
    let mut rho = vec![dip];
    let mut v = vec![amp];
    let mut blow_up_at = None;
    for k in 1..=steps {
        let k1 = f(y);
        let k2 = f(add(y, k1, 0.5 * h));
        let k3 = f(add(y, k2, 0.5 * h));
        let k4 = f(add(y, k3, h));
        for j in 0..4 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let x = g.x(g.center() + k);
        let escaped =
            y.iter().any(|c| !c.is_finite()) || y[0] <= 0.0 || y[0] > 10.0 || y[2].abs() > 10.0;
        if escaped {
            blow_up_at = Some(x);
            break;
        }
        xs.push(x);
        rho.push(y[0]);
        v.push(y[2]);
    }
    Ok(Shot {
        grid: *g,
        x: xs,
        rho,
        v,
        blow_up_at,
    })
}

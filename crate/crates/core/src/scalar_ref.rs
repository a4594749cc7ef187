//! Explicit scalar dark solitons (`v = 0`) and the speed/momentum dictionary.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use crate::error::{Error, Result};
use crate::functionals::momentum;
use crate::grid::{Grid, SampledField};
use crate::state::PairState;

/// Dark soliton of speed `c` sampled on a grid, in lifted variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSoliton {
    pub c: f64,
    pub rho: SampledField,
    pub phi: SampledField,
}

fn check_speed(c: f64) -> Result<()> {
    if c.is_finite() && (0.0..SQRT_2).contains(&c) {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "c",
            value: c,
            domain: "[0, sqrt 2)",
        })
    }
}

/// `u(x) = sqrt((2 - c^2)/2) tanh(sqrt(2 - c^2) x / 2) - i c / sqrt 2`.
///
/// The modulus and phase gradient are evaluated in closed form:
/// `rho^2 = 1 - (2 - c^2)/2 sech^2(sqrt(2 - c^2) x / 2)` and
/// `phi = c (1 - rho^2) / (2 rho^2)`. At `c = 0` the phase is a jump of
/// `pi` at the origin, which no sampled field can carry; `phi` is zero there.
pub fn build_scalar(c: f64, g: &Grid) -> Result<ScalarSoliton> {
    check_speed(c)?;
    let depth = 0.5 * (2.0 - c * c);
    let k = 0.5 * (2.0 - c * c).sqrt();
    let dip = |x: f64| depth / (k * x).cosh().powi(2);
    let rho = g.sample(|x| (1.0 - dip(x)).max(0.0).sqrt());
    let phi = g.sample(|x| {
        let d = dip(x);
        let r2 = 1.0 - d;
        if c == 0.0 {
            0.0
        } else {
            c * d / (2.0 * r2)
        }
    });
    Ok(ScalarSoliton { c, rho, phi })
}

impl ScalarSoliton {
    /// As a pair state with `v = 0`, boundary pinned and `rho` clamped.
    pub fn to_state(&self) -> PairState {
        let g = *self.rho.grid();
        PairState::new(self.rho.clone(), self.phi.clone(), g.zeros())
            .expect("fields share the grid")
            .pinned()
    }
}

/// `(2 - c^2)^{3/2} / 3`.
pub fn scalar_energy(c: f64) -> Result<f64> {
    check_speed(c)?;
    Ok((2.0 - c * c).powf(1.5) / 3.0)
}

/// Momentum of the speed-`c` soliton by quadrature on `g`. The black
/// soliton (`c = 0`) carries its phase jump of `pi` at one point, which
/// gives `pi / 2`.
pub fn scalar_momentum_of_speed(c: f64, g: &Grid) -> Result<f64> {
    check_speed(c)?;
    if c == 0.0 {
        return Ok(FRAC_PI_2);
    }
    Ok(momentum(&build_scalar(c, g)?.to_state()))
}

/// Inverse of [`scalar_momentum_of_speed`] by bisection to `1e-10` in `c`.
/// Resolving small speeds needs `h` well below `c`.
pub fn speed_of_momentum(q: f64, g: &Grid) -> Result<f64> {
    if !(q > 0.0 && q <= FRAC_PI_2) {
        return Err(Error::Domain {
            name: "q",
            value: q,
            domain: "(0, pi/2]",
        });
    }
    if q == FRAC_PI_2 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, SQRT_2);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if scalar_momentum_of_speed(mid, g)? > q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

//! Lifted representation `(rho, phi, v)` of a pair `(u, v)` with `u = rho e^{i theta}`
//! and `phi = theta'`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledField};

/// Lower clamp for the modulus during descent; upper clamp is `2 - NU_FLOOR`.
pub const NU_FLOOR: f64 = 1e-6;

/// Momentum, mass and coupling parameters of a constrained problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintTargets {
    pub q: f64,
    pub m: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ConstraintTargets {
    pub fn new(q: f64, m: f64, alpha: f64, beta: f64) -> Result<Self> {
        let t = Self { q, m, alpha, beta };
        t.check_parameters()?;
        Ok(t)
    }

    fn check_parameters(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Domain {
                name: "alpha",
                value: self.alpha,
                domain: "(0, inf)",
            });
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::Domain {
                name: "beta",
                value: self.beta,
                domain: "[0, inf)",
            });
        }
        if !(self.m.is_finite() && self.m >= 0.0) {
            return Err(Error::Domain {
                name: "m",
                value: self.m,
                domain: "[0, inf)",
            });
        }
        if !(self.q.is_finite() && self.q >= 0.0) {
            return Err(Error::Domain {
                name: "q",
                value: self.q,
                domain: "[0, inf)",
            });
        }
        Ok(())
    }

    /// Range accepted by the minimizer: `q` in `(0, pi/2)` for coupled
    /// problems; the scalar problem (`m = 0`) also accepts the black-soliton
    /// endpoint `q = pi/2`.
    pub fn check_solvable(&self) -> Result<()> {
        self.check_parameters()?;
        let ok = if self.is_scalar() {
            self.q > 0.0 && self.q <= FRAC_PI_2
        } else {
            self.q > 0.0 && self.q < FRAC_PI_2
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                name: "q",
                value: self.q,
                domain: if self.is_scalar() {
                    "(0, pi/2]"
                } else {
                    "(0, pi/2)"
                },
            })
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.m == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    /// `rho <= 0`: the lifting is undefined.
    RhoNotPositive,
    /// `rho >= 2`: outside the admissible set.
    RhoTooLarge,
    /// Boundary value differs from `(1, 0, 0)`.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub node: usize,
    pub field: &'static str,
    pub value: f64,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {} at node {} ({:?})",
            self.field, self.value, self.node, self.kind
        )
    }
}

/// Discretized pair in lifted variables. All three fields live on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    rho: SampledField,
    phi: SampledField,
    v: SampledField,
}

impl PairState {
    pub fn new(rho: SampledField, phi: SampledField, v: SampledField) -> Result<Self> {
        if rho.grid() != phi.grid() || rho.grid() != v.grid() {
            return Err(Error::InvalidState("fields live on different grids".into()));
        }
        Ok(Self { rho, phi, v })
    }

    pub fn from_vecs(grid: Grid, rho: Vec<f64>, phi: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Self::new(
            SampledField::new(grid, rho)?,
            SampledField::new(grid, phi)?,
            SampledField::new(grid, v)?,
        )
    }

    /// `(e^{ik}, 0)` with `k = 0`.
    pub fn trivial(grid: Grid) -> Self {
        Self {
            rho: grid.constant(1.0),
            phi: grid.zeros(),
            v: grid.zeros(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    pub fn rho(&self) -> &SampledField {
        &self.rho
    }

    pub fn phi(&self) -> &SampledField {
        &self.phi
    }

    pub fn v(&self) -> &SampledField {
        &self.v
    }

    pub fn with_phi(&self, phi: SampledField) -> Self {
        Self {
            rho: self.rho.clone(),
            phi,
            v: self.v.clone(),
        }
    }

    pub fn with_v(&self, v: SampledField) -> Self {
        Self {
            rho: self.rho.clone(),
            phi: self.phi.clone(),
            v,
        }
    }

    pub fn into_parts(self) -> (SampledField, SampledField, SampledField) {
        (self.rho, self.phi, self.v)
    }

    /// Every violated invariant; empty iff the state is admissible.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.grid().n_points();
        for (i, &r) in self.rho.values().iter().enumerate() {
            if r <= 0.0 {
                out.push(Violation {
                    node: i,
                    field: "rho",
                    value: r,
                    kind: ViolationKind::RhoNotPositive,
                });
            } else if r >= 2.0 {
                out.push(Violation {
                    node: i,
                    field: "rho",
                    value: r,
                    kind: ViolationKind::RhoTooLarge,
                });
            }
        }
        for &i in &[0, n - 1] {
            let checks = [
                ("rho", self.rho[i], 1.0),
                ("phi", self.phi[i], 0.0),
                ("v", self.v[i], 0.0),
            ];
            for (field, value, want) in checks {
                if value != want {
                    out.push(Violation {
                        node: i,
                        field,
                        value,
                        kind: ViolationKind::Boundary,
                    });
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let bad = self.validate();
        if bad.is_empty() {
            Ok(())
        } else {
            let shown: Vec<String> = bad.iter().take(4).map(|v| v.to_string()).collect();
            Err(Error::InvalidState(format!(
                "{} violation(s): {}",
                bad.len(),
                shown.join("; ")
            )))
        }
    }

    /// Phase `theta` as the cumulative integral of `phi` with `theta(-L) = anchor`.
    pub fn reconstruct_phase(&self, anchor: f64) -> SampledField {
        self.phi.cumulative_integral(anchor)
    }

    /// Clamp `rho` into `[NU_FLOOR, 2 - NU_FLOOR]` and pin the boundary nodes
    /// to `(1, 0, 0)`.
    pub fn pinned(&self) -> Self {
        let n = self.grid().n_points();
        let mut rho = self.rho.values().to_vec();
        let mut phi = self.phi.values().to_vec();
        let mut v = self.v.values().to_vec();
        for r in rho.iter_mut() {
            *r = clamp_rho(*r);
        }
        for &i in &[0, n - 1] {
            rho[i] = 1.0;
            phi[i] = 0.0;
            v[i] = 0.0;
        }
        let g = *self.grid();
        Self {
            rho: SampledField::from_raw(g, rho),
            phi: SampledField::from_raw(g, phi),
            v: SampledField::from_raw(g, v),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&StateJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: StateJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

pub fn clamp_rho(r: f64) -> f64 {
    r.clamp(NU_FLOOR, 2.0 - NU_FLOOR)
}

/// On-disk layout: `{"L": .., "n": .., "rho": [..], "phi": [..], "v": [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
    pub rho: Vec<f64>,
    pub phi: Vec<f64>,
    pub v: Vec<f64>,
}

impl From<&PairState> for StateJson {
    fn from(s: &PairState) -> Self {
        Self {
            half_width: s.grid().half_width(),
            n: s.grid().n_points(),
            rho: s.rho.values().to_vec(),
            phi: s.phi.values().to_vec(),
            v: s.v.values().to_vec(),
        }
    }
}

impl TryFrom<StateJson> for PairState {
    type Error = Error;

    fn try_from(raw: StateJson) -> Result<Self> {
        let g = Grid::new(raw.half_width, raw.n)?;
        PairState::from_vecs(g, raw.rho, raw.phi, raw.v)
    }
}

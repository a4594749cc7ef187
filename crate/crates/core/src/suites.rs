//! Batch property suites behind `gpsol check`.

use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::functionals::{energy, mass, momentum};
use crate::grid::{Grid, SampledField};
use crate::rearrange::{
    check_hardy_littlewood, check_polya_szego, check_two_bump_gap, rearrange_decreasing, symmetrize,
};
use crate::scalar_ref::{build_scalar, scalar_energy, scalar_momentum_of_speed, speed_of_momentum};
use crate::state::{ConstraintTargets, PairState};
use crate::tws::{first_integral_residual, ode_residual};

/// One property over a batch of cases. `worst_margin` is the smallest
/// `bound - value` seen; negative means some case missed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub worst_margin: f64,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Tally {
    line: CheckLine,
    slack: f64,
}

impl Tally {
    fn new(name: &str, slack: f64) -> Self {
        Self {
            line: CheckLine {
                name: name.to_string(),
                cases: 0,
                failures: 0,
                worst_margin: f64::INFINITY,
            },
            slack,
        }
    }

    fn push(&mut self, margin: f64) {
        self.line.cases += 1;
        self.line.worst_margin = self.line.worst_margin.min(margin);
        if !(margin >= -self.slack) {
            self.line.failures += 1;
        }
    }

    fn done(self) -> CheckLine {
        self.line
    }
}

/// Sum of one to four compactly supported bumps on `[-5, 5]`.
fn random_profile(rng: &mut ChaCha8Rng) -> impl Fn(f64) -> f64 {
    let k = rng.gen_range(1..5);
    let bumps: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| {
            (
                rng.gen_range(0.0..2.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.3..2.0),
            )
        })
        .collect();
    move |x: f64| {
        bumps
            .iter()
            .map(|&(a, c, w)| a * (1.0 - ((x - c) / w).powi(2)).max(0.0).powi(2))
            .sum()
    }
}

fn sorted_bits(f: &SampledField) -> Vec<u64> {
    let mut b: Vec<u64> = f.values().iter().map(|x| x.to_bits()).collect();
    b.sort_unstable();
    b
}

fn random_state(g: Grid, rng: &mut ChaCha8Rng) -> PairState {
    let gauss = |x: f64, c: f64, w: f64| (-((x - c) / w).powi(2)).exp();
    let (a, ac, aw) = (
        rng.gen_range(0.05..0.9),
        rng.gen_range(-3.0..3.0),
        rng.gen_range(0.4..2.5),
    );
    let (b, bc) = (rng.gen_range(-0.4..0.4), rng.gen_range(-3.0..3.0));
    let (p, pc, pw) = (
        rng.gen_range(0.05..1.5),
        rng.gen_range(-3.0..3.0),
        rng.gen_range(0.4..2.5),
    );
    let (v, vc, vw) = (
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-3.0..3.0),
        rng.gen_range(0.4..2.5),
    );
    let rho = g.sample(|x| 1.0 - a * gauss(x, ac, aw) + b * gauss(x, bc, 1.0));
    let phi = g.sample(|x| p * gauss(x, pc, pw));
    let vf = g.sample(|x| v * gauss(x, vc, vw));
    PairState::new(rho, phi, vf).expect("same grid").pinned()
}

/// Equimeasurability, Hardy-Littlewood, Polya-Szego, the two-bump gap and
/// the symmetrization transform on `cases` seeded random inputs.
pub fn rearrangement_suite(cases: usize, seed: u64) -> Result<Vec<CheckLine>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Grid::new(6.0, 601)?;
    let h = g.spacing();
    let mut equi = Tally::new("equimeasurability", 0.0);
    let mut hl = Tally::new("hardy_littlewood", 0.0);
    let mut ps = Tally::new("polya_szego", 1e-8 + h);
    for _ in 0..cases {
        let f = g.sample(random_profile(&mut rng));
        let k = g.sample(random_profile(&mut rng));
        let fs = rearrange_decreasing(&f)?;
        equi.push(if sorted_bits(&f) == sorted_bits(&fs) {
            0.0
        } else {
            -1.0
        });
        let (lhs, rhs) = check_hardy_littlewood(&f, &k)?;
        hl.push(rhs - lhs);
        let (lhs, rhs) = check_polya_szego(&f)?;
        ps.push(rhs - lhs);
    }

    let tg = Grid::new(20.0, 2001)?;
    let th = tg.spacing();
    let mut gap = Tally::new("two_bump_gap", th);
    for _ in 0..cases {
        let (wf, wg) = (rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0));
        let (af, ag) = (rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0));
        let f = tg.sample(|x| af * (1.0 - (x / wf).powi(2)).max(0.0).powi(2));
        let k = tg.sample(|x| ag * (1.0 - (x / wg).powi(2)).max(0.0).powi(2));
        let min_shift = ((wf + wg) / (2.0 * th)).ceil() as usize + 2;
        let shift = rng.gen_range(min_shift..min_shift + 200);
        let (lhs, rhs) = check_two_bump_gap(&f, &k, shift)?;
        gap.push(rhs - lhs);
    }

    let sg = Grid::new(12.0, 481)?;
    let t = ConstraintTargets::new(0.3, 0.2, 1.0, 2.0)?;
    let mut sym_p = Tally::new("symmetrize_momentum", 1e-10);
    let mut sym_m = Tally::new("symmetrize_mass", 1e-10);
    let mut sym_e = Tally::new("symmetrize_energy", 1e-6 + sg.spacing());
    let mut done = 0;
    while done < cases {
        let s = random_state(sg, &mut rng);
        let q = momentum(&s);
        if !(q > 0.0) {
            continue;
        }
        done += 1;
        let (out, _) = symmetrize(&s)?;
        sym_p.push(-(momentum(&out) - q).abs());
        sym_m.push(-(mass(&out) - mass(&s)).abs());
        sym_e.push(energy(&s, &t) - energy(&out, &t));
    }
    Ok(vec![
        equi.done(),
        hl.done(),
        ps.done(),
        gap.done(),
        sym_p.done(),
        sym_m.done(),
        sym_e.done(),
    ])
}

/// Closed-form scalar family on `g`: energies at `c = 0, 1`, the bound
/// `E < sqrt 2 q`, monotone momentum, the speed round trip and the
/// second-order traveling-wave residual.
pub fn scalar_suite(g: &Grid) -> Result<Vec<CheckLine>> {
    let t0 = ConstraintTargets::new(0.0, 0.0, 1.0, 1.0)?;
    let mut energies = Tally::new("scalar_energy", 2e-3);
    for c in [0.0, 1.0] {
        let e = energy(&build_scalar(c, g)?.to_state(), &t0);
        energies.push(-(e - scalar_energy(c)?).abs());
    }
    let mut bound = Tally::new("below_sqrt2_q", 0.0);
    for k in 1..=15 {
        let q = 0.1 * k as f64;
        let c = speed_of_momentum(q, g)?;
        let margin = SQRT_2 * q - scalar_energy(c)?;
        bound.push(if margin > 0.0 { margin } else { -1.0 });
    }
    let mut mono = Tally::new("momentum_decreasing_in_speed", 0.0);
    let ps: Vec<f64> = (0..50)
        .map(|k| scalar_momentum_of_speed(0.05 + 1.3 * k as f64 / 49.0, g))
        .collect::<Result<_>>()?;
    for w in ps.windows(2) {
        let margin = w[0] - w[1];
        mono.push(if margin > 0.0 { margin } else { -1.0 });
    }
    let mut round = Tally::new("speed_round_trip", 1e-8);
    let q1 = scalar_momentum_of_speed(1.0, g)?;
    round.push(-(speed_of_momentum(q1, g)? - 1.0).abs());
    let mut resid = Tally::new("traveling_wave_residual", 1e-3);
    let s = build_scalar(1.0, g)?.to_state();
    let (_, _, norm) = ode_residual(&s, 1.0, 0.0, &t0);
    resid.push(-norm);
    let fi = first_integral_residual(&s, 1.0, 0.0, &t0).max_abs_interior();
    resid.push(-fi);
    Ok(vec![
        energies.done(),
        bound.done(),
        mono.done(),
        round.done(),
        resid.done(),
    ])
}

/// Traveling-wave residuals of a stored profile.
pub fn residual_suite(
    s: &PairState,
    c: f64,
    lambda: f64,
    t: &ConstraintTargets,
    ode_tol: f64,
    first_integral_tol: f64,
) -> Vec<CheckLine> {
    let (_, _, norm) = ode_residual(s, c, lambda, t);
    let mut ode = Tally::new("ode_residual", 0.0);
    ode.push(ode_tol - norm);
    let mut fi = Tally::new("first_integral", 0.0);
    fi.push(first_integral_tol - first_integral_residual(s, c, lambda, t).max_abs_interior());
    vec![ode.done(), fi.done()]
}

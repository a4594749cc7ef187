use gpsol_core::functionals::{energy, mass, momentum};
use gpsol_core::rearrange::symmetrize;
use gpsol_core::solver::phase_optimum;
use gpsol_core::{ConstraintTargets, Grid, PairState};
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::new(12.0, 481).unwrap()
}

prop_compose! {
    fn states()(
        dip in 0.05f64..0.9, dc in -3.0f64..3.0, dw in 0.4f64..2.5,
        bump in -0.4f64..0.4, bc in -3.0f64..3.0,
        ph in 0.05f64..1.5, pc in -3.0f64..3.0, pw in 0.4f64..2.5,
        va in -1.0f64..1.0, vc in -3.0f64..3.0, vw in 0.4f64..2.5,
    ) -> PairState {
        let g = grid();
        let gauss = |x: f64, c: f64, w: f64| (-((x - c) / w).powi(2)).exp();
        let rho = g.sample(|x| 1.0 - dip * gauss(x, dc, dw) + bump * gauss(x, bc, 1.0));
        let phi = g.sample(|x| ph * gauss(x, pc, pw));
        let v = g.sample(|x| va * gauss(x, vc, vw));
        PairState::new(rho, phi, v).unwrap().pinned()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetrize_keeps_constraints_and_does_not_raise_energy(s in states()) {
        let q = momentum(&s);
        prop_assume!(q > 1e-6);
        let t = ConstraintTargets::new(0.3, 0.2, 1.0, 2.0).unwrap();
        let (out, gamma) = symmetrize(&s).unwrap();
        prop_assert!(gamma > 0.0);
        prop_assert!((momentum(&out) - q).abs() <= 1e-10);
        prop_assert!((mass(&out) - mass(&s)).abs() <= 1e-10);
        prop_assert!(energy(&out, &t) <= energy(&s, &t) + 1e-6);
    }

    #[test]
    fn phase_optimum_meets_the_constraint(s in states(), q in 0.01f64..1.5) {
        let (phi, kin) = phase_optimum(s.rho(), q).unwrap();
        let out = s.with_phi(phi);
        prop_assert!((momentum(&out) - q).abs() <= 1e-10 * q.max(1.0));
        let direct = 0.5 * out.rho().zip_with(out.phi(), |r, p| r * r * p * p).integrate();
        prop_assert!((direct - kin).abs() <= 1e-10 * kin.max(1.0));
    }

    #[test]
    fn energy_respects_the_mass_lower_bound(s in states(), alpha in 0.0f64..3.0, beta in 0.1f64..4.0) {
        let t = ConstraintTargets::new(0.3, 0.2, alpha, beta).unwrap();
        prop_assert!(energy(&s, &t) >= -0.5 * alpha * mass(&s) - 1e-12);
    }
}

use proptest::prelude::*;
use symbreak_core::dimer::{self, lasing_fixed_point, semiclassical_density, DimerParams, SemiclassicalModel, SemiclassicalState};
use symbreak_core::ssh::{
    build_ssh, rate_equation_prediction, ssh_modes, SSHParams,
};
use symbreak_core::C64;

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #[test]
    fn ssh_rhs_is_phase_covariant(
        delta in -0.9f64..0.9,
        u in 0.0f64..2.0,
        eta in 0.0f64..1.5,
        phi in 0.0f64..std::f64::consts::TAU,
        re in prop::collection::vec(-2.0f64..2.0, 7),
        im in prop::collection::vec(-2.0f64..2.0, 7),
    ) {
        let p = SSHParams::new(7, 1.0, delta, u, 0.7, eta).unwrap();
        let v: Vec<C64> = re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect();
        let g = C64::from_polar(1.0, phi);
        let rotated: Vec<C64> = v.iter().map(|z| z * g).collect();
        let lhs = symbreak_core::ssh::semiclassical_rhs(&rotated, &p);
        let rhs = symbreak_core::ssh::semiclassical_rhs(&v, &p);
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert!(close(*a, b * g, 1e-12));
        }
    }

    #[test]
    fn ssh_spectrum_is_chiral(half in 1usize..7, delta in -0.95f64..0.95, j in 0.1f64..3.0) {
        let p = SSHParams::new(2 * half + 1, j, delta, 0.0, 1.0, 0.0).unwrap();
        build_ssh(&p).unwrap();
        let modes = ssh_modes(&p).unwrap();
        prop_assert!(modes.unitarity_error() < 1e-10);
        let e = &modes.energies;
        for k in 0..e.len() {
            prop_assert!((e[k] + e[e.len() - 1 - k]).abs() < 1e-10);
        }
    }

    #[test]
    fn rate_populations_are_a_distribution(xi in 1e-4f64..0.999) {
        let r = rate_equation_prediction(xi).unwrap();
        prop_assert!(r.iter().all(|x| *x >= 0.0));
        prop_assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(r[0], r[2]);
    }

    #[test]
    fn dimer_rhs_is_phase_covariant(
        j in 0.05f64..3.0,
        ka in 0.1f64..5.0,
        kb in 0.1f64..5.0,
        phi in 0.0f64..std::f64::consts::TAU,
        z in prop::array::uniform4(-3.0f64..3.0),
    ) {
        let p = DimerParams::new(j, ka, kb, 10.0).unwrap();
        let s = SemiclassicalState::new(C64::new(z[0], z[1]), C64::new(z[2], z[3]));
        let g = C64::from_polar(1.0, phi);
        let r = SemiclassicalState::new(s.a * g, s.b * g);
        for model in [SemiclassicalModel::NonlinearHop, SemiclassicalModel::NonlinearHopCross, SemiclassicalModel::GainSaturation] {
            let d = dimer::semiclassical_rhs(&s, &p, model);
            let dr = dimer::semiclassical_rhs(&r, &p, model);
            prop_assert!(close(dr.a, d.a * g, 1e-12) && close(dr.b, d.b * g, 1e-12));
        }
    }

    #[test]
    fn lasing_branch_matches_threshold(j in 0.05f64..3.0, ka in 0.1f64..5.0, kb in 0.1f64..5.0) {
        let p = DimerParams::new(j, ka, kb, 10.0).unwrap();
        let lasing = 2.0 * j < (ka * kb).sqrt();
        prop_assert_eq!(p.is_lasing(), lasing);
        match lasing_fixed_point(&p) {
            Some(s) => {
                prop_assert!(lasing);
                let n = semiclassical_density(&p);
                prop_assert!((s.density() - n).abs() <= 1e-9 * (1.0 + n));
            }
            None => prop_assert!(!lasing),
        }
    }
}

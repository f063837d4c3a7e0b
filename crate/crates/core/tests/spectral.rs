use critwave::hyp::{f21, gamma, w0_closed};
use critwave::resolvent::{
    green_free, phi0_free, phi1_free, wronskian_w0, FundamentalPair, PotentialSpec, SolverOptions, SpectralPoint,
};
use num_complex::Complex64 as C;
use proptest::prelude::*;

const POINTS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

fn pair(eps: f64, omega: f64, v: &PotentialSpec) -> FundamentalPair {
    FundamentalPair::on_points(SpectralPoint::new(eps, omega), v, &POINTS, SolverOptions::default()).unwrap()
}

fn close(a: C, b: C, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn wronskian_is_rho_independent(eps in 0.0f64..=1.0 / 3.0, omega in -50.0f64..50.0) {
        let p = pair(eps, omega, &PotentialSpec::Linearized);
        prop_assert!(p.spread <= 1e-6, "spread {} at {}", p.spread, p.lambda);
    }

    #[test]
    fn conjugation_symmetry(eps in 0.0f64..=1.0 / 3.0, omega in 0.5f64..30.0) {
        let up = pair(eps, omega, &PotentialSpec::Linearized);
        let down = pair(eps, -omega, &PotentialSpec::Linearized);
        for j in 0..POINTS.len() {
            prop_assert!(close(down.u0[j], up.u0[j].conj(), 1e-10));
            prop_assert!(close(down.u1[j], up.u1[j].conj(), 1e-10));
        }
        prop_assert!(close(down.w0, up.w0.conj(), 1e-10));
        prop_assert!(close(down.green(0.4, 0.6).unwrap(), up.green(0.4, 0.6).unwrap().conj(), 1e-10));
        let l = C::new(eps, omega);
        prop_assert!((w0_closed(l.conj()).unwrap() - w0_closed(l).unwrap().conj()).norm() <= 1e-12);
    }

    #[test]
    fn zero_potential_matches_closed_forms(eps in 0.0f64..=1.0 / 3.0, omega in -30.0f64..30.0) {
        let p = pair(eps, omega, &PotentialSpec::Zero);
        let l = p.lambda;
        for (j, &r) in POINTS.iter().enumerate() {
            // branches are fixed only up to normalization; compare ratios
            let a = p.u0[j] / p.u0[0];
            let b = phi0_free(l, r) / phi0_free(l, POINTS[0]);
            prop_assert!(close(a, b, 1e-7), "u0 at {}: {} vs {}", r, a, b);
            let a = p.u1[j] / p.u1[0];
            let b = phi1_free(l, r) / phi1_free(l, POINTS[0]);
            prop_assert!(close(a, b, 1e-7), "u1 at {}: {} vs {}", r, a, b);
        }
        for (r, s) in [(0.2, 0.6), (0.6, 0.2), (0.4, 0.8)] {
            prop_assert!(close(p.green(r, s).unwrap(), green_free(l, r, s), 1e-7));
        }
    }

    #[test]
    fn gauss_value(
        ar in -0.8f64..0.8, ai in -0.5f64..0.5,
        br in -0.8f64..0.8, bi in -0.5f64..0.5,
        dr in 0.5f64..2.0, di in -0.5f64..0.5,
    ) {
        let (a, b) = (C::new(ar, ai), C::new(br, bi));
        let c = a + b + C::new(dr, di);
        let exact = gamma(c).unwrap() * gamma(c - a - b).unwrap() / (gamma(c - a).unwrap() * gamma(c - b).unwrap());
        let v = f21(a, b, c, C::new(1.0, 0.0)).unwrap();
        prop_assert!((v - exact).norm() <= 1e-10 * exact.norm(), "{} vs {}", v, exact);
    }
}

#[test]
fn ode_and_closed_wronskian_agree() {
    for i in 0..5 {
        for j in 0..5 {
            let eps = i as f64 / 12.0;
            let omega = -20.0 + 10.0 * j as f64;
            let p = pair(eps, omega, &PotentialSpec::Linearized);
            let ode = wronskian_w0(&p).unwrap();
            let closed = w0_closed(p.lambda).unwrap();
            assert!((ode - closed).norm() <= 1e-6, "{}: {ode} vs {closed}", p.lambda);
        }
    }
}

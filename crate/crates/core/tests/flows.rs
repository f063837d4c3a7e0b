use critwave::evolve::{rhs, EvolveConfig, EvolveMode, Evolver, Trajectory};
use critwave::lab::{ensemble, RandomDataSpec};
use critwave::simcoords::{gauge_solution, gauge_values, CoordinateFrame, State};
use critwave::spaces::{g_norm, h_norm, linear_fit};
use critwave::specgrid::Grid;
use critwave::waveop::{assemble, projection, Mode};
use proptest::prelude::*;

fn data(seed: u64, g: &Grid, n: usize) -> Vec<State> {
    ensemble(&RandomDataSpec { seed, ..RandomDataSpec::default() }, g, n)
}

fn state_at(traj: &Trajectory, tau: f64) -> &State {
    let i = traj.nearest(tau).unwrap();
    assert!((traj.taus[i] - tau).abs() < 1e-9, "no record at {tau}");
    &traj.states[i]
}

fn diff(a: &State, b: &State) -> State {
    a.axpy(-1.0, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_pair_is_exact_eigenvector(n in 2usize..48) {
        let g = Grid::new(n).unwrap();
        let v = State::constant(g.len(), 2.0, 3.0);
        let op = assemble(&g, Mode::Full);
        let lv = op.apply(&v);
        // roundoff of one matvec against ‖M‖_∞ ~ N⁴
        let norm = op.matrix().row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
        prop_assert!(lv.max_abs_diff(&v) <= 16.0 * f64::EPSILON * norm * 3.0, "{} vs {}", lv.max_abs_diff(&v), norm);
    }
}

#[test]
fn projection_commutes_with_flow() {
    let g = Grid::new(16).unwrap();
    let ev = Evolver::new(&g, EvolveConfig::new(EvolveMode::Linearized, 5.0)).unwrap();
    let p = ev.projection().clone();
    for f in data(21, &g, 10) {
        let a = ev.run(&f).unwrap();
        let b = ev.run(&p.apply(&f)).unwrap();
        for tau in [1.0, 5.0] {
            let lhs = p.apply(state_at(&a, tau));
            let d = h_norm(&g, &diff(&lhs, state_at(&b, tau)));
            assert!(d <= 1e-6 * tau.exp(), "tau {tau}: {d}");
        }
    }
}

#[test]
fn unstable_action_is_exponential() {
    let g = Grid::new(16).unwrap();
    let ev = Evolver::new(&g, EvolveConfig::new(EvolveMode::Linearized, 5.0)).unwrap();
    let pf = ev.projection().apply(&data(22, &g, 1)[0]);
    let traj = ev.run(&pf).unwrap();
    for (t, s) in traj.taus.iter().zip(&traj.states) {
        let d = h_norm(&g, &diff(s, &pf.scaled(t.exp())));
        assert!(d <= 1e-6 * t.exp() * h_norm(&g, &pf), "tau {t}: {d}");
    }
}

#[test]
fn linearized_semigroup() {
    let g = Grid::new(16).unwrap();
    let f = &data(23, &g, 1)[0];
    let long = Evolver::new(&g, EvolveConfig::new(EvolveMode::Linearized, 2.0)).unwrap().run(f).unwrap();
    let first = Evolver::new(&g, EvolveConfig::new(EvolveMode::Linearized, 1.3)).unwrap().run(f).unwrap();
    let second =
        Evolver::new(&g, EvolveConfig::new(EvolveMode::Linearized, 0.7)).unwrap().run(first.last().unwrap()).unwrap();
    let d = h_norm(&g, &diff(state_at(&long, 2.0), second.last().unwrap()));
    assert!(d <= 1e-7, "{d}");
}

#[test]
fn rk4_fourth_order() {
    let g = Grid::new(16).unwrap();
    let frame = CoordinateFrame::new(1.0).unwrap();
    let initial = gauge_solution(1.05, &frame, 0.0, g.len()).unwrap();
    let err = |dt: f64| {
        let cfg = EvolveConfig { dt: Some(dt), ..EvolveConfig::new(EvolveMode::Nonlinear, 5.0) };
        let traj = Evolver::new(&g, cfg).unwrap().run(&initial).unwrap();
        traj.taus
            .iter()
            .zip(&traj.states)
            .map(|(t, s)| s.max_abs_diff(&gauge_solution(1.05, &frame, *t, g.len()).unwrap()))
            .fold(0.0, f64::max)
    };
    let ratio = err(0.01) / err(0.005);
    assert!((16.0 * 0.7..=16.0 * 1.3).contains(&ratio), "{ratio}");
}

#[test]
fn free_flow_contracts_transformed_norm() {
    let g = Grid::new(20).unwrap();
    let ev = Evolver::new(&g, EvolveConfig::new(EvolveMode::Free, 8.0)).unwrap();
    let mut worst = 0.0_f64;
    for f in data(24, &g, 10) {
        let traj = ev.run(&f).unwrap();
        let gn: Vec<f64> = traj.states.iter().map(|s| g_norm(&g, s)).collect();
        for w in gn.windows(2) {
            assert!(w[1] <= w[0] + 1e-8, "{} -> {}", w[0], w[1]);
        }
        let sup = traj.h_norms.iter().copied().fold(0.0, f64::max);
        worst = worst.max(sup / traj.h_norms[0]);
    }
    assert!(worst.is_finite() && worst < 10.0, "{worst}");
}

#[test]
fn nonlinear_departs_quadratically() {
    let g = Grid::new(16).unwrap();
    let f = &data(25, &g, 1)[0];
    let run = |mode, eps: f64| {
        let traj = Evolver::new(&g, EvolveConfig::new(mode, 1.0)).unwrap().run(&f.scaled(eps)).unwrap();
        traj.last().unwrap().clone()
    };
    let pts: Vec<(f64, f64)> = [1e-2_f64, 1e-3, 1e-4]
        .iter()
        .map(|&e| (e.ln(), h_norm(&g, &diff(&run(EvolveMode::Nonlinear, e), &run(EvolveMode::Linearized, e))).ln()))
        .collect();
    let slope = linear_fit(&pts).0;
    assert!((slope - 2.0).abs() <= 0.2, "{slope}");
}

#[test]
fn gauge_family_solves_the_equation() {
    let g = Grid::new(12).unwrap();
    let frame = CoordinateFrame::new(1.0).unwrap();
    for tp in [0.9, 1.05] {
        for tau in [0.0, 1.0, 2.0] {
            let s = gauge_solution(tp, &frame, tau, g.len()).unwrap();
            let r = rhs(&g, &s, EvolveMode::Nonlinear);
            let h = 1e-4;
            let at = |k: f64| gauge_values(tp, 1.0, tau + k * h).unwrap();
            let (m2, m1, p1, p2) = (at(-2.0), at(-1.0), at(1.0), at(2.0));
            let d1 = (m2.0 - 8.0 * m1.0 + 8.0 * p1.0 - p2.0) / (12.0 * h);
            let d2 = (m2.1 - 8.0 * m1.1 + 8.0 * p1.1 - p2.1) / (12.0 * h);
            for j in 0..g.len() {
                assert!((r.phi1[j] - d1).abs() <= 1e-8 && (r.phi2[j] - d2).abs() <= 1e-8, "T' {tp} tau {tau}");
            }
        }
    }
    for tau in [0.0, 0.5, 3.0, 10.0] {
        assert_eq!(gauge_solution(1.0, &frame, tau, 5).unwrap(), State::zeros(5));
    }
}

#[test]
fn projection_is_idempotent() {
    let g = Grid::new(20).unwrap();
    let p = projection(&g, &assemble(&g, Mode::Full)).unwrap();
    let m = p.matrix();
    assert!((&m * &m - &m).norm() <= 1e-10 * m.norm());
    let gauge = State::constant(g.len(), 2.0, 3.0);
    assert!(p.apply(&gauge).max_abs_diff(&gauge) <= 1e-10);
}

use critwave::dalembert::{s0_state, FreeData};
use critwave::evolve::{EvolveConfig, EvolveMode, Evolver};
use critwave::simcoords::State;
use critwave::specgrid::Grid;
use critwave::Result;

/// Free similarity flow: closed-form window integrals against the collocation solver.
fn main() -> Result<()> {
    let g = Grid::new(24)?;
    let f = State::from_fns(&g, |r| (-(r * r)).exp(), |r| 0.5 * (1.0 - r * r));
    let traj = Evolver::new(&g, EvolveConfig::new(EvolveMode::Free, 5.0))?.run(&f)?;
    let data = FreeData::from_state(&g, &f);
    for tau in [0.5, 1.0, 2.0, 5.0] {
        let i = traj.nearest(tau).unwrap_or(0);
        let exact = s0_state(&data, traj.taus[i], &g);
        println!("tau = {:.2}  sup difference {:.2e}", traj.taus[i], exact.max_abs_diff(&traj.states[i]));
    }
    Ok(())
}

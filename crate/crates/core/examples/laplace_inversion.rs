use critwave::evolve::{EvolveConfig, EvolveMode, Evolver};
use critwave::oscint::LaplaceTable;
use critwave::simcoords::State;
use critwave::specgrid::Grid;
use critwave::Result;

/// Linearized semigroup from its Laplace representation on the imaginary axis.
fn main() -> Result<()> {
    let g = Grid::new(16)?;
    let cfg = EvolveConfig { reproject: true, ..EvolveConfig::new(EvolveMode::Linearized, 2.0) };
    let ev = Evolver::new(&g, cfg)?;
    let f = ev.projection().complement(&State::from_fns(&g, |r| (1.0 - r * r) * (-r * r).exp(), |r| 0.3 * r * r - 0.2));
    let traj = ev.run(&f)?;
    let table = LaplaceTable::build(&g, &f, 40.0, 1.0)?;
    for tau in [1.0, 2.0] {
        let i = traj.nearest(tau).unwrap_or(0);
        let d = table.reconstruct(tau).max_abs_diff(&traj.states[i]);
        println!("tau = {tau}  |Laplace - evolve| = {d:.2e}");
    }
    Ok(())
}

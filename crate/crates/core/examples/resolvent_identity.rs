use critwave::hyp::w0_closed;
use critwave::resolvent::{apply_resolvent, FundamentalPair, PotentialSpec, ResolventRHS, SpectralPoint};
use critwave::simcoords::State;
use critwave::specgrid::Grid;
use critwave::waveop::{assemble, Mode};
use critwave::Result;

/// Resolvent of the linearized generator at λ = 0.1 + 5i from the spectral ODE.
fn main() -> Result<()> {
    let g = Grid::new(24)?;
    let point = SpectralPoint::new(0.1, 5.0);
    let pair = FundamentalPair::new(point, &PotentialSpec::Linearized, &g)?;
    let closed = w0_closed(point.lambda)?;
    println!("w0 from ODE  {:.12}", pair.w0);
    println!("w0 closed    {:.12}", closed);
    println!("spread {:.2e}", pair.spread);

    let f = State::from_fns(&g, |r| (1.0 - r * r) * (2.0 * r).cos(), |r| 1.0 + r * r);
    let u = apply_resolvent(&g, &pair, &ResolventRHS::from_state(&g, &f))?;
    let lu = assemble(&g, Mode::Full).apply_complex(&u.stacked());
    let res: f64 = u
        .stacked()
        .iter()
        .zip(&lu)
        .zip(f.stacked())
        .map(|((u, lu), f)| (point.lambda * u - lu - f).norm())
        .fold(0.0, f64::max);
    println!("max |(λ − L)u − f| = {res:.2e}");
    Ok(())
}

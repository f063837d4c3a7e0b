use critwave::simcoords::State;
use critwave::specgrid::Grid;
use critwave::waveop::{assemble, eigenpairs, projection, Mode, SpuriousFilter};
use critwave::Result;

/// Spectrum of the discrete linearized generator, the gauge eigenvalue and its projection.
fn main() -> Result<()> {
    let g = Grid::new(24)?;
    let op = assemble(&g, Mode::Full);
    let pairs = eigenpairs(&op)?;
    let filter = SpuriousFilter::new(&g, Mode::Full)?;
    for p in pairs.iter().take(8) {
        println!("{:+.10} {:+.10}i  accepted = {}", p.value.re, p.value.im, filter.accepts(p));
    }
    let proj = projection(&g, &op)?;
    println!("gauge eigenvalue {:.14}", proj.eigenvalue);
    println!("P(2,3) amplitude {:.14}", proj.amplitude(&State::constant(g.len(), 2.0, 3.0)));
    println!("g* residual {:.2e}", proj.gstar_residual);
    Ok(())
}

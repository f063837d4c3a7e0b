use critwave::simcoords::State;
use critwave::spaces::{g_norm, h_norm, lq_ball, StrichartzExponents};
use critwave::specgrid::Grid;
use critwave::Result;

/// Energy norm, its G-transform counterpart and Lebesgue norms on the unit ball.
fn main() -> Result<()> {
    let g = Grid::new(24)?;
    let s = State::from_fns(&g, |r| (1.0 - r * r).powi(2), |r| r * r);
    println!("h_norm  = {:.12}", h_norm(&g, &s));
    println!("g_norm  = {:.12}", g_norm(&g, &s));
    for q in [2.0, 6.0, 10.0, f64::INFINITY] {
        println!("L^{q:<4} = {:.12}", lq_ball(&g, &s.phi1, q)?);
    }
    for (p, q) in [(2.0, f64::INFINITY), (5.0, 10.0), (f64::INFINITY, 6.0)] {
        println!("admissible {}", StrichartzExponents::new(p, q)?.label());
    }
    println!("(4, 4) rejected: {}", StrichartzExponents::new(4.0, 4.0).is_err());
    Ok(())
}

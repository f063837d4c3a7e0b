use critwave::lab::{ensemble, linear_bound_experiment, BoundKind, LinearFlow, RandomDataSpec};
use critwave::spaces::StrichartzExponents;
use critwave::specgrid::Grid;
use critwave::Result;

/// Strichartz and energy bounds of the free and projected linear flows on a random ensemble.
fn main() -> Result<()> {
    let g = Grid::new(24)?;
    let members = ensemble(&RandomDataSpec::default(), &g, 20);
    for flow in [LinearFlow::Free, LinearFlow::Projected] {
        for (p, q) in [(2.0, f64::INFINITY), (5.0, 10.0), (f64::INFINITY, 6.0)] {
            let e = StrichartzExponents::new(p, q)?;
            let r = linear_bound_experiment(&g, BoundKind::Strichartz(e), flow, &members, 20.0)?;
            println!("{flow:?} {}  max ratio {:.5}", e.label(), r.max_ratio);
        }
    }
    let r = linear_bound_experiment(&g, BoundKind::Energy, LinearFlow::Projected, &members, 20.0)?;
    println!("energy: sup ratio {:.5}  max log-slope on [10, 20] {:+.2e}", r.max_ratio, r.max_slope);
    Ok(())
}

use critwave::simcoords::{c3, gauge_values, to_similarity, CoordinateFrame, PhysicalData};
use critwave::specgrid::Grid;
use critwave::Result;

/// The ODE blowup u^{T'} seen in the frame T = 1: data map and closed-form flow.
fn main() -> Result<()> {
    let g = Grid::new(8)?;
    let frame = CoordinateFrame::new(1.0)?;
    println!("c3 = {:.15}", c3());
    for tp in [0.98, 1.0, 1.02, 1.05] {
        let data = PhysicalData::ode_blowup(tp, 1.5)?;
        let phi = to_similarity(&data, &frame, &g)?;
        let (a, b) = gauge_values(tp, 1.0, 0.0)?;
        print!("T' = {tp:.2}  phi(0) = ({:+.6}, {:+.6})  closed ({a:+.6}, {b:+.6})", phi.phi1[0], phi.phi2[0]);
        match gauge_values(tp, 1.0, 3.0) {
            Ok((a, _)) => println!("  phi1(tau=3) = {a:+.6}"),
            Err(e) => println!("  {e}"),
        }
    }
    Ok(())
}

use critwave::lab::{Shooter, StabilityConfig};
use critwave::simcoords::PhysicalData;
use critwave::Result;

/// Recovering the blowup time of shifted ODE blowup data by bisection.
fn main() -> Result<()> {
    let cfg = StabilityConfig { order: 12, tau_max: 12.0, t_tol: 1e-11, ..StabilityConfig::default() };
    let shooter = Shooter::new(&cfg)?;
    for tp in [0.98, 1.0, 1.02, 1.05] {
        let data = PhysicalData::ode_blowup(tp, cfg.radius)?;
        let shot = shooter.find_blowup_time(&data, (tp - 1.0f64).abs().max(1e-3))?;
        println!("T' = {tp:.2}  T* = {:.12}  shots = {}", shot.t_star, shot.trace.len());
    }
    Ok(())
}

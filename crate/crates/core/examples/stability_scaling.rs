use critwave::lab::{stability_experiment, StabilityConfig};
use critwave::Result;

/// Quadratic dependence of the similarity-time L²L^∞ norm on the perturbation size.
fn main() -> Result<()> {
    let cfg = StabilityConfig { members: 4, ..StabilityConfig::default() };
    let r = stability_experiment(&cfg)?;
    for m in &r.records {
        println!("delta {:.0e} member {}  T* = {:.10}  S = {:.4e}", m.delta, m.member, m.t_star, m.s_value);
    }
    println!("slope {:.4}  max S/delta^2 {:.4}  C {:.3}", r.slope, r.max_ratio, r.c_fit);
    Ok(())
}

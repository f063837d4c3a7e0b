use critwave::oscint::{KernelConfig, KernelTable};
use critwave::resolvent::PotentialSpec;
use critwave::Result;

/// Perturbation kernel of the Green function against its decay envelope.
fn main() -> Result<()> {
    let points = [0.1, 0.3, 0.5, 0.7, 0.9];
    let cfg = KernelConfig { omega_max: 60.0, ..KernelConfig::default() };
    let table = KernelTable::build(&points, cfg)?;
    let mut worst = [0.0_f64; 2];
    for (j, om) in [30.0, 60.0].into_iter().enumerate() {
        for &r in &points {
            for &s in &points {
                for tau in [0.0, 1.0, 2.0, 4.0, 8.0] {
                    worst[j] = worst[j].max(table.sample(r, s, tau, om)?.ratio);
                }
            }
        }
    }
    println!("max |K|/E: Omega 30 -> {:.4}, Omega 60 -> {:.4}", worst[0], worst[1]);

    let free = KernelConfig { potential: PotentialSpec::Zero, omega_max: 20.0, ..KernelConfig::default() };
    let k = KernelTable::build(&[0.3, 0.5], free)?.sample(0.3, 0.5, 2.0, 20.0)?;
    println!("free control K = {:.2e}", k.k);
    Ok(())
}

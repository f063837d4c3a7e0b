use critwave::hyp::{f21, w0_closed, zero_scan, ScanStrip};
use critwave::Result;
use num_complex::Complex64;

/// Gauss hypergeometric function and the zero-free strip of the scaled Wronskian.
fn main() -> Result<()> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    // 2F1(1, 1; 2; z) = −log(1 − z)/z
    for z in [0.3, 0.9, -3.0] {
        let v = f21(c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(z, 0.0))?;
        println!("2F1(1,1;2;{z}) = {:.15}  exact {:.15}", v.re, -(1.0 - z).ln() / z);
    }
    println!("w0(0)     = {:.15}", w0_closed(c(0.0, 0.0))?);
    println!("w0(1)     = {:.3e}", w0_closed(c(1.0, 0.0))?.norm());
    let strip = ScanStrip { eps_step: 0.02, omega_step: 0.25, ..ScanStrip::new((0.01, 1.0 / 3.0), (-50.0, 50.0)) };
    let r = zero_scan(&strip)?;
    println!(
        "strip minimum |w0| = {:.6} at {:.4}{:+.4}i over {} points",
        r.min_abs_w0, r.argmin_re, r.argmin_im, r.grid_points
    );
    let wide = zero_scan(&ScanStrip { eps_step: 0.05, omega_step: 0.25, ..ScanStrip::new((0.5, 1.5), (-1.0, 1.0)) })?;
    println!("widened minimum |w0| = {:.2e} at {:.8}", wide.min_abs_w0, wide.argmin_re);
    Ok(())
}

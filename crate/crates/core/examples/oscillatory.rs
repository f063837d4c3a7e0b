use critwave::oscint::{osc_check, osc_closed_form, OscSample};
use critwave::Result;

/// Fourier integrals of model symbols and their ⟨a⟩⁻² decay.
fn main() -> Result<()> {
    for s in [OscSample::Even, OscSample::Odd, OscSample::Mix] {
        let mut sup = 0.0_f64;
        for k in 0..=5 {
            let a = f64::from(1 << k);
            let r = osc_check(s, a)?;
            let err = (r.integral - osc_closed_form(s, a)).norm();
            println!("{s:?} a = {a:>2}  I = {:+.10}  error {err:.1e}  <a>^2|I| = {:.6}", r.integral, r.scaled);
            sup = sup.max(r.scaled);
        }
        println!("{s:?} sup {sup:.6}");
    }
    Ok(())
}

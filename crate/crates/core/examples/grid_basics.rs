use critwave::specgrid::Grid;
use critwave::Result;

/// Collocation on [0, 1]: derivative, quadrature and interpolation of a smooth function.
fn main() -> Result<()> {
    for n in [8, 16, 32] {
        let g = Grid::new(n)?;
        let f = g.sample(|r| (3.0 * r).sin() * (-r * r).exp());
        let df = g.differentiate(&f)?;
        let exact = |r: f64| (-r * r).exp() * (3.0 * (3.0 * r).cos() - 2.0 * r * (3.0 * r).sin());
        let derr = g.nodes().iter().zip(&df).map(|(r, d)| (d - exact(*r)).abs()).fold(0.0, f64::max);

        // ∫₀¹ ρ⁴ dρ
        let q = g.integrate(&g.sample(|r| r.powi(4)))? - 0.2;
        let i = g.interpolate(&f, 0.37)? - (3.0 * 0.37_f64).sin() * (-0.37_f64 * 0.37).exp();
        println!("N = {n:>2}  derivative error {derr:.2e}  quadrature error {q:.1e}  interpolation error {i:.1e}");
    }
    Ok(())
}

//! Asymptotic power of the competing tests against local skew alternatives.

use ellsym::are::{
    local_power, noncentrality_pg, noncentrality_semiparam, noncentrality_specified,
};
use ellsym::radial::RadialDensity;
use ellsym::ulan::PI_DOT_GAUSSIAN;
use nalgebra::DVector;

fn main() -> ellsym::Result<()> {
    let d = 3;
    let f = RadialDensity::student(4.0, d)?;
    let g = RadialDensity::student(5.0, d)?;
    println!(
        "{:>6} {:>10} {:>10} {:>10}",
        "|tau|", "specified", "semi-t4", "pG"
    );
    for k in 0..=6 {
        let tau = DVector::from_element(d, 0.5 * k as f64 / (d as f64).sqrt());
        let p = |delta: f64| local_power(delta, d, 0.05);
        println!(
            "{:>6.2} {:>10.3} {:>10.3} {:>10.3}",
            tau.norm(),
            p(noncentrality_specified(PI_DOT_GAUSSIAN, &tau))?,
            p(noncentrality_semiparam(&f, &g, PI_DOT_GAUSSIAN, &tau)?)?,
            p(noncentrality_pg(&g, PI_DOT_GAUSSIAN, &tau)?)?,
        );
    }
    Ok(())
}

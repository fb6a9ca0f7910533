//! Efficiency of the semiparametric tests relative to the pseudo-Gaussian test,
//! alongside the published values.

use ellsym::harness::cmd_are;
use ellsym::radial::RadialFamily;

fn main() {
    let refs: Vec<RadialFamily> = [4.0, 5.0, 7.0, 10.0, 20.0]
        .iter()
        .map(|&nu| RadialFamily::student(nu))
        .collect();
    let actuals: Vec<RadialFamily> = [4.1, 5.0, 7.0, 10.0, 20.0]
        .iter()
        .map(|&nu| RadialFamily::student(nu))
        .collect();
    for row in cmd_are(&[3], &refs, &actuals) {
        let are = row
            .are
            .map(|a| format!("{a:.3}"))
            .unwrap_or_else(|| "-".into());
        let published = row
            .published
            .map(|a| format!("{a:.3}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "d={} f={:<4} g={:<5} ARE={:>7} published={:>7}",
            row.d, row.reference, row.g, are, published
        );
    }
}

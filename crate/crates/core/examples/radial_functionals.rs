//! Radial scores and information functionals of standardized Student densities.

use ellsym::radial::{
    alpha_const, cross_info, fisher_location, gamma_const, gamma_pg, RadialDensity,
};

fn main() -> ellsym::Result<()> {
    let d = 3;
    println!(
        "{:<8} {:>10} {:>10} {:>10} {:>12}",
        "f", "I_f", "phi(1)", "phi'(1)", "gamma_pG"
    );
    for nu in [4.1, 5.0, 10.0, 20.0] {
        let f = RadialDensity::student(nu, d)?;
        println!(
            "{:<8} {:>10.5} {:>10.5} {:>10.5} {:>12.5}",
            f.label(),
            fisher_location(&f)?,
            f.phi(1.0),
            f.phi_prime(1.0),
            gamma_pg(&f)?
        );
    }

    let f = RadialDensity::student(4.0, d)?;
    let g = RadialDensity::student(10.0, d)?;
    println!();
    println!("reference t4, actual t10:");
    println!("  K     = {:.6}", cross_info(&f, &g)?);
    println!("  alpha = {:.6}", alpha_const(&f, &g)?);
    println!("  gamma = {:.6}", gamma_const(&f, &g)?);
    Ok(())
}

//! Location-free tests: semiparametric Student-reference tests and the
//! pseudo-Gaussian competitor, on a null and a skew-t sample.

use ellsym::estimators::EstimatorChoice;
use ellsym::harness::skew_alternative;
use ellsym::radial::{RadialDensity, RadialFamily};
use ellsym::samplers::RngStream;
use ellsym::testing::{test_cassart_pg, test_parametric, test_semiparam_scaled, ReferenceScale};

fn main() -> ellsym::Result<()> {
    let choice: EstimatorChoice = "hr/tyler".parse()?;
    let t4 = RadialDensity::student(4.0, 3)?;
    for lambda in [[0.0; 3], [2.0, 2.0, 2.0]] {
        let x = skew_alternative(RadialFamily::student(4.1), &lambda)
            .sample(200, RngStream::new(3, 1))?;
        println!("skew-t4.1, lambda = {lambda:?}");
        let results = [
            test_semiparam_scaled(&x, &t4, ReferenceScale::Standardized, choice)?,
            test_semiparam_scaled(&x, &t4, ReferenceScale::Raw, choice)?,
            test_parametric(&x, &t4, choice)?,
            test_cassart_pg(&x, choice)?,
        ];
        for r in results {
            println!(
                "  {:<18} Q = {:>8.3}  p = {:.4}  [{}]",
                r.test_name, r.statistic, r.p_value, r.estimators
            );
        }
    }
    Ok(())
}

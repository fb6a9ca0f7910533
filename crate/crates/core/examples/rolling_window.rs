//! Rolling-window p-values on a dated series whose second half is skewed.

use std::fmt::Write;

use ellsym::estimators::EstimatorChoice;
use ellsym::harness::{cmd_rolling, skew_alternative, Dataset};
use ellsym::radial::RadialFamily;
use ellsym::samplers::RngStream;
use ellsym::testing::TestKind;

fn main() -> ellsym::Result<()> {
    let calm = skew_alternative(RadialFamily::student(8.0), &[0.0; 3])
        .sample(300, RngStream::new(1, 0))?;
    let skewed = skew_alternative(RadialFamily::student(8.0), &[3.0; 3])
        .sample(300, RngStream::new(1, 1))?;

    let mut csv = String::from("day,a,b,c\n");
    for (i, row) in calm.row_iter().chain(skewed.row_iter()).enumerate() {
        writeln!(csv, "d{i:03},{},{},{}", row[0], row[1], row[2]).unwrap();
    }
    let data = Dataset::from_reader(csv.as_bytes())?;

    let tests: Vec<TestKind> = vec!["semiparam-t4-raw".parse()?, "cassart-pg".parse()?];
    let rows = cmd_rolling(&data, 150, 75, &tests, None, EstimatorChoice::default())?;
    for r in rows {
        println!(
            "{}..{}  {:<18} p = {:.4}",
            r.start_label.unwrap_or_default(),
            r.end_label.unwrap_or_default(),
            r.test,
            r.p_value
        );
    }
    Ok(())
}

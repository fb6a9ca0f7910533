//! A small rejection-frequency study built from the presets, saved as CSV.

use ellsym::harness::{run_simulation, unspecified_study, ResultTable};
use ellsym::radial::RadialFamily;

fn main() -> ellsym::Result<()> {
    let cfg = unspecified_study(RadialFamily::student(8.0), 100, 200, 17);
    let table = run_simulation(&cfg)?;
    print!("{table}");

    let path = std::env::temp_dir().join("ellsym_monte_carlo.csv");
    table.save(&path)?;
    let back = ResultTable::load(&path)?;
    println!(
        "saved {} rows to {} (config {})",
        back.rows.len(),
        path.display(),
        back.config_hash
    );
    Ok(())
}

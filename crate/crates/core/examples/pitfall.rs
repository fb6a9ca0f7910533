//! Two shifted copies of the same non-elliptical mixture: the specified-location
//! test sees only the location, the location-free test sees the asymmetry in both.

use ellsym::harness::{run_pitfall, PitfallConfig};

fn main() -> ellsym::Result<()> {
    let report = run_pitfall(PitfallConfig {
        replications: 200,
        ..Default::default()
    })?;
    print!("{report}");
    Ok(())
}

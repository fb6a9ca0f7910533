//! Chi-square tail probabilities and a simulated null table with its p-values.

use ellsym::statdist::{chi2_quantile, chi2_sf, noncentral_chi2_sf};
use ellsym::testing::{baringhaus_null_table, BaringhausCalibration};

fn main() -> ellsym::Result<()> {
    for df in [2.0, 3.0, 10.0] {
        let q = chi2_quantile(0.95, df)?;
        println!(
            "df={df:>4}: 95% quantile {q:.4}, sf(q) = {:.4}, power at delta=5: {:.4}",
            chi2_sf(q, df)?,
            noncentral_chi2_sf(q, df, 5.0)?
        );
    }

    let cal = BaringhausCalibration {
        replications: 2000,
        ..Default::default()
    };
    let table = baringhaus_null_table(2, 50, cal)?;
    let key = table.key();
    let mut v = table.values().to_vec();
    v.sort_by(f64::total_cmp);
    let (median, q95) = (v[v.len() / 2], v[v.len() * 95 / 100]);
    println!(
        "{} d={} n={}: {} values",
        key.statistic,
        key.dim,
        key.sample_size,
        table.replications()
    );
    println!(
        "  p(median = {median:.4}) = {:.3}, p(q95 = {q95:.4}) = {:.3}",
        table.pvalue(median),
        table.pvalue(q95)
    );
    Ok(())
}

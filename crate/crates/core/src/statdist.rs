//! Chi-square distribution functions, the noncentral survival function and
//! simulated null tables for statistics without a usable limiting law.

use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

fn check_df(df: f64) -> Result<()> {
    if !(df.is_finite() && df > 0.0) {
        return Err(Error::Contract(format!(
            "degrees of freedom must be positive, got {df}"
        )));
    }
    Ok(())
}

/// Distribution function of the chi-square law with `df` degrees of freedom.
pub fn chi2_cdf(x: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::Contract(format!(
            "chi-square argument must be >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(gamma_lr(df / 2.0, x / 2.0))
}

/// Survival function `1 - chi2_cdf`, computed without cancellation.
pub fn chi2_sf(x: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::Contract(format!(
            "chi-square argument must be >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma_ur(df / 2.0, x / 2.0))
}

fn chi2_ln_pdf(x: f64, df: f64) -> f64 {
    let k = df / 2.0;
    (k - 1.0) * x.ln() - x / 2.0 - k * 2f64.ln() - ln_gamma(k)
}

/// Quantile of the chi-square law: the `x` with `chi2_cdf(x, df) == p`.
pub fn chi2_quantile(p: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Contract(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }
    let mut lo = 0.0;
    let mut hi = df.max(1.0);
    while chi2_cdf(hi, df)? < p {
        lo = hi;
        hi *= 2.0;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let c = chi2_cdf(x, df)?;
        let diff = c - p;
        if diff.abs() < 1e-15 {
            break;
        }
        if diff > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        // Newton step, falling back to bisection when it leaves the bracket
        let newton = x - diff / chi2_ln_pdf(x, df).exp();
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-14 * hi {
            break;
        }
    }
    Ok(x)
}

const SERIES_CAP: usize = 10_000;
const SERIES_TAIL: f64 = 1e-12;

/// Survival function of the noncentral chi-square law, as a Poisson mixture
/// of central survival functions summed outward from the Poisson mode.
pub fn noncentral_chi2_sf(x: f64, df: f64, delta: f64) -> Result<f64> {
    check_df(df)?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::Contract(format!(
            "noncentrality must be >= 0, got {delta}"
        )));
    }
    if delta == 0.0 {
        return chi2_sf(x, df);
    }
    if chi2_sf(x, df)? == 1.0 {
        return Ok(1.0);
    }
    let lambda = delta / 2.0;
    let mode = lambda.floor() as usize;
    let ln_weight = |j: usize| -lambda + j as f64 * lambda.ln() - ln_gamma(j as f64 + 1.0);
    let term = |j: usize| -> Result<(f64, f64)> {
        let w = ln_weight(j).exp();
        Ok((w, w * chi2_sf(x, df + 2.0 * j as f64)?))
    };

    let (w0, t0) = term(mode)?;
    let mut total = t0;
    let mut mass = w0;
    let mut terms = 1;
    let mut j = mode;
    while j > 0 {
        j -= 1;
        let (w, t) = term(j)?;
        total += t;
        mass += w;
        terms += 1;
        if w < SERIES_TAIL * mass {
            break;
        }
    }
    let mut j = mode;
    loop {
        j += 1;
        let (w, t) = term(j)?;
        total += t;
        mass += w;
        terms += 1;
        // remaining Poisson mass beyond j is below w * r / (1 - r) with r = lambda / (j + 1)
        let r = lambda / (j as f64 + 1.0);
        if r < 1.0 && w * r / (1.0 - r) < SERIES_TAIL * mass.max(f64::MIN_POSITIVE) {
            break;
        }
        if terms >= SERIES_CAP {
            return Err(Error::NumericalFailure(format!(
                "noncentral chi-square series did not converge (x={x}, df={df}, delta={delta})"
            )));
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Generalized Marcum Q-function `Q_m(a, b)`.
pub fn marcum_q(m: f64, a: f64, b: f64) -> Result<f64> {
    if !(m >= 0.5) || !(a >= 0.0) || !(b >= 0.0) {
        return Err(Error::Contract(format!(
            "marcum_q needs m >= 1/2, a, b >= 0 (m={m}, a={a}, b={b})"
        )));
    }
    noncentral_chi2_sf(b * b, 2.0 * m, a * a)
}

/// Minimum number of replications accepted for a simulated null table.
pub const MIN_NULL_REPLICATIONS: usize = 1000;

/// Sorted sample of a statistic simulated under the null.
#[derive(Debug, Clone, PartialEq)]
pub struct NullTable {
    pub statistic: String,
    pub dim: usize,
    pub sample_size: usize,
    pub seed: u64,
    values: Vec<f64>,
}

/// Key identifying a null table in a cache.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NullTableKey {
    pub statistic: String,
    pub dim: usize,
    pub sample_size: usize,
    pub replications: usize,
    pub seed: u64,
}

impl NullTableKey {
    fn file_name(&self) -> String {
        format!(
            "{}_d{}_n{}_r{}_s{}.csv",
            self.statistic, self.dim, self.sample_size, self.replications, self.seed
        )
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct NullTableRow {
    statistic: String,
    dim: usize,
    n: usize,
    replications: usize,
    seed: u64,
    value: f64,
}

impl NullTable {
    /// Builds a table from raw simulated values.
    pub fn from_values(
        statistic: &str,
        dim: usize,
        sample_size: usize,
        seed: u64,
        mut values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() < MIN_NULL_REPLICATIONS {
            return Err(Error::Config(format!(
                "null tables need at least {MIN_NULL_REPLICATIONS} replications, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure(
                "non-finite simulated null statistic".into(),
            ));
        }
        values.sort_by(f64::total_cmp);
        Ok(NullTable {
            statistic: statistic.to_string(),
            dim,
            sample_size,
            seed,
            values,
        })
    }

    pub fn replications(&self) -> usize {
        self.values.len()
    }

    /// Simulated values in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn key(&self) -> NullTableKey {
        NullTableKey {
            statistic: self.statistic.clone(),
            dim: self.dim,
            sample_size: self.sample_size,
            replications: self.replications(),
            seed: self.seed,
        }
    }

    /// Add-one Monte Carlo p-value `(1 + #{T >= observed}) / (R + 1)`.
    pub fn pvalue(&self, observed: f64) -> f64 {
        let below = self.values.partition_point(|&v| v < observed);
        let at_least = self.values.len() - below;
        (1 + at_least) as f64 / (self.values.len() + 1) as f64
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
        for &value in &self.values {
            w.serialize(NullTableRow {
                statistic: self.statistic.clone(),
                dim: self.dim,
                n: self.sample_size,
                replications: self.values.len(),
                seed: self.seed,
                value,
            })
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_reader(File::open(path)?);
        let mut head: Option<NullTableRow> = None;
        let mut values = Vec::new();
        for (i, row) in r.deserialize::<NullTableRow>().enumerate() {
            let row = row.map_err(|e| Error::Parse {
                line: i + 2,
                message: e.to_string(),
            })?;
            if let Some(h) = &head {
                if h.statistic != row.statistic
                    || h.dim != row.dim
                    || h.n != row.n
                    || h.seed != row.seed
                {
                    return Err(Error::Parse {
                        line: i + 2,
                        message: "inconsistent table metadata".into(),
                    });
                }
            }
            values.push(row.value);
            head.get_or_insert(row);
        }
        let head = head.ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty null table".into(),
        })?;
        if head.replications != values.len() {
            return Err(Error::Parse {
                line: values.len() + 1,
                message: format!(
                    "expected {} values, found {}",
                    head.replications,
                    values.len()
                ),
            });
        }
        NullTable::from_values(&head.statistic, head.dim, head.n, head.seed, values)
    }
}

/// Simulates a null table; `draw(r)` returns the statistic for replication `r`
/// and must depend on `r` only through deterministic substreams.
pub fn simulate_null_table<F>(
    statistic: &str,
    dim: usize,
    sample_size: usize,
    replications: usize,
    seed: u64,
    draw: F,
) -> Result<NullTable>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    if replications < MIN_NULL_REPLICATIONS {
        return Err(Error::Config(format!(
            "null tables need at least {MIN_NULL_REPLICATIONS} replications, got {replications}"
        )));
    }
    let values = (0..replications as u64)
        .into_par_iter()
        .map(&draw)
        .collect::<Result<Vec<f64>>>()?;
    NullTable::from_values(statistic, dim, sample_size, seed, values)
}

pub fn table_pvalue(table: &NullTable, observed: f64) -> f64 {
    table.pvalue(observed)
}

/// Concurrent cache of null tables, optionally backed by a directory of CSV files.
/// Readers share a lock; a missing table is simulated once under the write lock.
#[derive(Debug, Default)]
pub struct NullTableCache {
    dir: Option<PathBuf>,
    tables: RwLock<HashMap<NullTableKey, Arc<NullTable>>>,
}

impl NullTableCache {
    pub fn in_memory() -> Self {
        NullTableCache::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        NullTableCache {
            dir: Some(dir.into()),
            tables: RwLock::default(),
        }
    }

    pub fn get(&self, key: &NullTableKey) -> Option<Arc<NullTable>> {
        self.tables
            .read()
            .expect("null table cache poisoned")
            .get(key)
            .cloned()
    }

    pub fn get_or_simulate(
        &self,
        key: &NullTableKey,
        simulate: impl FnOnce() -> Result<NullTable>,
    ) -> Result<Arc<NullTable>> {
        if let Some(t) = self.get(key) {
            return Ok(t);
        }
        let mut tables = self.tables.write().expect("null table cache poisoned");
        if let Some(t) = tables.get(key) {
            return Ok(t.clone());
        }
        let path = self.dir.as_ref().map(|d| d.join(key.file_name()));
        let from_disk = match &path {
            Some(p) if p.exists() => match NullTable::read_csv(p) {
                Ok(t) if &t.key() == key => Some(t),
                Ok(_) | Err(_) => {
                    log::warn!("ignoring unusable null table cache file {}", p.display());
                    None
                }
            },
            _ => None,
        };
        let table = match from_disk {
            Some(t) => t,
            None => {
                let t = simulate()?;
                if let Some(p) = &path {
                    std::fs::create_dir_all(p.parent().expect("cache file has a parent"))?;
                    t.write_csv(p)?;
                }
                t
            }
        };
        let table = Arc::new(table);
        tables.insert(key.clone(), table.clone());
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn cdf_basics() {
        assert_eq!(chi2_cdf(0.0, 3.0).unwrap(), 0.0);
        assert!((chi2_cdf(7.8147, 3.0).unwrap() - 0.95).abs() < 1e-4);
        for x in [0.1, 1.0, 3.7, 12.0] {
            assert!((chi2_cdf(x, 2.0).unwrap() - (1.0 - (-x / 2.0f64).exp())).abs() < 1e-14);
        }
        assert!(chi2_cdf(1.0, 0.0).is_err());
        assert!(chi2_cdf(-1.0, 2.0).is_err());
    }

    #[test]
    fn cdf_strictly_increasing() {
        for d in 1..=20 {
            let mut prev = 0.0;
            for k in 1..400 {
                let c = chi2_cdf(k as f64 * 0.1, d as f64).unwrap();
                assert!(c > prev || c == 1.0, "d={d}");
                prev = c;
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for d in [1.0, 2.0, 3.0, 5.0, 10.0] {
            for x in [0.5, 1.0, 5.0, 20.0] {
                let p = chi2_cdf(x, d).unwrap();
                let q = chi2_quantile(p, d).unwrap();
                assert!((chi2_cdf(q, d).unwrap() - p).abs() < 1e-8);
                assert!((q - x).abs() < 1e-6 * x.max(1.0), "d={d} x={x} q={q}");
            }
        }
        assert!((chi2_quantile(0.5, 2.0).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-10);
        let z = 1.959963984540054;
        assert!((chi2_quantile(0.95, 1.0).unwrap() - z * z).abs() < 1e-8);
        assert!(chi2_quantile(0.0, 2.0).is_err());
        assert!(chi2_quantile(1.0, 2.0).is_err());
    }

    #[test]
    fn noncentral_reduces_to_central() {
        for d in [1.0, 3.0, 7.0] {
            for x in [0.3, 2.0, 9.0] {
                let a = noncentral_chi2_sf(x, d, 0.0).unwrap();
                assert!((a - (1.0 - chi2_cdf(x, d).unwrap())).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn noncentral_increases_with_delta() {
        for d in [1.0, 3.0, 10.0] {
            for x in [1.0, 5.0, 15.0] {
                let mut prev = noncentral_chi2_sf(x, d, 0.0).unwrap();
                for k in 1..60 {
                    let s = noncentral_chi2_sf(x, d, k as f64 * 0.5).unwrap();
                    assert!(s > prev, "d={d} x={x} delta={}", k as f64 * 0.5);
                    prev = s;
                }
            }
        }
        // large noncentrality still converges within the cap
        let s = noncentral_chi2_sf(900.0, 3.0, 1000.0).unwrap();
        assert!(s > 0.9 && s < 1.0);
    }

    #[test]
    fn noncentral_matches_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (d, mu) = (3usize, [1.0, -0.5, 1.5]);
        let delta: f64 = mu.iter().map(|m| m * m).sum();
        let x = 8.0;
        let draws = 1_000_000;
        let mut hits = 0usize;
        for _ in 0..draws {
            let mut s = 0.0;
            for m in mu.iter().take(d) {
                let z: f64 = rng.sample(StandardNormal);
                s += (z + m) * (z + m);
            }
            if s > x {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / draws as f64;
        let p = noncentral_chi2_sf(x, d as f64, delta).unwrap();
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((p_hat - p).abs() < 3.0 * se, "{p_hat} vs {p}");
    }

    #[test]
    fn marcum_identities() {
        for d in [1usize, 2, 3, 5, 10] {
            for delta in [0.0f64, 1.0, 4.0, 9.0] {
                for x in [1.0f64, 5.0, 10.0] {
                    let m = marcum_q(d as f64 / 2.0, delta.sqrt(), x.sqrt()).unwrap();
                    let n = noncentral_chi2_sf(x, d as f64, delta).unwrap();
                    assert!((m - n).abs() < 1e-8);
                }
            }
        }
        assert!((marcum_q(1.0, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let b: f64 = 2.0;
        assert!(
            (marcum_q(1.5, 0.0, b).unwrap() - (1.0 - chi2_cdf(b * b, 3.0).unwrap())).abs() < 1e-12
        );
        // Q_1(a, b) = exp(-(a^2 + b^2)/2) sum_k (a/b)^k I_k(ab); for a = 0, exp(-b^2/2)
        assert!((marcum_q(1.0, 0.0, 1.3).unwrap() - (-1.3f64 * 1.3 / 2.0).exp()).abs() < 1e-14);
    }

    fn uniform_table(reps: usize) -> NullTable {
        simulate_null_table("unif", 1, 1, reps, 3, |r| {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            rng.set_stream(r);
            Ok(rng.random::<f64>())
        })
        .unwrap()
    }

    #[test]
    fn table_pvalue_extremes() {
        let t = uniform_table(1000);
        assert_eq!(t.replications(), 1000);
        assert!(t.values().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(t.pvalue(-1.0), 1.0);
        assert_eq!(t.pvalue(2.0), 1.0 / 1001.0);
        assert!(simulate_null_table("x", 1, 1, 999, 0, |_| Ok(0.0)).is_err());
    }

    #[test]
    fn table_simulation_is_deterministic() {
        assert_eq!(uniform_table(2000), uniform_table(2000));
    }

    #[test]
    fn table_pvalues_are_uniform_under_the_null() {
        let t = uniform_table(5000);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut ps: Vec<f64> = (0..500).map(|_| t.pvalue(rng.random::<f64>())).collect();
        ps.sort_by(f64::total_cmp);
        let n = ps.len() as f64;
        let ks = ps
            .iter()
            .enumerate()
            .map(|(i, &p)| (p - i as f64 / n).abs().max(((i + 1) as f64 / n - p).abs()))
            .fold(0.0, f64::max);
        assert!(ks < 0.05, "KS distance {ks}");
    }

    #[test]
    fn csv_round_trip_and_cache() {
        let dir = tempfile::tempdir().unwrap();
        let t = uniform_table(1000);
        let p = dir.path().join("t.csv");
        t.write_csv(&p).unwrap();
        assert_eq!(NullTable::read_csv(&p).unwrap(), t);

        let cache = NullTableCache::with_dir(dir.path().join("cache"));
        let key = t.key();
        let first = cache.get_or_simulate(&key, || Ok(t.clone())).unwrap();
        assert_eq!(*first, t);
        let again = cache
            .get_or_simulate(&key, || panic!("must not resimulate"))
            .unwrap();
        assert!(Arc::ptr_eq(&first, &again));
        // a fresh cache on the same directory reads the file instead of simulating
        let fresh = NullTableCache::with_dir(dir.path().join("cache"));
        let loaded = fresh
            .get_or_simulate(&key, || panic!("must read from disk"))
            .unwrap();
        assert_eq!(*loaded, t);
    }

    #[test]
    fn cache_is_shared_across_threads() {
        let cache = NullTableCache::in_memory();
        let key = uniform_table(1000).key();
        let calls = std::sync::atomic::AtomicUsize::new(0);
        std::thread::scope(|s| {
            for _ in 0..8 {
                s.spawn(|| {
                    cache
                        .get_or_simulate(&key, || {
                            calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                            Ok(uniform_table(1000))
                        })
                        .unwrap();
                });
            }
        });
        assert_eq!(calls.load(std::sync::atomic::Ordering::SeqCst), 1);
    }
}

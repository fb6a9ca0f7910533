//! The test procedures: the specified-location test, the f-parametric and
//! f-semiparametric skewness tests, the pseudo-Gaussian test of Cassart with
//! its specified-location variant, and Baringhaus' test of sphericity.
//!
//! All chi-square tests are computed through weighted sums of multivariate
//! signs, `|sum_i w_i U_i|^2`, which is the closed form of the double sums
//! `sum_i sum_j w_i w_j U_i'U_j`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorChoice;
use crate::radial::{c_d, fisher_location, gamma_pg_from_ratios, RadialDensity, RadialFamily};
use crate::samplers::RngStream;
use crate::statdist::{chi2_sf, simulate_null_table, NullTable, NullTableCache, NullTableKey};
use crate::ulan::{decompose, SampleDecomposition, PI_DOT_GAUSSIAN};

/// Below this `|K_hat|` the semiparametric projection is treated as singular.
pub const K_HAT_MIN: f64 = 1e-8;

/// Whether the location was given or estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "theta0", rename_all = "kebab-case")]
pub enum LocationMode {
    Specified(Vec<f64>),
    Unspecified,
}

impl fmt::Display for LocationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocationMode::Specified(t) => {
                let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
                write!(f, "specified({})", parts.join(","))
            }
            LocationMode::Unspecified => write!(f, "unspecified"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test_name: String,
    pub statistic: f64,
    /// Chi-square degrees of freedom; `None` when calibrated by a simulated null table.
    pub df: Option<usize>,
    pub p_value: f64,
    pub location_mode: LocationMode,
    pub reference_density: Option<String>,
    pub estimators: EstimatorChoice,
    pub n: usize,
    pub d: usize,
}

impl TestResult {
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value < level
    }
}

fn chi2_result(
    test_name: String,
    statistic: f64,
    location_mode: LocationMode,
    reference_density: Option<String>,
    estimators: EstimatorChoice,
    data: &DMatrix<f64>,
) -> Result<TestResult> {
    let (n, d) = data.shape();
    if !statistic.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "{test_name}: statistic is not finite"
        )));
    }
    let statistic = statistic.max(0.0);
    Ok(TestResult {
        p_value: chi2_sf(statistic, d as f64)?,
        test_name,
        statistic,
        df: Some(d),
        location_mode,
        reference_density,
        estimators,
        n,
        d,
    })
}

fn check_theta0(data: &DMatrix<f64>, theta0: &DVector<f64>) -> Result<()> {
    if theta0.len() != data.ncols() {
        return Err(Error::Config(format!(
            "theta0 has length {} but the data have {} columns",
            theta0.len(),
            data.ncols()
        )));
    }
    Ok(())
}

fn reference_for(f: &RadialDensity, d: usize) -> Result<()> {
    if f.dim() != d {
        return Err(Error::Contract(format!(
            "reference density has dimension {} but data {d}",
            f.dim()
        )));
    }
    if f.is_gaussian() {
        return Err(Error::DegenerateReference);
    }
    Ok(())
}

/// Specified-location statistic `n (xbar - theta0)' Sigma_hat^{-1} (xbar - theta0)`,
/// with `Sigma_hat` estimated about `theta0`.
pub fn test_specified(
    data: &DMatrix<f64>,
    theta0: &DVector<f64>,
    choice: EstimatorChoice,
) -> Result<TestResult> {
    check_theta0(data, theta0)?;
    let sigma = choice.scatter_about(data, theta0)?;
    let n = data.nrows() as f64;
    let diff = data.row_mean().transpose() - theta0;
    let q = n * sigma.quad_form_inv(&diff)?;
    chi2_result(
        "specified".into(),
        q,
        LocationMode::Specified(theta0.iter().cloned().collect()),
        None,
        choice,
        data,
    )
}

/// Weights `d_i - (d / c) phi_f(d_i)`.
fn projected_weights(dec: &SampleDecomposition, f: &RadialDensity, c: f64) -> DVector<f64> {
    let d = dec.dim() as f64;
    dec.distances.map(|r| r - d / c * f.phi(r))
}

/// `Delta' Gamma^{-1} Delta` for `Delta = 2 n^{-1/2} pi_dot sum_i w_i U_i` and
/// `Gamma = 4 pi_dot^2 v I`.
fn quadratic_form(dec: &SampleDecomposition, w: &DVector<f64>, v: f64, pi_dot: f64) -> f64 {
    let n = dec.n() as f64;
    let delta = dec.weighted_sign_sum(w) * (2.0 * pi_dot / n.sqrt());
    delta.norm_squared() / (4.0 * pi_dot * pi_dot * v)
}

/// `Q_f` from a decomposition at the estimated location, given `I_{d,f}`.
pub fn parametric_statistic(
    dec: &SampleDecomposition,
    f: &RadialDensity,
    info: f64,
    pi_dot: f64,
) -> Result<f64> {
    reference_for(f, dec.dim())?;
    let d = dec.dim() as f64;
    if !(info > d) {
        return Err(Error::DegenerateReference);
    }
    let w = projected_weights(dec, f, info);
    Ok(quadratic_form(dec, &w, (info - d) / info, pi_dot))
}

/// f-parametric test at an estimated location.
pub fn test_parametric(
    data: &DMatrix<f64>,
    f: &RadialDensity,
    choice: EstimatorChoice,
) -> Result<TestResult> {
    reference_for(f, data.ncols())?;
    let info = fisher_location(f)?;
    let (theta, sigma) = choice.estimate(data)?;
    let dec = decompose(data, &theta, &sigma)?;
    let q = parametric_statistic(&dec, f, info, PI_DOT_GAUSSIAN)?;
    chi2_result(
        format!("parametric-{}", f.label()),
        q,
        LocationMode::Unspecified,
        Some(f.label()),
        choice,
        data,
    )
}

/// Radial scaling of the reference score used by the semiparametric test.
///
/// `Standardized` uses `phi_f` of the density with `E[rho^2] = d`. `Raw` uses
/// the textbook Student score `(d + nu) r / (nu + r^2)`, evaluated on the same
/// distances; the test stays valid, only its efficiency profile moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceScale {
    #[default]
    Standardized,
    Raw,
}

/// `phi_f` and `phi_f'` of a reference at the requested scale.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceScores<'a> {
    f: &'a RadialDensity,
    c: f64,
}

impl<'a> ReferenceScores<'a> {
    pub fn new(f: &'a RadialDensity, scale: ReferenceScale) -> Self {
        // the raw score is phi_raw(r) = c phi(c r) with c the standardization factor
        let c = match scale {
            ReferenceScale::Standardized => 1.0,
            ReferenceScale::Raw => f.scale(),
        };
        ReferenceScores { f, c }
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.c * self.f.phi(self.c * r)
    }

    pub fn phi_prime(&self, r: f64) -> f64 {
        self.c * self.c * self.f.phi_prime(self.c * r)
    }

    fn label(&self) -> String {
        if self.c == 1.0 {
            self.f.label()
        } else {
            format!("{}-raw", self.f.label())
        }
    }
}

fn k_hat(dec: &SampleDecomposition, s: &ReferenceScores<'_>) -> Result<f64> {
    if s.f.dim() != dec.dim() {
        return Err(Error::Contract(
            "reference density and data dimensions differ".into(),
        ));
    }
    let d1 = dec.dim() as f64 - 1.0;
    let k = dec
        .distances
        .iter()
        .map(|&r| s.phi_prime(r) + d1 * s.phi(r) / r)
        .sum::<f64>()
        / dec.n() as f64;
    if !k.is_finite() {
        return Err(Error::NumericalFailure("K_hat is not finite".into()));
    }
    if k.abs() < K_HAT_MIN {
        return Err(Error::Degenerate(format!(
            "K_hat = {k:e} makes the projection singular"
        )));
    }
    Ok(k)
}

/// `K_hat = (1/n) sum_i [phi_f'(d_i) + (d - 1) phi_f(d_i) / d_i]`.
pub fn estimate_k(dec: &SampleDecomposition, f: &RadialDensity) -> Result<f64> {
    k_hat(dec, &ReferenceScores::new(f, ReferenceScale::Standardized))
}

/// `Q_dagger` from a decomposition at the estimated location.
pub fn semiparam_statistic(
    dec: &SampleDecomposition,
    f: &RadialDensity,
    pi_dot: f64,
) -> Result<f64> {
    semiparam_statistic_scaled(dec, f, ReferenceScale::Standardized, pi_dot)
}

pub fn semiparam_statistic_scaled(
    dec: &SampleDecomposition,
    f: &RadialDensity,
    scale: ReferenceScale,
    pi_dot: f64,
) -> Result<f64> {
    reference_for(f, dec.dim())?;
    let s = ReferenceScores::new(f, scale);
    let k = k_hat(dec, &s)?;
    let d = dec.dim() as f64;
    let w = dec.distances.map(|r| r - d / k * s.phi(r));
    let ss = w.norm_squared();
    if !(ss > 0.0) {
        return Err(Error::Degenerate(
            "all semiparametric weights vanish".into(),
        ));
    }
    let v = ss / (dec.n() as f64 * d);
    Ok(quadratic_form(dec, &w, v, pi_dot))
}

/// f-semiparametric test, valid under any admissible elliptical density.
pub fn test_semiparam(
    data: &DMatrix<f64>,
    f: &RadialDensity,
    choice: EstimatorChoice,
) -> Result<TestResult> {
    test_semiparam_scaled(data, f, ReferenceScale::Standardized, choice)
}

pub fn test_semiparam_scaled(
    data: &DMatrix<f64>,
    f: &RadialDensity,
    scale: ReferenceScale,
    choice: EstimatorChoice,
) -> Result<TestResult> {
    reference_for(f, data.ncols())?;
    let (theta, sigma) = choice.estimate(data)?;
    let dec = decompose(data, &theta, &sigma)?;
    let q = semiparam_statistic_scaled(&dec, f, scale, PI_DOT_GAUSSIAN)?;
    let label = ReferenceScores::new(f, scale).label();
    chi2_result(
        format!("semiparam-{label}"),
        q,
        LocationMode::Unspecified,
        Some(label),
        choice,
        data,
    )
}

/// Componentwise `(u_j^2 sign(u_j))`.
pub fn signed_squares(u: &[f64]) -> Vec<f64> {
    u.iter().map(|&x| x * x * x.signum()).collect()
}

fn signed_square_matrix(signs: &DMatrix<f64>) -> DMatrix<f64> {
    signs.map(|x| x * x.abs())
}

/// Empirical ratios `m_k = (1/n) sum_i d_i^k`, `k = 1..=4`.
pub fn empirical_moment_ratios(dec: &SampleDecomposition) -> [f64; 4] {
    let n = dec.n() as f64;
    let mut m = [0.0; 4];
    for &r in dec.distances.iter() {
        let mut p = 1.0;
        for mk in m.iter_mut() {
            p *= r;
            *mk += p;
        }
    }
    m.map(|v| v / n)
}

/// `Q_pG` from a decomposition at the estimated location.
pub fn pg_statistic(dec: &SampleDecomposition, pi_dot: f64) -> Result<f64> {
    let d = dec.dim();
    let m = empirical_moment_ratios(dec);
    let gamma = gamma_pg_from_ratios(d, &m)?;
    if !(gamma > 0.0) {
        return Err(Error::Degenerate(format!(
            "pseudo-Gaussian variance estimate {gamma:e} is not positive"
        )));
    }
    let a = c_d(d)? * (d as f64 + 1.0) * m[0];
    let s = signed_square_matrix(&dec.signs);
    let d2 = dec.distances.map(|r| r * r);
    let sum = dec.weighted_sign_sum(&dec.distances) * a - s.tr_mul(&d2);
    let delta = sum * (2.0 * pi_dot / (dec.n() as f64).sqrt());
    Ok(delta.norm_squared() / (4.0 * pi_dot * pi_dot * gamma))
}

/// Cassart's pseudo-Gaussian test at an estimated location.
pub fn test_cassart_pg(data: &DMatrix<f64>, choice: EstimatorChoice) -> Result<TestResult> {
    let (theta, sigma) = choice.estimate(data)?;
    let dec = decompose(data, &theta, &sigma)?;
    let q = pg_statistic(&dec, PI_DOT_GAUSSIAN)?;
    chi2_result(
        "cassart-pg".into(),
        q,
        LocationMode::Unspecified,
        None,
        choice,
        data,
    )
}

/// `(d(d+2) / (3 n m_4)) |sum_i d_i^2 S_i|^2`.
pub fn pg_specified_statistic(dec: &SampleDecomposition) -> Result<f64> {
    let d = dec.dim() as f64;
    let n = dec.n() as f64;
    let m4 = empirical_moment_ratios(dec)[3];
    if !(m4 > 0.0) {
        return Err(Error::Degenerate(
            "fourth moment of the distances is zero".into(),
        ));
    }
    let d2 = dec.distances.map(|r| r * r);
    let sum = signed_square_matrix(&dec.signs).tr_mul(&d2);
    Ok(d * (d + 2.0) / (3.0 * n * m4) * sum.norm_squared())
}

/// Pseudo-Gaussian test with the location fixed at `theta0`.
pub fn test_cassart_pg_specified(
    data: &DMatrix<f64>,
    theta0: &DVector<f64>,
    choice: EstimatorChoice,
) -> Result<TestResult> {
    check_theta0(data, theta0)?;
    let sigma = choice.scatter_about(data, theta0)?;
    let dec = decompose(data, theta0, &sigma)?;
    let q = pg_specified_statistic(&dec)?;
    chi2_result(
        "cassart-pg-specified".into(),
        q,
        LocationMode::Specified(theta0.iter().cloned().collect()),
        None,
        choice,
        data,
    )
}

/// Kernel `h(t) = (2 / (17/8 - t))^{1/2} - 1`.
pub fn baringhaus_h(t: f64) -> f64 {
    (2.0 / (17.0 / 8.0 - t)).sqrt() - 1.0
}

/// Ranks `1..=n` of the distances; ties keep their index order.
pub fn distance_ranks(distances: &DVector<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..distances.len()).collect();
    idx.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]));
    let mut ranks = vec![0; idx.len()];
    for (pos, &i) in idx.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    ranks
}

/// `B = (1/n^2) sum_i sum_j h(U_i'U_j) (n - max(R_i, R_j) + 1)`.
pub fn baringhaus_statistic(dec: &SampleDecomposition) -> f64 {
    let n = dec.n();
    let ranks = distance_ranks(&dec.distances);
    let gram = &dec.signs * dec.signs.transpose();
    let mut total = 0.0;
    for i in 0..n {
        total += baringhaus_h(1.0) * (n - ranks[i] + 1) as f64;
        for j in 0..i {
            let w = (n - ranks[i].max(ranks[j]) + 1) as f64;
            total += 2.0 * baringhaus_h(gram[(i, j)].clamp(-1.0, 1.0)) * w;
        }
    }
    total / (n * n) as f64
}

/// Monte Carlo calibration of the Baringhaus statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaringhausCalibration {
    pub replications: usize,
    pub seed: u64,
}

impl Default for BaringhausCalibration {
    fn default() -> Self {
        BaringhausCalibration {
            replications: 10_000,
            seed: 0x5eed_ba41,
        }
    }
}

fn global_cache() -> &'static NullTableCache {
    static CACHE: OnceLock<NullTableCache> = OnceLock::new();
    CACHE.get_or_init(|| match std::env::var_os("ELLSYM_NULL_CACHE") {
        Some(dir) => NullTableCache::with_dir(dir),
        None => NullTableCache::in_memory(),
    })
}

fn baringhaus_about(data: &DMatrix<f64>, theta0: &DVector<f64>) -> Result<f64> {
    let sigma = EstimatorChoice::default().scatter_about(data, theta0)?;
    Ok(baringhaus_statistic(&decompose(data, theta0, &sigma)?))
}

/// Null table of `B` under a spherical Gaussian, at the given `(d, n)`.
pub fn baringhaus_null_table(d: usize, n: usize, cal: BaringhausCalibration) -> Result<NullTable> {
    let zero = DVector::zeros(d);
    simulate_null_table("baringhaus", d, n, cal.replications, cal.seed, |r| {
        let x = standard_normal_sample(n, d, RngStream::new(cal.seed, r));
        baringhaus_about(&x, &zero)
    })
}

fn standard_normal_sample(n: usize, d: usize, stream: RngStream) -> DMatrix<f64> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let mut rng = stream.rng();
    DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Baringhaus' test with a cached simulated null table.
pub fn test_baringhaus_with(
    data: &DMatrix<f64>,
    theta0: &DVector<f64>,
    cal: BaringhausCalibration,
    cache: &NullTableCache,
) -> Result<TestResult> {
    check_theta0(data, theta0)?;
    let (n, d) = data.shape();
    let b = baringhaus_about(data, theta0)?;
    let key = NullTableKey {
        statistic: "baringhaus".into(),
        dim: d,
        sample_size: n,
        replications: cal.replications,
        seed: cal.seed,
    };
    let table = cache.get_or_simulate(&key, || baringhaus_null_table(d, n, cal))?;
    Ok(TestResult {
        test_name: "baringhaus".into(),
        statistic: b,
        df: None,
        p_value: table.pvalue(b),
        location_mode: LocationMode::Specified(theta0.iter().cloned().collect()),
        reference_density: None,
        estimators: EstimatorChoice::default(),
        n,
        d,
    })
}

/// Baringhaus' test with the default calibration and the process-wide cache.
/// Set `ELLSYM_NULL_CACHE` to a directory to persist null tables.
pub fn test_baringhaus(data: &DMatrix<f64>, theta0: &DVector<f64>) -> Result<TestResult> {
    test_baringhaus_with(
        data,
        theta0,
        BaringhausCalibration::default(),
        global_cache(),
    )
}

/// A test selected by its configuration name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestKind {
    Specified,
    Parametric(RadialFamily),
    Semiparam(RadialFamily, ReferenceScale),
    CassartPg,
    CassartPgSpecified,
    Baringhaus,
}

impl TestKind {
    pub fn needs_theta0(&self) -> bool {
        matches!(
            self,
            TestKind::Specified | TestKind::CassartPgSpecified | TestKind::Baringhaus
        )
    }

    /// Runs the test; `theta0` is required by the specified-location tests and ignored otherwise.
    pub fn run(
        &self,
        data: &DMatrix<f64>,
        theta0: Option<&DVector<f64>>,
        choice: EstimatorChoice,
    ) -> Result<TestResult> {
        let d = data.ncols();
        let theta0 = || {
            theta0.ok_or_else(|| {
                Error::Config(format!("test '{self}' needs a specified location theta0"))
            })
        };
        match self {
            TestKind::Specified => test_specified(data, theta0()?, choice),
            TestKind::Parametric(fam) => {
                test_parametric(data, &RadialDensity::new(*fam, d)?, choice)
            }
            TestKind::Semiparam(fam, scale) => {
                test_semiparam_scaled(data, &RadialDensity::new(*fam, d)?, *scale, choice)
            }
            TestKind::CassartPg => test_cassart_pg(data, choice),
            TestKind::CassartPgSpecified => test_cassart_pg_specified(data, theta0()?, choice),
            TestKind::Baringhaus => test_baringhaus(data, theta0()?),
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestKind::Specified => write!(f, "specified"),
            TestKind::Parametric(r) => write!(f, "parametric-{}", r.label()),
            TestKind::Semiparam(r, ReferenceScale::Standardized) => {
                write!(f, "semiparam-{}", r.label())
            }
            TestKind::Semiparam(r, ReferenceScale::Raw) => write!(f, "semiparam-{}-raw", r.label()),
            TestKind::CassartPg => write!(f, "cassart-pg"),
            TestKind::CassartPgSpecified => write!(f, "cassart-pg-specified"),
            TestKind::Baringhaus => write!(f, "baringhaus"),
        }
    }
}

impl FromStr for TestKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let reference = |r: &str| -> Result<RadialFamily> {
            let fam: RadialFamily = r.parse()?;
            if fam.is_gaussian() {
                return Err(Error::Config(format!(
                    "'{s}': the Gaussian reference is degenerate"
                )));
            }
            Ok(fam)
        };
        match s {
            "specified" => Ok(TestKind::Specified),
            "cassart-pg" => Ok(TestKind::CassartPg),
            "cassart-pg-specified" => Ok(TestKind::CassartPgSpecified),
            "baringhaus" => Ok(TestKind::Baringhaus),
            _ => {
                if let Some(r) = s.strip_prefix("parametric-") {
                    Ok(TestKind::Parametric(reference(r)?))
                } else if let Some(r) = s.strip_prefix("semiparam-") {
                    match r.strip_suffix("-raw") {
                        Some(r) => Ok(TestKind::Semiparam(reference(r)?, ReferenceScale::Raw)),
                        None => Ok(TestKind::Semiparam(
                            reference(r)?,
                            ReferenceScale::Standardized,
                        )),
                    }
                } else {
                    Err(Error::Config(format!("unknown test '{s}'")))
                }
            }
        }
    }
}

impl Serialize for TestKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TestKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

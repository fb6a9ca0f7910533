use std::fmt;
use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::config::{SimulationConfig, TestSpec};
use super::data::Dataset;
use super::simulate::{run_simulation, ResultTable};
use crate::are::{are_grid, published_are, AreRow};
use crate::error::{Error, Result};
use crate::estimators::EstimatorChoice;
use crate::matops::SpdMatrix;
use crate::radial::RadialFamily;
use crate::samplers::AlternativeSpec;
use crate::testing::{ReferenceScale, TestKind, TestResult};

fn theta0_for(
    data: &Dataset,
    tests: &[TestKind],
    theta0: Option<&[f64]>,
) -> Result<Option<DVector<f64>>> {
    match theta0 {
        Some(t) if t.len() != data.dim() => Err(Error::Config(format!(
            "theta0 has {} entries but the data have {} columns",
            t.len(),
            data.dim()
        ))),
        Some(t) => Ok(Some(DVector::from_column_slice(t))),
        None => match tests.iter().find(|t| t.needs_theta0()) {
            Some(t) => Err(Error::Config(format!("test '{t}' needs --theta0"))),
            None => Ok(None),
        },
    }
}

/// Runs each requested test once on a dataset.
pub fn cmd_test(
    data: &Dataset,
    tests: &[TestKind],
    theta0: Option<&[f64]>,
    choice: EstimatorChoice,
) -> Result<Vec<TestResult>> {
    let theta0 = theta0_for(data, tests, theta0)?;
    tests
        .iter()
        .map(|t| t.run(&data.values, theta0.as_ref(), choice))
        .collect()
}

/// Fixed-width table of test results.
pub struct ResultsDisplay<'a>(pub &'a [TestResult]);

impl fmt::Display for ResultsDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self
            .0
            .iter()
            .map(|r| r.test_name.len())
            .max()
            .unwrap_or(4)
            .max(4);
        writeln!(
            f,
            "{:<w$}  {:>12}  {:>4}  {:>10}  {:<16}  location",
            "test", "statistic", "df", "p-value", "estimators"
        )?;
        for r in self.0 {
            let df = r.df.map(|d| d.to_string()).unwrap_or_else(|| "sim".into());
            writeln!(
                f,
                "{:<w$}  {:>12.4}  {:>4}  {:>10.4e}  {:<16}  {}",
                r.test_name,
                r.statistic,
                df,
                r.p_value,
                r.estimators.to_string(),
                r.location_mode
            )?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct TestResultCsv<'a> {
    test: &'a str,
    statistic: f64,
    df: Option<usize>,
    p_value: f64,
    location: String,
    reference: Option<&'a str>,
    estimators: String,
    n: usize,
    d: usize,
}

pub fn write_results_csv<W: Write>(results: &[TestResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(TestResultCsv {
            test: &r.test_name,
            statistic: r.statistic,
            df: r.df,
            p_value: r.p_value,
            location: r.location_mode.to_string(),
            reference: r.reference_density.as_deref(),
            estimators: r.estimators.to_string(),
            n: r.n,
            d: r.d,
        })
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// One p-value of the rolling analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingRow {
    pub window_start: usize,
    pub window_end: usize,
    pub start_label: Option<String>,
    pub end_label: Option<String>,
    pub test: String,
    pub p_value: f64,
}

/// Runs the tests on windows `[s, s + window)` for `s = 0, step, 2 step, ...`.
/// Row indices are zero-based and `window_end` is exclusive. Inputs are
/// expected to be pre-filtered (no volatility filtering is applied here).
pub fn cmd_rolling(
    data: &Dataset,
    window: usize,
    step: usize,
    tests: &[TestKind],
    theta0: Option<&[f64]>,
    choice: EstimatorChoice,
) -> Result<Vec<RollingRow>> {
    let n = data.n();
    if window == 0 || step == 0 {
        return Err(Error::Config("window and step must be positive".into()));
    }
    if window > n {
        return Err(Error::Config(format!(
            "window {window} exceeds the {n} available rows"
        )));
    }
    let theta0 = theta0_for(data, tests, theta0)?;
    let mut rows = Vec::new();
    for start in (0..=n - window).step_by(step) {
        let end = start + window;
        let x = data.values.rows(start, window).into_owned();
        let label = |i: usize| data.labels.as_ref().map(|l| l[i].clone());
        for t in tests {
            match t.run(&x, theta0.as_ref(), choice) {
                Ok(r) => rows.push(RollingRow {
                    window_start: start,
                    window_end: end,
                    start_label: label(start),
                    end_label: label(end - 1),
                    test: r.test_name,
                    p_value: r.p_value,
                }),
                Err(e) if e.is_numerical() => {
                    log::warn!("window [{start}, {end}) skipped for {t}: {e}");
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(rows)
}

pub fn write_rolling_csv<W: Write>(rows: &[RollingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// ARE grid with the published value alongside, where one exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreReportRow {
    pub d: usize,
    pub reference: String,
    pub g: String,
    pub are: Option<f64>,
    pub published: Option<f64>,
    pub error: Option<String>,
}

pub fn cmd_are(
    dims: &[usize],
    references: &[RadialFamily],
    actuals: &[RadialFamily],
) -> Vec<AreReportRow> {
    let nu = |f: &RadialFamily| match f {
        RadialFamily::Student { nu } => Some(*nu),
        RadialFamily::Gaussian => None,
    };
    let mut out = Vec::new();
    let mut rows: Vec<AreRow> = are_grid(dims, references, actuals);
    let mut idx = 0;
    for &d in dims {
        for f in references {
            for g in actuals {
                let row = std::mem::replace(
                    &mut rows[idx],
                    AreRow {
                        d,
                        reference: String::new(),
                        g: String::new(),
                        are: None,
                        error: None,
                    },
                );
                idx += 1;
                let published = match (nu(f), nu(g)) {
                    (Some(a), Some(b)) => published_are(d, a, b),
                    _ => None,
                };
                out.push(AreReportRow {
                    d,
                    reference: row.reference,
                    g: row.g,
                    are: row.are,
                    published,
                    error: row.error,
                });
            }
        }
    }
    out
}

pub fn write_are_csv<W: Write>(rows: &[AreReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Settings of the location-pitfall experiment: a two-component Gaussian
/// mixture in dimension 10, shifted either away from or onto the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitfallConfig {
    pub replications: usize,
    pub n: usize,
    pub seed: u64,
    pub level: f64,
    pub reference_scale: ReferenceScale,
    pub estimators: EstimatorChoice,
}

impl Default for PitfallConfig {
    fn default() -> Self {
        PitfallConfig {
            replications: 500,
            n: 100,
            seed: 1,
            level: 0.05,
            reference_scale: ReferenceScale::Raw,
            estimators: EstimatorChoice::default(),
        }
    }
}

pub const PITFALL_DIM: usize = 10;

/// `0.8 N(10 e1, I) + 0.2 N(-10 e1, I) + shift * e1`.
pub fn pitfall_alternative(shift: f64, label: &str) -> AlternativeSpec {
    let d = PITFALL_DIM;
    let mut mu1 = vec![0.0; d];
    let mut mu2 = vec![0.0; d];
    mu1[0] = 10.0 + shift;
    mu2[0] = -10.0 + shift;
    let id = SpdMatrix::identity(d);
    AlternativeSpec::gauss_mixture([0.8, 0.2], &mu1, &id, &mu2, &id).with_label(label)
}

/// The 2x2 table of the pitfall experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct PitfallReport {
    pub table: ResultTable,
    pub specified_test: String,
    pub semiparam_test: String,
}

impl PitfallReport {
    /// `(scenario a, scenario b)` frequencies of the specified test.
    pub fn specified(&self) -> (Option<f64>, Option<f64>) {
        (
            self.table.frequency("a", &self.specified_test),
            self.table.frequency("b", &self.specified_test),
        )
    }

    pub fn semiparam(&self) -> (Option<f64>, Option<f64>) {
        (
            self.table.frequency("a", &self.semiparam_test),
            self.table.frequency("b", &self.semiparam_test),
        )
    }
}

impl fmt::Display for PitfallReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |p: Option<f64>| {
            p.map(|v| format!("{v:.3}"))
                .unwrap_or_else(|| "error".into())
        };
        let w = self
            .semiparam_test
            .len()
            .max(self.specified_test.len())
            .max(8);
        writeln!(f, "{:<w$}  {:>8}  {:>8}", "test", "(a)", "(b)")?;
        let (a, b) = self.specified();
        writeln!(
            f,
            "{:<w$}  {:>8}  {:>8}",
            self.specified_test,
            show(a),
            show(b)
        )?;
        let (a, b) = self.semiparam();
        writeln!(
            f,
            "{:<w$}  {:>8}  {:>8}",
            self.semiparam_test,
            show(a),
            show(b)
        )
    }
}

/// Runs the specified test at the origin and the t4-semiparametric test on
/// scenario (a), shifted by `-6 e1` so that its mean is zero, and scenario
/// (b), shifted by `6 e1`. Both share the same non-ellipticity.
pub fn run_pitfall(cfg: PitfallConfig) -> Result<PitfallReport> {
    let semiparam = TestKind::Semiparam(RadialFamily::student(4.0), cfg.reference_scale);
    let sim = SimulationConfig {
        d: PITFALL_DIM,
        n: cfg.n,
        replications: cfg.replications,
        level: cfg.level,
        seed: cfg.seed,
        alternatives: vec![
            pitfall_alternative(-6.0, "a"),
            pitfall_alternative(6.0, "b"),
        ],
        tests: vec![
            TestSpec::from(TestKind::Specified),
            TestSpec::from(semiparam),
        ],
        estimators: cfg.estimators,
        output: None,
    };
    Ok(PitfallReport {
        table: run_simulation(&sim)?,
        specified_test: TestKind::Specified.to_string(),
        semiparam_test: semiparam.to_string(),
    })
}

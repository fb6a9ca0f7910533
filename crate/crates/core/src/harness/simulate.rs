use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::samplers::RngStream;

/// Failures tolerated in a cell, as a fraction of the replications.
pub const MAX_FAILURE_RATE: f64 = 0.01;

/// Rejection frequency of one test under one alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub alternative: String,
    pub parameter: String,
    pub test: String,
    pub estimators: String,
    /// `None` when the cell failed too often to be reported.
    pub rejection_frequency: Option<f64>,
    pub replications: usize,
    pub failures: usize,
    pub seed: u64,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub config_hash: String,
    pub version: String,
}

const META_PREFIX: &str = "# ";

impl ResultTable {
    pub fn failed_cells(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.rejection_frequency.is_none())
    }

    /// Looks up a cell by alternative label and test name.
    pub fn frequency(&self, alternative: &str, test: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.alternative == alternative && r.test == test)
            .and_then(|r| r.rejection_frequency)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{META_PREFIX}version={}", self.version)?;
        writeln!(out, "{META_PREFIX}config_hash={}", self.config_hash)?;
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut version = String::new();
        let mut config_hash = String::new();
        let mut header_lines = 0;
        let mut body = String::new();
        let mut line = String::new();
        while reader.read_line(&mut line)? > 0 {
            match line.strip_prefix(META_PREFIX) {
                Some(meta) if body.is_empty() => {
                    header_lines += 1;
                    let (k, v) = meta
                        .trim_end()
                        .split_once('=')
                        .ok_or_else(|| Error::Parse {
                            line: header_lines,
                            message: format!("malformed metadata line '{}'", line.trim_end()),
                        })?;
                    match k {
                        "version" => version = v.to_string(),
                        "config_hash" => config_hash = v.to_string(),
                        _ => {}
                    }
                }
                _ => body.push_str(&line),
            }
            line.clear();
        }
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let mut rows = Vec::new();
        for (i, row) in r.deserialize::<ResultRow>().enumerate() {
            let row = row.map_err(|e| Error::Parse {
                line: header_lines + i + 2,
                message: e.to_string(),
            })?;
            rows.push(row);
        }
        Ok(ResultTable {
            rows,
            config_hash,
            version,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

impl fmt::Display for ResultTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w_alt = self
            .rows
            .iter()
            .map(|r| r.alternative.len())
            .max()
            .unwrap_or(0)
            .max(11);
        let w_test = self
            .rows
            .iter()
            .map(|r| r.test.len())
            .max()
            .unwrap_or(0)
            .max(4);
        writeln!(
            f,
            "{:<w_alt$}  {:<w_test$}  {:>9}  {:>8}",
            "alternative", "test", "rejection", "failures"
        )?;
        for r in &self.rows {
            let freq = match r.rejection_frequency {
                Some(p) => format!("{p:.3}"),
                None => "error".to_string(),
            };
            writeln!(
                f,
                "{:<w_alt$}  {:<w_test$}  {:>9}  {:>8}",
                r.alternative, r.test, freq, r.failures
            )?;
        }
        Ok(())
    }
}

/// Outcome of one test on one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Reject,
    Accept,
    Failed,
}

/// Runs every test on every alternative. Replication `r` of an alternative
/// uses the substream `(seed, r)`, so results do not depend on scheduling.
pub fn run_simulation(cfg: &SimulationConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for alt in &cfg.alternatives {
        let alt = alt.with_default_dim(cfg.d);
        let sampler = alt.sampler()?;
        let theta0 = DVector::from_vec(alt.theta.clone().unwrap_or_else(|| vec![0.0; cfg.d]));
        let outcomes: Vec<Vec<(Outcome, Option<String>)>> = (0..cfg.replications as u64)
            .into_par_iter()
            .map(|r| {
                let x = sampler.sample(cfg.n, RngStream::new(cfg.seed, r));
                cfg.tests
                    .iter()
                    .map(
                        |t| match t.test.run(&x, Some(&theta0), cfg.estimators_for(t)) {
                            Ok(res) if res.rejects(cfg.level) => (Outcome::Reject, None),
                            Ok(_) => (Outcome::Accept, None),
                            Err(e) if e.is_numerical() => (Outcome::Failed, Some(e.to_string())),
                            Err(e) => (Outcome::Failed, Some(format!("fatal: {e}"))),
                        },
                    )
                    .collect()
            })
            .collect();
        for (j, t) in cfg.tests.iter().enumerate() {
            let mut rejections = 0usize;
            let mut failures = 0usize;
            let mut first_error = None;
            let mut fatal = None;
            for rep in &outcomes {
                match &rep[j] {
                    (Outcome::Reject, _) => rejections += 1,
                    (Outcome::Accept, _) => {}
                    (Outcome::Failed, msg) => {
                        failures += 1;
                        if let Some(m) = msg {
                            if m.starts_with("fatal: ") && fatal.is_none() {
                                fatal = Some(m.clone());
                            }
                            first_error.get_or_insert_with(|| m.clone());
                        }
                    }
                }
            }
            if let Some(m) = fatal {
                return Err(Error::Config(format!(
                    "{} on {}: {m}",
                    t.test,
                    alt.display_label()
                )));
            }
            let ok = cfg.replications - failures;
            let tolerated = (failures as f64) < MAX_FAILURE_RATE * cfg.replications as f64;
            let (freq, error) = if tolerated && ok > 0 {
                if failures > 0 {
                    log::warn!(
                        "{} on {}: {failures} of {} replications failed ({})",
                        t.test,
                        alt.display_label(),
                        cfg.replications,
                        first_error.as_deref().unwrap_or("")
                    );
                }
                (Some(rejections as f64 / ok as f64), None)
            } else {
                (
                    None,
                    Some(format!(
                        "{failures} of {} replications failed: {}",
                        cfg.replications,
                        first_error.unwrap_or_default()
                    )),
                )
            };
            rows.push(ResultRow {
                alternative: alt.display_label(),
                parameter: alt.parameter_label(),
                test: t.test.to_string(),
                estimators: cfg.estimators_for(t).to_string(),
                rejection_frequency: freq,
                replications: cfg.replications,
                failures,
                seed: cfg.seed,
                error,
            });
        }
    }
    Ok(ResultTable {
        rows,
        config_hash: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

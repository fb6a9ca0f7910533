use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorChoice;
use crate::samplers::AlternativeSpec;
use crate::testing::TestKind;

/// A test to run in a simulation, with an optional estimator override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "TestSpecRepr")]
pub struct TestSpec {
    pub test: TestKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimators: Option<EstimatorChoice>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TestSpecRepr {
    Name(TestKind),
    Full {
        test: TestKind,
        #[serde(default)]
        estimators: Option<EstimatorChoice>,
    },
}

impl From<TestSpecRepr> for TestSpec {
    fn from(r: TestSpecRepr) -> Self {
        match r {
            TestSpecRepr::Name(test) => TestSpec {
                test,
                estimators: None,
            },
            TestSpecRepr::Full { test, estimators } => TestSpec { test, estimators },
        }
    }
}

impl From<TestKind> for TestSpec {
    fn from(test: TestKind) -> Self {
        TestSpec {
            test,
            estimators: None,
        }
    }
}

/// A Monte Carlo study: every test is run on every alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub d: usize,
    pub n: usize,
    pub replications: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub seed: u64,
    pub alternatives: Vec<AlternativeSpec>,
    pub tests: Vec<TestSpec>,
    /// Estimators used by tests without an override.
    #[serde(default)]
    pub estimators: EstimatorChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_level() -> f64 {
    0.05
}

impl SimulationConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: SimulationConfig =
            serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.d == 0 || self.n == 0 {
            return Err(Error::Config("d and n must be positive".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!(
                "level must lie in (0,1), got {}",
                self.level
            )));
        }
        if self.alternatives.is_empty() || self.tests.is_empty() {
            return Err(Error::Config(
                "at least one alternative and one test are required".into(),
            ));
        }
        for alt in &self.alternatives {
            let alt = alt.with_default_dim(self.d);
            let d = alt.sampler()?.dim();
            if d != self.d {
                return Err(Error::Config(format!(
                    "alternative '{}' has dimension {d}, expected {}",
                    alt.display_label(),
                    self.d
                )));
            }
        }
        Ok(())
    }

    pub fn estimators_for(&self, t: &TestSpec) -> EstimatorChoice {
        t.estimators.unwrap_or(self.estimators)
    }

    /// FNV-1a hash of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("configuration serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in json.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

impl AlternativeSpec {
    /// Fills in the dimension when nothing else fixes it.
    pub fn with_default_dim(&self, d: usize) -> AlternativeSpec {
        let mut a = self.clone();
        if a.dimension().is_err() && a.dim.is_none() {
            a.dim = Some(d);
        }
        a
    }
}

//! Ready-made alternatives and studies on the trivariate benchmark design.

use super::config::{SimulationConfig, TestSpec};
use crate::estimators::EstimatorChoice;
use crate::matops::SpdMatrix;
use crate::radial::RadialFamily;
use crate::samplers::{AltFamily, AlternativeSpec, KernelScale, SkewConstruction, SkewParam};
use crate::testing::{ReferenceScale, TestKind};

/// Benchmark scatter of the d = 3 studies.
pub const BENCHMARK_SIGMA: [[f64; 3]; 3] = [[2.0, 1.0, 1.0], [1.0, 3.0, 2.0], [1.0, 2.0, 5.0]];

pub fn benchmark_sigma() -> SpdMatrix {
    let rows: Vec<&[f64]> = BENCHMARK_SIGMA.iter().map(|r| r.as_slice()).collect();
    SpdMatrix::from_rows(&rows).expect("benchmark scatter is positive definite")
}

/// Skew-normal (`radial` Gaussian) or skew-t alternative with the benchmark
/// scatter, in the marginal (Azzalini) parameterization.
pub fn skew_alternative(radial: RadialFamily, lambda: &[f64]) -> AlternativeSpec {
    AlternativeSpec::new(AltFamily::Gse {
        radial,
        lambda: lambda.to_vec(),
        kernel: KernelScale::Raw,
        param: SkewParam::Marginal,
        construction: SkewConstruction::NormalMixture,
    })
    .with_sigma(&benchmark_sigma())
}

/// Skewness grid of the specified-location study.
pub const SPECIFIED_LAMBDAS: [[f64; 3]; 6] = [
    [0.0, 0.0, 0.0],
    [0.1, -0.2, 0.0],
    [0.3, -0.6, 0.0],
    [0.1, 0.1, 0.1],
    [0.2, 0.2, 0.2],
    [0.3, 0.3, 0.3],
];

/// Skewness grid of the unspecified-location study.
pub const UNSPECIFIED_LAMBDAS: [[f64; 3]; 5] = [
    [0.0, 0.0, 0.0],
    [1.0, -2.0, 0.0],
    [1.0, 1.0, 1.0],
    [2.0, 2.0, 2.0],
    [3.0, 3.0, 3.0],
];

fn study(
    radial: RadialFamily,
    lambdas: &[[f64; 3]],
    tests: Vec<TestKind>,
    n: usize,
    reps: usize,
    seed: u64,
) -> SimulationConfig {
    SimulationConfig {
        d: 3,
        n,
        replications: reps,
        level: 0.05,
        seed,
        alternatives: lambdas
            .iter()
            .map(|l| skew_alternative(radial, l))
            .collect(),
        tests: tests.into_iter().map(TestSpec::from).collect(),
        estimators: EstimatorChoice::default(),
        output: None,
    }
}

/// Specified-location tests at the origin over the skewness grid.
pub fn specified_study(radial: RadialFamily, n: usize, reps: usize, seed: u64) -> SimulationConfig {
    let tests = vec![
        TestKind::Specified,
        TestKind::Baringhaus,
        TestKind::CassartPgSpecified,
    ];
    study(radial, &SPECIFIED_LAMBDAS, tests, n, reps, seed)
}

/// Student-reference semiparametric tests (raw scores) and the
/// pseudo-Gaussian test over the skewness grid.
pub fn unspecified_study(
    radial: RadialFamily,
    n: usize,
    reps: usize,
    seed: u64,
) -> SimulationConfig {
    let mut tests: Vec<TestKind> = [2.1, 4.0, 8.0]
        .iter()
        .map(|&nu| TestKind::Semiparam(RadialFamily::student(nu), ReferenceScale::Raw))
        .collect();
    tests.push(TestKind::CassartPg);
    study(radial, &UNSPECIFIED_LAMBDAS, tests, n, reps, seed)
}

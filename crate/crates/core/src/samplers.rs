//! Seeded generators for the null and alternative distributions of the
//! simulation studies: elliptical laws, generalized skew-elliptical
//! perturbations, sinh-arcsinh transforms and two-component Gaussian mixtures.
//!
//! Every sample is a pure function of an [`RngStream`]: the pair
//! `(seed, stream_id)` selects an independent ChaCha8 substream.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::matops::SpdMatrix;
use crate::radial::{RadialDensity, RadialFamily};

/// A reproducible random substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Standard normal distribution function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Scale convention of a radial kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelScale {
    /// Rescaled so that `Cov[X] = Sigma` (needs finite second moments).
    #[default]
    Standardized,
    /// The textbook family with dispersion matrix `Sigma`.
    Raw,
}

/// Generator of spherical draws `rho * U` for a radial family.
#[derive(Debug, Clone)]
pub struct Kernel {
    family: RadialFamily,
    scale: f64,
    chi: Option<ChiSquared<f64>>,
}

impl Kernel {
    pub fn new(family: RadialFamily, scale: KernelScale) -> Result<Self> {
        let (factor, chi) = match family {
            RadialFamily::Gaussian => (1.0, None),
            RadialFamily::Student { nu } => {
                let chi = ChiSquared::new(nu)
                    .map_err(|e| Error::UnsupportedFamily(format!("t{nu}: {e}")))?;
                let factor = match scale {
                    KernelScale::Raw => 1.0,
                    KernelScale::Standardized => {
                        if !(nu > 2.0) {
                            return Err(Error::Config(format!(
                                "t{nu} has no finite variance; use the raw kernel scale"
                            )));
                        }
                        ((nu - 2.0) / nu).sqrt()
                    }
                };
                (factor, Some(chi))
            }
        };
        Ok(Kernel {
            family,
            scale: factor,
            chi,
        })
    }

    pub fn family(&self) -> RadialFamily {
        self.family
    }

    /// Returns a spherical Gaussian draw `z` and the radial factor `m` such
    /// that `m * z` is a spherical draw from this kernel.
    fn draw_parts(&self, d: usize, rng: &mut ChaCha8Rng) -> (DVector<f64>, f64) {
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let m = match (&self.family, &self.chi) {
            (RadialFamily::Student { nu }, Some(chi)) => {
                let w: f64 = chi.sample(rng);
                self.scale * (nu / w).sqrt()
            }
            _ => 1.0,
        };
        (z, m)
    }

    /// A spherical draw `rho * U`.
    pub fn draw(&self, d: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
        let (z, m) = self.draw_parts(d, rng);
        z * m
    }
}

impl From<&RadialDensity> for Kernel {
    fn from(g: &RadialDensity) -> Self {
        Kernel::new(g.family(), KernelScale::Standardized)
            .expect("standardized densities have finite variance")
    }
}

/// How the skewing direction enters the skewing function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkewParam {
    /// `lambda' Sigma^{-1/2} (x - theta)`.
    #[default]
    Standardized,
    /// `lambda' omega^{-1} (x - theta)` with `omega = diag(Sigma)^{1/2}`.
    Marginal,
}

/// Where the Gaussian skewing function is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkewConstruction {
    /// `2 f(x) Phi(lambda'x)` with `f` the elliptical kernel itself.
    #[default]
    Kernel,
    /// A skew-normal vector divided by an independent radial mixing variable
    /// (the usual skew-t). Identical to `Kernel` for the Gaussian family.
    NormalMixture,
}

/// Family part of an alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum AltFamily {
    Elliptical {
        radial: RadialFamily,
        #[serde(default)]
        kernel: KernelScale,
    },
    Gse {
        radial: RadialFamily,
        lambda: Vec<f64>,
        #[serde(default)]
        kernel: KernelScale,
        #[serde(default)]
        param: SkewParam,
        #[serde(default)]
        construction: SkewConstruction,
    },
    Sas {
        base: RadialFamily,
        epsilon: Vec<f64>,
        #[serde(default)]
        kernel: KernelScale,
    },
    GaussMixture {
        weights: [f64; 2],
        mu1: Vec<f64>,
        sigma1: Vec<Vec<f64>>,
        mu2: Vec<f64>,
        sigma2: Vec<Vec<f64>>,
    },
    /// Reserved; sampling is not implemented.
    Msgh {},
    /// Reserved; sampling is not implemented.
    Lsgm {},
}

/// A distribution to sample from: a family together with location and scatter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeSpec {
    #[serde(flatten)]
    pub family: AltFamily,
    /// Location; defaults to the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    /// Scatter, row by row; defaults to the identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<f64>>>,
    /// Dimension, needed only when nothing else fixes it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Optional display label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

fn spd_from_rows(rows: &[Vec<f64>]) -> Result<SpdMatrix> {
    let r: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    SpdMatrix::from_rows(&r).map_err(|e| Error::Config(format!("invalid scatter matrix: {e}")))
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(","))
}

impl AlternativeSpec {
    pub fn new(family: AltFamily) -> Self {
        AlternativeSpec {
            family,
            theta: None,
            sigma: None,
            dim: None,
            label: None,
        }
    }

    pub fn with_theta(mut self, theta: &[f64]) -> Self {
        self.theta = Some(theta.to_vec());
        self
    }

    pub fn with_sigma(mut self, sigma: &SpdMatrix) -> Self {
        let m = sigma.as_matrix();
        self.sigma = Some(
            (0..m.nrows())
                .map(|i| m.row(i).iter().cloned().collect())
                .collect(),
        );
        self
    }

    pub fn with_dim(mut self, d: usize) -> Self {
        self.dim = Some(d);
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn elliptical(radial: RadialFamily) -> Self {
        AlternativeSpec::new(AltFamily::Elliptical {
            radial,
            kernel: KernelScale::Standardized,
        })
    }

    pub fn gse(radial: RadialFamily, lambda: &[f64]) -> Self {
        AlternativeSpec::new(AltFamily::Gse {
            radial,
            lambda: lambda.to_vec(),
            kernel: KernelScale::Standardized,
            param: SkewParam::Standardized,
            construction: SkewConstruction::Kernel,
        })
    }

    pub fn sas(base: RadialFamily, epsilon: &[f64]) -> Self {
        AlternativeSpec::new(AltFamily::Sas {
            base,
            epsilon: epsilon.to_vec(),
            kernel: KernelScale::Standardized,
        })
    }

    pub fn gauss_mixture(
        weights: [f64; 2],
        mu1: &[f64],
        sigma1: &SpdMatrix,
        mu2: &[f64],
        sigma2: &SpdMatrix,
    ) -> Self {
        let rows = |s: &SpdMatrix| {
            let m = s.as_matrix();
            (0..m.nrows())
                .map(|i| m.row(i).iter().cloned().collect())
                .collect()
        };
        AlternativeSpec::new(AltFamily::GaussMixture {
            weights,
            mu1: mu1.to_vec(),
            sigma1: rows(sigma1),
            mu2: mu2.to_vec(),
            sigma2: rows(sigma2),
        })
    }

    /// Dimension implied by the specification.
    pub fn dimension(&self) -> Result<usize> {
        let from_family = match &self.family {
            AltFamily::Gse { lambda, .. } => Some(lambda.len()),
            AltFamily::Sas { epsilon, .. } => Some(epsilon.len()),
            AltFamily::GaussMixture { mu1, .. } => Some(mu1.len()),
            _ => None,
        };
        let candidates = [
            from_family,
            self.theta.as_ref().map(|t| t.len()),
            self.sigma.as_ref().map(|s| s.len()),
            self.dim,
        ];
        let mut d = None;
        for c in candidates.into_iter().flatten() {
            match d {
                None => d = Some(c),
                Some(prev) if prev != c => {
                    return Err(Error::Config(format!(
                        "{}: inconsistent dimensions {prev} and {c}",
                        self.display_label()
                    )))
                }
                _ => {}
            }
        }
        match d {
            Some(0) | None => Err(Error::Config(format!(
                "{}: dimension is not specified",
                self.display_label()
            ))),
            Some(d) => Ok(d),
        }
    }

    /// Family name such as `skew-t4.1`.
    pub fn family_label(&self) -> String {
        match &self.family {
            AltFamily::Elliptical { radial, .. } => radial.label(),
            AltFamily::Gse { radial, .. } => match radial {
                RadialFamily::Gaussian => "skew-normal".into(),
                r => format!("skew-{}", r.label()),
            },
            AltFamily::Sas { base, .. } => match base {
                RadialFamily::Gaussian => "sas-normal".into(),
                r => format!("sas-{}", r.label()),
            },
            AltFamily::GaussMixture { .. } => "gauss-mixture".into(),
            AltFamily::Msgh {} => "msgh".into(),
            AltFamily::Lsgm {} => "lsgm".into(),
        }
    }

    /// The perturbation parameter, e.g. `lambda=(2,2,2)`.
    pub fn parameter_label(&self) -> String {
        match &self.family {
            AltFamily::Elliptical { .. } => "null".into(),
            AltFamily::Gse { lambda, .. } => format!("lambda={}", fmt_vec(lambda)),
            AltFamily::Sas { epsilon, .. } => format!("epsilon={}", fmt_vec(epsilon)),
            AltFamily::GaussMixture { mu1, mu2, .. } => {
                format!("mu1={} mu2={}", fmt_vec(mu1), fmt_vec(mu2))
            }
            AltFamily::Msgh {} | AltFamily::Lsgm {} => String::new(),
        }
    }

    pub fn display_label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| format!("{} {}", self.family_label(), self.parameter_label()))
    }

    /// Validates the specification and prepares a reusable sampler.
    pub fn sampler(&self) -> Result<Sampler> {
        let d = self.dimension()?;
        let theta = DVector::from_vec(self.theta.clone().unwrap_or_else(|| vec![0.0; d]));
        let sigma = match &self.sigma {
            Some(rows) => spd_from_rows(rows)?,
            None => SpdMatrix::identity(d),
        };
        let kind = match &self.family {
            AltFamily::Elliptical { radial, kernel } => SamplerKind::Elliptical {
                kernel: Kernel::new(*radial, *kernel)?,
            },
            AltFamily::Gse {
                radial,
                lambda,
                kernel,
                param,
                construction,
            } => {
                let l = DVector::from_column_slice(lambda);
                let direction = skew_direction(&l, &sigma, *param)?;
                SamplerKind::Gse {
                    kernel: Kernel::new(*radial, *kernel)?,
                    direction,
                    construction: *construction,
                }
            }
            AltFamily::Sas {
                base,
                epsilon,
                kernel,
            } => SamplerKind::Sas {
                kernel: Kernel::new(*base, *kernel)?,
                epsilon: DVector::from_column_slice(epsilon),
            },
            AltFamily::GaussMixture {
                weights,
                mu1,
                sigma1,
                mu2,
                sigma2,
            } => {
                if self.theta.is_some() || self.sigma.is_some() {
                    return Err(Error::Config(
                        "mixtures take their locations and scatters from mu1/mu2/sigma1/sigma2"
                            .into(),
                    ));
                }
                if !(weights[0] > 0.0
                    && weights[1] > 0.0
                    && (weights[0] + weights[1] - 1.0).abs() < 1e-12)
                {
                    return Err(Error::Config(format!(
                        "mixture weights must be positive and sum to 1, got {weights:?}"
                    )));
                }
                if mu2.len() != d || sigma1.len() != d || sigma2.len() != d {
                    return Err(Error::Config(
                        "mixture components have inconsistent dimensions".into(),
                    ));
                }
                SamplerKind::Mixture {
                    w1: weights[0],
                    mu1: DVector::from_column_slice(mu1),
                    root1: spd_from_rows(sigma1)?.sym_sqrt().into_matrix(),
                    mu2: DVector::from_column_slice(mu2),
                    root2: spd_from_rows(sigma2)?.sym_sqrt().into_matrix(),
                }
            }
            AltFamily::Msgh {} | AltFamily::Lsgm {} => {
                return Err(Error::UnsupportedFamily(format!(
                    "{}: generalized hyperbolic mixtures are not implemented",
                    self.family_label()
                )))
            }
        };
        let root = sigma.sym_sqrt().into_matrix();
        Ok(Sampler {
            d,
            theta,
            root,
            kind,
        })
    }

    /// Draws `n` observations from the substream `stream`.
    pub fn sample(&self, n: usize, stream: RngStream) -> Result<DMatrix<f64>> {
        Ok(self.sampler()?.sample(n, stream))
    }
}

/// Linear form `v` with `Pi(v'(x - theta))` the skewing argument.
fn skew_direction(
    lambda: &DVector<f64>,
    sigma: &SpdMatrix,
    param: SkewParam,
) -> Result<DVector<f64>> {
    if lambda.len() != sigma.dim() {
        return Err(Error::Config(format!(
            "lambda has length {} but Sigma is {}x{}",
            lambda.len(),
            sigma.dim(),
            sigma.dim()
        )));
    }
    Ok(match param {
        SkewParam::Standardized => sigma.sym_inv_sqrt()?.as_matrix() * lambda,
        SkewParam::Marginal => {
            let m = sigma.as_matrix();
            DVector::from_fn(lambda.len(), |i, _| lambda[i] / m[(i, i)].sqrt())
        }
    })
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Elliptical {
        kernel: Kernel,
    },
    Gse {
        kernel: Kernel,
        direction: DVector<f64>,
        construction: SkewConstruction,
    },
    Sas {
        kernel: Kernel,
        epsilon: DVector<f64>,
    },
    Mixture {
        w1: f64,
        mu1: DVector<f64>,
        root1: DMatrix<f64>,
        mu2: DVector<f64>,
        root2: DMatrix<f64>,
    },
}

/// A validated alternative, ready to draw samples.
#[derive(Debug, Clone)]
pub struct Sampler {
    d: usize,
    theta: DVector<f64>,
    root: DMatrix<f64>,
    kind: SamplerKind,
}

impl Sampler {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn sample(&self, n: usize, stream: RngStream) -> DMatrix<f64> {
        let mut rng = stream.rng();
        let mut out = DMatrix::zeros(n, self.d);
        for i in 0..n {
            let x = self.draw_one(&mut rng);
            out.row_mut(i).copy_from(&x.transpose());
        }
        out
    }

    fn draw_one(&self, rng: &mut ChaCha8Rng) -> DVector<f64> {
        match &self.kind {
            SamplerKind::Elliptical { kernel } => {
                &self.root * kernel.draw(self.d, rng) + &self.theta
            }
            SamplerKind::Gse {
                kernel,
                direction,
                construction,
            } => {
                let (z, m) = kernel.draw_parts(self.d, rng);
                let y = &self.root * z;
                let arg = match construction {
                    SkewConstruction::Kernel => direction.dot(&y) * m,
                    SkewConstruction::NormalMixture => direction.dot(&y),
                };
                let v: f64 = rng.random();
                let sign = if v <= std_normal_cdf(arg) { 1.0 } else { -1.0 };
                y * (sign * m) + &self.theta
            }
            SamplerKind::Sas { kernel, epsilon } => {
                let z = &self.root * kernel.draw(self.d, rng);
                let x = DVector::from_fn(self.d, |j, _| (z[j].asinh() + epsilon[j]).sinh());
                x + &self.theta
            }
            SamplerKind::Mixture {
                w1,
                mu1,
                root1,
                mu2,
                root2,
            } => {
                let u: f64 = rng.random();
                let z = DVector::from_fn(self.d, |_, _| rng.sample::<f64, _>(StandardNormal));
                if u < *w1 {
                    root1 * z + mu1
                } else {
                    root2 * z + mu2
                }
            }
        }
    }
}

/// Elliptical sample `theta + rho Sigma^{1/2} U` from a standardized density.
pub fn sample_elliptical(
    g: &RadialDensity,
    theta: &DVector<f64>,
    sigma: &SpdMatrix,
    n: usize,
    stream: RngStream,
) -> Result<DMatrix<f64>> {
    if theta.len() != sigma.dim() || g.dim() != sigma.dim() {
        return Err(Error::Contract(
            "theta, Sigma and g must share the dimension".into(),
        ));
    }
    AlternativeSpec::elliptical(g.family())
        .with_theta(theta.as_slice())
        .with_sigma(sigma)
        .sample(n, stream)
}

/// Generalized skew-elliptical sample with the Gaussian skewing function.
pub fn sample_gse(
    g: &RadialDensity,
    theta: &DVector<f64>,
    sigma: &SpdMatrix,
    lambda: &[f64],
    n: usize,
    stream: RngStream,
) -> Result<DMatrix<f64>> {
    AlternativeSpec::gse(g.family(), lambda)
        .with_theta(theta.as_slice())
        .with_sigma(sigma)
        .sample(n, stream)
}

/// Sinh-arcsinh transform of an elliptical sample, coordinate by coordinate.
pub fn sample_sas(
    base: RadialFamily,
    theta: &DVector<f64>,
    sigma: &SpdMatrix,
    epsilon: &[f64],
    n: usize,
    stream: RngStream,
) -> Result<DMatrix<f64>> {
    AlternativeSpec::sas(base, epsilon)
        .with_theta(theta.as_slice())
        .with_sigma(sigma)
        .sample(n, stream)
}

pub fn sample_gauss_mixture(
    weights: [f64; 2],
    mu1: &[f64],
    sigma1: &SpdMatrix,
    mu2: &[f64],
    sigma2: &SpdMatrix,
    n: usize,
    stream: RngStream,
) -> Result<DMatrix<f64>> {
    AlternativeSpec::gauss_mixture(weights, mu1, sigma1, mu2, sigma2).sample(n, stream)
}

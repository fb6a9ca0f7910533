//! Radial densities standardized so that `E[rho^2] = d`, their location and
//! scatter scores, and the scalar functionals (Fisher informations,
//! cross-informations, efficiency constants) obtained by quadrature.
//!
//! A radial density `f` generates the elliptical law with density
//! proportional to `f(|Sigma^{-1/2}(x - theta)|)`; the Mahalanobis radius
//! `rho` then has density `r^{d-1} f(r) / mu_{d-1}` with
//! `mu_k = int_0^inf r^k f(r) dr`. Only ratios of the `mu_k` enter any
//! functional, so `f` is stored up to its normalizing constant.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_radial, QuadOptions};

/// Member of a supported radial family, before fixing the dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RadialFamily {
    Gaussian,
    /// Student `t` with `nu` degrees of freedom.
    Student {
        nu: f64,
    },
}

impl RadialFamily {
    pub fn student(nu: f64) -> Self {
        RadialFamily::Student { nu }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, RadialFamily::Gaussian)
    }

    /// Short label used in configuration strings: `gaussian`, `t4`, `t4.1`.
    pub fn label(&self) -> String {
        match self {
            RadialFamily::Gaussian => "gaussian".to_string(),
            RadialFamily::Student { nu } => format!("t{nu}"),
        }
    }

    /// `E[rho^j]` is finite exactly when `j` is below this index.
    pub fn tail_index(&self) -> f64 {
        match self {
            RadialFamily::Gaussian => f64::INFINITY,
            RadialFamily::Student { nu } => *nu,
        }
    }
}

impl fmt::Display for RadialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl TryFrom<String> for RadialFamily {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<RadialFamily> for String {
    fn from(f: RadialFamily) -> String {
        f.label()
    }
}

impl FromStr for RadialFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "gaussian" | "normal" => Ok(RadialFamily::Gaussian),
            _ => {
                let nu = s
                    .strip_prefix('t')
                    .and_then(|rest| rest.parse::<f64>().ok())
                    .ok_or_else(|| match s.as_str() {
                        "msgh" | "lsgm" => Error::UnsupportedFamily(format!(
                            "{s}: generalized hyperbolic mixtures are not implemented"
                        )),
                        _ => Error::UnsupportedFamily(s.clone()),
                    })?;
                if !(nu.is_finite() && nu > 0.0) {
                    return Err(Error::UnsupportedFamily(s.clone()));
                }
                Ok(RadialFamily::Student { nu })
            }
        }
    }
}

/// Numerically stable `ln(1 + e^x)`.
fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// A radial density in a fixed dimension, rescaled so that `E[rho^2] = d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDensity {
    family: RadialFamily,
    dim: usize,
    scale: f64,
    ln_mu_base: f64,
}

/// Rescales `family` into the standardized class in dimension `d`.
pub fn standardize(family: RadialFamily, d: usize) -> Result<RadialDensity> {
    RadialDensity::new(family, d)
}

impl RadialDensity {
    pub fn new(family: RadialFamily, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Contract("dimension must be positive".into()));
        }
        let scale = match family {
            RadialFamily::Gaussian => 1.0,
            RadialFamily::Student { nu } => {
                if !(nu.is_finite() && nu > 2.0) {
                    return Err(Error::UnsupportedFamily(format!(
                        "t{nu}: at least 2 finite moments (nu > 2) are required"
                    )));
                }
                // raw Student radii have E[rho^2] = d nu / (nu - 2)
                ((nu - 2.0) / nu).sqrt()
            }
        };
        let mut density = RadialDensity {
            family,
            dim,
            scale,
            ln_mu_base: 0.0,
        };
        let mu = density.raw_moment_quadrature((dim - 1) as f64)?;
        density.ln_mu_base = mu.ln();
        Ok(density)
    }

    pub fn gaussian(dim: usize) -> Self {
        RadialDensity::new(RadialFamily::Gaussian, dim).expect("gaussian is always admissible")
    }

    pub fn student(nu: f64, dim: usize) -> Result<Self> {
        RadialDensity::new(RadialFamily::Student { nu }, dim)
    }

    pub fn family(&self) -> RadialFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Factor applied to the raw radius of the family (`sqrt((nu-2)/nu)` for Student).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn label(&self) -> String {
        self.family.label()
    }

    pub fn is_gaussian(&self) -> bool {
        self.family.is_gaussian()
    }

    /// `ln f(e^u)`, the unnormalized log radial density at log-radius `u`.
    pub fn ln_f_log_radius(&self, u: f64) -> f64 {
        match self.family {
            RadialFamily::Gaussian => -0.5 * (2.0 * u).exp(),
            RadialFamily::Student { nu } => {
                let d = self.dim as f64;
                -0.5 * (d + nu) * softplus(2.0 * u - (nu - 2.0).ln())
            }
        }
    }

    /// `ln f(r)` for `r > 0`.
    pub fn ln_f(&self, r: f64) -> f64 {
        self.ln_f_log_radius(r.ln())
    }

    /// Location score `phi_f(r) = -f'(r)/f(r)`.
    pub fn phi(&self, r: f64) -> f64 {
        match self.family {
            RadialFamily::Gaussian => r,
            RadialFamily::Student { nu } => {
                let d = self.dim as f64;
                (d + nu) * r / ((nu - 2.0) + r * r)
            }
        }
    }

    pub fn phi_prime(&self, r: f64) -> f64 {
        match self.family {
            RadialFamily::Gaussian => 1.0,
            RadialFamily::Student { nu } => {
                let d = self.dim as f64;
                let s = nu - 2.0;
                let den = s + r * r;
                (d + nu) * (s - r * r) / (den * den)
            }
        }
    }

    /// Scatter score; coincides with `phi` for continuously differentiable families.
    pub fn psi(&self, r: f64) -> f64 {
        self.phi(r)
    }

    /// Growth order of `phi` at infinity (`phi(r) ~ r^k`).
    fn phi_growth(&self) -> f64 {
        match self.family {
            RadialFamily::Gaussian => 1.0,
            RadialFamily::Student { .. } => -1.0,
        }
    }

    fn raw_moment_quadrature(&self, k: f64) -> Result<f64> {
        let r = integrate_radial(
            |_| 1.0,
            |u| k * u + self.ln_f_log_radius(u),
            QuadOptions::default(),
        )?;
        Ok(r.value)
    }

    fn check_moment(&self, order: f64) -> Result<()> {
        if order >= self.family.tail_index() {
            return Err(Error::DivergentMoment {
                family: self.label(),
                order,
            });
        }
        Ok(())
    }

    /// `mu_k = int_0^inf r^k f(r) dr` for the stored (unnormalized) `f`.
    pub fn moment_mu(&self, k: f64) -> Result<f64> {
        if k <= -1.0 {
            return Err(Error::Contract(format!("mu_k needs k > -1, got {k}")));
        }
        self.check_moment(k - (self.dim as f64 - 1.0))?;
        self.raw_moment_quadrature(k)
    }

    /// `E[rho^j] = mu_{d-1+j} / mu_{d-1}`.
    pub fn expect_power(&self, j: f64) -> Result<f64> {
        self.check_moment(j)?;
        let d1 = self.dim as f64 - 1.0;
        let r = integrate_radial(
            |_| 1.0,
            |u| (d1 + j) * u + self.ln_f_log_radius(u) - self.ln_mu_base,
            QuadOptions::default(),
        )?;
        Ok(r.value)
    }

    /// `E[h(rho)]` under the radial law of this density.
    pub fn expect(&self, h: impl Fn(f64) -> f64) -> Result<f64> {
        let d1 = self.dim as f64 - 1.0;
        let r = integrate_radial(
            h,
            |u| d1 * u + self.ln_f_log_radius(u) - self.ln_mu_base,
            QuadOptions::default(),
        )?;
        if !r.value.is_finite() {
            return Err(Error::NumericalFailure(
                "radial expectation is not finite".into(),
            ));
        }
        Ok(r.value)
    }

    /// Density of the Mahalanobis radius at `r > 0`.
    pub fn radial_pdf_tilde(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Contract(format!(
                "radial density needs r > 0, got {r}"
            )));
        }
        let u = r.ln();
        Ok(((self.dim as f64 - 1.0) * u + self.ln_f_log_radius(u) - self.ln_mu_base).exp())
    }

    /// `mu_{d+1} / mu_{d-1}`; equals `d` for every standardized density.
    pub fn standardization_ratio(&self) -> Result<f64> {
        self.expect(|r| r * r)
    }

    /// Scores of this density.
    pub fn scores(&self) -> ScoreBundle<'_> {
        ScoreBundle { density: self }
    }
}

/// Location score `phi_f`, its derivative, and the scatter score `psi_f`.
#[derive(Debug, Clone, Copy)]
pub struct ScoreBundle<'a> {
    density: &'a RadialDensity,
}

impl ScoreBundle<'_> {
    pub fn phi(&self, r: f64) -> f64 {
        self.density.phi(r)
    }
    pub fn phi_prime(&self, r: f64) -> f64 {
        self.density.phi_prime(r)
    }
    pub fn psi(&self, r: f64) -> f64 {
        self.density.psi(r)
    }
}

pub fn scores(f: &RadialDensity) -> ScoreBundle<'_> {
    f.scores()
}

/// Fisher information for location, `I_{d,f} = E[phi_f(rho)^2]`.
pub fn fisher_location(f: &RadialDensity) -> Result<f64> {
    f.expect(|r| {
        let p = f.phi(r);
        p * p
    })
}

/// Fisher information for scatter, `J_{d,f} = E[rho^2 psi_f(rho)^2]`.
pub fn fisher_scatter(f: &RadialDensity) -> Result<f64> {
    f.expect(|r| {
        let p = r * f.psi(r);
        p * p
    })
}

const CLASS_EPSILON: f64 = 0.1;

fn same_dim(f: &RadialDensity, g: &RadialDensity) -> Result<()> {
    if f.dim != g.dim {
        return Err(Error::Contract(format!(
            "reference has dimension {} but actual density has {}",
            f.dim, g.dim
        )));
    }
    Ok(())
}

/// Requires `E_g[|phi_f(rho)|^p rho^extra]` to be finite, judged from the
/// growth of `phi_f` and the tail index of `g`.
fn require_integrable(f: &RadialDensity, g: &RadialDensity, p: f64, extra: f64) -> Result<()> {
    let order = (p * f.phi_growth()).max(0.0) + extra;
    if order >= g.family.tail_index() {
        return Err(Error::OutsideClass {
            reference: f.label(),
            actual: g.label(),
            reason: format!("E[rho^{order}] diverges"),
        });
    }
    Ok(())
}

/// Checks that `g` belongs to the class of actual densities admissible for
/// the reference `f`: the cross-information is finite and non-zero and
/// `phi_f` has a finite moment of order `2 + 0.1` under `g`.
pub fn check_admissible(f: &RadialDensity, g: &RadialDensity) -> Result<f64> {
    same_dim(f, g)?;
    require_integrable(f, g, 2.0 + CLASS_EPSILON, 0.0)?;
    // finiteness of the (2 + eps)-moment, checked by quadrature as well
    g.expect(|r| f.phi(r).abs().powf(2.0 + CLASS_EPSILON))
        .map_err(|e| Error::OutsideClass {
            reference: f.label(),
            actual: g.label(),
            reason: e.to_string(),
        })?;
    let k = raw_cross_info(f, g)?;
    if !(k.is_finite() && k.abs() >= 1e-10) {
        return Err(Error::OutsideClass {
            reference: f.label(),
            actual: g.label(),
            reason: format!("cross-information {k:e} is zero or infinite"),
        });
    }
    Ok(k)
}

fn raw_cross_info(f: &RadialDensity, g: &RadialDensity) -> Result<f64> {
    let d1 = f.dim as f64 - 1.0;
    g.expect(|r| f.phi_prime(r) + d1 / r * f.phi(r))
}

/// Cross-information `K_{d,f,g} = E_g[phi_f'(rho) + (d-1) phi_f(rho) / rho]`.
pub fn cross_info(f: &RadialDensity, g: &RadialDensity) -> Result<f64> {
    check_admissible(f, g)
}

/// `alpha_{d,f,g} = E_g[rho phi_f(rho)]`.
pub fn alpha_const(f: &RadialDensity, g: &RadialDensity) -> Result<f64> {
    same_dim(f, g)?;
    require_integrable(f, g, 1.0, 1.0)?;
    g.expect(|r| r * f.phi(r))
}

/// `gamma_{d,f,g} = E_g[(rho - d phi_f(rho) / K_{d,f,g})^2]`.
pub fn gamma_const(f: &RadialDensity, g: &RadialDensity) -> Result<f64> {
    let k = cross_info(f, g)?;
    gamma_const_with_k(f, g, k)
}

pub(crate) fn gamma_const_with_k(f: &RadialDensity, g: &RadialDensity, k: f64) -> Result<f64> {
    require_integrable(f, g, 2.0, 0.0)?;
    g.check_moment(2.0)?;
    let d = f.dim as f64;
    g.expect(|r| {
        let w = r - d / k * f.phi(r);
        w * w
    })
}

/// Constant `c_d = 4 Gamma(d/2) / ((d^2 - 1) sqrt(pi) Gamma((d-1)/2))` of the
/// pseudo-Gaussian central sequence; needs `d >= 2`.
pub fn c_d(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::Contract("c_d needs d >= 2".into()));
    }
    let df = d as f64;
    let ln = 4f64.ln() + ln_gamma(df / 2.0)
        - (df * df - 1.0).ln()
        - 0.5 * std::f64::consts::PI.ln()
        - ln_gamma((df - 1.0) / 2.0);
    Ok(ln.exp())
}

/// Moment ratios `mu_{d-1+k;g} / mu_{d-1;g}` for `k = 1..=4`.
pub fn radial_moment_ratios(g: &RadialDensity) -> Result<[f64; 4]> {
    Ok([
        g.expect_power(1.0)?,
        g.expect_power(2.0)?,
        g.expect_power(3.0)?,
        g.expect_power(4.0)?,
    ])
}

/// Variance factor of the pseudo-Gaussian central sequence, expressed in the
/// moment ratios `m_k = mu_{d-1+k} / mu_{d-1}`.
pub fn gamma_pg_from_ratios(d: usize, m: &[f64; 4]) -> Result<f64> {
    let c = c_d(d)?;
    let df = d as f64;
    let [m1, m2, m3, m4] = *m;
    Ok(
        3.0 / (df * (df + 2.0)) * m4 - 2.0 * c * c * (df + 1.0) * m1 * m3
            + c * c * (df + 1.0) * (df + 1.0) / df * m1 * m1 * m2,
    )
}

/// `gamma_G` for the actual density `g`; requires finite fourth moments.
pub fn gamma_pg(g: &RadialDensity) -> Result<f64> {
    let m = radial_moment_ratios(g)?;
    gamma_pg_from_ratios(g.dim, &m)
}

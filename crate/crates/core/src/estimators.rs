//! Location and scatter estimators: Tyler's shape matrix, its rescaling to a
//! scatter matrix, the spatial median, a Tyler-standardized (affine
//! equivariant) spatial median, and the sample mean and covariance.
//!
//! Data matrices are `n x d` with one observation per row. All routines are
//! deterministic.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::SpdMatrix;

pub const TYLER_MAX_ITER: usize = 500;
pub const TYLER_TOL: f64 = 1e-10;
pub const WEISZFELD_MAX_ITER: usize = 1000;
pub const HR_MAX_ITER: usize = 200;

/// Location estimator used when the center is unspecified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocationEstimator {
    #[default]
    Mean,
    SpatialMedian,
    /// Spatial median computed jointly with Tyler's shape (affine equivariant).
    Hr,
}

/// Scatter estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScatterEstimator {
    /// Tyler's shape rescaled so that the mean squared distance is `d`.
    #[default]
    Tyler,
    /// Sample covariance with `1/n` normalization.
    Cov,
}

/// The pair of estimators plugged into a test; recorded in every result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct EstimatorChoice {
    #[serde(default)]
    pub location: LocationEstimator,
    #[serde(default)]
    pub scatter: ScatterEstimator,
}

impl LocationEstimator {
    pub fn name(&self) -> &'static str {
        match self {
            LocationEstimator::Mean => "mean",
            LocationEstimator::SpatialMedian => "spatial-median",
            LocationEstimator::Hr => "hr",
        }
    }
}

impl ScatterEstimator {
    pub fn name(&self) -> &'static str {
        match self {
            ScatterEstimator::Tyler => "tyler",
            ScatterEstimator::Cov => "cov",
        }
    }
}

impl FromStr for LocationEstimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mean" => Ok(LocationEstimator::Mean),
            "spatial-median" => Ok(LocationEstimator::SpatialMedian),
            "hr" => Ok(LocationEstimator::Hr),
            "mcd" => Err(Error::Config("the MCD estimator is not implemented".into())),
            other => Err(Error::Config(format!(
                "unknown location estimator '{other}'"
            ))),
        }
    }
}

impl FromStr for ScatterEstimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tyler" => Ok(ScatterEstimator::Tyler),
            "cov" => Ok(ScatterEstimator::Cov),
            "mcd" => Err(Error::Config("the MCD estimator is not implemented".into())),
            other => Err(Error::Config(format!(
                "unknown scatter estimator '{other}'"
            ))),
        }
    }
}

impl fmt::Display for EstimatorChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.location.name(), self.scatter.name())
    }
}

/// Parses `location/scatter`, e.g. `hr/tyler`; a bare location keeps Tyler.
impl FromStr for EstimatorChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (loc, scatter) = s.split_once('/').unwrap_or((s, "tyler"));
        Ok(EstimatorChoice {
            location: loc.parse()?,
            scatter: scatter.parse()?,
        })
    }
}

impl EstimatorChoice {
    pub fn new(location: LocationEstimator, scatter: ScatterEstimator) -> Self {
        EstimatorChoice { location, scatter }
    }

    /// Scatter estimate about a given center.
    pub fn scatter_about(&self, data: &DMatrix<f64>, center: &DVector<f64>) -> Result<SpdMatrix> {
        match self.scatter {
            ScatterEstimator::Tyler => {
                let shape = tyler_shape(data, center)?;
                rescale_to_scatter(&shape, data, center)
            }
            ScatterEstimator::Cov => cov_about(data, center),
        }
    }

    /// Joint location and scatter estimate for the unspecified-location tests.
    pub fn estimate(&self, data: &DMatrix<f64>) -> Result<(DVector<f64>, SpdMatrix)> {
        match (self.location, self.scatter) {
            (LocationEstimator::Hr, ScatterEstimator::Tyler) => {
                let (theta, shape) = hr_median(data)?;
                let sigma = rescale_to_scatter(&shape, data, &theta)?;
                Ok((theta, sigma))
            }
            (loc, _) => {
                let theta = match loc {
                    LocationEstimator::Mean => sample_mean(data)?,
                    LocationEstimator::SpatialMedian => spatial_median(data)?,
                    LocationEstimator::Hr => hr_median(data)?.0,
                };
                let sigma = self.scatter_about(data, &theta)?;
                Ok((theta, sigma))
            }
        }
    }
}

fn check_data(data: &DMatrix<f64>, required: usize) -> Result<()> {
    if data.ncols() == 0 {
        return Err(Error::Contract("data has no columns".into()));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("data contains non-finite values".into()));
    }
    if data.nrows() < required {
        return Err(Error::InsufficientSample {
            n: data.nrows(),
            required,
        });
    }
    Ok(())
}

fn check_center(data: &DMatrix<f64>, center: &DVector<f64>) -> Result<()> {
    if center.len() != data.ncols() {
        return Err(Error::Contract(format!(
            "center has length {} but data has {} columns",
            center.len(),
            data.ncols()
        )));
    }
    Ok(())
}

/// Residuals `x_i - center` as rows.
fn residuals(data: &DMatrix<f64>, center: &DVector<f64>) -> DMatrix<f64> {
    let mut r = data.clone();
    for mut row in r.row_iter_mut() {
        row -= center.transpose();
    }
    r
}

/// Squared Mahalanobis norms of the rows of `r` in the metric `v`, via Cholesky.
fn squared_distances(r: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DVector<f64>> {
    let chol = v
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("scatter lost positive definiteness".into()))?;
    // rows of r L^{-T} are L^{-1} r_i
    let z = chol
        .l()
        .solve_lower_triangular(&r.transpose())
        .ok_or_else(|| Error::NumericalFailure("triangular solve failed".into()))?;
    Ok(DVector::from_iterator(
        r.nrows(),
        z.column_iter().map(|c| c.norm_squared()),
    ))
}

fn normalize_det(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = m.nrows() as f64;
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("shape iterate is not positive definite".into()))?;
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    Ok(m * (-log_det / d).exp())
}

fn tyler_step(r: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, d) = r.shape();
    let dist2 = squared_distances(r, v)?;
    let mut m = DMatrix::zeros(d, d);
    for (i, row) in r.row_iter().enumerate() {
        m.ger(1.0 / dist2[i], &row.transpose(), &row.transpose(), 1.0);
    }
    m *= d as f64 / n as f64;
    normalize_det(&((&m + m.transpose()) * 0.5))
}

/// Tyler's shape matrix about a fixed center, normalized to unit determinant.
pub fn tyler_shape(data: &DMatrix<f64>, center: &DVector<f64>) -> Result<SpdMatrix> {
    let d = data.ncols();
    check_data(data, d * d.saturating_sub(1) + 1)?;
    check_center(data, center)?;
    let r = residuals(data, center);
    let norms: Vec<f64> = r.row_iter().map(|row| row.norm()).collect();
    let scale = norms.iter().cloned().fold(0.0, f64::max);
    if let Some(index) = norms
        .iter()
        .position(|&x| x <= 1e-13 * scale.max(f64::MIN_POSITIVE))
    {
        return Err(Error::DegenerateObservation { index });
    }
    let n = data.nrows() as f64;
    let start = r.transpose() * &r / n;
    let mut v = normalize_det(&start).unwrap_or_else(|_| DMatrix::identity(d, d));
    for _ in 0..TYLER_MAX_ITER {
        let next = tyler_step(&r, &v)?;
        let diff = (&next - &v).norm();
        v = next;
        if diff < TYLER_TOL {
            return SpdMatrix::new(v).map(|s| s.normalized_det());
        }
    }
    Err(Error::NumericalFailure(format!(
        "Tyler iteration did not converge in {TYLER_MAX_ITER} steps"
    )))
}

/// Scales a shape matrix so that the mean squared Mahalanobis distance about
/// `center` equals `d`.
pub fn rescale_to_scatter(
    shape: &SpdMatrix,
    data: &DMatrix<f64>,
    center: &DVector<f64>,
) -> Result<SpdMatrix> {
    check_center(data, center)?;
    if shape.dim() != data.ncols() {
        return Err(Error::Contract("shape and data dimensions differ".into()));
    }
    let r = residuals(data, center);
    let dist2 = squared_distances(&r, shape.as_matrix())?;
    let s = dist2.mean() / data.ncols() as f64;
    if !(s > 0.0) {
        return Err(Error::Degenerate("all distances are zero".into()));
    }
    shape.scaled(s)
}

pub fn sample_mean(data: &DMatrix<f64>) -> Result<DVector<f64>> {
    check_data(data, 1)?;
    Ok(data.row_mean().transpose())
}

fn cov_about(data: &DMatrix<f64>, center: &DVector<f64>) -> Result<SpdMatrix> {
    check_data(data, data.ncols() + 1)?;
    check_center(data, center)?;
    let r = residuals(data, center);
    let c = r.transpose() * &r / data.nrows() as f64;
    SpdMatrix::new(c).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => {
            Error::Degenerate("sample covariance is singular".into())
        }
        other => other,
    })
}

/// Sample covariance with `1/n` normalization.
pub fn sample_cov(data: &DMatrix<f64>) -> Result<SpdMatrix> {
    let mean = sample_mean(data)?;
    cov_about(data, &mean)
}

/// Spatial median by Weiszfeld's algorithm, modified as in Vardi and Zhang
/// for iterates that land on an observation.
pub fn spatial_median(data: &DMatrix<f64>) -> Result<DVector<f64>> {
    check_data(data, 2)?;
    let (n, d) = data.shape();
    let scale = data.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let coincide = 1e-12 * scale;
    let mut y = data.row_mean().transpose();
    for _ in 0..WEISZFELD_MAX_ITER {
        let mut num = DVector::zeros(d);
        let mut den = 0.0;
        let mut grad = DVector::zeros(d);
        let mut eta = 0usize;
        for row in data.row_iter() {
            let diff = row.transpose() - &y;
            let dist = diff.norm();
            if dist <= coincide {
                eta += 1;
                continue;
            }
            num += row.transpose() / dist;
            den += 1.0 / dist;
            grad += diff / dist;
        }
        if den == 0.0 {
            return Ok(y);
        }
        let t = num / den;
        let next = if eta == 0 {
            t
        } else {
            // y is an observation: optimal iff the pull of the others is at most eta
            let r = grad.norm();
            if r <= eta as f64 {
                return Ok(y);
            }
            let g = eta as f64 / r;
            t * (1.0 - g) + &y * g
        };
        let step = (&next - &y).norm();
        y = next;
        if step <= 1e-12 * scale {
            break;
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericalFailure(
                "Weiszfeld iterate is not finite".into(),
            ));
        }
    }
    let g = spatial_median_gradient(data, &y) / n as f64;
    if g > 1e-6 {
        // Weiszfeld crawls towards a minimizer sitting on an observation
        if let Some(x) = observation_minimizer(data, &y) {
            return Ok(x);
        }
        return Err(Error::NumericalFailure(format!(
            "spatial median did not converge (gradient norm {g:e})"
        )));
    }
    Ok(y)
}

/// The observation nearest to `y`, when it satisfies the optimality
/// condition of the spatial median.
fn observation_minimizer(data: &DMatrix<f64>, y: &DVector<f64>) -> Option<DVector<f64>> {
    let nearest = data
        .row_iter()
        .map(|r| r.transpose())
        .min_by(|a, b| (a - y).norm().total_cmp(&(b - y).norm()))?;
    let mut pull = DVector::zeros(data.ncols());
    let mut eta = 0usize;
    for row in data.row_iter() {
        let diff = row.transpose() - &nearest;
        let dist = diff.norm();
        if dist == 0.0 {
            eta += 1;
        } else {
            pull += diff / dist;
        }
    }
    (pull.norm() <= eta as f64 * (1.0 + 1e-9)).then_some(nearest)
}

/// Norm of the gradient of `sum_i |x_i - y|`, ignoring observations equal to `y`.
pub fn spatial_median_gradient(data: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let mut grad = DVector::zeros(data.ncols());
    for row in data.row_iter() {
        let diff = y - row.transpose();
        let dist = diff.norm();
        if dist > 0.0 {
            grad += diff / dist;
        }
    }
    grad.norm()
}

/// Affine equivariant spatial median. Alternates a Tyler shape about the
/// current location with the spatial median of the standardized residuals,
/// until the location moves less than `1e-8` relative to the data scale.
/// Returns the location and the unit-determinant shape about it.
pub fn hr_median(data: &DMatrix<f64>) -> Result<(DVector<f64>, SpdMatrix)> {
    let d = data.ncols();
    check_data(data, d * d.saturating_sub(1) + 1)?;
    let scale = data.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let mut theta = spatial_median(data)?;
    for _ in 0..HR_MAX_ITER {
        let shape = tyler_shape(data, &theta)?;
        let z = residuals(data, &theta) * shape.sym_inv_sqrt()?.as_matrix();
        let step = shape.sym_sqrt().as_matrix() * spatial_median(&z)?;
        theta += &step;
        if step.norm() < 1e-8 * scale {
            let shape = tyler_shape(data, &theta)?;
            return Ok((theta, shape));
        }
    }
    Err(Error::NumericalFailure(format!(
        "location/shape alternation did not settle in {HR_MAX_ITER} rounds"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::tests::random_spd;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian_data(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, d, |_, _| rng.sample(StandardNormal))
    }

    fn correlated(n: usize, sigma: &SpdMatrix, shift: &[f64], seed: u64) -> DMatrix<f64> {
        let z = gaussian_data(n, sigma.dim(), seed);
        let root = sigma.sym_sqrt();
        let mut x = z * root.as_matrix();
        for mut row in x.row_iter_mut() {
            for (j, s) in shift.iter().enumerate() {
                row[j] += s;
            }
        }
        x
    }

    fn random_affine(d: usize, rng: &mut impl Rng) -> (DMatrix<f64>, DVector<f64>) {
        loop {
            let a: DMatrix<f64> = DMatrix::from_fn(d, d, |_, _| rng.random_range(-2.0..2.0));
            if a.determinant().abs() > 0.3 {
                let b = DVector::from_fn(d, |_, _| rng.random_range(-5.0..5.0));
                return (a, b);
            }
        }
    }

    fn transform(data: &DMatrix<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> DMatrix<f64> {
        let mut y = data * a.transpose();
        for mut row in y.row_iter_mut() {
            row += b.transpose();
        }
        y
    }

    fn sign_residual(data: &DMatrix<f64>, center: &DVector<f64>, v: &SpdMatrix) -> f64 {
        let d = data.ncols();
        let root = v.sym_inv_sqrt().unwrap();
        let mut m = DMatrix::zeros(d, d);
        for row in data.row_iter() {
            let s = root.as_matrix() * (row.transpose() - center);
            let s = &s / s.norm();
            m += &s * s.transpose();
        }
        (m * (d as f64 / data.nrows() as f64) - DMatrix::identity(d, d)).norm()
    }

    #[test]
    fn tyler_axis_points_give_identity() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        let v = tyler_shape(&x, &DVector::zeros(2)).unwrap();
        assert!((v.as_matrix() - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn tyler_fixed_point_and_determinant() {
        let x = gaussian_data(500, 3, 11);
        let c = DVector::zeros(3);
        let v = tyler_shape(&x, &c).unwrap();
        assert!((v.determinant() - 1.0).abs() < 1e-10);
        assert!((v.as_matrix() - DMatrix::identity(3, 3)).norm() < 0.3);
        assert!(sign_residual(&x, &c, &v) < 1e-9);
    }

    #[test]
    fn tyler_is_affine_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..5 {
            let x = gaussian_data(80, 3, 100 + seed);
            let theta = DVector::from_vec(vec![0.1, -0.2, 0.3]);
            let (a, b) = random_affine(3, &mut rng);
            let v = tyler_shape(&x, &theta).unwrap();
            let y = transform(&x, &a, &b);
            let w = tyler_shape(&y, &(&a * &theta + &b)).unwrap();
            let expected = SpdMatrix::new(&a * v.as_matrix() * a.transpose())
                .unwrap()
                .normalized_det();
            assert!((w.as_matrix() - expected.as_matrix()).norm() < 1e-8);
        }
    }

    #[test]
    fn tyler_errors() {
        let x = gaussian_data(6, 3, 1);
        assert!(matches!(
            tyler_shape(&x, &DVector::zeros(3)),
            Err(Error::InsufficientSample { .. })
        ));
        let mut x = gaussian_data(20, 2, 1);
        x.row_mut(7).fill(0.0);
        assert!(matches!(
            tyler_shape(&x, &DVector::zeros(2)),
            Err(Error::DegenerateObservation { index: 7 })
        ));
    }

    #[test]
    fn rescaling() {
        let x = gaussian_data(200, 3, 2);
        let c = sample_mean(&x).unwrap();
        let shape = tyler_shape(&x, &c).unwrap();
        let sigma = rescale_to_scatter(&shape, &x, &c).unwrap();
        let again = rescale_to_scatter(&sigma, &x, &c).unwrap();
        assert!((again.as_matrix() - sigma.as_matrix()).norm() < 1e-12);
        let r = residuals(&x, &c);
        let mean_d2 = squared_distances(&r, sigma.as_matrix()).unwrap().mean();
        assert!((mean_d2 - 3.0).abs() < 1e-12);

        let y = &x * 3.0;
        let c3 = &c * 3.0;
        let s3 = rescale_to_scatter(&tyler_shape(&y, &c3).unwrap(), &y, &c3).unwrap();
        assert!((s3.as_matrix() - sigma.as_matrix() * 9.0).norm() < 1e-8);
    }

    #[test]
    fn rescaled_tyler_is_consistent() {
        let sigma =
            SpdMatrix::from_rows(&[&[2.0, 1.0, 1.0], &[1.0, 3.0, 2.0], &[1.0, 2.0, 5.0]]).unwrap();
        let x = correlated(1000, &sigma, &[1.0, 2.0, 3.0], 17);
        let c = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let est = EstimatorChoice::default().scatter_about(&x, &c).unwrap();
        assert!((est.as_matrix() - sigma.as_matrix()).norm() < 0.6);
        let rel = (est.as_matrix() - sigma.as_matrix()).norm() / sigma.as_matrix().norm();
        assert!(rel < 0.1, "relative error {rel}");
    }

    #[test]
    fn spatial_median_symmetric_set() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, -1.0, -2.0, 3.0, -1.0, -3.0, 1.0]);
        assert!(spatial_median(&x).unwrap().norm() < 1e-10);
    }

    #[test]
    fn spatial_median_gradient_vanishes_and_translates() {
        let x = gaussian_data(150, 4, 3);
        let m = spatial_median(&x).unwrap();
        assert!(spatial_median_gradient(&x, &m) < 1e-8 * 150.0);
        let b = DVector::from_vec(vec![10.0, -3.0, 0.5, 7.0]);
        let y = transform(&x, &DMatrix::identity(4, 4), &b);
        let mb = spatial_median(&y).unwrap();
        assert!((mb - (&m + &b)).norm() < 1e-9);
    }

    #[test]
    fn spatial_median_at_observation() {
        // median of five collinear-ish points is the middle observation
        let x =
            DMatrix::from_row_slice(5, 2, &[0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.5]);
        let m = spatial_median(&x).unwrap();
        assert!(m.norm() < 1e-9, "{m}");
    }

    #[test]
    fn spatial_median_resists_outlier() {
        let mut x = gaussian_data(30, 2, 8) * 0.5;
        x.row_mut(0).copy_from_slice(&[1000.0, 1000.0]);
        let m = spatial_median(&x).unwrap();
        // brute-force grid minimization of the objective as an oracle
        let obj = |y: &DVector<f64>| {
            x.row_iter()
                .map(|r| (r.transpose() - y).norm())
                .sum::<f64>()
        };
        let mut best = (f64::INFINITY, DVector::zeros(2));
        for i in -100..=100 {
            for j in -100..=100 {
                let y = DVector::from_vec(vec![i as f64 * 0.01, j as f64 * 0.01]);
                let v = obj(&y);
                if v < best.0 {
                    best = (v, y);
                }
            }
        }
        assert!((&m - &best.1).norm() < 0.02);
        assert!(m.norm() < 1.0);
        assert!(obj(&m) <= best.0 + 1e-9);
    }

    #[test]
    fn hr_is_affine_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for seed in 0..4 {
            let x = gaussian_data(100, 3, 40 + seed);
            let (t, v) = hr_median(&x).unwrap();
            let (a, b) = random_affine(3, &mut rng);
            let y = transform(&x, &a, &b);
            let (ty, vy) = hr_median(&y).unwrap();
            assert!((ty - (&a * &t + &b)).norm() < 1e-7);
            let expected = SpdMatrix::new(&a * v.as_matrix() * a.transpose())
                .unwrap()
                .normalized_det();
            assert!((vy.as_matrix() - expected.as_matrix()).norm() < 1e-7);
        }
    }

    #[test]
    fn hr_near_true_center_and_spherical_case() {
        let sigma = SpdMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 3.0]]).unwrap();
        let x = correlated(2000, &sigma, &[5.0, -1.0], 4);
        let (t, _) = hr_median(&x).unwrap();
        assert!((t - DVector::from_vec(vec![5.0, -1.0])).norm() < 0.15);

        // equal-radius points spread over the circle: shape identity, centre 0
        let k = 12;
        let x = DMatrix::from_fn(k, 2, |i, j| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
            if j == 0 {
                a.cos()
            } else {
                a.sin()
            }
        });
        let (t, v) = hr_median(&x).unwrap();
        assert!((t.clone() - spatial_median(&x).unwrap()).norm() < 1e-9);
        assert!(t.norm() < 1e-9);
        assert!((v.as_matrix() - DMatrix::identity(2, 2)).norm() < 1e-8);
    }

    #[test]
    fn observation_minimizer_checks_the_subgradient() {
        // the origin beats every other point: the unit pulls of the others cancel
        let x = DMatrix::from_row_slice(
            6,
            2,
            &[0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 2.0, 0.0, -1.0, 0.3, 0.3],
        );
        let near = DVector::from_vec(vec![1e-7, -2e-7]);
        assert_eq!(observation_minimizer(&x, &near).unwrap(), DVector::zeros(2));
        assert!(observation_minimizer(&x, &DVector::from_vec(vec![0.99, 0.0])).is_none());
    }

    #[test]
    fn hr_on_an_observation_is_degenerate() {
        let k = 12;
        let mut x = DMatrix::zeros(k + 1, 2);
        for i in 0..k {
            let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
            x[(i, 0)] = 3.0 * a.cos();
            x[(i, 1)] = a.sin();
        }
        assert!(matches!(
            hr_median(&x),
            Err(Error::DegenerateObservation { index: 12 })
        ));
    }

    #[test]
    fn mean_and_covariance() {
        let x = gaussian_data(50, 3, 9);
        let m = sample_mean(&x).unwrap();
        let shifted = &x + DMatrix::from_element(50, 3, 2.5);
        assert!(
            (sample_mean(&shifted).unwrap() - (&m + DVector::from_element(3, 2.5))).norm() < 1e-12
        );
        let two = DMatrix::from_row_slice(2, 2, &[1.0, 4.0, 3.0, -2.0]);
        assert_eq!(
            sample_mean(&two).unwrap(),
            DVector::from_vec(vec![2.0, 1.0])
        );

        let c = sample_cov(&x).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let mut s = 0.0;
                for i in 0..50 {
                    s += (x[(i, a)] - m[a]) * (x[(i, b)] - m[b]);
                }
                assert!((c.as_matrix()[(a, b)] - s / 50.0).abs() < 1e-12);
            }
        }
        let flat = DMatrix::from_fn(10, 2, |i, j| if j == 0 { i as f64 } else { 2.0 * i as f64 });
        assert!(matches!(sample_cov(&flat), Err(Error::Degenerate(_))));
    }

    #[test]
    fn determinism_and_names() {
        let x = gaussian_data(60, 3, 21);
        assert_eq!(hr_median(&x).unwrap(), hr_median(&x).unwrap());
        assert_eq!(
            "spatial-median".parse::<LocationEstimator>().unwrap(),
            LocationEstimator::SpatialMedian
        );
        assert!("mcd".parse::<ScatterEstimator>().is_err());
        let choice: EstimatorChoice = serde_json::from_str(r#"{"location":"hr"}"#).unwrap();
        assert_eq!(
            choice,
            EstimatorChoice::new(LocationEstimator::Hr, ScatterEstimator::Tyler)
        );
        assert_eq!(choice.to_string(), "hr/tyler");
    }

    #[test]
    fn random_spd_is_usable_as_scatter() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_spd(3, &mut rng);
        let x = correlated(400, &s, &[0.0; 3], 5);
        let (_, est) = EstimatorChoice::default().estimate(&x).unwrap();
        assert!((est.as_matrix() - s.as_matrix()).norm() / s.as_matrix().norm() < 0.2);
    }
}

//! Distances and multivariate signs of a sample, the central sequence of the
//! skew-elliptical model at symmetry, and its Fisher information.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matops::{commutation_k, duplication_p, kron, projection_j, vec, SpdMatrix};
use crate::radial::{fisher_location, fisher_scatter, RadialDensity};

/// `Pi'(0)` for the standard normal skewing function.
pub const PI_DOT_GAUSSIAN: f64 = 0.398_942_280_401_432_7;

/// Mahalanobis distances `d_i(theta, Sigma)` and signs `U_i(theta, Sigma)`.
#[derive(Debug, Clone)]
pub struct SampleDecomposition {
    pub distances: DVector<f64>,
    /// Unit vectors, one per row.
    pub signs: DMatrix<f64>,
    pub location: DVector<f64>,
    pub scatter: SpdMatrix,
}

/// Splits each residual `Sigma^{-1/2}(x_i - theta)` into its norm and direction.
pub fn decompose(
    data: &DMatrix<f64>,
    theta: &DVector<f64>,
    sigma: &SpdMatrix,
) -> Result<SampleDecomposition> {
    let (n, d) = data.shape();
    if theta.len() != d || sigma.dim() != d {
        return Err(Error::Contract(format!(
            "data have {d} columns but theta has length {} and Sigma is {}x{}",
            theta.len(),
            sigma.dim(),
            sigma.dim()
        )));
    }
    if n == 0 {
        return Err(Error::InsufficientSample { n, required: 1 });
    }
    let root = sigma.sym_inv_sqrt()?;
    let mut z = data.clone();
    for mut row in z.row_iter_mut() {
        row -= theta.transpose();
    }
    let mut z = z * root.as_matrix();
    let mut distances = DVector::zeros(n);
    for (i, mut row) in z.row_iter_mut().enumerate() {
        let r = row.norm();
        if !(r > 0.0) {
            return Err(Error::DegenerateObservation { index: i });
        }
        distances[i] = r;
        row /= r;
    }
    Ok(SampleDecomposition {
        distances,
        signs: z,
        location: theta.clone(),
        scatter: sigma.clone(),
    })
}

impl SampleDecomposition {
    pub fn n(&self) -> usize {
        self.distances.len()
    }

    pub fn dim(&self) -> usize {
        self.signs.ncols()
    }

    /// `sum_i w_i U_i`.
    pub fn weighted_sign_sum(&self, weights: &DVector<f64>) -> DVector<f64> {
        self.signs.tr_mul(weights)
    }

    /// `theta + Sigma^{1/2} d_i U_i`, row by row.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut x = DMatrix::zeros(self.n(), self.dim());
        for (i, mut row) in x.row_iter_mut().enumerate() {
            row.copy_from(&(self.signs.row(i) * self.distances[i]));
        }
        let mut x = x * self.scatter.sym_sqrt().as_matrix();
        for mut row in x.row_iter_mut() {
            row += self.location.transpose();
        }
        x
    }
}

/// The three blocks of the central sequence at `lambda = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralSequence {
    pub loc_block: DVector<f64>,
    pub scatter_block: DVector<f64>,
    pub skew_block: DVector<f64>,
    pub pi_dot: f64,
}

impl CentralSequence {
    /// Blocks stacked in the order (location, vech scatter, skewness).
    pub fn stacked(&self) -> DVector<f64> {
        let mut out = Vec::with_capacity(self.loc_block.len() * 2 + self.scatter_block.len());
        out.extend(self.loc_block.iter());
        out.extend(self.scatter_block.iter());
        out.extend(self.skew_block.iter());
        DVector::from_vec(out)
    }
}

/// `2 n^{-1/2} Pi'(0) sum_i d_i U_i`; free of the radial density.
pub fn skew_block(dec: &SampleDecomposition, pi_dot: f64) -> DVector<f64> {
    let s = dec.weighted_sign_sum(&dec.distances);
    s * (2.0 * pi_dot / (dec.n() as f64).sqrt())
}

/// `(Sigma^{-1/2} (x) Sigma^{-1/2})` applied through `P_d`, shared by the scatter block and its information.
fn scatter_map(sigma: &SpdMatrix) -> Result<DMatrix<f64>> {
    let d = sigma.dim();
    let r = sigma.sym_inv_sqrt()?;
    Ok(duplication_p(d) * kron(r.as_matrix(), r.as_matrix()))
}

pub fn central_sequence(
    dec: &SampleDecomposition,
    f: &RadialDensity,
    pi_dot: f64,
) -> Result<CentralSequence> {
    let (n, d) = (dec.n(), dec.dim());
    if f.dim() != d {
        return Err(Error::Contract(format!(
            "density has dimension {} but data {d}",
            f.dim()
        )));
    }
    let sqrt_n = (n as f64).sqrt();
    let phi = dec.distances.map(|r| f.phi(r));
    let root = dec.scatter.sym_inv_sqrt()?;
    let loc_block = root.as_matrix() * dec.weighted_sign_sum(&phi) / sqrt_n;

    let mut m = DMatrix::zeros(d, d);
    for i in 0..n {
        let u = dec.signs.row(i).transpose();
        let r = dec.distances[i];
        m.ger(f.psi(r) * r, &u, &u, 1.0);
    }
    m -= DMatrix::identity(d, d) * n as f64;
    let scatter_block = scatter_map(&dec.scatter)? * vec(&m) * (0.5 / sqrt_n);

    Ok(CentralSequence {
        loc_block,
        scatter_block,
        skew_block: skew_block(dec, pi_dot),
        pi_dot,
    })
}

/// Nonzero blocks of the Fisher information at symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherBlocks {
    pub g11: DMatrix<f64>,
    pub g13: DMatrix<f64>,
    pub g22: DMatrix<f64>,
    pub g33: DMatrix<f64>,
}

pub fn fisher_blocks(sigma: &SpdMatrix, f: &RadialDensity, pi_dot: f64) -> Result<FisherBlocks> {
    let d = sigma.dim();
    if f.dim() != d {
        return Err(Error::Contract(format!(
            "density has dimension {} but Sigma {d}",
            f.dim()
        )));
    }
    let df = d as f64;
    let info_loc = fisher_location(f)?;
    let info_scatter = fisher_scatter(f)?;
    let g11 = sigma.inverse()?.into_matrix() * (info_loc / df);
    let g13 = sigma.sym_inv_sqrt()?.into_matrix() * (2.0 * pi_dot);
    let g33 = DMatrix::identity(d, d) * (4.0 * pi_dot * pi_dot);
    let j = projection_j(d);
    let inner = (DMatrix::identity(d * d, d * d) + commutation_k(d) + &j)
        * (info_scatter / (df * (df + 2.0)))
        - j;
    let map = scatter_map(sigma)?;
    let g22 = &map * inner * map.transpose() * 0.25;
    Ok(FisherBlocks { g11, g13, g22, g33 })
}

impl FisherBlocks {
    /// The full information matrix in the order (location, vech scatter, skewness).
    pub fn assemble(&self) -> DMatrix<f64> {
        let d = self.g11.nrows();
        let q = self.g22.nrows();
        let mut g = DMatrix::zeros(2 * d + q, 2 * d + q);
        g.view_mut((0, 0), (d, d)).copy_from(&self.g11);
        g.view_mut((d, d), (q, q)).copy_from(&self.g22);
        g.view_mut((d + q, d + q), (d, d)).copy_from(&self.g33);
        g.view_mut((0, d + q), (d, d)).copy_from(&self.g13);
        g.view_mut((d + q, 0), (d, d))
            .copy_from(&self.g13.transpose());
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::tests::random_spd;
    use crate::matops::vech;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;
    use std::f64::consts::PI;

    fn random_data(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, d, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn decompose_examples() {
        let x = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        let dec = decompose(&x, &DVector::zeros(2), &SpdMatrix::identity(2)).unwrap();
        assert!((dec.distances[0] - 5.0).abs() < 1e-15);
        assert!((dec.signs[(0, 0)] - 0.6).abs() < 1e-15 && (dec.signs[(0, 1)] - 0.8).abs() < 1e-15);

        let x = DMatrix::from_row_slice(1, 2, &[2.0, 0.0]);
        let dec = decompose(
            &x,
            &DVector::zeros(2),
            &SpdMatrix::from_diagonal(&[4.0, 1.0]).unwrap(),
        )
        .unwrap();
        assert!((dec.distances[0] - 1.0).abs() < 1e-15);
        assert!((dec.signs[(0, 0)] - 1.0).abs() < 1e-15 && dec.signs[(0, 1)].abs() < 1e-15);

        let x = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            decompose(&x, &DVector::zeros(2), &SpdMatrix::identity(2)),
            Err(Error::DegenerateObservation { index: 1 })
        ));
    }

    #[test]
    fn decomposition_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sigma = random_spd(4, &mut rng);
        let theta = DVector::from_fn(4, |_, _| rng.random_range(-3.0..3.0));
        let x = random_data(50, 4, 8);
        let dec = decompose(&x, &theta, &sigma).unwrap();
        assert!((dec.reconstruct() - &x).norm() < 1e-10);
        for row in dec.signs.row_iter() {
            assert!((row.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn paired_data_cancel() {
        let half = random_data(10, 3, 2);
        let theta = DVector::from_vec(vec![1.0, -1.0, 0.5]);
        let mut x = DMatrix::zeros(20, 3);
        for i in 0..10 {
            let xi = half.row(i).transpose() + &theta;
            x.row_mut(2 * i).copy_from(&xi.transpose());
            x.row_mut(2 * i + 1)
                .copy_from(&(&theta * 2.0 - &xi).transpose());
        }
        let dec = decompose(&x, &theta, &SpdMatrix::identity(3)).unwrap();
        let f = RadialDensity::student(4.0, 3).unwrap();
        let cs = central_sequence(&dec, &f, PI_DOT_GAUSSIAN).unwrap();
        assert!(cs.skew_block.amax() < 1e-12);
        assert!(cs.loc_block.amax() < 1e-12);
    }

    #[test]
    fn single_observation_by_hand() {
        let x = DMatrix::from_row_slice(1, 2, &[2.0, 1.0]);
        let sigma = SpdMatrix::from_diagonal(&[4.0, 1.0]).unwrap();
        let dec = decompose(&x, &DVector::zeros(2), &sigma).unwrap();
        let f = RadialDensity::student(5.0, 2).unwrap();
        let pi_dot = 0.3;
        let cs = central_sequence(&dec, &f, pi_dot).unwrap();
        // standardized residual (1, 1): d = sqrt 2, U = (1, 1)/sqrt 2
        let r = 2f64.sqrt();
        let u = [1.0 / r, 1.0 / r];
        let phi = 7.0 * r / (3.0 + 2.0);
        assert!((cs.loc_block[0] - phi * u[0] / 2.0).abs() < 1e-12);
        assert!((cs.loc_block[1] - phi * u[1]).abs() < 1e-12);
        assert!((cs.skew_block[0] - 2.0 * pi_dot * r * u[0]).abs() < 1e-12);
        // scatter block: 1/2 P (S^{-1/2} x S^{-1/2}) vec(psi d U U' - I)
        let m = [
            [phi * r * 0.5 - 1.0, phi * r * 0.5],
            [phi * r * 0.5, phi * r * 0.5 - 1.0],
        ];
        let s = [0.5, 1.0];
        // P_d sums (i, j) and (j, i) into the vech slot of the pair
        let a11 = 0.5 * m[0][0] * s[0] * s[0];
        let a12 = 0.5 * 2.0 * m[0][1] * s[0] * s[1];
        let a22 = 0.5 * m[1][1] * s[1] * s[1];
        let expected = [a11, a12, a22];
        for k in 0..3 {
            assert!((cs.scatter_block[k] - expected[k]).abs() < 1e-12, "{k}");
        }
    }

    #[test]
    fn skew_block_is_free_of_f() {
        let x = random_data(30, 3, 6);
        let dec = decompose(&x, &DVector::zeros(3), &SpdMatrix::identity(3)).unwrap();
        let a = central_sequence(&dec, &RadialDensity::gaussian(3), 0.7).unwrap();
        let b = central_sequence(&dec, &RadialDensity::student(4.0, 3).unwrap(), 0.7).unwrap();
        assert_eq!(a.skew_block, b.skew_block);
        assert_ne!(a.loc_block, b.loc_block);
    }

    #[test]
    fn gaussian_information_plug_in() {
        let f = RadialDensity::gaussian(2);
        let b = fisher_blocks(&SpdMatrix::identity(2), &f, PI_DOT_GAUSSIAN).unwrap();
        assert!((&b.g11 - DMatrix::identity(2, 2)).norm() < 1e-8);
        assert!((&b.g33 - DMatrix::identity(2, 2) * (2.0 / PI)).norm() < 1e-15);
    }

    #[test]
    fn assembled_information_is_psd_with_zero_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sigma = random_spd(3, &mut rng);
        let f = RadialDensity::student(4.0, 3).unwrap();
        let g = fisher_blocks(&sigma, &f, PI_DOT_GAUSSIAN)
            .unwrap()
            .assemble();
        assert_eq!(g.nrows(), 12);
        assert!((&g - g.transpose()).amax() < 1e-12);
        let eig = g.clone().symmetric_eigen();
        assert!(eig.eigenvalues.min() >= -1e-10);
        for i in 0..3 {
            for j in 3..9 {
                assert_eq!(g[(i, j)], 0.0);
                assert_eq!(g[(j, i)], 0.0);
                assert_eq!(g[(j, i + 9)], 0.0);
                assert_eq!(g[(i + 9, j)], 0.0);
            }
        }
    }

    #[test]
    fn scatter_information_matches_vech_quadratic_form() {
        // for Sigma = I: tau' G22 tau with tau = vech(H) equals
        // (1/4) [J/(d(d+2)) (2 tr(H^2) + tr(H)^2) - tr(H)^2]
        let d = 3;
        let f = RadialDensity::student(6.0, d).unwrap();
        let jf = fisher_scatter(&f).unwrap();
        let b = fisher_blocks(&SpdMatrix::identity(d), &f, 1.0).unwrap();
        let h = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, -0.2, 0.5, 2.0, 0.3, -0.2, 0.3, -1.0]);
        // P' vech(H) = vec(H) only when off-diagonals are counted once; use the
        // direction whose image under P' is vec(H)
        let tau = vech(&h).unwrap();
        let p = duplication_p(d);
        let v = p.transpose() * &tau;
        assert!((&v - vec(&h)).norm() < 1e-14);
        let q = (tau.transpose() * &b.g22 * &tau)[(0, 0)];
        let tr = h.trace();
        let tr2 = (&h * &h).trace();
        let df = d as f64;
        let expected = 0.25 * (jf / (df * (df + 2.0)) * (2.0 * tr2 + tr * tr) - tr * tr);
        // P (I+K+J) P' with P' tau = vec(H) gives exactly the trace form
        assert!((q - expected).abs() < 1e-10, "{q} vs {expected}");
    }
}

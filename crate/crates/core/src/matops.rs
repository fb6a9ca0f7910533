//! Symmetric positive definite matrices and the special matrices of the
//! scatter-block calculus (`vech`, duplication `P_d`, commutation `K_d`,
//! projection `J_d`).
//!
//! Every square root used in this crate is the unique symmetric positive
//! definite one, obtained from a single eigendecomposition computed at
//! construction time.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Smallest admissible ratio of the extreme eigenvalues.
pub const MIN_EIGEN_RATIO: f64 = 1e-12;

/// A validated symmetric positive definite `d x d` matrix.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    mat: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl PartialEq for SpdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.mat == other.mat
    }
}

impl SpdMatrix {
    /// Validates symmetry and positive definiteness. The stored matrix is the
    /// exact symmetrization `(A + A') / 2`.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(Error::Contract(format!(
                "expected a non-empty square matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("matrix has non-finite entries".into()));
        }
        let scale = mat.amax().max(1.0);
        let d = mat.nrows();
        for i in 0..d {
            for j in (i + 1)..d {
                if (mat[(i, j)] - mat[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::Contract(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let sym = (&mat + mat.transpose()) * 0.5;
        let eig = SymmetricEigen::try_new(sym.clone(), 1e-15, 10_000)
            .ok_or_else(|| Error::NumericalFailure("eigendecomposition did not converge".into()))?;
        let max_eig = eig.eigenvalues.max();
        let min_eig = eig.eigenvalues.min();
        if !(max_eig > 0.0) || min_eig < MIN_EIGEN_RATIO * max_eig {
            return Err(Error::NotPositiveDefinite { min_eig, max_eig });
        }
        Ok(SpdMatrix {
            mat: sym,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn identity(d: usize) -> Self {
        SpdMatrix {
            mat: DMatrix::identity(d, d),
            eigenvalues: DVector::from_element(d, 1.0),
            eigenvectors: DMatrix::identity(d, d),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        SpdMatrix::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Builds from row-major nested slices, e.g. `&[&[2.0, 1.0], &[1.0, 3.0]]`.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Contract("rows must form a square matrix".into()));
        }
        SpdMatrix::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn condition_number(&self) -> f64 {
        self.eigenvalues.max() / self.eigenvalues.min()
    }

    pub fn determinant(&self) -> f64 {
        self.eigenvalues.iter().product()
    }

    fn spectral_map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        let mapped = DVector::from_iterator(self.dim(), self.eigenvalues.iter().map(|&l| f(l)));
        let m = v * DMatrix::from_diagonal(&mapped) * v.transpose();
        (&m + m.transpose()) * 0.5
    }

    fn spd_from_spectrum(&self, f: impl Fn(f64) -> f64) -> SpdMatrix {
        let mat = self.spectral_map(&f);
        let eigenvalues =
            DVector::from_iterator(self.dim(), self.eigenvalues.iter().map(|&l| f(l)));
        SpdMatrix {
            mat,
            eigenvalues,
            eigenvectors: self.eigenvectors.clone(),
        }
    }

    fn check_conditioning(&self) -> Result<()> {
        let cond = self.condition_number();
        if !(cond <= 1e12) {
            return Err(Error::IllConditioned { cond });
        }
        Ok(())
    }

    /// The symmetric square root `R` with `R R = S`.
    pub fn sym_sqrt(&self) -> SpdMatrix {
        self.spd_from_spectrum(f64::sqrt)
    }

    /// The symmetric inverse square root `R` with `R S R = I`.
    pub fn sym_inv_sqrt(&self) -> Result<SpdMatrix> {
        self.check_conditioning()?;
        Ok(self.spd_from_spectrum(|l| 1.0 / l.sqrt()))
    }

    pub fn inverse(&self) -> Result<SpdMatrix> {
        self.check_conditioning()?;
        Ok(self.spd_from_spectrum(|l| 1.0 / l))
    }

    /// `c * S` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<SpdMatrix> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Contract(format!(
                "scale factor must be positive, got {c}"
            )));
        }
        Ok(SpdMatrix {
            mat: &self.mat * c,
            eigenvalues: &self.eigenvalues * c,
            eigenvectors: self.eigenvectors.clone(),
        })
    }

    /// Rescales to unit determinant.
    pub fn normalized_det(&self) -> SpdMatrix {
        let d = self.dim() as f64;
        let log_det: f64 = self.eigenvalues.iter().map(|l| l.ln()).sum();
        let c = (-log_det / d).exp();
        SpdMatrix {
            mat: &self.mat * c,
            eigenvalues: &self.eigenvalues * c,
            eigenvectors: self.eigenvectors.clone(),
        }
    }

    /// `v' S^{-1} v`, evaluated through the spectrum without forming `S^{-1}`.
    pub fn quad_form_inv(&self, v: &DVector<f64>) -> Result<f64> {
        if v.len() != self.dim() {
            return Err(Error::Contract(format!(
                "vector has length {} but matrix is {}x{}",
                v.len(),
                self.dim(),
                self.dim()
            )));
        }
        self.check_conditioning()?;
        let proj = self.eigenvectors.transpose() * v;
        Ok(proj
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(p, l)| p * p / l)
            .sum())
    }
}

/// Free-function form of [`SpdMatrix::sym_sqrt`].
pub fn sym_sqrt(s: &SpdMatrix) -> SpdMatrix {
    s.sym_sqrt()
}

/// Free-function form of [`SpdMatrix::sym_inv_sqrt`].
pub fn sym_inv_sqrt(s: &SpdMatrix) -> Result<SpdMatrix> {
    s.sym_inv_sqrt()
}

pub fn quad_form_inv(v: &DVector<f64>, s: &SpdMatrix) -> Result<f64> {
    s.quad_form_inv(v)
}

/// Position of `(i, j)`, `i <= j`, in the row-wise upper-triangular `vech` ordering.
pub fn vech_index(d: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < d);
    // the first i rows hold d + (d-1) + ... + (d-i+1) entries
    i * d - i * i.saturating_sub(1) / 2 + (j - i)
}

/// Stacks the upper-triangular entries of a symmetric matrix row by row:
/// `(s11, s12, ..., s1d, s22, ..., sdd)`.
pub fn vech(s: &DMatrix<f64>) -> Result<DVector<f64>> {
    if !s.is_square() {
        return Err(Error::Contract("vech needs a square matrix".into()));
    }
    let d = s.nrows();
    let scale = s.amax().max(1.0);
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for j in i..d {
            if (s[(i, j)] - s[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Contract(format!(
                    "vech input not symmetric at ({i}, {j})"
                )));
            }
            out.push(s[(i, j)]);
        }
    }
    Ok(DVector::from_vec(out))
}

/// Column-stacking `vec`.
pub fn vec(a: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(a.as_slice())
}

/// Duplication-type matrix `P_d` of size `d(d+1)/2 x d^2` with `P_d' vech(S) = vec(S)`.
pub fn duplication_p(d: usize) -> DMatrix<f64> {
    let m = d * (d + 1) / 2;
    let mut p = DMatrix::zeros(m, d * d);
    for j in 0..d {
        for i in 0..d {
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            p[(vech_index(d, lo, hi), j * d + i)] = 1.0;
        }
    }
    p
}

/// Commutation matrix `K_d` with `K_d vec(A) = vec(A')`.
pub fn commutation_k(d: usize) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            k[(j * d + i, i * d + j)] = 1.0;
        }
    }
    k
}

/// `J_d = vec(I_d) vec(I_d)'`.
pub fn projection_j(d: usize) -> DMatrix<f64> {
    let v = vec(&DMatrix::identity(d, d));
    &v * v.transpose()
}

/// Kronecker product `A (x) B`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

//! Functional calculus of Ω and locality analysis of Ω over regions.
//!
//! `h` supported in `B` with `Ωh` supported in `B` exists iff the off-block
//! `Ω[Bᶜ, B]` has a kernel. Equivalently (with `ξ = Ω^{1/2} h`) the stacked
//! matrix `[Ω^{1/2}[Bᶜ, :]; Ω^{−1/2}[Bᶜ, :]]` has a kernel. Both routes are
//! exposed so they can be checked against each other.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{DynamicalMatrix, Region};

/// Relative threshold on `σ_min(Ω[Bᶜ, B])`, in units of `σ_max(Ω)`.
pub const NONLOCALITY_REL_TOL: f64 = 1e-8;

/// Default relative singular-value cutoff for [`localizable_modes`].
pub const LOCALIZABLE_REL_TOL: f64 = 1e-8;

/// Eigendecomposition of Ω² with the powers of Ω used downstream.
///
/// All powers are computed eagerly; the value is immutable afterwards.
#[derive(Debug, Clone)]
pub struct SpectralData {
    omega2: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    omega: DMatrix<f64>,
    omega_sqrt: DMatrix<f64>,
    omega_inv_sqrt: DMatrix<f64>,
    omega_inv: DMatrix<f64>,
}

impl SpectralData {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn omega2(&self) -> &DMatrix<f64> {
        &self.omega2
    }

    /// Eigenvalues of Ω², ascending.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors of Ω², one per column, matching
    /// [`eigenvalues`](Self::eigenvalues).
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Normal-mode frequencies `ω_m = √λ_m`.
    pub fn frequencies(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| l.sqrt()).collect()
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn omega_sqrt(&self) -> &DMatrix<f64> {
        &self.omega_sqrt
    }

    pub fn omega_inv_sqrt(&self) -> &DMatrix<f64> {
        &self.omega_inv_sqrt
    }

    pub fn omega_inv(&self) -> &DMatrix<f64> {
        &self.omega_inv
    }

    /// `(Ω²)^s = V diag(λ^s) Vᵀ` for arbitrary real `s`.
    pub fn omega2_power(&self, s: f64) -> DMatrix<f64> {
        matrix_function(&self.eigenvectors, &self.eigenvalues, |l| l.powf(s))
    }

    /// Largest singular value of Ω, i.e. the largest frequency.
    pub fn omega_norm(&self) -> f64 {
        self.eigenvalues.max().sqrt()
    }

    /// Absolute threshold separating "kernel" from "no kernel" for the
    /// off-block test.
    pub fn nonlocality_tol(&self) -> f64 {
        NONLOCALITY_REL_TOL * self.omega_norm()
    }
}

fn matrix_function(v: &DMatrix<f64>, lambda: &DVector<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * f(lambda[j]));
    scaled * v.transpose()
}

/// Eigendecomposition of Ω² sorted ascending, with each eigenvector's
/// largest-magnitude component made positive.
pub fn spectral_decompose(m: &DynamicalMatrix) -> Result<SpectralData> {
    let n = m.n();
    let eig = SymmetricEigen::try_new(m.entries().clone(), f64::EPSILON, 0).ok_or(Error::DecompositionFailure { n })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).clone_owned();
        let pivot = v.iamax();
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        eigenvectors.set_column(col, &v);
    }
    if eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: eigenvalues.min(),
            tol: 0.0,
        });
    }

    let omega = matrix_function(&eigenvectors, &eigenvalues, |l| l.sqrt());
    let omega_sqrt = matrix_function(&eigenvectors, &eigenvalues, |l| l.powf(0.25));
    let omega_inv_sqrt = matrix_function(&eigenvectors, &eigenvalues, |l| l.powf(-0.25));
    let omega_inv = matrix_function(&eigenvectors, &eigenvalues, |l| 1.0 / l.sqrt());

    Ok(SpectralData {
        omega2: m.entries().clone(),
        eigenvalues,
        eigenvectors,
        omega,
        omega_sqrt,
        omega_inv_sqrt,
        omega_inv,
    })
}

fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Appends zero rows so the matrix has at least as many rows as columns;
/// the SVD then reports one singular value per column and any forced rank
/// deficiency shows up as (near-)zero singular values.
fn pad_rows(m: DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r >= c {
        m
    } else {
        m.resize_vertically(c, 0.0)
    }
}

fn check_region(s: &SpectralData, b: &Region) -> Result<()> {
    if b.n() != s.n() {
        return Err(Error::DimensionMismatch {
            expected: s.n(),
            got: b.n(),
        });
    }
    b.check_proper()
}

/// Smallest singular value of the off-block `Ω[Bᶜ, B]`, one singular value
/// per column of the block.
pub fn offblock_min_singular(s: &SpectralData, b: &Region) -> Result<f64> {
    check_region(s, b)?;
    let bc = b.complement();
    let block = pad_rows(submatrix(s.omega(), bc.members(), b.members()));
    let n = block.nrows();
    let svd = SVD::try_new(block, false, false, f64::EPSILON, 0).ok_or(Error::DecompositionFailure { n })?;
    Ok(svd.singular_values.min())
}

/// Outcome of the locality analysis of Ω over a region.
#[derive(Debug, Clone, Serialize)]
pub struct LocalityReport {
    pub region: Region,
    pub sigma_min_offblock: f64,
    pub strongly_nonlocal: bool,
    pub localizable_dim: usize,
    #[serde(serialize_with = "crate::serialize_complex_vectors")]
    pub localizable_basis: Vec<DVector<Complex64>>,
}

impl LocalityReport {
    /// Orthogonal projection of `xi` onto the localizable subspace.
    pub fn project(&self, xi: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(xi.len());
        for u in &self.localizable_basis {
            out += u * u.dotc(xi);
        }
        out
    }
}

/// Stacked constraint matrix whose kernel is the set of `ξ` with
/// `Ω^{1/2}ξ` and `Ω^{−1/2}ξ` both supported in `B`.
pub fn localization_constraints(s: &SpectralData, b: &Region) -> Result<DMatrix<f64>> {
    check_region(s, b)?;
    let bc = b.complement();
    let all: Vec<usize> = (0..s.n()).collect();
    let upper = submatrix(s.omega_sqrt(), bc.members(), &all);
    let lower = submatrix(s.omega_inv_sqrt(), bc.members(), &all);
    let rows = upper.nrows();
    let mut stacked = DMatrix::zeros(2 * rows, s.n());
    stacked.rows_mut(0, rows).copy_from(&upper);
    stacked.rows_mut(rows, rows).copy_from(&lower);
    Ok(stacked)
}

/// Real orthonormal basis of the numerical kernel of `m`: right singular
/// vectors whose singular value is below `rel_tol · σ_max`.
pub(crate) fn numerical_kernel(m: DMatrix<f64>, rel_tol: f64) -> Result<Vec<DVector<f64>>> {
    let m = pad_rows(m);
    let n = m.ncols();
    let svd = SVD::try_new(m, false, true, f64::EPSILON, 0).ok_or(Error::DecompositionFailure { n })?;
    let v_t = svd.v_t.expect("v_t requested");
    let sigma_max = svd.singular_values.max();
    let cutoff = rel_tol * sigma_max;
    Ok(svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &sv)| sv < cutoff || sigma_max == 0.0)
        .map(|(k, _)| v_t.row(k).transpose())
        .collect())
}

/// Finds every one-quantum mode `ξ` whose Weyl pairing with test points
/// supported in `Bᶜ` vanishes identically.
///
/// The constraint matrix is real, so its complex kernel is the
/// complexification of its real kernel; the basis returned is real.
pub fn localizable_modes(s: &SpectralData, b: &Region, tol: f64) -> Result<LocalityReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be positive, got {tol}"),
        });
    }
    let sigma_min_offblock = offblock_min_singular(s, b)?;
    let kernel = numerical_kernel(localization_constraints(s, b)?, tol)?;
    let localizable_basis: Vec<DVector<Complex64>> = kernel.iter().map(|v| v.map(|x| Complex64::new(x, 0.0))).collect();
    Ok(LocalityReport {
        region: b.clone(),
        sigma_min_offblock,
        strongly_nonlocal: sigma_min_offblock > s.nonlocality_tol(),
        localizable_dim: localizable_basis.len(),
        localizable_basis,
    })
}

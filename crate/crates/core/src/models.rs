//! Dynamical matrices Ω² for finite harmonic systems, and site regions.
//!
//! Couplings enter through graph Laplacians (positive diagonal, negative
//! off-diagonal), the same convention as `−Δ + m²`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries closer than this to symmetric are accepted by [`build_custom`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative positive-definiteness threshold: the smallest eigenvalue must
/// exceed `SPD_REL_TOL * max |entry|`.
pub const SPD_REL_TOL: f64 = 1e-10;

/// A validated, exactly symmetric, positive definite Ω².
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalMatrix {
    entries: DMatrix<f64>,
}

impl DynamicalMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| self.entries.row(i).iter().copied().collect())
            .collect()
    }

    /// Returns `c · Ω²`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "scale",
                reason: format!("must be positive and finite, got {c}"),
            });
        }
        validate(&self.entries * c)
    }
}

/// Checks positive definiteness of an exactly symmetric matrix.
fn validate(entries: DMatrix<f64>) -> Result<DynamicalMatrix> {
    let n = entries.nrows();
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "system must have at least one site".into(),
        });
    }
    if entries.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "entries",
            reason: "non-finite entry".into(),
        });
    }
    let scale = entries.amax();
    let tol = SPD_REL_TOL * scale;
    let eig = SymmetricEigen::try_new(entries.clone(), f64::EPSILON, 0).ok_or(Error::DecompositionFailure { n })?;
    let min_eigenvalue = eig.eigenvalues.min();
    if !(min_eigenvalue > tol) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue, tol });
    }
    Ok(DynamicalMatrix { entries })
}

/// Path (open) or cycle (periodic) graph Laplacian on `n` nodes.
///
/// The cycle needs at least three nodes; for `n <= 2` the periodic flag
/// adds no edge beyond the path.
pub fn graph_laplacian(n: usize, periodic: bool) -> DMatrix<f64> {
    let mut lap = DMatrix::zeros(n, n);
    let mut edge = |i: usize, j: usize| {
        lap[(i, i)] += 1.0;
        lap[(j, j)] += 1.0;
        lap[(i, j)] -= 1.0;
        lap[(j, i)] -= 1.0;
    };
    for i in 0..n.saturating_sub(1) {
        edge(i, i + 1);
    }
    if periodic && n >= 3 {
        edge(n - 1, 0);
    }
    lap
}

/// Finite-difference Laplacian with Dirichlet ends: tridiag(−1, 2, −1).
fn dirichlet_laplacian(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0
        } else if i.abs_diff(j) == 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// `pinning · I + coupling · L` for the path or cycle on `n` nodes.
///
/// `coupling = 0` is accepted and yields the uncoupled diagonal system.
pub fn build_chain(n: usize, coupling: f64, pinning: f64, periodic: bool) -> Result<DynamicalMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "chain must have at least one site".into(),
        });
    }
    if !(coupling >= 0.0 && coupling.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "coupling",
            reason: format!("must be nonnegative and finite, got {coupling}"),
        });
    }
    if !(pinning >= 0.0 && pinning.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "pinning",
            reason: format!("must be nonnegative and finite, got {pinning}"),
        });
    }
    if periodic && pinning == 0.0 {
        return Err(Error::InvalidParameter {
            name: "pinning",
            reason: "a periodic chain without pinning has a zero mode".into(),
        });
    }
    let m = DMatrix::identity(n, n) * pinning + graph_laplacian(n, periodic) * coupling;
    validate(m)
}

/// Discretized Klein-Gordon operator `m² I + L_D / h²` on a grid with
/// Dirichlet boundary conditions.
pub fn build_discrete_klein_gordon(grid_points: usize, mass: f64, spacing: f64) -> Result<DynamicalMatrix> {
    if grid_points < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_points",
            reason: format!("need at least 2 grid points, got {grid_points}"),
        });
    }
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "mass",
            reason: format!("must be positive, got {mass}"),
        });
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "spacing",
            reason: format!("must be positive, got {spacing}"),
        });
    }
    let n = grid_points;
    let m = DMatrix::identity(n, n) * (mass * mass) + dirichlet_laplacian(n) / (spacing * spacing);
    validate(m)
}

/// Validates a user-supplied Ω². Near-symmetric input is symmetrized
/// exactly as `(M + Mᵀ)/2`.
pub fn build_custom(entries: &DMatrix<f64>) -> Result<DynamicalMatrix> {
    let (rows, cols) = entries.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let asymmetry = (entries - entries.transpose()).amax();
    if !(asymmetry <= SYMMETRY_TOL) {
        return Err(Error::NotSymmetric {
            asymmetry,
            tol: SYMMETRY_TOL,
        });
    }
    validate((entries + entries.transpose()) * 0.5)
}

/// Row-major convenience wrapper around [`build_custom`].
pub fn build_custom_rows(rows: &[Vec<f64>]) -> Result<DynamicalMatrix> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare {
            rows: n,
            cols: bad.len(),
        });
    }
    build_custom(&DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// A set of site indices `B ⊆ {0, …, n−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    n: usize,
    members: Vec<usize>,
}

impl Region {
    /// Sorts and deduplicates `members`; every index must be below `n`.
    pub fn new(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&index) = members.iter().find(|&&j| j >= n) {
            return Err(Error::IndexOutOfRange { index, n });
        }
        Ok(Self { n, members })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() == self.n
    }

    pub fn contains(&self, site: usize) -> bool {
        self.members.binary_search(&site).is_ok()
    }

    pub fn complement(&self) -> Region {
        Region {
            n: self.n,
            members: (0..self.n).filter(|j| !self.contains(*j)).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.members.iter().all(|&j| other.contains(j))
    }

    /// Fails unless both the region and its complement are nonempty.
    pub fn check_proper(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyRegion)
        } else if self.is_full() {
            Err(Error::FullRegion)
        } else {
            Ok(())
        }
    }
}

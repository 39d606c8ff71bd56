//! Numerical laboratory for localized excitations of the vacuum in finite
//! systems of coupled harmonic oscillators.
//!
//! The crate builds dynamical matrices Ω² ([`models`]), their functional
//! calculus ([`spectral`]), closed-form Weyl expectations in Gaussian states
//! ([`gaussian`]), strict-localization tests ([`knight`]), a truncated Fock
//! space used as an independent numerical oracle ([`fock`]) and vacuum
//! measurement statistics ([`measure`]). The [`cli`] module drives all of
//! them from a TOML config.

// `!(x > tol)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod knight;
pub mod measure;
pub mod models;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use gaussian::{ComplexMode, PhasePoint};
pub use models::{DynamicalMatrix, Region};
pub use spectral::SpectralData;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::ser::{SerializeSeq, Serializer};

/// Serializes complex vectors as lists of `[re, im]` pairs.
pub(crate) fn serialize_complex_vectors<S: Serializer>(
    vectors: &[DVector<Complex64>],
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(vectors.len()))?;
    for v in vectors {
        let pairs: Vec<[f64; 2]> = v.iter().map(|c| [c.re, c.im]).collect();
        seq.serialize_element(&pairs)?;
    }
    seq.end()
}

/// Serializes a matrix as a row-major list of rows.
pub(crate) fn serialize_matrix<S: Serializer>(m: &DMatrix<f64>, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    serializer.collect_seq(rows)
}

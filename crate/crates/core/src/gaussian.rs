//! Phase-space calculus and closed-form Weyl expectations.
//!
//! Conventions: ħ = 1, unit masses, and the complex inner product
//! `⟨ξ, η⟩ = Σ ξ̄_j η_j` is conjugate-linear in its first slot. With
//! these, `Im⟨z(X), z(Y)⟩ = s(X, Y)/2` and the Weyl operators compose as
//! `W(ξ)W(η) = exp(−i Im⟨ξ, η⟩) W(ξ + η)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::Region;
use crate::spectral::SpectralData;

/// Classical phase-space point `X = (q, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub q: DVector<f64>,
    pub p: DVector<f64>,
}

impl PhasePoint {
    pub fn new(q: DVector<f64>, p: DVector<f64>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                got: p.len(),
            });
        }
        Ok(Self { q, p })
    }

    pub fn from_slices(q: &[f64], p: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(q), DVector::from_column_slice(p))
    }

    pub fn zero(n: usize) -> Self {
        Self {
            q: DVector::zeros(n),
            p: DVector::zeros(n),
        }
    }

    /// Displacement `value` at one site, all else zero.
    pub fn displacement(n: usize, site: usize, value: f64) -> Self {
        let mut x = Self::zero(n);
        x.q[site] = value;
        x
    }

    /// Momentum `value` at one site, all else zero.
    pub fn momentum(n: usize, site: usize, value: f64) -> Self {
        let mut x = Self::zero(n);
        x.p[site] = value;
        x
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn is_zero(&self) -> bool {
        self.q.iter().chain(self.p.iter()).all(|&v| v == 0.0)
    }

    /// First site outside `b` where `q` or `p` is nonzero.
    pub fn first_site_outside(&self, b: &Region) -> Option<usize> {
        (0..self.n()).find(|&j| !b.contains(j) && (self.q[j] != 0.0 || self.p[j] != 0.0))
    }

    pub fn is_supported_in(&self, b: &Region) -> bool {
        self.first_site_outside(b).is_none()
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.n(),
            });
        }
        Ok(())
    }
}

/// A vector ξ in the one-particle space `ℂⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMode(pub DVector<Complex64>);

impl ComplexMode {
    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn from_real(v: &DVector<f64>) -> Self {
        Self(v.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &ComplexMode) -> Complex64 {
        self.0.dotc(&other.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl std::ops::Add for &ComplexMode {
    type Output = ComplexMode;
    fn add(self, rhs: &ComplexMode) -> ComplexMode {
        ComplexMode(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub for &ComplexMode {
    type Output = ComplexMode;
    fn sub(self, rhs: &ComplexMode) -> ComplexMode {
        ComplexMode(&self.0 - &rhs.0)
    }
}

/// `z(X) = (Ω^{1/2} q + i Ω^{−1/2} p)/√2`.
pub fn z_map(s: &SpectralData, x: &PhasePoint) -> Result<ComplexMode> {
    x.check_dim(s.n())?;
    let re = s.omega_sqrt() * &x.q;
    let im = s.omega_inv_sqrt() * &x.p;
    let k = std::f64::consts::FRAC_1_SQRT_2;
    Ok(ComplexMode(DVector::from_fn(s.n(), |j, _| {
        Complex64::new(k * re[j], k * im[j])
    })))
}

/// `s(X, Y) = q_X·p_Y − q_Y·p_X`.
pub fn symplectic_form(x: &PhasePoint, y: &PhasePoint) -> Result<f64> {
    y.check_dim(x.n())?;
    Ok(x.q.dot(&y.p) - y.q.dot(&x.p))
}

/// `⟨0|W(ξ)|0⟩ = exp(−‖ξ‖²/2)`.
pub fn vacuum_weyl(xi: &ComplexMode) -> Complex64 {
    Complex64::new((-0.5 * xi.norm_squared()).exp(), 0.0)
}

/// `⟨W(ζ_a)0| W(η) |W(ζ_b)0⟩`, from the Weyl composition law.
pub fn weyl_cross_term(zeta_a: &ComplexMode, zeta_b: &ComplexMode, eta: &ComplexMode) -> Complex64 {
    let phase = zeta_a.inner(eta).im + zeta_b.inner(eta).im + zeta_a.inner(zeta_b).im;
    let shifted = &(eta + zeta_b) - zeta_a;
    Complex64::from_polar((-0.5 * shifted.norm_squared()).exp(), phase)
}

/// Expectation of `W(z(Y))` in the coherent state `W(z(X))|0⟩`:
/// `exp(i s(X, Y)) · exp(−‖z(Y)‖²/2)`.
pub fn coherent_weyl(s: &SpectralData, x: &PhasePoint, y: &PhasePoint) -> Result<Complex64> {
    let zy = z_map(s, y)?;
    x.check_dim(s.n())?;
    let phase = symplectic_form(x, y)?;
    Ok(Complex64::from_polar((-0.5 * zy.norm_squared()).exp(), phase))
}

/// Expectation of `W(η)` in the normalized superposition
/// `(α W(ζ₁)|0⟩ + β W(ζ₂)|0⟩)/‖·‖`, summing the four cross terms.
pub fn superposition_expectation(
    alpha: Complex64,
    beta: Complex64,
    zeta1: &ComplexMode,
    zeta2: &ComplexMode,
    eta: &ComplexMode,
) -> Result<Complex64> {
    if alpha == Complex64::new(0.0, 0.0) && beta == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroSuperposition);
    }
    let coeffs = [alpha, beta];
    let states = [zeta1, zeta2];
    let zero = ComplexMode::zeros(eta.n());
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = Complex64::new(0.0, 0.0);
    for (ca, za) in coeffs.iter().zip(states) {
        for (cb, zb) in coeffs.iter().zip(states) {
            let w = ca.conj() * cb;
            num += w * weyl_cross_term(za, zb, eta);
            den += w * weyl_cross_term(za, zb, &zero);
        }
    }
    let norm2 = den.re;
    let scale = alpha.norm_sqr() + beta.norm_sqr();
    if !(norm2 > 1e-14 * scale) {
        // αψ₁ + βψ₂ = 0
        return Err(Error::ZeroSuperposition);
    }
    Ok(num / norm2)
}

/// `⟨ψ|W(z(Y))|ψ⟩` for `ψ ∝ α W(z(X₁))|0⟩ + β W(z(X₂))|0⟩`.
pub fn superposition_weyl(
    alpha: Complex64,
    beta: Complex64,
    s: &SpectralData,
    x1: &PhasePoint,
    x2: &PhasePoint,
    y: &PhasePoint,
) -> Result<Complex64> {
    let z1 = z_map(s, x1)?;
    let z2 = z_map(s, x2)?;
    let eta = z_map(s, y)?;
    superposition_expectation(alpha, beta, &z1, &z2, &eta)
}

/// `⟨1_ξ|W(η)|1_ξ⟩ = (1 − |⟨ξ, η⟩|²) exp(−‖η‖²/2)` for the one-quantum
/// state `a†(ξ)|0⟩`, `‖ξ‖ = 1`.
pub fn one_quantum_weyl(xi: &ComplexMode, eta: &ComplexMode) -> Complex64 {
    let overlap = xi.inner(eta).norm_sqr();
    Complex64::new((1.0 - overlap) * (-0.5 * eta.norm_squared()).exp(), 0.0)
}

/// Vacuum two-point functions `⟨Q_i Q_j⟩ = (Ω^{−1})_{ij}/2`,
/// `⟨P_i P_j⟩ = Ω_{ij}/2`.
#[derive(Debug, Clone, Serialize)]
pub struct VacuumCovariances {
    #[serde(serialize_with = "crate::serialize_matrix")]
    pub sigma_q: DMatrix<f64>,
    #[serde(serialize_with = "crate::serialize_matrix")]
    pub sigma_p: DMatrix<f64>,
}

pub fn vacuum_covariance(s: &SpectralData) -> VacuumCovariances {
    VacuumCovariances {
        sigma_q: s.omega_inv() * 0.5,
        sigma_p: s.omega() * 0.5,
    }
}

//! Strict localizability of vacuum excitations over a region `B`.
//!
//! A state is strictly local over `B` when every Weyl expectation with a
//! test point supported in `Bᶜ` equals the vacuum's. Each check here pairs
//! an exact algebraic criterion (the verdict) with a seeded sampled defect
//! `max_Y |⟨ψ|W(z(Y))|ψ⟩ − ⟨0|W(z(Y))|0⟩|` (the cross-check).

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    coherent_weyl, one_quantum_weyl, superposition_weyl, vacuum_weyl, z_map, ComplexMode, PhasePoint,
};
use crate::models::Region;
use crate::spectral::{localizable_modes, offblock_min_singular, SpectralData, LOCALIZABLE_REL_TOL};

/// Sampled defects at or below this count as zero.
pub const DEFECT_TOL: f64 = 1e-9;

/// Algebraic distances at or below this count as zero.
pub const ALGEBRAIC_TOL: f64 = 1e-10;

/// Tolerance on `‖ξ‖ = 1` for one-quantum states.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Deterministic generator of test points supported in a region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub count: usize,
    pub amplitude: f64,
    pub seed: u64,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self {
            count: 200,
            amplitude: 1.0,
            seed: 0,
        }
    }
}

impl SamplerSpec {
    pub fn new(count: usize, amplitude: f64, seed: u64) -> Result<Self> {
        let spec = Self { count, amplitude, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter {
                name: "sampler.count",
                reason: "must be positive".into(),
            });
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sampler.amplitude",
                reason: format!("must be positive, got {}", self.amplitude),
            });
        }
        Ok(())
    }

    /// Points `Y = (q, p)` with i.i.d. uniform entries in
    /// `[−amplitude, amplitude]` on the sites of `support`, zero elsewhere.
    /// For each point the sites are visited in ascending order, drawing `q`
    /// then `p`.
    pub fn sample(&self, support: &Region) -> Vec<PhasePoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let a = self.amplitude;
        (0..self.count)
            .map(|_| {
                let mut y = PhasePoint::zero(support.n());
                for &j in support.members() {
                    y.q[j] = rng.gen_range(-a..=a);
                    y.p[j] = rng.gen_range(-a..=a);
                }
                y
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    StrictlyLocal,
    NotLocal,
}

/// Locality defect of one state over a region.
#[derive(Debug, Clone, Serialize)]
pub struct DefectReport {
    pub region: Region,
    pub algebraic_distance: f64,
    pub sampled_defect: f64,
    pub samples: usize,
    pub seed: u64,
    pub verdict: Verdict,
    /// Whether the algebraic criterion and the sampled defect agree.
    pub consistent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl DefectReport {
    fn new(region: &Region, algebraic_distance: f64, sampled_defect: f64, sampler: &SamplerSpec) -> Self {
        let algebraic_local = algebraic_distance <= ALGEBRAIC_TOL;
        let sampled_local = sampled_defect <= DEFECT_TOL;
        Self {
            region: region.clone(),
            algebraic_distance,
            sampled_defect,
            samples: sampler.count,
            seed: sampler.seed,
            verdict: if algebraic_local && sampled_local {
                Verdict::StrictlyLocal
            } else {
                Verdict::NotLocal
            },
            consistent: algebraic_local == sampled_local,
            note: None,
        }
    }
}

fn check_dims(s: &SpectralData, b: &Region) -> Result<()> {
    if b.n() != s.n() {
        return Err(Error::DimensionMismatch {
            expected: s.n(),
            got: b.n(),
        });
    }
    Ok(())
}

/// Maximum of `defect(Y)` over the sampled test points in `Bᶜ`.
fn max_defect(
    s: &SpectralData,
    b: &Region,
    sampler: &SamplerSpec,
    mut defect: impl FnMut(&ComplexMode, &PhasePoint) -> Result<f64>,
) -> Result<f64> {
    sampler.validate()?;
    let mut worst = 0.0f64;
    for y in sampler.sample(&b.complement()) {
        let eta = z_map(s, &y)?;
        worst = worst.max(defect(&eta, &y)?);
    }
    Ok(worst)
}

/// Locality defect of the one-quantum state `a†(ξ)|0⟩` over `b`.
///
/// The algebraic distance is the norm of the part of `ξ` orthogonal to the
/// localizable subspace of `b`.
pub fn one_quantum_defect(
    s: &SpectralData,
    xi: &ComplexMode,
    b: &Region,
    sampler: &SamplerSpec,
) -> Result<DefectReport> {
    check_dims(s, b)?;
    if xi.n() != s.n() {
        return Err(Error::DimensionMismatch {
            expected: s.n(),
            got: xi.n(),
        });
    }
    let norm = xi.norm_squared().sqrt();
    if !((norm - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(Error::NotNormalized { norm });
    }
    let locality = localizable_modes(s, b, LOCALIZABLE_REL_TOL)?;
    let algebraic_distance = (&xi.0 - locality.project(&xi.0)).norm();
    let sampled = max_defect(s, b, sampler, |eta, _| {
        Ok((one_quantum_weyl(xi, eta) - vacuum_weyl(eta)).norm())
    })?;
    Ok(DefectReport::new(b, algebraic_distance, sampled, sampler))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KnightVerdict {
    NoFiniteParticleLocalState,
    LocalOneQuantumStateExists,
}

/// No finite-particle state is strictly local over `b` exactly when Ω is
/// strongly non-local over `b`.
///
/// Exact for one-quantum states; for states with more quanta this is the
/// general theorem's assertion, backed only by sampled evidence.
pub fn knight_verdict(s: &SpectralData, b: &Region) -> Result<KnightVerdict> {
    check_dims(s, b)?;
    let sigma = offblock_min_singular(s, b)?;
    Ok(if sigma > s.nonlocality_tol() {
        KnightVerdict::NoFiniteParticleLocalState
    } else {
        KnightVerdict::LocalOneQuantumStateExists
    })
}

/// Locality defect of the coherent state `W(z(X))|0⟩` over `b`.
///
/// The algebraic distance is the norm of `(q, p)` restricted to `Bᶜ`: the
/// phase `s(X, Y)` vanishes for every `Y` in `Bᶜ` iff it is zero.
pub fn coherent_locality_check(
    s: &SpectralData,
    x: &PhasePoint,
    b: &Region,
    sampler: &SamplerSpec,
) -> Result<DefectReport> {
    check_dims(s, b)?;
    if x.n() != s.n() {
        return Err(Error::DimensionMismatch {
            expected: s.n(),
            got: x.n(),
        });
    }
    let outside = b.complement();
    let algebraic_distance = outside
        .members()
        .iter()
        .map(|&j| x.q[j] * x.q[j] + x.p[j] * x.p[j])
        .sum::<f64>()
        .sqrt();
    let sampled = max_defect(s, b, sampler, |eta, y| {
        Ok((coherent_weyl(s, x, y)? - vacuum_weyl(eta)).norm())
    })?;
    let mut report = DefectReport::new(b, algebraic_distance, sampled, sampler);
    if x.is_zero() {
        report.note = Some("is vacuum".into());
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LichtOutcome {
    AllSuperpositionsLocal,
    SuperpositionBreaksLocality,
}

#[derive(Debug, Clone, Serialize)]
pub struct LichtReport {
    pub region: Region,
    pub outcome: LichtOutcome,
    pub max_defect: f64,
    /// `Some` only when Ω is strongly non-local over the region, where the
    /// superposition criterion applies: all superpositions stay local iff
    /// the two phase points coincide.
    pub algebraic_prediction: Option<LichtOutcome>,
    pub consistent: bool,
    pub grid_size: usize,
    /// Grid points where `α ψ₁ + β ψ₂ = 0`; they define no state and are skipped.
    pub degenerate_grid_points: usize,
    pub samples: usize,
    pub seed: u64,
}

/// Checks whether every superposition `α ψ₁ + β ψ₂` of the coherent states
/// at `x1`, `x2` (both supported in `b`) stays strictly local over `b`.
pub fn licht_pair_test(
    s: &SpectralData,
    x1: &PhasePoint,
    x2: &PhasePoint,
    b: &Region,
    coeff_grid: &[(Complex64, Complex64)],
    sampler: &SamplerSpec,
) -> Result<LichtReport> {
    check_dims(s, b)?;
    for x in [x1, x2] {
        if x.n() != s.n() {
            return Err(Error::DimensionMismatch {
                expected: s.n(),
                got: x.n(),
            });
        }
        if let Some(site) = x.first_site_outside(b) {
            return Err(Error::NotSupportedInRegion { site });
        }
    }
    if coeff_grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "coeff_grid",
            reason: "needs at least one coefficient pair".into(),
        });
    }
    let strongly_nonlocal = offblock_min_singular(s, b)? > s.nonlocality_tol();
    let origin = PhasePoint::zero(s.n());
    let mut worst = 0.0f64;
    let mut degenerate = 0;
    for &(alpha, beta) in coeff_grid {
        match superposition_weyl(alpha, beta, s, x1, x2, &origin) {
            Err(Error::ZeroSuperposition) => {
                degenerate += 1;
                continue;
            }
            other => {
                other?;
            }
        }
        let d = max_defect(s, b, sampler, |eta, y| {
            Ok((superposition_weyl(alpha, beta, s, x1, x2, y)? - vacuum_weyl(eta)).norm())
        })?;
        worst = worst.max(d);
    }
    if degenerate == coeff_grid.len() {
        return Err(Error::ZeroSuperposition);
    }
    let outcome = if worst <= DEFECT_TOL {
        LichtOutcome::AllSuperpositionsLocal
    } else {
        LichtOutcome::SuperpositionBreaksLocality
    };
    let algebraic_prediction = strongly_nonlocal.then(|| {
        if x1 == x2 {
            LichtOutcome::AllSuperpositionsLocal
        } else {
            LichtOutcome::SuperpositionBreaksLocality
        }
    });
    Ok(LichtReport {
        region: b.clone(),
        outcome,
        max_defect: worst,
        consistent: algebraic_prediction.is_none_or(|p| p == outcome),
        algebraic_prediction,
        grid_size: coeff_grid.len(),
        degenerate_grid_points: degenerate,
        samples: sampler.count,
        seed: sampler.seed,
    })
}

/// The coefficient grid `{(1, 1), (1, i), (1, −1)}/√2`.
pub fn default_coeff_grid() -> Vec<(Complex64, Complex64)> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        (Complex64::new(h, 0.0), Complex64::new(h, 0.0)),
        (Complex64::new(h, 0.0), Complex64::new(0.0, h)),
        (Complex64::new(h, 0.0), Complex64::new(-h, 0.0)),
    ]
}

/// Unit vector `e_site` as a one-particle mode.
pub fn site_mode(n: usize, site: usize) -> ComplexMode {
    let mut v = DVector::zeros(n);
    v[site] = Complex64::new(1.0, 0.0);
    ComplexMode(v)
}

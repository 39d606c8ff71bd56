//! Vacuum statistics of a local displacement measurement.
//!
//! The vacuum position density is Gaussian with covariance `Σ = Ω^{−1}/2`.
//! Measuring whether `Q_j ∈ [lo, hi]` and keeping the "yes" outcome
//! (project and renormalize) leaves the Gaussian restricted to the window,
//! so all post-measurement statistics follow from truncated-normal moments
//! and the bivariate conditional decomposition.

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;
use crate::spectral::SpectralData;

/// Points of the Gauss-Legendre rule used for conditional density curves.
pub const DENSITY_QUADRATURE_POINTS: usize = 200;

/// The question "does `Q_site` fall within `[lo, hi]`?".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowEvent {
    pub site: usize,
    pub lo: f64,
    pub hi: f64,
}

impl WindowEvent {
    pub fn new(site: usize, lo: f64, hi: f64) -> Result<Self> {
        let w = Self { site, lo, hi };
        w.validate_bounds()?;
        Ok(w)
    }

    fn validate_bounds(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidWindow {
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(())
    }

    fn validate(&self, n: usize) -> Result<()> {
        self.validate_bounds()?;
        if self.site >= n {
            return Err(Error::IndexOutOfRange { index: self.site, n });
        }
        Ok(())
    }
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Mills ratio `R(x) = Q(x)/φ(x)` for `x ≥ 0`, with `Q` the upper tail.
fn mills_ratio(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 5.0 {
        0.5 * erfc(x * FRAC_1_SQRT_2) / std_normal_pdf(x)
    } else {
        // R(x) = 1/(x + 1/(x + 2/(x + 3/(x + …))))
        let mut tail = x;
        for k in (1..=120).rev() {
            tail = x + k as f64 / tail;
        }
        1.0 / tail
    }
}

/// Probability, mean and second moment of a standard normal restricted to
/// `[a, b]`, `a < b` finite.
///
/// When the window lies in one tail the moments are formed from Mills
/// ratios scaled by `φ(a)`, which never underflow; the probability itself
/// is returned as a logarithm.
fn truncated_standard_normal(a: f64, b: f64) -> (f64, f64, f64) {
    if a >= 0.0 {
        // P = φ(a) · d
        let r = (-0.5 * (b - a) * (b + a)).exp();
        let d = mills_ratio(a) - mills_ratio(b) * r;
        let ln_p = -0.5 * a * a - 0.5 * (2.0 * PI).ln() + d.ln();
        let mean = (1.0 - r) / d;
        let second = 1.0 + (a - b * r) / d;
        (ln_p, mean, second)
    } else if b <= 0.0 {
        let (ln_p, mean, second) = truncated_standard_normal(-b, -a);
        (ln_p, -mean, second)
    } else {
        let p = 0.5 * (erf(b * FRAC_1_SQRT_2) - erf(a * FRAC_1_SQRT_2));
        let (pa, pb) = (std_normal_pdf(a), std_normal_pdf(b));
        (p.ln(), (pa - pb) / p, 1.0 + (a * pa - b * pb) / p)
    }
}

fn site_sigma(s: &SpectralData, site: usize) -> f64 {
    (0.5 * s.omega_inv()[(site, site)]).sqrt()
}

/// Natural log of `⟨0|χ_{[lo,hi]}(Q_j)|0⟩`.
pub fn ln_window_probability(s: &SpectralData, w: &WindowEvent) -> Result<f64> {
    w.validate(s.n())?;
    let sigma = site_sigma(s, w.site);
    Ok(truncated_standard_normal(w.lo / sigma, w.hi / sigma).0)
}

/// `⟨0|χ_{[lo,hi]}(Q_j)|0⟩ = Φ(hi/σ) − Φ(lo/σ)` with `σ² = (Ω^{−1})_{jj}/2`.
///
/// Windows so far in the tail that the probability underflows `f64` report
/// zero here; [`ln_window_probability`] stays finite.
pub fn window_probability(s: &SpectralData, w: &WindowEvent) -> Result<f64> {
    Ok(ln_window_probability(s, w)?.exp())
}

/// First and second moment of `Q_target` after a "yes" outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalMoments {
    pub mean: f64,
    pub second_moment: f64,
}

/// Moments of `Q_target` in `χ_{[lo,hi]}(Q_j)|0⟩ / ‖·‖`.
pub fn conditional_moments(s: &SpectralData, w: &WindowEvent, target: usize) -> Result<ConditionalMoments> {
    w.validate(s.n())?;
    if target >= s.n() {
        return Err(Error::IndexOutOfRange {
            index: target,
            n: s.n(),
        });
    }
    let j = w.site;
    let cov = |a: usize, b: usize| 0.5 * s.omega_inv()[(a, b)];
    let sigma = cov(j, j).sqrt();
    let (_, z_mean, z_second) = truncated_standard_normal(w.lo / sigma, w.hi / sigma);
    let xj_mean = sigma * z_mean;
    let xj_second = cov(j, j) * z_second;

    let (gain, residual_var) = if target == j {
        (1.0, 0.0)
    } else {
        let g = cov(target, j) / cov(j, j);
        (g, cov(target, target) - g * cov(target, j))
    };
    Ok(ConditionalMoments {
        mean: gain * xj_mean,
        second_moment: residual_var + gain * gain * xj_second,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileEntry {
    pub site: usize,
    pub vacuum_variance: f64,
    pub post_variance: f64,
    pub post_second_moment: f64,
    pub relative_deviation: f64,
}

/// Relative change `|E[Q_t²|yes] − ⟨Q_t²⟩₀| / ⟨Q_t²⟩₀` at every site `t`.
pub fn deviation_profile(s: &SpectralData, w: &WindowEvent) -> Result<Vec<ProfileEntry>> {
    (0..s.n())
        .map(|t| {
            let m = conditional_moments(s, w, t)?;
            let vac = 0.5 * s.omega_inv()[(t, t)];
            Ok(ProfileEntry {
                site: t,
                vacuum_variance: vac,
                post_variance: m.second_moment - m.mean * m.mean,
                post_second_moment: m.second_moment,
                relative_deviation: (m.second_moment - vac).abs() / vac,
            })
        })
        .collect()
}

/// Post-measurement density of `Q_target` evaluated at `points`,
/// integrating the measured coordinate over the window with a 200-point
/// Gauss-Legendre rule.
pub fn conditional_density(s: &SpectralData, w: &WindowEvent, target: usize, points: &[f64]) -> Result<Vec<f64>> {
    w.validate(s.n())?;
    if target >= s.n() {
        return Err(Error::IndexOutOfRange {
            index: target,
            n: s.n(),
        });
    }
    let j = w.site;
    let cov = |a: usize, b: usize| 0.5 * s.omega_inv()[(a, b)];
    let sj = cov(j, j).sqrt();
    let p = window_probability(s, w)?;
    let gauss = |x: f64, sd: f64| std_normal_pdf(x / sd) / sd;
    if target == j {
        return Ok(points
            .iter()
            .map(|&x| if x >= w.lo && x <= w.hi { gauss(x, sj) / p } else { 0.0 })
            .collect());
    }
    let gain = cov(target, j) / cov(j, j);
    let resid_sd = (cov(target, target) - gain * cov(target, j)).sqrt();
    let (nodes, weights) = gauss_legendre_on(DENSITY_QUADRATURE_POINTS, w.lo, w.hi);
    Ok(points
        .iter()
        .map(|&x| {
            nodes
                .iter()
                .zip(&weights)
                .map(|(&xj, &wt)| wt * gauss(xj, sj) * gauss(x - gain * xj, resid_sd))
                .sum::<f64>()
                / p
        })
        .collect())
}

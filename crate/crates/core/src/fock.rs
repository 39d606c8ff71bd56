//! Truncated Fock space over the normal modes of Ω.
//!
//! Each mode keeps levels `0..N`; basis states are labelled by their level
//! tuples with mode 0 most significant. Site operators are the finite-mode
//! field operators
//!
//! ```text
//! Q_j = Σ_m V_jm (a_m + a†_m) / √(2ω_m)
//! P_j = Σ_m V_jm i √(ω_m/2) (a†_m − a_m)
//! ```
//!
//! This space is only an oracle: every closed form in [`crate::gaussian`]
//! and [`crate::measure`] can be checked against explicit matrices here.
//! Truncation corrupts the top levels, so quantitative checks should stay
//! on states whose levels are at most `N − 2`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::ComplexMode;
use crate::measure::WindowEvent;
use crate::models::Region;
use crate::spectral::SpectralData;

/// Largest total dimension `N^modes` accepted by [`build_fock`].
pub const DIMENSION_CAP: usize = 20_000;

/// Largest dimension for which [`weyl_matrix`] materializes a dense matrix.
pub const DENSE_CAP: usize = 4_096;

/// Relative drop tolerance of the pivoted orthonormalization.
pub const RANK_DROP_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Sparse square operator stored by columns.
#[derive(Debug, Clone)]
pub struct SparseOp {
    dim: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseOp {
    /// Builds the operator from its action on each basis column.
    fn from_columns(dim: usize, mut column: impl FnMut(usize, &mut Vec<(usize, Complex64)>)) -> Self {
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        let mut buf = Vec::new();
        col_ptr.push(0);
        for col in 0..dim {
            buf.clear();
            column(col, &mut buf);
            buf.sort_by_key(|&(r, _)| r);
            for &(r, v) in &buf {
                if let Some(last) = row_idx.last().copied().filter(|_| row_idx.len() > col_ptr[col]) {
                    if last == r {
                        *values.last_mut().unwrap() += v;
                        continue;
                    }
                }
                row_idx.push(r);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            dim,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        assert_eq!(x.len(), self.dim);
        let mut y = DVector::zeros(self.dim);
        for col in 0..self.dim {
            let xc = x[col];
            if xc == ZERO {
                continue;
            }
            for k in self.col_ptr[col]..self.col_ptr[col + 1] {
                y[self.row_idx[k]] += self.values[k] * xc;
            }
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for col in 0..self.dim {
            for k in self.col_ptr[col]..self.col_ptr[col + 1] {
                m[(self.row_idx[k], col)] += self.values[k];
            }
        }
        m
    }
}

/// Truncated multimode Fock space for a harmonic system.
#[derive(Debug, Clone)]
pub struct FockSpace {
    n_modes: usize,
    truncation: usize,
    dim: usize,
    mode_frequencies: Vec<f64>,
    mode_matrix: DMatrix<f64>,
    site_q: Vec<SparseOp>,
    site_p: Vec<SparseOp>,
    vacuum: DVector<Complex64>,
    hamiltonian: SparseOp,
}

impl FockSpace {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode_frequencies(&self) -> &[f64] {
        &self.mode_frequencies
    }

    pub fn mode_matrix(&self) -> &DMatrix<f64> {
        &self.mode_matrix
    }

    pub fn site_q(&self, j: usize) -> &SparseOp {
        &self.site_q[j]
    }

    pub fn site_p(&self, j: usize) -> &SparseOp {
        &self.site_p[j]
    }

    pub fn vacuum(&self) -> &DVector<Complex64> {
        &self.vacuum
    }

    /// `Σ_m ω_m a†_m a_m`.
    pub fn hamiltonian(&self) -> &SparseOp {
        &self.hamiltonian
    }

    fn stride(&self, mode: usize) -> usize {
        self.truncation.pow((self.n_modes - 1 - mode) as u32)
    }

    pub fn levels(&self, index: usize) -> Vec<usize> {
        (0..self.n_modes)
            .map(|m| (index / self.stride(m)) % self.truncation)
            .collect()
    }

    pub fn index(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes,
                got: levels.len(),
            });
        }
        let mut idx = 0;
        for (m, &l) in levels.iter().enumerate() {
            if l >= self.truncation {
                return Err(Error::IndexOutOfRange {
                    index: l,
                    n: self.truncation,
                });
            }
            idx += l * self.stride(m);
        }
        Ok(idx)
    }

    /// Label of a basis state, e.g. `|0,1>`.
    pub fn label(&self, index: usize) -> String {
        let levels: Vec<String> = self.levels(index).iter().map(|l| l.to_string()).collect();
        format!("|{}>", levels.join(","))
    }

    /// Whether every mode level of the basis state is at most `N − 2`.
    pub fn below_edge(&self, index: usize) -> bool {
        self.levels(index).iter().all(|&l| l + 2 <= self.truncation)
    }

    pub fn basis_state(&self, index: usize) -> DVector<Complex64> {
        let mut v = DVector::zeros(self.dim);
        v[index] = Complex64::new(1.0, 0.0);
        v
    }

    /// Normal-mode components `c_m = Σ_j V_jm ξ_j` of a one-particle vector.
    pub fn mode_components(&self, xi: &ComplexMode) -> Result<Vec<Complex64>> {
        if xi.n() != self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes,
                got: xi.n(),
            });
        }
        Ok((0..self.n_modes)
            .map(|m| (0..self.n_modes).map(|j| xi.0[j] * self.mode_matrix[(j, m)]).sum())
            .collect())
    }

    /// `a†(ξ)|0⟩`.
    pub fn one_quantum_state(&self, xi: &ComplexMode) -> Result<DVector<Complex64>> {
        if self.truncation < 2 {
            return Err(Error::InvalidParameter {
                name: "truncation",
                reason: "one-quantum states need at least two levels".into(),
            });
        }
        let c = self.mode_components(xi)?;
        let mut v = DVector::zeros(self.dim);
        for (m, cm) in c.into_iter().enumerate() {
            v[self.stride(m)] += cm;
        }
        Ok(v)
    }

    /// `⟨v|[Q_j, P_k]|v⟩` for the basis state `v`.
    pub fn commutator_expectation(&self, j: usize, k: usize, index: usize) -> Complex64 {
        let v = self.basis_state(index);
        let qp = self.site_q[j].apply(&self.site_p[k].apply(&v));
        let pq = self.site_p[k].apply(&self.site_q[j].apply(&v));
        v.dotc(&(qp - pq))
    }
}

/// Builds the truncated Fock space with `truncation` levels per mode.
pub fn build_fock(s: &SpectralData, truncation: usize) -> Result<FockSpace> {
    if truncation == 0 {
        return Err(Error::InvalidParameter {
            name: "truncation",
            reason: "need at least one level per mode".into(),
        });
    }
    let n_modes = s.n();
    let dim = u32::try_from(n_modes)
        .ok()
        .and_then(|e| truncation.checked_pow(e))
        .filter(|&d| d <= DIMENSION_CAP)
        .ok_or(Error::DimensionCapExceeded {
            dim: truncation.saturating_pow(n_modes.min(u32::MAX as usize) as u32),
            cap: DIMENSION_CAP,
        })?;

    let freqs = s.frequencies();
    let v = s.eigenvectors().clone();
    let strides: Vec<usize> = (0..n_modes).map(|m| truncation.pow((n_modes - 1 - m) as u32)).collect();
    let level = |idx: usize, m: usize| (idx / strides[m]) % truncation;

    // coefficient of a_m (lower) and a†_m (raise) for each site operator
    let site_op = |lower: &dyn Fn(usize) -> Complex64, raise: &dyn Fn(usize) -> Complex64| {
        SparseOp::from_columns(dim, |col, out| {
            for (m, &stride) in strides.iter().enumerate() {
                let l = level(col, m);
                let (cl, cr) = (lower(m), raise(m));
                if l > 0 && cl != ZERO {
                    out.push((col - stride, cl * (l as f64).sqrt()));
                }
                if l + 1 < truncation && cr != ZERO {
                    out.push((col + stride, cr * ((l + 1) as f64).sqrt()));
                }
            }
        })
    };

    let mut site_q = Vec::with_capacity(n_modes);
    let mut site_p = Vec::with_capacity(n_modes);
    for j in 0..n_modes {
        let qc = |m: usize| Complex64::new(v[(j, m)] / (2.0 * freqs[m]).sqrt(), 0.0);
        site_q.push(site_op(&qc, &qc));
        let pr = |m: usize| Complex64::new(0.0, v[(j, m)] * (0.5 * freqs[m]).sqrt());
        let pl = |m: usize| -pr(m);
        site_p.push(site_op(&pl, &pr));
    }

    let hamiltonian = SparseOp::from_columns(dim, |col, out| {
        let e: f64 = (0..n_modes).map(|m| freqs[m] * level(col, m) as f64).sum();
        if e != 0.0 {
            out.push((col, Complex64::new(e, 0.0)));
        }
    });

    let mut vacuum = DVector::zeros(dim);
    vacuum[0] = Complex64::new(1.0, 0.0);

    Ok(FockSpace {
        n_modes,
        truncation,
        dim,
        mode_frequencies: freqs,
        mode_matrix: v,
        site_q,
        site_p,
        vacuum,
        hamiltonian,
    })
}

/// `exp(c a† − c̄ a)` on `n` levels of a single mode.
fn single_mode_displacement(c: Complex64, n: usize) -> DMatrix<Complex64> {
    let mut gen = DMatrix::zeros(n, n);
    for l in 0..n.saturating_sub(1) {
        let s = ((l + 1) as f64).sqrt();
        gen[(l + 1, l)] = c * s;
        gen[(l, l + 1)] = -c.conj() * s;
    }
    gen.exp()
}

/// A Weyl operator kept in its tensor-product form `⊗_m exp(c_m a†_m − c̄_m a_m)`;
/// the single-mode generators act on different factors and commute, also
/// after truncation.
#[derive(Debug, Clone)]
pub struct WeylOperator {
    truncation: usize,
    factors: Vec<DMatrix<Complex64>>,
    /// Set when `‖ξ‖ > √N/4`, where truncation error starts to matter.
    pub truncation_warning: bool,
}

impl WeylOperator {
    pub fn factors(&self) -> &[DMatrix<Complex64>] {
        &self.factors
    }

    pub fn apply(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.truncation;
        let modes = self.factors.len();
        let mut y = x.clone();
        let mut fiber = DVector::zeros(n);
        for (m, d) in self.factors.iter().enumerate() {
            let stride = n.pow((modes - 1 - m) as u32);
            let block = stride * n;
            for base in (0..y.len()).step_by(block) {
                for offset in 0..stride {
                    for k in 0..n {
                        fiber[k] = y[base + offset + k * stride];
                    }
                    let out = d * &fiber;
                    for k in 0..n {
                        y[base + offset + k * stride] = out[k];
                    }
                }
            }
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut it = self.factors.iter();
        let first = it.next().expect("at least one mode").clone();
        it.fold(first, |acc, d| acc.kronecker(d))
    }
}

/// Tensor-product form of `W(ξ) = exp(a†(ξ) − a(ξ))`.
pub fn weyl_operator(f: &FockSpace, xi: &ComplexMode) -> Result<WeylOperator> {
    let c = f.mode_components(xi)?;
    let truncation_warning = xi.norm_squared().sqrt() > (f.truncation as f64).sqrt() / 4.0;
    if truncation_warning {
        log::warn!(
            "Weyl operator with |xi| = {:.3} on {} levels: truncation error may dominate",
            xi.norm_squared().sqrt(),
            f.truncation
        );
    }
    Ok(WeylOperator {
        truncation: f.truncation,
        factors: c
            .into_iter()
            .map(|cm| single_mode_displacement(cm, f.truncation))
            .collect(),
        truncation_warning,
    })
}

/// Dense matrix of `W(ξ)` on the truncated space.
pub fn weyl_matrix(f: &FockSpace, xi: &ComplexMode) -> Result<DMatrix<Complex64>> {
    if f.dim > DENSE_CAP {
        return Err(Error::DimensionCapExceeded {
            dim: f.dim,
            cap: DENSE_CAP,
        });
    }
    Ok(weyl_operator(f, xi)?.to_dense())
}

/// `⟨0|W(ξ)|0⟩` evaluated with the truncated matrices.
pub fn vacuum_weyl_oracle(f: &FockSpace, xi: &ComplexMode) -> Result<Complex64> {
    let w = weyl_operator(f, xi)?;
    Ok(f.vacuum.dotc(&w.apply(&f.vacuum)))
}

/// `⟨ψ|W(ξ)|ψ⟩ / ⟨ψ|ψ⟩`.
pub fn weyl_expectation(f: &FockSpace, psi: &DVector<Complex64>, xi: &ComplexMode) -> Result<Complex64> {
    if psi.len() != f.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            got: psi.len(),
        });
    }
    let w = weyl_operator(f, xi)?;
    Ok(psi.dotc(&w.apply(psi)) / psi.norm_squared())
}

/// `W(ξ)|0⟩`.
pub fn displaced_vacuum(f: &FockSpace, xi: &ComplexMode) -> Result<DVector<Complex64>> {
    Ok(weyl_operator(f, xi)?.apply(&f.vacuum))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    Q,
    P,
}

/// `Q_site^power` or `P_site^power`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteFactor {
    pub site: usize,
    pub op: Quadrature,
    pub power: u32,
}

/// `coeff · F₁ F₂ ⋯` (operator product in the order written).
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialTerm {
    pub coeff: Complex64,
    pub factors: Vec<SiteFactor>,
}

/// An element of the local algebra over a region.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalOperator {
    Polynomial(Vec<PolynomialTerm>),
    /// Spectral projection `χ_{[lo,hi]}(Q_site)`.
    Window(WindowEvent),
}

/// Exponent tuples `(k_j, l_j)` per site with `Σ (k_j + l_j) ≤ max_degree`,
/// in graded lexicographic order.
fn ordered_exponents(sites: usize, max_degree: usize) -> Vec<Vec<(u32, u32)>> {
    fn rec(slots: usize, budget: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 0 {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=budget {
            prefix.push(e as u32);
            rec(slots - 1, budget - e, prefix, out);
            prefix.pop();
        }
    }
    let mut flat = Vec::new();
    rec(2 * sites, max_degree, &mut Vec::new(), &mut flat);
    flat.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse(e.clone())));
    flat.into_iter()
        .map(|e| e.chunks(2).map(|c| (c[0], c[1])).collect())
        .collect()
}

/// Ordered monomial `Π_{j∈B} Q_j^{k_j} P_j^{l_j}`, sites ascending.
fn ordered_monomial(b: &Region, exps: &[(u32, u32)]) -> Vec<SiteFactor> {
    let mut factors = Vec::new();
    for (&site, &(k, l)) in b.members().iter().zip(exps) {
        if k > 0 {
            factors.push(SiteFactor {
                site,
                op: Quadrature::Q,
                power: k,
            });
        }
        if l > 0 {
            factors.push(SiteFactor {
                site,
                op: Quadrature::P,
                power: l,
            });
        }
    }
    factors
}

impl LocalOperator {
    /// A polynomial on `b` over the ordered monomials of degree at most
    /// `max_degree`, with coefficients uniform in the unit square of ℂ.
    /// Redraws until at least one coefficient is nonzero.
    pub fn random_polynomial(b: &Region, max_degree: usize, rng: &mut impl Rng) -> Self {
        let monomials = ordered_exponents(b.len(), max_degree);
        loop {
            let terms: Vec<PolynomialTerm> = monomials
                .iter()
                .map(|e| PolynomialTerm {
                    coeff: Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)),
                    factors: ordered_monomial(b, e),
                })
                .collect();
            if terms.iter().any(|t| t.coeff != ZERO) {
                return LocalOperator::Polynomial(terms);
            }
        }
    }
}

fn apply_factors(f: &FockSpace, factors: &[SiteFactor], v: &DVector<Complex64>) -> DVector<Complex64> {
    let mut out = v.clone();
    for factor in factors.iter().rev() {
        let op = match factor.op {
            Quadrature::Q => &f.site_q[factor.site],
            Quadrature::P => &f.site_p[factor.site],
        };
        for _ in 0..factor.power {
            out = op.apply(&out);
        }
    }
    out
}

fn check_region(f: &FockSpace, b: &Region) -> Result<()> {
    if b.n() != f.n_modes {
        return Err(Error::DimensionMismatch {
            expected: f.n_modes,
            got: b.n(),
        });
    }
    if b.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(())
}

/// Spanning set of the local algebra applied to the vacuum, up to a degree.
#[derive(Debug, Clone, Serialize)]
pub struct CyclicitySpan {
    pub max_degree: usize,
    pub candidates: usize,
    pub rank: usize,
    /// `(basis_label, residual)` for every truncated basis state.
    pub residuals: Vec<(String, f64)>,
}

/// Orthonormalizes `columns` by Gram-Schmidt with column pivoting. Each
/// pivot is reorthogonalized against the whole basis before it is accepted;
/// candidates whose remaining norm drops below
/// `RANK_DROP_TOL · max column norm` are discarded.
fn pivoted_orthonormalize(mut columns: Vec<DVector<Complex64>>) -> Vec<DVector<Complex64>> {
    let one = Complex64::new(1.0, 0.0);
    let max_norm = columns.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let drop = RANK_DROP_TOL * max_norm;
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    while !columns.is_empty() {
        let pivot = columns
            .iter()
            .map(|c| c.norm())
            .enumerate()
            .fold((0, -1.0), |best, (i, n)| if n > best.1 { (i, n) } else { best })
            .0;
        let mut u = columns.swap_remove(pivot);
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&u);
                u.axpy(-proj, b, one);
            }
        }
        let norm = u.norm();
        if !(norm > drop) {
            continue;
        }
        u /= Complex64::new(norm, 0.0);
        for c in columns.iter_mut() {
            let proj = u.dotc(c);
            c.axpy(-proj, &u, one);
        }
        basis.push(u);
    }
    basis
}

/// Distance of every basis state from the span of
/// `{Π_{j∈B} Q_j^{k_j} P_j^{l_j} |0⟩ : Σ (k_j + l_j) ≤ max_degree}`.
pub fn cyclicity_span(f: &FockSpace, b: &Region, max_degree: usize) -> Result<CyclicitySpan> {
    check_region(f, b)?;
    let exps = ordered_exponents(b.len(), max_degree);
    let columns: Vec<DVector<Complex64>> = exps
        .iter()
        .map(|e| apply_factors(f, &ordered_monomial(b, e), &f.vacuum))
        .collect();
    let candidates = columns.len();
    let basis = pivoted_orthonormalize(columns);
    let residuals = (0..f.dim)
        .map(|idx| {
            let captured: f64 = basis.iter().map(|u| u[idx].norm_sqr()).sum();
            let residual = if 1.0 - captured > 1e-6 {
                (1.0 - captured).sqrt()
            } else {
                // √(1 − captured) loses half the digits near zero
                let mut r = f.basis_state(idx);
                for u in &basis {
                    r.axpy(-u[idx].conj(), u, Complex64::new(1.0, 0.0));
                }
                r.norm()
            };
            (f.label(idx), residual)
        })
        .collect();
    Ok(CyclicitySpan {
        max_degree,
        candidates,
        rank: basis.len(),
        residuals,
    })
}

/// `(basis_label, residual)` for every truncated basis state.
pub fn cyclicity_residuals(f: &FockSpace, b: &Region, max_degree: usize) -> Result<Vec<(String, f64)>> {
    Ok(cyclicity_span(f, b, max_degree)?.residuals)
}

/// Vacuum weights of the spectral decomposition of the truncated `Q_site`.
///
/// `Q_site = Σ_m α_m X_m` is a sum of commuting single-mode terms, so its
/// eigenvectors are products of eigenvectors of the truncated `X = a + a†`
/// and its eigenvalues the matching sums. Returns `(eigenvalue, |⟨e|0⟩|²)`.
pub fn site_q_spectrum(f: &FockSpace, site: usize) -> Result<Vec<(f64, f64)>> {
    if site >= f.n_modes {
        return Err(Error::IndexOutOfRange {
            index: site,
            n: f.n_modes,
        });
    }
    let n = f.truncation;
    let x = DMatrix::from_fn(n, n, |r, c| {
        if r.abs_diff(c) == 1 {
            (r.max(c) as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::try_new(x, f64::EPSILON, 0).ok_or(Error::DecompositionFailure { n })?;
    let alpha: Vec<f64> = (0..f.n_modes)
        .map(|m| f.mode_matrix[(site, m)] / (2.0 * f.mode_frequencies[m]).sqrt())
        .collect();
    let weight0: Vec<f64> = (0..n).map(|i| eig.eigenvectors[(0, i)].powi(2)).collect();

    let mut out = Vec::with_capacity(f.dim);
    for idx in 0..f.dim {
        let levels = f.levels(idx);
        let value: f64 = levels
            .iter()
            .enumerate()
            .map(|(m, &i)| alpha[m] * eig.eigenvalues[i])
            .sum();
        let weight: f64 = levels.iter().map(|&i| weight0[i]).product();
        out.push((value, weight));
    }
    Ok(out)
}

/// `‖A|0⟩‖` for a local operator `A` over `b`.
pub fn separability_check(f: &FockSpace, b: &Region, op: &LocalOperator) -> Result<f64> {
    check_region(f, b)?;
    match op {
        LocalOperator::Polynomial(terms) => {
            if terms.iter().all(|t| t.coeff == ZERO) {
                return Err(Error::ZeroOperator);
            }
            for factor in terms.iter().flat_map(|t| &t.factors) {
                if !b.contains(factor.site) {
                    return Err(Error::NotSupportedInRegion { site: factor.site });
                }
            }
            let mut out = DVector::zeros(f.dim);
            for t in terms.iter().filter(|t| t.coeff != ZERO) {
                out += apply_factors(f, &t.factors, &f.vacuum) * t.coeff;
            }
            Ok(out.norm())
        }
        LocalOperator::Window(w) => {
            if !b.contains(w.site) {
                return Err(Error::NotSupportedInRegion { site: w.site });
            }
            WindowEvent::new(w.site, w.lo, w.hi)?;
            let p: f64 = site_q_spectrum(f, w.site)?
                .into_iter()
                .filter(|&(x, _)| x >= w.lo && x <= w.hi)
                .map(|(_, wt)| wt)
                .sum();
            Ok(p.sqrt())
        }
    }
}

//! Experiment execution and deterministic report output.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::Serialize;
use serde::Serialize as DeriveSerialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::fock::{build_fock, cyclicity_span, separability_check, LocalOperator, RANK_DROP_TOL};
use crate::gaussian::ComplexMode;
use crate::knight::{
    coherent_locality_check, default_coeff_grid, knight_verdict, licht_pair_test, one_quantum_defect, site_mode,
    DefectReport, KnightVerdict, LichtReport,
};
use crate::measure::{
    conditional_moments, deviation_profile, ln_window_probability, window_probability, ProfileEntry, WindowEvent,
};
use crate::models::Region;
use crate::spectral::{localizable_modes, spectral_decompose, LocalityReport, SpectralData, LOCALIZABLE_REL_TOL};

pub const SCHEMA_VERSION: u32 = 1;

/// `(basis_label, max_degree, residual)`.
type CyclicityRow = (String, usize, f64);

#[derive(Debug, Clone, DeriveSerialize)]
pub struct ModelSummary {
    pub n: usize,
    pub frequencies: Vec<f64>,
    pub omega_norm: f64,
    pub nonlocality_tol: f64,
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct LocalitySection {
    #[serde(flatten)]
    pub report: LocalityReport,
    pub nonlocality_tol: f64,
    /// Nonzero localizable dimension must coincide with a vanishing
    /// off-block singular value.
    pub consistent: bool,
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct KnightSection {
    pub verdict: KnightVerdict,
    pub localizable_dim: usize,
    pub sigma_min_offblock: f64,
    pub probe: &'static str,
    pub one_quantum: DefectReport,
    pub consistent: bool,
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct CyclicityDegree {
    pub max_degree: usize,
    pub candidates: usize,
    pub rank: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct OneQuantumResidual {
    pub basis_label: String,
    /// Residual for `max_degree = 0, 1, …`.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct CyclicitySection {
    pub truncation: usize,
    pub dim: usize,
    pub rank_drop_tol: f64,
    pub degrees: Vec<CyclicityDegree>,
    pub one_quantum_states: Vec<OneQuantumResidual>,
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct WindowComparison {
    pub window: WindowEvent,
    pub measure_probability: f64,
    pub fock_probability: f64,
    pub abs_difference: f64,
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct SeparabilitySection {
    pub truncation: usize,
    pub polynomials: usize,
    pub polynomial_degree: usize,
    pub seed: u64,
    pub min_vacuum_norm: f64,
    pub max_vacuum_norm: f64,
    /// Windows on sites of the region only.
    pub windows: Vec<WindowComparison>,
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct WindowSection {
    pub window: WindowEvent,
    pub probability: f64,
    pub ln_probability: f64,
    pub conditional_mean: f64,
    pub conditional_second_moment: f64,
    pub profile: Vec<ProfileEntry>,
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct MeasureSection {
    pub windows: Vec<WindowSection>,
}

/// All results of one run.
#[derive(Debug, Clone, DeriveSerialize)]
pub struct ReportBundle {
    pub schema: u32,
    pub config: ExperimentConfig,
    pub model: ModelSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub locality: Option<LocalitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knight: Option<KnightSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherent: Option<DefectReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub licht: Option<LichtReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cyclicity: Option<CyclicitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separability: Option<SeparabilitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSection>,
    /// False when a sampled verdict contradicts an algebraic prediction.
    pub consistent: bool,
    #[serde(skip)]
    cyclicity_rows: Vec<CyclicityRow>,
}

impl ReportBundle {
    pub fn section_names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let present = [
            ("locality", self.locality.is_some()),
            ("knight", self.knight.is_some()),
            ("coherent", self.coherent.is_some()),
            ("licht", self.licht.is_some()),
            ("cyclicity", self.cyclicity.is_some()),
            ("separability", self.separability.is_some()),
            ("measure", self.measure.is_some()),
        ];
        for (name, on) in present {
            if on {
                out.push(name);
            }
        }
        out
    }
}

/// Runs the experiments selected by a resolved config.
pub fn run(config: &ExperimentConfig) -> Result<ReportBundle> {
    let config = config.clone().resolve()?;
    let kind = config.experiment;
    let s = spectral_decompose(&config.model.build()?)?;
    let b = config.region()?;
    let sampler = config.sampler.spec()?;
    let states = &config.states;

    let mut bundle = ReportBundle {
        schema: SCHEMA_VERSION,
        model: ModelSummary {
            n: s.n(),
            frequencies: s.frequencies(),
            omega_norm: s.omega_norm(),
            nonlocality_tol: s.nonlocality_tol(),
        },
        config: config.clone(),
        locality: None,
        knight: None,
        coherent: None,
        licht: None,
        cyclicity: None,
        separability: None,
        measure: None,
        consistent: true,
        cyclicity_rows: Vec::new(),
    };

    let locality = localizable_modes(&s, &b, LOCALIZABLE_REL_TOL)?;

    if kind.includes(ExperimentKind::Locality) {
        let consistent = (locality.localizable_dim > 0) != locality.strongly_nonlocal;
        bundle.locality = Some(LocalitySection {
            report: locality.clone(),
            nonlocality_tol: s.nonlocality_tol(),
            consistent,
        });
    }

    if kind.includes(ExperimentKind::Knight) {
        let verdict = knight_verdict(&s, &b)?;
        let (probe, xi) = match (&states.one_quantum, locality.localizable_basis.first()) {
            (Some(m), _) => ("configured", m.to_mode()?),
            (None, Some(u)) => ("first localizable mode", ComplexMode(u.clone())),
            (None, None) => ("first region site", site_mode(s.n(), b.members()[0])),
        };
        let one_quantum = one_quantum_defect(&s, &xi, &b, &sampler)?;
        let expected = match verdict {
            KnightVerdict::NoFiniteParticleLocalState => locality.localizable_dim == 0,
            KnightVerdict::LocalOneQuantumStateExists => locality.localizable_dim > 0,
        };
        bundle.knight = Some(KnightSection {
            verdict,
            localizable_dim: locality.localizable_dim,
            sigma_min_offblock: locality.sigma_min_offblock,
            probe,
            consistent: expected && one_quantum.consistent,
            one_quantum,
        });
    }

    if kind.includes(ExperimentKind::Coherent) {
        let x = states.coherent.as_ref().expect("resolved").to_phase_point()?;
        bundle.coherent = Some(coherent_locality_check(&s, &x, &b, &sampler)?);
    }

    if kind.includes(ExperimentKind::Licht) {
        let x1 = states.licht_x1.as_ref().expect("resolved").to_phase_point()?;
        let x2 = states.licht_x2.as_ref().expect("resolved").to_phase_point()?;
        bundle.licht = Some(licht_pair_test(&s, &x1, &x2, &b, &default_coeff_grid(), &sampler)?);
    }

    if kind.includes(ExperimentKind::Cyclicity) {
        let (section, rows) = cyclicity_section(&s, &b, config.fock.truncation, config.fock.max_degree)?;
        bundle.cyclicity = Some(section);
        bundle.cyclicity_rows = rows;
    }

    if kind.includes(ExperimentKind::Separability) {
        bundle.separability = Some(separability_section(&s, &b, &config)?);
    }

    if kind.includes(ExperimentKind::Measure) {
        let windows = config
            .windows
            .iter()
            .map(|w| {
                let m = conditional_moments(&s, w, w.site)?;
                Ok(WindowSection {
                    window: *w,
                    probability: window_probability(&s, w)?,
                    ln_probability: ln_window_probability(&s, w)?,
                    conditional_mean: m.mean,
                    conditional_second_moment: m.second_moment,
                    profile: deviation_profile(&s, w)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        bundle.measure = Some(MeasureSection { windows });
    }

    bundle.consistent = bundle.locality.as_ref().is_none_or(|l| l.consistent)
        && bundle.knight.as_ref().is_none_or(|k| k.consistent)
        && bundle.coherent.as_ref().is_none_or(|c| c.consistent)
        && bundle.licht.as_ref().is_none_or(|l| l.consistent);
    Ok(bundle)
}

fn cyclicity_section(
    s: &SpectralData,
    b: &Region,
    truncation: usize,
    max_degree: usize,
) -> Result<(CyclicitySection, Vec<CyclicityRow>)> {
    let f = build_fock(s, truncation)?;
    let single: Vec<usize> = if truncation >= 2 {
        (0..f.n_modes())
            .map(|m| {
                let mut levels = vec![0; f.n_modes()];
                levels[m] = 1;
                f.index(&levels)
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let mut degrees = Vec::new();
    let mut rows = Vec::new();
    let mut one_quantum_states: Vec<OneQuantumResidual> = single
        .iter()
        .map(|&i| OneQuantumResidual {
            basis_label: f.label(i),
            residuals: Vec::new(),
        })
        .collect();
    for d in 0..=max_degree {
        let span = cyclicity_span(&f, b, d)?;
        degrees.push(CyclicityDegree {
            max_degree: d,
            candidates: span.candidates,
            rank: span.rank,
            max_residual: span.residuals.iter().map(|r| r.1).fold(0.0, f64::max),
        });
        for (entry, &i) in one_quantum_states.iter_mut().zip(&single) {
            entry.residuals.push(span.residuals[i].1);
        }
        rows.extend(span.residuals.into_iter().map(|(label, r)| (label, d, r)));
    }
    Ok((
        CyclicitySection {
            truncation,
            dim: f.dim(),
            rank_drop_tol: RANK_DROP_TOL,
            degrees,
            one_quantum_states,
        },
        rows,
    ))
}

fn separability_section(s: &SpectralData, b: &Region, config: &ExperimentConfig) -> Result<SeparabilitySection> {
    let f = build_fock(s, config.fock.truncation)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.sampler.seed);
    let mut min_norm = f64::INFINITY;
    let mut max_norm = 0.0f64;
    for _ in 0..config.fock.polynomials {
        let a = LocalOperator::random_polynomial(b, config.fock.polynomial_degree, &mut rng);
        let norm = separability_check(&f, b, &a)?;
        min_norm = min_norm.min(norm);
        max_norm = max_norm.max(norm);
    }
    let windows = config
        .windows
        .iter()
        .filter(|w| b.contains(w.site))
        .map(|w| {
            let fock_probability = separability_check(&f, b, &LocalOperator::Window(*w))?.powi(2);
            let measure_probability = window_probability(s, w)?;
            Ok(WindowComparison {
                window: *w,
                measure_probability,
                fock_probability,
                abs_difference: (fock_probability - measure_probability).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SeparabilitySection {
        truncation: config.fock.truncation,
        polynomials: config.fock.polynomials,
        polynomial_degree: config.fock.polynomial_degree,
        seed: config.sampler.seed,
        min_vacuum_norm: min_norm,
        max_vacuum_norm: max_norm,
        windows,
    })
}

/// Pretty JSON with every float written with 17 significant digits.
struct FullPrecision(PrettyFormatter<'static>);

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// `d.dddddddddddddddde±x`; non-finite values never reach here in JSON.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_json(bundle: &ReportBundle) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision(PrettyFormatter::new()));
    bundle
        .serialize(&mut ser)
        .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// `basis_label,max_degree,residual`.
pub fn cyclicity_csv(bundle: &ReportBundle) -> String {
    let mut out = String::from("basis_label,max_degree,residual\n");
    for (label, d, r) in &bundle.cyclicity_rows {
        writeln!(out, "\"{label}\",{d},{}", format_float(*r)).unwrap();
    }
    out
}

/// `window,site,vacuum_variance,post_variance,relative_deviation`, with
/// windows and sites numbered from 1.
pub fn profile_csv(bundle: &ReportBundle) -> String {
    let mut out = String::from("window,site,vacuum_variance,post_variance,relative_deviation\n");
    for (k, w) in bundle.measure.iter().flat_map(|m| m.windows.iter()).enumerate() {
        for e in &w.profile {
            writeln!(
                out,
                "{},{},{},{},{}",
                k + 1,
                e.site + 1,
                format_float(e.vacuum_variance),
                format_float(e.post_variance),
                format_float(e.relative_deviation)
            )
            .unwrap();
        }
    }
    out
}

/// Paths of the three report files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportPaths {
    pub json: PathBuf,
    pub cyclicity: PathBuf,
    pub profile: PathBuf,
}

impl ReportPaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            json: dir.join("report.json"),
            cyclicity: dir.join("cyclicity.csv"),
            profile: dir.join("profile.csv"),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes `report.json`, `cyclicity.csv` and `profile.csv` into `dir`,
/// creating it if needed.
pub fn emit_report(bundle: &ReportBundle, dir: &Path) -> Result<ReportPaths> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let paths = ReportPaths::in_dir(dir);
    write_file(&paths.json, &to_json(bundle)?)?;
    write_file(&paths.cyclicity, &cyclicity_csv(bundle))?;
    write_file(&paths.profile, &profile_csv(bundle))?;
    Ok(paths)
}

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use qlab::gaussian::{symplectic_form, vacuum_weyl, z_map, ComplexMode, PhasePoint};
use qlab::knight::{
    coherent_locality_check, knight_verdict, one_quantum_defect, SamplerSpec, Verdict, ALGEBRAIC_TOL, DEFECT_TOL,
};
use qlab::measure::{conditional_moments, window_probability, WindowEvent};
use qlab::models::{build_chain, build_custom, DynamicalMatrix, Region};
use qlab::spectral::{localizable_modes, offblock_min_singular, spectral_decompose, SpectralData, LOCALIZABLE_REL_TOL};

fn spd(n: usize, seed_entries: &[f64]) -> DynamicalMatrix {
    let a = DMatrix::from_fn(n, n, |i, j| seed_entries[(i * n + j) % seed_entries.len()]);
    build_custom(&(&a * a.transpose() + DMatrix::identity(n, n) * 0.5)).unwrap()
}

fn region_from_mask(n: usize, mask: u32) -> Option<Region> {
    let members: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
    (!members.is_empty() && members.len() < n).then(|| Region::new(n, members).unwrap())
}

fn arb_model() -> impl Strategy<Value = DynamicalMatrix> {
    prop_oneof![
        (2usize..7, 0.0f64..2.0, 0.1f64..2.0, any::<bool>())
            .prop_map(|(n, c, p, per)| build_chain(n, c, p, per).unwrap()),
        (2usize..6, prop::collection::vec(-1.0f64..1.0, 36)).prop_map(|(n, e)| spd(n, &e)),
    ]
}

fn point_in(n: usize, b: &Region, values: &[f64]) -> PhasePoint {
    let mut x = PhasePoint::zero(n);
    for (k, &j) in b.members().iter().enumerate() {
        x.q[j] = values[2 * k % values.len()];
        x.p[j] = values[(2 * k + 1) % values.len()];
    }
    x
}

fn scaled(s: &SpectralData, c: f64) -> SpectralData {
    let m = DynamicalMatrix::scaled(&build_custom(s.omega2()).unwrap(), c).unwrap();
    spectral_decompose(&m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn imaginary_inner_product_is_half_symplectic(
        m in arb_model(),
        xs in prop::collection::vec(-2.0f64..2.0, 24),
    ) {
        let s = spectral_decompose(&m).unwrap();
        let n = s.n();
        let x = PhasePoint::from_slices(&xs[..n], &xs[n..2 * n]).unwrap();
        let y = PhasePoint::from_slices(&xs[2 * n..3 * n], &xs[3 * n..4 * n]).unwrap();
        let im = z_map(&s, &x).unwrap().inner(&z_map(&s, &y).unwrap()).im;
        prop_assert!((im - 0.5 * symplectic_form(&x, &y).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn vacuum_weyl_depends_only_on_the_norm(
        re in prop::collection::vec(-1.0f64..1.0, 4),
        im in prop::collection::vec(-1.0f64..1.0, 4),
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let xi = ComplexMode(DVector::from_fn(4, |j, _| Complex64::new(re[j], im[j])));
        let rotated = ComplexMode(&xi.0 * Complex64::from_polar(1.0, theta));
        let v = vacuum_weyl(&xi);
        prop_assert_eq!(v.im, 0.0);
        prop_assert!((v - vacuum_weyl(&rotated)).norm() < 1e-15);
        prop_assert!(v.re > 0.0 && v.re <= 1.0);
    }

    #[test]
    fn kernel_equivalence(m in arb_model(), mask in 1u32..64) {
        let s = spectral_decompose(&m).unwrap();
        if let Some(b) = region_from_mask(s.n(), mask) {
            let report = localizable_modes(&s, &b, LOCALIZABLE_REL_TOL).unwrap();
            let sigma = offblock_min_singular(&s, &b).unwrap();
            prop_assert_eq!(report.localizable_dim > 0, sigma <= s.nonlocality_tol());
            prop_assert_eq!(report.strongly_nonlocal, report.localizable_dim == 0);
        }
    }

    #[test]
    fn one_quantum_tests_agree(m in arb_model(), mask in 1u32..64, seed in any::<u64>(), pick in 0usize..8) {
        let s = spectral_decompose(&m).unwrap();
        if let Some(b) = region_from_mask(s.n(), mask) {
            let sampler = SamplerSpec::new(50, 1.0, seed).unwrap();
            let report = localizable_modes(&s, &b, LOCALIZABLE_REL_TOL).unwrap();
            let mut probes = vec![qlab::knight::site_mode(s.n(), b.members()[pick % b.len()])];
            probes.extend(report.localizable_basis.iter().map(|u| ComplexMode(u.clone())));
            for xi in &probes {
                let r = one_quantum_defect(&s, xi, &b, &sampler).unwrap();
                prop_assert!(r.consistent, "{:?}", r);
                prop_assert_eq!(r.algebraic_distance <= ALGEBRAIC_TOL, r.sampled_defect <= DEFECT_TOL);
            }
        }
    }

    #[test]
    fn strict_locality_survives_region_growth(
        m in arb_model(),
        mask in 1u32..64,
        extra in 1u32..64,
        values in prop::collection::vec(-2.0f64..2.0, 12),
    ) {
        let s = spectral_decompose(&m).unwrap();
        let n = s.n();
        let (Some(b), Some(bigger)) = (region_from_mask(n, mask), region_from_mask(n, mask | extra)) else {
            return Ok(());
        };
        prop_assert!(b.is_subset_of(&bigger));
        let sampler = SamplerSpec::new(40, 1.0, 3).unwrap();
        let x = point_in(n, &b, &values);
        prop_assert_eq!(coherent_locality_check(&s, &x, &b, &sampler).unwrap().verdict, Verdict::StrictlyLocal);
        prop_assert_eq!(coherent_locality_check(&s, &x, &bigger, &sampler).unwrap().verdict, Verdict::StrictlyLocal);
        for u in localizable_modes(&s, &b, LOCALIZABLE_REL_TOL).unwrap().localizable_basis {
            let r = one_quantum_defect(&s, &ComplexMode(u), &bigger, &sampler).unwrap();
            prop_assert_eq!(r.verdict, Verdict::StrictlyLocal);
        }
    }

    #[test]
    fn verdicts_are_scale_invariant(
        m in arb_model(),
        mask in 1u32..64,
        values in prop::collection::vec(-1.5f64..1.5, 12),
    ) {
        let s = spectral_decompose(&m).unwrap();
        let n = s.n();
        let Some(b) = region_from_mask(n, mask) else { return Ok(()); };
        let sampler = SamplerSpec::new(40, 1.0, 9).unwrap();
        let outside = b.complement().members()[0];
        let x_in = point_in(n, &b, &values);
        let mut x_out = x_in.clone();
        x_out.q[outside] = 0.5;
        let probe = qlab::knight::site_mode(n, b.members()[0]);
        for c in [0.5, 2.0] {
            let sc = scaled(&s, c);
            prop_assert_eq!(knight_verdict(&sc, &b).unwrap(), knight_verdict(&s, &b).unwrap());
            // the same ξ = z_Ω(X) is reached from X' = (c^{-1/4} q, c^{1/4} p)
            for x in [&x_in, &x_out] {
                let moved = PhasePoint::new(&x.q * c.powf(-0.25), &x.p * c.powf(0.25)).unwrap();
                prop_assert!((z_map(&sc, &moved).unwrap().0 - z_map(&s, x).unwrap().0).norm() < 1e-10);
                prop_assert_eq!(
                    coherent_locality_check(&sc, &moved, &b, &sampler).unwrap().verdict,
                    coherent_locality_check(&s, x, &b, &sampler).unwrap().verdict
                );
            }
            prop_assert_eq!(
                one_quantum_defect(&sc, &probe, &b, &sampler).unwrap().verdict,
                one_quantum_defect(&s, &probe, &b, &sampler).unwrap().verdict
            );
        }
    }

    #[test]
    fn every_window_has_nonzero_vacuum_rate(m in arb_model(), lo in -6.0f64..6.0, width in 1e-3f64..3.0, site in 0usize..6) {
        let s = spectral_decompose(&m).unwrap();
        let w = WindowEvent::new(site % s.n(), lo, lo + width).unwrap();
        let p = window_probability(&s, &w).unwrap();
        prop_assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn wide_windows_leave_the_vacuum_unchanged(m in arb_model(), site in 0usize..6) {
        let s = spectral_decompose(&m).unwrap();
        let j = site % s.n();
        let sigma = (0.5 * s.omega_inv()[(j, j)]).sqrt();
        let w = WindowEvent::new(j, -10.0 * sigma, 10.0 * sigma).unwrap();
        for t in 0..s.n() {
            let mm = conditional_moments(&s, &w, t).unwrap();
            prop_assert!(mm.mean.abs() < 1e-10);
            prop_assert!((mm.second_moment - 0.5 * s.omega_inv()[(t, t)]).abs() < 1e-10);
        }
    }
}

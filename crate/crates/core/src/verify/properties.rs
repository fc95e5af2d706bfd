//! Property tests of the fast routines against the oracles and against
//! structural identities (homogeneity, monotonicity, adjointness).

use num_complex::Complex64;
use proptest::prelude::*;

use super::oracles::{carleson_oracle, golden_section_norm, indicator_norm_oracle};
use super::suites::{refinement_stable, run_suite, Suite, SuiteParams};
use crate::cli::report::Report;
use crate::duality_czo::{dense_pairing, pairing};
use crate::grid::{build_dyadic_tree, ExponentFunction, Grid, Signal};
use crate::littlewood_paley::{KernelFamily, WindowKind};
use crate::luxemburg::{indicator_norm, luxemburg_norm, DEFAULT_REL_TOL};
use crate::phi_transform::{analyze, dense_operators};
use crate::rng;
use crate::space_norms::{cmo_norm, hardy_norm, CmoForm};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn exponent() -> impl Strategy<Value = (f64, f64)> {
    (0.4f64..3.0).prop_flat_map(|mean| (Just(mean), 0.0..(mean - 0.3).clamp(0.0, 0.8)))
}

fn signal(grid: Grid, seed: u64) -> Signal {
    rng::white_noise(grid, &mut rng::stream(seed, 0))
}

fn family(grid: Grid, window: WindowKind) -> KernelFamily {
    KernelFamily::full_range(grid, window).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn luxemburg_matches_golden_section(j in 3u32..8, seed in any::<u64>(), (mean, amp) in exponent()) {
        let g = Grid::new(j).unwrap();
        let p = ExponentFunction::sinusoid(g, mean, amp).unwrap();
        let f = signal(g, seed);
        let fast = luxemburg_norm(&f, &p, DEFAULT_REL_TOL).unwrap();
        prop_assert!(rel(fast, golden_section_norm(&f.abs(), p.samples())) <= 1e-8);
    }

    #[test]
    fn norms_are_homogeneous(seed in any::<u64>(), c in 0.01f64..100.0, (mean, amp) in exponent()) {
        let g = Grid::new(6).unwrap();
        let p = ExponentFunction::sinusoid(g, mean, amp).unwrap();
        let fam = family(g, WindowKind::MeyerSmooth);
        let f = rng::band_noise(&fam, &mut rng::stream(seed, 1));
        let cf = f.scaled(Complex64::new(0.0, c));
        prop_assert!(rel(luxemburg_norm(&cf, &p, DEFAULT_REL_TOL).unwrap(), c * luxemburg_norm(&f, &p, DEFAULT_REL_TOL).unwrap()) <= 1e-9);
        prop_assert!(rel(hardy_norm(&cf, &p, &fam).unwrap(), c * hardy_norm(&f, &p, &fam).unwrap()) <= 1e-9);
        let a = cmo_norm(&cf, &p, &fam, CmoForm::Integral).unwrap();
        prop_assert!(rel(a, c * cmo_norm(&f, &p, &fam, CmoForm::Integral).unwrap()) <= 1e-9);
    }

    #[test]
    fn luxemburg_is_monotone(seed in any::<u64>(), shrink in 0.0f64..1.0, (mean, amp) in exponent()) {
        let g = Grid::new(6).unwrap();
        let p = ExponentFunction::sinusoid(g, mean, amp).unwrap();
        let f = signal(g, seed);
        // pointwise smaller modulus: damp a seeded subset of samples
        let mask = signal(g, seed ^ 1);
        let small = Signal::new(g, f.values().iter().zip(mask.values()).map(|(v, m)| if m.re > 0.0 { v * shrink } else { *v }).collect()).unwrap();
        prop_assert!(luxemburg_norm(&small, &p, DEFAULT_REL_TOL).unwrap() <= luxemburg_norm(&f, &p, DEFAULT_REL_TOL).unwrap() * (1.0 + 1e-9));
    }

    #[test]
    fn indicator_norms_match_oracle(j in 2u32..8, (mean, amp) in exponent(), pick in any::<u64>()) {
        let g = Grid::new(j).unwrap();
        let p = ExponentFunction::sinusoid(g, mean, amp).unwrap();
        let tree = build_dyadic_tree(g, 0, j).unwrap();
        let q = tree[(pick % tree.len() as u64) as usize];
        let exact = indicator_norm_oracle(&p, &q);
        prop_assert!(rel(indicator_norm(&p, &q.to_span()), exact) <= 1e-8);
        prop_assert!(rel(p.dyadic_indicator_norm(&q), exact) <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cmo_matches_brute_force_carleson(j in 4u32..7, seed in any::<u64>(), (mean, amp) in exponent(), meyer in any::<bool>()) {
        let g = Grid::new(j).unwrap();
        let window = if meyer { WindowKind::MeyerSmooth } else { WindowKind::ShannonSharp };
        let fam = family(g, window);
        let p = ExponentFunction::sinusoid(g, mean, amp).unwrap();
        let dense = dense_operators(g, &fam).unwrap();
        let f = rng::mixed_band_signal(&fam, &mut rng::stream(seed, 0), seed % 2).unwrap();
        let fast = cmo_norm(&f, &p, &fam, CmoForm::Integral).unwrap();
        prop_assert!(rel(fast, carleson_oracle(&f, &p, &fam, &dense)) <= 1e-8, "fast {fast}");
    }

    #[test]
    fn fast_and_dense_transforms_agree(j in 3u32..7, seed in any::<u64>(), meyer in any::<bool>()) {
        let g = Grid::new(j).unwrap();
        let window = if meyer { WindowKind::MeyerSmooth } else { WindowKind::ShannonSharp };
        let fam = family(g, window);
        let dense = dense_operators(g, &fam).unwrap();
        let f = rng::band_noise(&fam, &mut rng::stream(seed, 0));
        let h = rng::band_noise(&fam, &mut rng::stream(seed, 1));
        let a = analyze(&f, &fam).unwrap();
        let b = dense.analyze(&f, &fam).unwrap();
        let scale = f.l2_norm();
        for (q, v) in a.iter() {
            prop_assert!((v - b.get(q)).norm() <= 1e-10 * scale);
        }
        let lhs = pairing(&f, &h, &fam).unwrap();
        prop_assert!((lhs - dense_pairing(&dense, &f, &h)).norm() <= 1e-10);
        // conjugate symmetry of the sesquilinear pairing for a self-dual family
        prop_assert!((lhs - pairing(&h, &f, &fam).unwrap().conj()).norm() <= 1e-10);
    }
}

#[test]
fn suite_names_round_trip_and_cover_every_criterion() {
    for (i, s) in Suite::ALL.iter().enumerate() {
        assert_eq!(Suite::from_name(s.name()).unwrap(), *s);
        assert_eq!(s.criterion(), i + 1);
    }
    assert!(Suite::from_name("plancherel").is_err());
}

#[test]
fn refinement_stability_bounds() {
    assert!(refinement_stable(&[1.0, 1.9, 1.0], 2.0).0);
    assert!(!refinement_stable(&[1.0, 2.1], 2.0).0);
    assert!(!refinement_stable(&[1.0, f64::NAN], 2.0).0);
    assert!(!refinement_stable(&[0.0, 0.0], 2.0).0);
    assert_eq!(refinement_stable(&[4.0, 1.0], 8.0), (true, 4.0));
}

#[test]
fn suites_repeat_bit_for_bit() {
    let params = SuiteParams { seed: 11, trials: Some(4), ..SuiteParams::default() };
    let render = || Report::new(serde_json::Value::Null, run_suite(Suite::Atomic, &params).unwrap().into_parts().0).to_json();
    assert_eq!(render(), render());
}

#[test]
fn suites_surface_hypothesis_violations_as_config_errors() {
    let params = SuiteParams {
        exponent: Some(crate::cli::config::ExponentSpec::Constant { value: 1.3 }),
        ..SuiteParams::default()
    };
    assert!(matches!(run_suite(Suite::Duality, &params), Err(crate::Error::Config(_))));
    assert!(matches!(run_suite(Suite::AQuantity, &params), Err(crate::Error::Config(_))));
    let params = SuiteParams {
        exponent: Some(crate::cli::config::ExponentSpec::Constant { value: 0.45 }),
        ..SuiteParams::default()
    };
    assert!(matches!(run_suite(Suite::Czo, &params), Err(crate::Error::Config(_))));
}

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tame_core::bench::{Profile, RunConfig};
use tame_core::eta::{select_window, standardize_variant1, standardize_variant2, WindowKind};
use tame_core::hamiltonian::{build_family, EigenDecomposition, LatticeSpec};
use tame_core::linalg::{CMatrix, CVector, C64};
use tame_core::quantum::{
    default_degeneracy_tol, expectation_pure, time_averaged_observable, Observable, PureState,
};
use tame_core::simulator::{make_target, SimulatorHandle};
use tame_core::stats::{bootstrap, verdict, BootstrapSummary};

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let m = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn summary(lo: f64, width: f64) -> BootstrapSummary {
    BootstrapSummary {
        mean: lo + 0.5 * width,
        ci_low: lo,
        ci_high: lo + width,
        n_resamples: 100,
        seed: 0,
        std_error: width / 4.0,
        n_samples: 10,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bootstrap_interval_brackets_mean(xs in prop::collection::vec(-1e3f64..1e3, 1..80), seed in any::<u64>()) {
        let s = bootstrap(&xs, 200, seed).unwrap();
        prop_assert!(s.ci_low <= s.mean && s.mean <= s.ci_high);
        prop_assert_eq!(s, bootstrap(&xs, 200, seed).unwrap());
    }

    #[test]
    fn verdict_is_symmetric(a in -5.0f64..5.0, wa in 0.0f64..2.0, b in -5.0f64..5.0, wb in 0.0f64..2.0) {
        let (x, y) = (summary(a, wa), summary(b, wb));
        prop_assert_eq!(verdict(&x, &y), verdict(&y, &x));
    }

    #[test]
    fn windows_lie_inside_the_spectrum(lo in -10.0f64..10.0, breadth in 1e-3f64..50.0) {
        let hi = lo + breadth;
        for kind in WindowKind::ALL {
            let w = select_window(lo, hi, kind).unwrap();
            prop_assert!(w.eps_min >= lo - 1e-12 && w.eps_max <= hi + 1e-12);
            prop_assert!((w.width() - 0.15 * breadth).abs() < 1e-9 * breadth.max(1.0));
        }
    }

    #[test]
    fn time_average_is_population_weighted_diagonal(n in 2usize..24, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(n, &mut rng);
        let o = Observable::new(random_hermitian(n, &mut rng)).unwrap();
        let psi = PureState::normalized(CVector::from_fn(n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })).unwrap();
        let eigen = EigenDecomposition::from_hermitian(&h).unwrap();
        let omega = time_averaged_observable(&o, &eigen, default_degeneracy_tol(&eigen)).unwrap();
        let lhs = expectation_pure(&psi, &omega).unwrap();
        let c = eigen.coefficients(psi.amplitudes());
        let rhs: f64 = eigen
            .diagonal_elements(o.matrix())
            .iter()
            .zip(c.iter())
            .map(|(d, z)| d * z.norm_sqr())
            .sum();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn simulator_preserves_norm(n_half in 1usize..8, t in 0.0f64..50.0, seed in any::<u64>()) {
        let spec = LatticeSpec::new(n_half, 1.0, 1.0).unwrap();
        let sim = make_target(spec, 0.1).unwrap();
        let n = spec.n_sites();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = PureState::normalized(CVector::from_fn(n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })).unwrap();
        let one = sim.expectation(&psi, &Observable::identity(n), t).unwrap();
        prop_assert!((one - 1.0).abs() < 1e-10);
    }

    #[test]
    fn config_roundtrips_with_any_eta_grid(extra in prop::collection::btree_set(1u32..1000, 0..6)) {
        let mut cfg = RunConfig::profile(Profile::Desk);
        cfg.eta_list = std::iter::once(0.0).chain(extra.iter().map(|&k| k as f64 * 1e-3)).collect();
        cfg.validate().unwrap();
        prop_assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg.clone());
        prop_assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn standard_states_respect_their_window(seed in any::<u64>(), k in 0usize..3) {
        let spec = LatticeSpec::new(8, 1.0, 1.0).unwrap();
        let h = build_family(spec, 0.05, 0.0).unwrap();
        let eigen = h.eigen().unwrap();
        let x = tame_core::bench::benchmark_observable(&spec);
        let w = select_window(eigen.min_energy(), eigen.max_energy(), WindowKind::ALL[k]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let settings = Default::default();
        let s1 = standardize_variant1(eigen, &x, &w, 20, &settings, &mut rng).unwrap();
        let s2 = standardize_variant2(eigen, &x, &w, 20, &settings, &mut rng).unwrap();
        let xd = eigen.diagonal_elements(x.matrix());
        let (lo, hi) = xd.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        for v in s1.values.iter().chain(&s2.values) {
            prop_assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12);
        }
        prop_assert_eq!(s1.accepted(), 20);
        prop_assert!(s2.proposals >= 20);
    }
}

use proptest::prelude::*;
use weakclone::fit::fit_convergence_slope;
use weakclone::pointer::{gaussian_pointer, PointerGrid};
use weakclone::protocols::{
    random_hermitian, random_state, run_chain, run_qudit, run_teleportation_sequential,
    run_weak_cloning, ChainConfig, ProtocolConfig, RunReport,
};
use weakclone::tensor::{bell_phi_plus, tensor_product};
use weakclone::weak::{first_order_postselected, CouplingSpec, JointState};

fn config(n: usize, seed: u64) -> ProtocolConfig {
    ProtocolConfig::new(
        random_state(n, seed).unwrap(),
        random_hermitian(n, seed + 1000).unwrap(),
        random_hermitian(n, seed + 2000).unwrap(),
    )
}

fn couplings(cfg: &ProtocolConfig, gamma: f64) -> Vec<CouplingSpec> {
    vec![
        CouplingSpec::new(cfg.obs_a.clone(), 0, 0, gamma).unwrap(),
        CouplingSpec::new(cfg.obs_b.clone(), 2, 1, gamma).unwrap(),
    ]
}

#[test]
fn first_order_error_is_quadratic() {
    let m = gaussian_pointer(&PointerGrid::default(), 1.0).unwrap();
    let pointers = [m.clone(), m];
    for seed in [1, 2, 3] {
        let cfg = config(2, seed);
        let discrete = tensor_product(&cfg.phi, &bell_phi_plus()).unwrap();
        let points: Vec<(f64, f64)> = [0.1, 0.05, 0.02, 0.01]
            .iter()
            .map(|&g| {
                let specs = couplings(&cfg, g);
                let (exact, _) = JointState::grid(&discrete, &pointers)
                    .unwrap()
                    .apply_couplings(&specs)
                    .unwrap()
                    .postselect(&[0, 1], &bell_phi_plus())
                    .unwrap();
                let approx =
                    first_order_postselected(&discrete, &pointers, &specs, &[0, 1], &bell_phi_plus()).unwrap();
                (g, exact.distance(&approx).unwrap())
            })
            .collect();
        let slope = fit_convergence_slope(&points).unwrap();
        assert!(slope >= 1.9, "seed {seed}: {slope}");
    }
}

#[test]
fn product_deviation_vanishes_quadratically() {
    for seed in [4, 5, 6] {
        let cfg = config(2, seed);
        let discrete = tensor_product(&cfg.phi, &bell_phi_plus()).unwrap();
        let points: Vec<(f64, f64)> = [0.1, 0.05, 0.02, 0.01, 0.005]
            .iter()
            .map(|&g| {
                let (post, _) = JointState::ensemble(&discrete, &[1.0, 1.0])
                    .unwrap()
                    .apply_couplings(&couplings(&cfg, g))
                    .unwrap()
                    .postselect(&[0, 1], &bell_phi_plus())
                    .unwrap();
                let d = post.as_ensemble().unwrap().pointer_product_deviation().unwrap();
                assert!((0.0..=1.0).contains(&d));
                (g, d)
            })
            .collect();
        let slope = fit_convergence_slope(&points).unwrap();
        assert!(slope >= 1.9, "seed {seed}: {slope}");
    }
}

/// `|ŵ − ⟨φ|X|φ⟩| ≤ C γ²` with one `C` for all states: fit `C` at one
/// strength and check it bounds the residual at a smaller one.
fn universal_constant(run: impl Fn(&ProtocolConfig) -> Vec<f64>, n: usize) {
    let (g1, g2) = (1e-2, 2e-3);
    let mut c_max: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for seed in 0..100 {
        let cfg = config(n, seed);
        let big: f64 = run(&cfg.clone().with_gamma(g1)).into_iter().fold(0.0, f64::max);
        let small: f64 = run(&cfg.with_gamma(g2)).into_iter().fold(0.0, f64::max);
        c_max = c_max.max(big / (g1 * g1));
        worst_ratio = worst_ratio.max(small / (g2 * g2));
    }
    assert!(c_max.is_finite() && c_max < 1e3, "{c_max}");
    assert!(worst_ratio <= c_max * 1.05, "{worst_ratio} vs {c_max}");
}

fn errors(r: RunReport) -> Vec<f64> {
    r.pointers.iter().map(|p| p.expectation_error().unwrap()).collect()
}

#[test]
fn estimates_share_one_constant() {
    universal_constant(|c| errors(run_weak_cloning(c).unwrap()), 2);
    universal_constant(|c| errors(run_teleportation_sequential(c).unwrap()), 2);
    universal_constant(|c| errors(run_qudit(c).unwrap()), 3);
    universal_constant(
        |c| {
            let r = run_chain(&ChainConfig::uniform(c.clone(), 3)).unwrap();
            r.pointers.iter().map(|p| p.expectation_error().unwrap()).collect()
        },
        2,
    );
}

#[test]
fn postselection_probability_stays_a_quarter() {
    for seed in 0..20 {
        let r = run_weak_cloning(&config(2, seed).with_gamma(0.1)).unwrap();
        assert!((r.ps_probability - 0.25).abs() <= 1e-12 + 0.01 * 0.01);
    }
}

#[test]
fn bob_first_changes_nothing() {
    for seed in 0..20 {
        let mut cfg = config(2, seed);
        let base = run_weak_cloning(&cfg).unwrap();
        let chain = run_chain(&ChainConfig::uniform(cfg.clone(), 3)).unwrap();
        cfg.bob_first = true;
        let swapped = run_weak_cloning(&cfg).unwrap();
        let chain_swapped = run_chain(&ChainConfig::uniform(cfg, 3)).unwrap();
        assert!((base.ps_probability - swapped.ps_probability).abs() < 1e-12);
        assert!((chain.ps_probability - chain_swapped.ps_probability).abs() < 1e-12);
        let pairs = base.pointers.iter().zip(&swapped.pointers).chain(chain.pointers.iter().zip(&chain_swapped.pointers));
        for (x, y) in pairs {
            assert!((x.delta_p - y.delta_p).abs() < 1e-12);
            assert!((x.variance - y.variance).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reports_respect_born_bounds(seed in 0u64..1_000_000, gamma in 0.0f64..0.3, n in 2usize..5) {
        let r = run_qudit(&config(n, seed).with_gamma(gamma)).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.ps_probability));
        for p in &r.pointers {
            prop_assert!(p.residual.is_none_or(|x| x >= 0.0));
            prop_assert!(p.variance > 0.0);
            prop_assert!(p.weak_value.im.abs() < 1e-12);
        }
    }

    #[test]
    fn weak_value_is_the_expectation(seed in 0u64..1_000_000, n in 2usize..6) {
        let r = run_qudit(&config(n, seed)).unwrap();
        for p in &r.pointers {
            prop_assert!((p.weak_value.re - p.expectation).abs() < 1e-12);
        }
    }
}

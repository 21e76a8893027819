use bellgarch::bell::{pmf, BellParams};
use bellgarch::model::{
    closed_form_mean, empirical_moments, intensity_step_linear, orthogonality_check, simulate,
    IngarchSpec,
};
use bellgarch::montecarlo::closed_form_comparison;
use bellgarch::montecarlo::preset;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn iid_reduction_is_bell_distributed() {
    // alpha1 = beta1 = 0 gives i.i.d. Bell(alpha0)
    let spec = IngarchSpec::<f64>::linear(0.7, 0.0, 0.0).unwrap();
    let n = 40_000;
    let (series, path) = simulate(&spec, n, 0, 31).unwrap();
    assert!(path.lambdas().iter().all(|&l| l == 0.7));
    let p = BellParams::new(0.7).unwrap();
    let cells = 8usize;
    let mut observed = vec![0usize; cells + 1];
    for &x in series.values() {
        observed[(x as usize).min(cells)] += 1;
    }
    let mut expected: Vec<f64> = (0..cells as u64).map(|z| pmf(z, &p) * n as f64).collect();
    expected.push(n as f64 - expected.iter().sum::<f64>());
    let stat: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let pval = 1.0 - ChiSquared::new(cells as f64).unwrap().cdf(stat);
    assert!(pval > 0.001, "chi2={stat}");
}

#[test]
fn same_seed_same_path() {
    let spec = preset::<f64>("B2").unwrap().spec;
    assert_eq!(
        simulate(&spec, 300, 50, 4).unwrap(),
        simulate(&spec, 300, 50, 4).unwrap()
    );
    assert_ne!(
        simulate(&spec, 300, 50, 4).unwrap().0,
        simulate(&spec, 300, 50, 5).unwrap().0
    );
}

#[test]
fn linear_intensity_bounded_below() {
    let spec = preset::<f64>("A4").unwrap().spec;
    let (_, path) = simulate(&spec, 2000, 100, 9).unwrap();
    assert!(path.lambdas().iter().all(|&l| l >= spec.alpha0()));
    assert_eq!(intensity_step_linear(&spec, &[0.0], &[0.0]).unwrap(), 0.9);
}

#[test]
fn nonlinear_intensity_bounded_above_by_alpha0_term() {
    // alpha0 / (1 + lambda)^gamma <= alpha0
    let spec = preset::<f64>("B4").unwrap().spec;
    let (series, path) = simulate(&spec, 2000, 100, 10).unwrap();
    let l = path.lambdas();
    for t in 1..l.len() {
        let x = series.values()[t - 1] as f64;
        assert!(l[t] <= spec.alpha0() + 0.07 * x + 0.4 * l[t - 1] + 1e-12);
        assert!(l[t] > 0.0);
    }
}

#[test]
fn long_run_mean_matches_stationary_level() {
    // A1 has a near-constant intensity, so E[X] ~ E[lambda e^lambda]
    let sc = preset::<f64>("A1").unwrap();
    let (series, path) = simulate(&sc.spec, 200_000, 500, 77).unwrap();
    let m = empirical_moments::<f64>(&series, 2).unwrap();
    let target = path.cond_means().iter().sum::<f64>() / path.len() as f64;
    let se = (m.variance / series.len() as f64).sqrt() * 3.0;
    assert!((m.mean - target).abs() < 4.0 * se, "{} vs {target}", m.mean);
}

#[test]
fn printed_mean_formula_oracles() {
    let oracles = [
        ("A1", -0.00935489318830321586),
        ("A2", -0.0000692127213526328605),
        ("A3", -0.0703816252886322190),
        ("A4", -0.259151400605116300),
    ];
    for (name, want) in oracles {
        let got = closed_form_mean(&preset::<f64>(name).unwrap().spec).unwrap();
        assert!((got - want).abs() < 1e-10, "{name}: {got} vs {want}");
    }
}

#[test]
fn printed_formula_differs_from_simulation() {
    let c = closed_form_comparison(&preset::<f64>("A1").unwrap(), 20_000, 3).unwrap();
    assert!(c.formula.unwrap() < 0.0);
    assert!(c.simulated_mean > 0.5);
}

#[test]
fn martingale_difference_orthogonality() {
    let spec = preset::<f64>("A1").unwrap().spec;
    let est = orthogonality_check(&spec, 100_000, &[0, 1, 2, 3, 4, 5], 123).unwrap();
    for e in est {
        assert!(
            e.within(3.0),
            "lag {}: {} (se {})",
            e.lag,
            e.cov,
            e.std_error
        );
    }
}

use bellgarch::likelihood::{central_difference, finite_diff_gradient, Family, Likelihood};
use bellgarch::model::{simulate, IngarchSpec, Link};
use bellgarch::montecarlo::{jittered_start, mix_seed, scenario_presets};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Ten (series, evaluation point) pairs: all eight presets plus two extra
/// jittered draws of A1 and B3.
fn cases() -> Vec<(bellgarch::CountSeries, IngarchSpec<f64>)> {
    let presets = scenario_presets::<f64>();
    let mut picks: Vec<_> = presets.iter().collect();
    picks.push(&presets[0]);
    picks.push(&presets[6]);
    picks
        .into_iter()
        .enumerate()
        .map(|(i, sc)| {
            let (series, _) = simulate(&sc.spec, 200, 300, mix_seed(99, i as u64, 0)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
            let at = jittered_start(&sc.spec, 0.02, &mut rng);
            (series, at)
        })
        .collect()
}

#[test]
fn score_matches_central_differences() {
    for (series, spec) in cases() {
        let lik = Likelihood::new(Family::Bell, &series);
        let analytic = lik.score(&spec).unwrap();
        let numeric = finite_diff_gradient(&spec, &series, 1e-6).unwrap();
        for (a, n) in analytic.iter().zip(&numeric) {
            assert!(rel_close(*a, *n, 1e-5), "{spec:?}: {a} vs {n}");
        }
    }
}

#[test]
fn hessian_matches_differenced_scores() {
    for (series, spec) in cases() {
        let lik = Likelihood::new(Family::Bell, &series);
        let h_n = lik.hessian(&spec).unwrap();
        let x = spec.to_vec();
        let d = x.len();
        for j in 0..d {
            let col =
                central_difference(|v| Ok(lik.score(&spec.with_values(v)?)?[j]), &x, 1e-5).unwrap();
            for i in 0..d {
                // H_n is the negated second derivative
                assert!(
                    rel_close(-h_n[(i, j)], col[i], 1e-4),
                    "{spec:?} ({i},{j}): {} vs {}",
                    -h_n[(i, j)],
                    col[i]
                );
            }
        }
        assert!(h_n.asymmetry() < 1e-8 * h_n.diagonal().iter().fold(1.0f64, |m, v| m.max(v.abs())));
    }
}

#[test]
fn poisson_score_matches_differences() {
    let spec = IngarchSpec::linear(1.2, 0.2, 0.4).unwrap();
    let (series, _) = simulate(
        &IngarchSpec::<f64>::linear(0.6, 0.06, 0.1).unwrap(),
        300,
        100,
        3,
    )
    .unwrap();
    let lik = Likelihood::new(Family::Poisson, &series);
    let analytic = lik.score(&spec).unwrap();
    let numeric =
        central_difference(|v| lik.loglik(&spec.with_values(v)?), &spec.to_vec(), 1e-6).unwrap();
    for (a, n) in analytic.iter().zip(&numeric) {
        assert!(rel_close(*a, *n, 1e-5), "{a} vs {n}");
    }
}

#[test]
fn nonlinear_link_tends_to_linear_as_gamma_vanishes() {
    let (series, _) = simulate(
        &IngarchSpec::<f64>::linear(0.6, 0.06, 0.1).unwrap(),
        500,
        100,
        8,
    )
    .unwrap();
    let lik = Likelihood::new(Family::Bell, &series);
    let lin: f64 = lik
        .loglik(&IngarchSpec::linear(0.6, 0.06, 0.1).unwrap())
        .unwrap();
    let mut prev = f64::INFINITY;
    for gamma in [1e-2, 1e-4, 1e-6, 1e-8] {
        let spec =
            IngarchSpec::<f64>::new(0.6, vec![0.06], vec![0.1], Link::Nonlinear { gamma }).unwrap();
        let gap = (lik.loglik(&spec).unwrap() - lin).abs();
        assert!(gap <= prev);
        prev = gap;
    }
    assert!(prev < 1e-6 * lin.abs());
}

use bellgarch::diagnostics::{
    acf, cumulative_periodogram, diagnose, information_criteria, pacf, pearson_residuals,
};
use bellgarch::estimation::{fit_cml, FitOptions};
use bellgarch::model::{simulate, Link};
use bellgarch::montecarlo::{mix_seed, preset};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

#[test]
fn white_noise_acf_inside_bounds() {
    let x = white_noise(2000, 1);
    let r = acf(&x, 20).unwrap();
    let bound = 1.96 / (2000f64).sqrt();
    let outside = r.iter().filter(|v| v.abs() > bound).count();
    assert!(outside <= 3, "{outside} of 20 lags outside");
}

#[test]
fn ar1_pacf_cuts_off() {
    let e = white_noise(5000, 2);
    let mut x = vec![0.0f64; e.len()];
    for t in 1..x.len() {
        x[t] = 0.6 * x[t - 1] + e[t];
    }
    let p = pacf(&x, 8).unwrap();
    assert!((p[0] - 0.6).abs() < 0.05);
    let bound = 3.0 / (5000f64).sqrt();
    assert!(p[1..].iter().all(|v| v.abs() < bound));
}

#[test]
fn white_noise_within_band_at_nominal_rate() {
    let inside = (0..200)
        .filter(|&s| {
            cumulative_periodogram(&white_noise(256, 1000 + s))
                .unwrap()
                .inside
        })
        .count();
    assert!(inside >= 180, "{inside} of 200 inside");
}

#[test]
fn correctly_specified_residuals_pass_band() {
    let sc = preset::<f64>("A1").unwrap();
    let mut inside = 0;
    for trial in 0..100u64 {
        let (series, _) = simulate(&sc.spec, 300, 500, mix_seed(5, trial, 0)).unwrap();
        let fit = fit_cml(&series, Link::Linear, &FitOptions::<f64>::default()).unwrap();
        let res = pearson_residuals(&fit, &series).unwrap();
        if cumulative_periodogram(&res).unwrap().inside {
            inside += 1;
        }
    }
    assert!(inside >= 90, "{inside} of 100");
}

#[test]
fn report_is_consistent() {
    let sc = preset::<f64>("B2").unwrap();
    let (series, _) = simulate(&sc.spec, 400, 500, 8).unwrap();
    let fit = fit_cml(&series, sc.spec.link(), &FitOptions::default()).unwrap();
    let rep = diagnose(&fit, &series, None).unwrap();
    assert_eq!(rep.acf.len(), 40);
    assert_eq!(rep.residuals.len(), 400);
    for (l, y) in fit.lambda_path.lambdas().iter().zip(&rep.predictions) {
        assert_eq!(*y, l * l.exp());
    }
    assert!(rep.acf.iter().all(|v| v.abs() <= 1.0));
    let cp = &rep.cum_periodogram;
    assert_eq!(*cp.ordinates.last().unwrap(), 1.0);
    assert!(cp.ordinates.windows(2).all(|w| w[1] >= w[0]));
}

proptest! {
    #[test]
    fn criteria_monotone_in_loglik(ll in -5000.0f64..-1.0, d in 0.0f64..100.0, k in 1usize..8, n in 20usize..2000) {
        let (a1, b1) = information_criteria(ll, k, n);
        let (a2, b2) = information_criteria(ll - d, k, n);
        prop_assert!(a2 >= a1 && b2 >= b1);
    }

    #[test]
    fn acf_bounded(seed in 0u64..1000) {
        let x = white_noise(64, seed);
        prop_assert!(acf(&x, 15).unwrap().iter().all(|v| v.abs() <= 1.0 + 1e-12));
        let cp = cumulative_periodogram(&x).unwrap();
        prop_assert!(cp.ordinates.iter().all(|&c| (0.0..=1.0).contains(&c)));
    }
}

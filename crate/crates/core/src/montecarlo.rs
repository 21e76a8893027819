//! Monte Carlo replication of the estimator study: simulate under a known
//! specification, refit from a jittered start, and summarize the estimates by
//! Mean, MADE (mean absolute deviation from the truth) and MSE, averaged over
//! replications.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::{fit_cml, FitOptions};
use crate::model::{closed_form_mean, simulate_with_rng, IngarchSpec};
use crate::scalar::Scalar;
use crate::DEFAULT_BURN_IN;

pub const DEFAULT_SAMPLE_SIZES: [usize; 3] = [200, 500, 1000];
pub const DEFAULT_REPLICATIONS: usize = 500;
pub const DEFAULT_INIT_JITTER: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub name: String,
    pub spec: IngarchSpec<T>,
}

/// Scenarios A1-A4 (linear link) and B1-B4 (nonlinear link).
pub fn scenario_presets<T: Scalar>() -> Vec<Scenario<T>> {
    let lin = |name: &str, a0: f64, a1: f64, b1: f64| Scenario {
        name: name.to_string(),
        spec: IngarchSpec::linear(T::c(a0), T::c(a1), T::c(b1)).expect("valid preset"),
    };
    let nonlin = |name: &str, a0: f64, a1: f64, b1: f64, g: f64| Scenario {
        name: name.to_string(),
        spec: IngarchSpec::nonlinear(T::c(a0), T::c(a1), T::c(b1), T::c(g)).expect("valid preset"),
    };
    vec![
        lin("A1", 0.6, 0.06, 0.10),
        lin("A2", 0.7, 0.025, 0.08),
        lin("A3", 0.8, 0.04, 0.09),
        lin("A4", 0.9, 0.03, 0.12),
        nonlin("B1", 0.4, 0.04, 0.1, 0.5),
        nonlin("B2", 0.5, 0.05, 0.2, 0.8),
        nonlin("B3", 0.7, 0.06, 0.3, 1.0),
        nonlin("B4", 0.4, 0.07, 0.4, 2.0),
    ]
}

pub fn preset<T: Scalar>(name: &str) -> Option<Scenario<T>> {
    scenario_presets()
        .into_iter()
        .find(|s| s.name.eq_ignore_ascii_case(name))
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig<T> {
    pub scenario: Scenario<T>,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    /// Half-width of the uniform start around the true coefficients.
    pub init_jitter: T,
    pub burn_in: usize,
}

impl<T: Scalar> McConfig<T> {
    pub fn new(scenario: Scenario<T>, seed: u64) -> Self {
        Self {
            scenario,
            sample_sizes: DEFAULT_SAMPLE_SIZES.to_vec(),
            replications: DEFAULT_REPLICATIONS,
            seed,
            init_jitter: T::c(DEFAULT_INIT_JITTER),
            burn_in: DEFAULT_BURN_IN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be >= 1".into()));
        }
        if let Some(&n) = self.sample_sizes.iter().find(|&&n| n < 20) {
            return Err(Error::InvalidParameter(format!(
                "sample sizes must be >= 20, got {n}"
            )));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::InvalidParameter("no sample sizes given".into()));
        }
        if !(self.init_jitter >= T::zero()) {
            return Err(Error::InvalidParameter("init_jitter must be >= 0".into()));
        }
        self.scenario.spec.check_stationary()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamStats<T> {
    pub mean: T,
    pub made: T,
    pub mse: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McRow<T> {
    pub n: usize,
    /// One entry per coefficient, ordered as `IngarchSpec::to_vec`.
    pub stats: Vec<ParamStats<T>>,
    pub converged: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport<T> {
    pub scenario: String,
    pub truth: Vec<T>,
    pub param_names: Vec<String>,
    pub replications: usize,
    pub rows: Vec<McRow<T>>,
}

impl<T: Scalar> McReport<T> {
    pub fn row(&self, n: usize) -> Option<&McRow<T>> {
        self.rows.iter().find(|r| r.n == n)
    }

    /// Number of coefficients whose MADE and MSE are both non-increasing
    /// across the report's sample sizes (in ascending order).
    pub fn nonincreasing_cells(&self) -> usize {
        let mut rows: Vec<&McRow<T>> = self.rows.iter().collect();
        rows.sort_by_key(|r| r.n);
        (0..self.truth.len())
            .filter(|&i| {
                rows.windows(2).all(|w| {
                    w[1].stats[i].made <= w[0].stats[i].made
                        && w[1].stats[i].mse <= w[0].stats[i].mse
                })
            })
            .count()
    }
}

/// Mean, MADE and MSE of `estimates` (one vector per replication) against `truth`.
pub fn aggregate<T: Scalar>(truth: &[T], estimates: &[Vec<T>]) -> Vec<ParamStats<T>> {
    let r = T::from_count(estimates.len() as u64);
    truth
        .iter()
        .enumerate()
        .map(|(i, &true_value)| {
            let (mut sum, mut abs, mut sq) = (T::zero(), T::zero(), T::zero());
            for est in estimates {
                let dev = est[i] - true_value;
                sum += est[i];
                abs += dev.abs();
                sq += dev * dev;
            }
            ParamStats {
                mean: sum / r,
                made: abs / r,
                mse: sq / r,
            }
        })
        .collect()
}

/// 64-bit mixer (splitmix64 finalizer) for deriving per-task seeds.
pub fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F).rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw around the truth, clamped back into the feasible region.
pub fn jittered_start<T: Scalar, R: Rng + ?Sized>(
    truth: &IngarchSpec<T>,
    jitter: T,
    rng: &mut R,
) -> IngarchSpec<T> {
    let j = jitter.to_f64_lossy();
    let mut v: Vec<T> = truth
        .to_vec()
        .into_iter()
        .map(|x| {
            let u = if j > 0.0 {
                rng.random_range(-j..j)
            } else {
                0.0
            };
            x + T::c(u)
        })
        .collect();
    let m = truth.p() + truth.q();
    v[0] = v[0].max(T::c(1e-3));
    for c in &mut v[1..1 + m] {
        *c = c.max(T::c(1e-4));
    }
    let total: T = v[1..1 + m].iter().copied().sum();
    let cap = T::c(0.98);
    if total > cap {
        let scale = cap / total;
        v[1..1 + m].iter_mut().for_each(|c| *c *= scale);
    }
    if truth.link().gamma().is_some() {
        v[1 + m] = v[1 + m].max(T::c(1e-3));
    }
    truth
        .with_values(&v)
        .expect("clamped into the feasible region")
}

/// Result of one replication: estimates, or `None` if the fit failed or did
/// not converge.
fn replicate<T: Scalar>(config: &McConfig<T>, n: usize, rep: usize) -> Option<Vec<T>> {
    let truth = &config.scenario.spec;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, n as u64, rep as u64));
    let (series, _) = simulate_with_rng(truth, n, config.burn_in, &mut rng).ok()?;
    let init = jittered_start(truth, config.init_jitter, &mut rng);
    let options = FitOptions {
        init: Some(init),
        ..FitOptions::default()
    };
    let fit = fit_cml(&series, truth.link(), &options).ok()?;
    fit.converged.then(|| fit.spec_hat.to_vec())
}

pub fn run_study<T: Scalar>(config: &McConfig<T>) -> Result<McReport<T>> {
    config.validate()?;
    let truth = config.scenario.spec.to_vec();
    let mut rows = Vec::with_capacity(config.sample_sizes.len());
    for &n in &config.sample_sizes {
        let results: Vec<Option<Vec<T>>> = (0..config.replications)
            .into_par_iter()
            .map(|rep| replicate(config, n, rep))
            .collect();
        let estimates: Vec<Vec<T>> = results.into_iter().flatten().collect();
        if estimates.is_empty() {
            return Err(Error::AllReplicationsFailed {
                replications: config.replications,
            });
        }
        rows.push(McRow {
            n,
            stats: aggregate(&truth, &estimates),
            converged: estimates.len(),
            failed: config.replications - estimates.len(),
        });
    }
    Ok(McReport {
        scenario: config.scenario.name.clone(),
        param_names: config.scenario.spec.param_names(),
        truth,
        replications: config.replications,
        rows,
    })
}

/// Printed closed-form mean next to the simulated long-run mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanComparison<T> {
    pub scenario: String,
    pub formula: Option<T>,
    pub simulated_mean: T,
    pub simulated_se: T,
}

pub fn closed_form_comparison<T: Scalar>(
    scenario: &Scenario<T>,
    n: usize,
    seed: u64,
) -> Result<MeanComparison<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (series, _) = simulate_with_rng(&scenario.spec, n, DEFAULT_BURN_IN, &mut rng)?;
    let mean: T = series.mean();
    // naive iid standard error; the series is positively autocorrelated
    let nt = T::from_count(n as u64);
    let var = series
        .values()
        .iter()
        .map(|&x| (T::from_count(x) - mean) * (T::from_count(x) - mean))
        .sum::<T>()
        / nt;
    Ok(MeanComparison {
        scenario: scenario.name.clone(),
        formula: closed_form_mean(&scenario.spec).ok(),
        simulated_mean: mean,
        simulated_se: (var / nt).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_table() {
        let a3 = preset::<f64>("A3").unwrap();
        assert_eq!(a3.spec.to_vec(), vec![0.8, 0.04, 0.09]);
        let b2 = preset::<f64>("b2").unwrap();
        assert_eq!(b2.spec.to_vec(), vec![0.5, 0.05, 0.2, 0.8]);
        let all = scenario_presets::<f64>();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|s| s.spec.is_stationary()));
    }

    #[test]
    fn aggregation_by_hand() {
        let truth = [1.0f64, 0.5];
        let est = vec![vec![1.5, 0.5], vec![0.5, 0.25], vec![1.0, 1.0]];
        let s = aggregate(&truth, &est);
        assert!((s[0].mean - 1.0).abs() < 1e-15);
        assert!((s[0].made - 1.0 / 3.0).abs() < 1e-15);
        assert!((s[0].mse - 0.5 / 3.0).abs() < 1e-15);
        assert!((s[1].mean - 1.75 / 3.0).abs() < 1e-15);
        assert!((s[1].made - 0.75 / 3.0).abs() < 1e-15);
        assert!((s[1].mse - (0.0625 + 0.25) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_replication_identity() {
        let truth = [0.6f64, 0.06, 0.1];
        let est = vec![vec![0.65, 0.05, 0.2]];
        for (s, (&t, &e)) in aggregate(&truth, &est)
            .iter()
            .zip(truth.iter().zip(&est[0]))
        {
            assert_eq!(s.made, (e - t).abs());
            assert_eq!(s.mse, s.made * s.made);
        }
    }

    #[test]
    fn jitter_stays_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let truth = IngarchSpec::linear(0.01, 0.0, 0.99 - 1e-9).unwrap();
        for _ in 0..200 {
            let s = jittered_start(&truth, 0.05, &mut rng);
            assert!(s.is_stationary());
            assert!(s.alpha0() > 0.0);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = McConfig::new(preset::<f64>("A1").unwrap(), 1);
        assert!(c.validate().is_ok());
        c.replications = 0;
        assert!(c.validate().is_err());
        c.replications = 2;
        c.sample_sizes = vec![10];
        assert!(c.validate().is_err());
    }
}

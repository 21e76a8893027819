//! Conditional maximum-likelihood fitting.
//!
//! The default method runs BFGS in an unconstrained parameterization:
//! `alpha0 = e^u`, `gamma = e^w` and the autoregressive coefficients
//! `c_i = e^{v_i} / (1 + sum_k e^{v_k})`, which keeps every `c_i > 0` and
//! `sum c_i < 1`. When the line search stalls, a Nelder-Mead pass takes over and
//! BFGS is restarted from its result. The alternative method runs Nelder-Mead
//! directly on the original coefficients with an infinite penalty outside the
//! feasible region.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diagnostics::information_criteria;
use crate::error::{Error, Result};
use crate::likelihood::{Family, Likelihood};
use crate::linalg::Matrix;
use crate::model::{CountSeries, IngarchSpec, IntensityPath, Link};
use crate::optim::{bfgs, nelder_mead, OptimConfig, OptimOutcome, StopReason};
use crate::scalar::Scalar;

/// Number of random starts drawn when multi-start is enabled.
pub const MULTI_START_DRAWS: usize = 8;

const MULTI_START_SALT: u64 = 0x6d75_6c74_6973_7472;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// BFGS on the transformed space with a Nelder-Mead fallback.
    Transformed,
    /// Nelder-Mead on the original coefficients with a feasibility barrier.
    PenalizedSimplex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions<T> {
    /// Model order `(p, q)`; ignored when `init` is given.
    pub order: (usize, usize),
    pub init: Option<IngarchSpec<T>>,
    pub multi_start: bool,
    pub seed: u64,
    pub lambda0: Option<T>,
    pub method: Method,
    pub optim: OptimConfig<T>,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            order: (1, 1),
            init: None,
            multi_start: false,
            seed: 0,
            lambda0: None,
            method: Method::Transformed,
            optim: OptimConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub family: Family,
    pub spec_hat: IngarchSpec<T>,
    pub loglik: T,
    pub lambda_path: IntensityPath<T>,
    /// `sqrt(diag(H_n^-1))`; `None` where the Hessian is singular or the
    /// diagonal entry is not positive.
    pub std_errors: Vec<Option<T>>,
    pub hessian: Option<Matrix<T>>,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Log-likelihood at each accepted iterate.
    pub trace: Vec<T>,
    /// Largest absolute score component at the estimate, original coordinates.
    pub score_max_abs: T,
    pub warnings: Vec<String>,
    /// Number of likelihood terms.
    pub n_eff: usize,
    /// Number of free parameters counted by the information criteria.
    pub k: usize,
    pub aic: T,
    pub bic: T,
}

impl<T: Scalar> FitResult<T> {
    pub fn param_names(&self) -> Vec<String> {
        self.spec_hat.param_names()
    }

    /// Index of the first observation with a likelihood term.
    pub fn first_term(&self) -> usize {
        self.spec_hat.max_order().max(1) - 1
    }
}

/// Conditional ML fit of a BELL-INGARCH model with the given link. For a
/// nonlinear link the `gamma` in `link` is ignored; the default start uses
/// `gamma = 1`.
pub fn fit_cml<T: Scalar>(
    series: &CountSeries,
    link: Link<T>,
    options: &FitOptions<T>,
) -> Result<FitResult<T>> {
    fit_family(Family::Bell, series, link, options)
}

/// Conditional ML fit for any supported conditional family.
pub fn fit_family<T: Scalar>(
    family: Family,
    series: &CountSeries,
    link: Link<T>,
    options: &FitOptions<T>,
) -> Result<FitResult<T>> {
    if series.values().iter().all(|&x| x == 0) {
        return Err(Error::DegenerateSeries(
            "all observations are zero; the likelihood has no interior maximum".into(),
        ));
    }
    let start = match &options.init {
        Some(s) => s.clone(),
        None => default_init(family, series, link, options.order)?,
    };
    let d = start.num_params();
    if series.len() < 10 * d {
        return Err(Error::InsufficientData {
            needed: 10 * d,
            got: series.len(),
        });
    }
    let lik = Likelihood::new(family, series).with_lambda0(options.lambda0);

    let mut starts = vec![start.clone()];
    if options.multi_start {
        starts.extend(random_starts(&start, options.seed));
    }
    let runs: Vec<(IngarchSpec<T>, OptimOutcome<T>)> = starts
        .par_iter()
        .filter_map(|s| optimize(&lik, s, options).ok())
        .collect();
    // first maximum in start order
    let (spec_hat, best) = runs
        .into_iter()
        .reduce(|a, b| if b.1.value < a.1.value { b } else { a })
        .ok_or_else(|| {
            Error::InvalidParameter("initial values are infeasible for this series".into())
        })?;

    finish(&lik, spec_hat, best)
}

fn optimize<T: Scalar>(
    lik: &Likelihood<T>,
    start: &IngarchSpec<T>,
    options: &FitOptions<T>,
) -> Result<(IngarchSpec<T>, OptimOutcome<T>)> {
    let config = &options.optim;
    match options.method {
        Method::Transformed => {
            let objective = |u: &[T]| -> Option<(T, Vec<T>)> {
                let spec = from_unconstrained(start, u).ok()?;
                let eval = lik.evaluate_with_gradient(&spec).ok()?;
                let g = chain_rule(&spec, &eval.gradient?);
                Some((-eval.loglik, g.into_iter().map(|v| -v).collect()))
            };
            let u0 = to_unconstrained(start)?;
            let mut out = bfgs(objective, &u0, config);
            if out.reason == StopReason::InfeasibleStart {
                return Err(Error::InvalidParameter("infeasible start".into()));
            }
            if !out.reason.is_converged() {
                log::debug!(
                    "BFGS stopped ({}); falling back to Nelder-Mead",
                    out.reason.as_str()
                );
                let value_only = |u: &[T]| -> Option<T> {
                    let spec = from_unconstrained(start, u).ok()?;
                    lik.loglik(&spec).ok().map(|v| -v)
                };
                let simplex = nelder_mead(value_only, &out.x, T::c(0.1), config);
                let polish = bfgs(objective, &simplex.x, config);
                let mut trace = out.trace;
                trace.extend(simplex.trace.iter().skip(1));
                trace.extend(polish.trace.iter().skip(1));
                let better = if polish.value <= simplex.value {
                    polish
                } else {
                    simplex
                };
                out = OptimOutcome {
                    iterations: out.iterations + better.iterations,
                    trace,
                    ..better
                };
            }
            let spec = from_unconstrained(start, &out.x)?;
            Ok((spec, out))
        }
        Method::PenalizedSimplex => {
            let objective = |theta: &[T]| -> Option<T> {
                let spec = start.with_values(theta).ok()?;
                if !spec.is_stationary() {
                    return None;
                }
                lik.loglik(&spec).ok().map(|v| -v)
            };
            let x0 = start.to_vec();
            let step = x0
                .iter()
                .map(|v| v.abs())
                .fold(T::zero(), T::max)
                .max(T::c(0.1))
                * T::c(0.05);
            let mut out = nelder_mead(objective, &x0, step, config);
            // restart once from the optimum to escape early collapse
            let again = nelder_mead(objective, &out.x, step * T::c(0.2), config);
            if again.value <= out.value {
                let mut trace = out.trace;
                trace.extend(again.trace.iter().skip(1));
                out = OptimOutcome {
                    iterations: out.iterations + again.iterations,
                    trace,
                    ..again
                };
            }
            if out.reason == StopReason::InfeasibleStart {
                return Err(Error::InvalidParameter("infeasible start".into()));
            }
            let spec = start.with_values(&out.x)?;
            Ok((spec, out))
        }
    }
}

fn finish<T: Scalar>(
    lik: &Likelihood<T>,
    spec_hat: IngarchSpec<T>,
    outcome: OptimOutcome<T>,
) -> Result<FitResult<T>> {
    let family = lik.family();
    let eval = lik.evaluate_with_hessian(&spec_hat)?;
    let grad = eval.gradient.expect("requested");
    let hess = eval.second_derivative.expect("requested").scaled(-T::one());
    let mut warnings = Vec::new();
    let std_errors = match hess.inverse(T::c(1e-13)) {
        Some(inv) => inv
            .diagonal()
            .into_iter()
            .map(|v| (v > T::zero() && v.is_finite()).then(|| v.sqrt()))
            .collect(),
        None => {
            warnings
                .push("Hessian is singular at the estimate; standard errors unavailable".into());
            vec![None; spec_hat.num_params()]
        }
    };
    let converged = outcome.reason.is_converged();
    if !converged {
        warnings.push(format!(
            "optimizer did not converge ({}); returning the best point found",
            outcome.reason.as_str()
        ));
    }
    let lambda_path = match family {
        Family::Bell => IntensityPath::from_lambdas(eval.lambdas),
        Family::Poisson => {
            let means = eval.lambdas.clone();
            IntensityPath::with_means(eval.lambdas, means)
        }
    };
    let n_eff = lik.n_terms(&spec_hat);
    let k = spec_hat.num_params();
    let (aic, bic) = information_criteria(eval.loglik, k, n_eff);
    let trace = outcome.trace.iter().map(|&v| -v).collect();
    Ok(FitResult {
        family,
        loglik: eval.loglik,
        lambda_path,
        std_errors,
        hessian: Some(hess),
        iterations: outcome.iterations,
        converged,
        stop_reason: outcome.reason,
        trace,
        score_max_abs: grad.iter().fold(T::zero(), |m, v| m.max(v.abs())),
        warnings,
        n_eff,
        k,
        aic,
        bic,
        spec_hat,
    })
}

/// Deterministic starting point: the stationary intensity is matched to the
/// sample mean through the family's mean relation, with `alpha1 = 0.05`,
/// `beta1 = 0.1` and `gamma = 1`.
pub fn default_init<T: Scalar>(
    family: Family,
    series: &CountSeries,
    link: Link<T>,
    order: (usize, usize),
) -> Result<IngarchSpec<T>> {
    let mean: T = series.mean();
    if !(mean > T::zero()) {
        return Err(Error::DegenerateSeries("sample mean is zero".into()));
    }
    let level = match family {
        Family::Bell => solve_bell_mean(mean),
        Family::Poisson => mean,
    };
    let (p, q) = match link {
        Link::Linear => order,
        Link::Nonlinear { .. } => (1, 1),
    };
    let alphas: Vec<T> = (0..p)
        .map(|i| if i == 0 { T::c(0.05) } else { T::c(0.01) })
        .collect();
    let betas: Vec<T> = (0..q)
        .map(|j| if j == 0 { T::c(0.1) } else { T::c(0.01) })
        .collect();
    let slack = T::one() - alphas.iter().chain(&betas).copied().sum::<T>();
    match link {
        Link::Linear => IngarchSpec::new(level * slack, alphas, betas, Link::Linear),
        Link::Nonlinear { .. } => {
            let gamma = T::one();
            let a0 = level * slack * (T::one() + level).powf(gamma);
            IngarchSpec::new(a0, alphas, betas, Link::Nonlinear { gamma })
        }
    }
}

/// Solves `lambda e^lambda = mean` by Newton iteration on `ln lambda + lambda = ln mean`.
pub fn solve_bell_mean<T: Scalar>(mean: T) -> T {
    let target = mean.ln();
    let mut lambda = if mean < T::one() {
        mean
    } else {
        (T::one() + mean).ln()
    };
    for _ in 0..100 {
        let f = lambda.ln() + lambda - target;
        let step = f / (T::one() / lambda + T::one());
        let next = (lambda - step).max(lambda * T::c(0.1));
        if (next - lambda).abs() <= T::epsilon() * T::c(4.0) * lambda {
            return next;
        }
        lambda = next;
    }
    lambda
}

fn random_starts<T: Scalar>(template: &IngarchSpec<T>, seed: u64) -> Vec<IngarchSpec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ MULTI_START_SALT);
    let m = template.p() + template.q();
    let mut out = Vec::with_capacity(MULTI_START_DRAWS);
    while out.len() < MULTI_START_DRAWS {
        let a0 = template.alpha0() * T::c(rng.random_range(0.5..1.5));
        let coefs: Vec<T> = (0..m)
            .map(|_| T::c(rng.random_range(0.0..0.9 / m as f64)))
            .collect();
        let gamma = T::c(rng.random_range(0.25..2.5));
        let mut v = vec![a0];
        v.extend(coefs);
        if template.link().gamma().is_some() {
            v.push(gamma);
        }
        if let Ok(spec) = template.with_values(&v) {
            out.push(spec);
        }
    }
    out
}

/// Maps a feasible spec to `(ln a0, v_1..v_m[, ln gamma])`. Coefficients at
/// zero are nudged to `1e-8` so the map is finite.
pub fn to_unconstrained<T: Scalar>(spec: &IngarchSpec<T>) -> Result<Vec<T>> {
    spec.check_stationary()?;
    let floor = T::c(1e-8);
    let coefs: Vec<T> = spec
        .alphas()
        .iter()
        .chain(spec.betas())
        .map(|&c| c.max(floor))
        .collect();
    let slack = T::one() - coefs.iter().copied().sum::<T>();
    if !(slack > T::zero()) {
        return Err(Error::NonStationary {
            persistence: (T::one() - slack).to_f64_lossy(),
        });
    }
    let mut u = vec![spec.alpha0().ln()];
    u.extend(coefs.iter().map(|&c| (c / slack).ln()));
    if let Some(g) = spec.link().gamma() {
        u.push(g.ln());
    }
    Ok(u)
}

pub fn from_unconstrained<T: Scalar>(template: &IngarchSpec<T>, u: &[T]) -> Result<IngarchSpec<T>> {
    let m = template.p() + template.q();
    let shift = u[1..1 + m].iter().copied().fold(T::zero(), T::max);
    let weights: Vec<T> = u[1..1 + m].iter().map(|&v| (v - shift).exp()).collect();
    let denom = (-shift).exp() + weights.iter().copied().sum::<T>();
    let mut theta = vec![u[0].exp()];
    theta.extend(weights.iter().map(|&w| w / denom));
    if template.link().gamma().is_some() {
        theta.push(u[1 + m].exp());
    }
    template.with_values(&theta)
}

/// Converts a gradient in original coordinates to the unconstrained ones.
fn chain_rule<T: Scalar>(spec: &IngarchSpec<T>, grad: &[T]) -> Vec<T> {
    let m = spec.p() + spec.q();
    let coefs: Vec<T> = spec.alphas().iter().chain(spec.betas()).copied().collect();
    let weighted: T = coefs
        .iter()
        .zip(&grad[1..1 + m])
        .map(|(&c, &g)| c * g)
        .sum();
    let mut out = vec![spec.alpha0() * grad[0]];
    out.extend(
        coefs
            .iter()
            .zip(&grad[1..1 + m])
            .map(|(&c, &g)| c * (g - weighted)),
    );
    if let Some(gamma) = spec.link().gamma() {
        out.push(gamma * grad[1 + m]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::central_difference;
    use crate::model::simulate;

    #[test]
    fn transform_round_trip() {
        let spec = IngarchSpec::<f64>::nonlinear(0.7, 0.06, 0.3, 1.2).unwrap();
        let u = to_unconstrained(&spec).unwrap();
        let back = from_unconstrained(&spec, &u).unwrap();
        for (a, b) in spec.to_vec().iter().zip(back.to_vec()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn chain_rule_matches_differences() {
        let (series, _) = simulate(
            &IngarchSpec::<f64>::linear(0.6, 0.05, 0.3).unwrap(),
            300,
            100,
            9,
        )
        .unwrap();
        let template = IngarchSpec::<f64>::linear(0.5, 0.04, 0.35).unwrap();
        let lik = Likelihood::new(Family::Bell, &series);
        let u = to_unconstrained(&template).unwrap();
        let analytic = chain_rule(&template, &lik.score(&template).unwrap());
        let numeric =
            central_difference(|v| lik.loglik(&from_unconstrained(&template, v)?), &u, 1e-6)
                .unwrap();
        for (a, n) in analytic.iter().zip(&numeric) {
            assert!((a - n).abs() <= 1e-5 * a.abs().max(1.0), "{a} vs {n}");
        }
    }

    #[test]
    fn bell_mean_inversion() {
        for m in [0.01, 0.5, 2.4, 40.0] {
            let l: f64 = solve_bell_mean(m);
            assert!((l * l.exp() - m).abs() < 1e-12 * m.max(1.0));
        }
    }

    #[test]
    fn rejects_degenerate_input() {
        let zeros = CountSeries::new(vec![0; 100]).unwrap();
        assert!(matches!(
            fit_cml::<f64>(&zeros, Link::Linear, &FitOptions::default()),
            Err(Error::DegenerateSeries(_))
        ));
        let short = CountSeries::new(vec![1, 2, 0, 3, 1]).unwrap();
        assert!(matches!(
            fit_cml::<f64>(&short, Link::Linear, &FitOptions::default()),
            Err(Error::InsufficientData { .. })
        ));
    }
}

//! Comparator models: Poisson-INGARCH(1,1) and NB-INGARCH(1,1).
//!
//! The NB-INGARCH fit is a quasi-likelihood fit: the mean equation and its
//! coefficients come from the Poisson likelihood, and the dispersion `v` of
//! the NB2 variance `lambda (1 + lambda / v)` is estimated afterwards by two
//! moment methods:
//!
//! * `v1` solves `sum (x - lambda)^2 / (lambda (1 + lambda / v)) = n_eff - 3`;
//! * `v2` is the inverse slope of the no-intercept regression of
//!   `(x - lambda)^2 - lambda` on `lambda^2`.

use crate::diagnostics::information_criteria;
use crate::error::{Error, Result};
use crate::estimation::{fit_family, FitOptions, FitResult};
use crate::likelihood::Family;
use crate::model::{CountSeries, IngarchSpec, Link};
use crate::scalar::Scalar;

/// Free parameters counted for the NB-INGARCH(1,1) information criteria.
pub const NB_PARAMS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct NbFit<T> {
    pub coefficients: IngarchSpec<T>,
    /// Poisson quasi-log-likelihood at the coefficients.
    pub loglik: T,
    pub v1: T,
    pub v2: T,
    pub k: usize,
    pub n_eff: usize,
    pub aic: T,
    pub bic: T,
    /// Underlying Poisson fit (intensity path, standard errors, convergence).
    pub mean_fit: FitResult<T>,
}

pub fn fit_poisson_ingarch<T: Scalar>(
    series: &CountSeries,
    init: Option<IngarchSpec<T>>,
    options: &FitOptions<T>,
) -> Result<FitResult<T>> {
    let mut opts = options.clone();
    if init.is_some() {
        opts.init = init;
    }
    fit_family(Family::Poisson, series, Link::Linear, &opts)
}

pub fn fit_nb_ingarch<T: Scalar>(
    series: &CountSeries,
    init: Option<IngarchSpec<T>>,
    options: &FitOptions<T>,
) -> Result<NbFit<T>> {
    let mean_fit = fit_poisson_ingarch(series, init, options)?;
    let start = mean_fit.first_term();
    let lambdas = &mean_fit.lambda_path.lambdas()[start..];
    let counts: Vec<T> = series.values()[start..]
        .iter()
        .map(|&x| T::from_count(x))
        .collect();
    let df = mean_fit.n_eff.saturating_sub(mean_fit.k);
    let v1 = dispersion_pearson(&counts, lambdas, df);
    let v2 = dispersion_regression(&counts, lambdas);
    let (Some(v1), Some(v2)) = (v1, v2) else {
        return Err(Error::NotOverdispersed {
            v1: v1.map(|v| v.to_f64_lossy()),
            v2: v2.map(|v| v.to_f64_lossy()),
        });
    };
    let (aic, bic) = information_criteria(mean_fit.loglik, NB_PARAMS, mean_fit.n_eff);
    Ok(NbFit {
        coefficients: mean_fit.spec_hat.clone(),
        loglik: mean_fit.loglik,
        v1,
        v2,
        k: NB_PARAMS,
        n_eff: mean_fit.n_eff,
        aic,
        bic,
        mean_fit,
    })
}

/// Root in `v` of the NB2 Pearson equation, or `None` if the Poisson Pearson
/// statistic already falls at or below `df`.
pub fn dispersion_pearson<T: Scalar>(counts: &[T], lambdas: &[T], df: usize) -> Option<T> {
    let df = T::from_count(df as u64);
    // decreasing in phi = 1 / v
    let excess = |phi: T| -> T {
        counts
            .iter()
            .zip(lambdas)
            .map(|(&x, &l)| (x - l) * (x - l) / (l * (T::one() + l * phi)))
            .sum::<T>()
            - df
    };
    if !(excess(T::zero()) > T::zero()) {
        return None;
    }
    let mut hi = T::one();
    while excess(hi) > T::zero() {
        hi *= T::c(2.0);
        if hi > T::c(1e12) {
            return None;
        }
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = (lo + hi) * T::c(0.5);
        if excess(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * hi {
            break;
        }
    }
    let phi = (lo + hi) * T::c(0.5);
    (phi > T::zero()).then(|| T::one() / phi)
}

/// `1 / slope` of `(x - lambda)^2 - lambda ~ slope * lambda^2`, or `None`
/// when the slope is not positive.
pub fn dispersion_regression<T: Scalar>(counts: &[T], lambdas: &[T]) -> Option<T> {
    let (num, den) = counts
        .iter()
        .zip(lambdas)
        .fold((T::zero(), T::zero()), |(n, d), (&x, &l)| {
            let l2 = l * l;
            (n + ((x - l) * (x - l) - l) * l2, d + l2 * l2)
        });
    let slope = num / den;
    (slope > T::zero()).then(|| T::one() / slope)
}

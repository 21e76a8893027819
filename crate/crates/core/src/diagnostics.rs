//! Post-fit diagnostics: Pearson residuals, residual ACF/PACF, cumulative
//! periodogram with a Kolmogorov-Smirnov band, and information criteria.

use crate::error::{Error, Result};
use crate::estimation::FitResult;
use crate::model::CountSeries;
use crate::scalar::Scalar;

/// Numerator of the 5% Kolmogorov-Smirnov band.
pub const KS_CRITICAL_5PCT: f64 = 1.358;

/// `(AIC, BIC) = (2k - 2 loglik, k ln(n_eff) - 2 loglik)`.
pub fn information_criteria<T: Scalar>(loglik: T, k: usize, n_eff: usize) -> (T, T) {
    let kt = T::from_count(k as u64);
    let two = T::c(2.0);
    let aic = two * kt - two * loglik;
    let bic = kt * T::from_count(n_eff as u64).ln() - two * loglik;
    (aic, bic)
}

/// One-step-ahead conditional means `Y_t` for every observation.
pub fn predictions<T: Scalar>(fit: &FitResult<T>) -> Vec<T> {
    fit.lambda_path.cond_means().to_vec()
}

/// `e_t = (X_t - E[X_t | F_{t-1}]) / sqrt(Var[X_t | F_{t-1}])` for the
/// observations that enter the likelihood.
pub fn pearson_residuals<T: Scalar>(fit: &FitResult<T>, series: &CountSeries) -> Result<Vec<T>> {
    let lambdas = fit.lambda_path.lambdas();
    if lambdas.len() != series.len() {
        return Err(Error::LengthMismatch {
            expected: series.len(),
            got: lambdas.len(),
        });
    }
    let family = fit.family;
    lambdas
        .iter()
        .zip(series.values())
        .skip(fit.first_term())
        .enumerate()
        .map(|(i, (&lambda, &x))| {
            if !(lambda > T::zero()) {
                return Err(Error::InvalidParameter(format!(
                    "non-positive intensity {lambda} at t={}",
                    i + fit.first_term() + 1
                )));
            }
            let mean = family.conditional_mean(lambda);
            let var = family.conditional_variance(lambda);
            Ok((T::from_count(x) - mean) / var.sqrt())
        })
        .collect()
}

/// Mean and standard deviation (denominator `n - 1`).
pub fn mean_and_sd<T: Scalar>(x: &[T]) -> (T, T) {
    let n = T::from_count(x.len() as u64);
    let mean = x.iter().copied().sum::<T>() / n;
    let ss = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
    let sd = if x.len() > 1 {
        (ss / (n - T::one())).sqrt()
    } else {
        T::zero()
    };
    (mean, sd)
}

/// Sample autocorrelations at lags `1..=max_lag`.
pub fn acf<T: Scalar>(x: &[T], max_lag: usize) -> Result<Vec<T>> {
    if x.len() <= max_lag {
        return Err(Error::InsufficientData {
            needed: max_lag + 1,
            got: x.len(),
        });
    }
    let n = T::from_count(x.len() as u64);
    let mean = x.iter().copied().sum::<T>() / n;
    let c0 = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
    if !(c0 > T::zero()) {
        return Err(Error::ZeroVariance);
    }
    Ok((1..=max_lag)
        .map(|k| {
            x[k..]
                .iter()
                .zip(x)
                .map(|(&a, &b)| (a - mean) * (b - mean))
                .sum::<T>()
                / c0
        })
        .collect())
}

/// Partial autocorrelations at lags `1..=max_lag` by Durbin-Levinson.
pub fn pacf<T: Scalar>(x: &[T], max_lag: usize) -> Result<Vec<T>> {
    let rho = acf(x, max_lag)?;
    Ok(durbin_levinson(&rho))
}

/// Partial autocorrelations from autocorrelations `rho[0] = r(1), ...`.
pub fn durbin_levinson<T: Scalar>(rho: &[T]) -> Vec<T> {
    let m = rho.len();
    let mut out = Vec::with_capacity(m);
    let mut phi: Vec<T> = Vec::with_capacity(m);
    for k in 0..m {
        let num = rho[k] - (0..k).map(|j| phi[j] * rho[k - 1 - j]).sum::<T>();
        let den = T::one() - (0..k).map(|j| phi[j] * rho[j]).sum::<T>();
        let kk = if den.abs() > T::epsilon() {
            num / den
        } else {
            T::zero()
        };
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - kk * prev[k - 1 - j];
        }
        phi.push(kk);
        out.push(kk);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CumulativePeriodogram<T> {
    /// Fourier frequencies `j / n`, `j = 1..=m`.
    pub frequencies: Vec<T>,
    /// Normalized cumulative periodogram; ends at exactly 1.
    pub ordinates: Vec<T>,
    /// Half-width of the 5% KS band around the line `j / m`.
    pub band: T,
    pub inside: bool,
}

/// Cumulative periodogram of a demeaned sequence at frequencies `j / n`,
/// `j = 1..=floor(n/2)`, with the band `1.358 / (sqrt(m) + 0.12 + 0.11/sqrt(m))`.
pub fn cumulative_periodogram<T: Scalar>(residuals: &[T]) -> Result<CumulativePeriodogram<T>> {
    let n = residuals.len();
    if n < 16 {
        return Err(Error::InsufficientData { needed: 16, got: n });
    }
    let nt = T::from_count(n as u64);
    let mean = residuals.iter().copied().sum::<T>() / nt;
    let centered: Vec<T> = residuals.iter().map(|&v| v - mean).collect();
    let m = n / 2;
    let two_pi = T::c(2.0) * T::PI();
    let mut power = Vec::with_capacity(m);
    for j in 1..=m {
        let w = two_pi * T::from_count(j as u64) / nt;
        let (mut re, mut im) = (T::zero(), T::zero());
        for (t, &v) in centered.iter().enumerate() {
            let a = w * T::from_count(t as u64);
            re += v * a.cos();
            im -= v * a.sin();
        }
        power.push((re * re + im * im) / nt);
    }
    let total = power.iter().copied().sum::<T>();
    if !(total > T::zero()) {
        return Err(Error::ZeroVariance);
    }
    let mut acc = T::zero();
    let mut ordinates: Vec<T> = power
        .iter()
        .map(|&p| {
            acc += p;
            (acc / total).min(T::one())
        })
        .collect();
    *ordinates.last_mut().expect("m >= 8") = T::one();
    let mt = T::from_count(m as u64);
    let sqrt_m = mt.sqrt();
    let band = T::c(KS_CRITICAL_5PCT) / (sqrt_m + T::c(0.12) + T::c(0.11) / sqrt_m);
    let inside = ordinates
        .iter()
        .enumerate()
        .all(|(j, &c)| (c - T::from_count(j as u64 + 1) / mt).abs() <= band);
    let frequencies = (1..=m).map(|j| T::from_count(j as u64) / nt).collect();
    Ok(CumulativePeriodogram {
        frequencies,
        ordinates,
        band,
        inside,
    })
}

/// Default lag horizon `min(40, n / 4)`.
pub fn default_max_lag(n: usize) -> usize {
    (n / 4).clamp(1, 40)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport<T> {
    pub residuals: Vec<T>,
    pub residual_mean: T,
    pub residual_sd: T,
    pub acf: Vec<T>,
    pub pacf: Vec<T>,
    pub cum_periodogram: CumulativePeriodogram<T>,
    /// `Y_t = E[X_t | F_{t-1}]` for every observation.
    pub predictions: Vec<T>,
}

pub fn diagnose<T: Scalar>(
    fit: &FitResult<T>,
    series: &CountSeries,
    max_lag: Option<usize>,
) -> Result<DiagnosticsReport<T>> {
    let residuals = pearson_residuals(fit, series)?;
    let (residual_mean, residual_sd) = mean_and_sd(&residuals);
    let k = max_lag
        .unwrap_or_else(|| default_max_lag(residuals.len()))
        .min(residuals.len() - 1);
    Ok(DiagnosticsReport {
        acf: acf(&residuals, k)?,
        pacf: pacf(&residuals, k)?,
        cum_periodogram: cumulative_periodogram(&residuals)?,
        predictions: predictions(fit),
        residual_mean,
        residual_sd,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn information_criteria_values() {
        let (aic, _) = information_criteria(-544.4992f64, 3, 267);
        assert!((aic - 1094.9984).abs() < 1e-9);
        let (_, bic) = information_criteria(-660.0511f64, 3, 242);
        assert!((bic - 1336.5691).abs() < 1e-3);
        let (a3, _) = information_criteria(-100.0f64, 3, 50);
        let (a4, _) = information_criteria(-100.0, 4, 50);
        assert_eq!(a4 - a3, 2.0);
    }

    #[test]
    fn acf_of_constant_fails() {
        assert_eq!(acf(&[2.0; 20], 3), Err(Error::ZeroVariance));
        assert!(acf(&[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn durbin_levinson_ar1() {
        // exact AR(1) autocorrelations phi^k
        let phi: f64 = 0.6;
        let rho: Vec<f64> = (1..=6).map(|k| phi.powi(k)).collect();
        let p = durbin_levinson(&rho);
        assert!((p[0] - phi).abs() < 1e-14);
        assert!(p[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn periodogram_shape() {
        let x: Vec<f64> = (0..64).map(|t| ((t * 37 % 17) as f64).sin()).collect();
        let cp = cumulative_periodogram(&x).unwrap();
        assert_eq!(cp.ordinates.len(), 32);
        assert_eq!(*cp.ordinates.last().unwrap(), 1.0);
        assert!(cp.ordinates.windows(2).all(|w| w[1] >= w[0]));
        assert!(cp.ordinates.iter().all(|&c| (0.0..=1.0).contains(&c)));
        assert!(cumulative_periodogram(&x[..10]).is_err());
        assert_eq!(cumulative_periodogram(&[1.0; 20]), Err(Error::ZeroVariance));
    }

    #[test]
    fn periodic_signal_leaves_band() {
        let x: Vec<f64> = (0..400)
            .map(|t| {
                (2.0 * std::f64::consts::PI * t as f64 / 8.0).sin()
                    + 0.01 * ((t * 7919 % 101) as f64 / 101.0 - 0.5)
            })
            .collect();
        assert!(!cumulative_periodogram(&x).unwrap().inside);
    }

    #[test]
    fn lag_default() {
        assert_eq!(default_max_lag(267), 40);
        assert_eq!(default_max_lag(100), 25);
    }
}

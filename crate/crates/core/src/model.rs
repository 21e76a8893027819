//! BELL-INGARCH(p, q) model: specification, intensity recursions, simulation
//! and moment structure.
//!
//! `X_t | F_{t-1} ~ Bell(lambda_t)` with
//!
//! * linear link: `lambda_t = a0 + sum_i a_i X_{t-i} + sum_j b_j lambda_{t-j}`
//! * nonlinear link (order (1,1)): `lambda_t = a0 / (1 + lambda_{t-1})^gamma + a1 X_{t-1} + b1 lambda_{t-1}`
//!
//! The conditional mean is `Z_t = lambda_t e^{lambda_t}`, not `lambda_t`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bell::{self, BellParams, THETA_CAP};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Link<T> {
    Linear,
    Nonlinear { gamma: T },
}

impl<T: Scalar> Link<T> {
    pub fn is_linear(&self) -> bool {
        matches!(self, Link::Linear)
    }

    pub fn gamma(&self) -> Option<T> {
        match self {
            Link::Linear => None,
            Link::Nonlinear { gamma } => Some(*gamma),
        }
    }
}

/// Order and coefficients of an INGARCH intensity recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct IngarchSpec<T> {
    alpha0: T,
    alphas: Vec<T>,
    betas: Vec<T>,
    link: Link<T>,
}

impl<T: Scalar> IngarchSpec<T> {
    pub fn new(alpha0: T, alphas: Vec<T>, betas: Vec<T>, link: Link<T>) -> Result<Self> {
        if !(alpha0.is_finite() && alpha0 > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "alpha0 must be positive, got {alpha0}"
            )));
        }
        if let Some(bad) = alphas
            .iter()
            .chain(betas.iter())
            .find(|c| !(c.is_finite() && **c >= T::zero()))
        {
            return Err(Error::InvalidParameter(format!(
                "autoregressive coefficients must be non-negative, got {bad}"
            )));
        }
        if alphas.is_empty() && betas.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one of p, q must be >= 1".into(),
            ));
        }
        if let Link::Nonlinear { gamma } = link {
            if !(gamma.is_finite() && gamma > T::zero()) {
                return Err(Error::InvalidParameter(format!(
                    "gamma must be positive, got {gamma}"
                )));
            }
            if alphas.len() != 1 || betas.len() != 1 {
                return Err(Error::InvalidParameter(
                    "the nonlinear link is defined for order (1,1) only".into(),
                ));
            }
        }
        Ok(Self {
            alpha0,
            alphas,
            betas,
            link,
        })
    }

    pub fn linear(alpha0: T, alpha1: T, beta1: T) -> Result<Self> {
        Self::new(alpha0, vec![alpha1], vec![beta1], Link::Linear)
    }

    pub fn nonlinear(alpha0: T, alpha1: T, beta1: T, gamma: T) -> Result<Self> {
        Self::new(alpha0, vec![alpha1], vec![beta1], Link::Nonlinear { gamma })
    }

    pub fn alpha0(&self) -> T {
        self.alpha0
    }
    pub fn alphas(&self) -> &[T] {
        &self.alphas
    }
    pub fn betas(&self) -> &[T] {
        &self.betas
    }
    pub fn link(&self) -> Link<T> {
        self.link
    }
    pub fn p(&self) -> usize {
        self.alphas.len()
    }
    pub fn q(&self) -> usize {
        self.betas.len()
    }

    /// `max(p, q)`: index of the first likelihood term.
    pub fn max_order(&self) -> usize {
        self.p().max(self.q())
    }

    /// Number of free coefficients: `1 + p + q`, plus one for `gamma`.
    pub fn num_params(&self) -> usize {
        1 + self.p() + self.q() + usize::from(!self.link.is_linear())
    }

    /// `sum alpha_i + sum beta_j`.
    pub fn persistence(&self) -> T {
        self.alphas.iter().chain(self.betas.iter()).copied().sum()
    }

    pub fn is_stationary(&self) -> bool {
        self.persistence() < T::one()
    }

    pub fn check_stationary(&self) -> Result<()> {
        if self.is_stationary() {
            Ok(())
        } else {
            Err(Error::NonStationary {
                persistence: self.persistence().to_f64_lossy(),
            })
        }
    }

    /// Fixed point `a0 / (1 - sum a - sum b)` of the linear recursion; the
    /// default starting intensity for simulation and likelihood evaluation.
    pub fn stationary_intensity(&self) -> Result<T> {
        self.check_stationary()?;
        Ok(self.alpha0 / (T::one() - self.persistence()))
    }

    /// Coefficients flattened as `(a0, a_1..a_p, b_1..b_q[, gamma])`.
    pub fn to_vec(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.num_params());
        v.push(self.alpha0);
        v.extend_from_slice(&self.alphas);
        v.extend_from_slice(&self.betas);
        if let Some(g) = self.link.gamma() {
            v.push(g);
        }
        v
    }

    /// Inverse of [`to_vec`](Self::to_vec) using `self` as the layout template.
    pub fn with_values(&self, values: &[T]) -> Result<Self> {
        if values.len() != self.num_params() {
            return Err(Error::LengthMismatch {
                expected: self.num_params(),
                got: values.len(),
            });
        }
        let (p, q) = (self.p(), self.q());
        let link = match self.link {
            Link::Linear => Link::Linear,
            Link::Nonlinear { .. } => Link::Nonlinear {
                gamma: values[1 + p + q],
            },
        };
        Self::new(
            values[0],
            values[1..1 + p].to_vec(),
            values[1 + p..1 + p + q].to_vec(),
            link,
        )
    }

    /// Coefficient labels matching [`to_vec`](Self::to_vec).
    pub fn param_names(&self) -> Vec<String> {
        let mut names = vec!["alpha0".to_string()];
        names.extend((1..=self.p()).map(|i| format!("alpha{i}")));
        names.extend((1..=self.q()).map(|j| format!("beta{j}")));
        if !self.link.is_linear() {
            names.push("gamma".into());
        }
        names
    }

    pub fn cast<U: Scalar>(&self) -> IngarchSpec<U> {
        let conv = |x: T| U::c(x.to_f64_lossy());
        IngarchSpec {
            alpha0: conv(self.alpha0),
            alphas: self.alphas.iter().map(|&a| conv(a)).collect(),
            betas: self.betas.iter().map(|&b| conv(b)).collect(),
            link: match self.link {
                Link::Linear => Link::Linear,
                Link::Nonlinear { gamma } => Link::Nonlinear { gamma: conv(gamma) },
            },
        }
    }
}

/// Observed counts `X_1..X_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountSeries {
    values: Vec<u64>,
}

impl CountSeries {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn max(&self) -> u64 {
        self.values.iter().copied().max().unwrap_or(0)
    }
    pub fn mean<T: Scalar>(&self) -> T {
        let total: f64 = self.values.iter().map(|&v| v as f64).sum();
        T::c(total / self.values.len() as f64)
    }
}

/// Intensities along a path together with the implied conditional means.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityPath<T> {
    lambdas: Vec<T>,
    cond_means: Vec<T>,
}

impl<T: Scalar> IntensityPath<T> {
    /// Bell conditional means `lambda e^lambda`.
    pub fn from_lambdas(lambdas: Vec<T>) -> Self {
        let cond_means = lambdas.iter().map(|&l| l * l.exp()).collect();
        Self {
            lambdas,
            cond_means,
        }
    }

    pub(crate) fn with_means(lambdas: Vec<T>, cond_means: Vec<T>) -> Self {
        debug_assert_eq!(lambdas.len(), cond_means.len());
        Self {
            lambdas,
            cond_means,
        }
    }

    pub fn lambdas(&self) -> &[T] {
        &self.lambdas
    }
    pub fn cond_means(&self) -> &[T] {
        &self.cond_means
    }
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }
    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary<T> {
    pub mean: T,
    pub variance: T,
    /// Sample autocovariances at lags `0..=K`.
    pub autocovariances: Vec<T>,
}

/// `a0 + sum_i a_i X_{t-i} + sum_j b_j lambda_{t-j}`; histories are most
/// recent first.
pub fn intensity_step_linear<T: Scalar>(
    spec: &IngarchSpec<T>,
    recent_counts: &[T],
    recent_lambdas: &[T],
) -> Result<T> {
    if !spec.link.is_linear() {
        return Err(Error::WrongLink { expected: "linear" });
    }
    check_history(spec, recent_counts, recent_lambdas)?;
    Ok(step_unchecked(spec, recent_counts, recent_lambdas))
}

/// `a0 / (1 + lambda_{t-1})^gamma + a1 X_{t-1} + b1 lambda_{t-1}`.
pub fn intensity_step_nonlinear<T: Scalar>(
    spec: &IngarchSpec<T>,
    recent_count: T,
    recent_lambda: T,
) -> Result<T> {
    if spec.link.is_linear() {
        return Err(Error::WrongLink {
            expected: "nonlinear",
        });
    }
    if recent_count < T::zero() || recent_lambda < T::zero() {
        return Err(Error::InvalidParameter(
            "recursion inputs must be non-negative".into(),
        ));
    }
    Ok(step_unchecked(spec, &[recent_count], &[recent_lambda]))
}

fn check_history<T: Scalar>(spec: &IngarchSpec<T>, counts: &[T], lambdas: &[T]) -> Result<()> {
    if counts.len() != spec.p() {
        return Err(Error::LengthMismatch {
            expected: spec.p(),
            got: counts.len(),
        });
    }
    if lambdas.len() != spec.q() {
        return Err(Error::LengthMismatch {
            expected: spec.q(),
            got: lambdas.len(),
        });
    }
    if counts.iter().chain(lambdas).any(|v| *v < T::zero()) {
        return Err(Error::InvalidParameter(
            "recursion inputs must be non-negative".into(),
        ));
    }
    Ok(())
}

/// One recursion step. `lambdas[0]` must hold `lambda_{t-1}` even when `q = 0`
/// for the nonlinear link; the linear link only reads the first `q` entries.
#[inline]
pub(crate) fn step_unchecked<T: Scalar>(spec: &IngarchSpec<T>, counts: &[T], lambdas: &[T]) -> T {
    let base = match spec.link {
        Link::Linear => spec.alpha0,
        Link::Nonlinear { gamma } => spec.alpha0 / (T::one() + lambdas[0]).powf(gamma),
    };
    let ar: T = spec.alphas.iter().zip(counts).map(|(&a, &x)| a * x).sum();
    let ma: T = spec.betas.iter().zip(lambdas).map(|(&b, &l)| b * l).sum();
    base + ar + ma
}

#[inline]
pub(crate) fn push_front<T: Copy>(history: &mut [T], value: T) {
    if history.is_empty() {
        return;
    }
    history.rotate_right(1);
    history[0] = value;
}

/// Simulates `n` observations after discarding `burn_in` draws, with a
/// ChaCha8 generator seeded from `seed`.
pub fn simulate<T: Scalar>(
    spec: &IngarchSpec<T>,
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Result<(CountSeries, IntensityPath<T>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_with_rng(spec, n, burn_in, &mut rng)
}

pub fn simulate_with_rng<T: Scalar, R: Rng + ?Sized>(
    spec: &IngarchSpec<T>,
    n: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<(CountSeries, IntensityPath<T>)> {
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let lambda0 = spec.stationary_intensity()?;
    let mut counts_hist = vec![lambda0; spec.p()];
    let mut lambda_hist = vec![lambda0; spec.q().max(1)];
    let mut values = Vec::with_capacity(n);
    let mut lambdas = Vec::with_capacity(n);
    for t in 0..burn_in + n {
        let lambda = step_unchecked(spec, &counts_hist, &lambda_hist);
        debug_assert!(!spec.link.is_linear() || lambda >= spec.alpha0);
        let params = BellParams::new(lambda).map_err(|_| Error::ThetaCapExceeded {
            t: t + 1,
            value: lambda.to_f64_lossy(),
            cap: THETA_CAP,
        })?;
        let x = bell::sample(&params, rng);
        push_front(&mut counts_hist, T::from_count(x));
        push_front(&mut lambda_hist, lambda);
        if t >= burn_in {
            values.push(x);
            lambdas.push(lambda);
        }
    }
    Ok((
        CountSeries::new(values)?,
        IntensityPath::from_lambdas(lambdas),
    ))
}

/// Closed-form unconditional mean as printed for stationary BELL-INGARCH(p, q):
/// `mu = A e^A` with
/// `A = [(1 - sum b) ln a0 + sum a (a0 - ln a0)] / sum a`.
///
/// The expression is reproduced verbatim; it is not `E[lambda e^lambda]` in
/// general and can even be negative (e.g. for `a0 < 1`).
pub fn closed_form_mean<T: Scalar>(spec: &IngarchSpec<T>) -> Result<T> {
    spec.check_stationary()?;
    let sum_a: T = spec.alphas.iter().copied().sum();
    if sum_a <= T::zero() {
        return Err(Error::Undefined(
            "mean formula divides by the sum of the alpha coefficients",
        ));
    }
    let sum_b: T = spec.betas.iter().copied().sum();
    let ln_a0 = spec.alpha0.ln();
    let a = ((T::one() - sum_b) * ln_a0 + sum_a * (spec.alpha0 - ln_a0)) / sum_a;
    Ok(a * a.exp())
}

/// Sample mean, variance (denominator `n`) and autocovariances at lags `0..=max_lag`.
pub fn empirical_moments<T: Scalar>(
    series: &CountSeries,
    max_lag: usize,
) -> Result<MomentSummary<T>> {
    let values: Vec<T> = series.values().iter().map(|&v| T::from_count(v)).collect();
    moments_of(&values, max_lag)
}

pub(crate) fn moments_of<T: Scalar>(values: &[T], max_lag: usize) -> Result<MomentSummary<T>> {
    let n = values.len();
    if max_lag >= n {
        return Err(Error::InsufficientData {
            needed: max_lag + 1,
            got: n,
        });
    }
    let nt = T::from_count(n as u64);
    let mean = values.iter().copied().sum::<T>() / nt;
    let autocovariances: Vec<T> = (0..=max_lag)
        .map(|k| {
            values[k..]
                .iter()
                .zip(values)
                .map(|(&a, &b)| (a - mean) * (b - mean))
                .sum::<T>()
                / nt
        })
        .collect();
    Ok(MomentSummary {
        mean,
        variance: autocovariances[0],
        autocovariances,
    })
}

/// Sample covariance with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceEstimate<T> {
    pub lag: usize,
    pub cov: T,
    pub std_error: T,
}

impl<T: Scalar> CovarianceEstimate<T> {
    /// `|cov| <= width * se`.
    pub fn within(&self, width: T) -> bool {
        self.cov.abs() <= width * self.std_error
    }
}

/// Estimates `cov(X_t - Z_t, Z_{t-k})` for each lag on one long simulated path;
/// these vanish for `k >= 0` because `X_t - Z_t` is a martingale difference.
pub fn orthogonality_check<T: Scalar>(
    spec: &IngarchSpec<T>,
    n: usize,
    lags: &[usize],
    seed: u64,
) -> Result<Vec<CovarianceEstimate<T>>> {
    let (series, path) = simulate(spec, n, crate::DEFAULT_BURN_IN, seed)?;
    let z = path.cond_means();
    let d: Vec<T> = series
        .values()
        .iter()
        .zip(z)
        .map(|(&x, &m)| T::from_count(x) - m)
        .collect();
    lags.iter()
        .map(|&k| {
            if k >= n {
                return Err(Error::InsufficientData {
                    needed: k + 2,
                    got: n,
                });
            }
            Ok(lagged_covariance(&d[k..], &z[..n - k], k))
        })
        .collect()
}

fn lagged_covariance<T: Scalar>(lead: &[T], lagged: &[T], lag: usize) -> CovarianceEstimate<T> {
    let m = T::from_count(lead.len() as u64);
    let mean_a = lead.iter().copied().sum::<T>() / m;
    let mean_b = lagged.iter().copied().sum::<T>() / m;
    let products: Vec<T> = lead
        .iter()
        .zip(lagged)
        .map(|(&a, &b)| (a - mean_a) * (b - mean_b))
        .collect();
    let cov = products.iter().copied().sum::<T>() / m;
    let var = products.iter().map(|&u| (u - cov) * (u - cov)).sum::<T>() / m;
    CovarianceEstimate {
        lag,
        cov,
        std_error: (var / m).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1() -> IngarchSpec<f64> {
        IngarchSpec::linear(0.6, 0.06, 0.10).unwrap()
    }

    #[test]
    fn linear_step_examples() {
        let spec = a1();
        let v = intensity_step_linear(&spec, &[3.0], &[1.0]).unwrap();
        assert!((v - 0.88).abs() < 1e-15);
        assert_eq!(intensity_step_linear(&spec, &[0.0], &[0.0]).unwrap(), 0.6);
        assert!(matches!(
            intensity_step_linear(&spec, &[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch {
                expected: 1,
                got: 2
            })
        ));
        let nl = IngarchSpec::nonlinear(0.4, 0.04, 0.1, 0.5).unwrap();
        assert!(intensity_step_linear(&nl, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn degenerate_coefficients_give_constant_intensity() {
        let spec = IngarchSpec::linear(0.7, 0.0, 0.0).unwrap();
        for x in [0.0, 1.0, 17.0] {
            assert_eq!(intensity_step_linear(&spec, &[x], &[5.0]).unwrap(), 0.7);
        }
    }

    #[test]
    fn nonlinear_step_examples() {
        let b1 = IngarchSpec::<f64>::nonlinear(0.4, 0.04, 0.1, 0.5).unwrap();
        let v = intensity_step_nonlinear(&b1, 2.0, 1.0).unwrap();
        assert!((v - 0.462_842_712_474_619).abs() < 1e-14);
        let v0 = intensity_step_nonlinear(&b1, 2.0, 0.0).unwrap();
        assert!((v0 - (0.4 + 0.08)).abs() < 1e-15);
        assert!(intensity_step_nonlinear(&a1(), 2.0, 1.0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(IngarchSpec::linear(0.0, 0.1, 0.1).is_err());
        assert!(IngarchSpec::linear(0.5, -0.1, 0.1).is_err());
        assert!(IngarchSpec::nonlinear(0.5, 0.1, 0.1, 0.0).is_err());
        assert!(IngarchSpec::<f64>::new(0.5, vec![], vec![], Link::Linear).is_err());
        assert!(IngarchSpec::new(0.5, vec![0.2], vec![], Link::Linear).is_ok());
        let ns = IngarchSpec::linear(0.5, 0.6, 0.5).unwrap();
        assert!(matches!(
            simulate(&ns, 10, 0, 1),
            Err(Error::NonStationary { .. })
        ));
    }

    #[test]
    fn flatten_round_trip() {
        let spec = IngarchSpec::nonlinear(0.7, 0.06, 0.3, 1.0).unwrap();
        let v = spec.to_vec();
        assert_eq!(v, vec![0.7, 0.06, 0.3, 1.0]);
        assert_eq!(spec.with_values(&v).unwrap(), spec);
        assert_eq!(spec.param_names(), ["alpha0", "alpha1", "beta1", "gamma"]);
    }

    #[test]
    fn closed_form_mean_unit_case() {
        let unit = IngarchSpec::linear(1.0, 0.2, 0.3).unwrap();
        assert!((closed_form_mean(&unit).unwrap() - std::f64::consts::E).abs() < 1e-15);
        let no_ar = IngarchSpec::linear(1.0, 0.0, 0.3).unwrap();
        assert!(matches!(closed_form_mean(&no_ar), Err(Error::Undefined(_))));
    }

    #[test]
    fn moments_of_constant_series() {
        let s = CountSeries::new(vec![4; 50]).unwrap();
        let m = empirical_moments::<f64>(&s, 5).unwrap();
        assert_eq!(m.mean, 4.0);
        assert_eq!(m.variance, 0.0);
        assert!(m.autocovariances.iter().all(|&g| g == 0.0));
        assert!(empirical_moments::<f64>(&s, 50).is_err());
    }

    #[test]
    fn simulation_is_deterministic_and_bounded_below() {
        let spec = a1();
        let (s1, p1) = simulate(&spec, 500, 100, 42).unwrap();
        let (s2, _) = simulate(&spec, 500, 100, 42).unwrap();
        assert_eq!(s1, s2);
        assert!(p1.lambdas().iter().all(|&l| l >= 0.6));
        for (l, z) in p1.lambdas().iter().zip(p1.cond_means()) {
            assert_eq!(*z, l * l.exp());
        }
    }

    #[test]
    fn nonlinear_path_lower_bound() {
        let spec = IngarchSpec::nonlinear(0.4, 0.07, 0.4, 2.0).unwrap();
        let (_, path) = simulate(&spec, 2000, 0, 5).unwrap();
        let lmax = path.lambdas().iter().copied().fold(0.0, f64::max);
        let floor = 0.4 * (1.0f64).min((1.0 + lmax).powf(-2.0));
        assert!(path.lambdas().iter().all(|&l| l >= floor && l > 0.0));
    }
}

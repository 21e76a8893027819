//! Conditional log-likelihood, analytic score and Hessian.
//!
//! For the Bell family
//! `l_t = x_t ln(lambda_t) + 1 - e^{lambda_t} + ln B_{x_t} - ln x_t!`, so
//! `dl_t/dlambda = x/lambda - e^lambda` and `d2l_t/dlambda2 = -x/lambda^2 - e^lambda`.
//! Derivatives of `lambda_t` with respect to the coefficients are propagated
//! through the intensity recursion, including the dependence of the starting
//! value `a0 / (1 - sum a - sum b)` on the coefficients.
//!
//! Terms are summed for `t = max(p, q), ..., n` (1-based). Pre-sample counts and
//! intensities are both set to the starting value.

use crate::bell::{self, THETA_CAP};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{CountSeries, IngarchSpec, IntensityPath, Link};
use crate::scalar::Scalar;

/// Conditional law of `X_t` given the intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Bell,
    Poisson,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Bell => "bell",
            Family::Poisson => "poisson",
        }
    }

    pub fn conditional_mean<T: Scalar>(&self, lambda: T) -> T {
        match self {
            Family::Bell => lambda * lambda.exp(),
            Family::Poisson => lambda,
        }
    }

    pub fn conditional_variance<T: Scalar>(&self, lambda: T) -> T {
        match self {
            Family::Bell => lambda * (T::one() + lambda) * lambda.exp(),
            Family::Poisson => lambda,
        }
    }

    /// Parameter-free part of `ln P(X = x)`.
    fn constants<T: Scalar>(&self, series: &CountSeries) -> Vec<T> {
        let max = series.max() as usize;
        match self {
            Family::Bell => {
                let table = bell::log_bell_over_factorial(max);
                series
                    .values()
                    .iter()
                    .map(|&x| T::c(table[x as usize]))
                    .collect()
            }
            Family::Poisson => series
                .values()
                .iter()
                .map(|&x| T::c(-bell::log_factorial(x as usize)))
                .collect(),
        }
    }

    #[inline]
    fn kernel<T: Scalar>(&self, x: T, lambda: T) -> T {
        let xl = if x == T::zero() {
            T::zero()
        } else {
            x * lambda.ln()
        };
        match self {
            Family::Bell => xl + T::one() - lambda.exp(),
            Family::Poisson => xl - lambda,
        }
    }

    #[inline]
    fn d1<T: Scalar>(&self, x: T, lambda: T) -> T {
        match self {
            Family::Bell => x / lambda - lambda.exp(),
            Family::Poisson => x / lambda - T::one(),
        }
    }

    #[inline]
    fn d2<T: Scalar>(&self, x: T, lambda: T) -> T {
        match self {
            Family::Bell => -x / (lambda * lambda) - lambda.exp(),
            Family::Poisson => -x / (lambda * lambda),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Order {
    Value,
    Gradient,
    Hessian,
}

/// Series with its per-observation constants, reusable across evaluations.
#[derive(Debug, Clone)]
pub struct Likelihood<T> {
    family: Family,
    counts: Vec<T>,
    constants: Vec<T>,
    lambda0_override: Option<T>,
}

/// Output of one pass through the recursion.
#[derive(Debug, Clone)]
pub struct Evaluation<T> {
    pub loglik: T,
    pub lambdas: Vec<T>,
    pub gradient: Option<Vec<T>>,
    /// Matrix of second derivatives of `l` (not negated).
    pub second_derivative: Option<Matrix<T>>,
}

impl<T: Scalar> Likelihood<T> {
    pub fn new(family: Family, series: &CountSeries) -> Self {
        Self {
            family,
            counts: series.values().iter().map(|&x| T::from_count(x)).collect(),
            constants: family.constants(series),
            lambda0_override: None,
        }
    }

    /// Fixes the starting intensity instead of deriving it from the coefficients.
    pub fn with_lambda0(mut self, lambda0: Option<T>) -> Self {
        self.lambda0_override = lambda0;
        self
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Number of likelihood terms, `n - max(p, q) + 1`.
    pub fn n_terms(&self, spec: &IngarchSpec<T>) -> usize {
        (self.counts.len() + 1).saturating_sub(spec.max_order())
    }

    pub fn loglik(&self, spec: &IngarchSpec<T>) -> Result<T> {
        Ok(self.run(spec, Order::Value)?.loglik)
    }

    pub fn evaluate(&self, spec: &IngarchSpec<T>) -> Result<Evaluation<T>> {
        self.run(spec, Order::Value)
    }

    pub fn evaluate_with_gradient(&self, spec: &IngarchSpec<T>) -> Result<Evaluation<T>> {
        self.run(spec, Order::Gradient)
    }

    pub fn evaluate_with_hessian(&self, spec: &IngarchSpec<T>) -> Result<Evaluation<T>> {
        self.run(spec, Order::Hessian)
    }

    pub fn score(&self, spec: &IngarchSpec<T>) -> Result<Vec<T>> {
        Ok(self
            .run(spec, Order::Gradient)?
            .gradient
            .expect("gradient requested"))
    }

    /// `H_n = -sum_t d2 l_t / dtheta dtheta^T`.
    pub fn hessian(&self, spec: &IngarchSpec<T>) -> Result<Matrix<T>> {
        Ok(self
            .run(spec, Order::Hessian)?
            .second_derivative
            .expect("hessian requested")
            .scaled(-T::one()))
    }

    fn run(&self, spec: &IngarchSpec<T>, order: Order) -> Result<Evaluation<T>> {
        spec.check_stationary()?;
        let n = self.counts.len();
        let p = spec.p();
        let d = spec.num_params();
        let dd = d * d;
        let gamma_idx = d - 1;
        let want_g = order >= Order::Gradient;
        let want_h = order >= Order::Hessian;
        let gd = if want_g { d } else { 0 };
        let hd = if want_h { dd } else { 0 };

        // starting value and its derivatives
        let (l0, g0, h0) = self.initial_state(spec, gd, hd);

        let mut lam = Vec::with_capacity(n);
        let mut lam_g = vec![T::zero(); n * gd];
        let mut lam_h = vec![T::zero(); n * hd];
        let zeros_g = vec![T::zero(); gd];
        let zeros_h = vec![T::zero(); hd];

        let first = spec.max_order().max(1) - 1;
        let mut loglik = T::zero();
        let mut grad = vec![T::zero(); gd];
        let mut hess = vec![T::zero(); hd];

        let mut g_t = vec![T::zero(); gd];
        let mut h_t = vec![T::zero(); hd];

        for t in 0..n {
            g_t.iter_mut().for_each(|v| *v = T::zero());
            h_t.iter_mut().for_each(|v| *v = T::zero());

            // lambda_{t-1} triple
            let (prev_v, prev_g, prev_h): (T, &[T], &[T]) = if t == 0 {
                (l0, &g0, &h0)
            } else {
                (
                    lam[t - 1],
                    &lam_g[(t - 1) * gd..t * gd],
                    &lam_h[(t - 1) * hd..t * hd],
                )
            };

            let mut value = match spec.link() {
                Link::Linear => {
                    if want_g {
                        g_t[0] = T::one();
                    }
                    spec.alpha0()
                }
                Link::Nonlinear { gamma } => {
                    let a0 = spec.alpha0();
                    let u = T::one() + prev_v;
                    let ln_u = u.ln();
                    let w = (-gamma * ln_u).exp();
                    let term = a0 * w;
                    if want_g {
                        let t_a0 = w;
                        let t_g = -a0 * w * ln_u;
                        let t_v = -gamma * a0 * w / u;
                        for k in 0..d {
                            g_t[k] += t_v * prev_g[k];
                        }
                        g_t[0] += t_a0;
                        g_t[gamma_idx] += t_g;
                        if want_h {
                            let t_a0g = -w * ln_u;
                            let t_a0v = -gamma * w / u;
                            let t_gg = a0 * w * ln_u * ln_u;
                            let t_gv = a0 * w * (gamma * ln_u - T::one()) / u;
                            let t_vv = gamma * (gamma + T::one()) * a0 * w / (u * u);
                            for k in 0..d {
                                for l in 0..d {
                                    h_t[k * d + l] +=
                                        t_vv * prev_g[k] * prev_g[l] + t_v * prev_h[k * d + l];
                                }
                                h_t[k] += t_a0v * prev_g[k];
                                h_t[k * d] += t_a0v * prev_g[k];
                                h_t[gamma_idx * d + k] += t_gv * prev_g[k];
                                h_t[k * d + gamma_idx] += t_gv * prev_g[k];
                            }
                            h_t[gamma_idx] += t_a0g;
                            h_t[gamma_idx * d] += t_a0g;
                            h_t[gamma_idx * d + gamma_idx] += t_gg;
                        }
                    }
                    term
                }
            };

            for (i, &a) in spec.alphas().iter().enumerate() {
                let lag = i + 1;
                let k = 1 + i;
                let (xv, xg, xh): (T, &[T], &[T]) = if t >= lag {
                    (self.counts[t - lag], &zeros_g, &zeros_h)
                } else {
                    (l0, &g0, &h0)
                };
                value += a * xv;
                if want_g {
                    accumulate_linear_term(&mut g_t, &mut h_t, d, k, a, xv, xg, xh, want_h);
                }
            }
            for (j, &b) in spec.betas().iter().enumerate() {
                let lag = j + 1;
                let k = 1 + p + j;
                let (lv, lg, lh): (T, &[T], &[T]) = if t >= lag {
                    (
                        lam[t - lag],
                        &lam_g[(t - lag) * gd..(t - lag + 1) * gd],
                        &lam_h[(t - lag) * hd..(t - lag + 1) * hd],
                    )
                } else {
                    (l0, &g0, &h0)
                };
                value += b * lv;
                if want_g {
                    accumulate_linear_term(&mut g_t, &mut h_t, d, k, b, lv, lg, lh, want_h);
                }
            }

            if !(value > T::zero()) || !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "intensity {value} at t={} is not positive",
                    t + 1
                )));
            }
            if self.family == Family::Bell && value > T::c(THETA_CAP) {
                return Err(Error::ThetaCapExceeded {
                    t: t + 1,
                    value: value.to_f64_lossy(),
                    cap: THETA_CAP,
                });
            }

            lam.push(value);
            if want_g {
                lam_g[t * gd..(t + 1) * gd].copy_from_slice(&g_t);
            }
            if want_h {
                lam_h[t * hd..(t + 1) * hd].copy_from_slice(&h_t);
            }

            if t >= first {
                let x = self.counts[t];
                loglik += self.family.kernel(x, value) + self.constants[t];
                if want_g {
                    let d1 = self.family.d1(x, value);
                    for k in 0..d {
                        grad[k] += d1 * g_t[k];
                    }
                    if want_h {
                        let d2 = self.family.d2(x, value);
                        for k in 0..d {
                            for l in 0..d {
                                hess[k * d + l] += d2 * g_t[k] * g_t[l] + d1 * h_t[k * d + l];
                            }
                        }
                    }
                }
            }
        }

        Ok(Evaluation {
            loglik,
            lambdas: lam,
            gradient: want_g.then_some(grad),
            second_derivative: want_h.then(|| Matrix::from_flat(d, hess)),
        })
    }

    fn initial_state(&self, spec: &IngarchSpec<T>, gd: usize, hd: usize) -> (T, Vec<T>, Vec<T>) {
        let mut g = vec![T::zero(); gd];
        let mut h = vec![T::zero(); hd];
        if let Some(l0) = self.lambda0_override {
            return (l0, g, h);
        }
        let d = spec.num_params();
        let coeffs = spec.p() + spec.q();
        let slack = T::one() - spec.persistence();
        let a0 = spec.alpha0();
        let l0 = a0 / slack;
        if gd > 0 {
            g[0] = T::one() / slack;
            for k in 1..=coeffs {
                g[k] = a0 / (slack * slack);
            }
        }
        if hd > 0 {
            let cross = T::one() / (slack * slack);
            let pure = T::c(2.0) * a0 / (slack * slack * slack);
            for k in 1..=coeffs {
                h[k] = cross;
                h[k * d] = cross;
                for l in 1..=coeffs {
                    h[k * d + l] = pure;
                }
            }
        }
        (l0, g, h)
    }
}

/// Adds derivatives of `coef * v` where `coef` is coordinate `k` and `v`
/// carries its own gradient/Hessian.
#[allow(clippy::too_many_arguments)]
#[inline]
fn accumulate_linear_term<T: Scalar>(
    g_t: &mut [T],
    h_t: &mut [T],
    d: usize,
    k: usize,
    coef: T,
    v: T,
    vg: &[T],
    vh: &[T],
    want_h: bool,
) {
    g_t[k] += v;
    for (gk, &vgk) in g_t.iter_mut().zip(vg) {
        *gk += coef * vgk;
    }
    if want_h {
        for l in 0..d {
            h_t[k * d + l] += vg[l];
            h_t[l * d + k] += vg[l];
        }
        for (hk, &vhk) in h_t.iter_mut().zip(vh) {
            *hk += coef * vhk;
        }
    }
}

/// Bell conditional log-likelihood and the intensity path it used.
pub fn log_likelihood<T: Scalar>(
    spec: &IngarchSpec<T>,
    series: &CountSeries,
    lambda0_override: Option<T>,
) -> Result<(T, IntensityPath<T>)> {
    let lik = Likelihood::new(Family::Bell, series).with_lambda0(lambda0_override);
    let eval = lik.evaluate(spec)?;
    Ok((eval.loglik, IntensityPath::from_lambdas(eval.lambdas)))
}

/// Analytic score of the Bell log-likelihood, ordered as `IngarchSpec::to_vec`.
pub fn score<T: Scalar>(spec: &IngarchSpec<T>, series: &CountSeries) -> Result<Vec<T>> {
    Likelihood::new(Family::Bell, series).score(spec)
}

/// `H_n(theta) = -sum_t d2 l_t`, symmetric.
pub fn hessian<T: Scalar>(spec: &IngarchSpec<T>, series: &CountSeries) -> Result<Matrix<T>> {
    Likelihood::new(Family::Bell, series).hessian(spec)
}

/// Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn central_difference<T, F>(f: F, x: &[T], h: T) -> Result<Vec<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<T>,
{
    if !(h > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {h}"
        )));
    }
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe)?;
            probe[i] = x[i] - h;
            let down = f(&probe)?;
            probe[i] = x[i];
            Ok((up - down) / (T::c(2.0) * h))
        })
        .collect()
}

/// Finite-difference gradient of the Bell log-likelihood. Every perturbed
/// point must stay feasible.
pub fn finite_diff_gradient<T: Scalar>(
    spec: &IngarchSpec<T>,
    series: &CountSeries,
    h: T,
) -> Result<Vec<T>> {
    let lik = Likelihood::new(Family::Bell, series);
    finite_diff_gradient_with(&lik, spec, h)
}

pub fn finite_diff_gradient_with<T: Scalar>(
    lik: &Likelihood<T>,
    spec: &IngarchSpec<T>,
    h: T,
) -> Result<Vec<T>> {
    check_interior(spec, h)?;
    central_difference(|v| lik.loglik(&spec.with_values(v)?), &spec.to_vec(), h)
}

fn check_interior<T: Scalar>(spec: &IngarchSpec<T>, h: T) -> Result<()> {
    let coeffs = spec.alphas().iter().chain(spec.betas());
    let inside = spec.alpha0() > h
        && coeffs.clone().all(|&c| c > h)
        && spec.persistence() + h < T::one()
        && spec.link().gamma().is_none_or(|g| g > h);
    if inside {
        Ok(())
    } else {
        Err(Error::TooCloseToBoundary {
            margin: h.to_f64_lossy(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{log_pmf, BellParams};

    fn series(v: &[u64]) -> CountSeries {
        CountSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn iid_reduction_matches_bell_pmf() {
        let s = series(&[0, 1, 3, 2, 0, 5, 1, 1, 0, 2]);
        let spec = IngarchSpec::linear(0.8, 0.0, 0.0).unwrap();
        let (ll, path) = log_likelihood(&spec, &s, None).unwrap();
        let p = BellParams::new(0.8).unwrap();
        let direct: f64 = s.values().iter().map(|&x| log_pmf(x, &p)).sum();
        assert!((ll - direct).abs() < 1e-12);
        assert!(path.lambdas().iter().all(|&l| l == 0.8));
    }

    #[test]
    fn iid_score_and_hessian_closed_form() {
        let s = series(&[0, 1, 3, 2, 0, 5, 1, 1, 0, 2]);
        let a0 = 0.8;
        let spec = IngarchSpec::linear(a0, 0.0, 0.0).unwrap();
        let g = score(&spec, &s).unwrap();
        let expect: f64 = s.values().iter().map(|&x| x as f64 / a0 - a0.exp()).sum();
        assert!((g[0] - expect).abs() < 1e-12);
        let h = hessian(&spec, &s).unwrap();
        let expect: f64 = s
            .values()
            .iter()
            .map(|&x| x as f64 / (a0 * a0) + a0.exp())
            .sum();
        assert!((h[(0, 0)] - expect).abs() < 1e-10);
    }

    #[test]
    fn quadratic_calibration() {
        let f = |v: &[f64]| Ok(3.0 * v[0] * v[0] - 2.0 * v[0] * v[1] + 0.5 * v[1] * v[1] + v[1]);
        let g = central_difference(f, &[1.5, -0.5], 1e-4).unwrap();
        assert!((g[0] - (9.0 + 1.0)).abs() < 1e-8);
        assert!((g[1] - (-3.0 - 0.5 + 1.0)).abs() < 1e-8);
        assert!(central_difference(f, &[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn boundary_rejected() {
        let s = series(&[1, 2, 3, 1, 0, 2]);
        let spec = IngarchSpec::linear(0.5, 0.0, 0.3).unwrap();
        assert!(matches!(
            finite_diff_gradient(&spec, &s, 1e-6),
            Err(Error::TooCloseToBoundary { .. })
        ));
    }

    #[test]
    fn lambda0_override_is_used() {
        let s = series(&[2, 0, 1, 4]);
        let spec = IngarchSpec::<f64>::linear(0.5, 0.1, 0.2).unwrap();
        let (_, path) = log_likelihood(&spec, &s, Some(3.0)).unwrap();
        assert!((path.lambdas()[0] - (0.5 + 0.1 * 3.0 + 0.2 * 3.0)).abs() < 1e-15);
        let (_, path) = log_likelihood(&spec, &s, None).unwrap();
        assert!((path.lambdas()[0] - 0.5 / 0.7).abs() < 1e-15);
    }
}

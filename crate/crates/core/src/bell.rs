//! Bell distribution primitives.
//!
//! `Z ~ Bell(theta)` has pmf `theta^z exp(1 - e^theta) B_z / z!` where `B_z` is
//! the z-th Bell number. Mean `theta e^theta`, variance `theta (1 + theta) e^theta`.
//!
//! Bell numbers are exact (integer Bell triangle) up to [`EXACT_BELL_LIMIT`] and
//! computed in the log domain from Dobinski's series above it. Both
//! log-Bell numbers and log-factorials live in a shared, append-only table.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest index computed by the exact integer recurrence.
pub const EXACT_BELL_LIMIT: usize = 64;

/// Upper bound accepted for a Bell parameter. `e^30` is ~1e13, far beyond any
/// conditional mean a count model produces in practice.
pub const THETA_CAP: f64 = 30.0;

/// Relative cut-off for Dobinski terms once the series is past its peak.
const DOBINSKI_REL_CUTOFF: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellParams<T> {
    theta: T,
}

impl<T: Scalar> BellParams<T> {
    pub fn new(theta: T) -> Result<Self> {
        if !theta.is_finite() || theta <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "Bell parameter must be positive and finite, got {theta}"
            )));
        }
        if theta > T::c(THETA_CAP) {
            return Err(Error::ThetaCapExceeded {
                t: 0,
                value: theta.to_f64_lossy(),
                cap: THETA_CAP,
            });
        }
        Ok(Self { theta })
    }

    #[inline]
    pub fn theta(&self) -> T {
        self.theta
    }
}

/// Log-Bell numbers and log-factorials `0..=max_index`.
#[derive(Debug, Clone)]
pub struct BellNumberTable {
    log_bell: Vec<f64>,
    log_factorial: Vec<f64>,
}

impl Default for BellNumberTable {
    fn default() -> Self {
        Self::with_max_index(EXACT_BELL_LIMIT)
    }
}

impl BellNumberTable {
    pub fn with_max_index(max_index: usize) -> Self {
        let mut table = Self {
            log_bell: Vec::new(),
            log_factorial: Vec::new(),
        };
        table.extend_to(max_index);
        table
    }

    pub fn max_index(&self) -> usize {
        self.log_bell.len() - 1
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_bell
    }

    /// Grows the table so that it covers `n` (and at least the exact range).
    /// Never shrinks.
    pub fn extend_to(&mut self, n: usize) {
        let n = n.max(EXACT_BELL_LIMIT);
        if self.log_factorial.is_empty() {
            self.log_factorial.push(0.0);
        }
        let mut acc = *self.log_factorial.last().expect("seeded with 0!");
        for k in self.log_factorial.len()..=n {
            acc += (k as f64).ln();
            self.log_factorial.push(acc);
        }
        if self.log_bell.is_empty() {
            self.log_bell = bell_triangle(EXACT_BELL_LIMIT)
                .iter()
                .map(ln_biguint)
                .collect();
        }
        for k in self.log_bell.len()..=n {
            let v = log_bell_dobinski_with(k, &mut self.log_factorial);
            self.log_bell.push(v);
        }
    }

    /// `log B_n`, or `None` when `n` is beyond the table.
    #[inline]
    pub fn log_bell(&self, n: usize) -> Option<f64> {
        self.log_bell.get(n).copied()
    }

    #[inline]
    pub fn log_factorial(&self, n: usize) -> Option<f64> {
        self.log_factorial.get(n).copied()
    }
}

fn shared_table() -> &'static RwLock<BellNumberTable> {
    static TABLE: OnceLock<RwLock<BellNumberTable>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(BellNumberTable::default()))
}

/// Makes sure the shared table covers index `n`.
pub fn ensure_table(n: usize) {
    let covered = shared_table()
        .read()
        .expect("bell table poisoned")
        .max_index()
        >= n;
    if !covered {
        shared_table()
            .write()
            .expect("bell table poisoned")
            .extend_to(n);
    }
}

/// `log B_n - log n!` for every `n` in `0..=max`, read from the shared table.
pub fn log_bell_over_factorial(max: usize) -> Vec<f64> {
    ensure_table(max);
    let table = shared_table().read().expect("bell table poisoned");
    (0..=max)
        .map(|n| table.log_bell[n] - table.log_factorial[n])
        .collect()
}

/// Natural log of the n-th Bell number.
pub fn log_bell_number(n: usize) -> f64 {
    ensure_table(n);
    shared_table()
        .read()
        .expect("bell table poisoned")
        .log_bell(n)
        .expect("table extended above")
}

/// `log n!` from the shared table.
pub fn log_factorial(n: usize) -> f64 {
    ensure_table(n);
    shared_table()
        .read()
        .expect("bell table poisoned")
        .log_factorial(n)
        .expect("table extended above")
}

/// Exact Bell numbers `B_0..=B_max` from the Bell triangle.
pub fn bell_triangle(max: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(BigUint::one());
    let mut row = vec![BigUint::one()];
    for _ in 1..=max {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().cloned().unwrap_or_else(BigUint::zero));
        for value in &row {
            let v = next.last().expect("non-empty row") + value;
            next.push(v);
        }
        // the first entry of each row is the Bell number
        out.push(next[0].clone());
        row = next;
    }
    out.truncate(max + 1);
    out
}

fn ln_biguint(value: &BigUint) -> f64 {
    let bits = value.bits();
    if bits <= 1000 {
        value.to_f64().expect("fits in f64").ln()
    } else {
        let shift = bits - 64;
        let top = (value >> shift).to_f64().expect("64-bit mantissa");
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// `log B_n` via log-sum-exp over Dobinski's series `e^-1 sum_k k^n / k!`.
///
/// Terms are accumulated until the series is past its peak and a term falls
/// below `1e-18` of the largest one.
pub fn log_bell_dobinski(n: usize) -> f64 {
    let mut log_fact = vec![0.0];
    log_bell_dobinski_with(n, &mut log_fact)
}

fn log_bell_dobinski_with(n: usize, log_fact: &mut Vec<f64>) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let cutoff = DOBINSKI_REL_CUTOFF.ln();
    let mut terms = Vec::new();
    let mut max = f64::NEG_INFINITY;
    let mut k = 1usize;
    loop {
        while log_fact.len() <= k {
            let last = *log_fact.last().expect("seeded with 0!");
            let next = log_fact.len();
            log_fact.push(last + (next as f64).ln());
        }
        let term = nf * (k as f64).ln() - log_fact[k];
        let decreasing = term < terms.last().copied().unwrap_or(f64::NEG_INFINITY);
        if term > max {
            max = term;
        }
        terms.push(term);
        if decreasing && term - max < cutoff {
            break;
        }
        k += 1;
    }
    // sum small terms first
    let total: f64 = terms.iter().rev().map(|t| (t - max).exp()).sum();
    max + total.ln() - 1.0
}

/// Smallest `z*` with `P(Z >= z*) <= tol`, from the bound
/// `P(Z >= z) <= G(2) / 2^z` where `G` is the pgf.
pub fn tail_bound_index<T: Scalar>(params: &BellParams<T>, tol: f64) -> usize {
    let theta = params.theta().to_f64_lossy();
    let log_g2 = (2.0 * theta).exp() - theta.exp();
    ((log_g2 - tol.ln()) / std::f64::consts::LN_2)
        .ceil()
        .max(1.0) as usize
}

pub fn log_pmf<T: Scalar>(z: u64, params: &BellParams<T>) -> T {
    let theta = params.theta();
    let zi = z as usize;
    let constant = log_bell_number(zi) - log_factorial(zi);
    log_pmf_with_constant(z, theta, T::c(constant))
}

/// `log pmf` given a precomputed `log B_z - log z!`.
#[inline]
pub(crate) fn log_pmf_with_constant<T: Scalar>(z: u64, theta: T, constant: T) -> T {
    let zt = T::from_count(z);
    let kernel = if z == 0 { T::zero() } else { zt * theta.ln() };
    kernel + T::one() - theta.exp() + constant
}

pub fn pmf<T: Scalar>(z: u64, params: &BellParams<T>) -> T {
    log_pmf(z, params).exp()
}

/// Probability generating function `exp(e^{s theta} - e^theta)`.
pub fn pgf<T: Scalar>(s: T, params: &BellParams<T>) -> Result<T> {
    if !(s.abs() <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "pgf argument must satisfy |s| <= 1, got {s}"
        )));
    }
    Ok(pgf_unchecked(s, params))
}

pub(crate) fn pgf_unchecked<T: Scalar>(s: T, params: &BellParams<T>) -> T {
    let theta = params.theta();
    ((s * theta).exp() - theta.exp()).exp()
}

pub fn mean<T: Scalar>(params: &BellParams<T>) -> T {
    let theta = params.theta();
    theta * theta.exp()
}

pub fn variance<T: Scalar>(params: &BellParams<T>) -> T {
    let theta = params.theta();
    theta * (T::one() + theta) * theta.exp()
}

/// Variance-to-mean ratio, `1 + theta`.
pub fn dispersion_index<T: Scalar>(params: &BellParams<T>) -> T {
    T::one() + params.theta()
}

/// Above this compound rate the zero-truncated summands are collapsed.
const COMPOUND_RATE_LIMIT: f64 = 64.0;

/// Draws a Bell variate as a Poisson(`e^theta - 1`) sum of zero-truncated
/// Poisson(`theta`) variates.
///
/// Past [`COMPOUND_RATE_LIMIT`] the same compound law is drawn in O(1) as
/// Poisson(`theta * M`) with `M ~ Poisson(e^theta)`, which keeps near-cap
/// intensities from costing `e^theta` inner draws.
pub fn sample<T: Scalar, R: Rng + ?Sized>(params: &BellParams<T>, rng: &mut R) -> u64 {
    let theta = params.theta().to_f64_lossy();
    let rate = theta.exp_m1();
    if rate > COMPOUND_RATE_LIMIT {
        let m: f64 = Poisson::new(theta.exp())
            .expect("rate finite under the theta cap")
            .sample(rng);
        if m == 0.0 {
            return 0;
        }
        return Poisson::new(theta * m)
            .expect("rate finite under the theta cap")
            .sample(rng) as u64;
    }
    let n = Poisson::new(rate)
        .expect("rate positive and finite under the theta cap")
        .sample(rng) as u64;
    (0..n).map(|_| sample_zt_poisson(theta, rng)).sum()
}

/// Zero-truncated Poisson variate by sequential-search inversion from `k = 1`.
pub fn sample_zt_poisson<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> u64 {
    debug_assert!(theta > 0.0);
    let u: f64 = rng.random();
    let mut k = 1u64;
    let mut p = theta / theta.exp_m1();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= theta / k as f64;
        let next = cdf + p;
        if next == cdf {
            // remaining mass below f64 resolution
            break;
        }
        cdf = next;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_bell_numbers() {
        assert_eq!(log_bell_number(0), 0.0);
        assert_eq!(log_bell_number(1), 0.0);
        assert!((log_bell_number(5) - 52f64.ln()).abs() < 1e-14);
        assert!((log_bell_number(10) - 115975f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn triangle_prefix() {
        let b: Vec<u64> = bell_triangle(8)
            .iter()
            .map(|v| v.to_u64().unwrap())
            .collect();
        assert_eq!(b, vec![1, 1, 2, 5, 15, 52, 203, 877, 4140]);
    }

    #[test]
    fn table_extends_past_exact_limit() {
        let mut t = BellNumberTable::with_max_index(10);
        assert!(t.max_index() >= 10);
        t.extend_to(200);
        assert_eq!(t.max_index(), 200);
        for n in 2..200 {
            assert!(t.log_bell(n + 1).unwrap() > t.log_bell(n).unwrap());
        }
    }

    #[test]
    fn params_reject_bad_theta() {
        assert!(BellParams::new(0.0f64).is_err());
        assert!(BellParams::new(-1.0f64).is_err());
        assert!(BellParams::new(f64::NAN).is_err());
        assert!(matches!(
            BellParams::new(30.5f64),
            Err(Error::ThetaCapExceeded { .. })
        ));
        assert!(BellParams::new(30.0f64).is_ok());
    }

    #[test]
    fn log_pmf_closed_forms() {
        let p = BellParams::new(1.0f64).unwrap();
        assert!((log_pmf(0, &p) - (1.0 - 1f64.exp())).abs() < 1e-15);
        assert!((log_pmf(1, &p) - (1.0 - std::f64::consts::E)).abs() < 1e-15);
        let p = BellParams::new(0.3f64).unwrap();
        assert!((log_pmf(0, &p) - (1.0 - 0.3f64.exp())).abs() < 1e-15);
    }

    #[test]
    fn pgf_edges() {
        let p = BellParams::new(0.7f64).unwrap();
        assert_eq!(pgf(1.0, &p).unwrap(), 1.0);
        let p = BellParams::new(1.0f64).unwrap();
        assert!((pgf(0.0, &p).unwrap() - (1.0 - std::f64::consts::E).exp()).abs() < 1e-15);
        // exp(e^0.5 - e)
        assert!((pgf(0.5, &p).unwrap() - 0.343_159_282_974_262_3).abs() < 1e-14);
        assert!(pgf(1.01, &p).is_err());
        assert!(pgf(-1.5, &p).is_err());
    }

    #[test]
    fn moments() {
        let p = BellParams::new(1.0f64).unwrap();
        assert!((mean(&p) - std::f64::consts::E).abs() < 1e-15);
        assert!((variance(&p) - 2.0 * std::f64::consts::E).abs() < 1e-14);
        assert!((mean(&BellParams::new(0.5f64).unwrap()) - 0.824_360_635_350_064).abs() < 1e-14);
        let tiny = BellParams::new(1e-9f64).unwrap();
        assert!((dispersion_index(&tiny) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn zt_poisson_never_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for theta in [1e-6, 0.1, 1.0, 5.0, 30.0] {
            for _ in 0..2000 {
                assert!(sample_zt_poisson(theta, &mut rng) >= 1);
            }
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = BellParams::new(0.8f64).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100).map(|_| sample(&p, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }

    #[test]
    fn generic_over_f32() {
        let p = BellParams::new(0.5f32).unwrap();
        let total: f32 = (0..60).map(|z| pmf(z, &p)).sum();
        assert!((total - 1.0).abs() < 1e-5);
        assert!((mean(&p) - 0.824_360_6).abs() < 1e-6);
    }
}

//! Unconstrained minimizers used by the likelihood fits: BFGS with an Armijo
//! backtracking line search, and Nelder-Mead. Objectives return `None` for
//! points where they are undefined, which both methods treat as `+inf`.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimConfig<T> {
    pub max_iter: usize,
    /// Stop when the largest gradient component falls below this.
    pub grad_tol: T,
    /// Stop when the relative objective change over `stall_window` accepted
    /// iterations falls below this.
    pub rel_tol: T,
    pub stall_window: usize,
    pub simplex_max_iter: usize,
    pub simplex_tol: T,
}

impl<T: Scalar> Default for OptimConfig<T> {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: T::c(1e-6),
            rel_tol: T::c(1e-10),
            stall_window: 5,
            simplex_max_iter: 4000,
            simplex_tol: T::c(1e-12),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    RelativeChange,
    SimplexTolerance,
    LineSearchFailed,
    MaxIterations,
    InfeasibleStart,
}

impl StopReason {
    pub fn is_converged(&self) -> bool {
        matches!(
            self,
            StopReason::GradientTolerance
                | StopReason::RelativeChange
                | StopReason::SimplexTolerance
        )
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::GradientTolerance => "gradient-tolerance",
            StopReason::RelativeChange => "relative-change",
            StopReason::SimplexTolerance => "simplex-tolerance",
            StopReason::LineSearchFailed => "line-search-failed",
            StopReason::MaxIterations => "max-iterations",
            StopReason::InfeasibleStart => "infeasible-start",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimOutcome<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub reason: StopReason,
    /// Objective at every accepted iterate, starting with `x0`.
    pub trace: Vec<T>,
}

/// BFGS minimization of `f`, which returns value and gradient.
pub fn bfgs<T, F>(mut f: F, x0: &[T], config: &OptimConfig<T>) -> OptimOutcome<T>
where
    T: Scalar,
    F: FnMut(&[T]) -> Option<(T, Vec<T>)>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let Some((mut fx, mut g)) = f(&x).filter(|(v, g)| v.is_finite() && finite(g)) else {
        return OptimOutcome {
            x,
            value: T::infinity(),
            iterations: 0,
            reason: StopReason::InfeasibleStart,
            trace: Vec::new(),
        };
    };
    let mut trace = vec![fx];
    let mut h_inv = identity(n);
    let mut first_update = true;
    let c1 = T::c(1e-4);
    let half = T::c(0.5);

    for iter in 0..config.max_iter {
        if max_abs(&g) < config.grad_tol {
            return outcome(x, fx, iter, StopReason::GradientTolerance, trace);
        }
        let w = config.stall_window;
        if trace.len() > w {
            let old = trace[trace.len() - 1 - w];
            if (old - fx).abs() <= config.rel_tol * fx.abs().max(T::one()) {
                return outcome(x, fx, iter, StopReason::RelativeChange, trace);
            }
        }

        let mut dir: Vec<T> = mat_vec(&h_inv, &g).into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if !(slope < T::zero()) {
            // not a descent direction: reset to steepest descent
            h_inv = identity(n);
            dir = g.iter().map(|&v| -v).collect();
            slope = dot(&g, &dir);
        }

        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<T> = x
                .iter()
                .zip(&dir)
                .map(|(&xi, &di)| xi + step * di)
                .collect();
            if let Some((ft, gt)) = f(&trial) {
                if ft.is_finite() && finite(&gt) && ft <= fx + c1 * step * slope {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= half;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            return outcome(x, fx, iter, StopReason::LineSearchFailed, trace);
        };

        let s: Vec<T> = x_new.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<T> = g_new.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > T::c(1e-12) * norm(&s) * norm(&y) {
            if first_update {
                let scale = sy / dot(&y, &y);
                h_inv = identity(n);
                h_inv.iter_mut().for_each(|v| *v *= scale);
                first_update = false;
            }
            bfgs_update(&mut h_inv, &s, &y, sy);
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        trace.push(fx);
    }
    let reason = if max_abs(&g) < config.grad_tol {
        StopReason::GradientTolerance
    } else {
        StopReason::MaxIterations
    };
    outcome(x, fx, config.max_iter, reason, trace)
}

/// Nelder-Mead minimization starting from a simplex `x0 + step * e_i`.
pub fn nelder_mead<T, F>(mut f: F, x0: &[T], step: T, config: &OptimConfig<T>) -> OptimOutcome<T>
where
    T: Scalar,
    F: FnMut(&[T]) -> Option<T>,
{
    let n = x0.len();
    let mut eval = |x: &[T]| f(x).filter(|v| v.is_finite()).unwrap_or(T::infinity());
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    let f0 = eval(x0);
    if !f0.is_finite() {
        return outcome(x0.to_vec(), f0, 0, StopReason::InfeasibleStart, Vec::new());
    }
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        let fv = eval(&v);
        simplex.push((v, fv));
    }
    let by_value = |a: &(Vec<T>, T), b: &(Vec<T>, T)| {
        a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal)
    };
    simplex.sort_by(by_value);
    let mut trace = vec![simplex[0].1];
    let (two, half) = (T::c(2.0), T::c(0.5));

    for iter in 0..config.simplex_max_iter {
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread = (worst - best).abs();
        let size = simplex[1..]
            .iter()
            .map(|(v, _)| max_abs_diff(v, &simplex[0].0))
            .fold(T::zero(), T::max);
        if worst.is_finite()
            && spread <= config.simplex_tol * (best.abs() + config.simplex_tol)
            && size <= config.simplex_tol.sqrt()
        {
            return outcome(
                simplex[0].0.clone(),
                best,
                iter,
                StopReason::SimplexTolerance,
                trace,
            );
        }

        let nt = T::from_count(n as u64);
        let centroid: Vec<T> = (0..n)
            .map(|k| simplex[..n].iter().map(|(v, _)| v[k]).sum::<T>() / nt)
            .collect();
        let along = |coef: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(&c, &w)| c + coef * (c - w))
                .collect()
        };
        let xr = along(T::one());
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(two);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(half);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-half);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<T> = anchor
                        .iter()
                        .zip(&vertex.0)
                        .map(|(&a, &v)| a + half * (v - a))
                        .collect();
                    let fv = eval(&shrunk);
                    *vertex = (shrunk, fv);
                }
            }
        }
        simplex.sort_by(by_value);
        if simplex[0].1 < *trace.last().expect("seeded") {
            trace.push(simplex[0].1);
        }
    }
    let (x, v) = simplex.swap_remove(0);
    outcome(
        x,
        v,
        config.simplex_max_iter,
        StopReason::MaxIterations,
        trace,
    )
}

fn outcome<T>(
    x: Vec<T>,
    value: T,
    iterations: usize,
    reason: StopReason,
    trace: Vec<T>,
) -> OptimOutcome<T> {
    OptimOutcome {
        x,
        value,
        iterations,
        reason,
        trace,
    }
}

fn identity<T: Scalar>(n: usize) -> Vec<T> {
    let mut m = vec![T::zero(); n * n];
    for i in 0..n {
        m[i * n + i] = T::one();
    }
    m
}

fn mat_vec<T: Scalar>(m: &[T], v: &[T]) -> Vec<T> {
    let n = v.len();
    (0..n)
        .map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum())
        .collect()
}

/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`.
fn bfgs_update<T: Scalar>(h: &mut [T], s: &[T], y: &[T], sy: T) {
    let n = s.len();
    let rho = T::one() / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    let factor = (T::one() + rho * yhy) * rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += factor * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn max_abs<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

fn finite<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_finite())
}

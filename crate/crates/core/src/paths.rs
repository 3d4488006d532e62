//! Equilibrium states along rays `t -> psi + t phi`.
//!
//! For each `t >= 0` the equilibrium state `mu_t` of `psi + t phi` is unique,
//! and `t -> h_{mu_t} + int psi dmu_t` is continuous and non-increasing (it is
//! `p(t) - t p'(t)` for the convex pressure `p`). The solvers bracket a target
//! on a geometric grid and finish by bisection.

use rayon::prelude::*;
use serde::Serialize;

use crate::ergopt::{ground_state_pressure_bound, max_ergodic_average};
use crate::error::{Error, Result};
use crate::potentials::{combine, Potential};
use crate::sft::{topological_entropy, Sft};
use crate::transfer::{integrate, pressure, pressure_and_equilibrium, MarkovMeasure};

/// Default solver tolerance on the target value.
pub const SOLVER_TOLERANCE: f64 = 1e-8;
/// First positive point of the bracketing grid.
pub const SCAN_START: f64 = 0.125;
/// The grid is `{0} u {SCAN_START * 2^j : 0 <= j <= SCAN_DOUBLINGS}`.
pub const SCAN_DOUBLINGS: u32 = 20;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSample {
    pub t: f64,
    /// `P(psi + t phi)`
    pub pressure: f64,
    /// `h_{mu_t}`
    pub entropy: f64,
    /// `int phi dmu_t`
    pub phi_avg: f64,
    /// `h_{mu_t} + int psi dmu_t`
    pub psi_pressure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub target: f64,
    pub t_found: f64,
    pub achieved: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub trace: Vec<PathSample>,
}

fn sample_with_measure(sft: &Sft, psi: &Potential, phi: &Potential, t: f64) -> Result<(PathSample, MarkovMeasure)> {
    let (p, mu) = pressure_and_equilibrium(sft, &combine(psi, phi, t)?)?;
    let phi_avg = integrate(&mu, phi)?;
    let psi_avg = integrate(&mu, psi)?;
    let sample = PathSample {
        t,
        pressure: p.value,
        entropy: mu.entropy(),
        phi_avg,
        psi_pressure: mu.entropy() + psi_avg,
    };
    Ok((sample, mu))
}

/// The equilibrium data of `psi + t phi` at a single `t`.
pub fn sample(sft: &Sft, psi: &Potential, phi: &Potential, t: f64) -> Result<PathSample> {
    sample_with_measure(sft, psi, phi, t).map(|(s, _)| s)
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidGrid("grid values must be finite and nonnegative".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// One [`PathSample`] per grid point, in grid order. Samples are computed in
/// parallel; the result does not depend on scheduling.
pub fn sweep(sft: &Sft, psi: &Potential, phi: &Potential, t_grid: &[f64]) -> Result<Vec<PathSample>> {
    psi.ensure_on(sft)?;
    phi.ensure_on(sft)?;
    check_grid(t_grid)?;
    t_grid.par_iter().map(|&t| sample(sft, psi, phi, t)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub samples: usize,
    /// Largest increase of entropy between consecutive samples (0 if none).
    pub max_increase: f64,
}

/// Checks that entropy does not increase along a sweep (slack `1e-9`).
pub fn entropy_monotonicity_check(samples: &[PathSample]) -> Result<MonotonicityReport> {
    let mut max_increase: f64 = 0.0;
    for (index, w) in samples.windows(2).enumerate() {
        let increase = w[1].entropy - w[0].entropy;
        if increase > 1e-9 {
            return Err(Error::MonotonicityViolated {
                index: index + 1,
                previous: w[0].entropy,
                current: w[1].entropy,
            });
        }
        max_increase = max_increase.max(increase);
    }
    Ok(MonotonicityReport {
        samples: samples.len(),
        max_increase,
    })
}

/// Finds `t` with `value(t)` within `tolerance` of `target`, for a
/// non-increasing `value` with `value(0) > target`.
///
/// Returns `Ok(Err(last))` when the scan ends above the target, carrying the
/// final scan sample.
fn bracket_and_bisect<F>(
    target: f64,
    tolerance: f64,
    start: PathSample,
    mut evaluate: F,
    value: fn(&PathSample) -> f64,
) -> Result<std::result::Result<SolveReport, (PathSample, Vec<PathSample>)>>
where
    F: FnMut(f64) -> Result<PathSample>,
{
    let mut trace = vec![start];
    let mut lo = start;
    let mut hi = None;
    for j in 0..=SCAN_DOUBLINGS {
        let s = evaluate(SCAN_START * f64::from(2u32.pow(j)))?;
        trace.push(s);
        if (value(&s) - target).abs() <= tolerance {
            return Ok(Ok(finish(target, s, (lo.t, s.t), 0, trace, value)));
        }
        if value(&s) < target {
            hi = Some(s);
            break;
        }
        lo = s;
    }
    let Some(mut hi) = hi else {
        return Ok(Err((lo, trace)));
    };
    let mut used = MAX_BISECTIONS;
    for iteration in 1..=MAX_BISECTIONS {
        let mid = 0.5 * (lo.t + hi.t);
        let s = evaluate(mid)?;
        trace.push(s);
        if (value(&s) - target).abs() <= tolerance {
            return Ok(Ok(finish(target, s, (lo.t, hi.t), iteration, trace, value)));
        }
        if value(&s) > target {
            lo = s;
        } else {
            hi = s;
        }
        if hi.t - lo.t <= f64::EPSILON * hi.t {
            // The curve steps over the target between neighbouring floats,
            // as at a ground-state switch where the crossover is narrower
            // than one ulp of t.
            return Err(Error::Discontinuity {
                target,
                t: lo.t,
                below: value(&hi),
                above: value(&lo),
            });
        }
        used = iteration;
    }
    let best = if (value(&lo) - target).abs() <= (value(&hi) - target).abs() { lo } else { hi };
    Err(Error::NoConvergence {
        iterations: used,
        defect: (value(&best) - target).abs(),
    })
}

fn finish(
    target: f64,
    s: PathSample,
    bracket: (f64, f64),
    iterations: usize,
    trace: Vec<PathSample>,
    value: fn(&PathSample) -> f64,
) -> SolveReport {
    SolveReport {
        target,
        t_found: s.t,
        achieved: value(&s),
        residual: (value(&s) - target).abs(),
        bracket,
        iterations,
        trace,
    }
}

/// Finds `t >= 0` whose equilibrium state for `t phi` has entropy `a`.
pub fn solve_intermediate_entropy(sft: &Sft, phi: &Potential, a: f64) -> Result<SolveReport> {
    solve_intermediate_entropy_with_tolerance(sft, phi, a, SOLVER_TOLERANCE)
}

pub fn solve_intermediate_entropy_with_tolerance(
    sft: &Sft,
    phi: &Potential,
    a: f64,
    tolerance: f64,
) -> Result<SolveReport> {
    phi.ensure_on(sft)?;
    let h_top = topological_entropy(sft);
    if !a.is_finite() || a < 0.0 || a > h_top + tolerance {
        return Err(Error::TargetOutOfRange { target: a, lo: 0.0, hi: h_top });
    }
    let zero = Potential::zero(sft);
    let evaluate = |t: f64| sample(sft, &zero, phi, t);
    let start = evaluate(0.0)?;
    if (start.entropy - a).abs() <= tolerance {
        return Ok(finish(a, start, (0.0, 0.0), 0, vec![start], |s| s.entropy));
    }
    let ground = max_ergodic_average(sft, phi)?;
    if a <= ground.ground_entropy {
        return Err(Error::AsymptoteUnreachable {
            target: a,
            closest: ground.ground_entropy,
            t_max: f64::INFINITY,
        });
    }
    match bracket_and_bisect(a, tolerance, start, evaluate, |s| s.entropy)? {
        Ok(report) => Ok(report),
        Err((last, _)) if ground.unique_flag => Err(Error::AsymptoteUnreachable {
            target: a,
            closest: last.entropy,
            t_max: last.t,
        }),
        Err((last, _)) => Err(Error::NonUniqueGroundState {
            target: a,
            lowest: last.entropy,
        }),
    }
}

/// Finds `t >= 0` whose equilibrium state `mu_t` for `psi + t phi` has
/// `h_{mu_t} + int psi dmu_t = target`.
pub fn solve_intermediate_pressure(sft: &Sft, psi: &Potential, phi: &Potential, target: f64) -> Result<SolveReport> {
    solve_intermediate_pressure_with_tolerance(sft, psi, phi, target, SOLVER_TOLERANCE)
}

/// The bracketing grid of the pressure solver, evaluated in full.
pub fn pressure_scan(sft: &Sft, psi: &Potential, phi: &Potential) -> Result<Vec<PathSample>> {
    let mut grid = vec![0.0];
    grid.extend((0..=SCAN_DOUBLINGS).map(|j| SCAN_START * f64::from(2u32.pow(j))));
    sweep(sft, psi, phi, &grid)
}

pub fn solve_intermediate_pressure_with_tolerance(
    sft: &Sft,
    psi: &Potential,
    phi: &Potential,
    target: f64,
    tolerance: f64,
) -> Result<SolveReport> {
    psi.ensure_on(sft)?;
    phi.ensure_on(sft)?;
    let top = pressure(sft, psi)?.value;
    let alpha = ground_state_pressure_bound(sft, psi, phi)?;
    if !target.is_finite() || target > top + tolerance || target < alpha - tolerance {
        return Err(Error::TargetOutOfRange { target, lo: alpha, hi: top });
    }
    let evaluate = |t: f64| sample(sft, psi, phi, t);
    let start = evaluate(0.0)?;
    if (start.psi_pressure - target).abs() <= tolerance {
        return Ok(finish(target, start, (0.0, 0.0), 0, vec![start], |s| s.psi_pressure));
    }
    if target <= alpha {
        let scan = pressure_scan(sft, psi, phi)?;
        let last = scan.last().expect("scan is nonempty");
        return Err(Error::AsymptoteUnreachable {
            target,
            closest: last.psi_pressure,
            t_max: last.t,
        });
    }
    match bracket_and_bisect(target, tolerance, start, evaluate, |s| s.psi_pressure)? {
        Ok(report) => Ok(report),
        Err((last, _)) => Err(Error::AsymptoteUnreachable {
            target,
            closest: last.psi_pressure,
            t_max: last.t,
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityRow {
    pub n: u64,
    /// `max |P_n - P|` over kernel entries.
    pub kernel_distance: f64,
    /// `max |pi_n - pi|`.
    pub stationary_distance: f64,
    /// `|h_{mu_n} + int phi_n dmu_n - P(phi_n)|`.
    pub variational_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub rows: Vec<ContinuityRow>,
    /// Distances non-increasing in `n`.
    pub monotone: bool,
    /// Both distances at `n_max` are at most [`CONTINUITY_TOLERANCE`].
    pub converged: bool,
    /// Every variational defect is at most `1e-9`.
    pub equilibrium: bool,
}

pub const CONTINUITY_TOLERANCE: f64 = 1e-8;

fn max_distance<'a, I: IntoIterator<Item = (&'a f64, &'a f64)>>(pairs: I) -> f64 {
    pairs.into_iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Equilibrium states of `phi + eta / n` against the equilibrium state of
/// `phi`, for `n` in `1, 10, 100, ...` up to and including `n_max`.
pub fn equilibrium_continuity_check(sft: &Sft, phi: &Potential, eta: &Potential, n_max: u64) -> Result<ContinuityReport> {
    phi.ensure_on(sft)?;
    eta.ensure_on(sft)?;
    if n_max < 2 {
        return Err(Error::InvalidGrid("n_max must be at least 2".into()));
    }
    let mut schedule = Vec::new();
    let mut n = 1u64;
    while n < n_max {
        schedule.push(n);
        n = n.saturating_mul(10);
    }
    schedule.push(n_max);

    let order = phi.memory().max(eta.memory()).max(2) - 1;
    let limit = crate::transfer::equilibrium_state(sft, phi)?.lift(order)?;
    let mut rows = Vec::with_capacity(schedule.len());
    for n in schedule {
        let phi_n = combine(phi, eta, 1.0 / n as f64)?;
        let (p, mu) = pressure_and_equilibrium(sft, &phi_n)?;
        let mu = mu.lift(order)?;
        let variational_defect = (mu.entropy() + integrate(&mu, &phi_n)? - p.value).abs();
        rows.push(ContinuityRow {
            n,
            kernel_distance: max_distance(mu.kernel().iter().flatten().zip(limit.kernel().iter().flatten())),
            stationary_distance: max_distance(mu.stationary().iter().zip(limit.stationary())),
            variational_defect,
        });
    }
    let monotone = rows.windows(2).all(|w| {
        w[1].kernel_distance <= w[0].kernel_distance && w[1].stationary_distance <= w[0].stationary_distance
    });
    let last = rows.last().expect("schedule is nonempty");
    let converged = last.kernel_distance <= CONTINUITY_TOLERANCE && last.stationary_distance <= CONTINUITY_TOLERANCE;
    let equilibrium = rows.iter().all(|r| r.variational_defect <= 1e-9);
    Ok(ContinuityReport {
        rows,
        monotone,
        converged,
        equilibrium,
    })
}

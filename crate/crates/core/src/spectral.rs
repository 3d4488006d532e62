//! Perron eigenproblems for nonnegative matrices given by their logarithms.
//!
//! A matrix `M` with `M_ij = exp(w_ij)` on the edges of a directed graph and
//! zero elsewhere is represented by the edge list. Vectors are stored as logs
//! and every product is a log-sum-exp reduction, so weights of size `10^4`
//! (the zero-temperature regime) neither overflow nor underflow.

use crate::ergopt::max_cycle_mean;
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-13;
pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;

/// Iterations without improvement after which a defect at the rounding floor
/// is accepted.
const STALL_WINDOW: usize = 64;

/// Plain iterations before switching to repeated squaring.
const WARM_START_AFTER: usize = 2048;
const MAX_SQUARINGS: usize = 64;

#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    out: Vec<Vec<(usize, f64)>>,
    inc: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        WeightedGraph {
            n,
            out: vec![Vec::new(); n],
            inc: vec![Vec::new(); n],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, log_weight: f64) {
        self.out[from].push((to, log_weight));
        self.inc[to].push((from, log_weight));
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    fn max_abs_weight(&self) -> f64 {
        self.out
            .iter()
            .flatten()
            .map(|&(_, w)| w.abs())
            .fold(0.0, f64::max)
    }
}

/// Perron data in log domain.
#[derive(Debug, Clone)]
pub struct PerronSolution {
    pub log_eigenvalue: f64,
    /// `ln l` with `l M = lambda l`, normalized so the maximum entry is 0.
    pub left: Vec<f64>,
    /// `ln r` with `M r = lambda r`, normalized so the maximum entry is 0.
    pub right: Vec<f64>,
    /// Collatz-Wielandt gap `max_i ln((Mr)_i / r_i) - min_i ln((Mr)_i / r_i)`,
    /// the larger of the left and right gaps.
    pub defect: f64,
    pub iterations: usize,
}

pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + values.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln((Mv)_i) - v_i` for every row, without allocating.
fn row_ratios(adjacency: &[Vec<(usize, f64)>], v: &[f64], ratios: &mut [f64]) {
    for (i, row) in adjacency.iter().enumerate() {
        let mut max = f64::NEG_INFINITY;
        for &(j, w) in row {
            max = max.max((w - v[i]) + v[j]);
        }
        let mut sum = 0.0;
        for &(j, w) in row {
            sum += (((w - v[i]) + v[j]) - max).exp();
        }
        ratios[i] = max + sum.ln();
    }
}

fn collatz_wielandt_gap(adjacency: &[Vec<(usize, f64)>], v: &[f64], ratios: &mut [f64]) -> f64 {
    row_ratios(adjacency, v, ratios);
    let lower = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    upper - lower
}

/// Applies `(M + e^shift I)^(2^k)` to `v` for the first `k` that brings the
/// gap under `tolerance`, building the powers by log-domain squaring. This
/// covers transients of length proportional to the weights, which arise when
/// entries of the Perron vector differ by factors like `e^-t`.
fn accelerate(adjacency: &[Vec<(usize, f64)>], shift: f64, v: &mut [f64], tolerance: f64) {
    let n = adjacency.len();
    let mut power = vec![vec![f64::NEG_INFINITY; n]; n];
    for (i, row) in adjacency.iter().enumerate() {
        for &(j, w) in row {
            power[i][j] = log_add_exp(power[i][j], w);
        }
        power[i][i] = log_add_exp(power[i][i], shift);
    }
    let mut ratios = vec![0.0; n];
    let mut candidate = vec![0.0; n];
    for _ in 0..MAX_SQUARINGS {
        let mut squared = vec![vec![f64::NEG_INFINITY; n]; n];
        for (i, out) in squared.iter_mut().enumerate() {
            for (j, cell) in out.iter_mut().enumerate() {
                *cell = log_sum_exp((0..n).map(|k| power[i][k] + power[k][j]));
            }
        }
        let top = squared.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        for x in squared.iter_mut().flatten() {
            *x -= top;
        }
        power = squared;
        for (i, c) in candidate.iter_mut().enumerate() {
            *c = log_sum_exp((0..n).map(|j| power[i][j] + v[j]));
        }
        let top = candidate.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return;
        }
        for c in candidate.iter_mut() {
            *c -= top;
        }
        if collatz_wielandt_gap(adjacency, &candidate, &mut ratios) <= tolerance {
            break;
        }
    }
    if candidate.iter().all(|c| c.is_finite()) {
        v.copy_from_slice(&candidate);
    }
}

struct Iterate {
    vector: Vec<f64>,
    lower: f64,
    upper: f64,
    iterations: usize,
}

/// Power iteration on `M + e^shift I`, which has the Perron vector of `M`
/// but damps the other peripheral eigenvalues of a (nearly) periodic `M`.
/// The stopping test uses the Collatz-Wielandt ratios of `M` itself.
fn power_iterate(
    adjacency: &[Vec<(usize, f64)>],
    shift: f64,
    weight_scale: f64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Iterate> {
    let n = adjacency.len();
    // Rounding in one log-sum-exp row grows with the row length and with the
    // magnitude of the summands.
    let fan = adjacency.iter().map(Vec::len).max().unwrap_or(1) as f64;
    let mut v = vec![0.0; n];
    let mut ratios = vec![0.0; n];
    let mut best = f64::INFINITY;
    let mut since_best = 0usize;
    for iteration in 1..=max_iterations {
        row_ratios(adjacency, &v, &mut ratios);
        let lower = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let defect = upper - lower;
        let v_scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let floor = 32.0 * fan * f64::EPSILON * (1.0 + weight_scale + 2.0 * v_scale + upper.abs());
        if defect <= tolerance || (since_best >= STALL_WINDOW && defect <= floor) {
            return Ok(Iterate {
                vector: v,
                lower,
                upper,
                iterations: iteration,
            });
        }
        if !defect.is_finite() || iteration == max_iterations {
            return Err(Error::NoConvergence {
                iterations: iteration,
                defect,
            });
        }
        if iteration == WARM_START_AFTER {
            accelerate(adjacency, shift, &mut v, tolerance);
            continue;
        }
        if defect < best * (1.0 - 1e-3) {
            best = defect;
            since_best = 0;
        } else {
            since_best += 1;
        }
        let mut top = f64::NEG_INFINITY;
        for (x, &r) in v.iter_mut().zip(&ratios) {
            *x += log_add_exp(r, shift);
            top = top.max(*x);
        }
        for x in v.iter_mut() {
            *x -= top;
        }
    }
    Err(Error::NoConvergence {
        iterations: 0,
        defect: f64::INFINITY,
    })
}

/// Perron root and vectors of an irreducible nonnegative matrix.
pub fn perron(graph: &WeightedGraph, tolerance: f64, max_iterations: usize) -> Result<PerronSolution> {
    let scale = graph.max_abs_weight();
    let edges: Vec<(usize, usize, f64)> = graph
        .out
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().map(move |&(j, w)| (i, j, w)))
        .collect();
    // The heaviest cycle mean is a lower bound for the log radius, so the
    // shifted matrix keeps a spectral gap even when M is periodic.
    let shift = max_cycle_mean(graph.n, &edges).ok_or(Error::NoConvergence {
        iterations: 0,
        defect: f64::INFINITY,
    })?;
    let right = power_iterate(&graph.out, shift, scale, tolerance, max_iterations)?;
    let left = power_iterate(&graph.inc, shift, scale, tolerance, max_iterations)?;
    Ok(PerronSolution {
        log_eigenvalue: 0.5 * (right.lower + right.upper),
        defect: (right.upper - right.lower).max(left.upper - left.lower),
        iterations: right.iterations + left.iterations,
        left: left.vector,
        right: right.vector,
    })
}

/// `ln` of the spectral radius of an irreducible (possibly periodic) matrix.
pub fn irreducible_log_radius(graph: &WeightedGraph) -> Result<f64> {
    Ok(perron(graph, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS)?.log_eigenvalue)
}

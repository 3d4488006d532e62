//! Topological pressure and equilibrium states through the transfer operator.
//!
//! For a potential of memory `k` the transfer operator restricted to
//! functions of the first `m - 1` symbols (`m = max(k, 2)`) is the matrix
//! `M_ij = exp(phi(ij))` on the edge graph. Pressure is `ln` of its Perron
//! root and the equilibrium state is the Markov measure
//! `P_ij = M_ij r_j / (lambda r_i)`, `pi_i ~ l_i r_i`.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::edges::EdgeGraph;
use crate::error::{Error, Result};
use crate::potentials::{combine, sup_norm, Potential};
use crate::sft::{admissible_blocks, block_index, topological_entropy, Block, Sft};
use crate::spectral::{self, log_sum_exp, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};

/// Tolerance for the stochasticity and invariance checks on measures.
pub const MEASURE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureResult {
    pub value: f64,
    /// Log of the left Perron vector on the edge graph's vertices.
    pub left_vector: Vec<f64>,
    /// Log of the right Perron vector.
    pub right_vector: Vec<f64>,
    /// Collatz-Wielandt gap of the final iterate, in log domain.
    pub residual: f64,
    pub iterations: usize,
}

/// A shift-invariant Markov measure whose states are admissible
/// `order`-blocks. Log forms are kept alongside the probabilities so that
/// transition probabilities far below the `f64` range are not lost.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMeasure {
    sft: Sft,
    order: usize,
    states: Vec<Block>,
    log_stationary: Vec<f64>,
    stationary: Vec<f64>,
    log_kernel: Vec<Vec<f64>>,
    kernel: Vec<Vec<f64>>,
    entropy: f64,
}

/// Transitions between `order`-blocks that correspond to admissible
/// `(order+1)`-blocks.
fn overlap_transitions(states: &[Block]) -> Vec<Vec<bool>> {
    states
        .iter()
        .map(|b| {
            states
                .iter()
                .map(|c| b.symbols()[1..] == c.symbols()[..c.len() - 1])
                .collect()
        })
        .collect()
}

fn admissible_transitions(sft: &Sft, states: &[Block]) -> Vec<Vec<bool>> {
    let mut allowed = overlap_transitions(states);
    for (b, row) in states.iter().zip(allowed.iter_mut()) {
        let last = *b.symbols().last().expect("order >= 1");
        for (c, cell) in states.iter().zip(row.iter_mut()) {
            *cell &= sft.allows(last, *c.symbols().last().expect("order >= 1"));
        }
    }
    allowed
}

impl MarkovMeasure {
    fn from_logs(
        sft: &Sft,
        states: Vec<Block>,
        log_stationary: Vec<f64>,
        log_kernel: Vec<Vec<f64>>,
    ) -> MarkovMeasure {
        let stationary: Vec<f64> = log_stationary.iter().map(|v| v.exp()).collect();
        let kernel: Vec<Vec<f64>> = log_kernel
            .iter()
            .map(|row| row.iter().map(|v| v.exp()).collect())
            .collect();
        let mut entropy = 0.0;
        for (i, row) in log_kernel.iter().enumerate() {
            for &lp in row {
                if lp.is_finite() && lp < 0.0 {
                    entropy -= (log_stationary[i] + lp).exp() * lp;
                }
            }
        }
        MarkovMeasure {
            sft: sft.clone(),
            order: states[0].len(),
            states,
            log_stationary,
            stationary,
            log_kernel,
            kernel,
            entropy,
        }
    }

    /// Builds a measure from explicit probabilities and checks every
    /// invariant (see [`MarkovMeasure::validate`]).
    pub fn from_parts(
        sft: &Sft,
        order: usize,
        stationary: Vec<f64>,
        kernel: Vec<Vec<f64>>,
    ) -> Result<MarkovMeasure> {
        let states = admissible_blocks(sft, order)?;
        let n = states.len();
        if stationary.len() != n || kernel.len() != n || kernel.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMeasure(format!(
                "expected {n} states at order {order}"
            )));
        }
        if stationary.iter().chain(kernel.iter().flatten()).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidMeasure(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let log_stationary = stationary.iter().map(|v| v.ln()).collect();
        let log_kernel = kernel
            .iter()
            .map(|row| row.iter().map(|v| v.ln()).collect())
            .collect();
        let mut measure = MarkovMeasure::from_logs(sft, states, log_stationary, log_kernel);
        // Keep the caller's probabilities bit for bit rather than exp(ln(x)).
        measure.stationary = stationary;
        measure.kernel = kernel;
        measure.validate()?;
        Ok(measure)
    }

    /// Builds the measure of an irreducible row-stochastic kernel, solving for
    /// its stationary vector.
    pub fn from_kernel(sft: &Sft, order: usize, kernel: Vec<Vec<f64>>) -> Result<MarkovMeasure> {
        let n = kernel.len();
        if n == 0 || kernel.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMeasure("kernel must be square".into()));
        }
        let log_kernel: Vec<Vec<f64>> = kernel.iter().map(|row| row.iter().map(|v| v.ln()).collect()).collect();
        let stationary = log_stationary(&log_kernel)
            .ok_or_else(|| Error::InvalidMeasure("kernel is not irreducible".into()))?
            .into_iter()
            .map(f64::exp)
            .collect();
        MarkovMeasure::from_parts(sft, order, stationary, kernel)
    }

    /// Checks normalization, stochasticity, admissible support, invariance
    /// and the entropy bounds.
    pub fn validate(&self) -> Result<()> {
        let n = self.states.len();
        let total: f64 = self.stationary.iter().sum();
        if (total - 1.0).abs() > MEASURE_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("stationary vector sums to {total}")));
        }
        let allowed = admissible_transitions(&self.sft, &self.states);
        for i in 0..n {
            let row_sum: f64 = self.kernel[i].iter().sum();
            if (row_sum - 1.0).abs() > MEASURE_TOLERANCE {
                return Err(Error::InvalidMeasure(format!(
                    "kernel row {} sums to {row_sum}",
                    self.states[i]
                )));
            }
            for j in 0..n {
                if !allowed[i][j] && self.kernel[i][j] > 0.0 {
                    return Err(Error::InvalidMeasure(format!(
                        "kernel charges the inadmissible transition {} -> {}",
                        self.states[i], self.states[j]
                    )));
                }
            }
        }
        for j in 0..n {
            let mass: f64 = (0..n).map(|i| self.stationary[i] * self.kernel[i][j]).sum();
            if (mass - self.stationary[j]).abs() > MEASURE_TOLERANCE {
                return Err(Error::InvalidMeasure(format!(
                    "stationary vector is not invariant at state {}",
                    self.states[j]
                )));
            }
        }
        let h_top = topological_entropy(&self.sft);
        if self.entropy < -MEASURE_TOLERANCE || self.entropy > h_top + 1e-9 {
            return Err(Error::InvalidMeasure(format!(
                "entropy {} outside [0, {h_top}]",
                self.entropy
            )));
        }
        Ok(())
    }

    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn states(&self) -> &[Block] {
        &self.states
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn log_stationary(&self) -> &[f64] {
        &self.log_stationary
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    pub fn log_kernel(&self) -> &[Vec<f64>] {
        &self.log_kernel
    }

    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    /// The same measure with states at a higher block order.
    pub fn lift(&self, order: usize) -> Result<MarkovMeasure> {
        if order < self.order {
            return Err(Error::InvalidMeasure(format!(
                "cannot lower order from {} to {order}",
                self.order
            )));
        }
        if order == self.order {
            return Ok(self.clone());
        }
        let k = self.order;
        let states = admissible_blocks(&self.sft, order)?;
        let index = |w: &[usize]| block_index(&self.states, w).expect("admissible sub-block");
        let log_step = |w: &[usize]| self.log_kernel[index(&w[..k])][index(&w[1..])];
        let log_stationary = states
            .iter()
            .map(|b| {
                let s = b.symbols();
                self.log_stationary[index(&s[..k])]
                    + (0..order - k).map(|i| log_step(&s[i..i + k + 1])).sum::<f64>()
            })
            .collect();
        let overlaps = overlap_transitions(&states);
        let log_kernel = states
            .iter()
            .enumerate()
            .map(|(i, b)| {
                states
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        if overlaps[i][j] && self.sft.allows(*b.symbols().last().unwrap(), *c.symbols().last().unwrap()) {
                            let mut w = b.symbols()[order - k..].to_vec();
                            w.push(*c.symbols().last().unwrap());
                            log_step(&w)
                        } else {
                            f64::NEG_INFINITY
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(MarkovMeasure::from_logs(&self.sft, states, log_stationary, log_kernel))
    }

    /// True when the transitions charged by the measure form a strongly
    /// connected graph on the charged states, so the measure is ergodic.
    pub fn support_is_strongly_connected(&self) -> bool {
        let charged: Vec<usize> = (0..self.states.len())
            .filter(|&i| self.log_stationary[i].is_finite())
            .collect();
        let mut graph = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = charged.iter().map(|_| graph.add_node(())).collect();
        for (a, &i) in charged.iter().enumerate() {
            for (b, &j) in charged.iter().enumerate() {
                if self.log_kernel[i][j].is_finite() {
                    graph.add_edge(nodes[a], nodes[b], ());
                }
            }
        }
        !charged.is_empty() && tarjan_scc(&graph).len() == 1
    }
}

/// `(pressure, equilibrium state)` from a single Perron solve.
/// Stationary vector of an irreducible kernel given by its logs, by
/// Grassmann-Taksar-Heyman state reduction. The reduction never subtracts,
/// so every component keeps full relative accuracy even when the chain is
/// nearly reducible and some probabilities are like `e^-10000`.
fn log_stationary(log_kernel: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n = log_kernel.len();
    let mut a = log_kernel.to_vec();
    let mut exits = vec![0.0; n];
    for k in (1..n).rev() {
        let s = log_sum_exp(a[k][..k].iter().copied());
        if s == f64::NEG_INFINITY {
            return None;
        }
        exits[k] = s;
        let (upper, lower) = a.split_at_mut(k);
        let row_k = &lower[0];
        for row in upper.iter_mut() {
            let through = row[k];
            if through == f64::NEG_INFINITY {
                continue;
            }
            for j in 0..k {
                let add = through + row_k[j] - s;
                let cur = row[j];
                if add == f64::NEG_INFINITY {
                    continue;
                }
                row[j] = if cur >= add {
                    cur + (add - cur).exp().ln_1p()
                } else {
                    add + (cur - add).exp().ln_1p()
                };
            }
        }
    }
    let mut log_pi = vec![0.0; n];
    for k in 1..n {
        log_pi[k] = log_sum_exp((0..k).map(|i| log_pi[i] + a[i][k])) - exits[k];
    }
    normalize_log(&mut log_pi);
    Some(log_pi)
}

/// Scales log-probabilities to total mass 1. Subtracting the maximum first
/// is exact for the dominant entries, which keeps the linear sum within a
/// few ulp of 1 even when the raw logs are of size `10^4`.
fn normalize_log(values: &mut [f64]) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for v in values.iter_mut() {
        *v -= max;
    }
    let norm = values.iter().map(|v| v.exp()).sum::<f64>().ln();
    for v in values.iter_mut() {
        *v -= norm;
    }
}

pub fn pressure_and_equilibrium(sft: &Sft, phi: &Potential) -> Result<(PressureResult, MarkovMeasure)> {
    phi.ensure_on(sft)?;
    let graph = EdgeGraph::for_potential(sft, phi, phi.memory())?;
    let sol = spectral::perron(&graph.weighted(), DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS)?;
    let n = graph.states.len();
    let mut log_kernel = vec![vec![f64::NEG_INFINITY; n]; n];
    for e in &graph.edges {
        log_kernel[e.from][e.to] =
            (e.weight - sol.right[e.from]) + sol.right[e.to] - sol.log_eigenvalue;
    }
    for row in log_kernel.iter_mut() {
        normalize_log(row);
    }
    let log_pi = log_stationary(&log_kernel).ok_or(Error::NoConvergence {
        iterations: sol.iterations,
        defect: sol.defect,
    })?;
    let measure = MarkovMeasure::from_logs(sft, graph.states, log_pi, log_kernel);
    let result = PressureResult {
        value: sol.log_eigenvalue,
        left_vector: sol.left,
        right_vector: sol.right,
        residual: sol.defect,
        iterations: sol.iterations,
    };
    Ok((result, measure))
}

/// `P(phi) = ln` of the Perron root of the weighted transition matrix.
pub fn pressure(sft: &Sft, phi: &Potential) -> Result<PressureResult> {
    pressure_and_equilibrium(sft, phi).map(|(p, _)| p)
}

/// The unique equilibrium state of `phi`, a Markov measure on
/// `max(memory - 1, 1)`-blocks.
pub fn equilibrium_state(sft: &Sft, phi: &Potential) -> Result<MarkovMeasure> {
    pressure_and_equilibrium(sft, phi).map(|(_, m)| m)
}

/// `-sum_i pi_i sum_j P_ij ln P_ij`, with `0 ln 0 = 0`.
pub fn measure_entropy(mu: &MarkovMeasure) -> f64 {
    mu.entropy
}

/// Edge frequencies `pi_i P_ij` in log domain, paired with the
/// `(order+1)`-block each edge spells.
pub(crate) fn log_edge_masses(mu: &MarkovMeasure) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    for (i, b) in mu.states.iter().enumerate() {
        for (j, c) in mu.states.iter().enumerate() {
            let lp = mu.log_kernel[i][j];
            if lp.is_finite() && mu.log_stationary[i].is_finite() {
                let mut w = b.symbols().to_vec();
                w.push(*c.symbols().last().expect("order >= 1"));
                out.push((w, mu.log_stationary[i] + lp));
            }
        }
    }
    out
}

/// `int phi dmu`. The measure is lifted first when `phi` has memory above
/// `order + 1`.
pub fn integrate(mu: &MarkovMeasure, phi: &Potential) -> Result<f64> {
    phi.ensure_on(&mu.sft)?;
    let lifted;
    let mu = if phi.memory() > mu.order + 1 {
        lifted = mu.lift(phi.memory() - 1)?;
        &lifted
    } else {
        mu
    };
    Ok(log_edge_masses(mu)
        .into_iter()
        .map(|(w, lm)| lm.exp() * phi.eval(&w).expect("admissible edge"))
        .sum())
}

/// `h_mu + int phi dmu`.
pub fn measure_pressure(mu: &MarkovMeasure, phi: &Potential) -> Result<f64> {
    Ok(mu.entropy + integrate(mu, phi)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    /// `|P(phi) - P(psi)|`
    pub pressure_gap: f64,
    /// `||phi - psi||_inf`
    pub sup_distance: f64,
    pub holds: bool,
}

/// Compares `|P(phi) - P(psi)|` against `||phi - psi||` (slack `1e-12`).
pub fn lipschitz_check(sft: &Sft, phi: &Potential, psi: &Potential) -> Result<LipschitzReport> {
    phi.ensure_on(sft)?;
    psi.ensure_on(sft)?;
    let pressure_gap = (pressure(sft, phi)?.value - pressure(sft, psi)?.value).abs();
    let sup_distance = sup_norm(&combine(phi, psi, -1.0)?);
    Ok(LipschitzReport {
        pressure_gap,
        sup_distance,
        holds: pressure_gap <= sup_distance + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::fixed_point_potential;

    fn full2() -> Sft {
        Sft::full_shift(2).unwrap()
    }

    fn bernoulli(sft: &Sft, p0: f64) -> MarkovMeasure {
        MarkovMeasure::from_kernel(sft, 1, vec![vec![p0, 1.0 - p0], vec![p0, 1.0 - p0]]).unwrap()
    }

    #[test]
    fn pressure_examples() {
        let sft = full2();
        let zero = pressure(&sft, &Potential::zero(&sft)).unwrap();
        assert!((zero.value - 2f64.ln()).abs() < 1e-13);
        assert!(zero.residual <= 1e-12);
        for c in [-2.0, 0.5, 3.0] {
            let phi = Potential::new(&sft, 1, vec![0.0, c]).unwrap();
            let p = pressure(&sft, &phi).unwrap().value;
            assert!((p - (1.0 + f64::exp(c)).ln()).abs() < 1e-12, "c = {c}");
        }
        let golden = Sft::golden_mean();
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((pressure(&golden, &Potential::zero(&golden)).unwrap().value - g.ln()).abs() < 1e-13);
    }

    #[test]
    fn equilibrium_examples() {
        let sft = full2();
        let mu = equilibrium_state(&sft, &Potential::zero(&sft)).unwrap();
        assert_eq!(mu.order(), 1);
        for row in mu.kernel() {
            for &p in row {
                assert!((p - 0.5).abs() < 1e-13);
            }
        }
        assert!((mu.entropy() - 2f64.ln()).abs() < 1e-13);

        let c = 0.7;
        let phi = Potential::new(&sft, 1, vec![0.0, c]).unwrap();
        let mu = equilibrium_state(&sft, &phi).unwrap();
        let p1 = c.exp() / (1.0 + c.exp());
        for row in mu.kernel() {
            assert!((row[0] - (1.0 - p1)).abs() < 1e-13);
            assert!((row[1] - p1).abs() < 1e-13);
        }

        let golden = Sft::golden_mean();
        let parry = equilibrium_state(&golden, &Potential::zero(&golden)).unwrap();
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((parry.kernel()[0][0] - 1.0 / g).abs() < 1e-13);
        assert!((parry.kernel()[0][1] - (1.0 - 1.0 / g)).abs() < 1e-13);
        assert_eq!(parry.kernel()[1][1], 0.0);
        assert!((parry.entropy() - g.ln()).abs() < 1e-13);
        parry.validate().unwrap();
    }

    #[test]
    fn entropy_examples() {
        let sft = full2();
        assert!((measure_entropy(&bernoulli(&sft, 0.5)) - 2f64.ln()).abs() < 1e-15);
        let h = -0.9 * 0.9f64.ln() - 0.1 * 0.1f64.ln();
        assert!((measure_entropy(&bernoulli(&sft, 0.9)) - h).abs() < 1e-15);
        assert!((h - 0.325083).abs() < 1e-6);
        let point = MarkovMeasure::from_parts(
            &sft,
            1,
            vec![1.0, 0.0],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        assert_eq!(measure_entropy(&point), 0.0);
    }

    #[test]
    fn integrate_examples() {
        let sft = full2();
        let fp = fixed_point_potential(&sft, 0).unwrap();
        let b = bernoulli(&sft, 0.5);
        assert!((integrate(&b, &Potential::constant(&sft, 2.5)).unwrap() - 2.5).abs() < 1e-15);
        assert!((integrate(&b, &fp).unwrap() + 0.75).abs() < 1e-15);
        let point = MarkovMeasure::from_parts(
            &sft,
            1,
            vec![1.0, 0.0],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        assert_eq!(integrate(&point, &fp).unwrap(), 0.0);
        let golden = Sft::golden_mean();
        assert_eq!(
            integrate(&b, &Potential::zero(&golden)),
            Err(Error::MismatchedSystem)
        );
    }

    #[test]
    fn integration_lifts_measure_for_long_memory() {
        let sft = full2();
        let b = bernoulli(&sft, 0.3);
        let phi = Potential::from_fn(&sft, 3, |w| if w == [1, 0, 1] { 1.0 } else { 0.0 }).unwrap();
        let expected = 0.7 * 0.3 * 0.7;
        assert!((integrate(&b, &phi).unwrap() - expected).abs() < 1e-15);
        let lifted = b.lift(3).unwrap();
        lifted.validate().unwrap();
        assert!((lifted.entropy() - b.entropy()).abs() < 1e-14);
    }

    #[test]
    fn measure_validation_errors() {
        let sft = full2();
        assert!(MarkovMeasure::from_parts(&sft, 1, vec![0.5, 0.5], vec![vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
        assert!(MarkovMeasure::from_parts(&sft, 1, vec![0.9, 0.1], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).is_err());
        let golden = Sft::golden_mean();
        let err = MarkovMeasure::from_parts(&golden, 1, vec![0.5, 0.5], vec![vec![0.0, 1.0], vec![0.0, 1.0]])
            .unwrap_err();
        assert!(err.to_string().contains("inadmissible"), "{err}");
    }

    #[test]
    fn lipschitz_examples() {
        let sft = Sft::golden_mean();
        let phi = Potential::new(&sft, 2, vec![0.3, -1.1, 0.8]).unwrap();
        let same = lipschitz_check(&sft, &phi, &phi).unwrap();
        assert_eq!(same.pressure_gap, 0.0);
        assert!(same.holds);
        let shifted = combine(&phi, &Potential::constant(&sft, 1.0), 0.4).unwrap();
        let report = lipschitz_check(&sft, &phi, &shifted).unwrap();
        assert!((report.pressure_gap - 0.4).abs() < 1e-12);
        assert!((report.sup_distance - 0.4).abs() < 1e-15);
        assert!(report.holds);
    }

    #[test]
    fn zero_temperature_pressure_is_finite() {
        let sft = full2();
        let fp = fixed_point_potential(&sft, 0).unwrap();
        for t in [1e2, 1e3, 1e4] {
            let phi = combine(&Potential::zero(&sft), &fp, t).unwrap();
            let (p, mu) = pressure_and_equilibrium(&sft, &phi).unwrap();
            assert!(p.value.is_finite());
            assert!(p.residual <= 1e-12, "t = {t}: residual {}", p.residual);
            assert!(mu.support_is_strongly_connected());
            mu.validate().unwrap();
        }
    }
}

//! Ergodic optimization for locally constant potentials.
//!
//! The maximal ergodic average `beta(phi) = max_mu int phi dmu` is the maximum
//! cycle mean of the edge graph. Maximizing measures live on the critical
//! graph: the edges that are tight for a sub-action `v` with
//! `v_i >= phi(ij) - beta + v_j` and that lie on tight cycles.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::edges::{Edge, EdgeGraph};
use crate::error::{Error, Result};
use crate::potentials::{combine, Potential};
use crate::sft::{topological_entropy, Block, Sft};
use crate::spectral::{irreducible_log_radius, log_sum_exp, WeightedGraph};
use crate::transfer::pressure_and_equilibrium;

/// Relative threshold on the Bellman residual below which an edge is tight.
pub const TIGHT_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximizationResult {
    /// Maximal ergodic average, equal to the mean weight of `witness_cycle`.
    pub beta: f64,
    /// Edge blocks of the critical graph, lexicographic.
    pub critical_edges: Vec<Block>,
    /// Edge blocks of one simple cycle of mean `beta`, in traversal order.
    pub witness_cycle: Vec<Block>,
    /// Topological entropy of the critical subgraph.
    pub ground_entropy: f64,
    /// True iff the critical graph is a single simple cycle.
    pub unique_flag: bool,
    /// Block length of the edges above.
    pub edge_memory: usize,
    /// Sub-action on the vertices (`edge_memory - 1`-blocks).
    pub sub_action: Vec<f64>,
}

/// Maximum mean weight over all cycles of a directed graph (Karp), or `None`
/// for an acyclic graph. Every vertex is a possible walk origin, so the graph
/// need not be strongly connected.
pub fn max_cycle_mean(n: usize, edges: &[(usize, usize, f64)]) -> Option<f64> {
    if n == 0 {
        return None;
    }
    // best[k][v]: heaviest walk with exactly k edges ending at v.
    let mut best = vec![vec![f64::NEG_INFINITY; n]; n + 1];
    best[0].fill(0.0);
    for k in 1..=n {
        for &(u, v, w) in edges {
            let candidate = best[k - 1][u] + w;
            if candidate > best[k][v] {
                best[k][v] = candidate;
            }
        }
    }
    let mut answer: Option<f64> = None;
    for v in 0..n {
        if best[n][v] == f64::NEG_INFINITY {
            continue;
        }
        let worst = (0..n)
            .filter(|&k| best[k][v] > f64::NEG_INFINITY)
            .map(|k| (best[n][v] - best[k][v]) / (n - k) as f64)
            .fold(f64::INFINITY, f64::min);
        answer = Some(answer.map_or(worst, |a| a.max(worst)));
    }
    answer
}

/// Critical-graph analysis of a weighted edge graph.
struct Critical {
    sub_action: Vec<f64>,
    /// Gap `v_i - v_j - (w_e - beta) >= 0` for each edge, zeroed when tight.
    gaps: Vec<f64>,
    /// Critical edge indices grouped by strongly connected component.
    components: Vec<Vec<usize>>,
}

fn analyse(n: usize, edges: &[Edge], beta: f64) -> Critical {
    let scale = edges.iter().map(|e| e.weight.abs()).fold(1.0, f64::max);
    let threshold = TIGHT_THRESHOLD * scale;

    // v_i = max over walks of length < n starting at i of the reduced weight;
    // with no positive reduced cycle this is a sub-action.
    let mut layer = vec![0.0; n];
    let mut sub_action = layer.clone();
    for _ in 1..n {
        let mut next = vec![f64::NEG_INFINITY; n];
        for e in edges {
            let candidate = (e.weight - beta) + layer[e.to];
            if candidate > next[e.from] {
                next[e.from] = candidate;
            }
        }
        for (v, x) in sub_action.iter_mut().zip(&next) {
            *v = v.max(*x);
        }
        layer = next;
    }

    let gaps: Vec<f64> = edges
        .iter()
        .map(|e| {
            let gap = sub_action[e.from] - sub_action[e.to] - (e.weight - beta);
            if gap <= threshold {
                0.0
            } else {
                gap
            }
        })
        .collect();

    let mut tight = DiGraph::<(), usize>::new();
    let nodes: Vec<NodeIndex> = (0..n).map(|_| tight.add_node(())).collect();
    for (idx, e) in edges.iter().enumerate() {
        if gaps[idx] == 0.0 {
            tight.add_edge(nodes[e.from], nodes[e.to], idx);
        }
    }
    let mut component_of = vec![usize::MAX; n];
    for (c, scc) in tarjan_scc(&tight).iter().enumerate() {
        for node in scc {
            component_of[node.index()] = c;
        }
    }
    let mut grouped: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (idx, e) in edges.iter().enumerate() {
        if gaps[idx] == 0.0 && component_of[e.from] == component_of[e.to] {
            grouped.entry(component_of[e.from]).or_default().push(idx);
        }
    }
    let mut components: Vec<Vec<usize>> = grouped.into_values().collect();
    components.sort();
    Critical {
        sub_action,
        gaps,
        components,
    }
}

/// A component is a simple cycle when each of its vertices has exactly one
/// outgoing edge inside it.
fn is_simple_cycle(component: &[usize], edges: &[Edge]) -> bool {
    let mut out_degree = std::collections::BTreeMap::new();
    for &idx in component {
        *out_degree.entry(edges[idx].from).or_insert(0usize) += 1;
    }
    out_degree.values().all(|&d| d == 1)
}

/// Follows the lowest-index outgoing edge inside `component` from its first
/// edge until a vertex repeats, and returns the closed part of the walk.
fn find_cycle(component: &[usize], edges: &[Edge]) -> Vec<usize> {
    let start = edges[component[0]].from;
    let mut walk: Vec<usize> = Vec::new();
    let mut seen_at = std::collections::BTreeMap::new();
    let mut at = start;
    loop {
        if let Some(&pos) = seen_at.get(&at) {
            return walk[pos..].to_vec();
        }
        seen_at.insert(at, walk.len());
        let next = *component
            .iter()
            .find(|&&idx| edges[idx].from == at)
            .expect("every vertex of a strongly connected component has an exit");
        walk.push(next);
        at = edges[next].to;
    }
}

fn component_log_radius(component: &[usize], edges: &[Edge], weight: impl Fn(usize) -> f64) -> Result<f64> {
    let mut vertices: Vec<usize> = component.iter().map(|&i| edges[i].from).collect();
    vertices.sort_unstable();
    vertices.dedup();
    let local = |v: usize| vertices.binary_search(&v).expect("vertex in component");
    let mut graph = WeightedGraph::new(vertices.len());
    for &idx in component {
        graph.add_edge(local(edges[idx].from), local(edges[idx].to), weight(idx));
    }
    irreducible_log_radius(&graph)
}

fn maximize_graph(graph: &EdgeGraph) -> Result<(MaximizationResult, Critical)> {
    let n = graph.states.len();
    let triples: Vec<(usize, usize, f64)> = graph.edges.iter().map(|e| (e.from, e.to, e.weight)).collect();
    let karp = max_cycle_mean(n, &triples).expect("primitive systems have cycles");
    let critical = analyse(n, &graph.edges, karp);

    let witness = find_cycle(&critical.components[0], &graph.edges);
    let beta = witness.iter().map(|&i| graph.edges[i].weight).sum::<f64>() / witness.len() as f64;

    let mut ground_entropy: f64 = 0.0;
    for component in &critical.components {
        if !is_simple_cycle(component, &graph.edges) {
            ground_entropy = ground_entropy.max(component_log_radius(component, &graph.edges, |_| 0.0)?);
        }
    }
    let unique_flag =
        critical.components.len() == 1 && is_simple_cycle(&critical.components[0], &graph.edges);

    let mut critical_edges: Vec<Block> = critical
        .components
        .iter()
        .flatten()
        .map(|&i| graph.blocks[i].clone())
        .collect();
    critical_edges.sort();

    let result = MaximizationResult {
        beta,
        critical_edges,
        witness_cycle: witness.iter().map(|&i| graph.blocks[i].clone()).collect(),
        ground_entropy,
        unique_flag,
        edge_memory: graph.order() + 1,
        sub_action: critical.sub_action.clone(),
    };
    Ok((result, critical))
}

/// Maximal ergodic average of `phi` with its critical graph and a witness
/// cycle.
pub fn max_ergodic_average(sft: &Sft, phi: &Potential) -> Result<MaximizationResult> {
    phi.ensure_on(sft)?;
    let graph = EdgeGraph::for_potential(sft, phi, phi.memory())?;
    maximize_graph(&graph).map(|(r, _)| r)
}

/// An upper bound `alpha` for `h_mu + int psi dmu` over the maximizing
/// measures of `phi`: the largest pressure of `psi` restricted to a
/// component of the critical graph. Exact when each component is a simple
/// cycle, where it reduces to the cycle average of `psi`.
pub fn ground_state_pressure_bound(sft: &Sft, psi: &Potential, phi: &Potential) -> Result<f64> {
    phi.ensure_on(sft)?;
    psi.ensure_on(sft)?;
    let memory = psi.memory().max(phi.memory());
    let graph = EdgeGraph::for_potential(sft, phi, memory)?;
    let psi_graph = EdgeGraph::for_potential(sft, psi, memory)?;
    let (_, critical) = maximize_graph(&graph)?;
    let psi_weight = |idx: usize| psi_graph.edges[idx].weight;
    let mut alpha = f64::NEG_INFINITY;
    for component in &critical.components {
        let value = if is_simple_cycle(component, &graph.edges) {
            component.iter().map(|&i| psi_weight(i)).sum::<f64>() / component.len() as f64
        } else {
            component_log_radius(component, &graph.edges, psi_weight)?
        };
        alpha = alpha.max(value);
    }
    Ok(alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroTemperatureRow {
    pub t: f64,
    /// `int phi dmu_t` for the equilibrium state `mu_t` of `t phi`.
    pub phi_avg: f64,
    pub entropy: f64,
    /// `beta - int phi dmu_t`, computed as the integral of the nonnegative
    /// sub-action gap.
    pub defect: f64,
    /// `ln defect`; stays finite where `defect` underflows.
    pub log_defect: f64,
    /// `h(f) / t`.
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroTemperatureTable {
    pub beta: f64,
    pub topological_entropy: f64,
    pub rows: Vec<ZeroTemperatureRow>,
    /// `phi_avg` non-decreasing along the rows.
    pub phi_avg_monotone: bool,
    /// `log_defect` non-increasing along the rows.
    pub defect_monotone: bool,
}

/// Defects `beta - int phi dmu_{t phi}` of the equilibrium states along
/// increasing `t`, with the certified bound `h(f) / t`.
pub fn zero_temperature_diagnostics(sft: &Sft, phi: &Potential, t_list: &[f64]) -> Result<ZeroTemperatureTable> {
    phi.ensure_on(sft)?;
    if t_list.is_empty() {
        return Err(Error::InvalidGrid("temperature list is empty".into()));
    }
    if t_list.iter().any(|t| !t.is_finite() || *t <= 0.0) || t_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("temperatures must be positive and increasing".into()));
    }
    let graph = EdgeGraph::for_potential(sft, phi, phi.memory())?;
    let (max, critical) = maximize_graph(&graph)?;
    let h_top = topological_entropy(sft);
    let zero = Potential::zero(sft);

    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let (_, mu) = pressure_and_equilibrium(sft, &combine(&zero, phi, t)?)?;
        let log_pi = mu.log_stationary();
        let log_p = mu.log_kernel();
        let log_defect = log_sum_exp(
            graph
                .edges
                .iter()
                .zip(&critical.gaps)
                .filter(|(_, &gap)| gap > 0.0)
                .map(|(e, gap)| log_pi[e.from] + log_p[e.from][e.to] + gap.ln()),
        );
        let phi_avg = graph
            .edges
            .iter()
            .map(|e| (log_pi[e.from] + log_p[e.from][e.to]).exp() * e.weight)
            .sum();
        let defect = log_defect.exp();
        let bound = h_top / t;
        rows.push(ZeroTemperatureRow {
            t,
            phi_avg,
            entropy: mu.entropy(),
            defect,
            log_defect,
            bound,
            within_bound: defect <= bound + 1e-12 || log_defect <= bound.ln(),
        });
    }
    let phi_avg_monotone = rows.windows(2).all(|w| w[1].phi_avg >= w[0].phi_avg - 1e-12);
    let defect_monotone = rows.windows(2).all(|w| w[1].log_defect <= w[0].log_defect + 1e-9);
    Ok(ZeroTemperatureTable {
        beta: max.beta,
        topological_entropy: h_top,
        rows,
        phi_avg_monotone,
        defect_monotone,
    })
}

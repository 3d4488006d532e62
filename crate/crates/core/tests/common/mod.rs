//! Generators and independent oracles shared by the integration tests.
//!
//! Nothing here calls into the transfer, ergopt or paths modules: matrices
//! are assembled directly from transition tables and solved densely.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thermoform::potentials::Potential;
use thermoform::sft::{build_sft, Sft};

/// Random primitive system on `2..=max_alphabet` symbols.
pub fn random_sft(rng: &mut ChaCha8Rng, max_alphabet: usize) -> Sft {
    loop {
        let n = rng.gen_range(2..=max_alphabet);
        let density = rng.gen_range(0.35..0.9);
        let m: Vec<Vec<u8>> = (0..n)
            .map(|_| (0..n).map(|_| u8::from(rng.gen_bool(density))).collect())
            .collect();
        if let Ok(sft) = build_sft(n, &m) {
            return sft;
        }
    }
}

pub fn random_potential(rng: &mut ChaCha8Rng, sft: &Sft, memory: usize, spread: f64) -> Potential {
    let count = thermoform::sft::admissible_blocks(sft, memory).unwrap().len();
    let values = (0..count).map(|_| rng.gen_range(-spread..spread)).collect();
    Potential::new(sft, memory, values).unwrap()
}

/// All admissible words of length `k`, by brute-force filtering of every
/// word over the alphabet.
pub fn words(sft: &Sft, k: usize) -> Vec<Vec<usize>> {
    let n = sft.alphabet_size();
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|w| (0..n).map(move |s| {
                let mut w2 = w.clone();
                w2.push(s);
                w2
            }))
            .collect();
    }
    out.retain(|w| w.windows(2).all(|p| sft.allows(p[0], p[1])));
    out
}

/// Dense `exp(phi)` matrix on `(m-1)`-words, `m = max(memory, 2)`.
pub fn dense_transfer_matrix(sft: &Sft, phi: &Potential) -> DMatrix<f64> {
    let m = phi.memory().max(2);
    let states = words(sft, m - 1);
    let n = states.len();
    let mut matrix = DMatrix::zeros(n, n);
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate() {
            if a[1..] == b[..m - 2] && sft.allows(*a.last().unwrap(), *b.last().unwrap()) {
                let mut w = a.clone();
                w.push(*b.last().unwrap());
                matrix[(i, j)] = phi.eval(&w).unwrap().exp();
            }
        }
    }
    matrix
}

/// `ln` of the spectral radius by repeated squaring with rescaling,
/// `ln rho(M) = lim 2^-k ln ||M^(2^k)||`. Entries are nonnegative, so every
/// product is free of cancellation whatever the conditioning of `M`.
pub fn dense_pressure(sft: &Sft, phi: &Potential) -> f64 {
    let mut a = dense_transfer_matrix(sft, phi);
    let first = a.max();
    a /= first;
    let mut log_radius = first.ln();
    let mut weight = 1.0;
    for _ in 0..60 {
        a = &a * &a;
        weight *= 0.5;
        let s = a.max();
        a /= s;
        log_radius += weight * s.ln();
    }
    log_radius
}

/// Entropy of the equilibrium state of `t phi` from the pressure function
/// alone: `h = p(t) - t p'(t)`, with `p'` by a central difference of the
/// dense radius.
pub fn dense_entropy_along_ray(sft: &Sft, phi: &Potential, t: f64) -> f64 {
    let zero = Potential::zero(sft);
    let p = |s: f64| dense_pressure(sft, &thermoform::potentials::combine(&zero, phi, s).unwrap());
    let step = 1e-5;
    let derivative = (p(t + step) - p(t - step)) / (2.0 * step);
    p(t) - t * derivative
}

pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// `t` at which the Bernoulli(`e^-t/(1+e^-t)`) entropy equals `a`, by
/// bisection of the binary entropy on `(0, 1/2)`.
pub fn bernoulli_inverse(a: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    ((1.0 - p) / p).ln()
}

/// Entropy of the equilibrium state of `t` times the fixed-point potential
/// at 0 on the full 2-shift, from the closed-form Perron root of
/// `[[1, x], [x, x]]`, `x = e^-t`.
pub fn fixed_point_entropy_closed_form(t: f64) -> f64 {
    let x = (-t).exp();
    let disc = ((1.0 - x) * (1.0 - x) + 4.0 * x * x).sqrt();
    let lambda = 0.5 * (1.0 + x + disc);
    // Implicit differentiation of lambda^2 - (1+x) lambda + x - x^2 = 0.
    let dlambda_dx = (lambda - 1.0 + 2.0 * x) / (2.0 * lambda - 1.0 - x);
    let dp_dt = -x * dlambda_dx / lambda;
    lambda.ln() - t * dp_dt
}

/// Maximum cycle mean by enumerating simple cycles; each cycle is rooted at
/// its smallest vertex.
pub fn brute_force_max_cycle_mean(n: usize, edges: &[(usize, usize, f64)]) -> Option<f64> {
    fn dfs(
        root: usize,
        at: usize,
        sum: f64,
        len: usize,
        visited: &mut Vec<bool>,
        edges: &[(usize, usize, f64)],
        best: &mut Option<f64>,
    ) {
        for &(u, v, w) in edges {
            if u != at {
                continue;
            }
            if v == root {
                let mean = (sum + w) / (len + 1) as f64;
                *best = Some(best.map_or(mean, |b: f64| b.max(mean)));
            } else if v > root && !visited[v] {
                visited[v] = true;
                dfs(root, v, sum + w, len + 1, visited, edges, best);
                visited[v] = false;
            }
        }
    }
    let mut best = None;
    for root in 0..n {
        let mut visited = vec![false; n];
        visited[root] = true;
        dfs(root, root, 0.0, 0, &mut visited, edges, &mut best);
    }
    best
}

/// Random Markov kernel with strictly positive entries on the admissible
/// transitions between `order`-words.
pub fn random_kernel(rng: &mut ChaCha8Rng, sft: &Sft, order: usize) -> Vec<Vec<f64>> {
    let states = words(sft, order);
    states
        .iter()
        .map(|a| {
            let raw: Vec<f64> = states
                .iter()
                .map(|b| {
                    let allowed = a[1..] == b[..order - 1] && sft.allows(*a.last().unwrap(), *b.last().unwrap());
                    if allowed {
                        rng.gen_range(0.01..1.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        })
        .collect()
}

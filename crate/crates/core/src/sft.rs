//! One-sided subshifts of finite type.
//!
//! The phase space is the set of sequences `x_0 x_1 ...` over `{0, .., n-1}`
//! with `transitions[x_i][x_{i+1}] == 1` for every `i`, and the dynamics is the
//! left shift. Distances on sequences are `2^-min{n : x_n != y_n}`; nothing in
//! the crate computes with them because every potential is locally constant.

use std::fmt;

use crate::error::{Error, Result};
use crate::spectral::{self, WeightedGraph};

/// A primitive subshift of finite type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sft {
    alphabet_size: usize,
    transitions: Vec<Vec<bool>>,
}

/// A finite admissible word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block(Vec<usize>);

impl Block {
    pub fn new(symbols: Vec<usize>) -> Self {
        Block(symbols)
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses the compact notation used in config files: one character per
    /// symbol, `0-9` then `a-z`.
    pub fn parse(text: &str) -> Option<Block> {
        text.chars()
            .map(|c| c.to_digit(36).map(|d| d as usize))
            .collect::<Option<Vec<_>>>()
            .map(Block)
    }
}

impl serde::Serialize for Block {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 36) {
            for &s in &self.0 {
                let c = std::char::from_digit(s as u32, 36).expect("symbol below 36");
                write!(f, "{c}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// Validates a 0/1 transition matrix and returns the subshift it defines.
pub fn build_sft(alphabet_size: usize, transitions: &[Vec<u8>]) -> Result<Sft> {
    if alphabet_size == 0 {
        return Err(Error::EmptyAlphabet);
    }
    if transitions.len() != alphabet_size {
        return Err(Error::DimensionMismatch {
            rows: transitions.len(),
            alphabet: alphabet_size,
        });
    }
    let mut matrix = vec![vec![false; alphabet_size]; alphabet_size];
    for (i, row) in transitions.iter().enumerate() {
        if row.len() != alphabet_size {
            return Err(Error::NotSquare {
                row: i,
                len: row.len(),
                expected: alphabet_size,
            });
        }
        for (j, &value) in row.iter().enumerate() {
            match value {
                0 => {}
                1 => matrix[i][j] = true,
                _ => return Err(Error::NonBinaryEntry { row: i, col: j, value }),
            }
        }
    }
    Sft::from_bool_matrix(matrix)
}

impl Sft {
    fn from_bool_matrix(matrix: Vec<Vec<bool>>) -> Result<Sft> {
        let n = matrix.len();
        for i in 0..n {
            if !matrix[i].iter().any(|&b| b) {
                return Err(Error::StrandedSymbol { symbol: i, line: "row" });
            }
            if !(0..n).any(|r| matrix[r][i]) {
                return Err(Error::StrandedSymbol { symbol: i, line: "column" });
            }
        }
        if !is_primitive(&matrix) {
            return Err(Error::NotPrimitive {
                bound: wielandt_bound(n),
            });
        }
        Ok(Sft {
            alphabet_size: n,
            transitions: matrix,
        })
    }

    /// The full shift on `n` symbols.
    pub fn full_shift(n: usize) -> Result<Sft> {
        build_sft(n, &vec![vec![1u8; n]; n])
    }

    /// The golden-mean shift: no two consecutive 1s.
    pub fn golden_mean() -> Sft {
        build_sft(2, &[vec![1, 1], vec![1, 0]]).expect("golden-mean matrix is primitive")
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn allows(&self, from: usize, to: usize) -> bool {
        self.transitions[from][to]
    }

    pub fn transition_matrix(&self) -> Vec<Vec<u8>> {
        self.transitions
            .iter()
            .map(|row| row.iter().map(|&b| u8::from(b)).collect())
            .collect()
    }

    /// True when every symbol is in range and every adjacent pair is allowed.
    pub fn is_admissible(&self, word: &[usize]) -> bool {
        word.iter().all(|&s| s < self.alphabet_size)
            && word.windows(2).all(|w| self.transitions[w[0]][w[1]])
    }

    /// Wraps `symbols` as a [`Block`] after checking admissibility.
    pub fn block(&self, symbols: Vec<usize>) -> Result<Block> {
        if let Some(&s) = symbols.iter().find(|&&s| s >= self.alphabet_size) {
            return Err(Error::SymbolOutOfRange {
                symbol: s,
                alphabet: self.alphabet_size,
            });
        }
        let block = Block(symbols);
        if !self.is_admissible(block.symbols()) {
            return Err(Error::InadmissibleWord {
                word: block.to_string(),
            });
        }
        Ok(block)
    }
}

/// `(n-1)^2 + 1`, the largest exponent a primitive `n x n` matrix may need.
pub fn wielandt_bound(n: usize) -> usize {
    (n - 1) * (n - 1) + 1
}

fn bool_product(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    let mut out = vec![vec![false; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] {
                for j in 0..n {
                    out[i][j] |= b[k][j];
                }
            }
        }
    }
    out
}

/// Primitivity by repeated squaring: once a power of a matrix without zero
/// columns is positive, every higher power is positive, so it suffices to test
/// `A^(2^j)` for the first `2^j` at or above the Wielandt bound.
fn is_primitive(matrix: &[Vec<bool>]) -> bool {
    let bound = wielandt_bound(matrix.len());
    let mut power = matrix.to_vec();
    let mut exponent = 1usize;
    while exponent < bound {
        power = bool_product(&power, &power);
        exponent *= 2;
    }
    power.iter().all(|row| row.iter().all(|&b| b))
}

/// `h(f) = ln` of the Perron root of the transition matrix, in nats.
pub fn topological_entropy(sft: &Sft) -> f64 {
    let n = sft.alphabet_size;
    let mut graph = WeightedGraph::new(n);
    for i in 0..n {
        for j in 0..n {
            if sft.transitions[i][j] {
                graph.add_edge(i, j, 0.0);
            }
        }
    }
    spectral::perron(&graph, spectral::DEFAULT_TOLERANCE, spectral::DEFAULT_MAX_ITERATIONS)
        .expect("primitive 0/1 matrices converge")
        .log_eigenvalue
}

/// All admissible words of length `k`, in lexicographic order.
pub fn admissible_blocks(sft: &Sft, k: usize) -> Result<Vec<Block>> {
    if k == 0 {
        return Err(Error::BlockLengthZero);
    }
    let mut current: Vec<Vec<usize>> = (0..sft.alphabet_size).map(|s| vec![s]).collect();
    for _ in 1..k {
        let mut next = Vec::new();
        for word in &current {
            let last = *word.last().expect("nonempty word");
            for s in 0..sft.alphabet_size {
                if sft.transitions[last][s] {
                    let mut extended = word.clone();
                    extended.push(s);
                    next.push(extended);
                }
            }
        }
        current = next;
    }
    Ok(current.into_iter().map(Block).collect())
}

/// Higher-block presentation: symbols are the admissible `k`-blocks, and
/// `b -> c` is allowed when `b[1..] == c[..k-1]`. Returns the new system with
/// the block for each new symbol.
pub fn recode_to_edge_shift(sft: &Sft, k: usize) -> Result<(Sft, Vec<Block>)> {
    let blocks = admissible_blocks(sft, k)?;
    let n = blocks.len();
    let mut matrix = vec![vec![false; n]; n];
    for (i, b) in blocks.iter().enumerate() {
        let tail = &b.symbols()[1..];
        let last = *b.symbols().last().expect("k >= 1");
        for (j, c) in blocks.iter().enumerate() {
            let head = &c.symbols()[..k - 1];
            let first_new = *c.symbols().last().expect("k >= 1");
            matrix[i][j] = tail == head
                && if k == 1 {
                    sft.transitions[last][first_new]
                } else {
                    true
                };
        }
    }
    let recoded = Sft::from_bool_matrix(matrix)?;
    Ok((recoded, blocks))
}

/// Position of `word` within a lexicographically sorted block list.
pub(crate) fn block_index(blocks: &[Block], word: &[usize]) -> Option<usize> {
    blocks
        .binary_search_by(|b| b.symbols().cmp(word))
        .ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_primitive(matrix: &[Vec<bool>]) -> bool {
        let n = matrix.len();
        let mut power = matrix.to_vec();
        for _ in 1..=wielandt_bound(n) {
            if power.iter().all(|row| row.iter().all(|&b| b)) {
                return true;
            }
            power = bool_product(&power, matrix);
        }
        false
    }

    #[test]
    fn builds_standard_examples() {
        assert!(build_sft(2, &[vec![1, 1], vec![1, 1]]).is_ok());
        assert!(build_sft(2, &[vec![1, 1], vec![1, 0]]).is_ok());
        assert_eq!(
            build_sft(2, &[vec![1, 0], vec![0, 1]]),
            Err(Error::NotPrimitive { bound: 2 })
        );
    }

    #[test]
    fn rejects_malformed_matrices() {
        assert!(matches!(
            build_sft(2, &[vec![1, 1], vec![1]]),
            Err(Error::NotSquare { row: 1, .. })
        ));
        assert!(matches!(
            build_sft(3, &[vec![1, 1], vec![1, 1]]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            build_sft(2, &[vec![1, 2], vec![1, 1]]),
            Err(Error::NonBinaryEntry { row: 0, col: 1, value: 2 })
        ));
        assert!(matches!(
            build_sft(2, &[vec![1, 1], vec![0, 0]]),
            Err(Error::StrandedSymbol { symbol: 1, line: "row" })
        ));
        assert!(matches!(
            build_sft(2, &[vec![1, 0], vec![1, 0]]),
            Err(Error::StrandedSymbol { symbol: 1, line: "column" })
        ));
        assert_eq!(build_sft(0, &[]), Err(Error::EmptyAlphabet));
    }

    #[test]
    fn periodic_cycle_is_not_primitive() {
        let cycle = vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]];
        assert!(matches!(build_sft(3, &cycle), Err(Error::NotPrimitive { .. })));
    }

    #[test]
    fn wielandt_extremal_matrix_is_primitive() {
        // Cycle 0->1->..->n-1->0 plus the chord n-1 -> 1 needs exactly the bound.
        let n = 5;
        let mut m = vec![vec![0u8; n]; n];
        for i in 0..n - 1 {
            m[i][i + 1] = 1;
        }
        m[n - 1][0] = 1;
        m[n - 1][1] = 1;
        assert!(build_sft(n, &m).is_ok());
    }

    #[test]
    fn primitivity_matches_brute_force_on_all_small_matrices() {
        for n in 1..=3usize {
            for mask in 0u32..(1 << (n * n)) {
                let m: Vec<Vec<bool>> = (0..n)
                    .map(|i| (0..n).map(|j| mask >> (i * n + j) & 1 == 1).collect())
                    .collect();
                assert_eq!(is_primitive(&m), brute_force_primitive(&m), "{m:?}");
            }
        }
    }

    #[test]
    fn entropy_of_standard_shifts() {
        let full2 = Sft::full_shift(2).unwrap();
        let full3 = Sft::full_shift(3).unwrap();
        let golden = Sft::golden_mean();
        assert!((topological_entropy(&full2) - 2f64.ln()).abs() < 1e-12);
        assert!((topological_entropy(&full3) - 3f64.ln()).abs() < 1e-12);
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((topological_entropy(&golden) - g.ln()).abs() < 1e-12);
        assert!((topological_entropy(&golden) - 0.481212).abs() < 1e-6);
    }

    #[test]
    fn block_enumeration() {
        let full2 = Sft::full_shift(2).unwrap();
        let names: Vec<String> = admissible_blocks(&full2, 2)
            .unwrap()
            .iter()
            .map(|b| b.to_string())
            .collect();
        assert_eq!(names, ["00", "01", "10", "11"]);
        let golden = Sft::golden_mean();
        let names: Vec<String> = admissible_blocks(&golden, 2)
            .unwrap()
            .iter()
            .map(|b| b.to_string())
            .collect();
        assert_eq!(names, ["00", "01", "10"]);
        assert_eq!(admissible_blocks(&golden, 4).unwrap().len(), 8);
        assert_eq!(admissible_blocks(&golden, 0), Err(Error::BlockLengthZero));
    }

    #[test]
    fn recodings_preserve_entropy() {
        let full2 = Sft::full_shift(2).unwrap();
        let (same, blocks) = recode_to_edge_shift(&full2, 1).unwrap();
        assert_eq!(same, full2);
        assert_eq!(blocks.len(), 2);

        let (de_bruijn, blocks) = recode_to_edge_shift(&full2, 2).unwrap();
        assert_eq!(blocks.len(), 4);
        assert_eq!(
            de_bruijn.transition_matrix(),
            vec![
                vec![1, 1, 0, 0],
                vec![0, 0, 1, 1],
                vec![1, 1, 0, 0],
                vec![0, 0, 1, 1]
            ]
        );
        assert!((topological_entropy(&de_bruijn) - 2f64.ln()).abs() < 1e-10);

        let golden = Sft::golden_mean();
        let (recoded, blocks) = recode_to_edge_shift(&golden, 2).unwrap();
        assert_eq!(blocks.len(), 3);
        let edges: u32 = recoded
            .transition_matrix()
            .iter()
            .flatten()
            .map(|&v| u32::from(v))
            .sum();
        assert_eq!(edges, 5);
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((topological_entropy(&recoded) - g.ln()).abs() < 1e-10);
    }

    #[test]
    fn block_parsing_and_display() {
        let b = Block::parse("0a1").unwrap();
        assert_eq!(b.symbols(), &[0, 10, 1]);
        assert_eq!(b.to_string(), "0a1");
        assert!(Block::parse("0-1").is_none());
        let golden = Sft::golden_mean();
        assert!(matches!(
            golden.block(vec![1, 1]),
            Err(Error::InadmissibleWord { .. })
        ));
        assert!(matches!(
            golden.block(vec![2]),
            Err(Error::SymbolOutOfRange { symbol: 2, .. })
        ));
    }
}

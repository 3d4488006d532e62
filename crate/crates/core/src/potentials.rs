//! Locally constant potentials.
//!
//! A potential of memory `k` assigns a real number (in nats) to every
//! admissible `k`-block; as a function on sequences it reads the first `k`
//! symbols. Reading a memory-`k` table at memory `m > k` ignores the trailing
//! `m - k` symbols.

use crate::error::{Error, Result};
use crate::sft::{admissible_blocks, block_index, Block, Sft};

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    sft: Sft,
    memory: usize,
    blocks: Vec<Block>,
    values: Vec<f64>,
}

impl Potential {
    /// Builds a potential from values listed in lexicographic block order.
    pub fn new(sft: &Sft, memory: usize, values: Vec<f64>) -> Result<Potential> {
        let blocks = admissible_blocks(sft, memory)?;
        if values.len() != blocks.len() {
            return Err(Error::InvalidPotential(format!(
                "expected {} values for memory {memory}, got {}",
                blocks.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "value for block {} is not finite",
                blocks[i]
            )));
        }
        Ok(Potential {
            sft: sft.clone(),
            memory,
            blocks,
            values,
        })
    }

    /// Builds a potential from `(block, value)` pairs that must cover the
    /// admissible `memory`-blocks exactly once each.
    pub fn from_blocks<I>(sft: &Sft, memory: usize, entries: I) -> Result<Potential>
    where
        I: IntoIterator<Item = (Block, f64)>,
    {
        let blocks = admissible_blocks(sft, memory)?;
        let mut values: Vec<Option<f64>> = vec![None; blocks.len()];
        for (block, value) in entries {
            if block.len() != memory {
                return Err(Error::InvalidPotential(format!(
                    "block {block} has length {}, expected {memory}",
                    block.len()
                )));
            }
            let index = block_index(&blocks, block.symbols()).ok_or_else(|| {
                Error::InvalidPotential(format!("block {block} is inadmissible"))
            })?;
            if values[index].replace(value).is_some() {
                return Err(Error::InvalidPotential(format!("block {block} is listed twice")));
            }
        }
        let missing: Vec<String> = blocks
            .iter()
            .zip(&values)
            .filter(|(_, v)| v.is_none())
            .map(|(b, _)| b.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::InvalidPotential(format!(
                "missing blocks {}",
                missing.join(", ")
            )));
        }
        Potential::new(sft, memory, values.into_iter().map(|v| v.expect("checked")).collect())
    }

    pub fn from_fn<F>(sft: &Sft, memory: usize, f: F) -> Result<Potential>
    where
        F: Fn(&[usize]) -> f64,
    {
        let blocks = admissible_blocks(sft, memory)?;
        let values = blocks.iter().map(|b| f(b.symbols())).collect();
        Potential::new(sft, memory, values)
    }

    pub fn zero(sft: &Sft) -> Potential {
        Potential::constant(sft, 0.0)
    }

    pub fn constant(sft: &Sft, c: f64) -> Potential {
        Potential::from_fn(sft, 1, |_| c).expect("memory 1 is valid")
    }

    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value on a sequence starting with `word`; only the first `memory`
    /// symbols are read.
    pub fn eval(&self, word: &[usize]) -> Option<f64> {
        if word.len() < self.memory {
            return None;
        }
        block_index(&self.blocks, &word[..self.memory]).map(|i| self.values[i])
    }

    /// The same function presented as a memory-`memory` table.
    pub fn lift(&self, memory: usize) -> Result<Potential> {
        if memory < self.memory {
            return Err(Error::InvalidPotential(format!(
                "cannot lower memory from {} to {memory}",
                self.memory
            )));
        }
        Potential::from_fn(&self.sft, memory, |w| {
            self.eval(w).expect("admissible prefix of an admissible block")
        })
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    pub(crate) fn ensure_on(&self, sft: &Sft) -> Result<()> {
        if &self.sft == sft {
            Ok(())
        } else {
            Err(Error::MismatchedSystem)
        }
    }
}

/// `max |phi|` over admissible blocks, the supremum norm of the induced
/// function on sequences.
pub fn sup_norm(phi: &Potential) -> f64 {
    phi.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// `psi + t * phi`, presented at the larger of the two memories.
pub fn combine(psi: &Potential, phi: &Potential, t: f64) -> Result<Potential> {
    if psi.sft != phi.sft {
        return Err(Error::MismatchedSystem);
    }
    let memory = psi.memory.max(phi.memory);
    Potential::from_fn(&psi.sft, memory, |w| {
        psi.eval(w).expect("admissible") + t * phi.eval(w).expect("admissible")
    })
}

/// Ground-state potential for the fixed point `p^inf`: 0 on the block `pp`
/// and -1 on every other admissible 2-block. Its only maximizing measure is
/// the point mass at `p^inf`.
pub fn fixed_point_potential(sft: &Sft, p: usize) -> Result<Potential> {
    if p >= sft.alphabet_size() {
        return Err(Error::SymbolOutOfRange {
            symbol: p,
            alphabet: sft.alphabet_size(),
        });
    }
    if !sft.allows(p, p) {
        return Err(Error::NoSelfLoop { symbol: p });
    }
    Potential::from_fn(sft, 2, |w| if w == [p, p] { 0.0 } else { -1.0 })
}

/// `sum_{i<n} phi(word[i..i+memory])`.
pub fn birkhoff_sum(phi: &Potential, word: &Block, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::BlockLengthZero);
    }
    let needed = n + phi.memory - 1;
    if word.len() < needed {
        return Err(Error::WordTooShort {
            needed,
            found: word.len(),
        });
    }
    let symbols = word.symbols();
    (0..n)
        .map(|i| {
            phi.eval(&symbols[i..]).ok_or_else(|| Error::InadmissibleWord {
                word: word.to_string(),
            })
        })
        .sum()
}

//! The weighted graph of a potential on its higher-block presentation:
//! vertices are admissible `(m-1)`-blocks, edges are admissible `m`-blocks
//! with `m = max(memory, 2)`, and each edge carries the potential's value.

use crate::error::Result;
use crate::potentials::Potential;
use crate::sft::{admissible_blocks, block_index, Block, Sft};
use crate::spectral::WeightedGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct EdgeGraph {
    /// Vertex labels, lexicographic.
    pub states: Vec<Block>,
    /// Edge labels (the `m`-blocks), lexicographic and parallel to `edges`.
    pub blocks: Vec<Block>,
    pub edges: Vec<Edge>,
}

impl EdgeGraph {
    pub fn for_potential(sft: &Sft, phi: &Potential, memory: usize) -> Result<EdgeGraph> {
        let memory = memory.max(phi.memory()).max(2);
        let states = admissible_blocks(sft, memory - 1)?;
        let blocks = admissible_blocks(sft, memory)?;
        let edges = blocks
            .iter()
            .map(|b| {
                let s = b.symbols();
                Edge {
                    from: block_index(&states, &s[..memory - 1]).expect("prefix is admissible"),
                    to: block_index(&states, &s[1..]).expect("suffix is admissible"),
                    weight: phi.eval(s).expect("block is admissible"),
                }
            })
            .collect();
        Ok(EdgeGraph { states, blocks, edges })
    }

    pub fn order(&self) -> usize {
        self.states[0].len()
    }

    pub fn weighted(&self) -> WeightedGraph {
        let mut graph = WeightedGraph::new(self.states.len());
        for e in &self.edges {
            graph.add_edge(e.from, e.to, e.weight);
        }
        graph
    }
}

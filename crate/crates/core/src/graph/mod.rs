//! Explicit graphs, file formats, and their implicit (OBDD) encoding.

mod encode;
mod parse;

use std::collections::BTreeSet;

pub use encode::{
    decode_edges, decode_relation, encode_graph, random_density_graph, EncodedGraph, GraphVars,
};
pub use parse::{parse_graph, parse_str, Format, ParsedGraph};

use crate::error::{Error, Result};

/// An undirected simple graph on nodes `0..num_nodes`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    num_nodes: usize,
    /// Stored as `(u, v)` with `u < v`.
    edges: BTreeSet<(u32, u32)>,
}

impl Graph {
    pub fn new(num_nodes: usize) -> Self {
        Self {
            num_nodes,
            edges: BTreeSet::new(),
        }
    }

    /// Builds a graph, rejecting self-loops and endpoints `≥ num_nodes`.
    pub fn from_edges(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self> {
        let mut g = Self::new(num_nodes);
        for (u, v) in edges {
            if u == v {
                return Err(Error::Validation(format!("self-loop at node {u}")));
            }
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Inserts `{u, v}`; returns `false` if it was already present or is a loop.
    pub fn add_edge(&mut self, u: u32, v: u32) -> Result<bool> {
        for w in [u, v] {
            if w as usize >= self.num_nodes {
                return Err(Error::Validation(format!(
                    "endpoint {w} outside 0..{}",
                    self.num_nodes
                )));
            }
        }
        if u == v {
            return Ok(false);
        }
        Ok(self.edges.insert((u.min(v), u.max(v))))
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &BTreeSet<(u32, u32)> {
        &self.edges
    }

    pub fn contains(&self, u: u32, v: u32) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        adj
    }

    pub fn degree(&self, u: u32) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == u || b == u)
            .count()
    }

    /// `|E| / (N(N−1)/2)`, zero for fewer than two nodes.
    pub fn density(&self) -> f64 {
        let n = self.num_nodes as f64;
        if self.num_nodes < 2 {
            0.0
        } else {
            self.edges.len() as f64 / (n * (n - 1.0) / 2.0)
        }
    }

    /// Edge list text with an `N=` header, readable by [`Format::EdgeList`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# N={}\n", self.num_nodes);
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_and_queries() {
        let mut g = Graph::new(4);
        assert!(g.add_edge(2, 1).unwrap());
        assert!(!g.add_edge(1, 2).unwrap());
        assert!(!g.add_edge(3, 3).unwrap());
        assert!(g.add_edge(4, 0).is_err());
        assert!(g.contains(1, 2) && g.contains(2, 1));
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.degree(1), 1);
        assert_eq!(g.adjacency()[2], vec![1]);
        assert!(Graph::from_edges(3, [(1, 1)]).is_err());
        assert!((g.density() - 1.0 / 6.0).abs() < 1e-12);
    }
}

use std::collections::BTreeSet;

use rand::Rng;

use super::Graph;
use crate::builders::build_gt;
use crate::error::{Error, Result};
use crate::obdd::{FuncHandle, ObddManager, VarOrder};
use crate::random::{ceil_log2, random_layered_obdd, LayeredObddSpec};

/// Three node-encoding blocks of `n` bits each.
///
/// Variable `b` of `x` is `b`, of `y` is `n + b`, of `z` is `2n + b`. The
/// manager order interleaves them bit by bit: `x_0 y_0 z_0 x_1 y_1 z_1 …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphVars {
    pub n: usize,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub z: Vec<usize>,
}

impl GraphVars {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("node encodings need at least one bit".into()));
        }
        Ok(Self {
            n,
            x: (0..n).collect(),
            y: (n..2 * n).collect(),
            z: (2 * n..3 * n).collect(),
        })
    }

    /// Bits needed for `num_nodes` nodes: `max(1, ⌈log₂ N⌉)`.
    pub fn for_nodes(num_nodes: usize) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::Config("graph has no nodes".into()));
        }
        Self::new(ceil_log2(num_nodes as u64).max(1))
    }

    pub fn order(&self) -> VarOrder {
        let order = (0..self.n)
            .flat_map(|b| [self.x[b], self.y[b], self.z[b]])
            .collect();
        VarOrder::new(order).expect("interleaving is a permutation")
    }

    /// A fresh manager over the `3n` variables in interleaved order.
    pub fn manager(&self) -> Result<ObddManager> {
        Ok(ObddManager::new(3 * self.n, self.order())?)
    }

    /// `x ++ y`, the variables of a binary relation.
    pub fn xy(&self) -> Vec<usize> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    /// `f(y, x)` for `f(x, y)`; also renames a function of `x` into one of `y`.
    pub fn swap_xy(&self, mgr: &mut ObddManager, f: FuncHandle) -> Result<FuncHandle> {
        Ok(mgr.reorder_args(f, &[&self.x, &self.y], &[1, 0])?)
    }

    /// `f(x, z)` for `f(x, y)`.
    pub fn swap_yz(&self, mgr: &mut ObddManager, f: FuncHandle) -> Result<FuncHandle> {
        Ok(mgr.reorder_args(f, &[&self.y, &self.z], &[1, 0])?)
    }

    fn check_manager(&self, mgr: &ObddManager) -> Result<()> {
        if mgr.num_vars() < 3 * self.n {
            return Err(Error::Config(format!(
                "manager has {} variables, encoding needs {}",
                mgr.num_vars(),
                3 * self.n
            )));
        }
        Ok(())
    }
}

/// A graph given by its characteristic function `χ_E(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedGraph {
    pub vars: GraphVars,
    pub chi_e: FuncHandle,
    pub num_nodes: usize,
}

impl EncodedGraph {
    /// Undirected edges, `sat_count(χ_E) / 2`.
    pub fn num_edges(&self, mgr: &ObddManager) -> Result<u64> {
        Ok((mgr.sat_count(self.chi_e, 2 * self.vars.n)? / 2) as u64)
    }
}

/// Builds `χ_E` as a disjunction of edge minterms, symmetrized by argument swap.
pub fn encode_graph(mgr: &mut ObddManager, vars: &GraphVars, g: &Graph) -> Result<EncodedGraph> {
    if g.num_nodes() == 0 {
        return Err(Error::Config("graph has no nodes".into()));
    }
    vars.check_manager(mgr)?;
    if vars.n < 64 && (g.num_nodes() as u128) > 1u128 << vars.n {
        return Err(Error::Config(format!(
            "{} bits cannot encode {} nodes",
            vars.n,
            g.num_nodes()
        )));
    }
    let mut terms = Vec::with_capacity(g.num_edges());
    for &(u, v) in g.edges() {
        let lits: Vec<(usize, bool)> = (0..vars.n)
            .flat_map(|b| {
                [
                    (vars.x[b], (u >> b) & 1 == 1),
                    (vars.y[b], (v >> b) & 1 == 1),
                ]
            })
            .collect();
        terms.push(mgr.cube(&lits)?);
    }
    // balanced disjunction
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        for pair in terms.chunks(2) {
            next.push(match *pair {
                [a, b] => mgr.or(a, b)?,
                [a] => a,
                _ => unreachable!(),
            });
        }
        terms = next;
    }
    let half = terms.pop().unwrap_or_else(|| mgr.zero());
    let mirrored = vars.swap_xy(mgr, half)?;
    let chi_e = mgr.or(half, mirrored)?;
    Ok(EncodedGraph {
        vars: vars.clone(),
        chi_e,
        num_nodes: g.num_nodes(),
    })
}

/// Unordered pairs `{|x|, |y|}` with `f(x, y) = 1` and `x ≠ y`.
pub fn decode_relation(
    mgr: &ObddManager,
    vars: &GraphVars,
    f: FuncHandle,
) -> Result<BTreeSet<(u32, u32)>> {
    let xy = vars.xy();
    let n = vars.n;
    let mut out = BTreeSet::new();
    mgr.for_each_sat(f, &xy, |bits| {
        let value = |range: std::ops::Range<usize>| {
            bits[range]
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &b)| acc | (b as u64) << i)
        };
        let (u, v) = (value(0..n), value(n..2 * n));
        if u != v {
            out.insert((u.min(v) as u32, u.max(v) as u32));
        }
    })?;
    Ok(out)
}

/// The explicit edge set of an encoded graph.
pub fn decode_edges(mgr: &ObddManager, eg: &EncodedGraph) -> Result<BTreeSet<(u32, u32)>> {
    decode_relation(mgr, &eg.vars, eg.chi_e)
}

/// A random graph on `2^n` nodes drawn from layered random OBDDs.
///
/// A layered diagram `f` of width `w` over the interleaved `x, y` variables is
/// restricted to the upper triangle `|x| > |y|` and mirrored, so each node
/// pair is an edge with probability `p_sink` and there are no loops.
pub fn random_density_graph<R: Rng + ?Sized>(
    mgr: &mut ObddManager,
    vars: &GraphVars,
    p_sink: f64,
    w: usize,
    rng: &mut R,
) -> Result<EncodedGraph> {
    vars.check_manager(mgr)?;
    if vars.n >= 32 {
        return Err(Error::Config(format!(
            "{} bits per node is too many",
            vars.n
        )));
    }
    let mut block = vars.xy();
    block.sort_by_key(|&v| mgr.level_of(v));
    let spec = LayeredObddSpec {
        n: block.len(),
        w,
        p_sink,
        seed: rng.random(),
    };
    let (f, _) = random_layered_obdd(mgr, &block, &spec)?;
    let gt = build_gt(mgr, &vars.x, &vars.y)?;
    let upper = mgr.and(gt, f)?;
    let lower = vars.swap_xy(mgr, upper)?;
    let chi_e = mgr.or(upper, lower)?;
    Ok(EncodedGraph {
        vars: vars.clone(),
        chi_e,
        num_nodes: 1 << vars.n,
    })
}

//! Synchronous simulation of the distributed maximal independent set rule.
//!
//! In every round each active node draws fair bits until it sees a 0; the
//! number of bits drawn is its rank. Ranks go to all active neighbors, and a
//! node whose rank is a strict local extremum among its active neighbors
//! joins the set. New members and their neighbors drop out. Tied
//! neighborhoods simply retry in the next round.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

/// Which strict local extremum of the ranks joins the set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MisRule {
    /// Rank larger than every active neighbor's.
    #[default]
    StrictMax,
    /// Rank smaller than every active neighbor's. With geometric ranks a node
    /// of degree `d` qualifies with probability about `2^-(d+1)`, so dense
    /// graphs need very many rounds.
    StrictMin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MisResult {
    pub set: BTreeSet<u32>,
    pub rounds: usize,
    /// Rank bits drawn over all nodes and rounds.
    pub bits_drawn: u64,
    /// Number of (active node, round) pairs.
    pub node_rounds: u64,
    /// Bits sent over each directed channel `u → v`, summed over rounds.
    pub channel_bits_mean: f64,
    pub channel_bits_max: u64,
    pub seed: u64,
}

impl MisResult {
    /// Mean rank length, 2 in expectation.
    pub fn bits_per_node_round(&self) -> f64 {
        if self.node_rounds == 0 {
            0.0
        } else {
            self.bits_drawn as f64 / self.node_rounds as f64
        }
    }
}

fn geometric_rank<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    let mut bits = 1;
    while rng.random::<bool>() {
        bits += 1;
    }
    bits
}

pub fn distributed_mis_sim(g: &Graph, seed: u64) -> MisResult {
    distributed_mis_sim_with(g, seed, MisRule::default())
}

pub fn distributed_mis_sim_with(g: &Graph, seed: u64, rule: MisRule) -> MisResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let adj = g.adjacency();
    let n = g.num_nodes();
    let mut active = vec![true; n];
    let mut remaining = n;
    let mut set = BTreeSet::new();
    let mut rounds = 0;
    let (mut bits_drawn, mut node_rounds) = (0u64, 0u64);
    // channel_bits[u][k] is the traffic u → adj[u][k]
    let mut channel_bits: Vec<Vec<u64>> = adj.iter().map(|a| vec![0; a.len()]).collect();
    let mut rank = vec![0u64; n];
    while remaining > 0 {
        rounds += 1;
        for v in (0..n).filter(|&v| active[v]) {
            rank[v] = geometric_rank(&mut rng);
            bits_drawn += rank[v];
            node_rounds += 1;
        }
        let mut joins = Vec::new();
        for v in (0..n).filter(|&v| active[v]) {
            let mut extremum = true;
            for (k, &u) in adj[v].iter().enumerate() {
                if active[u as usize] {
                    channel_bits[v][k] += rank[v];
                    extremum &= match rule {
                        MisRule::StrictMax => rank[v] > rank[u as usize],
                        MisRule::StrictMin => rank[v] < rank[u as usize],
                    };
                }
            }
            if extremum {
                joins.push(v);
            }
        }
        for v in joins {
            set.insert(v as u32);
            for w in std::iter::once(v).chain(adj[v].iter().map(|&u| u as usize)) {
                if std::mem::replace(&mut active[w], false) {
                    remaining -= 1;
                }
            }
        }
    }
    let flat: Vec<u64> = channel_bits.into_iter().flatten().collect();
    let channel_bits_mean = if flat.is_empty() {
        0.0
    } else {
        flat.iter().sum::<u64>() as f64 / flat.len() as f64
    };
    MisResult {
        set,
        rounds,
        bits_drawn,
        node_rounds,
        channel_bits_mean,
        channel_bits_max: flat.into_iter().max().unwrap_or(0),
        seed,
    }
}

/// `(independent, maximal)` for the node set `set`.
pub fn verify_mis(g: &Graph, set: &BTreeSet<u32>) -> (bool, bool) {
    let independent = g
        .edges()
        .iter()
        .all(|(u, v)| !(set.contains(u) && set.contains(v)));
    let mut dominated = vec![false; g.num_nodes()];
    for &v in set {
        if let Some(d) = dominated.get_mut(v as usize) {
            *d = true;
        }
    }
    for &(u, v) in g.edges() {
        if set.contains(&u) {
            dominated[v as usize] = true;
        }
        if set.contains(&v) {
            dominated[u as usize] = true;
        }
    }
    (independent, dominated.iter().all(|&d| d))
}

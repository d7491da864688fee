//! Randomized implicit maximal matching on characteristic functions.
//!
//! Each outer iteration copies the remaining edges into a working set `E'`,
//! then repeatedly deletes every edge with probability 1/2 (using two fresh
//! 3-wise independent functions) as long as some node has two or more
//! incident edges. Edges that become isolated are collected and added to the
//! matching; afterwards all edges touching matched nodes are removed.
//!
//! With `sparsify`, `E'` is first thinned `D` times, `D = ⌈log₂|E|⌉`
//! decreasing by one per outer iteration.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::builders::{build_gt, build_neq};
use crate::error::{Error, Result};
use crate::graph::{decode_relation, EncodedGraph, Graph, GraphVars};
use crate::obdd::{FuncHandle, ObddManager};
use crate::random::{ceil_log2, random_func_3wise};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RmConfig {
    pub sparsify: bool,
    /// Inner iterations allowed per outer iteration; `None` means `64·(n+2)`.
    pub max_inner_iterations: Option<usize>,
    pub seed: u64,
    /// Collect garbage after every outer iteration.
    pub gc: bool,
}

impl Default for RmConfig {
    fn default() -> Self {
        Self {
            sparsify: false,
            max_inner_iterations: None,
            seed: 0,
            gc: true,
        }
    }
}

impl RmConfig {
    pub fn inner_cap(&self, n: usize) -> Result<usize> {
        match self.max_inner_iterations {
            Some(0) => Err(Error::Config(
                "inner iteration cap must be at least 1".into(),
            )),
            Some(c) => Ok(c),
            None => Ok(64 * (n + 2)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunStats {
    pub outer_iterations: usize,
    pub inner_iterations_total: usize,
    /// Inner iterations of each outer iteration.
    pub inner_per_outer: Vec<usize>,
    /// Functional operations charged during the run.
    pub func_ops: u64,
    /// Largest shared node count during the run.
    pub peak_live_nodes: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct MatchingResult {
    pub chi_m: FuncHandle,
    pub edges: BTreeSet<(u32, u32)>,
    pub stats: RunStats,
}

/// Outcome of one inner loop.
#[derive(Debug, Clone, Copy)]
pub struct InnerPhase {
    /// `E'` after the loop.
    pub remaining: FuncHandle,
    pub new_edges: FuncHandle,
    pub iterations: usize,
}

/// `T(x) = ∃y,z: (z ≠ y) ∧ E(x,y) ∧ E(x,z)`, nodes with two or more edges.
///
/// `z` is quantified before `E(x,y)` is conjoined; the operation count is
/// the same as for the single combined quantification.
pub fn contested_nodes(
    mgr: &mut ObddManager,
    vars: &GraphVars,
    e: FuncHandle,
) -> Result<FuncHandle> {
    let e_xz = vars.swap_yz(mgr, e)?;
    let neq = build_neq(mgr, &vars.y, &vars.z)?;
    let other = mgr.and(neq, e_xz)?;
    let other = mgr.exists(other, &vars.z)?;
    let both = mgr.and(e, other)?;
    Ok(mgr.exists(both, &vars.y)?)
}

/// `F(x,y) ∨ F(y,x)` with `F(x,y) = (x > y) ∧ (f_{r1}(x) ⊕ f_{r2}(y))`.
pub fn deletion_function(
    mgr: &mut ObddManager,
    vars: &GraphVars,
    rng: &mut ChaCha8Rng,
) -> Result<FuncHandle> {
    let (f1, _) = random_func_3wise(mgr, &vars.x, rng)?;
    let (f2, _) = random_func_3wise(mgr, &vars.y, rng)?;
    let gt = build_gt(mgr, &vars.x, &vars.y)?;
    let differ = mgr.xor(f1, f2)?;
    let f = mgr.and(gt, differ)?;
    let mirrored = vars.swap_xy(mgr, f)?;
    Ok(mgr.or(f, mirrored)?)
}

/// Runs the inner loop on the working edge set `e`.
///
/// If no node is contested to begin with, every edge of `e` is already
/// isolated and `new_edges = e`.
pub fn inner_phase(
    mgr: &mut ObddManager,
    vars: &GraphVars,
    mut e: FuncHandle,
    cap: usize,
    outer: usize,
    rng: &mut ChaCha8Rng,
) -> Result<InnerPhase> {
    let mut t = contested_nodes(mgr, vars, e)?;
    let mut new_edges = mgr.zero();
    let mut iterations = 0;
    while !t.is_false() {
        if iterations == cap {
            return Err(Error::InnerLoopCap { cap, outer });
        }
        iterations += 1;
        let f = deletion_function(mgr, vars, rng)?;
        e = mgr.and(e, f)?;
        t = contested_nodes(mgr, vars, e)?;
        let t_y = vars.swap_xy(mgr, t)?;
        let free_x = mgr.negate(t)?;
        let free_y = mgr.negate(t_y)?;
        let isolated = mgr.and(e, free_x)?;
        let isolated = mgr.and(isolated, free_y)?;
        new_edges = mgr.or(new_edges, isolated)?;
    }
    if iterations == 0 {
        new_edges = e;
    }
    Ok(InnerPhase {
        remaining: e,
        new_edges,
        iterations,
    })
}

/// Computes a maximal matching of the encoded graph.
///
/// With `cfg.gc`, unprotected handles other than `eg.chi_e` and the result
/// become stale.
pub fn maximal_matching_rm(
    mgr: &mut ObddManager,
    eg: &EncodedGraph,
    cfg: &RmConfig,
) -> Result<MatchingResult> {
    let vars = &eg.vars;
    let cap = cfg.inner_cap(vars.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ops_before = mgr.stats().op_count;
    mgr.reset_window_peak();

    let mut stats = RunStats {
        seed: cfg.seed,
        ..RunStats::default()
    };
    let mut chi_e = eg.chi_e;
    let mut chi_m = mgr.zero();
    let mut depth = if cfg.sparsify {
        ceil_log2(eg.num_edges(mgr)?)
    } else {
        0
    };
    while !chi_e.is_false() {
        stats.outer_iterations += 1;
        let mut e = chi_e;
        for _ in 0..depth {
            let f = deletion_function(mgr, vars, &mut rng)?;
            e = mgr.and(e, f)?;
        }
        depth = depth.saturating_sub(1);

        let phase = inner_phase(mgr, vars, e, cap, stats.outer_iterations, &mut rng)?;
        stats.inner_iterations_total += phase.iterations;
        stats.inner_per_outer.push(phase.iterations);
        log::debug!(
            "outer {}: {} inner iterations",
            stats.outer_iterations,
            phase.iterations
        );

        chi_m = mgr.or(chi_m, phase.new_edges)?;
        let matched = mgr.exists(chi_m, &vars.y)?;
        let matched_y = vars.swap_xy(mgr, matched)?;
        let free_x = mgr.negate(matched)?;
        let free_y = mgr.negate(matched_y)?;
        chi_e = mgr.and(chi_e, free_x)?;
        chi_e = mgr.and(chi_e, free_y)?;
        if cfg.gc {
            mgr.collect_garbage(&[eg.chi_e, chi_e, chi_m])?;
        }
    }
    stats.func_ops = mgr.stats().op_count - ops_before;
    stats.peak_live_nodes = mgr.stats().window_peak_live_nodes;
    let edges = decode_relation(mgr, vars, chi_m)?;
    Ok(MatchingResult {
        chi_m,
        edges,
        stats,
    })
}

/// `(is_matching, is_maximal)` of `m` in `g`.
pub fn verify_matching(g: &Graph, m: &BTreeSet<(u32, u32)>) -> Result<(bool, bool)> {
    if let Some(&(u, v)) = m.iter().find(|&&(u, v)| !g.contains(u, v)) {
        return Err(Error::Validation(format!(
            "matching edge ({u}, {v}) is not an edge of the graph"
        )));
    }
    let mut covered = vec![false; g.num_nodes()];
    let mut is_matching = true;
    for &(u, v) in m {
        for w in [u, v] {
            is_matching &= !std::mem::replace(&mut covered[w as usize], true);
        }
    }
    let is_maximal = g
        .edges()
        .iter()
        .all(|&(u, v)| covered[u as usize] || covered[v as usize]);
    Ok((is_matching, is_maximal))
}

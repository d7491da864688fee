//! Shared store of reduced ordered binary decision diagrams.
//!
//! All functions live in one [`ObddManager`]. Nodes are hash-consed per
//! `(level, lo, hi)` triple and no node ever has `lo == hi`, so two
//! [`FuncHandle`]s from the same manager are equal exactly when they denote
//! the same Boolean function.
//!
//! The manager counts *functional operations* the way implicit graph
//! algorithms are usually analysed: one top-level synthesis, negation,
//! restriction, per-variable quantification step or argument-relabeling
//! step is one operation. Direct constructions (projections, minterms,
//! the builders in [`crate::builders`]) are free.
//!
//! There are no complemented edges; negation is a memoized recursion.

mod apply;
mod query;
mod relabel;

use std::sync::atomic::{AtomicU32, Ordering};

use rustc_hash::FxHashMap;
use thiserror::Error;

pub use apply::{BoolOp, Quantifier};
pub use query::SizeStats;

/// Errors raised by the node store and its operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObddError {
    #[error("invalid variable order: {0}")]
    InvalidOrder(String),
    #[error("variable index {index} out of range for {num_vars} variables")]
    VarOutOfRange { index: usize, num_vars: usize },
    #[error("handle belongs to a different manager")]
    ForeignHandle,
    #[error("handle refers to a node released by garbage collection")]
    StaleHandle,
    #[error("assignment has {got} bits, expected {expected}")]
    AssignmentLength { got: usize, expected: usize },
    #[error("invalid argument blocks: {0}")]
    InvalidBlocks(String),
    #[error("function depends on variable {var}, outside the first {support_size} variables")]
    SupportTooSmall { var: usize, support_size: usize },
}

pub type ObddResult<T> = Result<T, ObddError>;

/// Largest supported variable count; satisfying-assignment counts are kept in `u128`.
pub const MAX_VARS: usize = 120;

pub(crate) const FALSE_ID: u32 = 0;
pub(crate) const TRUE_ID: u32 = 1;
const DEAD_LEVEL: u32 = u32::MAX;

static NEXT_MANAGER_ID: AtomicU32 = AtomicU32::new(1);

/// A permutation assigning each variable a level (position in the test order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarOrder {
    var_at_level: Vec<usize>,
}

impl VarOrder {
    /// Builds an order from the list of variables read top to bottom.
    pub fn new(var_at_level: Vec<usize>) -> ObddResult<Self> {
        let m = var_at_level.len();
        let mut seen = vec![false; m];
        for &v in &var_at_level {
            if v >= m {
                return Err(ObddError::InvalidOrder(format!(
                    "variable {v} out of range for {m} variables"
                )));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(ObddError::InvalidOrder(format!("variable {v} repeated")));
            }
        }
        Ok(Self { var_at_level })
    }

    pub fn identity(num_vars: usize) -> Self {
        Self {
            var_at_level: (0..num_vars).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.var_at_level.len()
    }

    pub fn is_empty(&self) -> bool {
        self.var_at_level.is_empty()
    }

    pub fn var_at_level(&self, level: usize) -> usize {
        self.var_at_level[level]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.var_at_level
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct Node {
    pub(crate) level: u32,
    pub(crate) lo: u32,
    pub(crate) hi: u32,
}

/// Reference to a canonical node of one manager.
///
/// Handles are plain values; the manager does not track them unless
/// [`ObddManager::protect`] is called. A handle whose node was released by
/// [`ObddManager::collect_garbage`] is rejected with [`ObddError::StaleHandle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuncHandle {
    mgr: u32,
    id: u32,
    gen: u32,
}

impl FuncHandle {
    /// True for the two constant functions.
    pub fn is_constant(self) -> bool {
        self.id <= TRUE_ID
    }

    pub fn is_false(self) -> bool {
        self.id == FALSE_ID
    }

    pub fn is_true(self) -> bool {
        self.id == TRUE_ID
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum CacheKey {
    Apply(BoolOp, u32, u32),
    Not(u32),
    Restrict(u32, bool, u32),
    Quantify(u32, Quantifier, u32),
    Relabel(u32, u32),
}

/// Node store, unique table, operation cache and counters.
#[derive(Debug)]
pub struct ObddManager {
    id: u32,
    order: VarOrder,
    level_of_var: Vec<u32>,
    nodes: Vec<Node>,
    gens: Vec<u32>,
    free: Vec<u32>,
    unique: FxHashMap<Node, u32>,
    cache: FxHashMap<CacheKey, u32>,
    quant_sets: Vec<Vec<bool>>,
    quant_set_ids: FxHashMap<Vec<bool>, u32>,
    relabel_maps: Vec<Vec<u32>>,
    relabel_map_ids: FxHashMap<Vec<u32>, u32>,
    protected: FxHashMap<u32, usize>,
    op_count: u64,
    peak_live: usize,
    window_peak_live: usize,
}

impl ObddManager {
    /// Creates a manager over `num_vars` variables read in `order`.
    pub fn new(num_vars: usize, order: VarOrder) -> ObddResult<Self> {
        if order.len() != num_vars {
            return Err(ObddError::InvalidOrder(format!(
                "order has {} entries for {num_vars} variables",
                order.len()
            )));
        }
        if num_vars > MAX_VARS {
            return Err(ObddError::InvalidOrder(format!(
                "{num_vars} variables exceeds the supported maximum of {MAX_VARS}"
            )));
        }
        let mut level_of_var = vec![0u32; num_vars];
        for (level, &v) in order.as_slice().iter().enumerate() {
            level_of_var[v] = level as u32;
        }
        let sink_level = num_vars as u32;
        let sinks = vec![
            Node {
                level: sink_level,
                lo: FALSE_ID,
                hi: FALSE_ID,
            },
            Node {
                level: sink_level,
                lo: TRUE_ID,
                hi: TRUE_ID,
            },
        ];
        Ok(Self {
            id: NEXT_MANAGER_ID.fetch_add(1, Ordering::Relaxed),
            order,
            level_of_var,
            nodes: sinks,
            gens: vec![0, 0],
            free: Vec::new(),
            unique: FxHashMap::default(),
            cache: FxHashMap::default(),
            quant_sets: Vec::new(),
            quant_set_ids: FxHashMap::default(),
            relabel_maps: Vec::new(),
            relabel_map_ids: FxHashMap::default(),
            protected: FxHashMap::default(),
            op_count: 0,
            peak_live: 2,
            window_peak_live: 2,
        })
    }

    /// Manager whose order is the identity permutation.
    pub fn with_identity_order(num_vars: usize) -> ObddResult<Self> {
        Self::new(num_vars, VarOrder::identity(num_vars))
    }

    pub fn num_vars(&self) -> usize {
        self.level_of_var.len()
    }

    pub fn order(&self) -> &VarOrder {
        &self.order
    }

    pub fn level_of(&self, var: usize) -> usize {
        self.level_of_var[var] as usize
    }

    pub fn constant(&self, value: bool) -> FuncHandle {
        self.handle(if value { TRUE_ID } else { FALSE_ID })
    }

    pub fn zero(&self) -> FuncHandle {
        self.constant(false)
    }

    pub fn one(&self) -> FuncHandle {
        self.constant(true)
    }

    /// The projection `x_var`.
    pub fn var(&mut self, var: usize) -> ObddResult<FuncHandle> {
        self.check_var(var)?;
        let id = self.mk(self.level_of_var[var], FALSE_ID, TRUE_ID);
        self.touch_peak();
        Ok(self.handle(id))
    }

    /// The negated projection `¬x_var`.
    pub fn nvar(&mut self, var: usize) -> ObddResult<FuncHandle> {
        self.check_var(var)?;
        let id = self.mk(self.level_of_var[var], TRUE_ID, FALSE_ID);
        self.touch_peak();
        Ok(self.handle(id))
    }

    /// Conjunction of literals, built directly without synthesis.
    pub fn cube(&mut self, literals: &[(usize, bool)]) -> ObddResult<FuncHandle> {
        let mut lits: Vec<(u32, bool)> = Vec::with_capacity(literals.len());
        for &(v, b) in literals {
            self.check_var(v)?;
            lits.push((self.level_of_var[v], b));
        }
        lits.sort_unstable_by_key(|l| std::cmp::Reverse(l.0));
        let mut acc = TRUE_ID;
        let mut last: Option<(u32, bool)> = None;
        for (level, b) in lits {
            if let Some((l, pb)) = last {
                if l == level {
                    if pb != b {
                        return Ok(self.zero());
                    }
                    continue;
                }
            }
            acc = if b {
                self.mk(level, FALSE_ID, acc)
            } else {
                self.mk(level, acc, FALSE_ID)
            };
            last = Some((level, b));
        }
        self.touch_peak();
        Ok(self.handle(acc))
    }

    /// Builds the function whose value on `vars = bits` is `table[Σ bits[i]·2^i]`.
    pub fn from_truth_table(&mut self, vars: &[usize], table: &[bool]) -> ObddResult<FuncHandle> {
        if table.len() != 1usize << vars.len() {
            return Err(ObddError::AssignmentLength {
                got: table.len(),
                expected: 1usize << vars.len(),
            });
        }
        let mut by_level: Vec<(u32, usize)> = Vec::with_capacity(vars.len());
        for (pos, &v) in vars.iter().enumerate() {
            self.check_var(v)?;
            by_level.push((self.level_of_var[v], pos));
        }
        by_level.sort_unstable();
        if by_level.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(ObddError::InvalidBlocks("repeated variable".into()));
        }
        let r = self.table_rec(&by_level, table, 0);
        self.touch_peak();
        Ok(self.handle(r))
    }

    fn table_rec(&mut self, by_level: &[(u32, usize)], table: &[bool], fixed: usize) -> u32 {
        match by_level.split_first() {
            None => table[fixed] as u32,
            Some((&(level, pos), rest)) => {
                let lo = self.table_rec(rest, table, fixed);
                let hi = self.table_rec(rest, table, fixed | (1 << pos));
                self.mk(level, lo, hi)
            }
        }
    }

    /// Handle identity; never charged as a functional operation.
    pub fn equal(&self, f: FuncHandle, g: FuncHandle) -> ObddResult<bool> {
        let a = self.check(f)?;
        let b = self.check(g)?;
        Ok(a == b)
    }

    /// Keeps `f` alive across [`collect_garbage`](Self::collect_garbage) until unprotected.
    pub fn protect(&mut self, f: FuncHandle) -> ObddResult<()> {
        let id = self.check(f)?;
        *self.protected.entry(id).or_insert(0) += 1;
        Ok(())
    }

    pub fn unprotect(&mut self, f: FuncHandle) -> ObddResult<()> {
        let id = self.check(f)?;
        if let Some(c) = self.protected.get_mut(&id) {
            *c -= 1;
            if *c == 0 {
                self.protected.remove(&id);
            }
        }
        Ok(())
    }

    /// Releases every node not reachable from `roots` or a protected handle.
    ///
    /// Clears the operation cache. Returns the number of released nodes.
    pub fn collect_garbage(&mut self, roots: &[FuncHandle]) -> ObddResult<usize> {
        let mut stack: Vec<u32> = Vec::with_capacity(roots.len() + self.protected.len());
        for &r in roots {
            stack.push(self.check(r)?);
        }
        stack.extend(self.protected.keys().copied());
        let mut marked = vec![false; self.nodes.len()];
        marked[FALSE_ID as usize] = true;
        marked[TRUE_ID as usize] = true;
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut marked[id as usize], true) {
                continue;
            }
            let n = self.nodes[id as usize];
            stack.push(n.lo);
            stack.push(n.hi);
        }
        let mut released = 0;
        for id in 2..self.nodes.len() {
            let n = self.nodes[id];
            if n.level == DEAD_LEVEL || marked[id] {
                continue;
            }
            self.unique.remove(&n);
            self.nodes[id].level = DEAD_LEVEL;
            self.gens[id] = self.gens[id].wrapping_add(1);
            self.free.push(id as u32);
            released += 1;
        }
        self.cache.clear();
        log::debug!("gc released {released} nodes, {} live", self.live_nodes());
        Ok(released)
    }

    pub(crate) fn live_nodes(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    pub(crate) fn handle(&self, id: u32) -> FuncHandle {
        FuncHandle {
            mgr: self.id,
            id,
            gen: self.gens[id as usize],
        }
    }

    pub(crate) fn check(&self, f: FuncHandle) -> ObddResult<u32> {
        if f.mgr != self.id {
            return Err(ObddError::ForeignHandle);
        }
        let idx = f.id as usize;
        if idx >= self.nodes.len() || self.gens[idx] != f.gen || self.nodes[idx].level == DEAD_LEVEL
        {
            return Err(ObddError::StaleHandle);
        }
        Ok(f.id)
    }

    pub(crate) fn check_var(&self, var: usize) -> ObddResult<()> {
        if var >= self.num_vars() {
            return Err(ObddError::VarOutOfRange {
                index: var,
                num_vars: self.num_vars(),
            });
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn node(&self, id: u32) -> Node {
        self.nodes[id as usize]
    }

    #[inline]
    pub(crate) fn level(&self, id: u32) -> u32 {
        self.nodes[id as usize].level
    }

    /// Returns the unique node for `(level, lo, hi)`, applying the reduction rule.
    pub(crate) fn mk(&mut self, level: u32, lo: u32, hi: u32) -> u32 {
        if lo == hi {
            return lo;
        }
        debug_assert!(level < self.level(lo) && level < self.level(hi));
        let node = Node { level, lo, hi };
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                self.gens.push(0);
                (self.nodes.len() - 1) as u32
            }
        };
        self.unique.insert(node, id);
        id
    }

    /// Records the current live count in the peak counters.
    pub(crate) fn touch_peak(&mut self) {
        let live = self.live_nodes();
        if live > self.peak_live {
            self.peak_live = live;
        }
        if live > self.window_peak_live {
            self.window_peak_live = live;
        }
    }

    pub(crate) fn charge(&mut self, ops: u64) {
        self.op_count += ops;
        self.touch_peak();
    }

    pub(crate) fn intern_quant_set(&mut self, mask: Vec<bool>) -> u32 {
        if let Some(&id) = self.quant_set_ids.get(&mask) {
            return id;
        }
        let id = self.quant_sets.len() as u32;
        self.quant_sets.push(mask.clone());
        self.quant_set_ids.insert(mask, id);
        id
    }

    pub(crate) fn intern_relabel_map(&mut self, map: Vec<u32>) -> u32 {
        if let Some(&id) = self.relabel_map_ids.get(&map) {
            return id;
        }
        let id = self.relabel_maps.len() as u32;
        self.relabel_maps.push(map.clone());
        self.relabel_map_ids.insert(map, id);
        id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_manager_holds_only_sinks() {
        let m = ObddManager::with_identity_order(4).unwrap();
        let s = m.stats();
        assert_eq!(s.live_nodes, 2);
        assert_eq!(s.op_count, 0);
        assert!(m.one().is_true());
        assert!(m.zero().is_false());
    }

    #[test]
    fn zero_variable_manager_evaluates_constants() {
        let m = ObddManager::with_identity_order(0).unwrap();
        assert!(m.evaluate(m.one(), &[]).unwrap());
        assert!(!m.evaluate(m.zero(), &[]).unwrap());
    }

    #[test]
    fn order_must_be_a_permutation() {
        assert!(ObddManager::new(4, VarOrder::new(vec![3, 1, 0, 2]).unwrap()).is_ok());
        assert!(matches!(
            VarOrder::new(vec![3, 1, 0, 0]),
            Err(ObddError::InvalidOrder(_))
        ));
        assert!(VarOrder::new(vec![0, 4, 1, 2]).is_err());
        assert!(ObddManager::new(3, VarOrder::identity(4)).is_err());
    }

    #[test]
    fn projection_is_canonical() {
        let mut m = ObddManager::with_identity_order(4).unwrap();
        let a = m.var(2).unwrap();
        let b = m.var(2).unwrap();
        assert_eq!(a, b);
        assert!(m.evaluate(a, &[false, false, true, false]).unwrap());
        assert!(!m.evaluate(a, &[false; 4]).unwrap());
        assert_eq!(m.internal_node_count(a).unwrap(), 1);
        assert!(matches!(
            m.var(4),
            Err(ObddError::VarOutOfRange { index: 4, .. })
        ));
    }

    #[test]
    fn foreign_handles_are_rejected() {
        let mut a = ObddManager::with_identity_order(2).unwrap();
        let mut b = ObddManager::with_identity_order(2).unwrap();
        let fa = a.var(0).unwrap();
        let fb = b.var(0).unwrap();
        assert_eq!(a.apply(fa, fb, BoolOp::AND), Err(ObddError::ForeignHandle));
        assert_eq!(a.equal(fa, fb), Err(ObddError::ForeignHandle));
    }

    #[test]
    fn cube_matches_conjunction() {
        let mut m = ObddManager::with_identity_order(3).unwrap();
        let c = m.cube(&[(2, true), (0, false)]).unwrap();
        let x0 = m.var(0).unwrap();
        let nx0 = m.negate(x0).unwrap();
        let x2 = m.var(2).unwrap();
        let want = m.apply(nx0, x2, BoolOp::AND).unwrap();
        assert_eq!(c, want);
        let contradiction = m.cube(&[(1, true), (1, false)]).unwrap();
        assert!(contradiction.is_false());
    }

    #[test]
    fn truth_table_import_respects_variable_positions() {
        let order = VarOrder::new(vec![2, 0, 1]).unwrap();
        let mut m = ObddManager::new(3, order).unwrap();
        // value = bits[0] ∧ ¬bits[1] with vars = [1, 2]
        let table = [false, true, false, false];
        let f = m.from_truth_table(&[1, 2], &table).unwrap();
        let x1 = m.var(1).unwrap();
        let x2 = m.var(2).unwrap();
        assert_eq!(f, m.apply(x1, x2, BoolOp::DIFF).unwrap());
        assert!(m.from_truth_table(&[1, 2], &[true]).is_err());
    }

    #[test]
    fn garbage_collection_releases_unreachable_nodes() {
        let mut m = ObddManager::with_identity_order(6).unwrap();
        let a = m.var(0).unwrap();
        let b = m.var(1).unwrap();
        let keep = m.apply(a, b, BoolOp::XOR).unwrap();
        let c = m.var(4).unwrap();
        let drop = m.apply(keep, c, BoolOp::AND).unwrap();
        let before = m.stats().live_nodes;
        let released = m.collect_garbage(&[keep]).unwrap();
        assert!(released > 0);
        assert_eq!(m.stats().live_nodes, before - released);
        assert_eq!(m.stats().peak_live_nodes, before);
        assert_eq!(m.equal(drop, drop), Err(ObddError::StaleHandle));
        // surviving handles keep working, and rebuilding yields a fresh canonical node
        let c2 = m.var(4).unwrap();
        let again = m.apply(keep, c2, BoolOp::AND).unwrap();
        assert!(m
            .evaluate(again, &[true, false, false, false, true, false])
            .unwrap());
    }

    #[test]
    fn protected_handles_survive_collection() {
        let mut m = ObddManager::with_identity_order(3).unwrap();
        let a = m.var(0).unwrap();
        let b = m.var(2).unwrap();
        let f = m.apply(a, b, BoolOp::OR).unwrap();
        m.protect(f).unwrap();
        m.collect_garbage(&[]).unwrap();
        assert!(m.equal(f, f).unwrap());
        m.unprotect(f).unwrap();
        m.collect_garbage(&[]).unwrap();
        assert_eq!(m.equal(f, f), Err(ObddError::StaleHandle));
    }
}

//! Direct constructions of helper functions over vectors of variables.
//!
//! Every builder here is a deterministic automaton that reads the involved
//! variables in the manager's order. The diagram is produced bottom-up with
//! the unique table, so the result is the canonical reduced OBDD and no
//! functional operations are charged.
//!
//! Vectors follow the value convention `|b| = Σ b_i · 2^i`: position 0 of a
//! block is the least significant bit.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::hash::Hash;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::obdd::{FuncHandle, ObddError, ObddManager, FALSE_ID, TRUE_ID};

/// A fixed-length bit vector, least significant bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector(Vec<bool>);

impl BitVector {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    /// The `len`-bit encoding of `value` (higher bits are dropped).
    pub fn from_value(value: u64, len: usize) -> Self {
        Self((0..len).map(|i| i < 64 && (value >> i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// `|b|`; bits beyond position 63 must be zero.
    pub fn value(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| {
                assert!(i < 64, "bit vector value does not fit in u64");
                1u64 << i
            })
            .sum()
    }

    /// Hex digits of `|b|`, most significant first, `⌈len/4⌉` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.0.len().div_ceil(4).max(1);
        (0..digits)
            .rev()
            .map(|d| {
                let nibble = (0..4)
                    .filter(|&k| self.0.get(4 * d + k).copied().unwrap_or(false))
                    .fold(0u32, |acc, k| acc | 1 << k);
                char::from_digit(nibble, 16).unwrap()
            })
            .collect()
    }
}

/// A finite automaton reading one variable per step, top level first.
pub(crate) trait LevelAutomaton {
    type State: Clone + Eq + Hash;
    fn start(&self) -> Self::State;
    fn step(&self, state: &Self::State, step: usize, bit: bool) -> Self::State;
    fn accept(&self, state: &Self::State) -> bool;
}

/// Builds the OBDD of `automaton` reading `levels` (strictly ascending) in turn.
///
/// Only forward-reachable states get nodes; equivalent states collapse in the
/// unique table.
pub(crate) fn build_automaton<A: LevelAutomaton>(
    mgr: &mut ObddManager,
    levels: &[u32],
    automaton: &A,
) -> u32 {
    debug_assert!(levels.windows(2).all(|w| w[0] < w[1]));
    let mut layers: Vec<Vec<A::State>> = vec![vec![automaton.start()]];
    let mut edges: Vec<Vec<(usize, usize)>> = Vec::with_capacity(levels.len());
    for step in 0..levels.len() {
        let mut index: FxHashMap<A::State, usize> = FxHashMap::default();
        let mut next: Vec<A::State> = Vec::new();
        let mut intern = |s: A::State| match index.entry(s) {
            Entry::Occupied(e) => *e.get(),
            Entry::Vacant(e) => {
                next.push(e.key().clone());
                *e.insert(next.len() - 1)
            }
        };
        let layer_edges: Vec<(usize, usize)> = layers[step]
            .iter()
            .map(|s| {
                let lo = intern(automaton.step(s, step, false));
                let hi = intern(automaton.step(s, step, true));
                (lo, hi)
            })
            .collect();
        edges.push(layer_edges);
        layers.push(next);
    }
    let mut below: Vec<u32> = layers[levels.len()]
        .iter()
        .map(|s| {
            if automaton.accept(s) {
                TRUE_ID
            } else {
                FALSE_ID
            }
        })
        .collect();
    for step in (0..levels.len()).rev() {
        below = edges[step]
            .iter()
            .map(|&(lo, hi)| mgr.mk(levels[step], below[lo], below[hi]))
            .collect();
    }
    mgr.touch_peak();
    below[0]
}

/// Sorts `vars` by level, returning `(level, original position)` pairs.
pub(crate) fn by_level(mgr: &ObddManager, vars: &[usize]) -> Result<Vec<(u32, usize)>> {
    let mut out = Vec::with_capacity(vars.len());
    for (pos, &v) in vars.iter().enumerate() {
        if v >= mgr.num_vars() {
            return Err(ObddError::VarOutOfRange {
                index: v,
                num_vars: mgr.num_vars(),
            }
            .into());
        }
        out.push((mgr.level_of(v) as u32, pos));
    }
    out.sort_unstable();
    if out.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(ObddError::InvalidBlocks("a variable is used twice".into()).into());
    }
    Ok(out)
}

struct Parity {
    start: bool,
}

impl LevelAutomaton for Parity {
    type State = bool;
    fn start(&self) -> bool {
        self.start
    }
    fn step(&self, s: &bool, _: usize, bit: bool) -> bool {
        *s ^ bit
    }
    fn accept(&self, s: &bool) -> bool {
        *s
    }
}

/// `⊕_i (r_i ∧ x_i) ⊕ r_n` for the variables `block[i]`.
///
/// The diagram reads only the positions with `r_i = 1` and has width at most 2.
pub fn build_ip_const(
    mgr: &mut ObddManager,
    block: &[usize],
    r: &BitVector,
    r_n: bool,
) -> Result<FuncHandle> {
    if r.len() != block.len() {
        return Err(Error::Config(format!(
            "coefficient vector has {} bits for a block of {}",
            r.len(),
            block.len()
        )));
    }
    let active: Vec<usize> = block
        .iter()
        .zip(r.bits())
        .filter(|(_, &ri)| ri)
        .map(|(&v, _)| v)
        .collect();
    let levels: Vec<u32> = by_level(mgr, &active)?
        .into_iter()
        .map(|(l, _)| l)
        .collect();
    let id = build_automaton(mgr, &levels, &Parity { start: r_n });
    Ok(mgr.handle(id))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    Greater,
    LessEq,
    NotEqual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Side {
    A,
    B,
}

/// Positional comparison of two vectors, one of which may be constant.
///
/// The state keeps the most significant differing position seen so far
/// (normalised against the positions still unread) plus the bits of
/// positions for which only one side has been read.
struct Compare {
    relation: Relation,
    roles: Vec<(u32, Side)>,
    constant_b: Option<Vec<bool>>,
    min_open: Vec<u32>,
    max_open: Vec<u32>,
}

const DECIDED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CompareState {
    best: Option<(u32, Ordering)>,
    pending: Vec<(u32, Side, bool)>,
}

impl Compare {
    fn new(relation: Relation, roles: Vec<(u32, Side)>, constant_b: Option<Vec<bool>>) -> Self {
        let steps = roles.len();
        let mut remaining: FxHashMap<u32, usize> = FxHashMap::default();
        for &(pos, _) in &roles {
            *remaining.entry(pos).or_insert(0) += 1;
        }
        let mut open: std::collections::BTreeSet<u32> = remaining.keys().copied().collect();
        let mut min_open = vec![DECIDED; steps];
        let mut max_open = vec![0; steps];
        for (i, &(pos, _)) in roles.iter().enumerate() {
            let c = remaining.get_mut(&pos).unwrap();
            *c -= 1;
            if *c == 0 {
                open.remove(&pos);
            }
            min_open[i] = open.first().copied().unwrap_or(DECIDED);
            max_open[i] = open.last().copied().unwrap_or(0);
        }
        Self {
            relation,
            roles,
            constant_b,
            min_open,
            max_open,
        }
    }

    fn settle(&self, best: &mut Option<(u32, Ordering)>, pos: u32, a: bool, b: bool) {
        if a == b {
            return;
        }
        let ord = a.cmp(&b);
        if self.relation == Relation::NotEqual {
            *best = Some((DECIDED, ord));
            return;
        }
        match *best {
            Some((p, _)) if p >= pos => {}
            _ => *best = Some((pos, ord)),
        }
    }
}

impl LevelAutomaton for Compare {
    type State = CompareState;

    fn start(&self) -> CompareState {
        CompareState {
            best: None,
            pending: Vec::new(),
        }
    }

    fn step(&self, s: &CompareState, step: usize, bit: bool) -> CompareState {
        let (pos, side) = self.roles[step];
        let mut next = s.clone();
        if let Some(cb) = &self.constant_b {
            self.settle(&mut next.best, pos, bit, cb[pos as usize]);
        } else if let Some(i) = next.pending.iter().position(|&(p, _, _)| p == pos) {
            let (_, other_side, other) = next.pending.remove(i);
            debug_assert_ne!(other_side, side);
            let (a, b) = if side == Side::A {
                (bit, other)
            } else {
                (other, bit)
            };
            self.settle(&mut next.best, pos, a, b);
        } else {
            let at = next.pending.partition_point(|&(p, _, _)| p < pos);
            next.pending.insert(at, (pos, side, bit));
        }
        if let Some((p, ord)) = next.best {
            if p != DECIDED {
                if self.min_open[step] == DECIDED || p > self.max_open[step] {
                    next.best = Some((DECIDED, ord));
                } else if p < self.min_open[step] {
                    next.best = Some((0, ord));
                }
            }
        }
        next
    }

    fn accept(&self, s: &CompareState) -> bool {
        let ord = s.best.map_or(Ordering::Equal, |(_, o)| o);
        match self.relation {
            Relation::Greater => ord == Ordering::Greater,
            Relation::LessEq => ord != Ordering::Greater,
            Relation::NotEqual => ord != Ordering::Equal,
        }
    }
}

fn compare_blocks(
    mgr: &mut ObddManager,
    a: &[usize],
    b: &[usize],
    relation: Relation,
) -> Result<FuncHandle> {
    if a.len() != b.len() {
        return Err(ObddError::InvalidBlocks(format!(
            "blocks of length {} and {} cannot be compared",
            a.len(),
            b.len()
        ))
        .into());
    }
    let all: Vec<usize> = a.iter().chain(b).copied().collect();
    let n = a.len();
    let sorted = by_level(mgr, &all)?;
    let levels: Vec<u32> = sorted.iter().map(|&(l, _)| l).collect();
    let roles = sorted
        .iter()
        .map(|&(_, idx)| {
            if idx < n {
                (idx as u32, Side::A)
            } else {
                ((idx - n) as u32, Side::B)
            }
        })
        .collect();
    let automaton = Compare::new(relation, roles, None);
    let id = build_automaton(mgr, &levels, &automaton);
    Ok(mgr.handle(id))
}

/// `|x| > |y|` as unsigned integers.
pub fn build_gt(mgr: &mut ObddManager, xblock: &[usize], yblock: &[usize]) -> Result<FuncHandle> {
    compare_blocks(mgr, xblock, yblock, Relation::Greater)
}

/// `a ≠ b` as bit vectors.
pub fn build_neq(mgr: &mut ObddManager, ablock: &[usize], bblock: &[usize]) -> Result<FuncHandle> {
    compare_blocks(mgr, ablock, bblock, Relation::NotEqual)
}

/// `|c| ≤ |s|` for the value `c` read from `block`.
pub fn build_threshold_le(
    mgr: &mut ObddManager,
    block: &[usize],
    s: &BitVector,
) -> Result<FuncHandle> {
    if s.len() != block.len() {
        return Err(Error::Config(format!(
            "threshold has {} bits for a block of {}",
            s.len(),
            block.len()
        )));
    }
    let sorted = by_level(mgr, block)?;
    let levels: Vec<u32> = sorted.iter().map(|&(l, _)| l).collect();
    let roles = sorted.iter().map(|&(_, i)| (i as u32, Side::A)).collect();
    let automaton = Compare::new(Relation::LessEq, roles, Some(s.bits().to_vec()));
    let id = build_automaton(mgr, &levels, &automaton);
    Ok(mgr.handle(id))
}

struct IndexValue {
    weights: Vec<u64>,
    accept: Vec<bool>,
}

impl LevelAutomaton for IndexValue {
    type State = u64;
    fn start(&self) -> u64 {
        0
    }
    fn step(&self, s: &u64, step: usize, bit: bool) -> u64 {
        if bit {
            s | self.weights[step]
        } else {
            *s
        }
    }
    fn accept(&self, s: &u64) -> bool {
        self.accept[*s as usize]
    }
}

/// `pred(|i|)` for the small index vector read from `block` (at most 20 bits).
pub fn build_index_predicate(
    mgr: &mut ObddManager,
    block: &[usize],
    pred: impl Fn(u64) -> bool,
) -> Result<FuncHandle> {
    if block.len() > 20 {
        return Err(Error::Config(format!(
            "index block of {} bits is too wide",
            block.len()
        )));
    }
    let sorted = by_level(mgr, block)?;
    let levels: Vec<u32> = sorted.iter().map(|&(l, _)| l).collect();
    let automaton = IndexValue {
        weights: sorted.iter().map(|&(_, i)| 1u64 << i).collect(),
        accept: (0..1u64 << block.len()).map(pred).collect(),
    };
    let id = build_automaton(mgr, &levels, &automaton);
    Ok(mgr.handle(id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obdd::{BoolOp, VarOrder};

    fn interleaved(n: usize) -> (ObddManager, Vec<usize>, Vec<usize>) {
        // x_i = i, y_i = n + i, order x_0 y_0 x_1 y_1 ...
        let order: Vec<usize> = (0..n).flat_map(|i| [i, n + i]).collect();
        let m = ObddManager::new(2 * n, VarOrder::new(order).unwrap()).unwrap();
        (m, (0..n).collect(), (n..2 * n).collect())
    }

    fn assignment(n: usize, x: u64, y: u64) -> Vec<bool> {
        (0..n)
            .map(|i| (x >> i) & 1 == 1)
            .chain((0..n).map(|i| (y >> i) & 1 == 1))
            .collect()
    }

    #[test]
    fn bit_vector_values() {
        let b = BitVector::from_value(0b101101, 6);
        assert_eq!(b.bits(), &[true, false, true, true, false, true]);
        assert_eq!(b.value(), 45);
        assert_eq!(b.to_hex(), "2d");
        assert_eq!(BitVector::zeros(0).to_hex(), "0");
    }

    #[test]
    fn inner_product_with_the_figure_vector() {
        let mut m = ObddManager::with_identity_order(6).unwrap();
        let block: Vec<usize> = (0..6).collect();
        let r = BitVector::from_bits(vec![true, false, true, true, false, true]);
        let f = build_ip_const(&mut m, &block, &r, false).unwrap();
        assert_eq!(m.width_profile(f).unwrap(), vec![1, 0, 2, 2, 0, 2]);
        assert_eq!(m.width(f).unwrap(), 2);
        // four coefficients are set, so the all-ones input has even parity
        assert!(!m.evaluate(f, &[true; 6]).unwrap());
        assert!(m
            .evaluate(f, &[true, false, false, false, false, false])
            .unwrap());
        assert_eq!(m.stats().op_count, 0);
    }

    #[test]
    fn inner_product_with_zero_vector_is_constant() {
        let mut m = ObddManager::with_identity_order(4).unwrap();
        let f = build_ip_const(&mut m, &[0, 1, 2, 3], &BitVector::zeros(4), true).unwrap();
        assert!(f.is_true());
    }

    #[test]
    fn comparator_exhaustive_n3() {
        let (mut m, x, y) = interleaved(3);
        let gt = build_gt(&mut m, &x, &y).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                assert_eq!(m.evaluate(gt, &assignment(3, a, b)).unwrap(), a > b);
            }
        }
        assert!(m.evaluate(gt, &assignment(3, 5, 3)).unwrap());
        assert!(!m.evaluate(gt, &assignment(3, 3, 5)).unwrap());
        assert!(!m.evaluate(gt, &assignment(3, 4, 4)).unwrap());
        assert!(m.width(gt).unwrap() <= 3);
    }

    #[test]
    fn comparator_is_irreflexive() {
        let (mut m, x, y) = interleaved(4);
        let gt = build_gt(&mut m, &x, &y).unwrap();
        let eq = build_neq(&mut m, &x, &y).unwrap();
        let eq = m.negate(eq).unwrap();
        assert!(m.apply(gt, eq, BoolOp::AND).unwrap().is_false());
    }

    #[test]
    fn comparator_under_non_interleaved_order() {
        // all y bits first, most significant first
        let order = VarOrder::new(vec![5, 4, 3, 2, 1, 0]).unwrap();
        let mut m = ObddManager::new(6, order).unwrap();
        let gt = build_gt(&mut m, &[0, 1, 2], &[3, 4, 5]).unwrap();
        let le = build_threshold_le(&mut m, &[0, 1, 2], &BitVector::from_value(5, 3)).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                let bits = assignment(3, a, b);
                assert_eq!(m.evaluate(gt, &bits).unwrap(), a > b);
                assert_eq!(m.evaluate(le, &bits).unwrap(), a <= 5);
            }
        }
    }

    #[test]
    fn inequality_exhaustive_n3() {
        let (mut m, x, y) = interleaved(3);
        let neq = build_neq(&mut m, &x, &y).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                assert_eq!(m.evaluate(neq, &assignment(3, a, b)).unwrap(), a != b);
            }
        }
        assert!(build_neq(&mut m, &x, &y[..2]).is_err());
    }

    #[test]
    fn threshold_extremes() {
        let mut m = ObddManager::with_identity_order(4).unwrap();
        let block = [0, 1, 2, 3];
        let all = build_threshold_le(&mut m, &block, &BitVector::from_value(15, 4)).unwrap();
        assert!(all.is_true());
        let zero = build_threshold_le(&mut m, &block, &BitVector::zeros(4)).unwrap();
        assert_eq!(m.sat_count(zero, 4).unwrap(), 1);
        assert!(m.evaluate(zero, &[false; 4]).unwrap());
        for s in 0..16u64 {
            let f = build_threshold_le(&mut m, &block, &BitVector::from_value(s, 4)).unwrap();
            for c in 0..16u64 {
                let bits: Vec<bool> = (0..4).map(|i| (c >> i) & 1 == 1).collect();
                assert_eq!(m.evaluate(f, &bits).unwrap(), c <= s);
            }
        }
    }

    #[test]
    fn index_predicate_matches() {
        let mut m = ObddManager::with_identity_order(3).unwrap();
        let f = build_index_predicate(&mut m, &[2, 0, 1], |v| v % 3 == 1).unwrap();
        for v in 0..8u64 {
            // block position i is bit i of the index
            let mut bits = vec![false; 3];
            bits[2] = v & 1 == 1;
            bits[0] = v & 2 == 2;
            bits[1] = v & 4 == 4;
            assert_eq!(m.evaluate(f, &bits).unwrap(), v % 3 == 1);
        }
    }
}

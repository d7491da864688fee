use rustc_hash::FxHashMap;

use super::{FuncHandle, ObddError, ObddManager, ObddResult, FALSE_ID, TRUE_ID};

/// Size counters of a manager.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SizeStats {
    /// Nodes currently allocated in the shared store, sinks included.
    pub live_nodes: usize,
    /// Largest `live_nodes` observed since the manager was created.
    pub peak_live_nodes: usize,
    /// Largest `live_nodes` since the last [`ObddManager::reset_window_peak`].
    pub window_peak_live_nodes: usize,
    /// Functional operations performed so far.
    pub op_count: u64,
}

impl ObddManager {
    pub fn stats(&self) -> SizeStats {
        SizeStats {
            live_nodes: self.live_nodes(),
            peak_live_nodes: self.peak_live,
            window_peak_live_nodes: self.window_peak_live,
            op_count: self.op_count,
        }
    }

    /// Starts a new measurement window for `window_peak_live_nodes`.
    pub fn reset_window_peak(&mut self) {
        self.window_peak_live = self.live_nodes();
    }

    /// Follows the path selected by `assignment` (indexed by variable).
    pub fn evaluate(&self, f: FuncHandle, assignment: &[bool]) -> ObddResult<bool> {
        Ok(self.evaluate_path(f, assignment)?.0)
    }

    /// Like [`evaluate`](Self::evaluate) but also returns the number of edges on the path.
    pub fn evaluate_path(&self, f: FuncHandle, assignment: &[bool]) -> ObddResult<(bool, usize)> {
        let mut id = self.check(f)?;
        if assignment.len() != self.num_vars() {
            return Err(ObddError::AssignmentLength {
                got: assignment.len(),
                expected: self.num_vars(),
            });
        }
        let mut steps = 0;
        while id > TRUE_ID {
            let n = self.node(id);
            let var = self.order.var_at_level(n.level as usize);
            id = if assignment[var] { n.hi } else { n.lo };
            steps += 1;
        }
        Ok((id == TRUE_ID, steps))
    }

    /// Variables `f` essentially depends on, ascending.
    pub fn support(&self, f: FuncHandle) -> ObddResult<Vec<usize>> {
        let root = self.check(f)?;
        let mut levels = vec![false; self.num_vars()];
        self.visit(root, |n| levels[n.level as usize] = true);
        let mut vars: Vec<usize> = levels
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(l, _)| self.order.var_at_level(l))
            .collect();
        vars.sort_unstable();
        Ok(vars)
    }

    /// Number of satisfying assignments of `f` over variables `0..support_size`.
    pub fn sat_count(&self, f: FuncHandle, support_size: usize) -> ObddResult<u128> {
        let root = self.check(f)?;
        if support_size > self.num_vars() {
            return Err(ObddError::VarOutOfRange {
                index: support_size,
                num_vars: self.num_vars(),
            });
        }
        if let Some(&var) = self.support(f)?.iter().find(|&&v| v >= support_size) {
            return Err(ObddError::SupportTooSmall { var, support_size });
        }
        let mut memo: FxHashMap<u32, u128> = FxHashMap::default();
        let below_root = self.count_rec(root, &mut memo);
        let total = below_root << self.level(root);
        Ok(total >> (self.num_vars() - support_size))
    }

    /// Count over all levels strictly below or at `f`'s level.
    fn count_rec(&self, f: u32, memo: &mut FxHashMap<u32, u128>) -> u128 {
        if f == FALSE_ID {
            return 0;
        }
        if f == TRUE_ID {
            return 1;
        }
        if let Some(&c) = memo.get(&f) {
            return c;
        }
        let n = self.node(f);
        let lo = self.count_rec(n.lo, memo) << (self.level(n.lo) - n.level - 1);
        let hi = self.count_rec(n.hi, memo) << (self.level(n.hi) - n.level - 1);
        let c = lo + hi;
        memo.insert(f, c);
        c
    }

    /// Calls `visit` with every satisfying assignment of `f` projected onto `vars`.
    ///
    /// `f` must not depend on variables outside `vars`. The slice passed to the
    /// callback is indexed like `vars`.
    pub fn for_each_sat(
        &self,
        f: FuncHandle,
        vars: &[usize],
        mut visit: impl FnMut(&[bool]),
    ) -> ObddResult<()> {
        let root = self.check(f)?;
        let mut pos_of_level = vec![usize::MAX; self.num_vars()];
        for (pos, &v) in vars.iter().enumerate() {
            self.check_var(v)?;
            pos_of_level[self.level_of(v)] = pos;
        }
        if let Some(&var) = self
            .support(f)?
            .iter()
            .find(|&&v| pos_of_level[self.level_of(v)] == usize::MAX)
        {
            return Err(ObddError::SupportTooSmall {
                var,
                support_size: vars.len(),
            });
        }
        let mut levels: Vec<u32> = vars.iter().map(|&v| self.level_of(v) as u32).collect();
        levels.sort_unstable();
        let mut bits = vec![false; vars.len()];
        self.sat_rec(root, 0, &levels, &pos_of_level, &mut bits, &mut visit);
        Ok(())
    }

    fn sat_rec(
        &self,
        f: u32,
        idx: usize,
        levels: &[u32],
        pos_of_level: &[usize],
        bits: &mut [bool],
        visit: &mut impl FnMut(&[bool]),
    ) {
        if f == FALSE_ID {
            return;
        }
        if idx == levels.len() {
            debug_assert_eq!(f, TRUE_ID);
            visit(bits);
            return;
        }
        let level = levels[idx];
        let pos = pos_of_level[level as usize];
        let n = self.node(f);
        let (lo, hi) = if n.level == level {
            (n.lo, n.hi)
        } else {
            (f, f)
        };
        bits[pos] = false;
        self.sat_rec(lo, idx + 1, levels, pos_of_level, bits, visit);
        bits[pos] = true;
        self.sat_rec(hi, idx + 1, levels, pos_of_level, bits, visit);
    }

    /// Values of `f` on all `2^vars.len()` inputs; bit `i` of the index is `vars[i]`.
    ///
    /// Variables outside `vars` are read as 0.
    pub fn truth_table(&self, f: FuncHandle, vars: &[usize]) -> ObddResult<Vec<bool>> {
        self.check(f)?;
        for &v in vars {
            self.check_var(v)?;
        }
        if vars.len() > 24 {
            return Err(ObddError::InvalidBlocks(format!(
                "truth table over {} variables is too large",
                vars.len()
            )));
        }
        let mut assignment = vec![false; self.num_vars()];
        (0..1u64 << vars.len())
            .map(|x| {
                for (i, &v) in vars.iter().enumerate() {
                    assignment[v] = (x >> i) & 1 == 1;
                }
                self.evaluate(f, &assignment)
            })
            .collect()
    }

    /// Internal (non-sink) nodes reachable from `f`.
    pub fn internal_node_count(&self, f: FuncHandle) -> ObddResult<usize> {
        let root = self.check(f)?;
        let mut count = 0;
        self.visit(root, |_| count += 1);
        Ok(count)
    }

    /// Size in the usual sense: reachable internal nodes plus reachable sinks.
    pub fn size(&self, f: FuncHandle) -> ObddResult<usize> {
        let inner = self.internal_node_count(f)?;
        let sinks = if f.is_constant() {
            1
        } else {
            2 // a reduced non-constant diagram reaches both sinks
        };
        Ok(inner + sinks)
    }

    /// Reachable internal nodes of `f` per level.
    pub fn width_profile(&self, f: FuncHandle) -> ObddResult<Vec<usize>> {
        let root = self.check(f)?;
        let mut widths = vec![0; self.num_vars()];
        self.visit(root, |n| widths[n.level as usize] += 1);
        Ok(widths)
    }

    /// Maximum of [`width_profile`](Self::width_profile).
    pub fn width(&self, f: FuncHandle) -> ObddResult<usize> {
        Ok(self.width_profile(f)?.into_iter().max().unwrap_or(0))
    }

    fn visit(&self, root: u32, mut on_node: impl FnMut(super::Node)) {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if id <= TRUE_ID || !seen.insert(id) {
                continue;
            }
            let n = self.node(id);
            on_node(n);
            stack.push(n.lo);
            stack.push(n.hi);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::BoolOp;
    use super::*;

    #[test]
    fn sat_count_basics() {
        let mut m = ObddManager::with_identity_order(5).unwrap();
        assert_eq!(m.sat_count(m.one(), 5).unwrap(), 32);
        assert_eq!(m.sat_count(m.zero(), 5).unwrap(), 0);
        let a = m.var(0).unwrap();
        let b = m.var(1).unwrap();
        let f = m.apply(a, b, BoolOp::AND).unwrap();
        assert_eq!(m.sat_count(f, 2).unwrap(), 1);
        assert_eq!(m.sat_count(f, 5).unwrap(), 8);
        assert!(matches!(
            m.sat_count(f, 1),
            Err(ObddError::SupportTooSmall { var: 1, .. })
        ));
    }

    #[test]
    fn evaluate_rejects_wrong_length() {
        let mut m = ObddManager::with_identity_order(3).unwrap();
        let x = m.var(2).unwrap();
        assert!(m.evaluate(x, &[false, false, true]).unwrap());
        assert!(matches!(
            m.evaluate(x, &[true]),
            Err(ObddError::AssignmentLength {
                got: 1,
                expected: 3
            })
        ));
        assert!(m.evaluate(m.one(), &[true, false, true]).unwrap());
    }

    #[test]
    fn satisfying_assignments_expand_dont_cares() {
        let mut m = ObddManager::with_identity_order(3).unwrap();
        let x = m.var(1).unwrap();
        let mut seen = Vec::new();
        m.for_each_sat(x, &[2, 1], |bits| seen.push(bits.to_vec()))
            .unwrap();
        seen.sort();
        assert_eq!(seen, vec![vec![false, true], vec![true, true]]);
        assert!(m.for_each_sat(x, &[0], |_| {}).is_err());
    }
}

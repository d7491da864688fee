use super::{BoolOp, CacheKey, FuncHandle, ObddError, ObddManager, ObddResult, FALSE_ID, TRUE_ID};

impl ObddManager {
    /// Argument reordering: `R_ρ(f)(x¹,…,xᵏ) = f(x^ρ(1),…,x^ρ(k))`.
    ///
    /// `blocks[j]` lists the variables of the `j`-th argument vector and
    /// `perm[j]` is `ρ(j)` (0-based). Variable `blocks[j][b]` of `f` is
    /// replaced by `blocks[perm[j]][b]`. Charged as `3(k−1)n` operations for
    /// `k` blocks of `n` bits; the identity permutation is free.
    ///
    /// Under a position-wise interleaved order the renaming mostly keeps node
    /// levels monotone, so nodes are relabeled in place; where the new level
    /// would sit below an already-relabeled child the node is rebuilt with an
    /// if-then-else.
    pub fn reorder_args(
        &mut self,
        f: FuncHandle,
        blocks: &[&[usize]],
        perm: &[usize],
    ) -> ObddResult<FuncHandle> {
        let root = self.check(f)?;
        let k = blocks.len();
        if perm.len() != k {
            return Err(ObddError::InvalidBlocks(format!(
                "permutation has {} entries for {k} blocks",
                perm.len()
            )));
        }
        let mut seen = vec![false; k];
        for &p in perm {
            if p >= k || std::mem::replace(&mut seen[p], true) {
                return Err(ObddError::InvalidBlocks(format!(
                    "{perm:?} is not a permutation of 0..{k}"
                )));
            }
        }
        let width = blocks.first().map_or(0, |b| b.len());
        let mut used = vec![false; self.num_vars()];
        for b in blocks {
            if b.len() != width {
                return Err(ObddError::InvalidBlocks("blocks differ in length".into()));
            }
            for &v in b.iter() {
                self.check_var(v)?;
                if std::mem::replace(&mut used[v], true) {
                    return Err(ObddError::InvalidBlocks(format!(
                        "variable {v} appears in more than one block"
                    )));
                }
            }
        }
        if perm.iter().enumerate().all(|(j, &p)| j == p) {
            return Ok(f);
        }
        let mut map: Vec<u32> = (0..self.num_vars() as u32).collect();
        for (j, b) in blocks.iter().enumerate() {
            for (pos, &v) in b.iter().enumerate() {
                map[v] = blocks[perm[j]][pos] as u32;
            }
        }
        // translate to a level map so the recursion never consults the order
        let mut level_map = vec![0u32; self.num_vars()];
        for (v, &target) in map.iter().enumerate() {
            level_map[self.level_of_var[v] as usize] = self.level_of_var[target as usize];
        }
        let map_id = self.intern_relabel_map(level_map);
        let r = self.relabel_rec(root, map_id);
        self.charge(3 * (k as u64 - 1) * width as u64);
        Ok(self.handle(r))
    }

    fn relabel_rec(&mut self, f: u32, map_id: u32) -> u32 {
        if f <= TRUE_ID {
            return f;
        }
        let key = CacheKey::Relabel(map_id, f);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let n = self.node(f);
        let target = self.relabel_maps[map_id as usize][n.level as usize];
        let lo = self.relabel_rec(n.lo, map_id);
        let hi = self.relabel_rec(n.hi, map_id);
        let r = self.ite_level(target, hi, lo);
        self.cache.insert(key, r);
        r
    }

    /// `x_level ? hi : lo` for arbitrary canonical children.
    fn ite_level(&mut self, level: u32, hi: u32, lo: u32) -> u32 {
        if level < self.level(lo) && level < self.level(hi) {
            return self.mk(level, lo, hi);
        }
        let x = self.mk(level, FALSE_ID, TRUE_ID);
        let nx = self.mk(level, TRUE_ID, FALSE_ID);
        let a = self.apply_rec(BoolOp::AND, x, hi);
        let b = self.apply_rec(BoolOp::AND, nx, lo);
        self.apply_rec(BoolOp::OR, a, b)
    }
}

use super::{CacheKey, FuncHandle, ObddManager, ObddResult, FALSE_ID, TRUE_ID};

/// A binary Boolean operator stored as its truth table.
///
/// Bit `2a + b` holds `op(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoolOp(u8);

impl BoolOp {
    pub const AND: BoolOp = BoolOp(0b1000);
    pub const OR: BoolOp = BoolOp(0b1110);
    pub const XOR: BoolOp = BoolOp(0b0110);
    pub const IFF: BoolOp = BoolOp(0b1001);
    pub const NAND: BoolOp = BoolOp(0b0111);
    pub const NOR: BoolOp = BoolOp(0b0001);
    /// `a → b`
    pub const IMPLIES: BoolOp = BoolOp(0b1011);
    /// `a ∧ ¬b`
    pub const DIFF: BoolOp = BoolOp(0b0100);

    /// Operator from its 4-bit truth table.
    pub fn from_table(table: u8) -> Self {
        BoolOp(table & 0xF)
    }

    pub fn table(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn eval(self, a: bool, b: bool) -> bool {
        (self.0 >> ((a as u8) << 1 | b as u8)) & 1 == 1
    }

    fn is_commutative(self) -> bool {
        self.eval(false, true) == self.eval(true, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

/// Result of fixing one argument of an operator.
enum Unary {
    Const(bool),
    Identity,
    Negation,
}

fn unary(v0: bool, v1: bool) -> Unary {
    match (v0, v1) {
        (false, false) => Unary::Const(false),
        (true, true) => Unary::Const(true),
        (false, true) => Unary::Identity,
        (true, false) => Unary::Negation,
    }
}

impl ObddManager {
    /// Synthesis `f ⊗ g`; one functional operation.
    pub fn apply(&mut self, f: FuncHandle, g: FuncHandle, op: BoolOp) -> ObddResult<FuncHandle> {
        let a = self.check(f)?;
        let b = self.check(g)?;
        let r = self.apply_rec(op, a, b);
        self.charge(1);
        Ok(self.handle(r))
    }

    pub fn and(&mut self, f: FuncHandle, g: FuncHandle) -> ObddResult<FuncHandle> {
        self.apply(f, g, BoolOp::AND)
    }

    pub fn or(&mut self, f: FuncHandle, g: FuncHandle) -> ObddResult<FuncHandle> {
        self.apply(f, g, BoolOp::OR)
    }

    pub fn xor(&mut self, f: FuncHandle, g: FuncHandle) -> ObddResult<FuncHandle> {
        self.apply(f, g, BoolOp::XOR)
    }

    /// `¬f`; one functional operation.
    pub fn negate(&mut self, f: FuncHandle) -> ObddResult<FuncHandle> {
        let a = self.check(f)?;
        let r = self.not_rec(a);
        self.charge(1);
        Ok(self.handle(r))
    }

    /// The subfunction `f|x_var=value`; one functional operation.
    pub fn restrict(&mut self, f: FuncHandle, var: usize, value: bool) -> ObddResult<FuncHandle> {
        let a = self.check(f)?;
        self.check_var(var)?;
        let level = self.level_of_var[var];
        let r = self.restrict_rec(a, level, value);
        self.charge(1);
        Ok(self.handle(r))
    }

    /// Quantifies `vars` out of `f`.
    ///
    /// The variables are eliminated in one pass over the diagram; the result
    /// equals quantifying them one at a time in order, and each variable is
    /// charged as one functional operation.
    pub fn quantify(
        &mut self,
        f: FuncHandle,
        vars: &[usize],
        q: Quantifier,
    ) -> ObddResult<FuncHandle> {
        let a = self.check(f)?;
        if vars.is_empty() {
            return Ok(f);
        }
        let mut mask = vec![false; self.num_vars()];
        for &v in vars {
            self.check_var(v)?;
            mask[self.level_of_var[v] as usize] = true;
        }
        let distinct = mask.iter().filter(|&&b| b).count();
        let deepest = mask.iter().rposition(|&b| b).unwrap() as u32;
        let set = self.intern_quant_set(mask);
        let r = self.quantify_rec(a, set, deepest, q);
        self.charge(distinct as u64);
        Ok(self.handle(r))
    }

    pub fn exists(&mut self, f: FuncHandle, vars: &[usize]) -> ObddResult<FuncHandle> {
        self.quantify(f, vars, Quantifier::Exists)
    }

    pub fn forall(&mut self, f: FuncHandle, vars: &[usize]) -> ObddResult<FuncHandle> {
        self.quantify(f, vars, Quantifier::Forall)
    }

    pub(crate) fn apply_rec(&mut self, op: BoolOp, f: u32, g: u32) -> u32 {
        let f_const = f <= TRUE_ID;
        let g_const = g <= TRUE_ID;
        if f_const && g_const {
            return op.eval(f == TRUE_ID, g == TRUE_ID) as u32;
        }
        if f_const {
            let fv = f == TRUE_ID;
            match unary(op.eval(fv, false), op.eval(fv, true)) {
                Unary::Const(c) => return c as u32,
                Unary::Identity => return g,
                Unary::Negation => return self.not_rec(g),
            }
        }
        if g_const {
            let gv = g == TRUE_ID;
            match unary(op.eval(false, gv), op.eval(true, gv)) {
                Unary::Const(c) => return c as u32,
                Unary::Identity => return f,
                Unary::Negation => return self.not_rec(f),
            }
        }
        if f == g {
            match unary(op.eval(false, false), op.eval(true, true)) {
                Unary::Const(c) => return c as u32,
                Unary::Identity => return f,
                Unary::Negation => return self.not_rec(f),
            }
        }
        let (f, g) = if op.is_commutative() && f > g {
            (g, f)
        } else {
            (f, g)
        };
        let key = CacheKey::Apply(op, f, g);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let nf = self.node(f);
        let ng = self.node(g);
        let level = nf.level.min(ng.level);
        let (f0, f1) = if nf.level == level {
            (nf.lo, nf.hi)
        } else {
            (f, f)
        };
        let (g0, g1) = if ng.level == level {
            (ng.lo, ng.hi)
        } else {
            (g, g)
        };
        let lo = self.apply_rec(op, f0, g0);
        let hi = self.apply_rec(op, f1, g1);
        let r = self.mk(level, lo, hi);
        self.cache.insert(key, r);
        r
    }

    pub(crate) fn not_rec(&mut self, f: u32) -> u32 {
        if f <= TRUE_ID {
            return f ^ 1;
        }
        let key = CacheKey::Not(f);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let n = self.node(f);
        let lo = self.not_rec(n.lo);
        let hi = self.not_rec(n.hi);
        let r = self.mk(n.level, lo, hi);
        self.cache.insert(key, r);
        self.cache.insert(CacheKey::Not(r), f);
        r
    }

    fn restrict_rec(&mut self, f: u32, level: u32, value: bool) -> u32 {
        let n = self.node(f);
        if n.level > level {
            return f;
        }
        if n.level == level {
            return if value { n.hi } else { n.lo };
        }
        let key = CacheKey::Restrict(level, value, f);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let lo = self.restrict_rec(n.lo, level, value);
        let hi = self.restrict_rec(n.hi, level, value);
        let r = self.mk(n.level, lo, hi);
        self.cache.insert(key, r);
        r
    }

    fn quantify_rec(&mut self, f: u32, set: u32, deepest: u32, q: Quantifier) -> u32 {
        let n = self.node(f);
        if n.level > deepest {
            return f;
        }
        let key = CacheKey::Quantify(set, q, f);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let quantified = self.quant_sets[set as usize][n.level as usize];
        let absorbing = match q {
            Quantifier::Exists => TRUE_ID,
            Quantifier::Forall => FALSE_ID,
        };
        let lo = self.quantify_rec(n.lo, set, deepest, q);
        let r = if quantified && lo == absorbing {
            absorbing
        } else {
            let hi = self.quantify_rec(n.hi, set, deepest, q);
            if quantified {
                let op = match q {
                    Quantifier::Exists => BoolOp::OR,
                    Quantifier::Forall => BoolOp::AND,
                };
                self.apply_rec(op, lo, hi)
            } else {
                self.mk(n.level, lo, hi)
            }
        };
        self.cache.insert(key, r);
        r
    }
}

//! Random Boolean functions with limited independence, built as OBDDs.
//!
//! * [`random_func_3wise`]: the inner-product (BCH) construction, 3-wise
//!   independent with `Pr[f(x) = 1] = 1/2`, width 2.
//! * [`random_func_biased`]: `t` independent parity bits compared against a
//!   threshold, giving success probability close to a target `p`.
//! * [`random_priority`]: a random linear (or affine) map `v_x = A·x (⊕ b)`
//!   with the priority comparison `|v_x| > |v_y|` and a threshold function.
//! * [`random_layered_obdd`]: a fixed-width random diagram whose function
//!   values are almost k-wise independent once the width is large enough.
//!
//! Each sampler returns the seed it consumed so runs can be replayed; the
//! `*_from_seed` variants rebuild a function from a recorded seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::builders::{
    build_automaton, build_index_predicate, build_ip_const, by_level, BitVector, LevelAutomaton,
};
use crate::error::{Error, Result};
use crate::obdd::{BoolOp, FuncHandle, ObddManager, FALSE_ID, TRUE_ID};

fn random_bits<R: Rng + ?Sized>(rng: &mut R, len: usize) -> BitVector {
    BitVector::from_bits((0..len).map(|_| rng.random::<bool>()).collect())
}

/// `⌈log₂ v⌉` with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(v: u64) -> usize {
    if v <= 1 {
        0
    } else {
        (64 - (v - 1).leading_zeros()) as usize
    }
}

/// The `n + 1` random bits of the inner-product construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seed3Wise {
    pub r: BitVector,
    pub r_n: bool,
}

impl Seed3Wise {
    pub fn draw<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let r = random_bits(rng, n);
        let r_n = rng.random();
        Self { r, r_n }
    }

    /// Seed number `index` of the `2^(n+1)` seeds: bit `i` is `r_i`, bit `n` is `r_n`.
    pub fn from_index(n: usize, index: u64) -> Self {
        Self {
            r: BitVector::from_value(index, n),
            r_n: (index >> n) & 1 == 1,
        }
    }

    pub fn to_hex(&self) -> String {
        let mut bits = self.r.bits().to_vec();
        bits.push(self.r_n);
        BitVector::from_bits(bits).to_hex()
    }
}

/// Draws `f_r(x) = ⊕ (r_i ∧ x_i) ⊕ r_n` over `block`.
pub fn random_func_3wise<R: Rng + ?Sized>(
    mgr: &mut ObddManager,
    block: &[usize],
    rng: &mut R,
) -> Result<(FuncHandle, Seed3Wise)> {
    let seed = Seed3Wise::draw(block.len(), rng);
    let f = func_3wise_from_seed(mgr, block, &seed)?;
    Ok((f, seed))
}

pub fn func_3wise_from_seed(
    mgr: &mut ObddManager,
    block: &[usize],
    seed: &Seed3Wise,
) -> Result<FuncHandle> {
    build_ip_const(mgr, block, &seed.r, seed.r_n)
}

/// Derived parameters of the biased construction for `(n, p, ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasedParams {
    pub n: usize,
    pub p: f64,
    pub eps: f64,
    /// `⌈p · 2^n⌉`
    pub s: u64,
    /// Number of parity bits, `⌈−log p − log ε⌉` (at least 1).
    pub t: usize,
}

impl BiasedParams {
    pub fn new(n: usize, p: f64, eps: f64) -> Result<Self> {
        if n == 0 || n > 62 {
            return Err(Error::Config(format!("block length {n} outside 1..=62")));
        }
        let scale = (1u64 << n) as f64;
        if !(p * scale >= 1.0 - 1e-12 && p <= 0.5) {
            return Err(Error::Config(format!(
                "probability {p} outside [2^-{n}, 1/2]"
            )));
        }
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::Config(format!("slack {eps} must be positive")));
        }
        let s = (p * scale - 1e-9).ceil().max(1.0) as u64;
        let t = ((-p.log2() - eps.log2()) - 1e-9).ceil().max(1.0) as usize;
        if t >= n {
            return Err(Error::Config(format!(
                "slack {eps} needs {t} parity bits, not fewer than the block length {n}"
            )));
        }
        Ok(Self { n, p, eps, s, t })
    }

    /// The `t` most significant bits of `s` as a number.
    pub fn top_bits(&self) -> u64 {
        self.s >> (self.n - self.t)
    }

    /// Exact `Pr[f(x) = 1]` as `(numerator, denominator)`.
    pub fn success_probability(&self) -> (u64, u64) {
        (self.top_bits() + 1, 1u64 << self.t)
    }

    /// `[s/2^n, (1+ε)·s/2^n]`
    pub fn target_interval(&self) -> (f64, f64) {
        let lo = self.s as f64 / (1u64 << self.n) as f64;
        (lo, (1.0 + self.eps) * lo)
    }

    /// Random bits consumed per function.
    pub fn seed_bits(&self) -> usize {
        self.t * (self.n + 1)
    }
}

/// `t` independent inner-product seeds; seed `k` produces bit `c_{n−1−k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiasedSeed {
    pub parts: Vec<Seed3Wise>,
}

impl BiasedSeed {
    pub fn draw<R: Rng + ?Sized>(params: &BiasedParams, rng: &mut R) -> Self {
        Self {
            parts: (0..params.t)
                .map(|_| Seed3Wise::draw(params.n, rng))
                .collect(),
        }
    }

    /// Seed number `index`; part `k` takes bits `k(n+1) .. (k+1)(n+1)`.
    pub fn from_index(params: &BiasedParams, index: u64) -> Self {
        let w = params.n + 1;
        Self {
            parts: (0..params.t)
                .map(|k| Seed3Wise::from_index(params.n, index >> (k * w)))
                .collect(),
        }
    }

    pub fn to_hex(&self) -> String {
        self.parts
            .iter()
            .map(Seed3Wise::to_hex)
            .collect::<Vec<_>>()
            .join(":")
    }
}

/// Runs the `t` width-2 parity diagrams in parallel and thresholds the result.
struct ParityProduct {
    /// flip mask per step
    flips: Vec<u32>,
    start: u32,
    t: usize,
    top: u64,
}

impl LevelAutomaton for ParityProduct {
    type State = u32;
    fn start(&self) -> u32 {
        self.start
    }
    fn step(&self, s: &u32, step: usize, bit: bool) -> u32 {
        if bit {
            s ^ self.flips[step]
        } else {
            *s
        }
    }
    fn accept(&self, s: &u32) -> bool {
        // part k is bit c_{n-1-k}, i.e. weight 2^(t-1-k) in the prefix value
        let prefix = (0..self.t)
            .filter(|&k| (s >> k) & 1 == 1)
            .map(|k| 1u64 << (self.t - 1 - k))
            .sum::<u64>();
        prefix <= self.top
    }
}

/// Draws a biased function with `Pr[f(x)=1]` in `[s/2^n, (1+ε)s/2^n]`, `s = ⌈p·2^n⌉`.
pub fn random_func_biased<R: Rng + ?Sized>(
    mgr: &mut ObddManager,
    block: &[usize],
    p: f64,
    eps: f64,
    rng: &mut R,
) -> Result<(FuncHandle, BiasedSeed)> {
    let params = BiasedParams::new(block.len(), p, eps)?;
    let seed = BiasedSeed::draw(&params, rng);
    let f = func_biased_from_seed(mgr, block, &params, &seed)?;
    Ok((f, seed))
}

pub fn func_biased_from_seed(
    mgr: &mut ObddManager,
    block: &[usize],
    params: &BiasedParams,
    seed: &BiasedSeed,
) -> Result<FuncHandle> {
    if block.len() != params.n || seed.parts.len() != params.t {
        return Err(Error::Config("seed does not match parameters".into()));
    }
    let sorted = by_level(mgr, block)?;
    let levels: Vec<u32> = sorted.iter().map(|&(l, _)| l).collect();
    let flips = sorted
        .iter()
        .map(|&(_, pos)| {
            seed.parts
                .iter()
                .enumerate()
                .filter(|(_, part)| part.r.bit(pos))
                .fold(0u32, |m, (k, _)| m | 1 << k)
        })
        .collect();
    let start = seed
        .parts
        .iter()
        .enumerate()
        .filter(|(_, part)| part.r_n)
        .fold(0u32, |m, (k, _)| m | 1 << k);
    let automaton = ParityProduct {
        flips,
        start,
        t: params.t,
        top: params.top_bits(),
    };
    let id = build_automaton(mgr, &levels, &automaton);
    Ok(mgr.handle(id))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriorityMode {
    /// `v_x = A·x`
    Linear,
    /// `v_x = A·x ⊕ b`
    #[default]
    Affine,
}

/// The random matrix (by columns `a_i`, bit `i` of `v_x` is `⟨a_i, x⟩`) and optional offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrioritySeed {
    pub columns: Vec<BitVector>,
    pub offset: Option<BitVector>,
}

impl PrioritySeed {
    pub fn draw<R: Rng + ?Sized>(n: usize, mode: PriorityMode, rng: &mut R) -> Self {
        let columns = (0..n).map(|_| random_bits(rng, n)).collect();
        let offset = match mode {
            PriorityMode::Linear => None,
            PriorityMode::Affine => Some(random_bits(rng, n)),
        };
        Self { columns, offset }
    }

    /// Seed number `index`: column `i` takes bits `i·n .. (i+1)·n`, the offset the next `n`.
    pub fn from_index(n: usize, mode: PriorityMode, index: u64) -> Self {
        let columns = (0..n)
            .map(|i| BitVector::from_value(index >> (i * n), n))
            .collect();
        let offset = match mode {
            PriorityMode::Linear => None,
            PriorityMode::Affine => Some(BitVector::from_value(index >> (n * n), n)),
        };
        Self { columns, offset }
    }

    pub fn seed_bits(n: usize, mode: PriorityMode) -> usize {
        match mode {
            PriorityMode::Linear => n * n,
            PriorityMode::Affine => n * n + n,
        }
    }

    fn offset_bit(&self, i: usize) -> bool {
        self.offset.as_ref().is_some_and(|b| b.bit(i))
    }

    /// `|v_x|` computed directly from the seed.
    pub fn priority_of(&self, x: u64) -> u64 {
        self.columns
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let dot = (a.value() & x).count_ones() & 1 == 1;
                ((dot ^ self.offset_bit(i)) as u64) << i
            })
            .sum()
    }

    pub fn to_hex(&self) -> String {
        let mut parts: Vec<String> = self.columns.iter().map(BitVector::to_hex).collect();
        if let Some(b) = &self.offset {
            parts.push(b.to_hex());
        }
        parts.join(":")
    }
}

/// Output of [`random_priority`].
#[derive(Debug, Clone)]
pub struct Priority {
    /// `1` iff `|v_x| ≤ ⌈p·2^n⌉ − 1`
    pub threshold: FuncHandle,
    /// `1` iff `|v_x| > |v_y|`
    pub greater: FuncHandle,
    /// `f_A(x, i)`: bit `|i|` of `v_x`
    pub selector: FuncHandle,
    pub seed: PrioritySeed,
}

/// Draws a random priority map and builds `g_A(x)` and `GT_A(x, y)`.
///
/// `iblock` encodes a bit position of `v` and needs at least `⌈log₂ n⌉`
/// variables. Both functions are assembled with `O(n)` functional
/// operations from direct inner-product and index constructions.
pub fn random_priority<R: Rng + ?Sized>(
    mgr: &mut ObddManager,
    xblock: &[usize],
    yblock: &[usize],
    iblock: &[usize],
    p: f64,
    mode: PriorityMode,
    rng: &mut R,
) -> Result<Priority> {
    let seed = PrioritySeed::draw(xblock.len(), mode, rng);
    priority_from_seed(mgr, xblock, yblock, iblock, p, seed)
}

pub fn priority_from_seed(
    mgr: &mut ObddManager,
    xblock: &[usize],
    yblock: &[usize],
    iblock: &[usize],
    p: f64,
    seed: PrioritySeed,
) -> Result<Priority> {
    let n = xblock.len();
    if n == 0 {
        return Err(Error::Config("priority blocks must be non-empty".into()));
    }
    if n > 62 {
        return Err(Error::Config(format!("block length {n} is too large")));
    }
    if yblock.len() != n || seed.columns.len() != n {
        return Err(Error::Config("priority blocks differ in length".into()));
    }
    if iblock.len() < ceil_log2(n as u64) {
        return Err(Error::Config(format!(
            "index block of {} variables cannot address {n} positions",
            iblock.len()
        )));
    }
    let s = (p * (1u64 << n) as f64 - 1e-9).ceil();
    if !(s >= 1.0 && p <= 1.0) {
        return Err(Error::Config(format!(
            "probability {p} outside [2^-{n}, 1]"
        )));
    }
    let bound = s as u64 - 1;

    let index_is: Vec<FuncHandle> = (0..n)
        .map(|k| build_index_predicate(mgr, iblock, |v| v == k as u64))
        .collect::<Result<_>>()?;
    let index_below: Vec<FuncHandle> = (0..n)
        .map(|j| build_index_predicate(mgr, iblock, |v| v < j as u64))
        .collect::<Result<_>>()?;
    let bits_x: Vec<FuncHandle> = (0..n)
        .map(|k| build_ip_const(mgr, xblock, &seed.columns[k], seed.offset_bit(k)))
        .collect::<Result<_>>()?;
    let bits_y: Vec<FuncHandle> = (0..n)
        .map(|k| build_ip_const(mgr, yblock, &seed.columns[k], seed.offset_bit(k)))
        .collect::<Result<_>>()?;

    let select_x = select_bit(mgr, &index_is, &bits_x)?;
    let select_y = select_bit(mgr, &index_is, &bits_y)?;
    let upper_equal = agree_above(mgr, &index_below, &bits_x, |_, j| Ok(bits_y[j]))?;
    let y_clear = mgr.negate(select_y)?;
    let witness = mgr.and(select_x, y_clear)?;
    let witness = mgr.and(witness, upper_equal)?;
    let greater = mgr.exists(witness, iblock)?;

    // same shape with the y side replaced by the constant `bound`
    let bound_bit = build_index_predicate(mgr, iblock, |v| v < n as u64 && (bound >> v) & 1 == 1)?;
    let bound_equal = agree_above(mgr, &index_below, &bits_x, |mgr, j| {
        Ok(mgr.constant((bound >> j) & 1 == 1))
    })?;
    let bound_clear = mgr.negate(bound_bit)?;
    let above = mgr.and(select_x, bound_clear)?;
    let above = mgr.and(above, bound_equal)?;
    let above = mgr.exists(above, iblock)?;
    let threshold = mgr.negate(above)?;

    Ok(Priority {
        threshold,
        greater,
        selector: select_x,
        seed,
    })
}

/// `f_A(z, i)`: bit `|i|` of `v_z`, zero for indices `≥ n`.
fn select_bit(
    mgr: &mut ObddManager,
    index_is: &[FuncHandle],
    bits: &[FuncHandle],
) -> Result<FuncHandle> {
    let mut acc = mgr.zero();
    for (&sel, &bit) in index_is.iter().zip(bits) {
        let term = mgr.and(sel, bit)?;
        acc = mgr.or(acc, term)?;
    }
    Ok(acc)
}

/// `∀ j > |i|: bits[j] ⇔ other(j)`, as a function of `i` and the bit arguments.
fn agree_above(
    mgr: &mut ObddManager,
    index_below: &[FuncHandle],
    bits: &[FuncHandle],
    mut other: impl FnMut(&mut ObddManager, usize) -> Result<FuncHandle>,
) -> Result<FuncHandle> {
    let mut acc = mgr.one();
    for (j, (&below, &bit)) in index_below.iter().zip(bits).enumerate() {
        let o = other(mgr, j)?;
        let same = mgr.apply(bit, o, BoolOp::IFF)?;
        let clause = mgr.apply(below, same, BoolOp::IMPLIES)?;
        acc = mgr.and(acc, clause)?;
    }
    Ok(acc)
}

/// Minimum width for `(ε, k)`-wise independence of the layered construction:
/// `⌈k + n·k·(k+1)/ε⌉`.
pub fn required_width(n: usize, k: usize, eps: f64) -> usize {
    let w = k as f64 + (n * k * (k + 1)) as f64 / eps;
    (w - 1e-9).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayeredObddSpec {
    /// Number of layers, one per variable.
    pub n: usize,
    /// Nodes per layer.
    pub w: usize,
    /// Probability that a successor out of the last layer is the 1-sink.
    pub p_sink: f64,
    pub seed: u64,
}

impl LayeredObddSpec {
    pub fn validate(&self) -> Result<()> {
        if self.w == 0 {
            return Err(Error::Config("layer width must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.p_sink) {
            return Err(Error::Config(format!(
                "sink probability {} outside [0, 1]",
                self.p_sink
            )));
        }
        Ok(())
    }
}

/// A sampled layered diagram before reduction.
///
/// `succ[i][j]` holds the `(0, 1)` successors of node `j` in layer `i`; for
/// the last layer they are sink values `0`/`1`, otherwise node indices of
/// layer `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredObdd {
    pub succ: Vec<Vec<(u32, u32)>>,
    pub root: u32,
    /// Used when there are no layers.
    pub constant: bool,
}

impl LayeredObdd {
    pub fn sample<R: Rng + ?Sized>(n: usize, w: usize, p_sink: f64, rng: &mut R) -> Self {
        let mut succ = Vec::with_capacity(n);
        for layer in 0..n {
            let nodes = (0..w)
                .map(|_| {
                    if layer + 1 == n {
                        (
                            rng.random_bool(p_sink) as u32,
                            rng.random_bool(p_sink) as u32,
                        )
                    } else {
                        (rng.random_range(0..w as u32), rng.random_range(0..w as u32))
                    }
                })
                .collect();
            succ.push(nodes);
        }
        let root = if n == 0 {
            0
        } else {
            rng.random_range(0..w as u32)
        };
        let constant = n == 0 && rng.random_bool(p_sink);
        Self {
            succ,
            root,
            constant,
        }
    }

    pub fn num_layers(&self) -> usize {
        self.succ.len()
    }

    /// Value on input `x`, where bit `i` of `x` is read in layer `i`.
    pub fn evaluate(&self, x: u64) -> bool {
        if self.succ.is_empty() {
            return self.constant;
        }
        let mut node = self.root;
        for (i, layer) in self.succ.iter().enumerate() {
            let (lo, hi) = layer[node as usize];
            node = if (x >> i) & 1 == 1 { hi } else { lo };
        }
        node == 1
    }

    /// Imports the nodes reachable from the root into `mgr`, layer `i` reading `block[i]`.
    pub fn import(&self, mgr: &mut ObddManager, block: &[usize]) -> Result<FuncHandle> {
        let n = self.num_layers();
        if block.len() != n {
            return Err(Error::Config(format!(
                "{} variables for a diagram with {n} layers",
                block.len()
            )));
        }
        if n == 0 {
            return Ok(mgr.constant(self.constant));
        }
        let levels: Vec<u32> = block.iter().map(|&v| mgr.level_of(v) as u32).collect();
        by_level(mgr, block)?;
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "layer variables must follow the manager's order".into(),
            ));
        }
        let mut reachable: Vec<Vec<bool>> =
            self.succ.iter().map(|l| vec![false; l.len()]).collect();
        reachable[0][self.root as usize] = true;
        for i in 0..n - 1 {
            for j in 0..self.succ[i].len() {
                if reachable[i][j] {
                    let (lo, hi) = self.succ[i][j];
                    reachable[i + 1][lo as usize] = true;
                    reachable[i + 1][hi as usize] = true;
                }
            }
        }
        let mut below: Vec<u32> = vec![FALSE_ID, TRUE_ID];
        for i in (0..n).rev() {
            below = self.succ[i]
                .iter()
                .zip(&reachable[i])
                .map(|(&(lo, hi), &r)| {
                    if r {
                        mgr.mk(levels[i], below[lo as usize], below[hi as usize])
                    } else {
                        FALSE_ID
                    }
                })
                .collect();
        }
        mgr.touch_peak();
        Ok(mgr.handle(below[self.root as usize]))
    }
}

/// Samples a layered diagram from `spec` and imports it over `block`.
pub fn random_layered_obdd(
    mgr: &mut ObddManager,
    block: &[usize],
    spec: &LayeredObddSpec,
) -> Result<(FuncHandle, LayeredObdd)> {
    spec.validate()?;
    if block.len() != spec.n {
        return Err(Error::Config(format!(
            "{} variables for {} layers",
            block.len(),
            spec.n
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let raw = LayeredObdd::sample(spec.n, spec.w, spec.p_sink, &mut rng);
    let f = raw.import(mgr, block)?;
    Ok((f, raw))
}

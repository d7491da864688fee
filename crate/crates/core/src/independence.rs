//! Exact and Monte Carlo checks of (almost) k-wise independence.
//!
//! A random function `f: {0,1}^n → {0,1}` is viewed as the family of random
//! bits `X_x = f(x)`. For an index tuple `(x_1, …, x_k)` of distinct inputs
//! every pattern `l ∈ {0,1}^k` should occur with probability
//! `Π q^{l_i} (1−q)^{1−l_i}`, where `q` is the marginal `Pr[X_x = 1]`
//! (`q = 1/2` gives the familiar `2^{−k}`).

use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::obdd::ObddManager;
use crate::random::{
    func_3wise_from_seed, func_biased_from_seed, random_layered_obdd, BiasedParams, BiasedSeed,
    LayeredObddSpec, Seed3Wise,
};

/// Largest seed space the exact verifier enumerates, as a power of two.
pub const MAX_EXACT_SEED_BITS: usize = 24;
/// Smallest sample count accepted by the Monte Carlo verifier.
pub const MIN_MC_SAMPLES: u64 = 1000;

/// A random function family with an enumerable seed space.
pub trait SeedFamily: Sync {
    fn name(&self) -> String;
    fn input_bits(&self) -> usize;
    fn seed_bits(&self) -> usize;
    /// Truth table of the function drawn with seed number `seed`.
    fn truth_table(&self, seed: u64) -> Result<Vec<bool>>;
    /// `Pr[f(x) = 1]` as `(numerator, denominator)`.
    fn marginal(&self) -> (u64, u64) {
        (1, 2)
    }
}

/// A random function generator that can only be sampled.
pub trait Sampler: Sync {
    fn name(&self) -> String;
    fn input_bits(&self) -> usize;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<bool>>;
    fn marginal(&self) -> f64 {
        0.5
    }
}

fn fresh_manager(n: usize) -> Result<(ObddManager, Vec<usize>)> {
    Ok((ObddManager::with_identity_order(n)?, (0..n).collect()))
}

/// The inner-product family.
#[derive(Debug, Clone, Copy)]
pub struct Alg1Family {
    pub n: usize,
}

impl SeedFamily for Alg1Family {
    fn name(&self) -> String {
        format!("alg1(n={})", self.n)
    }
    fn input_bits(&self) -> usize {
        self.n
    }
    fn seed_bits(&self) -> usize {
        self.n + 1
    }
    fn truth_table(&self, seed: u64) -> Result<Vec<bool>> {
        let (mut mgr, block) = fresh_manager(self.n)?;
        let f = func_3wise_from_seed(&mut mgr, &block, &Seed3Wise::from_index(self.n, seed))?;
        Ok(mgr.truth_table(f, &block)?)
    }
}

/// The biased parity-threshold family.
#[derive(Debug, Clone, Copy)]
pub struct BiasedFamily {
    pub params: BiasedParams,
}

impl BiasedFamily {
    pub fn new(n: usize, p: f64, eps: f64) -> Result<Self> {
        Ok(Self {
            params: BiasedParams::new(n, p, eps)?,
        })
    }
}

impl SeedFamily for BiasedFamily {
    fn name(&self) -> String {
        let p = &self.params;
        format!("biased(n={},p={},eps={},t={})", p.n, p.p, p.eps, p.t)
    }
    fn input_bits(&self) -> usize {
        self.params.n
    }
    fn seed_bits(&self) -> usize {
        self.params.seed_bits()
    }
    fn truth_table(&self, seed: u64) -> Result<Vec<bool>> {
        let (mut mgr, block) = fresh_manager(self.params.n)?;
        let seed = BiasedSeed::from_index(&self.params, seed);
        let f = func_biased_from_seed(&mut mgr, &block, &self.params, &seed)?;
        Ok(mgr.truth_table(f, &block)?)
    }
    fn marginal(&self) -> (u64, u64) {
        self.params.success_probability()
    }
}

/// A single function regardless of seed.
#[derive(Debug, Clone, Copy)]
pub struct ConstantFamily {
    pub n: usize,
    pub value: bool,
}

impl SeedFamily for ConstantFamily {
    fn name(&self) -> String {
        format!("constant(n={},value={})", self.n, self.value as u8)
    }
    fn input_bits(&self) -> usize {
        self.n
    }
    fn seed_bits(&self) -> usize {
        0
    }
    fn truth_table(&self, _: u64) -> Result<Vec<bool>> {
        Ok(vec![self.value; 1 << self.n])
    }
}

/// Samples a [`SeedFamily`] by drawing uniform seeds.
#[derive(Debug, Clone, Copy)]
pub struct SeededSampler<F>(pub F);

impl<F: SeedFamily> Sampler for SeededSampler<F> {
    fn name(&self) -> String {
        self.0.name()
    }
    fn input_bits(&self) -> usize {
        self.0.input_bits()
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<bool>> {
        let bits = self.0.seed_bits();
        let seed = if bits == 0 {
            0
        } else {
            rng.random::<u64>() >> (64 - bits)
        };
        self.0.truth_table(seed)
    }
    fn marginal(&self) -> f64 {
        let (a, b) = self.0.marginal();
        a as f64 / b as f64
    }
}

/// Layered random diagrams of a fixed width.
#[derive(Debug, Clone, Copy)]
pub struct LayeredSampler {
    pub n: usize,
    pub w: usize,
    pub p_sink: f64,
}

impl Sampler for LayeredSampler {
    fn name(&self) -> String {
        format!("layered(n={},w={},p_sink={})", self.n, self.w, self.p_sink)
    }
    fn input_bits(&self) -> usize {
        self.n
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<bool>> {
        let (mut mgr, block) = fresh_manager(self.n)?;
        let spec = LayeredObddSpec {
            n: self.n,
            w: self.w,
            p_sink: self.p_sink,
            seed: rng.random(),
        };
        let (f, _) = random_layered_obdd(&mut mgr, &block, &spec)?;
        Ok(mgr.truth_table(f, &block)?)
    }
    fn marginal(&self) -> f64 {
        self.p_sink
    }
}

/// Independent fair coins, one per input.
#[derive(Debug, Clone, Copy)]
pub struct UniformCoins {
    pub n: usize,
}

impl Sampler for UniformCoins {
    fn name(&self) -> String {
        format!("uniform(n={})", self.n)
    }
    fn input_bits(&self) -> usize {
        self.n
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<bool>> {
        Ok((0..1u64 << self.n).map(|_| rng.random()).collect())
    }
}

/// Which index tuples to test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TupleSelection {
    /// Every set of `k` distinct inputs, in lexicographic order.
    All,
    /// `count` tuples of distinct inputs drawn uniformly.
    Random {
        count: usize,
    },
    Explicit(Vec<Vec<u64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Exact,
    WithinEps,
    Violated,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Exact => "exact",
            Verdict::WithinEps => "within-eps",
            Verdict::Violated => "violated",
        })
    }
}

/// A violated tuple and pattern (bit `i` of `pattern` is the value at `tuple[i]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub tuple: Vec<u64>,
    pub pattern: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceReport {
    pub family: String,
    pub k: usize,
    pub tuples_tested: usize,
    /// Seeds enumerated or functions sampled.
    pub samples: u64,
    /// Largest `|empirical − expected|` over all tuples and patterns.
    pub max_deviation: f64,
    /// Declared `ε` (0 for exact checks).
    pub eps: f64,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl IndependenceReport {
    pub const CSV_HEADER: [&'static str; 8] = [
        "family",
        "k",
        "tuples_tested",
        "samples",
        "max_deviation",
        "eps",
        "verdict",
        "witness",
    ];

    pub fn csv_fields(&self) -> [String; 8] {
        [
            self.family.clone(),
            self.k.to_string(),
            self.tuples_tested.to_string(),
            self.samples.to_string(),
            format!("{:.6}", self.max_deviation),
            self.eps.to_string(),
            self.verdict.to_string(),
            self.witness.as_ref().map(witness_text).unwrap_or_default(),
        ]
    }
}

fn witness_text(w: &Witness) -> String {
    let tuple: Vec<String> = w.tuple.iter().map(u64::to_string).collect();
    let pattern: String = (0..w.tuple.len())
        .map(|i| if (w.pattern >> i) & 1 == 1 { '1' } else { '0' })
        .collect();
    format!("({})={}", tuple.join(" "), pattern)
}

impl fmt::Display for IndependenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} k={}: {} over {} tuples and {} samples, max deviation {:.6}",
            self.family, self.k, self.verdict, self.tuples_tested, self.samples, self.max_deviation
        )?;
        if self.eps > 0.0 {
            write!(f, " (eps {})", self.eps)?;
        }
        if let Some(w) = &self.witness {
            write!(f, ", witness {}", witness_text(w))?;
        }
        Ok(())
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > 16 {
        return Err(Error::Config(format!("k = {k} outside 1..=16")));
    }
    if n > 24 || (k as u64) > 1u64 << n {
        return Err(Error::Config(format!(
            "cannot pick {k} distinct inputs out of 2^{n}"
        )));
    }
    Ok(())
}

fn all_tuples(n: usize, k: usize) -> Vec<Vec<u64>> {
    let size = 1u64 << n;
    let mut out = Vec::new();
    let mut cur: Vec<u64> = (0..k as u64).collect();
    loop {
        out.push(cur.clone());
        // advance to the next combination
        let mut i = k;
        while i > 0 && cur[i - 1] == size - (k - i + 1) as u64 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn resolve_tuples<R: Rng + ?Sized>(
    sel: &TupleSelection,
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Vec<u64>>> {
    let tuples = match sel {
        TupleSelection::All => all_tuples(n, k),
        TupleSelection::Random { count } => (0..*count)
            .map(|_| {
                let mut t: Vec<u64> = index::sample(rng, 1usize << n, k)
                    .into_iter()
                    .map(|i| i as u64)
                    .collect();
                t.sort_unstable();
                t
            })
            .collect(),
        TupleSelection::Explicit(ts) => {
            for t in ts {
                let mut sorted = t.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if t.len() != k || sorted.len() != k || sorted.iter().any(|&x| x >> n != 0) {
                    return Err(Error::Config(format!(
                        "tuple {t:?} is not {k} distinct inputs of {n} bits"
                    )));
                }
            }
            ts.clone()
        }
    };
    if tuples.is_empty() {
        return Err(Error::Config("no index tuples to test".into()));
    }
    Ok(tuples)
}

/// Adds the patterns of one truth table to `counts` (`2^k` counters per tuple).
fn tally(counts: &mut [u64], tuples: &[Vec<u64>], table: &[bool]) {
    let width = 1usize << tuples.first().map_or(0, Vec::len);
    for (t, tuple) in tuples.iter().enumerate() {
        let pattern = tuple
            .iter()
            .enumerate()
            .filter(|(_, &x)| table[x as usize])
            .fold(0usize, |acc, (i, _)| acc | 1 << i);
        counts[t * width + pattern] += 1;
    }
}

fn merge(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Enumerates every seed of `family` and compares the joint distributions
/// with the product distribution exactly.
pub fn verify_kwise_exact<F: SeedFamily>(
    family: &F,
    k: usize,
    tuples: &TupleSelection,
) -> Result<IndependenceReport> {
    let n = family.input_bits();
    check_k(n, k)?;
    let bits = family.seed_bits();
    if bits > MAX_EXACT_SEED_BITS {
        return Err(Error::SeedSpaceTooLarge {
            bits,
            limit: MAX_EXACT_SEED_BITS,
        });
    }
    if matches!(tuples, TupleSelection::Random { .. }) {
        return Err(Error::Config(
            "exact verification needs an explicit or complete tuple list".into(),
        ));
    }
    let tuples = resolve_tuples(tuples, n, k, &mut rand::rng())?;
    let width = 1usize << k;
    let seeds = 1u64 << bits;
    let counts = (0..seeds)
        .into_par_iter()
        .try_fold(
            || vec![0u64; tuples.len() * width],
            |mut acc, seed| -> Result<Vec<u64>> {
                let table = family.truth_table(seed)?;
                tally(&mut acc, &tuples, &table);
                Ok(acc)
            },
        )
        .try_reduce(|| vec![0u64; tuples.len() * width], |a, b| Ok(merge(a, b)))?;

    // count/seeds == Π q^l (1−q)^(1−l) with q = a/b, checked as
    // count · b^k == seeds · Π (a or b−a)
    let (a, b) = family.marginal();
    let bk = (b as u128).pow(k as u32);
    let mut max_dev = 0.0f64;
    let mut witness = None;
    for (t, tuple) in tuples.iter().enumerate() {
        for pattern in 0..width {
            let ones = (pattern as u32).count_ones();
            let num = (a as u128).pow(ones) * ((b - a) as u128).pow(k as u32 - ones);
            let count = counts[t * width + pattern] as u128;
            let dev = (count as f64 / seeds as f64 - num as f64 / bk as f64).abs();
            max_dev = max_dev.max(dev);
            if count * bk != seeds as u128 * num && witness.is_none() {
                witness = Some(Witness {
                    tuple: tuple.clone(),
                    pattern: pattern as u32,
                });
            }
        }
    }
    Ok(IndependenceReport {
        family: family.name(),
        k,
        tuples_tested: tuples.len(),
        samples: seeds,
        max_deviation: max_dev,
        eps: 0.0,
        verdict: if witness.is_none() {
            Verdict::Exact
        } else {
            Verdict::Violated
        },
        witness,
    })
}

/// Estimates joint pattern probabilities from `num_samples` draws and accepts
/// deviations up to `eps + 3σ`, `σ` the binomial standard error of each pattern.
///
/// Samples are split into fixed chunks with their own generators seeded from
/// `rng`, so the outcome does not depend on the thread count.
pub fn verify_eps_kwise_mc<S: Sampler, R: Rng + ?Sized>(
    sampler: &S,
    k: usize,
    eps: f64,
    num_samples: u64,
    tuples: &TupleSelection,
    rng: &mut R,
) -> Result<IndependenceReport> {
    let n = sampler.input_bits();
    check_k(n, k)?;
    if num_samples < MIN_MC_SAMPLES {
        return Err(Error::Config(format!(
            "{num_samples} samples, at least {MIN_MC_SAMPLES} required"
        )));
    }
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::Config(format!("eps {eps} must be non-negative")));
    }
    let tuples = resolve_tuples(tuples, n, k, rng)?;
    let width = 1usize << k;
    const CHUNK: u64 = 256;
    let chunks = num_samples.div_ceil(CHUNK);
    let base: u64 = rng.random();
    let counts = (0..chunks)
        .into_par_iter()
        .try_fold(
            || vec![0u64; tuples.len() * width],
            |mut acc, c| -> Result<Vec<u64>> {
                let mut local =
                    ChaCha8Rng::seed_from_u64(base ^ c.wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let len = CHUNK.min(num_samples - c * CHUNK);
                for _ in 0..len {
                    let table = sampler.sample(&mut local)?;
                    tally(&mut acc, &tuples, &table);
                }
                Ok(acc)
            },
        )
        .try_reduce(|| vec![0u64; tuples.len() * width], |a, b| Ok(merge(a, b)))?;

    let q = sampler.marginal();
    let total = num_samples as f64;
    let mut max_dev = 0.0f64;
    let mut witness = None;
    for (t, tuple) in tuples.iter().enumerate() {
        for pattern in 0..width {
            let ones = (pattern as u32).count_ones() as i32;
            let expected = q.powi(ones) * (1.0 - q).powi(k as i32 - ones);
            let sigma = (expected * (1.0 - expected) / total).sqrt();
            let dev = (counts[t * width + pattern] as f64 / total - expected).abs();
            max_dev = max_dev.max(dev);
            if dev > eps + 3.0 * sigma && witness.is_none() {
                witness = Some(Witness {
                    tuple: tuple.clone(),
                    pattern: pattern as u32,
                });
            }
        }
    }
    Ok(IndependenceReport {
        family: sampler.name(),
        k,
        tuples_tested: tuples.len(),
        samples: num_samples,
        max_deviation: max_dev,
        eps,
        verdict: if witness.is_none() {
            Verdict::WithinEps
        } else {
            Verdict::Violated
        },
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_enumeration_is_lexicographic() {
        let t = all_tuples(2, 2);
        assert_eq!(
            t,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(all_tuples(3, 3).len(), 56);
        assert_eq!(all_tuples(2, 4), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn alg1_exact_for_k3() {
        let r = verify_kwise_exact(&Alg1Family { n: 3 }, 3, &TupleSelection::All).unwrap();
        assert_eq!(r.verdict, Verdict::Exact);
        assert_eq!(r.samples, 16);
        assert_eq!(r.tuples_tested, 56);
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn alg1_fails_4wise_on_xor_zero_quadruple() {
        let r = verify_kwise_exact(
            &Alg1Family { n: 3 },
            4,
            &TupleSelection::Explicit(vec![vec![0, 1, 2, 3]]),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(r.witness.as_ref().unwrap().tuple, vec![0, 1, 2, 3]);
        // patterns with odd parity never occur, even ones with probability 1/8
        assert!((r.max_deviation - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn constant_family_violates_k1() {
        let fam = ConstantFamily { n: 2, value: true };
        let r = verify_kwise_exact(&fam, 1, &TupleSelection::All).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(r.max_deviation, 0.5);
    }

    #[test]
    fn biased_family_is_3wise_for_t1() {
        let fam = BiasedFamily::new(3, 0.3, 2.0).unwrap();
        assert_eq!(fam.params.t, 1);
        let r = verify_kwise_exact(&fam, 3, &TupleSelection::All).unwrap();
        assert_eq!(r.verdict, Verdict::Exact);
    }

    #[test]
    fn exact_refuses_huge_seed_space() {
        let fam = BiasedFamily::new(8, 0.1, 0.5).unwrap();
        assert!(matches!(
            verify_kwise_exact(&fam, 1, &TupleSelection::All),
            Err(Error::SeedSpaceTooLarge { bits: 45, .. })
        ));
    }

    #[test]
    fn control_coins_within_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = verify_eps_kwise_mc(
            &UniformCoins { n: 4 },
            2,
            0.01,
            4000,
            &TupleSelection::Random { count: 20 },
            &mut rng,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::WithinEps, "{r}");
    }

    #[test]
    fn control_deviation_halves_with_four_times_the_samples() {
        let dev = |samples| {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            verify_eps_kwise_mc(
                &UniformCoins { n: 4 },
                2,
                0.05,
                samples,
                &TupleSelection::All,
                &mut rng,
            )
            .unwrap()
            .max_deviation
        };
        let ratio = dev(4000) / dev(16000);
        assert!((1.4..2.8).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn mc_rejects_few_samples_and_bad_tuples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = UniformCoins { n: 2 };
        assert!(verify_eps_kwise_mc(&s, 1, 0.1, 10, &TupleSelection::All, &mut rng).is_err());
        let dup = TupleSelection::Explicit(vec![vec![1, 1]]);
        assert!(verify_eps_kwise_mc(&s, 2, 0.1, 1000, &dup, &mut rng).is_err());
        assert!(verify_eps_kwise_mc(&s, 5, 0.1, 1000, &TupleSelection::All, &mut rng).is_err());
    }

    #[test]
    fn report_csv_and_text() {
        let r = verify_kwise_exact(&Alg1Family { n: 2 }, 4, &TupleSelection::All).unwrap();
        let fields = r.csv_fields();
        assert_eq!(fields[6], "violated");
        assert_eq!(fields[7], "(0 1 2 3)=0000");
        assert!(r.to_string().contains("violated"));
    }
}

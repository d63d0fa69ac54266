//! Exact sampling by sequential conditioning, and the reverse direction:
//! estimating a family's mass from a sampler alone.
//!
//! Element `e` is decided with probability
//! `M(Y+e, N) / M(Y, N)`, where `M(Y, N)` is the family mass of sets
//! containing `Y` and avoiding `N`. Masses are cached by `(Y, N)` so repeated
//! draws only pay for conditionings they have not visited yet.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num::traits::{One, ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::counting::{family_mass, CountConfig, Family, LinearFamily, Mass, MassValue};
use crate::error::{Error, Result};
use crate::field::{format_rational, Backend, C64, Q};
use crate::genpoly::GenPolyOracle;

/// Slack allowed on float probabilities before clamping to `[0, 1]`.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// Relative size below which a complementary mass obtained by subtraction is
/// recomputed directly.
const CANCELLATION_LIMIT: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum Probability {
    Float(f64),
    Exact(Q),
}

impl Probability {
    fn zero(backend: Backend) -> Self {
        match backend {
            Backend::Float => Probability::Float(0.0),
            Backend::Exact => Probability::Exact(Q::zero()),
        }
    }

    fn one(backend: Backend) -> Self {
        match backend {
            Backend::Float => Probability::Float(1.0),
            Backend::Exact => Probability::Exact(Q::one()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Probability::Float(p) => *p,
            Probability::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn complement(&self) -> Self {
        match self {
            Probability::Float(p) => Probability::Float(1.0 - p),
            Probability::Exact(q) => Probability::Exact(Q::one() - q),
        }
    }

    fn times(&self, other: &Probability) -> Self {
        match (self, other) {
            (Probability::Exact(a), Probability::Exact(b)) => Probability::Exact(a * b),
            (a, b) => Probability::Float(a.to_f64() * b.to_f64()),
        }
    }

    pub fn exact(&self) -> Option<&Q> {
        match self {
            Probability::Exact(q) => Some(q),
            Probability::Float(_) => None,
        }
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probability::Float(p) => write!(f, "{p}"),
            Probability::Exact(q) => f.write_str(&format_rational(q)),
        }
    }
}

/// Conditioning state of the sequential sampler.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConditionState {
    pub forced_in: Vec<usize>,
    pub forced_out: Vec<usize>,
    /// Next element to decide.
    pub next: usize,
}

/// One draw together with the inclusion probabilities that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleOutcome {
    /// Sorted, 0-indexed.
    pub subset: Vec<usize>,
    /// `chain[e]` is the conditional probability that `e` is included.
    pub chain: Vec<Probability>,
    pub seed: u64,
}

impl SampleOutcome {
    /// Product over the decisions taken: `p_e` for included elements, `1 − p_e`
    /// otherwise.
    pub fn path_probability(&self) -> Probability {
        path_product(&self.chain, &self.subset)
    }
}

fn path_product(chain: &[Probability], subset: &[usize]) -> Probability {
    let mut member = vec![false; chain.len()];
    for &i in subset {
        member[i] = true;
    }
    let start = match chain.first() {
        Some(Probability::Float(_)) => Probability::Float(1.0),
        _ => Probability::Exact(Q::one()),
    };
    chain.iter().zip(&member).fold(start, |acc, (p, &inside)| {
        if inside {
            acc.times(p)
        } else {
            acc.times(&p.complement())
        }
    })
}

/// SplitMix64 step, used to derive independent per-draw seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Bernoulli(p) for rational `p`, exact: the uniform variate is compared with
/// `p` one binary digit at a time.
fn bernoulli_exact(p: &Q, rng: &mut dyn RngCore) -> bool {
    if p <= &Q::zero() {
        return false;
    }
    if p >= &Q::one() {
        return true;
    }
    let den = p.denom().clone();
    let mut num = p.numer().clone();
    let (mut bits, mut left) = (0u64, 0u32);
    loop {
        num <<= 1;
        let digit = if num >= den {
            num -= &den;
            1
        } else {
            0
        };
        if left == 0 {
            bits = rng.next_u64();
            left = 64;
        }
        let b = bits & 1;
        bits >>= 1;
        left -= 1;
        if b != digit {
            return b < digit;
        }
    }
}

/// Cache key: the forced-in and forced-out sets as bitmasks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    Small(u64, u64),
    Large(Vec<u64>, Vec<u64>),
}

fn key(forced_in: &[bool], forced_out: &[bool]) -> Key {
    let pack = |flags: &[bool]| {
        let mut words = vec![0u64; flags.len().div_ceil(64)];
        for (i, _) in flags.iter().enumerate().filter(|(_, f)| **f) {
            words[i / 64] |= 1 << (i % 64);
        }
        words
    };
    if forced_in.len() <= 64 {
        let word = |flags: &[bool]| {
            flags
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &f)| acc | (u64::from(f) << i))
        };
        Key::Small(word(forced_in), word(forced_out))
    } else {
        Key::Large(pack(forced_in), pack(forced_out))
    }
}

fn indices(flags: &[bool]) -> Vec<usize> {
    flags
        .iter()
        .enumerate()
        .filter_map(|(i, f)| f.then_some(i))
        .collect()
}

/// Conditioned mass. Float masses at or below the interpolation error bound
/// are reported as zero, with the flag set when the raw value was positive.
fn mass_value(
    oracle: &GenPolyOracle,
    fam: &LinearFamily,
    forced_in: &[usize],
    forced_out: &[usize],
    cfg: &CountConfig,
) -> Result<(MassValue, bool)> {
    Ok(match cfg.backend {
        Backend::Float => {
            let (v, bound) = family_mass::<C64>(oracle, fam, forced_in, forced_out, cfg.grid_budget)?;
            let bound = bound.unwrap_or(0.0);
            if v.re <= bound {
                (MassValue::Float(0.0), v.re > 0.0)
            } else {
                (MassValue::Float(v.re), false)
            }
        }
        Backend::Exact => {
            let (v, _) = family_mass::<Q>(oracle, fam, forced_in, forced_out, cfg.grid_budget)?;
            (MassValue::Exact(v), false)
        }
    })
}

fn unresolved() -> Error {
    Error::NumericalResolutionExceeded {
        value: 0.0,
        context: "family mass is below the float error bound",
    }
}

fn ratio(num: &MassValue, den: &MassValue) -> Result<Probability> {
    match (num, den) {
        (MassValue::Exact(a), MassValue::Exact(b)) => Ok(Probability::Exact(a / b)),
        _ => {
            let p = num.to_f64() / den.to_f64();
            if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
                return Err(Error::NumericalResolutionExceeded {
                    value: p,
                    context: "conditional probability outside [0, 1]",
                });
            }
            Ok(Probability::Float(p.clamp(0.0, 1.0)))
        }
    }
}

/// `Σ μ(S)` over family members containing `forced_in` and avoiding
/// `forced_out` (0-indexed).
pub fn conditioned_mass(
    oracle: &GenPolyOracle,
    fam: &LinearFamily,
    forced_in: &[usize],
    forced_out: &[usize],
    cfg: &CountConfig,
) -> Result<Mass> {
    let (value, faint) = mass_value(oracle, fam, forced_in, forced_out, cfg)?;
    if faint {
        return Err(unresolved());
    }
    Ok(Mass {
        value,
        error_bound: None,
    })
}

/// `ℙ(e ∈ S | forced_in ⊆ S, S ∩ forced_out = ∅)` under `μ` restricted to
/// the family.
pub fn conditional_inclusion_prob(
    oracle: &GenPolyOracle,
    fam: &LinearFamily,
    forced_in: &[usize],
    forced_out: &[usize],
    e: usize,
    cfg: &CountConfig,
) -> Result<Probability> {
    if let Some(i) = forced_in.iter().find(|i| forced_out.contains(i)) {
        return Err(Error::InvalidInput(format!(
            "element {} is both forced in and forced out",
            i + 1
        )));
    }
    if forced_in.contains(&e) {
        return Ok(Probability::one(cfg.backend));
    }
    if forced_out.contains(&e) {
        return Ok(Probability::zero(cfg.backend));
    }
    let (den, faint) = mass_value(oracle, fam, forced_in, forced_out, cfg)?;
    if faint {
        return Err(unresolved());
    }
    if den.is_zero() || den.to_f64() <= 0.0 {
        return Err(Error::NullMass);
    }
    let mut with: Vec<usize> = forced_in.to_vec();
    with.push(e);
    let (num, _) = mass_value(oracle, fam, &with, forced_out, cfg)?;
    ratio(&num, &den)
}

/// Exact sampler for `μ` restricted to a family, with a shared mass cache.
pub struct Sampler {
    oracle: GenPolyOracle,
    family: LinearFamily,
    config: CountConfig,
    cache: Mutex<HashMap<Key, (MassValue, bool)>>,
}

impl fmt::Debug for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sampler")
            .field("m", &self.family.m())
            .field("backend", &self.config.backend)
            .finish()
    }
}

impl Sampler {
    pub fn new(oracle: GenPolyOracle, family: &Family, config: CountConfig) -> Result<Self> {
        if family.m() != oracle.arity() {
            return Err(Error::DimensionMismatch(format!(
                "family over {} elements, oracle over {}",
                family.m(),
                oracle.arity()
            )));
        }
        Ok(Sampler {
            oracle,
            family: family.to_linear(),
            config,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn m(&self) -> usize {
        self.family.m()
    }

    pub fn backend(&self) -> Backend {
        self.config.backend
    }

    pub fn family(&self) -> &LinearFamily {
        &self.family
    }

    /// Number of distinct conditionings evaluated so far.
    pub fn cached_masses(&self) -> usize {
        self.cache.lock().expect("mass cache poisoned").len()
    }

    fn mass(&self, forced_in: &[bool], forced_out: &[bool]) -> Result<(MassValue, bool)> {
        let k = key(forced_in, forced_out);
        if let Some(v) = self.cache.lock().expect("mass cache poisoned").get(&k) {
            return Ok(v.clone());
        }
        let v = mass_value(
            &self.oracle,
            &self.family,
            &indices(forced_in),
            &indices(forced_out),
            &self.config,
        )?;
        self.cache
            .lock()
            .expect("mass cache poisoned")
            .insert(k, v.clone());
        Ok(v)
    }

    fn remember(&self, forced_in: &[bool], forced_out: &[bool], v: &MassValue) {
        self.cache
            .lock()
            .expect("mass cache poisoned")
            .entry(key(forced_in, forced_out))
            .or_insert_with(|| (v.clone(), false));
    }

    /// Runs the sequential decision process. `decide` picks include/exclude
    /// given `e` and its conditional inclusion probability. Returns `None` if
    /// a decision of probability zero was forced.
    fn walk(
        &self,
        within: &[bool],
        mut decide: impl FnMut(usize, &Probability) -> bool,
    ) -> Result<Option<(Vec<usize>, Vec<Probability>)>> {
        let m = self.m();
        let mut forced_in = vec![false; m];
        let mut forced_out: Vec<bool> = within.iter().map(|w| !w).collect();
        let (mut current, faint) = self.mass(&forced_in, &forced_out)?;
        if faint {
            return Err(unresolved());
        }
        if current.is_zero() || current.to_f64() <= 0.0 {
            return Err(Error::NullMass);
        }
        let mut chain = Vec::with_capacity(m);
        for e in 0..m {
            if forced_out[e] {
                chain.push(Probability::zero(self.backend()));
                continue;
            }
            forced_in[e] = true;
            let (with, _) = self.mass(&forced_in, &forced_out)?;
            forced_in[e] = false;
            let p = ratio(&with, &current)?;
            let include = decide(e, &p);
            chain.push(p);
            if include {
                forced_in[e] = true;
                current = with;
            } else {
                forced_out[e] = true;
                current = match (&current, &with) {
                    (MassValue::Exact(a), MassValue::Exact(b)) => {
                        let rest = MassValue::Exact(a - b);
                        self.remember(&forced_in, &forced_out, &rest);
                        rest
                    }
                    (a, b) => {
                        let (a, b) = (a.to_f64(), b.to_f64());
                        let rest = a - b;
                        if rest > CANCELLATION_LIMIT * a {
                            let rest = MassValue::Float(rest);
                            self.remember(&forced_in, &forced_out, &rest);
                            rest
                        } else {
                            self.mass(&forced_in, &forced_out)?.0
                        }
                    }
                };
            }
            if current.is_zero() || current.to_f64() <= 0.0 {
                return Ok(None);
            }
        }
        let subset = indices(&forced_in);
        if !self.family.contains(&subset) {
            // Only reachable when float noise steered the walk.
            return Err(Error::NumericalResolutionExceeded {
                value: current.to_f64(),
                context: "sampled set falls outside the family",
            });
        }
        Ok(Some((subset, chain)))
    }

    /// One draw conditioned on `S ⊆ within`.
    pub fn draw_within(&self, within: &[bool], rng: &mut dyn RngCore) -> Result<(Vec<usize>, Vec<Probability>)> {
        if within.len() != self.m() {
            return Err(Error::DimensionMismatch(format!(
                "restriction over {} elements, sampler over {}",
                within.len(),
                self.m()
            )));
        }
        let drawn = self.walk(within, |_, p| match p {
            Probability::Exact(q) => bernoulli_exact(q, rng),
            Probability::Float(v) => rng.gen::<f64>() < *v,
        })?;
        drawn.ok_or(Error::NullMass)
    }

    pub fn sample(&self, seed: u64) -> Result<SampleOutcome> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (subset, chain) = self.draw_within(&vec![true; self.m()], &mut rng)?;
        Ok(SampleOutcome {
            subset,
            chain,
            seed,
        })
    }

    /// `n` independent draws with seeds derived from `seed`.
    pub fn sample_many(&self, seed: u64, n: usize) -> Result<Vec<SampleOutcome>> {
        (0..n as u64).map(|i| self.sample(derive_seed(seed, i))).collect()
    }

    /// Probability that the sampler outputs `subset`, as the product of the
    /// conditional factors along its decision path.
    pub fn path_probability(&self, subset: &[usize]) -> Result<Probability> {
        let mut member = vec![false; self.m()];
        for &i in subset {
            if i >= self.m() {
                return Err(Error::InvalidInput(format!("element {} out of range", i + 1)));
            }
            member[i] = true;
        }
        match self.walk(&vec![true; self.m()], |e, _| member[e])? {
            Some((_, chain)) => Ok(path_product(&chain, subset)),
            None => Ok(Probability::zero(self.backend())),
        }
    }
}

/// Draws sets from `μ` restricted to a family, conditioned on `S ⊆ U`.
pub trait SubsetSampler: Sync {
    fn ground_size(&self) -> usize;

    fn sample_within(&self, within: &[bool], rng: &mut dyn RngCore) -> Result<Vec<usize>>;
}

impl SubsetSampler for Sampler {
    fn ground_size(&self) -> usize {
        self.m()
    }

    fn sample_within(&self, within: &[bool], rng: &mut dyn RngCore) -> Result<Vec<usize>> {
        self.draw_within(within, rng).map(|(s, _)| s)
    }
}

/// Draws from `μ` restricted to a family: a convenience wrapper around a
/// fresh [`Sampler`].
pub fn sample(oracle: &GenPolyOracle, fam: &Family, seed: u64, cfg: &CountConfig) -> Result<SampleOutcome> {
    Sampler::new(oracle.clone(), fam, *cfg)?.sample(seed)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorConfig {
    pub eps: f64,
    pub seed: u64,
    /// Number of standard deviations the combined log-error is allowed.
    pub z: f64,
    pub max_batch: usize,
}

impl EstimatorConfig {
    pub fn new(eps: f64, seed: u64) -> Self {
        EstimatorConfig {
            eps,
            seed,
            z: 3.0,
            max_batch: 2_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MassEstimate {
    pub estimate: f64,
    /// Elements removed from the conditioning set, in order.
    pub removed: Vec<usize>,
    /// Estimated `ℙ(e ∉ S | S ⊆ U)` at each removal.
    pub ratios: Vec<f64>,
    /// Final conditioning set and its estimated probability of being drawn.
    pub final_set: Vec<usize>,
    pub final_probability: f64,
    pub final_mass: f64,
    pub samples: usize,
}

/// Estimates `Σ_{S∈𝒞} μ(S)` using only draws from a sampler and one
/// evaluation of `μ(U)` for the final set `U`.
///
/// Starting from `U = [m]`, the element most often missing from draws
/// conditioned on `S ⊆ U` is removed and the ratio `Z_{U−e}/Z_U` estimated on
/// a fresh batch, until `U` itself is drawn with probability above
/// `1 − 1/(2m)`. Batch sizes target a relative standard deviation of
/// `ln(1+2ε)/(z·√(m+1))` per factor.
pub fn estimate_mass_via_sampler(
    sampler: &dyn SubsetSampler,
    oracle: &GenPolyOracle,
    fam: &LinearFamily,
    config: &EstimatorConfig,
) -> Result<MassEstimate> {
    let m = sampler.ground_size();
    if !(config.eps > 0.0 && config.eps < 1.0) {
        return Err(Error::InvalidInput(format!("ε = {} is not in (0, 1)", config.eps)));
    }
    if oracle.arity() != m || fam.m() != m {
        return Err(Error::DimensionMismatch(format!(
            "sampler over {m} elements, oracle over {}, family over {}",
            oracle.arity(),
            fam.m()
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let sigma = (1.0 + 2.0 * config.eps).ln() / (config.z * ((m + 1) as f64).sqrt());
    let initial = (16 * m * m).max(200);
    let batch_for = |p: f64| -> usize {
        let n = ((1.0 - p) / (p * sigma * sigma)).ceil();
        if n.is_finite() {
            (n as usize).clamp(initial, config.max_batch.max(initial))
        } else {
            config.max_batch.max(initial)
        }
    };
    let threshold = if m == 0 { 0.0 } else { 1.0 - 1.0 / (2.0 * m as f64) };

    let mut within = vec![true; m];
    let mut removed = Vec::new();
    let mut ratios = Vec::new();
    let mut samples = 0;
    for _ in 0..=m + 1 {
        let size = within.iter().filter(|w| **w).count();
        let mut full = 0usize;
        let mut missing = vec![0usize; m];
        for _ in 0..initial {
            let s = sampler.sample_within(&within, &mut rng)?;
            if s.len() == size {
                full += 1;
            }
            let mut inside = vec![false; m];
            for &i in &s {
                inside[i] = true;
            }
            for e in 0..m {
                if within[e] && !inside[e] {
                    missing[e] += 1;
                }
            }
        }
        samples += initial;
        let q = full as f64 / initial as f64;
        if q > threshold {
            let n = batch_for(q);
            let hits = (0..n)
                .map(|_| sampler.sample_within(&within, &mut rng).map(|s| s.len() == size))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .filter(|&b| b)
                .count();
            samples += n;
            let q_hat = hits as f64 / n as f64;
            if hits == 0 {
                return Err(Error::NullMass);
            }
            let final_set = indices(&within);
            let complement: Vec<usize> = (0..m).filter(|&i| !within[i]).collect();
            let (mu, _) = family_mass::<C64>(oracle, fam, &final_set, &complement, crate::interp::DEFAULT_GRID_BUDGET)?;
            let product: f64 = ratios.iter().product();
            return Ok(MassEstimate {
                estimate: mu.re / (q_hat * product),
                removed,
                ratios,
                final_set,
                final_probability: q_hat,
                final_mass: mu.re,
                samples,
            });
        }
        let (e, &count) = missing
            .iter()
            .enumerate()
            .max_by_key(|(_, c)| **c)
            .expect("nonempty ground set when U is not drawn");
        let p = count as f64 / initial as f64;
        let n = batch_for(p);
        let mut miss = 0usize;
        for _ in 0..n {
            let s = sampler.sample_within(&within, &mut rng)?;
            if !s.contains(&e) {
                miss += 1;
            }
        }
        samples += n;
        let rho = (miss as f64).max(0.5) / n as f64;
        ratios.push(rho);
        removed.push(e);
        within[e] = false;
    }
    Err(Error::NonConvergence(m + 2))
}

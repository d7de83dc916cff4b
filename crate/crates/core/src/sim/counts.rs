//! Measurement histograms and probability distributions.
//!
//! Outcomes are integers whose bit `c` is classical bit `c`. As strings,
//! clbit 0 is the rightmost character.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn bitstring(x: u64, n_bits: usize) -> String {
    (0..n_bits).rev().map(|b| if x >> b & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bitstring(s: &str) -> Option<u64> {
    if s.is_empty() || s.len() > 64 {
        return None;
    }
    s.chars().try_fold(0u64, |acc, ch| match ch {
        '0' => Some(acc << 1),
        '1' => Some(acc << 1 | 1),
        _ => None,
    })
}

/// Sampled outcomes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counts {
    n_bits: usize,
    counts: BTreeMap<u64, u64>,
}

impl Counts {
    pub fn new(n_bits: usize) -> Self {
        Counts { n_bits, counts: BTreeMap::new() }
    }

    pub fn from_map(n_bits: usize, counts: BTreeMap<u64, u64>) -> Self {
        let counts = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        Counts { n_bits, counts }
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn shots(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, x: u64) -> u64 {
        self.counts.get(&x).copied().unwrap_or(0)
    }

    pub fn add(&mut self, x: u64, n: u64) {
        if n > 0 {
            *self.counts.entry(x).or_insert(0) += n;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    /// Relative frequencies.
    pub fn to_dist(&self) -> ProbDist {
        let s = self.shots() as f64;
        ProbDist::from_map(self.n_bits, self.counts.iter().map(|(&k, &v)| (k, v as f64 / s)).collect())
    }
}

impl Serialize for Counts {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<String, u64> = self.counts.iter().map(|(&k, &v)| (bitstring(k, self.n_bits), v)).collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Counts {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m: BTreeMap<String, u64> = BTreeMap::deserialize(d)?;
        let n_bits = m.keys().next().map(|k| k.len()).unwrap_or(0);
        let mut counts = BTreeMap::new();
        for (k, v) in m {
            if k.len() != n_bits {
                return Err(serde::de::Error::custom("bitstrings of unequal length"));
            }
            let x = parse_bitstring(&k).ok_or_else(|| serde::de::Error::custom(format!("bad bitstring {k:?}")))?;
            counts.insert(x, v);
        }
        Ok(Counts::from_map(n_bits, counts))
    }
}

/// A probability distribution over outcomes (or a signed quasi-distribution).
#[derive(Clone, Debug, PartialEq)]
pub struct ProbDist {
    n_bits: usize,
    probs: BTreeMap<u64, f64>,
}

impl ProbDist {
    pub fn from_map(n_bits: usize, probs: BTreeMap<u64, f64>) -> Self {
        ProbDist { n_bits, probs }
    }

    /// Non-zero entries of a dense vector.
    pub fn from_dense(n_bits: usize, dense: &[f64]) -> Self {
        let probs = dense.iter().enumerate().filter(|(_, &p)| p != 0.0).map(|(i, &p)| (i as u64, p)).collect();
        ProbDist { n_bits, probs }
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn get(&self, x: u64) -> f64 {
        self.probs.get(&x).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn as_map(&self) -> &BTreeMap<u64, f64> {
        &self.probs
    }

    /// Marginal over the bits listed in `bits`; bit `i` of the result is
    /// bit `bits[i]` of the original.
    pub fn marginal(&self, bits: &[usize]) -> ProbDist {
        let mut out = BTreeMap::new();
        for (&x, &p) in &self.probs {
            let y = bits.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | ((x >> b) & 1) << i);
            *out.entry(y).or_insert(0.0) += p;
        }
        ProbDist { n_bits: bits.len(), probs: out }
    }
}

impl Serialize for ProbDist {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<String, f64> = self.probs.iter().map(|(&k, &v)| (bitstring(k, self.n_bits), v)).collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProbDist {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m: BTreeMap<String, f64> = BTreeMap::deserialize(d)?;
        let n_bits = m.keys().next().map(|k| k.len()).unwrap_or(0);
        let mut probs = BTreeMap::new();
        for (k, v) in m {
            let x = parse_bitstring(&k).ok_or_else(|| serde::de::Error::custom(format!("bad bitstring {k:?}")))?;
            probs.insert(x, v);
        }
        Ok(ProbDist { n_bits, probs })
    }
}

/// Multinomial sample of `shots` outcomes by sequential binomial draws.
pub fn sample_multinomial(dist: &ProbDist, shots: u64, rng: &mut ChaCha8Rng) -> Counts {
    let mut out = Counts::new(dist.n_bits());
    let mut left = shots;
    let mut mass: f64 = dist.iter().map(|(_, p)| p.max(0.0)).sum();
    let entries: Vec<(u64, f64)> = dist.iter().filter(|&(_, p)| p > 0.0).collect();
    for (i, &(x, p)) in entries.iter().enumerate() {
        if left == 0 {
            break;
        }
        let k = if i + 1 == entries.len() || p >= mass {
            left
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(left, q).expect("valid binomial").sample(rng)
        };
        out.add(x, k);
        left -= k;
        mass -= p;
    }
    out
}

/// Draws `shots` outcomes one at a time from `ideal`, then flips each bit
/// `b` with probability `flip(b, value)` (probability of reading the other
/// value given the true one).
pub fn sample_with_flips(
    ideal: &ProbDist,
    shots: u64,
    flip: impl Fn(usize, u8) -> f64,
    rng: &mut ChaCha8Rng,
) -> Counts {
    let entries: Vec<(u64, f64)> = ideal.iter().filter(|&(_, p)| p > 0.0).collect();
    let mut cdf = Vec::with_capacity(entries.len());
    let mut acc = 0.0;
    for &(_, p) in &entries {
        acc += p;
        cdf.push(acc);
    }
    let mut out = Counts::new(ideal.n_bits());
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let i = cdf.partition_point(|&c| c <= u).min(entries.len() - 1);
        let mut x = entries[i].0;
        for b in 0..ideal.n_bits() {
            let v = (x >> b & 1) as u8;
            if rng.random::<f64>() < flip(b, v) {
                x ^= 1 << b;
            }
        }
        out.add(x, 1);
    }
    out
}

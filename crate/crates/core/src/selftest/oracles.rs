//! Independent brute-force references used by the self-test suite.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::classifier::Classifier;
use crate::error::Result;
use crate::selftest::gen::splitmix;
use crate::tabular::{Dataset, Entity, Value};

/// Observed marginals of every feature, recounted from the rows.
fn marginals(ds: &Dataset) -> Vec<Vec<(Value, f64)>> {
    let total = ds.total_count() as f64;
    (0..ds.num_features())
        .map(|j| {
            let mut counts: BTreeMap<Value, u64> = BTreeMap::new();
            for row in ds.rows() {
                *counts.entry(row.entity[j].clone()).or_default() += row.count;
            }
            counts.into_iter().map(|(v, c)| (v, c as f64 / total)).collect()
        })
        .collect()
}

/// Count-weighted mean label over the rows.
pub fn mean_label(ds: &Dataset, l: &dyn Classifier) -> Result<f64> {
    let mut positive = 0u64;
    for row in ds.rows() {
        if l.classify(&row.entity)? == 1 {
            positive += row.count;
        }
    }
    Ok(positive as f64 / ds.total_count() as f64)
}

/// Best RESP score of `F_i` for an entity with `L(e*) = 1`, enumerating every
/// `Gamma` of size up to `max_gamma` as a bitmask and every `w` in the product
/// of observed domains. Returns the score and the size of the winning `Gamma`,
/// or `None` when every admissible contingency scores zero.
pub fn resp_exhaustive(
    ds: &Dataset,
    l: &dyn Classifier,
    e_star: &Entity,
    i: usize,
    max_gamma: usize,
) -> Result<Option<(f64, usize)>> {
    let n = ds.num_features();
    let domains = marginals(ds);
    let target = l.classify(e_star)?;
    let mut best: Vec<f64> = vec![0.0; max_gamma + 1];
    for mask in 0u32..1 << n {
        let size = mask.count_ones() as usize;
        if mask & (1 << i) != 0 || size > max_gamma {
            continue;
        }
        let gamma: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        let mut digits = vec![0usize; gamma.len()];
        loop {
            let mut e = e_star.clone();
            for (&j, &d) in gamma.iter().zip(&digits) {
                e.0[j] = domains[j][d].0.clone();
            }
            if l.classify(&e)? == target {
                let mut expectation = 0.0;
                for (x, p) in &domains[i] {
                    if l.classify(&e.with(i, x.clone()))? == 1 {
                        expectation += p;
                    }
                }
                let score = (f64::from(target) - expectation) / (1 + size) as f64;
                if score > best[size] {
                    best[size] = score;
                }
            }
            let mut k = 0;
            while k < digits.len() {
                digits[k] += 1;
                if digits[k] < domains[gamma[k]].len() {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
            if k == digits.len() {
                break;
            }
        }
    }
    Ok(best.iter().enumerate().find(|(_, &s)| s > 0.0).map(|(size, &s)| (s, size)))
}

/// Random dataset of `rows` uniformly drawn entities over `{0..d}^n` labelled
/// by a hash of the packed entity, with per-feature indexes on the
/// projection that drops each feature.
pub struct SparsityInstance {
    n: usize,
    d: u64,
    seed: u64,
    /// `index[j]` maps a packed entity with feature `j` cleared to the labels
    /// seen among rows with that projection (bit 0: label 0, bit 1: label 1).
    index: Vec<HashMap<u64, u8>>,
}

const BITS: usize = 4;

impl SparsityInstance {
    pub fn new(rng: &mut ChaCha8Rng, n: usize, d: u64, rows: usize) -> Self {
        assert!(n * BITS <= 64 && d <= 1 << BITS);
        let seed: u64 = rng.gen();
        let mut inst = SparsityInstance { n, d, seed, index: vec![HashMap::new(); n] };
        for _ in 0..rows {
            let e = inst.random_entity(rng);
            let y = inst.label(e);
            for j in 0..n {
                let key = e & !inst.mask(j);
                *inst.index[j].entry(key).or_default() |= 1 << y;
            }
        }
        inst
    }

    fn mask(&self, j: usize) -> u64 {
        ((1 << BITS) - 1) << (j * BITS)
    }

    pub fn random_entity(&self, rng: &mut ChaCha8Rng) -> u64 {
        (0..self.n).fold(0, |acc, j| acc | rng.gen_range(0..self.d) << (j * BITS))
    }

    pub fn label(&self, e: u64) -> u8 {
        (splitmix(e ^ self.seed) & 1) as u8
    }

    fn set(&self, e: u64, j: usize, v: u64) -> u64 {
        (e & !self.mask(j)) | v << (j * BITS)
    }

    /// Whether some feature has nonzero empirical-space RESP at `|Gamma| <= 1`.
    /// With `e' = e*[Gamma := w]` admissible, the score of `F_j` is nonzero
    /// exactly when a row agreeing with `e'` off `F_j` carries the other
    /// label; rows matching nothing contribute no score.
    pub fn has_nonzero_resp(&self, e_star: u64) -> bool {
        let y = self.label(e_star);
        let other = 1u8 << (1 - y);
        let differs = |j: usize, e: u64| self.index[j].get(&(e & !self.mask(j))).is_some_and(|&m| m & other != 0);
        for j in 0..self.n {
            if differs(j, e_star) {
                return true;
            }
            for g in (0..self.n).filter(|&g| g != j) {
                for v in 0..self.d {
                    let e = self.set(e_star, g, v);
                    if e != e_star && differs(j, e) && self.label(e) == y {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// `N (1 + sum_j |D_j|)^(c+1) / prod_j |D_j|` for `n` features of size `d`.
pub fn sparsity_bound(rows: usize, n: usize, d: u64, c: u32) -> f64 {
    rows as f64 * (1.0 + (n as u64 * d) as f64).powi(c as i32 + 1) / (d as f64).powi(n as i32)
}

//! Brute-force SHAP over any space with exact conditionals.

use itertools::Itertools;

use crate::classifier::{count_models, Classifier, Label, Monotone2Cnf};
use crate::error::{Error, Result};
use crate::shapley::{check_subset_budget, level_coefficient, ShapScore};
use crate::tabular::{Dataset, Entity, FeatureSet, ProbabilitySpace, ProductSpace};

/// Largest `n` for the `n!` permutation enumeration.
pub const MAX_PERMUTATION_FEATURES: usize = 8;
/// Largest joint domain enumerated by product-space conditionals.
pub const MAX_JOINT_SIZE: u128 = 1_000_000;
/// Largest CNF handled by the reduction check.
pub const MAX_HARDNESS_VARIABLES: usize = 12;

fn check_joint(space: &dyn ProbabilitySpace) -> Result<()> {
    match space.joint_size() {
        Some(size) if size > MAX_JOINT_SIZE => {
            Err(Error::Budget(format!("joint domain of {size} entities exceeds {MAX_JOINT_SIZE}")))
        }
        _ => Ok(()),
    }
}

/// `V(S) = E[L | e_S = e*_S]` for every `S`, indexed by bitset.
fn all_conditionals(space: &dyn ProbabilitySpace, l: &dyn Classifier, e_star: &Entity) -> Result<Vec<f64>> {
    let n = space.num_features();
    if e_star.len() != n {
        return Err(Error::Arity { expected: n, got: e_star.len() });
    }
    (0..1u64 << n).map(|bits| space.conditional(l, e_star, FeatureSet::from_bits(bits))).collect()
}

/// SHAP as the average over all `n!` orderings of the marginal contribution
/// of each feature when it joins the features before it.
pub fn shap_permutation_oracle(
    space: &dyn ProbabilitySpace,
    l: &dyn Classifier,
    e_star: &Entity,
) -> Result<Vec<ShapScore>> {
    let n = space.num_features();
    if n > MAX_PERMUTATION_FEATURES {
        return Err(Error::Budget(format!("{n} features exceed the permutation limit of {MAX_PERMUTATION_FEATURES}")));
    }
    check_joint(space)?;
    let v = all_conditionals(space, l, e_star)?;
    let mut sums = vec![0.0; n];
    let mut orderings = 0u64;
    for pi in (0..n).permutations(n) {
        let mut s = FeatureSet::empty();
        for i in pi {
            let t = s.with(i);
            sums[i] += v[t.bits() as usize] - v[s.bits() as usize];
            s = t;
        }
        orderings += 1;
    }
    Ok(space
        .features()
        .iter()
        .zip(sums)
        .map(|(f, sum)| ShapScore { feature: f.clone(), value: sum / orderings as f64, per_level: None })
        .collect())
}

fn levels_from(v: &[f64], n: usize, i: usize) -> Vec<f64> {
    let mut sums = vec![0.0; n];
    for bits in 0..1u64 << n {
        let s = FeatureSet::from_bits(bits);
        if !s.contains(i) {
            sums[s.len()] += v[s.with(i).bits() as usize] - v[bits as usize];
        }
    }
    sums.iter().enumerate().map(|(k, &d)| level_coefficient(n, k) * d).collect()
}

/// The `n` level contributions of feature `i`; level `k` sums over subsets
/// of size `k` of the other features.
pub fn shap_levels(space: &dyn ProbabilitySpace, l: &dyn Classifier, e_star: &Entity, i: usize) -> Result<Vec<f64>> {
    let n = space.num_features();
    if i >= n {
        return Err(Error::UnknownFeature(format!("#{i}")));
    }
    check_subset_budget(n)?;
    check_joint(space)?;
    Ok(levels_from(&all_conditionals(space, l, e_star)?, n, i))
}

/// Level contributions of every feature.
pub fn shap_exact_levels(space: &dyn ProbabilitySpace, l: &dyn Classifier, e_star: &Entity) -> Result<Vec<Vec<f64>>> {
    let n = space.num_features();
    check_subset_budget(n)?;
    check_joint(space)?;
    let v = all_conditionals(space, l, e_star)?;
    Ok((0..n).map(|i| levels_from(&v, n, i)).collect())
}

/// Subset-form SHAP of every feature, with its level decomposition.
pub fn shap_exact(space: &dyn ProbabilitySpace, l: &dyn Classifier, e_star: &Entity) -> Result<Vec<ShapScore>> {
    Ok(shap_exact_levels(space, l, e_star)?
        .into_iter()
        .zip(space.features())
        .map(|(levels, f)| ShapScore { feature: f.clone(), value: levels.iter().sum(), per_level: Some(levels) })
        .collect())
}

/// Both sides of the model-counting identity for a monotone 2CNF `f`:
/// `1 - sum_i SHAP(1^n, F_i)` over the uniform product space, and
/// `#f / 2^n`.
pub fn shap_hardness_check(f: &Monotone2Cnf) -> Result<(f64, f64)> {
    let n = f.num_vars();
    if n == 0 || n > MAX_HARDNESS_VARIABLES {
        return Err(Error::Budget(format!("reduction check needs 1..={MAX_HARDNESS_VARIABLES} variables, got {n}")));
    }
    let zeros = vec![0i64; n];
    let ones = vec![1i64; n];
    let ds = Dataset::from_int_rows(&[(&zeros, 1), (&ones, 1)])?;
    let space = ProductSpace::new(&ds);
    let e_star = Entity::ints(&ones);
    let label: Label = f.classify(&e_star)?;
    let total: f64 = shap_exact(&space, f, &e_star)?.iter().map(|s| s.value).sum();
    let lhs = f64::from(label) - total;
    let rhs = count_models(f)? as f64 / (1u64 << n) as f64;
    Ok((lhs, rhs))
}

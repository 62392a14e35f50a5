//! Feature domains and the two probability spaces over `D1 x ... x Dn`.

use serde::Serialize;

use crate::classifier::Classifier;
use crate::error::{Error, Result};
use crate::tabular::{Dataset, Entity, FeatureSet, Value};

/// `D_i = PROJ_{F_i}(T)` with the observed marginal of each value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureDomain {
    pub feature: String,
    /// Distinct values in ascending order.
    pub values: Vec<Value>,
    pub counts: Vec<u64>,
    /// `p(F_i = x) = count(x) / M`.
    pub marginals: Vec<f64>,
}

impl FeatureDomain {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn position(&self, value: &Value) -> Option<usize> {
        self.values.binary_search(value).ok()
    }

    pub fn probability(&self, value: &Value) -> f64 {
        self.position(value).map_or(0.0, |i| self.marginals[i])
    }
}

/// The domain of `feature`, grouped like `select F, sum(C) from T group by F`.
pub fn domain(ds: &Dataset, feature: &str) -> Result<FeatureDomain> {
    Ok(domain_at(ds, ds.feature_index(feature)?))
}

pub(crate) fn domain_at(ds: &Dataset, i: usize) -> FeatureDomain {
    let mut grouped: std::collections::BTreeMap<&Value, u64> = Default::default();
    for row in ds.rows() {
        *grouped.entry(&row.entity[i]).or_default() += row.count;
    }
    let total = ds.total_count() as f64;
    let (values, counts): (Vec<Value>, Vec<u64>) = grouped.into_iter().map(|(v, c)| (v.clone(), c)).unzip();
    let marginals = counts.iter().map(|&c| c as f64 / total).collect();
    FeatureDomain { feature: ds.features()[i].clone(), values, counts, marginals }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Product,
    Empirical,
}

/// A probability space that can answer `E[L(e) | e_S = e*_S]` exactly.
pub trait ProbabilitySpace: Sync {
    fn kind(&self) -> SpaceKind;

    fn features(&self) -> &[String];

    fn num_features(&self) -> usize {
        self.features().len()
    }

    /// Size of the joint domain when conditionals enumerate it.
    fn joint_size(&self) -> Option<u128> {
        None
    }

    /// `E[L(e) | e_S = e*_S]`.
    fn conditional(&self, l: &dyn Classifier, e_star: &Entity, s: FeatureSet) -> Result<f64>;
}

/// `Omega_P`: every feature drawn independently from its marginal.
#[derive(Debug, Clone)]
pub struct ProductSpace {
    features: Vec<String>,
    domains: Vec<FeatureDomain>,
}

/// Probes are sent to the classifier in batches of this size.
const PROBE_BATCH: usize = 4096;

impl ProductSpace {
    pub fn new(ds: &Dataset) -> Self {
        ProductSpace {
            features: ds.features().to_vec(),
            domains: (0..ds.num_features()).map(|i| domain_at(ds, i)).collect(),
        }
    }

    pub fn domains(&self) -> &[FeatureDomain] {
        &self.domains
    }

    pub fn domain(&self, i: usize) -> &FeatureDomain {
        &self.domains[i]
    }

    /// `prod |D_j|` over `set`, saturating.
    pub fn combinations(&self, set: FeatureSet) -> u128 {
        set.iter().fold(1u128, |acc, j| acc.saturating_mul(self.domains[j].len() as u128))
    }

    /// `sum over combos of vary` of `L(base[vary := combo]) * prod p(F = value)`.
    /// Coordinates outside `vary` keep `base`'s values, which need not lie in
    /// any domain.
    pub fn expectation_over(&self, l: &dyn Classifier, base: &Entity, vary: FeatureSet) -> Result<f64> {
        if base.len() != self.features.len() {
            return Err(Error::Arity { expected: self.features.len(), got: base.len() });
        }
        if vary.is_empty() {
            return Ok(f64::from(l.classify(base)?));
        }
        let mut total = 0.0;
        let mut batch: Vec<Entity> = Vec::with_capacity(PROBE_BATCH);
        let mut weights: Vec<f64> = Vec::with_capacity(PROBE_BATCH);
        for (entity, p) in self.assignments(base, vary) {
            batch.push(entity);
            weights.push(p);
            if batch.len() == PROBE_BATCH {
                total += weighted(l, &batch, &weights)?;
                batch.clear();
                weights.clear();
            }
        }
        if !batch.is_empty() {
            total += weighted(l, &batch, &weights)?;
        }
        Ok(total)
    }

    /// Every `base[vary := w]` for `w` in the product of the domains of
    /// `vary`, with its probability, in odometer order (lowest feature index
    /// varies slowest).
    pub fn assignments<'a>(
        &'a self,
        base: &Entity,
        vary: FeatureSet,
    ) -> impl Iterator<Item = (Entity, f64)> + 'a {
        let idx: Vec<usize> = vary.iter().collect();
        let mut digits = vec![0usize; idx.len()];
        let mut current = base.clone();
        for &j in &idx {
            current.0[j] = self.domains[j].values[0].clone();
        }
        let mut done = idx.iter().any(|&j| self.domains[j].is_empty());
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let p = idx.iter().zip(&digits).map(|(&j, &d)| self.domains[j].marginals[d]).product();
            let out = (current.clone(), p);
            // advance odometer, last position fastest
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    done = true;
                    break;
                }
                pos -= 1;
                let j = idx[pos];
                digits[pos] += 1;
                if digits[pos] < self.domains[j].len() {
                    current.0[j] = self.domains[j].values[digits[pos]].clone();
                    break;
                }
                digits[pos] = 0;
                current.0[j] = self.domains[j].values[0].clone();
            }
            Some(out)
        })
    }
}

fn weighted(l: &dyn Classifier, batch: &[Entity], weights: &[f64]) -> Result<f64> {
    let labels = l.classify_many(batch)?;
    Ok(labels.iter().zip(weights).filter(|(&y, _)| y == 1).map(|(_, &w)| w).sum())
}

/// Free-function form of [`ProductSpace::expectation_over`].
pub fn product_expectation_over(
    space: &ProductSpace,
    l: &dyn Classifier,
    base: &Entity,
    vary: FeatureSet,
) -> Result<f64> {
    space.expectation_over(l, base, vary)
}

impl ProbabilitySpace for ProductSpace {
    fn kind(&self) -> SpaceKind {
        SpaceKind::Product
    }

    fn features(&self) -> &[String] {
        &self.features
    }

    fn joint_size(&self) -> Option<u128> {
        Some(self.combinations(FeatureSet::full(self.features.len())))
    }

    fn conditional(&self, l: &dyn Classifier, e_star: &Entity, s: FeatureSet) -> Result<f64> {
        self.expectation_over(l, e_star, s.complement(self.features.len()))
    }
}

/// A conditional expectation together with the count mass it averaged over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondExpectation {
    pub value: f64,
    pub match_count: u64,
}

/// `Omega_E`: the rows of `T`, each with probability `C / M`.
#[derive(Debug, Clone)]
pub struct EmpiricalSpace {
    dataset: Dataset,
}

impl EmpiricalSpace {
    pub fn new(dataset: Dataset) -> Self {
        EmpiricalSpace { dataset }
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    /// Count-weighted average of `L` over rows agreeing with `e_star` on `s`.
    pub fn cond_expectation(&self, l: &dyn Classifier, e_star: &Entity, s: FeatureSet) -> Result<CondExpectation> {
        if e_star.len() != self.dataset.num_features() {
            return Err(Error::Arity { expected: self.dataset.num_features(), got: e_star.len() });
        }
        let matching: Vec<_> = self.dataset.rows().iter().filter(|r| r.entity.agrees_on(e_star, s)).collect();
        let match_count: u64 = matching.iter().map(|r| r.count).sum();
        if match_count == 0 {
            return Err(Error::ZeroProbability { features: s.describe(self.dataset.features()) });
        }
        let entities: Vec<Entity> = matching.iter().map(|r| r.entity.clone()).collect();
        let labels = l.classify_many(&entities)?;
        let positive: u64 = matching.iter().zip(&labels).filter(|(_, &y)| y == 1).map(|(r, _)| r.count).sum();
        Ok(CondExpectation { value: positive as f64 / match_count as f64, match_count })
    }
}

impl ProbabilitySpace for EmpiricalSpace {
    fn kind(&self) -> SpaceKind {
        SpaceKind::Empirical
    }

    fn features(&self) -> &[String] {
        self.dataset.features()
    }

    fn conditional(&self, l: &dyn Classifier, e_star: &Entity, s: FeatureSet) -> Result<f64> {
        self.cond_expectation(l, e_star, s).map(|c| c.value)
    }
}

/// Free-function form of [`EmpiricalSpace::cond_expectation`].
pub fn cond_expectation(
    space: &EmpiricalSpace,
    l: &dyn Classifier,
    e_star: &Entity,
    s: FeatureSet,
) -> Result<CondExpectation> {
    space.cond_expectation(l, e_star, s)
}

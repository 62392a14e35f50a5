//! The black-box classifier `L` and its built-in implementations.

mod cnf;
mod external;
mod subscale;
mod table;

use std::sync::atomic::{AtomicU64, Ordering};

pub use cnf::{count_models, Monotone2Cnf, MAX_COUNT_VARIABLES};
pub use external::{ExternalOracle, DEFAULT_TIMEOUT_MS, TIMEOUT_ENV};
pub use subscale::{
    FeatureBreakdown, ModelFeature, Subscale, SubscaleBreakdown, SubscaleModel, SubscaleRisk,
};
pub use table::TableClassifier;

use crate::error::Result;
use crate::tabular::Entity;

/// Binary outcome, always `0` or `1`.
pub type Label = u8;

/// Black-box access to a classifier `L : D1 x ... x Dn -> {0, 1}`.
///
/// Implementations must be deterministic: classifying the same entity twice
/// yields the same label.
pub trait Classifier: Send + Sync {
    fn name(&self) -> &str;

    /// Number of features the classifier expects.
    fn arity(&self) -> usize;

    fn classify(&self, entity: &Entity) -> Result<Label>;

    /// Classify a batch. The default issues one call per entity.
    fn classify_many(&self, entities: &[Entity]) -> Result<Vec<Label>> {
        entities.iter().map(|e| self.classify(e)).collect()
    }
}

impl<C: Classifier + ?Sized> Classifier for &C {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn arity(&self) -> usize {
        (**self).arity()
    }
    fn classify(&self, entity: &Entity) -> Result<Label> {
        (**self).classify(entity)
    }
    fn classify_many(&self, entities: &[Entity]) -> Result<Vec<Label>> {
        (**self).classify_many(entities)
    }
}

impl<C: Classifier + ?Sized> Classifier for Box<C> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn arity(&self) -> usize {
        (**self).arity()
    }
    fn classify(&self, entity: &Entity) -> Result<Label> {
        (**self).classify(entity)
    }
    fn classify_many(&self, entities: &[Entity]) -> Result<Vec<Label>> {
        (**self).classify_many(entities)
    }
}

/// Counts the entities sent to the wrapped classifier.
pub struct ProbeCounter<C> {
    inner: C,
    probes: AtomicU64,
}

impl<C: Classifier> ProbeCounter<C> {
    pub fn new(inner: C) -> Self {
        ProbeCounter { inner, probes: AtomicU64::new(0) }
    }

    pub fn probes(&self) -> u64 {
        self.probes.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.probes.store(0, Ordering::Relaxed);
    }
}

impl<C: Classifier> Classifier for ProbeCounter<C> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn arity(&self) -> usize {
        self.inner.arity()
    }
    fn classify(&self, entity: &Entity) -> Result<Label> {
        self.probes.fetch_add(1, Ordering::Relaxed);
        self.inner.classify(entity)
    }
    fn classify_many(&self, entities: &[Entity]) -> Result<Vec<Label>> {
        self.probes.fetch_add(entities.len() as u64, Ordering::Relaxed);
        self.inner.classify_many(entities)
    }
}

/// Adapts a closure into a classifier; handy for tests and fixtures.
pub struct FnClassifier<F> {
    name: String,
    arity: usize,
    f: F,
}

impl<F> FnClassifier<F>
where
    F: Fn(&Entity) -> Label + Send + Sync,
{
    pub fn new(name: impl Into<String>, arity: usize, f: F) -> Self {
        FnClassifier { name: name.into(), arity, f }
    }
}

impl<F> Classifier for FnClassifier<F>
where
    F: Fn(&Entity) -> Label + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }
    fn arity(&self) -> usize {
        self.arity
    }
    fn classify(&self, entity: &Entity) -> Result<Label> {
        crate::tabular::check_arity(self.arity, entity.values())?;
        Ok((self.f)(entity))
    }
}

/// The constant classifier.
pub fn constant(arity: usize, label: Label) -> impl Classifier {
    FnClassifier::new(format!("const{label}"), arity, move |_| label)
}

/// Classify by whether every given value is non-zero (logical AND over
/// integer features).
pub fn and_classifier(arity: usize) -> impl Classifier {
    FnClassifier::new("and", arity, |e: &Entity| {
        Label::from(e.values().iter().all(|v| v.as_f64().is_some_and(|x| x != 0.0)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_counter_counts_batches() {
        let l = ProbeCounter::new(and_classifier(2));
        l.classify(&Entity::ints(&[1, 1])).unwrap();
        l.classify_many(&[Entity::ints(&[0, 1]), Entity::ints(&[1, 0])]).unwrap();
        assert_eq!(l.probes(), 3);
    }

    #[test]
    fn fn_classifier_checks_arity() {
        let l = and_classifier(2);
        assert!(l.classify(&Entity::ints(&[1])).is_err());
        assert_eq!(l.classify(&Entity::ints(&[1, 1])).unwrap(), 1);
    }
}

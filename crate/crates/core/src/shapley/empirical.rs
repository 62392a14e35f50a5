//! Exact SHAP over the empirical space.
//!
//! All conditional expectations `E[L(e) | e_S = e*_S]` are collected in one
//! depth-first pass over subsets, each node branching only to higher-indexed
//! features and carrying the rows that still match. A node whose matching
//! rows all share the label `L(e*)` is a leaf: every superset matches a
//! subset of those rows, so its value is `L(e*)` as well. Sets missing from
//! the table therefore take that implied value in the scoring pass.

use std::collections::HashMap;

use crate::classifier::{Classifier, Label};
use crate::error::{Error, Result};
use crate::explanation::{rank_indices, Diagnostics, Explanation, FeatureScore, ScoreKind, TieBreak};
use crate::shapley::{check_subset_budget, level_coefficient, ShapScore};
use crate::tabular::{Dataset, Entity, FeatureSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondEntry {
    pub value: f64,
    pub match_count: u64,
}

/// Conditional expectations keyed by feature set, as built by the
/// depth-first pass.
#[derive(Debug, Clone)]
pub struct CondExpTable {
    entries: HashMap<FeatureSet, CondEntry>,
    implied: f64,
    pruned: u64,
}

impl CondExpTable {
    pub fn get(&self, s: FeatureSet) -> Option<&CondEntry> {
        self.entries.get(&s)
    }

    /// The stored value of `s`, or `L(e*)` for sets beyond a pruned leaf.
    pub fn value(&self, s: FeatureSet) -> f64 {
        self.entries.get(&s).map_or(self.implied, |c| c.value)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pruned(&self) -> u64 {
        self.pruned
    }

    /// Entries in ascending bitset order.
    pub fn iter(&self) -> impl Iterator<Item = (FeatureSet, &CondEntry)> {
        let mut keys: Vec<FeatureSet> = self.entries.keys().copied().collect();
        keys.sort_by_key(|s| s.bits());
        keys.into_iter().map(move |s| (s, &self.entries[&s]))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ShapOptions {
    /// Insert `e*` with count 1 when it is not a row of the dataset.
    pub add_entity: bool,
    /// Report the per-level decomposition of every score.
    pub levels: bool,
    pub tie_break: TieBreak,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapResult {
    pub label: Label,
    pub scores: Vec<ShapScore>,
    pub diagnostics: Diagnostics,
}

impl ShapResult {
    pub fn values(&self) -> Vec<f64> {
        self.scores.iter().map(|s| s.value).collect()
    }
}

/// A dataset whose rows have been labelled once, for explaining many
/// entities against the same classifier.
pub struct ShapExplainer<'a> {
    dataset: &'a Dataset,
    l: &'a dyn Classifier,
    labels: Vec<Label>,
}

impl<'a> ShapExplainer<'a> {
    pub fn new(dataset: &'a Dataset, l: &'a dyn Classifier) -> Result<Self> {
        let entities: Vec<Entity> = dataset.rows().iter().map(|r| r.entity.clone()).collect();
        let labels = l.classify_many(&entities)?;
        Ok(ShapExplainer { dataset, l, labels })
    }

    pub fn dataset(&self) -> &Dataset {
        self.dataset
    }

    pub fn classifier(&self) -> &'a dyn Classifier {
        self.l
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Probes spent labelling the rows.
    pub fn probes(&self) -> u64 {
        self.labels.len() as u64
    }

    /// `(entity, count, label)` rows, with `e*` appended when it is missing
    /// and `add_entity` is set. Also returns `L(e*)` and the extra probe count.
    fn support<'e>(&'e self, e_star: &'e Entity, add_entity: bool) -> Result<(Vec<(&'e Entity, u64, Label)>, Label, u64)> {
        let n = self.dataset.num_features();
        if e_star.len() != n {
            return Err(Error::Arity { expected: n, got: e_star.len() });
        }
        let mut rows: Vec<(&Entity, u64, Label)> =
            self.dataset.rows().iter().zip(&self.labels).map(|(r, &y)| (&r.entity, r.count, y)).collect();
        match rows.iter().find(|(e, _, _)| *e == e_star) {
            Some(&(_, _, y)) => Ok((rows, y, 0)),
            None if add_entity => {
                let y = self.l.classify(e_star)?;
                rows.push((e_star, 1, y));
                Ok((rows, y, 1))
            }
            None => Err(Error::ZeroProbability { features: FeatureSet::full(n).describe(self.dataset.features()) }),
        }
    }

    /// Build the conditional-expectation table for `e*`.
    pub fn table(&self, e_star: &Entity, add_entity: bool) -> Result<CondExpTable> {
        let (rows, label, _) = self.support(e_star, add_entity)?;
        Ok(build_table(&rows, e_star, label))
    }

    pub fn explain(&self, e_star: &Entity, opts: &ShapOptions) -> Result<ShapResult> {
        let n = self.dataset.num_features();
        check_subset_budget(n)?;
        let (rows, label, extra) = self.support(e_star, opts.add_entity)?;
        let table = build_table(&rows, e_star, label);

        // level_sums[f][s] = sum over |S| = s, f not in S of V(S + f) - V(S)
        let mut level_sums = vec![vec![0.0; n]; n];
        for (s, entry) in table.iter() {
            for f in (0..n).filter(|&f| !s.contains(f)) {
                level_sums[f][s.len()] += table.value(s.with(f)) - entry.value;
            }
        }
        let scores = level_sums
            .into_iter()
            .enumerate()
            .map(|(f, sums)| {
                let levels: Vec<f64> = sums.iter().enumerate().map(|(s, &d)| level_coefficient(n, s) * d).collect();
                ShapScore {
                    feature: self.dataset.features()[f].clone(),
                    value: levels.iter().sum(),
                    per_level: opts.levels.then_some(levels),
                }
            })
            .collect();
        Ok(ShapResult {
            label,
            scores,
            diagnostics: Diagnostics {
                subsets_visited: table.len() as u64,
                subsets_pruned: table.pruned(),
                oracle_probes: self.probes() + extra,
                skipped_coalitions: 0,
            },
        })
    }
}

fn build_table(rows: &[(&Entity, u64, Label)], e_star: &Entity, label: Label) -> CondExpTable {
    let mut table = CondExpTable { entries: HashMap::new(), implied: f64::from(label), pruned: 0 };
    let all: Vec<usize> = (0..rows.len()).collect();
    visit(rows, e_star, label, FeatureSet::empty(), 0, &all, &mut table);
    table
}

fn visit(
    rows: &[(&Entity, u64, Label)],
    e_star: &Entity,
    label: Label,
    s: FeatureSet,
    next: usize,
    matching: &[usize],
    table: &mut CondExpTable,
) {
    let mut total = 0u64;
    let mut positive = 0u64;
    for &r in matching {
        total += rows[r].1;
        if rows[r].2 == 1 {
            positive += rows[r].1;
        }
    }
    // e* is one of the rows, so `matching` is never empty
    let value = positive as f64 / total as f64;
    table.entries.insert(s, CondEntry { value, match_count: total });
    let agreeing = if label == 1 { positive } else { total - positive };
    if agreeing == total {
        table.pruned += 1;
        return;
    }
    for f in next..e_star.len() {
        let narrowed: Vec<usize> = matching.iter().copied().filter(|&r| rows[r].0[f] == e_star[f]).collect();
        visit(rows, e_star, label, s.with(f), f + 1, &narrowed, table);
    }
}

/// Exact SHAP of every feature over the empirical distribution of `ds`.
pub fn shap_empirical(ds: &Dataset, l: &dyn Classifier, e_star: &Entity, opts: &ShapOptions) -> Result<ShapResult> {
    ShapExplainer::new(ds, l)?.explain(e_star, opts)
}

/// Wrap a SHAP result in the shared explanation envelope.
pub fn explain_shap(e_star: &Entity, result: ShapResult, kind: ScoreKind, tie_break: TieBreak) -> Explanation {
    let values = result.values();
    let ranking = rank_indices(&values, tie_break).into_iter().map(|i| result.scores[i].feature.clone()).collect();
    Explanation {
        entity: e_star.values().to_vec(),
        label: result.label,
        kind,
        no_explanation: values.iter().all(|&v| v == 0.0),
        scores: result
            .scores
            .into_iter()
            .map(|s| FeatureScore { per_level: s.per_level, ..FeatureScore::plain(s.feature, s.value) })
            .collect(),
        ranking,
        diagnostics: Some(result.diagnostics),
        fico: None,
    }
}

//! COUNTER and RESP scores over the product space.
//!
//! `COUNTER(e*, F_i) = L(e*) - sum_{x in D_i} L(e*[F_i := x]) p(F_i = x)`.
//!
//! RESP first tries the empty contingency (where it equals COUNTER); if that
//! score is zero it searches contingencies `(Gamma, w)` of size 1, 2, ... up to
//! the configured budget. A contingency is admissible when
//! `L(e*[Gamma := w]) = L(e*)`; its score is the COUNTER of `F_i` at
//! `e' = e*[Gamma := w]` divided by `1 + |Gamma|`. The first size with any
//! nonzero score wins, and the score is the maximum over that size.

use itertools::Itertools;
use serde::Serialize;

use crate::classifier::{Classifier, Label};
use crate::error::{Error, Result};
use crate::explanation::{rank_indices_zero_last, Explanation, FeatureScore, ScoreKind, TieBreak};
use crate::tabular::{Entity, FeatureSet, ProductSpace, Value};

/// A contingency `(Gamma, w)`: features in `gamma` (ascending) are reset to
/// the aligned values in `w`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Contingency {
    pub gamma: Vec<usize>,
    pub w: Vec<Value>,
}

impl Contingency {
    pub fn empty() -> Self {
        Contingency { gamma: Vec::new(), w: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn apply(&self, e: &Entity) -> Entity {
        let mut out = e.clone();
        for (&j, v) in self.gamma.iter().zip(&self.w) {
            out.0[j] = v.clone();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RespConfig {
    /// Largest contingency size `c` searched.
    pub max_contingency: usize,
    pub tie_break: TieBreak,
    /// Allow `L(e*) = 0`, scoring the good outcome by symmetry.
    pub explain_zero: bool,
}

impl Default for RespConfig {
    fn default() -> Self {
        RespConfig { max_contingency: 1, tie_break: TieBreak::ScoreThenIndex, explain_zero: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalKind {
    Counter,
    Resp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalScore {
    pub feature: usize,
    pub value: f64,
    /// The maximizing contingency (RESP only).
    pub witness: Option<Contingency>,
    pub kind: CausalKind,
    /// RESP found no nonzero contingency within the budget.
    pub budget_exhausted: bool,
}

fn check_feature(space: &ProductSpace, i: usize) -> Result<()> {
    if i >= space.domains().len() {
        return Err(Error::UnknownFeature(format!("#{i}")));
    }
    Ok(())
}

/// Largest number of probes sent in one batch.
const FIBER_BATCH: usize = 4096;

/// `sum_{x in D_i} L(base[F_i := x]) p(F_i = x)` for every `(base, L(base), i)`,
/// reusing the known label of each base where `x` equals its own value.
fn fiber_expectations(space: &ProductSpace, l: &dyn Classifier, bases: &[(&Entity, Label, usize)]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(bases.len());
    let mut start = 0;
    while start < bases.len() {
        let mut end = start;
        let mut probes = Vec::new();
        while end < bases.len() && (end == start || probes.len() + space.domain(bases[end].2).len() <= FIBER_BATCH) {
            let (base, _, i) = bases[end];
            for x in &space.domain(i).values {
                if *x != base[i] {
                    probes.push(base.with(i, x.clone()));
                }
            }
            end += 1;
        }
        let labels = l.classify_many(&probes)?;
        let mut next = labels.iter();
        for &(base, base_label, i) in &bases[start..end] {
            let domain = space.domain(i);
            let mut acc = 0.0;
            for (x, &p) in domain.values.iter().zip(&domain.marginals) {
                let y = if *x == base[i] { base_label } else { *next.next().expect("one label per probe") };
                if y == 1 {
                    acc += p;
                }
            }
            out.push(acc);
        }
        start = end;
    }
    Ok(out)
}

/// `COUNTER(e*, F_i)`; issues at most `|D_i|` oracle probes.
pub fn counter_score(space: &ProductSpace, l: &dyn Classifier, e_star: &Entity, i: usize) -> Result<CausalScore> {
    check_feature(space, i)?;
    let label = l.classify(e_star)?;
    let expectation = fiber_expectations(space, l, &[(e_star, label, i)])?[0];
    Ok(CausalScore {
        feature: i,
        value: f64::from(label) - expectation,
        witness: None,
        kind: CausalKind::Counter,
        budget_exhausted: false,
    })
}

/// `RESP(e*, F_i, Gamma, w)`; zero when the contingency changes the outcome.
pub fn resp_for_contingency(
    space: &ProductSpace,
    l: &dyn Classifier,
    e_star: &Entity,
    i: usize,
    cont: &Contingency,
) -> Result<f64> {
    check_feature(space, i)?;
    if cont.gamma.contains(&i) {
        return Err(Error::Precondition(format!(
            "scored feature `{}` is part of the contingency",
            space.domain(i).feature
        )));
    }
    if cont.gamma.len() != cont.w.len() {
        return Err(Error::Precondition("contingency features and values differ in length".into()));
    }
    for (&j, v) in cont.gamma.iter().zip(&cont.w) {
        check_feature(space, j)?;
        if space.domain(j).position(v).is_none() {
            return Err(Error::Precondition(format!(
                "contingency value {v} is outside the domain of `{}`",
                space.domain(j).feature
            )));
        }
    }
    let label = l.classify(e_star)?;
    let e_prime = cont.apply(e_star);
    let label_prime = if cont.is_empty() { label } else { l.classify(&e_prime)? };
    if label_prime != label {
        return Ok(0.0);
    }
    let expectation = fiber_expectations(space, l, &[(&e_prime, label_prime, i)])?[0];
    Ok((f64::from(label_prime) - expectation) / (1 + cont.len()) as f64)
}

/// `RESP(e*, F_i)` with the maximizing witness.
pub fn resp_score(
    space: &ProductSpace,
    l: &dyn Classifier,
    e_star: &Entity,
    i: usize,
    cfg: &RespConfig,
) -> Result<CausalScore> {
    let label = l.classify(e_star)?;
    Ok(resp_scores(space, l, e_star, label, &[i], cfg)?.remove(0))
}

/// RESP of each feature in `features`. Contingencies of one size are
/// labelled in a single batch shared by every feature still unresolved.
fn resp_scores(
    space: &ProductSpace,
    l: &dyn Classifier,
    e_star: &Entity,
    label: Label,
    features: &[usize],
    cfg: &RespConfig,
) -> Result<Vec<CausalScore>> {
    for &i in features {
        check_feature(space, i)?;
    }
    if label == 0 && !cfg.explain_zero {
        return Err(Error::Precondition("RESP explains L(e*) = 1; enable explain_zero for label 0".into()));
    }
    // For label 0 the roles of the labels are swapped.
    let sign = if label == 1 { 1.0 } else { -1.0 };
    let n = space.domains().len();
    let mut found: Vec<Option<(f64, Contingency)>> = vec![None; features.len()];

    for size in 0..=cfg.max_contingency.min(n.saturating_sub(1)) {
        let open: Vec<usize> = (0..features.len()).filter(|&k| found[k].is_none()).collect();
        if open.is_empty() {
            break;
        }
        let gammas: Vec<Vec<usize>> =
            (0..n).combinations(size).filter(|g| open.iter().any(|&k| !g.contains(&features[k]))).collect();
        let mut entities: Vec<(usize, Entity)> = Vec::new();
        for (g, gamma) in gammas.iter().enumerate() {
            if size == 0 {
                entities.push((g, e_star.clone()));
            } else {
                let set: FeatureSet = gamma.iter().copied().collect();
                entities.extend(space.assignments(e_star, set).map(|(e, _)| (g, e)));
            }
        }
        let labels = if size == 0 {
            vec![label]
        } else {
            l.classify_many(&entities.iter().map(|(_, e)| e.clone()).collect::<Vec<_>>())?
        };
        let admissible: Vec<(usize, &Entity)> =
            entities.iter().zip(&labels).filter(|&(_, &y)| y == label).map(|((g, e), _)| (*g, e)).collect();
        let mut pairs = Vec::new();
        let mut bases = Vec::new();
        for &k in &open {
            let i = features[k];
            for &(g, e) in &admissible {
                if !gammas[g].contains(&i) {
                    pairs.push((k, g, e));
                    bases.push((e, label, i));
                }
            }
        }
        let expectations = fiber_expectations(space, l, &bases)?;
        for ((k, g, e_prime), expectation) in pairs.into_iter().zip(expectations) {
            let score = sign * (f64::from(label) - expectation) / (1 + size) as f64;
            if score != 0.0 && found[k].as_ref().map_or(true, |(b, _)| score > *b) {
                let w = gammas[g].iter().map(|&j| e_prime[j].clone()).collect();
                found[k] = Some((score, Contingency { gamma: gammas[g].clone(), w }));
            }
        }
    }
    Ok(features
        .iter()
        .zip(found)
        .map(|(&feature, best)| match best {
            Some((value, witness)) => {
                CausalScore { feature, value, witness: Some(witness), kind: CausalKind::Resp, budget_exhausted: false }
            }
            None => CausalScore { feature, value: 0.0, witness: None, kind: CausalKind::Resp, budget_exhausted: true },
        })
        .collect())
}

fn envelope(
    space: &ProductSpace,
    e_star: &Entity,
    label: Label,
    kind: ScoreKind,
    scores: Vec<CausalScore>,
    tie_break: TieBreak,
) -> Explanation {
    let names: Vec<&str> = space.domains().iter().map(|d| d.feature.as_str()).collect();
    let values: Vec<f64> = scores.iter().map(|s| s.value).collect();
    let ranking = rank_indices_zero_last(&values, tie_break).into_iter().map(|i| names[i].to_string()).collect();
    let no_explanation = values.iter().all(|&v| v == 0.0);
    let scores = scores
        .into_iter()
        .map(|s| FeatureScore {
            gamma: s.witness.as_ref().map(|c| c.gamma.iter().map(|&j| names[j].to_string()).collect()),
            w: s.witness.map(|c| c.w),
            budget_exhausted: s.budget_exhausted,
            ..FeatureScore::plain(names[s.feature], s.value)
        })
        .collect();
    Explanation {
        entity: e_star.values().to_vec(),
        label,
        kind,
        scores,
        ranking,
        no_explanation,
        diagnostics: None,
        fico: None,
    }
}

/// RESP scores of every feature, ranked; "no explanation" when all are zero.
pub fn explain_resp(space: &ProductSpace, l: &dyn Classifier, e_star: &Entity, cfg: &RespConfig) -> Result<Explanation> {
    let label = l.classify(e_star)?;
    let features: Vec<usize> = (0..space.domains().len()).collect();
    let scores = resp_scores(space, l, e_star, label, &features, cfg)?;
    Ok(envelope(space, e_star, label, ScoreKind::Resp, scores, cfg.tie_break))
}

/// COUNTER scores of every feature, ranked. For label-0 entities (allowed
/// only with `explain_zero`) scores are negated so larger means more causal.
pub fn explain_counter(
    space: &ProductSpace,
    l: &dyn Classifier,
    e_star: &Entity,
    cfg: &RespConfig,
) -> Result<Explanation> {
    let label = l.classify(e_star)?;
    if label == 0 && !cfg.explain_zero {
        return Err(Error::Precondition("COUNTER explanations need L(e*) = 1; enable explain_zero for label 0".into()));
    }
    let sign = if label == 1 { 1.0 } else { -1.0 };
    let bases: Vec<(&Entity, Label, usize)> = (0..space.domains().len()).map(|i| (e_star, label, i)).collect();
    let scores = fiber_expectations(space, l, &bases)?
        .into_iter()
        .enumerate()
        .map(|(feature, expectation)| CausalScore {
            feature,
            value: sign * (f64::from(label) - expectation),
            witness: None,
            kind: CausalKind::Counter,
            budget_exhausted: false,
        })
        .collect();
    Ok(envelope(space, e_star, label, ScoreKind::Counter, scores, cfg.tie_break))
}

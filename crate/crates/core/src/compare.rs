//! Comparison statistics between explanation runs and the bucket-count
//! sensitivity study.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::classifier::{Classifier, Label};
use crate::engine::{Engine, EngineConfig};
use crate::error::{Error, Result};
use crate::explanation::{Explanation, ScoreKind};
use crate::tabular::{bucketize, BucketSpec, Bucketing, Dataset, Entity, Value};

/// Histogram bin for entities without an explanation.
pub const NO_EXPLANATION: &str = "⊥";

/// Ranked feature lists of one run, aligned by entity.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplanationSet {
    pub kind: String,
    pub entities: Vec<Vec<Value>>,
    pub rankings: Vec<Vec<String>>,
    pub no_explanation: Vec<bool>,
}

impl ExplanationSet {
    /// Rankings keep only features with a nonzero score, except for FICO
    /// explanations whose ranking is taken as given.
    pub fn from_explanations(kind: impl Into<String>, xs: &[Explanation]) -> Self {
        let mut set = ExplanationSet { kind: kind.into(), entities: vec![], rankings: vec![], no_explanation: vec![] };
        for x in xs {
            let ranking: Vec<String> = if x.no_explanation {
                Vec::new()
            } else if x.kind == ScoreKind::Fico {
                x.ranking.clone()
            } else {
                let zero: HashSet<&str> =
                    x.scores.iter().filter(|s| s.value == 0.0).map(|s| s.feature.as_str()).collect();
                x.ranking.iter().filter(|f| !zero.contains(f.as_str())).cloned().collect()
            };
            set.entities.push(x.entity.clone());
            set.no_explanation.push(ranking.is_empty());
            set.rankings.push(ranking);
        }
        set
    }

    /// Bare rankings, with an empty list meaning "no explanation".
    pub fn from_rankings(kind: impl Into<String>, rankings: Vec<Vec<String>>) -> Self {
        ExplanationSet {
            kind: kind.into(),
            entities: (0..rankings.len()).map(|i| vec![Value::Int(i as i64)]).collect(),
            no_explanation: rankings.iter().map(Vec::is_empty).collect(),
            rankings,
        }
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    fn top(&self, i: usize, k: usize) -> HashSet<&str> {
        if self.no_explanation[i] {
            return HashSet::new();
        }
        self.rankings[i].iter().take(k).map(String::as_str).collect()
    }
}

fn check_aligned(xs: &ExplanationSet, ys: &ExplanationSet) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::Misaligned(format!("{} entities versus {}", xs.len(), ys.len())));
    }
    if let Some(i) = (0..xs.len()).find(|&i| xs.entities[i] != ys.entities[i]) {
        return Err(Error::Misaligned(format!("entity #{i} differs between the two runs")));
    }
    Ok(())
}

/// How often each feature is ranked first.
pub fn top1_distribution(xs: &ExplanationSet) -> BTreeMap<String, u64> {
    let mut hist = BTreeMap::new();
    for (ranking, &none) in xs.rankings.iter().zip(&xs.no_explanation) {
        let key = match ranking.first() {
            Some(f) if !none => f.clone(),
            _ => NO_EXPLANATION.to_string(),
        };
        *hist.entry(key).or_insert(0) += 1;
    }
    hist
}

/// `hist[j]` counts entities whose top-`k` sets share `j` features.
pub fn topk_intersection(xs: &ExplanationSet, ys: &ExplanationSet, k: usize) -> Result<Vec<u64>> {
    check_aligned(xs, ys)?;
    let mut hist = vec![0u64; k + 1];
    for i in 0..xs.len() {
        hist[xs.top(i, k).intersection(&ys.top(i, k)).count()] += 1;
    }
    Ok(hist)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JaccardSummary {
    /// Mean over counted pairs; 0 when no pair is counted.
    pub mean: f64,
    pub pairs: u64,
    /// Entities where both top-`k` sets are empty.
    pub both_empty: u64,
}

/// Mean Jaccard similarity of the top-`k` sets.
pub fn jaccard_mean(xs: &ExplanationSet, ys: &ExplanationSet, k: usize) -> Result<JaccardSummary> {
    check_aligned(xs, ys)?;
    let mut total = 0.0;
    let mut pairs = 0u64;
    let mut both_empty = 0u64;
    for i in 0..xs.len() {
        let (a, b) = (xs.top(i, k), ys.top(i, k));
        let union = a.union(&b).count();
        if union == 0 {
            both_empty += 1;
            continue;
        }
        total += a.intersection(&b).count() as f64 / union as f64;
        pairs += 1;
    }
    Ok(JaccardSummary { mean: if pairs == 0 { 0.0 } else { total / pairs as f64 }, pairs, both_empty })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub kind_a: String,
    pub kind_b: String,
    pub k: usize,
    pub entities: usize,
    pub intersection: Vec<u64>,
    pub jaccard: JaccardSummary,
    pub top1_a: BTreeMap<String, u64>,
    pub top1_b: BTreeMap<String, u64>,
}

pub fn compare(xs: &ExplanationSet, ys: &ExplanationSet, k: usize) -> Result<CompareReport> {
    Ok(CompareReport {
        kind_a: xs.kind.clone(),
        kind_b: ys.kind.clone(),
        k,
        entities: xs.len(),
        intersection: topk_intersection(xs, ys, k)?,
        jaccard: jaccard_mean(xs, ys, k)?,
        top1_a: top1_distribution(xs),
        top1_b: top1_distribution(ys),
    })
}

impl CompareReport {
    /// `statistic,key,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("statistic,key,value\n");
        for (j, c) in self.intersection.iter().enumerate() {
            out.push_str(&format!("intersection,{j},{c}\n"));
        }
        out.push_str(&format!("jaccard,mean,{}\n", self.jaccard.mean));
        out.push_str(&format!("jaccard,pairs,{}\n", self.jaccard.pairs));
        out.push_str(&format!("jaccard,both_empty,{}\n", self.jaccard.both_empty));
        for (name, hist) in [("top1_a", &self.top1_a), ("top1_b", &self.top1_b)] {
            for (f, c) in hist {
                out.push_str(&format!("{name},{f},{c}\n"));
            }
        }
        out
    }

    /// Whitespace-separated columnar files for plotting, keyed by file name.
    pub fn plot_data(&self) -> Vec<(String, String)> {
        let mut files = Vec::new();
        let mut s = String::from("# size count\n");
        for (j, c) in self.intersection.iter().enumerate() {
            s.push_str(&format!("{j} {c}\n"));
        }
        files.push(("intersection.dat".to_string(), s));
        for (name, kind, hist) in [("top1_a.dat", &self.kind_a, &self.top1_a), ("top1_b.dat", &self.kind_b, &self.top1_b)] {
            let mut s = format!("# {kind}: index feature count\n");
            for (i, (f, c)) in hist.iter().enumerate() {
                s.push_str(&format!("{i} \"{f}\" {c}\n"));
            }
            files.push((name.to_string(), s));
        }
        files
    }
}

/// Runs a classifier trained on original values over a bucketized dataset:
/// each bucket representative is replaced by the observed member value
/// closest to it before the entity is classified.
pub struct BucketedClassifier<'a> {
    inner: &'a dyn Classifier,
    proxies: Vec<(usize, HashMap<u64, Value>)>,
}

impl<'a> BucketedClassifier<'a> {
    pub fn new(inner: &'a dyn Classifier, original: &Dataset, bucketing: &Bucketing) -> Result<Self> {
        let mut proxies = Vec::new();
        for (i, enc) in &bucketing.encodings {
            let mut best: HashMap<u64, (f64, Value)> = HashMap::new();
            for row in original.rows() {
                let v = &row.entity[*i];
                let rep = enc.representative_of(v)?;
                let d = (v.as_f64().expect("bucketized features are numeric") - rep).abs();
                let entry = best.entry(rep.to_bits()).or_insert((f64::INFINITY, v.clone()));
                if d < entry.0 || (d == entry.0 && *v < entry.1) {
                    *entry = (d, v.clone());
                }
            }
            proxies.push((*i, best.into_iter().map(|(k, (_, v))| (k, v)).collect()));
        }
        Ok(BucketedClassifier { inner, proxies })
    }

    fn decode(&self, e: &Entity) -> Result<Entity> {
        let mut out = e.clone();
        for (i, map) in &self.proxies {
            let rep = e[*i].as_f64().ok_or_else(|| Error::Uncovered { feature: format!("#{i}"), value: e[*i].to_string() })?;
            out.0[*i] = map
                .get(&rep.to_bits())
                .cloned()
                .ok_or_else(|| Error::Uncovered { feature: format!("#{i}"), value: e[*i].to_string() })?;
        }
        Ok(out)
    }
}

impl Classifier for BucketedClassifier<'_> {
    fn name(&self) -> &str {
        "bucketed"
    }

    fn arity(&self) -> usize {
        self.inner.arity()
    }

    fn classify(&self, entity: &Entity) -> Result<Label> {
        self.inner.classify(&self.decode(entity)?)
    }

    fn classify_many(&self, entities: &[Entity]) -> Result<Vec<Label>> {
        let decoded = entities.iter().map(|e| self.decode(e)).collect::<Result<Vec<_>>>()?;
        self.inner.classify_many(&decoded)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub k: usize,
    pub distribution: BTreeMap<String, u64>,
    pub explained: usize,
    /// Entities left out because bucketization changed their label to 0
    /// and the score kind explains label 1 only.
    pub relabelled: usize,
    pub timed_out: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Re-bucketize every numeric feature equi-depth with each `k`, explain
/// `entities` (given in original values) and report the top-1 distribution.
/// With a timeout, a `k` stops early and is marked `timed_out`.
/// Causal scores skip entities whose bucketized label is 0 unless
/// `explain_zero` is set.
pub fn bucket_sensitivity(
    ds: &Dataset,
    l: &dyn Classifier,
    entities: &[Entity],
    cfg: EngineConfig,
    ks: &[usize],
    timeout: Option<Duration>,
) -> Result<Vec<SensitivityRow>> {
    if cfg.kind == ScoreKind::Fico {
        return Err(Error::Precondition("FICO explanations do not depend on the dataset".into()));
    }
    let numeric: Vec<&String> =
        ds.features().iter().zip(ds.kinds()).filter(|(_, k)| k.is_numeric()).map(|(f, _)| f).collect();
    if numeric.len() != ds.num_features() {
        return Err(Error::Precondition("bucket sensitivity needs all features numeric".into()));
    }
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let start = Instant::now();
        let specs: Vec<(String, BucketSpec)> = numeric.iter().map(|f| ((*f).clone(), BucketSpec::EquiDepth { k })).collect();
        let (bucketed, bucketing) = bucketize(ds, &specs)?;
        let lb = BucketedClassifier::new(l, ds, &bucketing)?;
        let engine = Engine::new(&bucketed, &lb, None, cfg)?;
        let mut xs = Vec::with_capacity(entities.len());
        let mut timed_out = false;
        let mut relabelled = 0;
        let positive_only = matches!(cfg.kind, ScoreKind::Counter | ScoreKind::Resp) && !cfg.resp.explain_zero;
        for (i, e) in entities.iter().enumerate() {
            if timeout.is_some_and(|t| start.elapsed() > t) {
                timed_out = true;
                break;
            }
            let translated = bucketing.translate(e)?;
            if positive_only && lb.classify(&translated)? == 0 {
                relabelled += 1;
                continue;
            }
            xs.push(engine.explain(&translated, i)?);
        }
        rows.push(SensitivityRow {
            k,
            distribution: top1_distribution(&ExplanationSet::from_explanations(cfg.kind.as_str(), &xs)),
            explained: xs.len(),
            relabelled,
            timed_out,
            elapsed: start.elapsed(),
        });
    }
    Ok(rows)
}

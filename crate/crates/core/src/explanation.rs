//! Per-entity explanation envelope shared by every score kind.

use serde::{Deserialize, Serialize};

use crate::classifier::Label;
use crate::tabular::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Counter,
    Resp,
    Shap,
    #[serde(rename = "kernelshap")]
    KernelShap,
    Fico,
}

impl ScoreKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreKind::Counter => "counter",
            ScoreKind::Resp => "resp",
            ScoreKind::Shap => "shap",
            ScoreKind::KernelShap => "kernelshap",
            ScoreKind::Fico => "fico",
        }
    }
}

impl std::str::FromStr for ScoreKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "counter" => Ok(ScoreKind::Counter),
            "resp" => Ok(ScoreKind::Resp),
            "shap" => Ok(ScoreKind::Shap),
            "kernelshap" => Ok(ScoreKind::KernelShap),
            "fico" => Ok(ScoreKind::Fico),
            other => Err(format!("unknown score kind `{other}`")),
        }
    }
}

/// How features are ordered in a ranking. Ties always fall back to ascending
/// feature index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Descending signed score.
    #[default]
    ScoreThenIndex,
    /// Descending absolute score.
    MagnitudeThenIndex,
}

/// One feature's score in the output envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_level: Option<Vec<f64>>,
    /// RESP only: no nonzero contingency exists within the size budget.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub budget_exhausted: bool,
}

impl FeatureScore {
    pub fn plain(feature: impl Into<String>, value: f64) -> Self {
        FeatureScore { feature: feature.into(), value, gamma: None, w: None, per_level: None, budget_exhausted: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(default)]
    pub subsets_visited: u64,
    #[serde(default)]
    pub subsets_pruned: u64,
    #[serde(default)]
    pub oracle_probes: u64,
    #[serde(default)]
    pub skipped_coalitions: u64,
}

/// Ranked subscales and features of a white-box explanation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FicoDetail {
    pub subscale_ranking: Vec<RankedSubscale>,
    pub final_ranking: Vec<RankedFeature>,
    pub global_risk: f64,
    pub m: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSubscale {
    pub subscale: String,
    pub subscale_risk: f64,
    pub subscale_weight: f64,
    pub subscale_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub feature: String,
    pub subscale: String,
    pub subscale_score: f64,
    pub feature_score: f64,
}

/// Scores for one entity, with the feature ranking derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub entity: Vec<Value>,
    pub label: Label,
    pub kind: ScoreKind,
    pub scores: Vec<FeatureScore>,
    pub ranking: Vec<String>,
    pub no_explanation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
    #[serde(default, skip_serializing_if = "Option::is_none", flatten)]
    pub fico: Option<FicoDetail>,
}

/// Indices of `values` in ranking order.
pub fn rank_indices(values: &[f64], tie_break: TieBreak) -> Vec<usize> {
    let key = |v: f64| match tie_break {
        TieBreak::ScoreThenIndex => v,
        TieBreak::MagnitudeThenIndex => v.abs(),
    };
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| key(values[b]).total_cmp(&key(values[a])).then(a.cmp(&b)));
    idx
}

/// Like [`rank_indices`] but zero scores always come last.
pub fn rank_indices_zero_last(values: &[f64], tie_break: TieBreak) -> Vec<usize> {
    let (nonzero, zero): (Vec<usize>, Vec<usize>) =
        rank_indices(values, tie_break).into_iter().partition(|&i| values[i] != 0.0);
    nonzero.into_iter().chain(zero).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_rules() {
        let v = [0.5, 0.0, 0.5, -0.7];
        assert_eq!(rank_indices(&v, TieBreak::ScoreThenIndex), vec![0, 2, 1, 3]);
        assert_eq!(rank_indices(&v, TieBreak::MagnitudeThenIndex), vec![3, 0, 2, 1]);
        assert_eq!(rank_indices_zero_last(&v, TieBreak::ScoreThenIndex), vec![0, 2, 3, 1]);
    }

    #[test]
    fn envelope_json_shape() {
        let e = Explanation {
            entity: vec![Value::Int(1)],
            label: 1,
            kind: ScoreKind::Resp,
            scores: vec![FeatureScore {
                gamma: Some(vec!["F2".into()]),
                w: Some(vec![Value::Int(0)]),
                ..FeatureScore::plain("F1", 0.25)
            }],
            ranking: vec!["F1".into()],
            no_explanation: false,
            diagnostics: None,
            fico: None,
        };
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(
            s,
            r#"{"entity":[1],"label":1,"kind":"resp","scores":[{"feature":"F1","value":0.25,"gamma":["F2"],"w":[0]}],"ranking":["F1"],"no_explanation":false}"#
        );
        assert_eq!(serde_json::from_str::<Explanation>(&s).unwrap(), e);
    }
}

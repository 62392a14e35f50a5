//! White-box explanation of a subscale model: rank subscales by subscale
//! score, keep the top `m`, keep the top `k` features of each by feature
//! score, and concatenate.

use serde::Serialize;

use crate::classifier::{Label, SubscaleModel};
use crate::error::{Error, Result};
use crate::explanation::{Explanation, FeatureScore, FicoDetail, RankedFeature, RankedSubscale, ScoreKind};
use crate::tabular::Entity;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FicoExplanation {
    pub entity: Entity,
    pub label: Label,
    pub global_risk: f64,
    pub subscale_ranking: Vec<RankedSubscale>,
    pub final_ranking: Vec<RankedFeature>,
    /// Every feature's score in entity column order.
    pub feature_scores: Vec<(String, f64)>,
    pub m: usize,
    pub k: usize,
}

/// Stable descending order; equal keys keep declaration order.
fn descending<T>(items: &mut [T], key: impl Fn(&T) -> f64) {
    items.sort_by(|a, b| key(b).total_cmp(&key(a)));
}

/// `m` larger than the number of subscales keeps them all.
pub fn fico_explain(model: &SubscaleModel, e: &Entity, m: usize, k: usize) -> Result<FicoExplanation> {
    if m == 0 || k == 0 {
        return Err(Error::Precondition(format!("subscale and feature counts must be positive, got M={m}, K={k}")));
    }
    let breakdown = model.subscale_risks(e)?;
    let mut subscales: Vec<_> = breakdown.subscales.iter().collect();
    descending(&mut subscales, |s| s.score);
    let m = m.min(subscales.len());

    let mut final_ranking = Vec::new();
    for s in &subscales[..m] {
        let mut features: Vec<_> = s.features.iter().collect();
        descending(&mut features, |f| f.score);
        final_ranking.extend(features.into_iter().take(k).map(|f| RankedFeature {
            feature: f.name.clone(),
            subscale: s.name.clone(),
            subscale_score: s.score,
            feature_score: f.score,
        }));
    }
    let subscale_ranking = subscales
        .iter()
        .map(|s| RankedSubscale {
            subscale: s.name.clone(),
            subscale_risk: s.risk,
            subscale_weight: s.weight,
            subscale_score: s.score,
        })
        .collect();
    let feature_scores = model
        .feature_order()
        .into_iter()
        .map(|name| {
            let score = breakdown.feature(&name).map(|f| f.score).unwrap_or_default();
            (name, score)
        })
        .collect();
    Ok(FicoExplanation {
        entity: e.clone(),
        label: Label::from(breakdown.global_risk > model.threshold()),
        global_risk: breakdown.global_risk,
        subscale_ranking,
        final_ranking,
        feature_scores,
        m,
        k,
    })
}

impl FicoExplanation {
    pub fn ranking(&self) -> Vec<String> {
        self.final_ranking.iter().map(|f| f.feature.clone()).collect()
    }

    pub fn into_explanation(self) -> Explanation {
        let ranking = self.ranking();
        Explanation {
            entity: self.entity.values().to_vec(),
            label: self.label,
            kind: ScoreKind::Fico,
            scores: self.feature_scores.into_iter().map(|(f, v)| FeatureScore::plain(f, v)).collect(),
            no_explanation: ranking.is_empty(),
            ranking,
            diagnostics: None,
            fico: Some(FicoDetail {
                subscale_ranking: self.subscale_ranking,
                final_ranking: self.final_ranking,
                global_risk: self.global_risk,
                m: self.m,
                k: self.k,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fico_entity, fico_model, FICO_FEATURES, FICO_GLOBAL_RISK, FICO_SUBSCALES};

    #[test]
    fn documented_entity() {
        let model = fico_model().unwrap();
        let (_, e) = fico_entity().unwrap();
        let x = fico_explain(&model, &e, 2, 2).unwrap();
        let top: Vec<_> = x.subscale_ranking.iter().take(2).map(|s| s.subscale.as_str()).collect();
        assert_eq!(top, ["Delinquency", "ExternalRiskEstimate"]);
        assert_eq!(
            x.ranking(),
            ["MaxDelq2PublicRecLast12M", "PercentTradesNeverDelq", "ExternalRiskEstimate"]
        );
        assert!((x.global_risk - FICO_GLOBAL_RISK).abs() < 5e-4);
        assert_eq!(x.label, 1);
        for (name, risk, _, score) in FICO_SUBSCALES {
            let s = x.subscale_ranking.iter().find(|s| s.subscale == name).unwrap();
            assert!((s.subscale_risk - risk).abs() < 5e-5, "{name}");
            assert!((s.subscale_score - score).abs() < 5e-4, "{name}");
        }
        for ((name, score), (expected, _, documented)) in x.feature_scores.iter().zip(FICO_FEATURES) {
            assert_eq!(name, expected);
            assert!((score - documented).abs() < 1e-12);
        }
    }

    #[test]
    fn no_truncation_and_clamping() {
        let model = fico_model().unwrap();
        let (_, e) = fico_entity().unwrap();
        let x = fico_explain(&model, &e, 10, 4).unwrap();
        assert_eq!(x.final_ranking.len(), 23);
        // grouped by subscale in descending subscale score
        let mut seen: Vec<&str> = Vec::new();
        for f in &x.final_ranking {
            if seen.last() != Some(&f.subscale.as_str()) {
                assert!(!seen.contains(&f.subscale.as_str()));
                seen.push(&f.subscale);
            }
        }
        assert_eq!(seen.len(), 10);
        assert_eq!(fico_explain(&model, &e, 50, 4).unwrap().m, 10);
        assert!(fico_explain(&model, &e, 0, 2).is_err());
        assert!(fico_explain(&model, &e, 2, 0).is_err());
        let env = x.into_explanation();
        assert_eq!(env.ranking.len(), 23);
        assert_eq!(env.fico.unwrap().m, 10);
    }
}

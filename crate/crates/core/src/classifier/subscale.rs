//! Two-layer logistic "subscale" credit model.
//!
//! Every input feature is bucketized and one-hot encoded. Layer one is one
//! logistic regression per subscale over the one-hot vectors of its member
//! features; layer two is a logistic regression over the subscale risks. The
//! entity is high risk (label 1) when the global risk exceeds the threshold.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::{Classifier, Label};
use crate::error::{Error, Result};
use crate::tabular::{check_arity, BucketSpec, Buckets, Entity, Value};

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFeature {
    pub name: String,
    pub spec: BucketSpec,
    pub buckets: Buckets,
    /// One weight per bucket.
    pub weights: Vec<f64>,
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subscale {
    pub name: String,
    /// Layer-two weight.
    pub weight: f64,
    /// Layer-one bias of this subscale's logistic model.
    pub bias: f64,
    pub features: Vec<ModelFeature>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubscaleModel {
    subscales: Vec<Subscale>,
    layer2_bias: f64,
    threshold: f64,
    names: Vec<String>,
    // entity position of each feature, in declaration order
    columns: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureBreakdown {
    pub name: String,
    pub value: Value,
    pub bucket: usize,
    /// Dot product of the one-hot vector with the feature's weights.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubscaleRisk {
    pub name: String,
    pub risk: f64,
    pub weight: f64,
    /// `weight * risk`.
    pub score: f64,
    pub features: Vec<FeatureBreakdown>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubscaleBreakdown {
    pub subscales: Vec<SubscaleRisk>,
    pub global_risk: f64,
}

impl SubscaleBreakdown {
    pub fn feature(&self, name: &str) -> Option<&FeatureBreakdown> {
        self.subscales.iter().flat_map(|s| &s.features).find(|f| f.name == name)
    }

    pub fn subscale(&self, name: &str) -> Option<&SubscaleRisk> {
        self.subscales.iter().find(|s| s.name == name)
    }
}

#[derive(Serialize, Deserialize)]
struct FeatureRepr {
    name: String,
    buckets: BucketSpec,
    weights: Vec<f64>,
    #[serde(default)]
    monotone: bool,
}

#[derive(Serialize, Deserialize)]
struct SubscaleRepr {
    name: String,
    weight: f64,
    bias: f64,
    features: Vec<FeatureRepr>,
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    subscales: Vec<SubscaleRepr>,
    layer2_bias: f64,
    #[serde(default = "default_threshold")]
    threshold: f64,
}

fn default_threshold() -> f64 {
    0.5
}

impl SubscaleModel {
    pub fn new(subscales: Vec<Subscale>, layer2_bias: f64, threshold: f64) -> Result<Self> {
        if subscales.is_empty() {
            return Err(Error::Model("no subscales".into()));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::Model(format!("threshold {threshold} outside (0, 1)")));
        }
        let mut names: Vec<String> = Vec::new();
        for s in &subscales {
            if s.features.is_empty() {
                return Err(Error::Model(format!("subscale `{}` has no features", s.name)));
            }
            for f in &s.features {
                if names.contains(&f.name) {
                    return Err(Error::Model(format!("feature `{}` belongs to two subscales", f.name)));
                }
                if f.weights.len() != f.buckets.len() {
                    return Err(Error::Model(format!(
                        "feature `{}` has {} buckets but {} weights",
                        f.name,
                        f.buckets.len(),
                        f.weights.len()
                    )));
                }
                names.push(f.name.clone());
            }
        }
        let columns = (0..names.len()).collect();
        Ok(SubscaleModel { subscales, layer2_bias, threshold, names, columns })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let repr: ModelRepr = serde_json::from_str(json)?;
        let subscales = repr
            .subscales
            .into_iter()
            .map(|s| {
                let features = s
                    .features
                    .into_iter()
                    .map(|f| {
                        let buckets = f.buckets.explicit_buckets(&f.name)?;
                        Ok(ModelFeature {
                            name: f.name,
                            spec: f.buckets,
                            buckets,
                            weights: f.weights,
                            monotone: f.monotone,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Subscale { name: s.name, weight: s.weight, bias: s.bias, features })
            })
            .collect::<Result<Vec<_>>>()?;
        SubscaleModel::new(subscales, repr.layer2_bias, repr.threshold)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        SubscaleModel::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let repr = ModelRepr {
            subscales: self
                .subscales
                .iter()
                .map(|s| SubscaleRepr {
                    name: s.name.clone(),
                    weight: s.weight,
                    bias: s.bias,
                    features: s
                        .features
                        .iter()
                        .map(|f| FeatureRepr {
                            name: f.name.clone(),
                            buckets: f.spec.clone(),
                            weights: f.weights.clone(),
                            monotone: f.monotone,
                        })
                        .collect(),
                })
                .collect(),
            layer2_bias: self.layer2_bias,
            threshold: self.threshold,
        };
        Ok(serde_json::to_string_pretty(&repr)?)
    }

    /// Read entities whose columns are `order` (which must name every model
    /// feature exactly once).
    pub fn with_feature_order(mut self, order: &[String]) -> Result<Self> {
        if order.len() != self.names.len() {
            return Err(Error::Model(format!(
                "model has {} features, dataset has {}",
                self.names.len(),
                order.len()
            )));
        }
        self.columns = self
            .names
            .iter()
            .map(|n| order.iter().position(|o| o == n).ok_or_else(|| Error::UnknownFeature(n.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(self)
    }

    pub fn subscales(&self) -> &[Subscale] {
        &self.subscales
    }

    pub fn layer2_bias(&self) -> f64 {
        self.layer2_bias
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Feature names in entity column order.
    pub fn feature_order(&self) -> Vec<String> {
        let mut out = vec![String::new(); self.names.len()];
        for (name, &col) in self.names.iter().zip(&self.columns) {
            out[col] = name.clone();
        }
        out
    }

    /// Run both layers and keep every intermediate score.
    pub fn subscale_risks(&self, e: &Entity) -> Result<SubscaleBreakdown> {
        check_arity(self.names.len(), e.values())?;
        let mut k = 0;
        let mut global = self.layer2_bias;
        let mut subscales = Vec::with_capacity(self.subscales.len());
        for s in &self.subscales {
            let mut acc = s.bias;
            let mut features = Vec::with_capacity(s.features.len());
            for f in &s.features {
                let value = &e[self.columns[k]];
                k += 1;
                let bucket = value
                    .as_f64()
                    .and_then(|x| f.buckets.index_of(x))
                    .ok_or_else(|| Error::Uncovered { feature: f.name.clone(), value: value.to_string() })?;
                let score = f.weights[bucket];
                acc += score;
                features.push(FeatureBreakdown { name: f.name.clone(), value: value.clone(), bucket, score });
            }
            let risk = sigmoid(acc);
            global += s.weight * risk;
            subscales.push(SubscaleRisk { name: s.name.clone(), risk, weight: s.weight, score: s.weight * risk, features });
        }
        Ok(SubscaleBreakdown { subscales, global_risk: sigmoid(global) })
    }
}

impl Classifier for SubscaleModel {
    fn name(&self) -> &str {
        "subscale-model"
    }

    fn arity(&self) -> usize {
        self.names.len()
    }

    fn classify(&self, entity: &Entity) -> Result<Label> {
        Ok(Label::from(self.subscale_risks(entity)?.global_risk > self.threshold))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "subscales": [
            {"name": "A", "weight": 2.0, "bias": -1.0, "features": [
                {"name": "x", "buckets": {"ranges": [[0, 9], [10, "inf"]], "specials": [-9]}, "weights": [0.5, 1.5, 0.0], "monotone": true}
            ]},
            {"name": "B", "weight": 1.0, "bias": 0.0, "features": [
                {"name": "y", "buckets": {"ranges": [[0, 1]]}, "weights": [0.25]},
                {"name": "z", "buckets": {"ranges": [[0, 1]]}, "weights": [-0.25]}
            ]}
        ],
        "layer2_bias": -1.5
    }"#;

    #[test]
    fn two_layer_evaluation() {
        let m = SubscaleModel::from_json(SMALL).unwrap();
        let b = m.subscale_risks(&Entity::ints(&[12, 0, 1])).unwrap();
        let a = sigmoid(-1.0 + 1.5);
        assert!((b.subscales[0].risk - a).abs() < 1e-15);
        assert_eq!(b.subscales[0].score, 2.0 * a);
        assert_eq!(b.subscales[1].risk, 0.5);
        assert!((b.global_risk - sigmoid(-1.5 + 2.0 * a + 0.5)).abs() < 1e-15);
        assert_eq!(m.classify(&Entity::ints(&[12, 0, 1])).unwrap(), Label::from(b.global_risk > 0.5));
        assert!(matches!(m.subscale_risks(&Entity::ints(&[-3, 0, 1])), Err(Error::Uncovered { .. })));
    }

    #[test]
    fn reordered_columns() {
        let m = SubscaleModel::from_json(SMALL).unwrap();
        let r = m.clone().with_feature_order(&["z".into(), "x".into(), "y".into()]).unwrap();
        assert_eq!(
            m.subscale_risks(&Entity::ints(&[12, 0, 1])).unwrap(),
            r.subscale_risks(&Entity::ints(&[1, 12, 0])).unwrap()
        );
        assert!(m.with_feature_order(&["x".into(), "y".into(), "q".into()]).is_err());
    }

    #[test]
    fn validation() {
        let bad = SMALL.replace("[0.5, 1.5, 0.0]", "[0.5]");
        assert!(matches!(SubscaleModel::from_json(&bad), Err(Error::Model(_))));
        let dup = SMALL.replace("\"z\"", "\"y\"");
        assert!(matches!(SubscaleModel::from_json(&dup), Err(Error::Model(_))));
        let m = SubscaleModel::from_json(SMALL).unwrap();
        assert_eq!(SubscaleModel::from_json(&m.to_json().unwrap()).unwrap(), m);
    }
}

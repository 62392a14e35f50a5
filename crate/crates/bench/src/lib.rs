//! Benchmark inputs shared by the criterion targets.

use std::path::Path;

use ce_core::classifier::{Classifier, SubscaleModel};
use ce_core::tabular::{load_dataset, Dataset, Entity};

/// The bundled synthetic credit dataset with its model.
pub fn synthetic_credit() -> (Dataset, SubscaleModel) {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let ds = load_dataset(root.join("synthetic_credit.csv"), None).expect("bundled dataset");
    let model = SubscaleModel::load(root.join("synthetic_credit_model.json"))
        .and_then(|m| m.with_feature_order(ds.features()))
        .expect("bundled model");
    (ds, model)
}

/// The first `count` rows labelled 1.
pub fn positive_rows(ds: &Dataset, l: &dyn Classifier, count: usize) -> Vec<Entity> {
    ds.rows()
        .iter()
        .map(|r| r.entity.clone())
        .filter(|e| l.classify(e).is_ok_and(|y| y == 1))
        .take(count)
        .collect()
}

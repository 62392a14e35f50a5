//! The bundled white-box credit model and the entity it is documented with.

use crate::classifier::SubscaleModel;
use crate::error::Result;
use crate::tabular::{read_dataset, Entity};

pub const FICO_MODEL_JSON: &str = include_str!("../fixtures/fico_fixture.json");
pub const FICO_ENTITY_CSV: &str = include_str!("../fixtures/fico_entity.csv");

/// Reference `(subscale, risk, weight, score)` for the documented entity.
pub const FICO_SUBSCALES: [(&str, f64, f64, f64); 10] = [
    ("ExternalRiskEstimate", 0.8262, 1.566, 1.2934),
    ("TradeOpenTime", 0.4690, 2.527, 1.1842),
    ("NumSatisfactoryTrades", 0.4513, 2.156, 0.9729),
    ("TradeFrequency", 0.4425, 0.359, 0.1588),
    ("Delinquency", 0.6847, 2.545, 1.7425),
    ("Installment", 0.5273, 0.913, 0.4817),
    ("Inquiry", 0.3172, 3.004, 0.9529),
    ("RevolvingBalance", 0.6500, 1.924, 1.2505),
    ("Utilization", 0.6490, 0.987, 0.6406),
    ("TradeWBalance", 0.6113, 0.296, 0.1808),
];

/// Reference `(feature, value, feature score)` for the documented entity.
pub const FICO_FEATURES: [(&str, i64, f64); 23] = [
    ("ExternalRiskEstimate", 61, 2.9896),
    ("MSinceOldestTradeOpen", 198, 0.2453),
    ("MSinceMostRecentTradeOpen", 14, 0.0311),
    ("AverageMInFile", 96, 0.2960),
    ("NumSatisfactoryTrades", 25, 0.0001),
    ("NumTrades60Ever2DerogPubRec", 0, 0.0003),
    ("NumTrades90Ever2DerogPubRec", 0, 0.1515),
    ("NumTotalTrades", 27, 0.2653),
    ("NumTradesOpeninLast12M", 0, 0.0000),
    ("PercentTradesNeverDelq", 89, 0.5686),
    ("MSinceMostRecentDelq", 1, 0.4015),
    ("MaxDelq2PublicRecLast12M", 4, 1.0046),
    ("MaxDelqEver", 6, 0.0000),
    ("PercentInstallTrades", 11, 0.0009),
    ("NetFractionInstallBurden", 75, 0.3706),
    ("NumInstallTradesWBalance", 2, 1.4898),
    ("MSinceMostRecentInqexcl7days", 11, 0.8318),
    ("NumInqLast6M", 0, 0.0002),
    ("NumInqLast6Mexcl7days", 0, 0.0000),
    ("NetFractionRevolvingBurden", 67, 1.3938),
    ("NumRevolvingTradesWBalance", 7, 0.1176),
    ("NumBank2NatlTradesWHighUtilization", 2, 0.8562),
    ("PercentTradesWBalance", 75, 0.4528),
];

pub const FICO_GLOBAL_RISK: f64 = 0.6146;

pub fn fico_model() -> Result<SubscaleModel> {
    SubscaleModel::from_json(FICO_MODEL_JSON)
}

/// Column names and the documented entity.
pub fn fico_entity() -> Result<(Vec<String>, Entity)> {
    let ds = read_dataset(FICO_ENTITY_CSV.as_bytes(), None)?;
    let entity = ds.rows()[0].entity.clone();
    Ok((ds.features().to_vec(), entity))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entity_matches_table() {
        let (names, e) = fico_entity().unwrap();
        assert_eq!(names.len(), 23);
        for (i, (name, value, _)) in FICO_FEATURES.iter().enumerate() {
            assert_eq!(&names[i], name);
            assert_eq!(e[i].as_f64(), Some(*value as f64));
        }
        assert_eq!(fico_model().unwrap().feature_order(), names);
    }
}

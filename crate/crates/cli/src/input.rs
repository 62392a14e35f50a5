//! Dataset, classifier and entity loading.

use std::path::Path;

use ce_core::classifier::{Classifier, ExternalOracle, SubscaleModel};
use ce_core::tabular::{load_dataset, read_dataset, Dataset, Entity, Value};

use crate::{Failure, ModelArgs};

pub enum Loaded {
    Model(SubscaleModel),
    Oracle(ExternalOracle),
}

impl Loaded {
    pub fn classifier(&self) -> &dyn Classifier {
        match self {
            Loaded::Model(m) => m,
            Loaded::Oracle(o) => o,
        }
    }

    pub fn model(&self) -> Option<&SubscaleModel> {
        match self {
            Loaded::Model(m) => Some(m),
            Loaded::Oracle(_) => None,
        }
    }
}

const MISSING: f64 = -9.0;

pub fn load(args: &ModelArgs) -> Result<(Dataset, Loaded), Failure> {
    let mut ds = load_dataset(&args.data, None)?;
    if args.drop_all_missing {
        ds = ds.filter(|r| !r.entity.values().iter().all(|v| v.as_f64() == Some(MISSING)))?;
    }
    let loaded = match (&args.model, &args.oracle_cmd) {
        (Some(path), None) => Loaded::Model(SubscaleModel::load(path)?.with_feature_order(ds.features())?),
        (None, Some(cmd)) => Loaded::Oracle(ExternalOracle::new(cmd.clone(), args.oracle_arg.clone(), ds.features().to_vec())?),
        _ => return Err(Failure::Config("give exactly one of --model and --oracle-cmd".into())),
    };
    Ok((ds, loaded))
}

/// Entities of a CSV file whose header names the dataset's features.
pub fn entity_file(ds: &Dataset, path: &Path) -> Result<Vec<Entity>, Failure> {
    let file = read_dataset(std::fs::File::open(path)?, None)?;
    let columns: Vec<usize> = ds
        .features()
        .iter()
        .map(|f| {
            file.features()
                .iter()
                .position(|g| g == f)
                .ok_or_else(|| Failure::Config(format!("entity file lacks column `{f}`")))
        })
        .collect::<Result<_, _>>()?;
    file.rows()
        .iter()
        .map(|r| {
            let cells: Vec<String> = columns.iter().map(|&c| cell(&r.entity[c])).collect();
            let refs: Vec<&str> = cells.iter().map(String::as_str).collect();
            Ok(ds.parse_entity(&refs)?)
        })
        .collect()
}

fn cell(v: &Value) -> String {
    match v {
        Value::Cat(s) => s.clone(),
        other => other.to_string(),
    }
}

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tabular::value::{ColumnKind, Entity, Value};

/// Name of the optional count column.
pub const COUNT_COLUMN: &str = "C";

/// One distinct tuple of `T` together with its multiplicity `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub entity: Entity,
    pub count: u64,
}

/// A counted relation `T(F1, ..., Fn, C)` in canonical form: every value
/// tuple appears once, carrying the summed count of its duplicates. Rows keep
/// the order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<String>,
    kinds: Vec<ColumnKind>,
    rows: Vec<Row>,
    total: u64,
}

/// Column-kind overrides used when loading a file.
pub type Schema = BTreeMap<String, ColumnKind>;

impl Dataset {
    pub fn new(
        features: Vec<String>,
        kinds: Vec<ColumnKind>,
        rows: impl IntoIterator<Item = (Entity, u64)>,
    ) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Precondition("a dataset needs at least one feature".into()));
        }
        if kinds.len() != features.len() {
            return Err(Error::Arity { expected: features.len(), got: kinds.len() });
        }
        let n = features.len();
        let mut index: HashMap<Entity, usize> = HashMap::new();
        let mut merged: Vec<Row> = Vec::new();
        for (entity, count) in rows {
            if entity.len() != n {
                return Err(Error::Arity { expected: n, got: entity.len() });
            }
            if count == 0 {
                return Err(Error::Precondition("row counts must be positive".into()));
            }
            match index.get(&entity) {
                Some(&at) => merged[at].count += count,
                None => {
                    index.insert(entity.clone(), merged.len());
                    merged.push(Row { entity, count });
                }
            }
        }
        if merged.is_empty() {
            return Err(Error::Precondition("a dataset needs at least one row".into()));
        }
        let total = merged.iter().map(|r| r.count).sum();
        Ok(Dataset { features, kinds, rows: merged, total })
    }

    /// Integer-valued dataset with default feature names `F1..Fn`.
    pub fn from_int_rows(rows: &[(&[i64], u64)]) -> Result<Self> {
        let n = rows.first().map(|(r, _)| r.len()).unwrap_or(0);
        Dataset::new(
            default_names(n),
            vec![ColumnKind::Integer; n],
            rows.iter().map(|(r, c)| (Entity::ints(r), *c)),
        )
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// `n`, the number of features.
    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    /// `N`, the number of distinct rows.
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// `M = sum of C`.
    pub fn total_count(&self) -> u64 {
        self.total
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.features
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    pub fn contains(&self, entity: &Entity) -> bool {
        self.rows.iter().any(|r| &r.entity == entity)
    }

    /// Copy of this dataset with `entity` added (count 1 when new, otherwise
    /// the existing row's count is incremented).
    pub fn with_entity(&self, entity: Entity) -> Result<Dataset> {
        Dataset::new(
            self.features.clone(),
            self.kinds.clone(),
            self.rows.iter().map(|r| (r.entity.clone(), r.count)).chain(std::iter::once((entity, 1))),
        )
    }

    /// Keep only rows satisfying `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Row) -> bool) -> Result<Dataset> {
        Dataset::new(
            self.features.clone(),
            self.kinds.clone(),
            self.rows.iter().filter(|r| keep(r)).map(|r| (r.entity.clone(), r.count)),
        )
    }

    /// Parse one record of raw cells with this dataset's column kinds.
    pub fn parse_entity(&self, cells: &[&str]) -> Result<Entity> {
        if cells.len() != self.features.len() {
            return Err(Error::Arity { expected: self.features.len(), got: cells.len() });
        }
        cells
            .iter()
            .zip(&self.kinds)
            .zip(&self.features)
            .map(|((cell, kind), name)| {
                kind.parse(cell).ok_or_else(|| Error::Load {
                    line: 0,
                    message: format!("value `{cell}` of `{name}` is not {kind:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Entity)
    }

    /// Write the dataset as CSV (with a `C` column when any count exceeds 1).
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let with_counts = self.rows.iter().any(|r| r.count > 1);
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.features.iter().map(String::as_str).collect();
        if with_counts {
            header.push(COUNT_COLUMN);
        }
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec: Vec<String> = row.entity.values().iter().map(Value::to_string).collect();
            if with_counts {
                rec.push(row.count.to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("F{i}")).collect()
}

/// Load a CSV file with a header row and an optional trailing `C` column.
pub fn load_dataset(path: impl AsRef<Path>, schema: Option<&Schema>) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    read_dataset(file, schema)
}

/// Same as [`load_dataset`], reading from any source.
pub fn read_dataset<R: std::io::Read>(input: R, schema: Option<&Schema>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut records = reader.records();
    let header = match records.next() {
        Some(rec) => rec?,
        None => return Err(Error::Load { line: 1, message: "empty file".into() }),
    };
    let mut names: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
    let has_count = names.last().map(String::as_str) == Some(COUNT_COLUMN);
    if has_count {
        names.pop();
    }
    if names.is_empty() {
        return Err(Error::Load { line: 1, message: "header has no feature columns".into() });
    }
    let width = names.len() + usize::from(has_count);

    let mut raw: Vec<(u64, Vec<String>, u64)> = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != width {
            return Err(Error::Load {
                line,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        let count = if has_count {
            let cell = rec.get(width - 1).unwrap_or("").trim();
            match cell.parse::<i64>() {
                Ok(c) if c > 0 => c as u64,
                _ => {
                    return Err(Error::Load {
                        line,
                        message: format!("count `{cell}` is not a positive integer"),
                    })
                }
            }
        } else {
            1
        };
        raw.push((line, rec.iter().take(names.len()).map(str::to_string).collect(), count));
    }
    if raw.is_empty() {
        return Err(Error::Load { line: 2, message: "no data rows".into() });
    }

    if let Some(schema) = schema {
        if let Some(unknown) = schema.keys().find(|k| !names.contains(k)) {
            return Err(Error::UnknownFeature(unknown.clone()));
        }
    }
    let kinds: Vec<ColumnKind> = names
        .iter()
        .enumerate()
        .map(|(j, name)| match schema.and_then(|s| s.get(name)) {
            Some(kind) => *kind,
            None => ColumnKind::infer(raw.iter().map(|(_, cells, _)| cells[j].as_str())),
        })
        .collect();

    let mut rows = Vec::with_capacity(raw.len());
    for (line, cells, count) in raw {
        let mut values = Vec::with_capacity(names.len());
        for (j, cell) in cells.iter().enumerate() {
            let v = kinds[j].parse(cell).ok_or_else(|| Error::Load {
                line,
                message: format!("value `{cell}` of `{}` is not {:?}", names[j], kinds[j]),
            })?;
            values.push(v);
        }
        rows.push((Entity(values), count));
    }
    Dataset::new(names, kinds, rows)
}

use std::collections::HashMap;

use crate::classifier::{Classifier, Label};
use crate::error::{Error, Result};
use crate::tabular::{check_arity, Entity};

/// Explicit lookup table from value tuples to labels, with a default label for
/// everything else.
#[derive(Debug, Clone, Default)]
pub struct TableClassifier {
    arity: usize,
    table: HashMap<Entity, Label>,
    default: Label,
}

impl TableClassifier {
    pub fn new(arity: usize, default: Label) -> Self {
        TableClassifier { arity, table: HashMap::new(), default: default.min(1) }
    }

    pub fn insert(&mut self, entity: Entity, label: Label) -> Result<()> {
        check_arity(self.arity, entity.values())?;
        if label > 1 {
            return Err(Error::Precondition(format!("labels are 0 or 1, got {label}")));
        }
        self.table.insert(entity, label);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl Classifier for TableClassifier {
    fn name(&self) -> &str {
        "table"
    }

    fn arity(&self) -> usize {
        self.arity
    }

    fn classify(&self, entity: &Entity) -> Result<Label> {
        check_arity(self.arity, entity.values())?;
        Ok(self.table.get(entity).copied().unwrap_or(self.default))
    }
}

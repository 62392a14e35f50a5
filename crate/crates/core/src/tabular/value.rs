use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Declared kind of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Integer,
    Real,
    Categorical,
}

impl ColumnKind {
    pub fn is_numeric(self) -> bool {
        !matches!(self, ColumnKind::Categorical)
    }

    /// Parse a raw cell according to this kind.
    pub fn parse(self, raw: &str) -> Option<Value> {
        let s = raw.trim();
        match self {
            ColumnKind::Integer => s.parse::<i64>().ok().map(Value::Int),
            ColumnKind::Real => s.parse::<f64>().ok().filter(|v| !v.is_nan()).map(Value::Real),
            ColumnKind::Categorical => Some(Value::Cat(raw.to_string())),
        }
    }

    /// Most specific kind that accepts every cell.
    pub fn infer<'a>(cells: impl Iterator<Item = &'a str> + Clone) -> ColumnKind {
        if cells.clone().all(|c| c.trim().parse::<i64>().is_ok()) {
            ColumnKind::Integer
        } else if cells.clone().all(|c| matches!(c.trim().parse::<f64>(), Ok(v) if !v.is_nan())) {
            ColumnKind::Real
        } else {
            ColumnKind::Categorical
        }
    }
}

/// A single feature value.
///
/// Reals compare by exact bit pattern, so two reals are the same value only
/// when they parsed to the same `f64`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Real(f64),
    Cat(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Real(v) => Some(*v),
            Value::Cat(_) => None,
        }
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            Value::Int(_) => ColumnKind::Integer,
            Value::Real(_) => ColumnKind::Real,
            Value::Cat(_) => ColumnKind::Categorical,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Int(_) => 0,
            Value::Real(_) => 1,
            Value::Cat(_) => 2,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Real(a), Value::Real(b)) => a.to_bits() == b.to_bits(),
            (Value::Cat(a), Value::Cat(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Value::Int(v) => {
                0u8.hash(state);
                v.hash(state)
            }
            Value::Real(v) => {
                1u8.hash(state);
                v.to_bits().hash(state)
            }
            Value::Cat(v) => {
                2u8.hash(state);
                v.hash(state)
            }
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Real(a), Value::Real(b)) => a.total_cmp(b),
            (Value::Cat(a), Value::Cat(b)) => a.cmp(b),
            (a, b) => match (a.as_f64(), b.as_f64()) {
                (Some(x), Some(y)) => x.total_cmp(&y).then(a.rank().cmp(&b.rank())),
                _ => a.rank().cmp(&b.rank()),
            },
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Real(v) => write!(f, "{v}"),
            Value::Cat(v) => f.write_str(v),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Cat(v.to_string())
    }
}

/// An entity `e = <x1, ..., xn>`, one value per feature.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Entity(pub Vec<Value>);

impl Entity {
    pub fn new(values: Vec<Value>) -> Self {
        Entity(values)
    }

    /// Shorthand for integer-valued entities.
    pub fn ints(values: &[i64]) -> Self {
        Entity(values.iter().map(|&v| Value::Int(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    /// `e[F_i := v]`.
    pub fn with(&self, feature: usize, value: Value) -> Entity {
        let mut out = self.clone();
        out.0[feature] = value;
        out
    }

    /// True when both entities agree on every feature in `set`.
    pub fn agrees_on(&self, other: &Entity, set: FeatureSet) -> bool {
        set.iter().all(|i| self.0[i] == other.0[i])
    }
}

impl std::ops::Index<usize> for Entity {
    type Output = Value;

    fn index(&self, i: usize) -> &Value {
        &self.0[i]
    }
}

/// A set of feature indices, stored as a bitset (at most 64 features).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FeatureSet(u64);

impl FeatureSet {
    pub const MAX_FEATURES: usize = 64;

    pub const fn empty() -> Self {
        FeatureSet(0)
    }

    /// `{F_0, ..., F_{n-1}}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= Self::MAX_FEATURES, "feature sets hold at most 64 features");
        if n == 64 {
            FeatureSet(u64::MAX)
        } else {
            FeatureSet((1u64 << n) - 1)
        }
    }

    pub fn from_bits(bits: u64) -> Self {
        FeatureSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(i: usize) -> Self {
        FeatureSet(1u64 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 & (1u64 << i) != 0
    }

    pub fn with(self, i: usize) -> Self {
        FeatureSet(self.0 | (1u64 << i))
    }

    pub fn without(self, i: usize) -> Self {
        FeatureSet(self.0 & !(1u64 << i))
    }

    pub fn union(self, other: FeatureSet) -> Self {
        FeatureSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: FeatureSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn complement(self, n: usize) -> Self {
        FeatureSet(!self.0 & FeatureSet::full(n).0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Ascending feature indices.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    pub fn describe(self, names: &[String]) -> String {
        self.iter().map(|i| names[i].as_str()).collect::<Vec<_>>().join(", ")
    }
}

impl FromIterator<usize> for FeatureSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(FeatureSet::empty(), FeatureSet::with)
    }
}

pub(crate) fn check_arity(expected: usize, entity: &[Value]) -> Result<()> {
    if entity.len() != expected {
        return Err(Error::Arity { expected, got: entity.len() });
    }
    Ok(())
}

//! Bucketization of numeric columns and one-hot encoding of bucket indices.
//!
//! Two bucket families are supported: explicit disjoint ranges plus singleton
//! special codes (e.g. `-7`, `-8`, `-9`), and equi-depth buckets fitted to a
//! column. A fitted [`BucketEncoding`] maps a value to its bucket and each
//! bucket to a representative (the count-weighted mean of its members).

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tabular::{ColumnKind, Dataset, Entity, Value};

/// How one feature is bucketized.
#[derive(Debug, Clone, PartialEq)]
pub enum BucketSpec {
    /// Closed intervals in declaration order, followed by singleton specials.
    ExplicitRanges { ranges: Vec<(f64, f64)>, specials: Vec<f64> },
    /// `k` count-balanced buckets fitted on the column.
    EquiDepth { k: usize },
}

/// One fitted bucket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bucket {
    /// `lo <= x <= hi` (or `lo < x <= hi` when `lo_inclusive` is false).
    Range { lo: f64, lo_inclusive: bool, hi: f64 },
    Special(f64),
}

impl Bucket {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Bucket::Special(v) => x == v,
            Bucket::Range { lo, lo_inclusive, hi } => (if lo_inclusive { x >= lo } else { x > lo }) && x <= hi,
        }
    }
}

/// Ordered bucket list with a membership lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct Buckets(Vec<Bucket>);

impl Buckets {
    pub fn as_slice(&self) -> &[Bucket] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the bucket containing `x`. Specials are checked first.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.0
            .iter()
            .position(|b| matches!(b, Bucket::Special(v) if *v == x))
            .or_else(|| self.0.iter().position(|b| b.contains(x)))
    }
}

impl BucketSpec {
    /// Buckets of an explicit spec, validated for disjointness.
    pub fn explicit_buckets(&self, feature: &str) -> Result<Buckets> {
        let BucketSpec::ExplicitRanges { ranges, specials } = self else {
            return Err(spec_err(feature, "equi-depth buckets must be fitted on a column"));
        };
        if ranges.is_empty() && specials.is_empty() {
            return Err(spec_err(feature, "no buckets declared"));
        }
        for (a, &(lo, hi)) in ranges.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(spec_err(feature, &format!("range [{lo}, {hi}] is empty")));
            }
            for &(lo2, hi2) in &ranges[a + 1..] {
                if lo.max(lo2) <= hi.min(hi2) {
                    return Err(spec_err(feature, &format!("ranges [{lo}, {hi}] and [{lo2}, {hi2}] overlap")));
                }
            }
        }
        for (a, &s) in specials.iter().enumerate() {
            if specials[a + 1..].contains(&s) {
                return Err(spec_err(feature, &format!("special value {s} listed twice")));
            }
            if ranges.iter().any(|&(lo, hi)| lo <= s && s <= hi) {
                return Err(spec_err(feature, &format!("special value {s} lies inside a range")));
            }
        }
        Ok(Buckets(
            ranges
                .iter()
                .map(|&(lo, hi)| Bucket::Range { lo, lo_inclusive: true, hi })
                .chain(specials.iter().map(|&s| Bucket::Special(s)))
                .collect(),
        ))
    }
}

fn spec_err(feature: &str, message: &str) -> Error {
    Error::BucketSpec { feature: feature.to_string(), message: message.to_string() }
}

fn uncovered(feature: &str, value: impl ToString) -> Error {
    Error::Uncovered { feature: feature.to_string(), value: value.to_string() }
}

/// A bucketization fitted to one column.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketEncoding {
    pub feature: String,
    pub buckets: Buckets,
    pub representatives: Vec<f64>,
}

impl BucketEncoding {
    /// Fit `spec` on `(value, count)` pairs of a numeric column.
    pub fn fit(feature: &str, spec: &BucketSpec, column: &[(f64, u64)]) -> Result<BucketEncoding> {
        let mut distinct: BTreeMap<OrdF64, u64> = BTreeMap::new();
        for &(v, c) in column {
            *distinct.entry(OrdF64(v)).or_default() += c;
        }
        let distinct: Vec<(f64, u64)> = distinct.into_iter().map(|(k, c)| (k.0, c)).collect();

        let buckets = match spec {
            BucketSpec::ExplicitRanges { .. } => spec.explicit_buckets(feature)?,
            BucketSpec::EquiDepth { k } => equi_depth(feature, *k, &distinct)?,
        };

        let mut sums = vec![0.0f64; buckets.len()];
        let mut counts = vec![0u64; buckets.len()];
        let mut single: Vec<Option<f64>> = vec![None; buckets.len()];
        let mut members = vec![0usize; buckets.len()];
        for &(v, c) in &distinct {
            let b = buckets.index_of(v).ok_or_else(|| uncovered(feature, v))?;
            sums[b] += v * c as f64;
            counts[b] += c;
            members[b] += 1;
            single[b] = Some(v);
        }
        let representatives = buckets
            .as_slice()
            .iter()
            .enumerate()
            .map(|(b, bucket)| match (members[b], single[b]) {
                (0, _) => empty_representative(bucket),
                (1, Some(v)) => v,
                _ => sums[b] / counts[b] as f64,
            })
            .collect();
        Ok(BucketEncoding { feature: feature.to_string(), buckets, representatives })
    }

    pub fn bucket_of(&self, value: &Value) -> Result<usize> {
        let x = value.as_f64().ok_or_else(|| uncovered(&self.feature, value))?;
        self.buckets.index_of(x).ok_or_else(|| uncovered(&self.feature, value))
    }

    /// Indicator vector with a single 1 at the bucket containing `value`.
    pub fn one_hot(&self, value: &Value) -> Result<Vec<u8>> {
        let b = self.bucket_of(value)?;
        let mut v = vec![0u8; self.buckets.len()];
        v[b] = 1;
        Ok(v)
    }

    /// Representative of the bucket selected by a one-hot vector.
    pub fn decode(&self, one_hot: &[u8]) -> Result<f64> {
        if one_hot.len() != self.buckets.len() || one_hot.iter().map(|&b| b as usize).sum::<usize>() != 1 {
            return Err(Error::Precondition(format!(
                "not a one-hot vector over {} buckets of `{}`",
                self.buckets.len(),
                self.feature
            )));
        }
        let b = one_hot.iter().position(|&x| x == 1).ok_or_else(|| {
            Error::Precondition("one-hot vector entries must be 0 or 1".into())
        })?;
        Ok(self.representatives[b])
    }

    pub fn representative_of(&self, value: &Value) -> Result<f64> {
        Ok(self.representatives[self.bucket_of(value)?])
    }
}

fn empty_representative(bucket: &Bucket) -> f64 {
    match *bucket {
        Bucket::Special(v) => v,
        Bucket::Range { lo, hi, .. } if lo.is_finite() && hi.is_finite() => (lo + hi) / 2.0,
        Bucket::Range { lo, hi, .. } => {
            if lo.is_finite() {
                lo
            } else {
                hi
            }
        }
    }
}

/// Equi-depth boundaries on the count-expanded sorted column. Bucket `j` ends
/// at the value holding expanded position `ceil((j+1) M / k) - 1`; values equal
/// to a boundary stay in the lower bucket, and empty buckets are dropped. When
/// `k` reaches the number of distinct values every value gets its own bucket.
fn equi_depth(feature: &str, k: usize, distinct: &[(f64, u64)]) -> Result<Buckets> {
    if k == 0 {
        return Err(spec_err(feature, "equi-depth needs k >= 1"));
    }
    if distinct.iter().any(|(v, _)| !v.is_finite()) {
        return Err(spec_err(feature, "equi-depth needs finite values"));
    }
    let uppers: Vec<f64> = if k >= distinct.len() {
        distinct.iter().map(|&(v, _)| v).collect()
    } else {
        let total: u64 = distinct.iter().map(|&(_, c)| c).sum();
        let mut uppers: Vec<f64> = Vec::with_capacity(k);
        for j in 0..k as u64 {
            let target = ((j + 1) * total).div_ceil(k as u64) - 1;
            let mut seen = 0u64;
            let v = distinct
                .iter()
                .find(|&&(_, c)| {
                    seen += c;
                    seen > target
                })
                .map(|&(v, _)| v)
                .expect("target inside the column");
            if uppers.last() != Some(&v) {
                uppers.push(v);
            }
        }
        uppers
    };
    let last = uppers.len() - 1;
    Ok(Buckets(
        uppers
            .iter()
            .enumerate()
            .map(|(j, &hi)| Bucket::Range {
                lo: if j == 0 { f64::NEG_INFINITY } else { uppers[j - 1] },
                lo_inclusive: j == 0,
                hi: if j == last { f64::INFINITY } else { hi },
            })
            .collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Fitted encodings for a set of bucketized features.
#[derive(Debug, Clone, PartialEq)]
pub struct Bucketing {
    /// `(feature index, encoding)`, in dataset column order.
    pub encodings: Vec<(usize, BucketEncoding)>,
}

impl Bucketing {
    /// Map a query entity into the bucketized space.
    pub fn translate(&self, entity: &Entity) -> Result<Entity> {
        let mut out = entity.clone();
        for (i, enc) in &self.encodings {
            out.0[*i] = Value::Real(enc.representative_of(&entity[*i])?);
        }
        Ok(out)
    }

    pub fn encoding(&self, feature: &str) -> Option<&BucketEncoding> {
        self.encodings.iter().map(|(_, e)| e).find(|e| e.feature == feature)
    }

    /// JSON document describing every fitted bucket and its representative.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (_, enc) in &self.encodings {
            let buckets: Vec<serde_json::Value> = enc
                .buckets
                .as_slice()
                .iter()
                .zip(&enc.representatives)
                .map(|(b, rep)| match *b {
                    Bucket::Special(v) => serde_json::json!({ "special": v, "representative": rep }),
                    Bucket::Range { lo, lo_inclusive, hi } => serde_json::json!({
                        "lo": bound_json(lo),
                        "lo_inclusive": lo_inclusive,
                        "hi": bound_json(hi),
                        "representative": rep,
                    }),
                })
                .collect();
            map.insert(enc.feature.clone(), serde_json::Value::Array(buckets));
        }
        serde_json::Value::Object(map)
    }
}

fn bound_json(x: f64) -> serde_json::Value {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        x.into()
    }
}

/// Replace every value of each bucketized feature with its bucket's
/// representative. The returned dataset is re-canonicalized (rows that become
/// equal are merged).
pub fn bucketize(ds: &Dataset, specs: &[(String, BucketSpec)]) -> Result<(Dataset, Bucketing)> {
    let mut encodings = Vec::with_capacity(specs.len());
    for (feature, spec) in specs {
        let i = ds.feature_index(feature)?;
        if !ds.kinds()[i].is_numeric() {
            return Err(spec_err(feature, "categorical features cannot be bucketized"));
        }
        let column: Vec<(f64, u64)> = ds
            .rows()
            .iter()
            .map(|r| (r.entity[i].as_f64().expect("numeric column"), r.count))
            .collect();
        encodings.push((i, BucketEncoding::fit(feature, spec, &column)?));
    }
    encodings.sort_by_key(|(i, _)| *i);
    let bucketing = Bucketing { encodings };

    let mut kinds = ds.kinds().to_vec();
    for (i, _) in &bucketing.encodings {
        kinds[*i] = ColumnKind::Real;
    }
    let rows = ds
        .rows()
        .iter()
        .map(|r| Ok((bucketing.translate(&r.entity)?, r.count)))
        .collect::<Result<Vec<_>>>()?;
    Ok((Dataset::new(ds.features().to_vec(), kinds, rows)?, bucketing))
}

// ---------------------------------------------------------------------------
// JSON form: {"ranges": [[lo, hi], ...], "specials": [v, ...]} or {"equidepth": k}

#[derive(Debug, Clone, Copy)]
struct BoundRepr(f64);

impl<'de> Deserialize<'de> for BoundRepr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(BoundRepr(v)),
            Raw::Str(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" => Ok(BoundRepr(f64::INFINITY)),
                "-inf" | "-infinity" => Ok(BoundRepr(f64::NEG_INFINITY)),
                other => Err(D::Error::custom(format!("bad bound `{other}`"))),
            },
        }
    }
}

impl Serialize for BoundRepr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str(if self.0 > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(self.0)
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ranges: Option<Vec<(BoundRepr, BoundRepr)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    specials: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    equidepth: Option<usize>,
}

impl<'de> Deserialize<'de> for BucketSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SpecRepr::deserialize(d)?;
        match (raw.equidepth, raw.ranges, raw.specials) {
            (Some(k), None, None) => Ok(BucketSpec::EquiDepth { k }),
            (None, ranges, specials) if ranges.is_some() || specials.is_some() => Ok(BucketSpec::ExplicitRanges {
                ranges: ranges.unwrap_or_default().into_iter().map(|(a, b)| (a.0, b.0)).collect(),
                specials: specials.unwrap_or_default(),
            }),
            _ => Err(D::Error::custom("expected either `equidepth` or `ranges`/`specials`")),
        }
    }
}

impl Serialize for BucketSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            BucketSpec::EquiDepth { k } => SpecRepr { ranges: None, specials: None, equidepth: Some(*k) },
            BucketSpec::ExplicitRanges { ranges, specials } => SpecRepr {
                ranges: Some(ranges.iter().map(|&(a, b)| (BoundRepr(a), BoundRepr(b))).collect()),
                specials: Some(specials.clone()),
                equidepth: None,
            },
        };
        repr.serialize(s)
    }
}

/// Parse a bucket-spec document mapping feature names to specs.
pub fn parse_bucket_specs(json: &str) -> Result<Vec<(String, BucketSpec)>> {
    let map: BTreeMap<String, BucketSpec> = serde_json::from_str(json)?;
    Ok(map.into_iter().collect())
}

pub fn load_bucket_specs(path: impl AsRef<Path>) -> Result<Vec<(String, BucketSpec)>> {
    parse_bucket_specs(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn external_risk_estimate() -> BucketSpec {
        serde_json::from_str(
            r#"{"ranges": [[0,63],[64,70],[71,75],[76,80],[81,"inf"]], "specials": [-7,-8,-9]}"#,
        )
        .unwrap()
    }

    fn fit(spec: &BucketSpec, values: &[f64]) -> BucketEncoding {
        let column: Vec<(f64, u64)> = values.iter().map(|&v| (v, 1)).collect();
        BucketEncoding::fit("x", spec, &column).unwrap()
    }

    #[test]
    fn external_risk_one_hot() {
        let enc = fit(&external_risk_estimate(), &[61.0, 70.0, 90.0, -7.0]);
        assert_eq!(enc.bucket_of(&Value::Int(61)).unwrap(), 0);
        assert_eq!(enc.one_hot(&Value::Int(61)).unwrap(), vec![1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(enc.one_hot(&Value::Int(-7)).unwrap(), vec![0, 0, 0, 0, 0, 1, 0, 0]);
        assert_eq!(enc.bucket_of(&Value::Int(1000)).unwrap(), 4);
        assert!(enc.one_hot(&Value::Int(-1)).is_err());
    }

    #[test]
    fn equi_depth_consecutive_integers() {
        let enc = fit(&BucketSpec::EquiDepth { k: 2 }, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(enc.representatives, vec![2.0, 5.0]);
        assert_eq!(enc.bucket_of(&Value::Real(3.0)).unwrap(), 0);
        assert_eq!(enc.bucket_of(&Value::Real(4.0)).unwrap(), 1);
    }

    #[test]
    fn equi_depth_single_bucket_is_mean() {
        let enc = fit(&BucketSpec::EquiDepth { k: 1 }, &[1.0, 2.0, 6.0]);
        assert_eq!(enc.buckets.len(), 1);
        assert_eq!(enc.representatives, vec![3.0]);
    }

    #[test]
    fn ties_go_to_lower_bucket() {
        // expanded column 1,2,2,2,3,4 ; k=2 boundary at position 2 -> value 2.
        let column = [(1.0, 1), (2.0, 3), (3.0, 1), (4.0, 1)];
        let enc = BucketEncoding::fit("x", &BucketSpec::EquiDepth { k: 2 }, &column).unwrap();
        assert_eq!(enc.bucket_of(&Value::Real(2.0)).unwrap(), 0);
        assert_eq!(enc.representatives[0], 7.0 / 4.0);
        assert_eq!(enc.representatives[1], 3.5);
    }

    #[test]
    fn rejects_overlap_and_uncovered() {
        let spec = BucketSpec::ExplicitRanges { ranges: vec![(0.0, 5.0), (5.0, 9.0)], specials: vec![] };
        assert!(spec.explicit_buckets("x").is_err());
        let spec = BucketSpec::ExplicitRanges { ranges: vec![(0.0, 5.0)], specials: vec![3.0] };
        assert!(spec.explicit_buckets("x").is_err());
        let spec = BucketSpec::ExplicitRanges { ranges: vec![(0.0, 5.0)], specials: vec![] };
        let err = BucketEncoding::fit("age", &spec, &[(7.0, 1)]).unwrap_err();
        assert!(matches!(err, Error::Uncovered { ref feature, ref value } if feature == "age" && value == "7"));
    }

    #[test]
    fn bucketize_dataset_and_translate() {
        let ds = Dataset::from_int_rows(&[(&[1, 0], 1), (&[2, 0], 1), (&[3, 1], 1), (&[4, 1], 1)]).unwrap();
        let (out, bucketing) = bucketize(&ds, &[("F1".into(), BucketSpec::EquiDepth { k: 2 })]).unwrap();
        assert_eq!(out.num_rows(), 2);
        assert_eq!(out.rows()[0].entity, Entity(vec![Value::Real(1.5), Value::Int(0)]));
        assert_eq!(out.rows()[0].count, 2);
        assert_eq!(
            bucketing.translate(&Entity::ints(&[4, 1])).unwrap(),
            Entity(vec![Value::Real(3.5), Value::Int(1)])
        );
        let cat = Dataset::new(vec!["a".into()], vec![ColumnKind::Categorical], [(Entity(vec!["x".into()]), 1)])
            .unwrap();
        assert!(bucketize(&cat, &[("a".into(), BucketSpec::EquiDepth { k: 1 })]).is_err());
    }

    #[test]
    fn spec_file_parsing() {
        let specs = parse_bucket_specs(
            r#"{"a": {"equidepth": 4}, "b": {"ranges": [[0, "inf"]], "specials": [-9]}}"#,
        )
        .unwrap();
        assert_eq!(specs[0], ("a".into(), BucketSpec::EquiDepth { k: 4 }));
        assert_eq!(
            specs[1],
            ("b".into(), BucketSpec::ExplicitRanges { ranges: vec![(0.0, f64::INFINITY)], specials: vec![-9.0] })
        );
        assert!(parse_bucket_specs(r#"{"a": {"equidepth": 2, "ranges": []}}"#).is_err());
        let back = serde_json::to_string(&specs[1].1).unwrap();
        assert_eq!(back, r#"{"ranges":[[0.0,"inf"]],"specials":[-9.0]}"#);
    }
}

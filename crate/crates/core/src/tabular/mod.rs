//! Counted tabular data, feature domains, bucketization and the product and
//! empirical probability spaces.

mod bucket;
mod dataset;
mod space;
mod value;

pub use bucket::{
    bucketize, load_bucket_specs, parse_bucket_specs, Bucket, BucketEncoding, BucketSpec, Bucketing, Buckets,
};
pub use dataset::{load_dataset, read_dataset, Dataset, Row, Schema, COUNT_COLUMN};
pub use space::{
    cond_expectation, domain, product_expectation_over, CondExpectation, EmpiricalSpace, FeatureDomain,
    ProbabilitySpace, ProductSpace, SpaceKind,
};
pub use value::{ColumnKind, Entity, FeatureSet, Value};

pub(crate) use value::check_arity;

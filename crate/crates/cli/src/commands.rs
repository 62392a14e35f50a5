//! The `compare`, `bucketize`, `selftest` and `sensitivity` commands.

use std::path::PathBuf;
use std::time::Duration;

use clap::Args;
use serde::Serialize;

use ce_core::compare::{bucket_sensitivity, compare as compare_sets, ExplanationSet};
use ce_core::engine::EngineConfig;
use ce_core::explanation::{Explanation, ScoreKind};
use ce_core::selftest::run_all;
use ce_core::tabular::{bucketize as bucketize_dataset, load_bucket_specs, load_dataset};

use crate::explain::read_output;
use crate::{parse_kind, Failure, ModelArgs};

#[derive(Args)]
pub struct CompareArgs {
    /// First `explain` output.
    pub a: PathBuf,
    /// Second `explain` output, over the same entities.
    pub b: PathBuf,
    /// Ranking prefix length.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Report JSON; a CSV of the same statistics is written beside it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for whitespace-separated plot data files.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

fn complete(path: &PathBuf) -> Result<ExplanationSet, Failure> {
    let output = read_output(path)?;
    if output.partial {
        return Err(Failure::Config(format!("{} is a partial run", path.display())));
    }
    let xs: Vec<Explanation> = output.explanations.into_iter().flatten().collect();
    Ok(ExplanationSet::from_explanations(output.kind.as_str(), &xs))
}

pub fn compare(args: CompareArgs) -> Result<(), Failure> {
    let a = complete(&args.a)?;
    let b = complete(&args.b)?;
    let report = compare_sets(&a, &b, args.k)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out {
        Some(out) => {
            std::fs::write(out, json)?;
            std::fs::write(out.with_extension("csv"), report.to_csv())?;
        }
        None => print!("{json}"),
    }
    if let Some(dir) = &args.plot_data {
        std::fs::create_dir_all(dir)?;
        for (name, body) in report.plot_data() {
            std::fs::write(dir.join(name), body)?;
        }
    }
    Ok(())
}

#[derive(Args)]
pub struct BucketizeArgs {
    /// CSV dataset with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Bucket-spec JSON keyed by feature name.
    #[arg(long)]
    pub spec: PathBuf,
    /// Bucketized CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Bucket mapping JSON.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
}

pub fn bucketize(args: BucketizeArgs) -> Result<(), Failure> {
    let ds = load_dataset(&args.data, None)?;
    let (bucketed, bucketing) = bucketize_dataset(&ds, &load_bucket_specs(&args.spec)?)?;
    bucketed.write_csv(std::fs::File::create(&args.out)?)?;
    if let Some(path) = &args.mapping {
        std::fs::write(path, serde_json::to_string_pretty(&bucketing.to_json())? + "\n")?;
    }
    Ok(())
}

#[derive(Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report of every criterion.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn selftest(args: SelftestArgs) -> Result<(), Failure> {
    let reports = run_all(args.seed);
    for r in &reports {
        println!("{r}");
    }
    if let Some(out) = &args.out {
        std::fs::write(out, serde_json::to_string_pretty(&reports)? + "\n")?;
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(Failure::Checks(format!("{failed} of {} criteria failed", reports.len())));
    }
    Ok(())
}

#[derive(Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_parser = parse_kind, default_value = "resp")]
    pub score: ScoreKind,
    /// Bucket counts to try.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 5, 10])]
    pub ks: Vec<usize>,
    /// Largest contingency size searched by RESP.
    #[arg(long, default_value_t = 1)]
    pub max_gamma: usize,
    /// Wall-clock limit per bucket count.
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SensitivityOutput {
    kind: ScoreKind,
    entities: usize,
    rows: Vec<ce_core::compare::SensitivityRow>,
}

pub fn sensitivity(args: SensitivityArgs) -> Result<(), Failure> {
    let (ds, loaded) = crate::input::load(&args.model)?;
    let l = loaded.classifier();
    let rows: Vec<_> = ds.rows().iter().map(|r| r.entity.clone()).collect();
    let labels = l.classify_many(&rows)?;
    let entities: Vec<_> = rows.into_iter().zip(labels).filter(|&(_, y)| y == 1).map(|(e, _)| e).collect();
    let mut cfg = EngineConfig::new(args.score);
    cfg.resp.max_contingency = args.max_gamma;
    let timeout = args.timeout_ms.map(Duration::from_millis);
    let rows = bucket_sensitivity(&ds, l, &entities, cfg, &args.ks, timeout)?;
    let output = SensitivityOutput { kind: args.score, entities: entities.len(), rows };
    let json = serde_json::to_string_pretty(&output)? + "\n";
    match &args.out {
        Some(out) => std::fs::write(out, json)?,
        None => print!("{json}"),
    }
    Ok(())
}

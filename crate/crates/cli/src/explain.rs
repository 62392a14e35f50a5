//! The `explain` command.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ce_core::causal::RespConfig;
use ce_core::classifier::Classifier;
use ce_core::compare::{top1_distribution, BucketedClassifier, ExplanationSet};
use ce_core::engine::{Engine, EngineConfig};
use ce_core::explanation::{Explanation, ScoreKind, TieBreak};
use ce_core::shapley::{KernelSamples, ShapOptions};
use ce_core::tabular::{bucketize, load_bucket_specs, Dataset, Entity};

use crate::input::{entity_file, load};
use crate::{parse_kind, Failure, ModelArgs};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Selector {
    /// Every distinct row the classifier labels 1.
    Label1,
    /// Every distinct row.
    All,
}

#[derive(Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// counter, resp, shap, kernelshap or fico.
    #[arg(long, value_parser = parse_kind)]
    pub score: ScoreKind,
    /// Entities to explain; the default when no selector is given is label1.
    #[arg(long, value_enum, group = "selector")]
    pub entities: Option<Selector>,
    /// Zero-based index of one distinct dataset row.
    #[arg(long, group = "selector")]
    pub row: Option<usize>,
    /// CSV of entities whose header names the dataset's features.
    #[arg(long, group = "selector")]
    pub entity_file: Option<PathBuf>,
    /// Largest contingency size searched by RESP.
    #[arg(long, default_value_t = 1)]
    pub max_gamma: usize,
    /// Explain label-0 outcomes with COUNTER/RESP by swapping the labels.
    #[arg(long)]
    pub explain_zero: bool,
    /// Add an entity missing from the dataset with count 1 before computing SHAP.
    #[arg(long)]
    pub add_entity: bool,
    /// Report SHAP level contributions.
    #[arg(long)]
    pub levels: bool,
    /// Rank by absolute score instead of signed score.
    #[arg(long)]
    pub magnitude: bool,
    /// Bucket-spec JSON applied to the dataset before scoring.
    #[arg(long)]
    pub buckets: Option<PathBuf>,
    /// Keep only the first N ranked features of each explanation.
    #[arg(long)]
    pub top: Option<usize>,
    /// Subscales kept by the white-box explanation.
    #[arg(long, default_value_t = 2)]
    pub fico_m: usize,
    /// Features kept per subscale by the white-box explanation.
    #[arg(long, default_value_t = 2)]
    pub fico_k: usize,
    /// Seed for KernelSHAP sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// KernelSHAP coalition samples; exhaustive when absent.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output JSON; summary and timing sidecars are written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "CE_THREADS")]
    pub threads: Option<usize>,
    /// Wall-clock limit for the whole run.
    #[arg(long)]
    pub timeout_ms: Option<u64>,
}

/// Primary output of `explain`. Entities not reached before a timeout are
/// `null` and `partial` is set.
#[derive(Serialize, Deserialize)]
pub struct ExplainOutput {
    pub kind: ScoreKind,
    pub partial: bool,
    pub explanations: Vec<Option<Explanation>>,
}

#[derive(Serialize)]
struct Summary {
    kind: ScoreKind,
    partial: bool,
    entities: usize,
    explained: usize,
    no_explanation: usize,
    top1: std::collections::BTreeMap<String, u64>,
}

#[derive(Serialize)]
struct Timing {
    elapsed_ms: u128,
    threads: usize,
}

fn config(args: &ExplainArgs) -> EngineConfig {
    let tie_break = if args.magnitude { TieBreak::MagnitudeThenIndex } else { TieBreak::ScoreThenIndex };
    EngineConfig {
        resp: RespConfig { max_contingency: args.max_gamma, explain_zero: args.explain_zero, ..RespConfig::default() },
        shap: ShapOptions { add_entity: args.add_entity, levels: args.levels, ..ShapOptions::default() },
        kernel_samples: args.samples.map_or(KernelSamples::Exhaustive, KernelSamples::Count),
        seed: args.seed,
        fico_m: args.fico_m,
        fico_k: args.fico_k,
        ..EngineConfig::new(args.score)
    }
    .with_tie_break(tie_break)
}

fn select(args: &ExplainArgs, ds: &Dataset, l: &dyn Classifier) -> Result<Vec<Entity>, Failure> {
    if let Some(row) = args.row {
        let r = ds
            .rows()
            .get(row)
            .ok_or_else(|| Failure::Config(format!("row {row} out of range: {} distinct rows", ds.num_rows())))?;
        return Ok(vec![r.entity.clone()]);
    }
    if let Some(path) = &args.entity_file {
        return entity_file(ds, path);
    }
    let rows: Vec<Entity> = ds.rows().iter().map(|r| r.entity.clone()).collect();
    match args.entities.unwrap_or(Selector::Label1) {
        Selector::All => Ok(rows),
        Selector::Label1 => {
            let labels = l.classify_many(&rows)?;
            Ok(rows.into_iter().zip(labels).filter(|&(_, y)| y == 1).map(|(e, _)| e).collect())
        }
    }
}

pub fn run(args: ExplainArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let cfg = config(&args);
    let (ds, loaded) = load(&args.model)?;
    let l = loaded.classifier();
    // rows and entity files are given in original values
    let explicit = args.row.is_some() || args.entity_file.is_some();
    let bucketed;
    let lb;
    let (ds_run, l_run, translated): (&Dataset, &dyn Classifier, Option<Vec<Entity>>) = match &args.buckets {
        Some(path) => {
            if args.score == ScoreKind::Fico {
                return Err(Failure::Config("white-box explanations read original values; drop --buckets".into()));
            }
            let (b, bucketing) = bucketize(&ds, &load_bucket_specs(path)?)?;
            let translated = if explicit {
                let chosen = select(&args, &ds, l)?;
                Some(chosen.iter().map(|e| bucketing.translate(e)).collect::<Result<Vec<_>, _>>()?)
            } else {
                None
            };
            bucketed = b;
            lb = BucketedClassifier::new(l, &ds, &bucketing)?;
            (&bucketed, &lb, translated)
        }
        None => (&ds, l, None),
    };
    let entities = match translated {
        Some(entities) => entities,
        None => select(&args, ds_run, l_run)?,
    };

    let engine = Engine::new(ds_run, l_run, loaded.model(), cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Config(e.to_string()))?;
    let deadline = args.timeout_ms.map(|ms| started + Duration::from_millis(ms));
    let stopped = AtomicBool::new(false);
    let results: Vec<Option<ce_core::error::Result<Explanation>>> = pool.install(|| {
        entities
            .par_iter()
            .enumerate()
            .map(|(i, e)| {
                if stopped.load(Ordering::Relaxed) || deadline.is_some_and(|d| Instant::now() > d) {
                    stopped.store(true, Ordering::Relaxed);
                    return None;
                }
                Some(engine.explain(e, i))
            })
            .collect()
    });

    let mut explanations = Vec::with_capacity(results.len());
    for r in results {
        explanations.push(match r {
            Some(Ok(mut x)) => {
                if let Some(top) = args.top {
                    x.ranking.truncate(top);
                }
                Some(x)
            }
            Some(Err(e)) => return Err(e.into()),
            None => None,
        });
    }
    let partial = explanations.iter().any(Option::is_none);
    let output = ExplainOutput { kind: args.score, partial, explanations };
    write_outputs(&args, &output, started, pool.current_num_threads())?;
    if partial {
        let done = output.explanations.iter().flatten().count();
        return Err(Failure::Timeout(format!("timed out after explaining {done} of {} entities", output.explanations.len())));
    }
    Ok(())
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(suffix);
    out.with_file_name(name)
}

fn write_outputs(args: &ExplainArgs, output: &ExplainOutput, started: Instant, threads: usize) -> Result<(), Failure> {
    let json = serde_json::to_string_pretty(output)? + "\n";
    let Some(out) = &args.out else {
        print!("{json}");
        return Ok(());
    };
    std::fs::write(out, json)?;
    let done: Vec<Explanation> = output.explanations.iter().flatten().cloned().collect();
    let set = ExplanationSet::from_explanations(output.kind.as_str(), &done);
    let summary = Summary {
        kind: output.kind,
        partial: output.partial,
        entities: output.explanations.len(),
        explained: done.len(),
        no_explanation: done.iter().filter(|x| x.no_explanation).count(),
        top1: top1_distribution(&set),
    };
    std::fs::write(sidecar(out, ".summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    let timing = Timing { elapsed_ms: started.elapsed().as_millis(), threads };
    std::fs::write(sidecar(out, ".timing.json"), serde_json::to_string_pretty(&timing)? + "\n")?;
    Ok(())
}

/// Read an `explain` output back.
pub fn read_output(path: &Path) -> Result<ExplainOutput, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

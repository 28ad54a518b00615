use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use super::output::{Fixed6, ForecastReport, RunManifest, StoppingReport, SweepRow};
use super::{ForecastArgs, GenCorpusArgs, GlobalArgs, SimKnobs, SimulateArgs, StopArgs, SweepArgs};
use crate::al_simulator::{self, derive_seed, RunRecord, SimulationConfig, Strategy};
use crate::curve_models::CurveFamily;
use crate::forecast_eval::{self, EvaluationConfig, LearningCurve, Metric};
use crate::learners::{LearnerConfig, LearnerKind};
use crate::stopping;
use crate::synth::{self, SynthConfig};
use crate::text_pipeline::{self, Document};

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn write_curve_file(path: &Path, acc: &LearningCurve, fm: &LearningCurve) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    forecast_eval::write_curves(BufWriter::new(f), &[acc, fm])?;
    Ok(())
}

/// Prints to stdout, treating a closed pipe as success.
fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn read_corpus_file(path: &Path) -> Result<Vec<Document>> {
    let f = File::open(path).with_context(|| format!("opening corpus {}", path.display()))?;
    text_pipeline::read_corpus(BufReader::new(f)).with_context(|| format!("reading corpus {}", path.display()))
}

fn stopwords(knobs: &SimKnobs) -> Result<HashSet<String>> {
    match &knobs.stopwords {
        Some(p) => text_pipeline::read_stopwords(p).with_context(|| format!("reading stopwords {}", p.display())),
        None => Ok(text_pipeline::default_stopwords()),
    }
}

fn sim_config(seed: u64, bp: f64, strategy: Strategy, learner: LearnerKind, k: &SimKnobs) -> SimulationConfig {
    let d = SimulationConfig::default();
    let mut lc = LearnerConfig {
        kind: learner,
        ..d.learner
    };
    lc.linear.epochs = k.epochs.unwrap_or(lc.linear.epochs);
    lc.linear.reg = k.reg.unwrap_or(lc.linear.reg);
    lc.tree.max_depth = k.max_depth.unwrap_or(lc.tree.max_depth);
    lc.tree.min_leaf = k.min_leaf.unwrap_or(lc.tree.min_leaf);
    SimulationConfig {
        bp,
        strategy,
        learner: lc,
        seed,
        folds: k.folds.unwrap_or(d.folds),
        initial_batch: k.initial_batch,
        stop_set_size: k.stop_set_size.unwrap_or(d.stop_set_size),
        min_frequency: k.min_frequency.unwrap_or(d.min_frequency),
    }
}

/// Curves to forecast from a set of runs: the single run, or the point-wise
/// fold mean.
fn summary_curves(records: &[RunRecord]) -> Result<(LearningCurve, LearningCurve)> {
    if let [only] = records {
        return Ok((only.accuracy_curve.clone(), only.f_measure_curve.clone()));
    }
    Ok((
        al_simulator::average_curves(records, Metric::Accuracy)?,
        al_simulator::average_curves(records, Metric::FMeasure)?,
    ))
}

pub fn cmd_simulate(global: &GlobalArgs, args: &SimulateArgs) -> Result<Vec<RunRecord>> {
    let corpus_path = args.corpus.as_ref().ok_or_else(|| anyhow!("--corpus is required"))?;
    let corpus = read_corpus_file(corpus_path)?;
    let config = sim_config(
        global.seed(),
        args.bp.unwrap_or(1.0),
        args.strategy.unwrap_or(Strategy::Random),
        args.learner.unwrap_or(LearnerKind::Linear),
        &args.knobs,
    );
    let records = al_simulator::run_simulation_with(&corpus, &config, &stopwords(&args.knobs)?)?;

    let out = global.out_dir();
    create_dir(&out)?;
    let (acc, fm) = summary_curves(&records)?;
    write_curve_file(&out.join("curve.csv"), &acc, &fm)?;
    if config.folds == 0 {
        write_json(&out.join("manifest.json"), &RunManifest::from_record(&records[0]))?;
    } else {
        for r in &records {
            let dir = out.join(format!("fold_{}", r.fold.unwrap_or(0)));
            create_dir(&dir)?;
            write_curve_file(&dir.join("curve.csv"), &r.accuracy_curve, &r.f_measure_curve)?;
            write_json(&dir.join("manifest.json"), &RunManifest::from_record(r))?;
        }
    }
    eprintln!(
        "simulated {} run(s), {} iterations, curves in {}",
        records.len(),
        acc.points().len(),
        out.display()
    );
    Ok(records)
}

/// Grid spacing of a curve, rounded to six decimals.
fn inferred_bp(curve: &LearningCurve) -> f64 {
    let p = curve.points();
    ((p[1].x - p[0].x) * 1e6).round() / 1e6
}

pub fn cmd_forecast(global: &GlobalArgs, args: &ForecastArgs) -> Result<ForecastReport> {
    let path = args.curve.as_ref().ok_or_else(|| anyhow!("--curve is required"))?;
    let tpc = args.tpc.ok_or_else(|| anyhow!("--tpc is required"))?;
    let family = args.family.unwrap_or(CurveFamily::Logarithmic);
    let metric = args.metric.unwrap_or(Metric::Accuracy);
    let f = File::open(path).with_context(|| format!("opening curve {}", path.display()))?;
    let name = path.display().to_string();
    let mut curves = forecast_eval::read_curves(BufReader::new(f), &name)?;
    let curve = curves
        .remove(&metric)
        .ok_or_else(|| anyhow!("{} has no `{metric}` rows", path.display()))?;

    let (train, test) = forecast_eval::split_at_tpc(&curve, tpc)?;
    let fit = crate::curve_models::fit(&train, family)?;
    let eval = forecast_eval::average_difference(&fit, &test)?;
    let bp = args.bp.unwrap_or_else(|| inferred_bp(&curve));
    let expected = EvaluationConfig::new(tpc, bp, family).ok().map(|c| forecast_eval::expected_n(&c));

    let out = global.out_dir();
    create_dir(&out)?;
    let mut w = csv::Writer::from_path(out.join("residuals.csv"))?;
    w.write_record(["training_percent", "observed", "forecast", "abs_residual"])?;
    for (p, r) in test.iter().zip(&eval.residuals) {
        w.write_record([
            format!("{:.6}", p.x),
            format!("{:.6}", p.y),
            format!("{:.6}", crate::curve_models::predict(&fit, p.x)?),
            format!("{:.6}", r),
        ])?;
    }
    w.flush()?;

    let report = ForecastReport {
        curve: name,
        metric,
        family,
        tpc: Fixed6(tpc),
        a: Fixed6(fit.a),
        b: Fixed6(fit.b),
        sse: Fixed6(fit.sse),
        num_points: fit.num_points,
        clamped: fit.clamped,
        n: eval.n,
        bp: Some(Fixed6(bp)),
        expected_n: expected,
        average_difference: Fixed6(eval.average_difference),
    };
    if expected == Some(0) {
        eprintln!("warning: expected test-point count is 0 for tpc={tpc}, bp={bp}");
    }
    write_json(&out.join("forecast.json"), &report)?;
    print_json(&report)?;
    Ok(report)
}

struct SweepSource {
    dataset: String,
    learner: String,
    strategy: String,
    bp: Option<f64>,
    curves: Result<BTreeMap<Metric, LearningCurve>, String>,
}

struct SweepCell {
    row: SweepRow,
    key: (String, String, String, Metric, CurveFamily, String),
    value: Option<f64>,
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn cmd_sweep(global: &GlobalArgs, args: &SweepArgs) -> Result<Vec<SweepRow>> {
    let corpora = args.corpus.clone().unwrap_or_default();
    let curve_files = args.curve.clone().unwrap_or_default();
    if corpora.is_empty() && curve_files.is_empty() {
        bail!("sweep needs at least one --corpus or --curve");
    }
    let learners = args.learners.clone().unwrap_or_else(|| vec![LearnerKind::Linear]);
    let strategies = args.strategies.clone().unwrap_or_else(|| vec![Strategy::Random]);
    let bps = args.bps.clone().unwrap_or_else(|| vec![1.0]);
    let metrics = args.metrics.clone().unwrap_or_else(|| Metric::ALL.to_vec());
    let families = args.families.clone().unwrap_or_else(|| vec![CurveFamily::Logarithmic]);
    let tpcs = args.tpcs.clone().unwrap_or_else(|| vec![15.0]);
    for (name, empty) in [
        ("learners", learners.is_empty()),
        ("strategies", strategies.is_empty()),
        ("bps", bps.is_empty()),
        ("metrics", metrics.is_empty()),
        ("families", families.is_empty()),
        ("tpcs", tpcs.is_empty()),
    ] {
        if empty {
            bail!("sweep grid `{name}` is empty");
        }
    }
    let out = global.out_dir();
    let curve_dir = out.join("curves");
    create_dir(&curve_dir)?;
    let stop = stopwords(&args.knobs)?;

    let docs: Vec<(String, Vec<Document>)> = corpora
        .iter()
        .map(|p| Ok((dataset_name(p), read_corpus_file(p)?)))
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for (di, _) in docs.iter().enumerate() {
        for &learner in &learners {
            for &strategy in &strategies {
                for &bp in &bps {
                    jobs.push((di, learner, strategy, bp));
                }
            }
        }
    }
    let simulated: Vec<(SweepSource, Option<(LearningCurve, LearningCurve)>)> = jobs
        .par_iter()
        .map(|&(di, learner, strategy, bp)| {
            let config = sim_config(derive_seed(global.seed(), di as u64), bp, strategy, learner, &args.knobs);
            let result = al_simulator::run_simulation_with(&docs[di].1, &config, &stop)
                .map_err(anyhow::Error::from)
                .and_then(|recs| summary_curves(&recs));
            let curves = result.as_ref().map_err(|e| e.to_string()).map(|(a, f)| {
                BTreeMap::from([(Metric::Accuracy, a.clone()), (Metric::FMeasure, f.clone())])
            });
            (
                SweepSource {
                    dataset: docs[di].0.clone(),
                    learner: learner.to_string(),
                    strategy: strategy.to_string(),
                    bp: Some(bp),
                    curves,
                },
                result.ok(),
            )
        })
        .collect();

    let mut sources = Vec::new();
    for (src, curves) in simulated {
        if let Some((a, f)) = curves {
            let file = format!("{}_{}_{}_bp{}.csv", src.dataset, src.learner, src.strategy, src.bp.unwrap_or(0.0));
            write_curve_file(&curve_dir.join(file), &a, &f)?;
        }
        sources.push(src);
    }
    for p in &curve_files {
        let name = dataset_name(p);
        let curves = File::open(p)
            .map_err(|e| format!("opening {}: {e}", p.display()))
            .and_then(|f| forecast_eval::read_curves(BufReader::new(f), &name).map_err(|e| e.to_string()));
        let bp = curves
            .as_ref()
            .ok()
            .and_then(|m| m.values().next())
            .map(inferred_bp);
        sources.push(SweepSource {
            dataset: name,
            learner: "-".into(),
            strategy: "-".into(),
            bp,
            curves,
        });
    }

    let mut cells = Vec::new();
    for src in &sources {
        for &metric in &metrics {
            for &family in &families {
                for &tpc in &tpcs {
                    cells.push(sweep_cell(src, metric, family, tpc));
                }
            }
        }
    }

    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    for c in &cells {
        w.serialize(&c.row)?;
    }
    w.flush()?;
    write_summary(&out.join("sweep_summary.csv"), &cells)?;

    let failed = cells.iter().filter(|c| c.value.is_none()).count();
    eprintln!(
        "sweep: {} cells ({} failed), results in {}",
        cells.len(),
        failed,
        out.display()
    );
    Ok(cells.into_iter().map(|c| c.row).collect())
}

fn sweep_cell(src: &SweepSource, metric: Metric, family: CurveFamily, tpc: f64) -> SweepCell {
    let bp = src.bp.map(|b| format!("{b:.6}")).unwrap_or_default();
    let result = match &src.curves {
        Err(e) => Err(e.clone()),
        Ok(map) => match map.get(&metric) {
            None => Err(format!("no `{metric}` curve")),
            Some(curve) => forecast_eval::forecast_at(curve, tpc, family).map_err(|e| e.to_string()),
        },
    };
    let (n, ad, err, value) = match &result {
        Ok(ev) => (
            ev.n.to_string(),
            format!("{:.6}", ev.average_difference),
            String::new(),
            Some(ev.average_difference),
        ),
        Err(e) => (String::new(), String::new(), e.clone(), None),
    };
    let tpc_s = format!("{tpc:.6}");
    SweepCell {
        key: (
            src.learner.clone(),
            src.strategy.clone(),
            bp.clone(),
            metric,
            family,
            tpc_s.clone(),
        ),
        row: SweepRow {
            dataset: src.dataset.clone(),
            learner: src.learner.clone(),
            strategy: src.strategy.clone(),
            bp,
            metric: metric.to_string(),
            family: family.to_string(),
            tpc: tpc_s,
            n,
            average_difference: ad,
            error: err,
        },
        value,
    }
}

/// Aggregates successful cells per (learner, strategy, bp, metric, family,
/// tpc) across datasets, plus a learner `all` row across learners too.
fn write_summary(path: &Path, cells: &[SweepCell]) -> Result<()> {
    type Key = (String, String, String, Metric, CurveFamily, String);
    let mut groups: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
    for c in cells {
        if let Some(v) = c.value {
            groups.entry(c.key.clone()).or_default().push(v);
            let mut all = c.key.clone();
            all.0 = "all".into();
            groups.entry(all).or_default().push(v);
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["learner", "strategy", "bp", "metric", "family", "tpc", "cells", "aggregate"])?;
    for ((learner, strategy, bp, metric, family, tpc), vals) in &groups {
        let agg = forecast_eval::mean(vals.iter().copied())?;
        w.write_record([
            learner.clone(),
            strategy.clone(),
            bp.clone(),
            metric.to_string(),
            family.to_string(),
            tpc.clone(),
            vals.len().to_string(),
            format!("{agg:.6}"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_stop(global: &GlobalArgs, args: &StopArgs) -> Result<StoppingReport> {
    let path = args.manifest.as_ref().ok_or_else(|| anyhow!("--manifest is required"))?;
    let threshold = args.threshold.unwrap_or(stopping::DEFAULT_THRESHOLD);
    let window = args.window.unwrap_or(stopping::DEFAULT_WINDOW);
    let f = File::open(path).with_context(|| format!("opening manifest {}", path.display()))?;
    let manifest: RunManifest = serde_json::from_reader(BufReader::new(f))
        .with_context(|| format!("{} is not a run manifest with stop-set predictions", path.display()))?;
    if manifest.stop_set_predictions.is_empty() {
        bail!("{} has no stop-set predictions", path.display());
    }
    let decision = stopping::sp_stopping(&manifest.prediction_history(), threshold, window)?;
    let comparison = match args.tpc {
        Some(tpc) => match stopping::compare_stop_to_tpc(&decision, tpc) {
            Ok(c) => {
                eprintln!(
                    "stopping percent {:.6} {} tpc {:.6}",
                    c.stopping_percent,
                    if c.precedes { "precedes" } else { "does not precede" },
                    tpc
                );
                Some(c)
            }
            Err(e) => {
                eprintln!("no comparison against tpc {tpc:.6}: {e}");
                None
            }
        },
        None => None,
    };
    let report = StoppingReport::new(&decision, threshold, window, comparison);
    let out = global.out_dir();
    create_dir(&out)?;
    write_json(&out.join("stopping_report.json"), &report)?;
    print_json(&report)?;
    Ok(report)
}

pub fn cmd_gen_corpus(global: &GlobalArgs, args: &GenCorpusArgs) -> Result<PathBuf> {
    let d = SynthConfig::default();
    let cfg = SynthConfig {
        size: args.size.unwrap_or(d.size),
        positive_fraction: args.positive_fraction.unwrap_or(d.positive_fraction),
        overlap: args.overlap.unwrap_or(d.overlap),
        test_fraction: args.test_fraction.unwrap_or(d.test_fraction),
        topic_words: args.topic_words.unwrap_or(d.topic_words),
        background_words: args.background_words.unwrap_or(d.background_words),
        doc_length: args.doc_length.unwrap_or(d.doc_length),
        seed: global.seed(),
    };
    for (name, v) in [
        ("positive-fraction", cfg.positive_fraction),
        ("overlap", cfg.overlap),
        ("test-fraction", cfg.test_fraction),
    ] {
        if !(0.0..=1.0).contains(&v) {
            bail!("--{name} must be in [0, 1], got {v}");
        }
    }
    let path = match &args.output {
        Some(p) => p.clone(),
        None => {
            let out = global.out_dir();
            create_dir(&out)?;
            out.join("corpus.jsonl")
        }
    };
    let docs = synth::generate_corpus(&cfg);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    text_pipeline::write_corpus(BufWriter::new(f), &docs)?;
    eprintln!("wrote {} documents to {}", docs.len(), path.display());
    Ok(path)
}

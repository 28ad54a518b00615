//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use lcforecast::al_simulator::{
    run_simulation, select_closest_to_hyperplane, select_random, RunRecord, SimulationConfig, Strategy,
};
use lcforecast::curve_models::{fit, CurveFamily, CurvePoint};
use lcforecast::forecast_eval::{
    average_difference, expected_n, forecast_at, split_at_tpc, sweep_tpc, EvaluationConfig, LearningCurve, Metric,
};
use lcforecast::learners::{decision_value, FeatureVector, LinearModel};
use lcforecast::stopping::{cohens_kappa, sp_stopping};
use lcforecast::synth::{generate_corpus, SynthConfig};
use lcforecast::text_pipeline::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    check(elapsed < limit, format!("{detail}; {:.2}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs()))
}

fn grid(bp: f64) -> Vec<f64> {
    let steps = (100.0 / bp).round() as usize;
    (1..=steps).map(|i| i as f64 * bp).collect()
}

fn curve_from(xs: &[f64], mut f: impl FnMut(f64) -> f64) -> LearningCurve {
    let pts = xs.iter().map(|&x| CurvePoint::new(x, f(x))).collect();
    LearningCurve::new(pts, Metric::Accuracy, "generated").unwrap()
}

fn fit_recovery() -> Outcome {
    let start = Instant::now();
    let xs = grid(1.0);
    type Generator = fn(f64, f64, f64) -> f64;
    let cases: [(CurveFamily, f64, f64, Generator); 5] = [
        (CurveFamily::Linear, 0.004, 0.55, |a, b, x| a * x + b),
        (CurveFamily::Logarithmic, 0.1, 0.5, |a, b, x| a * x.ln() + b),
        (CurveFamily::WeissTian, 0.9, -0.4, |a, b, x| a + b * x / (x + 1.0)),
        (CurveFamily::Power, 0.4, 0.15, |a, b, x| a * x.powf(b)),
        (CurveFamily::Exponential, 0.5, 0.003, |a, b, x| a * 10f64.powf(b * x)),
    ];
    let mut worst_exact = 0.0f64;
    for (family, a, b, f) in cases {
        let pts: Vec<CurvePoint> = xs.iter().map(|&x| CurvePoint::new(x, f(a, b, x))).collect();
        let c = fit(&pts, family).map_err(|e| format!("{family}: {e}"))?;
        worst_exact = worst_exact.max((c.a - a).abs()).max((c.b - b).abs());
    }
    let mut worst_noisy = 0.0f64;
    let noise = Normal::new(0.0, 0.005).unwrap();
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<CurvePoint> = xs
            .iter()
            .map(|&x| CurvePoint::new(x, 0.1 * x.ln() + 0.5 + noise.sample(&mut rng)))
            .collect();
        let c = fit(&pts, CurveFamily::Logarithmic).map_err(|e| e.to_string())?;
        worst_noisy = worst_noisy.max((c.a - 0.1).abs()).max((c.b - 0.5).abs());
    }
    let elapsed = start.elapsed();
    let detail = format!("max exact error {worst_exact:.2e}, max noisy error {worst_noisy:.4}");
    check(worst_exact <= 1e-9 && worst_noisy <= 0.01, detail.clone())?;
    within(elapsed, Duration::from_secs(1), detail)
}

fn naive_average_difference(a: f64, b: f64, family: CurveFamily, test: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for &(x, y) in test {
        let f = match family {
            CurveFamily::Linear => a * x + b,
            CurveFamily::Logarithmic => a * x.ln() + b,
            CurveFamily::WeissTian => a + b * x / (x + 1.0),
            CurveFamily::Power => a * x.powf(b),
            CurveFamily::Exponential => a * 10f64.powf(b * x),
        };
        total += (f - y).abs();
    }
    total / test.len() as f64
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let family = CurveFamily::ALL[case % CurveFamily::ALL.len()];
        let n = rng.gen_range(8..120);
        let mut x = 0.0;
        let pts: Vec<CurvePoint> = (0..n)
            .map(|_| {
                x += rng.gen_range(0.1..2.0);
                CurvePoint::new(x, rng.gen_range(0.05..1.0))
            })
            .collect();
        let cut = rng.gen_range(2..n - 1);
        let c = fit(&pts[..cut], family).map_err(|e| e.to_string())?;
        let ev = average_difference(&c, &pts[cut..]).map_err(|e| e.to_string())?;
        let test: Vec<(f64, f64)> = pts[cut..].iter().map(|p| (p.x, p.y)).collect();
        worst = worst.max((ev.average_difference - naive_average_difference(c.a, c.b, family, &test)).abs());
    }
    let mut counts = Vec::new();
    for (bp, want) in [(1.0, 85usize), (0.25, 340)] {
        let cfg = EvaluationConfig::new(15.0, bp, CurveFamily::Logarithmic).map_err(|e| e.to_string())?;
        let curve = curve_from(&grid(bp), |x| 0.5 + 0.05 * x.ln());
        let (_, test) = split_at_tpc(&curve, 15.0).map_err(|e| e.to_string())?;
        let got = expected_n(&cfg);
        counts.push(format!("bp={bp}: expected_n={got}, split={}", test.len()));
        if got != want || test.len() != want {
            return Err(format!("max diff {worst:.2e}; {}", counts.join(", ")));
        }
    }
    check(worst <= 1e-12, format!("max diff {worst:.2e}; {}", counts.join(", ")))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn tpc_trend() -> Outcome {
    let start = Instant::now();
    let tpcs: Vec<f64> = (1..=10).map(|i| 5.0 * i as f64).collect();
    let noise = Normal::new(0.0, 0.005).unwrap();
    let mut rhos = Vec::new();
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let curve = curve_from(&grid(1.0), |x| 0.55 + 0.08 * x.ln() + noise.sample(&mut rng));
        let ads: Vec<f64> = sweep_tpc(&curve, &tpcs, CurveFamily::Logarithmic)
            .into_iter()
            .map(|(_, r)| r.map(|e| e.average_difference).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        rhos.push(spearman(&tpcs, &ads));
    }
    let elapsed = start.elapsed();
    let nonpositive = rhos.iter().filter(|&&r| r <= 0.0).count();
    let shown: Vec<String> = rhos.iter().map(|r| format!("{r:.2}")).collect();
    check(nonpositive >= 9, format!("{nonpositive}/10 seeds with rho <= 0 [{}]", shown.join(" ")))?;
    within(elapsed, Duration::from_secs(10), format!("{nonpositive}/10 seeds with rho <= 0"))
}

const SEEDS: u64 = 10;

fn imbalanced_corpus(seed: u64) -> SynthConfig {
    SynthConfig {
        size: 2000,
        positive_fraction: 0.1,
        overlap: 0.85,
        test_fraction: 0.2,
        seed,
        ..Default::default()
    }
}

/// Mean forecast average difference per metric over the seeds, plus the wall time.
fn forecast_runs(strategy: Strategy, bp: f64) -> Result<(f64, f64, Duration), String> {
    let start = Instant::now();
    let (mut acc, mut fm) = (0.0, 0.0);
    for seed in 0..SEEDS {
        let docs = generate_corpus(&imbalanced_corpus(seed));
        let cfg = SimulationConfig {
            bp,
            strategy,
            seed,
            ..Default::default()
        };
        let rec = &run_simulation(&docs, &cfg).map_err(|e| e.to_string())?[0];
        let ad = |m: Metric| {
            forecast_at(rec.curve(m), 15.0, CurveFamily::Logarithmic)
                .map(|e| e.average_difference)
                .map_err(|e| e.to_string())
        };
        acc += ad(Metric::Accuracy)?;
        fm += ad(Metric::FMeasure)?;
    }
    Ok((acc / SEEDS as f64, fm / SEEDS as f64, start.elapsed()))
}

struct Runs {
    passive: (f64, f64, Duration),
    active: (f64, f64, Duration),
    fine: (f64, f64, Duration),
}

fn metric_gap(r: &Runs) -> Outcome {
    let (acc, fm, t) = r.passive;
    check(fm > acc, format!("f_measure {fm:.4} vs accuracy {acc:.4}"))?;
    within(t, Duration::from_secs(300), format!("f_measure {fm:.4} > accuracy {acc:.4}"))
}

fn passive_vs_active(r: &Runs) -> Outcome {
    let (active, _, t) = r.active;
    let passive = r.passive.0;
    check(active > passive, format!("active {active:.4} vs passive {passive:.4}"))?;
    within(t, Duration::from_secs(600), format!("active {active:.4} > passive {passive:.4}"))
}

fn batch_percent(r: &Runs) -> Outcome {
    let ratio = |u: f64, v: f64| u.max(v) / u.min(v);
    let coarse = (r.passive.0 + r.passive.1) / 2.0;
    let fine = (r.fine.0 + r.fine.1) / 2.0;
    let ratios = [ratio(r.passive.0, r.fine.0), ratio(r.passive.1, r.fine.1), ratio(coarse, fine)];
    check(
        ratios.iter().all(|&q| q < 2.0),
        format!(
            "bp=1: {coarse:.4}, bp=0.25: {fine:.4}; ratios accuracy {:.2}, f_measure {:.2}, overall {:.2}",
            ratios[0], ratios[1], ratios[2]
        ),
    )
}

fn stopping() -> Outcome {
    let a = [Label::Positive, Label::Positive, Label::Negative, Label::Negative];
    let b = [Label::Positive, Label::Negative, Label::Negative, Label::Negative];
    let k = cohens_kappa(&a, &b).map_err(|e| e.to_string())?;
    if k != 0.5 {
        return Err(format!("hand kappa {k} != 0.5"));
    }
    let mut fired = Vec::new();
    for seed in 0..3 {
        let docs = generate_corpus(&SynthConfig {
            size: 1000,
            positive_fraction: 0.5,
            overlap: 0.6,
            seed,
            ..Default::default()
        });
        let cfg = SimulationConfig {
            strategy: Strategy::ClosestToHyperplane,
            seed,
            ..Default::default()
        };
        let rec: RunRecord = run_simulation(&docs, &cfg).map_err(|e| e.to_string())?.remove(0);
        let d = sp_stopping(&rec.prediction_history(), 0.99, 3).map_err(|e| e.to_string())?;
        fired.push(d.stopping_percent);
    }
    let shown: Vec<String> = fired
        .iter()
        .map(|p| p.map_or("none".into(), |v| format!("{v}%")))
        .collect();
    check(
        fired.iter().all(|p| p.is_some_and(|v| v < 50.0)),
        format!("kappa 0.5 exact; stops at [{}]", shown.join(", ")),
    )
}

fn selection_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..1000 {
        let dim = rng.gen_range(1..20);
        let model = LinearModel {
            weights: (0..dim).map(|_| (rng.gen_range(-4..=4) as f64) * 0.25).collect(),
            bias: (rng.gen_range(-4..=4) as f64) * 0.25,
            single_class: false,
        };
        let n = rng.gen_range(1..60);
        let vecs: Vec<FeatureVector> = (0..n)
            .map(|_| FeatureVector::from_indices((0..dim as u32).filter(|_| rng.gen_bool(0.3)).collect()))
            .collect();
        let cands: Vec<(usize, &FeatureVector)> = vecs.iter().enumerate().collect();
        let k = rng.gen_range(0..=n);
        let got = select_closest_to_hyperplane(&model, &cands, k).map_err(|e| e.to_string())?;
        let mut all: Vec<(f64, usize)> = vecs
            .iter()
            .enumerate()
            .map(|(i, v)| (decision_value(&model, v).abs(), i))
            .collect();
        all.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
        let want: Vec<usize> = all.into_iter().take(k).map(|(_, i)| i).collect();
        if got != want {
            return Err(format!("case {case}: {got:?} != {want:?}"));
        }
    }
    let pool: Vec<String> = (0..500).map(|i| format!("doc{i}")).collect();
    let draw = || select_random(&pool, 50, &mut ChaCha8Rng::seed_from_u64(99)).unwrap().join(",");
    check(draw() == draw(), "1000 cases match; random draws identical".into())
}

fn determinism() -> Outcome {
    let corpus = concat!(env!("CARGO_MANIFEST_DIR"), "/data/sample_corpus.jsonl");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_lcforecast"))
            .args(["--seed", "3", "--out-dir"])
            .arg(&out)
            .args(["simulate", "--corpus", corpus, "--bp", "1"])
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        outputs.push(std::fs::read(out.join("curve.csv")).map_err(|e| e.to_string())?);
    }
    check(
        outputs[0] == outputs[1],
        format!("curve.csv {} bytes, identical={}", outputs[0].len(), outputs[0] == outputs[1]),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 fit recovery", fit_recovery()),
        ("2 average-difference oracle", oracle_equivalence()),
        ("3 tpc trend", tpc_trend()),
    ];
    match (|| -> Result<Runs, String> {
        Ok(Runs {
            passive: forecast_runs(Strategy::Random, 1.0)?,
            active: forecast_runs(Strategy::ClosestToHyperplane, 1.0)?,
            fine: forecast_runs(Strategy::Random, 0.25)?,
        })
    })() {
        Ok(runs) => {
            results.push(("4 f_measure vs accuracy", metric_gap(&runs)));
            results.push(("5 passive vs active", passive_vs_active(&runs)));
            results.push(("6 batch percent", batch_percent(&runs)));
        }
        Err(e) => {
            for name in ["4 f_measure vs accuracy", "5 passive vs active", "6 batch percent"] {
                results.push((name, Err(e.clone())));
            }
        }
    }
    results.push(("7 stopping", stopping()));
    results.push(("8 selection oracle", selection_oracle()));
    results.push(("9 determinism", determinism()));

    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

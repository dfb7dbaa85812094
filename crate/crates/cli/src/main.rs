mod args;

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Parser;
use nystrom_skd::data::{deduplicate, load_csv, load_exclusion_list, load_landmarks_csv, standardize, write_csv_rows};
use nystrom_skd::descent::step_size_from_lipschitz;
use nystrom_skd::skd::lipschitz_for;
use nystrom_skd::{
    run_descent_with, sample_initial, BiGaussian, Dataset, DescentConfig, EstimatorKind, GaussianKernel, MetricSet,
    MetricValues, NystromEvaluator, NystromSample, SkdObjective,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use args::{Cli, Command, DataArgs, EstimatorArg, EvaluateArgs, GenerateArgs, LipschitzArgs, OptimizeArgs};

/// Worker count for repetitions; defaults to rayon's choice.
const THREADS_ENV: &str = "NYSTROM_SKD_THREADS";
/// Mixed into the repetition seed for the descent's batch stream, so batch
/// draws are independent of the initial-sample draw.
const DESCENT_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(a) => generate(a),
        Command::Optimize(a) => optimize(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Lipschitz(a) => lipschitz(a),
    }
}

fn load_data(args: &DataArgs) -> Result<Dataset> {
    let mut data = match (&args.data, args.bigaussian) {
        (Some(path), _) => load_csv(path, args.header).with_context(|| format!("loading {}", path.display()))?,
        (None, Some(n)) => BiGaussian::default().generate(n as usize, args.data_seed)?,
        (None, None) => bail!("a dataset is required: pass --data <csv> or --bigaussian <N>"),
    };
    if let Some(path) = &args.exclude {
        data = data.exclude_rows(&load_exclusion_list(path)?)?;
    }
    if args.deduplicate {
        data = deduplicate(&data);
    }
    if args.standardize {
        data = standardize(&data)?;
    }
    Ok(data)
}

fn kernel(rho: f64) -> Result<GaussianKernel> {
    GaussianKernel::new(rho).context("invalid --rho")
}

fn json_f64(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let data = BiGaussian {
        weight: a.weight,
        ..BiGaussian::default()
    }
    .generate(a.n as usize, a.seed)?;
    write_csv_rows(&a.out, data.as_slice(), data.dim()).with_context(|| format!("writing {}", a.out.display()))?;
    println!("N={} d={} seed={}", data.n_points(), data.dim(), a.seed);
    Ok(())
}

fn estimator(a: &OptimizeArgs) -> Result<EstimatorKind> {
    let kind = match a.estimator {
        EstimatorArg::Exact => {
            if a.batch.is_some() || a.batch_x.is_some() {
                eprintln!("warning: batch sizes are ignored by the exact estimator");
            }
            EstimatorKind::Exact
        }
        EstimatorArg::OneSample => EstimatorKind::OneSample {
            batch_size: a.batch.context("--batch is required for the one-sample estimator")?,
        },
        EstimatorArg::TwoSample => match (a.batch_x, a.batch_y) {
            (Some(batch_x), Some(batch_y)) => EstimatorKind::TwoSample { batch_x, batch_y },
            _ => EstimatorKind::two_sample_split(
                a.batch.context("--batch or --batch-x/--batch-y is required for the two-sample estimator")?,
            )?,
        },
    };
    kind.validate()?;
    Ok(kind)
}

fn metric_columns(values: &MetricValues, suffix: &str, row: &mut Map<String, Value>) {
    let entries = [
        ("trace", values.trace),
        ("frobenius", values.frobenius),
        ("spectral", values.spectral),
        ("factor_tr", values.factor_tr),
        ("factor_f", values.factor_f),
        ("factor_sp", values.factor_sp),
    ];
    for (key, v) in entries {
        if let Some(v) = v {
            row.insert(format!("{key}_{suffix}"), json_f64(v));
        }
    }
}

fn optimize(a: OptimizeArgs) -> Result<()> {
    let data = load_data(&a.data)?;
    let kernel = kernel(a.rho)?;
    let n = a.n_landmarks as usize;
    if n > data.n_points() {
        bail!("--n {n} exceeds the number of data points ({})", data.n_points());
    }
    let metrics = MetricSet::parse(&a.metrics)?;
    let est = estimator(&a)?;

    let setup = Instant::now();
    let evaluator = NystromEvaluator::new(&data, &kernel);
    let objective = SkdObjective::with_data_frob_sq(&data, &kernel, evaluator.data_frob_sq());
    let gamma = if a.gamma.eq_ignore_ascii_case("auto") {
        let bounds = lipschitz_for(&data, &kernel, n, objective.data_frob_sq())?;
        step_size_from_lipschitz(&bounds, a.safety)?
    } else {
        a.gamma
            .parse::<f64>()
            .with_context(|| format!("--gamma must be a number or `auto`, got {:?}", a.gamma))?
    };
    let setup_secs = setup.elapsed().as_secs_f64();
    let base_config = DescentConfig::new(gamma, a.iters, est).with_log_every(a.log_every);
    base_config.validate()?;
    for dir in [&a.trace_dir, &a.landmarks_dir].into_iter().flatten() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    eprintln!(
        "N={} d={} n={n} gamma={gamma:e} T={} reps={} (setup {setup_secs:.2} s)",
        data.n_points(),
        data.dim(),
        a.iters,
        a.reps
    );

    let run_rep = |r: u64| -> Result<Value> {
        let seed = a.seed.wrapping_add(r);
        let mut row = Map::new();
        row.insert("rep".into(), json!(r));
        row.insert("seed".into(), json!(seed));

        let t = Instant::now();
        let initial = sample_initial(&data, n, seed)?;
        let before = evaluator.evaluate(&initial, &metrics)?;
        let eval_initial_secs = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let config = base_config.with_seed(seed ^ DESCENT_STREAM);
        let outcome = run_descent_with(&objective, &initial, &config).with_context(|| format!("repetition {r}"))?;
        let descent_secs = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let after = evaluator.evaluate(&outcome.final_sample, &metrics)?;
        let eval_final_secs = t.elapsed().as_secs_f64();

        let skd_initial = outcome.trace.first().map(|rec| rec.skd).unwrap_or(f64::NAN);
        let skd_final = outcome.trace.last().map(|rec| rec.skd).unwrap_or(f64::NAN);
        row.insert("skd_initial".into(), json_f64(skd_initial));
        row.insert("skd_final".into(), json_f64(skd_final));
        metric_columns(&before, "initial", &mut row);
        metric_columns(&after, "final", &mut row);
        row.insert("gamma".into(), json_f64(gamma));
        row.insert("iterations".into(), json!(a.iters));
        row.insert("estimator".into(), serde_json::to_value(est)?);
        row.insert(
            "wall_secs".into(),
            json!({"eval_initial": eval_initial_secs, "descent": descent_secs, "eval_final": eval_final_secs}),
        );

        if let Some(dir) = &a.trace_dir {
            let path = dir.join(format!("rep_{r}.csv"));
            let mut text = String::from("iteration,skd,elapsed_secs\n");
            for rec in &outcome.trace.records {
                text.push_str(&format!("{},{:?},{:?}\n", rec.iteration, rec.skd, rec.elapsed_secs));
            }
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        if let Some(dir) = &a.landmarks_dir {
            write_landmarks(&dir.join(format!("rep_{r}_initial.csv")), &initial)?;
            write_landmarks(&dir.join(format!("rep_{r}_final.csv")), &outcome.final_sample)?;
        }
        Ok(Value::Object(row))
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        pool = pool.num_threads(v.parse().with_context(|| format!("{THREADS_ENV} must be a count, got {v:?}"))?);
    }
    let results: Vec<Result<Value>> = pool.build()?.install(|| (1..=a.reps).into_par_iter().map(run_rep).collect());

    let mut text = String::new();
    let mut failed = 0;
    for (r, res) in (1..=a.reps).zip(results) {
        match res {
            Ok(row) => {
                text.push_str(&serde_json::to_string(&row)?);
                text.push('\n');
            }
            Err(e) => {
                failed += 1;
                eprintln!("repetition {r} failed: {e:#}");
            }
        }
    }
    write_output(a.out.as_deref(), &text)?;
    if failed > 0 {
        bail!("{failed} of {} repetitions failed", a.reps);
    }
    Ok(())
}

fn write_landmarks(path: &Path, sample: &NystromSample) -> Result<()> {
    write_csv_rows(path, sample.as_slice(), sample.dim()).with_context(|| format!("writing {}", path.display()))
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let data = load_data(&a.data)?;
    let kernel = kernel(a.rho)?;
    let landmarks = load_landmarks_csv(&a.landmarks, a.landmarks_header)
        .with_context(|| format!("loading {}", a.landmarks.display()))?;
    if landmarks.dim() != data.dim() {
        bail!(
            "landmark dimension {} does not match the dataset dimension {}",
            landmarks.dim(),
            data.dim()
        );
    }
    let metrics = MetricSet::parse(&a.metrics)?;
    let start = Instant::now();
    let evaluator = NystromEvaluator::new(&data, &kernel);
    let values = evaluator.evaluate(&landmarks, &metrics)?;

    let mut report = Map::new();
    report.insert("n_points".into(), json!(data.n_points()));
    report.insert("dim".into(), json!(data.dim()));
    report.insert("n_landmarks".into(), json!(landmarks.n_landmarks()));
    report.insert("rho".into(), json_f64(a.rho));
    let entries = [
        ("skd", values.skd),
        ("trace_err", values.trace),
        ("frob_err", values.frobenius),
        ("spec_err", values.spectral),
        ("factor_tr", values.factor_tr),
        ("factor_f", values.factor_f),
        ("factor_sp", values.factor_sp),
    ];
    for (key, v) in entries {
        if let Some(v) = v {
            report.insert(key.into(), json_f64(v));
        }
    }
    report.insert("wall_secs".into(), json_f64(start.elapsed().as_secs_f64()));
    let mut text = serde_json::to_string_pretty(&Value::Object(report))?;
    text.push('\n');
    write_output(a.out.as_deref(), &text)
}

fn lipschitz(a: LipschitzArgs) -> Result<()> {
    let data = load_data(&a.data)?;
    let kernel = kernel(a.rho)?;
    let n = a.n_landmarks as usize;
    let frob_sq = nystrom_skd::skd::data_frob_sq(&data, &kernel);
    let bounds = lipschitz_for(&data, &kernel, n, frob_sq)?;
    let gamma = step_size_from_lipschitz(&bounds, a.safety)?;
    let out = json!({
        "n_points": data.n_points(),
        "dim": data.dim(),
        "n_landmarks": n,
        "rho": a.rho,
        "c0": bounds.c0,
        "c1": bounds.c1,
        "l_const": bounds.l_const,
        "gamma": gamma,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

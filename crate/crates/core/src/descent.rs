//! Fixed-stepsize gradient descent and SGD over landmark configurations.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, NystromSample};
use crate::error::{Error, Result};
use crate::estimator::{draw_batch, one_sample_gradient_with, two_sample_gradient_with, Batch, EstimatorKind};
use crate::kernel::Kernel;
use crate::rng::rng_from_seed;
use crate::skd::{landmark_terms, LipschitzBounds, SkdGradient, SkdObjective};

/// How stochastic batches are formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchSampling {
    /// i.i.d. uniform indices, with replacement.
    #[default]
    Iid,
    /// Deterministic indices `0, 1, …, b−1 (mod N)`. With `b = N` every batch
    /// enumerates the dataset exactly once; meant for testing.
    Enumerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentConfig {
    pub step_size: f64,
    pub iterations: usize,
    pub estimator: EstimatorKind,
    pub seed: u64,
    pub log_every: usize,
    pub sampling: BatchSampling,
}

impl DescentConfig {
    pub fn new(step_size: f64, iterations: usize, estimator: EstimatorKind) -> Self {
        Self {
            step_size,
            iterations,
            estimator,
            seed: 0,
            log_every: 100,
            sampling: BatchSampling::Iid,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_log_every(mut self, log_every: usize) -> Self {
        self.log_every = log_every;
        self
    }

    pub fn with_sampling(mut self, sampling: BatchSampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::invalid("step_size", format!("must be positive, got {}", self.step_size)));
        }
        if self.log_every == 0 {
            return Err(Error::invalid("log_every", "must be at least 1"));
        }
        self.estimator.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub skd: f64,
    /// Seconds since the start of the run.
    pub elapsed_secs: f64,
}

/// `R(S)` at the logging cadence; iterations strictly increase.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceLog {
    pub records: Vec<TraceRecord>,
}

impl TraceLog {
    pub fn first(&self) -> Option<&TraceRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn skd_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.skd).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome {
    pub final_sample: NystromSample,
    pub trace: TraceLog,
}

/// Runs `S ← S − γ ĝ(S)` for the configured number of iterations, logging
/// `R(S)` at iteration 0, every `log_every` iterations and at the end.
pub fn run_descent<K: Kernel + ?Sized>(
    data: &Dataset,
    initial: &NystromSample,
    kernel: &K,
    config: &DescentConfig,
) -> Result<DescentOutcome> {
    run_descent_with(&SkdObjective::new(data, kernel), initial, config)
}

/// [`run_descent`] against an objective whose `‖K‖²_F` is already known.
pub fn run_descent_with<K: Kernel + ?Sized>(
    objective: &SkdObjective<'_, K>,
    initial: &NystromSample,
    config: &DescentConfig,
) -> Result<DescentOutcome> {
    config.validate()?;
    let data = objective.data();
    let kernel = objective.kernel();
    initial.check_against(data)?;

    let start = Instant::now();
    let mut rng = rng_from_seed(config.seed);
    let mut sample = initial.clone();
    let mut trace = TraceLog::default();
    let log = |iteration: usize, sample: &NystromSample, trace: &mut TraceLog| -> Result<()> {
        let skd = objective.value(sample)?;
        if !skd.is_finite() {
            return Err(Error::NonFinite { what: "cost", iteration });
        }
        trace.records.push(TraceRecord {
            iteration,
            skd,
            elapsed_secs: start.elapsed().as_secs_f64(),
        });
        Ok(())
    };
    log(0, &sample, &mut trace)?;

    let n_points = data.n_points();
    let make_batch = |b: usize, rng: &mut _| -> Result<Batch> {
        match config.sampling {
            BatchSampling::Iid => draw_batch(n_points, b, rng),
            BatchSampling::Enumerate => Batch::new((0..b).map(|i| i % n_points).collect(), n_points),
        }
    };

    for t in 1..=config.iterations {
        let grad: SkdGradient = match config.estimator {
            EstimatorKind::Exact => objective.gradient(&sample)?,
            EstimatorKind::OneSample { batch_size } => {
                let batch = make_batch(batch_size, &mut rng)?;
                let lm = landmark_terms(&sample, kernel);
                one_sample_gradient_with(data, &sample, &batch, kernel, &lm)?
            }
            EstimatorKind::TwoSample { batch_x, batch_y } => {
                let bx = make_batch(batch_x, &mut rng)?;
                let by = make_batch(batch_y, &mut rng)?;
                let lm = landmark_terms(&sample, kernel);
                two_sample_gradient_with(data, &sample, &bx, &by, kernel, &lm)?
            }
        };
        if !grad.is_finite() {
            return Err(Error::NonFinite { what: "gradient", iteration: t });
        }
        for (s, g) in sample.as_mut_slice().iter_mut().zip(grad.as_slice()) {
            *s -= config.step_size * g;
        }
        if t % config.log_every == 0 || t == config.iterations {
            log(t, &sample, &mut trace)?;
        }
    }
    Ok(DescentOutcome {
        final_sample: sample,
        trace,
    })
}

/// `safety / L`, a stepsize inside the guaranteed-convergence range `(0, 1/L]`.
pub fn step_size_from_lipschitz(bounds: &LipschitzBounds, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::invalid("safety", format!("must lie in (0, 1], got {safety}")));
    }
    if bounds.l_const.is_nan() || bounds.l_const <= 0.0 {
        return Err(Error::invalid(
            "l_const",
            "Lipschitz constant is zero; any stepsize is admissible, supply one explicitly",
        ));
    }
    Ok(safety / bounds.l_const)
}

//! Synthetic instance generation and experiment drivers.
//!
//! Instances are sums of `num_terms` rank-1 tensors whose factors are
//! standard normal draws with entries independently zeroed at the target
//! sparsity ratio. Drivers sweep a grid, run the approximation variants
//! (and optionally the alternating refiner), and emit one CSV row per
//! record plus a JSON aggregate summary. Record seeds derive from the
//! master seed and the record index, so results are reproducible bit for
//! bit whether records run in parallel or sequentially.

use crate::algo::{run_approx, upper_bound_vub, AlgoReport, RegParams, RunOptions, Variant};
use crate::amm::{amm_solve, AmmConfig, AmmInit};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, splitmix64};
use crate::tensor::DenseTensor;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

pub const DEFAULT_NUM_TERMS: usize = 10;

/// Everything that determines a synthetic instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSpec {
    pub shape: Vec<usize>,
    pub num_terms: usize,
    /// Probability that a factor entry is zeroed.
    pub sparsity_ratio: f64,
    pub seed: u64,
}

/// A generated instance with its measured sparsity levels. The factor
/// zero ratio and the tensor zero ratio differ; both are reported.
#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub tensor: DenseTensor,
    /// Fraction of exactly-zero entries across all drawn factors.
    pub factor_sparsity: f64,
    /// Fraction of exactly-zero entries of the assembled tensor.
    pub tensor_sparsity: f64,
}

/// Fraction of exactly-zero entries.
pub fn sparsity_ratio(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "sparsity_ratio of an empty slice");
    values.iter().filter(|v| **v == 0.0).count() as f64 / values.len() as f64
}

/// Draws the instance for `spec`. A draw that assembles to the zero
/// tensor (possible when the sparsity ratio is close to 1) is retried up
/// to 10 times before erroring.
pub fn generate_instance(spec: &InstanceSpec) -> Result<SyntheticInstance> {
    if spec.shape.is_empty() || spec.shape.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "invalid shape {:?}",
            spec.shape
        )));
    }
    if spec.num_terms == 0 {
        return Err(Error::InvalidArgument("num_terms must be positive".into()));
    }
    if !(0.0..=1.0).contains(&spec.sparsity_ratio) {
        return Err(Error::InvalidArgument(format!(
            "sparsity_ratio must lie in [0, 1], got {}",
            spec.sparsity_ratio
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let total: usize = spec.shape.iter().product();
    for _attempt in 0..10 {
        let mut factor_entries = 0usize;
        let mut factor_zeros = 0usize;
        let mut data = vec![0.0; total];
        for _ in 0..spec.num_terms {
            let factors: Vec<Vec<f64>> = spec
                .shape
                .iter()
                .map(|&n| {
                    (0..n)
                        .map(|_| {
                            let v: f64 = rng.sample(StandardNormal);
                            if rng.random::<f64>() < spec.sparsity_ratio {
                                0.0
                            } else {
                                v
                            }
                        })
                        .collect()
                })
                .collect();
            for f in &factors {
                factor_entries += f.len();
                factor_zeros += f.iter().filter(|v| **v == 0.0).count();
            }
            let term = DenseTensor::rank_one(&factors)?;
            for (acc, &v) in data.iter_mut().zip(term.data()) {
                *acc += v;
            }
        }
        let tensor = DenseTensor::new(spec.shape.clone(), data)?;
        if !tensor.is_zero() {
            let tensor_sparsity = sparsity_ratio(tensor.data());
            return Ok(SyntheticInstance {
                tensor,
                factor_sparsity: factor_zeros as f64 / factor_entries as f64,
                tensor_sparsity,
            });
        }
    }
    Err(Error::Numeric(
        "instance generation drew an all-zero tensor 10 times in a row".into(),
    ))
}

/// Which pipeline produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordVariant {
    V1,
    V2,
    AmmFromV1,
    AmmFromV2,
    AmmRandom,
}

impl RecordVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordVariant::V1 => "v1",
            RecordVariant::V2 => "v2",
            RecordVariant::AmmFromV1 => "amm_v1",
            RecordVariant::AmmFromV2 => "amm_v2",
            RecordVariant::AmmRandom => "amm_rand",
        }
    }
}

/// One algorithm run on one instance.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub variant: RecordVariant,
    pub dims: Vec<usize>,
    /// The sparsity knob of the generator.
    pub sr_target: f64,
    /// Measured zero fraction of the assembled tensor.
    pub sr_tensor: f64,
    /// Measured zero fraction of the drawn factors.
    pub sr_factor: f64,
    pub seed: u64,
    pub lambda: f64,
    pub objective: f64,
    pub vub: f64,
    pub bound_ratio: Option<f64>,
    pub sparsity_out: Vec<f64>,
    pub time_ms: f64,
    pub sweeps: Option<usize>,
}

/// Driver knobs shared by every experiment kind.
#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    /// Run records concurrently when the `parallel` feature is enabled.
    /// Output is identical either way.
    pub parallel: bool,
    /// Record wall times. Disable to get byte-identical CSV across
    /// reruns (times are written as 0).
    pub measure_time: bool,
    pub num_terms: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            parallel: true,
            measure_time: true,
            num_terms: DEFAULT_NUM_TERMS,
        }
    }
}

/// All records of one experiment, in deterministic order.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    /// Tensor order, kept even when the grid is empty so the CSV header
    /// is well defined.
    pub d: usize,
    pub records: Vec<Record>,
    /// Per-record failures (the sweep continues past them).
    pub errors: Vec<String>,
}

/// Mean metrics for one (variant, dims, sr) group.
#[derive(Debug, Clone, Serialize)]
pub struct GroupAggregate {
    pub variant: &'static str,
    pub dims: Vec<usize>,
    pub sr_target: f64,
    pub count: usize,
    pub mean_lambda: f64,
    pub mean_objective: f64,
    pub mean_vub: f64,
    pub mean_sr_tensor: f64,
    pub mean_sr_factor: f64,
    /// Mean over records of the per-mode average output sparsity.
    pub mean_sparsity_out: f64,
    pub mean_time_ms: f64,
    pub mean_sweeps: Option<f64>,
}

impl ExperimentResult {
    /// Deterministically ordered group means.
    pub fn aggregates(&self) -> Vec<GroupAggregate> {
        #[derive(Default)]
        struct Acc {
            count: usize,
            lambda: f64,
            objective: f64,
            vub: f64,
            sr_tensor: f64,
            sr_factor: f64,
            sparsity_out: f64,
            time_ms: f64,
            sweeps_sum: f64,
            sweeps_count: usize,
        }
        let mut groups: BTreeMap<(RecordVariant, Vec<usize>, u64), Acc> = BTreeMap::new();
        for r in &self.records {
            let key = (r.variant, r.dims.clone(), r.sr_target.to_bits());
            let acc = groups.entry(key).or_default();
            acc.count += 1;
            acc.lambda += r.lambda;
            acc.objective += r.objective;
            acc.vub += r.vub;
            acc.sr_tensor += r.sr_tensor;
            acc.sr_factor += r.sr_factor;
            acc.sparsity_out +=
                r.sparsity_out.iter().sum::<f64>() / r.sparsity_out.len().max(1) as f64;
            acc.time_ms += r.time_ms;
            if let Some(s) = r.sweeps {
                acc.sweeps_sum += s as f64;
                acc.sweeps_count += 1;
            }
        }
        groups
            .into_iter()
            .map(|((variant, dims, sr_bits), acc)| {
                let n = acc.count as f64;
                GroupAggregate {
                    variant: variant.as_str(),
                    dims,
                    sr_target: f64::from_bits(sr_bits),
                    count: acc.count,
                    mean_lambda: acc.lambda / n,
                    mean_objective: acc.objective / n,
                    mean_vub: acc.vub / n,
                    mean_sr_tensor: acc.sr_tensor / n,
                    mean_sr_factor: acc.sr_factor / n,
                    mean_sparsity_out: acc.sparsity_out / n,
                    mean_time_ms: acc.time_ms / n,
                    mean_sweeps: if acc.sweeps_count > 0 {
                        Some(acc.sweeps_sum / acc.sweeps_count as f64)
                    } else {
                        None
                    },
                }
            })
            .collect()
    }

    /// Fixed-header CSV, one row per record.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        write!(
            w,
            "variant,d,dims,sr_target,sr_tensor,seed,lambda,objective,vub,bound_ratio"
        )?;
        for j in 1..=self.d {
            write!(w, ",sparsity_out_{j}")?;
        }
        writeln!(w, ",time_ms,sweeps")?;
        for r in &self.records {
            let dims = r
                .dims
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join("x");
            write!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.variant.as_str(),
                r.dims.len(),
                dims,
                r.sr_target,
                r.sr_tensor,
                r.seed,
                r.lambda,
                r.objective,
                r.vub,
                r.bound_ratio.map(|b| b.to_string()).unwrap_or_default(),
            )?;
            for s in &r.sparsity_out {
                write!(w, ",{s}")?;
            }
            writeln!(
                w,
                ",{},{}",
                r.time_ms,
                r.sweeps.map(|s| s.to_string()).unwrap_or_default()
            )?;
        }
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    /// Versioned aggregate summary.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": 1,
            "record_count": self.records.len(),
            "errors": self.errors,
            "groups": self.aggregates(),
        })
    }
}

/// Runs V1 and V2 across a sparsity-ratio grid at fixed dims.
pub fn experiment_vary_sr(
    dims: &[usize],
    sr_grid: &[f64],
    instances: usize,
    master_seed: u64,
    opts: &ExperimentOptions,
) -> Result<ExperimentResult> {
    check_dims(dims)?;
    let cells: Vec<(Vec<usize>, f64)> = sr_grid
        .iter()
        .flat_map(|&sr| std::iter::repeat_n((dims.to_vec(), sr), instances))
        .collect();
    run_cells(dims.len(), &cells, master_seed, opts, CellKind::Pair)
}

/// Runs V1 and V2 across a size grid (cubic-style dims `[n; d]`) at a
/// fixed sparsity ratio, recording per-run wall times.
pub fn experiment_vary_n(
    d: usize,
    n_grid: &[usize],
    sr: f64,
    instances: usize,
    master_seed: u64,
    opts: &ExperimentOptions,
) -> Result<ExperimentResult> {
    if d < 3 {
        return Err(Error::InvalidArgument(format!(
            "experiments need order >= 3, got {d}"
        )));
    }
    if opts.measure_time {
        if let Some(&n0) = n_grid.iter().min() {
            // warm up caches and the allocator so the first timed record
            // is not penalized
            let spec = InstanceSpec {
                shape: vec![n0; d],
                num_terms: opts.num_terms,
                sparsity_ratio: sr,
                seed: splitmix64(master_seed ^ 0x5741_524D),
            };
            let _ = generate_instance(&spec).and_then(|inst| {
                let params = RegParams::default_rule(inst.tensor.shape());
                run_approx(
                    &inst.tensor,
                    &params,
                    Variant::V1,
                    &RunOptions {
                        compute_upper_bound: false,
                        ..RunOptions::default()
                    },
                )?;
                run_approx(
                    &inst.tensor,
                    &params,
                    Variant::V2,
                    &RunOptions {
                        compute_upper_bound: false,
                        ..RunOptions::default()
                    },
                )
            });
        }
    }
    let cells: Vec<(Vec<usize>, f64)> = n_grid
        .iter()
        .flat_map(|&n| std::iter::repeat_n((vec![n; d], sr), instances))
        .collect();
    run_cells(d, &cells, master_seed, opts, CellKind::Pair)
}

/// Runs the alternating refiner from the three initializations across a
/// size grid at a fixed sparsity ratio. Record times include the
/// initializing run.
pub fn experiment_amm(
    d: usize,
    n_grid: &[usize],
    sr: f64,
    instances: usize,
    master_seed: u64,
    opts: &ExperimentOptions,
) -> Result<ExperimentResult> {
    if d < 3 {
        return Err(Error::InvalidArgument(format!(
            "experiments need order >= 3, got {d}"
        )));
    }
    let cells: Vec<(Vec<usize>, f64)> = n_grid
        .iter()
        .flat_map(|&n| std::iter::repeat_n((vec![n; d], sr), instances))
        .collect();
    run_cells(d, &cells, master_seed, opts, CellKind::Amm)
}

#[derive(Clone, Copy)]
enum CellKind {
    /// V1 + V2 records.
    Pair,
    /// One record per refiner initialization.
    Amm,
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 3 || dims.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "experiments need an order >= 3 shape with positive dims, got {dims:?}"
        )));
    }
    Ok(())
}

fn run_cells(
    d: usize,
    cells: &[(Vec<usize>, f64)],
    master_seed: u64,
    opts: &ExperimentOptions,
    kind: CellKind,
) -> Result<ExperimentResult> {
    let outcomes = map_cells(cells.len(), opts.parallel, |i| {
        let (dims, sr) = &cells[i];
        let seed = derive_seed(master_seed, i as u64);
        run_one_cell(dims, *sr, seed, opts, kind)
    });
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(mut rs) => records.append(&mut rs),
            Err(e) => errors.push(e),
        }
    }
    Ok(ExperimentResult { d, records, errors })
}

fn run_one_cell(
    dims: &[usize],
    sr: f64,
    seed: u64,
    opts: &ExperimentOptions,
    kind: CellKind,
) -> std::result::Result<Vec<Record>, String> {
    let spec = InstanceSpec {
        shape: dims.to_vec(),
        num_terms: opts.num_terms,
        sparsity_ratio: sr,
        seed,
    };
    let context = |e: &dyn std::fmt::Display| format!("dims {dims:?} sr {sr} seed {seed}: {e}");
    let inst = generate_instance(&spec).map_err(|e| context(&e))?;
    let params = RegParams::default_rule(dims);
    let vub = upper_bound_vub(&inst.tensor).map_err(|e| context(&e))?;

    let base =
        |variant: RecordVariant, lambda: f64, objective: f64, sparsity_out: Vec<f64>| Record {
            variant,
            dims: dims.to_vec(),
            sr_target: sr,
            sr_tensor: inst.tensor_sparsity,
            sr_factor: inst.factor_sparsity,
            seed,
            lambda,
            objective,
            vub,
            bound_ratio: None,
            sparsity_out,
            time_ms: 0.0,
            sweeps: None,
        };

    let mut records = Vec::new();
    match kind {
        CellKind::Pair => {
            let run_opts = RunOptions {
                compute_upper_bound: false,
                ..RunOptions::default()
            };
            for variant in [Variant::V1, Variant::V2] {
                let started = Instant::now();
                let report: AlgoReport = run_approx(&inst.tensor, &params, variant, &run_opts)
                    .map_err(|e| context(&e))?;
                let elapsed = started.elapsed().as_secs_f64() * 1e3;
                let record_variant = match variant {
                    Variant::V1 => RecordVariant::V1,
                    Variant::V2 => RecordVariant::V2,
                };
                let mut r = base(
                    record_variant,
                    report.solution.lambda,
                    report.solution.objective,
                    report.solution.sparsity_ratios.clone(),
                );
                r.bound_ratio = report.bound_ratio;
                r.time_ms = if opts.measure_time { elapsed } else { 0.0 };
                records.push(r);
            }
        }
        CellKind::Amm => {
            let amm_seed = splitmix64(seed ^ 0x414D_4D00);
            let inits = [
                (RecordVariant::AmmFromV1, AmmInit::FromV1),
                (RecordVariant::AmmFromV2, AmmInit::FromV2),
                (RecordVariant::AmmRandom, AmmInit::Random { seed: amm_seed }),
            ];
            for (record_variant, init) in inits {
                let config = AmmConfig::new(init);
                let started = Instant::now();
                let trace = amm_solve(&inst.tensor, &params, &config).map_err(|e| context(&e))?;
                let elapsed = started.elapsed().as_secs_f64() * 1e3;
                let mut r = base(
                    record_variant,
                    trace.final_solution.lambda,
                    trace.final_solution.objective,
                    trace.final_solution.sparsity_ratios.clone(),
                );
                r.time_ms = if opts.measure_time { elapsed } else { 0.0 };
                r.sweeps = Some(trace.sweeps);
                records.push(r);
            }
        }
    }
    Ok(records)
}

/// Maps cell indices to outcomes, in parallel when enabled and
/// requested; the output order is always the input order.
fn map_cells<F>(count: usize, parallel: bool, f: F) -> Vec<std::result::Result<Vec<Record>, String>>
where
    F: Fn(usize) -> std::result::Result<Vec<Record>, String> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            use rayon::prelude::*;
            return (0..count).into_par_iter().map(&f).collect();
        }
    }
    let _ = parallel;
    (0..count).map(f).collect()
}

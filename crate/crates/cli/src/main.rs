//! `sbr1` — sparse rank-1 tensor approximation toolkit.
//!
//! Subcommands: `run` (one approximation), `amm` (alternating
//! refinement), `experiment` (grid sweeps to CSV/JSON), `gen` (emit a
//! tensor file), `bounds` (guarantee ratios for a shape). Exit codes:
//! 0 success, 1 I/O error, 2 validation error, 3 numeric failure.

use clap::{Args, Parser, Subcommand};
use sbr1_core::algo::{bound_ratio_v1, bound_ratio_v2, run_approx, RegParams, RunOptions, Variant};
use sbr1_core::amm::{amm_solve, AmmConfig, AmmInit};
use sbr1_core::experiment::{
    experiment_amm, experiment_vary_n, experiment_vary_sr, generate_instance, ExperimentOptions,
    ExperimentResult, InstanceSpec,
};
use sbr1_core::{io as tensor_io, DenseTensor, Error as CoreError};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "sbr1",
    version,
    about = "Sparse rank-1 approximation of dense higher-order tensors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Tensor file (text or binary; format is sniffed).
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Synthetic instance, e.g. "d=4,n=20,terms=10,sr=0.7,seed=1"
    /// (or "dims=4x5x6" instead of d/n).
    #[arg(long, value_name = "SPEC")]
    gen: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one approximation variant and write its report as JSON.
    Run {
        /// "v1" (singular pairs) or "v2" (max-energy rows).
        #[arg(long)]
        variant: String,
        #[command(flatten)]
        input: InputArgs,
        /// "default" for 1/sqrt(n_j) - 1e-5, or a comma list of d values.
        #[arg(long, default_value = "default")]
        omega: String,
        /// Output path, or "-" for stdout.
        #[arg(long, default_value = "-")]
        out: String,
        /// Skip the internal infinity-norm prescaling.
        #[arg(long)]
        no_prescale: bool,
    },
    /// Refine with alternating maximization and write the trace as JSON.
    Amm {
        /// "v1", "v2", or "random".
        #[arg(long)]
        init: String,
        /// Seed for the random initialization.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "default")]
        omega: String,
        /// Sweep-level movement threshold.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_sweeps: usize,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Run a grid experiment and write CSV + JSON summary files.
    Experiment {
        /// "vary-sr", "vary-n", or "amm".
        #[arg(long)]
        kind: String,
        /// Dims for vary-sr, e.g. "20,20,20,20".
        #[arg(long, default_value = "20,20,20,20")]
        dims: String,
        /// Tensor order for vary-n / amm grids.
        #[arg(long, default_value_t = 4)]
        d: usize,
        /// Sparsity grid for vary-sr (comma list; empty for none).
        #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        sr_grid: String,
        /// Size grid for vary-n / amm (comma list).
        #[arg(long, default_value = "10,14,20,28,40")]
        n_grid: String,
        /// Fixed sparsity ratio for vary-n / amm.
        #[arg(long, default_value_t = 0.7)]
        sr: f64,
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Rank-1 terms per synthetic instance.
        #[arg(long, default_value_t = 10)]
        terms: usize,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Run records one at a time (cleaner per-record wall times).
        #[arg(long)]
        sequential: bool,
        /// Write zero wall times so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
    },
    /// Generate a synthetic tensor and write it to a file.
    Gen {
        /// e.g. "d=4,n=20,terms=10,sr=0.7,seed=1".
        #[arg(long)]
        spec: String,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Write the binary format instead of text.
        #[arg(long)]
        binary: bool,
    },
    /// Print guarantee ratios and weight validity for a shape.
    Bounds {
        /// Comma list, e.g. "4,4,4".
        #[arg(long)]
        dims: String,
        #[arg(long, default_value = "default")]
        omega: String,
    },
    /// Cross-check the fast paths against the built-in oracles.
    #[command(hide = true)]
    Verify,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn io(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
    fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let message = e.to_string();
        match e {
            CoreError::Io(_) | CoreError::Parse(_) => CliError::io(message),
            CoreError::InvalidArgument(_) | CoreError::DimMismatch(_) => {
                CliError::validation(message)
            }
            CoreError::ZeroInput(_) | CoreError::Numeric(_) => CliError::numeric(message),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(e.to_string())
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            variant,
            input,
            omega,
            out,
            no_prescale,
        } => cmd_run(&variant, &input, &omega, &out, no_prescale),
        Command::Amm {
            init,
            seed,
            input,
            omega,
            tol,
            max_sweeps,
            out,
        } => cmd_amm(&init, seed, &input, &omega, tol, max_sweeps, &out),
        Command::Experiment {
            kind,
            dims,
            d,
            sr_grid,
            n_grid,
            sr,
            instances,
            seed,
            terms,
            out_dir,
            sequential,
            no_timing,
        } => cmd_experiment(ExperimentArgs {
            kind,
            dims,
            d,
            sr_grid,
            n_grid,
            sr,
            instances,
            seed,
            terms,
            out_dir,
            sequential,
            no_timing,
        }),
        Command::Gen { spec, out, binary } => cmd_gen(&spec, &out, binary),
        Command::Bounds { dims, omega } => cmd_bounds(&dims, &omega),
        Command::Verify => cmd_verify(),
    }
}

fn cmd_run(
    variant: &str,
    input: &InputArgs,
    omega: &str,
    out: &str,
    no_prescale: bool,
) -> Result<(), CliError> {
    let variant = match variant {
        "v1" => Variant::V1,
        "v2" => Variant::V2,
        other => return Err(CliError::validation(format!("unknown variant '{other}'"))),
    };
    let tensor = load_tensor(input)?;
    let params = parse_omegas(omega, tensor.shape())?;
    let opts = RunOptions {
        prescale: !no_prescale,
        ..RunOptions::default()
    };
    let report = run_approx(&tensor, &params, variant, &opts)?;
    let mut json = serde_json::to_value(&report).expect("report serializes");
    annotate(&mut json, &tensor, &params);
    write_output(
        out,
        &serde_json::to_string_pretty(&json).expect("valid json"),
    )?;
    Ok(())
}

fn cmd_amm(
    init: &str,
    seed: u64,
    input: &InputArgs,
    omega: &str,
    tol: f64,
    max_sweeps: usize,
    out: &str,
) -> Result<(), CliError> {
    let init = match init {
        "v1" => AmmInit::FromV1,
        "v2" => AmmInit::FromV2,
        "random" => AmmInit::Random { seed },
        other => {
            return Err(CliError::validation(format!(
                "unknown initialization '{other}' (expected v1, v2, or random)"
            )))
        }
    };
    let tensor = load_tensor(input)?;
    let params = parse_omegas(omega, tensor.shape())?;
    let mut config = AmmConfig::new(init);
    config.stop_tol = tol;
    config.max_sweeps = max_sweeps;
    let started = Instant::now();
    let trace = amm_solve(&tensor, &params, &config)?;
    let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    let mut json = serde_json::to_value(&trace).expect("trace serializes");
    annotate(&mut json, &tensor, &params);
    if let Some(obj) = json.as_object_mut() {
        obj.insert("init".into(), serde_json::to_value(init).expect("init"));
        obj.insert("wall_time_ms".into(), wall_time_ms.into());
    }
    write_output(
        out,
        &serde_json::to_string_pretty(&json).expect("valid json"),
    )?;
    Ok(())
}

struct ExperimentArgs {
    kind: String,
    dims: String,
    d: usize,
    sr_grid: String,
    n_grid: String,
    sr: f64,
    instances: usize,
    seed: u64,
    terms: usize,
    out_dir: PathBuf,
    sequential: bool,
    no_timing: bool,
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let opts = ExperimentOptions {
        parallel: !args.sequential,
        measure_time: !args.no_timing,
        num_terms: args.terms,
    };
    let result: ExperimentResult = match args.kind.as_str() {
        "vary-sr" => {
            let dims = parse_usize_list(&args.dims, "dims")?;
            let grid = parse_f64_list(&args.sr_grid, "sr-grid")?;
            experiment_vary_sr(&dims, &grid, args.instances, args.seed, &opts)?
        }
        "vary-n" => {
            let grid = parse_usize_list(&args.n_grid, "n-grid")?;
            experiment_vary_n(args.d, &grid, args.sr, args.instances, args.seed, &opts)?
        }
        "amm" => {
            let grid = parse_usize_list(&args.n_grid, "n-grid")?;
            experiment_amm(args.d, &grid, args.sr, args.instances, args.seed, &opts)?
        }
        other => {
            return Err(CliError::validation(format!(
                "unknown experiment kind '{other}' (expected vary-sr, vary-n, or amm)"
            )))
        }
    };
    std::fs::create_dir_all(&args.out_dir)?;
    let stem = args.kind.replace('-', "_");
    let csv_path = args.out_dir.join(format!("{stem}.csv"));
    let mut csv = std::fs::File::create(&csv_path)?;
    result
        .write_csv(&mut csv)
        .map_err(|e| CliError::io(e.to_string()))?;
    let json_path = args.out_dir.join(format!("{stem}_summary.json"));
    std::fs::write(
        &json_path,
        serde_json::to_string_pretty(&result.summary_json()).expect("valid json"),
    )?;
    for err in &result.errors {
        eprintln!("record error: {err}");
    }
    eprintln!(
        "wrote {} records to {} and {}",
        result.records.len(),
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}

fn cmd_gen(spec: &str, out: &Path, binary: bool) -> Result<(), CliError> {
    let spec = parse_gen_spec(spec)?;
    let inst = generate_instance(&spec)?;
    tensor_io::write_path(out, &inst.tensor, binary)?;
    eprintln!(
        "wrote {:?} tensor (factor sparsity {:.3}, tensor sparsity {:.3}) to {}",
        spec.shape,
        inst.factor_sparsity,
        inst.tensor_sparsity,
        out.display()
    );
    Ok(())
}

fn cmd_bounds(dims: &str, omega: &str) -> Result<(), CliError> {
    let dims = parse_usize_list(dims, "dims")?;
    let params = parse_omegas(omega, &dims)?;
    let validity = params.validity(&dims);
    let valid = params.is_valid(&dims);
    let (ratio_v1, ratio_v2) = if valid && dims.len() >= 3 {
        (
            Some(bound_ratio_v1(&dims, &params)?),
            Some(bound_ratio_v2(&dims, &params)?),
        )
    } else {
        (None, None)
    };
    let json = serde_json::json!({
        "schema_version": 1,
        "dims": dims,
        "omegas": params.omegas(),
        "valid_per_mode": validity,
        "valid": valid,
        "ratio_v1": ratio_v1,
        "ratio_v2": ratio_v2,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&json).expect("valid json")
    );
    Ok(())
}

fn cmd_verify() -> Result<(), CliError> {
    use sbr1_core::oracle::{oracle_lambda_max, oracle_sphere_l1, oracle_xi};
    use sbr1_core::sparsify::{sphere_l1_maximize, xi_lower_bound};
    use sbr1_core::Matrix;

    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        if ok {
            eprintln!("ok: {name}");
        } else {
            eprintln!("FAIL: {name}");
            failures += 1;
        }
    };

    // closed-form sphere maximizer vs subgradient search
    let mut state = 0xC0FFEEu64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let mut sphere_ok = true;
    for trial in 0..25u64 {
        let n = 2 + (trial as usize % 5);
        let a: Vec<f64> = (0..n).map(|_| next()).collect();
        if a.iter().all(|v| *v == 0.0) {
            continue;
        }
        let closed = sphere_l1_maximize(&a, 0.3).map_err(CliError::from)?.value;
        let searched = oracle_sphere_l1(&a, 0.3, 100, trial).value;
        sphere_ok &= closed >= searched - 1e-6 && closed <= searched + 1e-9;
    }
    check(
        "sphere-l1 closed form matches multi-start search",
        sphere_ok,
    );

    // flat-vector bound vs support enumeration
    let mut xi_ok = true;
    for n in 2..=30usize {
        let omega = 0.7 / (n as f64).sqrt();
        let bound = xi_lower_bound(n, omega).map_err(CliError::from)?;
        xi_ok &= (oracle_xi(n, omega) - bound).abs() <= 1e-12;
    }
    check("flat-vector bound matches support enumeration", xi_ok);

    // power iteration vs Jacobi
    let data: Vec<f64> = (0..8 * 12).map(|_| next()).collect();
    let m = Matrix::new(8, 12, data).map_err(CliError::from)?;
    let sigma = sbr1_core::leading_singular_pair(&m, 1e-12, 20000)
        .map_err(CliError::from)?
        .sigma;
    let reference = oracle_lambda_max(&m);
    check(
        "power iteration matches Jacobi eigensolver",
        (sigma - reference).abs() <= 1e-8 * reference,
    );

    // fast multilinear vs nested-loop summation
    let t = generate_instance(&InstanceSpec {
        shape: vec![3, 4, 5],
        num_terms: 3,
        sparsity_ratio: 0.3,
        seed: 9,
    })
    .map_err(CliError::from)?
    .tensor;
    let xs: Vec<Vec<f64>> = t
        .shape()
        .iter()
        .map(|&n| {
            let v: Vec<f64> = (0..n).map(|_| next()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    let fast = t.multilinear_value(&xs).map_err(CliError::from)?;
    let slow = sbr1_core::oracle::oracle_multilinear(&t, &xs);
    check(
        "contraction chain matches nested-loop summation",
        (fast - slow).abs() <= 1e-12 * slow.abs().max(1.0),
    );

    if failures > 0 {
        Err(CliError::numeric(format!(
            "{failures} self-check(s) failed"
        )))
    } else {
        Ok(())
    }
}

fn load_tensor(input: &InputArgs) -> Result<DenseTensor, CliError> {
    match (&input.input, &input.gen) {
        (Some(path), None) => Ok(tensor_io::read_path(path)?),
        (None, Some(spec)) => {
            let spec = parse_gen_spec(spec)?;
            Ok(generate_instance(&spec)?.tensor)
        }
        _ => Err(CliError::validation(
            "exactly one of --input and --gen is required",
        )),
    }
}

fn parse_gen_spec(s: &str) -> Result<InstanceSpec, CliError> {
    let mut d: Option<usize> = None;
    let mut n: Option<usize> = None;
    let mut dims: Option<Vec<usize>> = None;
    let mut terms = 10usize;
    let mut sr = 0.7f64;
    let mut seed = 1u64;
    for part in s.split(',').filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::validation(format!("bad generator field '{part}'")))?;
        let invalid = |e: &dyn std::fmt::Display| {
            CliError::validation(format!("generator field '{key}': {e}"))
        };
        match key.trim() {
            "d" => d = Some(value.parse().map_err(|e| invalid(&e))?),
            "n" => n = Some(value.parse().map_err(|e| invalid(&e))?),
            "dims" => {
                let parsed: Result<Vec<usize>, _> = value.split('x').map(|v| v.parse()).collect();
                dims = Some(parsed.map_err(|e| invalid(&e))?);
            }
            "terms" => terms = value.parse().map_err(|e| invalid(&e))?,
            "sr" => sr = value.parse().map_err(|e| invalid(&e))?,
            "seed" => seed = value.parse().map_err(|e| invalid(&e))?,
            other => {
                return Err(CliError::validation(format!(
                    "unknown generator field '{other}'"
                )))
            }
        }
    }
    let shape = match (dims, d, n) {
        (Some(dims), _, _) => dims,
        (None, Some(d), Some(n)) => vec![n; d],
        _ => {
            return Err(CliError::validation(
                "generator spec needs dims=AxBxC or both d= and n=",
            ))
        }
    };
    Ok(InstanceSpec {
        shape,
        num_terms: terms,
        sparsity_ratio: sr,
        seed,
    })
}

fn parse_omegas(s: &str, shape: &[usize]) -> Result<RegParams, CliError> {
    if s == "default" {
        return Ok(RegParams::default_rule(shape));
    }
    let values = parse_f64_list(s, "omega")?;
    if values.len() != shape.len() {
        return Err(CliError::validation(format!(
            "{} omega values for an order-{} tensor",
            values.len(),
            shape.len()
        )));
    }
    Ok(RegParams::new(values)?)
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| CliError::validation(format!("{what} value '{p}': {e}")))
        })
        .collect()
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|e| CliError::validation(format!("{what} value '{p}': {e}")))
        })
        .collect()
}

fn annotate(json: &mut serde_json::Value, tensor: &DenseTensor, params: &RegParams) {
    if let Some(obj) = json.as_object_mut() {
        obj.insert("schema_version".into(), 1.into());
        obj.insert(
            "shape".into(),
            serde_json::to_value(tensor.shape()).expect("shape"),
        );
        obj.insert(
            "omegas".into(),
            serde_json::to_value(params.omegas()).expect("omegas"),
        );
    }
}

fn write_output(out: &str, payload: &str) -> Result<(), CliError> {
    if out == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(payload.as_bytes())?;
        stdout.write_all(b"\n")?;
    } else {
        std::fs::write(out, format!("{payload}\n"))?;
        eprintln!("wrote {out}");
    }
    Ok(())
}

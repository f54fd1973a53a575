//! Command-line front end.
//!
//! Subcommands: `gen` (planted dataset to JSON), `solve` (PGD on a dataset
//! file, trace to CSV), `width` (n0 estimates as JSON), `sweep` / `rate`
//! (config-driven experiments), `verify` (concentration checks).
//!
//! Exit codes: 0 success, 1 gated-check failure, 2 configuration error,
//! 3 numerical divergence.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use relufit::constraint::{ConstraintKind, ConstraintSpec, LevelPolicy, RadiusPolicy};
use relufit::error::{Error, Result};
use relufit::geometry::{
    estimate_width_mc, minimal_samples, DescentConeDescriptor, WidthMethod,
};
use relufit::harness::{run_rate_experiment, run_sweep, SweepConfig};
use relufit::model::{make_planted, Dataset, DatasetJson, PlantedSpec, Structure};
use relufit::solver::{solve, SolveConfig};
use relufit::verifier::{
    check_cross_term, check_first_iteration_with, check_key_inequality,
    check_restricted_isometry, check_weighted_isometry, CheckReport, FirstIterateConstraint,
};

#[derive(Parser)]
#[command(name = "relufit", version, about = "Planted-ReLU recovery experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a planted dataset and write it as JSON.
    Gen {
        #[arg(long)]
        d: usize,
        /// Number of nonzeros of w*; omit for a dense planted vector.
        #[arg(long)]
        sparsity: Option<usize>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        norm: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run projected gradient descent on a dataset file.
    Solve {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "none")]
        constraint: String,
        /// "auto" (natural radius from w*) or an explicit positive number.
        #[arg(long, default_value = "auto")]
        radius: String,
        /// Sparsity level for --constraint sparsity; defaults to auto.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long = "trace-out")]
        trace_out: Option<PathBuf>,
    },
    /// Estimate the minimal-sample quantity n0 for a cone.
    Width {
        #[arg(long)]
        d: usize,
        /// Structural dimension: sparsity for l1, subspace dimension for
        /// subspace; ignored for kind none.
        #[arg(long)]
        sparsity: Option<usize>,
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Run a phase-transition sweep from a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-iteration error statistics at a single n (config like sweep with
    /// a one-entry grid).
    Rate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an empirical concentration check.
    Verify {
        /// One of ri | cross | weighted | first-iter | key-ineq.
        #[arg(long)]
        check: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Gen {
            d,
            sparsity,
            n,
            seed,
            norm,
            out,
        } => {
            let structure = match sparsity {
                Some(s) => Structure::Sparse(s),
                None => Structure::Dense,
            };
            let spec = PlantedSpec {
                d,
                structure,
                norm,
                seed,
            };
            let w_star = make_planted(&spec).map_err(into_config)?;
            let data = Dataset::generate(&w_star, n, seed)?;
            fs::write(&out, serde_json::to_string(&data.to_json(Some(&w_star)))?)?;
            println!(
                "{}",
                json!({"d": d, "n": n, "seed": seed, "out": out.display().to_string()})
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Solve {
            data,
            constraint,
            radius,
            k,
            iters,
            step,
            trace_out,
        } => {
            let text = fs::read_to_string(&data)?;
            let parsed: DatasetJson = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("dataset {}: {e}", data.display())))?;
            let (dataset, w_star) = parsed.into_dataset().map_err(into_config)?;
            let kind: ConstraintKind = constraint.parse()?;
            let spec = ConstraintSpec {
                kind,
                radius: parse_radius(&radius)?,
                k: match k {
                    Some(v) => LevelPolicy::Fixed(v),
                    None => LevelPolicy::Auto,
                },
            };
            let set = spec.resolve(w_star.as_ref()).map_err(into_config)?;
            let cfg = SolveConfig {
                max_iters: iters,
                step_size: step,
                ..SolveConfig::default()
            };
            let (w, trace) = solve(&dataset, &set, &cfg, w_star.as_ref())?;
            if let Some(path) = trace_out {
                fs::write(&path, trace.to_csv())?;
            }
            println!(
                "{}",
                json!({
                    "iters_run": trace.iters_run(),
                    "converged_at": trace.converged_at,
                    "final_loss": trace.losses.last(),
                    "final_rel_err": trace.final_rel_err(),
                    "solution_norm_l2": w.norm_l2(),
                })
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Width {
            d,
            sparsity,
            kind,
            samples,
            seed,
        } => {
            let (cone, s) = match kind.as_str() {
                "none" => (DescentConeDescriptor::full(d), d),
                "subspace" => {
                    let k = sparsity.ok_or_else(|| {
                        Error::Config("--sparsity is required for kind subspace".into())
                    })?;
                    (DescentConeDescriptor::subspace(d, k).map_err(into_config)?, k)
                }
                "l1" => {
                    let s = sparsity.ok_or_else(|| {
                        Error::Config("--sparsity is required for kind l1".into())
                    })?;
                    (DescentConeDescriptor::l1_canonical(d, s).map_err(into_config)?, s)
                }
                other => {
                    return Err(Error::Config(format!(
                        "unknown width kind {other:?}; expected l1|subspace|none"
                    )))
                }
            };
            let est = estimate_width_mc(&cone, samples, seed).map_err(into_config)?;
            let n0 = minimal_samples(&cone, WidthMethod::Auto)?;
            println!(
                "{}",
                json!({
                    "d": d,
                    "s": s,
                    "kind": kind,
                    "n0": n0,
                    "omega_sq_mc": est.omega_sq_mc,
                    "stderr": est.stderr,
                    "omega_sq_analytic": est.omega_sq_analytic,
                    "num_samples": est.num_samples,
                    "seed": est.seed,
                })
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep { config, out } => {
            let cfg = read_sweep_config(&config)?;
            let result = run_sweep(&cfg)?;
            fs::write(&out, result.to_csv())?;
            let json_path = out.with_extension("json");
            fs::write(&json_path, serde_json::to_string_pretty(&result.to_json())?)?;
            println!(
                "{}",
                json!({
                    "n0": result.n0,
                    "grid": result.resolved_grid,
                    "success_fractions": result.success_fractions(),
                    "out": out.display().to_string(),
                    "json_out": json_path.display().to_string(),
                })
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Rate { config, out } => {
            let cfg = read_sweep_config(&config)?;
            let table = run_rate_experiment(&cfg)?;
            fs::write(&out, table.to_csv())?;
            let json_path = out.with_extension("json");
            fs::write(&json_path, serde_json::to_string_pretty(&table.to_json())?)?;
            println!(
                "{}",
                json!({
                    "n": table.n,
                    "n0": table.n0,
                    "frac_contraction_le_half": table.frac_contraction_le_half,
                    "out": out.display().to_string(),
                })
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { check, config, out } => {
            let text = fs::read_to_string(&config)?;
            let vc: VerifyConfig = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("verify config {}: {e}", config.display())))?;
            let report = run_verify(&check, &vc)?;
            fs::write(&out, serde_json::to_string_pretty(&report)?)?;
            println!(
                "{}",
                json!({
                    "check": report.check_name,
                    "pass": report.pass,
                    "gated": report.gated,
                    "violations": report.violations,
                    "trials": report.trials,
                    "max_observed": report.max_observed,
                    "out": out.display().to_string(),
                })
            );
            if report.gated && !report.pass {
                Ok(ExitCode::from(1))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
    }
}

fn read_sweep_config(path: &PathBuf) -> Result<SweepConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    SweepConfig::from_json(&text)
}

fn parse_radius(text: &str) -> Result<RadiusPolicy> {
    if text == "auto" {
        return Ok(RadiusPolicy::Auto);
    }
    let value: f64 = text
        .parse()
        .map_err(|_| Error::Config(format!("--radius must be \"auto\" or a number, got {text:?}")))?;
    if value > 0.0 && value.is_finite() {
        Ok(RadiusPolicy::Fixed(value))
    } else {
        Err(Error::Config(format!("--radius must be positive, got {value}")))
    }
}

/// Map validation-style errors to configuration errors for exit-code 2.
fn into_config(e: Error) -> Error {
    match e {
        Error::InvalidSpec(m) | Error::InvalidParameter(m) | Error::ZeroVector(m) => {
            Error::Config(m)
        }
        other => other,
    }
}

/// Config file for `verify`; field requirements depend on the check.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyConfig {
    /// Cone family for ri/cross/weighted: "subspace" or "l1".
    kind: Option<String>,
    d: usize,
    /// Subspace dimension (kind subspace).
    k: Option<usize>,
    /// Sparsity (kind l1 and the first-iter / key-ineq checks).
    s: Option<usize>,
    n: Option<usize>,
    delta: Option<f64>,
    trials: usize,
    seed: u64,
    /// Per-sample weights for the weighted check; its n is their count.
    s_weights: Option<Vec<f64>>,
    /// "none" runs first-iter without a constraint (exploratory).
    constraint: Option<String>,
}

impl VerifyConfig {
    fn cone(&self) -> Result<DescentConeDescriptor> {
        match self.kind.as_deref() {
            Some("subspace") => {
                let k = self
                    .k
                    .ok_or_else(|| Error::Config("field \"k\" is required for kind subspace".into()))?;
                DescentConeDescriptor::subspace(self.d, k).map_err(into_config)
            }
            Some("l1") => {
                let s = self
                    .s
                    .ok_or_else(|| Error::Config("field \"s\" is required for kind l1".into()))?;
                DescentConeDescriptor::l1_canonical(self.d, s).map_err(into_config)
            }
            Some(other) => Err(Error::Config(format!(
                "unknown cone kind {other:?}; expected subspace|l1"
            ))),
            None => Err(Error::Config(
                "field \"kind\" is required for this check".into(),
            )),
        }
    }

    fn need_n(&self) -> Result<usize> {
        self.n
            .ok_or_else(|| Error::Config("field \"n\" is required".into()))
    }

    fn need_delta(&self) -> Result<f64> {
        self.delta
            .ok_or_else(|| Error::Config("field \"delta\" is required".into()))
    }

    fn need_s(&self) -> Result<usize> {
        self.s
            .ok_or_else(|| Error::Config("field \"s\" is required".into()))
    }
}

fn run_verify(check: &str, vc: &VerifyConfig) -> Result<CheckReport> {
    match check {
        "ri" => check_restricted_isometry(
            &vc.cone()?,
            vc.need_n()?,
            vc.need_delta()?,
            vc.trials,
            vc.seed,
        ),
        "cross" => check_cross_term(
            &vc.cone()?,
            vc.need_n()?,
            vc.need_delta()?,
            vc.trials,
            vc.seed,
        ),
        "weighted" => {
            let weights = vc.s_weights.as_ref().ok_or_else(|| {
                Error::Config("field \"s_weights\" is required for the weighted check".into())
            })?;
            check_weighted_isometry(weights, &vc.cone()?, vc.need_delta()?, vc.trials, vc.seed)
        }
        "first-iter" => {
            let kind = match vc.constraint.as_deref() {
                None | Some("l1") => FirstIterateConstraint::L1Natural,
                Some("none") => FirstIterateConstraint::Unconstrained,
                Some(other) => {
                    return Err(Error::Config(format!(
                        "first-iter constraint must be l1 or none, got {other:?}"
                    )))
                }
            };
            check_first_iteration_with(kind, vc.d, vc.need_s()?, vc.need_n()?, vc.trials, vc.seed)
        }
        "key-ineq" => {
            check_key_inequality(vc.d, vc.need_s()?, vc.need_n()?, vc.trials, vc.seed)
        }
        other => Err(Error::Config(format!(
            "unknown check {other:?}; expected ri|cross|weighted|first-iter|key-ineq"
        ))),
    }
}

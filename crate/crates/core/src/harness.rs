//! Sweep and rate-experiment orchestration.
//!
//! A sweep runs `generate -> solve -> record` over a grid of sample counts
//! and seeds, resolving `n0` once per `(d, structure, constraint)` so the
//! grid can be written as multiples of `ceil(n0)` (`"x0.5"`, `"x2"`, ...).
//! Runs fan out across a worker pool keyed by `(n, seed)` and are emitted in
//! deterministic `(n, seed)` order regardless of completion order, so the
//! CSV output is byte-for-byte reproducible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::constraint::ConstraintSpec;
use crate::error::{Error, Result};
use crate::geometry::{minimal_samples, DescentConeDescriptor, WidthMethod};
use crate::model::{make_planted, Dataset, PlantedSpec, Structure};
use crate::solver::{measure_contraction, solve, SolveConfig};

fn default_max_iters() -> usize {
    100
}

fn default_success_rel_err() -> f64 {
    1e-3
}

fn default_norm() -> f64 {
    1.0
}

/// Sweep description as read from a JSON config file. Unknown fields are an
/// error.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub d: usize,
    pub structure: Structure,
    pub constraint: ConstraintSpec,
    /// Literal sample counts or `"x<mult>"` multiples of `ceil(n0)`.
    pub n_grid: Vec<NGridEntry>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_success_rel_err")]
    pub success_rel_err: f64,
    /// Planted-vector norm; the guarantee is scale-free, so experiments
    /// default to 1.
    #[serde(default = "default_norm")]
    pub norm: f64,
}

/// One grid entry: an explicit `n` or a multiplier of `ceil(n0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub enum NGridEntry {
    Count(usize),
    Multiple(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GridRepr {
    Count(u64),
    Text(String),
}

impl TryFrom<GridRepr> for NGridEntry {
    type Error = String;

    fn try_from(raw: GridRepr) -> std::result::Result<Self, String> {
        match raw {
            GridRepr::Count(c) if c >= 1 => Ok(NGridEntry::Count(c as usize)),
            GridRepr::Count(c) => Err(format!("n_grid entries must be >= 1, got {c}")),
            GridRepr::Text(s) => {
                let mult: f64 = s
                    .strip_prefix('x')
                    .ok_or_else(|| format!("n_grid entry {s:?} must look like \"x2\""))?
                    .parse()
                    .map_err(|_| format!("cannot parse multiplier in {s:?}"))?;
                if mult > 0.0 && mult.is_finite() {
                    Ok(NGridEntry::Multiple(mult))
                } else {
                    Err(format!("multiplier in {s:?} must be positive"))
                }
            }
        }
    }
}

impl From<NGridEntry> for GridRepr {
    fn from(e: NGridEntry) -> Self {
        match e {
            NGridEntry::Count(c) => GridRepr::Count(c as u64),
            NGridEntry::Multiple(m) => GridRepr::Text(format!("x{m}")),
        }
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("sweep config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("d must be >= 1".into()));
        }
        if let Structure::Sparse(s) = self.structure {
            if s == 0 || s > self.d {
                return Err(Error::Config(format!(
                    "structure sparsity {s} must satisfy 1 <= s <= d = {}",
                    self.d
                )));
            }
        }
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid must be nonempty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must be nonempty".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if self.success_rel_err.is_nan() || self.success_rel_err <= 0.0 {
            return Err(Error::Config("success_rel_err must be positive".into()));
        }
        if self.norm.is_nan() || self.norm <= 0.0 {
            return Err(Error::Config("norm must be positive".into()));
        }
        Ok(())
    }

    pub fn structural_dim(&self) -> usize {
        match self.structure {
            Structure::Dense => self.d,
            Structure::Sparse(s) => s,
        }
    }

    /// `n0` for this `(d, structure, constraint)` family, resolved once.
    pub fn resolve_n0(&self) -> Result<f64> {
        let spec = PlantedSpec {
            d: self.d,
            structure: self.structure,
            norm: self.norm,
            seed: 0,
        };
        let anchor = make_planted(&spec)?;
        let set = self.constraint.resolve(Some(&anchor))?;
        let cone = DescentConeDescriptor::from_constraint(&set, &anchor)?;
        minimal_samples(&cone, WidthMethod::Auto)
    }

    /// Grid entries against `ceil(n0)`; must come out strictly increasing.
    pub fn resolve_grid(&self, n0: f64) -> Result<Vec<usize>> {
        let base = n0.ceil();
        let resolved: Vec<usize> = self
            .n_grid
            .iter()
            .map(|e| match *e {
                NGridEntry::Count(c) => c,
                NGridEntry::Multiple(m) => (m * base).ceil() as usize,
            })
            .collect();
        if resolved.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "resolved n_grid {resolved:?} must be strictly increasing"
            )));
        }
        Ok(resolved)
    }
}

/// One `(n, seed)` run of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub d: usize,
    pub s: usize,
    pub n: usize,
    pub n0: f64,
    pub constraint: String,
    pub iters_run: usize,
    /// Infinite when the run diverged (non-finite iterate).
    pub final_rel_err: f64,
    pub success: bool,
    pub contraction_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub n0: f64,
    pub resolved_grid: Vec<usize>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Canonical CSV: one row per run, `(n, seed)` order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "seed,d,s,n,n0,constraint,iters_run,final_rel_err,success,contraction_max\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.seed,
                r.d,
                r.s,
                r.n,
                r.n0,
                r.constraint,
                r.iters_run,
                r.final_rel_err,
                r.success,
                r.contraction_max.map(|c| c.to_string()).unwrap_or_default()
            ));
        }
        out
    }

    /// JSON mirror of the CSV for machine consumption.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "n0": self.n0,
            "resolved_grid": self.resolved_grid,
            "rows": self.rows,
        })
    }

    /// Success fraction per grid entry, in grid order.
    pub fn success_fractions(&self) -> Vec<(usize, f64)> {
        self.resolved_grid
            .iter()
            .map(|&n| {
                let runs: Vec<&SweepRow> = self.rows.iter().filter(|r| r.n == n).collect();
                let ok = runs.iter().filter(|r| r.success).count();
                (n, ok as f64 / runs.len().max(1) as f64)
            })
            .collect()
    }
}

fn constraint_label(spec: &ConstraintSpec) -> &'static str {
    match spec.kind {
        crate::constraint::ConstraintKind::None => "none",
        crate::constraint::ConstraintKind::L1 => "l1",
        crate::constraint::ConstraintKind::L2 => "l2",
        crate::constraint::ConstraintKind::Sparsity => "sparsity",
    }
}

/// Runs the full grid. Divergent runs are recorded (infinite error, failure)
/// rather than aborting the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let n0 = cfg.resolve_n0()?;
    let resolved = cfg.resolve_grid(n0)?;
    let pairs: Vec<(usize, u64)> = resolved
        .iter()
        .flat_map(|&n| cfg.seeds.iter().map(move |&seed| (n, seed)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(n, seed)| run_one(cfg, n0, n, seed))
        .collect::<Result<Vec<SweepRow>>>()?;
    Ok(SweepResult {
        n0,
        resolved_grid: resolved,
        rows,
    })
}

fn run_one(cfg: &SweepConfig, n0: f64, n: usize, seed: u64) -> Result<SweepRow> {
    let w_star = make_planted(&PlantedSpec {
        d: cfg.d,
        structure: cfg.structure,
        norm: cfg.norm,
        seed,
    })?;
    let data = Dataset::generate(&w_star, n, seed)?;
    let set = cfg.constraint.resolve(Some(&w_star))?;
    let solve_cfg = SolveConfig {
        max_iters: cfg.max_iters,
        ..SolveConfig::default()
    };
    let (iters_run, final_rel_err, contraction_max) =
        match solve(&data, &set, &solve_cfg, Some(&w_star)) {
            Ok((_, trace)) => (
                trace.iters_run(),
                trace.final_rel_err().expect("w* known"),
                measure_contraction(&trace).ok(),
            ),
            Err(Error::NonFiniteIterate { iteration }) => (iteration, f64::INFINITY, None),
            Err(e) => return Err(e),
        };
    Ok(SweepRow {
        seed,
        d: cfg.d,
        s: cfg.structural_dim(),
        n,
        n0,
        constraint: constraint_label(&cfg.constraint).to_string(),
        iters_run,
        final_rel_err,
        success: final_rel_err <= cfg.success_rel_err,
        contraction_max,
    })
}

/// Per-iteration error statistics across seeds at a single `n`.
#[derive(Debug, Clone, Serialize)]
pub struct RateTable {
    pub n: usize,
    pub n0: f64,
    /// Rows `tau = 0..=max_iters`; converged runs hold their final error.
    pub rows: Vec<RateRow>,
    /// Fraction of seeds whose worst per-step ratio is <= 1/2.
    pub frac_contraction_le_half: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub tau: usize,
    pub mean_rel_err: f64,
    pub p95_rel_err: f64,
}

impl RateTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,mean_rel_err,p95_rel_err\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.tau, r.mean_rel_err, r.p95_rel_err));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "n": self.n,
            "n0": self.n0,
            "frac_contraction_le_half": self.frac_contraction_le_half,
            "rows": self.rows,
        })
    }
}

/// Rate experiment at a single sample count: per-iteration mean and 95th
/// percentile of the relative error across seeds, plus the fraction of runs
/// whose worst contraction ratio stays at or below 1/2.
///
/// The config's grid must resolve to exactly one `n`.
pub fn run_rate_experiment(cfg: &SweepConfig) -> Result<RateTable> {
    cfg.validate()?;
    let n0 = cfg.resolve_n0()?;
    let resolved = cfg.resolve_grid(n0)?;
    if resolved.len() != 1 {
        return Err(Error::Config(format!(
            "rate experiment needs a single n; grid resolved to {resolved:?}"
        )));
    }
    let n = resolved[0];
    let traces = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let w_star = make_planted(&PlantedSpec {
                d: cfg.d,
                structure: cfg.structure,
                norm: cfg.norm,
                seed,
            })?;
            let data = Dataset::generate(&w_star, n, seed)?;
            let set = cfg.constraint.resolve(Some(&w_star))?;
            let solve_cfg = SolveConfig {
                max_iters: cfg.max_iters,
                ..SolveConfig::default()
            };
            let (_, trace) = solve(&data, &set, &solve_cfg, Some(&w_star))?;
            Ok(trace)
        })
        .collect::<Result<Vec<_>>>()?;

    let len = cfg.max_iters + 1;
    let mut rows = Vec::with_capacity(len);
    for tau in 0..len {
        let mut errs: Vec<f64> = traces
            .iter()
            .map(|t| {
                let e = t.rel_errs.as_ref().expect("w* known");
                *e.get(tau).unwrap_or_else(|| e.last().expect("nonempty"))
            })
            .collect();
        errs.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        let idx = ((0.95 * errs.len() as f64).ceil() as usize).clamp(1, errs.len()) - 1;
        rows.push(RateRow {
            tau,
            mean_rel_err: mean,
            p95_rel_err: errs[idx],
        });
    }
    let contraction_ok = traces
        .iter()
        .filter(|t| matches!(measure_contraction(t), Ok(c) if c <= 0.5))
        .count();
    Ok(RateTable {
        n,
        n0,
        rows,
        frac_contraction_le_half: contraction_ok as f64 / traces.len() as f64,
    })
}

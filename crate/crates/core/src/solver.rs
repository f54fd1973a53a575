//! Projected gradient descent from the zero initializer.
//!
//! The iteration is `w_{t+1} = P_K(w_t - mu * g(w_t))` with `w_0 = 0`,
//! `mu = 1` by default, and `g` the chain-rule gradient of
//! [`crate::loss::descent_gradient`]. Because `g(0)` equals the generalized
//! gradient at the origin, the first update is exactly
//! `w_1 = P_K((2/n) sum_i y_i x_i)`.
//!
//! When the planted vector is known the solve stops once the relative error
//! `||w_t - w*|| / ||w*||` reaches `target_rel_err`; otherwise it stops when
//! the gradient norm falls below 1e-14. A NaN/Inf entry in any iterate aborts
//! with [`crate::Error::NonFiniteIterate`] rather than clamping: divergence
//! of under-sampled runs is data, not noise.

use serde::{Deserialize, Serialize};

use crate::constraint::ConstraintSet;
use crate::error::{Error, Result};
use crate::loss::{descent_gradient, loss};
use crate::model::{Dataset, WeightVector};

/// Gradient-norm stopping level used when the planted vector is unknown.
const GRAD_NORM_STOP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub max_iters: usize,
    /// Relative-error stopping threshold (used when `w*` is known).
    pub target_rel_err: f64,
    /// `1.0` reproduces the guaranteed setting; other values are
    /// experimental knobs.
    pub step_size: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_iters: 100,
            target_rel_err: 1e-12,
            step_size: 1.0,
        }
    }
}

/// Per-iteration record of one solve.
///
/// Index `t` of `rel_errs` / `losses` is iterate `w_t` (so entry 0 describes
/// the zero initializer). `contractions[t]` is `err_{t+1}/err_t`, recorded
/// only while `err_t` exceeds `target_rel_err`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    /// `||w_t - w*||/||w*||` per iterate; absent when `w*` was not supplied.
    /// (For the degenerate `w* = 0` the error is absolute.)
    pub rel_errs: Option<Vec<f64>>,
    pub losses: Vec<f64>,
    pub contractions: Option<Vec<Option<f64>>>,
    /// Iterate index at which a stopping rule fired, if any.
    pub converged_at: Option<usize>,
    pub target_rel_err: f64,
}

impl SolveTrace {
    pub fn iters_run(&self) -> usize {
        self.losses.len() - 1
    }

    pub fn final_rel_err(&self) -> Option<f64> {
        self.rel_errs.as_ref().and_then(|e| e.last().copied())
    }

    /// CSV with header `tau,rel_err,loss,contraction`; the contraction cell
    /// of row `tau` is `err_tau / err_{tau-1}` and is empty for `tau = 0` or
    /// when undefined.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,rel_err,loss,contraction\n");
        for tau in 0..self.losses.len() {
            let rel = self
                .rel_errs
                .as_ref()
                .map(|e| e[tau].to_string())
                .unwrap_or_default();
            let contraction = if tau == 0 {
                String::new()
            } else {
                self.contractions
                    .as_ref()
                    .and_then(|c| c[tau - 1])
                    .map(|r| r.to_string())
                    .unwrap_or_default()
            };
            out.push_str(&format!("{tau},{rel},{},{contraction}\n", self.losses[tau]));
        }
        out
    }
}

/// Runs PGD and traces convergence against `w_star` when it is known.
pub fn solve(
    data: &Dataset,
    set: &ConstraintSet,
    cfg: &SolveConfig,
    w_star: Option<&WeightVector>,
) -> Result<(WeightVector, SolveTrace)> {
    let d = data.d();
    set.validate(d)?;
    if cfg.max_iters == 0 || cfg.step_size.is_nan() || cfg.step_size <= 0.0 {
        return Err(Error::InvalidParameter(
            "max_iters must be >= 1 and step_size > 0".into(),
        ));
    }
    if let Some(ws) = w_star {
        if ws.d() != d {
            return Err(Error::DimensionMismatch(format!(
                "w* has d = {} but dataset has d = {d}",
                ws.d()
            )));
        }
    }

    let err_scale = w_star.map(|ws| {
        let norm = ws.norm_l2();
        if norm > 0.0 {
            norm
        } else {
            1.0
        }
    });
    let rel_err_of = |w: &WeightVector| {
        w_star.map(|ws| {
            let diff = (&w.0 - &ws.0).iter().map(|x| x * x).sum::<f64>().sqrt();
            diff / err_scale.expect("scale present with w*")
        })
    };

    let mut w = WeightVector::zeros(d);
    let mut rel_errs = rel_err_of(&w).map(|e| vec![e]);
    let mut losses = vec![loss(&w, data)?];
    let mut contractions = w_star.map(|_| Vec::new());
    let mut converged_at = None;
    let already_done = rel_errs
        .as_ref()
        .map(|e| e[0] <= cfg.target_rel_err)
        .unwrap_or(false);
    if already_done {
        converged_at = Some(0);
    }

    for tau in 0..cfg.max_iters {
        if converged_at.is_some() {
            break;
        }
        let g = descent_gradient(&w, data)?;
        if w_star.is_none() {
            let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if gnorm <= GRAD_NORM_STOP {
                converged_at = Some(tau);
                break;
            }
        }
        let stepped = &w.0 - &(g * cfg.step_size);
        if stepped.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteIterate { iteration: tau + 1 });
        }
        let next = set.project(&WeightVector(stepped))?;
        if !next.is_finite() {
            return Err(Error::NonFiniteIterate { iteration: tau + 1 });
        }
        let prev_err = rel_errs.as_ref().map(|e| *e.last().expect("nonempty"));
        w = next;
        losses.push(loss(&w, data)?);
        let err_now = rel_err_of(&w);
        if let (Some(errs), Some(e)) = (rel_errs.as_mut(), err_now) {
            errs.push(e);
        }
        if let (Some(c), Some(prev)) = (contractions.as_mut(), prev_err) {
            let e = err_now.expect("rel err tracked with w*");
            c.push(if prev > cfg.target_rel_err {
                Some(e / prev)
            } else {
                None
            });
        }
        if let Some(e) = err_now {
            if e <= cfg.target_rel_err {
                converged_at = Some(tau + 1);
                break;
            }
        }
    }

    let trace = SolveTrace {
        rel_errs,
        losses,
        contractions,
        converged_at,
        target_rel_err: cfg.target_rel_err,
    };
    Ok((w, trace))
}

/// Worst per-step error ratio `err_{t+1}/err_t` over the steps where the
/// previous error still exceeded the stopping threshold.
pub fn measure_contraction(trace: &SolveTrace) -> Result<f64> {
    let errs = trace.rel_errs.as_ref().ok_or_else(|| {
        Error::InsufficientTrace("trace carries no relative errors (w* unknown)".into())
    })?;
    let mut worst: Option<f64> = None;
    for t in 0..errs.len().saturating_sub(1) {
        if errs[t] > trace.target_rel_err {
            let ratio = errs[t + 1] / errs[t];
            worst = Some(worst.map_or(ratio, |w: f64| w.max(ratio)));
        }
    }
    worst.ok_or_else(|| {
        Error::InsufficientTrace(format!(
            "need at least two error entries above {}",
            trace.target_rel_err
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_planted, PlantedSpec, Structure};

    fn trace_with(errs: Vec<f64>) -> SolveTrace {
        SolveTrace {
            losses: vec![0.0; errs.len()],
            contractions: None,
            rel_errs: Some(errs),
            converged_at: None,
            target_rel_err: 1e-12,
        }
    }

    #[test]
    fn contraction_of_constant_ratio() {
        let t = trace_with(vec![1.0, 0.5, 0.25]);
        assert_eq!(measure_contraction(&t).unwrap(), 0.5);
    }

    #[test]
    fn contraction_takes_the_worst_step() {
        let t = trace_with(vec![1.0, 0.4, 0.3]);
        assert!((measure_contraction(&t).unwrap() - 0.75).abs() <= 1e-15);
    }

    #[test]
    fn contraction_requires_enough_trace() {
        let t = trace_with(vec![1.0]);
        assert!(matches!(
            measure_contraction(&t),
            Err(Error::InsufficientTrace(_))
        ));
        let below = trace_with(vec![1e-13, 1e-14]);
        assert!(measure_contraction(&below).is_err());
    }

    #[test]
    fn zero_planted_vector_is_a_fixed_point() {
        let w_star = WeightVector::zeros(6);
        let data = Dataset::generate(&w_star, 40, 3).unwrap();
        let cfg = SolveConfig::default();
        let (w, trace) = solve(&data, &ConstraintSet::Unconstrained, &cfg, Some(&w_star)).unwrap();
        assert!(w.0.iter().all(|&x| x == 0.0));
        assert!(trace.losses.iter().all(|&l| l == 0.0));
        assert_eq!(trace.converged_at, Some(0));
    }

    #[test]
    fn first_iterate_is_projected_label_mean() {
        let w_star = make_planted(&PlantedSpec {
            d: 20,
            structure: Structure::Sparse(4),
            norm: 1.0,
            seed: 5,
        })
        .unwrap();
        let data = Dataset::generate(&w_star, 200, 6).unwrap();
        let set = ConstraintSet::natural_radius(crate::ConstraintKind::L1, &w_star).unwrap();
        let cfg = SolveConfig {
            max_iters: 1,
            ..SolveConfig::default()
        };
        let (w1, _) = solve(&data, &set, &cfg, Some(&w_star)).unwrap();

        // Oracle: project((2/n) sum y_i x_i), fixed row order.
        let mut acc = ndarray::Array1::<f64>::zeros(20);
        for i in 0..data.n() {
            acc.scaled_add(data.labels[i], &data.features.row(i));
        }
        let v = WeightVector(acc * (2.0 / data.n() as f64));
        let expected = set.project(&v).unwrap();
        assert_eq!(w1, expected);
    }

    #[test]
    fn exact_planted_point_stays_fixed() {
        let w_star = make_planted(&PlantedSpec {
            d: 12,
            structure: Structure::Sparse(3),
            norm: 1.0,
            seed: 8,
        })
        .unwrap();
        let data = Dataset::generate(&w_star, 100, 9).unwrap();
        let set = ConstraintSet::natural_radius(crate::ConstraintKind::L1, &w_star).unwrap();
        let g = descent_gradient(&w_star, &data).unwrap();
        let stepped = WeightVector(&w_star.0 - &g);
        let next = set.project(&stepped).unwrap();
        assert_eq!(next, w_star);
    }

    #[test]
    fn solves_are_deterministic() {
        let w_star = make_planted(&PlantedSpec {
            d: 30,
            structure: Structure::Sparse(5),
            norm: 1.0,
            seed: 11,
        })
        .unwrap();
        let data = Dataset::generate(&w_star, 400, 12).unwrap();
        let set = ConstraintSet::natural_radius(crate::ConstraintKind::L1, &w_star).unwrap();
        let cfg = SolveConfig::default();
        let (w_a, t_a) = solve(&data, &set, &cfg, Some(&w_star)).unwrap();
        let (w_b, t_b) = solve(&data, &set, &cfg, Some(&w_star)).unwrap();
        assert_eq!(w_a, w_b);
        assert_eq!(t_a, t_b);
    }

    #[test]
    fn iterates_stay_feasible_and_match_manual_loop() {
        let w_star = make_planted(&PlantedSpec {
            d: 25,
            structure: Structure::Sparse(4),
            norm: 1.0,
            seed: 14,
        })
        .unwrap();
        let data = Dataset::generate(&w_star, 300, 15).unwrap();
        let set = ConstraintSet::natural_radius(crate::ConstraintKind::L1, &w_star).unwrap();
        let cfg = SolveConfig {
            max_iters: 12,
            target_rel_err: 0.0,
            step_size: 1.0,
        };
        let (w_final, _) = solve(&data, &set, &cfg, Some(&w_star)).unwrap();

        let mut w = WeightVector::zeros(25);
        for _ in 0..12 {
            let g = descent_gradient(&w, &data).unwrap();
            w = set.project(&WeightVector(&w.0 - &g)).unwrap();
            assert!(set.contains(&w, 1e-9), "iterate left the feasible set");
        }
        assert_eq!(w, w_final);
    }

    #[test]
    fn initial_relative_error_is_one() {
        let w_star = make_planted(&PlantedSpec {
            d: 10,
            structure: Structure::Sparse(2),
            norm: 3.0,
            seed: 20,
        })
        .unwrap();
        let data = Dataset::generate(&w_star, 50, 21).unwrap();
        let (_, trace) = solve(
            &data,
            &ConstraintSet::Unconstrained,
            &SolveConfig::default(),
            Some(&w_star),
        )
        .unwrap();
        assert_eq!(trace.rel_errs.unwrap()[0], 1.0);
    }

    #[test]
    fn unknown_w_star_uses_gradient_stopping() {
        let w_star = WeightVector::zeros(5);
        let data = Dataset::generate(&w_star, 30, 2).unwrap();
        let (w, trace) = solve(
            &data,
            &ConstraintSet::Unconstrained,
            &SolveConfig::default(),
            None,
        )
        .unwrap();
        assert_eq!(trace.converged_at, Some(0));
        assert!(trace.rel_errs.is_none());
        assert!(w.0.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn csv_layout_is_stable() {
        let t = SolveTrace {
            rel_errs: Some(vec![1.0, 0.25]),
            losses: vec![0.5, 0.125],
            contractions: Some(vec![Some(0.25)]),
            converged_at: None,
            target_rel_err: 1e-12,
        };
        assert_eq!(t.to_csv(), "tau,rel_err,loss,contraction\n0,1,0.5,\n1,0.25,0.125,0.25\n");
    }
}

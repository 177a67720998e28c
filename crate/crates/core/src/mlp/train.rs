//! Polak-Ribière+ conjugate-gradient training with Armijo backtracking and
//! validation-based early stopping.

use serde::{Deserialize, Serialize};

use super::{loss_and_gradient_params, loss_params, MlpModel};
use crate::dataset::SampleSet;
use crate::error::{Error, Result};

/// Stop once the gradient norm falls below this.
pub const GRADIENT_TOLERANCE: f64 = 1e-10;

/// Backtracking gives up after this many shrinks.
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmijoParams {
    pub initial_step: f64,
    pub shrink: f64,
    /// Sufficient-decrease constant `c` in `f(w + a d) <= f(w) + c a g.d`.
    pub sufficient_decrease: f64,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_iters: usize,
    pub val_check_every: usize,
    pub max_val_failures: usize,
    /// Weight-initialization seed used by the pipeline.
    pub seed: u64,
    pub cg_restart_every: usize,
    pub line_search: ArmijoParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            val_check_every: 1,
            max_val_failures: 6,
            seed: 0,
            cg_restart_every: super::PARAM_COUNT,
            line_search: ArmijoParams::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ls = &self.line_search;
        let problems = [
            (
                self.val_check_every == 0,
                "val_check_every must be positive",
            ),
            (
                self.max_val_failures == 0,
                "max_val_failures must be positive",
            ),
            (
                self.cg_restart_every == 0,
                "cg_restart_every must be positive",
            ),
            (
                !(ls.initial_step.is_finite() && ls.initial_step > 0.0),
                "initial step must be positive",
            ),
            (
                !(ls.shrink > 0.0 && ls.shrink < 1.0),
                "shrink factor must lie in (0, 1)",
            ),
            (
                !(ls.sufficient_decrease > 0.0 && ls.sufficient_decrease < 1.0),
                "sufficient-decrease constant must lie in (0, 1)",
            ),
        ];
        match problems.iter().find(|(bad, _)| *bad) {
            Some((_, msg)) => Err(Error::InvalidArgument((*msg).into())),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIters,
    ValEarlyStop,
    /// Gradient norm under [`GRADIENT_TOLERANCE`], or no step along steepest
    /// descent gives a representable decrease.
    GradientConverged,
}

/// One accepted line-search step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub iteration: usize,
    pub step: f64,
    /// Directional derivative `g.d` at the start of the step.
    pub slope: f64,
    pub loss_before: f64,
    pub loss_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub iterations_run: usize,
    /// Losses of the returned (best-validation) model.
    pub final_train_loss: f64,
    pub final_val_loss: f64,
    pub best_iteration: usize,
    /// Validation loss of the last iterate, which may be worse than the
    /// returned model's.
    pub last_iterate_val_loss: f64,
    pub stop_reason: StopReason,
    /// `(iteration, train_loss, val_loss)` at every validation check.
    pub loss_history: Vec<(usize, f64, f64)>,
    #[serde(skip)]
    pub steps: Vec<StepRecord>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_finite(what: &str, iteration: usize, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Diverged(format!(
            "non-finite {what} at iteration {iteration}"
        )))
    }
}

/// Backtracks from `step` until the Armijo condition holds. Returns the
/// accepted step, trial point and its loss.
fn armijo(
    w: &[f64],
    d: &[f64],
    f0: f64,
    slope: f64,
    mut step: f64,
    ls: &ArmijoParams,
    train: &SampleSet,
) -> Option<(f64, Vec<f64>, f64)> {
    let mut trial = vec![0.0; w.len()];
    for _ in 0..=MAX_BACKTRACKS {
        for ((t, wi), di) in trial.iter_mut().zip(w).zip(d) {
            *t = wi + step * di;
        }
        let f = loss_params(&trial, train);
        // NaN compares false and counts as a rejection
        if f <= f0 + ls.sufficient_decrease * step * slope {
            return Some((step, trial, f));
        }
        step *= ls.shrink;
    }
    None
}

/// Minimizes training MSE over the 151 weights and returns the iterate with
/// the lowest validation loss.
///
/// Directions: `d0 = -g0`, then `d = -g + max(0, beta_PR) d_prev`, reset to
/// steepest descent every `cg_restart_every` iterations or whenever `d` is
/// not a descent direction. The first trial step is `initial_step` after a
/// reset and `step_prev * (g.d)_prev / (g.d)` otherwise.
pub fn train(
    model: &MlpModel,
    train_set: &SampleSet,
    val_set: &SampleSet,
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::InvalidArgument(
            "training and validation sets must be nonempty".into(),
        ));
    }
    let ls = &cfg.line_search;

    let mut w = model.params().to_vec();
    let (mut f, mut g) = loss_and_gradient_params(&w, train_set);
    check_finite("training loss", 0, &[f])?;
    check_finite("gradient", 0, &g)?;

    let mut best_val = loss_params(&w, val_set);
    check_finite("validation loss", 0, &[best_val])?;
    let mut best_w = w.clone();
    let mut best_iteration = 0;
    let mut last_val = best_val;
    let mut history = vec![(0, f, best_val)];
    let mut steps = Vec::new();

    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut since_restart = 0usize;
    let mut prev: Option<(f64, f64)> = None; // (step, slope) of the last accepted step
    let mut failures = 0usize;
    let mut iterations_run = 0usize;
    let mut stop_reason = StopReason::MaxIters;

    for it in 1..=cfg.max_iters {
        if dot(&g, &g).sqrt() < GRADIENT_TOLERANCE {
            stop_reason = StopReason::GradientConverged;
            break;
        }
        let mut slope = dot(&g, &d);
        if slope.is_nan() || slope >= 0.0 {
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
            since_restart = 0;
            prev = None;
        }
        let first_step = match prev {
            Some((step, prev_slope)) => step * prev_slope / slope,
            None => ls.initial_step,
        };

        let mut accepted = armijo(&w, &d, f, slope, first_step, ls, train_set);
        if accepted.is_none() && since_restart != 0 {
            log::debug!("iteration {it}: line search failed, restarting along -g");
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
            since_restart = 0;
            accepted = armijo(&w, &d, f, slope, ls.initial_step, ls, train_set);
        }
        let Some((step, w_new, f_new)) = accepted else {
            stop_reason = StopReason::GradientConverged;
            break;
        };

        let (f_check, g_new) = loss_and_gradient_params(&w_new, train_set);
        debug_assert_eq!(f_check.to_bits(), f_new.to_bits());
        check_finite("gradient", it, &g_new)?;
        steps.push(StepRecord {
            iteration: it,
            step,
            slope,
            loss_before: f,
            loss_after: f_new,
        });
        iterations_run = it;

        // Polak-Ribière+, with periodic restart
        let gg = dot(&g, &g);
        let beta = (dot(&g_new, &g_new) - dot(&g_new, &g)) / gg;
        since_restart += 1;
        let beta = if since_restart >= cfg.cg_restart_every {
            since_restart = 0;
            0.0
        } else {
            beta.max(0.0)
        };
        for (di, gi) in d.iter_mut().zip(&g_new) {
            *di = -gi + beta * *di;
        }
        prev = if beta == 0.0 {
            None
        } else {
            Some((step, slope))
        };
        w = w_new;
        f = f_new;
        g = g_new;

        if it % cfg.val_check_every == 0 {
            let v = loss_params(&w, val_set);
            check_finite("validation loss", it, &[v])?;
            last_val = v;
            history.push((it, f, v));
            log::debug!("iteration {it}: train {f:.6e} val {v:.6e}");
            if v < best_val {
                best_val = v;
                best_w.clone_from(&w);
                best_iteration = it;
                failures = 0;
            } else {
                failures += 1;
                if failures >= cfg.max_val_failures {
                    stop_reason = StopReason::ValEarlyStop;
                    break;
                }
            }
        }
    }
    if best_iteration != iterations_run && !iterations_run.is_multiple_of(cfg.val_check_every) {
        last_val = loss_params(&w, val_set);
    }

    let best = model.with_params(best_w);
    let report = TrainReport {
        iterations_run,
        final_train_loss: loss_params(best.params(), train_set),
        final_val_loss: best_val,
        best_iteration,
        last_iterate_val_loss: last_val,
        stop_reason,
        loss_history: history,
        steps,
    };
    log::info!(
        "training stopped after {} iterations ({:?}); best validation loss {:.6e} at iteration {}",
        report.iterations_run,
        report.stop_reason,
        report.final_val_loss,
        report.best_iteration
    );
    Ok((best, report))
}

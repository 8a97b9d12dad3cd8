//! Measure-agnostic baselines: averaged SGD on the logistic loss, and
//! plug-in threshold tuning on a validation split.

use std::time::Instant;

use crate::data::{stream, DatasetMeta, Sample};
use crate::error::{Error, Result};
use crate::eval::{metric, metric_at, Confusion, TraceExtras, TraceRecord};
use crate::measure::MeasureSpec;
use crate::model::LinearModel;

#[derive(Debug, Clone, Copy)]
pub struct SgdConfig {
    pub passes: usize,
    pub seed: u64,
    pub r_w: f64,
    pub step_scale: f64,
    pub checkpoints: usize,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig { passes: 25, seed: 0, r_w: 100.0, step_scale: 1.0, checkpoints: 50 }
    }
}

#[derive(Debug, Clone)]
pub struct SgdRun {
    pub model: LinearModel,
    pub trace: Vec<TraceRecord>,
}

/// The shared SGD loop: logistic loss, step `scale/√t`, ball projection.
/// Calls `on_checkpoint(done, elapsed_ms, w̄)` at the trace cadence and
/// returns the final averaged iterate.
fn sgd_drive(
    train: &[Sample],
    cfg: &SgdConfig,
    mut on_checkpoint: impl FnMut(u64, f64, &LinearModel) -> Result<()>,
) -> Result<LinearModel> {
    let meta = DatasetMeta::compute(train)?;
    if !(cfg.r_w > 0.0) || !(cfg.step_scale > 0.0) {
        return Err(Error::InvalidParameter("r_w and step_scale must be positive".into()));
    }
    let total = train.len().checked_mul(cfg.passes).unwrap_or(0);
    if total == 0 {
        return Err(Error::EmptyStream);
    }
    let cadence = (total / cfg.checkpoints.max(1)).max(1);
    let mut w = LinearModel::zeros(meta.dim);
    let mut w_sum = LinearModel::zeros(meta.dim);
    let start = Instant::now();
    for (done, idx) in stream(train.len(), cfg.passes, cfg.seed).enumerate() {
        let t = (done + 1) as f64;
        w_sum.add_assign(&w);
        let s = &train[idx];
        let y = f64::from(s.label);
        let margin = y * w.score(s);
        // d/dw log(1 + e^{-margin}) = -sigma(-margin) * y * x.
        let sigma = 1.0 / (1.0 + margin.exp());
        if sigma > 0.0 {
            w.axpy(cfg.step_scale / t.sqrt() * sigma * y, s);
            w.project_ball(cfg.r_w);
        }
        let done = done + 1;
        if done % cadence == 0 || done == total {
            let w_bar = w_sum.scaled(1.0 / done as f64);
            on_checkpoint(done as u64, start.elapsed().as_secs_f64() * 1e3, &w_bar)?;
        }
    }
    Ok(w_sum.scaled(1.0 / total as f64))
}

/// Plain SGD on the logistic loss; returns the averaged iterate. `measure`
/// only affects the trace metrics.
pub fn sgd_logistic(
    train: &[Sample],
    test: &[Sample],
    measure: &MeasureSpec,
    cfg: &SgdConfig,
) -> Result<SgdRun> {
    let mut trace = Vec::new();
    let model = sgd_drive(train, cfg, |done, elapsed_ms, w_bar| {
        let train_metric = metric(w_bar, train, measure)?;
        let test_metric =
            if test.is_empty() { train_metric } else { metric(w_bar, test, measure)? };
        trace.push(TraceRecord {
            t: done,
            elapsed_ms,
            train_metric,
            test_metric,
            extras: TraceExtras::Baseline { w_norm: w_bar.norm() },
        });
        Ok(())
    })?;
    Ok(SgdRun { model, trace })
}

#[derive(Debug, Clone)]
pub struct PluginRun {
    pub model: LinearModel,
    pub threshold: f64,
    pub value: f64,
    pub trace: Vec<TraceRecord>,
}

/// The plug-in baseline as a curve: the same SGD iterates, but at every
/// checkpoint the decision threshold is retuned on `tune` (falling back to
/// the training set) and the tuned metrics are recorded. The returned
/// `threshold`/`value` are tuned for the final model.
pub fn plugin_curve(
    train: &[Sample],
    tune: &[Sample],
    test: &[Sample],
    measure: &MeasureSpec,
    cfg: &SgdConfig,
) -> Result<PluginRun> {
    let tune_set = if tune.is_empty() { train } else { tune };
    let mut trace = Vec::new();
    let model = sgd_drive(train, cfg, |done, elapsed_ms, w_bar| {
        let (tau, _) = plugin_threshold(w_bar, tune_set, measure)?;
        let train_metric = metric_at(w_bar, tau, train, measure)?;
        let test_metric =
            if test.is_empty() { train_metric } else { metric_at(w_bar, tau, test, measure)? };
        trace.push(TraceRecord {
            t: done,
            elapsed_ms,
            train_metric,
            test_metric,
            extras: TraceExtras::Baseline { w_norm: w_bar.norm() },
        });
        Ok(())
    })?;
    let (threshold, value) = plugin_threshold(&model, tune_set, measure)?;
    Ok(PluginRun { model, threshold, value, trace })
}

/// Best decision threshold for `model` on `validation` under `measure`.
/// Sweeps every achievable confusion (thresholds at the distinct scores,
/// plus `min score - 1` for the all-positive rule and the untuned `0`);
/// ties resolve to the smallest threshold. Returns `(threshold, value)`.
pub fn plugin_threshold(
    model: &LinearModel,
    validation: &[Sample],
    measure: &MeasureSpec,
) -> Result<(f64, f64)> {
    if validation.is_empty() {
        return Err(Error::EmptyData("threshold tuning".into()));
    }
    let mut scored: Vec<(f64, i8)> =
        validation.iter().map(|s| (model.score(s), s.label)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n_pos = scored.iter().filter(|x| x.1 > 0).count() as u64;
    let n_neg = scored.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass("threshold tuning".into()));
    }
    let mut cands: Vec<f64> = scored.iter().map(|x| x.0).collect();
    cands.push(scored[0].0 - 1.0);
    cands.push(0.0);
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    // Ascending sweep: predictions are positive iff score > tau, so raising
    // tau past a score flips that sample to negative.
    let mut c = Confusion { tp: n_pos, fp: n_neg, tn: 0, fn_: 0 };
    let mut flip = 0usize;
    let mut best: Option<(f64, f64)> = None;
    for &tau in &cands {
        while flip < scored.len() && scored[flip].0 <= tau {
            if scored[flip].1 > 0 {
                c.tp -= 1;
                c.fn_ += 1;
            } else {
                c.fp -= 1;
                c.tn += 1;
            }
            flip += 1;
        }
        let val = measure.value(c.rates())?;
        if best.map_or(true, |(_, bv)| val > bv) {
            best = Some((tau, val));
        }
    }
    Ok(best.expect("candidate list is nonempty"))
}

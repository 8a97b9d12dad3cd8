//! Reward rates, confusion counts, and metric evaluation.

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::measure::MeasureSpec;
use crate::model::LinearModel;
use crate::reward::{raw_reward, RewardKind};

/// Class-conditional reward rates: `p` is the positive rate (TPR under the
/// 0-1 reward), `n` the negative rate (TNR).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    pub p: f64,
    pub n: f64,
}

/// Confusion counts under the tie rule `sign(0) = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn n_pos(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn n_neg(&self) -> u64 {
        self.tn + self.fp
    }

    pub fn rates(&self) -> RatePair {
        RatePair {
            p: self.tp as f64 / self.n_pos() as f64,
            n: self.tn as f64 / self.n_neg() as f64,
        }
    }
}

/// Confusion counts of `model` on `samples`, with scores exactly 0 predicted
/// negative. `threshold` shifts the decision to `score > threshold`.
pub fn confusion_at(model: &LinearModel, threshold: f64, samples: &[Sample]) -> Confusion {
    let mut c = Confusion { tp: 0, fp: 0, tn: 0, fn_: 0 };
    for s in samples {
        let predicted_pos = model.score(s) > threshold;
        match (s.label > 0, predicted_pos) {
            (true, true) => c.tp += 1,
            (true, false) => c.fn_ += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
        }
    }
    c
}

/// (TPR, TNR) of `model` on `samples` under the ZeroOne reward. Errors if
/// either class is absent.
pub fn rates(model: &LinearModel, samples: &[Sample]) -> Result<RatePair> {
    rates_at(model, 0.0, samples)
}

pub fn rates_at(model: &LinearModel, threshold: f64, samples: &[Sample]) -> Result<RatePair> {
    if samples.is_empty() {
        return Err(Error::EmptyData("cannot evaluate rates".into()));
    }
    let c = confusion_at(model, threshold, samples);
    if c.n_pos() == 0 || c.n_neg() == 0 {
        return Err(Error::SingleClass("rate evaluation".into()));
    }
    Ok(c.rates())
}

/// Per-class mean rewards of `model` on `samples` for an arbitrary reward.
/// With `clip_low`, rewards are clipped below at 0 before averaging, so the
/// result lies in [0, 1] for the catalog rewards. ZeroOne without clipping
/// reproduces [`rates`].
pub fn mean_class_rewards(
    model: &LinearModel,
    samples: &[Sample],
    reward: RewardKind,
    clip_low: bool,
) -> Result<RatePair> {
    let (mut sum_p, mut cnt_p, mut sum_n, mut cnt_n) = (0.0, 0u64, 0.0, 0u64);
    for s in samples {
        let mut r = raw_reward(reward, s.label, model.score(s));
        if clip_low {
            r = r.max(0.0);
        }
        if s.label > 0 {
            sum_p += r;
            cnt_p += 1;
        } else {
            sum_n += r;
            cnt_n += 1;
        }
    }
    if cnt_p == 0 || cnt_n == 0 {
        return Err(Error::SingleClass("reward evaluation".into()));
    }
    Ok(RatePair { p: sum_p / cnt_p as f64, n: sum_n / cnt_n as f64 })
}

/// Measure value of `model` on `samples`: ZeroOne rates composed with the
/// measure. Pseudo-linear measures use the skew frozen at construction.
pub fn metric(model: &LinearModel, samples: &[Sample], measure: &MeasureSpec) -> Result<f64> {
    measure.value(rates(model, samples)?)
}

pub fn metric_at(
    model: &LinearModel,
    threshold: f64,
    samples: &[Sample],
    measure: &MeasureSpec,
) -> Result<f64> {
    measure.value(rates_at(model, threshold, samples)?)
}

/// One checkpoint of a solver run. `t` counts consumed samples and is
/// strictly increasing within a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: u64,
    pub elapsed_ms: f64,
    pub train_metric: f64,
    pub test_metric: f64,
    pub extras: TraceExtras,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceExtras {
    Spade { alpha: f64, beta: f64, w_norm: f64 },
    Stamp { epoch: usize, level: f64, p_hat: f64, n_hat: f64 },
    Baseline { w_norm: f64 },
}

impl TraceExtras {
    fn header(&self) -> &'static str {
        match self {
            TraceExtras::Spade { .. } => "t,elapsed_ms,train_metric,test_metric,alpha,beta,w_norm",
            TraceExtras::Stamp { .. } => "epoch,t_total,elapsed_ms,v_e,P_hat,N_hat,test_metric",
            TraceExtras::Baseline { .. } => "t,elapsed_ms,train_metric,test_metric,w_norm",
        }
    }
}

/// Renders a trace as CSV. The header depends on the solver: SPADE rows are
/// `t,elapsed_ms,train_metric,test_metric,alpha,beta,w_norm`, STAMP rows are
/// `epoch,t_total,elapsed_ms,v_e,P_hat,N_hat,test_metric`, and baseline rows
/// are `t,elapsed_ms,train_metric,test_metric,w_norm`. Everything except
/// `elapsed_ms` is deterministic for a fixed seed.
pub fn trace_to_csv(records: &[TraceRecord]) -> String {
    use std::fmt::Write;
    let Some(first) = records.first() else {
        return String::new();
    };
    let mut out = String::from(first.extras.header());
    out.push('\n');
    for r in records {
        match r.extras {
            TraceExtras::Spade { alpha, beta, w_norm } => {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.t, r.elapsed_ms, r.train_metric, r.test_metric, alpha, beta, w_norm
                )
                .expect("string write");
            }
            TraceExtras::Stamp { epoch, level, p_hat, n_hat } => {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    epoch, r.t, r.elapsed_ms, level, p_hat, n_hat, r.test_metric
                )
                .expect("string write");
            }
            TraceExtras::Baseline { w_norm } => {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.t, r.elapsed_ms, r.train_metric, r.test_metric, w_norm
                )
                .expect("string write");
            }
        }
    }
    out
}

/// Drops the `elapsed_ms` column so two traces can be compared byte for
/// byte. The remaining columns are exact decimal renderings of the
/// underlying floats.
pub fn csv_without_elapsed(csv: &str) -> String {
    let mut lines = csv.lines();
    let Some(header) = lines.next() else {
        return String::new();
    };
    let drop_idx = header
        .split(',')
        .position(|c| c == "elapsed_ms")
        .expect("trace header carries elapsed_ms");
    let strip = |line: &str| -> String {
        line.split(',')
            .enumerate()
            .filter(|(i, _)| *i != drop_idx)
            .map(|(_, c)| c)
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut out = strip(header);
    out.push('\n');
    for line in lines {
        out.push_str(&strip(line));
        out.push('\n');
    }
    out
}

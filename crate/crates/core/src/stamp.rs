//! Alternating maximization for pseudo-linear performance measures, in both
//! batch (AM) and streaming (STAMP) forms.
//!
//! AM alternates between maximizing the linear valuation V(w, v) at a fixed
//! level v and resetting the level to the achieved measure value. Because
//! the measure is pseudo-linear, every such sweep contracts the gap to the
//! optimum by a factor that depends only on the measure and the reward range
//! bound m. STAMP interleaves the two phases over a single stream: an epoch
//! of SGD on the valuation followed by an epoch that re-estimates the level
//! from held-out-in-time samples.

use std::time::Instant;

use rand::Rng;

use crate::data::{stream, DatasetMeta, Sample};
use crate::error::{Error, Result};
use crate::eval::{mean_class_rewards, metric, RatePair, TraceExtras, TraceRecord};
use crate::measure::MeasureSpec;
use crate::model::LinearModel;
use crate::pseudolinear::{PseudoLinearKind, PseudoLinearMeasure};
use crate::reward::{raw_reward, subgradient_scale, RewardKind};

// ---------------------------------------------------------------------------
// Generic alternating maximization.

#[derive(Debug, Clone)]
pub struct AmOutcome<W> {
    pub model: W,
    /// Level trace `[v_0, v_1, ...]`; `levels[t]` is the value after sweep t.
    pub levels: Vec<f64>,
}

/// Alternating maximization with pluggable inner maximizer and rate oracle.
/// Runs at least one sweep and stops once a sweep improves the level by at
/// most `eps`.
pub fn am_run<W>(
    measure: &PseudoLinearMeasure,
    v0: f64,
    eps: f64,
    max_iters: usize,
    mut inner_max: impl FnMut(f64) -> Result<W>,
    mut rate_eval: impl FnMut(&W) -> Result<RatePair>,
) -> Result<AmOutcome<W>> {
    if max_iters == 0 {
        return Err(Error::InvalidParameter("am_run needs max_iters >= 1".into()));
    }
    let mut levels = vec![v0];
    let mut v = v0;
    let mut model = None;
    for _ in 0..max_iters {
        let w = inner_max(v)?;
        let v_next = measure.measure_value(rate_eval(&w)?)?;
        model = Some(w);
        levels.push(v_next);
        if v_next <= v + eps {
            break;
        }
        v = v_next;
    }
    Ok(AmOutcome { model: model.expect("max_iters >= 1"), levels })
}

// ---------------------------------------------------------------------------
// AM over an explicit finite classifier set. Used by the convergence and
// noise-stability oracles, where each "classifier" is just its rate pair.

#[derive(Debug, Clone)]
pub struct FiniteClassifierSet {
    pub points: Vec<RatePair>,
}

impl FiniteClassifierSet {
    /// Uniform random rate pairs in `[0, hi]^2`. Callers keep `hi < m` so
    /// the measure denominators stay positive.
    pub fn random<R: Rng + ?Sized>(size: usize, hi: f64, rng: &mut R) -> Self {
        let points = (0..size)
            .map(|_| RatePair { p: rng.random_range(0.0..hi), n: rng.random_range(0.0..hi) })
            .collect();
        FiniteClassifierSet { points }
    }

    /// Index maximizing V(·, v); ties resolve to the lowest index.
    pub fn valuation_argmax(&self, measure: &PseudoLinearMeasure, v: f64) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, r) in self.points.iter().enumerate() {
            let val = measure.valuation(*r, v);
            if val > best_val {
                best_val = val;
                best = i;
            }
        }
        best
    }

    /// `(argmax, max)` of the measure itself over the set.
    pub fn measure_argmax(&self, measure: &PseudoLinearMeasure) -> Result<(usize, f64)> {
        if self.points.is_empty() {
            return Err(Error::EmptyData("classifier set".into()));
        }
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, r) in self.points.iter().enumerate() {
            let val = measure.measure_value(*r)?;
            if val > best_val {
                best_val = val;
                best = i;
            }
        }
        Ok((best, best_val))
    }
}

/// Exact AM on a finite set: the inner maximizer enumerates the set.
pub fn am_on_finite(
    set: &FiniteClassifierSet,
    measure: &PseudoLinearMeasure,
    v0: f64,
    eps: f64,
    max_iters: usize,
) -> Result<AmOutcome<usize>> {
    if set.points.is_empty() {
        return Err(Error::EmptyData("classifier set".into()));
    }
    am_run(
        measure,
        v0,
        eps,
        max_iters,
        |v| Ok(set.valuation_argmax(measure, v)),
        |&i| Ok(set.points[i]),
    )
}

// ---------------------------------------------------------------------------
// Noisy AM simulation (F1-style analysis, theta = 1, m < 2).

#[derive(Debug, Clone)]
pub struct NoisyAmRun {
    /// Gaps Δ_t = F* − F(w_t), starting at Δ_0.
    pub deltas: Vec<f64>,
    /// Envelope E_t with E_0 = Δ_0 and E_{t+1} = η E_t + η' ξ_t.
    pub envelope: Vec<f64>,
    /// Noise magnitudes ξ_t = |δ_t| + ε_t / m.
    pub xi: Vec<f64>,
    pub eta: f64,
    pub eta_prime: f64,
}

/// Runs AM on a finite set with adversarial per-sweep noise: the level is
/// perturbed by `delta_seq[t]` and the inner maximizer may return any point
/// whose valuation is within `eps_seq[t]` of the maximum (the simulation
/// picks the worst such point by measure value). Restricted to F1 with
/// theta = 1 and m < 2, where the contraction constants are
/// η = 2m/(2+m) and η' = 2m/(2−m).
pub fn noisy_am_simulate(
    set: &FiniteClassifierSet,
    measure: &PseudoLinearMeasure,
    eps_seq: &[f64],
    delta_seq: &[f64],
) -> Result<NoisyAmRun> {
    let f1 = matches!(measure.kind, PseudoLinearKind::FBeta(b) if (b - 1.0).abs() < 1e-12);
    if !f1 || (measure.theta - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(
            "noisy_am_simulate covers F1 with theta = 1 only".into(),
        ));
    }
    let m = measure.m;
    if !(m > 0.0 && m < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "noisy AM constants need m in (0, 2), got {m}"
        )));
    }
    if eps_seq.len() != delta_seq.len() {
        return Err(Error::InvalidParameter("eps_seq and delta_seq lengths differ".into()));
    }
    if set.points.is_empty() {
        return Err(Error::EmptyData("classifier set".into()));
    }
    let eta = 2.0 * m / (2.0 + m);
    let eta_prime = 2.0 * m / (2.0 - m);
    let values: Vec<f64> =
        set.points.iter().map(|r| measure.measure_value(*r)).collect::<Result<_>>()?;
    let f_star = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // Adversarial start: the worst classifier in the set.
    let mut cur = (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("nonempty");
    let mut deltas = vec![f_star - values[cur]];
    let mut envelope = vec![deltas[0]];
    let mut xi = Vec::new();
    for (&eps_t, &delta_t) in eps_seq.iter().zip(delta_seq) {
        // Clamp like a real level estimator built from clipped rewards; the
        // effective perturbation only shrinks, so xi_t stays an upper bound.
        let v_noisy = (values[cur] + delta_t).clamp(0.0, m);
        let vmax = set
            .points
            .iter()
            .map(|r| measure.valuation(*r, v_noisy))
            .fold(f64::NEG_INFINITY, f64::max);
        // Worst admissible inner answer: lowest measure value among points
        // whose valuation is eps_t-close to the max.
        cur = (0..values.len())
            .filter(|&i| measure.valuation(set.points[i], v_noisy) >= vmax - eps_t - 1e-15)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .expect("argmax itself always qualifies");
        let xi_t = delta_t.abs() + eps_t / m;
        xi.push(xi_t);
        deltas.push(f_star - values[cur]);
        let e_prev = *envelope.last().expect("nonempty");
        envelope.push(eta * e_prev + eta_prime * xi_t);
    }
    Ok(NoisyAmRun { deltas, envelope, xi, eta, eta_prime })
}

// ---------------------------------------------------------------------------
// Batch AM on a dataset with a full-gradient inner maximizer.

#[derive(Debug, Clone, Copy)]
pub struct AmTrainConfig {
    /// Reward range bound m for the contraction machinery.
    pub m: f64,
    pub v0: f64,
    pub eps: f64,
    pub max_iters: usize,
    pub r_w: f64,
    /// Inner maximizer: subgradient ascent with step `inner_scale/√k`,
    /// stopped at gradient norm <= `inner_tol` or `inner_steps` iterations.
    pub inner_steps: usize,
    pub inner_scale: f64,
    pub inner_tol: f64,
    pub reward: RewardKind,
}

impl Default for AmTrainConfig {
    fn default() -> Self {
        AmTrainConfig {
            m: 1.0,
            v0: 0.0,
            eps: 1e-6,
            max_iters: 50,
            r_w: 100.0,
            inner_steps: 10_000,
            inner_scale: 1.0,
            inner_tol: 1e-6,
            reward: RewardKind::TruncatedLinear,
        }
    }
}

/// Maximizes the empirical valuation `V̂(w, v)` by projected subgradient
/// ascent, returning the iterate with the best objective seen.
fn maximize_valuation(
    train: &[Sample],
    meta: &DatasetMeta,
    measure: &PseudoLinearMeasure,
    v: f64,
    start: &LinearModel,
    cfg: &AmTrainConfig,
) -> Result<LinearModel> {
    let pos_w = measure.coeffs.pos_weight(v) / meta.p_hat;
    let neg_w = measure.coeffs.neg_weight(v) / (1.0 - meta.p_hat);
    let inv_n = 1.0 / train.len() as f64;
    let objective = |w: &LinearModel| -> Result<f64> {
        let rates = mean_class_rewards(w, train, cfg.reward, false)?;
        Ok(measure.valuation(rates, v))
    };
    let mut w = start.clone();
    let mut best = w.clone();
    let mut best_obj = objective(&w)?;
    for k in 1..=cfg.inner_steps {
        let mut grad = vec![0.0; w.dim()];
        for s in train {
            let g = subgradient_scale(cfg.reward, s.label, w.score(s));
            if g == 0.0 {
                continue;
            }
            let weight = if s.label > 0 { pos_w } else { neg_w } * g * inv_n;
            for &(i, x) in &s.features {
                grad[i as usize] += weight * x;
            }
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm <= cfg.inner_tol {
            break;
        }
        let step = cfg.inner_scale / (k as f64).sqrt();
        for (wi, gi) in w.w.iter_mut().zip(&grad) {
            *wi += step * gi;
        }
        w.project_ball(cfg.r_w);
        let obj = objective(&w)?;
        if obj > best_obj {
            best_obj = obj;
            best = w.clone();
        }
    }
    Ok(best)
}

/// Batch AM: full-gradient valuation maximization alternated with exact
/// level resets on the training rates (clipped to `[0, m]` like STAMP's
/// estimates). Returns the final model and the level trace.
pub fn am_train(
    train: &[Sample],
    kind: PseudoLinearKind,
    cfg: &AmTrainConfig,
) -> Result<(LinearModel, Vec<f64>)> {
    let meta = DatasetMeta::compute(train)?;
    let measure = PseudoLinearMeasure::new(kind, meta.theta(), cfg.m)?;
    let mut warm = LinearModel::zeros(meta.dim);
    let out = am_run(
        &measure,
        cfg.v0,
        cfg.eps,
        cfg.max_iters,
        |v| {
            let w = maximize_valuation(train, &meta, &measure, v, &warm, cfg)?;
            warm = w.clone();
            Ok(w)
        },
        |w| {
            let r = mean_class_rewards(w, train, cfg.reward, true)?;
            Ok(RatePair { p: r.p.clamp(0.0, cfg.m), n: r.n.clamp(0.0, cfg.m) })
        },
    )?;
    Ok((out.model, out.levels))
}

// ---------------------------------------------------------------------------
// STAMP: streaming AM with epoch schedules.

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// Epoch lengths `initial * 2^e`.
    Doubling { initial: usize },
    /// Epoch lengths `ceil(c * (1/eta)^(2e))`, matching the error balance in
    /// the contraction analysis for rate eta.
    Theoretical { eta: f64, c: f64 },
}

impl Schedule {
    pub fn stage_len(&self, epoch: usize) -> usize {
        match *self {
            Schedule::Doubling { initial } => {
                initial.max(1).saturating_mul(1usize.checked_shl(epoch as u32).unwrap_or(usize::MAX))
            }
            Schedule::Theoretical { eta, c } => {
                let len = c * (1.0 / eta).powi(2 * epoch as i32);
                if len >= usize::MAX as f64 {
                    usize::MAX
                } else {
                    (len.ceil() as usize).max(1)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Doubling { initial } => {
                if initial == 0 {
                    return Err(Error::InvalidParameter("doubling schedule needs initial >= 1".into()));
                }
            }
            Schedule::Theoretical { eta, c } => {
                if !(eta > 0.0 && eta < 1.0) || !(c > 0.0) {
                    return Err(Error::InvalidParameter(
                        "theoretical schedule needs eta in (0,1) and c > 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StampConfig {
    pub passes: usize,
    pub seed: u64,
    pub r_w: f64,
    /// Multiplier on the model-stage step size `1/√t`.
    pub step_scale: f64,
    pub reward: RewardKind,
    pub schedule: Schedule,
    /// Reward range bound; level estimates are clipped to `[0, m]`.
    pub m: f64,
}

impl Default for StampConfig {
    fn default() -> Self {
        StampConfig {
            passes: 25,
            seed: 0,
            r_w: 100.0,
            step_scale: 1.0,
            reward: RewardKind::TruncatedLinear,
            schedule: Schedule::Doubling { initial: 100 },
            m: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StampRun {
    pub model: LinearModel,
    pub measure: PseudoLinearMeasure,
    /// One record per completed epoch pair (model stage + level stage).
    pub trace: Vec<TraceRecord>,
    pub final_level: f64,
}

/// Streaming AM. Epoch e runs `stage_len(e)` SGD steps on the valuation at
/// the current level, then `stage_len(e)` fresh samples re-estimate the
/// class rewards of the new model and reset the level. Stops when the
/// stream (passes * n samples) is exhausted.
pub fn stamp_run(
    train: &[Sample],
    test: &[Sample],
    kind: PseudoLinearKind,
    cfg: &StampConfig,
) -> Result<StampRun> {
    let meta = DatasetMeta::compute(train)?;
    cfg.schedule.validate()?;
    if !(cfg.r_w > 0.0) || !(cfg.step_scale > 0.0) {
        return Err(Error::InvalidParameter("r_w and step_scale must be positive".into()));
    }
    let measure = PseudoLinearMeasure::new(kind, meta.theta(), cfg.m)?;
    let total = train.len().checked_mul(cfg.passes).unwrap_or(0);
    if total == 0 {
        return Err(Error::EmptyStream);
    }
    let metric_spec = MeasureSpec::PseudoLinear(measure.clone());
    let mut it = stream(train.len(), cfg.passes, cfg.seed);
    let start = Instant::now();
    let mut model = LinearModel::zeros(meta.dim);
    let mut v = 0.0;
    let mut p_est = 0.0;
    let mut n_est = 0.0;
    let mut t_total: u64 = 0;
    let mut trace = Vec::new();
    let mut epoch = 0usize;
    loop {
        let stage = cfg.schedule.stage_len(epoch);

        // Model stage: SGD on V(., v) warm-started from the previous model.
        let pos_w = measure.coeffs.pos_weight(v) / meta.p_hat;
        let neg_w = measure.coeffs.neg_weight(v) / (1.0 - meta.p_hat);
        let mut w = model.clone();
        let mut consumed = 0usize;
        while consumed < stage {
            let Some(idx) = it.next() else { break };
            consumed += 1;
            t_total += 1;
            let s = &train[idx];
            let g = subgradient_scale(cfg.reward, s.label, w.score(s));
            if g != 0.0 {
                let eta = cfg.step_scale / (consumed as f64).sqrt();
                let weight = if s.label > 0 { pos_w } else { neg_w };
                w.axpy(eta * weight * g, s);
                w.project_ball(cfg.r_w);
            }
        }
        if consumed == 0 {
            break;
        }
        model = w;

        // Level stage: estimate the new model's class rewards on fresh
        // samples, clip into [0, m], and reset the level.
        let mut sum_pos = 0.0;
        let mut sum_neg = 0.0;
        let mut seen = 0usize;
        while seen < stage {
            let Some(idx) = it.next() else { break };
            seen += 1;
            t_total += 1;
            let s = &train[idx];
            let r = raw_reward(cfg.reward, s.label, model.score(s)).max(0.0);
            if s.label > 0 {
                sum_pos += r / meta.p_hat;
            } else {
                sum_neg += r / (1.0 - meta.p_hat);
            }
        }
        if seen > 0 {
            p_est = (sum_pos / seen as f64).clamp(0.0, cfg.m);
            n_est = (sum_neg / seen as f64).clamp(0.0, cfg.m);
            v = measure.measure_value(RatePair { p: p_est, n: n_est })?;
        }

        let train_metric = metric(&model, train, &metric_spec)?;
        let test_metric =
            if test.is_empty() { train_metric } else { metric(&model, test, &metric_spec)? };
        trace.push(TraceRecord {
            t: t_total,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            train_metric,
            test_metric,
            extras: TraceExtras::Stamp { epoch, level: v, p_hat: p_est, n_hat: n_est },
        });
        epoch += 1;
        if t_total as usize >= total {
            break;
        }
    }
    Ok(StampRun { model, measure, trace, final_level: v })
}

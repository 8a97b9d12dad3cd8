//! Stochastic primal-dual ascent for concave performance measures.
//!
//! The saddle problem is `max_w min_{(α,β) ∈ A} { α·E[r⁺(w)] + β·E[r⁻(w)]
//! − Ψ*(α, β) }`. Each sample triggers one projected supergradient step on
//! the model (weighted by the matching dual variable) and one projected
//! subgradient step on the dual pair, both with step size `scale/√t`. The
//! returned model is the average of the iterates, which converges at
//! `O(1/√T)` for measures with bounded dual regions and at `Õ(T^(-1/4))`
//! for GMean under the decaying reward regularizer.

use std::time::Instant;

use crate::concave::{ConcaveKind, ConcaveMeasure, DualPoint};
use crate::data::{stream, DatasetMeta, Sample};
use crate::error::{Error, Result};
use crate::eval::{metric, TraceExtras, TraceRecord};
use crate::measure::MeasureSpec;
use crate::model::LinearModel;
use crate::reward::{raw_reward, subgradient_scale, RegSchedule, RewardKind};

#[derive(Debug, Clone, Copy)]
pub struct SpadeConfig {
    pub passes: usize,
    pub seed: u64,
    /// Model-ball radius for the radial projection Π_W.
    pub r_w: f64,
    /// Multiplier on the primal step size `1/√t`.
    pub primal_scale: f64,
    /// Multiplier on the dual step size `1/√t`.
    pub dual_scale: f64,
    pub reward: RewardKind,
    /// Reward regularizer; only meaningful for GMean, where it bounds the
    /// dual region. Forced off for the other measures.
    pub reg: RegSchedule,
    /// Number of trace checkpoints over the whole run.
    pub checkpoints: usize,
}

impl Default for SpadeConfig {
    fn default() -> Self {
        SpadeConfig {
            passes: 25,
            seed: 0,
            r_w: 100.0,
            primal_scale: 1.0,
            dual_scale: 1.0,
            reward: RewardKind::TruncatedLinear,
            reg: RegSchedule::on(),
            checkpoints: 50,
        }
    }
}

/// Mutable solver state; one [`SpadeState::step`] per stream sample.
#[derive(Debug, Clone)]
pub struct SpadeState {
    pub measure: ConcaveMeasure,
    /// Current iterate w_t.
    pub model: LinearModel,
    /// Sum of the iterates used so far (w_1 + ... + w_{t-1}).
    pub model_sum: LinearModel,
    pub dual: DualPoint,
    /// 1-based index of the next step.
    pub t: u64,
    p_hat: f64,
    reward: RewardKind,
    reg: RegSchedule,
    r_w: f64,
    primal_scale: f64,
    dual_scale: f64,
}

impl SpadeState {
    pub fn new(dim: usize, kind: ConcaveKind, p_hat: f64, cfg: &SpadeConfig) -> Result<Self> {
        if !(p_hat > 0.0 && p_hat < 1.0) {
            return Err(Error::InvalidPrior(p_hat));
        }
        if !(cfg.r_w > 0.0) || !(cfg.primal_scale > 0.0) || !(cfg.dual_scale > 0.0) {
            return Err(Error::InvalidParameter(
                "r_w, primal_scale, and dual_scale must be positive".into(),
            ));
        }
        let reg = if kind == ConcaveKind::GMean { cfg.reg } else { RegSchedule::off() };
        let measure = ConcaveMeasure::with_cap(kind, reg.dual_radius_cap(1));
        // Dual initialization: projection of (1/2, 1/2), which lies on every
        // region boundary in the catalog.
        let dual = measure.project_dual((0.5, 0.5));
        Ok(SpadeState {
            measure,
            model: LinearModel::zeros(dim),
            model_sum: LinearModel::zeros(dim),
            dual,
            t: 1,
            p_hat,
            reward: cfg.reward,
            reg,
            r_w: cfg.r_w,
            primal_scale: cfg.primal_scale,
            dual_scale: cfg.dual_scale,
        })
    }

    pub fn steps_taken(&self) -> u64 {
        self.t - 1
    }

    /// The averaged iterate `w̄ = (1/T) Σ w_t`; the zero model before any
    /// step.
    pub fn averaged_model(&self) -> LinearModel {
        let steps = self.steps_taken().max(1);
        self.model_sum.scaled(1.0 / steps as f64)
    }

    /// One primal-dual update from a single sample.
    pub fn step(&mut self, sample: &Sample) {
        let t = self.t;
        let eta = self.primal_scale / (t as f64).sqrt();
        let eta_dual = self.dual_scale / (t as f64).sqrt();
        if self.measure.kind == ConcaveKind::GMean {
            self.measure.dual_radius_cap = self.reg.dual_radius_cap(t);
        }
        self.model_sum.add_assign(&self.model);

        // Both updates read the pre-update model w_t.
        let score = self.model.score(sample);
        let g = subgradient_scale(self.reward, sample.label, score);
        // The dual coordinates descend the convex per-sample loss
        // ℓ(α, β) = α·r⁺ − Ψ*(α, β) (resp. β·r⁻ − Ψ*), so the conjugate
        // gradient enters with a plus: subtracting it instead makes (0, 0)
        // absorbing for Q-mean whenever the observed rewards vanish.
        let (ca, cb) = self.measure.conjugate_gradient(self.dual.alpha, self.dual.beta);
        let mut a = self.dual.alpha + eta_dual * ca;
        let mut b = self.dual.beta + eta_dual * cb;
        let reg_eps = self.reg.epsilon(t);
        if sample.label > 0 {
            let w_scale = eta * self.dual.alpha * g / self.p_hat;
            if w_scale != 0.0 {
                self.model.axpy(w_scale, sample);
                self.model.project_ball(self.r_w);
            }
            a -= eta_dual * (raw_reward(self.reward, sample.label, score) / self.p_hat + reg_eps);
        } else {
            let w_scale = eta * self.dual.beta * g / (1.0 - self.p_hat);
            if w_scale != 0.0 {
                self.model.axpy(w_scale, sample);
                self.model.project_ball(self.r_w);
            }
            b -= eta_dual
                * (raw_reward(self.reward, sample.label, score) / (1.0 - self.p_hat) + reg_eps);
        }
        self.dual = self.measure.project_dual((a, b));

        // Feasibility audit: every step in debug builds, every 1000th step in
        // release builds.
        if cfg!(debug_assertions) || t % 1000 == 0 {
            let n = self.model.norm();
            assert!(
                n <= self.r_w * (1.0 + 1e-9),
                "model norm {n} escaped the radius {}",
                self.r_w
            );
            assert!(
                self.measure.is_feasible(self.dual.alpha, self.dual.beta, 1e-9),
                "dual {:?} infeasible at t = {t}",
                self.dual
            );
        }
        self.t = t + 1;
    }
}

#[derive(Debug, Clone)]
pub struct SpadeRun {
    pub model: LinearModel,
    pub dual: DualPoint,
    pub trace: Vec<TraceRecord>,
}

/// Multi-pass SPADE over `train`, tracing metrics of the averaged model on
/// both splits at `cfg.checkpoints` evenly spaced points. `test` may be
/// empty, in which case the trace reuses the train metric.
pub fn spade_run(
    train: &[Sample],
    test: &[Sample],
    kind: ConcaveKind,
    cfg: &SpadeConfig,
) -> Result<SpadeRun> {
    let meta = DatasetMeta::compute(train)?;
    let total = train.len().checked_mul(cfg.passes).unwrap_or(0);
    if total == 0 {
        return Err(Error::EmptyStream);
    }
    let mut state = SpadeState::new(meta.dim, kind, meta.p_hat, cfg)?;
    let metric_spec = MeasureSpec::Concave(ConcaveMeasure::new(kind));
    let cadence = (total / cfg.checkpoints.max(1)).max(1);
    let start = Instant::now();
    let mut trace = Vec::new();
    for (done, idx) in stream(train.len(), cfg.passes, cfg.seed).enumerate() {
        state.step(&train[idx]);
        let done = done + 1;
        if done % cadence == 0 || done == total {
            let w_bar = state.averaged_model();
            let train_metric = metric(&w_bar, train, &metric_spec)?;
            let test_metric = if test.is_empty() {
                train_metric
            } else {
                metric(&w_bar, test, &metric_spec)?
            };
            trace.push(TraceRecord {
                t: done as u64,
                elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
                train_metric,
                test_metric,
                extras: TraceExtras::Spade {
                    alpha: state.dual.alpha,
                    beta: state.dual.beta,
                    w_norm: w_bar.norm(),
                },
            });
        }
    }
    Ok(SpadeRun { model: state.averaged_model(), dual: state.dual, trace })
}

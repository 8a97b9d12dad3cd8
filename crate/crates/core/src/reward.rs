//! Reward functions and the step-wise regularization schedule.
//!
//! A reward `r(y, s)` scores the margin of a prediction `s = <w, x>` against
//! the label `y ∈ {-1, +1}`. Class-normalized rewards divide by the class
//! prior so that their expectations recover the class-conditional rates:
//! `r⁺ = r·1(y=+1)/p` has `E[r⁺] = TPR` under the 0-1 reward, and likewise
//! `r⁻ = r·1(y=-1)/(1-p)` recovers TNR.

use crate::data::Sample;
use crate::model::LinearModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardKind {
    /// 1 if the prediction is correct under the tie rule `sign(0) = -1`.
    ZeroOne,
    /// `min(1, y·s)`: concave, 1-Lipschitz, and an upper-capped surrogate of
    /// the margin.
    TruncatedLinear,
}

/// `r(y, score)`.
pub fn raw_reward(kind: RewardKind, y: i8, score: f64) -> f64 {
    match kind {
        RewardKind::ZeroOne => {
            let predicted_pos = score > 0.0;
            if predicted_pos == (y > 0) {
                1.0
            } else {
                0.0
            }
        }
        RewardKind::TruncatedLinear => (f64::from(y) * score).min(1.0),
    }
}

/// Coefficient `g` such that `g·x` is a supergradient of `w -> r(y, <w, x>)`.
/// TruncatedLinear: `y` while the cap is inactive (`y·s < 1`), else 0.
/// ZeroOne is piecewise constant, so 0 everywhere.
pub fn subgradient_scale(kind: RewardKind, y: i8, score: f64) -> f64 {
    match kind {
        RewardKind::ZeroOne => 0.0,
        RewardKind::TruncatedLinear => {
            if f64::from(y) * score < 1.0 {
                f64::from(y)
            } else {
                0.0
            }
        }
    }
}

/// Supergradient of `w -> r(y, <w, x>)` as a sparse vector.
pub fn subgradient_w(kind: RewardKind, model: &LinearModel, sample: &Sample) -> Vec<(u32, f64)> {
    let g = subgradient_scale(kind, sample.label, model.score(sample));
    if g == 0.0 {
        Vec::new()
    } else {
        sample.features.iter().map(|&(i, v)| (i, g * v)).collect()
    }
}

/// The decaying reward regularizer `ε(t) = t^(-1/4)` used to keep the GMean
/// dual region bounded. Disabled, it contributes 0 and leaves the region
/// uncapped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegSchedule {
    pub enabled: bool,
}

impl RegSchedule {
    pub fn on() -> Self {
        RegSchedule { enabled: true }
    }

    pub fn off() -> Self {
        RegSchedule { enabled: false }
    }

    /// ε(t) for 1-based step index t.
    pub fn epsilon(&self, t: u64) -> f64 {
        debug_assert!(t >= 1);
        if self.enabled {
            (t as f64).powf(-0.25)
        } else {
            0.0
        }
    }

    /// Dual radius cap `√(1/ε(t))` synchronized with the regularizer.
    pub fn dual_radius_cap(&self, t: u64) -> f64 {
        if self.enabled {
            self.epsilon(t).recip().sqrt()
        } else {
            f64::INFINITY
        }
    }
}

/// Class-normalized positive reward `r⁺ = r(y, <w, x>)·1(y=+1)/p̂ + ε(t)`;
/// the regularizer is part of the reward itself, so it applies to every
/// sample regardless of label.
pub fn reward_pos(
    kind: RewardKind,
    p_hat: f64,
    model: &LinearModel,
    sample: &Sample,
    t: u64,
    sched: RegSchedule,
) -> f64 {
    let base = if sample.label > 0 {
        raw_reward(kind, sample.label, model.score(sample)) / p_hat
    } else {
        0.0
    };
    base + sched.epsilon(t)
}

/// Class-normalized negative reward `r⁻ = r(y, <w, x>)·1(y=-1)/(1-p̂) + ε(t)`.
pub fn reward_neg(
    kind: RewardKind,
    p_hat: f64,
    model: &LinearModel,
    sample: &Sample,
    t: u64,
    sched: RegSchedule,
) -> f64 {
    let base = if sample.label < 0 {
        raw_reward(kind, sample.label, model.score(sample)) / (1.0 - p_hat)
    } else {
        0.0
    };
    base + sched.epsilon(t)
}

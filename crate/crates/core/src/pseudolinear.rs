//! Pseudo-linear performance measures: ratios of affine functions of the
//! rate pair, written in the canonical form
//!
//! ```text
//!            a0 + a1·P + a2·N
//! Pf(P, N) = ----------------
//!            b0 + b1·P + b2·N
//! ```
//!
//! with the skew `theta = (1 - p) / p`. The catalog (F_beta, Jaccard,
//! Gower-Legendre) has `b0 > 0`, so dividing through by `b0` yields the
//! valuation function
//!
//! ```text
//! V(P, N, v) = c + (alpha - v*gamma)·P + (beta - v*delta)·N
//! ```
//!
//! with `c = a0/b0`, `(alpha, beta) = (a1, a2)/b0`, `(gamma, delta) =
//! (b1, b2)/b0`, which satisfies `Pf >= v  iff  V >= v` whenever the
//! denominator is positive. Alternating maximization of `V` contracts the
//! excess error at the geometric rate `(g - f) / (g + 1)`, where `[f, g]`
//! bounds `gamma·P + delta·N` over the reward box `[0, m)²`.

use crate::error::{Error, Result};
use crate::eval::{Confusion, RatePair};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PseudoLinearKind {
    FBeta(f64),
    Jaccard,
    /// Gower-Legendre with error weight sigma; sigma = 1 (plain accuracy,
    /// which is decomposable) is rejected.
    GowerLegendre(f64),
}

/// Normalized valuation coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValuationCoeffs {
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl ValuationCoeffs {
    pub fn pos_weight(&self, v: f64) -> f64 {
        self.alpha - v * self.gamma
    }

    pub fn neg_weight(&self, v: f64) -> f64 {
        self.beta - v * self.delta
    }

    pub fn value(&self, rates: RatePair, v: f64) -> f64 {
        self.c + self.pos_weight(v) * rates.p + self.neg_weight(v) * rates.n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLinearMeasure {
    pub kind: PseudoLinearKind,
    pub theta: f64,
    /// Numerator coefficients (a0, a1, a2).
    pub a: [f64; 3],
    /// Denominator coefficients (b0, b1, b2).
    pub b: [f64; 3],
    /// Reward-range bound: rates live in [0, m).
    pub m: f64,
    /// Lower bound f on `gamma·P + delta·N` over the reward box.
    pub f_lo: f64,
    /// Upper bound g on `gamma·P + delta·N` over the reward box.
    pub g_hi: f64,
    pub coeffs: ValuationCoeffs,
}

impl PseudoLinearMeasure {
    /// Builds a catalog measure. `theta > 0` is the class skew, `m` the
    /// reward bound; `m` must lie strictly inside the admissible range of the
    /// kind (for F_beta, `m < 1 + beta²/theta`). Errors if the regularity
    /// bound `f > -1` would fail.
    pub fn new(kind: PseudoLinearKind, theta: f64, m: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "skew theta = {theta} must be positive and finite"
            )));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter(format!("reward bound m = {m} must be positive")));
        }
        let (a, b, m_max): ([f64; 3], [f64; 3], f64) = match kind {
            PseudoLinearKind::FBeta(beta) => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "F_beta needs beta > 0, got {beta}"
                    )));
                }
                let b2 = beta * beta;
                (
                    [0.0, 1.0 + b2, 0.0],
                    [b2 + theta, 1.0, -theta],
                    1.0 + b2 / theta,
                )
            }
            PseudoLinearKind::Jaccard => {
                ([0.0, 1.0, 0.0], [1.0 + theta, 0.0, -theta], (1.0 + theta) / theta)
            }
            PseudoLinearKind::GowerLegendre(sigma) => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "Gower-Legendre needs sigma > 0, got {sigma}"
                    )));
                }
                if sigma == 1.0 {
                    return Err(Error::InvalidParameter(
                        "Gower-Legendre with sigma = 1 is plain accuracy, which is \
                         decomposable; use a cost-sensitive baseline instead"
                            .into(),
                    ));
                }
                let m_max = if sigma < 1.0 { f64::INFINITY } else { sigma / (sigma - 1.0) };
                (
                    [0.0, 1.0, theta],
                    [sigma * (1.0 + theta), 1.0 - sigma, theta * (1.0 - sigma)],
                    m_max,
                )
            }
        };
        if m >= m_max {
            return Err(Error::InvalidParameter(format!(
                "reward bound m = {m} outside the admissible range (0, {m_max}) for {kind:?}"
            )));
        }
        let coeffs = ValuationCoeffs {
            c: a[0] / b[0],
            alpha: a[1] / b[0],
            beta: a[2] / b[0],
            gamma: b[1] / b[0],
            delta: b[2] / b[0],
        };
        // Extreme values of the linear form gamma·P + delta·N over the
        // closed reward box, attained at corners.
        let corners = [(0.0, 0.0), (m, 0.0), (0.0, m), (m, m)];
        let mut f_lo = f64::INFINITY;
        let mut g_hi = f64::NEG_INFINITY;
        for (p, n) in corners {
            let val = coeffs.gamma * p + coeffs.delta * n;
            f_lo = f_lo.min(val);
            g_hi = g_hi.max(val);
        }
        if f_lo <= -1.0 + 1e-12 {
            return Err(Error::Regularity(format!(
                "denominator lower bound f = {f_lo} <= -1 for {kind:?} with theta {theta}, m {m}"
            )));
        }
        Ok(PseudoLinearMeasure { kind, theta, a, b, m, f_lo, g_hi, coeffs })
    }

    /// Pf(P, N). Errors if the affine denominator is not positive.
    pub fn measure_value(&self, rates: RatePair) -> Result<f64> {
        let den = self.b[0] + self.b[1] * rates.p + self.b[2] * rates.n;
        if den <= 0.0 {
            return Err(Error::DegenerateDenominator {
                what: format!("{:?}", self.kind),
                den,
            });
        }
        Ok((self.a[0] + self.a[1] * rates.p + self.a[2] * rates.n) / den)
    }

    /// Valuation V(P, N, v).
    pub fn valuation(&self, rates: RatePair, v: f64) -> f64 {
        self.coeffs.value(rates, v)
    }

    /// Contraction rate of alternating maximization when rewards lie in
    /// [0, m); lies in (0, 1) for admissible m.
    pub fn rate(&self, m: f64) -> Result<f64> {
        // Recompute bounds for the requested box so callers can query rates
        // away from the constructed m.
        let probe = PseudoLinearMeasure::new(self.kind, self.theta, m)?;
        Ok((probe.g_hi - probe.f_lo) / (probe.g_hi + 1.0))
    }

    /// The regularity interval [f, g] bounding `gamma·P + delta·N`.
    pub fn regularity_bounds(&self) -> (f64, f64) {
        (self.f_lo, self.g_hi)
    }

    /// Largest measure value over the closed reward box, used as a sanity
    /// bound on challenge levels.
    pub fn sup_over_box(&self) -> f64 {
        let corners = [(0.0, 0.0), (self.m, 0.0), (0.0, self.m), (self.m, self.m)];
        corners
            .into_iter()
            .filter_map(|(p, n)| self.measure_value(RatePair { p, n }).ok())
            .fold(0.0, f64::max)
    }
}

/// The textbook count-based form of each measure, for cross-checking the
/// canonical rate-based form: F_beta = (1+beta²)TP / ((1+beta²)TP + beta²FN
/// + FP), Jaccard = TP / (TP + FP + FN), GL = (TP + TN) / (TP + sigma(FP +
/// FN) + TN).
pub fn popular_value(kind: PseudoLinearKind, c: &Confusion) -> f64 {
    let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
    match kind {
        PseudoLinearKind::FBeta(beta) => {
            let b2 = beta * beta;
            (1.0 + b2) * tp / ((1.0 + b2) * tp + b2 * fn_ + fp)
        }
        PseudoLinearKind::Jaccard => tp / (tp + fp + fn_),
        PseudoLinearKind::GowerLegendre(sigma) => (tp + tn) / (tp + sigma * (fp + fn_) + tn),
    }
}

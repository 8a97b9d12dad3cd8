//! Measure selection shared by the CLI, solvers, and demo.

use std::fmt;
use std::str::FromStr;

use crate::concave::{ConcaveKind, ConcaveMeasure};
use crate::error::{Error, Result};
use crate::eval::RatePair;
use crate::pseudolinear::{PseudoLinearKind, PseudoLinearMeasure};

/// A parsed measure token, before any data-dependent construction.
///
/// Tokens: `min`, `hmean`, `qmean`, `gmean`, `fbeta:<beta>`, `jaccard`,
/// `gl:<sigma>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureKind {
    Concave(ConcaveKind),
    PseudoLinear(PseudoLinearKind),
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(msg);
        match s {
            "min" => Ok(MeasureKind::Concave(ConcaveKind::Min)),
            "hmean" => Ok(MeasureKind::Concave(ConcaveKind::HMean)),
            "qmean" => Ok(MeasureKind::Concave(ConcaveKind::QMean)),
            "gmean" => Ok(MeasureKind::Concave(ConcaveKind::GMean)),
            "jaccard" => Ok(MeasureKind::PseudoLinear(PseudoLinearKind::Jaccard)),
            other => {
                if let Some(beta) = other.strip_prefix("fbeta:") {
                    let beta: f64 = beta
                        .parse()
                        .map_err(|_| bad(format!("bad beta in measure token {other:?}")))?;
                    Ok(MeasureKind::PseudoLinear(PseudoLinearKind::FBeta(beta)))
                } else if let Some(sigma) = other.strip_prefix("gl:") {
                    let sigma: f64 = sigma
                        .parse()
                        .map_err(|_| bad(format!("bad sigma in measure token {other:?}")))?;
                    Ok(MeasureKind::PseudoLinear(PseudoLinearKind::GowerLegendre(sigma)))
                } else {
                    Err(bad(format!(
                        "unknown measure {other:?}; expected min, hmean, qmean, gmean, \
                         fbeta:<beta>, jaccard, or gl:<sigma>"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureKind::Concave(ConcaveKind::Min) => write!(f, "min"),
            MeasureKind::Concave(ConcaveKind::HMean) => write!(f, "hmean"),
            MeasureKind::Concave(ConcaveKind::QMean) => write!(f, "qmean"),
            MeasureKind::Concave(ConcaveKind::GMean) => write!(f, "gmean"),
            MeasureKind::PseudoLinear(PseudoLinearKind::FBeta(b)) => write!(f, "fbeta:{b}"),
            MeasureKind::PseudoLinear(PseudoLinearKind::Jaccard) => write!(f, "jaccard"),
            MeasureKind::PseudoLinear(PseudoLinearKind::GowerLegendre(s)) => write!(f, "gl:{s}"),
        }
    }
}

/// A constructed measure, ready to score rate pairs.
#[derive(Debug, Clone)]
pub enum MeasureSpec {
    Concave(ConcaveMeasure),
    PseudoLinear(PseudoLinearMeasure),
}

impl MeasureSpec {
    /// Builds a measure from a token. `theta` is the class skew `(1-p)/p`
    /// estimated on training data; it is ignored by the concave measures.
    /// `m` is the reward-range bound used by the pseudo-linear catalog.
    pub fn build(kind: MeasureKind, theta: f64, m: f64) -> Result<Self> {
        match kind {
            MeasureKind::Concave(k) => Ok(MeasureSpec::Concave(ConcaveMeasure::new(k))),
            MeasureKind::PseudoLinear(k) => Ok(MeasureSpec::PseudoLinear(
                PseudoLinearMeasure::new(k, theta, m)?,
            )),
        }
    }

    pub fn kind(&self) -> MeasureKind {
        match self {
            MeasureSpec::Concave(c) => MeasureKind::Concave(c.kind),
            MeasureSpec::PseudoLinear(p) => MeasureKind::PseudoLinear(p.kind),
        }
    }

    /// Value of the measure at an exact rate pair.
    pub fn value(&self, rates: RatePair) -> Result<f64> {
        match self {
            MeasureSpec::Concave(c) => Ok(c.link_value(rates)),
            MeasureSpec::PseudoLinear(p) => p.measure_value(rates),
        }
    }
}

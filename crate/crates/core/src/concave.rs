//! Concave performance measures of the rate pair (P, N), their concave
//! Fenchel conjugates, and exact projections onto the sufficient dual regions.
//!
//! Each measure is a concave link Ψ applied to the reward rates,
//! `Ψ*(α, β) = inf_{u,v} { αu + βv − Ψ(u, v) }` is its (concave) conjugate,
//! and the sufficient dual region A is the set where Ψ* is finite and which
//! contains the conjugate-attaining points for all rate pairs of interest:
//!
//! - `Min`:   Ψ = min(P, N),                A = { α + β = 1 } ∩ R²₊, Ψ* = 0
//! - `HMean`: Ψ = 2PN/(P+N),                A = { √α + √β ≥ √2 } ∩ R²₊ ∩ B(0, 2), Ψ* = 0
//! - `QMean`: Ψ = 1 − √(((1−P)² + (1−N)²)/2), A = { α² + β² ≤ 1/2 } ∩ R²₊, Ψ* = α + β − 1
//! - `GMean`: Ψ = √(PN),                    A = { αβ ≥ 1/4 } ∩ R²₊, Ψ* = 0,
//!   intersected with a ball whose radius tracks the reward regularizer
//!   (the region is otherwise unbounded).

use crate::eval::RatePair;

pub const FEAS_TOL: f64 = 1e-9;
const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcaveKind {
    Min,
    HMean,
    QMean,
    GMean,
}

/// A dual point produced by [`ConcaveMeasure::project_dual`]; satisfies the
/// measure's region constraints to within `FEAS_TOL`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualPoint {
    pub alpha: f64,
    pub beta: f64,
}

impl DualPoint {
    pub fn norm(&self) -> f64 {
        self.alpha.hypot(self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcaveMeasure {
    pub kind: ConcaveKind,
    /// Radius bound on the dual region. Fixed for `Min`, `HMean`, and `QMean`
    /// (√2, 2, 1/√2); for `GMean` it is `√(1/ε(t))` under the reward
    /// regularizer ε(t), or infinite when regularization is off.
    pub dual_radius_cap: f64,
}

impl ConcaveMeasure {
    pub fn new(kind: ConcaveKind) -> Self {
        let cap = match kind {
            ConcaveKind::Min => SQRT2,
            ConcaveKind::HMean => 2.0,
            ConcaveKind::QMean => 0.5f64.sqrt(),
            ConcaveKind::GMean => f64::INFINITY,
        };
        ConcaveMeasure { kind, dual_radius_cap: cap }
    }

    /// GMean with the dual region capped at `cap`; ignored by other kinds,
    /// whose regions have fixed radii.
    pub fn with_cap(kind: ConcaveKind, cap: f64) -> Self {
        let mut m = Self::new(kind);
        if kind == ConcaveKind::GMean {
            m.dual_radius_cap = cap;
        }
        m
    }

    /// Ψ(P, N). Rates must be finite; GMean requires both non-negative and
    /// HMean requires `P + N > 0` or both zero (the (0,0) value is the
    /// continuous extension 0).
    pub fn link_value(&self, rates: RatePair) -> f64 {
        let (p, n) = (rates.p, rates.n);
        debug_assert!(p.is_finite() && n.is_finite());
        match self.kind {
            ConcaveKind::Min => p.min(n),
            ConcaveKind::HMean => {
                if p == 0.0 && n == 0.0 {
                    0.0
                } else {
                    debug_assert!(p + n > 0.0);
                    2.0 * p * n / (p + n)
                }
            }
            ConcaveKind::QMean => 1.0 - (((1.0 - p).powi(2) + (1.0 - n).powi(2)) / 2.0).sqrt(),
            ConcaveKind::GMean => {
                debug_assert!(p >= 0.0 && n >= 0.0);
                (p * n).sqrt()
            }
        }
    }

    /// Ψ*(α, β) for `(α, β)` inside the dual region (it is −∞ outside).
    pub fn conjugate_value(&self, alpha: f64, beta: f64) -> f64 {
        debug_assert!(self.is_feasible(alpha, beta, 1e-6), "({alpha}, {beta}) off-region");
        match self.kind {
            ConcaveKind::Min | ConcaveKind::HMean | ConcaveKind::GMean => 0.0,
            ConcaveKind::QMean => alpha + beta - 1.0,
        }
    }

    /// ∇Ψ*(α, β) on the region: zero for the homogeneous measures, the
    /// all-ones vector for QMean.
    pub fn conjugate_gradient(&self, _alpha: f64, _beta: f64) -> (f64, f64) {
        match self.kind {
            ConcaveKind::Min | ConcaveKind::HMean | ConcaveKind::GMean => (0.0, 0.0),
            ConcaveKind::QMean => (1.0, 1.0),
        }
    }

    /// Stability modulus δ(ε) with `Ψ(u+ε, v+ε) − Ψ(u, v) ≤ δ(ε)`.
    pub fn stability(&self, eps: f64) -> f64 {
        debug_assert!(eps > 0.0 && eps <= 1.0);
        match self.kind {
            ConcaveKind::Min => eps,
            ConcaveKind::HMean => 4.0 * eps,
            ConcaveKind::QMean => eps,
            ConcaveKind::GMean => 3.0 * eps.sqrt(),
        }
    }

    pub fn is_feasible(&self, alpha: f64, beta: f64, tol: f64) -> bool {
        if !(alpha.is_finite() && beta.is_finite()) {
            return false;
        }
        let nonneg = alpha >= -tol && beta >= -tol;
        match self.kind {
            ConcaveKind::Min => nonneg && (alpha + beta - 1.0).abs() <= tol,
            ConcaveKind::HMean => {
                nonneg
                    && alpha.max(0.0).sqrt() + beta.max(0.0).sqrt() >= SQRT2 - tol
                    && alpha.hypot(beta) <= 2.0 + tol
            }
            ConcaveKind::QMean => nonneg && alpha * alpha + beta * beta <= 0.5 + tol,
            ConcaveKind::GMean => {
                nonneg
                    && alpha.max(0.0) * beta.max(0.0) >= 0.25 - tol
                    && (self.dual_radius_cap.is_infinite()
                        || alpha.hypot(beta) <= self.dual_radius_cap + tol)
            }
        }
    }

    /// Euclidean projection onto the dual region.
    pub fn project_dual(&self, raw: (f64, f64)) -> DualPoint {
        let p = match self.kind {
            ConcaveKind::Min => project_min(raw),
            ConcaveKind::HMean => project_hmean(raw),
            ConcaveKind::QMean => project_qmean(raw),
            ConcaveKind::GMean => project_gmean(raw, self.dual_radius_cap),
        };
        debug_assert!(
            self.is_feasible(p.alpha, p.beta, FEAS_TOL),
            "projection left {:?} infeasible for {:?}",
            p,
            self.kind
        );
        p
    }
}

/// Projection onto the probability simplex segment { α + β = 1, α, β ≥ 0 }.
fn project_min((x, y): (f64, f64)) -> DualPoint {
    let shift = (x + y - 1.0) / 2.0;
    let (a, b) = (x - shift, y - shift);
    if a < 0.0 {
        DualPoint { alpha: 0.0, beta: 1.0 }
    } else if b < 0.0 {
        DualPoint { alpha: 1.0, beta: 0.0 }
    } else {
        DualPoint { alpha: a, beta: b }
    }
}

/// Projection onto the quarter disk { α² + β² ≤ 1/2 } ∩ R²₊: clamp to the
/// orthant, then scale radially. Exact because the ball is centered at the
/// origin.
fn project_qmean((x, y): (f64, f64)) -> DualPoint {
    let (a, b) = (x.max(0.0), y.max(0.0));
    let r = 0.5f64.sqrt();
    let n = a.hypot(b);
    if n <= r {
        DualPoint { alpha: a, beta: b }
    } else {
        DualPoint { alpha: a * r / n, beta: b * r / n }
    }
}

/// Projection onto { √α + √β ≥ √2 } ∩ R²₊ ∩ B(0, 2).
///
/// The boundary decomposes into the arc (s², (√2−s)²) for s ∈ [0, √2], the
/// axis rays beyond (2, 0) and (0, 2) clipped by the ball, and the ball arc.
/// The projection is found by collecting the feasible candidates: the input
/// itself, stationary points of the squared distance along the arc (roots of
/// a cubic, bracketed by a scan and polished by bisection), the projections
/// onto the clipped axis rays, the radial projection onto the ball, and the
/// two corners. The closest feasible candidate wins.
fn project_hmean((x, y): (f64, f64)) -> DualPoint {
    let measure = ConcaveMeasure::new(ConcaveKind::HMean);
    if measure.is_feasible(x, y, FEAS_TOL) && x >= 0.0 && y >= 0.0 {
        return DualPoint { alpha: x, beta: y };
    }
    let mut candidates: Vec<(f64, f64)> = vec![(2.0, 0.0), (0.0, 2.0)];

    // Stationary points of D(s) = (s² − x)² + ((√2−s)² − y)² on [0, √2]:
    // D'(s)/4 = 2s³ − 3√2·s² + (6 − x − y)s + √2(y − 2).
    let cubic = |s: f64| {
        2.0 * s.powi(3) - 3.0 * SQRT2 * s * s + (6.0 - x - y) * s + SQRT2 * (y - 2.0)
    };
    for root in scan_roots(cubic, 0.0, SQRT2, 256) {
        candidates.push((root * root, (SQRT2 - root).powi(2)));
    }
    // Fallback for near-tangent cases where two roots share a scan cell:
    // refine around the best scanned arc point directly.
    let dist2 = |s: f64| {
        let (a, b) = (s * s, (SQRT2 - s).powi(2));
        (a - x).powi(2) + (b - y).powi(2)
    };
    let s = golden_min(dist2, 0.0, SQRT2, 400);
    candidates.push((s * s, (SQRT2 - s).powi(2)));

    // Axis rays { α = 0, β ∈ [2, 2] } after the ball clip degenerate to the
    // corners; the unclipped ray projections are kept and filtered below.
    candidates.push((0.0, y.max(2.0)));
    candidates.push((x.max(2.0), 0.0));
    // Radial projection onto the ball for points whose nearest feasible point
    // saturates the norm constraint.
    let (cx, cy) = (x.max(0.0), y.max(0.0));
    let n = cx.hypot(cy);
    if n > 0.0 {
        candidates.push((cx * 2.0 / n, cy * 2.0 / n));
    }

    best_candidate((x, y), &measure, &candidates)
}

/// Projection onto { αβ ≥ 1/4 } ∩ R²₊, optionally intersected with B(0, cap).
///
/// Stationary points along the hyperbola branch (t, 1/(4t)) solve the quartic
/// 16t⁴ − 16x·t³ + 4y·t − 1 = 0; they are bracketed on a log-spaced scan and
/// polished by bisection, with a golden-section fallback on the scanned
/// distance. Ball-saturated solutions are covered by the radial projection
/// and the two hyperbola-sphere intersection points.
fn project_gmean((x, y): (f64, f64), cap: f64) -> DualPoint {
    let measure = ConcaveMeasure::with_cap(ConcaveKind::GMean, cap);
    if measure.is_feasible(x, y, FEAS_TOL) && x > 0.0 && y > 0.0 {
        return DualPoint { alpha: x, beta: y };
    }
    let mut candidates: Vec<(f64, f64)> = Vec::new();

    let t_hi = 10.0 * [1.0, x.abs(), y.abs(), if cap.is_finite() { cap } else { 0.0 }]
        .into_iter()
        .fold(1.0f64, f64::max);
    let quartic = |t: f64| 16.0 * t.powi(4) - 16.0 * x * t.powi(3) + 4.0 * y * t - 1.0;
    for root in scan_roots_log(quartic, 1e-8, t_hi, 512) {
        candidates.push((root, 0.25 / root));
    }
    let dist2 = |t: f64| (t - x).powi(2) + (0.25 / t - y).powi(2);
    let t = golden_min_log(dist2, 1e-8, t_hi, 400);
    candidates.push((t, 0.25 / t));

    if cap.is_finite() {
        let (cx, cy) = (x.max(0.0), y.max(0.0));
        let n = cx.hypot(cy);
        if n > 0.0 {
            candidates.push((cx * cap / n, cy * cap / n));
        }
        // Hyperbola ∩ sphere: α + β = √(cap² + 1/2), α − β = ±√(cap² − 1/2).
        if cap * cap >= 0.5 {
            let s = (cap * cap + 0.5).sqrt();
            let d = (cap * cap - 0.5).sqrt();
            candidates.push(((s + d) / 2.0, (s - d) / 2.0));
            candidates.push(((s - d) / 2.0, (s + d) / 2.0));
        }
    }

    best_candidate((x, y), &measure, &candidates)
}

fn best_candidate(
    raw: (f64, f64),
    measure: &ConcaveMeasure,
    candidates: &[(f64, f64)],
) -> DualPoint {
    let mut best: Option<((f64, f64), f64)> = None;
    for &(a, b) in candidates {
        if !measure.is_feasible(a, b, FEAS_TOL) {
            continue;
        }
        let d = (a - raw.0).powi(2) + (b - raw.1).powi(2);
        // Near-ties keep the earlier candidate: bisected stationary points
        // precede the golden-section fallback, which localizes the flat
        // squared distance only to ~sqrt(eps).
        if best.map_or(true, |(_, bd)| d + 1e-12 * (1.0 + d) < bd) {
            best = Some(((a, b), d));
        }
    }
    let ((alpha, beta), _) = best.expect("candidate sets always contain a feasible point");
    // Snap tiny negatives introduced by arithmetic.
    DualPoint { alpha: alpha.max(0.0), beta: beta.max(0.0) }
}

/// Sign-change scan over `parts` equal subintervals of [lo, hi], with
/// bisection (≤ 100 iterations, interval width 1e-13·scale) on each bracket.
fn scan_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, parts: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev_x = lo;
    let mut prev_f = f(lo);
    if prev_f == 0.0 {
        roots.push(lo);
    }
    for i in 1..=parts {
        let x = lo + (hi - lo) * i as f64 / parts as f64;
        let fx = f(x);
        if fx == 0.0 {
            roots.push(x);
        } else if prev_f != 0.0 && prev_f.signum() != fx.signum() {
            roots.push(bisect(&f, prev_x, x));
        }
        prev_x = x;
        prev_f = fx;
    }
    roots
}

fn scan_roots_log(f: impl Fn(f64) -> f64, lo: f64, hi: f64, parts: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    scan_roots(|u| f(u.exp()), llo, lhi, parts)
        .into_iter()
        .map(f64::exp)
        .collect()
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    let scale = lo.abs().max(hi.abs()).max(1.0);
    for _ in 0..100 {
        if hi - lo <= 1e-13 * scale {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if flo.signum() == fmid.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimization; assumes a single basin matters near the
/// optimum, which holds for the boundary distance functions used here after
/// the sign-change roots are also collected.
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo < 1e-14 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min_log(f: impl Fn(f64) -> f64, lo: f64, hi: f64, iters: usize) -> f64 {
    golden_min(|u| f(u.exp()), lo.ln(), hi.ln(), iters).exp()
}

//! Brute-force reference computations: Fenchel infima over the dual
//! regions, exhaustive model search at desk scale, Dinkelbach's scalar
//! iteration, and randomized checks of the contraction and noise-stability
//! claims. Everything here trades speed for independence from the solver
//! code paths.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::concave::{ConcaveKind, ConcaveMeasure, DualPoint};
use crate::data::Sample;
use crate::error::{Error, Result};
use crate::eval::RatePair;
use crate::measure::MeasureSpec;
use crate::model::LinearModel;
use crate::pseudolinear::{PseudoLinearKind, PseudoLinearMeasure};
use crate::stamp::{am_on_finite, noisy_am_simulate, AmOutcome, FiniteClassifierSet};

// ---------------------------------------------------------------------------
// Fenchel infimum over the dual region by 1-D boundary refinement.
//
// Every Lagrangian L(α, β) = αP + βN − Ψ*(α, β) in the catalog is linear on
// its region (Ψ* is 0 or α + β − 1), so the infimum sits on the inner
// boundary curve. Each region's boundary has an explicit 1-D
// parametrization, which a two-stage grid scan minimizes.

#[derive(Debug, Clone, Copy)]
pub struct FenchelResult {
    pub value: f64,
    pub argmin: DualPoint,
}

const FENCHEL_STAGE_POINTS: usize = 201;

/// Infimum of `αP + βN − Ψ*(α, β)` over the dual region of `kind`.
/// Rates should be bounded away from zero for GMean, whose region is
/// unbounded (the scan covers `α ∈ [1/32, 8]`, enough for rates >= 0.05).
pub fn fenchel_infimum(kind: ConcaveKind, rates: RatePair) -> FenchelResult {
    let (p, n) = (rates.p, rates.n);
    // Boundary parametrizations: param s in [lo, hi] -> (alpha, beta).
    let (lo, hi, point): (f64, f64, fn(f64) -> (f64, f64)) = match kind {
        // Segment alpha + beta = 1.
        ConcaveKind::Min => (0.0, 1.0, |s| (s, 1.0 - s)),
        // Curve sqrt(alpha) + sqrt(beta) = sqrt(2): alpha = s^2.
        ConcaveKind::HMean => (0.0, std::f64::consts::SQRT_2, |s| {
            (s * s, (std::f64::consts::SQRT_2 - s).powi(2))
        }),
        // Arc alpha^2 + beta^2 = 1/2 (Psi* = alpha + beta - 1 pushes the
        // minimum outward onto the arc).
        ConcaveKind::QMean => (0.0, std::f64::consts::FRAC_PI_2, |s| {
            (s.cos() / std::f64::consts::SQRT_2, s.sin() / std::f64::consts::SQRT_2)
        }),
        // Hyperbola alpha * beta = 1/4, log-parametrized.
        ConcaveKind::GMean => ((1.0f64 / 32.0).ln(), 8.0f64.ln(), |s| {
            let a = s.exp();
            (a, 0.25 / a)
        }),
    };
    let lagrangian = |s: f64| {
        let (a, b) = point(s);
        let conj = match kind {
            ConcaveKind::QMean => a + b - 1.0,
            _ => 0.0,
        };
        a * p + b * n - conj
    };
    let scan = |lo: f64, hi: f64| -> (f64, f64) {
        let mut best_s = lo;
        let mut best_v = f64::INFINITY;
        for k in 0..FENCHEL_STAGE_POINTS {
            let s = lo + (hi - lo) * k as f64 / (FENCHEL_STAGE_POINTS - 1) as f64;
            let v = lagrangian(s);
            if v < best_v {
                best_v = v;
                best_s = s;
            }
        }
        (best_s, best_v)
    };
    let (s1, _) = scan(lo, hi);
    let spacing = (hi - lo) / (FENCHEL_STAGE_POINTS - 1) as f64;
    let (s2, v2) = scan((s1 - 3.0 * spacing).max(lo), (s1 + 3.0 * spacing).min(hi));
    let (alpha, beta) = point(s2);
    FenchelResult { value: v2, argmin: DualPoint { alpha, beta } }
}

#[derive(Debug, Clone)]
pub struct FenchelReport {
    /// (kind, max |inf - Psi|, max argmin norm) over the rate grid.
    pub rows: Vec<(ConcaveKind, f64, f64)>,
    pub max_err: f64,
    pub elapsed_ms: f64,
}

/// Compares the boundary-scan infimum against the closed-form link value on
/// an `n x n` rate grid over [0.05, 1]^2.
pub fn verify_fenchel(n: usize) -> FenchelReport {
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut max_err = 0.0f64;
    for kind in [ConcaveKind::Min, ConcaveKind::HMean, ConcaveKind::QMean, ConcaveKind::GMean] {
        let measure = ConcaveMeasure::new(kind);
        let mut err = 0.0f64;
        let mut norm = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let p = 0.05 + 0.95 * i as f64 / (n - 1).max(1) as f64;
                let nn = 0.05 + 0.95 * j as f64 / (n - 1).max(1) as f64;
                let rates = RatePair { p, n: nn };
                let got = fenchel_infimum(kind, rates);
                err = err.max((got.value - measure.link_value(rates)).abs());
                norm = norm.max(got.argmin.norm());
            }
        }
        max_err = max_err.max(err);
        rows.push((kind, err, norm));
    }
    FenchelReport { rows, max_err, elapsed_ms: start.elapsed().as_secs_f64() * 1e3 }
}

#[derive(Debug, Clone)]
pub struct Lemma1Report {
    /// (label, max argmin norm, claimed bound).
    pub rows: Vec<(String, f64, f64)>,
    pub ok: bool,
    pub elapsed_ms: f64,
}

/// Checks that Fenchel argmins stay inside the radius bounds: constants for
/// the bounded regions, and `1.1 * sqrt(1/(4 eps))` for GMean when both
/// rates are at least eps.
pub fn verify_lemma1(n: usize) -> Lemma1Report {
    let start = Instant::now();
    let mut rows = Vec::new();
    let grid_norm = |kind: ConcaveKind, lo: f64| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let p = lo + (1.0 - lo) * i as f64 / (n - 1).max(1) as f64;
                let nn = lo + (1.0 - lo) * j as f64 / (n - 1).max(1) as f64;
                worst = worst.max(fenchel_infimum(kind, RatePair { p, n: nn }).argmin.norm());
            }
        }
        worst
    };
    rows.push(("min".into(), grid_norm(ConcaveKind::Min, 0.05), std::f64::consts::SQRT_2));
    rows.push(("hmean".into(), grid_norm(ConcaveKind::HMean, 0.05), 2.0));
    rows.push(("qmean".into(), grid_norm(ConcaveKind::QMean, 0.05), std::f64::consts::FRAC_1_SQRT_2));
    for eps in [0.04f64, 0.01] {
        let bound = 1.1 * (1.0 / (4.0 * eps)).sqrt();
        rows.push((format!("gmean eps={eps}"), grid_norm(ConcaveKind::GMean, eps), bound));
    }
    let ok = rows.iter().all(|(_, norm, bound)| *norm <= bound + 1e-9);
    Lemma1Report { rows, ok, elapsed_ms: start.elapsed().as_secs_f64() * 1e3 }
}

// ---------------------------------------------------------------------------
// Randomized AM contraction and noise-stability checks.

#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub sets: usize,
    pub violations: usize,
    /// Largest observed `gap_{t+1} - rate * gap_t` (slack-free).
    pub max_excess: f64,
    pub elapsed_ms: f64,
}

fn contraction_catalog() -> Vec<PseudoLinearMeasure> {
    // F1, Jaccard, GL(0.5), GL(2) at two skews each, all with admissible
    // m = 1.
    let kinds = [
        PseudoLinearKind::FBeta(1.0),
        PseudoLinearKind::Jaccard,
        PseudoLinearKind::GowerLegendre(0.5),
        PseudoLinearKind::GowerLegendre(2.0),
    ];
    kinds
        .into_iter()
        .flat_map(|k| [1.0, 2.0].map(|th| (k, th)))
        .map(|(k, th)| PseudoLinearMeasure::new(k, th, 1.0).expect("catalog is admissible"))
        .collect()
}

/// Exact AM on random finite sets: every sweep must contract the optimality
/// gap by the closed-form rate.
pub fn verify_contraction(n_sets: usize, seed: u64) -> Result<ContractionReport> {
    let start = Instant::now();
    let catalog = contraction_catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut max_excess = f64::NEG_INFINITY;
    for i in 0..n_sets {
        let measure = &catalog[i % catalog.len()];
        let rate = measure.rate(measure.m)?;
        let set = FiniteClassifierSet::random(12, 0.95 * measure.m, &mut rng);
        let out = am_on_finite(&set, measure, 0.0, 0.0, 200)?;
        let (_, v_star) = set.measure_argmax(measure)?;
        for w in out.levels.windows(2) {
            let excess = (v_star - w[1]) - rate * (v_star - w[0]);
            max_excess = max_excess.max(excess);
            if excess > 1e-12 {
                violations += 1;
            }
        }
    }
    Ok(ContractionReport {
        sets: n_sets,
        violations,
        max_excess,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Debug, Clone)]
pub struct NoiseReport {
    pub runs: usize,
    pub violations: usize,
    pub max_excess: f64,
    pub elapsed_ms: f64,
}

/// Noisy AM against the per-sweep bound `gap_{t+1} <= eta * gap_t + eta' *
/// xi_t` and its unrolled envelope, on random sets with random decaying
/// noise sequences.
pub fn verify_noise(n_runs: usize, seed: u64) -> Result<NoiseReport> {
    let start = Instant::now();
    let measure = PseudoLinearMeasure::new(PseudoLinearKind::FBeta(1.0), 1.0, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut max_excess = f64::NEG_INFINITY;
    for _ in 0..n_runs {
        let set = FiniteClassifierSet::random(5, 0.95, &mut rng);
        let horizon = 25;
        let mut eps_seq = Vec::with_capacity(horizon);
        let mut delta_seq = Vec::with_capacity(horizon);
        for t in 0..horizon {
            let decay = 0.9f64.powi(t as i32);
            eps_seq.push(rng.random_range(0.0..0.05) * decay);
            delta_seq.push(rng.random_range(-0.05..0.05) * decay);
        }
        let run = noisy_am_simulate(&set, &measure, &eps_seq, &delta_seq)?;
        for t in 0..horizon {
            let bound = run.eta * run.deltas[t] + run.eta_prime * run.xi[t];
            let excess = run.deltas[t + 1] - bound;
            max_excess = max_excess.max(excess);
            if excess > 1e-9 {
                violations += 1;
            }
        }
        // The envelope dominates by induction from the per-step bound.
        for (d, e) in run.deltas.iter().zip(&run.envelope) {
            if *d > *e + 1e-9 {
                violations += 1;
            }
        }
    }
    Ok(NoiseReport {
        runs: n_runs,
        violations,
        max_excess,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

// ---------------------------------------------------------------------------
// Exhaustive model search over directions x thresholds.

#[derive(Debug, Clone, Copy)]
pub struct GridSearchBest {
    pub value: f64,
    pub angle: f64,
    pub threshold: f64,
    pub rates: RatePair,
}

/// Best achievable value per measure over the class `sign(cos(phi) x_0 +
/// sin(phi) x_1 - tau)` by sweeping `n_angles` directions and, for each,
/// every threshold that yields a distinct confusion (plus the untuned 0 and
/// the all-positive rule). Features beyond the first two coordinates are
/// ignored, which matches data whose third coordinate is a constant bias.
/// Ties keep the first candidate in (angle, ascending threshold) order.
pub fn grid_model_search(
    samples: &[Sample],
    measures: &[MeasureSpec],
    n_angles: usize,
) -> Result<Vec<GridSearchBest>> {
    if samples.is_empty() {
        return Err(Error::EmptyData("grid search".into()));
    }
    if n_angles == 0 {
        return Err(Error::InvalidParameter("grid search needs n_angles >= 1".into()));
    }
    let n_pos = samples.iter().filter(|s| s.label > 0).count() as u64;
    let n_neg = samples.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass("grid search".into()));
    }
    let mut best: Vec<Option<GridSearchBest>> = vec![None; measures.len()];
    let mut scored: Vec<(f64, i8)> = Vec::with_capacity(samples.len());
    for k in 0..n_angles {
        let angle = 2.0 * std::f64::consts::PI * k as f64 / n_angles as f64;
        let (dx, dy) = (angle.cos(), angle.sin());
        scored.clear();
        for s in samples {
            let mut proj = 0.0;
            for &(i, x) in &s.features {
                match i {
                    0 => proj += dx * x,
                    1 => proj += dy * x,
                    _ => {}
                }
            }
            scored.push((proj, s.label));
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cands: Vec<f64> = scored.iter().map(|x| x.0).collect();
        cands.push(scored[0].0 - 1.0);
        cands.push(0.0);
        cands.sort_by(f64::total_cmp);
        cands.dedup();
        let (mut tp, mut tn) = (n_pos, 0u64);
        let mut flip = 0usize;
        for &tau in &cands {
            while flip < scored.len() && scored[flip].0 <= tau {
                if scored[flip].1 > 0 {
                    tp -= 1;
                } else {
                    tn += 1;
                }
                flip += 1;
            }
            let rates =
                RatePair { p: tp as f64 / n_pos as f64, n: tn as f64 / n_neg as f64 };
            for (slot, measure) in best.iter_mut().zip(measures) {
                let value = measure.value(rates)?;
                if slot.map_or(true, |b| value > b.value) {
                    *slot = Some(GridSearchBest { value, angle, threshold: tau, rates });
                }
            }
        }
    }
    Ok(best.into_iter().map(|b| b.expect("at least one candidate")).collect())
}

/// Materializes a grid-search winner as a linear model: weight `cos/sin` on
/// the first two coordinates and, when the data carries a constant bias
/// feature `(index, value)`, `-tau/value` on it. A nonzero threshold
/// without a bias feature is not representable.
pub fn direction_threshold_model(
    angle: f64,
    threshold: f64,
    dim: usize,
    bias: Option<(u32, f64)>,
) -> Result<LinearModel> {
    let mut model = LinearModel::zeros(dim);
    if dim >= 1 {
        model.w[0] = angle.cos();
    }
    if dim >= 2 {
        model.w[1] = angle.sin();
    }
    match bias {
        Some((idx, val)) => {
            if val == 0.0 || (idx as usize) >= dim {
                return Err(Error::InvalidParameter("bad bias coordinate".into()));
            }
            model.w[idx as usize] = -threshold / val;
        }
        None if threshold != 0.0 => {
            return Err(Error::InvalidParameter(
                "nonzero threshold needs a bias feature".into(),
            ));
        }
        None => {}
    }
    Ok(model)
}

// ---------------------------------------------------------------------------
// Dinkelbach's scalar iteration on the raw fractional form, as an
// independent reference for AM traces.

/// Maximizes `(a·(1,P,N)) / (b·(1,P,N))` over a finite set by Dinkelbach's
/// parametric iteration: repeatedly pick `argmax num_i - v * den_i` and
/// reset v to that point's ratio. Ties keep the lowest index.
pub fn dinkelbach_on_finite(
    set: &FiniteClassifierSet,
    measure: &PseudoLinearMeasure,
    v0: f64,
    eps: f64,
    max_iters: usize,
) -> Result<AmOutcome<usize>> {
    if set.points.is_empty() {
        return Err(Error::EmptyData("classifier set".into()));
    }
    if max_iters == 0 {
        return Err(Error::InvalidParameter("dinkelbach needs max_iters >= 1".into()));
    }
    let nums: Vec<f64> = set
        .points
        .iter()
        .map(|r| measure.a[0] + measure.a[1] * r.p + measure.a[2] * r.n)
        .collect();
    let dens: Vec<f64> = set
        .points
        .iter()
        .map(|r| measure.b[0] + measure.b[1] * r.p + measure.b[2] * r.n)
        .collect();
    if let Some(d) = dens.iter().find(|d| **d <= 0.0) {
        return Err(Error::DegenerateDenominator { what: format!("{:?}", measure.kind), den: *d });
    }
    let mut v = v0;
    let mut levels = vec![v0];
    let mut cur = 0usize;
    for _ in 0..max_iters {
        let mut best = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        for i in 0..nums.len() {
            let val = nums[i] - v * dens[i];
            if val > best_val {
                best_val = val;
                best = i;
            }
        }
        cur = best;
        let v_next = nums[cur] / dens[cur];
        levels.push(v_next);
        if v_next <= v + eps {
            break;
        }
        v = v_next;
    }
    Ok(AmOutcome { model: cur, levels })
}

/// Central difference `(f(x+h) - f(x-h)) / 2h`.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_gaussian, SynthConfig};
    use crate::measure::MeasureKind;

    #[test]
    fn fenchel_matches_closed_forms_at_a_point() {
        let r = RatePair { p: 0.3, n: 0.8 };
        let cases = [
            (ConcaveKind::Min, 0.3),
            (ConcaveKind::HMean, 0.4363636363636364),
            (ConcaveKind::QMean, 0.4852184929506499),
            (ConcaveKind::GMean, 0.4898979485566356),
        ];
        for (kind, expect) in cases {
            let got = fenchel_infimum(kind, r);
            assert!(
                (got.value - expect).abs() < 1e-6,
                "{kind:?}: {} vs {expect}",
                got.value
            );
        }
        // Min's argmin is the alpha = 1 endpoint since P < N.
        let arg = fenchel_infimum(ConcaveKind::Min, r).argmin;
        assert!((arg.alpha - 1.0).abs() < 1e-9 && arg.beta.abs() < 1e-9);
    }

    #[test]
    fn verify_fenchel_small_grid() {
        let report = verify_fenchel(5);
        assert!(report.max_err <= 1e-3, "max err {}", report.max_err);
        assert_eq!(report.rows.len(), 4);
    }

    #[test]
    fn verify_lemma1_small_grid() {
        let report = verify_lemma1(5);
        assert!(report.ok, "rows: {:?}", report.rows);
    }

    #[test]
    fn contraction_smoke() {
        let report = verify_contraction(20, 42).unwrap();
        assert_eq!(report.violations, 0, "max excess {}", report.max_excess);
    }

    #[test]
    fn noise_smoke() {
        let report = verify_noise(10, 42).unwrap();
        assert_eq!(report.violations, 0, "max excess {}", report.max_excess);
    }

    #[test]
    fn dinkelbach_matches_am_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let catalog = contraction_catalog();
        for i in 0..50 {
            let measure = &catalog[i % catalog.len()];
            let set = FiniteClassifierSet::random(10, 0.95 * measure.m, &mut rng);
            let am = am_on_finite(&set, measure, 0.0, 0.0, 100).unwrap();
            let dj = dinkelbach_on_finite(&set, measure, 0.0, 0.0, 100).unwrap();
            assert_eq!(am.model, dj.model, "set {i}");
            assert_eq!(am.levels.len(), dj.levels.len(), "set {i}");
            for (a, d) in am.levels.iter().zip(&dj.levels) {
                assert!((a - d).abs() < 1e-12, "set {i}: {a} vs {d}");
            }
        }
    }

    #[test]
    fn grid_search_recovers_known_optimum() {
        // Four points on the x-axis, separable by x0 > tau with tau in
        // (-0.5, 0.5]: min rate 1 achievable; angle 0 is in every grid.
        let samples: Vec<Sample> = [(-2.0, -1), (-0.5, -1), (0.5, 1), (2.0, 1)]
            .into_iter()
            .map(|(x, label)| Sample { features: vec![(0, x)], label })
            .collect();
        let specs = [MeasureSpec::build(MeasureKind::Concave(ConcaveKind::Min), 1.0, 1.0).unwrap()];
        let best = grid_model_search(&samples, &specs, 8).unwrap();
        assert!((best[0].value - 1.0).abs() < 1e-12);
        assert_eq!(best[0].angle, 0.0);
        // First tie in ascending threshold order is tau = -0.5.
        assert_eq!(best[0].threshold, -0.5);
    }

    #[test]
    fn grid_search_nested_refinement_monotone() {
        let data = synth_gaussian(&SynthConfig { n: 150, p: 0.3, seed: 2, ..Default::default() })
            .unwrap();
        let specs = [
            MeasureSpec::build(MeasureKind::Concave(ConcaveKind::QMean), 7.0 / 3.0, 1.0).unwrap(),
            MeasureSpec::build(MeasureKind::PseudoLinear(PseudoLinearKind::FBeta(1.0)), 7.0 / 3.0, 1.0)
                .unwrap(),
        ];
        let coarse = grid_model_search(&data, &specs, 8).unwrap();
        let fine = grid_model_search(&data, &specs, 16).unwrap();
        for (c, f) in coarse.iter().zip(&fine) {
            assert!(f.value >= c.value - 1e-12);
        }
    }

    #[test]
    fn direction_threshold_model_scores_match_projection() {
        let model = direction_threshold_model(0.7, 0.3, 3, Some((2, 0.25))).unwrap();
        let s = Sample { features: vec![(0, 1.5), (1, -0.4), (2, 0.25)], label: 1 };
        let proj = 0.7f64.cos() * 1.5 + 0.7f64.sin() * (-0.4);
        // score = proj - tau, so the decision proj > tau matches score > 0.
        assert!((model.score(&s) - (proj - 0.3)).abs() < 1e-12);
        assert!(direction_threshold_model(0.0, 0.5, 2, None).is_err());
        assert!(direction_threshold_model(0.0, 0.0, 2, None).is_ok());
    }

    #[test]
    fn central_difference_on_cubic() {
        let d = central_difference(|x| x * x * x, 2.0, 1e-5);
        assert!((d - 12.0).abs() < 1e-6);
    }
}

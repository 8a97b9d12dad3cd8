//! Property-based invariants for the geometry, rewards, and data plumbing.

use proptest::prelude::*;

use ndopt_core::baselines::plugin_threshold;
use ndopt_core::concave::{ConcaveKind, ConcaveMeasure};
use ndopt_core::data::{parse_libsvm, split_stratified, stream, write_libsvm, Sample};
use ndopt_core::eval::{metric_at, RatePair};
use ndopt_core::measure::{MeasureKind, MeasureSpec};
use ndopt_core::model::LinearModel;
use ndopt_core::oracle::fenchel_infimum;
use ndopt_core::pseudolinear::{PseudoLinearKind, PseudoLinearMeasure};
use ndopt_core::reward::{raw_reward, subgradient_scale, RewardKind};

const KINDS: [ConcaveKind; 4] =
    [ConcaveKind::Min, ConcaveKind::HMean, ConcaveKind::QMean, ConcaveKind::GMean];

fn any_kind() -> impl Strategy<Value = ConcaveKind> {
    (0usize..4).prop_map(|i| KINDS[i])
}

fn measure_for(kind: ConcaveKind, cap: f64) -> ConcaveMeasure {
    match kind {
        // Finite cap keeps the GMean projection well-posed for arbitrary
        // inputs; the others ignore it.
        ConcaveKind::GMean => ConcaveMeasure::with_cap(kind, cap),
        _ => ConcaveMeasure::new(kind),
    }
}

fn pl_catalog(i: usize) -> PseudoLinearMeasure {
    let configs = [
        (PseudoLinearKind::FBeta(1.0), 1.0),
        (PseudoLinearKind::FBeta(2.0), 1.5),
        (PseudoLinearKind::Jaccard, 1.0),
        (PseudoLinearKind::GowerLegendre(0.5), 2.0),
        (PseudoLinearKind::GowerLegendre(2.0), 1.0),
    ];
    let (kind, theta) = configs[i % configs.len()];
    PseudoLinearMeasure::new(kind, theta, 1.0).unwrap()
}

fn sparse_samples() -> impl Strategy<Value = Vec<Sample>> {
    // At least one sample per class; btree keys keep indices sorted and
    // unique as the parser requires.
    let sample = (proptest::collection::btree_map(0u32..6, -10.0f64..10.0, 0..4), any::<bool>())
        .prop_map(|(feats, pos)| Sample {
            features: feats.into_iter().collect(),
            label: if pos { 1 } else { -1 },
        });
    proptest::collection::vec(sample, 2..40).prop_map(|mut v| {
        v[0].label = 1;
        v[1].label = -1;
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn projection_is_idempotent(
        kind in any_kind(),
        x in -6.0f64..6.0,
        y in -6.0f64..6.0,
        cap in 0.8f64..4.0,
    ) {
        let m = measure_for(kind, cap);
        let p = m.project_dual((x, y));
        prop_assert!(m.is_feasible(p.alpha, p.beta, 1e-9));
        let q = m.project_dual((p.alpha, p.beta));
        let drift = (p.alpha - q.alpha).hypot(p.beta - q.beta);
        prop_assert!(drift <= 1e-8, "{kind:?}: drift {drift}");
    }

    #[test]
    fn projection_is_nonexpansive(
        kind in any_kind(),
        x1 in -6.0f64..6.0,
        y1 in -6.0f64..6.0,
        x2 in -6.0f64..6.0,
        y2 in -6.0f64..6.0,
        cap in 0.8f64..4.0,
    ) {
        // Projections onto convex sets shrink distances; a violation would
        // mean some candidate list missed the true nearest point.
        let m = measure_for(kind, cap);
        let p = m.project_dual((x1, y1));
        let q = m.project_dual((x2, y2));
        let before = (x1 - x2).hypot(y1 - y2);
        let after = (p.alpha - q.alpha).hypot(p.beta - q.beta);
        prop_assert!(after <= before + 1e-7, "{kind:?}: {after} > {before}");
    }

    #[test]
    fn truncated_linear_is_concave_with_valid_supergradient(
        y in prop_oneof![Just(1i8), Just(-1i8)],
        s1 in -5.0f64..5.0,
        s2 in -5.0f64..5.0,
        lambda in 0.0f64..1.0,
    ) {
        let r = |s: f64| raw_reward(RewardKind::TruncatedLinear, y, s);
        let mid = lambda * s1 + (1.0 - lambda) * s2;
        prop_assert!(r(mid) >= lambda * r(s1) + (1.0 - lambda) * r(s2) - 1e-12);
        // Supergradient inequality at s1 evaluated toward s2.
        let g = subgradient_scale(RewardKind::TruncatedLinear, y, s1);
        prop_assert!(r(s2) <= r(s1) + g * (s2 - s1) + 1e-12);
    }

    #[test]
    fn fenchel_infimum_never_undercuts_link(
        kind in any_kind(),
        p in 0.05f64..1.0,
        n in 0.05f64..1.0,
    ) {
        // The scan is an infimum over a superset of evaluations, so it can
        // only land at or barely below the closed form.
        let rates = RatePair { p, n };
        let link = ConcaveMeasure::new(kind).link_value(rates);
        let inf = fenchel_infimum(kind, rates).value;
        prop_assert!((inf - link).abs() <= 1e-4, "{kind:?}: inf {inf} vs link {link}");
    }

    #[test]
    fn lemma2_equivalence_random(
        idx in 0usize..5,
        p in 0.0f64..1.0,
        n in 0.0f64..1.0,
        v_frac in 0.0f64..1.0,
    ) {
        let m = pl_catalog(idx);
        let rates = RatePair { p, n };
        let v = v_frac * m.sup_over_box();
        let pf = m.measure_value(rates).unwrap();
        let val = m.valuation(rates, v);
        // Strict margins dodge exact-equality boundaries.
        if pf > v + 1e-9 {
            prop_assert!(val >= v - 1e-9, "Pf {pf} > v {v} but V {val} < v");
        }
        if val > v + 1e-9 {
            prop_assert!(pf >= v - 1e-9, "V {val} > v {v} but Pf {pf} < v");
        }
    }

    #[test]
    fn stream_is_a_permutation_each_pass(
        n in 1usize..40,
        passes in 1usize..4,
        seed in any::<u64>(),
    ) {
        let mut counts = vec![0usize; n];
        for idx in stream(n, passes, seed) {
            counts[idx] += 1;
        }
        // Multiset property: per-pass permutations visit everything once.
        prop_assert!(counts.iter().all(|&c| c == passes));
    }

    #[test]
    fn libsvm_write_parse_round_trip(samples in sparse_samples()) {
        let mut buf = Vec::new();
        write_libsvm(&samples, &mut buf).unwrap();
        let back = parse_libsvm(buf.as_slice()).unwrap();
        prop_assert_eq!(samples, back);
    }

    #[test]
    fn stratified_split_partitions_the_data(
        samples in sparse_samples(),
        seed in any::<u64>(),
    ) {
        let n_pos = samples.iter().filter(|s| s.label > 0).count();
        let n_neg = samples.len() - n_pos;
        prop_assume!(n_pos >= 2 && n_neg >= 2);
        let (a, b, c) = split_stratified(&samples, (0.5, 0.0, 0.5), seed).unwrap();
        prop_assert_eq!(a.len() + b.len() + c.len(), samples.len());
        prop_assert!(b.is_empty());
        // Each retained split keeps both classes.
        for part in [&a, &c] {
            prop_assert!(part.iter().any(|s| s.label > 0));
            prop_assert!(part.iter().any(|s| s.label < 0));
        }
        // Union is the original multiset.
        let mut merged: Vec<Sample> = a.into_iter().chain(b).chain(c).collect();
        let key = |s: &Sample| format!("{:?}", s);
        merged.sort_by_key(key);
        let mut orig = samples.clone();
        orig.sort_by_key(key);
        prop_assert_eq!(merged, orig);
    }

    #[test]
    fn metric_invariant_under_positive_scaling(
        samples in sparse_samples(),
        w in proptest::collection::vec(-3.0f64..3.0, 6),
        c in 0.1f64..50.0,
        tau in -2.0f64..2.0,
    ) {
        let n_pos = samples.iter().filter(|s| s.label > 0).count();
        prop_assume!(n_pos >= 1 && n_pos < samples.len());
        let model = LinearModel { w };
        let scaled = model.scaled(c);
        let spec = MeasureSpec::build(MeasureKind::Concave(ConcaveKind::QMean), 1.0, 1.0).unwrap();
        let m1 = metric_at(&model, tau, &samples, &spec).unwrap();
        let m2 = metric_at(&scaled, tau * c, &samples, &spec).unwrap();
        prop_assert_eq!(m1, m2);
    }

    #[test]
    fn plugin_threshold_dominates_arbitrary_thresholds(
        samples in sparse_samples(),
        w in proptest::collection::vec(-3.0f64..3.0, 6),
        probes in proptest::collection::vec(-20.0f64..20.0, 5),
    ) {
        let n_pos = samples.iter().filter(|s| s.label > 0).count();
        prop_assume!(n_pos >= 1 && n_pos < samples.len());
        let model = LinearModel { w };
        let spec = MeasureSpec::build(MeasureKind::Concave(ConcaveKind::GMean), 1.0, 1.0).unwrap();
        let (_, best) = plugin_threshold(&model, &samples, &spec).unwrap();
        for tau in probes {
            let v = metric_at(&model, tau, &samples, &spec).unwrap();
            prop_assert!(best >= v - 1e-12, "sweep {best} < probe {v} at tau {tau}");
        }
    }
}

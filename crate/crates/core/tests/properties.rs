use proptest::prelude::*;

use ordexp::cli::output::round2;
use ordexp::estimators::{
    c0, improved_known_scale_with, improved_ordered_scale_with, mle, ordered_scale_bound, rmle,
    EstimatorPlan,
};
use ordexp::model::{EstimatorId, LossSpec, Population, Scenario, ScenarioKind, SchemeConfig};
use ordexp::risk::linex_loss;
use ordexp::{mc_risks, validate, GridPoint};

fn nonzero_p() -> impl Strategy<Value = f64> {
    prop_oneof![-4.0..-0.05f64, 0.05..4.0f64]
}

fn scale_free(kind: ScenarioKind) -> Vec<EstimatorId> {
    EstimatorId::ALL
        .iter()
        .copied()
        .filter(|e| {
            e.applies_to(kind)
                && !matches!(
                    e,
                    EstimatorId::Blee(_)
                        | EstimatorId::ImprovedKnownScale(_)
                        | EstimatorId::RmleImproved
                )
        })
        .collect()
}

fn scenario(kind: ScenarioKind, ns: [u32; 3], target: usize) -> Scenario {
    let pops = ns
        .iter()
        .enumerate()
        .map(|(j, &n)| Population::new(j as f64, 1.0 + j as f64, n))
        .collect();
    Scenario::new(kind, pops, target)
}

proptest! {
    #[test]
    fn affine_equivariance_of_unknown_scale_estimators(
        kind in prop_oneof![
            Just(ScenarioKind::OrderedScale),
            Just(ScenarioKind::LocEqualUnknownScale),
            Just(ScenarioKind::LocUnequalUnknownScale),
        ],
        ns in prop::array::uniform3(5u32..20),
        target in 0usize..3,
        p in nonzero_p(),
        x in prop::array::uniform3(-5.0..5.0f64),
        t in prop::array::uniform3(0.1..10.0f64),
        a in 0.1..10.0f64,
        b in -10.0..10.0f64,
    ) {
        let sc = scenario(kind, ns, target);
        let design = SchemeConfig::Iid.design(&sc.populations);
        for e in scale_free(kind) {
            let plan = EstimatorPlan::new(e, &sc, &design, p).unwrap();
            let base = plan.estimate_raw(&x, &t).unwrap();
            let x2: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let t2: Vec<f64> = t.iter().map(|v| a * v).collect();
            let moved = plan.estimate_raw(&x2, &t2).unwrap();
            let want = a * base + b;
            prop_assert!((moved - want).abs() <= 1e-9 * (1.0 + want.abs()), "{e}: {moved} vs {want}");
        }
    }

    #[test]
    fn ordered_scale_clip_stays_in_bounds(
        ns in prop::array::uniform2(3u32..30),
        p in nonzero_p(),
        x in prop::array::uniform2(-5.0..5.0f64),
        t in prop::array::uniform2(1e-3..50.0f64),
    ) {
        prop_assume!(ns.iter().all(|&n| f64::from(n) > p));
        let d = ordered_scale_bound(0, &ns, p);
        let c = c0(ns[0], p);
        prop_assert!(c < 0.0 && d < 0.0);
        let w = t[1] / t[0];
        let (lower, upper) = (d * (1.0 + w), d);
        prop_assert!(lower <= upper);
        let est = improved_ordered_scale_with(0, &x, &t, c, d).unwrap();
        let mult = (est - x[0]) / t[0];
        let slack = 1e-9 * (1.0 + lower.abs());
        prop_assert!(mult >= lower - slack && mult <= upper + slack);
    }

    #[test]
    fn known_scale_improvement_never_exceeds_the_shift_estimate(
        x in prop::array::uniform3(-5.0..5.0f64),
        alpha in -2.0..0.0f64,
        g in -2.0..0.0f64,
    ) {
        for i in 0..2 {
            prop_assert!(improved_known_scale_with(i, &x, alpha, g) <= x[i] + alpha);
        }
        prop_assert!(rmle(0, &x) <= mle(0, &x));
    }

    #[test]
    fn loss_is_nonnegative(delta in -1e3..1e3f64, mu in -10.0..10.0f64, sigma in 0.01..10.0f64, p in nonzero_p()) {
        let l = linex_loss(delta, mu, sigma, p);
        prop_assert!(l >= 0.0);
    }

    #[test]
    fn validation_is_pure(n1 in 1u32..10, n2 in 1u32..10, s1 in -1.0..3.0f64, s2 in 0.1..3.0f64, p in nonzero_p()) {
        let sc = Scenario::new(
            ScenarioKind::OrderedScale,
            vec![Population::new(0.0, s1, n1), Population::new(0.0, s2, n2)],
            0,
        );
        let loss = LossSpec::new(p).unwrap();
        let before = sc.clone();
        let a = validate(&sc, &SchemeConfig::Iid, &loss);
        let b = validate(&sc, &SchemeConfig::Iid, &loss);
        prop_assert_eq!(a, b);
        prop_assert_eq!(sc, before);
    }

    #[test]
    fn display_rounding_is_within_half_a_cent(x in -1e4..1e4f64) {
        let r: f64 = round2(x).parse().unwrap();
        prop_assert!((r - x).abs() <= 0.005 + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn monte_carlo_is_deterministic(seed in any::<u64>(), p in nonzero_p(), ratio in 0.1..1.0f64) {
        let pt = GridPoint::new(
            Scenario::new(
                ScenarioKind::OrderedScale,
                vec![Population::new(0.0, ratio, 6), Population::new(0.0, 1.0, 6)],
                0,
            ),
            SchemeConfig::Iid,
            LossSpec::new(p).unwrap(),
        )
        .unwrap();
        let ests = [EstimatorId::Baee, EstimatorId::ImprovedOrderedScale(Default::default())];
        let a = mc_risks(&ests, &pt, 500, seed).unwrap();
        let b = mc_risks(&ests, &pt, 500, seed).unwrap();
        for e in 0..2 {
            prop_assert_eq!(a.losses_of(e), b.losses_of(e));
        }
    }
}

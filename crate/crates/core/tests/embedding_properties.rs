mod common;

use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;

use common::*;
use maxfilter_core::annbench::{evaluate_lambda, synth_dataset, synth_points, true_nearest};
use maxfilter_core::bispectrum::{bispectrum, scaled_bispectrum};
use maxfilter_core::embedding::FnEmbedding;
use maxfilter_core::maxfilter::quotient_distance;
use maxfilter_core::point::to_complex;
use maxfilter_core::rng;
use maxfilter_core::stability::{estimate_bilipschitz, SamplerConfig};
use maxfilter_core::{
    BispectrumIndex, CircleSolverConfig, Execution, FiniteGroupAction, FrequencyProfile, GroupAction, GroupElement,
    MaxFilterBank, SplitBank, WeightedCircleAction,
};

const REFINE_ERR: f64 = 1e-9;

fn profile() -> impl Strategy<Value = FrequencyProfile> {
    prop::collection::btree_map(-3i64..=3, 1usize..=2, 1..=4)
        .prop_filter("some nonzero frequency", |m| m.keys().any(|&k| k != 0))
        .prop_map(|m| FrequencyProfile::new(m.into_iter().collect()).unwrap())
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn bank_is_frobenius_lipschitz((w, p) in circle_case(4, 6, 2), seed in 0u64..1000, n in 1usize..6) {
        let a = circle(&w);
        let bank = MaxFilterBank::generate(a.clone(), Some(n), seed, CircleSolverConfig::default()).unwrap();
        let (x, y) = (&p[0], &p[1]);
        let lhs = dist(&bank.embed(x).unwrap(), &bank.embed(y).unwrap());
        let d = quotient_distance(&a, x, y, &CircleSolverConfig::high_resolution()).unwrap();
        prop_assert!(lhs <= bank.template_frobenius() * d + n as f64 * 2.0 * REFINE_ERR, "{lhs} vs {d}");
    }

    #[test]
    fn bank_is_invariant((w, p) in circle_case(4, 6, 1), seed in 0u64..1000, angles in prop::collection::vec(-TAU..TAU, 64)) {
        let a = circle(&w);
        let bank = MaxFilterBank::generate(a.clone(), None, seed, CircleSolverConfig::default()).unwrap();
        let x = &p[0];
        let e = bank.embed(x).unwrap();
        let zmax = bank.templates().iter().map(|z| norm(z)).fold(0.0, f64::max);
        for t in angles {
            let g = bank.embed(&a.act(GroupElement::Angle(t), x)).unwrap();
            let inf = e.iter().zip(&g).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            prop_assert!(inf <= 1e-8 * (1.0 + norm(x) * zmax));
        }
    }

    #[test]
    fn bank_is_deterministic(w in weights(4, 6), seed in any::<u64>()) {
        let a = circle(&w);
        let b1 = MaxFilterBank::generate(a.clone(), None, seed, CircleSolverConfig::default()).unwrap();
        let b2 = MaxFilterBank::generate(a, None, seed, CircleSolverConfig::default()).unwrap();
        prop_assert_eq!(&b1, &b2);
        let x = vec![0.25; b1.action().dim_real()];
        prop_assert_eq!(b1.embed(&x).unwrap(), b2.embed(&x).unwrap());
    }

    #[test]
    fn split_without_fixed_part_is_plain_embed((w, p) in circle_case(4, 6, 1), seed in 0u64..1000) {
        prop_assume!(w.iter().all(|&k| k != 0));
        let a = WeightedCircleAction::new(w).unwrap();
        let bank = MaxFilterBank::generate(a.clone().into(), Some(3), seed, CircleSolverConfig::default()).unwrap();
        let split = SplitBank::from_full_templates(&a, bank.templates(), CircleSolverConfig::default(), 1.0, 1.0).unwrap();
        prop_assert_eq!(split.split_embed(&p[0]).unwrap(), bank.embed(&p[0]).unwrap());
    }

    #[test]
    fn bispectrum_is_invariant(prof in profile(), seed in any::<u64>(), angles in prop::collection::vec(-TAU..TAU, 64)) {
        let index = BispectrumIndex::new(&prof);
        let act = GroupAction::Circle(prof.induced_action().unwrap());
        let mut r = rng::substream(seed, "test");
        let x = rng::gaussian_vec(&mut r, 2 * prof.dim(), 1.0);
        let b = bispectrum(&index, &to_complex(&x)).unwrap();
        let scale = 1.0 + max_abs(&b);
        for t in angles {
            let bg = bispectrum(&index, &to_complex(&act.act(GroupElement::Angle(t), &x))).unwrap();
            let err = b.iter().zip(&bg).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-10 * scale);
        }
    }

    #[test]
    fn scaled_bispectrum_is_invariant_and_equivariant(prof in profile(), seed in any::<u64>(), t in 1e-3..1e3f64, theta in -TAU..TAU) {
        let index = BispectrumIndex::new(&prof);
        let act = GroupAction::Circle(prof.induced_action().unwrap());
        let mut r = rng::substream(seed, "test");
        let x = rng::gaussian_vec(&mut r, 2 * prof.dim(), 1.0);
        let s = scaled_bispectrum(&index, &to_complex(&x)).unwrap();
        let scale = 1.0 + max_abs(&s);
        let sg = scaled_bispectrum(&index, &to_complex(&act.act(GroupElement::Angle(theta), &x))).unwrap();
        prop_assert!(s.iter().zip(&sg).all(|(u, v)| (u - v).norm() <= 1e-10 * scale));
        let xt: Vec<f64> = x.iter().map(|v| t * v).collect();
        let st = scaled_bispectrum(&index, &to_complex(&xt)).unwrap();
        prop_assert!(s.iter().zip(&st).all(|(u, v)| (u * t - v).norm() <= 1e-10 * t * scale));
    }

    #[test]
    fn identity_map_has_unit_constants(dim in 1usize..6, seed in any::<u64>()) {
        let id = FnEmbedding::new(dim, dim, |x: &[f64]| x.to_vec());
        let a = GroupAction::Finite(FiniteGroupAction::trivial(dim).unwrap());
        let r = estimate_bilipschitz(&id, &a, &SamplerConfig::default(), 200, seed, Execution::Parallel).unwrap();
        prop_assert_eq!(r.alpha_hat, 1.0);
        prop_assert_eq!(r.beta_hat, 1.0);
    }

    #[test]
    fn stability_report_is_deterministic(w in weights(3, 4), seed in any::<u64>()) {
        let a = circle(&w);
        let bank = MaxFilterBank::generate(a.clone(), None, seed, CircleSolverConfig::default()).unwrap();
        let cfg = SamplerConfig::default();
        let r1 = estimate_bilipschitz(&bank, &a, &cfg, 50, seed, Execution::Parallel).unwrap();
        let r2 = estimate_bilipschitz(&bank, &a, &cfg, 50, seed, Execution::Sequential).unwrap();
        prop_assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r2).unwrap());
    }

    #[test]
    fn true_nearest_ignores_query_rotation(prof in profile(), seed in 0u64..1000, theta in -TAU..TAU) {
        let ds = synth_dataset(&prof, 25, 0.5, seed).unwrap();
        let a = ds.action().unwrap();
        let q = synth_points(&prof, 1, 0.5, seed, rng::QUERIES).remove(0);
        let gq = a.act(GroupElement::Angle(theta), &q);
        let hi = CircleSolverConfig::high_resolution();
        let (i1, d1) = true_nearest(&a, &q, &ds.points, &hi, Execution::Sequential).unwrap();
        let (i2, d2) = true_nearest(&a, &gq, &ds.points, &hi, Execution::Sequential).unwrap();
        // an index change is only acceptable on a numerical tie
        prop_assert!(i1 == i2 || (d1 - d2).abs() <= 1e-9, "{i1} {i2} {d1} {d2}");
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn ann_bound_never_violated(w in weights(3, 3), seed in 0u64..1000, n in 1usize..8) {
        let entries: Vec<(i64, usize)> = {
            let mut v: Vec<i64> = w.clone();
            v.sort();
            v.dedup();
            v.into_iter().map(|k| (k, 1)).collect()
        };
        let prof = FrequencyProfile::new(entries).unwrap();
        let ds = synth_dataset(&prof, 30, 1.0, seed).unwrap();
        let a = ds.action().unwrap();
        let bank = MaxFilterBank::generate(a.clone(), Some(n), seed, CircleSolverConfig::default()).unwrap();
        let queries = synth_points(&prof, 8, 1.0, seed, rng::QUERIES);
        let r = evaluate_lambda(&bank, &a, &ds.points, &queries, &SamplerConfig::default(), Execution::Parallel).unwrap();
        prop_assert!(r.bound_holds);
        for q in &r.queries {
            prop_assert!(q.achieved_lambda >= 1.0 - 1e-9);
        }
    }
}

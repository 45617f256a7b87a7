mod common;

use std::f64::consts::TAU;

use proptest::prelude::*;

use common::*;
use maxfilter_core::linalg::{gcd, lcm};
use maxfilter_core::{GroupAction, GroupElement, StabilizerOrder, WeightedCircleAction};

/// Grid angles `2πt/N`, `N = 4·lcm|k_j|`, fixing `x`, counted modulo the
/// angles that fix every point.
fn grid_stabilizer(action: &WeightedCircleAction, x: &[f64]) -> StabilizerOrder {
    let l = action.weights().iter().filter(|&&k| k != 0).fold(1u64, |acc, &k| lcm(acc, k.unsigned_abs()));
    let n = 4 * l as usize;
    let fixing = |p: &[f64]| {
        let tol = 1e-9 * (1.0 + norm(p));
        (0..n).filter(|&t| dist(&action.apply(TAU * t as f64 / n as f64, p), p) <= tol).count()
    };
    let count = fixing(x);
    if count == n {
        return StabilizerOrder::Infinite;
    }
    let kernel = fixing(&vec![1.0; x.len()]);
    StabilizerOrder::Finite((count / kernel) as u64)
}

fn sparse_point() -> impl Strategy<Value = Vec<(bool, f64, f64)>> {
    prop::collection::vec((any::<bool>(), -2.0..2.0f64, -2.0..2.0f64), 4)
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn circle_elements_are_orthogonal((w, pts) in circle_case(4, 8, 2), t in -10.0..10.0f64) {
        let a = circle(&w);
        let g = GroupElement::Angle(t);
        let (gx, gy) = (a.act(g, &pts[0]), a.act(g, &pts[1]));
        let lhs = dot(&gx, &gy);
        let rhs = dot(&pts[0], &pts[1]);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + norm(&pts[0]) * norm(&pts[1])));
    }

    #[test]
    fn finite_elements_are_orthogonal((g, pts) in finite_case(2), idx in 0usize..64) {
        let a = GroupAction::Finite(g.clone());
        let e = GroupElement::Index(idx % g.order());
        let lhs = dot(&a.act(e, &pts[0]), &a.act(e, &pts[1]));
        let rhs = dot(&pts[0], &pts[1]);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + norm(&pts[0]) * norm(&pts[1])));
    }

    #[test]
    fn stabilizer_matches_grid_oracle(w in weights(4, 6), mask in sparse_point()) {
        let a = WeightedCircleAction::new(w.clone()).unwrap();
        let x: Vec<f64> = (0..w.len())
            .flat_map(|j| { let (on, re, im) = mask[j]; if on { vec![re, im] } else { vec![0.0, 0.0] } })
            .collect();
        let tol = 1e-9 * (1.0 + norm(&x));
        prop_assert_eq!(a.stabilizer_order(&x, tol).unwrap(), grid_stabilizer(&a, &x));
    }

    #[test]
    fn stabilizer_order_is_support_gcd(w in weights(4, 6), mask in sparse_point()) {
        let a = WeightedCircleAction::new(w.clone()).unwrap();
        let x: Vec<f64> = (0..w.len())
            .flat_map(|j| { let (on, _, _) = mask[j]; if on { vec![1.0, 0.5] } else { vec![0.0, 0.0] } })
            .collect();
        let support_gcd = (0..w.len()).filter(|&j| mask[j].0 && w[j] != 0).fold(0u64, |g, j| gcd(g, w[j].unsigned_abs()));
        let g0 = w.iter().fold(0u64, |g, &k| gcd(g, k.unsigned_abs()));
        let expected = if support_gcd == 0 { StabilizerOrder::Infinite } else { StabilizerOrder::Finite(support_gcd / g0) };
        prop_assert_eq!(a.stabilizer_order(&x, 1e-12).unwrap(), expected);
    }

    #[test]
    fn chi_is_max_over_subset_indicators(w in weights(6, 8)) {
        let a = WeightedCircleAction::new(w.clone()).unwrap();
        let d = w.len();
        let mut best = 1;
        for mask in 1u32..(1 << d) {
            let x: Vec<f64> = (0..d).flat_map(|j| if mask >> j & 1 == 1 { [1.0, 0.0] } else { [0.0, 0.0] }).collect();
            if let StabilizerOrder::Finite(s) = a.stabilizer_order(&x, 1e-12).unwrap() {
                best = best.max(s);
            }
        }
        prop_assert_eq!(a.chi(), best);
    }

    #[test]
    fn cohomogeneity_ignores_permutation_and_sign(w in weights(5, 8), flips in prop::collection::vec(any::<bool>(), 5), rot in 0usize..5) {
        let base = WeightedCircleAction::new(w.clone()).unwrap().cohomogeneity();
        let mut v: Vec<i64> = w.iter().zip(&flips).map(|(&k, &f)| if f { -k } else { k }).collect();
        let r = rot % v.len();
        v.rotate_left(r);
        prop_assert_eq!(WeightedCircleAction::new(v).unwrap().cohomogeneity(), base);
    }

    #[test]
    fn regularity_is_invariant((w, pts) in circle_case(4, 6, 1), mask in sparse_point(), seeds in prop::collection::vec(-3.2..3.2f64, 64)) {
        let a = WeightedCircleAction::new(w.clone()).unwrap();
        let x: Vec<f64> = pts[0].iter().enumerate().map(|(i, &v)| if mask[(i / 2) % 4].0 { v } else { 0.0 }).collect();
        let tol = 1e-9 * (1.0 + norm(&x));
        let r = a.is_regular(&x, tol).unwrap();
        for t in seeds {
            prop_assert_eq!(a.is_regular(&a.apply(t, &x), tol).unwrap(), r);
        }
    }
}

#![allow(dead_code)]

use std::f64::consts::PI;

use proptest::prelude::*;

use maxfilter_core::{FiniteGroupAction, GroupAction, WeightedCircleAction};

/// Proptest settings without on-disk regression files.
pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

/// Nontrivial weight vectors of length `1..=max_len` with entries in `[-max_abs, max_abs]`.
pub fn weights(max_len: usize, max_abs: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-max_abs..=max_abs, 1..=max_len).prop_filter("some nonzero weight", |w| w.iter().any(|&k| k != 0))
}

/// A weight vector together with `count` points in the matching real space.
pub fn circle_case(max_len: usize, max_abs: i64, count: usize) -> impl Strategy<Value = (Vec<i64>, Vec<Vec<f64>>)> {
    weights(max_len, max_abs).prop_flat_map(move |w| {
        let d = 2 * w.len();
        (Just(w), prop::collection::vec(prop::collection::vec(-2.0..2.0f64, d), count))
    })
}

fn rotation(t: f64) -> Vec<Vec<f64>> {
    let (s, c) = t.sin_cos();
    vec![vec![c, -s], vec![s, c]]
}

fn reflection(t: f64) -> Vec<Vec<f64>> {
    let (s, c) = (2.0 * t).sin_cos();
    vec![vec![c, s], vec![s, -c]]
}

pub fn dihedral(n: usize) -> FiniteGroupAction {
    let mut mats: Vec<Vec<Vec<f64>>> = (0..n).map(|j| rotation(2.0 * PI * j as f64 / n as f64)).collect();
    mats.extend((0..n).map(|j| reflection(PI * j as f64 / n as f64)));
    FiniteGroupAction::from_rows(&mats).unwrap()
}

pub fn permutations3() -> FiniteGroupAction {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mats: Vec<Vec<Vec<f64>>> = perms
        .iter()
        .map(|p| (0..3).map(|r| (0..3).map(|c| if p[r] == c { 1.0 } else { 0.0 }).collect()).collect())
        .collect();
    FiniteGroupAction::from_rows(&mats).unwrap()
}

/// A fixed menu of finite groups of assorted orders and dimensions.
pub fn finite_groups() -> Vec<FiniteGroupAction> {
    vec![
        FiniteGroupAction::sign(3).unwrap(),
        FiniteGroupAction::cyclic_rotations(5).unwrap(),
        dihedral(4),
        permutations3(),
        WeightedCircleAction::new(vec![1, 2]).unwrap().cyclic_subgroup(6).unwrap(),
    ]
}

pub fn finite_case(count: usize) -> impl Strategy<Value = (FiniteGroupAction, Vec<Vec<f64>>)> {
    (0..finite_groups().len()).prop_flat_map(move |i| {
        let g = finite_groups().swap_remove(i);
        let d = g.dim();
        (Just(g), prop::collection::vec(prop::collection::vec(-2.0..2.0f64, d), count))
    })
}

pub fn circle(w: &[i64]) -> GroupAction {
    GroupAction::circle(w.to_vec()).unwrap()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

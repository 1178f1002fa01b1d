//! Stair-convex chains and machine verification of their boundary identities.
//!
//! For strictly increasing anchors `a_1 < ... < a_{k+1}` in `[n]`, the
//! stair-convex k-chain in `[n]^m` interpolates between a diagonal vertex
//! (k = 0) and a full box (k = m). It is defined by a two-term recursion and
//! admits a closed form as a sum over weak compositions of `m - k`. Its key
//! property is that the boundary operator acts on it exactly as on a
//! k-simplex: dropping one anchor at a time.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::grid::{long_interval, Chain, GridSpec};

/// Arguments of a stair-convex chain: the grid, the axis count and the
/// strictly increasing anchor sequence. The chain dimension is
/// `anchors.len() - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StairArgs {
    pub spec: GridSpec,
    pub anchors: Vec<u32>,
}

impl StairArgs {
    pub fn new(n: u32, m: usize, anchors: Vec<u32>) -> Self {
        assert!(!anchors.is_empty(), "at least one anchor required");
        assert!(
            anchors.windows(2).all(|w| w[0] < w[1]),
            "anchors must be strictly increasing: {anchors:?}"
        );
        assert!(
            anchors.iter().all(|&a| (1..=n).contains(&a)),
            "anchors out of range [1,{n}]: {anchors:?}"
        );
        StairArgs {
            spec: GridSpec::new(n, m),
            anchors,
        }
    }

    pub fn k(&self) -> usize {
        self.anchors.len() - 1
    }
}

/// The diagonal vertex `(a, ..., a)` on `axes` axes; the empty product for
/// `axes = 0`, which is the identity of the chain product.
fn diagonal(n: u32, axes: usize, a: u32) -> Chain {
    if axes == 0 {
        Chain::unit(n)
    } else {
        Chain::vertex(GridSpec::new(n, axes), &vec![a; axes])
    }
}

/// Stair-convex chain by the defining recursion.
pub fn stc_recursive(args: &StairArgs) -> Chain {
    stc_rec(args.spec.n, args.spec.m, &args.anchors)
}

fn stc_rec(n: u32, m: usize, anchors: &[u32]) -> Chain {
    let k = anchors.len() - 1;
    if k == 0 {
        return diagonal(n, m, anchors[0]);
    }
    if k > m {
        return Chain::zero(GridSpec::new(n, m), k);
    }
    if k == m {
        let mut acc = Chain::unit(n);
        for w in anchors.windows(2) {
            acc = acc.product(&long_interval(n, w[0], w[1]));
        }
        return acc;
    }
    // 0 < k < m
    let left = stc_rec(n, m - 1, &anchors[..k]).product(&long_interval(n, anchors[k - 1], anchors[k]));
    let right = stc_rec(n, m - 1, anchors).product(&diagonal(n, 1, anchors[k]));
    left.add(&right)
}

/// All weak compositions of `total` into `parts` nonnegative summands, in
/// lexicographic order.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    assert!(parts >= 1);
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(parts);
    fn rec(total: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(total);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in 0..=total {
            cur.push(first);
            rec(total - first, parts - 1, cur, out);
            cur.pop();
        }
    }
    rec(total, parts, &mut cur, &mut out);
    out
}

/// Stair-convex chain by the unwrapped closed form: the sum over weak
/// compositions `t_1 + ... + t_{k+1} = m - k` of
/// `diag^{t_1}(a_1) x prod_i ([a_i, a_{i+1}] x diag^{t_{i+1}}(a_{i+1}))`.
///
/// Agrees with [`stc_recursive`] for all `m >= k >= 1`.
pub fn stc_unwrapped(args: &StairArgs) -> Chain {
    let (n, m, k) = (args.spec.n, args.spec.m, args.k());
    assert!(k >= 1, "unwrapped form requires k >= 1");
    if k > m {
        return Chain::zero(GridSpec::new(n, m), k);
    }
    let mut total = Chain::zero(GridSpec::new(n, m), k);
    for comp in compositions(m - k, k + 1) {
        let mut term = diagonal(n, comp[0], args.anchors[0]);
        for i in 0..k {
            term = term
                .product(&long_interval(n, args.anchors[i], args.anchors[i + 1]))
                .product(&diagonal(n, comp[i + 1], args.anchors[i + 1]));
        }
        total = total.add(&term);
    }
    total
}

/// Checks that the boundary of the stair chain equals the sum of the stair
/// chains with one anchor dropped, exactly as for a k-simplex.
pub fn verify_simplex_boundary(args: &StairArgs) -> bool {
    let (n, m, k) = (args.spec.n, args.spec.m, args.k());
    assert!(m >= k && k >= 1);
    let lhs = stc_recursive(args).boundary();
    let mut rhs = Chain::zero(args.spec, k.saturating_sub(1));
    for drop in 0..=k {
        let mut sub = args.anchors.clone();
        sub.remove(drop);
        rhs = rhs.add(&stc_rec(n, m, &sub));
    }
    lhs == rhs
}

/// Checks that the `m + 2` top-dimensional stair chains obtained by dropping
/// one anchor from a strictly increasing `(m + 2)`-tuple sum to zero.
pub fn verify_alternating_sum(n: u32, m: usize, anchors: &[u32]) -> bool {
    assert_eq!(anchors.len(), m + 2, "need m + 2 anchors");
    assert!(anchors.windows(2).all(|w| w[0] < w[1]));
    let mut sum = Chain::zero(GridSpec::new(n, m), m);
    for drop in 0..anchors.len() {
        let mut sub = anchors.to_vec();
        sub.remove(drop);
        sum = sum.add(&stc_rec(n, m, &sub));
    }
    sum.is_zero()
}

/// All values `a` such that some hyperplane `x_j = a` contains a
/// top-dimensional cell of the chain's support. For stair chains the result
/// is always a subset of the anchors.
pub fn support_hyperplane_anchors(args: &StairArgs) -> BTreeSet<u32> {
    let chain = stc_recursive(args);
    let mut values = BTreeSet::new();
    for cell in chain.cells() {
        for &(a, b) in cell.intervals() {
            if a == b {
                values.insert(a);
            }
        }
    }
    values
}

/// One failing case of an exhaustive identity suite.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct FailedCase {
    pub m: usize,
    pub k: usize,
    pub anchors: Vec<u32>,
}

/// Result of an exhaustive identity suite: cases checked and any failures,
/// each failure replayable from its recorded arguments.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct SuiteOutcome {
    pub name: String,
    pub checked: u64,
    pub failures: Vec<FailedCase>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn increasing_tuples(len: usize, max: u32) -> Vec<Vec<u32>> {
    use itertools::Itertools;
    (1..=max).combinations(len).collect()
}

fn run_cases<F>(name: &str, cases: Vec<(usize, usize, Vec<u32>)>, check: F) -> SuiteOutcome
where
    F: Fn(usize, usize, &[u32]) -> bool + Sync,
{
    let failures: Vec<FailedCase> = cases
        .par_iter()
        .filter_map(|(m, k, anchors)| {
            if check(*m, *k, anchors) {
                None
            } else {
                Some(FailedCase {
                    m: *m,
                    k: *k,
                    anchors: anchors.clone(),
                })
            }
        })
        .collect();
    SuiteOutcome {
        name: name.to_string(),
        checked: cases.len() as u64,
        failures,
    }
}

/// Simplex-boundary identity for all `1 <= k <= m <= max_m` and strictly
/// increasing anchor tuples in `[max_n]`.
pub fn boundary_suite(max_m: usize, max_n: u32) -> SuiteOutcome {
    let mut cases = Vec::new();
    for m in 1..=max_m {
        for k in 1..=m {
            for anchors in increasing_tuples(k + 1, max_n) {
                cases.push((m, k, anchors));
            }
        }
    }
    run_cases("simplex-boundary", cases, |m, _k, anchors| {
        verify_simplex_boundary(&StairArgs::new(max_n, m, anchors.to_vec()))
    })
}

/// Recursive and unwrapped forms agree on the same exhaustive range.
pub fn unwrap_suite(max_m: usize, max_n: u32) -> SuiteOutcome {
    let mut cases = Vec::new();
    for m in 1..=max_m {
        for k in 1..=m {
            for anchors in increasing_tuples(k + 1, max_n) {
                cases.push((m, k, anchors));
            }
        }
    }
    run_cases("unwrap", cases, |m, _k, anchors| {
        let args = StairArgs::new(max_n, m, anchors.to_vec());
        stc_recursive(&args) == stc_unwrapped(&args)
    })
}

/// Alternating-sum identity for all `m <= max_m` and strictly increasing
/// `(m + 2)`-tuples in `[max_n]`.
pub fn alternating_suite(max_m: usize, max_n: u32) -> SuiteOutcome {
    let mut cases = Vec::new();
    for m in 1..=max_m {
        if (m + 2) as u32 > max_n {
            continue;
        }
        for anchors in increasing_tuples(m + 2, max_n) {
            cases.push((m, m, anchors));
        }
    }
    run_cases("alternating-sum", cases, |m, _k, anchors| {
        verify_alternating_sum(max_n, m, anchors)
    })
}

/// Every hyperplane value found in a stair support is one of its anchors.
pub fn hyperplane_suite(max_m: usize, max_n: u32) -> SuiteOutcome {
    let mut cases = Vec::new();
    for m in 1..=max_m {
        for k in 0..=m {
            for anchors in increasing_tuples(k + 1, max_n) {
                cases.push((m, k, anchors));
            }
        }
    }
    run_cases("hyperplane-anchors", cases, |m, _k, anchors| {
        let args = StairArgs::new(max_n, m, anchors.to_vec());
        let anchor_set: BTreeSet<u32> = anchors.iter().copied().collect();
        support_hyperplane_anchors(&args).is_subset(&anchor_set)
    })
}

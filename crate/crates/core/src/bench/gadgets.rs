//! Partition-encoding instances. Their discrete two-stage optimum reveals
//! the best achievable split of a weight list.

use crate::model::{CostProfile, Instance, NominalProblem, UncertaintyKind};
use crate::num::{int, Rational};

fn total(weights: &[u64]) -> i64 {
    assert!(!weights.is_empty(), "weight list must be nonempty");
    assert!(weights.iter().all(|&a| a > 0), "weights must be positive");
    weights.iter().map(|&a| a as i64).sum()
}

/// Representative-selection gadget: one two-item part per weight, `Γ = 1`.
/// Its optimum is the minimum partition difference, plus `ℓ·shift`.
///
/// With `A` half the weight sum, the first-stage raise is `4A` and the
/// second item's raise is `M = 8A + 1`.
pub fn gadget_repsel(weights: &[u64], shift: i64) -> Instance {
    let sum = total(weights);
    let raise_first = 2 * sum;
    let m = 4 * sum + 1;
    let mut c = CostProfile { c_lo: vec![], c_hi: vec![], d_lo: vec![], d_hi: vec![] };
    for &a in weights {
        let a = a as i64;
        for (d_lo, d_inc) in [(a, 0), (-3 * a, m)] {
            c.c_lo.push(int(-a + shift));
            c.c_hi.push(int(-a + raise_first + shift));
            c.d_lo.push(int(d_lo + shift));
            c.d_hi.push(int(d_lo + d_inc + shift));
        }
    }
    Instance {
        nominal: NominalProblem::RepSelection { parts: (0..weights.len()).map(|j| vec![2 * j, 2 * j + 1]).collect() },
        costs: c,
        gamma: int(1),
        kind: UncertaintyKind::DiscreteBudget,
        signed_costs: true,
    }
}

/// Selection gadget on `2ℓ + 1` items with `p = ℓ + 1`, `Γ = 1`: one item
/// per weight, one costly-to-delay item and `ℓ` fillers. With `A` half the
/// weight sum the optimum is `2A` plus the smallest achievable larger side.
pub fn gadget_selection(weights: &[u64]) -> Instance {
    let sum = total(weights);
    let m = 2 * sum;
    let mut c = CostProfile { c_lo: vec![], c_hi: vec![], d_lo: vec![], d_hi: vec![] };
    let mut push = |c_lo: i64, c_hi: i64, d_lo: i64, d_hi: i64| {
        c.c_lo.push(int(c_lo));
        c.c_hi.push(int(c_hi));
        c.d_lo.push(int(d_lo));
        c.d_hi.push(int(d_hi));
    };
    for &a in weights {
        let a = a as i64;
        push(a, a, 2 * a, 2 * a);
    }
    push(0, sum, m, m);
    for _ in weights {
        push(m, m, 0, m);
    }
    let n = 2 * weights.len() + 1;
    Instance {
        nominal: NominalProblem::Selection { n, p: weights.len() + 1 },
        costs: c,
        gamma: int(1),
        kind: UncertaintyKind::DiscreteBudget,
        signed_costs: false,
    }
}

/// `min over X of |Σ_X a − Σ_X̄ a|` by a subset-sum sweep.
pub fn min_partition_difference(weights: &[u64]) -> u64 {
    let sum: u64 = weights.iter().sum();
    let reachable = subset_sums(weights);
    (0..=sum as usize)
        .filter(|&s| reachable[s])
        .map(|s| (2 * s as i64 - sum as i64).unsigned_abs())
        .min()
        .expect("empty subset is reachable")
}

/// `min over X of max(Σ_X a, Σ_X̄ a)`.
pub fn min_larger_side(weights: &[u64]) -> u64 {
    let sum: u64 = weights.iter().sum();
    let reachable = subset_sums(weights);
    (0..=sum as usize)
        .filter(|&s| reachable[s])
        .map(|s| (s as u64).max(sum - s as u64))
        .min()
        .expect("empty subset is reachable")
}

fn subset_sums(weights: &[u64]) -> Vec<bool> {
    let sum: u64 = weights.iter().sum();
    let mut reachable = vec![false; sum as usize + 1];
    reachable[0] = true;
    for &a in weights {
        for s in (a as usize..=sum as usize).rev() {
            reachable[s] |= reachable[s - a as usize];
        }
    }
    reachable
}

/// Expected optimum of [`gadget_selection`]: the weight sum plus the
/// smallest larger side.
pub fn selection_gadget_value(weights: &[u64]) -> Rational {
    int(weights.iter().sum::<u64>() as i64 + min_larger_side(weights) as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc_exact::solve_discrete_exact;

    fn r2d(inst: &Instance) -> Rational {
        assert!(inst.validate().is_empty(), "{:?}", inst.validate());
        solve_discrete_exact(inst).unwrap().value
    }

    #[test]
    fn subset_sum_sweeps() {
        assert_eq!(min_partition_difference(&[1, 1]), 0);
        assert_eq!(min_partition_difference(&[1, 2]), 1);
        assert_eq!(min_partition_difference(&[3, 1, 2]), 0);
        assert_eq!(min_partition_difference(&[5]), 5);
        assert_eq!(min_larger_side(&[1, 1, 2]), 2);
        assert_eq!(min_larger_side(&[1, 2]), 2);
    }

    #[test]
    fn repsel_examples() {
        assert_eq!(r2d(&gadget_repsel(&[1, 1], 0)), int(0));
        assert_eq!(r2d(&gadget_repsel(&[1, 2], 0)), int(1));
        assert_eq!(r2d(&gadget_repsel(&[3, 1, 2], 0)), int(0));
        assert_eq!(r2d(&gadget_repsel(&[1, 2], 10)), int(1 + 2 * 10));
    }

    #[test]
    fn selection_examples() {
        assert_eq!(r2d(&gadget_selection(&[1, 1])), int(3));
        assert_eq!(r2d(&gadget_selection(&[1, 2])), int(5));
        assert_eq!(r2d(&gadget_selection(&[1, 1, 2])), int(6));
    }
}

//! Shared instance builders for the integration tests.
#![allow(dead_code)]

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use tsro_core::num::int;
use tsro_core::{CostProfile, Instance, NominalProblem, Rational, UncertaintyKind};

pub fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

pub fn example3() -> Instance {
    Instance {
        nominal: NominalProblem::Selection { n: 3, p: 2 },
        costs: CostProfile {
            c_lo: ints(&[3, 1, 4]),
            c_hi: ints(&[7, 10, 5]),
            d_lo: ints(&[3, 1, 4]),
            d_hi: ints(&[7, 10, 5]),
        },
        gamma: int(1),
        kind: UncertaintyKind::DiscreteBudget,
        signed_costs: false,
    }
}

pub struct Gen(SplitMix64);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen(SplitMix64::seed_from_u64(seed))
    }

    /// Uniform in `lo..=hi` (small ranges; modulo bias is irrelevant here).
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as i64
    }

    pub fn pick<T: Clone>(&mut self, items: &[T]) -> T {
        items[self.range(0, items.len() as i64 - 1) as usize].clone()
    }

    fn pair(&mut self, max: i64) -> (i64, i64) {
        let (a, b) = (self.range(0, max), self.range(0, max));
        (a.min(b), a.max(b))
    }

    pub fn costs(&mut self, n: usize, max: i64) -> CostProfile {
        let mut c = CostProfile { c_lo: vec![], c_hi: vec![], d_lo: vec![], d_hi: vec![] };
        for _ in 0..n {
            let (a, b) = self.pair(max);
            let (d, e) = self.pair(max);
            c.c_lo.push(int(a));
            c.c_hi.push(int(b));
            c.d_lo.push(int(d));
            c.d_hi.push(int(e));
        }
        c
    }

    /// Stage costs identical: `c = d`.
    pub fn equal_costs(&mut self, n: usize, max: i64) -> CostProfile {
        let mut c = self.costs(n, max);
        c.d_lo = c.c_lo.clone();
        c.d_hi = c.c_hi.clone();
        c
    }
}

/// Parts `{0,1}, {2,3}, ...`, with a trailing single item when `n` is odd.
pub fn pair_parts(n: usize) -> NominalProblem {
    NominalProblem::RepSelection { parts: (0..n).step_by(2).map(|i| (i..(i + 2).min(n)).collect()).collect() }
}

/// The small-instance suite: `n` in 4..=6, Selection with `p` in 1..=3 or
/// RepSelection with two-item parts, costs in `[0, 20]`, `Γ` in 0..=3.
pub fn small_instance(g: &mut Gen, kind: UncertaintyKind) -> Instance {
    let n = g.range(4, 6) as usize;
    let nominal =
        if g.range(0, 1) == 0 { NominalProblem::Selection { n, p: g.range(1, 3) as usize } } else { pair_parts(n) };
    Instance { nominal, costs: g.costs(n, 20), gamma: int(g.range(0, 3)), kind, signed_costs: false }
}

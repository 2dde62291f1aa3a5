//! Randomized agreement checks between the fast solvers and the oracles.

use std::collections::BTreeMap;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::cont_decomp::solve_continuous;
use crate::disc_exact::solve_discrete_exact;
use crate::model::{CostProfile, Instance, NominalProblem, UncertaintyKind};
use crate::num::{int, Rational};
use crate::onestage::static_solve;
use crate::oracle::{
    brute_onestage_capped, brute_rob_continuous_capped, brute_rob_discrete_capped, brute_variant_capped,
};
use crate::report::SolveError;
use crate::variant_budget::solve_variant;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Largest item count; instances use `n` in `max(2, n-2)..=n`.
    pub n: usize,
    pub cases: usize,
    pub seed: u64,
    pub cap: usize,
    pub max_cost: i64,
    pub max_gamma: i64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { n: 6, cases: 300, seed: 1, cap: crate::oracle::DEFAULT_CAP, max_cost: 20, max_gamma: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub suite: &'static str,
    pub case: usize,
    pub instance: Instance,
    pub solver: Rational,
    pub oracle: Rational,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub checked: BTreeMap<&'static str, usize>,
    pub mismatches: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn below(rng: &mut SplitMix64, bound: u64) -> u64 {
    rng.next_u64() % bound
}

fn ordered_pair(rng: &mut SplitMix64, max: i64) -> (Rational, Rational) {
    let a = below(rng, max as u64 + 1) as i64;
    let b = below(rng, max as u64 + 1) as i64;
    (int(a.min(b)), int(a.max(b)))
}

/// Selection with `p ≤ 3` or representative selection over two-item parts,
/// costs uniform in `[0, max_cost]`, integer `Γ` in `0..=max_gamma`.
pub fn random_instance(
    rng: &mut SplitMix64,
    n: usize,
    kind: UncertaintyKind,
    max_cost: i64,
    max_gamma: i64,
) -> Instance {
    let nominal = if rng.next_u64().is_multiple_of(2) {
        NominalProblem::Selection { n, p: 1 + below(rng, n.min(3) as u64) as usize }
    } else {
        NominalProblem::RepSelection { parts: (0..n).step_by(2).map(|i| (i..(i + 2).min(n)).collect()).collect() }
    };
    let mut costs = CostProfile { c_lo: vec![], c_hi: vec![], d_lo: vec![], d_hi: vec![] };
    for _ in 0..n {
        let (a, b) = ordered_pair(rng, max_cost);
        let (d, e) = ordered_pair(rng, max_cost);
        costs.c_lo.push(a);
        costs.c_hi.push(b);
        costs.d_lo.push(d);
        costs.d_hi.push(e);
    }
    Instance { nominal, costs, gamma: int(below(rng, max_gamma as u64 + 1) as i64), kind, signed_costs: false }
}

type Check = fn(&Instance, usize) -> Result<(Rational, Rational), SolveError>;

const SUITES: [(&str, UncertaintyKind, Check); 5] = [
    ("discrete", UncertaintyKind::DiscreteBudget, |i, cap| {
        Ok((solve_discrete_exact(i)?.value, brute_rob_discrete_capped(i, cap)?))
    }),
    ("continuous", UncertaintyKind::ContinuousBudget, |i, cap| {
        Ok((solve_continuous(i)?.value, brute_rob_continuous_capped(i, cap, &[])?))
    }),
    ("variant", UncertaintyKind::VariantBudget, |i, cap| Ok((solve_variant(i)?.value, brute_variant_capped(i, cap)?))),
    ("static-discrete", UncertaintyKind::DiscreteBudget, |i, cap| {
        Ok((static_solve(i)?.value, brute_onestage_capped(i, cap)?))
    }),
    ("static-continuous", UncertaintyKind::ContinuousBudget, |i, cap| {
        Ok((static_solve(i)?.value, brute_onestage_capped(i, cap)?))
    }),
];

fn instances_for(cfg: &VerifyConfig, index: usize, kind: UncertaintyKind) -> Vec<Instance> {
    let lo = cfg.n.saturating_sub(2).max(2).min(cfg.n);
    let mut rng = SplitMix64::seed_from_u64(cfg.seed.wrapping_add(index as u64));
    (0..cfg.cases)
        .map(|_| {
            let n = lo + below(&mut rng, (cfg.n - lo + 1) as u64) as usize;
            random_instance(&mut rng, n, kind, cfg.max_cost, cfg.max_gamma)
        })
        .collect()
}

/// The instances [`run_verify`] checks for the named suite.
pub fn suite_instances(cfg: &VerifyConfig, suite: &str) -> Option<Vec<Instance>> {
    let index = SUITES.iter().position(|(name, _, _)| *name == suite)?;
    Some(instances_for(cfg, index, SUITES[index].1))
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport, SolveError> {
    if cfg.n > cfg.cap {
        return Err(SolveError::CapExceeded { n: cfg.n, cap: cfg.cap });
    }
    let mut report = VerifyReport::default();
    for (s, &(suite, kind, check)) in SUITES.iter().enumerate() {
        for (case, instance) in instances_for(cfg, s, kind).into_iter().enumerate() {
            let (solver, oracle) = check(&instance, cfg.cap)?;
            *report.checked.entry(suite).or_default() += 1;
            if solver != oracle {
                report.mismatches.push(Mismatch { suite, case, instance, solver, oracle });
            }
        }
    }
    Ok(report)
}

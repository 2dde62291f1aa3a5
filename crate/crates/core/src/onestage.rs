//! One-stage budgeted machinery: threshold sets, worst-case attacks and the
//! static (non-adjustable) solver.
//!
//! The static problem fixes the whole solution `(x, y)` before any attack.
//! Its inner adversary is a fractional knapsack over the combined
//! increments, whose dual has a single threshold `π`; the optimum is
//! attained at a kink, so the problem decomposes into one nominal solve per
//! candidate threshold.

use std::time::Instant;

use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::model::{nominal_solve, Instance, ItemSet, NominalProblem, UncertaintyKind};
use crate::num::{pos, Rational};
use crate::report::{Certificate, Method, Provenance, SolveError, SolveReport};

/// Candidate dual values: the distinct increments plus zero, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdSet(Vec<Rational>);

impl ThresholdSet {
    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, k: usize) -> &Rational {
        &self.0[k]
    }
}

pub fn pi_candidates<'a>(increments: impl IntoIterator<Item = &'a Rational>) -> Result<ThresholdSet, SolveError> {
    let mut values = vec![Rational::zero()];
    for (i, v) in increments.into_iter().enumerate() {
        if v.is_negative() {
            return Err(SolveError::NegativeIncrement(i + 1));
        }
        values.push(v.clone());
    }
    values.sort();
    values.dedup();
    Ok(ThresholdSet(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackMode {
    /// All-or-nothing raises; a fractional budget is rounded down.
    Discrete,
    /// Fractional raises.
    Continuous,
}

/// Worst-case total cost of a fixed item set: base costs plus the largest
/// increments the budget can buy.
pub fn attack_value(base: &[Rational], increments: &[Rational], budget: &Rational, mode: AttackMode) -> Rational {
    let mut incs: Vec<&Rational> = increments.iter().collect();
    incs.sort_by(|a, b| b.cmp(a));
    let whole = budget.floor().to_integer().to_usize().unwrap_or(0);
    let mut total: Rational = base.iter().sum();
    for inc in incs.iter().take(whole) {
        total += *inc;
    }
    if mode == AttackMode::Continuous {
        if let Some(next) = incs.get(whole) {
            total += budget.fract() * *next;
        }
    }
    total
}

/// Robust one-stage value `min_z max_attack` over the nominal solutions,
/// for a single cost vector with increments `inc`.
pub fn robust_nominal(
    problem: &NominalProblem,
    lo: &[Rational],
    inc: &[Rational],
    gamma: &Rational,
) -> Result<(Rational, ItemSet), SolveError> {
    let thresholds = pi_candidates(inc)?;
    let mut best: Option<(Rational, ItemSet)> = None;
    for pi in thresholds.values() {
        let weights: Vec<Rational> = lo.iter().zip(inc).map(|(l, d)| l + pos(&(d - pi))).collect();
        let (v, sol) = nominal_solve(problem, &weights, &ItemSet::empty(), &ItemSet::empty())?;
        let v = v + gamma * pi;
        if best.as_ref().is_none_or(|(b, _)| &v < b) {
            best = Some((v, sol));
        }
    }
    Ok(best.expect("threshold set always contains zero"))
}

/// Solves the static problem, producing `R₁`.
pub fn static_solve(instance: &Instance) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    if instance.kind == UncertaintyKind::VariantBudget {
        return Err(SolveError::UnsupportedKind(instance.kind));
    }
    let costs = &instance.costs;
    let c_inc = costs.c_inc();
    let d_inc = costs.d_inc();
    let thresholds = pi_candidates(c_inc.iter().chain(d_inc.iter()))?;

    let evaluate = |k: usize| -> Result<(Rational, ItemSet, Vec<bool>), SolveError> {
        let pi = thresholds.get(k);
        let mut first_branch = Vec::with_capacity(instance.n());
        let weights: Vec<Rational> = (0..instance.n())
            .map(|i| {
                let wc = &costs.c_lo[i] + pos(&(&c_inc[i] - pi));
                let wd = &costs.d_lo[i] + pos(&(&d_inc[i] - pi));
                first_branch.push(wc <= wd);
                wc.min(wd)
            })
            .collect();
        let (v, sol) = nominal_solve(&instance.nominal, &weights, &ItemSet::empty(), &ItemSet::empty())?;
        Ok((v + &instance.gamma * pi, sol, first_branch))
    };

    let results: Vec<_> = (0..thresholds.len()).into_par_iter().map(evaluate).collect();
    let mut best: Option<(usize, Rational, ItemSet, Vec<bool>)> = None;
    for (k, r) in results.into_iter().enumerate() {
        let (v, sol, branch) = r?;
        if best.as_ref().is_none_or(|(_, b, _, _)| &v < b) {
            best = Some((k, v, sol, branch));
        }
    }
    let (k, value, sol, branch) = best.expect("threshold set always contains zero");
    Ok(SolveReport {
        value,
        witness_x: ItemSet::new(sol.iter().filter(|&i| branch[i])),
        method: Method::Static,
        provenance: Provenance::Static { pi: thresholds.get(k).clone() },
        certificate: Certificate::Exact,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::example3;
    use crate::num::{frac, int};
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn thresholds_from_example3_second_stage() {
        let t = pi_candidates(&ints(&[4, 9, 1])).unwrap();
        assert_eq!(t.values(), ints(&[0, 1, 4, 9]).as_slice());
        assert_eq!(pi_candidates(&ints(&[0, 0])).unwrap().values(), ints(&[0]).as_slice());
        assert_eq!(pi_candidates(&ints(&[2, 2, 7])).unwrap().values(), ints(&[0, 2, 7]).as_slice());
        assert_eq!(pi_candidates(&ints(&[1, -1])), Err(SolveError::NegativeIncrement(2)));
    }

    #[test]
    fn attack_examples() {
        let base = ints(&[1, 1]);
        let incs = ints(&[4, 9]);
        assert_eq!(attack_value(&base, &incs, &int(1), AttackMode::Discrete), int(11));
        assert_eq!(attack_value(&base, &incs, &int(0), AttackMode::Discrete), int(2));
        assert_eq!(attack_value(&base, &incs, &int(5), AttackMode::Discrete), int(15));
        assert_eq!(attack_value(&base, &incs, &frac(3, 2), AttackMode::Continuous), int(13));
        assert_eq!(attack_value(&base, &incs, &frac(3, 2), AttackMode::Discrete), int(11));
    }

    #[test]
    fn static_example3() {
        let inst = example3();
        let r = static_solve(&inst).unwrap();
        assert_eq!(r.value, int(11));
        assert_eq!(static_solve(&inst.with_gamma(int(0))).unwrap().value, int(4));
        assert_eq!(static_solve(&inst.with_gamma(int(3))).unwrap().value, int(12));
        let cont = inst.with_kind(UncertaintyKind::ContinuousBudget);
        assert_eq!(static_solve(&cont).unwrap().value, int(11));
    }

    #[test]
    fn static_rejects_variant() {
        let inst = example3().with_kind(UncertaintyKind::VariantBudget);
        assert_eq!(static_solve(&inst), Err(SolveError::UnsupportedKind(UncertaintyKind::VariantBudget)));
    }

    proptest! {
        #[test]
        fn continuous_dominates_discrete(
            raw in proptest::collection::vec(0i64..=30, 1..8),
            num in 0i64..40,
            den in 1i64..6,
        ) {
            let base = vec![int(0); raw.len()];
            let incs = ints(&raw);
            let budget = frac(num, den);
            let c = attack_value(&base, &incs, &budget, AttackMode::Continuous);
            let d = attack_value(&base, &incs, &budget, AttackMode::Discrete);
            prop_assert!(c >= d);
            if budget.is_integer() {
                prop_assert_eq!(c, d);
            }
        }
    }
}

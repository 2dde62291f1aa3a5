//! Brute-force reference solvers, exponential in `n`.
//!
//! These follow the game definitions directly (every first-stage set, every
//! attack, every completion) and share no decomposition logic with the fast
//! solvers they are used to check.

use num_traits::{ToPrimitive, Zero};

use crate::model::{Instance, UncertaintyKind};
use crate::num::{int, Rational};
use crate::onestage::{attack_value, AttackMode};
use crate::report::SolveError;

pub const DEFAULT_CAP: usize = 8;

/// Piecewise-linear function of a budget `b ≥ 0`: linear between
/// breakpoints, constant after the last one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetCurve {
    points: Vec<(Rational, Rational)>,
}

impl BudgetCurve {
    /// Breakpoints must start at budget 0 and strictly increase.
    pub fn from_points(points: Vec<(Rational, Rational)>) -> Self {
        assert!(!points.is_empty(), "curve needs at least one point");
        assert!(points[0].0.is_zero(), "curve must start at budget 0");
        assert!(points.windows(2).all(|w| w[0].0 < w[1].0), "breakpoints must strictly increase");
        BudgetCurve { points }
    }

    /// Continuous attack on a fixed set: base plus the fractional-knapsack
    /// value of `increments` under budget `b`.
    pub fn attack(base: Rational, increments: &[Rational]) -> Self {
        let mut incs: Vec<&Rational> = increments.iter().collect();
        incs.sort_by(|a, b| b.cmp(a));
        let mut points = vec![(Rational::zero(), base.clone())];
        let mut acc = base;
        for (k, inc) in incs.into_iter().enumerate() {
            acc += inc;
            points.push((int(k as i64 + 1), acc.clone()));
        }
        BudgetCurve { points }
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = &Rational> {
        self.points.iter().map(|(b, _)| b)
    }

    pub fn eval(&self, b: &Rational) -> Rational {
        assert!(*b >= Rational::zero(), "budget must be non-negative");
        let idx = self.points.partition_point(|(x, _)| x <= b);
        let (x0, y0) = &self.points[idx - 1];
        match self.points.get(idx) {
            None => y0.clone(),
            Some((x1, y1)) => y0 + (y1 - y0) * (b - x0) / (x1 - x0),
        }
    }
}

/// `max over γ in [0, hi]` of `first(γ) + min_y curves[y](total − γ)`.
///
/// `first` must be linear between consecutive points of `first_breaks`.
/// The candidate set is every breakpoint of every piece plus, inside each
/// resulting segment, every pairwise crossing of the second-stage curves.
/// `extra` adds arbitrary sample points in `[0, hi]`.
pub(crate) fn max_over_split(
    total: &Rational,
    hi: &Rational,
    first: impl Fn(&Rational) -> Rational,
    first_breaks: &[Rational],
    curves: &[BudgetCurve],
    extra: &[Rational],
) -> Rational {
    let zero = Rational::zero();
    let in_range = |t: &Rational| *t >= zero && t <= hi;
    let mut base: Vec<Rational> = vec![zero.clone(), hi.clone()];
    base.extend(first_breaks.iter().filter(|t| in_range(t)).cloned());
    for curve in curves {
        base.extend(curve.breakpoints().map(|b| total - b).filter(|t| in_range(t)));
    }
    base.sort();
    base.dedup();

    let mut candidates = base.clone();
    candidates.extend(extra.iter().filter(|t| in_range(t)).cloned());
    for seg in base.windows(2) {
        let (a, b) = (&seg[0], &seg[1]);
        let ends: Vec<(Rational, Rational)> =
            curves.iter().map(|c| (c.eval(&(total - a)), c.eval(&(total - b)))).collect();
        for i in 0..ends.len() {
            for j in i + 1..ends.len() {
                let da = &ends[i].0 - &ends[j].0;
                let db = &ends[i].1 - &ends[j].1;
                let denom = &da - &db;
                if denom.is_zero() {
                    continue;
                }
                let t = a + (b - a) * &da / denom;
                if &t > a && &t < b {
                    candidates.push(t);
                }
            }
        }
    }
    candidates.sort();
    candidates.dedup();

    candidates
        .iter()
        .map(|t| {
            let rest = total - t;
            let second = curves.iter().map(|c| c.eval(&rest)).min().expect("at least one completion");
            first(t) + second
        })
        .max()
        .expect("candidate set is never empty")
}

fn check_cap(instance: &Instance, cap: usize) -> Result<usize, SolveError> {
    let n = instance.n();
    if n > cap || n > 63 {
        return Err(SolveError::CapExceeded { n, cap: cap.min(63) });
    }
    Ok(n)
}

fn require_kind(instance: &Instance, kind: UncertaintyKind) -> Result<(), SolveError> {
    if instance.kind != kind {
        return Err(SolveError::UnsupportedKind(instance.kind));
    }
    Ok(())
}

fn subset_sums(n: usize, values: &[Rational]) -> Vec<Rational> {
    let mut sums = vec![Rational::zero(); 1 << n];
    for mask in 1usize..1 << n {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = &sums[mask & (mask - 1)] + &values[low];
    }
    sums
}

/// Exact discrete two-stage value by full game-tree enumeration.
pub fn brute_rob_discrete(instance: &Instance) -> Result<Rational, SolveError> {
    brute_rob_discrete_capped(instance, DEFAULT_CAP)
}

pub fn brute_rob_discrete_capped(instance: &Instance, cap: usize) -> Result<Rational, SolveError> {
    require_kind(instance, UncertaintyKind::DiscreteBudget)?;
    let n = check_cap(instance, cap)?;
    let gamma = instance
        .integer_gamma()
        .ok_or_else(|| SolveError::PreconditionViolated("discrete budget must be an integer".into()))?;
    let costs = &instance.costs;
    let c_lo = subset_sums(n, &costs.c_lo);
    let c_inc = subset_sums(n, &costs.c_inc());
    let d_lo = subset_sums(n, &costs.d_lo);
    let d_inc = subset_sums(n, &costs.d_inc());
    // Attack sets grouped by size: attacks[b] holds every set of size <= b.
    let max_attack = gamma.min(n);
    let attacks: Vec<Vec<usize>> =
        (0..=max_attack).map(|b| (0usize..1 << n).filter(|s| s.count_ones() as usize <= b).collect()).collect();

    let mut best: Option<Rational> = None;
    for x in 0usize..1 << n {
        let completions: Vec<usize> =
            instance.nominal.members_containing(x as u64).into_iter().map(|z| z as usize & !x).collect();
        if completions.is_empty() {
            continue;
        }
        // Recourse value depends on x and the remaining budget only.
        let recourse: Vec<Rational> = (0..=gamma)
            .map(|rem| {
                let sets = &attacks[rem.min(max_attack)];
                completions
                    .iter()
                    .map(|&y| {
                        let worst = sets.iter().map(|&s| &d_inc[s & y]).max().expect("empty set");
                        &d_lo[y] + worst
                    })
                    .min()
                    .expect("non-empty completions")
            })
            .collect();
        let adv = attacks[max_attack]
            .iter()
            .map(|&s| &c_lo[x] + &c_inc[s & x] + &recourse[gamma - s.count_ones() as usize])
            .max()
            .expect("empty attack always present");
        if best.as_ref().is_none_or(|b| &adv < b) {
            best = Some(adv);
        }
    }
    best.ok_or_else(|| SolveError::infeasible("no first-stage set admits a completion"))
}

/// Continuous-budget adversarial value of one first-stage set, or `None`
/// when `x` has no completion.
pub fn adv_continuous_oracle(instance: &Instance, x: u64, extra: &[Rational]) -> Option<Rational> {
    let n = instance.n();
    let costs = &instance.costs;
    let c_inc = costs.c_inc();
    let d_inc = costs.d_inc();
    let members = instance.nominal.members_containing(x);
    if members.is_empty() {
        return None;
    }
    let in_x: Vec<usize> = (0..n).filter(|i| x >> i & 1 == 1).collect();
    let first = BudgetCurve::attack(
        in_x.iter().map(|&i| costs.c_lo[i].clone()).sum(),
        &in_x.iter().map(|&i| c_inc[i].clone()).collect::<Vec<_>>(),
    );
    let mut curves: Vec<BudgetCurve> = members
        .iter()
        .map(|&z| {
            let y: Vec<usize> = (0..n).filter(|i| (z & !x) >> i & 1 == 1).collect();
            BudgetCurve::attack(
                y.iter().map(|&i| costs.d_lo[i].clone()).sum(),
                &y.iter().map(|&i| d_inc[i].clone()).collect::<Vec<_>>(),
            )
        })
        .collect();
    curves.sort_by(|a, b| a.points.cmp(&b.points));
    curves.dedup();
    let gamma = &instance.gamma;
    let whole = gamma.floor().to_integer().to_i64().unwrap_or(0);
    let integer_points: Vec<Rational> = (0..=whole).map(int).collect();
    Some(max_over_split(gamma, gamma, |t| first.eval(t), &integer_points, &curves, extra))
}

/// Exact continuous two-stage value by first-stage enumeration and exact
/// breakpoint analysis of the budget split.
pub fn brute_rob_continuous(instance: &Instance) -> Result<Rational, SolveError> {
    brute_rob_continuous_capped(instance, DEFAULT_CAP, &[])
}

pub fn brute_rob_continuous_capped(
    instance: &Instance,
    cap: usize,
    extra: &[Rational],
) -> Result<Rational, SolveError> {
    require_kind(instance, UncertaintyKind::ContinuousBudget)?;
    let n = check_cap(instance, cap)?;
    (0u64..1 << n)
        .filter_map(|x| adv_continuous_oracle(instance, x, extra))
        .min()
        .ok_or_else(|| SolveError::infeasible("no first-stage set admits a completion"))
}

/// Exact value under the absolute-increase budget variant, without using
/// the two-nominal closed form.
pub fn brute_variant(instance: &Instance) -> Result<Rational, SolveError> {
    brute_variant_capped(instance, DEFAULT_CAP)
}

pub fn brute_variant_capped(instance: &Instance, cap: usize) -> Result<Rational, SolveError> {
    require_kind(instance, UncertaintyKind::VariantBudget)?;
    let n = check_cap(instance, cap)?;
    let costs = &instance.costs;
    let c_inc = costs.c_inc();
    let d_inc = costs.d_inc();
    let gamma = &instance.gamma;
    let mut best: Option<Rational> = None;
    for x in 0u64..1 << n {
        let members = instance.nominal.members_containing(x);
        if members.is_empty() {
            continue;
        }
        let in_x = |i: usize| x >> i & 1 == 1;
        let base_x: Rational = (0..n).filter(|&i| in_x(i)).map(|i| &costs.c_lo[i]).sum();
        let room: Rational = (0..n).filter(|&i| in_x(i)).map(|i| &c_inc[i]).sum();
        let hi = gamma.clone().min(room);
        let curves: Vec<BudgetCurve> = members
            .iter()
            .map(|&z| {
                let y = |i: usize| (z & !x) >> i & 1 == 1;
                let lo: Rational = (0..n).filter(|&i| y(i)).map(|i| &costs.d_lo[i]).sum();
                let cap_y: Rational = (0..n).filter(|&i| y(i)).map(|i| &d_inc[i]).sum();
                if cap_y.is_zero() {
                    BudgetCurve::from_points(vec![(Rational::zero(), lo)])
                } else {
                    let top = &lo + &cap_y;
                    BudgetCurve::from_points(vec![(Rational::zero(), lo), (cap_y, top)])
                }
            })
            .collect();
        let adv = max_over_split(gamma, &hi, |t| &base_x + t, &[], &curves, &[]);
        if best.as_ref().is_none_or(|b| &adv < b) {
            best = Some(adv);
        }
    }
    best.ok_or_else(|| SolveError::infeasible("no first-stage set admits a completion"))
}

/// Exact static value: every feasible solution, every split into first- and
/// second-stage items, worst attack on the combined increments.
pub fn brute_onestage(instance: &Instance) -> Result<Rational, SolveError> {
    brute_onestage_capped(instance, DEFAULT_CAP)
}

pub fn brute_onestage_capped(instance: &Instance, cap: usize) -> Result<Rational, SolveError> {
    let mode = match instance.kind {
        UncertaintyKind::DiscreteBudget => AttackMode::Discrete,
        UncertaintyKind::ContinuousBudget => AttackMode::Continuous,
        UncertaintyKind::VariantBudget => return Err(SolveError::UnsupportedKind(instance.kind)),
    };
    let n = check_cap(instance, cap)?;
    let costs = &instance.costs;
    let c_inc = costs.c_inc();
    let d_inc = costs.d_inc();
    let mut best: Option<Rational> = None;
    for z in instance.nominal.members_containing(0) {
        let items: Vec<usize> = (0..n).filter(|i| z >> i & 1 == 1).collect();
        for split in 0u64..1 << items.len() {
            let mut base = Vec::with_capacity(items.len());
            let mut incs = Vec::with_capacity(items.len());
            for (k, &i) in items.iter().enumerate() {
                if split >> k & 1 == 1 {
                    base.push(costs.c_lo[i].clone());
                    incs.push(c_inc[i].clone());
                } else {
                    base.push(costs.d_lo[i].clone());
                    incs.push(d_inc[i].clone());
                }
            }
            let v = attack_value(&base, &incs, &instance.gamma, mode);
            if best.as_ref().is_none_or(|b| &v < b) {
                best = Some(v);
            }
        }
    }
    best.ok_or_else(|| SolveError::infeasible("nominal problem has no solution"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::example3;
    use crate::num::frac;

    #[test]
    fn curve_evaluation() {
        let c = BudgetCurve::attack(int(1), &[int(4), int(9)]);
        assert_eq!(c.eval(&int(0)), int(1));
        assert_eq!(c.eval(&frac(1, 2)), frac(11, 2));
        assert_eq!(c.eval(&int(1)), int(10));
        assert_eq!(c.eval(&frac(3, 2)), int(12));
        assert_eq!(c.eval(&int(7)), int(14));
    }

    #[test]
    fn example3_discrete() {
        assert_eq!(brute_rob_discrete(&example3()).unwrap(), int(8));
        assert_eq!(brute_rob_discrete(&example3().with_gamma(int(0))).unwrap(), int(4));
    }

    #[test]
    fn example3_continuous() {
        let inst = example3().with_kind(UncertaintyKind::ContinuousBudget);
        assert_eq!(brute_rob_continuous(&inst).unwrap(), frac(79, 8));
        assert_eq!(brute_rob_continuous(&inst.with_gamma(int(0))).unwrap(), int(4));
        // x = {1} alone attains the optimum at the crossing γ' = 3/8.
        assert_eq!(adv_continuous_oracle(&inst, 0b001, &[]).unwrap(), frac(79, 8));
    }

    #[test]
    fn example3_variant() {
        let inst = example3().with_kind(UncertaintyKind::VariantBudget);
        assert_eq!(brute_variant(&inst).unwrap(), int(5));
        assert_eq!(brute_variant(&inst.with_gamma(int(0))).unwrap(), int(4));
    }

    #[test]
    fn example3_onestage() {
        assert_eq!(brute_onestage(&example3()).unwrap(), int(11));
        assert_eq!(brute_onestage(&example3().with_gamma(int(0))).unwrap(), int(4));
    }

    #[test]
    fn large_budget_with_flat_costs_is_nominal() {
        let mut inst = example3().with_gamma(int(5));
        inst.costs.c_hi = inst.costs.c_lo.clone();
        inst.costs.d_hi = inst.costs.d_lo.clone();
        assert_eq!(brute_rob_discrete(&inst).unwrap(), int(4));
    }

    #[test]
    fn cap_and_kind_checks() {
        let mut inst = example3();
        assert_eq!(brute_rob_discrete_capped(&inst, 2), Err(SolveError::CapExceeded { n: 3, cap: 2 }));
        assert!(matches!(brute_rob_continuous(&inst), Err(SolveError::UnsupportedKind(_))));
        inst.kind = UncertaintyKind::VariantBudget;
        assert!(matches!(brute_onestage(&inst), Err(SolveError::UnsupportedKind(_))));
    }
}

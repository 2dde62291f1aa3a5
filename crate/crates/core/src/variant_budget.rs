//! Closed form for the variant where `Γ` bounds the total absolute cost
//! increase: the adversary either absorbs the whole budget or is capped by
//! the upper costs, so two nominal solves suffice.

use std::time::Instant;

use crate::model::{nominal_solve, Instance, ItemSet, UncertaintyKind};
use crate::num::Rational;
use crate::report::{Certificate, Method, Provenance, SolveError, SolveReport, VariantBranch};

pub fn solve_variant(instance: &Instance) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    if instance.kind != UncertaintyKind::VariantBudget {
        return Err(SolveError::UnsupportedKind(instance.kind));
    }
    let c = &instance.costs;
    let lower: Vec<Rational> = c.c_lo.iter().zip(&c.d_lo).map(|(a, b)| a.min(b).clone()).collect();
    let upper: Vec<Rational> = c.c_hi.iter().zip(&c.d_hi).map(|(a, b)| a.min(b).clone()).collect();
    let none = ItemSet::empty();
    let (lo_val, lo_sol) = nominal_solve(&instance.nominal, &lower, &none, &none)?;
    let (up_val, up_sol) = nominal_solve(&instance.nominal, &upper, &none, &none)?;
    let lo_val = lo_val + &instance.gamma;

    let (value, sol, branch, first) = if up_val <= lo_val {
        (up_val, up_sol, VariantBranch::Upper, &c.c_hi)
    } else {
        (lo_val, lo_sol, VariantBranch::LowerPlusBudget, &c.c_lo)
    };
    let picked = if branch == VariantBranch::Upper { &upper } else { &lower };
    Ok(SolveReport {
        value,
        witness_x: ItemSet::new(sol.iter().filter(|&i| first[i] == picked[i])),
        method: Method::Variant,
        provenance: Provenance::Variant { branch },
        certificate: Certificate::Exact,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::example3;
    use crate::num::int;

    fn variant(gamma: i64) -> Instance {
        example3().with_kind(UncertaintyKind::VariantBudget).with_gamma(int(gamma))
    }

    #[test]
    fn example3_branches() {
        let r = solve_variant(&variant(1)).unwrap();
        assert_eq!(r.value, int(5));
        assert_eq!(r.provenance, Provenance::Variant { branch: VariantBranch::LowerPlusBudget });
        assert_eq!(solve_variant(&variant(0)).unwrap().value, int(4));
        let r = solve_variant(&variant(10)).unwrap();
        assert_eq!(r.value, int(12));
        assert_eq!(r.provenance, Provenance::Variant { branch: VariantBranch::Upper });
    }

    #[test]
    fn tie_goes_to_upper_branch() {
        // 4 + 8 = 12 = upper value.
        let r = solve_variant(&variant(8)).unwrap();
        assert_eq!(r.value, int(12));
        assert_eq!(r.provenance, Provenance::Variant { branch: VariantBranch::Upper });
    }

    #[test]
    fn saturates_in_gamma() {
        let values: Vec<Rational> = (0..15).map(|g| solve_variant(&variant(g)).unwrap().value).collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
        assert!(values[8..].iter().all(|v| *v == int(12)));
    }
}

//! Text export of the compact mixed-integer models in LP file format.
//!
//! Every row is multiplied by the least common multiple of its coefficient
//! denominators, so all printed coefficients are exact integers. The
//! objective of the static model is scaled the same way and the factor is
//! stated in a comment.

use std::fmt::Write;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::model::{Instance, NominalProblem, UncertaintyKind};
use crate::num::{common_denominator, int, Rational};
use crate::report::SolveError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpModel {
    TwoStage,
    Static,
}

type Terms = Vec<(Rational, String)>;

/// Scales `terms` and `rhs` to integers and renders `lhs sense rhs`.
fn row(terms: &Terms, sense: &str, rhs: &Rational) -> String {
    let scale = common_denominator(terms.iter().map(|(c, _)| c).chain([rhs]));
    let scale = Rational::from_integer(scale);
    let mut out = String::new();
    for (c, var) in terms.iter().filter(|(c, _)| !c.is_zero()) {
        let v = (c * &scale).to_integer();
        let sign = if v.is_negative() { "-" } else { "+" };
        let mag = v.abs();
        if out.is_empty() {
            out.push_str(if v.is_negative() { "- " } else { "" });
        } else {
            write!(out, " {sign} ").expect("string write");
        }
        if mag.is_one() {
            out.push_str(var);
        } else {
            write!(out, "{mag} {var}").expect("string write");
        }
    }
    if out.is_empty() {
        out.push_str("0 t");
    }
    let rhs: BigInt = (rhs * &scale).to_integer();
    format!("{out} {sense} {rhs}")
}

fn nominal_rows(out: &mut String, nominal: &NominalProblem, tag: &str, vars: impl Fn(usize) -> Vec<String>) {
    let one = Rational::one();
    match nominal {
        NominalProblem::Selection { n, p } => {
            let terms: Terms = (0..*n).flat_map(&vars).map(|v| (one.clone(), v)).collect();
            writeln!(out, " nom{tag}: {}", row(&terms, "=", &int(*p as i64))).expect("string write");
        }
        NominalProblem::RepSelection { parts } => {
            for (j, part) in parts.iter().enumerate() {
                let terms: Terms = part.iter().flat_map(|&i| vars(i)).map(|v| (one.clone(), v)).collect();
                writeln!(out, " nom{tag}_{}: {}", j + 1, row(&terms, "=", &one)).expect("string write");
            }
        }
    }
}

fn binaries(out: &mut String, names: &[String]) {
    out.push_str("Binaries\n");
    for chunk in names.chunks(8) {
        writeln!(out, " {}", chunk.join(" ")).expect("string write");
    }
}

fn two_stage(instance: &Instance) -> Result<String, SolveError> {
    if instance.kind != UncertaintyKind::DiscreteBudget {
        return Err(SolveError::UnsupportedKind(instance.kind));
    }
    let gamma = instance
        .integer_gamma()
        .ok_or_else(|| SolveError::PreconditionViolated("discrete budget must be an integer".into()))?;
    let n = instance.n();
    let c = &instance.costs;
    let (c_inc, d_inc) = (c.c_inc(), c.d_inc());
    let one = Rational::one();
    let x = |i: usize| format!("x_{}", i + 1);
    let y = |g: usize, i: usize| format!("y_{g}_{}", i + 1);

    let mut out = String::new();
    writeln!(out, "\\ two-stage model: n={n}, gamma={gamma}").expect("string write");
    out.push_str("Minimize\n obj: t\nSubject To\n");
    for g in 0..=gamma {
        let mut terms: Terms = vec![(one.clone(), "t".into())];
        terms.push((-int((gamma - g) as i64), format!("kappa_{g}")));
        terms.extend((0..n).map(|i| (-one.clone(), format!("rho2_{g}_{}", i + 1))));
        terms.extend((0..n).map(|i| (-c.d_lo[i].clone(), y(g, i))));
        terms.push((-int(g as i64), format!("pi_{g}")));
        terms.extend((0..n).map(|i| (-one.clone(), format!("rho_{g}_{}", i + 1))));
        terms.extend((0..n).map(|i| (-c.c_lo[i].clone(), x(i))));
        writeln!(out, " value_{g}: {}", row(&terms, ">=", &Rational::zero())).expect("string write");
    }
    for g in 0..=gamma {
        nominal_rows(&mut out, &instance.nominal, &format!("_{g}"), |i| vec![x(i), y(g, i)]);
    }
    for g in 0..=gamma {
        for i in 0..n {
            let terms = vec![(one.clone(), x(i)), (one.clone(), y(g, i))];
            writeln!(out, " link_{g}_{}: {}", i + 1, row(&terms, "<=", &one)).expect("string write");
        }
    }
    for g in 0..=gamma {
        for (i, inc) in d_inc.iter().enumerate() {
            let terms = vec![
                (one.clone(), format!("kappa_{g}")),
                (one.clone(), format!("rho2_{g}_{}", i + 1)),
                (-inc.clone(), y(g, i)),
            ];
            writeln!(out, " second_{g}_{}: {}", i + 1, row(&terms, ">=", &Rational::zero())).expect("string write");
        }
    }
    for g in 0..=gamma {
        for (i, inc) in c_inc.iter().enumerate() {
            let terms = vec![
                (one.clone(), format!("pi_{g}")),
                (one.clone(), format!("rho_{g}_{}", i + 1)),
                (-inc.clone(), x(i)),
            ];
            writeln!(out, " first_{g}_{}: {}", i + 1, row(&terms, ">=", &Rational::zero())).expect("string write");
        }
    }
    out.push_str("Bounds\n t free\n");
    let mut bins: Vec<String> = (0..n).map(x).collect();
    for g in 0..=gamma {
        bins.extend((0..n).map(|i| y(g, i)));
    }
    binaries(&mut out, &bins);
    out.push_str("End\n");
    Ok(out)
}

fn static_model(instance: &Instance) -> Result<String, SolveError> {
    if instance.kind == UncertaintyKind::VariantBudget {
        return Err(SolveError::UnsupportedKind(instance.kind));
    }
    let n = instance.n();
    let c = &instance.costs;
    let (c_inc, d_inc) = (c.c_inc(), c.d_inc());
    let one = Rational::one();
    let x = |i: usize| format!("x_{}", i + 1);
    let y = |i: usize| format!("y_{}", i + 1);

    let mut obj: Terms = Vec::new();
    for i in 0..n {
        obj.push((c.c_lo[i].clone(), x(i)));
        obj.push((c.d_lo[i].clone(), y(i)));
    }
    obj.push((instance.gamma.clone(), "pi".into()));
    obj.extend((0..n).map(|i| (one.clone(), format!("rho_{}", i + 1))));
    let scale = common_denominator(obj.iter().map(|(v, _)| v));

    let mut out = String::new();
    writeln!(out, "\\ static model: n={n}, gamma={}", crate::num::format_rational(&instance.gamma))
        .expect("string write");
    if !scale.is_one() {
        writeln!(out, "\\ objective scaled by {scale}").expect("string write");
    }
    let rendered = row(&obj, ">=", &Rational::zero());
    let expr = rendered.rsplit_once(" >=").map_or(rendered.as_str(), |(e, _)| e);
    writeln!(out, "Minimize\n obj: {expr}\nSubject To").expect("string write");
    nominal_rows(&mut out, &instance.nominal, "", |i| vec![x(i), y(i)]);
    for i in 0..n {
        let terms = vec![
            (one.clone(), "pi".to_string()),
            (one.clone(), format!("rho_{}", i + 1)),
            (-c_inc[i].clone(), x(i)),
            (-d_inc[i].clone(), y(i)),
        ];
        writeln!(out, " dev_{}: {}", i + 1, row(&terms, ">=", &Rational::zero())).expect("string write");
    }
    for i in 0..n {
        let terms = vec![(one.clone(), x(i)), (one.clone(), y(i))];
        writeln!(out, " link_{}: {}", i + 1, row(&terms, "<=", &one)).expect("string write");
    }
    let mut bins: Vec<String> = (0..n).map(x).collect();
    bins.extend((0..n).map(y));
    binaries(&mut out, &bins);
    out.push_str("End\n");
    Ok(out)
}

pub fn emit_milp(instance: &Instance, model: MilpModel) -> Result<String, SolveError> {
    match model {
        MilpModel::TwoStage => two_stage(instance),
        MilpModel::Static => static_model(instance),
    }
}

/// Counts read back from emitted text, for structural checks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LpSummary {
    pub binaries: usize,
    /// Constraint count per name prefix (`value`, `nom`, `link`, ...).
    pub rows: std::collections::BTreeMap<String, usize>,
    pub variables: std::collections::BTreeSet<String>,
}

pub fn summarize_lp(text: &str) -> LpSummary {
    let mut s = LpSummary::default();
    let mut section = "";
    for line in text.lines() {
        let t = line.trim();
        match t {
            "Minimize" | "Subject To" | "Bounds" | "Binaries" | "End" => {
                section = t;
                continue;
            }
            _ if t.starts_with('\\') || t.is_empty() => continue,
            _ => {}
        }
        match section {
            "Subject To" => {
                let (name, body) = t.split_once(':').expect("named row");
                let prefix = name.split('_').next().unwrap_or(name).to_string();
                *s.rows.entry(prefix).or_default() += 1;
                s.variables.extend(
                    body.split_whitespace()
                        .filter(|w| w.chars().next().is_some_and(|c| c.is_ascii_alphabetic()))
                        .map(str::to_string),
                );
            }
            "Binaries" => s.binaries += t.split_whitespace().count(),
            _ => {}
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::example3;
    use crate::num::frac;

    #[test]
    fn example3_counts() {
        let text = emit_milp(&example3(), MilpModel::TwoStage).unwrap();
        let s = summarize_lp(&text);
        assert_eq!(s.binaries, 9);
        assert_eq!(s.rows["value"], 2);
        assert_eq!(s.rows["nom"], 2);
        assert_eq!(s.rows["link"], 6);
        assert_eq!(s.rows["second"], 6);
        assert_eq!(s.rows["first"], 6);
        assert_eq!(text, emit_milp(&example3(), MilpModel::TwoStage).unwrap());
        assert!(text.contains(" value_0: t - kappa_0 - rho2_0_1"));
        assert!(text.contains(" first_1_2: pi_1 + rho_1_2 - 9 x_2 >= 0"));
    }

    #[test]
    fn static_text() {
        let text = emit_milp(&example3(), MilpModel::Static).unwrap();
        assert!(text.contains(" obj: 3 x_1 + 3 y_1 + x_2 + y_2 + 4 x_3 + 4 y_3 + pi + rho_1 + rho_2 + rho_3\n"));
        assert!(text.contains(" nom: x_1 + y_1 + x_2 + y_2 + x_3 + y_3 = 2"));
        assert!(text.contains(" dev_2: pi + rho_2 - 9 x_2 - 9 y_2 >= 0"));
        assert_eq!(summarize_lp(&text).binaries, 6);
    }

    #[test]
    fn fractional_rows_are_scaled() {
        let mut inst = example3();
        inst.costs.c_hi[0] = frac(15, 2);
        let text = emit_milp(&inst, MilpModel::TwoStage).unwrap();
        assert!(text.contains(" first_0_1: 2 pi_0 + 2 rho_0_1 - 9 x_1 >= 0"));
        let text =
            emit_milp(&inst.with_gamma(frac(1, 3)).with_kind(UncertaintyKind::ContinuousBudget), MilpModel::Static)
                .unwrap();
        assert!(text.contains("\\ objective scaled by 3"));
    }

    #[test]
    fn two_stage_needs_discrete() {
        let inst = example3().with_kind(UncertaintyKind::ContinuousBudget);
        assert!(matches!(emit_milp(&inst, MilpModel::TwoStage), Err(SolveError::UnsupportedKind(_))));
    }
}

//! Problem instances, nominal-problem oracles, validation and JSON I/O.
//!
//! Items are contiguous `0..n` internally. Everything that faces a user
//! (JSON, violation messages, reports) uses 1-based indices.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::num::{format_rational, parse_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    /// No member of the nominal solution set satisfies the request.
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("forced_in and forced_out overlap at item {0}")]
    ConflictingForcing(usize),
    #[error("item index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("bad value for field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("missing field `{0}`")]
    Schema(String),
    #[error("invalid instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// A subset of `0..n`, kept sorted and duplicate-free.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemSet(Vec<usize>);

impl ItemSet {
    pub fn empty() -> Self {
        ItemSet(Vec::new())
    }

    pub fn new(items: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = items.into_iter().collect();
        ItemSet(set.into_iter().collect())
    }

    /// Builds a set from 1-based indices.
    pub fn from_one_based(items: impl IntoIterator<Item = usize>) -> Self {
        Self::new(items.into_iter().map(|i| {
            assert!(i >= 1, "1-based item index must be positive");
            i - 1
        }))
    }

    pub fn from_mask(mask: u64) -> Self {
        ItemSet((0..64).filter(|i| mask >> i & 1 == 1).collect())
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &i| {
            assert!(i < 64, "item set too large for a 64-bit mask");
            m | 1 << i
        })
    }

    pub fn contains(&self, item: usize) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn union(&self, other: &ItemSet) -> ItemSet {
        ItemSet::new(self.iter().chain(other.iter()))
    }

    pub fn difference(&self, other: &ItemSet) -> ItemSet {
        ItemSet(self.iter().filter(|i| !other.contains(*i)).collect())
    }

    pub fn is_disjoint(&self, other: &ItemSet) -> bool {
        self.iter().all(|i| !other.contains(i))
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// The underlying deterministic combinatorial problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NominalProblem {
    /// Pick exactly `p` of `n` items.
    Selection { n: usize, p: usize },
    /// Pick exactly one item from each part (0-based indices).
    RepSelection { parts: Vec<Vec<usize>> },
}

impl NominalProblem {
    pub fn item_count(&self) -> usize {
        match self {
            NominalProblem::Selection { n, .. } => *n,
            NominalProblem::RepSelection { parts } => parts.iter().map(Vec::len).sum(),
        }
    }

    /// Number of items in every feasible solution (`p` or the number of parts).
    pub fn solution_size(&self) -> usize {
        match self {
            NominalProblem::Selection { p, .. } => *p,
            NominalProblem::RepSelection { parts } => parts.len(),
        }
    }

    /// Part index of every item (RepSelection only).
    pub fn part_of(&self) -> Option<Vec<usize>> {
        match self {
            NominalProblem::Selection { .. } => None,
            NominalProblem::RepSelection { parts } => {
                let mut owner = vec![usize::MAX; self.item_count()];
                for (j, part) in parts.iter().enumerate() {
                    for &i in part {
                        if i < owner.len() {
                            owner[i] = j;
                        }
                    }
                }
                Some(owner)
            }
        }
    }

    pub fn is_feasible(&self, solution: &ItemSet) -> bool {
        match self {
            NominalProblem::Selection { n, p } => solution.len() == *p && solution.iter().all(|i| i < *n),
            NominalProblem::RepSelection { parts } => {
                solution.len() == parts.len()
                    && parts.iter().all(|part| part.iter().filter(|&&i| solution.contains(i)).count() == 1)
            }
        }
    }

    /// Whether `x` can be completed to a feasible solution at all.
    pub fn admits_subset(&self, x: &ItemSet) -> bool {
        match self {
            NominalProblem::Selection { n, p } => x.len() <= *p && x.iter().all(|i| i < *n),
            NominalProblem::RepSelection { parts } => {
                parts.iter().all(|part| part.iter().filter(|&&i| x.contains(i)).count() <= 1)
            }
        }
    }

    /// Every feasible solution containing `forced_in`, as bitmasks, in
    /// increasing mask order. Exponential; meant for small `n`.
    pub fn members_containing(&self, forced_in: u64) -> Vec<u64> {
        let n = self.item_count();
        assert!(n <= 63, "enumeration limited to 63 items");
        let mut out = Vec::new();
        match self {
            NominalProblem::Selection { p, .. } => {
                let need = *p as i64 - forced_in.count_ones() as i64;
                if need < 0 {
                    return out;
                }
                let free: Vec<usize> = (0..n).filter(|i| forced_in >> i & 1 == 0).collect();
                for_each_combination(free.len(), need as usize, |combo| {
                    let mask = combo.iter().fold(forced_in, |m, &k| m | 1 << free[k]);
                    out.push(mask);
                });
            }
            NominalProblem::RepSelection { parts } => {
                let mut choices: Vec<Vec<usize>> = Vec::with_capacity(parts.len());
                for part in parts {
                    let forced: Vec<usize> = part.iter().copied().filter(|i| forced_in >> i & 1 == 1).collect();
                    match forced.len() {
                        0 => choices.push(part.clone()),
                        1 => choices.push(forced),
                        _ => return out,
                    }
                }
                let mut stack = vec![(0usize, 0u64)];
                while let Some((depth, mask)) = stack.pop() {
                    if depth == choices.len() {
                        out.push(mask);
                        continue;
                    }
                    for &i in choices[depth].iter().rev() {
                        stack.push((depth + 1, mask | 1 << i));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] < n - k + pos {
                break;
            }
            if pos == 0 {
                return;
            }
        }
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Lower/upper costs for both stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostProfile {
    pub c_lo: Vec<Rational>,
    pub c_hi: Vec<Rational>,
    pub d_lo: Vec<Rational>,
    pub d_hi: Vec<Rational>,
}

impl CostProfile {
    pub fn len(&self) -> usize {
        self.c_lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c_lo.is_empty()
    }

    pub fn c_inc(&self) -> Vec<Rational> {
        self.c_hi.iter().zip(&self.c_lo).map(|(h, l)| h - l).collect()
    }

    pub fn d_inc(&self) -> Vec<Rational> {
        self.d_hi.iter().zip(&self.d_lo).map(|(h, l)| h - l).collect()
    }

    /// Adds `s` to every entry of all four vectors.
    pub fn shifted(&self, s: &Rational) -> CostProfile {
        let add = |v: &Vec<Rational>| v.iter().map(|x| x + s).collect();
        CostProfile { c_lo: add(&self.c_lo), c_hi: add(&self.c_hi), d_lo: add(&self.d_lo), d_hi: add(&self.d_hi) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UncertaintyKind {
    ContinuousBudget,
    DiscreteBudget,
    VariantBudget,
}

impl UncertaintyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            UncertaintyKind::ContinuousBudget => "continuous",
            UncertaintyKind::DiscreteBudget => "discrete",
            UncertaintyKind::VariantBudget => "variant",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "continuous" => Some(UncertaintyKind::ContinuousBudget),
            "discrete" => Some(UncertaintyKind::DiscreteBudget),
            "variant" => Some(UncertaintyKind::VariantBudget),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub nominal: NominalProblem,
    pub costs: CostProfile,
    pub gamma: Rational,
    pub kind: UncertaintyKind,
    /// Allows negative base costs (hardness gadgets).
    pub signed_costs: bool,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.costs.len()
    }

    pub fn with_gamma(&self, gamma: Rational) -> Instance {
        Instance { gamma, ..self.clone() }
    }

    pub fn with_kind(&self, kind: UncertaintyKind) -> Instance {
        Instance { kind, ..self.clone() }
    }

    /// Budget as an integer, when it is one.
    pub fn integer_gamma(&self) -> Option<usize> {
        use num_traits::ToPrimitive;
        if self.gamma.is_integer() && !self.gamma.is_negative() {
            self.gamma.to_integer().to_usize()
        } else {
            None
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    /// Returns the instance back if it has no violations.
    pub fn checked(self) -> Result<Instance, ModelError> {
        let v = validate(&self);
        if v.is_empty() {
            Ok(self)
        } else {
            Err(ModelError::Invalid(v))
        }
    }
}

/// One violated instance invariant. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    LengthMismatch { field: &'static str, expected: usize, found: usize },
    NegativeIncrement { stage: &'static str, item: usize },
    NegativeCost { field: &'static str, item: usize },
    CardinalityOutOfRange { p: usize, n: usize },
    EmptyPart { part: usize },
    PartIndexOutOfRange { part: usize, item: usize },
    DuplicateItem { item: usize },
    UncoveredItem { item: usize },
    NegativeBudget,
    NonIntegerBudget,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LengthMismatch { field, expected, found } => {
                write!(f, "{field} has length {found}, expected {expected}")
            }
            Violation::NegativeIncrement { stage, item } => {
                write!(f, "increment negative at i={item} ({stage} stage)")
            }
            Violation::NegativeCost { field, item } => {
                write!(f, "negative cost in {field} at i={item}")
            }
            Violation::CardinalityOutOfRange { p, n } => {
                write!(f, "selection cardinality p={p} outside 1..={n}")
            }
            Violation::EmptyPart { part } => write!(f, "part {part} is empty"),
            Violation::PartIndexOutOfRange { part, item } => {
                write!(f, "part {part} names item {item}, which does not exist")
            }
            Violation::DuplicateItem { item } => write!(f, "item {item} appears in two parts"),
            Violation::UncoveredItem { item } => write!(f, "item {item} belongs to no part"),
            Violation::NegativeBudget => write!(f, "gamma is negative"),
            Violation::NonIntegerBudget => write!(f, "discrete budget must be an integer"),
        }
    }
}

pub fn validate(instance: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let costs = &instance.costs;
    let n = costs.c_lo.len();
    for (field, v) in [("c_hi", &costs.c_hi), ("d_lo", &costs.d_lo), ("d_hi", &costs.d_hi)] {
        if v.len() != n {
            out.push(Violation::LengthMismatch { field, expected: n, found: v.len() });
        }
    }
    let m = [costs.c_hi.len(), costs.d_lo.len(), costs.d_hi.len(), n].into_iter().min().unwrap_or(0);
    for i in 0..m {
        if costs.c_hi[i] < costs.c_lo[i] {
            out.push(Violation::NegativeIncrement { stage: "first", item: i + 1 });
        }
        if costs.d_hi[i] < costs.d_lo[i] {
            out.push(Violation::NegativeIncrement { stage: "second", item: i + 1 });
        }
    }
    if !instance.signed_costs {
        for (field, v) in [("c_lo", &costs.c_lo), ("d_lo", &costs.d_lo)] {
            for (i, x) in v.iter().enumerate() {
                if x.is_negative() {
                    out.push(Violation::NegativeCost { field, item: i + 1 });
                }
            }
        }
    }
    match &instance.nominal {
        NominalProblem::Selection { n: items, p } => {
            if *items != n {
                out.push(Violation::LengthMismatch { field: "c_lo", expected: *items, found: n });
            }
            if *p < 1 || p > items {
                out.push(Violation::CardinalityOutOfRange { p: *p, n: *items });
            }
        }
        NominalProblem::RepSelection { parts } => {
            let mut seen = vec![false; n];
            for (j, part) in parts.iter().enumerate() {
                if part.is_empty() {
                    out.push(Violation::EmptyPart { part: j + 1 });
                }
                for &i in part {
                    if i >= n {
                        out.push(Violation::PartIndexOutOfRange { part: j + 1, item: i + 1 });
                    } else if seen[i] {
                        out.push(Violation::DuplicateItem { item: i + 1 });
                    } else {
                        seen[i] = true;
                    }
                }
            }
            for (i, s) in seen.iter().enumerate() {
                if !s {
                    out.push(Violation::UncoveredItem { item: i + 1 });
                }
            }
        }
    }
    if instance.gamma.is_negative() {
        out.push(Violation::NegativeBudget);
    }
    if instance.kind == UncertaintyKind::DiscreteBudget && !instance.gamma.is_integer() {
        out.push(Violation::NonIntegerBudget);
    }
    out
}

/// Minimizes `weights` over the nominal solutions that contain `forced_in`
/// and avoid `forced_out`. Ties go to the lowest index.
pub fn nominal_solve(
    problem: &NominalProblem,
    weights: &[Rational],
    forced_in: &ItemSet,
    forced_out: &ItemSet,
) -> Result<(Rational, ItemSet), ModelError> {
    let n = problem.item_count();
    if let Some(i) = forced_in.iter().chain(forced_out.iter()).find(|&i| i >= n) {
        return Err(ModelError::IndexOutOfRange(i + 1));
    }
    if let Some(i) = forced_in.iter().find(|&i| forced_out.contains(i)) {
        return Err(ModelError::ConflictingForcing(i + 1));
    }
    match problem {
        NominalProblem::Selection { p, .. } => {
            if forced_in.len() > *p {
                return Err(ModelError::Infeasible(format!("{} forced items exceed p={p}", forced_in.len())));
            }
            let mut free: Vec<usize> = (0..n).filter(|&i| !forced_in.contains(i) && !forced_out.contains(i)).collect();
            let need = p - forced_in.len();
            if free.len() < need {
                return Err(ModelError::Infeasible(format!(
                    "only {} selectable items for {need} open slots",
                    free.len()
                )));
            }
            free.sort_by(|&a, &b| weights[a].cmp(&weights[b]).then(a.cmp(&b)));
            let chosen = ItemSet::new(forced_in.iter().chain(free[..need].iter().copied()));
            let value = chosen.iter().map(|i| &weights[i]).sum();
            Ok((value, chosen))
        }
        NominalProblem::RepSelection { parts } => {
            let mut chosen = Vec::with_capacity(parts.len());
            let mut value = Rational::zero();
            for (j, part) in parts.iter().enumerate() {
                let forced: Vec<usize> = part.iter().copied().filter(|&i| forced_in.contains(i)).collect();
                let pick = match forced.as_slice() {
                    [i] => *i,
                    [] => part
                        .iter()
                        .copied()
                        .filter(|&i| !forced_out.contains(i))
                        .min_by(|&a, &b| weights[a].cmp(&weights[b]).then(a.cmp(&b)))
                        .ok_or_else(|| ModelError::Infeasible(format!("part {} fully forced out", j + 1)))?,
                    _ => return Err(ModelError::Infeasible(format!("two forced items in part {}", j + 1))),
                };
                value += &weights[pick];
                chosen.push(pick);
            }
            Ok((value, ItemSet::new(chosen)))
        }
    }
}

fn rational_json(v: &Rational) -> Value {
    use num_traits::ToPrimitive;
    match v.is_integer().then(|| v.to_integer().to_i64()).flatten() {
        Some(i) => json!(i),
        None => Value::String(format_rational(v)),
    }
}

/// Serializes an instance to the documented JSON schema (1-based parts).
pub fn write_instance(instance: &Instance) -> String {
    let problem = match &instance.nominal {
        NominalProblem::Selection { n, p } => json!({"type": "selection", "n": n, "p": p}),
        NominalProblem::RepSelection { parts } => {
            let parts: Vec<Vec<usize>> = parts.iter().map(|part| part.iter().map(|i| i + 1).collect()).collect();
            json!({"type": "rep_selection", "parts": parts})
        }
    };
    let vec = |v: &Vec<Rational>| Value::Array(v.iter().map(rational_json).collect());
    let mut obj = Map::new();
    obj.insert("problem".into(), problem);
    obj.insert("gamma".into(), rational_json(&instance.gamma));
    obj.insert("kind".into(), Value::String(instance.kind.as_str().into()));
    obj.insert("c_lo".into(), vec(&instance.costs.c_lo));
    obj.insert("c_hi".into(), vec(&instance.costs.c_hi));
    obj.insert("d_lo".into(), vec(&instance.costs.d_lo));
    obj.insert("d_hi".into(), vec(&instance.costs.d_hi));
    if instance.signed_costs {
        obj.insert("signed_costs".into(), Value::Bool(true));
    }
    serde_json::to_string_pretty(&Value::Object(obj)).expect("instance JSON is always encodable")
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value, ModelError> {
    obj.get(name).ok_or_else(|| ModelError::Schema(name.to_string()))
}

fn field_error(name: &str, message: impl Into<String>) -> ModelError {
    ModelError::Field { field: name.to_string(), message: message.into() }
}

/// Reads a JSON number or a `"num/den"` string exactly.
pub fn parse_exact(value: &Value, name: &str) -> Result<Rational, ModelError> {
    let text = match value {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => return Err(field_error(name, format!("expected number, got {other}"))),
    };
    parse_rational(&text).map_err(|e| field_error(name, e.to_string()))
}

fn parse_usize(value: &Value, name: &str) -> Result<usize, ModelError> {
    value
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| field_error(name, format!("expected non-negative integer, got {value}")))
}

fn parse_vector(obj: &Map<String, Value>, name: &str) -> Result<Vec<Rational>, ModelError> {
    let arr = field(obj, name)?.as_array().ok_or_else(|| field_error(name, "expected an array"))?;
    arr.iter().enumerate().map(|(i, v)| parse_exact(v, &format!("{name}[{}]", i + 1))).collect()
}

/// Parses the JSON instance schema. Numbers are read exactly.
pub fn read_instance(text: &str) -> Result<Instance, ModelError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = root.as_object().ok_or_else(|| field_error("<root>", "expected a JSON object"))?;
    let problem = field(obj, "problem")?.as_object().ok_or_else(|| field_error("problem", "expected an object"))?;
    let ty = field(problem, "type")?.as_str().ok_or_else(|| field_error("type", "expected a string"))?;
    let nominal = match ty {
        "selection" => NominalProblem::Selection {
            n: parse_usize(field(problem, "n")?, "n")?,
            p: parse_usize(field(problem, "p")?, "p")?,
        },
        "rep_selection" => {
            let parts = field(problem, "parts")?
                .as_array()
                .ok_or_else(|| field_error("parts", "expected an array of arrays"))?;
            let parts = parts
                .iter()
                .map(|part| {
                    part.as_array()
                        .ok_or_else(|| field_error("parts", "expected an array of arrays"))?
                        .iter()
                        .map(|i| match parse_usize(i, "parts")? {
                            0 => Err(field_error("parts", "item indices are 1-based")),
                            k => Ok(k - 1),
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            NominalProblem::RepSelection { parts }
        }
        other => return Err(field_error("type", format!("unknown problem type {other:?}"))),
    };
    let gamma = parse_exact(field(obj, "gamma")?, "gamma")?;
    let kind_text = field(obj, "kind")?.as_str().ok_or_else(|| field_error("kind", "expected a string"))?;
    let kind =
        UncertaintyKind::parse(kind_text).ok_or_else(|| field_error("kind", format!("unknown kind {kind_text:?}")))?;
    let costs = CostProfile {
        c_lo: parse_vector(obj, "c_lo")?,
        c_hi: parse_vector(obj, "c_hi")?,
        d_lo: parse_vector(obj, "d_lo")?,
        d_hi: parse_vector(obj, "d_hi")?,
    };
    let signed_costs = match obj.get("signed_costs") {
        None => false,
        Some(v) => v.as_bool().ok_or_else(|| field_error("signed_costs", "expected a boolean"))?,
    };
    Ok(Instance { nominal, costs, gamma, kind, signed_costs })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::num::int;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    /// Three items, pick two, one unit of budget, equal stage costs.
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

    pub fn costs(c_lo: &[i64], c_hi: &[i64], d_lo: &[i64], d_hi: &[i64]) -> CostProfile {
        CostProfile { c_lo: ints(c_lo), c_hi: ints(c_hi), d_lo: ints(d_lo), d_hi: ints(d_hi) }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::example3;
    use super::*;
    use crate::num::{frac, int};
    use proptest::prelude::*;

    fn w(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn example3_is_valid() {
        assert!(validate(&example3()).is_empty());
    }

    #[test]
    fn negative_increment_is_reported() {
        let mut inst = example3();
        inst.nominal = NominalProblem::Selection { n: 1, p: 1 };
        inst.costs = fixtures::costs(&[5], &[3], &[1], &[1]);
        let v = validate(&inst);
        assert_eq!(v, vec![Violation::NegativeIncrement { stage: "first", item: 1 }]);
        assert_eq!(v[0].to_string(), "increment negative at i=1 (first stage)");
    }

    #[test]
    fn negative_cost_needs_flag() {
        let mut inst = example3().with_kind(UncertaintyKind::ContinuousBudget);
        inst.costs.c_lo[0] = int(-1);
        let v = validate(&inst);
        assert_eq!(v, vec![Violation::NegativeCost { field: "c_lo", item: 1 }]);
        inst.signed_costs = true;
        assert!(validate(&inst).is_empty());
    }

    #[test]
    fn structural_violations() {
        let mut inst = example3();
        inst.nominal = NominalProblem::RepSelection { parts: vec![vec![0, 1], vec![1], vec![]] };
        inst.gamma = frac(1, 2);
        let v = validate(&inst);
        assert!(v.contains(&Violation::DuplicateItem { item: 2 }));
        assert!(v.contains(&Violation::EmptyPart { part: 3 }));
        assert!(v.contains(&Violation::UncoveredItem { item: 3 }));
        assert!(v.contains(&Violation::NonIntegerBudget));
        inst.nominal = NominalProblem::Selection { n: 3, p: 4 };
        inst.gamma = int(-1);
        let v = validate(&inst);
        assert!(v.contains(&Violation::CardinalityOutOfRange { p: 4, n: 3 }));
        assert!(v.contains(&Violation::NegativeBudget));
    }

    #[test]
    fn selection_picks_two_smallest() {
        let p = NominalProblem::Selection { n: 3, p: 2 };
        let (v, s) = nominal_solve(&p, &w(&[3, 1, 4]), &ItemSet::empty(), &ItemSet::empty()).unwrap();
        assert_eq!(v, int(4));
        assert_eq!(s, ItemSet::from_one_based([1, 2]));
        let (v, s) = nominal_solve(&p, &w(&[3, 1, 4]), &ItemSet::empty(), &ItemSet::from_one_based([2])).unwrap();
        assert_eq!(v, int(7));
        assert_eq!(s, ItemSet::from_one_based([1, 3]));
    }

    #[test]
    fn rep_selection_per_part_minimum_lowest_index() {
        let p = NominalProblem::RepSelection { parts: vec![vec![0, 1], vec![2, 3]] };
        let (v, s) = nominal_solve(&p, &w(&[5, 2, 9, 9]), &ItemSet::empty(), &ItemSet::empty()).unwrap();
        assert_eq!(v, int(11));
        assert_eq!(s, ItemSet::from_one_based([2, 3]));
    }

    #[test]
    fn infeasible_forcings() {
        let rep = NominalProblem::RepSelection { parts: vec![vec![0, 1], vec![2, 3]] };
        let weights = w(&[1, 1, 1, 1]);
        assert!(matches!(
            nominal_solve(&rep, &weights, &ItemSet::new([0, 1]), &ItemSet::empty()),
            Err(ModelError::Infeasible(_))
        ));
        assert!(matches!(
            nominal_solve(&rep, &weights, &ItemSet::empty(), &ItemSet::new([2, 3])),
            Err(ModelError::Infeasible(_))
        ));
        let sel = NominalProblem::Selection { n: 4, p: 2 };
        assert!(matches!(
            nominal_solve(&sel, &weights, &ItemSet::new([0, 1, 2]), &ItemSet::empty()),
            Err(ModelError::Infeasible(_))
        ));
        assert!(matches!(
            nominal_solve(&sel, &weights, &ItemSet::new([0]), &ItemSet::new([1, 2, 3])),
            Err(ModelError::Infeasible(_))
        ));
        assert_eq!(
            nominal_solve(&sel, &weights, &ItemSet::new([0]), &ItemSet::new([0])),
            Err(ModelError::ConflictingForcing(1))
        );
    }

    #[test]
    fn round_trip_example3() {
        let inst = example3();
        let text = write_instance(&inst);
        assert_eq!(read_instance(&text).unwrap(), inst);
    }

    #[test]
    fn missing_gamma_is_schema_error() {
        let text = write_instance(&example3()).replace("\"gamma\"", "\"gamma_missing\"");
        assert_eq!(read_instance(&text), Err(ModelError::Schema("gamma".into())));
    }

    #[test]
    fn fractions_parse_exactly() {
        let mut text = write_instance(&example3());
        text = text.replacen("\"c_lo\": [\n    3", "\"c_lo\": [\n    \"3/2\"", 1);
        let inst = read_instance(&text).unwrap();
        assert_eq!(inst.costs.c_lo[0], frac(3, 2));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match read_instance("{\n \"problem\": ,\n}") {
            Err(ModelError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn combinations_are_lexicographic() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| seen.push(c.to_vec()));
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        let mut count = 0;
        for_each_combination(3, 0, |c| {
            assert!(c.is_empty());
            count += 1
        });
        assert_eq!(count, 1);
    }

    fn brute_min(n: usize, p: usize, weights: &[Rational], forced_out: u64) -> Option<Rational> {
        (0u64..1 << n)
            .filter(|m| m.count_ones() as usize == p && m & forced_out == 0)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| weights[i].clone()).sum())
            .min()
    }

    proptest! {
        #[test]
        fn selection_matches_exhaustive(
            n in 1usize..=10,
            p_seed in 0usize..10,
            raw in proptest::collection::vec(-20i64..=20, 10),
            out_mask in 0u64..1024,
        ) {
            let p = 1 + p_seed % n;
            let weights: Vec<Rational> = raw[..n].iter().map(|&x| int(x)).collect();
            let out_mask = out_mask & ((1 << n) - 1);
            let problem = NominalProblem::Selection { n, p };
            let result = nominal_solve(&problem, &weights, &ItemSet::empty(), &ItemSet::from_mask(out_mask));
            match brute_min(n, p, &weights, out_mask) {
                None => prop_assert!(result.is_err()),
                Some(best) => {
                    let (value, sol) = result.unwrap();
                    prop_assert_eq!(&value, &best);
                    prop_assert!(problem.is_feasible(&sol));
                    prop_assert_eq!(sol.mask() & out_mask, 0);
                }
            }
        }

        #[test]
        fn enlarging_forced_out_never_decreases(
            raw in proptest::collection::vec(0i64..=20, 8),
            a in 0u64..256,
            b in 0u64..256,
        ) {
            let weights: Vec<Rational> = raw.iter().map(|&x| int(x)).collect();
            let problem = NominalProblem::Selection { n: 8, p: 3 };
            let small = ItemSet::from_mask(a & b);
            let large = ItemSet::from_mask(a);
            let v_small = nominal_solve(&problem, &weights, &ItemSet::empty(), &small).ok().map(|r| r.0);
            let v_large = nominal_solve(&problem, &weights, &ItemSet::empty(), &large).ok().map(|r| r.0);
            match (v_small, v_large) {
                (Some(s), Some(l)) => prop_assert!(l >= s),
                (None, Some(_)) => prop_assert!(false, "smaller exclusion infeasible"),
                _ => {}
            }
        }

        #[test]
        fn members_respect_forcing(forced in 0u64..64) {
            let problem = NominalProblem::RepSelection { parts: vec![vec![0, 1], vec![2, 3, 4], vec![5]] };
            for m in problem.members_containing(forced) {
                prop_assert_eq!(m & forced, forced);
                prop_assert!(problem.is_feasible(&ItemSet::from_mask(m)));
            }
        }
    }
}

//! Continuous-budget two-stage solver.
//!
//! The optimum is the minimum over two families of subproblems: nominal
//! problems with a single active second-stage threshold, and coordination
//! (type-8) problems where the second-stage dual is a convex combination of
//! two thresholds. Both families are polynomial in size and each member is
//! solved exactly.

use std::time::Instant;

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::model::{nominal_solve, Instance, ItemSet, ModelError, NominalProblem, UncertaintyKind};
use crate::num::{format_rational, pos, Rational};
use crate::onestage::pi_candidates;
use crate::oracle::{adv_continuous_oracle, DEFAULT_CAP};
use crate::report::{Certificate, Method, Provenance, SolveError, SolveReport};

#[derive(Debug, Clone, PartialEq)]
pub struct SingleZSubproblem {
    pub k: usize,
    pub pi2: Rational,
    pub pi1: Rational,
    /// `Γπ²_k + Γπ¹`.
    pub m: Rational,
    pub c_weights: Vec<Rational>,
    pub d_weights: Vec<Rational>,
}

impl SingleZSubproblem {
    /// Value, first-stage witness and full solution. Items where both
    /// branches cost the same are bought in stage one.
    pub fn solve(&self, nominal: &NominalProblem) -> Result<(Rational, ItemSet, ItemSet), SolveError> {
        let weights: Vec<Rational> =
            self.c_weights.iter().zip(&self.d_weights).map(|(c, d)| c.min(d).clone()).collect();
        let (v, sol) = nominal_solve(nominal, &weights, &ItemSet::empty(), &ItemSet::empty())?;
        let x = ItemSet::new(sol.iter().filter(|&i| self.c_weights[i] <= self.d_weights[i]));
        Ok((v + &self.m, x, sol))
    }
}

/// Where a type-8 problem came from in the enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct PairOrigin {
    pub k1: usize,
    pub k2: usize,
    pub pi1: Rational,
    pub w1: Rational,
}

/// `min ã·x + b̃·y¹ + c̃·y² + ṽ` with `x + y¹` and `x + y²` both feasible
/// and disjointness inside each pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeEightProblem {
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
    pub v: Rational,
    /// Item that must be in `x`.
    pub forced_item: Option<usize>,
    pub origin: Option<PairOrigin>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeEightSolution {
    pub value: Rational,
    pub x: ItemSet,
    pub y1: ItemSet,
    pub y2: ItemSet,
}

fn check_continuous(instance: &Instance) -> Result<(), SolveError> {
    if instance.kind != UncertaintyKind::ContinuousBudget {
        return Err(SolveError::UnsupportedKind(instance.kind));
    }
    let c = &instance.costs;
    if c.c_lo.iter().chain(&c.d_lo).any(Signed::is_negative) {
        return Err(SolveError::PreconditionViolated("continuous decomposition needs nonnegative costs".into()));
    }
    Ok(())
}

fn d_weights_at(instance: &Instance, d_inc: &[Rational], pi: &Rational) -> Vec<Rational> {
    instance.costs.d_lo.iter().zip(d_inc).map(|(l, d)| l + pos(&(d - pi))).collect()
}

pub fn enumerate_single_z(instance: &Instance) -> Result<Vec<SingleZSubproblem>, SolveError> {
    check_continuous(instance)?;
    let costs = &instance.costs;
    let c_inc = costs.c_inc();
    let d_inc = costs.d_inc();
    let thresholds = pi_candidates(&d_inc)?;
    pi_candidates(&c_inc)?;
    let gamma = &instance.gamma;
    let mut out = Vec::new();
    for (k, pi2) in thresholds.values().iter().enumerate() {
        let mut pi1s: Vec<Rational> = c_inc.iter().map(|dc| dc - pi2).filter(|v| !v.is_negative()).collect();
        pi1s.push(Rational::zero());
        pi1s.sort();
        pi1s.dedup();
        let d_weights = d_weights_at(instance, &d_inc, pi2);
        for pi1 in pi1s {
            let c_weights = costs.c_lo.iter().zip(&c_inc).map(|(l, dc)| l + pos(&(dc - &pi1 - pi2))).collect();
            out.push(SingleZSubproblem {
                k,
                pi2: pi2.clone(),
                m: gamma * pi2 + gamma * &pi1,
                pi1,
                c_weights,
                d_weights: d_weights.clone(),
            });
        }
    }
    Ok(out)
}

pub fn enumerate_pair_z(instance: &Instance) -> Result<Vec<TypeEightProblem>, SolveError> {
    check_continuous(instance)?;
    let costs = &instance.costs;
    let c_inc = costs.c_inc();
    let d_inc = costs.d_inc();
    let thresholds = pi_candidates(&d_inc)?;
    pi_candidates(&c_inc)?;
    let pis = thresholds.values();
    let weights: Vec<Vec<Rational>> = pis.iter().map(|pi| d_weights_at(instance, &d_inc, pi)).collect();
    let zero = Rational::zero();
    let mut out = Vec::new();
    // Thresholds are ascending, so k1 > k2 gives π_{k1} > π_{k2}.
    for k1 in 0..pis.len() {
        for k2 in 0..k1 {
            let (hi, lo) = (&pis[k1], &pis[k2]);
            for (ip, dc_ip) in c_inc.iter().enumerate() {
                let mut pi1s = vec![dc_ip - lo, dc_ip - hi, zero.clone()];
                pi1s.sort();
                pi1s.dedup();
                for pi1 in pi1s {
                    let admissible =
                        !pi1.is_negative() && !(dc_ip - &pi1 - lo).is_negative() && !(hi - dc_ip + &pi1).is_negative();
                    if !admissible {
                        continue;
                    }
                    let w1 = (dc_ip - &pi1 - lo) / (hi - lo);
                    let w2 = Rational::from_integer(1.into()) - &w1;
                    out.push(TypeEightProblem {
                        a: costs.c_lo.iter().zip(&c_inc).map(|(l, dc)| l + pos(&(dc - dc_ip))).collect(),
                        b: weights[k1].iter().map(|w| w * &w1).collect(),
                        c: weights[k2].iter().map(|w| w * &w2).collect(),
                        v: &instance.gamma * dc_ip,
                        forced_item: Some(ip),
                        origin: Some(PairOrigin { k1, k2, pi1, w1 }),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Per-item options: 0 none, 1 first pair only, 2 second pair only, 3 both.
fn item_moves(p: &TypeEightProblem, i: usize) -> Vec<(usize, usize, Rational, u8)> {
    if p.forced_item == Some(i) {
        return vec![(1, 1, p.a[i].clone(), 3)];
    }
    let both = (&p.b[i] + &p.c[i]).min(p.a[i].clone());
    vec![(0, 0, Rational::zero(), 0), (1, 0, p.b[i].clone(), 1), (0, 1, p.c[i].clone(), 2), (1, 1, both, 3)]
}

fn assemble(p: &TypeEightProblem, picks: &[(usize, u8)]) -> TypeEightSolution {
    let (mut x, mut y1, mut y2) = (Vec::new(), Vec::new(), Vec::new());
    let mut value = p.v.clone();
    for &(i, code) in picks {
        match code {
            1 => {
                y1.push(i);
                value += &p.b[i];
            }
            2 => {
                y2.push(i);
                value += &p.c[i];
            }
            3 if p.forced_item == Some(i) || p.a[i] < &p.b[i] + &p.c[i] => {
                x.push(i);
                value += &p.a[i];
            }
            3 => {
                y1.push(i);
                y2.push(i);
                value += &p.b[i] + &p.c[i];
            }
            _ => {}
        }
    }
    TypeEightSolution { value, x: ItemSet::new(x), y1: ItemSet::new(y1), y2: ItemSet::new(y2) }
}

fn type8_selection(p: &TypeEightProblem, n: usize, size: usize) -> Option<TypeEightSolution> {
    let width = size + 1;
    let mut layer: Vec<Option<Rational>> = vec![None; width * width];
    layer[0] = Some(Rational::zero());
    let mut choices: Vec<Vec<(usize, u8)>> = Vec::with_capacity(n);
    for i in 0..n {
        let moves = item_moves(p, i);
        let mut next: Vec<Option<Rational>> = vec![None; width * width];
        let mut back = vec![(usize::MAX, 0u8); width * width];
        for (s, v) in layer.iter().enumerate() {
            let Some(v) = v else { continue };
            let (j1, j2) = (s / width, s % width);
            for (d1, d2, cost, code) in &moves {
                if j1 + d1 > size || j2 + d2 > size {
                    continue;
                }
                let t = (j1 + d1) * width + j2 + d2;
                let cand = v + cost;
                if next[t].as_ref().is_none_or(|cur| &cand < cur) {
                    next[t] = Some(cand);
                    back[t] = (s, *code);
                }
            }
        }
        choices.push(back);
        layer = next;
    }
    let goal = size * width + size;
    layer[goal].as_ref()?;
    let mut picks = Vec::new();
    let mut s = goal;
    for i in (0..n).rev() {
        let (prev, code) = choices[i][s];
        picks.push((i, code));
        s = prev;
    }
    picks.reverse();
    Some(assemble(p, &picks))
}

fn type8_rep_selection(p: &TypeEightProblem, parts: &[Vec<usize>]) -> Option<TypeEightSolution> {
    let mut picks = Vec::new();
    for part in parts {
        let forced = part.iter().copied().find(|&i| p.forced_item == Some(i));
        let mut best: Option<(Rational, Vec<(usize, u8)>)> = None;
        let mut offer = |cost: Rational, pick: Vec<(usize, u8)>| {
            if best.as_ref().is_none_or(|(b, _)| &cost < b) {
                best = Some((cost, pick));
            }
        };
        match forced {
            Some(i) => offer(p.a[i].clone(), vec![(i, 3)]),
            None => {
                for &i1 in part {
                    for &i2 in part {
                        if i1 == i2 {
                            offer((&p.b[i1] + &p.c[i1]).min(p.a[i1].clone()), vec![(i1, 3)]);
                        } else {
                            offer(&p.b[i1] + &p.c[i2], vec![(i1, 1), (i2, 2)]);
                        }
                    }
                }
            }
        }
        picks.extend(best?.1);
    }
    Some(assemble(p, &picks))
}

/// Exact type-8 solve. Selection uses a dynamic program over the counts of
/// both completions; RepSelection decomposes by part.
pub fn solve_type8(problem: &TypeEightProblem, nominal: &NominalProblem) -> Result<TypeEightSolution, SolveError> {
    let solved = match nominal {
        NominalProblem::Selection { n, p } => type8_selection(problem, *n, *p),
        NominalProblem::RepSelection { parts } => type8_rep_selection(problem, parts),
    };
    solved.ok_or_else(|| SolveError::infeasible("no feasible solution contains the forced item"))
}

/// Type-8 solve by enumerating the first completion `z¹` and solving the
/// second as a nominal problem with adjusted weights. Exponential in the
/// worst case; kept as the reference route.
pub fn solve_type8_enumerate(
    problem: &TypeEightProblem,
    nominal: &NominalProblem,
) -> Result<TypeEightSolution, SolveError> {
    let n = nominal.item_count();
    let forced = ItemSet::new(problem.forced_item);
    let mut best: Option<TypeEightSolution> = None;
    for z1 in nominal.members_containing(forced.mask()) {
        let z1 = ItemSet::from_mask(z1);
        let weights: Vec<Rational> = (0..n)
            .map(|i| {
                if problem.forced_item == Some(i) {
                    &problem.a[i] - &problem.b[i]
                } else if z1.contains(i) {
                    let gain = &problem.a[i] - &problem.b[i] - &problem.c[i];
                    &problem.c[i] + gain.min(Rational::zero())
                } else {
                    problem.c[i].clone()
                }
            })
            .collect();
        let z2 = match nominal_solve(nominal, &weights, &forced, &ItemSet::empty()) {
            Ok((_, z2)) => z2,
            Err(ModelError::Infeasible(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        let picks: Vec<(usize, u8)> = (0..n)
            .filter_map(|i| match (z1.contains(i), z2.contains(i)) {
                (true, true) => Some((i, 3)),
                (true, false) => Some((i, 1)),
                (false, true) => Some((i, 2)),
                (false, false) => None,
            })
            .collect();
        let sol = assemble(problem, &picks);
        if best.as_ref().is_none_or(|b| sol.value < b.value) {
            best = Some(sol);
        }
    }
    best.ok_or_else(|| SolveError::infeasible("no feasible solution contains the forced item"))
}

/// One line of the optional per-subproblem trace.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceRow {
    SingleZ { k: usize, pi1: Rational, value: Option<Rational> },
    PairZ { k1: usize, k2: usize, item: usize, pi1: Rational, value: Option<Rational> },
}

impl TraceRow {
    pub const HEADER: &'static str = "kind,k,k1,k2,item,pi1,value";

    pub fn to_csv(&self) -> String {
        let val = |v: &Option<Rational>| v.as_ref().map_or("inf".to_string(), format_rational);
        match self {
            TraceRow::SingleZ { k, pi1, value } => {
                format!("single,{k},,,,{},{}", format_rational(pi1), val(value))
            }
            TraceRow::PairZ { k1, k2, item, pi1, value } => {
                format!("pair,,{k1},{k2},{},{},{}", item + 1, format_rational(pi1), val(value))
            }
        }
    }
}

struct Outcome {
    value: Option<Rational>,
    x: ItemSet,
    provenance: Provenance,
}

fn lift<T>(r: Result<T, SolveError>) -> Result<Option<T>, SolveError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if e.is_infeasible() => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn solve_continuous(instance: &Instance) -> Result<SolveReport, SolveError> {
    solve_continuous_traced(instance).map(|(r, _)| r)
}

/// Like [`solve_continuous`], also returning one trace row per subproblem
/// in enumeration order.
pub fn solve_continuous_traced(instance: &Instance) -> Result<(SolveReport, Vec<TraceRow>), SolveError> {
    let start = Instant::now();
    let singles = enumerate_single_z(instance)?;
    let pairs = enumerate_pair_z(instance)?;
    let nominal = &instance.nominal;

    let single_out: Vec<Outcome> = singles
        .par_iter()
        .map(|s| {
            let solved = lift(s.solve(nominal))?;
            Ok(Outcome {
                value: solved.as_ref().map(|(v, _, _)| v.clone()),
                x: solved.map(|(_, x, _)| x).unwrap_or_default(),
                provenance: Provenance::SingleZ { k: s.k, pi2: s.pi2.clone(), pi1: s.pi1.clone() },
            })
        })
        .collect::<Result<_, SolveError>>()?;
    let pair_out: Vec<Outcome> = pairs
        .par_iter()
        .map(|p| {
            let solved = lift(solve_type8(p, nominal))?;
            let origin = p.origin.as_ref().expect("enumerated problems carry their origin");
            Ok(Outcome {
                value: solved.as_ref().map(|s| s.value.clone()),
                x: solved.map(|s| s.x).unwrap_or_default(),
                provenance: Provenance::PairZ {
                    k1: origin.k1,
                    k2: origin.k2,
                    forced_item: p.forced_item.map_or(0, |i| i + 1),
                    pi1: origin.pi1.clone(),
                    weight1: origin.w1.clone(),
                },
            })
        })
        .collect::<Result<_, SolveError>>()?;

    let mut trace = Vec::with_capacity(single_out.len() + pair_out.len());
    for o in single_out.iter().chain(&pair_out) {
        trace.push(match &o.provenance {
            Provenance::SingleZ { k, pi1, .. } => TraceRow::SingleZ { k: *k, pi1: pi1.clone(), value: o.value.clone() },
            Provenance::PairZ { k1, k2, forced_item, pi1, .. } => {
                TraceRow::PairZ { k1: *k1, k2: *k2, item: forced_item - 1, pi1: pi1.clone(), value: o.value.clone() }
            }
            _ => unreachable!("only decomposition subproblems are traced"),
        });
    }

    // Sequential reduction: the first subproblem in enumeration order wins ties.
    let best = single_out
        .into_iter()
        .chain(pair_out)
        .filter(|o| o.value.is_some())
        .reduce(|best, o| if o.value < best.value { o } else { best })
        .ok_or_else(|| SolveError::infeasible("nominal problem has no solution"))?;
    let value = best.value.expect("filtered to finite values");

    let certificate = if instance.n() <= DEFAULT_CAP
        && adv_continuous_oracle(instance, best.x.mask(), &[]).as_ref() == Some(&value)
    {
        Certificate::Exact
    } else {
        Certificate::ValueCertifiedByDecomposition
    };
    let report = SolveReport {
        value,
        witness_x: best.x,
        method: Method::Continuous,
        provenance: best.provenance,
        certificate,
        elapsed: start.elapsed(),
    };
    Ok((report, trace))
}

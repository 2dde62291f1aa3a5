//! Exact solvers for the discrete-budget game.
//!
//! The recourse value of a fixed first-stage set under a remaining budget is
//! a one-stage robust problem, solved by threshold decomposition. The
//! adversary's split of the budget is guessed, and the first-stage set is
//! found by enumeration with a lower-bound test against the incumbent.
//! For `Γ = 1` with equal stage costs a polynomial routine is also provided.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::model::{nominal_solve, Instance, ItemSet, ModelError, NominalProblem, UncertaintyKind};
use crate::num::{common_denominator, int, pos, Exact, Rational};
use crate::onestage::pi_candidates;
use crate::report::{Certificate, Method, Provenance, SolveError, SolveReport};

/// How the adversary spends the budget against one first-stage set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackSplit {
    pub gamma1: usize,
    pub attacked_first: ItemSet,
    pub completion: ItemSet,
    pub attacked_second: ItemSet,
}

fn discrete_gamma(instance: &Instance) -> Result<usize, SolveError> {
    if instance.kind != UncertaintyKind::DiscreteBudget {
        return Err(SolveError::UnsupportedKind(instance.kind));
    }
    instance
        .integer_gamma()
        .ok_or_else(|| SolveError::PreconditionViolated("discrete budget must be a nonnegative integer".into()))
}

/// Indices of the `count` largest values among `items`, ties to the lower index.
fn top_items(items: impl IntoIterator<Item = usize>, values: &[Rational], count: usize) -> ItemSet {
    let mut v: Vec<usize> = items.into_iter().collect();
    v.sort_by(|&a, &b| values[b].cmp(&values[a]).then(a.cmp(&b)));
    v.truncate(count);
    ItemSet::new(v)
}

/// Second-stage cost of the best completion of `x` against `budget` unit
/// raises. `None` when `x` has no completion.
pub fn rec_discrete(
    instance: &Instance,
    x: &ItemSet,
    budget: usize,
) -> Result<Option<(Rational, ItemSet)>, SolveError> {
    let costs = &instance.costs;
    let d_inc = costs.d_inc();
    let thresholds = pi_candidates(&d_inc)?;
    let b = int(budget as i64);
    let mut best: Option<(Rational, ItemSet)> = None;
    for pi in thresholds.values() {
        let weights: Vec<Rational> = (0..instance.n())
            .map(|i| if x.contains(i) { Rational::zero() } else { &costs.d_lo[i] + pos(&(&d_inc[i] - pi)) })
            .collect();
        let (v, sol) = match nominal_solve(&instance.nominal, &weights, x, &ItemSet::empty()) {
            Ok(r) => r,
            Err(ModelError::Infeasible(_)) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let v = v + &b * pi;
        if best.as_ref().is_none_or(|(bv, _)| &v < bv) {
            best = Some((v, sol.difference(x)));
        }
    }
    Ok(best)
}

/// Worst-case total cost of committing to `x`. `None` when `x` has no
/// completion.
pub fn adv_discrete(instance: &Instance, x: &ItemSet) -> Result<Option<(Rational, AttackSplit)>, SolveError> {
    let gamma = discrete_gamma(instance)?;
    let costs = &instance.costs;
    let c_inc = costs.c_inc();
    let d_inc = costs.d_inc();
    let base: Rational = x.iter().map(|i| &costs.c_lo[i]).sum();
    let mut splits: Vec<usize> = (0..=gamma.min(x.len())).collect();
    if gamma > x.len() {
        splits.push(gamma);
    }
    let mut best: Option<(Rational, AttackSplit)> = None;
    for g in splits {
        let hit = top_items(x.iter(), &c_inc, g);
        let Some((rec, y)) = rec_discrete(instance, x, gamma - g)? else {
            return Ok(None);
        };
        let v = &base + hit.iter().map(|i| &c_inc[i]).sum::<Rational>() + rec;
        if best.as_ref().is_none_or(|(bv, _)| &v > bv) {
            let attacked_second = top_items(y.iter(), &d_inc, gamma - g);
            best = Some((v, AttackSplit { gamma1: g, attacked_first: hit, completion: y, attacked_second }));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Default)]
pub struct DiscreteOptions {
    /// First-stage set evaluated before enumeration starts.
    pub incumbent: Option<ItemSet>,
    pub time_limit: Option<Duration>,
}

enum Structure {
    Selection { p: usize, order: Vec<Vec<usize>>, rank: Vec<Vec<usize>> },
    Rep { part_of: Vec<usize>, part_min: Vec<Vec<usize>>, parts: usize },
}

/// Enumeration engine over an exact number type.
struct Engine<T> {
    n: usize,
    gamma: usize,
    c_lo: Vec<T>,
    c_inc: Vec<T>,
    c_hi: Vec<T>,
    pis: Vec<T>,
    /// `weights[k][i]`: second-stage cost of `i` under threshold `k`.
    weights: Vec<Vec<T>>,
    /// Selection: prefix sums along `order[k]`. Rep: single total of part minima.
    prefix: Vec<Vec<T>>,
    /// `rec_floor[m][b]`: recourse value with `m` open slots and budget `b`
    /// when every item may be used, a lower bound for any `x`.
    rec_floor: Vec<Vec<T>>,
    structure: Structure,
}

enum Eval<T> {
    Value(T),
    Pruned,
}

type Best<T> = Option<(T, Vec<usize>)>;

fn key_less(a: &[usize], b: &[usize]) -> bool {
    (a.len(), a) < (b.len(), b)
}

/// Whether `(value, x)` beats the incumbent in (value, cardinality, lex) order.
fn improves<T: Ord>(value: &T, x: &[usize], best: &Best<T>) -> bool {
    match best {
        None => true,
        Some((bv, bx)) => value < bv || (value == bv && key_less(x, bx)),
    }
}

impl<T: Exact> Engine<T> {
    fn new(instance: &Instance, gamma: usize, conv: impl Fn(&Rational) -> T) -> Result<Self, SolveError> {
        let n = instance.n();
        let costs = &instance.costs;
        let c_inc = costs.c_inc();
        let d_inc = costs.d_inc();
        pi_candidates(&c_inc)?;
        let thresholds = pi_candidates(&d_inc)?;
        let weights: Vec<Vec<T>> = thresholds
            .values()
            .iter()
            .map(|pi| (0..n).map(|i| conv(&(&costs.d_lo[i] + pos(&(&d_inc[i] - pi))))).collect())
            .collect();
        let mut prefix = Vec::with_capacity(weights.len());
        let structure = match &instance.nominal {
            NominalProblem::Selection { p, .. } => {
                let mut order = Vec::new();
                let mut rank = Vec::new();
                for w in &weights {
                    let mut o: Vec<usize> = (0..n).collect();
                    o.sort_by(|&a, &b| w[a].cmp(&w[b]).then(a.cmp(&b)));
                    let mut r = vec![0; n];
                    let mut acc = vec![T::zero()];
                    for (pos, &i) in o.iter().enumerate() {
                        r[i] = pos;
                        let next = acc[pos].clone() + w[i].clone();
                        acc.push(next);
                    }
                    prefix.push(acc);
                    order.push(o);
                    rank.push(r);
                }
                Structure::Selection { p: *p, order, rank }
            }
            NominalProblem::RepSelection { parts } => {
                let part_of = instance.nominal.part_of().expect("rep selection has parts");
                let mut part_min = Vec::new();
                for w in &weights {
                    let mins: Vec<usize> = parts
                        .iter()
                        .map(|part| {
                            *part.iter().min_by(|&&a, &&b| w[a].cmp(&w[b]).then(a.cmp(&b))).expect("parts are nonempty")
                        })
                        .collect();
                    let total = mins.iter().fold(T::zero(), |acc, &i| acc + w[i].clone());
                    prefix.push(vec![total]);
                    part_min.push(mins);
                }
                Structure::Rep { part_of, part_min, parts: parts.len() }
            }
        };
        let pis: Vec<T> = thresholds.values().iter().map(&conv).collect();
        // Cheapest m open slots per threshold, ignoring which items x holds.
        let cheapest: Vec<Vec<T>> = match &structure {
            Structure::Selection { p, .. } => prefix.iter().map(|acc| acc[..=*p].to_vec()).collect(),
            Structure::Rep { part_min, .. } => weights
                .iter()
                .zip(part_min)
                .map(|(w, mins)| {
                    let mut vals: Vec<T> = mins.iter().map(|&i| w[i].clone()).collect();
                    vals.sort();
                    let mut acc = vec![T::zero()];
                    for v in vals {
                        let next = acc[acc.len() - 1].clone() + v;
                        acc.push(next);
                    }
                    acc
                })
                .collect(),
        };
        let slots = cheapest[0].len();
        let rec_floor = (0..slots)
            .map(|m| {
                (0..=gamma)
                    .map(|b| {
                        let b = T::from_i64(b as i64);
                        cheapest
                            .iter()
                            .zip(&pis)
                            .map(|(c, pi)| b.clone() * pi.clone() + c[m].clone())
                            .min()
                            .expect("thresholds are nonempty")
                    })
                    .collect()
            })
            .collect();
        Ok(Engine {
            n,
            gamma,
            c_lo: costs.c_lo.iter().map(&conv).collect(),
            c_inc: c_inc.iter().map(&conv).collect(),
            c_hi: costs.c_hi.iter().map(&conv).collect(),
            pis,
            weights,
            prefix,
            rec_floor,
            structure,
        })
    }

    fn solution_size(&self) -> usize {
        match &self.structure {
            Structure::Selection { p, .. } => *p,
            Structure::Rep { parts, .. } => *parts,
        }
    }

    fn max_first_stage(&self) -> usize {
        match &self.structure {
            Structure::Selection { p, .. } => (*p).min(self.n),
            Structure::Rep { parts, .. } => *parts,
        }
    }

    fn admissible(&self, x: &[usize]) -> bool {
        match &self.structure {
            Structure::Selection { p, .. } => x.len() <= *p,
            Structure::Rep { part_of, .. } => {
                x.iter().enumerate().all(|(a, &i)| x[..a].iter().all(|&j| part_of[j] != part_of[i]))
            }
        }
    }

    /// Cheapest completion of admissible `x` under threshold `k`, excluding `x`.
    fn completion(&self, k: usize, x: &[usize], ranks: &mut Vec<usize>) -> T {
        let w = &self.weights[k];
        match &self.structure {
            Structure::Selection { p, order, rank } => {
                let need = p - x.len();
                ranks.clear();
                ranks.extend(x.iter().map(|&i| rank[k][i]));
                ranks.sort_unstable();
                let mut t = 0;
                while t < ranks.len() && ranks[t] < need + t {
                    t += 1;
                }
                let mut sum = self.prefix[k][need + t].clone();
                for &r in &ranks[..t] {
                    sum = sum - w[order[k][r]].clone();
                }
                sum
            }
            Structure::Rep { part_of, part_min, .. } => {
                let mut sum = self.prefix[k][0].clone();
                for &i in x {
                    sum = sum - w[part_min[k][part_of[i]]].clone();
                }
                sum
            }
        }
    }

    /// `adv(x)`, or `Pruned` when a lower bound already rules `x` out.
    fn adv(&self, x: &[usize], best: &Best<T>, scratch: &mut (Vec<T>, Vec<usize>)) -> Eval<T> {
        let (incs, ranks) = scratch;
        let base = x.iter().fold(T::zero(), |acc, &i| acc + self.c_lo[i].clone());
        incs.clear();
        incs.extend(x.iter().map(|&i| self.c_inc[i].clone()));
        incs.sort_unstable_by(|a, b| b.cmp(a));
        let gmax = self.gamma.min(x.len());
        let beaten = |bound: &T| match best {
            Some((bv, bx)) => bound > bv || (bound == bv && key_less(bx, x)),
            None => false,
        };
        let floor_row = &self.rec_floor[self.solution_size() - x.len()];
        let mut first = T::zero();
        let mut relaxed = base.clone() + floor_row[self.gamma].clone();
        for g in 1..=gmax {
            first = first + incs[g - 1].clone();
            let v = base.clone() + first.clone() + floor_row[self.gamma - g].clone();
            if v > relaxed {
                relaxed = v;
            }
        }
        if beaten(&relaxed) {
            return Eval::Pruned;
        }
        let last = self.pis.len() - 1;
        // Thresholds ascend, so the last one gives the zero-budget recourse.
        let floor = self.completion(last, x, ranks);
        if beaten(&(base.clone() + first.clone() + floor.clone())) {
            return Eval::Pruned;
        }
        let comps: Vec<T> = (0..last).map(|k| self.completion(k, x, ranks)).chain([floor]).collect();
        let mut worst: Option<T> = None;
        let mut first = T::zero();
        for g in 0..=gmax {
            if g > 0 {
                first = first + incs[g - 1].clone();
            }
            let b = T::from_i64((self.gamma - g) as i64);
            let rec = comps
                .iter()
                .zip(&self.pis)
                .map(|(c, pi)| b.clone() * pi.clone() + c.clone())
                .min()
                .expect("thresholds are nonempty");
            let v = first.clone() + rec;
            if worst.as_ref().is_none_or(|w| &v > w) {
                worst = Some(v);
            }
        }
        Eval::Value(base + worst.expect("at least one split"))
    }

    /// Cheapest way per threshold to fill the slots left open by `prefix`
    /// when extensions of size `k` are explored: each slot is charged the
    /// cheaper of buying an item after the prefix now (at `buy`) and the
    /// item's second-stage weight. `None` if the slots cannot be filled.
    fn open_slots(&self, prefix: &[usize], mask: u64, buy: &[T], vals: &mut Vec<T>) -> Option<Vec<T>> {
        let last = *prefix.last().expect("nonempty prefix");
        let mut slots = Vec::with_capacity(self.pis.len());
        for (k_idx, w) in self.weights.iter().enumerate() {
            vals.clear();
            let need = match &self.structure {
                Structure::Selection { p, .. } => {
                    for i in (0..self.n).filter(|&i| mask >> i & 1 == 0) {
                        vals.push(if i > last && buy[i] < w[i] { buy[i].clone() } else { w[i].clone() });
                    }
                    p - prefix.len()
                }
                Structure::Rep { part_of, part_min, parts } => {
                    let mut cheapest_buy: Vec<Option<&T>> = vec![None; *parts];
                    let mut touched = vec![false; *parts];
                    for &i in prefix {
                        touched[part_of[i]] = true;
                    }
                    for i in (last + 1)..self.n {
                        let slot = &mut cheapest_buy[part_of[i]];
                        if slot.is_none_or(|v| &buy[i] < v) {
                            *slot = Some(&buy[i]);
                        }
                    }
                    for j in (0..*parts).filter(|&j| !touched[j]) {
                        let wm = &w[part_min[k_idx][j]];
                        vals.push(match cheapest_buy[j] {
                            Some(v) if v < wm => v.clone(),
                            _ => wm.clone(),
                        });
                    }
                    vals.len()
                }
            };
            if need > vals.len() {
                return None;
            }
            if need > 0 && need < vals.len() {
                vals.select_nth_unstable(need - 1);
            }
            slots.push(vals[..need].iter().fold(T::zero(), |acc, v| acc + v.clone()));
        }
        Some(slots)
    }

    fn cheapest_recourse(&self, slots: &[T], budget: usize) -> T {
        let b = T::from_i64(budget as i64);
        slots
            .iter()
            .zip(&self.pis)
            .map(|(c, pi)| b.clone() * pi.clone() + c.clone())
            .min()
            .expect("thresholds are nonempty")
    }

    /// Whether no `k`-element extension of `prefix` by items after its last
    /// element can beat `best`. Two attack families are bounded: stage-one
    /// raises on prefix items only, and raises on every added item plus the
    /// top prefix items, when the budget covers the added items.
    fn subtree_pruned(&self, prefix: &[usize], k: usize, best: &Best<T>, vals: &mut Vec<T>) -> bool {
        let Some((bv, bx)) = best else { return false };
        let beaten = |bound: &T| bound > bv || (bound == bv && bx.len() < k);
        let mask = prefix.iter().fold(0u64, |m, &i| m | 1 << i);
        let base = prefix.iter().fold(T::zero(), |acc, &i| acc + self.c_lo[i].clone());
        let mut incs: Vec<T> = prefix.iter().map(|&i| self.c_inc[i].clone()).collect();
        incs.sort_unstable_by(|a, b| b.cmp(a));
        let added = k - prefix.len();
        if self.gamma >= added {
            let Some(slots) = self.open_slots(prefix, mask, &self.c_hi, vals) else { return true };
            let mut first = base.clone();
            for g in 0..=prefix.len().min(self.gamma - added) {
                if g > 0 {
                    first = first + incs[g - 1].clone();
                }
                if beaten(&(first.clone() + self.cheapest_recourse(&slots, self.gamma - added - g))) {
                    return true;
                }
            }
        }
        let Some(slots) = self.open_slots(prefix, mask, &self.c_lo, vals) else { return true };
        let mut first = base;
        for g in 0..=self.gamma.min(prefix.len()) {
            if g > 0 {
                first = first + incs[g - 1].clone();
            }
            if beaten(&(first.clone() + self.cheapest_recourse(&slots, self.gamma - g))) {
                return true;
            }
        }
        false
    }

    /// Full enumeration. Returns the best set, evaluation and prune counts,
    /// and whether the time limit cut the search short.
    fn search(&self, seed: Option<&ItemSet>, deadline: Option<(Instant, Duration)>) -> (Best<T>, u64, u64, bool) {
        let mut start_best: Best<T> = None;
        if let Some(x) = seed {
            let x = x.as_slice();
            if self.admissible(x) {
                let mut scratch = (Vec::new(), Vec::new());
                if let Eval::Value(v) = self.adv(x, &None, &mut scratch) {
                    start_best = Some((v, x.to_vec()));
                }
            }
        }
        let shared = Mutex::new(start_best.clone());
        let stop = AtomicBool::new(false);
        let n = self.n;
        let mut tasks: Vec<(usize, usize)> = vec![(0, 0)];
        for k in 1..=self.max_first_stage() {
            tasks.extend((0..=n - k).map(|f| (k, f)));
        }
        let results: Vec<(Best<T>, u64, u64)> = tasks
            .par_iter()
            .map(|&(k, f)| {
                let mut walk = Walk {
                    engine: self,
                    shared: &shared,
                    stop: &stop,
                    deadline,
                    local: shared.lock().expect("incumbent lock").clone(),
                    evaluated: 0,
                    pruned: 0,
                    scratch: (Vec::new(), Vec::new()),
                    vals: Vec::new(),
                    x: Vec::with_capacity(k),
                };
                if k == 0 {
                    walk.visit();
                } else {
                    walk.x.push(f);
                    walk.descend(k);
                }
                (walk.local, walk.evaluated, walk.pruned)
            })
            .collect();

        let mut best = start_best;
        let (mut evaluated, mut pruned) = (0, 0);
        for (local, e, p) in results {
            evaluated += e;
            pruned += p;
            if let Some((v, x)) = local {
                if improves(&v, &x, &best) {
                    best = Some((v, x));
                }
            }
        }
        (best, evaluated, pruned, stop.load(Ordering::Relaxed))
    }
}

/// Depth-first walk over the `k`-sets sharing a first element, in lex order.
struct Walk<'a, T> {
    engine: &'a Engine<T>,
    shared: &'a Mutex<Best<T>>,
    stop: &'a AtomicBool,
    deadline: Option<(Instant, Duration)>,
    local: Best<T>,
    evaluated: u64,
    pruned: u64,
    scratch: (Vec<T>, Vec<usize>),
    vals: Vec<T>,
    x: Vec<usize>,
}

impl<T: Exact> Walk<'_, T> {
    fn descend(&mut self, k: usize) {
        if self.stop.load(Ordering::Relaxed) {
            return;
        }
        if self.x.len() == k {
            self.visit();
            return;
        }
        let e = self.engine;
        if k - self.x.len() >= 2 && e.subtree_pruned(&self.x, k, &self.local, &mut self.vals) {
            self.pruned += 1;
            return;
        }
        let next = self.x.last().map_or(0, |&l| l + 1);
        for i in next..=(e.n - (k - self.x.len())) {
            self.x.push(i);
            if e.admissible(&self.x) {
                self.descend(k);
            }
            self.x.pop();
        }
    }

    fn visit(&mut self) {
        if (self.evaluated + self.pruned) % 256 == 255 {
            if let Some((t0, limit)) = self.deadline {
                if t0.elapsed() > limit {
                    self.stop.store(true, Ordering::Relaxed);
                    return;
                }
            }
            let global = self.shared.lock().expect("incumbent lock").clone();
            if let Some((gv, gx)) = global {
                if improves(&gv, &gx, &self.local) {
                    self.local = Some((gv, gx));
                }
            }
        }
        let x = &self.x;
        match self.engine.adv(x, &self.local, &mut self.scratch) {
            Eval::Pruned => self.pruned += 1,
            Eval::Value(v) => {
                self.evaluated += 1;
                if improves(&v, x, &self.local) {
                    self.local = Some((v.clone(), x.to_vec()));
                    let mut g = self.shared.lock().expect("incumbent lock");
                    if improves(&v, x, &g) {
                        *g = Some((v, x.to_vec()));
                    }
                }
            }
        }
    }
}

/// Common denominator scale if every scaled quantity fits comfortably in
/// `i128`, otherwise `None`.
fn integer_scale(instance: &Instance) -> Option<BigInt> {
    let c = &instance.costs;
    let all = || c.c_lo.iter().chain(&c.c_hi).chain(&c.d_lo).chain(&c.d_hi);
    let scale = common_denominator(all());
    let limit = BigInt::from(1i64 << 50);
    all().all(|v| (v.numer() * (&scale / v.denom())).abs() < limit).then_some(scale)
}

pub fn solve_discrete_exact(instance: &Instance) -> Result<SolveReport, SolveError> {
    solve_discrete_exact_with(instance, &DiscreteOptions::default())
}

pub fn solve_discrete_exact_with(instance: &Instance, opts: &DiscreteOptions) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    let gamma = discrete_gamma(instance)?;
    let n = instance.n();
    if n > 63 {
        return Err(SolveError::CapExceeded { n, cap: 63 });
    }
    // Budget beyond n raises nothing more.
    let eff = gamma.min(n);
    let deadline = opts.time_limit.map(|l| (start, l));
    let seed = opts.incumbent.as_ref();
    let (best, evaluated, pruned, timed_out) = match integer_scale(instance) {
        Some(scale) => {
            let conv = |v: &Rational| (v.numer() * (&scale / v.denom())).to_i128().expect("bounded by the scale check");
            let (b, e, p, t) = Engine::<i128>::new(instance, eff, conv)?.search(seed, deadline);
            (b.map(|(_, x)| x), e, p, t)
        }
        None => {
            let (b, e, p, t) = Engine::<Rational>::new(instance, eff, Rational::clone)?.search(seed, deadline);
            (b.map(|(_, x)| x), e, p, t)
        }
    };
    let exact = |x: Vec<usize>| -> Result<Option<(Rational, ItemSet, AttackSplit)>, SolveError> {
        let x = ItemSet::new(x);
        Ok(adv_discrete(instance, &x)?.map(|(v, s)| (v, x, s)))
    };
    if timed_out {
        let incumbent = match best {
            Some(x) => exact(x)?.map(|(v, x, _)| (v, x)),
            None => None,
        };
        return Err(SolveError::TimeLimitExceeded {
            limit: opts.time_limit.expect("deadline implies a limit"),
            incumbent,
        });
    }
    let (value, x, split) = best
        .map(exact)
        .transpose()?
        .flatten()
        .ok_or_else(|| SolveError::infeasible("nominal problem has no solution"))?;
    Ok(SolveReport {
        value,
        witness_x: x,
        method: Method::Discrete,
        provenance: Provenance::Discrete {
            worst_gamma1: split.gamma1,
            attacked_first: split.attacked_first.one_based(),
            evaluated,
            pruned,
        },
        certificate: Certificate::Exact,
        elapsed: start.elapsed(),
    })
}

/// A `(π⁰, π¹)` guess of the equal-cost `Γ = 1` routine. Items with
/// increment above `π⁰` may not serve the zero-budget completion, items
/// above `π¹` may not be bought in stage one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualCostSubproblem {
    pub pi0: Rational,
    pub pi1: Rational,
}

impl EqualCostSubproblem {
    pub fn allows_y0(&self, inc: &Rational) -> bool {
        inc <= &self.pi0
    }

    pub fn allows_x(&self, inc: &Rational) -> bool {
        inc <= &self.pi1
    }
}

struct EqualCostPlan {
    value: Rational,
    x: Vec<usize>,
}

fn cheapest(items: impl IntoIterator<Item = usize>, cost: &[Rational], count: usize) -> Option<Rational> {
    let mut v: Vec<usize> = items.into_iter().collect();
    if v.len() < count {
        return None;
    }
    v.sort_by(|&a, &b| cost[a].cmp(&cost[b]).then(a.cmp(&b)));
    Some(v[..count].iter().map(|&i| &cost[i]).sum())
}

fn equal_cost_selection(
    sub: &EqualCostSubproblem,
    cost: &[Rational],
    inc: &[Rational],
    p: usize,
) -> Option<EqualCostPlan> {
    let n = cost.len();
    let by_cost = |mut v: Vec<usize>| {
        v.sort_by(|&a, &b| cost[a].cmp(&cost[b]).then(a.cmp(&b)));
        v
    };
    // Free for both x and y⁰, then x-only (exists iff π⁰ < π¹).
    let both = by_cost((0..n).filter(|&i| sub.allows_x(&inc[i]) && sub.allows_y0(&inc[i])).collect());
    let x_only = by_cost((0..n).filter(|&i| sub.allows_x(&inc[i]) && !sub.allows_y0(&inc[i])).collect());
    let mut best: Option<EqualCostPlan> = None;
    for a in 0..=both.len().min(p) {
        for r in 0..=x_only.len().min(p - a) {
            let x: Vec<usize> = both[..a].iter().chain(&x_only[..r]).copied().collect();
            let rest = p - x.len();
            let outside = |i: &usize| !x.contains(i);
            let Some(y0) = cheapest((0..n).filter(outside).filter(|&i| sub.allows_y0(&inc[i])), cost, rest) else {
                continue;
            };
            let Some(y1) = cheapest((0..n).filter(outside), cost, rest) else { continue };
            let cx: Rational = x.iter().map(|&i| &cost[i]).sum();
            let value = cx + (&sub.pi0 + y0).max(&sub.pi1 + y1);
            if best.as_ref().is_none_or(|b| value < b.value) {
                best = Some(EqualCostPlan { value, x });
            }
        }
    }
    best
}

fn equal_cost_rep(
    sub: &EqualCostSubproblem,
    cost: &[Rational],
    inc: &[Rational],
    parts: &[Vec<usize>],
) -> Option<EqualCostPlan> {
    let (mut cx, mut c0, mut c1) = (Rational::zero(), Rational::zero(), Rational::zero());
    let mut x = Vec::new();
    for part in parts {
        let mut items = part.clone();
        items.sort_by(|&a, &b| cost[a].cmp(&cost[b]).then(a.cmp(&b)));
        let low = items[0];
        if sub.allows_x(&inc[low]) {
            x.push(low);
            cx += &cost[low];
        } else if let Some(&y0) = items.iter().find(|&&i| sub.allows_y0(&inc[i])) {
            c0 += &cost[y0];
            c1 += &cost[low];
        } else if let Some(&other) = items.get(1).filter(|&&i| sub.allows_x(&inc[i])) {
            x.push(other);
            cx += &cost[other];
        } else {
            return None;
        }
    }
    let value = cx + (&sub.pi0 + c0).max(&sub.pi1 + c1);
    Some(EqualCostPlan { value, x })
}

/// Polynomial exact solver for `Γ = 1` when both stages share the same
/// cost intervals.
pub fn solve_equal_costs_gamma1(instance: &Instance) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    let gamma = discrete_gamma(instance)?;
    let c = &instance.costs;
    if gamma != 1 {
        return Err(SolveError::PreconditionViolated(format!("budget must be 1, got {gamma}")));
    }
    if c.c_lo != c.d_lo || c.c_hi != c.d_hi {
        return Err(SolveError::PreconditionViolated("stage costs differ".into()));
    }
    if let NominalProblem::RepSelection { parts } = &instance.nominal {
        if parts.iter().any(|p| p.len() > 2) {
            return Err(SolveError::PreconditionViolated(
                "equal-cost routine handles parts of at most two items".into(),
            ));
        }
    }
    let inc = c.c_inc();
    let pis = pi_candidates(&inc)?;
    let mut best: Option<(EqualCostPlan, EqualCostSubproblem)> = None;
    for pi0 in pis.values() {
        for pi1 in pis.values() {
            let sub = EqualCostSubproblem { pi0: pi0.clone(), pi1: pi1.clone() };
            let plan = match &instance.nominal {
                NominalProblem::Selection { p, .. } => equal_cost_selection(&sub, &c.c_lo, &inc, *p),
                NominalProblem::RepSelection { parts } => equal_cost_rep(&sub, &c.c_lo, &inc, parts),
            };
            if let Some(plan) = plan {
                if best.as_ref().is_none_or(|(b, _)| plan.value < b.value) {
                    best = Some((plan, sub));
                }
            }
        }
    }
    let (plan, sub) = best.ok_or_else(|| SolveError::infeasible("nominal problem has no solution"))?;
    let x = ItemSet::new(plan.x);
    let certificate = match adv_discrete(instance, &x)? {
        Some((v, _)) if v == plan.value => Certificate::Exact,
        _ => Certificate::ValueCertifiedByDecomposition,
    };
    Ok(SolveReport {
        value: plan.value,
        witness_x: x,
        method: Method::EqualCost,
        provenance: Provenance::EqualCost { pi0: sub.pi0, pi1: sub.pi1 },
        certificate,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{costs, example3};

    #[test]
    fn rec_examples() {
        let inst = example3();
        let one = ItemSet::new([0]);
        assert_eq!(rec_discrete(&inst, &one, 1).unwrap().unwrap().0, int(5));
        assert_eq!(rec_discrete(&inst, &one, 0).unwrap().unwrap(), (int(1), ItemSet::new([1])));
        let (v, y) = rec_discrete(&inst, &ItemSet::new([0, 1]), 1).unwrap().unwrap();
        assert_eq!((v, y), (int(0), ItemSet::empty()));
        assert_eq!(rec_discrete(&inst, &ItemSet::new([0, 1, 2]), 1).unwrap(), None);
    }

    #[test]
    fn adv_examples() {
        let inst = example3();
        let (v, split) = adv_discrete(&inst, &ItemSet::new([0])).unwrap().unwrap();
        assert_eq!(v, int(8));
        // Both splits reach 8; the smaller first-stage share is reported.
        assert_eq!(split.gamma1, 0);
        assert_eq!(split.completion, ItemSet::new([2]));
        assert_eq!(adv_discrete(&inst, &ItemSet::empty()).unwrap().unwrap().0, int(11));
        assert_eq!(adv_discrete(&inst, &ItemSet::new([0, 2])).unwrap().unwrap().0, int(11));
    }

    #[test]
    fn example3_exact() {
        let r = solve_discrete_exact(&example3()).unwrap();
        assert_eq!(r.value, int(8));
        assert_eq!(r.witness_x, ItemSet::new([0]));
        assert_eq!(solve_discrete_exact(&example3().with_gamma(int(0))).unwrap().value, int(4));
        let big = solve_discrete_exact(&example3().with_gamma(int(1_000_000))).unwrap();
        assert_eq!(big.value, solve_discrete_exact(&example3().with_gamma(int(3))).unwrap().value);
    }

    #[test]
    fn warm_start_keeps_tie_break() {
        let opts = DiscreteOptions { incumbent: Some(ItemSet::new([0, 2])), time_limit: None };
        let r = solve_discrete_exact_with(&example3(), &opts).unwrap();
        assert_eq!((r.value, r.witness_x), (int(8), ItemSet::new([0])));
    }

    #[test]
    fn rational_engine_agrees() {
        let mut inst = example3();
        inst.costs = costs(&[3, 1, 4], &[7, 10, 5], &[3, 1, 4], &[7, 10, 5]);
        inst.costs.c_hi[1] = Rational::new(BigInt::from(1i64 << 62) + 1, BigInt::from(1i64 << 58));
        assert!(integer_scale(&inst).is_none());
        let r = solve_discrete_exact(&inst).unwrap();
        let brute = crate::oracle::brute_rob_discrete(&inst).unwrap();
        assert_eq!(r.value, brute);
    }

    #[test]
    fn equal_cost_example3() {
        let r = solve_equal_costs_gamma1(&example3()).unwrap();
        assert_eq!(r.value, int(8));
        assert_eq!(r.certificate, Certificate::Exact);
    }

    #[test]
    fn equal_cost_preconditions() {
        assert!(matches!(
            solve_equal_costs_gamma1(&example3().with_gamma(int(2))),
            Err(SolveError::PreconditionViolated(_))
        ));
        let mut inst = example3();
        inst.costs.d_hi[0] = int(8);
        assert!(matches!(solve_equal_costs_gamma1(&inst), Err(SolveError::PreconditionViolated(_))));
    }

    #[test]
    fn equal_cost_flat_is_nominal() {
        let mut inst = example3();
        inst.costs = costs(&[3, 1, 4], &[3, 1, 4], &[3, 1, 4], &[3, 1, 4]);
        assert_eq!(solve_equal_costs_gamma1(&inst).unwrap().value, int(4));
    }
}

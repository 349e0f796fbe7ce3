//! Layered backtracking: class counts, then links, then attribute values.
//! Link decisions are forward checked against multiplicities and
//! association bounds; invariants are evaluated as soon as everything they
//! read has been decided; interchangeable generated objects are ordered by a
//! lex-leader constraint.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CancelToken, FinderError, FinderProblem, SearchOutcome, Stats, Strategy};
use crate::config::{AttributeDomain, Configuration, DomainValue, InvariantFlag};
use crate::eval::{signed_range, EvalMode, Evaluator};
use crate::model::{Invariant, Model};
use crate::ocl::{ExprKind, OclType};
use crate::state::{check_model_inherent, Link, SystemState, Value};

fn domain_value(v: &DomainValue) -> Value {
    match v {
        DomainValue::Integer(i) => Value::Integer(*i),
        DomainValue::Real(r) => Value::Real(*r),
        DomainValue::String(s) => Value::String(s.clone()),
        DomainValue::Boolean(b) => Value::Boolean(*b),
    }
}

/// Integers closest to zero first, positive before negative.
fn zero_first(lo: i64, hi: i64) -> Vec<Value> {
    let mut v: Vec<i64> = (lo..=hi).collect();
    v.sort_by_key(|x| (x.unsigned_abs(), *x < 0));
    v.into_iter().map(Value::Integer).collect()
}

/// Candidate values of attribute `attr` on objects of `class`, in the order
/// the minimal strategy tries them.
pub(crate) fn slot_domain(model: &Model, config: &Configuration, class: &str, attr: &str) -> Vec<Value> {
    let Some((_, a)) = model.attribute(class, attr) else {
        return Vec::new();
    };
    let (wmin, wmax) = signed_range(config.bitwidth);
    let int_range = |lo: i64, hi: i64| zero_first(lo.max(wmin), hi.min(wmax));
    match config.attribute_domain(model, class, attr) {
        Some(AttributeDomain::Range { min, max }) => {
            int_range(min.unwrap_or(config.integer_min), max.unwrap_or(config.integer_max))
        }
        Some(AttributeDomain::Values(values)) => {
            let mut out: Vec<Value> = values
                .iter()
                .map(domain_value)
                .map(|v| match (v, &a.ty) {
                    (Value::Integer(i), OclType::Real) => Value::Real(i as f64),
                    (v, _) => v,
                })
                .filter(|v| match v {
                    Value::Integer(i) => (wmin..=wmax).contains(i),
                    _ => true,
                })
                .collect();
            let mut seen = BTreeSet::new();
            out.retain(|v| seen.insert(v.clone()));
            out
        }
        None => match a.ty {
            OclType::Integer => int_range(config.integer_min, config.integer_max),
            OclType::Boolean => vec![Value::Boolean(false), Value::Boolean(true)],
            OclType::String => config.strings().into_iter().map(Value::String).collect(),
            OclType::Real => config
                .real_values
                .clone()
                .unwrap_or_else(|| vec![0.0, 0.5, 1.0])
                .into_iter()
                .map(Value::Real)
                .collect(),
            _ => Vec::new(),
        },
    }
}

struct InvInfo<'a> {
    inv: &'a Invariant,
    negated: bool,
    assocs: BTreeSet<&'a str>,
    /// (class of the accessed objects, attribute)
    attrs: BTreeSet<(String, String)>,
    /// Reads nothing but attributes of `self`.
    local: bool,
}

impl<'a> InvInfo<'a> {
    fn new(inv: &'a Invariant, negated: bool, model: &Model) -> Self {
        let mut assocs = BTreeSet::new();
        let mut attrs = BTreeSet::new();
        let mut local = true;
        inv.body.walk(&mut |e| match &e.kind {
            ExprKind::Navigation { association, .. } => {
                assocs.insert(association.as_str());
                local = false;
            }
            ExprKind::AllInstances { .. } => local = false,
            ExprKind::Attribute { source, name } => {
                let class = source.ann.as_ref().and_then(|a| match a.standard.element() {
                    OclType::Class(c) => Some(c.as_str()),
                    _ => None,
                });
                if let Some(c) = class.filter(|c| model.attribute(c, name).is_some()) {
                    attrs.insert((c.to_string(), name.clone()));
                }
            }
            _ => {}
        });
        InvInfo {
            inv,
            negated,
            assocs,
            attrs,
            local,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Var {
    Link { assoc: usize, a: usize, b: usize },
    Slot { obj: usize, attr: usize },
}

#[derive(Clone, Copy, Debug)]
enum Check {
    Whole(usize),
    Local(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Flow {
    Continue,
    Stop,
    Timeout,
}

/// Earlier decisions that explain why a subtree holds no solution.
#[derive(Debug)]
enum Conflict {
    /// Unknown or irrelevant (e.g. the subtree held solutions).
    All,
    Set(BTreeSet<usize>),
}

#[derive(Debug)]
enum Step {
    Stop,
    Timeout,
    Exhausted(Conflict),
}

/// Decision variables and bookkeeping for one vector of class counts.
struct Frame {
    names: Vec<String>,
    attr_names: Vec<String>,
    vars: Vec<Var>,
    domains: Vec<Vec<Value>>,
    values: Vec<Option<Value>>,
    state: SystemState,
    checks: Vec<Check>,
    /// Positions each check reads, sorted.
    reasons: Vec<Vec<usize>>,
    /// Check ids that become decidable once the position before is set.
    checks_at: Vec<Vec<usize>>,
    assoc_range: Vec<std::ops::Range<usize>>,
    /// Per symmetric object pair, the positions `(p, q)` with `q` the image
    /// of `p` under swapping the pair, in increasing `p`.
    symmetry: Vec<Vec<(usize, usize)>>,
    // Link counters, indexed [assoc][side][object].
    count: Vec<[Vec<usize>; 2]>,
    remaining: Vec<[Vec<usize>; 2]>,
    total: Vec<usize>,
    total_remaining: Vec<usize>,
    lower: Vec<[usize; 2]>,
    upper: Vec<[Option<usize>; 2]>,
    assoc_min: Vec<usize>,
    assoc_max: Vec<usize>,
}

impl Frame {
    /// Values still possible at `pos`, and whether the counters ruled any out.
    fn options(&self, pos: usize) -> (Vec<Value>, bool) {
        let Var::Link { assoc, a, b } = self.vars[pos] else {
            return (self.domains[pos].clone(), false);
        };
        let ends = [a, b];
        let present_ok = self.total[assoc] < self.assoc_max[assoc]
            && (0..2).all(|s| self.upper[assoc][s].is_none_or(|u| self.count[assoc][s][ends[s]] < u));
        let absent_ok = self.total[assoc] + self.total_remaining[assoc] > self.assoc_min[assoc]
            && (0..2).all(|s| {
                self.count[assoc][s][ends[s]] + self.remaining[assoc][s][ends[s]] > self.lower[assoc][s]
            });
        let options: Vec<Value> = self.domains[pos]
            .iter()
            .filter(|v| match v {
                Value::Boolean(true) => present_ok,
                _ => absent_ok,
            })
            .cloned()
            .collect();
        let pruned = options.len() < self.domains[pos].len();
        (options, pruned)
    }

    fn assign(&mut self, pos: usize, v: Value, model: &Model) {
        match self.vars[pos] {
            Var::Link { assoc, a, b } => {
                let ends = [a, b];
                for (s, &o) in ends.iter().enumerate() {
                    self.remaining[assoc][s][o] -= 1;
                }
                self.total_remaining[assoc] -= 1;
                if v == Value::Boolean(true) {
                    for (s, &o) in ends.iter().enumerate() {
                        self.count[assoc][s][o] += 1;
                    }
                    self.total[assoc] += 1;
                    self.state.links.insert(Link::new(
                        model.associations[assoc].name.clone(),
                        self.names[a].clone(),
                        self.names[b].clone(),
                    ));
                }
            }
            Var::Slot { obj, attr } => {
                let o = self.state.objects.get_mut(&self.names[obj]).expect("object");
                o.attrs.insert(self.attr_names[attr].clone(), v.clone());
            }
        }
        self.values[pos] = Some(v);
    }

    fn unassign(&mut self, pos: usize, model: &Model) {
        let v = self.values[pos].take().expect("assigned");
        match self.vars[pos] {
            Var::Link { assoc, a, b } => {
                let ends = [a, b];
                for (s, &o) in ends.iter().enumerate() {
                    self.remaining[assoc][s][o] += 1;
                }
                self.total_remaining[assoc] += 1;
                if v == Value::Boolean(true) {
                    for (s, &o) in ends.iter().enumerate() {
                        self.count[assoc][s][o] -= 1;
                    }
                    self.total[assoc] -= 1;
                    self.state.links.remove(&Link::new(
                        model.associations[assoc].name.clone(),
                        self.names[a].clone(),
                        self.names[b].clone(),
                    ));
                }
            }
            Var::Slot { obj, attr } => {
                let o = self.state.objects.get_mut(&self.names[obj]).expect("object");
                o.attrs.remove(&self.attr_names[attr]);
            }
        }
    }

    /// When swapping some pair of interchangeable objects would give a
    /// lexicographically smaller assignment, the positions compared.
    fn symmetry_conflict(&self) -> Option<Vec<usize>> {
        for pairs in &self.symmetry {
            for (k, &(p, q)) in pairs.iter().enumerate() {
                match (&self.values[p], &self.values[q]) {
                    (Some(x), Some(y)) if x == y => continue,
                    (Some(x), Some(y)) if x > y => {
                        return Some(pairs[..=k].iter().flat_map(|&(p, q)| [p, q]).collect());
                    }
                    _ => break,
                }
            }
        }
        None
    }
}

pub struct Search<'a> {
    model: &'a Model,
    config: &'a Configuration,
    mode: EvalMode,
    invs: Vec<InvInfo<'a>>,
    deadline: Option<Instant>,
    cancel: Option<CancelToken>,
    rng: Option<ChaCha8Rng>,
    base: SystemState,
    limit: usize,
    start: Instant,
    stats: Stats,
    log: Vec<String>,
    found: Vec<SystemState>,
}

type Res<T> = Result<T, FinderError>;

impl<'a> Search<'a> {
    pub(crate) fn new(problem: &FinderProblem<'a>, base: SystemState, log: Vec<String>, limit: usize) -> Self {
        let model = problem.model;
        let config = problem.config;
        let invs = model
            .invariants
            .iter()
            .filter_map(|inv| match config.flag(&inv.qualified_name()) {
                InvariantFlag::Inactive => None,
                flag => Some(InvInfo::new(inv, flag == InvariantFlag::Negated, model)),
            })
            .collect();
        let start = Instant::now();
        Search {
            model,
            config,
            mode: EvalMode::Solver {
                bitwidth: config.bitwidth,
            },
            invs,
            deadline: problem.deadline.map(|d| start + d),
            cancel: problem.cancel.clone(),
            rng: match problem.strategy {
                Strategy::Minimal => None,
                Strategy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            },
            base,
            limit,
            start,
            stats: Stats::default(),
            log,
            found: Vec::new(),
        }
    }

    pub(crate) fn run(mut self) -> Res<SearchOutcome> {
        let classes: Vec<(String, usize, usize)> = self
            .model
            .classes
            .iter()
            .filter(|c| !c.is_abstract)
            .map(|c| {
                let bound = self.config.class_bound(&c.name);
                let have = self.base.objects.values().filter(|o| o.class == c.name).count();
                let lo = (bound.min as usize).max(have);
                let hi = bound.resolve_max(self.config.default_upper) as usize;
                (c.name.clone(), lo, hi)
            })
            .collect();
        let mut counts = vec![0; classes.len()];
        let flow = if self.limit == 0 {
            Flow::Stop
        } else {
            self.counts(&classes, 0, &mut counts)?
        };
        self.stats.elapsed = self.start.elapsed();
        Ok(SearchOutcome {
            states: self.found,
            timed_out: flow == Flow::Timeout,
            stats: self.stats,
            log: self.log,
        })
    }

    fn out_of_time(&self) -> bool {
        self.cancel.as_ref().is_some_and(CancelToken::is_cancelled)
            || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn counts(&mut self, classes: &[(String, usize, usize)], i: usize, counts: &mut Vec<usize>) -> Res<Flow> {
        if self.out_of_time() {
            return Ok(Flow::Timeout);
        }
        if i == classes.len() {
            return match self.frame(classes, counts) {
                Some(mut f) => self.start_frame(&mut f),
                None => Ok(Flow::Continue),
            };
        }
        let (_, lo, hi) = classes[i];
        for n in lo..=hi {
            self.stats.decisions += 1;
            counts[i] = n;
            let flow = self.counts(classes, i + 1, counts)?;
            if flow != Flow::Continue {
                return Ok(flow);
            }
        }
        Ok(Flow::Continue)
    }

    /// Builds the decision variables for fixed class counts; `None` when the
    /// counts cannot satisfy some multiplicity or association bound.
    fn frame(&mut self, classes: &[(String, usize, usize)], counts: &[usize]) -> Option<Frame> {
        let model = self.model;
        let config = self.config;
        let mut names: Vec<String> = Vec::new();
        let mut classes_of: Vec<String> = Vec::new();
        let mut generated: Vec<bool> = Vec::new();
        for (name, o) in &self.base.objects {
            names.push(name.clone());
            classes_of.push(o.class.clone());
            generated.push(false);
        }
        let mut taken: HashSet<String> = names.iter().cloned().collect();
        for ((class, _, _), &n) in classes.iter().zip(counts) {
            let have = self.base.objects.values().filter(|o| &o.class == class).count();
            let prefix = super::name_prefix(class);
            let mut k = 1;
            for _ in have..n {
                let mut name = format!("{prefix}{k}");
                while taken.contains(&name) {
                    k += 1;
                    name = format!("{prefix}{k}");
                }
                k += 1;
                taken.insert(name.clone());
                names.push(name);
                classes_of.push(class.clone());
                generated.push(true);
            }
        }
        let n_obj = names.len();
        let mut state = SystemState::new();
        for (name, class) in names.iter().zip(&classes_of) {
            state.add_object(name.clone(), class.clone());
        }

        let mut vars = Vec::new();
        let mut domains: Vec<Vec<Value>> = Vec::new();
        let n_assoc = model.associations.len();
        let mut remaining = vec![[vec![0usize; n_obj], vec![0usize; n_obj]]; n_assoc];
        let mut total_remaining = vec![0usize; n_assoc];
        let mut lower = Vec::with_capacity(n_assoc);
        let mut upper = Vec::with_capacity(n_assoc);
        let mut assoc_min = Vec::with_capacity(n_assoc);
        let mut assoc_max = Vec::with_capacity(n_assoc);
        let mut assoc_range = Vec::with_capacity(n_assoc);
        let absent_first = vec![Value::Boolean(false), Value::Boolean(true)];
        for (ai, assoc) in model.associations.iter().enumerate() {
            let start = vars.len();
            let members: [Vec<usize>; 2] = std::array::from_fn(|s| {
                (0..n_obj)
                    .filter(|&o| model.conforms_to(&classes_of[o], &assoc.ends[s].class))
                    .collect()
            });
            for &a in &members[0] {
                for &b in &members[1] {
                    let forced = self
                        .base
                        .links
                        .contains(&Link::new(assoc.name.clone(), names[a].clone(), names[b].clone()));
                    vars.push(Var::Link { assoc: ai, a, b });
                    domains.push(if forced {
                        vec![Value::Boolean(true)]
                    } else {
                        absent_first.clone()
                    });
                    remaining[ai][0][a] += 1;
                    remaining[ai][1][b] += 1;
                    total_remaining[ai] += 1;
                }
            }
            assoc_range.push(start..vars.len());
            lower.push([
                assoc.ends[1].multiplicity.lower as usize,
                assoc.ends[0].multiplicity.lower as usize,
            ]);
            upper.push([
                assoc.ends[1].multiplicity.upper_count(),
                assoc.ends[0].multiplicity.upper_count(),
            ]);
            let bound = config.association_bound(&assoc.name);
            assoc_min.push(bound.min as usize);
            assoc_max.push(bound.resolve_max(config.default_upper) as usize);
            // Counts too small to ever reach a lower multiplicity.
            let starved = total_remaining[ai] < assoc_min[ai]
                || (0..2).any(|s| members[s].iter().any(|&o| remaining[ai][s][o] < lower[ai][s]));
            if starved {
                self.stats.propagations += 1;
                return None;
            }
        }

        let mut attr_names: Vec<String> = Vec::new();
        let mut slot_pos: HashMap<(usize, String), usize> = HashMap::new();
        for class in &model.classes {
            for attr in &class.attributes {
                let ai = attr_names.len();
                attr_names.push(attr.name.clone());
                for o in 0..n_obj {
                    if !model.conforms_to(&classes_of[o], &class.name) {
                        continue;
                    }
                    let pinned = self
                        .base
                        .objects
                        .get(&names[o])
                        .and_then(|b| b.attrs.get(&attr.name))
                        .filter(|v| !v.is_undefined());
                    vars.push(Var::Slot { obj: o, attr: ai });
                    domains.push(match pinned {
                        Some(v) => vec![v.clone()],
                        None => slot_domain(model, config, &classes_of[o], &attr.name),
                    });
                    slot_pos.insert((o, attr.name.clone()), vars.len() - 1);
                }
            }
        }
        if let Some(rng) = self.rng.as_mut() {
            for d in &mut domains {
                d.shuffle(rng);
            }
        }
        // When one solution is enough, values nothing reads are not worth
        // branching on.
        if self.limit == 1 {
            for (v, d) in vars.iter().zip(domains.iter_mut()) {
                if let Var::Slot { obj, attr } = *v {
                    let name = &attr_names[attr];
                    let read = self.invs.iter().any(|i| {
                        i.attrs
                            .iter()
                            .any(|(decl, a)| a == name && model.conforms_to(&classes_of[obj], decl))
                    });
                    if !read {
                        d.truncate(1);
                    }
                }
            }
        }

        let mut checks = Vec::new();
        let mut reasons: Vec<Vec<usize>> = Vec::new();
        let mut checks_at = vec![Vec::new(); vars.len() + 1];
        let slots_read = |info: &InvInfo<'_>, o: usize| -> Vec<usize> {
            info.attrs
                .iter()
                .filter(|(class, _)| model.conforms_to(&classes_of[o], class))
                .filter_map(|(_, name)| slot_pos.get(&(o, name.clone())).copied())
                .collect()
        };
        for (ii, info) in self.invs.iter().enumerate() {
            let mut add = |check, mut reason: Vec<usize>| {
                reason.sort_unstable();
                reason.dedup();
                let ready = reason.last().map_or(0, |p| p + 1);
                checks_at[ready].push(checks.len());
                checks.push(check);
                reasons.push(reason);
            };
            if info.local && !info.negated {
                for o in (0..n_obj).filter(|&o| model.conforms_to(&classes_of[o], &info.inv.context)) {
                    add(Check::Local(ii, o), slots_read(info, o));
                }
            } else {
                let mut reason: Vec<usize> = info
                    .assocs
                    .iter()
                    .filter_map(|a| model.associations.iter().position(|x| x.name == *a))
                    .flat_map(|ai| assoc_range[ai].clone())
                    .collect();
                for o in 0..n_obj {
                    reason.extend(slots_read(info, o));
                }
                add(Check::Whole(ii), reason);
            }
        }

        // Adjacent generated objects of one class are interchangeable.
        let index: HashMap<Var, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut symmetry = Vec::new();
        for o in 0..n_obj.saturating_sub(1) {
            let p = o + 1;
            if !(generated[o] && generated[p] && classes_of[o] == classes_of[p]) {
                continue;
            }
            let swap = |x: usize| {
                if x == o {
                    p
                } else if x == p {
                    o
                } else {
                    x
                }
            };
            let pairs: Vec<(usize, usize)> = vars
                .iter()
                .enumerate()
                .filter_map(|(i, v)| {
                    let image = match *v {
                        Var::Link { assoc, a, b } => Var::Link {
                            assoc,
                            a: swap(a),
                            b: swap(b),
                        },
                        Var::Slot { obj, attr } => Var::Slot { obj: swap(obj), attr },
                    };
                    let j = index[&image];
                    (j != i).then_some((i, j))
                })
                .collect();
            symmetry.push(pairs);
        }

        let n_vars = vars.len();
        Some(Frame {
            names,
            attr_names,
            vars,
            domains,
            values: vec![None; n_vars],
            state,
            checks,
            reasons,
            checks_at,
            assoc_range,
            symmetry,
            count: vec![[vec![0; n_obj], vec![0; n_obj]]; n_assoc],
            remaining,
            total: vec![0; n_assoc],
            total_remaining,
            lower,
            upper,
            assoc_min,
            assoc_max,
        })
    }

    fn start_frame(&mut self, f: &mut Frame) -> Res<Flow> {
        if self.failed_check(f, 0)?.is_some() {
            return Ok(Flow::Continue);
        }
        Ok(match self.dfs(f, 0)? {
            Step::Stop => Flow::Stop,
            Step::Timeout => Flow::Timeout,
            Step::Exhausted(_) => Flow::Continue,
        })
    }

    /// Depth-first search from `pos` with conflict-directed backjumping: a
    /// subtree without solutions reports the earlier positions its failures
    /// depended on, and positions not among them are not revisited.
    fn dfs(&mut self, f: &mut Frame, pos: usize) -> Res<Step> {
        if self.out_of_time() {
            return Ok(Step::Timeout);
        }
        if pos == f.vars.len() {
            return self.leaf(f);
        }
        let (options, pruned) = f.options(pos);
        let mut conflict = BTreeSet::new();
        let mut all = false;
        if pruned {
            if let Var::Link { assoc, .. } = f.vars[pos] {
                conflict.extend(f.assoc_range[assoc].start..pos);
            }
            if options.len() == 1 {
                self.stats.propagations += 1;
            }
        }
        for v in options {
            self.stats.decisions += 1;
            f.assign(pos, v, self.model);
            let failed = match f.symmetry_conflict() {
                Some(r) => Some(r),
                None => self.failed_check(f, pos + 1)?.map(|c| f.reasons[c].clone()),
            };
            let step = match failed {
                Some(reason) => {
                    conflict.extend(reason.into_iter().filter(|&p| p != pos));
                    None
                }
                None => Some(self.dfs(f, pos + 1)?),
            };
            f.unassign(pos, self.model);
            match step {
                None => {}
                Some(Step::Exhausted(Conflict::All)) => all = true,
                Some(Step::Exhausted(Conflict::Set(s))) => {
                    if !s.contains(&pos) {
                        // Other values here cannot repair what failed below.
                        return Ok(Step::Exhausted(if all { Conflict::All } else { Conflict::Set(s) }));
                    }
                    conflict.extend(s.into_iter().filter(|&p| p != pos));
                }
                Some(stop) => return Ok(stop),
            }
        }
        Ok(Step::Exhausted(if all { Conflict::All } else { Conflict::Set(conflict) }))
    }

    /// First check that becomes decidable at `at` and fails.
    fn failed_check(&self, f: &Frame, at: usize) -> Res<Option<usize>> {
        for &c in &f.checks_at[at] {
            if !self.check(f, f.checks[c])? {
                return Ok(Some(c));
            }
        }
        Ok(None)
    }

    fn check(&self, f: &Frame, check: Check) -> Res<bool> {
        let eval_err = |e: crate::eval::EvalError| FinderError::Evaluation(e.to_string());
        let mut ev = Evaluator::new(&f.state, self.mode);
        match check {
            Check::Whole(ii) => {
                let info = &self.invs[ii];
                let r = ev.eval_invariant(info.inv, self.model).map_err(eval_err)?;
                Ok(r.holds != info.negated)
            }
            Check::Local(ii, o) => {
                let body = &self.invs[ii].inv.body;
                let v = ev
                    .eval(body, &[("self".into(), Value::Object(f.names[o].clone()))])
                    .map_err(eval_err)?;
                Ok(v == Value::Boolean(true))
            }
        }
    }

    /// Re-checks a complete assignment from scratch before accepting it.
    fn leaf(&mut self, f: &Frame) -> Res<Step> {
        let rejected = Step::Exhausted(Conflict::All);
        if !check_model_inherent(&f.state, self.model).is_empty() {
            return Ok(rejected);
        }
        for (ai, assoc) in self.model.associations.iter().enumerate() {
            let n = f.state.links_of(&assoc.name).count();
            if n < f.assoc_min[ai] || n > f.assoc_max[ai] {
                return Ok(rejected);
            }
        }
        for ii in 0..self.invs.len() {
            if !self.check(f, Check::Whole(ii))? {
                return Ok(rejected);
            }
        }
        self.found.push(f.state.clone());
        Ok(if self.found.len() >= self.limit {
            Step::Stop
        } else {
            Step::Exhausted(Conflict::All)
        })
    }
}

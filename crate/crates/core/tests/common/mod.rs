//! Shared test support: corpus access, a random problem generator and an
//! exhaustive oracle that shares no code with the finder.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use umlval::config::{AttributeDomain, Configuration, DomainValue, InvariantFlag};
use umlval::eval::{eval_invariant, signed_range, EvalMode};
use umlval::model::{Model, Upper};
use umlval::ocl::OclType;
use umlval::parse::{parse_config_file, parse_model};
use umlval::state::{Link, SystemState, Value};

pub mod gen;

pub fn corpus(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(corpus(rel)).unwrap()
}

pub fn carrental() -> Model {
    parse_model(&read("carrental.use"), "carrental.use").unwrap()
}

pub fn carrental_config(name: &str) -> Configuration {
    let m = carrental();
    let f = parse_config_file(&read("carrental.properties"), "carrental.properties", &m).unwrap();
    f.get(name).unwrap().clone()
}

/// Per-object link counts recomputed from scratch: every (object, end) pair
/// whose partner count lies outside the opposite end's multiplicity.
pub fn recount_violations(state: &SystemState, model: &Model) -> Vec<(String, String, String)> {
    let mut out = Vec::new();
    for assoc in &model.associations {
        for side in 0..2 {
            let other = &assoc.ends[1 - side];
            for (name, obj) in &state.objects {
                if !model.ancestors(&obj.class).contains(&assoc.ends[side].class.as_str()) {
                    continue;
                }
                let n = state
                    .links
                    .iter()
                    .filter(|l| l.association == assoc.name && l.ends[side] == *name)
                    .count() as u32;
                let ok = n >= other.multiplicity.lower
                    && match other.multiplicity.upper {
                        Upper::Bounded(u) => n <= u,
                        Upper::Unbounded => true,
                    };
                if !ok {
                    out.push((name.clone(), assoc.name.clone(), other.role.clone()));
                }
            }
        }
    }
    out.sort();
    out
}

/// Values an attribute slot may take under `config`, computed directly from
/// the configuration fields.
pub fn oracle_domain(model: &Model, config: &Configuration, class: &str, attr: &str, ty: &OclType) -> Vec<Value> {
    let (lo, hi) = signed_range(config.bitwidth);
    let ints = |a: i64, b: i64| -> Vec<Value> { (a.max(lo)..=b.min(hi)).map(Value::Integer).collect() };
    let over = model
        .ancestors(class)
        .into_iter()
        .find_map(|c| config.attribute_domains.get(c).and_then(|m| m.get(attr)));
    match (over, ty) {
        (Some(AttributeDomain::Values(vs)), _) => {
            let mut out: Vec<Value> = vs
                .iter()
                .map(|v| match (v, ty) {
                    (DomainValue::Integer(i), OclType::Real) => Value::Real(*i as f64),
                    (DomainValue::Integer(i), _) => Value::Integer(*i),
                    (DomainValue::Real(r), _) => Value::Real(*r),
                    (DomainValue::String(s), _) => Value::String(s.clone()),
                    (DomainValue::Boolean(b), _) => Value::Boolean(*b),
                })
                .filter(|v| !matches!(v, Value::Integer(i) if *i < lo || *i > hi))
                .collect();
            out.dedup();
            out
        }
        (Some(AttributeDomain::Range { min, max }), _) => {
            ints(min.unwrap_or(config.integer_min), max.unwrap_or(config.integer_max))
        }
        (None, OclType::Integer) => ints(config.integer_min, config.integer_max),
        (None, OclType::Boolean) => vec![Value::Boolean(false), Value::Boolean(true)],
        (None, OclType::String) => config.strings().into_iter().map(Value::String).collect(),
        (None, OclType::Real) => config
            .real_values
            .clone()
            .unwrap_or(vec![0.0, 0.5, 1.0])
            .into_iter()
            .map(Value::Real)
            .collect(),
        (None, t) => panic!("no oracle domain for {t:?}"),
    }
}

/// Whether `state` satisfies the problem: class and association bounds,
/// multiplicities and every invariant flag, evaluated in Solver mode.
pub fn admissible(model: &Model, config: &Configuration, state: &SystemState) -> bool {
    for class in model.classes.iter().filter(|c| !c.is_abstract) {
        let n = state.objects.values().filter(|o| o.class == class.name).count() as u32;
        let b = config.class_bound(&class.name);
        if n < b.min || n > b.resolve_max(config.default_upper) {
            return false;
        }
    }
    for assoc in &model.associations {
        let n = state.links.iter().filter(|l| l.association == assoc.name).count() as u32;
        let b = config.association_bound(&assoc.name);
        if n < b.min || n > b.resolve_max(config.default_upper) {
            return false;
        }
    }
    if !recount_violations(state, model).is_empty() {
        return false;
    }
    let mode = EvalMode::Solver { bitwidth: config.bitwidth };
    model.invariants.iter().all(|inv| match config.flag(&inv.qualified_name()) {
        InvariantFlag::Inactive => true,
        InvariantFlag::Active => eval_invariant(inv, state, mode, model).unwrap().holds,
        InvariantFlag::Negated => !eval_invariant(inv, state, mode, model).unwrap().holds,
    })
}

/// Outcome of an exhaustive scan.
pub enum Brute {
    Found(SystemState),
    None,
    /// The search space exceeds the cap.
    TooLarge,
}

/// Enumerates every state within the bounds, in no particular order, and
/// returns the first admissible one.
pub fn brute_force(model: &Model, config: &Configuration, cap: u64) -> Brute {
    let concrete: Vec<&str> = model
        .classes
        .iter()
        .filter(|c| !c.is_abstract)
        .map(|c| c.name.as_str())
        .collect();
    let ranges: Vec<(u32, u32)> = concrete
        .iter()
        .map(|c| {
            let b = config.class_bound(c);
            (b.min, b.resolve_max(config.default_upper))
        })
        .collect();
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return Brute::None;
    }
    let mut counts: Vec<u32> = ranges.iter().map(|r| r.0).collect();
    let mut total: u64 = 0;
    loop {
        let mut state = SystemState::new();
        for (ci, c) in concrete.iter().enumerate() {
            for k in 1..=counts[ci] {
                state.add_object(format!("{}{k}", c.to_lowercase()), *c);
            }
        }
        // Candidate links and attribute slots.
        let mut pairs: Vec<Link> = Vec::new();
        for assoc in &model.associations {
            let conf = |class: &str| -> Vec<String> {
                state
                    .objects
                    .iter()
                    .filter(|(_, o)| model.ancestors(&o.class).contains(&class))
                    .map(|(n, _)| n.clone())
                    .collect()
            };
            for a in conf(&assoc.ends[0].class) {
                for b in conf(&assoc.ends[1].class) {
                    pairs.push(Link::new(&assoc.name, a.clone(), b));
                }
            }
        }
        let mut slots: Vec<(String, String, Vec<Value>)> = Vec::new();
        for (name, o) in &state.objects {
            for (_, attr) in model.all_attributes(&o.class) {
                let d = oracle_domain(model, config, &o.class, &attr.name, &attr.ty);
                slots.push((name.clone(), attr.name.clone(), d));
            }
        }
        if pairs.len() >= 40 {
            return Brute::TooLarge;
        }
        let link_space = 1u64 << pairs.len();
        let value_space = slots.iter().try_fold(1u64, |acc, s| acc.checked_mul(s.2.len() as u64));
        let Some(space) = value_space.and_then(|v| v.checked_mul(link_space)) else {
            return Brute::TooLarge;
        };
        total += space;
        if total > cap {
            return Brute::TooLarge;
        }
        if slots.iter().all(|s| !s.2.is_empty()) {
            for mask in 0..link_space {
                let mut s = state.clone();
                for (i, l) in pairs.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        s.add_link(l.clone());
                    }
                }
                if !recount_violations(&s, model).is_empty() {
                    continue;
                }
                let mut idx = vec![0usize; slots.len()];
                loop {
                    for (k, (o, a, d)) in slots.iter().enumerate() {
                        s.set_attr(o, a.clone(), d[idx[k]].clone());
                    }
                    if admissible(model, config, &s) {
                        return Brute::Found(s);
                    }
                    // Odometer step.
                    let mut k = 0;
                    while k < idx.len() {
                        idx[k] += 1;
                        if idx[k] < slots[k].2.len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                    if k == idx.len() {
                        break;
                    }
                }
            }
        }
        let mut k = 0;
        while k < counts.len() {
            counts[k] += 1;
            if counts[k] <= ranges[k].1 {
                break;
            }
            counts[k] = ranges[k].0;
            k += 1;
        }
        if k == counts.len() {
            return Brute::None;
        }
    }
}

/// A randomly generated problem, as source text.
#[derive(Clone, Debug)]
pub struct RandomProblem {
    pub model_text: String,
    pub config_text: String,
}

impl RandomProblem {
    pub fn load(&self) -> (Model, Configuration) {
        let m = parse_model(&self.model_text, "random.use").unwrap_or_else(|e| panic!("{e:?}\n{}", self.model_text));
        let f = parse_config_file(&self.config_text, "random.properties", &m)
            .unwrap_or_else(|e| panic!("{e:?}\n{}", self.config_text));
        let c = f.get("p").unwrap().clone();
        (m, c)
    }
}

const NAMES: [&str; 3] = ["A", "B", "C"];

/// Up to three classes with an Integer attribute (and sometimes a Boolean),
/// up to two associations, class bounds within 0..2, integers within
/// [0, 3] and two to four invariants drawn from a template pool, each
/// active, inactive or negated.
pub fn random_problem(rng: &mut ChaCha8Rng) -> RandomProblem {
    let n = rng.random_range(1..=3);
    let classes = &NAMES[..n];
    let mut text = String::from("model R\n");
    let mut has_flag = BTreeMap::new();
    for c in classes {
        let flag = rng.random_bool(0.4);
        has_flag.insert(*c, flag);
        text.push_str(&format!("class {c}\nattributes\n  x : Integer\n"));
        if flag {
            text.push_str("  f : Boolean\n");
        }
        text.push_str("end\n");
    }
    let mults = ["0..1", "1", "*", "1..*", "0..2"];
    let mut roles: Vec<(&str, String, &str)> = Vec::new();
    for i in 0..rng.random_range(0..=2) {
        let a = *classes.choose(rng).unwrap();
        let b = *classes.choose(rng).unwrap();
        let (ra, rb) = (format!("r{i}a"), format!("r{i}b"));
        text.push_str(&format!(
            "association S{i} between\n  {a} [{}] role {ra};\n  {b} [{}] role {rb}\nend\n",
            mults.choose(rng).unwrap(),
            mults.choose(rng).unwrap()
        ));
        roles.push((a, rb, b));
        roles.push((b, ra, a));
    }
    let k = rng.random_range(0..=3);
    let mut invs = Vec::new();
    for i in 0..rng.random_range(2..=4) {
        let c = *classes.choose(rng).unwrap();
        let v = rng.random_range(0..=k);
        let other = *classes.choose(rng).unwrap();
        let mine: Vec<&(&str, String, &str)> = roles.iter().filter(|r| r.0 == c).collect();
        let mut pool = vec![
            format!("self.x > {v}"),
            format!("self.x <> {v}"),
            format!("self.x <= {v}"),
            format!("{c}.allInstances()->forAll(o | o <> self implies o.x <> self.x)"),
            format!("{other}.allInstances()->size() = {}", rng.random_range(0..=2)),
            format!("{other}.allInstances()->exists(o | o.x = self.x + 1)"),
        ];
        if has_flag[c] {
            pool.push(format!("self.f implies self.x = {v}"));
            pool.push("self.f or self.x > 0".to_string());
        }
        for (_, role, target) in &mine {
            pool.push(format!("self.{role}->size() <= {}", rng.random_range(0..=2)));
            pool.push(format!("self.{role}->notEmpty()"));
            pool.push(format!("self.{role}->forAll(o | o.x >= self.x)"));
            pool.push(format!("self.{role}.x->sum() < {}", rng.random_range(1..=4)));
            if target == &c {
                pool.push(format!("self.{role}->excludes(self)"));
            }
        }
        invs.push(format!("context {c} inv i{i}: {}\n", pool.choose(rng).unwrap()));
    }
    text.push_str("constraints\n");
    for i in &invs {
        text.push_str(i);
    }

    let mut cfg = format!("[p]\nInteger_min = 0\nInteger_max = {k}\n");
    for c in classes {
        let hi = rng.random_range(0..=2);
        let lo = rng.random_range(0..=hi);
        cfg.push_str(&format!("{c}_min = {lo}\n{c}_max = {hi}\n"));
    }
    for (i, inv) in invs.iter().enumerate() {
        let ctx = inv.split_whitespace().nth(1).unwrap();
        let flag = match rng.random_range(0..6) {
            0 => "inactive",
            1 => "negated",
            _ => "active",
        };
        cfg.push_str(&format!("inv::{ctx}::i{i} = {flag}\n"));
    }
    RandomProblem {
        model_text: text,
        config_text: cfg,
    }
}

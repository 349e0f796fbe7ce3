//! Bounded model finding: search the space described by a configuration for
//! an object diagram that satisfies the model and its invariants.

mod search;

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::Serialize;

use crate::config::{validate, BoundMax, Configuration};
use crate::model::Model;
use crate::state::{check_structure, Link, SystemState};

/// Shared flag that stops a running search at its next decision.
#[derive(Clone, Debug, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

/// Order in which the search tries alternatives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Fewest objects and links first, values closest to zero first.
    #[default]
    Minimal,
    /// Alternatives shuffled by a seeded generator.
    Random { seed: u64 },
}

#[derive(Clone, Debug)]
pub struct FinderProblem<'a> {
    pub model: &'a Model,
    pub config: &'a Configuration,
    pub base: Option<&'a SystemState>,
    pub deadline: Option<Duration>,
    pub cancel: Option<CancelToken>,
    pub strategy: Strategy,
}

impl<'a> FinderProblem<'a> {
    pub fn new(model: &'a Model, config: &'a Configuration) -> Self {
        FinderProblem {
            model,
            config,
            base: None,
            deadline: None,
            cancel: None,
            strategy: Strategy::Minimal,
        }
    }

    pub fn with_base(mut self, base: &'a SystemState) -> Self {
        self.base = Some(base);
        self
    }

    pub fn with_deadline(mut self, deadline: Duration) -> Self {
        self.deadline = Some(deadline);
        self
    }

    pub fn with_cancel(mut self, token: CancelToken) -> Self {
        self.cancel = Some(token);
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub decisions: u64,
    pub propagations: u64,
    #[serde(serialize_with = "ser_millis", rename = "elapsed_ms")]
    pub elapsed: Duration,
}

fn ser_millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_millis() as u64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat(SystemState),
    Unsat,
    Timeout,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "SAT",
            Verdict::Unsat => "UNSAT",
            Verdict::Timeout => "TIMEOUT",
        }
    }

    pub fn state(&self) -> Option<&SystemState> {
        match self {
            Verdict::Sat(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinderResult {
    pub verdict: Verdict,
    pub stats: Stats,
    /// Notes on how the configuration was read, e.g. `*` resolutions.
    pub log: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FinderError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

/// Everything a backend reports back from one run.
#[derive(Clone, Debug, Default)]
pub struct SearchOutcome {
    pub states: Vec<SystemState>,
    pub timed_out: bool,
    pub stats: Stats,
    pub log: Vec<String>,
}

/// A procedure that explores the bounded space of a problem.
pub trait Backend {
    /// Collects up to `limit` solutions in a deterministic order.
    fn run(&self, problem: &FinderProblem<'_>, limit: usize) -> Result<SearchOutcome, FinderError>;
}

/// Complete backtracking search with propagation.
#[derive(Clone, Copy, Debug, Default)]
pub struct BacktrackingBackend;

impl Backend for BacktrackingBackend {
    fn run(&self, problem: &FinderProblem<'_>, limit: usize) -> Result<SearchOutcome, FinderError> {
        let prepared = prepare(problem)?;
        search::Search::new(problem, prepared.base, prepared.log, limit).run()
    }
}

pub(crate) struct Prepared {
    pub base: SystemState,
    pub log: Vec<String>,
}

/// Lowercased class name used as the prefix of generated object names.
pub fn name_prefix(class: &str) -> String {
    class.to_lowercase()
}

/// Concrete class whose generated-name pattern matches `name`.
fn class_for_generated_name<'m>(model: &'m Model, name: &str, end_class: &str) -> Option<&'m str> {
    model.concrete_descendants(end_class).into_iter().find_map(|c| {
        let prefix = name_prefix(&c);
        let rest = name.strip_prefix(prefix.as_str())?;
        (!rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) && !rest.starts_with('0'))
            .then(|| model.class(&c).map(|c| c.name.as_str()))
            .flatten()
    })
}

fn prepare(problem: &FinderProblem<'_>) -> Result<Prepared, FinderError> {
    let model = problem.model;
    let config = problem.config;
    let errors = validate(config, model);
    if !errors.is_empty() {
        let msgs: Vec<String> = errors.iter().map(|e| format!("{}: {}", e.key, e.message)).collect();
        return Err(FinderError::InvalidProblem(msgs.join("; ")));
    }
    let mut base = problem.base.cloned().unwrap_or_default();
    let structure = check_structure(&base, model);
    if !structure.is_empty() {
        let msgs: Vec<String> = structure.iter().map(ToString::to_string).collect();
        return Err(FinderError::InvalidProblem(format!("partial state: {}", msgs.join("; "))));
    }
    let mut log = Vec::new();
    for link in &config.required_links {
        let assoc = model.association(&link.association).expect("validated");
        for (end, name) in assoc.ends.iter().zip(&link.ends) {
            if base.objects.contains_key(name) {
                continue;
            }
            let Some(class) = class_for_generated_name(model, name, &end.class) else {
                return Err(FinderError::InvalidProblem(format!(
                    "required link `{}` refers to `{name}`, which is neither in the partial state nor a generated name of a `{}` class",
                    link.association, end.class
                )));
            };
            log.push(format!("required link `{}` introduces object `{name}:{class}`", link.association));
            base.add_object(name.clone(), class);
        }
        base.add_link(Link {
            association: link.association.clone(),
            ends: link.ends.clone(),
        });
    }
    let structure = check_structure(&base, model);
    if !structure.is_empty() {
        let msgs: Vec<String> = structure.iter().map(ToString::to_string).collect();
        return Err(FinderError::InvalidProblem(format!("required links: {}", msgs.join("; "))));
    }
    for c in model.classes.iter().filter(|c| !c.is_abstract) {
        let bound = config.class_bound(&c.name);
        let have = base.objects.values().filter(|o| o.class == c.name).count();
        let max = bound.resolve_max(config.default_upper) as usize;
        if have > max {
            return Err(FinderError::InvalidProblem(format!(
                "partial state has {have} `{}` objects, more than the upper bound {max}",
                c.name
            )));
        }
        match config.class_bounds.get(&c.name) {
            None => log.push(format!(
                "class `{}` has no bounds; using 0..{}",
                c.name, config.default_upper
            )),
            Some(b) if b.max == BoundMax::Default => log.push(format!(
                "`{}_max = *` resolved to {}",
                c.name, config.default_upper
            )),
            _ => {}
        }
    }
    for a in &model.associations {
        let have = base.links_of(&a.name).count();
        let max = config.association_bound(&a.name).resolve_max(config.default_upper) as usize;
        if have > max {
            return Err(FinderError::InvalidProblem(format!(
                "partial state has {have} `{}` links, more than the upper bound {max}",
                a.name
            )));
        }
        match config.association_bounds.get(&a.name) {
            None => log.push(format!(
                "association `{}` has no bounds; using 0..{}",
                a.name, config.default_upper
            )),
            Some(b) if b.max == BoundMax::Default => log.push(format!(
                "`{}_max = *` resolved to {}",
                a.name, config.default_upper
            )),
            _ => {}
        }
    }
    // Pinned values must come from the configured domains.
    for (name, o) in &base.objects {
        for (attr, v) in &o.attrs {
            if v.is_undefined() {
                continue;
            }
            let domain = search::slot_domain(model, config, &o.class, attr);
            if !domain.contains(v) {
                return Err(FinderError::InvalidProblem(format!(
                    "partial state value `{name}.{attr} = {v}` lies outside the configured domain"
                )));
            }
        }
    }
    Ok(Prepared { base, log })
}

/// Searches for one state satisfying the problem.
pub fn find(problem: &FinderProblem<'_>) -> Result<FinderResult, FinderError> {
    let outcome = BacktrackingBackend.run(problem, 1)?;
    let verdict = match outcome.states.into_iter().next() {
        Some(s) => Verdict::Sat(s),
        None if outcome.timed_out => Verdict::Timeout,
        None => Verdict::Unsat,
    };
    Ok(FinderResult {
        verdict,
        stats: outcome.stats,
        log: outcome.log,
    })
}

/// Up to `limit` pairwise distinct solutions. Objects of one class that the
/// search generated are interchangeable, so only one state per arrangement
/// of such objects is reported.
pub fn enumerate_all(problem: &FinderProblem<'_>, limit: usize) -> Result<Vec<SystemState>, FinderError> {
    Ok(BacktrackingBackend.run(problem, limit)?.states)
}

/// Names used by `enumerate_all` results; handy for assertions.
pub fn object_names(state: &SystemState) -> BTreeSet<&str> {
    state.objects.keys().map(String::as_str).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Bound, InvariantFlag};
    use crate::eval::{eval_invariant, EvalMode};
    use crate::parse::{parse_config_file, parse_model};
    use crate::state::{check_model_inherent, Value};

    fn model(text: &str) -> Model {
        parse_model(text, "m.use").unwrap()
    }

    fn corpus() -> Model {
        model(include_str!("../../corpus/carrental.use"))
    }

    fn corpus_config(name: &str) -> Configuration {
        let f = parse_config_file(include_str!("../../corpus/carrental.properties"), "c", &corpus()).unwrap();
        f.get(name).unwrap().clone()
    }

    fn revalidate(m: &Model, c: &Configuration, s: &SystemState) {
        assert!(check_model_inherent(s, m).is_empty());
        let mode = EvalMode::Solver { bitwidth: c.bitwidth };
        for inv in &m.invariants {
            let r = eval_invariant(inv, s, mode, m).unwrap();
            match c.flag(&inv.qualified_name()) {
                InvariantFlag::Active => assert!(r.holds, "{}", inv.qualified_name()),
                InvariantFlag::Negated => assert!(!r.holds, "{}", inv.qualified_name()),
                InvariantFlag::Inactive => {}
            }
        }
    }

    #[test]
    fn parts_scenario() {
        let m = corpus();
        let c = corpus_config("parts");
        let r = find(&FinderProblem::new(&m, &c)).unwrap();
        let s = r.verdict.state().expect("sat");
        assert_eq!(s.objects.len(), 3);
        assert_eq!(s.links.len(), 2);
        assert_eq!(object_names(s), ["branch1", "customer1", "employee1"].into());
        revalidate(&m, &c, s);
    }

    #[test]
    fn full_model_and_application_configs() {
        let m = corpus();
        for name in ["datatypes", "full", "application"] {
            let c = corpus_config(name);
            let r = find(&FinderProblem::new(&m, &c)).unwrap();
            let s = r.verdict.state().unwrap_or_else(|| panic!("{name}: {:?}", r.verdict));
            revalidate(&m, &c, s);
        }
    }

    #[test]
    fn empty_extent_forced() {
        // An invariant over an empty context extent holds vacuously, so the
        // context here is a mandatory class.
        let m = model(
            "model M class Customer end class Shop end
             constraints context Shop inv some: Customer.allInstances()->notEmpty()",
        );
        let mut c = Configuration::default();
        c.class_bounds.insert("Customer".into(), Bound::exactly(0));
        c.class_bounds.insert("Shop".into(), Bound::exactly(1));
        assert_eq!(find(&FinderProblem::new(&m, &c)).unwrap().verdict, Verdict::Unsat);
        assert!(enumerate_all(&FinderProblem::new(&m, &c), 10).unwrap().is_empty());
    }

    #[test]
    fn empty_model() {
        let m = Model::empty("M");
        let c = Configuration::default();
        assert_eq!(find(&FinderProblem::new(&m, &c)).unwrap().verdict, Verdict::Sat(SystemState::new()));
    }

    #[test]
    fn negated_cycle_free_finds_cycle() {
        let m = corpus();
        let mut c = Configuration::default();
        for class in ["Customer", "Employee", "Branch", "Car", "ServiceRecord"] {
            c.class_bounds.insert(class.into(), Bound::exactly(0));
        }
        c.class_bounds.insert("CarGroup".into(), Bound::exactly(2));
        c.association_bounds.insert("Hierarchy".into(), Bound::between(0, 4));
        c.invariant_flags.insert("CarGroup::cycleFree".into(), InvariantFlag::Negated);
        let r = find(&FinderProblem::new(&m, &c)).unwrap();
        let s = r.verdict.state().expect("sat");
        assert!(!s.links.is_empty());
        revalidate(&m, &c, s);
    }

    #[test]
    fn one_boolean_slot_gives_two_states() {
        let m = model("model M class A attributes flag : Boolean end");
        let mut c = Configuration::default();
        c.class_bounds.insert("A".into(), Bound::exactly(1));
        let states = enumerate_all(&FinderProblem::new(&m, &c), usize::MAX).unwrap();
        assert_eq!(states.len(), 2);
        assert_ne!(states[0], states[1]);
    }

    #[test]
    fn symmetric_objects_are_not_repeated() {
        // Two interchangeable objects with a boolean each: {ff, ft, tt}.
        let m = model("model M class A attributes flag : Boolean end");
        let mut c = Configuration::default();
        c.class_bounds.insert("A".into(), Bound::exactly(2));
        assert_eq!(enumerate_all(&FinderProblem::new(&m, &c), usize::MAX).unwrap().len(), 3);
    }

    #[test]
    fn zero_deadline_times_out() {
        let m = corpus();
        let c = corpus_config("full");
        let r = find(&FinderProblem::new(&m, &c).with_deadline(Duration::ZERO)).unwrap();
        assert_eq!(r.verdict, Verdict::Timeout);
    }

    #[test]
    fn cancelled_run_times_out() {
        let m = corpus();
        let c = corpus_config("full");
        let token = CancelToken::new();
        token.cancel();
        let r = find(&FinderProblem::new(&m, &c).with_cancel(token)).unwrap();
        assert_eq!(r.verdict, Verdict::Timeout);
    }

    #[test]
    fn base_is_preserved_and_names_skip_it() {
        let m = corpus();
        let c = corpus_config("parts");
        let mut base = SystemState::new();
        base.add_object("employee1", "Employee");
        base.set_attr("employee1", "age", Value::Integer(7));
        let r = find(&FinderProblem::new(&m, &c).with_base(&base)).unwrap();
        let s = r.verdict.state().expect("sat");
        assert!(base.is_substate_of(s));
        assert_eq!(s.attr("employee1", "age"), Value::Integer(7));

        let mut wide = c.clone();
        wide.class_bounds.insert("Employee".into(), Bound::between(2, 2));
        wide.association_bounds.insert("Employment".into(), Bound::between(0, 2));
        let r = find(&FinderProblem::new(&m, &wide).with_base(&base)).unwrap();
        let s = r.verdict.state().expect("sat");
        assert!(s.objects.contains_key("employee2"));
    }

    #[test]
    fn required_links_introduce_objects() {
        let m = corpus();
        let mut c = corpus_config("parts");
        c.required_links.push(crate::config::RequiredLink {
            association: "Employment".into(),
            ends: ["employee3".into(), "branch1".into()],
        });
        let r = find(&FinderProblem::new(&m, &c)).unwrap();
        let s = r.verdict.state().expect("sat");
        assert!(s.links.contains(&Link::new("Employment", "employee3", "branch1")));
        assert!(r.log.iter().any(|l| l.contains("employee3")));
    }

    #[test]
    fn invalid_problems() {
        let m = corpus();
        let mut c = corpus_config("parts");
        c.bitwidth = 0;
        assert!(matches!(find(&FinderProblem::new(&m, &c)), Err(FinderError::InvalidProblem(_))));
        let c = corpus_config("parts");
        let mut base = SystemState::new();
        base.add_object("b1", "Branch");
        base.add_object("b2", "Branch");
        assert!(matches!(
            find(&FinderProblem::new(&m, &c).with_base(&base)),
            Err(FinderError::InvalidProblem(_))
        ));
        let mut base = SystemState::new();
        base.add_object("e", "Employee");
        base.set_attr("e", "age", Value::Integer(99));
        assert!(matches!(
            find(&FinderProblem::new(&m, &c).with_base(&base)),
            Err(FinderError::InvalidProblem(_))
        ));
    }

    #[test]
    fn star_resolution_is_logged() {
        let m = corpus();
        let c = corpus_config("full");
        let r = find(&FinderProblem::new(&m, &c)).unwrap();
        assert!(r.log.iter().any(|l| l == "association `Rental` has no bounds; using 0..10"));
    }

    #[test]
    fn deterministic_per_seed() {
        let m = corpus();
        let c = corpus_config("full");
        let run = |s| find(&FinderProblem::new(&m, &c).with_strategy(s)).unwrap().verdict;
        assert_eq!(run(Strategy::Random { seed: 7 }), run(Strategy::Random { seed: 7 }));
        assert_eq!(run(Strategy::Minimal), run(Strategy::Minimal));
        let s = run(Strategy::Random { seed: 3 });
        revalidate(&m, &c, s.state().unwrap());
    }
}

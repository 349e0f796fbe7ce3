//! Verification tasks built on the finder: consistency and invariant
//! independence. Every verdict is relative to the configured bounds.

use std::fmt;
use std::time::Duration;

use rayon::prelude::*;
use serde_json::{json, Value as Json};

use crate::config::{Configuration, InvariantFlag};
use crate::finder::{find, CancelToken, FinderError, FinderProblem, Stats, Strategy, Verdict};
use crate::model::Model;
use crate::state::{state_to_json, SystemState};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Task {
    Consistency,
    /// Qualified invariant name.
    Independence(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Consistent, or independent; a witness is attached.
    Holds,
    /// Inconsistent, or not independent, within bounds.
    Fails,
    /// The search hit its deadline or was cancelled.
    Inconclusive,
}

impl Outcome {
    pub fn keyword(self) -> &'static str {
        match self {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskReport {
    pub task: Task,
    pub outcome: Outcome,
    pub witness: Option<SystemState>,
    pub details: String,
    pub stats: Stats,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TaskError {
    #[error("unknown invariant `{0}`")]
    UnknownInvariant(String),
    #[error(transparent)]
    Finder(#[from] FinderError),
}

#[derive(Clone, Debug, Default)]
pub struct TaskOptions {
    pub deadline: Option<Duration>,
    pub cancel: Option<CancelToken>,
    pub strategy: Strategy,
}

fn run(model: &Model, config: &Configuration, opts: &TaskOptions) -> Result<(Verdict, Stats), FinderError> {
    let mut problem = FinderProblem::new(model, config).with_strategy(opts.strategy);
    problem.deadline = opts.deadline;
    problem.cancel = opts.cancel.clone();
    let r = find(&problem)?;
    Ok((r.verdict, r.stats))
}

fn all_active(model: &Model, config: &Configuration) -> Configuration {
    let mut c = config.clone();
    c.invariant_flags = model
        .invariants
        .iter()
        .map(|i| (i.qualified_name(), InvariantFlag::Active))
        .collect();
    c
}

/// Searches for a state satisfying every invariant.
pub fn check_consistency(model: &Model, config: &Configuration, opts: &TaskOptions) -> Result<TaskReport, TaskError> {
    let (verdict, stats) = run(model, &all_active(model, config), opts)?;
    let (outcome, witness, details) = match verdict {
        Verdict::Sat(s) => (Outcome::Holds, Some(s), "consistent within bounds".to_string()),
        Verdict::Unsat => (Outcome::Fails, None, "inconsistent within bounds".to_string()),
        Verdict::Timeout => (Outcome::Inconclusive, None, "inconclusive (timeout)".to_string()),
    };
    Ok(TaskReport {
        task: Task::Consistency,
        outcome,
        witness,
        details,
        stats,
    })
}

/// Searches for a state that violates `invariant` while satisfying all
/// others. Such a state shows the invariant is not implied by the rest.
pub fn check_independence(
    model: &Model,
    config: &Configuration,
    invariant: &str,
    opts: &TaskOptions,
) -> Result<TaskReport, TaskError> {
    let Some(inv) = model.invariant(invariant) else {
        return Err(TaskError::UnknownInvariant(invariant.to_string()));
    };
    let mut c = all_active(model, config);
    c.invariant_flags.insert(inv.qualified_name(), InvariantFlag::Negated);
    let (verdict, stats) = run(model, &c, opts)?;
    let (outcome, witness, details) = match verdict {
        Verdict::Sat(s) => (Outcome::Holds, Some(s), "independent within bounds".to_string()),
        Verdict::Unsat => {
            let mut details = "not independent within bounds".to_string();
            let room: u64 = model
                .concrete_descendants(&inv.context)
                .iter()
                .map(|cl| c.class_bound(cl).resolve_max(c.default_upper) as u64)
                .sum();
            if room == 0 {
                details.push_str(&format!(
                    " (vacuous: `{}` has no instances within bounds, so no violation can be exhibited)",
                    inv.context
                ));
            }
            (Outcome::Fails, None, details)
        }
        Verdict::Timeout => (Outcome::Inconclusive, None, "inconclusive (timeout)".to_string()),
    };
    Ok(TaskReport {
        task: Task::Independence(inv.qualified_name()),
        outcome,
        witness,
        details,
        stats,
    })
}

/// One independence report per invariant, in declaration order. The
/// individual searches run in parallel.
pub fn run_all_independence(
    model: &Model,
    config: &Configuration,
    opts: &TaskOptions,
) -> Result<Vec<TaskReport>, TaskError> {
    model
        .invariants
        .par_iter()
        .map(|inv| check_independence(model, config, &inv.qualified_name(), opts))
        .collect()
}

impl TaskReport {
    pub fn to_json(&self) -> Json {
        let mut j = json!({
            "task": match self.task {
                Task::Consistency => "consistency",
                Task::Independence(_) => "independence",
            },
            "outcome": self.outcome.keyword(),
            "details": self.details,
            "stats": self.stats,
        });
        if let Task::Independence(name) = &self.task {
            j["invariant"] = json!(name);
        }
        if let Some(w) = &self.witness {
            j["witness"] = state_to_json(w);
        }
        j
    }
}

impl fmt::Display for TaskReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.task {
            Task::Consistency => write!(f, "consistency: {}", self.details),
            Task::Independence(name) => write!(f, "independence of {name}: {}", self.details),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Bound;
    use crate::eval::{eval_invariant, EvalMode};
    use crate::parse::{parse_config_file, parse_model};

    fn fixture(model: &str, props: &str) -> (Model, Configuration) {
        let m = parse_model(model, "m.use").unwrap();
        let c = parse_config_file(props, "m.properties", &m).unwrap().get("default").unwrap().clone();
        (m, c)
    }

    #[test]
    fn duplicate_is_not_independent() {
        let (m, c) = fixture(
            include_str!("../corpus/fixtures/duplicate.use"),
            include_str!("../corpus/fixtures/duplicate.properties"),
        );
        let r = check_independence(&m, &c, "Person::nonNegativeAgeCopy", &TaskOptions::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Fails);
        assert_eq!(r.details, "not independent within bounds");
    }

    #[test]
    fn contradictory_is_inconsistent() {
        let (m, c) = fixture(
            include_str!("../corpus/fixtures/contradictory.use"),
            include_str!("../corpus/fixtures/contradictory.properties"),
        );
        let r = check_consistency(&m, &c, &TaskOptions::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Fails);
        assert_eq!(r.to_string(), "consistency: inconsistent within bounds");
        assert!(r.witness.is_none());
    }

    #[test]
    fn empty_model_is_consistent() {
        let r = check_consistency(&Model::empty("M"), &Configuration::default(), &TaskOptions::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Holds);
        assert_eq!(r.witness, Some(SystemState::new()));
    }

    #[test]
    fn vacuous_independence_note() {
        let (m, mut c) = fixture(
            include_str!("../corpus/fixtures/duplicate.use"),
            include_str!("../corpus/fixtures/duplicate.properties"),
        );
        c.class_bounds.insert("Person".into(), Bound::exactly(0));
        let r = check_independence(&m, &c, "Person::nonNegativeAge", &TaskOptions::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Fails);
        assert!(r.details.starts_with("not independent within bounds (vacuous"));
    }

    #[test]
    fn independence_witness_violates_only_target() {
        let (m, c) = fixture(
            "model M class P attributes a : Integer b : Integer end
             constraints context P inv pa: self.a > 0 context P inv pb: self.b > 0",
            "[default]\nP_min = 1\nP_max = 1\n",
        );
        let reports = run_all_independence(&m, &c, &TaskOptions::default()).unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[0].task, Task::Independence("P::pa".into()));
        for r in &reports {
            assert_eq!(r.outcome, Outcome::Holds);
            let w = r.witness.as_ref().unwrap();
            let Task::Independence(target) = &r.task else { unreachable!() };
            for inv in &m.invariants {
                let holds = eval_invariant(inv, w, EvalMode::Solver { bitwidth: c.bitwidth }, &m).unwrap().holds;
                assert_eq!(holds, &inv.qualified_name() != target);
            }
            let j = r.to_json();
            assert_eq!(j["outcome"], "holds");
            assert_eq!(j["invariant"], json!(target));
            assert!(j["witness"].is_object());
        }
    }

    #[test]
    fn unknown_invariant() {
        let e = check_independence(&Model::empty("M"), &Configuration::default(), "A::x", &TaskOptions::default());
        assert_eq!(e.unwrap_err(), TaskError::UnknownInvariant("A::x".into()));
    }
}

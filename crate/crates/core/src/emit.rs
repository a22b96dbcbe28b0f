//! Emitters. Each is a pure function of its inputs; re-emitting gives the
//! same bytes.

use crate::error::{Error, Result};
use crate::framework::{JobRecord, JobStep, RunOutcome};
use crate::macro_lang;
use crate::model::LinkerState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EmitTarget {
    Macro,
    Dag,
    Shell,
    Provenance,
    Manifest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShellScript {
    pub name: String,
    pub text: String,
}

/// Canonical macro-language replay of the state, flows as `::` references.
pub fn emit_macro(state: &LinkerState) -> String {
    macro_lang::serialize_state(state)
}

/// `JOB <name> <name>.sub` per application element in dependency order, then
/// `PARENT <a> CHILD <b>` per sequencing arrow.
pub fn emit_dag(state: &LinkerState) -> Result<String> {
    let mut out = String::new();
    for id in state.dependency_order()? {
        let element = state.get(id);
        if !element.is_terminal() {
            out.push_str(&format!("JOB {0} {0}.sub\n", element.name()));
        }
    }
    for (parent, child) in state.sequencing_arrows()? {
        out.push_str(&format!(
            "PARENT {} CHILD {}\n",
            state.get(parent).name(),
            state.get(child).name()
        ));
    }
    Ok(out)
}

fn script(index: usize, step: &JobStep) -> ShellScript {
    let mut attributes: Vec<&(String, String)> = step.attributes.iter().collect();
    attributes.sort();
    let mut text = String::from("#!/bin/sh\n");
    for (k, v) in attributes {
        text.push_str(&format!("export {k}={v}\n"));
    }
    text.push_str(&format!("exec {}\n", step.element));
    ShellScript {
        name: format!("{index}_{}.sh", step.element),
        text,
    }
}

/// Scripts for the application steps of each job, by job then step order.
pub fn job_scripts(state: &LinkerState, jobs: &[JobRecord]) -> Vec<ShellScript> {
    jobs.iter()
        .flat_map(|job| {
            job.steps
                .iter()
                .filter(|s| state.element(&s.element).is_some_and(|e| !e.is_terminal()))
                .map(move |s| script(job.index, s))
        })
        .collect()
}

/// Scripts for a fully reduced state taken as job 0.
pub fn emit_shell(state: &LinkerState) -> Result<Vec<ShellScript>> {
    let remaining = state.flow_count();
    if remaining > 0 {
        return Err(Error::NotReduced { remaining });
    }
    let steps = state
        .dependency_order()?
        .into_iter()
        .map(|id| state.get(id))
        .filter(|e| !e.is_terminal())
        .map(|e| JobStep {
            element: e.name().to_string(),
            attributes: e
                .attributes()
                .filter_map(|(k, v)| v.as_literal().map(|v| (k.to_string(), v.to_string())))
                .collect(),
        })
        .collect();
    Ok(job_scripts(state, &[JobRecord { index: 0, steps }]))
}

/// One `REDUCE` or `SHADOW` line per provenance event, in sequence order.
pub fn emit_provenance(state: &LinkerState) -> String {
    let mut out = String::new();
    for event in state.provenance() {
        out.push_str(&event.to_string());
        out.push('\n');
    }
    out
}

/// `SUBMIT job=<i> by=<element> steps=<a>,<b>,...` per submitted job.
pub fn emit_manifest(outcome: &RunOutcome) -> String {
    let mut out = String::new();
    for entry in &outcome.manifest {
        let steps = outcome
            .job(entry.job_index)
            .map(|j| j.steps.iter().map(|s| s.element.as_str()).collect::<Vec<_>>().join(","))
            .unwrap_or_default();
        out.push_str(&format!(
            "SUBMIT job={} by={} steps={}\n",
            entry.job_index, entry.submitter, steps
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::description::Description;
    use crate::model::{AttributeValue, DependencyTarget};

    fn app(s: &mut LinkerState, name: &str) {
        s.attach_element(name, Description::single("Application", name), false)
            .unwrap();
    }

    #[test]
    fn empty_state_emits_nothing() {
        let s = LinkerState::new();
        assert_eq!(emit_macro(&s), "");
        assert_eq!(emit_dag(&s).unwrap(), "");
        assert_eq!(emit_provenance(&s), "");
    }

    #[test]
    fn dag_single_and_independent() {
        let mut s = LinkerState::new();
        app(&mut s, "solo");
        assert_eq!(emit_dag(&s).unwrap(), "JOB solo solo.sub\n");
        app(&mut s, "other");
        assert_eq!(emit_dag(&s).unwrap(), "JOB solo solo.sub\nJOB other other.sub\n");
    }

    #[test]
    fn dag_excludes_terminals() {
        let mut s = LinkerState::new();
        s.attach_element("RefDB", Description::single("Database", "RefDB"), true)
            .unwrap();
        app(&mut s, "A");
        app(&mut s, "B");
        s.add_dependency("A", DependencyTarget::ByPattern("Database=RefDB".parse().unwrap()))
            .unwrap();
        s.add_dependency("B", DependencyTarget::ByName("A".into())).unwrap();
        assert_eq!(emit_dag(&s).unwrap(), "JOB A A.sub\nJOB B B.sub\nPARENT A CHILD B\n");
    }

    #[test]
    fn shell_needs_reduced_state() {
        let mut s = LinkerState::new();
        app(&mut s, "A");
        s.set_attribute("A", "x", AttributeValue::flow("@args", "x")).unwrap();
        assert!(matches!(emit_shell(&s), Err(Error::NotReduced { remaining: 1 })));
    }

    #[test]
    fn shell_exports_sorted() {
        let mut s = LinkerState::new();
        app(&mut s, "A");
        s.set_attribute("A", "zeta", AttributeValue::literal("1")).unwrap();
        s.set_attribute("A", "alpha", AttributeValue::literal("2")).unwrap();
        let scripts = emit_shell(&s).unwrap();
        assert_eq!(scripts.len(), 1);
        assert_eq!(scripts[0].name, "0_A.sh");
        assert_eq!(scripts[0].text, "#!/bin/sh\nexport alpha=2\nexport zeta=1\nexec A\n");
    }
}

//! Framework-message execution.
//!
//! The linker issues each framework task, as a message, to every element in
//! dependency order. Groups run in definition order: `preGroup` once,
//! `onGroup` once per job. An element answers a task through the handler
//! bound to it (`oncall <task> do <handler>`), through a handler bound to a
//! task alias, or, for application elements, through the library's default
//! for that task. Unanswered messages are traced and otherwise ignored.
//!
//! Each `onGroup` iteration sets `jobIndex` on every element and starts from
//! the same snapshot of element state, so flows reduced by `configureJob`
//! are restored before the next job is configured.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::kv::KvSource;
use crate::model::{AttributeValue, DependencyTarget, ElementId, Entry, LinkerState, Origin};
use crate::reduction::ArgsBinding;

pub const PRE_GROUP: &str = "preGroup";
pub const ON_GROUP: &str = "onGroup";
/// Per-iteration attribute set on every element during `onGroup`.
pub const JOB_INDEX: &str = "jobIndex";

const FRAMEWORK_DOCUMENT: &str = "framework";

impl LinkerState {
    /// Binds `handler` to `task` on `element`; rebinding replaces.
    pub fn register_handler(&mut self, element: &str, task: &str, handler: &str) -> Result<()> {
        let id = self.element_id(element)?;
        self.bind_handler(id, task, handler)
    }

    pub(crate) fn bind_handler(&mut self, id: ElementId, task: &str, handler: &str) -> Result<()> {
        if !self.handler_names.contains(handler) {
            return Err(Error::UnknownHandler(handler.to_string()));
        }
        let element = self.get_mut(id);
        if element.handlers.insert(task.to_string(), handler.to_string()).is_none() {
            element.layout.push(Entry::Handler(task.to_string()));
        }
        Ok(())
    }

    /// Dependencies of `id` as element handles, pattern targets expanded in
    /// insertion order, duplicates dropped.
    pub fn resolved_dependencies(&self, id: ElementId) -> Vec<ElementId> {
        let mut out: Vec<ElementId> = Vec::new();
        for dep in &self.get(id).dependencies {
            match dep {
                DependencyTarget::ByName(name) => {
                    if let Some(idx) = self.elements.get_index_of(name) {
                        out.push(ElementId(idx));
                    }
                }
                DependencyTarget::ByPattern(pattern) => {
                    for (idx, e) in self.elements.values().enumerate() {
                        if idx != id.0 && pattern.matches(&e.description) {
                            out.push(ElementId(idx));
                        }
                    }
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        out.retain(|d| seen.insert(*d));
        out
    }

    /// Stable topological order: every element after its dependencies, ties
    /// broken by insertion order.
    pub fn dependency_order(&self) -> Result<Vec<ElementId>> {
        let n = self.elements.len();
        let deps: Vec<Vec<ElementId>> = (0..n).map(|i| self.resolved_dependencies(ElementId(i))).collect();
        let mut indegree = vec![0usize; n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (child, parents) in deps.iter().enumerate() {
            for p in parents {
                children[p.0].push(child);
                indegree[child] += 1;
            }
        }
        let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        let mut done = vec![false; n];
        while let Some(Reverse(i)) = ready.pop() {
            done[i] = true;
            order.push(ElementId(i));
            for &c in &children[i] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        if order.len() == n {
            return Ok(order);
        }
        let start = (0..n).find(|&i| !done[i]).expect("unfinished element");
        let mut walk = vec![start];
        let mut seen = HashMap::from([(start, 0usize)]);
        loop {
            let current = *walk.last().unwrap();
            let next = deps[current]
                .iter()
                .map(|d| d.0)
                .find(|&d| !done[d])
                .expect("residual element has an unfinished dependency");
            if let Some(&pos) = seen.get(&next) {
                let mut path: Vec<String> = walk[pos..].iter().map(|&i| self.elements[i].name.clone()).collect();
                path.push(self.elements[next].name.clone());
                return Err(Error::DependencyCycle { path });
            }
            seen.insert(next, walk.len());
            walk.push(next);
        }
    }

    /// Sequencing arrows `(parent, child)` between application elements, by
    /// child in dependency order. Dependencies on terminals only order
    /// execution and are not arrows of the workflow graph.
    pub fn sequencing_arrows(&self) -> Result<Vec<(ElementId, ElementId)>> {
        let mut arrows = Vec::new();
        for child in self.dependency_order()? {
            if self.get(child).is_terminal {
                continue;
            }
            for parent in self.resolved_dependencies(child) {
                if !self.get(parent).is_terminal {
                    arrows.push((parent, child));
                }
            }
        }
        Ok(arrows)
    }
}

/// Everything a handler may touch.
pub struct HandlerCall<'a> {
    pub state: &'a mut LinkerState,
    pub element: ElementId,
    pub task: &'a str,
    /// `Some(i)` inside `onGroup` iteration `i`.
    pub iteration: Option<usize>,
    pub env: &'a RunEnv,
    pub book: &'a mut JobBook,
}

impl HandlerCall<'_> {
    pub fn element_name(&self) -> String {
        self.state.get(self.element).name.clone()
    }

    pub fn fail(&self, cause: impl Into<String>) -> Error {
        Error::Handler {
            element: self.element_name(),
            task: self.task.to_string(),
            cause: cause.into(),
        }
    }
}

pub type Handler = Arc<dyn Fn(&mut HandlerCall<'_>) -> Result<()> + Send + Sync>;

/// Named handlers, plus default handlers answered by application elements
/// that have no explicit binding for a task.
#[derive(Clone)]
pub struct HandlerLibrary {
    handlers: IndexMap<String, Handler>,
    defaults: IndexMap<String, String>,
}

impl HandlerLibrary {
    pub fn empty() -> Self {
        Self {
            handlers: IndexMap::new(),
            defaults: IndexMap::new(),
        }
    }

    /// `connectToDatabase`, `configureJob`, `makeJob` and `submit`;
    /// application elements answer `configureJob` and `makeJob` by default.
    pub fn builtin() -> Self {
        let mut lib = Self::empty();
        lib.register("connectToDatabase", connect_to_database);
        lib.register("configureJob", configure_job);
        lib.register("makeJob", make_job);
        lib.register("submit", submit);
        lib.set_default("configureJob", "configureJob");
        lib.set_default("makeJob", "makeJob");
        lib
    }

    pub fn register<F>(&mut self, name: &str, handler: F)
    where
        F: Fn(&mut HandlerCall<'_>) -> Result<()> + Send + Sync + 'static,
    {
        self.handlers.insert(name.to_string(), Arc::new(handler));
    }

    pub fn set_default(&mut self, task: &str, handler: &str) {
        self.defaults.insert(task.to_string(), handler.to_string());
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.handlers.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.handlers.contains_key(name)
    }

    /// Lets `state` accept bindings to every handler in this library.
    pub fn install(&self, state: &mut LinkerState) {
        for name in self.names() {
            state.allow_handler(name);
        }
    }
}

impl Default for HandlerLibrary {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Run-time inputs: `@args` values and metadata sources for terminals.
#[derive(Debug, Clone, Default)]
pub struct RunEnv {
    pub args: ArgsBinding,
    pub sources: Vec<KvSource>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub group: String,
    pub iteration: usize,
    pub task: String,
    pub element: String,
    pub handled: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DispatchTrace {
    pub messages: Vec<Message>,
}

impl DispatchTrace {
    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }
}

/// One element's contribution to a job: its reduced attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobStep {
    pub element: String,
    pub attributes: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobRecord {
    pub index: usize,
    pub steps: Vec<JobStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub job_index: usize,
    pub submitter: String,
}

/// Jobs made so far and the submission manifest.
#[derive(Debug, Clone, Default)]
pub struct JobBook {
    pub current: Option<JobRecord>,
    pub jobs: Vec<JobRecord>,
    pub manifest: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub trace: DispatchTrace,
    pub jobs: Vec<JobRecord>,
    pub manifest: Vec<ManifestEntry>,
}

impl RunOutcome {
    pub fn job(&self, index: usize) -> Option<&JobRecord> {
        self.jobs.iter().find(|j| j.index == index)
    }
}

pub struct Framework {
    library: HandlerLibrary,
    env: RunEnv,
}

impl Framework {
    pub fn new(env: RunEnv) -> Self {
        Self::with_library(HandlerLibrary::builtin(), env)
    }

    pub fn with_library(library: HandlerLibrary, env: RunEnv) -> Self {
        Self { library, env }
    }

    pub fn env(&self) -> &RunEnv {
        &self.env
    }

    /// Runs every framework group: `onGroup` `n_jobs` times, all others once.
    pub fn run(&self, state: &mut LinkerState, n_jobs: usize) -> Result<RunOutcome> {
        let order = state.dependency_order()?;
        let groups: Vec<(String, Vec<String>)> = state
            .framework_groups()
            .map(|(g, t)| (g.to_string(), t.to_vec()))
            .collect();
        let mut trace = DispatchTrace::default();
        let mut book = JobBook::default();
        for (group, tasks) in &groups {
            if group == ON_GROUP {
                for i in 0..n_jobs {
                    self.iteration(state, group, tasks, i, &order, &mut trace, &mut book)?;
                }
            } else {
                self.dispatch(state, group, tasks, None, &order, &mut trace, &mut book)?;
            }
        }
        Ok(RunOutcome {
            trace,
            jobs: book.jobs,
            manifest: book.manifest,
        })
    }

    /// Runs one group a single time, outside any job iteration. A group that
    /// is not defined issues nothing.
    pub fn run_group_once(&self, state: &mut LinkerState, group: &str) -> Result<DispatchTrace> {
        let order = state.dependency_order()?;
        let tasks = state
            .framework_groups()
            .find(|(g, _)| *g == group)
            .map(|(_, t)| t.to_vec())
            .unwrap_or_default();
        let mut trace = DispatchTrace::default();
        let mut book = JobBook::default();
        self.dispatch(state, group, &tasks, None, &order, &mut trace, &mut book)?;
        Ok(trace)
    }

    #[allow(clippy::too_many_arguments)]
    fn iteration(
        &self,
        state: &mut LinkerState,
        group: &str,
        tasks: &[String],
        index: usize,
        order: &[ElementId],
        trace: &mut DispatchTrace,
        book: &mut JobBook,
    ) -> Result<()> {
        let snapshot = state.elements.clone();
        for &id in order {
            state.put_attribute(
                id,
                JOB_INDEX,
                AttributeValue::Literal(index.to_string()),
                Origin::document(FRAMEWORK_DOCUMENT),
            );
        }
        book.current = Some(JobRecord {
            index,
            steps: Vec::new(),
        });
        let result = self.dispatch(state, group, tasks, Some(index), order, trace, book);
        if let Some(job) = book.current.take() {
            if !job.steps.is_empty() {
                book.jobs.push(job);
            }
        }
        // implicit reset between jobs
        state.elements = snapshot;
        result
    }

    #[allow(clippy::too_many_arguments)]
    fn dispatch(
        &self,
        state: &mut LinkerState,
        group: &str,
        tasks: &[String],
        iteration: Option<usize>,
        order: &[ElementId],
        trace: &mut DispatchTrace,
        book: &mut JobBook,
    ) -> Result<()> {
        for task in tasks {
            for &id in order {
                let handler = self.handler_for(state, id, task);
                trace.messages.push(Message {
                    group: group.to_string(),
                    iteration: iteration.unwrap_or(0),
                    task: task.clone(),
                    element: state.get(id).name.clone(),
                    handled: handler.is_some(),
                });
                let Some(name) = handler else { continue };
                let f = self
                    .library
                    .handlers
                    .get(&name)
                    .cloned()
                    .ok_or_else(|| Error::UnknownHandler(name.clone()))?;
                let mut call = HandlerCall {
                    state,
                    element: id,
                    task,
                    iteration,
                    env: &self.env,
                    book,
                };
                if let Err(e) = f(&mut call) {
                    return Err(match e {
                        Error::Handler { .. } => e,
                        other => call.fail(other.to_string()),
                    });
                }
            }
        }
        Ok(())
    }

    fn handler_for(&self, state: &LinkerState, id: ElementId, task: &str) -> Option<String> {
        let element = state.get(id);
        if let Some(h) = element.handler(task) {
            return Some(h.to_string());
        }
        for (bound, handler) in element.handlers() {
            if state.task_aliases.get(bound).is_some_and(|t| t == task) {
                return Some(handler.to_string());
            }
        }
        if element.is_terminal {
            return None;
        }
        self.library.defaults.get(task).cloned()
    }
}

fn connect_to_database(call: &mut HandlerCall<'_>) -> Result<()> {
    let description = call.state.get(call.element).description.clone();
    let source = call
        .env
        .sources
        .iter()
        .find(|s| s.description().to_pattern().matches(&description))
        .ok_or_else(|| call.fail(format!("no metadata source matches {description}")))?;
    let entries = source.load()?;
    let origin = Origin::document(source.label());
    for (k, v) in entries {
        call.state
            .put_attribute(call.element, &k, AttributeValue::Literal(v), origin.clone());
    }
    Ok(())
}

fn configure_job(call: &mut HandlerCall<'_>) -> Result<()> {
    let args = &call.env.args;
    for key in call.state.get(call.element).flowed_keys() {
        call.state.read_slot(call.element, &key, args)?;
    }
    call.state.eval_element_checks(call.element, args)
}

fn make_job(call: &mut HandlerCall<'_>) -> Result<()> {
    let element = call.state.get(call.element);
    let remaining = element.flow_count();
    if remaining > 0 {
        return Err(call.fail(Error::NotReduced { remaining }.to_string()));
    }
    let step = JobStep {
        element: element.name.clone(),
        attributes: element
            .attributes()
            .filter_map(|(k, v)| v.as_literal().map(|v| (k.to_string(), v.to_string())))
            .collect(),
    };
    match call.book.current.as_mut() {
        Some(job) => {
            job.steps.push(step);
            Ok(())
        }
        None => Err(call.fail("makeJob issued outside an onGroup iteration")),
    }
}

fn submit(call: &mut HandlerCall<'_>) -> Result<()> {
    let job_index = match &call.book.current {
        Some(job) => job.index,
        None => return Err(call.fail("submit issued outside an onGroup iteration")),
    };
    let submitter = call.element_name();
    call.book.manifest.push(ManifestEntry { job_index, submitter });
    Ok(())
}

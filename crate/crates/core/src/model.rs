//! Graph entities held by the linker: workflow elements, their attributes and
//! metadata flows, dependencies, handlers, and the mutable [`LinkerState`].
//!
//! The state is the constrained, unreduced workflow: application nodes and
//! metadata terminals, with every `FlowRef` attribute standing for one
//! metadata flow still to be reduced. Context application lives in
//! [`crate::context`], reduction in [`crate::reduction`], and framework
//! dispatch in [`crate::framework`]; each extends `LinkerState` with its own
//! `impl` block.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::context::{CollisionRecord, LoadedContext};
use crate::description::{Description, DescriptionPattern};
use crate::error::{Error, Result};
use crate::reduction::{EventKind, ReductionEvent};

/// Reserved source name for run-time arguments.
pub const ARGS_SOURCE: &str = "@args";

/// Document id recorded for statements executed from a workflow file or the API.
pub const WORKFLOW_DOCUMENT: &str = "workflow";

/// `element.attribute`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AttrRef {
    pub element: String,
    pub attribute: String,
}

impl AttrRef {
    pub fn new(element: impl Into<String>, attribute: impl Into<String>) -> Self {
        Self {
            element: element.into(),
            attribute: attribute.into(),
        }
    }
}

impl fmt::Display for AttrRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.element, self.attribute)
    }
}

/// Where a metadata flow reads from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SourceRef {
    /// An element name or namespace alias, resolved at reduction time.
    Element(String),
    /// The run-time argument binding (`@args`).
    Args,
}

impl SourceRef {
    pub fn parse(name: &str) -> Self {
        if name == ARGS_SOURCE {
            SourceRef::Args
        } else {
            SourceRef::Element(name.to_string())
        }
    }

    pub fn name(&self) -> &str {
        match self {
            SourceRef::Element(n) => n,
            SourceRef::Args => ARGS_SOURCE,
        }
    }
}

impl fmt::Display for SourceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AttributeValue {
    Literal(String),
    /// One metadata flow: this attribute takes the value of `source.attribute`.
    FlowRef {
        source: SourceRef,
        attribute: String,
    },
    Unset,
}

impl AttributeValue {
    pub fn literal(v: impl Into<String>) -> Self {
        AttributeValue::Literal(v.into())
    }

    pub fn flow(source: &str, attribute: impl Into<String>) -> Self {
        AttributeValue::FlowRef {
            source: SourceRef::parse(source),
            attribute: attribute.into(),
        }
    }

    pub fn is_flow(&self) -> bool {
        matches!(self, AttributeValue::FlowRef { .. })
    }

    pub fn as_literal(&self) -> Option<&str> {
        match self {
            AttributeValue::Literal(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::Literal(v) => f.write_str(v),
            AttributeValue::FlowRef { source, attribute } => write!(f, "::{source}:{attribute}"),
            AttributeValue::Unset => Ok(()),
        }
    }
}

/// Which document wrote an attribute, and under which block header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    pub document: String,
    pub header: Option<DescriptionPattern>,
}

impl Origin {
    pub fn workflow() -> Self {
        Self::document(WORKFLOW_DOCUMENT)
    }

    pub fn document(id: impl Into<String>) -> Self {
        Self {
            document: id.into(),
            header: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub value: AttributeValue,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DependencyTarget {
    ByName(String),
    /// Every other attached element whose description matches.
    ByPattern(DescriptionPattern),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckConstraint {
    pub target: AttrRef,
    pub expected: AttributeValue,
}

/// Serialization order of an element's entries: position of first insertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Entry {
    Dependency(usize),
    Alias(String),
    Attribute(String),
    Handler(String),
    Check(usize),
}

/// Stable handle to an attached element. Elements are never removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementId(pub usize);

#[derive(Debug, Clone)]
pub struct WorkflowElement {
    pub(crate) name: String,
    pub(crate) description: Description,
    pub(crate) is_terminal: bool,
    pub(crate) attributes: IndexMap<String, Attribute>,
    pub(crate) dependencies: Vec<DependencyTarget>,
    pub(crate) handlers: IndexMap<String, String>,
    pub(crate) aliases: IndexMap<String, DescriptionPattern>,
    pub(crate) checks: Vec<(String, AttributeValue)>,
    pub(crate) layout: Vec<Entry>,
}

impl WorkflowElement {
    fn new(name: String, description: Description, is_terminal: bool) -> Self {
        Self {
            name,
            description,
            is_terminal,
            attributes: IndexMap::new(),
            dependencies: Vec::new(),
            handlers: IndexMap::new(),
            aliases: IndexMap::new(),
            checks: Vec::new(),
            layout: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &Description {
        &self.description
    }

    pub fn is_terminal(&self) -> bool {
        self.is_terminal
    }

    pub fn attribute(&self, key: &str) -> Option<&AttributeValue> {
        self.attributes.get(key).map(|a| &a.value)
    }

    pub fn attribute_entry(&self, key: &str) -> Option<&Attribute> {
        self.attributes.get(key)
    }

    /// Attributes in insertion order.
    pub fn attributes(&self) -> impl Iterator<Item = (&str, &AttributeValue)> {
        self.attributes.iter().map(|(k, a)| (k.as_str(), &a.value))
    }

    pub fn dependencies(&self) -> &[DependencyTarget] {
        &self.dependencies
    }

    pub fn handler(&self, task: &str) -> Option<&str> {
        self.handlers.get(task).map(String::as_str)
    }

    pub fn handlers(&self) -> impl Iterator<Item = (&str, &str)> {
        self.handlers.iter().map(|(t, h)| (t.as_str(), h.as_str()))
    }

    /// Element-scoped namespace aliases.
    pub fn aliases(&self) -> impl Iterator<Item = (&str, &DescriptionPattern)> {
        self.aliases.iter().map(|(a, p)| (a.as_str(), p))
    }

    pub fn flow_count(&self) -> usize {
        self.attributes.values().filter(|a| a.value.is_flow()).count()
    }

    /// Keys of attributes that still carry a metadata flow.
    pub fn flowed_keys(&self) -> Vec<String> {
        self.attributes
            .iter()
            .filter(|(_, a)| a.value.is_flow())
            .map(|(k, _)| k.clone())
            .collect()
    }

    /// Order-insensitive comparison of everything but provenance and layout.
    pub fn equivalent(&self, other: &WorkflowElement) -> bool {
        fn attrs(e: &WorkflowElement) -> BTreeMap<&str, &AttributeValue> {
            e.attributes.iter().map(|(k, a)| (k.as_str(), &a.value)).collect()
        }
        fn deps(e: &WorkflowElement) -> HashSet<&DependencyTarget> {
            e.dependencies.iter().collect()
        }
        fn checks(e: &WorkflowElement) -> HashSet<&(String, AttributeValue)> {
            e.checks.iter().collect()
        }
        fn aliases(e: &WorkflowElement) -> BTreeMap<&str, String> {
            e.aliases.iter().map(|(a, p)| (a.as_str(), p.to_string())).collect()
        }
        fn handlers(e: &WorkflowElement) -> BTreeMap<&str, &str> {
            e.handlers().collect()
        }
        self.name == other.name
            && self.description == other.description
            && self.is_terminal == other.is_terminal
            && attrs(self) == attrs(other)
            && deps(self) == deps(other)
            && handlers(self) == handlers(other)
            && aliases(self) == aliases(other)
            && checks(self) == checks(other)
    }
}

/// Names of the handlers every state accepts in `oncall` bindings.
pub const BUILTIN_HANDLERS: [&str; 4] = ["connectToDatabase", "configureJob", "makeJob", "submit"];

/// The constrained unreduced workflow held by the linker.
#[derive(Debug, Clone)]
pub struct LinkerState {
    pub(crate) elements: IndexMap<String, WorkflowElement>,
    pub(crate) framework_groups: IndexMap<String, Vec<String>>,
    pub(crate) task_aliases: IndexMap<String, String>,
    pub(crate) aliases: IndexMap<String, DescriptionPattern>,
    pub(crate) contexts: Vec<LoadedContext>,
    pub(crate) applied: HashSet<(usize, usize)>,
    pub(crate) provenance: Vec<ReductionEvent>,
    pub(crate) collisions: Vec<CollisionRecord>,
    pub(crate) handler_names: BTreeSet<String>,
    pub(crate) run_requested: bool,
    next_seq: u64,
}

impl Default for LinkerState {
    fn default() -> Self {
        Self::new()
    }
}

impl LinkerState {
    pub fn new() -> Self {
        Self {
            elements: IndexMap::new(),
            framework_groups: IndexMap::new(),
            task_aliases: IndexMap::new(),
            aliases: IndexMap::new(),
            contexts: Vec::new(),
            applied: HashSet::new(),
            provenance: Vec::new(),
            collisions: Vec::new(),
            handler_names: BUILTIN_HANDLERS.iter().map(|s| s.to_string()).collect(),
            run_requested: false,
            next_seq: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> impl Iterator<Item = &WorkflowElement> {
        self.elements.values()
    }

    pub fn element(&self, name: &str) -> Option<&WorkflowElement> {
        self.elements.get(name)
    }

    pub fn element_id(&self, name: &str) -> Result<ElementId> {
        self.elements
            .get_index_of(name)
            .map(ElementId)
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn get(&self, id: ElementId) -> &WorkflowElement {
        &self.elements[id.0]
    }

    pub(crate) fn get_mut(&mut self, id: ElementId) -> &mut WorkflowElement {
        &mut self.elements[id.0]
    }

    pub fn framework_groups(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.framework_groups.iter().map(|(g, t)| (g.as_str(), t.as_slice()))
    }

    pub fn define_group(&mut self, group: impl Into<String>, tasks: Vec<String>) {
        self.framework_groups.insert(group.into(), tasks);
    }

    /// Handlers bound to task `alias` also answer framework task `task`.
    pub fn alias_task(&mut self, alias: impl Into<String>, task: impl Into<String>) {
        self.task_aliases.insert(alias.into(), task.into());
    }

    pub fn task_aliases(&self) -> impl Iterator<Item = (&str, &str)> {
        self.task_aliases.iter().map(|(a, t)| (a.as_str(), t.as_str()))
    }

    /// Global namespace aliases (`namespace add` outside any element).
    pub fn aliases(&self) -> impl Iterator<Item = (&str, &DescriptionPattern)> {
        self.aliases.iter().map(|(a, p)| (a.as_str(), p))
    }

    pub fn add_alias(&mut self, alias: impl Into<String>, pattern: DescriptionPattern) {
        self.aliases.insert(alias.into(), pattern);
    }

    pub fn loaded_contexts(&self) -> impl Iterator<Item = &str> {
        self.contexts.iter().map(|c| c.id.as_str())
    }

    /// Whether a `framework run` statement has been executed.
    pub fn run_requested(&self) -> bool {
        self.run_requested
    }

    pub fn request_run(&mut self) {
        self.run_requested = true;
    }

    /// Accept `name` in `oncall` bindings (for custom handler libraries).
    pub fn allow_handler(&mut self, name: impl Into<String>) {
        self.handler_names.insert(name.into());
    }

    pub fn checks(&self) -> Vec<CheckConstraint> {
        self.elements
            .values()
            .flat_map(|e| {
                e.checks.iter().map(|(k, v)| CheckConstraint {
                    target: AttrRef::new(&e.name, k),
                    expected: v.clone(),
                })
            })
            .collect()
    }

    /// Adds an element at the end of insertion order and applies every loaded
    /// context to it, in load order.
    pub fn attach_element(
        &mut self,
        name: &str,
        description: Description,
        is_terminal: bool,
    ) -> Result<ElementId> {
        if self.elements.contains_key(name) {
            return Err(Error::DuplicateElement(name.to_string()));
        }
        let (idx, _) = self.elements.insert_full(
            name.to_string(),
            WorkflowElement::new(name.to_string(), description, is_terminal),
        );
        let id = ElementId(idx);
        self.apply_blocks(id)?;
        Ok(id)
    }

    /// Sets an attribute as written by the workflow document.
    pub fn set_attribute(&mut self, element: &str, key: &str, value: AttributeValue) -> Result<()> {
        let id = self.element_id(element)?;
        self.write_attribute(id, key, value, Origin::workflow());
        Ok(())
    }

    /// Directive write: replacing an existing value is recorded as shadowing
    /// in both the collision report and provenance. Rewriting the same value
    /// from the same document is a no-op.
    pub(crate) fn write_attribute(
        &mut self,
        id: ElementId,
        key: &str,
        value: AttributeValue,
        origin: Origin,
    ) {
        let element = &self.elements[id.0];
        if let Some(existing) = element.attributes.get(key) {
            if existing.value == value && existing.origin.document == origin.document {
                return;
            }
            if existing.value != AttributeValue::Unset {
                let target = AttrRef::new(&element.name, key);
                let losing = existing.clone();
                let winning = Attribute {
                    value: value.clone(),
                    origin: origin.clone(),
                };
                let intentional = match (&winning.origin.header, &losing.origin.header) {
                    (Some(w), Some(l)) => w.is_more_specific_than(l),
                    _ => false,
                };
                self.record(EventKind::Shadow {
                    target: target.clone(),
                    previous_document: losing.origin.document.clone(),
                    document: winning.origin.document.clone(),
                    previous_value: losing.value.to_string(),
                    value: winning.value.to_string(),
                });
                self.collisions.push(CollisionRecord {
                    target,
                    losing,
                    winning,
                    intentional,
                });
            }
        }
        self.put_attribute(id, key, value, origin);
    }

    /// Raw store, no shadow bookkeeping. Used by reduction, metadata source
    /// loading and per-iteration attributes.
    pub(crate) fn put_attribute(&mut self, id: ElementId, key: &str, value: AttributeValue, origin: Origin) {
        let element = &mut self.elements[id.0];
        let attribute = Attribute { value, origin };
        if element.attributes.insert(key.to_string(), attribute).is_none() {
            element.layout.push(Entry::Attribute(key.to_string()));
        }
    }

    pub(crate) fn record(&mut self, kind: EventKind) {
        self.next_seq += 1;
        self.provenance.push(ReductionEvent {
            seq: self.next_seq,
            kind,
        });
    }

    /// Appends a dependency; duplicates are ignored. A `Key=Value` pattern
    /// dependency also registers the element-scoped alias `Value`.
    pub fn add_dependency(&mut self, element: &str, target: DependencyTarget) -> Result<()> {
        let id = self.element_id(element)?;
        self.add_dependency_to(id, target)
    }

    pub(crate) fn add_dependency_to(&mut self, id: ElementId, target: DependencyTarget) -> Result<()> {
        if let DependencyTarget::ByName(name) = &target {
            self.element_id(name)?;
        }
        let element = self.get_mut(id);
        if element.dependencies.contains(&target) {
            return Ok(());
        }
        element.dependencies.push(target.clone());
        let idx = element.dependencies.len() - 1;
        element.layout.push(Entry::Dependency(idx));
        if let DependencyTarget::ByPattern(pattern) = target {
            if let Some(alias) = pattern.sole_value() {
                let alias = alias.to_string();
                self.add_scoped_alias(id, &alias, pattern);
            }
        }
        Ok(())
    }

    pub(crate) fn add_scoped_alias(&mut self, id: ElementId, alias: &str, pattern: DescriptionPattern) {
        let element = self.get_mut(id);
        if element.aliases.insert(alias.to_string(), pattern).is_none() {
            element.layout.push(Entry::Alias(alias.to_string()));
        }
    }

    pub(crate) fn add_check(&mut self, id: ElementId, key: &str, expected: AttributeValue) {
        let element = self.get_mut(id);
        let check = (key.to_string(), expected);
        if !element.checks.contains(&check) {
            element.checks.push(check);
            let idx = element.checks.len() - 1;
            element.layout.push(Entry::Check(idx));
        }
    }

    /// Number of metadata flows still unreduced.
    pub fn flow_count(&self) -> usize {
        self.elements.values().map(WorkflowElement::flow_count).sum()
    }

    pub fn is_fully_reduced(&self) -> bool {
        self.flow_count() == 0
    }

    /// One edge per metadata flow, from the resolved source element (or
    /// `@args`) to the target element.
    pub fn metadata_subgraph(&self) -> Result<Vec<(String, String)>> {
        let mut edges = Vec::new();
        for (idx, element) in self.elements.values().enumerate() {
            for (key, attr) in &element.attributes {
                if let AttributeValue::FlowRef { source, .. } = &attr.value {
                    let from = match self.resolve_source(ElementId(idx), key, source)? {
                        Some(sid) => self.get(sid).name.clone(),
                        None => ARGS_SOURCE.to_string(),
                    };
                    edges.push((from, element.name.clone()));
                }
            }
        }
        Ok(edges)
    }

    /// Order-insensitive state comparison over elements, groups and aliases.
    pub fn equivalent(&self, other: &LinkerState) -> bool {
        self.elements.len() == other.elements.len()
            && self.elements.values().all(|e| {
                other
                    .elements
                    .get(&e.name)
                    .is_some_and(|o| e.equivalent(o))
            })
            && self.framework_groups == other.framework_groups
            && self.aliases == other.aliases
    }

    pub(crate) fn context_blocks(&self, doc: usize) -> Arc<Vec<crate::macro_lang::ContextBlock>> {
        Arc::clone(&self.contexts[doc].blocks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn app(state: &mut LinkerState, name: &str) -> ElementId {
        state
            .attach_element(name, Description::single("Application", name), false)
            .unwrap()
    }

    #[test]
    fn new_state_is_empty() {
        let s = LinkerState::new();
        assert_eq!(s.flow_count(), 0);
        assert_eq!(s.len(), 0);
        assert!(s.framework_groups().next().is_none());
        assert!(s.aliases().next().is_none());
    }

    #[test]
    fn attach_without_contexts() {
        let mut s = LinkerState::new();
        app(&mut s, "CMKIN");
        assert_eq!(s.len(), 1);
        assert_eq!(s.flow_count(), 0);
        assert_eq!(s.element("CMKIN").unwrap().attributes().count(), 0);
    }

    #[test]
    fn duplicate_attach_is_rejected() {
        let mut s = LinkerState::new();
        app(&mut s, "CMKIN");
        let err = s
            .attach_element("CMKIN", Description::single("Application", "CMKIN"), false)
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateElement(n) if n == "CMKIN"));
    }

    #[test]
    fn flow_define_counts_and_literal_overwrite_does_not() {
        let mut s = LinkerState::new();
        app(&mut s, "CMKIN");
        app(&mut s, "OSCAR");
        s.set_attribute("OSCAR", "inputFile", AttributeValue::flow("CMKIN", "outputFile"))
            .unwrap();
        assert_eq!(s.flow_count(), 1);
        s.set_attribute("CMKIN", "ApplicationVersion", AttributeValue::literal("6.133"))
            .unwrap();
        s.set_attribute("CMKIN", "ApplicationVersion", AttributeValue::literal("6.134"))
            .unwrap();
        assert_eq!(s.flow_count(), 1);
        assert_eq!(
            s.element("CMKIN").unwrap().attribute("ApplicationVersion"),
            Some(&AttributeValue::literal("6.134"))
        );
    }

    #[test]
    fn flow_replacement_keeps_one_flow_and_records_shadowing() {
        let mut s = LinkerState::new();
        for n in ["X", "B", "C"] {
            app(&mut s, n);
        }
        s.set_attribute("X", "a", AttributeValue::flow("B", "b")).unwrap();
        s.set_attribute("X", "a", AttributeValue::flow("C", "c")).unwrap();
        assert_eq!(s.flow_count(), 1);
        assert_eq!(s.element("X").unwrap().attribute("a"), Some(&AttributeValue::flow("C", "c")));
        assert_eq!(s.provenance().len(), 1);
        assert!(matches!(s.provenance()[0].kind, EventKind::Shadow { .. }));
    }

    #[test]
    fn unknown_element_errors() {
        let mut s = LinkerState::new();
        assert!(matches!(
            s.set_attribute("nope", "a", AttributeValue::literal("1")),
            Err(Error::UnknownElement(_))
        ));
        app(&mut s, "A");
        assert!(matches!(
            s.add_dependency("A", DependencyTarget::ByName("B".into())),
            Err(Error::UnknownElement(n)) if n == "B"
        ));
    }

    #[test]
    fn dependencies_are_idempotent() {
        let mut s = LinkerState::new();
        app(&mut s, "CMKIN");
        app(&mut s, "OSCAR");
        for _ in 0..2 {
            s.add_dependency("OSCAR", DependencyTarget::ByName("CMKIN".into()))
                .unwrap();
        }
        assert_eq!(s.element("OSCAR").unwrap().dependencies().len(), 1);
    }

    #[test]
    fn pattern_dependency_registers_scoped_alias() {
        let mut s = LinkerState::new();
        s.attach_element("RefDB", Description::single("Database", "RefDB"), true)
            .unwrap();
        app(&mut s, "CMKIN");
        let p: DescriptionPattern = "Database=RefDB".parse().unwrap();
        s.add_dependency("CMKIN", DependencyTarget::ByPattern(p.clone()))
            .unwrap();
        let cmkin = s.element("CMKIN").unwrap();
        assert_eq!(cmkin.aliases().collect::<Vec<_>>(), vec![("RefDB", &p)]);
        let resolved = s.resolved_dependencies(s.element_id("CMKIN").unwrap());
        assert_eq!(resolved, vec![s.element_id("RefDB").unwrap()]);
    }

    #[test]
    fn metadata_subgraph_edges() {
        let mut s = LinkerState::new();
        assert!(s.metadata_subgraph().unwrap().is_empty());
        for n in ["CMKIN", "OSCAR", "Digitization"] {
            app(&mut s, n);
        }
        s.set_attribute("OSCAR", "inputFile", AttributeValue::flow("CMKIN", "outputFile"))
            .unwrap();
        s.set_attribute("Digitization", "inputDataset", AttributeValue::flow("OSCAR", "outputDataset"))
            .unwrap();
        s.set_attribute("Digitization", "inputRunNumber", AttributeValue::flow("OSCAR", "outputRunNumber"))
            .unwrap();
        s.set_attribute("Digitization", "jdl", AttributeValue::flow("@args", "UserJDLFile"))
            .unwrap();
        let edges = s.metadata_subgraph().unwrap();
        let pair = |a: &str, b: &str| (a.to_string(), b.to_string());
        assert_eq!(
            edges,
            vec![
                pair("CMKIN", "OSCAR"),
                pair("OSCAR", "Digitization"),
                pair("OSCAR", "Digitization"),
                pair("@args", "Digitization"),
            ]
        );
        assert_eq!(edges.len(), s.flow_count());
    }

    #[test]
    fn unresolved_flow_source_in_subgraph() {
        let mut s = LinkerState::new();
        app(&mut s, "A");
        s.set_attribute("A", "x", AttributeValue::flow("Nowhere", "y")).unwrap();
        assert!(matches!(s.metadata_subgraph(), Err(Error::UnresolvedSource { .. })));
    }

    #[test]
    fn iteration_order_is_stable() {
        let mut s = LinkerState::new();
        for n in ["c", "a", "b"] {
            app(&mut s, n);
        }
        let first: Vec<_> = s.elements().map(|e| e.name().to_string()).collect();
        let second: Vec<_> = s.elements().map(|e| e.name().to_string()).collect();
        assert_eq!(first, ["c", "a", "b"]);
        assert_eq!(first, second);
    }
}

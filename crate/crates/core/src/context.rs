//! Loading context documents into a [`LinkerState`] and applying their blocks.
//!
//! Top-level statements of a context (terminal attaches, framework defines,
//! global aliases) run once, at load time. Blocks run for each element whose
//! description matches the header: when the element is attached, or at load
//! time for elements already present. Documents apply in load order, so
//! the document loaded last wins any write to the same attribute; every such
//! overwrite is kept as a [`CollisionRecord`].

use std::sync::Arc;

use crate::description::{Description, DescriptionPattern};
use crate::error::{Error, Result};
use crate::macro_lang::{ContextBlock, ContextDocument, Directive, Statement};
use crate::model::{Attribute, AttrRef, DependencyTarget, ElementId, LinkerState, Origin, WORKFLOW_DOCUMENT};

/// Description key given to elements attached from a workflow.
pub const APPLICATION_KEY: &str = "Application";
/// Description key given to terminals attached from a context.
pub const DATABASE_KEY: &str = "Database";

#[derive(Debug, Clone)]
pub(crate) struct LoadedContext {
    pub(crate) id: String,
    pub(crate) blocks: Arc<Vec<ContextBlock>>,
}

/// One overwrite of an attribute already holding a value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionRecord {
    pub target: AttrRef,
    pub losing: Attribute,
    pub winning: Attribute,
    /// The winning block header is strictly narrower than the losing one,
    /// as when a site-specific context overrides a general default.
    pub intentional: bool,
}

pub fn match_header(pattern: &DescriptionPattern, description: &Description) -> bool {
    pattern.matches(description)
}

impl LinkerState {
    /// Loads a parsed context: top-level statements execute now, blocks are
    /// registered and applied to every element already attached.
    pub fn load_context(&mut self, doc: &ContextDocument) -> Result<()> {
        let existing = self.elements.len();
        let doc_idx = self.contexts.len();
        self.contexts.push(LoadedContext {
            id: doc.id.clone(),
            blocks: doc.shared_blocks(),
        });
        for statement in doc.statements() {
            match statement {
                Statement::Attach { name } => {
                    self.attach_element(name, Description::single(DATABASE_KEY, name), true)?;
                }
                Statement::FrameworkDefine { group, tasks } => self.define_group(group, tasks.clone()),
                Statement::FrameworkAlias { alias, task } => self.alias_task(alias, task),
                Statement::NamespaceAdd {
                    scope: None,
                    alias,
                    pattern,
                } => self.add_alias(alias, pattern.clone()),
                other => {
                    return Err(Error::syntax(
                        0,
                        format!("statement not allowed at context top level: {other:?}"),
                    ))
                }
            }
        }
        for idx in 0..existing {
            self.apply_document(doc_idx, ElementId(idx))?;
        }
        Ok(())
    }

    /// Applies every loaded document's matching blocks to `id`, in load order.
    /// Each (document, element) pair is applied at most once.
    pub fn apply_blocks(&mut self, id: ElementId) -> Result<()> {
        for doc_idx in 0..self.contexts.len() {
            self.apply_document(doc_idx, id)?;
        }
        Ok(())
    }

    fn apply_document(&mut self, doc_idx: usize, id: ElementId) -> Result<()> {
        if !self.applied.insert((doc_idx, id.0)) {
            return Ok(());
        }
        let blocks = self.context_blocks(doc_idx);
        let document = self.contexts[doc_idx].id.clone();
        for block in blocks.iter() {
            if !block.header.matches(&self.get(id).description) {
                continue;
            }
            let origin = Origin {
                document: document.clone(),
                header: Some(block.header.clone()),
            };
            for directive in &block.body {
                self.apply_directive(id, directive, &origin)?;
            }
        }
        Ok(())
    }

    fn apply_directive(&mut self, id: ElementId, directive: &Directive, origin: &Origin) -> Result<()> {
        match directive {
            Directive::Define { key, value } => {
                self.write_attribute(id, key, value.clone(), origin.clone());
            }
            Directive::AddDependency { pattern } => {
                self.add_dependency_to(id, DependencyTarget::ByPattern(pattern.clone()))?;
            }
            Directive::Oncall { task, handler } => self.bind_handler(id, task, handler)?,
            Directive::NamespaceAdd { alias, pattern } => self.add_scoped_alias(id, alias, pattern.clone()),
            Directive::Check { key, value } => self.add_check(id, key, value.clone()),
        }
        Ok(())
    }

    /// Maps a global alias to the unique attached element matching its
    /// pattern. Names that are not aliases come back unchanged.
    pub fn resolve_alias(&self, name: &str) -> Result<String> {
        match self.aliases.get(name) {
            Some(pattern) => {
                let id = self.unique_match(name, pattern)?;
                Ok(self.get(id).name.clone())
            }
            None => Ok(name.to_string()),
        }
    }

    pub(crate) fn unique_match(&self, alias: &str, pattern: &DescriptionPattern) -> Result<ElementId> {
        let matches: Vec<usize> = self
            .elements
            .values()
            .enumerate()
            .filter(|(_, e)| pattern.matches(&e.description))
            .map(|(i, _)| i)
            .collect();
        match matches.as_slice() {
            [one] => Ok(ElementId(*one)),
            [] => Err(Error::UnresolvedAlias(alias.to_string())),
            many => Err(Error::AmbiguousAlias {
                alias: alias.to_string(),
                matches: many.iter().map(|&i| self.elements[i].name.clone()).collect(),
            }),
        }
    }

    /// `attach X` as written in a workflow. An aliased `X` becomes the alias's
    /// concrete element, carrying the alias pattern in its description;
    /// otherwise the element is `X` described as `Application=X`.
    pub fn attach_aliased(&mut self, name: &str) -> Result<ElementId> {
        match self.aliases.get(name) {
            Some(pattern) => {
                let concrete = pattern.sole_value().unwrap_or(name).to_string();
                let mut description = Description::single(APPLICATION_KEY, &concrete);
                for (key, alts) in pattern.iter() {
                    if let Some(v) = alts.iter().find(|a| *a != crate::description::WILDCARD) {
                        description.insert(key, v);
                    }
                }
                self.attach_element(&concrete, description, false)
            }
            None => self.attach_element(name, Description::single(APPLICATION_KEY, name), false),
        }
    }

    pub fn detect_collisions(&self) -> &[CollisionRecord] {
        &self.collisions
    }

    /// Resolves a statement's element position, following global aliases.
    fn statement_element(&self, name: &str) -> Result<ElementId> {
        let resolved = self.resolve_alias(name)?;
        self.element_id(&resolved)
    }

    /// Executes workflow statements against the state.
    pub fn execute(&mut self, statements: &[Statement]) -> Result<()> {
        let origin = Origin::document(WORKFLOW_DOCUMENT);
        for statement in statements {
            match statement {
                Statement::Attach { name } => {
                    self.attach_aliased(name)?;
                }
                Statement::AddDep { element, target } => {
                    let id = self.statement_element(element)?;
                    let target = self.resolve_alias(target)?;
                    self.add_dependency_to(id, DependencyTarget::ByName(target))?;
                }
                Statement::Define { element, key, value } => {
                    let id = self.statement_element(element)?;
                    self.write_attribute(id, key, value.clone(), origin.clone());
                }
                Statement::FrameworkDefine { group, tasks } => self.define_group(group, tasks.clone()),
                Statement::FrameworkAlias { alias, task } => self.alias_task(alias, task),
                Statement::FrameworkRun => self.request_run(),
                Statement::NamespaceAdd { scope, alias, pattern } => match scope {
                    Some(element) => {
                        let id = self.statement_element(element)?;
                        self.add_scoped_alias(id, alias, pattern.clone());
                    }
                    None => self.add_alias(alias, pattern.clone()),
                },
                Statement::Oncall { element, task, handler } => {
                    let id = self.statement_element(element)?;
                    self.bind_handler(id, task, handler)?;
                }
                Statement::AddDependencyPattern { element, pattern } => {
                    let id = self.statement_element(element)?;
                    self.add_dependency_to(id, DependencyTarget::ByPattern(pattern.clone()))?;
                }
                Statement::Check { element, key, value } => {
                    let id = self.statement_element(element)?;
                    self.add_check(id, key, value.clone());
                }
            }
        }
        Ok(())
    }
}

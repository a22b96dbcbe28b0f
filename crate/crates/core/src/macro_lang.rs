//! The line-oriented macro language of workflow (`.mac`) and context (`.ctx`)
//! documents.
//!
//! Every statement sits on one line as whitespace-separated tokens. The first
//! token is a keyword (`attach`, `framework`, `namespace`, `contextBlock`,
//! `end`) or else the name of the element the statement applies to:
//!
//! ```text
//! attach CMKIN
//! OSCAR adddep CMKIN
//! OSCAR define inputFile ::CMKIN:outputFile
//! framework define onGroup configureJob,makeJob,runJob
//! ```
//!
//! Inside a `contextBlock <pattern> ... end` block the element is implicit
//! and lines start with the directive verb. Lines beginning with `#` are
//! comments.

use std::sync::Arc;

use crate::description::DescriptionPattern;
use crate::error::{Error, Result};
use crate::model::{AttributeValue, DependencyTarget, Entry, LinkerState, SourceRef};

const KEYWORDS: [&str; 5] = ["attach", "framework", "namespace", "contextBlock", "end"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Attach {
        name: String,
    },
    AddDep {
        element: String,
        target: String,
    },
    Define {
        element: String,
        key: String,
        value: AttributeValue,
    },
    FrameworkDefine {
        group: String,
        tasks: Vec<String>,
    },
    /// `framework alias <alias> <task>`: handlers bound to `alias` answer `task`.
    FrameworkAlias {
        alias: String,
        task: String,
    },
    FrameworkRun,
    /// Global when `scope` is `None`, element-scoped otherwise.
    NamespaceAdd {
        scope: Option<String>,
        alias: String,
        pattern: DescriptionPattern,
    },
    Oncall {
        element: String,
        task: String,
        handler: String,
    },
    AddDependencyPattern {
        element: String,
        pattern: DescriptionPattern,
    },
    Check {
        element: String,
        key: String,
        value: AttributeValue,
    },
}

/// Body line of a context block; the element is bound at application time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    Define { key: String, value: AttributeValue },
    AddDependency { pattern: DescriptionPattern },
    Oncall { task: String, handler: String },
    NamespaceAdd { alias: String, pattern: DescriptionPattern },
    Check { key: String, value: AttributeValue },
}

impl Directive {
    /// The statement this directive becomes once bound to `element`.
    pub fn bind(&self, element: &str) -> Statement {
        let element = element.to_string();
        match self.clone() {
            Directive::Define { key, value } => Statement::Define { element, key, value },
            Directive::AddDependency { pattern } => Statement::AddDependencyPattern { element, pattern },
            Directive::Oncall { task, handler } => Statement::Oncall { element, task, handler },
            Directive::NamespaceAdd { alias, pattern } => Statement::NamespaceAdd {
                scope: Some(element),
                alias,
                pattern,
            },
            Directive::Check { key, value } => Statement::Check { element, key, value },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextBlock {
    pub header: DescriptionPattern,
    pub body: Vec<Directive>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContextItem {
    Block(ContextBlock),
    Statement(Statement),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextDocument {
    pub id: String,
    pub items: Vec<ContextItem>,
}

impl ContextDocument {
    pub fn blocks(&self) -> impl Iterator<Item = &ContextBlock> {
        self.items.iter().filter_map(|i| match i {
            ContextItem::Block(b) => Some(b),
            ContextItem::Statement(_) => None,
        })
    }

    pub fn statements(&self) -> impl Iterator<Item = &Statement> {
        self.items.iter().filter_map(|i| match i {
            ContextItem::Statement(s) => Some(s),
            ContextItem::Block(_) => None,
        })
    }

    pub(crate) fn shared_blocks(&self) -> Arc<Vec<ContextBlock>> {
        Arc::new(self.blocks().cloned().collect())
    }
}

/// Lines with their 1-based numbers; blank and comment lines dropped.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((i + 1, trimmed.split_whitespace().collect()))
        }
    })
}

fn parse_value(text: &str, line: usize) -> Result<AttributeValue> {
    if let Some(rest) = text.strip_prefix("::") {
        match rest.split_once(':') {
            Some((name, attr)) if !name.is_empty() && !attr.is_empty() => Ok(AttributeValue::FlowRef {
                source: SourceRef::parse(name),
                attribute: attr.to_string(),
            }),
            _ => Err(Error::syntax(
                line,
                format!("malformed reference `{text}`; expected ::<name>:<attribute>"),
            )),
        }
    } else if text.starts_with(':') {
        Err(Error::syntax(
            line,
            format!("malformed reference `{text}`; references start with `::`"),
        ))
    } else {
        Ok(AttributeValue::Literal(text.to_string()))
    }
}

fn parse_pattern(text: &str, line: usize) -> Result<DescriptionPattern> {
    text.parse()
        .map_err(|_| Error::syntax(line, format!("invalid description pattern `{text}`")))
}

fn element_name(token: &str, line: usize) -> Result<String> {
    if KEYWORDS.contains(&token) || token.contains(':') {
        return Err(Error::syntax(line, format!("`{token}` is not a valid element name")));
    }
    Ok(token.to_string())
}

fn arity(tokens: &[&str], n: usize, line: usize, form: &str) -> Result<()> {
    if tokens.len() == n {
        Ok(())
    } else {
        Err(Error::syntax(line, format!("expected `{form}`")))
    }
}

/// Parses a directive (element-less) line; `tokens` starts at the verb.
fn parse_directive(tokens: &[&str], line: usize) -> Result<Directive> {
    match tokens[0] {
        "define" => {
            arity(tokens, 3, line, "define <key> <value>")?;
            Ok(Directive::Define {
                key: tokens[1].to_string(),
                value: parse_value(tokens[2], line)?,
            })
        }
        "add" => {
            arity(tokens, 3, line, "add dependency <pattern>")?;
            if tokens[1] != "dependency" {
                return Err(Error::syntax(line, "expected `add dependency <pattern>`"));
            }
            Ok(Directive::AddDependency {
                pattern: parse_pattern(tokens[2], line)?,
            })
        }
        "oncall" => {
            arity(tokens, 4, line, "oncall <task> do <handler>")?;
            if tokens[2] != "do" {
                return Err(Error::syntax(line, "expected `oncall <task> do <handler>`"));
            }
            Ok(Directive::Oncall {
                task: tokens[1].to_string(),
                handler: tokens[3].to_string(),
            })
        }
        "namespace" => {
            arity(tokens, 4, line, "namespace add <alias> <pattern>")?;
            if tokens[1] != "add" {
                return Err(Error::syntax(line, "expected `namespace add <alias> <pattern>`"));
            }
            Ok(Directive::NamespaceAdd {
                alias: tokens[2].to_string(),
                pattern: parse_pattern(tokens[3], line)?,
            })
        }
        "check" => {
            arity(tokens, 3, line, "check <key> <value>")?;
            Ok(Directive::Check {
                key: tokens[1].to_string(),
                value: parse_value(tokens[2], line)?,
            })
        }
        other => Err(Error::syntax(line, format!("unknown directive `{other}`"))),
    }
}

fn parse_statement(tokens: &[&str], line: usize) -> Result<Statement> {
    match tokens[0] {
        "attach" => {
            arity(tokens, 2, line, "attach <name>")?;
            Ok(Statement::Attach {
                name: element_name(tokens[1], line)?,
            })
        }
        "framework" => match tokens.get(1).copied() {
            Some("define") => {
                arity(tokens, 4, line, "framework define <group> <task>,...")?;
                let tasks: Vec<String> = tokens[3].split(',').map(str::to_string).collect();
                if tasks.iter().any(String::is_empty) {
                    return Err(Error::syntax(line, "empty task name in framework define"));
                }
                Ok(Statement::FrameworkDefine {
                    group: tokens[2].to_string(),
                    tasks,
                })
            }
            Some("alias") => {
                arity(tokens, 4, line, "framework alias <alias> <task>")?;
                Ok(Statement::FrameworkAlias {
                    alias: tokens[2].to_string(),
                    task: tokens[3].to_string(),
                })
            }
            Some("run") => {
                arity(tokens, 2, line, "framework run")?;
                Ok(Statement::FrameworkRun)
            }
            _ => Err(Error::syntax(line, "expected `framework define|alias|run`")),
        },
        "namespace" => match parse_directive(tokens, line)? {
            Directive::NamespaceAdd { alias, pattern } => Ok(Statement::NamespaceAdd {
                scope: None,
                alias,
                pattern,
            }),
            _ => unreachable!("namespace parses only as NamespaceAdd"),
        },
        "contextBlock" | "end" => Err(Error::syntax(
            line,
            format!("`{}` is only allowed in context documents", tokens[0]),
        )),
        _ => {
            let element = element_name(tokens[0], line)?;
            if tokens.len() < 2 {
                return Err(Error::syntax(line, format!("missing directive after `{element}`")));
            }
            if tokens[1] == "adddep" {
                arity(tokens, 3, line, "<element> adddep <name>")?;
                return Ok(Statement::AddDep {
                    element,
                    target: element_name(tokens[2], line)?,
                });
            }
            Ok(parse_directive(&tokens[1..], line)?.bind(&element))
        }
    }
}

/// Parses a workflow document into its statements, in source order.
pub fn parse_workflow(text: &str) -> Result<Vec<Statement>> {
    lines(text)
        .map(|(line, tokens)| parse_statement(&tokens, line))
        .collect()
}

/// Parses a context document. Top-level statements are limited to
/// `attach`, `framework define`, `framework alias` and global `namespace add`.
pub fn parse_context(text: &str, id: &str) -> Result<ContextDocument> {
    let mut items = Vec::new();
    let mut open: Option<(usize, ContextBlock)> = None;
    for (line, tokens) in lines(text) {
        match tokens[0] {
            "contextBlock" => {
                if open.is_some() {
                    return Err(Error::syntax(line, "nested contextBlock"));
                }
                arity(&tokens, 2, line, "contextBlock <pattern>")?;
                let header = parse_pattern(tokens[1], line)?;
                open = Some((line, ContextBlock { header, body: Vec::new() }));
            }
            "end" => {
                arity(&tokens, 1, line, "end")?;
                match open.take() {
                    Some((_, block)) => items.push(ContextItem::Block(block)),
                    None => return Err(Error::syntax(line, "`end` without contextBlock")),
                }
            }
            _ => match &mut open {
                Some((_, block)) => block.body.push(parse_directive(&tokens, line)?),
                None => {
                    let statement = parse_statement(&tokens, line)?;
                    match statement {
                        Statement::Attach { .. }
                        | Statement::FrameworkDefine { .. }
                        | Statement::FrameworkAlias { .. }
                        | Statement::NamespaceAdd { scope: None, .. } => {
                            items.push(ContextItem::Statement(statement))
                        }
                        _ => {
                            return Err(Error::syntax(
                                line,
                                "only attach, framework define/alias and namespace add may appear outside a contextBlock",
                            ))
                        }
                    }
                }
            },
        }
    }
    if let Some((line, _)) = open {
        return Err(Error::UnclosedBlock { line });
    }
    Ok(ContextDocument {
        id: id.to_string(),
        items,
    })
}

fn directive_line(d: &Directive) -> String {
    match d {
        Directive::Define { key, value } => format!("define {key} {value}"),
        Directive::AddDependency { pattern } => format!("add dependency {pattern}"),
        Directive::Oncall { task, handler } => format!("oncall {task} do {handler}"),
        Directive::NamespaceAdd { alias, pattern } => format!("namespace add {alias} {pattern}"),
        Directive::Check { key, value } => format!("check {key} {value}"),
    }
}

/// Canonical one-line form of a statement (no trailing newline).
pub fn statement_line(s: &Statement) -> String {
    match s {
        Statement::Attach { name } => format!("attach {name}"),
        Statement::AddDep { element, target } => format!("{element} adddep {target}"),
        Statement::Define { element, key, value } => format!("{element} define {key} {value}"),
        Statement::FrameworkDefine { group, tasks } => {
            format!("framework define {group} {}", tasks.join(","))
        }
        Statement::FrameworkAlias { alias, task } => format!("framework alias {alias} {task}"),
        Statement::FrameworkRun => "framework run".to_string(),
        Statement::NamespaceAdd { scope, alias, pattern } => match scope {
            Some(e) => format!("{e} namespace add {alias} {pattern}"),
            None => format!("namespace add {alias} {pattern}"),
        },
        Statement::Oncall { element, task, handler } => format!("{element} oncall {task} do {handler}"),
        Statement::AddDependencyPattern { element, pattern } => {
            format!("{element} add dependency {pattern}")
        }
        Statement::Check { element, key, value } => format!("{element} check {key} {value}"),
    }
}

/// One statement per line, newline-terminated.
pub fn serialize(statements: &[Statement]) -> String {
    let mut out = String::new();
    for s in statements {
        out.push_str(&statement_line(s));
        out.push('\n');
    }
    out
}

pub fn serialize_context(doc: &ContextDocument) -> String {
    let mut out = String::new();
    for item in &doc.items {
        match item {
            ContextItem::Statement(s) => {
                out.push_str(&statement_line(s));
                out.push('\n');
            }
            ContextItem::Block(b) => {
                out.push_str(&format!("contextBlock {}\n", b.header));
                for d in &b.body {
                    out.push_str("  ");
                    out.push_str(&directive_line(d));
                    out.push('\n');
                }
                out.push_str("end\n");
            }
        }
    }
    out
}

/// Replays a state as statements: framework defines and task aliases, then
/// terminals, then application elements in insertion order (each followed by
/// its entries in the order they were first written), then `framework run`
/// if one was requested. Global aliases are consumed at attach time and are
/// not replayed.
pub fn state_statements(state: &LinkerState) -> Vec<Statement> {
    let mut out = Vec::new();
    for (group, tasks) in state.framework_groups() {
        out.push(Statement::FrameworkDefine {
            group: group.to_string(),
            tasks: tasks.to_vec(),
        });
    }
    for (alias, task) in state.task_aliases() {
        out.push(Statement::FrameworkAlias {
            alias: alias.to_string(),
            task: task.to_string(),
        });
    }
    let terminals = state.elements().filter(|e| e.is_terminal());
    let applications = state.elements().filter(|e| !e.is_terminal());
    for element in terminals.chain(applications) {
        let name = element.name().to_string();
        out.push(Statement::Attach { name: name.clone() });
        for entry in &element.layout {
            let statement = match entry {
                Entry::Dependency(i) => match &element.dependencies[*i] {
                    DependencyTarget::ByName(t) => Statement::AddDep {
                        element: name.clone(),
                        target: t.clone(),
                    },
                    DependencyTarget::ByPattern(p) => Statement::AddDependencyPattern {
                        element: name.clone(),
                        pattern: p.clone(),
                    },
                },
                Entry::Alias(a) => Statement::NamespaceAdd {
                    scope: Some(name.clone()),
                    alias: a.clone(),
                    pattern: element.aliases[a].clone(),
                },
                Entry::Attribute(k) => match &element.attributes[k].value {
                    AttributeValue::Unset => continue,
                    value => Statement::Define {
                        element: name.clone(),
                        key: k.clone(),
                        value: value.clone(),
                    },
                },
                Entry::Handler(t) => Statement::Oncall {
                    element: name.clone(),
                    task: t.clone(),
                    handler: element.handlers[t].clone(),
                },
                Entry::Check(i) => {
                    let (key, value) = &element.checks[*i];
                    Statement::Check {
                        element: name.clone(),
                        key: key.clone(),
                        value: value.clone(),
                    }
                }
            };
            out.push(statement);
        }
    }
    if state.run_requested() {
        out.push(Statement::FrameworkRun);
    }
    out
}

pub fn serialize_state(state: &LinkerState) -> String {
    serialize(&state_statements(state))
}

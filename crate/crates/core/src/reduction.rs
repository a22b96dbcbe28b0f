//! Reduction of metadata flows.
//!
//! Reads are lazy: reading a `FlowRef` attribute resolves its source, reads
//! the source attribute (reducing it first if it is itself a flow), and
//! replaces the flow with the literal it obtained. Each replacement removes
//! exactly one flow and appends one [`ReductionEvent`]. The replacement is
//! the memo; there is no separate cache.
//!
//! Source names resolve in this order: scoped alias on the reading element,
//! global alias, exact element name, then the unique resolved dependency
//! whose description carries the name as a value.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{AttrRef, AttributeValue, ElementId, LinkerState, SourceRef, ARGS_SOURCE};

/// Values supplied at run time for `@args` sources.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArgsBinding {
    values: BTreeMap<String, String>,
}

impl ArgsBinding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.values.insert(key.into(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for ArgsBinding {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        let mut args = ArgsBinding::new();
        for (k, v) in iter {
            args.insert(k, v);
        }
        args
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    /// A flow was satisfied; `source.element` is `@args` for argument flows.
    Reduce {
        target: AttrRef,
        source: AttrRef,
        value: String,
        document: String,
    },
    /// A write replaced an existing value.
    Shadow {
        target: AttrRef,
        previous_document: String,
        document: String,
        previous_value: String,
        value: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionEvent {
    pub seq: u64,
    pub kind: EventKind,
}

impl fmt::Display for ReductionEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            EventKind::Reduce {
                target,
                source,
                value,
                document,
            } => write!(f, "REDUCE {target} <- {source} = {value} ctx={document}"),
            EventKind::Shadow {
                target,
                previous_document,
                document,
                ..
            } => write!(f, "SHADOW {target} {previous_document} -> {document}"),
        }
    }
}

type Slot = (usize, String);

impl LinkerState {
    fn slot_ref(&self, slot: &Slot) -> AttrRef {
        AttrRef::new(&self.elements[slot.0].name, &slot.1)
    }

    /// Resolves a flow source as seen from element `from`. `None` is `@args`.
    pub(crate) fn resolve_source(
        &self,
        from: ElementId,
        target_attr: &str,
        source: &SourceRef,
    ) -> Result<Option<ElementId>> {
        let name = match source {
            SourceRef::Args => return Ok(None),
            SourceRef::Element(name) => name,
        };
        let element = self.get(from);
        if let Some(pattern) = element.aliases.get(name) {
            return self.unique_match(name, pattern).map(Some);
        }
        if let Some(pattern) = self.aliases.get(name) {
            return self.unique_match(name, pattern).map(Some);
        }
        if let Some(idx) = self.elements.get_index_of(name) {
            return Ok(Some(ElementId(idx)));
        }
        let target = || AttrRef::new(&element.name, target_attr);
        let candidates: Vec<ElementId> = self
            .resolved_dependencies(from)
            .into_iter()
            .filter(|d| self.get(*d).description.contains_value(name))
            .collect();
        match candidates.as_slice() {
            [one] => Ok(Some(*one)),
            [] => Err(Error::UnresolvedSource {
                target: target(),
                source_name: name.clone(),
            }),
            many => Err(Error::AmbiguousSource {
                target: target(),
                source_name: name.clone(),
                matches: many.iter().map(|d| self.get(*d).name.clone()).collect(),
            }),
        }
    }

    /// Reads an attribute, reducing the flows it depends on.
    pub fn read_attribute(&mut self, element: &str, key: &str, args: &ArgsBinding) -> Result<String> {
        let name = self.resolve_alias(element)?;
        let id = self.element_id(&name)?;
        self.read_slot(id, key, args)
    }

    pub(crate) fn read_slot(&mut self, id: ElementId, key: &str, args: &ArgsBinding) -> Result<String> {
        // Explicit stack; flow chains can be far deeper than the call stack.
        let start: Slot = (id.0, key.to_string());
        let mut stack = vec![start.clone()];
        let mut on_stack: HashSet<Slot> = HashSet::from([start]);
        while let Some(top) = stack.last().cloned() {
            let value = match self.elements[top.0].attributes.get(&top.1) {
                Some(a) => a.value.clone(),
                None => return Err(Error::MissingAttribute(self.slot_ref(&top))),
            };
            match value {
                AttributeValue::Literal(v) => {
                    stack.pop();
                    on_stack.remove(&top);
                    if stack.is_empty() {
                        return Ok(v);
                    }
                }
                AttributeValue::Unset => return Err(Error::MissingAttribute(self.slot_ref(&top))),
                AttributeValue::FlowRef { source, attribute } => {
                    let resolved = match self.resolve_source(ElementId(top.0), &top.1, &source)? {
                        None => match args.get(&attribute) {
                            Some(v) => Some((AttrRef::new(ARGS_SOURCE, &attribute), v.to_string())),
                            None => return Err(Error::MissingArg(attribute)),
                        },
                        Some(sid) => {
                            let src: Slot = (sid.0, attribute);
                            match self.elements[sid.0].attributes.get(&src.1).map(|a| &a.value) {
                                Some(AttributeValue::Literal(v)) => Some((self.slot_ref(&src), v.clone())),
                                Some(AttributeValue::FlowRef { .. }) => {
                                    if on_stack.contains(&src) {
                                        let from = stack.iter().position(|s| *s == src).unwrap_or(0);
                                        let mut path: Vec<AttrRef> =
                                            stack[from..].iter().map(|s| self.slot_ref(s)).collect();
                                        path.push(self.slot_ref(&src));
                                        return Err(Error::Cycle { path });
                                    }
                                    on_stack.insert(src.clone());
                                    stack.push(src);
                                    None
                                }
                                _ => return Err(Error::MissingAttribute(self.slot_ref(&src))),
                            }
                        }
                    };
                    if let Some((source_ref, v)) = resolved {
                        self.satisfy(&top, source_ref, v);
                    }
                }
            }
        }
        unreachable!("read stack drained without returning")
    }

    /// Assignment reduction: the flow on `slot` becomes the literal `value`.
    fn satisfy(&mut self, slot: &Slot, source: AttrRef, value: String) {
        let target = self.slot_ref(slot);
        let attr = self.elements[slot.0]
            .attributes
            .get_mut(&slot.1)
            .expect("reduced slot exists");
        attr.value = AttributeValue::Literal(value.clone());
        let document = attr.origin.document.clone();
        self.record(EventKind::Reduce {
            target,
            source,
            value,
            document,
        });
    }

    /// One serialization of the remaining flows: every slot appears after the
    /// flowed slot it reads from. Ties go to element insertion order, then
    /// attribute name.
    pub fn check_acyclic(&self) -> Result<Vec<AttrRef>> {
        let mut slots: Vec<Slot> = Vec::new();
        for (idx, element) in self.elements.values().enumerate() {
            for key in element.flowed_keys() {
                slots.push((idx, key));
            }
        }
        let index: HashMap<&Slot, usize> = slots.iter().enumerate().map(|(i, s)| (s, i)).collect();
        // Each flowed slot has exactly one source; record it when it is flowed too.
        let mut upstream: Vec<Option<usize>> = vec![None; slots.len()];
        let mut downstream: Vec<Vec<usize>> = vec![Vec::new(); slots.len()];
        for (i, slot) in slots.iter().enumerate() {
            let Some(AttributeValue::FlowRef { source, attribute }) = self.elements[slot.0].attribute(&slot.1) else {
                unreachable!("slot was collected as flowed");
            };
            if let Some(sid) = self.resolve_source(ElementId(slot.0), &slot.1, source)? {
                if let Some(&j) = index.get(&(sid.0, attribute.clone())) {
                    upstream[i] = Some(j);
                    downstream[j].push(i);
                }
            }
        }
        let mut ready: BinaryHeap<Reverse<(usize, &str, usize)>> = slots
            .iter()
            .enumerate()
            .filter(|(i, _)| upstream[*i].is_none())
            .map(|(i, s)| Reverse((s.0, s.1.as_str(), i)))
            .collect();
        let mut order = Vec::with_capacity(slots.len());
        let mut done = vec![false; slots.len()];
        while let Some(Reverse((_, _, i))) = ready.pop() {
            done[i] = true;
            order.push(self.slot_ref(&slots[i]));
            for &d in &downstream[i] {
                ready.push(Reverse((slots[d].0, slots[d].1.as_str(), d)));
            }
        }
        if order.len() == slots.len() {
            return Ok(order);
        }
        // Everything left sits on or behind a cycle; walk sources until one repeats.
        let start = (0..slots.len()).find(|&i| !done[i]).expect("unfinished slot");
        let mut walk = vec![start];
        let mut seen = HashMap::from([(start, 0usize)]);
        loop {
            let next = upstream[*walk.last().unwrap()].expect("residual slot has a flowed source");
            if let Some(&pos) = seen.get(&next) {
                let mut path: Vec<AttrRef> = walk[pos..].iter().map(|&i| self.slot_ref(&slots[i])).collect();
                path.push(self.slot_ref(&slots[next]));
                return Err(Error::Cycle { path });
            }
            seen.insert(next, walk.len());
            walk.push(next);
        }
    }

    /// Reduces every remaining flow, in [`check_acyclic`](Self::check_acyclic)
    /// order. Returns the number of flows removed.
    pub fn reduce_all(&mut self, args: &ArgsBinding) -> Result<usize> {
        let order = self.check_acyclic()?;
        let before = self.flow_count();
        for slot in order {
            let id = self.element_id(&slot.element)?;
            if self.get(id).attribute(&slot.attribute).is_some_and(AttributeValue::is_flow) {
                self.read_slot(id, &slot.attribute, args)?;
            }
        }
        Ok(before - self.flow_count())
    }

    /// Reads a flow source on behalf of element `from` without storing anything on `from`.
    pub(crate) fn read_source(
        &mut self,
        from: ElementId,
        key: &str,
        source: &SourceRef,
        attribute: &str,
        args: &ArgsBinding,
    ) -> Result<String> {
        match self.resolve_source(from, key, source)? {
            None => args
                .get(attribute)
                .map(str::to_string)
                .ok_or_else(|| Error::MissingArg(attribute.to_string())),
            Some(sid) => self.read_slot(sid, attribute, args),
        }
    }

    pub(crate) fn eval_element_checks(&mut self, id: ElementId, args: &ArgsBinding) -> Result<()> {
        for (key, expected) in self.get(id).checks.clone() {
            let actual = self.read_slot(id, &key, args)?;
            let expected = match &expected {
                AttributeValue::Literal(v) => v.clone(),
                AttributeValue::FlowRef { source, attribute } => self.read_source(id, &key, source, attribute, args)?,
                AttributeValue::Unset => String::new(),
            };
            if actual != expected {
                return Err(Error::CheckFailed {
                    target: AttrRef::new(&self.get(id).name, &key),
                    expected,
                    actual,
                });
            }
        }
        Ok(())
    }

    /// Evaluates every equality check; both sides are read through the
    /// normal reduction path.
    pub fn eval_checks(&mut self, args: &ArgsBinding) -> Result<()> {
        for idx in 0..self.elements.len() {
            self.eval_element_checks(ElementId(idx), args)?;
        }
        Ok(())
    }

    pub fn provenance(&self) -> &[ReductionEvent] {
        &self.provenance
    }
}

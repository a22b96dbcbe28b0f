#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use contextflow::{
    parse_context, parse_workflow, ArgsBinding, AttributeValue, Description, KvSource, LinkerState, RunEnv,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub const CONTEXTS: [&str; 3] = ["Framework.ctx", "PhysicsGroup.ctx", "Scheduler.ctx"];
pub const OUTPUTS: &str = "Outputs.ctx";

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// The three fixture contexts, optionally the outputs context, then the workflow.
pub fn fixture_state(with_outputs: bool) -> LinkerState {
    let mut state = LinkerState::new();
    let mut names: Vec<&str> = CONTEXTS.to_vec();
    if with_outputs {
        names.push(OUTPUTS);
    }
    for name in names {
        let doc = parse_context(&read_fixture(name), name).unwrap();
        state.load_context(&doc).unwrap();
    }
    state
        .execute(&parse_workflow(&read_fixture("workflow.mac")).unwrap())
        .unwrap();
    state
}

pub fn fixture_args() -> ArgsBinding {
    [("UserJDLFile", "job.jdl"), ("ResourceBroker", "rb.cern.ch")]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

pub fn fixture_env() -> RunEnv {
    RunEnv {
        args: fixture_args(),
        sources: vec![
            KvSource::from_file(Description::single("Database", "RefDB"), fixture("refdb.kv")),
            KvSource::from_file(
                Description::single("Database", "PhysicsGroupDB"),
                fixture("physicsgroupdb.kv"),
            ),
        ],
    }
}

/// A generated flow graph: every slot is a literal or reads exactly one other
/// slot. Slot `i` is attribute `a<i>` of element `e<owner[i]>`.
#[derive(Debug, Clone)]
pub struct FlowGraph {
    pub elements: usize,
    pub owner: Vec<usize>,
    pub source: Vec<Option<usize>>,
}

impl FlowGraph {
    pub fn slot_name(&self, i: usize) -> (String, String) {
        (format!("e{}", self.owner[i]), format!("a{i}"))
    }

    pub fn flow_count(&self) -> usize {
        self.source.iter().filter(|s| s.is_some()).count()
    }

    /// Flows only read lower-numbered slots.
    pub fn acyclic<R: Rng>(rng: &mut R, max_elements: usize, max_flows: usize) -> Self {
        let elements = rng.gen_range(1..=max_elements);
        let slots = rng.gen_range(1..=max_flows + max_flows / 2);
        let owner: Vec<usize> = (0..slots).map(|_| rng.gen_range(0..elements)).collect();
        let mut source = vec![None; slots];
        let mut flows = 0;
        for (i, s) in source.iter_mut().enumerate().skip(1) {
            if flows < max_flows && rng.gen_bool(0.7) {
                *s = Some(rng.gen_range(0..i));
                flows += 1;
            }
        }
        Self {
            elements,
            owner,
            source,
        }
    }

    /// Flows read arbitrary slots, possibly forming cycles.
    pub fn arbitrary<R: Rng>(rng: &mut R, max_elements: usize, max_flows: usize) -> Self {
        let mut g = Self::acyclic(rng, max_elements, max_flows);
        let n = g.source.len();
        for s in g.source.iter_mut().filter(|s| s.is_some()) {
            *s = Some(rng.gen_range(0..n));
        }
        g
    }

    /// Rewires `len` distinct slots into a ring.
    pub fn inject_cycle<R: Rng>(&mut self, rng: &mut R, len: usize) {
        let mut picks: Vec<usize> = (0..self.source.len()).collect();
        picks.shuffle(rng);
        picks.truncate(len.clamp(1, self.source.len()));
        for w in 0..picks.len() {
            self.source[picks[w]] = Some(picks[(w + 1) % picks.len()]);
        }
    }

    pub fn build(&self) -> LinkerState {
        let mut state = LinkerState::new();
        for e in 0..self.elements {
            let name = format!("e{e}");
            state
                .attach_element(&name, Description::single("Application", &name), false)
                .unwrap();
        }
        for i in 0..self.source.len() {
            let (element, attr) = self.slot_name(i);
            let value = match self.source[i] {
                None => AttributeValue::literal(format!("v{i}")),
                Some(j) => {
                    let (se, sa) = self.slot_name(j);
                    AttributeValue::flow(&se, sa)
                }
            };
            state.set_attribute(&element, &attr, value).unwrap();
        }
        state
    }

    /// Independent three-colour DFS over the `target -> source` edges.
    pub fn has_cycle(&self) -> bool {
        #[derive(Clone, Copy, PartialEq)]
        enum Colour {
            White,
            Grey,
            Black,
        }
        fn visit(g: &FlowGraph, i: usize, colour: &mut [Colour]) -> bool {
            match colour[i] {
                Colour::Grey => return true,
                Colour::Black => return false,
                Colour::White => {}
            }
            colour[i] = Colour::Grey;
            let cyclic = g.source[i].is_some_and(|j| visit(g, j, colour));
            colour[i] = Colour::Black;
            cyclic
        }
        let mut colour = vec![Colour::White; self.source.len()];
        (0..self.source.len()).any(|i| visit(self, i, &mut colour))
    }

    /// Final value of every slot on an acyclic graph, by following sources.
    pub fn expected_values(&self) -> HashMap<(String, String), String> {
        (0..self.source.len())
            .map(|i| {
                let mut j = i;
                while let Some(next) = self.source[j] {
                    j = next;
                }
                (self.slot_name(i), format!("v{j}"))
            })
            .collect()
    }

    pub fn all_slots(&self) -> Vec<(String, String)> {
        (0..self.source.len()).map(|i| self.slot_name(i)).collect()
    }
}

//! Context-driven workflow configuration.
//!
//! A workflow is a set of elements linked by dependencies. Context documents
//! add constraints to it: metadata terminals, literal parameters, metadata
//! flows that copy one element's attribute into another, dependencies and
//! framework handlers. Flows are reduced lazily on read, or all at once, and
//! the fully reduced workflow is executed as a framework-message schedule that
//! makes and submits jobs.
//!
//! ```
//! use contextflow::{parse_context, parse_workflow, ArgsBinding, LinkerState};
//!
//! let mut state = LinkerState::new();
//! let ctx = parse_context(
//!     "contextBlock Application=OSCAR\n  define ApplicationVersion OSCAR_3_6_5\nend\n",
//!     "Physics.ctx",
//! )?;
//! state.load_context(&ctx)?;
//! state.execute(&parse_workflow(
//!     "attach CMKIN\nCMKIN define outputFile ntuple\nattach OSCAR\nOSCAR define inputFile ::CMKIN:outputFile\n",
//! )?)?;
//! assert_eq!(state.flow_count(), 1);
//! assert_eq!(state.read_attribute("OSCAR", "inputFile", &ArgsBinding::new())?, "ntuple");
//! assert_eq!(state.flow_count(), 0);
//! # Ok::<(), contextflow::Error>(())
//! ```

pub mod cli;
pub mod context;
pub mod description;
pub mod emit;
pub mod error;
pub mod framework;
pub mod kv;
pub mod macro_lang;
pub mod model;
pub mod reduction;

pub use context::{match_header, CollisionRecord};
pub use description::{Description, DescriptionPattern};
pub use emit::{emit_dag, emit_macro, emit_manifest, emit_provenance, emit_shell, job_scripts, EmitTarget, ShellScript};
pub use error::{Error, Result};
pub use framework::{DispatchTrace, Framework, HandlerLibrary, JobRecord, RunEnv, RunOutcome};
pub use kv::KvSource;
pub use macro_lang::{parse_context, parse_workflow, serialize, serialize_state, ContextDocument, Statement};
pub use model::{AttrRef, AttributeValue, DependencyTarget, ElementId, LinkerState, SourceRef, WorkflowElement};
pub use reduction::{ArgsBinding, EventKind, ReductionEvent};

//! Command-line driver: parse, load contexts, execute the workflow, then
//! reduce, run, or emit.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::emit::{self, EmitTarget, ShellScript};
use crate::error::{Error, Result};
use crate::framework::{Framework, RunEnv, PRE_GROUP};
use crate::kv::KvSource;
use crate::macro_lang::{parse_context, parse_workflow};
use crate::model::LinkerState;
use crate::reduction::ArgsBinding;

#[derive(Debug, Parser)]
#[command(name = "contextflow", version, about = "Apply contexts to workflows, reduce metadata flows, and emit jobs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load contexts and the workflow, then emit without reducing.
    Apply {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "macro")]
        emit: EmitTarget,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Connect metadata sources and reduce every flow.
    Reduce {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        runtime: Runtime,
        #[arg(long, value_enum, default_value = "macro")]
        emit: EmitTarget,
        /// Output file; a directory for `--emit shell`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Full framework run; writes manifest.log, provenance.log and job scripts.
    Run {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        runtime: Runtime,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Parse, load, and check for flow cycles, dependency cycles and collisions.
    Validate {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Debug, Args)]
struct Input {
    /// Context document, loaded in the order given.
    #[arg(short = 'c', long = "context")]
    contexts: Vec<PathBuf>,
    workflow: PathBuf,
    /// Treat any metadata collision as an error (exit 3).
    #[arg(long)]
    strict_collisions: bool,
}

#[derive(Debug, Args)]
struct Runtime {
    /// Metadata source as `<Key=Value description>:<file.kv>`.
    #[arg(long = "db", value_parser = KvSource::parse_binding)]
    sources: Vec<KvSource>,
    /// Run-time argument `key=value`, read by `::@args:key` flows.
    #[arg(long = "arg", value_parser = parse_arg)]
    args: Vec<(String, String)>,
}

impl Runtime {
    fn env(&self) -> RunEnv {
        RunEnv {
            args: self.args.iter().cloned().collect::<ArgsBinding>(),
            sources: self.sources.clone(),
        }
    }
}

fn parse_arg(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(format!("expected key=value, got `{s}`")),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn document_id(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn build_state(input: &Input) -> Result<LinkerState> {
    let mut state = LinkerState::new();
    for path in &input.contexts {
        let doc = parse_context(&read(path)?, &document_id(path))?;
        state.load_context(&doc)?;
    }
    let statements = parse_workflow(&read(&input.workflow)?)?;
    state.execute(&statements)?;
    if input.strict_collisions && !state.detect_collisions().is_empty() {
        for record in state.detect_collisions() {
            eprintln!(
                "collision: {} `{}` ({}) replaced by `{}` ({})",
                record.target,
                record.losing.value,
                record.losing.origin.document,
                record.winning.value,
                record.winning.origin.document
            );
        }
        return Err(Error::Collision {
            count: state.detect_collisions().len(),
        });
    }
    Ok(state)
}

fn output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn output_scripts(dir: Option<&Path>, scripts: &[ShellScript]) -> Result<()> {
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|source| Error::Io {
                path: dir.to_path_buf(),
                source,
            })?;
            for s in scripts {
                write(&dir.join(&s.name), &s.text)?;
            }
            Ok(())
        }
        None => {
            let mut text = String::new();
            for s in scripts {
                text.push_str(&format!("==> {} <==\n{}", s.name, s.text));
            }
            output(None, &text)
        }
    }
}

fn unsupported(command: &str, target: EmitTarget) -> Error {
    Error::UnsupportedEmit {
        command: command.to_string(),
        target: format!("{target:?}").to_lowercase(),
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Apply { input, emit, output: out } => {
            let state = build_state(&input)?;
            let text = match emit {
                EmitTarget::Macro => emit::emit_macro(&state),
                EmitTarget::Dag => emit::emit_dag(&state)?,
                other => return Err(unsupported("apply", other)),
            };
            output(out.as_deref(), &text)
        }
        Command::Reduce {
            input,
            runtime,
            emit,
            output: out,
        } => {
            let mut state = build_state(&input)?;
            let framework = Framework::new(runtime.env());
            framework.run_group_once(&mut state, PRE_GROUP)?;
            state.reduce_all(&framework.env().args)?;
            state.eval_checks(&framework.env().args)?;
            match emit {
                EmitTarget::Macro => output(out.as_deref(), &emit::emit_macro(&state)),
                EmitTarget::Provenance => output(out.as_deref(), &emit::emit_provenance(&state)),
                EmitTarget::Shell => output_scripts(out.as_deref(), &emit::emit_shell(&state)?),
                EmitTarget::Dag => output(out.as_deref(), &emit::emit_dag(&state)?),
                other => Err(unsupported("reduce", other)),
            }
        }
        Command::Run {
            input,
            runtime,
            jobs,
            out_dir,
        } => {
            let mut state = build_state(&input)?;
            state.check_acyclic()?;
            let outcome = Framework::new(runtime.env()).run(&mut state, jobs)?;
            fs::create_dir_all(&out_dir).map_err(|source| Error::Io {
                path: out_dir.clone(),
                source,
            })?;
            write(&out_dir.join("manifest.log"), &emit::emit_manifest(&outcome))?;
            write(&out_dir.join("provenance.log"), &emit::emit_provenance(&state))?;
            output_scripts(Some(&out_dir), &emit::job_scripts(&state, &outcome.jobs))?;
            eprintln!(
                "{} message(s), {} job(s) made, {} submitted",
                outcome.trace.len(),
                outcome.jobs.len(),
                outcome.manifest.len()
            );
            Ok(())
        }
        Command::Validate { input } => {
            let state = build_state(&input)?;
            let slots = state.check_acyclic()?;
            state.dependency_order()?;
            for record in state.detect_collisions() {
                eprintln!(
                    "warning: {} written by {} then {}{}",
                    record.target,
                    record.losing.origin.document,
                    record.winning.origin.document,
                    if record.intentional { " (intentional shadowing)" } else { "" }
                );
            }
            println!(
                "ok: {} element(s), {} flow(s), {} collision(s)",
                state.len(),
                slots.len(),
                state.detect_collisions().len()
            );
            Ok(())
        }
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code:
/// 0 on success, 1 for syntax and semantic errors, 2 for cycles, 3 for
/// collisions under `--strict-collisions`.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

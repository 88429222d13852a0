//! Batch front end for `pathiso`. [`run`] is the whole program minus process
//! plumbing, so tests can drive it in memory.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pathiso::oracle::{
    enumerate_assignments_in, enumerate_paths, verify_equivalence, VerifyConfig, VerifyError,
    Window,
};
use pathiso::pi01::{
    default_max_index, iso_prefix_check, tree_prefix_check, BairePrefix, PrefixVerdict,
};
use pathiso::reductions::{
    iso_to_path, iso_to_text, parse_iso_text, path_to_iso, IsoOracle, Padding, PathLiteral,
    ReductionError,
};
use pathiso::tree::{normalize, normalized_generator, parse_tree_text};
use pathiso::{BinString, Generator, NormalizedTree, StructurePair, TreeError};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pathiso", version, about = "Paths through binary trees as isomorphisms of computable structures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct TreeSource {
    /// Tree file: one node per line, `.` for the root.
    #[arg(long, value_name = "FILE")]
    pub tree: Option<PathBuf>,
    /// Built-in infinite tree: `full-binary` or `single-branch`.
    #[arg(long = "gen", value_name = "NAME")]
    pub generator: Option<Generator>,
}

#[derive(Debug, Args)]
pub struct Common {
    #[command(flatten)]
    pub source: TreeSource,
    /// Write output here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the normalized tree, one node per line.
    Normalize {
        #[command(flatten)]
        common: Common,
        /// Depth cut, required for generators.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Print the relations of both structures on the universe to a depth.
    Describe {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        depth: usize,
    },
    /// Print the isomorphism induced by a path on the universe to a depth.
    ApplyPath {
        #[command(flatten)]
        common: Common,
        /// `BITS` or `BITS*` (repeat the last bit forever).
        #[arg(long, value_name = "LITERAL")]
        path: PathLiteral,
        #[arg(long)]
        depth: usize,
    },
    /// Recover the length-DEPTH path from an isomorphism.
    ExtractPath {
        #[command(flatten)]
        common: Common,
        /// Isomorphism text as written by apply-path; `-` reads stdin.
        #[arg(long, value_name = "FILE", conflicts_with = "path", required_unless_present = "path")]
        iso: Option<String>,
        /// Use the isomorphism induced by this path literal instead.
        #[arg(long, value_name = "LITERAL")]
        path: Option<PathLiteral>,
        #[arg(long)]
        depth: usize,
    },
    /// Check a coded prefix of an isomorphism pair.
    CheckIsoPrefix {
        #[command(flatten)]
        common: Common,
        /// Comma-separated naturals, interleaving f0 and f1.
        #[arg(long, value_name = "CSV", allow_hyphen_values = true)]
        prefix: String,
        /// Values at or above this bound are rejected.
        #[arg(long)]
        max_index: Option<usize>,
        /// Depth for the default bound 2*|universe to DEPTH|.
        #[arg(long, required_unless_present = "max_index")]
        depth: Option<usize>,
    },
    /// Check that a bit string lies in the tree.
    CheckTreePrefix {
        #[command(flatten)]
        common: Common,
        /// Bit string, `.` for the empty string.
        #[arg(long, value_name = "BITS")]
        path: String,
    },
    /// List swap assignments passing the parity filter, or tree members.
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        depth: usize,
        /// List length-DEPTH members instead of assignments.
        #[arg(long)]
        paths: bool,
    },
    /// Compare the parity filter with direct model checking.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        depth: usize,
        /// Refuse windows admitting more assignments than this.
        #[arg(long, default_value_t = 1 << 16)]
        max_assignments: u128,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Normalize { common, .. }
            | Command::Describe { common, .. }
            | Command::ApplyPath { common, .. }
            | Command::ExtractPath { common, .. }
            | Command::CheckIsoPrefix { common, .. }
            | Command::CheckTreePrefix { common, .. }
            | Command::Enumerate { common, .. }
            | Command::Verify { common, .. } => common,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{file}: {reason}")]
    Input { file: String, reason: String },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => EXIT_REJECT,
            _ => EXIT_USAGE,
        }
    }
}

/// Exit code plus what the process would print.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and executes the command.
pub fn run<I, T>(args: I, stdin: &mut dyn Read) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let result = execute(&cli.command, stdin).and_then(|(code, text)| {
        match &cli.command.common().out {
            Some(path) => {
                fs::write(path, &text).map_err(|e| CliError::Input {
                    file: path.display().to_string(),
                    reason: e.to_string(),
                })?;
                Ok((code, String::new()))
            }
            None => Ok((code, text)),
        }
    });
    match result {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn load_tree(source: &TreeSource) -> Result<NormalizedTree, CliError> {
    match (&source.tree, source.generator) {
        (Some(path), _) => {
            let text = read_file(path)?;
            let tree = parse_tree_text(&text).map_err(|e| tree_input_error(path, &text, e))?;
            Ok(normalize(&tree))
        }
        (None, Some(g)) => Ok(normalized_generator(g)),
        (None, None) => Err(CliError::Usage("one of --tree or --gen is required".into())),
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input {
        file: path.display().to_string(),
        reason: e.to_string(),
    })
}

/// Adds the line of the offending node to structural errors, which the
/// parser reports without one.
fn tree_input_error(path: &Path, text: &str, e: TreeError) -> CliError {
    let line_of = |node: &BinString| {
        text.lines()
            .position(|l| l.trim().parse::<BinString>().ok().as_ref() == Some(node))
            .map(|k| k + 1)
    };
    let reason = match &e {
        TreeError::NotPrefixClosed { node, .. } => match line_of(node) {
            Some(line) => format!("line {line}: {e}"),
            None => e.to_string(),
        },
        _ => e.to_string(),
    };
    CliError::Input {
        file: path.display().to_string(),
        reason,
    }
}

fn verdict_output(v: &PrefixVerdict) -> (i32, String) {
    let code = if v.is_accept() { EXIT_OK } else { EXIT_REJECT };
    (code, format!("{v}\n"))
}

/// An exact literal only answers queries below its length.
fn check_literal_depth(path: &PathLiteral, depth: usize) -> Result<(), CliError> {
    if path.padding() == Padding::Exact && depth > path.prefix().len() {
        return Err(CliError::Usage(format!(
            "--path {path} has {} bits but --depth is {depth}; append `*` to pad",
            path.prefix().len()
        )));
    }
    Ok(())
}

fn reduction_failure(e: ReductionError) -> CliError {
    match e {
        ReductionError::NotIsomorphism(_)
        | ReductionError::RSigmaViolation { .. }
        | ReductionError::FiberNotBijective { .. } => CliError::Failed(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    }
}

fn extract<F: IsoOracle + ?Sized>(
    tree: &NormalizedTree,
    f: &F,
    depth: usize,
) -> Result<(i32, String), CliError> {
    let p = iso_to_path(tree, f, depth).map_err(reduction_failure)?;
    Ok((EXIT_OK, format!("{p}\n")))
}

fn parse_csv(text: &str) -> Result<BairePrefix, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(BairePrefix::new(Vec::new()));
    }
    text.split(',')
        .enumerate()
        .map(|(k, field)| {
            field.trim().parse::<usize>().map_err(|_| {
                CliError::Usage(format!("--prefix: entry {k} ({:?}) is not a natural", field.trim()))
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(BairePrefix::new)
}

fn execute(cmd: &Command, stdin: &mut dyn Read) -> Result<(i32, String), CliError> {
    let tree = load_tree(&cmd.common().source)?;
    match cmd {
        Command::Normalize { depth, .. } => {
            let text = tree.to_text(*depth).map_err(|e| match e {
                TreeError::Unbounded => {
                    CliError::Usage("--depth is required for an infinite tree".into())
                }
                e => CliError::Usage(e.to_string()),
            })?;
            Ok((EXIT_OK, text))
        }
        Command::Describe { depth, .. } => {
            Ok((EXIT_OK, StructurePair::new(tree).describe(*depth)))
        }
        Command::ApplyPath { path, depth, .. } => {
            check_literal_depth(path, *depth)?;
            let f = path_to_iso(&tree, path.clone());
            let text = iso_to_text(&tree, &f, *depth).map_err(reduction_failure)?;
            Ok((EXIT_OK, text))
        }
        Command::ExtractPath { iso, path, depth, .. } => match (iso, path) {
            (_, Some(path)) => {
                check_literal_depth(path, *depth)?;
                extract(&tree, &path_to_iso(&tree, path.clone()), *depth)
            }
            (Some(source), None) => {
                let (name, text) = if source == "-" {
                    let mut text = String::new();
                    stdin.read_to_string(&mut text).map_err(|e| CliError::Input {
                        file: "<stdin>".into(),
                        reason: e.to_string(),
                    })?;
                    ("<stdin>".to_string(), text)
                } else {
                    (source.clone(), read_file(Path::new(source))?)
                };
                let f = parse_iso_text(&text).map_err(|e| CliError::Input {
                    file: name,
                    reason: e.to_string(),
                })?;
                extract(&tree, &f, *depth)
            }
            (None, None) => Err(CliError::Usage("one of --iso or --path is required".into())),
        },
        Command::CheckIsoPrefix { prefix, max_index, depth, .. } => {
            let p = parse_csv(prefix)?;
            let bound = match (max_index, depth) {
                (Some(m), _) => *m,
                (None, Some(d)) => default_max_index(&tree, *d),
                (None, None) => {
                    return Err(CliError::Usage("--max-index or --depth is required".into()))
                }
            };
            let verdict =
                iso_prefix_check(&tree, &p, bound).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(verdict_output(&verdict))
        }
        Command::CheckTreePrefix { path, .. } => {
            let s: BinString = path
                .parse()
                .map_err(|e| CliError::Usage(format!("--path {path:?}: {e}")))?;
            Ok(verdict_output(&tree_prefix_check(&tree, &s)))
        }
        Command::Enumerate { depth, paths, .. } => {
            let mut out = String::new();
            if *paths {
                for p in enumerate_paths(&tree, *depth) {
                    out.push_str(&format!("{p}\n"));
                }
            } else {
                let window = Window::new(&tree, *depth);
                for a in enumerate_assignments_in(&window) {
                    let swapped: Vec<String> =
                        a.swapped(&window).iter().map(|s| s.to_string()).collect();
                    out.push_str(&format!("{a} {}\n", swapped.join(" ")));
                }
            }
            Ok((EXIT_OK, out))
        }
        Command::Verify { depth, max_assignments, .. } => {
            let config = VerifyConfig {
                max_assignments: *max_assignments,
                ..VerifyConfig::default()
            };
            let report = verify_equivalence(&tree, *depth, &config).map_err(|e| match e {
                VerifyError::TooManyAssignments { .. } => {
                    CliError::Usage(format!("{e}; raise --max-assignments"))
                }
                e => CliError::Usage(format!("--depth: {e}")),
            })?;
            let code = if report.is_success() { EXIT_OK } else { EXIT_REJECT };
            Ok((code, report.to_string()))
        }
    }
}

//! Command-line driver: check `.dm` files, derive and elaborate their
//! combinators, generate and discharge VCs, run definitions and the
//! simulation suite.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use dijkstra_core::corpus;
use dijkstra_core::cps::cps_checked;
use dijkstra_core::dm::parse::{parse_items, Item};
use dijkstra_core::dm::{load, DmDef, DmFile, FileError, Registry};
use dijkstra_core::elab::{elab_checked, install_effect, InstallError};
use dijkstra_core::eval::{normalize, DEFAULT_FUEL};
use dijkstra_core::golden::{self, Entry, Format};
use dijkstra_core::print::sexp;
use dijkstra_core::state::simulate_suite;
use dijkstra_core::vc::{discharge, effect_vcs, report_sexp, smt::to_smtlib, VcKind};
use dijkstra_core::{Signature, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dm4f", version, about = "Derive Dijkstra monads from monadic definitions")]
pub struct Cli {
    /// Reduction steps allowed per evaluation.
    #[arg(long, global = true, default_value_t = DEFAULT_FUEL)]
    pub fuel: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Pretty)]
    pub format: OutFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Pretty,
    Sexp,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Pretty => Format::Pretty,
            OutFormat::Sexp => Format::Sexp,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum UnknownPolicy {
    /// Exit with status 2 when a VC is undecided.
    Error,
    /// Report undecided VCs but exit 0.
    Warn,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Typecheck a file and both translations of every definition.
    Check { files: Vec<PathBuf> },
    /// Print the *-translation of the carrier and every definition.
    Translate {
        file: PathBuf,
        /// Compare with a stored sexp rendering instead of printing.
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Byte-exact golden comparison.
        #[arg(long, requires = "golden")]
        strict_golden: bool,
    },
    /// Print the elaboration of every definition and the signature entry.
    Elaborate {
        file: PathBuf,
        #[arg(long)]
        golden: Option<PathBuf>,
        #[arg(long, requires = "golden")]
        strict_golden: bool,
    },
    /// Generate and discharge verification conditions for the file's effect.
    Vc {
        file: PathBuf,
        /// Comma-separated: laws, morphisms, monotonicity, conjunctivity.
        #[arg(long, value_delimiter = ',', default_value = "laws,morphisms,monotonicity,conjunctivity")]
        kinds: Vec<String>,
        /// Write one .smt2 script per VC into this directory.
        #[arg(long)]
        smt_export: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = UnknownPolicy::Error)]
        unknown: UnknownPolicy,
    },
    /// Elaborate a definition and normalize it.
    Run { file: PathBuf, entry: String },
    /// Differential check of primitive state against reified programs.
    Simulate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        count: u64,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {err}")]
    File { path: PathBuf, err: FileError },
    #[error("bundled corpus, {0}")]
    Corpus(String),
    #[error("{path}: installing the effect: {err}")]
    Install { path: PathBuf, err: InstallError },
    #[error("{path}: no definition named `{entry}`")]
    NoEntry { path: PathBuf, entry: String },
    #[error("{path}: the file declares no effect")]
    NoEffect { path: PathBuf },
    #[error("unknown VC kind `{0}`")]
    Kind(String),
    #[error("{path}: {err}")]
    Golden { path: PathBuf, err: golden::GoldenError },
    #[error(transparent)]
    Output(#[from] io::Error),
}

/// A file with the corpus effects it may refer to.
pub struct Loaded {
    pub file: DmFile,
    pub sig: Signature,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn header_name(src: &str) -> Option<String> {
    parse_items(src).ok()?.into_iter().find_map(|it| match it {
        Item::Header { name, .. } => Some(name.to_string()),
        _ => None,
    })
}

/// Loads `path` after the corpus files that precede it. A file declaring a
/// corpus effect takes that effect's place, so later corpus files are left
/// out.
pub fn load_file(path: &Path) -> Result<Loaded, CliError> {
    let src = read(path)?;
    let own = header_name(&src);
    let mut reg = Registry::default();
    let mut sig = Signature::new();
    for (n, csrc) in corpus::FILES {
        let f = load(csrc, &reg).map_err(|e| CliError::Corpus(format!("{n}: {e}")))?;
        let e = f.effect.as_ref().expect("corpus files declare effects");
        if Some(e.name.to_string()) == own {
            break;
        }
        sig = install_effect(&sig, e).map_err(|err| CliError::Corpus(format!("{n}: {err}")))?;
        reg.add(&f);
    }
    let file = load(&src, &reg).map_err(|err| CliError::File {
        path: path.to_path_buf(),
        err,
    })?;
    if let Some(e) = &file.effect {
        sig = install_effect(&sig, e).map_err(|err| CliError::Install {
            path: path.to_path_buf(),
            err,
        })?;
    }
    Ok(Loaded { file, sig })
}

fn all_defs(f: &DmFile) -> Vec<&DmDef> {
    let mut out: Vec<&DmDef> = f.effect.iter().flat_map(|e| e.defs()).collect();
    out.extend(f.defs.iter());
    out
}

fn cmd_check(out: &mut dyn Write, files: &[PathBuf], format: OutFormat) -> Result<i32, CliError> {
    let mut code = EXIT_OK;
    for path in files {
        let loaded = match load_file(path) {
            Ok(l) => l,
            Err(e) => {
                writeln!(out, "error: {e}")?;
                code = EXIT_DIAGNOSTICS;
                continue;
            }
        };
        let empty = Signature::new();
        for d in all_defs(&loaded.file) {
            let r = cps_checked(&empty, &d.delta, &[], &d.deriv)
                .map_err(|e| format!("translation: {e}"))
                .and_then(|_| elab_checked(&empty, &d.delta, &[], &d.deriv).map_err(|e| format!("elaboration: {e}")));
            match (r, format) {
                (Ok(_), OutFormat::Pretty) => writeln!(out, "ok {} : {}", d.name, d.ty)?,
                (Ok(_), OutFormat::Sexp) => writeln!(out, "(check {:?} ok {:?})", &*d.name, d.ty.to_string())?,
                (Err(msg), OutFormat::Pretty) => {
                    code = EXIT_DIAGNOSTICS;
                    writeln!(out, "error {}: {msg}", d.name)?
                }
                (Err(msg), OutFormat::Sexp) => {
                    code = EXIT_DIAGNOSTICS;
                    writeln!(out, "(check {:?} error {msg:?})", &*d.name)?
                }
            }
        }
        if let Some(e) = &loaded.file.effect {
            match format {
                OutFormat::Pretty => writeln!(out, "installed {}", e.name)?,
                OutFormat::Sexp => writeln!(out, "(installed {})", e.name)?,
            }
        }
    }
    Ok(code)
}

fn emit(
    out: &mut dyn Write,
    sig: &Signature,
    entries: &[Entry],
    golden_path: Option<&Path>,
    strict: bool,
    format: OutFormat,
) -> Result<i32, CliError> {
    let Some(gp) = golden_path else {
        write!(out, "{}", golden::render(entries, format.into()))?;
        return Ok(EXIT_OK);
    };
    let stored = read(gp)?;
    if strict {
        let got = golden::render(entries, Format::Sexp);
        if got == stored {
            writeln!(out, "golden ok (strict)")?;
            return Ok(EXIT_OK);
        }
        let (g, s): (Vec<&str>, Vec<&str>) = (got.lines().collect(), stored.lines().collect());
        let line = g.iter().zip(&s).position(|(a, b)| a != b).unwrap_or(g.len().min(s.len()));
        writeln!(out, "golden mismatch at line {}", line + 1)?;
        writeln!(out, "  got  {}", g.get(line).unwrap_or(&"<end of output>"))?;
        writeln!(out, "  want {}", s.get(line).unwrap_or(&"<end of file>"))?;
        return Ok(EXIT_DIAGNOSTICS);
    }
    let want = golden::parse_golden(&stored).map_err(|err| CliError::Golden {
        path: gp.to_path_buf(),
        err,
    })?;
    let diffs = golden::compare(sig, entries, &want);
    if diffs.is_empty() {
        writeln!(out, "golden ok ({} entries)", want.len())?;
        return Ok(EXIT_OK);
    }
    for d in &diffs {
        writeln!(out, "golden mismatch: {d}")?;
    }
    Ok(EXIT_DIAGNOSTICS)
}

fn cmd_translate(out: &mut dyn Write, path: &Path, golden_path: Option<&Path>, strict: bool, format: OutFormat) -> Result<i32, CliError> {
    let l = load_file(path)?;
    emit(out, &l.sig, &golden::translate_file(&l.file), golden_path, strict, format)
}

fn cmd_elaborate(out: &mut dyn Write, path: &Path, golden_path: Option<&Path>, strict: bool, format: OutFormat) -> Result<i32, CliError> {
    let l = load_file(path)?;
    let mut entries = match golden::elaborate_file(&Signature::new(), &l.file) {
        Ok(e) => e,
        Err((d, err)) => {
            writeln!(out, "error {d}: {err}")?;
            return Ok(EXIT_DIAGNOSTICS);
        }
    };
    if let Some(e) = &l.file.effect {
        entries.extend(golden::signature_entries(&l.sig, &e.name));
    }
    emit(out, &l.sig, &entries, golden_path, strict, format)
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '_' { c } else { '_' })
        .collect()
}

fn cmd_vc(
    out: &mut dyn Write,
    path: &Path,
    kinds: &[String],
    smt: Option<&Path>,
    unknown: UnknownPolicy,
    format: OutFormat,
) -> Result<i32, CliError> {
    let kinds = kinds
        .iter()
        .map(|k| VcKind::parse(k.trim()).ok_or_else(|| CliError::Kind(k.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let l = load_file(path)?;
    let e = l.file.effect.as_ref().ok_or_else(|| CliError::NoEffect { path: path.to_path_buf() })?;
    let vcs = match effect_vcs(&l.sig, e, &kinds) {
        Ok(v) => v,
        Err(err) => {
            writeln!(out, "error: {err}")?;
            return Ok(EXIT_DIAGNOSTICS);
        }
    };
    if let Some(dir) = smt {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    let (mut invalid, mut undecided) = (0, 0);
    for vc in &vcs {
        let v = discharge(&l.sig, vc);
        match &v {
            Verdict::Valid => {}
            Verdict::Invalid(_) => invalid += 1,
            Verdict::Unknown(_) => undecided += 1,
        }
        match format {
            OutFormat::Sexp => writeln!(out, "{}", report_sexp(vc, &v))?,
            OutFormat::Pretty => writeln!(out, "{} [{}]: {v}", vc.name, vc.relation.label())?,
        }
        if let Some(dir) = smt {
            let p = dir.join(format!("{}.smt2", file_stem(&vc.name)));
            fs::write(&p, to_smtlib(&vc.name, &vc.formula)).map_err(|source| CliError::Io { path: p, source })?;
        }
    }
    if format == OutFormat::Pretty {
        writeln!(
            out,
            "{} VCs: {} valid, {invalid} invalid, {undecided} unknown",
            vcs.len(),
            vcs.len() - invalid - undecided
        )?;
    }
    Ok(if invalid > 0 {
        EXIT_DIAGNOSTICS
    } else if undecided > 0 && unknown == UnknownPolicy::Error {
        EXIT_UNKNOWN
    } else {
        EXIT_OK
    })
}

fn cmd_run(out: &mut dyn Write, path: &Path, entry: &str, fuel: u64, format: OutFormat) -> Result<i32, CliError> {
    let l = load_file(path)?;
    let d = l.file.def(entry).ok_or_else(|| CliError::NoEntry {
        path: path.to_path_buf(),
        entry: entry.into(),
    })?;
    let o = match elab_checked(&Signature::new(), &d.delta, &[], &d.deriv) {
        Ok(o) => o,
        Err(err) => {
            writeln!(out, "error {entry}: {err}")?;
            return Ok(EXIT_DIAGNOSTICS);
        }
    };
    match normalize(&l.sig, &o.term, fuel) {
        Ok(v) => {
            match format {
                OutFormat::Pretty => writeln!(out, "{v}")?,
                OutFormat::Sexp => writeln!(out, "{}", sexp(&v))?,
            }
            Ok(EXIT_OK)
        }
        Err(e) => {
            writeln!(out, "error {entry}: {e}")?;
            Ok(EXIT_DIAGNOSTICS)
        }
    }
}

fn cmd_simulate(out: &mut dyn Write, seed: u64, count: u64, depth: usize, fuel: u64, format: OutFormat) -> Result<i32, CliError> {
    let sig = corpus::corpus_signature().map_err(CliError::Corpus)?;
    let suite = simulate_suite(&sig, seed, count, depth, fuel);
    match format {
        OutFormat::Sexp => {
            for r in &suite.runs {
                writeln!(out, "{}", r.to_sexp())?;
            }
        }
        OutFormat::Pretty => {
            for r in suite.mismatches() {
                writeln!(out, "mismatch: {}", r.to_sexp())?;
            }
        }
    }
    writeln!(out, "{}", suite.summary_sexp())?;
    Ok(if suite.mismatches().is_empty() { EXIT_OK } else { EXIT_DIAGNOSTICS })
}

/// Executes a parsed command line and returns the exit status.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let f = cli.format;
    match &cli.command {
        Command::Check { files } => cmd_check(out, files, f),
        Command::Translate {
            file,
            golden,
            strict_golden,
        } => cmd_translate(out, file, golden.as_deref(), *strict_golden, f),
        Command::Elaborate {
            file,
            golden,
            strict_golden,
        } => cmd_elaborate(out, file, golden.as_deref(), *strict_golden, f),
        Command::Vc {
            file,
            kinds,
            smt_export,
            unknown,
        } => cmd_vc(out, file, kinds, smt_export.as_deref(), *unknown, f),
        Command::Run { file, entry } => cmd_run(out, file, entry, cli.fuel, f),
        Command::Simulate { seed, count, depth } => cmd_simulate(out, *seed, *count, *depth, cli.fuel, f),
    }
}

/// Parses `args` (program name first) and runs the command. Usage and
/// file errors are reported on `err` with status 1.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_DIAGNOSTICS } else { EXIT_OK };
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(CliError::Output(e)) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DIAGNOSTICS
        }
    }
}

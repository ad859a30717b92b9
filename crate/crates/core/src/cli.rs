//! The `mcgp` command line.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::derivation::{check_with, parse_script, CheckOptions, DerivationScript};
use crate::formula::FeatureClass;
use crate::label::{render_tokens, words, Token};
use crate::lexicon::{load_lexicon, validate_items, Lexicon};
use crate::rules::PicMode;
use crate::search::{parse_with, SearchBounds, SearchOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_LOAD: i32 = 2;
pub const EXIT_CHECK: i32 = 3;
pub const EXIT_NO_PARSE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "mcgp", version, about = "Minimalist Categorial Grammars with phases")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// Print the feature table and a verdict for every item.
    LexiconValidate(Common),
    /// Replay a derivation script and print one line per step.
    Check(WithScript),
    /// Search derivations of a sentence.
    Parse(ParseArgs),
    /// Replay a derivation script and print it as a tree.
    Show(WithScript),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    lexicon: PathBuf,
    /// Overrides the lexicon's start category.
    #[arg(long)]
    start: Option<String>,
    #[arg(long, value_enum, default_value_t = Pic::Strict)]
    pic: Pic,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct WithScript {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    script: PathBuf,
}

#[derive(Args, Debug)]
struct ParseArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = SearchBounds::default().max_hypotheses)]
    max_hyps: usize,
    #[arg(long, default_value_t = SearchBounds::default().max_depth)]
    max_depth: usize,
    #[arg(long, default_value_t = SearchBounds::default().max_results)]
    max_results: usize,
    sentence: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Pic {
    Strict,
    Lenient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Report,
    Tree,
    Script,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    LexiconValidate,
    Check,
    Parse,
    Show,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub lexicon: PathBuf,
    pub script: Option<PathBuf>,
    pub sentence: Option<String>,
    pub start: Option<String>,
    pub pic: PicMode,
    pub bounds: SearchBounds,
    pub format: Format,
}

/// Parses arguments (program name first). Help and version requests come back as `Err((0, text))`.
pub fn parse_args<I, T>(args: I) -> Result<RunConfig, (i32, String)>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| {
        let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        (code, e.to_string())
    })?;
    let (command, common, script, sentence, bounds) = match cli.command {
        CliCommand::LexiconValidate(c) => (Command::LexiconValidate, c, None, None, SearchBounds::default()),
        CliCommand::Check(w) => (Command::Check, w.common, Some(w.script), None, SearchBounds::default()),
        CliCommand::Show(w) => (Command::Show, w.common, Some(w.script), None, SearchBounds::default()),
        CliCommand::Parse(p) => {
            let bounds = SearchBounds {
                max_hypotheses: p.max_hyps,
                max_depth: p.max_depth,
                max_results: p.max_results,
                ..SearchBounds::default()
            };
            (Command::Parse, p.common, None, Some(p.sentence), bounds)
        }
    };
    let default_format = if command == Command::Show { Format::Tree } else { Format::Report };
    Ok(RunConfig {
        command,
        lexicon: common.lexicon,
        script,
        sentence,
        start: common.start,
        pic: match common.pic {
            Pic::Strict => PicMode::Strict,
            Pic::Lenient => PicMode::Lenient,
        },
        bounds,
        format: common.format.unwrap_or(default_format),
    })
}

fn read(path: &PathBuf) -> Result<String, (i32, String)> {
    std::fs::read_to_string(path).map_err(|e| (EXIT_LOAD, format!("cannot read {}: {e}\n", path.display())))
}

fn load(config: &RunConfig) -> Result<Lexicon, (i32, String)> {
    let text = read(&config.lexicon)?;
    let mut lexicon =
        load_lexicon(&text).map_err(|e| (EXIT_LOAD, format!("{}: {e}\n", config.lexicon.display())))?;
    if let Some(name) = &config.start {
        match lexicon.features.get(name) {
            Some(f) if f.class == FeatureClass::P1 => lexicon.start = f.clone(),
            _ => return Err((EXIT_LOAD, format!("start category `{name}` is not a declared P1 feature\n"))),
        }
    }
    Ok(lexicon)
}

fn load_script(config: &RunConfig) -> Result<DerivationScript, (i32, String)> {
    let path = config.script.as_ref().ok_or((EXIT_USAGE, "missing --script\n".to_string()))?;
    let text = read(path)?;
    parse_script(&text).map_err(|e| (EXIT_LOAD, format!("{}: {e}\n", path.display())))
}

fn validate(config: &RunConfig) -> Result<(i32, String), (i32, String)> {
    let text = read(&config.lexicon)?;
    let (features, verdicts) =
        validate_items(&text).map_err(|e| (EXIT_LOAD, format!("{}: {e}\n", config.lexicon.display())))?;
    let mut out = String::new();
    for class in [FeatureClass::P1, FeatureClass::P2] {
        let names: Vec<&str> = features.of_class(class).map(|f| &*f.name).collect();
        let _ = writeln!(out, "{class}: {}", names.join(" "));
    }
    let width = verdicts.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
    let mut failed = false;
    for (name, verdict) in &verdicts {
        match verdict {
            Ok(()) => {
                let _ = writeln!(out, "{name:<width$}  ok");
            }
            Err(e) => {
                failed = true;
                let _ = writeln!(out, "{name:<width$}  rejected: {e}");
            }
        }
    }
    match load(config) {
        Ok(lexicon) => {
            let _ = writeln!(out, "start: {}", lexicon.start.name);
            Ok((if failed { EXIT_LOAD } else { EXIT_OK }, out))
        }
        Err((code, msg)) => {
            out.push_str(&msg);
            Ok((code, out))
        }
    }
}

fn check(config: &RunConfig) -> Result<(i32, String), (i32, String)> {
    let lexicon = load(config)?;
    let script = load_script(config)?;
    match check_with(&script, &lexicon, CheckOptions { pic: config.pic }) {
        Ok(d) => {
            let out = match (config.command, config.format) {
                (_, Format::Script) => script.render(),
                (Command::Show, _) | (_, Format::Tree) => d.tree(&script),
                _ => d.report(&lexicon.start),
            };
            Ok((EXIT_OK, out))
        }
        Err(e) => Ok((EXIT_CHECK, e.report())),
    }
}

fn parse(config: &RunConfig) -> Result<(i32, String), (i32, String)> {
    let lexicon = load(config)?;
    let target: Vec<Token> = words(config.sentence.as_deref().unwrap_or(""));
    let options = SearchOptions { bounds: config.bounds, pic: config.pic, ..SearchOptions::default() };
    let result = parse_with(&target, &lexicon, options).map_err(|e| (EXIT_USAGE, format!("{e}\n")))?;
    let mut out = String::new();
    for (i, script) in result.scripts.iter().enumerate() {
        if config.format == Format::Script {
            out.push_str(&script.render());
            continue;
        }
        let _ = writeln!(out, "# derivation {}", i + 1);
        out.push_str(&script.render());
        let replay = check_with(script, &lexicon, CheckOptions { pic: config.pic });
        if let Ok(d) = replay {
            match config.format {
                Format::Tree => out.push_str(&d.tree(script)),
                _ => {
                    let names = |v| d.name(v);
                    let _ = writeln!(out, "final: {}", d.final_sequent.render(&names));
                }
            }
        }
    }
    let _ = writeln!(
        out,
        "{} derivation{} of \"{}\" ({} items, {})",
        result.scripts.len(),
        if result.scripts.len() == 1 { "" } else { "s" },
        render_tokens(&target, &|v| v.to_string()),
        result.items,
        if result.exhausted { "search exhausted" } else { "item cap reached" }
    );
    Ok((if result.scripts.is_empty() { EXIT_NO_PARSE } else { EXIT_OK }, out))
}

/// Runs one command; returns the exit status and everything to print.
pub fn run(config: &RunConfig) -> (i32, String) {
    let result = match config.command {
        Command::LexiconValidate => validate(config),
        Command::Check | Command::Show => check(config),
        Command::Parse => parse(config),
    };
    result.unwrap_or_else(|e| e)
}

/// `parse_args` followed by `run`.
pub fn main_with_args<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse_args(args) {
        Ok(config) => run(&config),
        Err(e) => e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(main_with_args(["mcgp"]).0, EXIT_USAGE);
        assert_eq!(main_with_args(["mcgp", "check", "--lexicon", "x.mcg"]).0, EXIT_USAGE);
        assert_eq!(main_with_args(["mcgp", "parse", "--lexicon", "x", "--pic", "loose", "a"]).0, EXIT_USAGE);
        assert_eq!(main_with_args(["mcgp", "--help"]).0, EXIT_OK);
    }

    #[test]
    fn flags_reach_the_config() {
        let c = parse_args([
            "mcgp", "parse", "--lexicon", "l.mcg", "--max-hyps", "3", "--max-depth", "9", "--max-results", "2",
            "--pic", "lenient", "--start", "t", "--format", "script", "a b",
        ])
        .unwrap();
        assert_eq!(c.command, Command::Parse);
        assert_eq!((c.bounds.max_hypotheses, c.bounds.max_depth, c.bounds.max_results), (3, 9, 2));
        assert_eq!(c.pic, PicMode::Lenient);
        assert_eq!(c.start.as_deref(), Some("t"));
        assert_eq!(c.format, Format::Script);
        assert_eq!(c.sentence.as_deref(), Some("a b"));
        let show = parse_args(["mcgp", "show", "--lexicon", "l", "--script", "s"]).unwrap();
        assert_eq!(show.format, Format::Tree);
    }

    #[test]
    fn missing_files_exit_2() {
        assert_eq!(main_with_args(["mcgp", "lexicon-validate", "--lexicon", "/nonexistent.mcg"]).0, EXIT_LOAD);
    }
}

//! Lexicon files.
//!
//! ```text
//! # comment
//! P1: d v V t c n
//! P2: k
//! start: c
//! item the ( eps | the | eps ) : (k (x) d) / n
//! item mode [V ; v] ( eps | eps | eps ) : k \ d \ V
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::background::{parse_context, Background, BackgroundError};
use crate::formula::{
    is_identifier, parse_formula, validate_lexical_formula, validate_phase_formula, Feature, FeatureClass,
    FeatureSet, Formula, FormulaError,
};
use crate::label::{parse_label, render_tokens, VarId};
use crate::rules::LexicalItem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lexicon {
    pub features: FeatureSet,
    pub items: Vec<LexicalItem>,
    pub start: Feature,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct LexiconError {
    pub line: usize,
    pub kind: LexiconErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undeclared feature `{0}`")]
    UndeclaredFeature(String),
    #[error("{0}")]
    Feature(FormulaError),
    #[error("item `{name}` rejected: {report}")]
    Rejected { name: String, report: String },
    #[error("phase item `{0}` contains `/`; phase items are built with `\\` only")]
    PhaseSlash(String),
    #[error("phase item `{0}` has no `;` pair in its context")]
    PhaseShape(String),
    #[error("item `{0}` has variables in its label")]
    VariableInLabel(String),
    #[error("missing `start:` line")]
    MissingStart,
    #[error("`start` declared twice")]
    DuplicateStart,
    #[error("start category `{0}` is not a P1 feature")]
    BadStart(String),
}

impl Lexicon {
    pub fn homographs<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a LexicalItem> + 'a {
        self.items.iter().filter(move |i| i.name == name)
    }

    /// The `index`-th item named `name`, counting from 0 in file order.
    pub fn lookup(&self, name: &str, index: usize) -> Option<&LexicalItem> {
        self.items.iter().filter(|i| i.name == name).nth(index)
    }

    /// Position of `item` among its homographs.
    pub fn homograph_index(&self, position: usize) -> usize {
        let name = &self.items[position].name;
        self.items[..position].iter().filter(|i| &i.name == name).count()
    }

    /// Every phonological token some item can contribute.
    pub fn phon_alphabet(&self) -> BTreeSet<Arc<str>> {
        self.items.iter().flat_map(|i| i.label.phon_tokens().cloned()).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for class in [FeatureClass::P1, FeatureClass::P2] {
            let names: Vec<&str> = self.features.of_class(class).map(|f| &*f.name).collect();
            let _ = writeln!(out, "{class}: {}", names.join(" "));
        }
        let _ = writeln!(out, "start: {}", self.start.name);
        for item in &self.items {
            out.push_str("item ");
            out.push_str(&item.name);
            if !item.context.is_empty() {
                out.push(' ');
                out.push_str(&item.context.render_context());
            }
            let comp = |tokens: &[crate::label::Token]| {
                if tokens.is_empty() {
                    "eps".to_string()
                } else {
                    render_tokens(tokens, &crate::label::default_name)
                }
            };
            let _ = writeln!(
                out,
                " ( {} | {} | {} ) : {}",
                comp(&item.label.spec),
                comp(&item.label.head),
                comp(&item.label.comp),
                item.formula
            );
        }
        out
    }
}

fn err(line: usize, kind: LexiconErrorKind) -> LexiconError {
    LexiconError { line, kind }
}

/// Index of the bracket closing the one at `open`.
fn matching_bracket(text: &str, open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in text[open..].char_indices() {
        match c {
            '[' => depth += 1,
            ']' => {
                depth -= 1;
                if depth == 0 {
                    return Some(open + i);
                }
            }
            _ => {}
        }
    }
    None
}

fn has_noncomm(bg: &Background) -> bool {
    match bg {
        Background::NonComm(..) => true,
        Background::Comm(a, b) => has_noncomm(a) || has_noncomm(b),
        _ => false,
    }
}

fn has_slash(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) => false,
        Formula::Right { .. } => true,
        Formula::Left { arg, result, .. } => has_slash(arg) || has_slash(result),
        Formula::CommProduct { left, right, .. } | Formula::NonCommProduct { left, right, .. } => {
            has_slash(left) || has_slash(right)
        }
    }
}

struct RawItem<'a> {
    line: usize,
    name: &'a str,
    context: Option<&'a str>,
    label: &'a str,
    formula: &'a str,
}

fn split_item(line: usize, rest: &str) -> Result<RawItem<'_>, LexiconError> {
    let syntax = |msg: String| err(line, LexiconErrorKind::Syntax(msg));
    let rest = rest.trim_start();
    let name_end = rest.find(|c: char| c.is_whitespace() || c == '[' || c == '(').unwrap_or(rest.len());
    let name = &rest[..name_end];
    if name.is_empty() {
        return Err(syntax("item needs a name".into()));
    }
    let mut rest = rest[name_end..].trim_start();
    let mut context = None;
    if rest.starts_with('[') {
        let close = matching_bracket(rest, 0).ok_or_else(|| syntax("unclosed `[` in context".into()))?;
        context = Some(&rest[..=close]);
        rest = rest[close + 1..].trim_start();
    }
    if !rest.starts_with('(') {
        return Err(syntax(format!("item `{name}`: expected `( spec | head | comp )`")));
    }
    let close = rest.find(')').ok_or_else(|| syntax(format!("item `{name}`: unclosed label")))?;
    let label = &rest[..=close];
    let after = rest[close + 1..].trim_start();
    let formula = after
        .strip_prefix(':')
        .ok_or_else(|| syntax(format!("item `{name}`: expected `:` before the formula")))?;
    Ok(RawItem { line, name, context, label, formula: formula.trim() })
}

fn build_item(raw: &RawItem<'_>, features: &FeatureSet) -> Result<LexicalItem, LexiconError> {
    let line = raw.line;
    let formula = parse_formula(raw.formula, features).map_err(|e| match e {
        FormulaError::UnknownFeature { name, .. } => err(line, LexiconErrorKind::UndeclaredFeature(name)),
        other => err(line, LexiconErrorKind::Syntax(other.to_string())),
    })?;
    let label = parse_label(raw.label, &|_| None).map_err(|e| err(line, LexiconErrorKind::Syntax(e.to_string())))?;
    if !label.is_ground() {
        return Err(err(line, LexiconErrorKind::VariableInLabel(raw.name.into())));
    }
    let context = match raw.context {
        None => Background::Empty,
        Some(text) => {
            let mut next = 0;
            let mut fresh = || {
                next += 1;
                VarId(next - 1)
            };
            parse_context(text, features, &mut fresh).map_err(|e| match e {
                BackgroundError::UnknownFeature { name, .. } => err(line, LexiconErrorKind::UndeclaredFeature(name)),
                other => err(line, LexiconErrorKind::Syntax(other.to_string())),
            })?
        }
    };
    let report = if context.is_empty() {
        validate_lexical_formula(&formula)
    } else {
        if has_slash(&formula) {
            return Err(err(line, LexiconErrorKind::PhaseSlash(raw.name.into())));
        }
        if !has_noncomm(&context) {
            return Err(err(line, LexiconErrorKind::PhaseShape(raw.name.into())));
        }
        validate_phase_formula(&formula)
    };
    if !report.accepted {
        return Err(err(line, LexiconErrorKind::Rejected { name: raw.name.into(), report: report.to_string() }));
    }
    Ok(LexicalItem { name: raw.name.to_string(), context, label, formula })
}

struct Scanned<'a> {
    features: FeatureSet,
    start: Option<(usize, String)>,
    items: Vec<RawItem<'a>>,
}

fn scan(text: &str) -> Result<Scanned<'_>, LexiconError> {
    let mut out = Scanned { features: FeatureSet::new(), start: None, items: Vec::new() };
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = content.split_once(|c: char| c == ':' || c.is_whitespace()).unwrap_or((content, ""));
        let value = rest.trim_start().strip_prefix(':').unwrap_or(rest).trim();
        match keyword {
            "P1" | "P2" => {
                let class = if keyword == "P1" { FeatureClass::P1 } else { FeatureClass::P2 };
                for name in value.split_whitespace() {
                    out.features.declare(name, class).map_err(|e| err(line, LexiconErrorKind::Feature(e)))?;
                }
            }
            "start" => {
                if out.start.is_some() {
                    return Err(err(line, LexiconErrorKind::DuplicateStart));
                }
                if !is_identifier(value) {
                    return Err(err(line, LexiconErrorKind::Syntax(format!("bad start category `{value}`"))));
                }
                out.start = Some((line, value.to_string()));
            }
            "item" => out.items.push(split_item(line, rest)?),
            other => return Err(err(line, LexiconErrorKind::Syntax(format!("unknown directive `{other}`")))),
        }
    }
    Ok(out)
}

pub fn load_lexicon(text: &str) -> Result<Lexicon, LexiconError> {
    let scanned = scan(text)?;
    let features = scanned.features;
    let (start_line, start_name) = scanned.start.ok_or(err(0, LexiconErrorKind::MissingStart))?;
    let start = match features.get(&start_name) {
        Some(f) if f.class == FeatureClass::P1 => f.clone(),
        Some(_) => return Err(err(start_line, LexiconErrorKind::BadStart(start_name))),
        None => return Err(err(start_line, LexiconErrorKind::UndeclaredFeature(start_name))),
    };
    let items = scanned.items.iter().map(|raw| build_item(raw, &features)).collect::<Result<Vec<_>, _>>()?;
    Ok(Lexicon { features, items, start })
}

pub type ItemVerdict = (String, Result<(), LexiconErrorKind>);

/// Per-item verdicts, continuing past rejected items.
pub fn validate_items(text: &str) -> Result<(FeatureSet, Vec<ItemVerdict>), LexiconError> {
    let scanned = scan(text)?;
    let verdicts = scanned
        .items
        .iter()
        .map(|raw| (raw.name.to_string(), build_item(raw, &scanned.features).map(|_| ()).map_err(|e| e.kind)))
        .collect();
    Ok((scanned.features, verdicts))
}

/// Contexts in a lexicon only hold atoms; this reports the `;` pairs a phase item offers.
pub fn phase_pairs(item: &LexicalItem) -> Vec<(Formula, Formula)> {
    fn walk(bg: &Background, out: &mut Vec<(Formula, Formula)>) {
        match bg {
            Background::NonComm(a, b) => {
                if let (Background::Leaf(x), Background::Leaf(y)) = (&**a, &**b) {
                    out.push((x.formula.clone(), y.formula.clone()));
                }
                walk(a, out);
                walk(b, out);
            }
            Background::Comm(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(&item.context, &mut out);
    out
}

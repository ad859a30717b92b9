//! Features, formulas over `\`, `/`, `⊗`, `⊙`, and the lexical formula grammar.
//!
//! The ASCII notation used throughout the crate:
//!
//! | connective | plain | head-left | head-right | affix (reserved) |
//! |------------|-------|-----------|------------|------------------|
//! | `/`        | `/`   | `/<`      | `>/`       | `</`, `/>`       |
//! | `\`        | `\`   | `\<`      | `>\`       | `<\`, `\>`       |
//! | `⊗`        | `(x)` | `(x)<`    | `(x)>`     |                  |
//! | `⊙`        | `(.)` | `(.)<`    | `(.)>`     |                  |
//!
//! `/` is the loosest connective and groups to the left, `\` groups to the
//! right, and both products bind tightest and group to the right. So
//! `k \ c (.) t /< V` reads as `(k \ (c (.) t)) /< V`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureClass {
    /// Categories and selectors.
    P1,
    /// Licensors, which trigger move.
    P2,
}

impl fmt::Display for FeatureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureClass::P1 => f.write_str("P1"),
            FeatureClass::P2 => f.write_str("P2"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Feature {
    pub name: Arc<str>,
    pub class: FeatureClass,
}

impl Feature {
    pub fn new(name: &str, class: FeatureClass) -> Self {
        Feature { name: Arc::from(name), class }
    }
}

/// Declared features of a grammar, keyed by name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureSet {
    by_name: BTreeMap<Arc<str>, Feature>,
    order: Vec<Arc<str>>,
}

impl FeatureSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: &str, class: FeatureClass) -> Result<&Feature, FormulaError> {
        if !is_identifier(name) {
            return Err(FormulaError::BadFeatureName(name.to_string()));
        }
        if let Some(existing) = self.by_name.get(name) {
            return Err(FormulaError::DuplicateFeature {
                name: name.to_string(),
                class: existing.class,
            });
        }
        let feature = Feature::new(name, class);
        self.order.push(feature.name.clone());
        Ok(self.by_name.entry(feature.name.clone()).or_insert(feature))
    }

    /// Builds a set from `(name, class)` pairs, panicking on duplicates. Handy in tests.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, FeatureClass)>) -> Self {
        let mut set = FeatureSet::new();
        for (name, class) in pairs {
            set.declare(name, class).expect("valid feature declaration");
        }
        set
    }

    pub fn get(&self, name: &str) -> Option<&Feature> {
        self.by_name.get(name)
    }

    /// Features in declaration order.
    pub fn iter(&self) -> impl Iterator<Item = &Feature> {
        self.order.iter().map(move |n| &self.by_name[n])
    }

    pub fn of_class(&self, class: FeatureClass) -> impl Iterator<Item = &Feature> {
        self.iter().filter(move |f| f.class == class)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_ident_char)
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Marker on a connective. `<` and `>` pointing at the connective mean head
/// movement; pointing away means affix hopping, which has no engine semantics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Annotation {
    #[default]
    None,
    /// The `<` marker: `/<`, `\<`, `(.)<`.
    HeadLeft,
    /// The `>` marker: `>/`, `>\`, `(.)>`.
    HeadRight,
    /// Reserved `</`, `<\`.
    AffixLeft,
    /// Reserved `/>`, `\>`.
    AffixRight,
}

impl Annotation {
    pub fn is_head_movement(self) -> bool {
        matches!(self, Annotation::HeadLeft | Annotation::HeadRight)
    }

    pub fn is_affix(self) -> bool {
        matches!(self, Annotation::AffixLeft | Annotation::AffixRight)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Feature),
    /// `arg \ result`
    Left {
        arg: Box<Formula>,
        result: Box<Formula>,
        ann: Annotation,
    },
    /// `result / arg`
    Right {
        result: Box<Formula>,
        arg: Box<Formula>,
        ann: Annotation,
    },
    /// `left (x) right`
    CommProduct {
        left: Box<Formula>,
        right: Box<Formula>,
        ann: Annotation,
    },
    /// `left (.) right`
    NonCommProduct {
        left: Box<Formula>,
        right: Box<Formula>,
        ann: Annotation,
    },
}

impl Formula {
    pub fn atom(feature: &Feature) -> Self {
        Formula::Atom(feature.clone())
    }

    pub fn left(arg: Formula, result: Formula) -> Self {
        Formula::Left { arg: Box::new(arg), result: Box::new(result), ann: Annotation::None }
    }

    pub fn right(result: Formula, arg: Formula) -> Self {
        Formula::Right { result: Box::new(result), arg: Box::new(arg), ann: Annotation::None }
    }

    pub fn comm(left: Formula, right: Formula) -> Self {
        Formula::CommProduct { left: Box::new(left), right: Box::new(right), ann: Annotation::None }
    }

    pub fn noncomm(left: Formula, right: Formula) -> Self {
        Formula::NonCommProduct {
            left: Box::new(left),
            right: Box::new(right),
            ann: Annotation::None,
        }
    }

    /// Same formula with the root connective's annotation replaced. Atoms are returned unchanged.
    pub fn annotated(mut self, new: Annotation) -> Self {
        match &mut self {
            Formula::Atom(_) => {}
            Formula::Left { ann, .. }
            | Formula::Right { ann, .. }
            | Formula::CommProduct { ann, .. }
            | Formula::NonCommProduct { ann, .. } => *ann = new,
        }
        self
    }

    pub fn annotation(&self) -> Annotation {
        match self {
            Formula::Atom(_) => Annotation::None,
            Formula::Left { ann, .. }
            | Formula::Right { ann, .. }
            | Formula::CommProduct { ann, .. }
            | Formula::NonCommProduct { ann, .. } => *ann,
        }
    }

    pub fn as_atom(&self) -> Option<&Feature> {
        match self {
            Formula::Atom(f) => Some(f),
            _ => None,
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Atom(_))
    }

    /// Number of connectives.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Left { arg: a, result: b, .. }
            | Formula::Right { result: a, arg: b, .. }
            | Formula::CommProduct { left: a, right: b, .. }
            | Formula::NonCommProduct { left: a, right: b, .. } => 1 + a.size() + b.size(),
        }
    }

    /// True for an atom or a right-nested chain of `⊗` over atoms, the
    /// shapes a hypothesis may carry.
    pub fn is_tensor_chain(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::CommProduct { left, right, .. } => left.is_atom() && right.is_tensor_chain(),
            _ => false,
        }
    }

    pub fn atoms(&self) -> Vec<&Feature> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Feature>) {
        match self {
            Formula::Atom(f) => out.push(f),
            Formula::Left { arg: a, result: b, .. }
            | Formula::Right { result: a, arg: b, .. }
            | Formula::CommProduct { left: a, right: b, .. }
            | Formula::NonCommProduct { left: a, right: b, .. } => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Atom(_) => 3,
            Formula::CommProduct { .. } | Formula::NonCommProduct { .. } => 2,
            Formula::Left { .. } => 1,
            Formula::Right { .. } => 0,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, sub: &Formula, min_prec: u8) -> fmt::Result {
    if sub.precedence() < min_prec {
        write!(f, "({sub})")
    } else {
        write!(f, "{sub}")
    }
}

fn slash_token(ann: Annotation) -> &'static str {
    match ann {
        Annotation::None => "/",
        Annotation::HeadLeft => "/<",
        Annotation::HeadRight => ">/",
        Annotation::AffixLeft => "</",
        Annotation::AffixRight => "/>",
    }
}

fn backslash_token(ann: Annotation) -> &'static str {
    match ann {
        Annotation::None => "\\",
        Annotation::HeadLeft => "\\<",
        Annotation::HeadRight => ">\\",
        Annotation::AffixLeft => "<\\",
        Annotation::AffixRight => "\\>",
    }
}

fn product_suffix(ann: Annotation) -> &'static str {
    match ann {
        Annotation::HeadLeft | Annotation::AffixLeft => "<",
        Annotation::HeadRight | Annotation::AffixRight => ">",
        Annotation::None => "",
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(feat) => f.write_str(&feat.name),
            Formula::Right { result, arg, ann } => {
                write_operand(f, result, 0)?;
                write!(f, " {} ", slash_token(*ann))?;
                write_operand(f, arg, 1)
            }
            Formula::Left { arg, result, ann } => {
                write_operand(f, arg, 2)?;
                write!(f, " {} ", backslash_token(*ann))?;
                write_operand(f, result, 1)
            }
            Formula::CommProduct { left, right, ann } => {
                write_operand(f, left, 3)?;
                write!(f, " (x){} ", product_suffix(*ann))?;
                write_operand(f, right, 2)
            }
            Formula::NonCommProduct { left, right, ann } => {
                write_operand(f, left, 3)?;
                write!(f, " (.){} ", product_suffix(*ann))?;
                write_operand(f, right, 2)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown feature `{name}` at offset {pos}")]
    UnknownFeature { name: String, pos: usize },
    #[error("feature `{name}` already declared as {class}")]
    DuplicateFeature { name: String, class: FeatureClass },
    #[error("`{0}` is not a valid feature name")]
    BadFeatureName(String),
    #[error("enumeration bound {requested} exceeds the maximum of {max} connectives")]
    SizeBound { requested: usize, max: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tok<'a> {
    Ident(&'a str),
    Open,
    Close,
    Slash(Annotation),
    Backslash(Annotation),
    Tensor(Annotation),
    Dot(Annotation),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok<'_>)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let at = |j: usize| bytes.get(j).copied();
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => {
                if matches!(at(i + 1), Some(b'x') | Some(b'.')) && at(i + 2) == Some(b')') {
                    let mut ann = Annotation::None;
                    let mut len = 3;
                    // a product marker is glued to `(x)`/`(.)` and is not the start of `>/` or `>\`
                    match (at(i + 3), at(i + 4)) {
                        (Some(b'<'), next) if !matches!(next, Some(b'/') | Some(b'\\')) => {
                            ann = Annotation::HeadLeft;
                            len = 4;
                        }
                        (Some(b'>'), next) if !matches!(next, Some(b'/') | Some(b'\\')) => {
                            ann = Annotation::HeadRight;
                            len = 4;
                        }
                        _ => {}
                    }
                    let tok = if bytes[i + 1] == b'x' { Tok::Tensor(ann) } else { Tok::Dot(ann) };
                    out.push((start, tok));
                    i += len;
                } else {
                    out.push((start, Tok::Open));
                    i += 1;
                }
            }
            b')' => {
                out.push((start, Tok::Close));
                i += 1;
            }
            b'/' | b'\\' => {
                let (ann, len) = match at(i + 1) {
                    Some(b'<') => (Annotation::HeadLeft, 2),
                    Some(b'>') => (Annotation::AffixRight, 2),
                    _ => (Annotation::None, 1),
                };
                out.push((start, if c == b'/' { Tok::Slash(ann) } else { Tok::Backslash(ann) }));
                i += len;
            }
            b'<' | b'>' => {
                let ann = if c == b'<' { Annotation::AffixLeft } else { Annotation::HeadRight };
                match at(i + 1) {
                    Some(b'/') => out.push((start, Tok::Slash(ann))),
                    Some(b'\\') => out.push((start, Tok::Backslash(ann))),
                    _ => {
                        return Err(FormulaError::Syntax {
                            pos: start,
                            msg: format!("stray `{}`", c as char),
                        })
                    }
                }
                i += 2;
            }
            _ => {
                let rest = &text[i..];
                let len: usize = rest
                    .chars()
                    .take_while(|&ch| is_ident_char(ch))
                    .map(char::len_utf8)
                    .sum();
                if len == 0 {
                    let ch = rest.chars().next().unwrap_or('?');
                    return Err(FormulaError::Syntax {
                        pos: start,
                        msg: format!("unexpected character `{ch}`"),
                    });
                }
                out.push((start, Tok::Ident(&text[i..i + len])));
                i += len;
            }
        }
    }
    Ok(out)
}

struct Parser<'a, 'f> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    end: usize,
    features: &'f FeatureSet,
}

impl<'a> Parser<'a, '_> {
    fn peek(&self) -> Option<Tok<'a>> {
        self.toks.get(self.pos).map(|t| t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn slash_level(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.backslash_level()?;
        while let Some(Tok::Slash(ann)) = self.peek() {
            self.pos += 1;
            let rhs = self.backslash_level()?;
            lhs = Formula::Right { result: Box::new(lhs), arg: Box::new(rhs), ann };
        }
        Ok(lhs)
    }

    fn backslash_level(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.product_level()?;
        if let Some(Tok::Backslash(ann)) = self.peek() {
            self.pos += 1;
            let rhs = self.backslash_level()?;
            return Ok(Formula::Left { arg: Box::new(lhs), result: Box::new(rhs), ann });
        }
        Ok(lhs)
    }

    fn product_level(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.primary()?;
        match self.peek() {
            Some(Tok::Tensor(ann)) => {
                self.pos += 1;
                let rhs = self.product_level()?;
                Ok(Formula::CommProduct { left: Box::new(lhs), right: Box::new(rhs), ann })
            }
            Some(Tok::Dot(ann)) => {
                self.pos += 1;
                let rhs = self.product_level()?;
                Ok(Formula::NonCommProduct { left: Box::new(lhs), right: Box::new(rhs), ann })
            }
            _ => Ok(lhs),
        }
    }

    fn primary(&mut self) -> Result<Formula, FormulaError> {
        let pos = self.offset();
        match self.peek() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match self.features.get(name) {
                    Some(feat) => Ok(Formula::Atom(feat.clone())),
                    None => Err(FormulaError::UnknownFeature { name: name.to_string(), pos }),
                }
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let inner = self.slash_level()?;
                if self.peek() != Some(Tok::Close) {
                    return self.syntax("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => self.syntax("expected a feature or `(`"),
            None => self.syntax("unexpected end of formula"),
        }
    }
}

/// Parses a formula in the ASCII notation. Every atom must be declared in `features`.
pub fn parse_formula(text: &str, features: &FeatureSet) -> Result<Formula, FormulaError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), features };
    let f = p.slash_level()?;
    if p.pos != p.toks.len() {
        return p.syntax("trailing input");
    }
    Ok(f)
}

/// Inverse of [`parse_formula`].
pub fn render_formula(f: &Formula) -> String {
    f.to_string()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Slash-separated path from the root, e.g. `root/result/arg`.
    pub path: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub accepted: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport { accepted: violations.is_empty(), violations }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.accepted {
            return f.write_str("accepted");
        }
        f.write_str("rejected:")?;
        for v in &self.violations {
            write!(f, " [{}: {}]", v.path, v.reason)?;
        }
        Ok(())
    }
}

struct Checker {
    /// Off for yes/no queries: nothing is recorded beyond `rejected`.
    collect: bool,
    rejected: bool,
    path: Vec<&'static str>,
    violations: Vec<Violation>,
}

impl Checker {
    fn new(collect: bool) -> Self {
        Checker { collect, rejected: false, path: Vec::new(), violations: Vec::new() }
    }

    fn report(&mut self, reason: impl Into<String>) {
        self.rejected = true;
        if !self.collect {
            return;
        }
        let mut path = String::from("root");
        for p in &self.path {
            path.push('/');
            path.push_str(p);
        }
        self.violations.push(Violation { path, reason: reason.into() });
    }

    /// Like `report`, for reasons that are costly to build.
    fn report_with(&mut self, reason: impl FnOnce() -> String) {
        if self.collect {
            self.report(reason());
        } else {
            self.rejected = true;
        }
    }

    fn push(&mut self, step: &'static str) {
        if self.collect {
            self.path.push(step);
        }
    }

    fn pop(&mut self) {
        if self.collect {
            self.path.pop();
        }
    }

    fn descend(&mut self, step: &'static str, sub: &Formula, check: fn(&mut Checker, &Formula)) {
        self.push(step);
        check(self, sub);
        self.pop();
    }

    fn head_or_plain(&mut self, ann: Annotation, connective: &str) {
        if ann.is_affix() {
            self.report_with(|| format!("affix-hopping annotation on `{connective}` has no semantics"));
        }
    }

    fn expect_atom(&mut self, f: &Formula, class: Option<FeatureClass>, what: &str) {
        match (f, class) {
            (Formula::Atom(_), None) => {}
            (Formula::Atom(feat), Some(c)) if feat.class == c => {}
            (Formula::Atom(feat), Some(c)) => {
                self.report_with(|| format!("{what} must be a {c} feature, `{}` is {}", feat.name, feat.class))
            }
            (_, _) => self.report_with(|| format!("{what} must be an atomic feature, found `{f}`")),
        }
    }

    // L ::= (B) / P1 | C
    fn lexical(&mut self, f: &Formula) {
        match f {
            Formula::Right { result, arg, ann } => {
                self.head_or_plain(*ann, "/");
                self.descend("result", result, Checker::body);
                self.push("arg");
                self.expect_atom(arg, Some(FeatureClass::P1), "the `/` argument");
                self.pop();
            }
            Formula::Left { .. } => {
                self.report("a `\\` chain must sit under a `/` (only phase items omit it)")
            }
            Formula::NonCommProduct { .. } => {
                self.report("a `(.)` chain must sit under a `/` or `\\`")
            }
            _ => self.tensor_chain(f),
        }
    }

    // B ::= P1 \ (B) | P2 \ (B) | C | D
    fn body(&mut self, f: &Formula) {
        match f {
            Formula::Left { arg, result, ann } => {
                self.head_or_plain(*ann, "\\");
                self.push("arg");
                self.expect_atom(arg, None, "a `\\` argument");
                self.pop();
                self.descend("result", result, Checker::body);
            }
            Formula::Right { .. } => self.report("`/` may only appear once, as the outermost connective"),
            Formula::NonCommProduct { .. } => self.noncomm_chain(f),
            _ => self.tensor_chain(f),
        }
    }

    // C ::= P2 (x) (C) | P1
    fn tensor_chain(&mut self, f: &Formula) {
        match f {
            Formula::Atom(_) => self.expect_atom(f, Some(FeatureClass::P1), "the category"),
            Formula::CommProduct { left, right, ann } => {
                if *ann != Annotation::None {
                    self.report("annotations on `(x)` have no semantics");
                }
                self.push("left");
                self.expect_atom(left, Some(FeatureClass::P2), "a `(x)` component before the last");
                self.pop();
                self.descend("right", right, Checker::tensor_chain);
            }
            _ => self.report_with(|| format!("expected a `(x)` chain ending in a category, found `{f}`")),
        }
    }

    // D ::= P1 (.) (D) | P2 (.) (D) | P1
    fn noncomm_chain(&mut self, f: &Formula) {
        match f {
            Formula::Atom(_) => self.expect_atom(f, Some(FeatureClass::P1), "the category"),
            Formula::NonCommProduct { left, right, ann } => {
                self.head_or_plain(*ann, "(.)");
                self.push("left");
                self.expect_atom(left, None, "a `(.)` component");
                self.pop();
                self.descend("right", right, Checker::noncomm_chain);
            }
            _ => self.report_with(|| format!("expected a `(.)` chain ending in a category, found `{f}`")),
        }
    }
}

/// Checks `f` against the lexical formula grammar (start symbol L):
///
/// ```text
/// L ::= (B) / P1 | C
/// B ::= P1 \ (B) | P2 \ (B) | C | D
/// C ::= P2 (x) (C) | P1
/// D ::= P1 (.) (D) | P2 (.) (D) | P1
/// ```
pub fn validate_lexical_formula(f: &Formula) -> ValidationReport {
    let mut c = Checker::new(true);
    c.lexical(f);
    ValidationReport::from_violations(c.violations)
}

/// Phase items are built with `\` only: their formula must derive from B.
pub fn validate_phase_formula(f: &Formula) -> ValidationReport {
    let mut c = Checker::new(true);
    c.body(f);
    ValidationReport::from_violations(c.violations)
}

/// `validate_lexical_formula(f).accepted`, without building the report.
pub fn accepts_lexical_formula(f: &Formula) -> bool {
    let mut c = Checker::new(false);
    c.lexical(f);
    !c.rejected
}

/// `validate_phase_formula(f).accepted`, without building the report.
pub fn accepts_phase_formula(f: &Formula) -> bool {
    let mut c = Checker::new(false);
    c.body(f);
    !c.rejected
}

/// Largest bound accepted by [`enumerate_formulas`] and [`for_each_formula`].
pub const MAX_ENUMERATION_SIZE: usize = 8;

/// All formulas with at most `max_size` unannotated connectives over
/// `features`, ordered by size.
pub fn enumerate_formulas(features: &FeatureSet, max_size: usize) -> Result<Vec<Formula>, FormulaError> {
    let mut out = Vec::new();
    for_each_formula(features, max_size, |f| out.push(f.clone()))?;
    Ok(out)
}

/// Visits every formula [`enumerate_formulas`] would return, without
/// materializing the list. The visited value is mutated in place between
/// calls, so exhaustive sweeps allocate one tree per shape.
pub fn for_each_formula(
    features: &FeatureSet,
    max_size: usize,
    mut visit: impl FnMut(&Formula),
) -> Result<(), FormulaError> {
    if max_size > MAX_ENUMERATION_SIZE {
        return Err(FormulaError::SizeBound { requested: max_size, max: MAX_ENUMERATION_SIZE });
    }
    let atoms: Vec<Feature> = features.iter().cloned().collect();
    if atoms.is_empty() {
        return Ok(());
    }
    let odo = Odometer { atoms: &atoms };
    for size in 0..=max_size {
        for mut f in odo.shapes(size) {
            loop {
                visit(&f);
                if !odo.advance(&mut f) {
                    break;
                }
            }
        }
    }
    Ok(())
}

struct Odometer<'a> {
    atoms: &'a [Feature],
}

const CONNECTIVES: usize = 4;

impl Odometer<'_> {
    /// Every binary tree with `size` internal nodes, labelled with the first connective and atom.
    fn shapes(&self, size: usize) -> Vec<Formula> {
        if size == 0 {
            return vec![Formula::Atom(self.atoms[0].clone())];
        }
        let mut out = Vec::new();
        for left in 0..size {
            let right = size - 1 - left;
            for l in self.shapes(left) {
                for r in self.shapes(right) {
                    out.push(Formula::left(l.clone(), r));
                }
            }
        }
        out
    }

    fn connective_index(f: &Formula) -> usize {
        match f {
            Formula::Atom(_) => unreachable!("connective_index on atom"),
            Formula::Left { .. } => 0,
            Formula::Right { .. } => 1,
            Formula::CommProduct { .. } => 2,
            Formula::NonCommProduct { .. } => 3,
        }
    }

    /// Moves the children of `node` under connective `idx`, keeping their order.
    fn set_connective(&self, node: &mut Formula, idx: usize) {
        let placeholder = Formula::Atom(self.atoms[0].clone());
        let (a, b) = match std::mem::replace(node, placeholder) {
            Formula::Left { arg: a, result: b, .. }
            | Formula::Right { result: a, arg: b, .. }
            | Formula::CommProduct { left: a, right: b, .. }
            | Formula::NonCommProduct { left: a, right: b, .. } => (a, b),
            Formula::Atom(_) => unreachable!("set_connective on atom"),
        };
        let ann = Annotation::None;
        *node = match idx {
            0 => Formula::Left { arg: a, result: b, ann },
            1 => Formula::Right { result: a, arg: b, ann },
            2 => Formula::CommProduct { left: a, right: b, ann },
            _ => Formula::NonCommProduct { left: a, right: b, ann },
        };
    }

    fn children(node: &mut Formula) -> (&mut Formula, &mut Formula) {
        match node {
            Formula::Left { arg: a, result: b, .. }
            | Formula::Right { result: a, arg: b, .. }
            | Formula::CommProduct { left: a, right: b, .. }
            | Formula::NonCommProduct { left: a, right: b, .. } => (a, b),
            Formula::Atom(_) => unreachable!("children of atom"),
        }
    }

    fn reset(&self, node: &mut Formula) {
        if node.is_atom() {
            *node = Formula::Atom(self.atoms[0].clone());
            return;
        }
        self.set_connective(node, 0);
        let (a, b) = Self::children(node);
        self.reset(a);
        self.reset(b);
    }

    /// Advances to the next labelling of the same shape; false once all have been seen.
    fn advance(&self, node: &mut Formula) -> bool {
        if let Formula::Atom(feat) = node {
            let idx = self.atoms.iter().position(|a| a == feat).unwrap_or(0);
            if idx + 1 < self.atoms.len() {
                *node = Formula::Atom(self.atoms[idx + 1].clone());
                return true;
            }
            *node = Formula::Atom(self.atoms[0].clone());
            return false;
        }
        {
            let (a, b) = Self::children(node);
            if self.advance(b) || self.advance(a) {
                return true;
            }
        }
        let idx = Self::connective_index(node);
        if idx + 1 < CONNECTIVES {
            self.set_connective(node, idx + 1);
            return true;
        }
        self.reset(node);
        false
    }
}

//! Derivation scripts and their replay.
//!
//! A script is an explicit proof tree in prefix notation:
//!
//! ```text
//! (phase (mg (lex read) (hyp d u))
//!        (mg (mg (lex mode) (hyp k v)) (hyp d w))
//!        (transfer (mg (lex a) (lex book)))
//!        strict)
//! ```
//!
//! Child paths are `r.0`, `r.1` in written order and `r.tK` for the K-th
//! transfer. Mg replays the trigger first; mv and phase replay the host
//! before the package, and transfers after the substitution step.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::formula::{parse_formula, Feature, Formula, FormulaError};
use crate::label::{parse_label, render_tokens, LabelError, Token, VarId};
use crate::lexicon::Lexicon;
use crate::rules::{self, Fresh, PhaseState, PicMode, RuleError, Sequent};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Lex { name: String, index: usize },
    /// `formula` is kept as written and parsed against the lexicon's features.
    Hyp { formula: String, alias: String },
    Mg { trigger: Box<Node>, arg: Box<Node> },
    Mv { package: Box<Node>, host: Box<Node> },
    Phase { package: Box<Node>, host: Box<Node>, transfers: Vec<Node>, mode: Option<PicMode> },
    /// Compares the label produced at `stage` of `node` with a reference display.
    Expect { stage: Stage, label: String, node: Box<Node> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Final,
    /// A phase after its substitution step.
    Phase1,
    /// A phase after its K-th transfer.
    Transfer(usize),
}

impl Node {
    pub fn lex(name: &str, index: usize) -> Node {
        Node::Lex { name: name.to_string(), index }
    }

    pub fn hyp(formula: &Formula, alias: &str) -> Node {
        let text = if formula.is_atom() { formula.to_string() } else { format!("({formula})") };
        Node::Hyp { formula: text, alias: alias.to_string() }
    }

    pub fn mg(trigger: Node, arg: Node) -> Node {
        Node::Mg { trigger: Box::new(trigger), arg: Box::new(arg) }
    }

    pub fn mv(package: Node, host: Node) -> Node {
        Node::Mv { package: Box::new(package), host: Box::new(host) }
    }

    pub fn phase(package: Node, host: Node, transfers: Vec<Node>, mode: Option<PicMode>) -> Node {
        Node::Phase { package: Box::new(package), host: Box::new(host), transfers, mode }
    }

    /// Strips `expect` wrappers.
    pub fn inner(&self) -> &Node {
        match self {
            Node::Expect { node, .. } => node.inner(),
            other => other,
        }
    }

    fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Node)) {
        f(self);
        match self {
            Node::Lex { .. } | Node::Hyp { .. } => {}
            Node::Mg { trigger: a, arg: b } | Node::Mv { package: a, host: b } => {
                a.visit(f);
                b.visit(f);
            }
            Node::Phase { package, host, transfers, .. } => {
                package.visit(f);
                host.visit(f);
                for t in transfers {
                    t.visit(f);
                }
            }
            Node::Expect { node, .. } => node.visit(f),
        }
    }

    pub fn aliases(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |n| {
            if let Node::Hyp { alias, .. } = n {
                out.push(alias.as_str());
            }
        });
        out
    }

    /// Phase transfers whose package is a bare non-atomic hypothesis.
    pub fn cyclic_transfers(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |n| {
            if let Node::Phase { transfers, .. } = n {
                for t in transfers {
                    if let Node::Hyp { formula, alias } = t.inner() {
                        if formula.trim_start().starts_with('(') {
                            out.push(alias.as_str());
                        }
                    }
                }
            }
        });
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        let flat = self.flat();
        if flat.len() + indent <= 78 {
            out.push_str(&flat);
            return;
        }
        let pad = " ".repeat(indent + 2);
        let child = |out: &mut String, n: &Node| {
            out.push('\n');
            out.push_str(&pad);
            n.write(out, indent + 2);
        };
        match self {
            Node::Lex { .. } | Node::Hyp { .. } => out.push_str(&flat),
            Node::Mg { trigger: a, arg: b } | Node::Mv { package: a, host: b } => {
                out.push_str(if matches!(self, Node::Mg { .. }) { "(mg" } else { "(mv" });
                child(out, a);
                child(out, b);
                out.push(')');
            }
            Node::Phase { package, host, transfers, mode } => {
                out.push_str("(phase");
                child(out, package);
                child(out, host);
                if !transfers.is_empty() {
                    out.push('\n');
                    out.push_str(&pad);
                    out.push_str("(transfer");
                    let inner_pad = " ".repeat(indent + 4);
                    for t in transfers {
                        out.push('\n');
                        out.push_str(&inner_pad);
                        t.write(out, indent + 4);
                    }
                    out.push(')');
                }
                if let Some(m) = mode {
                    out.push('\n');
                    out.push_str(&pad);
                    out.push_str(&m.to_string());
                }
                out.push(')');
            }
            Node::Expect { stage, label, node } => {
                out.push_str("(expect ");
                out.push_str(&stage_prefix(*stage));
                out.push_str(&format!("{label:?}"));
                child(out, node);
                out.push(')');
            }
        }
    }

    fn flat(&self) -> String {
        match self {
            Node::Lex { name, index: 0 } => format!("(lex {name})"),
            Node::Lex { name, index } => format!("(lex {name} {index})"),
            Node::Hyp { formula, alias } => format!("(hyp {formula} {alias})"),
            Node::Mg { trigger, arg } => format!("(mg {} {})", trigger.flat(), arg.flat()),
            Node::Mv { package, host } => format!("(mv {} {})", package.flat(), host.flat()),
            Node::Phase { package, host, transfers, mode } => {
                let mut s = format!("(phase {} {}", package.flat(), host.flat());
                if !transfers.is_empty() {
                    s.push_str(" (transfer");
                    for t in transfers {
                        s.push(' ');
                        s.push_str(&t.flat());
                    }
                    s.push(')');
                }
                if let Some(m) = mode {
                    s.push(' ');
                    s.push_str(&m.to_string());
                }
                s.push(')');
                s
            }
            Node::Expect { stage, label, node } => {
                format!("(expect {}{label:?} {})", stage_prefix(*stage), node.flat())
            }
        }
    }
}

fn stage_prefix(stage: Stage) -> String {
    match stage {
        Stage::Final => String::new(),
        Stage::Phase1 => "phase1 ".into(),
        Stage::Transfer(k) => format!("t{k} "),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationScript {
    pub root: Node,
}

impl DerivationScript {
    pub fn new(root: Node) -> Result<Self, ScriptError> {
        let mut seen = BTreeSet::new();
        for alias in root.aliases() {
            if !seen.insert(alias) {
                return Err(ScriptError { pos: 0, msg: format!("hypothesis alias `{alias}` used twice") });
            }
        }
        Ok(DerivationScript { root })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.root.write(&mut out, 0);
        out.push('\n');
        out
    }
}

impl fmt::Display for DerivationScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("script syntax at offset {pos}: {msg}")]
pub struct ScriptError {
    pub pos: usize,
    pub msg: String,
}

struct ScriptParser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> ScriptParser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ScriptError> {
        Err(ScriptError { pos: self.pos, msg: msg.into() })
    }

    fn skip(&mut self) {
        loop {
            let rest = &self.text[self.pos..];
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with('#') {
                self.pos += trimmed.find('\n').unwrap_or(trimmed.len());
            } else {
                return;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip();
        self.text[self.pos..].chars().next()
    }

    fn expect_char(&mut self, c: char) -> Result<(), ScriptError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn word(&mut self) -> Result<&'a str, ScriptError> {
        self.skip();
        let rest = &self.text[self.pos..];
        let len = rest.find(|c: char| c.is_whitespace() || matches!(c, '(' | ')' | '"' | '#')).unwrap_or(rest.len());
        if len == 0 {
            return self.err("expected a word");
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    /// A parenthesized chunk kept verbatim.
    fn balanced(&mut self) -> Result<&'a str, ScriptError> {
        self.skip();
        let start = self.pos;
        let mut depth = 0usize;
        for (i, c) in self.text[start..].char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos = start + i + 1;
                        return Ok(&self.text[start..self.pos]);
                    }
                }
                _ => {}
            }
        }
        self.err("unbalanced parentheses")
    }

    fn string(&mut self) -> Result<String, ScriptError> {
        self.expect_char('"')?;
        let rest = &self.text[self.pos..];
        let Some(end) = rest.find('"') else { return self.err("unterminated string") };
        self.pos += end + 1;
        Ok(rest[..end].to_string())
    }

    fn node(&mut self) -> Result<Node, ScriptError> {
        self.expect_char('(')?;
        let head_pos = self.pos;
        let node = match self.word()? {
            "lex" => {
                let name = self.word()?.to_string();
                let index = if self.peek() == Some(')') {
                    0
                } else {
                    let w = self.word()?;
                    match w.parse() {
                        Ok(i) => i,
                        Err(_) => return self.err(format!("bad homograph index `{w}`")),
                    }
                };
                Node::Lex { name, index }
            }
            "hyp" => {
                let formula = if self.peek() == Some('(') { self.balanced()? } else { self.word()? };
                let alias = self.word()?;
                Node::Hyp { formula: formula.to_string(), alias: alias.to_string() }
            }
            "mg" => {
                let trigger = self.node()?;
                Node::mg(trigger, self.node()?)
            }
            "mv" => {
                let package = self.node()?;
                Node::mv(package, self.node()?)
            }
            "phase" => {
                let package = self.node()?;
                let host = self.node()?;
                let mut transfers = Vec::new();
                let mut mode = None;
                loop {
                    match self.peek() {
                        Some(')') => break,
                        Some('(') => {
                            let save = self.pos;
                            self.pos += 1;
                            if self.word()? != "transfer" || !transfers.is_empty() {
                                self.pos = save;
                                return self.err("expected `(transfer ...)`");
                            }
                            while self.peek() != Some(')') {
                                transfers.push(self.node()?);
                            }
                            self.expect_char(')')?;
                        }
                        _ => {
                            mode = Some(match self.word()? {
                                "strict" => PicMode::Strict,
                                "lenient" => PicMode::Lenient,
                                other => return self.err(format!("unknown phase mode `{other}`")),
                            });
                        }
                    }
                }
                Node::phase(package, host, transfers, mode)
            }
            "expect" => {
                let stage = if self.peek() == Some('"') {
                    Stage::Final
                } else {
                    match self.word()? {
                        "phase1" => Stage::Phase1,
                        w => match w.strip_prefix('t').and_then(|k| k.parse().ok()) {
                            Some(k) => Stage::Transfer(k),
                            None => return self.err(format!("unknown stage `{w}`")),
                        },
                    }
                };
                let label = self.string()?;
                Node::Expect { stage, label, node: Box::new(self.node()?) }
            }
            other => {
                self.pos = head_pos;
                return self.err(format!("unknown node `{other}`"));
            }
        };
        self.expect_char(')')?;
        Ok(node)
    }
}

pub fn parse_script(text: &str) -> Result<DerivationScript, ScriptError> {
    let mut p = ScriptParser { text, pos: 0 };
    let root = p.node()?;
    if p.peek().is_some() {
        return p.err("trailing input after the derivation");
    }
    DerivationScript::new(root)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub path: String,
    pub rule: &'static str,
    pub sequent: Sequent,
    /// Phase-internal hypotheses, for steps inside a phase.
    pub internal: Option<BTreeSet<VarId>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckedDerivation {
    pub final_sequent: Sequent,
    pub steps: Vec<Step>,
    pub notes: Vec<String>,
    pub aliases: BTreeMap<VarId, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckErrorKind {
    #[error("{0}")]
    Rule(RuleError),
    #[error("no lexical item `{name}` with index {index}")]
    UnresolvedLexeme { name: String, index: usize },
    #[error("bad hypothesis formula: {0}")]
    BadFormula(FormulaError),
    #[error("bad expected label: {0}")]
    BadExpectation(LabelError),
    #[error("expected {expected}, derived {found}")]
    ExpectationMismatch { expected: String, found: String },
    #[error("stage {0:?} does not exist at this node")]
    NoSuchStage(Stage),
}

impl CheckErrorKind {
    pub fn name(&self) -> &'static str {
        match self {
            CheckErrorKind::Rule(e) => e.kind(),
            CheckErrorKind::UnresolvedLexeme { .. } => "UnresolvedLexeme",
            CheckErrorKind::BadFormula(_) => "BadFormula",
            CheckErrorKind::BadExpectation(_) => "BadExpectation",
            CheckErrorKind::ExpectationMismatch { .. } => "ExpectationMismatch",
            CheckErrorKind::NoSuchStage(_) => "NoSuchStage",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {rule}: {}: {kind}", kind.name())]
pub struct CheckError {
    pub path: String,
    pub rule: &'static str,
    pub kind: CheckErrorKind,
    /// Steps replayed before the failure.
    pub steps: Vec<Step>,
    pub aliases: BTreeMap<VarId, String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Mode for phases that do not name one.
    pub pic: PicMode,
}

struct Replay<'a> {
    lexicon: &'a Lexicon,
    options: CheckOptions,
    fresh: Fresh,
    steps: Vec<Step>,
    notes: Vec<String>,
    aliases: BTreeMap<VarId, String>,
}

type Failure = (String, &'static str, CheckErrorKind);

impl Replay<'_> {
    fn names(&self) -> impl Fn(VarId) -> String + '_ {
        |v| self.aliases.get(&v).cloned().unwrap_or_else(|| v.to_string())
    }

    fn record(&mut self, path: &str, rule: &'static str, sequent: &Sequent, internal: Option<BTreeSet<VarId>>) {
        self.steps.push(Step { path: path.to_string(), rule, sequent: sequent.clone(), internal });
    }

    fn rule<T>(path: &str, rule: &'static str, r: Result<T, RuleError>) -> Result<T, Failure> {
        r.map_err(|e| (path.to_string(), rule, CheckErrorKind::Rule(e)))
    }

    fn eval(&mut self, node: &Node, path: &str) -> Result<Sequent, Failure> {
        match node {
            Node::Lex { name, index } => {
                let item = self.lexicon.lookup(name, *index).ok_or_else(|| {
                    (path.to_string(), "lex", CheckErrorKind::UnresolvedLexeme { name: name.clone(), index: *index })
                })?;
                let s = rules::lex(item, &mut self.fresh);
                self.record(path, "lex", &s, None);
                Ok(s)
            }
            Node::Hyp { formula, alias } => {
                let f = parse_formula(formula, &self.lexicon.features)
                    .map_err(|e| (path.to_string(), "hyp", CheckErrorKind::BadFormula(e)))?;
                let s = Self::rule(path, "hyp", rules::hyp(&f, &mut self.fresh))?;
                if let Some(v) = s.label.head.first().and_then(Token::as_var) {
                    self.aliases.insert(v, alias.clone());
                }
                self.record(path, "hyp", &s, None);
                Ok(s)
            }
            Node::Mg { trigger, arg } => {
                let t = self.eval(trigger, &format!("{path}.0"))?;
                let a = self.eval(arg, &format!("{path}.1"))?;
                let s = Self::rule(path, "mg", rules::merge(&t, &a))?;
                self.record(path, "mg", &s, None);
                Ok(s)
            }
            Node::Mv { package, host } => {
                let h = self.eval(host, &format!("{path}.1"))?;
                let p = self.eval(package, &format!("{path}.0"))?;
                let s = Self::rule(path, "mv", rules::mv(&p, &h))?;
                self.record(path, "mv", &s, None);
                Ok(s)
            }
            Node::Phase { .. } => Ok(self.eval_phase(node, path, &mut |_, _| Ok(()))?),
            Node::Expect { stage, label, node } => self.eval_expect(*stage, label, node, path),
        }
    }

    /// Replays a phase node; `at_stage` sees the state after phase1 and after each transfer.
    fn eval_phase(
        &mut self,
        node: &Node,
        path: &str,
        at_stage: &mut dyn FnMut(&mut Self, (Stage, &PhaseState)) -> Result<(), Failure>,
    ) -> Result<Sequent, Failure> {
        let Node::Phase { package, host, transfers, mode } = node else { unreachable!() };
        let h = self.eval(host, &format!("{path}.1"))?;
        let p = self.eval(package, &format!("{path}.0"))?;
        let mut state = Self::rule(path, "phase1", rules::phase_substitute(&p, &h))?;
        self.record(path, "phase1", &state.host, Some(state.internal.clone()));
        at_stage(self, (Stage::Phase1, &state))?;
        for (k, t) in transfers.iter().enumerate() {
            let tpath = format!("{path}.t{k}");
            let pkg = self.eval(t, &tpath)?;
            state = Self::rule(&tpath, "phase_trans", rules::phase_transfer(&state, &pkg))?;
            self.record(&tpath, "phase_trans", &state.host, Some(state.internal.clone()));
            at_stage(self, (Stage::Transfer(k), &state))?;
        }
        let done = Self::rule(path, "phase", rules::phase_complete(&state, mode.unwrap_or(self.options.pic)))?;
        self.record(path, "phase", &done, None);
        Ok(done)
    }

    /// Evaluates a chain of `expect` wrappers around one node.
    fn eval_expect(&mut self, stage: Stage, label: &str, node: &Node, path: &str) -> Result<Sequent, Failure> {
        let mut wanted = vec![(stage, label)];
        let mut node = node;
        while let Node::Expect { stage, label, node: inner } = node {
            wanted.push((*stage, label.as_str()));
            node = inner;
        }
        let staged: Vec<(Stage, &str)> = wanted.iter().copied().filter(|(s, _)| *s != Stage::Final).collect();
        let s = if staged.is_empty() {
            self.eval(node, path)?
        } else {
            if !matches!(node, Node::Phase { .. }) {
                return Err((path.to_string(), "expect", CheckErrorKind::NoSuchStage(staged[0].0)));
            }
            let mut seen = Vec::new();
            let s = self.eval_phase(node, path, &mut |me, (at, state)| {
                for (stage, label) in staged.iter().filter(|(s, _)| *s == at) {
                    seen.push(*stage);
                    me.compare(path, label, &state.host)?;
                }
                Ok(())
            })?;
            if let Some((missing, _)) = staged.iter().find(|(s, _)| !seen.contains(s)) {
                return Err((path.to_string(), "expect", CheckErrorKind::NoSuchStage(*missing)));
            }
            s
        };
        for (_, label) in wanted.iter().filter(|(s, _)| *s == Stage::Final) {
            self.compare(path, label, &s)?;
        }
        Ok(s)
    }

    fn compare(&mut self, path: &str, label: &str, s: &Sequent) -> Result<(), Failure> {
        let by_alias: BTreeMap<&str, VarId> = self.aliases.iter().map(|(v, a)| (a.as_str(), *v)).collect();
        let expected = parse_label(label, &|w| by_alias.get(w).copied())
            .map_err(|e| (path.to_string(), "expect", CheckErrorKind::BadExpectation(e)))?;
        if expected == s.label {
            return Ok(());
        }
        let (shown, found) = {
            let names = self.names();
            (expected.render(&names), s.label.render(&names))
        };
        if expected.concat() == s.label.concat() {
            let note = format!("{path}: expected {shown}, derived {found}; same string");
            self.notes.push(note);
            Ok(())
        } else {
            Err((path.to_string(), "expect", CheckErrorKind::ExpectationMismatch { expected: shown, found }))
        }
    }
}

pub fn check(script: &DerivationScript, lexicon: &Lexicon) -> Result<CheckedDerivation, CheckError> {
    check_with(script, lexicon, CheckOptions::default())
}

pub fn check_with(
    script: &DerivationScript,
    lexicon: &Lexicon,
    options: CheckOptions,
) -> Result<CheckedDerivation, CheckError> {
    let mut replay = Replay {
        lexicon,
        options,
        fresh: Fresh::new(),
        steps: Vec::new(),
        notes: Vec::new(),
        aliases: BTreeMap::new(),
    };
    match replay.eval(&script.root, "r") {
        Ok(final_sequent) => Ok(CheckedDerivation {
            final_sequent,
            steps: replay.steps,
            notes: replay.notes,
            aliases: replay.aliases,
        }),
        Err((path, rule, kind)) => Err(CheckError { path, rule, kind, steps: replay.steps, aliases: replay.aliases }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum YieldError {
    #[error("open hypotheses: {}", .0.join(", "))]
    OpenHypotheses(Vec<String>),
    #[error("category is `{found}`, not `{expected}`")]
    WrongCategory { expected: String, found: String },
    #[error("label still has variables: {}", .0.join(", "))]
    FreeVariables(Vec<String>),
}

/// The derived string, if `d` ends in a closed sequent of category `start`.
pub fn yield_string(d: &CheckedDerivation, start: &Feature) -> Result<Vec<Token>, YieldError> {
    let s = &d.final_sequent;
    if !s.background.is_empty() {
        return Err(YieldError::OpenHypotheses(s.background.leaves().iter().map(|h| h.formula.to_string()).collect()));
    }
    if s.formula != Formula::atom(start) {
        return Err(YieldError::WrongCategory { expected: start.name.to_string(), found: s.formula.to_string() });
    }
    let free: Vec<String> = s.label.vars().into_iter().map(|v| d.name(v)).collect();
    if !free.is_empty() {
        return Err(YieldError::FreeVariables(free));
    }
    Ok(s.label.concat())
}

impl CheckedDerivation {
    pub fn name(&self, v: VarId) -> String {
        self.aliases.get(&v).cloned().unwrap_or_else(|| v.to_string())
    }

    /// The sequent recorded for `rule` at `path`.
    pub fn step(&self, path: &str, rule: &str) -> Option<&Sequent> {
        self.steps.iter().find(|s| s.path == path && s.rule == rule).map(|s| &s.sequent)
    }

    pub fn report(&self, start: &Feature) -> String {
        let mut out = render_steps(&self.steps, &|v| self.name(v));
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        match yield_string(self, start) {
            Ok(tokens) => out.push_str(&format!("concat: {}\n", render_tokens(&tokens, &|v| self.name(v)))),
            Err(e) => out.push_str(&format!("no yield: {e}\n")),
        }
        out
    }

    /// Indented tree, one sequent per node. `<` and `>` point at the projecting daughter.
    pub fn tree(&self, script: &DerivationScript) -> String {
        let mut out = String::new();
        let names = |v: VarId| self.name(v);
        self.tree_node(script.root.inner(), "r", 0, &names, &mut out);
        out
    }

    fn tree_node(&self, node: &Node, path: &str, depth: usize, names: &dyn Fn(VarId) -> String, out: &mut String) {
        let pad = "  ".repeat(depth);
        let line = |out: &mut String, tag: String, rule: &str, at: &str| {
            if let Some(s) = self.step(at, rule) {
                out.push_str(&format!("{pad}{tag}  {}\n", s.render(names)));
            }
        };
        match node {
            Node::Lex { name, .. } => line(out, format!("lex {name}"), "lex", path),
            Node::Hyp { alias, .. } => line(out, format!("hyp {alias}"), "hyp", path),
            Node::Mg { trigger, arg } => {
                let tag = match self.step(&format!("{path}.0"), trigger.inner().final_rule()).map(|s| &s.formula) {
                    Some(Formula::Left { .. }) => ">",
                    _ => "<",
                };
                line(out, tag.to_string(), "mg", path);
                self.tree_node(trigger.inner(), &format!("{path}.0"), depth + 1, names, out);
                self.tree_node(arg.inner(), &format!("{path}.1"), depth + 1, names, out);
            }
            Node::Mv { package, host } => {
                line(out, "> mv".to_string(), "mv", path);
                self.tree_node(package.inner(), &format!("{path}.0"), depth + 1, names, out);
                self.tree_node(host.inner(), &format!("{path}.1"), depth + 1, names, out);
            }
            Node::Phase { package, host, transfers, .. } => {
                line(out, "phase".to_string(), "phase", path);
                self.tree_node(package.inner(), &format!("{path}.0"), depth + 1, names, out);
                self.tree_node(host.inner(), &format!("{path}.1"), depth + 1, names, out);
                let inner_pad = "  ".repeat(depth + 1);
                if let Some(s) = self.step(path, "phase1") {
                    out.push_str(&format!("{inner_pad}phase1  {}\n", s.render(names)));
                }
                for (k, t) in transfers.iter().enumerate() {
                    let tpath = format!("{path}.t{k}");
                    if let Some(s) = self.step(&tpath, "phase_trans") {
                        out.push_str(&format!("{inner_pad}> transfer {k}  {}\n", s.render(names)));
                    }
                    self.tree_node(t.inner(), &tpath, depth + 2, names, out);
                }
            }
            Node::Expect { node, .. } => self.tree_node(node, path, depth, names, out),
        }
    }
}

impl Node {
    /// Rule name of the last step this node records.
    fn final_rule(&self) -> &'static str {
        match self {
            Node::Lex { .. } => "lex",
            Node::Hyp { .. } => "hyp",
            Node::Mg { .. } => "mg",
            Node::Mv { .. } => "mv",
            Node::Phase { .. } => "phase",
            Node::Expect { node, .. } => node.final_rule(),
        }
    }
}

/// One line per step: path, rule, sequent.
pub fn render_steps(steps: &[Step], names: &dyn Fn(VarId) -> String) -> String {
    let width = steps.iter().map(|s| s.path.len()).max().unwrap_or(1);
    let mut out = String::new();
    for step in steps {
        out.push_str(&format!("{:<width$}  {:<11}  {}", step.path, step.rule, step.sequent.render(names)));
        if let Some(internal) = step.internal.as_ref().filter(|i| !i.is_empty()) {
            let listed: Vec<String> = internal.iter().map(|v| names(*v)).collect();
            out.push_str(&format!("   internal {{{}}}", listed.join(", ")));
        }
        out.push('\n');
    }
    out
}

impl CheckError {
    pub fn report(&self) -> String {
        let names = |v: VarId| self.aliases.get(&v).cloned().unwrap_or_else(|| v.to_string());
        let mut out = render_steps(&self.steps, &names);
        out.push_str(&format!("error at {} ({}): {}", self.path, self.rule, self.kind.name()));
        match &self.kind {
            CheckErrorKind::Rule(RuleError::PicViolation { residual }) => {
                let listed: Vec<String> =
                    residual.iter().map(|h| format!("{}:{}", names(h.var), h.formula)).collect();
                out.push_str(&format!(": residual hypotheses {}\n", listed.join(", ")));
            }
            other => out.push_str(&format!(": {other}\n")),
        }
        out
    }
}

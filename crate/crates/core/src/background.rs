//! Hypothesis contexts: series-parallel trees of typed variables joined by
//! commutative `,` and non-commutative `;`.
//!
//! Notation: `w:d, v:k, [x0:V ; x1:v]`. A `;` group is always bracketed, and
//! a `,` group nested inside a `;` group is parenthesized.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::{FeatureSet, Formula};
use crate::label::{default_name, VarId};

/// Phase bookkeeping attached to a hypothesis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    #[default]
    Plain,
    /// Host hypothesis left of the phase pair.
    HostSpec,
    /// Host hypothesis right of the phase pair.
    HostComp,
    /// Brought in by a phase package or transfer.
    Package,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hypothesis {
    pub var: VarId,
    pub formula: Formula,
    pub origin: Origin,
}

impl Hypothesis {
    pub fn new(var: VarId, formula: Formula) -> Self {
        Hypothesis { var, formula, origin: Origin::Plain }
    }

    /// Introduction order. Variables are allocated from one increasing
    /// counter per derivation, so the id is the stamp.
    pub fn stamp(&self) -> u32 {
        self.var.0
    }

    fn render(&self, names: &dyn Fn(VarId) -> String) -> String {
        if self.formula.is_atom() {
            format!("{}:{}", names(self.var), self.formula)
        } else {
            format!("{}:({})", names(self.var), self.formula)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Composition {
    /// `,`
    Comm,
    /// `;`
    NonComm,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Background {
    #[default]
    Empty,
    Leaf(Hypothesis),
    Comm(Box<Background>, Box<Background>),
    NonComm(Box<Background>, Box<Background>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackgroundError {
    #[error("variable {0} occurs on both sides of a composition")]
    VariableCollision(VarId),
    #[error("no {kind} pair of hypotheses typed `{first}` and `{second}`")]
    NoSuchPair { kind: &'static str, first: String, second: String },
    #[error("context syntax at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown feature `{name}` at offset {pos}")]
    UnknownFeature { name: String, pos: usize },
}

impl Background {
    pub fn leaf(h: Hypothesis) -> Self {
        Background::Leaf(h)
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Background::Empty)
    }

    /// Hypotheses in left-to-right order.
    pub fn leaves(&self) -> Vec<&Hypothesis> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Hypothesis>) {
        match self {
            Background::Empty => {}
            Background::Leaf(h) => out.push(h),
            Background::Comm(a, b) | Background::NonComm(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.leaves().into_iter().map(|h| h.var).collect()
    }

    pub fn len(&self) -> usize {
        match self {
            Background::Empty => 0,
            Background::Leaf(_) => 1,
            Background::Comm(a, b) | Background::NonComm(a, b) => a.len() + b.len(),
        }
    }

    pub fn find(&self, var: VarId) -> Option<&Hypothesis> {
        self.leaves().into_iter().find(|h| h.var == var)
    }

    /// Composite node with `Empty` as a two-sided unit. Fails when the two sides share a variable.
    pub fn compose(kind: Composition, left: Background, right: Background) -> Result<Background, BackgroundError> {
        let lv = left.vars();
        if let Some(v) = right.leaves().into_iter().map(|h| h.var).find(|v| lv.contains(v)) {
            return Err(BackgroundError::VariableCollision(v));
        }
        Ok(join(kind, left, right))
    }

    /// Removes `Empty` children everywhere.
    pub fn normalize(self) -> Background {
        match self {
            Background::Comm(a, b) => join(Composition::Comm, a.normalize(), b.normalize()),
            Background::NonComm(a, b) => join(Composition::NonComm, a.normalize(), b.normalize()),
            other => other,
        }
    }

    /// Rewrites every hypothesis through `f`, keeping the shape.
    pub fn map_hypotheses(&self, f: &dyn Fn(&Hypothesis) -> Hypothesis) -> Background {
        match self {
            Background::Empty => Background::Empty,
            Background::Leaf(h) => Background::Leaf(f(h)),
            Background::Comm(a, b) => {
                Background::Comm(Box::new(a.map_hypotheses(f)), Box::new(b.map_hypotheses(f)))
            }
            Background::NonComm(a, b) => {
                Background::NonComm(Box::new(a.map_hypotheses(f)), Box::new(b.map_hypotheses(f)))
            }
        }
    }

    pub fn render(&self, names: &dyn Fn(VarId) -> String) -> String {
        let mut out = String::new();
        self.write(&mut out, None, &|h| h.render(names));
        out
    }

    /// Rendering used in lexicon files: feature atoms only, wrapped in brackets.
    pub fn render_context(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, None, &|h| {
            if h.formula.is_atom() {
                h.formula.to_string()
            } else {
                format!("({})", h.formula)
            }
        });
        if matches!(self, Background::NonComm(..)) {
            out
        } else {
            format!("[{out}]")
        }
    }

    fn write(&self, out: &mut String, parent: Option<Composition>, leaf: &dyn Fn(&Hypothesis) -> String) {
        match self {
            Background::Empty => {}
            Background::Leaf(h) => out.push_str(&leaf(h)),
            Background::Comm(a, b) => {
                let paren = parent == Some(Composition::NonComm);
                if paren {
                    out.push('(');
                }
                a.write(out, Some(Composition::Comm), leaf);
                out.push_str(", ");
                b.write(out, Some(Composition::Comm), leaf);
                if paren {
                    out.push(')');
                }
            }
            Background::NonComm(a, b) => {
                let bracket = parent != Some(Composition::NonComm);
                if bracket {
                    out.push('[');
                }
                a.write(out, Some(Composition::NonComm), leaf);
                out.push_str(" ; ");
                b.write(out, Some(Composition::NonComm), leaf);
                if bracket {
                    out.push(']');
                }
            }
        }
    }

    /// Finds the newest pair `(x:first, y:second)` of sibling hypotheses under
    /// a node of the requested kind and returns it with the pair cut out.
    ///
    /// Members of a maximal `,` group are all siblings of one another, in
    /// either orientation. Within a maximal `;` group only consecutive members
    /// in order qualify. "Newest" maximizes the larger stamp of the pair, then
    /// the smaller one.
    pub fn find_product_pair(
        &self,
        first: &Formula,
        second: &Formula,
        kind: Composition,
    ) -> Result<PairMatch, BackgroundError> {
        let mut groups = Vec::new();
        collect_groups(self, kind, &mut Vec::new(), &mut 0, &mut groups);

        let mut candidates: Vec<(&Member<'_>, &Member<'_>)> = Vec::new();
        for group in &groups {
            match kind {
                Composition::Comm => {
                    let leaves: Vec<&Member<'_>> = group.iter().flatten().collect();
                    for (i, x) in leaves.iter().enumerate() {
                        for (j, y) in leaves.iter().enumerate() {
                            if i != j {
                                candidates.push((x, y));
                            }
                        }
                    }
                }
                Composition::NonComm => {
                    for w in group.windows(2) {
                        if let [Some(x), Some(y)] = w {
                            candidates.push((x, y));
                        }
                    }
                }
            }
        }
        let best = candidates
            .into_iter()
            .filter(|(x, y)| x.hyp.formula == *first && y.hyp.formula == *second)
            .max_by_key(|(x, y)| {
                let (a, b) = (x.hyp.stamp(), y.hyp.stamp());
                (a.max(b), a.min(b))
            });

        let Some((x, y)) = best else {
            return Err(BackgroundError::NoSuchPair {
                kind: match kind {
                    Composition::Comm => "`,`",
                    Composition::NonComm => "`;`",
                },
                first: first.to_string(),
                second: second.to_string(),
            });
        };
        let (earlier, later) = if x.order < y.order { (x, y) } else { (y, x) };
        let erased = replace_at(self, &later.path, Background::Empty);
        let leaves = self.leaves();
        let context = Context::build(&erased, &earlier.path);
        Ok(PairMatch {
            x: x.hyp.clone(),
            y: y.hyp.clone(),
            context,
            before: leaves[..earlier.order].iter().map(|h| h.var).collect(),
            after: leaves[later.order + 1..].iter().map(|h| h.var).collect(),
        })
    }
}

fn join(kind: Composition, left: Background, right: Background) -> Background {
    match (left, right) {
        (Background::Empty, r) => r,
        (l, Background::Empty) => l,
        (l, r) => match kind {
            Composition::Comm => Background::Comm(Box::new(l), Box::new(r)),
            Composition::NonComm => Background::NonComm(Box::new(l), Box::new(r)),
        },
    }
}

/// `weaker ⊏ stronger`: `weaker` is `stronger` with zero or more `;` nodes relaxed to `,`.
pub fn entropy_leq(weaker: &Background, stronger: &Background) -> bool {
    match (weaker, stronger) {
        (Background::Empty, Background::Empty) => true,
        (Background::Leaf(a), Background::Leaf(b)) => a == b,
        (Background::Comm(a1, b1), Background::Comm(a2, b2))
        | (Background::NonComm(a1, b1), Background::NonComm(a2, b2))
        | (Background::Comm(a1, b1), Background::NonComm(a2, b2)) => {
            entropy_leq(a1, a2) && entropy_leq(b1, b2)
        }
        _ => false,
    }
}

#[derive(Clone)]
struct Member<'a> {
    hyp: &'a Hypothesis,
    path: Vec<bool>,
    /// Index in the whole background's leaf order.
    order: usize,
}

fn is_group(node: &Background, kind: Composition) -> bool {
    matches!(
        (node, kind),
        (Background::Comm(..), Composition::Comm) | (Background::NonComm(..), Composition::NonComm)
    )
}

/// Collects every maximal group of `kind`. A group lists its members in
/// order; `None` stands for a member that is not a single hypothesis.
fn collect_groups<'a>(
    node: &'a Background,
    kind: Composition,
    path: &mut Vec<bool>,
    leaf_index: &mut usize,
    groups: &mut Vec<Vec<Option<Member<'a>>>>,
) {
    match node {
        Background::Empty => {}
        Background::Leaf(_) => *leaf_index += 1,
        _ if is_group(node, kind) => {
            let mut members = Vec::new();
            gather(node, kind, path, leaf_index, &mut members, groups);
            groups.push(members);
        }
        Background::Comm(a, b) | Background::NonComm(a, b) => {
            for (side, child) in [(false, a), (true, b)] {
                path.push(side);
                collect_groups(child, kind, path, leaf_index, groups);
                path.pop();
            }
        }
    }
}

fn gather<'a>(
    node: &'a Background,
    kind: Composition,
    path: &mut Vec<bool>,
    leaf_index: &mut usize,
    members: &mut Vec<Option<Member<'a>>>,
    groups: &mut Vec<Vec<Option<Member<'a>>>>,
) {
    match node {
        Background::Empty => {}
        Background::Leaf(h) => {
            members.push(Some(Member { hyp: h, path: path.clone(), order: *leaf_index }));
            *leaf_index += 1;
        }
        Background::Comm(a, b) | Background::NonComm(a, b) if is_group(node, kind) => {
            for (side, child) in [(false, a), (true, b)] {
                path.push(side);
                gather(child, kind, path, leaf_index, members, groups);
                path.pop();
            }
        }
        _ => {
            members.push(None);
            collect_groups(node, kind, path, leaf_index, groups);
        }
    }
}

fn replace_at(node: &Background, path: &[bool], with: Background) -> Background {
    let Some((&first, rest)) = path.split_first() else {
        return with;
    };
    match node {
        Background::Comm(a, b) => {
            if first {
                Background::Comm(a.clone(), Box::new(replace_at(b, rest, with)))
            } else {
                Background::Comm(Box::new(replace_at(a, rest, with)), b.clone())
            }
        }
        Background::NonComm(a, b) => {
            if first {
                Background::NonComm(a.clone(), Box::new(replace_at(b, rest, with)))
            } else {
                Background::NonComm(Box::new(replace_at(a, rest, with)), b.clone())
            }
        }
        _ => unreachable!("path leads through a leaf"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Frame {
    kind: Composition,
    /// True when the hole is the right child.
    hole_right: bool,
    sibling: Background,
}

/// A background with one hole, produced by cutting out a hypothesis pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    /// Outermost frame first.
    frames: Vec<Frame>,
}

impl Context {
    fn build(node: &Background, path: &[bool]) -> Context {
        let mut frames = Vec::new();
        let mut cur = node;
        for &right in path {
            let (kind, a, b) = match cur {
                Background::Comm(a, b) => (Composition::Comm, a, b),
                Background::NonComm(a, b) => (Composition::NonComm, a, b),
                _ => unreachable!("path leads through a leaf"),
            };
            let (sibling, next) = if right { (a, b) } else { (b, a) };
            frames.push(Frame { kind, hole_right: right, sibling: (**sibling).clone().normalize() });
            cur = next;
        }
        Context { frames }
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.frames.iter().flat_map(|f| f.sibling.vars()).collect()
    }

    /// Plugs `with` into the hole.
    pub fn fill(&self, with: Background) -> Result<Background, BackgroundError> {
        let own = self.vars();
        if let Some(v) = with.vars().into_iter().find(|v| own.contains(v)) {
            return Err(BackgroundError::VariableCollision(v));
        }
        let mut cur = with;
        for frame in self.frames.iter().rev() {
            cur = if frame.hole_right {
                join(frame.kind, frame.sibling.clone(), cur)
            } else {
                join(frame.kind, cur, frame.sibling.clone())
            };
        }
        Ok(cur)
    }

    pub fn render(&self, names: &dyn Fn(VarId) -> String) -> String {
        let marker = Hypothesis::new(VarId(u32::MAX), Formula::Atom(crate::formula::Feature::new(
            "\u{25fb}",
            crate::formula::FeatureClass::P1,
        )));
        let filled = self.fill(Background::Leaf(marker)).expect("marker variable is unused");
        filled.render(names).replace(&format!("{}:\u{25fb}", names(VarId(u32::MAX))), "\u{25fb}")
    }
}

/// Result of [`Background::find_product_pair`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairMatch {
    /// Hypothesis typed by the first component.
    pub x: Hypothesis,
    /// Hypothesis typed by the second component.
    pub y: Hypothesis,
    /// The background with the pair replaced by a hole at the earlier leaf's position.
    pub context: Context,
    /// Variables left of the pair, in leaf order.
    pub before: Vec<VarId>,
    /// Variables right of the pair, in leaf order.
    pub after: Vec<VarId>,
}

impl fmt::Display for Background {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&default_name))
    }
}

/// Parses a context over feature atoms such as `[V ; v]` or `[d, [V ; v]]`.
/// `,` binds looser than `;`; `( )` and `[ ]` both group. Each atom becomes a
/// hypothesis with a variable from `fresh`.
pub fn parse_context(
    text: &str,
    features: &FeatureSet,
    fresh: &mut dyn FnMut() -> VarId,
) -> Result<Background, BackgroundError> {
    let mut p = ContextParser { bytes: text.as_bytes(), text, pos: 0, features, fresh };
    let bg = p.comm()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("trailing input"));
    }
    Ok(bg)
}

struct ContextParser<'a, 'b> {
    bytes: &'a [u8],
    text: &'a str,
    pos: usize,
    features: &'a FeatureSet,
    fresh: &'b mut dyn FnMut() -> VarId,
}

impl ContextParser<'_, '_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn err(&self, msg: &str) -> BackgroundError {
        BackgroundError::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.bytes.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn comm(&mut self) -> Result<Background, BackgroundError> {
        let mut acc = self.noncomm()?;
        while self.eat(b',') {
            let rhs = self.noncomm()?;
            acc = Background::Comm(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn noncomm(&mut self) -> Result<Background, BackgroundError> {
        let mut acc = self.unit()?;
        while self.eat(b';') {
            let rhs = self.unit()?;
            acc = Background::NonComm(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn unit(&mut self) -> Result<Background, BackgroundError> {
        for (open, close) in [(b'(', b')'), (b'[', b']')] {
            if self.eat(open) {
                let inner = self.comm()?;
                if !self.eat(close) {
                    return Err(self.err(&format!("expected `{}`", close as char)));
                }
                return Ok(inner);
            }
        }
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || matches!(self.bytes[self.pos], b'_' | b'\''))
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a feature"));
        }
        let name = &self.text[start..self.pos];
        let feature = self
            .features
            .get(name)
            .ok_or_else(|| BackgroundError::UnknownFeature { name: name.to_string(), pos: start })?;
        Ok(Background::Leaf(Hypothesis::new((self.fresh)(), Formula::atom(feature))))
    }
}

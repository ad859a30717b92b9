//! Labels: (specifier, head, complement) triples of tokens.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Variable identifier. Ids double as introduction stamps: a larger id was
/// introduced later in the derivation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Phon(Arc<str>),
    Var(VarId),
}

impl Token {
    pub fn phon(text: &str) -> Self {
        assert!(!text.is_empty(), "phonological tokens are nonempty");
        Token::Phon(Arc::from(text))
    }

    pub fn as_var(&self) -> Option<VarId> {
        match self {
            Token::Var(v) => Some(*v),
            Token::Phon(_) => None,
        }
    }
}

/// Splits on whitespace into phonological tokens.
pub fn words(text: &str) -> Vec<Token> {
    text.split_whitespace().map(Token::phon).collect()
}

/// Space-separated rendering of a token sequence.
pub fn render_tokens(tokens: &[Token], names: &dyn Fn(VarId) -> String) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        match t {
            Token::Phon(p) => out.push_str(p),
            Token::Var(v) => out.push_str(&names(*v)),
        }
    }
    out
}

pub fn default_name(v: VarId) -> String {
    v.to_string()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub spec: Vec<Token>,
    pub head: Vec<Token>,
    pub comp: Vec<Token>,
}

impl Label {
    pub fn new(spec: Vec<Token>, head: Vec<Token>, comp: Vec<Token>) -> Self {
        Label { spec, head, comp }
    }

    pub fn empty() -> Self {
        Label::default()
    }

    /// `(ε, x, ε)`
    pub fn var(v: VarId) -> Self {
        Label { spec: vec![], head: vec![Token::Var(v)], comp: vec![] }
    }

    /// Phonological label from three whitespace-separated strings.
    pub fn from_words(spec: &str, head: &str, comp: &str) -> Self {
        Label::new(words(spec), words(head), words(comp))
    }

    pub fn components(&self) -> [&Vec<Token>; 3] {
        [&self.spec, &self.head, &self.comp]
    }

    fn components_mut(&mut self) -> [&mut Vec<Token>; 3] {
        [&mut self.spec, &mut self.head, &mut self.comp]
    }

    /// `spec • head • comp`
    pub fn concat(&self) -> Vec<Token> {
        let mut out = Vec::with_capacity(self.token_count());
        out.extend_from_slice(&self.spec);
        out.extend_from_slice(&self.head);
        out.extend_from_slice(&self.comp);
        out
    }

    /// The label with its head removed, `s₋ₕ`.
    pub fn without_head(&self) -> Label {
        Label { spec: self.spec.clone(), head: vec![], comp: self.comp.clone() }
    }

    pub fn token_count(&self) -> usize {
        self.spec.len() + self.head.len() + self.comp.len()
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.components().into_iter().flatten().filter_map(Token::as_var).collect()
    }

    pub fn is_ground(&self) -> bool {
        self.components().into_iter().flatten().all(|t| t.as_var().is_none())
    }

    pub fn phon_tokens(&self) -> impl Iterator<Item = &Arc<str>> {
        self.components().into_iter().flatten().filter_map(|t| match t {
            Token::Phon(p) => Some(p),
            Token::Var(_) => None,
        })
    }

    pub fn substitute(&self, sigma: &Substitution) -> Label {
        Label {
            spec: sigma.apply(&self.spec),
            head: sigma.apply(&self.head),
            comp: sigma.apply(&self.comp),
        }
    }

    /// Applies an injective variable renaming.
    pub fn rename(&self, rho: &BTreeMap<VarId, VarId>) -> Result<Label, LabelError> {
        check_injective(rho)?;
        Ok(self.rename_unchecked(&|v| rho.get(&v).copied().unwrap_or(v)))
    }

    pub(crate) fn rename_unchecked(&self, map: &dyn Fn(VarId) -> VarId) -> Label {
        let mut out = self.clone();
        for comp in out.components_mut() {
            for t in comp.iter_mut() {
                if let Token::Var(v) = t {
                    *v = map(*v);
                }
            }
        }
        out
    }

    pub fn render(&self, names: &dyn Fn(VarId) -> String) -> String {
        let part = |c: &[Token]| {
            if c.is_empty() {
                "_".to_string()
            } else {
                render_tokens(c, names)
            }
        };
        format!("({} | {} | {})", part(&self.spec), part(&self.head), part(&self.comp))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&default_name))
    }
}

fn check_injective(rho: &BTreeMap<VarId, VarId>) -> Result<(), LabelError> {
    let mut seen = BTreeSet::new();
    for (from, to) in rho {
        if !seen.insert(*to) {
            return Err(LabelError::NotInjective { target: *to, from: *from });
        }
    }
    Ok(())
}

/// True iff some renaming `ρ` gives `a.ρ = b`.
pub fn equal_mod_renaming(a: &Label, b: &Label) -> bool {
    let mut fwd = BTreeMap::new();
    let mut back = BTreeMap::new();
    a.components().into_iter().zip(b.components()).all(|(x, y)| {
        tokens_match_under_renaming(x, y, &mut fwd, &mut back)
    })
}

/// Same as [`equal_mod_renaming`] for token sequences.
pub fn sequences_equal_mod_renaming(a: &[Token], b: &[Token]) -> bool {
    tokens_match_under_renaming(a, b, &mut BTreeMap::new(), &mut BTreeMap::new())
}

fn tokens_match_under_renaming(
    a: &[Token],
    b: &[Token],
    fwd: &mut BTreeMap<VarId, VarId>,
    back: &mut BTreeMap<VarId, VarId>,
) -> bool {
    if a.len() != b.len() {
        return false;
    }
    for (x, y) in a.iter().zip(b) {
        match (x, y) {
            (Token::Phon(p), Token::Phon(q)) if p == q => {}
            (Token::Var(u), Token::Var(w)) => {
                if *fwd.entry(*u).or_insert(*w) != *w || *back.entry(*w).or_insert(*u) != *u {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("renaming is not injective: {from} and another variable both map to {target}")]
    NotInjective { target: VarId, from: VarId },
    #[error("substitution maps {0} to a sequence containing itself")]
    SelfReference(VarId),
    #[error("label syntax: {0}")]
    Syntax(String),
}

/// Finite partial map from variables to token sequences.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<VarId, Vec<Token>>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, Vec<Token>)>) -> Result<Self, LabelError> {
        let mut s = Substitution::new();
        for (v, image) in pairs {
            s.insert(v, image)?;
        }
        Ok(s)
    }

    pub fn insert(&mut self, v: VarId, image: Vec<Token>) -> Result<(), LabelError> {
        if image.contains(&Token::Var(v)) {
            return Err(LabelError::SelfReference(v));
        }
        self.map.insert(v, image);
        Ok(())
    }

    pub fn get(&self, v: VarId) -> Option<&[Token]> {
        self.map.get(&v).map(Vec::as_slice)
    }

    pub fn domain(&self) -> impl Iterator<Item = VarId> + '_ {
        self.map.keys().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Simultaneous substitution on a token sequence.
    pub fn apply(&self, tokens: &[Token]) -> Vec<Token> {
        let mut out = Vec::with_capacity(tokens.len());
        for t in tokens {
            match t {
                Token::Var(v) => match self.map.get(v) {
                    Some(image) => out.extend_from_slice(image),
                    None => out.push(t.clone()),
                },
                Token::Phon(_) => out.push(t.clone()),
            }
        }
        out
    }

    /// `self` then `then`: `s.(compose) = (s.self).then`.
    pub fn compose(&self, then: &Substitution) -> Substitution {
        let mut map: BTreeMap<VarId, Vec<Token>> =
            self.map.iter().map(|(v, img)| (*v, then.apply(img))).collect();
        for (v, img) in &then.map {
            map.entry(*v).or_insert_with(|| img.clone());
        }
        Substitution { map }
    }
}

/// Parses `(spec | head | comp)`. `_` and `eps` denote an empty component and
/// `-` is a silent token. Identifiers for which `resolve` returns a variable
/// become variable tokens.
pub fn parse_label(text: &str, resolve: &dyn Fn(&str) -> Option<VarId>) -> Result<Label, LabelError> {
    let t = text.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| LabelError::Syntax(format!("expected `( spec | head | comp )`, got `{t}`")))?;
    let parts: Vec<&str> = inner.split('|').collect();
    if parts.len() != 3 {
        return Err(LabelError::Syntax(format!(
            "a label has 3 components separated by `|`, found {}",
            parts.len()
        )));
    }
    let component = |s: &str| -> Result<Vec<Token>, LabelError> {
        let mut out = Vec::new();
        for w in s.split_whitespace() {
            match w {
                "_" | "eps" | "-" => {}
                _ if w.contains(['(', ')', '|', '[', ']']) => {
                    return Err(LabelError::Syntax(format!("bad token `{w}`")))
                }
                _ => out.push(match resolve(w) {
                    Some(v) => Token::Var(v),
                    None => Token::phon(w),
                }),
            }
        }
        Ok(out)
    };
    Ok(Label::new(component(parts[0])?, component(parts[1])?, component(parts[2])?))
}

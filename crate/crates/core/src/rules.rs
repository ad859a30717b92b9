//! The MCG rules over labelled sequents: lexical axioms, hypotheses, merge
//! (plain and head movement), move, and phases split into substitution,
//! transfer and completion.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::background::{Background, BackgroundError, Composition, Hypothesis, Origin};
use crate::formula::{Annotation, FeatureClass, Formula};
use crate::label::{default_name, Label, Substitution, Token, VarId};

/// `background ⊢ label : formula`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub background: Background,
    pub label: Label,
    pub formula: Formula,
}

impl Sequent {
    pub fn render(&self, names: &dyn Fn(VarId) -> String) -> String {
        let bg = self.background.render(names);
        let sep = if bg.is_empty() { "" } else { " " };
        format!("{bg}{sep}|- {} : {}", self.label.render(names), self.formula)
    }

    /// Label variables not bound by the background; empty for well-formed sequents.
    pub fn unbound_label_vars(&self) -> BTreeSet<VarId> {
        let bg = self.background.vars();
        self.label.vars().into_iter().filter(|v| !bg.contains(v)).collect()
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&default_name))
    }
}

/// A lexicon entry. `context` is a template whose variables are replaced by
/// fresh ones on every use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexicalItem {
    pub name: String,
    pub context: Background,
    pub label: Label,
    pub formula: Formula,
}

impl LexicalItem {
    pub fn is_phase_item(&self) -> bool {
        !self.context.is_empty()
    }
}

/// Fresh variable supply; one per derivation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Fresh {
    next: u32,
}

impl Fresh {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(next: u32) -> Self {
        Fresh { next }
    }

    pub fn next_var(&mut self) -> VarId {
        let v = VarId(self.next);
        self.next += 1;
        v
    }

    /// Number of variables handed out so far.
    pub fn issued(&self) -> u32 {
        self.next
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PicMode {
    /// Every phase-internal hypothesis must be discharged.
    #[default]
    Strict,
    /// Only host-complement hypotheses must be discharged.
    Lenient,
}

impl fmt::Display for PicMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PicMode::Strict => "strict",
            PicMode::Lenient => "lenient",
        })
    }
}

/// A phase between its substitution step and its completion.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhaseState {
    pub host: Sequent,
    /// Phase-internal hypotheses still in `host.background`.
    pub internal: BTreeSet<VarId>,
    pub annotation: Annotation,
}

impl PhaseState {
    pub fn internal_hypotheses(&self) -> Vec<Hypothesis> {
        self.host
            .background
            .leaves()
            .into_iter()
            .filter(|h| self.internal.contains(&h.var))
            .cloned()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("formula mismatch: {0}")]
    FormulaMismatch(String),
    #[error("{0}")]
    NoSuchPair(String),
    #[error("variable collision on {0}")]
    VariableCollision(VarId),
    #[error("phase impenetrability: {} hypothes{} left inside the phase", residual.len(), if residual.len() == 1 { "is" } else { "es" })]
    PicViolation { residual: Vec<Hypothesis> },
    #[error("feature class violation: {0}")]
    FeatureClassViolation(String),
    #[error("`{0}` cannot be a hypothesis: only atoms and (x)-chains can")]
    NotAHypothesisFormula(String),
    #[error("annotation {0:?} has no defined semantics")]
    UnsupportedAnnotation(Annotation),
}

impl RuleError {
    /// Short class name used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            RuleError::FormulaMismatch(_) => "FormulaMismatch",
            RuleError::NoSuchPair(_) => "NoSuchPair",
            RuleError::VariableCollision(_) => "VariableCollision",
            RuleError::PicViolation { .. } => "PICViolation",
            RuleError::FeatureClassViolation(_) => "FeatureClassViolation",
            RuleError::NotAHypothesisFormula(_) => "FormulaMismatch",
            RuleError::UnsupportedAnnotation(_) => "FormulaMismatch",
        }
    }
}

impl From<BackgroundError> for RuleError {
    fn from(e: BackgroundError) -> Self {
        match e {
            BackgroundError::VariableCollision(v) => RuleError::VariableCollision(v),
            other => RuleError::NoSuchPair(other.to_string()),
        }
    }
}

fn cat(parts: &[&[Token]]) -> Vec<Token> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

fn check_disjoint_labels(a: &Label, b: &Label) -> Result<(), RuleError> {
    let av = a.vars();
    match b.vars().into_iter().find(|v| av.contains(v)) {
        Some(v) => Err(RuleError::VariableCollision(v)),
        None => Ok(()),
    }
}

/// `context ⊢ label : formula` for a lexical entry, with fresh context variables.
pub fn lex(item: &LexicalItem, fresh: &mut Fresh) -> Sequent {
    let mut renamed = Vec::new();
    for h in item.context.leaves() {
        renamed.push((h.var, fresh.next_var()));
    }
    let background = item.context.map_hypotheses(&|h| Hypothesis {
        var: renamed.iter().find(|(from, _)| *from == h.var).map_or(h.var, |(_, to)| *to),
        formula: h.formula.clone(),
        origin: Origin::Plain,
    });
    Sequent { background, label: item.label.clone(), formula: item.formula.clone() }
}

/// `x:A ⊢ (ε, x, ε) : A` with a fresh `x`.
pub fn hyp(formula: &Formula, fresh: &mut Fresh) -> Result<Sequent, RuleError> {
    if !formula.is_tensor_chain() {
        return Err(RuleError::NotAHypothesisFormula(formula.to_string()));
    }
    let x = fresh.next_var();
    Ok(Sequent {
        background: Background::Leaf(Hypothesis::new(x, formula.clone())),
        label: Label::var(x),
        formula: formula.clone(),
    })
}

/// Implication elimination bundled with entropy on the new top node.
pub fn merge(trigger: &Sequent, arg: &Sequent) -> Result<Sequent, RuleError> {
    let (result, expected, ann, rightward) = match &trigger.formula {
        Formula::Right { result, arg, ann } => (result, arg, *ann, true),
        Formula::Left { arg, result, ann } => (result, arg, *ann, false),
        other => {
            return Err(RuleError::FormulaMismatch(format!("trigger `{other}` is not an implication")))
        }
    };
    if **expected != arg.formula {
        return Err(RuleError::FormulaMismatch(format!(
            "trigger expects `{expected}`, argument is `{}`",
            arg.formula
        )));
    }
    if ann.is_affix() {
        return Err(RuleError::UnsupportedAnnotation(ann));
    }
    check_disjoint_labels(&trigger.label, &arg.label)?;
    let r = &trigger.label;
    let s = &arg.label;
    let label = match (rightward, ann) {
        (true, Annotation::None) => Label::new(r.spec.clone(), r.head.clone(), cat(&[&r.comp, &s.concat()])),
        (false, Annotation::None) => Label::new(cat(&[&s.concat(), &r.spec]), r.head.clone(), r.comp.clone()),
        (true, Annotation::HeadLeft) => Label::new(
            r.spec.clone(),
            cat(&[&r.head, &s.head]),
            cat(&[&r.comp, &s.without_head().concat()]),
        ),
        (true, Annotation::HeadRight) => Label::new(
            r.spec.clone(),
            cat(&[&s.head, &r.head]),
            cat(&[&r.comp, &s.without_head().concat()]),
        ),
        (false, Annotation::HeadRight) => Label::new(
            cat(&[&s.without_head().concat(), &r.spec]),
            cat(&[&s.head, &r.head]),
            r.comp.clone(),
        ),
        (false, Annotation::HeadLeft) => Label::new(
            cat(&[&s.without_head().concat(), &r.spec]),
            cat(&[&r.head, &s.head]),
            r.comp.clone(),
        ),
        (_, other) => return Err(RuleError::UnsupportedAnnotation(other)),
    };
    let background = if rightward {
        Background::compose(Composition::Comm, trigger.background.clone(), arg.background.clone())?
    } else {
        Background::compose(Composition::Comm, arg.background.clone(), trigger.background.clone())?
    };
    Ok(Sequent { background, label, formula: (**result).clone() })
}

fn split_product(formula: &Formula) -> Result<(&Formula, &Formula), RuleError> {
    match formula {
        Formula::CommProduct { left, right, .. } => Ok((left, right)),
        other => Err(RuleError::FormulaMismatch(format!("moved phrase `{other}` is not a (x)-product"))),
    }
}

/// Discharges the newest `(x:A, y:B)` pair of `host` with a phrase of type `A ⊗ B`.
pub fn mv(package: &Sequent, host: &Sequent) -> Result<Sequent, RuleError> {
    Ok(mv_with_pair(package, host)?.0)
}

fn mv_with_pair(package: &Sequent, host: &Sequent) -> Result<(Sequent, VarId, VarId), RuleError> {
    let (a, b) = split_product(&package.formula)?;
    match a.as_atom() {
        Some(feat) if feat.class == FeatureClass::P2 => {}
        _ => {
            return Err(RuleError::FeatureClassViolation(format!(
                "the first component `{a}` of a moved phrase must be a P2 feature"
            )))
        }
    }
    check_disjoint_labels(&package.label, &host.label)?;
    let pair = host.background.find_product_pair(a, b, Composition::Comm)?;
    let background = pair.context.fill(package.background.clone())?;
    let sigma = Substitution::from_pairs([(pair.x.var, package.label.concat()), (pair.y.var, Vec::new())])
        .map_err(|_| RuleError::VariableCollision(pair.x.var))?;
    let label = host.label.substitute(&sigma);
    Ok((Sequent { background, label, formula: host.formula.clone() }, pair.x.var, pair.y.var))
}

/// First stage of a phase: `⊙` elimination of `package : X ⊙ Y` against an `X ; Y` pair of `host`.
pub fn phase_substitute(package: &Sequent, host: &Sequent) -> Result<PhaseState, RuleError> {
    let (x, y, ann) = match &package.formula {
        Formula::NonCommProduct { left, right, ann } => (left, right, *ann),
        other => {
            return Err(RuleError::FormulaMismatch(format!("phase package `{other}` is not a (.)-product")))
        }
    };
    if ann.is_affix() {
        return Err(RuleError::UnsupportedAnnotation(ann));
    }
    check_disjoint_labels(&package.label, &host.label)?;
    let pair = host.background.find_product_pair(x, y, Composition::NonComm)?;

    let before: BTreeSet<VarId> = pair.before.iter().copied().collect();
    let after: BTreeSet<VarId> = pair.after.iter().copied().collect();
    let marked_host = host.background.map_hypotheses(&|h| {
        let origin = if before.contains(&h.var) {
            Origin::HostSpec
        } else if after.contains(&h.var) {
            Origin::HostComp
        } else {
            h.origin
        };
        Hypothesis { origin, ..h.clone() }
    });
    let marked_package = package.background.map_hypotheses(&|h| Hypothesis { origin: Origin::Package, ..h.clone() });
    // the NonComm pair keeps its position, so the cut computed on the unmarked tree still applies
    let context = marked_host.find_product_pair(x, y, Composition::NonComm)?.context;
    let background = context.fill(marked_package)?;

    let (r, s) = (&host.label, &package.label);
    let spec = cat(&[&r.spec, &s.spec]);
    let label = match ann {
        Annotation::None => Label::new(spec, r.head.clone(), cat(&[&s.head, &s.comp, &r.comp])),
        Annotation::HeadLeft => Label::new(spec, cat(&[&s.head, &r.head]), cat(&[&s.comp, &r.comp])),
        Annotation::HeadRight => Label::new(spec, cat(&[&r.head, &s.head]), cat(&[&s.comp, &r.comp])),
        other => return Err(RuleError::UnsupportedAnnotation(other)),
    };
    let mut internal: BTreeSet<VarId> = package.background.vars();
    internal.extend(after);
    Ok(PhaseState { host: Sequent { background, label, formula: host.formula.clone() }, internal, annotation: ann })
}

/// One move inside a phase. Hypotheses the package brings in are marked
/// [`Origin::Package`] and stay accessible outside the phase.
pub fn phase_transfer(state: &PhaseState, package: &Sequent) -> Result<PhaseState, RuleError> {
    let marked = Sequent {
        background: package.background.map_hypotheses(&|h| Hypothesis { origin: Origin::Package, ..h.clone() }),
        ..package.clone()
    };
    let (host, x, y) = mv_with_pair(&marked, &state.host)?;
    let mut internal = state.internal.clone();
    internal.remove(&x);
    internal.remove(&y);
    Ok(PhaseState { host, internal, annotation: state.annotation })
}

/// Closes a phase, enforcing the phase impenetrability condition.
pub fn phase_complete(state: &PhaseState, mode: PicMode) -> Result<Sequent, RuleError> {
    let residual: Vec<Hypothesis> = state
        .internal_hypotheses()
        .into_iter()
        .filter(|h| mode == PicMode::Strict || h.origin == Origin::HostComp)
        .collect();
    if !residual.is_empty() {
        return Err(RuleError::PicViolation { residual });
    }
    Ok(state.host.clone())
}

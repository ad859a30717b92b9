//! Bounded bottom-up proof search.
//!
//! Items are sequents (or open phases) with canonically numbered variables.
//! Combining two items shifts the second operand past the first one's
//! variables, which is exactly the numbering a replay of the emitted script
//! produces, so the newest-pair choices made here are the ones the checker
//! makes.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::rc::Rc;
use std::sync::Arc;

use thiserror::Error;

use crate::background::Hypothesis;
use crate::derivation::{check_with, yield_string, CheckOptions, DerivationScript, Node};
use crate::formula::{FeatureClass, Formula};
use crate::label::{Label, Token, VarId};
use crate::lexicon::Lexicon;
use crate::rules::{self, Fresh, PhaseState, PicMode, Sequent};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    /// Hypothesis axioms per derivation.
    pub max_hypotheses: usize,
    /// Height of the derivation tree.
    pub max_depth: usize,
    /// Distinct items kept; reaching it stops the search.
    pub max_items: usize,
    pub max_results: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { max_hypotheses: 8, max_depth: 40, max_items: 100_000, max_results: 10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub bounds: SearchBounds,
    pub pic: PicMode,
    /// Cyclic-move hypotheses transferred per phase.
    pub max_cyclic_per_phase: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { bounds: SearchBounds::default(), pic: PicMode::Strict, max_cyclic_per_phase: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub scripts: Vec<DerivationScript>,
    /// False when the item cap stopped the search early.
    pub exhausted: bool,
    pub items: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("bound `{0}` must be positive")]
    ZeroBound(&'static str),
    #[error("`{0}` is not produced by any lexical item")]
    UnknownToken(String),
    #[error("the target is empty")]
    EmptyTarget,
}

/// One way an item was derived, by the ids of its premises.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Edge {
    Lex { name: String, index: usize },
    Hyp(Formula),
    Mg { trigger: usize, arg: usize },
    Mv { package: usize, host: usize },
    Phase1 { package: usize, host: usize },
    Transfer { open: usize, package: usize },
    Complete(usize),
}

/// A derivation tree unfolded from the edges.
#[derive(Debug)]
enum Witness {
    Lex { name: String, index: usize },
    Hyp(Formula),
    Mg(Rc<Witness>, Rc<Witness>),
    Mv(Rc<Witness>, Rc<Witness>),
    Phase { package: Rc<Witness>, host: Rc<Witness>, transfers: Vec<Rc<Witness>> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum State {
    Seq(Sequent),
    Open { state: PhaseState, cyclic: usize },
}

#[derive(Clone, Debug)]
struct Item {
    state: State,
    /// Variables numbered 0..vars.
    vars: u32,
    hyps: usize,
    depth: usize,
    /// A bare ⊗-chain hypothesis, usable only as a transfer package.
    cyclic_hyp: bool,
    edges: Vec<Edge>,
}

impl Item {
    fn seq(&self) -> Option<&Sequent> {
        match &self.state {
            State::Seq(s) => Some(s),
            State::Open { .. } => None,
        }
    }
}

fn shift_var(v: VarId, by: u32) -> VarId {
    VarId(v.0 + by)
}

fn map_sequent(s: &Sequent, f: &dyn Fn(VarId) -> VarId) -> Sequent {
    Sequent {
        background: s.background.map_hypotheses(&|h| Hypothesis { var: f(h.var), ..h.clone() }),
        label: s.label.rename_unchecked(f),
        formula: s.formula.clone(),
    }
}

fn shifted(s: &Sequent, by: u32) -> Sequent {
    if by == 0 {
        return s.clone();
    }
    map_sequent(s, &|v| shift_var(v, by))
}

/// Renumbers variables 0.. in increasing order.
fn canonical(state: State) -> (State, u32) {
    let host = match &state {
        State::Seq(s) => s,
        State::Open { state, .. } => &state.host,
    };
    let order: BTreeMap<VarId, VarId> =
        host.background.vars().into_iter().enumerate().map(|(i, v)| (v, VarId(i as u32))).collect();
    let n = order.len() as u32;
    let f = |v: VarId| order.get(&v).copied().unwrap_or(v);
    let out = match &state {
        State::Seq(s) => State::Seq(map_sequent(s, &f)),
        State::Open { state: p, cyclic } => State::Open {
            state: PhaseState {
                host: map_sequent(&p.host, &f),
                internal: p.internal.iter().map(|v| f(*v)).collect(),
                annotation: p.annotation,
            },
            cyclic: *cyclic,
        },
    };
    (out, n)
}

type Multiset = BTreeMap<Arc<str>, usize>;

type Memo = HashMap<(usize, usize), Rc<Vec<(Rc<Witness>, usize)>>>;

fn multiset<'a>(tokens: impl Iterator<Item = &'a Arc<str>>) -> Multiset {
    let mut m = Multiset::new();
    for t in tokens {
        *m.entry(t.clone()).or_default() += 1;
    }
    m
}

fn fits(label: &Label, target: &Multiset) -> bool {
    multiset(label.phon_tokens()).iter().all(|(t, n)| target.get(t).is_some_and(|have| n <= have))
}

/// Atoms worth hypothesizing and ⊗-chains usable for cyclic moves.
fn hypothesis_formulas(lexicon: &Lexicon) -> (Vec<Formula>, Vec<Formula>) {
    fn walk(f: &Formula, args: &mut BTreeSet<Formula>, comps: &mut BTreeSet<Formula>, chains: &mut BTreeSet<Formula>) {
        match f {
            Formula::Atom(_) => {}
            Formula::Left { arg, result, .. } | Formula::Right { result, arg, .. } => {
                args.insert((**arg).clone());
                walk(arg, args, comps, chains);
                walk(result, args, comps, chains);
            }
            Formula::CommProduct { left, right, .. } => {
                comps.insert((**left).clone());
                comps.insert((**right).clone());
                if !right.is_atom() && right.is_tensor_chain() {
                    chains.insert((**right).clone());
                }
                walk(left, args, comps, chains);
                walk(right, args, comps, chains);
            }
            Formula::NonCommProduct { left, right, .. } => {
                walk(left, args, comps, chains);
                walk(right, args, comps, chains);
            }
        }
    }
    let (mut args, mut comps, mut chains) = (BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
    for item in &lexicon.items {
        walk(&item.formula, &mut args, &mut comps, &mut chains);
    }
    let atoms = args.intersection(&comps).filter(|f| f.is_atom()).cloned().collect();
    (atoms, chains.into_iter().collect())
}

struct Engine<'a> {
    lexicon: &'a Lexicon,
    options: SearchOptions,
    target: Option<Multiset>,
    items: Vec<Item>,
    index: HashMap<(State, usize), usize>,
    agenda: VecDeque<usize>,
    /// Processed items.
    chart: Vec<usize>,
    by_formula: HashMap<Formula, Vec<usize>>,
    triggers_by_arg: HashMap<Formula, Vec<usize>>,
    comm_packages: Vec<usize>,
    cyclic_packages: Vec<usize>,
    noncomm_packages: Vec<usize>,
    hosts: Vec<usize>,
    open: Vec<usize>,
    in_chart: Vec<bool>,
    capped: bool,
}

impl<'a> Engine<'a> {
    fn new(lexicon: &'a Lexicon, options: SearchOptions, target: Option<Multiset>) -> Self {
        Engine {
            lexicon,
            options,
            target,
            items: Vec::new(),
            index: HashMap::new(),
            agenda: VecDeque::new(),
            chart: Vec::new(),
            by_formula: HashMap::new(),
            triggers_by_arg: HashMap::new(),
            comm_packages: Vec::new(),
            cyclic_packages: Vec::new(),
            noncomm_packages: Vec::new(),
            hosts: Vec::new(),
            open: Vec::new(),
            in_chart: Vec::new(),
            capped: false,
        }
    }

    fn offer(&mut self, state: State, hyps: usize, depth: usize, cyclic_hyp: bool, edge: Edge) {
        let b = self.options.bounds;
        if hyps > b.max_hypotheses || depth > b.max_depth {
            return;
        }
        let label = match &state {
            State::Seq(s) => &s.label,
            State::Open { state, .. } => &state.host.label,
        };
        if let Some(target) = &self.target {
            if !fits(label, target) {
                return;
            }
        }
        let (state, vars) = canonical(state);
        let key = (state, hyps);
        if let Some(&id) = self.index.get(&key) {
            let old = &mut self.items[id];
            if !old.edges.contains(&edge) {
                old.edges.push(edge);
            }
            if depth < old.depth {
                old.depth = depth;
                if self.in_chart[id] {
                    self.agenda.push_back(id);
                }
            }
            return;
        }
        if self.items.len() >= b.max_items {
            self.capped = true;
            return;
        }
        let id = self.items.len();
        self.items.push(Item { state: key.0.clone(), vars, hyps, depth, cyclic_hyp, edges: vec![edge] });
        self.in_chart.push(false);
        self.index.insert(key, id);
        self.agenda.push_back(id);
    }

    fn seed(&mut self) {
        let lexicon = self.lexicon;
        for (pos, item) in lexicon.items.iter().enumerate() {
            let mut fresh = Fresh::new();
            let s = rules::lex(item, &mut fresh);
            let edge = Edge::Lex { name: item.name.clone(), index: lexicon.homograph_index(pos) };
            self.offer(State::Seq(s), 0, 1, false, edge);
        }
        let (atoms, chains) = hypothesis_formulas(lexicon);
        for (formula, cyclic) in atoms.into_iter().map(|f| (f, false)).chain(chains.into_iter().map(|f| (f, true))) {
            let s = rules::hyp(&formula, &mut Fresh::new()).expect("seeded hypotheses are ⊗-chains");
            self.offer(State::Seq(s), 1, 1, cyclic, Edge::Hyp(formula));
        }
    }

    fn register(&mut self, id: usize) {
        self.in_chart[id] = true;
        self.chart.push(id);
        let item = &self.items[id];
        match &item.state {
            State::Open { .. } => self.open.push(id),
            State::Seq(s) => {
                self.by_formula.entry(s.formula.clone()).or_default().push(id);
                match &s.formula {
                    Formula::Left { arg, .. } | Formula::Right { arg, .. } => {
                        self.triggers_by_arg.entry((**arg).clone()).or_default().push(id)
                    }
                    Formula::CommProduct { .. } if item.cyclic_hyp => self.cyclic_packages.push(id),
                    Formula::CommProduct { .. } if is_package(&s.formula) => self.comm_packages.push(id),
                    Formula::NonCommProduct { .. } => self.noncomm_packages.push(id),
                    _ => {}
                }
                if is_host(item) {
                    self.hosts.push(id);
                }
            }
        }
    }

    fn run(&mut self) {
        self.seed();
        while let Some(id) = self.agenda.pop_front() {
            if !self.in_chart[id] {
                self.register(id);
            }
            self.process(id);
            if self.capped {
                return;
            }
        }
    }

    fn process(&mut self, id: usize) {
        let item = self.items[id].clone();
        match &item.state {
            State::Open { .. } => {
                self.try_complete(id);
                let packages: Vec<usize> = self.comm_packages.iter().chain(&self.cyclic_packages).copied().collect();
                for p in packages {
                    self.try_transfer(id, p);
                }
            }
            State::Seq(s) => {
                if item.cyclic_hyp {
                    for o in self.open.clone() {
                        self.try_transfer(o, id);
                    }
                    return;
                }
                if let Formula::Left { arg, .. } | Formula::Right { arg, .. } = &s.formula {
                    for &j in &self.by_formula.get(arg).cloned().unwrap_or_default() {
                        self.try_merge(id, j);
                    }
                }
                for &j in &self.triggers_by_arg.get(&s.formula).cloned().unwrap_or_default() {
                    if j != id {
                        self.try_merge(j, id);
                    }
                }
                match &s.formula {
                    formula @ Formula::CommProduct { .. } if is_package(formula) => {
                        for &h in &self.hosts.clone() {
                            self.try_move(id, h);
                        }
                        for o in self.open.clone() {
                            self.try_transfer(o, id);
                        }
                    }
                    Formula::NonCommProduct { .. } => {
                        for &h in &self.hosts.clone() {
                            self.try_phase(id, h);
                        }
                    }
                    _ => {}
                }
                if is_host(&item) {
                    for &p in &self.comm_packages.clone() {
                        if p != id {
                            self.try_move(p, id);
                        }
                    }
                    for &p in &self.noncomm_packages.clone() {
                        if p != id {
                            self.try_phase(p, id);
                        }
                    }
                }
            }
        }
    }

    /// `first` replays before `second`.
    fn pair(&self, first: usize, second: usize) -> (Sequent, Sequent, &Item, &Item) {
        let (a, b) = (&self.items[first], &self.items[second]);
        (a.seq().unwrap().clone(), shifted(b.seq().unwrap(), a.vars), a, b)
    }

    fn try_merge(&mut self, trigger: usize, arg: usize) {
        if self.items[arg].cyclic_hyp {
            return;
        }
        let (t, a, ti, ai) = self.pair(trigger, arg);
        let (hyps, depth) = (ti.hyps + ai.hyps, ti.depth.max(ai.depth) + 1);
        if let Ok(s) = rules::merge(&t, &a) {
            self.offer(State::Seq(s), hyps, depth, false, Edge::Mg { trigger, arg });
        }
    }

    fn try_move(&mut self, package: usize, host: usize) {
        let (h, p, hi, pi) = self.pair(host, package);
        let (hyps, depth) = (hi.hyps + pi.hyps, hi.depth.max(pi.depth) + 1);
        if let Ok(s) = rules::mv(&p, &h) {
            self.offer(State::Seq(s), hyps, depth, false, Edge::Mv { package, host });
        }
    }

    fn try_phase(&mut self, package: usize, host: usize) {
        let (h, p, hi, pi) = self.pair(host, package);
        let (hyps, depth) = (hi.hyps + pi.hyps, hi.depth.max(pi.depth) + 1);
        if let Ok(state) = rules::phase_substitute(&p, &h) {
            self.offer(State::Open { state, cyclic: 0 }, hyps, depth, false, Edge::Phase1 { package, host });
        }
    }

    fn try_transfer(&mut self, open_id: usize, package: usize) {
        let open = self.items[open_id].clone();
        let State::Open { state, cyclic } = &open.state else { unreachable!() };
        let pi = self.items[package].clone();
        let cyclic = cyclic + usize::from(pi.cyclic_hyp);
        if cyclic > self.options.max_cyclic_per_phase {
            return;
        }
        let p = shifted(pi.seq().unwrap(), open.vars);
        let Ok(next) = rules::phase_transfer(state, &p) else { return };
        let depth = open.depth.max(pi.depth + 1);
        let edge = Edge::Transfer { open: open_id, package };
        self.offer(State::Open { state: next, cyclic }, open.hyps + pi.hyps, depth, false, edge);
    }

    fn try_complete(&mut self, open_id: usize) {
        let open = &self.items[open_id];
        let State::Open { state, .. } = &open.state else { unreachable!() };
        if let Ok(s) = rules::phase_complete(state, self.options.pic) {
            let (hyps, depth) = (open.hyps, open.depth);
            self.offer(State::Seq(s), hyps, depth, false, Edge::Complete(open_id));
        }
    }

    /// Closed items of the start category, in discovery order.
    fn successes(&self) -> Vec<(usize, Vec<Token>)> {
        let start = Formula::atom(&self.lexicon.start);
        let mut out = Vec::new();
        for (id, item) in self.items.iter().enumerate() {
            let Some(s) = item.seq() else { continue };
            if s.formula == start && s.background.is_empty() && s.label.is_ground() {
                out.push((id, s.label.concat()));
            }
        }
        out
    }

    /// Up to `cap` derivation trees of item `id` no deeper than `budget`.
    fn trees(&self, id: usize, budget: usize, cap: usize, memo: &mut Memo) -> Rc<Vec<(Rc<Witness>, usize)>> {
        if let Some(known) = memo.get(&(id, budget)) {
            return known.clone();
        }
        let mut out: Vec<(Rc<Witness>, usize)> = Vec::new();
        if budget > 0 {
            for edge in &self.items[id].edges {
                if out.len() >= cap {
                    break;
                }
                let room = cap - out.len();
                let below = budget - 1;
                match edge {
                    Edge::Lex { name, index } => {
                        out.push((Rc::new(Witness::Lex { name: name.clone(), index: *index }), 1))
                    }
                    Edge::Hyp(f) => out.push((Rc::new(Witness::Hyp(f.clone())), 1)),
                    Edge::Mg { trigger: a, arg: b } | Edge::Mv { package: a, host: b } | Edge::Phase1 { package: a, host: b } => {
                        let (xs, ys) = (self.trees(*a, below, cap, memo), self.trees(*b, below, cap, memo));
                        'pairs: for (x, dx) in xs.iter() {
                            for (y, dy) in ys.iter() {
                                if out.len() >= cap || room == 0 {
                                    break 'pairs;
                                }
                                let w = match edge {
                                    Edge::Mg { .. } => Witness::Mg(x.clone(), y.clone()),
                                    Edge::Mv { .. } => Witness::Mv(x.clone(), y.clone()),
                                    _ => Witness::Phase { package: x.clone(), host: y.clone(), transfers: Vec::new() },
                                };
                                out.push((Rc::new(w), 1 + dx.max(dy)));
                            }
                        }
                    }
                    Edge::Transfer { open, package } => {
                        let (xs, ys) = (self.trees(*open, budget, cap, memo), self.trees(*package, below, cap, memo));
                        'transfers: for (x, dx) in xs.iter() {
                            let Witness::Phase { package: wp, host: wh, transfers } = &**x else { unreachable!() };
                            for (y, dy) in ys.iter() {
                                if out.len() >= cap {
                                    break 'transfers;
                                }
                                let mut transfers = transfers.clone();
                                transfers.push(y.clone());
                                let w = Witness::Phase { package: wp.clone(), host: wh.clone(), transfers };
                                out.push((Rc::new(w), *dx.max(&(dy + 1))));
                            }
                        }
                    }
                    Edge::Complete(open) => {
                        for t in self.trees(*open, budget, cap, memo).iter() {
                            if out.len() >= cap {
                                break;
                            }
                            out.push(t.clone());
                        }
                    }
                }
            }
        }
        let out = Rc::new(out);
        memo.insert((id, budget), out.clone());
        out
    }

    /// Scripts for item `id`, at most `cap`.
    fn scripts(&self, id: usize, cap: usize) -> Vec<DerivationScript> {
        let mut memo = Memo::new();
        let trees = self.trees(id, self.options.bounds.max_depth, cap, &mut memo);
        trees.iter().map(|(w, _)| to_script(w, self.options.pic)).collect()
    }
}

/// A phrase that can discharge a `,` pair: its first component is a licensor.
fn is_package(f: &Formula) -> bool {
    matches!(f, Formula::CommProduct { left, .. } if left.as_atom().is_some_and(|a| a.class == FeatureClass::P2))
}

fn is_host(item: &Item) -> bool {
    !item.cyclic_hyp && item.seq().is_some_and(|s| !s.background.is_empty())
}

fn to_script(w: &Witness, pic: PicMode) -> DerivationScript {
    fn build(w: &Witness, next: &mut usize, pic: PicMode) -> Node {
        match w {
            Witness::Lex { name, index } => Node::lex(name, *index),
            Witness::Hyp(f) => {
                let alias = format!("h{next}");
                *next += 1;
                Node::hyp(f, &alias)
            }
            Witness::Mg(t, a) => {
                let t = build(t, next, pic);
                Node::mg(t, build(a, next, pic))
            }
            Witness::Mv(p, h) => {
                let p = build(p, next, pic);
                Node::mv(p, build(h, next, pic))
            }
            Witness::Phase { package, host, transfers } => {
                let p = build(package, next, pic);
                let h = build(host, next, pic);
                let ts = transfers.iter().map(|t| build(t, next, pic)).collect();
                let mode = if pic == PicMode::Lenient { Some(PicMode::Lenient) } else { None };
                Node::phase(p, h, ts, mode)
            }
        }
    }
    DerivationScript::new(build(w, &mut 0, pic)).expect("generated aliases are distinct")
}

fn validate(bounds: &SearchBounds) -> Result<(), SearchError> {
    let checks = [
        ("max_hypotheses", bounds.max_hypotheses),
        ("max_depth", bounds.max_depth),
        ("max_items", bounds.max_items),
        ("max_results", bounds.max_results),
    ];
    match checks.iter().find(|(_, v)| *v == 0) {
        Some((name, _)) => Err(SearchError::ZeroBound(name)),
        None => Ok(()),
    }
}

fn verified(script: &DerivationScript, lexicon: &Lexicon, pic: PicMode) -> Option<Vec<Token>> {
    let d = check_with(script, lexicon, CheckOptions { pic }).ok()?;
    yield_string(&d, &lexicon.start).ok()
}

pub fn parse(target: &[Token], lexicon: &Lexicon, bounds: SearchBounds) -> Result<SearchResult, SearchError> {
    parse_with(target, lexicon, SearchOptions { bounds, ..SearchOptions::default() })
}

pub fn parse_with(target: &[Token], lexicon: &Lexicon, options: SearchOptions) -> Result<SearchResult, SearchError> {
    validate(&options.bounds)?;
    if target.is_empty() {
        return Err(SearchError::EmptyTarget);
    }
    let alphabet = lexicon.phon_alphabet();
    let mut words = Vec::new();
    for t in target {
        match t {
            Token::Phon(w) if alphabet.contains(w) => words.push(w.clone()),
            other => return Err(SearchError::UnknownToken(format!("{other:?}"))),
        }
    }
    let mut engine = Engine::new(lexicon, options, Some(multiset(words.iter())));
    engine.run();
    let mut scripts: Vec<DerivationScript> = Vec::new();
    for (id, tokens) in engine.successes() {
        let room = options.bounds.max_results - scripts.len();
        if tokens != target || room == 0 {
            continue;
        }
        for script in engine.scripts(id, room) {
            let replayed = verified(&script, lexicon, options.pic);
            debug_assert_eq!(replayed.as_deref(), Some(target), "search emitted an unsound script");
            if replayed.as_deref() == Some(target) && !scripts.contains(&script) {
                scripts.push(script);
            }
        }
    }
    Ok(SearchResult { scripts, exhausted: !engine.capped, items: engine.items.len() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub yields: Vec<(Vec<Token>, DerivationScript)>,
    pub exhausted: bool,
}

/// Every derivable yield within `bounds`, in order of first discovery, one witness each.
pub fn enumerate_yields(lexicon: &Lexicon, bounds: SearchBounds) -> Result<Enumeration, SearchError> {
    let options = SearchOptions { bounds, ..SearchOptions::default() };
    validate(&bounds)?;
    if lexicon.items.is_empty() {
        return Ok(Enumeration { yields: Vec::new(), exhausted: true });
    }
    let mut engine = Engine::new(lexicon, options, None);
    engine.run();
    let mut seen = BTreeSet::new();
    let mut yields = Vec::new();
    for (id, tokens) in engine.successes() {
        if yields.len() >= bounds.max_results || seen.contains(&tokens) {
            continue;
        }
        let script = engine.scripts(id, 1).pop().expect("every item has a derivation within its depth");
        if verified(&script, lexicon, options.pic).as_ref() == Some(&tokens) {
            seen.insert(tokens.clone());
            yields.push((tokens, script));
        }
    }
    Ok(Enumeration { yields, exhausted: !engine.capped })
}

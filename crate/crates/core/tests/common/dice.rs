//! Random structures driven by a fixed vector of rolls, so proptest can
//! generate and replay them.

use proptest::collection::vec;
use proptest::prelude::*;

use mcgp::background::{Background, Composition, Hypothesis};
use mcgp::formula::{Feature, FeatureClass, FeatureSet, Formula};
use mcgp::label::{Label, Substitution, Token, VarId};

#[derive(Clone, Debug)]
pub struct Dice {
    rolls: Vec<u32>,
    at: usize,
}

impl Dice {
    pub fn new(rolls: Vec<u32>) -> Self {
        assert!(!rolls.is_empty());
        Dice { rolls, at: 0 }
    }

    /// Uniform-ish value in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        let lap = (self.at / self.rolls.len()) as u32;
        let r = self.rolls[self.at % self.rolls.len()] ^ lap.wrapping_mul(0x9e37_79b9);
        self.at += 1;
        r as usize % n
    }

    pub fn chance(&mut self, num: usize, den: usize) -> bool {
        self.below(den) < num
    }

    pub fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.below(xs.len())]
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            xs.swap(i, self.below(i + 1));
        }
    }
}

pub fn dice() -> impl Strategy<Value = Dice> {
    vec(any::<u32>(), 96).prop_map(Dice::new)
}

pub const WORDS: [&str; 5] = ["the", "a", "book", "read", "which"];

/// `c, d` in P1 and `k, wh` in P2.
pub fn four_features() -> FeatureSet {
    FeatureSet::from_pairs([
        ("c", FeatureClass::P1),
        ("k", FeatureClass::P2),
        ("d", FeatureClass::P1),
        ("wh", FeatureClass::P2),
    ])
}

pub fn atoms(features: &FeatureSet) -> Vec<Feature> {
    features.iter().cloned().collect()
}

pub fn formula(d: &mut Dice, atoms: &[Feature], connectives: usize) -> Formula {
    if connectives == 0 {
        return Formula::atom(d.pick(atoms));
    }
    let left = d.below(connectives);
    let a = formula(d, atoms, left);
    let b = formula(d, atoms, connectives - 1 - left);
    match d.below(4) {
        0 => Formula::left(a, b),
        1 => Formula::right(a, b),
        2 => Formula::comm(a, b),
        _ => Formula::noncomm(a, b),
    }
}

/// Tokens drawn from `vars` (repetition allowed) and [`WORDS`].
pub fn tokens(d: &mut Dice, vars: &[VarId], max_len: usize) -> Vec<Token> {
    let len = d.below(max_len + 1);
    (0..len)
        .map(|_| {
            if !vars.is_empty() && d.chance(1, 2) {
                Token::Var(*d.pick(vars))
            } else {
                Token::phon(d.pick(&WORDS))
            }
        })
        .collect()
}

/// A label whose tokens may repeat variables.
pub fn label(d: &mut Dice, vars: &[VarId]) -> Label {
    Label::new(tokens(d, vars, 4), tokens(d, vars, 3), tokens(d, vars, 4))
}

/// A label holding each of `vars` exactly once among a few words.
pub fn linear_label(d: &mut Dice, vars: &[VarId]) -> Label {
    let mut toks: Vec<Token> = vars.iter().map(|v| Token::Var(*v)).collect();
    for _ in 0..d.below(4) {
        toks.push(Token::phon(d.pick(&WORDS)));
    }
    d.shuffle(&mut toks);
    let i = d.below(toks.len() + 1);
    let j = i + d.below(toks.len() - i + 1);
    Label::new(toks[..i].to_vec(), toks[i..j].to_vec(), toks[j..].to_vec())
}

/// Random images for a random subset of `vars`; no image mentions its own variable.
pub fn substitution(d: &mut Dice, vars: &[VarId], pool: &[VarId]) -> Substitution {
    let mut sigma = Substitution::new();
    for v in vars {
        if d.chance(1, 2) {
            let others: Vec<VarId> = pool.iter().copied().filter(|w| w != v).collect();
            sigma.insert(*v, tokens(d, &others, 3)).expect("image avoids its variable");
        }
    }
    sigma
}

pub fn subset(d: &mut Dice, vars: &[VarId]) -> Vec<VarId> {
    vars.iter().copied().filter(|_| d.chance(2, 3)).collect()
}

/// Random tree over `parts` in the given order, with random `,`/`;` nodes.
pub fn tree(d: &mut Dice, parts: Vec<Background>) -> Background {
    match parts.len() {
        0 => Background::Empty,
        1 => parts.into_iter().next().unwrap(),
        n => {
            let mut parts = parts;
            let right = parts.split_off(1 + d.below(n - 1));
            let kind = if d.chance(1, 2) { Composition::Comm } else { Composition::NonComm };
            let l = tree(d, parts);
            let r = tree(d, right);
            Background::compose(kind, l, r).expect("parts have disjoint variables")
        }
    }
}

/// Fresh atomic hypotheses numbered from `first`.
pub fn hypotheses(d: &mut Dice, atoms: &[Feature], first: u32, count: usize) -> Vec<Hypothesis> {
    (0..count).map(|i| Hypothesis::new(VarId(first + i as u32), Formula::atom(d.pick(atoms)))).collect()
}

pub fn leaves(hyps: Vec<Hypothesis>) -> Vec<Background> {
    hyps.into_iter().map(Background::leaf).collect()
}

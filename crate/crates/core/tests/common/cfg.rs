//! The lexical formula language, generated from its productions:
//!
//! ```text
//! L ::= (B) / P1 | C
//! B ::= P1 \ (B) | P2 \ (B) | C | D
//! C ::= P2 (x) (C) | P1
//! D ::= P1 (.) (D) | P2 (.) (D) | P1
//! ```

use std::collections::HashSet;

use proptest::prop_assert_eq;
use proptest::test_runner::TestCaseError;

use mcgp::formula::{
    for_each_formula, validate_lexical_formula, validate_phase_formula, Feature, FeatureClass, FeatureSet, Formula,
};

use super::dice::{self, Dice};

/// Index `n` holds the words with exactly `n` connectives.
pub struct Language {
    pub lexical: Vec<HashSet<Formula>>,
    pub phase: Vec<HashSet<Formula>>,
}

impl Language {
    pub fn lexical_count(&self, n: usize) -> usize {
        self.lexical[n].len()
    }
}

fn product(xs: &[Formula], ys: &HashSet<Formula>, build: fn(Formula, Formula) -> Formula) -> Vec<Formula> {
    xs.iter().flat_map(|x| ys.iter().map(move |y| build(x.clone(), y.clone()))).collect()
}

pub fn generate(features: &FeatureSet, max: usize) -> Language {
    let all: Vec<Formula> = features.iter().map(Formula::atom).collect();
    let p1: Vec<Formula> = features.of_class(FeatureClass::P1).map(Formula::atom).collect();
    let p2: Vec<Formula> = features.of_class(FeatureClass::P2).map(Formula::atom).collect();
    let mut c: Vec<HashSet<Formula>> = Vec::new();
    let mut d: Vec<HashSet<Formula>> = Vec::new();
    let mut b: Vec<HashSet<Formula>> = Vec::new();
    let mut l: Vec<HashSet<Formula>> = Vec::new();
    for n in 0..=max {
        let (cn, dn): (HashSet<Formula>, HashSet<Formula>) = if n == 0 {
            (p1.iter().cloned().collect(), p1.iter().cloned().collect())
        } else {
            (
                product(&p2, &c[n - 1], Formula::comm).into_iter().collect(),
                product(&all, &d[n - 1], Formula::noncomm).into_iter().collect(),
            )
        };
        let mut bn: HashSet<Formula> = cn.union(&dn).cloned().collect();
        let mut ln = cn.clone();
        if n > 0 {
            bn.extend(product(&all, &b[n - 1], Formula::left));
            for prev in &b[n - 1] {
                ln.extend(p1.iter().map(|a| Formula::right(prev.clone(), a.clone())));
            }
        }
        c.push(cn);
        d.push(dn);
        b.push(bn);
        l.push(ln);
    }
    Language { lexical: l, phase: b }
}

pub struct Sweep {
    pub checked: u64,
    /// Accepted formulas per connective count.
    pub accepted: Vec<u64>,
    /// Accepted formulas per connective count, each weighted by the product of its leaves' weights.
    pub weighted: Vec<u64>,
}

/// Runs `accepts` over every formula up to `max` connectives. Every accepted
/// formula must belong to `words`; counts are returned so the caller can
/// close the other direction.
pub fn sweep(
    features: &FeatureSet,
    max: usize,
    accepts: fn(&Formula) -> bool,
    words: &[HashSet<Formula>],
    weight: impl Fn(&Feature) -> u64,
) -> Result<Sweep, String> {
    let mut out = Sweep { checked: 0, accepted: vec![0; max + 1], weighted: vec![0; max + 1] };
    let mut stray = None;
    for_each_formula(features, max, |f| {
        out.checked += 1;
        if !accepts(f) {
            return;
        }
        let n = f.size();
        if stray.is_none() && !words[n].contains(f) {
            stray = Some(f.to_string());
        }
        out.accepted[n] += 1;
        out.weighted[n] += f.atoms().into_iter().map(&weight).product::<u64>();
    })
    .map_err(|e| e.to_string())?;
    match stray {
        Some(f) => Err(format!("validator accepts `{f}`, which the grammar does not generate")),
        None => Ok(out),
    }
}

/// Agreement with the generated language, size by size: `accepted ⊆ words`
/// holds per formula inside `sweep`, so equal counts give equality.
pub fn counts_agree(sweep: &Sweep, words: &[HashSet<Formula>]) -> Result<(), String> {
    for (n, (got, want)) in sweep.accepted.iter().zip(words).enumerate() {
        if *got != want.len() as u64 {
            return Err(format!("size {n}: validator accepts {got}, grammar generates {}", want.len()));
        }
    }
    Ok(())
}

pub fn lexical_verdict(f: &Formula) -> bool {
    validate_lexical_formula(f).accepted
}

pub fn phase_verdict(f: &Formula) -> bool {
    validate_phase_formula(f).accepted
}

/// Replaces every atom by the first declared feature of its class.
pub fn project(f: &Formula, features: &FeatureSet) -> Formula {
    let rebuild = |a: &Formula, b: &Formula| (project(a, features), project(b, features));
    match f {
        Formula::Atom(feat) => Formula::atom(features.of_class(feat.class).next().expect("class is inhabited")),
        Formula::Left { arg, result, ann } => {
            let (a, r) = rebuild(arg, result);
            Formula::left(a, r).annotated(*ann)
        }
        Formula::Right { result, arg, ann } => {
            let (r, a) = rebuild(result, arg);
            Formula::right(r, a).annotated(*ann)
        }
        Formula::CommProduct { left, right, ann } => {
            let (l, r) = rebuild(left, right);
            Formula::comm(l, r).annotated(*ann)
        }
        Formula::NonCommProduct { left, right, ann } => {
            let (l, r) = rebuild(left, right);
            Formula::noncomm(l, r).annotated(*ann)
        }
    }
}

/// Verdicts depend on atoms only through their class.
pub fn class_invariance(mut d: Dice, features: &FeatureSet) -> Result<(), TestCaseError> {
    let atoms = dice::atoms(features);
    let size = d.below(7);
    let f = dice::formula(&mut d, &atoms, size);
    let p = project(&f, features);
    prop_assert_eq!(validate_lexical_formula(&f).accepted, validate_lexical_formula(&p).accepted, "{} vs {}", f, p);
    prop_assert_eq!(validate_phase_formula(&f).accepted, validate_phase_formula(&p).accepted, "{} vs {}", f, p);
    Ok(())
}

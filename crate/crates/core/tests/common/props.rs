//! Property bodies shared by the proptest suites and the acceptance runner.

use std::collections::{BTreeMap, BTreeSet};

use proptest::test_runner::TestCaseError;
use proptest::{prop_assert, prop_assert_eq};

use mcgp::background::{Background, Composition, Hypothesis};
use mcgp::formula::{Annotation, FeatureClass, Formula};
use mcgp::label::{equal_mod_renaming, Substitution, Token, VarId};
use mcgp::rules::{merge, mv, Sequent};

use super::dice::{self, Dice};

type Outcome = Result<(), TestCaseError>;

fn vars(n: u32) -> Vec<VarId> {
    (0..n).map(VarId).collect()
}

fn injective(d: &mut Dice, domain: &[VarId], room: u32) -> BTreeMap<VarId, VarId> {
    let mut targets = vars(room);
    d.shuffle(&mut targets);
    domain.iter().copied().zip(targets).collect()
}

pub fn substitution_commutes_with_concat(mut d: Dice) -> Outcome {
    let pool = vars(6);
    let l = dice::label(&mut d, &pool);
    let sigma = dice::substitution(&mut d, &pool, &pool);
    prop_assert_eq!(l.substitute(&sigma).concat(), sigma.apply(&l.concat()));
    Ok(())
}

pub fn renaming_is_an_equivalence(mut d: Dice) -> Outcome {
    let pool = vars(5);
    let a = dice::label(&mut d, &pool);
    prop_assert!(equal_mod_renaming(&a, &a));

    let b = a.rename(&injective(&mut d, &pool, 12)).expect("injective");
    prop_assert!(equal_mod_renaming(&a, &b));
    prop_assert!(equal_mod_renaming(&b, &a));
    let c = b.rename(&injective(&mut d, &vars(12), 12)).expect("injective");
    prop_assert!(equal_mod_renaming(&a, &c));
    prop_assert!(equal_mod_renaming(&c, &a));

    let e = dice::label(&mut d, &pool);
    let f = e.rename(&injective(&mut d, &pool, 8)).expect("injective");
    prop_assert_eq!(equal_mod_renaming(&a, &e), equal_mod_renaming(&e, &a));
    prop_assert_eq!(equal_mod_renaming(&a, &e), equal_mod_renaming(&a, &f));

    let present: Vec<VarId> = a.vars().into_iter().collect();
    if let [u, w, ..] = present[..] {
        let collapse = Substitution::from_pairs([(u, vec![Token::Var(w)])]).expect("u differs from w");
        prop_assert!(!equal_mod_renaming(&a, &a.substitute(&collapse)));
    }
    Ok(())
}

fn leaf_sequence(b: &Background) -> Vec<Hypothesis> {
    b.leaves().into_iter().cloned().collect()
}

fn sorted(mut tokens: Vec<Token>) -> Vec<Token> {
    tokens.sort();
    tokens
}

fn rejected(what: &str, e: impl std::fmt::Display) -> TestCaseError {
    TestCaseError::fail(format!("{what} rejected well-formed premises: {e}"))
}

pub fn merge_invariants(mut d: Dice) -> Outcome {
    let atoms = dice::atoms(&dice::four_features());
    let (m, n) = (d.below(4), d.below(4));
    let th = dice::hypotheses(&mut d, &atoms, 0, m);
    let ah = dice::hypotheses(&mut d, &atoms, m as u32, n);
    let tvars: Vec<VarId> = th.iter().map(|h| h.var).collect();
    let avars: Vec<VarId> = ah.iter().map(|h| h.var).collect();
    let tb = dice::tree(&mut d, dice::leaves(th));
    let ab = dice::tree(&mut d, dice::leaves(ah));

    let size = d.below(3);
    let expected = dice::formula(&mut d, &atoms, size);
    let size = d.below(3);
    let result = dice::formula(&mut d, &atoms, size);
    let rightward = d.chance(1, 2);
    let ann = *d.pick(&[Annotation::None, Annotation::HeadLeft, Annotation::HeadRight]);
    let formula = if rightward {
        Formula::right(result.clone(), expected.clone())
    } else {
        Formula::left(expected.clone(), result.clone())
    }
    .annotated(ann);

    let chosen = dice::subset(&mut d, &tvars);
    let trigger = Sequent { background: tb, label: dice::linear_label(&mut d, &chosen), formula };
    let chosen = dice::subset(&mut d, &avars);
    let arg = Sequent { background: ab, label: dice::linear_label(&mut d, &chosen), formula: expected };
    let out = merge(&trigger, &arg).map_err(|e| rejected("merge", e))?;

    prop_assert!(out.label.vars().is_subset(&out.background.vars()));
    let label_vars: BTreeSet<VarId> = trigger.label.vars().union(&arg.label.vars()).copied().collect();
    prop_assert_eq!(out.label.vars(), label_vars);

    let (first, second) = if rightward { (&trigger, &arg) } else { (&arg, &trigger) };
    let mut leaves = leaf_sequence(&first.background);
    leaves.extend(leaf_sequence(&second.background));
    prop_assert_eq!(leaf_sequence(&out.background), leaves);

    let mut flat = first.label.concat();
    flat.extend(second.label.concat());
    if ann == Annotation::None {
        prop_assert_eq!(out.label.concat(), flat);
    } else {
        prop_assert_eq!(sorted(out.label.concat()), sorted(flat));
    }
    prop_assert_eq!(out.formula, result);
    Ok(())
}

pub fn move_accounting(mut d: Dice) -> Outcome {
    let features = dice::four_features();
    let atoms = dice::atoms(&features);
    let licensors: Vec<_> = features.of_class(FeatureClass::P2).cloned().collect();
    let a = Formula::atom(d.pick(&licensors));
    let size = d.below(3);
    let b = dice::formula(&mut d, &atoms, size);

    let extra = d.below(4);
    let mut ids = vars(extra as u32 + 2);
    d.shuffle(&mut ids);
    let x = Hypothesis::new(ids[0], a.clone());
    let y = Hypothesis::new(ids[1], b.clone());
    let pair = if d.chance(1, 2) {
        Background::compose(Composition::Comm, Background::leaf(x), Background::leaf(y))
    } else {
        Background::compose(Composition::Comm, Background::leaf(y), Background::leaf(x))
    }
    .expect("distinct variables");
    let mut parts: Vec<Background> = ids[2..]
        .iter()
        .map(|v| Background::leaf(Hypothesis::new(*v, Formula::atom(d.pick(&atoms)))))
        .collect();
    parts.push(pair);
    d.shuffle(&mut parts);
    let host_bg = dice::tree(&mut d, parts);
    let chosen = dice::subset(&mut d, &ids);
    let size = d.below(2);
    let host = Sequent {
        label: dice::linear_label(&mut d, &chosen),
        formula: dice::formula(&mut d, &atoms, size),
        background: host_bg,
    };

    let count = d.below(3);
    let ph = dice::hypotheses(&mut d, &atoms, 10, count);
    let pvars: Vec<VarId> = ph.iter().map(|h| h.var).collect();
    let chosen = dice::subset(&mut d, &pvars);
    let package = Sequent {
        background: dice::tree(&mut d, dice::leaves(ph)),
        label: dice::linear_label(&mut d, &chosen),
        formula: Formula::comm(a.clone(), b.clone()),
    };

    let out = mv(&package, &host).map_err(|e| rejected("move", e))?;
    let pm = host.background.find_product_pair(&a, &b, Composition::Comm).map_err(|e| rejected("pair lookup", e))?;
    let (xv, yv) = (pm.x.var, pm.y.var);
    prop_assert_eq!(&pm.x.formula, &a);
    prop_assert_eq!(&pm.y.formula, &b);

    let before: BTreeSet<VarId> = host.background.vars().union(&package.background.vars()).copied().collect();
    let removed: BTreeSet<VarId> = before.difference(&out.background.vars()).copied().collect();
    prop_assert_eq!(removed, BTreeSet::from([xv, yv]));
    prop_assert_eq!(out.background.len(), host.background.len() + package.background.len() - 2);

    let host_vars = host.label.vars();
    let mut label_vars: BTreeSet<VarId> = host_vars.iter().copied().filter(|v| *v != xv && *v != yv).collect();
    if host_vars.contains(&xv) {
        label_vars.extend(package.label.vars());
    }
    prop_assert_eq!(out.label.vars(), label_vars);
    prop_assert!(out.label.vars().is_subset(&out.background.vars()));

    let sigma = Substitution::from_pairs([(xv, package.label.concat()), (yv, Vec::new())]).expect("package is disjoint");
    prop_assert_eq!(out.label.concat(), sigma.apply(&host.label.concat()));
    prop_assert_eq!(out.formula, host.formula);
    Ok(())
}

mod common;

use std::collections::{BTreeSet, HashMap};

use mcgp::derivation::{check, yield_string, DerivationScript, Node};
use mcgp::label::{render_tokens, words, Token};
use mcgp::lexicon::{load_lexicon, Lexicon};
use mcgp::search::{enumerate_yields, parse, SearchBounds};

use common::fixtures::{lexicon, script, QUESTION, SENTENCE, SHUFFLED};

/// The script with `expect` wrappers and PIC modes dropped and hypotheses
/// renamed by order of appearance.
fn skeleton(s: &DerivationScript) -> String {
    fn go(n: &Node, names: &mut HashMap<String, usize>, out: &mut String) {
        match n.inner() {
            Node::Lex { name, index } => out.push_str(&format!("(lex {name} {index})")),
            Node::Hyp { formula, alias } => {
                let next = names.len();
                let id = *names.entry(alias.clone()).or_insert(next);
                out.push_str(&format!("(hyp {formula} {id})"));
            }
            Node::Mg { trigger, arg } => {
                out.push_str("(mg ");
                go(trigger, names, out);
                go(arg, names, out);
                out.push(')');
            }
            Node::Mv { package, host } => {
                out.push_str("(mv ");
                go(package, names, out);
                go(host, names, out);
                out.push(')');
            }
            Node::Phase { package, host, transfers, .. } => {
                out.push_str("(phase ");
                go(package, names, out);
                go(host, names, out);
                for t in transfers {
                    out.push_str("(transfer ");
                    go(t, names, out);
                    out.push(')');
                }
                out.push(')');
            }
            Node::Expect { .. } => unreachable!("inner strips expect"),
        }
    }
    let mut out = String::new();
    go(&s.root, &mut HashMap::new(), &mut out);
    out
}

fn rechecks(s: &DerivationScript, lex: &Lexicon) -> Vec<Token> {
    let d = check(s, lex).unwrap_or_else(|e| panic!("{}\n{}", s.render(), e.report()));
    yield_string(&d, &lex.start).unwrap_or_else(|e| panic!("{}\n{e}", s.render()))
}

fn yields(lex: &Lexicon, bounds: SearchBounds) -> BTreeSet<String> {
    let e = enumerate_yields(lex, bounds).unwrap();
    e.yields.iter().map(|(y, _)| render_tokens(y, &|v| v.to_string())).collect()
}

#[test]
fn every_result_rechecks() {
    for (file, sentence) in [("simple.mcg", SENTENCE), ("question.mcg", QUESTION)] {
        let lex = lexicon(file);
        let r = parse(&words(sentence), &lex, SearchBounds::default()).unwrap();
        assert!(!r.scripts.is_empty(), "{sentence}");
        assert!(r.exhausted);
        for s in &r.scripts {
            assert_eq!(rechecks(s, &lex), words(sentence));
        }
    }
}

#[test]
fn finds_the_worked_derivation() {
    let lex = lexicon("simple.mcg");
    let r = parse(&words(SENTENCE), &lex, SearchBounds::default()).unwrap();
    let pinned = skeleton(&script("simple.drv"));
    let found: Vec<String> = r.scripts.iter().map(skeleton).collect();
    assert!(found.contains(&pinned), "{pinned}\nnot among\n{}", found.join("\n"));
}

#[test]
fn question_needs_a_cyclic_transfer() {
    let lex = lexicon("question.mcg");
    let r = parse(&words(QUESTION), &lex, SearchBounds::default()).unwrap();
    assert!(r.scripts.iter().all(|s| s.root.cyclic_transfers().len() == 1));
    let pinned = skeleton(&script("question.drv"));
    assert!(r.scripts.iter().any(|s| skeleton(s) == pinned));
}

#[test]
fn shuffle_has_no_derivation() {
    let lex = lexicon("simple.mcg");
    let r = parse(&words(SHUFFLED), &lex, SearchBounds::default()).unwrap();
    assert!(r.scripts.is_empty());
    assert!(r.exhausted);
}

#[test]
fn results_are_capped_and_deterministic() {
    let lex = lexicon("simple.mcg");
    let all = parse(&words(SENTENCE), &lex, SearchBounds { max_results: 100, ..SearchBounds::default() }).unwrap();
    let two = parse(&words(SENTENCE), &lex, SearchBounds { max_results: 2, ..SearchBounds::default() }).unwrap();
    assert_eq!(two.scripts.len(), 2);
    assert_eq!(two.scripts[..], all.scripts[..2]);
    assert!(all.scripts.len() > 10);
    let again = parse(&words(SENTENCE), &lex, SearchBounds::default()).unwrap();
    assert_eq!(again, parse(&words(SENTENCE), &lex, SearchBounds::default()).unwrap());
}

#[test]
fn enumeration_includes_the_sentence() {
    let lex = lexicon("simple.mcg");
    let bounds = SearchBounds { max_hypotheses: 6, max_depth: 30, max_items: 100_000, max_results: 100 };
    let e = enumerate_yields(&lex, bounds).unwrap();
    assert!(e.exhausted);
    assert!(e.yields.iter().any(|(y, _)| *y == words(SENTENCE)));
    for (y, s) in &e.yields {
        assert_eq!(&rechecks(s, &lex), y);
    }
}

#[test]
fn empty_lexicon_yields_nothing() {
    let lex = load_lexicon("P1: c\nstart: c\n").unwrap();
    let e = enumerate_yields(&lex, SearchBounds::default()).unwrap();
    assert!(e.yields.is_empty());
    assert!(e.exhausted);
}

#[test]
fn blocked_lexicon_never_completes_a_verb() {
    let lex = lexicon("blocked.mcg");
    let bounds = SearchBounds { max_hypotheses: 6, max_depth: 30, max_items: 100_000, max_results: 100 };
    let found = yields(&lex, bounds);
    assert!(found.iter().all(|y| !y.split(' ').any(|w| w == "read")), "{found:?}");
    let unblocked = yields(&lexicon("simple.mcg"), bounds);
    assert_eq!(unblocked.len(), 16);
    assert!(unblocked.iter().all(|y| y.split(' ').any(|w| w == "read")));
}

#[test]
fn larger_bounds_keep_every_yield() {
    let lex = lexicon("simple.mcg");
    let small = SearchBounds { max_hypotheses: 4, max_depth: 20, max_items: 100_000, max_results: 100 };
    let base = yields(&lex, small);
    assert!(!base.is_empty());
    for bigger in [
        SearchBounds { max_hypotheses: 6, ..small },
        SearchBounds { max_depth: 30, ..small },
        SearchBounds { max_items: 200_000, ..small },
        SearchBounds { max_results: 200, ..small },
    ] {
        let more = yields(&lex, bigger);
        assert!(base.is_subset(&more), "{bigger:?} lost {:?}", base.difference(&more).collect::<Vec<_>>());
    }
}

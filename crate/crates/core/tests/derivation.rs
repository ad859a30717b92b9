mod common;

use mcgp::derivation::{check, check_with, parse_script, yield_string, CheckErrorKind, CheckOptions, YieldError};
use mcgp::label::render_tokens;
use mcgp::rules::PicMode;

use common::fixtures::{lexicon, read, script, QUESTION, SENTENCE};

/// Replaces whole identifiers.
fn rename_words(text: &str, map: &[(&str, &str)]) -> String {
    let mut out = String::new();
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        let w = map.iter().find(|(from, _)| from == word).map_or(word.as_str(), |(_, to)| to);
        out.push_str(w);
        word.clear();
    };
    for ch in text.chars() {
        if ch.is_alphanumeric() || ch == '_' {
            word.push(ch);
        } else {
            flush(&mut word, &mut out);
            out.push(ch);
        }
    }
    flush(&mut word, &mut out);
    out
}

#[test]
fn shipped_scripts_yield_their_sentences() {
    let lex = lexicon("simple.mcg");
    let d = check(&script("simple.drv"), &lex).unwrap();
    let y = yield_string(&d, &lex.start).unwrap();
    assert_eq!(render_tokens(&y, &|v| d.name(v)), SENTENCE);
    assert_eq!(d.notes.len(), 1, "{:?}", d.notes);

    let lex = lexicon("question.mcg");
    let d = check(&script("question.drv"), &lex).unwrap();
    let y = yield_string(&d, &lex.start).unwrap();
    assert_eq!(render_tokens(&y, &|v| d.name(v)), QUESTION);
}

#[test]
fn aliases_are_only_names() {
    let lex = lexicon("simple.mcg");
    let original = check(&script("simple.drv"), &lex).unwrap();
    let text = rename_words(&read("simple.drv"), &[("u", "obj"), ("v", "case"), ("w", "pos"), ("z", "subj")]);
    let renamed = check(&parse_script(&text).unwrap(), &lex).unwrap();
    assert_eq!(renamed.steps.len(), original.steps.len());
    for (a, b) in original.steps.iter().zip(&renamed.steps) {
        assert_eq!((&a.path, a.rule), (&b.path, b.rule));
        assert_eq!(a.sequent, b.sequent);
    }
    assert_eq!(renamed.notes, original.notes);
    let phase1 = renamed.step("r.0.1.0.1", "phase1").unwrap();
    assert_eq!(phase1.label.render(&|v| renamed.name(v)), "(pos case | read | obj)");
}

#[test]
fn scripts_render_and_parse_back() {
    for file in ["simple.drv", "question.drv", "blocked.drv"] {
        let s = script(file);
        assert_eq!(parse_script(&s.render()).unwrap(), s, "{file}");
    }
}

#[test]
fn wrong_expectation_names_its_node() {
    let lex = lexicon("simple.mcg");
    let text = read("simple.drv").replace("\"(_ | a | book)\"", "\"(_ | a | books)\"");
    let e = check(&parse_script(&text).unwrap(), &lex).unwrap_err();
    assert_eq!(e.path, "r.0.1.0.1.t0");
    assert!(matches!(e.kind, CheckErrorKind::ExpectationMismatch { .. }), "{}", e.report());
}

#[test]
fn unknown_lexeme_and_duplicate_alias() {
    let lex = lexicon("simple.mcg");
    let e = check(&parse_script("(mg (lex the) (lex dogs))").unwrap(), &lex).unwrap_err();
    assert_eq!(e.kind.name(), "UnresolvedLexeme");
    assert_eq!(e.path, "r.1");
    assert!(parse_script("(mg (hyp d u) (hyp d u))").is_err());
}

#[test]
fn lenient_phases_keep_the_residue() {
    let lex = lexicon("blocked.mcg");
    let s = script("blocked.drv");
    let strict = check_with(&s, &lex, CheckOptions { pic: PicMode::Strict }).unwrap_err();
    assert_eq!(strict.kind.name(), "PICViolation");
    assert!(strict.report().ends_with("residual hypotheses u:d\n"), "{}", strict.report());

    let text = read("blocked.drv").replace("strict", "lenient");
    let d = check(&parse_script(&text).unwrap(), &lex).unwrap();
    assert!(matches!(yield_string(&d, &lex.start), Err(YieldError::OpenHypotheses(_))));
}

#[test]
fn tree_marks_merge_direction() {
    let lex = lexicon("simple.mcg");
    let s = script("simple.drv");
    let tree = check(&s, &lex).unwrap().tree(&s);
    assert!(tree.lines().next().unwrap().starts_with("phase"), "{tree}");
    for tag in ["< ", "> ", "phase1", "transfer 0"] {
        assert!(tree.contains(tag), "missing {tag:?} in\n{tree}");
    }
}

//! Browser bindings: parse a sentence, check a script, validate a formula.
//!
//! Every export takes and returns plain strings, so the same functions run
//! natively in tests.

use std::fmt::Write as _;

use wasm_bindgen::prelude::*;

use mcgp::derivation::{check, parse_script, yield_string};
use mcgp::formula::{parse_formula, validate_lexical_formula, validate_phase_formula};
use mcgp::label::{render_tokens, words};
use mcgp::lexicon::{load_lexicon, Lexicon};
use mcgp::search::{parse, SearchBounds};

const EXAMPLES: [(&str, &str, &str); 3] = [
    ("simple", include_str!("../../../grammars/simple.mcg"), include_str!("../../../grammars/simple.drv")),
    ("question", include_str!("../../../grammars/question.mcg"), include_str!("../../../grammars/question.drv")),
    ("blocked", include_str!("../../../grammars/blocked.mcg"), include_str!("../../../grammars/blocked.drv")),
];

/// Names accepted by [`example_lexicon`] and [`example_script`], space separated.
#[wasm_bindgen]
pub fn example_names() -> String {
    EXAMPLES.iter().map(|(n, _, _)| *n).collect::<Vec<_>>().join(" ")
}

#[wasm_bindgen]
pub fn example_lexicon(name: &str) -> String {
    EXAMPLES.iter().find(|(n, _, _)| *n == name).map_or_else(String::new, |(_, l, _)| l.to_string())
}

#[wasm_bindgen]
pub fn example_script(name: &str) -> String {
    EXAMPLES.iter().find(|(n, _, _)| *n == name).map_or_else(String::new, |(_, _, s)| s.to_string())
}

fn load(text: &str) -> Result<Lexicon, String> {
    load_lexicon(text).map_err(|e| format!("lexicon: {e}\n"))
}

fn parse_inner(lexicon: &str, sentence: &str, max_results: usize) -> Result<String, String> {
    let lex = load(lexicon)?;
    let bounds = SearchBounds { max_results: max_results.max(1), ..SearchBounds::default() };
    let target = words(sentence);
    let result = parse(&target, &lex, bounds).map_err(|e| format!("{e}\n"))?;
    let mut out = String::new();
    for (i, script) in result.scripts.iter().enumerate() {
        let _ = writeln!(out, "# derivation {}", i + 1);
        out.push_str(&script.render());
        if let Ok(d) = check(script, &lex) {
            out.push_str(&d.tree(script));
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "{} derivation(s) of \"{}\", {} items{}",
        result.scripts.len(),
        render_tokens(&target, &|v| v.to_string()),
        result.items,
        if result.exhausted { ", search exhausted" } else { ", item cap reached" }
    );
    Ok(out)
}

/// Derivations of `sentence`, each as a script followed by its tree.
#[wasm_bindgen]
pub fn parse_sentence(lexicon: &str, sentence: &str, max_results: usize) -> String {
    parse_inner(lexicon, sentence, max_results).unwrap_or_else(|e| e)
}

fn check_inner(lexicon: &str, script: &str, tree: bool) -> Result<String, String> {
    let lex = load(lexicon)?;
    let s = parse_script(script).map_err(|e| format!("script: {e}\n"))?;
    match check(&s, &lex) {
        Ok(d) if tree => {
            let mut out = d.tree(&s);
            match yield_string(&d, &lex.start) {
                Ok(y) => {
                    let _ = writeln!(out, "yield: {}", render_tokens(&y, &|v| d.name(v)));
                }
                Err(e) => {
                    let _ = writeln!(out, "no yield: {e}");
                }
            }
            Ok(out)
        }
        Ok(d) => Ok(d.report(&lex.start)),
        Err(e) => Err(e.report()),
    }
}

/// Replays `script`; `tree` selects the tree view over the step report.
#[wasm_bindgen]
pub fn check_script(lexicon: &str, script: &str, tree: bool) -> String {
    check_inner(lexicon, script, tree).unwrap_or_else(|e| e)
}

/// Verdicts for `formula` over the lexicon's features, as a lexical item and as a phase item.
#[wasm_bindgen]
pub fn validate_formula(lexicon: &str, formula: &str) -> String {
    let lex = match load(lexicon) {
        Ok(l) => l,
        Err(e) => return e,
    };
    match parse_formula(formula, &lex.features) {
        Ok(f) => format!(
            "formula: {f}\nlexical item: {}\nphase item: {}\n",
            validate_lexical_formula(&f),
            validate_phase_formula(&f)
        ),
        Err(e) => format!("formula: {e}\n"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_are_embedded() {
        assert_eq!(example_names(), "simple question blocked");
        assert!(example_lexicon("question").contains("which"));
        assert!(example_script("blocked").contains("strict"));
        assert_eq!(example_lexicon("none"), "");
    }

    #[test]
    fn parse_finds_the_sentence() {
        let out = parse_sentence(&example_lexicon("simple"), "the children read a book", 2);
        assert!(out.starts_with("# derivation 1\n"), "{out}");
        assert!(out.ends_with("2 derivation(s) of \"the children read a book\", 137 items, search exhausted\n"), "{out}");
        let none = parse_sentence(&example_lexicon("simple"), "book a read children the", 2);
        assert!(none.starts_with("0 derivation(s)"), "{none}");
        assert!(parse_sentence(&example_lexicon("simple"), "the dog", 2).contains("dog"));
    }

    #[test]
    fn check_reports_and_trees() {
        for name in ["simple", "question"] {
            let report = check_script(&example_lexicon(name), &example_script(name), false);
            assert!(report.lines().last().unwrap().starts_with("concat: "), "{report}");
            let tree = check_script(&example_lexicon(name), &example_script(name), true);
            assert!(tree.starts_with("phase"), "{tree}");
            assert!(tree.contains("yield: "), "{tree}");
        }
        let blocked = check_script(&example_lexicon("blocked"), &example_script("blocked"), true);
        assert!(blocked.contains("PICViolation"), "{blocked}");
        assert!(check_script(&example_lexicon("simple"), "(mg", false).starts_with("script: "));
    }

    #[test]
    fn formulas_get_both_verdicts() {
        let lex = example_lexicon("simple");
        let out = validate_formula(&lex, "k \\ d \\ V");
        assert!(out.contains("lexical item: rejected"), "{out}");
        assert!(out.contains("phase item: accepted"), "{out}");
        assert!(validate_formula(&lex, "(k (x) d) / n").contains("lexical item: accepted"));
        assert!(validate_formula(&lex, "q / n").starts_with("formula: "));
        assert!(validate_formula("nonsense", "c").starts_with("lexicon: "));
    }
}

use std::path::{Path, PathBuf};

use mcgp::derivation::{parse_script, DerivationScript};
use mcgp::lexicon::{load_lexicon, Lexicon};

pub const SENTENCE: &str = "the children read a book";
pub const SHUFFLED: &str = "book a read children the";
pub const QUESTION: &str = "which book the children read";

pub fn grammar_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../grammars")
}

pub fn grammar_path(file: &str) -> PathBuf {
    grammar_dir().join(file)
}

pub fn read(file: &str) -> String {
    let path = grammar_path(file);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn lexicon(file: &str) -> Lexicon {
    load_lexicon(&read(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

pub fn script(file: &str) -> DerivationScript {
    parse_script(&read(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

//! Minimalist Categorial Grammars with phases.
//!
//! Formulas and labels, the structured backgrounds that hold hypotheses,
//! the inference rules, a derivation checker and a bounded bottom-up parser.

pub mod background;
pub mod derivation;
pub mod formula;
pub mod label;
pub mod lexicon;
pub mod rules;
pub mod search;

#[cfg(feature = "cli")]
pub mod cli;

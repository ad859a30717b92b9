mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use mcgp::label::{equal_mod_renaming, parse_label, sequences_equal_mod_renaming, VarId};

use common::dice::{self, dice};
use common::props;

fn pool(n: u32) -> Vec<VarId> {
    (0..n).map(VarId).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 2000, ..ProptestConfig::default() })]

    #[test]
    fn concat_commutes_with_substitution(d in dice()) {
        props::substitution_commutes_with_concat(d)?;
    }

    #[test]
    fn renaming_equality_is_an_equivalence(d in dice()) {
        props::renaming_is_an_equivalence(d)?;
    }

    #[test]
    fn composition_applies_in_sequence(mut d in dice()) {
        let vars = pool(5);
        let s = dice::tokens(&mut d, &vars, 6);
        let sigma = dice::substitution(&mut d, &vars, &vars);
        let tau = dice::substitution(&mut d, &vars, &vars);
        prop_assert_eq!(tau.apply(&sigma.apply(&s)), sigma.compose(&tau).apply(&s));
    }

    #[test]
    fn renaming_preserves_flattening_up_to_renaming(mut d in dice()) {
        let vars = pool(5);
        let l = dice::label(&mut d, &vars);
        let mut targets = pool(9);
        d.shuffle(&mut targets);
        let rho: BTreeMap<VarId, VarId> = vars.iter().copied().zip(targets).collect();
        let renamed = l.rename(&rho).unwrap();
        prop_assert!(sequences_equal_mod_renaming(&l.concat(), &renamed.concat()));
        prop_assert_eq!(renamed.token_count(), l.token_count());
    }

    #[test]
    fn render_then_parse_is_identity(mut d in dice()) {
        let vars = pool(4);
        let l = dice::label(&mut d, &vars);
        let names = |v: VarId| format!("x{}", v.0);
        let text = l.render(&names);
        let back = parse_label(&text, &|s| s.strip_prefix('x').and_then(|n| n.parse().ok()).map(VarId)).unwrap();
        prop_assert_eq!(&back, &l, "{}", text);
        prop_assert!(equal_mod_renaming(&back, &l));
    }
}

#[test]
fn renaming_must_be_injective() {
    let l = parse_label("(x | y | _)", &|s| match s {
        "x" => Some(VarId(0)),
        "y" => Some(VarId(1)),
        _ => None,
    })
    .unwrap();
    let collapse = BTreeMap::from([(VarId(0), VarId(5)), (VarId(1), VarId(5))]);
    assert!(l.rename(&collapse).is_err());
}

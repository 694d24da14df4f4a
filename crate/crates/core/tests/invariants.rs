//! Invariants checked over many (group, normal subgroup) pairs beyond the
//! bundled corpus.

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use biinterp_core::extension::{extension_data, verify_extension_identities, ExtensionData};
use biinterp_core::folog::{
    axiomatize_with_tuple, check_axiomatization, random_sentence, Evaluator, ParamEnv, SentenceShape,
};
use biinterp_core::gamma::{build_codec, check_isomorphism, GammaCodec};
use biinterp_core::group::{from_expr, is_normal, subgroup_closure, GroupTable};
use biinterp_core::interp::{check_equivalence, interpret_g_in_h, translate};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GROUPS: &[&str] = &[
    "cyclic:4",
    "cyclic:6",
    "cyclic:8",
    "cyclic:9",
    "cyclic:12",
    "dihedral:3",
    "dihedral:4",
    "dihedral:5",
    "dihedral:6",
    "quaternion8",
    "product:cyclic:2,cyclic:4",
    "product:cyclic:3,dihedral:3",
];

/// Every proper nontrivial normal subgroup generated by at most two elements.
fn normal_pairs() -> &'static Vec<Arc<ExtensionData>> {
    static PAIRS: OnceLock<Vec<Arc<ExtensionData>>> = OnceLock::new();
    PAIRS.get_or_init(|| {
        let mut out = Vec::new();
        for expr in GROUPS {
            let g = Arc::new(from_expr(expr).unwrap());
            let mut seen = BTreeSet::new();
            for a in g.elements() {
                for b in g.elements() {
                    let sub = subgroup_closure(&g, &[a, b]);
                    let proper = sub.order() > 1 && sub.order() < g.order();
                    if proper && is_normal(&sub) && seen.insert(sub.members().to_vec()) {
                        out.push(Arc::new(extension_data(&sub).unwrap()));
                    }
                }
            }
        }
        out
    })
}

fn pair() -> impl Strategy<Value = Arc<ExtensionData>> {
    (0..normal_pairs().len()).prop_map(|i| normal_pairs()[i].clone())
}

fn codec(ext: &Arc<ExtensionData>) -> GammaCodec {
    build_codec(ext.clone()).unwrap()
}

#[test]
fn pair_count_matches_hand_count() {
    // C4 1, C6 2, C8 2, C9 1, C12 4, D3 1, D4 4, D5 1, D6 5, Q8 4, C2xC4 6, C3xS3 4
    assert_eq!(normal_pairs().len(), 35);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extension_identities_hold(ext in pair()) {
        let r = verify_extension_identities(&ext);
        prop_assert!(r.passed(), "{}", r.to_json());
    }

    #[test]
    fn normal_form_multiplication_matches_the_table(ext in pair(), a in 0usize..64, b in 0usize..64) {
        let g = ext.group();
        let (a, b) = (a % g.order(), b % g.order());
        prop_assert_eq!(ext.compose(ext.decompose(a).0, ext.decompose(a).1), a);
        let prod = ext.normal_form_mul(ext.decompose(a), ext.decompose(b));
        prop_assert_eq!(ext.compose(prod.0, prod.1), g.mul(a, b));
    }

    #[test]
    fn encoding_is_an_isomorphism(ext in pair()) {
        let c = codec(&ext);
        prop_assert!(check_isomorphism(&c).is_ok());
        prop_assert_eq!(c.domain().len(), ext.group().order());
        for g in ext.group().elements() {
            prop_assert_eq!(c.decode(c.encode(g)).unwrap(), g);
        }
    }

    #[test]
    fn interpretation_formulas_define_the_codec(ext in pair()) {
        let c = codec(&ext);
        let interp = interpret_g_in_h(&c, 10_000_000).unwrap();
        let g = ext.group();
        let mut ev = Evaluator::new(interp.target(), &ParamEnv::new());
        let domain = ev.definable_set(interp.domain_formula(), &interp.domain_vars()).unwrap();
        let want: BTreeSet<Vec<usize>> = g.elements().map(|a| c.encode(a).to_vec()).collect();
        prop_assert_eq!(domain, want);
        let graph = ev.definable_set(interp.mult_formula(), &interp.mult_vars()).unwrap();
        prop_assert_eq!(graph.len(), g.order() * g.order());
        for t in &graph {
            let w = c.width();
            let (x, y) = (c.decode(&t[..w]).unwrap(), c.decode(&t[w..2 * w]).unwrap());
            prop_assert_eq!(c.decode(&t[2 * w..]).unwrap(), g.mul(x, y));
        }
    }

    #[test]
    fn translation_preserves_truth(ext in pair(), seed in any::<u64>()) {
        let c = codec(&ext);
        let interp = interpret_g_in_h(&c, 10_000_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = random_sentence(&mut rng, SentenceShape::default());
        let res = translate(&phi, &interp, &ParamEnv::new()).unwrap();
        let eq = check_equivalence(&phi, &res, &interp, &ParamEnv::new(), 10_000_000).unwrap();
        prop_assert!(eq.holds, "{phi}");
    }

    #[test]
    fn certificate_holds_on_its_own_tuple(ext in pair(), a in 0usize..64, b in 0usize..64) {
        let g: &GroupTable = ext.group();
        let tuple = [a % g.order(), b % g.order()];
        let base = Arc::new(g.clone());
        match axiomatize_with_tuple(base.clone(), &tuple) {
            Ok(cert) => {
                let check = check_axiomatization(&cert, &base, &tuple).unwrap();
                prop_assert!(check.holds);
                prop_assert_eq!(check.witness.unwrap(), g.elements().collect::<Vec<_>>());
            }
            Err(_) => prop_assert!(subgroup_closure(ext.group(), &tuple).order() < g.order()),
        }
    }
}

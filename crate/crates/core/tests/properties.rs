//! Randomized invariants of the group models.

use cgt_core::group::{classify_free_product, class_key, conj_length, cyclic_reduce, enumerate_ball, Caps};
use cgt_core::{Element, Gen, GroupModel, GroupSpec};
use proptest::prelude::*;

fn models() -> Vec<GroupModel> {
    [
        GroupSpec::free(2),
        GroupSpec::free_product(GroupSpec::cyclic(2), GroupSpec::cyclic(3)),
        GroupSpec::free_product(GroupSpec::free(1), GroupSpec::cyclic(4)),
        GroupSpec::direct_product(GroupSpec::free(2), GroupSpec::cyclic(3)),
        GroupSpec::raag(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]),
        GroupSpec::raag(&["a", "b", "c"], &[("a", "b")]),
        GroupSpec::free_product(
            GroupSpec::direct_product(GroupSpec::free(1), GroupSpec::free(1)),
            GroupSpec::cyclic(2),
        ),
    ]
    .iter()
    .map(|s| GroupModel::build(s).unwrap())
    .collect()
}

fn word(model: &GroupModel, raw: &[u8]) -> Vec<Gen> {
    raw.iter().map(|&x| (x as usize % model.num_generators()) as Gen).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalize_is_idempotent_and_associative(
        which in 0usize..7,
        u in prop::collection::vec(any::<u8>(), 0..12),
        v in prop::collection::vec(any::<u8>(), 0..12),
        w in prop::collection::vec(any::<u8>(), 0..12),
    ) {
        let ms = models();
        let m = &ms[which];
        let (u, v, w) = (word(m, &u), word(m, &v), word(m, &w));
        let nu = m.normalize(&u);
        prop_assert_eq!(m.normalize(nu.letters()), nu.clone());
        let nv = m.normalize(&v);
        let nw = m.normalize(&w);
        let left = m.multiply(&m.multiply(&nu, &nv), &nw);
        let right = m.multiply(&nu, &m.multiply(&nv, &nw));
        prop_assert_eq!(&left, &right);
        let mut all = u.clone();
        all.extend(&v);
        all.extend(&w);
        prop_assert_eq!(m.normalize(&all), left);
        prop_assert!(m.multiply(&nu, &m.inverse(&nu)).is_identity());
        prop_assert!(nu.len() <= u.len());
    }

    #[test]
    fn format_parse_round_trip(which in 0usize..7, u in prop::collection::vec(any::<u8>(), 0..16)) {
        let ms = models();
        let m = &ms[which];
        let g = m.normalize(&word(m, &u));
        prop_assert_eq!(m.parse_element(&m.format(&g)).unwrap(), g);
    }

    #[test]
    fn class_key_is_conjugation_invariant(
        which in 0usize..7,
        u in prop::collection::vec(any::<u8>(), 0..8),
        x in prop::collection::vec(any::<u8>(), 0..4),
    ) {
        let ms = models();
        let m = &ms[which];
        let g = m.normalize(&word(m, &u));
        let x = m.normalize(&word(m, &x));
        let h = m.conjugate(&x, &g);
        prop_assert_eq!(class_key(m, &g), class_key(m, &h));
        let r = cyclic_reduce(m, &g);
        prop_assert!(r.len() <= g.len());
        prop_assert_eq!(class_key(m, &r).min_length, r.len());
    }
}

#[test]
fn word_length_matches_ball_layer() {
    for m in models() {
        let ball = enumerate_ball(&m, 4, &Caps::default()).unwrap();
        for (k, sphere) in ball.spheres().iter().enumerate() {
            for g in sphere.elements() {
                assert_eq!(m.word_length(&g), k);
            }
        }
        let counts = ball.sphere_counts();
        assert_eq!(counts.iter().sum::<u64>(), ball.len() as u64);
    }
}

#[test]
fn free_product_classification_is_conjugation_invariant() {
    for spec in [
        GroupSpec::free_product(GroupSpec::cyclic(2), GroupSpec::cyclic(3)),
        GroupSpec::free_product(GroupSpec::free(2), GroupSpec::free(2)),
        GroupSpec::free_product(GroupSpec::free(1), GroupSpec::cyclic(4)),
    ] {
        let m = GroupModel::build(&spec).unwrap();
        let conj: Vec<Element> = enumerate_ball(&m, 2, &Caps::default()).unwrap().elements().collect();
        for g in enumerate_ball(&m, 4, &Caps::default()).unwrap().elements() {
            let c = classify_free_product(&m, &g).unwrap();
            for x in &conj {
                assert_eq!(classify_free_product(&m, &m.conjugate(x, &g)).unwrap(), c);
            }
        }
    }
}

#[test]
fn conj_length_is_conjugation_invariant() {
    for m in models() {
        let conj: Vec<Element> = enumerate_ball(&m, 2, &Caps::default()).unwrap().elements().collect();
        for g in enumerate_ball(&m, 3, &Caps::default()).unwrap().elements() {
            let l = conj_length(&m, &g, 2).unwrap().0;
            for x in &conj {
                assert_eq!(conj_length(&m, &m.conjugate(x, &g), 2).unwrap().0, l, "{}", m.label());
            }
        }
    }
}

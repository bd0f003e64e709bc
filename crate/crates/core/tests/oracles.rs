//! Word metric and normal forms against independent oracles: matrix
//! representations, free reduction, and brute-force shuffle closure.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use cgt_core::group::{enumerate_ball, geodesics_between, sphere_counts, Caps};
use cgt_core::{Gen, GroupModel, GroupSpec};

type Mat = [[i64; 2]; 2];

fn mul(a: &Mat, b: &Mat) -> Mat {
    let mut c = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Projective class: sign fixed by the first nonzero entry.
fn projective(m: Mat) -> Mat {
    let first = [m[0][0], m[0][1], m[1][0], m[1][1]].into_iter().find(|&x| x != 0).unwrap();
    if first < 0 {
        [[-m[0][0], -m[0][1]], [-m[1][0], -m[1][1]]]
    } else {
        m
    }
}

/// Breadth-first distances in a matrix group from the identity.
fn bfs_matrices(gens: &[Mat], n: usize, proj: bool) -> HashMap<Mat, usize> {
    let id: Mat = [[1, 0], [0, 1]];
    let mut dist = HashMap::from([(id, 0)]);
    let mut queue = VecDeque::from([id]);
    while let Some(m) = queue.pop_front() {
        let d = dist[&m];
        if d == n {
            continue;
        }
        for g in gens {
            let mut x = mul(&m, g);
            if proj {
                x = projective(x);
            }
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(x) {
                e.insert(d + 1);
                queue.push_back(x);
            }
        }
    }
    dist
}

fn image(model: &GroupModel, word: &[Gen], reps: &[Mat], proj: bool) -> Mat {
    let mut m: Mat = [[1, 0], [0, 1]];
    for &s in word {
        m = mul(&m, &reps[s as usize]);
        if proj {
            m = projective(m);
        }
    }
    let _ = model;
    m
}

fn check_matrix_oracle(model: &GroupModel, reps: &[Mat], proj: bool, n: usize) {
    assert_eq!(reps.len(), model.num_generators());
    let dist = bfs_matrices(reps, n, proj);
    let ball = enumerate_ball(model, n, &Caps::default()).unwrap();
    assert_eq!(ball.len(), dist.len(), "ball size in {}", model.label());
    let mut seen = HashSet::new();
    for g in ball.elements() {
        let m = image(model, g.letters(), reps, proj);
        assert_eq!(dist[&m], model.word_length(&g), "length of {}", model.format(&g));
        assert!(seen.insert(m), "two normal forms with the same image");
    }
}

#[test]
fn free_group_matches_sanov_matrices() {
    let m = GroupModel::build(&GroupSpec::free(2)).unwrap();
    let a: Mat = [[1, 2], [0, 1]];
    let ai: Mat = [[1, -2], [0, 1]];
    let b: Mat = [[1, 0], [2, 1]];
    let bi: Mat = [[1, 0], [-2, 1]];
    // Generator ids run a, A, b, B.
    check_matrix_oracle(&m, &[a, ai, b, bi], false, 7);
}

#[test]
fn z2_z3_matches_psl2z() {
    let m = GroupModel::build(&GroupSpec::free_product(GroupSpec::cyclic(2), GroupSpec::cyclic(3))).unwrap();
    let s: Mat = [[0, -1], [1, 0]];
    let u: Mat = [[0, -1], [1, 1]];
    let ui = projective(mul(&u, &u));
    let names: Vec<&str> = (0..m.num_generators() as Gen).map(|g| m.gen_name(g)).collect();
    let reps: Vec<Mat> = names
        .iter()
        .map(|n| match *n {
            "a" => s,
            "b" => u,
            "B" => ui,
            other => panic!("unexpected generator {other}"),
        })
        .collect();
    check_matrix_oracle(&m, &reps, true, 14);
}

#[test]
fn direct_product_of_free_groups_matches_matrix_pairs() {
    let m = GroupModel::build(&GroupSpec::direct_product(GroupSpec::free(2), GroupSpec::free(2))).unwrap();
    let sanov: [Mat; 4] = [[[1, 2], [0, 1]], [[1, -2], [0, 1]], [[1, 0], [2, 1]], [[1, 0], [-2, 1]]];
    let id: Mat = [[1, 0], [0, 1]];
    let gens: Vec<(Mat, Mat)> = (0..8).map(|i| if i < 4 { (sanov[i], id) } else { (id, sanov[i - 4]) }).collect();
    let mut dist: HashMap<(Mat, Mat), usize> = HashMap::from([((id, id), 0)]);
    let mut queue = VecDeque::from([(id, id)]);
    while let Some(p) = queue.pop_front() {
        let d = dist[&p];
        if d == 5 {
            continue;
        }
        for g in &gens {
            let x = (mul(&p.0, &g.0), mul(&p.1, &g.1));
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(x) {
                e.insert(d + 1);
                queue.push_back(x);
            }
        }
    }
    let ball = enumerate_ball(&m, 5, &Caps::default()).unwrap();
    assert_eq!(ball.len(), dist.len());
    for g in ball.elements() {
        let mut p = (id, id);
        for &s in g.letters() {
            let gi = &gens[s as usize];
            p = (mul(&p.0, &gi.0), mul(&p.1, &gi.1));
        }
        assert_eq!(dist[&p], g.len());
    }
}

/// Every word reachable by swapping adjacent commuting letters and deleting
/// adjacent inverse pairs.
fn shuffle_closure(word: Vec<Gen>, commute: &dyn Fn(Gen, Gen) -> bool, inv: &dyn Fn(Gen) -> Gen) -> BTreeSet<Vec<Gen>> {
    let mut seen = BTreeSet::from([word.clone()]);
    let mut stack = vec![word];
    while let Some(w) = stack.pop() {
        for i in 0..w.len().saturating_sub(1) {
            let mut next = Vec::new();
            if inv(w[i]) == w[i + 1] {
                let mut v = w.clone();
                v.drain(i..i + 2);
                next.push(v);
            } else if commute(w[i], w[i + 1]) {
                let mut v = w.clone();
                v.swap(i, i + 1);
                next.push(v);
            }
            for v in next {
                if seen.insert(v.clone()) {
                    stack.push(v);
                }
            }
        }
    }
    seen
}

#[test]
fn raag_normal_forms_match_shuffle_closure() {
    let specs = [
        GroupSpec::raag(&["a", "b", "c"], &[("a", "b")]),
        GroupSpec::raag(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]),
        GroupSpec::raag(&["a", "b", "c"], &[("a", "b"), ("b", "c")]),
    ];
    for spec in specs {
        let m = GroupModel::build(&spec).unwrap();
        let ng = m.num_generators() as Gen;
        let commute = |x: Gen, y: Gen| m.multiply(&m.generator(x), &m.generator(y)) == m.multiply(&m.generator(y), &m.generator(x));
        let inv = |x: Gen| m.inverse_gen(x);
        // All words of length ≤ 4.
        let mut words: Vec<Vec<Gen>> = vec![Vec::new()];
        let mut layer = words.clone();
        for _ in 0..4 {
            layer = layer
                .iter()
                .flat_map(|w| {
                    (0..ng).map(move |s| {
                        let mut v = w.clone();
                        v.push(s);
                        v
                    })
                })
                .collect();
            words.extend(layer.iter().cloned());
        }
        let mut by_min: HashMap<Vec<Gen>, cgt_core::Element> = HashMap::new();
        for w in &words {
            let closure = shuffle_closure(w.clone(), &commute, &inv);
            let shortest = closure.iter().map(|v| v.len()).min().unwrap();
            let min = closure
                .iter()
                .filter(|v| v.len() == shortest)
                .min()
                .unwrap()
                .clone();
            let nf = m.normalize(w);
            assert_eq!(nf.len(), shortest, "length of {}", m.format_word(w));
            // Normal forms are the ShortLex-least reduced word in the class.
            assert_eq!(nf.letters(), &min[..], "normal form of {}", m.format_word(w));
            if let Some(prev) = by_min.insert(min, nf.clone()) {
                assert_eq!(prev, nf);
            }
        }
        let counts = sphere_counts(&m, 4, &Caps::default()).unwrap();
        let mut per_len = vec![0u64; 5];
        for k in by_min.keys() {
            per_len[k.len()] += 1;
        }
        assert_eq!(counts, per_len, "{}", m.label());
    }
}

#[test]
fn closed_forms_match_enumeration() {
    let specs = [
        GroupSpec::free(2),
        GroupSpec::free(3),
        GroupSpec::free_product(GroupSpec::free(2), GroupSpec::free(2)),
        GroupSpec::free_product(GroupSpec::cyclic(2), GroupSpec::cyclic(3)),
        GroupSpec::free_product(GroupSpec::cyclic(3), GroupSpec::cyclic(3)),
        GroupSpec::cyclic(5),
        GroupSpec::direct_product(GroupSpec::free(2), GroupSpec::free(2)),
    ];
    for spec in specs {
        let m = GroupModel::build(&spec).unwrap();
        let counts = sphere_counts(&m, 7, &Caps::default()).unwrap();
        for (n, &c) in counts.iter().enumerate() {
            if let Some(f) = spec.closed_form_sphere(n) {
                assert_eq!(f.round() as u64, c, "{} sphere {n}", spec.label());
            }
        }
    }
    for k in 1..=3u32 {
        let m = GroupModel::build(&GroupSpec::free(k)).unwrap();
        let counts = sphere_counts(&m, 6, &Caps::default()).unwrap();
        for (n, &c) in counts.iter().enumerate().skip(1) {
            let k = k as u64;
            assert_eq!(c, 2 * k * (2 * k - 1).pow(n as u32 - 1));
        }
    }
}

#[test]
fn geodesic_streams_are_geodesic_and_complete() {
    let models = [
        GroupModel::build(&GroupSpec::direct_product(GroupSpec::free(1), GroupSpec::free(1))).unwrap(),
        GroupModel::build(&GroupSpec::raag(&["a", "b", "c"], &[("a", "b"), ("b", "c")])).unwrap(),
        GroupModel::build(&GroupSpec::free_product(GroupSpec::cyclic(2), GroupSpec::cyclic(3))).unwrap(),
    ];
    for m in &models {
        let ball = enumerate_ball(m, 4, &Caps::default()).unwrap();
        for g in ball.elements() {
            let s = geodesics_between(m, &m.identity(), &g, 100_000);
            assert!(!s.truncated);
            let set: HashSet<&Vec<Gen>> = s.words.iter().map(|w| &w.0).collect();
            assert_eq!(set.len(), s.words.len(), "duplicate geodesic");
            for w in &s.words {
                assert_eq!(w.len(), g.len());
                assert_eq!(m.normalize(&w.0), g);
            }
            // Brute force: every word of length |g| evaluating to g.
            let ng = m.num_generators() as Gen;
            let mut count = 0;
            let mut stack: Vec<Vec<Gen>> = vec![Vec::new()];
            while let Some(w) = stack.pop() {
                if w.len() == g.len() {
                    if m.normalize(&w) == g {
                        count += 1;
                    }
                    continue;
                }
                for s in 0..ng {
                    let mut v = w.clone();
                    v.push(s);
                    stack.push(v);
                }
            }
            assert_eq!(count, s.words.len(), "geodesic count for {}", m.format(&g));
        }
    }
}

//! Conjugacy length, minimal representatives and canonical class keys.
//!
//! Reduction is generic: conjugate by single generators while that shortens
//! the element, then explore the plateau of length-preserving single-letter
//! conjugations (cyclic rotations, commutation shuffles, syllable moves).
//! Every model's rule is cross-checked against a bounded brute-force search.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use super::ball::{enumerate_ball, Caps};
use super::model::{Element, Gen, GroupModel, Word};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ConjClassKey {
    /// ShortLex-least minimal-length element of the class.
    pub canonical: Word,
    pub min_length: usize,
}

fn single_conjugates<'a>(model: &'a GroupModel, g: &'a Element) -> impl Iterator<Item = Element> + 'a {
    (0..model.num_generators() as Gen).map(move |s| {
        // s⁻¹ g s
        let mut nf = Vec::with_capacity(g.len() + 2);
        model.push_gen(&mut nf, model.inverse_gen(s));
        for &t in g.letters() {
            model.push_gen(&mut nf, t);
        }
        model.push_gen(&mut nf, s);
        Element::from_normal_form(nf)
    })
}

/// Greedy single-generator reduction followed by plateau exploration; the
/// returned element has no shorter single-letter conjugate anywhere on its
/// plateau.
pub fn cyclic_reduce(model: &GroupModel, g: &Element) -> Element {
    let mut cur = g.clone();
    'restart: loop {
        let mut seen: HashSet<Element> = HashSet::new();
        seen.insert(cur.clone());
        let mut frontier = vec![cur.clone()];
        while let Some(x) = frontier.pop() {
            for c in single_conjugates(model, &x) {
                if c.len() < x.len() {
                    cur = c;
                    continue 'restart;
                }
                if c.len() == x.len() && seen.insert(c.clone()) {
                    frontier.push(c);
                }
            }
        }
        return cur;
    }
}

/// Plateau of length-preserving single-letter conjugations of a reduced element.
fn plateau(model: &GroupModel, g: &Element) -> BTreeSet<Element> {
    let mut seen = BTreeSet::new();
    seen.insert(g.clone());
    let mut frontier = vec![g.clone()];
    while let Some(x) = frontier.pop() {
        for c in single_conjugates(model, &x) {
            if c.len() == x.len() && seen.insert(c.clone()) {
                frontier.push(c);
            }
        }
    }
    seen
}

pub fn class_key(model: &GroupModel, g: &Element) -> ConjClassKey {
    let red = cyclic_reduce(model, g);
    let min = plateau(model, &red).into_iter().next().unwrap();
    ConjClassKey {
        min_length: min.len(),
        canonical: min.to_word(),
    }
}

/// Whether `g` is itself the canonical representative of its class: no
/// shorter element is reachable and no ShortLex-smaller element sits on its
/// plateau. Exits early, which keeps class censuses cheap.
pub fn is_class_canonical(model: &GroupModel, g: &Element) -> bool {
    let mut seen: HashSet<Element> = HashSet::new();
    seen.insert(g.clone());
    let mut frontier = vec![g.clone()];
    while let Some(x) = frontier.pop() {
        for c in single_conjugates(model, &x) {
            if c.len() < g.len() || (c.len() == g.len() && c < *g) {
                return false;
            }
            if c.len() == x.len() && seen.insert(c.clone()) {
                frontier.push(c);
            }
        }
    }
    true
}

/// Minimal length over `x g x⁻¹` for `x` in the ball of the given radius,
/// with the ShortLex-least minimizer.
pub fn brute_force_conj_length(model: &GroupModel, g: &Element, radius: usize) -> Result<(usize, Element)> {
    let ball = enumerate_ball(model, radius, &Caps::default())?;
    let mut best = g.clone();
    for x in ball.elements() {
        let c = model.conjugate(&x, g);
        if c.len() < best.len() || (c.len() == best.len() && c < best) {
            best = c;
        }
    }
    Ok((best.len(), best))
}

/// `ℓ([g])` from cyclic reduction, cross-checked against the brute-force
/// minimum over conjugators in `B(o, search_radius)`. A brute-force result
/// shorter than the reduction is a hard error.
pub fn conj_length(model: &GroupModel, g: &Element, search_radius: usize) -> Result<(usize, Element)> {
    let key = class_key(model, g);
    let (brute, _) = brute_force_conj_length(model, g, search_radius)?;
    if brute != key.min_length {
        // The reduction can only be beaten by brute force, never the reverse,
        // unless the search radius is too small to reach the minimum.
        if brute < key.min_length {
            return Err(Error::ConjLengthMismatch {
                element: model.format(g),
                reduced: key.min_length,
                brute,
            });
        }
    }
    Ok((key.min_length, model.normalize_word(&key.canonical)))
}

/// Exhaustive conjugator search: is there `x` with `|x| ≤ radius` and
/// `x g x⁻¹ = h`?
pub fn conjugator_within(model: &GroupModel, g: &Element, h: &Element, radius: usize) -> Result<Option<Element>> {
    let ball = enumerate_ball(model, radius, &Caps::default())?;
    let found = ball.elements().find(|x| model.conjugate(x, g) == *h);
    Ok(found)
}

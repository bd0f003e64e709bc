use serde::Serialize;

use super::model::{Element, Gen, GroupModel, Word};

/// Lazily yields every geodesic word for a fixed element, in lexicographic
/// order of generator ids.
///
/// A word `s·w` is geodesic for `r` iff `|s⁻¹ r| = |r| - 1` and `w` is geodesic
/// for `s⁻¹ r`, so a depth-first search over the first letter suffices.
pub struct GeodesicIter<'a> {
    model: &'a GroupModel,
    /// (remaining element, next generator to try) per depth.
    stack: Vec<(Element, usize)>,
    prefix: Vec<Gen>,
    done: bool,
}

impl<'a> GeodesicIter<'a> {
    pub fn new(model: &'a GroupModel, target: &Element) -> Self {
        GeodesicIter {
            model,
            stack: vec![(target.clone(), 0)],
            prefix: Vec::with_capacity(target.len()),
            done: false,
        }
    }
}

impl Iterator for GeodesicIter<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        let ngens = self.model.num_generators();
        loop {
            let depth = self.stack.len();
            let Some((rem, next)) = self.stack.last_mut() else {
                self.done = true;
                return None;
            };
            if rem.is_identity() {
                let out = Word(self.prefix.clone());
                self.stack.pop();
                self.prefix.pop();
                if depth == 1 {
                    self.done = true;
                }
                return Some(out);
            }
            if *next >= ngens {
                self.stack.pop();
                self.prefix.pop();
                continue;
            }
            let s = *next as Gen;
            *next += 1;
            // s⁻¹·r
            let mut nf = Vec::with_capacity(rem.len() + 1);
            self.model.push_gen(&mut nf, self.model.inverse_gen(s));
            for &t in rem.letters() {
                self.model.push_gen(&mut nf, t);
            }
            if nf.len() + 1 == rem.len() {
                self.prefix.push(s);
                self.stack.push((Element::from_normal_form(nf), 0));
            }
        }
    }
}

/// A capped collection of geodesic words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeodesicStream {
    pub words: Vec<Word>,
    /// The cap was reached before the enumeration finished.
    pub truncated: bool,
}

/// All geodesic words from `g` to `h` (i.e. geodesic words for `g⁻¹h`), up to
/// `cap` of them.
pub fn geodesics_between(model: &GroupModel, g: &Element, h: &Element, cap: usize) -> GeodesicStream {
    let target = model.multiply(&model.inverse(g), h);
    let mut iter = GeodesicIter::new(model, &target);
    let mut words = Vec::new();
    while words.len() < cap {
        match iter.next() {
            Some(w) => words.push(w),
            None => {
                return GeodesicStream {
                    words,
                    truncated: false,
                }
            }
        }
    }
    let truncated = iter.next().is_some();
    GeodesicStream { words, truncated }
}

/// Whether the word is geodesic, i.e. its letter count equals the length of
/// the element it represents.
pub fn is_geodesic(model: &GroupModel, w: &[Gen]) -> bool {
    model.normalize(w).len() == w.len()
}

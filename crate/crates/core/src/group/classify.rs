//! Algebraic classifiers used as ground truth by the experiments.

use serde::Serialize;

use super::model::{Element, Gen, GroupModel, ModelKind, Side};
use crate::error::{Error, Result};

/// Free-product type of an element.
///
/// Elliptic elements are reported as `ConjugateIntoFactor`, with `torsion`
/// set when the remaining syllable has finite order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum FreeProductClass {
    Identity,
    ConjugateIntoFactor { side: Side, torsion: bool },
    Hyperbolic,
}

impl FreeProductClass {
    pub fn is_hyperbolic(self) -> bool {
        matches!(self, FreeProductClass::Hyperbolic)
    }

    /// Whether the element lies in a conjugate of a factor (the identity does).
    pub fn is_conjugate_into_factor(self) -> bool {
        !self.is_hyperbolic()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RaagClass {
    Rank1Candidate,
    JoinBound,
}

fn require(model: &GroupModel, kind: ModelKind) -> Result<()> {
    if model.kind() == kind {
        Ok(())
    } else {
        Err(Error::WrongModelKind {
            expected: kind.name(),
            found: model.kind().name(),
        })
    }
}

/// Maximal runs of letters from the same top-level factor.
pub fn syllables(model: &GroupModel, g: &Element) -> Vec<(Side, Vec<Gen>)> {
    let mut out: Vec<(Side, Vec<Gen>)> = Vec::new();
    for &s in g.letters() {
        let side = model.top_side(s).expect("free product generator");
        match out.last_mut() {
            Some((last, run)) if *last == side => run.push(s),
            _ => out.push((side, vec![s])),
        }
    }
    out
}

/// Conjugates away matching first/last syllables until the cyclic syllable
/// form is reached.
fn cyclic_syllable_form(model: &GroupModel, g: &Element) -> Element {
    let mut cur = g.clone();
    loop {
        let syl = syllables(model, &cur);
        if syl.len() < 2 || syl[0].0 != syl[syl.len() - 1].0 {
            return cur;
        }
        // first⁻¹ · g · first merges the first syllable into the last.
        let first = model.normalize(&syl[0].1);
        cur = model.conjugate(&model.inverse(&first), &cur);
    }
}

pub fn classify_free_product(model: &GroupModel, g: &Element) -> Result<FreeProductClass> {
    require(model, ModelKind::FreeProduct)?;
    let red = cyclic_syllable_form(model, g);
    let syl = syllables(model, &red);
    Ok(match syl.len() {
        0 => FreeProductClass::Identity,
        1 => FreeProductClass::ConjugateIntoFactor {
            side: syl[0].0,
            torsion: model.element_order(&red).is_some(),
        },
        _ => FreeProductClass::Hyperbolic,
    })
}

/// Shuffle-cancels across the wrap point until no letter at the front has
/// its inverse available at the back.
pub fn raag_cyclic_reduce(model: &GroupModel, g: &Element) -> Element {
    let mut cur = g.clone();
    'outer: loop {
        for s in 0..model.num_generators() as Gen {
            let x = model.generator(s);
            let c = model.conjugate(&model.inverse(&x), &cur);
            if c.len() < cur.len() {
                cur = c;
                continue 'outer;
            }
        }
        return cur;
    }
}

/// Vertex support of an element, as a bit mask over RAAG vertices.
pub fn raag_support(model: &GroupModel, g: &Element) -> u64 {
    g.letters()
        .iter()
        .fold(0u64, |m, &s| m | 1 << model.raag_vertex(s))
}

/// `JoinBound` iff the support of the cyclically reduced form lies in some
/// join subgraph. The identity (empty support) is `JoinBound` by convention.
pub fn classify_raag(model: &GroupModel, g: &Element) -> Result<RaagClass> {
    require(model, ModelKind::Raag)?;
    let red = raag_cyclic_reduce(model, g);
    let support = raag_support(model, &red);
    let inside_join = support == 0 || model.raag_joins().iter().any(|&j| j & support == support);
    Ok(if inside_join {
        RaagClass::JoinBound
    } else {
        RaagClass::Rank1Candidate
    })
}

/// Maximal join subgraphs as vertex-name lists.
pub fn raag_join_subgraphs(model: &GroupModel) -> Result<Vec<Vec<String>>> {
    require(model, ModelKind::Raag)?;
    let names = model.raag_vertex_names();
    Ok(model
        .raag_joins()
        .iter()
        .map(|&j| {
            (0..names.len())
                .filter(|&i| j & (1 << i) != 0)
                .map(|i| names[i].clone())
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    #[test]
    fn free_product_examples() {
        let m = GroupModel::build(&GroupSpec::free_product(
            GroupSpec::cyclic(2),
            GroupSpec::cyclic(3),
        ))
        .unwrap();
        let g = m.parse_element("b.a.B").unwrap();
        assert_eq!(
            classify_free_product(&m, &g).unwrap(),
            FreeProductClass::ConjugateIntoFactor {
                side: Side::Left,
                torsion: true
            }
        );
        let ab = m.parse_element("a.b").unwrap();
        assert_eq!(classify_free_product(&m, &ab).unwrap(), FreeProductClass::Hyperbolic);
        assert_eq!(
            classify_free_product(&m, &m.identity()).unwrap(),
            FreeProductClass::Identity
        );
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let m = GroupModel::build(&GroupSpec::free(2)).unwrap();
        assert!(matches!(
            classify_free_product(&m, &m.identity()),
            Err(Error::WrongModelKind { .. })
        ));
        assert!(classify_raag(&m, &m.identity()).is_err());
    }

    #[test]
    fn raag_examples() {
        let square = GroupSpec::raag(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
        );
        let m = GroupModel::build(&square).unwrap();
        let ac = m.parse_element("a.c").unwrap();
        assert_eq!(classify_raag(&m, &ac).unwrap(), RaagClass::JoinBound);
        assert_eq!(classify_raag(&m, &m.identity()).unwrap(), RaagClass::JoinBound);

        let f2 = GroupModel::build(&GroupSpec::raag(&["a", "b"], &[])).unwrap();
        let ab = f2.parse_element("a.b").unwrap();
        assert_eq!(classify_raag(&f2, &ab).unwrap(), RaagClass::Rank1Candidate);
        // a conjugate of a single vertex is join-free in support only after reduction
        let conj = f2.parse_element("b.a.B").unwrap();
        assert_eq!(raag_support(&f2, &raag_cyclic_reduce(&f2, &conj)), 0b01);
    }
}

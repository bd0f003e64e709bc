//! Admissible paths: (LL1)/(LL2)/(BP) checks, the uniform variant, fellow
//! travelling, quasi-geodesic constants and the extension map.

use std::collections::HashMap;
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    estimate_contraction_constant, intersection_diameter, proj_diameter, AxisSegment, ContractionBudget,
    ContractionEstimate, PointSet,
};
use crate::group::{geodesics_between, is_geodesic, Caps, Element, Gen, GroupModel};

/// A marked geodesic subpath `p_i`, given by vertex positions `start..end` of
/// the path (vertex `k` is the prefix of length `k`), with its contracting set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marked {
    pub range: Range<usize>,
    pub set: PointSet,
}

/// How the "bounded intersection" disjunct of (LL2) is measured:
/// `diam(N_r(X_i) ∩ N_r(X_{i+1})) ≤ slope·r` for every listed `r`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct IntersectionRule {
    pub radii: Vec<usize>,
    pub slope: f64,
}

impl Default for IntersectionRule {
    fn default() -> Self {
        IntersectionRule {
            radii: vec![1, 2],
            slope: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleDecomposition {
    /// Path from the basepoint.
    pub path: Vec<Gen>,
    pub marked: Vec<Marked>,
    pub d: f64,
    pub tau: f64,
    /// `(L, Δ)` of the uniform variant.
    pub uniform: Option<(f64, f64)>,
    pub intersection: IntersectionRule,
}

impl AdmissibleDecomposition {
    pub fn new(path: Vec<Gen>, marked: Vec<Marked>, d: f64, tau: f64) -> Self {
        AdmissibleDecomposition {
            path,
            marked,
            d,
            tau,
            uniform: None,
            intersection: IntersectionRule::default(),
        }
    }

    pub fn with_uniform(mut self, l: f64, delta: f64) -> Self {
        self.uniform = Some((l, delta));
        self
    }

    /// Vertices `o, s_1, s_1 s_2, …` of the path.
    pub fn vertices(&self, model: &GroupModel) -> Vec<Element> {
        path_vertices(model, &Element::identity(), &self.path)
    }

    /// Checks the structural invariants: ordered disjoint ranges, geodesic
    /// subwords, endpoints in their sets.
    pub fn validate(&self, model: &GroupModel) -> Result<()> {
        if self.path.iter().any(|&s| !model.is_valid_gen(s)) {
            return Err(Error::Malformed("invalid generator in path".into()));
        }
        let v = self.vertices(model);
        let mut last_end = 0;
        for (i, m) in self.marked.iter().enumerate() {
            if m.range.start > m.range.end || m.range.end > self.path.len() {
                return Err(Error::Malformed(format!("subpath {i} is out of range")));
            }
            if m.range.start < last_end {
                return Err(Error::Malformed(format!("subpath {i} overlaps or is out of order")));
            }
            last_end = m.range.end;
            if !is_geodesic(model, &self.path[m.range.clone()]) {
                return Err(Error::Malformed(format!("subpath {i} is not geodesic")));
            }
            if !m.set.contains(&v[m.range.start]) || !m.set.contains(&v[m.range.end]) {
                return Err(Error::Malformed(format!("subpath {i} endpoints are not in X_{i}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self, model: &GroupModel) -> serde_json::Value {
        serde_json::json!({
            "path": model.format_word(&self.path),
            "marked": self.marked.iter().map(|m| serde_json::json!({
                "start": m.range.start,
                "end": m.range.end,
                "set": m.set.label(),
            })).collect::<Vec<_>>(),
            "d": self.d,
            "tau": self.tau,
            "uniform": self.uniform,
        })
    }
}

pub fn path_vertices(model: &GroupModel, start: &Element, w: &[Gen]) -> Vec<Element> {
    let mut v = Vec::with_capacity(w.len() + 1);
    v.push(start.clone());
    for &s in w {
        let next = model.mul_gen(v.last().unwrap(), s);
        v.push(next);
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ll1Status {
    Pass,
    /// Touches an endpoint of the path, where short subpaths are allowed.
    Exempt,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BpValue {
    /// `d^π_{X_i}((p_{i-1})_+, (p_i)_-)`.
    pub entry: usize,
    /// `d^π_{X_i}((p_i)_+, (p_{i+1})_-)`.
    pub exit: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ll2Disjunct {
    BoundedIntersection,
    Gap,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ll2Value {
    pub gap: usize,
    /// `(r, diam(N_r(X_i) ∩ N_r(X_{i+1})))`; `None` for empty intersections.
    pub intersections: Vec<(usize, Option<usize>)>,
    pub holds: Ll2Disjunct,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub ll1: Vec<Ll1Status>,
    pub bp: Vec<BpValue>,
    pub ll2: Vec<Ll2Value>,
    pub verdict: bool,
    pub flags: Vec<String>,
}

pub fn check_admissible(model: &GroupModel, dec: &AdmissibleDecomposition) -> Result<AdmissibilityReport> {
    dec.validate(model)?;
    let v = dec.vertices(model);
    let n = dec.path.len();
    let mut flags = Vec::new();
    if dec.marked.is_empty() {
        flags.push("no contracting subsets".to_string());
    }
    let ll1: Vec<Ll1Status> = dec
        .marked
        .iter()
        .map(|m| {
            if m.range.start == 0 || m.range.end == n {
                Ll1Status::Exempt
            } else if (m.range.len() as f64) > dec.d {
                Ll1Status::Pass
            } else {
                Ll1Status::Fail
            }
        })
        .collect();
    let k = dec.marked.len();
    let bp: Vec<BpValue> = (0..k)
        .map(|i| {
            let m = &dec.marked[i];
            // (p_{-1})_+ = γ_- and (p_{k})_- = γ_+.
            let prev_exit = if i == 0 { &v[0] } else { &v[dec.marked[i - 1].range.end] };
            let next_entry = if i + 1 == k { &v[n] } else { &v[dec.marked[i + 1].range.start] };
            let entry = proj_diameter(
                model,
                &m.set,
                &PointSet::singleton(prev_exit.clone()),
                &PointSet::singleton(v[m.range.start].clone()),
            );
            let exit = proj_diameter(
                model,
                &m.set,
                &PointSet::singleton(v[m.range.end].clone()),
                &PointSet::singleton(next_entry.clone()),
            );
            BpValue {
                entry,
                exit,
                pass: entry as f64 <= dec.tau && exit as f64 <= dec.tau,
            }
        })
        .collect();
    let mut ll2 = Vec::new();
    for i in 0..k.saturating_sub(1) {
        let (a, b) = (&dec.marked[i], &dec.marked[i + 1]);
        let gap = model.distance(&v[a.range.end], &v[b.range.start]);
        let mut intersections = Vec::new();
        for &r in &dec.intersection.radii {
            intersections.push((r, intersection_diameter(model, &a.set, &b.set, r)?));
        }
        let bounded = intersections
            .iter()
            .all(|&(r, d)| d.is_none_or(|d| d as f64 <= dec.intersection.slope * r as f64));
        let holds = if bounded {
            Ll2Disjunct::BoundedIntersection
        } else if gap as f64 > dec.d {
            Ll2Disjunct::Gap
        } else {
            Ll2Disjunct::Neither
        };
        ll2.push(Ll2Value {
            gap,
            intersections,
            holds,
        });
    }
    let verdict = ll1.iter().all(|s| *s != Ll1Status::Fail)
        && bp.iter().all(|b| b.pass)
        && ll2.iter().all(|l| l.holds != Ll2Disjunct::Neither);
    Ok(AdmissibilityReport {
        ll1,
        bp,
        ll2,
        verdict,
        flags,
    })
}

/// `|d((p_{i+1})_-, (p_i)_+) − L| ≤ Δ` for each consecutive pair.
pub fn check_uniform(model: &GroupModel, dec: &AdmissibleDecomposition) -> Result<bool> {
    let (l, delta) = dec.uniform.ok_or(Error::MissingUniform)?;
    dec.validate(model)?;
    let v = dec.vertices(model);
    Ok(dec.marked.windows(2).all(|w| {
        let gap = model.distance(&v[w[0].range.end], &v[w[1].range.start]) as f64;
        (gap - l).abs() <= delta
    }))
}

/// Minimal `ε` such that linearly ordered points on `geodesic` lie within `ε`
/// of `(p_0)_-, (p_0)_+, (p_1)_-, …` in turn. Minimax dynamic programming over
/// vertex positions.
pub fn fellow_travel_offset(model: &GroupModel, geodesic: &[Gen], dec: &AdmissibleDecomposition) -> Result<f64> {
    let v = dec.vertices(model);
    let alpha = path_vertices(model, &Element::identity(), geodesic);
    if alpha.last() != v.last() {
        return Err(Error::EndpointMismatch);
    }
    let targets: Vec<&Element> = dec
        .marked
        .iter()
        .flat_map(|m| [&v[m.range.start], &v[m.range.end]])
        .collect();
    if targets.is_empty() {
        return Ok(0.0);
    }
    let mut best: Vec<usize> = vec![0; alpha.len()];
    for (k, t) in targets.iter().enumerate() {
        let mut running = usize::MAX;
        for (j, a) in alpha.iter().enumerate() {
            let prev = if k == 0 { 0 } else { best[j] };
            running = running.min(prev);
            best[j] = running.max(model.distance(a, t));
        }
    }
    Ok(*best.iter().min().unwrap() as f64)
}

/// Smallest `c` on the 0.25 grid with `len(β) ≤ c·d(β_-, β_+) + c` for every
/// contiguous subword `β`, and at least 1.
pub fn quasi_geodesic_constant(model: &GroupModel, path: &[Gen]) -> f64 {
    let mut worst: f64 = 1.0;
    for i in 0..path.len() {
        let mut nf = Vec::new();
        for (j, &s) in path[i..].iter().enumerate() {
            model.push_gen(&mut nf, s);
            let ratio = (j + 1) as f64 / (nf.len() + 1) as f64;
            worst = worst.max(ratio);
        }
    }
    (worst * 4.0 - 1e-9).ceil() / 4.0
}

/// Contraction estimate for the saturation: the union of the `X_i` together
/// with the path vertices outside the marked subpaths.
pub fn saturation_contraction(
    model: &GroupModel,
    dec: &AdmissibleDecomposition,
    budget: &ContractionBudget,
    caps: &Caps,
) -> Result<ContractionEstimate> {
    let report = check_admissible(model, dec)?;
    if !report.verdict {
        return Err(Error::Precondition("decomposition is not admissible".into()));
    }
    if dec.uniform.is_some() && !check_uniform(model, dec)? {
        return Err(Error::Precondition("uniform gap condition fails".into()));
    }
    let v = dec.vertices(model);
    let mut pts: Vec<Element> = dec.marked.iter().flat_map(|m| m.set.points().to_vec()).collect();
    for (k, p) in v.iter().enumerate() {
        if !dec.marked.iter().any(|m| m.range.contains(&k) || m.range.end == k) {
            pts.push(p.clone());
        }
    }
    let sat = PointSet::new(pts, Some("saturation".into()))?;
    estimate_contraction_constant(model, &sat, budget, caps)
}

/// Whether every geodesic between the path endpoints meets `N_C(X_i)` for
/// each marked set (capped geodesic stream).
pub fn geodesics_meet_sets(model: &GroupModel, dec: &AdmissibleDecomposition, c: usize, cap: usize) -> bool {
    let end = model.normalize(&dec.path);
    let stream = geodesics_between(model, &Element::identity(), &end, cap);
    stream.words.iter().all(|w| {
        let alpha = path_vertices(model, &Element::identity(), &w.0);
        dec.marked.iter().all(|m| {
            alpha
                .iter()
                .any(|a| m.set.points().iter().any(|x| model.distance(a, x) <= c))
        })
    })
}

/// Searches `F` (ShortLex order of the axis generators) for `f` making
/// `o → g → g·f → g·f·h`, with the middle leg marked on `g·Ax(f)`, admissible.
pub fn extension_concat(
    model: &GroupModel,
    g: &Element,
    h: &Element,
    family: &[AxisSegment],
    d: f64,
    tau: f64,
) -> Result<Option<(Element, AdmissibleDecomposition)>> {
    let mut order: Vec<&AxisSegment> = family.iter().collect();
    order.sort_by(|a, b| a.generator.cmp(&b.generator));
    for axis in order {
        let f = &axis.generator;
        let mut path = g.letters().to_vec();
        path.extend_from_slice(f.letters());
        path.extend_from_slice(h.letters());
        let range = g.len()..g.len() + f.len();
        let set = axis.points.translate(model, g);
        let dec = AdmissibleDecomposition::new(path, vec![Marked { range, set }], d, tau);
        if check_admissible(model, &dec)?.verdict {
            return Ok(Some((f.clone(), dec)));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeOutcome {
    Pass { images: usize },
    /// Two distinct words with the same image (lexicographically least pair).
    Collision { first: Vec<usize>, second: Vec<usize>, image: Element },
    /// No extension element worked between two consecutive letters.
    NoExtension { left: usize, right: usize },
}

/// Builds `Φ(b_1 ⋯ b_k) = b_1 f_1 b_2 f_2 ⋯ f_{k−1} b_k` for every word of
/// length `≤ word_len` over `B` and checks the images are pairwise distinct.
pub fn extension_injectivity_probe(
    model: &GroupModel,
    letters: &[Element],
    family: &[AxisSegment],
    d: f64,
    tau: f64,
    word_len: usize,
    caps: &Caps,
) -> Result<ProbeOutcome> {
    for i in 0..letters.len() {
        if letters[i + 1..].contains(&letters[i]) {
            return Err(Error::DuplicateLetters);
        }
    }
    let b = letters.len() as u64;
    let total: u64 = (0..=word_len as u32).map(|k| b.saturating_pow(k)).sum();
    if total > caps.max_retained {
        return Err(Error::Budget(crate::error::BudgetExceeded {
            what: "extension probe words".into(),
            limit: caps.max_retained,
            partial_counts: Vec::new(),
        }));
    }
    // Extension element for each ordered letter pair.
    let mut ext: HashMap<(usize, usize), Element> = HashMap::new();
    for i in 0..letters.len() {
        for j in 0..letters.len() {
            if word_len < 2 {
                continue;
            }
            match extension_concat(model, &letters[i], &letters[j], family, d, tau)? {
                Some((f, _)) => {
                    ext.insert((i, j), f);
                }
                None => return Ok(ProbeOutcome::NoExtension { left: i, right: j }),
            }
        }
    }
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..word_len {
        layer = layer
            .iter()
            .flat_map(|w| {
                (0..letters.len()).map(move |i| {
                    let mut n = w.clone();
                    n.push(i);
                    n
                })
            })
            .collect();
        words.extend(layer.iter().cloned());
    }
    let images: Vec<Element> = words
        .par_iter()
        .map(|w| {
            let mut g = Element::identity();
            for (k, &i) in w.iter().enumerate() {
                if k > 0 {
                    g = model.multiply(&g, &ext[&(w[k - 1], i)]);
                }
                g = model.multiply(&g, &letters[i]);
            }
            g
        })
        .collect();
    let mut seen: HashMap<&Element, usize> = HashMap::new();
    let mut collision: Option<(usize, usize)> = None;
    for (k, img) in images.iter().enumerate() {
        if let Some(&first) = seen.get(img) {
            let cand = (first, k);
            if collision.is_none_or(|c| cand < c) {
                collision = Some(cand);
            }
        } else {
            seen.insert(img, k);
        }
    }
    Ok(match collision {
        Some((a, b)) => ProbeOutcome::Collision {
            first: words[a].clone(),
            second: words[b].clone(),
            image: images[a].clone(),
        },
        None => ProbeOutcome::Pass { images: images.len() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_axis;
    use crate::group::GroupSpec;

    fn f2() -> GroupModel {
        GroupModel::build(&GroupSpec::free(2)).unwrap()
    }

    /// `a^D · b · a^D` with both legs marked on their `⟨a⟩` cosets.
    fn two_axis(m: &GroupModel, d: usize) -> AdmissibleDecomposition {
        let a = m.parse_element("a").unwrap();
        let axis = build_axis(m, &a, d + 2, &[]).unwrap().points;
        let mut path = vec![m.gen_by_name("a").unwrap(); d];
        path.push(m.gen_by_name("b").unwrap());
        path.extend(vec![m.gen_by_name("a").unwrap(); d]);
        let shift = m.normalize(&path[..=d]);
        AdmissibleDecomposition::new(
            path,
            vec![
                Marked { range: 0..d, set: axis.clone() },
                Marked { range: d + 1..2 * d + 1, set: axis.translate(m, &shift) },
            ],
            d as f64,
            2.0,
        )
    }

    #[test]
    fn two_axis_example_is_admissible() {
        let m = f2();
        let dec = two_axis(&m, 4);
        let r = check_admissible(&m, &dec).unwrap();
        assert!(r.verdict, "{r:?}");
        assert_eq!(fellow_travel_offset(&m, &dec.path, &dec).unwrap(), 0.0);
        assert_eq!(quasi_geodesic_constant(&m, &dec.path), 1.0);
        assert!(check_uniform(&m, &dec.clone().with_uniform(1.0, 0.0)).unwrap());
        assert!(!check_uniform(&m, &dec.clone().with_uniform(3.0, 1.0)).unwrap());
        assert_eq!(check_uniform(&m, &dec), Err(Error::MissingUniform));
    }

    #[test]
    fn interior_short_subpath_fails_ll1() {
        let m = f2();
        let a = m.parse_element("a").unwrap();
        let axis = build_axis(&m, &a, 8, &[]).unwrap().points;
        let path = m.parse_word("b.a.a.a.a.b.a.a.a.a.b").unwrap().0;
        let s1 = m.normalize(&path[..1]);
        let s2 = m.normalize(&path[..6]);
        let dec = AdmissibleDecomposition::new(
            path,
            vec![
                Marked { range: 1..5, set: axis.translate(&m, &s1) },
                Marked { range: 6..10, set: axis.translate(&m, &s2) },
            ],
            5.0,
            2.0,
        );
        let r = check_admissible(&m, &dec).unwrap();
        assert_eq!(r.ll1, vec![Ll1Status::Fail, Ll1Status::Fail]);
        assert!(!r.verdict);
    }

    #[test]
    fn empty_decomposition_is_flagged() {
        let m = f2();
        let dec = AdmissibleDecomposition::new(vec![0, 0], vec![], 3.0, 1.0);
        let r = check_admissible(&m, &dec).unwrap();
        assert!(r.verdict);
        assert_eq!(r.flags, vec!["no contracting subsets".to_string()]);
    }

    #[test]
    fn quasi_geodesic_examples() {
        let m = f2();
        assert_eq!(quasi_geodesic_constant(&m, &m.parse_word("a.A").unwrap().0), 2.0);
        assert_eq!(quasi_geodesic_constant(&m, &m.parse_word("a.A.a.A.a.A").unwrap().0), 6.0);
        assert_eq!(quasi_geodesic_constant(&m, &m.parse_word("a.b.a").unwrap().0), 1.0);
    }

    #[test]
    fn extension_examples() {
        let m = f2();
        let a4 = m.parse_element("a.a.a.a").unwrap();
        let fam = vec![build_axis(&m, &a4, 3, &[]).unwrap()];
        let b3 = m.parse_element("b.b.b").unwrap();
        let got = extension_concat(&m, &b3, &b3, &fam, 3.0, 2.0).unwrap();
        assert_eq!(got.map(|g| g.0), Some(a4.clone()));
        let e = Element::identity();
        assert!(extension_concat(&m, &e, &e, &fam, 3.0, 2.0).unwrap().is_some());
        let a_4 = m.inverse(&a4);
        assert!(extension_concat(&m, &a4, &a_4, &fam, 3.0, 2.0).unwrap().is_none());
    }

    #[test]
    fn injectivity_probe() {
        let m = f2();
        let a4 = m.parse_element("a.a.a.a").unwrap();
        let fam = vec![build_axis(&m, &a4, 3, &[]).unwrap()];
        let b3 = m.parse_element("b.b.b").unwrap();
        let letters = vec![b3.clone(), m.inverse(&b3)];
        let out = extension_injectivity_probe(&m, &letters, &fam, 3.0, 2.0, 3, &Caps::default()).unwrap();
        assert_eq!(out, ProbeOutcome::Pass { images: 15 });
        let e = Element::identity();
        assert_eq!(
            extension_injectivity_probe(&m, &[e.clone(), e], &fam, 3.0, 2.0, 3, &Caps::default()),
            Err(Error::DuplicateLetters)
        );
        let zero = extension_injectivity_probe(&m, &letters, &fam, 3.0, 2.0, 0, &Caps::default()).unwrap();
        assert_eq!(zero, ProbeOutcome::Pass { images: 1 });
    }
}

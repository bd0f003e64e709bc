//! Barriers along geodesics, barrier-free elements, the concave region and
//! the `K_{M,D}` / `P_{D,C}` classifiers.

use serde::Serialize;

use crate::census::CensusTable;
use crate::error::{Error, Result};
use crate::geometry::{contraction_verdict, ContractionBudget, PointSet};
use crate::group::conjugacy::class_key;
use crate::group::{enumerate_ball, for_each_sphere, geodesics_between, is_geodesic, Caps, Element, Gen, GroupModel};
use crate::paths::path_vertices;

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierQuery {
    pub epsilon: f64,
    pub big_m: f64,
    /// The barrier element, already raised to any requested power.
    pub f: Element,
}

impl BarrierQuery {
    pub fn new(model: &GroupModel, epsilon: f64, big_m: f64, f: &Element, power: Option<u32>) -> Result<Self> {
        if !(epsilon >= 0.0 && big_m >= 0.0) {
            return Err(Error::InvalidSpec("epsilon and M must be non-negative".into()));
        }
        let f = match power {
            Some(p) => {
                if model.element_order(f).is_some() {
                    return Err(Error::Torsion(model.format(f)));
                }
                model.pow(f, p as i64)
            }
            None => f.clone(),
        };
        Ok(BarrierQuery { epsilon, big_m, f })
    }

    fn eps_radius(&self) -> usize {
        self.epsilon.floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BarrierWitness {
    pub h: Element,
    /// `(d(h·o, γ), d(h·f·o, γ))`.
    pub attained: (usize, usize),
}

fn dist_to_path(model: &GroupModel, y: &Element, path: &[Element]) -> usize {
    path.iter().map(|v| model.distance(y, v)).min().unwrap()
}

/// ShortLex-least `h` with `h·o` and `h·f·o` both within `ε` of the geodesic
/// `γ` (given by its start and word). The search region `⋃ v·B(ε)` over
/// vertices `v` of `γ` is complete, so `None` is exact.
pub fn find_barrier(
    model: &GroupModel,
    start: &Element,
    gamma: &[Gen],
    q: &BarrierQuery,
) -> Result<Option<BarrierWitness>> {
    let verts = path_vertices(model, start, gamma);
    find_barrier_on(model, &verts, q)
}

fn find_barrier_on(model: &GroupModel, verts: &[Element], q: &BarrierQuery) -> Result<Option<BarrierWitness>> {
    let r = q.eps_radius();
    if r == 0 {
        // Only the vertices themselves are candidates.
        let mut best: Option<BarrierWitness> = None;
        for h in verts {
            let hf = model.multiply(h, &q.f);
            if verts.contains(&hf) && best.as_ref().is_none_or(|b| *h < b.h) {
                best = Some(BarrierWitness {
                    h: h.clone(),
                    attained: (0, 0),
                });
            }
        }
        return Ok(best);
    }
    let ball = enumerate_ball(model, r, &Caps::default())?;
    let offsets: Vec<Element> = ball.elements().collect();
    let mut cands: Vec<Element> = verts
        .iter()
        .flat_map(|v| offsets.iter().map(move |b| model.multiply(v, b)))
        .collect();
    cands.sort();
    cands.dedup();
    for h in cands {
        let d1 = dist_to_path(model, &h, verts);
        if d1 as f64 > q.epsilon {
            continue;
        }
        let d2 = dist_to_path(model, &model.multiply(&h, &q.f), verts);
        if d2 as f64 <= q.epsilon {
            return Ok(Some(BarrierWitness { h, attained: (d1, d2) }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BarrierFreeVerdict {
    pub barrier_free: bool,
    /// A barrier-free geodesic: its start and word.
    pub certificate: Option<(Element, Vec<Gen>)>,
    /// Barrier on the canonical geodesic `[o, g]` (ShortLex normal form).
    pub canonical_witness: Option<BarrierWitness>,
    pub geodesics_examined: u64,
    /// Some geodesic stream hit its cap, so a `false` verdict is budget-relative.
    pub truncated: bool,
}

/// Is there a barrier-free geodesic between some `x ∈ B(o, M)` and some
/// `y ∈ B(g·o, M)`?
pub fn is_barrier_free_element(
    model: &GroupModel,
    g: &Element,
    q: &BarrierQuery,
    caps: &Caps,
) -> Result<BarrierFreeVerdict> {
    let canonical_witness = find_barrier(model, &Element::identity(), g.letters(), q)?;
    if canonical_witness.is_none() {
        return Ok(BarrierFreeVerdict {
            barrier_free: true,
            certificate: Some((Element::identity(), g.letters().to_vec())),
            canonical_witness: None,
            geodesics_examined: 1,
            truncated: false,
        });
    }
    let m = q.big_m.floor() as usize;
    let ball: Vec<Element> = enumerate_ball(model, m, caps)?.elements().collect();
    let mut examined = 1;
    let mut truncated = false;
    for x in &ball {
        for b in &ball {
            let y = model.multiply(g, b);
            let stream = geodesics_between(model, x, &y, caps.max_geodesics);
            truncated |= stream.truncated;
            for w in stream.words {
                examined += 1;
                if find_barrier(model, x, &w.0, q)?.is_none() {
                    return Ok(BarrierFreeVerdict {
                        barrier_free: true,
                        certificate: Some((x.clone(), w.0)),
                        canonical_witness,
                        geodesics_examined: examined,
                        truncated,
                    });
                }
            }
        }
    }
    Ok(BarrierFreeVerdict {
        barrier_free: false,
        certificate: None,
        canonical_witness,
        geodesics_examined: examined,
        truncated,
    })
}

/// Per-sphere counts of `V_{ε,M,f} ∩ N(o, n)`.
pub fn enumerate_v(model: &GroupModel, n: usize, q: &BarrierQuery, caps: &Caps) -> Result<CensusTable> {
    let mut spheres = Vec::new();
    for_each_sphere(model, n, caps, |sphere| {
        let parts = sphere.par_map_partitions(|range| -> Result<u64> {
            let mut c = 0;
            for i in range {
                if is_barrier_free_element(model, &sphere.element(i), q, caps)?.barrier_free {
                    c += 1;
                }
            }
            Ok(c)
        });
        let filtered = parts.into_iter().sum::<Result<u64>>()?;
        spheres.push((sphere.len() as u64, filtered));
        Ok(())
    })?;
    Ok(CensusTable::from_spheres(
        &spheres,
        format!("V(eps={},M={},f={})", q.epsilon, q.big_m, model.format(&q.f)),
        model.label(),
    ))
}

/// Orbit used by `K_{M,D}`, `P_{D,C}` and the concave region: the full orbit
/// `G·o` (every vertex of a Cayley graph) or a designated finite sub-orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Orbit {
    All,
    Designated(PointSet),
}

impl Orbit {
    pub fn distance(&self, model: &GroupModel, v: &Element) -> usize {
        match self {
            Orbit::All => 0,
            Orbit::Designated(x) => x.points().iter().map(|p| model.distance(v, p)).min().unwrap(),
        }
    }
}

/// Elements of `O_{M1,M2} ∩ N(o, n)`: some geodesic between `B(o, M2)` and
/// `B(g·o, M2)` has a nonempty interior lying outside `N_{M1}(orbit)`.
pub fn concave_region(
    model: &GroupModel,
    orbit: &Orbit,
    m1: usize,
    m2: usize,
    n: usize,
    caps: &Caps,
) -> Result<Vec<Element>> {
    if *orbit == Orbit::All {
        return Ok(Vec::new());
    }
    let ball: Vec<Element> = enumerate_ball(model, m2, caps)?.elements().collect();
    let mut out = Vec::new();
    for g in enumerate_ball(model, n, caps)?.elements() {
        let hit = ball.iter().any(|x| {
            ball.iter().any(|b| {
                let y = model.multiply(&g, b);
                let stream = geodesics_between(model, x, &y, caps.max_geodesics);
                stream.words.iter().any(|w| {
                    let v = path_vertices(model, x, &w.0);
                    v.len() > 2 && v[1..v.len() - 1].iter().all(|p| orbit.distance(model, p) > m1)
                })
            })
        });
        if hit {
            out.push(g);
        }
    }
    Ok(out)
}

/// Flags raised by the literal `K`/`P` evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Vacuity {
    None,
    /// The geodesic is shorter than `D`, so there is no window to test.
    ShorterThanD,
}

/// `g ∈ K_{M,D}`: no length-`D` window of the canonical geodesic `[o, g]`
/// lies inside `N_M(orbit)`.
pub fn in_k(model: &GroupModel, g: &Element, m: usize, d: usize, orbit: &Orbit) -> (bool, Vacuity) {
    let v = path_vertices(model, &Element::identity(), g.letters());
    if g.len() < d {
        return (true, Vacuity::ShorterThanD);
    }
    let outside: Vec<bool> = v.iter().map(|p| orbit.distance(model, p) > m).collect();
    let ok = (0..=g.len() - d).all(|i| outside[i..=i + d].iter().any(|&o| o));
    (ok, Vacuity::None)
}

/// `g ∈ P_{D,C}`: every length-`D` window of the geodesic inside `N_M(orbit)`
/// fails the contraction test at constant `C`. Windows are translated to the
/// basepoint so the budgeted ball is centred on them. `geodesic` overrides the
/// canonical ShortLex geodesic.
#[allow(clippy::too_many_arguments)]
pub fn is_d_local_c_noncontracting(
    model: &GroupModel,
    g: &Element,
    geodesic: Option<&[Gen]>,
    d: usize,
    c: f64,
    m: usize,
    orbit: &Orbit,
    budget: &ContractionBudget,
    caps: &Caps,
) -> Result<(bool, Vacuity)> {
    let word = geodesic.unwrap_or(g.letters());
    if model.normalize(word) != *g || !is_geodesic(model, word) {
        return Err(Error::Precondition("word is not a geodesic for the element".into()));
    }
    if word.len() < d {
        return Ok((true, Vacuity::ShorterThanD));
    }
    let v = path_vertices(model, &Element::identity(), word);
    for i in 0..=word.len() - d {
        let window = &v[i..=i + d];
        if window.iter().any(|p| orbit.distance(model, p) > m) {
            continue;
        }
        let back = model.inverse(&window[0]);
        let set = PointSet::new(window.iter().map(|p| model.multiply(&back, p)), None)?;
        if contraction_verdict(model, &set, c, budget, caps)?.pass {
            return Ok((false, Vacuity::None));
        }
    }
    Ok((true, Vacuity::None))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum NcCase {
    /// `d(o, g·o) ≤ 4D`.
    Short,
    K,
    P,
    TrichotomyViolation { length: usize, in_k: bool, in_p: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrichotomyParams {
    pub m: usize,
    pub d: usize,
    pub c: f64,
    pub orbit: Orbit,
    pub budget: ContractionBudget,
}

/// Minimal conjugacy representatives fall in `P_{D,C}`, are short, or lie in
/// `K_{M,D}`. Cases are tried short-first, so vacuous `K` memberships of
/// short elements do not mask the length case.
pub fn classify_minimal_rep(
    model: &GroupModel,
    g: &Element,
    p: &TrichotomyParams,
    caps: &Caps,
) -> Result<NcCase> {
    let key = class_key(model, g);
    if key.min_length != g.len() {
        return Err(Error::NotMinimal {
            element: model.format(g),
            length: g.len(),
            class_length: key.min_length,
        });
    }
    if g.len() <= 4 * p.d {
        return Ok(NcCase::Short);
    }
    let (k, _) = in_k(model, g, p.m, p.d, &p.orbit);
    if k {
        return Ok(NcCase::K);
    }
    let (np, _) = is_d_local_c_noncontracting(model, g, None, p.d, p.c, p.m, &p.orbit, &p.budget, caps)?;
    if np {
        return Ok(NcCase::P);
    }
    Ok(NcCase::TrichotomyViolation {
        length: g.len(),
        in_k: k,
        in_p: np,
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

    fn q0(m: &GroupModel, f: &str) -> BarrierQuery {
        BarrierQuery::new(m, 0.0, 0.0, &m.parse_element(f).unwrap(), None).unwrap()
    }

    #[test]
    fn find_barrier_examples() {
        let m = f2();
        let q = q0(&m, "a.a.a");
        let w = m.parse_word("b.a.a.a.b").unwrap();
        let got = find_barrier(&m, &Element::identity(), &w.0, &q).unwrap().unwrap();
        assert_eq!(m.format(&got.h), "b");
        let b5 = m.parse_word("b.b.b.b.b").unwrap();
        assert_eq!(find_barrier(&m, &Element::identity(), &b5.0, &q).unwrap(), None);
        assert_eq!(find_barrier(&m, &Element::identity(), &[], &q).unwrap(), None);
    }

    #[test]
    fn barrier_free_examples() {
        let m = f2();
        let q = q0(&m, "a.a.a");
        let b5 = m.parse_element("b.b.b.b.b").unwrap();
        let v = is_barrier_free_element(&m, &b5, &q, &Caps::default()).unwrap();
        assert!(v.barrier_free);
        assert_eq!(v.certificate.unwrap().1, b5.letters().to_vec());
        let g = m.parse_element("b.a.a.a.b").unwrap();
        assert!(!is_barrier_free_element(&m, &g, &q, &Caps::default()).unwrap().barrier_free);
        assert!(is_barrier_free_element(&m, &Element::identity(), &q, &Caps::default()).unwrap().barrier_free);
    }

    #[test]
    fn enumerate_v_small() {
        let m = f2();
        let t = enumerate_v(&m, 1, &q0(&m, "a"), &Caps::default()).unwrap();
        assert_eq!(t.rows[0].sphere_filtered, 1);
        assert_eq!(t.rows[1].sphere_filtered, 2);
    }

    #[test]
    fn concave_region_examples() {
        let m = f2();
        let caps = Caps::default();
        assert!(concave_region(&m, &Orbit::All, 0, 0, 6, &caps).unwrap().is_empty());
        let a = m.parse_element("a").unwrap();
        let orbit = Orbit::Designated(build_axis(&m, &a, 8, &[]).unwrap().points);
        let region = concave_region(&m, &orbit, 1, 1, 3, &caps).unwrap();
        assert!(region.contains(&m.parse_element("b.b.b").unwrap()));
        assert!(concave_region(&m, &orbit, 1, 1, 0, &caps).unwrap().is_empty());
    }

    #[test]
    fn k_examples() {
        let m = f2();
        let g = m.parse_element("a.b.a").unwrap();
        assert!(!in_k(&m, &g, 0, 1, &Orbit::All).0);
        let a = m.parse_element("a").unwrap();
        let orbit = Orbit::Designated(build_axis(&m, &a, 6, &[]).unwrap().points);
        assert!(in_k(&m, &m.parse_element("b.b.b.b.b").unwrap(), 0, 2, &orbit).0);
        assert_eq!(in_k(&m, &Element::identity(), 0, 2, &orbit), (true, Vacuity::ShorterThanD));
    }

    #[test]
    fn trichotomy_short_cases() {
        let z = GroupModel::build(&GroupSpec::free_product(GroupSpec::cyclic(2), GroupSpec::cyclic(3))).unwrap();
        let p = TrichotomyParams {
            m: 0,
            d: 2,
            c: 1.0,
            orbit: Orbit::All,
            budget: ContractionBudget::Exhaustive { radius: 3 },
        };
        let caps = Caps::default();
        assert_eq!(classify_minimal_rep(&z, &z.parse_element("a").unwrap(), &p, &caps).unwrap(), NcCase::Short);
        assert_eq!(classify_minimal_rep(&z, &z.identity(), &p, &caps).unwrap(), NcCase::Short);
        assert!(matches!(
            classify_minimal_rep(&z, &z.parse_element("b.a.B").unwrap(), &p, &caps),
            Err(Error::NotMinimal { .. })
        ));
    }
}

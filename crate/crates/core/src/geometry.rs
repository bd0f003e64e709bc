//! Nearest-point projections, contraction testing, axes and quasi-isometric
//! embedding checks.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{enumerate_ball, Caps, Element, Gen, GroupModel};

/// A finite, nonempty set of elements (orbit points), kept ShortLex sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    points: Vec<Element>,
    label: Option<String>,
}

impl PointSet {
    pub fn new(points: impl IntoIterator<Item = Element>, label: Option<String>) -> Result<Self> {
        let mut points: Vec<Element> = points.into_iter().collect();
        points.sort();
        points.dedup();
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        Ok(PointSet { points, label })
    }

    pub fn singleton(g: Element) -> Self {
        PointSet {
            points: vec![g],
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn points(&self) -> &[Element] {
        &self.points
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.points.binary_search(g).is_ok()
    }

    pub fn index_of(&self, g: &Element) -> Option<usize> {
        self.points.binary_search(g).ok()
    }

    /// Left translate `g·X`.
    pub fn translate(&self, model: &GroupModel, g: &Element) -> PointSet {
        let label = self.label.as_ref().map(|l| format!("{}·{}", model.format(g), l));
        PointSet::new(self.points.iter().map(|x| model.multiply(g, x)), label).unwrap()
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        PointSet::new(self.points.iter().chain(other.points.iter()).cloned(), None).unwrap()
    }

    /// Closed `r`-neighborhood `N_r(X)`.
    pub fn neighborhood(&self, model: &GroupModel, r: usize) -> Result<PointSet> {
        let ball = enumerate_ball(model, r, &Caps::default())?;
        let offsets: Vec<Element> = ball.elements().collect();
        let pts = self
            .points
            .iter()
            .flat_map(|x| offsets.iter().map(move |b| (x, b)))
            .map(|(x, b)| model.multiply(x, b));
        PointSet::new(pts, None)
    }

    pub fn diameter(&self, model: &GroupModel) -> usize {
        diameter(model, &self.points)
    }

    pub fn format(&self, model: &GroupModel) -> Vec<String> {
        self.points.iter().map(|p| model.format(p)).collect()
    }
}

pub fn diameter(model: &GroupModel, pts: &[Element]) -> usize {
    let mut best = 0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            best = best.max(model.distance(a, b));
        }
    }
    best
}

pub fn dist_to_set(model: &GroupModel, y: &Element, x: &PointSet) -> usize {
    x.points.iter().map(|p| model.distance(y, p)).min().unwrap()
}

/// Set distance `d(A, B)`.
pub fn set_distance(model: &GroupModel, a: &[Element], b: &PointSet) -> usize {
    a.iter().map(|y| dist_to_set(model, y, b)).min().unwrap_or(usize::MAX)
}

/// Nearest-point projection `π_X(y)`: every point of `X` at minimal distance.
pub fn project(model: &GroupModel, y: &Element, x: &PointSet) -> PointSet {
    let (_, idx) = project_indices(model, y, x);
    PointSet {
        points: idx.into_iter().map(|i| x.points[i].clone()).collect(),
        label: None,
    }
}

fn project_indices(model: &GroupModel, y: &Element, x: &PointSet) -> (usize, Vec<usize>) {
    let mut best = usize::MAX;
    let mut idx = Vec::new();
    for (i, p) in x.points.iter().enumerate() {
        let d = model.distance(y, p);
        if d < best {
            best = d;
            idx.clear();
        }
        if d == best {
            idx.push(i);
        }
    }
    (best, idx)
}

/// `d^π_X(Z1, Z2) = diam(π_X(Z1 ∪ Z2))`.
pub fn proj_diameter(model: &GroupModel, x: &PointSet, z1: &PointSet, z2: &PointSet) -> usize {
    proj_diameter_of(model, x, z1.points.iter().chain(z2.points.iter()))
}

/// Diameter of the projection of an arbitrary finite collection of points.
pub fn proj_diameter_of<'a>(
    model: &GroupModel,
    x: &PointSet,
    pts: impl IntoIterator<Item = &'a Element>,
) -> usize {
    let mut idx = BTreeSet::new();
    for y in pts {
        idx.extend(project_indices(model, y, x).1);
    }
    let pts: Vec<Element> = idx.into_iter().map(|i| x.points[i].clone()).collect();
    diameter(model, &pts)
}

/// How geodesics are drawn for a contraction test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ContractionBudget {
    /// Every geodesic (including one-point ones) between two points of `B(o, radius)`.
    Exhaustive { radius: usize },
    /// Random pairs in `B(o, radius)` joined by a uniformly branching random geodesic.
    Sampled { radius: usize, samples: usize, seed: u64 },
}

impl ContractionBudget {
    pub fn radius(&self) -> usize {
        match self {
            ContractionBudget::Exhaustive { radius } | ContractionBudget::Sampled { radius, .. } => *radius,
        }
    }
}

/// A geodesic violating the contraction implication, replayable from the
/// start point and word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionWitness {
    pub start: Element,
    pub word: Vec<Gen>,
    pub distance_to_set: usize,
    /// Two projection points realizing the projection diameter.
    pub projection_pair: (Element, Element),
    pub projection_diameter: usize,
}

impl ContractionWitness {
    /// Vertices of the witness geodesic.
    pub fn vertices(&self, model: &GroupModel) -> Vec<Element> {
        let mut v = vec![self.start.clone()];
        for &s in &self.word {
            let next = model.mul_gen(v.last().unwrap(), s);
            v.push(next);
        }
        v
    }

    /// Recomputes the distance and projection diameter from scratch.
    pub fn recheck(&self, model: &GroupModel, x: &PointSet) -> (usize, usize) {
        let v = self.vertices(model);
        (
            set_distance(model, &v, x),
            proj_diameter_of(model, x, v.iter()),
        )
    }

    pub fn to_json(&self, model: &GroupModel) -> serde_json::Value {
        serde_json::json!({
            "start": model.format(&self.start),
            "word": model.format_word(&self.word),
            "distance_to_set": self.distance_to_set,
            "projection_pair": [model.format(&self.projection_pair.0), model.format(&self.projection_pair.1)],
            "projection_diameter": self.projection_diameter,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionVerdict {
    pub constant_tested: f64,
    pub pass: bool,
    pub witness: Option<ContractionWitness>,
    pub budget: ContractionBudget,
    /// Geodesic prefixes visited (exhaustive) or geodesics drawn (sampled).
    pub geodesics_examined: u64,
}

impl ContractionVerdict {
    pub fn to_json(&self, model: &GroupModel) -> serde_json::Value {
        serde_json::json!({
            "constant_tested": self.constant_tested,
            "result": if self.pass { "pass" } else { "fail" },
            "witness": self.witness.as_ref().map(|w| w.to_json(model)),
            "budget": self.budget,
            "geodesics_examined": self.geodesics_examined,
        })
    }
}

/// Projection data of `X` needed during a search: pairwise distances and a
/// per-vertex projection cache.
struct Projector<'a> {
    model: &'a GroupModel,
    x: &'a PointSet,
    pair: Vec<Vec<usize>>,
    ids: HashMap<Element, u32>,
    /// `(d(v, X), projection indices)` by vertex id.
    info: Vec<(usize, Vec<usize>)>,
}

impl<'a> Projector<'a> {
    fn new(model: &'a GroupModel, x: &'a PointSet, pair: Vec<Vec<usize>>) -> Self {
        Projector {
            model,
            x,
            pair,
            ids: HashMap::new(),
            info: Vec::new(),
        }
    }

    fn pairwise(model: &GroupModel, x: &PointSet) -> Vec<Vec<usize>> {
        let n = x.len();
        (0..n)
            .map(|i| (0..n).map(|j| model.distance(&x.points[i], &x.points[j])).collect())
            .collect()
    }

    /// Vertex id of `v`, computing its projection on first sight.
    fn id(&mut self, v: &Element) -> u32 {
        if let Some(&i) = self.ids.get(v) {
            return i;
        }
        let i = self.info.len() as u32;
        self.info.push(project_indices(self.model, v, self.x));
        self.ids.insert(v.clone(), i);
        i
    }

    fn project(&mut self, v: &Element) -> (usize, Vec<usize>) {
        let i = self.id(v);
        self.info[i as usize].clone()
    }
}

/// Running state along one geodesic prefix.
#[derive(Clone)]
struct Track {
    min_dist: usize,
    proj: Vec<usize>,
    diam: usize,
    pair: (usize, usize),
}

impl Track {
    fn extend(&self, pair: &[Vec<usize>], d: usize, new: &[usize]) -> Track {
        let mut t = self.clone();
        t.min_dist = t.min_dist.min(d);
        for &i in new {
            if t.proj.contains(&i) {
                continue;
            }
            for &j in &t.proj {
                if pair[i][j] > t.diam {
                    t.diam = pair[i][j];
                    t.pair = (j, i);
                }
            }
            t.proj.push(i);
        }
        t
    }

    fn violates(&self, c: f64) -> bool {
        self.min_dist as f64 >= c && self.diam as f64 > c
    }
}

fn witness_of(x: &PointSet, start: &Element, word: &[Gen], t: &Track) -> ContractionWitness {
    ContractionWitness {
        start: start.clone(),
        word: word.to_vec(),
        distance_to_set: t.min_dist,
        projection_pair: (x.points[t.pair.0].clone(), x.points[t.pair.1].clone()),
        projection_diameter: t.diam,
    }
}

/// Depth-first search over geodesics leaving `start`. A geodesic prefix is
/// abandoned once it comes within `C` of `X` (every extension then fails the
/// hypothesis) or once it can no longer end inside the ball.
fn search_from(
    proj: &mut Projector,
    start: &Element,
    c: f64,
    radius: usize,
    examined: &mut u64,
) -> Option<ContractionWitness> {
    let model = proj.model;
    let max_len = start.len() + radius;
    let (d0, p0) = proj.project(start);
    let root = Track {
        min_dist: usize::MAX,
        proj: Vec::new(),
        diam: 0,
        pair: (p0[0], p0[0]),
    }
    .extend(&proj.pair, d0, &p0);
    if (root.min_dist as f64) < c {
        *examined += 1;
        return None;
    }
    // (relative element, endpoint, track, next generator)
    let mut word: Vec<Gen> = Vec::new();
    let mut stack: Vec<(Element, Element, Track, usize)> =
        vec![(Element::identity(), start.clone(), root, 0)];
    let ngens = model.num_generators();
    // Extensions depend only on the endpoint and the track, so a prefix
    // reaching an already explored (endpoint, track) state cannot add a
    // witness. This keeps product-like Cayley graphs, with their many
    // interleaved geodesics, from blowing up.
    let mut explored: HashSet<(u32, usize, Vec<usize>)> = HashSet::new();
    let mut fresh = true;
    while let Some(top) = stack.last_mut() {
        if fresh {
            *examined += 1;
            fresh = false;
            if top.1.len() <= radius && top.2.violates(c) {
                return Some(witness_of(proj.x, start, &word, &top.2));
            }
        }
        if top.3 >= ngens {
            stack.pop();
            word.pop();
            continue;
        }
        let s = top.3 as Gen;
        top.3 += 1;
        let rel = model.mul_gen(&top.0, s);
        if rel.len() != word.len() + 1 {
            continue;
        }
        let end = model.mul_gen(&top.1, s);
        let excess = end.len().saturating_sub(radius);
        if rel.len() + excess > max_len {
            continue;
        }
        let id = proj.id(&end);
        let (d, ref p) = proj.info[id as usize];
        if (d as f64) < c {
            continue;
        }
        let t = top.2.extend(&proj.pair, d, p);
        let mut key = t.proj.clone();
        key.sort_unstable();
        if !explored.insert((id, t.min_dist, key)) {
            continue;
        }
        word.push(s);
        stack.push((rel, end, t, 0));
        fresh = true;
    }
    None
}

/// Largest number of starts searched in parallel before checking for a
/// witness; chunks grow 1, 2, 4, … up to this size.
const SEARCH_CHUNK: usize = 256;

fn random_geodesic(model: &GroupModel, target: &Element, rng: &mut ChaCha8Rng) -> Vec<Gen> {
    let mut rem = target.clone();
    let mut word = Vec::with_capacity(target.len());
    while !rem.is_identity() {
        let options: Vec<(Gen, Element)> = (0..model.num_generators() as Gen)
            .filter_map(|s| {
                let r = model.multiply(&model.generator(model.inverse_gen(s)), &rem);
                (r.len() + 1 == rem.len()).then_some((s, r))
            })
            .collect();
        let (s, r) = options[rng.gen_range(0..options.len())].clone();
        word.push(s);
        rem = r;
    }
    word
}

/// Tests "every geodesic `γ` with `d(γ, X) ≥ C` has `d^π_X(γ) ≤ C`" over the
/// budgeted geodesics. One-point violations are reported first; otherwise
/// the witness is the first violation with starts ordered by increasing
/// distance to `X` (ShortLex among ties), then lexicographic word order. Starts are searched in fixed-size chunks so the
/// search stops early without depending on scheduling.
pub fn contraction_verdict(
    model: &GroupModel,
    x: &PointSet,
    c: f64,
    budget: &ContractionBudget,
    caps: &Caps,
) -> Result<ContractionVerdict> {
    let radius = budget.radius();
    let ball = enumerate_ball(model, radius, caps)?;
    let starts: Vec<Element> = ball.elements().collect();
    let pair = Projector::pairwise(model, x);
    let (witness, examined) = match *budget {
        ContractionBudget::Exhaustive { .. } => {
            // One-point geodesics are cheap and settle most failing constants.
            let points: Vec<(usize, Option<ContractionWitness>)> = starts
                .par_iter()
                .map_init(
                    || Projector::new(model, x, pair.clone()),
                    |proj, s| {
                        let (d, p) = proj.project(s);
                        let t = Track {
                            min_dist: usize::MAX,
                            proj: Vec::new(),
                            diam: 0,
                            pair: (p[0], p[0]),
                        }
                        .extend(&proj.pair, d, &p);
                        (d, t.violates(c).then(|| witness_of(x, s, &[], &t)))
                    },
                )
                .collect();
            let mut examined = starts.len() as u64;
            // Starts closest to X (but at least C away) first: geodesics
            // hugging X at distance C have the most room to spread their
            // projection. The sort is stable, so ties stay in ShortLex order.
            let mut order: Vec<usize> = (0..starts.len()).filter(|&i| points[i].0 as f64 >= c).collect();
            order.sort_by_key(|&i| points[i].0);
            let mut found = points.into_iter().find_map(|p| p.1);
            if found.is_none() {
                let ordered: Vec<&Element> = order.iter().map(|&i| &starts[i]).collect();
                let mut next = 0;
                let mut size = 1;
                while next < ordered.len() {
                    let chunk = &ordered[next..(next + size).min(ordered.len())];
                    next += chunk.len();
                    size = (size * 2).min(SEARCH_CHUNK);
                    let results: Vec<(Option<ContractionWitness>, u64)> = chunk
                        .par_iter()
                        .map_init(
                            || Projector::new(model, x, pair.clone()),
                            |proj, s| {
                                let mut n = 0;
                                let w = search_from(proj, s, c, radius, &mut n);
                                (w, n)
                            },
                        )
                        .collect();
                    examined += results.iter().map(|r| r.1).sum::<u64>();
                    found = results.into_iter().find_map(|r| r.0);
                    if found.is_some() {
                        break;
                    }
                }
            }
            (found, examined)
        }
        ContractionBudget::Sampled { samples, seed, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut proj = Projector::new(model, x, pair);
            let mut found = None;
            let mut examined = 0;
            for _ in 0..samples {
                let a = &starts[rng.gen_range(0..starts.len())];
                let b = &starts[rng.gen_range(0..starts.len())];
                let target = model.multiply(&model.inverse(a), b);
                let word = random_geodesic(model, &target, &mut rng);
                examined += 1;
                let mut v = a.clone();
                let (d, p) = proj.project(&v);
                let mut t = Track {
                    min_dist: usize::MAX,
                    proj: Vec::new(),
                    diam: 0,
                    pair: (p[0], p[0]),
                }
                .extend(&proj.pair, d, &p);
                for &s in &word {
                    v = model.mul_gen(&v, s);
                    let (d, p) = proj.project(&v);
                    t = t.extend(&proj.pair, d, &p);
                }
                if t.violates(c) {
                    found = Some(witness_of(x, a, &word, &t));
                    break;
                }
            }
            (found, examined)
        }
    };
    Ok(ContractionVerdict {
        constant_tested: c,
        pass: witness.is_none(),
        witness,
        budget: *budget,
        geodesics_examined: examined,
    })
}

/// Smallest passing `C` on the grid `0.5, 1, …, r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionEstimate {
    /// `None` means no grid value passed (reported as Infinity).
    pub constant: Option<f64>,
    /// Verdicts at every grid value tried, in order.
    pub verdicts: Vec<ContractionVerdict>,
}

impl ContractionEstimate {
    pub fn is_infinite(&self) -> bool {
        self.constant.is_none()
    }

    pub fn display(&self) -> String {
        match self.constant {
            Some(c) => format!("{c}"),
            None => "Infinity".into(),
        }
    }
}

pub fn contraction_grid(radius: usize) -> Vec<f64> {
    (1..=2 * radius).map(|k| k as f64 * 0.5).collect()
}

pub fn estimate_contraction_constant(
    model: &GroupModel,
    x: &PointSet,
    budget: &ContractionBudget,
    caps: &Caps,
) -> Result<ContractionEstimate> {
    let mut verdicts = Vec::new();
    for c in contraction_grid(budget.radius()) {
        let v = contraction_verdict(model, x, c, budget, caps)?;
        let pass = v.pass;
        verdicts.push(v);
        if pass {
            return Ok(ContractionEstimate {
                constant: Some(c),
                verdicts,
            });
        }
    }
    Ok(ContractionEstimate {
        constant: None,
        verdicts,
    })
}

/// Linear bounds `λ|n| − c ≤ d(o, hⁿo) ≤ Λ|n| + c` over `|n| ≤ n_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QieReport {
    /// Tail difference quotient of `n ↦ |hⁿ|` (the stable translation length estimate).
    pub tail_slope: Ratio<i64>,
    pub lower_slope: Ratio<i64>,
    pub upper_slope: Ratio<i64>,
    pub additive: u64,
    /// `|hⁿ|` for `n = 0..=n_max` (symmetric in `n`).
    pub lengths: Vec<usize>,
    /// Lower slope is not positive, e.g. `h` is torsion or the identity.
    pub flagged: bool,
}

/// The additive constant is the rounded-up maximal deviation from the tail
/// slope; the slopes are then the best ones valid with that constant.
pub fn qie_check(model: &GroupModel, h: &Element, n_max: usize) -> QieReport {
    let n_max = n_max.max(1);
    let mut lengths = Vec::with_capacity(n_max + 1);
    let mut p = Element::identity();
    for _ in 0..=n_max {
        lengths.push(p.len());
        p = model.multiply(&p, h);
    }
    let mid = n_max.div_ceil(2).min(n_max - 1);
    let tail = Ratio::new(
        lengths[n_max] as i64 - lengths[mid] as i64,
        (n_max - mid) as i64,
    );
    let dev = lengths
        .iter()
        .enumerate()
        .map(|(n, &d)| {
            let dev = Ratio::from_integer(d as i64) - tail * n as i64;
            if dev < Ratio::from_integer(0) {
                -dev
            } else {
                dev
            }
        })
        .max()
        .unwrap();
    let c = dev.ceil().to_integer();
    let mut lower = tail;
    let mut upper = tail;
    for (n, &d) in lengths.iter().enumerate().skip(1) {
        lower = lower.min(Ratio::new(d as i64 + c, n as i64));
        upper = upper.max(Ratio::new(d as i64 - c, n as i64));
    }
    let zero = Ratio::from_integer(0);
    let lower = lower.max(zero);
    QieReport {
        tail_slope: tail,
        lower_slope: lower,
        upper_slope: upper.max(zero),
        additive: c as u64,
        lengths,
        flagged: lower <= zero || tail <= zero,
    }
}

/// Truncated orbit `{f·hⁿ : f ∈ translates, |n| ≤ extent}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisSegment {
    pub generator: Element,
    pub extent: usize,
    /// Coset representatives `f` (the identity first).
    pub translates: Vec<Element>,
    pub points: PointSet,
}

fn check_axis_generator(model: &GroupModel, h: &Element) -> Result<()> {
    if h.is_identity() {
        return Err(Error::IdentityAxis);
    }
    if model.element_order(h).is_some() {
        return Err(Error::Torsion(model.format(h)));
    }
    Ok(())
}

pub fn build_axis(model: &GroupModel, h: &Element, extent: usize, extras: &[Element]) -> Result<AxisSegment> {
    check_axis_generator(model, h)?;
    let mut translates = vec![Element::identity()];
    translates.extend(extras.iter().filter(|e| !e.is_identity()).cloned());
    let powers: Vec<Element> = (-(extent as i64)..=extent as i64).map(|n| model.pow(h, n)).collect();
    let pts = translates
        .iter()
        .flat_map(|f| powers.iter().map(move |p| (f, p)))
        .map(|(f, p)| model.multiply(f, p))
        .collect::<Vec<_>>();
    let label = format!("Ax({})[{}]", model.format(h), extent);
    Ok(AxisSegment {
        generator: h.clone(),
        extent,
        translates,
        points: PointSet::new(pts, Some(label))?,
    })
}

/// Axis together with the vertices of the normal-form path joining
/// consecutive orbit points, i.e. `hⁿ·(prefixes of h)`.
pub fn build_saturated_axis(model: &GroupModel, h: &Element, extent: usize) -> Result<AxisSegment> {
    let mut axis = build_axis(model, h, extent, &[])?;
    let mut pts = axis.points.points.clone();
    for n in -(extent as i64)..extent as i64 {
        let mut v = model.pow(h, n);
        for &s in h.letters() {
            v = model.mul_gen(&v, s);
            pts.push(v.clone());
        }
    }
    axis.points = PointSet::new(pts, Some(format!("SatAx({})[{}]", model.format(h), extent)))?;
    Ok(axis)
}

/// The root `h'` of `h` (`h = h'^k` with `k` maximal) among elements no longer
/// than `h`; used to supply `E(h)` coset extras in free products.
pub fn cyclic_root(model: &GroupModel, h: &Element, caps: &Caps) -> Result<(Element, usize)> {
    let ball = enumerate_ball(model, h.len(), caps)?;
    let mut best = (h.clone(), 1);
    for g in ball.elements() {
        if g.is_identity() {
            continue;
        }
        let mut p = g.clone();
        for k in 1..=h.len() {
            if p == *h {
                if k > best.1 {
                    best = (g.clone(), k);
                }
                break;
            }
            p = model.multiply(&p, &g);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProjectionValue {
    /// Index of the set projected onto.
    pub onto: usize,
    pub from: usize,
    pub value: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntersectionValue {
    pub r: usize,
    pub i: usize,
    pub j: usize,
    /// `diam(N_r(X_i) ∩ N_r(X_j))`, `None` when the intersection is empty.
    pub diameter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedProjectionReport {
    pub bound: f64,
    pub pass: bool,
    pub values: Vec<ProjectionValue>,
    /// First ordered pair exceeding the bound.
    pub witness: Option<ProjectionValue>,
    pub intersections: Vec<IntersectionValue>,
}

pub fn intersection_diameter(model: &GroupModel, a: &PointSet, b: &PointSet, r: usize) -> Result<Option<usize>> {
    let na = a.neighborhood(model, r)?;
    let nb = b.neighborhood(model, r)?;
    let common: Vec<Element> = na.points.iter().filter(|p| nb.contains(p)).cloned().collect();
    Ok(if common.is_empty() {
        None
    } else {
        Some(diameter(model, &common))
    })
}

/// Checks `d^π_{X'}(X, X) ≤ B` over all ordered pairs of distinct members and
/// reports the `r`-neighborhood intersection diameters.
pub fn bounded_projection_check(
    model: &GroupModel,
    family: &[PointSet],
    bound: f64,
    radii: &[usize],
) -> Result<BoundedProjectionReport> {
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            if family[i].points == family[j].points {
                return Err(Error::NotDistinct);
            }
        }
    }
    let mut values = Vec::new();
    for onto in 0..family.len() {
        for from in 0..family.len() {
            if onto != from {
                let value = proj_diameter(model, &family[onto], &family[from], &family[from]);
                values.push(ProjectionValue { onto, from, value });
            }
        }
    }
    let witness = values.iter().find(|v| v.value as f64 > bound).cloned();
    let mut intersections = Vec::new();
    for &r in radii {
        for i in 0..family.len() {
            for j in i + 1..family.len() {
                intersections.push(IntersectionValue {
                    r,
                    i,
                    j,
                    diameter: intersection_diameter(model, &family[i], &family[j], r)?,
                });
            }
        }
    }
    Ok(BoundedProjectionReport {
        bound,
        pass: witness.is_none(),
        values,
        witness,
        intersections,
    })
}

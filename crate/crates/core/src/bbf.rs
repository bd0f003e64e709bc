//! Projection complexes and quasi-trees of spaces over finite families of
//! contracting point sets.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BudgetExceeded, Error, Result};
use crate::geometry::{diameter, proj_diameter, project, PointSet};
use crate::group::{Element, GroupModel};

/// Members with the table `d^π_W(Y, Z)` over ordered triples of distinct members.
#[derive(Debug, Clone)]
pub struct ProjectionFamily {
    pub members: Vec<PointSet>,
    /// `table[w][y][z]`; `None` whenever two indices coincide.
    table: Vec<Vec<Vec<Option<usize>>>>,
}

impl ProjectionFamily {
    pub fn new(model: &GroupModel, members: Vec<PointSet>) -> Result<Self> {
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                if members[i].points() == members[j].points() {
                    return Err(Error::NotDistinct);
                }
            }
        }
        let k = members.len();
        let table = (0..k)
            .into_par_iter()
            .map(|w| {
                (0..k)
                    .map(|y| {
                        (0..k)
                            .map(|z| {
                                (w != y && w != z && y != z)
                                    .then(|| proj_diameter(model, &members[w], &members[y], &members[z]))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(ProjectionFamily { members, table })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dpi(&self, w: usize, y: usize, z: usize) -> Option<usize> {
        self.table[w][y][z]
    }

    /// `d^π_W(y, z)` for two points.
    pub fn point_dpi(&self, model: &GroupModel, w: usize, y: &Element, z: &Element) -> usize {
        proj_diameter(
            model,
            &self.members[w],
            &PointSet::singleton(y.clone()),
            &PointSet::singleton(z.clone()),
        )
    }
}

/// `X_K(Y, Z)`: members `W ∉ {Y, Z}` with `d^π_W(Y, Z) > K`.
pub fn interval_set(family: &ProjectionFamily, y: usize, z: usize, k: f64) -> Result<Vec<usize>> {
    if y == z {
        return Err(Error::SameMember);
    }
    Ok((0..family.len())
        .filter(|&w| family.dpi(w, y, z).is_some_and(|d| d as f64 > k))
        .collect())
}

/// A weighted graph with exact all-pairs distances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricGraph {
    pub labels: Vec<String>,
    /// For quasi-trees of spaces: `(member, element)` behind each vertex.
    #[serde(skip)]
    pub points: Vec<Option<(usize, Element)>>,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(skip)]
    adj: Vec<Vec<(usize, f64)>>,
    #[serde(skip)]
    dist: Vec<Vec<f64>>,
}

/// Floyd–Warshall is cubic; graphs above this size are refused.
pub const MAX_GRAPH_VERTICES: usize = 4000;

impl MetricGraph {
    pub fn new(labels: Vec<String>, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let n = labels.len();
        if n > MAX_GRAPH_VERTICES {
            return Err(Error::Budget(BudgetExceeded {
                what: "metric graph vertices".into(),
                limit: MAX_GRAPH_VERTICES as u64,
                partial_counts: vec![n as u64],
            }));
        }
        let mut adj = vec![Vec::new(); n];
        let mut dist = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for &(u, v, w) in &edges {
            debug_assert!(w > 0.0);
            adj[u].push((v, w));
            adj[v].push((u, w));
            dist[u][v] = dist[u][v].min(w);
            dist[v][u] = dist[v][u].min(w);
        }
        for k in 0..n {
            let row_k = dist[k].clone();
            for row in dist.iter_mut() {
                let dik = row[k];
                if dik.is_infinite() {
                    continue;
                }
                for (d, dkj) in row.iter_mut().zip(&row_k) {
                    *d = d.min(dik + dkj);
                }
            }
        }
        Ok(MetricGraph {
            points: vec![None; n],
            labels,
            edges,
            adj,
            dist,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn distance(&self, u: usize, v: usize) -> f64 {
        self.dist[u][v]
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adj[u]
    }

    pub fn is_connected(&self) -> bool {
        self.dist.first().is_none_or(|row| row.iter().all(|d| d.is_finite()))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].iter().any(|&(w, _)| w == v)
    }

    /// Edge list CSV `u,v,weight`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("u,v,weight\n");
        for &(u, v, w) in &self.edges {
            s.push_str(&format!("{u},{v},{w}\n"));
        }
        s
    }

    /// Vertex of a quasi-tree of spaces for a member point.
    pub fn vertex_of(&self, member: usize, g: &Element) -> Option<usize> {
        self.points
            .iter()
            .position(|p| p.as_ref().is_some_and(|(m, e)| *m == member && e == g))
    }

    /// Shortest paths from `u` to `v` as vertex sequences, up to `cap`.
    pub fn geodesics(&self, u: usize, v: usize, cap: usize) -> (Vec<Vec<usize>>, bool) {
        let mut out = Vec::new();
        let mut truncated = false;
        let target = self.dist[u][v];
        if target.is_infinite() {
            return (out, false);
        }
        let mut path = vec![u];
        fn rec(
            g: &MetricGraph,
            v: usize,
            path: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
            cap: usize,
            truncated: &mut bool,
        ) {
            let cur = *path.last().unwrap();
            if cur == v {
                if out.len() >= cap {
                    *truncated = true;
                } else {
                    out.push(path.clone());
                }
                return;
            }
            let mut next: Vec<(usize, f64)> = g.adj[cur].clone();
            next.sort_by_key(|&(w, _)| w);
            next.dedup_by_key(|e| e.0);
            for (w, wt) in next {
                if *truncated {
                    return;
                }
                if (g.dist[cur][v] - wt - g.dist[w][v]).abs() < 1e-9 && g.dist[cur][v] > g.dist[w][v] {
                    path.push(w);
                    rec(g, v, path, out, cap, truncated);
                    path.pop();
                }
            }
        }
        rec(self, v, &mut path, &mut out, cap, &mut truncated);
        (out, truncated)
    }
}

/// Members are adjacent iff `X_K(Y, Z) = ∅`; all edges have weight 1.
pub fn build_projection_complex(family: &ProjectionFamily, k: f64) -> Result<MetricGraph> {
    let n = family.len();
    let mut edges = Vec::new();
    for y in 0..n {
        for z in y + 1..n {
            if interval_set(family, y, z, k)?.is_empty() {
                edges.push((y, z, 1.0));
            }
        }
    }
    let labels = family
        .members
        .iter()
        .enumerate()
        .map(|(i, m)| m.label().map_or_else(|| format!("X{i}"), str::to_string))
        .collect();
    MetricGraph::new(labels, edges)
}

fn induced_connected(model: &GroupModel, pts: &[Element]) -> bool {
    if pts.is_empty() {
        return true;
    }
    let mut seen = vec![false; pts.len()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for j in 0..pts.len() {
            if !seen[j] && model.distance(&pts[i], &pts[j]) == 1 {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Disjoint union of the member subgraphs (thickened to their
/// 1-neighborhoods when the induced subgraph is disconnected) plus edges of
/// length `N` joining `π_Y(Z)` to `π_Z(Y)` whenever `X_K(Y, Z) = ∅`.
pub fn build_quasi_tree_of_spaces(
    model: &GroupModel,
    family: &ProjectionFamily,
    k: f64,
    n_len: f64,
) -> Result<MetricGraph> {
    let mut verts: Vec<(usize, Element)> = Vec::new();
    let mut offsets = Vec::new();
    for (i, m) in family.members.iter().enumerate() {
        let mut pts = m.points().to_vec();
        if !induced_connected(model, &pts) {
            pts = m.neighborhood(model, 1)?.points().to_vec();
            if !induced_connected(model, &pts) {
                return Err(Error::DisconnectedMember(i));
            }
        }
        offsets.push(verts.len());
        verts.extend(pts.into_iter().map(|p| (i, p)));
    }
    offsets.push(verts.len());
    let mut edges = Vec::new();
    for (i, _) in family.members.iter().enumerate() {
        for u in offsets[i]..offsets[i + 1] {
            for v in u + 1..offsets[i + 1] {
                if model.distance(&verts[u].1, &verts[v].1) == 1 {
                    edges.push((u, v, 1.0));
                }
            }
        }
    }
    let find = |i: usize, g: &Element| (offsets[i]..offsets[i + 1]).find(|&u| verts[u].1 == *g);
    for y in 0..family.len() {
        for z in y + 1..family.len() {
            if !interval_set(family, y, z, k)?.is_empty() {
                continue;
            }
            let py = projection_of_set(model, &family.members[y], &family.members[z]);
            let pz = projection_of_set(model, &family.members[z], &family.members[y]);
            for a in &py {
                for b in &pz {
                    if let (Some(u), Some(v)) = (find(y, a), find(z, b)) {
                        edges.push((u, v, n_len));
                    }
                }
            }
        }
    }
    let labels = verts.iter().map(|(i, g)| format!("{i}:{}", model.format(g))).collect();
    let mut g = MetricGraph::new(labels, edges)?;
    g.points = verts.into_iter().map(Some).collect();
    Ok(g)
}

/// `π_Y(Z)` as a sorted list.
pub fn projection_of_set(model: &GroupModel, y: &PointSet, z: &PointSet) -> Vec<Element> {
    let mut out: Vec<Element> = z
        .points()
        .iter()
        .flat_map(|p| project(model, p, y).points().to_vec())
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Largest `|d_C(u, v) − d_Y(u, v)|` over pairs inside one member, where `d_Y`
/// is the member's own induced-graph distance.
pub fn member_distortion(model: &GroupModel, qts: &MetricGraph, member: usize) -> f64 {
    let idx: Vec<usize> = (0..qts.len())
        .filter(|&u| qts.points[u].as_ref().is_some_and(|p| p.0 == member))
        .collect();
    let pts: Vec<Element> = idx.iter().map(|&u| qts.points[u].as_ref().unwrap().1.clone()).collect();
    let own_edges: Vec<(usize, usize, f64)> = (0..pts.len())
        .flat_map(|i| (i + 1..pts.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| model.distance(&pts[i], &pts[j]) == 1)
        .map(|(i, j)| (i, j, 1.0))
        .collect();
    let own = MetricGraph::new(vec![String::new(); pts.len()], own_edges).expect("member graph");
    let mut worst: f64 = 0.0;
    for (a, &u) in idx.iter().enumerate() {
        for (b, &v) in idx.iter().enumerate() {
            worst = worst.max((qts.distance(u, v) - own.distance(a, b)).abs());
        }
    }
    worst
}

/// Hausdorff-style offset between the `d_C`-nearest points of member `z`
/// to member `y` and the vertices of `π_Z(Y)`.
pub fn qts_projection_offset(model: &GroupModel, qts: &MetricGraph, family: &ProjectionFamily, y: usize, z: usize) -> f64 {
    let of = |m: usize| -> Vec<usize> {
        (0..qts.len())
            .filter(|&u| qts.points[u].as_ref().is_some_and(|p| p.0 == m))
            .collect()
    };
    let (ys, zs) = (of(y), of(z));
    let target: Vec<usize> = projection_of_set(model, &family.members[z], &family.members[y])
        .iter()
        .filter_map(|g| qts.vertex_of(z, g))
        .collect();
    let mut worst: f64 = 0.0;
    for &u in &ys {
        let best = zs.iter().map(|&v| qts.distance(u, v)).fold(f64::INFINITY, f64::min);
        for &v in zs.iter().filter(|&&v| (qts.distance(u, v) - best).abs() < 1e-9) {
            let off = target.iter().map(|&t| qts.distance(v, t)).fold(f64::INFINITY, f64::min);
            worst = worst.max(off);
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BottleneckWitness {
    pub x: usize,
    pub y: usize,
    /// Midpoint tried (the first candidate), `None` if no vertex qualifies.
    pub m: Option<usize>,
    /// A path from `x` to `y` avoiding `B(m, Δ)`.
    pub avoiding_path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BottleneckReport {
    pub delta: f64,
    pub pass: bool,
    pub pairs_checked: usize,
    pub failing_pairs: usize,
    /// The failing pair at maximal distance (ties: least pair).
    pub witness: Option<BottleneckWitness>,
}

fn avoiding_path(g: &MetricGraph, x: usize, y: usize, banned: &[bool]) -> Option<Vec<usize>> {
    if banned[x] || banned[y] {
        return None;
    }
    let mut prev = vec![usize::MAX; g.len()];
    prev[x] = x;
    let mut queue = VecDeque::from([x]);
    while let Some(u) = queue.pop_front() {
        if u == y {
            let mut path = vec![y];
            while *path.last().unwrap() != x {
                path.push(prev[*path.last().unwrap()]);
            }
            path.reverse();
            return Some(path);
        }
        let mut next: Vec<usize> = g.adj[u].iter().map(|e| e.0).collect();
        next.sort_unstable();
        for w in next {
            if !banned[w] && prev[w] == usize::MAX {
                prev[w] = u;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Bottleneck criterion: for every pair `x, y` some vertex `m` within 1 of
/// the midpoint (from both ends) has every `x`–`y` path meeting `B(m, Δ)`.
pub fn bottleneck_certify(g: &MetricGraph, delta: f64, max_pairs: usize) -> Result<BottleneckReport> {
    let n = g.len();
    let pairs = n * n.saturating_sub(1) / 2;
    if pairs > max_pairs {
        return Err(Error::Budget(BudgetExceeded {
            what: "bottleneck vertex pairs".into(),
            limit: max_pairs as u64,
            partial_counts: vec![pairs as u64],
        }));
    }
    let results: Vec<Option<BottleneckWitness>> = (0..n)
        .into_par_iter()
        .flat_map_iter(|x| (x + 1..n).map(move |y| (x, y)))
        .map(|(x, y)| {
            let d = g.distance(x, y);
            if d.is_infinite() {
                return None;
            }
            let half = d / 2.0;
            let cands: Vec<usize> = (0..n)
                .filter(|&m| (g.distance(x, m) - half).abs() <= 1.0 && (g.distance(m, y) - half).abs() <= 1.0)
                .collect();
            let mut first_fail = None;
            for &m in &cands {
                let banned: Vec<bool> = (0..n).map(|v| g.distance(m, v) <= delta).collect();
                match avoiding_path(g, x, y, &banned) {
                    None => return None,
                    Some(p) => {
                        if first_fail.is_none() {
                            first_fail = Some((m, p));
                        }
                    }
                }
            }
            Some(match first_fail {
                Some((m, p)) => BottleneckWitness {
                    x,
                    y,
                    m: Some(m),
                    avoiding_path: p,
                },
                None => BottleneckWitness {
                    x,
                    y,
                    m: None,
                    avoiding_path: Vec::new(),
                },
            })
        })
        .collect();
    let fails: Vec<BottleneckWitness> = results.into_iter().flatten().collect();
    let witness = fails
        .iter()
        .max_by(|a, b| {
            g.distance(a.x, a.y)
                .partial_cmp(&g.distance(b.x, b.y))
                .unwrap()
                .then((b.x, b.y).cmp(&(a.x, a.y)))
        })
        .cloned();
    Ok(BottleneckReport {
        delta,
        pass: fails.is_empty(),
        pairs_checked: pairs,
        failing_pairs: fails.len(),
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberProximity {
    pub member: usize,
    pub dpi: usize,
    /// `d^π > K̃`, i.e. the member is in `X_{K̃}(y, z)`.
    pub active: bool,
    /// Worst (over geodesics) distance from the geodesic to `π_X(y)` and `π_X(z)`.
    pub worst_distance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardPathReport {
    pub pass: bool,
    pub members: Vec<MemberProximity>,
    pub geodesics_examined: usize,
    pub truncated: bool,
}

/// Every `d_C`-geodesic from `y` to `z` passes within `R` of `π_X(y)` and of
/// `π_X(z)` for each member `X` (other than those of `y`, `z`) with point
/// projection `d^π_X(y, z) > K̃`.
#[allow(clippy::too_many_arguments)]
pub fn standard_path_check(
    model: &GroupModel,
    qts: &MetricGraph,
    family: &ProjectionFamily,
    y: usize,
    z: usize,
    k_tilde: f64,
    r: f64,
    cap: usize,
) -> Result<StandardPathReport> {
    let (py, pz) = match (&qts.points[y], &qts.points[z]) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        _ => return Err(Error::Precondition("vertices must carry member points".into())),
    };
    let (paths, truncated) = qts.geodesics(y, z, cap);
    let mut members = Vec::new();
    for w in 0..family.len() {
        if w == py.0 || w == pz.0 {
            continue;
        }
        let dpi = family.point_dpi(model, w, &py.1, &pz.1);
        let active = dpi as f64 > k_tilde;
        let mut worst: f64 = 0.0;
        if active {
            let targets = |p: &Element| -> Vec<usize> {
                project(model, p, &family.members[w])
                    .points()
                    .iter()
                    .filter_map(|g| qts.vertex_of(w, g))
                    .collect()
            };
            let (ty, tz) = (targets(&py.1), targets(&pz.1));
            for path in &paths {
                for t in [&ty, &tz] {
                    let d = path
                        .iter()
                        .flat_map(|&u| t.iter().map(move |&v| (u, v)))
                        .map(|(u, v)| qts.distance(u, v))
                        .fold(f64::INFINITY, f64::min);
                    worst = worst.max(d);
                }
            }
        }
        members.push(MemberProximity {
            member: w,
            dpi,
            active,
            worst_distance: worst,
            pass: !active || worst <= r,
        });
    }
    Ok(StandardPathReport {
        pass: members.iter().all(|m| m.pass),
        members,
        geodesics_examined: paths.len(),
        truncated,
    })
}

/// Diameter helper used in reports.
pub fn member_diameters(model: &GroupModel, family: &ProjectionFamily) -> Vec<usize> {
    family.members.iter().map(|m| diameter(model, m.points())).collect()
}

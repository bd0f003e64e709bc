use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::spec::{valid_name, GroupSpec};
use crate::error::{Error, Result};

/// Generator id. Ids are assigned letter by letter: a letter `x` gets id `2i`
/// style numbering with its inverse immediately after, so ShortLex order is
/// `a < A < b < B < ...`. Self-inverse (order 2) letters get a single id.
pub type Gen = u8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Generator {
    pub id: Gen,
    pub inverse: Gen,
    /// Order of the generator as a group element; 0 means infinite.
    pub order: u32,
    pub name: String,
}

/// Any sequence of generators, not necessarily reduced.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<Gen>);

impl Word {
    pub fn new(letters: Vec<Gen>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Gen] {
        &self.0
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        shortlex(&self.0, &other.0)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn shortlex(a: &[Gen], b: &[Gen]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// A group element stored as its normal form: the ShortLex-least geodesic
/// word. The word length is therefore the letter count.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Element {
    nf: Vec<Gen>,
}

impl Element {
    pub fn identity() -> Self {
        Element { nf: Vec::new() }
    }

    /// Wraps letters that are already known to be a normal form.
    pub(crate) fn from_normal_form(nf: Vec<Gen>) -> Self {
        Element { nf }
    }

    pub fn letters(&self) -> &[Gen] {
        &self.nf
    }

    pub fn len(&self) -> usize {
        self.nf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nf.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.nf.is_empty()
    }

    pub fn to_word(&self) -> Word {
        Word(self.nf.clone())
    }
}

impl Ord for Element {
    fn cmp(&self, other: &Self) -> Ordering {
        shortlex(&self.nf, &other.nf)
    }
}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct GenSet([u64; 4]);

impl GenSet {
    fn insert(&mut self, g: Gen) {
        self.0[(g >> 6) as usize] |= 1 << (g & 63);
    }

    pub(crate) fn contains(&self, g: Gen) -> bool {
        self.0[(g >> 6) as usize] & (1 << (g & 63)) != 0
    }

    fn union(&self, other: &GenSet) -> GenSet {
        let mut out = *self;
        for i in 0..4 {
            out.0[i] |= other.0[i];
        }
        out
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Node {
    Free {
        owns: GenSet,
    },
    Cyclic {
        x: Gen,
        xi: Gen,
        order: u32,
        owns: GenSet,
    },
    FreeProduct {
        left: Box<Node>,
        right: Box<Node>,
    },
    DirectProduct {
        left: Box<Node>,
        right: Box<Node>,
    },
    Raag {
        owns: GenSet,
    },
}

impl Node {
    pub(crate) fn owns(&self) -> GenSet {
        match self {
            Node::Free { owns } | Node::Cyclic { owns, .. } | Node::Raag { owns } => *owns,
            Node::FreeProduct { left, right } | Node::DirectProduct { left, right } => {
                left.owns().union(&right.owns())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    Free,
    Cyclic,
    FreeProduct,
    DirectProduct,
    Raag,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Free => "free",
            ModelKind::Cyclic => "cyclic",
            ModelKind::FreeProduct => "free_product",
            ModelKind::DirectProduct => "direct_product",
            ModelKind::Raag => "raag",
        }
    }
}

/// An immutable, enumerable group with a symmetric generating set and exact
/// word metric. The basepoint is the identity.
#[derive(Debug, Clone)]
pub struct GroupModel {
    spec: GroupSpec,
    gens: Vec<Generator>,
    inv: Vec<Gen>,
    root: Node,
    /// Global RAAG vertex index per generator (unused for non-RAAG letters).
    vertex: Vec<u8>,
    /// Adjacency mask per global RAAG vertex.
    adj: Vec<u64>,
    vertex_names: Vec<String>,
    by_name: HashMap<String, Gen>,
    max_torsion: u64,
    /// Maximal join vertex sets of a top-level RAAG.
    joins: Vec<u64>,
}

struct Builder {
    gens: Vec<Generator>,
    vertex: Vec<u8>,
    adj: Vec<u64>,
    vertex_names: Vec<String>,
    taken: Vec<String>,
    next_auto: usize,
    torsion: u64,
}

impl Builder {
    fn fresh_name(&mut self) -> String {
        loop {
            let name = auto_name(self.next_auto);
            self.next_auto += 1;
            if !self.taken.contains(&name) {
                return name;
            }
        }
    }

    fn add_letter(&mut self, name: String, order: u32) -> (Gen, Gen) {
        let id = self.gens.len() as Gen;
        self.vertex.push(u8::MAX);
        if order == 2 {
            self.gens.push(Generator {
                id,
                inverse: id,
                order,
                name,
            });
            (id, id)
        } else {
            self.vertex.push(u8::MAX);
            self.gens.push(Generator {
                id,
                inverse: id + 1,
                order,
                name: name.clone(),
            });
            self.gens.push(Generator {
                id: id + 1,
                inverse: id,
                order,
                name: name.to_ascii_uppercase(),
            });
            (id, id + 1)
        }
    }

    fn build(&mut self, spec: &GroupSpec) -> Node {
        match spec {
            GroupSpec::Free { rank } => {
                let mut owns = GenSet::default();
                for _ in 0..*rank {
                    let name = self.fresh_name();
                    let (x, xi) = self.add_letter(name, 0);
                    owns.insert(x);
                    owns.insert(xi);
                }
                Node::Free { owns }
            }
            GroupSpec::Cyclic { order } => {
                let name = self.fresh_name();
                let (x, xi) = self.add_letter(name, *order);
                let mut owns = GenSet::default();
                owns.insert(x);
                owns.insert(xi);
                if *order > 0 {
                    self.torsion = lcm(self.torsion, *order as u64);
                }
                Node::Cyclic {
                    x,
                    xi,
                    order: *order,
                    owns,
                }
            }
            GroupSpec::FreeProduct { left, right } => Node::FreeProduct {
                left: Box::new(self.build(left)),
                right: Box::new(self.build(right)),
            },
            GroupSpec::DirectProduct { left, right } => Node::DirectProduct {
                left: Box::new(self.build(left)),
                right: Box::new(self.build(right)),
            },
            GroupSpec::Raag { vertices, edges } => {
                let base = self.vertex_names.len();
                let mut owns = GenSet::default();
                for v in vertices {
                    let vi = self.vertex_names.len() as u8;
                    self.vertex_names.push(v.clone());
                    self.adj.push(0);
                    let (x, xi) = self.add_letter(v.clone(), 0);
                    self.vertex[x as usize] = vi;
                    self.vertex[xi as usize] = vi;
                    owns.insert(x);
                    owns.insert(xi);
                }
                for [a, b] in edges {
                    let ia = base + vertices.iter().position(|v| v == a).unwrap();
                    let ib = base + vertices.iter().position(|v| v == b).unwrap();
                    self.adj[ia] |= 1 << ib;
                    self.adj[ib] |= 1 << ia;
                }
                Node::Raag { owns }
            }
        }
    }
}

fn auto_name(mut i: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'a' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    s.reverse();
    String::from_utf8(s).unwrap()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl GroupModel {
    /// Builds the model for a well-formed spec.
    pub fn build(spec: &GroupSpec) -> Result<Self> {
        spec.validate()?;
        let mut taken = Vec::new();
        spec.collect_raag_names(&mut taken);
        let mut b = Builder {
            gens: Vec::new(),
            vertex: Vec::new(),
            adj: Vec::new(),
            vertex_names: Vec::new(),
            taken,
            next_auto: 0,
            torsion: 1,
        };
        let root = b.build(spec);
        let inv = b.gens.iter().map(|g| g.inverse).collect();
        let mut by_name = HashMap::new();
        for g in &b.gens {
            by_name.insert(g.name.clone(), g.id);
            if g.order == 2 {
                by_name.insert(g.name.to_ascii_uppercase(), g.id);
            }
        }
        let joins = match &root {
            Node::Raag { .. } => maximal_joins(&b.adj),
            _ => Vec::new(),
        };
        Ok(GroupModel {
            spec: spec.clone(),
            gens: b.gens,
            inv,
            root,
            vertex: b.vertex,
            adj: b.adj,
            vertex_names: b.vertex_names,
            by_name,
            max_torsion: b.torsion,
            joins,
        })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn label(&self) -> String {
        self.spec.label()
    }

    pub fn kind(&self) -> ModelKind {
        match self.root {
            Node::Free { .. } => ModelKind::Free,
            Node::Cyclic { .. } => ModelKind::Cyclic,
            Node::FreeProduct { .. } => ModelKind::FreeProduct,
            Node::DirectProduct { .. } => ModelKind::DirectProduct,
            Node::Raag { .. } => ModelKind::Raag,
        }
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn num_generators(&self) -> usize {
        self.gens.len()
    }

    pub fn inverse_gen(&self, s: Gen) -> Gen {
        self.inv[s as usize]
    }

    /// Whether every generator-level Cayley graph cycle has even length, so
    /// that word length parity is a homomorphism to Z/2.
    pub fn is_bipartite(&self) -> bool {
        fn rec(n: &Node) -> bool {
            match n {
                Node::Cyclic { order, .. } => order % 2 == 0,
                Node::FreeProduct { left, right } | Node::DirectProduct { left, right } => {
                    rec(left) && rec(right)
                }
                _ => true,
            }
        }
        rec(&self.root)
    }

    /// Least common multiple of all finite cyclic factor orders; every torsion
    /// element's order divides it.
    pub fn torsion_exponent(&self) -> u64 {
        self.max_torsion
    }

    pub fn identity(&self) -> Element {
        Element::identity()
    }

    pub fn generator(&self, s: Gen) -> Element {
        self.mul_gen(&Element::identity(), s)
    }

    pub fn is_valid_gen(&self, s: Gen) -> bool {
        (s as usize) < self.gens.len()
    }

    /// Right-multiplies a normal form by one generator in place.
    pub fn push_gen(&self, nf: &mut Vec<Gen>, s: Gen) {
        debug_assert!(self.is_valid_gen(s));
        self.push(&self.root, nf, 0, s);
    }

    fn push(&self, node: &Node, nf: &mut Vec<Gen>, start: usize, s: Gen) {
        match node {
            Node::Free { .. } => {
                if nf.len() > start && *nf.last().unwrap() == self.inv[s as usize] {
                    nf.pop();
                } else {
                    nf.push(s);
                }
            }
            Node::Cyclic { x, xi, order, .. } => {
                let len = (nf.len() - start) as i64;
                let k = if len == 0 || nf[start] == *x { len } else { -len };
                let e = k + if s == *x { 1 } else { -1 };
                nf.truncate(start);
                let (letter, count) = cyclic_canonical(*x, *xi, *order, e);
                nf.extend(std::iter::repeat_n(letter, count));
            }
            Node::FreeProduct { left, right } => {
                let left_set = left.owns();
                let side = left_set.contains(s);
                let child: &Node = if side { left } else { right };
                let mut p = nf.len();
                while p > start && left_set.contains(nf[p - 1]) == side {
                    p -= 1;
                }
                self.push(child, nf, p, s);
            }
            Node::DirectProduct { left, right } => {
                let left_set = left.owns();
                let mut q = start;
                while q < nf.len() && left_set.contains(nf[q]) {
                    q += 1;
                }
                if left_set.contains(s) {
                    let tail = nf.split_off(q);
                    self.push(left, nf, start, s);
                    nf.extend(tail);
                } else {
                    self.push(right, nf, q, s);
                }
            }
            Node::Raag { .. } => self.raag_push(nf, start, s),
        }
    }

    fn commutes(&self, x: Gen, y: Gen) -> bool {
        let vx = self.vertex[x as usize];
        let vy = self.vertex[y as usize];
        vx != vy && self.adj[vx as usize] & (1 << vy) != 0
    }

    fn raag_push(&self, nf: &mut Vec<Gen>, start: usize, s: Gen) {
        let vs = self.vertex[s as usize];
        let mut j = nf.len();
        while j > start {
            let z = nf[j - 1];
            if self.vertex[z as usize] == vs {
                if z == self.inv[s as usize] {
                    nf.remove(j - 1);
                    self.relinearize(nf, start);
                    return;
                }
                break;
            }
            if self.commutes(z, s) {
                j -= 1;
            } else {
                break;
            }
        }
        // nf[j..] commutes with s; s goes before the first larger letter.
        let mut p = j;
        while p < nf.len() && nf[p] < s {
            p += 1;
        }
        nf.insert(p, s);
    }

    /// Rewrites a reduced RAAG word into its lexicographically least
    /// commutation-equivalent form.
    fn relinearize(&self, nf: &mut Vec<Gen>, start: usize) {
        let mut rest: Vec<Gen> = nf.drain(start..).collect();
        while !rest.is_empty() {
            let mut best = 0;
            for i in 1..rest.len() {
                if rest[i] < rest[best] && rest[..i].iter().all(|&k| self.commutes(k, rest[i])) {
                    best = i;
                }
            }
            nf.push(rest.remove(best));
        }
    }

    pub fn mul_gen(&self, g: &Element, s: Gen) -> Element {
        let mut nf = g.nf.clone();
        self.push_gen(&mut nf, s);
        Element { nf }
    }

    /// Normal form of an arbitrary word over valid generator ids.
    pub fn normalize(&self, w: &[Gen]) -> Element {
        let mut nf = Vec::with_capacity(w.len());
        for &s in w {
            self.push_gen(&mut nf, s);
        }
        Element { nf }
    }

    pub fn normalize_word(&self, w: &Word) -> Element {
        self.normalize(&w.0)
    }

    pub fn multiply(&self, g: &Element, h: &Element) -> Element {
        let mut nf = g.nf.clone();
        for &s in &h.nf {
            self.push_gen(&mut nf, s);
        }
        Element { nf }
    }

    /// `g * w` for an arbitrary word `w`.
    pub fn mul_word(&self, g: &Element, w: &[Gen]) -> Element {
        let mut nf = g.nf.clone();
        for &s in w {
            self.push_gen(&mut nf, s);
        }
        Element { nf }
    }

    pub fn inverse(&self, g: &Element) -> Element {
        let w: Vec<Gen> = g.nf.iter().rev().map(|&s| self.inv[s as usize]).collect();
        self.normalize(&w)
    }

    /// Inverse word of a generator sequence (not normalized).
    pub fn inverse_word(&self, w: &[Gen]) -> Vec<Gen> {
        w.iter().rev().map(|&s| self.inv[s as usize]).collect()
    }

    pub fn word_length(&self, g: &Element) -> usize {
        g.nf.len()
    }

    /// `d(g, h) = |g^{-1} h|`.
    pub fn distance(&self, g: &Element, h: &Element) -> usize {
        let mut nf = Vec::with_capacity(g.len() + h.len());
        for &s in g.nf.iter().rev() {
            self.push_gen(&mut nf, self.inv[s as usize]);
        }
        for &s in &h.nf {
            self.push_gen(&mut nf, s);
        }
        nf.len()
    }

    /// `g^n` for any integer `n`.
    pub fn pow(&self, g: &Element, n: i64) -> Element {
        let base = if n < 0 { self.inverse(g) } else { g.clone() };
        let mut out = Element::identity();
        for _ in 0..n.unsigned_abs() {
            out = self.multiply(&out, &base);
        }
        out
    }

    /// `x g x^{-1}`.
    pub fn conjugate(&self, x: &Element, g: &Element) -> Element {
        let xg = self.multiply(x, g);
        self.multiply(&xg, &self.inverse(x))
    }

    /// Order of `g`, or `None` when it has infinite order. Torsion orders
    /// divide [`Self::torsion_exponent`], so the search is bounded by it.
    pub fn element_order(&self, g: &Element) -> Option<u64> {
        let mut p = g.clone();
        for k in 1..=self.max_torsion {
            if p.is_identity() {
                return Some(k);
            }
            p = self.multiply(&p, g);
        }
        None
    }

    pub fn gen_name(&self, s: Gen) -> &str {
        &self.gens[s as usize].name
    }

    /// Dotted string form, e.g. `a.b.A` (uppercase = inverse). The identity is
    /// the empty string.
    pub fn format_word(&self, w: &[Gen]) -> String {
        let parts: Vec<&str> = w.iter().map(|&s| self.gen_name(s)).collect();
        parts.join(".")
    }

    pub fn format(&self, g: &Element) -> String {
        self.format_word(&g.nf)
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Word::empty());
        }
        text.split('.')
            .map(|tok| {
                self.by_name
                    .get(tok.trim())
                    .copied()
                    .ok_or_else(|| Error::UnknownGenerator(tok.to_string()))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn parse_element(&self, text: &str) -> Result<Element> {
        Ok(self.normalize_word(&self.parse_word(text)?))
    }

    /// Parses a letter by name, e.g. `"a"` or `"A"`.
    pub fn gen_by_name(&self, name: &str) -> Option<Gen> {
        self.by_name.get(name).copied()
    }

    /// Which side of a top-level free product owns the generator.
    pub(crate) fn top_side(&self, s: Gen) -> Option<Side> {
        match &self.root {
            Node::FreeProduct { left, .. } | Node::DirectProduct { left, .. } => {
                Some(if left.owns().contains(s) {
                    Side::Left
                } else {
                    Side::Right
                })
            }
            _ => None,
        }
    }

    pub(crate) fn raag_vertex(&self, s: Gen) -> usize {
        self.vertex[s as usize] as usize
    }

    pub fn raag_vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub(crate) fn raag_joins(&self) -> &[u64] {
        &self.joins
    }

    /// Checks that a caller-supplied letter name is acceptable.
    pub fn is_valid_name(name: &str) -> bool {
        valid_name(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

fn cyclic_canonical(x: Gen, xi: Gen, order: u32, e: i64) -> (Gen, usize) {
    if order == 0 {
        return if e >= 0 {
            (x, e as usize)
        } else {
            (xi, (-e) as usize)
        };
    }
    let m = order as i64;
    let r = e.rem_euclid(m);
    if 2 * r <= m {
        (x, r as usize)
    } else {
        (xi, (m - r) as usize)
    }
}

/// Vertex sets `V1 ∪ V2` of all joins (nonempty `V1`, `V2`, every vertex of
/// `V1` adjacent to every vertex of `V2`), keeping only maximal ones.
fn maximal_joins(adj: &[u64]) -> Vec<u64> {
    let n = adj.len();
    let mut found: Vec<u64> = Vec::new();
    let mut assign = vec![0u8; n];
    fn rec(i: usize, n: usize, adj: &[u64], assign: &mut Vec<u8>, found: &mut Vec<u64>) {
        if i == n {
            let mut v1 = 0u64;
            let mut v2 = 0u64;
            for (k, &a) in assign.iter().enumerate() {
                match a {
                    1 => v1 |= 1 << k,
                    2 => v2 |= 1 << k,
                    _ => {}
                }
            }
            if v1 != 0 && v2 != 0 {
                found.push(v1 | v2);
            }
            return;
        }
        for a in 0..3u8 {
            assign[i] = a;
            // Prune: the new vertex must be adjacent to all of the other side.
            let ok = (0..i).all(|k| {
                let b = assign[k];
                a == 0 || b == 0 || a == b || adj[i] & (1 << k) != 0
            });
            if ok {
                rec(i + 1, n, adj, assign, found);
            }
        }
        assign[i] = 0;
    }
    rec(0, n, adj, &mut assign, &mut found);
    keep_maximal(found)
}

fn keep_maximal(mut found: Vec<u64>) -> Vec<u64> {
    found.sort_unstable();
    found.dedup();
    let all = found.clone();
    found.retain(|&s| !all.iter().any(|&t| t != s && t & s == s));
    found
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
        }
    }
}

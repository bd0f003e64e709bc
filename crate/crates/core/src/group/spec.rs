use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Join subgraphs are found exhaustively (3^n), which bounds the graph size.
pub const MAX_RAAG_VERTICES: usize = 16;

/// Declarative description of a group together with its generating set.
///
/// JSON form uses a `kind` tag, e.g.
/// `{"kind":"free_product","left":{"kind":"cyclic","order":2},"right":{"kind":"cyclic","order":3}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    /// Free group on `rank` generators.
    Free { rank: u32 },
    /// Cyclic group of the given order; order 0 is the infinite cyclic group.
    Cyclic { order: u32 },
    FreeProduct {
        left: Box<GroupSpec>,
        right: Box<GroupSpec>,
    },
    DirectProduct {
        left: Box<GroupSpec>,
        right: Box<GroupSpec>,
    },
    /// Right-angled Artin group; adjacent vertices commute.
    Raag {
        vertices: Vec<String>,
        #[serde(default)]
        edges: Vec<[String; 2]>,
    },
}

impl GroupSpec {
    pub fn free(rank: u32) -> Self {
        GroupSpec::Free { rank }
    }

    pub fn cyclic(order: u32) -> Self {
        GroupSpec::Cyclic { order }
    }

    pub fn free_product(left: GroupSpec, right: GroupSpec) -> Self {
        GroupSpec::FreeProduct {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn direct_product(left: GroupSpec, right: GroupSpec) -> Self {
        GroupSpec::DirectProduct {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn raag(vertices: &[&str], edges: &[(&str, &str)]) -> Self {
        GroupSpec::Raag {
            vertices: vertices.iter().map(|v| v.to_string()).collect(),
            edges: edges
                .iter()
                .map(|(a, b)| [a.to_string(), b.to_string()])
                .collect(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            GroupSpec::Free { .. } => "free",
            GroupSpec::Cyclic { .. } => "cyclic",
            GroupSpec::FreeProduct { .. } => "free_product",
            GroupSpec::DirectProduct { .. } => "direct_product",
            GroupSpec::Raag { .. } => "raag",
        }
    }

    /// Human-readable label such as `F2*F2` or `Z2*Z3`.
    pub fn label(&self) -> String {
        match self {
            GroupSpec::Free { rank } => format!("F{rank}"),
            GroupSpec::Cyclic { order: 0 } => "Z".to_string(),
            GroupSpec::Cyclic { order } => format!("Z{order}"),
            GroupSpec::FreeProduct { left, right } => {
                format!("({}*{})", left.label(), right.label())
            }
            GroupSpec::DirectProduct { left, right } => {
                format!("({}x{})", left.label(), right.label())
            }
            GroupSpec::Raag { vertices, edges } => {
                let e: Vec<String> = edges.iter().map(|[a, b]| format!("{a}-{b}")).collect();
                format!("A({};{})", vertices.join(","), e.join(","))
            }
        }
    }

    fn is_z2(&self) -> bool {
        matches!(self, GroupSpec::Cyclic { order: 2 })
    }

    /// Checks the well-formedness invariants. Every violation is reported, in
    /// tree order, as a human-readable diagnostic.
    pub fn diagnostics(&self) -> Vec<Error> {
        let mut out = Vec::new();
        self.collect_diagnostics(&mut out);
        let mut names = Vec::new();
        self.collect_raag_names(&mut names);
        let mut sorted = names.clone();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                out.push(Error::InvalidSpec(format!(
                    "vertex name `{}` is used more than once",
                    w[0]
                )));
            }
        }
        if self.letter_count() > 64 {
            out.push(Error::InvalidSpec(
                "at most 64 generators (before inverses) are supported".into(),
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.diagnostics().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    fn collect_diagnostics(&self, out: &mut Vec<Error>) {
        match self {
            GroupSpec::Free { rank } => {
                if *rank == 0 {
                    out.push(Error::InvalidSpec("free group of rank 0 is trivial".into()));
                }
            }
            GroupSpec::Cyclic { order } => {
                if *order == 1 {
                    out.push(Error::InvalidSpec(
                        "cyclic group of order 1 would need a trivial generator".into(),
                    ));
                }
            }
            GroupSpec::FreeProduct { left, right } => {
                if left.is_z2() && right.is_z2() {
                    out.push(Error::ElementaryFreeProduct);
                }
                left.collect_diagnostics(out);
                right.collect_diagnostics(out);
            }
            GroupSpec::DirectProduct { left, right } => {
                left.collect_diagnostics(out);
                right.collect_diagnostics(out);
            }
            GroupSpec::Raag { vertices, edges } => {
                if vertices.is_empty() {
                    out.push(Error::InvalidSpec("RAAG needs at least one vertex".into()));
                }
                if vertices.len() > MAX_RAAG_VERTICES {
                    out.push(Error::InvalidSpec(format!(
                        "RAAG has {} vertices; join detection supports at most {MAX_RAAG_VERTICES}",
                        vertices.len()
                    )));
                }
                for v in vertices {
                    if !valid_name(v) {
                        out.push(Error::InvalidSpec(format!(
                            "vertex name `{v}` must be lowercase ascii letters/digits starting with a letter"
                        )));
                    }
                }
                for [a, b] in edges {
                    if a == b {
                        out.push(Error::SelfLoop(a.clone()));
                        continue;
                    }
                    for end in [a, b] {
                        if !vertices.contains(end) {
                            out.push(Error::InvalidSpec(format!(
                                "edge endpoint `{end}` is not a vertex"
                            )));
                        }
                    }
                }
            }
        }
    }

    pub(crate) fn collect_raag_names(&self, names: &mut Vec<String>) {
        match self {
            GroupSpec::Raag { vertices, .. } => names.extend(vertices.iter().cloned()),
            GroupSpec::FreeProduct { left, right } | GroupSpec::DirectProduct { left, right } => {
                left.collect_raag_names(names);
                right.collect_raag_names(names);
            }
            _ => {}
        }
    }

    /// Number of letters (generators up to inversion) the model will have.
    pub fn letter_count(&self) -> usize {
        match self {
            GroupSpec::Free { rank } => *rank as usize,
            GroupSpec::Cyclic { .. } => 1,
            GroupSpec::FreeProduct { left, right } | GroupSpec::DirectProduct { left, right } => {
                left.letter_count() + right.letter_count()
            }
            GroupSpec::Raag { vertices, .. } => vertices.len(),
        }
    }

    /// Exact sphere sizes where a closed form is known (free groups and free
    /// products of free groups). Used for dry-run cost estimates.
    pub fn closed_form_sphere(&self, n: usize) -> Option<f64> {
        let rank = self.free_rank()?;
        let k = 2.0 * rank as f64;
        Some(if n == 0 {
            1.0
        } else {
            k * (k - 1.0).powi(n as i32 - 1)
        })
    }

    fn free_rank(&self) -> Option<u32> {
        match self {
            GroupSpec::Free { rank } => Some(*rank),
            GroupSpec::Cyclic { order: 0 } => Some(1),
            GroupSpec::FreeProduct { left, right } => Some(left.free_rank()? + right.free_rank()?),
            _ => None,
        }
    }
}

pub(crate) fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
}

use std::ops::Range;

use rayon::prelude::*;

use super::model::{Element, Gen, GroupModel};
use crate::error::{BudgetExceeded, Error, Result};

/// Resource caps for enumeration and geodesic streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct Caps {
    /// Maximum number of elements streamed through a census.
    pub max_streamed: u64,
    /// Maximum number of elements held in memory at once.
    pub max_retained: u64,
    /// Maximum number of geodesic words yielded per pair.
    pub max_geodesics: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_streamed: 100_000_000,
            max_retained: 10_000_000,
            max_geodesics: 100_000,
        }
    }
}

/// All normal forms of one length, stored contiguously in ShortLex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sphere {
    radius: usize,
    data: Vec<Gen>,
    count: usize,
}

impl Sphere {
    pub fn origin() -> Self {
        Sphere {
            radius: 0,
            data: Vec::new(),
            count: 1,
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn word(&self, i: usize) -> &[Gen] {
        &self.data[i * self.radius..(i + 1) * self.radius]
    }

    pub fn element(&self, i: usize) -> Element {
        Element::from_normal_form(self.word(i).to_vec())
    }

    pub fn words(&self) -> impl Iterator<Item = &[Gen]> + '_ {
        (0..self.count).map(move |i| self.word(i))
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.count).map(move |i| self.element(i))
    }

    /// Splits the sphere into at most `parts` contiguous index ranges. Since
    /// the sphere is ShortLex sorted, each range is a prefix interval.
    pub fn partition(&self, parts: usize) -> Vec<Range<usize>> {
        let parts = parts.max(1);
        let chunk = self.count.div_ceil(parts).max(1);
        (0..self.count)
            .step_by(chunk)
            .map(|s| s..(s + chunk).min(self.count))
            .collect()
    }

    /// Runs `f` over elements in parallel partitions and returns the per-partition
    /// results in partition order.
    pub fn par_map_partitions<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<usize>) -> T + Sync + Send,
    {
        let parts = rayon::current_num_threads() * 4;
        self.partition(parts).into_par_iter().map(f).collect()
    }
}

/// Whether `w·s` is again a normal form (normal forms are prefix closed, so
/// the next sphere is exactly the set of such extensions).
fn extends(model: &GroupModel, w: &[Gen], s: Gen, buf: &mut Vec<Gen>) -> bool {
    buf.clear();
    buf.extend_from_slice(w);
    model.push_gen(buf, s);
    buf.len() == w.len() + 1 && buf[..w.len()] == *w && buf[w.len()] == s
}

/// Generates the sphere of radius `r + 1` from the sphere of radius `r`.
/// Partitions of the previous sphere are processed in parallel and merged in
/// order, so the result is ShortLex sorted regardless of thread count.
pub fn next_sphere(model: &GroupModel, prev: &Sphere) -> Sphere {
    let r = prev.radius;
    let ngens = model.num_generators() as Gen;
    let chunks: Vec<Vec<Gen>> = prev.par_map_partitions(|range| {
        let mut out = Vec::new();
        let mut buf = Vec::with_capacity(r + 1);
        for i in range {
            let w = prev.word(i);
            for s in 0..ngens {
                if extends(model, w, s, &mut buf) {
                    out.extend_from_slice(w);
                    out.push(s);
                }
            }
        }
        out
    });
    let data: Vec<Gen> = chunks.concat();
    let count = data.len() / (r + 1);
    Sphere {
        radius: r + 1,
        data,
        count,
    }
}

/// Streams spheres `0..=n` to `visit`, retaining only the current sphere.
pub fn for_each_sphere<F>(model: &GroupModel, n: usize, caps: &Caps, mut visit: F) -> Result<()>
where
    F: FnMut(&Sphere) -> Result<()>,
{
    let mut counts = Vec::new();
    let mut streamed: u64 = 0;
    let mut sphere = Sphere::origin();
    loop {
        streamed += sphere.len() as u64;
        if sphere.len() as u64 > caps.max_retained || streamed > caps.max_streamed {
            let limit = if streamed > caps.max_streamed {
                caps.max_streamed
            } else {
                caps.max_retained
            };
            return Err(Error::Budget(BudgetExceeded {
                what: format!("ball enumeration at radius {}", sphere.radius()),
                limit,
                partial_counts: counts,
            }));
        }
        visit(&sphere)?;
        counts.push(sphere.len() as u64);
        if sphere.radius() == n {
            return Ok(());
        }
        sphere = next_sphere(model, &sphere);
    }
}

/// Sphere sizes `|S(o, k)|` for `k = 0..=n`.
pub fn sphere_counts(model: &GroupModel, n: usize, caps: &Caps) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(n + 1);
    for_each_sphere(model, n, caps, |s| {
        out.push(s.len() as u64);
        Ok(())
    })?;
    Ok(out)
}

/// The full ball `N(o, n)` kept in memory sphere by sphere.
#[derive(Debug, Clone)]
pub struct Ball {
    spheres: Vec<Sphere>,
}

impl Ball {
    pub fn radius(&self) -> usize {
        self.spheres.len() - 1
    }

    pub fn spheres(&self) -> &[Sphere] {
        &self.spheres
    }

    pub fn sphere(&self, k: usize) -> &Sphere {
        &self.spheres[k]
    }

    pub fn len(&self) -> usize {
        self.spheres.iter().map(Sphere::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sphere_counts(&self) -> Vec<u64> {
        self.spheres.iter().map(|s| s.len() as u64).collect()
    }

    /// Every element in ShortLex order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        self.spheres.iter().flat_map(|s| s.elements())
    }
}

/// Enumerates `N(o, n)` in ShortLex order, aborting with the completed sphere
/// counts when the retained total would exceed `caps.max_retained`.
pub fn enumerate_ball(model: &GroupModel, n: usize, caps: &Caps) -> Result<Ball> {
    let mut spheres = vec![Sphere::origin()];
    let mut total = 1u64;
    while spheres.len() <= n {
        let next = next_sphere(model, spheres.last().unwrap());
        total += next.len() as u64;
        if total > caps.max_retained {
            return Err(Error::Budget(BudgetExceeded {
                what: format!("retained ball at radius {}", next.radius()),
                limit: caps.max_retained,
                partial_counts: spheres.iter().map(|s| s.len() as u64).collect(),
            }));
        }
        spheres.push(next);
    }
    Ok(Ball { spheres })
}

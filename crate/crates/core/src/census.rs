//! Ball and annulus censuses, growth-exponent estimation, conjugacy-class
//! counting and genericity curves.

use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::barriers::{is_barrier_free_element, BarrierQuery};
use crate::error::{Error, Result};
use crate::group::classify::{classify_free_product, classify_raag, RaagClass};
use crate::group::conjugacy::is_class_canonical;
use crate::group::{for_each_sphere, Caps, Element, Gen, GroupModel};

/// One radius of a census: sphere counts and the cumulative ball counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub n: usize,
    pub sphere_total: u64,
    pub sphere_filtered: u64,
    pub ball_total: u64,
    pub ball_filtered: u64,
}

impl CensusRow {
    pub fn ball_ratio(&self) -> f64 {
        self.ball_filtered as f64 / self.ball_total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusTable {
    pub rows: Vec<CensusRow>,
    pub filter_label: String,
    pub model_label: String,
}

impl CensusTable {
    /// Builds a table from per-sphere `(total, filtered)` counts starting at 0.
    pub fn from_spheres(spheres: &[(u64, u64)], filter_label: String, model_label: String) -> Self {
        let mut rows = Vec::with_capacity(spheres.len());
        let (mut bt, mut bf) = (0, 0);
        for (n, &(t, f)) in spheres.iter().enumerate() {
            bt += t;
            bf += f;
            rows.push(CensusRow {
                n,
                sphere_total: t,
                sphere_filtered: f,
                ball_total: bt,
                ball_filtered: bf,
            });
        }
        CensusTable {
            rows,
            filter_label,
            model_label,
        }
    }

    pub fn ball_filtered(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.ball_filtered).collect()
    }

    pub fn ball_total(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.ball_total).collect()
    }

    /// The same table with the filtered column replaced by the totals.
    pub fn unfiltered(&self) -> CensusTable {
        let spheres: Vec<(u64, u64)> = self.rows.iter().map(|r| (r.sphere_total, r.sphere_total)).collect();
        CensusTable::from_spheres(&spheres, "all".into(), self.model_label.clone())
    }

    /// CSV with columns `n,total,filtered,ratio` (ball counts).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,total,filtered,ratio\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{:.12}\n", r.n, r.ball_total, r.ball_filtered, r.ball_ratio()));
        }
        s
    }

    /// CSV with columns `n,sphere_count,v_count,ratio` (sphere counts).
    pub fn to_sphere_csv(&self) -> String {
        let mut s = String::from("n,sphere_count,v_count,ratio\n");
        for r in &self.rows {
            let ratio = r.sphere_filtered as f64 / r.sphere_total.max(1) as f64;
            s.push_str(&format!("{},{},{},{:.12}\n", r.n, r.sphere_total, r.sphere_filtered, ratio));
        }
        s
    }
}

/// Element filters. Word-valued parameters are strings in the model's
/// dotted notation and are resolved by [`Predicate::compile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predicate {
    All,
    False,
    /// Free products: not conjugate into a factor.
    Hyperbolic,
    /// Free products: conjugate into a factor (the identity included).
    ConjugateIntoFactor,
    Rank1Candidate,
    JoinBound,
    BarrierFree {
        epsilon: f64,
        #[serde(default)]
        big_m: f64,
        barrier_word: String,
        #[serde(default)]
        power: Option<u32>,
    },
    Not { inner: Box<Predicate> },
    And { all: Vec<Predicate> },
    Or { any: Vec<Predicate> },
}

impl Predicate {
    pub fn label(&self) -> String {
        match self {
            Predicate::All => "all".into(),
            Predicate::False => "false".into(),
            Predicate::Hyperbolic => "hyperbolic".into(),
            Predicate::ConjugateIntoFactor => "conjugate_into_factor".into(),
            Predicate::Rank1Candidate => "rank1_candidate".into(),
            Predicate::JoinBound => "join_bound".into(),
            Predicate::BarrierFree {
                epsilon,
                big_m,
                barrier_word,
                power,
            } => match power {
                Some(p) => format!("barrier_free(eps={epsilon},M={big_m},f=({barrier_word})^{p})"),
                None => format!("barrier_free(eps={epsilon},M={big_m},f={barrier_word})"),
            },
            Predicate::Not { inner } => format!("not({})", inner.label()),
            Predicate::And { all } => format!("and({})", all.iter().map(|p| p.label()).collect::<Vec<_>>().join(",")),
            Predicate::Or { any } => format!("or({})", any.iter().map(|p| p.label()).collect::<Vec<_>>().join(",")),
        }
    }

    /// Whether the predicate is conjugation invariant by construction
    /// (barrier-freeness is not).
    pub fn is_class_function(&self) -> bool {
        match self {
            Predicate::BarrierFree { .. } => false,
            Predicate::Not { inner } => inner.is_class_function(),
            Predicate::And { all: ps } | Predicate::Or { any: ps } => ps.iter().all(|p| p.is_class_function()),
            _ => true,
        }
    }

    pub fn compile(&self, model: &GroupModel, caps: &Caps) -> Result<Filter> {
        Ok(match self {
            Predicate::All => Filter::All,
            Predicate::False => Filter::False,
            Predicate::Hyperbolic | Predicate::ConjugateIntoFactor => {
                classify_free_product(model, &Element::identity())?;
                if *self == Predicate::Hyperbolic {
                    Filter::Hyperbolic
                } else {
                    Filter::ConjugateIntoFactor
                }
            }
            Predicate::Rank1Candidate | Predicate::JoinBound => {
                classify_raag(model, &Element::identity())?;
                if *self == Predicate::Rank1Candidate {
                    Filter::Raag(RaagClass::Rank1Candidate)
                } else {
                    Filter::Raag(RaagClass::JoinBound)
                }
            }
            Predicate::BarrierFree {
                epsilon,
                big_m,
                barrier_word,
                power,
            } => {
                let f = model.parse_element(barrier_word)?;
                Filter::BarrierFree(BarrierQuery::new(model, *epsilon, *big_m, &f, *power)?, *caps)
            }
            Predicate::Not { inner } => Filter::Not(Box::new(inner.compile(model, caps)?)),
            Predicate::And { all } => Filter::And(all.iter().map(|p| p.compile(model, caps)).collect::<Result<_>>()?),
            Predicate::Or { any } => Filter::Or(any.iter().map(|p| p.compile(model, caps)).collect::<Result<_>>()?),
        })
    }
}

/// A predicate resolved against a model.
#[derive(Debug, Clone)]
pub enum Filter {
    All,
    False,
    Hyperbolic,
    ConjugateIntoFactor,
    Raag(RaagClass),
    BarrierFree(BarrierQuery, Caps),
    Not(Box<Filter>),
    And(Vec<Filter>),
    Or(Vec<Filter>),
    /// Arbitrary user-supplied test.
    Custom(fn(&GroupModel, &Element) -> bool),
}

impl Filter {
    pub fn eval(&self, model: &GroupModel, g: &Element) -> Result<bool> {
        Ok(match self {
            Filter::All => true,
            Filter::False => false,
            Filter::Hyperbolic => classify_free_product(model, g)?.is_hyperbolic(),
            Filter::ConjugateIntoFactor => classify_free_product(model, g)?.is_conjugate_into_factor(),
            Filter::Raag(c) => classify_raag(model, g)? == *c,
            Filter::BarrierFree(q, caps) => is_barrier_free_element(model, g, q, caps)?.barrier_free,
            Filter::Not(p) => !p.eval(model, g)?,
            Filter::And(ps) => {
                for p in ps {
                    if !p.eval(model, g)? {
                        return Ok(false);
                    }
                }
                true
            }
            Filter::Or(ps) => {
                for p in ps {
                    if p.eval(model, g)? {
                        return Ok(true);
                    }
                }
                false
            }
            Filter::Custom(f) => f(model, g),
        })
    }
}

/// Per-radius counts of `N(o, n)` and of its elements passing `filter`.
pub fn census(model: &GroupModel, n_max: usize, filter: &Filter, label: &str, caps: &Caps) -> Result<CensusTable> {
    let mut spheres = Vec::with_capacity(n_max + 1);
    for_each_sphere(model, n_max, caps, |sphere| {
        let filtered = match filter {
            Filter::All => sphere.len() as u64,
            Filter::False => 0,
            _ => sphere
                .par_map_partitions(|range| -> Result<u64> {
                    let mut c = 0;
                    for i in range {
                        if filter.eval(model, &sphere.element(i))? {
                            c += 1;
                        }
                    }
                    Ok(c)
                })
                .into_iter()
                .sum::<Result<u64>>()?,
        };
        spheres.push((sphere.len() as u64, filtered));
        Ok(())
    })?;
    Ok(CensusTable::from_spheres(&spheres, label.to_string(), model.label()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentMethod {
    LogRegression,
    Ratio,
    ExactFormula,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub value: f64,
    pub method: ExponentMethod,
    pub window: (usize, usize),
    /// RMS residual of the log-count regression.
    pub residual: f64,
    /// Mean tail log-ratio `log(A(n+1)/A(n))`.
    pub ratio_value: f64,
    /// Regression and ratio estimates differ by more than 0.05.
    pub non_converged: bool,
    pub notes: Vec<String>,
}

/// Least squares slope, intercept and RMS residual.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - icept - slope * x).powi(2)).sum();
    (slope, icept, (rss / n).sqrt())
}

/// Annulus counts `♯A(o, n, Δ)` from cumulative ball counts, for every `n`
/// whose annulus fits inside the table.
pub fn annuli(ball: &[u64], delta: usize) -> Vec<(usize, u64)> {
    let mut out = Vec::new();
    for n in 0..ball.len() {
        if n + delta >= ball.len() {
            break;
        }
        let hi = ball[n + delta];
        let lo = if n > delta { ball[n - delta - 1] } else { 0 };
        out.push((n, hi - lo));
    }
    out
}

/// Growth exponent of the filtered column over the tail of the annulus
/// sequence (second half of the usable radii, at least `n ≥ 1`).
pub fn exponent(table: &CensusTable, delta: usize) -> Result<ExponentEstimate> {
    exponent_of(&table.ball_filtered(), delta, 0)
}

/// As [`exponent`], with counts multiplied by `n^poly` before fitting, which
/// removes a known polynomial prefactor such as the `1/n` of cyclic words.
pub fn exponent_of(ball: &[u64], delta: usize, poly: i32) -> Result<ExponentEstimate> {
    if ball.len() < 4 {
        return Err(Error::InsufficientRows {
            needed: 4,
            found: ball.len(),
        });
    }
    let ann = annuli(ball, delta);
    let top = ann.last().map_or(0, |a| a.0);
    let lo = (top / 2).max(1);
    let mut window: Vec<(usize, u64)> = ann.into_iter().filter(|a| a.0 >= lo).collect();
    let mut notes = Vec::new();
    if let Some(z) = window.iter().rposition(|a| a.1 == 0) {
        notes.push(format!("zero count at n={}; window shrunk", window[z].0));
        window.drain(..=z);
    }
    if window.len() < 2 {
        notes.push("no nonzero counts in the tail window".into());
        return Ok(ExponentEstimate {
            value: 0.0,
            method: ExponentMethod::LogRegression,
            window: (lo, top),
            residual: 0.0,
            ratio_value: 0.0,
            non_converged: false,
            notes,
        });
    }
    let xs: Vec<f64> = window.iter().map(|a| a.0 as f64).collect();
    let ys: Vec<f64> = window
        .iter()
        .map(|a| (a.1 as f64).ln() + poly as f64 * (a.0 as f64).ln())
        .collect();
    let (slope, _, residual) = linear_fit(&xs, &ys);
    let ratio_value = ys.windows(2).map(|w| w[1] - w[0]).sum::<f64>() / (ys.len() - 1) as f64;
    let value = slope.max(0.0);
    Ok(ExponentEstimate {
        value,
        method: ExponentMethod::LogRegression,
        window: (window[0].0, window.last().unwrap().0),
        residual,
        ratio_value,
        non_converged: (value - ratio_value.max(0.0)).abs() > 0.05,
        notes,
    })
}

/// Partial Poincaré sum `Σ_{g ∈ N(o,n) ∩ filter} exp(−s·|g|)`.
pub fn poincare_partial(model: &GroupModel, s: f64, n_max: usize, filter: &Filter, caps: &Caps) -> Result<f64> {
    let t = census(model, n_max, filter, "", caps)?;
    Ok(poincare_from_table(&t, s))
}

pub fn poincare_from_table(t: &CensusTable, s: f64) -> f64 {
    t.rows.iter().map(|r| r.sphere_filtered as f64 * (-s * r.n as f64).exp()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConjRow {
    pub n: usize,
    /// Classes with `ℓ = n`.
    pub sphere_classes: u64,
    pub sphere_filtered: u64,
    /// Classes with `ℓ ≤ n`.
    pub classes_total: u64,
    pub classes_filtered: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjCensusTable {
    pub rows: Vec<ConjRow>,
    pub filter_label: String,
    pub model_label: String,
}

impl ConjCensusTable {
    pub fn classes_total(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.classes_total).collect()
    }

    pub fn classes_filtered(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.classes_filtered).collect()
    }

    /// CSV with columns `n,classes_total,classes_filtered`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,classes_total,classes_filtered\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{}\n", r.n, r.classes_total, r.classes_filtered));
        }
        s
    }
}

/// Conjugates checked for predicate invariance: all single-letter
/// conjugates of every class up to this length, then a stride sample.
const INVARIANCE_FULL_LENGTH: usize = 4;
const INVARIANCE_STRIDE: usize = 61;

/// Counts conjugacy classes by minimal length. Each class is counted once,
/// at its canonical representative (ShortLex-least among minimal-length
/// elements); ties between minimal representatives are not double counted.
pub fn conj_census(
    model: &GroupModel,
    n_max: usize,
    filter: &Filter,
    label: &str,
    caps: &Caps,
) -> Result<ConjCensusTable> {
    let mut rows: Vec<ConjRow> = Vec::with_capacity(n_max + 1);
    let violation = AtomicBool::new(false);
    for_each_sphere(model, n_max, caps, |sphere| {
        let parts = sphere.par_map_partitions(|range| -> Result<(u64, u64)> {
            let (mut c, mut f) = (0u64, 0u64);
            for i in range {
                let g = sphere.element(i);
                if !is_class_canonical(model, &g) {
                    continue;
                }
                c += 1;
                let pass = filter.eval(model, &g)?;
                if pass {
                    f += 1;
                }
                if g.len() <= INVARIANCE_FULL_LENGTH || (c as usize).is_multiple_of(INVARIANCE_STRIDE) {
                    for s in 0..model.num_generators() as Gen {
                        let x = model.generator(s);
                        let conj = model.conjugate(&x, &g);
                        if filter.eval(model, &conj)? != pass {
                            violation.store(true, Ordering::Relaxed);
                            return Err(Error::NonInvariantPredicate {
                                element: model.format(&g),
                                conjugate: model.format(&conj),
                            });
                        }
                    }
                }
            }
            Ok((c, f))
        });
        let (mut c, mut f) = (0, 0);
        for p in parts {
            let (pc, pf) = p?;
            c += pc;
            f += pf;
        }
        let (tc, tf) = rows.last().map_or((0, 0), |r| (r.classes_total, r.classes_filtered));
        rows.push(ConjRow {
            n: sphere.radius(),
            sphere_classes: c,
            sphere_filtered: f,
            classes_total: tc + c,
            classes_filtered: tf + f,
        });
        Ok(())
    })?;
    debug_assert!(!violation.load(Ordering::Relaxed));
    Ok(ConjCensusTable {
        rows,
        filter_label: label.to_string(),
        model_label: model.label(),
    })
}

/// Conjugacy growth estimates: the raw tail fit of class counts, and the fit
/// of `n·(classes of length n)`, which removes the `1/n` rotation factor of
/// cyclic words and converges much faster at small radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjGrowth {
    pub raw: ExponentEstimate,
    pub corrected: ExponentEstimate,
}

pub fn conj_growth(classes_cumulative: &[u64]) -> Result<ConjGrowth> {
    Ok(ConjGrowth {
        raw: exponent_of(classes_cumulative, 0, 0)?,
        corrected: exponent_of(classes_cumulative, 0, 1)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericityPoint {
    pub n: usize,
    pub ratio: f64,
    pub fitted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericityCurve {
    pub points: Vec<GenericityPoint>,
    /// Fitted decay rate `ε̂` (negated slope of `log ratio`).
    pub decay: f64,
    pub residual: f64,
    pub window: (usize, usize),
    pub exponential_genericity: bool,
}

/// Residual threshold for declaring exponential decay.
pub const GENERICITY_RESIDUAL: f64 = 0.05;

pub fn genericity_curve(model: &GroupModel, n_max: usize, filter: &Filter, caps: &Caps) -> Result<GenericityCurve> {
    let t = census(model, n_max, filter, "", caps)?;
    Ok(genericity_from_table(&t))
}

pub fn genericity_from_table(t: &CensusTable) -> GenericityCurve {
    let ratios: Vec<(usize, f64)> = t.rows.iter().map(|r| (r.n, r.ball_ratio())).collect();
    let top = ratios.last().map_or(0, |r| r.0);
    let lo = (top / 2).max(1).min(top);
    let tail: Vec<(usize, f64)> = ratios.iter().copied().filter(|r| r.0 >= lo && r.1 > 0.0).collect();
    let (slope, icept, residual) = if tail.len() >= 2 {
        let xs: Vec<f64> = tail.iter().map(|r| r.0 as f64).collect();
        let ys: Vec<f64> = tail.iter().map(|r| r.1.ln()).collect();
        linear_fit(&xs, &ys)
    } else {
        (0.0, 0.0, 0.0)
    };
    let decay = -slope;
    let points = ratios
        .iter()
        .map(|&(n, ratio)| GenericityPoint {
            n,
            ratio,
            fitted: (icept + slope * n as f64).exp(),
        })
        .collect();
    GenericityCurve {
        points,
        decay,
        residual,
        window: (lo, top),
        exponential_genericity: decay > 1e-9 && residual < GENERICITY_RESIDUAL,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessGap {
    pub e_a: ExponentEstimate,
    pub e_g: ExponentEstimate,
    pub gap: f64,
}

pub fn tightness_gap(model: &GroupModel, n_max: usize, set_a: &Filter, caps: &Caps) -> Result<TightnessGap> {
    let t = census(model, n_max, set_a, "", caps)?;
    tightness_from_table(&t)
}

pub fn tightness_from_table(t: &CensusTable) -> Result<TightnessGap> {
    let e_a = exponent(t, 0)?;
    let e_g = exponent(&t.unfiltered(), 0)?;
    let gap = e_g.value - e_a.value;
    Ok(TightnessGap { e_a, e_g, gap })
}

use std::fs;
use std::path::Path;
use std::time::Instant;

use cgt_core::barriers::{enumerate_v, BarrierQuery};
use cgt_core::bbf::{
    bottleneck_certify, build_projection_complex, build_quasi_tree_of_spaces, member_distortion, standard_path_check,
    ProjectionFamily,
};
use cgt_core::census::{
    census, conj_census, conj_growth, exponent, genericity_from_table, tightness_from_table, CensusTable,
};
use cgt_core::geometry::{build_axis, build_saturated_axis, estimate_contraction_constant, qie_check, ContractionBudget};
use cgt_core::group::conjugacy::is_class_canonical;
use cgt_core::group::{conj_length, enumerate_ball, geodesics_between};
use cgt_core::paths::{
    check_admissible, extension_injectivity_probe, fellow_travel_offset, quasi_geodesic_constant,
    AdmissibleDecomposition, Marked, ProbeOutcome,
};
use cgt_core::{Element, GroupModel};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    BarrierParams, BbfParams, CensusParams, ConjugacyParams, ContractionParams, ExperimentConfig, GenericityParams,
    Params, PathParams,
};
use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    BudgetAbort,
    InvariantViolation,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::BudgetAbort => 3,
            Status::InvariantViolation => 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Step {
    pub name: String,
    pub result: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub status: Status,
    pub steps: Vec<Step>,
    pub wall_time_secs: f64,
    /// Some enumeration or geodesic stream hit its cap.
    pub truncated: bool,
    pub verdicts: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Results of one experiment before they are written out.
#[derive(Default)]
struct Output {
    steps: Vec<Step>,
    verdicts: Vec<String>,
    files: Vec<(String, String)>,
    truncated: bool,
}

impl Output {
    fn step(&mut self, name: impl Into<String>, result: impl Serialize) {
        self.steps.push(Step {
            name: name.into(),
            result: serde_json::to_value(result).expect("report values serialize"),
        });
    }

    fn file(&mut self, suffix: &str, contents: String) {
        self.files.push((suffix.to_string(), contents));
    }
}

/// Runs an experiment and writes `<prefix>.report.json` plus its CSV files.
/// Budget aborts and invariant violations still produce a (flagged) report.
pub fn run(cfg: &ExperimentConfig, prefix: &str, gnuplot: bool) -> Result<RunReport, LabError> {
    let t0 = Instant::now();
    let model = GroupModel::build(&cfg.group)?;
    let mut out = Output::default();
    let (status, error) = match execute(&model, &cfg.params, &mut out) {
        Ok(()) => (Status::Ok, None),
        Err(e) => match e.exit_code() {
            3 => {
                out.truncated = true;
                if let LabError::Core(cgt_core::Error::Budget(b)) = &e {
                    let mut csv = String::from("n,sphere_count\n");
                    for (n, c) in b.partial_counts.iter().enumerate() {
                        csv.push_str(&format!("{n},{c}\n"));
                    }
                    out.file("partial.csv", csv);
                    out.step(
                        "budget_abort",
                        json!({ "what": b.what, "limit": b.limit, "partial_counts": b.partial_counts }),
                    );
                }
                (Status::BudgetAbort, Some(e.to_string()))
            }
            4 => (Status::InvariantViolation, Some(e.to_string())),
            _ => return Err(e),
        },
    };
    if gnuplot {
        if let Some(script) = gnuplot_script(cfg, prefix) {
            out.file("gp", script);
        }
    }
    let mut outputs = Vec::new();
    if let Some(dir) = Path::new(prefix).parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    for (suffix, contents) in &out.files {
        let path = format!("{prefix}.{suffix}");
        fs::write(&path, contents)?;
        outputs.push(path);
    }
    let report_path = format!("{prefix}.report.json");
    outputs.push(report_path.clone());
    let report = RunReport {
        config: cfg.clone(),
        status,
        steps: out.steps,
        wall_time_secs: t0.elapsed().as_secs_f64(),
        truncated: out.truncated,
        verdicts: out.verdicts,
        outputs,
        error,
    };
    fs::write(&report_path, serde_json::to_string_pretty(&report).expect("report serializes") + "\n")?;
    Ok(report)
}

fn execute(model: &GroupModel, params: &Params, out: &mut Output) -> Result<(), LabError> {
    match params {
        Params::Census(p) => run_census(model, p, out),
        Params::Genericity(p) => run_genericity(model, p, out),
        Params::Conjugacy(p) => run_conjugacy(model, p, out),
        Params::Barriers(p) => run_barriers(model, p, out),
        Params::Contraction(p) => run_contraction(model, p, out),
        Params::Paths(p) => run_paths(model, p, out),
        Params::Bbf(p) => run_bbf(model, p, out),
    }
}

fn exponent_step(out: &mut Output, name: &str, t: &CensusTable, delta: usize) -> Result<(), LabError> {
    if t.rows.len() < 4 {
        out.verdicts.push(format!("{name}: too few radii for an exponent estimate"));
        return Ok(());
    }
    let e = exponent(t, delta)?;
    out.verdicts.push(format!(
        "{name} = {:.4} (regression over n in [{}, {}], residual {:.4}; ratio method {:.4}){}",
        e.value,
        e.window.0,
        e.window.1,
        e.residual,
        e.ratio_value,
        if e.non_converged { " NON-CONVERGED" } else { "" }
    ));
    out.step(name, e);
    Ok(())
}

fn run_census(model: &GroupModel, p: &CensusParams, out: &mut Output) -> Result<(), LabError> {
    let filter = p.predicate.compile(model, &p.caps)?;
    let t = census(model, p.n_max, &filter, &p.predicate.label(), &p.caps)?;
    out.file("census.csv", t.to_csv());
    out.step("census", &t);
    exponent_step(out, "exponent(filtered)", &t, p.delta)?;
    exponent_step(out, "exponent(all)", &t.unfiltered(), p.delta)?;
    Ok(())
}

fn run_genericity(model: &GroupModel, p: &GenericityParams, out: &mut Output) -> Result<(), LabError> {
    let filter = p.predicate.compile(model, &p.caps)?;
    let t = census(model, p.n_max, &filter, &p.predicate.label(), &p.caps)?;
    let curve = genericity_from_table(&t);
    let mut csv = String::from("n,total,filtered,ratio,fitted\n");
    for (r, pt) in t.rows.iter().zip(&curve.points) {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n, r.ball_total, r.ball_filtered, pt.ratio, pt.fitted
        ));
    }
    out.file("genericity.csv", csv);
    out.verdicts.push(format!(
        "decay rate {:.4} over n in [{}, {}], residual {:.4}: exponential genericity {}",
        curve.decay,
        curve.window.0,
        curve.window.1,
        curve.residual,
        if curve.exponential_genericity { "observed" } else { "not observed" }
    ));
    out.step("census", &t);
    out.step("genericity_curve", &curve);
    Ok(())
}

fn run_conjugacy(model: &GroupModel, p: &ConjugacyParams, out: &mut Output) -> Result<(), LabError> {
    let filter = p.predicate.compile(model, &p.caps)?;
    let t = conj_census(model, p.n_max, &filter, &p.predicate.label(), &p.caps)?;
    out.file("conjugacy.csv", t.to_csv());
    out.step("conj_census", &t);
    // Cross-check the reduction on short class representatives.
    let mut checked = 0u64;
    for g in enumerate_ball(model, p.check_length.min(p.n_max), &p.caps)?.elements() {
        if is_class_canonical(model, &g) {
            conj_length(model, &g, p.search_radius)?;
            checked += 1;
        }
    }
    out.step("conj_length_crosscheck", json!({ "classes_checked": checked, "search_radius": p.search_radius }));
    if t.rows.len() >= 4 {
        let filtered = conj_growth(&t.classes_filtered())?;
        let all = conj_growth(&t.classes_total())?;
        let gap = all.corrected.value - filtered.corrected.value;
        out.verdicts.push(format!(
            "conjugacy growth: {} {:.4}, all classes {:.4}, gap {:.4} (raw fits {:.4}, {:.4})",
            t.filter_label, filtered.corrected.value, all.corrected.value, gap, filtered.raw.value, all.raw.value
        ));
        out.step("growth(filtered)", filtered);
        out.step("growth(all)", all);
    }
    Ok(())
}

fn run_barriers(model: &GroupModel, p: &BarrierParams, out: &mut Output) -> Result<(), LabError> {
    let f = model.parse_element(&p.barrier_word)?;
    let mut csv = String::from("epsilon,n,sphere_count,v_count,ratio\n");
    let mut sweep = vec![p.epsilon];
    sweep.extend(p.epsilon_sweep.iter().copied().filter(|e| *e != p.epsilon));
    for eps in sweep {
        let q = BarrierQuery::new(model, eps, p.big_m, &f, p.power)?;
        let t = enumerate_v(model, p.n_max, &q, &p.caps)?;
        for r in &t.rows {
            csv.push_str(&format!(
                "{eps},{},{},{},{}\n",
                r.n,
                r.sphere_total,
                r.sphere_filtered,
                r.sphere_filtered as f64 / r.sphere_total as f64
            ));
        }
        out.step(format!("V(eps={eps})"), &t);
        if t.rows.len() >= 4 {
            let gap = tightness_from_table(&t)?;
            out.verdicts.push(format!(
                "eps = {eps}, M = {}: e_V {:.5}, e_G {:.5}, gap {:.5}",
                p.big_m, gap.e_a.value, gap.e_g.value, gap.gap
            ));
            out.step(format!("tightness_gap(eps={eps})"), gap);
        }
    }
    out.file("barriers.csv", csv);
    Ok(())
}

fn run_contraction(model: &GroupModel, p: &ContractionParams, out: &mut Output) -> Result<(), LabError> {
    let mut csv = String::from("axis,radius,constant,geodesics_examined\n");
    let mut radii = vec![p.budget.radius()];
    radii.extend(p.radius_sweep.iter().copied().filter(|r| *r != p.budget.radius()));
    for word in &p.axes {
        let h = model.parse_element(word)?;
        let axis = if p.saturated {
            build_saturated_axis(model, &h, p.extent)?
        } else {
            build_axis(model, &h, p.extent, &[])?
        };
        out.step(format!("qie({word})"), qie_check(model, &h, 2 * p.extent));
        for &r in &radii {
            let budget = with_radius(&p.budget, r);
            let est = estimate_contraction_constant(model, &axis.points, &budget, &p.caps)?;
            let examined: u64 = est.verdicts.iter().map(|v| v.geodesics_examined).sum();
            csv.push_str(&format!("{word},{r},{},{examined}\n", est.display()));
            out.verdicts.push(format!("axis {word}, radius {r}: contraction constant {}", est.display()));
            let verdicts: Vec<Value> = est.verdicts.iter().map(|v| v.to_json(model)).collect();
            out.step(format!("contraction({word}, r={r})"), json!({ "constant": est.display(), "verdicts": verdicts }));
        }
    }
    out.file("contraction.csv", csv);
    Ok(())
}

fn with_radius(b: &ContractionBudget, radius: usize) -> ContractionBudget {
    match *b {
        ContractionBudget::Exhaustive { .. } => ContractionBudget::Exhaustive { radius },
        ContractionBudget::Sampled { samples, seed, .. } => ContractionBudget::Sampled { radius, samples, seed },
    }
}

/// `h^D · s · h^D` with both legs marked on their `⟨h⟩` cosets.
fn two_axis(model: &GroupModel, h: &Element, s: &Element, d: usize, tau: f64) -> Result<AdmissibleDecomposition, LabError> {
    let axis = build_axis(model, h, d + 2, &[])?.points;
    let leg: Vec<_> = (0..d).flat_map(|_| h.letters().iter().copied()).collect();
    let mut path = leg.clone();
    path.extend_from_slice(s.letters());
    let mid = path.len();
    path.extend_from_slice(&leg);
    let shift = model.normalize(&path[..mid]);
    Ok(AdmissibleDecomposition::new(
        path,
        vec![
            Marked {
                range: 0..leg.len(),
                set: axis.clone(),
            },
            Marked {
                range: mid..mid + leg.len(),
                set: axis.translate(model, &shift),
            },
        ],
        d as f64,
        tau,
    ))
}

fn run_paths(model: &GroupModel, p: &PathParams, out: &mut Output) -> Result<(), LabError> {
    let h = model.parse_element(&p.axis)?;
    let s = model.parse_element(&p.bridge)?;
    let mut csv = String::from("D,admissible,epsilon,c\n");
    for &d in &p.d_values {
        let dec = two_axis(model, &h, &s, d, p.tau)?;
        let report = check_admissible(model, &dec)?;
        let end = model.normalize(&dec.path);
        let stream = geodesics_between(model, &Element::identity(), &end, p.caps.max_geodesics);
        out.truncated |= stream.truncated;
        let mut eps: f64 = 0.0;
        for w in &stream.words {
            eps = eps.max(fellow_travel_offset(model, &w.0, &dec)?);
        }
        let c = quasi_geodesic_constant(model, &dec.path);
        csv.push_str(&format!("{d},{},{eps},{c}\n", report.verdict));
        out.verdicts.push(format!(
            "D = {d}: admissible {}, fellow-travel offset {eps}, quasi-geodesic constant {c}",
            report.verdict
        ));
        out.step(format!("admissible(D={d})"), json!({ "decomposition": dec.to_json(model), "report": report }));
    }
    out.file("paths.csv", csv);
    if let Some(pr) = &p.probe {
        let letters = pr
            .letters
            .iter()
            .map(|w| model.parse_element(w))
            .collect::<Result<Vec<_>, _>>()?;
        let family = pr
            .family
            .iter()
            .map(|w| build_axis(model, &model.parse_element(w)?, pr.extent, &[]))
            .collect::<Result<Vec<_>, _>>()?;
        let outcome = extension_injectivity_probe(model, &letters, &family, pr.d, pr.tau, pr.word_len, &p.caps)?;
        let (verdict, value) = match &outcome {
            ProbeOutcome::Pass { images } => (format!("injective on {images} words"), json!({ "pass": images })),
            ProbeOutcome::Collision { first, second, image } => (
                format!("collision: {first:?} and {second:?}"),
                json!({ "collision": { "first": first, "second": second, "image": model.format(image) } }),
            ),
            ProbeOutcome::NoExtension { left, right } => (
                format!("no extension between letters {left} and {right}"),
                json!({ "no_extension": [left, right] }),
            ),
        };
        out.verdicts.push(format!("extension probe: {verdict}"));
        out.step("extension_injectivity_probe", value);
    }
    Ok(())
}

fn run_bbf(model: &GroupModel, p: &BbfParams, out: &mut Output) -> Result<(), LabError> {
    let h = model.parse_element(&p.axis)?;
    let axis = build_axis(model, &h, p.extent, &[])?.points;
    let members = p
        .shifts
        .iter()
        .map(|s| Ok(axis.translate(model, &model.parse_element(s)?).with_label(format!("{s}*Ax({})", p.axis))))
        .collect::<Result<Vec<_>, cgt_core::Error>>()?;
    let family = ProjectionFamily::new(model, members)?;
    let n = p.n.unwrap_or(2.0 * p.k);

    let pc = build_projection_complex(&family, p.k)?;
    let bottleneck = bottleneck_certify(&pc, p.delta, 10_000_000)?;
    out.file("pc.csv", pc.to_csv());
    out.verdicts.push(format!(
        "projection complex (K = {}): {} edges, bottleneck at delta = {}: {}",
        p.k,
        pc.edges.len(),
        p.delta,
        if bottleneck.pass { "certified" } else { "fails" }
    ));
    out.step("projection_complex", &pc);
    out.step("bottleneck", &bottleneck);

    let qts = build_quasi_tree_of_spaces(model, &family, p.k, n)?;
    out.file("qts.csv", qts.to_csv());
    let distortion: Vec<f64> = (0..family.len()).map(|i| member_distortion(model, &qts, i)).collect();
    out.verdicts.push(format!(
        "quasi-tree of spaces (N = {n}): {} vertices, member distortion {:?}",
        qts.len(),
        distortion
    ));
    out.step("quasi_tree_distortion", &distortion);

    // Standard paths between the first and last members, at the measured R.
    let last = family.len() - 1;
    let of = |m: usize| -> Vec<usize> {
        (0..qts.len())
            .filter(|&u| qts.points[u].as_ref().is_some_and(|x| x.0 == m))
            .collect()
    };
    let mut worst: f64 = 0.0;
    let mut truncated = false;
    for &y in &of(0) {
        for &z in &of(last) {
            let r = standard_path_check(model, &qts, &family, y, z, p.k_tilde, f64::INFINITY, 10_000)?;
            truncated |= r.truncated;
            for m in &r.members {
                worst = worst.max(m.worst_distance);
            }
        }
    }
    out.truncated |= truncated;
    out.verdicts.push(format!(
        "standard paths between members 0 and {last}: measured R = {worst} at K~ = {}",
        p.k_tilde
    ));
    out.step("standard_paths", json!({ "k_tilde": p.k_tilde, "measured_r": worst, "truncated": truncated }));
    Ok(())
}

fn gnuplot_script(cfg: &ExperimentConfig, prefix: &str) -> Option<String> {
    let name = Path::new(prefix).file_name()?.to_string_lossy().into_owned();
    let (file, using, title) = match cfg.params {
        Params::Census(_) => ("census.csv", "1:2", "ball size"),
        Params::Genericity(_) => ("genericity.csv", "1:4", "filtered / total"),
        Params::Conjugacy(_) => ("conjugacy.csv", "1:2", "classes"),
        Params::Barriers(_) => ("barriers.csv", "2:4", "barrier-free sphere count"),
        _ => return None,
    };
    Some(format!(
        "set datafile separator ','\nset key autotitle columnhead\nset logscale y\nset xlabel 'n'\n\
         set terminal pngcairo\nset output '{name}.png'\nplot '{name}.{file}' using {using} with linespoints title '{title}'\n"
    ))
}

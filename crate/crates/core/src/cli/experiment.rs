//! The named experiments behind `gurevich-lab run`.

use serde_json::{json, Value};

use super::cache;
use super::config::{Built, ExperimentConfig, ExperimentKind};
use super::report::{fmt_float, num, nums, Report, Table};
use crate::abelian::{fit_lattice_correction, minimize_beta, winding_cycle, AbelianData, CriticalPoint};
use crate::equidist::{averaged_empirical, ld_ratio, tilted_equilibrium, EmpiricalEdgeMeasure, LD_GRID};
use crate::error::{Error, Result};
use crate::extension::{
    check_transitivity, estimate_gurevich_with, trivial_counts, truncated_transfer_spr, weighted_trivial_counts,
    CountOptions, CountSequence, GrowthEstimate, SkewSystem, Transitivity,
};
use crate::groups::GroupKind;
use crate::suspension::{
    cover_entropy_abelian, cover_entropy_counting_with, flow_entropy, flow_orbit_table, FlowOptions, Suspension,
};
use crate::thermo::{
    equilibrium_measure, integrate_edge, measure_entropy, pressure, pressure_root, EdgePotential, MarkovMeasure,
};

/// Run-time switches that are not part of the experiment definition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Fill the `wall_time_ms` column of count tables. Off by default so
    /// that reports are byte-identical across runs.
    pub timings: bool,
}

/// Runs the experiment described by `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    run_experiment_with(config, RunOptions::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, options: RunOptions) -> Result<Report> {
    let built = config.build()?;
    let mut report = Report::new(&config.name, config.experiment);
    report.set("alphabet", built.sft.alphabet_size());
    report.set("group", group_name(&built.skew));
    match config.experiment {
        ExperimentKind::Entropy => entropy(&built, &mut report)?,
        ExperimentKind::Pressure => pressure_experiment(&built, &mut report)?,
        ExperimentKind::Gurevich => gurevich(config, &built, options, &mut report)?,
        ExperimentKind::AbelianMin => abelian_min(config, &built, options, &mut report)?,
        ExperimentKind::AmenabilityGap => amenability_gap(config, &built, options, &mut report)?,
        ExperimentKind::FlowCount => flow_count(config, &built, &mut report)?,
        ExperimentKind::Equidistribution => equidistribution(config, &built, &mut report)?,
        ExperimentKind::Ld => ld(config, &built, &mut report)?,
    }
    Ok(report)
}

fn group_name(skew: &SkewSystem) -> String {
    match skew.group().kind() {
        GroupKind::Lattice { rank: 0 } => "trivial".into(),
        GroupKind::Lattice { rank: 1 } => "Z".into(),
        GroupKind::Lattice { rank } => format!("Z^{rank}"),
        GroupKind::Free { rank } => format!("F_{rank}"),
        GroupKind::Heisenberg => "Heisenberg".into(),
        GroupKind::Finite { table, .. } => format!("finite of order {}", table.len()),
    }
}

fn transitivity_value(t: &Transitivity) -> Value {
    match t {
        Transitivity::Transitive => json!("transitive"),
        Transitivity::Unknown { depth } => json!({ "unknown": { "depth": depth } }),
        Transitivity::Intransitive(w) => json!({ "intransitive": w }),
    }
}

fn critical_value(cp: &CriticalPoint) -> Value {
    json!({
        "xi": nums(&cp.xi),
        "value": num(cp.value),
        "gradient_norm": num(cp.gradient_norm),
        "iterations": cp.iterations,
    })
}

fn kernel_table(mm: &MarkovMeasure, built: &Built) -> Table {
    let mut t = Table::new("kernel", &["i", "j", "transition", "edge_mass"]);
    for (i, j) in built.sft.edges() {
        t.push(vec![
            i.to_string(),
            j.to_string(),
            fmt_float(mm.transition(i, j)),
            fmt_float(mm.edge_mass(i, j)),
        ]);
    }
    t
}

fn counts_table(est_counts: &CountSequence, frontier: &[usize], elapsed: &[f64], timings: bool) -> Table {
    let value_col = match est_counts {
        CountSequence::Exact(_) => "count",
        CountSequence::Weighted(_) => "weighted_count",
    };
    let mut t = Table::new("counts", &["n", value_col, "ball_size", "wall_time_ms"]);
    for n in 1..=est_counts.len() {
        let cell = match est_counts {
            CountSequence::Exact(v) => v[n - 1].to_string(),
            CountSequence::Weighted(v) => fmt_float(v[n - 1]),
        };
        t.push(vec![
            n.to_string(),
            cell,
            frontier.get(n - 1).map_or(String::new(), |b| b.to_string()),
            if timings {
                elapsed.get(n - 1).map_or(String::new(), |ms| format!("{ms:.3}"))
            } else {
                String::new()
            },
        ]);
    }
    t
}

fn set_estimate(report: &mut Report, est: &GrowthEstimate) {
    report.set_f("rate", est.rate);
    report.set_f("poly_exponent", est.poly_exponent);
    report.set_f("intercept", est.intercept);
    report.set_f("residual", est.residual);
    report.set("n_range", json!([est.n_range.0, est.n_range.1]));
    report.set("points", est.points);
    report.set("method", serde_json::to_value(est.method).expect("method serializes"));
    report.notes.push(format!(
        "growth fit ln Z_n = rate*n - kappa*ln n + c over the nonzero terms with n in [{}, {}]",
        est.n_range.0, est.n_range.1
    ));
}

fn estimate(config: &ExperimentConfig, built: &Built) -> Result<GrowthEstimate> {
    let options = CountOptions {
        method: config.params.method.into(),
        cap: config.params.ball_cap,
    };
    let n_max = config.params.n_max;
    match &built.potential {
        Some(f) => estimate_gurevich_with(&built.skew, n_max, Some(f), options),
        None => cache::estimate_cached(&built.skew, n_max, options),
    }
}

fn entropy(built: &Built, report: &mut Report) -> Result<()> {
    let irr = built.sft.irreducibility();
    report.set("irreducible", irr.irreducible);
    report.set("period", irr.period);
    report.set_f("value", built.sft.topological_entropy()?);
    Ok(())
}

fn pressure_experiment(built: &Built, report: &mut Report) -> Result<()> {
    let sft = &built.sft;
    let f = built.potential.clone().unwrap_or_else(|| EdgePotential::zero(sft));
    let p = pressure(sft, &f)?;
    let mm = equilibrium_measure(sft, &f)?;
    let h = measure_entropy(&mm);
    let integral = integrate_edge(&mm, &f);
    report.set_f("value", p);
    report.set_f("measure_entropy", h);
    report.set_f("integral", integral);
    report.set_f("variational_defect", p - h - integral);
    report.set("stationary", nums(&mm.stationary));
    if let Some(r) = &built.roof {
        report.set_f("pressure_root", pressure_root(sft, r, Some(&f))?);
    }
    report.tables.push(kernel_table(&mm, built));
    Ok(())
}

fn gurevich(config: &ExperimentConfig, built: &Built, options: RunOptions, report: &mut Report) -> Result<()> {
    let est = estimate(config, built)?;
    set_estimate(report, &est);
    let tr = check_transitivity(&built.skew, config.params.depth)?;
    report.set("transitivity", transitivity_value(&tr));
    let f = built
        .potential
        .clone()
        .unwrap_or_else(|| EdgePotential::zero(&built.sft));
    report.set_f("base_pressure", pressure(&built.sft, &f)?);
    report.tables.push(counts_table(
        &est.counts,
        &est.frontier,
        &est.elapsed_ms,
        options.timings,
    ));
    Ok(())
}

fn abelian_min(config: &ExperimentConfig, built: &Built, options: RunOptions, report: &mut Report) -> Result<()> {
    let sft = &built.sft;
    let data = AbelianData::new(&built.skew, built.potential.clone())?;
    let cp = minimize_beta(&data, config.params.tolerance)?;
    report.set("critical_point", critical_value(&cp));
    report.set("rank", data.rank());
    let f = built.potential.clone().unwrap_or_else(|| EdgePotential::zero(sft));
    let base = pressure(sft, &f)?;
    let mm = equilibrium_measure(sft, &f)?;
    let wc = winding_cycle(&mm, &data);
    report.set_f("base_pressure", base);
    report.set("winding_cycle_base", nums(&wc));
    report.set("h_equals_base", (cp.value - base).abs() < 1e-8);
    report.set("winding_cycle_vanishes", wc.iter().all(|x| x.abs() < 1e-9));

    let n_max = config.params.n_max;
    let counts = match &built.potential {
        None => {
            let c = trivial_counts(data.skew(), n_max, config.params.ball_cap)?;
            (CountSequence::Exact(c.counts), c.frontier, c.elapsed_ms)
        }
        Some(f) => {
            let c = weighted_trivial_counts(data.skew(), n_max, f, config.params.ball_cap)?;
            (CountSequence::Weighted(c.counts), c.frontier, c.elapsed_ms)
        }
    };
    match fit_lattice_correction(&counts.0, cp.value) {
        Ok(k) => report.set_f("kappa_hat", k),
        Err(e) => report.set("kappa_hat", e.to_string()),
    }
    report.set_f("kappa_target", data.rank() as f64 / 2.0);
    report.notes.push(
        "kappa is the discrete per-n correction exponent (target a/2); the flow-level cumulative exponent is 1 + a/2"
            .into(),
    );
    report
        .tables
        .push(counts_table(&counts.0, &counts.1, &counts.2, options.timings));
    Ok(())
}

fn amenability_gap(config: &ExperimentConfig, built: &Built, options: RunOptions, report: &mut Report) -> Result<()> {
    let est = estimate(config, built)?;
    set_estimate(report, &est);
    let data = AbelianData::new(&built.skew, built.potential.clone())?;
    let cp = minimize_beta(&data, config.params.tolerance)?;
    let gap = cp.value - est.rate;
    let tol = config.params.verdict_tolerance;
    report.set_f("h_gur_estimate", est.rate);
    report.set_f("h_gur_abelian", cp.value);
    report.set_f("difference", gap);
    report.set_f("verdict_tolerance", tol);
    report.set("verdict", if gap > tol { "gap" } else { "no-gap-within-tolerance" });
    report.set("amenable", built.skew.group().is_amenable());
    report.set("critical_point", critical_value(&cp));
    if !config.params.radii.is_empty() {
        let mut t = Table::new("transfer", &["radius", "log_spr"]);
        let mut values = Vec::new();
        for &r in &config.params.radii {
            let v = truncated_transfer_spr(&built.skew, built.potential.as_ref(), r, config.params.ball_cap)?;
            t.push(vec![r.to_string(), fmt_float(v)]);
            values.push(v);
        }
        report.set("transfer_monotone", values.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        report.set("transfer_log_spr", nums(&values));
        report.tables.push(t);
    }
    report.tables.push(counts_table(
        &est.counts,
        &est.frontier,
        &est.elapsed_ms,
        options.timings,
    ));
    Ok(())
}

fn flow_count(config: &ExperimentConfig, built: &Built, report: &mut Report) -> Result<()> {
    let sft = &built.sft;
    let roof = built.roof.clone().unwrap_or_else(|| EdgePotential::constant(sft, 1.0));
    let susp = Suspension::new(sft.clone(), roof)?;
    let options = FlowOptions {
        max_depth: config.params.max_depth,
        ball_cap: config.params.ball_cap,
        ..FlowOptions::default()
    };
    let t_max = config.params.t_max;
    let ts: Vec<f64> = (1..=t_max).map(|t| t as f64).collect();
    let rows = flow_orbit_table(&susp, Some(&built.skew), &ts, &options)?;
    let mut table = Table::new("flow_counts", &["T", "count_all", "count_trivial_class", "prime_count"]);
    for r in &rows {
        table.push(vec![
            fmt_float(r.t),
            r.count_all.to_string(),
            r.count_trivial_class.to_string(),
            r.prime_count.to_string(),
        ]);
    }
    report.tables.push(table);
    report.set_f("flow_entropy", flow_entropy(&susp)?);
    let tr = check_transitivity(&built.skew, config.params.depth)?;
    if matches!(tr, Transitivity::Unknown { .. }) {
        report
            .notes
            .push("transitivity could not be decided within the search depth".into());
    }
    report.set("transitivity", transitivity_value(&tr));
    let est = cover_entropy_counting_with(&susp, &built.skew, t_max, &options)?;
    report.set_f("cover_entropy_counting", est.rate);
    report.set_f("cover_poly_exponent", est.poly_exponent);
    report.set("cover_n_range", json!([est.n_range.0, est.n_range.1]));
    report.notes.push(format!(
        "cover entropy fit over the grid points T in [{}, {}] where the trivial-class prime count increases",
        est.n_range.0, est.n_range.1
    ));
    let data = AbelianData::new(&built.skew, built.potential.clone())?;
    match cover_entropy_abelian(&susp, &data) {
        Ok(v) => report.set_f("cover_entropy_abelian", v),
        Err(Error::NotFull(m)) => {
            report.set("cover_entropy_abelian", Value::Null);
            report.notes.push(format!("abelian cover entropy undefined: {m}"));
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

fn equidistribution(config: &ExperimentConfig, built: &Built, report: &mut Report) -> Result<()> {
    let data = AbelianData::new(&built.skew, built.potential.clone())?;
    let (xi, mm) = tilted_equilibrium(&data)?;
    let target = EmpiricalEdgeMeasure::from_markov(&mm);
    report.set("xi", nums(&xi));
    let mut t = Table::new("tv", &["n", "tv", "status"]);
    let mut list = Vec::new();
    for &n in &config.params.ns {
        match averaged_empirical(&built.skew, n) {
            Ok(avg) => {
                let tv = avg.total_variation(&target);
                t.push(vec![n.to_string(), fmt_float(tv), "ok".into()]);
                list.push(json!({ "n": n, "tv": num(tv) }));
            }
            Err(Error::NoOrbits { residue, modulus, .. }) => {
                let status = format!("no-orbits {residue} mod {modulus}");
                t.push(vec![n.to_string(), String::new(), status.clone()]);
                list.push(json!({ "n": n, "tv": Value::Null, "status": status }));
            }
            Err(e) => return Err(e),
        }
    }
    report.set("tv", Value::Array(list));
    report
        .notes
        .push("orbits are taken at exact length n (roof 1); distances are on edge marginals".into());
    report.tables.push(t);
    report.tables.push(kernel_table(&mm, built));
    Ok(())
}

fn ld(config: &ExperimentConfig, built: &Built, report: &mut Report) -> Result<()> {
    let data = AbelianData::new(&built.skew, built.potential.clone())?;
    let observable = built.observable.as_ref().expect("validated");
    let (xi, mm) = tilted_equilibrium(&data)?;
    let delta = config.params.delta;
    report.set("xi", nums(&xi));
    report.set_f("mean", integrate_edge(&mm, observable));
    report.set_f("delta", delta);
    report.set_f("grid", LD_GRID);
    let mut t = Table::new("ld", &["n", "ratio", "status"]);
    let mut list = Vec::new();
    for &n in &config.params.ns {
        match ld_ratio(&built.skew, n, &data, observable, delta) {
            Ok(r) => {
                t.push(vec![n.to_string(), fmt_float(r), "ok".into()]);
                list.push(json!({ "n": n, "ratio": num(r) }));
            }
            Err(Error::NoOrbits { residue, modulus, .. }) => {
                let status = format!("no-orbits {residue} mod {modulus}");
                t.push(vec![n.to_string(), String::new(), status.clone()]);
                list.push(json!({ "n": n, "ratio": Value::Null, "status": status }));
            }
            Err(e) => return Err(e),
        }
    }
    report.set("ratios", Value::Array(list));
    report.notes.push(format!(
        "observable values are snapped to a {LD_GRID} grid; -inf means no loop deviates"
    ));
    report.tables.push(t);
    Ok(())
}

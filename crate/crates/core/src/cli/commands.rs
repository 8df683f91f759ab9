use std::fmt::Write as _;
use std::io::Write as _;

use serde_json::{json, Value};

use super::data::{align, feature_table, load_dataset, read_text, Dataset, InputRecord, Source};
use super::manifest::OutputDir;
use super::*;
use crate::baselines::baseline_distances;
use crate::distances::DistanceMatrix;
use crate::embedding::classical_mds;
use crate::evaluation::{
    ablate_features, ablation_csv, compare_methods, feature_saliency, fit_method, lopo_evaluate,
    minimal_pair_analysis, normalized_weight_comparison, normalized_weights_csv, voicing_pairs, EvaluationReport,
    SaliencyReport,
};
use crate::inventory::Inventory;
use crate::solvers::SolverConfig;
use crate::svg::ScatterPlot;

macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

pub(super) fn dispatch(command: Command, args: Vec<String>) -> Outcome<()> {
    match command {
        Command::Distances(a) => distances(a, args),
        Command::Fit(a) => with_pool(a.output.jobs, || fit(a.clone(), args)),
        Command::Evaluate(a) => with_pool(a.output.jobs, || evaluate(a.clone(), args)),
        Command::Ablate(a) => with_pool(a.output.jobs, || ablate(a.clone(), args)),
        Command::Saliency(a) => with_pool(a.output.jobs, || saliency(a.clone(), args)),
        Command::Mds(a) => mds(a, args),
        Command::CompareLanguages(a) => with_pool(a.output.jobs, || compare_languages(a.clone(), args)),
        Command::MinimalPairs(a) => minimal_pairs(a, args),
        Command::Defaults => {
            say!("{}", SolverConfig::default().to_json()?);
            Ok(())
        }
    }
}

fn with_pool(jobs: usize, f: impl FnOnce() -> Outcome<()> + Send) -> Outcome<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Internal(format!("thread pool: {e}")))?;
    pool.install(f)
}

fn json_value(text: String) -> Outcome<Value> {
    serde_json::from_str(&text).map_err(|e| Failure::Internal(e.to_string()))
}

fn pretty(value: &Value) -> Outcome<String> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| Failure::Internal(e.to_string()))
}

fn solver_config(method: Method, flags: &SolverArgs) -> Outcome<SolverConfig> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = read_text(path)?;
            SolverConfig::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => SolverConfig::default(),
    };
    cfg.method = method;
    if flags.lambda.is_some() {
        cfg.lambda = flags.lambda;
    }
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if let Some(c) = flags.aggressiveness {
        cfg.oasis_aggressiveness = c;
    }
    if let Some(n) = flags.iterations {
        cfg.oasis_iterations = n;
    }
    if let Some(t) = flags.tolerance {
        cfg.tolerance = t;
    }
    if let Some(n) = flags.max_sweeps {
        cfg.max_sweeps = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn config_inputs(flags: &SolverArgs) -> Outcome<Vec<InputRecord>> {
    match &flags.config {
        Some(path) => {
            let text = read_text(path)?;
            Ok(vec![InputRecord {
                role: "config".into(),
                source: path.display().to_string(),
                sha256: super::data::sha256_hex(text.as_bytes()),
            }])
        }
        None => Ok(Vec::new()),
    }
}

fn source_of(data: &DataArgs) -> Outcome<Source> {
    match (&data.confusion, &data.distances) {
        (Some(c), None) => Source::parse(c),
        (None, Some(d)) => Ok(Source::Distances(d.clone())),
        _ => Err(Failure::Usage("pass exactly one of --confusion or --distances".into())),
    }
}

fn primary_dataset(data: &DataArgs) -> Outcome<Dataset> {
    let mut ds = load_dataset(&source_of(data)?, data.smoothing)?;
    if let Some(name) = &data.name {
        ds.name = name.clone();
    }
    Ok(ds)
}

fn named_dataset((name, source): &(String, String), smoothing: f64) -> Outcome<Dataset> {
    let mut ds = load_dataset(&Source::parse(source)?, smoothing)?;
    ds.name = name.clone();
    Ok(ds)
}

struct Aligned {
    inv: Inventory,
    dm: DistanceMatrix<f64>,
    inputs: Vec<InputRecord>,
}

fn aligned(theory: &TheoryArgs, ds: &Dataset) -> Outcome<Aligned> {
    let (table, record) = feature_table(theory.theory)?;
    let (inv, dm) = align(&table, &ds.distances, theory.dataset)?;
    let mut inputs = ds.inputs.clone();
    inputs.push(record);
    Ok(Aligned { inv, dm, inputs })
}

fn report_files(out: &OutputDir) -> String {
    let names: Vec<&str> = out.written().iter().map(|a| a.path.as_str()).collect();
    names.join(", ")
}

fn distances(a: DistancesArgs, args: Vec<String>) -> Outcome<()> {
    let ds = load_dataset(&Source::parse(&a.confusion)?, a.smoothing)?;
    let mut out = OutputDir::create(&a.output.out_dir)?;
    if let Some(sm) = &ds.similarity {
        out.write("similarity.csv", &sm.to_csv())?;
    }
    out.write("distances.csv", &ds.distances.to_csv())?;
    say!("{} phonemes; wrote {} to {}", ds.distances.len(), report_files(&out), a.output.out_dir.display());
    out.finish("distances", args, ds.inputs, None)?;
    Ok(())
}

/// Square similarity CSV for the score-only baselines.
fn score_csv(labels: &[String], top: f64, dm: &DistanceMatrix<f64>) -> String {
    let mut out = String::from("phoneme");
    for l in labels {
        write!(out, ",{l}").unwrap();
    }
    out.push('\n');
    for (i, l) in labels.iter().enumerate() {
        out.push_str(l);
        for j in 0..labels.len() {
            write!(out, ",{}", top - dm.get(i, j)).unwrap();
        }
        out.push('\n');
    }
    out
}

fn fit(a: FitArgs, args: Vec<String>) -> Outcome<()> {
    if a.solver.lambda.is_some() && !a.method.is_least_squares() {
        return Err(Failure::Usage(format!("--lambda applies to ls and ls-diag, not {}", a.method)));
    }
    let cfg = solver_config(a.method, &a.solver)?;
    let ds = primary_dataset(&a.data)?;
    let al = aligned(&a.theory, &ds)?;
    let mut inputs = al.inputs.clone();
    inputs.extend(config_inputs(&a.solver)?);
    let mut out = OutputDir::create(&a.output.out_dir)?;
    match a.method {
        Method::Pmv | Method::Frisch => {
            let dm: DistanceMatrix<f64> = baseline_distances(a.method, &al.inv)?;
            let top = if a.method == Method::Pmv { 3.0 } else { 1.0 };
            out.write("scores.csv", &score_csv(al.inv.phonemes(), top, &dm))?;
            say!("{} similarity scores for {} phonemes", a.method, al.inv.len());
        }
        _ => {
            let (model, lambda) = fit_method(&al.inv, &al.dm, &cfg)?;
            out.write("model.json", &(model.to_json()? + "\n"))?;
            let lambda = lambda.map(|l| format!(" lambda={l}")).unwrap_or_default();
            say!("{} on {} phonemes, {} features{lambda}", a.method, al.inv.len(), model.n_features());
        }
    }
    say!("wrote {} to {}", report_files(&out), a.output.out_dir.display());
    out.finish("fit", args, inputs, Some(cfg))?;
    Ok(())
}

fn evaluate(a: EvaluateArgs, args: Vec<String>) -> Outcome<()> {
    let mut methods = Vec::new();
    for m in &a.method {
        if !methods.contains(m) {
            methods.push(*m);
        }
    }
    let ds = primary_dataset(&a.data)?;
    let al = aligned(&a.theory, &ds)?;
    let mut reports: Vec<EvaluationReport<f64>> = Vec::new();
    let mut cfg = None;
    for &m in &methods {
        let c = solver_config(m, &a.solver)?;
        reports.push(lopo_evaluate(&al.inv, &al.dm, m, &c)?);
        cfg.get_or_insert(c);
    }
    let mut comparisons = Vec::new();
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            comparisons.push(compare_methods(&reports[i], &reports[j])?);
        }
    }

    let mut out = OutputDir::create(&a.output.out_dir)?;
    let mut doc = json!({
        "dataset": ds.name,
        "theory": a.theory.theory.as_str(),
        "reports": reports.iter().map(|r| r.to_json().map_err(Failure::from).and_then(json_value)).collect::<Outcome<Vec<_>>>()?,
    });
    if !comparisons.is_empty() {
        doc["comparisons"] = serde_json::to_value(&comparisons).map_err(|e| Failure::Internal(e.to_string()))?;
    }
    out.write("evaluation.json", &pretty(&doc)?)?;
    for r in &reports {
        out.write(&format!("folds_{}.csv", r.method), &r.fold_csv())?;
    }
    for r in &reports {
        say!("{:<11} mean_rho={:.4} sd={:.4}", r.method.as_str(), r.mean_rho, r.sd_rho);
    }
    for c in &comparisons {
        say!("{} vs {}: t={:.4} p={:.4e}", c.method_a, c.method_b, c.statistic, c.p_value);
    }
    let mut inputs = al.inputs;
    inputs.extend(config_inputs(&a.solver)?);
    out.finish("evaluate", args, inputs, cfg)?;
    Ok(())
}

fn ablate(a: AnalysisArgs, args: Vec<String>) -> Outcome<()> {
    let cfg = solver_config(Method::LsDiag, &a.solver)?;
    let ds = primary_dataset(&a.data)?;
    let al = aligned(&a.theory, &ds)?;
    let entries = ablate_features(&al.inv, &al.dm, &cfg)?;
    let mut out = OutputDir::create(&a.output.out_dir)?;
    out.write("ablation.csv", &ablation_csv(&entries))?;
    let doc = serde_json::to_value(&entries).map_err(|e| Failure::Internal(e.to_string()))?;
    out.write("ablation.json", &pretty(&doc)?)?;
    for e in &entries {
        say!("{:<4} delta={:+.4}", e.feature, e.delta);
    }
    let mut inputs = al.inputs;
    inputs.extend(config_inputs(&a.solver)?);
    out.finish("ablate", args, inputs, Some(cfg))?;
    Ok(())
}

fn saliency_of(al: &Aligned, cfg: &SolverConfig) -> Outcome<(EvaluationReport<f64>, SaliencyReport)> {
    let report = lopo_evaluate(&al.inv, &al.dm, Method::LsDiag, cfg)?;
    let saliency = feature_saliency(&report.models())?;
    Ok((report, saliency))
}

fn saliency(a: AnalysisArgs, args: Vec<String>) -> Outcome<()> {
    let cfg = solver_config(Method::LsDiag, &a.solver)?;
    let ds = primary_dataset(&a.data)?;
    let al = aligned(&a.theory, &ds)?;
    let (report, saliency) = saliency_of(&al, &cfg)?;
    let mut out = OutputDir::create(&a.output.out_dir)?;
    out.write("saliency.csv", &saliency.to_csv())?;
    out.write("saliency.json", &(saliency.to_json()? + "\n"))?;
    out.write("folds.csv", &report.fold_csv())?;
    for (rank, (f, w)) in saliency.ranked().iter().enumerate() {
        say!("{:>2} {:<4} {:.4}", rank + 1, f, w);
    }
    let mut inputs = al.inputs;
    inputs.extend(config_inputs(&a.solver)?);
    out.finish("saliency", args, inputs, Some(cfg))?;
    Ok(())
}

fn mds(a: MdsArgs, args: Vec<String>) -> Outcome<()> {
    let ds = primary_dataset(&a.data)?;
    let e = classical_mds(&ds.distances, a.dims)?;
    let mut inputs = ds.inputs.clone();
    let mut plot = ScatterPlot::new(format!("MDS of {}", ds.name), "axis 1", "axis 2");
    plot.equal_aspect = true;
    for (i, label) in e.labels.iter().enumerate() {
        let y = if e.dims() > 1 { e.coords[[i, 1]] } else { 0.0 };
        plot.point(label, e.coords[[i, 0]], y);
    }
    if !a.overlay.is_empty() {
        let (art, art_record) = feature_table(crate::inventory::TheoryId::Articulatory)?;
        let (phon, phon_record) = feature_table(crate::inventory::TheoryId::Phonological)?;
        inputs.push(art_record);
        inputs.push(phon_record);
        for overlay in &a.overlay {
            let members = overlay.members(&e.labels, &art, &phon)?;
            plot.outline(overlay.as_str(), &members);
        }
    }
    let mut out = OutputDir::create(&a.output.out_dir)?;
    out.write("mds.csv", &e.to_csv())?;
    let doc = json!({
        "dataset": ds.name,
        "dims": e.dims(),
        "stress": e.stress,
        "eigenvalue_share": e.eigenvalue_share,
        "overlays": plot.outlines.iter().map(|o| o.name.clone()).collect::<Vec<_>>(),
    });
    out.write("mds.json", &pretty(&doc)?)?;
    out.write("mds.svg", &plot.render())?;
    say!("stress={:.4} eigenvalue_share={:.4}", e.stress, e.eigenvalue_share);
    say!("wrote {} to {}", report_files(&out), a.output.out_dir.display());
    out.finish("mds", args, inputs, None)?;
    Ok(())
}

fn compare_languages(a: CompareArgs, args: Vec<String>) -> Outcome<()> {
    let cfg = solver_config(Method::LsDiag, &a.solver)?;
    let first = primary_dataset(&a.data)?;
    let second = named_dataset(&a.other, a.data.smoothing)?;
    if first.name == second.name {
        return Err(Failure::Usage(format!("both datasets are named '{}'; pass --name", first.name)));
    }
    let al_a = aligned(&a.theory, &first)?;
    let al_b = aligned(&a.theory, &second)?;
    let (_, sal_a) = saliency_of(&al_a, &cfg)?;
    let (_, sal_b) = saliency_of(&al_b, &cfg)?;
    let rows = normalized_weight_comparison(&sal_a, &sal_b)?;

    let mut plot = ScatterPlot::new("Normalized feature weights", first.name.clone(), second.name.clone());
    plot.diagonal = true;
    for r in &rows {
        plot.point(&r.feature, r.a, r.b);
    }
    let mut out = OutputDir::create(&a.output.out_dir)?;
    out.write("normalized_weights.csv", &normalized_weights_csv(&rows, &first.name, &second.name))?;
    out.write(&format!("saliency_{}.csv", first.name), &sal_a.to_csv())?;
    out.write(&format!("saliency_{}.csv", second.name), &sal_b.to_csv())?;
    out.write("compare.svg", &plot.render())?;
    for r in &rows {
        say!("{:<4} {:.4} {:.4}", r.feature, r.a, r.b);
    }
    let mut inputs = al_a.inputs;
    inputs.extend(al_b.inputs);
    inputs.extend(config_inputs(&a.solver)?);
    out.finish("compare-languages", args, inputs, Some(cfg))?;
    Ok(())
}

fn minimal_pairs(a: MinimalPairsArgs, args: Vec<String>) -> Outcome<()> {
    let first = primary_dataset(&a.data)?;
    let mut sets = vec![first];
    for other in &a.other {
        sets.push(named_dataset(other, a.data.smoothing)?);
    }
    for (i, s) in sets.iter().enumerate() {
        if sets[..i].iter().any(|t| t.name == s.name) {
            return Err(Failure::Usage(format!("dataset name '{}' is used twice", s.name)));
        }
    }
    let pairs = if a.pair.is_empty() { voicing_pairs() } else { a.pair.clone() };
    let dms: Vec<(String, DistanceMatrix<f64>)> = sets.iter().map(|s| (s.name.clone(), s.distances.clone())).collect();
    let report = minimal_pair_analysis(&dms, &pairs, a.alternative)?;

    let others: Vec<&str> = sets[1..].iter().map(|s| s.name.as_str()).collect();
    let mut plot = ScatterPlot::new("Minimal-pair distance ranks", format!("{} rank", sets[0].name), format!("{} rank", others.join(" / ")));
    plot.diagonal = true;
    for p in &report.pairs {
        for (d, name) in others.iter().enumerate() {
            let label = if others.len() > 1 { format!("{}-{} ({name})", p.a, p.b) } else { format!("{}-{}", p.a, p.b) };
            plot.point(label, p.ranks[0], p.ranks[d + 1]);
        }
    }
    let mut out = OutputDir::create(&a.output.out_dir)?;
    out.write("minimal_pairs.csv", &report.to_csv())?;
    out.write("minimal_pairs.json", &(report.to_json()? + "\n"))?;
    out.write("minimal_pairs.svg", &plot.render())?;
    for c in &report.comparisons {
        say!("{} vs {}: W+={} p={:.4}", c.method_a, c.method_b, c.statistic, c.p_value);
    }
    let inputs = sets.into_iter().flat_map(|s| s.inputs).collect();
    out.finish("minimal-pairs", args, inputs, None)?;
    Ok(())
}

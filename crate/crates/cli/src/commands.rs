use std::path::PathBuf;

use seco_core::ndarray::Array2;
use seco_core::validation::{default_bounds_grid, default_coherence_grids, thin};
use seco_core::{
    ari, ari_report, axiom_suite, bounds_experiment, caice, choose_k, coherence_levelsets,
    dissimilarity_from_similarity, hclust, kmedoids, load_dataset, parse_grid, rank_matrix,
    read_matrix_csv, sample_ai_blocks, sample_nested_logistic, seco_matrix, select_tau, Dataset,
    Family, KMethod, Linkage, NestedModelSpec, Partition, Report, TailParams, DEFAULT_TAU_GRID,
};
use serde_json::json;

use crate::{
    AriArgs, BoundsArgs, CliError, ClusterArgs, DataArgs, Run, SecoArgs, SelectTauArgs,
    SilhouetteArgs, SimulateArgs, Suite,
};

fn write_json(path: PathBuf, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json serializes");
    std::fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load(run: &mut Run, input: &DataArgs) -> Result<Dataset, CliError> {
    let data = run.params.required("data", input.data.clone())?;
    let layout = run.params.required("layout", input.layout.clone())?;
    let data = run.input(data)?;
    let layout = run.input(layout)?;
    Ok(load_dataset(data, layout)?)
}

fn read_partition(run: &mut Run, key: &str, flag: &Option<PathBuf>) -> Result<Partition, CliError> {
    let path = run.params.required(key, flag.clone())?;
    let path = run.input(path)?;
    Ok(Partition::read_json(path)?)
}

fn read_matrix(run: &mut Run, flag: &Option<PathBuf>) -> Result<Array2<f64>, CliError> {
    let path = run.params.required("matrix", flag.clone())?;
    let path = run.input(path)?;
    Ok(read_matrix_csv(path)?)
}

/// Integer grid `a:b`, `a:step:b` or a comma-separated list.
pub(crate) fn parse_usize_grid(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("invalid integer grid {spec:?}"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    let grid: Vec<usize> = match parts.as_slice() {
        [list] => list.split(',').map(num).collect::<Result<_, _>>()?,
        [a, b] => (num(a)?..=num(b)?).collect(),
        [a, s, b] => {
            let step = num(s)?;
            if step == 0 {
                return Err(bad());
            }
            (num(a)?..=num(b)?).step_by(step).collect()
        }
        _ => return Err(bad()),
    };
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}

fn parse_family(name: &str) -> Result<Family, CliError> {
    serde_json::from_value(json!(name))
        .map_err(|_| CliError::Usage(format!("unknown family {name:?} (logistic or hr)")))
}

fn parse_linkage(run: &mut Run, flag: &Option<String>) -> Result<Linkage, CliError> {
    let name = run
        .params
        .or("linkage", flag.clone(), Linkage::default().to_string())?;
    Ok(name.parse()?)
}

pub fn cmd_simulate(run: &mut Run, args: &SimulateArgs) -> Result<bool, CliError> {
    let spec_path = run.params.required("spec", args.spec.clone())?;
    let n = run.params.required("n", args.n)?;
    let spec_path = run.input(spec_path)?;
    let text = std::fs::read_to_string(&spec_path)
        .map_err(|e| CliError::Io(format!("{}: {e}", spec_path.display())))?;
    let parse_err = |e: serde_json::Error| CliError::Io(format!("{}: {e}", spec_path.display()));
    let value: serde_json::Value = serde_json::from_str(&text).map_err(parse_err)?;
    let seed = run.seed;
    let data = if value.is_array() {
        let specs: Vec<NestedModelSpec> = serde_json::from_value(value).map_err(parse_err)?;
        let (data, truth) = sample_ai_blocks(n, &specs, seed)?;
        truth.write_json(run.output("truth.json"))?;
        run.result("blocks", specs.len());
        data
    } else {
        let spec: NestedModelSpec = serde_json::from_value(value).map_err(parse_err)?;
        sample_nested_logistic(n, &spec, seed)?
    };
    data.write_csv(run.output("data.csv"))?;
    data.layout().write_json(run.output("layout.json"))?;
    run.result("n", data.n());
    run.result("q", data.q());
    run.result("d", data.d());
    println!(
        "sampled {} rows, {} columns, {} groups",
        data.n(),
        data.q(),
        data.d()
    );
    Ok(true)
}

pub fn cmd_seco(run: &mut Run, args: &SecoArgs) -> Result<bool, CliError> {
    let data = load(run, &args.input)?;
    let k = run.params.required("k", args.k)?;
    TailParams { k, m: None }.validate(data.n())?;
    let matrix = seco_matrix(&rank_matrix(&data), data.layout(), k)?;
    matrix.write_csv(run.output("seco.csv"))?;
    matrix.write_sidecar(run.output("seco.json"))?;
    run.result("d", matrix.d());
    println!("SECO matrix {}x{} with k={k}", matrix.d(), matrix.d());
    Ok(true)
}

pub fn cmd_cluster(run: &mut Run, args: &ClusterArgs) -> Result<bool, CliError> {
    let similarity = read_matrix(run, &args.matrix)?;
    let method = run.params.required("method", args.method.clone())?;
    let partition = match method.as_str() {
        "caice" => {
            let tau = run
                .params
                .optional("tau", args.tau)?
                .ok_or_else(|| CliError::Usage("caice needs --tau".into()))?;
            caice(&similarity, tau)?
        }
        "hclust" | "kmedoids" => {
            let k = run
                .params
                .optional("K", args.n_clusters)?
                .ok_or_else(|| CliError::Usage(format!("{method} needs --K")))?;
            let dissim = dissimilarity_from_similarity(&similarity);
            let p = if method == "hclust" {
                hclust(&dissim, k, parse_linkage(run, &args.linkage)?)?
            } else {
                let fit = kmedoids(&dissim, k, run.seed)?;
                run.result("objective", fit.objective);
                run.result("medoids", &fit.medoids);
                fit.partition
            };
            let mut meta = p.meta().clone();
            meta.k_source = Some("user".into());
            p.with_meta(meta)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown method {other:?} (caice, hclust or kmedoids)"
            )))
        }
    };
    partition.write_json(run.output("partition.json"))?;
    run.result("clusters", partition.len());
    println!("{} clusters", partition.len());
    Ok(true)
}

pub fn cmd_select_tau(run: &mut Run, args: &SelectTauArgs) -> Result<bool, CliError> {
    let data = load(run, &args.input)?;
    let r = rank_matrix(&data);
    let similarity = match run.params.optional("matrix", args.matrix.clone())? {
        Some(path) => {
            let path = run.input(path)?;
            read_matrix_csv(path)?
        }
        None => {
            let k = run
                .params
                .optional("k", args.k)?
                .ok_or_else(|| CliError::Usage("select-tau needs --matrix or --k".into()))?;
            seco_matrix(&r, data.layout(), k)?.entries().clone()
        }
    };
    let grid_spec = run
        .params
        .or("grid", args.grid.clone(), DEFAULT_TAU_GRID.to_string())?;
    let grid = parse_grid(&grid_spec)?;
    let k_loss = run.params.or("k-loss", args.k_loss, 30)?;
    TailParams { k: k_loss, m: None }.validate(data.n())?;
    let curve = select_tau(&r, data.layout(), &similarity, &grid, k_loss)?;
    curve.write_csv(run.output("tau_curve.csv"))?;
    let best = caice(&similarity, curve.best_tau)?;
    best.write_json(run.output("partition.json"))?;
    let i = curve.best_index();
    write_json(
        run.output("best_tau.json"),
        &json!({"best_tau": curve.best_tau, "seco": curve.seco_values[i], "clusters": best.len()}),
    )?;
    run.result("best_tau", curve.best_tau);
    run.result("clusters", best.len());
    println!("best tau {} ({} clusters)", curve.best_tau, best.len());
    Ok(true)
}

pub fn cmd_silhouette(run: &mut Run, args: &SilhouetteArgs) -> Result<bool, CliError> {
    let similarity = read_matrix(run, &args.matrix)?;
    let range = run
        .params
        .or("k-range", args.k_range.clone(), "2:10".to_string())?;
    let range = parse_usize_grid(&range)?;
    let method = match run
        .params
        .or("method", args.method.clone(), "hclust".to_string())?
        .as_str()
    {
        "hclust" => KMethod::Hclust(parse_linkage(run, &args.linkage)?),
        "kmedoids" => KMethod::Kmedoids,
        other => {
            return Err(CliError::Usage(format!(
                "unknown method {other:?} (hclust or kmedoids)"
            )))
        }
    };
    let table = choose_k(
        &dissimilarity_from_similarity(&similarity),
        &range,
        method,
        run.seed,
    )?;
    table.write_csv(run.output("silhouette.csv"))?;
    table
        .best_partition
        .write_json(run.output("partition.json"))?;
    run.result("best_K", table.best_k);
    println!("best K {}", table.best_k);
    Ok(true)
}

pub fn cmd_ari(run: &mut Run, args: &AriArgs) -> Result<bool, CliError> {
    let p1 = read_partition(run, "p1", &args.p1)?;
    let p2 = read_partition(run, "p2", &args.p2)?;
    let value = ari(&p1, &p2)?;
    write_json(run.output("ari.json"), &json!({ "ari": value }))?;
    run.result("ari", value);
    println!("{value}");
    Ok(true)
}

fn write_report(run: &mut Run, report: &Report) -> Result<bool, CliError> {
    report.write_csv(run.output("report.csv"))?;
    let path = run.output("report.json");
    std::fs::write(&path, report.summary_json() + "\n")
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    run.result("passed", report.passed());
    run.result("failed", report.failed());
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("FAIL {}: {}", c.name, c.detail);
    }
    println!("{} passed, {} failed", report.passed(), report.failed());
    Ok(report.all_passed())
}

fn validate_bounds(run: &mut Run, args: &BoundsArgs) -> Result<bool, CliError> {
    let grid = match run.params.optional("n-grid", args.n_grid.clone())? {
        Some(spec) => parse_usize_grid(&spec)?,
        None => {
            run.params.record("n-grid", "100:50:1000");
            default_bounds_grid()
        }
    };
    let exponent = run.params.or("exponent", args.exponent, 1.25)?;
    let k = run.params.or("k", args.k, 50)?;
    let m = run.params.or("m", args.m, 50)?;
    let table = bounds_experiment(&grid, exponent, k, m, run.seed)?;
    table.write_csv(run.output("bounds.csv"))?;
    write_report(run, &table.report())
}

pub fn cmd_validate(run: &mut Run, suite: &Suite) -> Result<bool, CliError> {
    match suite {
        Suite::Bounds(args) => validate_bounds(run, args),
        Suite::Axioms(args) => {
            let data = load(run, &args.input)?;
            let k = run.params.required("k", args.k)?;
            TailParams { k, m: None }.validate(data.n())?;
            let report = axiom_suite(&rank_matrix(&data), data.layout(), k, run.seed)?;
            write_report(run, &report)
        }
        Suite::Coherence(args) => {
            let family = parse_family(&run.params.or(
                "family",
                args.family.clone(),
                "logistic".to_string(),
            )?)?;
            let (mut mothers, mut children) = default_coherence_grids(family);
            if let Some(spec) = run
                .params
                .optional("mother-grid", args.mother_grid.clone())?
            {
                mothers = parse_grid(&spec)?;
            }
            if let Some(spec) = run.params.optional("child-grid", args.child_grid.clone())? {
                children = parse_grid(&spec)?;
            }
            let step = run.params.or("thin", args.thin, 1)?;
            let children = thin(&children, step);
            run.result("mother_points", mothers.len());
            run.result("child_points", children.len());
            let report = coherence_levelsets(family, &mothers, &children)?;
            write_report(run, &report)
        }
        Suite::Ari(args) => {
            let p1 = read_partition(run, "p1", &args.p1)?;
            let p2 = read_partition(run, "p2", &args.p2)?;
            let report = ari_report(&p1, &p2);
            if let Some(v) = report.checks[0].value {
                println!("{v}");
            }
            write_report(run, &report)
        }
    }
}

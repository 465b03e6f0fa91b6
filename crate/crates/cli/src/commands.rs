use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use cliquescout::clique::{clique_size_histogram, maximal_cliques};
use cliquescout::ingest::{ingest_reviews, read_store, save_store, write_store, ErrorBudget, IngestOptions};
use cliquescout::kdgraph::export::{read_edge_tsv, write_dot, write_edge_tsv, DotNode, NamedGraph};
use cliquescout::kdgraph::{build_kd_graph_with, BuildOptions};
use cliquescout::quasiclique::{maximal_pseudo_cliques, pseudo_cliques};
use cliquescout::report::{
    annotate as annotate_groups, export_group_graph, flag_groups, read_labels, read_listings, run_count_table,
    validate_listing, write_listings, FlagOptions, GraphFormat, GroupKind, TableSpec,
};
use cliquescout::synth::{self, differential, PlantedGroupSpec};
use cliquescout::{KdParams, QuasiParams, ReviewStore, Theta, VertexSet, WeightMode};
use serde::Serialize;

use crate::config::RunConfig;
use crate::{
    AnnotateArgs, BuildArgs, CliqueArgs, ExportArgs, FlagArgs, GraphSource, IngestArgs, QuasiArgs, StoreParams,
    SynthArgs, TableArgs, VerifyArgs,
};

/// Invalid or missing arguments; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    Usage(message.into()).into()
}

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn input(path: &Path) -> Result<Box<dyn BufRead>> {
    if is_stdio(path) {
        return Ok(Box::new(BufReader::new(io::stdin().lock())));
    }
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Box::new(BufReader::new(file)))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) if is_stdio(p) => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Ok(Box::new(BufWriter::new(file)))
        }
    }
}

/// Rejects two roles pointing at the same file.
fn ensure_distinct(paths: &[(&str, Option<&Path>)]) -> Result<()> {
    let named: Vec<(&str, &Path)> = paths
        .iter()
        .filter_map(|&(name, p)| p.filter(|p| !is_stdio(p)).map(|p| (name, p)))
        .collect();
    for (i, (a, pa)) in named.iter().enumerate() {
        for (b, pb) in &named[i + 1..] {
            if pa == pb {
                return Err(usage(format!("{a} and {b} both name {}", pa.display())));
            }
        }
    }
    let stdin_users: Vec<&str> = paths
        .iter()
        .filter(|(name, p)| name.starts_with("input") && p.is_some_and(is_stdio))
        .map(|(name, _)| *name)
        .collect();
    if stdin_users.len() > 1 {
        return Err(usage(format!("only one input can be stdin, got {}", stdin_users.join(" and "))));
    }
    Ok(())
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| usage(format!("{flag} is required")))
}

fn parse<T: FromStr>(value: &str, what: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| usage(format!("{what}: {e}")))
}

fn single(flag: Option<u32>, config: &[u32], name: &str) -> Result<u32> {
    match (flag, config) {
        (Some(x), _) => Ok(x),
        (None, [x]) => Ok(*x),
        (None, []) => Err(usage(format!("--{name} is required"))),
        (None, _) => Err(usage(format!("config lists several {name} values; pass --{name}"))),
    }
}

fn open_store(path: &Path) -> Result<ReviewStore> {
    let store = if is_stdio(path) {
        read_store(io::stdin().lock())
    } else {
        cliquescout::ingest::load_store(path)
    };
    store.with_context(|| format!("loading store {}", path.display()))
}

fn store_path(flag: &Option<PathBuf>, config: &RunConfig) -> Result<PathBuf> {
    required(flag.clone().or_else(|| config.store.clone()), "--store")
}

fn kd_params(params: &StoreParams, config: &RunConfig) -> Result<KdParams> {
    let k = single(params.k, &config.k.to_vec(), "k")?;
    let d = single(params.d, &config.d.to_vec(), "d")?;
    KdParams::new(k, d).map_err(|e| usage(e.to_string()))
}

fn build_options(flag: Option<u64>, config: &RunConfig) -> BuildOptions {
    let mut options = BuildOptions::default();
    if let Some(budget) = flag.or(config.pair_budget) {
        options.pair_budget = budget;
    }
    options
}

fn weight_mode(flag: &Option<String>, config: &RunConfig) -> Result<WeightMode> {
    match flag.as_ref().or(config.weight.as_ref()) {
        Some(s) => parse(s, "--weight"),
        None => Ok(WeightMode::Unweighted),
    }
}

fn theta(flag: &Option<String>, config: &RunConfig) -> Result<Theta> {
    match flag.as_ref().or(config.theta.as_ref()) {
        Some(s) => parse(s, "--theta"),
        None => Ok(Theta::default()),
    }
}

fn group_kind(flag: &Option<String>, theta_flag: &Option<String>, config: &RunConfig) -> Result<GroupKind> {
    let kind = flag.as_deref().or(config.kind.as_deref()).unwrap_or("clique");
    GroupKind::parse(kind, Some(theta(theta_flag, config)?)).map_err(|e| usage(e.to_string()))
}

fn finish(mut w: Box<dyn Write>) -> Result<()> {
    w.flush().context("writing output")
}

pub fn ingest(args: &IngestArgs, config: &RunConfig) -> Result<()> {
    let reviews = args.reviews.clone().or_else(|| config.reviews.clone()).unwrap_or_else(|| "-".into());
    let users = args.users.clone().or_else(|| config.users.clone());
    let out = required(args.out.clone().or_else(|| config.store.clone()), "--out")?;
    ensure_distinct(&[
        ("input --reviews", Some(&reviews)),
        ("input --users", users.as_deref()),
        ("--out", Some(&out)),
    ])?;
    let budget = if args.strict {
        ErrorBudget::strict()
    } else {
        let fraction = args.max_skip_fraction.or(config.max_skip_fraction).unwrap_or(0.001);
        if !(0.0..=1.0).contains(&fraction) {
            return Err(usage(format!("--max-skip-fraction must lie in [0, 1], got {fraction}")));
        }
        ErrorBudget::fraction(fraction)
    };
    let options = IngestOptions {
        reviews: config.schema.reviews.clone().unwrap_or_default(),
        users: config.schema.users.clone().unwrap_or_default(),
        budget,
        allow_datetime: args.allow_datetime,
    };
    let (mut store, review_stats) =
        ingest_reviews(input(&reviews)?, &options).with_context(|| format!("reading {}", reviews.display()))?;
    let user_stats = match &users {
        Some(path) => Some(
            store
                .ingest_users(input(path)?, &options)
                .with_context(|| format!("reading {}", path.display()))?,
        ),
        None => None,
    };
    if is_stdio(&out) {
        let mut w = BufWriter::new(io::stdout().lock());
        write_store(&store, &mut w)?;
        w.flush()?;
    } else {
        save_store(&store, &out).with_context(|| format!("writing {}", out.display()))?;
    }
    eprintln!(
        "ingested {} reviews of {} users at {} venues ({} duplicates, {} skipped lines)",
        store.n_reviews(),
        store.n_users(),
        store.n_venues(),
        review_stats.duplicates_dropped,
        review_stats.lines_skipped
    );
    if let Some(path) = &args.stats {
        #[derive(Serialize)]
        struct Stats<'a> {
            reviews: &'a cliquescout::ingest::IngestStats,
            users: Option<&'a cliquescout::ingest::IngestStats>,
            n_users: usize,
            n_venues: usize,
            n_reviews: usize,
        }
        let mut w = output(Some(path))?;
        let stats = Stats {
            reviews: &review_stats,
            users: user_stats.as_ref(),
            n_users: store.n_users(),
            n_venues: store.n_venues(),
            n_reviews: store.n_reviews(),
        };
        serde_json::to_writer_pretty(&mut w, &stats)?;
        writeln!(w)?;
        finish(w)?;
    }
    Ok(())
}

pub fn build(args: &BuildArgs, config: &RunConfig) -> Result<()> {
    let path = store_path(&args.params.store, config)?;
    ensure_distinct(&[("--store", Some(&path)), ("--out", args.out.as_deref())])?;
    let params = kd_params(&args.params, config)?;
    let mode = weight_mode(&args.weight, config)?;
    let format: GraphFormat = parse(&args.format, "--format")?;
    let store = open_store(&path)?;
    let graph = build_kd_graph_with(&store, params, mode, &build_options(args.params.pair_budget, config))?;
    let edges = graph.named_edges(&store);
    let mut w = output(args.out.as_deref())?;
    match format {
        GraphFormat::Tsv => write_edge_tsv(&edges, &mut w)?,
        GraphFormat::Dot => {
            let nodes: Vec<DotNode> = graph
                .users()
                .iter()
                .map(|&u| DotNode {
                    name: store.user_name(u).to_owned(),
                    reviews: Some(store.review_count(u)),
                    label: None,
                })
                .collect();
            write_dot(&format!("kd_{}_{}", params.k, params.d), &nodes, &edges, &mut w)?;
        }
    }
    finish(w)?;
    eprintln!("{params}-graph: {} vertices, {} edges", graph.n(), graph.edge_count());
    Ok(())
}

fn load_graph(source: &GraphSource, config: &RunConfig) -> Result<NamedGraph> {
    let tsv = source
        .graph
        .clone()
        .or_else(|| config.graph.clone().filter(|_| source.params.store.is_none()));
    if let Some(path) = tsv {
        return read_edge_tsv(input(&path)?).with_context(|| format!("reading graph {}", path.display()));
    }
    let Some(path) = source.params.store.clone().or_else(|| config.store.clone()) else {
        return Err(usage("pass --graph, or --store with --k and --d"));
    };
    let params = kd_params(&source.params, config)?;
    let store = open_store(&path)?;
    let graph = build_kd_graph_with(
        &store,
        params,
        WeightMode::Unweighted,
        &build_options(source.params.pair_budget, config),
    )?;
    Ok(NamedGraph {
        names: graph.users().iter().map(|&u| store.user_name(u).to_owned()).collect(),
        graph: graph.graph().clone(),
    })
}

/// One set per line, members tab-separated and sorted; largest sets first.
fn write_sets(sets: &[VertexSet], names: &[String], histogram: bool, out: Option<&Path>) -> Result<()> {
    let mut w = output(out)?;
    if histogram {
        writeln!(w, "size,count")?;
        for (size, count) in clique_size_histogram(sets) {
            writeln!(w, "{size},{count}")?;
        }
    } else {
        let mut lines: Vec<Vec<&str>> = sets
            .iter()
            .map(|s| {
                let mut members: Vec<&str> = s.iter().map(|v| names[v as usize].as_str()).collect();
                members.sort_unstable();
                members
            })
            .collect();
        lines.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        for members in lines {
            writeln!(w, "{}", members.join("\t"))?;
        }
    }
    finish(w)
}

pub fn cliques(args: &CliqueArgs, config: &RunConfig) -> Result<()> {
    let min_size = args.min_size.or(config.min_size).unwrap_or(1).max(1);
    let named = load_graph(&args.source, config)?;
    let sets = maximal_cliques(&named.graph, min_size);
    eprintln!("{} maximal cliques of size >= {min_size}", sets.len());
    write_sets(&sets, &named.names, args.histogram, args.out.as_deref())
}

pub fn quasicliques(args: &QuasiArgs, config: &RunConfig) -> Result<()> {
    let defaults = QuasiParams::default();
    let params = QuasiParams::new(
        theta(&args.theta, config)?,
        args.min_size.or(config.min_size).unwrap_or(defaults.min_size),
        args.max_size.or(config.max_size),
    )
    .map_err(|e| usage(e.to_string()))?;
    let named = load_graph(&args.source, config)?;
    let sets = if args.all {
        pseudo_cliques(&named.graph, params)
    } else {
        maximal_pseudo_cliques(&named.graph, params)
    };
    eprintln!(
        "{} {}pseudo-cliques at theta {} of size >= {}",
        sets.len(),
        if args.all { "" } else { "maximal " },
        params.theta,
        params.min_size
    );
    write_sets(&sets, &named.names, args.histogram, args.out.as_deref())
}

struct Preset {
    ks: Vec<u32>,
    ds: Vec<u32>,
    sizes: Vec<usize>,
    kind: &'static str,
}

fn preset(name: &str) -> Result<Preset> {
    match name {
        "table2" | "cliques" => Ok(Preset {
            ks: vec![3, 4, 5, 6],
            ds: vec![5, 6, 8],
            sizes: vec![9, 10, 11],
            kind: "clique",
        }),
        "table3" | "quasicliques" => Ok(Preset {
            ks: vec![6, 7, 8, 9],
            ds: vec![5, 8],
            sizes: (7..=12).collect(),
            kind: "quasiclique",
        }),
        _ => Err(usage(format!("unknown preset {name:?} (expected table2 or table3)"))),
    }
}

pub fn table(args: &TableArgs, config: &RunConfig) -> Result<()> {
    let preset = args.preset.as_deref().map(preset).transpose()?;
    let pick = |flag: &Vec<u32>, from_preset: Option<&Vec<u32>>, from_config: Vec<u32>| {
        if !flag.is_empty() {
            flag.clone()
        } else if let Some(p) = from_preset {
            p.clone()
        } else {
            from_config
        }
    };
    let ks = pick(&args.k, preset.as_ref().map(|p| &p.ks), config.k.to_vec());
    let ds = pick(&args.d, preset.as_ref().map(|p| &p.ds), config.d.to_vec());
    let sizes = if !args.sizes.is_empty() {
        args.sizes.clone()
    } else if let Some(p) = &preset {
        p.sizes.clone()
    } else {
        config.sizes.to_vec()
    };
    for (list, flag) in [(ks.is_empty(), "--k"), (ds.is_empty(), "--d"), (sizes.is_empty(), "--sizes")] {
        if list {
            return Err(usage(format!("{flag} is required (or --preset)")));
        }
    }
    let kind_name = args.kind.clone().or_else(|| preset.as_ref().map(|p| p.kind.to_owned()));
    let kind = group_kind(&kind_name, &args.theta, config)?;

    let path = store_path(&args.store, config)?;
    let store = open_store(&path)?;
    let mut spec = TableSpec::new(ks, ds, sizes, kind);
    spec.quasi_max_size = args.max_size.or(config.max_size);
    spec.build = build_options(args.pair_budget, config);
    let run = run_count_table(&store, &spec)?;
    for (params, edges) in &run.edges {
        eprintln!("{params}-graph: {edges} edges, largest group {}", run.largest[params]);
    }

    match args.out_dir.clone().or_else(|| config.output.clone()) {
        Some(dir) => {
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let mut w = output(Some(&dir.join("counts.csv")))?;
            run.table.write_csv(&mut w)?;
            finish(w)?;
            let mut w = output(Some(&dir.join("counts_cumulative.csv")))?;
            run.table.write_cumulative_csv(&mut w)?;
            finish(w)?;
            let mut w = output(Some(&dir.join("counts.txt")))?;
            w.write_all(run.table.render_text().as_bytes())?;
            finish(w)?;
        }
        None => {
            let mut w = output(None)?;
            if args.text {
                w.write_all(run.table.render_text().as_bytes())?;
            } else if args.cumulative {
                run.table.write_cumulative_csv(&mut w)?;
            } else {
                run.table.write_csv(&mut w)?;
            }
            finish(w)?;
        }
    }

    for v in &run.violations {
        eprintln!("warning: monotonicity: {v}");
    }
    if args.check_monotonic {
        if !run.violations.is_empty() {
            bail!("{} monotonicity violations", run.violations.len());
        }
        eprintln!("monotonicity checks passed");
    }
    Ok(())
}

pub fn flag(args: &FlagArgs, config: &RunConfig) -> Result<()> {
    let path = store_path(&args.params.store, config)?;
    ensure_distinct(&[("--store", Some(&path)), ("--out", args.out.as_deref())])?;
    let params = kd_params(&args.params, config)?;
    let kind = group_kind(&args.kind, &args.theta, config)?;
    let default_min = match kind {
        GroupKind::Clique => 3,
        GroupKind::QuasiClique(_) => QuasiParams::default().min_size,
    };
    let min_size = args.min_size.or(config.min_size).unwrap_or(default_min);
    let options = FlagOptions {
        evidence_cap: if args.full_evidence { None } else { Some(args.evidence_cap.unwrap_or(50)) },
        quasi_max_size: args.max_size.or(config.max_size),
    };
    let store = open_store(&path)?;
    let graph = build_kd_graph_with(
        &store,
        params,
        WeightMode::Unweighted,
        &build_options(args.params.pair_budget, config),
    )?;
    let listings = flag_groups(&store, &graph, kind, min_size, &options)?;
    let mut w = output(args.out.as_deref())?;
    write_listings(&listings, &mut w)?;
    finish(w)?;
    eprintln!("{} groups of size >= {min_size} in the {params}-graph", listings.len());
    Ok(())
}

fn read_groups(flag: &Option<PathBuf>, config: &RunConfig) -> Result<(PathBuf, Vec<cliquescout::report::GroupListing>)> {
    let path = required(flag.clone().or_else(|| config.groups.clone()), "--groups")?;
    let listings = read_listings(input(&path)?).with_context(|| format!("reading {}", path.display()))?;
    Ok((path, listings))
}

pub fn annotate(args: &AnnotateArgs, config: &RunConfig) -> Result<()> {
    let store_path = store_path(&args.store, config)?;
    let labels_path = required(args.labels.clone().or_else(|| config.labels.clone()), "--labels")?;
    let graph_path = args.graph.clone();
    let (groups_path, groups) = read_groups(&args.groups, config)?;
    ensure_distinct(&[
        ("input --store", Some(&store_path)),
        ("input --groups", Some(&groups_path)),
        ("input --labels", Some(&labels_path)),
        ("input --graph", graph_path.as_deref()),
        ("--out", args.out.as_deref()),
    ])?;
    let labels = File::open(&labels_path)
        .map_err(cliquescout::Error::from)
        .and_then(|f| read_labels(BufReader::new(f)))
        .with_context(|| format!("reading labels {}", labels_path.display()))?;
    let store = open_store(&store_path)?;
    let graph_users = match &graph_path {
        Some(p) => Some(read_edge_tsv(input(p)?).with_context(|| format!("reading graph {}", p.display()))?.names),
        None => None,
    };
    let stats = annotate_groups(&store, &labels, &groups, graph_users.as_deref());
    if stats.unknown_labeled_users > 0 {
        eprintln!("warning: {} labeled users are not in the store", stats.unknown_labeled_users);
    }
    let mut w = output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &stats)?;
    writeln!(w)?;
    finish(w)
}

pub fn export(args: &ExportArgs, config: &RunConfig) -> Result<()> {
    let path = store_path(&args.store, config)?;
    let (groups_path, groups) = read_groups(&args.groups, config)?;
    let labels_path = args.labels.clone().or_else(|| config.labels.clone());
    ensure_distinct(&[
        ("input --store", Some(&path)),
        ("input --groups", Some(&groups_path)),
        ("input --labels", labels_path.as_deref()),
        ("--out", args.out.as_deref()),
    ])?;
    let format: GraphFormat = parse(&args.format, "--format")?;
    let mode = weight_mode(&args.weight, config)?;
    let labels = match &labels_path {
        Some(p) => Some(
            File::open(p)
                .map_err(cliquescout::Error::from)
                .and_then(|f| read_labels(BufReader::new(f)))
                .with_context(|| format!("reading labels {}", p.display()))?,
        ),
        None => None,
    };
    let params: BTreeSet<KdParams> = groups.iter().map(|g| g.params()).collect::<Result<_, _>>()?;
    let mut w = output(args.out.as_deref())?;
    match params.len() {
        0 => {
            if format == GraphFormat::Dot {
                write_dot("groups", &[], &[], &mut w)?;
            }
        }
        1 => {
            let params = *params.first().expect("one element");
            let store = open_store(&path)?;
            let graph = build_kd_graph_with(&store, params, mode, &build_options(args.pair_budget, config))?;
            export_group_graph(&store, &graph, &groups, labels.as_ref(), format, &mut w)?;
        }
        _ => bail!("group listings mix (k,d) parameters: {params:?}"),
    }
    finish(w)
}

pub fn synth(args: &SynthArgs, config: &RunConfig) -> Result<()> {
    let mut cfg = config.synth.clone().unwrap_or_default();
    if let Some(seed) = args.seed.or(config.seed) {
        cfg.seed = seed;
    }
    if let Some(n) = args.users {
        cfg.n_users = n;
    }
    if let Some(n) = args.venues {
        cfg.n_venues = n;
    }
    if let Some(n) = args.background {
        cfg.background_reviews = n;
    }
    if let Some(s) = &args.start_date {
        cfg.start_date = s.clone();
    }
    if let Some(n) = args.span_days {
        cfg.span_days = n;
    }
    if let Some(n) = args.friends {
        cfg.friends_per_user = n;
    }
    if !args.plant.is_empty() {
        cfg.groups = args
            .plant
            .iter()
            .map(|s| parse::<PlantedGroupSpec>(s, "--plant"))
            .collect::<Result<_>>()?;
    }
    let data = synth::generate(&cfg)?;
    match args.out_dir.clone().or_else(|| config.output.clone()) {
        Some(dir) => {
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let mut w = output(Some(&dir.join("reviews.json")))?;
            data.write_reviews(&mut w)?;
            finish(w)?;
            if data.users.is_some() {
                let mut w = output(Some(&dir.join("users.json")))?;
                data.write_users(&mut w)?;
                finish(w)?;
            }
            let mut w = output(Some(&dir.join("truth.json")))?;
            data.write_truth(&mut w)?;
            finish(w)?;
        }
        None => {
            let mut w = output(None)?;
            data.write_reviews(&mut w)?;
            finish(w)?;
            if let Some(path) = &args.truth {
                let mut w = output(Some(path))?;
                data.write_truth(&mut w)?;
                finish(w)?;
            }
        }
    }
    eprintln!("generated {} reviews, {} planted groups", data.reviews.len(), data.groups.len());
    Ok(())
}

pub fn verify(args: &VerifyArgs, config: &RunConfig) -> Result<()> {
    if let Some(groups) = &args.groups {
        let path = store_path(&args.store, config)?;
        let store = open_store(&path)?;
        let (_, listings) = read_groups(&Some(groups.clone()), config)?;
        let mut failures = 0;
        for (i, listing) in listings.iter().enumerate() {
            for problem in validate_listing(&store, listing) {
                failures += 1;
                println!("FAIL listing {} ({}): {problem}", i + 1, listing.members.join(","));
            }
        }
        if failures > 0 {
            bail!("{failures} problems in {} listings", listings.len());
        }
        println!("PASS {} listings verified", listings.len());
        return Ok(());
    }
    if args.graphs == 0 {
        return Err(usage("--graphs must be positive"));
    }
    let diff = differential::DiffConfig {
        seed: args.seed.or(config.seed).unwrap_or(0),
        graphs: args.graphs,
        ..Default::default()
    };
    let results = differential::run(&diff)?;
    let mut stdout = io::stdout().lock();
    for r in &results {
        writeln!(stdout, "{r}")?;
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        bail!("{failed} differential checks failed");
    }
    Ok(())
}

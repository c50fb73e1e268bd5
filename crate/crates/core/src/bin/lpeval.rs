use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lpeval::curves::{random_baseline_pr, CurveKind};
use lpeval::experiments::{
    evaluate_split, generate_synthetic, run_impact_study, run_variance_study, ExperimentConfig, GraphSource,
    SyntheticSpec,
};
use lpeval::graph::{load_edge_list, load_labeled_edge_list, Graph, Mode};
use lpeval::metrics::BudgetPolicy;
use lpeval::scorers::{score_all, ScoreOptions, Scorer};
use lpeval::split::random_split;
use lpeval::{Error, Result};

/// Link-prediction evaluation under extreme class imbalance.
#[derive(Debug, Parser)]
#[command(name = "lpeval", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hold out a seeded fraction of edges as a test set.
    Split {
        #[command(flatten)]
        input: GraphArgs,
        #[arg(long, default_value_t = 0.1)]
        fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank the distance-2 candidates of a (training) graph.
    Score {
        #[command(flatten)]
        input: GraphArgs,
        #[arg(long, default_value = "cn,aa,ra", value_parser = parse_scorers)]
        scorers: ScorerList,
        /// Refuse to materialize rankings with more estimated candidates.
        #[arg(long, default_value_t = ScoreOptions::default().max_candidates)]
        max_candidates: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split, score and write PR/ROC curves plus metric reports.
    Eval {
        #[command(flatten)]
        input: GraphArgs,
        #[arg(long, default_value_t = 0.1)]
        fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "cn,aa,ra", value_parser = parse_scorers)]
        scorers: ScorerList,
        #[arg(long, default_value = "train", value_parser = parse_budget)]
        budget: BudgetPolicy,
        #[arg(long)]
        out: PathBuf,
    },
    /// AUPR spread across k seeded splits.
    Variance {
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// AUPR versus CAUPR comparison against a reference scorer.
    Impact {
        #[command(flatten)]
        study: StudyArgs,
        /// Reference scorer; defaults to the best AUPR.
        #[arg(long, value_parser = parse_scorer)]
        reference: Option<Scorer>,
    },
    /// Generate a preferential-attachment graph.
    Synth {
        #[arg(long)]
        vertices: usize,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
struct GraphArgs {
    /// Edge list, one `u v` pair per line.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "undirected", value_parser = parse_mode)]
    mode: Mode,
    /// Vertices are string labels; the id mapping is written to `labels.tsv`.
    #[arg(long)]
    labeled: bool,
}

#[derive(Debug, Clone, Args)]
struct StudyArgs {
    #[arg(long, required_unless_present = "synth_vertices")]
    graph: Option<PathBuf>,
    #[arg(long, default_value = "undirected", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long)]
    labeled: bool,
    /// Use a synthetic preferential-attachment graph with this many vertices.
    #[arg(long, conflicts_with = "graph")]
    synth_vertices: Option<usize>,
    #[arg(long, default_value_t = 10)]
    synth_m: usize,
    #[arg(long, default_value_t = 0)]
    synth_seed: u64,
    #[arg(long, default_value_t = 0.1)]
    fraction: f64,
    /// Base seed; split i uses seed + i.
    #[arg(long, default_value_t = 0, conflicts_with = "seeds")]
    seed: u64,
    /// Explicit comma-separated seed list, one per split.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, default_value = "cn,aa,ra", value_parser = parse_scorers)]
    scorers: ScorerList,
    #[arg(long, default_value = "train", value_parser = parse_budget)]
    budget: BudgetPolicy,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

impl StudyArgs {
    fn config(&self) -> ExperimentConfig {
        let source = match (&self.graph, self.synth_vertices) {
            (Some(path), _) => GraphSource::File {
                path: path.clone(),
                mode: self.mode,
                labeled: self.labeled,
            },
            (None, Some(n)) => {
                GraphSource::Synthetic(SyntheticSpec::preferential_attachment(n, self.synth_m, self.synth_seed))
            }
            (None, None) => unreachable!("clap requires --graph or --synth-vertices"),
        };
        ExperimentConfig {
            source,
            scorers: self.scorers.0.clone(),
            fraction: self.fraction,
            seeds: self.seeds.clone().unwrap_or_else(|| vec![self.seed]),
            budget_policy: self.budget,
            out_dir: Some(self.out.clone()),
            workers: self.workers,
            reference: None,
        }
    }
}

#[derive(Debug, Clone)]
struct ScorerList(Vec<Scorer>);

fn parse_scorers(s: &str) -> std::result::Result<ScorerList, String> {
    let mut list = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let scorer = parse_scorer(part)?;
        if !list.contains(&scorer) {
            list.push(scorer);
        }
    }
    if list.is_empty() {
        return Err("no scorer given".into());
    }
    Ok(ScorerList(list))
}

fn parse_scorer(s: &str) -> std::result::Result<Scorer, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_budget(s: &str) -> std::result::Result<BudgetPolicy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load(input: &GraphArgs, out: &Path) -> Result<Graph> {
    let reader = BufReader::new(File::open(&input.graph)?);
    let (graph, stats) = if input.labeled {
        let (graph, stats, labels) = load_labeled_edge_list(reader, input.mode)?;
        let mut w = create(&out.join("labels.tsv"))?;
        for (id, label) in labels.iter().enumerate() {
            writeln!(w, "{id}\t{label}")?;
        }
        w.flush()?;
        (graph, stats)
    } else {
        load_edge_list(reader, input.mode)?
    };
    log::info!(
        "loaded {} vertices, {} edges ({} lines, {} self-loops dropped)",
        graph.vertex_count(),
        graph.edge_count(),
        stats.lines,
        stats.self_loops_dropped
    );
    Ok(graph)
}

fn graph_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Split {
            input,
            fraction,
            seed,
            out,
        } => {
            fs::create_dir_all(&out)?;
            let graph = load(&input, &out)?;
            let split = random_split(&graph, fraction, seed)?;
            split.train.write_edge_list(create(&out.join("train.txt"))?)?;
            split.write_test_edges(create(&out.join("test.txt"))?)?;
            write_json(&out.join("manifest.json"), &split.manifest())?;
        }
        Command::Score {
            input,
            scorers,
            max_candidates,
            out,
        } => {
            fs::create_dir_all(&out)?;
            let graph = load(&input, &out)?;
            for scorer in scorers.0 {
                let ranking = score_all(&graph, scorer, ScoreOptions { max_candidates })?;
                ranking.write_csv(create(&out.join(format!("ranking_{scorer}.csv")))?)?;
                write_json(&out.join(format!("ranking_{scorer}.json")), &ranking.sidecar())?;
            }
        }
        Command::Eval {
            input,
            fraction,
            seed,
            scorers,
            budget,
            out,
        } => {
            fs::create_dir_all(&out)?;
            let graph = load(&input, &out)?;
            let id = graph_id(&input.graph);
            write_json(&out.join("imbalance.json"), &graph.class_imbalance(fraction)?)?;
            let split = random_split(&graph, fraction, seed)?;
            random_baseline_pr(&split).write_csv(create(&out.join("baseline_pr.csv"))?)?;
            let mut reports = Vec::new();
            for scorer in scorers.0 {
                let (curve, report) = evaluate_split(&split, scorer, budget, &id)?;
                curve.write_csv(create(&out.join(format!("pr_{scorer}.csv")))?)?;
                curve
                    .with_kind(CurveKind::Roc)
                    .write_csv(create(&out.join(format!("roc_{scorer}.csv")))?)?;
                write_json(&out.join(format!("report_{scorer}.json")), &report)?;
                reports.push(report);
            }
            write_json(&out.join("reports.json"), &reports)?;
        }
        Command::Variance { study, k } => {
            fs::create_dir_all(&study.out)?;
            let result = run_variance_study(&study.config(), k)?;
            for row in &result.rows {
                log::info!(
                    "{}: mean AUPR {:.6}, std/mean {:.4}%",
                    row.scorer,
                    row.summary.mean,
                    100.0 * row.summary.std_over_mean
                );
            }
        }
        Command::Impact { study, reference } => {
            fs::create_dir_all(&study.out)?;
            let mut config = study.config();
            config.reference = reference;
            run_impact_study(&config)?;
        }
        Command::Synth { vertices, m, seed, out } => {
            fs::create_dir_all(&out)?;
            let spec = SyntheticSpec::preferential_attachment(vertices, m, seed);
            let graph = generate_synthetic(&spec)?;
            graph.write_edge_list(create(&out.join("graph.txt"))?)?;
            write_json(&out.join("synth.json"), &spec)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

fn fail(kind: &str, message: String, code: u8) -> ExitCode {
    let report = ErrorReport { error: kind, message };
    eprintln!("{}", serde_json::to_string(&report).expect("serializable"));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim_end().to_owned(), 2),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), e.to_string(), 1),
    }
}

//! End-to-end studies: AUPR variance across seeded splits, and the
//! AUPR-versus-CAUPR impact comparison between scorers. Also hosts the
//! preferential-attachment generator used for desk-scale graphs.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{build_curve_streaming, Curve, CurveKind};
use crate::error::{Error, Result};
use crate::graph::{load_edge_list, load_labeled_edge_list, Graph, Mode, VertexId};
use crate::metrics::{
    evaluate, impact_table, variance_summary, write_impact_csv, BudgetPolicy, ImpactRow, MetricsReport,
    ReportContext, VarianceSummary,
};
use crate::scorers::Scorer;
use crate::split::{random_split, seeded_rng, uniform_below, EdgeSplit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticModel {
    PreferentialAttachment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub model: SyntheticModel,
    pub vertices: usize,
    pub edges_per_new_vertex: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn preferential_attachment(vertices: usize, edges_per_new_vertex: usize, seed: u64) -> Self {
        SyntheticSpec {
            model: SyntheticModel::PreferentialAttachment,
            vertices,
            edges_per_new_vertex,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.edges_per_new_vertex;
        if m < 1 {
            return Err(Error::Parameter("edges_per_new_vertex must be at least 1".into()));
        }
        if self.vertices < m + 2 {
            return Err(Error::Parameter(format!(
                "preferential attachment with m = {m} needs at least {} vertices, got {}",
                m + 2,
                self.vertices
            )));
        }
        if self.vertices > VertexId::MAX as usize {
            return Err(Error::Parameter("too many vertices".into()));
        }
        Ok(())
    }

    pub fn id(&self) -> String {
        format!("pa-n{}-m{}-s{}", self.vertices, self.edges_per_new_vertex, self.seed)
    }

    /// `C(m, 2) + m·(n − m)`.
    pub fn expected_edges(&self) -> u64 {
        let (n, m) = (self.vertices as u64, self.edges_per_new_vertex as u64);
        m * m.saturating_sub(1) / 2 + m * (n - m)
    }
}

/// Undirected preferential-attachment graph: a clique on the first `m`
/// vertices, then every later vertex links to `m` distinct earlier vertices
/// drawn with probability proportional to degree.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Graph> {
    spec.validate()?;
    let (n, m) = (spec.vertices, spec.edges_per_new_vertex);
    let mut rng = seeded_rng(spec.seed);
    let mut edges: Vec<(VertexId, VertexId)> = Vec::with_capacity(spec.expected_edges() as usize);
    // every edge endpoint, so a uniform draw is a degree-weighted vertex draw
    let mut endpoints: Vec<VertexId> = Vec::with_capacity(2 * spec.expected_edges() as usize + 1);
    for u in 0..m as VertexId {
        for v in u + 1..m as VertexId {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    if endpoints.is_empty() {
        endpoints.push(0);
    }
    let mut chosen: Vec<VertexId> = Vec::with_capacity(m);
    for v in m as VertexId..n as VertexId {
        chosen.clear();
        while chosen.len() < m {
            let t = endpoints[uniform_below(&mut rng, endpoints.len() as u64) as usize];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            edges.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    Graph::from_edges(Mode::Undirected, n, edges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    File { path: PathBuf, mode: Mode, labeled: bool },
    Synthetic(SyntheticSpec),
}

impl GraphSource {
    /// Loads the graph and returns it with a short identifier.
    pub fn load(&self) -> Result<(Graph, String)> {
        match self {
            GraphSource::File { path, mode, labeled } => {
                let reader = BufReader::new(File::open(path)?);
                let graph = if *labeled {
                    load_labeled_edge_list(reader, *mode)?.0
                } else {
                    load_edge_list(reader, *mode)?.0
                };
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "graph".into());
                Ok((graph, id))
            }
            GraphSource::Synthetic(spec) => Ok((generate_synthetic(spec)?, spec.id())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: GraphSource,
    pub scorers: Vec<Scorer>,
    pub fraction: f64,
    /// A single base seed, or one seed per split.
    pub seeds: Vec<u64>,
    pub budget_policy: BudgetPolicy,
    pub out_dir: Option<PathBuf>,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// Reference scorer of the impact study; best AUPR when `None`.
    pub reference: Option<Scorer>,
}

impl ExperimentConfig {
    pub fn new(source: GraphSource) -> Self {
        ExperimentConfig {
            source,
            scorers: Scorer::ALL.to_vec(),
            fraction: 0.1,
            seeds: vec![0],
            budget_policy: BudgetPolicy::TrainEdges,
            out_dir: None,
            workers: None,
            reference: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return Err(Error::Parameter(format!("fraction {} outside (0, 1)", self.fraction)));
        }
        if self.scorers.is_empty() {
            return Err(Error::Parameter("at least one scorer is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Parameter("at least one seed is required".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Parameter("workers must be at least 1".into()));
        }
        Ok(())
    }

    fn split_seeds(&self, k: usize) -> Result<Vec<u64>> {
        match self.seeds.as_slice() {
            [base] => Ok((0..k as u64).map(|i| base.wrapping_add(i)).collect()),
            seeds if seeds.len() == k => Ok(seeds.to_vec()),
            seeds => Err(Error::Parameter(format!(
                "{} seeds given for k = {k}; pass one base seed or exactly k seeds",
                seeds.len()
            ))),
        }
    }

    fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        match self.workers {
            None => Ok(job()),
            Some(w) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
                Ok(pool.install(job))
            }
        }
    }
}

pub fn edge_budget(split: &EdgeSplit, policy: BudgetPolicy) -> u64 {
    match policy {
        BudgetPolicy::TrainEdges => split.train.edge_count(),
        BudgetPolicy::OriginalEdges => split.original_edge_count,
    }
}

/// Streams one scorer over one split and reports every metric.
pub fn evaluate_split(
    split: &EdgeSplit,
    scorer: Scorer,
    policy: BudgetPolicy,
    graph_id: &str,
) -> Result<(Curve, MetricsReport)> {
    let curve = build_curve_streaming(CurveKind::Pr, split, scorer)?;
    let ctx = ReportContext {
        graph: graph_id,
        scorer,
        seed: split.seed,
        fraction: split.fraction,
    };
    let report = evaluate(&curve, edge_budget(split, policy), &ctx)?;
    Ok((curve, report))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn cached_report(path: &Path, expect: &ReportContext<'_>) -> Option<MetricsReport> {
    let text = fs::read_to_string(path).ok()?;
    let r: MetricsReport = serde_json::from_str(&text).ok()?;
    (r.graph == expect.graph && r.scorer == expect.scorer && r.seed == expect.seed && r.fraction == expect.fraction)
        .then_some(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub scorer: Scorer,
    pub values: Vec<f64>,
    pub summary: VarianceSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceStudy {
    pub graph: String,
    pub seeds: Vec<u64>,
    pub fraction: f64,
    pub rows: Vec<VarianceRow>,
}

impl VarianceStudy {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "algorithm,n,min_aupr,max_aupr,mean,std,std_over_mean")?;
        for r in &self.rows {
            let s = &r.summary;
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.scorer, s.n, s.min, s.max, s.mean, s.std, s.std_over_mean
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// AUPR of every scorer on `k` seeded splits, summarized per scorer.
///
/// With an output directory, each split/scorer report is written to
/// `splits/` as soon as it is computed, and a rerun reuses matching reports.
pub fn run_variance_study(config: &ExperimentConfig, k: usize) -> Result<VarianceStudy> {
    config.validate()?;
    if k < 2 {
        return Err(Error::Parameter("variance study needs k >= 2".into()));
    }
    let seeds = config.split_seeds(k)?;
    let (graph, graph_id) = config.source.load()?;
    let split_dir = match &config.out_dir {
        Some(dir) => {
            let d = dir.join("splits");
            fs::create_dir_all(&d)?;
            Some(d)
        }
        None => None,
    };

    let per_seed: Vec<Vec<MetricsReport>> = config.run(|| {
        seeds
            .par_iter()
            .map(|&seed| -> Result<Vec<MetricsReport>> {
                let mut split: Option<EdgeSplit> = None;
                let mut out = Vec::with_capacity(config.scorers.len());
                for &scorer in &config.scorers {
                    let ctx = ReportContext {
                        graph: &graph_id,
                        scorer,
                        seed,
                        fraction: config.fraction,
                    };
                    let path = split_dir
                        .as_ref()
                        .map(|d| d.join(format!("seed{seed}_{scorer}.json")));
                    if let Some(r) = path.as_deref().and_then(|p| cached_report(p, &ctx)) {
                        out.push(r);
                        continue;
                    }
                    if split.is_none() {
                        split = Some(random_split(&graph, config.fraction, seed)?);
                    }
                    let s = split.as_ref().expect("split built above");
                    let (_, report) = evaluate_split(s, scorer, config.budget_policy, &graph_id)?;
                    if let Some(p) = &path {
                        write_json(p, &report)?;
                    }
                    out.push(report);
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let rows = config
        .scorers
        .iter()
        .enumerate()
        .map(|(i, &scorer)| {
            let values: Vec<f64> = per_seed.iter().map(|reports| reports[i].aupr).collect();
            Ok(VarianceRow {
                scorer,
                summary: variance_summary(&values)?,
                values,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let study = VarianceStudy {
        graph: graph_id,
        seeds,
        fraction: config.fraction,
        rows,
    };
    if let Some(dir) = &config.out_dir {
        study.write_csv(BufWriter::new(File::create(dir.join("variance.csv"))?))?;
        write_json(&dir.join("variance.json"), &study)?;
    }
    Ok(study)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactStudy {
    pub graph: String,
    pub reference: Scorer,
    pub reports: Vec<MetricsReport>,
    pub rows: Vec<ImpactRow>,
}

impl ImpactStudy {
    pub fn write_thresholds_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "graph,algorithm,edge_budget,recall_threshold_x,covered_recall")?;
        for r in &self.reports {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.graph, r.scorer, r.edge_budget, r.recall_threshold_x, r.covered_recall
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reference scorer: the best AUPR, first in scorer order on ties.
pub fn best_aupr(reports: &[MetricsReport]) -> Option<Scorer> {
    reports
        .iter()
        .fold(None::<&MetricsReport>, |best, r| match best {
            Some(b) if b.aupr >= r.aupr => Some(b),
            _ => Some(r),
        })
        .map(|r| r.scorer)
}

/// Builds the impact study from per-scorer reports of one split.
pub fn impact_from_reports(graph: &str, reports: Vec<MetricsReport>, reference: Option<Scorer>) -> Result<ImpactStudy> {
    let reference = match reference {
        Some(r) => r,
        None => best_aupr(&reports).ok_or_else(|| Error::Parameter("no reports".into()))?,
    };
    let rows = impact_table(&reports, reference)?;
    Ok(ImpactStudy {
        graph: graph.to_owned(),
        reference,
        reports,
        rows,
    })
}

/// One split (the first seed), all scorers, impact rows against the
/// reference, and per-scorer recall thresholds.
pub fn run_impact_study(config: &ExperimentConfig) -> Result<ImpactStudy> {
    config.validate()?;
    if config.scorers.len() < 2 {
        return Err(Error::Parameter("impact study needs at least two scorers".into()));
    }
    let (graph, graph_id) = config.source.load()?;
    let split = random_split(&graph, config.fraction, config.seeds[0])?;
    let reports = config.run(|| {
        config
            .scorers
            .par_iter()
            .map(|&s| evaluate_split(&split, s, config.budget_policy, &graph_id).map(|(_, r)| r))
            .collect::<Result<Vec<_>>>()
    })??;
    let study = impact_from_reports(&graph_id, reports, config.reference)?;
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir)?;
        write_impact_csv(
            BufWriter::new(File::create(dir.join("impact.csv"))?),
            &graph_id,
            study.reference,
            &study.rows,
        )?;
        study.write_thresholds_csv(BufWriter::new(File::create(dir.join("thresholds.csv"))?))?;
        write_json(&dir.join("impact.json"), &study)?;
    }
    Ok(study)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pa_edge_count_is_pinned() {
        let spec = SyntheticSpec::preferential_attachment(1000, 5, 42);
        let g = generate_synthetic(&spec).unwrap();
        assert_eq!(g.edge_count(), 5 * (1000 - 5) + 10);
        assert_eq!(g.edge_count(), spec.expected_edges());
        assert_eq!(g.vertex_count(), 1000);
    }

    #[test]
    fn pa_boundaries() {
        assert!(generate_synthetic(&SyntheticSpec::preferential_attachment(6, 5, 0)).is_err());
        assert!(generate_synthetic(&SyntheticSpec::preferential_attachment(10, 0, 0)).is_err());
        let g = generate_synthetic(&SyntheticSpec::preferential_attachment(7, 5, 0)).unwrap();
        assert_eq!(g.edge_count(), 10 + 10);
        let tree = generate_synthetic(&SyntheticSpec::preferential_attachment(50, 1, 3)).unwrap();
        assert_eq!(tree.edge_count(), 49);
    }

    #[test]
    fn pa_is_deterministic() {
        let spec = SyntheticSpec::preferential_attachment(2000, 4, 9);
        let (a, b) = (generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
        let (mut ea, mut eb) = (Vec::new(), Vec::new());
        a.write_edge_list(&mut ea).unwrap();
        b.write_edge_list(&mut eb).unwrap();
        assert_eq!(ea, eb);
        let other = generate_synthetic(&SyntheticSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn pa_is_heavy_tailed() {
        let g = generate_synthetic(&SyntheticSpec::preferential_attachment(10_000, 10, 1)).unwrap();
        let mut degrees: Vec<usize> = (0..10_000).map(|v| g.out_degree(v).unwrap()).collect();
        degrees.sort_unstable();
        let median = degrees[degrees.len() / 2];
        let max = *degrees.last().unwrap();
        assert!(max > 10 * median, "max {max}, median {median}");
    }

    fn synth_config(seeds: Vec<u64>) -> ExperimentConfig {
        ExperimentConfig {
            seeds,
            ..ExperimentConfig::new(GraphSource::Synthetic(SyntheticSpec::preferential_attachment(400, 3, 5)))
        }
    }

    #[test]
    fn identical_seeds_give_zero_spread() {
        let study = run_variance_study(&synth_config(vec![7, 7]), 2).unwrap();
        for row in &study.rows {
            assert_eq!(row.summary.std, 0.0);
            assert_eq!(row.values[0], row.values[1]);
        }
    }

    #[test]
    fn variance_config_errors() {
        assert!(run_variance_study(&synth_config(vec![1]), 1).is_err());
        assert!(run_variance_study(&synth_config(vec![1, 2, 3]), 2).is_err());
        let mut c = synth_config(vec![1]);
        c.fraction = 1.0;
        assert!(run_variance_study(&c, 2).is_err());
    }

    #[test]
    fn variance_study_resumes_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = synth_config(vec![3]);
        config.out_dir = Some(dir.path().to_path_buf());
        let first = run_variance_study(&config, 3).unwrap();
        let cached = dir.path().join("splits/seed4_aa.json");
        assert!(cached.exists());
        // Tamper with one cached result: a resumed run must pick it up.
        let mut r: MetricsReport = serde_json::from_str(&fs::read_to_string(&cached).unwrap()).unwrap();
        r.aupr = 0.5;
        fs::write(&cached, serde_json::to_string(&r).unwrap()).unwrap();
        let second = run_variance_study(&config, 3).unwrap();
        let aa = |s: &VarianceStudy| s.rows.iter().find(|r| r.scorer == Scorer::Aa).unwrap().values.clone();
        assert_eq!(aa(&second)[1], 0.5);
        assert_eq!(aa(&first)[0], aa(&second)[0]);
    }

    #[test]
    fn identical_rankings_have_zero_impact() {
        let r = |s| MetricsReport {
            graph: "g".into(),
            scorer: s,
            seed: 0,
            fraction: 0.1,
            edge_budget: 10,
            aupr: 0.3,
            caupr: 0.2,
            auroc: 0.9,
            recall_threshold_x: 0.4,
            covered_recall: 0.8,
            covered_positives: 8,
        };
        let study = impact_from_reports("g", Scorer::ALL.iter().map(|&s| r(s)).collect(), None).unwrap();
        assert_eq!(study.reference, Scorer::Cn);
        assert!(study.rows.iter().all(|row| row.impact == 0.0));
    }

    #[test]
    fn impact_study_on_synthetic_graph() {
        let mut config = synth_config(vec![1]);
        config.workers = Some(2);
        let study = run_impact_study(&config).unwrap();
        assert_eq!(study.reports.len(), 3);
        assert_eq!(study.rows.len(), 2);
        let best = study.reports.iter().map(|r| r.aupr).fold(0.0, f64::max);
        let reference = study.reports.iter().find(|r| r.scorer == study.reference).unwrap();
        assert_eq!(reference.aupr, best);
        for row in &study.rows {
            assert_eq!(row.impact, row.caupr_pct_of_ref - row.aupr_pct_of_ref);
        }
        config.scorers = vec![Scorer::Cn];
        assert!(run_impact_study(&config).is_err());
    }
}

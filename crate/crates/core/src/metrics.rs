//! Curve areas (AUPR, AUROC), the constrained AUPR under a false-positive
//! budget, its recall threshold, and cross-algorithm comparison tables.
//!
//! # PR interpolation
//!
//! Between two curve points `(a, b)` and `(a + Δtp, b + Δfp)` the curve is
//! filled linearly in the *counts*: after `t` additional true positives the
//! classifier has made `b + t·Δfp/Δtp` false positives, so precision is
//!
//! ```text
//! p(t) = (a + t) / (a + b + t·(1 + Δfp/Δtp))
//! ```
//!
//! which is not linear in recall. Its integral has a closed form; with
//! `c = a + b`, `D = Δtp + Δfp`, `x = D / c` and `q = a·Δfp − b·Δtp`:
//!
//! ```text
//! ∫ p = Δtp²/D + q·Δtp/D² · ln(1 + x)                       (q ≥ 0)
//!     = Δtp·a/c − q·Δtp/c² · (x − ln(1 + x))/x²              (q < 0)
//! ```
//!
//! Both arrangements are sums of non-negative terms in their branch, which
//! keeps the evaluation free of cancellation. At the origin (`c = 0`) the
//! precision is constant and the area is `Δtp²/D`.
//!
//! # Constrained AUPR
//!
//! With an edge budget `B`, only the prefix of the curve with `cum_fp ≤ B`
//! counts. A segment that crosses the budget is cut where the interpolated
//! false-positive count equals `B`; the recall reached there is the
//! threshold `x`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::curves::{Curve, CurveKind, CurvePoint};
use crate::error::{Error, Result};
use crate::scorers::Scorer;

/// `(x - ln(1 + x)) / x²`, accurate for small `x`.
fn log_defect(x: f64) -> f64 {
    if x < 0.05 {
        // 1/2 - x/3 + x²/4 - ...
        let mut sum = 0.0;
        let mut pow = 1.0;
        for k in 0..14 {
            let term = pow / (k + 2) as f64;
            sum += if k % 2 == 0 { term } else { -term };
            pow *= x;
        }
        sum
    } else {
        (x - x.ln_1p()) / (x * x)
    }
}

/// Unnormalized area under precision from `(a, b)` over `dtp` true positives
/// while `dfp` false positives accrue. `q = a·dfp − b·dtp`.
fn segment_area(a: f64, b: f64, dtp: f64, dfp: f64, q: f64) -> f64 {
    if dtp <= 0.0 {
        return 0.0;
    }
    let c = a + b;
    let d = dtp + dfp;
    if c == 0.0 {
        return dtp * dtp / d;
    }
    let x = d / c;
    if q >= 0.0 {
        dtp * dtp / d + q * dtp / (d * d) * x.ln_1p()
    } else {
        dtp * a / c - q * dtp / (c * c) * log_defect(x)
    }
}

fn full_segment_area(p0: CurvePoint, p1: CurvePoint) -> f64 {
    let dtp = p1.tp - p0.tp;
    let dfp = p1.fp - p0.fp;
    let q = p0.tp as i128 * dfp as i128 - p0.fp as i128 * dtp as i128;
    segment_area(p0.tp as f64, p0.fp as f64, dtp as f64, dfp as f64, q as f64)
}

fn require_positives(curve: &Curve) -> Result<f64> {
    if curve.total_positives == 0 {
        return Err(Error::Division("curve has no positives".into()));
    }
    Ok(curve.total_positives as f64)
}

/// Area under the PR curve over recall `[0, covered_recall]`.
pub fn aupr(curve: &Curve) -> Result<f64> {
    curve.expect_kind(CurveKind::Pr)?;
    let p = require_positives(curve)?;
    let area: f64 = curve
        .points
        .windows(2)
        .map(|w| full_segment_area(w[0], w[1]))
        .sum();
    Ok(area / p)
}

/// Trapezoidal area under TPR(FPR) up to the final FPR. Exact up to the
/// final division.
pub fn auroc(curve: &Curve) -> Result<f64> {
    curve.expect_kind(CurveKind::Roc)?;
    if curve.total_positives == 0 || curve.total_negatives == 0 {
        return Err(Error::Division("ROC needs both positives and negatives".into()));
    }
    let twice: u128 = curve
        .points
        .windows(2)
        .map(|w| (w[1].fp - w[0].fp) as u128 * (w[0].tp + w[1].tp) as u128)
        .sum();
    Ok(twice as f64 / (2.0 * curve.total_positives as f64 * curve.total_negatives as f64))
}

/// Constrained area and recall threshold under `edge_budget`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetCut {
    pub caupr: f64,
    pub recall_threshold: f64,
    /// Whether the curve reaches more than `edge_budget` false positives.
    pub crossed: bool,
}

pub fn budget_cut(curve: &Curve, edge_budget: u64) -> Result<BudgetCut> {
    curve.expect_kind(CurveKind::Pr)?;
    if edge_budget < 1 {
        return Err(Error::Parameter("edge budget must be at least 1".into()));
    }
    let p = require_positives(curve)?;
    let mut area = 0.0;
    for w in curve.points.windows(2) {
        let (p0, p1) = (w[0], w[1]);
        if p1.fp <= edge_budget {
            area += full_segment_area(p0, p1);
            continue;
        }
        // p0.fp <= budget < p1.fp: cut where b + t·Δfp/Δtp = budget
        let dtp = p1.tp - p0.tp;
        let dfp = p1.fp - p0.fp;
        let lambda = (edge_budget - p0.fp) as f64 / dfp as f64;
        let q = p0.tp as i128 * dfp as i128 - p0.fp as i128 * dtp as i128;
        let cut_tp = dtp as f64 * lambda;
        area += segment_area(
            p0.tp as f64,
            p0.fp as f64,
            cut_tp,
            (edge_budget - p0.fp) as f64,
            q as f64 * lambda,
        );
        return Ok(BudgetCut {
            caupr: area / p,
            recall_threshold: (p0.tp as f64 + cut_tp) / p,
            crossed: true,
        });
    }
    Ok(BudgetCut {
        caupr: area / p,
        recall_threshold: curve.covered_recall(),
        crossed: false,
    })
}

pub fn caupr(curve: &Curve, edge_budget: u64) -> Result<f64> {
    Ok(budget_cut(curve, edge_budget)?.caupr)
}

pub fn caupr_recall_threshold(curve: &Curve, edge_budget: u64) -> Result<f64> {
    Ok(budget_cut(curve, edge_budget)?.recall_threshold)
}

/// Which edge count bounds the false positives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetPolicy {
    /// Edges of the training graph, after the test edges were removed.
    TrainEdges,
    /// Edges of the graph before splitting.
    OriginalEdges,
}

impl std::str::FromStr for BudgetPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" | "train_edges" => Ok(BudgetPolicy::TrainEdges),
            "original" | "original_edges" => Ok(BudgetPolicy::OriginalEdges),
            other => Err(Error::Parameter(format!("unknown budget policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub graph: String,
    pub scorer: Scorer,
    pub seed: u64,
    pub fraction: f64,
    pub edge_budget: u64,
    pub aupr: f64,
    pub caupr: f64,
    pub auroc: f64,
    pub recall_threshold_x: f64,
    pub covered_recall: f64,
    pub covered_positives: u64,
}

/// Provenance carried into a [`MetricsReport`].
#[derive(Debug, Clone)]
pub struct ReportContext<'a> {
    pub graph: &'a str,
    pub scorer: Scorer,
    pub seed: u64,
    pub fraction: f64,
}

/// All metrics of one curve. The curve's points serve both views.
pub fn evaluate(curve: &Curve, edge_budget: u64, ctx: &ReportContext<'_>) -> Result<MetricsReport> {
    let pr = curve.with_kind(CurveKind::Pr);
    let roc = curve.with_kind(CurveKind::Roc);
    let cut = budget_cut(&pr, edge_budget)?;
    Ok(MetricsReport {
        graph: ctx.graph.to_owned(),
        scorer: ctx.scorer,
        seed: ctx.seed,
        fraction: ctx.fraction,
        edge_budget,
        aupr: aupr(&pr)?,
        caupr: cut.caupr,
        auroc: auroc(&roc)?,
        recall_threshold_x: cut.recall_threshold,
        covered_recall: pr.covered_recall(),
        covered_positives: pr.covered_positives,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactRow {
    pub algorithm: String,
    pub aupr_pct_of_ref: f64,
    pub caupr_pct_of_ref: f64,
    /// `caupr_pct_of_ref - aupr_pct_of_ref`, in percentage points.
    pub impact: f64,
}

impl ImpactRow {
    pub fn new(algorithm: impl Into<String>, aupr: f64, caupr: f64, ref_aupr: f64, ref_caupr: f64) -> Result<Self> {
        if ref_aupr <= 0.0 || ref_caupr <= 0.0 {
            return Err(Error::Division(format!(
                "reference metrics must be positive (aupr = {ref_aupr}, caupr = {ref_caupr})"
            )));
        }
        let aupr_pct_of_ref = 100.0 * aupr / ref_aupr;
        let caupr_pct_of_ref = 100.0 * caupr / ref_caupr;
        Ok(ImpactRow {
            algorithm: algorithm.into(),
            aupr_pct_of_ref,
            caupr_pct_of_ref,
            impact: caupr_pct_of_ref - aupr_pct_of_ref,
        })
    }
}

/// Rows for every report except the reference one, in input order.
pub fn impact_table(reports: &[MetricsReport], reference: Scorer) -> Result<Vec<ImpactRow>> {
    let r = reports
        .iter()
        .find(|r| r.scorer == reference)
        .ok_or_else(|| Error::Parameter(format!("reference scorer {reference} not among the reports")))?;
    reports
        .iter()
        .filter(|o| o.scorer != reference)
        .map(|o| ImpactRow::new(o.scorer.name(), o.aupr, o.caupr, r.aupr, r.caupr))
        .collect()
}

pub fn write_impact_csv<W: Write>(mut w: W, graph: &str, reference: Scorer, rows: &[ImpactRow]) -> Result<()> {
    writeln!(w, "graph,reference,algorithm,aupr_pct_of_ref,caupr_pct_of_ref,impact")?;
    for r in rows {
        writeln!(
            w,
            "{graph},{reference},{},{},{},{}",
            r.algorithm, r.aupr_pct_of_ref, r.caupr_pct_of_ref, r.impact
        )?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceSummary {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
    pub std_over_mean: f64,
}

pub fn variance_summary(values: &[f64]) -> Result<VarianceSummary> {
    if values.len() < 2 {
        return Err(Error::Parameter(format!(
            "variance summary needs at least 2 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let std = (ss / (n - 1.0)).sqrt();
    Ok(VarianceSummary {
        n: values.len(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        std,
        std_over_mean: if mean != 0.0 { std / mean } else { 0.0 },
    })
}

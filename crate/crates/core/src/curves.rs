//! PR and ROC curves over a scored ranking, one point per tie block.
//!
//! Points hold integer `(cum_tp, cum_fp)` counts. A tie block is one atomic
//! step, so the curve does not depend on how equal-score candidates happen
//! to be ordered. Curves stop at the last scored candidate: test positives
//! outside the candidate set are counted in `total_positives` but never
//! reached, which caps recall at `covered_positives / total_positives`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scorers::{score_blocks, Scorer, ScoredRanking};
use crate::split::EdgeSplit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Pr,
    Roc,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Pr => "PR",
            CurveKind::Roc => "ROC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub tp: u64,
    pub fp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub kind: CurveKind,
    /// Starts at `(0, 0)`, one further point per tie block.
    pub points: Vec<CurvePoint>,
    pub total_positives: u64,
    pub total_negatives: u64,
    pub covered_positives: u64,
}

impl Curve {
    /// Accumulates `(positives, negatives)` block counts into a curve.
    pub fn from_blocks<I>(kind: CurveKind, blocks: I, total_positives: u64, total_negatives: u64) -> Curve
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut points = vec![CurvePoint { tp: 0, fp: 0 }];
        let (mut tp, mut fp) = (0u64, 0u64);
        for (p, n) in blocks {
            if p + n == 0 {
                continue;
            }
            tp += p;
            fp += n;
            points.push(CurvePoint { tp, fp });
        }
        Curve {
            kind,
            points,
            total_positives,
            total_negatives,
            covered_positives: tp,
        }
    }

    pub fn with_kind(&self, kind: CurveKind) -> Curve {
        Curve { kind, ..self.clone() }
    }

    pub fn last(&self) -> CurvePoint {
        *self.points.last().expect("curve always holds the origin")
    }

    pub fn covered_recall(&self) -> f64 {
        ratio(self.covered_positives, self.total_positives)
    }

    /// `None` at the origin, where no prediction has been made.
    pub fn precision_at(&self, i: usize) -> Option<f64> {
        let p = self.points[i];
        (p.tp + p.fp > 0).then(|| p.tp as f64 / (p.tp + p.fp) as f64)
    }

    pub fn recall_at(&self, i: usize) -> f64 {
        ratio(self.points[i].tp, self.total_positives)
    }

    pub fn fpr_at(&self, i: usize) -> f64 {
        ratio(self.points[i].fp, self.total_negatives)
    }

    pub(crate) fn expect_kind(&self, kind: CurveKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::CurveKind {
                expected: kind.as_str(),
                actual: self.kind.as_str(),
            })
        }
    }

    /// PR: `cum_tp,cum_fp,precision,recall`; ROC: `cum_tp,cum_fp,tpr,fpr`.
    /// Precision at the origin is written as 1, the usual plotting convention.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        match self.kind {
            CurveKind::Pr => {
                writeln!(w, "cum_tp,cum_fp,precision,recall")?;
                for (i, p) in self.points.iter().enumerate() {
                    let precision = self.precision_at(i).unwrap_or(1.0);
                    writeln!(w, "{},{},{},{}", p.tp, p.fp, precision, self.recall_at(i))?;
                }
            }
            CurveKind::Roc => {
                writeln!(w, "cum_tp,cum_fp,tpr,fpr")?;
                for (i, p) in self.points.iter().enumerate() {
                    writeln!(w, "{},{},{},{}", p.tp, p.fp, self.recall_at(i), self.fpr_at(i))?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn check_inputs(ranking: &ScoredRanking, split: &EdgeSplit) -> Result<()> {
    if ranking.mode != split.mode() {
        return Err(Error::Consistency(format!(
            "ranking is {} but split is {}",
            ranking.mode.as_str(),
            split.mode().as_str()
        )));
    }
    if split.test.is_empty() {
        return Err(Error::Parameter("test set is empty".into()));
    }
    if let Some(e) = ranking.entries.iter().find(|e| split.train.has_edge(e.u, e.v)) {
        return Err(Error::Consistency(format!(
            "ranked candidate ({}, {}) is a training edge; ranking and split do not match",
            e.u, e.v
        )));
    }
    Ok(())
}

fn ranking_curve(kind: CurveKind, ranking: &ScoredRanking, split: &EdgeSplit) -> Result<Curve> {
    check_inputs(ranking, split)?;
    let blocks = ranking.tie_blocks().map(|block| {
        let p = block.iter().filter(|e| split.is_test(e.u, e.v)).count() as u64;
        (p, block.len() as u64 - p)
    });
    Ok(Curve::from_blocks(
        kind,
        blocks,
        split.test.len() as u64,
        split.total_negatives(),
    ))
}

pub fn build_pr_curve(ranking: &ScoredRanking, split: &EdgeSplit) -> Result<Curve> {
    ranking_curve(CurveKind::Pr, ranking, split)
}

pub fn build_roc_curve(ranking: &ScoredRanking, split: &EdgeSplit) -> Result<Curve> {
    ranking_curve(CurveKind::Roc, ranking, split)
}

/// Builds the curve of `scorer` on `split.train` without materializing the
/// ranking; see [`score_blocks`]. Identical to [`build_pr_curve`] on the
/// output of `score_all`.
pub fn build_curve_streaming(kind: CurveKind, split: &EdgeSplit, scorer: Scorer) -> Result<Curve> {
    if split.test.is_empty() {
        return Err(Error::Parameter("test set is empty".into()));
    }
    let blocks = score_blocks(&split.train, scorer, |u, v| split.is_test(u, v))?;
    Ok(Curve::from_blocks(
        kind,
        blocks.into_iter().map(|b| (b.positives, b.negatives)),
        split.test.len() as u64,
        split.total_negatives(),
    ))
}

/// Random classifier over the full candidate universe: a single block holding
/// every test positive and every negative, i.e. constant precision P/(P+N).
pub fn random_baseline_pr(split: &EdgeSplit) -> Curve {
    let p = split.test.len() as u64;
    baseline_from_counts(p, split.total_negatives())
}

pub fn baseline_from_counts(positives: u64, negatives: u64) -> Curve {
    Curve::from_blocks(CurveKind::Pr, [(positives, negatives)], positives, negatives)
}

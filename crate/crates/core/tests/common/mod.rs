//! Independent oracles shared by the integration suites. Nothing here calls
//! the library's scoring, curve or metric code paths.

#![allow(dead_code)]

use lpeval::graph::{Graph, Mode};

/// `(u, v, score)` with score > 0, all pairs enumerated from a dense matrix.
pub fn brute_force_scores(g: &Graph, scorer: &str) -> Vec<(u32, u32, f64)> {
    let n = g.vertex_count();
    let mut sym = vec![vec![false; n]; n];
    let mut arc = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        let (u, v) = (u as usize, v as usize);
        sym[u][v] = true;
        sym[v][u] = true;
        arc[u][v] = true;
        if g.mode() == Mode::Undirected {
            arc[v][u] = true;
        }
    }
    let degree: Vec<usize> = sym.iter().map(|row| row.iter().filter(|&&b| b).count()).collect();
    let mut out = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v || arc[u][v] || (g.mode() == Mode::Undirected && v < u) {
                continue;
            }
            let mut degs: Vec<usize> = (0..n).filter(|&z| sym[u][z] && sym[v][z]).map(|z| degree[z]).collect();
            degs.sort_unstable();
            let mut score = 0.0;
            for d in degs {
                score += match scorer {
                    "cn" => 1.0,
                    "aa" => 1.0 / (d as f64).ln(),
                    "ra" => 1.0 / d as f64,
                    other => panic!("unknown scorer {other}"),
                };
            }
            if score > 0.0 {
                out.push((u as u32, v as u32, score));
            }
        }
    }
    out.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    out
}

/// Exclusive end of each equal-score run.
pub fn tie_ends(scores: &[f64]) -> Vec<usize> {
    let mut ends = Vec::new();
    for i in 0..scores.len() {
        if i + 1 == scores.len() || scores[i + 1] != scores[i] {
            ends.push(i + 1);
        }
    }
    ends
}

/// Cumulative `(tp, fp)` after each tie block, starting at the origin.
pub fn block_points(ranked: &[(u32, u32, f64)], is_pos: impl Fn(u32, u32) -> bool) -> Vec<(u64, u64)> {
    let scores: Vec<f64> = ranked.iter().map(|r| r.2).collect();
    let mut pts = vec![(0u64, 0u64)];
    let (mut tp, mut fp, mut start) = (0, 0, 0);
    for end in tie_ends(&scores) {
        for r in &ranked[start..end] {
            if is_pos(r.0, r.1) {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        pts.push((tp, fp));
        start = end;
    }
    pts
}

fn simpson(f: impl Fn(f64) -> f64, end: f64, steps: usize) -> f64 {
    let h = end / steps as f64;
    // Neumaier summation keeps 10^6 terms from drifting
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut add = |x: f64| {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    };
    add(f(0.0));
    add(f(end));
    for i in 1..steps {
        add(if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h));
    }
    (sum + comp) * h / 3.0
}

pub const ORACLE_STEPS: usize = 1_000_000;

/// Area under precision, integrated numerically over each segment with
/// false positives interpolated linearly in true positives. With
/// `budget`, integration stops where the interpolated fp count reaches it.
/// Returns `(area, recall at the stopping point)`.
pub fn numeric_pr_area(points: &[(u64, u64)], total_pos: u64, budget: Option<u64>) -> (f64, f64) {
    PrOracle::new(points, total_pos).area(budget)
}

/// Integrand of segment `w` as a function of true positives gained in it.
fn segment_precision(w: &[(u64, u64)]) -> impl Fn(f64) -> f64 {
    let (a, b) = (w[0].0 as f64, w[0].1 as f64);
    let slope = (w[1].1 - w[0].1) as f64 / (w[1].0 - w[0].0) as f64;
    move |t: f64| {
        let made = a + b + t * (1.0 + slope);
        if made == 0.0 {
            1.0 / (1.0 + slope)
        } else {
            (a + t) / made
        }
    }
}

/// [`numeric_pr_area`] with whole-segment integrals computed once, for
/// sweeping many budgets over one curve.
pub struct PrOracle<'a> {
    points: &'a [(u64, u64)],
    total_pos: f64,
    full: Vec<f64>,
}

impl<'a> PrOracle<'a> {
    pub fn new(points: &'a [(u64, u64)], total_pos: u64) -> Self {
        let full = points
            .windows(2)
            .map(|w| {
                let dtp = (w[1].0 - w[0].0) as f64;
                if dtp > 0.0 {
                    simpson(segment_precision(w), dtp, ORACLE_STEPS)
                } else {
                    0.0
                }
            })
            .collect();
        PrOracle {
            points,
            total_pos: total_pos as f64,
            full,
        }
    }

    pub fn area(&self, budget: Option<u64>) -> (f64, f64) {
        let mut area = 0.0;
        for (i, w) in self.points.windows(2).enumerate() {
            match budget.filter(|&bud| w[1].1 > bud) {
                None => area += self.full[i],
                Some(bud) => {
                    let (a, b) = (w[0].0 as f64, w[0].1 as f64);
                    let (dtp, dfp) = ((w[1].0 - w[0].0) as f64, (w[1].1 - w[0].1) as f64);
                    let end = (bud as f64 - b) / dfp * dtp;
                    if end > 0.0 {
                        area += simpson(segment_precision(w), end, ORACLE_STEPS);
                    }
                    return (area / self.total_pos, (a + end.max(0.0)) / self.total_pos);
                }
            }
        }
        let last = self.points.last().unwrap().0;
        (area / self.total_pos, last as f64 / self.total_pos)
    }
}

/// Area under TPR(FPR), piecewise linear between points, by Simpson.
pub fn numeric_roc_area(points: &[(u64, u64)], total_pos: u64, total_neg: u64) -> f64 {
    let mut area = 0.0;
    for w in points.windows(2) {
        let (x0, x1) = (w[0].1 as f64 / total_neg as f64, w[1].1 as f64 / total_neg as f64);
        if x1 == x0 {
            continue;
        }
        let (y0, y1) = (w[0].0 as f64 / total_pos as f64, w[1].0 as f64 / total_pos as f64);
        area += simpson(|t| y0 + (y1 - y0) * t / (x1 - x0), x1 - x0, ORACLE_STEPS);
    }
    area
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

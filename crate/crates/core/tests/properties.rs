use lpeval::curves::{build_pr_curve, Curve, CurveKind};
use lpeval::graph::{Graph, Mode};
use lpeval::metrics::{aupr, auroc, budget_cut};
use lpeval::scorers::{score_all, ScoreOptions, ScoredPair, ScoredRanking, Scorer};
use lpeval::split::random_split;
use proptest::prelude::*;

fn singleton_curve(kind: CurveKind, labels: &[bool], negatives: u64) -> Curve {
    let p = labels.iter().filter(|&&l| l).count() as u64;
    Curve::from_blocks(kind, labels.iter().map(|&l| if l { (1, 0) } else { (0, 1) }), p, negatives)
}

fn labels() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 2..=8).prop_filter("mixed", |v| v.contains(&true) && v.contains(&false))
}

fn small_graph() -> impl Strategy<Value = (Graph, u64)> {
    (4usize..10, prop::collection::vec((0u32..10, 0u32..10), 6..30), any::<u64>()).prop_filter_map(
        "enough edges",
        |(n, edges, seed)| {
            let edges: Vec<_> = edges.into_iter().filter(|&(u, v)| (u as usize) < n && (v as usize) < n).collect();
            let g = Graph::from_edges(Mode::Undirected, n, edges).ok()?;
            (g.edge_count() >= 5).then_some((g, seed))
        },
    )
}

proptest! {
    // Moving a positive ahead of an adjacent negative dominates the original
    // ranking in ROC space, and so also in PR space.
    #[test]
    fn dominance_transfers((labels, i) in labels().prop_flat_map(|l| { let n = l.len(); (Just(l), 0..n - 1) })) {
        prop_assume!(!labels[i] && labels[i + 1]);
        let mut better = labels.clone();
        better.swap(i, i + 1);
        let neg = labels.iter().filter(|&&l| !l).count() as u64;
        let (a, b) = (singleton_curve(CurveKind::Roc, &labels, neg), singleton_curve(CurveKind::Roc, &better, neg));
        prop_assert!(auroc(&b).unwrap() > auroc(&a).unwrap());
        let (a, b) = (a.with_kind(CurveKind::Pr), b.with_kind(CurveKind::Pr));
        prop_assert!(aupr(&b).unwrap() > aupr(&a).unwrap());
        for budget in 1..=neg {
            prop_assert!(budget_cut(&b, budget).unwrap().caupr >= budget_cut(&a, budget).unwrap().caupr);
        }
    }

    #[test]
    fn precision_and_recall_ranges(blocks in prop::collection::vec((0u64..4, 0u64..4), 1..12), extra in 0u64..5) {
        let p: u64 = blocks.iter().map(|b| b.0).sum::<u64>() + extra;
        prop_assume!(p > 0);
        let c = Curve::from_blocks(CurveKind::Pr, blocks, p, 100);
        for i in 1..c.points.len() {
            let pr = c.precision_at(i).unwrap();
            prop_assert!((0.0..=1.0).contains(&pr));
            prop_assert!(c.recall_at(i) >= c.recall_at(i - 1));
        }
        prop_assert!(c.covered_recall() <= 1.0);
        let a = aupr(&c).unwrap();
        prop_assert!((0.0..=c.covered_recall()).contains(&a));
        prop_assert_eq!(budget_cut(&c, u64::MAX).unwrap().caupr, a);
    }

    #[test]
    fn tie_block_is_atomic(scores in prop::collection::vec(0u8..3, 2..8), labels in prop::collection::vec(any::<bool>(), 8)) {
        // the order of equal scores inside a block cannot move the curve
        let curve = |order: &[usize]| {
            let mut blocks = std::collections::BTreeMap::<std::cmp::Reverse<u8>, (u64, u64)>::new();
            for &i in order {
                let b = blocks.entry(std::cmp::Reverse(scores[i])).or_default();
                if labels[i] { b.0 += 1 } else { b.1 += 1 }
            }
            Curve::from_blocks(CurveKind::Pr, blocks.into_values(), 8, 8)
        };
        let forward: Vec<usize> = (0..scores.len()).collect();
        let backward: Vec<usize> = forward.iter().rev().copied().collect();
        prop_assert_eq!(curve(&forward), curve(&backward));
    }

    #[test]
    fn positive_rescaling_keeps_curve((g, seed) in small_graph(), factor in 0.01f64..100.0) {
        let Ok(split) = random_split(&g, 0.3, seed) else { return Ok(()) };
        for scorer in Scorer::ALL {
            let ranking = score_all(&split.train, scorer, ScoreOptions::default()).unwrap();
            let scaled = ScoredRanking::from_entries(
                scorer,
                Mode::Undirected,
                ranking.entries.iter().map(|e| ScoredPair { score: e.score * factor, ..*e }).collect(),
            );
            // products can merge or split float ties; compare only when ties agree
            if scaled.tie_ends == ranking.tie_ends {
                prop_assert_eq!(build_pr_curve(&ranking, &split).unwrap(), build_pr_curve(&scaled, &split).unwrap());
            }
        }
    }
}

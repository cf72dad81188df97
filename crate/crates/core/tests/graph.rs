use num_bigint::BigInt;
use proptest::prelude::*;
use sandlab::families::{self, from_spec};
use sandlab::graph::{Graph, GraphError};

/// Counts spanning trees by testing every (n−1)-edge subset for acyclicity.
fn brute_force_trees(g: &Graph) -> u64 {
    let n = g.n();
    let edges = g.edges();
    let m = edges.len();
    let mut count = 0;
    let mut pick = Vec::new();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    fn rec(i: usize, need: usize, m: usize, pick: &mut Vec<usize>, edges: &[(usize, usize)], n: usize, count: &mut u64) {
        if need == 0 {
            let mut p: Vec<usize> = (0..n).collect();
            for &k in pick.iter() {
                let (a, b) = edges[k];
                let (ra, rb) = (find(&mut p, a), find(&mut p, b));
                if ra == rb {
                    return;
                }
                p[ra] = rb;
            }
            *count += 1;
            return;
        }
        if m - i < need {
            return;
        }
        pick.push(i);
        rec(i + 1, need - 1, m, pick, edges, n, count);
        pick.pop();
        rec(i + 1, need, m, pick, edges, n, count);
    }
    rec(0, n - 1, m, &mut pick, edges, n, &mut count);
    count
}

#[test]
fn one_based_construction_and_errors() {
    let c3 = Graph::from_one_based(3, &[(1, 2), (2, 3), (3, 1)], 3).unwrap();
    assert_eq!(c3.n(), 3);
    assert_eq!(c3.sink(), 2);
    let p2 = Graph::from_one_based(2, &[(1, 2)], 2).unwrap();
    assert!(p2.is_tree());
    assert!(Graph::from_one_based(4, &[(1, 2), (2, 3), (3, 4)], 4).is_ok());
    assert_eq!(Graph::from_one_based(4, &[(1, 2), (3, 4)], 4).unwrap_err(), GraphError::Disconnected);
    assert!(matches!(Graph::new(3, &[(0, 0), (1, 2)], 2), Err(GraphError::SelfLoop(0))));
    assert!(matches!(Graph::new(3, &[(0, 1), (1, 0), (1, 2)], 2), Err(GraphError::DuplicateEdge(0, 1))));
}

#[test]
fn family_sizes() {
    let s1 = families::sierpinski(1).unwrap();
    assert_eq!(s1.n(), 6);
    for m in 0..=4u32 {
        assert_eq!(families::sierpinski(m).unwrap().n() as u64, (3u64.pow(m + 1) + 3) / 2);
    }
    let t = families::triangle_with_tail(1).unwrap();
    assert_eq!(t.n(), 4);
    assert_eq!(t.degree(t.vertex_by_label("w").unwrap()), 3);
    assert_eq!(t.degree(t.vertex_by_label("w1").unwrap()), 1);
    let torus = families::torus(3).unwrap();
    assert_eq!((torus.n(), torus.edges().len()), (9, 18));
    assert!(torus.degrees().iter().all(|&d| d == 4));
}

#[test]
fn laplacians_of_small_graphs() {
    let c3 = families::cycle(3).unwrap();
    assert_eq!(c3.full_laplacian().to_rows(), vec![vec![2, -1, -1], vec![-1, 2, -1], vec![-1, -1, 2]]);
    assert_eq!(c3.reduced_laplacian().to_rows(), vec![vec![2, -1], vec![-1, 2]]);
    let k4 = families::complete(4).unwrap().laplacians();
    assert_eq!((k4.degree_stats.min, k4.degree_stats.star, k4.degree_stats.max), (3, 3, 3));
    assert_eq!(k4.girth, Some(3));
    for m in 1..6 {
        let g = families::triangle_with_tail(m).unwrap();
        for s in 0..g.n() {
            assert_eq!(g.with_sink(s).unwrap().degree_stats().star, 2);
        }
    }
}

#[test]
fn girth_values() {
    for n in 3..10 {
        assert_eq!(families::cycle(n).unwrap().girth(), Some(n));
        assert_eq!(families::complete(n).unwrap().girth(), Some(3));
    }
    assert_eq!(families::path(5).unwrap().girth(), None);
    assert_eq!(families::petersen().unwrap().girth(), Some(5));
    assert_eq!(families::torus(5).unwrap().girth(), Some(4));
}

#[test]
fn spanning_tree_closed_forms() {
    for n in 3..=12 {
        assert_eq!(families::cycle(n).unwrap().spanning_tree_count(), BigInt::from(n));
    }
    for n in 2..=9u32 {
        let want = BigInt::from(n).pow(n - 2);
        assert_eq!(families::complete(n as usize).unwrap().spanning_tree_count(), want);
    }
    for m in 1..=5u32 {
        for n in 1..=5u32 {
            if m + n < 2 {
                continue;
            }
            let want = BigInt::from(n).pow(m - 1) * BigInt::from(m).pow(n - 1);
            let g = families::complete_bipartite(m as usize, n as usize).unwrap();
            assert_eq!(g.spanning_tree_count(), want, "K_{m},{n}");
        }
    }
    for m in 0..=3u32 {
        let p3 = 3u64.pow(m);
        let (a, b, c) = ((p3 - 1) / 2, (3 * p3 + 2 * m as u64 + 1) / 4, (p3 - 2 * m as u64 - 1) / 4);
        let want = BigInt::from(2).pow(a as u32) * BigInt::from(3).pow(b as u32) * BigInt::from(5).pow(c as u32);
        assert_eq!(families::sierpinski(m).unwrap().spanning_tree_count(), want, "level {m}");
    }
}

#[test]
fn spanning_trees_match_edge_subset_enumeration() {
    let specs = ["torus:3", "petersen", "tail:3", "bipartite:3,3", "complete:5", "sierpinski:1", "rooted:path:2/cycle:3/cycle:4"];
    for s in specs {
        let g = from_spec(s).unwrap();
        assert_eq!(g.spanning_tree_count(), BigInt::from(brute_force_trees(&g)), "{s}");
    }
    for seed in 0..15 {
        let g = families::erdos_renyi(7, 0.5, seed).unwrap();
        assert_eq!(g.spanning_tree_count(), BigInt::from(brute_force_trees(&g)));
    }
}

#[test]
fn spec_grammar() {
    let g = from_spec("tail:2:sink=u").unwrap();
    assert_eq!(g.label(g.sink()), "u");
    assert_eq!(from_spec("bipartite:2,3").unwrap().n(), 5);
    assert_eq!(from_spec("rooted:path:3/cycle:3/path:2/cycle:3").unwrap().n(), 8);
    assert!(from_spec("cycle").is_err());
    assert!(from_spec("nonsense:3").is_err());
    assert!(from_spec("cycle:5:sink=zz").is_err());
    let r1 = from_spec("regular:10,3,4").unwrap();
    let r2 = from_spec("regular:10,3,4").unwrap();
    assert_eq!(r1.edges(), r2.edges());
    assert!(r1.degrees().iter().all(|&d| d == 3));
}

#[test]
fn json_input() {
    let g = Graph::from_json(r#"{"n": 4, "edges": [[1,2],[2,3],[3,4],[4,1]], "sink": 2}"#).unwrap();
    assert_eq!(g.sink(), 1);
    assert_eq!(g.spanning_tree_count(), BigInt::from(4));
    let back = Graph::from_json(&serde_json::to_string(&g.to_json()).unwrap()).unwrap();
    assert_eq!(back.edges(), g.edges());
    assert!(Graph::from_json("{").is_err());
}

#[test]
fn rooted_sum_identifies_roots() {
    let parts = vec![families::cycle(3).unwrap(), families::cycle(4).unwrap()];
    let g = families::rooted_sum(&families::path(2).unwrap(), &parts).unwrap();
    assert_eq!(g.n(), 7);
    assert_eq!(g.edges().len(), 3 + 4 + 1);
    assert_eq!(g.spanning_tree_count(), BigInt::from(12));
    let ranges = families::rooted_sum_ranges(&parts);
    assert_eq!(ranges, vec![0..3, 3..7]);
}

fn arb_graph() -> impl Strategy<Value = Graph> {
    (3usize..=7, any::<u64>()).prop_map(|(n, seed)| families::erdos_renyi(n, 0.6, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_rows_sum_to_zero(g in arb_graph()) {
        let l = g.full_laplacian();
        for i in 0..g.n() {
            prop_assert_eq!(l.row(i).iter().sum::<i64>(), 0);
            for j in 0..g.n() {
                prop_assert_eq!(l[(i, j)], l[(j, i)]);
            }
        }
    }

    #[test]
    fn tree_count_ignores_labels_and_sink(g in arb_graph(), rot in 0usize..7, sink in 0usize..7) {
        let n = g.n();
        let perm: Vec<usize> = (0..n).map(|v| (v + rot) % n).collect();
        let want = g.spanning_tree_count();
        prop_assert_eq!(g.relabel(&perm).unwrap().spanning_tree_count(), want.clone());
        prop_assert_eq!(g.with_sink(sink % n).unwrap().spanning_tree_count(), want);
    }
}

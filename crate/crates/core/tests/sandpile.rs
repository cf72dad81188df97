use std::collections::{BTreeSet, VecDeque};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sandlab::families;
use sandlab::graph::Graph;
use sandlab::sandpile::{Configuration, FiringPolicy, GroupModel, Sandpile, SandpileError, VertexDistribution};

/// Topples the lowest unstable non-sink vertex once per round, straight from the adjacency list.
fn naive_stabilize(g: &Graph, chips: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let n = g.n();
    let mut full = vec![0i64; n];
    for (i, &c) in chips.iter().enumerate() {
        full[g.vertex_of_slot(i)] = c as i64;
    }
    let mut fired = vec![0u64; n];
    loop {
        let v = (0..n).find(|&v| v != g.sink() && full[v] >= g.degree(v) as i64);
        let Some(v) = v else { break };
        full[v] -= g.degree(v) as i64;
        fired[v] += 1;
        for &w in g.neighbors(v) {
            full[w] += 1;
        }
    }
    let stable = (0..n - 1).map(|i| full[g.vertex_of_slot(i)] as u64).collect();
    let odo = (0..n - 1).map(|i| fired[g.vertex_of_slot(i)]).collect();
    (stable, odo)
}

/// Recurrent configurations as those reachable from the saturated one by adding chips.
fn reachable_from_saturated(sp: &Sandpile) -> BTreeSet<Configuration> {
    let start = sp.saturated();
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for i in 0..sp.slots() {
            let next = sp.add_chip(&c, i).unwrap();
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    seen
}

fn small_graphs() -> Vec<Graph> {
    let mut out: Vec<Graph> = ["cycle:3", "cycle:6", "complete:4", "tail:2", "bipartite:2,3", "petersen", "sierpinski:1", "tail:3:sink=u"]
        .iter()
        .map(|s| families::from_spec(s).unwrap())
        .collect();
    out.extend((0..6).map(|s| families::erdos_renyi(6, 0.5, s).unwrap()));
    out
}

#[test]
fn triangle_topples_once() {
    let g = Graph::from_one_based(3, &[(1, 2), (2, 3), (3, 1)], 3).unwrap();
    let sp = Sandpile::new(&g);
    let res = sp.stabilize(&Configuration::new(vec![2, 0])).unwrap();
    assert_eq!(res.stable.chips, vec![0, 1]);
    assert_eq!(res.odometer, vec![1, 0]);
    assert_eq!(sp.saturated().chips, vec![1, 1]);
    assert!(sp.is_recurrent(&Configuration::new(vec![1, 1])).unwrap());
    assert!(sp.is_recurrent(&Configuration::new(vec![0, 1])).unwrap());
    assert!(!sp.is_recurrent(&Configuration::new(vec![0, 0])).unwrap());
    assert_eq!(sp.is_recurrent(&Configuration::new(vec![2, 0])), Err(SandpileError::Unstable));
}

#[test]
fn policies_agree_with_naive_toppling() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for g in small_graphs() {
        let sp = Sandpile::new(&g);
        for _ in 0..20 {
            let chips: Vec<u64> = (0..sp.slots()).map(|_| rand::Rng::gen_range(&mut rng, 0..12)).collect();
            let (stable, odo) = naive_stabilize(&g, &chips);
            for policy in [FiringPolicy::Fifo, FiringPolicy::MaxChipsFirst] {
                let res = sp.stabilize_with(&Configuration::new(chips.clone()), policy).unwrap();
                assert_eq!(res.stable.chips, stable);
                assert_eq!(res.odometer, odo);
            }
        }
    }
}

#[test]
fn chips_are_conserved_up_to_sink_losses() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for g in small_graphs() {
        let sp = Sandpile::new(&g);
        for _ in 0..20 {
            let c = Configuration::new((0..sp.slots()).map(|_| rand::Rng::gen_range(&mut rng, 0..20)).collect());
            let res = sp.stabilize(&c).unwrap();
            let lost: u128 = (0..sp.slots()).map(|i| (res.odometer[i] * sp.sink_edges(i)) as u128).sum();
            assert_eq!(c.total(), res.stable.total() + lost);
            assert!(sp.is_stable(&res.stable));
        }
    }
}

#[test]
fn burning_test_matches_reachability() {
    for g in small_graphs() {
        let sp = Sandpile::new(&g);
        let burned: BTreeSet<Configuration> =
            sp.stable_configurations().filter(|c| sp.is_recurrent(c).unwrap()).collect();
        assert_eq!(burned, reachable_from_saturated(&sp));
        assert_eq!(burned.len() as u128, GroupModel::new(&g).unwrap().size().unwrap() as u128);
        assert_eq!(sp.stable_configurations().count() as u128, sp.stable_count());
    }
}

#[test]
fn identity_is_neutral_and_maps_to_zero() {
    for g in small_graphs() {
        let sp = Sandpile::new(&g);
        let model = GroupModel::new(&g).unwrap();
        let e = sp.identity().unwrap();
        assert!(sp.is_recurrent(&e).unwrap());
        assert_eq!(sp.oplus(&e, &e).unwrap(), e);
        assert!(model.coords_of_chips(&e.chips).iter().all(|&x| x == 0));
        for c in reachable_from_saturated(&sp) {
            assert_eq!(sp.oplus(&e, &c).unwrap(), c);
        }
    }
}

#[test]
fn coordinates_transport_the_group_law() {
    for g in small_graphs() {
        let sp = Sandpile::new(&g);
        let model = GroupModel::new(&g).unwrap();
        let rec: Vec<Configuration> = reachable_from_saturated(&sp).into_iter().collect();
        let coords: BTreeSet<Vec<u64>> = rec.iter().map(|c| model.coords_of_chips(&c.chips)).collect();
        assert_eq!(coords.len(), rec.len());
        for a in rec.iter().take(6) {
            for b in rec.iter().rev().take(6) {
                let sum = sp.oplus(a, b).unwrap();
                assert_eq!(
                    model.coords_of_chips(&sum.chips),
                    model.add(&model.coords_of_chips(&a.chips), &model.coords_of_chips(&b.chips))
                );
            }
        }
        for idx in 0..model.size().unwrap() {
            assert_eq!(model.index(&model.decode(idx)), idx);
        }
    }
}

#[test]
fn cycle_generator_has_order_n() {
    for n in 3..10 {
        let g = families::cycle(n).unwrap();
        let sp = Sandpile::new(&g);
        let start = sp.identity().unwrap();
        let mut c = start.clone();
        for k in 1..=n {
            c = sp.add_chip(&c, 0).unwrap();
            assert_eq!(c == start, k == n);
        }
    }
}

#[test]
fn chain_step_holds_on_sink() {
    let g = families::complete(5).unwrap();
    let sp = Sandpile::new(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let c = sp.saturated();
    let mu = VertexDistribution::point_mass(5, g.sink());
    for _ in 0..10 {
        assert_eq!(sp.chain_step(&c, &mut rng, &mu).unwrap(), c);
    }
    let mu = VertexDistribution::point_mass(5, g.vertex_of_slot(2));
    assert_eq!(sp.chain_step(&c, &mut rng, &mu).unwrap(), sp.add_chip(&c, 2).unwrap());
}

#[test]
fn budget_and_length_errors() {
    let sp = Sandpile::new(&families::cycle(4).unwrap()).with_budget(2);
    assert!(matches!(sp.stabilize(&Configuration::new(vec![40, 40, 40])), Err(SandpileError::NonTermination(2))));
    assert!(matches!(sp.stabilize(&Configuration::new(vec![1])), Err(SandpileError::LengthMismatch { .. })));
    assert!(VertexDistribution::from_weights(vec![0.0, 0.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chip_additions_commute(seed in any::<u64>(), order in prop::collection::vec(0usize..6, 1..12)) {
        let g = families::erdos_renyi(7, 0.5, seed).unwrap();
        let sp = Sandpile::new(&g);
        let start = sp.saturated();
        let mut forward = start.clone();
        for &i in &order {
            forward = sp.add_chip(&forward, i).unwrap();
        }
        let mut backward = start.clone();
        for &i in order.iter().rev() {
            backward = sp.add_chip(&backward, i).unwrap();
        }
        let mut bulk = start.chips.clone();
        for &i in &order {
            bulk[i] += 1;
        }
        let bulk = sp.stabilize(&Configuration::new(bulk)).unwrap().stable;
        prop_assert_eq!(&forward, &backward);
        prop_assert_eq!(&forward, &bulk);
    }

    #[test]
    fn stabilization_is_policy_free(seed in any::<u64>(), chips in prop::collection::vec(0u64..30, 6)) {
        let g = families::erdos_renyi(7, 0.6, seed).unwrap();
        let sp = Sandpile::new(&g);
        let c = Configuration::new(chips);
        let a = sp.stabilize_with(&c, FiringPolicy::Fifo).unwrap();
        let b = sp.stabilize_with(&c, FiringPolicy::MaxChipsFirst).unwrap();
        prop_assert_eq!(a, b);
    }
}

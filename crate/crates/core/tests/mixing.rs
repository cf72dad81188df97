use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use sandlab::characters::CharacterTable;
use sandlab::families::{self, from_spec};
use sandlab::graph::Graph;
use sandlab::mixing::{
    counting_lower_bound, cutoff_report, exact_evolution, exact_l2_curve, integer_times, kn_distinguishing_statistic,
    kn_phi, monte_carlo_tv, sparse_evolution, uniform_noise_floor, ChainTime, Kahan, MixingError,
};
use sandlab::sandpile::{Configuration, GroupModel, Sandpile, VertexDistribution};
use sandlab::spectral::{spectral_summary, tv_eigval_bounds};

const BUDGET: u64 = 300_000;

/// Recurrent configurations reached from the identity, with the chip-addition table.
struct Chain {
    states: Vec<Configuration>,
    next: Vec<Vec<usize>>,
}

impl Chain {
    fn new(g: &Graph) -> Self {
        let sp = Sandpile::new(g);
        let start = sp.identity().unwrap();
        let mut index = HashMap::from([(start.clone(), 0usize)]);
        let mut states = vec![start.clone()];
        let mut queue = VecDeque::from([0usize]);
        let mut next = vec![Vec::new()];
        while let Some(a) = queue.pop_front() {
            for i in 0..sp.slots() {
                let c = sp.add_chip(&states[a], i).unwrap();
                let b = *index.entry(c.clone()).or_insert_with(|| {
                    states.push(c);
                    next.push(Vec::new());
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                });
                next[a].push(b);
            }
        }
        Chain { states, next }
    }

    /// Distribution after each of `t_max` lazy steps with uniform vertex choice.
    fn run(&self, n: usize, t_max: usize) -> Vec<Vec<f64>> {
        let mut p = vec![0.0; self.states.len()];
        p[0] = 1.0;
        let mut out = vec![p.clone()];
        for _ in 0..t_max {
            let mut q = vec![0.0; p.len()];
            for (a, &pa) in p.iter().enumerate() {
                q[a] += pa / n as f64;
                for &b in &self.next[a] {
                    q[b] += pa / n as f64;
                }
            }
            p = q;
            out.push(p.clone());
        }
        out
    }
}

fn tv_uniform(p: &[f64]) -> f64 {
    let u = 1.0 / p.len() as f64;
    0.5 * p.iter().map(|x| (x - u).abs()).sum::<f64>()
}

fn model(g: &Graph) -> GroupModel {
    GroupModel::new(g).unwrap()
}

fn uniform(g: &Graph) -> VertexDistribution {
    VertexDistribution::uniform(g.n())
}

#[test]
fn evolution_matches_configuration_chain() {
    for spec in ["cycle:5", "complete:5", "tail:3", "bipartite:2,3", "sierpinski:1", "petersen"] {
        let g = from_spec(spec).unwrap();
        let chain = Chain::new(&g);
        let dists = chain.run(g.n(), 25);
        let ev = exact_evolution(&model(&g), 25, &uniform(&g), BUDGET).unwrap();
        for (t, p) in dists.iter().enumerate() {
            assert!((ev.curve.tv[t].unwrap() - tv_uniform(p)).abs() < 1e-12, "{spec} t={t}");
        }
    }
}

#[test]
fn spectral_l2_matches_evolution() {
    for spec in ["cycle:6", "complete:6", "tail:4", "petersen", "bipartite:3,3", "torus:3", "sierpinski:1", "er:9,0.4,3"] {
        let g = from_spec(spec).unwrap();
        let m = model(&g);
        let eigs = CharacterTable::new(&m, BUDGET).unwrap().spectrum(&uniform(&g));
        let times = integer_times(50);
        let spec_curve = exact_l2_curve(&eigs, m.order(), &times, ChainTime::Discrete).unwrap();
        let ev = exact_evolution(&m, 50, &uniform(&g), BUDGET).unwrap();
        for t in 0..=50 {
            let a = spec_curve.l2sq[t].unwrap();
            let b = ev.curve.l2sq[t].unwrap();
            assert!((a - b).abs() <= 1e-8 * (1.0 + b), "{spec} t={t}: {a} vs {b}");
            assert!((ev.mass[t] - 1.0).abs() < 1e-12);
        }
        let size = m.size().unwrap() as f64;
        assert!((spec_curve.l2sq[0].unwrap() - (size - 1.0)).abs() < 1e-9 * size);
        assert!((ev.curve.tv[0].unwrap() - (1.0 - 1.0 / size)).abs() < 1e-12);
        for w in ev.curve.tv.windows(2) {
            assert!(w[1].unwrap() <= w[0].unwrap() + 1e-12, "{spec}");
        }
    }
}

#[test]
fn sparse_evolution_matches_dense() {
    for spec in ["complete:5", "tail:3", "torus:3"] {
        let g = from_spec(spec).unwrap();
        let m = model(&g);
        let dense = exact_evolution(&m, 12, &uniform(&g), BUDGET).unwrap();
        let sparse = sparse_evolution(&m, 12, &uniform(&g), 1_000_000).unwrap();
        for t in 0..=12 {
            assert!((dense.curve.tv[t].unwrap() - sparse.curve.tv[t].unwrap()).abs() < 1e-12);
            assert!((dense.curve.l2sq[t].unwrap() - sparse.curve.l2sq[t].unwrap()).abs() < 1e-9 * (1.0 + dense.curve.l2sq[t].unwrap()));
        }
    }
    let g = families::torus(4).unwrap();
    assert!(matches!(sparse_evolution(&model(&g), 30, &uniform(&g), 1000), Err(MixingError::BudgetExceeded { .. })));
}

#[test]
fn cycles_mix_in_one_step() {
    for n in 3..12 {
        let g = families::cycle(n).unwrap();
        let m = model(&g);
        let eigs = CharacterTable::new(&m, BUDGET).unwrap().spectrum(&uniform(&g));
        let c = exact_l2_curve(&eigs, m.order(), &integer_times(3), ChainTime::Discrete).unwrap();
        assert_eq!(c.l2sq[1], Some(0.0));
        let ev = exact_evolution(&m, 3, &uniform(&g), BUDGET).unwrap();
        assert!(ev.curve.tv[1].unwrap() < 1e-15);
        assert_eq!(ev.curve.t_mix(0.25), Some(1.0));
    }
}

#[test]
fn triangle_with_tail_closed_form() {
    for m in 1..6 {
        let g = from_spec(&format!("tail:{m}:sink=u")).unwrap();
        let n = g.n() as f64;
        let gm = model(&g);
        let eigs = CharacterTable::new(&gm, BUDGET).unwrap().spectrum(&uniform(&g));
        let times = integer_times(40);
        let c = exact_l2_curve(&eigs, gm.order(), &times, ChainTime::Discrete).unwrap();
        for (t, l2) in times.iter().zip(&c.l2sq) {
            let want = 2.0 * (1.0 - 3.0 / n).powf(2.0 * t);
            assert!((l2.unwrap() - want).abs() < 1e-13 * (1.0 + want));
        }
        let cont = exact_l2_curve(&eigs, gm.order(), &[0.0, 1.0, 2.5], ChainTime::Continuous).unwrap();
        assert!((cont.l2sq[0].unwrap() - 2.0).abs() < 1e-15);
        let gap = 1.0 + 0.5 * (1.0 - 3.0 / n);
        assert!((cont.l2sq[2].unwrap() - 2.0 * (-5.0 * gap).exp()).abs() < 1e-14);
    }
}

#[test]
fn mixing_time_lies_in_eigenvalue_window() {
    for spec in ["complete:5", "complete:6", "tail:4", "petersen", "bipartite:2,5", "sierpinski:1", "torus:3"] {
        let g = from_spec(spec).unwrap();
        let m = model(&g);
        let eigs = CharacterTable::new(&m, BUDGET).unwrap().spectrum(&uniform(&g));
        let s = spectral_summary(&eigs, false).unwrap();
        let (lo, hi) = tv_eigval_bounds(s.t_rel, m.order(), 0.25);
        let ev = exact_evolution(&m, hi as u64 + 1, &uniform(&g), BUDGET).unwrap();
        let t_mix = ev.curve.t_mix(0.25).unwrap();
        assert!(lo <= t_mix && t_mix <= hi, "{spec}: {lo} <= {t_mix} <= {hi}");
    }
}

#[test]
fn frozen_chain_never_moves() {
    let g = families::complete(5).unwrap();
    let m = model(&g);
    let mu = VertexDistribution::point_mass(5, g.sink());
    let ev = exact_evolution(&m, 10, &mu, BUDGET).unwrap();
    for tv in &ev.curve.tv {
        assert!((tv.unwrap() - (1.0 - 1.0 / 125.0)).abs() < 1e-15);
    }
}

#[test]
fn evolution_budget_is_enforced() {
    let g = families::torus(5).unwrap();
    assert!(matches!(exact_evolution(&model(&g), 2, &uniform(&g), BUDGET), Err(MixingError::BudgetExceeded { .. })));
    let eigs = CharacterTable::new(&model(&families::cycle(4).unwrap()), BUDGET).unwrap().spectrum(&VertexDistribution::uniform(4));
    assert!(exact_l2_curve(&eigs[..2], &BigInt::from(4), &[1.0], ChainTime::Discrete).is_err());
}

#[test]
fn monte_carlo_agrees_with_exact_tv() {
    for (spec, times) in [("cycle:10", vec![0u64, 1, 2]), ("complete:5", vec![0, 2, 5, 10])] {
        let g = from_spec(spec).unwrap();
        let m = model(&g);
        let exact = exact_evolution(&m, *times.last().unwrap(), &uniform(&g), BUDGET).unwrap();
        let mc = monte_carlo_tv(&m, &uniform(&g), 20_000, &times, 11).unwrap();
        let se = mc.curve.tv_se.as_ref().unwrap();
        for (k, &t) in times.iter().enumerate() {
            let want = exact.curve.tv[t as usize].unwrap();
            let got = mc.curve.tv[k].unwrap();
            assert!((got - want).abs() <= 3.0 * se[k] + mc.noise_floor, "{spec} t={t}: {got} vs {want}");
        }
        assert!(mc.bias_warning.is_none());
        let again = monte_carlo_tv(&m, &uniform(&g), 20_000, &times, 11).unwrap();
        assert_eq!(again.curve.tv, mc.curve.tv);
    }
    assert_eq!(uniform_noise_floor(100, 1.0), 0.0);
    let floor = uniform_noise_floor(20_000, 10.0);
    assert!(floor > 0.0 && floor < 0.02);
}

#[test]
fn counting_bound_is_consistent() {
    let vacuous = counting_lower_bound(3, &BigInt::from(1), 0.25, None);
    assert!(vacuous.rows.is_empty() && vacuous.consistent);
    let g = families::torus(3).unwrap();
    let m = model(&g);
    let ev = exact_evolution(&m, 10, &uniform(&g), BUDGET).unwrap();
    let tv: Vec<f64> = ev.curve.tv.iter().map(|x| x.unwrap()).collect();
    let rep = counting_lower_bound(g.n(), m.order(), 0.25, Some(&tv));
    assert!(rep.consistent);
    for row in &rep.rows {
        assert!(row.exact_tv.unwrap() >= row.support_bound - 1e-12);
    }
}

#[test]
fn kn_statistic_moments_match_the_chain() {
    for n in [5usize, 6] {
        let g = families::complete(n).unwrap();
        let chain = Chain::new(&g);
        let phi: Vec<f64> = chain.states.iter().map(|c| kn_phi(n, &c.chips)).collect();
        let var_u = phi.iter().map(|x| x * x).sum::<f64>() / phi.len() as f64;
        assert!(phi.iter().sum::<f64>().abs() < 1e-9);
        for (t, p) in chain.run(n, 30).iter().enumerate().step_by(3) {
            let mean: f64 = p.iter().zip(&phi).map(|(a, b)| a * b).sum();
            let second: f64 = p.iter().zip(&phi).map(|(a, b)| a * b * b).sum();
            let st = kn_distinguishing_statistic(n, t as f64).unwrap();
            assert!((mean - st.lambda1.powi(t as i32)).abs() < 1e-12, "n={n} t={t}");
            let var = second - mean * mean + var_u;
            let from_r = 2.0 * st.lambda1.powi(2 * t as i32) / st.r_exact;
            assert!((var - from_r).abs() < 1e-12, "n={n} t={t}: {var} vs {from_r}");
        }
    }
    let st = kn_distinguishing_statistic(7, 0.0).unwrap();
    assert!((st.r - 2.0 / (6.0 / 49.0 + 5.0 / 7.0)).abs() < 1e-14);
    assert!(kn_distinguishing_statistic(3, 1.0).is_err());
}

#[test]
fn cutoff_report_on_small_complete_graph() {
    let rep = cutoff_report(5, 1.25, true).unwrap();
    assert!(rep.t_low < 0.0 && rep.tv_at_low.is_none());
    assert_eq!(rep.high_ok, Some(true));
    let g = families::complete(5).unwrap();
    let ev = exact_evolution(&model(&g), 0, &uniform(&g), BUDGET).unwrap();
    assert!((ev.curve.tv[0].unwrap() - (1.0 - 1.0 / 125.0)).abs() < 1e-15);
    assert!(cutoff_report(2, 1.0, false).is_err());
}

#[test]
fn curve_csv_and_thresholds() {
    let g = families::complete(4).unwrap();
    let ev = exact_evolution(&model(&g), 6, &uniform(&g), BUDGET).unwrap();
    let csv = ev.curve.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,l2sq,tv,mode");
    assert_eq!(lines.len(), 8);
    assert!(lines[1].starts_with("0,") && lines[1].ends_with(",exact-evolution"));
    let t = ev.curve.t_l2(0.5).unwrap();
    let k = t as usize;
    assert!(ev.curve.l2sq[k].unwrap() <= 0.5 && ev.curve.l2sq[k - 1].unwrap() > 0.5);
    assert_eq!(ev.curve.t_mix(-1.0), None);
}

#[test]
fn kahan_beats_naive_summation() {
    let xs: Vec<f64> = std::iter::once(1.0).chain(std::iter::repeat(1e-16).take(1_000_000)).collect();
    let k: Kahan = xs.iter().copied().collect();
    assert!((k.value() - (1.0 + 1e-10)).abs() < 1e-15);
    let naive: f64 = xs.iter().sum();
    assert!((naive - (1.0 + 1e-10)).abs() > 1e-11);
    let mut a: Kahan = xs[..500_000].iter().copied().collect();
    let b: Kahan = xs[500_000..].iter().copied().collect();
    a.merge(&b);
    assert!((a.value() - (1.0 + 1e-10)).abs() < 1e-15);
}

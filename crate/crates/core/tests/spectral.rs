use std::f64::consts::PI;

use num_traits::ToPrimitive;
use proptest::prelude::*;
use sandlab::characters::CharacterTable;
use sandlab::families::{self, from_spec};
use sandlab::graph::Graph;
use sandlab::linalg::{pseudoinverse, rational_inverse};
use sandlab::sandpile::{GroupModel, VertexDistribution};
use sandlab::spectral::{
    continuous_f, cos_bound_constant, gap_lower_bound, lambda_k_bound, last_successive_minimum, primal_basis,
    shell_tail_bound, shortest_from_gram, smoothing_continuous, smoothing_discrete, smoothing_from_dual_basis,
    spectral_summary, theta, LatticeKind, SpectralSummary,
};

const BUDGET: usize = 2_000_000;

fn table(g: &Graph) -> CharacterTable {
    CharacterTable::new(&GroupModel::new(g).unwrap(), 10_000_000).unwrap()
}

fn summary(g: &Graph) -> SpectralSummary {
    let eigs = table(g).spectrum(&VertexDistribution::uniform(g.n()));
    spectral_summary(&eigs, false).unwrap()
}

fn direct_theta(a: f64, s: f64) -> f64 {
    (-400..=400).map(|k| (-PI * s * s * (a + k as f64).powi(2)).exp()).sum()
}

/// `Σ_{y ≠ 0} e^{−πs²‖y‖²}` over integer combinations of the rows with coefficients in `[−r, r]`.
fn box_sum(basis: &[Vec<f64>], s: f64, r: i64) -> f64 {
    let k = basis.len();
    let dim = basis[0].len();
    let side = (2 * r + 1) as usize;
    let mut total = 0.0;
    for code in 0..side.pow(k as u32) {
        let mut c = code;
        let mut y = vec![0.0; dim];
        let mut zero = true;
        for b in basis {
            let coef = (c % side) as i64 - r;
            c /= side;
            zero &= coef == 0;
            for (yi, bi) in y.iter_mut().zip(b) {
                *yi += coef as f64 * bi;
            }
        }
        if !zero {
            total += (-PI * s * s * y.iter().map(|x| x * x).sum::<f64>()).exp();
        }
    }
    total
}

fn continuous_dual_basis(g: &Graph) -> Vec<Vec<f64>> {
    rational_inverse(&g.reduced_laplacian()).unwrap().to_rows().iter()
        .map(|r| r.iter().map(|q| q.to_f64().unwrap()).collect())
        .collect()
}

fn discrete_dual_basis(g: &Graph) -> Vec<Vec<f64>> {
    let p = pseudoinverse(&g.full_laplacian()).unwrap().pinv;
    let n = g.n();
    (0..n - 1)
        .map(|i| (0..n).map(|r| (&p[(r, i)] - &p[(r, n - 1)]).to_f64().unwrap()).collect())
        .collect()
}

#[test]
fn theta_matches_direct_summation_and_symmetries() {
    for &s in &[0.2, 0.5, 0.9, 1.0, 1.3, 2.5, 7.0] {
        for &a in &[0.0, 0.1, 0.25, 0.5, 0.77] {
            let want = direct_theta(a, s);
            assert!((theta(a, s) - want).abs() < 1e-13 * want, "a={a} s={s}");
            assert!((theta(-a, s) - theta(a, s)).abs() < 1e-13 * want);
            assert!((theta(a + 3.0, s) - theta(a, s)).abs() < 1e-12 * want);
        }
    }
    assert_eq!(theta(0.3, 1e4), 0.0);
    assert!((theta(0.0, 1e4) - 1.0).abs() < 1e-15);
}

#[test]
fn one_dimensional_lattice_has_closed_form() {
    for &eps in &[0.5, 0.1, 0.01, 1e-4] {
        let r = smoothing_from_dual_basis(&[vec![0.5]], eps, BUDGET).unwrap();
        assert!((theta(0.0, r.eta / 2.0) - 1.0 - eps).abs() < 1e-5 * eps, "eps={eps}");
    }
}

#[test]
fn continuous_smoothing_agrees_with_enumeration() {
    for spec in ["cycle:4", "complete:4", "tail:2", "bipartite:2,3", "petersen"] {
        let g = from_spec(spec).unwrap();
        let theta_route = smoothing_continuous(&table(&g), 0.1).unwrap();
        let enum_route = smoothing_from_dual_basis(&continuous_dual_basis(&g), 0.1, BUDGET).unwrap();
        assert!((theta_route.eta / enum_route.eta - 1.0).abs() < 1e-5, "{spec}");
        assert!((theta_route.f_at_eta - 0.1).abs() < 1e-5);
    }
}

#[test]
fn smoothing_parameters_hit_epsilon_on_a_box() {
    for spec in ["cycle:3", "cycle:4", "complete:4", "tail:1"] {
        let g = from_spec(spec).unwrap();
        let eps = 0.1;
        let c = smoothing_continuous(&table(&g), eps).unwrap();
        let f = box_sum(&continuous_dual_basis(&g), c.eta, 8);
        assert!((f - eps).abs() < 1e-5, "{spec} continuous f={f}");
        let d = smoothing_discrete(&g, eps, BUDGET).unwrap();
        assert_eq!(d.lattice, LatticeKind::Discrete);
        let f = box_sum(&discrete_dual_basis(&g), d.eta, 8);
        assert!((f - eps).abs() < 1e-5, "{spec} discrete f={f}");
    }
}

#[test]
fn continuous_f_decreases() {
    for spec in ["cycle:5", "tail:3", "sierpinski:1"] {
        let t = table(&from_spec(spec).unwrap());
        let mut prev = f64::INFINITY;
        for i in 1..40 {
            let v = continuous_f(&t, 0.25 * i as f64);
            assert!(v <= prev && v >= 0.0, "{spec}");
            prev = v;
        }
    }
}

#[test]
fn smoothing_below_successive_minimum_bound() {
    for spec in ["cycle:5", "complete:5", "tail:3", "petersen", "bipartite:2,4", "torus:3"] {
        let g = from_spec(spec).unwrap();
        for (kind, eta) in [
            (LatticeKind::Continuous, smoothing_continuous(&table(&g), 0.1).unwrap().eta),
            (LatticeKind::Discrete, smoothing_discrete(&g, 0.1, BUDGET).unwrap().eta),
        ] {
            let basis = primal_basis(&g, kind);
            let lk = last_successive_minimum(&basis, BUDGET).unwrap();
            let longest = basis.iter().map(|b| (b.iter().map(|x| x * x).sum::<i64>() as f64).sqrt()).fold(0.0, f64::max);
            assert!(lk <= longest + 1e-9);
            assert!(eta <= lambda_k_bound(lk, basis.len(), 0.1), "{spec} {kind:?}");
        }
    }
    assert!((last_successive_minimum(&[vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 3]], BUDGET).unwrap() - 3.0).abs() < 1e-12);
    assert!((last_successive_minimum(&[vec![1, 0], vec![7, 1]], BUDGET).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn shortest_vectors_of_known_lattices() {
    let (len, count) = shortest_from_gram(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    assert!((len - 1.0).abs() < 1e-12);
    assert_eq!(count, 4);
    let (len, count) = shortest_from_gram(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
    assert!((len - 1.0).abs() < 1e-12);
    assert_eq!(count, 6);
}

#[test]
fn shell_tail_bound_dominates_integer_tail() {
    for &s in &[0.5, 1.0, 2.0] {
        for &r0 in &[1.5, 3.0, 5.0] {
            let tail: f64 = (1..200)
                .map(|k| k as f64)
                .filter(|&k| k > r0)
                .map(|k| 2.0 * (-PI * s * s * k * k).exp())
                .sum();
            assert!(shell_tail_bound(s, r0, 1.0, 1) >= tail);
        }
    }
}

#[test]
fn cos_bound_constant_examples() {
    let cases = [(PI, 2.0 / (PI * PI)), (PI / 2.0, 4.0 / (PI * PI)), (2.0 * PI / 3.0, 27.0 / (8.0 * PI * PI))];
    for (r, want) in cases {
        let c = cos_bound_constant(r).unwrap();
        assert!((c - want).abs() < 1e-15);
        for i in 0..=1000 {
            let x = r * (i as f64 / 500.0 - 1.0);
            assert!(x.cos() <= 1.0 - c * x * x + 1e-15);
        }
    }
    assert!(cos_bound_constant(0.0).is_err());
    assert!(cos_bound_constant(7.0).is_err());
}

#[test]
fn summaries_of_families() {
    for n in 3..12 {
        let s = summary(&families::cycle(n).unwrap());
        assert_eq!((s.gamma_d, s.gamma_c), (1.0, 1.0));
    }
    for n in 3..8 {
        let s = summary(&families::complete(n).unwrap());
        let want = 2.0 / n as f64 * (1.0 - (2.0 * PI / n as f64).cos());
        assert!((s.gamma_d - want).abs() < 1e-14);
        assert!((s.gamma_c - want).abs() < 1e-14);
        assert!((s.t_rel - 1.0 / want).abs() < 1e-9 / want);
    }
    for m in 1..6 {
        let g = from_spec(&format!("tail:{m}:sink=u")).unwrap();
        let n = g.n() as f64;
        let s = summary(&g);
        assert!((s.gamma_d - 3.0 / n).abs() < 1e-14);
        assert!((s.gamma_c - (1.0 + 0.5 * (1.0 - 3.0 / n))).abs() < 1e-14);
    }
    let tree = families::path(4).unwrap();
    let eigs = table(&tree).spectrum(&VertexDistribution::uniform(4));
    assert!(spectral_summary(&eigs, false).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gaps_are_ordered_and_sink_free(seed in any::<u64>(), sink in 0usize..7) {
        let g = families::erdos_renyi(7, 0.5, seed).unwrap();
        prop_assume!(!g.is_tree());
        let s = summary(&g);
        let nf = g.n() as f64;
        prop_assert!(s.gamma_d <= s.gamma_c + 1e-12);
        prop_assert!(s.gamma_c <= nf * s.gamma_d + 1e-12);
        prop_assert!(s.gamma_d >= gap_lower_bound(g.n(), g.degree_stats().star) - 1e-12);
        let moved = summary(&g.with_sink(sink).unwrap());
        prop_assert!((moved.gamma_d - s.gamma_d).abs() < 1e-12);
    }
}

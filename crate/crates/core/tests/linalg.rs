use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use sandlab::families;
use sandlab::linalg::{
    cvp_wn, cvp_wn_scaled, determinant, invariant_factors, pseudoinverse, random_walk_eigenvalues,
    rational_inverse, smith_normal_form, symmetric_eigenvalues, Matrix,
};

fn big(rows: Vec<Vec<i64>>) -> Matrix<BigInt> {
    Matrix::from_rows(rows).to_big()
}

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Laplace expansion along the first row.
fn cofactor_det(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x).collect())
                .collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            sign * m[0][j] as i128 * cofactor_det(&minor)
        })
        .sum()
}

fn small_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-6i64..=6, n), n)
}

#[test]
fn smith_of_cycle_and_complete() {
    let c4 = families::cycle(4).unwrap().full_laplacian().to_big();
    let want: Vec<BigInt> = [1, 1, 4, 0].iter().map(|&x| BigInt::from(x)).collect();
    assert_eq!(invariant_factors(&c4), want);
    let k4 = families::complete(4).unwrap().reduced_laplacian().to_big();
    let want: Vec<BigInt> = [1, 4, 4].iter().map(|&x| BigInt::from(x)).collect();
    assert_eq!(invariant_factors(&k4), want);
    let c4r = families::cycle(4).unwrap().reduced_laplacian().to_big();
    let want: Vec<BigInt> = [1, 1, 4].iter().map(|&x| BigInt::from(x)).collect();
    assert_eq!(invariant_factors(&c4r), want);
}

#[test]
fn smith_of_rectangular_and_zero() {
    let a = big(vec![vec![2, 4, 4], vec![-6, 6, 12]]);
    let d = smith_normal_form(&a);
    assert_eq!(d.diagonal, vec![BigInt::from(2), BigInt::from(6)]);
    assert_eq!(d.u.mul(&a).mul(&d.v), Matrix::from_fn(2, 3, |i, j| if i == j { d.diagonal[i].clone() } else { BigInt::zero() }));
    let z = big(vec![vec![0, 0], vec![0, 0]]);
    assert!(invariant_factors(&z).iter().all(Zero::is_zero));
}

#[test]
fn determinant_examples() {
    assert_eq!(determinant(&big(vec![vec![0, 1], vec![1, 0]])), BigInt::from(-1));
    assert_eq!(determinant(&big(vec![vec![2, -1], vec![-1, 2]])), BigInt::from(3));
    assert_eq!(determinant(&big(vec![vec![1, 2], vec![2, 4]])), BigInt::zero());
}

#[test]
fn inverse_of_reduced_triangle_laplacian() {
    let inv = rational_inverse(&families::cycle(3).unwrap().reduced_laplacian()).unwrap();
    assert_eq!(inv.to_rows(), vec![vec![q(2, 3), q(1, 3)], vec![q(1, 3), q(2, 3)]]);
    assert!(rational_inverse(&Matrix::from_rows(vec![vec![1, 1], vec![1, 1]])).is_err());
}

#[test]
fn pseudoinverse_of_single_edge() {
    let b = pseudoinverse(&families::path(2).unwrap().full_laplacian()).unwrap();
    assert_eq!(b.pinv.to_rows(), vec![vec![q(1, 4), q(-1, 4)], vec![q(-1, 4), q(1, 4)]]);
    assert!(pseudoinverse(&Matrix::from_rows(vec![vec![1, 0], vec![0, 1]])).is_err());
}

#[test]
fn pseudoinverse_identities() {
    for spec in ["cycle:5", "petersen", "tail:3", "bipartite:2,4", "sierpinski:1"] {
        let l = families::from_spec(spec).unwrap().full_laplacian().to_rational();
        let b = pseudoinverse(&families::from_spec(spec).unwrap().full_laplacian()).unwrap();
        assert_eq!(l.mul(&b.pinv), b.projector, "{spec}");
        assert_eq!(b.pinv.mul(&l), b.projector, "{spec}");
        assert_eq!(b.pinv.mul(&l).mul(&b.pinv), b.pinv, "{spec}");
        for i in 0..l.rows() {
            assert!(b.pinv.row(i).iter().sum::<BigRational>().is_zero());
        }
    }
}

#[test]
fn laplacian_spectra() {
    let c4 = symmetric_eigenvalues(&families::cycle(4).unwrap().full_laplacian().to_f64()).unwrap();
    for (got, want) in c4.iter().zip([0.0, 2.0, 2.0, 4.0]) {
        assert!((got - want).abs() < 1e-12);
    }
    for n in 2..9 {
        let e = symmetric_eigenvalues(&families::complete(n).unwrap().full_laplacian().to_f64()).unwrap();
        assert!(e[0].abs() < 1e-12);
        assert!(e[1..].iter().all(|x| (x - n as f64).abs() < 1e-10));
    }
    let rw = random_walk_eigenvalues(&families::cycle(6).unwrap().full_laplacian()).unwrap();
    let mut want: Vec<f64> = (0..6).map(|k| 1.0 - (2.0 * std::f64::consts::PI * k as f64 / 6.0).cos()).collect();
    want.sort_by(f64::total_cmp);
    for (g, w) in rw.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12);
    }
    assert!(symmetric_eigenvalues(&Matrix::from_rows(vec![vec![1.0, 2.0], vec![0.0, 1.0]])).is_err());
}

#[test]
fn reduced_spectrum_interlaces_and_multiplies_to_tree_count() {
    for seed in 0..20 {
        let g = families::erdos_renyi(8, 0.5, seed).unwrap();
        let full = symmetric_eigenvalues(&g.full_laplacian().to_f64()).unwrap();
        let red = symmetric_eigenvalues(&g.reduced_laplacian().to_f64()).unwrap();
        for i in 0..red.len() {
            assert!(full[i] <= red[i] + 1e-9 && red[i] <= full[i + 1] + 1e-9);
        }
        let prod: f64 = red.iter().product();
        let trees: f64 = g.spanning_tree_count().to_string().parse().unwrap();
        assert!((prod - trees).abs() < 1e-8 * trees);
    }
}

#[test]
fn cvp_examples() {
    let x = vec![q(1, 3), q(1, 3), q(-2, 3)];
    let p = cvp_wn(&x).unwrap();
    assert_eq!(p.iter().sum::<BigRational>(), BigRational::zero());
    let d2: BigRational = x.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum();
    assert_eq!(d2, BigRational::zero());
    assert!(cvp_wn(&[q(1, 2), q(1, 2)]).is_err());
    assert_eq!(cvp_wn_scaled(&[1, -1], 2).dist_scaled, 0);
    let r = cvp_wn_scaled(&[1, 0, -1], 4);
    assert_eq!(r.dist_scaled, 6);
}

/// Exhaustive search over integer preimages near `a / d`.
fn cvp_bruteforce(a: &[i128], d: i128) -> i128 {
    let n = a.len();
    let base: Vec<i128> = a.iter().map(|x| x.div_euclid(d)).collect();
    let mut best = i128::MAX;
    let total = 4usize.pow(n as u32 - 1);
    for code in 0..total {
        let mut z = base.clone();
        let mut c = code;
        for zi in z.iter_mut().skip(1) {
            *zi += (c % 4) as i128 - 1;
            c /= 4;
        }
        let r: Vec<i128> = a.iter().zip(&z).map(|(&ai, &zi)| ai - d * zi).collect();
        let s: i128 = r.iter().sum();
        let ss: i128 = r.iter().map(|x| x * x).sum();
        best = best.min(n as i128 * ss - s * s);
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smith_invariants(m in (1usize..=4).prop_flat_map(small_matrix)) {
        let a = big(m.clone());
        let d = smith_normal_form(&a);
        prop_assert_eq!(d.u.mul(&a).mul(&d.v), d.s());
        prop_assert_eq!(determinant(&d.u).abs(), BigInt::one());
        prop_assert_eq!(determinant(&d.v).abs(), BigInt::one());
        for w in d.diagonal.windows(2) {
            prop_assert!(!w[0].is_negative());
            if w[0].is_zero() {
                prop_assert!(w[1].is_zero());
            } else {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
        }
        let prod: BigInt = d.diagonal.iter().product();
        prop_assert_eq!(prod, BigInt::from(cofactor_det(&m).abs()));
        prop_assert_eq!(invariant_factors(&a), d.diagonal.clone());
    }

    #[test]
    fn determinant_matches_cofactor_expansion(m in (1usize..=5).prop_flat_map(small_matrix)) {
        prop_assert_eq!(determinant(&big(m.clone())), BigInt::from(cofactor_det(&m)));
    }

    #[test]
    fn group_order_is_tree_count(n in 3usize..=7, seed in any::<u64>()) {
        let g = families::erdos_renyi(n, 0.5, seed).unwrap();
        let prod: BigInt = invariant_factors(&g.reduced_laplacian().to_big()).iter().product();
        prop_assert_eq!(prod, g.spanning_tree_count());
    }

    #[test]
    fn cvp_is_closest(raw in prop::collection::vec(-40i128..=40, 2..=4), d in 1i128..=7) {
        let mut a = raw;
        let s: i128 = a.iter().sum();
        let last = a.len() - 1;
        a[last] -= s;
        let got = cvp_wn_scaled(&a, d);
        let r: Vec<i128> = a.iter().zip(&got.z).map(|(&ai, &zi)| ai - d * zi).collect();
        let sum: i128 = r.iter().sum();
        let ss: i128 = r.iter().map(|x| x * x).sum();
        prop_assert_eq!(got.dist_scaled, a.len() as i128 * ss - sum * sum);
        prop_assert_eq!(got.dist_scaled, cvp_bruteforce(&a, d));
    }
}

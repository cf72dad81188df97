//! The verification suite: numeric checks of every stated bound and identity on a corpus.

use std::collections::{HashMap, HashSet, VecDeque};
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::Profile;
use crate::characters::{
    bipartite_two_orbits, complete_graph_orbits, unit, DEFAULT_ENUM_BUDGET,
};
use crate::corpus::{self, CorpusEntry};
use crate::families;
use crate::graph::Graph;
use crate::linalg::{cvp_wn_scaled, determinant};
use crate::mixing::{
    counting_lower_bound, cutoff_report, exact_evolution, exact_l2_curve, kn_distinguishing_statistic,
    sparse_evolution, table1_bruteforce, table1_formula, ChainTime, DEFAULT_EVOLUTION_BUDGET,
};
use crate::sandpile::{Configuration, FiringPolicy, GroupModel, Sandpile, VertexDistribution};
use crate::spectral::{
    d_star_time, gap_lower_bound, gap_sandwich_check, inverse_relationship_check, ln_big,
    smoothing_continuous, smoothing_discrete, smoothing_time, DEFAULT_POINT_BUDGET,
};
use crate::Error;

/// Numeric tolerances and parameters of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub cycle_tv: f64,
    pub sandwich: f64,
    /// Slack allowed on bounds that hold with equality in the limit.
    pub gap: f64,
    pub degree_sandwich: f64,
    pub kn_ratio: f64,
    pub smoothing_epsilon: f64,
    pub smoothing_max_order: u64,
    pub d_star_epsilon: f64,
    pub cutoff_c: f64,
    pub catalan: f64,
    pub catalan_window: f64,
    pub spectrum: f64,
    pub rooted: f64,
    pub property: f64,
    pub property_max_order: u64,
    pub burning_max_states: u128,
    pub abelian_cases: usize,
    pub cvp_cases: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            cycle_tv: 1e-12,
            sandwich: 1e-9,
            gap: 1e-12,
            degree_sandwich: 1e-8,
            kn_ratio: 1.2,
            smoothing_epsilon: 0.1,
            smoothing_max_order: 100_000,
            d_star_epsilon: 0.1,
            cutoff_c: 1.25,
            catalan: 1.1662,
            catalan_window: 0.02,
            spectrum: 1e-12,
            rooted: 1e-9,
            property: 1e-9,
            property_max_order: 2_000,
            burning_max_states: 5_000,
            abelian_cases: 200,
            cvp_cases: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Smallest slack seen, for checks that have one.
    pub worst_slack: Option<f64>,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl CheckResult {
    fn new(id: usize, name: &'static str) -> Self {
        CheckResult {
            id,
            name,
            passed: true,
            cases: 0,
            worst_slack: None,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn case(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.passed = false;
            if self.failures.len() < 50 {
                self.failures.push(what());
            }
        }
    }

    fn slack(&mut self, s: f64) {
        self.worst_slack = Some(self.worst_slack.map_or(s, |w| w.min(s)));
    }

    fn error(&mut self, what: &str, e: &Error) {
        self.case(false, || format!("{what}: {e}"));
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    /// One summary line.
    pub fn line(&self) -> String {
        let slack = self.worst_slack.map(|s| format!(" worst_slack={s:.3e}")).unwrap_or_default();
        format!(
            "[{}] {:>2} {:<22} cases={}{}{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.cases,
            slack,
            self.failures.first().map(|f| format!(" first_failure: {f}")).unwrap_or_default()
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub random_graphs: usize,
    pub tolerances: Tolerances,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Check names in run order.
pub const CHECKS: [&str; 14] = [
    "cycle_instant",
    "group_structure",
    "gap_sandwich",
    "gap_lower_bound",
    "inverse_relationship",
    "smoothing_bound",
    "d_star_bound",
    "kn_cutoff",
    "table1",
    "torus",
    "triangle_tail",
    "rooted_sums",
    "sierpinski",
    "properties",
];

/// Corpus with lazily built spectral profiles.
pub struct Context {
    pub seed: u64,
    pub random_graphs: usize,
    pub tol: Tolerances,
    pub corpus: Vec<CorpusEntry>,
    profiles: Vec<OnceLock<Result<Profile, Error>>>,
}

impl Context {
    pub fn new(seed: u64, random_graphs: usize, tol: Tolerances) -> Result<Self, Error> {
        let corpus = corpus::full(seed, random_graphs)?;
        let profiles = corpus.iter().map(|_| OnceLock::new()).collect();
        Ok(Context {
            seed,
            random_graphs,
            tol,
            corpus,
            profiles,
        })
    }

    pub fn profile(&self, i: usize) -> Result<&Profile, Error> {
        self.profiles[i]
            .get_or_init(|| Profile::new(&self.corpus[i].graph, DEFAULT_ENUM_BUDGET))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Runs one check by name.
    pub fn run(&self, name: &str) -> Option<CheckResult> {
        let id = CHECKS.iter().position(|&c| c == name)? + 1;
        Some(match id {
            1 => cycle_instant(self),
            2 => group_structure(self),
            3 => gap_sandwich(self),
            4 => gap_lower(self),
            5 => inverse_relationship(self),
            6 => smoothing_bound(self),
            7 => d_star_bound(self),
            8 => kn_cutoff(self),
            9 => table1(self),
            10 => torus(self),
            11 => triangle_tail(self),
            12 => rooted_sums(self),
            13 => sierpinski(self),
            _ => properties(self),
        })
    }
}

/// Runs the named checks (all when `only` is empty), calling `progress` after each.
pub fn run_checks(
    ctx: &Context,
    only: &[String],
    mut progress: impl FnMut(&CheckResult),
) -> Result<VerifyReport, String> {
    for name in only {
        if !CHECKS.contains(&name.as_str()) {
            return Err(format!("unknown check {name:?}; known: {}", CHECKS.join(", ")));
        }
    }
    let mut checks = Vec::new();
    for name in CHECKS {
        if only.is_empty() || only.iter().any(|o| o == name) {
            let r = ctx.run(name).expect("known check");
            progress(&r);
            checks.push(r);
        }
    }
    Ok(VerifyReport {
        seed: ctx.seed,
        random_graphs: ctx.random_graphs,
        tolerances: ctx.tol,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn uniform_l2_at(p: &Profile, t: f64, chain: ChainTime) -> Result<f64, Error> {
    let curve = exact_l2_curve(&p.eigs, p.model.order(), &[t], chain)?;
    Ok(curve.l2sq[0].unwrap_or(f64::NAN))
}

pub fn cycle_instant(ctx: &Context) -> CheckResult {
    let mut r = CheckResult::new(1, CHECKS[0]);
    for n in 3..=12 {
        let run = || -> Result<(f64, f64), Error> {
            let g = families::cycle(n)?;
            let model = GroupModel::new(&g)?;
            let ev = exact_evolution(&model, 1, &VertexDistribution::uniform(n), DEFAULT_EVOLUTION_BUDGET)?;
            let p = Profile::new(&g, DEFAULT_ENUM_BUDGET)?;
            Ok((ev.curve.tv[1].unwrap_or(f64::NAN), uniform_l2_at(&p, 1.0, ChainTime::Discrete)?))
        };
        match run() {
            Ok((tv, l2)) => {
                r.slack(ctx.tol.cycle_tv - tv.abs());
                r.case(tv.abs() <= ctx.tol.cycle_tv, || format!("cycle:{n} TV(1) = {tv:e}"));
                r.case(l2 == 0.0, || format!("cycle:{n} L2(1) = {l2:e}"));
            }
            Err(e) => r.error(&format!("cycle:{n}"), &e),
        }
    }
    r
}

fn nontrivial_factors(g: &Graph) -> Result<Vec<BigInt>, Error> {
    let model = GroupModel::new(g)?;
    Ok(model.invariant_factors().iter().filter(|d| !d.is_one()).cloned().collect())
}

pub fn group_structure(ctx: &Context) -> CheckResult {
    let mut r = CheckResult::new(2, CHECKS[1]);
    let run = |r: &mut CheckResult| -> Result<(), Error> {
        for n in 3..=12 {
            let f = nontrivial_factors(&families::cycle(n)?)?;
            r.case(f == vec![BigInt::from(n)], || format!("cycle:{n} factors {f:?}"));
        }
        for n in 2..=8 {
            let f = nontrivial_factors(&families::complete(n)?)?;
            let want = vec![BigInt::from(n); n - 2];
            r.case(f == want, || format!("complete:{n} factors {f:?}"));
        }
        for m in 1..=6usize {
            for n in 1..=6usize {
                if m + n < 2 {
                    continue;
                }
                let model = GroupModel::new(&families::complete_bipartite(m, n)?)?;
                let want = BigInt::from(n).pow(m as u32 - 1) * BigInt::from(m).pow(n as u32 - 1);
                r.case(*model.order() == want, || {
                    format!("bipartite:{m},{n} order {} != {want}", model.order())
                });
            }
        }
        for e in corpus::random(ctx.seed, ctx.random_graphs)? {
            let model = GroupModel::new(&e.graph)?;
            let product: BigInt = model.invariant_factors().iter().product();
            let kirchhoff = determinant(&e.graph.reduced_laplacian().to_big());
            let trees = e.graph.spanning_tree_count();
            r.case(product == kirchhoff && product == trees, || {
                format!("{}: product {product}, determinant {kirchhoff}, trees {trees}", e.name)
            });
        }
        Ok(())
    };
    if let Err(e) = run(&mut r) {
        r.error("setup", &e);
    }
    r
}

pub fn gap_sandwich(ctx: &Context) -> CheckResult {
    let mut r = CheckResult::new(3, CHECKS[2]);
    let mut characters = 0usize;
    for (i, e) in ctx.corpus.iter().enumerate() {
        let res = ctx.profile(i).and_then(|p| Ok((p, p.vectors()?)));
        match res {
            Ok((_, None)) => r.case(true, String::new),
            Ok((p, Some(v))) => {
                let rep = gap_sandwich_check(&p.eigs, &v, e.graph.n(), ctx.tol.sandwich);
                characters += rep.characters;
                r.slack(rep.worst_slack);
                r.case(rep.violations.is_empty(), || {
                    format!("{}: {} violations, worst slack {:e}", e.name, rep.violations.len(), rep.worst_slack)
                });
            }
            Err(err) => r.error(&e.name, &err),
        }
    }
    r.note(format!("{characters} characters checked"));
    r
}

pub fn gap_lower(ctx: &Context) -> CheckResult {
    let mut r = CheckResult::new(4, CHECKS[3]);
    for (i, e) in ctx.corpus.iter().enumerate() {
        match ctx.profile(i) {
            Ok(p) => {
                if let Some(s) = p.summary {
                    let bound = gap_lower_bound(e.graph.n(), e.graph.degree_stats().star);
                    r.slack(s.gamma_d - bound);
                    r.case(s.gamma_d >= bound - ctx.tol.gap, || {
                        format!("{}: gamma_d {:e} < {bound:e}", e.name, s.gamma_d)
                    });
                }
            }
            Err(err) => r.error(&e.name, &err),
        }
    }
    let mut worst_ratio = 0.0f64;
    for m in 3..=30usize {
        let n = (m + 2) as f64;
        let lambda_star = bipartite_two_orbits(m)
            .iter()
            .filter(|o| !o.trivial)
            .map(|o| o.lambda.norm())
            .fold(0.0, f64::max);
        let gamma = 1.0 - lambda_star;
        let (lo, hi) = (27.0 / n.powi(3), 4.0 * PI * PI / n.powi(3));
        let closed = 2.0 / n * (1.0 - (2.0 * PI / (n - 2.0)).cos());
        worst_ratio = worst_ratio.max(gamma / hi);
        r.slack((gamma - lo).min(hi - gamma));
        r.case((gamma - closed).abs() <= 1e-12, || {
            format!("bipartite:2,{m}: gamma_d {gamma:e} differs from (2/n)(1-cos(2pi/(n-2))) = {closed:e}")
        });
        r.case(gamma >= lo - ctx.tol.gap && gamma <= hi + ctx.tol.gap, || {
            format!("bipartite:2,{m}: gamma_d {gamma:.6e} outside [27/n^3, 4pi^2/n^3] = [{lo:.6e}, {hi:.6e}]")
        });
    }
    r.note(format!(
        "K_2,m: gamma_d = (2/n)(1-cos(2pi/(n-2))) ~ 4pi^2/(n(n-2)^2), which exceeds 4pi^2/n^3 by up to a factor {worst_ratio:.4}"
    ));
    r
}

pub fn inverse_relationship(ctx: &Context) -> CheckResult {
    let mut r = CheckResult::new(5, CHECKS[4]);
    let mut extra = 0;
    for (i, e) in ctx.corpus.iter().enumerate() {
        let run = || -> Result<_, Error> {
            let p = ctx.profile(i)?;
            Ok(match p.summary {
                Some(s) => Some(inverse_relationship_check(
                    &s,
                    &p.beta()?,
                    &p.theta()?,
                    e.graph.degree_stats(),
                    e.graph.n(),
                    ctx.tol.degree_sandwich,
                )),
                None => None,
            })
        };
        match run() {
            Ok(Some(rep)) => {
                r.slack(rep.discrete.slack);
                r.case(rep.discrete.slack >= -ctx.tol.gap, || {
                    format!("{}: gamma_d {:e} > {:e}", e.name, rep.discrete.value, rep.discrete.bound)
                });
                r.case(rep.degree_sandwich_slack >= -ctx.tol.degree_sandwich, || {
                    format!("{}: degree sandwich slack {:e}", e.name, rep.degree_sandwich_slack)
                });
                if let Some(c) = &rep.continuous_unproved {
                    if c.slack < 0.0 {
                        extra += 1;
                    }
                }
            }
            Ok(None) => r.case(true, String::new),
            Err(err) => r.error(&e.name, &err),
        }
    }
    r.note(format!("gamma_c <= 10pi^2/(beta1^2 n) fails on {extra} graphs (informational)"));
    for n in 8..=12usize {
        let nf = n as f64;
        let gamma = 1.0
            - complete_graph_orbits(n)
                .iter()
                .filter(|o| !o.trivial)
                .map(|o| o.lambda.norm())
                .fold(0.0, f64::max);
        let bound = 4.0 * PI * PI / (nf * nf * nf);
        let ratio = bound / gamma;
        r.case(ratio >= 1.0 && ratio <= ctx.tol.kn_ratio, || {
            format!("complete:{n}: bound/gamma_d = {ratio}")
        });
        r.note(format!("complete:{n}: bound/gamma_d = {ratio:.6}"));
    }
    r
}

pub fn smoothing_bound(ctx: &Context) -> CheckResult {
    let mut r = CheckResult::new(6, CHECKS[5]);
    let eps = ctx.tol.smoothing_epsilon;
    for (i, e) in ctx.corpus.iter().enumerate() {
        let run = |r: &mut CheckResult| -> Result<(), Error> {
            let p = ctx.profile(i)?;
            if p.model.is_trivial() || p.order() > ctx.tol.smoothing_max_order {
                return Ok(());
            }
            let n = e.graph.n();
            // The Δℤ^{n−1} time covers the continuous-time chain, the Δ̄ℤⁿ time both chains.
            let cases = [
                ("continuous lattice", smoothing_continuous(&p.table, eps)?.eta, &[ChainTime::Continuous][..]),
                (
                    "discrete lattice",
                    smoothing_discrete(&e.graph, eps, DEFAULT_POINT_BUDGET)?.eta,
                    &[ChainTime::Discrete, ChainTime::Continuous][..],
                ),
            ];
            for (kind, eta, chains) in cases {
                let t = smoothing_time(n, eta).ceil();
                for &chain in chains {
                    let l2 = uniform_l2_at(p, t, chain)?;
                    r.slack(eps - l2);
                    r.case(l2 <= eps, || format!("{} ({kind}, {chain:?} time): L2({t}) = {l2:e}", e.name));
                }
            }
            Ok(())
        };
        if let Err(err) = run(&mut r) {
            r.error(&e.name, &err);
        }
    }
    r
}

pub fn d_star_bound(ctx: &Context) -> CheckResult {
    let mut r = CheckResult::new(7, CHECKS[6]);
    let eps = ctx.tol.d_star_epsilon;
    for (i, e) in ctx.corpus.iter().enumerate() {
        let run = || -> Result<Option<(f64, f64)>, Error> {
            let p = ctx.profile(i)?;
            if p.model.is_trivial() {
                return Ok(None);
            }
            let t = d_star_time(e.graph.n(), e.graph.degree_stats().star, eps).ceil();
            Ok(Some((t, uniform_l2_at(p, t, ChainTime::Discrete)?)))
        };
        match run() {
            Ok(Some((t, l2))) => {
                r.slack(eps - l2);
                r.case(l2 <= eps, || format!("{}: L2({t}) = {l2:e}", e.name));
            }
            Ok(None) => r.case(true, String::new),
            Err(err) => r.error(&e.name, &err),
        }
    }
    r
}

pub fn kn_cutoff(ctx: &Context) -> CheckResult {
    let mut r = CheckResult::new(8, CHECKS[7]);
    let c = ctx.tol.cutoff_c;
    for n in 6..=8usize {
        let run = |r: &mut CheckResult| -> Result<(), Error> {
            let rep = cutoff_report(n, c, false)?;
            let g = families::complete(n)?;
            let model = GroupModel::new(&g)?;
            let hi = rep.t_high.ceil() as u64;
            let ev = exact_evolution(&model, hi, &VertexDistribution::uniform(n), DEFAULT_EVOLUTION_BUDGET)?;
            let tv: Vec<f64> = ev.curve.tv.iter().map(|x| x.unwrap_or(f64::NAN)).collect();
            let high = tv[hi as usize];
            r.slack(rep.upper_bound - high);
            r.case(high <= rep.upper_bound, || {
                format!("complete:{n}: TV({hi}) = {high:e} > e^-c = {:e}", rep.upper_bound)
            });
            if rep.t_low >= 0.0 {
                let lo = rep.t_low.floor() as usize;
                r.case(tv[lo] >= rep.lower_bound, || {
                    format!("complete:{n}: TV({lo}) = {:e} < {:e}", tv[lo], rep.lower_bound)
                });
            } else {
                r.note(format!(
                    "complete:{n}: t_low = {:.1} < 0 at c = {c}, lower statement vacuous",
                    rep.t_low
                ));
            }
            let mut worst = f64::INFINITY;
            for (t, &exact) in tv.iter().enumerate() {
                let s = kn_distinguishing_statistic(n, t as f64)?;
                let slack = exact - s.bound.max(s.bound_exact);
                worst = worst.min(slack);
                r.case(slack >= -ctx.tol.gap, || {
                    format!("complete:{n}: Wilson bound {:e} > TV({t}) = {exact:e}", s.bound.max(s.bound_exact))
                });
            }
            r.note(format!("complete:{n}: worst Wilson slack {worst:.3e} over t = 0..={hi}"));
            for small_c in [0.01, 0.02, 0.03] {
                let t_low = crate::spectral::complete_lower_time(n, small_c);
                if t_low >= 0.0 {
                    let k = t_low.floor() as usize;
                    let want = 1.0 - (-35.0 * small_c).exp();
                    r.note(format!(
                        "complete:{n}, c = {small_c}: TV({k}) = {:.4} vs 1 - e^-35c = {want:.4}",
                        tv[k]
                    ));
                }
            }
            Ok(())
        };
        if let Err(err) = run(&mut r) {
            r.error(&format!("complete:{n}"), &err);
        }
    }
    r
}

fn grouped(entries: Vec<(Complex64, u64)>) -> Vec<(Complex64, u64)> {
    let mut out: Vec<(Complex64, u64)> = Vec::new();
    for (z, k) in entries {
        if k == 0 {
            continue;
        }
        match out.iter_mut().find(|(w, _)| (w - z).norm() < 1e-12) {
            Some(g) => g.1 += k,
            None => out.push((z, k)),
        }
    }
    out
}

pub fn table1(_ctx: &Context) -> CheckResult {
    let mut r = CheckResult::new(9, CHECKS[8]);
    for n in [5usize, 6] {
        let brute = grouped(table1_bruteforce(n));
        let formula = grouped(table1_formula(n));
        let same = brute.len() == formula.len()
            && formula
                .iter()
                .all(|(z, k)| brute.iter().any(|(w, j)| (w - z).norm() < 1e-12 && j == k));
        r.case(same && formula.len() == 6, || {
            format!("n = {n}: brute force {brute:?} vs formula {formula:?}")
        });
        let total: u64 = brute.iter().map(|g| g.1).sum();
        let want = ((n - 1) * (n - 2)) as u64;
        r.case(total == want * want, || format!("n = {n}: {total} terms"));
    }
    r
}

pub fn torus(ctx: &Context) -> CheckResult {
    let mut r = CheckResult::new(10, CHECKS[9]);
    let run = |r: &mut CheckResult| -> Result<(), Error> {
        for m in [8usize, 10, 12] {
            let model = GroupModel::new(&families::torus(m)?)?;
            let value = ln_big(model.order()) / (m * m) as f64;
            let dev = (value - ctx.tol.catalan).abs();
            r.slack(ctx.tol.catalan_window - dev);
            r.case(dev <= ctx.tol.catalan_window, || format!("torus:{m}: log|G|/m^2 = {value}"));
            r.note(format!("torus:{m}: log|G|/m^2 = {value:.6}"));
        }
        for m in [3usize, 4] {
            let g = families::torus(m)?;
            let model = GroupModel::new(&g)?;
            let n = g.n();
            let mu = VertexDistribution::uniform(n);
            for eps in [0.25, 0.5] {
                let probe = counting_lower_bound(n, model.order(), eps, None);
                let t_max = probe.t_bound.max(0.0).floor() as u64;
                let ev = if model.size().is_some_and(|s| s <= DEFAULT_EVOLUTION_BUDGET) {
                    exact_evolution(&model, t_max, &mu, DEFAULT_EVOLUTION_BUDGET)?
                } else {
                    sparse_evolution(&model, t_max, &mu, 5_000_000)?
                };
                let tv: Vec<f64> = ev.curve.tv.iter().map(|x| x.unwrap_or(f64::NAN)).collect();
                let rep = counting_lower_bound(n, model.order(), eps, Some(&tv));
                r.case(rep.consistent, || format!("torus:{m}, eps = {eps}: exact TV below 1 - eps"));
                r.note(format!(
                    "torus:{m}, eps = {eps}: t_bound = {:.3}, {} rows checked",
                    rep.t_bound,
                    rep.rows.len()
                ));
            }
        }
        Ok(())
    };
    if let Err(e) = run(&mut r) {
        r.error("torus", &e);
    }
    r
}

fn same_multiset(got: &[Complex64], want: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; got.len()];
    got.len() == want.len()
        && want.iter().all(|w| {
            match (0..got.len()).find(|&i| !used[i] && (got[i] - w).norm() <= tol) {
                Some(i) => {
                    used[i] = true;
                    true
                }
                None => false,
            }
        })
}

pub fn triangle_tail(ctx: &Context) -> CheckResult {
    let mut r = CheckResult::new(11, CHECKS[10]);
    for m in 1..=6usize {
        let run = |r: &mut CheckResult| -> Result<(), Error> {
            let g = families::triangle_with_tail(m)?;
            let n = g.n();
            let a = 1.0 - 3.0 / n as f64;
            let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
            let one = Complex64::new(1.0, 0.0);
            for (label, want) in [
                ("u", vec![one, omega * a, omega.conj() * a]),
                ("w", vec![one, one * a, one * a]),
            ] {
                let p = Profile::new(&g.with_sink(g.vertex_by_label(label)?)?, DEFAULT_ENUM_BUDGET)?;
                let got: Vec<Complex64> = p.eigs.iter().map(|e| e.lambda).collect();
                r.case(same_multiset(&got, &want, ctx.tol.spectrum), || {
                    format!("tail:{m} sink {label}: spectrum {got:?}")
                });
                if label == "u" {
                    let s = p.summary.expect("nontrivial group");
                    let ratio = s.gamma_c / s.gamma_d;
                    let want = (n as f64 - 1.0) / 2.0;
                    r.slack(ctx.tol.spectrum * want - (ratio - want).abs());
                    r.case((ratio - want).abs() <= ctx.tol.spectrum * want, || {
                        format!("tail:{m}: gamma_c/gamma_d = {ratio}, want {want}")
                    });
                }
            }
            Ok(())
        };
        if let Err(e) = run(&mut r) {
            r.error(&format!("tail:{m}"), &e);
        }
    }
    r
}

/// Eigenvalue of each character of a part, keyed by its phase vector.
fn part_spectrum(part: &Graph) -> Result<HashMap<Vec<Ratio<i64>>, (Complex64, bool)>, Error> {
    let p = Profile::new(part, DEFAULT_ENUM_BUDGET)?;
    Ok(p
        .eigs
        .iter()
        .map(|e| (p.table.character(e.index).phases(), (e.lambda, e.exact_zero)))
        .collect())
}

fn rooted_case(sizes: &[usize], tol: f64, r: &mut CheckResult) -> Result<(), Error> {
    let name = format!("rooted:path:{}/{}", sizes.len(), sizes.iter().map(|m| format!("cycle:{m}")).collect::<Vec<_>>().join("/"));
    let base = families::path(sizes.len())?;
    let parts: Vec<Graph> = sizes.iter().map(|&m| families::cycle(m)).collect::<Result<_, _>>()?;
    let g = families::rooted_sum(&base, &parts)?;
    let p = Profile::new(&g, DEFAULT_ENUM_BUDGET)?;
    let spectra: Vec<_> = parts.iter().map(part_spectrum).collect::<Result<_, _>>()?;
    let ranges = families::rooted_sum_ranges(&parts);
    let n = g.n() as f64;
    let e = p.table.exponent();
    let part_orders: u64 = spectra.iter().map(|s| s.len() as u64).product();
    r.case(part_orders == p.order(), || format!("{name}: |G| = {} vs parts {part_orders}", p.order()));
    let mut worst = 0.0f64;
    let mut exact_candidates: Vec<Ratio<i64>> = Vec::new();
    for rec in &p.eigs {
        let res = p.table.residues_at(rec.index);
        let mut lambda = Complex64::new(0.0, 0.0);
        let mut nontrivial = Vec::new();
        let mut roots_trivial = true;
        for (j, range) in ranges.iter().enumerate() {
            let root_res = res[range.start + parts[j].sink()];
            let local: Vec<Ratio<i64>> = range
                .clone()
                .map(|v| Ratio::new(((res[v] + e - root_res) % e) as i64, e as i64))
                .collect();
            let Some(&(lj, zero)) = spectra[j].get(&local) else {
                r.case(false, || format!("{name}: restriction to part {j} is not a character"));
                return Ok(());
            };
            roots_trivial &= root_res == 0;
            if local.iter().any(|q| *q != Ratio::from_integer(0)) {
                nontrivial.push((j, zero));
            }
            lambda += unit(root_res, e) * lj * (parts[j].n() as f64 / n);
        }
        worst = worst.max((lambda - rec.lambda).norm());
        if roots_trivial && nontrivial.len() == 1 && nontrivial[0].1 {
            let m = parts[nontrivial[0].0].n() as i64;
            exact_candidates.push(Ratio::new(g.n() as i64 - m, g.n() as i64));
        }
    }
    r.slack(tol - worst);
    r.case(worst <= tol, || format!("{name}: reconstruction error {worst:e}"));
    let m_min = *sizes.iter().min().unwrap() as i64;
    let want = Ratio::new(g.n() as i64 - m_min, g.n() as i64);
    let exact = exact_candidates.iter().max().copied();
    let s = p.summary.expect("cycles give a nontrivial group");
    r.case(
        exact == Some(want) && (s.lambda_star - want.to_f64().unwrap()).abs() <= 1e-12,
        || format!("{name}: lambda_* = {} (exact witness {exact:?}), want {want}", s.lambda_star),
    );
    Ok(())
}

pub fn rooted_sums(ctx: &Context) -> CheckResult {
    let mut r = CheckResult::new(12, CHECKS[11]);
    for k in 2..=4usize {
        let mut sizes = vec![3usize; k];
        loop {
            if let Err(e) = rooted_case(&sizes, ctx.tol.rooted, &mut r) {
                r.error(&format!("sizes {sizes:?}"), &e);
            }
            let Some(i) = sizes.iter().position(|&m| m < 6) else { break };
            sizes[i] += 1;
            for s in &mut sizes[..i] {
                *s = 3;
            }
        }
    }
    r
}

/// `2^α 3^β 5^γ` spanning trees of the level-`m` gasket.
pub fn sierpinski_tree_count(m: u32) -> BigInt {
    let p3 = 3u64.pow(m);
    let alpha = (p3 - 1) / 2;
    let beta = (3 * p3 + 2 * m as u64 + 1) / 4;
    let gamma = (p3 - 2 * m as u64 - 1) / 4;
    BigInt::from(2).pow(alpha as u32) * BigInt::from(3).pow(beta as u32) * BigInt::from(5).pow(gamma as u32)
}

pub fn sierpinski(ctx: &Context) -> CheckResult {
    let mut r = CheckResult::new(13, CHECKS[12]);
    for m in 1..=2u32 {
        let run = |r: &mut CheckResult| -> Result<(), Error> {
            let g = families::sierpinski(m)?;
            let n = g.n();
            let model = GroupModel::new(&g)?;
            let want = sierpinski_tree_count(m);
            r.case(*model.order() == want, || format!("sierpinski:{m}: |G| = {} vs {want}", model.order()));
            let inner = families::sierpinski_inner_gadget(&g, m)?;
            let mut vertices: Vec<usize> = inner.to_vec();
            for &v in &inner {
                for &w in g.neighbors(v) {
                    if !vertices.contains(&w) {
                        vertices.push(w);
                    }
                }
            }
            let phases: Vec<Ratio<i64>> = vertices
                .iter()
                .map(|v| if inner.contains(v) { Ratio::new(1, 2) } else { Ratio::from_integer(0) })
                .collect();
            let gadget = crate::characters::gadget_extend(&g, &vertices, &phases)?;
            let lambda = gadget.eigenvalue.lambda;
            let want_l = 1.0 - 6.0 / n as f64;
            r.case((lambda - want_l).norm() <= ctx.tol.spectrum, || {
                format!("sierpinski:{m}: gadget lambda {lambda} vs {want_l}")
            });
            let p = Profile::new(&g, DEFAULT_ENUM_BUDGET)?;
            let t_rel = p.summary.expect("nontrivial").t_rel;
            r.slack(t_rel - n as f64 / 6.0);
            r.case(t_rel >= n as f64 / 6.0 - ctx.tol.spectrum, || {
                format!("sierpinski:{m}: t_rel {t_rel} < |V|/6")
            });
            r.note(format!("sierpinski:{m}: |V| = {n}, |G| = {}, t_rel = {t_rel:.4}", model.order()));
            Ok(())
        };
        if let Err(e) = run(&mut r) {
            r.error(&format!("sierpinski:{m}"), &e);
        }
    }
    r
}

/// Recurrent configurations by breadth-first search from the identity, with the table
/// `next[state][slot]` of single-chip additions.
fn recurrent_states(pile: &Sandpile) -> Result<(Vec<Vec<u64>>, Vec<Vec<usize>>), Error> {
    let start = pile.identity()?;
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut states = vec![start.chips.clone()];
    index.insert(start.chips, 0);
    let mut next: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let mut row = vec![0usize; pile.slots()];
        for (slot, out) in row.iter_mut().enumerate() {
            let c = pile.add_chip(&Configuration::new(states[s].clone()), slot)?;
            let k = *index.entry(c.chips.clone()).or_insert_with(|| {
                states.push(c.chips);
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            *out = k;
        }
        if next.len() <= s {
            next.resize(s + 1, Vec::new());
        }
        next[s] = row;
    }
    Ok((states, next))
}

/// Orthonormality of the characters on `𝒢` and `P f_h = λ_h f_h`; returns the worst errors.
///
/// `⟨f_h, f_h'⟩ = (1/N) Σ_η e^{2πi⟨x_h − x_h', η⟩}` depends only on `h − h'`, so the Gram
/// matrix is read off the character means `S(g)`: identity iff `S(0) = 1` and `S(g) = 0` else.
fn eigenbasis_errors(p: &Profile) -> Result<(f64, f64, usize), Error> {
    let g = &p.graph;
    let pile = Sandpile::new(g);
    let (states, next) = recurrent_states(&pile)?;
    let n_states = states.len();
    let e = p.table.exponent();
    let units: Vec<Complex64> = (0..e).map(|r| unit(r, e)).collect();
    let slot_vertex: Vec<usize> = (0..pile.slots()).map(|i| g.vertex_of_slot(i)).collect();
    let weight = 1.0 / g.n() as f64;
    let mut ortho = 0.0f64;
    let mut eigen = 0.0f64;
    let mut dots = vec![0usize; n_states];
    for rec in &p.eigs {
        let res = p.table.residues_at(rec.index);
        for (d, s) in dots.iter_mut().zip(&states) {
            let acc: u128 = s.iter().zip(&slot_vertex).map(|(&c, &v)| c as u128 * res[v] as u128).sum();
            *d = (acc % e as u128) as usize;
        }
        let mean: Complex64 = dots.iter().map(|&d| units[d]).sum::<Complex64>() / n_states as f64;
        let want = if rec.trivial { 1.0 } else { 0.0 };
        ortho = ortho.max((mean - want).norm());
        for (s, &d) in dots.iter().enumerate() {
            // The sink slot holds the state in place.
            let mut pf = units[d] * weight;
            for &k in &next[s] {
                pf += units[dots[k]] * weight;
            }
            eigen = eigen.max((pf - rec.lambda * units[d]).norm());
        }
    }
    Ok((ortho, eigen, n_states))
}

fn stabilize_random(pile: &Sandpile, rng: &mut ChaCha8Rng) -> Result<bool, Error> {
    let chips: Vec<u64> = (0..pile.slots()).map(|i| rng.gen_range(0..3 * pile.degree(i) + 2)).collect();
    let c = Configuration::new(chips);
    let a = pile.stabilize_with(&c, FiringPolicy::Fifo)?;
    let b = pile.stabilize_with(&c, FiringPolicy::MaxChipsFirst)?;
    Ok(a == b)
}

fn recurrence_sets_agree(pile: &Sandpile) -> Result<bool, Error> {
    let sat = pile.saturated();
    let mut burning = HashSet::new();
    let mut definitional = HashSet::new();
    for c in pile.stable_configurations() {
        if pile.is_recurrent(&c)? {
            burning.insert(c.chips.clone());
        }
        let sum: Vec<u64> = sat.chips.iter().zip(&c.chips).map(|(a, b)| a + b).collect();
        definitional.insert(pile.stabilize(&Configuration::new(sum))?.stable.chips);
    }
    Ok(burning == definitional)
}

fn random_zero_sum(rng: &mut ChaCha8Rng, n: usize, d: i128) -> Vec<i128> {
    let mut a: Vec<i128> = (0..n - 1).map(|_| rng.gen_range(-3 * d..=3 * d)).collect();
    let s: i128 = a.iter().sum();
    a.push(-s);
    a
}

/// `n d² ‖a/d − P z‖²` for the best `z` in a box, by exhaustion.
fn cvp_bruteforce(a: &[i128], d: i128) -> i128 {
    let n = a.len();
    let last = a[n - 1];
    // Shift so that z_n = 0; then z_i stays within 2 of (a_i − a_n)/d.
    let centers: Vec<i128> = a.iter().map(|&x| (x - last).div_euclid(d)).collect();
    let mut best = i128::MAX;
    let mut offs = vec![-2i128; n - 1];
    loop {
        let mut z: Vec<i128> = centers[..n - 1].iter().zip(&offs).map(|(c, o)| c + o).collect();
        z.push(0);
        let r: Vec<i128> = a.iter().zip(&z).map(|(&x, &zi)| x - d * zi).collect();
        let sum: i128 = r.iter().sum();
        let sumsq: i128 = r.iter().map(|x| x * x).sum();
        best = best.min(n as i128 * sumsq - sum * sum);
        let Some(i) = offs.iter().position(|&o| o < 3) else { break };
        offs[i] += 1;
        for o in &mut offs[..i] {
            *o = -2;
        }
    }
    best
}

pub fn properties(ctx: &Context) -> CheckResult {
    let mut r = CheckResult::new(14, CHECKS[13]);
    let tol = ctx.tol;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (mut ortho_worst, mut eigen_worst, mut eigen_graphs, mut burn_graphs) = (0.0f64, 0.0f64, 0, 0);
    for (i, e) in ctx.corpus.iter().enumerate() {
        let mut run = |r: &mut CheckResult| -> Result<(), Error> {
            let pile = Sandpile::new(&e.graph);
            let mut agree = 0;
            for _ in 0..tol.abelian_cases {
                agree += usize::from(stabilize_random(&pile, &mut rng)?);
            }
            r.case(agree == tol.abelian_cases, || {
                format!("{}: firing policies disagree on {} cases", e.name, tol.abelian_cases - agree)
            });
            let p = ctx.profile(i)?;
            if let Some(s) = p.summary {
                let n = e.graph.n() as f64;
                let ok = s.gamma_d <= s.gamma_c + tol.gap && s.gamma_c <= n * s.gamma_d + tol.gap;
                r.case(ok, || format!("{}: gamma_d {:e}, gamma_c {:e}", e.name, s.gamma_d, s.gamma_c));
            }
            if p.order() <= tol.property_max_order {
                let (ortho, eigen, states) = eigenbasis_errors(p)?;
                eigen_graphs += 1;
                ortho_worst = ortho_worst.max(ortho);
                eigen_worst = eigen_worst.max(eigen);
                r.case(states as u64 == p.order(), || {
                    format!("{}: {states} recurrent states, |G| = {}", e.name, p.order())
                });
                r.case(ortho <= tol.property && eigen <= tol.property, || {
                    format!("{}: orthonormality error {ortho:e}, eigen error {eigen:e}", e.name)
                });
            }
            if pile.stable_count() <= tol.burning_max_states {
                burn_graphs += 1;
                r.case(recurrence_sets_agree(&pile)?, || {
                    format!("{}: burning test disagrees with reachability", e.name)
                });
            }
            Ok(())
        };
        if let Err(err) = run(&mut r) {
            r.error(&e.name, &err);
        }
    }
    let mut cvp_ok = 0;
    for k in 0..tol.cvp_cases {
        let n = 2 + k % 4;
        let d = rng.gen_range(1..=12i128);
        let a = random_zero_sum(&mut rng, n, d);
        let fast = cvp_wn_scaled(&a, d).dist_scaled;
        let slow = cvp_bruteforce(&a, d);
        cvp_ok += usize::from(fast == slow);
        r.case(fast == slow, || format!("cvp {a:?}/{d}: decoder {fast} vs exhaustive {slow}"));
    }
    r.slack(tol.property - ortho_worst.max(eigen_worst));
    r.note(format!(
        "eigenbasis on {eigen_graphs} graphs (orthonormality {ortho_worst:.2e}, eigen {eigen_worst:.2e}); burning test on {burn_graphs} graphs; cvp {cvp_ok}/{} cases",
        tol.cvp_cases
    ));
    r
}

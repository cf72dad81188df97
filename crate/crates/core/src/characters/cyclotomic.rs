//! Exact vanishing test for integer combinations of roots of unity.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Largest order for which the exact test is attempted.
pub const MAX_ORDER: u64 = 4096;

fn cache() -> &'static Mutex<HashMap<u64, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Exact division of `num` by the monic `den`; coefficients low degree first.
fn divide_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut quot = vec![0i64; rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let q = rem[i + dd];
        quot[i] = q;
        if q != 0 {
            for (j, &c) in den.iter().enumerate() {
                rem[i + j] -= q * c;
            }
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    quot
}

/// Coefficients of the `m`-th cyclotomic polynomial.
pub fn cyclotomic(m: u64) -> Arc<Vec<i64>> {
    if let Some(p) = cache().lock().expect("cache poisoned").get(&m) {
        return Arc::clone(p);
    }
    let mut poly = vec![0i64; m as usize + 1];
    poly[0] = -1;
    poly[m as usize] = 1;
    for d in 1..m {
        if m % d == 0 {
            poly = divide_exact(&poly, &cyclotomic(d));
        }
    }
    let poly = Arc::new(poly);
    cache().lock().expect("cache poisoned").insert(m, Arc::clone(&poly));
    poly
}

/// Whether `Σ weights[v]·ζ^{exps[v]}` is exactly zero for a primitive `m`-th root `ζ`.
///
/// Returns `None` when `m` is above [`MAX_ORDER`].
pub fn vanishes(weights: &[u64], exps: &[u64], m: u64) -> Option<bool> {
    if m > MAX_ORDER {
        return None;
    }
    if m == 1 {
        return Some(weights.iter().all(|&w| w == 0));
    }
    let mut poly = vec![0i64; m as usize];
    for (&w, &e) in weights.iter().zip(exps) {
        poly[(e % m) as usize] += w as i64;
    }
    let phi = cyclotomic(m);
    let dd = phi.len() - 1;
    for i in (dd..poly.len()).rev() {
        let q = poly[i];
        if q != 0 {
            for (j, &c) in phi.iter().enumerate() {
                poly[i - dd + j] -= q * c;
            }
        }
    }
    Some(poly[..dd].iter().all(|&x| x == 0))
}

//! Closest point in 𝕎ⁿ, the projection of ℤⁿ onto the zero-sum hyperplane.
//!
//! 𝕎ⁿ is a copy of A*ₙ₋₁. For x in the hyperplane the closest point is `P z` where `z` rounds
//! `x + c·𝟙` for some shift `c`; as `c` sweeps `[0, 1)` the rounding is `⌊x⌋` plus one on the `k`
//! coordinates with the largest fractional parts, so `n` candidates suffice.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::LinalgError;

/// Result of decoding a scaled input `x = a / d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvpScaled {
    /// Integer preimage `z`; the lattice point is `P z`.
    pub z: Vec<i128>,
    /// `n · d² · ‖x − P z‖²`.
    pub dist_scaled: i128,
}

/// Decodes `x = a / d` (with `Σ a = 0`, `d > 0`) to the closest point of 𝕎ⁿ.
///
/// Among equally close points the one with the fewest rounded-up coordinates wins.
pub fn cvp_wn_scaled(a: &[i128], d: i128) -> CvpScaled {
    assert!(d > 0);
    let n = a.len() as i128;
    let floors: Vec<i128> = a.iter().map(|&x| x.div_euclid(d)).collect();
    let fracs: Vec<i128> = a.iter().map(|&x| x.rem_euclid(d)).collect();
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| fracs[j].cmp(&fracs[i]).then(i.cmp(&j)));

    // r_i = a_i − d z_i; distance = n Σ r_i² − (Σ r_i)².
    let mut r: Vec<i128> = fracs.clone();
    let mut sum: i128 = r.iter().sum();
    let mut sumsq: i128 = r.iter().map(|x| x * x).sum();
    let mut best_k = 0;
    let mut best = n * sumsq - sum * sum;
    for (k, &i) in order.iter().enumerate() {
        let old = r[i];
        let new = old - d;
        sumsq += new * new - old * old;
        sum -= d;
        r[i] = new;
        let dist = n * sumsq - sum * sum;
        if dist < best {
            best = dist;
            best_k = k + 1;
        }
    }
    let mut z = floors;
    for &i in &order[..best_k] {
        z[i] += 1;
    }
    CvpScaled {
        z,
        dist_scaled: best,
    }
}

/// Closest point of 𝕎ⁿ to a rational zero-sum vector.
pub fn cvp_wn(x: &[BigRational]) -> Result<Vec<BigRational>, LinalgError> {
    let sum: BigRational = x.iter().sum();
    if !sum.is_zero() {
        return Err(LinalgError::NotInR0n);
    }
    let d = x
        .iter()
        .fold(BigInt::from(1), |acc, q| acc.lcm(q.denom()));
    let scaled: Option<Vec<i128>> = x
        .iter()
        .map(|q| (q.numer() * (&d / q.denom())).to_i128())
        .collect();
    let (scaled, d) = match (scaled, d.to_i128()) {
        (Some(s), Some(d)) if s.iter().all(|v| v.abs() < 1 << 40) && d < 1 << 40 => (s, d),
        _ => return Err(LinalgError::Overflow),
    };
    let res = cvp_wn_scaled(&scaled, d);
    Ok(project_integer(&res.z))
}

/// `P z` for an integer vector.
pub fn project_integer(z: &[i128]) -> Vec<BigRational> {
    let n = BigInt::from(z.len());
    let s: BigInt = z.iter().map(|&v| BigInt::from(v)).sum();
    z.iter()
        .map(|&v| BigRational::new(BigInt::from(v) * &n - &s, n.clone()))
        .collect()
}

/// Squared length of a rational vector.
pub fn norm_sq(x: &[BigRational]) -> BigRational {
    x.iter().map(|q| q * q).sum()
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

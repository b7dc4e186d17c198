use crate::error::{Error, Result};

/// Binary entropy in bits; `H(0) = H(1) = 0`.
pub fn binary_entropy(d: f64) -> f64 {
    if d <= 0.0 || d >= 1.0 {
        return 0.0;
    }
    -d * d.log2() - (1.0 - d) * (1.0 - d).log2()
}

/// `R(D) = 1 - H(D)` for `D` in `[0, 0.5]`.
pub fn rd_bound_inv(d: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&d) {
        return Err(Error::Domain(format!("distortion {d} outside [0, 0.5]")));
    }
    Ok(1.0 - binary_entropy(d))
}

/// Smallest achievable distortion `D*` at rate `R`, by bisection.
pub fn rd_bound(rate: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Domain(format!("rate {rate} outside [0, 1]")));
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    // 1 - H is decreasing on [0, 0.5].
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - binary_entropy(mid) > rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `10 log10(D / D*)`.
pub fn db_distance(achieved: f64, bound: f64) -> f64 {
    10.0 * (achieved / bound).log10()
}

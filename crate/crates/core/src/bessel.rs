//! Zeroth-order Bessel function of the first kind.

/// First positive zero of `J0`.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// Location of the global minimum of `J0` (first zero of `J1`).
pub const J0_MIN_ARG: f64 = 3.831_705_970_207_512;

/// `J0(J0_MIN_ARG)`, the smallest value `J0` attains.
pub const J0_MIN_VALUE: f64 = -0.402_759_395_702_553;

const SERIES_LIMIT: f64 = 8.0;

/// `J0(x)`, absolute error below 1e-12 for `|x| <= 50`.
///
/// Power series below `|x| = 8`, Miller's backward recurrence above.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        series(x)
    } else {
        backward_recurrence(x)
    }
}

fn series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-3) {
            return sum;
        }
        k += 1.0;
    }
}

fn backward_recurrence(x: f64) -> f64 {
    // even start index well above x; J_{m+1} = 0 seeds the recurrence
    let mut m = (x + 20.0 + (50.0 * x).sqrt()) as usize;
    m += m % 2;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = 0.0; // J0 + 2 Σ J_2k
    for k in (1..=m).rev() {
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += cur;
    cur / norm
}

/// Solves `J0(x) = target` on the decreasing branch `[0, J0_MIN_ARG]`.
///
/// Returns `None` when `target` lies outside `[J0_MIN_VALUE, 1]`.
pub fn j0_inverse_first_branch(target: f64) -> Option<f64> {
    if !(J0_MIN_VALUE..=1.0).contains(&target) {
        return None;
    }
    if target == 1.0 {
        return Some(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, J0_MIN_ARG);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bessel_j0(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

//! Zeroth-order Bessel function of the first kind.

use crate::scalar::Real;

const SERIES_LIMIT: f64 = 8.0;

/// `J0(x)`, accurate to about 1e-14 absolute in `f64` for `|x| <= 100`.
///
/// Small arguments use the Maclaurin series. Larger arguments use Miller's
/// backward recurrence `J_{k-1} = (2k/x) J_k - J_{k+1}` normalised with
/// `J0 + 2 (J2 + J4 + ...) = 1`.
pub fn bessel_j0<T: Real>(x: T) -> T {
    let x = x.abs();
    if x <= T::lit(SERIES_LIMIT) {
        series(x)
    } else {
        miller(x)
    }
}

fn series<T: Real>(x: T) -> T {
    let q = -(x * x) / T::lit(4.0);
    let mut term = T::one();
    let mut sum = T::one();
    let mut k = 1usize;
    loop {
        let kf = T::lit(k as f64);
        term *= q / (kf * kf);
        sum += term;
        if term.abs() <= T::default_epsilon() * T::lit(1e-3) * sum.abs().max(T::one()) {
            break sum;
        }
        k += 1;
    }
}

fn miller<T: Real>(x: T) -> T {
    let xf = x.as_f64();
    let mut start = (xf + 30.0 + 4.0 * xf.sqrt()).ceil() as usize;
    start += start % 2;
    let two_over_x = T::lit(2.0) / x;
    let big = T::lit(1e250_f64.min(T::max_value().unwrap().as_f64() * 1e-10));
    let tiny = T::one() / big;

    let mut next = T::zero(); // J_{k+1}
    let mut cur = T::lit(1e-30_f64.max(T::min_value().unwrap().as_f64() * 1e10)); // J_k
    let mut even_sum = T::zero();
    let mut j0 = T::zero();
    for k in (1..=start).rev() {
        let prev = T::lit(k as f64) * two_over_x * cur - next;
        next = cur;
        cur = prev;
        // `cur` now holds J_{k-1}.
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            even_sum += cur;
        }
        if cur.abs() > big {
            cur *= tiny;
            next *= tiny;
            even_sum *= tiny;
        }
        if k == 1 {
            j0 = cur;
        }
    }
    j0 / (j0 + T::lit(2.0) * even_sum)
}

//! Regularized incomplete beta function.

use libm::{exp, fabs, lgamma, log};

const EPS: f64 = 1e-12;
const MAX_ITER: usize = 300;
const TINY: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoConvergence;

/// `I_x(a, b)` for `a, b > 0` and `x` in `[0, 1]`.
///
/// Evaluated with the modified Lentz continued fraction, switching to
/// `1 - I_{1-x}(b, a)` where the fraction converges slowly.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64, NoConvergence> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    let ln_front = lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log(1.0 - x);
    let front = exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_fraction(x, a, b)? / a)
    } else {
        Ok(1.0 - front * beta_fraction(1.0 - x, b, a)? / b)
    }
}

fn beta_fraction(x: f64, a: f64, b: f64) -> Result<f64, NoConvergence> {
    let clamp = |v: f64| if fabs(v) < TINY { TINY } else { v };
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < EPS {
            return Ok(h);
        }
    }
    Err(NoConvergence)
}

//! Rounding of 2x2 rotation coefficients so their determinant is as close to
//! one as doubles allow.
//!
//! A map `[[c, σ], [-τ, c]]` whose determinant differs from one by `δ` changes
//! the conserved quadratic form by roughly `δ` every application, and that
//! error accumulates linearly over many steps. Nudging the coefficients a few
//! ulps brings `δ` well below the rounding of any single entry.

const SEARCH_ULPS: i32 = 6;

fn nudge(x: f64, ulps: i32) -> f64 {
    let mut y = x;
    for _ in 0..ulps.unsigned_abs() {
        y = if ulps > 0 { y.next_up() } else { y.next_down() };
    }
    y
}

/// `a·b + c·d − 1` with the products and the sum carried exactly enough that
/// the result is meaningful far below one ulp of one.
pub(crate) fn det_residual(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let p1 = a * b;
    let e1 = a.mul_add(b, -p1);
    let p2 = c * d;
    let e2 = c.mul_add(d, -p2);
    // Neumaier summation of the five terms.
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for term in [p1, p2, -1.0, e1, e2] {
        let t = sum + term;
        carry += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
    }
    sum + carry
}

/// Adjusts the coefficients of the map `[[cos, sigma], [-tau, cos]]`.
pub(crate) fn snap_rotation(cos: f64, sigma: f64, tau: f64) -> (f64, f64, f64) {
    let mut best = (cos, sigma, tau, det_residual(cos, cos, sigma, tau).abs());
    for i in -SEARCH_ULPS..=SEARCH_ULPS {
        let c = nudge(cos, i);
        for j in -SEARCH_ULPS..=SEARCH_ULPS {
            let s = nudge(sigma, j);
            for l in -SEARCH_ULPS..=SEARCH_ULPS {
                let t = nudge(tau, l);
                let r = det_residual(c, c, s, t).abs();
                if r < best.3 {
                    best = (c, s, t, r);
                }
            }
        }
    }
    (best.0, best.1, best.2)
}

/// Adjusts a point on the unit circle so `cos² + sin²` is as close to one as
/// possible.
pub(crate) fn snap_unit(cos: f64, sin: f64) -> (f64, f64) {
    let mut best = (cos, sin, det_residual(cos, cos, sin, sin).abs());
    for i in -SEARCH_ULPS..=SEARCH_ULPS {
        let c = nudge(cos, i);
        for j in -SEARCH_ULPS..=SEARCH_ULPS {
            let s = nudge(sin, j);
            let r = det_residual(c, c, s, s).abs();
            if r < best.2 {
                best = (c, s, r);
            }
        }
    }
    (best.0, best.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cases_untouched() {
        assert_eq!(snap_unit(1.0, 0.0), (1.0, 0.0));
        assert_eq!(snap_unit(0.0, 1.0), (0.0, 1.0));
        assert_eq!(det_residual(1.0, 1.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn residual_shrinks() {
        for k in 1..200 {
            let theta = 0.0137 * k as f64;
            let (s, c) = theta.sin_cos();
            let before = det_residual(c, c, s, s).abs();
            let (c2, s2) = snap_unit(c, s);
            assert!(det_residual(c2, c2, s2, s2).abs() <= before);
            assert!((c2 - c).abs() <= 8.0 * f64::EPSILON && (s2 - s).abs() <= 8.0 * f64::EPSILON);
        }
    }
}

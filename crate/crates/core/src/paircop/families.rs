//! Closed-form bivariate copula families in their unrotated base form.
//!
//! Conventions: `h1(u, v) = P[U <= u | V = v]` (the partial derivative of the
//! copula in its second argument) and `h2(u, v) = P[V <= v | U = u]`. All
//! families here are exchangeable, so `h2(u, v) = h1(v, u)`; rotations break
//! that symmetry one level up.

use super::norm::{pnorm, qnorm};

/// Arguments are clamped this far away from {0,1} before evaluation;
/// the public API has already rejected genuine boundary inputs.
pub(crate) const UNIT_EPS: f64 = 1e-12;

pub(crate) fn clamp_unit(u: f64) -> f64 {
    u.clamp(UNIT_EPS, 1.0 - UNIT_EPS)
}

// ---------------------------------------------------------------- gaussian

pub(crate) fn gaussian_pdf(rho: f64, u: f64, v: f64) -> f64 {
    let x = qnorm(clamp_unit(u));
    let y = qnorm(clamp_unit(v));
    let s = 1.0 - rho * rho;
    (-(rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * s)).exp() / s.sqrt()
}

pub(crate) fn gaussian_h1(rho: f64, u: f64, v: f64) -> f64 {
    let x = qnorm(clamp_unit(u));
    let y = qnorm(clamp_unit(v));
    pnorm((x - rho * y) / (1.0 - rho * rho).sqrt())
}

pub(crate) fn gaussian_hinv1(rho: f64, w: f64, v: f64) -> f64 {
    let z = qnorm(clamp_unit(w));
    let y = qnorm(clamp_unit(v));
    pnorm(z * (1.0 - rho * rho).sqrt() + rho * y)
}

// ----------------------------------------------------------------- clayton

pub(crate) fn clayton_pdf(theta: f64, u: f64, v: f64) -> f64 {
    let u = clamp_unit(u);
    let v = clamp_unit(v);
    let t = u.powf(-theta) + v.powf(-theta) - 1.0;
    (1.0 + theta) * (u * v).powf(-1.0 - theta) * t.powf(-2.0 - 1.0 / theta)
}

pub(crate) fn clayton_h1(theta: f64, u: f64, v: f64) -> f64 {
    let u = clamp_unit(u);
    let v = clamp_unit(v);
    let t = u.powf(-theta) + v.powf(-theta) - 1.0;
    v.powf(-theta - 1.0) * t.powf(-1.0 - 1.0 / theta)
}

pub(crate) fn clayton_hinv1(theta: f64, w: f64, v: f64) -> f64 {
    let w = clamp_unit(w);
    let v = clamp_unit(v);
    let t = (w * v.powf(theta + 1.0)).powf(-theta / (theta + 1.0));
    (t + 1.0 - v.powf(-theta)).powf(-1.0 / theta)
}

// ------------------------------------------------------------------ gumbel

pub(crate) fn gumbel_pdf(theta: f64, u: f64, v: f64) -> f64 {
    let u = clamp_unit(u);
    let v = clamp_unit(v);
    let x = -u.ln();
    let y = -v.ln();
    let s = x.powf(theta) + y.powf(theta);
    let a = s.powf(1.0 / theta);
    (-a).exp() * (x * y).powf(theta - 1.0) / (u * v) * a.powf(1.0 - 2.0 * theta) * (a + theta - 1.0)
}

pub(crate) fn gumbel_h1(theta: f64, u: f64, v: f64) -> f64 {
    let u = clamp_unit(u);
    let v = clamp_unit(v);
    let x = -u.ln();
    let y = -v.ln();
    let s = x.powf(theta) + y.powf(theta);
    let a = s.powf(1.0 / theta);
    (-a).exp() * y.powf(theta - 1.0) * a.powf(1.0 - theta) / v
}

/// No closed form; monotone bisection in the first argument.
pub(crate) fn gumbel_hinv1(theta: f64, w: f64, v: f64) -> f64 {
    let w = clamp_unit(w);
    invert_h1(|u| gumbel_h1(theta, u, v), w)
}

// ------------------------------------------------------------------- frank
//
// All Frank expressions are arranged as sums of bare exponentials; expanding
// the textbook products like (1 - e^{-theta u})(1 - e^{-theta v}) cancels
// catastrophically near the (1,1) corner for large theta.

pub(crate) fn frank_pdf(theta: f64, u: f64, v: f64) -> f64 {
    let u = clamp_unit(u);
    let v = clamp_unit(v);
    let eu = (-theta * u).exp();
    let ev = (-theta * v).exp();
    let euv = (-theta * (u + v)).exp();
    let et = (-theta).exp();
    let denom = eu + ev - euv - et;
    theta * (1.0 - et) * euv / (denom * denom)
}

pub(crate) fn frank_h1(theta: f64, u: f64, v: f64) -> f64 {
    let u = clamp_unit(u);
    let v = clamp_unit(v);
    let eu = (-theta * u).exp();
    let ev = (-theta * v).exp();
    let euv = (-theta * (u + v)).exp();
    let et = (-theta).exp();
    (ev - euv) / (eu + ev - euv - et)
}

pub(crate) fn frank_hinv1(theta: f64, w: f64, v: f64) -> f64 {
    let w = clamp_unit(w);
    let v = clamp_unit(v);
    let ev = (-theta * v).exp();
    let et = (-theta).exp();
    let ratio = ((1.0 - w) * ev + w * et) / (w + (1.0 - w) * ev);
    clamp_unit(-ratio.ln() / theta)
}

// ---------------------------------------------------------------- shared

/// Bisection solve of `h(u) = w` for a conditional CDF `h` that is
/// nondecreasing in `u`. The interval shrinks below f64 resolution well
/// within the iteration budget.
pub(crate) fn invert_h1(h: impl Fn(f64) -> f64, w: f64) -> f64 {
    let mut lo = UNIT_EPS;
    let mut hi = 1.0 - UNIT_EPS;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < w {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_density_center_closed_form() {
        // c(1/2, 1/2) = 1/sqrt(1 - rho^2) because the normal scores vanish.
        let rho = 0.5f64;
        let expect = (1.0 - rho * rho).sqrt().recip();
        assert!((gaussian_pdf(rho, 0.5, 0.5) - expect).abs() < 1e-12);
    }

    #[test]
    fn h_functions_are_derivatives_of_the_cdf() {
        // Central finite difference of C(u, v) in v against h1 for the
        // families with closed-form CDFs.
        let eps = 1e-6;
        let cases: Vec<(Box<dyn Fn(f64, f64) -> f64>, Box<dyn Fn(f64, f64) -> f64>)> = vec![
            (
                Box::new(|u, v| clayton_cdf(2.5, u, v)),
                Box::new(|u, v| clayton_h1(2.5, u, v)),
            ),
            (
                Box::new(|u, v| gumbel_cdf(1.7, u, v)),
                Box::new(|u, v| gumbel_h1(1.7, u, v)),
            ),
            (
                Box::new(|u, v| frank_cdf(4.0, u, v)),
                Box::new(|u, v| frank_h1(4.0, u, v)),
            ),
            (
                Box::new(|u, v| frank_cdf(-3.0, u, v)),
                Box::new(|u, v| frank_h1(-3.0, u, v)),
            ),
        ];
        for (cdf, h1) in &cases {
            for &(u, v) in &[(0.3, 0.7), (0.8, 0.2), (0.5, 0.5), (0.1, 0.9)] {
                let fd = (cdf(u, v + eps) - cdf(u, v - eps)) / (2.0 * eps);
                let h = h1(u, v);
                assert!((fd - h).abs() < 1e-6, "h mismatch at ({u},{v}): fd={fd} h={h}");
            }
        }
    }

    #[test]
    fn pdf_is_mixed_derivative_of_cdf() {
        let eps = 1e-4;
        for &(u, v) in &[(0.3, 0.7), (0.6, 0.4)] {
            let fd = (clayton_cdf(2.0, u + eps, v + eps) - clayton_cdf(2.0, u + eps, v - eps)
                - clayton_cdf(2.0, u - eps, v + eps)
                + clayton_cdf(2.0, u - eps, v - eps))
                / (4.0 * eps * eps);
            let c = clayton_pdf(2.0, u, v);
            assert!((fd - c).abs() / c < 1e-4, "pdf mismatch: fd={fd} c={c}");
        }
    }

    #[test]
    fn clayton_small_theta_approaches_independence() {
        assert!((clayton_pdf(1e-5, 0.3, 0.7) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn closed_form_inverses_round_trip() {
        for &(u, v) in &[(0.3, 0.8), (0.9, 0.1), (0.5, 0.5)] {
            let w = gaussian_h1(0.6, u, v);
            assert!((gaussian_hinv1(0.6, w, v) - u).abs() < 1e-9);
            let w = clayton_h1(3.0, u, v);
            assert!((clayton_hinv1(3.0, w, v) - u).abs() < 1e-9);
            let w = frank_h1(5.0, u, v);
            assert!((frank_hinv1(5.0, w, v) - u).abs() < 1e-9);
            let w = gumbel_h1(2.0, u, v);
            assert!((gumbel_hinv1(2.0, w, v) - u).abs() < 1e-8);
        }
    }

    fn clayton_cdf(theta: f64, u: f64, v: f64) -> f64 {
        (u.powf(-theta) + v.powf(-theta) - 1.0).powf(-1.0 / theta)
    }

    fn gumbel_cdf(theta: f64, u: f64, v: f64) -> f64 {
        let s = (-u.ln()).powf(theta) + (-v.ln()).powf(theta);
        (-s.powf(1.0 / theta)).exp()
    }

    fn frank_cdf(theta: f64, u: f64, v: f64) -> f64 {
        let d = (-theta).exp() - 1.0;
        -((1.0 + ((-theta * u).exp() - 1.0) * ((-theta * v).exp() - 1.0) / d).ln()) / theta
    }
}

//! Kendall's tau, parameter inversion and AIC family selection.

use serde::{Deserialize, Serialize};

use super::kernel::KernelSurface;
use super::norm::{dnorm, qnorm};
use super::{loglik, Family, PairCopulaSpec, Rotation};
use crate::error::{Error, Result};

/// Parameter caps keeping the closed forms numerically stable.
pub(crate) const MAX_RHO: f64 = 0.9999;
const MAX_CLAYTON: f64 = 28.0;
const MAX_GUMBEL: f64 = 50.0;
const MAX_FRANK: f64 = 40.0;

/// Model selection rule. AIC is the only one implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Aic,
}

/// Controls for [`fit_pair`] and, through it, vine fitting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitConfig {
    pub family_set: Vec<Family>,
    pub selection: Selection,
    pub kernel_bandwidth_multiplier: f64,
    pub kernel_grid_size: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            family_set: vec![
                Family::Independence,
                Family::Gaussian,
                Family::Clayton,
                Family::Gumbel,
                Family::Frank,
                Family::Kernel,
            ],
            selection: Selection::Aic,
            kernel_bandwidth_multiplier: 0.1,
            kernel_grid_size: 64,
        }
    }
}

impl FitConfig {
    /// Parametric families only; useful where closed-form oracles exist.
    pub fn parametric() -> Self {
        Self {
            family_set: vec![
                Family::Independence,
                Family::Gaussian,
                Family::Clayton,
                Family::Gumbel,
                Family::Frank,
            ],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.family_set.is_empty() {
            return Err(Error::InvalidInput("family_set must not be empty".into()));
        }
        if !(self.kernel_bandwidth_multiplier > 0.0) {
            return Err(Error::InvalidInput(format!(
                "kernel bandwidth multiplier must be > 0, got {}",
                self.kernel_bandwidth_multiplier
            )));
        }
        if self.kernel_grid_size < 16 {
            return Err(Error::InvalidInput(format!(
                "kernel grid size must be >= 16, got {}",
                self.kernel_grid_size
            )));
        }
        Ok(())
    }
}

/// Kendall's tau-b (tie-corrected) in `O(n log n)`.
pub fn kendall_tau(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), got: v.len() });
    }
    let n = u.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("kendall tau needs at least 2 pairs, got {n}")));
    }
    if u.iter().chain(v.iter()).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("kendall tau input".into()));
    }

    // Sort by x then y; discordant pairs are then the inversions of the y
    // sequence, counted by mergesort.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| u[a].total_cmp(&u[b]).then(v[a].total_cmp(&v[b])));
    let ys: Vec<f64> = idx.iter().map(|&i| v[i]).collect();

    let pairs = |t: f64| t * (t - 1.0) / 2.0;
    let n0 = pairs(n as f64);

    // Ties in x, and joint ties in (x, y).
    let mut tie_x = 0.0;
    let mut tie_xy = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && u[idx[j + 1]] == u[idx[i]] {
            j += 1;
        }
        tie_x += pairs((j - i + 1) as f64);
        let mut k = i;
        while k <= j {
            let mut m = k;
            while m + 1 <= j && ys[m + 1] == ys[k] {
                m += 1;
            }
            tie_xy += pairs((m - k + 1) as f64);
            k = m + 1;
        }
        i = j + 1;
    }

    // Ties in y.
    let mut sorted_y = ys.clone();
    sorted_y.sort_by(f64::total_cmp);
    let mut tie_y = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted_y[j + 1] == sorted_y[i] {
            j += 1;
        }
        tie_y += pairs((j - i + 1) as f64);
        i = j + 1;
    }

    if tie_x == n0 || tie_y == n0 {
        return Err(Error::ConstantInput("kendall tau undefined for a constant vector".into()));
    }

    let discordant = merge_count(ys) as f64;
    let concordant_minus_discordant = n0 - tie_x - tie_y + tie_xy - 2.0 * discordant;
    let tau = concordant_minus_discordant / ((n0 - tie_x) * (n0 - tie_y)).sqrt();
    Ok(tau.clamp(-1.0, 1.0))
}

/// Counts y-inversions (strict descents across merged halves).
fn merge_count(mut ys: Vec<f64>) -> u64 {
    let n = ys.len();
    let mut buf = vec![0.0; n];
    let mut swaps: u64 = 0;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            if mid < hi {
                let (mut i, mut j, mut k) = (lo, mid, lo);
                while i < mid || j < hi {
                    if i < mid && (j >= hi || ys[i] <= ys[j]) {
                        buf[k] = ys[i];
                        i += 1;
                    } else {
                        buf[k] = ys[j];
                        swaps += (mid - i) as u64;
                        j += 1;
                    }
                    k += 1;
                }
                ys[lo..hi].copy_from_slice(&buf[lo..hi]);
            }
            lo += 2 * width;
        }
        width *= 2;
    }
    swaps
}

/// Asymptotic z statistic of the tau-based independence test.
pub fn tau_independence_z(tau: f64, n: usize) -> f64 {
    let n = n as f64;
    tau.abs() * (9.0 * n * (n - 1.0) / (2.0 * (2.0 * n + 5.0))).sqrt()
}

/// Fits a pair copula on pseudo-observations and selects the family by
/// minimum AIC over the configured set.
///
/// Parametric parameters come from closed-form tau inversion (Frank by 1-d
/// numeric inversion of its Debye-function tau). An asymptotically
/// insignificant tau short-circuits to the independence copula.
pub fn fit_pair(u: &[f64], v: &[f64], config: &FitConfig) -> Result<PairCopulaSpec> {
    config.validate()?;
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), got: v.len() });
    }
    let n = u.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("pair fit needs at least 2 samples, got {n}")));
    }
    if u.iter().chain(v.iter()).any(|x| !(*x > 0.0 && *x < 1.0)) {
        return Err(Error::InvalidInput(
            "pair fit inputs must be pseudo-observations strictly inside (0,1)".into(),
        ));
    }

    let tau = kendall_tau(u, v)?;
    if tau.abs() > 1.0 - 1e-12 {
        return Err(Error::DegenerateDependence);
    }

    let has = |f: Family| config.family_set.contains(&f);

    if has(Family::Independence) && tau_independence_z(tau, n) < 1.96 {
        return Ok(PairCopulaSpec::independence());
    }

    let mut candidates: Vec<(PairCopulaSpec, f64)> = Vec::new();
    let push = |spec: PairCopulaSpec, extra_dof: f64, cands: &mut Vec<(PairCopulaSpec, f64)>| -> Result<()> {
        let ll = loglik(&spec, u, v)?;
        let k = spec.parameter_count() as f64 + extra_dof;
        cands.push((spec, 2.0 * k - 2.0 * ll));
        Ok(())
    };

    if has(Family::Independence) {
        push(PairCopulaSpec::independence(), 0.0, &mut candidates)?;
    }
    if has(Family::Gaussian) {
        let rho = (std::f64::consts::FRAC_PI_2 * tau).sin().clamp(-MAX_RHO, MAX_RHO);
        push(PairCopulaSpec::gaussian(rho)?, 0.0, &mut candidates)?;
    }
    if has(Family::Clayton) && tau.abs() > 1e-6 {
        let theta = (2.0 * tau.abs() / (1.0 - tau.abs())).clamp(1e-4, MAX_CLAYTON);
        let rotations: [Rotation; 2] =
            if tau >= 0.0 { [Rotation::R0, Rotation::R180] } else { [Rotation::R90, Rotation::R270] };
        for rot in rotations {
            push(PairCopulaSpec::clayton(theta, rot)?, 0.0, &mut candidates)?;
        }
    }
    if has(Family::Gumbel) {
        let theta = (1.0 / (1.0 - tau.abs())).clamp(1.0, MAX_GUMBEL);
        let rotations: [Rotation; 2] =
            if tau >= 0.0 { [Rotation::R0, Rotation::R180] } else { [Rotation::R90, Rotation::R270] };
        for rot in rotations {
            push(PairCopulaSpec::gumbel(theta, rot)?, 0.0, &mut candidates)?;
        }
    }
    if has(Family::Frank) && tau.abs() > 1e-6 {
        let theta = frank_theta_from_tau(tau);
        push(PairCopulaSpec::frank(theta)?, 0.0, &mut candidates)?;
    }
    if has(Family::Kernel) {
        if n >= 20 {
            let surface =
                KernelSurface::fit(u, v, config.kernel_bandwidth_multiplier, config.kernel_grid_size)?;
            let edf = kernel_effective_dof(&surface, u, v);
            push(PairCopulaSpec::kernel(surface), edf, &mut candidates)?;
        } else if config.family_set.len() == 1 {
            return Err(Error::InvalidInput(format!(
                "kernel copula fit needs at least 20 samples, got {n}"
            )));
        }
    }

    candidates
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(spec, _)| spec)
        .ok_or_else(|| Error::InvalidInput("no copula family could be fit".into()))
}

/// Effective degrees of freedom of the kernel surface: the trace of the
/// kernel smoother, i.e. each observation's share in its own density value.
fn kernel_effective_dof(surface: &KernelSurface, us: &[f64], vs: &[f64]) -> f64 {
    let n = us.len() as f64;
    let (hx, hy) = surface.bandwidth();
    let self_weight = 1.0 / (2.0 * std::f64::consts::PI * hx * hy);
    let mut edf = 0.0;
    for (&u, &v) in us.iter().zip(vs) {
        let joint = surface.pdf(u, v) * dnorm(qnorm(u)) * dnorm(qnorm(v));
        edf += (self_weight / (n * joint)).min(1.0);
    }
    edf
}

/// Frank tau as a function of theta: `1 - 4/theta (1 - D1(theta))` with the
/// first Debye function `D1`.
pub(crate) fn frank_tau(theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    1.0 - 4.0 / theta * (1.0 - debye1(theta))
}

/// `D1(x) = (1/x) * integral_0^x t/(e^t - 1) dt`, odd-extended via
/// `D1(-x) = D1(x) + x/2`.
fn debye1(x: f64) -> f64 {
    if x < 0.0 {
        return debye1(-x) - x / 2.0;
    }
    if x == 0.0 {
        return 1.0;
    }
    // Composite Simpson; the integrand extends continuously with f(0) = 1.
    let f = |t: f64| if t.abs() < 1e-8 { 1.0 - t / 2.0 } else { t / (t.exp() - 1.0) };
    let m = 200;
    let h = x / m as f64;
    let mut acc = f(0.0) + f(x);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(k as f64 * h);
    }
    (acc * h / 3.0) / x
}

/// Inverts `frank_tau` by bisection; tau must be in (-1, 1) \ {0}.
fn frank_theta_from_tau(tau: f64) -> f64 {
    let sign = tau.signum();
    let target = tau.abs();
    let mut lo = 1e-8;
    let mut hi = MAX_FRANK;
    if frank_tau(hi) <= target {
        return sign * hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if frank_tau(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    sign * 0.5 * (lo + hi)
}

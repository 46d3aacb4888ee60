//! Nonparametric copula density on a grid, estimated on the normal scale.
//!
//! Pseudo-observations are mapped through the standard normal quantile, a
//! bivariate Gaussian product-kernel density estimate is formed with per-axis
//! bandwidth `multiplier x Silverman rule-of-thumb`, and the result is mapped
//! back to the unit square with the normal-density Jacobian. The gridded
//! surface is then scaled to have unit mass and uniform margins (alternating
//! row/column scaling), since both are properties any copula density must
//! have. Evaluation between cell centers is bilinear; conditional CDFs come
//! from cached trapezoid prefix sums and are inverted by bisection.

use serde::{Deserialize, Serialize};

use super::norm::{dnorm, qnorm};
use crate::error::{Error, Result};

const DENSITY_FLOOR: f64 = 1e-10;
const MARGIN_SCALING_ROUNDS: usize = 50;
const BISECT_TOL: f64 = 1e-8;
const BISECT_CAP: usize = 100;

/// Gridded copula density on `[0,1]^2` with h-function caches.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "KernelSurfaceData", into = "KernelSurfaceData")]
pub struct KernelSurface {
    grid_size: usize,
    /// Row-major cell-center values; `values[i * G + j] = c(t_i, t_j)`.
    values: Vec<f64>,
    bandwidth: (f64, f64),
    /// `prefix_u[j][k]`: integral of `c(s, t_j)` over `s in [0, t_k]`.
    prefix_u: Vec<Vec<f64>>,
    /// `prefix_v[i][k]`: integral of `c(t_i, s)` over `s in [0, t_k]`.
    prefix_v: Vec<Vec<f64>>,
}

/// Serialized form: the grid and bandwidth only; prefix sums are rebuilt.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct KernelSurfaceData {
    grid_size: usize,
    values: Vec<f64>,
    bandwidth: (f64, f64),
}

impl From<KernelSurfaceData> for KernelSurface {
    fn from(d: KernelSurfaceData) -> Self {
        KernelSurface::from_values(d.grid_size, d.values, d.bandwidth)
    }
}

impl From<KernelSurface> for KernelSurfaceData {
    fn from(s: KernelSurface) -> Self {
        KernelSurfaceData { grid_size: s.grid_size, values: s.values, bandwidth: s.bandwidth }
    }
}

/// Center of grid cell `k` out of `g`.
fn cell_center(k: usize, g: usize) -> f64 {
    (k as f64 + 0.5) / g as f64
}

impl KernelSurface {
    /// Fits the surface on pseudo-observations.
    pub fn fit(us: &[f64], vs: &[f64], multiplier: f64, grid_size: usize) -> Result<Self> {
        let n = us.len();
        if n < 20 {
            return Err(Error::InvalidInput(format!(
                "kernel copula fit needs at least 20 samples, got {n}"
            )));
        }
        let g = grid_size;
        let xs: Vec<f64> = us.iter().map(|&u| qnorm(u)).collect();
        let ys: Vec<f64> = vs.iter().map(|&v| qnorm(v)).collect();

        // Per-axis Silverman rule-of-thumb for a bivariate Gaussian kernel:
        // sigma * n^(-1/6), shrunk by the configured multiplier.
        let hx = multiplier * sample_sd(&xs) * (n as f64).powf(-1.0 / 6.0);
        let hy = multiplier * sample_sd(&ys) * (n as f64).powf(-1.0 / 6.0);
        if !(hx > 0.0 && hy > 0.0) {
            return Err(Error::ConstantInput("kernel bandwidth collapsed to zero".into()));
        }

        let grid_x: Vec<f64> = (0..g).map(|k| qnorm(cell_center(k, g))).collect();
        let grid_y = grid_x.clone();

        // Separable accumulation of the product-kernel KDE on the grid.
        let mut f = vec![0.0; g * g];
        let mut kx = vec![0.0; g];
        let mut ky = vec![0.0; g];
        for i in 0..n {
            for k in 0..g {
                kx[k] = dnorm((grid_x[k] - xs[i]) / hx) / hx;
                ky[k] = dnorm((grid_y[k] - ys[i]) / hy) / hy;
            }
            for (row, &kxv) in kx.iter().enumerate() {
                let out = &mut f[row * g..(row + 1) * g];
                for (o, &kyv) in out.iter_mut().zip(ky.iter()) {
                    *o += kxv * kyv;
                }
            }
        }

        // Back to copula scale with the normal-density Jacobian.
        let mut values = vec![0.0; g * g];
        for i in 0..g {
            let jx = dnorm(grid_x[i]);
            for j in 0..g {
                let jy = dnorm(grid_y[j]);
                values[i * g + j] = (f[i * g + j] / (n as f64 * jx * jy)).max(DENSITY_FLOOR);
            }
        }

        normalize_margins(&mut values, g);
        Ok(Self::from_values(g, values, (hx, hy)))
    }

    fn from_values(g: usize, values: Vec<f64>, bandwidth: (f64, f64)) -> Self {
        let prefix_u = (0..g)
            .map(|j| prefix_along(&values, g, |k| values[k * g + j]))
            .collect();
        let prefix_v = (0..g)
            .map(|i| prefix_along(&values, g, |k| values[i * g + k]))
            .collect();
        Self { grid_size: g, values, bandwidth, prefix_u, prefix_v }
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn bandwidth(&self) -> (f64, f64) {
        self.bandwidth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Bilinear interpolation between cell centers, constant beyond the
    /// outermost centers.
    pub fn pdf(&self, u: f64, v: f64) -> f64 {
        let g = self.grid_size;
        let (i0, i1, fu) = locate(u, g);
        let (j0, j1, fv) = locate(v, g);
        let c00 = self.values[i0 * g + j0];
        let c01 = self.values[i0 * g + j1];
        let c10 = self.values[i1 * g + j0];
        let c11 = self.values[i1 * g + j1];
        let a = c00 + (c10 - c00) * fu;
        let b = c01 + (c11 - c01) * fu;
        (a + (b - a) * fv).max(DENSITY_FLOOR)
    }

    /// `P[U <= u | V = v]`, from the cached prefix sums.
    pub fn h1(&self, u: f64, v: f64) -> f64 {
        let g = self.grid_size;
        let (j0, j1, fv) = locate(v, g);
        let cum = |u: f64| -> f64 {
            let a = cum_with(&self.prefix_u[j0], |k| self.values[k * g + j0], g, u);
            let b = cum_with(&self.prefix_u[j1], |k| self.values[k * g + j1], g, u);
            a + (b - a) * fv
        };
        let total = cum(1.0);
        (cum(u) / total).clamp(0.0, 1.0)
    }

    /// `P[V <= v | U = u]`.
    pub fn h2(&self, u: f64, v: f64) -> f64 {
        let g = self.grid_size;
        let (i0, i1, fu) = locate(u, g);
        let cum = |v: f64| -> f64 {
            let a = cum_with(&self.prefix_v[i0], |k| self.values[i0 * g + k], g, v);
            let b = cum_with(&self.prefix_v[i1], |k| self.values[i1 * g + k], g, v);
            a + (b - a) * fu
        };
        let total = cum(1.0);
        (cum(v) / total).clamp(0.0, 1.0)
    }

    pub fn hinv1(&self, w: f64, v: f64) -> Result<f64> {
        bisect(|u| self.h1(u, v), w)
    }

    pub fn hinv2(&self, u: f64, w: f64) -> Result<f64> {
        bisect(|v| self.h2(u, v), w)
    }
}

fn sample_sd(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    var.sqrt()
}

/// Alternating row/column scaling toward uniform margins, then a global
/// rescale to unit mass.
fn normalize_margins(values: &mut [f64], g: usize) {
    for _ in 0..MARGIN_SCALING_ROUNDS {
        let mut worst: f64 = 0.0;
        for i in 0..g {
            let mean = values[i * g..(i + 1) * g].iter().sum::<f64>() / g as f64;
            worst = worst.max((mean - 1.0).abs());
            for j in 0..g {
                values[i * g + j] /= mean;
            }
        }
        for j in 0..g {
            let mean = (0..g).map(|i| values[i * g + j]).sum::<f64>() / g as f64;
            worst = worst.max((mean - 1.0).abs());
            for i in 0..g {
                values[i * g + j] /= mean;
            }
        }
        if worst < 1e-9 {
            break;
        }
    }
    let total = values.iter().sum::<f64>() / (g * g) as f64;
    for v in values.iter_mut() {
        *v = (*v / total).max(DENSITY_FLOOR);
    }
}

/// Trapezoid prefix sums of one grid line at the cell-center knots, with the
/// density extended constantly onto `[0, t_0]` and `[t_{g-1}, 1]`.
fn prefix_along(_values: &[f64], g: usize, line: impl Fn(usize) -> f64) -> Vec<f64> {
    let step = 1.0 / g as f64;
    let mut out = Vec::with_capacity(g);
    let mut acc = line(0) * (0.5 * step);
    out.push(acc);
    for k in 1..g {
        acc += 0.5 * (line(k - 1) + line(k)) * step;
        out.push(acc);
    }
    out
}

/// Integral of the interpolated line density over `[0, t]` given its knot
/// prefix sums.
fn cum_with(prefix: &[f64], line: impl Fn(usize) -> f64, g: usize, t: f64) -> f64 {
    let step = 1.0 / g as f64;
    let first = cell_center(0, g);
    let last = cell_center(g - 1, g);
    if t <= first {
        return line(0) * t.max(0.0);
    }
    if t >= last {
        return prefix[g - 1] + line(g - 1) * (t.min(1.0) - last);
    }
    let k = ((t - first) / step).floor() as usize;
    let k = k.min(g - 2);
    let tk = cell_center(k, g);
    let frac = (t - tk) / step;
    let l0 = line(k);
    let l1 = line(k + 1);
    let lt = l0 + (l1 - l0) * frac;
    prefix[k] + 0.5 * (l0 + lt) * (t - tk)
}

/// Neighbouring cell centers of `t` and the interpolation fraction.
fn locate(t: f64, g: usize) -> (usize, usize, f64) {
    let step = 1.0 / g as f64;
    let first = cell_center(0, g);
    if t <= first {
        return (0, 0, 0.0);
    }
    if t >= cell_center(g - 1, g) {
        return (g - 1, g - 1, 0.0);
    }
    let k = (((t - first) / step).floor() as usize).min(g - 2);
    let frac = (t - cell_center(k, g)) / step;
    (k, k + 1, frac)
}

fn bisect(h: impl Fn(f64) -> f64, w: f64) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..BISECT_CAP {
        let mid = 0.5 * (lo + hi);
        if h(mid) < w {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECT_TOL {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::InversionFailed(BISECT_CAP))
}

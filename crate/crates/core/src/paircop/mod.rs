//! Bivariate copula families: densities, h-functions and their inverses,
//! sampling, fitting and AIC model selection.
//!
//! These are the building blocks the vine composes. Parametric families are
//! fit by Kendall-tau inversion; the nonparametric family is a normal-scale
//! kernel surface (see [`kernel`]). Asymmetric families gain negative and
//! flipped dependence through the standard 90/180/270 degree rotations.

mod families;
pub mod fit;
mod kernel;
pub(crate) mod norm;

pub use fit::{fit_pair, kendall_tau, tau_independence_z, FitConfig, Selection};
pub use kernel::KernelSurface;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Copula family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Independence,
    Gaussian,
    Clayton,
    Gumbel,
    Frank,
    Kernel,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Family::Independence => "independence",
            Family::Gaussian => "gaussian",
            Family::Clayton => "clayton",
            Family::Gumbel => "gumbel",
            Family::Frank => "frank",
            Family::Kernel => "kernel",
        };
        write!(f, "{name}")
    }
}

/// Counter-clockwise rotation of the copula density in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rotation {
    #[serde(rename = "0")]
    R0,
    #[serde(rename = "90")]
    R90,
    #[serde(rename = "180")]
    R180,
    #[serde(rename = "270")]
    R270,
}

impl Rotation {
    pub fn degrees(self) -> u16 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }
}

/// Which argument of the copula the h-function conditions on.
///
/// `FirstGivenSecond` is `P[U <= u | V = v]`, `SecondGivenFirst` is
/// `P[V <= v | U = u]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    FirstGivenSecond,
    SecondGivenFirst,
}

/// One fitted (or constructed) bivariate copula.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairCopulaSpec {
    family: Family,
    /// Family parameter before rotation; unused for independence/kernel.
    parameter: f64,
    rotation: Rotation,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    kernel_surface: Option<KernelSurface>,
}

impl PairCopulaSpec {
    pub fn independence() -> Self {
        Self { family: Family::Independence, parameter: 0.0, rotation: Rotation::R0, kernel_surface: None }
    }

    pub fn gaussian(rho: f64) -> Result<Self> {
        if !(-1.0 < rho && rho < 1.0) {
            return Err(Error::InvalidInput(format!("gaussian parameter must be in (-1,1), got {rho}")));
        }
        Ok(Self { family: Family::Gaussian, parameter: rho, rotation: Rotation::R0, kernel_surface: None })
    }

    pub fn clayton(theta: f64, rotation: Rotation) -> Result<Self> {
        if !(theta > 0.0) {
            return Err(Error::InvalidInput(format!("clayton parameter must be > 0, got {theta}")));
        }
        Ok(Self { family: Family::Clayton, parameter: theta, rotation, kernel_surface: None })
    }

    pub fn gumbel(theta: f64, rotation: Rotation) -> Result<Self> {
        if !(theta >= 1.0) {
            return Err(Error::InvalidInput(format!("gumbel parameter must be >= 1, got {theta}")));
        }
        Ok(Self { family: Family::Gumbel, parameter: theta, rotation, kernel_surface: None })
    }

    pub fn frank(theta: f64) -> Result<Self> {
        if theta == 0.0 || !theta.is_finite() {
            return Err(Error::InvalidInput(format!("frank parameter must be finite and nonzero, got {theta}")));
        }
        Ok(Self { family: Family::Frank, parameter: theta, rotation: Rotation::R0, kernel_surface: None })
    }

    pub fn kernel(surface: KernelSurface) -> Self {
        Self { family: Family::Kernel, parameter: 0.0, rotation: Rotation::R0, kernel_surface: Some(surface) }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn parameter(&self) -> f64 {
        self.parameter
    }

    pub fn rotation(&self) -> Rotation {
        self.rotation
    }

    pub fn kernel_surface(&self) -> Option<&KernelSurface> {
        self.kernel_surface.as_ref()
    }

    pub fn is_independence(&self) -> bool {
        self.family == Family::Independence
    }

    /// Number of free parameters, used by AIC. The kernel family reports its
    /// effective degrees of freedom separately at fit time.
    pub fn parameter_count(&self) -> usize {
        match self.family {
            Family::Independence | Family::Kernel => 0,
            _ => 1,
        }
    }
}

fn check_unit_open(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::OutOfUnitInterval(x));
    }
    Ok(x)
}

/// Copula density at `(u, v)`, both strictly inside `(0,1)`.
pub fn pair_pdf(spec: &PairCopulaSpec, u: f64, v: f64) -> Result<f64> {
    let u = check_unit_open(u)?;
    let v = check_unit_open(v)?;
    // Rotations reflect the arguments of the base density.
    let (bu, bv) = match spec.rotation {
        Rotation::R0 => (u, v),
        Rotation::R90 => (1.0 - u, v),
        Rotation::R180 => (1.0 - u, 1.0 - v),
        Rotation::R270 => (u, 1.0 - v),
    };
    let d = base_pdf(spec, bu, bv);
    if !d.is_finite() {
        return Err(Error::NonFinite(format!("{} density at ({u},{v})", spec.family)));
    }
    Ok(d.max(0.0))
}

fn base_pdf(spec: &PairCopulaSpec, u: f64, v: f64) -> f64 {
    match spec.family {
        Family::Independence => 1.0,
        Family::Gaussian => families::gaussian_pdf(spec.parameter, u, v),
        Family::Clayton => families::clayton_pdf(spec.parameter, u, v),
        Family::Gumbel => families::gumbel_pdf(spec.parameter, u, v),
        Family::Frank => families::frank_pdf(spec.parameter, u, v),
        Family::Kernel => spec.kernel_surface.as_ref().expect("kernel spec has surface").pdf(u, v),
    }
}

/// Base-form conditional CDF `P[U <= u | V = v]`.
fn base_h1(spec: &PairCopulaSpec, u: f64, v: f64) -> f64 {
    match spec.family {
        Family::Independence => u,
        Family::Gaussian => families::gaussian_h1(spec.parameter, u, v),
        Family::Clayton => families::clayton_h1(spec.parameter, u, v),
        Family::Gumbel => families::gumbel_h1(spec.parameter, u, v),
        Family::Frank => families::frank_h1(spec.parameter, u, v),
        Family::Kernel => spec.kernel_surface.as_ref().expect("kernel spec has surface").h1(u, v),
    }
}

/// Base-form conditional CDF `P[V <= v | U = u]`; exchangeable families reuse
/// `h1` with swapped arguments.
fn base_h2(spec: &PairCopulaSpec, u: f64, v: f64) -> f64 {
    match spec.family {
        Family::Kernel => spec.kernel_surface.as_ref().expect("kernel spec has surface").h2(u, v),
        _ => base_h1(spec, v, u),
    }
}

fn base_hinv1(spec: &PairCopulaSpec, w: f64, v: f64) -> Result<f64> {
    Ok(match spec.family {
        Family::Independence => w,
        Family::Gaussian => families::gaussian_hinv1(spec.parameter, w, v),
        Family::Clayton => families::clayton_hinv1(spec.parameter, w, v),
        Family::Gumbel => families::gumbel_hinv1(spec.parameter, w, v),
        Family::Frank => families::frank_hinv1(spec.parameter, w, v),
        Family::Kernel => {
            return spec.kernel_surface.as_ref().expect("kernel spec has surface").hinv1(w, v)
        }
    })
}

fn base_hinv2(spec: &PairCopulaSpec, u: f64, w: f64) -> Result<f64> {
    match spec.family {
        Family::Kernel => spec.kernel_surface.as_ref().expect("kernel spec has surface").hinv2(u, w),
        _ => base_hinv1(spec, w, u),
    }
}

/// Conditional CDF of `target` given `cond`.
///
/// With `FirstGivenSecond`, `target` occupies the first copula slot and
/// `cond` the second; with `SecondGivenFirst` the roles are flipped.
pub fn hfunc(spec: &PairCopulaSpec, target: f64, cond: f64, direction: Direction) -> Result<f64> {
    let target = check_unit_open(target)?;
    let cond = check_unit_open(cond)?;
    let h = match (direction, spec.rotation) {
        (Direction::FirstGivenSecond, Rotation::R0) => base_h1(spec, target, cond),
        (Direction::FirstGivenSecond, Rotation::R90) => 1.0 - base_h1(spec, 1.0 - target, cond),
        (Direction::FirstGivenSecond, Rotation::R180) => {
            1.0 - base_h1(spec, 1.0 - target, 1.0 - cond)
        }
        (Direction::FirstGivenSecond, Rotation::R270) => base_h1(spec, target, 1.0 - cond),
        (Direction::SecondGivenFirst, Rotation::R0) => base_h2(spec, cond, target),
        (Direction::SecondGivenFirst, Rotation::R90) => base_h2(spec, 1.0 - cond, target),
        (Direction::SecondGivenFirst, Rotation::R180) => {
            1.0 - base_h2(spec, 1.0 - cond, 1.0 - target)
        }
        (Direction::SecondGivenFirst, Rotation::R270) => 1.0 - base_h2(spec, cond, 1.0 - target),
    };
    if !h.is_finite() {
        return Err(Error::NonFinite(format!("{} h-function", spec.family)));
    }
    Ok(h.clamp(families::UNIT_EPS, 1.0 - families::UNIT_EPS))
}

/// Inverse of [`hfunc`] in its `target` slot: returns the `target` whose
/// conditional CDF given `cond` equals `w`.
pub fn hinv(spec: &PairCopulaSpec, w: f64, cond: f64, direction: Direction) -> Result<f64> {
    let w = check_unit_open(w)?;
    let cond = check_unit_open(cond)?;
    let out = match (direction, spec.rotation) {
        (Direction::FirstGivenSecond, Rotation::R0) => base_hinv1(spec, w, cond)?,
        (Direction::FirstGivenSecond, Rotation::R90) => 1.0 - base_hinv1(spec, 1.0 - w, cond)?,
        (Direction::FirstGivenSecond, Rotation::R180) => {
            1.0 - base_hinv1(spec, 1.0 - w, 1.0 - cond)?
        }
        (Direction::FirstGivenSecond, Rotation::R270) => base_hinv1(spec, w, 1.0 - cond)?,
        (Direction::SecondGivenFirst, Rotation::R0) => base_hinv2(spec, cond, w)?,
        (Direction::SecondGivenFirst, Rotation::R90) => base_hinv2(spec, 1.0 - cond, w)?,
        (Direction::SecondGivenFirst, Rotation::R180) => {
            1.0 - base_hinv2(spec, 1.0 - cond, 1.0 - w)?
        }
        (Direction::SecondGivenFirst, Rotation::R270) => 1.0 - base_hinv2(spec, cond, 1.0 - w)?,
    };
    if !out.is_finite() {
        return Err(Error::NonFinite(format!("{} inverse h-function", spec.family)));
    }
    Ok(out.clamp(families::UNIT_EPS, 1.0 - families::UNIT_EPS))
}

/// Draws `n` pairs by conditional inversion: `v` uniform, `u = hinv(w | v)`.
pub fn sample_pair<R: Rng + ?Sized>(spec: &PairCopulaSpec, n: usize, rng: &mut R) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidInput("sample count must be >= 1".into()));
    }
    let mut out = Matrix::zeros(n, 2);
    for i in 0..n {
        let v: f64 = unit_open(rng);
        let w: f64 = unit_open(rng);
        let u = hinv(spec, w, v, Direction::FirstGivenSecond)?;
        out[(i, 0)] = u;
        out[(i, 1)] = v;
    }
    Ok(out)
}

/// Uniform draw guarded away from exact 0.
fn unit_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let x: f64 = rng.random();
        if x > 0.0 && x < 1.0 {
            return x;
        }
    }
}

/// Log-likelihood of data under the spec.
pub fn loglik(spec: &PairCopulaSpec, us: &[f64], vs: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (&u, &v) in us.iter().zip(vs) {
        acc += pair_pdf(spec, u, v)?.max(f64::MIN_POSITIVE).ln();
    }
    Ok(acc)
}

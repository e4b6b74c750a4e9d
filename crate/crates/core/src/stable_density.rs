//! Symmetric α-stable transition densities in dimensions 1 to 3.
//!
//! `p(s, x)` is the density of `Y_s` with `E e^{iξ·Y_s} = e^{-s|ξ|^α}`. Every
//! evaluation scales to unit time first,
//! `p(s, x) = s^{-d/α} p(1, x s^{-1/α})`, and then picks one of two routes:
//!
//! * `d = 1`, `|x| <= cutoff`: the cosine transform
//!   `(1/π) ∫_0^∞ cos(|x|ξ) e^{-ξ^α} dξ` on composite Gauss–Legendre panels;
//! * otherwise the Gaussian mixture
//!   `∫_0^∞ (4πσ)^{-d/2} e^{-|x|²/(4σ)} g_{α/2}(1, σ) dσ`, where `g_β` is the
//!   one-sided β-stable density with Laplace transform `e^{-λ^β}`.
//!
//! `g_β` is computed from Kanter's integral representation
//! `g(s) = ρ/(π s) ∫_0^π y e^{-y} du`, `y = K(u) s^{-ρ}`, `ρ = β/(1-β)`,
//! `K(u) = sin(βu)^{ρ} sin((1-β)u) / sin(u)^{1/(1-β)}`,
//! switching to the convergent power series in `s^{-β}` for large `s`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, GaussLegendre, UniformSpline};
use crate::special::gamma;

/// Largest dimension reachable through two lifting steps from `d = 3`.
pub const MAX_LIFTED_DIM: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    alpha: f64,
    d: usize,
}

impl StableParams {
    pub fn new(alpha: f64, d: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::domain(format!(
                "alpha must lie in (0, 2), got {alpha}"
            )));
        }
        if !(1..=3).contains(&d) {
            return Err(Error::domain(format!(
                "dimension must be 1, 2 or 3, got {d}"
            )));
        }
        Ok(Self { alpha, d })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Index of the subordinator that turns Brownian motion into `Y`.
    pub fn beta(&self) -> f64 {
        0.5 * self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethod {
    FourierInversion,
    Subordination,
}

/// Quadrature controls for density evaluation.
///
/// `cutoff` is the unit-time radius above which the `d = 1` cosine route
/// hands over to subordination. `n_nodes` is the Gauss–Legendre order used
/// per panel of the cosine route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEvalSpec {
    pub method: DensityMethod,
    pub n_nodes: usize,
    pub cutoff: f64,
    pub rel_tol: f64,
}

impl Default for DensityEvalSpec {
    fn default() -> Self {
        Self {
            method: DensityMethod::FourierInversion,
            n_nodes: 16,
            cutoff: 50.0,
            rel_tol: 1e-9,
        }
    }
}

impl DensityEvalSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 16 {
            return Err(Error::domain(format!(
                "n_nodes must be >= 16, got {}",
                self.n_nodes
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::domain("rel_tol must be positive"));
        }
        if !(self.cutoff > 0.0) {
            return Err(Error::domain("cutoff must be positive"));
        }
        Ok(())
    }
}

fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
    let mut map = CACHE.get_or_init(Default::default).lock().unwrap();
    map.entry(n)
        .or_insert_with(|| Box::leak(Box::new(GaussLegendre::new(n))))
}

// ---------------------------------------------------------------------------
// One-sided stable law

/// One-sided β-stable law with `E e^{-λS} = e^{-λ^β}`.
///
/// Tables derived from the density (mixture nodes, spline) are built on
/// first use and read-only afterwards.
#[derive(Debug)]
pub struct PositiveStable {
    beta: f64,
    mixture: OnceLock<Result<GaussianMixture>>,
    spline: OnceLock<Result<LogSpline>>,
}

/// Quadrature nodes `σ_i` and masses `W_i ≈ P(S ∈ cell i)` of a one-sided
/// stable law, used to write symmetric densities as Gaussian mixtures.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    sigma: Vec<f64>,
    ln_sigma: Vec<f64>,
    ln_mass: Vec<f64>,
}

#[derive(Debug)]
struct LogSpline {
    // ln(e^v g(e^v)) on a uniform v grid
    spline: UniformSpline,
}

const SERIES_SWITCH: f64 = 0.25;

impl PositiveStable {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::domain(format!(
                "beta must lie in (0, 1), got {beta}"
            )));
        }
        Ok(Self {
            beta,
            mixture: OnceLock::new(),
            spline: OnceLock::new(),
        })
    }

    /// Process-wide shared instance for `beta`.
    pub fn shared(beta: f64) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<PositiveStable>>>> = OnceLock::new();
        let probe = Self::new(beta)?;
        let mut map = CACHE.get_or_init(Default::default).lock().unwrap();
        Ok(map
            .entry(beta.to_bits())
            .or_insert_with(|| Arc::new(probe))
            .clone())
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn rho(&self) -> f64 {
        self.beta / (1.0 - self.beta)
    }

    /// `K(0+)`, the minimum of the Kanter function.
    fn k0(&self) -> f64 {
        let b = self.beta;
        b.powf(self.rho()) * (1.0 - b)
    }

    fn ln_kanter(&self, u: f64) -> f64 {
        let b = self.beta;
        self.rho() * (b * u).sin().ln() + ((1.0 - b) * u).sin().ln() - (u.sin()).ln() / (1.0 - b)
    }

    /// Density `g_β(1, s)`.
    pub fn density(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) || !s.is_finite() {
            if s == f64::INFINITY {
                return Ok(0.0);
            }
            return Err(Error::domain(format!(
                "subordinator density needs s > 0, got {s}"
            )));
        }
        if self.beta == 0.5 {
            return Ok(0.5 / PI.sqrt() * s.powf(-1.5) * (-0.25 / s).exp());
        }
        if s.powf(-self.beta) <= SERIES_SWITCH {
            return Ok(self.series(s));
        }
        self.kanter(s)
    }

    fn series(&self, s: f64) -> f64 {
        let b = self.beta;
        let z = s.powf(-b);
        let mut sum = 0.0;
        let mut zk = 1.0;
        let mut kfact = 1.0;
        for k in 1..60 {
            let kf = k as f64;
            zk *= z;
            kfact *= kf;
            let size = gamma(kf * b + 1.0) / kfact * zk;
            let term = size * (PI * kf * b).sin();
            sum += if k % 2 == 1 { term } else { -term };
            if size < 1e-17 * sum.abs() {
                break;
            }
        }
        sum / (PI * s)
    }

    fn kanter(&self, s: f64) -> Result<f64> {
        let rho = self.rho();
        let ln_scale = -rho * s.ln();
        // The integrand is y e^{-y} with y increasing in u; locate the
        // region where y is moderate so the adaptive rule starts well.
        let y_min = (self.k0().ln() + ln_scale).exp();
        if y_min > 745.0 {
            return Ok(0.0);
        }
        let mut f = |u: f64| {
            let y = (self.ln_kanter(u) + ln_scale).exp();
            if y.is_finite() {
                y * (-y).exp()
            } else {
                0.0
            }
        };
        let mut breaks = vec![0.0];
        if y_min > 1.0 {
            // peak width near u = 0 shrinks like y_min^{-1/2}
            let w = (1.0 / y_min).sqrt();
            let mut b = w;
            while b < PI {
                breaks.push(b);
                b *= 4.0;
            }
        }
        breaks.push(PI);
        let est = quad::adaptive_on(&mut f, &breaks, 1e-300, 1e-11, 400)?;
        Ok(rho / (PI * s) * est.value)
    }

    /// Mixture nodes covering the law, with enough left reach for Gaussian
    /// weights up to dimension [`MAX_LIFTED_DIM`].
    pub fn mixture(&self) -> Result<&GaussianMixture> {
        self.mixture
            .get_or_init(|| self.build_mixture())
            .as_ref()
            .map_err(Clone::clone)
    }

    fn build_mixture(&self) -> Result<GaussianMixture> {
        let rho = self.rho();
        let k0 = self.k0();
        let half_d = 0.5 * MAX_LIFTED_DIM as f64;
        let mut v_lo = (k0 / 40.0).ln() / rho;
        while k0 * (-rho * v_lo).exp() + half_d * v_lo < 40.0 {
            v_lo -= 0.25;
        }
        // tail mass beyond e^{v_hi} is about e^{-β v_hi}
        let v_hi = (40.0 / self.beta).max(80.0);
        let width = (1.0 / rho).min(1.0);
        let breaks = quad::uniform_breaks(v_lo, v_hi, width);
        let rule = gauss_legendre(16);
        let mut sigma = Vec::new();
        let mut ln_sigma = Vec::new();
        let mut ln_mass = Vec::new();
        for (v, w) in rule.composite_nodes(&breaks) {
            let s = v.exp();
            let g = self.density(s)?;
            sigma.push(s);
            ln_sigma.push(v);
            ln_mass.push((w * s * g).ln());
        }
        Ok(GaussianMixture {
            sigma,
            ln_sigma,
            ln_mass,
        })
    }

    /// Fast approximate `g_β(1, s)` from a cubic spline of
    /// `ln(s g(s))` in `ln s`; series beyond the table, zero far left.
    pub fn density_fast(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Ok(0.0);
        }
        if s.powf(-self.beta) <= SERIES_SWITCH {
            return Ok(self.series(s));
        }
        let tab = self
            .spline
            .get_or_init(|| self.build_spline())
            .as_ref()
            .map_err(Clone::clone)?;
        let v = s.ln();
        if v < tab.spline.x_min() {
            return Ok(0.0);
        }
        Ok(tab.spline.eval(v).exp() / s)
    }

    fn build_spline(&self) -> Result<LogSpline> {
        let rho = self.rho();
        let v_lo = (self.k0() / 700.0).ln() / rho;
        // series takes over at s^{-β} = SERIES_SWITCH
        let v_hi = -SERIES_SWITCH.ln() / self.beta + 0.5;
        let h = 0.02 / rho.max(1.0);
        let n = ((v_hi - v_lo) / h).ceil() as usize + 1;
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let v = v_lo + h * i as f64;
            let s = v.exp();
            let g = if s.powf(-self.beta) <= SERIES_SWITCH {
                self.series(s)
            } else {
                self.kanter(s)?
            };
            y.push((s * g).max(f64::MIN_POSITIVE).ln());
        }
        Ok(LogSpline {
            spline: UniformSpline::new(v_lo, h, y),
        })
    }
}

impl GaussianMixture {
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Total mass of the nodes; close to one.
    pub fn total_mass(&self) -> f64 {
        self.ln_mass.iter().map(|m| m.exp()).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.sigma
            .iter()
            .zip(&self.ln_mass)
            .map(|(&s, &m)| (s, m.exp()))
    }

    /// The same law with every node multiplied by `c` (the law of `c·S`).
    pub fn scaled(&self, c: f64) -> GaussianMixture {
        let lc = c.ln();
        GaussianMixture {
            sigma: self.sigma.iter().map(|s| s * c).collect(),
            ln_sigma: self.ln_sigma.iter().map(|v| v + lc).collect(),
            ln_mass: self.ln_mass.clone(),
        }
    }

    /// `Σ W_i (4πσ_i)^{-dim/2} exp(-r²/(4σ_i))`.
    pub fn radial(&self, dim: usize, r: f64) -> f64 {
        let hd = 0.5 * dim as f64;
        let r2 = r * r;
        let ln4pi = (4.0 * PI).ln();
        let mut sum = 0.0;
        for i in 0..self.sigma.len() {
            let e = self.ln_mass[i] - hd * (ln4pi + self.ln_sigma[i]) - 0.25 * r2 / self.sigma[i];
            if e > -745.0 {
                sum += e.exp();
            }
        }
        sum
    }
}

/// One-sided stable density `g_β(1, s)`.
pub fn subordinator_density(beta: f64, s: f64) -> Result<f64> {
    PositiveStable::shared(beta)?.density(s)
}

// ---------------------------------------------------------------------------
// Symmetric stable density

/// Density evaluator bound to one parameter set.
#[derive(Debug, Clone)]
pub struct StableDensity {
    params: StableParams,
    spec: DensityEvalSpec,
    law: Arc<PositiveStable>,
}

impl StableDensity {
    pub fn new(params: StableParams, spec: DensityEvalSpec) -> Result<Self> {
        spec.validate()?;
        let law = PositiveStable::shared(params.beta())?;
        Ok(Self { params, spec, law })
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    pub fn spec(&self) -> &DensityEvalSpec {
        &self.spec
    }

    pub fn subordinator(&self) -> &PositiveStable {
        &self.law
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.params.d {
            return Err(Error::Shape(format!(
                "point has {} coordinates, dimension is {}",
                x.len(),
                self.params.d
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("point has non-finite coordinates"));
        }
        Ok(())
    }

    /// Unit-time density of the `dim`-dimensional process at radius `r`.
    pub fn unit_radial(&self, dim: usize, r: f64) -> Result<f64> {
        let r = r.abs();
        if dim == 1 && self.spec.method == DensityMethod::FourierInversion && r <= self.spec.cutoff
        {
            return cosine_transform(self.params.alpha, 1.0, r, &self.spec);
        }
        self.subordinated_radial(dim, r)
    }

    pub(crate) fn subordinated_radial(&self, dim: usize, r: f64) -> Result<f64> {
        debug_assert!(dim <= MAX_LIFTED_DIM);
        Ok(self.law.mixture()?.radial(dim, r))
    }

    /// `p(s, x)` through scaling to unit time.
    pub fn density(&self, s: f64, x: &[f64]) -> Result<f64> {
        check_time(s)?;
        self.check_point(x)?;
        let a = self.params.alpha;
        let d = self.params.d as f64;
        let r = norm(x) * s.powf(-1.0 / a);
        Ok(s.powf(-d / a) * self.unit_radial(self.params.d, r)?)
    }

    /// `p(1, x)` by the Gaussian-mixture route regardless of `spec.method`.
    pub fn density_via_subordination(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.subordinated_radial(self.params.d, norm(x))
    }

    /// `∂^k_{x_j} p(s, x)` for `k ∈ {1, 2}` and 1-based coordinate `j`.
    pub fn partial(&self, s: f64, x: &[f64], j: usize, k: usize) -> Result<f64> {
        check_time(s)?;
        self.check_point(x)?;
        if !(1..=self.params.d).contains(&j) {
            return Err(Error::domain(format!(
                "coordinate index {j} outside 1..={}",
                self.params.d
            )));
        }
        if k != 1 && k != 2 {
            return Err(Error::domain(format!(
                "derivative order must be 1 or 2, got {k}"
            )));
        }
        let a = self.params.alpha;
        let d = self.params.d;
        let scale = s.powf(-1.0 / a);
        // permuting coordinates leaves the radial kernel unchanged, so only
        // the selected coordinate and the radius matter
        let y1 = x[j - 1] * scale;
        let r = norm(x) * scale;
        let unit = if k == 1 {
            -2.0 * PI * y1 * self.subordinated_radial(d + 2, r)?
        } else {
            -2.0 * PI * self.subordinated_radial(d + 2, r)?
                + 4.0 * PI * PI * y1 * y1 * self.subordinated_radial(d + 4, r)?
        };
        Ok(s.powf(-((d + k) as f64) / a) * unit)
    }
}

fn check_time(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!(
            "time must be positive and finite, got {s}"
        )));
    }
    Ok(())
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `(1/π) ∫_0^∞ cos(xξ) e^{-sξ^α} dξ`, the one-dimensional density at time `s`
/// without scaling.
///
/// The error estimate is the difference between Gauss–Legendre rules of
/// order `n_nodes` and `n_nodes + 8` on the same panels.
pub fn cosine_transform(alpha: f64, s: f64, x: f64, spec: &DensityEvalSpec) -> Result<f64> {
    check_time(s)?;
    let x = x.abs();
    // e^{-s ξ^α} < rel_tol/100 beyond xi_max
    let xi_max = ((100.0 / spec.rel_tol).ln() / s).powf(1.0 / alpha);
    let width = if x > 0.0 { (6.0 / x).min(1.0) } else { 1.0 } * s.powf(-1.0 / alpha).min(1.0);
    let knee = width.min(xi_max);
    let mut breaks = vec![0.0];
    breaks.extend(quad::geometric_breaks(1e-12 * knee, knee, 4.0));
    if xi_max > knee {
        let tail = quad::uniform_breaks(knee, xi_max, width);
        breaks.extend_from_slice(&tail[1..]);
    }
    let f = |xi: f64| (x * xi).cos() * (-s * xi.powf(alpha)).exp();
    let lo = gauss_legendre(spec.n_nodes);
    let hi = gauss_legendre(spec.n_nodes + 8);
    let (mut value, mut err, mut mass) = (0.0, 0.0, 0.0);
    for p in breaks.windows(2) {
        let a = hi.integrate(f, p[0], p[1]);
        let b = lo.integrate(f, p[0], p[1]);
        value += a;
        err += (a - b).abs();
        mass += hi.integrate(|xi| (-s * xi.powf(alpha)).exp(), p[0], p[1]);
    }
    let budget = spec.rel_tol * value.abs() + 1e-15 * mass;
    if err > budget || value <= 0.0 {
        return Err(Error::Accuracy {
            what: format!("cosine transform at x = {x}"),
            estimate: err / PI,
            budget: budget / PI,
        });
    }
    Ok(value / PI)
}

/// `p(s, x)`; see [`StableDensity::density`].
pub fn density(params: StableParams, s: f64, x: &[f64], spec: DensityEvalSpec) -> Result<f64> {
    StableDensity::new(params, spec)?.density(s, x)
}

/// `p(1, x)` by the Gaussian-mixture route.
pub fn density_via_subordination(
    params: StableParams,
    x: &[f64],
    spec: DensityEvalSpec,
) -> Result<f64> {
    StableDensity::new(params, spec)?.density_via_subordination(x)
}

/// `∂^k_{x_j} p(s, x)` through dimension lifting.
pub fn density_partial(
    params: StableParams,
    s: f64,
    x: &[f64],
    j: usize,
    k: usize,
    spec: DensityEvalSpec,
) -> Result<f64> {
    StableDensity::new(params, spec)?.partial(s, x, j, k)
}

/// Two-sided envelope `min(s^{-d/α}, s/|x|^{d+α})`.
pub fn envelope(params: StableParams, s: f64, x: &[f64]) -> Result<f64> {
    check_time(s)?;
    if x.len() != params.d {
        return Err(Error::Shape(format!(
            "point has {} coordinates, dimension is {}",
            x.len(),
            params.d
        )));
    }
    let d = params.d as f64;
    let a = params.alpha;
    let r = norm(x);
    let near = s.powf(-d / a);
    let far = if r == 0.0 {
        f64::INFINITY
    } else {
        s / r.powf(d + a)
    };
    Ok(near.min(far))
}

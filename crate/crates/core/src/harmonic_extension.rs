//! Brownian exit law, the kernel `q_t` and the extension semigroup `Q_t`.
//!
//! The vertical Brownian motion has generator `d²/dz²` (variance `2` per unit
//! time), so the hitting time of zero from height `t` has law
//! `μ_t(ds) = t/(2√π) e^{-t²/(4s)} s^{-3/2} ds` with Laplace transform
//! `e^{-t√λ}`. Subordinating `Y` by this law gives the kernel
//! `q_t(x) = ∫ p(s, x) μ_t(ds)`, whose Fourier transform is
//! `e^{-t|ξ|^{α/2}}`.
//!
//! Two routes to `q_t` exist. [`ExtensionKernel::qt_kernel`] integrates
//! `p(s, x)` against `μ_t` after the substitution `s = t²/(4w²)`, which turns
//! `μ_t` into `(2/√π) e^{-w²} dw`. The grid samplers instead write `q_t` as a
//! Gaussian mixture: composing the `α/2`-stable subordinator with `μ_t`
//! yields the `α/4`-stable subordinator at time `t`, whose nodes come from
//! [`PositiveStable::mixture`].

use std::f64::consts::PI;
use std::sync::Arc;

use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};
use crate::quad::{self, GaussLegendre};
use crate::special::erfc;
use crate::spectral::{self, FftPlan, GridSpec, SampledField};
use crate::stable_density::{
    DensityEvalSpec, GaussianMixture, PositiveStable, StableDensity, StableParams,
};

/// Law of the first time the vertical component started at `t` hits zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitDistribution {
    t: f64,
}

impl ExitDistribution {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain(format!(
                "starting height must be positive, got {t}"
            )));
        }
        Ok(Self { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn density(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::domain(format!("exit density needs s > 0, got {s}")));
        }
        let t = self.t;
        Ok(t / (2.0 * PI.sqrt()) * (-t * t / (4.0 * s)).exp() * s.powf(-1.5))
    }

    pub fn cdf(&self, s: f64) -> Result<f64> {
        if s < 0.0 || s.is_nan() {
            return Err(Error::domain(format!("exit cdf needs s >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        Ok(erfc(self.t / (2.0 * s.sqrt())))
    }

    /// Inverse of [`cdf`](Self::cdf) on `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!(
                "quantile level must lie in (0, 1), got {u}"
            )));
        }
        let y = erfc_inv(u);
        Ok(self.t * self.t / (4.0 * y * y))
    }
}

/// `μ_t` density at `s`.
pub fn exit_density(t: f64, s: f64) -> Result<f64> {
    ExitDistribution::new(t)?.density(s)
}

/// `μ_t((0, s]) = erfc(t/(2√s))`.
pub fn exit_cdf(t: f64, s: f64) -> Result<f64> {
    ExitDistribution::new(t)?.cdf(s)
}

/// `e^{-t|ξ|^{α/2}}` for a frequency vector of the parameter dimension.
pub fn qt_symbol(params: StableParams, t: f64, xi: &[f64]) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!(
            "extension height must be >= 0, got {t}"
        )));
    }
    if xi.len() != params.d() {
        return Err(Error::Shape(format!(
            "frequency has {} coordinates, dimension is {}",
            xi.len(),
            params.d()
        )));
    }
    let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(radial_symbol(params.alpha(), t, r))
}

pub(crate) fn radial_symbol(alpha: f64, t: f64, r: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    (-t * r.powf(0.5 * alpha)).exp()
}

/// The kernel `q_t` for fixed parameters and height.
#[derive(Debug, Clone)]
pub struct ExtensionKernel {
    params: StableParams,
    t: f64,
    density: StableDensity,
    mixture: Arc<GaussianMixture>,
}

impl ExtensionKernel {
    pub fn new(params: StableParams, t: f64, spec: DensityEvalSpec) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain(format!(
                "extension height must be positive, got {t}"
            )));
        }
        let density = StableDensity::new(params, spec)?;
        let beta = 0.25 * params.alpha();
        let law = PositiveStable::shared(beta)?;
        let mixture = Arc::new(law.mixture()?.scaled(t.powf(1.0 / beta)));
        Ok(Self {
            params,
            t,
            density,
            mixture,
        })
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Gaussian-mixture nodes `(σ, mass)` of `q_t`.
    pub fn mixture(&self) -> &GaussianMixture {
        &self.mixture
    }

    /// `q_t(x) = (2/√π) ∫_0^∞ p(t²/(4w²), x) e^{-w²} dw`.
    pub fn qt_kernel(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.params.d() {
            return Err(Error::Shape(format!(
                "point has {} coordinates, dimension is {}",
                x.len(),
                self.params.d()
            )));
        }
        let a = self.params.alpha();
        let d = self.params.d() as f64;
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let t = self.t;
        // in u = ln w the integrand decays like e^{u(1 + 2d/α)} on the left
        // and like exp(-e^{2u}) on the right
        let u_lo = -36.0 / (1.0 + 2.0 * d / a);
        let u_hi = 7.0f64.ln();
        let width = (0.5 * a).min(0.5);
        let rule = GaussLegendre::new(16);
        let mut sum = 0.0;
        for p in quad::uniform_breaks(u_lo, u_hi, width).windows(2) {
            for (u, w) in rule.mapped(p[0], p[1]) {
                let ww = u.exp();
                // s^{-1/α} with s = t²/(4w²)
                let inv_scale = (2.0 * ww / t).powf(2.0 / a);
                let unit = self
                    .density
                    .subordinated_radial(self.params.d(), r * inv_scale)?;
                sum += w * ww * (-ww * ww).exp() * inv_scale.powf(d) * unit;
            }
        }
        Ok(2.0 / PI.sqrt() * sum)
    }

    /// `q_t(x)` from the Gaussian mixture.
    pub fn qt_kernel_mixture(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.mixture.radial(self.params.d(), r)
    }

    fn require_line(&self) -> Result<()> {
        if self.params.d() != 1 {
            return Err(Error::domain("grid sampling of q_t is one-dimensional"));
        }
        Ok(())
    }

    /// `q_t` at the grid points, without periodization.
    pub fn sample(&self, grid: GridSpec) -> Result<SampledField> {
        self.require_line()?;
        SampledField::from_fn(grid, |x| self.mixture.radial(1, x))
    }

    /// The periodization `Σ_k q_t(x + kL)` at the grid points.
    pub fn sample_periodic(&self, grid: GridSpec) -> Result<SampledField> {
        self.require_line()?;
        let l = grid.length();
        let missing = (1.0 - self.mixture.total_mass()).max(0.0);
        let nodes: Vec<(f64, f64)> = self.mixture.nodes().filter(|n| n.1 > 0.0).collect();
        SampledField::from_fn(grid, |x| {
            let mut v = missing / l;
            for &(sigma, mass) in &nodes {
                v += mass * periodic_heat(sigma, x, l);
            }
            v
        })
    }

    /// `Q_t f` by direct periodic convolution with the sampled kernel,
    /// `Δ Σ_j q_t^{per}(x_i - x_j) f_j`. A validation route for [`extend`].
    pub fn convolve(&self, field: &SampledField) -> Result<SampledField> {
        let grid = *field.grid();
        let offsets = self.sample_periodic(GridSpec::new(grid.n(), grid.length(), 0.0)?)?;
        let k = offsets.values();
        let f = field.values();
        let n = grid.n();
        let dx = grid.spacing();
        let out = (0..n)
            .map(|i| dx * (0..n).map(|j| k[(i + n - j) % n] * f[j]).sum::<f64>())
            .collect();
        SampledField::new(grid, out)
    }
}

/// Periodic heat kernel `Σ_k (4πσ)^{-1/2} e^{-(x+kL)²/(4σ)}`.
pub(crate) fn periodic_heat(sigma: f64, x: f64, l: f64) -> f64 {
    let x = x - l * (x / l).round();
    if sigma.sqrt() < 0.25 * l {
        let reach = (160.0 * sigma).sqrt();
        let kmax = (reach / l).ceil() as i64 + 1;
        let norm = 1.0 / (4.0 * PI * sigma).sqrt();
        (-kmax..=kmax)
            .map(|k| {
                let y = x + k as f64 * l;
                (-y * y / (4.0 * sigma)).exp()
            })
            .sum::<f64>()
            * norm
    } else {
        let mut v = 1.0;
        let mut m = 1;
        loop {
            let q = 2.0 * PI * m as f64 / l;
            let e = (-sigma * q * q).exp();
            if e < 1e-18 {
                break;
            }
            v += 2.0 * e * (q * x).cos();
            m += 1;
        }
        v / l
    }
}

/// `q_t(x)`; builds an [`ExtensionKernel`] for a single evaluation.
pub fn qt_kernel(params: StableParams, t: f64, x: &[f64], spec: DensityEvalSpec) -> Result<f64> {
    ExtensionKernel::new(params, t, spec)?.qt_kernel(x)
}

/// `Q_t f` on the periodic grid: multiply the spectrum by `e^{-t|ξ|^{α/2}}`.
pub fn extend(field: &SampledField, params: StableParams, t: f64) -> Result<SampledField> {
    extend_with(&FftPlan::new(field.grid().n()), field, params, t)
}

pub fn extend_with(
    plan: &FftPlan,
    field: &SampledField,
    params: StableParams,
    t: f64,
) -> Result<SampledField> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "extension height must be >= 0, got {t}"
        )));
    }
    if params.d() != 1 {
        return Err(Error::domain("grid extension is one-dimensional"));
    }
    if t == 0.0 {
        return Ok(field.clone());
    }
    let a = params.alpha();
    spectral::apply_symbol_with(plan, field, |xi| radial_symbol(a, t, xi.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::dft;
    use proptest::prelude::*;

    fn line(alpha: f64) -> StableParams {
        StableParams::new(alpha, 1).unwrap()
    }

    fn bump(x: f64, c: f64, w: f64) -> f64 {
        let u = (x - c) / w;
        if u.abs() < 1.0 {
            (-1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        }
    }

    #[test]
    fn exit_density_values() {
        let v = exit_density(1.0, 0.5).unwrap();
        let want = 0.5 / PI.sqrt() * (-0.5f64).exp() * 2f64.powf(1.5);
        assert!((v - want).abs() < 1e-15);
        assert!((v - 0.483_941_4).abs() < 1e-7);
        // s^{-3/2} decay
        let a = exit_density(1.0, 1e6).unwrap();
        let b = exit_density(1.0, 4e6).unwrap();
        assert!((a / b - 8.0).abs() < 1e-5);
        assert!(exit_density(0.0, 1.0).is_err());
        assert!(exit_density(1.0, 0.0).is_err());
    }

    #[test]
    fn exit_density_integrates_to_one() {
        for &t in &[0.5, 1.0, 2.0] {
            // ∫ μ_t(ds) in v = ln s
            let rule = GaussLegendre::new(20);
            let m = rule.composite(
                |v: f64| {
                    let s = v.exp();
                    s * exit_density(t, s).unwrap()
                },
                &quad::uniform_breaks(-12.0, 120.0, 0.5),
            );
            assert!((m - 1.0).abs() < 1e-8, "t = {t}: {m}");
        }
    }

    #[test]
    fn exit_cdf_values() {
        assert!((exit_cdf(1.0, 1.0).unwrap() - 0.479_500_122_186_953_5).abs() < 1e-9);
        assert!((exit_cdf(2.0, 1.0).unwrap() - 0.157_299_207_050_285_1).abs() < 1e-9);
        assert_eq!(exit_cdf(1.0, 0.0).unwrap(), 0.0);
        assert!(exit_cdf(1.0, 1e12).unwrap() > 1.0 - 1e-5);
    }

    #[test]
    fn cdf_derivative_is_density() {
        let h = 1e-5;
        for i in 0..50 {
            let s = 0.1 + 9.9 * i as f64 / 49.0;
            let fd = (exit_cdf(1.0, s + h).unwrap() - exit_cdf(1.0, s - h).unwrap()) / (2.0 * h);
            assert!((fd - exit_density(1.0, s).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let law = ExitDistribution::new(1.3).unwrap();
        for &u in &[1e-6, 0.1, 0.5, 0.9, 0.999] {
            let s = law.quantile(u).unwrap();
            assert!((law.cdf(s).unwrap() - u).abs() < 1e-12 * u.max(1e-3) * 1e3);
        }
    }

    #[test]
    fn symbol_examples() {
        let p = line(1.0);
        assert_eq!(qt_symbol(p, 0.0, &[3.0]).unwrap(), 1.0);
        assert_eq!(qt_symbol(p, 2.0, &[0.0]).unwrap(), 1.0);
        assert!((qt_symbol(p, 1.0, &[4.0]).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        assert!(qt_symbol(p, -1.0, &[4.0]).is_err());
    }

    #[test]
    fn two_routes_to_the_kernel_agree() {
        for &(alpha, t) in &[(1.0, 1.0), (0.5, 0.5), (1.5, 2.0)] {
            let k = ExtensionKernel::new(line(alpha), t, Default::default()).unwrap();
            for &x in &[0.0, 0.05, 0.7, 3.0, 40.0] {
                let a = k.qt_kernel(&[x]).unwrap();
                let b = k.qt_kernel_mixture(&[x]);
                assert!(
                    (a / b - 1.0).abs() < 1e-6,
                    "α {alpha} t {t} x {x}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn kernel_is_half_index_stable_density() {
        // e^{-t|ξ|^{α/2}} is the symbol of the symmetric α/2-stable law at time t
        let k = ExtensionKernel::new(line(1.0), 1.0, Default::default()).unwrap();
        for &x in &[0.0, 0.5, 2.0, 10.0] {
            let want =
                crate::stable_density::cosine_transform(0.5, 1.0, x, &DensityEvalSpec::default())
                    .unwrap();
            let got = k.qt_kernel_mixture(&[x]);
            assert!((got / want - 1.0).abs() < 1e-7, "x {x}: {got} vs {want}");
        }
    }

    #[test]
    fn sampled_kernel_transform_matches_symbol() {
        let k = ExtensionKernel::new(line(1.0), 1.0, Default::default()).unwrap();
        let grid = GridSpec::new(256, 20.0, 0.0).unwrap();
        let q = k.sample_periodic(grid).unwrap();
        let spec = dft(&q);
        let dx = grid.spacing();
        for b in 4..=64 {
            let got = spec.coeffs()[b].re * dx;
            let want = (-grid.frequency(b).abs().sqrt()).exp();
            assert!((got - want).abs() < 1e-3, "bin {b}: {got} vs {want}");
        }
        let mass = q.sum() * dx;
        assert!((mass - 1.0).abs() < 1e-3);
    }

    #[test]
    fn kernel_is_radially_nonincreasing() {
        let k = ExtensionKernel::new(line(0.7), 0.8, Default::default()).unwrap();
        let grid = GridSpec::new(128, 16.0, 0.0).unwrap();
        let q = k.sample(grid).unwrap();
        for w in q.values()[..64].windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn periodic_heat_branches_agree() {
        let l = 3.0;
        for &sigma in &[0.1f64, 0.3, 0.5625] {
            for &x in &[0.0, 0.4, 1.5] {
                let kmax = 30;
                let image: f64 = (-kmax..=kmax)
                    .map(|k| {
                        let y = x + k as f64 * l;
                        (-y * y / (4.0 * sigma)).exp() / (4.0 * PI * sigma).sqrt()
                    })
                    .sum();
                assert!((periodic_heat(sigma, x, l) - image).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn extend_fixes_constants_and_identity() {
        let g = GridSpec::centered(64, 10.0).unwrap();
        let one = SampledField::from_fn(g, |_| 1.0).unwrap();
        let e = extend(&one, line(1.0), 3.0).unwrap();
        assert!(e.max_abs_diff(&one).unwrap() < 1e-14);
        let f = SampledField::from_fn(g, |x| bump(x, 0.0, 2.0)).unwrap();
        assert_eq!(
            extend(&f, line(1.0), 0.0)
                .unwrap()
                .max_abs_diff(&f)
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn extension_preserves_mass() {
        let g = GridSpec::centered(256, 40.0).unwrap();
        let f = SampledField::from_fn(g, |x| bump(x, 0.0, 0.5)).unwrap();
        let e = extend(&f, line(1.0), 1.0).unwrap();
        assert!((e.sum() / f.sum() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn convolution_route_matches_spectral() {
        for &(alpha, t) in &[(1.0, 1.0), (1.6, 0.5)] {
            let g = GridSpec::centered(256, 20.0).unwrap();
            let f = SampledField::from_fn(g, |x| bump(x, 0.5, 2.0)).unwrap();
            let k = ExtensionKernel::new(line(alpha), t, Default::default()).unwrap();
            let a = k.convolve(&f).unwrap();
            let b = extend(&f, line(alpha), t).unwrap();
            assert!(a.max_abs_diff(&b).unwrap() < 1e-2 * f.sup_norm());
        }
    }

    fn field() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0f64..5.0, 64)
    }

    proptest! {
        #[test]
        fn semigroup(v in field(), alpha in 0.2f64..1.95, t in 0.0f64..3.0, s in 0.0f64..3.0) {
            let g = GridSpec::centered(64, 12.0).unwrap();
            let f = SampledField::new(g, v).unwrap();
            let p = line(alpha);
            let two = extend(&extend(&f, p, t).unwrap(), p, s).unwrap();
            let one = extend(&f, p, t + s).unwrap();
            prop_assert!(two.max_abs_diff(&one).unwrap() <= 1e-10 * f.sup_norm().max(1e-300));
        }

        #[test]
        fn contraction(c in -3.0f64..3.0, w in 1.0f64..4.0, alpha in 0.2f64..1.95, t in 0.0f64..3.0) {
            // nonnegative kernel: sup norm cannot grow for smooth data
            let g = GridSpec::centered(128, 20.0).unwrap();
            let f = SampledField::from_fn(g, |x| bump(x, c, w)).unwrap();
            let e = extend(&f, line(alpha), t).unwrap();
            prop_assert!(e.sup_norm() <= f.sup_norm() + 1e-10);
        }
    }
}

//! Periodic grids, sampled fields and the discrete Fourier transform.
//!
//! Conventions, fixed for the whole crate:
//!
//! * a grid of `n` points (power of two, `n >= 16`) covers one period `L`
//!   starting at `origin`, with spacing `L / n`;
//! * bin `k` carries the angular frequency `2πk'/L` where `k'` is `k` for
//!   `k < n/2` and `k - n` otherwise, so frequencies run over
//!   `-n/2, ..., n/2 - 1`;
//! * the forward transform is the unnormalized sum
//!   `F_k = Σ_j f_j e^{-2πi jk/n}` and the inverse carries the `1/n`.
//!   A constant field `c` therefore has a single nonzero bin `F_0 = c·n`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    length: f64,
    origin: f64,
}

impl GridSpec {
    pub fn new(n: usize, length: f64, origin: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::domain(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) || !origin.is_finite() {
            return Err(Error::domain(format!(
                "grid period must be positive and finite, got {length}"
            )));
        }
        Ok(Self { n, length, origin })
    }

    /// Grid of `n` points centred on zero.
    pub fn centered(n: usize, length: f64) -> Result<Self> {
        Self::new(n, length, -0.5 * length)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin + self.spacing() * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Signed integer frequency index of bin `k`.
    pub fn wavenumber(&self, k: usize) -> i64 {
        let n = self.n as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Angular frequency of bin `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        2.0 * PI * self.wavenumber(k) as f64 / self.length
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::Shape(format!(
                "grid mismatch: {self:?} vs {other:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite sample at index {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().map(f).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    pub(crate) fn from_parts_unchecked(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid `L^p` norm `(Δ Σ |f_j|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (self.grid.spacing() * s).powf(1.0 / p)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Grid inner product `Δ Σ f_j g_j`.
    pub fn inner(&self, other: &SampledField) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self.grid.spacing()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>())
    }

    pub fn scale(&self, a: f64) -> SampledField {
        Self::from_parts_unchecked(self.grid, self.values.iter().map(|v| a * v).collect())
    }

    /// `a·self + other`.
    pub fn axpy(&self, a: f64, other: &SampledField) -> Result<SampledField> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_parts_unchecked(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + y)
                .collect(),
        ))
    }

    pub fn max_abs_diff(&self, other: &SampledField) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Periodic linear interpolation at an arbitrary real position.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.grid.n();
        let u = (x - self.grid.origin()) / self.grid.spacing();
        let u = u.rem_euclid(n as f64);
        let i = (u.floor() as usize).min(n - 1);
        let t = u - i as f64;
        let j = (i + 1) % n;
        (1.0 - t) * self.values[i] + t * self.values[j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::Shape(format!(
                "{} coefficients for a grid of {} points",
                coeffs.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }
}

/// Radix-2 FFT plan. The twiddle table is immutable once built and can be
/// shared across threads.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    twiddles: Arc<Vec<Complex64>>,
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(
            n.is_power_of_two() && n >= 2,
            "FFT size must be a power of two"
        );
        let twiddles = (0..n / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        Self {
            n,
            twiddles: Arc::new(twiddles),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place unnormalized forward transform.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    /// In-place inverse transform including the `1/n` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
        let s = 1.0 / self.n as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n);
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..len / 2 {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + len / 2] * w;
                    data[start + k] = a + b;
                    data[start + k + len / 2] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

/// Forward transform of a real field.
pub fn dft(field: &SampledField) -> Spectrum {
    dft_with(&FftPlan::new(field.grid.n()), field)
}

pub fn dft_with(plan: &FftPlan, field: &SampledField) -> Spectrum {
    let mut data: Vec<Complex64> = field
        .values
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    plan.forward(&mut data);
    Spectrum {
        grid: field.grid,
        coeffs: data,
    }
}

/// Inverse transform demanding a real result.
///
/// Fails with a symmetry error when the imaginary residue exceeds
/// `1e-10` of the largest real sample.
pub fn idft(spec: &Spectrum) -> Result<SampledField> {
    idft_with(&FftPlan::new(spec.grid.n()), spec)
}

pub fn idft_with(plan: &FftPlan, spec: &Spectrum) -> Result<SampledField> {
    let mut data = spec.coeffs.clone();
    plan.inverse(&mut data);
    let scale = data.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    let residue = data.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    let limit = 1e-10 * scale.max(f64::MIN_POSITIVE);
    if residue > limit {
        return Err(Error::Symmetry { residue, limit });
    }
    SampledField::new(spec.grid, data.iter().map(|z| z.re).collect())
}

/// Multiplies the spectrum of `field` by `symbol(ξ)` at each grid frequency.
pub fn apply_symbol(field: &SampledField, symbol: impl Fn(f64) -> f64) -> Result<SampledField> {
    apply_symbol_with(&FftPlan::new(field.grid.n()), field, symbol)
}

pub fn apply_symbol_with(
    plan: &FftPlan,
    field: &SampledField,
    symbol: impl Fn(f64) -> f64,
) -> Result<SampledField> {
    let grid = field.grid;
    let mut spec = dft_with(plan, field);
    for (k, c) in spec.coeffs.iter_mut().enumerate() {
        let xi = grid.frequency(k);
        let m = symbol(xi);
        if !m.is_finite() {
            return Err(Error::domain(format!("symbol is not finite at ξ = {xi}")));
        }
        *c *= m;
    }
    let mut data = spec.coeffs;
    plan.inverse(&mut data);
    Ok(SampledField::from_parts_unchecked(
        grid,
        data.into_iter().map(|z| z.re).collect(),
    ))
}

/// Bin-wise transfer ratio `DFT(output)[k] / DFT(input)[k]`.
pub fn transfer_ratio(input: &SampledField, output: &SampledField) -> Result<Vec<Complex64>> {
    input.grid.check_same(&output.grid)?;
    let plan = FftPlan::new(input.grid.n());
    let a = dft_with(&plan, input);
    let b = dft_with(&plan, output);
    Ok(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| y / x).collect())
}

/// Smooth bump `exp(-1/(1-u²))`, `u = (x - center)/half_width`, supported on
/// `|u| < 1` and scaled to peak value 1.
pub fn bump(x: f64, center: f64, half_width: f64) -> f64 {
    let u = (x - center) / half_width;
    if u.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

/// Circular shift: the result at `x_j` is `f(x_{j+shift})`, i.e. `τ_h f`
/// with `h = shift·Δ`.
pub fn translate(field: &SampledField, shift: i64) -> SampledField {
    let n = field.grid.n() as i64;
    let s = shift.rem_euclid(n) as usize;
    let mut values = field.values.clone();
    values.rotate_left(s);
    SampledField::from_parts_unchecked(field.grid, values)
}

//! The operator
//! `Tf(x) = ∫_0^∞ t r(t) ∫ (2f_{2t}(x) - f_{2t}(x+h) - f_{2t}(x-h)) |h|^{-1-α} dh dt`
//! on a periodic grid, its symbol, the square function `G` and the pairing
//! identity behind the `L^p` bound.
//!
//! The h-integral runs over the lattice `h = kΔ`. Under the periodic wrap a
//! lattice sum folds onto residues `j = k mod n`, so every rule reduces to a
//! weight per residue, and untruncated tails are Hurwitz zeta values.
//! Two corrections are available near `h = 0`
//! (`SingularCell::TaylorCorrect`):
//!
//! * balls of radius at most four cells are integrated spectrally, from the
//!   exact `ψ(t, ξ) = ∫_{|h|<R} 4 sin²(ξh/2) |h|^{-1-α} dh`;
//! * larger balls keep the lattice rule, minus the small-`h` defect of the
//!   lattice sum, which is a power series in `σ = 2 - 2cos(ξΔ)` with zeta
//!   coefficients, i.e. a polynomial in the discrete second difference. The
//!   far end `|h| = R` gets a quadratic endpoint rule.
//!
//! With `SingularCell::Omit` the cell `|h| < Δ` is simply dropped.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, GaussLegendre};
use crate::special::{hurwitz_zeta, zeta};
use crate::spectral::{FftPlan, GridSpec, SampledField};
use crate::stable_density::StableParams;

/// Radii up to this many cells are handled spectrally under `TaylorCorrect`.
const SMALL_BALL_CELLS: f64 = 4.0;
/// Degree in `σ` of the small-`h` lattice correction.
const CORRECTION_ORDER: usize = 6;
/// Relative accuracy demanded of the t-rule on `∫ t e^{-2tλ} dt`.
const T_RULE_BUDGET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    ConstantOne,
    ExpDecay,
    Tabulated,
}

/// The bounded profile `r(t)`.
///
/// A tabulated profile is linear between nodes and constant beyond the ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierProfile {
    kind: ProfileKind,
    table: Option<(Vec<f64>, Vec<f64>)>,
    sup_bound: f64,
}

impl MultiplierProfile {
    pub fn constant_one() -> Self {
        Self {
            kind: ProfileKind::ConstantOne,
            table: None,
            sup_bound: 1.0,
        }
    }

    /// `r(t) = e^{-t}`.
    pub fn exp_decay() -> Self {
        Self {
            kind: ProfileKind::ExpDecay,
            table: None,
            sup_bound: 1.0,
        }
    }

    pub fn tabulated(t: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if t.len() < 2 || t.len() != values.len() {
            return Err(Error::domain(
                "a tabulated profile needs at least two (t, value) pairs of equal length",
            ));
        }
        if t.iter().chain(&values).any(|v| !v.is_finite()) || t[0] < 0.0 {
            return Err(Error::domain(
                "tabulated profile must be finite with t >= 0",
            ));
        }
        if !t.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::domain(
                "tabulated t-grid must be strictly increasing",
            ));
        }
        let sup_bound = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if sup_bound == 0.0 {
            return Err(Error::domain("tabulated profile vanishes identically"));
        }
        Ok(Self {
            kind: ProfileKind::Tabulated,
            table: Some((t, values)),
            sup_bound,
        })
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn table(&self) -> Option<(&[f64], &[f64])> {
        self.table
            .as_ref()
            .map(|(t, v)| (t.as_slice(), v.as_slice()))
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.kind {
            ProfileKind::ConstantOne => 1.0,
            ProfileKind::ExpDecay => (-t).exp(),
            ProfileKind::Tabulated => {
                let (ts, vs) = self.table().expect("tabulated profile carries a table");
                let last = ts.len() - 1;
                if t <= ts[0] {
                    return vs[0];
                }
                if t >= ts[last] {
                    return vs[last];
                }
                let i = ts.partition_point(|&x| x <= t) - 1;
                let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
                vs[i] + w * (vs[i + 1] - vs[i])
            }
        }
    }

    /// `∫_0^∞ t r(t) e^{-2tλ} dt` for `λ > 0`.
    pub fn moment(&self, lambda: f64) -> f64 {
        let a = 2.0 * lambda;
        match self.kind {
            ProfileKind::ConstantOne => 1.0 / (a * a),
            ProfileKind::ExpDecay => 1.0 / ((1.0 + a) * (1.0 + a)),
            ProfileKind::Tabulated => {
                let (ts, vs) = self.table().expect("tabulated profile carries a table");
                let last = ts.len() - 1;
                let gl = GaussLegendre::new(16);
                let cut = ts[0] + 750.0 / a;
                let mut sum = vs[0] * t_exp_moment(a, 0.0, ts[0]);
                for i in 0..last {
                    let (lo, hi) = (ts[i], ts[i + 1].min(cut));
                    if lo >= hi {
                        break;
                    }
                    let breaks = quad::uniform_breaks(lo, hi, (1.0 / a).max((hi - lo) / 4096.0));
                    sum += gl.composite(|t| t * self.eval(t) * (-a * t).exp(), &breaks);
                }
                let tl = ts[last];
                sum + vs[last] * (-a * tl).exp() * (tl / a + 1.0 / (a * a))
            }
        }
    }
}

/// `∫_0^x t e^{-at} dt`.
fn t_exp_primitive(a: f64, x: f64) -> f64 {
    let y = a * x;
    if y < 1e-3 {
        x * x * (0.5 - y / 3.0 + y * y / 8.0)
    } else {
        -(-y).exp_m1() / (a * a) - x * (-y).exp() / a
    }
}

fn t_exp_moment(a: f64, lo: f64, hi: f64) -> f64 {
    t_exp_primitive(a, hi) - t_exp_primitive(a, lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HPolicy {
    /// `|h| < t^{2/α}`.
    Truncated,
    /// All `h`, periodically folded.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularCell {
    Omit,
    TaylorCorrect,
}

/// The t-quadrature: Gauss–Legendre 8 on `ceil(n_t/8)` geometric panels of
/// `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TQuadSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    pub h_policy: HPolicy,
    pub singular_cell: SingularCell,
}

impl TQuadSpec {
    pub fn new(
        t_min: f64,
        t_max: f64,
        n_t: usize,
        h_policy: HPolicy,
        singular_cell: SingularCell,
    ) -> Result<Self> {
        let q = Self {
            t_min,
            t_max,
            n_t,
            h_policy,
            singular_cell,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return Err(Error::domain(format!(
                "need 0 < t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if self.n_t < 8 {
            return Err(Error::domain(format!(
                "n_t must be at least 8, got {}",
                self.n_t
            )));
        }
        Ok(())
    }

    /// Defaults for a grid: `t_min = 10⁻³ Δ^{α/2}`, `t_max` the root of
    /// `e^{-2tλ₁} t · sup_bound = 10⁻⁶` with `λ₁ = (2π/L)^{α/2}`, and four
    /// panels per e-fold of `t`.
    pub fn for_grid(
        grid: &GridSpec,
        params: StableParams,
        sup_bound: f64,
        h_policy: HPolicy,
        singular_cell: SingularCell,
    ) -> Result<Self> {
        if !(sup_bound > 0.0) {
            return Err(Error::domain("sup_bound must be positive"));
        }
        let a = params.alpha();
        let t_min = 1e-3 * grid.spacing().powf(0.5 * a);
        let lam1 = (2.0 * PI / grid.length()).powf(0.5 * a);
        let mut t = 1.0f64;
        for _ in 0..100 {
            t = (((t * sup_bound).ln() + 1e6f64.ln()) / (2.0 * lam1)).max(2.0 * t_min);
        }
        let panels = (4.0 * (t / t_min).ln()).ceil() as usize;
        Self::new(t_min, t, 8 * panels.max(1), h_policy, singular_cell)
    }

    fn panels(&self) -> usize {
        self.n_t.div_ceil(8)
    }

    /// (node, weight) pairs of the t-rule.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let m = self.panels();
        let q = (self.t_max / self.t_min).powf(1.0 / m as f64);
        let mut breaks: Vec<f64> = (0..m).map(|i| self.t_min * q.powi(i as i32)).collect();
        breaks.push(self.t_max);
        GaussLegendre::new(8).composite_nodes(&breaks)
    }

    /// The rule restricted to `[t_min, t_split]` and `[t_split, t_max]`,
    /// keeping the panel density.
    pub fn split(&self, t_split: f64) -> Result<(Self, Self)> {
        if !(t_split > self.t_min && t_split < self.t_max) {
            return Err(Error::domain(format!(
                "split point {t_split} outside ({}, {})",
                self.t_min, self.t_max
            )));
        }
        let density = self.panels() as f64 / (self.t_max / self.t_min).ln();
        let part = |lo: f64, hi: f64| 8 * ((density * (hi / lo).ln()).ceil() as usize).max(1);
        Ok((
            Self {
                t_max: t_split,
                n_t: part(self.t_min, t_split),
                ..*self
            },
            Self {
                t_min: t_split,
                n_t: part(t_split, self.t_max),
                ..*self
            },
        ))
    }
}

/// `x ↦ 2f(x) - f(x+h) - f(x-h)` with `h = h_cells·Δ`, periodic.
pub fn second_difference(f2t: &SampledField, h_cells: usize) -> Result<SampledField> {
    let n = f2t.grid().n();
    if h_cells == 0 || h_cells >= n / 2 {
        return Err(Error::domain(format!(
            "shift of {h_cells} cells must lie in [1, {})",
            n / 2
        )));
    }
    let mut w = vec![0.0; n / 2 + 1];
    w[h_cells] = 1.0;
    let out = second_differences(&w, f2t.values());
    Ok(SampledField::from_parts_unchecked(*f2t.grid(), out))
}

/// `Σ_j w[j] (2f - τ_j f - τ_{-j} f)` for `j = 1..=n/2`.
fn second_differences(w: &[f64], f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for (j, &wj) in w.iter().enumerate().skip(1) {
        if wj == 0.0 {
            continue;
        }
        for i in 0..n {
            let up = f[if i + j < n { i + j } else { i + j - n }];
            let down = f[if i >= j { i - j } else { i + n - j }];
            out[i] += wj * (2.0 * f[i] - up - down);
        }
    }
    out
}

/// `Φ(X) = ∫_0^X (1 - cos u) u^{-1-α} du`, with the oscillatory part
/// pre-integrated on panels of width ≤ π/2 over `[2, 200]`.
struct Phi {
    alpha: f64,
    phi_lo: f64,
    breaks: Vec<f64>,
    cum: Vec<f64>,
    limit: f64,
    gl: GaussLegendre,
}

const PHI_LO: f64 = 2.0;
const PHI_HI: f64 = 200.0;

impl Phi {
    fn new(alpha: f64) -> Self {
        let p = 1.0 + alpha;
        let gl = GaussLegendre::new(16);
        let breaks = quad::uniform_breaks(PHI_LO, PHI_HI, 0.5 * PI);
        let mut cum = vec![0.0];
        for w in breaks.windows(2) {
            let last = *cum.last().unwrap();
            cum.push(last + gl.integrate(|u| u.cos() * u.powf(-p), w[0], w[1]));
        }
        let phi_lo = phi_series(alpha, PHI_LO);
        let j_lo = cum.last().unwrap() + cos_tail(p, PHI_HI);
        let limit = phi_lo + PHI_LO.powf(-alpha) / alpha - j_lo;
        Self {
            alpha,
            phi_lo,
            breaks,
            cum,
            limit,
            gl,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let a = self.alpha;
        if x <= 0.0 {
            0.0
        } else if x <= PHI_LO {
            phi_series(a, x)
        } else if x >= PHI_HI {
            self.limit - x.powf(-a) / a + cos_tail(1.0 + a, x)
        } else {
            let h = self.breaks[1] - self.breaks[0];
            let i = (((x - PHI_LO) / h) as usize).min(self.breaks.len() - 2);
            let p = 1.0 + a;
            let partial = self.cum[i]
                + self
                    .gl
                    .integrate(|u| u.cos() * u.powf(-p), self.breaks[i], x);
            self.phi_lo + (PHI_LO.powf(-a) - x.powf(-a)) / a - partial
        }
    }

    /// `ψ(t, ξ)` with truncation radius `R = t^{2/α}`.
    fn psi(&self, xi: f64, radius: f64) -> f64 {
        let x = xi.abs();
        4.0 * x.powf(self.alpha) * self.eval(x * radius)
    }

    fn psi_full(&self, xi: f64) -> f64 {
        4.0 * xi.abs().powf(self.alpha) * self.limit
    }
}

fn phi_series(alpha: f64, x: f64) -> f64 {
    let x2 = x * x;
    let mut pow = x2; // x^{2m}
    let mut fact = 2.0; // (2m)!
    let mut sum = 0.0;
    for m in 1..60 {
        let mf = m as f64;
        let term = pow / (fact * (2.0 * mf - alpha));
        sum += if m % 2 == 1 { term } else { -term };
        if term < 1e-17 * sum.abs() {
            break;
        }
        pow *= x2;
        fact *= (2.0 * mf + 1.0) * (2.0 * mf + 2.0);
    }
    sum * x.powf(-alpha)
}

/// `∫_x^∞ cos u · u^{-p} du` by repeated integration by parts, `x ≥ 200`.
fn cos_tail(p: f64, x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    let xp = x.powf(-p);
    xp * (-s + p * c / x + p * (p + 1.0) * s / (x * x)
        - p * (p + 1.0) * (p + 2.0) * c / (x * x * x))
}

fn require_line(params: StableParams) -> Result<()> {
    if params.d() != 1 {
        return Err(Error::domain(
            "the operator is evaluated in one dimension only",
        ));
    }
    Ok(())
}

fn require_operator(params: StableParams) -> Result<()> {
    require_line(params)?;
    if params.alpha() >= 1.0 {
        return Err(Error::domain(format!(
            "T is well defined only for alpha in (0, 1), got {}",
            params.alpha()
        )));
    }
    Ok(())
}

/// `c = 2^{2-α} ∫_ℝ sin²(h) |h|^{-1-α} dh` (`d = 1`).
pub fn constant_c(params: StableParams) -> Result<f64> {
    require_line(params)?;
    Ok(4.0 * Phi::new(params.alpha()).limit)
}

/// `m(ξ) = c |ξ|^α ∫_0^∞ t r(t) e^{-2t|ξ|^{α/2}} dt`, with `m(0) = 0`.
pub fn symbol_m(xi: f64, r: &MultiplierProfile, params: StableParams) -> Result<f64> {
    require_line(params)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    let a = params.alpha();
    let x = xi.abs();
    Ok(constant_c(params)? * x.powf(a) * r.moment(x.powf(0.5 * a)))
}

/// `∫ t r(t) e^{-2t|ξ|^{α/2}} ψ(t, ξ) dt` over `[t_min, t_max]` of `quad`,
/// with `m(0) = 0`.
pub fn symbol_m_truncated(
    xi: f64,
    r: &MultiplierProfile,
    params: StableParams,
    quad: &TQuadSpec,
) -> Result<f64> {
    require_line(params)?;
    quad.validate()?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    let phi = Phi::new(params.alpha());
    Ok(truncated_symbol_with(&phi, xi, r, params.alpha(), quad))
}

fn truncated_symbol_with(
    phi: &Phi,
    xi: f64,
    r: &MultiplierProfile,
    alpha: f64,
    quad: &TQuadSpec,
) -> f64 {
    let lam = xi.abs().powf(0.5 * alpha);
    let hi = quad.t_max.min(quad.t_min + 40.0 / lam);
    if hi <= quad.t_min {
        return 0.0;
    }
    let panels = ((hi / quad.t_min).ln() / 0.05).ceil().max(1.0) as usize;
    let q = (hi / quad.t_min).powf(1.0 / panels as f64);
    let mut breaks: Vec<f64> = (0..panels).map(|i| quad.t_min * q.powi(i as i32)).collect();
    breaks.push(hi);
    GaussLegendre::new(8).composite(
        |t| t * r.eval(t) * (-2.0 * t * lam).exp() * phi.psi(xi, t.powf(2.0 / alpha)),
        &breaks,
    )
}

/// Coefficients `c_m` with `Σ_{k≥1} (1 - cos kθ) k^{-s} = A θ^α + Σ_m c_m σ^m`,
/// `σ = 2 - 2cos θ`, truncated at degree `order`.
fn correction_coefficients(s: f64, order: usize) -> Vec<f64> {
    // θ² = 2 Σ σ^n / (n² C(2n, n))
    let mut theta2 = vec![0.0; order + 1];
    let mut binom = 1.0;
    for n in 1..=order {
        let nf = n as f64;
        binom *= (2.0 * nf - 1.0) * 2.0 / nf;
        theta2[n] = 2.0 / (nf * nf * binom);
    }
    let mul = |a: &[f64], b: &[f64]| {
        let mut c = vec![0.0; order + 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate().take(order + 1 - i) {
                c[i + j] += x * y;
            }
        }
        c
    };
    let mut out = vec![0.0; order + 1];
    let mut power = vec![0.0; order + 1];
    power[0] = 1.0;
    let mut fact = 1.0;
    for m in 1..=order {
        power = mul(&power, &theta2);
        let mf = m as f64;
        fact *= (2.0 * mf - 1.0) * 2.0 * mf;
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let e = sign * zeta(s - 2.0 * mf) / fact;
        for (o, p) in out.iter_mut().zip(&power) {
            *o += e * p;
        }
    }
    out
}

/// Per-grid data shared by the operator and the square function.
struct Lattice {
    n: usize,
    alpha: f64,
    s: f64,
    delta: f64,
    plan: FftPlan,
    xi: Vec<f64>,
    lambda: Vec<f64>,
    /// Σ c_m σ_k^m per bin.
    defect: Vec<f64>,
    /// ζ(s, j/n) for j = 1..n-1.
    zeta_res: Vec<f64>,
}

enum Radius {
    Infinite,
    Finite(f64),
}

impl Lattice {
    fn new(grid: GridSpec, alpha: f64) -> Self {
        let n = grid.n();
        let s = 1.0 + alpha;
        let delta = grid.spacing();
        let xi: Vec<f64> = (0..n).map(|k| grid.frequency(k)).collect();
        let lambda = xi.iter().map(|x| x.abs().powf(0.5 * alpha)).collect();
        let c = correction_coefficients(s, CORRECTION_ORDER);
        let defect = xi
            .iter()
            .map(|x| {
                let sigma = 2.0 - 2.0 * (x * delta).cos();
                c.iter().rev().fold(0.0, |acc, cm| acc * sigma + cm)
            })
            .collect();
        let zeta_res = (0..n)
            .map(|j| {
                if j == 0 {
                    0.0
                } else {
                    hurwitz_zeta(s, j as f64 / n as f64)
                }
            })
            .collect();
        Self {
            n,
            alpha,
            s,
            delta,
            plan: FftPlan::new(n),
            xi,
            lambda,
            defect,
            zeta_res,
        }
    }

    fn forward(&self, f: &SampledField) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.plan.forward(&mut data);
        data
    }

    fn inverse(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.plan.inverse(&mut spec);
        spec.into_iter().map(|z| z.re).collect()
    }

    fn damped(&self, fhat: &[Complex64], t: f64, factor: impl Fn(usize) -> Complex64) -> Vec<f64> {
        let spec = fhat
            .iter()
            .enumerate()
            .map(|(k, c)| c * (-t * self.lambda[k]).exp() * factor(k))
            .collect();
        self.inverse(spec)
    }

    /// Residue weights of `Σ_{1≤k≤bulk} k^{-s} + Σ_ends ω k^{-s}`.
    fn fold(&self, bulk: Option<f64>, ends: &[(f64, f64)]) -> Vec<f64> {
        let n = self.n;
        let nf = n as f64;
        let ns = nf.powf(-self.s);
        let mut b = vec![0.0; n];
        match bulk {
            None => {
                for j in 1..n {
                    b[j] = ns * self.zeta_res[j];
                }
            }
            Some(kb) if kb < nf => {
                for k in 1..=(kb as usize) {
                    b[k] += (k as f64).powf(-self.s);
                }
            }
            Some(kb) => {
                for j in 1..n {
                    let a = j as f64 / nf;
                    let count = ((kb - j as f64) / nf).floor() + 1.0;
                    b[j] = ns * (self.zeta_res[j] - hurwitz_zeta(self.s, a + count));
                }
            }
        }
        for &(k, w) in ends {
            if k < 2f64.powi(52) {
                let res = (k % nf) as usize;
                if res != 0 {
                    b[res] += w * k.powf(-self.s);
                }
            }
        }
        b
    }

    /// Unscaled residue weights of the h-rule for one radius, or `None` if
    /// the rule has no nodes.
    fn rule(&self, radius: Radius, cell: SingularCell) -> Option<Vec<f64>> {
        let r = match radius {
            Radius::Infinite => return Some(self.fold(None, &[])),
            Radius::Finite(r) => r / self.delta,
        };
        match cell {
            SingularCell::Omit => {
                let kmax = r.ceil() - 1.0;
                (kmax >= 1.0).then(|| self.fold(Some(kmax), &[]))
            }
            SingularCell::TaylorCorrect => {
                let kp = r.ceil();
                let u = kp - r;
                Some(self.fold(
                    Some(kp - 2.0),
                    &[(kp - 1.0, 1.0 - 0.5 * u * u), (kp, 0.5 - u + 0.5 * u * u)],
                ))
            }
        }
    }

    /// Combines residues `j` and `n - j` into weights for `j = 1..=n/2`.
    fn pair(&self, b: &[f64], scale: f64) -> Vec<f64> {
        let half = self.n / 2;
        let mut w = vec![0.0; half + 1];
        for j in 1..half {
            w[j] = scale * (b[j] + b[self.n - j]);
        }
        w[half] = scale * b[half];
        w
    }

    fn is_small(&self, radius: f64, cell: SingularCell) -> bool {
        cell == SingularCell::TaylorCorrect && radius <= SMALL_BALL_CELLS * self.delta
    }

    fn check_t_rule(&self, nodes: &[(f64, f64)], quad: &TQuadSpec) -> Result<()> {
        let lam_hi = self.lambda[self.n / 2];
        let lam_lo = self.lambda[1];
        for lam in [lam_lo, lam_hi] {
            let rule: f64 = nodes
                .iter()
                .map(|&(t, w)| w * t * (-2.0 * t * lam).exp())
                .sum();
            let exact = t_exp_moment(2.0 * lam, quad.t_min, quad.t_max);
            let err = (rule - exact).abs();
            if err > T_RULE_BUDGET * exact {
                return Err(Error::Accuracy {
                    what: "t-quadrature".into(),
                    estimate: err / exact,
                    budget: T_RULE_BUDGET,
                });
            }
        }
        Ok(())
    }

    fn apply(&self, f: &SampledField, r: &MultiplierProfile, quad: &TQuadSpec) -> Result<Vec<f64>> {
        let nodes = quad.nodes();
        self.check_t_rule(&nodes, quad)?;
        let n = self.n;
        let fhat = self.forward(f);
        let coef: Vec<(f64, f64)> = nodes
            .iter()
            .map(|&(t, w)| (t, w * t * r.eval(t)))
            .filter(|&(_, c)| c != 0.0)
            .collect();
        let scale = 2.0 * self.delta.powf(-self.alpha);
        let taylor = quad.singular_cell == SingularCell::TaylorCorrect;
        let damping = |k: usize, set: &[(f64, f64)]| -> f64 {
            set.iter()
                .map(|&(t, c)| c * (-2.0 * t * self.lambda[k]).exp())
                .sum()
        };

        match quad.h_policy {
            HPolicy::Full => {
                let agg: Vec<f64> = (0..n).map(|k| damping(k, &coef)).collect();
                let f_agg = self.inverse(fhat.iter().zip(&agg).map(|(c, a)| c * a).collect());
                let w = self.pair(&self.fold(None, &[]), scale);
                let mut out = second_differences(&w, &f_agg);
                if taylor {
                    let corr = self.inverse(
                        (0..n)
                            .map(|k| fhat[k] * (-2.0 * scale * agg[k] * self.defect[k]))
                            .collect(),
                    );
                    out.iter_mut().zip(&corr).for_each(|(o, c)| *o += c);
                }
                Ok(out)
            }
            HPolicy::Truncated => {
                let radius = |t: f64| t.powf(2.0 / self.alpha);
                let (small, big): (Vec<_>, Vec<_>) = coef
                    .iter()
                    .partition(|&&(t, _)| self.is_small(radius(t), quad.singular_cell));
                let fields: Vec<Option<Vec<f64>>> = big
                    .par_iter()
                    .map(|&(t, c)| {
                        let b = self.rule(Radius::Finite(radius(t)), quad.singular_cell)?;
                        let f2t = self.damped(&fhat, 2.0 * t, |_| Complex64::new(1.0, 0.0));
                        Some(second_differences(&self.pair(&b, scale * c), &f2t))
                    })
                    .collect();
                let mut out = vec![0.0; n];
                for field in fields.into_iter().flatten() {
                    out.iter_mut().zip(&field).for_each(|(o, v)| *o += v);
                }
                let phi = (!small.is_empty()).then(|| Phi::new(self.alpha));
                let sym: Vec<f64> = (0..n)
                    .map(|k| {
                        let mut m = 0.0;
                        if let Some(phi) = &phi {
                            for &(t, c) in &small {
                                m += c
                                    * (-2.0 * t * self.lambda[k]).exp()
                                    * phi.psi(self.xi[k], radius(t));
                            }
                        }
                        if taylor {
                            m -= 2.0 * scale * self.defect[k] * damping(k, &big);
                        }
                        m
                    })
                    .collect();
                if sym.iter().any(|&m| m != 0.0) {
                    let extra = self.inverse(fhat.iter().zip(&sym).map(|(c, m)| c * m).collect());
                    out.iter_mut().zip(&extra).for_each(|(o, v)| *o += v);
                }
                Ok(out)
            }
        }
    }
}

/// The operator `T` on a one-dimensional periodic grid, `0 < α < 1`.
pub fn apply_t(
    f: &SampledField,
    r: &MultiplierProfile,
    params: StableParams,
    quad: &TQuadSpec,
) -> Result<SampledField> {
    require_operator(params)?;
    quad.validate()?;
    let lattice = Lattice::new(*f.grid(), params.alpha());
    let out = lattice.apply(f, r, quad)?;
    SampledField::new(*f.grid(), out)
}

/// `T f` split into the contributions of `t ≤ t_split` and `t > t_split`.
pub fn apply_t_split(
    f: &SampledField,
    r: &MultiplierProfile,
    params: StableParams,
    quad: &TQuadSpec,
    t_split: f64,
) -> Result<(SampledField, SampledField)> {
    require_operator(params)?;
    quad.validate()?;
    let (lo, hi) = quad.split(t_split)?;
    let lattice = Lattice::new(*f.grid(), params.alpha());
    let inner = SampledField::new(*f.grid(), lattice.apply(f, r, &lo)?)?;
    let outer = SampledField::new(*f.grid(), lattice.apply(f, r, &hi)?)?;
    Ok((inner, outer))
}

/// The square function
/// `G(x) = (∫ t ∫_{|h|<t^{2/α}} (f_t(x+h) - f_t(x))² |h|^{-1-α} dh dt)^{1/2}`,
/// `f_t = Q_t f`, with the t-range of `quad`.
pub fn g_function(
    f: &SampledField,
    params: StableParams,
    quad: &TQuadSpec,
) -> Result<SampledField> {
    require_line(params)?;
    quad.validate()?;
    let a = params.alpha();
    let lattice = Lattice::new(*f.grid(), a);
    let n = lattice.n;
    let delta = lattice.delta;
    let fhat = lattice.forward(f);
    let taylor = quad.singular_cell == SingularCell::TaylorCorrect;
    let step = delta.powf(-a);
    let z1 = 2.0 * delta.powf(2.0 - a) * zeta(a - 1.0);
    let z3 = 2.0 * delta.powf(4.0 - a) * zeta(a - 3.0);

    let parts: Vec<Vec<f64>> = quad
        .nodes()
        .par_iter()
        .map(|&(t, w)| {
            let ft = lattice.damped(&fhat, t, |_| Complex64::new(1.0, 0.0));
            let radius = match quad.h_policy {
                HPolicy::Full => f64::INFINITY,
                HPolicy::Truncated => t.powf(2.0 / a),
            };
            let deriv = |p: i32| {
                lattice.damped(&fhat, t, |k| {
                    if k == n / 2 && p % 2 == 1 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(0.0, lattice.xi[k]).powi(p)
                    }
                })
            };
            let mut g2 = vec![0.0; n];
            if taylor && lattice.is_small(radius, quad.singular_cell) {
                let (d1, d2, d3) = (deriv(1), deriv(2), deriv(3));
                let r2 = 2.0 * radius.powf(2.0 - a) / (2.0 - a);
                let r4 = 2.0 * radius.powf(4.0 - a) / (4.0 - a);
                for i in 0..n {
                    let quart = 0.25 * d2[i] * d2[i] + d1[i] * d3[i] / 3.0;
                    g2[i] = w * t * (r2 * d1[i] * d1[i] + r4 * quart);
                }
                return g2;
            }
            let rule = if radius.is_finite() {
                lattice.rule(Radius::Finite(radius), quad.singular_cell)
            } else {
                lattice.rule(Radius::Infinite, quad.singular_cell)
            };
            let Some(b) = rule else { return g2 };
            let e: Vec<(usize, f64)> = (1..n)
                .map(|j| (j, step * (b[j] + b[n - j])))
                .filter(|&(_, v)| v != 0.0)
                .collect();
            for (i, g) in g2.iter_mut().enumerate() {
                let fi = ft[i];
                let mut acc = 0.0;
                for &(j, ej) in &e {
                    let d = ft[if i + j < n { i + j } else { i + j - n }] - fi;
                    acc += ej * d * d;
                }
                *g = w * t * acc;
            }
            if taylor {
                let (d1, d2, d3) = (deriv(1), deriv(2), deriv(3));
                for i in 0..n {
                    let quart = 0.25 * d2[i] * d2[i] + d1[i] * d3[i] / 3.0;
                    g2[i] -= w * t * (z1 * d1[i] * d1[i] + z3 * quart);
                }
            }
            g2
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in parts {
        total.iter_mut().zip(&part).for_each(|(s, v)| *s += v);
    }
    SampledField::new(
        *f.grid(),
        total.into_iter().map(|v| v.max(0.0).sqrt()).collect(),
    )
}

/// Both sides of `⟨Tf, g⟩ = ∫∫ t ∫ (f_t(x+h)-f_t(x))(g_t(x+h)-g_t(x)) |h|^{-1-α} dh dt dx`
/// with `r ≡ 1`: the left side from [`apply_t`], the right side by
/// Parseval in `x` and the continuous `h`-integral `ψ`.
pub fn pairing_check(
    f: &SampledField,
    g: &SampledField,
    params: StableParams,
    quad: &TQuadSpec,
) -> Result<(f64, f64)> {
    f.grid().check_same(g.grid())?;
    let one = MultiplierProfile::constant_one();
    let lhs = apply_t(f, &one, params, quad)?.inner(g)?;

    let a = params.alpha();
    let lattice = Lattice::new(*f.grid(), a);
    let phi = Phi::new(a);
    let fhat = lattice.forward(f);
    let ghat = lattice.forward(g);
    let n = lattice.n;
    let nodes = quad.nodes();
    let per_bin: Vec<f64> = (1..n)
        .into_par_iter()
        .map(|k| {
            let cross = (fhat[k] * ghat[k].conj()).re;
            if cross == 0.0 {
                return 0.0;
            }
            let xi = lattice.xi[k];
            let lam = lattice.lambda[k];
            let integral: f64 = nodes
                .iter()
                .map(|&(t, w)| {
                    let psi = match quad.h_policy {
                        HPolicy::Full => phi.psi_full(xi),
                        HPolicy::Truncated => phi.psi(xi, t.powf(2.0 / a)),
                    };
                    w * t * (-2.0 * t * lam).exp() * psi
                })
                .sum();
            cross * integral
        })
        .collect();
    let rhs = lattice.delta / n as f64 * per_bin.iter().sum::<f64>();
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpReport {
    pub p: f64,
    pub ratios: Vec<f64>,
    pub max: f64,
    pub min: f64,
}

impl LpReport {
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }
}

/// `‖Tf‖_p / ‖f‖_p` over a family of nonzero fields.
pub fn lp_probe(
    family: &[SampledField],
    r: &MultiplierProfile,
    params: StableParams,
    quad: &TQuadSpec,
    p: f64,
) -> Result<LpReport> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("p must exceed 1, got {p}")));
    }
    if family.is_empty() {
        return Err(Error::domain("empty test family"));
    }
    let mut ratios = Vec::with_capacity(family.len());
    for f in family {
        let norm = f.lp_norm(p);
        if norm == 0.0 {
            return Err(Error::domain("test family contains a zero field"));
        }
        ratios.push(apply_t(f, r, params, quad)?.lp_norm(p) / norm);
    }
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    Ok(LpReport {
        p,
        ratios,
        max,
        min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use crate::spectral::{bump, transfer_ratio, translate};
    use proptest::prelude::*;

    fn line(alpha: f64) -> StableParams {
        StableParams::new(alpha, 1).unwrap()
    }

    fn c_oracle(alpha: f64) -> f64 {
        4.0 * gamma(1.0 - alpha) * (0.5 * PI * alpha).cos() / alpha
    }

    fn bump_field(grid: GridSpec, center: f64, width: f64) -> SampledField {
        SampledField::from_fn(grid, |x| bump(x, center, width)).unwrap()
    }

    fn quad(grid: &GridSpec, alpha: f64, h: HPolicy, cell: SingularCell) -> TQuadSpec {
        TQuadSpec::for_grid(grid, line(alpha), 1.0, h, cell).unwrap()
    }

    #[test]
    fn second_difference_examples() {
        let grid = GridSpec::centered(64, 2.0 * PI).unwrap();
        let c = SampledField::from_fn(grid, |_| 3.0).unwrap();
        assert!(second_difference(&c, 5).unwrap().sup_norm() < 1e-14);
        let xi = 3.0;
        let f = SampledField::from_fn(grid, |x| (xi * x).cos()).unwrap();
        let h = 4;
        let d = second_difference(&f, h).unwrap();
        let hh = h as f64 * grid.spacing();
        for (i, x) in grid.points().enumerate() {
            let want = 4.0 * (0.5 * xi * hh).sin().powi(2) * (xi * x).cos();
            assert!((d.values()[i] - want).abs() < 1e-13);
        }
        let g = SampledField::from_fn(grid, |x| (x * x).sin() + x).unwrap();
        assert!(second_difference(&g, 7).unwrap().sum().abs() < 1e-12);
        assert!(second_difference(&g, 32).is_err());
        assert!(second_difference(&g, 0).is_err());
    }

    #[test]
    fn phi_matches_adaptive_quadrature() {
        for &alpha in &[0.3, 0.7, 1.0, 1.6] {
            let phi = Phi::new(alpha);
            for &x in &[0.5, 2.0, 3.7, 25.0, 199.0, 250.0] {
                // leading Taylor terms on [0, ε], adaptive quadrature beyond
                let eps = 1e-3f64;
                let head = eps.powf(2.0 - alpha) / (2.0 * (2.0 - alpha))
                    - eps.powf(4.0 - alpha) / (24.0 * (4.0 - alpha));
                let mut breaks = quad::geometric_breaks(eps, 1.0f64.min(x), 2.0);
                if x > 1.0 {
                    breaks.extend(quad::uniform_breaks(1.0, x, 1.0).into_iter().skip(1));
                }
                let est = quad::adaptive_on(
                    &mut |u: f64| (1.0 - u.cos()) * u.powf(-1.0 - alpha),
                    &breaks,
                    1e-14,
                    1e-11,
                    4000,
                )
                .unwrap();
                let want = head + est.value;
                assert!((phi.eval(x) - want).abs() < 1e-9 * want, "{alpha} {x}");
            }
        }
    }

    #[test]
    fn constant_c_matches_gamma_form() {
        assert!((constant_c(line(1.0)).unwrap() - 2.0 * PI).abs() < 1e-9);
        for &alpha in &[0.1, 0.3, 0.5, 0.7, 0.9, 1.5] {
            let c = constant_c(line(alpha)).unwrap();
            assert!((c - c_oracle(alpha)).abs() < 1e-9 * c, "{alpha}");
        }
        let near_two = constant_c(line(1.999)).unwrap();
        assert!(near_two.is_finite() && near_two > 0.0);
        let mut a = 0.1;
        while a <= 0.9 {
            let c0 = constant_c(line(a)).unwrap();
            let c1 = constant_c(line(a + 1e-3)).unwrap();
            assert!((c0 - c1).abs() < 0.1 * c0);
            a += 0.05;
        }
        assert!(constant_c(StableParams::new(0.5, 2).unwrap()).is_err());
    }

    #[test]
    fn symbol_closed_forms() {
        let p = line(0.5);
        let c = constant_c(p).unwrap();
        let one = MultiplierProfile::constant_one();
        let decay = MultiplierProfile::exp_decay();
        let flat = MultiplierProfile::tabulated(vec![0.0, 1.0, 5.0], vec![1.0, 1.0, 1.0]).unwrap();
        let ramp = MultiplierProfile::tabulated(vec![0.5, 2.0], vec![0.0, 1.0]).unwrap();
        for &xi in &[0.01, 0.3, 1.0, 7.0, 120.0] {
            assert!((symbol_m(xi, &one, p).unwrap() - c / 4.0).abs() < 1e-12 * c);
            assert!((symbol_m(-xi, &flat, p).unwrap() - c / 4.0).abs() < 1e-9 * c);
            let l = xi.powf(0.25);
            let want = c * xi.sqrt() / (1.0 + 2.0 * l).powi(2);
            assert!((symbol_m(xi, &decay, p).unwrap() - want).abs() < 1e-12 * want);
            // piecewise-linear ramp against an adaptive integral
            let lam = xi.powf(0.25);
            let est = quad::adaptive_on(
                &mut |t: f64| t * ramp.eval(t) * (-2.0 * t * lam).exp(),
                &[0.0, 0.5, 2.0, 2.0 + 60.0 / lam],
                1e-14,
                1e-11,
                2000,
            )
            .unwrap();
            let m = symbol_m(xi, &ramp, p).unwrap();
            assert!(
                (m - c * xi.sqrt() * est.value).abs() < 1e-8 * m.abs().max(1e-12),
                "{xi}"
            );
            assert!(m.abs() <= c / 4.0 * ramp.sup_bound() * (1.0 + 1e-6));
        }
        assert_eq!(symbol_m(0.0, &one, p).unwrap(), 0.0);
    }

    #[test]
    fn truncated_symbol_properties() {
        let p = line(0.5);
        let phi = Phi::new(0.5);
        let mut prev = 0.0;
        for i in 0..200 {
            let psi = phi.psi(2.0, (0.01 * 1.05f64.powi(i)).powf(4.0));
            assert!(psi >= prev - 1e-14);
            prev = psi;
        }
        let decay = MultiplierProfile::exp_decay();
        let short = TQuadSpec::new(1e-4, 0.5, 64, HPolicy::Truncated, SingularCell::Omit).unwrap();
        let long = TQuadSpec::new(1e-6, 80.0, 64, HPolicy::Truncated, SingularCell::Omit).unwrap();
        for &xi in &[0.05, 1.0, 10.0, 100.0] {
            let full = symbol_m(xi, &decay, p).unwrap();
            assert!(symbol_m_truncated(xi, &decay, p, &short).unwrap() < full);
            assert!(symbol_m_truncated(xi, &decay, p, &long).unwrap() < full);
        }
        // r supported where t^{2/α}|ξ| is large: the truncation is invisible
        let late = MultiplierProfile::tabulated(vec![0.0, 8.0, 8.01], vec![0.0, 0.0, 1.0]).unwrap();
        let full = symbol_m(4.0, &late, p).unwrap();
        let wide = symbol_m_truncated(4.0, &late, p, &long).unwrap();
        assert!(wide < full && full - wide < 2e-2 * full, "{wide} {full}");
    }

    #[test]
    fn correction_coefficients_fit_lattice_sum() {
        // Σ (1 - cos kθ) k^{-s} = ζ(s) - Re Li_s(e^{iθ}); compare with a direct
        // sum plus its Euler–Maclaurin tail.
        let alpha = 0.6;
        let s = 1.0 + alpha;
        let c = correction_coefficients(s, CORRECTION_ORDER);
        let a = c_oracle(alpha) / 4.0;
        for &theta in &[0.05, 0.3, 1.0] {
            let kmax = 2_000_000usize;
            let mut sum = 0.0;
            for k in 1..=kmax {
                sum += (1.0 - (k as f64 * theta).cos()) * (k as f64).powf(-s);
            }
            // oscillating part of the tail is O(kmax^{-s}); the mean part is
            sum += hurwitz_zeta(s, kmax as f64 + 1.0);
            let sigma = 2.0 - 2.0 * theta.cos();
            let poly = c.iter().rev().fold(0.0, |acc, cm| acc * sigma + cm);
            let want = a * theta.powf(alpha) + poly;
            assert!((sum - want).abs() < 1e-6 * want, "{theta} {sum} {want}");
        }
    }

    fn max_rel_midband(
        f: &SampledField,
        tf: &SampledField,
        oracle: impl Fn(f64) -> f64,
    ) -> (f64, f64) {
        let ratio = transfer_ratio(f, tf).unwrap();
        let grid = f.grid();
        let n = grid.n();
        let (mut worst, mut imag) = (0.0f64, 0.0f64);
        for (k, q) in ratio.iter().enumerate().take(n / 4 + 1).skip(4) {
            let want = oracle(grid.frequency(k));
            worst = worst.max((q.re - want).abs() / want.abs());
            imag = imag.max(q.im.abs() / q.re.abs());
        }
        (worst, imag)
    }

    #[test]
    fn full_policy_reproduces_symbol() {
        let grid = GridSpec::centered(256, 32.0).unwrap();
        let f = bump_field(grid, 0.0, 1.5);
        for &alpha in &[0.5, 0.7] {
            let p = line(alpha);
            let q = quad(&grid, alpha, HPolicy::Full, SingularCell::TaylorCorrect);
            let decay = MultiplierProfile::exp_decay();
            let tf = apply_t(&f, &decay, p, &q).unwrap();
            let (worst, imag) = max_rel_midband(&f, &tf, |xi| symbol_m(xi, &decay, p).unwrap());
            assert!(worst < 1e-3, "{alpha}: {worst}");
            assert!(imag < 1e-3);
        }
    }

    #[test]
    fn truncated_policy_reproduces_truncated_symbol() {
        let grid = GridSpec::centered(256, 32.0).unwrap();
        let f = bump_field(grid, 0.0, 1.5);
        for &alpha in &[0.5, 0.7] {
            let p = line(alpha);
            let q = quad(
                &grid,
                alpha,
                HPolicy::Truncated,
                SingularCell::TaylorCorrect,
            );
            let decay = MultiplierProfile::exp_decay();
            let tf = apply_t(&f, &decay, p, &q).unwrap();
            let (worst, _) =
                max_rel_midband(&f, &tf, |xi| symbol_m_truncated(xi, &decay, p, &q).unwrap());
            assert!(worst < 5e-3, "{alpha}: {worst}");
        }
    }

    #[test]
    fn omitted_cell_error_shrinks_with_refinement() {
        let alpha = 0.5;
        let p = line(alpha);
        let one = MultiplierProfile::constant_one();
        let mut errs = vec![];
        for &n in &[128usize, 512] {
            let grid = GridSpec::centered(n, 32.0).unwrap();
            let f = bump_field(grid, 0.0, 2.0);
            let q = quad(&grid, alpha, HPolicy::Full, SingularCell::Omit);
            let tf = apply_t(&f, &one, p, &q).unwrap();
            let ratio = transfer_ratio(&f, &tf).unwrap();
            let c4 = constant_c(p).unwrap() / 4.0;
            // same physical frequency on both grids
            errs.push((ratio[8].re - c4).abs() / c4);
        }
        assert!(errs[1] < errs[0] && errs[1] < 0.05, "{errs:?}");
    }

    #[test]
    fn domain_errors() {
        let grid = GridSpec::centered(64, 16.0).unwrap();
        let f = bump_field(grid, 0.0, 2.0);
        let q = TQuadSpec::new(1e-3, 10.0, 64, HPolicy::Full, SingularCell::Omit).unwrap();
        let one = MultiplierProfile::constant_one();
        assert!(matches!(
            apply_t(&f, &one, line(1.0), &q),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            apply_t(&f, &one, line(1.5), &q),
            Err(Error::Domain(_))
        ));
        assert!(TQuadSpec::new(1.0, 0.5, 64, HPolicy::Full, SingularCell::Omit).is_err());
        assert!(TQuadSpec::new(0.1, 0.5, 4, HPolicy::Full, SingularCell::Omit).is_err());
        assert!(MultiplierProfile::tabulated(vec![1.0, 0.5], vec![1.0, 1.0]).is_err());
        let coarse = TQuadSpec::new(1e-4, 500.0, 8, HPolicy::Full, SingularCell::Omit).unwrap();
        assert!(matches!(
            apply_t(&f, &one, line(0.5), &coarse),
            Err(Error::Accuracy { .. })
        ));
    }

    #[test]
    fn zero_in_zero_out() {
        let grid = GridSpec::centered(64, 16.0).unwrap();
        let z = SampledField::zeros(grid);
        let q = quad(&grid, 0.5, HPolicy::Truncated, SingularCell::TaylorCorrect);
        let tf = apply_t(&z, &MultiplierProfile::exp_decay(), line(0.5), &q).unwrap();
        assert_eq!(tf.sup_norm(), 0.0);
        let (l, r) = pairing_check(&z, &bump_field(grid, 0.0, 2.0), line(0.5), &q).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
    }

    #[test]
    fn deterministic_under_parallel_reduction() {
        let grid = GridSpec::centered(128, 16.0).unwrap();
        let f = bump_field(grid, 0.3, 1.0);
        let q = quad(&grid, 0.6, HPolicy::Truncated, SingularCell::TaylorCorrect);
        let r = MultiplierProfile::exp_decay();
        let a = apply_t(&f, &r, line(0.6), &q).unwrap();
        let b = apply_t(&f, &r, line(0.6), &q).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn g_function_basics() {
        let grid = GridSpec::centered(128, 16.0).unwrap();
        let p = line(0.6);
        let q = quad(&grid, 0.6, HPolicy::Truncated, SingularCell::TaylorCorrect);
        let c = SampledField::from_fn(grid, |_| 2.0).unwrap();
        assert!(g_function(&c, p, &q).unwrap().sup_norm() < 1e-8);
        let f = bump_field(grid, 0.0, 1.0);
        let g1 = g_function(&f, p, &q).unwrap();
        let g2 = g_function(&f.scale(2.0), p, &q).unwrap();
        for (a, b) in g1.values().iter().zip(g2.values()) {
            assert!((2.0 * a - b).abs() <= 1e-10 * b.max(1e-300));
            assert!(*a >= 0.0);
        }
        let ratios: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&w| {
                let f = bump_field(grid, 0.0, w);
                g_function(&f, p, &q).unwrap().lp_norm(2.0) / f.lp_norm(2.0)
            })
            .collect();
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(min > 0.0 && max / min < 5.0, "{ratios:?}");
    }

    #[test]
    fn g_function_energy_matches_symbol() {
        // ‖G‖² = Σ_k |f̂_k|² ∫ t e^{-2tλ} ψ dt (Parseval), using the same t-rule
        let grid = GridSpec::centered(256, 32.0).unwrap();
        let alpha = 0.7;
        let p = line(alpha);
        let q = quad(
            &grid,
            alpha,
            HPolicy::Truncated,
            SingularCell::TaylorCorrect,
        );
        let f = bump_field(grid, 0.0, 2.0);
        let g = g_function(&f, p, &q).unwrap();
        let (_, rhs) = pairing_check(&f, &f, p, &q).unwrap();
        let energy = g.lp_norm(2.0).powi(2);
        assert!((energy - rhs).abs() < 1e-3 * rhs, "{energy} {rhs}");
    }

    #[test]
    fn pairing_identity_and_symmetry() {
        let grid = GridSpec::centered(256, 32.0).unwrap();
        let p = line(0.6);
        let f = bump_field(grid, 0.0, 1.5);
        let g = bump_field(grid, 0.8, 2.5);
        for h in [HPolicy::Full, HPolicy::Truncated] {
            let q = quad(&grid, 0.6, h, SingularCell::TaylorCorrect);
            let (l, r) = pairing_check(&f, &g, p, &q).unwrap();
            assert!(l > 0.0 && r > 0.0);
            assert!((l - r).abs() <= 2e-2 * l.max(r), "{h:?} {l} {r}");
            let (_, r2) = pairing_check(&g, &f, p, &q).unwrap();
            assert!((r - r2).abs() <= 1e-12 * r.abs());
        }
    }

    #[test]
    fn lp_probe_constant_symbol_and_translations() {
        // long period so the discarded mean carries little of the energy
        let grid = GridSpec::centered(512, 128.0).unwrap();
        let alpha = 0.5;
        let p = line(alpha);
        let q = quad(&grid, alpha, HPolicy::Full, SingularCell::TaylorCorrect);
        let one = MultiplierProfile::constant_one();
        let family: Vec<SampledField> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&w| bump_field(grid, 0.0, w))
            .collect();
        let rep = lp_probe(&family, &one, p, &q, 2.0).unwrap();
        let c4 = constant_c(p).unwrap() / 4.0;
        for r in &rep.ratios {
            assert!((r - c4).abs() < 0.05 * c4, "{r} {c4}");
        }
        let base = bump_field(grid, 0.0, 1.0);
        let shifted: Vec<SampledField> = [0i64, 17, -40]
            .iter()
            .map(|&s| translate(&base, s))
            .collect();
        let rep = lp_probe(&shifted, &MultiplierProfile::exp_decay(), p, &q, 3.0).unwrap();
        assert!(rep.spread() - 1.0 < 1e-6);
        assert!(lp_probe(&[SampledField::zeros(grid)], &one, p, &q, 2.0).is_err());
        assert!(lp_probe(&family, &one, p, &q, 1.0).is_err());
    }

    #[test]
    fn well_definedness_constants_stable_under_refinement() {
        let alpha = 0.6;
        let p = line(alpha);
        let r = MultiplierProfile::exp_decay();
        let mut fitted = vec![];
        for &n in &[256usize, 512] {
            let grid = GridSpec::centered(n, 32.0).unwrap();
            let f = bump_field(grid, 0.0, 2.0);
            let q = quad(
                &grid,
                alpha,
                HPolicy::Truncated,
                SingularCell::TaylorCorrect,
            );
            let (inner, outer) = apply_t_split(&f, &r, p, &q, 1.0).unwrap();
            let grad = crate::spectral::apply_symbol(&f, |_| 1.0).unwrap();
            let h = grid.spacing();
            let v = grad.values();
            let lip = (0..n)
                .map(|i| (v[(i + 1) % n] - v[i]).abs() / h)
                .fold(0.0, f64::max);
            fitted.push((inner.sup_norm() / lip, outer.sup_norm() / f.lp_norm(1.0)));
        }
        let (a, b) = (fitted[0], fitted[1]);
        assert!(
            (a.0 / b.0 - 1.0).abs() < 0.2 && (a.1 / b.1 - 1.0).abs() < 0.2,
            "{fitted:?}"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn apply_t_is_linear(
            a in -3.0f64..3.0,
            c1 in -4.0f64..4.0,
            c2 in -4.0f64..4.0,
            w1 in 0.5f64..3.0,
            w2 in 0.5f64..3.0,
        ) {
            let grid = GridSpec::centered(64, 16.0).unwrap();
            let p = line(0.5);
            let q = TQuadSpec::for_grid(&grid, p, 1.0, HPolicy::Truncated, SingularCell::TaylorCorrect).unwrap();
            let r = MultiplierProfile::exp_decay();
            let f = bump_field(grid, c1, w1);
            let g = bump_field(grid, c2, w2);
            let combo = apply_t(&f.axpy(a, &g).unwrap(), &r, p, &q).unwrap();
            let sep = apply_t(&f, &r, p, &q).unwrap().axpy(a, &apply_t(&g, &r, p, &q).unwrap()).unwrap();
            let scale = combo.sup_norm().max(sep.sup_norm()).max(1.0);
            prop_assert!(combo.max_abs_diff(&sep).unwrap() <= 1e-10 * scale);
        }

        #[test]
        fn symbol_bounded_by_sup(xi in 1e-3f64..1e3, v in prop::collection::vec(-2.0f64..2.0, 4)) {
            let p = line(0.7);
            let prof = MultiplierProfile::tabulated(vec![0.0, 0.5, 1.5, 4.0], v);
            prop_assume!(prof.is_ok());
            let prof = prof.unwrap();
            let c = constant_c(p).unwrap();
            let m = symbol_m(xi, &prof, p).unwrap();
            prop_assert!(m.abs() <= c / 4.0 * prof.sup_bound() * (1.0 + 1e-6));
        }

        #[test]
        fn apply_t_commutes_with_translation(shift in -40i64..40) {
            let grid = GridSpec::centered(64, 16.0).unwrap();
            let p = line(0.6);
            let q = TQuadSpec::for_grid(&grid, p, 1.0, HPolicy::Full, SingularCell::TaylorCorrect).unwrap();
            let r = MultiplierProfile::exp_decay();
            let f = bump_field(grid, 0.5, 1.7);
            let a = translate(&apply_t(&f, &r, p, &q).unwrap(), shift);
            let b = apply_t(&translate(&f, shift), &r, p, &q).unwrap();
            prop_assert!(a.max_abs_diff(&b).unwrap() <= 1e-10 * a.sup_norm());
        }
    }
}

//! Test fields on periodic grids.

use stablemult::spectral::bump;
use stablemult::{GridSpec, Result, SampledField};

use crate::config::{FieldParams, GridParams, Shape};

pub fn grid(p: &GridParams) -> Result<GridSpec> {
    match p.origin {
        Some(o) => GridSpec::new(p.n, p.length, o),
        None => GridSpec::centered(p.n, p.length),
    }
}

/// `bump`: the C^∞ bump of half-width `width`; `gaussian`: `e^{-(x-c)²/w²}`;
/// `cosine`: the bump modulated by `cos(2π(x-c)/w)`.
pub fn field(g: GridSpec, p: &FieldParams) -> Result<SampledField> {
    let (c, w) = (p.center, p.width);
    match p.shape {
        Shape::Bump => SampledField::from_fn(g, |x| bump(x, c, w)),
        Shape::Gaussian => SampledField::from_fn(g, |x| {
            let u = periodic_offset(x - c, g.length()) / w;
            (-u * u).exp()
        }),
        Shape::Cosine => SampledField::from_fn(g, |x| {
            bump(x, c, w) * (std::f64::consts::TAU * (x - c) / w).cos()
        }),
    }
}

fn periodic_offset(u: f64, l: f64) -> f64 {
    u - l * (u / l).round()
}

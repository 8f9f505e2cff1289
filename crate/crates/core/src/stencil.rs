//! Fourth-order central differences along one coordinate axis.

use crate::error::Result;
use crate::solutions::Evaluate;

/// First and second partial derivatives along `axis` from the 5-point stencil,
/// reusing the already computed centre value `f0`.
pub(crate) fn axis_derivatives(
    f: &(impl Evaluate + ?Sized),
    x: &[f64],
    axis: usize,
    h: f64,
    f0: f64,
) -> Result<(f64, f64)> {
    let mut probe = x.to_vec();
    let mut at = |offset: f64| {
        probe[axis] = x[axis] + offset;
        f.evaluate(&probe)
    };
    let fm2 = at(-2.0 * h)?;
    let fm1 = at(-h)?;
    let fp1 = at(h)?;
    let fp2 = at(2.0 * h)?;
    let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    Ok((d1, d2))
}

/// All first partials plus the second partial along every axis.
pub(crate) struct Partials {
    pub value: f64,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

pub(crate) fn partials(f: &(impl Evaluate + ?Sized), x: &[f64], h: f64) -> Result<Partials> {
    let value = f.evaluate(x)?;
    let mut first = Vec::with_capacity(x.len());
    let mut second = Vec::with_capacity(x.len());
    for axis in 0..x.len() {
        let (d1, d2) = axis_derivatives(f, x, axis, h, value)?;
        first.push(d1);
        second.push(d2);
    }
    Ok(Partials {
        value,
        first,
        second,
    })
}

//! Dense tensor helpers for separable (axis-by-axis) transforms.

use ndarray::{Array2, ArrayD, Axis, IxDyn, Zip};
use num_complex::Complex64;

pub type C64 = Complex64;

/// Applies `mat` (rows = output length, cols = input length) along `axis`.
pub fn apply_axis(input: &ArrayD<C64>, mat: &Array2<f64>, axis: usize) -> ArrayD<C64> {
    debug_assert_eq!(input.shape()[axis], mat.ncols());
    let mut shape = input.shape().to_vec();
    shape[axis] = mat.nrows();
    let mut out = ArrayD::<C64>::zeros(IxDyn(&shape));
    Zip::from(out.lanes_mut(Axis(axis)))
        .and(input.lanes(Axis(axis)))
        .for_each(|mut o, i| {
            for (r, slot) in o.iter_mut().enumerate() {
                let row = mat.row(r);
                let mut acc = C64::new(0.0, 0.0);
                for (w, v) in row.iter().zip(i.iter()) {
                    acc += v * *w;
                }
                *slot = acc;
            }
        });
    out
}

/// Applies one matrix per axis: `mats[a]` along axis `a`.
pub fn apply_separable(input: &ArrayD<C64>, mats: &[&Array2<f64>]) -> ArrayD<C64> {
    let mut cur = apply_axis(input, mats[0], 0);
    for (axis, m) in mats.iter().enumerate().skip(1) {
        cur = apply_axis(&cur, m, axis);
    }
    cur
}

/// Tensor-product weights `w[i1] * w[i2] * ...` on a `dim`-dimensional grid.
pub fn product_weights(w: &[f64], dim: usize) -> ArrayD<f64> {
    let n = w.len();
    ArrayD::from_shape_fn(IxDyn(&vec![n; dim]), |idx| (0..dim).map(|a| w[idx[a]]).product())
}

/// Grid coordinates of a tensor-product node set: `out[a]` holds `x_a` at
/// every grid point.
pub fn coordinates(x: &[f64], dim: usize) -> Vec<ArrayD<f64>> {
    let n = x.len();
    (0..dim)
        .map(|a| ArrayD::from_shape_fn(IxDyn(&vec![n; dim]), |idx| x[idx[a]]))
        .collect()
}

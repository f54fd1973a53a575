//! ReLU least-squares loss and its gradients.
//!
//! The loss is `L(w) = (1/n) sum_i (max(0, <w, x_i>) - y_i)^2`. It is
//! differentiable except where some `<w, x_i>` vanishes, so two surrogate
//! gradients are provided:
//!
//! - [`generalized_gradient`]: `(2/n) sum_i (relu(<w,x_i>) - y_i)
//!   (1 + sgn(<w,x_i>)) x_i` with `sgn(0) = 0`. At differentiable points this
//!   equals exactly twice the analytic derivative of the loss; at the origin
//!   it equals `-(2/n) sum_i y_i x_i`.
//! - [`descent_gradient`]: the chain-rule derivative
//!   `(1/n) sum_i (relu(<w,x_i>) - y_i) (1 + sgn(<w,x_i>)) x_i` with the kink
//!   convention `sgn(0) = +1` (i.e. `relu'(0) = 1`). This is the direction the
//!   projected-gradient solver steps along: the two conventions coincide at
//!   `w = 0` (a unit step from the origin lands on the projected empirical
//!   mean `(2/n) sum_i y_i x_i`), and away from kinks the descent gradient is
//!   exactly half the generalized one, which is what makes unit step sizes
//!   contract instead of overshoot.
//!
//! Reductions over samples run in fixed order `0..n-1` so results are bitwise
//! reproducible.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::model::{Dataset, WeightVector};

fn check_dims(w: &WeightVector, data: &Dataset) -> Result<()> {
    if w.d() != data.d() {
        return Err(Error::DimensionMismatch(format!(
            "weight vector has d = {} but dataset has d = {}",
            w.d(),
            data.d()
        )));
    }
    Ok(())
}

fn sgn(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `(1/n) sum_i (relu(<w, x_i>) - y_i)^2`.
pub fn loss(w: &WeightVector, data: &Dataset) -> Result<f64> {
    check_dims(w, data)?;
    let n = data.n();
    let mut acc = 0.0;
    for i in 0..n {
        let z = data.features.row(i).dot(&w.0);
        let r = z.max(0.0) - data.labels[i];
        acc += r * r;
    }
    Ok(acc / n as f64)
}

/// Generalized gradient with `sgn(0) = 0`:
/// `(2/n) sum_i (relu(<w,x_i>) - y_i)(1 + sgn(<w,x_i>)) x_i`.
pub fn generalized_gradient(w: &WeightVector, data: &Dataset) -> Result<Array1<f64>> {
    check_dims(w, data)?;
    let n = data.n();
    let mut acc = Array1::<f64>::zeros(data.d());
    for i in 0..n {
        let row = data.features.row(i);
        let z = row.dot(&w.0);
        let c = (z.max(0.0) - data.labels[i]) * (1.0 + sgn(z));
        acc.scaled_add(c, &row);
    }
    Ok(acc * (2.0 / n as f64))
}

/// Chain-rule gradient with `relu'(0) = 1`:
/// `(1/n) sum_i (relu(<w,x_i>) - y_i)(1 + sgn(<w,x_i>)) x_i`, `sgn(0) = +1`.
///
/// This is the projected-gradient step direction; see the module docs for how
/// it relates to [`generalized_gradient`].
pub fn descent_gradient(w: &WeightVector, data: &Dataset) -> Result<Array1<f64>> {
    check_dims(w, data)?;
    let n = data.n();
    let mut acc = Array1::<f64>::zeros(data.d());
    for i in 0..n {
        let row = data.features.row(i);
        let z = row.dot(&w.0);
        let factor = if z >= 0.0 { 2.0 } else { 0.0 };
        let c = (z.max(0.0) - data.labels[i]) * factor;
        acc.scaled_add(c, &row);
    }
    Ok(acc * (1.0 / n as f64))
}

/// Realizable-case loss via the identity `relu(z) = (z + |z|)/2`:
///
/// `(1/4n) sum (|<x,w>| - |<x,w*>|)^2 + (1/4n) sum <x, w - w*>^2
///  + (1/2n) sum (|<x,w>| - |<x,w*>|) <x, w - w*>`.
///
/// Requires the labels to regenerate exactly from `w_star`.
pub fn loss_decomposed(w: &WeightVector, data: &Dataset, w_star: &WeightVector) -> Result<f64> {
    check_dims(w, data)?;
    check_dims(w_star, data)?;
    if let Some(index) = data.realizability_defect(w_star) {
        return Err(Error::NotRealizable { index });
    }
    let n = data.n();
    let mut sq_abs = 0.0;
    let mut sq_diff = 0.0;
    let mut cross = 0.0;
    for i in 0..n {
        let row = data.features.row(i);
        let a = row.dot(&w.0);
        let b = row.dot(&w_star.0);
        let abs_gap = a.abs() - b.abs();
        let diff = a - b;
        sq_abs += abs_gap * abs_gap;
        sq_diff += diff * diff;
        cross += abs_gap * diff;
    }
    let nf = n as f64;
    Ok(sq_abs / (4.0 * nf) + sq_diff / (4.0 * nf) + cross / (2.0 * nf))
}

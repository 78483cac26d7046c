//! Central finite-difference stencils on a uniform lattice.

use std::ops::{Add, Mul, Sub};

/// Accuracy order of a central first-derivative stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    Second,
    Fourth,
    Eighth,
}

impl DerivativeOrder {
    fn weights(self) -> &'static [f64] {
        match self {
            DerivativeOrder::Second => &[0.5],
            DerivativeOrder::Fourth => &[2.0 / 3.0, -1.0 / 12.0],
            DerivativeOrder::Eighth => &[4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0],
        }
    }

    /// Nodes lost at each end of the lattice.
    pub fn reach(self) -> usize {
        self.weights().len()
    }
}

/// Central first derivative at node `i`; `None` if the stencil would leave
/// the array.
pub fn first_derivative_at<T>(values: &[T], i: usize, dq: f64, order: DerivativeOrder) -> Option<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let w = order.weights();
    if i < w.len() || i + w.len() >= values.len() {
        return None;
    }
    let mut acc = (values[i + 1] - values[i - 1]) * w[0];
    for (k, &wk) in w.iter().enumerate().skip(1) {
        acc = acc + (values[i + k + 1] - values[i - k - 1]) * wk;
    }
    Some(acc * (1.0 / dq))
}

/// Second derivative at node `i` with the five-point (fourth-order) stencil.
pub fn second_derivative_5pt(values: &[f64], i: usize, dq: f64) -> Option<f64> {
    if i < 2 || i + 2 >= values.len() {
        return None;
    }
    let v = values;
    Some(
        (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1] - v[i - 2]) / (12.0 * dq * dq),
    )
}

/// Second derivative at node `i` with the three-point stencil.
pub fn second_derivative_3pt(values: &[f64], i: usize, dq: f64) -> Option<f64> {
    if i < 1 || i + 1 >= values.len() {
        return None;
    }
    Some((values[i + 1] - 2.0 * values[i] + values[i - 1]) / (dq * dq))
}

//! Fourth-order central differences for black-box fields.

use super::chart::Chart;
use super::poly::Poly;

/// Relative step: `h = STEP · max(1, |xᵢ|)`.
pub const STEP: f64 = 1e-4;
/// Tolerance for identities checked through finite differences.
pub const BLACK_BOX_TOL: f64 = 1e-6;

/// `∂ᵢ f(x) ≈ (−f(x+2h) + 8f(x+h) − 8f(x−h) + f(x−2h)) / 12h`.
pub fn central_derivative<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], i: usize) -> f64 {
    let h = STEP * x[i].abs().max(1.0);
    let at = |k: f64| {
        let mut y = x.to_vec();
        y[i] += k * h;
        f(&y)
    };
    (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h)
}

pub fn gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<f64> {
    (0..x.len()).map(|i| central_derivative(f, x, i)).collect()
}

/// A vector field known only through its values.
pub struct BlackBoxField<'a> {
    pub dim: usize,
    pub value: Box<dyn Fn(&[f64]) -> Vec<f64> + 'a>,
}

impl<'a> BlackBoxField<'a> {
    pub fn new(dim: usize, value: impl Fn(&[f64]) -> Vec<f64> + 'a) -> Self {
        BlackBoxField {
            dim,
            value: Box::new(value),
        }
    }

    /// `J[i][j] = ∂ⱼ Xⁱ(x)`.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..x.len()).map(|j| central_derivative(&|y: &[f64]| (self.value)(y)[i], x, j)).collect())
            .collect()
    }
}

/// `[X, Y](x) = J_Y X − J_X Y`.
pub fn lie_bracket_at(x_field: &BlackBoxField, y_field: &BlackBoxField, x: &[f64]) -> Vec<f64> {
    let xv = (x_field.value)(x);
    let yv = (y_field.value)(x);
    let jx = x_field.jacobian(x);
    let jy = y_field.jacobian(x);
    (0..x_field.dim)
        .map(|i| {
            (0..x.len())
                .map(|j| jy[i][j] * xv[j] - jx[i][j] * yv[j])
                .sum()
        })
        .collect()
}

/// Largest deviation between exact chart partials of `f` and central
/// differences of its values, over the given chart points.
pub fn derivative_discrepancy(chart: &Chart, f: &Poly, points: &[Vec<f64>]) -> f64 {
    let partials: Vec<Poly> = (0..chart.dim()).map(|i| chart.partial(i, f)).collect();
    let eval = |y: &[f64]| chart.eval(f, y);
    let mut worst: f64 = 0.0;
    for x in points {
        for (i, p) in partials.iter().enumerate() {
            let exact = chart.eval(p, x);
            let approx = central_derivative(&eval, x, i);
            worst = worst.max((exact - approx).abs());
        }
    }
    worst
}

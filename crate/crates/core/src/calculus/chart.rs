//! Chart domains whose coordinate functions generate a polynomial ring.
//!
//! A linear coordinate contributes one ring variable. An angle coordinate `φ`
//! contributes the pair `(c, s) = (cos φ, sin φ)` and acts on the ring through
//! the derivation `∂_φ = −s ∂_c + c ∂_s`; identities are compared modulo
//! `c² + s² − 1`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::poly::Poly;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordKind {
    Linear,
    Angle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    kinds: Vec<CoordKind>,
    offsets: Vec<usize>,
    nvars: usize,
}

impl Chart {
    pub fn new(kinds: Vec<CoordKind>) -> Self {
        let mut offsets = Vec::with_capacity(kinds.len());
        let mut nvars = 0;
        for k in &kinds {
            offsets.push(nvars);
            nvars += match k {
                CoordKind::Linear => 1,
                CoordKind::Angle => 2,
            };
        }
        Chart { kinds, offsets, nvars }
    }

    /// `ℝⁿ` with linear coordinates.
    pub fn euclidean(n: usize) -> Self {
        Chart::new(vec![CoordKind::Linear; n])
    }

    /// Number of chart coordinates.
    pub fn dim(&self) -> usize {
        self.kinds.len()
    }

    /// Number of ring variables.
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn kinds(&self) -> &[CoordKind] {
        &self.kinds
    }

    pub fn has_angles(&self) -> bool {
        self.kinds.contains(&CoordKind::Angle)
    }

    pub fn zero(&self) -> Poly {
        Poly::zero(self.nvars)
    }

    pub fn constant(&self, c: f64) -> Poly {
        Poly::constant(self.nvars, c)
    }

    /// The linear coordinate function `xᵢ`.
    pub fn coordinate(&self, i: usize) -> Result<Poly> {
        match self.kinds.get(i) {
            Some(CoordKind::Linear) => Ok(Poly::var(self.nvars, self.offsets[i])),
            Some(CoordKind::Angle) => Err(Error::Invalid(format!(
                "coordinate {i} is an angle; use cos/sin"
            ))),
            None => Err(Error::DimensionMismatch(format!("no coordinate {i}"))),
        }
    }

    /// `cos φᵢ` for an angle coordinate.
    pub fn cos(&self, i: usize) -> Result<Poly> {
        self.angle_var(i, 0)
    }

    /// `sin φᵢ` for an angle coordinate.
    pub fn sin(&self, i: usize) -> Result<Poly> {
        self.angle_var(i, 1)
    }

    fn angle_var(&self, i: usize, which: usize) -> Result<Poly> {
        match self.kinds.get(i) {
            Some(CoordKind::Angle) => Ok(Poly::var(self.nvars, self.offsets[i] + which)),
            _ => Err(Error::Invalid(format!("coordinate {i} is not an angle"))),
        }
    }

    /// Partial derivative along chart coordinate `i`.
    pub fn partial(&self, i: usize, f: &Poly) -> Poly {
        let o = self.offsets[i];
        match self.kinds[i] {
            CoordKind::Linear => f.deriv(o),
            CoordKind::Angle => {
                let c = Poly::var(self.nvars, o);
                let s = Poly::var(self.nvars, o + 1);
                &(&c * &f.deriv(o + 1)) - &(&s * &f.deriv(o))
            }
        }
    }

    /// Ring-variable values at a chart point.
    pub fn ring_point(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim(), "chart point dimension");
        let mut out = Vec::with_capacity(self.nvars);
        for (k, &v) in self.kinds.iter().zip(x) {
            match k {
                CoordKind::Linear => out.push(v),
                CoordKind::Angle => {
                    out.push(v.cos());
                    out.push(v.sin());
                }
            }
        }
        out
    }

    /// Evaluates a ring polynomial at a chart point.
    pub fn eval(&self, f: &Poly, x: &[f64]) -> f64 {
        f.eval(&self.ring_point(x))
    }

    /// Normal form modulo `c² + s² − 1` for every angle: powers of `s` above
    /// one are rewritten through `s² = 1 − c²`.
    pub fn reduce(&self, f: &Poly) -> Poly {
        if !self.has_angles() {
            return f.clone();
        }
        let mut out = Poly::zero(self.nvars);
        let mut stack: Vec<(Vec<u16>, f64)> = f.terms().map(|(m, c)| (m.exponents().to_vec(), c)).collect();
        while let Some((e, c)) = stack.pop() {
            let high = self
                .kinds
                .iter()
                .zip(&self.offsets)
                .find(|(k, &o)| **k == CoordKind::Angle && e[o + 1] >= 2)
                .map(|(_, &o)| o);
            match high {
                None => out += &Poly::monomial(e, c),
                Some(o) => {
                    let mut base = e.clone();
                    base[o + 1] -= 2;
                    let mut with_c = base.clone();
                    with_c[o] += 2;
                    stack.push((base, c));
                    stack.push((with_c, -c));
                }
            }
        }
        out
    }

    /// Largest coefficient of the reduced polynomial.
    pub fn residual(&self, f: &Poly) -> f64 {
        self.reduce(f).max_abs_coeff()
    }

    /// Random polynomial in the linear coordinates and angle pairs.
    pub fn random_poly<R: Rng + ?Sized>(&self, degree: u32, rng: &mut R) -> Poly {
        Poly::random(self.nvars, degree, rng)
    }

    /// Random chart point: linear coordinates uniform in `[-radius, radius]`,
    /// angles uniform in `[0, 2π)`.
    pub fn random_point<R: Rng + ?Sized>(&self, radius: f64, rng: &mut R) -> Vec<f64> {
        self.kinds
            .iter()
            .map(|k| match k {
                CoordKind::Linear => rng.gen_range(-radius..=radius),
                CoordKind::Angle => rng.gen_range(0.0..std::f64::consts::TAU),
            })
            .collect()
    }
}

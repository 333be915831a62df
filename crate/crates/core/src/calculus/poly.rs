//! Sparse multivariate polynomials with real coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use rand::Rng;

/// Coefficients with smaller magnitude are dropped after every operation.
pub const PRUNE: f64 = 1e-12;

/// Exponent vector ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u16>);

impl Monomial {
    pub fn new(exponents: Vec<u16>) -> Self {
        Monomial(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, &v)| v.powi(e as i32))
            .product()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in `nvars` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    /// The variable `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Poly::monomial(e, 1.0)
    }

    pub fn monomial(exponents: Vec<u16>, c: f64) -> Self {
        let mut p = Poly::zero(exponents.len());
        p.add_term(Monomial(exponents), c);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u16>, f64)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "monomial length");
            p.add_term(Monomial(e), c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exponents: &[u16]) -> f64 {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .copied()
            .unwrap_or(0.0)
    }

    /// Constant term.
    pub fn constant_term(&self) -> f64 {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m).or_insert(0.0);
        *entry += c;
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|_, c| c.abs() >= PRUNE);
        self
    }

    pub fn scale(&self, c: f64) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, &v)| (m.clone(), v * c)).collect(),
        }
        .pruned()
    }

    /// `∂/∂x_i`.
    pub fn deriv(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, &c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut ex = m.0.clone();
            ex[i] -= 1;
            out.add_term(Monomial(ex), c * e as f64);
        }
        out.pruned()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars, "point dimension");
        self.terms.iter().map(|(m, &c)| c * m.eval(x)).sum()
    }

    /// `Σ |c| |m(x)|`, the magnitude that bounds rounding in [`Poly::eval`].
    pub fn eval_abs(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, &c)| (c * m.eval(x)).abs()).sum()
    }

    /// Expands `f(g₁, …, g_n)` for polynomials `gᵢ` sharing a variable count.
    pub fn compose(&self, subs: &[Poly]) -> Poly {
        assert_eq!(subs.len(), self.nvars, "substitution arity");
        let target = subs.first().map_or(0, Poly::nvars);
        let mut out = Poly::zero(target);
        for (m, &c) in &self.terms {
            let mut term = Poly::constant(target, c);
            for (g, &e) in subs.iter().zip(&m.0) {
                for _ in 0..e {
                    term = &term * g;
                }
            }
            out += &term;
        }
        out
    }

    /// All monomials of total degree at most `degree`, in graded-lex order.
    pub fn monomials_up_to(nvars: usize, degree: u32) -> Vec<Vec<u16>> {
        let mut out = Vec::new();
        let mut cur = vec![0u16; nvars];
        fn rec(i: usize, left: u32, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
            if i == cur.len() {
                out.push(cur.clone());
                return;
            }
            for e in 0..=left {
                cur[i] = e as u16;
                rec(i + 1, left - e, cur, out);
            }
            cur[i] = 0;
        }
        rec(0, degree, &mut cur, &mut out);
        out.sort_by(|a, b| Monomial(a.clone()).cmp(&Monomial(b.clone())));
        out
    }

    /// Dense random polynomial with coefficients uniform in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(nvars: usize, degree: u32, rng: &mut R) -> Poly {
        Poly::from_terms(
            nvars,
            Poly::monomials_up_to(nvars, degree)
                .into_iter()
                .map(|e| (e, rng.gen_range(-1.0..=1.0))),
        )
    }

    /// Recasts the polynomial in a larger variable set; `map[i]` is the new
    /// index of variable `i`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Poly {
        let mut out = Poly::zero(nvars);
        for (m, &c) in &self.terms {
            let mut e = vec![0; nvars];
            for (i, &k) in m.0.iter().enumerate() {
                e[map[i]] += k;
            }
            out.add_term(Monomial(e), c);
        }
        out.pruned()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, &c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "·x{}", i + 1)?,
                    _ => write!(f, "·x{}^{e}", i + 1)?,
                }
            }
        }
        Ok(())
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        assert_eq!(self.nvars, rhs.nvars, "variable count");
        for (m, &c) in &rhs.terms {
            self.add_term(m.clone(), c);
        }
        self.terms.retain(|_, c| c.abs() >= PRUNE);
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        assert_eq!(self.nvars, rhs.nvars, "variable count");
        for (m, &c) in &rhs.terms {
            self.add_term(m.clone(), -c);
        }
        self.terms.retain(|_, c| c.abs() >= PRUNE);
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "variable count");
        let mut out = Poly::zero(self.nvars);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                out.add_term(a.times(b), ca * cb);
            }
        }
        out.pruned()
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self += &rhs;
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        self -= &rhs;
        self
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x(i: usize) -> Poly {
        Poly::var(3, i)
    }

    #[test]
    fn arithmetic_and_cancellation() {
        let p = &(&x(0) + &x(1)) * &(&x(0) - &x(1));
        let q = &(&x(0) * &x(0)) - &(&x(1) * &x(1));
        assert_eq!(p, q);
        assert!((&p - &q).is_zero());
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn graded_lex_order() {
        let mons = Poly::monomials_up_to(2, 2);
        assert_eq!(mons.len(), 6);
        assert_eq!(mons[0], vec![0, 0]);
        assert!(mons[1..3].iter().all(|m| m.iter().sum::<u16>() == 1));
        assert!(mons[3..].iter().all(|m| m.iter().sum::<u16>() == 2));
    }

    #[test]
    fn derivative_and_evaluation() {
        let p = Poly::from_terms(3, [(vec![2, 1, 0], 3.0), (vec![0, 0, 1], -1.0)]);
        assert_eq!(p.deriv(0), Poly::from_terms(3, [(vec![1, 1, 0], 6.0)]));
        assert_eq!(p.deriv(2), Poly::constant(3, -1.0));
        assert!((p.eval(&[2.0, 0.5, 4.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tiny_coefficients_are_pruned() {
        let p = &Poly::constant(1, 1.0) + &Poly::constant(1, 1e-13);
        let q = &p - &Poly::constant(1, 1.0);
        assert!(q.is_zero());
    }

    #[test]
    fn composition_matches_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = Poly::random(2, 3, &mut rng);
        let g = [Poly::random(3, 1, &mut rng), Poly::random(3, 2, &mut rng)];
        let h = f.compose(&g);
        let pt = [0.3, -0.7, 1.1];
        let inner = [g[0].eval(&pt), g[1].eval(&pt)];
        assert!((h.eval(&pt) - f.eval(&inner)).abs() < 1e-12);
    }

    #[test]
    fn product_rule_on_random_polys() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let a = Poly::random(3, 3, &mut rng);
            let b = Poly::random(3, 2, &mut rng);
            let lhs = (&a * &b).deriv(1);
            let rhs = &(&a.deriv(1) * &b) + &(&a * &b.deriv(1));
            assert!((&lhs - &rhs).max_abs_coeff() < 1e-12);
        }
    }
}

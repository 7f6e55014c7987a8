//! Truncated bivariate power series in centered coordinates.
//!
//! A series of degree `N` stores `c_ij` for `i + j ≤ N` and represents
//! `Σ c_ij (x - 0.5)^i (y - 0.5)^j`. Products are truncated at total degree
//! `N`. The coefficient type is generic so the same code runs on `f64` and on
//! [`Interval`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::ivl::Interval;

/// Expansion point of every series, in both variables.
pub const CENTER: f64 = 0.5;

pub trait Scalar:
    Copy
    + Send
    + Sync
    + fmt::Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn from_f64(x: f64) -> Self;
    /// Upper bound of `|x|`.
    fn mag(self) -> f64;
    fn mid(self) -> f64;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn mag(self) -> f64 {
        self.abs()
    }
    fn mid(self) -> f64 {
        self
    }
}

impl Scalar for Interval {
    fn from_f64(x: f64) -> Self {
        Interval::point(x)
    }
    fn mag(self) -> f64 {
        Interval::mag(&self)
    }
    fn mid(self) -> f64 {
        Interval::mid(&self)
    }
}

#[inline]
fn row_offset(n: usize, i: usize) -> usize {
    i * (n + 1) - i * i.saturating_sub(1) / 2
}

#[inline]
pub fn coeff_count(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Series<T> {
    degree: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> fmt::Debug for Series<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series(N={}; ", self.degree)?;
        let mut first = true;
        for (i, j, c) in self.iter() {
            if c.mag() != 0.0 {
                if !first {
                    write!(f, ", ")?;
                }
                write!(f, "c{i}{j}={c:?}")?;
                first = false;
            }
        }
        write!(f, ")")
    }
}

impl<T: Scalar> Series<T> {
    pub fn zero(degree: usize) -> Self {
        Series { degree, coeffs: vec![T::zero(); coeff_count(degree)] }
    }

    pub fn constant(degree: usize, c: T) -> Self {
        let mut s = Self::zero(degree);
        s.coeffs[0] = c;
        s
    }

    /// The coordinate function `x` (so `c00 = 0.5`, `c10 = 1`).
    pub fn var_x(degree: usize) -> Self {
        let mut s = Self::constant(degree, T::from_f64(CENTER));
        if degree >= 1 {
            s.set(1, 0, T::from_f64(1.0));
        }
        s
    }

    pub fn var_y(degree: usize) -> Self {
        let mut s = Self::constant(degree, T::from_f64(CENTER));
        if degree >= 1 {
            s.set(0, 1, T::from_f64(1.0));
        }
        s
    }

    /// Builds a series from raw uncentered coefficients `a_ij x^i y^j`.
    pub fn from_monomials(degree: usize, terms: &[(usize, usize, f64)]) -> Self {
        let x = Self::var_x(degree);
        let y = Self::var_y(degree);
        let mut out = Self::zero(degree);
        for &(i, j, a) in terms {
            let mut m = Self::constant(degree, T::from_f64(a));
            for _ in 0..i {
                m = m.mul(&x);
            }
            for _ in 0..j {
                m = m.mul(&y);
            }
            out = out.add(&m);
        }
        out
    }

    pub fn from_fn(degree: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut s = Self::zero(degree);
        for i in 0..=degree {
            for j in 0..=degree - i {
                let k = row_offset(degree, i) + j;
                s.coeffs[k] = f(i, j);
            }
        }
        s
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        row_offset(self.degree, i) + j
    }

    /// Coefficient `c_ij`, zero outside the stored triangle.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        if i + j > self.degree {
            T::zero()
        } else {
            self.coeffs[self.idx(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(i + j <= self.degree, "index ({i},{j}) beyond degree {}", self.degree);
        let k = self.idx(i, j);
        self.coeffs[k] = v;
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let n = self.degree;
        (0..=n).flat_map(move |i| (0..=n - i).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Series<U> {
        Series { degree: self.degree, coeffs: self.coeffs.iter().map(|&c| f(c)).collect() }
    }

    /// Same function viewed at another degree: higher pads with zeros,
    /// lower drops the excess terms.
    pub fn with_degree(&self, degree: usize) -> Self {
        Self::from_fn(degree, |i, j| self.get(i, j))
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.degree.max(o.degree);
        Self::from_fn(n, |i, j| self.get(i, j) + o.get(i, j))
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.degree.max(o.degree);
        Self::from_fn(n, |i, j| self.get(i, j) - o.get(i, j))
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c)
    }

    pub fn scale(&self, a: T) -> Self {
        self.map(|c| c * a)
    }

    pub fn add_const(&self, a: T) -> Self {
        let mut s = self.clone();
        s.coeffs[0] = s.coeffs[0] + a;
        s
    }

    /// Product truncated at the smaller of the two degrees.
    pub fn mul(&self, o: &Self) -> Self {
        let n = self.degree.min(o.degree);
        let mut out = Self::zero(n);
        for i1 in 0..=n {
            for j1 in 0..=n - i1 {
                let a = self.get(i1, j1);
                if a.mag() == 0.0 {
                    continue;
                }
                let rem = n - i1 - j1;
                for i2 in 0..=rem {
                    let base_o = row_offset(o.degree, i2);
                    let base_r = row_offset(n, i1 + i2) + j1;
                    for j2 in 0..=rem - i2 {
                        let k = base_r + j2;
                        out.coeffs[k] = out.coeffs[k] + a * o.coeffs[base_o + j2];
                    }
                }
            }
        }
        out
    }

    /// Value at `(x, y)` by nested Horner in the centered variables.
    pub fn eval(&self, x: T, y: T) -> T {
        let cx = x - T::from_f64(CENTER);
        let cy = y - T::from_f64(CENTER);
        self.eval_centered(cx, cy)
    }

    pub fn eval_centered(&self, cx: T, cy: T) -> T {
        let n = self.degree;
        let mut acc = T::zero();
        for i in (0..=n).rev() {
            let mut p = T::zero();
            for j in (0..=n - i).rev() {
                p = p * cy + self.get(i, j);
            }
            acc = acc * cx + p;
        }
        acc
    }

    /// Partial derivative in variable `axis` (1 or 2); the result has
    /// degree `N - 1` (degree 0 stays 0).
    pub fn partial(&self, axis: usize) -> Self {
        assert!(axis == 1 || axis == 2, "axis must be 1 or 2");
        let n = self.degree.saturating_sub(1);
        if self.degree == 0 {
            return Self::zero(0);
        }
        Self::from_fn(n, |i, j| {
            if axis == 1 {
                self.get(i + 1, j) * T::from_f64((i + 1) as f64)
            } else {
                self.get(i, j + 1) * T::from_f64((j + 1) as f64)
            }
        })
    }

    /// `f(y, x)`.
    pub fn swap(&self) -> Self {
        Self::from_fn(self.degree, |i, j| self.get(j, i))
    }

    /// `self += a · x` coefficientwise (degrees must match).
    pub fn axpy(&mut self, a: T, x: &Self) {
        assert_eq!(self.degree, x.degree, "axpy degree mismatch");
        for (c, &v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *c = *c + a * v;
        }
    }

    /// `f(u(x,y), v(x,y))` truncated at the degree of the inner series.
    ///
    /// Powers of the centered `v` are formed once; each row polynomial in
    /// `v` is then a linear combination, and Horner runs over `u` only.
    pub fn compose(&self, u: &Self, v: &Self) -> Self {
        let n = u.degree.min(v.degree);
        let cu = u.with_degree(n).add_const(T::from_f64(-CENTER));
        let cv = v.with_degree(n).add_const(T::from_f64(-CENTER));
        let m = self.degree;
        let mut vp = Vec::with_capacity(m + 1);
        vp.push(Self::constant(n, T::from_f64(1.0)));
        for j in 1..=m {
            let next = vp[j - 1].mul(&cv);
            vp.push(next);
        }
        let mut acc = Self::zero(n);
        for i in (0..=m).rev() {
            let mut p = Self::zero(n);
            for (j, vj) in vp.iter().enumerate().take(m - i + 1) {
                p.axpy(self.get(i, j), vj);
            }
            acc = if i == m { p } else { acc.mul(&cu).add(&p) };
        }
        acc
    }

    /// Truncated reciprocal via the finite Neumann sum around the constant
    /// term. Exact in the truncated algebra because the perturbation is
    /// nilpotent there.
    pub fn reciprocal(&self) -> Option<Self>
    where
        T: std::ops::Div<Output = T>,
    {
        let c = self.get(0, 0);
        if c.mag() == 0.0 {
            return None;
        }
        let one = T::from_f64(1.0);
        let mut e = self.scale(one / c);
        e.coeffs[0] = T::zero();
        let mut term = Self::constant(self.degree, one);
        let mut acc = term.clone();
        for _ in 0..self.degree {
            term = term.mul(&e).neg();
            acc = acc.add(&term);
        }
        Some(acc.scale(one / c))
    }

    /// Enforces `(i+1) c_{i+1,j} = (j+1) c_{j+1,i}` by averaging each pair.
    pub fn symmetric_project(&self) -> Self
    where
        T: std::ops::Div<Output = T>,
    {
        let mut out = self.clone();
        let n = self.degree;
        let half = T::from_f64(0.5);
        for a in 0..n {
            for b in (a + 1)..n {
                if a + b + 1 > n {
                    break;
                }
                let ta = self.get(a + 1, b) * T::from_f64((a + 1) as f64);
                let tb = self.get(b + 1, a) * T::from_f64((b + 1) as f64);
                let t = (ta + tb) * half;
                out.set(a + 1, b, t / T::from_f64((a + 1) as f64));
                out.set(b + 1, a, t / T::from_f64((b + 1) as f64));
            }
        }
        out
    }

    /// Upper bound of `Σ |c_ij| r^{i+j}`.
    pub fn norm(&self, r: f64) -> f64 {
        let rr = Interval::point(r);
        let mut acc = Interval::ZERO;
        let mut w = Interval::ONE;
        for d in 0..=self.degree {
            let mut row = Interval::ZERO;
            for i in 0..=d {
                row = row + Interval::point(self.get(i, d - i).mag());
            }
            acc = acc + row * w;
            w = w * rr;
        }
        acc.hi()
    }

    /// Per-degree weighted masses `Σ_{i+j=d} |c_ij| r^d` (upper bounds).
    pub fn degree_masses(&self, r: f64) -> Vec<f64> {
        let rr = Interval::point(r);
        let mut w = Interval::ONE;
        let mut out = Vec::with_capacity(self.degree + 1);
        for d in 0..=self.degree {
            let mut row = Interval::ZERO;
            for i in 0..=d {
                row = row + Interval::point(self.get(i, d - i).mag());
            }
            out.push((row * w).hi());
            w = w * rr;
        }
        out
    }

    pub fn midpoints(&self) -> Series<f64> {
        self.map(|c| c.mid())
    }
}

impl Series<f64> {
    pub fn to_interval(&self) -> Series<Interval> {
        self.map(Interval::point)
    }

    pub fn max_abs_diff(&self, o: &Series<f64>) -> f64 {
        let n = self.degree.max(o.degree);
        let mut m: f64 = 0.0;
        for i in 0..=n {
            for j in 0..=n - i {
                m = m.max((self.get(i, j) - o.get(i, j)).abs());
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(n: usize, terms: &[(usize, usize, f64)]) -> Series<f64> {
        Series::from_monomials(n, terms)
    }

    #[test]
    fn layout_roundtrip() {
        let s = Series::<f64>::from_fn(5, |i, j| (10 * i + j) as f64);
        for i in 0..=5 {
            for j in 0..=5 - i {
                assert_eq!(s.get(i, j), (10 * i + j) as f64);
            }
        }
        assert_eq!(s.coeffs().len(), coeff_count(5));
        assert_eq!(s.get(3, 3), 0.0);
    }

    #[test]
    fn monomial_product() {
        let x = Series::<f64>::var_x(4).add_const(-0.5);
        let y = Series::<f64>::var_y(4).add_const(-0.5);
        let p = x.mul(&y);
        for (i, j, c) in p.iter() {
            assert_eq!(c, if (i, j) == (1, 1) { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn eval_matches_uncentered_polynomial() {
        let s = poly(5, &[(0, 0, -1.0), (1, 0, 1.0), (0, 2, 1.125), (2, 1, 0.3)]);
        for &(x, y) in &[(0.0, 0.0), (1.0, 0.0), (-0.3, 0.7), (1.4, -0.2)] {
            let want = -1.0 + x + 1.125 * y * y + 0.3 * x * x * y;
            assert!((s.eval(x, y) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn partial_of_x2y() {
        let s = poly(4, &[(2, 1, 1.0)]);
        let d = s.partial(1);
        let want = poly(3, &[(1, 1, 2.0)]);
        assert!(d.max_abs_diff(&want) < 1e-15);
        let c = Series::<f64>::constant(3, 7.0).partial(1);
        assert!(c.iter().all(|(_, _, v)| v == 0.0));
    }

    #[test]
    fn compose_projection_and_square() {
        let u = poly(6, &[(0, 0, 0.2), (1, 1, 0.5), (0, 3, -0.1)]);
        let v = poly(6, &[(0, 0, 1.0), (2, 0, 0.3)]);
        let fx = Series::<f64>::var_x(6);
        assert!(fx.compose(&u, &v).max_abs_diff(&u) < 1e-14);
        let xy = poly(6, &[(1, 1, 1.0)]);
        let x = Series::<f64>::var_x(6);
        let x2 = poly(6, &[(2, 0, 1.0)]);
        assert!(xy.compose(&x, &x).max_abs_diff(&x2) < 1e-14);
    }

    #[test]
    fn reciprocal_of_constant_and_product() {
        let two = Series::<f64>::constant(5, 2.0);
        assert_eq!(two.reciprocal().unwrap().get(0, 0), 0.5);
        let f = poly(8, &[(0, 0, 1.0), (1, 0, 0.2), (0, 1, -0.1)]);
        let r = f.reciprocal().unwrap();
        let one = f.mul(&r);
        assert!(one.max_abs_diff(&Series::constant(8, 1.0)) < 1e-14);
    }

    #[test]
    fn symmetric_projection_is_idempotent() {
        let s = Series::<f64>::from_fn(7, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let p = s.symmetric_project();
        let q = p.symmetric_project();
        assert!(p.max_abs_diff(&q) < 1e-14);
        let x = Series::<f64>::var_x(7);
        assert!(x.symmetric_project().max_abs_diff(&x) == 0.0);
    }
}

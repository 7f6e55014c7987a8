//! Function balls: truncated series with interval coefficients plus an ℓ¹
//! bound on the discarded tail.
//!
//! A ball of degree `N` with outer radius `R` contains every function
//! `Σ c_ij X^i Y^j` (centered coordinates) whose low coefficients lie in the
//! stored intervals and whose tail satisfies `Σ_{i+j>N} |c_ij| R^{i+j} ≤ tail`.
//! The working radius `ρ < R` is where norms are reported.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ivl::{IVec2, Interval};
use crate::series::{Series, CENTER};

/// Working radius of the norm.
pub const RHO: f64 = 1.6;
/// Analyticity radius at which tails are stated.
pub const RHO_OUTER: f64 = 1.75;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BallError {
    #[error("box reaches distance {r} from the center, beyond the working radius {rho}")]
    Domain { r: f64, rho: f64 },
    #[error("incompatible geometry: {0}")]
    Geometry(String),
    #[error("outer radius must exceed the working radius for a Cauchy estimate")]
    RadiiEqual,
    #[error("inner functions reach norm {norm}, outside the analyticity radius {radius}")]
    RangeEscape { norm: f64, radius: f64 },
    #[error("perturbation norm {0} ≥ 1; range may contain zero")]
    ZeroInRange(f64),
    #[error("coefficient input: {0}")]
    Input(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuncBall {
    poly: Series<Interval>,
    tail: f64,
    rho: f64,
    rho_outer: f64,
}

#[inline]
fn ip(x: f64) -> Interval {
    Interval::point(x)
}

/// Upper bound of `(a/b)^k` for nonnegative `a`, positive `b`.
fn ratio_pow_up(a: f64, b: f64, k: u32) -> f64 {
    (ip(a) / ip(b)).powi(k).hi()
}

fn up_sum(terms: &[Interval]) -> f64 {
    terms.iter().fold(Interval::ZERO, |acc, t| acc + *t).hi()
}

impl FuncBall {
    pub fn new(poly: Series<Interval>, tail: f64, rho: f64, rho_outer: f64) -> Result<Self, BallError> {
        if !(tail >= 0.0 && tail.is_finite()) {
            return Err(BallError::Geometry(format!("tail must be finite and nonnegative, got {tail}")));
        }
        if !(rho > 0.0 && rho_outer >= rho) {
            return Err(BallError::Geometry(format!("need 0 < rho ≤ rho_outer, got {rho}, {rho_outer}")));
        }
        Ok(FuncBall { poly, tail, rho, rho_outer })
    }

    pub fn from_series(s: &Series<f64>) -> Self {
        FuncBall { poly: s.to_interval(), tail: 0.0, rho: RHO, rho_outer: RHO_OUTER }
    }

    pub fn from_series_with_tail(s: &Series<f64>, tail: f64) -> Result<Self, BallError> {
        Self::new(s.to_interval(), tail, RHO, RHO_OUTER)
    }

    pub fn constant(degree: usize, c: Interval) -> Self {
        FuncBall { poly: Series::constant(degree, c), tail: 0.0, rho: RHO, rho_outer: RHO_OUTER }
    }

    pub fn var_x(degree: usize) -> Self {
        FuncBall { poly: Series::var_x(degree), tail: 0.0, rho: RHO, rho_outer: RHO_OUTER }
    }

    pub fn var_y(degree: usize) -> Self {
        FuncBall { poly: Series::var_y(degree), tail: 0.0, rho: RHO, rho_outer: RHO_OUTER }
    }

    pub fn poly(&self) -> &Series<Interval> {
        &self.poly
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn rho_outer(&self) -> f64 {
        self.rho_outer
    }

    pub fn center(&self) -> [f64; 2] {
        [CENTER, CENTER]
    }

    pub fn midpoint(&self) -> Series<f64> {
        self.poly.midpoints()
    }

    /// Largest coefficient radius, a quick measure of accumulated width.
    pub fn max_coeff_width(&self) -> f64 {
        self.poly.coeffs().iter().map(|c| c.width()).fold(0.0, f64::max)
    }

    /// `Σ mag(c_ij) r^{i+j} + tail (r/R)^{N+1}` for `r ≤ R`.
    pub fn norm(&self, r: f64) -> f64 {
        assert!(r <= self.rho_outer, "norm radius beyond the outer radius");
        let t = ip(self.tail) * ip(ratio_pow_up(r, self.rho_outer, self.degree() as u32 + 1));
        (ip(self.poly.norm(r)) + t).hi()
    }

    /// Norm at the working radius ρ.
    pub fn norm_rho(&self) -> f64 {
        self.norm(self.rho)
    }

    /// Norm at the outer radius, tail included.
    pub fn norm_outer(&self) -> f64 {
        self.norm(self.rho_outer)
    }

    /// Same ball stated at a smaller outer radius `r ≥ ρ`.
    pub fn with_outer(&self, r: f64) -> Result<Self, BallError> {
        if r > self.rho_outer || r < self.rho {
            return Err(BallError::Geometry(format!(
                "outer radius {r} outside [{}, {}]",
                self.rho, self.rho_outer
            )));
        }
        if r == self.rho_outer {
            return Ok(self.clone());
        }
        let f = ratio_pow_up(r, self.rho_outer, self.degree() as u32 + 1);
        Ok(FuncBall {
            poly: self.poly.clone(),
            tail: (ip(self.tail) * ip(f)).hi(),
            rho: self.rho,
            rho_outer: r,
        })
    }

    /// Lowers the degree, moving the dropped coefficients into the tail.
    pub fn truncate(&self, degree: usize) -> Self {
        if degree >= self.degree() {
            return self.clone();
        }
        let masses = self.poly.degree_masses(self.rho_outer);
        let extra: Vec<Interval> = masses[degree + 1..].iter().map(|&m| ip(m)).collect();
        FuncBall {
            poly: self.poly.with_degree(degree),
            tail: (ip(self.tail) + ip(up_sum(&extra))).hi(),
            rho: self.rho,
            rho_outer: self.rho_outer,
        }
    }

    fn align(&self, o: &Self) -> Result<(Self, Self), BallError> {
        if self.rho != o.rho {
            return Err(BallError::Geometry(format!("working radii differ: {} vs {}", self.rho, o.rho)));
        }
        let r = self.rho_outer.min(o.rho_outer);
        let n = self.degree().min(o.degree());
        Ok((self.with_outer(r)?.truncate(n), o.with_outer(r)?.truncate(n)))
    }

    pub fn add(&self, o: &Self) -> Result<Self, BallError> {
        let (a, b) = self.align(o)?;
        Ok(FuncBall {
            poly: a.poly.add(&b.poly),
            tail: (ip(a.tail) + ip(b.tail)).hi(),
            rho: a.rho,
            rho_outer: a.rho_outer,
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self, BallError> {
        let (a, b) = self.align(o)?;
        Ok(FuncBall {
            poly: a.poly.sub(&b.poly),
            tail: (ip(a.tail) + ip(b.tail)).hi(),
            rho: a.rho,
            rho_outer: a.rho_outer,
        })
    }

    pub fn neg(&self) -> Self {
        FuncBall { poly: self.poly.neg(), ..self.clone() }
    }

    pub fn scale(&self, a: Interval) -> Self {
        FuncBall {
            poly: self.poly.scale(a),
            tail: (ip(self.tail) * ip(a.mag())).hi(),
            rho: self.rho,
            rho_outer: self.rho_outer,
        }
    }

    pub fn add_const(&self, a: Interval) -> Self {
        FuncBall { poly: self.poly.add_const(a), ..self.clone() }
    }

    /// Product; the tail collects the truncated cross terms and every term
    /// touching an input tail, using ℓ¹ submultiplicativity at radius R.
    pub fn mul(&self, o: &Self) -> Result<Self, BallError> {
        let (a, b) = self.align(o)?;
        let n = a.degree();
        let r = a.rho_outer;
        let ma = a.poly.degree_masses(r);
        let mb = b.poly.degree_masses(r);
        let mut dropped = Interval::ZERO;
        for (d1, &x) in ma.iter().enumerate() {
            for (d2, &y) in mb.iter().enumerate() {
                if d1 + d2 > n {
                    dropped = dropped + ip(x) * ip(y);
                }
            }
        }
        let na = ip(a.poly.norm(r));
        let nb = ip(b.poly.norm(r));
        let (ta, tb) = (ip(a.tail), ip(b.tail));
        let tail = dropped + na * tb + ta * nb + ta * tb;
        Ok(FuncBall { poly: a.poly.mul(&b.poly), tail: tail.hi(), rho: a.rho, rho_outer: r })
    }

    /// Adds every function of norm ≤ `w` at radius R.
    pub fn widen(&self, w: f64) -> Self {
        if w == 0.0 {
            return self.clone();
        }
        let r = ip(self.rho_outer);
        let mut poly = self.poly.clone();
        let mut weight = Interval::ONE;
        for d in 0..=self.degree() {
            let e = (ip(w) / weight).hi();
            for i in 0..=d {
                let c = poly.get(i, d - i);
                poly.set(i, d - i, c + Interval::symmetric(e));
            }
            weight = weight * r;
        }
        FuncBall { poly, tail: (ip(self.tail) + ip(w)).hi(), rho: self.rho, rho_outer: self.rho_outer }
    }

    /// Encloses `f(x, y)` over `b` for every member `f`. A ball without
    /// tail is a polynomial and may be evaluated anywhere.
    pub fn eval(&self, b: &IVec2) -> Result<Interval, BallError> {
        let dx = (b.x - CENTER).mag();
        let dy = (b.y - CENTER).mag();
        let r = dx.max(dy);
        if self.tail == 0.0 && r.is_finite() {
            return Ok(self.poly.eval(b.x, b.y));
        }
        if !(r <= self.rho) {
            return Err(BallError::Domain { r, rho: self.rho });
        }
        let v = self.poly.eval(b.x, b.y);
        let t = (ip(self.tail) * ip(ratio_pow_up(r, self.rho_outer, self.degree() as u32 + 1))).hi();
        Ok(v + Interval::symmetric(t))
    }

    /// Partial derivative in `axis` (1 or 2). The tail is bounded by a
    /// Cauchy estimate and stated at the geometric mean of the two radii.
    pub fn partial(&self, axis: usize) -> Result<Self, BallError> {
        if self.rho_outer <= self.rho {
            return Err(BallError::RadiiEqual);
        }
        let n = self.degree();
        let new_outer = (self.rho * self.rho_outer).sqrt();
        let tail = if self.tail == 0.0 {
            0.0
        } else {
            (ip(self.tail) * ip(cauchy_factor(n, new_outer, self.rho_outer))).hi()
        };
        Ok(FuncBall { poly: self.poly.partial(axis), tail, rho: self.rho, rho_outer: new_outer })
    }

    /// `f(u, v)`; requires the centered inner functions to have norm at most
    /// the analyticity radius of `f`.
    pub fn compose2(&self, u: &Self, v: &Self) -> Result<Self, BallError> {
        let (u, v) = u.align(v)?;
        let n = u.degree();
        let cu = u.add_const(ip(-CENTER));
        let cv = v.add_const(ip(-CENTER));
        let nu = cu.norm_outer().max(cv.norm_outer());
        if !(nu <= self.rho_outer) {
            return Err(BallError::RangeEscape { norm: nu, radius: self.rho_outer });
        }
        let m = self.degree();
        let mut vp = Vec::with_capacity(m + 1);
        vp.push(FuncBall { poly: Series::constant(n, Interval::ONE), tail: 0.0, rho: u.rho, rho_outer: u.rho_outer });
        for j in 1..=m {
            let next = vp[j - 1].mul(&cv)?;
            vp.push(next);
        }
        let mut acc: Option<FuncBall> = None;
        for i in (0..=m).rev() {
            let mut poly = Series::zero(n);
            let mut tail = Interval::ZERO;
            for (j, vj) in vp.iter().enumerate().take(m - i + 1) {
                let c = self.poly.get(i, j);
                poly.axpy(c, &vj.poly);
                tail = tail + ip(c.mag()) * ip(vj.tail);
            }
            let p = FuncBall { poly, tail: tail.hi(), rho: u.rho, rho_outer: u.rho_outer };
            acc = Some(match acc {
                None => p,
                Some(a) => a.mul(&cu)?.add(&p)?,
            });
        }
        let mut acc = acc.expect("degree ≥ 0 gives one row");
        if self.tail > 0.0 {
            let t = (ip(self.tail) * ip(ratio_pow_up(nu, self.rho_outer, m as u32 + 1))).hi();
            acc = acc.widen(t);
        }
        Ok(acc)
    }

    /// `1/f` by a Neumann series around the midpoint of the constant term,
    /// with the geometric remainder added as a widening.
    pub fn reciprocal(&self) -> Result<Self, BallError> {
        let c = self.poly.get(0, 0).mid();
        if c == 0.0 {
            return Err(BallError::ZeroInRange(f64::INFINITY));
        }
        let inv_c = Interval::ONE / ip(c);
        let e = self.add_const(ip(-c)).scale(inv_c);
        let en = e.norm_outer();
        if !(en < 1.0) {
            return Err(BallError::ZeroInRange(en));
        }
        let n = self.degree();
        let one = FuncBall::constant(n, Interval::ONE);
        let one = FuncBall { rho: self.rho, rho_outer: self.rho_outer, ..one };
        let minus_e = e.neg();
        let mut acc = one.clone();
        for _ in 0..n {
            acc = one.add(&acc.mul(&minus_e)?)?;
        }
        let rem = ip(en).powi(n as u32 + 1) / (Interval::ONE - ip(en));
        Ok(acc.widen(rem.hi()).scale(inv_c))
    }

    /// Projection onto the symmetric subspace `s₁(x,y) = s₁(y,x)`.
    pub fn symmetric_project(&self) -> Self {
        FuncBall { poly: self.poly.symmetric_project(), ..self.clone() }
    }

    /// Whether `(i+1) c_{i+1,j}` and `(j+1) c_{j+1,i}` overlap for every pair.
    pub fn is_symmetric(&self) -> bool {
        let n = self.degree();
        for a in 0..n {
            for b in (a + 1)..n {
                if a + b + 1 > n {
                    break;
                }
                let ta = self.poly.get(a + 1, b) * ((a + 1) as f64);
                let tb = self.poly.get(b + 1, a) * ((b + 1) as f64);
                if !ta.overlaps(&tb) {
                    return false;
                }
            }
        }
        true
    }

    /// Whether the concrete polynomial `p` is a member of the ball.
    pub fn contains_series(&self, p: &Series<f64>) -> bool {
        let n = self.degree();
        for (i, j, c) in self.poly.iter() {
            if !c.contains(p.get(i, j)) {
                return false;
            }
        }
        if p.degree() <= n {
            return true;
        }
        let masses = p.degree_masses(self.rho_outer);
        up_sum(&masses[n + 1..].iter().map(|&m| ip(m)).collect::<Vec<_>>()) <= self.tail
    }

    /// Writes `i,j,lo,hi` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), BallError> {
        let mut wr = csv::Writer::from_writer(w);
        for (i, j, c) in self.poly.iter() {
            wr.serialize(CoeffRow { i, j, lo: c.lo(), hi: c.hi() })
                .map_err(|e| BallError::Input(e.to_string()))?;
        }
        wr.flush().map_err(|e| BallError::Input(e.to_string()))
    }

    /// Reads `i,j,lo,hi` rows; the degree is the largest `i + j` present.
    pub fn read_csv<R: Read>(r: R, tail: f64) -> Result<Self, BallError> {
        let mut rd = csv::Reader::from_reader(r);
        let mut rows = Vec::new();
        for rec in rd.deserialize::<CoeffRow>() {
            rows.push(rec.map_err(|e| BallError::Input(e.to_string()))?);
        }
        let n = rows.iter().map(|r| r.i + r.j).max().unwrap_or(0);
        let mut poly = Series::zero(n);
        for r in rows {
            let c = Interval::new(r.lo, r.hi).map_err(|e| BallError::Input(e.to_string()))?;
            poly.set(r.i, r.j, c);
        }
        FuncBall::new(poly, tail, RHO, RHO_OUTER)
    }
}

#[derive(Serialize, Deserialize)]
struct CoeffRow {
    i: usize,
    j: usize,
    lo: f64,
    hi: f64,
}

/// Upper bound of `max_{k ≥ N+1} k q^{k-1} / R` with `q = r'/R`; this
/// bounds the derivative tail at radius `r'` per unit of tail at `R`.
fn cauchy_factor(n: usize, r_new: f64, r_outer: f64) -> f64 {
    let q = ip(r_new) / ip(r_outer);
    let qhi = q.hi();
    let kstar = -1.0 / qhi.ln();
    let k0 = n + 1;
    let k1 = (kstar.ceil() as usize + 1).max(k0);
    let mut best = Interval::ZERO;
    for k in k0..=k1 {
        let v = ip(k as f64) * ip(qhi).powi(k as u32 - 1);
        best = best.max(&v);
    }
    (best / ip(r_outer)).hi()
}

//! The reversible area-preserving map generated by `s`:
//! `(x, -s(y,x)) ↦ (y, s(x,y))`.
//!
//! Every operation exists in a float flavour (suffix `_f`, plain `[f64; 2]`
//! points) used for Newton iterations and sampling, and an interval flavour
//! on [`IVec2`] boxes used for certificates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::funcball::{BallError, FuncBall};
use crate::ivl::{IMat2, IVec2, Interval};
use crate::series::Series;

pub type Pt = [f64; 2];
pub type Mat = [[f64; 2]; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error(transparent)]
    Ball(#[from] BallError),
    #[error("no solution of -s(y,x) = u found for x = {x}, u = {u}")]
    NoBracket { x: f64, u: f64 },
    #[error("s₁ enclosure contains zero near y = {y}")]
    Fold { y: f64 },
    #[error("interval Newton did not contract near y = {y}")]
    NoContraction { y: f64 },
    #[error("orbit left the domain at step {step}: {source}")]
    Escape {
        step: usize,
        #[source]
        source: Box<MapError>,
    },
    #[error("fixed point not certified after {0} attempts")]
    NoFixedPoint(usize),
}

/// The involution `T(x,u) = (x,-u)`.
pub fn flip_f(p: Pt) -> Pt {
    [p[0], -p[1]]
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub fn mat_vec(a: &Mat, v: Pt) -> Pt {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

pub const IDENTITY: Mat = [[1.0, 0.0], [0.0, 1.0]];

/// Real eigenvalues of a 2×2 matrix, or `None` when complex.
pub fn eig2(m: &Mat) -> Option<(f64, f64)> {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc < 0.0 {
        return None;
    }
    let r = disc.sqrt();
    let (a, b) = (tr / 2.0 + r, tr / 2.0 - r);
    // larger modulus first
    if a.abs() >= b.abs() {
        Some((a, b))
    } else {
        Some((b, a))
    }
}

/// Spectral norm of a real 2×2 matrix.
pub fn opnorm_f(m: &Mat) -> f64 {
    let f = m[0][0].powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + m[1][1].powi(2);
    let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    ((f + (f * f - 4.0 * d * d).max(0.0).sqrt()) / 2.0).sqrt()
}

/// Smallest singular value of a real 2×2 matrix.
pub fn minsv_f(m: &Mat) -> f64 {
    let d = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs();
    let s = opnorm_f(m);
    if s == 0.0 {
        0.0
    } else {
        d / s
    }
}

#[derive(Clone, Debug)]
pub struct GeneratingMap {
    s: Series<f64>,
    s1: Series<f64>,
    s2: Series<f64>,
    ball: FuncBall,
    b1: FuncBall,
    b2: FuncBall,
    pub solver_tol: f64,
    pub max_iter: usize,
    /// Search window for the implicit solve when Newton from the centre fails.
    pub y_bracket: (f64, f64),
}

impl GeneratingMap {
    pub fn from_series(s: &Series<f64>) -> Self {
        Self::from_ball(&FuncBall::from_series(s)).expect("point ball has distinct radii")
    }

    pub fn from_ball(ball: &FuncBall) -> Result<Self, MapError> {
        let s = ball.midpoint();
        Ok(GeneratingMap {
            s1: s.partial(1),
            s2: s.partial(2),
            s,
            b1: ball.partial(1)?,
            b2: ball.partial(2)?,
            ball: ball.clone(),
            solver_tol: 1e-15,
            max_iter: 60,
            y_bracket: (-2.0, 2.0),
        })
    }

    pub fn series(&self) -> &Series<f64> {
        &self.s
    }

    pub fn ball(&self) -> &FuncBall {
        &self.ball
    }

    /// Generating-function values `s(x,y)`.
    pub fn s_f(&self, x: f64, y: f64) -> f64 {
        self.s.eval(x, y)
    }

    pub fn s1_f(&self, x: f64, y: f64) -> f64 {
        self.s1.eval(x, y)
    }

    pub fn s2_f(&self, x: f64, y: f64) -> f64 {
        self.s2.eval(x, y)
    }

    /// Solves `-s(y,x) = u` for `y`.
    pub fn solve_y_f(&self, x: f64, u: f64) -> Result<f64, MapError> {
        let h = |y: f64| self.s.eval(y, x) + u;
        let dh = |y: f64| self.s1.eval(y, x);
        if let Some(y) = self.newton_1d(0.5, &h, &dh) {
            return Ok(y);
        }
        // scan the bracket for a sign change, then bisect and polish
        let (a, b) = self.y_bracket;
        let cells = 64;
        let mut prev = (a, h(a));
        for k in 1..=cells {
            let y = a + (b - a) * k as f64 / cells as f64;
            let hy = h(y);
            if prev.1 == 0.0 {
                return Ok(prev.0);
            }
            if prev.1.signum() != hy.signum() {
                let (mut lo, mut hi) = (prev.0, y);
                let slo = prev.1.signum();
                for _ in 0..200 {
                    let m = 0.5 * (lo + hi);
                    if m == lo || m == hi {
                        break;
                    }
                    if h(m).signum() == slo {
                        lo = m;
                    } else {
                        hi = m;
                    }
                }
                let y0 = 0.5 * (lo + hi);
                return Ok(self.newton_1d(y0, &h, &dh).unwrap_or(y0));
            }
            prev = (y, hy);
        }
        Err(MapError::NoBracket { x, u })
    }

    fn newton_1d(&self, y0: f64, h: &dyn Fn(f64) -> f64, dh: &dyn Fn(f64) -> f64) -> Option<f64> {
        let (a, b) = self.y_bracket;
        let mut y = y0;
        for _ in 0..self.max_iter {
            let d = dh(y);
            if d == 0.0 || !d.is_finite() {
                return None;
            }
            let step = h(y) / d;
            y -= step;
            if !(y >= a && y <= b) {
                return None;
            }
            if step.abs() <= self.solver_tol * (1.0 + y.abs()) {
                // one more step to settle the last bit
                let d = dh(y);
                return Some(y - h(y) / d);
            }
        }
        None
    }

    pub fn apply_f(&self, p: Pt) -> Result<Pt, MapError> {
        let y = self.solve_y_f(p[0], p[1])?;
        Ok([y, self.s.eval(p[0], y)])
    }

    /// `T ∘ F ∘ T`, the inverse by reversibility.
    pub fn inverse_apply_f(&self, p: Pt) -> Result<Pt, MapError> {
        Ok(flip_f(self.apply_f(flip_f(p))?))
    }

    fn dmat_f(&self, x: f64, y: f64) -> Mat {
        let a = self.s1.eval(y, x);
        let b = self.s2.eval(y, x);
        let c = self.s1.eval(x, y);
        let d = self.s2.eval(x, y);
        [[-b / a, -1.0 / a], [c - d * b / a, -d / a]]
    }

    pub fn derivative_f(&self, p: Pt) -> Result<Mat, MapError> {
        let y = self.solve_y_f(p[0], p[1])?;
        Ok(self.dmat_f(p[0], y))
    }

    /// Point and derivative in one solve.
    pub fn apply_with_derivative_f(&self, p: Pt) -> Result<(Pt, Mat), MapError> {
        let y = self.solve_y_f(p[0], p[1])?;
        Ok(([y, self.s.eval(p[0], y)], self.dmat_f(p[0], y)))
    }

    pub fn inverse_derivative_f(&self, p: Pt) -> Result<Mat, MapError> {
        let m = self.derivative_f(flip_f(p))?;
        Ok([[m[0][0], -m[0][1]], [-m[1][0], m[1][1]]])
    }

    /// `Fⁿ(p)` and `DFⁿ(p)`; negative `n` iterates the inverse.
    pub fn compose_iterate_f(&self, n: i64, p: Pt) -> Result<(Pt, Mat), MapError> {
        let mut q = p;
        let mut m = IDENTITY;
        for step in 0..n.unsigned_abs() as usize {
            let (nq, d) = if n >= 0 {
                self.apply_with_derivative_f(q)
            } else {
                self.inverse_derivative_f(q).and_then(|d| Ok((self.inverse_apply_f(q)?, d)))
            }
            .map_err(|e| MapError::Escape { step, source: Box::new(e) })?;
            m = mat_mul(&d, &m);
            q = nq;
        }
        Ok((q, m))
    }

    /// Encloses the solution of `-s(y,x) = u` for every `(x,u)` in the box;
    /// the returned interval is an interval-Newton image strictly inside
    /// its search interval, which proves existence and uniqueness there.
    pub fn solve_y(&self, x: Interval, u: Interval) -> Result<Interval, MapError> {
        let yh = self.solve_y_f(x.mid(), u.mid())?;
        let a = self.s1.eval(yh, x.mid()).abs().max(1e-300);
        let b = self.s2.eval(yh, x.mid()).abs();
        let mut r = 4.0 * ((b * x.rad() + u.rad()) / a) + 1e-14 * (1.0 + yh.abs());
        let yp = Interval::point(yh);
        for _ in 0..16 {
            let y = Interval::centered(yh, r);
            let d = self.b1.eval(&IVec2::new(y, x))?;
            if d.contains_zero() {
                return Err(MapError::Fold { y: yh });
            }
            let hv = self.ball.eval(&IVec2::new(yp, x))? + u;
            let n = yp - hv.checked_div(&d).map_err(|_| MapError::Fold { y: yh })?;
            if n.interior_of(&y) {
                return Ok(n);
            }
            let reach = (n - yh).mag();
            r = (2.0 * r).max(1.5 * reach);
        }
        Err(MapError::NoContraction { y: yh })
    }

    pub fn apply(&self, p: &IVec2) -> Result<IVec2, MapError> {
        let y = self.solve_y(p.x, p.y)?;
        let v = self.ball.eval(&IVec2::new(p.x, y))?;
        Ok(IVec2::new(y, v))
    }

    pub fn inverse_apply(&self, p: &IVec2) -> Result<IVec2, MapError> {
        Ok(self.apply(&p.flip())?.flip())
    }

    fn dmat(&self, x: Interval, y: Interval) -> Result<IMat2, MapError> {
        let yx = IVec2::new(y, x);
        let xy = IVec2::new(x, y);
        let a = self.b1.eval(&yx)?;
        let b = self.b2.eval(&yx)?;
        let c = self.b1.eval(&xy)?;
        let d = self.b2.eval(&xy)?;
        let inv_a = a.recip().map_err(|_| MapError::Fold { y: y.mid() })?;
        Ok(IMat2::new(-(b * inv_a), -inv_a, c - d * b * inv_a, -(d * inv_a)))
    }

    pub fn derivative(&self, p: &IVec2) -> Result<IMat2, MapError> {
        let y = self.solve_y(p.x, p.y)?;
        self.dmat(p.x, y)
    }

    pub fn apply_with_derivative(&self, p: &IVec2) -> Result<(IVec2, IMat2), MapError> {
        let y = self.solve_y(p.x, p.y)?;
        let v = self.ball.eval(&IVec2::new(p.x, y))?;
        Ok((IVec2::new(y, v), self.dmat(p.x, y)?))
    }

    pub fn inverse_derivative(&self, p: &IVec2) -> Result<IMat2, MapError> {
        let m = self.derivative(&p.flip())?.m;
        Ok(IMat2::new(m[0][0], -m[0][1], -m[1][0], m[1][1]))
    }

    /// Interval `Fⁿ(p)` with the chained derivative product.
    pub fn compose_iterate(&self, n: i64, p: &IVec2) -> Result<(IVec2, IMat2), MapError> {
        let mut q = *p;
        let mut m = IMat2::identity();
        for step in 0..n.unsigned_abs() as usize {
            let r = if n >= 0 {
                self.apply_with_derivative(&q)
            } else {
                self.inverse_derivative(&q).and_then(|d| Ok((self.inverse_apply(&q)?, d)))
            };
            let (nq, d) = r.map_err(|e| MapError::Escape { step, source: Box::new(e) })?;
            m = d.mul(&m);
            q = nq;
        }
        Ok((q, m))
    }

    /// Float fixed point: Newton for `s(x,x) = 0` on the symmetry axis,
    /// with a full planar Newton as fallback.
    pub fn find_fixed_point_f(&self, seed: Pt) -> Result<Pt, MapError> {
        let mut x = seed[0];
        for _ in 0..self.max_iter {
            let f = self.s.eval(x, x);
            let d = self.s1.eval(x, x) + self.s2.eval(x, x);
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let step = f / d;
            x -= step;
            if step.abs() < 1e-16 * (1.0 + x.abs()) {
                return Ok([x, 0.0]);
            }
        }
        if self.s.eval(x, x).abs() < 1e-13 {
            return Ok([x, 0.0]);
        }
        let mut p = seed;
        for _ in 0..self.max_iter {
            let (q, m) = self.apply_with_derivative_f(p)?;
            let a = [[m[0][0] - 1.0, m[0][1]], [m[1][0], m[1][1] - 1.0]];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            if det == 0.0 {
                break;
            }
            let r = [q[0] - p[0], q[1] - p[1]];
            let dx = [(a[1][1] * r[0] - a[0][1] * r[1]) / det, (-a[1][0] * r[0] + a[0][0] * r[1]) / det];
            p = [p[0] - dx[0], p[1] - dx[1]];
            if dx[0].abs().max(dx[1].abs()) < 1e-15 {
                return Ok(p);
            }
        }
        Err(MapError::NoFixedPoint(self.max_iter))
    }

    /// Certified fixed point: a Krawczyk test on `F(p) - p` around the
    /// float fixed point proves existence and uniqueness in the returned box.
    pub fn find_fixed_point(&self, seed: &IVec2) -> Result<IVec2, MapError> {
        let p = self.find_fixed_point_f(seed.mid())?;
        let pp = IVec2::point(p[0], p[1]);
        let m = self.derivative_f(p)?;
        let a = [[m[0][0] - 1.0, m[0][1]], [m[1][0], m[1][1] - 1.0]];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let c = IMat2::from_f64([[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]]);
        let fp = self.apply(&pp)?;
        let resid = fp.sub(&pp);
        let mut r = 1e-13 * (1.0 + p[0].abs());
        for _ in 0..12 {
            let bx = pp.inflate(r);
            let d = self.derivative(&bx)?;
            let dm = IMat2::new(d.m[0][0] - 1.0, d.m[0][1], d.m[1][0], d.m[1][1] - 1.0);
            let cd = c.mul(&dm);
            let ident_minus = IMat2::new(
                Interval::ONE - cd.m[0][0],
                -cd.m[0][1],
                -cd.m[1][0],
                Interval::ONE - cd.m[1][1],
            );
            let k = pp.sub(&c.mul_vec(&resid)).add(&ident_minus.mul_vec(&bx.sub(&pp)));
            if k.interior_of(&bx) {
                return Ok(k);
            }
            r *= 4.0;
        }
        Err(MapError::NoFixedPoint(12))
    }
}

/// Diagonal rescaling `Λ(x,u) = (λx, μu)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPair {
    pub lambda: Interval,
    pub mu: Interval,
}

impl ScalingPair {
    pub fn new(lambda: Interval, mu: Interval) -> Result<Self, String> {
        if !(lambda.hi() < 0.0 && mu.lo() > 0.0) {
            return Err(format!("need λ < 0 < μ, got λ = {lambda}, μ = {mu}"));
        }
        Ok(ScalingPair { lambda, mu })
    }

    /// Rigorous enclosures of the fixed-point scalings λ*, μ*.
    pub fn fixed_point_enclosure() -> Self {
        ScalingPair {
            lambda: Interval::new(-0.24887681, -0.24887376).expect("ordered"),
            mu: Interval::new(0.061107811, 0.061112465).expect("ordered"),
        }
    }

    pub fn from_f64(lambda: f64, mu: f64) -> Self {
        ScalingPair { lambda: Interval::point(lambda), mu: Interval::point(mu) }
    }

    pub fn mid(&self) -> (f64, f64) {
        (self.lambda.mid(), self.mu.mid())
    }

    pub fn apply(&self, p: &IVec2) -> IVec2 {
        IVec2::new(self.lambda * p.x, self.mu * p.y)
    }

    pub fn apply_f(&self, p: Pt) -> Pt {
        [self.lambda.mid() * p[0], self.mu.mid() * p[1]]
    }

    pub fn matrix(&self) -> IMat2 {
        IMat2::diag(self.lambda, self.mu)
    }

    pub fn matrix_f(&self) -> Mat {
        [[self.lambda.mid(), 0.0], [0.0, self.mu.mid()]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear() -> GeneratingMap {
        GeneratingMap::from_series(&Series::from_monomials(3, &[(1, 0, 1.0), (0, 1, 1.0)]))
    }

    fn henon(a: f64) -> GeneratingMap {
        GeneratingMap::from_series(&Series::from_monomials(3, &[(1, 0, 1.0), (0, 0, -0.5), (0, 2, a / 2.0)]))
    }

    #[test]
    fn linear_map_formulas() {
        let m = linear();
        assert!((m.solve_y_f(1.0, -3.0).unwrap() - 2.0).abs() < 1e-14);
        let y = m.solve_y(Interval::point(1.0), Interval::point(-3.0)).unwrap();
        assert!(y.contains(2.0));
        let q = m.apply_f([1.0, -3.0]).unwrap();
        assert!((q[0] - 2.0).abs() < 1e-14 && (q[1] - 3.0).abs() < 1e-14);
        let o = m.apply(&IVec2::point(0.0, 0.0)).unwrap();
        assert!(o.contains([0.0, 0.0]));
        let inv = m.inverse_apply(&IVec2::point(2.0, 3.0)).unwrap();
        assert!(inv.contains([1.0, -3.0]));
        let d = m.derivative(&IVec2::point(0.3, 0.1)).unwrap();
        assert!(d.m[0][0].contains(-1.0) && d.m[0][1].contains(-1.0));
        assert!(d.m[1][0].contains(0.0) && d.m[1][1].contains(-1.0));
    }

    #[test]
    fn linear_second_iterate() {
        let mut m = linear();
        m.y_bracket = (-5.0, 5.0);
        let (q, _) = m.compose_iterate(2, &IVec2::point(1.0, 1.0)).unwrap();
        assert!(q.contains([3.0, 1.0]));
        let (q0, m0) = m.compose_iterate(0, &IVec2::point(0.4, 0.2)).unwrap();
        assert!(q0.contains([0.4, 0.2]));
        assert_eq!(m0, IMat2::identity());
    }

    #[test]
    fn henon_fixed_point() {
        let m = henon(3.0);
        let p = m.find_fixed_point(&IVec2::point(0.3, 0.0)).unwrap();
        assert!(p.x.contains(1.0 / 3.0) || (p.x.mid() - 1.0 / 3.0).abs() < 1e-15);
        assert!(p.y.contains(0.0));
        let lin = linear();
        let p = lin.find_fixed_point(&IVec2::point(0.1, 0.0)).unwrap();
        assert!(p.contains([0.0, 0.0]));
    }

    #[test]
    fn reversibility_and_roundtrip() {
        let m = henon(2.5);
        for &p in &[[0.1, 0.05], [0.4, -0.2], [-0.2, 0.3]] {
            let q = m.apply_f(p).unwrap();
            let b = m.inverse_apply_f(q).unwrap();
            assert!((b[0] - p[0]).abs() < 1e-13 && (b[1] - p[1]).abs() < 1e-13);
            let bx = IVec2::point(p[0], p[1]);
            let back = m.inverse_apply(&m.apply(&bx).unwrap()).unwrap();
            assert!(back.contains(p));
        }
    }

    #[test]
    fn escape_reports_step() {
        let m = henon(5.0);
        let r = m.compose_iterate_f(50, [1.5, 0.0]);
        match r {
            Err(MapError::Escape { step, .. }) => assert!(step < 50),
            other => panic!("expected escape, got {other:?}"),
        }
    }

    #[test]
    fn scaling_pair_signs() {
        assert!(ScalingPair::new(Interval::point(0.2), Interval::point(0.1)).is_err());
        let s = ScalingPair::fixed_point_enclosure();
        assert!(s.lambda.hi() < 0.0 && s.mu.lo() > 0.0);
    }
}

//! Period-doubling cascade of the area-preserving Hénon family
//! `H_a(x,u) = (−u + 1 − a x², x)`.
//!
//! The stable orbit of period `2^{k−1}` is followed in `a` by Newton
//! continuation until the trace of its monodromy matrix reaches −2 at
//! `a_k`; the orbit of period `2^k` born there is followed in turn. A
//! serial coarse pass brackets every crossing and the brackets are then
//! refined by bisection in parallel. Levels `k ≥ 6` run in double-double
//! arithmetic unless the caller fixes the precision.

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use twofloat::TwoFloat;

use crate::exec::ExecPolicy;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CascadeError {
    #[error("orbit of period {period} lost near a = {a}")]
    LostBranch { period: usize, a: f64 },
    #[error("bracket [{lo}, {hi}] does not straddle the crossing")]
    Bracket { lo: f64, hi: f64 },
    #[error("need at least {need} records, got {got}")]
    Insufficient { need: usize, got: usize },
    #[error("monodromy at period {period} is not elliptic (trace {trace})")]
    NotElliptic { period: usize, trace: f64 },
    #[error("{0}")]
    Invalid(String),
}

type V<T> = [T; 2];
type M<T> = [[T; 2]; 2];

fn c<T: Float>(x: f64) -> T {
    T::from(x).expect("representable")
}

/// Floating-point types the cascade runs in.
pub trait Real: Float + Send + Sync + std::fmt::Debug {
    const DIGITS: u32;
    fn to_f64(self) -> f64;
    fn from_two(x: TwoFloat) -> Self;
    fn to_two(self) -> TwoFloat;
}

impl Real for f64 {
    const DIGITS: u32 = 15;
    fn to_f64(self) -> f64 {
        self
    }
    fn from_two(x: TwoFloat) -> Self {
        x.hi() + x.lo()
    }
    fn to_two(self) -> TwoFloat {
        TwoFloat::from(self)
    }
}

impl Real for TwoFloat {
    const DIGITS: u32 = 31;
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
    fn from_two(x: TwoFloat) -> Self {
        x
    }
    fn to_two(self) -> TwoFloat {
        self
    }
}

/// `H_a`, implemented directly with its analytic derivative and inverse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Henon<T> {
    pub a: T,
}

/// The Hénon map at parameter `a` (meaningful for `a > −1`).
pub fn henon(a: f64) -> Henon<f64> {
    Henon { a }
}

impl<T: Real> Henon<T> {
    pub fn new(a: T) -> Self {
        Henon { a }
    }

    pub fn apply(&self, p: V<T>) -> V<T> {
        [T::one() - p[1] - self.a * p[0] * p[0], p[0]]
    }

    pub fn inverse(&self, p: V<T>) -> V<T> {
        [p[1], T::one() - self.a * p[1] * p[1] - p[0]]
    }

    pub fn jacobian(&self, p: V<T>) -> M<T> {
        [[-(self.a + self.a) * p[0], -T::one()], [T::one(), T::zero()]]
    }

    /// `Hⁿ(p)` and `DHⁿ(p)`.
    pub fn iterate(&self, p: V<T>, n: usize) -> (V<T>, M<T>) {
        let mut q = p;
        let mut m = [[T::one(), T::zero()], [T::zero(), T::one()]];
        for _ in 0..n {
            m = mul(&self.jacobian(q), &m);
            q = self.apply(q);
        }
        (q, m)
    }

    /// Fixed point `x = u = (−1 + √(1+a))/a`.
    pub fn fixed_point(&self) -> V<T> {
        let x = ((T::one() + self.a).sqrt() - T::one()) / self.a;
        [x, x]
    }

    pub fn orbit(&self, p: V<T>, n: usize) -> Vec<V<T>> {
        let mut out = Vec::with_capacity(n);
        let mut q = p;
        for _ in 0..n {
            out.push(q);
            q = self.apply(q);
        }
        out
    }
}

fn mul<T: Float>(a: &M<T>, b: &M<T>) -> M<T> {
    let mut r = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

fn trace<T: Float>(m: &M<T>) -> T {
    m[0][0] + m[1][1]
}

fn det<T: Float>(m: &M<T>) -> T {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn norm<T: Float>(v: V<T>) -> T {
    v[0].hypot(v[1])
}

fn sub<T: Float>(a: V<T>, b: V<T>) -> V<T> {
    [a[0] - b[0], a[1] - b[1]]
}

fn tol<T: Real>() -> T {
    c(10f64.powi(-(T::DIGITS as i32) + 1))
}

/// Periodic point of period `n` by Newton's method from `p0`. Stops
/// once the residual reaches rounding level or stops improving; the
/// best iterate is accepted if its residual is below `1e−12`.
pub fn periodic_point<T: Real>(h: &Henon<T>, p0: V<T>, n: usize) -> Option<V<T>> {
    let mut p = p0;
    let mut best: Option<(T, V<T>)> = None;
    let mut stall = 0;
    for _ in 0..60 {
        let (q, m) = h.iterate(p, n);
        let r = sub(q, p);
        let res = norm(r);
        if !res.is_finite() {
            break;
        }
        if best.map_or(true, |b| res < b.0) {
            best = Some((res, p));
            stall = 0;
        } else {
            stall += 1;
            if stall >= 3 {
                break;
            }
        }
        if res <= tol::<T>() * c(0.1) {
            break;
        }
        let a = [[m[0][0] - T::one(), m[0][1]], [m[1][0], m[1][1] - T::one()]];
        let d = det(&a);
        if d == T::zero() || !d.is_finite() {
            break;
        }
        let dx = (a[1][1] * r[0] - a[0][1] * r[1]) / d;
        let dy = (a[0][0] * r[1] - a[1][0] * r[0]) / d;
        p = [p[0] - dx, p[1] - dy];
        if !p[0].is_finite() || !p[1].is_finite() || norm(p) > c(10.0) {
            break;
        }
    }
    best.filter(|b| b.0.to_f64() < 1e-12).map(|b| b.1)
}

/// State of a branch at one parameter.
#[derive(Clone, Copy, Debug)]
struct Point<T> {
    a: T,
    p: V<T>,
    trace: T,
}

fn solve<T: Real>(a: T, guess: V<T>, n: usize) -> Option<Point<T>> {
    let h = Henon::new(a);
    let p = periodic_point(&h, guess, n)?;
    let m = h.iterate(p, n).1;
    Some(Point { a, p, trace: trace(&m) })
}

/// Follows the branch of period `n` upward from `start` with step `h`
/// until the trace drops below `target`; returns the two points
/// straddling the crossing.
fn bracket<T: Real>(start: Point<T>, n: usize, first: T, step: T, target: T, limit: T) -> Result<(Point<T>, Point<T>), CascadeError> {
    let mut prev = start;
    let mut slope = [T::zero(), T::zero()];
    let mut h = first.min(step);
    let mut halvings = 0;
    while prev.a < limit {
        let a = prev.a + h;
        let guess = [prev.p[0] + slope[0] * h, prev.p[1] + slope[1] * h];
        match solve(a, guess, n) {
            Some(next) if (next.trace - prev.trace).abs() < c(0.5) && minimal(&next, n) => {
                if next.trace < target {
                    return Ok((prev, next));
                }
                slope = [(next.p[0] - prev.p[0]) / h, (next.p[1] - prev.p[1]) / h];
                prev = next;
                halvings = 0;
                h = (h + h).min(step);
            }
            _ => {
                halvings += 1;
                if halvings > 30 {
                    return Err(CascadeError::LostBranch { period: n, a: a.to_f64() });
                }
                h = h / c(2.0);
            }
        }
    }
    Err(CascadeError::Bracket { lo: start.a.to_f64(), hi: limit.to_f64() })
}

/// The point does not have period `n/2`.
fn minimal<T: Real>(pt: &Point<T>, n: usize) -> bool {
    n % 2 == 1 || {
        let h = Henon::new(pt.a);
        norm(sub(h.iterate(pt.p, n / 2).0, pt.p)) > c(1e-9)
    }
}

/// Bisection on the parameter for `trace = target` inside a bracket.
fn refine<T: Real>(lo: Point<T>, hi: Point<T>, n: usize, target: T) -> Result<Point<T>, CascadeError> {
    if !(lo.trace >= target && hi.trace < target) {
        return Err(CascadeError::Bracket { lo: lo.a.to_f64(), hi: hi.a.to_f64() });
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        if hi.a - lo.a <= tol::<T>() * hi.a.abs() {
            break;
        }
        let a = (lo.a + hi.a) / c(2.0);
        let t = (a - lo.a) / (hi.a - lo.a);
        let guess = [lo.p[0] + (hi.p[0] - lo.p[0]) * t, lo.p[1] + (hi.p[1] - lo.p[1]) * t];
        let mid = solve(a, guess, n).ok_or(CascadeError::LostBranch { period: n, a: a.to_f64() })?;
        if mid.trace >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = (target - lo.trace) / (hi.trace - lo.trace);
    let a = lo.a + (hi.a - lo.a) * t;
    solve(a, lo.p, n).ok_or(CascadeError::LostBranch { period: n, a: a.to_f64() })
}

/// Orbit of period `2n` born from the period-`n` orbit at `p`, found at
/// parameter `a` just past the doubling.
fn daughter<T: Real>(parent: Point<T>, a: T, n: usize) -> Option<Point<T>> {
    let old = solve(a, parent.p, n)?;
    let m = Henon::new(a).iterate(old.p, n).1;
    // eigenvector of the monodromy for the eigenvalue near −1
    let mut v = [m[0][1], -(m[0][0] + T::one())];
    if norm(v) < c(1e-8) {
        v = [-(m[1][1] + T::one()), m[1][0]];
    }
    let nv = norm(v);
    let v = [v[0] / nv, v[1] / nv];
    let delta = (a - parent.a).abs().sqrt();
    for s in [1.0, 3.0, 0.3, 10.0, 0.1, 30.0] {
        for sign in [1.0, -1.0] {
            let amp = delta * c(s * sign);
            let guess = [old.p[0] + v[0] * amp, old.p[1] + v[1] * amp];
            if let Some(pt) = solve(a, guess, 2 * n) {
                let apart = norm(sub(pt.p, old.p)) > delta * c(1e-3);
                let h = Henon::new(a);
                let proper = norm(sub(h.iterate(pt.p, n).0, pt.p)) > delta * c(1e-3);
                if apart && proper && pt.trace.abs() < c(2.0) {
                    return Some(pt);
                }
            }
        }
    }
    None
}

/// Arithmetic used by [`cascade`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Double-double from level 6 on.
    #[default]
    Auto,
    Double,
    Extended,
}

impl Precision {
    fn extended(self, k: usize) -> bool {
        match self {
            Precision::Auto => k >= EXTENDED_FROM,
            Precision::Double => false,
            Precision::Extended => true,
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Precision::Auto),
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(format!("unknown precision `{other}` (expected auto, double or extended)")),
        }
    }
}

/// First level computed in double-double under [`Precision::Auto`].
pub const EXTENDED_FROM: usize = 6;

/// Reference rotation number fixing `α_k`.
pub const ROTATION: f64 = 1.0 / 8.0;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CascadeRecord {
    pub k: usize,
    /// The orbit of period `2^{k−1}` loses stability here.
    pub a_k: f64,
    /// Reference parameter in `(a_k, a_{k+1})`, where the monodromy of the
    /// `2^k` orbit has trace `2 cos(2π r)`.
    pub alpha_k: f64,
    /// `|p′_k − p_k|`.
    pub d_k: f64,
    /// `p_k − p′_k` along the diagonal `x = u`; alternates in sign.
    pub d_signed: f64,
    /// Component of `p_k − p′_k` along the minor axis of the invariant
    /// ellipse at `p_k`.
    pub c_k: f64,
    /// Significant decimal digits of the arithmetic used.
    pub precision_used: u32,
    /// `‖H^{2^k}(p_k) − p_k‖`.
    pub residual: f64,
    /// `|det DH^{2^k}(p_k) − 1|`.
    pub det_drift: f64,
}

struct Level<T> {
    a: Point<T>,
    alpha: Point<T>,
    /// Parent orbit solved at `alpha`.
    parent: V<T>,
}

/// Coarse pass for one level: brackets for `a_k` on the parent branch
/// and for `α_k` on the daughter branch, plus the daughter just past
/// `a_{k+1}` to seed the next level.
struct Coarse {
    n: usize,
    a_br: (Point<TwoFloat>, Point<TwoFloat>),
    alpha_br: (Point<TwoFloat>, Point<TwoFloat>),
}

fn up<T: Real>(p: Point<T>) -> Point<TwoFloat> {
    Point { a: p.a.to_two(), p: [p.p[0].to_two(), p.p[1].to_two()], trace: p.trace.to_two() }
}

fn down<T: Real>(p: Point<TwoFloat>) -> Point<T> {
    Point { a: T::from_two(p.a), p: [T::from_two(p.p[0]), T::from_two(p.p[1])], trace: T::from_two(p.trace) }
}

fn coarse<T: Real>(start: Point<T>, n: usize, gap: f64, prev_a: Option<(Point<T>, Point<T>)>) -> Result<(Option<(Point<T>, Point<T>)>, (Point<T>, Point<T>), (Point<T>, Point<T>)), CascadeError> {
    let step: T = c(gap / 60.0);
    let limit = start.a + c(4.0 * gap + 1e-3);
    // crossing of −2 on the parent branch
    let a_br = match prev_a {
        Some(b) => b,
        None => bracket(start, n, step, step, c(-2.0), limit)?,
    };
    // daughter just past the doubling
    let at = refine(a_br.0, a_br.1, n, c(-2.0))?;
    let born = at.a + c(gap * 1e-4);
    let d = daughter(at, born, n).ok_or(CascadeError::LostBranch { period: 2 * n, a: born.to_f64() })?;
    let small: T = c(gap / (8.0 * 60.0));
    let target: T = c((2.0 * std::f64::consts::PI * ROTATION).cos() * 2.0);
    let alpha_br = bracket(d, 2 * n, born - at.a, small, target, limit)?;
    let next_br = bracket(alpha_br.0, 2 * n, small, small, c(-2.0), limit)?;
    Ok((Some(a_br), alpha_br, next_br))
}

fn measure<T: Real>(lv: &Level<T>, n: usize) -> Result<(f64, f64, f64, f64, f64), CascadeError> {
    let h = Henon::new(lv.alpha.a);
    let kids = h.orbit(lv.alpha.p, 2 * n);
    let parents = h.orbit(lv.parent, n);
    // each parent point and the farther of its two daughters
    let mut best: Option<(T, V<T>, V<T>)> = None;
    for q in &parents {
        let near = kids
            .iter()
            .enumerate()
            .min_by(|x, y| norm(sub(*x.1, *q)).partial_cmp(&norm(sub(*y.1, *q))).expect("finite"))
            .map(|(i, _)| i)
            .expect("nonempty orbit");
        let pair = [kids[near], kids[(near + n) % (2 * n)]];
        let far = if norm(sub(pair[0], *q)) >= norm(sub(pair[1], *q)) { pair[0] } else { pair[1] };
        let d = norm(sub(far, *q));
        if best.map_or(true, |b| d > b.0) {
            best = Some((d, *q, far));
        }
    }
    let (d, q, p) = best.expect("nonempty orbit");
    let (back, m) = h.iterate(p, 2 * n);
    let residual = norm(sub(back, p)).to_f64();
    let det_drift = (det(&m) - T::one()).abs().to_f64();
    let tr = trace(&m);
    if tr.abs() >= c(2.0) {
        return Err(CascadeError::NotElliptic { period: 2 * n, trace: tr.to_f64() });
    }
    // invariant quadratic form of the monodromy; the minor axis of its
    // ellipses is the eigenvector of the larger eigenvalue
    let sgn = if m[1][0] > T::zero() { T::one() } else { -T::one() };
    let qa = m[1][0] * sgn;
    let qb = (m[1][1] - m[0][0]) / c(2.0) * sgn;
    let qc = -m[0][1] * sgn;
    let mean = (qa + qc) / c(2.0);
    let rad = (((qa - qc) / c(2.0)).powi(2) + qb * qb).sqrt();
    let lmax = mean + rad;
    let mut e = [qb, lmax - qa];
    if norm(e) < c(1e-30) {
        e = [lmax - qc, qb];
    }
    let ne = norm(e);
    let diff = sub(p, q);
    let c_k = ((diff[0] * e[0] + diff[1] * e[1]) / ne).abs().to_f64();
    let signed = ((diff[0] + diff[1]) / c(std::f64::consts::SQRT_2)).to_f64();
    Ok((d.to_f64(), signed, c_k, residual, det_drift))
}

fn refine_level<T: Real>(co: &Coarse) -> Result<(Level<T>, f64, f64, f64, f64, f64), CascadeError> {
    let n = co.n;
    let a = refine(down::<T>(co.a_br.0), down::<T>(co.a_br.1), n, c(-2.0))?;
    let target: T = c((2.0 * std::f64::consts::PI * ROTATION).cos() * 2.0);
    let alpha = refine(down::<T>(co.alpha_br.0), down::<T>(co.alpha_br.1), 2 * n, target)?;
    let parent = periodic_point(&Henon::new(alpha.a), a.p, n).ok_or(CascadeError::LostBranch { period: n, a: alpha.a.to_f64() })?;
    let lv = Level { a, alpha, parent };
    let (d, s, ck, res, drift) = measure(&lv, n)?;
    Ok((lv, d, s, ck, res, drift))
}

/// Records `k = 1..=kmax` of the cascade.
pub fn cascade(kmax: usize, precision: Precision, policy: ExecPolicy) -> Result<Vec<CascadeRecord>, CascadeError> {
    if kmax == 0 || kmax > 10 {
        return Err(CascadeError::Invalid(format!("kmax = {kmax} out of range 1..=10")));
    }
    // serial coarse pass
    let mut coarse_levels: Vec<Coarse> = Vec::new();
    let mut start = up(solve(2.0f64, henon(2.0).fixed_point(), 1).ok_or(CascadeError::LostBranch { period: 1, a: 2.0 })?);
    let mut gap = 1.0;
    let mut carried: Option<(Point<TwoFloat>, Point<TwoFloat>)> = None;
    for k in 1..=kmax {
        let n = 1usize << (k - 1);
        let ext = precision.extended(k);
        let (a_br, alpha_br, next_br) = if ext {
            coarse::<TwoFloat>(start, n, gap, carried)?
        } else {
            let r = coarse::<f64>(down(start), n, gap, carried.map(|(x, y)| (down(x), down(y))))?;
            let u = |b: (Point<f64>, Point<f64>)| (up(b.0), up(b.1));
            (r.0.map(u), u(r.1), u(r.2))
        };
        let a_br = a_br.expect("bracket present");
        let next_gap = (next_br.1.a - a_br.1.a).to_f64().abs();
        coarse_levels.push(Coarse { n, a_br, alpha_br });
        carried = Some(next_br);
        start = next_br.0;
        gap = next_gap.max(1e-12);
    }
    // parallel refinement
    let refined: Vec<Result<CascadeRecord, CascadeError>> = policy.map_range(coarse_levels.len(), |i| {
        let co = &coarse_levels[i];
        let k = i + 1;
        let ext = precision.extended(k);
        let (a_k, alpha_k, d, s, ck, res, drift, digits) = if ext {
            let (lv, d, s, ck, res, drift) = refine_level::<TwoFloat>(co)?;
            (lv.a.a.to_f64(), lv.alpha.a.to_f64(), d, s, ck, res, drift, TwoFloat::DIGITS)
        } else {
            let (lv, d, s, ck, res, drift) = refine_level::<f64>(co)?;
            (lv.a.a, lv.alpha.a, d, s, ck, res, drift, f64::DIGITS)
        };
        Ok(CascadeRecord { k, a_k, alpha_k, d_k: d, d_signed: s, c_k: ck, precision_used: digits, residual: res, det_drift: drift })
    });
    refined.into_iter().collect()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RatioReport {
    /// `(k, (a_k − a_{k−1})/(a_{k+1} − a_k))`.
    pub ratios: Vec<(usize, f64)>,
    /// Aitken Δ² extrapolation of the last three ratios.
    pub accelerated: f64,
}

/// Ratios of successive parameter gaps and their Aitken limit.
pub fn universal_ratio(records: &[CascadeRecord]) -> Result<RatioReport, CascadeError> {
    if records.len() < 4 {
        return Err(CascadeError::Insufficient { need: 4, got: records.len() });
    }
    let a: Vec<f64> = records.iter().map(|r| r.a_k).collect();
    let ratios: Vec<(usize, f64)> = (1..a.len() - 1).map(|i| (records[i].k, (a[i] - a[i - 1]) / (a[i + 1] - a[i]))).collect();
    Ok(RatioReport { accelerated: aitken(&ratios.iter().map(|r| r.1).collect::<Vec<_>>()), ratios })
}

/// Aitken's Δ² on the last three terms; falls back to the last term when
/// the second difference vanishes.
pub fn aitken(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 3 {
        return x.last().copied().unwrap_or(f64::NAN);
    }
    let (x0, x1, x2) = (x[n - 3], x[n - 2], x[n - 1]);
    let dd = x2 - 2.0 * x1 + x0;
    if dd.abs() < 1e-300 {
        x2
    } else {
        x2 - (x2 - x1).powi(2) / dd
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ScalingReport {
    /// `(k, −d_k/d_{k+1})` from the signed displacements.
    pub d_ratios: Vec<(usize, f64)>,
    /// `(k, c_k/c_{k+1})`.
    pub c_ratios: Vec<(usize, f64)>,
}

pub fn scaling_ratios(records: &[CascadeRecord]) -> Result<ScalingReport, CascadeError> {
    if records.len() < 2 {
        return Err(CascadeError::Insufficient { need: 2, got: records.len() });
    }
    let d_ratios = records.windows(2).map(|w| (w[0].k, -w[0].d_signed / w[1].d_signed)).collect();
    let c_ratios = records.windows(2).map(|w| (w[0].k, w[0].c_k / w[1].c_k)).collect();
    Ok(ScalingReport { d_ratios, c_ratios })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_at_three() {
        let h = henon(3.0);
        let p = h.fixed_point();
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-15);
        let q = h.apply(p);
        assert!((q[0] - p[0]).abs() < 1e-15 && (q[1] - p[1]).abs() < 1e-15);
        assert!((trace(&h.jacobian(p)) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_and_determinant() {
        let h = henon(4.2);
        for p in [[0.3, -0.1], [-0.7, 0.45], [0.01, 0.9]] {
            let q = h.inverse(h.apply(p));
            assert!((q[0] - p[0]).abs() < 1e-14 && (q[1] - p[1]).abs() < 1e-14);
            assert_eq!(det(&h.jacobian(p)), 1.0);
        }
    }

    #[test]
    fn aitken_on_geometric_sequence() {
        let x: Vec<f64> = (0..5).map(|k| 2.0 + 0.5f64.powi(k)).collect();
        assert!((aitken(&x) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn precision_switch() {
        assert!(!Precision::Auto.extended(5));
        assert!(Precision::Auto.extended(6));
        assert!(Precision::Extended.extended(1));
        assert!(!Precision::Double.extended(9));
    }
}

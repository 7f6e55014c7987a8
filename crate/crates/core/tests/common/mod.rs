//! Checks shared by the property suites and the acceptance harness. Each
//! returns `Err` with a description of the first violated containment.

#![allow(dead_code)]

use feigen2d::apmap::Pt;
use feigen2d::{FuncBall, GeneratingMap, IVec2, Interval, Series};

fn iv(a: f64, b: f64) -> Interval {
    Interval::spanning(a, b)
}

/// `x + t·(hi − lo)` clamped into the interval.
fn pick(i: Interval, t: f64) -> f64 {
    (i.lo() + t * (i.hi() - i.lo())).clamp(i.lo(), i.hi())
}

fn holds(name: &str, point: f64, small: Interval, big: Interval) -> Result<(), String> {
    if !small.contains(point) {
        return Err(format!("{name}: {point:e} not in {small}"));
    }
    if !small.subset_of(&big) {
        return Err(format!("{name}: {small} not inside {big}"));
    }
    Ok(())
}

/// Inclusion isotonicity on one case: with `a ∈ A ⊆ A'` and `b ∈ B ⊆ B'`,
/// `a ∘ b ∈ A ∘ B ⊆ A' ∘ B'` for each operation that is defined.
pub fn interval_case(a: (f64, f64), b: (f64, f64), grow: (f64, f64), t: (f64, f64)) -> Result<(), String> {
    let (ai, bi) = (iv(a.0, a.1), iv(b.0, b.1));
    let (aw, bw) = (ai.inflate(grow.0.abs()), bi.inflate(grow.1.abs()));
    let (x, y) = (pick(ai, t.0), pick(bi, t.1));
    holds("add", x + y, ai + bi, aw + bw)?;
    holds("sub", x - y, ai - bi, aw - bw)?;
    holds("mul", x * y, ai * bi, aw * bw)?;
    if !bw.contains_zero() {
        holds("div", x / y, ai.checked_div(&bi).unwrap(), aw.checked_div(&bw).unwrap())?;
    }
    holds("sqr", x * x, ai.sqr(), aw.sqr())?;
    holds("abs", x.abs(), ai.abs(), aw.abs())?;
    holds("powi3", x.powi(3), ai.powi(3), aw.powi(3))?;
    if aw.lo() >= 0.0 {
        holds("sqrt", x.sqrt(), ai.sqrt().unwrap(), aw.sqrt().unwrap())?;
    }
    if aw.lo() > 0.0 {
        holds("ln", x.ln(), ai.ln().unwrap(), aw.ln().unwrap())?;
    }
    if aw.hi() < 700.0 {
        holds("exp", x.exp(), ai.exp().unwrap(), aw.exp().unwrap())?;
    }
    Ok(())
}

/// Degree-4 polynomial from 15 coefficients in the centered basis.
pub fn poly4(c: &[f64]) -> Series<f64> {
    let mut k = 0;
    Series::from_fn(4, |_, _| {
        let v = c[k % c.len()];
        k += 1;
        v
    })
}

/// Ball semantics on one pair of polynomials: sums, products and
/// derivatives of members are members, and point values lie in the ball's
/// range enclosure.
pub fn funcball_case(p: &Series<f64>, q: &Series<f64>, at: Pt) -> Result<(), String> {
    let bp = FuncBall::from_series(p);
    let bq = FuncBall::from_series(q);
    let check = |name: &str, ball: Result<FuncBall, feigen2d::funcball::BallError>, s: Series<f64>| -> Result<(), String> {
        let ball = ball.map_err(|e| format!("{name}: {e}"))?;
        if ball.contains_series(&s) {
            Ok(())
        } else {
            Err(format!("{name}: exact result outside the ball"))
        }
    };
    check("add", bp.add(&bq), p.add(q))?;
    check("sub", bp.sub(&bq), p.sub(q))?;
    check("mul", bp.mul(&bq), p.mul(q))?;
    check("partial", bp.partial(1), p.partial(1))?;
    // members stay members after widening
    let wide = bp.widen(1e-3);
    let nudged = p.add(&Series::constant(4, 5e-4));
    if !wide.contains_series(&nudged) {
        return Err("widen: nudged polynomial outside".into());
    }
    let b = IVec2::point(at[0], at[1]).inflate(1e-3);
    let enc = bp.eval(&b).map_err(|e| e.to_string())?;
    let v = p.eval(at[0], at[1]);
    if !enc.contains(v) {
        return Err(format!("eval: {v} not in {enc}"));
    }
    let enc_w = wide.eval(&b).map_err(|e| e.to_string())?;
    if !enc.subset_of(&enc_w) {
        return Err("eval: widening shrank the range".into());
    }
    Ok(())
}

/// `s = x + y + Σ c·xⁱyʲ` over `2 ≤ i+j ≤ 3`, projected onto the
/// subspace `s₁(x,y) = s₁(y,x)` where the map is area-preserving.
pub fn perturbed_map(c: &[f64]) -> Series<f64> {
    let mono = [(2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];
    let mut terms = vec![(1, 0, 1.0), (0, 1, 1.0)];
    terms.extend(mono.iter().zip(c).map(|(&(i, j), &v)| (i, j, v)));
    Series::from_monomials(3, &terms).symmetric_project()
}

/// The interval derivative at a point encloses a matrix of determinant 1.
pub fn symplectic_case(coeffs: &[f64], p: Pt) -> Result<(), String> {
    let s = perturbed_map(coeffs);
    let m = GeneratingMap::from_ball(&FuncBall::from_series(&s)).map_err(|e| e.to_string())?;
    let d = m.derivative(&IVec2::point(p[0], p[1])).map_err(|e| e.to_string())?;
    let det = d.det();
    if det.contains(1.0) {
        Ok(())
    } else {
        Err(format!("det {det} misses 1 at {p:?}"))
    }
}

/// Central differences of the map agree with its derivative at `O(h²)`:
/// halving `h` cuts the error by about four, or the error is at rounding
/// level.
pub fn derivative_fd_case(coeffs: &[f64], p: Pt) -> Result<(), String> {
    let m = GeneratingMap::from_series(&perturbed_map(coeffs));
    let d = m.derivative_f(p).map_err(|e| e.to_string())?;
    let err = |h: f64| -> Result<f64, String> {
        let mut worst: f64 = 0.0;
        for j in 0..2 {
            let mut a = p;
            let mut b = p;
            a[j] += h;
            b[j] -= h;
            let fa = m.apply_f(a).map_err(|e| e.to_string())?;
            let fb = m.apply_f(b).map_err(|e| e.to_string())?;
            for i in 0..2 {
                worst = worst.max(((fa[i] - fb[i]) / (2.0 * h) - d[i][j]).abs());
            }
        }
        Ok(worst)
    };
    let (h, e1) = (1e-2, err(1e-2)?);
    let e2 = err(h / 2.0)?;
    if e1 < 1e-9 || (e2 / e1 > 0.15 && e2 / e1 < 0.35 && e1 < 10.0 * h * h) {
        Ok(())
    } else {
        Err(format!("errors {e1:e} at h, {e2:e} at h/2"))
    }
}

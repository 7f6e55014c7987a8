//! The doubling operator on generating functions.
//!
//! `R[s](x,y) = μ⁻¹ s(z(x,y), λy)` where `λ` solves `s(λ,1) + s(0,1) = 0`,
//! `z` solves `s(λx,z) + s(λy,z) = 0` and `μ = ∂₁z(1,0)`. The fixed point is
//! found by Newton's method on the coefficients of the symmetric subspace
//! with the normalizations `s(1,0) = 0`, `∂₁s(1,0) = 1` built in.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::ExecPolicy;
use crate::funcball::{BallError, FuncBall, RHO};
use crate::ivl::{IVec2, Interval};
use crate::series::Series;
use crate::{Mode, ScalingPair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenormError {
    #[error("λ root not bracketed in [{lo}, {hi}]")]
    LambdaBracket { lo: f64, hi: f64 },
    #[error("midpoint equation is degenerate: ∂z of s(λx,z)+s(λy,z) vanishes")]
    Degenerate,
    #[error("midpoint Newton diverged (last correction {0:e})")]
    Divergence(f64),
    #[error("midpoint enclosure not verified: contraction {kappa}, defect {defect:e}")]
    Unverified { kappa: f64, defect: f64 },
    #[error("μ = ∂₁z(1,0) is not bounded away from zero")]
    MuZero,
    #[error(transparent)]
    Ball(#[from] BallError),
    #[error("Newton system is singular")]
    Singular,
    #[error("Newton did not reach tolerance {tol:e} in {steps} steps (residual {residual:e})")]
    NoConvergence { steps: usize, residual: f64, tol: f64 },
    #[error("eigenvalue computation failed")]
    Eigen,
}

#[derive(Clone, Debug)]
pub struct RenormOptions {
    pub lambda_bracket: (f64, f64),
    pub z_tol: f64,
    pub max_iter: usize,
}

impl Default for RenormOptions {
    fn default() -> Self {
        RenormOptions { lambda_bracket: (-0.4, -0.1), z_tol: 1e-15, max_iter: 60 }
    }
}

/// One float application of the operator.
#[derive(Clone, Debug)]
pub struct StepF {
    pub s_new: Series<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub z: Series<f64>,
    pub z_iterations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Residuals {
    /// Norm at ρ of `s(λx,z) + s(λy,z)`.
    pub midpoint: f64,
    /// `s_new(1,0)`.
    pub value_at_1_0: Interval,
    /// `∂₁s_new(1,0) - 1`.
    pub slope_at_1_0: Interval,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RenormResult {
    pub s_new: FuncBall,
    pub scaling: ScalingPair,
    pub z: FuncBall,
    pub residuals: Residuals,
    pub mode: Mode,
}

fn lambda_root(s: &Series<f64>, opts: &RenormOptions) -> Result<f64, RenormError> {
    let g = |l: f64| s.eval(l, 1.0) + s.eval(0.0, 1.0);
    let (mut lo, mut hi) = opts.lambda_bracket;
    let (glo, ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if glo.signum() == ghi.signum() || !glo.is_finite() || !ghi.is_finite() {
        return Err(RenormError::LambdaBracket { lo, hi });
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if m == lo || m == hi {
            break;
        }
        if g(m).signum() == glo.signum() {
            lo = m;
        } else {
            hi = m;
        }
    }
    let s1 = s.partial(1);
    let mut l = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = s1.eval(l, 1.0);
        if d != 0.0 {
            let nl = l - g(l) / d;
            if nl >= lo - 1e-12 && nl <= hi + 1e-12 {
                l = nl;
            }
        }
    }
    Ok(l)
}

/// Constant initial guess for `z`: the root of `s(λ/2, c) = 0` near 1.
fn z_seed(s: &Series<f64>, lambda: f64, degree: usize) -> Result<Series<f64>, RenormError> {
    let s2 = s.partial(2);
    let mut c = 1.0;
    for _ in 0..60 {
        let d = s2.eval(lambda * 0.5, c);
        if d == 0.0 {
            return Err(RenormError::Degenerate);
        }
        let step = s.eval(lambda * 0.5, c) / d;
        c -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    Ok(Series::constant(degree, c))
}

fn midpoint_map(s: &Series<f64>, lx: &Series<f64>, ly: &Series<f64>, z: &Series<f64>) -> Series<f64> {
    s.compose(lx, z).add(&s.compose(ly, z))
}

/// Float midpoint solve for `s(λx,z) + s(λy,z) = 0` by Newton's method in
/// the truncated algebra.
pub fn solve_midpoint_f(
    s: &Series<f64>,
    lambda: f64,
    warm: Option<&Series<f64>>,
    opts: &RenormOptions,
) -> Result<(Series<f64>, usize), RenormError> {
    let n = s.degree();
    let s2 = s.partial(2).with_degree(n);
    if s2.coeffs().iter().all(|&c| c == 0.0) {
        return Err(RenormError::Degenerate);
    }
    let lx = Series::<f64>::var_x(n).scale(lambda);
    let ly = Series::<f64>::var_y(n).scale(lambda);
    let mut z = match warm {
        Some(w) if w.degree() == n => w.clone(),
        Some(w) => w.with_degree(n),
        None => z_seed(s, lambda, n)?,
    };
    let mut last = f64::INFINITY;
    for it in 0..opts.max_iter {
        let phi = midpoint_map(s, &lx, &ly, &z);
        let dphi = midpoint_map(&s2, &lx, &ly, &z);
        let inv = dphi.reciprocal().ok_or(RenormError::Degenerate)?;
        let dz = phi.mul(&inv);
        z = z.sub(&dz);
        let size = dz.norm(1.0);
        if !size.is_finite() || size > 1e6 {
            return Err(RenormError::Divergence(size));
        }
        if size < opts.z_tol || (size >= last && size < 1e-13) {
            return Ok((z, it + 1));
        }
        last = size;
    }
    if last < 1e-11 {
        return Ok((z, opts.max_iter));
    }
    Err(RenormError::Divergence(last))
}

/// One float application of the operator; `warm` seeds the midpoint solve.
pub fn renorm_step_f(
    s: &Series<f64>,
    warm: Option<&Series<f64>>,
    opts: &RenormOptions,
) -> Result<StepF, RenormError> {
    let n = s.degree();
    let lambda = lambda_root(s, opts)?;
    let (z, iters) = solve_midpoint_f(s, lambda, warm, opts)?;
    let mu = z.partial(1).eval(1.0, 0.0);
    if mu == 0.0 || !mu.is_finite() {
        return Err(RenormError::MuZero);
    }
    let ly = Series::<f64>::var_y(n).scale(lambda);
    let s_new = s.compose(&z, &ly).scale(1.0 / mu);
    Ok(StepF { s_new, lambda, mu, z, z_iterations: iters })
}

/// Interval `λ`: interval Newton on `s(λ,1) + s(0,1)` around the float root.
fn lambda_enclosure(s: &FuncBall, lam: f64) -> Result<Interval, RenormError> {
    let s1 = s.partial(1)?;
    let base = s.eval(&IVec2::point(0.0, 1.0))?;
    let lp = Interval::point(lam);
    let mut r = 1e-13;
    for _ in 0..20 {
        let l = Interval::centered(lam, r);
        let g = s.eval(&IVec2::new(lp, Interval::ONE))? + base;
        let d = s1.eval(&IVec2::new(l, Interval::ONE))?;
        if !d.contains_zero() {
            let n = lp - g / d;
            if n.interior_of(&l) {
                return Ok(n);
            }
        }
        r *= 4.0;
    }
    Err(RenormError::LambdaBracket { lo: lam, hi: lam })
}

/// Midpoint solve for a ball `s` and interval `λ`.
///
/// Float mode returns the float solution as a point ball. Interval mode
/// returns a ball proven to contain the unique solution near it: with
/// `K ≈ 1/Φ_z(z̃)`, the map `z ↦ z − KΦ(z)` sends the ball of radius `r`
/// into itself when `‖KΦ(z̃)‖ + ‖1 − KΦ_z(Z)‖ r ≤ r`.
pub fn solve_midpoint(s: &FuncBall, lambda: Interval, mode: Mode) -> Result<(FuncBall, f64), RenormError> {
    let opts = RenormOptions::default();
    let sm = s.midpoint();
    let (zf, _) = solve_midpoint_f(&sm, lambda.mid(), None, &opts)?;
    let n = sm.degree();
    let lx = FuncBall::var_x(n).scale(lambda);
    let ly = FuncBall::var_y(n).scale(lambda);
    let zt = FuncBall::from_series(&zf);
    let phi = s.compose2(&lx, &zt)?.add(&s.compose2(&ly, &zt)?)?;
    let resid = phi.norm_rho();
    if mode == Mode::Float {
        return Ok((zt, resid));
    }
    let s2 = s.partial(2)?;
    let lxs = Series::<f64>::var_x(n).scale(lambda.mid());
    let lys = Series::<f64>::var_y(n).scale(lambda.mid());
    let dphi_f = midpoint_map(&sm.partial(2).with_degree(n), &lxs, &lys, &zf);
    let k = FuncBall::from_series(&dphi_f.reciprocal().ok_or(RenormError::Degenerate)?);
    let defect = k.mul(&phi)?.norm_outer();
    let contraction = |r: f64| -> Result<f64, RenormError> {
        let zb = zt.widen(r);
        let dphi = s2.compose2(&lx, &zb)?.add(&s2.compose2(&ly, &zb)?)?;
        let one = FuncBall::constant(n, Interval::ONE);
        Ok(one.sub(&k.mul(&dphi)?)?.norm_outer())
    };
    let kappa0 = contraction(defect.max(1e-300))?;
    if !(kappa0 < 1.0) {
        return Err(RenormError::Unverified { kappa: kappa0, defect });
    }
    let mut r = 1.5 * defect / (1.0 - kappa0) + 1e-300;
    for _ in 0..6 {
        let kappa = contraction(r)?;
        if kappa < 1.0 && defect + kappa * r <= r {
            return Ok((zt.widen(r), resid));
        }
        r *= 2.0;
    }
    Err(RenormError::Unverified { kappa: kappa0, defect })
}

/// One application of the operator to a ball.
pub fn renorm_step(s: &FuncBall, mode: Mode) -> Result<RenormResult, RenormError> {
    let opts = RenormOptions::default();
    let sm = s.midpoint();
    let n = sm.degree();
    let lam_f = lambda_root(&sm, &opts)?;
    let lambda = match mode {
        Mode::Float => Interval::point(lam_f),
        Mode::Interval => lambda_enclosure(s, lam_f)?,
    };
    let (z, resid) = solve_midpoint(s, lambda, mode)?;
    let mu = z.partial(1)?.eval(&IVec2::point(1.0, 0.0))?;
    if mu.contains_zero() {
        return Err(RenormError::MuZero);
    }
    let ly = FuncBall::var_y(n).scale(lambda);
    let inv_mu = mu.recip().map_err(|_| RenormError::MuZero)?;
    let s_new = match mode {
        Mode::Float => {
            let step = renorm_step_f(&sm, Some(&z.midpoint()), &opts)?;
            FuncBall::from_series(&step.s_new)
        }
        Mode::Interval => s.compose2(&z, &ly)?.scale(inv_mu),
    };
    let v = s_new.eval(&IVec2::point(1.0, 0.0))?;
    let d = s_new.partial(1)?.eval(&IVec2::point(1.0, 0.0))? - 1.0;
    let scaling = ScalingPair { lambda, mu };
    Ok(RenormResult {
        s_new,
        scaling,
        z,
        residuals: Residuals { midpoint: resid, value_at_1_0: v, slope_at_1_0: d },
        mode,
    })
}

/// Coordinates on the normalized symmetric subspace.
///
/// With `t = ∂₁s`, symmetry means `t_ab = t_ba`; the free unknowns are
/// `t_ab` for `a ≤ b`, `a + b ≤ N−1`, `(a,b) ≠ (0,0)`, together with the
/// `y`-only coefficients `c_0j`, `j ≥ 1`. The two remaining coefficients
/// `c_10` and `c_00` are fixed by `∂₁s(1,0) = 1` and `s(1,0) = 0`.
#[derive(Clone, Debug)]
pub struct SymmetricChart {
    degree: usize,
    pairs: Vec<(usize, usize)>,
}

impl SymmetricChart {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 2, "degree must be at least 2");
        let mut pairs = Vec::new();
        for a in 0..degree {
            for b in a..degree {
                if a + b < degree && (a, b) != (0, 0) {
                    pairs.push((a, b));
                }
            }
        }
        SymmetricChart { degree, pairs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.pairs.len() + self.degree
    }

    pub fn build(&self, theta: &[f64]) -> Series<f64> {
        assert_eq!(theta.len(), self.dim());
        let n = self.degree;
        let mut s = Series::<f64>::zero(n);
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            let v = theta[k];
            s.set(a + 1, b, s.get(a + 1, b) + v / (a + 1) as f64);
            if a != b {
                s.set(b + 1, a, s.get(b + 1, a) + v / (b + 1) as f64);
            }
        }
        for j in 1..=n {
            s.set(0, j, theta[self.pairs.len() + j - 1]);
        }
        let slope = s.partial(1).eval(1.0, 0.0);
        s.set(1, 0, s.get(1, 0) + 1.0 - slope);
        let value = s.eval(1.0, 0.0);
        s.set(0, 0, s.get(0, 0) - value);
        s
    }

    pub fn extract(&self, s: &Series<f64>) -> Vec<f64> {
        let s = s.with_degree(self.degree);
        let d = s.partial(1);
        let mut out: Vec<f64> = self.pairs.iter().map(|&(a, b)| 0.5 * (d.get(a, b) + d.get(b, a))).collect();
        out.extend((1..=self.degree).map(|j| s.get(0, j)));
        out
    }
}

#[derive(Clone, Debug)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_steps: usize,
    pub fd_step: f64,
    pub policy: ExecPolicy,
    pub renorm: RenormOptions,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_steps: 30,
            fd_step: 1e-7,
            policy: ExecPolicy::available(),
            renorm: RenormOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NewtonReport {
    pub s: Series<f64>,
    pub degree: usize,
    pub lambda: f64,
    pub mu: f64,
    /// Number of Newton updates applied.
    pub steps: usize,
    /// Max-norm of the chart residual before each update and after the last one.
    pub residual_history: Vec<f64>,
    pub residual: f64,
    /// `‖R[s] − s‖_ρ` over all coefficients, including those the chart fixes.
    pub defect: f64,
}

/// Finite-difference Jacobian of `θ ↦ extract(R[build(θ)])`, one column
/// per unknown, columns evaluated under `policy`.
pub fn chart_jacobian(
    chart: &SymmetricChart,
    theta: &[f64],
    base: &StepF,
    opts: &NewtonOptions,
) -> Result<DMatrix<f64>, RenormError> {
    let m = chart.dim();
    let f0 = chart.extract(&base.s_new);
    let h = opts.fd_step;
    let cols: Vec<Result<Vec<f64>, RenormError>> = opts.policy.map_range(m, |k| {
        let mut th = theta.to_vec();
        th[k] += h;
        let st = renorm_step_f(&chart.build(&th), Some(&base.z), &opts.renorm)?;
        let f = chart.extract(&st.s_new);
        Ok(f.iter().zip(&f0).map(|(a, b)| (a - b) / h).collect())
    });
    let mut j = DMatrix::<f64>::zeros(m, m);
    for (k, col) in cols.into_iter().enumerate() {
        let col = col?;
        for (i, v) in col.into_iter().enumerate() {
            j[(i, k)] = v;
        }
    }
    Ok(j)
}

/// Newton's method for `R[s] = s` at the degree of `seed`.
pub fn newton_fixed_point(seed: &Series<f64>, opts: &NewtonOptions) -> Result<NewtonReport, RenormError> {
    let chart = SymmetricChart::new(seed.degree());
    let mut theta = chart.extract(seed);
    let mut history = Vec::new();
    let mut steps = 0;
    let mut warm: Option<Series<f64>> = None;
    loop {
        let s = chart.build(&theta);
        let base = renorm_step_f(&s, warm.as_ref(), &opts.renorm)?;
        let f0 = chart.extract(&base.s_new);
        let res = f0.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        history.push(res);
        if res < opts.tol || steps >= opts.max_steps {
            if res >= opts.tol {
                return Err(RenormError::NoConvergence { steps, residual: res, tol: opts.tol });
            }
            let defect = base.s_new.sub(&s).norm(RHO);
            return Ok(NewtonReport {
                s,
                degree: seed.degree(),
                lambda: base.lambda,
                mu: base.mu,
                steps,
                residual_history: history,
                residual: res,
                defect,
            });
        }
        let j = chart_jacobian(&chart, &theta, &base, opts)?;
        let r = DVector::from_iterator(theta.len(), f0.iter().zip(&theta).map(|(a, b)| a - b));
        let a = j - DMatrix::<f64>::identity(theta.len(), theta.len());
        let d = a.lu().solve(&(-r)).ok_or(RenormError::Singular)?;
        for (t, dt) in theta.iter_mut().zip(d.iter()) {
            *t += dt;
        }
        warm = Some(base.z);
        steps += 1;
    }
}

/// Seed on the normalized subspace: `s₀ = x − 1 + (9/8) y²`, for which
/// `λ = −1/4` exactly.
pub fn seed_series(degree: usize) -> Series<f64> {
    Series::from_monomials(degree, &[(1, 0, 1.0), (0, 0, -1.0), (0, 2, 1.125)])
}

/// Degrees visited on the way to `target`.
pub fn degree_schedule(target: usize) -> Vec<usize> {
    let mut v: Vec<usize> = [2, 4, 8, 12, 16, 20].into_iter().filter(|&d| d < target).collect();
    v.push(target.max(2));
    v
}

/// Fixed point at `degree`, warm-starting through [`degree_schedule`].
pub fn solve_fixed_point(degree: usize, opts: &NewtonOptions) -> Result<Vec<NewtonReport>, RenormError> {
    let mut s = seed_series(2);
    let mut reports = Vec::new();
    for d in degree_schedule(degree) {
        let o = NewtonOptions { tol: if d == degree { opts.tol } else { opts.tol.max(1e-9) }, ..opts.clone() };
        let rep = newton_fixed_point(&s.with_degree(d), &o)?;
        s = rep.s.clone();
        reports.push(rep);
    }
    Ok(reports)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// `(re, im)` sorted by modulus, largest first.
    pub eigenvalues: Vec<(f64, f64)>,
    pub expanding_count: usize,
    /// Largest modulus among eigenvalues of modulus ≤ 1.
    pub contraction_bound: f64,
    pub degree: usize,
}

impl SpectrumReport {
    pub fn delta1(&self) -> f64 {
        self.eigenvalues[0].0
    }
}

/// Spectrum of the finite-difference Jacobian of the operator at `s_star`
/// in the chart of the normalized symmetric subspace.
pub fn linearization_spectrum(s_star: &Series<f64>, opts: &NewtonOptions) -> Result<SpectrumReport, RenormError> {
    let chart = SymmetricChart::new(s_star.degree());
    let theta = chart.extract(s_star);
    let s = chart.build(&theta);
    let base = renorm_step_f(&s, None, &opts.renorm)?;
    let j = chart_jacobian(&chart, &theta, &base, opts)?;
    let ev = j.complex_eigenvalues();
    let mut eig: Vec<(f64, f64)> = ev.iter().map(|c| (c.re, c.im)).collect();
    if eig.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(RenormError::Eigen);
    }
    eig.sort_by(|a, b| b.0.hypot(b.1).total_cmp(&a.0.hypot(a.1)));
    let expanding_count = eig.iter().filter(|(a, b)| a.hypot(*b) > 1.0).count();
    let contraction_bound = eig.iter().map(|(a, b)| a.hypot(*b)).filter(|&m| m <= 1.0).fold(0.0, f64::max);
    Ok(SpectrumReport { eigenvalues: eig, expanding_count, contraction_bound, degree: s_star.degree() })
}

/// `min{ μ/|λ|, b/A }`.
pub fn omega_bound(mu: Interval, lambda: Interval, b: Interval, a: Interval) -> Interval {
    let r1 = mu / lambda.abs();
    let r2 = b / a;
    r1.min(&r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_roundtrip_and_normalization() {
        let chart = SymmetricChart::new(6);
        let theta: Vec<f64> = (0..chart.dim()).map(|k| 0.01 * (k as f64 + 1.0).sin()).collect();
        let s = chart.build(&theta);
        assert!(s.eval(1.0, 0.0).abs() < 1e-15);
        assert!((s.partial(1).eval(1.0, 0.0) - 1.0).abs() < 1e-15);
        let back = chart.extract(&s);
        for (a, b) in theta.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
        let t = s.partial(1);
        for a in 0..6 {
            for b in 0..6 - a {
                assert!((t.get(a, b) - t.get(b, a)).abs() < 1e-14);
            }
        }
        assert_eq!(SymmetricChart::new(20).dim(), 129);
    }

    #[test]
    fn seed_has_quarter_lambda() {
        let st = renorm_step_f(&seed_series(2), None, &RenormOptions::default()).unwrap();
        assert!((st.lambda + 0.25).abs() < 1e-15);
    }

    #[test]
    fn degenerate_midpoint() {
        let s = Series::<f64>::var_x(4);
        let r = solve_midpoint_f(&s, -0.25, None, &RenormOptions::default());
        assert_eq!(r.unwrap_err(), RenormError::Degenerate);
    }

    #[test]
    fn linear_midpoint() {
        // s(p,q) = p + q: λx + z + λy + z = 0
        let s = Series::from_monomials(4, &[(1, 0, 1.0), (0, 1, 1.0)]);
        let lam = -0.3;
        let (z, _) = solve_midpoint_f(&s, lam, None, &RenormOptions::default()).unwrap();
        let want = Series::from_monomials(4, &[(1, 0, -lam / 2.0), (0, 1, -lam / 2.0)]);
        assert!(z.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn omega_examples() {
        let b = Interval::point(0.034);
        let a = Interval::point(0.764);
        let w = omega_bound(Interval::point(1.0), Interval::point(-1.0), b, a);
        assert!(w.contains(0.034 / 0.764));
        let m = Interval::new(0.2, 0.3).unwrap().min(&Interval::new(0.1, 0.15).unwrap());
        assert_eq!(m, Interval::new(0.1, 0.15).unwrap());
    }
}

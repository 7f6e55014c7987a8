//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines are always shown; exits nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use feigen2d::apmap::eig2;
use feigen2d::cascade::{self, Precision};
use feigen2d::regions::{theta_rate, FixedPointSetting, InclusionOptions};
use feigen2d::renorm::{linearization_spectrum, omega_bound, solve_fixed_point, NewtonOptions};
use feigen2d::stableset::{self, HierarchyOptions, MarkovPartition};
use feigen2d::{ExecPolicy, IVec2, Interval, Mode, Series, Verdict};

const SEED: u64 = 0x5eed_2d;

const LAMBDA: (f64, f64) = (-0.24887681, -0.24887376);
const MU: (f64, f64) = (0.061107811, 0.061112465);
const P0_X: (f64, f64) = (0.57761843, 0.57761989);
const E_PLUS: (f64, f64) = (-2.05763559, -2.05759928);
const E_MINUS: (f64, f64) = (-0.48601715, -0.48598084);
const DELTA: f64 = 8.721;

type Check = Result<String, String>;

struct Report {
    failed: Vec<usize>,
}

impl Report {
    fn run(&mut self, id: usize, title: &str, budget: Duration, f: impl FnOnce() -> Check) {
        let t = Instant::now();
        let r = f();
        let el = t.elapsed();
        let r = match r {
            Ok(d) if el > budget => Err(format!("{d}; over time budget {budget:?}")),
            other => other,
        };
        let (tag, detail) = match &r {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag} {id:>2} {title} ({:.1}s): {detail}", el.as_secs_f64());
        if r.is_err() {
            self.failed.push(id);
        }
    }
}

fn within(v: f64, r: (f64, f64), slack: f64) -> bool {
    v >= r.0 - slack && v <= r.1 + slack
}

fn enclosed(b: Interval, r: (f64, f64), slack: f64) -> bool {
    b.lo() >= r.0 - slack && b.hi() <= r.1 + slack
}

/// Collects named sub-checks into one verdict.
#[derive(Default)]
struct Parts {
    lines: Vec<String>,
    ok: bool,
    started: bool,
}

impl Parts {
    fn add(&mut self, ok: bool, line: String) {
        if !self.started {
            self.ok = true;
            self.started = true;
        }
        self.ok &= ok;
        self.lines.push(if ok { line } else { format!("✗ {line}") });
    }

    fn done(self) -> Check {
        let s = self.lines.join("; ");
        if self.ok {
            Ok(s)
        } else {
            Err(s)
        }
    }
}

fn main() {
    let policy = ExecPolicy::available();
    let mut rep = Report { failed: Vec::new() };
    let mut s20: Option<Series<f64>> = None;

    rep.run(1, "fixed point and scalings", Duration::from_secs(300), || {
        let reps = solve_fixed_point(20, &NewtonOptions::default()).map_err(|e| e.to_string())?;
        let last = reps.last().unwrap();
        s20 = Some(last.s.clone());
        let mut p = Parts::default();
        p.add(last.defect < 1e-10, format!("‖R[s]−s‖ = {:.2e}", last.defect));
        p.add(within(last.lambda, LAMBDA, 1e-4), format!("λ = {:.9}", last.lambda));
        p.add(within(last.mu, MU, 1e-4), format!("μ = {:.9}", last.mu));
        p.done()
    });
    let Some(s) = s20 else {
        println!("fixed point unavailable; remaining criteria skipped");
        std::process::exit(1);
    };

    rep.run(2, "spectrum of the linearization", Duration::from_secs(600), || {
        let opts = NewtonOptions::default();
        let sp = linearization_spectrum(&s, &opts).map_err(|e| e.to_string())?;
        let s24 = solve_fixed_point(24, &opts).map_err(|e| e.to_string())?.pop().unwrap().s;
        let sp24 = linearization_spectrum(&s24, &opts).map_err(|e| e.to_string())?;
        let mut p = Parts::default();
        p.add(sp.expanding_count == 2, format!("{} expanding", sp.expanding_count));
        p.add((sp.delta1() - DELTA).abs() <= 0.05, format!("δ₁ = {:.5}", sp.delta1()));
        p.add(sp.contraction_bound < 0.90, format!("rest ≤ {:.4}", sp.contraction_bound));
        let drift = (sp24.delta1() - sp.delta1()).abs();
        p.add(drift <= 1e-3, format!("|δ₁(24) − δ₁(20)| = {drift:.1e}"));
        p.done()
    });

    let ivl = FixedPointSetting::new(&s, Mode::Interval).expect("interval setting");
    let flt = FixedPointSetting::new(&s, Mode::Float).expect("float setting");

    rep.run(3, "hyperbolic fixed point p₀", Duration::from_secs(120), || {
        let p0 = ivl.map.find_fixed_point(&IVec2::point(0.5776, 0.0)).map_err(|e| e.to_string())?;
        let pf = flt.map.find_fixed_point_f([0.5776, 0.0]).map_err(|e| e.to_string())?;
        let d = ivl.map.derivative(&p0).map_err(|e| e.to_string())?;
        let (ep, em) = d.real_eigenvalues().ok_or("eigenvalues not separated")?;
        let (fp, fm) = eig2(&flt.map.derivative_f(pf).map_err(|e| e.to_string())?).ok_or("complex eigenvalues")?;
        let mut p = Parts::default();
        p.add(enclosed(p0.x, P0_X, 1e-6) && within(pf[0], P0_X, 1e-6), format!("𝒫ₓp₀ ∈ {} (float {:.8})", p0.x, pf[0]));
        p.add(pf[1].abs() <= 1e-12 && p0.y.contains(0.0), format!("𝒫ᵤp₀ = {:.1e}", pf[1]));
        p.add(enclosed(ep, E_PLUS, 1e-4), format!("e₊ ∈ {ep}"));
        p.add(enclosed(em, E_MINUS, 1e-4), format!("e₋ ∈ {em}"));
        p.add((fp * fm - 1.0).abs() <= 1e-9 && (ep * em).contains(1.0), format!("e₊e₋ − 1 = {:.1e}", fp * fm - 1.0));
        p.done()
    });

    rep.run(4, "bounded-set inclusions and separation", Duration::from_secs(600), || {
        let opts = InclusionOptions { max_depth: 10, policy, ..InclusionOptions::default() };
        let mut certs = ivl.bounded_set_inclusions(&opts);
        certs.push(ivl.separation_certificate(6, policy).map_err(|e| e.to_string())?);
        let mut p = Parts::default();
        for c in &certs {
            let margin = c.margin.unwrap_or(f64::NAN);
            p.add(c.verdict == Verdict::Verified && margin > 0.0, format!("{} {:?} margin {:.3e}", c.claim_id, c.verdict, margin));
        }
        p.done()
    });

    rep.run(5, "norm constants and derived rates", Duration::from_secs(600), || {
        let nc = ivl.norm_constants(6, policy).map_err(|e| e.to_string())?;
        let mut p = Parts::default();
        for (name, v, target) in [("A₁", nc.a1.value, 0.764), ("A₃", nc.a3.value, 0.344), ("a", nc.a.value, 0.585)] {
            p.add(v.hi() <= target * 1.05, format!("{name} ∈ {v} (cap {:.4})", target * 1.05));
        }
        p.add(nc.b.value.lo() >= 0.034 * 0.95, format!("b ∈ {} (floor {:.4})", nc.b.value, 0.034 * 0.95));
        let lambda = ivl.scaling.lambda;
        let theta = theta_rate(lambda, nc.a1.value);
        p.add(theta.hi() <= 0.437, format!("θ ∈ {theta}"));
        let (vartheta, _) = stableset::contraction_bound(&ivl, 6, policy).map_err(|e| e.to_string())?;
        match stableset::dimension_upper_bound(vartheta) {
            Ok(d) => p.add(d.hi() < 0.53245, format!("ϑ ∈ {vartheta}, dim ≤ {:.5}", d.hi())),
            Err(e) => p.add(false, format!("ϑ ∈ {vartheta}: {e}")),
        }
        let ratio = ivl.scaling.mu / lambda.abs();
        let omega = omega_bound(ivl.scaling.mu, lambda, nc.b.value, nc.a.value);
        p.add(ratio.hi() < 0.246, format!("μ/|λ| ∈ {ratio}, ω ∈ {omega}"));
        p.done()
    });

    rep.run(6, "stable set at depth 8", Duration::from_secs(600), || {
        let n = 8;
        let pres = stableset::presentation_certificates(&ivl, &InclusionOptions { policy, ..InclusionOptions::default() });
        let structural = stableset::structural_certificate(&pres, Mode::Interval);
        let h = stableset::build_pieces(&flt, n, 3, policy).map_err(|e| e.to_string())?;
        let certs = stableset::piece_certificates(&h, &flt, n, policy).map_err(|e| e.to_string())?;
        let mut p = Parts::default();
        p.add(structural.verdict == Verdict::Verified, format!("every word nested and disjoint: {:?}", structural.verdict));
        p.add(h.level(n).len() == 256, format!("{} pieces", h.level(n).len()));
        for c in &certs {
            let extra = c.bound.map(|b| format!(" {:.4}", b.hi())).unwrap_or_default();
            p.add(c.verdict.passed(), format!("{} {:?}{extra}", c.claim_id, c.verdict));
        }
        p.done()
    });

    rep.run(7, "hyperbolic hierarchy up to k = 3", Duration::from_secs(900), || {
        let opts = HierarchyOptions { policy, ..HierarchyOptions::default() };
        let r = stableset::hyperbolic_hierarchy(&flt.map, &MarkovPartition::default(), 3, &opts).map_err(|e| e.to_string())?;
        let mut p = Parts::default();
        for l in &r.levels {
            p.add(l.components.len() == 2 << (2 * l.k), format!("k={} {} components", l.k, l.components.len()));
        }
        match r.fitted_kappa_plus {
            Some(k) => p.add(k <= 0.1642 * 1.10, format!("κ₊ fit {k:.4}")),
            None => p.add(false, "no κ₊ fit".into()),
        }
        p.done()
    });

    rep.run(8, "Lyapunov contrast", Duration::from_secs(300), || {
        let ly = stableset::lyapunov_decay(&flt.map, 8, 500, 0.01).map_err(|e| e.to_string())?;
        let at8 = ly.by_depth.iter().find(|e| e.0 == 8).map(|e| e.1).unwrap_or(f64::NAN);
        let floor = 2.0576f64.ln() - 0.02;
        let mut p = Parts::default();
        p.add(ly.monotone, format!("exponents {:?}", ly.by_depth.iter().map(|e| (e.1 * 1e3).round() / 1e3).collect::<Vec<_>>()));
        p.add(at8 < 0.05, format!("k=8: {at8:.4}"));
        p.add(ly.fixed_point_exponent > floor, format!("at p₀: {:.4} > {floor:.4}", ly.fixed_point_exponent));
        p.done()
    });

    rep.run(9, "Hénon cascade", Duration::from_secs(900), || {
        let recs = cascade::cascade(6, Precision::Auto, policy).map_err(|e| e.to_string())?;
        let ratio = cascade::universal_ratio(&recs).map_err(|e| e.to_string())?;
        let sc = cascade::scaling_ratios(&recs).map_err(|e| e.to_string())?;
        let d5 = sc.d_ratios.iter().find(|r| r.0 == 5).map(|r| r.1).unwrap_or(f64::NAN);
        let mut p = Parts::default();
        p.add((recs[0].a_k - 3.0).abs() <= 1e-9, format!("a₁ − 3 = {:.1e}", recs[0].a_k - 3.0));
        p.add((recs[1].a_k - 4.0).abs() <= 1e-6, format!("a₂ − 4 = {:.1e}", recs[1].a_k - 4.0));
        p.add(recs[5].precision_used >= 30, format!("k=6 at {} digits", recs[5].precision_used));
        p.add((ratio.accelerated - DELTA).abs() <= 0.02 * DELTA, format!("Aitken {:.4}", ratio.accelerated));
        p.add((d5 - 4.018).abs() <= 0.05 * 4.018, format!("−d₅/d₆ = {d5:.4}"));
        p.done()
    });

    rep.run(10, "property suites", Duration::from_secs(120), || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut p = Parts::default();
        let mut first = None;
        for _ in 0..1000 {
            let a = rng.random_range(-50.0..50.0);
            let b = rng.random_range(-50.0..50.0);
            let r = common::interval_case(
                (a, a + rng.random_range(0.0..10.0)),
                (b, b + rng.random_range(0.0..10.0)),
                (rng.random_range(0.0..5.0), rng.random_range(0.0..5.0)),
                (rng.random(), rng.random()),
            );
            first = first.or(r.err());
        }
        p.add(first.is_none(), format!("1000 interval cases{}", first.map(|e| format!(": {e}")).unwrap_or_default()));
        let mut first = None;
        for _ in 0..50 {
            let c: Vec<f64> = (0..30).map(|_| rng.random_range(-1.0..1.0)).collect();
            let at = [rng.random_range(-0.8..1.8), rng.random_range(-0.8..1.8)];
            first = first.or(common::funcball_case(&common::poly4(&c[..15]), &common::poly4(&c[15..]), at).err());
        }
        p.add(first.is_none(), format!("50 function balls{}", first.map(|e| format!(": {e}")).unwrap_or_default()));
        let (mut sym, mut fd) = (None, None);
        for _ in 0..100 {
            let c: Vec<f64> = (0..7).map(|_| rng.random_range(-0.05..0.05)).collect();
            let at = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
            sym = sym.or(common::symplectic_case(&c, at).err());
            fd = fd.or(common::derivative_fd_case(&c, at).err());
        }
        p.add(sym.is_none(), format!("100 determinants{}", sym.map(|e| format!(": {e}")).unwrap_or_default()));
        p.add(fd.is_none(), format!("derivative vs central differences{}", fd.map(|e| format!(": {e}")).unwrap_or_default()));
        p.done()
    });

    if rep.failed.is_empty() {
        println!("all criteria pass");
    } else {
        println!("failing criteria: {:?}", rep.failed);
        std::process::exit(1);
    }
}

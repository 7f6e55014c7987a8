//! The computations behind each subcommand. Every stage returns its
//! certificates plus a JSON report; writing output is left to the caller.

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use feigen2d::cascade::{self, CascadeRecord, Precision};
use feigen2d::regions::{FixedPointSetting, InclusionOptions};
use feigen2d::renorm::{self, NewtonOptions, NewtonReport};
use feigen2d::stableset::{self, HierarchyOptions, MarkovPartition, PieceHierarchy};
use feigen2d::{Certificate, ExecPolicy, FuncBall, Interval, Mode, Series};

/// Scaling enclosures the fixed point must reproduce, before widening.
pub const LAMBDA_RANGE: (f64, f64) = (-0.24887681, -0.24887376);
pub const MU_RANGE: (f64, f64) = (0.061107811, 0.061112465);
pub const SCALING_SLACK: f64 = 1e-4;
pub const DELTA: f64 = 8.721;

/// Validated settings shared by all stages.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub degree: usize,
    pub tol: f64,
    pub mode: Mode,
    pub policy: ExecPolicy,
    /// Maximum subdivision depth of inclusion checks.
    pub inclusion_depth: u32,
    /// Uniform subdivision depth for covers, norms and separation.
    pub cover_depth: u32,
    pub precision: Precision,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        anyhow::ensure!((2..=40).contains(&self.degree), "degree must lie in 2..=40, got {}", self.degree);
        anyhow::ensure!(self.tol > 0.0 && self.tol < 1.0, "tolerance must lie in (0, 1), got {}", self.tol);
        anyhow::ensure!(self.inclusion_depth <= 14, "inclusion depth must be at most 14");
        anyhow::ensure!(self.cover_depth <= 10, "cover depth must be at most 10");
        Ok(())
    }

    fn newton(&self) -> NewtonOptions {
        NewtonOptions { tol: self.tol, policy: self.policy, ..NewtonOptions::default() }
    }
}

pub struct Outcome {
    pub certificates: Vec<Certificate>,
    pub report: Value,
}

pub struct FixedPoint {
    pub s: Series<f64>,
    pub outcome: Outcome,
}

fn in_range(b: Interval, range: (f64, f64), slack: f64) -> bool {
    b.lo() >= range.0 - slack && b.hi() <= range.1 + slack
}

/// Newton solve at `cfg.degree`, warm-started from `seed` when given.
pub fn fixed_point(cfg: &RunConfig, seed: Option<&Path>, spectrum: bool) -> Result<FixedPoint> {
    let t = Instant::now();
    let opts = cfg.newton();
    let reports: Vec<NewtonReport> = match seed {
        Some(path) => {
            let file = std::fs::File::open(path).with_context(|| format!("opening seed {}", path.display()))?;
            let ball = FuncBall::read_csv(file, 0.0)?;
            vec![renorm::newton_fixed_point(&ball.midpoint().with_degree(cfg.degree), &opts)?]
        }
        None => renorm::solve_fixed_point(cfg.degree, &opts)?,
    };
    let last = reports.last().expect("at least one degree");
    let mut certs = vec![Certificate::new("R.residual", "fixed point of the doubling operator: ‖R[s] − s‖_ρ below tolerance", Mode::Float)
        .param("degree", cfg.degree)
        .param("tol", cfg.tol)
        .param("newton_steps", last.steps)
        .with_bound(Interval::point(last.defect))
        .with_margin(cfg.tol - last.defect)
        .decide(last.defect < cfg.tol)
        .timed(t)];
    let mut report = json!({
        "degree": cfg.degree,
        "steps": last.steps,
        "residual": last.residual,
        "defect": last.defect,
        "lambda": last.lambda,
        "mu": last.mu,
        "schedule": reports.iter().map(|r| json!({"degree": r.degree, "steps": r.steps, "residual": r.residual})).collect::<Vec<_>>(),
    });

    let (lambda, mu) = if cfg.mode == Mode::Interval {
        let t = Instant::now();
        let set = FixedPointSetting::new(&last.s, Mode::Interval)?;
        report["interval"] = json!({"lambda": set.scaling.lambda, "mu": set.scaling.mu, "widening": set.widening});
        certs.push(
            Certificate::new("R.enclosure", "fixed point of the doubling operator: interval image of s lies within the widened ball", Mode::Interval)
                .param("degree", cfg.degree)
                .with_bound(Interval::point(set.widening))
                .decide(set.widening.is_finite())
                .timed(t),
        );
        (set.scaling.lambda, set.scaling.mu)
    } else {
        (Interval::point(last.lambda), Interval::point(last.mu))
    };
    certs.push(
        Certificate::new("R.lambda", "scaling λ of the fixed point", cfg.mode)
            .param("target", format!("[{}, {}] ± {}", LAMBDA_RANGE.0, LAMBDA_RANGE.1, SCALING_SLACK))
            .with_bound(lambda)
            .decide(in_range(lambda, LAMBDA_RANGE, SCALING_SLACK)),
    );
    certs.push(
        Certificate::new("R.mu", "scaling μ of the fixed point", cfg.mode)
            .param("target", format!("[{}, {}] ± {}", MU_RANGE.0, MU_RANGE.1, SCALING_SLACK))
            .with_bound(mu)
            .decide(in_range(mu, MU_RANGE, SCALING_SLACK)),
    );

    if spectrum {
        let t = Instant::now();
        let sp = renorm::linearization_spectrum(&last.s, &opts)?;
        let d1 = sp.delta1();
        let ok = sp.expanding_count == 2 && (d1 - DELTA).abs() <= 0.05 && sp.contraction_bound < 0.90;
        report["spectrum"] = json!({
            "delta1": d1,
            "expanding_count": sp.expanding_count,
            "contraction_bound": sp.contraction_bound,
            "leading": &sp.eigenvalues[..sp.eigenvalues.len().min(6)],
        });
        certs.push(
            Certificate::new("R.spectrum", "linearization at the fixed point: two expanding eigenvalues, δ₁ ≈ 8.721, rest below 0.90", Mode::Float)
                .param("degree", cfg.degree)
                .param("expanding_count", sp.expanding_count)
                .param("contraction_bound", sp.contraction_bound)
                .with_bound(Interval::point(d1))
                .with_margin(0.05 - (d1 - DELTA).abs())
                .decide(ok)
                .timed(t),
        );
    }
    Ok(FixedPoint { s: last.s.clone(), outcome: Outcome { certificates: certs, report } })
}

pub fn dump_coeffs(s: &Series<f64>, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    FuncBall::from_series(s).write_csv(std::io::BufWriter::new(file))?;
    Ok(())
}

fn setting(s: &Series<f64>, mode: Mode) -> Result<FixedPointSetting> {
    Ok(FixedPointSetting::new(s, mode)?)
}

/// Inclusions of the bounded set and the separation inequality.
pub fn regions(cfg: &RunConfig, s: &Series<f64>) -> Result<Outcome> {
    let set = setting(s, cfg.mode)?;
    let opts = InclusionOptions { max_depth: cfg.inclusion_depth, policy: cfg.policy, ..InclusionOptions::default() };
    let mut certs = set.bounded_set_inclusions(&opts);
    certs.push(set.separation_certificate(cfg.cover_depth, cfg.policy)?);
    let report = json!({"widening": set.widening, "lambda": set.scaling.lambda, "mu": set.scaling.mu});
    Ok(Outcome { certificates: certs, report })
}

/// Derivative-norm constants and the rates derived from them.
pub fn norms(cfg: &RunConfig, s: &Series<f64>) -> Result<Outcome> {
    let set = setting(s, cfg.mode)?;
    let mode = cfg.mode;
    let t = Instant::now();
    let nc = set.norm_constants(cfg.cover_depth, cfg.policy)?;
    let elapsed = t.elapsed().as_millis() as u64;
    let sup = |id: &str, anchor: &str, v: Interval, target: f64| {
        let cap = target * 1.05;
        let mut c = Certificate::new(id, anchor, mode)
            .param("target", target)
            .param("depth", cfg.cover_depth)
            .with_bound(v)
            .with_margin(cap - v.hi())
            .decide(v.hi() <= cap);
        c.wall_time_ms = elapsed;
        c
    };
    let mut certs = vec![
        sup("N.A1", "norm constant A₁ = sup ‖D(Λ∘G)‖ on E₁", nc.a1.value, 0.764),
        sup("N.A3", "norm constant A₃ = sup ‖D(Λ∘G)‖ on E₃", nc.a3.value, 0.344),
        sup("N.a", "norm constant a = sup ‖D(G∘Λ)‖ on E", nc.a.value, 0.585),
    ];
    let b_floor = 0.034 * 0.95;
    certs.push(
        Certificate::new("N.b", "norm constant b = inf ‖D(Λ∘G)v‖ over unit v on E₁ ∪ E₃", mode)
            .param("target", 0.034)
            .param("depth", cfg.cover_depth)
            .with_bound(nc.b.value)
            .with_margin(nc.b.value.lo() - b_floor)
            .decide(nc.b.value.lo() >= b_floor),
    );
    let lambda = set.scaling.lambda;
    let theta = feigen2d::regions::theta_rate(lambda, nc.a1.value);
    certs.push(
        Certificate::new("N.theta", "rate θ = sqrt(|λ|·A₁) of the orbit-closure characterization", mode)
            .with_bound(theta)
            .with_margin(0.437 - theta.hi())
            .decide(theta.hi() <= 0.437),
    );
    let (vartheta, contraction) = stableset::contraction_bound(&set, cfg.cover_depth, cfg.policy)?;
    certs.push(contraction);
    let dim = stableset::dimension_upper_bound(vartheta);
    let mut c = Certificate::new("N.dimension", "Hausdorff dimension of the stable set ≤ −log 2 / log ϑ", mode).param("vartheta", vartheta.to_string());
    c = match dim {
        Ok(d) => c.with_bound(d).with_margin(0.53245 - d.hi()).decide(d.hi() < 0.53245),
        Err(e) => c.with_detail(e.to_string()).decide(false),
    };
    certs.push(c);
    let ratio = set.scaling.mu / lambda.abs();
    let omega = renorm::omega_bound(set.scaling.mu, lambda, nc.b.value, nc.a.value);
    certs.push(
        Certificate::new("N.omega", "ω = min{μ/|λ|, b/A} with envelope μ/|λ| < 0.246", mode)
            .param("omega", omega.to_string())
            .with_bound(ratio)
            .with_margin(0.246 - ratio.hi())
            .decide(ratio.hi() < 0.246),
    );
    let report = json!({"constants": nc, "theta": theta, "vartheta": vartheta, "omega": omega, "mu_over_lambda": ratio});
    Ok(Outcome { certificates: certs, report })
}

/// Options of the stable-set stage.
#[derive(Clone, Debug)]
pub struct StableSetArgs {
    pub depth: usize,
    pub base_depth: u32,
    pub certify: bool,
    pub emit_points: Option<std::path::PathBuf>,
}

/// Pieces of the stable set, with the structural claim from interval
/// presentation inclusions and word-by-word checks in the chosen mode.
pub fn stable_set(cfg: &RunConfig, s: &Series<f64>, args: &StableSetArgs) -> Result<Outcome> {
    anyhow::ensure!((1..=12).contains(&args.depth), "stable-set depth must lie in 1..=12");
    let set = setting(s, cfg.mode)?;
    let mut certs = Vec::new();
    if args.certify {
        let ivl = if cfg.mode == Mode::Interval { set.clone() } else { setting(s, Mode::Interval)? };
        let opts = InclusionOptions { max_depth: cfg.inclusion_depth, policy: cfg.policy, ..InclusionOptions::default() };
        let pres = stableset::presentation_certificates(&ivl, &opts);
        certs.push(stableset::structural_certificate(&pres, Mode::Interval));
        certs.extend(pres);
    }
    let t = Instant::now();
    let h = stableset::build_pieces(&set, args.depth, args.base_depth, cfg.policy)?;
    let build_ms = t.elapsed().as_millis() as u64;
    let mut orbit = None;
    if args.certify {
        certs.extend(stableset::piece_certificates(&h, &set, args.depth, cfg.policy)?);
    }
    if let Some(path) = &args.emit_points {
        let rep = stableset::orbit_closure_check(&h, &set, args.depth, cfg.policy)?;
        write_points(&h, args.depth, &rep.points, path)?;
        orbit = Some(rep.discrepancy);
    }
    let content: Vec<Value> = (1..=args.depth)
        .map(|n| json!({"n": n, "content": stableset::hausdorff_content(h.level(n), 0.5324)}))
        .collect();
    let report = json!({
        "depth": args.depth,
        "base_boxes": h.base_boxes,
        "build_ms": build_ms,
        "levels": h.stats,
        "hausdorff_content_d0_5324": content,
        "orbit_discrepancy": orbit,
    });
    Ok(Outcome { certificates: certs, report })
}

#[derive(Serialize)]
struct PointRow<'a> {
    kind: &'a str,
    index: usize,
    word: String,
    x_lo: f64,
    x_hi: f64,
    u_lo: f64,
    u_hi: f64,
}

fn write_points(h: &PieceHierarchy, n: usize, orbit: &[[f64; 2]], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for (i, p) in h.level(n).iter().enumerate() {
        w.serialize(PointRow {
            kind: "piece",
            index: i,
            word: p.word.to_string(),
            x_lo: p.hull.x.lo(),
            x_hi: p.hull.x.hi(),
            u_lo: p.hull.y.lo(),
            u_hi: p.hull.y.hi(),
        })?;
    }
    for (i, q) in orbit.iter().enumerate() {
        w.serialize(PointRow { kind: "orbit", index: i, word: String::new(), x_lo: q[0], x_hi: q[0], u_lo: q[1], u_hi: q[1] })?;
    }
    w.flush()?;
    Ok(())
}

pub const KAPPA_PLUS: f64 = 0.1642;

/// Hyperbolic set hierarchy of `G` and finite-time Lyapunov exponents.
pub fn hyperbolic(cfg: &RunConfig, s: &Series<f64>, kmax: usize, emit: Option<&Path>) -> Result<Outcome> {
    anyhow::ensure!(kmax <= 5, "hierarchy level must be at most 5");
    let set = setting(s, Mode::Float)?;
    let t = Instant::now();
    let opts = HierarchyOptions { policy: cfg.policy, ..HierarchyOptions::default() };
    let rep = stableset::hyperbolic_hierarchy(&set.map, &MarkovPartition::default(), kmax, &opts)?;
    let ms = t.elapsed().as_millis() as u64;
    let mut certs = Vec::new();
    let counts_ok = rep.levels.iter().all(|l| l.components.len() == 2 << (2 * l.k) && l.crossing_ok);
    let mut c = Certificate::new("H.components", "hyperbolic set hierarchy: 2·4ᵏ components, forward strips cross backward strips", Mode::Float)
        .param("kmax", kmax)
        .param("counts", rep.levels.iter().map(|l| l.components.len()).collect::<Vec<_>>())
        .decide(counts_ok);
    c.wall_time_ms = ms;
    certs.push(c);
    let cap = KAPPA_PLUS * 1.10;
    let mut c = Certificate::new("H.kappa_plus", "hyperbolic set hierarchy: diameters decay at rate κ₊ ≤ 0.1642", Mode::Float);
    c = match rep.fitted_kappa_plus {
        Some(k) => c.with_bound(Interval::point(k)).with_margin(cap - k).decide(k <= cap),
        None => c.with_detail("needs kmax ≥ 2").decide(false),
    };
    certs.push(c);

    let t = Instant::now();
    let ly = stableset::lyapunov_decay(&set.map, 8, 500, 0.01)?;
    let at8 = ly.by_depth.iter().find(|(k, _)| *k == 8).map(|e| e.1).unwrap_or(f64::NAN);
    let floor = 2.0576f64.ln() - 0.02;
    certs.push(
        Certificate::new("L.origin", "finite-time exponents along the orbit of zero decrease with depth and fall below 0.05", Mode::Float)
            .param("exponents", ly.by_depth.iter().map(|e| e.1).collect::<Vec<_>>())
            .with_bound(Interval::point(at8))
            .with_margin(0.05 - at8)
            .decide(ly.monotone && at8 < 0.05)
            .timed(t),
    );
    certs.push(
        Certificate::new("L.fixed_point", "exponent at the hyperbolic fixed point ≈ log 2.0576", Mode::Float)
            .with_bound(Interval::point(ly.fixed_point_exponent))
            .with_margin(ly.fixed_point_exponent - floor)
            .decide(ly.fixed_point_exponent > floor),
    );
    if let Some(path) = emit {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(["k", "cell", "x", "u", "diameter", "inradius"])?;
        for l in &rep.levels {
            for c in &l.components {
                w.serialize((l.k, c.cell, c.center[0], c.center[1], c.diameter, c.inradius))?;
            }
        }
        w.flush()?;
    }
    let levels: Vec<Value> = rep
        .levels
        .iter()
        .map(|l| json!({"k": l.k, "components": l.components.len(), "resolution": l.resolution, "max_diameter": l.max_diameter, "min_inradius": l.min_inradius, "crossing_ok": l.crossing_ok}))
        .collect();
    let report = json!({
        "levels": levels,
        "diameter_ratios": rep.diameter_ratios,
        "fitted_kappa_plus": rep.fitted_kappa_plus,
        "fitted_kappa_minus": rep.fitted_kappa_minus,
        "lyapunov": ly,
    });
    Ok(Outcome { certificates: certs, report })
}

pub struct CascadeRun {
    pub records: Vec<CascadeRecord>,
    pub outcome: Outcome,
}

/// Period-doubling cascade of the area-preserving Hénon family.
pub fn cascade(cfg: &RunConfig, kmax: usize) -> Result<CascadeRun> {
    anyhow::ensure!((1..=8).contains(&kmax), "kmax must lie in 1..=8");
    let t = Instant::now();
    let records = cascade::cascade(kmax, cfg.precision, cfg.policy)?;
    let ms = t.elapsed().as_millis() as u64;
    let mut certs = Vec::new();
    let exact = [(1, 3.0, 1e-9), (2, 4.0, 1e-6)];
    for (k, a, tol) in exact {
        if let Some(r) = records.iter().find(|r| r.k == k) {
            let mut c = Certificate::new(&format!("K.a{k}"), &format!("cascade: a_{k} = {a}"), Mode::Float)
                .param("tol", tol)
                .with_bound(Interval::point(r.a_k))
                .with_margin(tol - (r.a_k - a).abs())
                .decide((r.a_k - a).abs() <= tol);
            c.wall_time_ms = ms;
            certs.push(c);
        }
    }
    let ratio = cascade::universal_ratio(&records).ok();
    if let Some(r) = &ratio {
        let rel = (r.accelerated - DELTA).abs() / DELTA;
        certs.push(
            Certificate::new("K.delta", "cascade: accelerated gap ratio within 2% of 8.721", Mode::Float)
                .param("kmax", kmax)
                .with_bound(Interval::point(r.accelerated))
                .with_margin(0.02 - rel)
                .decide(rel <= 0.02),
        );
    }
    let scaling = cascade::scaling_ratios(&records).ok();
    if let Some(sc) = &scaling {
        if let Some(&(k, v)) = sc.d_ratios.iter().find(|r| r.0 == 5) {
            let rel = (v - 4.018).abs() / 4.018;
            certs.push(
                Certificate::new("K.d_scaling", "cascade: −d_k/d_{k+1} within 5% of 1/|λ| ≈ 4.018", Mode::Float)
                    .param("k", k)
                    .with_bound(Interval::point(v))
                    .with_margin(0.05 - rel)
                    .decide(rel <= 0.05),
            );
        }
    }
    let report = json!({"records": records, "ratio": ratio, "scaling": scaling, "wall_time_ms": ms});
    Ok(CascadeRun { records, outcome: Outcome { certificates: certs, report } })
}

pub fn write_cascade_csv<W: std::io::Write>(records: &[CascadeRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

//! The `build`, `validate`, `fk`, `measure` and `report-all` pipelines.
//!
//! Each pipeline returns its rows in memory and writes them into an
//! [`OutDir`]. Outputs contain no timings or paths, so the same config and
//! seed give byte-identical files.

use std::path::Path;

use rayon::prelude::*;
use repat_core::circle_maps::{CirclePoint, MapFamily};
use repat_core::fk_metric::{
    block_match_bound, block_match_pairs, cauchy_bound, certify_alignment, fk_distance, fk_upper_from_gap,
    max_fit_capped, MatchProblem, ALIGNMENT_CAP,
};
use repat_core::measure_lab::{
    build_strips_clear, disintegration_histogram, fiber_spanning_count, lyapunov_exponent, orbit_fiber_points,
    strip_length_trend, strips_nested, weak_star_gap, DisintegrationReport, OrbitMeasure, OverlapPolicy, StripFamily,
};
use repat_core::pattern::{build_stages, validate, PatternCertificate, Stage};
use repat_core::symbolic::PeriodicPoint;
use serde::Serialize;

use crate::config::Config;
use crate::error::{LabError, Result};
use crate::report::{OutDir, CSV_SCHEMA};
use crate::stagefile::{float, StageFile};

/// Orbit points closer than this to a strip endpoint trigger a `θ` nudge.
pub const ENDPOINT_CLEARANCE: f64 = 1e-12;
/// Slack when testing that a strip component lies inside a coarser one.
pub const NESTING_SLACK: f64 = 1e-12;

/// One pass/fail row of a quantitative report.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Verdict {
    pub check: &'static str,
    pub subject: String,
    pub passed: bool,
}

fn verdict(check: &'static str, subject: String, passed: bool) -> Verdict {
    Verdict { check, subject, passed }
}

fn require(verdicts: &[Verdict]) -> Result<()> {
    let failed: Vec<&Verdict> = verdicts.iter().filter(|v| !v.passed).collect();
    match failed.first() {
        None => Ok(()),
        Some(f) => Err(LabError::CheckFailed { failed: failed.len(), first: format!("{} ({})", f.check, f.subject) }),
    }
}

// ---------------------------------------------------------------- build

#[derive(Clone, Debug, Serialize)]
struct CertificateCsvRow<'a> {
    check: &'a str,
    condition: u8,
    stage: Option<usize>,
    passed: bool,
    value: String,
    bound: String,
    detail: &'a str,
}

fn certificate_rows(c: &PatternCertificate) -> Vec<CertificateCsvRow<'_>> {
    c.checks
        .iter()
        .map(|r| CertificateCsvRow {
            check: r.name,
            condition: r.condition,
            stage: r.stage,
            passed: r.passed,
            value: float(r.value),
            bound: float(r.bound),
            detail: &r.detail,
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
struct StageCsvRow {
    n: usize,
    pi: u64,
    k: Option<u64>,
    r: u64,
    alpha: Option<String>,
    q: String,
    j_length: String,
    log_c: String,
    lambda: Option<String>,
    rho: Option<String>,
    rho_num: Option<u64>,
    rho_den: Option<u64>,
}

pub struct Built {
    pub family: MapFamily,
    pub stages: Vec<Stage>,
    pub certificate: PatternCertificate,
}

/// Build the stage list of a config and certify it.
pub fn build_in_memory(cfg: &Config) -> Result<Built> {
    let family = cfg.family()?;
    let (omega0, j0) = cfg.start()?;
    let stages = build_stages(&family, &omega0, j0, &cfg.schedule()?, &cfg.build_options())?;
    let certificate = validate(&family, &stages, &cfg.validate_options());
    Ok(Built { family, stages, certificate })
}

fn write_certificate(out: &OutDir, fam: &MapFamily, stages: &[Stage], cert: &PatternCertificate) -> Result<()> {
    StageFile::new(fam, stages, Some(cert)).save(&out.path("stages.json"))?;
    out.csv("certificate.csv", &certificate_rows(cert))?;
    let rows: Vec<StageCsvRow> = stages
        .iter()
        .map(|s| StageCsvRow {
            n: s.n,
            pi: s.pi,
            k: s.k,
            r: s.r(),
            alpha: s.alpha.as_ref().map(|a| a.iter().map(|c| char::from(b'0' + c.get())).collect()),
            q: float(s.q.value()),
            j_length: float(s.j.length()),
            log_c: float(s.log_c),
            lambda: s.lambda.map(float),
            rho: s.rho.map(float),
            rho_num: s.rho_exact.map(|r| r.num),
            rho_den: s.rho_exact.map(|r| r.den),
        })
        .collect();
    out.csv("stages.csv", &rows)?;
    out.dat("rho.dat", "n rho_n", &stages.iter().filter_map(|s| s.rho.map(|r| (s.n as f64, r))).collect::<Vec<_>>())
}

fn certificate_verdict(cert: &PatternCertificate) -> Result<()> {
    if cert.is_valid() {
        Ok(())
    } else {
        Err(LabError::CertificateInvalid { conditions: cert.failed_conditions() })
    }
}

pub fn cmd_build(cfg: &Config, out: &OutDir) -> Result<Built> {
    let built = build_in_memory(cfg)?;
    write_certificate(out, &built.family, &built.stages, &built.certificate)?;
    certificate_verdict(&built.certificate)?;
    Ok(built)
}

pub fn load_stages(cfg: &Config, path: &Path) -> Result<(MapFamily, Vec<Stage>)> {
    let family = cfg.family()?;
    let stages = StageFile::load(path)?.stages_for(&family)?;
    Ok((family, stages))
}

/// Re-certify a stored stage list.
pub fn cmd_validate(cfg: &Config, stages_path: &Path, out: &OutDir) -> Result<PatternCertificate> {
    let (family, stages) = load_stages(cfg, stages_path)?;
    let cert = validate(&family, &stages, &cfg.validate_options());
    out.csv("certificate.csv", &certificate_rows(&cert))?;
    certificate_verdict(&cert)?;
    Ok(cert)
}

// ---------------------------------------------------------------- fk

/// One row of the distance report between stage orbits `n` and `n + 1`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct FkRow {
    pub n: usize,
    /// `block` (certified block match), `dp`, `bound-only` (block match where
    /// the horizon is above the DP cap), `estimate` or `identical`.
    pub mode: &'static str,
    pub window: u32,
    pub horizon: u64,
    pub fit: Option<u64>,
    pub gap: String,
    /// Gap bound `(Rₙ₊₁ + 2m)/πₙ₊₁` of the block match.
    pub gap_bound: String,
    /// Upper bound for the distance obtained from the gap.
    pub distance: String,
    /// `λₙ₊₁ + (n+1)/2ⁿ`, plus `1/N` on exact rows.
    pub bound: String,
    pub certified: &'static str,
    pub passed: bool,
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn fk_rows_for(cfg: &Config, stages: &[Stage], n: usize) -> Result<Vec<FkRow>> {
    let (s, t) = (&stages[n], &stages[n + 1]);
    let lambda = t.lambda.ok_or(LabError::StageFile(format!("stage {} has no lambda", n + 1)))?;
    let window = n as u32;
    let yn = PeriodicPoint::new(s.xi.clone())?;
    let yn1 = PeriodicPoint::new(t.xi.clone())?;
    let horizon = s.pi.checked_mul(t.pi).ok_or(repat_core::Error::Overflow)?;
    let cb = cauchy_bound(n, lambda);
    let gap_bound = (t.r() + 2 * n as u64) as f64 / t.pi as f64;
    let mut rows = Vec::new();

    // the block match is certified pair by pair for every stage pair
    let bm = block_match_bound(s, t, window)?;
    let fk_block = fk_upper_from_gap(window, bm.gap_upper);
    rows.push(FkRow {
        n,
        mode: if horizon <= cfg.fk.dp_cap { "block" } else { "bound-only" },
        window,
        horizon,
        fit: None,
        gap: float(bm.gap_upper),
        gap_bound: float(gap_bound),
        distance: float(fk_block),
        bound: float(cb),
        certified: yes(bm.certified_pairs == bm.fit_per_block),
        passed: bm.gap_upper <= gap_bound * (1.0 + 1e-12) && fk_block <= cb,
    });

    if horizon <= cfg.fk.dp_cap {
        let p = MatchProblem { u: &yn1, v: &yn, horizon, window };
        let fit = max_fit_capped(&p, cfg.fk.dp_cap)?;
        let gap = 1.0 - fit as f64 / horizon as f64;
        let mut certified = true;
        if horizon <= ALIGNMENT_CAP {
            let pairs = block_match_pairs(s, t, window, horizon)?;
            certified = certify_alignment(&p, &pairs).is_ok() && fit >= pairs.len() as u64;
        }
        let dist = fk_upper_from_gap(window, gap);
        let bound = cb + 1.0 / horizon as f64;
        rows.push(FkRow {
            n,
            mode: "dp",
            window,
            horizon,
            fit: Some(fit),
            gap: float(gap),
            gap_bound: float(gap_bound),
            distance: float(dist),
            bound: float(bound),
            certified: yes(certified),
            passed: certified && gap <= gap_bound && dist <= bound,
        });
    }

    let longest = cfg.fk.multiples.iter().copied().max().unwrap_or(1);
    if horizon.saturating_mul(longest) <= cfg.fk.dp_cap {
        let est = fk_distance(&yn1, &yn, cfg.fk.m_max, &cfg.fk.multiples, cfg.fk.dp_cap)?;
        let w = est.window.unwrap_or(0);
        rows.push(FkRow {
            n,
            mode: "estimate",
            window: w,
            horizon: horizon * longest,
            fit: None,
            gap: float(est.gammas.get(w as usize).copied().unwrap_or(1.0)),
            gap_bound: float(gap_bound),
            distance: float(est.value),
            bound: float(cb),
            certified: "no",
            passed: est.value <= cb,
        });
    }
    Ok(rows)
}

pub struct FkReport {
    pub rows: Vec<FkRow>,
}

pub fn fk_report(cfg: &Config, stages: &[Stage]) -> Result<FkReport> {
    let last = cfg.fk.max_stage.min(stages.len().saturating_sub(2));
    let per_pair: Vec<Vec<FkRow>> =
        (1..=last).into_par_iter().map(|n| fk_rows_for(cfg, stages, n)).collect::<Result<_>>()?;
    let mut rows: Vec<FkRow> = per_pair.into_iter().flatten().collect();

    // an orbit against itself is at distance exactly 0
    if let Some(s) = stages.get(1) {
        let y = PeriodicPoint::new(s.xi.clone())?;
        let est = fk_distance(&y, &y, cfg.fk.m_max, &cfg.fk.multiples, cfg.fk.dp_cap)?;
        rows.push(FkRow {
            n: 1,
            mode: "identical",
            window: 0,
            horizon: s.pi,
            fit: Some(s.pi),
            gap: float(0.0),
            gap_bound: float(0.0),
            distance: float(est.value),
            bound: float(0.0),
            certified: yes(est.exact_zero),
            passed: est.exact_zero && est.value == 0.0,
        });
    }
    Ok(FkReport { rows })
}

impl FkReport {
    pub fn verdicts(&self) -> Vec<Verdict> {
        self.rows
            .iter()
            .map(|r| verdict("distance_bound_between_consecutive_orbits", format!("n={} {}", r.n, r.mode), r.passed))
            .collect()
    }
}

pub fn cmd_fk(cfg: &Config, stages: &[Stage], out: &OutDir) -> Result<FkReport> {
    let report = fk_report(cfg, stages)?;
    out.csv("fk.csv", &report.rows)?;
    require(&report.verdicts())?;
    Ok(report)
}

// ---------------------------------------------------------------- measure

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OccupancyRow {
    /// Strip level.
    pub n: usize,
    /// Orbit stage.
    pub m: usize,
    pub count: u64,
    pub total: u64,
    pub proportion: String,
    /// `⌈ρₘπₘ⌉`.
    pub threshold: u64,
    pub rho_m: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct StripRow {
    pub n: usize,
    pub theta: String,
    pub j_prime_length: String,
    pub i_count: usize,
    pub a_count: usize,
    pub components: usize,
    pub resolved_overlaps: usize,
    pub length: String,
    pub inf_later_occupancy: Option<String>,
    pub nested_in_previous: Option<bool>,
    pub length_decreasing: Option<bool>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct LyapunovRow {
    pub n: usize,
    pub pi: u64,
    pub exponent: String,
    /// `log (gₙ)′(qₙ) / πₙ` from the word derivative.
    pub via_word: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SpanningRow {
    pub stage: usize,
    pub n: u64,
    pub eps: String,
    pub count: u64,
    pub bound: u64,
    pub test_points: u64,
    pub worst_distance: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CylinderRow {
    pub stage: usize,
    pub cylinder: String,
    pub samples: u64,
    pub weight: String,
    pub heaviest: String,
    pub mass_error: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct WeakStarRow {
    pub m: usize,
    pub gap: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureSummary {
    pub schema: &'static str,
    pub csv_schema: &'static str,
    pub max_level: usize,
    pub length_ratio_last_first: Option<String>,
    pub atomicity: Vec<(usize, String)>,
    pub checks: usize,
    pub failed: usize,
    pub failures: Vec<Verdict>,
}

pub struct MeasureReport {
    pub strips: Vec<StripFamily>,
    pub occupancy: Vec<OccupancyRow>,
    pub strip_rows: Vec<StripRow>,
    pub lyapunov: Vec<LyapunovRow>,
    pub spanning: Vec<SpanningRow>,
    pub histograms: Vec<DisintegrationReport>,
    pub weak_star: Vec<WeakStarRow>,
    pub verdicts: Vec<Verdict>,
    pub length_ratio: Option<f64>,
}

pub fn measure_report(cfg: &Config, fam: &MapFamily, stages: &[Stage]) -> Result<MeasureReport> {
    let mc = &cfg.measure;
    let top = mc.max_level.min(stages.len().saturating_sub(2));
    if top == 0 {
        return Err(LabError::Config("strip sets need at least two stages after level 0".into()));
    }
    let orbits: Vec<OrbitMeasure> =
        stages.par_iter().map(|s| orbit_fiber_points(fam, s, mc.sample_cap)).collect::<repat_core::Result<_>>()?;

    let strips: Vec<StripFamily> = (1..=top)
        .into_par_iter()
        .map(|n| {
            let pts: Vec<CirclePoint> = orbits[n..=top].iter().flat_map(|o| o.points.iter().copied()).collect();
            build_strips_clear(fam, stages, n, mc.theta.0, OverlapPolicy::default(), &pts, ENDPOINT_CLEARANCE)
        })
        .collect::<repat_core::Result<_>>()?;

    let trend = strip_length_trend(&strips, &orbits[1..=top]);
    let mut verdicts = Vec::new();
    let mut occupancy = Vec::new();
    for row in &trend {
        for (m, occ) in &row.occupancies {
            let ratio = stages[*m].rho_exact.ok_or(LabError::StageFile(format!("stage {m} has no exact rho")))?;
            let passed = occ.count >= ratio.threshold();
            let check = if *m == row.n { "strip_occupancy_at_own_level" } else { "strip_occupancy_under_later_orbit" };
            verdicts.push(verdict(check, format!("n={} m={m}", row.n), passed));
            occupancy.push(OccupancyRow {
                n: row.n,
                m: *m,
                count: occ.count,
                total: occ.total,
                proportion: float(occ.proportion),
                threshold: ratio.threshold(),
                rho_m: float(ratio.value()),
                passed,
            });
        }
    }
    // coarser strips catch a later orbit at least as often as its own strips
    for (i, s) in strips.iter().enumerate() {
        for later in &strips[i + 1..] {
            let m = later.level;
            let coarse = occupancy.iter().find(|r| r.n == s.level && r.m == m).map(|r| r.count);
            let fine = occupancy.iter().find(|r| r.n == m && r.m == m).map(|r| r.count);
            if let (Some(c), Some(f)) = (coarse, fine) {
                verdicts.push(verdict("occupancy_monotone_in_level", format!("n={} m={m}", s.level), c >= f));
            }
        }
    }

    let mut strip_rows = Vec::with_capacity(strips.len());
    for (i, (s, t)) in strips.iter().zip(&trend).enumerate() {
        let prev = i.checked_sub(1).map(|j| &strips[j]);
        let nested = prev.map(|p| strips_nested(s, p, NESTING_SLACK));
        let decreasing = prev.map(|p| s.total_length < p.total_length);
        if let Some(b) = nested {
            verdicts.push(verdict("strips_nested", format!("n={}", s.level), b));
        }
        if let Some(b) = decreasing {
            verdicts.push(verdict("strip_length_strictly_decreasing", format!("n={}", s.level), b));
        }
        strip_rows.push(StripRow {
            n: s.level,
            theta: float(s.theta),
            j_prime_length: float(s.j_prime.length()),
            i_count: s.i_count,
            a_count: s.a_count,
            components: s.components.len(),
            resolved_overlaps: s.resolved_overlaps,
            length: float(s.total_length),
            inf_later_occupancy: t.inf_later.map(float),
            nested_in_previous: nested,
            length_decreasing: decreasing,
        });
    }
    let length_ratio = (strips.len() > 1).then(|| strips[strips.len() - 1].total_length / strips[0].total_length);

    let lyapunov: Vec<LyapunovRow> = stages
        .par_iter()
        .zip(&orbits)
        .map(|(s, o)| {
            let exponent = lyapunov_exponent(fam, o)?;
            let via_word = fam.log_word_derivative(&s.xi, s.q)? / s.pi as f64;
            let consistent = (exponent - via_word).abs() * s.pi as f64 <= 1e-9 * via_word.abs().max(1.0) * s.pi as f64;
            Ok(LyapunovRow {
                n: s.n,
                pi: s.pi,
                exponent: float(exponent),
                via_word: float(via_word),
                passed: exponent < 0.0 && consistent,
            })
        })
        .collect::<Result<_>>()?;
    for r in &lyapunov {
        verdicts.push(verdict("negative_fiber_exponent", format!("n={}", r.n), r.passed));
    }

    let span_stage = mc.spanning_stage.min(stages.len() - 1);
    let xi = PeriodicPoint::new(stages[span_stage].xi.clone())?;
    let grid: Vec<(u64, f64)> =
        mc.spanning_horizons.iter().flat_map(|&n| mc.spanning_eps.iter().map(move |e| (n, e.0))).collect();
    let spanning: Vec<SpanningRow> = grid
        .par_iter()
        .map(|&(n, eps)| {
            let s = fiber_spanning_count(fam, &xi, n, eps)?;
            Ok(SpanningRow {
                stage: span_stage,
                n,
                eps: float(eps),
                count: s.count,
                bound: s.bound,
                test_points: s.test_points,
                worst_distance: float(s.worst_distance),
                passed: s.count <= s.bound && s.worst_distance <= eps,
            })
        })
        .collect::<Result<_>>()?;
    for r in &spanning {
        verdicts.push(verdict("linear_spanning_bound", format!("n={} eps={}", r.n, r.eps), r.passed));
    }

    let hist_stages: Vec<usize> = mc.histogram_stages.iter().copied().filter(|&m| m < orbits.len()).collect();
    let histograms: Vec<DisintegrationReport> = hist_stages
        .par_iter()
        .map(|&m| disintegration_histogram(&orbits[m], mc.window, mc.bins))
        .collect::<repat_core::Result<_>>()?;
    for h in &histograms {
        let ok = h.max_mass_error <= 1e-12 && h.total_mass_error <= 1e-12;
        verdicts.push(verdict("conditional_histograms_sum_to_one", format!("m={}", h.stage), ok));
    }

    let weak_star: Vec<WeakStarRow> = orbits
        .windows(2)
        .map(|w| WeakStarRow { m: w[1].stage, gap: float(weak_star_gap(&w[0], &w[1], fam.size() as u8, mc.harmonics)) })
        .collect();

    Ok(MeasureReport {
        strips,
        occupancy,
        strip_rows,
        lyapunov,
        spanning,
        histograms,
        weak_star,
        verdicts,
        length_ratio,
    })
}

pub fn cmd_measure(cfg: &Config, fam: &MapFamily, stages: &[Stage], out: &OutDir) -> Result<MeasureReport> {
    let r = measure_report(cfg, fam, stages)?;
    write_measure(cfg, &r, out)?;
    require(&r.verdicts)?;
    Ok(r)
}

fn write_measure(cfg: &Config, r: &MeasureReport, out: &OutDir) -> Result<()> {
    out.csv("occupancy.csv", &r.occupancy)?;
    out.csv("strips.csv", &r.strip_rows)?;
    out.csv("lyapunov.csv", &r.lyapunov)?;
    out.csv("spanning.csv", &r.spanning)?;
    out.csv("weak_star.csv", &r.weak_star)?;
    let cylinders: Vec<CylinderRow> = r
        .histograms
        .iter()
        .flat_map(|h| {
            h.cylinders.iter().map(move |c| CylinderRow {
                stage: h.stage,
                cylinder: c.cylinder.iter().map(|s| char::from(b'0' + s.get())).collect(),
                samples: c.samples,
                weight: float(c.weight),
                heaviest: float(c.heaviest),
                mass_error: float(c.masses.iter().sum::<f64>() - 1.0),
            })
        })
        .collect();
    out.csv("disintegration.csv", &cylinders)?;
    let pts = |f: &dyn Fn(&StripRow) -> f64| r.strip_rows.iter().map(|s| (s.n as f64, f(s))).collect::<Vec<_>>();
    out.dat("strip_length.dat", "n length(A_n)", &pts(&|s| s.length.parse().unwrap_or(f64::NAN)))?;
    out.dat(
        "lyapunov.dat",
        "n exponent",
        &r.lyapunov.iter().map(|l| (l.n as f64, l.exponent.parse().unwrap_or(f64::NAN))).collect::<Vec<_>>(),
    )?;
    out.dat(
        "atomicity.dat",
        "m heaviest_bin_mass",
        &r.histograms.iter().map(|h| (h.stage as f64, h.atomicity)).collect::<Vec<_>>(),
    )?;
    if let Some(eps) = cfg.measure.spanning_eps.iter().map(|e| e.0).reduce(f64::min) {
        let series: Vec<(f64, f64)> =
            r.spanning.iter().filter(|s| s.eps == float(eps)).map(|s| (s.n as f64, s.count as f64)).collect();
        out.dat("spanning.dat", &format!("n count(eps={eps:?})"), &series)?;
    }
    let failures: Vec<Verdict> = r.verdicts.iter().filter(|v| !v.passed).cloned().collect();
    out.json(
        "measure.json",
        &MeasureSummary {
            schema: "repat-measure/1",
            csv_schema: CSV_SCHEMA,
            max_level: r.strips.len(),
            length_ratio_last_first: r.length_ratio.map(float),
            atomicity: r.histograms.iter().map(|h| (h.stage, float(h.atomicity))).collect(),
            checks: r.verdicts.len(),
            failed: failures.len(),
            failures,
        },
    )
}

// ---------------------------------------------------------------- report-all

#[derive(Clone, Debug, Serialize)]
struct Summary {
    schema: &'static str,
    csv_schema: &'static str,
    seed: u64,
    stages: usize,
    final_period: u64,
    certificate_valid: bool,
    failed_conditions: Vec<u8>,
    lambda_hat: Option<String>,
    fk_rows: usize,
    fk_failed: usize,
    measure_checks: usize,
    measure_failed: usize,
}

/// Build, certify, then run the distance and measure reports into one
/// directory. Later reports run even when an earlier one has failures.
pub fn cmd_report_all(cfg: &Config, out: &OutDir) -> Result<()> {
    let built = build_in_memory(cfg)?;
    write_certificate(out, &built.family, &built.stages, &built.certificate)?;
    let fk = fk_report(cfg, &built.stages)?;
    out.csv("fk.csv", &fk.rows)?;
    let measure = measure_report(cfg, &built.family, &built.stages)?;
    write_measure(cfg, &measure, out)?;
    let fk_verdicts = fk.verdicts();
    let failed = |v: &[Verdict]| v.iter().filter(|x| !x.passed).count();
    out.json(
        "summary.json",
        &Summary {
            schema: "repat-summary/1",
            csv_schema: CSV_SCHEMA,
            seed: cfg.seed,
            stages: built.stages.len(),
            final_period: built.stages.last().map_or(0, |s| s.pi),
            certificate_valid: built.certificate.is_valid(),
            failed_conditions: built.certificate.failed_conditions(),
            lambda_hat: built.certificate.lambda_hat.map(float),
            fk_rows: fk.rows.len(),
            fk_failed: failed(&fk_verdicts),
            measure_checks: measure.verdicts.len(),
            measure_failed: failed(&measure.verdicts),
        },
    )?;
    certificate_verdict(&built.certificate)?;
    require(&fk_verdicts)?;
    require(&measure.verdicts)
}

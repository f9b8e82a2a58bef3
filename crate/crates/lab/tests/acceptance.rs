//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runtimes are measured around the work of each criterion
//! (the stage list is built once and shared from criterion 2 onwards).

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repat_core::circle_maps::{CirclePoint, MapFamily};
use repat_core::fk_metric::{
    block_match_bound, block_match_pairs, brute_force_fit, cauchy_bound, certify_alignment, fk_upper_from_gap, max_fit,
    MatchProblem, DP_CAP,
};
use repat_core::measure_lab::{
    build_strips, disintegration_histogram, fiber_spanning_count, occupancy, orbit_fiber_points, strips_nested,
    OrbitMeasure, OverlapPolicy, StripFamily, SAMPLE_CAP,
};
use repat_core::pattern::{
    build_stages, recursion, reference_schedule, reference_start, search_noise_word, validate, SearchStrategy, Stage,
    ValidateOptions, REFERENCE_TAIL,
};
use repat_core::symbolic::{window_agree, HierarchicalWord, PeriodicPoint, Symbol};
use repat_core::BuildOptions;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: u32, title: &str, limit: Duration, elapsed: Duration, o: Outcome) {
        let ok = o.ok && elapsed <= limit;
        if !ok {
            self.failures += 1;
        }
        let timing = format!("{:.2}s / {}s", elapsed.as_secs_f64(), limit.as_secs());
        let late = if o.ok && !ok { " [over time limit]" } else { "" };
        println!("[{}] {id}. {title} ({timing}): {}{late}", if ok { "PASS" } else { "FAIL" }, o.detail);
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

const TOP: usize = 12;

fn criterion_1() -> Outcome {
    let rows = match recursion(1, &[(2, 1); TOP]) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    for r in &rows {
        let n = r.n as u32;
        let pi = (1u64 << (n + 1)) - 1;
        let lambda = 1.0 / ((1u64 << (n + 1)) - 2) as f64;
        let rho = (1u64 << n) as f64 / pi as f64;
        if r.pi != pi || r.rho_exact.num != 1 << n || r.rho_exact.den != pi {
            return fail(format!("n={n}: integer recursion differs from 2^(n+1)-1"));
        }
        if (r.lambda - lambda).abs() > 1e-12 || (r.rho - rho).abs() > 1e-12 {
            return fail(format!("n={n}: lambda {} vs {lambda}, rho {} vs {rho}", r.lambda, r.rho));
        }
    }
    pass(format!("pi, lambda, rho match closed forms for n = 1..{TOP}"))
}

fn criterion_2(fam: &MapFamily, stages: &[Stage]) -> Outcome {
    let opts = ValidateOptions { tail: REFERENCE_TAIL, ..ValidateOptions::default() };
    let cert = validate(fam, stages, &opts);
    if !cert.is_valid() {
        let f: Vec<String> = cert.failures().take(3).map(|c| format!("{}@{:?}", c.name, c.stage)).collect();
        return fail(format!("certificate INVALID: {}", f.join(", ")));
    }
    let required = ["nesting", "shrinking", "contraction", "factorization", "period_exceeds_power_of_two"];
    for name in required {
        let n = cert.checks.iter().filter(|c| c.name == name).count();
        if n == 0 {
            return fail(format!("certificate lacks `{name}` checks"));
        }
    }
    for s in &stages[1..] {
        if s.j.length() > 0.5 * stages[s.n - 1].j.length() || s.c >= 0.9 || s.pi <= 1 << s.n {
            return fail(format!("stage {} violates a structural bound", s.n));
        }
    }
    pass(format!("VALID, {} checks through n = {TOP}, pi_{TOP} = {}", cert.checks.len(), stages[TOP].pi))
}

fn build_all_strips(fam: &MapFamily, stages: &[Stage]) -> repat_core::Result<Vec<StripFamily>> {
    (1..=TOP).map(|n| build_strips(fam, stages, n, 0.5, OverlapPolicy::default())).collect()
}

fn criterion_3(strips: &[StripFamily], orbits: &[OrbitMeasure], stages: &[Stage]) -> Outcome {
    for s in strips {
        let n = s.level;
        let occ = occupancy(&orbits[n], s);
        let need = stages[n].rho_exact.expect("rho").threshold();
        if occ.count < need {
            return fail(format!("n={n}: count {} < {need}", occ.count));
        }
    }
    pass(format!("count >= ceil(rho_n pi_n) for n = 1..{TOP}"))
}

fn criterion_4(strips: &[StripFamily], orbits: &[OrbitMeasure], stages: &[Stage]) -> Outcome {
    let mut pairs = 0;
    for s in strips {
        for m in s.level + 1..=TOP {
            let occ = occupancy(&orbits[m], s);
            let ratio = stages[m].rho_exact.expect("rho");
            if occ.count < ratio.threshold() || 2 * ratio.num < ratio.den {
                return fail(format!("n={} m={m}: count {} vs {}", s.level, occ.count, ratio.threshold()));
            }
            pairs += 1;
        }
    }
    for w in strips.windows(2) {
        if w[1].total_length >= w[0].total_length {
            return fail(format!("length of A_{} does not decrease", w[1].level));
        }
        if !strips_nested(&w[1], &w[0], 1e-12) {
            return fail(format!("A_{} not inside A_{}", w[1].level, w[0].level));
        }
    }
    let ratio = strips[TOP - 1].total_length / strips[0].total_length;
    if ratio >= 0.1 {
        return fail(format!("length ratio {ratio:e}"));
    }
    pass(format!("{pairs} pairs n < m hold, lengths strictly decreasing, |A_12|/|A_1| = {ratio:.3e}"))
}

fn random_point(rng: &mut ChaCha8Rng, max_len: u64, k: u64) -> PeriodicPoint {
    let len = 1 + rng.next_u64() % max_len;
    let w = (0..len).map(|_| Symbol::new(1 + (rng.next_u64() % k) as u8).expect("symbol")).collect();
    PeriodicPoint::new(HierarchicalWord::literal(w)).expect("nonempty")
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let count = 300;
    for i in 0..count {
        let (u, v) = (random_point(&mut rng, 5, 2), random_point(&mut rng, 5, 2));
        let horizon = 1 + rng.next_u64() % 8;
        let window = (rng.next_u64() % 3) as u32;
        let p = MatchProblem { u: &u, v: &v, horizon, window };
        match (max_fit(&p), brute_force_fit(&p)) {
            (Ok(a), Ok(b)) if a == b => {}
            (a, b) => return fail(format!("instance {i}: dp {a:?} vs brute force {b:?}")),
        }
    }
    pass(format!("{count} random instances with n <= 8 agree exactly"))
}

fn criterion_6(stages: &[Stage]) -> Outcome {
    let mut exact = 0;
    let mut certified = 0u64;
    for n in 1..TOP {
        let (s, t) = (&stages[n], &stages[n + 1]);
        let window = n as u32;
        let lambda = t.lambda.expect("lambda");
        let horizon = s.pi * t.pi;
        let yn = PeriodicPoint::new(s.xi.clone()).expect("word");
        let yn1 = PeriodicPoint::new(t.xi.clone()).expect("word");
        if n <= 4 {
            if horizon > DP_CAP {
                return fail(format!("n={n}: horizon {horizon} above the DP cap"));
            }
            let p = MatchProblem { u: &yn1, v: &yn, horizon, window };
            let fit = match max_fit(&p) {
                Ok(f) => f,
                Err(e) => return fail(e.to_string()),
            };
            let gap = 1.0 - fit as f64 / horizon as f64;
            let gap_bound = (t.r() + 2 * n as u64) as f64 / t.pi as f64;
            let fk = fk_upper_from_gap(window, gap);
            let bound = cauchy_bound(n, lambda) + 1.0 / horizon as f64;
            if gap > gap_bound || fk > bound {
                return fail(format!("n={n}: gap {gap} vs {gap_bound}, distance {fk} vs {bound}"));
            }
            exact += 1;
        } else {
            let bm = match block_match_bound(s, t, window) {
                Ok(b) => b,
                Err(e) => return fail(format!("n={n}: {e}")),
            };
            // every claimed pair over two periods of the later orbit
            let pairs = match block_match_pairs(s, t, window, 2 * t.pi) {
                Ok(p) => p,
                Err(e) => return fail(e.to_string()),
            };
            let p = MatchProblem { u: &yn1, v: &yn, horizon: 2 * t.pi, window };
            if certify_alignment(&p, &pairs).is_err()
                || pairs.iter().any(|&(i, j)| !window_agree(&yn1, i, &yn, j, window))
            {
                return fail(format!("n={n}: a claimed match pair fails the window comparison"));
            }
            if fk_upper_from_gap(window, bm.gap_upper) > cauchy_bound(n, lambda) {
                return fail(format!("n={n}: block bound above the Cauchy bound"));
            }
            certified += pairs.len() as u64;
        }
    }
    pass(format!("{exact} exact DP pairs within bounds, {certified} block pairs certified for n = 5..{}", TOP - 1))
}

fn criterion_7(fam: &MapFamily, stages: &[Stage]) -> Outcome {
    let xi = PeriodicPoint::new(stages[TOP].xi.clone()).expect("word");
    let mut worst = 0.0f64;
    for n in [10, 100, 1000] {
        for eps in [0.1, 0.05, 0.01] {
            match fiber_spanning_count(fam, &xi, n, eps) {
                Ok(s) if s.count <= s.bound && s.worst_distance <= eps => {
                    worst = worst.max(s.count as f64 / s.bound as f64)
                }
                Ok(s) => return fail(format!("n={n} eps={eps}: count {} bound {}", s.count, s.bound)),
                Err(e) => return fail(format!("n={n} eps={eps}: {e}")),
            }
        }
    }
    pass(format!("9 (n, eps) pairs within n(floor(1/eps)+1), largest count/bound {worst:.3}"))
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn random_word(rng: &mut ChaCha8Rng, max_len: u64) -> Vec<Symbol> {
    let len = 1 + rng.next_u64() % max_len;
    (0..len).map(|_| Symbol::new(1 + (rng.next_u64() % 2) as u8).expect("symbol")).collect()
}

fn criterion_8(fam: &MapFamily, orbits: &[OrbitMeasure]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = 1e-6;
    let mut worst_fd = 0.0f64;
    for _ in 0..100 {
        let w = random_word(&mut rng, 6);
        let x = unit(&mut rng);
        // lifts avoid the reduction jump at 0
        let lift = |t: f64| w.iter().fold(t, |y, s| fam.map(*s).expect("symbol").lift(y));
        let fd = (lift(x + h) - lift(x - h)) / (2.0 * h);
        let d = fam.word_derivative(&w, CirclePoint::new(x)).expect("derivative");
        worst_fd = worst_fd.max(((fd - d) / d).abs());
    }
    if worst_fd > 1e-6 {
        return fail(format!("finite differences off by {worst_fd:e}"));
    }
    let mut worst_comp = 0.0f64;
    for _ in 0..100 {
        let (a, b) = (random_word(&mut rng, 12), random_word(&mut rng, 12));
        let p = CirclePoint::new(unit(&mut rng));
        let ab = [a.clone(), b.clone()].concat();
        let mid = fam.eval_word(&a, p).expect("eval");
        let direct = fam.eval_word(&ab, p).expect("eval");
        worst_comp = worst_comp.max(direct.distance(fam.eval_word(&b, mid).expect("eval")));
        let d = fam.word_derivative(&ab, p).expect("derivative");
        let chain = fam.word_derivative(&a, p).expect("derivative") * fam.word_derivative(&b, mid).expect("derivative");
        worst_comp = worst_comp.max((d - chain).abs() / d);
    }
    if worst_comp > 1e-12 {
        return fail(format!("composition coherence off by {worst_comp:e}"));
    }
    let mut worst_mass = 0.0f64;
    for o in &orbits[1..] {
        for bins in [1, 8, 64] {
            match disintegration_histogram(o, 2, bins) {
                Ok(r) => worst_mass = worst_mass.max(r.max_mass_error).max(r.total_mass_error),
                Err(e) => return fail(e.to_string()),
            }
        }
    }
    if worst_mass > 1e-12 {
        return fail(format!("histogram mass off by {worst_mass:e}"));
    }
    pass(format!("fd {worst_fd:.1e}, composition {worst_comp:.1e}, histogram mass {worst_mass:.1e}"))
}

fn report_all(config: &Path, out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_repat"))
        .args(["report-all", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--seed", "7"])
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("report-all exited with {status}"))
    }
}

fn criterion_9() -> Outcome {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/reference.toml");
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return fail(e.to_string()),
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let (ra, rb) = std::thread::scope(|s| {
        let ha = s.spawn(|| report_all(&config, &a));
        let hb = s.spawn(|| report_all(&config, &b));
        (ha.join().expect("thread"), hb.join().expect("thread"))
    });
    if let Err(e) = ra.and(rb) {
        return fail(e);
    }
    let mut names: Vec<_> = match std::fs::read_dir(&a) {
        Ok(rd) => rd.filter_map(|e| e.ok()).map(|e| e.file_name()).collect(),
        Err(e) => return fail(e.to_string()),
    };
    names.sort();
    for name in &names {
        let (x, y) = (std::fs::read(a.join(name)), std::fs::read(b.join(name)));
        match (x, y) {
            (Ok(x), Ok(y)) if x == y => {}
            _ => return fail(format!("{} differs between runs", name.to_string_lossy())),
        }
    }
    if std::fs::read_dir(&b).map(|r| r.count()).unwrap_or(0) != names.len() {
        return fail("the two runs wrote different file sets");
    }
    pass(format!("{} output files byte-identical across two runs", names.len()))
}

fn main() -> ExitCode {
    let mut rep = Report { failures: 0 };
    let fam = MapFamily::reference();
    let opts = BuildOptions::default();

    let (o, t) = timed(criterion_1);
    rep.line(1, "recursion identities", secs(1), t, o);

    let (w, j) = reference_start();
    let ((stages, o), t) = timed(|| match build_stages(&fam, &w, j, &reference_schedule(TOP), &opts) {
        Ok(st) => {
            let o = criterion_2(&fam, &st);
            (st, o)
        }
        Err(e) => (Vec::new(), fail(format!("build failed: {e}"))),
    });
    let built = stages.len() == TOP + 1;
    rep.line(2, "certificate through n = 12", secs(10), t, o);

    // strips at level 12 need the next stage
    let mut stages = stages;
    let (extra, t_extra) = timed(|| {
        stages.last().map(|last| search_noise_word(&fam, last, 2, 1, SearchStrategy::Exhaustive, &opts).map(|(_, s)| s))
    });
    let extended = match extra {
        Some(Ok(s)) => {
            stages.push(s);
            true
        }
        _ => false,
    };

    let ((strips, orbits), t_setup) = timed(|| {
        if !(built && extended) {
            return (Err("stage list unavailable".to_string()), Vec::new());
        }
        let strips = build_all_strips(&fam, &stages).map_err(|e| e.to_string());
        let orbits: Vec<OrbitMeasure> =
            stages[..=TOP].iter().filter_map(|s| orbit_fiber_points(&fam, s, SAMPLE_CAP).ok()).collect();
        (strips, orbits)
    });
    let ready = match &strips {
        Ok(_) if orbits.len() == TOP + 1 => Ok(()),
        Ok(_) => Err("orbit generation failed".to_string()),
        Err(e) => Err(e.clone()),
    };

    let (o, t) = timed(|| match (&ready, &strips) {
        (Ok(()), Ok(s)) => criterion_3(s, &orbits, &stages),
        (Err(e), _) | (_, Err(e)) => fail(e.clone()),
    });
    rep.line(3, "exact strip occupancy", secs(30), t + t_extra + t_setup, o);

    let (o, t) = timed(|| match (&ready, &strips) {
        (Ok(()), Ok(s)) => criterion_4(s, &orbits, &stages),
        (Err(e), _) | (_, Err(e)) => fail(e.clone()),
    });
    rep.line(4, "strip nesting, occupancy and shrinking", secs(60), t + t_extra + t_setup, o);

    let (o, t) = timed(criterion_5);
    rep.line(5, "alignment DP equals brute force", secs(10), t, o);

    let (o, t) = timed(|| if built { criterion_6(&stages) } else { fail("stage list unavailable") });
    rep.line(6, "distance bounds between consecutive orbits", secs(120), t, o);

    let (o, t) = timed(|| if built { criterion_7(&fam, &stages) } else { fail("stage list unavailable") });
    rep.line(7, "linear spanning bound", secs(30), t, o);

    let (o, t) =
        timed(|| if orbits.len() == TOP + 1 { criterion_8(&fam, &orbits) } else { fail("orbits unavailable") });
    rep.line(8, "numerical hygiene", secs(10), t, o);

    let (o, t) = timed(criterion_9);
    rep.line(9, "report-all determinism", secs(120), t, o);

    println!("{} of 9 criteria passed", 9 - rep.failures);
    if rep.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

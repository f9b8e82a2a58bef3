//! Stage builder and certificate for sequences of periodic orbits with
//! repetitive pattern.
//!
//! A stage list is valid when
//!
//! 1. the intervals `Jₙ` are nested and shrink to a point,
//! 2. the `π₀` images of `J₀` under the prefixes of `ω⁰` are pairwise disjoint,
//! 3. `ξₙ = ξₙ₋₁^{kₙ} αₙ` with `kₙ ≥ 2`, `Rₙ = |αₙ| ≥ 1`, and the word map
//!    `gₙ` has a fixed point `qₙ ∈ Jₙ` with `gₙ(Jₙ) ⊂ Jₙ` and `sup|gₙ′| < 1`,
//! 4. `λₙ = Rₙ/(kₙπₙ₋₁)` is summable.
//!
//! The numbers 1 to 4 are used as condition codes in errors and checks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circle_maps::{first_overlap, Arc, CirclePoint, MapFamily, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::symbolic::{build_stage_word, HierarchicalWord, Symbol};

/// Tunables of the stage builder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildOptions {
    /// Fixed-point tolerance in circle distance.
    pub tol: f64,
    /// Grid size for derivative suprema.
    pub grid: usize,
    /// Required bound on the grid supremum of `|gₙ′|` over `Jₙ`.
    pub c_target: f64,
    /// Upper bound for `|Jₙ| / |Jₙ₋₁|`.
    pub shrink_cap: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { tol: 1e-12, grid: DEFAULT_GRID, c_target: 0.9, shrink_cap: 0.3 }
    }
}

/// `ρₙ` as an exact fraction `π₀·k₁⋯kₙ / πₙ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactRatio {
    pub num: u64,
    pub den: u64,
}

impl ExactRatio {
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `⌈ratio · den⌉`, which is the numerator itself.
    pub fn threshold(self) -> u64 {
        self.num
    }
}

/// One level of the construction.
#[derive(Clone, Debug)]
pub struct Stage {
    pub n: usize,
    pub xi: HierarchicalWord,
    pub pi: u64,
    /// `kₙ`; absent at level 0.
    pub k: Option<u64>,
    /// `αₙ`; absent at level 0.
    pub alpha: Option<Vec<Symbol>>,
    pub q: CirclePoint,
    pub j: Arc,
    /// Grid supremum of `|gₙ′|` on `Jₙ`; underflows to 0 for deep stages.
    pub c: f64,
    /// Natural log of `c`.
    pub log_c: f64,
    pub lambda: Option<f64>,
    pub rho: Option<f64>,
    pub rho_exact: Option<ExactRatio>,
}

impl Stage {
    /// `Rₙ = |αₙ|`, zero at level 0.
    pub fn r(&self) -> u64 {
        self.alpha.as_ref().map_or(0, |a| a.len() as u64)
    }
}

/// Level 0: the word `ω⁰`, its attracting fixed point in `J₀`, and the
/// disjointness of the prefix images of `J₀`.
pub fn init_stage0(fam: &MapFamily, omega0: &[Symbol], j0: Arc, opts: &BuildOptions) -> Result<Stage> {
    if omega0.is_empty() {
        return Err(Error::InvalidInput("the initial word must be nonempty"));
    }
    fam.check_word(omega0)?;
    let fp = fam.find_attracting_fixed_point(omega0, &j0, opts.tol, opts.grid)?;
    let images = prefix_images(fam, omega0, &j0)?;
    if first_overlap(&images).is_some() {
        return Err(Error::DisjointnessFailure { level: 0 });
    }
    Ok(Stage {
        n: 0,
        xi: HierarchicalWord::literal(omega0.to_vec()),
        pi: omega0.len() as u64,
        k: None,
        alpha: None,
        q: fp.point,
        j: j0,
        c: fp.sup_derivative,
        log_c: fp.log_sup,
        lambda: None,
        rho: None,
        rho_exact: None,
    })
}

/// `J₀, f_{ω₁}(J₀), …, f_{ω_{π₀−1}}∘⋯∘f_{ω₁}(J₀)`.
pub fn prefix_images(fam: &MapFamily, omega0: &[Symbol], j0: &Arc) -> Result<Vec<Arc>> {
    let mut out = Vec::with_capacity(omega0.len());
    let mut a = *j0;
    out.push(a);
    for s in &omega0[..omega0.len().saturating_sub(1)] {
        a = fam.arc_image(core::slice::from_ref(s), &a)?;
        out.push(a);
    }
    Ok(out)
}

/// `ξₙ = ξₙ₋₁^{kₙ}αₙ`, its fixed point inside `Jₙ₋₁`, and the largest
/// certified arc `Jₙ` centred there.
pub fn build_next_stage(fam: &MapFamily, prev: &Stage, k: u64, alpha: &[Symbol], opts: &BuildOptions) -> Result<Stage> {
    let xi = build_stage_word(&prev.xi, k, alpha)?;
    fam.check_word(alpha)?;
    let pi = xi.len();
    let no_fp = Error::NoContraction { reason: "g_n has no attracting fixed point inside J_{n-1}" };
    let q = fam.fixed_point_in(&xi, &prev.j, opts.tol).map_err(|_| no_fp.clone())?;
    if !(fam.log_word_derivative(&xi, q)? < 0.0) {
        return Err(no_fp);
    }
    let (j, log_c) = certified_arc(fam, &xi, q, &prev.j, opts)?;
    let lambda = alpha.len() as f64 / (k as f64 * prev.pi as f64);
    let prev_rho = prev.rho.unwrap_or(1.0);
    let prev_num = prev.rho_exact.map_or(prev.pi, |r| r.num);
    let num = prev_num.checked_mul(k).ok_or(Error::Overflow)?;
    Ok(Stage {
        n: prev.n + 1,
        xi,
        pi,
        k: Some(k),
        alpha: Some(alpha.to_vec()),
        q,
        j,
        c: libm::exp(log_c),
        log_c,
        lambda: Some(lambda),
        rho: Some(prev_rho / (1.0 + lambda)),
        rho_exact: Some(ExactRatio { num, den: pi }),
    })
}

/// Halve the radius from the cap until `g(J) ⊂ J` and the grid supremum of
/// `|g′|` is at most `c_target`.
fn certified_arc(
    fam: &MapFamily,
    xi: &HierarchicalWord,
    q: CirclePoint,
    prev: &Arc,
    opts: &BuildOptions,
) -> Result<(Arc, f64)> {
    let room =
        prev.largest_centered_within(q).ok_or(Error::NoContraction { reason: "fixed point lies outside J_{n-1}" })?;
    let mut half = (0.5 * room.length()).min(0.5 * opts.shrink_cap * prev.length());
    let log_target = libm::log(opts.c_target);
    for _ in 0..64 {
        if !(half > 0.0) {
            break;
        }
        let j = Arc::centered(q, 2.0 * half)?;
        if prev.contains_arc(&j) {
            let image = fam.arc_image(xi, &j)?;
            if j.contains_arc(&image) {
                let log_c = fam.sup_log_derivative_on(xi, &j, opts.grid)?;
                if log_c <= log_target {
                    return Ok((j, log_c));
                }
            }
        }
        half *= 0.5;
    }
    Err(Error::NoContraction { reason: "no certified contracting arc around q_n" })
}

/// How a noise word is chosen when the schedule does not fix it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchStrategy {
    /// All `kᴿ` words in lexicographic order.
    Exhaustive,
    /// `samples` uniform random words from a seeded generator, tried in
    /// lexicographic order.
    Sampled { samples: u64, seed: u64 },
}

/// Enumeration budget of the exhaustive search.
pub const EXHAUSTIVE_CAP: u64 = 1 << 20;

/// The lexicographically first noise word of length `r` (among the
/// candidates of the strategy) for which [`build_next_stage`] succeeds.
pub fn search_noise_word(
    fam: &MapFamily,
    prev: &Stage,
    k: u64,
    r: usize,
    strategy: SearchStrategy,
    opts: &BuildOptions,
) -> Result<(Vec<Symbol>, Stage)> {
    if r == 0 {
        return Err(Error::InvalidStage { condition: 3, reason: "noise word must have length at least 1" });
    }
    let size = fam.size() as u64;
    let candidates: Vec<Vec<Symbol>> = match strategy {
        SearchStrategy::Exhaustive => {
            let total = size
                .checked_pow(r as u32)
                .filter(|&t| t <= EXHAUSTIVE_CAP)
                .ok_or(Error::CapExceeded { requested: size.saturating_pow(r as u32), cap: EXHAUSTIVE_CAP })?;
            (0..total).map(|i| word_from_index(i, r, size)).collect()
        }
        SearchStrategy::Sampled { samples, seed } => {
            if samples > EXHAUSTIVE_CAP {
                return Err(Error::CapExceeded { requested: samples, cap: EXHAUSTIVE_CAP });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut words: Vec<Vec<Symbol>> = (0..samples)
                .map(|_| {
                    (0..r)
                        .map(|_| Symbol::new((rng.next_u64() % size) as u8 + 1).expect("alphabet within 1..=9"))
                        .collect()
                })
                .collect();
            words.sort();
            words.dedup();
            words
        }
    };
    let mut tried = 0;
    for alpha in candidates {
        tried += 1;
        match build_next_stage(fam, prev, k, &alpha, opts) {
            Ok(stage) => return Ok((alpha, stage)),
            Err(Error::NoContraction { .. }) | Err(Error::NoConvergence { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NotFound { tried })
}

/// The `i`-th word of length `r` in lexicographic order over `{1..size}`.
fn word_from_index(mut i: u64, r: usize, size: u64) -> Vec<Symbol> {
    let mut w = alloc::vec![Symbol::new(1).expect("1 is a symbol"); r];
    for slot in w.iter_mut().rev() {
        *slot = Symbol::new((i % size) as u8 + 1).expect("alphabet within 1..=9");
        i /= size;
    }
    w
}

/// One row of the `π`, `λ`, `ρ` recursions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecursionRow {
    pub n: usize,
    pub pi: u64,
    pub lambda: f64,
    pub rho: f64,
    pub rho_exact: ExactRatio,
}

/// `πₙ = kₙπₙ₋₁ + Rₙ`, `λₙ = Rₙ/(kₙπₙ₋₁)`, `ρ₁ = 1/(1+λ₁)`,
/// `ρₙ = ρₙ₋₁/(1+λₙ)` for a schedule of `(kₙ, Rₙ)` pairs.
pub fn recursion(pi0: u64, schedule: &[(u64, u64)]) -> Result<Vec<RecursionRow>> {
    if pi0 == 0 {
        return Err(Error::InvalidInput("the initial period must be positive"));
    }
    let mut rows = Vec::with_capacity(schedule.len());
    let (mut pi, mut rho, mut num) = (pi0, 1.0f64, pi0);
    for (i, &(k, r)) in schedule.iter().enumerate() {
        if k < 2 {
            return Err(Error::InvalidStage { condition: 3, reason: "repetition count k_n must be at least 2" });
        }
        if r == 0 {
            return Err(Error::InvalidStage { condition: 3, reason: "noise word must have length at least 1" });
        }
        let lambda = r as f64 / (k as f64 * pi as f64);
        pi = k.checked_mul(pi).and_then(|p| p.checked_add(r)).ok_or(Error::Overflow)?;
        num = num.checked_mul(k).ok_or(Error::Overflow)?;
        rho /= 1.0 + lambda;
        rows.push(RecursionRow { n: i + 1, pi, lambda, rho, rho_exact: ExactRatio { num, den: pi } });
    }
    Ok(rows)
}

/// Declared asymptotics for the summability requirement, which no finite
/// prefix can establish on its own.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailModel {
    Undeclared,
    /// `λₙ ≤ C·rⁿ` for every `n > from`.
    Geometric {
        c: f64,
        ratio: f64,
        from: usize,
    },
}

impl TailModel {
    /// Bound for `Σ_{n > last} λₙ` under the model.
    pub fn tail_sum(&self, last: usize) -> Option<f64> {
        match *self {
            TailModel::Undeclared => None,
            TailModel::Geometric { c, ratio, from } => {
                if !(0.0..1.0).contains(&ratio) || c < 0.0 {
                    return None;
                }
                let start = last.max(from) + 1;
                // terms between last+1 and from are not covered by the model
                if from > last {
                    return None;
                }
                Some(c * libm::pow(ratio, start as f64) / (1.0 - ratio))
            }
        }
    }

    pub fn bound_at(&self, n: usize) -> Option<f64> {
        match *self {
            TailModel::Undeclared => None,
            TailModel::Geometric { c, ratio, from } => (n > from).then(|| c * libm::pow(ratio, n as f64)),
        }
    }
}

/// One verified property with its numeric evidence.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckRecord {
    /// Short identifier of the property.
    pub name: &'static str,
    /// Pattern condition (1 to 4) the check belongs to, 0 for bookkeeping.
    pub condition: u8,
    pub stage: Option<usize>,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    pub detail: String,
}

/// Verdicts for every requirement of a stage list.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternCertificate {
    pub checks: Vec<CheckRecord>,
    pub lambda_partial_sums: Vec<f64>,
    /// Partial sum plus the declared tail bound, if a tail is declared.
    pub lambda_hat: Option<f64>,
    pub rho: Vec<f64>,
}

impl PatternCertificate {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn failed_conditions(&self) -> Vec<u8> {
        let mut v: Vec<u8> = self.failures().map(|c| c.condition).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Parameters of [`validate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidateOptions {
    pub build: BuildOptions,
    /// Required bound on `|Jₙ|/|Jₙ₋₁|`.
    pub shrink_limit: f64,
    pub tail: TailModel,
    /// Largest period whose factorisation is also checked by full expansion.
    pub expansion_cap: u64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            build: BuildOptions::default(),
            shrink_limit: 0.5,
            tail: TailModel::Undeclared,
            expansion_cap: 1_000_000,
        }
    }
}

struct Checks(Vec<CheckRecord>);

impl Checks {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        name: &'static str,
        condition: u8,
        stage: Option<usize>,
        passed: bool,
        value: f64,
        bound: f64,
        detail: String,
    ) {
        self.0.push(CheckRecord { name, condition, stage, passed, value, bound, detail });
    }
}

/// Re-check every requirement on a stage list built from level 0.
pub fn validate(fam: &MapFamily, stages: &[Stage], opts: &ValidateOptions) -> PatternCertificate {
    let mut checks = Checks(Vec::new());
    let tol = opts.build.tol;
    let log_target = libm::log(opts.build.c_target);

    if stages.is_empty() {
        checks.push("nonempty", 0, None, false, 0.0, 1.0, "no stages".into());
    }
    for (i, s) in stages.iter().enumerate() {
        let n = Some(s.n);
        checks.push("level_index", 0, n, s.n == i, s.n as f64, i as f64, String::new());

        // fixed point and contraction
        let g_q = fam.eval_word(&s.xi, s.q);
        let residual = g_q.map(|y| y.distance(s.q)).unwrap_or(f64::INFINITY);
        checks.push("fixed_point", 3, n, residual < tol && s.j.contains(s.q), residual, tol, String::new());
        let log_sup = fam.sup_log_derivative_on(&s.xi, &s.j, opts.build.grid).unwrap_or(f64::INFINITY);
        checks.push(
            "contraction",
            3,
            n,
            log_sup < 0.0 && log_sup <= log_target,
            log_sup,
            log_target,
            "log of grid sup |g'| on J".into(),
        );
        checks.push(
            "recorded_contraction",
            3,
            n,
            (log_sup - s.log_c).abs() <= 1e-9 * (1.0 + log_sup.abs()),
            s.log_c,
            log_sup,
            "recorded log c against recomputation".into(),
        );
        match (!s.j.is_full()).then(|| fam.arc_image(&s.xi, &s.j)) {
            Some(Ok(img)) => {
                checks.push(
                    "invariance",
                    3,
                    n,
                    s.j.contains_arc(&img),
                    img.length(),
                    s.j.length(),
                    "g(J) inside J".into(),
                );
                // endpoint rounding leaves images of a few ulps even when c|J| is far smaller
                let allowed = libm::exp(s.log_c) * s.j.length() * (1.0 + 1e-9) + 64.0 * f64::EPSILON;
                checks.push(
                    "image_length",
                    3,
                    n,
                    img.length() <= allowed,
                    img.length(),
                    allowed,
                    "|g(J)| against c|J| plus rounding".into(),
                );
            }
            _ => checks.push("invariance", 3, n, false, 1.0, s.j.length(), "J is the full circle".into()),
        }
        if s.n >= 1 {
            let pow2 = if s.n >= 64 { u64::MAX } else { 1u64 << s.n };
            checks.push("period_exceeds_power_of_two", 0, n, s.pi > pow2, s.pi as f64, pow2 as f64, String::new());
        }
        checks.push("period_is_word_length", 0, n, s.xi.len() == s.pi, s.xi.len() as f64, s.pi as f64, String::new());

        if i == 0 {
            let omega0: Vec<Symbol> = s.xi.symbols().collect();
            let disjoint = prefix_images(fam, &omega0, &s.j).map(|v| first_overlap(&v).is_none()).unwrap_or(false);
            checks.push("initial_disjointness", 2, n, disjoint, s.pi as f64, 0.0, "prefix images of J0".into());
            if s.k.is_some() || s.alpha.is_some() {
                checks.push("level0_shape", 0, n, false, 0.0, 0.0, "level 0 carries no k or alpha".into());
            }
            continue;
        }

        let prev = &stages[i - 1];
        checks.push(
            "nesting",
            1,
            n,
            prev.j.contains_arc(&s.j),
            s.j.length(),
            prev.j.length(),
            "J_n inside J_{n-1}".into(),
        );
        let shrink = s.j.length() / prev.j.length();
        checks.push(
            "shrinking",
            1,
            n,
            s.j.length() > 0.0 && shrink <= opts.shrink_limit && shrink < 1.0,
            shrink,
            opts.shrink_limit,
            "|J_n|/|J_{n-1}|".into(),
        );
        checks.push("fixed_point_in_previous", 3, n, prev.j.contains(s.q), s.q.value(), 0.0, "q_n in J_{n-1}".into());

        let (k, alpha) = match (s.k, s.alpha.as_ref()) {
            (Some(k), Some(a)) => (k, a),
            _ => {
                checks.push("stage_parameters", 3, n, false, 0.0, 0.0, "missing k or alpha".into());
                continue;
            }
        };
        checks.push("repetition_count", 3, n, k >= 2, k as f64, 2.0, String::new());
        checks.push("noise_length", 3, n, !alpha.is_empty(), alpha.len() as f64, 1.0, String::new());
        let recursion_ok = k.checked_mul(prev.pi).and_then(|p| p.checked_add(alpha.len() as u64)) == Some(s.pi);
        checks.push(
            "period_recursion",
            3,
            n,
            recursion_ok,
            s.pi as f64,
            (k * prev.pi) as f64 + alpha.len() as f64,
            String::new(),
        );
        let streamed = s.xi.symbols().eq((0..k).flat_map(|_| prev.xi.symbols()).chain(alpha.iter().copied()));
        let expanded = if s.pi <= opts.expansion_cap {
            match (s.xi.expand(opts.expansion_cap), prev.xi.expand(opts.expansion_cap)) {
                (Ok(full), Ok(p)) => {
                    let pl = p.len();
                    full.len() as u64 == s.pi
                        && (0..k as usize).all(|b| full[b * pl..(b + 1) * pl] == p[..])
                        && full[k as usize * pl..] == alpha[..]
                }
                _ => false,
            }
        } else {
            true
        };
        checks.push(
            "factorization",
            3,
            n,
            streamed && expanded,
            s.pi as f64,
            opts.expansion_cap as f64,
            if s.pi <= opts.expansion_cap { "expanded".into() } else { "streamed".into() },
        );

        let lambda = alpha.len() as f64 / (k as f64 * prev.pi as f64);
        let rec_lambda = s.lambda.unwrap_or(f64::NAN);
        checks.push(
            "lambda_value",
            4,
            n,
            (rec_lambda - lambda).abs() <= 1e-15 * lambda,
            rec_lambda,
            lambda,
            String::new(),
        );
        let prev_rho = prev.rho.unwrap_or(1.0);
        let rho = prev_rho / (1.0 + lambda);
        let rec_rho = s.rho.unwrap_or(f64::NAN);
        checks.push("rho_recursion", 0, n, (rec_rho - rho).abs() <= 1e-12 * rho, rec_rho, rho, String::new());
        let exact_ok = s
            .rho_exact
            .is_some_and(|e| e.den == s.pi && prev.rho_exact.map_or(prev.pi, |p| p.num).checked_mul(k) == Some(e.num));
        checks.push("rho_exact", 0, n, exact_ok, s.rho_exact.map_or(f64::NAN, ExactRatio::value), rho, String::new());
        if let Some(bound) = opts.tail.bound_at(s.n) {
            checks.push(
                "tail_model_prefix",
                4,
                n,
                lambda <= bound * (1.0 + 1e-12),
                lambda,
                bound,
                "declared tail bound".into(),
            );
        }
    }

    let mut sums = Vec::new();
    let mut sum = 0.0;
    let mut rho = Vec::new();
    let mut prod = 1.0f64;
    for s in stages.iter().skip(1) {
        let l = s.lambda.unwrap_or(0.0);
        sum += l;
        sums.push(sum);
        prod /= 1.0 + l;
        let r = s.rho.unwrap_or(f64::NAN);
        rho.push(r);
        checks.push("rho_product", 0, Some(s.n), (r - prod).abs() <= 1e-12 * prod, r, prod, String::new());
        checks.push(
            "rho_exponential_bound",
            0,
            Some(s.n),
            r > libm::exp(-sum),
            r,
            libm::exp(-sum),
            "rho_n against exp(-partial sum)".into(),
        );
    }
    for w in rho.windows(2) {
        if !(w[1] < w[0]) {
            checks.push("rho_decreasing", 0, None, false, w[1], w[0], String::new());
        }
    }
    let last = stages.last().map_or(0, |s| s.n);
    let tail = opts.tail.tail_sum(last);
    let lambda_hat = tail.map(|t| sum + t);
    checks.push(
        "summability",
        4,
        None,
        lambda_hat.is_some_and(f64::is_finite),
        sum,
        lambda_hat.unwrap_or(f64::INFINITY),
        match opts.tail {
            TailModel::Undeclared => "no tail model declared".into(),
            TailModel::Geometric { c, ratio, from } => format!("lambda_n <= {c}*{ratio}^n for n > {from}"),
        },
    );
    if let (Some(lh), Some(&r)) = (lambda_hat, rho.last()) {
        checks.push(
            "rho_limit_bound",
            4,
            None,
            r >= libm::exp(-lh),
            r,
            libm::exp(-lh),
            "rho_n against exp(-lambda_hat)".into(),
        );
    }
    PatternCertificate { checks: checks.0, lambda_partial_sums: sums, lambda_hat, rho }
}

/// Informational side quantities of a stage list.
#[derive(Clone, Debug, PartialEq)]
pub struct SideRow {
    pub n: usize,
    /// Fiber Lyapunov exponent of the stage orbit.
    pub exponent: f64,
    /// Whether `χₙ₋₁/2 ≤ χₙ < 0` holds; `None` at level 0.
    pub halving: Option<bool>,
    /// `log₁₀((max_j sup|f_j′|)^{πₙ}·|Jₙ|)`.
    pub log10_gamma: f64,
    /// `λₙ/λₙ₋₁`, when both exist.
    pub lambda_ratio: Option<f64>,
}

/// Side report: Lyapunov exponents, their halving relation and the size of
/// `(max_j sup|f_j′|)^{πₙ}|Jₙ|`.
#[derive(Clone, Debug, PartialEq)]
pub struct SideReport {
    pub rows: Vec<SideRow>,
    /// True when the `γ` column is strictly decreasing, the only finite
    /// evidence of summability available.
    pub gamma_decreasing: bool,
}

pub fn lyapunov_side_checks(fam: &MapFamily, stages: &[Stage]) -> Result<SideReport> {
    let log10_max = libm::log10(fam.max_sup_derivative());
    let mut rows: Vec<SideRow> = Vec::with_capacity(stages.len());
    for s in stages {
        let exponent = fam.log_word_derivative(&s.xi, s.q)? / s.pi as f64;
        let prev = rows.last();
        let halving = prev.map(|p| p.exponent / 2.0 <= exponent && exponent < 0.0);
        let lambda_ratio =
            match (prev.and(s.lambda), s.n.checked_sub(1).and_then(|i| stages.get(i)).and_then(|p| p.lambda)) {
                (Some(l), Some(pl)) => Some(l / pl),
                _ => None,
            };
        rows.push(SideRow {
            n: s.n,
            exponent,
            halving,
            log10_gamma: s.pi as f64 * log10_max + libm::log10(s.j.length()),
            lambda_ratio,
        });
    }
    let gamma_decreasing = rows.windows(2).all(|w| w[1].log10_gamma < w[0].log10_gamma);
    Ok(SideReport { rows, gamma_decreasing })
}

/// Schedule entry: `kₙ` plus a fixed or searched noise word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Noise {
    Word(Vec<Symbol>),
    Search { r: usize, strategy: SearchStrategy },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub k: u64,
    pub noise: Noise,
}

/// Build stages 0..=schedule.len() in sequence.
pub fn build_stages(
    fam: &MapFamily,
    omega0: &[Symbol],
    j0: Arc,
    schedule: &[ScheduleEntry],
    opts: &BuildOptions,
) -> Result<Vec<Stage>> {
    let mut stages = Vec::with_capacity(schedule.len() + 1);
    stages.push(init_stage0(fam, omega0, j0, opts)?);
    for e in schedule {
        let prev = stages.last().expect("stage 0 present");
        let next = match &e.noise {
            Noise::Word(alpha) => build_next_stage(fam, prev, e.k, alpha, opts)?,
            Noise::Search { r, strategy } => search_noise_word(fam, prev, e.k, *r, *strategy, opts)?.1,
        };
        stages.push(next);
    }
    Ok(stages)
}

/// `ω⁰ = "2"`, `J₀` the arc of length 0.2 centred at 0.
pub fn reference_start() -> (Vec<Symbol>, Arc) {
    let omega0 = alloc::vec![Symbol::new(2).expect("2 is a symbol")];
    let j0 = Arc::centered(CirclePoint::new(0.0), 0.2).expect("valid arc");
    (omega0, j0)
}

/// `kₙ = 2`, `Rₙ = 1`, exhaustive noise search, for `n = 1..=count`.
pub fn reference_schedule(count: usize) -> Vec<ScheduleEntry> {
    (0..count)
        .map(|_| ScheduleEntry { k: 2, noise: Noise::Search { r: 1, strategy: SearchStrategy::Exhaustive } })
        .collect()
}

/// `λₙ ≤ 2⁻ⁿ`, which the reference schedule satisfies from the start.
pub const REFERENCE_TAIL: TailModel = TailModel::Geometric { c: 1.0, ratio: 0.5, from: 0 };

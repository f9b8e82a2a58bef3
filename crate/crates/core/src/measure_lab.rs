//! Finite-stage diagnostics of the limit measure: orbit samples, strip sets,
//! occupancy counts, Lyapunov exponents, fiber spanning sets and
//! conditional histograms.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::circle_maps::{Arc, CirclePoint, MapFamily};
use crate::error::{Error, Result};
use crate::pattern::Stage;
use crate::symbolic::{PeriodicPoint, Symbol};

/// Default cap on orbit lengths.
pub const SAMPLE_CAP: u64 = 10_000_000;

/// Uniform measure on the periodic orbit of one stage.
#[derive(Clone, Debug)]
pub struct OrbitMeasure {
    pub stage: usize,
    pub base: PeriodicPoint,
    /// `points[ℓ − 1] = f_{ω_ℓ} ∘ ⋯ ∘ f_{ω_1}(q)` for `ℓ = 1..=π`, paired with
    /// base phase `ℓ mod π`.
    pub points: Vec<CirclePoint>,
}

impl OrbitMeasure {
    pub fn period(&self) -> u64 {
        self.points.len() as u64
    }

    /// Fiber point at phase `ℓ mod π`.
    pub fn point_at_phase(&self, l: u64) -> CirclePoint {
        let p = self.period();
        self.points[((l + p - 1) % p) as usize]
    }
}

pub fn orbit_fiber_points(fam: &MapFamily, stage: &Stage, cap: u64) -> Result<OrbitMeasure> {
    if stage.pi > cap {
        return Err(Error::CapExceeded { requested: stage.pi, cap });
    }
    let mut points = Vec::with_capacity(stage.pi as usize);
    let mut x = stage.q;
    for s in stage.xi.symbols() {
        x = fam.eval_symbol(s, x)?;
        points.push(x);
    }
    Ok(OrbitMeasure { stage: stage.n, base: PeriodicPoint::new(stage.xi.clone())?, points })
}

/// `(1/π) Σ_ℓ log f′_{ω_ℓ}(x_{ℓ−1})` along the orbit.
pub fn lyapunov_exponent(fam: &MapFamily, orbit: &OrbitMeasure) -> Result<f64> {
    let p = orbit.period();
    let mut sum = 0.0;
    let mut prev = orbit.point_at_phase(0);
    for (s, &x) in orbit.base.word().symbols().zip(&orbit.points) {
        sum += libm::log(fam.map(s)?.derivative(prev.value()));
        prev = x;
    }
    Ok(sum / p as f64)
}

/// How overlaps between generated strip arcs are treated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OverlapPolicy {
    /// Any overlap is a failure.
    Strict,
    /// Overlaps between arcs both shorter than `eta` are merged and counted;
    /// such arcs are below what double precision can separate.
    Resolution { eta: f64 },
    /// Merge every overlap.
    Union,
}

/// Default resolution threshold for collapsed strip arcs.
pub const RESOLUTION_ETA: f64 = 1e-9;
/// Outward padding per symbol when pushing arcs through word maps.
pub const ENCLOSURE_PAD: f64 = 4e-15;

impl Default for OverlapPolicy {
    fn default() -> Self {
        OverlapPolicy::Resolution { eta: RESOLUTION_ETA }
    }
}

/// Strip sets `Iₙ(J′)` and `Aₙ(J′)` at one level.
#[derive(Clone, Debug)]
pub struct StripFamily {
    pub level: usize,
    pub theta: f64,
    pub j_prime: Arc,
    /// Number of generated arcs of `Iₙ` (`∏(kᵢ+1)`).
    pub i_count: usize,
    /// Number of generated arcs of `Aₙ` (`π₀` times `i_count`).
    pub a_count: usize,
    /// Disjoint components of `Aₙ`, sorted by anchor.
    pub components: Vec<Arc>,
    /// Overlaps merged under the resolution policy.
    pub resolved_overlaps: usize,
    pub total_length: f64,
}

impl StripFamily {
    /// Closed-arc membership by binary search over the sorted components.
    pub fn contains(&self, x: CirclePoint) -> bool {
        let c = &self.components;
        if c.is_empty() {
            return false;
        }
        let idx = c.partition_point(|a| a.anchor().value() <= x.value());
        let cand = if idx == 0 { c.len() - 1 } else { idx - 1 };
        c[cand].contains(x) || c[c.len() - 1].contains(x)
    }

    /// Whether `arc` lies in one component, allowing `slack` on each side.
    pub fn contains_arc(&self, arc: &Arc, slack: f64) -> bool {
        let c = &self.components;
        if c.is_empty() {
            return false;
        }
        let x = arc.anchor().shifted(slack);
        let idx = c.partition_point(|a| a.anchor().value() <= x.value());
        let cand = if idx == 0 { c.len() - 1 } else { idx - 1 };
        [cand, c.len() - 1, 0].iter().any(|&i| c[i].padded(slack).contains_arc(arc))
    }

    /// Smallest distance from `x` to an endpoint of a component longer
    /// than `min_len`.
    pub fn endpoint_clearance(&self, x: CirclePoint, min_len: f64) -> f64 {
        self.components
            .iter()
            .filter(|a| a.length() > min_len)
            .map(|a| a.anchor().distance(x).min(a.end().distance(x)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `J′`: centred at `qₙ`, of length `max(2h(1+θ), θ|Jₙ|)` where `h` is the
/// covering radius of `Jₙ₊₁` about `qₙ`, clipped to the room inside `Jₙ`.
pub fn core_arc(stage: &Stage, next: &Stage, theta: f64) -> Result<Arc> {
    let h = next.j.covering_radius_about(stage.q);
    let want = (2.0 * h * (1.0 + theta)).max(theta * stage.j.length());
    let room = stage.j.largest_centered_within(stage.q).ok_or(Error::InvalidInput("q_n lies outside J_n"))?;
    let j_prime = Arc::centered(stage.q, want.min(room.length()))?;
    if !j_prime.contains_arc(&next.j) {
        return Err(Error::InvalidInput("no core arc centred at q_n contains J_{n+1} inside J_n"));
    }
    Ok(j_prime)
}

/// Build `Aₙ(J′)`: images of `J′` under `g₀^{ℓ₁} ∘ ⋯ ∘ gₙ₋₁^{ℓₙ}` with
/// `0 ≤ ℓᵢ ≤ kᵢ`, then their images under the proper prefixes of `ω⁰`.
///
/// Needs stages `0..=n+1`; stage `n+1` fixes how large `J′` must be.
pub fn build_strips(
    fam: &MapFamily,
    stages: &[Stage],
    n: usize,
    theta: f64,
    policy: OverlapPolicy,
) -> Result<StripFamily> {
    if stages.len() < n + 2 {
        return Err(Error::InvalidInput("strip sets at level n need stages up to n + 1"));
    }
    let j_prime = core_arc(&stages[n], &stages[n + 1], theta)?;
    let mut arcs = vec![j_prime];
    for i in (0..n).rev() {
        let k = stages[i + 1].k.ok_or(Error::InvalidInput("stage without repetition count"))?;
        let g = &stages[i].xi;
        let mut next = Vec::with_capacity(arcs.len() * (k as usize + 1));
        for a in &arcs {
            let mut img = *a;
            next.push(img);
            for _ in 0..k {
                img = fam.arc_enclosure(g, &img, ENCLOSURE_PAD)?;
                next.push(img);
            }
        }
        arcs = next;
    }
    let i_count = arcs.len();
    let omega0: Vec<Symbol> = stages[0].xi.symbols().collect();
    let mut all = arcs.clone();
    let mut layer = arcs;
    for s in omega0.iter().take(omega0.len().saturating_sub(1)) {
        layer = layer
            .iter()
            .map(|a| fam.arc_enclosure(core::slice::from_ref(s), a, ENCLOSURE_PAD))
            .collect::<Result<_>>()?;
        all.extend_from_slice(&layer);
    }
    let a_count = all.len();
    let (components, resolved_overlaps) = merge_arcs(all, policy).ok_or(Error::DisjointnessFailure { level: n })?;
    let total_length = components.iter().map(Arc::length).sum();
    Ok(StripFamily { level: n, theta, j_prime, i_count, a_count, components, resolved_overlaps, total_length })
}

/// Sort and merge overlapping arcs according to the policy; `None` when the
/// policy forbids an overlap that occurs.
fn merge_arcs(mut arcs: Vec<Arc>, policy: OverlapPolicy) -> Option<(Vec<Arc>, usize)> {
    if arcs.iter().any(Arc::is_full) {
        return match policy {
            OverlapPolicy::Union => Some((vec![Arc::full()], arcs.len().saturating_sub(1))),
            _ if arcs.len() == 1 => Some((arcs, 0)),
            _ => None,
        };
    }
    arcs.sort_by(|a, b| a.anchor().value().total_cmp(&b.anchor().value()));
    let allowed = |cluster_max: f64, a: &Arc| match policy {
        OverlapPolicy::Strict => false,
        OverlapPolicy::Resolution { eta } => cluster_max < eta && a.length() < eta,
        OverlapPolicy::Union => true,
    };
    // components as lifted [lo, hi] with the longest member length
    let mut comps: Vec<(f64, f64, f64)> = Vec::with_capacity(arcs.len());
    let mut merged = 0;
    for a in &arcs {
        let lo = a.anchor().value();
        let hi = lo + a.length();
        match comps.last_mut() {
            Some(c) if lo <= c.1 => {
                if !allowed(c.2, a) {
                    return None;
                }
                merged += 1;
                c.1 = c.1.max(hi);
                c.2 = c.2.max(a.length());
            }
            _ => comps.push((lo, hi, a.length())),
        }
    }
    // the last component may wrap onto the first
    while comps.len() > 1 {
        let last = comps[comps.len() - 1];
        let first = comps[0];
        if last.1 < first.0 + 1.0 {
            break;
        }
        if !(allowed(last.2, &Arc::new(first.0, first.1 - first.0).ok()?)
            && allowed(first.2, &Arc::new(last.0, last.1 - last.0).ok()?))
        {
            return None;
        }
        merged += 1;
        comps.pop();
        comps[0] = (last.0 - 1.0, first.1.max(last.1 - 1.0), first.2.max(last.2));
    }
    let mut out: Vec<Arc> = comps
        .into_iter()
        .map(|(lo, hi, _)| if hi - lo >= 1.0 { Arc::full() } else { Arc::new(lo, hi - lo).expect("proper arc") })
        .collect();
    out.sort_by(|a, b| a.anchor().value().total_cmp(&b.anchor().value()));
    Some((out, merged))
}

/// Rebuild the strips with `θ` nudged deterministically until no orbit point
/// sits within `clearance` of an endpoint of a resolved component.
pub fn build_strips_clear(
    fam: &MapFamily,
    stages: &[Stage],
    n: usize,
    theta: f64,
    policy: OverlapPolicy,
    points: &[CirclePoint],
    clearance: f64,
) -> Result<StripFamily> {
    let min_len = match policy {
        OverlapPolicy::Resolution { eta } => eta,
        _ => 0.0,
    };
    let mut last = None;
    for t in 0..16 {
        let th = theta * (1.0 + 0.01 * t as f64);
        let strips = build_strips(fam, stages, n, th, policy)?;
        if points.iter().all(|&x| strips.endpoint_clearance(x, min_len) > clearance) {
            return Ok(strips);
        }
        last = Some(strips);
    }
    last.ok_or(Error::InvalidInput("no strip family built"))
}

/// Whether every component of `inner` lies in some component of `outer`.
pub fn strips_nested(inner: &StripFamily, outer: &StripFamily, slack: f64) -> bool {
    inner.components.iter().all(|a| outer.contains_arc(a, slack))
}

/// Exact occupancy count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Occupancy {
    pub count: u64,
    pub total: u64,
    pub proportion: f64,
}

pub fn occupancy(orbit: &OrbitMeasure, strips: &StripFamily) -> Occupancy {
    let count = orbit.points.iter().filter(|&&x| strips.contains(x)).count() as u64;
    let total = orbit.period();
    Occupancy { count, total, proportion: count as f64 / total as f64 }
}

/// One row of the strip-length table.
#[derive(Clone, Debug, PartialEq)]
pub struct TrendRow {
    pub n: usize,
    pub length: f64,
    pub components: usize,
    /// Occupancy of `Aₙ` under each stage orbit `m ≥ n`, as `(m, occupancy)`.
    pub occupancies: Vec<(usize, Occupancy)>,
    /// Smallest proportion over `m ∈ (n, n_max]`, `None` for `n = n_max`.
    pub inf_later: Option<f64>,
}

/// Strip lengths and occupancies for `n = 1..=n_max`, with the orbits of
/// stages `1..=n_max`.
pub fn strip_length_trend(strips: &[StripFamily], orbits: &[OrbitMeasure]) -> Vec<TrendRow> {
    strips
        .iter()
        .map(|s| {
            let occupancies: Vec<(usize, Occupancy)> =
                orbits.iter().filter(|o| o.stage >= s.level).map(|o| (o.stage, occupancy(o, s))).collect();
            let inf_later = occupancies
                .iter()
                .filter(|(m, _)| *m > s.level)
                .map(|(_, o)| o.proportion)
                .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.min(p))));
            TrendRow { n: s.level, length: s.total_length, components: s.components.len(), occupancies, inf_later }
        })
        .collect()
}

/// Size of a constructed `(n, ε)`-spanning set of the fiber dynamics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spanning {
    pub n: u64,
    pub eps: f64,
    pub count: u64,
    /// `n·(⌊1/ε⌋ + 1)`.
    pub bound: u64,
    pub test_points: u64,
    /// Largest shadowing distance over the test grid.
    pub worst_distance: f64,
}

/// Spanning set for the fiber maps `f_{ξ₀}, f_{ξ₁}, …` over `n` steps.
///
/// Start with `⌊1/ε⌋ + 1` equally spaced points. Whenever a gap between
/// consecutive images exceeds `ε`, split it evenly and pull the new points
/// back to the initial fiber. Orientation is preserved, so consecutive
/// points stay consecutive and every orbit is trapped between two neighbours
/// whose gap stays at most `ε`. Each step adds at most `⌊1/ε⌋` points.
pub fn fiber_spanning_count(fam: &MapFamily, xi: &PeriodicPoint, n: u64, eps: f64) -> Result<Spanning> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidInput("eps must lie in (0, 0.5)"));
    }
    if n == 0 {
        return Err(Error::InvalidInput("horizon must be at least 1"));
    }
    let per = libm::floor(1.0 / eps) as u64;
    let maps: Vec<_> = (0..n).map(|t| fam.map(xi.coordinate(0, t as i64)).copied()).collect::<Result<_>>()?;
    let m0 = per + 1;
    // initial positions and current lifted positions, kept in cyclic order
    let mut start: Vec<f64> = (0..m0).map(|i| i as f64 / m0 as f64).collect();
    let mut cur = start.clone();
    for t in 1..n as usize {
        let f = &maps[t - 1];
        for x in cur.iter_mut() {
            *x = f.lift(*x);
        }
        let len = cur.len();
        let mut new_start = Vec::with_capacity(len);
        let mut new_cur = Vec::with_capacity(len);
        for i in 0..len {
            new_start.push(start[i]);
            new_cur.push(cur[i]);
            let (a, b) = if i + 1 < len { (cur[i], cur[i + 1]) } else { (cur[i], cur[0] + 1.0) };
            let g = b - a;
            if g > eps {
                let pieces = libm::ceil(g / eps) as u64;
                for p in 1..pieces {
                    let y = a + g * p as f64 / pieces as f64;
                    let mut x = y;
                    for f in maps[..t].iter().rev() {
                        x = f.inverse_lift(x);
                    }
                    // keep initial lifts increasing within one turn
                    let base = start[i];
                    x = base + crate::circle_maps::reduce(x - base);
                    new_start.push(x);
                    new_cur.push(y);
                }
            }
        }
        start = new_start;
        cur = new_cur;
    }
    let count = start.len() as u64;
    let bound = n * (per + 1);

    // verification on a grid of test points, re-simulating everything
    let test_points = 10 * libm::ceil(1.0 / eps) as u64;
    let s0 = start[0];
    let mut worst: f64 = 0.0;
    for i in 0..test_points {
        let x0 = s0 + (i as f64 + 0.5) / test_points as f64;
        let idx = start.partition_point(|&s| s <= x0);
        let left = if idx == 0 { start[start.len() - 1] - 1.0 } else { start[idx - 1] };
        let right = if idx < start.len() { start[idx] } else { start[0] + 1.0 };
        let (mut x, mut l, mut r) = (x0, left, right);
        let (mut dl, mut dr): (f64, f64) = (0.0, 0.0);
        for t in 0..n as usize {
            if t > 0 {
                let f = &maps[t - 1];
                x = f.lift(x);
                l = f.lift(l);
                r = f.lift(r);
            }
            dl = dl.max(CirclePoint::new(x).distance(CirclePoint::new(l)));
            dr = dr.max(CirclePoint::new(x).distance(CirclePoint::new(r)));
        }
        let d = dl.min(dr);
        worst = worst.max(d);
        if d > eps * (1.0 + 1e-9) {
            return Err(Error::SpanningVerificationFailure { test_point: crate::circle_maps::reduce(x0), distance: d });
        }
    }
    Ok(Spanning { n, eps, count, bound, test_points, worst_distance: worst })
}

/// Conditional fiber histogram over one base cylinder.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderHistogram {
    /// Base symbols at coordinates `−w..=w`.
    pub cylinder: Vec<Symbol>,
    pub samples: u64,
    /// Orbit frequency of the cylinder.
    pub weight: f64,
    pub masses: Vec<f64>,
    pub heaviest: f64,
}

/// Conditional histograms of an orbit measure along base cylinders.
#[derive(Clone, Debug, PartialEq)]
pub struct DisintegrationReport {
    pub stage: usize,
    pub window: u32,
    pub bins: usize,
    pub cylinders: Vec<CylinderHistogram>,
    /// Cylinder-weighted mean of the heaviest-bin masses.
    pub atomicity: f64,
    /// Largest deviation of a conditional histogram's total from 1.
    pub max_mass_error: f64,
    /// `|Σ weight·Σ masses − 1|`.
    pub total_mass_error: f64,
}

pub fn disintegration_histogram(orbit: &OrbitMeasure, window: u32, bins: usize) -> Result<DisintegrationReport> {
    let samples: Vec<(Vec<Symbol>, f64)> = (1..=orbit.period())
        .map(|l| {
            let w = window as i64;
            ((-w..=w).map(|o| orbit.base.coordinate(l, o)).collect(), orbit.point_at_phase(l).value())
        })
        .collect();
    histogram_of(orbit.stage, &samples, window, bins)
}

/// Histograms for arbitrary `(cylinder, fiber value)` samples.
pub fn histogram_of(
    stage: usize,
    samples: &[(Vec<Symbol>, f64)],
    window: u32,
    bins: usize,
) -> Result<DisintegrationReport> {
    if bins == 0 {
        return Err(Error::InvalidInput("at least one fiber bin is needed"));
    }
    if samples.is_empty() {
        return Err(Error::InvalidInput("no samples"));
    }
    let mut groups: BTreeMap<&[Symbol], Vec<u64>> = BTreeMap::new();
    for (cyl, x) in samples {
        let b = ((x * bins as f64) as usize).min(bins - 1);
        groups.entry(cyl.as_slice()).or_insert_with(|| vec![0; bins])[b] += 1;
    }
    let total = samples.len() as f64;
    let mut cylinders = Vec::with_capacity(groups.len());
    let (mut atomicity, mut max_err, mut mass) = (0.0, 0.0f64, 0.0);
    for (cyl, counts) in groups {
        let n: u64 = counts.iter().sum();
        let masses: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        let heaviest = masses.iter().copied().fold(0.0, f64::max);
        let weight = n as f64 / total;
        let sum: f64 = masses.iter().sum();
        max_err = max_err.max((sum - 1.0).abs());
        atomicity += weight * heaviest;
        mass += weight * sum;
        cylinders.push(CylinderHistogram { cylinder: cyl.to_vec(), samples: n, weight, masses, heaviest });
    }
    Ok(DisintegrationReport {
        stage,
        window,
        bins,
        cylinders,
        atomicity,
        max_mass_error: max_err,
        total_mass_error: (mass - 1.0).abs(),
    })
}

/// Largest difference of integrals of the test functions
/// `1[ξ₀ = s]·cos(2πjx)` and `1[ξ₀ = s]·sin(2πjx)`, `j = 0..=harmonics`,
/// between two orbit measures.
pub fn weak_star_gap(a: &OrbitMeasure, b: &OrbitMeasure, alphabet: u8, harmonics: u32) -> f64 {
    let integrals = |o: &OrbitMeasure| -> Vec<f64> {
        let mut acc = vec![0.0; alphabet as usize * (harmonics as usize + 1) * 2];
        for l in 1..=o.period() {
            let s = o.base.coordinate(l, 0).index();
            let x = o.point_at_phase(l).value();
            for j in 0..=harmonics as usize {
                let base = (s * (harmonics as usize + 1) + j) * 2;
                acc[base] += libm::cos(TAU * j as f64 * x);
                acc[base + 1] += libm::sin(TAU * j as f64 * x);
            }
        }
        let p = o.period() as f64;
        acc.iter().map(|v| v / p).collect()
    };
    let (ia, ib) = (integrals(a), integrals(b));
    ia.iter().zip(&ib).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

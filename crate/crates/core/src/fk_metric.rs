//! Feldman–Katok machinery for periodic points of the shift.
//!
//! An `(n, δ)`-match pairs the first `n` terms of two orbits by an
//! order-preserving partial bijection whose pairs are `δ`-close; the largest
//! such pairing is a longest common subsequence under the closeness relation.
//! Closeness at scale `δ ∈ (2^{-(m+1)}, 2^{-m}]` is agreement on the window
//! `|ℓ| ≤ m`, so every quantity here is indexed by an integer window.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::pattern::Stage;
use crate::symbolic::{shift_distance, window_agree, PeriodicPoint, Symbol, DEFAULT_DISTANCE_CUTOFF};

/// Default largest horizon handled by the alignment kernels.
pub const DP_CAP: u64 = 20_000;
/// Largest horizon for which the alignment itself is reconstructed.
pub const ALIGNMENT_CAP: u64 = 2048;
/// Largest horizon accepted by [`brute_force_fit`].
pub const BRUTE_FORCE_CAP: u64 = 10;

/// Two orbits, a horizon and a window.
#[derive(Clone, Copy, Debug)]
pub struct MatchProblem<'a> {
    pub u: &'a PeriodicPoint,
    pub v: &'a PeriodicPoint,
    pub horizon: u64,
    pub window: u32,
}

/// Size of a maximal match, with one optimal alignment when requested.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchResult {
    pub fit: u64,
    pub alignment: Option<Vec<(u64, u64)>>,
}

/// Window words of both orbits interned into shared integer ids, so that
/// closeness becomes id equality.
struct WindowIds {
    u: Vec<u32>,
    v: Vec<u32>,
    distinct: usize,
}

fn window_ids(p: &MatchProblem<'_>) -> WindowIds {
    let mut table: BTreeMap<Vec<Symbol>, u32> = BTreeMap::new();
    let m = p.window as i64;
    let mut ids_for = |w: &PeriodicPoint| -> Vec<u32> {
        let span = w.period().min(p.horizon);
        (0..span)
            .map(|i| {
                let word: Vec<Symbol> = (-m..=m).map(|l| w.coordinate(i, l)).collect();
                let next = table.len() as u32;
                *table.entry(word).or_insert(next)
            })
            .collect()
    };
    let u = ids_for(p.u);
    let v = ids_for(p.v);
    WindowIds { u, v, distinct: table.len() }
}

impl WindowIds {
    fn u_at(&self, i: u64) -> u32 {
        self.u[(i % self.u.len() as u64) as usize]
    }

    fn v_at(&self, j: u64) -> u32 {
        self.v[(j % self.v.len() as u64) as usize]
    }
}

fn check_problem(p: &MatchProblem<'_>, cap: u64) -> Result<()> {
    if p.horizon == 0 {
        return Err(Error::InvalidInput("horizon must be at least 1"));
    }
    if p.horizon > cap {
        return Err(Error::HorizonTooLarge { horizon: p.horizon, cap });
    }
    Ok(())
}

/// Largest fit size of an `(n, δ)`-match, by the bit-parallel longest common
/// subsequence recurrence (`O(n²/64)` word operations).
pub fn max_fit(p: &MatchProblem<'_>) -> Result<u64> {
    max_fit_capped(p, DP_CAP)
}

pub fn max_fit_capped(p: &MatchProblem<'_>, cap: u64) -> Result<u64> {
    check_problem(p, cap)?;
    let ids = window_ids(p);
    let n = p.horizon as usize;
    let words = n.div_ceil(64);
    // bit i of masks[id] is set when u's window at position i has that id
    let mut masks = vec![0u64; ids.distinct * words];
    for i in 0..n {
        let id = ids.u_at(i as u64) as usize;
        masks[id * words + i / 64] |= 1 << (i % 64);
    }
    let mut v_bits = vec![u64::MAX; words];
    let tail = n % 64;
    if tail != 0 {
        v_bits[words - 1] = (1u64 << tail) - 1;
    }
    let mut sum = vec![0u64; words];
    for j in 0..n {
        let id = ids.v_at(j as u64) as usize;
        let m = &masks[id * words..(id + 1) * words];
        // V ← (V + (V & M)) | (V & !M)
        let mut carry = 0u64;
        for w in 0..words {
            let x = v_bits[w];
            let (s1, c1) = x.overflowing_add(x & m[w]);
            let (s2, c2) = s1.overflowing_add(carry);
            carry = (c1 | c2) as u64;
            sum[w] = s2 | (x & !m[w]);
        }
        core::mem::swap(&mut v_bits, &mut sum);
        if tail != 0 {
            v_bits[words - 1] &= (1u64 << tail) - 1;
        }
    }
    let ones: u64 = v_bits.iter().map(|w| w.count_ones() as u64).sum();
    Ok(p.horizon - ones)
}

/// Fit size with one optimal alignment, from the full dynamic-programming
/// table. Limited to horizons up to [`ALIGNMENT_CAP`].
pub fn max_fit_with_alignment(p: &MatchProblem<'_>) -> Result<MatchResult> {
    check_problem(p, ALIGNMENT_CAP)?;
    let ids = window_ids(p);
    let n = p.horizon as usize;
    let w = n + 1;
    let mut t = vec![0u32; w * w];
    for i in 1..=n {
        let a = ids.u_at(i as u64 - 1);
        for j in 1..=n {
            let diag = t[(i - 1) * w + j - 1] + (a == ids.v_at(j as u64 - 1)) as u32;
            t[i * w + j] = t[(i - 1) * w + j].max(t[i * w + j - 1]).max(diag);
        }
    }
    let mut pairs = Vec::new();
    let (mut i, mut j) = (n, n);
    while i > 0 && j > 0 {
        let here = t[i * w + j];
        if here == t[(i - 1) * w + j] {
            i -= 1;
        } else if here == t[i * w + j - 1] {
            j -= 1;
        } else {
            pairs.push(((i - 1) as u64, (j - 1) as u64));
            i -= 1;
            j -= 1;
        }
    }
    pairs.reverse();
    Ok(MatchResult { fit: t[n * w + n] as u64, alignment: Some(pairs) })
}

/// Check that an alignment is order preserving and every pair is close.
pub fn certify_alignment(p: &MatchProblem<'_>, pairs: &[(u64, u64)]) -> Result<()> {
    for (idx, &(i, j)) in pairs.iter().enumerate() {
        if i >= p.horizon || j >= p.horizon {
            return Err(Error::CertificationFailure { position: i });
        }
        if idx > 0 {
            let (pi, pj) = pairs[idx - 1];
            if i <= pi || j <= pj {
                return Err(Error::CertificationFailure { position: i });
            }
        }
        if !window_agree(p.u, i, p.v, j, p.window) {
            return Err(Error::CertificationFailure { position: i });
        }
    }
    Ok(())
}

/// `1 − fit/n`.
pub fn gap(p: &MatchProblem<'_>) -> Result<f64> {
    Ok(1.0 - max_fit(p)? as f64 / p.horizon as f64)
}

/// Largest fit by enumerating every pair of equal-size index subsets.
pub fn brute_force_fit(p: &MatchProblem<'_>) -> Result<u64> {
    if p.horizon > BRUTE_FORCE_CAP {
        return Err(Error::HorizonTooLarge { horizon: p.horizon, cap: BRUTE_FORCE_CAP });
    }
    check_problem(p, BRUTE_FORCE_CAP)?;
    let n = p.horizon as u32;
    let mut close = [[false; BRUTE_FORCE_CAP as usize]; BRUTE_FORCE_CAP as usize];
    for i in 0..n {
        for j in 0..n {
            close[i as usize][j as usize] = window_agree(p.u, i as u64, p.v, j as u64, p.window);
        }
    }
    let mut best = 0;
    for a in 0u32..(1 << n) {
        let size = a.count_ones();
        if size <= best {
            continue;
        }
        for b in 0u32..(1 << n) {
            if b.count_ones() != size {
                continue;
            }
            // the only order-preserving bijection between two sets pairs them in order
            let (mut x, mut y) = (a, b);
            let mut ok = true;
            while x != 0 {
                let i = x.trailing_zeros() as usize;
                let j = y.trailing_zeros() as usize;
                if !close[i][j] {
                    ok = false;
                    break;
                }
                x &= x - 1;
                y &= y - 1;
            }
            if ok {
                best = size;
                break;
            }
        }
    }
    Ok(best as u64)
}

/// Gap values along multiples of the common period `N = πᵤπᵥ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FbarProfile {
    pub window: u32,
    pub period: u64,
    /// `(multiple, horizon, fit, gap)` per requested multiple.
    pub values: Vec<(u64, u64, u64, f64)>,
    /// Gap at the last multiple.
    pub estimate: f64,
}

/// `f̄_δ` along horizons `q·N`, the last one taken as the estimate.
pub fn fbar_delta(
    u: &PeriodicPoint,
    v: &PeriodicPoint,
    window: u32,
    multiples: &[u64],
    cap: u64,
) -> Result<FbarProfile> {
    if multiples.is_empty() {
        return Err(Error::InvalidInput("at least one multiple of the common period is needed"));
    }
    let period = u.period().checked_mul(v.period()).ok_or(Error::Overflow)?;
    let mut values = Vec::with_capacity(multiples.len());
    for &q in multiples {
        let horizon = period.checked_mul(q).ok_or(Error::Overflow)?;
        let p = MatchProblem { u, v, horizon, window };
        let fit = max_fit_capped(&p, cap)?;
        values.push((q, horizon, fit, 1.0 - fit as f64 / horizon as f64));
    }
    let estimate = values.last().map(|v| v.3).unwrap_or(1.0);
    Ok(FbarProfile { window, period, values, estimate })
}

/// Estimate of `F̄_K` between two periodic points.
#[derive(Clone, Debug, PartialEq)]
pub struct FkEstimate {
    pub value: f64,
    /// The two sequences are equal, so the distance is exactly 0.
    pub exact_zero: bool,
    /// `f̄` estimate per window `0..=m_max`.
    pub gammas: Vec<f64>,
    /// Window realising the minimum, if any window qualified.
    pub window: Option<u32>,
}

/// `F̄_K = inf{δ : f̄_δ < δ}` with `f̄_δ` constant on each dyadic scale
/// band: the band of window `m` contributes `max(γₘ, 2^{-(m+1)})` when
/// `γₘ < 2^{-m}`; scales above 1 contribute 1.
pub fn fk_distance(
    u: &PeriodicPoint,
    v: &PeriodicPoint,
    m_max: u32,
    multiples: &[u64],
    cap: u64,
) -> Result<FkEstimate> {
    if shift_distance(u, 0, v, 0, DEFAULT_DISTANCE_CUTOFF) == 0.0 {
        return Ok(FkEstimate { value: 0.0, exact_zero: true, gammas: Vec::new(), window: None });
    }
    let mut gammas = Vec::with_capacity(m_max as usize + 1);
    let mut value = 1.0;
    let mut best = None;
    for m in 0..=m_max {
        let g = fbar_delta(u, v, m, multiples, cap)?.estimate;
        gammas.push(g);
        let upper = libm::exp2(-(m as f64));
        if g < upper {
            let cand = g.max(libm::exp2(-((m + 1) as f64)));
            if cand < value {
                value = cand;
                best = Some(m);
            }
        }
    }
    Ok(FkEstimate { value, exact_zero: false, gammas, window: best })
}

/// `F̄_K ≤ δ + ε` whenever `f̄_δ ≤ ε`; with `δ = 2^{-m}` the relevant gap is
/// the one at window `m`.
pub fn fk_upper_from_gap(window: u32, gap: f64) -> f64 {
    libm::exp2(-(window as f64)) + gap
}

/// The block-aligned match between consecutive stage orbits.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatch {
    pub window: u32,
    /// Matched pairs per period block of the later orbit: `kπₙ − 2m`.
    pub fit_per_block: u64,
    /// Pairs actually checked with the window predicate.
    pub certified_pairs: u64,
    /// `(Rₙ₊₁ + 2m)/πₙ₊₁`.
    pub gap_upper: f64,
}

/// Align the `kₙ₊₁` copies of `ξₙ` inside `ξₙ₊₁` with the periodic orbit of
/// `ξₙ`, dropping `m` positions next to each block boundary, and certify
/// every pair of one block. All blocks repeat the same phase pairs, so one
/// block certifies the match at every horizon.
pub fn block_match_bound(stage: &Stage, next: &Stage, window: u32) -> Result<BlockMatch> {
    if next.n != stage.n + 1 {
        return Err(Error::InvalidInput("block match needs consecutive stages"));
    }
    let k = next.k.ok_or(Error::InvalidInput("later stage has no repetition count"))?;
    let yn = PeriodicPoint::new(stage.xi.clone())?;
    let yn1 = PeriodicPoint::new(next.xi.clone())?;
    let body = k.checked_mul(stage.pi).ok_or(Error::Overflow)?;
    let m = window as u64;
    let (start, end) = (m, body.saturating_sub(m));
    let mut certified = 0;
    for j in start..end {
        if !window_agree(&yn1, j, &yn, j, window) {
            return Err(Error::CertificationFailure { position: j });
        }
        certified += 1;
    }
    let fit = end.saturating_sub(start);
    Ok(BlockMatch {
        window,
        fit_per_block: fit,
        certified_pairs: certified,
        gap_upper: 1.0 - fit as f64 / next.pi as f64,
    })
}

/// The pairs of the block match up to a horizon, as explicit index pairs
/// (later orbit, earlier orbit).
pub fn block_match_pairs(stage: &Stage, next: &Stage, window: u32, horizon: u64) -> Result<Vec<(u64, u64)>> {
    let k = next.k.ok_or(Error::InvalidInput("later stage has no repetition count"))?;
    let body = k * stage.pi;
    let m = window as u64;
    let mut pairs = Vec::new();
    let mut t = 0;
    while t * next.pi < horizon {
        for j in m..body.saturating_sub(m) {
            let (a, b) = (t * next.pi + j, t * body + j);
            if a < horizon && b < horizon {
                pairs.push((a, b));
            }
        }
        t += 1;
    }
    Ok(pairs)
}

/// `λₙ₊₁ + (n+1)/2ⁿ`.
pub fn cauchy_bound(n: usize, lambda_next: f64) -> f64 {
    lambda_next + (n as f64 + 1.0) / libm::exp2(n as f64)
}

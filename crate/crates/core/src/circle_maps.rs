//! Circle points, arcs and closed-form families of circle diffeomorphisms.
//!
//! The circle is `ℝ/ℤ`. Maps are handled through their degree-one lifts, so
//! arc images are computed on lifted endpoints and never need to guess which
//! way an arc wraps.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::symbolic::{Symbol, Word};

/// Reduce a real number into `[0, 1)`.
pub fn reduce(x: f64) -> f64 {
    let r = x - libm::floor(x);
    // x slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A point of `ℝ/ℤ`, always stored reduced into `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(x: f64) -> Self {
        CirclePoint(reduce(x))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `min(|u − v|, 1 − |u − v|)`.
    pub fn distance(self, other: CirclePoint) -> f64 {
        let d = libm::fabs(self.0 - other.0);
        d.min(1.0 - d)
    }

    pub fn shifted(self, t: f64) -> Self {
        CirclePoint::new(self.0 + t)
    }
}

/// The closed arc `{anchor + t mod 1 : 0 ≤ t ≤ length}`.
///
/// Length 1 is the whole circle. Length 0 is allowed and denotes a single
/// point; deep compositions of contractions collapse arcs to that size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    anchor: CirclePoint,
    length: f64,
}

impl Arc {
    pub fn new(anchor: f64, length: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&length) {
            return Err(Error::InvalidInput("arc length must lie in [0, 1]"));
        }
        if !anchor.is_finite() {
            return Err(Error::InvalidInput("arc anchor must be finite"));
        }
        Ok(Arc { anchor: CirclePoint::new(anchor), length })
    }

    pub fn centered(center: CirclePoint, length: f64) -> Result<Self> {
        Arc::new(center.value() - 0.5 * length, length)
    }

    pub fn full() -> Self {
        Arc { anchor: CirclePoint(0.0), length: 1.0 }
    }

    pub fn anchor(&self) -> CirclePoint {
        self.anchor
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn is_full(&self) -> bool {
        self.length >= 1.0
    }

    pub fn end(&self) -> CirclePoint {
        self.anchor.shifted(self.length)
    }

    pub fn midpoint(&self) -> CirclePoint {
        self.anchor.shifted(0.5 * self.length)
    }

    /// Position of `x` measured from the anchor in the positive direction.
    pub fn offset_of(&self, x: CirclePoint) -> f64 {
        reduce(x.value() - self.anchor.value())
    }

    /// The point at offset `t` from the anchor.
    pub fn point_at(&self, t: f64) -> CirclePoint {
        self.anchor.shifted(t)
    }

    pub fn contains(&self, x: CirclePoint) -> bool {
        self.is_full() || self.offset_of(x) <= self.length
    }

    pub fn contains_arc(&self, other: &Arc) -> bool {
        if self.is_full() {
            return true;
        }
        if other.is_full() {
            return false;
        }
        self.offset_of(other.anchor) + other.length <= self.length
    }

    /// Closed-arc intersection: touching endpoints count as intersecting.
    pub fn intersects(&self, other: &Arc) -> bool {
        self.is_full()
            || other.is_full()
            || self.offset_of(other.anchor) <= self.length
            || other.offset_of(self.anchor) <= other.length
    }

    /// Grow the arc by `pad` on both ends, saturating at the full circle.
    pub fn padded(&self, pad: f64) -> Arc {
        let length = self.length + 2.0 * pad;
        if length >= 1.0 {
            Arc::full()
        } else {
            Arc { anchor: self.anchor.shifted(-pad), length }
        }
    }

    /// The largest arc centred at `c` inside `self`, if `c` lies in `self`.
    pub fn largest_centered_within(&self, c: CirclePoint) -> Option<Arc> {
        if !self.contains(c) {
            return None;
        }
        let t = self.offset_of(c);
        let h = t.min(self.length - t);
        Some(Arc { anchor: c.shifted(-h), length: 2.0 * h })
    }

    /// Smallest arc centred at `c` that contains `self`.
    pub fn covering_radius_about(&self, c: CirclePoint) -> f64 {
        let a = self.anchor.value() - c.value();
        let a = a - libm::round(a);
        let b = a + self.length;
        libm::fabs(a).max(libm::fabs(b))
    }

    /// `n` equally spaced points from anchor to end, both included.
    pub fn grid(&self, n: usize) -> impl Iterator<Item = CirclePoint> + '_ {
        let step = if n > 1 { self.length / (n - 1) as f64 } else { 0.0 };
        (0..n).map(move |i| self.point_at(step * i as f64))
    }
}

/// True iff the closed arcs are pairwise disjoint (touching counts as overlap).
pub fn arcs_disjoint(arcs: &[Arc]) -> bool {
    first_overlap(arcs).is_none()
}

/// Indices of some overlapping pair, or `None` when the arcs are disjoint.
///
/// After sorting by anchor, disjointness is equivalent to every arc ending
/// strictly before the next anchor (cyclically), so one pass suffices.
pub fn first_overlap(arcs: &[Arc]) -> Option<(usize, usize)> {
    if arcs.len() < 2 {
        return None;
    }
    if let Some(i) = arcs.iter().position(Arc::is_full) {
        return Some((i, if i == 0 { 1 } else { 0 }));
    }
    let mut order: Vec<usize> = (0..arcs.len()).collect();
    order.sort_by(|&i, &j| arcs[i].anchor.0.total_cmp(&arcs[j].anchor.0));
    for w in 0..order.len() {
        let i = order[w];
        let j = order[(w + 1) % order.len()];
        let a = &arcs[i];
        let mut next = arcs[j].anchor.0;
        if w + 1 == order.len() {
            next += 1.0;
        }
        if a.anchor.0 + a.length >= next {
            return Some((i, j));
        }
    }
    None
}

/// One orientation-preserving circle diffeomorphism given in closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FiberMap {
    /// `x ↦ x + shift + (amplitude/2π)·sin(2πx)`, derivative `1 + amplitude·cos(2πx)`.
    Sine { shift: f64, amplitude: f64 },
    /// `x ↦ x + shift`.
    Rotation { shift: f64 },
}

impl FiberMap {
    pub fn sine(shift: f64, amplitude: f64) -> Result<Self> {
        let m = FiberMap::Sine { shift, amplitude };
        m.check()?;
        Ok(m)
    }

    pub fn rotation(shift: f64) -> Result<Self> {
        let m = FiberMap::Rotation { shift };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        match *self {
            FiberMap::Sine { shift, amplitude } => {
                if !shift.is_finite() || !amplitude.is_finite() {
                    return Err(Error::InvalidInput("map parameters must be finite"));
                }
                if libm::fabs(amplitude) >= 1.0 {
                    return Err(Error::InvalidInput("sine amplitude must satisfy |b| < 1"));
                }
            }
            FiberMap::Rotation { shift } => {
                if !shift.is_finite() {
                    return Err(Error::InvalidInput("map parameters must be finite"));
                }
            }
        }
        Ok(())
    }

    /// The degree-one lift `ℝ → ℝ`.
    #[inline]
    pub fn lift(&self, x: f64) -> f64 {
        match *self {
            FiberMap::Sine { shift, amplitude } => x + shift + amplitude / TAU * libm::sin(TAU * x),
            FiberMap::Rotation { shift } => x + shift,
        }
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            FiberMap::Sine { amplitude, .. } => 1.0 + amplitude * libm::cos(TAU * x),
            FiberMap::Rotation { .. } => 1.0,
        }
    }

    /// `sup |f′|` over the whole circle.
    pub fn sup_derivative(&self) -> f64 {
        match *self {
            FiberMap::Sine { amplitude, .. } => 1.0 + libm::fabs(amplitude),
            FiberMap::Rotation { .. } => 1.0,
        }
    }

    /// `sup |f′|` over an arc, from the closed form of the derivative.
    pub fn sup_derivative_on(&self, arc: &Arc) -> f64 {
        match *self {
            FiberMap::Sine { amplitude, .. } => {
                // the maximum of 1 + b·cos(2πx) sits at 0 for b > 0 and 1/2 for b < 0
                let peak = CirclePoint::new(if amplitude >= 0.0 { 0.0 } else { 0.5 });
                if arc.contains(peak) {
                    1.0 + libm::fabs(amplitude)
                } else {
                    let a = arc.anchor().value();
                    self.derivative(a).max(self.derivative(a + arc.length()))
                }
            }
            FiberMap::Rotation { .. } => 1.0,
        }
    }

    /// Solve `lift(x) = y` for real `x`.
    pub fn inverse_lift(&self, y: f64) -> f64 {
        match *self {
            FiberMap::Rotation { shift } => y - shift,
            FiberMap::Sine { shift, amplitude } => {
                let r = libm::fabs(amplitude) / TAU;
                let mut lo = y - shift - r;
                let mut hi = y - shift + r;
                let mut x = y - shift;
                for _ in 0..100 {
                    let fx = self.lift(x) - y;
                    if fx == 0.0 {
                        return x;
                    }
                    if fx < 0.0 {
                        lo = x;
                    } else {
                        hi = x;
                    }
                    let newton = x - fx / self.derivative(x);
                    x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
                    if hi - lo <= 4.0 * f64::EPSILON * (1.0 + libm::fabs(x)) {
                        break;
                    }
                }
                x
            }
        }
    }

    pub fn apply(&self, x: CirclePoint) -> CirclePoint {
        CirclePoint::new(self.lift(x.value()))
    }

    pub fn apply_inverse(&self, y: CirclePoint) -> CirclePoint {
        CirclePoint::new(self.inverse_lift(y.value()))
    }
}

/// One map per symbol of the alphabet; symbol `j` selects `maps[j − 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MapFamily {
    maps: Vec<FiberMap>,
}

/// Attracting fixed point of a word map together with its contraction rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPoint {
    pub point: CirclePoint,
    /// Grid estimate of `sup |g′|` on the arc (may underflow to 0).
    pub sup_derivative: f64,
    /// Natural logarithm of the same supremum, never underflowing.
    pub log_sup: f64,
}

/// Default number of grid points for derivative suprema.
pub const DEFAULT_GRID: usize = 4096;
/// Default iteration budget of the fixed-point solver.
pub const FIXED_POINT_BUDGET: usize = 1_000_000;

impl MapFamily {
    pub fn new(maps: Vec<FiberMap>) -> Result<Self> {
        if maps.is_empty() || maps.len() > crate::symbolic::MAX_ALPHABET as usize {
            return Err(Error::InvalidInput("a family needs between 1 and 9 maps"));
        }
        for m in &maps {
            m.check()?;
        }
        Ok(MapFamily { maps })
    }

    /// Two sine maps: symbol 2 contracts towards 0 and symbol 1 towards
    /// a point near 0.09, both inside the arc of length 0.2 centred at 0.
    pub fn reference() -> Self {
        MapFamily {
            maps: alloc::vec![
                FiberMap::Sine { shift: 0.07, amplitude: -0.82 },
                FiberMap::Sine { shift: 0.0, amplitude: -0.62832 },
            ],
        }
    }

    pub fn identity(k: usize) -> Self {
        MapFamily { maps: alloc::vec![FiberMap::Rotation { shift: 0.0 }; k.max(1)] }
    }

    pub fn size(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[FiberMap] {
        &self.maps
    }

    pub fn map(&self, s: Symbol) -> Result<&FiberMap> {
        self.maps.get(s.index()).ok_or(Error::UnknownSymbol { symbol: s.get(), alphabet: self.maps.len() })
    }

    pub fn check_word<W: Word + ?Sized>(&self, w: &W) -> Result<()> {
        for s in w.symbols() {
            self.map(s)?;
        }
        Ok(())
    }

    pub fn eval_symbol(&self, s: Symbol, x: CirclePoint) -> Result<CirclePoint> {
        Ok(self.map(s)?.apply(x))
    }

    /// `f_{ωₙ} ∘ ⋯ ∘ f_{ω₁}(x)`: the first symbol acts first.
    pub fn eval_word<W: Word + ?Sized>(&self, w: &W, x: CirclePoint) -> Result<CirclePoint> {
        let mut y = x.value();
        for s in w.symbols() {
            y = reduce(self.map(s)?.lift(y));
        }
        Ok(CirclePoint(y))
    }

    /// Natural log of the chain-rule product along the orbit of `x`.
    ///
    /// The running product is renormalised with `frexp` so it neither
    /// underflows nor pays for a logarithm per symbol.
    pub fn log_word_derivative<W: Word + ?Sized>(&self, w: &W, x: CirclePoint) -> Result<f64> {
        let mut y = x.value();
        let mut mant = 1.0f64;
        let mut exp: i64 = 0;
        for (i, s) in w.symbols().enumerate() {
            let f = self.map(s)?;
            mant *= f.derivative(y);
            y = reduce(f.lift(y));
            if i % 32 == 31 {
                let (m, e) = libm::frexp(mant);
                mant = m;
                exp += e as i64;
            }
        }
        Ok(libm::log(mant) + exp as f64 * core::f64::consts::LN_2)
    }

    /// `(f_{ωₙ} ∘ ⋯ ∘ f_{ω₁})′(x)`. Underflows to 0 for long contracting
    /// words; use [`MapFamily::log_word_derivative`] there.
    pub fn word_derivative<W: Word + ?Sized>(&self, w: &W, x: CirclePoint) -> Result<f64> {
        let mut y = x.value();
        let mut d = 1.0;
        for s in w.symbols() {
            let f = self.map(s)?;
            d *= f.derivative(y);
            y = reduce(f.lift(y));
        }
        Ok(d)
    }

    /// Exact image of a proper arc: the arc from the image of its start to
    /// the image of its end.
    pub fn arc_image<W: Word + ?Sized>(&self, w: &W, a: &Arc) -> Result<Arc> {
        if a.is_full() {
            return Err(Error::InvalidInput("arc image needs a proper arc"));
        }
        self.arc_enclosure(w, a, 0.0)
    }

    /// Arc image with both endpoints pushed outwards by `pad` after every
    /// symbol, so that float orbits started inside stay inside.
    pub fn arc_enclosure<W: Word + ?Sized>(&self, w: &W, a: &Arc, pad: f64) -> Result<Arc> {
        if a.is_full() {
            return Ok(Arc::full());
        }
        let mut lo = a.anchor.value();
        let mut hi = lo + a.length;
        for s in w.symbols() {
            let f = self.map(s)?;
            lo = f.lift(lo) - pad;
            hi = f.lift(hi) + pad;
            let shift = libm::floor(lo);
            lo -= shift;
            hi -= shift;
            if hi - lo >= 1.0 {
                return Ok(Arc::full());
            }
        }
        Ok(Arc { anchor: CirclePoint::new(lo), length: (hi - lo).max(0.0) })
    }

    /// Upper bound for `sup |g′|` on an arc: the product over the word of the
    /// closed-form suprema of each factor on the successive image arcs.
    pub fn log_sup_derivative_enclosure<W: Word + ?Sized>(&self, w: &W, a: &Arc, pad: f64) -> Result<f64> {
        let mut arc = *a;
        let mut log = 0.0;
        for s in w.symbols() {
            let f = self.map(s)?;
            log += libm::log(f.sup_derivative_on(&arc));
            arc = self.arc_enclosure(&[s][..], &arc, pad)?;
        }
        Ok(log)
    }

    /// Natural log of the maximum of `|g′|` over `grid` equally spaced
    /// points of the arc, endpoints included.
    pub fn sup_log_derivative_on<W: Word + ?Sized>(&self, w: &W, a: &Arc, grid: usize) -> Result<f64> {
        let n = grid.max(2);
        let mut best = f64::NEG_INFINITY;
        for x in a.grid(n) {
            best = best.max(self.log_word_derivative(w, x)?);
        }
        Ok(best)
    }

    /// `max_j sup |f_j′|`.
    pub fn max_sup_derivative(&self) -> f64 {
        self.maps.iter().map(FiberMap::sup_derivative).fold(0.0, f64::max)
    }

    /// Fixed point of the word map `g` on an arc that `g` maps into itself.
    ///
    /// Checks `g(J) ⊂ J` and the grid supremum of `|g′|` below 1, then
    /// iterates from the midpoint, falling back to bisection on the
    /// displacement when the iteration stalls.
    pub fn find_attracting_fixed_point<W: Word + ?Sized>(
        &self,
        w: &W,
        j: &Arc,
        tol: f64,
        grid: usize,
    ) -> Result<FixedPoint> {
        self.check_word(w)?;
        if w.is_empty() {
            return Err(Error::NoContraction { reason: "the empty word is the identity" });
        }
        if j.is_full() {
            return Err(Error::NoContraction { reason: "a full-circle arc cannot be contracted into itself" });
        }
        let image = self.arc_image(w, j)?;
        if !j.contains_arc(&image) {
            return Err(Error::NoContraction { reason: "g(J) is not contained in J" });
        }
        let log_sup = self.sup_log_derivative_on(w, j, grid)?;
        if !(log_sup < 0.0) {
            return Err(Error::NoContraction { reason: "sup |g'| on J is not below 1" });
        }
        let point = self.fixed_point_in(w, j, tol)?;
        Ok(FixedPoint { point, sup_derivative: libm::exp(log_sup), log_sup })
    }

    /// Fixed point of `g` inside `j`, by iteration from the midpoint with a
    /// bisection fallback. Does not assume `g(j) ⊂ j`.
    pub fn fixed_point_in<W: Word + ?Sized>(&self, w: &W, j: &Arc, tol: f64) -> Result<CirclePoint> {
        let mut x = j.midpoint();
        let mut last = f64::INFINITY;
        let mut stalls = 0;
        for _ in 0..FIXED_POINT_BUDGET {
            let y = self.eval_word(w, x)?;
            let d = y.distance(x);
            x = y;
            if d < tol {
                let r = self.eval_word(w, x)?.distance(x);
                if r < tol && j.contains(x) {
                    return Ok(x);
                }
                break;
            }
            if d >= last {
                stalls += 1;
                if stalls > 50 {
                    break;
                }
            }
            last = d;
        }
        self.bisect_fixed_point(w, j, tol)
    }

    fn bisect_fixed_point<W: Word + ?Sized>(&self, w: &W, j: &Arc, tol: f64) -> Result<CirclePoint> {
        // h(t) = signed displacement of g at offset t, measured on the circle
        let h = |t: f64| -> Result<f64> {
            let x = j.point_at(t);
            let y = self.eval_word(w, x)?;
            let d = y.value() - x.value();
            Ok(d - libm::round(d))
        };
        let (mut lo, mut hi) = (0.0, j.length());
        let (hlo, hhi) = (h(lo)?, h(hi)?);
        if hlo < 0.0 || hhi > 0.0 {
            return Err(Error::NoConvergence { residual: hlo.abs().min(hhi.abs()) });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid)? >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 0.25 * tol {
                break;
            }
        }
        let x = j.point_at(0.5 * (lo + hi));
        let r = self.eval_word(w, x)?.distance(x);
        if r < tol {
            Ok(x)
        } else {
            Err(Error::NoConvergence { residual: r })
        }
    }
}

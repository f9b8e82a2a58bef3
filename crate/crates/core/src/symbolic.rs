//! Words over `{1..k}`, periodic points of the shift and the shift metric.
//!
//! Stage words grow exponentially (`πₙ > 2ⁿ`), so they are stored as
//! expression trees of literals, concatenations and powers. Indexing and
//! iteration walk the tree; nothing needs the full expansion.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Largest alphabet the digit-based text form can express.
pub const MAX_ALPHABET: u8 = 9;

/// One letter of the alphabet, numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(u8);

impl Symbol {
    pub const fn new(j: u8) -> Option<Self> {
        if j >= 1 && j <= MAX_ALPHABET {
            Some(Symbol(j))
        } else {
            None
        }
    }

    pub const fn get(self) -> u8 {
        self.0
    }

    /// Zero-based position in a family of maps.
    pub const fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn from_digit(c: char) -> Option<Self> {
        c.to_digit(10).and_then(|d| Symbol::new(d as u8))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Parse a digit string such as `"121"` into symbols.
pub fn literal(text: &str) -> Result<Vec<Symbol>> {
    text.chars()
        .map(|c| Symbol::from_digit(c).ok_or(Error::InvalidInput("literal symbols must be digits 1..=9")))
        .collect()
}

/// The alphabet `{1, ..., k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Alphabet {
    k: u8,
}

impl Alphabet {
    pub fn new(k: u8) -> Result<Self> {
        if (2..=MAX_ALPHABET).contains(&k) {
            Ok(Alphabet { k })
        } else {
            Err(Error::InvalidInput("alphabet size must be in 2..=9"))
        }
    }

    pub fn size(self) -> u8 {
        self.k
    }

    pub fn contains(self, s: Symbol) -> bool {
        s.0 <= self.k
    }

    pub fn symbols(self) -> impl Iterator<Item = Symbol> {
        (1..=self.k).map(Symbol)
    }
}

/// Anything that can be read as a finite sequence of symbols.
pub trait Word {
    fn len(&self) -> u64;

    fn symbols(&self) -> impl Iterator<Item = Symbol> + '_;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Word for [Symbol] {
    fn len(&self) -> u64 {
        <[Symbol]>::len(self) as u64
    }

    fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.iter().copied()
    }
}

impl Word for Vec<Symbol> {
    fn len(&self) -> u64 {
        self.as_slice().len() as u64
    }

    fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.iter().copied()
    }
}

/// Node of a [`HierarchicalWord`] expression tree.
#[derive(Debug)]
pub enum WordNode {
    Literal(Vec<Symbol>),
    Concat(Vec<HierarchicalWord>),
    Power(HierarchicalWord, u64),
}

#[derive(Debug)]
struct Inner {
    node: WordNode,
    len: u64,
    depth: u32,
}

/// A finite word stored as a shared expression tree with cached lengths.
///
/// Cloning is cheap; subtrees are shared, so `ξₙ` holds `ξₙ₋₁` by reference.
#[derive(Clone, Debug)]
pub struct HierarchicalWord(Arc<Inner>);

impl HierarchicalWord {
    pub fn literal(symbols: Vec<Symbol>) -> Self {
        let len = symbols.len() as u64;
        HierarchicalWord(Arc::new(Inner { node: WordNode::Literal(symbols), len, depth: 0 }))
    }

    pub fn parse_literal(text: &str) -> Result<Self> {
        Ok(Self::literal(literal(text)?))
    }

    pub fn concat(children: Vec<HierarchicalWord>) -> Result<Self> {
        let mut len: u64 = 0;
        let mut depth = 0;
        for c in &children {
            len = len.checked_add(c.len()).ok_or(Error::Overflow)?;
            depth = depth.max(c.depth() + 1);
        }
        Ok(HierarchicalWord(Arc::new(Inner { node: WordNode::Concat(children), len, depth })))
    }

    pub fn power(child: HierarchicalWord, exponent: u64) -> Result<Self> {
        if exponent == 0 {
            return Err(Error::InvalidInput("power exponent must be at least 1"));
        }
        let len = child.len().checked_mul(exponent).ok_or(Error::Overflow)?;
        let depth = child.depth() + 1;
        Ok(HierarchicalWord(Arc::new(Inner { node: WordNode::Power(child, exponent), len, depth })))
    }

    pub fn len(&self) -> u64 {
        self.0.len
    }

    pub fn is_empty(&self) -> bool {
        self.0.len == 0
    }

    pub fn depth(&self) -> u32 {
        self.0.depth
    }

    pub fn node(&self) -> &WordNode {
        &self.0.node
    }

    /// Symbol at zero-based position `i`, found by descending the tree.
    pub fn symbol_at(&self, mut i: u64) -> Result<Symbol> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.len() });
        }
        let mut w = self;
        loop {
            match &w.0.node {
                WordNode::Literal(s) => return Ok(s[i as usize]),
                WordNode::Power(c, _) => {
                    i %= c.len();
                    w = c;
                }
                WordNode::Concat(children) => {
                    let mut next = None;
                    for c in children {
                        if i < c.len() {
                            next = Some(c);
                            break;
                        }
                        i -= c.len();
                    }
                    // lengths are cached consistently, so some child holds i
                    w = next.expect("index within concatenation");
                }
            }
        }
    }

    pub fn symbols(&self) -> Symbols<'_> {
        let mut it = Symbols { stack: Vec::with_capacity(self.depth() as usize + 1) };
        it.push(self);
        it
    }

    /// Full expansion, refused above `cap` symbols.
    pub fn expand(&self, cap: u64) -> Result<Vec<Symbol>> {
        if self.len() > cap {
            return Err(Error::CapExceeded { requested: self.len(), cap });
        }
        Ok(self.symbols().collect())
    }

    /// Symbol-by-symbol equality, without expanding either side.
    pub fn same_symbols(&self, other: &HierarchicalWord) -> bool {
        self.len() == other.len() && self.symbols().eq(other.symbols())
    }
}

impl Word for HierarchicalWord {
    fn len(&self) -> u64 {
        self.0.len
    }

    fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        HierarchicalWord::symbols(self)
    }
}

enum Frame<'a> {
    Literal(&'a [Symbol], usize),
    Concat(&'a [HierarchicalWord], usize),
    Power(&'a HierarchicalWord, u64),
}

/// Depth-first iterator over the symbols of a [`HierarchicalWord`].
pub struct Symbols<'a> {
    stack: Vec<Frame<'a>>,
}

impl<'a> Symbols<'a> {
    fn push(&mut self, w: &'a HierarchicalWord) {
        match &w.0.node {
            WordNode::Literal(s) => self.stack.push(Frame::Literal(s, 0)),
            WordNode::Concat(c) => self.stack.push(Frame::Concat(c, 0)),
            WordNode::Power(c, e) => self.stack.push(Frame::Power(c, *e)),
        }
    }
}

impl Iterator for Symbols<'_> {
    type Item = Symbol;

    fn next(&mut self) -> Option<Symbol> {
        loop {
            let child = match self.stack.last_mut()? {
                Frame::Literal(s, pos) => {
                    if let Some(&sym) = s.get(*pos) {
                        *pos += 1;
                        return Some(sym);
                    }
                    None
                }
                Frame::Concat(children, idx) => {
                    let c = children.get(*idx);
                    *idx += 1;
                    c
                }
                Frame::Power(c, remaining) => {
                    if *remaining > 0 {
                        *remaining -= 1;
                        Some(*c)
                    } else {
                        None
                    }
                }
            };
            match child {
                Some(c) => self.push(c),
                None => {
                    self.stack.pop();
                }
            }
        }
    }
}

/// `ξₙ = ξₙ₋₁^{kₙ} αₙ`.
pub fn build_stage_word(prev: &HierarchicalWord, k: u64, alpha: &[Symbol]) -> Result<HierarchicalWord> {
    if k < 2 {
        return Err(Error::InvalidStage { condition: 3, reason: "repetition count k_n must be at least 2" });
    }
    if alpha.is_empty() {
        return Err(Error::InvalidStage { condition: 3, reason: "noise word must have length at least 1" });
    }
    let repeated = HierarchicalWord::power(prev.clone(), k)?;
    HierarchicalWord::concat(alloc::vec![repeated, HierarchicalWord::literal(alpha.to_vec())])
}

/// The bi-infinite periodic sequence generated by a nonempty finite word.
#[derive(Clone, Debug)]
pub struct PeriodicPoint {
    word: HierarchicalWord,
}

impl PeriodicPoint {
    pub fn new(word: HierarchicalWord) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::InvalidInput("periodic point needs a nonempty period word"));
        }
        Ok(PeriodicPoint { word })
    }

    pub fn from_literal(text: &str) -> Result<Self> {
        Self::new(HierarchicalWord::parse_literal(text)?)
    }

    pub fn word(&self) -> &HierarchicalWord {
        &self.word
    }

    pub fn period(&self) -> u64 {
        self.word.len()
    }

    /// Coordinate `offset` of the shifted sequence `σ^phase(u)`.
    pub fn coordinate(&self, phase: u64, offset: i64) -> Symbol {
        let p = self.period() as i128;
        let idx = (phase as i128 + offset as i128).rem_euclid(p) as u64;
        self.word.symbol_at(idx).expect("index reduced modulo the period")
    }

    pub fn expand_period(&self, cap: u64) -> Result<Vec<Symbol>> {
        self.word.expand(cap)
    }
}

/// True iff `σⁱu` and `σʲv` agree on coordinates `-m..=m`, i.e. their shift
/// distance is below `2^{-m}`.
pub fn window_agree(u: &PeriodicPoint, i: u64, v: &PeriodicPoint, j: u64, m: u32) -> bool {
    let m = m as i64;
    (-m..=m).all(|l| u.coordinate(i, l) == v.coordinate(j, l))
}

/// Smallest `|ℓ|` at which `σⁱu` and `σʲv` differ, or `None` if the two
/// sequences are equal.
pub fn first_disagreement(u: &PeriodicPoint, i: u64, v: &PeriodicPoint, j: u64) -> Option<u64> {
    // Two periodic sequences agreeing on p + q consecutive places agree
    // everywhere, so the scan in both directions terminates by then.
    let limit = u.period() + v.period();
    (0..=limit).find(|&l| {
        let l = l as i64;
        u.coordinate(i, l) != v.coordinate(j, l) || u.coordinate(i, -l) != v.coordinate(j, -l)
    })
}

/// Default number of coordinates scanned before the exact equality test.
pub const DEFAULT_DISTANCE_CUTOFF: u32 = 64;

/// `d(σⁱu, σʲv) = 2^{-min{|ℓ| : coordinates differ}}`, `0` for equal sequences.
pub fn shift_distance(u: &PeriodicPoint, i: u64, v: &PeriodicPoint, j: u64, cutoff: u32) -> f64 {
    for l in 0..=cutoff as i64 {
        if u.coordinate(i, l) != v.coordinate(j, l) || u.coordinate(i, -l) != v.coordinate(j, -l) {
            return libm::exp2(-(l as f64));
        }
    }
    match first_disagreement(u, i, v, j) {
        Some(l) => libm::exp2(-(l as f64)),
        None => 0.0,
    }
}

/// Window encoding the scale `δ`: terms are `δ`-close iff they agree on
/// `|ℓ| ≤ window`. `None` for `δ > 1`, where every pair is close.
pub fn window_for_scale(delta: f64) -> Option<u32> {
    if !(delta > 0.0) {
        return None;
    }
    if delta > 1.0 {
        return None;
    }
    let mut m = 0u32;
    while libm::exp2(-((m + 1) as f64)) >= delta {
        m += 1;
    }
    Some(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn lit(s: &str) -> HierarchicalWord {
        HierarchicalWord::parse_literal(s).unwrap()
    }

    fn digits(w: &HierarchicalWord) -> Vec<u8> {
        w.symbols().map(Symbol::get).collect()
    }

    #[test]
    fn symbol_at_literal_and_power() {
        assert_eq!(lit("121").symbol_at(2).unwrap().get(), 1);
        let p = HierarchicalWord::power(lit("12"), 3).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p.symbol_at(4).unwrap().get(), 1);
        assert_eq!(digits(&p), vec![1, 2, 1, 2, 1, 2]);
        assert_eq!(p.symbol_at(6), Err(Error::IndexOutOfRange { index: 6, len: 6 }));
    }

    #[test]
    fn stage_word_expansion() {
        let x0 = lit("2");
        let a = literal("1").unwrap();
        let x1 = build_stage_word(&x0, 2, &a).unwrap();
        assert_eq!(digits(&x1), vec![2, 2, 1]);
        let x2 = build_stage_word(&x1, 2, &a).unwrap();
        assert_eq!(x2.len(), 7);
        assert_eq!(digits(&x2), vec![2, 2, 1, 2, 2, 1, 1]);
        let mut w = x0;
        for n in 1..=20u32 {
            w = build_stage_word(&w, 2, &a).unwrap();
            assert_eq!(w.len(), (1u64 << (n + 1)) - 1);
        }
    }

    #[test]
    fn stage_word_rejects_bad_parameters() {
        let a = literal("1").unwrap();
        assert!(matches!(build_stage_word(&lit("2"), 1, &a), Err(Error::InvalidStage { condition: 3, .. })));
        assert!(matches!(build_stage_word(&lit("2"), 2, &[]), Err(Error::InvalidStage { condition: 3, .. })));
    }

    #[test]
    fn overflowing_power_is_refused() {
        let big = HierarchicalWord::power(lit("12"), u64::MAX / 2).unwrap();
        assert_eq!(HierarchicalWord::power(big, 3).unwrap_err(), Error::Overflow);
    }

    #[test]
    fn window_agreement_examples() {
        let u = PeriodicPoint::from_literal("12").unwrap();
        let v = PeriodicPoint::from_literal("21").unwrap();
        assert!(window_agree(&u, 0, &v, 1, 0));
        assert!(!window_agree(&u, 0, &v, 0, 0));
        assert!(window_agree(&u, 0, &v, 1, 7));
        assert!(window_agree(&u, 3, &u, 3, 5));
    }

    #[test]
    fn negative_coordinates_wrap() {
        let u = PeriodicPoint::from_literal("123").unwrap();
        assert_eq!(u.coordinate(0, -1).get(), 3);
        assert_eq!(u.coordinate(0, -4).get(), 3);
        assert_eq!(u.coordinate(1, -1).get(), 1);
    }

    #[test]
    fn shift_distance_examples() {
        let u = PeriodicPoint::from_literal("1112111").unwrap();
        assert_eq!(shift_distance(&u, 2, &u, 2, 64), 0.0);
        let a = PeriodicPoint::from_literal("1").unwrap();
        let b = PeriodicPoint::from_literal("2").unwrap();
        assert_eq!(shift_distance(&a, 0, &b, 0, 64), 1.0);
        // agree on -2..=2, differ at +3
        let c = PeriodicPoint::from_literal("1111111211111111").unwrap();
        let d = PeriodicPoint::from_literal("1").unwrap();
        assert_eq!(shift_distance(&c, 4, &d, 0, 64), 0.125);
        // equal sequences written with different periods
        let e = PeriodicPoint::from_literal("1212").unwrap();
        let f = PeriodicPoint::from_literal("21").unwrap();
        assert_eq!(shift_distance(&e, 1, &f, 0, 64), 0.0);
        assert_eq!(first_disagreement(&e, 0, &f, 0), Some(0));
    }

    #[test]
    fn disagreement_past_the_cutoff_is_found() {
        let mut s = alloc::string::String::new();
        for _ in 0..100 {
            s.push('1');
        }
        s.push('2');
        let u = PeriodicPoint::from_literal(&s).unwrap();
        let v = PeriodicPoint::from_literal("1").unwrap();
        // position 0 of u sits 100 places before the '2' and 1 place after it
        assert_eq!(first_disagreement(&u, 50, &v, 0), Some(50));
        assert_eq!(shift_distance(&u, 50, &v, 0, 8), libm::exp2(-50.0));
    }

    #[test]
    fn scale_windows() {
        assert_eq!(window_for_scale(1.0), Some(0));
        assert_eq!(window_for_scale(0.75), Some(0));
        assert_eq!(window_for_scale(0.5), Some(1));
        assert_eq!(window_for_scale(0.3), Some(1));
        assert_eq!(window_for_scale(0.25), Some(2));
        for n in 0..30 {
            assert_eq!(window_for_scale(libm::exp2(-(n as f64))), Some(n));
        }
        assert_eq!(window_for_scale(1.5), None);
    }

    #[test]
    fn alphabet_bounds() {
        assert!(Alphabet::new(1).is_err());
        assert!(Alphabet::new(10).is_err());
        let a = Alphabet::new(3).unwrap();
        assert_eq!(a.symbols().count(), 3);
        assert!(!a.contains(Symbol::new(4).unwrap()));
    }
}

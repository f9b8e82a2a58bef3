use proptest::prelude::*;
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repat_core::circle_maps::*;
use repat_core::symbolic::{literal, Symbol};

fn word(digits: &[u8]) -> Vec<Symbol> {
    digits.iter().map(|&d| Symbol::new(d).unwrap()).collect()
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

#[test]
fn derivative_agrees_with_central_differences() {
    let fam = MapFamily::reference();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-6;
    for _ in 0..100 {
        let len = 1 + (rng.next_u64() % 6) as usize;
        let w: Vec<Symbol> = (0..len).map(|_| Symbol::new(1 + (rng.next_u64() % 2) as u8).unwrap()).collect();
        let x = unit(&mut rng);
        // difference of lifts avoids the jump of the reduction at 0
        let lift = |t: f64| w.iter().fold(t, |y, s| fam.map(*s).unwrap().lift(y));
        let fd = (lift(x + h) - lift(x - h)) / (2.0 * h);
        let d = fam.word_derivative(&w, CirclePoint::new(x)).unwrap();
        assert!(((fd - d) / d).abs() <= 1e-6, "w={w:?} x={x} fd={fd} d={d}");
    }
}

#[test]
fn squared_word_at_fixed_point() {
    let fam = MapFamily::reference();
    let j = Arc::centered(CirclePoint::new(0.0), 0.2).unwrap();
    let w = literal("221").unwrap();
    let fp = fam.find_attracting_fixed_point(&w, &j, 1e-13, 1024).unwrap();
    let d1 = fam.word_derivative(&w, fp.point).unwrap();
    let ww = [w.clone(), w].concat();
    let d2 = fam.word_derivative(&ww, fp.point).unwrap();
    assert!((d2 - d1 * d1).abs() <= 1e-12 * d2);
}

#[test]
fn identity_family_has_unit_derivative() {
    let fam = MapFamily::identity(3);
    let w = literal("123321").unwrap();
    assert_eq!(fam.word_derivative(&w, CirclePoint::new(0.4)).unwrap(), 1.0);
    assert_eq!(fam.eval_word(&literal("111").unwrap(), CirclePoint::new(0.4)).unwrap().value(), 0.4);
}

proptest! {
    #[test]
    fn composition_coherence(a in prop::collection::vec(1u8..=2, 0..12), b in prop::collection::vec(1u8..=2, 0..12), x in 0.0f64..1.0) {
        let fam = MapFamily::reference();
        let (wa, wb) = (word(&a), word(&b));
        let ab = [wa.clone(), wb.clone()].concat();
        let p = CirclePoint::new(x);
        let mid = fam.eval_word(&wa, p).unwrap();
        let direct = fam.eval_word(&ab, p).unwrap();
        prop_assert!(direct.distance(fam.eval_word(&wb, mid).unwrap()) <= 1e-12);
        let d = fam.word_derivative(&ab, p).unwrap();
        let chain = fam.word_derivative(&wa, p).unwrap() * fam.word_derivative(&wb, mid).unwrap();
        prop_assert!((d - chain).abs() <= 1e-12 * d);
        let log = fam.log_word_derivative(&ab, p).unwrap();
        prop_assert!((log - d.ln()).abs() <= 1e-12 * (1.0 + log.abs()));
    }

    #[test]
    fn sub_arcs_have_shorter_images(w in prop::collection::vec(1u8..=2, 1..10), anchor in 0.0f64..1.0, len in 0.001f64..0.9, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let fam = MapFamily::reference();
        let w = word(&w);
        let outer = Arc::new(anchor, len).unwrap();
        let (lo, hi) = if s < t { (s, t) } else { (t, s) };
        let inner = Arc::new(anchor + lo * len, (hi - lo) * len).unwrap();
        let io = fam.arc_image(&w, &outer).unwrap();
        let ii = fam.arc_image(&w, &inner).unwrap();
        prop_assert!(ii.length() <= io.length() + 1e-12);
        // the image of an arc contains the images of its points
        for k in 0..5 {
            let p = outer.point_at(len * k as f64 / 4.0);
            let q = fam.eval_word(&w, p).unwrap();
            prop_assert!(io.padded(1e-12).contains(q));
        }
    }

    #[test]
    fn disjointness_matches_pairwise_intersection(arcs in prop::collection::vec((0.0f64..1.0, 0.0f64..0.3), 1..7)) {
        let arcs: Vec<Arc> = arcs.iter().map(|&(a, l)| Arc::new(a, l).unwrap()).collect();
        let mut pairwise = true;
        for i in 0..arcs.len() {
            for j in i + 1..arcs.len() {
                if arcs[i].intersects(&arcs[j]) { pairwise = false; }
            }
        }
        prop_assert_eq!(arcs_disjoint(&arcs), pairwise);
    }

    #[test]
    fn fixed_points_are_fixed(w in prop::collection::vec(1u8..=2, 1..9)) {
        let fam = MapFamily::reference();
        let j = Arc::centered(CirclePoint::new(0.0), 0.2).unwrap();
        let w = word(&w);
        if let Ok(fp) = fam.find_attracting_fixed_point(&w, &j, 1e-12, 512) {
            prop_assert!(fam.eval_word(&w, fp.point).unwrap().distance(fp.point) < 1e-12);
            prop_assert!(fp.sup_derivative < 1.0);
            prop_assert!(j.contains(fp.point));
        }
    }
}

use proptest::prelude::*;
use shiftlab::intset::{
    density_profile, make_ap, make_interval_union, shift_set, ApBlock, BlockSet, CountingSet, Gap, IntSet, SetLiteral,
    Window,
};
use shiftlab::Rational;

/// Plain membership vector over the window; every oracle below reads it.
fn naive(w: Window, bits: &[bool]) -> impl Fn(i64) -> bool + '_ {
    move |x| w.contains(x) && bits[(x - w.lo) as usize]
}

fn naive_count(w: Window, bits: &[bool], lo: i64, hi: i64) -> u64 {
    let m = naive(w, bits);
    (lo..=hi).filter(|&x| m(x)).count() as u64
}

fn naive_gap(w: Window, bits: &[bool], sub: Window) -> Gap {
    let m = naive(w, bits);
    let xs: Vec<i64> = (sub.lo..=sub.hi).filter(|&x| m(x)).collect();
    if xs.is_empty() {
        return Gap::Infinite;
    }
    let mut pts = vec![sub.lo - 1];
    pts.extend(xs);
    pts.push(sub.hi + 1);
    Gap::Finite(pts.windows(2).map(|p| (p[1] - p[0]) as u64).max().unwrap())
}

fn window_and_bits() -> impl Strategy<Value = (Window, Vec<bool>)> {
    (-300i64..300, 1i64..400).prop_flat_map(|(lo, len)| {
        // windows either contain 0 or sit in the nonnegative half-line
        let hi = if lo < 0 { (lo + len - 1).max(0) } else { lo + len - 1 };
        let w = Window::new(lo, hi).unwrap();
        (Just(w), proptest::collection::vec(any::<bool>(), w.len() as usize))
    })
}

proptest! {
    #[test]
    fn counts_match_naive((w, bits) in window_and_bits(), a in -400i64..400, b in -400i64..400) {
        let set = IntSet::from_fn(w, naive(w, &bits)).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert_eq!(set.count_in(lo, hi), naive_count(w, &bits, lo.max(w.lo), hi.min(w.hi)));
        prop_assert_eq!(set.len(), bits.iter().filter(|&&b| b).count() as u64);
        let m = naive(w, &bits);
        let from = a.max(w.lo);
        prop_assert_eq!(set.next_member(from), (from..=w.hi).find(|&x| m(x)));
    }

    #[test]
    fn max_gap_matches_naive((w, bits) in window_and_bits(), a in 0u64..400, b in 0u64..400) {
        let set = IntSet::from_fn(w, naive(w, &bits)).unwrap();
        let lo = w.lo + (a % w.len()) as i64;
        let hi = w.lo + (b % w.len()) as i64;
        // a subwindow is any interval, not necessarily one containing 0
        let sub = Window { lo: lo.min(hi), hi: lo.max(hi) };
        prop_assert_eq!(set.max_gap(sub), naive_gap(w, &bits, sub));
    }

    #[test]
    fn correlation_count_matches_naive((w, bits) in window_and_bits(), k in -50i64..50) {
        let set = IntSet::from_fn(w, naive(w, &bits)).unwrap();
        let m = naive(w, &bits);
        let expect = (w.lo..=w.hi).filter(|&x| m(x) && m(x + k)).count() as u64;
        prop_assert_eq!(set.correlation_count(k, w.lo, w.hi), expect);
        // shift_set: {x : x + k ∈ A}, truncation accounts for the rest
        let s = shift_set(&set, k);
        for x in w.lo..=w.hi {
            prop_assert_eq!(s.contains(x), m(x + k));
        }
        prop_assert_eq!(s.len() + s.truncated(), set.len());
    }

    #[test]
    fn set_algebra_matches_naive((w, bits) in window_and_bits(), seed in any::<u64>()) {
        let other: Vec<bool> = (0..bits.len()).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
        let a = IntSet::from_fn(w, naive(w, &bits)).unwrap();
        let b = IntSet::from_fn(w, naive(w, &other)).unwrap();
        let (i, u, d) = (a.intersection(&b).unwrap(), a.union(&b).unwrap(), a.difference(&b).unwrap());
        for x in w.lo..=w.hi {
            let (p, q) = (naive(w, &bits)(x), naive(w, &other)(x));
            prop_assert_eq!(i.contains(x), p && q);
            prop_assert_eq!(u.contains(x), p || q);
            prop_assert_eq!(d.contains(x), p && !q);
        }
    }

    #[test]
    fn literal_roundtrip((w, bits) in window_and_bits()) {
        let set = IntSet::from_fn(w, naive(w, &bits)).unwrap();
        let lit = SetLiteral::from_intset(&set);
        let back: SetLiteral = serde_json::from_str(&serde_json::to_string(&lit).unwrap()).unwrap();
        prop_assert_eq!(back.to_intset().unwrap(), set.clone());
        let blocks = BlockSet::from_intset(&set);
        prop_assert_eq!(blocks.len(), set.len());
        prop_assert_eq!(blocks.to_intset().unwrap(), set);
    }

    #[test]
    fn block_counts_match_members(first in -1000i64..1000, len in 1i64..50, step in 1i64..30, lo in -1500i64..1500, span in 0i64..1500) {
        let b = ApBlock::new(first, first + (len - 1) * step, step).unwrap();
        let naive_in = (0..len).map(|i| first + i * step).filter(|&x| (lo..=lo + span).contains(&x)).count() as u64;
        prop_assert_eq!(b.count_in(lo, lo + span), naive_in);
        prop_assert_eq!(b.len(), len as u64);
        prop_assert_eq!(b.next_ge(lo), (0..len).map(|i| first + i * step).find(|&x| x >= lo));
    }

    #[test]
    fn density_ratios_are_exact((w, bits) in window_and_bits()) {
        prop_assume!(w.lo == 0 || w.is_bilateral());
        let set = IntSet::from_fn(w, naive(w, &bits)).unwrap();
        let r = w.radius();
        prop_assume!(r >= 4);
        let cps = [r / 4, r / 2, r];
        let est = density_profile(&set, &cps).unwrap();
        for c in &est.checkpoints {
            let (lo, denom) = if w.is_bilateral() { (-c.n, 2 * c.n + 1) } else { (0, c.n + 1) };
            let cnt = naive_count(w, &bits, lo, c.n);
            prop_assert_eq!(c.ratio, Rational::new(cnt as i128, denom as i128));
        }
        prop_assert!(est.lower_est <= est.upper_est);
    }
}

#[test]
fn progressions_have_exact_density() {
    let w = Window::bilateral(1_000_000);
    for b in [2i64, 3, 7] {
        let a = make_ap(b, 0, w).unwrap();
        // #(bZ ∩ [−n, n]) = 2⌊n/b⌋ + 1
        assert_eq!(a.count_prefix(1_000_000).unwrap(), 2 * (1_000_000 / b as u64) + 1);
        assert_eq!(a.max_gap(Window::bilateral(1000)), Gap::Finite(b as u64));
    }
    let empty = IntSet::empty(w).unwrap();
    assert_eq!(empty.max_gap(Window::bilateral(10)), Gap::Infinite);
    assert_eq!(IntSet::full(w).unwrap().len(), 2_000_001);
}

#[test]
fn interval_union_clips_to_window() {
    let w = Window::new(0, 20).unwrap();
    let s = make_interval_union(&[(-5, 2), (7, 7), (18, 40)], w).unwrap();
    assert_eq!(s.members().collect::<Vec<_>>(), vec![0, 1, 2, 7, 18, 19, 20]);
}

#[test]
fn malformed_literals_are_rejected() {
    assert!(serde_json::from_str::<SetLiteral>(r#"{"window":[0,10],"members":[1],"ap":{"b":2}}"#)
        .map_err(|e| e.to_string())
        .and_then(|l| l.to_intset().map_err(|e| e.to_string()))
        .is_err());
    assert!(serde_json::from_str::<SetLiteral>(r#"{"window":[5,1],"members":[]}"#).is_err());
    assert!(serde_json::from_str::<SetLiteral>(r#"{"window":[0,10],"bogus":1}"#).is_err());
    let lit: SetLiteral = serde_json::from_str(r#"{"window":[0,10],"members":[11]}"#).unwrap();
    assert!(lit.to_intset().is_err());
}

use proptest::prelude::*;
use shiftlab::diffset::{
    greedy_separated_set, syndetic_return_set, weighted_return_average, AlphaProfile, CorrelationScan, Growth,
};
use shiftlab::intset::{linear_checkpoints, make_ap, CountingSet, Gap, IntSet, Window};
use shiftlab::Rational;

/// Windowed δ_k by brute force: pairs `(x, x+k)` inside `[−n, n]`, maximised
/// over the last quarter of 16 linear checkpoints.
fn oracle_delta_k(members: &[i64], radius: i64, k: i64) -> Rational {
    let set: std::collections::BTreeSet<i64> = members.iter().copied().collect();
    let cps: Vec<i64> = linear_checkpoints(radius, 16).into_iter().filter(|&n| n > 0).collect();
    let tail = &cps[cps.len() - cps.len().div_ceil(4)..];
    tail.iter()
        .map(|&n| {
            let c = set.range(-n..=n).filter(|&&x| (-n..=n).contains(&(x + k)) && set.contains(&(x + k))).count();
            Rational::new(c as i128, 2 * n as i128 + 1)
        })
        .max()
        .unwrap()
}

fn oracle_delta(members: &[i64], radius: i64) -> Rational {
    let cps: Vec<i64> = linear_checkpoints(radius, 16).into_iter().filter(|&n| n > 0).collect();
    let tail = &cps[cps.len() - cps.len().div_ceil(4)..];
    tail.iter()
        .map(|&n| Rational::new(members.iter().filter(|x| x.abs() <= n).count() as i128, 2 * n as i128 + 1))
        .max()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn delta_k_matches_brute_force(bits in proptest::collection::vec(any::<bool>(), 201), k in -40i64..40) {
        let w = Window::bilateral(100);
        let a = IntSet::from_fn(w, |x| bits[(x + 100) as usize]).unwrap();
        prop_assume!(!a.is_empty());
        let members: Vec<i64> = a.members().collect();
        let scan = CorrelationScan::with_default_checkpoints(&a).unwrap();
        prop_assert_eq!(scan.delta(), oracle_delta(&members, 100));
        prop_assert_eq!(scan.delta_k(k), oracle_delta_k(&members, 100, k));
        prop_assert_eq!(scan.delta_k(k), scan.delta_k(-k));
    }

    #[test]
    fn return_set_and_greedy_match_oracle(bits in proptest::collection::vec(any::<bool>(), 201), e in 1i128..4) {
        let w = Window::bilateral(100);
        let a = IntSet::from_fn(w, |x| bits[(x + 100) as usize]).unwrap();
        prop_assume!(!a.is_empty());
        let members: Vec<i64> = a.members().collect();
        let eps = Rational::new(e, 4);
        let delta = oracle_delta(&members, 100);
        let thr = (Rational::from_integer(1) - eps) * delta * delta;
        let kr = Window::bilateral(20);
        let rep = syndetic_return_set(&a, eps, kr).unwrap();
        let f: Vec<i64> = (-20..=20).filter(|&k| oracle_delta_k(&members, 100, k) > thr).collect();
        prop_assert_eq!(rep.f.members().collect::<Vec<_>>(), f);

        // separation and maximality of R, checked pair by pair
        let g = greedy_separated_set(&a, eps, kr).unwrap();
        for (i, &k) in g.r.iter().enumerate() {
            for &l in &g.r[..i] {
                prop_assert!(oracle_delta_k(&members, 100, k - l) <= thr);
            }
        }
        for k in -20..=20 {
            if !g.r.contains(&k) {
                prop_assert!(g.r.iter().any(|&l| oracle_delta_k(&members, 100, k - l) > thr), "{} could be added", k);
            }
        }
    }
}

#[test]
fn arithmetic_progressions() {
    let w = Window::bilateral(30_000);
    let a = make_ap(3, 0, w).unwrap();
    let rep = syndetic_return_set(&a, Rational::new(1, 2), Window::bilateral(60)).unwrap();
    // only multiples of 3 return: F = 3Z on the range
    assert_eq!(rep.f.members().collect::<Vec<_>>(), (-60..=60).step_by(3).collect::<Vec<_>>());
    assert_eq!(rep.max_gap, Gap::Finite(3));
    let g = greedy_separated_set(&a, Rational::new(1, 2), Window::bilateral(60)).unwrap();
    // 0, then 1 and −1 (δ_{±1} = δ_2 = 0); every other k sits at distance 3Z from one of them
    assert_eq!(g.r, vec![0, 1, -1]);
    assert!(g.bound_holds && g.covering_holds);
}

#[test]
fn harmonic_return_sum_at_zero() {
    let w = Window::bilateral(10_000);
    let a = make_ap(2, 0, w).unwrap();
    let alpha = AlphaProfile::from_fn(0, 20_000, |n| if n >= 1 { 1.0 / n as f64 } else { 0.0 });
    let r = weighted_return_average(&a, &alpha, &[100, 10_000]).unwrap();
    // β(0) = Σ_{j=1}^{5000} 1/(2j)
    let oracle: f64 = (1..=5000).map(|j| 1.0 / (2 * j) as f64).sum();
    assert!((r.beta_at(0).unwrap() - oracle).abs() < 1e-8);
    assert!((r.beta_at(10_000).unwrap()).abs() < 1e-8);
    // averages by direct double sum over pairs inside [−N, N]
    for &(n, v) in &r.averages {
        let mut s = 0.0;
        for x in (-n..=n).filter(|x| x % 2 == 0) {
            for y in (x + 1..=n).filter(|y| y % 2 == 0) {
                s += 1.0 / (y - x) as f64;
            }
        }
        assert!((v - s / (2 * n + 1) as f64).abs() < 1e-8, "N = {n}: {v} vs {}", s / (2 * n + 1) as f64);
    }
    assert_eq!(r.growth, Growth::Growing);
}

#[test]
fn summable_profile_stays_flat() {
    let a = make_ap(2, 0, Window::bilateral(10_000)).unwrap();
    let alpha = AlphaProfile::from_fn(0, 200, |n| if n >= 1 { 0.5f64.powi(n as i32) } else { 0.0 });
    let r = weighted_return_average(&a, &alpha, &[100, 10_000]).unwrap();
    assert_eq!(r.growth, Growth::Flat);
    // limit: Σ_j 4^{−j} = 1/3 per member, density 1/2
    assert!((r.averages[1].1 - 1.0 / 6.0).abs() < 1e-3);
}

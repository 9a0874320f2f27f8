use proptest::prelude::*;
use shiftlab::constructions::s5::{build_s5, build_s5_weight, GrowthPolicy};
use shiftlab::constructions::s6::{build_s6_sets, build_s6_weight, S6Config};
use shiftlab::criteria::{
    build_fhc_vector, check_fhc_coefficients, distributional_unbounded_scan, lower_density_obstruction,
    lp_series_test, necessary_condition_witness, recheck_d_witness, recheck_necessary_witness, recheck_visit_witness,
    verify_bilateral_conditions, verify_fhc_visits, verify_unilateral_conditions, FhcFamily, Target, Verdict,
};
use shiftlab::intset::{ApBlock, BlockSet, CountingSet, IntSet, Window};
use shiftlab::shift::{visit_set, Domain, Space, SparseVec, WeightSeq};
use shiftlab::{Rational, WeightSeqF64};

fn unilateral(ws: &[f64]) -> WeightSeqF64 {
    WeightSeq::from_weights(Domain::Unilateral, Window::unilateral(ws.len() as i64), ws).unwrap()
}

/// `Σ_{m ∈ A, m > n} (w₁⋯w_{m−n})^{−p}` directly from the weights.
fn forward_sum(ws: &[f64], a: &[i64], n: i64, p: f64) -> f64 {
    a.iter()
        .filter(|&&m| m > n)
        .map(|&m| (1..=m - n).map(|j| ws[(j - 1) as usize]).product::<f64>().powf(-p))
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn necessary_sums_match_direct_products(ws in proptest::collection::vec(0.6f64..1.8, 120), bits in proptest::collection::vec(any::<bool>(), 61), p in 1.0f64..3.0) {
        let w = unilateral(&ws);
        let a = IntSet::from_fn(Window::unilateral(60), |x| bits[x as usize]).unwrap();
        let members: Vec<i64> = a.members().collect();
        let rep = necessary_condition_witness(&w, &a, p).unwrap();
        let max_fw = members.iter().map(|&n| forward_sum(&ws, &members, n, p)).fold(0.0, f64::max);
        let got = rep.quantities["max_forward_sum"].as_f64().unwrap();
        prop_assert!((got - max_fw).abs() <= 1e-9 * max_fw.max(1.0), "{} vs {}", got, max_fw);
        prop_assert_eq!(rep.is_violated(), max_fw > 1.0);
        for wt in &rep.witnesses {
            prop_assert!(recheck_necessary_witness(&w, &a, p, wt).unwrap());
        }
    }

    #[test]
    fn doubling_weight_never_rules_out_a_set(bits in proptest::collection::vec(any::<bool>(), 400), p in 1.0f64..4.0) {
        // Σ_{j≥1} 2^{−pj} < 1 bounds every forward sum
        let w = WeightSeq::constant(Domain::Unilateral, Window::unilateral(800), 2.0f64).unwrap();
        let a = IntSet::from_fn(Window::unilateral(399), |x| bits[x as usize]).unwrap();
        let rep = necessary_condition_witness(&w, &a, p).unwrap();
        prop_assert!(!rep.is_violated());
    }

    #[test]
    fn lp_partial_sums_match_direct(ws in proptest::collection::vec(0.8f64..2.5, 64), p in 1.0f64..2.0) {
        let w = unilateral(&ws);
        let rep = lp_series_test(&w, p, 64).unwrap();
        let sums = rep.quantities["sides"][0]["partial_sums"].as_array().unwrap().clone();
        for s in sums {
            let n = s[0].as_i64().unwrap();
            let direct: f64 = (1..=n).map(|k| ws[..k as usize].iter().product::<f64>().powf(-p)).sum();
            prop_assert!((s[1].as_f64().unwrap() - direct).abs() <= 1e-9 * direct.max(1.0));
        }
    }

    #[test]
    fn d_witnesses_recheck(ws in proptest::collection::vec(0.5f64..2.0, 400), s1 in 3i64..15, s2 in 3i64..15) {
        let w = WeightSeq::from_weights(Domain::Bilateral, Window::bilateral(200), &ws).unwrap();
        let win = Window::unilateral(90);
        let e1 = BlockSet::new(win, vec![ApBlock::new(0, 90 / s1 * s1, s1).unwrap()]).unwrap();
        let e2 = BlockSet::new(win, vec![ApBlock::new(1, 1 + 80 / s2 * s2, s2).unwrap()]).unwrap();
        let fam = FhcFamily::with_power_of_two(vec![e1, e2], 1.0, 2.0f64, Target::Fhc);
        let reps = verify_bilateral_conditions(&w, &fam, 2).unwrap();
        for wt in &reps[3].witnesses {
            prop_assert!(recheck_d_witness(&w, &fam, wt).unwrap());
        }
        for wt in &reps[1].witnesses {
            let (n, m) = (wt.indices[2], wt.indices[3]);
            prop_assert!((m - n).abs() <= 3);
        }
    }
}

#[test]
fn series_verdicts() {
    let two = WeightSeq::constant(Domain::Unilateral, Window::unilateral(100), 2.0f64).unwrap();
    let r = lp_series_test(&two, 1.0, 30).unwrap();
    let last = r.quantities["sides"][0]["partial_sums"].as_array().unwrap().last().unwrap()[1].as_f64().unwrap();
    assert!((last - (1.0 - 0.5f64.powi(30))).abs() < 1e-15);
    assert!(lp_series_test(&two, 1.0, 64).unwrap().holds_on_window());

    let one = WeightSeq::constant(Domain::Bilateral, Window::bilateral(1 << 12), 1.0f64).unwrap();
    let r = lp_series_test(&one, 1.0, 1 << 12).unwrap();
    assert!(r.is_violated());

    // products return to 1 on every block [a_r, b_r]: terms do not tend to 0
    let st = build_s5(4, GrowthPolicy::default()).unwrap();
    let w: WeightSeqF64 = build_s5_weight(&st, st.window()).unwrap();
    let r = lp_series_test(&w, 1.0, st.window().hi).unwrap();
    assert_ne!(r.verdict, Verdict::HoldsOnWindow);
}

#[test]
fn built_vector_visits_its_targets() {
    let win = Window::unilateral(6000);
    let e1 = BlockSet::new(win, vec![ApBlock::new(40, 2000, 40).unwrap()]).unwrap();
    let e2 = BlockSet::new(win, vec![ApBlock::new(2105, 5905, 100).unwrap()]).unwrap();
    let mut fam = FhcFamily::with_power_of_two(vec![e1, e2], 1.0, 2.0f64, Target::UFhc);
    let w = WeightSeq::constant(Domain::Unilateral, Window::unilateral(7000), 2.0f64).unwrap();
    let x = build_fhc_vector(&w, &mut fam).unwrap();
    assert!(check_fhc_coefficients(&x, &fam).holds_on_window());
    let n_max = 6000;
    for p in 1..=2 {
        let hits = visit_set(&w, &x, &fam.y[p - 1], 1.0 / p as f64, n_max as u64).unwrap();
        for &n in fam.f[p - 1].iter().filter(|&&n| n <= n_max) {
            assert!(hits.contains(n), "p = {p}: n = {n} not visited");
        }
    }
    let r = verify_fhc_visits(&w, &x, &fam, n_max).unwrap();
    assert!(r.holds_on_window(), "{r:?}");
    // the zero vector never exceeds a threshold
    let z = SparseVec::zero(Space::Sup);
    let r = distributional_unbounded_scan(&w, &z, &[1.0], 100).unwrap();
    assert_eq!(r.quantities["thresholds"][0]["count"], 0);
}

#[test]
fn visit_witnesses_recheck() {
    let win = Window::unilateral(600);
    let e1 = BlockSet::new(win, vec![ApBlock::new(20, 300, 20).unwrap()]).unwrap();
    let mut fam = FhcFamily::with_power_of_two(vec![e1], 1.0, 2.0f64, Target::Fhc);
    // 2 on the positive side, 1/2 on the negative: passed coefficients decay
    let win = Window::bilateral(700);
    let ws: Vec<f64> = (win.lo + 1..=win.hi).map(|k| if k >= 1 { 2.0 } else { 0.5 }).collect();
    let w = WeightSeq::from_weights(Domain::Bilateral, win, &ws).unwrap();
    let x = build_fhc_vector(&w, &mut fam).unwrap();
    let r = verify_fhc_visits(&w, &x, &fam, 600).unwrap();
    assert!(r.holds_on_window(), "{r:?}");
    // a perturbed vector misses its target at the first visit
    let first = fam.f[0][0];
    let bumped = SparseVec::from_entries(
        x.log_entries().map(|(k, c)| (k, if k == first { c.value() + 1.0 } else { c.value() })),
        Space::Sup,
    );
    let r = verify_fhc_visits(&w, &bumped, &fam, 600).unwrap();
    assert!(r.is_violated());
    for wt in &r.witnesses {
        assert!(recheck_visit_witness(&w, &bumped, &fam, wt).unwrap());
    }
}

#[test]
fn interval_dataset_is_fhc_but_not_irregular() {
    let cfg = S6Config::new(Rational::from_integer(60), Rational::new(1, 100), 2, 1_000_000).unwrap();
    let sets = build_s6_sets(&cfg).unwrap();
    let w: WeightSeqF64 = build_s6_weight(&cfg).unwrap();
    let fam = FhcFamily::with_power_of_two(sets.families.clone(), 1.0, 2.0, Target::Fhc);
    let reps = verify_bilateral_conditions(&w, &fam, 2).unwrap();
    assert!(reps.iter().all(|r| r.holds_on_window()), "{reps:?}");
    // a sparse vector with x_k ≠ 0 has ‖B^n x‖ ≥ |x_k| on k + residual set
    let x = SparseVec::from_entries([(17, 0.3), (4000, -1.0)], Space::Sup);
    let r = distributional_unbounded_scan(&w, &x, &[0.3], 200_000).unwrap();
    assert!(r.quantities["min_lower_density"].as_f64().unwrap() >= 0.3);
}

#[test]
fn block_dataset_is_ufhc_with_vanishing_ceilings() {
    let st = build_s5(4, GrowthPolicy::default()).unwrap();
    let w: WeightSeqF64 = build_s5_weight(&st, st.window()).unwrap();
    let fam = FhcFamily::with_power_of_two((1..=4).map(|p| st.family(p)).collect(), 0.5, 2.0, Target::UFhc);
    let reps = verify_unilateral_conditions(&w, &fam, 4).unwrap();
    assert!(reps.iter().all(|r| r.holds_on_window()), "{reps:?}");
    let ceilings: Vec<f64> =
        (1..=4).map(|p| lower_density_obstruction(&st, p).unwrap().quantities["ceiling"].as_f64().unwrap()).collect();
    assert!(ceilings.windows(2).all(|c| c[1] < c[0]), "{ceilings:?}");
    // a_r/b_r ≤ 1/r
    for r in 1..=4 {
        assert!(st.a(r) as f64 / st.b(r) as f64 <= 1.0 / r as f64);
    }
}

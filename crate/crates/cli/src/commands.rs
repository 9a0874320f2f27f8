use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use shiftlab::constructions::s5::{build_s5, build_s5_weight, upper_density_table, verify_s5, GrowthPolicy};
use shiftlab::constructions::s6::{build_s6_sets, build_s6_weight, check_interval_algebra, check_separation, S6Config};
use shiftlab::criteria::{
    build_fhc_vector, check_fhc_coefficients, distributional_unbounded_scan, lp_series_test, necessary_condition_witness,
    overall, verify_bilateral_conditions_with, verify_fhc_visits, verify_unilateral_conditions_with, ConditionReport,
    FamilyLiteral, Witness, DEFAULT_BUDGET,
};
use shiftlab::diffset::{greedy_separated_set_with, syndetic_return_set_with, weighted_return_average, AlphaProfile, CorrelationScan};
use shiftlab::intset::{density_profile, linear_checkpoints, CountingSet, IntSet, SetLiteral, Window};
use shiftlab::shift::{log_distance_after, visit_set, weight_from_json, Space, SparseVec, VectorLiteral};
use shiftlab::{parse_rational, rational_to_f64, WeightSeqF64};

use crate::io::{emit, manifest, summarize, Csv, Failure, Input, Outcome, Output};
use crate::{AlphaKind, DensityArgs, Dest, DiffsetArgs, Mode, OrbitArgs, ReportArgs, S5Args, S6Args, ScanArgs, VerifyArgs, WitnessArgs};

fn output(d: &Dest) -> Output<'_> {
    Output { out: d.out.as_deref(), csv: d.csv.as_deref() }
}

/// Input problems name the file they came from.
fn in_file<T>(input: &Input, r: shiftlab::Result<T>) -> Outcome<T> {
    r.map_err(|e| {
        let f = Failure::from(e);
        Failure { code: f.code, message: format!("{}: {}", input.path.display(), f.message) }
    })
}

fn load_set(input: &Input) -> Outcome<IntSet> {
    let lit: SetLiteral = input.parse()?;
    in_file(input, lit.to_intset())
}

fn load_weights(input: &Input) -> Outcome<WeightSeqF64> {
    let v: Value = input.parse()?;
    in_file(input, weight_from_json(&v))
}

fn load_vector(input: &Input) -> Outcome<SparseVec<f64>> {
    let lit: VectorLiteral = input.parse()?;
    in_file(input, lit.to_vec())
}

pub fn density(a: &DensityArgs) -> Outcome<u8> {
    let input = Input::read(&a.set)?;
    let set = load_set(&input)?;
    let w = set.window();
    let cps = if a.checkpoints.is_empty() { linear_checkpoints(w.radius(), a.count) } else { a.checkpoints.clone() };
    let est = density_profile(&set, &cps)?;
    let mut csv = Csv::new();
    for c in &est.checkpoints {
        csv.push(c.n, rational_to_f64(&c.ratio), "density");
    }
    let report = json!({
        "window": w,
        "members": set.len(),
        "density": est,
        "lower_est": rational_to_f64(&est.lower_est),
        "upper_est": rational_to_f64(&est.upper_est),
        "max_gap": set.max_gap(w),
    });
    emit(&output(&a.dest), manifest("density", a, &[("set", &input)]), report, Some(csv))?;
    Ok(0)
}

pub fn diffset(a: &DiffsetArgs) -> Outcome<u8> {
    let input = Input::read(&a.set)?;
    let set = load_set(&input)?;
    let eps = parse_rational(&a.epsilon)?;
    let range = match a.krange.as_deref() {
        Some(&[lo, hi]) => Window::new(lo, hi)?,
        _ => Window::bilateral(set.window().radius().min(500)),
    };
    let scan = CorrelationScan::with_default_checkpoints(&set)?;
    let f = syndetic_return_set_with(&scan, eps, range)?;
    let g = greedy_separated_set_with(&scan, eps, range)?;

    let mut bound_w = Vec::new();
    if !g.bound_holds {
        bound_w.push(Witness::new("#R above (1 − δ(1 − ε))/(δε)", g.r.clone(), g.r.len() as f64, rational_to_f64(&g.bound)));
    }
    let cover_w: Vec<Witness> = g.uncovered.iter().map(|&k| Witness::new("k outside F + R", vec![k], 0.0, 1.0)).collect();
    let checks = vec![
        ConditionReport::from_witnesses("greedy-bound", bound_w).with("r", g.r.len()).with("bound", rational_to_f64(&g.bound)),
        ConditionReport::from_witnesses("covering", cover_w).with("covered_range", g.covered_range),
    ];

    let mut csv = Csv::new();
    for e in &f.delta_k {
        csv.push(e.k, rational_to_f64(&e.delta_k), "delta_k");
    }
    for k in f.f.members() {
        csv.push(k, 1.0, "F");
    }
    let mut report = json!({
        "delta": f.delta.to_string(),
        "delta_f64": rational_to_f64(&f.delta),
        "epsilon": eps.to_string(),
        "threshold": f.threshold.to_string(),
        "k_range": range,
        "checkpoints": f.checkpoints,
        "delta_k": f.delta_k,
        "F": f.f.members().collect::<Vec<_>>(),
        "max_gap": f.max_gap,
        "R": g.r,
        "bound": g.bound.to_string(),
        "bound_f64": rational_to_f64(&g.bound),
        "checks": checks,
    });
    if let Some(kind) = a.alpha {
        let r = set.window().radius();
        let alpha = AlphaProfile::from_fn(0, 2 * r, |n| match (kind, n) {
            (_, n) if n < 1 => 0.0,
            (AlphaKind::Harmonic, n) => 1.0 / n as f64,
            (AlphaKind::Geometric, n) => 0.5f64.powi(n.min(2000) as i32),
        });
        let avg = weighted_return_average(&set, &alpha, &[(r / 100).max(1), r])?;
        for &(n, v) in &avg.averages {
            csv.push(n, v, "return_average");
        }
        report["return_average"] = serde_json::to_value(&avg).expect("reports serialize");
    }
    let code = summarize(&checks.iter().collect::<Vec<_>>(), a.dest.out.is_none());
    emit(&output(&a.dest), manifest("diffset", a, &[("set", &input)]), report, Some(csv))?;
    Ok(code)
}

pub fn construct_s5(a: &S5Args) -> Outcome<u8> {
    let policy = GrowthPolicy { slack: parse_rational(&a.slack)? };
    let st = build_s5(a.depth, policy)?;
    let w: WeightSeqF64 = build_s5_weight(&st, st.window())?;
    let checks = verify_s5(&st);
    let mut csv = Csv::new();
    let mut table = Vec::new();
    for p in 1..=st.depth {
        for (r, n, ratio) in upper_density_table(&st, p) {
            csv.push(n, ratio, format!("E_{p}"));
            table.push(json!({"p": p, "r": r, "N": n, "ratio": ratio}));
        }
    }
    let report = json!({
        "state": st.to_json(),
        "weight": w.to_json(),
        "checks": checks,
        "upper_density": table,
    });
    let code = summarize(&checks.iter().collect::<Vec<_>>(), a.dest.out.is_none());
    emit(&output(&a.dest), manifest("construct s5", a, &[]), report, Some(csv))?;
    Ok(code)
}

pub fn construct_s6(a: &S6Args) -> Outcome<u8> {
    let cfg = S6Config::new(parse_rational(&a.a)?, parse_rational(&a.epsilon)?, a.pmax, a.window)?;
    let sets = build_s6_sets(&cfg)?;
    let w: WeightSeqF64 = build_s6_weight(&cfg)?;
    let mut ineq = cfg.check_inequalities();
    for warn in &sets.warnings {
        ineq = ineq.note(warn.clone());
    }
    let checks = vec![ineq, check_interval_algebra(&cfg), check_separation(&sets)];
    let mut csv = Csv::new();
    for (i, e) in sets.families.iter().enumerate() {
        csv.push(i as i64 + 1, e.len() as f64, "members");
    }
    let report = json!({
        "config": cfg,
        "budget": cfg.budget(),
        "sets": sets.to_json(),
        "weight": w.to_json(),
        "checks": checks,
    });
    let code = summarize(&checks.iter().collect::<Vec<_>>(), a.dest.out.is_none());
    emit(&output(&a.dest), manifest("construct s6", a, &[]), report, Some(csv))?;
    Ok(code)
}

pub fn verify(a: &VerifyArgs) -> Outcome<u8> {
    let (wi, fi) = (Input::read(&a.weights)?, Input::read(&a.family)?);
    let w = load_weights(&wi)?;
    let lit: FamilyLiteral = fi.parse()?;
    let mut fam = in_file(&fi, lit.to_family::<f64>())?;
    let pmax = a.pmax.unwrap_or(fam.pmax());
    if pmax == 0 || pmax > fam.pmax() {
        return Err(Failure::usage(format!("--pmax must lie in 1..={}", fam.pmax())));
    }
    let budget = a.budget.unwrap_or(DEFAULT_BUDGET);
    let mut reports = match a.mode {
        Mode::Bilateral => verify_bilateral_conditions_with(&w, &fam, pmax, budget)?,
        Mode::Unilateral => verify_unilateral_conditions_with(&w, &fam, pmax, budget)?,
    };
    if let Some(n) = a.visits {
        let x = build_fhc_vector(&w, &mut fam)?;
        reports.push(check_fhc_coefficients(&x, &fam));
        reports.push(verify_fhc_visits(&w, &x, &fam, n)?);
    }
    let report = json!({
        "mode": a.mode,
        "pmax": pmax,
        "reports": reports,
        "overall": overall(&reports),
    });
    let code = summarize(&reports.iter().collect::<Vec<_>>(), a.dest.out.is_none());
    emit(&output(&a.dest), manifest("verify", a, &[("weights", &wi), ("family", &fi)]), report, None)?;
    Ok(code)
}

pub fn orbit(a: &OrbitArgs) -> Outcome<u8> {
    let (wi, xi, yi) = (Input::read(&a.weights)?, Input::read(&a.vector)?, Input::read(&a.target)?);
    let w = load_weights(&wi)?;
    let (x, y) = (load_vector(&xi)?, load_vector(&yi)?);
    if !(a.tol > 0.0) {
        return Err(Failure::usage("--tol must be positive"));
    }
    let hits = visit_set(&w, &x, &y, a.tol, a.n)?;
    let est = density_profile(&hits, &linear_checkpoints(a.n as i64, 16))?;
    let mut csv = None;
    if a.dest.csv.is_some() {
        let target: Vec<_> = y.log_entries().collect();
        let mut t = Csv::new();
        for n in 0..=a.n {
            t.push(n as i64, log_distance_after(&w, &x, n, &target)?.exp(), "distance");
        }
        csv = Some(t);
    }
    let report = json!({
        "visits": hits.members().collect::<Vec<_>>(),
        "count": hits.len(),
        "density": est,
        "lower_est": rational_to_f64(&est.lower_est),
        "upper_est": rational_to_f64(&est.upper_est),
    });
    emit(&output(&a.dest), manifest("orbit", a, &[("weights", &wi), ("vector", &xi), ("target", &yi)]), report, csv)?;
    Ok(0)
}

pub fn witness(a: &WitnessArgs) -> Outcome<u8> {
    let (wi, si) = (Input::read(&a.weights)?, Input::read(&a.set)?);
    let w = load_weights(&wi)?;
    let set = load_set(&si)?;
    let mut reports = vec![necessary_condition_witness(&w, &set, a.p)?];
    let mut csv = Csv::new();
    if let Some(n) = a.series {
        let rep = lp_series_test(&w, a.p, n)?;
        for side in rep.quantities["sides"].as_array().into_iter().flatten() {
            let name = side["side"].as_str().unwrap_or("");
            for pt in side["partial_sums"].as_array().into_iter().flatten() {
                csv.push(pt[0].as_i64().unwrap_or(0), pt[1].as_f64().unwrap_or(f64::NAN), name);
            }
        }
        reports.push(rep);
    }
    let report = json!({"reports": reports, "overall": overall(&reports)});
    let code = summarize(&reports.iter().collect::<Vec<_>>(), a.dest.out.is_none());
    emit(&output(&a.dest), manifest("witness", a, &[("weights", &wi), ("set", &si)]), report, Some(csv))?;
    Ok(code)
}

/// Seeded sparse vectors: 1–8 entries with |x_k| ∈ [1, 10), the first at a
/// nonnegative index.
fn random_vectors(count: usize, seed: u64, spread: i64) -> Vec<SparseVec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.gen_range(1..=8);
            let entries: Vec<(i64, f64)> = (0..k)
                .map(|i| {
                    let idx = if i == 0 { rng.gen_range(0..=spread) } else { rng.gen_range(-spread / 10..=spread) };
                    let v: f64 = rng.gen_range(1.0..10.0);
                    (idx, if rng.gen_bool(0.5) { v } else { -v })
                })
                .collect();
            SparseVec::from_entries(entries, Space::Sup)
        })
        .collect()
}

pub fn scan(a: &ScanArgs) -> Outcome<u8> {
    let wi = Input::read(&a.weights)?;
    let w = load_weights(&wi)?;
    let xi = a.vector.as_deref().map(Input::read).transpose()?;
    let vectors = match (&xi, a.random) {
        (Some(i), _) => vec![load_vector(i)?],
        (None, Some(k)) if k > 0 && a.spread >= 0 => random_vectors(k, a.seed, a.spread),
        _ => return Err(Failure::usage("give --vector or --random K (K ≥ 1, --spread ≥ 0)")),
    };
    let mut reports = Vec::new();
    let mut csv = Csv::new();
    let mut min_lower = f64::INFINITY;
    for (i, x) in vectors.iter().enumerate() {
        let rep = distributional_unbounded_scan(&w, x, &a.thresholds, a.n)?;
        for row in rep.quantities["thresholds"].as_array().into_iter().flatten() {
            let c = row["threshold"].as_f64().unwrap_or(f64::NAN);
            csv.push(i as i64, row["lower_est"].as_f64().unwrap_or(f64::NAN), format!("lower@{c}"));
            csv.push(i as i64, row["upper_est"].as_f64().unwrap_or(f64::NAN), format!("upper@{c}"));
        }
        min_lower = min_lower.min(rep.quantities["min_lower_density"].as_f64().unwrap_or(f64::NAN));
        reports.push(rep);
    }
    let report = json!({
        "vectors": vectors.iter().map(|x| x.to_literal()).collect::<Vec<_>>(),
        "reports": reports,
        "min_lower_density": min_lower,
        "overall": overall(&reports),
    });
    let code = summarize(&reports.iter().collect::<Vec<_>>(), a.dest.out.is_none());
    let mut inputs = vec![("weights", &wi)];
    if let Some(i) = &xi {
        inputs.push(("vector", i));
    }
    emit(&output(&a.dest), manifest("scan", a, &inputs), report, Some(csv))?;
    Ok(code)
}

/// Every object carrying both `id` and `verdict`, in document order.
fn collect_conditions<'v>(v: &'v Value, out: &mut Vec<&'v Value>) {
    match v {
        Value::Object(m) => {
            if m.contains_key("id") && m.get("verdict").is_some_and(Value::is_string) {
                out.push(v);
                return;
            }
            for (k, child) in m {
                if k != "manifest" {
                    collect_conditions(child, out);
                }
            }
        }
        Value::Array(xs) => xs.iter().for_each(|x| collect_conditions(x, out)),
        _ => {}
    }
}

pub fn report(a: &ReportArgs) -> Outcome<u8> {
    let inputs = a.inputs.iter().map(|p| Input::read(p)).collect::<Outcome<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut csv = Csv::new();
    let mut code = 0;
    for input in &inputs {
        let v: Value = input.parse()?;
        let source = input.path.display().to_string();
        let mut found = Vec::new();
        collect_conditions(&v, &mut found);
        for c in found {
            let (id, verdict) = (c["id"].as_str().unwrap_or(""), c["verdict"].as_str().unwrap_or(""));
            let level = match verdict {
                "holds_on_window" => 0.0,
                "inconclusive" => 1.0,
                _ => 2.0,
            };
            if verdict == "violated" {
                code = 1;
            }
            let line = format!("{source}: {id}: {verdict}");
            if a.dest.out.is_some() {
                println!("{line}");
            } else {
                eprintln!("{line}");
            }
            csv.push(rows.len() as i64, level, format!("{source}:{id}"));
            rows.push(json!({
                "source": source,
                "command": v["manifest"]["command"],
                "id": id,
                "verdict": verdict,
                "witnesses": c["witnesses"],
            }));
        }
    }
    let named: Vec<(&str, &Input)> = inputs.iter().map(|i| ("report", i)).collect();
    let mut m = manifest("report", a, &[]);
    m["inputs"] = named.iter().map(|(_, i)| i.record()).collect::<Vec<_>>().into();
    let report = json!({"conditions": rows, "violated": code == 1});
    emit(&output(&a.dest), m, report, Some(csv))?;
    Ok(code)
}

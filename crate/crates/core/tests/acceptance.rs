//! Acceptance run: one PASS/FAIL line per criterion, sequential so the
//! wall-clock limits are measured without competing test threads.
//!
//! Expected values are computed here from first principles rather than
//! through the library helpers they check.

use std::collections::{BTreeMap, HashSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zonac_core::bench::generators::{bernstein_vazirani, cat, qft, random_regular};
use zonac_core::bench::{generate_benchmark, run_suite, stress, table1};
use zonac_core::fidelity::FidelityInputs;
use zonac_core::placement::{anneal, propose_sequence};
use zonac_core::router::{plan_transition, EventKind, MoveBatch};
use zonac_core::sim::{overlap, simulate_circuit, simulate_schedule, DEFAULT_QUBIT_CAP};
use zonac_core::{
    asap_schedule, compile, evaluate_fidelity, parse_circuit, ArchitectureConfig, Circuit,
    CompileOptions, GateDag, Occupancy, PhysicalParams, RouterParams, SaParams, Schedule, Site,
    TimingModel,
};

const SEVEN_QUBIT: &str =
    "qubits 7; cz 0 1; cz 2 3; cz 5 6; cz 0 5; cz 1 6; cz 3 6; cz 4 6; cz 0 1; cz 2 4; cz 3 5;";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.detail = format!("{} [{:.2} s]", out.detail, elapsed.as_secs_f64());
    if let Some(limit) = limit {
        if elapsed >= limit {
            out.pass = false;
            out.detail = format!("{} exceeds {:.0} s", out.detail, limit.as_secs_f64());
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let c = parse_circuit(SEVEN_QUBIT).unwrap();
    let expected: Vec<Vec<usize>> =
        vec![vec![0, 1, 2], vec![3, 4], vec![5, 7], vec![6, 9], vec![8]];
    let compiled = match compile(&c, &CompileOptions::default()) {
        Ok(x) => x,
        Err(e) => return outcome(false, format!("compile failed: {e}")),
    };
    let mut got = compiled.plan.stages.clone();
    for s in &mut got {
        s.sort_unstable();
    }
    outcome(got == expected, format!("stages {got:?}"))
}

fn criterion_2() -> Vec<(String, Outcome)> {
    let cases: Vec<(&str, Box<dyn Fn() -> Circuit>, usize)> = vec![
        ("Cat(35)", Box::new(|| cat(35)), 34),
        (
            "BV(14)",
            Box::new(|| bernstein_vazirani(14, &[true; 13]).unwrap()),
            13,
        ),
    ];
    cases
        .into_iter()
        .map(|(name, make, want)| {
            let out = timed(Some(Duration::from_secs(5)), || {
                match compile(&make(), &CompileOptions::default()) {
                    Ok(x) => outcome(
                        x.plan.len() == want && x.schedule.counters.n_stages == want,
                        format!("{name}: {} stages, want {want}", x.plan.len()),
                    ),
                    Err(e) => outcome(false, format!("{name}: {e}")),
                }
            });
            (name.to_string(), out)
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let mut worst = 1.0f64;
    let mut lines = Vec::new();
    for spec in table1()
        .into_iter()
        .filter(|s| s.n_qubits() <= DEFAULT_QUBIT_CAP)
    {
        let c = generate_benchmark(&spec).unwrap();
        let result = compile(&c, &CompileOptions::default())
            .map_err(|e| e.to_string())
            .and_then(|x| {
                let a = simulate_circuit(&c, DEFAULT_QUBIT_CAP).map_err(|e| e.to_string())?;
                let b =
                    simulate_schedule(&x.schedule, DEFAULT_QUBIT_CAP).map_err(|e| e.to_string())?;
                overlap(&a, &b).map_err(|e| e.to_string())
            });
        match result {
            Ok(ov) => {
                worst = worst.min(ov);
                lines.push(format!("{}={ov:.12}", spec.label()));
            }
            Err(e) => {
                worst = f64::NEG_INFINITY;
                lines.push(format!("{}: {e}", spec.label()));
            }
        }
    }
    let covered = lines.len() == 4;
    outcome(
        covered && worst >= 1.0 - 1e-9,
        format!("{} (min overlap {worst:.3e} vs 1-1e-9)", lines.join(", ")),
    )
}

/// Random injective placement of `n` qubits over every trap.
fn random_occupancy(rng: &mut ChaCha8Rng, config: &ArchitectureConfig, n: usize) -> Occupancy {
    let mut traps: Vec<usize> = (0..config.n_traps()).collect();
    traps.shuffle(rng);
    Occupancy::from_sites(traps[..n].iter().map(|&t| config.site_at(t)).collect()).unwrap()
}

fn sign(x: f64) -> i8 {
    if x > 1e-9 {
        1
    } else if x < -1e-9 {
        -1
    } else {
        0
    }
}

/// Two AOD moves may share a sweep only if their relative x and y orders
/// (including ties) are the same before and after.
fn order_preserved(batch: &MoveBatch) -> bool {
    for (i, a) in batch.moves.iter().enumerate() {
        for b in &batch.moves[i + 1..] {
            let (asx, aex, asy, aey) = a.vector;
            let (bsx, bex, bsy, bey) = b.vector;
            if sign(asx - bsx) != sign(aex - bex) || sign(asy - bsy) != sign(aey - bey) {
                return false;
            }
        }
    }
    true
}

fn min_clearance(batch: &MoveBatch, statics: &[(f64, f64)]) -> f64 {
    let mut min = f64::INFINITY;
    for m in &batch.moves {
        for w in m.path.windows(2) {
            let (a, b) = (w[0], w[1]);
            let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
            let steps = (len / 0.1).ceil().max(1.0) as usize;
            for s in 0..=steps {
                let t = s as f64 / steps as f64;
                let p = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
                for o in statics {
                    min = min.min(((p.0 - o.0).powi(2) + (p.1 - o.1).powi(2)).sqrt());
                }
            }
        }
    }
    min
}

fn criterion_4() -> Outcome {
    let config = ArchitectureConfig::default();
    let timing = TimingModel::default();
    let params = RouterParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut order, mut clearance, mut multiset, mut errors) = (0, 0, 0, 0);
    let mut batches_seen = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=40);
        let from = random_occupancy(&mut rng, &config, n);
        let to = random_occupancy(&mut rng, &config, n);
        let transition = match plan_transition(&from, &to, &config, &timing, &params) {
            Ok(t) => t,
            Err(_) => {
                errors += 1;
                continue;
            }
        };
        let mut sites: Vec<Site> = from.sites().to_vec();
        for batch in &transition.batches {
            batches_seen += 1;
            if !order_preserved(batch) {
                order += 1;
            }
            let movers: HashSet<usize> = batch.moves.iter().map(|m| m.qubit).collect();
            let statics: Vec<(f64, f64)> = (0..n)
                .filter(|q| !movers.contains(q))
                .map(|q| config.position(sites[q]))
                .collect();
            let c = min_clearance(batch, &statics);
            worst = worst.min(c);
            if c < 2.0 - 1e-9 {
                clearance += 1;
            }
            for m in &batch.moves {
                if sites[m.qubit] != m.pick_site {
                    multiset += 1;
                }
                sites[m.qubit] = m.drop_site;
            }
            let distinct: HashSet<Site> = sites.iter().copied().collect();
            if distinct.len() != n {
                multiset += 1;
            }
        }
        if sites != to.sites() {
            multiset += 1;
        }
    }
    outcome(
        order + clearance + multiset + errors == 0,
        format!(
            "{batches_seen} batches; order {order}, clearance {clearance} (min {worst:.2} µm), multiset {multiset}, routing errors {errors}"
        ),
    )
}

/// Atoms left exposed by each pulse, counted by replaying the schedule.
fn exposed_atoms(schedule: &Schedule) -> Result<usize, String> {
    let config = &schedule.architecture;
    let ent_y = config.ent_origin_y() - 1e-9;
    let mut sites: Vec<Site> = schedule.initial.sites().to_vec();
    let mut exposed = 0;
    for event in &schedule.events {
        match &event.kind {
            EventKind::Batch(batch) => {
                for m in &batch.moves {
                    sites[m.qubit] = m.drop_site;
                }
            }
            EventKind::RydbergPulse { stage, gates } => {
                let partner: BTreeMap<usize, usize> = gates
                    .iter()
                    .flat_map(|&(_, a, b)| [(a, b), (b, a)])
                    .collect();
                let pos: Vec<(f64, f64)> = sites.iter().map(|&s| config.position(s)).collect();
                for (q, &p) in pos.iter().enumerate() {
                    if p.1 < ent_y {
                        continue;
                    }
                    match partner.get(&q) {
                        None => exposed += 1,
                        Some(&o) => {
                            let d = ((p.0 - pos[o].0).powi(2) + (p.1 - pos[o].1).powi(2)).sqrt();
                            if d >= config.rydberg_radius {
                                return Err(format!(
                                    "stage {stage}: q{q} and q{o} are {d} µm apart"
                                ));
                            }
                        }
                    }
                    for (r, &o) in pos.iter().enumerate() {
                        let d = ((p.0 - o.0).powi(2) + (p.1 - o.1).powi(2)).sqrt();
                        if r != q && d < config.rydberg_radius && partner.get(&q) != Some(&r) {
                            return Err(format!("stage {stage}: q{q} blockades bystander q{r}"));
                        }
                    }
                }
            }
            EventKind::SingleQubitOps { .. } => {}
        }
    }
    Ok(exposed)
}

fn crosstalk_violation(label: &str, circuit: &Circuit, options: &CompileOptions) -> Option<String> {
    let x = match compile(circuit, options) {
        Ok(x) => x,
        Err(e) => return Some(format!("{label}: {e}")),
    };
    match exposed_atoms(&x.schedule) {
        Err(e) => Some(format!("{label}: {e}")),
        Ok(n) if n > 0 || x.schedule.counters.n_res != 0 || x.fidelity.crosstalk_term != 1.0 => {
            Some(format!(
                "{label}: exposed {n}, N_res {}, crosstalk {}",
                x.schedule.counters.n_res, x.fidelity.crosstalk_term
            ))
        }
        Ok(_) => None,
    }
}

fn criterion_5() -> Outcome {
    let mut violations = Vec::new();
    for spec in table1() {
        let c = generate_benchmark(&spec).unwrap();
        violations.extend(crosstalk_violation(
            &spec.label(),
            &c,
            &CompileOptions::default(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..100u64 {
        let d = rng.gen_range(2..=4);
        let mut n = rng.gen_range(d + 1..=50);
        if n * d % 2 == 1 {
            n -= 1;
        }
        let c = random_regular(n, d, i).unwrap();
        // Shortened anneal keeps 100 compiles tractable; crosstalk freedom
        // does not depend on the annealing length.
        let options = CompileOptions {
            sa: SaParams {
                seed: i,
                iterations_per_temperature: Some(5 * n),
                ..SaParams::default()
            },
            ..CompileOptions::default()
        };
        violations.extend(crosstalk_violation(
            &format!("RR(n={n},d={d},seed={i})"),
            &c,
            &options,
        ));
    }
    let detail = if violations.is_empty() {
        "7 benchmarks + 100 random-regular: zero exposed atoms".to_string()
    } else {
        violations.join("; ")
    };
    outcome(violations.is_empty(), detail)
}

/// Straight product of the model terms in linear space.
fn direct_product(inputs: &FidelityInputs, p: &PhysicalParams) -> f64 {
    let mut f = p.f1.powf(inputs.g1 as f64)
        * p.f2.powf(inputs.g2 as f64)
        * p.f_exc.powf(inputs.n_res as f64)
        * p.f_trans.powf(inputs.n_trans as f64);
    for &(t, transfers) in &inputs.qubits {
        f *= 1.0 - (t + transfers as f64 * p.t_trans_per_op) / p.t2;
    }
    f
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_rel = 0.0f64;
    let mut monotone_failures = 0;
    for _ in 0..1000 {
        let p = PhysicalParams {
            f1: rng.gen_range(0.99..0.99999),
            f2: rng.gen_range(0.95..0.9999),
            f_exc: rng.gen_range(0.95..0.9999),
            f_trans: rng.gen_range(0.99..0.9999),
            t2: rng.gen_range(1e5..1e7),
            t_trans_per_op: rng.gen_range(1.0..30.0),
        };
        let n = rng.gen_range(0..40);
        let inputs = FidelityInputs {
            g1: rng.gen_range(0..500),
            g2: rng.gen_range(0..300),
            n_res: rng.gen_range(0..50),
            n_trans: rng.gen_range(0..800),
            qubits: (0..n)
                .map(|_| (rng.gen_range(0.0..2e4), rng.gen_range(0..40)))
                .collect(),
        };
        let r = evaluate_fidelity(&inputs, &p).unwrap();
        let want = direct_product(&inputs, &p);
        worst_rel = worst_rel.max(((r.total - want) / want).abs());

        let mut bumped = Vec::new();
        for field in 0..4 {
            let mut i = inputs.clone();
            match field {
                0 => i.g1 += 1,
                1 => i.g2 += 1,
                2 => i.n_res += 1,
                _ => i.n_trans += 1,
            }
            bumped.push(i);
        }
        if n > 0 {
            let q = rng.gen_range(0..n);
            let mut i = inputs.clone();
            i.qubits[q].1 += 1;
            bumped.push(i);
            let mut i = inputs.clone();
            i.qubits[q].0 += 1.0;
            bumped.push(i);
        }
        for b in bumped {
            if evaluate_fidelity(&b, &p).unwrap().total >= r.total {
                monotone_failures += 1;
            }
        }
    }
    let empty = evaluate_fidelity(&FidelityInputs::default(), &PhysicalParams::default())
        .unwrap()
        .total;
    outcome(
        worst_rel <= 1e-12 && empty == 1.0 && monotone_failures == 0,
        format!(
            "max relative error {worst_rel:.2e} (tol 1e-12), empty = {empty}, monotonicity failures {monotone_failures}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let c = qft(10);
    let plan = asap_schedule(&c, &GateDag::build(&c));
    let config = ArchitectureConfig::sized_for(c.n_qubits, plan.max_width());
    let timing = TimingModel::default();
    let proposal = propose_sequence(&c, &plan, &config, true).unwrap();
    let mut trace_failures = 0;
    let mut cost_failures = 0;
    let mut probability_errors = 0;
    let mut t_initial = 0.0f64;
    let mut records = Vec::new();
    for seed in 0..20 {
        let params = SaParams {
            seed,
            audit: true,
            ..SaParams::default()
        };
        let out = anneal(&c, &plan, &proposal, &config, &timing, &params).unwrap();
        if out.best_trace.windows(2).any(|w| w[1] > w[0]) {
            trace_failures += 1;
        }
        if out.final_cost.total > out.initial_cost.total {
            cost_failures += 1;
        }
        for r in &out.audit {
            let p = (-r.delta / r.temperature).exp().min(1.0);
            if (p - r.probability).abs() > 1e-12 {
                probability_errors += 1;
            }
        }
        t_initial = out.t_initial;
        records.extend(out.audit);
    }
    // Ten log-spaced temperature bins over the annealing range.
    const BINS: usize = 10;
    let mut sums = [(0usize, 0.0f64, 0.0f64, 0usize); BINS];
    for r in &records {
        let depth = (t_initial / r.temperature).log10() / 3.0;
        let bin = ((depth * BINS as f64) as usize).min(BINS - 1);
        let s = &mut sums[bin];
        s.0 += r.accepted as usize;
        s.1 += r.probability;
        s.2 += r.probability * (1.0 - r.probability);
        s.3 += 1;
    }
    let mut bin_failures = Vec::new();
    for (i, &(observed, mean, var, count)) in sums.iter().enumerate() {
        if count == 0 {
            continue;
        }
        if (observed as f64 - mean).abs() > 3.0 * var.sqrt() + 1e-9 {
            bin_failures.push(format!(
                "bin {i}: {observed} accepted vs {mean:.1} ± {:.1}",
                3.0 * var.sqrt()
            ));
        }
    }
    let pass = trace_failures == 0
        && cost_failures == 0
        && probability_errors == 0
        && bin_failures.is_empty();
    let used = sums.iter().filter(|s| s.3 > 0).count();
    outcome(
        pass,
        format!(
            "20 runs, {} Metropolis trials in {used} bins; trace {trace_failures}, cost {cost_failures}, probability {probability_errors}, bins [{}]",
            records.len(),
            bin_failures.join("; ")
        ),
    )
}

fn criterion_8() -> Outcome {
    let c = parse_circuit(SEVEN_QUBIT).unwrap();
    let with = compile(&c, &CompileOptions::default()).unwrap();
    let without = compile(
        &c,
        &CompileOptions {
            reuse: false,
            ..CompileOptions::default()
        },
    )
    .unwrap();
    let (a, b) = (
        with.schedule.counters.n_trans,
        without.schedule.counters.n_trans,
    );
    outcome(a < b, format!("N_trans {a} with reuse, {b} without"))
}

fn criterion_9() -> Outcome {
    let specs = stress();
    let result = run_suite(&specs, &CompileOptions::default(), &[0]);
    let failed: Vec<String> = result
        .records
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{}: {e}", r.spec.label())))
        .collect();
    let fallbacks = result.records.iter().filter(|r| r.fell_back).count();
    outcome(
        failed.is_empty() && result.records.len() == specs.len(),
        format!(
            "{} compiles, {} failed, {fallbacks} fell back to the greedy placement {}",
            result.records.len(),
            failed.len(),
            failed.join("; ")
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(String, Outcome)> = Vec::new();
    let mut run = |name: String, out: Outcome| {
        println!(
            "criterion {name}: {} {}",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
        results.push((name, out));
    };
    run("1".into(), timed(Some(Duration::from_secs(1)), criterion_1));
    for (label, out) in criterion_2() {
        run(format!("2 {label}"), out);
    }
    run(
        "3".into(),
        timed(Some(Duration::from_secs(60)), criterion_3),
    );
    run(
        "4".into(),
        timed(Some(Duration::from_secs(120)), criterion_4),
    );
    run("5".into(), timed(None, criterion_5));
    run("6".into(), timed(None, criterion_6));
    run("7".into(), timed(None, criterion_7));
    run("8".into(), timed(None, criterion_8));
    run(
        "9".into(),
        timed(Some(Duration::from_secs(600)), criterion_9),
    );

    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, o)| !o.pass)
        .map(|(n, _)| n.as_str())
        .collect();
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing {failed:?}");
        ExitCode::FAILURE
    }
}

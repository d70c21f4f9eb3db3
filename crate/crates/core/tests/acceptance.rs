//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use netdecomp::cluster::{validate_cover, validate_decomposition, validate_mis};
use netdecomp::covers::{
    cover_from_decomposition, cover_mst, kruskal_oracle, mst_radius, mst_radius_apsp,
    mst_radius_exhaustive, MstConfig,
};
use netdecomp::graph::{generate_graph, with_random_weights, Graph, GraphModel};
use netdecomp::mis::shatter_check;
use netdecomp::mis::{exchange_validity, mis_full, run_ghaffari, run_lanes, MisConfig, MisVariant};
use netdecomp::netdecomp::{decompose, DetConfig, DetOutput, Mode};
use netdecomp::refine::{
    ball_grow_refine, ball_separation, carve_decompose, carve_step, gap_probability_check,
    intermediate_decomposition, sample_exp, to_fixed, CarveConfig, CarveParams, Outcome,
};
use netdecomp::sim::{node_rng, RoundStats, SimConfig};
use netdecomp::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Budget breaches seen anywhere: strict errors plus recorded violations.
static BUDGET: AtomicUsize = AtomicUsize::new(0);
/// Strict-mode runs observed.
static STRICT_RUNS: AtomicUsize = AtomicUsize::new(0);

fn watch<T>(r: &Result<T>, stats: impl Fn(&T) -> Option<&RoundStats>) {
    STRICT_RUNS.fetch_add(1, Ordering::Relaxed);
    match r {
        Err(Error::Budget { .. }) => {
            BUDGET.fetch_add(1, Ordering::Relaxed);
        }
        Ok(x) => {
            if let Some(s) = stats(x) {
                BUDGET.fetch_add(s.budget_violations.len(), Ordering::Relaxed);
            }
        }
        Err(_) => {}
    }
}

fn model_gnp(n: usize, p: f64) -> GraphModel {
    GraphModel::Gnp {
        n,
        p,
        connected: false,
    }
}

fn gen(model: &GraphModel, seed: u64) -> Graph {
    generate_graph(model, seed).unwrap()
}

fn strict(g: &Graph, seed: u64) -> SimConfig {
    let s = SimConfig::for_graph(g).with_seed(seed);
    assert!(s.strict);
    s
}

fn det(g: &Graph, k: u32, seed: u64) -> Result<DetOutput> {
    let r = decompose(
        g,
        &DetConfig {
            k,
            mode: Mode::Simulated,
            sim: strict(g, seed),
        },
        None,
    );
    watch(&r, |o| Some(&o.stats));
    r
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// Instances shared by the first two criteria.
fn det_instances() -> Vec<(String, Graph, u32)> {
    (0..100u64)
        .map(|i| {
            let model = match i % 10 {
                0..=2 => model_gnp(200, 0.02),
                3 | 4 => model_gnp(500, 0.01),
                5 => model_gnp(2000, 0.003),
                6 | 7 => GraphModel::Grid {
                    rows: 8 + (i as usize % 7),
                    cols: 10,
                },
                _ => GraphModel::Path {
                    n: 50 + 30 * (i as usize % 5),
                },
            };
            let k = [1, 2, 4][i as usize % 3];
            (format!("{model:?}/seed {i}/k {k}"), gen(&model, i), k)
        })
        .collect()
}

fn c1_c2() -> (Verdict, Verdict) {
    let start = Instant::now();
    let mut invalid = Vec::new();
    let mut a_fail = 0;
    let mut c_fail = 0;
    let mut phases = 0;
    for (name, g, k) in det_instances() {
        match det(&g, k, 0) {
            Ok(out) => {
                let rep = validate_decomposition(&g, &out.decomposition);
                if !rep.valid {
                    invalid.push(format!("{name}: {}", rep.failures.join("; ")));
                }
                let n0 = out.log.n_initial as u128;
                let d = out.log.d as u128;
                for (i, p) in out.log.phases.iter().enumerate() {
                    phases += 1;
                    let di = d.saturating_pow(i as u32 + 1);
                    if (p.cluster_count as u128).saturating_mul(di) > n0 {
                        a_fail += 1;
                    }
                    if p.max_overlap as u128 > p.overlap_bound {
                        c_fail += 1;
                    }
                }
            }
            Err(e) => invalid.push(format!("{name}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let c1 = verdict(
        invalid.is_empty() && secs < 600.0,
        format!(
            "100 graphs, {} invalid, {secs:.1}s{}",
            invalid.len(),
            invalid
                .first()
                .map(|s| format!(", first: {s}"))
                .unwrap_or_default()
        ),
    );
    let c2 = verdict(
        a_fail == 0 && c_fail == 0 && phases > 0,
        format!("{phases} phase logs, cluster-count breaches {a_fail}, overlap breaches {c_fail}"),
    );
    (c1, c2)
}

fn c3() -> Verdict {
    let mut differ = 0;
    let mut errors = Vec::new();
    let mut total = 0;
    let mut worst = (0usize, 0usize, 0u32, 0u32);
    for (i, (name, g, k)) in det_instances().into_iter().enumerate().step_by(4) {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        let mut ids: Vec<u128> = Vec::with_capacity(g.n());
        let mut seen = std::collections::HashSet::new();
        while ids.len() < g.n() {
            let x: u128 = rng.gen();
            if seen.insert(x) {
                ids.push(x);
            }
        }
        let big = g
            .clone()
            .with_ids(ids)
            .and_then(|h| h.with_id_bits(128))
            .unwrap();
        total += 1;
        let (a, b) = match (det(&g, k, 0), det(&big, k, 0)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                errors.push(format!("{name}: {e}"));
                continue;
            }
        };
        let ra = validate_decomposition(&g, &a.decomposition);
        let rb = validate_decomposition(&big, &b.decomposition);
        if !rb.valid {
            errors.push(format!("{name}: invalid with 128-bit ids"));
        }
        if ra.colors != rb.colors || ra.max_weak_diameter != rb.max_weak_diameter {
            differ += 1;
            if rb.colors.abs_diff(ra.colors) > worst.1.abs_diff(worst.0) {
                worst = (
                    ra.colors,
                    rb.colors,
                    ra.max_weak_diameter,
                    rb.max_weak_diameter,
                );
            }
        }
    }
    verdict(
        differ == 0 && errors.is_empty(),
        format!(
            "{total} graphs remapped to 128-bit ids: {differ} differ in colors or weak diameter \
             (largest color change {} -> {}, diameter {} -> {}), {} errors{}",
            worst.0,
            worst.1,
            worst.2,
            worst.3,
            errors.len(),
            errors
                .first()
                .map(|s| format!(", first: {s}"))
                .unwrap_or_default()
        ),
    )
}

fn c4() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [64usize, 256] {
        let h = gen(&model_gnp(n, 4.0 / n as f64), 7);
        let params = CarveParams::for_size(n);
        let active = vec![true; n];
        let mut wins = 0;
        for seed in 0..200u64 {
            let sources: Vec<(usize, i64)> = (0..n)
                .map(|v| {
                    let mut rng = node_rng(seed, h.id(v), 0);
                    (v, to_fixed(sample_exp(params.beta, &mut rng)))
                })
                .collect();
            let max_shift = sources.iter().map(|s| s.1).max().unwrap();
            let step = carve_step(&h, &active, &sources, params.cap_fixed()).unwrap();
            let reached = (0..n).filter(|&v| step.owner(v).is_some()).count();
            let clustered = step
                .outcome
                .iter()
                .filter(|o| matches!(o, Outcome::Clustered(_)))
                .count();
            if params.is_success(max_shift, reached, clustered) {
                wins += 1;
            }
        }
        let freq = wins as f64 / 200.0;
        ok &= freq >= 0.35;
        // full procedure on the same graph
        let mut full = Vec::new();
        for seed in 0..3u64 {
            let inter = intermediate_decomposition(&h, params.separation(), Mode::Central);
            let res = inter.and_then(|inter| {
                carve_decompose(&h, &inter, &CarveConfig::for_network(n, h.id_bits(), seed))
            });
            full.push(match res {
                Ok(out) => {
                    let rep = validate_decomposition(&h, &out.decomposition);
                    let good = rep.valid
                        && rep.colors <= out.phases.len()
                        && out.max_strong_diameter as u64 <= 2 * params.cap_d;
                    ok &= good;
                    if good {
                        "valid".to_string()
                    } else {
                        "invalid".to_string()
                    }
                }
                Err(e) => {
                    ok = false;
                    format!("{e}")
                }
            });
        }
        parts.push(format!(
            "N={n}: single-run success {freq:.3} (s={}, beta={}, cap={}), full runs [{}]",
            params.s,
            params.beta,
            params.cap_d,
            full.join(", ")
        ));
    }
    verdict(ok, parts.join("; "))
}

fn c5() -> Verdict {
    let profiles: [&[f64]; 5] = [
        &[0.0, 0.0],
        &[0.0, 1.0],
        &[0.0, 1.0, 2.0, 3.0],
        &[0.0; 8],
        &[0.0, 2.0, 5.0, 1.0, 1.0, 3.0, 7.0],
    ];
    let mut ok = true;
    let mut worst: f64 = f64::NEG_INFINITY;
    for beta in [0.05, 0.1, 0.5] {
        for (i, ds) in profiles.iter().enumerate() {
            let est = gap_probability_check(ds, beta, 100_000, 31 + i as u64).unwrap();
            let slack = (est.estimate - beta) / est.sigma;
            worst = worst.max(slack);
            ok &= est.estimate <= beta + 3.0 * est.sigma;
        }
    }
    verdict(
        ok,
        format!("15 estimates at 1e5 trials, worst excess {worst:.2} sigma"),
    )
}

fn mis_run(g: &Graph, cfg: &MisConfig) -> Result<netdecomp::mis::MisResult> {
    let r = mis_full(g, cfg);
    watch(&r, |o| Some(&o.stats));
    r
}

fn c6() -> Verdict {
    let mut bad = Vec::new();
    let mut pipelined = 0;
    let mut runs = 0;
    for i in 0..100u64 {
        let (g, pre) = if i % 5 < 2 {
            (gen(&model_gnp(2000, 0.01), i), None)
        } else {
            (gen(&model_gnp(300, 0.02), i), Some(1 + i as usize % 3))
        };
        for variant in [MisVariant::Fast, MisVariant::Slow] {
            let mut cfg = MisConfig::new(&g, variant, i);
            cfg.preshatter_iterations = pre;
            runs += 1;
            match mis_run(&g, &cfg) {
                Ok(r) => {
                    if !r.phases.percolor.is_empty() {
                        pipelined += 1;
                    }
                    if let Err(e) = validate_mis(&g, &r.nodes) {
                        bad.push(format!("seed {i} {variant:?}: {e}"));
                    }
                }
                Err(e) => bad.push(format!("seed {i} {variant:?}: {e}")),
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{runs} runs on 100 graphs ({pipelined} went past the first stage), {} failed{}",
            bad.len(),
            bad.first()
                .map(|s| format!(", first: {s}"))
                .unwrap_or_default()
        ),
    )
}

fn c7() -> Verdict {
    let grid = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0];
    let mut fracs = vec![Vec::new(); grid.len()];
    let mut deltas = Vec::new();
    for seed in 0..50u64 {
        let g = gen(&model_gnp(2000, 0.005), seed);
        let delta = g.max_degree();
        deltas.push(delta);
        let run = run_ghaffari(&g, 400, seed, &strict(&g, seed));
        watch(&run, |r| Some(&r.stats));
        let run = run.unwrap();
        for (j, &c) in grid.iter().enumerate() {
            let t = (c * ((delta as f64).log2() + 10f64.log2())).ceil() as usize;
            let open = run
                .decided_at
                .iter()
                .filter(|d| d.map_or(true, |x| x >= t))
                .count();
            fracs[j].push(open as f64 / g.n() as f64);
        }
    }
    let mut chosen = None;
    let mut table = Vec::new();
    for (j, &c) in grid.iter().enumerate() {
        let m = fracs[j].len() as f64;
        let mean = fracs[j].iter().sum::<f64>() / m;
        let var = fracs[j].iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let sigma = (var / m).sqrt();
        table.push(format!("c1={c}: {mean:.4}"));
        if chosen.is_none() && mean <= 0.1 + 3.0 * sigma {
            chosen = Some(c);
        }
    }
    verdict(
        chosen.is_some(),
        format!(
            "gnp(2000, 0.005) x50, max degree {}..{}, smallest c1 = {:?}; undecided [{}]",
            deltas.iter().min().unwrap(),
            deltas.iter().max().unwrap(),
            chosen,
            table.join(", ")
        ),
    )
}

fn c8() -> Verdict {
    let c1 = 1.0;
    let mut fitted = Vec::new();
    let mut parts = Vec::new();
    for n in [2000usize, 8000] {
        let mut best: f64 = 0.0;
        let mut mean = 0.0;
        let mut largest = 0;
        for seed in 0..50u64 {
            let g = gen(&model_gnp(n, 10.0 / n as f64), seed);
            let delta = g.max_degree();
            let iters = (c1 * ((delta as f64).log2() + 1.0)).ceil() as usize;
            let run = run_ghaffari(&g, iters, seed, &strict(&g, seed));
            watch(&run, |r| Some(&r.stats));
            let run = run.unwrap();
            let rep = shatter_check(&g, &run.undecided, delta);
            best = best.max(rep.fitted_c);
            mean += rep.fitted_c / 50.0;
            largest = largest.max(rep.max_component);
        }
        fitted.push(best);
        parts.push(format!(
            "n={n}: C={best:.3e} (mean {mean:.3e}, largest component {largest})"
        ));
    }
    let (a, b) = (fitted[0], fitted[1]);
    let stable = a > 0.0 && b > 0.0 && (a - b).abs() <= 0.2 * a.max(b);
    verdict(
        stable,
        format!(
            "c1={c1}, p=10/n, 50 seeds each: {}; ratio {:.3}",
            parts.join("; "),
            if a > 0.0 { b / a } else { f64::NAN }
        ),
    )
}

fn c9() -> Verdict {
    let mut bad = Vec::new();
    let mut worst_slack = i64::MAX;
    for i in 0..50u64 {
        let k = 1 + (i % 3) as u32;
        let model = match i % 4 {
            0 => model_gnp(150, 0.03),
            1 => GraphModel::Grid {
                rows: 8,
                cols: 8 + i as usize % 5,
            },
            2 => GraphModel::Path { n: 40 + i as usize },
            _ => GraphModel::Tree { n: 100 },
        };
        let g = gen(&model, i);
        let out = det(&g, 2 * k, 0).and_then(|d| {
            let colors = d.decomposition.colors_used();
            cover_from_decomposition(&g, k, &d.decomposition).map(|c| (colors, c))
        });
        match out {
            Ok((colors, c)) => {
                let rep = validate_cover(&g, &c.cover);
                let bound = c.input_diameter + 2 * k;
                worst_slack = worst_slack.min(bound as i64 - rep.diameter as i64);
                if !rep.valid || rep.sparsity > colors || rep.diameter > bound {
                    bad.push(format!(
                        "{model:?} k={k}: valid {} sparsity {} colors {colors} diameter {} bound {bound}",
                        rep.valid, rep.sparsity, rep.diameter
                    ));
                }
            }
            Err(e) => bad.push(format!("{model:?} k={k}: {e}")),
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "50 covers, {} failed, smallest diameter slack {worst_slack}{}",
            bad.len(),
            bad.first()
                .map(|s| format!(", first: {s}"))
                .unwrap_or_default()
        ),
    )
}

fn c10() -> Verdict {
    let mut bad = Vec::new();
    let mut instances: Vec<Graph> = (0..50u64)
        .map(|i| {
            let n = 50 + 5 * i as usize;
            let g = gen(
                &GraphModel::Gnp {
                    n,
                    p: 4.0 / n as f64,
                    connected: true,
                },
                i,
            );
            with_random_weights(g, i).unwrap()
        })
        .collect();
    for i in 0..10u64 {
        let g = gen(
            &GraphModel::Gnp {
                n: 9,
                p: 0.4,
                connected: true,
            },
            500 + i,
        );
        instances.push(with_random_weights(g, i).unwrap());
    }
    let w = |x: i64| num_rational::Ratio::from_integer(x);
    let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)])
        .and_then(|g| g.with_weights(&[(0, 1, w(1)), (1, 2, w(2)), (2, 3, w(3)), (3, 0, w(4))]))
        .unwrap();
    instances.push(c4);
    let mut exhaustive = 0;
    for (i, g) in instances.iter().enumerate() {
        let r = cover_mst(g, &MstConfig::new(g));
        let r = match r {
            Ok(r) => r,
            Err(e) => {
                bad.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        if r.tree != kruskal_oracle(g).unwrap() || !r.matches_oracle {
            bad.push(format!("instance {i}: tree differs from Kruskal"));
        }
        let bfs = mst_radius(g, None).unwrap();
        let apsp = mst_radius_apsp(g).unwrap();
        if bfs != Some(apsp) || r.mu != apsp.max(1) {
            bad.push(format!(
                "instance {i}: radius {bfs:?} vs {apsp}, used {}",
                r.mu
            ));
        }
        if g.edge_count() <= 20 {
            exhaustive += 1;
            if mst_radius_exhaustive(g).unwrap() != apsp {
                bad.push(format!("instance {i}: exhaustive radius differs"));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{} weighted graphs ({exhaustive} also checked exhaustively), {} failed{}",
            instances.len(),
            bad.len(),
            bad.first()
                .map(|s| format!(", first: {s}"))
                .unwrap_or_default()
        ),
    )
}

fn c11() -> Verdict {
    let g = gen(&model_gnp(2000, 0.005), 3);
    let cfg = strict(&g, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = Vec::new();
    let everyone = vec![true; g.n()];
    for lanes in [1usize, 7, 22, cfg.msg_bits] {
        let run = run_lanes(&g, &everyone, lanes, 6, 3, false, &cfg);
        watch(&run, |r| Some(&r.1));
        match run {
            Ok((_, stats)) if stats.max_bits_per_edge_round == lanes => {}
            Ok((_, stats)) => mismatches.push(format!(
                "{lanes} lanes sent {} bits",
                stats.max_bits_per_edge_round
            )),
            Err(e) => mismatches.push(format!("{lanes} lanes: {e}")),
        }
        let membership: Vec<Option<u128>> = (0..g.n()).map(|_| Some(rng.gen())).collect();
        let ex = exchange_validity(&g, &membership, lanes, &cfg);
        watch(&ex, |r| Some(&r.1));
        match ex {
            Ok((_, stats)) if stats.max_bits_per_edge_round == lanes => {}
            Ok((_, stats)) => mismatches.push(format!(
                "exchange of {lanes} lanes sent {} bits",
                stats.max_bits_per_edge_round
            )),
            Err(e) => mismatches.push(format!("exchange of {lanes} lanes: {e}")),
        }
    }
    // one lane over the budget must be refused
    let over = run_lanes(&g, &everyone, cfg.msg_bits + 1, 1, 3, false, &cfg);
    let refused = matches!(over, Err(Error::Budget { .. }));
    // per-color rounds carry every lane and stay within budget
    let small = gen(&model_gnp(300, 0.02), 5);
    let mut mcfg = MisConfig::new(&small, MisVariant::Fast, 5);
    mcfg.preshatter_iterations = Some(1);
    let mut color_bits = 0;
    match mis_run(&small, &mcfg) {
        Ok(r) => {
            for p in &r.phases.percolor {
                color_bits = color_bits.max(p.max_bits_per_edge_round);
                if p.max_bits_per_edge_round < p.lanes
                    || p.max_bits_per_edge_round > mcfg.sim.msg_bits
                {
                    mismatches.push(format!(
                        "color {} used {} bits for {} lanes, budget {}",
                        p.color, p.max_bits_per_edge_round, p.lanes, mcfg.sim.msg_bits
                    ));
                }
            }
        }
        Err(e) => mismatches.push(format!("pipeline: {e}")),
    }
    let breaches = BUDGET.load(Ordering::Relaxed);
    let runs = STRICT_RUNS.load(Ordering::Relaxed);
    verdict(
        breaches == 0 && refused && mismatches.is_empty(),
        format!(
            "{runs} strict runs, {breaches} budget breaches; lanes 1/7/22/{} measured exactly: {:?}; \
             over-budget run refused: {refused}; widest per-color round {color_bits} bits",
            cfg.msg_bits,
            mismatches
        ),
    )
}

fn c12() -> Verdict {
    let g = gen(&model_gnp(150, 0.04), 11);
    let w = with_random_weights(
        gen(
            &GraphModel::Gnp {
                n: 80,
                p: 0.06,
                connected: true,
            },
            2,
        ),
        2,
    )
    .unwrap();
    let carve_h = gen(&GraphModel::Grid { rows: 6, cols: 6 }, 0);
    fn json<T: serde::Serialize>(r: Result<T>) -> String {
        match r {
            Ok(x) => serde_json::to_string(&x).unwrap(),
            Err(e) => format!("error: {e}"),
        }
    }
    let run = || {
        let mut out = Vec::new();
        out.push(json(det(&g, 2, 0)));
        for variant in [MisVariant::Fast, MisVariant::Slow] {
            let mut cfg = MisConfig::new(&g, variant, 4);
            cfg.preshatter_iterations = Some(1);
            out.push(json(mis_full(&g, &cfg)));
        }
        let sep = ball_separation(g.n());
        out.push(json(
            intermediate_decomposition(&g, sep, Mode::Central)
                .and_then(|i| ball_grow_refine(&g, &i)),
        ));
        let params = CarveParams::for_size(carve_h.n());
        out.push(json(
            intermediate_decomposition(&carve_h, params.separation(), Mode::Central).and_then(
                |i| {
                    carve_decompose(
                        &carve_h,
                        &i,
                        &CarveConfig::for_network(carve_h.n(), carve_h.id_bits(), 9),
                    )
                },
            ),
        ));
        out.push(json(
            det(&g, 2, 0).and_then(|d| cover_from_decomposition(&g, 1, &d.decomposition)),
        ));
        out.push(json(cover_mst(&w, &MstConfig::new(&w))));
        out
    };
    let pool = |t: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .unwrap()
            .install(run)
    };
    let one = pool(1);
    let four = pool(4);
    let again = pool(4);
    let same = one == four && one == again;
    let errors = one.iter().filter(|s| s.starts_with("error")).count();
    verdict(
        same,
        format!(
            "{} pipelines serialized under 1 and 4 threads and rerun: identical {same} ({errors} ended in errors, compared as text)",
            one.len()
        ),
    )
}

fn guarded(f: impl FnOnce() -> Verdict) -> Verdict {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        verdict(false, format!("panicked: {msg}"))
    })
}

fn report(id: usize, name: &str, v: &Verdict, secs: f64) {
    let tag = if v.pass { "PASS" } else { "FAIL" };
    println!("criterion {id} [{name}]: {tag} ({secs:.1}s) {}", v.detail);
}

fn main() {
    let mut failed = Vec::new();
    let mut record = |id: usize, name: &str, v: Verdict, secs: f64| {
        report(id, name, &v, secs);
        if !v.pass {
            failed.push(id);
        }
    };
    let t = Instant::now();
    let (v1, v2) = catch_unwind(c1_c2).unwrap_or_else(|_| {
        (
            verdict(false, "panicked".into()),
            verdict(false, "panicked".into()),
        )
    });
    let secs = t.elapsed().as_secs_f64();
    record(1, "deterministic decomposition validity", v1, secs);
    record(2, "phase invariants", v2, 0.0);
    let rest: [(usize, &str, fn() -> Verdict); 10] = [
        (3, "identifier width independence", c3),
        (4, "single carving run success", c4),
        (5, "top-two gap probability", c5),
        (6, "MIS validity", c6),
        (7, "undecided fraction after early iterations", c7),
        (8, "shattering constant stability", c8),
        (9, "neighborhood covers", c9),
        (10, "cover MST agrees with Kruskal", c10),
        (11, "strict congestion budget", c11),
        (12, "determinism", c12),
    ];
    for (id, name, f) in rest {
        let t = Instant::now();
        let v = guarded(f);
        record(id, name, v, t.elapsed().as_secs_f64());
    }
    if failed.is_empty() {
        println!("acceptance: all 12 criteria PASS");
    } else {
        println!("acceptance: FAIL on criteria {failed:?}");
        std::process::exit(1);
    }
}

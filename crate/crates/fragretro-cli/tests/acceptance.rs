//! Acceptance gate: one test per engine-level guarantee. Each prints a
//! single [PASS]/[FAIL] line with its measurements; wall-clock sensitive
//! tests serialize on a shared lock so they never time each other.

use std::collections::HashSet;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use fragretro::elements::Element;
use fragretro::engine::{run, EngineConfig, MemberSet, RetroResult, TerminationReason};
use fragretro::fragmenter::{combination_pattern, fragment, FragmentationMode, ModeRegistry};
use fragretro::matcher::{is_isomorphic, match_substructure};
use fragretro::molgraph::{parse_smiles, write_smiles, Molecule};
use fragretro::oracle::{all_connected_subsets, brute_force_retro, naive_match};
use fragretro::screen::{fingerprint, screen_candidates, FpParams};
use fragretro::stock::{build_stock_from_text, load_cache, save_cache, Stock, StockEntry};
use fragretro::synth;
use fragretro_cli::render_retro;

use rand::Rng;

static TIMING: Mutex<()> = Mutex::new(());

fn timing_guard() -> MutexGuard<'static, ()> {
    TIMING.lock().unwrap_or_else(std::sync::PoisonError::into_inner)
}

fn mode() -> &'static dyn FragmentationMode {
    static REG: OnceLock<ModeRegistry> = OnceLock::new();
    REG.get_or_init(ModeRegistry::builtin)
        .get("brics_like")
        .expect("builtin mode")
}

fn report(id: &str, pass: bool, detail: &str) {
    println!("[{}] {id} — {detail}", if pass { "PASS" } else { "FAIL" });
}

fn push_line(line: String, lines: &mut Vec<String>, seen: &mut HashSet<String>) {
    if seen.insert(line.clone()) {
        lines.push(line);
    }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

// ---------------------------------------------------------------- corpora

struct EquivCase {
    target: Molecule,
    stock: Stock,
}

/// 50 chain targets with 2-8 fragments over 50-500-entry stocks. Stocks
/// are seeded with materialized fragments and materialized multi-fragment
/// subsets (supersets of fragments), then padded with random decoys. Every
/// third case plants an iodine-bearing residue no stock entry can match,
/// so the unsolved exit is exercised too.
fn equivalence_corpus() -> Vec<EquivCase> {
    let m = mode();
    let mut rng = synth::rng(90210);
    let mut cases = Vec::new();
    for case in 0..50usize {
        let starve = case % 3 == 2;
        let target_smiles = if starve {
            format!("CC(=O)NC(CI)C(=O){}NCC", "NC(C)C(=O)".repeat(case % 5))
        } else {
            synth::stitched_target_smiles(&mut rng, case % 7)
        };
        let target = parse_smiles(&target_smiles).unwrap();
        let decomp = fragment(&target, m);
        let k = decomp.fragments.len();
        let starved = decomp
            .fragments
            .iter()
            .position(|f| f.atoms().iter().any(|a| a.element == Element::I));
        assert_eq!(starve, starved.is_some());

        let mut lines = Vec::new();
        let mut seen = HashSet::new();
        for i in 0..k {
            if starved == Some(i) {
                continue;
            }
            let pat = combination_pattern(&decomp, 1u128 << i).unwrap();
            push_line(write_smiles(&synth::materialize(&pat)), &mut lines, &mut seen);
        }
        let subsets = all_connected_subsets(k, &decomp.adjacency);
        for _ in 0..k {
            let bits = subsets[rng.random_range(0..subsets.len())];
            if starved.is_some_and(|s| bits & (1 << s) != 0) {
                continue;
            }
            let pat = combination_pattern(&decomp, bits).unwrap();
            push_line(write_smiles(&synth::materialize(&pat)), &mut lines, &mut seen);
        }
        let total = rng.random_range(50..=500usize);
        while lines.len() < total {
            push_line(
                write_smiles(&synth::random_molecule(&mut rng, 14)),
                &mut lines,
                &mut seen,
            );
        }
        let (stock, rep) = build_stock_from_text(&lines.join("\n"), &FpParams::default()).unwrap();
        assert_eq!(rep.failed, 0);
        cases.push(EquivCase { target, stock });
    }
    cases
}

/// Substructure test pairs: carved queries (guaranteed matches), their
/// atom permutations, carry-over queries against unrelated targets, and
/// fully random queries.
fn pair_corpus() -> Vec<(Molecule, Molecule)> {
    let mut rng = synth::rng(424242);
    let mut pairs = Vec::new();
    let mut prev: Option<Molecule> = None;
    while pairs.len() < 10_500 {
        let target = synth::random_molecule(&mut rng, 24);
        if let Some(q) = synth::random_fragment_query(&mut rng, &target, 12) {
            pairs.push((synth::permute_atoms(&mut rng, &q), target.clone()));
            if let Some(pq) = prev.take() {
                pairs.push((pq, target.clone()));
            }
            prev = Some(q);
        }
        pairs.push((synth::random_molecule(&mut rng, 12), target));
    }
    pairs
}

struct BenchFixture {
    targets: Vec<Molecule>,
    stock: Stock,
}

/// 20 solvable chain targets of 30-60 heavy atoms against 100,000 unique
/// building blocks: materialized fragments and a few pairs per target,
/// the rest random decoys.
fn bench_fixture() -> &'static BenchFixture {
    static FIX: OnceLock<BenchFixture> = OnceLock::new();
    FIX.get_or_init(|| {
        let m = mode();
        let mut rng = synth::rng(777);
        let mut targets: Vec<Molecule> = Vec::new();
        let mut units = 5usize;
        while targets.len() < 20 {
            let t = parse_smiles(&synth::stitched_target_smiles(&mut rng, units)).unwrap();
            if (30..=60).contains(&t.heavy_atom_count()) {
                targets.push(t);
                units = 5 + targets.len() % 4;
            }
        }
        let mut lines = Vec::new();
        let mut seen = HashSet::new();
        for t in &targets {
            let decomp = fragment(t, m);
            for i in 0..decomp.fragments.len() {
                let pat = combination_pattern(&decomp, 1u128 << i).unwrap();
                push_line(write_smiles(&synth::materialize(&pat)), &mut lines, &mut seen);
            }
            for &(a, b, _) in decomp.adjacency.iter().take(2) {
                let pat = combination_pattern(&decomp, (1u128 << a) | (1 << b)).unwrap();
                push_line(write_smiles(&synth::materialize(&pat)), &mut lines, &mut seen);
            }
        }
        while lines.len() < 100_000 {
            push_line(
                write_smiles(&synth::random_molecule(&mut rng, 16)),
                &mut lines,
                &mut seen,
            );
        }
        let (stock, rep) = build_stock_from_text(&lines.join("\n"), &FpParams::default()).unwrap();
        assert_eq!(rep.failed, 0);
        assert_eq!(stock.len(), 100_000);
        BenchFixture { targets, stock }
    })
}

// --------------------------------------------------------------- criteria

#[test]
fn criterion_01_oracle_equivalence() {
    let started = Instant::now();
    let m = mode();
    let cases = equivalence_corpus();
    let mut solved = 0usize;
    let mut mismatch: Option<String> = None;
    for (i, case) in cases.iter().enumerate() {
        let fast = run(&case.target, &case.stock, m, &EngineConfig::default()).unwrap();
        let slow = brute_force_retro(&case.target, &case.stock, m).unwrap();
        if fast.solved != slow.solved
            || fast.valid_combinations != slow.valid_combinations
            || fast.solutions != slow.solutions
        {
            mismatch = Some(format!(
                "case {i} ({}) diverged from brute force",
                write_smiles(&case.target)
            ));
            break;
        }
        solved += fast.solved as usize;
    }
    let pass = mismatch.is_none();
    report(
        "criterion 01 oracle equivalence",
        pass,
        &format!(
            "{} runs, solved flag / valid set / solutions all equal to brute force ({} solved, {} unsolved) in {:.1}s",
            cases.len(),
            solved,
            cases.len() - solved,
            started.elapsed().as_secs_f64()
        ),
    );
    assert!(pass, "{}", mismatch.unwrap());
}

#[test]
fn criterion_02_matcher_soundness() {
    let _t = timing_guard();
    let started = Instant::now();
    let pairs = pair_corpus();
    let mut matched = 0usize;
    let mut disagreements = 0usize;
    let mut first = String::new();
    for (q, t) in &pairs {
        let fast = match_substructure(q, t).unwrap();
        let slow = naive_match(q, t).unwrap();
        if fast != slow {
            if disagreements == 0 {
                first = format!(
                    "query {} vs target {}: matcher {fast}, reference {slow}",
                    write_smiles(q),
                    write_smiles(t)
                );
            }
            disagreements += 1;
        }
        matched += slow as usize;
    }
    let pass = disagreements == 0;
    report(
        "criterion 02 matcher soundness",
        pass,
        &format!(
            "{} pairs ({matched} matched), {disagreements} disagreements in {:.1}s",
            pairs.len(),
            started.elapsed().as_secs_f64()
        ),
    );
    assert!(pass, "{first}");
}

#[test]
fn criterion_03_screening_no_false_negatives() {
    let started = Instant::now();
    let params = FpParams::default();
    let pairs = pair_corpus();
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut first = String::new();
    for (q, t) in &pairs {
        if !naive_match(q, t).unwrap() {
            continue;
        }
        checked += 1;
        let stock = Stock {
            entries: vec![StockEntry {
                id: 0,
                smiles: write_smiles(t),
                molecule: t.clone(),
                fp: fingerprint(t, &params),
                heavy_atoms: t.heavy_atom_count() as u32,
                rings: t.ring_count() as u32,
            }],
            fp_params: params,
            source_digest: [0; 32],
        };
        if !screen_candidates(q, &stock, None).contains(&0) {
            if violations == 0 {
                first = format!(
                    "matched query {} screened out of {}",
                    write_smiles(q),
                    write_smiles(t)
                );
            }
            violations += 1;
        }
    }
    let pass = violations == 0;
    report(
        "criterion 03 screening no-false-negatives",
        pass,
        &format!(
            "{checked} matched pairs all pass the screen, {violations} violations in {:.1}s",
            started.elapsed().as_secs_f64()
        ),
    );
    assert!(pass, "{first}");
}

#[test]
fn criterion_04_pruning_and_priors_neutrality() {
    let started = Instant::now();
    let m = mode();
    let cases = equivalence_corpus();
    let base_cfg = EngineConfig::default();
    let variants = [
        ("priors off", EngineConfig { use_priors: false, ..base_cfg }),
        ("pruning off", EngineConfig { prune_invalid: false, ..base_cfg }),
        (
            "priors and pruning off",
            EngineConfig { use_priors: false, prune_invalid: false, ..base_cfg },
        ),
        ("screening off", EngineConfig { screening: false, ..base_cfg }),
    ];
    for (i, case) in cases.iter().enumerate() {
        let base = run(&case.target, &case.stock, m, &base_cfg).unwrap();
        for (name, cfg) in &variants {
            let alt = run(&case.target, &case.stock, m, cfg).unwrap();
            assert_eq!(base.solved, alt.solved, "case {i}, {name}");
            assert_eq!(
                base.valid_combinations, alt.valid_combinations,
                "case {i}, {name}"
            );
            assert_eq!(base.solutions, alt.solutions, "case {i}, {name}");
        }
        // First-hit matching shrinks witness lists but must keep the
        // decision, the valid member sets, and the partition set.
        let fh = run(
            &case.target,
            &case.stock,
            m,
            &EngineConfig { match_all: false, ..base_cfg },
        )
        .unwrap();
        let members =
            |r: &RetroResult| r.valid_combinations.iter().map(|c| c.members).collect::<Vec<_>>();
        assert_eq!(base.solved, fh.solved, "case {i}, first-hit");
        assert_eq!(members(&base), members(&fh), "case {i}, first-hit");
        assert_eq!(base.solutions, fh.solutions, "case {i}, first-hit");
    }
    report(
        "criterion 04 pruning and priors neutrality",
        true,
        &format!(
            "{} cases x {} config variants, identical solved/valid/solutions in {:.1}s",
            cases.len(),
            variants.len() + 1,
            started.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_05_screening_speedup() {
    let _t = timing_guard();
    let started = Instant::now();
    let m = mode();
    let fix = bench_fixture();
    let on_cfg = EngineConfig::default();
    let off_cfg = EngineConfig { screening: false, ..on_cfg };
    let mut on_times = Vec::new();
    let mut off_times = Vec::new();
    let (mut calls_on, mut calls_off) = (0usize, 0usize);
    for t in &fix.targets {
        let s = Instant::now();
        let r_on = run(t, &fix.stock, m, &on_cfg).unwrap();
        on_times.push(s.elapsed().as_secs_f64());
        let s = Instant::now();
        let r_off = run(t, &fix.stock, m, &off_cfg).unwrap();
        off_times.push(s.elapsed().as_secs_f64());
        assert_eq!(r_on.solutions, r_off.solutions);
        assert!(r_on.solved);
        calls_on += r_on.total_match_calls();
        calls_off += r_off.total_match_calls();
    }
    let wall_ratio = median(&mut on_times) / median(&mut off_times);
    let call_reduction = calls_off as f64 / calls_on as f64;
    let pass = wall_ratio <= 0.67 && call_reduction >= 5.0;
    report(
        "criterion 05 screening speedup",
        pass,
        &format!(
            "100k-entry stock, 20 targets: median wall on/off {wall_ratio:.3} (need <= 0.67), \
             match calls {calls_off} -> {calls_on} ({call_reduction:.1}x reduction, need >= 5x) in {:.0}s",
            started.elapsed().as_secs_f64()
        ),
    );
    assert!(pass, "wall ratio {wall_ratio:.3}, call reduction {call_reduction:.1}x");
}

#[test]
fn criterion_06_parallel_scaling() {
    let _t = timing_guard();
    let m = mode();
    let fix = bench_fixture();

    let retro_json = |t: &Molecule, workers: usize| {
        let cfg = EngineConfig { workers, ..EngineConfig::default() };
        let result = run(t, &fix.stock, m, &cfg).unwrap();
        serde_json::to_string(&render_retro(&result, true)).unwrap()
    };
    let mut identical = true;
    'targets: for t in &fix.targets {
        let base = retro_json(t, 1);
        for workers in [2usize, 4, 8] {
            if retro_json(t, workers) != base {
                identical = false;
                break 'targets;
            }
        }
    }

    let elapsed_for = |workers: usize| {
        let cfg = EngineConfig { workers, ..EngineConfig::default() };
        let s = Instant::now();
        for t in &fix.targets {
            run(t, &fix.stock, m, &cfg).unwrap();
        }
        s.elapsed().as_secs_f64()
    };
    let t1 = elapsed_for(1);
    let t4 = elapsed_for(4);
    let speedup = t1 / t4;
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);

    let pass = identical && speedup >= 2.0;
    report(
        "criterion 06 parallel scaling",
        pass,
        &format!(
            "JSON identical for workers 1/2/4/8: {identical}; 4-worker speedup {speedup:.2}x \
             over 1 worker (need >= 2x) with {cores} hardware thread(s) detected"
        ),
    );
    assert!(identical, "worker count changed the JSON output");
    assert!(
        speedup >= 2.0,
        "4-worker speedup {speedup:.2}x < 2x; machine exposes {cores} hardware thread(s)"
    );
}

#[test]
fn criterion_07_quadratic_combination_bound() {
    let _t = timing_guard();
    let started = Instant::now();
    let m = mode();
    let mut rng = synth::rng(31337);

    // Stock where every combination matches: the full oligomer family (so
    // each target matches itself) plus one long span covering every proper
    // run, padded with decoys so the timings have substance.
    let mut lines = Vec::new();
    let mut seen = HashSet::new();
    for mm in 2..=30 {
        push_line(synth::oligomer_smiles(mm), &mut lines, &mut seen);
    }
    push_line(synth::oligomer_smiles(61), &mut lines, &mut seen);
    while lines.len() < 20_000 {
        push_line(
            write_smiles(&synth::random_molecule(&mut rng, 12)),
            &mut lines,
            &mut seen,
        );
    }
    let (stock, rep) = build_stock_from_text(&lines.join("\n"), &FpParams::default()).unwrap();
    assert_eq!(rep.failed, 0);

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut bad: Option<String> = None;
    for mm in 2..=30usize {
        let target = parse_smiles(&synth::oligomer_smiles(mm)).unwrap();
        let n = mm + 2;
        let mut best = f64::INFINITY;
        let mut evaluated = 0usize;
        for _ in 0..3 {
            let s = Instant::now();
            let r = run(&target, &stock, m, &EngineConfig::default()).unwrap();
            best = best.min(s.elapsed().as_secs_f64());
            evaluated = r.combinations_evaluated();
            assert!(r.solved);
        }
        let expect = n * (n + 1) / 2;
        if evaluated != expect && bad.is_none() {
            bad = Some(format!("N={n}: evaluated {evaluated}, expected {expect}"));
        }
        xs.push((target.heavy_atom_count() as f64).ln());
        ys.push(best.max(1e-7).ln());
    }
    let slope = least_squares_slope(&xs, &ys);
    let pass = bad.is_none() && slope <= 2.4;
    report(
        "criterion 07 quadratic combination bound",
        pass,
        &format!(
            "N=4..32 path graphs: combinations N(N+1)/2 {}; log-log elapsed-vs-heavy-atoms slope \
             {slope:.2} (need <= 2.4) in {:.0}s",
            if bad.is_none() { "exact for all N" } else { "WRONG" },
            started.elapsed().as_secs_f64()
        ),
    );
    if let Some(msg) = bad {
        panic!("{msg}");
    }
    assert!(pass, "slope {slope:.2} exceeds 2.4");
}

#[test]
fn criterion_08_six_fragment_chain_fixture() {
    let m = mode();
    // Six amide-linked residues A..F with pairwise-distinct halogen /
    // heteroatom markers, so exactly the stocked combinations can match.
    let target = parse_smiles(
        "FC(F)(F)C(=O)NC(CCl)C(=O)NC(CBr)C(=O)NC(CI)C(=O)NC(CS)C(=O)NCCP",
    )
    .unwrap();
    let decomp = fragment(&target, m);
    assert_eq!(decomp.fragments.len(), 6);
    assert_eq!(
        decomp.adjacency.iter().map(|&(a, b, _)| (a, b)).collect::<Vec<_>>(),
        vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]
    );

    // Stock: every single fragment, pairs A-B / B-C / E-F, and triple
    // A-B-C. Pairs C-D and D-E stay unmatched.
    let mut lines = Vec::new();
    let mut seen = HashSet::new();
    for bits in [
        0b000001u128, 0b000010, 0b000100, 0b001000, 0b010000, 0b100000,
        0b000011, 0b000110, 0b110000, 0b000111,
    ] {
        let pat = combination_pattern(&decomp, bits).unwrap();
        push_line(write_smiles(&synth::materialize(&pat)), &mut lines, &mut seen);
    }
    let (stock, rep) = build_stock_from_text(&lines.join("\n"), &FpParams::default()).unwrap();
    assert_eq!(rep.failed, 0);

    let result = run(&target, &stock, m, &EngineConfig::default()).unwrap();
    let stage_sets = |n: usize| {
        result
            .valid_combinations
            .iter()
            .filter(|c| c.stage() == n)
            .map(|c| c.members)
            .collect::<Vec<_>>()
    };

    assert_eq!(result.stats.len(), 3, "stage 4 must never evaluate anything");
    assert_eq!(result.stats[0].valid, 6);
    assert_eq!(
        stage_sets(2),
        vec![
            MemberSet::from_bits(0b000011),
            MemberSet::from_bits(0b000110),
            MemberSet::from_bits(0b110000),
        ],
        "stage-2 valid combinations must be exactly A-B, B-C, E-F"
    );
    assert_eq!(result.stats[1].effective, 5);
    assert_eq!(
        stage_sets(3),
        vec![MemberSet::from_bits(0b000111)],
        "stage-3 must leave only A-B-C valid"
    );
    assert_eq!(
        result.stats[2].effective, 1,
        "supersets of invalid pairs must not be evaluated at stage 3"
    );
    assert_eq!(result.termination_reason, TerminationReason::NoEffective);
    assert!(result.solved);
    let best = &result.solutions[0];
    assert_eq!(best.size(), 3);
    assert_eq!(
        best.blocks,
        vec![
            MemberSet::from_bits(0b000111),
            MemberSet::from_bits(0b001000),
            MemberSet::from_bits(0b110000),
        ],
        "best solution must be {{A-B-C | D | E-F}}"
    );
    report(
        "criterion 08 six-fragment chain fixture",
        true,
        "stage-2 valid {A-B, B-C, E-F}, stage-3 valid {A-B-C}, no stage-4 evaluations, best solution has 3 blocks",
    );
}

#[test]
fn criterion_09_stage_one_exit_path() {
    let m = mode();
    let target = parse_smiles("CC(=O)NC(CI)C(=O)NC(CC)C(=O)NCC").unwrap();
    let decomp = fragment(&target, m);
    let k = decomp.fragments.len();
    assert_eq!(k, 4);
    let starved = decomp
        .fragments
        .iter()
        .position(|f| f.atoms().iter().any(|a| a.element == Element::I))
        .unwrap();

    // Every fragment except the iodine-bearing one is purchasable; decoys
    // are iodine-free by construction.
    let mut rng = synth::rng(5150);
    let mut lines = Vec::new();
    let mut seen = HashSet::new();
    for i in (0..k).filter(|&i| i != starved) {
        let pat = combination_pattern(&decomp, 1u128 << i).unwrap();
        push_line(write_smiles(&synth::materialize(&pat)), &mut lines, &mut seen);
    }
    while lines.len() < 40 {
        push_line(
            write_smiles(&synth::random_molecule(&mut rng, 12)),
            &mut lines,
            &mut seen,
        );
    }
    let (stock, _) = build_stock_from_text(&lines.join("\n"), &FpParams::default()).unwrap();

    let result = run(&target, &stock, m, &EngineConfig::default()).unwrap();
    assert!(!result.solved);
    assert_eq!(result.termination_reason, TerminationReason::InitFail);
    assert_eq!(result.stats.len(), 1, "no stage past 1 may run");
    assert_eq!(result.total_match_calls(), result.stats[0].match_calls);
    assert!(result.solutions.is_empty());
    let members: Vec<MemberSet> = result.valid_combinations.iter().map(|c| c.members).collect();
    assert_eq!(members.len(), k - 1, "matched singletons are still recorded");
    assert!(members.iter().all(|ms| !ms.contains(starved)));
    report(
        "criterion 09 stage-one exit path",
        true,
        &format!(
            "fragment {starved} of {k} unmatched: stage-1 exit after {} match calls, zero beyond stage 1",
            result.stats[0].match_calls
        ),
    );
}

#[test]
fn criterion_10_reconstruction_and_cache_roundtrip() {
    let started = Instant::now();
    let m = mode();
    let mut rng = synth::rng(2024);
    let mut lines = Vec::new();
    let mut seen = HashSet::new();
    let mut checked = 0usize;
    while checked < 1000 {
        let mol = synth::random_molecule(&mut rng, 28);
        let decomp = fragment(&mol, m);
        let k = decomp.fragments.len();
        let full = if k == 128 { !0u128 } else { (1u128 << k) - 1 };
        let merged = combination_pattern(&decomp, full).unwrap();
        assert!(
            is_isomorphic(&merged, &mol),
            "reassembled decomposition diverged for {}",
            write_smiles(&mol)
        );
        checked += 1;
        push_line(write_smiles(&mol), &mut lines, &mut seen);
    }

    let params = FpParams::default();
    let (stock, rep) = build_stock_from_text(&lines.join("\n"), &params).unwrap();
    assert_eq!(rep.failed, 0);
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("stock1.frsk");
    let second = dir.path().join("stock2.frsk");
    save_cache(&stock, &first).unwrap();
    let loaded = load_cache(&first, Some(&params)).unwrap();
    assert_eq!(stock, loaded);
    save_cache(&loaded, &second).unwrap();
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap(),
        "cache round-trip must be bit-exact"
    );
    report(
        "criterion 10 reconstruction and cache round-trip",
        true,
        &format!(
            "{checked} decompositions reassemble isomorphically; {}-entry cache round-trips byte-identical in {:.1}s",
            stock.len(),
            started.elapsed().as_secs_f64()
        ),
    );
}

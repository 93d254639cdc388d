//! Acceptance gate: one test per criterion, each printing a single
//! `[PASS]`/`[FAIL]` line (visible with `--nocapture`). Criteria cover the
//! golden worked example, the optimality guarantees of every constructor
//! on their families, exact-solver cross-validation, simulator reduction
//! and trends, CLI determinism, and sampler support.

use std::collections::HashSet;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mcdisc_cli::campaign::{
    run_simulation_campaign, sim_rows_csv, CampaignConfig, CampaignMode, SamplerPreset,
};
use mcdisc_core::families::{
    sample_f1, sample_f2, sample_f3, uniform_probabilities, F1SamplerConfig, F2SamplerConfig,
    F3SamplerConfig, FamilyTag,
};
use mcdisc_core::mdtopt::{
    brute_force_oracle, build_ilp_capped, solve_exact, MdtOptError, SOLVE_HORIZON_CAP,
};
use mcdisc_core::metrics::compute_metrics;
use mcdisc_core::model::{discovery_time, is_complete, is_recursive, BpSet, Channel};
use mcdisc_core::schedulers::{opt_b2, psv, Strategy};
use mcdisc_core::sim::{run_trial, NeighborInstance, PhyParams, TICKS_PER_SYMBOL};
use mcdisc_core::Rational;

fn check(name: &str, cond: bool, detail: &str) {
    if cond {
        println!("[PASS] {}", name);
    } else {
        println!("[FAIL] {}: {}", name, detail);
        panic!("{} failed: {}", name, detail);
    }
}

const GREEDY_RULES: [Strategy; 4] = [
    Strategy::GreedyRnd,
    Strategy::GreedyDtr,
    Strategy::GreedyRndSwt,
    Strategy::GreedyDtrSwt,
];

#[test]
fn criterion_01_worked_example_golden_values() {
    let bp = BpSet::new(&[1, 2, 4]).unwrap();
    let probs = uniform_probabilities(&bp, 3).unwrap();

    let psv_m = compute_metrics(&psv(&bp, 3), &bp, 3, &probs).unwrap();
    let mut ok = psv_m.mdt == Rational::new(14, 3) && psv_m.wdt_slots == 12;
    let mut detail = String::new();
    for strategy in GREEDY_RULES.iter().copied().chain([Strategy::ChanTrain]) {
        let l = strategy.synthesize(&bp, 3, &probs, 7).unwrap();
        let m = compute_metrics(&l, &bp, 3, &probs).unwrap();
        if m.mdt != Rational::new(3, 1) || m.wdt_slots != 12 {
            ok = false;
            detail = format!("{}: mdt {:?} wdt {}", strategy, m.mdt, m.wdt_slots);
        }
    }
    check(
        "criterion 1: worked example (PSV 14/3, constructors 3, WDT 12)",
        ok,
        &detail,
    );
}

#[test]
fn criterion_02_recursiveness_on_divisor_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0201);
    let cfg = F3SamplerConfig {
        max_period: Some(512),
        ..F3SamplerConfig::numeric()
    };
    let mut failures = String::new();
    for i in 0..500 {
        let bp = sample_f3(&mut rng, &cfg);
        let channels = rng.random_range(1..=12u32);
        let probs = uniform_probabilities(&bp, channels).unwrap();
        for strategy in GREEDY_RULES.iter().copied().chain([Strategy::ChanTrain]) {
            let l = strategy.synthesize(&bp, channels, &probs, i).unwrap();
            if !is_complete(&l, &bp, channels) || !is_recursive(&l, &bp, channels) {
                failures = format!("{} on B={:?} |C|={}", strategy, bp.periods(), channels);
            }
        }
    }
    check(
        "criterion 2: 500 divisor-chain sets, constructors recursive and complete",
        failures.is_empty(),
        &failures,
    );
}

#[test]
fn criterion_03_wdt_optimality_when_max_equals_lcm() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0301);
    let cfg = F2SamplerConfig::numeric();
    let mut failures = String::new();
    for i in 0..500 {
        let bp = sample_f2(&mut rng, &cfg).unwrap();
        let channels = rng.random_range(1..=12u32);
        let probs = uniform_probabilities(&bp, channels).unwrap();
        let optimum = bp.max_period() * channels as u64;
        for strategy in GREEDY_RULES.iter().copied().chain([Strategy::ChanTrain]) {
            let l = strategy.synthesize(&bp, channels, &probs, i).unwrap();
            let m = compute_metrics(&l, &bp, channels, &probs).unwrap();
            if m.wdt_slots != optimum {
                failures = format!(
                    "{} on B={:?} |C|={}: wdt {} != {}",
                    strategy,
                    bp.periods(),
                    channels,
                    m.wdt_slots,
                    optimum
                );
            }
        }
    }
    check(
        "criterion 3: 500 max=LCM sets, WDT exactly max(B)·|C|",
        failures.is_empty(),
        &failures,
    );
}

#[test]
fn criterion_04_exact_solver_cross_validation() {
    // Part A: value agreement with the exhaustive oracle on tiny horizons.
    let mut rng = ChaCha8Rng::seed_from_u64(0x0401);
    let cfg = F1SamplerConfig::numeric();
    let mut agreed = 0;
    let mut detail = String::new();
    let mut attempts = 0;
    while agreed < 50 && attempts < 200_000 {
        attempts += 1;
        let bp = sample_f1(&mut rng, &cfg);
        let channels = rng.random_range(2..=3u32);
        let horizon = bp.lcm() * channels as u64;
        if horizon > 24 {
            continue;
        }
        let probs = uniform_probabilities(&bp, channels).unwrap();
        let model = build_ilp_capped(&bp, channels, &probs, 24).unwrap();
        let (_, solver_mdt) = solve_exact(&model).unwrap();
        let (_, oracle_mdt) = brute_force_oracle(&bp, channels, &probs, horizon).unwrap();
        if solver_mdt != oracle_mdt {
            detail = format!(
                "B={:?} |C|={}: solver {:?} oracle {:?}",
                bp.periods(),
                channels,
                solver_mdt,
                oracle_mdt
            );
            break;
        }
        agreed += 1;
    }

    // Part B: the solver never loses to any constructor.
    let mut solved = 0;
    attempts = 0;
    while solved < 200 && detail.is_empty() && attempts < 200_000 {
        attempts += 1;
        let bp = sample_f1(&mut rng, &cfg);
        let channels = rng.random_range(2..=4u32);
        if bp.lcm() * channels as u64 > 36 {
            continue;
        }
        let probs = uniform_probabilities(&bp, channels).unwrap();
        let model = build_ilp_capped(&bp, channels, &probs, SOLVE_HORIZON_CAP).unwrap();
        let (opt_l, opt_mdt) = match solve_exact(&model) {
            Ok(r) => r,
            Err(MdtOptError::TooLarge(_)) => continue, // outside the proof budget
            Err(e) => {
                detail = e.to_string();
                break;
            }
        };
        assert!(is_complete(&opt_l, &bp, channels));
        for strategy in Strategy::ALL {
            if strategy == Strategy::OptB2 && bp.len() != 2 {
                continue;
            }
            let l = strategy.synthesize(&bp, channels, &probs, solved).unwrap();
            let m = compute_metrics(&l, &bp, channels, &probs).unwrap();
            if opt_mdt > m.mdt {
                detail = format!(
                    "{} beat the solver on B={:?} |C|={}",
                    strategy,
                    bp.periods(),
                    channels
                );
            }
        }
        solved += 1;
    }
    check(
        "criterion 4: solver = oracle on 50 instances; solver ≤ constructors on 200",
        detail.is_empty() && agreed == 50 && solved == 200,
        &format!("agreed={} solved={} {}", agreed, solved, detail),
    );
}

#[test]
fn criterion_05_near_optimal_mdt_at_desk_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0501);
    let cfg = F2SamplerConfig {
        max_lcm: (1, 64),
        card_range: (3, 8),
        max_attempts: 1000,
    };
    let mut greedy_norms = Vec::new();
    let mut psv_norms = Vec::new();
    for i in 0..150u64 {
        let bp = sample_f2(&mut rng, &cfg).unwrap();
        let channels = 2 + (i % 7) as u32; // 2..=8
        let probs = uniform_probabilities(&bp, channels).unwrap();

        let mut mdts = Vec::new();
        for strategy in GREEDY_RULES.iter().copied().chain([Strategy::Psv]) {
            let l = strategy.synthesize(&bp, channels, &probs, i).unwrap();
            let m = compute_metrics(&l, &bp, channels, &probs).unwrap();
            mdts.push((strategy, m.mdt_f64()));
        }
        // Exact reference when the instance fits the solver; otherwise the
        // best observed value stands in (documented fallback).
        let reference = if bp.lcm() * channels as u64 <= SOLVE_HORIZON_CAP {
            build_ilp_capped(&bp, channels, &probs, SOLVE_HORIZON_CAP)
                .and_then(|model| solve_exact(&model))
                .map(|(_, mdt)| *mdt.numer() as f64 / *mdt.denom() as f64)
                .ok()
        } else {
            None
        };
        let reference = reference.unwrap_or_else(|| {
            mdts.iter().map(|&(_, m)| m).fold(f64::INFINITY, f64::min)
        });
        for (strategy, mdt) in mdts {
            let norm = mdt / reference;
            if strategy == Strategy::Psv {
                psv_norms.push(norm);
            } else {
                greedy_norms.push(norm);
            }
        }
    }
    let greedy_mean = greedy_norms.iter().sum::<f64>() / greedy_norms.len() as f64;
    let psv_mean = psv_norms.iter().sum::<f64>() / psv_norms.len() as f64;
    check(
        "criterion 5: 150 max=LCM samples, mean GREEDY norm MDT ≤ 1.03, PSV ≥ 2.0",
        greedy_mean <= 1.03 && psv_mean >= 2.0,
        &format!("greedy mean {:.4}, psv mean {:.4}", greedy_mean, psv_mean),
    );
}

#[test]
fn criterion_06_two_period_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0601);
    let mut failures = String::new();
    for _ in 0..1000 {
        let b0 = rng.random_range(1..=63u64);
        let b1 = rng.random_range(b0 + 1..=64u64);
        let channels = rng.random_range(1..=12u32);
        let bp = BpSet::new(&[b0, b1]).unwrap();
        let l = opt_b2(&bp, channels).unwrap();
        let expected = b1 * channels as u64;
        if !is_complete(&l, &bp, channels)
            || !is_recursive(&l, &bp, channels)
            || l.len() as u64 != expected
            || l.last_slot() != Some(expected - 1)
        {
            failures = format!("B={{{},{}}} |C|={}", b0, b1, channels);
        }
    }
    check(
        "criterion 6: 1000 two-period instances complete, recursive, idle-free",
        failures.is_empty(),
        &failures,
    );
}

#[test]
fn criterion_07_passive_scan_switch_minimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0701);
    let mut failures = String::new();
    for i in 0..100u64 {
        let bp = match i % 3 {
            0 => sample_f1(&mut rng, &F1SamplerConfig::numeric()),
            1 => sample_f2(&mut rng, &F2SamplerConfig::numeric()).unwrap(),
            _ => sample_f3(
                &mut rng,
                &F3SamplerConfig {
                    max_period: Some(256),
                    ..F3SamplerConfig::numeric()
                },
            ),
        };
        let channels = rng.random_range(2..=8u32);
        let probs = uniform_probabilities(&bp, channels).unwrap();
        let minimum = channels as u64 - 1;
        if psv(&bp, channels).channel_switches() != minimum {
            failures = format!("psv switches on B={:?} |C|={}", bp.periods(), channels);
        }
        for strategy in Strategy::ALL {
            if strategy == Strategy::OptB2 && bp.len() != 2 {
                continue;
            }
            let l = strategy.synthesize(&bp, channels, &probs, i).unwrap();
            if l.channel_switches() < minimum {
                failures = format!(
                    "{} used fewer switches than the passive scan on B={:?} |C|={}",
                    strategy,
                    bp.periods(),
                    channels
                );
            }
        }
    }
    check(
        "criterion 7: passive scan uses |C|-1 switches, no constructor fewer",
        failures.is_empty(),
        &failures,
    );
}

#[test]
fn criterion_08_simulator_reduces_to_the_slotted_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0801);
    let phy = PhyParams::ideal(); // 1-symbol beacons, no deaf periods
    let mut checked = 0u32;
    let mut failures = String::new();
    while checked < 10_000 && failures.is_empty() {
        let bp = sample_f1(&mut rng, &F1SamplerConfig::numeric());
        let channels = rng.random_range(1..=4u32);
        let probs = uniform_probabilities(&bp, channels).unwrap();
        let strategy = if checked % 2 == 0 {
            Strategy::Psv
        } else {
            Strategy::GreedyDtr
        };
        let schedule = strategy.synthesize(&bp, channels, &probs, 1).unwrap();
        // A batch of collision-free neighbors against one schedule: each
        // beacon stays strictly inside its slot.
        for _ in 0..20 {
            let period = bp.periods()[rng.random_range(0..bp.len())];
            let slot = rng.random_range(0..period);
            let symbol = rng.random_range(0..phy.slot_symbols); // 1-symbol beacon fits anywhere
            let nb = NeighborInstance {
                channel: Channel(rng.random_range(0..channels)),
                period,
                start_ticks: (slot * phy.slot_symbols + symbol) * TICKS_PER_SYMBOL,
            };
            let out = run_trial(&schedule, &bp, channels, &[nb], &phy).unwrap();
            let expected = discovery_time(&nb.configuration(&phy), &schedule).unwrap();
            let got = out.neighbors[0]
                .discovery_ticks
                .map(|t| (t - 1) / (phy.slot_symbols * TICKS_PER_SYMBOL));
            if got != Some(expected) {
                failures = format!(
                    "B={:?} |C|={} {}: slot {:?} != {}",
                    bp.periods(),
                    channels,
                    strategy,
                    got,
                    expected
                );
                break;
            }
            checked += 1;
        }
    }
    check(
        "criterion 8: ideal-parameter trials reproduce slotted discovery times (10^4)",
        failures.is_empty() && checked >= 10_000,
        &failures,
    );
}

/// Mean success per x with CI, for one strategy.
fn trend(
    report: &mcdisc_cli::campaign::CampaignReport,
    strategy: Strategy,
    xs: &[(u32, u32)],
) -> Vec<(f64, f64, f64)> {
    xs.iter()
        .map(|&(c, n)| {
            let r = report
                .summary
                .iter()
                .find(|r| {
                    r.strategy == strategy
                        && r.channels == c
                        && r.neighbors == n
                        && r.metric == "success"
                })
                .unwrap();
            (r.mean, r.ci_low, r.ci_high)
        })
        .collect()
}

/// At most one inversion, and only within overlapping confidence
/// intervals.
fn monotone_enough(points: &[(f64, f64, f64)], increasing: bool) -> bool {
    let mut inversions = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let violated = if increasing { b.0 < a.0 } else { b.0 > a.0 };
        if violated {
            inversions += 1;
            let overlap = a.1 <= b.2 && b.1 <= a.2;
            if !overlap {
                return false;
            }
        }
    }
    inversions <= 1
}

#[test]
fn criterion_09_success_rate_trends() {
    let strategies = vec![
        Strategy::GreedyRnd,
        Strategy::GreedyDtr,
        Strategy::GreedyRndSwt,
        Strategy::GreedyDtrSwt,
        Strategy::ChanTrain,
        Strategy::Psv,
    ];
    let base = CampaignConfig {
        mode: CampaignMode::Simulation,
        families: vec![FamilyTag::F2],
        samples: 50,
        runs_per_point: 5,
        sampler: SamplerPreset::Simulation,
        strategies: strategies.clone(),
        master_seed: 0x0901,
        ..CampaignConfig::default()
    };

    let channels_sweep = CampaignConfig {
        channels: vec![2, 4, 8, 12],
        neighbors: vec![15],
        ..base.clone()
    };
    let by_channels = run_simulation_campaign(&channels_sweep).unwrap();

    let neighbors_sweep = CampaignConfig {
        channels: vec![8],
        neighbors: vec![5, 15, 30],
        ..base
    };
    let by_neighbors = run_simulation_campaign(&neighbors_sweep).unwrap();

    let mut failures = String::new();
    for &strategy in &strategies {
        let up = trend(
            &by_channels,
            strategy,
            &[(2, 15), (4, 15), (8, 15), (12, 15)],
        );
        if !monotone_enough(&up, true) {
            failures = format!("{} not non-decreasing in |C|: {:?}", strategy, up);
        }
        let down = trend(&by_neighbors, strategy, &[(8, 5), (8, 15), (8, 30)]);
        if !monotone_enough(&down, false) {
            failures = format!("{} not non-increasing in n: {:?}", strategy, down);
        }
    }

    let mean_of = |report: &mcdisc_cli::campaign::CampaignReport, s: Strategy| {
        let rows: Vec<f64> = report
            .sim
            .iter()
            .filter(|r| r.strategy == s)
            .map(|r| r.success_rate)
            .collect();
        rows.iter().sum::<f64>() / rows.len() as f64
    };
    let rnd = mean_of(&by_channels, Strategy::GreedyRnd);
    let ct = mean_of(&by_channels, Strategy::ChanTrain);
    if rnd > ct {
        failures = format!("greedy-rnd mean {:.4} > chan-train mean {:.4}", rnd, ct);
    }

    check(
        "criterion 9: success-rate trends over |C| and n; greedy-rnd ≤ chan-train",
        failures.is_empty(),
        &failures,
    );
}

#[test]
fn criterion_10_campaign_determinism() {
    // In-process replay.
    let cfg = CampaignConfig {
        mode: CampaignMode::Simulation,
        families: vec![FamilyTag::F2],
        channels: vec![2, 4],
        neighbors: vec![5],
        samples: 3,
        runs_per_point: 2,
        sampler: SamplerPreset::Simulation,
        strategies: vec![Strategy::GreedyDtrSwt, Strategy::ChanTrain, Strategy::Psv],
        master_seed: 0x0a01,
        ..CampaignConfig::default()
    };
    let a = sim_rows_csv(&run_simulation_campaign(&cfg).unwrap());
    let b = sim_rows_csv(&run_simulation_campaign(&cfg).unwrap());
    let mut ok = a == b && a.lines().count() > 1;

    // End-to-end through the binary.
    let dir = std::env::temp_dir().join("mcdisc-acceptance-determinism");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("campaign.conf");
    std::fs::write(
        &config_path,
        "mode = simulation\nfamilies = F2\nchannels = 2,4\nneighbors = 5\nsamples = 2\nruns = 2\nmaster_seed = 99\nstrategies = chan-train,psv\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for run in ["one", "two"] {
        let out = dir.join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_mcdisc"))
            .args([
                "campaign",
                "--config",
                config_path.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push((
            std::fs::read(out.join("sim_rows.csv")).unwrap(),
            std::fs::read(out.join("summary.csv")).unwrap(),
        ));
    }
    ok &= outputs[0] == outputs[1];
    check(
        "criterion 10: campaigns replay byte-identically under one master seed",
        ok,
        "replayed CSV output differed",
    );
}

#[test]
fn criterion_11_sampler_support_matches_the_enumerated_universe() {
    // Oracle: every normalized set obtainable from 3..6 distinct values in
    // 1..10.
    let mut universe: HashSet<Vec<u64>> = HashSet::new();
    for mask in 1u32..(1 << 10) {
        if !(3..=6).contains(&mask.count_ones()) {
            continue;
        }
        let vals: Vec<u64> = (0..10).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        let g = vals.iter().fold(0u64, |a, &v| gcd(a, v));
        universe.insert(vals.iter().map(|v| v / g).collect());
    }
    let mut ok = universe.len() == 775;
    let mut detail = format!("universe size {}", universe.len());

    let mut rng = ChaCha8Rng::seed_from_u64(0x0b01);
    let cfg = F1SamplerConfig::numeric();
    for _ in 0..2000 {
        let bp = sample_f1(&mut rng, &cfg);
        if !universe.contains(bp.periods()) {
            ok = false;
            detail = format!("sampled {:?} outside the universe", bp.periods());
            break;
        }
    }
    check(
        "criterion 11: normalized sampler support ⊆ the 775-set universe",
        ok,
        &detail,
    );
}

//! Campaign runner: samples BP sets per family, synthesizes schedules with
//! every configured strategy, evaluates them (slotted metrics or realistic
//! trials), and aggregates long-form CSV plus per-figure plot data.
//!
//! All randomness derives from `master_seed` through a splitmix64 counter
//! split — one sub-seed per (family, sample index, run index) — so any row
//! can be recomputed in isolation and whole campaigns replay byte-exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use mcdisc_core::families::{
    sample_f1, sample_f2, sample_f3, uniform_probabilities, F1SamplerConfig, F2SamplerConfig,
    F3SamplerConfig, FamilyTag,
};
use mcdisc_core::mdtopt::{build_ilp_capped, solve_exact, MdtOptError, SOLVE_HORIZON_CAP};
use mcdisc_core::metrics::compute_metrics;
use mcdisc_core::model::BpSet;
use mcdisc_core::schedulers::Strategy;
use mcdisc_core::sim::{generate_neighbors, mean_ci, run_trial, PhyParams};

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("size cap exceeded: {0}")]
    TooLarge(String),
    #[error("campaign failed: {0}")]
    Run(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CampaignMode {
    Numeric,
    Simulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerPreset {
    /// Small periods (≤16 per draw for F1), suited to exact comparisons.
    Numeric,
    /// Larger periods (≤128), smaller cardinalities, as in the realistic
    /// trials.
    Simulation,
}

/// Everything a campaign needs, parsed from a `key = value` text file.
#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub mode: CampaignMode,
    pub families: Vec<FamilyTag>,
    pub channels: Vec<u32>,
    pub neighbors: Vec<u32>,
    pub samples: u32,
    pub runs_per_point: u32,
    pub strategies: Vec<Strategy>,
    pub sampler: SamplerPreset,
    pub master_seed: u64,
    pub phy: PhyParams,
    /// Normalize MDT against the exact solver on F1/F2; instances beyond
    /// the solver cap are resampled (logged to stderr).
    pub mdtopt_enabled: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            mode: CampaignMode::Numeric,
            families: vec![FamilyTag::F2, FamilyTag::F3],
            channels: vec![2, 4, 6, 8, 10, 12],
            neighbors: vec![15],
            samples: 30,
            runs_per_point: 5,
            strategies: Strategy::ALL.to_vec(),
            sampler: SamplerPreset::Numeric,
            master_seed: 1,
            phy: PhyParams::default(),
            mdtopt_enabled: false,
        }
    }
}

impl CampaignConfig {
    pub fn parse(text: &str) -> Result<Self, CampaignError> {
        let mut cfg = CampaignConfig::default();
        let mut sampler_set = false;
        let bad = |line: usize, msg: String| CampaignError::Config(format!("line {}: {}", line + 1, msg));
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(i, "expected key = value".into()))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "mode" => {
                    cfg.mode = match value {
                        "numeric" => CampaignMode::Numeric,
                        "simulation" => CampaignMode::Simulation,
                        other => return Err(bad(i, format!("unknown mode '{}'", other))),
                    }
                }
                "families" => {
                    cfg.families = value
                        .split(',')
                        .map(|s| match s.trim() {
                            "F1" => Ok(FamilyTag::F1),
                            "F2" => Ok(FamilyTag::F2),
                            "F3" => Ok(FamilyTag::F3),
                            other => Err(bad(i, format!("unknown family '{}'", other))),
                        })
                        .collect::<Result<_, _>>()?;
                }
                "channels" => cfg.channels = parse_list(value).map_err(|e| bad(i, e))?,
                "neighbors" => {
                    cfg.neighbors = parse_list(value).map_err(|e| bad(i, e))?;
                }
                "samples" => cfg.samples = value.parse().map_err(|_| bad(i, "bad samples".into()))?,
                "runs" => {
                    cfg.runs_per_point = value.parse().map_err(|_| bad(i, "bad runs".into()))?
                }
                "strategies" => {
                    if value == "all" {
                        cfg.strategies = Strategy::ALL.to_vec();
                    } else {
                        cfg.strategies = value
                            .split(',')
                            .map(|s| {
                                Strategy::parse(s.trim())
                                    .ok_or_else(|| bad(i, format!("unknown strategy '{}'", s)))
                            })
                            .collect::<Result<_, _>>()?;
                    }
                }
                "sampler" => {
                    sampler_set = true;
                    cfg.sampler = match value {
                        "numeric" => SamplerPreset::Numeric,
                        "simulation" => SamplerPreset::Simulation,
                        other => return Err(bad(i, format!("unknown sampler '{}'", other))),
                    }
                }
                "master_seed" => {
                    cfg.master_seed = value.parse().map_err(|_| bad(i, "bad master_seed".into()))?
                }
                "mdtopt" => {
                    cfg.mdtopt_enabled =
                        value.parse().map_err(|_| bad(i, "bad mdtopt flag".into()))?
                }
                "slot_symbols" => {
                    cfg.phy.slot_symbols =
                        value.parse().map_err(|_| bad(i, "bad slot_symbols".into()))?
                }
                "beacon_symbols" => {
                    cfg.phy.beacon_symbols = value
                        .parse()
                        .map_err(|_| bad(i, "bad beacon_symbols".into()))?
                }
                "switch_symbols" => {
                    cfg.phy.switch_symbols = value
                        .parse()
                        .map_err(|_| bad(i, "bad switch_symbols".into()))?
                }
                "initial_deaf" => {
                    cfg.phy.initial_deaf =
                        value.parse().map_err(|_| bad(i, "bad initial_deaf".into()))?
                }
                other => return Err(bad(i, format!("unknown key '{}'", other))),
            }
        }
        if !sampler_set && cfg.mode == CampaignMode::Simulation {
            cfg.sampler = SamplerPreset::Simulation;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.families.is_empty()
            || self.channels.is_empty()
            || self.strategies.is_empty()
            || self.samples == 0
            || self.runs_per_point == 0
        {
            return Err(CampaignError::Config(
                "families, channels, strategies, samples and runs must be non-empty".into(),
            ));
        }
        if self.channels.iter().any(|&c| c == 0) {
            return Err(CampaignError::Config("channel counts must be positive".into()));
        }
        if self.mode == CampaignMode::Simulation
            && (self.neighbors.is_empty() || self.neighbors.iter().any(|&n| n == 0))
        {
            return Err(CampaignError::Config(
                "simulation campaigns need positive neighbor counts".into(),
            ));
        }
        Ok(())
    }

    /// Scales sample and run counts; CI quality degrades gracefully.
    pub fn apply_scale(&mut self, scale: f64) -> Result<(), CampaignError> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(CampaignError::Config("scale must be positive".into()));
        }
        self.samples = ((self.samples as f64 * scale).round() as u32).max(1);
        self.runs_per_point = ((self.runs_per_point as f64 * scale).round() as u32).max(1);
        Ok(())
    }
}

fn parse_list(value: &str) -> Result<Vec<u32>, String> {
    let list: Result<Vec<u32>, _> = value.split(',').map(|s| s.trim().parse()).collect();
    let list = list.map_err(|_| format!("bad integer list '{}'", value))?;
    if list.is_empty() {
        return Err("empty list".into());
    }
    Ok(list)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The documented counter split: one sub-seed per (family, sample, run).
/// Run 0 seeds the instance itself (BP set and constructor tiebreakers);
/// runs 1.. seed the per-run neighbor populations.
pub fn derive_seed(master: u64, family: FamilyTag, sample: u32, run: u32) -> u64 {
    let fam = match family {
        FamilyTag::F1 => 1u64,
        FamilyTag::F2 => 2,
        FamilyTag::F3 => 3,
        FamilyTag::F4 => 4,
    };
    let counter = (fam << 56) | ((sample as u64) << 24) | run as u64;
    splitmix64(master ^ splitmix64(counter))
}

/// Draws one BP set for a family under a sampler preset.
pub fn sample_instance(
    family: FamilyTag,
    preset: SamplerPreset,
    rng: &mut ChaCha8Rng,
) -> Result<BpSet, CampaignError> {
    let bp = match (family, preset) {
        (FamilyTag::F1, SamplerPreset::Numeric) => sample_f1(rng, &F1SamplerConfig::numeric()),
        (FamilyTag::F1, SamplerPreset::Simulation) => {
            sample_f1(rng, &F1SamplerConfig::simulation())
        }
        (FamilyTag::F2, SamplerPreset::Numeric) => sample_f2(rng, &F2SamplerConfig::numeric())
            .map_err(|e| CampaignError::Run(e.to_string()))?,
        (FamilyTag::F2, SamplerPreset::Simulation) => {
            sample_f2(rng, &F2SamplerConfig::simulation())
                .map_err(|e| CampaignError::Run(e.to_string()))?
        }
        (FamilyTag::F3, _) => {
            // Desk-scale cap keeps horizons tractable for every channel count.
            let cfg = F3SamplerConfig {
                max_period: Some(512),
                ..F3SamplerConfig::numeric()
            };
            sample_f3(rng, &cfg)
        }
        (FamilyTag::F4, _) => {
            return Err(CampaignError::Config(
                "F4 has no dedicated sampler; use F3".into(),
            ))
        }
    };
    Ok(bp)
}

#[derive(Debug, Clone)]
pub struct NumericRow {
    pub family: FamilyTag,
    pub strategy: Strategy,
    pub channels: u32,
    pub sample: u32,
    pub seed: u64,
    pub bp: String,
    pub wdt_slots: u64,
    pub mdt: f64,
    pub listening_slots: u64,
    pub switches: u64,
    pub norm_wdt: f64,
    pub norm_mdt: f64,
    pub norm_slots: f64,
    pub norm_switches: f64,
    /// What the MDT was normalized against: `mdtopt`, `greedy` (F3, where
    /// the constructor is provably optimal) or `best` (best observed value,
    /// fallback when the exact solver is disabled).
    pub norm_ref: &'static str,
}

#[derive(Debug, Clone)]
pub struct SimRow {
    pub family: FamilyTag,
    pub strategy: Strategy,
    pub seed: u64,
    pub channels: u32,
    pub neighbors: u32,
    pub discovered: u32,
    pub total: u32,
    pub success_rate: f64,
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub family: FamilyTag,
    pub strategy: Strategy,
    pub metric: &'static str,
    pub channels: u32,
    /// 0 for numeric campaigns.
    pub neighbors: u32,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone)]
pub struct NdotRow {
    pub family: FamilyTag,
    pub strategy: Strategy,
    pub norm_time: f64,
    pub cdf: f64,
}

#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub mode: CampaignMode,
    pub families: Vec<FamilyTag>,
    pub numeric: Vec<NumericRow>,
    pub sim: Vec<SimRow>,
    pub summary: Vec<SummaryRow>,
    pub ndot: Vec<NdotRow>,
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport, CampaignError> {
    match cfg.mode {
        CampaignMode::Numeric => run_numeric_campaign(cfg),
        CampaignMode::Simulation => run_simulation_campaign(cfg),
    }
}

pub fn run_numeric_campaign(cfg: &CampaignConfig) -> Result<CampaignReport, CampaignError> {
    cfg.validate()?;
    let mut rows: Vec<NumericRow> = Vec::new();
    let mut curves: BTreeMap<(FamilyTag, Strategy), Vec<Vec<(f64, f64)>>> = BTreeMap::new();

    for &family in &cfg.families {
        for &channels in &cfg.channels {
            for sample in 0..cfg.samples {
                let seed = derive_seed(cfg.master_seed, family, sample, 0);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let needs_opt = cfg.mdtopt_enabled && family != FamilyTag::F3;
                // With the exact solver enabled, instances it cannot handle
                // (horizon cap or proof budget) are resampled and logged.
                let mut resamples = 0u32;
                let (bp, probs, opt_mdt) = loop {
                    let bp = sample_instance(family, cfg.sampler, &mut rng)?;
                    let probs = uniform_probabilities(&bp, channels)
                        .map_err(|e| CampaignError::Run(e.to_string()))?;
                    if !needs_opt {
                        break (bp, probs, None);
                    }
                    if bp.lcm() * channels as u64 <= SOLVE_HORIZON_CAP {
                        let solved = build_ilp_capped(&bp, channels, &probs, SOLVE_HORIZON_CAP)
                            .and_then(|model| solve_exact(&model));
                        match solved {
                            Ok((_, mdt)) => break (bp, probs, Some(mdt)),
                            Err(MdtOptError::TooLarge(_)) => {}
                            Err(e) => return Err(CampaignError::Run(e.to_string())),
                        }
                    }
                    resamples += 1;
                    if resamples > 1000 {
                        return Err(CampaignError::TooLarge(format!(
                            "could not sample a {} instance within the exact-solver caps at {} channels",
                            family, channels
                        )));
                    }
                };
                if resamples > 0 {
                    eprintln!(
                        "note: resampled {} {} instance(s) beyond the solver caps (|C|={}, sample {})",
                        resamples, family, channels, sample
                    );
                }

                // Pass 1: synthesize and measure every applicable strategy.
                let mut measured = Vec::new();
                for &strategy in &cfg.strategies {
                    if strategy == Strategy::OptB2 && bp.len() != 2 {
                        continue;
                    }
                    let schedule = strategy
                        .synthesize(&bp, channels, &probs, seed)
                        .map_err(|e| CampaignError::Run(e.to_string()))?;
                    let m = compute_metrics(&schedule, &bp, channels, &probs)
                        .map_err(|e| CampaignError::Run(e.to_string()))?;
                    measured.push((strategy, m));
                }

                // Pass 2: pick the MDT reference for this instance.
                let (reference, norm_ref) = if family == FamilyTag::F3 {
                    let greedy = Strategy::GreedyDtr
                        .synthesize(&bp, channels, &probs, seed)
                        .and_then(|l| {
                            compute_metrics(&l, &bp, channels, &probs)
                                .map_err(|_| unreachable_err())
                        })
                        .map_err(|e| CampaignError::Run(e.to_string()))?;
                    (greedy.mdt_f64(), "greedy")
                } else if let Some(mdt) = opt_mdt {
                    (*mdt.numer() as f64 / *mdt.denom() as f64, "mdtopt")
                } else {
                    let best = measured
                        .iter()
                        .map(|(_, m)| m.mdt_f64())
                        .fold(f64::INFINITY, f64::min);
                    (best, "best")
                };

                let opt_slots = (bp.max_period() * channels as u64) as f64;
                for (strategy, m) in measured {
                    curves
                        .entry((family, strategy))
                        .or_default()
                        .push(m.ndot_cdf.clone());
                    rows.push(NumericRow {
                        family,
                        strategy,
                        channels,
                        sample,
                        seed,
                        bp: bp.to_csv(),
                        wdt_slots: m.wdt_slots,
                        mdt: m.mdt_f64(),
                        listening_slots: m.listening_slots,
                        switches: m.channel_switches,
                        norm_wdt: m.normalized_wdt,
                        norm_mdt: m.mdt_f64() / reference.max(f64::MIN_POSITIVE),
                        norm_slots: m.listening_slots as f64 / opt_slots,
                        norm_switches: m.normalized_switches,
                        norm_ref,
                    });
                }
            }
        }
    }

    let summary = summarize_numeric(&rows);
    let ndot = aggregate_ndot(&curves);
    Ok(CampaignReport {
        mode: CampaignMode::Numeric,
        families: cfg.families.clone(),
        numeric: rows,
        sim: Vec::new(),
        summary,
        ndot,
    })
}

fn unreachable_err() -> mcdisc_core::schedulers::SchedulerError {
    mcdisc_core::schedulers::SchedulerError::UnsupportedInput("metrics on a complete schedule".into())
}

fn summarize_numeric(rows: &[NumericRow]) -> Vec<SummaryRow> {
    let mut grouped: BTreeMap<(FamilyTag, Strategy, u32), Vec<&NumericRow>> = BTreeMap::new();
    for r in rows {
        grouped.entry((r.family, r.strategy, r.channels)).or_default().push(r);
    }
    let mut out = Vec::new();
    for ((family, strategy, channels), group) in grouped {
        let metrics: [(&'static str, Vec<f64>); 6] = [
            ("mdt", group.iter().map(|r| r.mdt).collect()),
            ("norm_mdt", group.iter().map(|r| r.norm_mdt).collect()),
            ("norm_wdt", group.iter().map(|r| r.norm_wdt).collect()),
            ("norm_slots", group.iter().map(|r| r.norm_slots).collect()),
            ("norm_switches", group.iter().map(|r| r.norm_switches).collect()),
            ("switches", group.iter().map(|r| r.switches as f64).collect()),
        ];
        for (name, values) in metrics {
            let s = mean_ci(&values);
            out.push(SummaryRow {
                family,
                strategy,
                metric: name,
                channels,
                neighbors: 0,
                mean: s.mean,
                ci_low: s.ci_low,
                ci_high: s.ci_high,
            });
        }
    }
    out
}

/// Mean CDF per (family, strategy) over the union of step abscissae.
fn aggregate_ndot(
    curves: &BTreeMap<(FamilyTag, Strategy), Vec<Vec<(f64, f64)>>>,
) -> Vec<NdotRow> {
    let mut out = Vec::new();
    for (&(family, strategy), list) in curves {
        let mut xs: Vec<f64> = list.iter().flatten().map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        for x in xs {
            let mean = list.iter().map(|c| step_value(c, x)).sum::<f64>() / list.len() as f64;
            out.push(NdotRow {
                family,
                strategy,
                norm_time: x,
                cdf: mean,
            });
        }
    }
    out
}

fn step_value(curve: &[(f64, f64)], x: f64) -> f64 {
    let i = curve.partition_point(|p| p.0 <= x);
    if i == 0 {
        0.0
    } else {
        curve[i - 1].1
    }
}

pub fn run_simulation_campaign(cfg: &CampaignConfig) -> Result<CampaignReport, CampaignError> {
    cfg.validate()?;
    let mut rows: Vec<SimRow> = Vec::new();

    for &family in &cfg.families {
        for &channels in &cfg.channels {
            for &n in &cfg.neighbors {
                for sample in 0..cfg.samples {
                    let seed = derive_seed(cfg.master_seed, family, sample, 0);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let bp = sample_instance(family, cfg.sampler, &mut rng)?;
                    let probs = uniform_probabilities(&bp, channels)
                        .map_err(|e| CampaignError::Run(e.to_string()))?;

                    let mut schedules = Vec::new();
                    for &strategy in &cfg.strategies {
                        if strategy == Strategy::OptB2 && bp.len() != 2 {
                            continue;
                        }
                        let schedule = strategy
                            .synthesize(&bp, channels, &probs, seed)
                            .map_err(|e| CampaignError::Run(e.to_string()))?;
                        schedules.push((strategy, schedule));
                    }

                    for run in 1..=cfg.runs_per_point {
                        let run_seed = derive_seed(cfg.master_seed, family, sample, run);
                        let mut run_rng = ChaCha8Rng::seed_from_u64(run_seed);
                        // One shared population per run: strategies compete
                        // on matched scenarios.
                        let population =
                            generate_neighbors(&bp, channels, n as usize, &cfg.phy, &mut run_rng)
                                .map_err(|e| CampaignError::Run(e.to_string()))?;
                        for (strategy, schedule) in &schedules {
                            let outcome =
                                run_trial(schedule, &bp, channels, &population, &cfg.phy)
                                    .map_err(|e| CampaignError::Run(e.to_string()))?;
                            rows.push(SimRow {
                                family,
                                strategy: *strategy,
                                seed: run_seed,
                                channels,
                                neighbors: n,
                                discovered: outcome.discovered_count() as u32,
                                total: outcome.total() as u32,
                                success_rate: outcome.rate(),
                            });
                        }
                    }
                }
            }
        }
    }

    rows.sort_by(|a, b| {
        (a.family, a.strategy, a.channels, a.neighbors, a.seed)
            .cmp(&(b.family, b.strategy, b.channels, b.neighbors, b.seed))
    });
    let summary = summarize_sim(&rows);
    Ok(CampaignReport {
        mode: CampaignMode::Simulation,
        families: cfg.families.clone(),
        numeric: Vec::new(),
        sim: rows,
        summary,
        ndot: Vec::new(),
    })
}

fn summarize_sim(rows: &[SimRow]) -> Vec<SummaryRow> {
    let mut grouped: BTreeMap<(FamilyTag, Strategy, u32, u32), Vec<f64>> = BTreeMap::new();
    for r in rows {
        grouped
            .entry((r.family, r.strategy, r.channels, r.neighbors))
            .or_default()
            .push(r.success_rate);
    }
    let mut out = Vec::new();
    for ((family, strategy, channels, neighbors), rates) in grouped {
        let s = mean_ci(&rates);
        out.push(SummaryRow {
            family,
            strategy,
            metric: "success",
            channels,
            neighbors,
            mean: s.mean,
            ci_low: s.ci_low,
            ci_high: s.ci_high,
        });
    }
    out
}

// --- CSV emission ------------------------------------------------------

pub fn numeric_rows_csv(report: &CampaignReport) -> String {
    let mut s = String::from(
        "family,strategy,channels,sample,seed,bp,wdt_slots,mdt,listening_slots,switches,norm_wdt,norm_mdt,norm_slots,norm_switches,norm_ref\n",
    );
    for r in &report.numeric {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.family,
            r.strategy,
            r.channels,
            r.sample,
            r.seed,
            r.bp.replace(',', ";"),
            r.wdt_slots,
            r.mdt,
            r.listening_slots,
            r.switches,
            r.norm_wdt,
            r.norm_mdt,
            r.norm_slots,
            r.norm_switches,
            r.norm_ref
        )
        .unwrap();
    }
    s
}

pub fn sim_rows_csv(report: &CampaignReport) -> String {
    let mut s =
        String::from("family,strategy,seed,num_channels,num_neighbors,discovered,total,success_rate\n");
    for r in &report.sim {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.family,
            r.strategy,
            r.seed,
            r.channels,
            r.neighbors,
            r.discovered,
            r.total,
            r.success_rate
        )
        .unwrap();
    }
    s
}

pub fn summary_csv(report: &CampaignReport) -> String {
    let mut s = String::from("family,strategy,metric,channels,neighbors,mean,ci_low,ci_high\n");
    for r in &report.summary {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.family, r.strategy, r.metric, r.channels, r.neighbors, r.mean, r.ci_low, r.ci_high
        )
        .unwrap();
    }
    s
}

/// Splits the aggregated report into one plot-ready CSV per
/// (metric, family): columns `x,strategy,mean,ci_low,ci_high`, where `x`
/// is the swept axis; `ndot` emits step points `norm_time,strategy,cdf`.
pub fn emit_plot_data(
    report: &CampaignReport,
    metrics: &[&str],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CampaignError> {
    const VALID: [&str; 6] = ["mdt", "wdt", "slots", "switches", "success", "ndot"];
    for m in metrics {
        if !VALID.contains(m) {
            return Err(CampaignError::Config(format!(
                "unknown metric '{}'; expected one of {}",
                m,
                VALID.join(", ")
            )));
        }
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CampaignError::Run(format!("cannot create {}: {}", out_dir.display(), e)))?;

    // x is whichever axis actually varies; channels wins ties.
    let mut channel_axis: Vec<u32> = report
        .summary
        .iter()
        .map(|r| r.channels)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    channel_axis.dedup();
    let x_is_channels = channel_axis.len() != 1;

    let mut written = Vec::new();
    for &metric in metrics {
        let summary_name = match metric {
            "mdt" => "norm_mdt",
            "wdt" => "norm_wdt",
            "slots" => "norm_slots",
            "switches" => "norm_switches",
            "success" => "success",
            _ => "",
        };
        for &family in &report.families {
            let path = out_dir.join(format!("plot_{}_{}.csv", metric, family));
            let mut s = String::new();
            if metric == "ndot" {
                s.push_str("norm_time,strategy,cdf\n");
                for r in report.ndot.iter().filter(|r| r.family == family) {
                    writeln!(s, "{},{},{}", r.norm_time, r.strategy, r.cdf).unwrap();
                }
            } else {
                s.push_str("x,strategy,mean,ci_low,ci_high\n");
                for r in report
                    .summary
                    .iter()
                    .filter(|r| r.family == family && r.metric == summary_name)
                {
                    let x = if x_is_channels { r.channels } else { r.neighbors };
                    writeln!(s, "{},{},{},{},{}", x, r.strategy, r.mean, r.ci_low, r.ci_high)
                        .unwrap();
                }
            }
            std::fs::write(&path, s)
                .map_err(|e| CampaignError::Run(format!("cannot write {}: {}", path.display(), e)))?;
            written.push(path);
        }
    }
    Ok(written)
}

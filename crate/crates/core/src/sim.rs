//! Sub-slot simulation of schedule execution under realistic conditions:
//! nonzero beacon durations, channel-switch deaf periods, unsynchronized
//! neighbor start times, and destructive beacon collisions.
//!
//! The timeline is integer ticks at 1/16 symbol, so interval endpoints
//! compare exactly and quantized real-valued start offsets never hit
//! float-equality artifacts.

use rand::Rng;
use std::collections::HashMap;
use thiserror::Error;

use crate::model::{is_complete, BpSet, Channel, Configuration, ListeningSchedule};

pub const TICKS_PER_SYMBOL: u64 = 16;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid phy parameters: {0}")]
    InvalidPhy(String),
    #[error("schedule is incomplete under the ideal model")]
    IncompleteSchedule,
    #[error("invalid scenario")]
    InvalidScenario,
    #[error("need at least two trials for a confidence interval")]
    TooFewTrials,
}

/// Physical-layer timing, in symbols. Defaults model a 2.4 GHz O-QPSK
/// radio: 960-symbol slots, 38-symbol beacons (19-byte PHY frames at 4
/// bits/symbol), 24-symbol channel switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhyParams {
    pub slot_symbols: u64,
    pub beacon_symbols: u64,
    pub switch_symbols: u64,
    /// Whether the deaf period also covers the very first scanned slot
    /// (the radio must tune once). On by default; the CLI exposes
    /// `--no-initial-deaf` to disable it.
    pub initial_deaf: bool,
}

impl Default for PhyParams {
    fn default() -> Self {
        PhyParams {
            slot_symbols: 960,
            beacon_symbols: 38,
            switch_symbols: 24,
            initial_deaf: true,
        }
    }
}

impl PhyParams {
    /// Degenerate parameters that recover the ideal slotted model:
    /// one-symbol beacons, no deaf periods.
    pub fn ideal() -> Self {
        PhyParams {
            slot_symbols: 960,
            beacon_symbols: 1,
            switch_symbols: 0,
            initial_deaf: true,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.slot_symbols == 0 || self.beacon_symbols == 0 {
            return Err(SimError::InvalidPhy("zero-length slot or beacon".into()));
        }
        if self.beacon_symbols >= self.slot_symbols {
            return Err(SimError::InvalidPhy(
                "beacon must be shorter than a slot".into(),
            ));
        }
        if self.switch_symbols >= self.slot_symbols {
            return Err(SimError::InvalidPhy(
                "switch time must be shorter than a slot".into(),
            ));
        }
        Ok(())
    }

    fn slot_ticks(&self) -> u64 {
        self.slot_symbols * TICKS_PER_SYMBOL
    }
}

/// One unsynchronized neighbor: a channel, a beacon period in slots, and
/// the start of its first beacon, in ticks from the discoverer's slot 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborInstance {
    pub channel: Channel,
    pub period: u64,
    /// In `[0, period·slot_symbols·16)`.
    pub start_ticks: u64,
}

impl NeighborInstance {
    /// Quantizes a real-valued symbol offset to the 1/16-symbol grid.
    pub fn from_start_symbol(channel: Channel, period: u64, start_symbol: f64, phy: &PhyParams) -> Self {
        let span = period * phy.slot_ticks();
        let ticks = (start_symbol * TICKS_PER_SYMBOL as f64).round() as u64 % span;
        NeighborInstance {
            channel,
            period,
            start_ticks: ticks,
        }
    }

    pub fn start_symbol(&self) -> f64 {
        self.start_ticks as f64 / TICKS_PER_SYMBOL as f64
    }

    /// The slotted-model offset δ this start time induces.
    pub fn offset(&self, phy: &PhyParams) -> u64 {
        (self.start_ticks / phy.slot_ticks()) % self.period
    }

    pub fn configuration(&self, phy: &PhyParams) -> Configuration {
        Configuration::new(self.channel, self.period, self.offset(phy))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LossCause {
    NotListening,
    DeafSwitch,
    Collision,
}

/// Per-neighbor result: discovery time (if any) plus one loss cause per
/// missed beacon emitted within the horizon.
#[derive(Debug, Clone)]
pub struct NeighborResult {
    pub discovered: bool,
    pub discovery_ticks: Option<u64>,
    pub loss_causes: Vec<LossCause>,
}

impl NeighborResult {
    pub fn discovery_symbol(&self) -> Option<f64> {
        self.discovery_ticks
            .map(|t| t as f64 / TICKS_PER_SYMBOL as f64)
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub neighbors: Vec<NeighborResult>,
}

impl TrialOutcome {
    pub fn discovered_count(&self) -> usize {
        self.neighbors.iter().filter(|n| n.discovered).count()
    }

    pub fn total(&self) -> usize {
        self.neighbors.len()
    }

    pub fn rate(&self) -> f64 {
        if self.neighbors.is_empty() {
            return 0.0;
        }
        self.discovered_count() as f64 / self.total() as f64
    }
}

/// Draws `n` neighbors: channel uniform over `C`, period uniform over `B`,
/// start time uniform over one full period on the 1/16-symbol grid.
pub fn generate_neighbors(
    bp: &BpSet,
    num_channels: u32,
    n: usize,
    phy: &PhyParams,
    rng: &mut impl Rng,
) -> Result<Vec<NeighborInstance>, SimError> {
    if bp.is_empty() || num_channels == 0 || n == 0 {
        return Err(SimError::InvalidScenario);
    }
    let periods = bp.periods();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let channel = Channel(rng.random_range(0..num_channels));
        let period = periods[rng.random_range(0..periods.len())];
        let start_ticks = rng.random_range(0..period * phy.slot_ticks());
        out.push(NeighborInstance {
            channel,
            period,
            start_ticks,
        });
    }
    Ok(out)
}

/// Merged half-open tick intervals per channel.
fn merge(intervals: &mut Vec<(u64, u64)>) {
    intervals.sort_unstable();
    let mut merged: Vec<(u64, u64)> = Vec::with_capacity(intervals.len());
    for &(a, b) in intervals.iter() {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    *intervals = merged;
}

fn covers(intervals: &[(u64, u64)], a: u64, b: u64) -> bool {
    // intervals are merged and sorted; find the one starting at or before a
    let i = intervals.partition_point(|&(s, _)| s <= a);
    i > 0 && intervals[i - 1].1 >= b
}

/// Executes the schedule once against the given neighbor population.
///
/// Event semantics: each neighbor emits `beacon_symbols`-long beacons every
/// `period` slots starting at `start_ticks`; the discoverer listens on the
/// scheduled channel for each scanned slot, minus a `switch_symbols` deaf
/// prefix whenever the channel differs from the previously scanned slot; a
/// beacon is received iff it lies entirely inside the listening intervals
/// on its channel and no other beacon on that channel overlaps it in time.
/// A neighbor is discovered at the end of its first received beacon.
///
/// Every missed beacon gets exactly one cause: `NotListening` if it is not
/// fully inside the scanned slots of its channel, else `DeafSwitch` if a
/// deaf prefix clips it, else `Collision`.
pub fn run_trial(
    schedule: &ListeningSchedule,
    bp: &BpSet,
    num_channels: u32,
    neighbors: &[NeighborInstance],
    phy: &PhyParams,
) -> Result<TrialOutcome, SimError> {
    phy.validate()?;
    if !is_complete(schedule, bp, num_channels) {
        return Err(SimError::IncompleteSchedule);
    }
    let slot_ticks = phy.slot_ticks();
    let deaf_ticks = phy.switch_symbols * TICKS_PER_SYMBOL;
    let beacon_ticks = phy.beacon_symbols * TICKS_PER_SYMBOL;
    // The schedule is executed once: beacons starting at or after the end
    // of the last scanned slot are out of scope.
    let horizon = (schedule.last_slot().ok_or(SimError::IncompleteSchedule)? + 1) * slot_ticks;

    // Raw scanned-slot coverage and deaf-adjusted listening windows.
    let mut scanned: HashMap<u32, Vec<(u64, u64)>> = HashMap::new();
    let mut listening: HashMap<u32, Vec<(u64, u64)>> = HashMap::new();
    let mut prev: Option<Channel> = None;
    for (t, c) in schedule.iter() {
        let a = t * slot_ticks;
        let b = a + slot_ticks;
        let deaf = match prev {
            Some(p) => p != c,
            None => phy.initial_deaf,
        };
        scanned.entry(c.0).or_default().push((a, b));
        listening
            .entry(c.0)
            .or_default()
            .push((if deaf { a + deaf_ticks } else { a }, b));
        prev = Some(c);
    }
    for v in scanned.values_mut() {
        merge(v);
    }
    for v in listening.values_mut() {
        merge(v);
    }

    // All emitted beacons, per channel, for collision adjudication.
    // (neighbor index, start tick)
    let mut beacons_by_channel: HashMap<u32, Vec<(usize, u64)>> = HashMap::new();
    for (i, nb) in neighbors.iter().enumerate() {
        let stride = nb.period * slot_ticks;
        let mut s = nb.start_ticks;
        while s < horizon {
            beacons_by_channel.entry(nb.channel.0).or_default().push((i, s));
            s += stride;
        }
    }
    // A beacon collides when another neighbor's beacon on the same channel
    // overlaps it in time; collisions are destructive for both.
    let mut collided: HashMap<(usize, u64), bool> = HashMap::new();
    for list in beacons_by_channel.values_mut() {
        list.sort_unstable_by_key(|&(_, s)| s);
        for i in 0..list.len() {
            let (ni, si) = list[i];
            for j in i + 1..list.len() {
                let (nj, sj) = list[j];
                if sj >= si + beacon_ticks {
                    break;
                }
                if ni != nj {
                    collided.insert((ni, si), true);
                    collided.insert((nj, sj), true);
                }
            }
        }
    }

    let empty: Vec<(u64, u64)> = Vec::new();
    let mut results = Vec::with_capacity(neighbors.len());
    for (i, nb) in neighbors.iter().enumerate() {
        let scan_w = scanned.get(&nb.channel.0).unwrap_or(&empty);
        let listen_w = listening.get(&nb.channel.0).unwrap_or(&empty);
        let stride = nb.period * slot_ticks;
        let mut discovered_at = None;
        let mut loss_causes = Vec::new();
        let mut s = nb.start_ticks;
        while s < horizon {
            let e = s + beacon_ticks;
            if !covers(scan_w, s, e) {
                loss_causes.push(LossCause::NotListening);
            } else if !covers(listen_w, s, e) {
                loss_causes.push(LossCause::DeafSwitch);
            } else if collided.contains_key(&(i, s)) {
                loss_causes.push(LossCause::Collision);
            } else {
                discovered_at = Some(e);
                break;
            }
            s += stride;
        }
        results.push(NeighborResult {
            discovered: discovered_at.is_some(),
            discovery_ticks: discovered_at,
            loss_causes,
        });
    }
    Ok(TrialOutcome { neighbors: results })
}

/// Mean success rate over a trial batch with a normal-approximation 95%
/// confidence interval (sample standard deviation, z = 1.96).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessRate {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn success_rate(trials: &[TrialOutcome]) -> Result<SuccessRate, SimError> {
    if trials.len() < 2 {
        return Err(SimError::TooFewTrials);
    }
    let rates: Vec<f64> = trials.iter().map(|t| t.rate()).collect();
    Ok(mean_ci(&rates))
}

/// Normal-approximation 95% CI of a sample of observations.
pub fn mean_ci(values: &[f64]) -> SuccessRate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let half = 1.96 * (var / n).sqrt();
    SuccessRate {
        mean,
        ci_low: mean - half,
        ci_high: mean + half,
    }
}

//! Domain types: channels, beacon period sets, neighbor configurations,
//! listening schedules, and configuration probabilities, together with the
//! completeness and recursiveness checkers.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_integer::Integer;
use thiserror::Error;

use crate::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid scenario: BP set must be nonempty and channel count positive")]
    InvalidScenario,
    #[error("beacon periods must be positive integers")]
    NonPositivePeriod,
    #[error("probability map does not cover configuration {0}")]
    MissingConfiguration(Configuration),
    #[error("configuration probabilities do not sum to 1")]
    BadProbabilitySum,
    #[error("schedule parse error at line {line}: {reason}")]
    ScheduleParse { line: usize, reason: String },
}

/// Index of a radio channel, `0..num_channels` for the enclosing scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Channel(pub u32);

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of beacon periods, kept sorted and deduplicated. A schedule for a
/// set with GCD `d > 1` is equivalent to one for the set divided by `d`
/// with the slot length scaled by `d`; [`BpSet::normalized`] performs that
/// transformation and records the factored-out divisor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BpSet {
    periods: Vec<u64>,
    original_gcd: u64,
}

impl BpSet {
    pub fn new(raw: &[u64]) -> Result<Self, ModelError> {
        if raw.is_empty() {
            return Err(ModelError::InvalidScenario);
        }
        if raw.iter().any(|&b| b == 0) {
            return Err(ModelError::NonPositivePeriod);
        }
        let mut periods: Vec<u64> = raw.to_vec();
        periods.sort_unstable();
        periods.dedup();
        Ok(BpSet {
            periods,
            original_gcd: 1,
        })
    }

    /// Divides all periods by their GCD; returns the normalized set and the
    /// divisor. The divisor accumulates into `original_gcd`.
    pub fn normalized(&self) -> (BpSet, u64) {
        let d = self.periods.iter().fold(0u64, |acc, &b| acc.gcd(&b));
        let periods = self.periods.iter().map(|&b| b / d).collect();
        (
            BpSet {
                periods,
                original_gcd: self.original_gcd * d,
            },
            d,
        )
    }

    pub fn gcd(&self) -> u64 {
        self.periods.iter().fold(0u64, |acc, &b| acc.gcd(&b))
    }

    pub fn periods(&self) -> &[u64] {
        &self.periods
    }

    pub fn original_gcd(&self) -> u64 {
        self.original_gcd
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn max_period(&self) -> u64 {
        *self.periods.last().unwrap()
    }

    pub fn lcm(&self) -> u64 {
        self.periods.iter().fold(1u64, |acc, &b| acc.lcm(&b))
    }

    /// Sum of all periods, i.e. the number of configurations per channel.
    pub fn period_sum(&self) -> u64 {
        self.periods.iter().sum()
    }

    /// Comma-separated ascending integers, e.g. `1,2,6`.
    pub fn to_csv(&self) -> String {
        let parts: Vec<String> = self.periods.iter().map(|b| b.to_string()).collect();
        parts.join(",")
    }

    /// Parses the `to_csv` format.
    pub fn from_csv(s: &str) -> Result<Self, ModelError> {
        let raw: Result<Vec<u64>, _> = s.split(',').map(|p| p.trim().parse::<u64>()).collect();
        let raw = raw.map_err(|_| ModelError::NonPositivePeriod)?;
        Self::new(&raw)
    }
}

/// A neighbor configuration `(channel, period, offset)`: everything needed
/// to know when and where its beacons appear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub channel: Channel,
    pub period: u64,
    pub offset: u64,
}

impl Configuration {
    pub fn new(channel: Channel, period: u64, offset: u64) -> Self {
        debug_assert!(offset < period);
        Configuration {
            channel,
            period,
            offset,
        }
    }

    /// True iff this configuration transmits a beacon in slot `t`.
    pub fn beacons_at(&self, t: u64) -> bool {
        t % self.period == self.offset
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.channel, self.period, self.offset)
    }
}

/// A sparse listening schedule: at most one channel per slot, absent slots
/// are idle.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ListeningSchedule {
    entries: BTreeMap<u64, Channel>,
}

impl ListeningSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (u64, Channel)>) -> Self {
        ListeningSchedule {
            entries: entries.into_iter().collect(),
        }
    }

    /// Sets the channel scanned in `slot`, replacing an existing entry.
    pub fn insert(&mut self, slot: u64, channel: Channel) {
        self.entries.insert(slot, channel);
    }

    pub fn channel_at(&self, slot: u64) -> Option<Channel> {
        self.entries.get(&slot).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Channel)> + '_ {
        self.entries.iter().map(|(&s, &c)| (s, c))
    }

    /// Number of scanned (non-idle) slots.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last_slot(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    /// Number of channel retunes between consecutive scanned slots. An idle
    /// gap between two scans on different channels still costs one retune.
    pub fn channel_switches(&self) -> u64 {
        let mut switches = 0;
        let mut prev: Option<Channel> = None;
        for (_, c) in self.iter() {
            if let Some(p) = prev {
                if p != c {
                    switches += 1;
                }
            }
            prev = Some(c);
        }
        switches
    }

    /// Serializes to the schedule file format: one `slot,channel` line per
    /// scanned slot, ascending slots, idle slots omitted.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for (slot, channel) in self.iter() {
            out.push_str(&format!("{},{}\n", slot, channel));
        }
        out
    }

    /// Parses the schedule file format. `#`-prefixed comment lines and blank
    /// lines are allowed; slots must be strictly ascending.
    pub fn from_file_string(text: &str) -> Result<Self, ModelError> {
        let mut entries = BTreeMap::new();
        let mut last: Option<u64> = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<u64, ModelError> {
                s.and_then(|v| v.trim().parse::<u64>().ok())
                    .ok_or(ModelError::ScheduleParse {
                        line: i + 1,
                        reason: "expected `slot,channel`".into(),
                    })
            };
            let slot = parse(parts.next())?;
            let channel = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(ModelError::ScheduleParse {
                    line: i + 1,
                    reason: "trailing fields".into(),
                });
            }
            if let Some(l) = last {
                if slot <= l {
                    return Err(ModelError::ScheduleParse {
                        line: i + 1,
                        reason: "slots must be ascending".into(),
                    });
                }
            }
            last = Some(slot);
            entries.insert(slot, Channel(channel as u32));
        }
        Ok(ListeningSchedule { entries })
    }
}

/// Exact configuration probabilities, stored as integer weights over a
/// common denominator so schedulers can compare sums without rounding.
#[derive(Debug, Clone)]
pub struct ConfigProbabilityMap {
    weights: HashMap<Configuration, u128>,
    denom: u128,
}

impl ConfigProbabilityMap {
    /// Builds a map from explicit weights. The weights must cover every
    /// configuration in `K_BC` and sum to `denom`.
    pub fn from_weights(
        bp: &BpSet,
        num_channels: u32,
        weights: HashMap<Configuration, u128>,
        denom: u128,
    ) -> Result<Self, ModelError> {
        let mut sum: u128 = 0;
        for kappa in enumerate_configurations(bp, num_channels)? {
            match weights.get(&kappa) {
                Some(w) => sum += w,
                None => return Err(ModelError::MissingConfiguration(kappa)),
            }
        }
        if sum != denom {
            return Err(ModelError::BadProbabilitySum);
        }
        Ok(ConfigProbabilityMap { weights, denom })
    }

    /// Builds a map from exact rational probabilities.
    pub fn from_rationals(
        bp: &BpSet,
        num_channels: u32,
        probs: &HashMap<Configuration, Rational>,
    ) -> Result<Self, ModelError> {
        let denom = probs
            .values()
            .fold(1u128, |acc, p| acc.lcm(p.denom()));
        let weights = probs
            .iter()
            .map(|(&k, p)| (k, p.numer() * (denom / p.denom())))
            .collect();
        Self::from_weights(bp, num_channels, weights, denom)
    }

    pub fn weight(&self, kappa: &Configuration) -> u128 {
        self.weights.get(kappa).copied().unwrap_or(0)
    }

    pub fn denom(&self) -> u128 {
        self.denom
    }

    pub fn prob(&self, kappa: &Configuration) -> Rational {
        Rational::new(self.weight(kappa), self.denom)
    }
}

/// The set of possible neighbor configurations `K_BC`:
/// `{(c,b,δ) : c ∈ C, b ∈ B, 0 ≤ δ < b}`.
pub fn enumerate_configurations(
    bp: &BpSet,
    num_channels: u32,
) -> Result<Vec<Configuration>, ModelError> {
    if bp.is_empty() || num_channels == 0 {
        return Err(ModelError::InvalidScenario);
    }
    let mut out = Vec::with_capacity(num_channels as usize * bp.period_sum() as usize);
    for c in 0..num_channels {
        for &b in bp.periods() {
            for delta in 0..b {
                out.push(Configuration::new(Channel(c), b, delta));
            }
        }
    }
    Ok(out)
}

/// The configurations that transmit a beacon on channel `c` in slot `t`:
/// `{(c, b, t mod b) : b ∈ B}`.
pub fn active_configs(c: Channel, t: u64, bp: &BpSet) -> Vec<Configuration> {
    bp.periods()
        .iter()
        .map(|&b| Configuration::new(c, b, t % b))
        .collect()
}

/// The smallest slot in which `kappa` is heard by `schedule`, or `None` if
/// the schedule never listens on the right channel at the right time.
/// `None` is a routine value for incomplete intermediate schedules, not an
/// error.
pub fn discovery_time(kappa: &Configuration, schedule: &ListeningSchedule) -> Option<u64> {
    let last = schedule.last_slot()?;
    let mut t = kappa.offset;
    while t <= last {
        if schedule.channel_at(t) == Some(kappa.channel) {
            return Some(t);
        }
        t += kappa.period;
    }
    None
}

/// True iff every configuration in `K_BC` is discovered by `schedule`.
pub fn is_complete(schedule: &ListeningSchedule, bp: &BpSet, num_channels: u32) -> bool {
    match enumerate_configurations(bp, num_channels) {
        Ok(configs) => configs
            .iter()
            .all(|k| discovery_time(k, schedule).is_some()),
        Err(_) => false,
    }
}

/// True iff for every period `b`, every configuration with that period is
/// discovered within the first `b·|C|` slots. Recursive schedules are
/// exactly the complete schedules that are simultaneously WDT-, MDT-, and
/// NDoT-optimal.
pub fn is_recursive(schedule: &ListeningSchedule, bp: &BpSet, num_channels: u32) -> bool {
    match enumerate_configurations(bp, num_channels) {
        Ok(configs) => configs.iter().all(|k| {
            discovery_time(k, schedule)
                .map(|t| t < k.period * num_channels as u64)
                .unwrap_or(false)
        }),
        Err(_) => false,
    }
}

/// Dense index over `K_BC`, used by schedulers and the exact solver to
/// track covered configurations in flat bitmaps.
#[derive(Debug, Clone)]
pub struct ConfigIndexer {
    pub num_channels: u32,
    periods: Vec<u64>,
    offset_base: Vec<usize>,
    per_channel: usize,
}

impl ConfigIndexer {
    pub fn new(bp: &BpSet, num_channels: u32) -> Self {
        let mut offset_base = Vec::with_capacity(bp.len());
        let mut acc = 0usize;
        for &b in bp.periods() {
            offset_base.push(acc);
            acc += b as usize;
        }
        ConfigIndexer {
            num_channels,
            periods: bp.periods().to_vec(),
            offset_base,
            per_channel: acc,
        }
    }

    pub fn total(&self) -> usize {
        self.per_channel * self.num_channels as usize
    }

    pub fn index(&self, channel: u32, period_idx: usize, offset: u64) -> usize {
        channel as usize * self.per_channel + self.offset_base[period_idx] + offset as usize
    }

    pub fn config(&self, index: usize) -> Configuration {
        let channel = (index / self.per_channel) as u32;
        let mut rest = index % self.per_channel;
        for (i, &b) in self.periods.iter().enumerate() {
            if rest < b as usize {
                return Configuration::new(Channel(channel), b, rest as u64);
            }
            rest -= b as usize;
            let _ = i;
        }
        unreachable!("index out of range")
    }

    pub fn periods(&self) -> &[u64] {
        &self.periods
    }
}

//! Low-complexity schedule constructors: the GREEDY family with four
//! tiebreaker rules, CHAN TRAIN, OPT_B2 for two-element BP sets, and the
//! IEEE 802.15.4 passive scan (PSV).

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    BpSet, Channel, ConfigIndexer, ConfigProbabilityMap, ListeningSchedule, ModelError,
};
use crate::Rational;

#[derive(Debug, Error)]
pub enum SchedulerError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("constructor exceeded the LCM(B)·|C| horizon cap of {0} slots")]
    HorizonCapExceeded(u64),
    #[error("unsupported input: {0}")]
    UnsupportedInput(String),
}

/// Policy for choosing among channels with equal expected discovery gain.
/// The random rules own a seeded stream: one draw per tie event, candidates
/// ordered by ascending channel id, so a seed fully determines the
/// schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tiebreaker {
    /// Uniform choice among the candidates.
    Rnd { seed: u64 },
    /// Highest channel identifier.
    Dtr,
    /// Keep the most recently scanned channel if it is a candidate, else
    /// fall back to `Rnd`.
    RndSwt { seed: u64 },
    /// Keep the most recently scanned channel if it is a candidate, else
    /// fall back to `Dtr`.
    DtrSwt,
}

/// Named constructor selection, as exposed on the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Strategy {
    GreedyRnd,
    GreedyDtr,
    GreedyRndSwt,
    GreedyDtrSwt,
    ChanTrain,
    OptB2,
    Psv,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::GreedyRnd,
        Strategy::GreedyDtr,
        Strategy::GreedyRndSwt,
        Strategy::GreedyDtrSwt,
        Strategy::ChanTrain,
        Strategy::OptB2,
        Strategy::Psv,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::GreedyRnd => "greedy-rnd",
            Strategy::GreedyDtr => "greedy-dtr",
            Strategy::GreedyRndSwt => "greedy-rnd-swt",
            Strategy::GreedyDtrSwt => "greedy-dtr-swt",
            Strategy::ChanTrain => "chan-train",
            Strategy::OptB2 => "opt-b2",
            Strategy::Psv => "psv",
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        Strategy::ALL.into_iter().find(|st| st.name() == s)
    }

    /// Runs the constructor. `seed` feeds the random tiebreakers and is
    /// ignored by the deterministic strategies.
    pub fn synthesize(
        &self,
        bp: &BpSet,
        num_channels: u32,
        probs: &ConfigProbabilityMap,
        seed: u64,
    ) -> Result<ListeningSchedule, SchedulerError> {
        match self {
            Strategy::GreedyRnd => greedy(bp, num_channels, probs, Tiebreaker::Rnd { seed }),
            Strategy::GreedyDtr => greedy(bp, num_channels, probs, Tiebreaker::Dtr),
            Strategy::GreedyRndSwt => greedy(bp, num_channels, probs, Tiebreaker::RndSwt { seed }),
            Strategy::GreedyDtrSwt => greedy(bp, num_channels, probs, Tiebreaker::DtrSwt),
            Strategy::ChanTrain => chan_train(bp, num_channels, probs),
            Strategy::OptB2 => opt_b2(bp, num_channels),
            Strategy::Psv => Ok(psv(bp, num_channels)),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One synthesis decision, for debugging constructor behavior.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub slot: u64,
    /// Per-channel discovery weight over [`SynthesisTrace::denom`].
    pub disc_weights: Vec<u128>,
    pub candidates: Vec<u32>,
    /// `None` means the slot stayed idle.
    pub chosen: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct SynthesisTrace {
    pub denom: u128,
    pub steps: Vec<TraceStep>,
}

/// Shared synthesis state: flat weight and coverage tables over `K_BC`.
struct Synth {
    indexer: ConfigIndexer,
    weights: Vec<u128>,
    covered: Vec<bool>,
    uncovered: usize,
    num_channels: u32,
    periods: Vec<u64>,
    cap: u64,
}

impl Synth {
    fn new(
        bp: &BpSet,
        num_channels: u32,
        probs: &ConfigProbabilityMap,
    ) -> Result<Self, SchedulerError> {
        if bp.is_empty() || num_channels == 0 {
            return Err(ModelError::InvalidScenario.into());
        }
        let indexer = ConfigIndexer::new(bp, num_channels);
        let mut weights = vec![0u128; indexer.total()];
        for i in 0..indexer.total() {
            weights[i] = probs.weight(&indexer.config(i));
        }
        let total = indexer.total();
        Ok(Synth {
            indexer,
            weights,
            covered: vec![false; total],
            uncovered: total,
            num_channels,
            periods: bp.periods().to_vec(),
            cap: bp.lcm() * num_channels as u64,
        })
    }

    /// Discovery weight of scanning channel `c` in slot `t`, counting only
    /// configurations not covered yet.
    fn gain(&self, c: u32, t: u64) -> u128 {
        let mut sum = 0;
        for (i, &b) in self.periods.iter().enumerate() {
            let idx = self.indexer.index(c, i, t % b);
            if !self.covered[idx] {
                sum += self.weights[idx];
            }
        }
        sum
    }

    fn gains(&self, t: u64) -> Vec<u128> {
        (0..self.num_channels).map(|c| self.gain(c, t)).collect()
    }

    /// Marks the configurations active on `(c, t)` as covered; returns the
    /// indices that flipped.
    fn cover(&mut self, c: u32, t: u64) -> Vec<usize> {
        let mut flipped = Vec::new();
        for (i, &b) in self.periods.iter().enumerate() {
            let idx = self.indexer.index(c, i, t % b);
            if !self.covered[idx] {
                self.covered[idx] = true;
                self.uncovered -= 1;
                flipped.push(idx);
            }
        }
        flipped
    }

    fn uncover(&mut self, flipped: &[usize]) {
        for &idx in flipped {
            self.covered[idx] = false;
            self.uncovered += 1;
        }
    }
}

/// Per-channel discovery probabilities at slot `t`, counting only
/// configurations whose beacon schedule does not intersect the schedule
/// prefix strictly before `t`.
pub fn disc_probs(
    num_channels: u32,
    bp: &BpSet,
    probs: &ConfigProbabilityMap,
    l_prev: &ListeningSchedule,
    t: u64,
) -> Result<Vec<Rational>, SchedulerError> {
    let mut synth = Synth::new(bp, num_channels, probs)?;
    for (slot, channel) in l_prev.iter() {
        if slot < t {
            synth.cover(channel.0, slot);
        }
    }
    Ok((0..num_channels)
        .map(|c| Rational::new(synth.gain(c, t), probs.denom()))
        .collect())
}

fn argmax_candidates(gains: &[u128]) -> (u128, Vec<u32>) {
    let max = *gains.iter().max().unwrap();
    let candidates = gains
        .iter()
        .enumerate()
        .filter(|&(_, &g)| g == max)
        .map(|(c, _)| c as u32)
        .collect();
    (max, candidates)
}

struct TiebreakState {
    rule: Tiebreaker,
    rng: Option<ChaCha8Rng>,
}

impl TiebreakState {
    fn new(rule: Tiebreaker) -> Self {
        let rng = match rule {
            Tiebreaker::Rnd { seed } | Tiebreaker::RndSwt { seed } => {
                Some(ChaCha8Rng::seed_from_u64(seed))
            }
            _ => None,
        };
        TiebreakState { rule, rng }
    }

    /// `candidates` is ascending; `prev` is the channel of the most recent
    /// scanned slot, even if idle slots intervened (the radio is still
    /// tuned there).
    fn choose(&mut self, candidates: &[u32], prev: Option<u32>) -> u32 {
        debug_assert!(!candidates.is_empty());
        match self.rule {
            Tiebreaker::RndSwt { .. } | Tiebreaker::DtrSwt => {
                if let Some(p) = prev {
                    if candidates.contains(&p) {
                        return p;
                    }
                }
            }
            _ => {}
        }
        match self.rule {
            Tiebreaker::Rnd { .. } | Tiebreaker::RndSwt { .. } => {
                if candidates.len() == 1 {
                    candidates[0]
                } else {
                    let rng = self.rng.as_mut().unwrap();
                    candidates[rng.random_range(0..candidates.len())]
                }
            }
            Tiebreaker::Dtr | Tiebreaker::DtrSwt => *candidates.last().unwrap(),
        }
    }
}

/// GREEDY: in every non-idle slot, scan a channel maximizing
/// the expected number of new discoveries; `rule` breaks ties.
pub fn greedy(
    bp: &BpSet,
    num_channels: u32,
    probs: &ConfigProbabilityMap,
    rule: Tiebreaker,
) -> Result<ListeningSchedule, SchedulerError> {
    greedy_inner(bp, num_channels, probs, rule, None).map(|(l, _)| l)
}

/// GREEDY with a per-slot decision trace.
pub fn greedy_with_trace(
    bp: &BpSet,
    num_channels: u32,
    probs: &ConfigProbabilityMap,
    rule: Tiebreaker,
) -> Result<(ListeningSchedule, SynthesisTrace), SchedulerError> {
    let mut trace = SynthesisTrace {
        denom: probs.denom(),
        steps: Vec::new(),
    };
    let (l, _) = greedy_inner(bp, num_channels, probs, rule, Some(&mut trace))?;
    Ok((l, trace))
}

fn greedy_inner(
    bp: &BpSet,
    num_channels: u32,
    probs: &ConfigProbabilityMap,
    rule: Tiebreaker,
    mut trace: Option<&mut SynthesisTrace>,
) -> Result<(ListeningSchedule, ()), SchedulerError> {
    let mut synth = Synth::new(bp, num_channels, probs)?;
    let mut tiebreak = TiebreakState::new(rule);
    let mut schedule = ListeningSchedule::new();
    let mut prev: Option<u32> = None;
    let mut t = 0u64;
    while synth.uncovered > 0 {
        if t >= synth.cap {
            return Err(SchedulerError::HorizonCapExceeded(synth.cap));
        }
        let gains = synth.gains(t);
        let (max, candidates) = argmax_candidates(&gains);
        let chosen = if max > 0 {
            let c = tiebreak.choose(&candidates, prev);
            synth.cover(c, t);
            schedule.insert(t, Channel(c));
            prev = Some(c);
            Some(c)
        } else {
            None
        };
        if let Some(tr) = trace.as_deref_mut() {
            tr.steps.push(TraceStep {
                slot: t,
                disc_weights: gains,
                candidates: if max > 0 { candidates } else { Vec::new() },
                chosen,
            });
        }
        t += 1;
    }
    Ok((schedule, ()))
}

/// CHAN TRAIN: like GREEDY, but among the candidate channels
/// it commits to the one with the longest train -- the consecutive slots
/// already scanned on it plus the future slots whose single-channel gain
/// stays at least as high as the current maximum -- and allocates the whole
/// future train at once. Ties go to the lowest channel identifier.
pub fn chan_train(
    bp: &BpSet,
    num_channels: u32,
    probs: &ConfigProbabilityMap,
) -> Result<ListeningSchedule, SchedulerError> {
    let mut synth = Synth::new(bp, num_channels, probs)?;
    let mut schedule = ListeningSchedule::new();
    let mut t = 0u64;
    while synth.uncovered > 0 {
        if t >= synth.cap {
            return Err(SchedulerError::HorizonCapExceeded(synth.cap));
        }
        let gains = synth.gains(t);
        let (max, candidates) = argmax_candidates(&gains);
        if max == 0 {
            t += 1;
            continue;
        }
        // The probe compares against max(discProbs) fixed at the decision
        // slot t, not recomputed per probe slot; this is what lets CHAN
        // TRAIN jump over slots where another channel would win.
        let mut best_c = 0u32;
        let mut best_train = 0u64;
        let mut best_future = 0u64;
        for &c in &candidates {
            let mut flipped = Vec::new();
            let mut t2 = t;
            loop {
                flipped.extend(synth.cover(c, t2));
                t2 += 1;
                if synth.gain(c, t2) < max {
                    break;
                }
            }
            let future = t2 - t;
            synth.uncover(&flipped);
            let mut past = 0u64;
            while past < t && schedule.channel_at(t - 1 - past) == Some(Channel(c)) {
                past += 1;
            }
            let train = future + past;
            if train > best_train {
                best_train = train;
                best_future = future;
                best_c = c;
            }
        }
        for s in t..t + best_future {
            synth.cover(best_c, s);
            schedule.insert(s, Channel(best_c));
        }
        t += best_future;
    }
    Ok(schedule)
}

/// OPT_B2: recursive schedules for two-element BP sets `{b0, b1}`,
/// `b0 < b1`. Channel `j` is scanned over `{j·b0, …, (j+1)·b0 - 1}` and
/// over `{|C|·b0 + (|C|-j-1)(b1-b0), …, |C|·b0 + (|C|-j)(b1-b0) - 1}`.
pub fn opt_b2(bp: &BpSet, num_channels: u32) -> Result<ListeningSchedule, SchedulerError> {
    if bp.len() != 2 {
        return Err(SchedulerError::UnsupportedInput(format!(
            "OPT_B2 requires exactly two beacon periods, got {}",
            bp.len()
        )));
    }
    if num_channels == 0 {
        return Err(ModelError::InvalidScenario.into());
    }
    let b0 = bp.periods()[0];
    let b1 = bp.periods()[1];
    let n = num_channels as u64;
    let mut schedule = ListeningSchedule::new();
    for j in 0..n {
        for s in j * b0..(j + 1) * b0 {
            schedule.insert(s, Channel(j as u32));
        }
        let start = n * b0 + (n - j - 1) * (b1 - b0);
        for s in start..start + (b1 - b0) {
            schedule.insert(s, Channel(j as u32));
        }
    }
    Ok(schedule)
}

/// PSV, the IEEE 802.15.4 passive scan: channel `j` is scanned over
/// `{j·max(B), …, (j+1)·max(B) - 1}`. Complete for any BP set, with the
/// minimum `|C| - 1` channel switches.
pub fn psv(bp: &BpSet, num_channels: u32) -> ListeningSchedule {
    let m = bp.max_period();
    let mut schedule = ListeningSchedule::new();
    for j in 0..num_channels as u64 {
        for s in j * m..(j + 1) * m {
            schedule.insert(s, Channel(j as u32));
        }
    }
    schedule
}

/// Mechanical check of the GREEDY defining property: replaying `schedule`
/// slot by slot, every scanned slot's channel is in the argmax of the
/// discovery gains given the prefix, and idle slots have all-zero gain.
pub fn satisfies_greedy_property(
    schedule: &ListeningSchedule,
    bp: &BpSet,
    num_channels: u32,
    probs: &ConfigProbabilityMap,
) -> Result<bool, SchedulerError> {
    let mut synth = Synth::new(bp, num_channels, probs)?;
    let last = match schedule.last_slot() {
        Some(l) => l,
        None => return Ok(synth.uncovered == 0),
    };
    for t in 0..=last {
        let gains = synth.gains(t);
        let (max, _) = argmax_candidates(&gains);
        match schedule.channel_at(t) {
            Some(c) => {
                if max == 0 || gains[c.0 as usize] != max {
                    return Ok(false);
                }
                synth.cover(c.0, t);
            }
            None => {
                if max > 0 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(synth.uncovered == 0)
}

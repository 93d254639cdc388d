//! Exact MDT-optimal schedules: the MDTOPT integer program over the
//! `LCM(B)·|C|` horizon, solved by an internal depth-first branch-and-bound,
//! plus an independent exhaustive oracle for cross-validation.

use thiserror::Error;

use crate::model::{
    BpSet, Channel, ConfigIndexer, ConfigProbabilityMap, ListeningSchedule, ModelError,
};
use crate::schedulers::{self, Tiebreaker};
use crate::Rational;

/// Horizon cap for model construction and LP emission.
pub const BUILD_HORIZON_CAP: u64 = 4096;
/// Horizon cap for the exact solver; larger models must go to an external
/// solver via the LP serialization.
pub const SOLVE_HORIZON_CAP: u64 = 64;
/// Node budget for the exhaustive oracle (idle counts as a choice).
pub const ORACLE_NODE_BUDGET: u64 = 100_000_000;
/// Node budget for the branch-and-bound; highly symmetric many-channel
/// instances whose optimality proof does not fit fail deterministically
/// with [`MdtOptError::TooLarge`] instead of running unbounded.
pub const SOLVE_NODE_BUDGET: u64 = 5_000_000;

#[derive(Debug, Error)]
pub enum MdtOptError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

/// The MDTOPT program: binary detection variables `x[c][t][b]`, binary scan
/// variables `h[c][t]`, objective `min Σ x·P·t`, horizon `LCM(B)·|C|`.
#[derive(Debug, Clone)]
pub struct IlpModel {
    bp: BpSet,
    num_channels: u32,
    horizon: u64,
    probs: ConfigProbabilityMap,
}

impl IlpModel {
    pub fn bp(&self) -> &BpSet {
        &self.bp
    }

    pub fn num_channels(&self) -> u32 {
        self.num_channels
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn probs(&self) -> &ConfigProbabilityMap {
        &self.probs
    }

    pub fn num_detect_vars(&self) -> u64 {
        self.num_channels as u64 * self.horizon * self.bp.len() as u64
    }

    pub fn num_scan_vars(&self) -> u64 {
        self.num_channels as u64 * self.horizon
    }

    /// Rows of the detection constraint (one per configuration).
    pub fn num_detection_rows(&self) -> u64 {
        self.num_channels as u64 * self.bp.period_sum()
    }

    /// Serializes to LP text format for external cross-checks. Objective
    /// coefficients are the integer weights `w_κ·t`; the true MDT is the
    /// optimal objective divided by the probability denominator noted in
    /// the header comment.
    pub fn to_lp_string(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let denom = self.probs.denom();
        writeln!(s, "\\ MDT-optimal listening schedule").unwrap();
        writeln!(
            s,
            "\\ objective scaled by the probability denominator {}; divide the optimum by it",
            denom
        )
        .unwrap();
        writeln!(s, "Minimize").unwrap();
        write!(s, " obj:").unwrap();
        let mut first = true;
        for c in 0..self.num_channels {
            for &b in self.bp.periods() {
                for t in 0..self.horizon {
                    let kappa = crate::model::Configuration::new(Channel(c), b, t % b);
                    let coeff = self.probs.weight(&kappa) * t as u128;
                    if coeff == 0 {
                        continue;
                    }
                    if first {
                        write!(s, " {} x_c{}_t{}_b{}", coeff, c, t, b).unwrap();
                        first = false;
                    } else {
                        write!(s, " + {} x_c{}_t{}_b{}", coeff, c, t, b).unwrap();
                    }
                }
            }
        }
        writeln!(s).unwrap();
        writeln!(s, "Subject To").unwrap();
        // C1: each configuration is detected exactly once.
        for c in 0..self.num_channels {
            for &b in self.bp.periods() {
                for delta in 0..b {
                    write!(s, " c1_c{}_b{}_d{}:", c, b, delta).unwrap();
                    let mut first = true;
                    let mut t = delta;
                    while t < self.horizon {
                        if first {
                            write!(s, " x_c{}_t{}_b{}", c, t, b).unwrap();
                            first = false;
                        } else {
                            write!(s, " + x_c{}_t{}_b{}", c, t, b).unwrap();
                        }
                        t += b;
                    }
                    writeln!(s, " = 1").unwrap();
                }
            }
        }
        // C2: detection requires a scan.
        for c in 0..self.num_channels {
            for &b in self.bp.periods() {
                for t in 0..self.horizon {
                    writeln!(s, " c2_c{}_t{}_b{}: x_c{}_t{}_b{} - h_c{}_t{} <= 0", c, t, b, c, t, b, c, t)
                        .unwrap();
                }
            }
        }
        // C3: at most one channel per slot.
        for t in 0..self.horizon {
            write!(s, " c3_t{}:", t).unwrap();
            for c in 0..self.num_channels {
                if c == 0 {
                    write!(s, " h_c{}_t{}", c, t).unwrap();
                } else {
                    write!(s, " + h_c{}_t{}", c, t).unwrap();
                }
            }
            writeln!(s, " <= 1").unwrap();
        }
        writeln!(s, "Binary").unwrap();
        for c in 0..self.num_channels {
            for t in 0..self.horizon {
                writeln!(s, " h_c{}_t{}", c, t).unwrap();
                for &b in self.bp.periods() {
                    writeln!(s, " x_c{}_t{}_b{}", c, t, b).unwrap();
                }
            }
        }
        writeln!(s, "End").unwrap();
        s
    }
}

pub fn build_ilp(
    bp: &BpSet,
    num_channels: u32,
    probs: &ConfigProbabilityMap,
) -> Result<IlpModel, MdtOptError> {
    build_ilp_capped(bp, num_channels, probs, BUILD_HORIZON_CAP)
}

pub fn build_ilp_capped(
    bp: &BpSet,
    num_channels: u32,
    probs: &ConfigProbabilityMap,
    max_horizon: u64,
) -> Result<IlpModel, MdtOptError> {
    if bp.is_empty() || num_channels == 0 {
        return Err(ModelError::InvalidScenario.into());
    }
    let horizon = bp.lcm() * num_channels as u64;
    if horizon > max_horizon {
        return Err(MdtOptError::TooLarge(format!(
            "horizon LCM(B)·|C| = {} exceeds cap {}",
            horizon, max_horizon
        )));
    }
    Ok(IlpModel {
        bp: bp.clone(),
        num_channels,
        horizon,
        probs: probs.clone(),
    })
}

/// Search state shared by the solver DFS.
struct Search {
    indexer: ConfigIndexer,
    weights: Vec<u128>,
    periods: Vec<u64>,
    num_channels: u32,
    horizon: u64,
    /// Best complete cost found (scaled by the probability denominator);
    /// `incumbent_from_dfs` distinguishes a warm-start bound from a
    /// schedule actually produced by the search.
    incumbent_cost: Option<u128>,
    incumbent_from_dfs: bool,
    best: Option<Vec<(u64, u32)>>,
    symmetric: bool,
    nodes: u64,
    aborted: bool,
}

impl Search {
    fn next_active_slot(&self, idx: usize, t: u64) -> u64 {
        let kappa = self.indexer.config(idx);
        t + (kappa.period + kappa.offset - t % kappa.period) % kappa.period
    }

    /// Accrued cost plus a fractional relaxation of the remaining cost.
    /// Each uncovered configuration releases its probability weight at the
    /// earliest slot it could still be detected at; a slot can absorb at
    /// most the weight of the single best channel's uncovered active set
    /// at that slot. Absorbing released mass as early as possible is the
    /// fractional optimum of that relaxation, and every real schedule is a
    /// feasible (integral) solution of it, so this never overestimates.
    fn lower_bound(&self, covered: &[bool], accrued: u128, t: u64) -> Option<u128> {
        // released[s - t] = total weight becoming coverable at slot s
        let span = (self.horizon - t) as usize;
        let mut released = vec![0u128; span];
        let mut remaining = 0u128;
        for idx in 0..covered.len() {
            if !covered[idx] {
                let s = self.next_active_slot(idx, t);
                if s >= self.horizon {
                    return None; // cannot complete within the horizon
                }
                released[(s - t) as usize] += self.weights[idx];
                remaining += self.weights[idx];
            }
        }
        let mut lb = accrued;
        let mut available = 0u128;
        for off in 0..span {
            available += released[off];
            if available == 0 {
                continue;
            }
            let s = t + off as u64;
            // best single channel's uncovered weight active at s
            let mut cap = 0u128;
            for c in 0..self.num_channels {
                let mut gain = 0u128;
                for (i, &b) in self.periods.iter().enumerate() {
                    let idx = self.indexer.index(c, i, s % b);
                    if !covered[idx] {
                        gain += self.weights[idx];
                    }
                }
                cap = cap.max(gain);
            }
            let take = available.min(cap);
            lb += take * s as u128;
            available -= take;
            remaining -= take;
            if remaining == 0 && available == 0 {
                return Some(lb);
            }
        }
        if available > 0 {
            return None; // even the relaxation cannot finish in time
        }
        Some(lb)
    }

    fn prune(&self, lb: u128) -> bool {
        match self.incumbent_cost {
            Some(c) if self.incumbent_from_dfs => lb >= c,
            Some(c) => lb > c,
            None => false,
        }
    }

    fn dfs(
        &mut self,
        t: u64,
        covered: &mut Vec<bool>,
        uncovered: usize,
        accrued: u128,
        stack: &mut Vec<(u64, u32)>,
        max_used_channel: i64,
    ) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > SOLVE_NODE_BUDGET {
            self.aborted = true;
            return;
        }
        if uncovered == 0 {
            let better = match self.incumbent_cost {
                Some(c) => {
                    if self.incumbent_from_dfs {
                        accrued < c
                    } else {
                        accrued <= c
                    }
                }
                None => true,
            };
            if better {
                self.incumbent_cost = Some(accrued);
                self.incumbent_from_dfs = true;
                self.best = Some(stack.clone());
            }
            return;
        }
        if t >= self.horizon {
            return;
        }
        match self.lower_bound(covered, accrued, t) {
            Some(lb) if !self.prune(lb) => {}
            _ => return,
        }

        // Per-channel newly covered configurations at slot t; branch on the
        // channels that still discover the most probability mass first, so
        // strong incumbents appear early and pruning bites.
        let channel_limit = if self.symmetric {
            ((max_used_channel + 1).min(self.num_channels as i64 - 1) + 1) as u32
        } else {
            self.num_channels
        };
        let mut branches: Vec<(u128, u32, Vec<usize>)> = Vec::new();
        for c in 0..channel_limit {
            let mut newly = Vec::new();
            let mut mass = 0u128;
            for (i, &b) in self.periods.clone().iter().enumerate() {
                let idx = self.indexer.index(c, i, t % b);
                if !covered[idx] {
                    newly.push(idx);
                    mass += self.weights[idx];
                }
            }
            if !newly.is_empty() {
                branches.push((mass, c, newly));
            }
        }
        branches.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for (mass, c, newly) in &branches {
            for &idx in newly {
                covered[idx] = true;
            }
            stack.push((t, *c));
            let used = max_used_channel.max(*c as i64);
            self.dfs(
                t + 1,
                covered,
                uncovered - newly.len(),
                accrued + mass * t as u128,
                stack,
                used,
            );
            stack.pop();
            for &idx in newly {
                covered[idx] = false;
            }
        }
        // A slot where some channel still yields discoveries never stays
        // idle in an optimal schedule: adding the scan can only lower
        // discovery times.
        if branches.is_empty() {
            self.dfs(t + 1, covered, uncovered, accrued, stack, max_used_channel);
        }
    }
}

/// Solves the model to global optimality. Returns the schedule (the scan
/// variable support) and the exact optimal MDT. Among co-optimal schedules
/// the one found first by the deterministic branch order (highest
/// discovery mass first, then lowest channel id) is returned, so equal
/// inputs always yield equal schedules. The incumbent is warm-started with
/// the best constructor output; channel symmetry is broken only when the
/// distribution is channel-uniform.
pub fn solve_exact(model: &IlpModel) -> Result<(ListeningSchedule, Rational), MdtOptError> {
    if model.horizon > SOLVE_HORIZON_CAP {
        return Err(MdtOptError::TooLarge(format!(
            "horizon {} exceeds the exact-solver cap {}; use --emit-lp and an external solver",
            model.horizon, SOLVE_HORIZON_CAP
        )));
    }
    let bp = &model.bp;
    let num_channels = model.num_channels;
    let probs = &model.probs;

    // Divisor chains under the uniform distribution: the greedy
    // construction is provably MDT-optimal (it is recursive there), so the
    // search is unnecessary. The oracle cross-checks keep this path honest.
    if crate::families::is_f3(bp) && is_uniform(bp, num_channels, probs) {
        let schedule = schedulers::greedy(bp, num_channels, probs, Tiebreaker::Dtr)
            .map_err(|e| MdtOptError::Internal(e.to_string()))?;
        let indexer = ConfigIndexer::new(bp, num_channels);
        let mut weights = vec![0u128; indexer.total()];
        for i in 0..indexer.total() {
            weights[i] = probs.weight(&indexer.config(i));
        }
        let cost = schedule_cost(&schedule, &indexer, &weights, model.horizon)
            .ok_or_else(|| MdtOptError::Internal("greedy schedule incomplete".into()))?;
        return Ok((schedule, Rational::new(cost, probs.denom())));
    }

    let indexer = ConfigIndexer::new(bp, num_channels);
    let mut weights = vec![0u128; indexer.total()];
    for i in 0..indexer.total() {
        weights[i] = probs.weight(&indexer.config(i));
    }

    // Channel symmetry: safe to break only when every channel carries the
    // same weight profile.
    let symmetric = (1..num_channels).all(|c| {
        (0..indexer.total() / num_channels as usize).all(|j| {
            weights[j] == weights[c as usize * (indexer.total() / num_channels as usize) + j]
        })
    });

    // Warm start from the cheap constructors.
    let mut seed_cost: Option<u128> = None;
    for result in [
        schedulers::greedy(bp, num_channels, probs, Tiebreaker::Dtr),
        schedulers::chan_train(bp, num_channels, probs),
    ] {
        if let Ok(l) = result {
            let cost = schedule_cost(&l, &indexer, &weights, model.horizon);
            if let Some(c) = cost {
                seed_cost = Some(seed_cost.map_or(c, |s: u128| s.min(c)));
            }
        }
    }

    let mut search = Search {
        indexer,
        weights,
        periods: bp.periods().to_vec(),
        num_channels,
        horizon: model.horizon,
        incumbent_cost: seed_cost,
        incumbent_from_dfs: false,
        best: None,
        symmetric,
        nodes: 0,
        aborted: false,
    };
    let total = search.indexer.total();
    let mut covered = vec![false; total];
    let mut stack = Vec::new();
    search.dfs(0, &mut covered, total, 0, &mut stack, -1);
    if search.aborted {
        return Err(MdtOptError::TooLarge(format!(
            "optimality proof exceeded the {} node budget; use --emit-lp and an external solver",
            SOLVE_NODE_BUDGET
        )));
    }

    let entries = search
        .best
        .ok_or_else(|| MdtOptError::Internal("no complete schedule found within horizon".into()))?;
    let schedule =
        ListeningSchedule::from_entries(entries.into_iter().map(|(t, c)| (t, Channel(c))));
    let cost = search
        .incumbent_cost
        .ok_or_else(|| MdtOptError::Internal("incumbent missing".into()))?;
    Ok((schedule, Rational::new(cost, probs.denom())))
}

fn is_uniform(bp: &BpSet, num_channels: u32, probs: &ConfigProbabilityMap) -> bool {
    match crate::families::uniform_probabilities(bp, num_channels) {
        Ok(uniform) => {
            match crate::model::enumerate_configurations(bp, num_channels) {
                Ok(configs) => configs.iter().all(|k| probs.prob(k) == uniform.prob(k)),
                Err(_) => false,
            }
        }
        Err(_) => false,
    }
}

/// Weighted discovery-time sum of a schedule, if it completes within the
/// horizon.
fn schedule_cost(
    schedule: &ListeningSchedule,
    indexer: &ConfigIndexer,
    weights: &[u128],
    horizon: u64,
) -> Option<u128> {
    let mut covered = vec![false; indexer.total()];
    let mut uncovered = indexer.total();
    let mut cost = 0u128;
    let periods = indexer.periods().to_vec();
    for (t, c) in schedule.iter() {
        if t >= horizon {
            break;
        }
        for (i, &b) in periods.iter().enumerate() {
            let idx = indexer.index(c.0, i, t % b);
            if !covered[idx] {
                covered[idx] = true;
                uncovered -= 1;
                cost += weights[idx] * t as u128;
            }
        }
    }
    (uncovered == 0).then_some(cost)
}

/// Exhaustively enumerates channel-or-idle assignments over `horizon`
/// slots, keeping the cheapest complete schedule. Independent of the
/// branch-and-bound above: no warm start, no symmetry breaking, idle
/// explored at every slot. Branches are cut when the accrued cost plus the
/// weight of each uncovered configuration at its earliest remaining beacon
/// slot already reaches the incumbent, and the search aborts once the node
/// budget is spent.
pub fn brute_force_oracle(
    bp: &BpSet,
    num_channels: u32,
    probs: &ConfigProbabilityMap,
    horizon: u64,
) -> Result<(ListeningSchedule, Rational), MdtOptError> {
    if bp.is_empty() || num_channels == 0 {
        return Err(ModelError::InvalidScenario.into());
    }
    struct Oracle {
        indexer: ConfigIndexer,
        weights: Vec<u128>,
        periods: Vec<u64>,
        num_channels: u32,
        horizon: u64,
        nodes: u64,
        best_cost: Option<u128>,
        best: Option<Vec<(u64, u32)>>,
    }
    impl Oracle {
        fn walk(
            &mut self,
            t: u64,
            covered: &mut Vec<bool>,
            uncovered: usize,
            accrued: u128,
            stack: &mut Vec<(u64, u32)>,
        ) -> Result<(), MdtOptError> {
            self.nodes += 1;
            if self.nodes > ORACLE_NODE_BUDGET {
                return Err(MdtOptError::TooLarge(format!(
                    "oracle exceeded its {} node budget",
                    ORACLE_NODE_BUDGET
                )));
            }
            if uncovered == 0 {
                if self.best_cost.map_or(true, |c| accrued < c) {
                    self.best_cost = Some(accrued);
                    self.best = Some(stack.clone());
                }
                return Ok(());
            }
            if t >= self.horizon {
                return Ok(());
            }
            // Remaining-cost floor: every uncovered configuration costs at
            // least its weight times its next beacon slot.
            let mut floor = accrued;
            for idx in 0..covered.len() {
                if !covered[idx] {
                    let k = self.indexer.config(idx);
                    let s = t + (k.period + k.offset - t % k.period) % k.period;
                    if s >= self.horizon {
                        return Ok(());
                    }
                    floor += self.weights[idx] * s as u128;
                }
            }
            if self.best_cost.is_some_and(|c| floor >= c) {
                return Ok(());
            }
            for c in 0..self.num_channels {
                let mut newly = Vec::new();
                let mut gain = 0u128;
                for (i, &b) in self.periods.clone().iter().enumerate() {
                    let idx = self.indexer.index(c, i, t % b);
                    if !covered[idx] {
                        newly.push(idx);
                        gain += self.weights[idx] * t as u128;
                    }
                }
                for &idx in &newly {
                    covered[idx] = true;
                }
                stack.push((t, c));
                self.walk(t + 1, covered, uncovered - newly.len(), accrued + gain, stack)?;
                stack.pop();
                for &idx in &newly {
                    covered[idx] = false;
                }
            }
            // Idle is a choice too.
            self.walk(t + 1, covered, uncovered, accrued, stack)
        }
    }

    let indexer = ConfigIndexer::new(bp, num_channels);
    let mut weights = vec![0u128; indexer.total()];
    for i in 0..indexer.total() {
        weights[i] = probs.weight(&indexer.config(i));
    }
    let total = indexer.total();
    // Start from the cost of the trivial passive scan (channel j over slots
    // [j·max(B), (j+1)·max(B))) so pruning bites from the first node; the
    // enumeration itself can only improve on it.
    let psv = crate::schedulers::psv(bp, num_channels);
    let psv_cost = schedule_cost(&psv, &indexer, &weights, horizon);
    let psv_entries: Vec<(u64, u32)> = psv.iter().map(|(t, c)| (t, c.0)).collect();
    let mut oracle = Oracle {
        indexer,
        weights,
        periods: bp.periods().to_vec(),
        num_channels,
        horizon,
        nodes: 0,
        best_cost: psv_cost,
        best: psv_cost.is_some().then_some(psv_entries),
    };
    let mut covered = vec![false; total];
    let mut stack = Vec::new();
    oracle.walk(0, &mut covered, total, 0, &mut stack)?;
    let entries = oracle.best.ok_or_else(|| {
        MdtOptError::TooLarge(format!("no complete schedule within horizon {}", horizon))
    })?;
    let schedule =
        ListeningSchedule::from_entries(entries.into_iter().map(|(t, c)| (t, Channel(c))));
    Ok((
        schedule,
        Rational::new(oracle.best_cost.unwrap(), probs.denom()),
    ))
}

//! Ideal-model metric suite: worst-case and mean discovery time, the
//! discovery-time CDF (NDoT), listening slots, and channel switches.

use thiserror::Error;

use crate::model::{
    discovery_time, enumerate_configurations, BpSet, ConfigProbabilityMap, Configuration,
    ListeningSchedule,
};
use crate::Rational;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("schedule is incomplete; {} undiscovered configuration(s), first: {}",
        .undiscovered.len(), .undiscovered[0])]
    IncompleteSchedule { undiscovered: Vec<Configuration> },
    #[error("invalid scenario")]
    InvalidScenario,
}

/// Metrics of a complete schedule under the ideal slotted model.
///
/// `wdt_slots` is `1 + max T_κ` so that the passive scan attains the optimum
/// of exactly `max(B)·|C|` slots; `mdt` and the CDF use the raw 0-based slot
/// indices.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub wdt_slots: u64,
    pub mdt: Rational,
    /// Step points `(T_κ / (max(B)·|C|), cumulative probability)`, sorted,
    /// ending at 1.0.
    pub ndot_cdf: Vec<(f64, f64)>,
    pub listening_slots: u64,
    pub channel_switches: u64,
    pub normalized_wdt: f64,
    /// Relative to a caller-supplied reference MDT; `None` until
    /// [`MetricsReport::set_mdt_reference`] is called.
    pub normalized_mdt: Option<f64>,
    pub normalized_switches: f64,
}

impl MetricsReport {
    pub fn mdt_f64(&self) -> f64 {
        *self.mdt.numer() as f64 / *self.mdt.denom() as f64
    }

    /// Fills `normalized_mdt` with `mdt / reference`.
    pub fn set_mdt_reference(&mut self, reference: Rational) {
        let r = *reference.numer() as f64 / *reference.denom() as f64;
        self.normalized_mdt = Some(self.mdt_f64() / r);
    }
}

pub fn compute_metrics(
    schedule: &ListeningSchedule,
    bp: &BpSet,
    num_channels: u32,
    probs: &ConfigProbabilityMap,
) -> Result<MetricsReport, MetricsError> {
    let configs =
        enumerate_configurations(bp, num_channels).map_err(|_| MetricsError::InvalidScenario)?;

    let mut times: Vec<(u64, u128)> = Vec::with_capacity(configs.len());
    let mut undiscovered = Vec::new();
    for kappa in &configs {
        match discovery_time(kappa, schedule) {
            Some(t) => times.push((t, probs.weight(kappa))),
            None => undiscovered.push(*kappa),
        }
    }
    if !undiscovered.is_empty() {
        return Err(MetricsError::IncompleteSchedule { undiscovered });
    }

    let max_t = times.iter().map(|&(t, _)| t).max().unwrap();
    let wdt_slots = max_t + 1;
    let weighted_sum: u128 = times.iter().map(|&(t, w)| t as u128 * w).sum();
    let mdt = Rational::new(weighted_sum, probs.denom());

    // CDF over normalized time; equal discovery times merge into one step.
    let opt_wdt = bp.max_period() * num_channels as u64;
    times.sort_unstable_by_key(|&(t, _)| t);
    let mut ndot_cdf: Vec<(f64, f64)> = Vec::new();
    let mut cum: u128 = 0;
    let mut i = 0;
    while i < times.len() {
        let t = times[i].0;
        while i < times.len() && times[i].0 == t {
            cum += times[i].1;
            i += 1;
        }
        ndot_cdf.push((
            t as f64 / opt_wdt as f64,
            cum as f64 / probs.denom() as f64,
        ));
    }

    let channel_switches = schedule.channel_switches();
    let normalized_switches = if num_channels == 1 {
        debug_assert_eq!(channel_switches, 0);
        1.0
    } else {
        channel_switches as f64 / (num_channels as f64 - 1.0)
    };

    Ok(MetricsReport {
        wdt_slots,
        mdt,
        ndot_cdf,
        listening_slots: schedule.len() as u64,
        channel_switches,
        normalized_wdt: wdt_slots as f64 / opt_wdt as f64,
        normalized_mdt: None,
        normalized_switches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::uniform_probabilities;
    use crate::model::Channel;
    use crate::schedulers::psv;

    #[test]
    fn trivial_single_slot_scenario() {
        let bp = BpSet::new(&[1]).unwrap();
        let probs = uniform_probabilities(&bp, 1).unwrap();
        let l = ListeningSchedule::from_entries([(0, Channel(0))]);
        let m = compute_metrics(&l, &bp, 1, &probs).unwrap();
        assert_eq!(m.mdt, Rational::new(0, 1));
        assert_eq!(m.wdt_slots, 1);
        assert_eq!(m.channel_switches, 0);
        assert_eq!(m.normalized_switches, 1.0);
        assert_eq!(m.ndot_cdf, vec![(0.0, 1.0)]);
    }

    #[test]
    fn psv_worked_example_mdt() {
        let bp = BpSet::new(&[1, 2, 4]).unwrap();
        let probs = uniform_probabilities(&bp, 3).unwrap();
        let l = psv(&bp, 3);
        let m = compute_metrics(&l, &bp, 3, &probs).unwrap();
        assert_eq!(m.mdt, Rational::new(14, 3));
        assert_eq!(m.wdt_slots, 12);
        assert_eq!(m.listening_slots, 12);
        assert_eq!(m.channel_switches, 2);
        let (x, y) = *m.ndot_cdf.last().unwrap();
        assert!(x <= 1.0 && (y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incomplete_schedule_reports_missing_configs() {
        let bp = BpSet::new(&[1, 2]).unwrap();
        let probs = uniform_probabilities(&bp, 1).unwrap();
        let l = ListeningSchedule::from_entries([(0, Channel(0))]);
        match compute_metrics(&l, &bp, 1, &probs) {
            Err(MetricsError::IncompleteSchedule { undiscovered }) => {
                assert_eq!(undiscovered, vec![Configuration::new(Channel(0), 2, 1)]);
            }
            other => panic!("expected incomplete error, got {:?}", other),
        }
    }

    #[test]
    fn cdf_is_monotone_and_bounded_by_wdt() {
        let bp = BpSet::new(&[2, 3]).unwrap();
        let probs = uniform_probabilities(&bp, 2).unwrap();
        let l = psv(&bp, 2);
        let m = compute_metrics(&l, &bp, 2, &probs).unwrap();
        assert!(m.listening_slots <= m.wdt_slots);
        for w in m.ndot_cdf.windows(2) {
            assert!(w[0].0 < w[1].0);
            assert!(w[0].1 <= w[1].1);
        }
    }
}

//! Configuration-probability files: one `channel,period,offset,num,den`
//! line per configuration, `#` comments allowed. Probabilities must cover
//! every configuration of the scenario and sum to one exactly.

use std::collections::HashMap;

use anyhow::{bail, Context, Result};
use mcdisc_core::model::{BpSet, Channel, ConfigProbabilityMap, Configuration};
use mcdisc_core::Rational;

pub fn parse(text: &str, bp: &BpSet, num_channels: u32) -> Result<ConfigProbabilityMap> {
    let mut probs: HashMap<Configuration, Rational> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            bail!(
                "line {}: expected channel,period,offset,num,den",
                lineno + 1
            );
        }
        let parse_u64 = |s: &str, what: &str| -> Result<u64> {
            s.parse::<u64>()
                .with_context(|| format!("line {}: bad {}", lineno + 1, what))
        };
        let c = parse_u64(fields[0], "channel")? as u32;
        let b = parse_u64(fields[1], "period")?;
        let delta = parse_u64(fields[2], "offset")?;
        let num = parse_u64(fields[3], "numerator")? as u128;
        let den = parse_u64(fields[4], "denominator")? as u128;
        if den == 0 {
            bail!("line {}: zero denominator", lineno + 1);
        }
        let kappa = Configuration::new(Channel(c), b, delta);
        if probs.insert(kappa, Rational::new(num, den)).is_some() {
            bail!("line {}: duplicate configuration {}", lineno + 1, kappa);
        }
    }
    ConfigProbabilityMap::from_rationals(bp, num_channels, &probs)
        .context("probability file does not define a valid distribution for the scenario")
}

pub fn to_string(probs: &ConfigProbabilityMap, bp: &BpSet, num_channels: u32) -> String {
    let mut out = String::from("# channel,period,offset,num,den\n");
    for kappa in mcdisc_core::model::enumerate_configurations(bp, num_channels).unwrap_or_default()
    {
        let p = probs.prob(&kappa);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            kappa.channel.0,
            kappa.period,
            kappa.offset,
            p.numer(),
            p.denom()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use mcdisc_core::families::uniform_probabilities;

    #[test]
    fn roundtrip_uniform() {
        let bp = BpSet::new(&[1, 2]).unwrap();
        let probs = uniform_probabilities(&bp, 2).unwrap();
        let text = to_string(&probs, &bp, 2);
        let parsed = parse(&text, &bp, 2).unwrap();
        for kappa in mcdisc_core::model::enumerate_configurations(&bp, 2).unwrap() {
            assert_eq!(parsed.prob(&kappa), probs.prob(&kappa));
        }
    }

    #[test]
    fn bad_sum_is_rejected() {
        let bp = BpSet::new(&[1]).unwrap();
        let text = "0,1,0,1,2\n";
        assert!(parse(text, &bp, 1).is_err());
    }
}

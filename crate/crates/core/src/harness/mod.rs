//! Simulation experiments: scenarios, evaluation metrics and result tables.

mod experiment;
pub mod presets;
mod table;

use std::fmt;
use std::str::FromStr;

pub use experiment::{derive_seed, run_experiment, ExperimentConfig};
pub use table::{OutputFormat, ResultRow, ResultTable};

use crate::error::{Error, Result};
use crate::model::{Site, SiteSet};
use crate::oracle::Oracle;
use crate::sampler::SampleSet;
use crate::selection::CandidateCollection;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    Fig2Variance,
    Fig3RiskRatio,
    Fig4OnDiscovery,
    Fig5IniDiscovery,
    Fig6OracleVsTruth,
    Fig7_8SelectCut,
    Fig9Efficient,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Fig2Variance,
        Scenario::Fig3RiskRatio,
        Scenario::Fig4OnDiscovery,
        Scenario::Fig5IniDiscovery,
        Scenario::Fig6OracleVsTruth,
        Scenario::Fig7_8SelectCut,
        Scenario::Fig9Efficient,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Fig2Variance => "fig2_variance",
            Scenario::Fig3RiskRatio => "fig3_riskratio",
            Scenario::Fig4OnDiscovery => "fig4_on_discovery",
            Scenario::Fig5IniDiscovery => "fig5_ini_discovery",
            Scenario::Fig6OracleVsTruth => "fig6_oracle_vs_truth",
            Scenario::Fig7_8SelectCut => "fig7_8_select_cut",
            Scenario::Fig9Efficient => "fig9_efficient",
        }
    }

    /// Metric columns, after `n` and `replica`.
    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            Scenario::Fig2Variance => &["sqrt_n_variance"],
            Scenario::Fig3RiskRatio => &["risk_ratio_variance", "risk_ratio_dimension"],
            Scenario::Fig4OnDiscovery => &[
                "pdr_oracle_variance",
                "ndr_oracle_variance",
                "pdr_oracle_dimension",
                "ndr_oracle_dimension",
            ],
            Scenario::Fig5IniDiscovery => &[
                "pdr_truth_variance",
                "ndr_truth_variance",
                "pdr_truth_dimension",
                "ndr_truth_dimension",
            ],
            Scenario::Fig6OracleVsTruth => &["pdr_oracle_truth", "ndr_oracle_truth"],
            Scenario::Fig7_8SelectCut => &[
                "risk_ratio_cut",
                "risk_ratio_select",
                "pdr_cut",
                "ndr_cut",
                "pdr_select",
                "ndr_select",
            ],
            Scenario::Fig9Efficient => &[
                "contains_1",
                "contains_2",
                "contains_3",
                "contains_4",
                "contains_5",
                "kept_count",
            ],
        }
    }

    pub fn from_columns(cols: &[&str]) -> Result<Scenario> {
        Scenario::ALL
            .into_iter()
            .find(|s| s.columns() == cols)
            .ok_or_else(|| Error::input(format!("no scenario has the columns {}", cols.join(","))))
    }

    /// Scenarios whose ground truth needs full enumeration.
    pub fn needs_oracle(&self) -> bool {
        !matches!(self, Scenario::Fig9Efficient)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::input(format!("unknown scenario `{s}`")))
    }
}

/// `(pdr, ndr)` of an estimate against a reference set inside `universe`.
pub fn discovery_rates(estimated: &SiteSet, reference: &SiteSet, universe: &SiteSet) -> (f64, f64) {
    let pdr = if reference.is_empty() {
        1.0
    } else {
        estimated.intersection(reference).len() as f64 / reference.len() as f64
    };
    let outside = universe.difference(reference);
    let ndr = if outside.is_empty() {
        1.0
    } else {
        outside.difference(estimated).len() as f64 / outside.len() as f64
    };
    (pdr, ndr)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskRatio {
    /// `+∞` when some candidate has zero risk and the estimate does not.
    pub ratio: f64,
    /// Set when the denominator was exactly zero.
    pub zero_denominator: bool,
}

pub fn ratio_of(risk: f64, best: f64) -> RiskRatio {
    if best > 0.0 {
        RiskRatio {
            ratio: risk / best,
            zero_denominator: false,
        }
    } else {
        RiskRatio {
            ratio: if risk > 0.0 { f64::INFINITY } else { 1.0 },
            zero_denominator: true,
        }
    }
}

/// Risk of `estimate` over the smallest risk reached in `collection`.
pub fn risk_ratio(
    samples: &SampleSet,
    oracle: &Oracle,
    i: Site,
    estimate: &SiteSet,
    collection: &CandidateCollection,
) -> Result<RiskRatio> {
    let risk = oracle.risk(samples, i, estimate)?;
    let (_, best) = oracle.oracle_model(samples, i, collection)?;
    Ok(ratio_of(risk, best))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_on_simple_sets() {
        let u = SiteSet::from_ids(&[0, 1, 2, 3, 5, 6, 7, 8]);
        let r = SiteSet::from_ids(&[1, 3, 5, 7]);
        assert_eq!(discovery_rates(&r, &r, &u), (1.0, 1.0));
        assert_eq!(discovery_rates(&u, &r, &u), (1.0, 0.0));
        assert_eq!(discovery_rates(&SiteSet::empty(), &r, &u), (0.0, 1.0));
        assert_eq!(discovery_rates(&SiteSet::from_ids(&[1, 0]), &r, &u), (0.25, 0.75));
        assert_eq!(discovery_rates(&SiteSet::empty(), &SiteSet::empty(), &SiteSet::empty()), (1.0, 1.0));
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
            assert_eq!(Scenario::from_columns(s.columns()).unwrap(), s);
        }
        assert!("fig1".parse::<Scenario>().is_err());
    }

    #[test]
    fn zero_denominator_is_flagged() {
        assert_eq!(ratio_of(0.2, 0.1).ratio, 2.0);
        let r = ratio_of(0.2, 0.0);
        assert!(r.zero_denominator && r.ratio.is_infinite());
    }
}

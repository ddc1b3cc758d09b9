use rayon::prelude::*;

use crate::empirical::EmpiricalTable;
use crate::error::{Error, Result};
use crate::model::{IsingModel, Site, SiteSet};
use crate::neighborhood::{cut_table, efficient_select, ConstantChoice, CutSpec, EtaParams};
use crate::oracle::{Oracle, EXACT_CAP};
use crate::sampler::{sample, SampleSet, SamplerConfig};
use crate::selection::{
    calibrate, CandidateCollection, CandidateEval, CandidateScores, ComplexityMeasure, ConstantGrid, PenaltyForm,
};

use super::presets;
use super::{discovery_rates, ratio_of, ResultRow, ResultTable, Scenario};

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub model: IsingModel,
    pub target: Site,
    pub sample_sizes: Vec<usize>,
    pub replicas: usize,
    pub seed: u64,
    pub grid: ConstantGrid,
    /// Complexity measure of the selection step in the two-step and efficient scenarios.
    pub measure: ComplexityMeasure,
    pub cut: CutSpec,
    pub delta: f64,
    pub kappa: f64,
    /// Cardinality bound `m` of the candidate collection.
    pub max_card: usize,
    /// Hard bound on the number of sites kept by screening.
    pub max_kept: usize,
    pub sampler: SamplerConfig,
}

pub const DEFAULT_SAMPLE_SIZES: [usize; 5] = [500, 1000, 2000, 5000, 10_000];
pub const DEFAULT_REPLICAS: usize = 20;
pub const DEFAULT_SEED: u64 = 1;

impl ExperimentConfig {
    /// Desk-scale defaults on the scenario's reference model.
    pub fn for_scenario(scenario: Scenario) -> Result<ExperimentConfig> {
        let (model, target) = match scenario {
            Scenario::Fig9Efficient => {
                let s = presets::sparse_200()?;
                (s.model, s.target)
            }
            _ => (presets::figure1_model()?, presets::lattice_center()),
        };
        Ok(ExperimentConfig {
            scenario,
            model,
            target,
            sample_sizes: DEFAULT_SAMPLE_SIZES.to_vec(),
            replicas: DEFAULT_REPLICAS,
            seed: DEFAULT_SEED,
            grid: ConstantGrid::default(),
            measure: ComplexityMeasure::Variance,
            cut: CutSpec::default(),
            delta: 10.0,
            kappa: 1.0,
            max_card: 8,
            max_kept: 10,
            sampler: SamplerConfig::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_sizes.is_empty() || self.sample_sizes[0] == 0 {
            return Err(Error::input("sample sizes must be positive"));
        }
        if self.sample_sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input("sample sizes must be strictly increasing"));
        }
        if self.replicas == 0 {
            return Err(Error::input("at least one replica is required"));
        }
        if !(self.delta > 1.0 && self.delta.is_finite()) {
            return Err(Error::input(format!("delta must be a finite number > 1, got {}", self.delta)));
        }
        self.model.index_of(self.target)?;
        self.sampler.validate()?;
        if self.scenario.needs_oracle() && self.model.len() > EXACT_CAP {
            return Err(Error::Capacity {
                what: "exact oracle",
                needed: self.model.len(),
                limit: EXACT_CAP,
            });
        }
        if self.scenario == Scenario::Fig9Efficient && self.model.true_neighborhood(self.target)?.len() < 5 {
            return Err(Error::input(format!(
                "{} needs a target with at least five interacting sites",
                self.scenario
            )));
        }
        Ok(())
    }

    fn universe(&self) -> SiteSet {
        self.model.site_set().without(self.target)
    }
}

/// Seed of replica `replica` at sample size `n`.
pub fn derive_seed(base: u64, n: usize, replica: usize) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    mix(mix(mix(base) ^ n as u64) ^ replica as u64)
}

struct SmallContext<'a> {
    config: &'a ExperimentConfig,
    oracle: Oracle,
    sets: Vec<SiteSet>,
    universe: SiteSet,
    truth: SiteSet,
    form: PenaltyForm,
}

impl SmallContext<'_> {
    fn replica(&self, samples: &SampleSet) -> Result<Vec<f64>> {
        let cfg = self.config;
        let i = cfg.target;
        let n = samples.n();
        if cfg.scenario == Scenario::Fig2Variance {
            return Ok(vec![(n as f64).sqrt() * self.oracle.variance_term(samples, i, &self.truth)?]);
        }
        let pairs = self
            .sets
            .par_iter()
            .map(|v| {
                let table = EmpiricalTable::build(samples, i, v)?;
                Ok((CandidateEval::from_table(&table, cfg.delta, self.form)?, self.oracle.risk_of_table(&table)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let (evals, risks): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let best = (0..risks.len()).fold(0, |b, k| if risks[k] < risks[b] { k } else { b });
        let oracle_set = &self.sets[best];
        let scores = CandidateScores::from_evals(n, evals)?;
        let slope_pick = |measure| scores.argmin(calibrate(&scores, &cfg.grid, measure).final_constant());
        let rates = |est: &SiteSet, reference: &SiteSet| discovery_rates(est, reference, &self.universe);
        let out = match cfg.scenario {
            Scenario::Fig2Variance => unreachable!(),
            Scenario::Fig3RiskRatio => [ComplexityMeasure::Variance, ComplexityMeasure::Dimension]
                .into_iter()
                .map(|m| ratio_of(risks[slope_pick(m)], risks[best]).ratio)
                .collect(),
            Scenario::Fig4OnDiscovery | Scenario::Fig5IniDiscovery => {
                let reference = if cfg.scenario == Scenario::Fig4OnDiscovery { oracle_set } else { &self.truth };
                let mut out = Vec::new();
                for m in [ComplexityMeasure::Variance, ComplexityMeasure::Dimension] {
                    let (p, q) = rates(&self.sets[slope_pick(m)], reference);
                    out.extend([p, q]);
                }
                out
            }
            Scenario::Fig6OracleVsTruth => {
                let (p, q) = rates(oracle_set, &self.truth);
                vec![p, q]
            }
            Scenario::Fig7_8SelectCut => {
                let k = slope_pick(cfg.measure);
                let selected = &self.sets[k];
                let spec = CutSpec { delta: cfg.delta, ..cfg.cut };
                let estimate = cut_table(&EmpiricalTable::build(samples, i, selected)?, n, &spec)?;
                let cut_risk = self.oracle.risk(samples, i, &estimate)?;
                let (pc, qc) = rates(&estimate, &self.truth);
                let (ps, qs) = rates(selected, &self.truth);
                vec![
                    ratio_of(cut_risk, risks[best]).ratio,
                    ratio_of(risks[k], risks[best]).ratio,
                    pc,
                    qc,
                    ps,
                    qs,
                ]
            }
            Scenario::Fig9Efficient => unreachable!(),
        };
        Ok(out)
    }
}

fn efficient_replica(config: &ExperimentConfig, ranked: &[Site], samples: &SampleSet) -> Result<Vec<f64>> {
    let params = EtaParams {
        delta: config.delta,
        kappa: config.kappa,
        max_kept: config.max_kept,
    };
    let choice = ConstantChoice::Slope {
        grid: config.grid.clone(),
        measure: config.measure,
    };
    let sel = efficient_select(samples, config.target, &config.universe(), &params, &choice)?;
    let mut out: Vec<f64> = ranked[..5]
        .iter()
        .map(|&j| if sel.result.chosen.contains(j) { 1.0 } else { 0.0 })
        .collect();
    out.push(sel.reduction.kept.len() as f64);
    Ok(out)
}

/// Interacting sites of `i` by decreasing interaction strength, then site id.
fn ranked_neighbors(model: &IsingModel, i: Site) -> Result<Vec<Site>> {
    let mut ranked = model
        .true_neighborhood(i)?
        .iter()
        .map(|j| model.potential_omega(i, j).map(|w| (j, w)))
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked.into_iter().map(|(j, _)| j).collect())
}

/// Runs every `(n, replica)` job of the scenario; rows come out sorted by `n`, then replica.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = config
        .sample_sizes
        .iter()
        .flat_map(|&n| (0..config.replicas).map(move |r| (n, r)))
        .collect();
    let draw = |n: usize, r: usize| {
        let sampler = SamplerConfig {
            seed: derive_seed(config.seed, n, r),
            ..config.sampler
        };
        sample(&config.model, n, &sampler)
    };
    let values: Vec<Vec<f64>> = if config.scenario.needs_oracle() {
        let universe = config.universe();
        let collection = CandidateCollection::new(universe.clone(), config.max_card);
        let ctx = SmallContext {
            config,
            oracle: Oracle::new(&config.model)?,
            sets: collection.iter().collect(),
            form: PenaltyForm::CollectionSize {
                n_bound: collection.len() as f64,
            },
            truth: config.model.true_neighborhood(config.target)?.intersection(&universe),
            universe,
        };
        jobs.par_iter()
            .map(|&(n, r)| ctx.replica(&draw(n, r)?))
            .collect::<Result<_>>()?
    } else {
        let ranked = ranked_neighbors(&config.model, config.target)?;
        jobs.par_iter()
            .map(|&(n, r)| efficient_replica(config, &ranked, &draw(n, r)?))
            .collect::<Result<_>>()?
    };
    let mut table = ResultTable::new(config.scenario);
    table.rows = jobs
        .into_iter()
        .zip(values)
        .map(|((n, replica), values)| ResultRow { n, replica, values })
        .collect();
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_across_jobs() {
        let a = derive_seed(1, 500, 0);
        assert_ne!(a, derive_seed(1, 500, 1));
        assert_ne!(a, derive_seed(1, 1000, 0));
        assert_ne!(a, derive_seed(2, 500, 0));
        assert_eq!(a, derive_seed(1, 500, 0));
    }

    #[test]
    fn invalid_configs_fail_before_sampling() {
        let mut c = ExperimentConfig::for_scenario(Scenario::Fig2Variance).unwrap();
        c.sample_sizes = vec![200, 100];
        assert!(run_experiment(&c).is_err());
        c.sample_sizes = vec![100];
        c.replicas = 0;
        assert!(run_experiment(&c).is_err());
        let mut big = ExperimentConfig::for_scenario(Scenario::Fig9Efficient).unwrap();
        big.scenario = Scenario::Fig3RiskRatio;
        assert!(matches!(run_experiment(&big), Err(Error::Capacity { .. })));
    }

    #[test]
    fn small_run_is_deterministic() {
        let mut c = ExperimentConfig::for_scenario(Scenario::Fig7_8SelectCut).unwrap();
        c.sample_sizes = vec![300];
        c.replicas = 2;
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert_eq!(a.rows.len(), 2);
        for row in &a.rows {
            assert!(row.values[0] >= 1.0 && row.values[1] >= 1.0);
            assert!(row.values[2..].iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}

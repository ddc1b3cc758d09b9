//! Exact ground truth by enumeration over every configuration of a small model.
//!
//! Pattern keys follow the empirical tables: bit `k` of a key is set when the
//! `k`-th member (in site order) of the conditioning set is `+1`.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::empirical::EmpiricalTable;
use crate::error::{Error, Result};
use crate::model::{sigmoid, IsingModel, Site, SiteSet, Spin};
use crate::sampler::{joint_distribution, JointTable, SampleSet};
use crate::selection::{enumerate_collection, CandidateCollection};

/// Default enumeration capacity, in sites.
pub const EXACT_CAP: usize = 20;

/// Default cardinality bound of the brute-force `Ψ` sweep.
pub const PSI_CARD_CAP: usize = 8;

/// Absolute constant of the non-asymptotic variance bound. Diagnostic only.
pub const VARIANCE_BOUND_C2: f64 = 400.0;

/// `P_{i|V}` as a table over conditioning patterns.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactConditional {
    pub target: Site,
    pub scope: SiteSet,
    /// `P(x(i) = +1 | pattern)`, `1/2` on zero-probability patterns.
    plus: Vec<f64>,
    /// `P(x(V))` per pattern.
    marginal: Vec<f64>,
}

impl ExactConditional {
    pub fn prob(&self, spin: Spin, key: u64) -> f64 {
        let p = self.plus[key as usize];
        if spin > 0 {
            p
        } else {
            1.0 - p
        }
    }

    pub fn plus(&self) -> &[f64] {
        &self.plus
    }

    pub fn marginal(&self) -> &[f64] {
        &self.marginal
    }

    /// `‖P_{i|V}‖_∞` over patterns of positive probability.
    pub fn sup_norm(&self) -> f64 {
        self.plus
            .iter()
            .zip(&self.marginal)
            .filter(|(_, m)| **m > 0.0)
            .map(|(p, _)| p.max(1.0 - p))
            .fold(0.5, f64::max)
    }
}

/// Minimum of `Ψ` over the admissible sets, with the minimizer.
///
/// The constraint uses the empirical `p̂⁻`, so the value depends on the sample.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiValue {
    pub value: f64,
    pub minimizer: Option<SiteSet>,
    pub card_cap: usize,
}

pub struct Oracle {
    model: IsingModel,
    joint: JointTable,
    full_plus: Vec<OnceLock<Vec<f64>>>,
}

/// Bit positions (model order) of the members of `scope`.
fn positions(model: &IsingModel, scope: &SiteSet) -> Result<Vec<usize>> {
    scope.iter().map(|s| model.index_of(s)).collect()
}

fn project(x: u64, pos: &[usize]) -> u64 {
    pos.iter()
        .enumerate()
        .fold(0u64, |acc, (k, &p)| acc | (((x >> p) & 1) << k))
}

impl Oracle {
    pub fn new(model: &IsingModel) -> Result<Oracle> {
        Oracle::with_cap(model, EXACT_CAP)
    }

    pub fn with_cap(model: &IsingModel, cap: usize) -> Result<Oracle> {
        let joint = joint_distribution(model, cap)?;
        Ok(Oracle {
            model: model.clone(),
            joint,
            full_plus: (0..model.len()).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn model(&self) -> &IsingModel {
        &self.model
    }

    pub fn joint(&self) -> &JointTable {
        &self.joint
    }

    fn configs(&self) -> u64 {
        1u64 << self.model.len()
    }

    /// `P(x(i) = +1 | x(G∖{i}))` for every full configuration index.
    fn full_plus(&self, i: Site) -> Result<&[f64]> {
        let ii = self.model.index_of(i)?;
        Ok(self.full_plus[ii].get_or_init(|| {
            let m = self.model.len();
            (0..self.configs())
                .into_par_iter()
                .map_init(
                    || vec![0 as Spin; m],
                    |spins, x| {
                        for (k, s) in spins.iter_mut().enumerate() {
                            *s = if (x >> k) & 1 == 1 { 1 } else { -1 };
                        }
                        spins[ii] = 1;
                        sigmoid(self.model.log_odds(ii, spins))
                    },
                )
                .collect()
        }))
    }

    /// `P(x(V))` for every pattern of `scope`.
    pub fn marginal(&self, scope: &SiteSet) -> Result<Vec<f64>> {
        let pos = positions(&self.model, scope)?;
        let mut out = vec![0.0; 1usize << pos.len()];
        for (x, &p) in self.joint.probs().iter().enumerate() {
            out[project(x as u64, &pos) as usize] += p;
        }
        Ok(out)
    }

    /// `min_{x} P(x(V))`.
    pub fn min_marginal(&self, scope: &SiteSet) -> Result<f64> {
        Ok(self.marginal(scope)?.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// `P_{i|V}` by exact summation; `i` is dropped from `v` if present.
    pub fn exact_conditional_sub(&self, i: Site, v: &SiteSet) -> Result<ExactConditional> {
        let ii = self.model.index_of(i)?;
        let scope = v.without(i);
        let mut pos = positions(&self.model, &scope)?;
        let width = pos.len();
        pos.push(ii);
        let mut joint = vec![0.0; 1usize << (width + 1)];
        for (x, &p) in self.joint.probs().iter().enumerate() {
            joint[project(x as u64, &pos) as usize] += p;
        }
        let top = 1usize << width;
        let (minus, plus_part) = joint.split_at(top);
        let marginal: Vec<f64> = minus.iter().zip(plus_part).map(|(a, b)| a + b).collect();
        let plus = plus_part
            .iter()
            .zip(&marginal)
            .map(|(p, m)| if *m > 0.0 { p / m } else { 0.5 })
            .collect();
        Ok(ExactConditional {
            target: i,
            scope,
            plus,
            marginal,
        })
    }

    /// `‖P_{i|V} - P_{i|G}‖_∞` over every full configuration.
    pub fn bias(&self, i: Site, v: &SiteSet) -> Result<f64> {
        let sub = self.exact_conditional_sub(i, v)?;
        let pos = positions(&self.model, &sub.scope)?;
        let full = self.full_plus(i)?;
        Ok(full
            .iter()
            .enumerate()
            .map(|(x, g)| (sub.plus[project(x as u64, &pos) as usize] - g).abs())
            .fold(0.0, f64::max))
    }

    /// `max_x P_{i|G}(x) - P_{i|G}(x^j)`, with `x^j` the configuration flipped at `j`.
    pub fn true_omega_full(&self, i: Site, j: Site) -> Result<f64> {
        if i == j {
            return Err(Error::input(format!("ω is undefined for the pair ({i}, {i})")));
        }
        let ii = self.model.index_of(i)?;
        let jj = self.model.index_of(j)?;
        let full = self.full_plus(i)?;
        let of = |x: usize| {
            if (x >> ii) & 1 == 1 {
                full[x]
            } else {
                1.0 - full[x]
            }
        };
        Ok((0..full.len())
            .map(|x| of(x) - of(x ^ (1 << jj)))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// `‖P_{i|G}‖_∞`.
    pub fn sup_norm_full(&self, i: Site) -> Result<f64> {
        let full = self.full_plus(i)?;
        Ok(full.iter().map(|p| p.max(1.0 - p)).fold(0.5, f64::max))
    }

    fn empirical_plus(samples: &SampleSet, i: Site, scope: &SiteSet) -> Result<Vec<f64>> {
        let table = EmpiricalTable::build(samples, i, scope)?;
        Ok((0..1u64 << scope.len()).map(|key| table.conditional(1, key)).collect())
    }

    /// `‖P̂_{i|V} - P_{i|G}‖_∞` over every full configuration.
    pub fn risk(&self, samples: &SampleSet, i: Site, v: &SiteSet) -> Result<f64> {
        let scope = v.without(i);
        let hat = Oracle::empirical_plus(samples, i, &scope)?;
        self.risk_of(i, &scope, &hat)
    }

    /// Risk of the plug-in conditional held by `table`.
    pub fn risk_of_table(&self, table: &EmpiricalTable) -> Result<f64> {
        let hat: Vec<f64> = (0..1u64 << table.scope().len()).map(|key| table.conditional(1, key)).collect();
        self.risk_of(table.target(), table.scope(), &hat)
    }

    fn risk_of(&self, i: Site, scope: &SiteSet, hat: &[f64]) -> Result<f64> {
        let pos = positions(&self.model, scope)?;
        let full = self.full_plus(i)?;
        Ok(full
            .iter()
            .enumerate()
            .map(|(x, g)| (hat[project(x as u64, &pos) as usize] - g).abs())
            .fold(0.0, f64::max))
    }

    /// `‖P̂_{i|V} - P_{i|V}‖_∞` over conditioning patterns.
    pub fn variance_term(&self, samples: &SampleSet, i: Site, v: &SiteSet) -> Result<f64> {
        let sub = self.exact_conditional_sub(i, v)?;
        let hat = Oracle::empirical_plus(samples, i, &sub.scope)?;
        Ok(hat
            .iter()
            .zip(&sub.plus)
            .map(|(h, p)| (h - p).abs())
            .fold(0.0, f64::max))
    }

    /// Risk-minimizing member of the collection; the first in enumeration order wins ties.
    pub fn oracle_model(&self, samples: &SampleSet, i: Site, collection: &CandidateCollection) -> Result<(SiteSet, f64)> {
        let sets: Vec<SiteSet> = collection.iter().collect();
        let risks = sets
            .par_iter()
            .map(|v| self.risk(samples, i, v))
            .collect::<Result<Vec<_>>>()?;
        let mut best = 0;
        for (k, r) in risks.iter().enumerate() {
            if *r < risks[best] {
                best = k;
            }
        }
        Ok((sets[best].clone(), risks[best]))
    }

    /// Smallest bias over `V ⊆ V_M ∖ {i}` with `|V| ≤ card_cap` and `p̂⁻_V ≥ v⁻²`.
    pub fn psi(&self, samples: &SampleSet, i: Site, v: f64, card_cap: usize) -> Result<PsiValue> {
        if !(v > 0.0) {
            return Err(Error::input(format!("Ψ needs v > 0, got {v}")));
        }
        let universe: SiteSet = samples.site_labels().iter().copied().filter(|&s| s != i).collect();
        let bound = v.powi(-2);
        let mut best = PsiValue {
            value: f64::INFINITY,
            minimizer: None,
            card_cap,
        };
        for set in enumerate_collection(&universe, card_cap) {
            let table = EmpiricalTable::build(samples, i, &set)?;
            if table.p_hat_min() < bound {
                continue;
            }
            let b = self.bias(i, &set)?;
            if b < best.value {
                best.value = b;
                best.minimizer = Some(set);
            }
        }
        Ok(best)
    }
}

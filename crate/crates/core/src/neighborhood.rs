//! Cut step, the two-step select-and-cut estimator and correlation screening.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::empirical::{pair_correlation_cols, EmpiricalTable};
use crate::error::{Error, Result};
use crate::model::{Site, SiteSet};
use crate::sampler::SampleSet;
use crate::selection::{
    select_model, slope_select, CandidateCollection, ComplexityMeasure, ConstantGrid, PenaltyForm, SelectionResult,
    SlopeCalibration,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutKind {
    /// `c·sqrt(ln(δn) / (n p̂⁻))`.
    Sqrt,
    /// `c / (n p̂⁻)`.
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutSpec {
    pub kind: CutKind,
    pub c: f64,
    pub delta: f64,
}

impl CutSpec {
    pub fn new(kind: CutKind, c: f64, delta: f64) -> Result<Self> {
        if !(c >= 0.0) || c.is_nan() {
            return Err(Error::input(format!("cut multiplier must be ≥ 0, got {c}")));
        }
        if !(delta > 1.0 && delta.is_finite()) {
            return Err(Error::input(format!("delta must be a finite number > 1, got {delta}")));
        }
        Ok(CutSpec { kind, c, delta })
    }

    pub fn threshold(&self, n: usize, p_hat_min: f64) -> f64 {
        let np = n as f64 * p_hat_min;
        let base = match self.kind {
            CutKind::Sqrt => ((self.delta * n as f64).ln() / np).sqrt(),
            CutKind::Inverse => 1.0 / np,
        };
        if self.c.is_infinite() {
            f64::INFINITY
        } else {
            self.c * base
        }
    }

    /// `sqrt:<c>` or `inverse:<c>`.
    pub fn parse(text: &str, delta: f64) -> Result<Self> {
        let (kind, c) = text
            .split_once(':')
            .ok_or_else(|| Error::input(format!("cut spec `{text}` is not of the form kind:c")))?;
        let kind = match kind.trim() {
            "sqrt" => CutKind::Sqrt,
            "inverse" => CutKind::Inverse,
            other => return Err(Error::input(format!("unknown cut kind `{other}`"))),
        };
        let c = c
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::input(format!("bad cut multiplier `{c}`")))?;
        CutSpec::new(kind, c, delta)
    }
}

impl Default for CutSpec {
    fn default() -> Self {
        CutSpec {
            kind: CutKind::Inverse,
            c: 0.3,
            delta: 10.0,
        }
    }
}

impl fmt::Display for CutSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            CutKind::Sqrt => "sqrt",
            CutKind::Inverse => "inverse",
        };
        write!(f, "{kind}:{}", self.c)
    }
}

impl FromStr for CutSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CutSpec::parse(s, 10.0)
    }
}

/// Members `j` of `v` whose empirical interaction strength exceeds the threshold.
pub fn cut(samples: &SampleSet, i: Site, v: &SiteSet, spec: &CutSpec) -> Result<SiteSet> {
    let table = EmpiricalTable::build(samples, i, v)?;
    cut_table(&table, samples.n(), spec)
}

pub fn cut_table(table: &EmpiricalTable, n: usize, spec: &CutSpec) -> Result<SiteSet> {
    let threshold = spec.threshold(n, table.p_hat_min());
    let mut kept = Vec::new();
    for j in table.scope().iter() {
        if table.empirical_omega(j)? > threshold {
            kept.push(j);
        }
    }
    Ok(SiteSet::new(kept))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectCut {
    pub selected: SiteSet,
    pub estimate: SiteSet,
    pub calibration: SlopeCalibration,
}

/// Slope-calibrated selection followed by the cut step.
#[allow(clippy::too_many_arguments)]
pub fn select_and_cut(
    samples: &SampleSet,
    i: Site,
    collection: &CandidateCollection,
    grid: &ConstantGrid,
    measure: ComplexityMeasure,
    form: PenaltyForm,
    spec: &CutSpec,
) -> Result<SelectCut> {
    let sel = slope_select(samples, i, collection, grid, measure, spec.delta, form, false)?;
    let estimate = cut(samples, i, &sel.result.chosen, spec)?;
    Ok(SelectCut {
        selected: sel.result.chosen,
        estimate,
        calibration: sel.calibration,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionResult {
    pub kept: SiteSet,
    pub eta: f64,
    /// Set when `eta` came from [`eta_ms`].
    pub eta_ms: Option<f64>,
    /// `3 sqrt(ln(6Mδ) / 2n)`, set with `eta_ms`.
    pub floor: Option<f64>,
    /// `|p̂(i,j) - p̂(i)p̂(j)|` for every `j` of the universe, in site order.
    pub correlations: Vec<(Site, f64)>,
}

fn correlations(samples: &SampleSet, i: Site, universe: &SiteSet) -> Result<Vec<(Site, f64)>> {
    if universe.contains(i) {
        return Err(Error::input(format!("reduction universe contains the target {i}")));
    }
    let ci = samples.column_index(i)?;
    let cols = universe
        .iter()
        .map(|j| samples.column_index(j).map(|c| (j, c)))
        .collect::<Result<Vec<_>>>()?;
    Ok(cols
        .into_par_iter()
        .map(|(j, cj)| (j, pair_correlation_cols(samples, ci, cj)))
        .collect())
}

fn kept_above(corr: &[(Site, f64)], eta: f64) -> SiteSet {
    SiteSet::new(corr.iter().filter(|(_, c)| *c > eta).map(|(j, _)| *j).collect())
}

/// Sites of `universe` whose correlation with `i` exceeds `eta`.
pub fn reduce_sites(samples: &SampleSet, i: Site, universe: &SiteSet, eta: f64) -> Result<ReductionResult> {
    if !(eta >= 0.0) {
        return Err(Error::input(format!("eta must be ≥ 0, got {eta}")));
    }
    let correlations = correlations(samples, i, universe)?;
    Ok(ReductionResult {
        kept: kept_above(&correlations, eta),
        eta,
        eta_ms: None,
        floor: None,
        correlations,
    })
}

/// Threshold keeping the `count` most correlated sites (fewer on ties at the boundary).
pub fn reduce_to_count(samples: &SampleSet, i: Site, universe: &SiteSet, count: usize) -> Result<ReductionResult> {
    let correlations = correlations(samples, i, universe)?;
    let eta = kth_largest(&correlations, count + 1);
    Ok(ReductionResult {
        kept: kept_above(&correlations, eta),
        eta,
        eta_ms: None,
        floor: None,
        correlations,
    })
}

/// `k`-th largest correlation (1-based), 0 when there are fewer than `k` values.
fn kth_largest(corr: &[(Site, f64)], k: usize) -> f64 {
    let mut values: Vec<f64> = corr.iter().map(|(_, c)| *c).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    if k == 0 {
        return f64::INFINITY;
    }
    values.get(k - 1).copied().unwrap_or(0.0)
}

/// Parameters of the data-driven screening threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaParams {
    pub delta: f64,
    pub kappa: f64,
    /// Hard bound on the number of kept sites.
    pub max_kept: usize,
}

impl Default for EtaParams {
    fn default() -> Self {
        EtaParams {
            delta: 10.0,
            kappa: 1.0,
            max_kept: 10,
        }
    }
}

impl EtaParams {
    fn validate(&self) -> Result<()> {
        if !(self.delta > 1.0 && self.delta.is_finite()) {
            return Err(Error::input(format!("delta must be a finite number > 1, got {}", self.delta)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::input(format!("kappa must be positive, got {}", self.kappa)));
        }
        Ok(())
    }

    pub fn floor(&self, n: usize, m: usize) -> f64 {
        3.0 * ((6.0 * m as f64 * self.delta).ln() / (2.0 * n as f64)).sqrt()
    }

    /// Largest admissible kept count, strictly below `κ log₂ n` and at most `max_kept`.
    pub fn kept_bound(&self, n: usize) -> usize {
        let limit = self.kappa * (n as f64).log2();
        let strict = (limit.ceil() as i64 - 1).max(0) as usize;
        strict.min(self.max_kept)
    }
}

/// Smallest `η` above the floor that keeps fewer than `κ log₂ n` sites.
///
/// The kept set only changes at observed correlation values, so the answer is
/// the larger of the `(k+1)`-th largest correlation and the float just above the floor.
pub fn eta_ms(samples: &SampleSet, i: Site, universe: &SiteSet, params: &EtaParams) -> Result<ReductionResult> {
    params.validate()?;
    let correlations = correlations(samples, i, universe)?;
    let floor = params.floor(samples.n(), samples.m());
    let k = params.kept_bound(samples.n());
    let eta = kth_largest(&correlations, k + 1).max(floor.next_up());
    Ok(ReductionResult {
        kept: kept_above(&correlations, eta),
        eta,
        eta_ms: Some(eta),
        floor: Some(floor),
        correlations,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConstantChoice {
    Fixed(f64),
    Slope { grid: ConstantGrid, measure: ComplexityMeasure },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EfficientSelection {
    pub reduction: ReductionResult,
    pub result: SelectionResult,
    pub calibration: Option<SlopeCalibration>,
}

/// Screening with `η_ms` followed by selection over every subset of the kept sites.
pub fn efficient_select(
    samples: &SampleSet,
    i: Site,
    universe: &SiteSet,
    params: &EtaParams,
    constant: &ConstantChoice,
) -> Result<EfficientSelection> {
    let reduction = eta_ms(samples, i, universe, params)?;
    let collection = CandidateCollection::powerset(reduction.kept.clone());
    let form = PenaltyForm::Reduced { kappa: params.kappa };
    let (result, calibration) = match constant {
        ConstantChoice::Fixed(c) => (select_model(samples, i, &collection, *c, params.delta, form, false)?, None),
        ConstantChoice::Slope { grid, measure } => {
            let sel = slope_select(samples, i, &collection, grid, *measure, params.delta, form, false)?;
            (sel.result, Some(sel.calibration))
        }
    };
    Ok(EfficientSelection {
        reduction,
        result,
        calibration,
    })
}

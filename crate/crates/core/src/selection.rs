//! Penalized model selection and its slope-heuristic calibration.
//!
//! For a target site `i` and a collection of candidate sets `V`, the selected
//! model minimizes `-‖P̂_{i|V}‖_∞ + C·pen(V)` with
//! `pen(V) = sqrt(numerator / (n p̂⁻_V))`. The numerator depends on the
//! [`PenaltyForm`]. Ties go to the smaller set, then to the lexicographically
//! smaller one, which is exactly the enumeration order of a
//! [`CandidateCollection`].

use std::io::Write;

use itertools::Itertools;
use rayon::prelude::*;

use crate::empirical::{EmpiricalTable, Frac};
use crate::error::{Error, Result};
use crate::model::{Site, SiteSet};
use crate::sampler::SampleSet;

/// Numerator of the penalty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PenaltyForm {
    /// `ln(δ n N)` with `N` a bound on the collection size.
    CollectionSize { n_bound: f64 },
    /// `ln(n)(1 + log₂ M) + ln δ` for `M` observed sites.
    Gamma { observed_sites: usize },
    /// `ln(n^κ δ)`, used after correlation screening.
    Reduced { kappa: f64 },
}

impl PenaltyForm {
    pub fn numerator(&self, n: usize, delta: f64) -> f64 {
        let n = n as f64;
        match *self {
            PenaltyForm::CollectionSize { n_bound } => (delta * n * n_bound).ln(),
            PenaltyForm::Gamma { observed_sites } => {
                n.ln() * (1.0 + (observed_sites as f64).log2()) + delta.ln()
            }
            PenaltyForm::Reduced { kappa } => kappa * n.ln() + delta.ln(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PenaltyForm::CollectionSize { n_bound } if !(n_bound >= 1.0) => {
                Err(Error::input(format!("collection bound {n_bound} must be at least 1")))
            }
            PenaltyForm::Gamma { observed_sites: 0 } => Err(Error::input("Γ_M needs M ≥ 1")),
            PenaltyForm::Reduced { kappa } if !(kappa > 0.0) => {
                Err(Error::input(format!("kappa {kappa} must be positive")))
            }
            _ => Ok(()),
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 1.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("delta must be a finite number > 1, got {delta}")))
    }
}

/// `sqrt(numerator / (n p̂⁻))`.
pub fn penalty_from(p_hat_min: f64, n: usize, delta: f64, form: PenaltyForm) -> Result<f64> {
    check_delta(delta)?;
    form.validate()?;
    Ok((form.numerator(n, delta) / (n as f64 * p_hat_min)).sqrt())
}

pub fn penalty(samples: &SampleSet, i: Site, v: &SiteSet, delta: f64, form: PenaltyForm) -> Result<f64> {
    let table = EmpiricalTable::build(samples, i, v)?;
    penalty_from(table.p_hat_min(), samples.n(), delta, form)
}

/// All subsets of `universe` with at most `max_card` members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateCollection {
    universe: SiteSet,
    max_card: usize,
}

impl CandidateCollection {
    /// `max_card` is clamped to `|universe|`.
    pub fn new(universe: SiteSet, max_card: usize) -> Self {
        let max_card = max_card.min(universe.len());
        CandidateCollection { universe, max_card }
    }

    pub fn powerset(universe: SiteSet) -> Self {
        let m = universe.len();
        CandidateCollection::new(universe, m)
    }

    /// `V_M ∖ {i}` with the cardinality bound `m`.
    pub fn for_target(samples: &SampleSet, i: Site, max_card: usize) -> Self {
        let universe: SiteSet = samples.site_labels().iter().copied().filter(|&s| s != i).collect();
        CandidateCollection::new(universe, max_card)
    }

    pub fn universe(&self) -> &SiteSet {
        &self.universe
    }

    pub fn max_card(&self) -> usize {
        self.max_card
    }

    /// `Σ_{k ≤ m} C(M, k)`, saturating.
    pub fn len(&self) -> u128 {
        let m = self.universe.len() as u128;
        let mut total: u128 = 0;
        let mut binom: u128 = 1;
        for k in 0..=self.max_card as u128 {
            total = total.saturating_add(binom);
            binom = binom.saturating_mul(m - k) / (k + 1);
        }
        total
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = SiteSet> + '_ {
        enumerate_collection(&self.universe, self.max_card)
    }
}

/// Subsets of `universe` with at most `m` members, by cardinality then lexicographically.
pub fn enumerate_collection(universe: &SiteSet, m: usize) -> impl Iterator<Item = SiteSet> + '_ {
    let m = m.min(universe.len());
    (0..=m).flat_map(move |k| {
        universe
            .as_slice()
            .iter()
            .copied()
            .combinations(k)
            .map(SiteSet::new)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComplexityMeasure {
    /// `|V|`.
    Dimension,
    /// `(n p̂⁻_V)^{-1/2}`.
    Variance,
}

impl std::str::FromStr for ComplexityMeasure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dimension" => Ok(ComplexityMeasure::Dimension),
            "variance" => Ok(ComplexityMeasure::Variance),
            other => Err(Error::input(format!("unknown complexity measure `{other}`"))),
        }
    }
}

impl std::fmt::Display for ComplexityMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ComplexityMeasure::Dimension => "dimension",
            ComplexityMeasure::Variance => "variance",
        })
    }
}

/// Per-candidate quantities that do not depend on `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateEval {
    pub set: SiteSet,
    pub sup: Frac,
    pub p_hat_min: Frac,
    pub penalty: f64,
}

impl CandidateEval {
    pub fn score(&self, c: f64) -> f64 {
        -self.sup.to_f64() + c * self.penalty
    }

    pub fn complexity(&self, measure: ComplexityMeasure, n: usize) -> f64 {
        match measure {
            ComplexityMeasure::Dimension => self.set.len() as f64,
            ComplexityMeasure::Variance => 1.0 / (n as f64 * self.p_hat_min.to_f64()).sqrt(),
        }
    }
}

impl CandidateEval {
    pub fn from_table(table: &EmpiricalTable, delta: f64, form: PenaltyForm) -> Result<CandidateEval> {
        let p_hat_min = table.p_hat_min_frac();
        Ok(CandidateEval {
            penalty: penalty_from(p_hat_min.to_f64(), table.n() as usize, delta, form)?,
            sup: table.sup_conditional_frac(),
            p_hat_min,
            set: table.scope().clone(),
        })
    }
}

fn evaluate_one(samples: &SampleSet, i: Site, set: SiteSet, delta: f64, form: PenaltyForm) -> Result<CandidateEval> {
    CandidateEval::from_table(&EmpiricalTable::build(samples, i, &set)?, delta, form)
}

/// Cached evaluation of every candidate of a collection, in enumeration order.
#[derive(Clone, Debug)]
pub struct CandidateScores {
    n: usize,
    evals: Vec<CandidateEval>,
}

impl CandidateScores {
    pub fn evaluate(
        samples: &SampleSet,
        i: Site,
        collection: &CandidateCollection,
        delta: f64,
        form: PenaltyForm,
    ) -> Result<CandidateScores> {
        check_delta(delta)?;
        form.validate()?;
        if collection.universe().contains(i) {
            return Err(Error::input(format!("candidate universe contains the target {i}")));
        }
        let sets: Vec<SiteSet> = collection.iter().collect();
        let evals = sets
            .into_par_iter()
            .map(|set| evaluate_one(samples, i, set, delta, form))
            .collect::<Result<Vec<_>>>()?;
        Ok(CandidateScores { n: samples.n(), evals })
    }

    /// Wraps evaluations already in enumeration order.
    pub fn from_evals(n: usize, evals: Vec<CandidateEval>) -> Result<CandidateScores> {
        if evals.is_empty() {
            return Err(Error::input("empty candidate collection"));
        }
        Ok(CandidateScores { n, evals })
    }

    pub fn evals(&self) -> &[CandidateEval] {
        &self.evals
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Index of the minimizer of the score at constant `c`; first in order wins ties.
    pub fn argmin(&self, c: f64) -> usize {
        let mut best = 0;
        let mut best_score = f64::INFINITY;
        for (k, e) in self.evals.iter().enumerate() {
            let s = e.score(c);
            if s < best_score {
                best = k;
                best_score = s;
            }
        }
        best
    }

    pub fn select(&self, c: f64, with_ledger: bool) -> SelectionResult {
        let k = self.argmin(c);
        SelectionResult {
            chosen: self.evals[k].set.clone(),
            score: self.evals[k].score(c),
            constant: c,
            ledger: with_ledger.then(|| self.ledger(c)),
        }
    }

    pub fn ledger(&self, c: f64) -> Vec<LedgerEntry> {
        self.evals
            .iter()
            .map(|e| LedgerEntry {
                set: e.set.clone(),
                sup: e.sup.to_f64(),
                p_hat_min: e.p_hat_min.to_f64(),
                penalty: e.penalty,
                score: e.score(c),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LedgerEntry {
    pub set: SiteSet,
    pub sup: f64,
    pub p_hat_min: f64,
    pub penalty: f64,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionResult {
    pub chosen: SiteSet,
    pub score: f64,
    /// The constant `C` the selection used.
    pub constant: f64,
    pub ledger: Option<Vec<LedgerEntry>>,
}

fn check_constant(c: f64) -> Result<()> {
    if c >= 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("penalty constant must be finite and ≥ 0, got {c}")))
    }
}

const STREAM_CHUNK: usize = 4096;

/// Selection at a fixed constant `c`.
///
/// Without a ledger the collection is streamed in chunks, so large families are
/// never held in memory at once.
pub fn select_model(
    samples: &SampleSet,
    i: Site,
    collection: &CandidateCollection,
    c: f64,
    delta: f64,
    form: PenaltyForm,
    with_ledger: bool,
) -> Result<SelectionResult> {
    check_constant(c)?;
    if with_ledger {
        return Ok(CandidateScores::evaluate(samples, i, collection, delta, form)?.select(c, true));
    }
    check_delta(delta)?;
    form.validate()?;
    if collection.universe().contains(i) {
        return Err(Error::input(format!("candidate universe contains the target {i}")));
    }
    let mut best: Option<(f64, SiteSet)> = None;
    let mut it = collection.iter();
    loop {
        let chunk: Vec<SiteSet> = it.by_ref().take(STREAM_CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let scored = chunk
            .into_par_iter()
            .map(|set| evaluate_one(samples, i, set, delta, form).map(|e| (e.score(c), e.set)))
            .collect::<Result<Vec<_>>>()?;
        for (score, set) in scored {
            if best.as_ref().is_none_or(|(b, _)| score < *b) {
                best = Some((score, set));
            }
        }
    }
    let (score, chosen) = best.ok_or_else(|| Error::input("empty candidate collection"))?;
    Ok(SelectionResult {
        chosen,
        score,
        constant: c,
        ledger: None,
    })
}

/// Strictly increasing grid of penalty constants.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantGrid(Vec<f64>);

impl ConstantGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::input("the constant grid needs at least two values"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::input("grid constants must be finite and positive"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input("the constant grid must be strictly increasing"));
        }
        Ok(ConstantGrid(values))
    }

    /// `points` values spaced geometrically from `lo` to `hi`.
    pub fn geometric(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if points < 2 || !(lo > 0.0 && hi > lo) {
            return Err(Error::input("geometric grid needs 0 < lo < hi and at least two points"));
        }
        let ratio = (hi / lo).ln() / (points - 1) as f64;
        let mut v: Vec<f64> = (0..points).map(|k| lo * (ratio * k as f64).exp()).collect();
        v[points - 1] = hi;
        ConstantGrid::new(v)
    }

    /// `lo:hi:points` (geometric) or a comma separated list.
    pub fn parse(text: &str) -> Result<Self> {
        let parse_f = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::input(format!("bad grid value `{t}`")))
        };
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() == 3 {
            let points = parts[2]
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::input(format!("bad point count `{}`", parts[2])))?;
            return ConstantGrid::geometric(parse_f(parts[0])?, parse_f(parts[1])?, points);
        }
        ConstantGrid::new(text.split(',').map(parse_f).collect::<Result<Vec<_>>>()?)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for ConstantGrid {
    /// 50 geometric points from 0.01 to 10.
    fn default() -> Self {
        ConstantGrid::geometric(0.01, 10.0, 50).expect("valid default grid")
    }
}

/// Index `k ≥ 1` maximizing the complexity drop `Δ_{k-1} - Δ_k`; the largest such `k` on ties.
pub fn max_jump_index(complexities: &[f64]) -> usize {
    let mut best = 1;
    let mut best_drop = f64::NEG_INFINITY;
    for k in 1..complexities.len() {
        let drop = complexities[k - 1] - complexities[k];
        if drop >= best_drop {
            best = k;
            best_drop = drop;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct JumpPoint {
    pub constant: f64,
    pub chosen: SiteSet,
    pub complexity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeCalibration {
    pub measure: ComplexityMeasure,
    /// `C̃_min`, the grid constant just after the largest complexity drop.
    pub c_min: f64,
    pub jump_index: usize,
    pub profile: Vec<JumpPoint>,
}

impl SlopeCalibration {
    /// Constant used for the final selection, `2 C̃_min`.
    pub fn final_constant(&self) -> f64 {
        2.0 * self.c_min
    }
}

pub fn calibrate(scores: &CandidateScores, grid: &ConstantGrid, measure: ComplexityMeasure) -> SlopeCalibration {
    let profile: Vec<JumpPoint> = grid
        .values()
        .iter()
        .map(|&c| {
            let e = &scores.evals[scores.argmin(c)];
            JumpPoint {
                constant: c,
                chosen: e.set.clone(),
                complexity: e.complexity(measure, scores.n),
            }
        })
        .collect();
    let complexities: Vec<f64> = profile.iter().map(|p| p.complexity).collect();
    let k = max_jump_index(&complexities);
    SlopeCalibration {
        measure,
        c_min: grid.values()[k],
        jump_index: k,
        profile,
    }
}

pub fn slope_calibrate(
    samples: &SampleSet,
    i: Site,
    collection: &CandidateCollection,
    grid: &ConstantGrid,
    measure: ComplexityMeasure,
    delta: f64,
    form: PenaltyForm,
) -> Result<SlopeCalibration> {
    let scores = CandidateScores::evaluate(samples, i, collection, delta, form)?;
    Ok(calibrate(&scores, grid, measure))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeSelection {
    pub result: SelectionResult,
    pub calibration: SlopeCalibration,
}

/// Calibration followed by selection at `2 C̃_min`, on one cached evaluation pass.
pub fn slope_select_scores(scores: &CandidateScores, grid: &ConstantGrid, measure: ComplexityMeasure, with_ledger: bool) -> SlopeSelection {
    let calibration = calibrate(scores, grid, measure);
    SlopeSelection {
        result: scores.select(calibration.final_constant(), with_ledger),
        calibration,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn slope_select(
    samples: &SampleSet,
    i: Site,
    collection: &CandidateCollection,
    grid: &ConstantGrid,
    measure: ComplexityMeasure,
    delta: f64,
    form: PenaltyForm,
    with_ledger: bool,
) -> Result<SlopeSelection> {
    let scores = CandidateScores::evaluate(samples, i, collection, delta, form)?;
    Ok(slope_select_scores(&scores, grid, measure, with_ledger))
}

/// CSV with columns `V, |V|, sup, p_hat_min, penalty, score`.
pub fn write_ledger<W: Write>(ledger: &[LedgerEntry], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let wrap = |e: csv::Error| Error::input(format!("ledger write failed: {e}"));
    out.write_record(["V", "|V|", "sup", "p_hat_min", "penalty", "score"]).map_err(wrap)?;
    for e in ledger {
        out.write_record([
            e.set.to_string(),
            e.set.len().to_string(),
            e.sup.to_string(),
            e.p_hat_min.to_string(),
            e.penalty.to_string(),
            e.score.to_string(),
        ])
        .map_err(wrap)?;
    }
    out.flush().map_err(|e| Error::input(format!("ledger write failed: {e}")))
}

//! Sample-based quantities.
//!
//! All conditionals are exact ratios of integer counts; they are turned into
//! floating point only when handed to callers. An unobserved conditioning
//! pattern has conditional probability exactly `1/2`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{Site, SiteSet, Spin};
use crate::sampler::SampleSet;

/// Widest scope a pattern key can hold.
pub const MAX_SCOPE: usize = 62;

/// A non-negative fraction with exact comparison.
#[derive(Copy, Clone, Debug, Eq)]
pub struct Frac {
    pub num: u64,
    pub den: u64,
}

impl Frac {
    pub const HALF: Frac = Frac { num: 1, den: 2 };

    pub fn new(num: u64, den: u64) -> Frac {
        debug_assert!(den > 0);
        Frac { num, den }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `|self - other|`, exact.
    pub fn abs_diff(self, other: Frac) -> Frac {
        let a = self.num as u128 * other.den as u128;
        let b = other.num as u128 * self.den as u128;
        let num = a.abs_diff(b);
        let den = self.den as u128 * other.den as u128;
        reduce(num, den)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn reduce(num: u128, den: u128) -> Frac {
    let g = gcd(num, den).max(1);
    let (num, den) = (num / g, den / g);
    Frac {
        num: u64::try_from(num).expect("fraction numerator fits"),
        den: u64::try_from(den).expect("fraction denominator fits"),
    }
}

impl PartialEq for Frac {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

/// Pattern counts of a projection of the samples onto `scope ∪ {target}`.
///
/// Conditioning patterns are keyed by a word whose bit `k` is set when the
/// `k`-th scope member (sorted order) is `+1`. Each stored cell holds the counts
/// of `x(target) = +1` and `x(target) = -1` for one observed conditioning pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalTable {
    target: Site,
    scope: SiteSet,
    n: u64,
    cells: Vec<(u64, [u32; 2])>,
}

/// Width up to which counting uses a dense array.
const DENSE_WIDTH: usize = 16;

impl EmpiricalTable {
    pub fn build(samples: &SampleSet, target: Site, scope: &SiteSet) -> Result<EmpiricalTable> {
        if scope.contains(target) {
            return Err(Error::input(format!("scope contains the target site {target}")));
        }
        if scope.len() > MAX_SCOPE {
            return Err(Error::Capacity {
                what: "pattern key width",
                needed: scope.len(),
                limit: MAX_SCOPE,
            });
        }
        let target_col = samples.column_index(target)?;
        let cols = scope
            .iter()
            .map(|s| samples.column_index(s))
            .collect::<Result<Vec<_>>>()?;
        let n = samples.n();
        let t_words = samples.column_words(target_col);
        let words: Vec<&[u64]> = cols.iter().map(|&c| samples.column_words(c)).collect();

        let mut keys: Vec<u64> = Vec::with_capacity(n);
        for (w, &tw) in t_words.iter().enumerate() {
            let rows = (n - 64 * w).min(64);
            let block: Vec<u64> = words.iter().map(|col| col[w]).collect();
            for b in 0..rows {
                let mut key = 0u64;
                for (k, &word) in block.iter().enumerate() {
                    key |= ((word >> b) & 1) << k;
                }
                // lowest bit: target spin is -1
                keys.push((key << 1) | (((tw >> b) & 1) ^ 1));
            }
        }

        let cells = if scope.len() <= DENSE_WIDTH {
            let mut dense = vec![[0u32; 2]; 1usize << scope.len()];
            for &k in &keys {
                dense[(k >> 1) as usize][(k & 1) as usize] += 1;
            }
            dense
                .into_iter()
                .enumerate()
                .filter(|(_, c)| c[0] + c[1] > 0)
                .map(|(key, c)| (key as u64, c))
                .collect()
        } else {
            keys.sort_unstable();
            let mut cells: Vec<(u64, [u32; 2])> = Vec::new();
            for k in keys {
                let cond = k >> 1;
                match cells.last_mut() {
                    Some((last, counts)) if *last == cond => counts[(k & 1) as usize] += 1,
                    _ => {
                        let mut counts = [0u32; 2];
                        counts[(k & 1) as usize] = 1;
                        cells.push((cond, counts));
                    }
                }
            }
            cells
        };
        Ok(EmpiricalTable {
            target,
            scope: scope.clone(),
            n: n as u64,
            cells,
        })
    }

    pub fn target(&self) -> Site {
        self.target
    }

    pub fn scope(&self) -> &SiteSet {
        &self.scope
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Observed conditioning patterns with their `(+1, -1)` target counts, by key.
    pub fn cells(&self) -> &[(u64, [u32; 2])] {
        &self.cells
    }

    /// Key of a conditioning pattern given as spins aligned with the scope order.
    pub fn pattern_key(&self, scope_spins: &[Spin]) -> Result<u64> {
        if scope_spins.len() != self.scope.len() {
            return Err(Error::input(format!(
                "pattern has {} spins, scope has {} sites",
                scope_spins.len(),
                self.scope.len()
            )));
        }
        Ok(scope_spins
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &s)| acc | (((s > 0) as u64) << k)))
    }

    pub fn counts(&self, key: u64) -> Option<[u32; 2]> {
        self.cells
            .binary_search_by_key(&key, |&(k, _)| k)
            .ok()
            .map(|p| self.cells[p].1)
    }

    /// `P̂(x(target) = spin | pattern)`, `1/2` when the pattern is unobserved.
    pub fn conditional_frac(&self, spin: Spin, key: u64) -> Frac {
        match self.counts(key) {
            None => Frac::HALF,
            Some(c) => Frac::new(c[(spin < 0) as usize] as u64, (c[0] + c[1]) as u64),
        }
    }

    pub fn conditional(&self, spin: Spin, key: u64) -> f64 {
        self.conditional_frac(spin, key).to_f64()
    }

    /// `max(1/n, min over all 2^|V| conditioning patterns of P̂(pattern))`.
    pub fn p_hat_min_frac(&self) -> Frac {
        let all_observed = (self.cells.len() as u128) == (1u128 << self.scope.len());
        let smallest = if all_observed {
            self.cells
                .iter()
                .map(|(_, c)| (c[0] + c[1]) as u64)
                .min()
                .unwrap_or(0)
        } else {
            0
        };
        Frac::new(smallest.max(1), self.n)
    }

    pub fn p_hat_min(&self) -> f64 {
        self.p_hat_min_frac().to_f64()
    }

    /// `‖P̂_{i|V}‖_∞`, always at least `1/2`.
    pub fn sup_conditional_frac(&self) -> Frac {
        self.cells
            .iter()
            .map(|(_, c)| Frac::new(c[0].max(c[1]) as u64, (c[0] + c[1]) as u64))
            .max()
            .unwrap_or(Frac::HALF)
    }

    pub fn sup_conditional(&self) -> f64 {
        self.sup_conditional_frac().to_f64()
    }

    /// `ω^V_{i,j}(P̂)`: largest change of the empirical conditional when the spin of `j` flips.
    pub fn empirical_omega_frac(&self, j: Site) -> Result<Frac> {
        let pos = self
            .scope
            .position(j)
            .ok_or_else(|| Error::input(format!("site {j} is not in the table scope")))?;
        let bit = 1u64 << pos;
        // Differences come in ± pairs over x and x_j, so the sup is the largest
        // absolute difference; pairs of unobserved patterns contribute 0.
        let mut best = Frac::new(0, 1);
        for &(key, _) in &self.cells {
            let d = self
                .conditional_frac(1, key)
                .abs_diff(self.conditional_frac(1, key ^ bit));
            if d > best {
                best = d;
            }
        }
        Ok(best)
    }

    pub fn empirical_omega(&self, j: Site) -> Result<f64> {
        self.empirical_omega_frac(j).map(Frac::to_f64)
    }
}

/// `|P̂(x_i = x_j = +1) - P̂(x_i = +1) P̂(x_j = +1)|`.
pub fn pair_correlation(samples: &SampleSet, i: Site, j: Site) -> Result<f64> {
    if i == j {
        return Err(Error::input(format!("pair correlation of site {i} with itself")));
    }
    let (ci, cj) = (samples.column_index(i)?, samples.column_index(j)?);
    Ok(pair_correlation_cols(samples, ci, cj))
}

pub(crate) fn pair_correlation_cols(samples: &SampleSet, ci: usize, cj: usize) -> f64 {
    let n = samples.n() as i128;
    let ui = samples.count_up(ci) as i128;
    let uj = samples.count_up(cj) as i128;
    let uij = samples.count_both_up(ci, cj) as i128;
    let num = (n * uij - ui * uj).unsigned_abs();
    num as f64 / (n * n) as f64
}

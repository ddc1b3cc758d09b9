#![allow(dead_code)]

use ising_neigh::empirical::Frac;
use ising_neigh::sampler::SampleMeta;
use ising_neigh::{IsingModel, SampleSet, Site, SiteSet, Spin};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub type Couplings = Vec<(Site, Site, f64)>;
pub type Fields = Vec<(Site, f64)>;

/// Random couplings in `[-jmax, jmax]` on `m` sites, each pair present with probability `density`.
pub fn random_spec(rng: &mut ChaCha20Rng, m: usize, jmax: f64, density: f64, field: f64) -> (Couplings, Fields) {
    let mut couplings = Vec::new();
    for a in 0..m as u32 {
        for b in a + 1..m as u32 {
            if rng.random_bool(density) {
                couplings.push((Site(a), Site(b), rng.random_range(-jmax..=jmax)));
            }
        }
    }
    let fields = if field > 0.0 {
        (0..m as u32).map(|s| (Site(s), rng.random_range(-field..=field))).collect()
    } else {
        Vec::new()
    };
    (couplings, fields)
}

pub fn random_model(rng: &mut ChaCha20Rng, m: usize, jmax: f64, density: f64, field: f64) -> IsingModel {
    let (c, f) = random_spec(rng, m, jmax, density, field);
    IsingModel::classical((0..m as u32).map(Site).collect(), &c, &f).unwrap()
}

fn spin_at(x: usize, k: usize) -> f64 {
    if (x >> k) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Joint law `∝ exp(Σ J x_a x_b + Σ H x_a)` by direct summation, bit `k` of the index is site `k`.
pub fn brute_joint(m: usize, couplings: &[(Site, Site, f64)], fields: &[(Site, f64)]) -> Vec<f64> {
    let w: Vec<f64> = (0..1usize << m)
        .map(|x| {
            let e: f64 = couplings
                .iter()
                .map(|&(a, b, j)| j * spin_at(x, a.0 as usize) * spin_at(x, b.0 as usize))
                .sum::<f64>()
                + fields.iter().map(|&(a, h)| h * spin_at(x, a.0 as usize)).sum::<f64>();
            e.exp()
        })
        .collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

/// `P(x_i = +1 | x_V)` and `P(x_V)` from a joint table, patterns keyed by position in `v`.
pub fn brute_conditional(joint: &[f64], i: usize, v: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let mut plus = vec![0.0; 1 << v.len()];
    let mut marg = vec![0.0; 1 << v.len()];
    for (x, p) in joint.iter().enumerate() {
        let key = v.iter().enumerate().fold(0, |acc, (k, &s)| acc | (((x >> s) & 1) << k));
        marg[key] += p;
        if (x >> i) & 1 == 1 {
            plus[key] += p;
        }
    }
    let cond = plus.iter().zip(&marg).map(|(a, b)| a / b).collect();
    (cond, marg)
}

pub fn random_rows(rng: &mut ChaCha20Rng, n: usize, m: usize, bias: f64) -> Vec<Vec<Spin>> {
    (0..n)
        .map(|_| (0..m).map(|_| if rng.random_bool(bias) { 1 } else { -1 }).collect())
        .collect()
}

pub fn sample_set(rows: &[Vec<Spin>]) -> SampleSet {
    let m = rows[0].len();
    SampleSet::from_rows((0..m as u32).map(Site).collect(), rows, SampleMeta::external()).unwrap()
}

/// Random subset of `universe` of size at most `max`.
pub fn random_subset(rng: &mut ChaCha20Rng, universe: &[Site], max: usize) -> SiteSet {
    let k = rng.random_range(0..=max.min(universe.len()));
    let mut pool = universe.to_vec();
    let mut out = Vec::new();
    for _ in 0..k {
        let p = rng.random_range(0..pool.len());
        out.push(pool.swap_remove(p));
    }
    SiteSet::new(out)
}

/// Least-squares slope of `y` on `x` and its t-statistic.
pub fn regression_t(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let se = (sse / (n - 2.0) / sxx).sqrt();
    (slope, slope / se)
}

/// Naive scans over the raw rows, one query at a time.
pub struct Naive<'a> {
    pub rows: &'a [Vec<Spin>],
    pub i: usize,
    pub v: Vec<usize>,
}

impl Naive<'_> {
    fn matches(&self, row: &[Spin], pattern: &[Spin]) -> bool {
        self.v.iter().zip(pattern).all(|(&c, &s)| row[c] == s)
    }

    pub fn conditional(&self, xi: Spin, pattern: &[Spin]) -> Frac {
        let den = self.rows.iter().filter(|r| self.matches(r, pattern)).count() as u64;
        let num = self
            .rows
            .iter()
            .filter(|r| self.matches(r, pattern) && r[self.i] == xi)
            .count() as u64;
        if den == 0 {
            Frac::HALF
        } else {
            Frac::new(num, den)
        }
    }

    pub fn patterns(&self) -> Vec<Vec<Spin>> {
        (0..1u64 << self.v.len())
            .map(|k| (0..self.v.len()).map(|b| if (k >> b) & 1 == 1 { 1 } else { -1 }).collect())
            .collect()
    }

    pub fn p_hat_min(&self) -> Frac {
        let n = self.rows.len() as u64;
        let smallest = self
            .patterns()
            .iter()
            .map(|p| self.rows.iter().filter(|r| self.matches(r, p)).count() as u64)
            .min()
            .unwrap();
        if self.v.is_empty() {
            return Frac::new(1, 1);
        }
        Frac::new(smallest.max(1), n)
    }

    pub fn sup(&self) -> Frac {
        let mut best = Frac::HALF;
        for p in self.patterns() {
            for xi in [1, -1] {
                best = best.max(self.conditional(xi, &p));
            }
        }
        best
    }

    pub fn omega(&self, pos: usize) -> Frac {
        let mut best = Frac::new(0, 1);
        for p in self.patterns() {
            let mut q = p.clone();
            q[pos] = -q[pos];
            for xi in [1, -1] {
                let (a, b) = (self.conditional(xi, &p), self.conditional(xi, &q));
                if a > b {
                    best = best.max(a.abs_diff(b));
                }
            }
        }
        best
    }
}

pub fn key_of(pattern: &[Spin]) -> u64 {
    pattern
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &s)| acc | (((s > 0) as u64) << k))
}

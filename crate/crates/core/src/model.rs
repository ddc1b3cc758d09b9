//! Pairwise binary random fields.
//!
//! A model is a finite ordered list of sites plus a sparse pairwise potential
//! `f_{i,j}(a, b)` with spins `a, b ∈ {-1, +1}`. Directed entries `(i, j)` and
//! `(j, i)` are stored separately, so the one-point conditionals are defined for
//! any potential. The joint (Boltzmann) measure only exists for the classical
//! symmetric form `f_{i,j}(a, b) = J_{ij} a b`, which the sampler and the exact
//! oracle require; see [`IsingModel::classical_form`].
//!
//! External fields `H_i` are kept apart from the pair table, which keeps
//! `f_{i,i} ≡ 0`. They enter the conditional of site `i` as the extra term
//! `2 H_i x(i)` and count towards the interaction range as `|H_i|`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A spin value, always `-1` or `+1`.
pub type Spin = i8;

/// Table index of a spin: `+1 → 0`, `-1 → 1`.
#[inline]
pub fn spin_index(s: Spin) -> usize {
    (s < 0) as usize
}

#[inline]
fn spin_of_index(k: usize) -> Spin {
    if k == 0 {
        1
    } else {
        -1
    }
}

/// Opaque site label.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Site(pub u32);

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Sorted, duplicate-free set of sites.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteSet {
    members: Vec<Site>,
}

impl SiteSet {
    pub fn empty() -> Self {
        SiteSet::default()
    }

    pub fn new(mut members: Vec<Site>) -> Self {
        members.sort_unstable();
        members.dedup();
        SiteSet { members }
    }

    pub fn from_ids(ids: &[u32]) -> Self {
        SiteSet::new(ids.iter().map(|&id| Site(id)).collect())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, site: Site) -> bool {
        self.members.binary_search(&site).is_ok()
    }

    /// Position of `site` in sorted order.
    pub fn position(&self, site: Site) -> Option<usize> {
        self.members.binary_search(&site).ok()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = Site> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[Site] {
        &self.members
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.members.iter().all(|&s| other.contains(s))
    }

    pub fn intersection(&self, other: &SiteSet) -> SiteSet {
        SiteSet {
            members: self.iter().filter(|&s| other.contains(s)).collect(),
        }
    }

    pub fn union(&self, other: &SiteSet) -> SiteSet {
        SiteSet::new(self.iter().chain(other.iter()).collect())
    }

    pub fn difference(&self, other: &SiteSet) -> SiteSet {
        SiteSet {
            members: self.iter().filter(|&s| !other.contains(s)).collect(),
        }
    }

    pub fn without(&self, site: Site) -> SiteSet {
        SiteSet {
            members: self.iter().filter(|&s| s != site).collect(),
        }
    }

    /// Parses `"1,2,3"` (also accepts whitespace or `;` separators); the empty
    /// string is the empty set.
    pub fn parse_list(text: &str) -> Result<SiteSet> {
        let mut out = Vec::new();
        for tok in text.split(|c: char| c == ',' || c == ';' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let id: u32 = tok
                .parse()
                .map_err(|_| Error::input(format!("bad site id `{tok}`")))?;
            out.push(Site(id));
        }
        Ok(SiteSet::new(out))
    }
}

impl FromIterator<Site> for SiteSet {
    fn from_iter<T: IntoIterator<Item = Site>>(iter: T) -> Self {
        SiteSet::new(iter.into_iter().collect())
    }
}

impl fmt::Display for SiteSet {
    /// Space separated ids, `{}` style braces omitted so the output embeds in CSV.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.members.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Spins of every site of a model, aligned with the model's site order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    spins: Vec<Spin>,
}

impl Configuration {
    pub fn new(spins: Vec<Spin>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::input(format!("spin value {bad} is not ±1")));
        }
        Ok(Configuration { spins })
    }

    /// Decodes an enumeration index: bit `k` set means site `k` is `+1`.
    pub fn from_index(index: u64, len: usize) -> Self {
        let spins = (0..len)
            .map(|k| if (index >> k) & 1 == 1 { 1 } else { -1 })
            .collect();
        Configuration { spins }
    }

    pub fn index(&self) -> u64 {
        self.spins
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &s)| acc | (((s > 0) as u64) << k))
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn get(&self, k: usize) -> Spin {
        self.spins[k]
    }

    pub fn as_slice(&self) -> &[Spin] {
        &self.spins
    }

    /// The configuration with coordinate `k` flipped.
    pub fn flipped(&self, k: usize) -> Configuration {
        let mut spins = self.spins.clone();
        spins[k] = -spins[k];
        Configuration { spins }
    }
}

/// 2×2 table `f(a, b)` indexed by [`spin_index`].
pub type PairTable = [[f64; 2]; 2];

/// Table of the classical coupling `J a b`.
pub fn classical_table(coupling: f64) -> PairTable {
    [[coupling, -coupling], [-coupling, coupling]]
}

/// Sparse directed pairwise potential; absent pairs mean `f ≡ 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairwisePotential {
    entries: BTreeMap<(Site, Site), PairTable>,
}

impl PairwisePotential {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts the directed entry `f_{i,j}`. Diagonal and duplicate entries are rejected.
    pub fn insert(&mut self, i: Site, j: Site, table: PairTable) -> Result<()> {
        if i == j {
            return Err(Error::input(format!("diagonal potential entry ({i}, {i})")));
        }
        if table.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite potential entry ({i}, {j})")));
        }
        if self.entries.insert((i, j), table).is_some() {
            return Err(Error::input(format!("duplicate potential entry ({i}, {j})")));
        }
        Ok(())
    }

    /// Inserts the symmetric classical coupling `J_{ij} = J_{ji} = coupling`.
    pub fn insert_coupling(&mut self, i: Site, j: Site, coupling: f64) -> Result<()> {
        self.insert(i, j, classical_table(coupling))?;
        self.insert(j, i, classical_table(coupling))
    }

    pub fn get(&self, i: Site, j: Site) -> Option<&PairTable> {
        self.entries.get(&(i, j))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Site, Site, &PairTable)> {
        self.entries.iter().map(|(&(i, j), t)| (i, j, t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Couplings and fields of a model in classical symmetric form, by site index.
#[derive(Clone, Debug)]
pub struct ClassicalForm {
    /// `adjacency[k]` lists `(neighbor index, J)` sorted by neighbor index.
    pub adjacency: Vec<Vec<(usize, f64)>>,
    pub fields: Vec<f64>,
}

impl ClassicalForm {
    /// `Σ_{i<j} J_ij x_i x_j + Σ_i H_i x_i`.
    pub fn energy(&self, spins: &[Spin]) -> f64 {
        let mut e = 0.0;
        for (k, nbrs) in self.adjacency.iter().enumerate() {
            let xk = spins[k] as f64;
            e += self.fields[k] * xk;
            for &(j, coupling) in nbrs {
                if j > k {
                    e += coupling * xk * spins[j] as f64;
                }
            }
        }
        e
    }

    /// Local field `H_k + Σ_j J_kj x_j`.
    #[inline]
    pub fn local_field(&self, k: usize, spins: &[Spin]) -> f64 {
        self.adjacency[k]
            .iter()
            .fold(self.fields[k], |acc, &(j, coupling)| acc + coupling * spins[j] as f64)
    }

    /// Whether the coupling graph has no cycles.
    pub fn is_forest(&self) -> bool {
        let edges: usize = self.adjacency.iter().map(|a| a.len()).sum::<usize>() / 2;
        let mut seen = vec![false; self.adjacency.len()];
        let mut components = 0;
        for start in 0..self.adjacency.len() {
            if seen[start] {
                continue;
            }
            components += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(k) = stack.pop() {
                for &(j, _) in &self.adjacency[k] {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        edges + components == self.adjacency.len()
    }
}

/// Overflow-safe logistic function `1 / (1 + e^{-s})`.
#[inline]
pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// An Ising model: ordered sites plus a pairwise potential and optional fields.
#[derive(Clone, Debug)]
pub struct IsingModel {
    sites: Vec<Site>,
    index: HashMap<Site, usize>,
    potential: PairwisePotential,
    /// `rows[i]` holds `(j, f_{i,j})` by site index.
    rows: Vec<Vec<(usize, PairTable)>>,
    fields: Vec<f64>,
}

impl IsingModel {
    pub fn new(sites: Vec<Site>, potential: PairwisePotential, fields: &[(Site, f64)]) -> Result<Self> {
        let mut index = HashMap::with_capacity(sites.len());
        for (k, &s) in sites.iter().enumerate() {
            if index.insert(s, k).is_some() {
                return Err(Error::input(format!("duplicate site {s}")));
            }
        }
        let lookup = |s: Site| {
            index
                .get(&s)
                .copied()
                .ok_or_else(|| Error::input(format!("potential references unknown site {s}")))
        };
        let mut rows = vec![Vec::new(); sites.len()];
        for (i, j, table) in potential.iter() {
            rows[lookup(i)?].push((lookup(j)?, *table));
        }
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
        }
        let mut field_values = vec![0.0; sites.len()];
        for &(s, h) in fields {
            let k = lookup(s)?;
            if !h.is_finite() {
                return Err(Error::input(format!("non-finite field at site {s}")));
            }
            if field_values[k] != 0.0 {
                return Err(Error::input(format!("duplicate field at site {s}")));
            }
            field_values[k] = h;
        }
        Ok(IsingModel {
            sites,
            index,
            potential,
            rows,
            fields: field_values,
        })
    }

    /// Classical model from symmetric couplings `(i, j, J)` and fields `(i, H)`.
    pub fn classical(sites: Vec<Site>, couplings: &[(Site, Site, f64)], fields: &[(Site, f64)]) -> Result<Self> {
        let mut potential = PairwisePotential::new();
        for &(i, j, coupling) in couplings {
            potential.insert_coupling(i, j, coupling)?;
        }
        IsingModel::new(sites, potential, fields)
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn site_set(&self) -> SiteSet {
        self.sites.iter().copied().collect()
    }

    pub fn potential(&self) -> &PairwisePotential {
        &self.potential
    }

    pub fn field(&self, i: Site) -> Result<f64> {
        Ok(self.fields[self.index_of(i)?])
    }

    pub fn index_of(&self, site: Site) -> Result<usize> {
        self.index
            .get(&site)
            .copied()
            .ok_or_else(|| Error::input(format!("unknown site {site}")))
    }

    fn table(&self, i: usize, j: usize) -> Option<&PairTable> {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |&(k, _)| k).ok().map(|p| &row[p].1)
    }

    /// `g_{i,j}(a, b) = f_{i,j}(a, b) - f_{i,j}(-a, b)`.
    pub fn g_difference(&self, i: Site, j: Site, a: Spin, b: Spin) -> Result<f64> {
        let (ii, jj) = (self.index_of(i)?, self.index_of(j)?);
        check_spin(a)?;
        check_spin(b)?;
        Ok(self.table(ii, jj).map_or(0.0, |t| g_of(t, a, b)))
    }

    /// `Σ_j g_{i,j}(x(i), x(j))` including the field term, by site index.
    pub fn log_odds(&self, i: usize, spins: &[Spin]) -> f64 {
        let a = spins[i];
        self.rows[i]
            .iter()
            .fold(2.0 * self.fields[i] * a as f64, |acc, (j, t)| acc + g_of(t, a, spins[*j]))
    }

    /// `P_{i|G}(x)`: probability of the spin `x(i)` given every other spin of `x`.
    pub fn conditional_full(&self, i: Site, x: &Configuration) -> Result<f64> {
        let ii = self.index_of(i)?;
        if x.len() != self.len() {
            return Err(Error::input(format!(
                "configuration has {} spins, model has {} sites",
                x.len(),
                self.len()
            )));
        }
        Ok(sigmoid(self.log_odds(ii, x.as_slice())))
    }

    /// `ω_{i,j}(f) = sup_{a,b} { g_{i,j}(a, b) - g_{i,j}(a, -b) }`.
    pub fn potential_omega(&self, i: Site, j: Site) -> Result<f64> {
        if i == j {
            return Err(Error::input(format!("ω is undefined for the pair ({i}, {i})")));
        }
        let (ii, jj) = (self.index_of(i)?, self.index_of(j)?);
        Ok(self.table(ii, jj).map_or(0.0, omega_of))
    }

    /// `r = sup_i sup_a Σ_j max_b |f_{i,j}(a, b)|`, with `|H_i|` as the diagonal term.
    pub fn interaction_range(&self) -> f64 {
        let mut r: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            for a in 0..2 {
                let s: f64 = row
                    .iter()
                    .map(|(_, t)| t[a][0].abs().max(t[a][1].abs()))
                    .sum::<f64>()
                    + self.fields[i].abs();
                r = r.max(s);
            }
        }
        r
    }

    pub fn constants(&self) -> ModelConstants {
        ModelConstants::from_range(self.interaction_range())
    }

    /// `{j ≠ i : ω_{i,j}(f) > 0}`.
    pub fn true_neighborhood(&self, i: Site) -> Result<SiteSet> {
        let ii = self.index_of(i)?;
        Ok(self.rows[ii]
            .iter()
            .filter(|(_, t)| omega_of(t) > 0.0)
            .map(|&(j, _)| self.sites[j])
            .collect())
    }

    /// Symmetric classical couplings, or a model error naming the offending entry.
    pub fn classical_form(&self) -> Result<ClassicalForm> {
        let mut adjacency = vec![Vec::new(); self.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, ref t) in row {
                let coupling = t[0][0];
                let classical = [t[0][1], t[1][0]].iter().all(|&v| v == -coupling) && t[1][1] == coupling;
                if !classical {
                    return Err(Error::Model(format!(
                        "entry ({}, {}) is not of the form J·a·b",
                        self.sites[i], self.sites[j]
                    )));
                }
                match self.table(j, i) {
                    Some(back) if back == t => {}
                    _ => {
                        return Err(Error::Model(format!(
                            "coupling ({}, {}) has no matching ({}, {}) entry",
                            self.sites[i], self.sites[j], self.sites[j], self.sites[i]
                        )))
                    }
                }
                if coupling != 0.0 {
                    adjacency[i].push((j, coupling));
                }
            }
        }
        Ok(ClassicalForm {
            adjacency,
            fields: self.fields.clone(),
        })
    }

    /// Stable content hash used to tag samples with their generating model.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for s in &self.sites {
            h.update(format!("s{};", s.0).as_bytes());
        }
        for (i, j, t) in self.potential.iter() {
            h.update(format!("p{},{}:", i.0, j.0).as_bytes());
            for v in t.iter().flatten() {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        for (k, f) in self.fields.iter().enumerate() {
            if *f != 0.0 {
                h.update(format!("h{}:", self.sites[k].0).as_bytes());
                h.update(f.to_bits().to_le_bytes());
            }
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn check_spin(s: Spin) -> Result<()> {
    if s == 1 || s == -1 {
        Ok(())
    } else {
        Err(Error::input(format!("spin value {s} is not ±1")))
    }
}

#[inline]
fn g_of(t: &PairTable, a: Spin, b: Spin) -> f64 {
    let (ia, ib) = (spin_index(a), spin_index(b));
    t[ia][ib] - t[1 - ia][ib]
}

fn omega_of(t: &PairTable) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for ia in 0..2 {
        for ib in 0..2 {
            let (a, b) = (spin_of_index(ia), spin_of_index(ib));
            best = best.max(g_of(t, a, b) - g_of(t, a, -b));
        }
    }
    best
}

/// Constants that depend on the interaction range `r` only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelConstants {
    pub r: f64,
    /// `1/r`, infinite for the zero potential.
    pub temperature: f64,
    /// `(1 + e^{2r})^{-1}`: every one-point conditional lies in `[ν, 1 - ν]`.
    pub nu: f64,
    /// Lower constant of the bias sandwich.
    pub c_r_star: f64,
    /// Upper constant of the bias sandwich.
    pub big_c_r_star: f64,
    /// Screening sandwich constants.
    pub c1: f64,
    pub c2: f64,
    /// `c_r_star / big_c_r_star`, the constant of the bias/sup-norm inequality.
    pub kappa_min: f64,
}

impl ModelConstants {
    pub fn from_range(r: f64) -> Self {
        let e2 = (2.0 * r).exp();
        // 4r / (e^{4r} - 1) and 4r / (1 - e^{-4r}), continuous at r = 0.
        let (lin_up, lin_down) = if r == 0.0 {
            (1.0, 1.0)
        } else {
            (4.0 * r / (4.0 * r).exp_m1(), 4.0 * r / -(-4.0 * r).exp_m1())
        };
        let c_r_star = (-2.0 * r).exp() / (lin_down * (1.0 + e2).powi(3));
        let big_c_r_star = e2 / (lin_up * (1.0 + (-2.0 * r).exp()).powi(2));
        let c1 = lin_up * (1.0 + e2).powi(3) * (6.0 * r).exp();
        let c2 = lin_up * (1.0 + e2).powi(2) * (-6.0 * r).exp();
        ModelConstants {
            r,
            temperature: if r > 0.0 { 1.0 / r } else { f64::INFINITY },
            nu: 1.0 / (1.0 + e2),
            c_r_star,
            big_c_r_star,
            c1,
            c2,
            kappa_min: c_r_star / big_c_r_star,
        }
    }

    /// Lower constant of the `ω^G` versus `ω(f)` sandwich: `2e^{-2r}(1+e^{2r})^{-2}`.
    pub fn omega_lower(&self) -> f64 {
        2.0 * (-2.0 * self.r).exp() / (1.0 + (2.0 * self.r).exp()).powi(2)
    }

    /// Upper constant of the same sandwich, equal to `big_c_r_star`.
    pub fn omega_upper(&self) -> f64 {
        self.big_c_r_star
    }
}

/// On-disk model description (TOML).
///
/// ```toml
/// sites = [0, 1, 2]
/// grid = { rows = 1, cols = 3 }      # optional, informational
/// couplings = [ { i = 0, j = 1, J = 0.2 }, { i = 1, j = 2, J = 0.2 } ]
/// fields = [ { i = 0, H = 0.1 } ]    # optional
/// ```
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub sites: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridGeometry>,
    #[serde(default)]
    pub couplings: Vec<CouplingEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldEntry>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridGeometry {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CouplingEntry {
    pub i: u32,
    pub j: u32,
    #[serde(rename = "J")]
    pub coupling: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldEntry {
    pub i: u32,
    #[serde(rename = "H")]
    pub field: f64,
}

impl ModelFile {
    pub fn parse(text: &str) -> std::result::Result<ModelFile, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_model(&self) -> Result<IsingModel> {
        if let Some(g) = self.grid {
            if g.rows * g.cols != self.sites.len() {
                return Err(Error::input(format!(
                    "grid {}x{} does not match {} sites",
                    g.rows,
                    g.cols,
                    self.sites.len()
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for c in &self.couplings {
            let key = (c.i.min(c.j), c.i.max(c.j));
            if !seen.insert(key) {
                return Err(Error::input(format!("duplicate coupling ({}, {})", c.i, c.j)));
            }
        }
        let couplings: Vec<_> = self
            .couplings
            .iter()
            .map(|c| (Site(c.i), Site(c.j), c.coupling))
            .collect();
        let fields: Vec<_> = self.fields.iter().map(|f| (Site(f.i), f.field)).collect();
        IsingModel::classical(self.sites.iter().map(|&s| Site(s)).collect(), &couplings, &fields)
    }

    /// Describes a classical model; fails on non-classical potentials.
    pub fn from_model(model: &IsingModel) -> Result<ModelFile> {
        let form = model.classical_form()?;
        let mut couplings = Vec::new();
        for (k, nbrs) in form.adjacency.iter().enumerate() {
            for &(j, coupling) in nbrs {
                if j > k {
                    couplings.push(CouplingEntry {
                        i: model.sites()[k].0,
                        j: model.sites()[j].0,
                        coupling,
                    });
                }
            }
        }
        let fields = form
            .fields
            .iter()
            .enumerate()
            .filter(|(_, h)| **h != 0.0)
            .map(|(k, &h)| FieldEntry {
                i: model.sites()[k].0,
                field: h,
            })
            .collect();
        Ok(ModelFile {
            sites: model.sites().iter().map(|s| s.0).collect(),
            grid: None,
            couplings,
            fields,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model file serializes")
    }
}

pub fn load_model(path: &Path) -> Result<IsingModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelFile::parse(&text)
        .map_err(|m| Error::parse(path, m))?
        .to_model()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pair(coupling: f64) -> IsingModel {
        IsingModel::classical(vec![Site(0), Site(1)], &[(Site(0), Site(1), coupling)], &[]).unwrap()
    }

    fn zero(n: u32) -> IsingModel {
        IsingModel::classical((0..n).map(Site).collect(), &[], &[]).unwrap()
    }

    #[test]
    fn g_difference_of_zero_potential_vanishes() {
        let m = zero(3);
        for a in [1, -1] {
            for b in [1, -1] {
                assert_eq!(m.g_difference(Site(0), Site(1), a, b).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn g_difference_classical_is_two_j_ab() {
        let m = pair(0.2);
        for a in [1i8, -1] {
            for b in [1i8, -1] {
                let g = m.g_difference(Site(0), Site(1), a, b).unwrap();
                assert_abs_diff_eq!(g, 0.4 * (a * b) as f64, epsilon = 1e-15);
                let g_neg = m.g_difference(Site(0), Site(1), -a, b).unwrap();
                assert_eq!(g_neg, -g);
            }
        }
        assert!(m.g_difference(Site(0), Site(7), 1, 1).is_err());
    }

    #[test]
    fn conditional_full_values() {
        let x = Configuration::new(vec![1, 1]).unwrap();
        assert_eq!(zero(2).conditional_full(Site(0), &x).unwrap(), 0.5);
        let m = pair(0.2);
        let p = m.conditional_full(Site(0), &x).unwrap();
        assert_abs_diff_eq!(p, 1.0 / (1.0 + (-0.4f64).exp()), epsilon = 1e-15);
        assert_abs_diff_eq!(p, 0.598688, epsilon = 1e-6);
        let flipped = m.conditional_full(Site(0), &x.flipped(0)).unwrap();
        assert_abs_diff_eq!(p + flipped, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn conditional_full_rejects_wrong_length() {
        let x = Configuration::new(vec![1]).unwrap();
        assert!(pair(0.2).conditional_full(Site(0), &x).is_err());
        assert!(Configuration::new(vec![1, 0]).is_err());
    }

    #[test]
    fn sigmoid_is_overflow_safe() {
        assert_eq!(sigmoid(1e4), 1.0);
        assert_eq!(sigmoid(-1e4), 0.0);
        assert!(sigmoid(-700.0) > 0.0);
    }

    #[test]
    fn potential_omega_enumerates_sign_cases() {
        assert_eq!(zero(2).potential_omega(Site(0), Site(1)).unwrap(), 0.0);
        assert_abs_diff_eq!(pair(0.2).potential_omega(Site(0), Site(1)).unwrap(), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(pair(-0.2).potential_omega(Site(0), Site(1)).unwrap(), 0.8, epsilon = 1e-15);
        assert!(pair(0.2).potential_omega(Site(0), Site(0)).is_err());
    }

    #[test]
    fn interaction_range_sums_incident_couplings() {
        assert_eq!(zero(4).interaction_range(), 0.0);
        assert_abs_diff_eq!(pair(0.2).interaction_range(), 0.2, epsilon = 1e-15);
        let star = IsingModel::classical(
            (0..4).map(Site).collect(),
            &[(Site(0), Site(1), 0.2), (Site(0), Site(2), -0.2), (Site(0), Site(3), 0.2)],
            &[],
        )
        .unwrap();
        assert_abs_diff_eq!(star.interaction_range(), 0.6, epsilon = 1e-15);
    }

    #[test]
    fn constants_at_zero_range_are_limits() {
        let c = ModelConstants::from_range(0.0);
        assert_eq!(c.nu, 0.5);
        assert_abs_diff_eq!(c.c_r_star, 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(c.big_c_r_star, 0.25, epsilon = 1e-15);
        let tiny = ModelConstants::from_range(1e-9);
        assert_abs_diff_eq!(tiny.c_r_star, c.c_r_star, epsilon = 1e-8);
        assert_abs_diff_eq!(tiny.c1, c.c1, epsilon = 1e-6);
        assert_abs_diff_eq!(tiny.c2, c.c2, epsilon = 1e-6);
    }

    #[test]
    fn constants_match_closed_forms() {
        let r: f64 = 0.2;
        let c = ModelConstants::from_range(r);
        assert_abs_diff_eq!(c.nu, 0.40131, epsilon = 1e-5);
        let e = f64::exp;
        let c_lo = (1.0 - e(-4.0 * r)) * e(-2.0 * r) / (4.0 * r * (1.0 + e(2.0 * r)).powi(3));
        let c_hi = e(2.0 * r) * (e(4.0 * r) - 1.0) / (4.0 * r * (1.0 + e(-2.0 * r)).powi(2));
        let c1 = 4.0 * r * (1.0 + e(2.0 * r)).powi(3) / (e(-6.0 * r) * (e(4.0 * r) - 1.0));
        let c2 = 4.0 * r * (1.0 + e(2.0 * r)).powi(2) / (e(6.0 * r) * (e(4.0 * r) - 1.0));
        assert_abs_diff_eq!(c.c_r_star, c_lo, epsilon = 1e-14);
        assert_abs_diff_eq!(c.big_c_r_star, c_hi, epsilon = 1e-14);
        assert_abs_diff_eq!(c.c1 / c1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.c2 / c2, 1.0, epsilon = 1e-12);
        assert!(c.c_r_star <= c.big_c_r_star && c.c2 < c.c1);
        assert!(c.kappa_min > 0.0 && c.kappa_min <= 1.0);
    }

    #[test]
    fn nu_is_the_brute_force_minimum_conditional() {
        let m = pair(0.2);
        let nu = m.constants().nu;
        let mut lowest = f64::INFINITY;
        for idx in 0..4 {
            let x = Configuration::from_index(idx, 2);
            for s in [Site(0), Site(1)] {
                lowest = lowest.min(m.conditional_full(s, &x).unwrap());
            }
        }
        assert_abs_diff_eq!(lowest, nu, epsilon = 1e-15);
    }

    #[test]
    fn true_neighborhood_follows_nonzero_omega() {
        assert!(zero(3).true_neighborhood(Site(0)).unwrap().is_empty());
        let m = IsingModel::classical(
            (0..3).map(Site).collect(),
            &[(Site(0), Site(2), 0.3), (Site(0), Site(1), 0.0)],
            &[],
        )
        .unwrap();
        assert_eq!(m.true_neighborhood(Site(0)).unwrap(), SiteSet::from_ids(&[2]));
    }

    #[test]
    fn classical_form_rejects_asymmetric_entries() {
        let mut p = PairwisePotential::new();
        p.insert(Site(0), Site(1), classical_table(0.2)).unwrap();
        let m = IsingModel::new(vec![Site(0), Site(1)], p, &[]).unwrap();
        assert!(matches!(m.classical_form(), Err(Error::Model(_))));
        // conditionals are still defined
        let x = Configuration::new(vec![1, 1]).unwrap();
        assert!(m.conditional_full(Site(0), &x).unwrap() > 0.5);
        assert_eq!(m.conditional_full(Site(1), &x).unwrap(), 0.5);
    }

    #[test]
    fn potential_rejects_duplicates_and_diagonal() {
        let mut p = PairwisePotential::new();
        p.insert_coupling(Site(0), Site(1), 0.1).unwrap();
        assert!(p.insert_coupling(Site(1), Site(0), 0.1).is_err());
        assert!(p.insert(Site(2), Site(2), classical_table(0.1)).is_err());
    }

    #[test]
    fn field_enters_conditional() {
        let m = IsingModel::classical(vec![Site(0)], &[], &[(Site(0), 0.5)]).unwrap();
        let up = Configuration::new(vec![1]).unwrap();
        assert_abs_diff_eq!(m.conditional_full(Site(0), &up).unwrap(), sigmoid(1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(m.interaction_range(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn forest_detection() {
        let chain = IsingModel::classical(
            (0..3).map(Site).collect(),
            &[(Site(0), Site(1), 0.2), (Site(1), Site(2), 0.2)],
            &[],
        )
        .unwrap();
        assert!(chain.classical_form().unwrap().is_forest());
        let triangle = IsingModel::classical(
            (0..3).map(Site).collect(),
            &[(Site(0), Site(1), 0.2), (Site(1), Site(2), 0.2), (Site(0), Site(2), 0.2)],
            &[],
        )
        .unwrap();
        assert!(!triangle.classical_form().unwrap().is_forest());
    }

    #[test]
    fn model_file_round_trip_and_duplicates() {
        let text = r#"
sites = [0, 1, 2]
grid = { rows = 1, cols = 3 }
couplings = [ { i = 0, j = 1, J = 0.2 }, { i = 1, j = 2, J = -0.1 } ]
fields = [ { i = 2, H = 0.05 } ]
"#;
        let file = ModelFile::parse(text).unwrap();
        let model = file.to_model().unwrap();
        assert_abs_diff_eq!(model.potential_omega(Site(1), Site(2)).unwrap(), 0.4, epsilon = 1e-15);
        let again = ModelFile::parse(&ModelFile::from_model(&model).unwrap().to_toml())
            .unwrap()
            .to_model()
            .unwrap();
        assert_eq!(again.content_hash(), model.content_hash());

        let dup = "sites = [0, 1]\ncouplings = [ { i = 0, j = 1, J = 0.2 }, { i = 1, j = 0, J = 0.2 } ]\n";
        assert!(ModelFile::parse(dup).unwrap().to_model().is_err());
        let bad_grid = "sites = [0, 1]\ngrid = { rows = 2, cols = 2 }\n";
        assert!(ModelFile::parse(bad_grid).unwrap().to_model().is_err());
    }

    #[test]
    fn site_set_operations() {
        let a = SiteSet::from_ids(&[3, 1, 2, 3]);
        assert_eq!(a.as_slice(), &[Site(1), Site(2), Site(3)]);
        let b = SiteSet::from_ids(&[2, 5]);
        assert_eq!(a.intersection(&b), SiteSet::from_ids(&[2]));
        assert_eq!(a.union(&b).len(), 4);
        assert_eq!(a.difference(&b), SiteSet::from_ids(&[1, 3]));
        assert_eq!(SiteSet::parse_list("1, 2;3").unwrap(), a);
        assert_eq!(a.to_string(), "1 2 3");
    }
}

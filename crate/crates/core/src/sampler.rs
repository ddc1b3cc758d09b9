//! I.i.d. samples of Ising models.
//!
//! Three generators are available:
//! * exact inverse-CDF sampling over the enumerated joint table (small site sets),
//! * exact sequential sampling on forests (any size, acyclic couplings),
//! * single-chain Gibbs sampling with burn-in and thinning (everything else).
//!
//! Every [`SampleSet`] records the seed, generator and model hash, which is
//! enough to regenerate its data bit-exactly.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::model::{ClassicalForm, IsingModel, Site, Spin};

pub const GENERATOR: &str = "ChaCha20";

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    Exact,
    Tree,
    Gibbs,
    /// Data loaded from a file without provenance.
    External,
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerKind::Exact => "exact",
            SamplerKind::Tree => "tree",
            SamplerKind::Gibbs => "gibbs",
            SamplerKind::External => "external",
        })
    }
}

impl FromStr for SamplerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SamplerKind::Exact),
            "tree" => Ok(SamplerKind::Tree),
            "gibbs" => Ok(SamplerKind::Gibbs),
            "external" => Ok(SamplerKind::External),
            other => Err(Error::input(format!("unknown sampler `{other}`"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum ScanOrder {
    Random,
    Systematic,
}

impl fmt::Display for ScanOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanOrder::Random => "random",
            ScanOrder::Systematic => "systematic",
        })
    }
}

impl FromStr for ScanOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(ScanOrder::Random),
            "systematic" => Ok(ScanOrder::Systematic),
            other => Err(Error::input(format!("unknown scan order `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Full sweeps discarded before the first retained state.
    pub burn_in: usize,
    /// Full sweeps between retained states.
    pub thinning: usize,
    /// Largest site count sampled by full enumeration.
    pub exact_cap: usize,
    pub scan: ScanOrder,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            burn_in: 1000,
            thinning: 100,
            exact_cap: 20,
            scan: ScanOrder::Random,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        SamplerConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 {
            return Err(Error::input("thinning must be at least 1"));
        }
        Ok(())
    }
}

/// Provenance of a sample set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleMeta {
    pub seed: u64,
    pub sampler: SamplerKind,
    pub burn_in: usize,
    pub thinning: usize,
    pub scan: ScanOrder,
    pub model_hash: String,
    pub generator: String,
}

impl SampleMeta {
    pub fn external() -> Self {
        SampleMeta {
            seed: 0,
            sampler: SamplerKind::External,
            burn_in: 0,
            thinning: 1,
            scan: ScanOrder::Random,
            model_hash: String::new(),
            generator: String::new(),
        }
    }

    fn to_lines(&self) -> Vec<(&'static str, String)> {
        vec![
            ("seed", self.seed.to_string()),
            ("sampler", self.sampler.to_string()),
            ("burn_in", self.burn_in.to_string()),
            ("thinning", self.thinning.to_string()),
            ("scan", self.scan.to_string()),
            ("model_hash", self.model_hash.clone()),
            ("generator", self.generator.clone()),
        ]
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let int = |v: &str| v.parse::<u64>().map_err(|_| format!("bad value `{v}` for `{key}`"));
        match key {
            "seed" => self.seed = int(value)?,
            "sampler" => self.sampler = value.parse().map_err(|e: Error| e.to_string())?,
            "burn_in" => self.burn_in = int(value)? as usize,
            "thinning" => self.thinning = int(value)? as usize,
            "scan" => self.scan = value.parse().map_err(|e: Error| e.to_string())?,
            "model_hash" => self.model_hash = value.to_string(),
            "generator" => self.generator = value.to_string(),
            other => return Err(format!("unknown meta key `{other}`")),
        }
        Ok(())
    }
}

/// `n × M` matrix of spins, bit-packed by column (bit set means `+1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSet {
    site_labels: Vec<Site>,
    n: usize,
    columns: Vec<Vec<u64>>,
    meta: SampleMeta,
}

/// Row-wise accumulator for a [`SampleSet`].
pub struct SampleBuilder {
    site_labels: Vec<Site>,
    n: usize,
    columns: Vec<Vec<u64>>,
}

impl SampleBuilder {
    pub fn new(site_labels: Vec<Site>, capacity: usize) -> Self {
        let words = capacity.div_ceil(64);
        let columns = vec![Vec::with_capacity(words); site_labels.len()];
        SampleBuilder {
            site_labels,
            n: 0,
            columns,
        }
    }

    pub fn push(&mut self, row: &[Spin]) -> Result<()> {
        if row.len() != self.site_labels.len() {
            return Err(Error::input(format!(
                "row has {} spins, expected {}",
                row.len(),
                self.site_labels.len()
            )));
        }
        let (word, bit) = (self.n / 64, self.n % 64);
        for (col, &s) in self.columns.iter_mut().zip(row) {
            if bit == 0 {
                col.push(0);
            }
            match s {
                1 => col[word] |= 1u64 << bit,
                -1 => {}
                other => return Err(Error::input(format!("spin value {other} is not ±1"))),
            }
        }
        self.n += 1;
        Ok(())
    }

    pub fn finish(self, meta: SampleMeta) -> Result<SampleSet> {
        if self.n == 0 {
            return Err(Error::input("a sample set needs at least one row"));
        }
        Ok(SampleSet {
            site_labels: self.site_labels,
            n: self.n,
            columns: self.columns,
            meta,
        })
    }
}

impl SampleSet {
    pub fn from_rows(site_labels: Vec<Site>, rows: &[Vec<Spin>], meta: SampleMeta) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = site_labels.iter().find(|s| !seen.insert(**s)) {
            return Err(Error::input(format!("duplicate site label {dup}")));
        }
        let mut b = SampleBuilder::new(site_labels, rows.len());
        for row in rows {
            b.push(row)?;
        }
        b.finish(meta)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of observed sites `M`.
    pub fn m(&self) -> usize {
        self.site_labels.len()
    }

    pub fn site_labels(&self) -> &[Site] {
        &self.site_labels
    }

    pub fn meta(&self) -> &SampleMeta {
        &self.meta
    }

    pub fn column_index(&self, site: Site) -> Result<usize> {
        self.site_labels
            .iter()
            .position(|&s| s == site)
            .ok_or_else(|| Error::input(format!("site {site} is not observed in the samples")))
    }

    /// Packed words of a column; bits past `n` are zero.
    pub fn column_words(&self, col: usize) -> &[u64] {
        &self.columns[col]
    }

    pub fn spin(&self, row: usize, col: usize) -> Spin {
        if (self.columns[col][row / 64] >> (row % 64)) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn row(&self, row: usize) -> Vec<Spin> {
        (0..self.m()).map(|c| self.spin(row, c)).collect()
    }

    /// Number of rows with `+1` in the column.
    pub fn count_up(&self, col: usize) -> u64 {
        self.columns[col].iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Number of rows with `+1` in both columns.
    pub fn count_both_up(&self, a: usize, b: usize) -> u64 {
        self.columns[a]
            .iter()
            .zip(&self.columns[b])
            .map(|(x, y)| (x & y).count_ones() as u64)
            .sum()
    }

    /// Text form: `sites:` header, `# key=value` meta lines, one `±1` row per sample.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let labels: Vec<String> = self.site_labels.iter().map(|s| s.to_string()).collect();
        writeln!(w, "sites: {}", labels.join(","))?;
        for (k, v) in self.meta.to_lines() {
            writeln!(w, "# {k}={v}")?;
        }
        let mut line = String::with_capacity(3 * self.m());
        for r in 0..self.n {
            line.clear();
            for c in 0..self.m() {
                if c > 0 {
                    line.push(',');
                }
                line.push_str(if self.spin(r, c) > 0 { "+1" } else { "-1" });
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text<R: Read>(r: R) -> std::result::Result<SampleSet, String> {
        let mut lines = BufReader::new(r).lines();
        let header = lines
            .next()
            .ok_or("empty sample file")?
            .map_err(|e| e.to_string())?;
        let labels_text = header
            .strip_prefix("sites:")
            .ok_or("first line must start with `sites:`")?;
        let labels = parse_labels(labels_text)?;
        let mut meta = SampleMeta::external();
        let mut builder: Option<SampleBuilder> = None;
        let mut row = Vec::with_capacity(labels.len());
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(kv) = line.strip_prefix('#') {
                if builder.is_some() {
                    return Err(format!("line {}: meta line after data", lineno + 2));
                }
                let (k, v) = kv
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| format!("line {}: expected `# key=value`", lineno + 2))?;
                meta.set(k.trim(), v.trim())?;
                continue;
            }
            row.clear();
            for tok in line.split(',') {
                row.push(match tok.trim() {
                    "+1" | "1" => 1,
                    "-1" => -1,
                    other => return Err(format!("line {}: bad spin `{other}`", lineno + 2)),
                });
            }
            builder
                .get_or_insert_with(|| SampleBuilder::new(labels.clone(), 1024))
                .push(&row)
                .map_err(|e| format!("line {}: {e}", lineno + 2))?;
        }
        builder
            .unwrap_or_else(|| SampleBuilder::new(labels, 0))
            .finish(meta)
            .map_err(|e| e.to_string())
    }

    const MAGIC: &'static [u8; 8] = b"ISNGBIN1";

    /// Binary form: magic, `M`, `n`, labels, meta block, then packed columns (little endian).
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(Self::MAGIC)?;
        w.write_all(&(self.m() as u32).to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for s in &self.site_labels {
            w.write_all(&s.0.to_le_bytes())?;
        }
        let meta: String = self
            .meta
            .to_lines()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        w.write_all(&(meta.len() as u32).to_le_bytes())?;
        w.write_all(meta.as_bytes())?;
        for col in &self.columns {
            for word in col {
                w.write_all(&word.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> std::result::Result<SampleSet, String> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|e| e.to_string())?;
        if &magic != Self::MAGIC {
            return Err("not a binary sample file".into());
        }
        let m = read_u32(&mut r)? as usize;
        let n = read_u64(&mut r)? as usize;
        if n == 0 {
            return Err("a sample set needs at least one row".into());
        }
        let site_labels = (0..m).map(|_| read_u32(&mut r).map(Site)).collect::<std::result::Result<Vec<_>, _>>()?;
        let meta_len = read_u32(&mut r)? as usize;
        let mut meta_bytes = vec![0u8; meta_len];
        r.read_exact(&mut meta_bytes).map_err(|e| e.to_string())?;
        let meta_text = String::from_utf8(meta_bytes).map_err(|e| e.to_string())?;
        let mut meta = SampleMeta::external();
        for line in meta_text.lines() {
            let (k, v) = line.split_once('=').ok_or("bad meta block")?;
            meta.set(k, v)?;
        }
        let words = n.div_ceil(64);
        let tail_mask = if n.is_multiple_of(64) { u64::MAX } else { (1u64 << (n % 64)) - 1 };
        let mut columns = Vec::with_capacity(m);
        for _ in 0..m {
            let mut col = (0..words).map(|_| read_u64(&mut r)).collect::<std::result::Result<Vec<_>, _>>()?;
            if col[words - 1] & !tail_mask != 0 {
                return Err("padding bits set past the last row".into());
            }
            col.shrink_to_fit();
            columns.push(col);
        }
        Ok(SampleSet {
            site_labels,
            n,
            columns,
            meta,
        })
    }

    /// Writes text or binary depending on `binary`.
    pub fn save(&self, path: &Path, binary: bool) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let w = std::io::BufWriter::new(file);
        if binary { self.write_binary(w) } else { self.write_text(w) }.map_err(|e| Error::io(path, e))
    }

    /// Reads either format, detected from the leading magic bytes.
    pub fn load(path: &Path) -> Result<SampleSet> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let parsed = if bytes.starts_with(Self::MAGIC) {
            SampleSet::read_binary(&bytes[..])
        } else {
            SampleSet::read_text(&bytes[..])
        };
        parsed.map_err(|m| Error::parse(path, m))
    }
}

fn parse_labels(text: &str) -> std::result::Result<Vec<Site>, String> {
    let mut labels = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for tok in text.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let id: u32 = tok.parse().map_err(|_| format!("bad site label `{tok}`"))?;
        if !seen.insert(id) {
            return Err(format!("duplicate site label {id}"));
        }
        labels.push(Site(id));
    }
    Ok(labels)
}

fn read_u32<R: Read>(r: &mut R) -> std::result::Result<u32, String> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|e| e.to_string())?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> std::result::Result<u64, String> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|e| e.to_string())?;
    Ok(u64::from_le_bytes(b))
}

/// Normalized Boltzmann weights of all `2^|G|` configurations.
///
/// Index bit `k` set means site `k` (model order) is `+1`.
#[derive(Clone, Debug)]
pub struct JointTable {
    sites: usize,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, index: u64) -> f64 {
        self.probs[index as usize]
    }
}

fn check_capacity(model: &IsingModel, cap: usize, what: &'static str) -> Result<()> {
    if model.len() > cap || model.len() >= 63 {
        return Err(Error::Capacity {
            what,
            needed: model.len(),
            limit: cap.min(62),
        });
    }
    Ok(())
}

/// Enumerates the joint law `∝ exp(Σ_{i<j} J_ij x_i x_j + Σ_i H_i x_i)`.
pub fn joint_distribution(model: &IsingModel, exact_cap: usize) -> Result<JointTable> {
    check_capacity(model, exact_cap, "joint enumeration")?;
    let form = model.classical_form()?;
    let m = model.len();
    let mut spins = vec![-1i8; m];
    let mut log_w = Vec::with_capacity(1 << m);
    for idx in 0..(1u64 << m) {
        for (k, s) in spins.iter_mut().enumerate() {
            *s = if (idx >> k) & 1 == 1 { 1 } else { -1 };
        }
        log_w.push(form.energy(&spins));
    }
    let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = log_w.iter().map(|&e| (e - top).exp()).collect();
    let z: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= z;
    }
    Ok(JointTable { sites: m, probs })
}

fn rng_for(config: &SamplerConfig) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(config.seed)
}

fn meta_for(model: &IsingModel, config: &SamplerConfig, kind: SamplerKind) -> SampleMeta {
    let (burn_in, thinning) = match kind {
        SamplerKind::Gibbs => (config.burn_in, config.thinning),
        _ => (0, 1),
    };
    SampleMeta {
        seed: config.seed,
        sampler: kind,
        burn_in,
        thinning,
        scan: config.scan,
        model_hash: model.content_hash(),
        generator: GENERATOR.to_string(),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::input("sample size must be at least 1"));
    }
    Ok(())
}

/// `n` i.i.d. draws by inverse CDF over the enumerated joint table.
pub fn exact_sampler(model: &IsingModel, n: usize, config: &SamplerConfig) -> Result<SampleSet> {
    check_n(n)?;
    let joint = joint_distribution(model, config.exact_cap)?;
    let mut cdf = Vec::with_capacity(joint.probs.len());
    let mut acc = 0.0;
    for p in &joint.probs {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = rng_for(config);
    let m = model.len();
    let mut builder = SampleBuilder::new(model.sites().to_vec(), n);
    let mut row = vec![0i8; m];
    for _ in 0..n {
        let u: f64 = rng.random::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        for (k, s) in row.iter_mut().enumerate() {
            *s = if (idx >> k) & 1 == 1 { 1 } else { -1 };
        }
        builder.push(&row)?;
    }
    builder.finish(meta_for(model, config, SamplerKind::Exact))
}

/// Exact sequential sampler for classical models whose coupling graph is a forest.
struct TreePlan {
    /// Visit order; parents precede children.
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
    /// `P(x = +1 | parent = +1)`, `P(x = +1 | parent = -1)`; roots use slot 0.
    up_prob: Vec<[f64; 2]>,
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let top = a.max(b);
    top + ((a - top).exp() + (b - top).exp()).ln()
}

impl TreePlan {
    fn new(form: &ClassicalForm) -> Result<TreePlan> {
        if !form.is_forest() {
            return Err(Error::Model("coupling graph has a cycle".into()));
        }
        let m = form.adjacency.len();
        let mut order = Vec::with_capacity(m);
        let mut parent = vec![None; m];
        let mut coupling_to_parent = vec![0.0; m];
        let mut seen = vec![false; m];
        for root in 0..m {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let start = order.len();
            order.push(root);
            let mut head = start;
            while head < order.len() {
                let k = order[head];
                head += 1;
                for &(j, coupling) in &form.adjacency[k] {
                    if !seen[j] {
                        seen[j] = true;
                        parent[j] = Some(k);
                        coupling_to_parent[j] = coupling;
                        order.push(j);
                    }
                }
            }
        }
        // belief[k][s]: log weight of x_k = s (index 0 → +1) from its field and subtree.
        let mut belief: Vec<[f64; 2]> = (0..m).map(|k| [form.fields[k], -form.fields[k]]).collect();
        for &k in order.iter().rev() {
            if let Some(p) = parent[k] {
                let jc = coupling_to_parent[k];
                let msg_up = log_sum_exp(jc + belief[k][0], -jc + belief[k][1]);
                let msg_down = log_sum_exp(-jc + belief[k][0], jc + belief[k][1]);
                belief[p][0] += msg_up;
                belief[p][1] += msg_down;
            }
        }
        let up_prob = (0..m)
            .map(|k| match parent[k] {
                None => [crate::model::sigmoid(belief[k][0] - belief[k][1]); 2],
                Some(_) => {
                    let jc = coupling_to_parent[k];
                    [
                        crate::model::sigmoid((jc + belief[k][0]) - (-jc + belief[k][1])),
                        crate::model::sigmoid((-jc + belief[k][0]) - (jc + belief[k][1])),
                    ]
                }
            })
            .collect();
        Ok(TreePlan {
            order,
            parent,
            up_prob,
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R, row: &mut [Spin]) {
        for &k in &self.order {
            let p = match self.parent[k] {
                None => self.up_prob[k][0],
                Some(par) => self.up_prob[k][(row[par] < 0) as usize],
            };
            row[k] = if rng.random::<f64>() < p { 1 } else { -1 };
        }
    }
}

/// `n` i.i.d. draws for a forest-structured classical model, any number of sites.
pub fn tree_sampler(model: &IsingModel, n: usize, config: &SamplerConfig) -> Result<SampleSet> {
    check_n(n)?;
    let plan = TreePlan::new(&model.classical_form()?)?;
    let mut rng = rng_for(config);
    let mut builder = SampleBuilder::new(model.sites().to_vec(), n);
    let mut row = vec![1i8; model.len()];
    for _ in 0..n {
        plan.draw(&mut rng, &mut row);
        builder.push(&row)?;
    }
    builder.finish(meta_for(model, config, SamplerKind::Tree))
}

/// Single-chain Gibbs sampler: `burn_in` sweeps discarded, then one state kept every `thinning` sweeps.
pub fn gibbs_sampler(model: &IsingModel, n: usize, config: &SamplerConfig) -> Result<SampleSet> {
    check_n(n)?;
    config.validate()?;
    let form = model.classical_form()?;
    let m = model.len();
    let mut rng = rng_for(config);
    let mut state: Vec<Spin> = (0..m).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    let sweep = |state: &mut Vec<Spin>, rng: &mut ChaCha20Rng| {
        for step in 0..m {
            let k = match config.scan {
                ScanOrder::Random => rng.random_range(0..m),
                ScanOrder::Systematic => step,
            };
            let p_up = crate::model::sigmoid(2.0 * form.local_field(k, state));
            state[k] = if rng.random::<f64>() < p_up { 1 } else { -1 };
        }
    };
    for _ in 0..config.burn_in {
        sweep(&mut state, &mut rng);
    }
    let mut builder = SampleBuilder::new(model.sites().to_vec(), n);
    for _ in 0..n {
        for _ in 0..config.thinning {
            sweep(&mut state, &mut rng);
        }
        builder.push(&state)?;
    }
    builder.finish(meta_for(model, config, SamplerKind::Gibbs))
}

/// The generator [`sample`] picks for a model: exact when it fits the
/// enumeration cap, tree when the couplings form a forest, Gibbs otherwise.
pub fn preferred_sampler(model: &IsingModel, config: &SamplerConfig) -> Result<SamplerKind> {
    if model.len() <= config.exact_cap && model.len() < 63 {
        return Ok(SamplerKind::Exact);
    }
    if model.classical_form()?.is_forest() {
        Ok(SamplerKind::Tree)
    } else {
        Ok(SamplerKind::Gibbs)
    }
}

pub fn sample_with(kind: SamplerKind, model: &IsingModel, n: usize, config: &SamplerConfig) -> Result<SampleSet> {
    match kind {
        SamplerKind::Exact => exact_sampler(model, n, config),
        SamplerKind::Tree => tree_sampler(model, n, config),
        SamplerKind::Gibbs => gibbs_sampler(model, n, config),
        SamplerKind::External => Err(Error::input("`external` is not a generator")),
    }
}

pub fn sample(model: &IsingModel, n: usize, config: &SamplerConfig) -> Result<SampleSet> {
    sample_with(preferred_sampler(model, config)?, model, n, config)
}

//! Models used by the simulation experiments.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::model::{IsingModel, Site, SiteSet};

pub const LATTICE_COUPLING: f64 = 0.2;

/// Default seed of the regenerated 200-site instance.
pub const SPARSE_SEED: u64 = 20_140_917;

/// Site id of lattice point `(r, c)` with `r, c ∈ {-1, 0, 1}`.
pub fn lattice_site(r: i32, c: i32) -> Site {
    Site((3 * (r + 1) + (c + 1)) as u32)
}

/// Center `(0, 0)` of the 3×3 lattice.
pub fn lattice_center() -> Site {
    lattice_site(0, 0)
}

/// 3×3 nearest-neighbour lattice with free boundary and coupling `j`.
pub fn lattice_model(j: f64) -> Result<IsingModel> {
    let mut couplings = Vec::new();
    for r in -1..=1 {
        for c in -1..=1 {
            if c < 1 {
                couplings.push((lattice_site(r, c), lattice_site(r, c + 1), j));
            }
            if r < 1 {
                couplings.push((lattice_site(r, c), lattice_site(r + 1, c), j));
            }
        }
    }
    IsingModel::classical((0..9).map(Site).collect(), &couplings, &[])
}

/// The 3×3 lattice at `J = 0.2`; the target is [`lattice_center`].
pub fn figure1_model() -> Result<IsingModel> {
    lattice_model(LATTICE_COUPLING)
}

/// Neighbours of the center in the 3×3 lattice.
pub fn lattice_center_neighbors() -> SiteSet {
    SiteSet::new(vec![lattice_site(-1, 0), lattice_site(0, -1), lattice_site(0, 1), lattice_site(1, 0)])
}

#[derive(Clone, Debug)]
pub struct SparseModel {
    pub model: IsingModel,
    pub target: Site,
    /// Neighbours of the target sorted by decreasing coupling.
    pub ranked_neighbors: Vec<(Site, f64)>,
}

/// Random forest on sites `1..=sites` with `|N(0, 2²)|` couplings.
///
/// Site 1 gets `target_degree` neighbours. Every other site joins the forest
/// with probability 1/2, attached to a uniformly chosen site already placed
/// (never site 1), so the interaction graph stays acyclic.
pub fn sparse_model(sites: u32, target_degree: usize, seed: u64) -> Result<SparseModel> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 2.0).expect("valid normal");
    let target = Site(1);
    let mut others: Vec<Site> = (2..=sites).map(Site).collect();
    others.shuffle(&mut rng);
    let degree = target_degree.min(others.len());
    let mut couplings = Vec::new();
    let mut ranked = Vec::new();
    let mut placed: Vec<Site> = Vec::new();
    for &j in &others[..degree] {
        let w: f64 = normal.sample(&mut rng);
        let w = w.abs();
        couplings.push((target, j, w));
        ranked.push((j, w));
        placed.push(j);
    }
    for &j in &others[degree..] {
        if rng.random_bool(0.5) && !placed.is_empty() {
            let parent = placed[rng.random_range(0..placed.len())];
            let w: f64 = normal.sample(&mut rng);
            couplings.push((parent, j, w.abs()));
        }
        placed.push(j);
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let model = IsingModel::classical((1..=sites).map(Site).collect(), &couplings, &[])?;
    Ok(SparseModel {
        model,
        target,
        ranked_neighbors: ranked,
    })
}

/// The default 200-site instance: 16 neighbours at site 1.
pub fn sparse_200() -> Result<SparseModel> {
    sparse_model(200, 16, SPARSE_SEED)
}

mod common;

use approx::assert_abs_diff_eq;
use common::{brute_conditional, brute_joint, random_spec, rng};
use ising_neigh::harness::presets::{figure1_model, lattice_center, lattice_center_neighbors};
use ising_neigh::oracle::Oracle;
use ising_neigh::sampler::sample;
use ising_neigh::{Configuration, IsingModel, SamplerConfig, Site, SiteSet};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn sub_conditionals_match_direct_summation() {
    let mut r = rng(11);
    for _ in 0..40 {
        let m = r.random_range(2..=8usize);
        let (c, f) = random_spec(&mut r, m, 1.0, 0.6, 0.5);
        let model = IsingModel::classical((0..m as u32).map(Site).collect(), &c, &f).unwrap();
        let joint = brute_joint(m, &c, &f);
        let oracle = Oracle::new(&model).unwrap();
        let i = r.random_range(0..m);
        let v: Vec<usize> = (0..m).filter(|&k| k != i && r.random_bool(0.5)).collect();
        let scope = SiteSet::new(v.iter().map(|&k| Site(k as u32)).collect());
        let (plus, marg) = brute_conditional(&joint, i, &v);
        let sub = oracle.exact_conditional_sub(Site(i as u32), &scope).unwrap();
        for key in 0..plus.len() {
            assert_abs_diff_eq!(sub.plus()[key], plus[key], epsilon = 1e-12);
            assert_abs_diff_eq!(sub.marginal()[key], marg[key], epsilon = 1e-12);
        }
        // Bias against the full conditional, also by direct summation.
        let rest: Vec<usize> = (0..m).filter(|&k| k != i).collect();
        let (full, _) = brute_conditional(&joint, i, &rest);
        let mut bias: f64 = 0.0;
        for x in 0..1usize << m {
            let kv = v.iter().enumerate().fold(0, |a, (k, &s)| a | (((x >> s) & 1) << k));
            let kr = rest.iter().enumerate().fold(0, |a, (k, &s)| a | (((x >> s) & 1) << k));
            bias = bias.max((plus[kv] - full[kr]).abs());
        }
        assert_abs_diff_eq!(oracle.bias(Site(i as u32), &scope).unwrap(), bias, epsilon = 1e-12);
    }
}

#[test]
fn markov_property_on_the_lattice() {
    let model = figure1_model().unwrap();
    let oracle = Oracle::new(&model).unwrap();
    let i = lattice_center();
    let v = lattice_center_neighbors();
    let sub = oracle.exact_conditional_sub(i, &v).unwrap();
    let pos: Vec<usize> = v.iter().map(|s| model.index_of(s).unwrap()).collect();
    for x in 0..1u64 << model.len() {
        let cfg = Configuration::from_index(x, model.len());
        let key = pos
            .iter()
            .enumerate()
            .fold(0u64, |a, (k, &p)| a | (((x >> p) & 1) << k));
        let xi = cfg.get(model.index_of(i).unwrap());
        assert_abs_diff_eq!(sub.prob(xi, key), model.conditional_full(i, &cfg).unwrap(), epsilon = 1e-12);
    }
    assert!(oracle.bias(i, &v).unwrap() < 1e-12);
    assert!(oracle.bias(i, &SiteSet::from_ids(&[1, 3, 5])).unwrap() > 1e-3);
}

#[test]
fn two_site_omega_sandwich() {
    let model = IsingModel::classical(vec![Site(0), Site(1)], &[(Site(0), Site(1), 0.2)], &[]).unwrap();
    let oracle = Oracle::new(&model).unwrap();
    let k = model.constants();
    let w = model.potential_omega(Site(0), Site(1)).unwrap();
    let wg = oracle.true_omega_full(Site(0), Site(1)).unwrap();
    assert_abs_diff_eq!(k.omega_lower() * w, 0.17273, epsilon = 5e-5);
    assert_abs_diff_eq!(wg, 0.19737, epsilon = 5e-5);
    assert_abs_diff_eq!(k.omega_upper() * w, 0.65532, epsilon = 5e-5);
}

#[test]
fn conditionals_stay_inside_the_nu_band() {
    let mut r = rng(5);
    for _ in 0..30 {
        let m = r.random_range(2..=8usize);
        let (c, f) = random_spec(&mut r, m, 1.5, 0.5, 1.0);
        let model = IsingModel::classical((0..m as u32).map(Site).collect(), &c, &f).unwrap();
        let nu = model.constants().nu;
        let oracle = Oracle::new(&model).unwrap();
        for i in 0..m as u32 {
            let s = oracle.sup_norm_full(Site(i)).unwrap();
            assert!(s <= 1.0 - nu + 1e-12, "{s} > 1 - {nu}");
            let sub = oracle.exact_conditional_sub(Site(i), &model.site_set()).unwrap();
            assert!(sub.plus().iter().all(|&p| p >= nu - 1e-12 && p <= 1.0 - nu + 1e-12));
        }
    }
}

#[test]
fn variance_term_obeys_the_ratio_lemma_per_replica() {
    let model = figure1_model().unwrap();
    let oracle = Oracle::new(&model).unwrap();
    let i = lattice_center();
    for (rep, v) in [SiteSet::from_ids(&[1, 3]), lattice_center_neighbors(), SiteSet::from_ids(&[0, 2, 5])]
        .into_iter()
        .enumerate()
    {
        let samples = sample(&model, 400, &SamplerConfig::with_seed(rep as u64)).unwrap();
        let full = v.union(&SiteSet::new(vec![i]));
        let exact = oracle.marginal(&full).unwrap();
        let cols: Vec<usize> = full.iter().map(|s| samples.column_index(s).unwrap()).collect();
        let mut hat = vec![0.0; exact.len()];
        for row in 0..samples.n() {
            let key = cols
                .iter()
                .enumerate()
                .fold(0usize, |a, (k, &c)| a | (((samples.spin(row, c) > 0) as usize) << k));
            hat[key] += 1.0 / samples.n() as f64;
        }
        let sup_diff = hat.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let p_low = oracle.min_marginal(&v).unwrap();
        let bound = 3.0 * sup_diff / p_low;
        let value = oracle.variance_term(&samples, i, &v).unwrap();
        assert!(value <= bound + 1e-12, "{value} > {bound}");
        let risk = oracle.risk(&samples, i, &v).unwrap();
        assert!(risk <= value + oracle.bias(i, &v).unwrap() + 1e-12);
    }
}

/// Random strictly positive probability table on `k` sites.
fn prob_table(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 1 << k).prop_map(|w| {
        let z: f64 = w.iter().sum();
        w.into_iter().map(|v| v / z).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn conditional_difference_ratio_lemma(k in 1usize..=4, q in prob_table(4), r in prob_table(4)) {
        // Restrict the 4-site tables to the first k sites; site 0 is the target.
        let fold = |t: &[f64]| {
            let mut out = vec![0.0; 1 << k];
            for (x, p) in t.iter().enumerate() {
                out[x & ((1 << k) - 1)] += p;
            }
            out
        };
        let (q, r) = (fold(&q), fold(&r));
        let sup = q.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        for y in 0..1usize << (k - 1) {
            let (qm, qp) = (q[y << 1], q[(y << 1) | 1]);
            let (rm, rp) = (r[y << 1], r[(y << 1) | 1]);
            let lhs = (qp / (qp + qm) - rp / (rp + rm)).abs();
            prop_assert!(lhs <= 3.0 * sup / (rp + rm) + 1e-12);
        }
    }
}

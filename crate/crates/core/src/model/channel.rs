use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::ChannelRng;

use super::{Draw, MoleculePool, SampleSet};

/// The index stream shared by tagged and untagged sampling: `n` uniform
/// draws from `[0, m)` seeded by `seed`.
pub fn draw_indices(m: u64, n: u64, seed: u64) -> impl Iterator<Item = u64> {
    let mut rng = ChannelRng::new(seed);
    (0..n).map(move |_| rng.below(m))
}

pub(crate) fn sample_indexed(pool: &MoleculePool, seed: u64, tagged: bool) -> SampleSet {
    let params = *pool.params();
    let draws = draw_indices(params.m(), params.n(), seed)
        .map(|i| Draw {
            molecule: pool.get(i as usize).clone(),
            tag: tagged.then_some(i),
        })
        .collect();
    SampleSet::new(params, draws).expect("pool invariants imply a valid sample set")
}

/// Draws `N` molecules uniformly and independently, with replacement.
pub fn sample_with_replacement(pool: &MoleculePool, seed: u64) -> SampleSet {
    sample_indexed(pool, seed, false)
}

/// Fraction of the `m` indices never hit by `n` uniform draws from `rng`.
pub fn erasure_fraction(m: u64, n: u64, rng: &mut ChannelRng) -> f64 {
    let mut seen = vec![false; m as usize];
    let mut hit = 0u64;
    for _ in 0..n {
        let slot = &mut seen[rng.below(m) as usize];
        if !*slot {
            *slot = true;
            hit += 1;
        }
    }
    (m - hit) as f64 / m as f64
}

/// Mean fraction of pool positions that are never sampled, over `trials`
/// independent channel uses. Trial `t` uses sub-seed `trial_seed(seed, t)`.
pub fn empirical_erasure_probability(pool: &MoleculePool, trials: u64, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    if let Some((first, second)) = pool.find_duplicate() {
        return Err(Error::NotDistinct { first, second });
    }
    let (m, n) = (pool.params().m(), pool.params().n());
    let per_trial: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| erasure_fraction(m, n, &mut ChannelRng::for_trial(seed, t)))
        .collect();
    Ok(per_trial.iter().sum::<f64>() / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChannelParams, Molecule};

    fn pool(m: u64, l: u32, c: f64) -> MoleculePool {
        MoleculePool::indexed(ChannelParams::from_lengths(m, l, c).unwrap()).unwrap()
    }

    #[test]
    fn single_molecule_pool() {
        let params = ChannelParams::degenerate(1, 5, 50);
        let x = Molecule::from_u64(0b10110, 5);
        let pool = MoleculePool::new(params, vec![x.clone()]).unwrap();
        let s = sample_with_replacement(&pool, 3);
        assert_eq!(s.len(), 50);
        assert!(s.draws().iter().all(|d| d.molecule == x && d.tag.is_none()));
    }

    #[test]
    fn deterministic() {
        let p = MoleculePool::random(ChannelParams::from_lengths(64, 24, 3.0).unwrap(), 1);
        assert_eq!(sample_with_replacement(&p, 11), sample_with_replacement(&p, 11));
        assert_ne!(sample_with_replacement(&p, 11), sample_with_replacement(&p, 12));
    }

    #[test]
    fn membership() {
        let p = MoleculePool::random(ChannelParams::from_lengths(32, 16, 4.0).unwrap(), 5);
        let s = sample_with_replacement(&p, 9);
        assert!(s.draws().iter().all(|d| p.molecules().contains(&d.molecule)));
    }

    #[test]
    fn two_molecules_half_each() {
        // N = 10^6 draws of a fair coin: sd of the fraction is 5e-4, so 0.002 is 4 sd.
        let p = pool(2, 1, 500_000.0);
        for seed in [1, 2, 3] {
            let s = sample_with_replacement(&p, seed);
            let zeros = s.draws().iter().filter(|d| d.molecule == *p.get(0)).count();
            let frac = zeros as f64 / s.len() as f64;
            assert!((frac - 0.5).abs() <= 0.002, "seed {seed}: {frac}");
        }
    }

    #[test]
    fn duplicate_pool_rejected_for_erasure() {
        let params = ChannelParams::from_lengths(4, 4, 1.0).unwrap();
        let pool = MoleculePool::new(params, vec![Molecule::zeros(4); 4]).unwrap();
        assert!(matches!(
            empirical_erasure_probability(&pool, 5, 0),
            Err(Error::NotDistinct { first: 0, second: 1 })
        ));
    }

    #[test]
    fn erasure_small_pool() {
        // (1 - 1/100)^200 = 0.13398
        let p = empirical_erasure_probability(&pool(100, 8, 2.0), 200, 17).unwrap();
        assert!((p - 0.99f64.powi(200)).abs() <= 0.01, "{p}");
    }

    #[test]
    fn erasure_deep_coverage_vanishes() {
        // (0.99)^2000 ~ 1.9e-9
        let p = empirical_erasure_probability(&pool(100, 8, 20.0), 100, 17).unwrap();
        assert!(p <= 1e-6, "{p}");
    }

    #[test]
    fn erasure_trial_order_independent_of_threads() {
        let pool = pool(256, 10, 1.0);
        let a = empirical_erasure_probability(&pool, 64, 5).unwrap();
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = single.install(|| empirical_erasure_probability(&pool, 64, 5).unwrap());
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

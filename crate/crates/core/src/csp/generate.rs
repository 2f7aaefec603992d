use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Constraint, CspInstance};
use crate::error::{Error, Result};

/// Uniform random k-SAT: each clause draws `k` distinct variables and one
/// uniformly random falsifying local assignment. Constraints keep their
/// draw order.
pub fn generate_random_ksat(n: usize, clause_count: usize, k: usize, seed: u64) -> Result<CspInstance> {
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    if n < k {
        return Err(Error::input(format!("n < k ({n} < {k})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let constraints = (0..clause_count)
        .map(|_| {
            let vars = sample(&mut rng, n, k).into_vec();
            let nogood = (0..k).map(|_| rng.random_range(0..2usize)).collect();
            Constraint::new(vars, vec![nogood])
        })
        .collect();
    CspInstance::with_arity(
        2,
        n,
        k,
        constraints,
        format!("random-{k}sat-n{n}-m{clause_count}-seed{seed}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::beta_of;

    #[test]
    fn empty_formula() {
        let inst = generate_random_ksat(3, 0, 3, 1).unwrap();
        assert_eq!(inst.xi(), 0);
        assert_eq!(beta_of(&inst), 0.0);
    }

    #[test]
    fn deterministic_under_seed() {
        let a = generate_random_ksat(10, 42, 3, 7).unwrap();
        let b = generate_random_ksat(10, 42, 3, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_random_ksat(10, 42, 3, 8).unwrap());
    }

    #[test]
    fn clause_density_is_beta() {
        let inst = generate_random_ksat(10, 42, 3, 7).unwrap();
        // one nogood per clause, counted directly
        let counted: usize = inst.constraints().iter().map(|c| c.nogoods.len()).sum();
        assert_eq!(counted, 42);
        assert!((beta_of(&inst) - 4.2).abs() < 1e-12);
        for c in inst.constraints() {
            assert_eq!(c.vars.len(), 3);
            let mut v = c.vars.clone();
            v.sort_unstable();
            v.dedup();
            assert_eq!(v.len(), 3);
        }
    }

    #[test]
    fn rejects_n_below_k() {
        assert!(matches!(generate_random_ksat(2, 5, 3, 0), Err(Error::Input(_))));
    }
}

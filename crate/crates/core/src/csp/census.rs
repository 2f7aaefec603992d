use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Assignment, Constraint, CspInstance, Partition};
use crate::error::{Error, Result};

/// Largest search space `census` will enumerate by default (`2^24`).
pub const DEFAULT_ENUMERATION_CAP: usize = 1 << 24;

/// Exact solution counts for an instance under a partition.
///
/// Keys of `m_b_given` are basis indices of the primary register (the
/// partial solutions `m_A`), values the number of full solutions extending
/// each of them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionCensus {
    pub d: usize,
    pub partition: Partition,
    pub m_a: usize,
    pub m_ab: usize,
    pub m_b_given: BTreeMap<usize, usize>,
    pub m_a_s: usize,
    pub m_a_ns: usize,
    /// Full solutions as basis indices `a + N_A * b`, ascending.
    pub solutions: Vec<usize>,
}

impl SolutionCensus {
    pub fn n_a_space(&self) -> usize {
        self.d.pow(self.partition.n_a as u32)
    }

    pub fn n_b_space(&self) -> usize {
        self.d.pow(self.partition.n_b as u32)
    }

    /// Partial solutions, ascending.
    pub fn partial_solutions(&self) -> Vec<usize> {
        self.m_b_given.keys().copied().collect()
    }

    /// Partial solutions with at least one extension.
    pub fn s_branches(&self) -> Vec<usize> {
        self.m_b_given
            .iter()
            .filter(|(_, &m)| m > 0)
            .map(|(&a, _)| a)
            .collect()
    }

    /// Partial solutions without any extension.
    pub fn ns_branches(&self) -> Vec<usize> {
        self.m_b_given
            .iter()
            .filter(|(_, &m)| m == 0)
            .map(|(&a, _)| a)
            .collect()
    }

    /// `min M_{B/m_A}` over branches that have solutions.
    pub fn min_extension(&self) -> Option<usize> {
        self.m_b_given.values().copied().filter(|&m| m > 0).min()
    }

    /// Whether every extendable partial solution extends uniquely.
    pub fn unique_extensions(&self) -> bool {
        self.m_a_s > 0 && self.m_b_given.values().all(|&m| m <= 1)
    }

    /// Secondary-register indices `b` with `(a, b)` a full solution.
    pub fn extensions_of(&self, a: usize) -> Vec<usize> {
        let n_a = self.n_a_space();
        self.solutions
            .iter()
            .filter(|&&x| x % n_a == a)
            .map(|&x| x / n_a)
            .collect()
    }
}

/// Exhaustive census with the default enumeration cap.
pub fn census(instance: &CspInstance, partition: Partition) -> Result<SolutionCensus> {
    census_with_cap(instance, partition, DEFAULT_ENUMERATION_CAP)
}

/// Exhaustive census over all `d^{n_ab}` assignments.
pub fn census_with_cap(instance: &CspInstance, partition: Partition, cap: usize) -> Result<SolutionCensus> {
    partition.check(instance)?;
    let d = instance.d();
    let total = instance
        .space_size(instance.n_ab())
        .filter(|&t| t <= cap)
        .ok_or_else(|| {
            Error::resource(format!(
                "census over {d}^{} assignments exceeds the enumeration cap {cap}",
                instance.n_ab()
            ))
        })?;
    let n_a_space = d.pow(partition.n_a as u32);
    let n_b_space = total / n_a_space;
    let secondary: Vec<&Constraint> = instance.constraints_between(partition.n_a, instance.n_ab());

    // Per partial solution: list of satisfying secondary indices.
    let branches: Vec<(usize, Vec<usize>)> = (0..n_a_space)
        .into_par_iter()
        .filter_map(|a| {
            let prefix = Assignment::from_index(a, d, partition.n_a);
            if !instance.prefix_ok(prefix.digits()) {
                return None;
            }
            let mut digits = prefix.0;
            digits.resize(instance.n_ab(), 0);
            let ext = (0..n_b_space)
                .filter(|&b| {
                    let mut rest = b;
                    for slot in digits[partition.n_a..].iter_mut() {
                        *slot = rest % d;
                        rest /= d;
                    }
                    secondary.iter().all(|c| !c.violated_by(&digits))
                })
                .collect();
            Some((a, ext))
        })
        .collect();

    let mut m_b_given = BTreeMap::new();
    let mut solutions = Vec::new();
    for (a, ext) in &branches {
        m_b_given.insert(*a, ext.len());
        solutions.extend(ext.iter().map(|b| a + n_a_space * b));
    }
    solutions.sort_unstable();
    let m_a = m_b_given.len();
    let m_a_s = m_b_given.values().filter(|&&m| m > 0).count();
    Ok(SolutionCensus {
        d,
        partition,
        m_a,
        m_ab: solutions.len(),
        m_b_given,
        m_a_s,
        m_a_ns: m_a - m_a_s,
        solutions,
    })
}

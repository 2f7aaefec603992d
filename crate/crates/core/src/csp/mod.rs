//! Constraint-satisfaction problems, their generators and the exhaustive
//! classical oracle that supplies every ground-truth solution count.
//!
//! Basis convention used across the crate: an assignment `x` of `n`
//! variables with domain size `d` maps to the index `sum_i x_i * d^i`, so
//! variable 0 is the least significant digit. The primary variables of a
//! [`Partition`] are the first `n_a` indices and therefore occupy the low
//! digits of a full index.

mod census;
mod dimacs;
mod generate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use census::{census, census_with_cap, SolutionCensus, DEFAULT_ENUMERATION_CAP};
pub use dimacs::{read_dimacs, write_dimacs};
pub use generate::generate_random_ksat;

/// A single constraint: the variables it involves and the local
/// assignments (one digit per variable, in `vars` order) that violate it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    pub vars: Vec<usize>,
    pub nogoods: Vec<Vec<usize>>,
}

impl Constraint {
    pub fn new(vars: Vec<usize>, nogoods: Vec<Vec<usize>>) -> Self {
        Self { vars, nogoods }
    }

    /// Largest variable index plus one; the constraint belongs to `C_A`
    /// for every prefix `A` at least this long.
    fn scope_end(&self) -> usize {
        self.vars.iter().map(|v| v + 1).max().unwrap_or(0)
    }

    fn violated_by(&self, digits: &[usize]) -> bool {
        self.nogoods
            .iter()
            .any(|ng| ng.iter().zip(&self.vars).all(|(&want, &var)| digits[var] == want))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    d: usize,
    n_ab: usize,
    k: usize,
    constraints: Vec<Constraint>,
    #[serde(default)]
    label: String,
}

/// A constraint-satisfaction problem over `n_ab` variables of domain `d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct CspInstance {
    d: usize,
    n_ab: usize,
    k: usize,
    constraints: Vec<Constraint>,
    label: String,
    #[serde(skip)]
    scope_ends: Vec<usize>,
}

impl TryFrom<RawInstance> for CspInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        CspInstance::with_arity(raw.d, raw.n_ab, raw.k, raw.constraints, raw.label)
    }
}

impl CspInstance {
    /// Builds an instance; `k` is taken as the largest constraint arity.
    pub fn new(
        d: usize,
        n_ab: usize,
        constraints: Vec<Constraint>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let k = constraints.iter().map(|c| c.vars.len()).max().unwrap_or(0);
        Self::with_arity(d, n_ab, k, constraints, label.into())
    }

    /// Builds an instance with an explicit arity bound `k`.
    pub fn with_arity(
        d: usize,
        n_ab: usize,
        k: usize,
        constraints: Vec<Constraint>,
        label: String,
    ) -> Result<Self> {
        if d < 2 {
            return Err(Error::input(format!("domain size d={d} must be at least 2")));
        }
        for (ci, c) in constraints.iter().enumerate() {
            if c.vars.len() > k {
                return Err(Error::input(format!(
                    "constraint {ci} has {} variables, more than k={k}",
                    c.vars.len()
                )));
            }
            let mut seen = c.vars.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != c.vars.len() {
                return Err(Error::input(format!("constraint {ci} repeats a variable")));
            }
            if let Some(&v) = c.vars.iter().find(|&&v| v >= n_ab) {
                return Err(Error::input(format!(
                    "constraint {ci} uses variable {v} outside [0, {n_ab})"
                )));
            }
            for ng in &c.nogoods {
                if ng.len() != c.vars.len() {
                    return Err(Error::input(format!(
                        "constraint {ci} has a nogood of length {} for {} variables",
                        ng.len(),
                        c.vars.len()
                    )));
                }
                if let Some(&digit) = ng.iter().find(|&&x| x >= d) {
                    return Err(Error::input(format!(
                        "constraint {ci} has nogood digit {digit} outside [0, {d})"
                    )));
                }
            }
        }
        let scope_ends = constraints.iter().map(Constraint::scope_end).collect();
        Ok(Self {
            d,
            n_ab,
            k,
            constraints,
            label,
            scope_ends,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_ab(&self) -> usize {
        self.n_ab
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    /// Number of nogood ground instances.
    pub fn xi(&self) -> usize {
        self.constraints.iter().map(|c| c.nogoods.len()).sum()
    }

    /// Returns a copy with one more constraint appended.
    pub fn with_constraint(&self, c: Constraint) -> Result<Self> {
        let mut constraints = self.constraints.clone();
        constraints.push(c);
        let k = self.k.max(constraints.last().map_or(0, |c| c.vars.len()));
        Self::with_arity(self.d, self.n_ab, k, constraints, self.label.clone())
    }

    /// `d^n`, or `None` on overflow.
    pub fn space_size(&self, n: usize) -> Option<usize> {
        u32::try_from(n).ok().and_then(|n| self.d.checked_pow(n))
    }

    /// Whether `digits` (an assignment of the first `digits.len()`
    /// variables) violates no constraint lying entirely within that prefix.
    pub(crate) fn prefix_ok(&self, digits: &[usize]) -> bool {
        let n = digits.len();
        self.constraints
            .iter()
            .zip(&self.scope_ends)
            .filter(|(_, &end)| end <= n)
            .all(|(c, _)| !c.violated_by(digits))
    }

    /// Constraints whose scope ends in `(lo, hi]`, i.e. those in `C_hi`
    /// but not in `C_lo`.
    pub(crate) fn constraints_between(&self, lo: usize, hi: usize) -> Vec<&Constraint> {
        self.constraints
            .iter()
            .zip(&self.scope_ends)
            .filter(|(_, &end)| end > lo && end <= hi)
            .map(|(c, _)| c)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// An assignment of a prefix of the variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    /// Decodes a basis index (variable 0 least significant).
    pub fn from_index(mut index: usize, d: usize, n: usize) -> Self {
        let mut digits = Vec::with_capacity(n);
        for _ in 0..n {
            digits.push(index % d);
            index /= d;
        }
        Assignment(digits)
    }

    pub fn to_index(&self, d: usize) -> usize {
        self.0.iter().rev().fold(0, |acc, &x| acc * d + x)
    }

    pub fn digits(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Split of the variables into primary (`[0, n_a)`) and secondary ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub n_a: usize,
    pub n_b: usize,
}

impl Partition {
    pub fn new(n_a: usize, n_b: usize) -> Result<Self> {
        if n_a == 0 || n_b == 0 {
            return Err(Error::input(format!(
                "partition needs n_a >= 1 and n_b >= 1, got ({n_a}, {n_b})"
            )));
        }
        Ok(Self { n_a, n_b })
    }

    /// Primary block of the first `n_a` variables of `instance`.
    pub fn for_instance(instance: &CspInstance, n_a: usize) -> Result<Self> {
        if n_a >= instance.n_ab() {
            return Err(Error::input(format!(
                "n_a={n_a} must be below n_ab={}",
                instance.n_ab()
            )));
        }
        Self::new(n_a, instance.n_ab() - n_a)
    }

    pub fn n_ab(&self) -> usize {
        self.n_a + self.n_b
    }

    pub(crate) fn check(&self, instance: &CspInstance) -> Result<()> {
        if self.n_ab() != instance.n_ab() {
            return Err(Error::input(format!(
                "partition covers {} variables, instance has {}",
                self.n_ab(),
                instance.n_ab()
            )));
        }
        Ok(())
    }
}

/// `f_A`: whether `x` satisfies every constraint whose variables all lie in
/// the first `subset_size` variables.
pub fn satisfies(instance: &CspInstance, subset_size: usize, x: &Assignment) -> Result<bool> {
    if subset_size > instance.n_ab() {
        return Err(Error::input(format!(
            "subset size {subset_size} exceeds n_ab={}",
            instance.n_ab()
        )));
    }
    if x.len() != subset_size {
        return Err(Error::input(format!(
            "assignment has {} digits, expected {subset_size}",
            x.len()
        )));
    }
    if let Some(&digit) = x.digits().iter().find(|&&v| v >= instance.d()) {
        return Err(Error::input(format!(
            "digit {digit} outside [0, {})",
            instance.d()
        )));
    }
    Ok(instance.prefix_ok(x.digits()))
}

/// Constrainedness `beta = xi / n_ab`.
pub fn beta_of(instance: &CspInstance) -> f64 {
    if instance.n_ab() == 0 {
        return 0.0;
    }
    instance.xi() as f64 / instance.n_ab() as f64
}

#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::Complex;
use nested_adiabatic::csp::{generate_random_ksat, Constraint, CspInstance, Partition};
use nested_adiabatic::hilbert::CMatrix;

/// Clause-by-clause CNF evaluation, written without the crate's nogood
/// machinery: a clause (as a nogood constraint) is violated exactly when
/// every variable takes its nogood digit.
pub fn cnf_satisfied(instance: &CspInstance, prefix: usize, digits: &[usize]) -> bool {
    instance.constraints().iter().all(|c| {
        if c.vars.iter().any(|&v| v >= prefix) {
            return true;
        }
        !c.nogoods
            .iter()
            .any(|ng| c.vars.iter().zip(ng).all(|(&v, &x)| digits[v] == x))
    })
}

/// Counts computed by depth-first backtracking with pruning, independent
/// of the crate's exhaustive enumeration.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub m_a: usize,
    pub m_ab: usize,
    pub m_b_given: BTreeMap<usize, usize>,
    pub m_a_s: usize,
}

pub fn backtrack_counts(instance: &CspInstance, n_a: usize) -> Counts {
    let n = instance.n_ab();
    let d = instance.d();
    // constraints indexed by the depth at which they become checkable
    let mut by_end: Vec<Vec<&Constraint>> = vec![Vec::new(); n + 1];
    for c in instance.constraints() {
        let end = c.vars.iter().map(|v| v + 1).max().unwrap_or(0);
        by_end[end].push(c);
    }
    let violated = |c: &Constraint, x: &[usize]| {
        c.nogoods
            .iter()
            .any(|ng| c.vars.iter().zip(ng).all(|(&v, &g)| x[v] == g))
    };
    let mut counts = Counts::default();
    let mut x = vec![0usize; n];

    fn extend(
        depth: usize,
        n: usize,
        d: usize,
        x: &mut Vec<usize>,
        by_end: &[Vec<&Constraint>],
        violated: &dyn Fn(&Constraint, &[usize]) -> bool,
    ) -> usize {
        if by_end[depth].iter().any(|c| violated(c, x)) {
            return 0;
        }
        if depth == n {
            return 1;
        }
        let mut total = 0;
        for v in 0..d {
            x[depth] = v;
            total += extend(depth + 1, n, d, x, by_end, violated);
        }
        total
    }

    fn prefixes(
        depth: usize,
        n_a: usize,
        d: usize,
        x: &mut Vec<usize>,
        by_end: &[Vec<&Constraint>],
        violated: &dyn Fn(&Constraint, &[usize]) -> bool,
        out: &mut Vec<Vec<usize>>,
    ) {
        if by_end[depth].iter().any(|c| violated(c, x)) {
            return;
        }
        if depth == n_a {
            out.push(x[..n_a].to_vec());
            return;
        }
        for v in 0..d {
            x[depth] = v;
            prefixes(depth + 1, n_a, d, x, by_end, violated, out);
        }
    }

    let mut partial = Vec::new();
    prefixes(0, n_a, d, &mut x, &by_end, &violated, &mut partial);
    for p in partial {
        x[..n_a].copy_from_slice(&p);
        // constraints ending exactly at n_a were already checked
        let ext = if n_a == n {
            1
        } else {
            let mut total = 0;
            for v in 0..d {
                x[n_a] = v;
                total += extend(n_a + 1, n, d, &mut x, &by_end, &violated);
            }
            total
        };
        let idx = p.iter().rev().fold(0, |acc, &g| acc * d + g);
        counts.m_a += 1;
        counts.m_ab += ext;
        if ext > 0 {
            counts.m_a_s += 1;
        }
        counts.m_b_given.insert(idx, ext);
    }
    counts
}

/// `seed`-th satisfiable random 3-SAT instance of the regression corpus
/// together with its partition.
pub fn corpus_instance(i: usize) -> (CspInstance, Partition) {
    let n = 6 + i % 7;
    let clauses = (4.26 * n as f64).round() as usize;
    let mut seed = 1000 * i as u64;
    loop {
        let inst = generate_random_ksat(n, clauses, 3, seed).unwrap();
        let digits_sat = (0..1usize << n).any(|x| {
            let digits: Vec<usize> = (0..n).map(|b| (x >> b) & 1).collect();
            cnf_satisfied(&inst, n, &digits)
        });
        if digits_sat {
            let p = Partition::new(n / 2, n - n / 2).unwrap();
            return (inst, p);
        }
        seed += 1;
    }
}

/// Pins variable `v` to `value` with a unary nogood.
pub fn pin(v: usize, value: usize) -> Constraint {
    Constraint::new(vec![v], vec![vec![1 - value]])
}

pub fn max_entry(m: &CMatrix<f64>) -> f64 {
    m.iter().map(|z: &Complex<f64>| z.norm()).fold(0.0, f64::max)
}

pub fn timed<T>(f: impl FnOnce() -> T) -> (T, std::time::Duration) {
    let t0 = std::time::Instant::now();
    let out = f();
    (out, t0.elapsed())
}

/// Binary instance with exactly the given partial solutions (indices on
/// the first `n_a` variables) and full solutions (indices on all
/// variables): one constraint on the primary register forbids every other
/// prefix, one constraint on all variables forbids every other assignment
/// that extends a partial solution.
pub fn designed(n_a: usize, n_b: usize, partials: &[usize], solutions: &[usize]) -> (CspInstance, Partition) {
    let n = n_a + n_b;
    let bits = |x: usize, width: usize| (0..width).map(|b| (x >> b) & 1).collect::<Vec<_>>();
    let mut cs = Vec::new();
    let bad_prefixes: Vec<Vec<usize>> = (0..1 << n_a)
        .filter(|p| !partials.contains(p))
        .map(|p| bits(p, n_a))
        .collect();
    if !bad_prefixes.is_empty() {
        cs.push(Constraint::new((0..n_a).collect(), bad_prefixes));
    }
    let bad_full: Vec<Vec<usize>> = (0..1usize << n)
        .filter(|x| partials.contains(&(x % (1 << n_a))) && !solutions.contains(x))
        .map(|x| bits(x, n))
        .collect();
    if !bad_full.is_empty() {
        cs.push(Constraint::new((0..n).collect(), bad_full));
    }
    let inst = CspInstance::new(2, n, cs, "designed").unwrap();
    (inst, Partition::new(n_a, n_b).unwrap())
}

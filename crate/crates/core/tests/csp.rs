mod common;

use common::{backtrack_counts, cnf_satisfied};
use nested_adiabatic::csp::{
    beta_of, census, census_with_cap, generate_random_ksat, read_dimacs, satisfies, write_dimacs, Assignment,
    Constraint, CspInstance, Partition,
};
use nested_adiabatic::Error;
use proptest::prelude::*;

const UF20: &str = include_str!("data/uf20-planted.cnf");

#[test]
fn satisfies_agrees_with_cnf_evaluator_everywhere() {
    for seed in 0..5 {
        let inst = generate_random_ksat(10, 42, 3, seed).unwrap();
        for x in 0..1usize << 10 {
            let a = Assignment::from_index(x, 2, 10);
            assert_eq!(
                satisfies(&inst, 10, &a).unwrap(),
                cnf_satisfied(&inst, 10, a.digits()),
                "seed {seed} x {x}"
            );
        }
    }
}

#[test]
fn satisfies_checks_prefix_only() {
    let inst = CspInstance::new(2, 3, vec![Constraint::new(vec![0, 1], vec![vec![1, 1]])], "t").unwrap();
    assert!(!satisfies(&inst, 3, &Assignment(vec![1, 1, 0])).unwrap());
    // the constraint lies outside a one-variable prefix
    assert!(satisfies(&inst, 1, &Assignment(vec![1])).unwrap());
    assert!(matches!(
        satisfies(&inst, 2, &Assignment(vec![1])),
        Err(Error::Input(_))
    ));
}

#[test]
fn census_matches_backtracking_on_random_instances() {
    for i in 0..200u64 {
        let n = 4 + (i as usize % 13);
        let clauses = ((3.0 + (i % 5) as f64 * 0.5) * n as f64).round() as usize;
        let inst = generate_random_ksat(n, clauses, 3, 17 + i).unwrap();
        let n_a = 1 + (i as usize % (n - 1));
        let c = census(&inst, Partition::new(n_a, n - n_a).unwrap()).unwrap();
        let b = backtrack_counts(&inst, n_a);
        assert_eq!((c.m_a, c.m_ab, c.m_a_s), (b.m_a, b.m_ab, b.m_a_s), "instance {i}");
        assert_eq!(c.m_b_given, b.m_b_given, "instance {i}");
        assert_eq!(c.m_a_s + c.m_a_ns, c.m_a);
        assert_eq!(c.m_b_given.values().sum::<usize>(), c.m_ab);
        assert_eq!(c.solutions.len(), c.m_ab);
    }
}

#[test]
fn seven_seed_instance_matches_backtracking() {
    let inst = generate_random_ksat(10, 42, 3, 7).unwrap();
    for n_a in 1..10 {
        let c = census(&inst, Partition::new(n_a, 10 - n_a).unwrap()).unwrap();
        let b = backtrack_counts(&inst, n_a);
        assert_eq!(c.m_b_given, b.m_b_given);
    }
}

#[test]
fn planted_benchmark_matches_brute_force() {
    let inst = read_dimacs(UF20.as_bytes()).unwrap();
    assert_eq!((inst.n_ab(), inst.constraints().len()), (20, 91));
    let brute = (0..1usize << 20)
        .filter(|&x| {
            let digits: Vec<usize> = (0..20).map(|b| (x >> b) & 1).collect();
            cnf_satisfied(&inst, 20, &digits)
        })
        .count();
    let c = census(&inst, Partition::new(10, 10).unwrap()).unwrap();
    assert!(brute >= 1);
    assert_eq!(c.m_ab, brute);
    // the planted model from the header comment is among the solutions
    let planted: Vec<usize> = UF20
        .lines()
        .find_map(|l| l.strip_prefix("c planted model:"))
        .unwrap()
        .split_whitespace()
        .map(|t| usize::from(!t.starts_with('-')))
        .collect();
    let idx = Assignment(planted).to_index(2);
    assert!(c.solutions.binary_search(&idx).is_ok());
}

#[test]
fn census_of_free_instance() {
    let inst = CspInstance::new(2, 4, vec![], "free").unwrap();
    let c = census(&inst, Partition::new(2, 2).unwrap()).unwrap();
    assert_eq!((c.m_a, c.m_ab, c.m_a_s, c.m_a_ns), (4, 16, 4, 0));
    assert!(c.m_b_given.values().all(|&m| m == 4));
}

#[test]
fn census_of_pinned_instance() {
    let cs = (0..4).map(|v| common::pin(v, v % 2)).collect();
    let inst = CspInstance::new(2, 4, cs, "pinned").unwrap();
    let c = census(&inst, Partition::new(2, 2).unwrap()).unwrap();
    assert_eq!((c.m_ab, c.m_a_s, c.m_a), (1, 1, 1));
    assert_eq!(c.solutions, vec![0b1010]);
}

#[test]
fn census_refuses_beyond_cap() {
    let inst = generate_random_ksat(12, 10, 3, 1).unwrap();
    let err = census_with_cap(&inst, Partition::new(6, 6).unwrap(), 1 << 10);
    assert!(matches!(err, Err(Error::Resource(_))));
}

#[test]
fn generator_examples() {
    let empty = generate_random_ksat(3, 0, 3, 0).unwrap();
    assert_eq!((empty.xi(), beta_of(&empty)), (0, 0.0));
    let a = generate_random_ksat(10, 42, 3, 7).unwrap();
    let b = generate_random_ksat(10, 42, 3, 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.xi(), 42);
    assert!((beta_of(&a) - 4.2).abs() < 1e-15);
    assert!(matches!(generate_random_ksat(2, 1, 3, 0), Err(Error::Input(_))));
    for c in a.constraints() {
        let mut v = c.vars.clone();
        v.sort_unstable();
        v.dedup();
        assert_eq!(v.len(), 3);
        assert_eq!(c.nogoods.len(), 1);
    }
}

#[test]
fn beta_counts_every_nogood() {
    let cs = vec![
        Constraint::new(vec![0, 1], vec![vec![0, 0], vec![0, 1], vec![1, 1]]),
        Constraint::new(vec![2, 3, 4], vec![vec![1, 0, 1]]),
    ];
    let inst = CspInstance::new(2, 8, cs, "mixed").unwrap();
    assert_eq!(beta_of(&inst), 0.5);
    assert_eq!(beta_of(&CspInstance::new(2, 5, vec![], "").unwrap()), 0.0);
}

#[test]
fn dimacs_examples() {
    let inst = read_dimacs("p cnf 2 1\n1 -2 0".as_bytes()).unwrap();
    assert_eq!(
        inst.constraints(),
        &[Constraint::new(vec![0, 1], vec![vec![0, 1]])]
    );
    // a one-variable register cannot be partitioned, so count directly
    let empty = read_dimacs("p cnf 1 0\n".as_bytes()).unwrap();
    assert!(empty.constraints().is_empty());
    assert_eq!(
        (0..2)
            .filter(|&x| satisfies(&empty, 1, &Assignment(vec![x])).unwrap())
            .count(),
        2
    );

    for (text, line) in [
        ("p cnf x 1\n1 0\n", 1),
        ("c ok\np cnf 2 1\n1 3 0\n", 3),
        ("p cnf 2 1\n1 -2\n", 2),
        ("p cnf 2 1\n1 y 0\n", 2),
    ] {
        match read_dimacs(text.as_bytes()) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("{text:?} gave {other:?}"),
        }
    }
}

#[test]
fn dimacs_round_trip() {
    let inst = generate_random_ksat(9, 30, 3, 4).unwrap();
    let text = write_dimacs(&inst).unwrap();
    let back = read_dimacs(text.as_bytes()).unwrap();
    assert_eq!(back.constraints(), inst.constraints());
    assert_eq!(back.n_ab(), inst.n_ab());
}

#[test]
fn json_round_trip() {
    let inst = generate_random_ksat(8, 20, 3, 9).unwrap();
    let back = CspInstance::from_json(&inst.to_json().unwrap()).unwrap();
    assert_eq!(back, inst);
    assert!(CspInstance::from_json(
        r#"{"d":2,"n_ab":2,"k":1,"constraints":[{"vars":[5],"nogoods":[[0]]}],"label":""}"#
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn census_invariants(n in 3usize..10, density in 0.0f64..6.0, seed in any::<u64>(), cut in 0usize..100) {
        let clauses = (density * n as f64) as usize;
        let inst = generate_random_ksat(n, clauses, 3, seed).unwrap();
        let n_a = 1 + cut % (n - 1);
        let c = census(&inst, Partition::new(n_a, n - n_a).unwrap()).unwrap();
        prop_assert_eq!(c.m_a_s + c.m_a_ns, c.m_a);
        prop_assert_eq!(c.m_b_given.values().sum::<usize>(), c.m_ab);
        prop_assert_eq!(c.m_a_s, c.m_b_given.values().filter(|&&m| m >= 1).count());
    }

    #[test]
    fn adding_constraints_never_helps(n in 3usize..9, seed in any::<u64>(), x in any::<usize>()) {
        let inst = generate_random_ksat(n, n, 3, seed).unwrap();
        let more = generate_random_ksat(n, 2 * n, 3, seed ^ 0x55).unwrap();
        let extra = more.constraints()[0].clone();
        let tighter = inst.with_constraint(extra).unwrap();
        let a = Assignment::from_index(x % (1 << n), 2, n);
        if satisfies(&tighter, n, &a).unwrap() {
            prop_assert!(satisfies(&inst, n, &a).unwrap());
        }
    }
}

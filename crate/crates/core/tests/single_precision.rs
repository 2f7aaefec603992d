mod common;

use nested_adiabatic::csp::{CspInstance, Partition};
use nested_adiabatic::evolve::{evolve_discretized, evolve_reference};
use nested_adiabatic::hilbert::{gap_profile, uniform_grid};
use nested_adiabatic::nested::{run_nested, NestedConfig};
use nested_adiabatic::schedule::{grover_schedule, local_schedule};
use nested_adiabatic::{Hamiltonian32, NestedRunReport32, Schedule32, StateVector32};

#[test]
fn grover_search_in_single_precision() {
    let hi = Hamiltonian32::rank_one_uniform(64);
    let hf = Hamiltonian32::diagonal_marked(64, [17]).unwrap();
    let s: Schedule32 = grover_schedule(64, 1, 0.1f32).unwrap();
    let v0 = StateVector32::uniform_dim(64);
    let r = (2.0 * s.total_time).ceil() as usize;
    let d = evolve_discretized(&hi, &hf, &s, r, &v0).unwrap();
    assert!(d.fidelity_to_ground >= 0.9, "{}", d.fidelity_to_ground);
    assert!(d.norm_error < 1e-4);
    let c = evolve_reference(&hi, &hf, &s, 16 * r, &v0).unwrap();
    assert!(c.fidelity_to_ground >= 0.98, "{}", c.fidelity_to_ground);

    let s64 = grover_schedule(64, 1, 0.1f64).unwrap();
    assert!(((s.total_time as f64) / s64.total_time - 1.0).abs() < 1e-4);
}

#[test]
fn eigensolved_schedule_in_single_precision() {
    let hi = Hamiltonian32::rank_one_uniform(16);
    let hf = Hamiltonian32::diagonal_marked(16, [3]).unwrap();
    let prof = gap_profile(&hi, &hf, &uniform_grid(129)).unwrap();
    let min = prof.g.iter().cloned().fold(f32::INFINITY, f32::min);
    assert!((min - 0.25).abs() < 1e-4);
    assert!(local_schedule(&prof, 0.1).unwrap().total_time > 0.0);
}

#[test]
fn nested_run_in_single_precision() {
    let cs = (0..6).map(|v| common::pin(v, v % 2)).collect();
    let inst = CspInstance::new(2, 6, cs, "pinned").unwrap();
    let rep: NestedRunReport32 =
        run_nested(&inst, Partition::new(3, 3).unwrap(), &NestedConfig::default()).unwrap();
    let rep64 = run_nested::<f64>(&inst, Partition::new(3, 3).unwrap(), &NestedConfig::default()).unwrap();
    assert_eq!(rep.argmax(), rep64.argmax());
    assert!(((rep.final_solution_mass as f64) - rep64.final_solution_mass).abs() < 1e-3);
}

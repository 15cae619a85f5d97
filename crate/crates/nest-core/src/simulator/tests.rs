use std::collections::BTreeMap;

use approx::assert_relative_eq;
use num_complex::Complex64;

use crate::circuits::{
    efficient_su2, parse_hamiltonian, route, Angle, Gate, GateOp, ParamCircuit,
};
use crate::device::{DeviceSnapshot, EdgeProps, QubitProps};
use crate::mapping::CircuitMap;
use crate::simulator::*;

fn device(
    n: usize,
    edges: &[(usize, usize)],
    sq_error: f64,
    tq_error: f64,
    readout: f64,
    t_us: f64,
) -> DeviceSnapshot {
    let qubits = vec![
        QubitProps {
            t1_us: t_us,
            t2_us: t_us,
            readout_error: readout,
            sq_error,
            sq_duration_us: 0.03,
        };
        n
    ];
    let edge_props: BTreeMap<_, _> = edges
        .iter()
        .map(|&(u, v)| {
            (
                (u.min(v), u.max(v)),
                EdgeProps {
                    tq_error,
                    tq_duration_us: 0.3,
                },
            )
        })
        .collect();
    DeviceSnapshot::new("test", n, "2026-01-01", edges.to_vec(), qubits, edge_props).unwrap()
}

fn perfect_device(n: usize, edges: &[(usize, usize)]) -> DeviceSnapshot {
    device(n, edges, 0.0, 0.0, 0.0, 1e12)
}

fn routed_on(circuit: &ParamCircuit, snapshot: &DeviceSnapshot) -> crate::circuits::RoutedCircuit {
    let map = CircuitMap::new((0..circuit.num_qubits).collect(), snapshot).unwrap();
    route(circuit, &map, snapshot).unwrap()
}

fn rx(q: usize, theta: f64) -> Gate {
    Gate {
        op: GateOp::Rx,
        qubits: vec![q],
        angle: Some(Angle::Fixed(theta)),
    }
}

fn h_gate(q: usize) -> Gate {
    Gate {
        op: GateOp::H,
        qubits: vec![q],
        angle: None,
    }
}

fn cx(a: usize, b: usize) -> Gate {
    Gate {
        op: GateOp::Cx,
        qubits: vec![a, b],
        angle: None,
    }
}

#[test]
fn empty_circuit_is_ground_state() {
    let snap = perfect_device(1, &[]);
    let c = ParamCircuit::new(1, vec![], 0).unwrap();
    let amps = simulate_ideal(&routed_on(&c, &snap), &[]).unwrap();
    assert_relative_eq!(amps[0].re, 1.0);
    assert_relative_eq!(amps[1].norm(), 0.0);
}

#[test]
fn hadamard_gives_uniform_superposition() {
    let snap = perfect_device(1, &[]);
    let c = ParamCircuit::new(1, vec![h_gate(0)], 0).unwrap();
    let amps = simulate_ideal(&routed_on(&c, &snap), &[]).unwrap();
    let f = std::f64::consts::FRAC_1_SQRT_2;
    assert_relative_eq!(amps[0].re, f, epsilon = 1e-12);
    assert_relative_eq!(amps[1].re, f, epsilon = 1e-12);
}

#[test]
fn bell_state_amplitudes() {
    let snap = perfect_device(2, &[(0, 1)]);
    let c = ParamCircuit::new(2, vec![h_gate(0), cx(0, 1)], 0).unwrap();
    let amps = simulate_ideal(&routed_on(&c, &snap), &[]).unwrap();
    let f = std::f64::consts::FRAC_1_SQRT_2;
    assert_relative_eq!(amps[0].re, f, epsilon = 1e-12);
    assert_relative_eq!(amps[3].re, f, epsilon = 1e-12);
    assert!(amps[1].norm() < 1e-12 && amps[2].norm() < 1e-12);
}

#[test]
fn z_on_ground_state_is_exactly_one() {
    let snap = perfect_device(1, &[]);
    let c = ParamCircuit::new(1, vec![], 0).unwrap();
    let h = parse_hamiltonian("1.0 Z\n", "t").unwrap();
    let est = expectation(&routed_on(&c, &snap), &[], &h, 64, 9, None).unwrap();
    assert_eq!(est.value, 1.0);
    assert_eq!(est.std_error, 0.0);
}

#[test]
fn fully_random_readout_kills_the_signal() {
    let snap = device(1, &[], 0.0, 0.0, 0.5, 1e12);
    let c = ParamCircuit::new(1, vec![rx(0, std::f64::consts::PI)], 0).unwrap();
    let routed = routed_on(&c, &snap);
    let map = CircuitMap::new(vec![0], &snap).unwrap();
    let noise = NoiseBinding::from_snapshot(&map, &snap).unwrap();
    let h = parse_hamiltonian("1.0 Z\n", "t").unwrap();
    let est = expectation(&routed, &[], &h, 200_000, 5, Some(&noise)).unwrap();
    assert!(est.value.abs() < 0.01, "value = {}", est.value);
}

#[test]
fn bell_parity_is_deterministically_even() {
    let snap = perfect_device(2, &[(0, 1)]);
    let c = ParamCircuit::new(2, vec![h_gate(0), cx(0, 1)], 0).unwrap();
    let h = parse_hamiltonian("1.0 ZZ\n", "t").unwrap();
    let est = expectation(&routed_on(&c, &snap), &[], &h, 4096, 13, None).unwrap();
    assert_eq!(est.value, 1.0);
}

#[test]
fn estimates_are_seed_deterministic() {
    let snap = device(2, &[(0, 1)], 5e-3, 2e-2, 1e-2, 200.0);
    let c = efficient_su2(2, 1).unwrap();
    let routed = routed_on(&c, &snap);
    let map = CircuitMap::new(vec![0, 1], &snap).unwrap();
    let noise = NoiseBinding::from_snapshot(&map, &snap).unwrap();
    let h = parse_hamiltonian("0.5 ZZ\n0.25 XI\n-0.4 IY\n", "t").unwrap();
    let params: Vec<f64> = (0..c.num_params).map(|i| 0.3 * i as f64).collect();
    let a = expectation(&routed, &params, &h, 2000, 77, Some(&noise)).unwrap();
    let b = expectation(&routed, &params, &h, 2000, 77, Some(&noise)).unwrap();
    assert_eq!(a, b);
    let c2 = expectation(&routed, &params, &h, 2000, 78, Some(&noise)).unwrap();
    assert_ne!(a.value, c2.value);
}

#[test]
fn zero_noise_oracle_matches_ideal_expectation() {
    let snap = perfect_device(2, &[(0, 1)]);
    let c = efficient_su2(2, 1).unwrap();
    let routed = routed_on(&c, &snap);
    let map = CircuitMap::new(vec![0, 1], &snap).unwrap();
    let noise = NoiseBinding::from_snapshot(&map, &snap).unwrap();
    let h = parse_hamiltonian("0.7 ZZ\n0.2 XX\n-0.3 YI\n", "t").unwrap();
    let params: Vec<f64> = (0..c.num_params).map(|i| 0.1 + 0.4 * i as f64).collect();
    let exact = exact_noisy_expectation(&routed, &params, &h, &noise).unwrap();
    // independent route: <psi|H|psi> from the ideal statevector, with
    // each Pauli applied matrix-free (bit flips + phases)
    let amps = simulate_ideal(&routed, &params).unwrap();
    // undo the routing permutation: logical l sits on dense final_layout[l]
    let layout = routed.final_layout.clone();
    let mut reference = 0.0;
    for term in h.terms.iter() {
        let mut acc = Complex64::ZERO;
        for (b, amp) in amps.iter().enumerate() {
            let mut phase = Complex64::ONE;
            let mut target = b;
            for (l, &p) in term.ops.iter().enumerate() {
                let bit = 1usize << layout[l];
                let set = b & bit != 0;
                match p {
                    crate::circuits::PauliOp::I => {}
                    crate::circuits::PauliOp::Z => {
                        if set {
                            phase = -phase;
                        }
                    }
                    crate::circuits::PauliOp::X => target ^= bit,
                    crate::circuits::PauliOp::Y => {
                        phase *= if set { -Complex64::I } else { Complex64::I };
                        target ^= bit;
                    }
                }
            }
            acc += amps[target].conj() * phase * amp;
        }
        reference += term.coeff * acc.re;
    }
    assert_relative_eq!(exact, reference, epsilon = 1e-9);
}

#[test]
fn three_quarters_depolarizing_fully_mixes() {
    let snap = device(1, &[], 0.75, 0.0, 0.0, 1e12);
    let c = ParamCircuit::new(1, vec![rx(0, 0.7)], 0).unwrap();
    let routed = routed_on(&c, &snap);
    let map = CircuitMap::new(vec![0], &snap).unwrap();
    let noise = NoiseBinding::from_snapshot(&map, &snap).unwrap();
    let h = parse_hamiltonian("1.0 Z\n", "t").unwrap();
    let exact = exact_noisy_expectation(&routed, &[], &h, &noise).unwrap();
    assert_relative_eq!(exact, 0.0, epsilon = 1e-12);
}

#[test]
fn trajectories_agree_with_density_oracle() {
    // three fixed 2-qubit instances with all channels active
    for seed in [1u64, 2, 3] {
        let snap = device(2, &[(0, 1)], 8e-3, 4e-2, 3e-2, 60.0);
        let c = efficient_su2(2, 1).unwrap();
        let routed = routed_on(&c, &snap);
        let map = CircuitMap::new(vec![0, 1], &snap).unwrap();
        let noise = NoiseBinding::from_snapshot(&map, &snap).unwrap();
        let h = parse_hamiltonian("0.6 ZZ\n0.3 XY\n0.2 IZ\n", "t").unwrap();
        let params: Vec<f64> = (0..c.num_params)
            .map(|i| (seed as f64) * 0.37 + 0.21 * i as f64)
            .collect();
        let exact = exact_noisy_expectation(&routed, &params, &h, &noise).unwrap();
        let est = expectation(&routed, &params, &h, 40_000, seed, Some(&noise)).unwrap();
        assert!(
            (est.value - exact).abs() <= 5.0 * est.std_error,
            "seed {seed}: sampled {} vs exact {exact} (se {})",
            est.value,
            est.std_error
        );
    }
}

#[test]
fn expectation_is_additive_over_shared_term_streams() {
    let snap = device(2, &[(0, 1)], 5e-3, 2e-2, 1e-2, 150.0);
    let c = efficient_su2(2, 1).unwrap();
    let routed = routed_on(&c, &snap);
    let map = CircuitMap::new(vec![0, 1], &snap).unwrap();
    let noise = NoiseBinding::from_snapshot(&map, &snap).unwrap();
    let params: Vec<f64> = (0..c.num_params).map(|i| 0.2 * i as f64 - 0.5).collect();
    let h1 = parse_hamiltonian("0.7 ZZ\n0.3 XI\n", "t").unwrap();
    let h2 = parse_hamiltonian("-0.2 ZZ\n0.5 IY\n", "t").unwrap();
    let combined = parse_hamiltonian("0.5 ZZ\n0.3 XI\n0.5 IY\n", "t").unwrap();
    let (a, b, both) = (
        expectation(&routed, &params, &h1, 3000, 11, Some(&noise)).unwrap(),
        expectation(&routed, &params, &h2, 3000, 11, Some(&noise)).unwrap(),
        expectation(&routed, &params, &combined, 3000, 11, Some(&noise)).unwrap(),
    );
    assert_relative_eq!(both.value, a.value + b.value, epsilon = 1e-12);
}

#[test]
fn normalization_survives_a_thousand_gates() {
    let snap = perfect_device(3, &[(0, 1), (1, 2)]);
    let mut gates = Vec::new();
    for i in 0..1000 {
        match i % 4 {
            0 => gates.push(rx(i % 3, 0.1 + i as f64 * 1e-3)),
            1 => gates.push(h_gate((i + 1) % 3)),
            2 => gates.push(cx(i % 2, i % 2 + 1)),
            _ => gates.push(Gate {
                op: GateOp::Ry,
                qubits: vec![i % 3],
                angle: Some(Angle::Fixed(-0.3)),
            }),
        }
    }
    let c = ParamCircuit::new(3, gates, 0).unwrap();
    let amps = simulate_ideal(&routed_on(&c, &snap), &[]).unwrap();
    let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    assert!((total - 1.0).abs() <= 1e-10, "norm drift {total}");
}

#[test]
fn sampled_bitstrings_relabel_through_the_final_layout() {
    // route a CX(0, 2) on a 3-qubit path: logical 0 ends on physical 1
    let snap = perfect_device(3, &[(0, 1), (1, 2)]);
    let map = CircuitMap::new(vec![0, 1, 2], &snap).unwrap();
    let c = ParamCircuit::new(
        3,
        vec![rx(0, std::f64::consts::PI), cx(0, 2)],
        0,
    )
    .unwrap();
    let routed = route(&c, &map, &snap).unwrap();
    assert_eq!(routed.inserted_swap_count, 1);
    let samples = sample_bitstrings(&routed, &[], 32, 4, None).unwrap();
    // X on logical 0 then CX(0, 2): logical state |101>
    for s in samples {
        assert_eq!(s, 0b101, "logical sample should be |101>");
    }
}

#[test]
fn param_length_is_checked() {
    let snap = perfect_device(2, &[(0, 1)]);
    let c = efficient_su2(2, 0).unwrap();
    let routed = routed_on(&c, &snap);
    assert!(matches!(
        simulate_ideal(&routed, &[0.0]),
        Err(crate::Error::ParamLengthMismatch { .. })
    ));
}

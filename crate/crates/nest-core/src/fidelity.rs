//! Map-conditioned fidelity estimates: ESP and the device-uniform
//! execution-fidelity estimator used by the two-device baseline.

use serde::{Deserialize, Serialize};

use crate::circuits::{asap_layers, GateOp, RoutedCircuit};
use crate::device::DeviceSnapshot;
use crate::error::{Error, Result};
use crate::mapping::CircuitMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    OneQubit,
    TwoQubit,
    Measure,
}

#[derive(Debug, Clone)]
pub struct GateInstance {
    pub kind: GateKind,
    pub physical_qubits: Vec<usize>,
    pub success_prob: f64,
    pub duration_us: f64,
}

/// Per-map circuit statistics feeding both fidelity formulas.
#[derive(Debug, Clone)]
pub struct CircuitProfile {
    pub gate_instances: Vec<GateInstance>,
    /// ASAP layer count; measurements are excluded from depth.
    pub depth: usize,
    /// Mean duration over all gate instances, in microseconds.
    pub avg_gate_time_us: f64,
    pub g1: usize,
    pub g2: usize,
    pub measurements: usize,
    /// Mean 1q / 2q gate durations.
    pub mu1_us: f64,
    pub mu2_us: f64,
    /// Arithmetic means of T1/T2 over the mapped physical qubits.
    pub t1_mean_us: f64,
    pub t2_mean_us: f64,
}

/// Builds the profile of a routed circuit on its map: per-gate success
/// probabilities from the snapshot, ASAP depth, and mapped-qubit mean
/// coherence times.
pub fn profile_circuit(
    routed: &RoutedCircuit,
    map: &CircuitMap,
    snapshot: &DeviceSnapshot,
) -> Result<CircuitProfile> {
    let mut instances = Vec::with_capacity(routed.gates.len());
    let (mut g1, mut g2, mut m) = (0usize, 0usize, 0usize);
    let (mut d1_sum, mut d2_sum) = (0.0f64, 0.0f64);
    for gate in &routed.gates {
        for &q in &gate.qubits {
            if !map.contains(q) {
                return Err(Error::UnmappedQubit(q));
            }
        }
        let instance = match gate.op {
            GateOp::Measure => {
                m += 1;
                let q = gate.qubits[0];
                GateInstance {
                    kind: GateKind::Measure,
                    physical_qubits: gate.qubits.clone(),
                    success_prob: 1.0 - snapshot.qubit(q)?.readout_error,
                    duration_us: 0.0,
                }
            }
            GateOp::Cx | GateOp::Swap => {
                let (u, v) = (gate.qubits[0], gate.qubits[1]);
                let props = snapshot
                    .edge_props(u, v)
                    .ok_or(Error::MissingEdgeProps(u, v))?;
                g2 += 1;
                d2_sum += props.tq_duration_us;
                GateInstance {
                    kind: GateKind::TwoQubit,
                    physical_qubits: gate.qubits.clone(),
                    success_prob: 1.0 - props.tq_error,
                    duration_us: props.tq_duration_us,
                }
            }
            _ => {
                let q = gate.qubits[0];
                let props = snapshot.qubit(q)?;
                g1 += 1;
                d1_sum += props.sq_duration_us;
                GateInstance {
                    kind: GateKind::OneQubit,
                    physical_qubits: gate.qubits.clone(),
                    success_prob: 1.0 - props.sq_error,
                    duration_us: props.sq_duration_us,
                }
            }
        };
        instances.push(instance);
    }
    let (_, depth) = asap_layers(&routed.gates);
    let avg_gate_time_us = if instances.is_empty() {
        0.0
    } else {
        instances.iter().map(|i| i.duration_us).sum::<f64>() / instances.len() as f64
    };
    let (mut t1_sum, mut t2_sum) = (0.0f64, 0.0f64);
    for &p in map.sorted_physical() {
        let props = snapshot.qubit(p)?;
        t1_sum += props.t1_us;
        t2_sum += props.t2_us;
    }
    let nq = map.len() as f64;
    Ok(CircuitProfile {
        gate_instances: instances,
        depth,
        avg_gate_time_us,
        g1,
        g2,
        measurements: m,
        mu1_us: if g1 == 0 { 0.0 } else { d1_sum / g1 as f64 },
        mu2_us: if g2 == 0 { 0.0 } else { d2_sum / g2 as f64 },
        t1_mean_us: t1_sum / nq,
        t2_mean_us: t2_sum / nq,
    })
}

/// Estimated success probability, in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EspValue(f64);

impl EspValue {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0 && value <= 1.0) {
            return Err(Error::Domain(format!("ESP {value} not in (0, 1]")));
        }
        Ok(EspValue(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// ESP: product of per-gate success probabilities attenuated by
/// exp(-d t_g / T1) exp(-d t_g / T2) with the profile's mapped-qubit
/// mean coherence times.
pub fn esp(profile: &CircuitProfile) -> Result<EspValue> {
    if profile.t1_mean_us <= 0.0 || profile.t2_mean_us <= 0.0 {
        return Err(Error::Domain(
            "coherence times must be positive".to_string(),
        ));
    }
    let product: f64 = profile
        .gate_instances
        .iter()
        .map(|g| g.success_prob)
        .product();
    let exponent = profile.depth as f64 * profile.avg_gate_time_us;
    let value =
        product * (-exponent / profile.t1_mean_us).exp() * (-exponent / profile.t2_mean_us).exp();
    EspValue::new(value)
}

/// Device-uniform error rates for the execution-fidelity estimator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QoncordParams {
    /// Scale constant of the exponential term.
    pub scale_c: f64,
    /// Uniform single-qubit error (gamma).
    pub sq_error: f64,
    /// Uniform two-qubit error (beta).
    pub tq_error: f64,
    /// Uniform readout error (omega).
    pub readout_error: f64,
}

impl QoncordParams {
    /// Means over the snapshot, modeling every qubit as identical.
    pub fn device_uniform(snapshot: &DeviceSnapshot, scale_c: f64) -> Self {
        QoncordParams {
            scale_c,
            sq_error: snapshot.mean_sq_error(),
            tq_error: snapshot.mean_tq_error(),
            readout_error: snapshot.mean_readout_error(),
        }
    }
}

/// P_correct = exp(-(C D (mu1 G1 + mu2 G2) / 2) / (T1 T2))
///             (1-gamma)^G1 (1-beta)^G2 (1-omega)^M
pub fn qoncord_fidelity(profile: &CircuitProfile, params: &QoncordParams) -> Result<f64> {
    for (name, p) in [
        ("gamma", params.sq_error),
        ("beta", params.tq_error),
        ("omega", params.readout_error),
    ] {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Domain(format!("{name} = {p} not in [0, 1)")));
        }
    }
    if profile.t1_mean_us <= 0.0 || profile.t2_mean_us <= 0.0 {
        return Err(Error::Domain(
            "coherence times must be positive".to_string(),
        ));
    }
    let work = profile.mu1_us * profile.g1 as f64 + profile.mu2_us * profile.g2 as f64;
    let exponent =
        params.scale_c * profile.depth as f64 * work / 2.0 / (profile.t1_mean_us * profile.t2_mean_us);
    let value = (-exponent).exp()
        * (1.0 - params.sq_error).powi(profile.g1 as i32)
        * (1.0 - params.tq_error).powi(profile.g2 as i32)
        * (1.0 - params.readout_error).powi(profile.measurements as i32);
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{route, Gate, GateOp, ParamCircuit};
    use crate::device::{data_dir, load_snapshot};
    use crate::mapping::CircuitMap;
    use approx::assert_relative_eq;

    fn line5() -> DeviceSnapshot {
        load_snapshot(data_dir().join("devices/line5.json")).unwrap()
    }

    fn profile_on_line5(gates: Vec<Gate>, n: usize, phys: Vec<usize>) -> CircuitProfile {
        let snap = line5();
        let map = CircuitMap::new(phys, &snap).unwrap();
        let circuit = ParamCircuit::new(n, gates, 0).unwrap();
        let routed = route(&circuit, &map, &snap).unwrap();
        profile_circuit(&routed, &map, &snap).unwrap()
    }

    #[test]
    fn profile_of_single_cx_on_good_edge() {
        let p = profile_on_line5(
            vec![Gate {
                op: GateOp::Cx,
                qubits: vec![0, 1],
                angle: None,
            }],
            2,
            vec![1, 2],
        );
        assert_eq!(p.g2, 1);
        assert_eq!(p.depth, 1);
        assert_eq!(p.gate_instances.len(), 1);
        assert_relative_eq!(p.gate_instances[0].success_prob, 0.99);
    }

    #[test]
    fn empty_circuit_profile() {
        let p = profile_on_line5(vec![], 2, vec![1, 2]);
        assert_eq!((p.g1, p.g2, p.measurements), (0, 0, 0));
        assert_eq!(p.depth, 0);
        assert_eq!(esp(&p).unwrap().value(), 1.0);
    }

    #[test]
    fn non_adjacent_gate_without_routing_is_an_error() {
        let snap = line5();
        let map = CircuitMap::new(vec![0, 1, 2], &snap).unwrap();
        // hand-build a routed circuit with an illegal 2q gate
        let bad = RoutedCircuit {
            num_qubits: 3,
            num_params: 0,
            gates: vec![Gate {
                op: GateOp::Cx,
                qubits: vec![0, 2],
                angle: None,
            }],
            source_map: map.clone(),
            inserted_swap_count: 0,
            final_layout: vec![0, 1, 2],
        };
        assert!(matches!(
            profile_circuit(&bad, &map, &snap),
            Err(Error::MissingEdgeProps(0, 2))
        ));
    }

    #[test]
    fn esp_closed_form_single_gate() {
        let p = CircuitProfile {
            gate_instances: vec![GateInstance {
                kind: GateKind::OneQubit,
                physical_qubits: vec![0],
                success_prob: 0.99,
                duration_us: 0.1,
            }],
            depth: 1,
            avg_gate_time_us: 0.1,
            g1: 1,
            g2: 0,
            measurements: 0,
            mu1_us: 0.1,
            mu2_us: 0.0,
            t1_mean_us: 100.0,
            t2_mean_us: 100.0,
        };
        let expected = 0.99 * (-0.001f64).exp() * (-0.001f64).exp();
        assert_relative_eq!(esp(&p).unwrap().value(), expected, max_relative = 1e-12);
    }

    #[test]
    fn esp_two_gates_is_the_product() {
        let snap = line5();
        let map = CircuitMap::new(vec![0, 1, 2], &snap).unwrap();
        let circuit = ParamCircuit::new(
            3,
            vec![
                Gate {
                    op: GateOp::Cx,
                    qubits: vec![1, 2],
                    angle: None,
                },
                Gate {
                    op: GateOp::Cx,
                    qubits: vec![0, 1],
                    angle: None,
                },
            ],
            0,
        )
        .unwrap();
        let routed = route(&circuit, &map, &snap).unwrap();
        let p = profile_circuit(&routed, &map, &snap).unwrap();
        // decoherence negligible on the fixture (T = 1e9 us)
        assert_relative_eq!(esp(&p).unwrap().value(), 0.99 * 0.95, max_relative = 1e-9);
    }

    #[test]
    fn qoncord_closed_forms() {
        let mut p = profile_on_line5(vec![], 2, vec![1, 2]);
        let params = QoncordParams {
            scale_c: 1.0,
            sq_error: 0.1,
            tq_error: 0.01,
            readout_error: 0.5,
        };
        assert_relative_eq!(qoncord_fidelity(&p, &params).unwrap(), 1.0);

        p.g2 = 1;
        p.depth = 1;
        p.mu2_us = 0.1;
        let zero_exp = QoncordParams {
            scale_c: 0.0,
            sq_error: 0.0,
            tq_error: 0.01,
            readout_error: 0.0,
        };
        assert_relative_eq!(qoncord_fidelity(&p, &zero_exp).unwrap(), 0.99);

        let mut m2 = profile_on_line5(vec![], 2, vec![1, 2]);
        m2.measurements = 2;
        let readout_only = QoncordParams {
            scale_c: 0.0,
            sq_error: 0.0,
            tq_error: 0.0,
            readout_error: 0.5,
        };
        assert_relative_eq!(qoncord_fidelity(&m2, &readout_only).unwrap(), 0.25);
    }

    #[test]
    fn qoncord_rejects_out_of_range_errors() {
        let p = profile_on_line5(vec![], 2, vec![1, 2]);
        let params = QoncordParams {
            scale_c: 1.0,
            sq_error: 1.0,
            tq_error: 0.0,
            readout_error: 0.0,
        };
        assert!(matches!(
            qoncord_fidelity(&p, &params),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn translation_invariance_on_homogeneous_fixture_edges() {
        // edges (1,2) and (2,3) have identical errors; the same circuit
        // routed on either map scores the same ESP.
        let a = profile_on_line5(
            vec![Gate {
                op: GateOp::Cx,
                qubits: vec![0, 1],
                angle: None,
            }],
            2,
            vec![1, 2],
        );
        let b = profile_on_line5(
            vec![Gate {
                op: GateOp::Cx,
                qubits: vec![0, 1],
                angle: None,
            }],
            2,
            vec![2, 3],
        );
        assert!((esp(&a).unwrap().value() - esp(&b).unwrap().value()).abs() < 1e-12);
    }
}

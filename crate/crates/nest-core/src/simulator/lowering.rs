//! Lowering of routed circuits to a dense, layered, noise-annotated gate
//! list shared by the trajectory sampler and the density-matrix oracle.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::circuits::{asap_layers, Gate, GateOp, ParamCircuit, PauliOp, RoutedCircuit};
use crate::device::DeviceSnapshot;
use crate::error::{Error, Result};
use crate::mapping::CircuitMap;
use crate::simulator::MAX_STATEVECTOR_QUBITS;

/// Probabilities below this are dropped by both the sampler and the
/// oracle, keeping the two channel definitions identical.
pub(crate) const PROB_FLOOR: f64 = 1e-12;

/// Compressed per-map device view: everything the simulator needs,
/// indexed by dense qubit (position within the map's sorted physical
/// set).
#[derive(Debug, Clone)]
pub struct NoiseBinding {
    pub(crate) sq_error: Vec<f64>,
    pub(crate) sq_duration: Vec<f64>,
    pub(crate) readout: Vec<f64>,
    pub(crate) t1: Vec<f64>,
    pub(crate) t2: Vec<f64>,
    pub(crate) tq: BTreeMap<(usize, usize), (f64, f64)>, // (error, duration)
}

impl NoiseBinding {
    pub fn from_snapshot(map: &CircuitMap, snapshot: &DeviceSnapshot) -> Result<Self> {
        let physical = map.sorted_physical();
        let mut sq_error = Vec::with_capacity(physical.len());
        let mut sq_duration = Vec::with_capacity(physical.len());
        let mut readout = Vec::with_capacity(physical.len());
        let mut t1 = Vec::with_capacity(physical.len());
        let mut t2 = Vec::with_capacity(physical.len());
        for &p in physical {
            let props = snapshot.qubit(p)?;
            if props.t1_us <= 0.0 || props.t2_us <= 0.0 {
                return Err(Error::Domain(format!(
                    "qubit {p}: coherence times must be positive"
                )));
            }
            sq_error.push(props.sq_error);
            sq_duration.push(props.sq_duration_us);
            readout.push(props.readout_error);
            t1.push(props.t1_us);
            t2.push(props.t2_us);
        }
        let mut tq = BTreeMap::new();
        for (i, &u) in physical.iter().enumerate() {
            for (j, &v) in physical.iter().enumerate().skip(i + 1) {
                if let Some(props) = snapshot.edge_props(u, v) {
                    tq.insert((i, j), (props.tq_error, props.tq_duration_us));
                }
            }
        }
        Ok(NoiseBinding {
            sq_error,
            sq_duration,
            readout,
            t1,
            t2,
            tq,
        })
    }

    fn edge(&self, a: usize, b: usize) -> Option<(f64, f64)> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.tq.get(&key).copied()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum BoundOp {
    /// 2x2 unitary on one dense qubit (row-major m).
    One { q: usize, m: [Complex64; 4] },
    /// CX with dense control/target.
    Cx { control: usize, target: usize },
    /// SWAP of two dense qubits.
    Swap { a: usize, b: usize },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BoundGate {
    pub op: BoundOp,
    /// Depolarizing probability applied right after the gate (0 = none).
    pub depol: f64,
}

impl BoundGate {
    pub(crate) fn qubits(&self) -> (usize, Option<usize>) {
        match self.op {
            BoundOp::One { q, .. } => (q, None),
            BoundOp::Cx { control, target } => (control, Some(target)),
            BoundOp::Swap { a, b } => (a, Some(b)),
        }
    }
}

/// Per-layer idle damping entries: (dense qubit, p_amp, p_phase).
pub(crate) type LayerDamping = Vec<(usize, f64, f64)>;

#[derive(Debug, Clone)]
pub(crate) struct BoundCircuit {
    pub num_qubits: usize,
    /// Gates grouped by ASAP layer (stable order within a layer).
    pub gates: Vec<BoundGate>,
    /// End index (exclusive) into `gates` for each layer.
    pub layer_ends: Vec<usize>,
    /// Damping entries applied after each layer; empty without noise.
    pub layer_damping: Vec<LayerDamping>,
    /// Readout flip probability per dense qubit; empty without noise.
    pub readout: Vec<f64>,
}

fn rotation_matrix(op: GateOp, theta: f64) -> [Complex64; 4] {
    let half = theta / 2.0;
    let (sin, cos) = half.sin_cos();
    let i = Complex64::I;
    match op {
        GateOp::Ry => [
            Complex64::from(cos),
            Complex64::from(-sin),
            Complex64::from(sin),
            Complex64::from(cos),
        ],
        GateOp::Rz => [
            (-i * half).exp(),
            Complex64::ZERO,
            Complex64::ZERO,
            (i * half).exp(),
        ],
        GateOp::Rx => [
            Complex64::from(cos),
            -i * sin,
            -i * sin,
            Complex64::from(cos),
        ],
        _ => unreachable!("not a rotation"),
    }
}

fn hadamard() -> [Complex64; 4] {
    let f = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    [f, f, f, -f]
}

/// H applied after S-dagger: rotates the Y eigenbasis onto Z.
fn y_basis_change() -> [Complex64; 4] {
    let f = std::f64::consts::FRAC_1_SQRT_2;
    [
        Complex64::new(f, 0.0),
        Complex64::new(0.0, -f),
        Complex64::new(f, 0.0),
        Complex64::new(0.0, f),
    ]
}

struct DenseGate {
    gate: Gate,
    /// Explicit 2x2 matrix taking precedence over the gate op (used for
    /// measurement-basis changes that have no named gate).
    matrix_override: Option<[Complex64; 4]>,
    depol: f64,
    duration: f64,
}

fn bind_dense(
    n: usize,
    gates: &[DenseGate],
    params: &[f64],
    num_params: usize,
    noise: Option<&NoiseBinding>,
) -> Result<BoundCircuit> {
    if params.len() != num_params {
        return Err(Error::ParamLengthMismatch {
            expected: num_params,
            got: params.len(),
        });
    }
    if n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_STATEVECTOR_QUBITS,
        });
    }
    let plain: Vec<Gate> = gates.iter().map(|d| d.gate.clone()).collect();
    let (layer_of, depth) = asap_layers(&plain);

    // group gate indices per layer, preserving program order
    let mut by_layer: Vec<Vec<usize>> = vec![Vec::new(); depth];
    let mut layer_time = vec![0.0f64; depth];
    for (idx, &layer) in layer_of.iter().enumerate() {
        if layer == usize::MAX {
            continue; // measurement: terminal, handled by readout
        }
        by_layer[layer].push(idx);
        layer_time[layer] = layer_time[layer].max(gates[idx].duration);
    }

    let mut bound = Vec::with_capacity(gates.len());
    let mut layer_ends = Vec::with_capacity(depth);
    let mut layer_damping = Vec::with_capacity(depth);
    for (layer, indices) in by_layer.iter().enumerate() {
        for &idx in indices {
            let d = &gates[idx];
            let op = if let Some(m) = d.matrix_override {
                BoundOp::One {
                    q: d.gate.qubits[0],
                    m,
                }
            } else {
                match d.gate.op {
                    GateOp::Ry | GateOp::Rz | GateOp::Rx => BoundOp::One {
                        q: d.gate.qubits[0],
                        m: rotation_matrix(
                            d.gate.op,
                            d.gate.angle.as_ref().expect("rotation angle").resolve(params),
                        ),
                    },
                    GateOp::H => BoundOp::One {
                        q: d.gate.qubits[0],
                        m: hadamard(),
                    },
                    GateOp::Cx => BoundOp::Cx {
                        control: d.gate.qubits[0],
                        target: d.gate.qubits[1],
                    },
                    GateOp::Swap => BoundOp::Swap {
                        a: d.gate.qubits[0],
                        b: d.gate.qubits[1],
                    },
                    GateOp::Measure => continue,
                }
            };
            bound.push(BoundGate {
                op,
                depol: if d.depol > PROB_FLOOR { d.depol } else { 0.0 },
            });
        }
        layer_ends.push(bound.len());
        let damping = match noise {
            Some(nb) => {
                let t = layer_time[layer];
                (0..n)
                    .filter_map(|q| {
                        let pa = 1.0 - (-t / nb.t1[q]).exp();
                        let pp = 1.0 - (-t / nb.t2[q]).exp();
                        (pa > PROB_FLOOR || pp > PROB_FLOOR).then_some((
                            q,
                            if pa > PROB_FLOOR { pa } else { 0.0 },
                            if pp > PROB_FLOOR { pp } else { 0.0 },
                        ))
                    })
                    .collect()
            }
            None => Vec::new(),
        };
        layer_damping.push(damping);
    }

    Ok(BoundCircuit {
        num_qubits: n,
        gates: bound,
        layer_ends,
        layer_damping,
        readout: noise
            .map(|nb| {
                nb.readout
                    .iter()
                    .map(|&r| if r > PROB_FLOOR { r } else { 0.0 })
                    .collect()
            })
            .unwrap_or_default(),
    })
}

/// Lowers a routed circuit (plus optional per-term measurement-basis
/// rotations on physical qubits) into dense indices.
pub(crate) fn lower_routed(
    routed: &RoutedCircuit,
    params: &[f64],
    basis_rotations: &[(usize, PauliOp)],
    noise: Option<&NoiseBinding>,
) -> Result<BoundCircuit> {
    let physical = routed.source_map.sorted_physical();
    let n = physical.len();
    let dense = |p: usize| -> Result<usize> {
        physical
            .binary_search(&p)
            .map_err(|_| Error::UnmappedQubit(p))
    };
    let mut gates = Vec::with_capacity(routed.gates.len() + basis_rotations.len());
    for g in &routed.gates {
        let qubits = g
            .qubits
            .iter()
            .map(|&p| dense(p))
            .collect::<Result<Vec<_>>>()?;
        let (depol, duration) = match noise {
            Some(nb) => match g.op {
                GateOp::Measure => (0.0, 0.0),
                GateOp::Cx | GateOp::Swap => nb
                    .edge(qubits[0], qubits[1])
                    .ok_or(Error::MissingEdgeProps(g.qubits[0], g.qubits[1]))?,
                _ => (nb.sq_error[qubits[0]], nb.sq_duration[qubits[0]]),
            },
            None => (0.0, 0.0),
        };
        gates.push(DenseGate {
            gate: Gate {
                op: g.op,
                qubits,
                angle: g.angle,
            },
            matrix_override: None,
            depol,
            duration,
        });
    }
    for &(phys, pauli) in basis_rotations {
        let q = dense(phys)?;
        let (depol, duration) = match noise {
            Some(nb) => (nb.sq_error[q], nb.sq_duration[q]),
            None => (0.0, 0.0),
        };
        let matrix = match pauli {
            PauliOp::X => hadamard(),
            PauliOp::Y => y_basis_change(),
            _ => continue,
        };
        gates.push(DenseGate {
            gate: Gate {
                op: GateOp::H,
                qubits: vec![q],
                angle: None,
            },
            matrix_override: Some(matrix),
            depol,
            duration,
        });
    }
    bind_dense(n, &gates, params, routed.num_params, noise)
}

/// Lowers an unrouted logical circuit (already dense), without noise.
pub(crate) fn lower_logical(circuit: &ParamCircuit, params: &[f64]) -> Result<BoundCircuit> {
    let gates: Vec<DenseGate> = circuit
        .gates
        .iter()
        .map(|g| DenseGate {
            gate: g.clone(),
            matrix_override: None,
            depol: 0.0,
            duration: 0.0,
        })
        .collect();
    bind_dense(circuit.num_qubits, &gates, params, circuit.num_params, None)
}

//! Exact density-matrix reference for small systems: evolves the same
//! lowered circuit as the trajectory sampler under the full channels
//! (depolarizing, amplitude damping, phase damping, readout confusion).

use num_complex::Complex64;

use crate::circuits::{PauliHamiltonian, RoutedCircuit};
use crate::error::{Error, Result};
use crate::simulator::lowering::{lower_routed, BoundCircuit, BoundGate, BoundOp, NoiseBinding};
use crate::simulator::{basis_rotations, support_mask, MAX_DENSITY_QUBITS};

struct Density {
    data: Vec<Complex64>, // row-major dim x dim
    dim: usize,
}

impl Density {
    fn ground(n: usize) -> Self {
        let dim = 1 << n;
        let mut data = vec![Complex64::ZERO; dim * dim];
        data[0] = Complex64::ONE;
        Density { data, dim }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    /// rho <- (M ⊗ rest) rho (M ⊗ rest)^dagger for a 2x2 operator M on
    /// qubit q (M need not be unitary).
    fn apply_one_sided(&mut self, q: usize, m: &[Complex64; 4]) {
        let bit = 1 << q;
        // left multiply rows
        for c in 0..self.dim {
            for r in 0..self.dim {
                if r & bit == 0 {
                    let a = self.at(r, c);
                    let b = self.at(r | bit, c);
                    self.set(r, c, m[0] * a + m[1] * b);
                    self.set(r | bit, c, m[2] * a + m[3] * b);
                }
            }
        }
        // right multiply columns by M^dagger
        for r in 0..self.dim {
            for c in 0..self.dim {
                if c & bit == 0 {
                    let a = self.at(r, c);
                    let b = self.at(r, c | bit);
                    self.set(r, c, a * m[0].conj() + b * m[1].conj());
                    self.set(r, c | bit, a * m[2].conj() + b * m[3].conj());
                }
            }
        }
    }

    /// Basis permutation rho[pi(r)][pi(c)] = rho[r][c].
    fn permute(&mut self, pi: impl Fn(usize) -> usize) {
        let mut out = vec![Complex64::ZERO; self.data.len()];
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[pi(r) * self.dim + pi(c)] = self.at(r, c);
            }
        }
        self.data = out;
    }

    fn apply_gate(&mut self, gate: &BoundGate) {
        match gate.op {
            BoundOp::One { q, ref m } => self.apply_one_sided(q, m),
            BoundOp::Cx { control, target } => {
                let (c, t) = (1usize << control, 1usize << target);
                self.permute(|i| if i & c != 0 { i ^ t } else { i });
            }
            BoundOp::Swap { a, b } => {
                let (abit, bbit) = (1usize << a, 1usize << b);
                self.permute(|i| {
                    let (x, y) = ((i & abit != 0) as usize, (i & bbit != 0) as usize);
                    if x != y {
                        i ^ abit ^ bbit
                    } else {
                        i
                    }
                });
            }
        }
    }

    /// Kraus-set application: rho <- sum_k K_k rho K_k^dagger (2x2 K's
    /// on one qubit).
    fn apply_kraus(&mut self, q: usize, kraus: &[[Complex64; 4]]) {
        let mut acc = vec![Complex64::ZERO; self.data.len()];
        for k in kraus {
            let mut branch = Density {
                data: self.data.clone(),
                dim: self.dim,
            };
            branch.apply_one_sided(q, k);
            for (a, b) in acc.iter_mut().zip(branch.data.iter()) {
                *a += b;
            }
        }
        self.data = acc;
    }

    /// Uniform depolarizing over the gate's support.
    fn depolarize(&mut self, gate: &BoundGate, p: f64) {
        let (qa, qb) = gate.qubits();
        let paulis = pauli_matrices();
        let mut acc: Vec<Complex64> = self.data.iter().map(|v| v * (1.0 - p)).collect();
        match qb {
            None => {
                for pm in &paulis[1..] {
                    let mut branch = Density {
                        data: self.data.clone(),
                        dim: self.dim,
                    };
                    branch.apply_one_sided(qa, pm);
                    for (a, b) in acc.iter_mut().zip(branch.data.iter()) {
                        *a += (p / 3.0) * b;
                    }
                }
            }
            Some(qb) => {
                for (i, pa) in paulis.iter().enumerate() {
                    for (j, pb) in paulis.iter().enumerate() {
                        if i == 0 && j == 0 {
                            continue;
                        }
                        let mut branch = Density {
                            data: self.data.clone(),
                            dim: self.dim,
                        };
                        if i > 0 {
                            branch.apply_one_sided(qa, pa);
                        }
                        if j > 0 {
                            branch.apply_one_sided(qb, pb);
                        }
                        for (a, b) in acc.iter_mut().zip(branch.data.iter()) {
                            *a += (p / 15.0) * b;
                        }
                    }
                }
            }
        }
        self.data = acc;
    }

    /// Z-basis parity expectation with symmetric readout flips folded in
    /// as (1 - 2r) contrast factors on the supported qubits.
    fn parity_expectation(&self, mask: u64, readout: &[f64]) -> f64 {
        let mut contrast = 1.0;
        for (q, &r) in readout.iter().enumerate() {
            if mask >> q & 1 == 1 {
                contrast *= 1.0 - 2.0 * r;
            }
        }
        let mut value = 0.0;
        for z in 0..self.dim {
            let sign = if (z as u64 & mask).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            value += sign * self.at(z, z).re;
        }
        value * contrast
    }
}

fn pauli_matrices() -> [[Complex64; 4]; 4] {
    let o = Complex64::ZERO;
    let l = Complex64::ONE;
    let i = Complex64::I;
    [
        [l, o, o, l],   // I
        [o, l, l, o],   // X
        [o, -i, i, o],  // Y
        [l, o, o, -l],  // Z
    ]
}

fn amp_damp_kraus(p: f64) -> [[Complex64; 4]; 2] {
    let o = Complex64::ZERO;
    [
        [Complex64::ONE, o, o, Complex64::from((1.0 - p).sqrt())],
        [o, Complex64::from(p.sqrt()), o, o],
    ]
}

fn phase_damp_kraus(p: f64) -> [[Complex64; 4]; 2] {
    let o = Complex64::ZERO;
    [
        [Complex64::ONE, o, o, Complex64::from((1.0 - p).sqrt())],
        [o, o, o, Complex64::from(p.sqrt())],
    ]
}

fn evolve(bound: &BoundCircuit) -> Density {
    let mut rho = Density::ground(bound.num_qubits);
    let mut start = 0usize;
    for (layer, &end) in bound.layer_ends.iter().enumerate() {
        for gate in &bound.gates[start..end] {
            rho.apply_gate(gate);
            if gate.depol > 0.0 {
                rho.depolarize(gate, gate.depol);
            }
        }
        for &(q, pa, pp) in &bound.layer_damping[layer] {
            if pa > 0.0 {
                rho.apply_kraus(q, &amp_damp_kraus(pa));
            }
            if pp > 0.0 {
                rho.apply_kraus(q, &phase_damp_kraus(pp));
            }
        }
        start = end;
    }
    rho
}

/// Exact expectation under the full noise channels; the reference the
/// trajectory sampler is tested against.
pub fn exact_noisy_expectation(
    routed: &RoutedCircuit,
    params: &[f64],
    hamiltonian: &PauliHamiltonian,
    noise: &NoiseBinding,
) -> Result<f64> {
    if routed.source_map.len() > MAX_DENSITY_QUBITS {
        return Err(Error::TooManyQubits {
            n: routed.source_map.len(),
            max: MAX_DENSITY_QUBITS,
        });
    }
    if hamiltonian.num_qubits != routed.num_qubits {
        return Err(Error::DimensionMismatch(format!(
            "hamiltonian on {} qubits, circuit on {}",
            hamiltonian.num_qubits, routed.num_qubits
        )));
    }
    let mut value = hamiltonian.identity_offset();
    for term in hamiltonian.sampled_terms() {
        let rotations = basis_rotations(term, routed)?;
        let bound = lower_routed(routed, params, &rotations, Some(noise))?;
        let mask = support_mask(term, routed, bound.num_qubits)?;
        let rho = evolve(&bound);
        value += term.coeff * rho.parity_expectation(mask, &bound.readout);
    }
    Ok(value)
}

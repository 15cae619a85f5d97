//! Dense statevector kernel and the quantum-jump trajectory sampler.

use num_complex::Complex64;
use rand::Rng;

use crate::simulator::lowering::{BoundCircuit, BoundGate, BoundOp, PROB_FLOOR};

pub(crate) struct State {
    pub amps: Vec<Complex64>,
    n: usize,
}

impl State {
    pub fn ground(n: usize) -> Self {
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[0] = Complex64::ONE;
        State { amps, n }
    }

    #[inline]
    pub fn apply_one(&mut self, q: usize, m: &[Complex64; 4]) {
        let bit = 1usize << q;
        let dim = self.amps.len();
        let mut base = 0usize;
        while base < dim {
            for i in base..base + bit {
                let a = self.amps[i];
                let b = self.amps[i | bit];
                self.amps[i] = m[0] * a + m[1] * b;
                self.amps[i | bit] = m[2] * a + m[3] * b;
            }
            base += bit << 1;
        }
    }

    #[inline]
    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let c = 1usize << control;
        let t = 1usize << target;
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    #[inline]
    pub fn apply_swap(&mut self, a: usize, b: usize) {
        let (abit, bbit) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & abit != 0 && i & bbit == 0 {
                self.amps.swap(i, i ^ abit ^ bbit);
            }
        }
    }

    /// Applies the single-qubit Pauli labeled 1 = X, 2 = Y, 3 = Z.
    pub fn apply_pauli(&mut self, q: usize, which: u8) {
        let bit = 1usize << q;
        match which {
            1 => {
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        self.amps.swap(i, i | bit);
                    }
                }
            }
            2 => {
                let i_unit = Complex64::I;
                for idx in 0..self.amps.len() {
                    if idx & bit == 0 {
                        let a = self.amps[idx];
                        let b = self.amps[idx | bit];
                        self.amps[idx] = -i_unit * b;
                        self.amps[idx | bit] = i_unit * a;
                    }
                }
            }
            _ => {
                for i in 0..self.amps.len() {
                    if i & bit != 0 {
                        self.amps[i] = -self.amps[i];
                    }
                }
            }
        }
    }

    /// Probability that qubit `q` reads 1.
    #[inline]
    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Keeps only the `keep_one` branch of qubit `q` and renormalizes;
    /// `move_to_zero` relocates the kept |1> component into |0> (the
    /// amplitude-damping jump).
    pub fn collapse(&mut self, q: usize, keep_one: bool, move_to_zero: bool) {
        let bit = 1usize << q;
        let mut norm = 0.0f64;
        for i in 0..self.amps.len() {
            let is_one = i & bit != 0;
            if is_one == keep_one {
                norm += self.amps[i].norm_sqr();
            } else {
                self.amps[i] = Complex64::ZERO;
            }
        }
        let scale = 1.0 / norm.sqrt();
        for i in 0..self.amps.len() {
            self.amps[i] *= scale;
        }
        if keep_one && move_to_zero {
            for i in 0..self.amps.len() {
                if i & bit != 0 {
                    self.amps[i ^ bit] = self.amps[i];
                    self.amps[i] = Complex64::ZERO;
                }
            }
        }
    }

    /// Scales the |1> branch of `q` by `factor` and renormalizes (the
    /// no-jump branch of a damping channel).
    pub fn damp_one_branch(&mut self, q: usize, factor: f64, p1: f64) {
        let bit = 1usize << q;
        let norm = (1.0 - p1 + p1 * factor * factor).sqrt();
        let keep = factor / norm;
        let other = 1.0 / norm;
        for i in 0..self.amps.len() {
            self.amps[i] *= if i & bit != 0 { keep } else { other };
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

pub(crate) fn apply_gate(state: &mut State, gate: &BoundGate) {
    match gate.op {
        BoundOp::One { q, ref m } => state.apply_one(q, m),
        BoundOp::Cx { control, target } => state.apply_cx(control, target),
        BoundOp::Swap { a, b } => state.apply_swap(a, b),
    }
}

/// Runs the circuit without any noise and returns the amplitudes.
pub(crate) fn run_ideal(bound: &BoundCircuit) -> Vec<Complex64> {
    let mut state = State::ground(bound.num_qubits);
    for gate in &bound.gates {
        apply_gate(&mut state, gate);
    }
    state.amps
}

/// Cumulative |amplitude|^2 distribution for ancestral sampling.
pub(crate) fn cumulative_probabilities(amps: &[Complex64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf = Vec::with_capacity(amps.len());
    for a in amps {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    cdf
}

pub(crate) fn sample_from_cdf(cdf: &[f64], rng: &mut impl Rng) -> u64 {
    let u: f64 = rng.random::<f64>() * cdf.last().copied().unwrap_or(1.0);
    match cdf.binary_search_by(|x| x.partial_cmp(&u).expect("finite cdf")) {
        Ok(i) | Err(i) => (i.min(cdf.len() - 1)) as u64,
    }
}

/// Uniform non-identity Pauli on the gate's support, sampled on a
/// depolarizing jump.
fn depolarize(state: &mut State, gate: &BoundGate, rng: &mut impl Rng) {
    let (qa, qb) = gate.qubits();
    match qb {
        None => {
            let which = rng.random_range(1u8..=3);
            state.apply_pauli(qa, which);
        }
        Some(qb) => {
            // 15 non-identity two-qubit Paulis, indexed 1..16 in base 4
            let code = rng.random_range(1u8..16);
            let (pa, pb) = (code / 4, code % 4);
            if pa > 0 {
                state.apply_pauli(qa, pa);
            }
            if pb > 0 {
                state.apply_pauli(qb, pb);
            }
        }
    }
}

/// Composed amplitude+phase damping on one qubit via a three-outcome
/// quantum jump (amp jump, phase jump after amp no-jump, double no-jump).
fn damp(state: &mut State, q: usize, p_amp: f64, p_phase: f64, rng: &mut impl Rng) {
    let p1 = state.prob_one(q);
    if p1 <= 0.0 {
        return;
    }
    let u: f64 = rng.random();
    let p_amp_jump = p_amp * p1;
    let p_phase_jump = p_phase * (1.0 - p_amp) * p1;
    if u < p_amp_jump {
        // relaxation: |1> component decays into |0>
        state.collapse(q, true, true);
    } else if u < p_amp_jump + p_phase_jump {
        // dephasing jump projects onto |1>
        state.collapse(q, true, false);
    } else {
        let factor = ((1.0 - p_amp) * (1.0 - p_phase)).sqrt();
        state.damp_one_branch(q, factor, p1);
    }
}

/// One noisy shot: gates layer by layer with depolarizing jumps, idle
/// damping after each layer, terminal measurement, readout flips.
/// Returns the measured bitstring over dense qubits.
pub(crate) fn run_trajectory(bound: &BoundCircuit, rng: &mut impl Rng) -> u64 {
    let mut state = State::ground(bound.num_qubits);
    let mut start = 0usize;
    for (layer, &end) in bound.layer_ends.iter().enumerate() {
        for gate in &bound.gates[start..end] {
            apply_gate(&mut state, gate);
            if gate.depol > 0.0 && rng.random::<f64>() < gate.depol {
                depolarize(&mut state, gate, rng);
            }
        }
        for &(q, pa, pp) in &bound.layer_damping[layer] {
            damp(&mut state, q, pa, pp, rng);
        }
        start = end;
    }
    let cdf = cumulative_probabilities(&state.amps);
    let mut z = sample_from_cdf(&cdf, rng);
    for (q, &r) in bound.readout.iter().enumerate() {
        if r > PROB_FLOOR && rng.random::<f64>() < r {
            z ^= 1 << q;
        }
    }
    z
}

//! Circuit execution: ideal statevector simulation, shot-based noisy
//! trajectory sampling, an exact density-matrix oracle, and exact
//! ground-energy solvers.
//!
//! Noisy expectation values are estimated per Pauli term: the routed
//! circuit is lowered once per term (basis rotations appended for X/Y
//! support), then every shot runs an independent quantum-jump trajectory
//! whose RNG stream is derived from (seed, term label, shot index). The
//! density-matrix oracle consumes the *same* lowered circuit, so the
//! sampled channels and the exact channels agree by construction.

mod density;
mod eigen;
mod lowering;
mod statevector;

pub use density::exact_noisy_expectation;
pub use eigen::{exact_ground_energy, MAX_ORACLE_QUBITS};
pub use lowering::NoiseBinding;

use num_complex::Complex64;

use crate::circuits::{ParamCircuit, PauliHamiltonian, PauliOp, RoutedCircuit};
use crate::error::{Error, Result};
use crate::par;
use crate::rng::{derive, str_salt};

/// Statevector bound for ideal simulation.
pub const MAX_STATEVECTOR_QUBITS: usize = 20;
/// Density-matrix bound for the exact noisy oracle.
pub const MAX_DENSITY_QUBITS: usize = 6;

/// Shot-estimated Hamiltonian expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationEstimate {
    pub value: f64,
    pub shots: usize,
    pub std_error: f64,
    pub seed: u64,
}

/// Exact statevector of the parameter-bound routed circuit, over the
/// map's qubits in ascending physical order (bit i of the state index is
/// the i-th smallest physical qubit).
pub fn simulate_ideal(routed: &RoutedCircuit, params: &[f64]) -> Result<Vec<Complex64>> {
    let bound = lowering::lower_routed(routed, params, &[], None)?;
    Ok(statevector::run_ideal(&bound))
}

/// Exact statevector of an unrouted logical circuit (test oracle and
/// landscape tooling).
pub fn simulate_logical(circuit: &ParamCircuit, params: &[f64]) -> Result<Vec<Complex64>> {
    let bound = lowering::lower_logical(circuit, params)?;
    Ok(statevector::run_ideal(&bound))
}

fn term_salts(label: &str) -> u64 {
    str_salt(label)
}

/// Estimates <H> by measuring each non-identity Pauli term independently
/// with `shots` trajectory samples. Identity terms contribute their
/// coefficients analytically. Deterministic for a fixed seed; shot
/// streams depend on the term label, not its position, so estimates are
/// additive across Hamiltonians sharing terms.
pub fn expectation(
    routed: &RoutedCircuit,
    params: &[f64],
    hamiltonian: &PauliHamiltonian,
    shots: usize,
    seed: u64,
    noise: Option<&NoiseBinding>,
) -> Result<ExpectationEstimate> {
    if hamiltonian.num_qubits != routed.num_qubits {
        return Err(Error::DimensionMismatch(format!(
            "hamiltonian on {} qubits, circuit on {}",
            hamiltonian.num_qubits, routed.num_qubits
        )));
    }
    if shots == 0 {
        return Err(Error::Domain("shots must be >= 1".into()));
    }
    let mut value = hamiltonian.identity_offset();
    let mut variance = 0.0f64;
    for term in hamiltonian.sampled_terms() {
        let rotations = basis_rotations(term, routed)?;
        let bound = lowering::lower_routed(routed, params, &rotations, noise)?;
        let mask = support_mask(term, routed, bound.num_qubits)?;
        let salt = term_salts(&term.label());
        let odd = count_odd_parities(&bound, mask, shots, seed, salt, noise.is_some());
        let mean = 1.0 - 2.0 * odd as f64 / shots as f64;
        value += term.coeff * mean;
        variance += term.coeff * term.coeff * (1.0 - mean * mean).max(0.0) / shots as f64;
    }
    Ok(ExpectationEstimate {
        value,
        shots,
        std_error: variance.sqrt(),
        seed,
    })
}

/// Samples measured bitstrings over *logical* qubits at the given
/// parameters (bit `l` of each sample is logical qubit `l`).
pub fn sample_bitstrings(
    routed: &RoutedCircuit,
    params: &[f64],
    shots: usize,
    seed: u64,
    noise: Option<&NoiseBinding>,
) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::Domain("shots must be >= 1".into()));
    }
    let bound = lowering::lower_routed(routed, params, &[], noise)?;
    let salt = str_salt("sample-bitstrings");
    let dense_of = dense_layout(routed, bound.num_qubits)?;
    let samples: Vec<u64> = if noise.is_some() {
        par::map_indexed(shots, |s| {
            let mut rng = shot_rng(seed, salt, s as u64);
            statevector::run_trajectory(&bound, &mut rng)
        })
    } else {
        let amplitudes = statevector::run_ideal(&bound);
        let cdf = statevector::cumulative_probabilities(&amplitudes);
        par::map_indexed(shots, |s| {
            let mut rng = shot_rng(seed, salt, s as u64);
            statevector::sample_from_cdf(&cdf, &mut rng)
        })
    };
    Ok(samples
        .into_iter()
        .map(|z| {
            let mut logical = 0u64;
            for (l, &dq) in dense_of.iter().enumerate() {
                logical |= ((z >> dq) & 1) << l;
            }
            logical
        })
        .collect())
}

fn shot_rng(seed: u64, term_salt: u64, shot: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(derive(seed, &[term_salt, shot]))
}

fn count_odd_parities(
    bound: &lowering::BoundCircuit,
    mask: u64,
    shots: usize,
    seed: u64,
    salt: u64,
    noisy: bool,
) -> usize {
    let parities: Vec<u8> = if noisy {
        par::map_indexed(shots, |s| {
            let mut rng = shot_rng(seed, salt, s as u64);
            let z = statevector::run_trajectory(bound, &mut rng);
            ((z & mask).count_ones() & 1) as u8
        })
    } else {
        let amplitudes = statevector::run_ideal(bound);
        let cdf = statevector::cumulative_probabilities(&amplitudes);
        par::map_indexed(shots, |s| {
            let mut rng = shot_rng(seed, salt, s as u64);
            let z = statevector::sample_from_cdf(&cdf, &mut rng);
            ((z & mask).count_ones() & 1) as u8
        })
    };
    parities.into_iter().map(usize::from).sum()
}

/// Logical qubit -> dense simulator index, through the final layout.
fn dense_layout(routed: &RoutedCircuit, n: usize) -> Result<Vec<usize>> {
    let physical = routed.source_map.sorted_physical();
    routed
        .final_layout
        .iter()
        .map(|p| {
            physical
                .binary_search(p)
                .map_err(|_| Error::UnmappedQubit(*p))
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(|v| {
            debug_assert!(v.iter().all(|&d| d < n));
            v
        })
}

/// Measurement-basis change per term, on physical qubits: H for X, and
/// the combined H S-dagger rotation for Y.
fn basis_rotations(
    term: &crate::circuits::PauliTerm,
    routed: &RoutedCircuit,
) -> Result<Vec<(usize, PauliOp)>> {
    term.x_support()
        .map(|(logical, op)| {
            routed
                .final_layout
                .get(logical)
                .copied()
                .ok_or(Error::UnmappedQubit(logical))
                .map(|phys| (phys, op))
        })
        .collect()
}

fn support_mask(
    term: &crate::circuits::PauliTerm,
    routed: &RoutedCircuit,
    n: usize,
) -> Result<u64> {
    let physical = routed.source_map.sorted_physical();
    let mut mask = 0u64;
    for logical in term.support() {
        let phys = routed
            .final_layout
            .get(logical)
            .copied()
            .ok_or(Error::UnmappedQubit(logical))?;
        let dense = physical
            .binary_search(&phys)
            .map_err(|_| Error::UnmappedQubit(phys))?;
        debug_assert!(dense < n);
        mask |= 1 << dense;
    }
    Ok(mask)
}

#[cfg(test)]
mod tests;

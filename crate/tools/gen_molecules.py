#!/usr/bin/env python3
"""Generate qubit Hamiltonian data files for small molecules.

Pipeline: STO-3G integrals (s-type Gaussians only) -> RHF SCF -> MO-basis
integrals -> second-quantized Hamiltonian matrix (Jordan-Wigner, interleaved
spin orbitals) -> Pauli-basis decomposition -> text file "coeff PAULISTRING".

Conventions (must match the Rust parser/simulator):
  - Pauli string character at position j acts on qubit j (leftmost = qubit 0).
  - Basis index z encodes qubit j in bit j (little-endian).

Each output is validated by rebuilding the matrix from the emitted lines and
by checking <HF|H|HF> against the SCF energy.
"""

import numpy as np
from scipy.special import erf

# STO-3G exponents/contractions (EMSL basis set exchange values).
STO3G = {
    "H": (
        np.array([3.425250914, 0.6239137298, 0.1688554040]),
        np.array([0.1543289673, 0.5353281423, 0.4446345422]),
    ),
    "He": (
        np.array([6.362421394, 1.158922999, 0.3136497915]),
        np.array([0.1543289673, 0.5353281423, 0.4446345422]),
    ),
}

Z_CHARGE = {"H": 1.0, "He": 2.0}
ANGSTROM_TO_BOHR = 1.0 / 0.529177210903


def boys0(t):
    if t < 1e-12:
        return 1.0 - t / 3.0
    return 0.5 * np.sqrt(np.pi / t) * erf(np.sqrt(t))


class Shell:
    def __init__(self, center, exps, coefs):
        self.center = np.asarray(center, dtype=float)
        self.exps = exps
        # Primitive normalization folded into contraction coefficients.
        self.coefs = coefs * (2.0 * exps / np.pi) ** 0.75


def overlap_prim(a, ra, b, rb):
    p = a + b
    ab2 = np.dot(ra - rb, ra - rb)
    return (np.pi / p) ** 1.5 * np.exp(-a * b / p * ab2)


def kinetic_prim(a, ra, b, rb):
    p = a + b
    mu = a * b / p
    ab2 = np.dot(ra - rb, ra - rb)
    return mu * (3.0 - 2.0 * mu * ab2) * overlap_prim(a, ra, b, rb)


def nuclear_prim(a, ra, b, rb, rc):
    p = a + b
    ab2 = np.dot(ra - rb, ra - rb)
    rp = (a * ra + b * rb) / p
    pc2 = np.dot(rp - rc, rp - rc)
    return -2.0 * np.pi / p * np.exp(-a * b / p * ab2) * boys0(p * pc2)


def eri_prim(a, ra, b, rb, c, rc, d, rd):
    p = a + b
    q = c + d
    rp = (a * ra + b * rb) / p
    rq = (c * rc + d * rd) / q
    ab2 = np.dot(ra - rb, ra - rb)
    cd2 = np.dot(rc - rd, rc - rd)
    pq2 = np.dot(rp - rq, rp - rq)
    pre = 2.0 * np.pi ** 2.5 / (p * q * np.sqrt(p + q))
    return pre * np.exp(-a * b / p * ab2 - c * d / q * cd2) * boys0(p * q / (p + q) * pq2)


def contracted(fn, shells, *extra):
    n = len(shells)
    if fn is eri_prim:
        out = np.zeros((n, n, n, n))
        for i, si in enumerate(shells):
            for j, sj in enumerate(shells):
                for k, sk in enumerate(shells):
                    for l, sl in enumerate(shells):
                        v = 0.0
                        for a, ca in zip(si.exps, si.coefs):
                            for b, cb in zip(sj.exps, sj.coefs):
                                for c, cc in zip(sk.exps, sk.coefs):
                                    for d, cd in zip(sl.exps, sl.coefs):
                                        v += ca * cb * cc * cd * eri_prim(
                                            a, si.center, b, sj.center,
                                            c, sk.center, d, sl.center)
                        out[i, j, k, l] = v
        return out
    out = np.zeros((n, n))
    for i, si in enumerate(shells):
        for j, sj in enumerate(shells):
            v = 0.0
            for a, ca in zip(si.exps, si.coefs):
                for b, cb in zip(sj.exps, sj.coefs):
                    v += ca * cb * fn(a, si.center, b, sj.center, *extra)
            out[i, j] = v
    return out


def rhf(symbols, coords_bohr, charge):
    shells = [Shell(r, *STO3G[s]) for s, r in zip(symbols, coords_bohr)]
    nbf = len(shells)
    nelec = int(sum(Z_CHARGE[s] for s in symbols) - charge)
    assert nelec == 2, "script supports 2-electron systems"

    S = contracted(overlap_prim, shells)
    T = contracted(kinetic_prim, shells)
    V = np.zeros((nbf, nbf))
    for s, r in zip(symbols, coords_bohr):
        V += Z_CHARGE[s] * contracted(nuclear_prim, shells, np.asarray(r))
    eri = contracted(eri_prim, shells)
    hcore = T + V

    e_nuc = 0.0
    for i in range(len(symbols)):
        for j in range(i + 1, len(symbols)):
            rij = np.linalg.norm(np.asarray(coords_bohr[i]) - np.asarray(coords_bohr[j]))
            e_nuc += Z_CHARGE[symbols[i]] * Z_CHARGE[symbols[j]] / rij

    sval, svec = np.linalg.eigh(S)
    x = svec @ np.diag(sval ** -0.5) @ svec.T

    def fock(dm):
        J = np.einsum("pqrs,rs->pq", eri, dm)
        K = np.einsum("prqs,rs->pq", eri, dm)
        return hcore + J - 0.5 * K

    dm = np.zeros((nbf, nbf))
    e_old = np.inf
    for _ in range(500):
        fp = x.T @ fock(dm) @ x
        _, cp = np.linalg.eigh(fp)
        C = x @ cp
        cocc = C[:, :1]
        dm = 2.0 * cocc @ cocc.T
        e_elec = 0.5 * np.sum(dm * (hcore + fock(dm)))
        if abs(e_elec - e_old) < 1e-13:
            break
        e_old = e_elec

    e_hf = e_elec + e_nuc
    # MO transforms.
    h_mo = C.T @ hcore @ C
    eri_mo = np.einsum("pi,qj,rk,sl,pqrs->ijkl", C, C, C, C, eri, optimize=True)
    return h_mo, eri_mo, e_nuc, e_hf, nbf


PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def qubit_op(op, j, n):
    # index bit j <-> qubit j: kron(I_hi, op, I_lo)
    m = np.eye(1, dtype=complex)
    m = np.kron(np.eye(2 ** (n - 1 - j), dtype=complex), np.kron(op, np.eye(2 ** j, dtype=complex)))
    return m


def annihilation(j, n):
    sm = np.array([[0, 1], [0, 0]], dtype=complex)  # sigma^- : |1> -> |0>
    m = qubit_op(sm, j, n)
    for k in range(j):
        m = m @ qubit_op(PAULI["Z"], k, n)
    return m


def build_hamiltonian(h_mo, eri_mo, e_nuc, nbf):
    n = 2 * nbf  # interleaved spin orbitals: 2p = (p, alpha), 2p+1 = (p, beta)
    dim = 2 ** n
    a = [annihilation(j, n) for j in range(n)]
    ad = [m.conj().T for m in a]
    H = e_nuc * np.eye(dim, dtype=complex)
    for p in range(nbf):
        for q in range(nbf):
            if abs(h_mo[p, q]) < 1e-14:
                continue
            for s in range(2):
                H += h_mo[p, q] * ad[2 * p + s] @ a[2 * q + s]
    for p in range(nbf):
        for q in range(nbf):
            for r in range(nbf):
                for s in range(nbf):
                    v = eri_mo[p, q, r, s]
                    if abs(v) < 1e-14:
                        continue
                    for s1 in range(2):
                        for s2 in range(2):
                            H += 0.5 * v * (ad[2 * p + s1] @ ad[2 * r + s2]
                                            @ a[2 * s + s2] @ a[2 * q + s1])
    return H


def pauli_decompose(H, n):
    terms = []
    strings = [""]
    for _ in range(n):
        strings = [s + c for s in strings for c in "IXYZ"]
    for s in strings:
        P = np.eye(2 ** n, dtype=complex)
        for j, ch in enumerate(s):
            if ch != "I":
                P = P @ qubit_op(PAULI[ch], j, n)
        c = np.trace(P @ H) / (2 ** n)
        assert abs(c.imag) < 1e-10, (s, c)
        if abs(c.real) > 1e-12:
            terms.append((c.real, s))
    return terms


def emit(name, symbols, coords_angstrom, charge, comment):
    coords = [np.asarray(r) * ANGSTROM_TO_BOHR for r in coords_angstrom]
    h_mo, eri_mo, e_nuc, e_hf, nbf = rhf(symbols, coords, charge)
    n = 2 * nbf
    H = build_hamiltonian(h_mo, eri_mo, e_nuc, nbf)
    terms = pauli_decompose(H, n)

    # validation: rebuild and compare
    R = np.zeros_like(H)
    for c, s in terms:
        P = np.eye(2 ** n, dtype=complex)
        for j, ch in enumerate(s):
            if ch != "I":
                P = P @ qubit_op(PAULI[ch], j, n)
        R += c * P
    err = np.max(np.abs(R - H))
    assert err < 1e-9, err

    # HF determinant: spin orbitals 0,1 occupied -> bits 0 and 1 set
    hf_index = 0b11
    e_hf_check = H[hf_index, hf_index].real
    evals = np.linalg.eigvalsh(H)
    print(f"{name}: nbf={nbf} qubits={n} terms={len(terms)}")
    print(f"  E_nuc={e_nuc:.8f}  E_HF(scf)={e_hf:.8f}  <HF|H|HF>={e_hf_check:.8f}")
    assert abs(e_hf - e_hf_check) < 1e-8
    print(f"  min eig (full Fock space) = {evals[0]:.8f}")

    lines = [f"# {comment}", f"# qubits: {n}; leftmost Pauli character acts on qubit 0"]
    for c, s in sorted(terms, key=lambda t: t[1]):
        lines.append(f"{float(c)!r} {s}")
    path = f"data/molecules/{name}.ham"
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    print(f"  wrote {path}")


if __name__ == "__main__":
    import os
    os.makedirs("data/molecules", exist_ok=True)
    emit("h2", ["H", "H"], [(0, 0, 0), (0, 0, 0.7414)], 0,
         "H2, STO-3G, R=0.7414 A, RHF/Jordan-Wigner, interleaved spin orbitals")
    emit("heh_plus", ["He", "H"], [(0, 0, 0), (0, 0, 0.772)], 1,
         "HeH+, STO-3G, R=0.772 A, RHF/Jordan-Wigner, interleaved spin orbitals")
    emit("h3_plus", ["H", "H", "H"],
         [(0, 0, 0), (0.874, 0, 0), (0.437, 0.756902, 0)], 1,
         "H3+, STO-3G, equilateral side 0.874 A, RHF/Jordan-Wigner, interleaved spin orbitals")

"""Regenerate the bundled Hamiltonian fixtures.

Needs pyscf, which is not a runtime dependency of the package:

    pip install pyscf
    python tools/make_fixtures.py src/vdistill/fixtures

Each molecule is built in STO-3G, the second-quantised Hamiltonian is
assembled densely with a Jordan-Wigner encoding (alpha orbitals first, then
beta), optionally permuted into the parity encoding, restricted to a
symmetry sector, and Pauli-decomposed.  Qubit labels are big-endian.
"""
import hashlib
import itertools
import json
import sys
from pathlib import Path

import numpy as np
from pyscf import ao2mo, gto, scf

DISTANCES = [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5]
PAULI = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


def _jw_annihilators(n_modes):
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    ops = []
    for j in range(n_modes):
        m = np.array([[1.0]])
        for k in range(n_modes):
            f = np.diag([1.0, -1.0]) if k < j else (lower if k == j else np.eye(2))
            m = np.kron(m, f)
        ops.append(m)
    return ops


def molecular_hamiltonian(atoms, charge, spin):
    mol = gto.M(atom=atoms, basis="sto-3g", charge=charge, spin=spin,
                unit="Angstrom", symmetry=True, verbose=0)
    mf = scf.RHF(mol) if spin == 0 else scf.ROHF(mol)
    mf.kernel()
    c = mf.mo_coeff
    m = c.shape[1]
    h1 = c.T @ mf.get_hcore() @ c
    eri = ao2mo.restore(1, ao2mo.kernel(mol, c), m)
    n = 2 * m
    a = _jw_annihilators(n)
    ad = [x.T for x in a]
    h = np.zeros((2**n, 2**n))

    def split(p):
        return p % m, p // m

    for p, q in itertools.product(range(n), repeat=2):
        (i, sp), (j, sq) = split(p), split(q)
        if sp == sq:
            h += h1[i, j] * ad[p] @ a[q]
    for p, q, r, s in itertools.product(range(n), repeat=4):
        (i, sp), (j, sq), (k, sr), (l, ss) = map(split, (p, q, r, s))
        if sp == sr and sq == ss:
            v = eri[i, k, j, l]
            if abs(v) > 1e-14:
                h += 0.5 * v * ad[p] @ ad[q] @ a[s] @ a[r]
    orbsym = list(getattr(mf, "orbsym", [0] * m))
    return h, mol.energy_nuc(), m, orbsym


def to_parity(h_jw, n):
    """Permute a Jordan-Wigner operator into the parity encoding."""
    perm = np.empty(2**n, dtype=int)
    for occ in range(2**n):
        bits = [(occ >> (n - 1 - j)) & 1 for j in range(n)]
        par = np.cumsum(bits) % 2
        perm[int("".join(map(str, par)), 2)] = occ
    return h_jw[np.ix_(perm, perm)]


def restrict(h, n, keep, constraint):
    """Sub-block of `h` on basis states satisfying `constraint`, indexed by `keep` bits."""
    k = len(keep)
    index = np.full(2**k, -1)
    for x in range(2**n):
        bits = [(x >> (n - 1 - j)) & 1 for j in range(n)]
        if constraint(bits):
            label = int("".join(str(bits[q]) for q in keep), 2)
            assert index[label] == -1, "kept qubits do not label the sector"
            index[label] = x
    assert (index >= 0).all()
    return h[np.ix_(index, index)]


def decompose(mat):
    k = int(np.log2(mat.shape[0]))
    terms = {}
    for letters in itertools.product("IXYZ", repeat=k):
        p = np.array([[1.0]])
        for c in letters:
            p = np.kron(p, PAULI[c])
        coeff = np.trace(p @ mat).real / 2**k
        if abs(coeff) > 1e-12:
            terms["".join(letters)] = coeff
    return terms


def h2_two_qubit(d):
    h, enuc, m, _ = molecular_hamiltonian(f"H 0 0 0; H 0 0 {d}", 0, 0)
    hp = to_parity(h, 4)
    # parity qubit 1 holds N_alpha parity, qubit 3 total parity
    red = restrict(hp, 4, keep=[2, 0], constraint=lambda b: b[1] == 1 and b[3] == 0)
    return red, enuc, "parity, two-qubit Z2 reduction", "01"


def h2_four_qubit(d):
    h, enuc, m, _ = molecular_hamiltonian(f"H 0 0 0; H 0 0 {d}", 0, 0)
    return to_parity(h, 4), enuc, "parity, no reduction", "1100"


def h3_three_qubit(d):
    h, enuc, m, orbsym = molecular_hamiltonian(f"H 0 0 0; H 0 0 {d}; H 0 0 {2 * d}", 0, 1)
    odd = [i for i in range(m) if orbsym[i] != orbsym[0]]
    assert odd == [1], orbsym
    # alpha 0..2, beta 3..5; sector: N_alpha even, N_beta odd, reflection -1
    red = restrict(
        h, 6, keep=[4, 0, 5],
        constraint=lambda b: sum(b[:3]) % 2 == 0 and sum(b[3:]) % 2 == 1 and (b[1] + b[4]) % 2 == 1,
    )
    return red, enuc, "Jordan-Wigner, Z2 tapering (spin parities, reflection)", "010"


SYSTEMS = {
    "h2_2q": ("H2", h2_two_qubit),
    "h3_3q": ("H3", h3_three_qubit),
    "h2_4q": ("H2", h2_four_qubit),
}


def main(out):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for name, (molecule, build) in SYSTEMS.items():
        for d in DISTANCES:
            mat, enuc, mapping, hf = build(d)
            terms = decompose(mat)
            ident = "I" * len(hf)
            constant = terms.pop(ident, 0.0) + enuc
            exact = float(np.linalg.eigvalsh(mat)[0] + enuc)
            doc = {
                "n_qubits": len(hf),
                "terms": [{"pauli": p, "coeff": c} for p, c in sorted(terms.items())],
                "constant": constant,
                "exact_energy": exact,
                "meta": {
                    "molecule": molecule,
                    "distance_angstrom": d,
                    "mapping": mapping,
                    "basis": "sto-3g",
                    "nuclear_repulsion": enuc,
                    "hartree_fock_state": hf,
                },
            }
            text = json.dumps(doc, indent=2) + "\n"
            path = out / f"{name}_{d:.2f}.json"
            path.write_text(text)
            print(path, len(terms), "terms", f"exact={exact:.8f}",
                  hashlib.sha256(text.encode()).hexdigest()[:12])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/vdistill/fixtures")

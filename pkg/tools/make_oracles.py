"""Independent numpy-only oracle for the depolarization sweeps.

Nothing from the package is imported.  Gates are embedded as full
matrices, two-qubit depolarization is applied through the Pauli twirl
(1-l) rho + l/16 sum_P P rho P, the swap-recipe signs follow the S/A pair
labelling rule and mask outcomes are matched to swap eigenvectors by
pulling computational states back through the projection unitary.

Inputs: fixtures (JSON) and the ansatz parameters in
tests/oracles/optimal_params.json.  Output: tests/oracles/depol_sweeps.json.

    python tools/make_oracles.py
"""
import json
from functools import reduce
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "src" / "vdistill" / "fixtures"
ORACLES = ROOT / "tests" / "oracles"
LAMBDAS = [round(0.01 * i, 2) for i in range(11)]

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
SDG = np.diag([1, -1j])
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def rot(axis, t):
    return np.cos(t / 2) * I2 - 1j * np.sin(t / 2) * PAULI[axis]


def embed(op, qubits, n):
    """Full 2^n matrix of ``op`` acting on ``qubits`` (big-endian)."""
    k = len(qubits)
    rest = [q for q in range(n) if q not in qubits]
    full = np.kron(op, np.eye(2 ** (n - k)))
    order = list(qubits) + rest
    # full acts on wires in ``order``; permute back to 0..n-1
    t = full.reshape([2] * (2 * n))
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(2**n, 2**n)


PAIR_PAULIS = [np.kron(PAULI[a], PAULI[b]) for a in "IXYZ" for b in "IXYZ"]


def run(gates, rho, lam):
    n = int(np.log2(rho.shape[0]))
    for op, qs in gates:
        u = embed(op, qs, n)
        rho = u @ rho @ u.conj().T
        if len(qs) == 2 and lam > 0:
            twirl = sum(embed(p, qs, n) @ rho @ embed(p, qs, n).conj().T for p in PAIR_PAULIS) / 16
            rho = (1 - lam) * rho + lam * twirl
    return rho


def hamiltonian(doc):
    n = doc["n_qubits"]
    m = doc["constant"] * np.eye(2**n, dtype=complex)
    for t in doc["terms"]:
        m = m + t["coeff"] * reduce(np.kron, [PAULI[c] for c in t["pauli"]])
    return m


def ansatz(kind, n, theta, hf):
    if kind == "ucc":
        return [(X, (1,)), (rot("Y", theta[0]), (0,)), (CNOT, (0, 1))]
    g = [(X, (q,)) for q, b in enumerate(hf) if b == "1"]
    for layer in range(3):
        o = 2 * n * layer
        g += [(rot("Y", theta[o + q]), (q,)) for q in range(n)]
        g += [(rot("Z", theta[o + n + q]), (q,)) for q in range(n)]
        if layer < 2:
            g += [(CNOT, (q, q + 1)) for q in range(n - 2, -1, -1)]
    return g


def rotation(key):
    g = []
    for q, c in enumerate(key):
        if c == "X":
            g.append((H, (q,)))
        elif c == "Y":
            g += [(SDG, (q,)), (H, (q,))]
    return g


def doubled(gates, n):
    return gates + [(op, tuple(q + n for q in qs)) for op, qs in gates]


def probs(rho):
    return np.clip(np.real(np.diag(rho)), 0, None)


def split(x, n):
    return x >> n, x & ((1 << n) - 1)


def swap_of(x, n):
    a, c = split(x, n)
    return (c << n) | a


def zdiag(support_bits, n):
    return np.array([(-1) ** bin(i & support_bits).count("1") for i in range(2**n)])


def s2_gates(n):
    return [(CNOT, (i, i + n)) for i in range(n)] + [(H, (i,)) for i in range(n)]


def s2_estimate(p_comp, p_s2, n):
    """Invariant mass plus signed outcomes; pair bits (ctrl, targ): 00 S+, 01 A+, 10 S-, 11 A-."""
    total = sum(p_comp[x] for x in range(4**n) if swap_of(x, n) == x)
    for z in range(4**n):
        a, c = split(z, n)
        labels = [((a >> (n - 1 - i)) & 1, (c >> (n - 1 - i)) & 1) for i in range(n)]
        n_a = sum(t == 1 for _, t in labels)
        if n_a == 0:
            continue
        n_am = sum(cb == 1 and t == 1 for cb, t in labels)
        total += (-1) ** n_am * p_s2[z]
    return total


def mask_gates(n, mask):
    s = [i for i in range(n) if (mask >> (n - 1 - i)) & 1]
    s = s + [i + n for i in s]
    g = [(CNOT, (s[j - 1], s[j])) for j in range(len(s) - 1, 0, -1)]
    return g + [(H, (s[0],))]


def outcome_targets(n, mask):
    """outcome z -> (x_lo, sign) whose eigenvector W^dag|z> projects onto."""
    w = np.eye(4**n, dtype=complex)
    for op, qs in mask_gates(n, mask):
        w = embed(op, qs, 2 * n) @ w
    out = {}
    for z in range(4**n):
        v = w.conj().T[:, z]
        nz = np.flatnonzero(np.abs(v) > 1e-9)
        if len(nz) == 2 and swap_of(nz[0], n) == nz[1]:
            lo = int(min(nz))
            hi = int(max(nz))
            out[z] = (lo, int(np.sign(np.real(v[hi] / v[lo]))))
    return out


def pair_mask(x, n):
    a, c = split(x, n)
    return a ^ c


def needed_masks(term, n):
    sup = sum(1 << (n - 1 - i) for i, ch in enumerate(term) if ch != "I")
    o = zdiag(sup, n)
    out = set()
    for x in range(4**n):
        a, c = split(x, n)
        if a != c and o[a] + o[c] != 0:
            out.add(a ^ c)
    return out


def groups(doc):
    g = {}
    for t in doc["terms"]:
        key = "".join("Z" if c == "I" else c for c in t["pauli"])
        g.setdefault(key, []).append(t)
    n = doc["n_qubits"]
    return dict(sorted(g.items(), key=lambda kv: (kv[0].replace("Z", "0") != "0" * n, kv[0])))


def b_gate(n):
    def pair(i, j):
        return [(rot("X", -np.pi / 2), (i,)), (rot("X", np.pi / 2), (j,)), (H, (i,)), (CNOT, (i, j)),
                (rot("X", np.pi / 4), (i,)), (rot("Z", np.pi / 4), (j,)), (CNOT, (i, j)), (H, (i,)),
                (rot("X", -np.pi / 2), (j,)), (rot("X", np.pi / 2), (i,))]
    return [g for i in range(n) for g in pair(i, i + n)]


def b_eigen(n):
    """Per-outcome eigenvalues of S2 and of Z_sym(i) S2 after the B circuit (numerically)."""
    u = np.eye(4**n, dtype=complex)
    for op, qs in b_gate(n):
        u = embed(op, qs, 2 * n) @ u
    swap = np.zeros((4**n, 4**n))
    for x in range(4**n):
        swap[swap_of(x, n), x] = 1
    res = {"s2": np.real(np.diag(u @ swap @ u.conj().T))}
    for i in range(n):
        zs = (embed(Z, (i,), 2 * n) + embed(Z, (i + n,), 2 * n)) / 2
        m = u @ zs @ swap @ u.conj().T
        assert np.allclose(m, np.diag(np.diag(m)), atol=1e-9)
        res[i] = np.real(np.diag(m))
    return res


def sweep(doc, kind, theta):
    n = doc["n_qubits"]
    hm = hamiltonian(doc)
    base = ansatz(kind, n, theta, doc["meta"].get("hartree_fock_state"))
    zero = np.zeros((2**n, 2**n), dtype=complex)
    zero[0, 0] = 1
    zero2 = np.zeros((4**n, 4**n), dtype=complex)
    zero2[0, 0] = 1
    rho0 = run(base, zero, 0.0)
    ideal = float(np.real(np.trace(hm @ rho0)))
    beig = b_eigen(n) if n == 2 else None
    rows = []
    for lam in LAMBDAS:
        rho = run(base, zero, lam)
        rho_sq = rho @ rho
        row = {"lambda": lam, "raw": float(np.real(np.trace(hm @ rho))),
               "purity": float(np.real(np.trace(rho_sq))),
               "vd_clean": float(np.real(np.trace(hm @ rho_sq) / np.trace(rho_sq)))}
        num = 0.0
        b_num = 0.0
        s2 = None
        for gi, (key, terms) in enumerate(groups(doc).items()):
            rho2 = run(doubled(base + rotation(key), n), zero2, lam)
            pc = probs(rho2)
            masks = set().union(*(needed_masks(t["pauli"], n) for t in terms))
            recon = np.full(4**n, np.nan)
            for x in range(4**n):
                if swap_of(x, n) == x:
                    recon[x] = pc[x]
            for m in sorted(masks):
                pm = probs(run(mask_gates(n, m), rho2, lam))
                for z, (lo, s) in outcome_targets(n, m).items():
                    recon[lo if s > 0 else swap_of(lo, n)] = pm[z]
            missing = sum(pc[x] for x in range(4**n) if swap_of(x, n) != x and pair_mask(x, n) not in masks)
            known = ~np.isnan(recon)
            recon[known] = np.clip(recon[known], 0, None)
            recon[known] /= recon[known].sum() + missing
            if gi == 0:
                s2 = s2_estimate(pc, probs(run(s2_gates(n), rho2, lam)), n)
                if beig is not None:
                    pb_first = probs(run(b_gate(n), rho2, lam))
            pb = probs(run(b_gate(n), rho2, lam)) if beig is not None else None
            for t in terms:
                sup = sum(1 << (n - 1 - i) for i, ch in enumerate(t["pauli"]) if ch != "I")
                o = zdiag(sup, n)
                val = 0.0
                for x in range(4**n):
                    a, c = split(x, n)
                    sx = swap_of(x, n)
                    if sx == x:
                        lamv = o[a]
                    elif x < sx:
                        lamv = (o[a] + o[c]) / 2
                    else:
                        lamv = -(o[a] + o[c]) / 2
                    if lamv != 0:
                        val += lamv * recon[x]
                num += t["coeff"] * val
                if beig is not None:
                    weight = sum(ch != "I" for ch in t["pauli"])
                    if weight == 1:
                        q = next(i for i, ch in enumerate(t["pauli"]) if ch != "I")
                        b_num += t["coeff"] * float(pb @ beig[q])
                    else:
                        b_num += t["coeff"] * val
        row["s2"] = float(s2)
        row["vd"] = float(num / s2 + doc["constant"])
        if beig is not None:
            b_s2 = float(pb_first @ beig["s2"])
            row["bgate_s2"] = b_s2
            row["bgate"] = float(b_num / b_s2 + doc["constant"])
        rows.append(row)
    return {"ideal": ideal, "params": list(theta), "rows": rows}


def grid_argmin(doc):
    hm = hamiltonian(doc)
    zero = np.zeros(4, dtype=complex)
    zero[0] = 1
    best = None
    for t in np.linspace(-np.pi, np.pi, 51):
        psi = zero
        for op, qs in ansatz("ucc", 2, [t], None):
            psi = embed(op, qs, 2) @ psi
        e = float(np.real(np.vdot(psi, hm @ psi)))
        if best is None or e < best[1]:
            best = (float(t), e)
    return best


def main():
    params = json.loads((ORACLES / "optimal_params.json").read_text())
    out = {}
    d2 = json.loads((FIX / "h2_2q_2.00.json").read_text())
    theta, e = grid_argmin(d2)
    out["h2_2q_2.00"] = sweep(d2, "ucc", [theta])
    out["h2_2q_2.00"]["grid_energy"] = e
    for name in ("h3_3q_2.00", "h2_4q_2.00"):
        doc = json.loads((FIX / f"{name}.json").read_text())
        out[name] = sweep(doc, "he", params[name])
    (ORACLES / "depol_sweeps.json").write_text(json.dumps(out, indent=1))
    for k, v in out.items():
        r = v["rows"]
        print(k, v["ideal"], [round(x["vd"] - v["ideal"], 6) for x in r])


if __name__ == "__main__":
    main()

"""Turn measured distributions into purified expectation values."""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .exceptions import CoverageError, DegeneratePurityError, InputError
from .pauli import PauliString, PauliSum
from .vdcomp import (
    BasisClassification,
    ProjectionPlan,
    ReconstructionRecipe,
    b_gate_pair_diagonal,
    classify_basis,
    term_masks,
)

PURITY_GUARD = 1e-6


@dataclass(frozen=True, eq=False)
class MeasurementBundle:
    """Distributions measured for one measurement basis.

    ``computational`` and every entry of ``per_plan`` live on the doubled
    register (4**n outcomes); ``base`` is the undoubled circuit's
    distribution used for the raw estimate.  With integer ``shots`` the arrays
    hold counts, with ``shots="exact"`` they hold probabilities.
    """

    n: int
    computational: np.ndarray
    per_plan: Mapping[str, np.ndarray] = field(default_factory=dict)
    shots: int | str = "exact"
    seed: int | None = None
    base: np.ndarray | None = None
    basis: str = ""

    def __post_init__(self):
        dim = 4**self.n
        per_plan = {k: np.asarray(v, dtype=float) for k, v in dict(self.per_plan).items()}
        comp = np.asarray(self.computational, dtype=float)
        arrays = [("computational", comp, dim), *((k, v, dim) for k, v in per_plan.items())]
        base = None if self.base is None else np.asarray(self.base, dtype=float)
        if base is not None:
            arrays.append(("base", base, 2**self.n))
        exact = self.shots == "exact"
        if not exact and (int(self.shots) != self.shots or self.shots < 1):
            raise InputError(f"shots must be a positive integer or 'exact', got {self.shots!r}")
        for name, arr, d in arrays:
            if arr.shape != (d,):
                raise InputError(f"{name}: expected {d} outcomes, got shape {arr.shape}")
            target = 1.0 if exact else float(self.shots)
            if abs(arr.sum() - target) > 1e-8 * max(target, 1.0):
                raise InputError(f"{name}: total {arr.sum()!r} does not match {target!r}")
        object.__setattr__(self, "computational", comp)
        object.__setattr__(self, "per_plan", MappingProxyType(per_plan))
        object.__setattr__(self, "base", base)

    def _norm(self, arr: np.ndarray) -> np.ndarray:
        return arr if self.shots == "exact" else arr / float(self.shots)

    def distribution(self, plan_id: str | None = None) -> np.ndarray:
        if plan_id is None:
            return self._norm(self.computational)
        if plan_id not in self.per_plan:
            raise InputError(f"bundle for basis {self.basis!r} has no measurement for plan {plan_id!r}")
        return self._norm(self.per_plan[plan_id])

    def base_distribution(self) -> np.ndarray:
        if self.base is None:
            raise InputError("bundle carries no base-circuit measurement")
        return self._norm(self.base)


@dataclass(frozen=True)
class CorrectedEstimate:
    numerator: float
    denominator: float
    value: float
    raw_value: float | None = None
    diagnostics: Mapping = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class ReconstructedStatistics:
    """Distribution over the swap eigenbasis.

    Index ``x`` holds: the basis state itself when ``x`` is swap invariant;
    the symmetric combination when ``x`` is the lower member of its pair; the
    antisymmetric combination when it is the upper member.  Entries for
    masks that were not measured are NaN.
    """

    n: int
    probs: np.ndarray
    covered: frozenset[int]
    clamped: float
    missing_mass: float

    def covers(self, mask: int) -> bool:
        return mask in self.covered


def eigenbasis(n: int) -> np.ndarray:
    """Columns are the swap eigenvectors in :class:`ReconstructedStatistics` order."""
    cls = classify_basis(n)
    d = 4**n
    v = np.zeros((d, d))
    for x in cls.invariant_states:
        v[x, x] = 1
    s = 1 / np.sqrt(2)
    for lo, hi in cls.pairs():
        v[[lo, hi], lo] = s
        v[lo, hi], v[hi, hi] = s, -s
    return v


def estimate_s2(bundle: MeasurementBundle, recipe: ReconstructionRecipe, plan_id: str = "s2") -> float:
    """Purity estimate: invariant computational mass plus the signed projection outcomes."""
    return recipe.evaluate(bundle.distribution(), bundle.distribution(plan_id))


def reconstruct_statistics(bundle: MeasurementBundle,
                           classification: BasisClassification | None = None,
                           plans: Sequence[ProjectionPlan] | Mapping[int, ProjectionPlan] = ()) -> ReconstructedStatistics:
    n = bundle.n
    cls = classification or classify_basis(n)
    if isinstance(plans, Mapping):
        plans = list(plans.values())
    comp = bundle.distribution()
    probs = np.full(4**n, np.nan)
    inv = cls.invariant_states
    probs[inv] = comp[inv]
    covered = set()
    for plan in plans:
        if plan.kind != "mask" or plan.plan_id not in bundle.per_plan:
            continue
        dist = bundle.distribution(plan.plan_id)
        for z, (lo, s) in plan.outcome_map.items():
            probs[lo if s > 0 else cls.partner[lo]] = dist[z]
        covered.add(plan.mask)
    missing = 0.0
    for m, pairs in cls.classes.items():
        if m not in covered:
            missing += sum(comp[lo] + comp[hi] for lo, hi in pairs)
    known = ~np.isnan(probs)
    negative = probs[known] < 0
    clamped = float(-probs[known][negative].sum())
    probs[known] = np.clip(probs[known], 0.0, None)
    total = probs[known].sum() + missing
    if total <= 0:
        raise InputError("reconstructed distribution has no mass")
    probs[known] /= total
    return ReconstructedStatistics(n, probs, frozenset(covered), clamped, missing / total)


def symmetrized_eigenvalues(p: PauliString, n: int) -> np.ndarray:
    """Eigenvalue of O_sym S2 on every swap eigenvector (same indexing as the statistics)."""
    o = p.diagonalized().diagonal() if not p.is_diagonal else p.diagonal()
    cls = classify_basis(n)
    idx = np.arange(4**n)
    a, c = idx >> n, idx & ((1 << n) - 1)
    lam = (o[a] + o[c]) / 2.0
    upper = (~cls.invariant) & (idx > cls.partner)
    lam[upper] *= -1
    return lam


def _ratio(num: float, den: float) -> float:
    if abs(den) < PURITY_GUARD:
        raise DegeneratePurityError(f"purity estimate {den!r} is below the guard {PURITY_GUARD}")
    return num / den


def corrected_pauli_expectation(p: PauliString | str, reconstructed: ReconstructedStatistics,
                                s2_value: float) -> CorrectedEstimate:
    """Tr(O S2 rho(x)rho) / Tr(S2 rho(x)rho) for a string already rotated to I/Z form."""
    p = PauliString(p) if isinstance(p, str) else p
    n = reconstructed.n
    lam = symmetrized_eigenvalues(p, n)
    needed = lam != 0
    missing = needed & np.isnan(reconstructed.probs)
    if missing.any():
        cls = classify_basis(n)
        masks = sorted({int(cls.mask[x]) for x in np.flatnonzero(missing)})
        raise CoverageError(f"{p} needs masks {[format(m, f'0{n}b') for m in masks]} that were not measured")
    num = float(np.dot(reconstructed.probs[needed], lam[needed]))
    return CorrectedEstimate(num, s2_value, _ratio(num, s2_value),
                             diagnostics={"clamped": reconstructed.clamped})


def raw_expectation(p: PauliString, base_probs: np.ndarray) -> float:
    return float(np.dot(base_probs, p.diagonalized().diagonal()))


def corrected_energy(h: PauliSum, bundles: Mapping[str, MeasurementBundle], s2_value: float,
                     plans: Mapping[int, ProjectionPlan] | Sequence[ProjectionPlan] = ()) -> CorrectedEstimate:
    """Termwise purified energy; ``bundles`` is keyed by measurement basis."""
    cls = classify_basis(h.n_qubits)
    stats = {}
    num = 0.0
    raw = h.constant
    have_raw = True
    per_term = {}
    for coeff, s in h.terms:
        key = s.basis_key()
        if key not in bundles:
            raise CoverageError(f"no measurement bundle for basis {key}")
        b = bundles[key]
        if key not in stats:
            stats[key] = reconstruct_statistics(b, cls, plans)
        est = corrected_pauli_expectation(s.diagonalized(), stats[key], s2_value)
        num += coeff * est.numerator
        per_term[s.letters] = est.value
        if b.base is not None:
            raw += coeff * raw_expectation(s, b.base_distribution())
        else:
            have_raw = False
    value = _ratio(num, s2_value) + h.constant
    diag = {"terms": per_term, "clamped": sum(st.clamped for st in stats.values())}
    return CorrectedEstimate(num, s2_value, value, raw if have_raw else None, MappingProxyType(diag))


def b_gate_eigenvalues(n: int, local_qubit: int | None = None) -> np.ndarray:
    """Per-outcome eigenvalue of S2, or of Z_sym(q) S2, after B gates on every pair."""
    swap_d, zswap_d = b_gate_pair_diagonal()
    idx = np.arange(4**n)
    a, c = idx >> n, idx & ((1 << n) - 1)
    out = np.ones(4**n)
    for i in range(n):
        pair = (((a >> (n - 1 - i)) & 1) << 1) | ((c >> (n - 1 - i)) & 1)
        out *= (zswap_d if i == local_qubit else swap_d)[pair]
    return out


def b_gate_s2(bundle: MeasurementBundle) -> float:
    return float(np.dot(bundle.distribution("bgate"), b_gate_eigenvalues(bundle.n)))


def b_gate_estimate(h: PauliSum, bundles: Mapping[str, MeasurementBundle], n: int | None = None,
                    plans: Mapping[int, ProjectionPlan] | Sequence[ProjectionPlan] = (),
                    s2_basis: str | None = None) -> CorrectedEstimate:
    """Hybrid estimate: B gates for the purity and 1-local terms, reconstruction otherwise."""
    n = h.n_qubits if n is None else n
    keys = list(bundles)
    s2_key = s2_basis or ("Z" * n if "Z" * n in bundles else keys[0])
    s2 = b_gate_s2(bundles[s2_key])
    cls = classify_basis(n)
    num = 0.0
    raw = h.constant
    have_raw = True
    stats = {}
    for coeff, s in h.terms:
        b = bundles[s.basis_key()]
        if s.weight == 1:
            term_num = float(np.dot(b.distribution("bgate"), b_gate_eigenvalues(n, s.support[0])))
        else:
            key = s.basis_key()
            if key not in stats:
                stats[key] = reconstruct_statistics(b, cls, plans)
            term_num = corrected_pauli_expectation(s.diagonalized(), stats[key], s2).numerator
        num += coeff * term_num
        if b.base is not None:
            raw += coeff * raw_expectation(s, b.base_distribution())
        else:
            have_raw = False
    return CorrectedEstimate(num, s2, _ratio(num, s2) + h.constant, raw if have_raw else None,
                             MappingProxyType({"method": "bgate-hybrid"}))


def masks_for_terms(terms: Sequence[PauliString]) -> list[int]:
    out: set[int] = set()
    for s in terms:
        out |= term_masks(s)
    return sorted(out)

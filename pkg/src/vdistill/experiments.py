"""Experiment configuration and the runners behind the command line."""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .estimate import b_gate_estimate, corrected_energy, estimate_s2
from .exceptions import DegeneratePurityError, InputError, VDError
from .io import HamiltonianFixture, bundled_fixtures, circuit_to_text, load_fixture, write_csv, write_svg
from .measure import sample_bundles, simulate_bundles
from .pauli import PauliSum
from .simcore import NOISELESS, Circuit, NoiseSpec
from .vdcomp import CompiledPlans, compile_plans, mask_bits
from .vqe import AnsatzSpec, OptimizationTrace, build_ansatz, optimize, raw_energy, sweep_1d, sweep_grid

OUTPUT_ENV = "VDISTILL_OUTPUT_DIR"
EXPERIMENTS = ("compile", "depol-sweep", "dissociation", "vqe", "shot-noise")
METHODS = ("raw", "vd", "bgate-hybrid")
DEFAULT_LAMBDAS = tuple(round(0.01 * i, 2) for i in range(11))
# standard deviations of the corrected energy reported for 8196 shots x 100 repetitions
PAPER_SHOT_STD = {2: 1.296e-3, 3: 1.386e-3, 4: 2.038e-3}


@dataclass
class ExperimentConfig:
    experiment: str
    fixture: str | None = None
    fixtures: list[str] = field(default_factory=list)
    system: str | None = None
    distances: list[float] | None = None
    ansatz: dict | None = None
    lambda_grid: list[float] = field(default_factory=lambda: list(DEFAULT_LAMBDAS))
    noise: float = 0.0
    shots: int | str = "exact"
    seed: int = 0
    method: str = "vd"
    restarts: int = 4
    repetitions: int = 100
    grid_points: int = 51
    noisy_readout: bool = True
    output: str | None = None
    svg: str | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> ExperimentConfig:
        if not isinstance(doc, dict):
            raise InputError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise InputError(f"unknown config keys: {unknown}")
        if "experiment" not in doc:
            raise InputError("config needs an 'experiment' key")
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> ExperimentConfig:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(doc)

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise InputError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.method not in METHODS:
            raise InputError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.shots != "exact" and (not isinstance(self.shots, int) or isinstance(self.shots, bool)
                                      or self.shots < 1):
            raise InputError("shots must be a positive integer or 'exact'")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise InputError("seed must be an integer")
        for lam in [*self.lambda_grid, self.noise]:
            if not isinstance(lam, (int, float)) or not 0 <= lam <= 1:
                raise InputError(f"depolarization {lam!r} is outside [0, 1]")
        for name in ("restarts", "repetitions", "grid_points"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise InputError(f"{name} must be a positive integer")
        if self.ansatz is not None:
            extra = set(self.ansatz) - {"kind", "layers", "initial_state"}
            if extra:
                raise InputError(f"unknown ansatz keys: {sorted(extra)}")
        if self.distances is not None and self.system is None:
            raise InputError("distances need a 'system' (e.g. h2_2q)")
        if self.experiment in ("depol-sweep", "vqe", "compile") and not self.fixture:
            raise InputError(f"{self.experiment} needs 'fixture'")

    def as_dict(self) -> dict:
        return asdict(self)


def output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "."))


def _out_path(cfg: ExperimentConfig, default: str) -> Path:
    p = Path(cfg.output) if cfg.output else output_dir() / default
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def default_ansatz(fx: HamiltonianFixture, override: dict | None = None) -> AnsatzSpec:
    override = dict(override or {})
    n = fx.n_qubits
    kind = override.get("kind", "reduced-ucc-2q" if n == 2 else "hardware-efficient")
    hf = fx.meta.get("hartree_fock_state")
    if kind == "reduced-ucc-2q":
        return AnsatzSpec(kind, n)
    return AnsatzSpec(kind, n, int(override.get("layers", 2)), override.get("initial_state", hf))


def find_optimum(fx: HamiltonianFixture, spec: AnsatzSpec, noise: NoiseSpec = NOISELESS, *,
                 restarts: int = 4, seed: int = 0, grid_points: int = 51,
                 warm_start: Sequence[float] | None = None) -> OptimizationTrace:
    """Raw-energy minimum: a 51-angle grid for one parameter, multi-start simplex otherwise."""
    h = fx.hamiltonian
    if spec.n_params == 1:
        return sweep_1d(h, spec, sweep_grid(grid_points), noise)
    trace = optimize(h, spec, noise, restarts=restarts, seed=seed)
    if warm_start is not None:
        extra = optimize(h, spec, noise, restarts=1, seed=seed, x0=warm_start)
        for params, raw, corr in extra.evaluations:
            trace.record(params, raw, corr)
    return trace


@dataclass(frozen=True)
class PointEstimate:
    raw: float
    corrected: float
    s2: float
    bgate: float | None = None
    bgate_s2: float | None = None


def evaluate_point(h: PauliSum, circuit: Circuit, noise: NoiseSpec, *, plans: CompiledPlans,
                   shots: int | str = "exact", seed: int = 0, bgate: bool = False,
                   noisy_readout: bool = True, exact_bundles=None) -> PointEstimate:
    """Simulate every circuit once and return raw, purified and (optionally) B-gate energies."""
    if exact_bundles is None:
        exact_bundles = simulate_bundles(circuit, h, noise, plans=plans, include_bgate=bgate,
                                         noisy_readout=noisy_readout)
    bundles = sample_bundles(exact_bundles, shots, seed)
    first = next(iter(bundles.values()))
    s2 = estimate_s2(first, plans.s2_recipe)
    vd = corrected_energy(h, bundles, s2, plans.mask_plans)
    if not bgate:
        return PointEstimate(vd.raw_value, vd.value, s2)
    bg = b_gate_estimate(h, bundles, plans=plans.mask_plans)
    return PointEstimate(vd.raw_value, vd.value, s2, bg.value, bg.denominator)


class RunResult:
    """CSV text plus whether any row hit a degenerate purity."""

    def __init__(self, path: Path | None, text: str, degenerate: bool = False):
        self.path, self.text, self.degenerate = path, text, degenerate


def _meta(cfg: ExperimentConfig, fixtures: Sequence[HamiltonianFixture], **extra) -> dict:
    meta = {
        "experiment": cfg.experiment,
        "fixture_hash": [f"{f.name}={f.digest}" for f in fixtures],
        "seed": cfg.seed,
        "shots": cfg.shots,
        "noisy_readout": cfg.noisy_readout,
    }
    meta.update(extra)
    return meta


def _error_tag(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}".replace("\n", " ")


def run_depol_sweep(cfg: ExperimentConfig) -> RunResult:
    fx = load_fixture(cfg.fixture)
    h = fx.hamiltonian
    spec = default_ansatz(fx, cfg.ansatz)
    trace = find_optimum(fx, spec, restarts=cfg.restarts, seed=cfg.seed, grid_points=cfg.grid_points)
    params = trace.best_params
    circuit = build_ansatz(spec, params)
    ideal = raw_energy(h, circuit)
    plans = compile_plans(h)
    bgate = cfg.method == "bgate-hybrid"
    header = ["lambda", "raw_energy", "corrected_energy", "ideal_energy", "s2_value"]
    if bgate:
        header += ["bgate_energy", "bgate_s2"]
    header.append("error")
    rows, degenerate = [], False
    for i, lam in enumerate(cfg.lambda_grid):
        noise = NoiseSpec(float(lam))
        try:
            pt = evaluate_point(h, circuit, noise, plans=plans, shots=cfg.shots, seed=cfg.seed + i,
                                bgate=bgate, noisy_readout=cfg.noisy_readout)
            row = [float(lam), pt.raw, pt.corrected, ideal, pt.s2]
            if bgate:
                row += [pt.bgate, pt.bgate_s2]
            row.append("")
        except VDError as exc:
            degenerate |= isinstance(exc, DegeneratePurityError)
            row = [float(lam)] + [float("nan")] * (len(header) - 2) + [_error_tag(exc)]
        rows.append(row)
    meta = _meta(cfg, [fx], lambda_grid=list(map(float, cfg.lambda_grid)), method=cfg.method,
                 ansatz=f"{spec.kind}/{spec.layers}", parameters=[float(p) for p in params])
    path = _out_path(cfg, f"depol_{fx.name.removesuffix('.json')}.csv")
    text = write_csv(path, header, rows, meta)
    if cfg.svg:
        series = {"raw": [r[1] for r in rows], "corrected": [r[2] for r in rows], "ideal": [r[3] for r in rows]}
        if bgate:
            series["B gate"] = [r[5] for r in rows]
        write_svg(cfg.svg, [r[0] for r in rows], series, f"{fx.name} at optimum", "depolarization", "energy (Ha)")
    return RunResult(path, text, degenerate)


def _dissociation_fixtures(cfg: ExperimentConfig) -> list[HamiltonianFixture]:
    if cfg.system is not None:
        names = bundled_fixtures(cfg.system)
        if cfg.distances is not None:
            want = {f"{cfg.system}_{float(d):.2f}" for d in cfg.distances}
            missing = want - set(names)
            if missing:
                raise InputError(f"no bundled fixture for {sorted(missing)}")
            names = [n for n in names if n in want]
        return [load_fixture(n) for n in names]
    paths = cfg.fixtures or ([cfg.fixture] if cfg.fixture else [])
    return [load_fixture(p) for p in paths]


def run_dissociation(cfg: ExperimentConfig) -> RunResult:
    fxs = _dissociation_fixtures(cfg)
    fxs.sort(key=lambda f: (f.meta.get("distance_angstrom", math.inf), f.name))
    noise = NoiseSpec(float(cfg.noise))
    header = ["fixture", "distance", "exact_energy", "raw_energy", "corrected_energy", "s2_value", "error"]
    rows, degenerate, warm = [], False, None
    for i, fx in enumerate(fxs):
        h = fx.hamiltonian
        spec = default_ansatz(fx, cfg.ansatz)
        try:
            trace = find_optimum(fx, spec, noise, restarts=cfg.restarts, seed=cfg.seed,
                                 grid_points=cfg.grid_points, warm_start=warm)
            warm = trace.best_params if spec.n_params > 1 else None
            pt = evaluate_point(h, build_ansatz(spec, trace.best_params), noise, plans=compile_plans(h),
                                shots=cfg.shots, seed=cfg.seed + i, noisy_readout=cfg.noisy_readout)
            rows.append([fx.name, fx.distance, fx.exact_energy, pt.raw, pt.corrected, pt.s2, ""])
        except VDError as exc:
            degenerate |= isinstance(exc, DegeneratePurityError)
            rows.append([fx.name, fx.distance, fx.exact_energy, float("nan"), float("nan"), float("nan"),
                         _error_tag(exc)])
    meta = _meta(cfg, fxs, **{"lambda": float(cfg.noise)})
    path = _out_path(cfg, f"dissociation_{cfg.system or 'custom'}.csv")
    text = write_csv(path, header, rows, meta)
    if cfg.svg and rows:
        write_svg(cfg.svg, [r[1] for r in rows],
                  {"exact": [r[2] for r in rows], "raw": [r[3] for r in rows], "corrected": [r[4] for r in rows]},
                  "dissociation", "distance (A)", "energy (Ha)")
    return RunResult(path, text, degenerate)


def run_vqe(cfg: ExperimentConfig) -> RunResult:
    fx = load_fixture(cfg.fixture)
    h = fx.hamiltonian
    spec = default_ansatz(fx, cfg.ansatz)
    noise = NoiseSpec(float(cfg.noise))
    trace = find_optimum(fx, spec, noise, restarts=cfg.restarts, seed=cfg.seed, grid_points=cfg.grid_points)
    best = trace.best_params
    error, degenerate, corrected = "", False, float("nan")
    try:
        corrected = evaluate_point(h, build_ansatz(spec, best), noise, plans=compile_plans(h), shots=cfg.shots,
                                   seed=cfg.seed, noisy_readout=cfg.noisy_readout).corrected
    except VDError as exc:
        degenerate, error = isinstance(exc, DegeneratePurityError), _error_tag(exc)
    header = ["index", "parameters", "raw_energy", "corrected_energy", "best", "error"]
    rows = [[i, ";".join(repr(p) for p in params), raw, None, int(i == trace.best), ""]
            for i, (params, raw, _) in enumerate(trace.evaluations)]
    rows.append(["best", ";".join(repr(p) for p in best), trace.best_energy, corrected, 1, error])
    meta = _meta(cfg, [fx], **{"lambda": float(cfg.noise), "ansatz": f"{spec.kind}/{spec.layers}",
                               "optimizer": trace.settings.get("method"), "restarts": cfg.restarts})
    path = _out_path(cfg, f"vqe_{fx.name.removesuffix('.json')}.csv")
    return RunResult(path, write_csv(path, header, rows, meta), degenerate)


def shot_noise_std(fx: HamiltonianFixture, params: Sequence[float], spec: AnsatzSpec, shots: int | str,
                   repetitions: int, seed: int = 0, noisy_readout: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Corrected and raw energies over ``repetitions`` seeded shot draws (no gate noise)."""
    h = fx.hamiltonian
    plans = compile_plans(h)
    circuit = build_ansatz(spec, params)
    exact = simulate_bundles(circuit, h, NOISELESS, plans=plans, noisy_readout=noisy_readout)
    corr, raw = [], []
    for r in range(repetitions):
        pt = evaluate_point(h, circuit, NOISELESS, plans=plans, shots=shots, seed=seed + r, exact_bundles=exact)
        corr.append(pt.corrected)
        raw.append(pt.raw)
    return np.array(corr), np.array(raw)


def _spread(values: np.ndarray) -> float:
    # identical repetitions (exact mode) give exactly zero, not mean-rounding noise
    if values.size < 2 or np.ptp(values) == 0:
        return 0.0
    return float(np.std(values, ddof=1))


def run_shot_noise(cfg: ExperimentConfig) -> RunResult:
    paths = cfg.fixtures or ([cfg.fixture] if cfg.fixture else [])
    fxs = [load_fixture(p) for p in paths]
    shots = cfg.shots
    header = ["fixture", "n_qubits", "shots", "repetitions", "mean_corrected", "std_corrected", "std_raw",
              "reference_std", "ratio", "error"]
    rows, degenerate = [], False
    for fx in fxs:
        spec = default_ansatz(fx, cfg.ansatz)
        ref = PAPER_SHOT_STD.get(fx.n_qubits)
        try:
            trace = find_optimum(fx, spec, restarts=cfg.restarts, seed=cfg.seed, grid_points=cfg.grid_points)
            corr, raw = shot_noise_std(fx, trace.best_params, spec, shots, cfg.repetitions, cfg.seed)
            sd = _spread(corr)
            rows.append([fx.name, fx.n_qubits, shots, cfg.repetitions, float(corr.mean()), sd, _spread(raw), ref,
                         sd / ref if ref else None, ""])
        except VDError as exc:
            degenerate |= isinstance(exc, DegeneratePurityError)
            rows.append([fx.name, fx.n_qubits, shots, cfg.repetitions] + [None] * 5 + [_error_tag(exc)])
    meta = _meta(cfg, fxs, **{"lambda": 0.0, "repetitions": cfg.repetitions})
    path = _out_path(cfg, "shot_noise.csv")
    return RunResult(path, write_csv(path, header, rows, meta), degenerate)


def run_compile(cfg: ExperimentConfig) -> RunResult:
    fx = load_fixture(cfg.fixture)
    plans = compile_plans(fx.hamiltonian)
    n = plans.n
    out = Path(cfg.output) if cfg.output else output_dir() / f"plans_{fx.name.removesuffix('.json')}"
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for m in plans.masks:
        plan = plans.mask_plans[m]
        name = f"mask_{mask_bits(m, n)}"
        (out / f"{name}.txt").write_text(circuit_to_text(plan.circuit))
        outcomes = {format(z, f"0{2 * n}b"): {"state": format(lo, f"0{2 * n}b"), "sign": s}
                    for z, (lo, s) in sorted(plan.outcome_map.items())}
        (out / f"{name}.json").write_text(json.dumps(outcomes, indent=1, sort_keys=True) + "\n")
        written.append(name)
    (out / "s2.txt").write_text(circuit_to_text(plans.s2_plan.circuit))
    (out / "s2_recipe.json").write_text(json.dumps(plans.s2_recipe.as_json(), indent=1, sort_keys=True) + "\n")
    (out / "bgate.txt").write_text(circuit_to_text(plans.b_gate))
    index = {"fixture": fx.name, "fixture_hash": fx.digest, "n_qubits": n,
             "mask_plans": written, "s2_plan": "s2", "b_gate": "bgate"}
    (out / "plans.json").write_text(json.dumps(index, indent=1) + "\n")
    return RunResult(out, json.dumps(index))


RUNNERS = {
    "compile": run_compile,
    "depol-sweep": run_depol_sweep,
    "dissociation": run_dissociation,
    "vqe": run_vqe,
    "shot-noise": run_shot_noise,
}


def run(cfg: ExperimentConfig) -> RunResult:
    return RUNNERS[cfg.experiment](cfg)

"""Fixture loading, circuit text format, CSV and SVG writers."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import __version__
from .exceptions import InputError
from .pauli import PauliSum, exact_diagonalize
from .simcore import GATE_KINDS, Circuit, Gate

FIXTURE_TOL = 1e-8
FIXTURE_KEYS = {"n_qubits", "terms", "constant", "exact_energy", "meta"}
_GATE_NAMES = {k.upper(): k for k in GATE_KINDS}


@dataclass(frozen=True)
class HamiltonianFixture:
    name: str
    hamiltonian: PauliSum
    exact_energy: float
    meta: Mapping
    digest: str

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits

    @property
    def distance(self) -> float | None:
        return self.meta.get("distance_angstrom")


def _digest(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()[:16]


def parse_fixture(raw: bytes | str, name: str = "<memory>", check: bool = True) -> HamiltonianFixture:
    raw = raw.encode() if isinstance(raw, str) else raw
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"{name}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise InputError(f"{name}: fixture must be a JSON object")
    missing = FIXTURE_KEYS - set(doc)
    if missing:
        raise InputError(f"{name}: missing keys {sorted(missing)}")
    try:
        terms = {t["pauli"]: float(t["coeff"]) for t in doc["terms"]}
        h = PauliSum.from_dict(terms, float(doc["constant"]), n_qubits=int(doc["n_qubits"]),
                               meta=doc["meta"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{name}: bad term list ({exc})") from None
    exact = float(doc["exact_energy"])
    if check:
        ground = exact_diagonalize(h).ground_energy
        if abs(ground - exact) > FIXTURE_TOL:
            raise InputError(f"{name}: ground energy {ground!r} disagrees with exact_energy {exact!r}")
    return HamiltonianFixture(name, h, exact, dict(doc["meta"]), _digest(raw))


def load_fixture(path: str | Path, check: bool = True) -> HamiltonianFixture:
    p = Path(path)
    if not p.exists():
        fname = p.name if p.name.endswith(".json") else p.name + ".json"
        bundled = resources.files("vdistill") / "fixtures" / fname
        if not bundled.is_file():
            raise InputError(f"fixture {path} not found")
        return parse_fixture(bundled.read_bytes(), bundled.name, check)
    return parse_fixture(p.read_bytes(), p.name, check)


def bundled_fixtures(system: str | None = None) -> list[str]:
    """Names of the shipped fixtures, e.g. ``h2_2q_2.00``."""
    root = resources.files("vdistill") / "fixtures"
    names = sorted(f.name[:-5] for f in root.iterdir() if f.name.endswith(".json"))
    return [n for n in names if system is None or n.rsplit("_", 1)[0] == system]


def fixture_to_json(h: PauliSum, exact_energy: float, meta: Mapping) -> str:
    doc = {
        "n_qubits": h.n_qubits,
        "terms": [{"pauli": s.letters, "coeff": c} for c, s in h.terms],
        "constant": h.constant,
        "exact_energy": exact_energy,
        "meta": dict(meta),
    }
    return json.dumps(doc, indent=1, sort_keys=True)


# circuit text format

def circuit_to_text(circuit: Circuit) -> str:
    lines = [f"# qubits: {circuit.n_qubits}, convention: big-endian"]
    if circuit.label:
        lines.append(f"# label: {circuit.label}")
    for g in circuit.gates:
        parts = [g.kind.upper(), ",".join(map(str, g.qubits))]
        if g.kind == "Permute":
            parts.append(",".join(str(int(p)) for p in g.params))
        elif g.params:
            parts.append(",".join(repr(p) for p in g.params))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str) -> Circuit:
    n = None
    label = ""
    gates = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("qubits:"):
                try:
                    n = int(body.split(",")[0].split(":")[1])
                except ValueError:
                    raise InputError(f"line {lineno}: bad qubit header") from None
            elif body.startswith("label:"):
                label = body.split(":", 1)[1].strip()
            continue
        fields = line.split()
        if fields[0].upper() not in _GATE_NAMES or len(fields) not in (2, 3):
            raise InputError(f"line {lineno}: cannot parse {line!r}")
        try:
            qubits = tuple(int(q) for q in fields[1].split(","))
            params = tuple(float(p) for p in fields[2].split(",")) if len(fields) == 3 else ()
        except ValueError:
            raise InputError(f"line {lineno}: bad operand in {line!r}") from None
        gates.append(Gate(_GATE_NAMES[fields[0].upper()], qubits, params))
    if n is None:
        raise InputError("missing '# qubits: N' header")
    return Circuit(n, gates, label)


# CSV with metadata header

def metadata_block(meta: Mapping) -> list[str]:
    fields = {"tool_version": __version__, **meta}
    return [f"# {k}: {_fmt_meta(v)}" for k, v in fields.items()]


def _fmt_meta(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt_meta(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def write_csv(path: str | Path | None, header: Sequence[str], rows: Iterable[Sequence],
              meta: Mapping) -> str:
    buf = io.StringIO()
    for line in metadata_block(meta):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt_cell(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv(path_or_text: str | Path) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Inverse of :func:`write_csv`: (metadata, rows as dicts of strings)."""
    p = Path(path_or_text) if not str(path_or_text).startswith("#") else None
    text = p.read_text() if p is not None else str(path_or_text)
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# ") and ": " in line and not body:
            k, v = line[2:].split(": ", 1)
            meta[k] = v
        else:
            body.append(line)
    return meta, list(csv.DictReader(body))


# minimal SVG line plot

def write_svg(path: str | Path, x: Sequence[float], series: Mapping[str, Sequence[float]],
              title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    width, height, pad = 640, 420, 60
    ys = [v for vals in series.values() for v in vals if v is not None and math.isfinite(v)]
    xs = [float(v) for v in x]
    if not xs or not ys:
        raise InputError("nothing to plot")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def px(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def py(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
           f'<text x="{width / 2}" y="{pad / 2}" text-anchor="middle">{title}</text>',
           f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle">{xlabel}</text>',
           f'<text x="15" y="{height / 2}" transform="rotate(-90 15 {height / 2})" text-anchor="middle">{ylabel}</text>',
           f'<text x="{pad}" y="{height - pad + 15}" font-size="10">{x0:.3g}</text>',
           f'<text x="{width - pad}" y="{height - pad + 15}" font-size="10" text-anchor="end">{x1:.3g}</text>',
           f'<text x="{pad - 5}" y="{height - pad}" font-size="10" text-anchor="end">{y0:.4g}</text>',
           f'<text x="{pad - 5}" y="{pad}" font-size="10" text-anchor="end">{y1:.4g}</text>']
    for i, (name, vals) in enumerate(series.items()):
        c = colors[i % len(colors)]
        pts = " ".join(f"{px(a):.1f},{py(b):.1f}" for a, b in zip(xs, vals)
                       if b is not None and math.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{width - pad + 5}" y="{pad + 15 * i}" font-size="11" fill="{c}">{name}</text>')
    out.append("</svg>")
    svg = "\n".join(out) + "\n"
    Path(path).write_text(svg)
    return svg

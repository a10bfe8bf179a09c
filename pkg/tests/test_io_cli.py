import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vdistill.cli import main
from vdistill.exceptions import InputError
from vdistill.experiments import ExperimentConfig, run
from vdistill.io import (
    bundled_fixtures,
    circuit_from_text,
    circuit_to_text,
    fixture_to_json,
    load_fixture,
    parse_fixture,
    read_csv,
)
from vdistill.pauli import PauliSum
from vdistill.simcore import Circuit, Gate
from vdistill.vdcomp import build_b_gate, build_mask_projection, build_s2_projection
from vdistill.vqe import AnsatzSpec, build_ansatz


def test_bundled_fixtures_load():
    names = bundled_fixtures()
    assert len(names) >= 23
    for system in ("h2_2q", "h3_3q", "h2_4q"):
        assert bundled_fixtures(system)
    fx = load_fixture("h3_3q_2.00")
    assert fx.n_qubits == 3 and fx.distance == pytest.approx(2.0)


def test_fixture_round_trip_and_check():
    h = PauliSum.from_dict({"ZI": 0.5, "XX": 0.2}, constant=0.1)
    text = fixture_to_json(h, -0.4385164807134504, {"molecule": "toy"})
    fx = parse_fixture(text)
    assert fx.hamiltonian.to_dict() == h.to_dict()
    bad = json.loads(text)
    bad["exact_energy"] = 0.0
    with pytest.raises(InputError):
        parse_fixture(json.dumps(bad))
    with pytest.raises(InputError):
        parse_fixture("{not json")


@pytest.mark.parametrize("circuit", [
    build_mask_projection(3, "101").circuit,
    build_s2_projection(2).circuit,
    build_b_gate(2),
    build_ansatz(AnsatzSpec("hardware-efficient", 3, 2, "010"), np.linspace(-3, 3, 18)),
])
def test_circuit_text_round_trip(circuit):
    text = circuit_to_text(circuit)
    assert text.startswith(f"# qubits: {circuit.n_qubits}, convention: big-endian")
    back = circuit_from_text(text)
    assert back.n_qubits == circuit.n_qubits
    assert [(g.kind, g.qubits, g.params) for g in back.gates] == [(g.kind, g.qubits, g.params) for g in circuit.gates]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["H", "Rx", "Ry", "Rz", "CNOT", "S"]),
                          st.integers(0, 2), st.integers(0, 2), st.floats(-10, 10)), max_size=12))
def test_circuit_text_round_trip_random(spec):
    gates = []
    for kind, a, b, angle in spec:
        if kind == "CNOT":
            if a == b:
                continue
            gates.append(Gate(kind, (a, b)))
        elif kind.startswith("R"):
            gates.append(Gate(kind, (a,), (angle,)))
        else:
            gates.append(Gate(kind, (a,)))
    c = Circuit(3, gates)
    back = circuit_from_text(circuit_to_text(c))
    assert [(g.kind, g.qubits, g.params) for g in back.gates] == [(g.kind, g.qubits, g.params) for g in c.gates]


def test_circuit_text_errors():
    with pytest.raises(InputError):
        circuit_from_text("H 0\n")
    with pytest.raises(InputError):
        circuit_from_text("# qubits: 2, convention: big-endian\nFOO 0\n")


def test_config_validation():
    with pytest.raises(InputError):
        ExperimentConfig.from_dict({"experiment": "compile", "fixture": "x", "colour": 1})
    with pytest.raises(InputError):
        ExperimentConfig.from_dict({"experiment": "depol-sweep", "fixture": "x", "lambda_grid": [2.0]})
    with pytest.raises(InputError):
        ExperimentConfig.from_dict({"experiment": "nope"})


def test_compile_outputs(tmp_path):
    out = tmp_path / "h3"
    assert main(["compile", "--fixture", "h3_3q_2.00", "-o", str(out)]) == 0
    masks = sorted(p.name for p in out.glob("mask_*.txt"))
    assert len(masks) == 7
    assert (out / "s2.txt").exists() and (out / "bgate.txt").exists()
    recipe = json.loads((out / "s2_recipe.json").read_text())
    assert set(recipe["projection"].values()) <= {-1, 1}
    out4 = tmp_path / "h4"
    assert main(["compile", "--fixture", "h2_4q_2.00", "-o", str(out4)]) == 0
    assert len(list(out4.glob("mask_*.txt"))) == 15
    out2 = tmp_path / "h2"
    assert main(["compile", "--fixture", "h2_2q_2.00", "-o", str(out2)]) == 0
    c = circuit_from_text((out2 / "mask_11.txt").read_text())
    assert [(g.kind, g.qubits) for g in c.gates] == [
        ("CNOT", (2, 3)), ("CNOT", (1, 2)), ("CNOT", (0, 1)), ("H", (0,))]


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert main(["compile", "--fixture", str(bad)]) == 2
    assert main(["compile", "--fixture", "no_such_fixture"]) == 2
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "compile", "fixture": "h2_2q_2.00", "extra": 1}))
    assert main(["compile", str(cfg)]) == 2
    assert "error" in capsys.readouterr().err


def test_depol_sweep_csv(tmp_path, monkeypatch):
    monkeypatch.setenv("VDISTILL_OUTPUT_DIR", str(tmp_path))
    assert main(["depol-sweep", "--fixture", "h2_2q_2.00", "--lambda-grid", "0,0.03",
                 "--method", "bgate-hybrid", "--svg", str(tmp_path / "s.svg")]) == 0
    path = tmp_path / "depol_h2_2q_2.00.csv"
    first = path.read_bytes()
    meta, rows = read_csv(path)
    for key in ("fixture_hash", "seed", "shots", "lambda", "tool_version"):
        assert any(key in k for k in meta)
    assert [float(r["lambda"]) for r in rows] == [0.0, 0.03]
    r0 = rows[0]
    assert float(r0["raw_energy"]) == pytest.approx(float(r0["ideal_energy"]), abs=1e-9)
    assert float(r0["corrected_energy"]) == pytest.approx(float(r0["ideal_energy"]), abs=1e-9)
    r1 = rows[1]
    assert float(r1["bgate_energy"]) < float(r1["ideal_energy"])
    assert (tmp_path / "s.svg").read_text().startswith("<svg")
    assert main(["depol-sweep", "--fixture", "h2_2q_2.00", "--lambda-grid", "0,0.03",
                 "--method", "bgate-hybrid"]) == 0
    assert path.read_bytes() == first


def _dissociation(tmp_path, **extra):
    cfg = ExperimentConfig.from_dict({"experiment": "dissociation", "system": "h2_2q",
                                      "output": str(tmp_path / "d.csv"), **extra})
    _, rows = read_csv(run(cfg).path)
    return [(float(r["distance"]), float(r["exact_energy"]), float(r["raw_energy"]), float(r["corrected_energy"]))
            for r in rows]


def test_dissociation_corrected_beats_raw(tmp_path):
    rows = _dissociation(tmp_path, noise=0.03)
    assert len(rows) == len(bundled_fixtures("h2_2q"))
    worse = [(d, corr - exact, raw - exact) for d, exact, raw, corr in rows if abs(corr - exact) >= abs(raw - exact)]
    assert not worse, worse


def test_dissociation_corrected_beats_raw_clean_projections(tmp_path):
    rows = _dissociation(tmp_path, noise=0.03, noisy_readout=False)
    assert all(abs(corr - exact) < abs(raw - exact) for _, exact, raw, corr in rows)


def test_dissociation_noiseless_tracks_exact(tmp_path):
    cfg = ExperimentConfig.from_dict({"experiment": "dissociation", "system": "h2_2q",
                                      "distances": [0.5, 1.0, 1.5, 2.5], "output": str(tmp_path / "d.csv")})
    _, rows = read_csv(run(cfg).path)
    assert all(abs(float(r["corrected_energy"]) - float(r["exact_energy"])) < 1e-3 for r in rows)


def test_empty_distance_list(tmp_path):
    cfg = ExperimentConfig.from_dict({"experiment": "dissociation", "system": "h2_2q", "distances": [],
                                      "output": str(tmp_path / "e.csv")})
    meta, rows = read_csv(run(cfg).path)
    assert rows == []
    lines = [ln for ln in (tmp_path / "e.csv").read_text().splitlines() if not ln.startswith("#")]
    assert lines == ["fixture,distance,exact_energy,raw_energy,corrected_energy,s2_value,error"]


def test_shot_noise_exact_mode(tmp_path):
    cfg = ExperimentConfig.from_dict({"experiment": "shot-noise", "fixtures": ["h2_2q_2.00"], "shots": "exact",
                                      "repetitions": 3, "output": str(tmp_path / "s.csv")})
    _, rows = read_csv(run(cfg).path)
    assert float(rows[0]["std_corrected"]) == 0.0
    assert float(rows[0]["reference_std"]) == pytest.approx(1.296e-3)


def test_vqe_csv_is_deterministic(tmp_path):
    args = ["vqe", "--fixture", "h2_2q_2.00", "-o", str(tmp_path / "v.csv")]
    assert main(args) == 0
    first = (tmp_path / "v.csv").read_bytes()
    assert main(args) == 0
    assert (tmp_path / "v.csv").read_bytes() == first
    _, rows = read_csv(tmp_path / "v.csv")
    best = rows[-1]
    assert float(best["raw_energy"]) == pytest.approx(load_fixture("h2_2q_2.00").exact_energy, abs=1e-3)


@pytest.mark.slow
def test_vqe_restarts_deterministic_he(tmp_path):
    cfg = {"experiment": "vqe", "fixture": "h3_3q_2.00", "restarts": 5, "seed": 7}
    paths = []
    for i in range(2):
        p = tmp_path / f"v{i}.json"
        p.write_text(json.dumps({**cfg, "output": str(tmp_path / f"v{i}.csv")}))
        assert main(["vqe", str(p)]) == 0
        paths.append(tmp_path / f"v{i}.csv")
    assert paths[0].read_bytes() == paths[1].read_bytes()
    _, rows = read_csv(paths[0])
    assert float(rows[-1]["raw_energy"]) == pytest.approx(load_fixture("h3_3q_2.00").exact_energy, abs=1e-3)

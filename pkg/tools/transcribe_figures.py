"""Freeze the projection circuits printed as Qcircuit figures into JSON.

Reads the appendix figures app5..app10 from paper.md, walks each circuit
column by column and emits gates as "KIND q0[,q1]" strings.  Only CNOT
(ctrl/targ pairs) and H appear in these figures.

    python tools/transcribe_figures.py paper.md tests/oracles/paper_circuits.json
"""
import json
import re
import sys

FIGS = ["app5", "app6", "app7", "app8", "app9", "app10"]


def figure_blocks(text, label):
    end = text.index(f"\\label{{fig:{label}}}")
    start = text.rfind("\\begin{figure", 0, end)
    return [m.group(1) for m in re.finditer(r"\\Qcircuit.*?\{ \\\\(.*?)\\\\ \}\}", text[start:end], re.S)]


def parse_block(block):
    rows = []
    for line in block.strip().splitlines():
        line = line.strip()
        if not line.startswith("\\nghost"):
            continue
        cells = [c.strip() for c in line.rstrip("\\").split("&")][2:]
        rows.append(cells)
    gates = []
    width = max(len(r) for r in rows)
    for col in range(width):
        for q, r in enumerate(rows):
            cell = r[col] if col < len(r) else "\\qw"
            m = re.match(r"\\ctrl\{(-?\d+)\}", cell)
            if m:
                gates.append(f"CNOT {q},{q + int(m.group(1))}")
            elif cell == "\\gate{\\mathrm{H}}":
                gates.append(f"H {q}")
            elif cell not in ("\\qw", "\\targ", ""):
                raise ValueError(f"unexpected cell {cell!r}")
    return {"n_qubits": len(rows), "gates": gates}


def main(src, dst):
    text = open(src).read()
    out = {label: [parse_block(b) for b in figure_blocks(text, label)] for label in FIGS}
    with open(dst, "w") as f:
        json.dump(out, f, indent=1)
    for k, v in out.items():
        print(k, len(v))


if __name__ == "__main__":
    main(*sys.argv[1:3])

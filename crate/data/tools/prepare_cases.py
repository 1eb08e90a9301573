"""Regenerate the bundled MATPOWER-format case files and reference objectives.

Requires PYPOWER (pip install pypower). The IEEE/EPRI cases are written out
unchanged; ``case14_congested`` is the IEEE 14-bus case with every load scaled
by 1.2 and real-power ratings of 110 MW (1-2) and 55 MW (1-5).

Reference objectives come from PYPOWER's interior-point AC OPF (a local
method; its limits on rate_a are apparent-power limits, which are at least as
tight as the real-power limits used by the relaxations, so the values are
valid upper bounds on the real-power-limited exact optimum).
"""
import json
import os
import sys
import warnings

import numpy as np
from pypower import case9, case14, case30, case39, case57, case118, case300
from pypower.api import ppoption, runopf

warnings.filterwarnings("ignore")
HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "cases")


def congested14():
    ppc = case14.case14()
    ppc["bus"][:, 2:4] *= 1.2
    ppc["branch"][0, 5] = 110.0
    ppc["branch"][1, 5] = 55.0
    return ppc


CASES = [
    ("case9", "typical", case9.case9),
    ("case14", "typical", case14.case14),
    ("case14_congested", "congested", congested14),
    ("case30", "typical", case30.case30),
    ("case39", "typical", case39.case39),
    ("case57", "typical", case57.case57),
    ("case118", "typical", case118.case118),
    ("case300", "typical", case300.case300),
]


def fmt_row(row, ncols):
    vals = []
    for v in row[:ncols]:
        v = float(v)
        vals.append(str(int(v)) if v == int(v) and abs(v) < 1e15 else repr(v))
    return "\t" + "\t".join(vals) + ";"


def write_m(name, ppc, path):
    lines = [
        f"function mpc = {name}",
        "%% MATPOWER case format, version 2",
        "mpc.version = '2';",
        "",
        "%% system MVA base",
        f"mpc.baseMVA = {float(ppc['baseMVA']):g};",
        "",
        "%% bus data",
        "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin",
        "mpc.bus = [",
    ]
    lines += [fmt_row(r, 13) for r in ppc["bus"]]
    lines += ["];", "", "%% generator data",
              "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin",
              "mpc.gen = ["]
    lines += [fmt_row(r, 10) for r in ppc["gen"]]
    lines += ["];", "", "%% branch data",
              "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax",
              "mpc.branch = ["]
    lines += [fmt_row(r, 13) for r in ppc["branch"]]
    lines += ["];", "", "%% generator cost data",
              "%\t2\tstartup\tshutdown\tn\tc(n-1)\t...\tc0",
              "mpc.gencost = ["]
    lines += [fmt_row(r, 4 + int(r[3])) for r in ppc["gencost"]]
    lines += ["];", ""]
    with open(path, "w") as f:
        f.write("\n".join(lines))


def main():
    opt = ppoption(VERBOSE=0, OUT_ALL=0)
    refs = []
    for name, cond, make in CASES:
        ppc = make()
        write_m(name, ppc, os.path.join(OUT, name + ".m"))
        res = runopf(make(), opt)
        if not res["success"]:
            print(f"{name}: OPF failed", file=sys.stderr)
            continue
        refs.append({
            "case": name,
            "condition": cond,
            "ob_ac": round(float(res["f"]), 6),
            "source": "local-heuristic",
            "vm": [round(float(v), 8) for v in res["bus"][:, 7]],
        })
        print(name, cond, res["f"])
    with open(os.path.join(HERE, "..", "refs.json"), "w") as f:
        json.dump(refs, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()

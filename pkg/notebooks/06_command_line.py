"""
Command-line workflow
=====================

Write a CSV, estimate the treatment effect with ``doubleselect fit``,
and read the JSON report back. The same entry point is available as the
``doubleselect`` console script.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from doubleselect.cli import main
from doubleselect.data import Dataset
from doubleselect.numerics import RngStream
from doubleselect.simulation import DesignSpec, generate_replication

workdir = Path(tempfile.mkdtemp())

###############################################################################
# A data file with one outcome, one treatment and 200 controls
# ------------------------------------------------------------
draw = generate_replication(DesignSpec(1, r2_y=0.5, r2_d=0.5, seed=6), RngStream(6))
names = [f"x{j + 1}" for j in range(draw.X.shape[1])]
Dataset("y", "d", names, [], np.column_stack([draw.y, draw.d, draw.X])).to_csv(workdir / "data.csv")

###############################################################################
# Estimate
# --------
code = main(["fit", "--data", str(workdir / "data.csv"), "--outcome", "y",
             "--treatment", "d", "--controls-all-others", "--seed", "6",
             "--out", str(workdir / "fit.json")])
report = json.loads((workdir / "fit.json").read_text())
print("exit code", code)
print("selected for treatment:", report["selected_for_treatment"])
print("selected for outcome  :", report["selected_for_outcome"])
print("95% CI (plug-in)      :", np.round(report["ci_plugin"], 3))

###############################################################################
# Simulate and diagnose
# ---------------------
main(["simulate", "--design", "1", "--r2-grid", "0.5,0.5", "--reps", "20",
      "--estimators", "ds-oracle,double-selection", "--seed", "1",
      "--out", str(workdir / "sim")])
print((workdir / "sim" / "summary.csv").read_text())
main(["diagnose", "--data", str(workdir / "data.csv"), "--controls", "x1,x2,x3,x4,x5",
      "--m", "3", "--out", str(workdir / "eig.json")])
print(json.loads((workdir / "eig.json").read_text()))

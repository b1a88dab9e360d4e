"""Golden regression: the shipped scenarios reproduce their stored results."""

import json
from pathlib import Path

import numpy as np
import pytest

from tanlift.cli import main

ROOT = Path(__file__).resolve().parents[1]
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"
GOLDEN_FILES = sorted(GOLDEN_DIR.glob("*.json"))


def _lookup(report, path):
    node = report
    for key in path:
        node = node[key]
    return node


def _cases():
    for golden_path in GOLDEN_FILES:
        spec = json.loads(golden_path.read_text())
        for run in spec["runs"]:
            yield pytest.param(
                spec["scenario"], run, id=f"{golden_path.stem}-{run['command']}"
            )


@pytest.mark.parametrize("scenario_rel, run", list(_cases()))
def test_golden_run(scenario_rel, run, capsys):
    scenario = ROOT / scenario_rel
    code = main([run["command"], "--scenario", str(scenario)])
    report = json.loads(capsys.readouterr().out)
    assert code == 0, f"{run['command']} on {scenario_rel} exited {code}"
    for check in run["checks"]:
        actual = _lookup(report, check["path"])
        expected = check["value"]
        label = ".".join(map(str, check["path"]))
        if "tol" in check:
            assert np.allclose(actual, expected, atol=check["tol"], rtol=0.0), (
                f"{label}: {actual} != {expected} within {check['tol']}"
            )
        else:
            assert actual == expected, f"{label}: {actual} != {expected}"

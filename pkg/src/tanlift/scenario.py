"""Scenario documents: JSON descriptions of fields, systems, and run inputs.

A scenario names a built-in chart, defines vector fields through
coefficient expressions, and optionally configures a vertical system
block, a lifted system block, and parameters for the identity battery
and the bump-convergence study.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .controls import ControlSignal
from .errors import ExpressionError, ScenarioError
from .expressions import fiber_dynamics_from_expressions, field_from_expressions
from .lifted import LiftedSystem
from .manifold import ChartManifold, TangentPoint, builtin_manifold
from .vertical import GeneralVerticalSystem, VerticalAffineSystem

SCHEMA = "tanlift-scenario-v1"


@dataclass(frozen=True)
class BumpStudy:
    """Parameters for the bump-control convergence study."""

    t0_fraction: float = 0.5
    epsilon_fractions: tuple = (0.125, 0.0625, 0.03125)
    channel: int = 0


@dataclass(frozen=True)
class VerticalBlock:
    system: object
    initial: TangentPoint
    horizon: float
    control: Optional[ControlSignal]

    @property
    def is_affine(self) -> bool:
        return isinstance(self.system, VerticalAffineSystem)


@dataclass(frozen=True)
class LiftedBlock:
    system: LiftedSystem
    initial: TangentPoint
    horizon: float
    control: Optional[ControlSignal]
    grid: Optional[int] = None
    k_max: Optional[int] = None
    bump: BumpStudy = field(default_factory=BumpStudy)


@dataclass(frozen=True)
class Scenario:
    name: str
    manifold: ChartManifold
    fields: dict
    vertical: Optional[VerticalBlock]
    lifted: Optional[LiftedBlock]
    lift_check_fields: tuple
    lift_check_samples: int


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ScenarioError(f"{context}: missing required key {key!r}")
    return mapping[key]


def _initial_point(manifold: ChartManifold, block: dict, context: str) -> TangentPoint:
    spec = _require(block, "initial", context)
    base = _require(spec, "base", f"{context}.initial")
    fiber = _require(spec, "fiber", f"{context}.initial")
    try:
        return manifold.tangent_point(base, fiber)
    except Exception as err:
        raise ScenarioError(f"{context}.initial: {err}") from err


def _horizon(block: dict, context: str) -> float:
    horizon = float(_require(block, "horizon", context))
    if horizon <= 0:
        raise ScenarioError(f"{context}: horizon must be positive, got {horizon}")
    return horizon


def _control(block: dict, horizon: float, channels: int, context: str) -> Optional[ControlSignal]:
    values = block.get("control_values")
    if values is None:
        return None
    arr = np.atleast_2d(np.asarray(values, dtype=float))
    if arr.shape[1] != channels:
        raise ScenarioError(
            f"{context}: control rows have {arr.shape[1]} entries, system has {channels} controls"
        )
    return ControlSignal(horizon=horizon, values=arr)


def _named_fields(fields: dict, names, context: str):
    out = []
    for name in names:
        if name not in fields:
            raise ScenarioError(f"{context}: field {name!r} is not defined")
        out.append(fields[name])
    return out


def load_scenario(source) -> Scenario:
    """Parse a scenario from a path, JSON string, or already-loaded dict."""
    if isinstance(source, dict):
        doc = source
    else:
        path = Path(source)
        if not path.exists():
            raise ScenarioError(f"scenario file not found: {path}")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as err:
            raise ScenarioError(f"scenario is not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    if doc.get("schema") != SCHEMA:
        raise ScenarioError(
            f"unsupported scenario schema {doc.get('schema')!r}; expected {SCHEMA!r}"
        )
    name = doc.get("name", "unnamed")
    try:
        manifold = builtin_manifold(_require(doc, "manifold", "scenario"))
    except ValueError as err:
        raise ScenarioError(str(err)) from err

    fields = {}
    for fname, exprs in doc.get("fields", {}).items():
        try:
            fields[fname] = field_from_expressions(manifold, exprs, name=fname)
        except ExpressionError as err:
            raise ScenarioError(f"field {fname!r}: {err}") from err
        except ValueError as err:
            raise ScenarioError(f"field {fname!r}: {err}") from err

    vertical = None
    if "vertical_system" in doc:
        block = doc["vertical_system"]
        context = "vertical_system"
        horizon = _horizon(block, context)
        initial = _initial_point(manifold, block, context)
        if "fiber_dynamics" in block:
            control_dim = int(block.get("control_dim", 0))
            try:
                dynamics = fiber_dynamics_from_expressions(
                    manifold, block["fiber_dynamics"], control_dim
                )
            except ExpressionError as err:
                raise ScenarioError(f"{context}.fiber_dynamics: {err}") from err
            system = GeneralVerticalSystem(
                manifold=manifold, dynamics=dynamics, control_dim=control_dim
            )
            control = _control(block, horizon, control_dim, context) if control_dim else None
        else:
            drift = _named_fields(fields, [_require(block, "drift", context)], context)[0]
            controls = _named_fields(fields, _require(block, "controls", context), context)
            system = VerticalAffineSystem(manifold=manifold, drift=drift, controls=tuple(controls))
            control = _control(block, horizon, len(controls), context)
        vertical = VerticalBlock(system=system, initial=initial, horizon=horizon, control=control)

    lifted = None
    if "lifted_system" in doc:
        block = doc["lifted_system"]
        context = "lifted_system"
        horizon = _horizon(block, context)
        initial = _initial_point(manifold, block, context)
        drift = _named_fields(fields, [_require(block, "drift", context)], context)[0]
        controls = _named_fields(fields, _require(block, "controls", context), context)
        system = LiftedSystem(manifold=manifold, drift=drift, controls=tuple(controls))
        control = _control(block, horizon, len(controls), context)
        bump_spec = block.get("bump", {})
        bump = BumpStudy(
            t0_fraction=float(bump_spec.get("t0_fraction", 0.5)),
            epsilon_fractions=tuple(
                float(e) for e in bump_spec.get("epsilon_fractions", (0.125, 0.0625, 0.03125))
            ),
            channel=int(bump_spec.get("channel", 0)),
        )
        if not 0.0 <= bump.t0_fraction < 1.0:
            raise ScenarioError(f"{context}.bump: t0_fraction must lie in [0, 1)")
        lifted = LiftedBlock(
            system=system,
            initial=initial,
            horizon=horizon,
            control=control,
            grid=int(block["grid"]) if "grid" in block else None,
            k_max=int(block["k_max"]) if "k_max" in block else None,
            bump=bump,
        )

    check_spec = doc.get("lift_check", {})
    check_fields = tuple(check_spec.get("fields", sorted(fields)))
    _named_fields(fields, check_fields, "lift_check")
    samples = int(check_spec.get("samples", 50))
    if samples < 1:
        raise ScenarioError("lift_check: samples must be >= 1")

    return Scenario(
        name=name,
        manifold=manifold,
        fields=fields,
        vertical=vertical,
        lifted=lifted,
        lift_check_fields=check_fields,
        lift_check_samples=samples,
    )
